//! File formats: PGM and EUVOL images, CSV surfaces, curves, terrains and
//! points, the bifiltered complex text format, and PGM heatmaps.
//!
//! CSV files use `,` separators, LF line endings and `#`-prefixed metadata
//! lines of the form `# key: value`. Floats are written in shortest
//! round-trip form, so every save/load pair is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

use crate::complex::{BifilteredComplex, ComplexError, EulerCurve, EulerSurface, ThresholdGrid};
use crate::cubical::{CubicalError, GrayImage};
use crate::stats::{Terrain, TerrainKind};

pub const COMPLEX_FORMAT_VERSION: u32 = 1;
pub const CSV_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("payload too short: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("maxval {0} is outside 1..=65535")]
    Maxval(u64),
    #[error("sample {value} exceeds maxval {maxval}")]
    SampleRange { value: u64, maxval: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("grid has {grid} entries but the matrix has {matrix} along that axis")]
    Shape { grid: usize, matrix: usize },
    #[error("heatmap input has no finite, unmasked cells")]
    AllSentinel,
    #[error(transparent)]
    Image(#[from] CubicalError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Ordered `key: value` metadata lines.
pub type Metadata = Vec<(String, String)>;

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

// ---------------------------------------------------------------- PGM

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmEncoding {
    /// `P2`, whitespace-separated decimal samples.
    Ascii,
    /// `P5`, one byte per sample, or two big-endian bytes when maxval > 255.
    #[default]
    Binary,
}

/// Reads header tokens, skipping `#` comments; returns the tokens and the
/// offset just past the single whitespace byte that ends the last one.
fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize), IoError> {
    let mut tokens = Vec::with_capacity(count);
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i == bytes.len() {
            return Err(IoError::Header(format!(
                "expected {count} header fields, found {}",
                tokens.len()
            )));
        }
        if bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, (i + 1).min(bytes.len())))
}

fn header_number(token: &str, what: &str) -> Result<u64, IoError> {
    token
        .parse()
        .map_err(|_| IoError::Header(format!("{what} `{token}` is not a non-negative integer")))
}

/// Decodes a P2 or P5 image and rescales samples to `levels` intensities by
/// `floor(v * levels / (maxval + 1))`.
pub fn parse_pgm(bytes: &[u8], levels: u32) -> Result<GrayImage, IoError> {
    let (tokens, offset) = header_tokens(bytes, 4)?;
    let encoding = match tokens[0].as_str() {
        "P2" => PgmEncoding::Ascii,
        "P5" => PgmEncoding::Binary,
        other => return Err(IoError::Header(format!("unknown magic `{other}`"))),
    };
    let width = header_number(&tokens[1], "width")? as usize;
    let height = header_number(&tokens[2], "height")? as usize;
    let maxval = header_number(&tokens[3], "maxval")?;
    if width == 0 || height == 0 {
        return Err(IoError::Header(format!("image size {width}x{height} is empty")));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(IoError::Maxval(maxval));
    }
    let count = width * height;
    let samples: Vec<u64> = match encoding {
        PgmEncoding::Ascii => {
            let text = String::from_utf8_lossy(&bytes[offset..]);
            let mut out = Vec::with_capacity(count);
            for tok in text.split_ascii_whitespace().take(count) {
                out.push(tok.parse().map_err(|_| IoError::Header(format!("sample `{tok}` is not an integer")))?);
            }
            out
        }
        PgmEncoding::Binary => {
            let width_bytes = if maxval > 255 { 2 } else { 1 };
            let payload = &bytes[offset..];
            let found = payload.len() / width_bytes;
            if found < count {
                return Err(IoError::Truncated { expected: count, found });
            }
            payload
                .chunks_exact(width_bytes)
                .take(count)
                .map(|c| c.iter().fold(0u64, |acc, &b| acc << 8 | u64::from(b)))
                .collect()
        }
    };
    if samples.len() < count {
        return Err(IoError::Truncated {
            expected: count,
            found: samples.len(),
        });
    }
    let data = samples
        .into_iter()
        .map(|v| {
            if v > maxval {
                Err(IoError::SampleRange { value: v, maxval })
            } else {
                Ok((v * u64::from(levels) / (maxval + 1)) as u32)
            }
        })
        .collect::<Result<Vec<u32>, _>>()?;
    Ok(GrayImage::new(vec![height, width], levels, data)?)
}

/// Encodes a 2D image with maxval `levels - 1`.
pub fn encode_pgm(image: &GrayImage, encoding: PgmEncoding) -> Result<Vec<u8>, IoError> {
    if image.ndim() != 2 {
        return Err(CubicalError::Not2d.into());
    }
    let (height, width) = (image.dims()[0], image.dims()[1]);
    let maxval = image.levels().saturating_sub(1).max(1);
    if maxval > 65535 {
        return Err(IoError::Maxval(u64::from(maxval)));
    }
    let magic = match encoding {
        PgmEncoding::Ascii => "P2",
        PgmEncoding::Binary => "P5",
    };
    let mut out = format!("{magic}\n{width} {height}\n{maxval}\n").into_bytes();
    match encoding {
        PgmEncoding::Ascii => {
            for row in image.data().chunks(width) {
                let line: Vec<String> = row.iter().map(u32::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        PgmEncoding::Binary => {
            for &v in image.data() {
                if maxval > 255 {
                    out.extend_from_slice(&(v as u16).to_be_bytes());
                } else {
                    out.push(v as u8);
                }
            }
        }
    }
    Ok(out)
}

pub fn load_pgm(path: &Path, levels: u32) -> Result<GrayImage, IoError> {
    parse_pgm(&fs::read(path)?, levels)
}

pub fn save_pgm(path: &Path, image: &GrayImage, encoding: PgmEncoding) -> Result<(), IoError> {
    fs::write(path, encode_pgm(image, encoding)?)?;
    Ok(())
}

// -------------------------------------------------------------- EUVOL

/// Decodes `EUVOL n1 n2 n3 L` followed by `n1*n2*n3` slice-row-major
/// intensities in `0..L`.
pub fn parse_euvol(text: &str) -> Result<GrayImage, IoError> {
    let mut tokens = text.split_ascii_whitespace();
    match tokens.next() {
        Some("EUVOL") => {}
        other => return Err(IoError::Header(format!("expected `EUVOL`, found {other:?}"))),
    }
    let mut header = [0u64; 4];
    for (slot, name) in header.iter_mut().zip(["n1", "n2", "n3", "levels"]) {
        let tok = tokens
            .next()
            .ok_or_else(|| IoError::Header(format!("missing {name}")))?;
        *slot = header_number(tok, name)?;
    }
    let dims: Vec<usize> = header[..3].iter().map(|&v| v as usize).collect();
    let levels = u32::try_from(header[3]).map_err(|_| IoError::Header("levels too large".into()))?;
    let count: usize = dims.iter().product();
    let mut data = Vec::with_capacity(count);
    for tok in tokens.take(count) {
        data.push(
            tok.parse::<u32>()
                .map_err(|_| IoError::Header(format!("sample `{tok}` is not an integer")))?,
        );
    }
    if data.len() < count {
        return Err(IoError::Truncated {
            expected: count,
            found: data.len(),
        });
    }
    Ok(GrayImage::new(dims, levels, data)?)
}

pub fn encode_euvol(image: &GrayImage) -> Result<String, IoError> {
    if image.ndim() != 3 {
        return Err(CubicalError::UnsupportedDimension(image.ndim()).into());
    }
    let d = image.dims();
    let mut out = format!("EUVOL {} {} {} {}\n", d[0], d[1], d[2], image.levels());
    for row in image.data().chunks(d[2]) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Loads a PGM or EUVOL file, chosen by its leading magic.
pub fn load_image(path: &Path, levels: u32) -> Result<GrayImage, IoError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"EUVOL") {
        parse_euvol(&String::from_utf8_lossy(&bytes))
    } else {
        parse_pgm(&bytes, levels)
    }
}

/// Saves 2D images as binary PGM and 3D images as EUVOL.
pub fn save_image(path: &Path, image: &GrayImage) -> Result<(), IoError> {
    match image.ndim() {
        2 => save_pgm(path, image, PgmEncoding::Binary),
        _ => Ok(fs::write(path, encode_euvol(image)?)?),
    }
}

// ---------------------------------------------------------------- CSV

fn write_metadata(out: &mut String, meta: &[(String, String)]) {
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}: {v}");
    }
}

/// Splits a CSV document into metadata pairs and numbered data lines.
fn split_csv(text: &str) -> (Metadata, Vec<(usize, &str)>) {
    let mut meta = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        } else if !line.trim().is_empty() {
            rows.push((i + 1, line));
        }
    }
    (meta, rows)
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str) -> Result<T, IoError> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse `{field}`")))
}

fn join<T: ToString>(prefix: String, values: impl Iterator<Item = T>) -> String {
    let mut s = prefix;
    for v in values {
        s.push(',');
        s.push_str(&v.to_string());
    }
    s
}

/// Header `grid1\grid2,<grid2...>` then one row per grid1 threshold.
fn write_matrix<T: ToString + Copy>(
    meta: &[(String, String)],
    grid1: &ThresholdGrid,
    grid2: &ThresholdGrid,
    values: &Array2<T>,
) -> String {
    let mut out = String::new();
    write_metadata(&mut out, meta);
    out.push_str(&join("grid1\\grid2".into(), grid2.values().iter()));
    out.push('\n');
    for (a, row) in grid1.values().iter().zip(values.outer_iter()) {
        out.push_str(&join(a.to_string(), row.iter().copied()));
        out.push('\n');
    }
    out
}

type Matrix<T> = (Metadata, ThresholdGrid, ThresholdGrid, Array2<T>);

fn read_matrix<T: std::str::FromStr>(text: &str) -> Result<Matrix<T>, IoError> {
    let (meta, rows) = split_csv(text);
    let ((hline, header), body) = rows
        .split_first()
        .ok_or_else(|| IoError::Header("missing grid header row".into()))?;
    let mut fields = header.split(',');
    fields.next();
    let grid2 = fields
        .map(|f| parse_field::<f64>(*hline, f))
        .collect::<Result<Vec<_>, _>>()?;
    let mut grid1 = Vec::with_capacity(body.len());
    let mut cells = Vec::with_capacity(body.len() * grid2.len());
    for &(line, row) in body {
        let mut fields = row.split(',');
        grid1.push(parse_field::<f64>(line, fields.next().unwrap_or(""))?);
        let before = cells.len();
        for f in fields {
            cells.push(parse_field::<T>(line, f)?);
        }
        let width = cells.len() - before;
        if width != grid2.len() {
            return Err(IoError::Shape {
                grid: grid2.len(),
                matrix: width,
            });
        }
    }
    let values = Array2::from_shape_vec((grid1.len(), grid2.len()), cells).expect("checked row widths");
    Ok((meta, ThresholdGrid::new(grid1)?, ThresholdGrid::new(grid2)?, values))
}

/// Real-valued matrix over two grids, in the surface CSV layout.
pub fn real_matrix_to_csv(
    grid1: &ThresholdGrid,
    grid2: &ThresholdGrid,
    values: &Array2<f64>,
    meta: &[(String, String)],
) -> String {
    write_matrix(meta, grid1, grid2, values)
}

pub fn surface_to_csv(surface: &EulerSurface, meta: &[(String, String)]) -> String {
    write_matrix(meta, &surface.grid1, &surface.grid2, &surface.chi)
}

pub fn surface_from_csv(text: &str) -> Result<EulerSurface, IoError> {
    let (_, grid1, grid2, chi) = read_matrix::<i64>(text)?;
    Ok(EulerSurface::new(grid1, grid2, chi)?)
}

pub fn save_surface_csv(path: &Path, surface: &EulerSurface, meta: &[(String, String)]) -> Result<(), IoError> {
    Ok(fs::write(path, surface_to_csv(surface, meta))?)
}

pub fn load_surface_csv(path: &Path) -> Result<EulerSurface, IoError> {
    surface_from_csv(&fs::read_to_string(path)?)
}

pub fn curve_to_csv(curve: &EulerCurve, meta: &[(String, String)]) -> String {
    let mut out = String::new();
    write_metadata(&mut out, meta);
    out.push_str("threshold,chi\n");
    for (a, c) in curve.grid.values().iter().zip(&curve.chi) {
        let _ = writeln!(out, "{a},{c}");
    }
    out
}

pub fn curve_from_csv(text: &str) -> Result<EulerCurve, IoError> {
    let (_, rows) = split_csv(text);
    let mut grid = Vec::new();
    let mut chi = Vec::new();
    for &(line, row) in rows.iter().skip(1) {
        let (a, c) = row
            .split_once(',')
            .ok_or_else(|| parse_err(line, "expected `threshold,chi`"))?;
        grid.push(parse_field::<f64>(line, a)?);
        chi.push(parse_field::<i64>(line, c)?);
    }
    Ok(EulerCurve::new(ThresholdGrid::new(grid)?, chi)?)
}

pub fn save_curve_csv(path: &Path, curve: &EulerCurve, meta: &[(String, String)]) -> Result<(), IoError> {
    Ok(fs::write(path, curve_to_csv(curve, meta))?)
}

pub fn load_curve_csv(path: &Path) -> Result<EulerCurve, IoError> {
    curve_from_csv(&fs::read_to_string(path)?)
}

/// Terrain CSV; metadata records the kind, the sd convention and the
/// sentinel cells ahead of any caller-supplied lines.
pub fn terrain_to_csv(terrain: &Terrain, meta: &[(String, String)]) -> String {
    let cells: Vec<String> = terrain.sentinels.iter().map(|(s, t)| format!("{s}:{t}")).collect();
    let mut all: Metadata = vec![
        ("kind".into(), terrain.kind.as_str().into()),
        ("sd".into(), "population".into()),
        ("sentinels".into(), terrain.sentinels.len().to_string()),
        ("sentinel_cells".into(), cells.join(";")),
    ];
    all.extend(meta.iter().cloned());
    write_matrix(&all, &terrain.grid1, &terrain.grid2, &terrain.values)
}

pub fn terrain_from_csv(text: &str) -> Result<Terrain, IoError> {
    let (meta, grid1, grid2, values) = read_matrix::<f64>(text)?;
    let lookup = |key: &str| meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let kind = match lookup("kind") {
        Some("normalized") => TerrainKind::Normalized,
        Some("raw") | None => TerrainKind::Raw,
        Some(other) => return Err(IoError::Header(format!("unknown terrain kind `{other}`"))),
    };
    let mut sentinels = Vec::new();
    for cell in lookup("sentinel_cells").unwrap_or("").split(';').filter(|c| !c.is_empty()) {
        let (s, t) = cell
            .split_once(':')
            .ok_or_else(|| IoError::Header(format!("bad sentinel cell `{cell}`")))?;
        let parse = |v: &str| v.parse::<usize>().map_err(|_| IoError::Header(format!("bad sentinel cell `{cell}`")));
        sentinels.push((parse(s)?, parse(t)?));
    }
    Ok(Terrain {
        grid1,
        grid2,
        values,
        kind,
        sentinels,
    })
}

pub fn save_terrain_csv(path: &Path, terrain: &Terrain, meta: &[(String, String)]) -> Result<(), IoError> {
    Ok(fs::write(path, terrain_to_csv(terrain, meta))?)
}

pub fn load_terrain_csv(path: &Path) -> Result<Terrain, IoError> {
    terrain_from_csv(&fs::read_to_string(path)?)
}

/// Points as `x,y[,z]` rows under an `x,y[,z]` header.
pub fn points_to_csv(dim: usize, coords: &[f64], meta: &[(String, String)]) -> String {
    let mut out = String::new();
    write_metadata(&mut out, meta);
    out.push_str(["x", "y", "z"][..dim].join(",").as_str());
    out.push('\n');
    for p in coords.chunks(dim) {
        let row: Vec<String> = p.iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses point rows; a first row that is not numeric is taken as a header.
/// Returns the dimension and the flat coordinates.
pub fn points_from_csv(text: &str) -> Result<(usize, Vec<f64>), IoError> {
    let (_, rows) = split_csv(text);
    let mut dim = None;
    let mut coords = Vec::new();
    for (k, &(line, row)) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.trim().parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if k == 0 => continue,
            Err(_) => return Err(parse_err(line, "non-numeric coordinate")),
        };
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(parse_err(line, format!("expected {d} coordinates, found {}", values.len())))
            }
            _ => {}
        }
        coords.extend(values);
    }
    let dim = dim.ok_or_else(|| IoError::Header("no points".into()))?;
    Ok((dim, coords))
}

// ------------------------------------------------------------ complex

/// `EULERCPLX 1` followed by one `dim <d> faces <ids...> h1 <v> h2 <v>`
/// line per cell; cell ids are line order.
pub fn complex_to_text(complex: &BifilteredComplex) -> String {
    let mut out = format!("EULERCPLX {COMPLEX_FORMAT_VERSION}\n");
    for cell in complex.cells() {
        let (h1, h2) = complex.values(cell.id);
        let faces: Vec<String> = complex.faces(cell.id).iter().map(usize::to_string).collect();
        let _ = write!(out, "dim {} faces", cell.dim);
        for f in faces {
            out.push(' ');
            out.push_str(&f);
        }
        let _ = writeln!(out, " h1 {h1} h2 {h2}");
    }
    out
}

pub fn complex_from_text(text: &str) -> Result<BifilteredComplex, IoError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == format!("EULERCPLX {COMPLEX_FORMAT_VERSION}") => {}
        other => {
            return Err(IoError::Header(format!(
                "expected `EULERCPLX {COMPLEX_FORMAT_VERSION}`, found {:?}",
                other.map(|(_, l)| l)
            )))
        }
    }
    let mut dims = Vec::new();
    let mut values = Vec::new();
    let mut faces = Vec::new();
    for (i, l) in lines {
        let line = i + 1;
        let tok: Vec<&str> = l.split_ascii_whitespace().collect();
        let n = tok.len();
        if n < 7 || tok[0] != "dim" || tok[2] != "faces" || tok[n - 4] != "h1" || tok[n - 2] != "h2" {
            return Err(parse_err(line, "expected `dim <d> faces <ids...> h1 <v> h2 <v>`"));
        }
        dims.push(parse_field::<usize>(line, tok[1])?);
        faces.push(
            tok[3..n - 4]
                .iter()
                .map(|f| parse_field::<usize>(line, f))
                .collect::<Result<Vec<_>, _>>()?,
        );
        values.push((parse_field::<f64>(line, tok[n - 3])?, parse_field::<f64>(line, tok[n - 1])?));
    }
    Ok(BifilteredComplex::new(dims, values, faces)?)
}

// ------------------------------------------------------------ heatmap

/// 8-bit rendering of a matrix plus the bounds used to scale it.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub image: GrayImage,
    pub min: f64,
    pub max: f64,
    /// Count of masked cells, all rendered as 255.
    pub masked: usize,
}

/// Linear min-max scaling of unmasked cells to `0..=255`; a constant matrix
/// renders as 128. Masked cells and non-finite values render as 255.
pub fn render_heatmap(values: &Array2<f64>, masked: &[(usize, usize)]) -> Result<Heatmap, IoError> {
    let is_masked = |s: usize, t: usize, v: f64| !v.is_finite() || masked.contains(&(s, t));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut hidden = 0;
    for ((s, t), &v) in values.indexed_iter() {
        if is_masked(s, t, v) {
            hidden += 1;
        } else {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if hidden == values.len() {
        return Err(IoError::AllSentinel);
    }
    let data = values
        .indexed_iter()
        .map(|((s, t), &v)| {
            if is_masked(s, t, v) {
                255
            } else if hi == lo {
                128
            } else {
                ((v - lo) / (hi - lo) * 255.0).round() as u32
            }
        })
        .collect();
    let (rows, cols) = values.dim();
    Ok(Heatmap {
        image: GrayImage::new(vec![rows, cols], 256, data)?,
        min: lo,
        max: hi,
        masked: hidden,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::brute_force_surface;
    use crate::cubical::{ecs_image_pair, CubicalBifiltration, EngineOptions};
    use crate::synth::gen_correlated_pair;
    use ndarray::array;

    #[test]
    fn minimal_ascii_pgm() {
        let img = parse_pgm(b"P2\n1 1\n255\n0\n", 256).unwrap();
        assert_eq!((img.dims(), img.data()), (&[1usize, 1][..], &[0u32][..]));
    }

    #[test]
    fn pgm_comments_and_rescale() {
        let img = parse_pgm(b"P2 # comment\n2 1\n# another\n65535\n0 65535\n", 16).unwrap();
        assert_eq!(img.data(), &[0, 15]);
        let img = parse_pgm(b"P2\n3 1\n3\n0 2 3\n", 8).unwrap();
        assert_eq!(img.data(), &[0, 4, 6]);
    }

    #[test]
    fn pgm_round_trips() {
        let (a, _) = gen_correlated_pair(16, 16, 0.5, 256, 3).unwrap();
        for enc in [PgmEncoding::Ascii, PgmEncoding::Binary] {
            assert_eq!(parse_pgm(&encode_pgm(&a, enc).unwrap(), 256).unwrap(), a);
        }
        let wide = GrayImage::new(vec![2, 3], 4096, vec![0, 1, 300, 4095, 17, 2048]).unwrap();
        assert_eq!(parse_pgm(&encode_pgm(&wide, PgmEncoding::Binary).unwrap(), 4096).unwrap(), wide);
    }

    #[test]
    fn pgm_errors_are_distinct() {
        assert!(matches!(parse_pgm(b"P5\n4 4\n255\nabc", 256), Err(IoError::Truncated { expected: 16, found: 3 })));
        assert!(matches!(parse_pgm(b"P5\n4 4\n", 256), Err(IoError::Header(_))));
        assert!(matches!(parse_pgm(b"P3\n1 1\n255\n0\n", 256), Err(IoError::Header(_))));
        assert!(matches!(parse_pgm(b"P2\n1 1\n70000\n0\n", 256), Err(IoError::Maxval(70000))));
        assert!(matches!(parse_pgm(b"P2\n2 1\n255\n0\n", 256), Err(IoError::Truncated { .. })));
        assert!(matches!(parse_pgm(b"P2\n1 1\n10\n11\n", 256), Err(IoError::SampleRange { .. })));
    }

    #[test]
    fn euvol_round_trip() {
        let vol = GrayImage::new(vec![2, 2, 3], 8, (0..12).map(|v| v % 8).collect()).unwrap();
        assert_eq!(parse_euvol(&encode_euvol(&vol).unwrap()).unwrap(), vol);
        assert!(matches!(parse_euvol("EUVOL 2 2 2 8\n1 2 3"), Err(IoError::Truncated { .. })));
    }

    #[test]
    fn surface_csv_round_trips() {
        let g = ThresholdGrid::new(vec![0.25]).unwrap();
        let one = EulerSurface::new(g.clone(), g, array![[-3]]).unwrap();
        let meta = vec![("source".to_string(), "test".to_string())];
        let text = surface_to_csv(&one, &meta);
        assert!(text.starts_with("# source: test\ngrid1\\grid2,0.25\n"));
        assert_eq!(surface_from_csv(&text).unwrap(), one);

        let (a, b) = gen_correlated_pair(6, 5, 0.3, 16, 8).unwrap();
        let s = ecs_image_pair(&a, &b, &EngineOptions::default()).unwrap();
        assert_eq!(surface_from_csv(&surface_to_csv(&s, &[])).unwrap(), s);
        let oracle = CubicalBifiltration::new(a, b).unwrap();
        assert_eq!(brute_force_surface(&oracle, &s.grid1, &s.grid2), s);
    }

    #[test]
    fn surface_csv_shape_error() {
        let text = "grid1\\grid2,0,1,2\n0,1,1\n1,1,1\n";
        assert!(matches!(surface_from_csv(text), Err(IoError::Shape { grid: 3, matrix: 2 })));
    }

    #[test]
    fn curve_and_points_round_trip() {
        let c = EulerCurve::new(ThresholdGrid::new(vec![0.1, 0.7]).unwrap(), vec![5, -2]).unwrap();
        assert_eq!(curve_from_csv(&curve_to_csv(&c, &[])).unwrap(), c);
        let coords = vec![0.1, 0.2, 1e-17, 3.0];
        assert_eq!(points_from_csv(&points_to_csv(2, &coords, &[])).unwrap(), (2, coords));
        assert_eq!(points_from_csv("1,2,3\n4,5,6\n").unwrap(), (3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        assert!(points_from_csv("x,y\n1,2\n3\n").is_err());
    }

    #[test]
    fn terrain_csv_round_trip() {
        let g = ThresholdGrid::integer_levels(2);
        let t = Terrain {
            grid1: g.clone(),
            grid2: g,
            values: array![[0.0, -1.5], [1.0 / 3.0, 2.0]],
            kind: TerrainKind::Normalized,
            sentinels: vec![(0, 0)],
        };
        let text = terrain_to_csv(&t, &[]);
        assert!(text.contains("# kind: normalized\n# sd: population\n# sentinels: 1\n"));
        assert_eq!(terrain_from_csv(&text).unwrap(), t);
    }

    #[test]
    fn complex_text_round_trip() {
        let k = BifilteredComplex::new(
            vec![0, 0, 1],
            vec![(0.0, 1.0), (0.5, 0.25), (0.5, 1.0)],
            vec![vec![], vec![], vec![0, 1]],
        )
        .unwrap();
        let text = complex_to_text(&k);
        assert_eq!(
            text,
            "EULERCPLX 1\ndim 0 faces h1 0 h2 1\ndim 0 faces h1 0.5 h2 0.25\ndim 1 faces 0 1 h1 0.5 h2 1\n"
        );
        assert_eq!(complex_from_text(&text).unwrap(), k);
        assert!(complex_from_text("EULERCPLX 2\n").is_err());
        assert!(matches!(
            complex_from_text("EULERCPLX 1\ndim 1 faces 0 h1 0 h2 0\n"),
            Err(IoError::Complex(_))
        ));
    }

    #[test]
    fn heatmap_examples() {
        let h = render_heatmap(&Array2::from_elem((2, 3), 4.5), &[]).unwrap();
        assert!(h.image.data().iter().all(|&v| v == 128));
        let h = render_heatmap(&array![[1.0, 3.0], [-1.0, 0.0]], &[]).unwrap();
        assert_eq!(h.image.data(), &[128, 255, 0, 64]);
        assert_eq!((h.min, h.max, h.masked), (-1.0, 3.0, 0));
        let h = render_heatmap(&array![[1.0, 3.0], [-1.0, 0.0]], &[(0, 1)]).unwrap();
        assert_eq!(h.image.data(), &[255, 255, 0, 128]);
        assert_eq!(h.masked, 1);
        assert!(matches!(render_heatmap(&array![[1.0]], &[(0, 0)]), Err(IoError::AllSentinel)));
    }
}
