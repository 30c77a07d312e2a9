use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use eulersurf::complex::{brute_force_curve, brute_force_surface, EulerCurve, EulerSurface, Parameter, ThresholdGrid};
use eulersurf::cubical::{
    derived_image, ecc_image, ecs_image_pair, ChangeMode, ChangeTable, CubicalBifiltration, CubicalError,
    DerivedKind, EngineOptions, GrayImage,
};
use eulersurf::io::{self, IoError, PgmEncoding};
use eulersurf::simplicial::{
    alpha_filtration, delaunay_2d, ecc_points, ecs_points, height_filter, knn_density_filter, vietoris_rips,
    DelaunayOptions, GridChoice, PointCloud, SimplicialBifiltration, SimplicialComplex, SimplicialError,
};
use eulersurf::stats::{
    expected_random_pair_surface, normalized_terrain, region_aggregate, subsample, terrain,
    Featurizable, Region, StatsError, SurfaceEnsemble, ZScore,
};
use eulersurf::synth::{self, SynthError};
use serde_json::{json, Value};

use crate::args::*;
use crate::manifest::{FileDigest, RunManifest};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CubicalError> for CliError {
    fn from(e: CubicalError) -> Self {
        match e {
            CubicalError::UnknownDerivedKind(_) | CubicalError::InvalidLevels(..) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SimplicialError> for CliError {
    fn from(e: SimplicialError) -> Self {
        match e {
            SimplicialError::NonUnitDirection(_)
            | SimplicialError::DirectionDimension { .. }
            | SimplicialError::MaxDim(_)
            | SimplicialError::KZero => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::ProbabilityRange(_) | StatsError::ZeroStride | StatsError::EmptyImage => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Image(inner) => inner.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<eulersurf::complex::ComplexError> for CliError {
    fn from(e: eulersurf::complex::ComplexError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Shared state for one invocation.
struct Run {
    threads: usize,
    manifest: RunManifest,
}

impl Run {
    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    fn format(&mut self, name: &str, version: u32) {
        self.manifest.formats.insert(name.to_string(), version);
    }

    fn note(&mut self, key: &str, value: Value) {
        self.manifest.notes.insert(key.to_string(), value);
    }

    fn engine(&self, options: &ImageOptions) -> Result<EngineOptions> {
        let mode_3d = match (options.mode_3d, &options.table_cache) {
            (Mode3d::Direct, _) => ChangeMode::Direct,
            (Mode3d::Eager, Some(path)) => ChangeMode::Eager(Arc::new(ChangeTable::load_or_build(path, 3)?)),
            (Mode3d::Eager, None) => ChangeMode::Eager(Arc::new(ChangeTable::precompute(3)?)),
        };
        Ok(EngineOptions {
            threads: self.threads,
            mode_3d,
        })
    }

    /// Writes bytes to `output` (recording it) or to stdout.
    fn emit(&mut self, output: Option<&Path>, bytes: &[u8]) -> Result<()> {
        match output {
            Some(path) => {
                fs::write(path, bytes)?;
                self.manifest.outputs.push(FileDigest::of(path)?);
            }
            None => {
                use std::io::Write;
                std::io::stdout().write_all(bytes)?;
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        if !self.manifest.outputs.is_empty() {
            self.manifest.write()?;
        }
        Ok(())
    }
}

pub fn execute(cli: Cli, argv: &[String]) -> Result<()> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let parameters = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    let mut run = Run {
        threads,
        manifest: RunManifest::new(argv, parameters),
    };
    run.note("threads", json!(threads));
    match &cli.command {
        Command::Ecc(a) => ecc(&mut run, a)?,
        Command::Ecs(a) => ecs(&mut run, a)?,
        Command::EccPoints(a) => ecc_points_cmd(&mut run, a)?,
        Command::EcsPoints(a) => ecs_points_cmd(&mut run, a)?,
        Command::Terrain(a) => terrain_cmd(&mut run, a)?,
        Command::Expected(a) => expected(&mut run, a)?,
        Command::Featurize(a) => featurize_cmd(&mut run, a)?,
        Command::Gen(a) => gen(&mut run, &a.model)?,
        Command::OracleCheck(a) => oracle_check(&mut run, a)?,
        Command::Bench(a) => bench(&mut run, a)?,
    }
    run.finish()
}

fn meta(pairs: &[(&str, String)]) -> io::Metadata {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn curve_mismatches(a: &EulerCurve, b: &EulerCurve) -> usize {
    a.chi.iter().zip(&b.chi).filter(|(x, y)| x != y).count()
}

fn surface_mismatches(a: &EulerSurface, b: &EulerSurface) -> usize {
    a.chi.iter().zip(b.chi.iter()).filter(|(x, y)| x != y).count()
}

fn report_oracle(run: &mut Run, mismatches: usize) -> Result<()> {
    eprintln!("oracle: {mismatches} mismatches");
    run.note("oracle_mismatches", json!(mismatches));
    Ok(())
}

fn fail_on_mismatch(mismatches: usize) -> Result<()> {
    if mismatches > 0 {
        Err(CliError::Invariant(format!("brute-force recount disagrees on {mismatches} cells")))
    } else {
        Ok(())
    }
}

fn write_surface(run: &mut Run, out: &OutputOptions, surface: &EulerSurface, lines: io::Metadata) -> Result<()> {
    match out.out {
        OutFormat::Csv => {
            run.format("surface_csv", io::CSV_FORMAT_VERSION);
            let text = io::surface_to_csv(surface, &lines);
            run.emit(out.output.as_deref(), text.as_bytes())
        }
        OutFormat::PgmHeatmap => {
            let values = surface.chi.mapv(|v| v as f64);
            heatmap(run, out, &values, &[])
        }
    }
}

fn heatmap(
    run: &mut Run,
    out: &OutputOptions,
    values: &eulersurf::ndarray::Array2<f64>,
    masked: &[(usize, usize)],
) -> Result<()> {
    let path = out
        .output
        .as_deref()
        .ok_or_else(|| CliError::Usage("--out pgm-heatmap requires --output".into()))?;
    let map = io::render_heatmap(values, masked)?;
    run.note("heatmap_min", json!(map.min));
    run.note("heatmap_max", json!(map.max));
    run.note("heatmap_masked_cells", json!(map.masked));
    run.format("pgm", 5);
    run.emit(Some(path), &io::encode_pgm(&map.image, PgmEncoding::Binary)?)
}

// ------------------------------------------------------------- images

fn load_image(run: &mut Run, path: &Path, levels: u32) -> Result<GrayImage> {
    run.input(path)?;
    Ok(io::load_image(path, levels)?)
}

fn ecc(run: &mut Run, a: &EccArgs) -> Result<()> {
    let image = load_image(run, &a.image, a.image_options.levels)?;
    let curve = ecc_image(&image, &run.engine(&a.image_options)?)?;
    let mut mismatches = 0;
    if a.oracle {
        let oracle = CubicalBifiltration::new(image.clone(), image)?;
        mismatches = curve_mismatches(&curve, &brute_force_curve(&oracle, &curve.grid, Parameter::H1));
        report_oracle(run, mismatches)?;
    }
    run.format("curve_csv", io::CSV_FORMAT_VERSION);
    let lines = meta(&[("kind", "curve".into()), ("image", a.image.display().to_string())]);
    run.emit(a.output.as_deref(), io::curve_to_csv(&curve, &lines).as_bytes())?;
    fail_on_mismatch(mismatches)
}

fn ecs(run: &mut Run, a: &EcsArgs) -> Result<()> {
    let levels = a.image_options.levels;
    let first = load_image(run, &a.image1, levels)?;
    let (second, source) = match (&a.image2, &a.derived) {
        (Some(path), None) => (load_image(run, path, levels)?, path.display().to_string()),
        (None, Some(kind)) => {
            let kind: DerivedKind = kind.parse()?;
            (derived_image(&first, kind)?, format!("derived:{kind:?}"))
        }
        _ => return Err(CliError::Usage("give exactly one of --image2 and --derived".into())),
    };
    let surface = ecs_image_pair(&first, &second, &run.engine(&a.image_options)?)?;
    let mut mismatches = 0;
    if a.oracle {
        let oracle = CubicalBifiltration::new(first, second)?;
        mismatches = surface_mismatches(&surface, &brute_force_surface(&oracle, &surface.grid1, &surface.grid2));
        report_oracle(run, mismatches)?;
    }
    let lines = meta(&[
        ("kind", "surface".into()),
        ("image1", a.image1.display().to_string()),
        ("image2", source),
    ]);
    write_surface(run, &a.output, &surface, lines)?;
    fail_on_mismatch(mismatches)
}

// ------------------------------------------------------------- points

struct PointComplex {
    points: PointCloud,
    complex: SimplicialComplex,
    /// Alpha radii (Delaunay) or Rips radii, aligned with the simplices.
    radii: Vec<f64>,
    kind: &'static str,
}

fn load_points(run: &mut Run, input: &PointsInput) -> Result<PointComplex> {
    run.input(&input.points)?;
    let text = fs::read_to_string(&input.points)?;
    let (dim, coords) = io::points_from_csv(&text)?;
    let points = PointCloud::new(dim, coords)?;
    let spec = input.complex.as_str();
    if spec == "delaunay" {
        let tri = delaunay_2d(
            &points,
            DelaunayOptions {
                jitter_seed: input.jitter_seed,
            },
        )?;
        if let Some(seed) = input.jitter_seed {
            run.manifest.seeds.push(seed);
        }
        let radii = alpha_filtration(&points, &tri)?;
        return Ok(PointComplex {
            points,
            complex: tri.complex,
            radii,
            kind: "alpha",
        });
    }
    if let Some(rest) = spec.strip_prefix("rips:") {
        let mut parts = rest.split(':');
        let radius = parse_number::<f64>(parts.next(), "rips radius")?;
        let max_dim = match parts.next() {
            Some(d) => parse_number::<usize>(Some(d), "rips max_dim")?,
            None => 2,
        };
        let (complex, radii) = vietoris_rips(&points, max_dim, radius)?;
        return Ok(PointComplex {
            points,
            complex,
            radii,
            kind: "rips",
        });
    }
    Err(CliError::Usage(format!("unknown complex `{spec}`; use delaunay or rips:<radius>[:<max_dim>]")))
}

fn parse_number<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| CliError::Usage(format!("{what} must be a number, got {:?}", s.unwrap_or(""))))
}

/// Values of a filtering function on every simplex.
fn filter_values(pc: &PointComplex, spec: &str) -> Result<Vec<f64>> {
    if spec == "alpha" || spec == "rips" {
        if spec != pc.kind {
            return Err(CliError::Usage(format!("`{spec}` is not available on a {} complex", pc.kind)));
        }
        return Ok(pc.radii.clone());
    }
    if let Some(rest) = spec.strip_prefix("knn:") {
        let k = parse_number::<usize>(Some(rest.strip_prefix("k=").unwrap_or(rest)), "knn k")?;
        return Ok(pc.complex.extend_by_max(&knn_density_filter(&pc.points, k)?));
    }
    if let Some(rest) = spec.strip_prefix("height:") {
        let direction = rest
            .split(',')
            .map(|c| parse_number::<f64>(Some(c), "height direction"))
            .collect::<Result<Vec<f64>>>()?;
        return Ok(pc.complex.extend_by_max(&height_filter(&pc.points, &direction)?));
    }
    Err(CliError::Usage(format!(
        "unknown filtering function `{spec}`; use alpha, rips, knn:k=<k> or height:<dx>,<dy>"
    )))
}

fn parse_grid(spec: &str) -> Result<GridChoice> {
    if spec == "unique" {
        return Ok(GridChoice::Unique);
    }
    if let Some(count) = spec.strip_prefix("uniform:") {
        return Ok(GridChoice::Uniform {
            count: parse_number(Some(count), "grid count")?,
        });
    }
    if let Some(rest) = spec.strip_prefix("range:") {
        let mut parts = rest.split(':');
        let lo = parse_number(parts.next(), "grid lower bound")?;
        let hi = parse_number(parts.next(), "grid upper bound")?;
        let count = parse_number(parts.next(), "grid count")?;
        return Ok(GridChoice::Fixed { lo, hi, count });
    }
    Err(CliError::Usage(format!(
        "unknown grid `{spec}`; use unique, uniform:<count> or range:<lo>:<hi>:<count>"
    )))
}

fn export_complex(run: &mut Run, input: &PointsInput, bif: &SimplicialBifiltration) -> Result<()> {
    if let Some(path) = &input.export_complex {
        run.format("eulercplx", io::COMPLEX_FORMAT_VERSION);
        let text = io::complex_to_text(&bif.to_complex()?);
        run.emit(Some(path), text.as_bytes())?;
    }
    Ok(())
}

fn ecc_points_cmd(run: &mut Run, a: &EccPointsArgs) -> Result<()> {
    let pc = load_points(run, &a.input)?;
    let h = filter_values(&pc, &a.h)?;
    let bif = SimplicialBifiltration::new(pc.complex, h.clone(), h)?;
    let grid = bif.grid(Parameter::H1, parse_grid(&a.input.grid)?)?;
    let curve = ecc_points(&bif, Parameter::H1, &grid);
    let mut mismatches = 0;
    if a.oracle {
        mismatches = curve_mismatches(&curve, &brute_force_curve(&bif, &grid, Parameter::H1));
        report_oracle(run, mismatches)?;
    }
    run.format("curve_csv", io::CSV_FORMAT_VERSION);
    let lines = meta(&[
        ("kind", "curve".into()),
        ("points", a.input.points.display().to_string()),
        ("complex", a.input.complex.clone()),
        ("h", a.h.clone()),
    ]);
    run.emit(a.output.as_deref(), io::curve_to_csv(&curve, &lines).as_bytes())?;
    export_complex(run, &a.input, &bif)?;
    fail_on_mismatch(mismatches)
}

fn ecs_points_cmd(run: &mut Run, a: &EcsPointsArgs) -> Result<()> {
    let pc = load_points(run, &a.input)?;
    let h1 = filter_values(&pc, &a.h1)?;
    let h2 = filter_values(&pc, &a.h2)?;
    let bif = SimplicialBifiltration::new(pc.complex, h1, h2)?;
    let grid1 = bif.grid(Parameter::H1, parse_grid(&a.input.grid)?)?;
    let grid2 = bif.grid(Parameter::H2, parse_grid(a.grid2.as_deref().unwrap_or(&a.input.grid))?)?;
    let surface = ecs_points(&bif, &grid1, &grid2, run.threads);
    let mut mismatches = 0;
    if a.oracle {
        mismatches = surface_mismatches(&surface, &brute_force_surface(&bif, &grid1, &grid2));
        report_oracle(run, mismatches)?;
    }
    let lines = meta(&[
        ("kind", "surface".into()),
        ("points", a.input.points.display().to_string()),
        ("complex", a.input.complex.clone()),
        ("h1", a.h1.clone()),
        ("h2", a.h2.clone()),
    ]);
    write_surface(run, &a.output, &surface, lines)?;
    export_complex(run, &a.input, &bif)?;
    fail_on_mismatch(mismatches)
}

// -------------------------------------------------------------- stats

fn load_ensemble(run: &mut Run, dir: &Path) -> Result<SurfaceEnsemble> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!("no .csv surfaces in {}", dir.display())));
    }
    let mut surfaces = Vec::with_capacity(files.len());
    for f in &files {
        run.input(f)?;
        surfaces.push(io::load_surface_csv(f).map_err(|e| CliError::Data(format!("{}: {e}", f.display())))?);
    }
    Ok(SurfaceEnsemble::new(surfaces)?)
}

fn terrain_cmd(run: &mut Run, a: &TerrainArgs) -> Result<()> {
    let first = load_ensemble(run, &a.a)?;
    let second = load_ensemble(run, &a.b)?;
    let mut t = if a.normalized {
        normalized_terrain(&first, &second)?
    } else {
        terrain(&first, &second)?
    };
    if a.abs {
        t = t.abs();
    }
    run.note("sd_convention", json!("population"));
    run.note("sentinel_cells", json!(t.sentinels));
    if let Some(c) = a.region {
        let summary = region_aggregate(&t, &Region::AtLeast(c))?;
        eprintln!(
            "region |value| >= {c}: {} cells, mean {}, max {} at {:?}",
            summary.count, summary.mean, summary.max, summary.argmax
        );
        run.note("region", serde_json::to_value(summary).unwrap_or(Value::Null));
    }
    match a.output.out {
        OutFormat::Csv => {
            run.format("terrain_csv", io::CSV_FORMAT_VERSION);
            let lines = meta(&[
                ("ensemble_a", format!("{} ({} surfaces)", a.a.display(), first.len())),
                ("ensemble_b", format!("{} ({} surfaces)", a.b.display(), second.len())),
                ("abs", a.abs.to_string()),
            ]);
            let text = io::terrain_to_csv(&t, &lines);
            run.emit(a.output.output.as_deref(), text.as_bytes())
        }
        OutFormat::PgmHeatmap => heatmap(run, &a.output, &t.values, &t.sentinels),
    }
}

fn expected(run: &mut Run, a: &ExpectedArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.p) {
        return Err(CliError::Usage(format!("--p {} is outside [0, 1]", a.p)));
    }
    let values = expected_random_pair_surface(a.n1, a.n2, a.p, a.levels)?;
    match a.output.out {
        OutFormat::Csv => {
            run.format("surface_csv", io::CSV_FORMAT_VERSION);
            let grid = ThresholdGrid::integer_levels(a.levels as usize);
            let lines = meta(&[
                ("kind", "expected_surface".into()),
                ("n1", a.n1.to_string()),
                ("n2", a.n2.to_string()),
                ("p", a.p.to_string()),
                ("levels", a.levels.to_string()),
            ]);
            let text = io::real_matrix_to_csv(&grid, &grid, &values, &lines);
            run.emit(a.output.output.as_deref(), text.as_bytes())
        }
        OutFormat::PgmHeatmap => heatmap(run, &a.output, &values, &[]),
    }
}

fn featurize_cmd(run: &mut Run, a: &FeaturizeArgs) -> Result<()> {
    let mut vectors = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        run.input(path)?;
        let text = fs::read_to_string(path)?;
        let is_curve = text
            .lines()
            .find(|l| !l.starts_with('#') && !l.trim().is_empty())
            .is_some_and(|l| l.starts_with("threshold"));
        let v = if is_curve {
            subsample(Featurizable::Curve(&io::curve_from_csv(&text)?), a.stride)?
        } else {
            subsample(Featurizable::Surface(&io::surface_from_csv(&text)?), a.stride)?
        };
        vectors.push(v);
    }
    let normalization = match (&a.fit, &a.apply) {
        (Some(path), _) => {
            let z = ZScore::fit(&vectors)?;
            let mut text = serde_json::to_string_pretty(&z).map_err(|e| CliError::Data(e.to_string()))?;
            text.push('\n');
            run.format("zscore_json", 1);
            run.emit(Some(path), text.as_bytes())?;
            Some(z)
        }
        (None, Some(path)) => {
            run.input(path)?;
            let z: ZScore = serde_json::from_slice(&fs::read(path)?)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            Some(z)
        }
        (None, None) => None,
    };
    let mut out = format!("# kind: features\n# stride: {}\n", a.stride);
    for (path, v) in a.inputs.iter().zip(&vectors) {
        let features = match &normalization {
            Some(z) => z.apply(v)?,
            None => v.clone(),
        };
        out.push_str(&path.display().to_string());
        for f in features {
            out.push(',');
            out.push_str(&f.to_string());
        }
        out.push('\n');
    }
    run.format("features_csv", io::CSV_FORMAT_VERSION);
    // the features file is the primary artifact; the z-score JSON follows it
    if let Some(path) = &a.output {
        fs::write(path, &out)?;
        run.manifest.outputs.insert(0, FileDigest::of(path)?);
        Ok(())
    } else {
        run.emit(None, out.as_bytes())
    }
}

// ---------------------------------------------------------- generators

fn points_csv(run: &mut Run, output: Option<&Path>, points: &[[f64; 2]], lines: io::Metadata) -> Result<()> {
    run.format("points_csv", io::CSV_FORMAT_VERSION);
    let coords: Vec<f64> = points.iter().flatten().copied().collect();
    run.emit(output, io::points_to_csv(2, &coords, &lines).as_bytes())
}

fn gen(run: &mut Run, model: &GenModel) -> Result<()> {
    match model {
        GenModel::Pair { p, n, n2, levels, seed, out } => {
            run.manifest.seeds.push(*seed);
            let (first, second) = synth::gen_correlated_pair(*n, n2.unwrap_or(*n), *p, *levels, *seed)?;
            run.format("pgm", 5);
            run.emit(Some(&out[0]), &io::encode_pgm(&first, PgmEncoding::Binary)?)?;
            run.emit(Some(&out[1]), &io::encode_pgm(&second, PgmEncoding::Binary)?)
        }
        GenModel::Copula3d { theta, n, levels, seed, out } => {
            run.manifest.seeds.push(*seed);
            let (first, second) = synth::gen_copula_images_3d(*n, *theta, *levels, *seed)?;
            run.format("euvol", 1);
            run.emit(Some(&out[0]), io::encode_euvol(&first)?.as_bytes())?;
            run.emit(Some(&out[1]), io::encode_euvol(&second)?.as_bytes())
        }
        GenModel::Clayton { theta, n, scale, seed, output } => {
            run.manifest.seeds.push(*seed);
            let pts = synth::gen_clayton_points(*n, *theta, *scale, *seed)?;
            let lines = meta(&[("model", "clayton".into()), ("theta", theta.to_string()), ("seed", seed.to_string())]);
            points_csv(run, output.as_deref(), &pts, lines)
        }
        GenModel::Poisson { lambda, seed, output } => {
            run.manifest.seeds.push(*seed);
            let pts = synth::gen_poisson(*lambda, *seed)?;
            let lines = meta(&[("model", "poisson".into()), ("lambda", lambda.to_string()), ("seed", seed.to_string())]);
            points_csv(run, output.as_deref(), &pts, lines)
        }
        GenModel::Hawkes { lambda, alpha, sigma, clip, seed, output } => {
            run.manifest.seeds.push(*seed);
            let sample = synth::gen_hawkes_cluster(*lambda, *alpha, *sigma, *clip, *seed)?;
            let immigrants = sample.parents.iter().filter(|p| p.is_none()).count();
            run.note("immigrants", json!(immigrants));
            let lines = meta(&[
                ("model", "hawkes".into()),
                ("lambda", lambda.to_string()),
                ("alpha", alpha.to_string()),
                ("sigma", sigma.to_string()),
                ("clip", clip.to_string()),
                ("seed", seed.to_string()),
            ]);
            points_csv(run, output.as_deref(), &sample.points, lines)
        }
    }
}

// --------------------------------------------------------- diagnostics

fn oracle_check(run: &mut Run, a: &OracleCheckArgs) -> Result<()> {
    if a.size == 0 || a.levels == 0 {
        return Err(CliError::Usage("--size and --levels must be positive".into()));
    }
    let options = EngineOptions::with_threads(run.threads);
    let mut mismatches = 0;
    let mut checks = 0;
    for trial in 0..a.trials {
        let seed = a.seed.wrapping_add(trial as u64);
        let n1 = 1 + trial % a.size;
        let n2 = 1 + (7 * trial + 3) % a.size;
        let p = (trial % 5) as f64 / 4.0;
        let (first, second) = synth::gen_correlated_pair(n1, n2, p, a.levels, seed)?;
        let fast = ecs_image_pair(&first, &second, &options)?;
        let curve = ecc_image(&first, &options)?;
        let oracle = CubicalBifiltration::new(first, second)?;
        mismatches += surface_mismatches(&fast, &brute_force_surface(&oracle, &fast.grid1, &fast.grid2));
        mismatches += curve_mismatches(&curve, &fast.last_column());
        checks += 2;

        if trial % 5 == 0 {
            let (v1, v2) = synth::gen_copula_images_3d(2 + trial % 3, 2.0, a.levels.min(8), seed)?;
            let fast = ecs_image_pair(&v1, &v2, &options)?;
            let oracle = CubicalBifiltration::new(v1, v2)?;
            mismatches += surface_mismatches(&fast, &brute_force_surface(&oracle, &fast.grid1, &fast.grid2));
            checks += 1;
        }

        let pts = synth::gen_poisson(30.0, seed)?;
        if pts.len() >= 4 {
            let cloud = PointCloud::from_points(&pts)?;
            let tri = delaunay_2d(&cloud, DelaunayOptions::default())?;
            let alpha = alpha_filtration(&cloud, &tri)?;
            let knn = tri.complex.extend_by_max(&knn_density_filter(&cloud, 3)?);
            let bif = SimplicialBifiltration::new(tri.complex, alpha, knn)?;
            let g1 = bif.grid(Parameter::H1, GridChoice::Unique)?;
            let g2 = bif.grid(Parameter::H2, GridChoice::Unique)?;
            let fast = ecs_points(&bif, &g1, &g2, run.threads);
            mismatches += surface_mismatches(&fast, &brute_force_surface(&bif, &g1, &g2));
            checks += 1;
        }
    }
    println!("oracle-check: {checks} comparisons over {} trials, {mismatches} mismatches", a.trials);
    fail_on_mismatch(mismatches)
}

fn bench(run: &mut Run, a: &BenchArgs) -> Result<()> {
    if a.size == 0 || a.repeat == 0 {
        return Err(CliError::Usage("--size and --repeat must be positive".into()));
    }
    run.manifest.seeds.push(a.seed);
    let (first, second) = synth::gen_correlated_pair(a.size, a.size, 0.5, a.levels, a.seed)?;
    let options = EngineOptions::with_threads(run.threads);
    let mut times = Vec::with_capacity(a.repeat);
    let mut fast = None;
    for _ in 0..a.repeat {
        let start = Instant::now();
        fast = Some(ecs_image_pair(&first, &second, &options)?);
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let fast_time = times[times.len() / 2];
    let fast = fast.expect("at least one repetition");

    let oracle = CubicalBifiltration::new(first, second)?;
    let start = Instant::now();
    let naive = brute_force_surface(&oracle, &fast.grid1, &fast.grid2);
    let naive_time = start.elapsed().as_secs_f64();
    let speedup = naive_time / fast_time;
    println!(
        "bench: {0}x{0} levels {1} threads {2}: fast {3:.3} ms, naive {4:.3} ms, speedup {5:.1}x",
        a.size,
        a.levels,
        run.threads,
        fast_time * 1e3,
        naive_time * 1e3,
        speedup
    );
    fail_on_mismatch(surface_mismatches(&fast, &naive))
}
