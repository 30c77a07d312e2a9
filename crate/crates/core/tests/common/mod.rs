//! Independent oracles shared by integration tests.
//!
//! The local-change oracle lays out the 3^d block of top cells around a
//! center in doubled coordinates, takes the closure of the present
//! neighbors, and counts cells before and after adding the center. It shares
//! no code with the library's face-coverage evaluation.

/// Neighbor offsets in row-major order (last axis fastest), center omitted.
fn offsets(dim: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    for k in 0..3usize.pow(dim as u32) {
        let mut o = vec![0i32; dim];
        let mut r = k;
        for a in (0..dim).rev() {
            o[a] = (r % 3) as i32 - 1;
            r /= 3;
        }
        if o.iter().any(|&v| v != 0) {
            out.push(o);
        }
    }
    out
}

/// χ of the closure of the given top cells, each named by its offset from
/// the center; cells live in doubled coordinates `0..=6` per axis with top
/// cell `o` at `3 + 2 o`.
fn closure_chi(tops: &[Vec<i32>], dim: usize) -> i64 {
    let mut chi = 0;
    let mut cell = vec![0i32; dim];
    loop {
        let contained = tops.iter().any(|o| {
            cell.iter()
                .zip(o)
                .all(|(&c, &oa)| (c - (3 + 2 * oa)).abs() <= 1)
        });
        if contained {
            let d = cell.iter().filter(|&&c| c % 2 == 1).count();
            chi += if d % 2 == 0 { 1 } else { -1 };
        }
        let mut a = 0;
        loop {
            if a == dim {
                return chi;
            }
            cell[a] += 1;
            if cell[a] <= 6 {
                break;
            }
            cell[a] = 0;
            a += 1;
        }
    }
}

pub fn oracle_change(mask: u32, dim: usize) -> i64 {
    let offs = offsets(dim);
    let n = offs.len();
    let mut tops: Vec<Vec<i32>> = offs
        .iter()
        .enumerate()
        .filter(|(k, _)| mask >> (n - 1 - k) & 1 == 1)
        .map(|(_, o)| o.clone())
        .collect();
    let before = closure_chi(&tops, dim);
    tops.push(vec![0; dim]);
    closure_chi(&tops, dim) - before
}
