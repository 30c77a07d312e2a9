//! Local χ changes checked against explicitly built local complexes.

mod common;

use common::oracle_change;
use eulersurf::cubical::{neighborhood_index, ChangeTable, LocalChange};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn planar_table_matches_explicit_complexes() {
    let table = ChangeTable::planar();
    for mask in 0..256u32 {
        assert_eq!(
            i64::from(table.get(mask)),
            oracle_change(mask, 2),
            "mask {mask:08b}"
        );
    }
}

#[test]
fn planar_landmarks() {
    let bits: Vec<bool> = "10100101".chars().map(|c| c == '1').collect();
    let index = neighborhood_index(&bits).unwrap();
    assert_eq!(index, 165);
    assert_eq!(oracle_change(index, 2), -3);
    assert_eq!(oracle_change(0, 2), 1);
    assert_eq!(oracle_change(255, 2), 1);
}

#[test]
fn spatial_changes_match_explicit_complexes_on_samples() {
    let local = LocalChange::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let all = (1u32 << 26) - 1;
    let mut masks = vec![0, all];
    // single neighbors of every kind, then uniform and sparse random masks
    masks.extend((0..26).map(|k| 1u32 << k));
    masks.extend((0..400).map(|_| rng.random::<u32>() & all));
    masks.extend((0..400).map(|_| {
        (0..26).fold(0u32, |m, k| m | (u32::from(rng.random_bool(0.15)) << k))
    }));
    for mask in masks {
        assert_eq!(
            i64::from(local.change(mask)),
            oracle_change(mask, 3),
            "mask {mask:026b}"
        );
    }
    assert_eq!(oracle_change(0, 3), 1);
    assert_eq!(oracle_change(all, 3), -1);
}
