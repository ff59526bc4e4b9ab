use std::path::PathBuf;

use diageff::groebner::Budget;
use diageff::invariants::{gens_common_toric_listed3, moves_to_binomials, polys};
use diageff::markov::moves_common_diag;
use diageff::param::random_rational_point;
use diageff::toricideal::{ideal_equal, toric_ideal};
use diageff::{ModelFamily, ModelDef};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares against the checked-in file; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

fn printed(family: ModelFamily, size: usize) -> String {
    let gens = toric_ideal(&ModelDef::toric(family, size).unwrap()).unwrap();
    gens.iter().map(|g| format!("{g}\n")).collect()
}

#[test]
fn golden_ideals() {
    for (family, size, name) in [
        (ModelFamily::Independence, 2, "independence_2.txt"),
        (ModelFamily::DiagonalEffect, 2, "diag_effect_2.txt"),
        (ModelFamily::CommonDiagonalEffect, 2, "common_diag_2.txt"),
        (ModelFamily::Independence, 3, "independence_3.txt"),
        (ModelFamily::DiagonalEffect, 3, "diag_effect_3.txt"),
        (ModelFamily::CommonDiagonalEffect, 3, "common_diag_3.txt"),
    ] {
        check_golden(name, &printed(family, size));
    }
}

#[test]
fn generators_are_pure_binomials_vanishing_on_the_model() {
    for family in [ModelFamily::Independence, ModelFamily::DiagonalEffect, ModelFamily::CommonDiagonalEffect] {
        let model = ModelDef::toric(family, 3).unwrap();
        let gens = toric_ideal(&model).unwrap();
        for g in &gens {
            assert!(g.is_pure_binomial(), "{g}");
        }
        for seed in 0..100 {
            let p = random_rational_point(&model, seed).unwrap().point().unwrap();
            for g in &gens {
                assert!(g.eval(&p).unwrap() == num_traits::Zero::zero(), "{family:?} seed {seed}: {g}");
            }
        }
    }
}

#[test]
fn move_binomials_generate_the_common_ideal() {
    let budget = Budget::default();
    let ideal = toric_ideal(&ModelDef::toric(ModelFamily::CommonDiagonalEffect, 3).unwrap()).unwrap();
    let from_moves = moves_to_binomials(&moves_common_diag(3).unwrap()).unwrap();
    assert!(ideal_equal(&ideal, &from_moves, &budget).unwrap());
    assert!(ideal_equal(&from_moves, &polys(&gens_common_toric_listed3()), &budget).unwrap());
}

#[test]
fn diag_effect_4x4_ideal_matches_moves() {
    let model = ModelDef::toric(ModelFamily::DiagonalEffect, 4).unwrap();
    let ideal = toric_ideal(&model).unwrap();
    let from_moves = moves_to_binomials(&diageff::markov::moves_diag_effect(4).unwrap()).unwrap();
    assert!(ideal_equal(&ideal, &from_moves, &Budget::default()).unwrap());
}
