use std::f64::consts::PI;

use fracture_core::config::StudyConfig;
use fracture_core::eigenerosion::{neighborhood_area, optimal_epsilon};
use fracture_core::grid::{build_grid, register_crack_ee};
use fracture_core::nonlocal::{
    activation, fracture_energy_ann, fracture_energy_with, neighborhood_area_distance, IndicatorField,
};
use proptest::prelude::*;

/// Brute-force count of samples within distance `< ε` of a set sample.
fn brute_force_area(field: &IndicatorField, eps: f64) -> f64 {
    let ones: Vec<[f64; 2]> = field.ones().map(|(i, j)| field.sample_center(i, j)).collect();
    let mut count = 0usize;
    for j in 0..field.ny {
        for i in 0..field.nx {
            let c = field.sample_center(i, j);
            let hit = ones.iter().any(|p| {
                let di = ((c[0] - p[0]) / field.spacing).round();
                let dj = ((c[1] - p[1]) / field.spacing).round();
                field.spacing * (di * di + dj * dj).sqrt() < eps
            });
            count += hit as usize;
        }
    }
    count as f64 * field.spacing * field.spacing
}

fn table1_crack(h_over_d: f64) -> (fracture_core::grid::Grid, Vec<usize>, f64, f64) {
    let cfg = StudyConfig::table1();
    let grid = build_grid(cfg.problem.d, h_over_d).unwrap();
    let crack = register_crack_ee(&grid, cfg.problem.a).unwrap();
    let (eps, _) = optimal_epsilon(cfg.problem.a, grid.h);
    let exact = neighborhood_area(cfg.problem.a, grid.h, eps);
    (grid, crack.eroded, eps, exact)
}

#[test]
fn aligned_crack_matches_closed_form() {
    let (grid, eroded, eps, exact) = table1_crack(0.01);
    assert!((exact - 0.1296284).abs() < 1e-7);
    let n = eroded.len() as f64;
    let perimeter = 2.0 * n * grid.h + 2.0 * grid.h + 2.0 * PI * eps;
    let mut errors = Vec::new();
    for k in [8.0, 16.0, 32.0, 64.0, 128.0] {
        let spacing = eps / k;
        let field = IndicatorField::from_eroded(&grid, &eroded, spacing, eps).unwrap();
        let estimate = neighborhood_area_distance(&field, eps, 1.0).unwrap();
        let err = (estimate.area - exact).abs();
        assert!(err <= 1.5 * perimeter * spacing, "k = {k}: {err}");
        if k <= 32.0 {
            let ann = fracture_energy_ann(&field, eps, 2.0).unwrap();
            assert_eq!(ann.marked, estimate.marked);
            assert!((ann.energy - ann.area / eps).abs() < 1e-15);
        }
        errors.push(err);
    }
    assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{errors:?}");
}

#[test]
fn single_sample_gives_disc() {
    let eps = 0.2;
    let k = 400;
    let spacing = eps / k as f64;
    let n = 2 * k + 3;
    let mut field = IndicatorField::new([0.0, 0.0], spacing, n, n).unwrap();
    field.set(k + 1, k + 1).unwrap();
    let area = neighborhood_area_distance(&field, eps, 1.0).unwrap().area;
    assert!((area - PI * eps * eps).abs() < 2.0 * PI * eps * spacing);
}

#[test]
fn general_mollifier_plugin() {
    let (grid, eroded, eps, _) = table1_crack(0.02);
    let field = IndicatorField::from_eroded(&grid, &eroded, eps / 8.0, eps).unwrap();
    let bump = fracture_energy_ann(&field, eps, 1.0).unwrap();
    // Any positive kernel on the same support marks the same samples.
    let cone = fracture_energy_with(&field, eps, 1.0, |r| if r < eps { eps - r } else { 0.0 }, activation).unwrap();
    assert_eq!(bump.marked, cone.marked);
}

fn sparse_field() -> impl Strategy<Value = (IndicatorField, f64)> {
    (8usize..14, prop::collection::vec((0usize..40, 0usize..40), 0..6)).prop_map(|(k, points)| {
        let spacing = 0.01;
        let mut field = IndicatorField::new([0.0, 0.0], spacing, 40, 40).unwrap();
        for (i, j) in points {
            field.set(i, j).unwrap();
        }
        (field, k as f64 * spacing)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_and_distance_forms_agree((field, eps) in sparse_field()) {
        let ann = fracture_energy_ann(&field, eps, 1.0).unwrap();
        let dist = neighborhood_area_distance(&field, eps, 1.0).unwrap();
        prop_assert_eq!(ann.marked, dist.marked);
        prop_assert!((dist.area - brute_force_area(&field, eps)).abs() < 1e-15);
    }

    #[test]
    fn enlarging_the_set_never_shrinks_the_area((field, eps) in sparse_field(), i in 0usize..40, j in 0usize..40) {
        let before = neighborhood_area_distance(&field, eps, 1.0).unwrap().area;
        let mut bigger = field.clone();
        bigger.set(i, j).unwrap();
        prop_assert!(neighborhood_area_distance(&bigger, eps, 1.0).unwrap().area >= before);
        prop_assert_eq!(bigger.value(i, j), 1);
    }

    #[test]
    fn activation_is_idempotent(w in -1e3f64..1e3) {
        prop_assert_eq!(activation(activation(w)), activation(w));
    }
}
