use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use singmap_core::fields::{model_moments, FieldModel};
use singmap_core::kac_rice::length::theta_profile;
use singmap_core::kac_rice::*;

fn torus(k: usize) -> MomentSource {
    MomentSource::from_model(FieldModel::BandlimitedTorus { k }).unwrap()
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxy / sxx, my - sxy / sxx * mx)
}

#[test]
fn iid_theta_integrand_is_flat() {
    let prof = theta_profile(&torus(3), &[0.3, 0.7], &QuadratureSpec::default(), 4000, 5).unwrap();
    let mean = prof.iter().map(|e| e.mean).sum::<f64>() / prof.len() as f64;
    for (t, e) in prof.iter().enumerate() {
        assert!(
            (e.mean - mean).abs() < 3.0 * e.stderr,
            "node {t}: {} vs {mean} ± {}",
            e.mean,
            e.stderr
        );
    }
}

#[test]
fn general_and_iid_routes_agree() {
    let q = QuadratureSpec::default();
    let g = length_estimates_general(&torus(3), &q, 20_000, 9).unwrap();
    let i = length_estimates_iid(&torus(3), &q, 20_000, 9).unwrap();
    for (a, b) in [
        (g.critical.total, i.critical.total),
        (g.contour.total, i.contour.total),
        (g.critical.pareto, i.critical.pareto),
    ] {
        assert!(a.z_distance(&b) < 3.0, "{a:?} vs {b:?}");
    }
}

#[test]
fn iid_slope_over_bandwidth() {
    let ks: Vec<f64> = (2..=10).map(f64::from).collect();
    let means: Vec<f64> = (2..=10)
        .map(|k| {
            expected_length_iid(
                &torus(k),
                &QuadratureSpec::default(),
                LengthQuery::total(Target::CriticalCurve),
                100_000,
                7,
            )
            .unwrap()
            .mean
        })
        .collect();
    let (slope, _) = fit_line(&ks, &means);
    assert!((slope / 3.33 - 1.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn bandwidth_ten_near_leading_term() {
    let est = expected_length_iid(
        &torus(10),
        &QuadratureSpec::default(),
        LengthQuery::total(Target::CriticalCurve),
        1_000_000,
        42,
    )
    .unwrap();
    let lead = 3f64.sqrt() * PI * 0.607 * 10.0;
    let rel = est.mean / lead - 1.0;
    assert!(rel.abs() < 0.05, "estimate {} vs {lead}: {:.3}%", est.mean, 100.0 * rel);
}

#[test]
fn contour_grows_like_cube_of_bandwidth() {
    // ratios of successive estimates approach (K+1)^3 / K^3 from above
    let q = QuadratureSpec::default();
    let c = |k| {
        expected_length_iid(&torus(k), &q, LengthQuery::total(Target::Contour), 50_000, 3)
            .unwrap()
            .mean
    };
    let (a, b) = (c(20), c(40));
    assert!((b / a / 8.0 - 1.0).abs() < 0.1, "ratio {}", b / a);
    let lead = 4.0 * PI * PI * 0.7696 * 40f64.powi(3);
    assert!((b / lead - 1.0).abs() < 0.1, "{b} vs {lead}");
}

#[test]
fn per_index_contours_partition_the_total() {
    let e = length_estimates_iid(&torus(4), &QuadratureSpec::default(), 5000, 17).unwrap();
    for t in [&e.critical, &e.contour] {
        let sum: f64 = t.per_index.iter().map(|x| x.mean).sum();
        assert!((sum - t.total.mean).abs() <= 1e-9 * t.total.mean);
        let psum: f64 = t.per_index_pareto.iter().map(|x| x.mean).sum();
        assert!((psum - t.pareto.mean).abs() <= 1e-9 * t.pareto.mean);
    }
}

#[test]
fn doubling_quadrature_keeps_doughnut_estimates() {
    let src = MomentSource::from_model(FieldModel::DoughnutProjection {
        big_r: 1.0,
        small_r: 0.2,
    })
    .unwrap();
    let coarse = QuadratureSpec {
        theta_nodes: 16,
        spatial_nodes: 16,
    };
    let fine = QuadratureSpec {
        theta_nodes: 32,
        spatial_nodes: 32,
    };
    let a = length_estimates_general(&src, &coarse, 400, 8).unwrap();
    let b = length_estimates_general(&src, &fine, 400, 9).unwrap();
    for (x, y) in [(a.critical.total, b.critical.total), (a.contour.total, b.contour.total)] {
        assert!(x.z_distance(&y) < 3.0, "{x:?} vs {y:?}");
    }
}

#[test]
fn sphere_formula_matches_direct_simulation() {
    for (n, cp, cpp) in [(2, 1.0, 1.0), (3, 1.0, 2.0)] {
        let closed = sphere_contour_estimates(n, cp, cpp, 200_000, 4).unwrap();
        let src = MomentSource::from_model(FieldModel::IsotropicSphere {
            n,
            c_prime: cp,
            c_double_prime: cpp,
        })
        .unwrap();
        let direct = length_estimates_iid(&src, &QuadratureSpec::default(), 200_000, 5).unwrap();
        for k in 0..n {
            let (a, b) = (&closed.per_index[k], &direct.contour.per_index[k]);
            assert!(a.z_distance(b) < 3.0, "n {n} k {k}: {a:?} vs {b:?}");
        }
        let sum: f64 = closed.per_index.iter().map(|e| e.mean).sum();
        assert!((sum - closed.total.mean).abs() < 1e-9 * closed.total.mean);
    }
}

#[test]
fn sphere_n2_half_normal() {
    let analytic = sphere::sphere_contour_n2_analytic(1.5, 0.5).unwrap();
    let mc = sphere_contour_estimates(2, 1.5, 0.5, 200_000, 12).unwrap();
    for e in &mc.per_index {
        assert!((e.mean - analytic).abs() < 3.0 * e.stderr, "{analytic} vs {e:?}");
    }
}

#[test]
fn pseudocusp_kinds_are_exchangeable() {
    let e = pseudocusp_estimates(&torus(3), &QuadratureSpec::default(), 20_000, 31).unwrap();
    for k in 1..=2 {
        let (v, h) = (&e.vertical[k], &e.horizontal[k]);
        assert!(v.z_distance(h) < 3.0, "k {k}: {v:?} vs {h:?}");
    }
    // minima never satisfy the sign condition and maxima always do
    assert_eq!(e.vertical[0].mean, 0.0);
    assert_eq!(e.vertical[2].mean, e.candidates_vertical[2].mean);
    let signed: f64 = e.vertical.iter().map(|x| x.mean).sum();
    let all: f64 = e.candidates_vertical.iter().map(|x| x.mean).sum();
    assert!(signed < all);
}

#[test]
fn constant_l_near_quoted_value() {
    let l = constant_l(1_000_000, 42).unwrap();
    assert!((l.mean - 0.607).abs() < 0.01, "{l:?}");
    let s = 3f64.sqrt() * PI * l.mean;
    assert!((3.2..=3.4).contains(&s), "{s}");
}

#[test]
fn constant_c_reproduces_golden_value() {
    let golden = constant_c_golden();
    assert!(golden.stderr / golden.mean < 0.005);
    assert_eq!(golden.n_samples, 10_000_000);
    for seed in [golden.seed + 1, 77] {
        let c = constant_c_bandlimited(1_000_000, seed).unwrap();
        let z = (c.mean - golden.mean).abs() / c.stderr.hypot(golden.stderr);
        assert!(z < 3.0, "seed {seed}: {c:?}");
    }
}

#[test]
fn doughnut_display_constant() {
    let d = doughnut_contour_asymptotic(1.0, 0.05, &QuadratureSpec::default()).unwrap();
    assert!((d.c_display - 31.6).abs() < 0.1, "{d:?}");
    assert!((d.length_display - 12.6).abs() < 0.3, "{d:?}");
    assert!((d.c_embedding - 4.0 * PI * PI).abs() < 1e-6, "{d:?}");
}

#[test]
fn integrand_invariant_under_random_chart_changes() {
    let moments = model_moments(
        FieldModel::DoughnutProjection {
            big_r: 1.0,
            small_r: 0.3,
        },
        &[0.4, 1.1],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let j = loop {
            let j = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0f64..2.0));
            if j.determinant().abs() > 0.05 {
                break j;
            }
        };
        worst = worst.max(integrand_coordinate_invariance_check(&moments, &j, 8, rng.random()).unwrap());
    }
    assert!(worst < 1e-8, "max relative deviation {worst}");
}
