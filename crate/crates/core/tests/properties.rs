use nalgebra::DMatrix;
use proptest::prelude::*;

use singmap_core::fields::{make_bandlimited, FieldModel};
use singmap_core::gaussian::{
    biparametric_index, goi_covariance, index_of, GoiParams, GoiSampler, RngStream, SymMatrix, INDEX_TOL,
};
use singmap_core::geometry::{extract_critical_curve, measure_lengths, GridSpec};
use singmap_core::kac_rice::length::kernel;
use singmap_core::kac_rice::*;

fn sym(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-3.0f64..3.0, n * (n + 1) / 2).prop_map(move |p| SymMatrix::from_packed(n, p).unwrap())
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn goi_covariance_is_psd_above_bound(n in 1usize..6, t in 0.0f64..3.0) {
        let c = -1.0 / n as f64 + t;
        let cov = goi_covariance(GoiParams::new(n, c).unwrap());
        prop_assert!((&cov - cov.transpose()).amax() == 0.0);
        let min = cov.symmetric_eigenvalues().min();
        prop_assert!(min > -1e-12, "min eigenvalue {}", min);
    }

    #[test]
    fn goi_rejects_below_bound(n in 1usize..6, t in 1e-6f64..1.0) {
        prop_assert!(GoiParams::new(n, -1.0 / n as f64 - t).is_err());
    }

    #[test]
    fn goi_draws_are_symmetric_and_finite(n in 1usize..5, c in 0.0f64..2.0, seed in any::<u64>()) {
        let s = GoiSampler::new(GoiParams::new(n, c).unwrap()).unwrap();
        let m = s.sample(&mut RngStream::new(seed, 0).rng());
        let d = m.to_dmatrix();
        prop_assert!((&d - d.transpose()).amax() == 0.0);
        prop_assert!(d.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn biparametric_index_within_range(a in sym(3), b in prop::collection::vec(-3.0f64..3.0, 3)) {
        if let Ok(k) = biparametric_index(&a, &b, INDEX_TOL) {
            let ind = index_of(&a, INDEX_TOL).unwrap();
            prop_assert!(k <= 2);
            prop_assert!(k == ind || k + 1 == ind);
        }
    }

    #[test]
    fn kernel_symmetric_under_half_turn(vx in sym(2), vt in prop::collection::vec(-3.0f64..3.0, 2)) {
        // theta -> theta + pi negates V_x and V_theta, which reflects the
        // index k -> n - 1 - k
        let g = SymMatrix::identity(2);
        let neg: Vec<f64> = vt.iter().map(|v| -v).collect();
        match (kernel(&vx, &vt, &g), kernel(&vx.scale(-1.0), &neg, &g)) {
            (Some(a), Some(b)) => {
                prop_assert!((a.critical - b.critical).abs() <= 1e-12 * a.critical.max(1.0));
                prop_assert!((a.contour - b.contour).abs() <= 1e-12 * a.contour.max(1.0));
                prop_assert_eq!(a.index, 1 - b.index);
            }
            (None, None) => {}
            _ => prop_assert!(false, "degeneracy differs"),
        }
    }

    #[test]
    fn length_indices_partition_pathwise(k in 1usize..7, seed in any::<u64>()) {
        let src = MomentSource::from_model(FieldModel::BandlimitedTorus { k }).unwrap();
        let e = length_estimates_iid(&src, &QuadratureSpec::default(), 64, seed).unwrap();
        for t in [&e.critical, &e.contour] {
            let sum: f64 = t.per_index.iter().map(|x| x.mean).sum();
            prop_assert!((sum - t.total.mean).abs() <= 1e-9 * t.total.mean);
            prop_assert!((t.pareto.mean - 0.5 * t.total.mean).abs() <= 1e-9 * t.total.mean);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn general_route_pareto_halves_sum(seed in any::<u64>()) {
        let src = MomentSource::from_model(FieldModel::DoughnutProjection { big_r: 1.0, small_r: 0.25 }).unwrap();
        let q = QuadratureSpec { theta_nodes: 16, spatial_nodes: 8 };
        let e = length_estimates_general(&src, &q, 16, seed).unwrap();
        for t in [&e.critical, &e.contour] {
            let sum: f64 = t.per_index.iter().map(|x| x.mean).sum();
            prop_assert!((sum - t.total.mean).abs() <= 1e-9 * t.total.mean);
            let psum: f64 = t.per_index_pareto.iter().map(|x| x.mean).sum();
            prop_assert!((psum - t.pareto.mean).abs() <= 1e-9 * t.total.mean);
            prop_assert!(t.pareto.mean <= t.total.mean);
        }
    }

    #[test]
    fn measured_lengths_are_nonnegative(k in 1usize..5, seed in any::<u64>()) {
        let real = make_bandlimited(k, RngStream::new(seed, 0)).unwrap();
        let ex = extract_critical_curve(&real, &GridSpec::with_resolution(128)).unwrap();
        let r = measure_lengths(&real, &ex);
        let all = [r.critical_length, r.contour_length, r.pareto_critical, r.pareto_contour, r.unattributed_critical];
        prop_assert!(all.iter().all(|v| *v >= 0.0));
        prop_assert!(r.per_index_critical.iter().chain(&r.per_index_contour).all(|v| *v >= 0.0));
    }
}

#[test]
fn estimates_independent_of_worker_count() {
    let src = MomentSource::from_model(FieldModel::DoughnutProjection {
        big_r: 1.0,
        small_r: 0.3,
    })
    .unwrap();
    let q = QuadratureSpec {
        theta_nodes: 16,
        spatial_nodes: 8,
    };
    let run = |threads| in_pool(threads, || length_estimates_general(&src, &q, 600, 5).unwrap());
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(5));
    let torus = MomentSource::from_model(FieldModel::BandlimitedTorus { k: 3 }).unwrap();
    let pc = |threads| in_pool(threads, || pseudocusp_estimates(&torus, &q, 1000, 5).unwrap());
    assert_eq!(pc(1), pc(3));
    let c = |threads| in_pool(threads, || constant_c_bandlimited(3000, 1).unwrap());
    assert_eq!(c(1), c(4));
}

#[test]
fn extraction_is_reproducible() {
    let a = make_bandlimited(3, RngStream::new(8, 2)).unwrap();
    let b = make_bandlimited(3, RngStream::new(8, 2)).unwrap();
    let g = GridSpec::with_resolution(128);
    let ea = extract_critical_curve(&a, &g).unwrap();
    let eb = in_pool(3, || extract_critical_curve(&b, &g).unwrap());
    assert_eq!(ea, eb);
    assert_eq!(measure_lengths(&a, &ea), measure_lengths(&b, &eb));
}

#[test]
fn orthogonal_conjugation_preserves_goi_law() {
    // empirical covariance of Q M Q^T entries against the GOI formula
    let p = GoiParams::new(3, 0.5).unwrap();
    let s = GoiSampler::new(p).unwrap();
    let q = {
        let a = DMatrix::from_fn(3, 3, |i, j| ((i * 3 + j) as f64 * 1.7).sin());
        a.qr().q()
    };
    let n = 100_000;
    let d = 6;
    let mut sum = vec![0.0; d];
    let mut sq = DMatrix::<f64>::zeros(d, d);
    let mut rng = RngStream::new(77, 0).rng();
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        let m = s.sample(&mut rng).congruence(&q);
        let v = m.packed().to_vec();
        for i in 0..d {
            sum[i] += v[i];
        }
        draws.push(v);
    }
    let mean: Vec<f64> = sum.iter().map(|v| v / n as f64).collect();
    for v in &draws {
        for i in 0..d {
            for j in 0..d {
                sq[(i, j)] += (v[i] - mean[i]) * (v[j] - mean[j]);
            }
        }
    }
    let emp = sq / (n as f64 - 1.0);
    let exact = goi_covariance(p);
    for i in 0..d {
        for j in 0..d {
            // stderr of a Gaussian sample covariance
            let se = ((exact[(i, i)] * exact[(j, j)] + exact[(i, j)].powi(2)) / n as f64).sqrt();
            assert!(
                (emp[(i, j)] - exact[(i, j)]).abs() < 4.0 * se,
                "({i}, {j}): {} vs {}",
                emp[(i, j)],
                exact[(i, j)]
            );
        }
    }
}
