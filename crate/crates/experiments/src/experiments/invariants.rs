//! Structural identities: GOI law, index partitions, Pareto halves, chart
//! invariance, grid convergence, determinism and the length oracle.

use anyhow::Result;
use nalgebra::DMatrix;
use rand::Rng;

use singmap_core::fields::{make_bandlimited, model_moments, FieldModel};
use singmap_core::gaussian::sym::packed_len;
use singmap_core::gaussian::{goi_covariance, GoiParams, GoiSampler};
use singmap_core::geometry::{extract_critical_curve, lemma_length_oracle, measure_lengths, GridSpec};
use singmap_core::kac_rice::{
    constant_c_bandlimited, integrand_coordinate_invariance_check, length_estimates_general, length_estimates_iid,
    pseudocusp_estimates, LengthEstimates, MomentSource, QuadratureSpec,
};

use super::{bandlimited, mc_seed, rel, run_trials, tag, trial_stream};
use crate::config::ExperimentConfig;
use crate::report::Report;

pub const NAME: &str = "invariants";

/// z bound for each entry of an empirical GOI covariance.
pub const GOI_Z: f64 = 4.5;
pub const PARTITION_TOL: f64 = 1e-9;
pub const CHART_TOL: f64 = 1e-8;
pub const CHART_CHANGES: usize = 1000;
pub const GRID_TOL: f64 = 0.005;
pub const ORACLE_TOL: f64 = 0.01;

/// Largest z of the empirical covariance of the packed entries of
/// `Q M Q^T` against the GOI formula.
fn goi_max_z(p: GoiParams, q: &DMatrix<f64>, samples: usize, seed: u64) -> Result<f64> {
    let s = GoiSampler::new(p)?;
    let d = packed_len(p.n);
    let mut rng = trial_stream(seed, tag::INVARIANTS, 0, 0).rng();
    let draws: Vec<Vec<f64>> = (0..samples)
        .map(|_| s.sample(&mut rng).congruence(q).packed().to_vec())
        .collect();
    let mean: Vec<f64> = (0..d)
        .map(|i| draws.iter().map(|v| v[i]).sum::<f64>() / samples as f64)
        .collect();
    let exact = goi_covariance(p);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            let emp = draws.iter().map(|v| (v[i] - mean[i]) * (v[j] - mean[j])).sum::<f64>() / (samples as f64 - 1.0);
            let se = ((exact[(i, i)] * exact[(j, j)] + exact[(i, j)].powi(2)) / samples as f64).sqrt();
            let gap = (emp - exact[(i, j)]).abs();
            worst = worst.max(if gap == 0.0 { 0.0 } else { gap / se });
        }
    }
    Ok(worst)
}

/// Largest relative violation of `sum_k = total` and of the Pareto sums.
fn partition_defect(e: &LengthEstimates, iid: bool) -> (f64, f64) {
    let (mut part, mut pareto) = (0.0f64, 0.0f64);
    for t in [&e.critical, &e.contour] {
        let sum: f64 = t.per_index.iter().map(|x| x.mean).sum();
        part = part.max((sum - t.total.mean).abs() / t.total.mean);
        let psum: f64 = t.per_index_pareto.iter().map(|x| x.mean).sum();
        pareto = pareto.max((psum - t.pareto.mean).abs() / t.total.mean);
        if iid {
            pareto = pareto.max((t.pareto.mean - 0.5 * t.total.mean).abs() / t.total.mean);
        }
    }
    (part, pareto)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?.install(f))
}

pub fn run(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let quad = cfg.quad();
    let goi_samples = (cfg.mc_samples / 10).max(1000) as usize;

    // GOI law and its invariance under orthogonal conjugation
    let n = 3;
    let q = DMatrix::from_fn(n, n, |i, j| ((i * n + j) as f64 * 1.7).sin()).qr().q();
    let mut worst = 0.0f64;
    for (i, c) in [-1.0 / 6.0, 0.0, 0.5, 1.0].into_iter().enumerate() {
        let p = GoiParams::new(n, c)?;
        worst = worst.max(goi_max_z(
            p,
            &DMatrix::identity(n, n),
            goi_samples,
            cfg.seed ^ (2 * i as u64),
        )?);
        worst = worst.max(goi_max_z(p, &q, goi_samples, cfg.seed ^ (2 * i as u64 + 1))?);
    }
    rep.put("invariants.goi.max_z", worst);
    rep.check_below(
        &format!("{NAME}.goi"),
        "empirical GOI covariances, plain and conjugated, match the formula",
        worst,
        GOI_Z,
        true,
    );

    // index partition and Pareto halves, path-wise under one set of draws
    let samples = (cfg.prediction_samples / 10).max(1000);
    let (mut part, mut pareto) = (0.0f64, 0.0f64);
    for k in [2usize, 3, 5] {
        let src = MomentSource::from_model(FieldModel::BandlimitedTorus { k })?;
        let (a, b) = partition_defect(
            &length_estimates_iid(&src, &quad, samples, mc_seed(cfg.seed, tag::INVARIANTS, k as u64))?,
            true,
        );
        part = part.max(a);
        pareto = pareto.max(b);
    }
    let doughnut = MomentSource::from_model(FieldModel::DoughnutProjection {
        big_r: 1.0,
        small_r: 0.25,
    })?;
    let small = QuadratureSpec {
        theta_nodes: 16,
        spatial_nodes: 8,
    };
    let (a, b) = partition_defect(&length_estimates_general(&doughnut, &small, 200, cfg.seed)?, false);
    part = part.max(a);
    pareto = pareto.max(b);
    rep.put("invariants.partition.max_defect", part);
    rep.put("invariants.pareto.max_defect", pareto);
    rep.check_below(
        &format!("{NAME}.partition"),
        "per-index lengths sum to the total",
        part,
        PARTITION_TOL,
        true,
    );
    rep.check_below(
        &format!("{NAME}.pareto"),
        "Pareto lengths are exactly decomposed",
        pareto,
        PARTITION_TOL,
        true,
    );

    // chart changes of the length integrand
    let moments = model_moments(
        FieldModel::DoughnutProjection {
            big_r: 1.0,
            small_r: 0.3,
        },
        &[0.4, 1.1],
    )?;
    let mut rng = trial_stream(cfg.seed, tag::INVARIANTS, 1, 0).rng();
    let mut chart = 0.0f64;
    for _ in 0..CHART_CHANGES {
        let j = loop {
            let j = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0f64..2.0));
            if j.determinant().abs() > 0.05 {
                break j;
            }
        };
        chart = chart.max(integrand_coordinate_invariance_check(&moments, &j, 8, rng.random())?);
    }
    rep.put("invariants.chart.max_deviation", chart);
    rep.check_below(
        &format!("{NAME}.chart"),
        "length integrand unchanged under random chart changes",
        chart,
        CHART_TOL,
        true,
    );

    // grid doubling, from no coarser than the default grid
    let coarse = GridSpec {
        resolution: cfg.resolution.max(GridSpec::default().resolution),
        ..cfg.grid()
    };
    let fine = GridSpec {
        resolution: 2 * coarse.resolution,
        ..coarse
    };
    let gaps = run_trials(3, |t| {
        let real = make_bandlimited(3, trial_stream(cfg.seed, tag::INVARIANTS, 3, t))?;
        let a = measure_lengths(&real, &extract_critical_curve(&real, &coarse)?);
        let b = measure_lengths(&real, &extract_critical_curve(&real, &fine)?);
        Ok([
            rel(a.critical_length, b.critical_length),
            rel(a.contour_length, b.contour_length),
            rel(a.pareto_critical, b.pareto_critical),
            rel(a.pareto_contour, b.pareto_contour),
        ])
    })?;
    let grid_gap = gaps.iter().flatten().copied().fold(0.0, f64::max);
    rep.put("invariants.grid.max_relative_change", grid_gap);
    rep.check_below(
        &format!("{NAME}.grid"),
        "lengths change by less than 0.5% on grid doubling",
        grid_gap,
        GRID_TOL,
        true,
    );

    // bit-exact results under different worker counts
    let torus = MomentSource::from_model(FieldModel::BandlimitedTorus { k: 3 })?;
    let work = || -> Result<String> {
        let trials = run_trials(3, |t| bandlimited::measure_trial(3, cfg, t))?;
        let gen = length_estimates_general(&doughnut, &small, 300, 5)?;
        let pc = pseudocusp_estimates(&torus, &small, 1000, 5)?;
        let c = constant_c_bandlimited(3000, 1)?;
        Ok(serde_json::to_string(&(trials, gen, pc, c))?)
    };
    let runs = [1, 2, 4].map(|w| in_pool(w, work));
    let outputs = runs.into_iter().collect::<Result<Result<Vec<_>>>>()??;
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    rep.check(
        &format!("{NAME}.determinism"),
        "identical output on 1, 2 and 4 workers",
        f64::from(u8::from(same)),
        1.0,
        0.0,
        same,
        true,
    );

    // weighted-integral lengths against polyline lengths
    let k = cfg.oracle_k;
    let grid = cfg.grid();
    let gaps = run_trials(cfg.oracle_trials, |t| {
        let real = make_bandlimited(k, trial_stream(cfg.seed, tag::ORACLE, k as u64, t))?;
        let ex = extract_critical_curve(&real, &grid)?;
        let r = measure_lengths(&real, &ex);
        let o = lemma_length_oracle(&real, &ex.polylines);
        let crit: f64 = r.per_index_critical.iter().sum::<f64>() + r.unattributed_critical;
        Ok((
            rel(o.critical_length, r.critical_length),
            rel(o.contour_length, r.contour_length),
            rel(crit, r.critical_length),
        ))
    })?;
    let oracle = gaps.iter().map(|g| g.0.max(g.1)).fold(0.0, f64::max);
    let measured_part = gaps.iter().map(|g| g.2).fold(0.0, f64::max);
    rep.put("invariants.oracle.max_relative_difference", oracle);
    rep.put("invariants.oracle.realizations", gaps.len() as f64);
    rep.put("invariants.partition.measured_defect", measured_part);
    rep.check_below(
        &format!("{NAME}.oracle"),
        "weighted-integral and polyline lengths differ by less than 1%",
        oracle,
        ORACLE_TOL,
        true,
    );
    rep.check_below(
        &format!("{NAME}.measured_partition"),
        "measured per-index lengths sum to the total",
        measured_part,
        PARTITION_TOL,
        true,
    );
    eprintln!(
        "{NAME}: goi z {worst:.2}, chart {chart:.1e}, grid {grid_gap:.2e}, oracle {oracle:.2e}, deterministic {same}"
    );
    Ok(())
}
