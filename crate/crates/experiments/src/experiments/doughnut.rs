//! Doughnut projections `h = A E` at fixed `R` and growing `T = R / r`.

use anyhow::Result;
use serde_json::json;

use singmap_core::fields::{make_doughnut, FieldModel};
use singmap_core::geometry::{extract_critical_curve, measure_lengths, LengthReport};
use singmap_core::kac_rice::{doughnut_contour_asymptotic, length_estimates_general, McEstimate, MomentSource};

use super::{mc_seed, record, rel, run_trials, tag, timed, trial_stream};
use crate::config::ExperimentConfig;
use crate::report::{Report, SweepRow};
use crate::stats::{summarize, z_score};

pub const NAME: &str = "doughnut-asymptotics";

/// Quoted value of `c`.
pub const QUOTED_C: f64 = 31.6;
/// Quoted asymptotic contour length per unit `R`.
pub const QUOTED_LENGTH: f64 = 12.6;

/// The realization depends on `trial` only, so the same matrix `A` is
/// reused across radii.
fn measure_trial(cfg: &ExperimentConfig, big_r: f64, t: f64, trial: u64) -> Result<LengthReport> {
    let real = make_doughnut(big_r, big_r / t, trial_stream(cfg.seed, tag::DOUGHNUT, 0, trial))?;
    let ex = extract_critical_curve(&real, &cfg.grid())?;
    Ok(measure_lengths(&real, &ex))
}

fn key_t(t: f64) -> String {
    format!("t{t}")
}

pub fn run(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let full = cfg.full_scale();
    let quad = cfg.quad();
    let r0 = cfg.big_r;
    let t_max = cfg.t_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let (asym, ms) = timed(|| Ok(doughnut_contour_asymptotic(r0, r0 / t_max, &quad)?))?;
    eprintln!("{NAME}: c = {:.4} in {:.1} s", asym.c_display, ms as f64 / 1000.0);
    rep.put("doughnut.asymptotic.c_display", asym.c_display);
    rep.put("doughnut.asymptotic.length_display", asym.length_display);
    rep.put("doughnut.asymptotic.c_embedding", asym.c_embedding);
    rep.put("doughnut.asymptotic.length_embedding", asym.length_embedding);
    rep.put(
        "doughnut.asymptotic.max_display_discrepancy",
        asym.max_display_discrepancy,
    );
    rep.records.push(record(
        "doughnut_c",
        "doughnut_projection",
        json!({ "big_r": r0, "small_r": r0 / t_max }),
        json!({ "integrand": "display" }),
        &McEstimate::exact(asym.c_display, 0),
        ms,
    ));
    rep.check_abs(
        &format!("{NAME}.c"),
        "numerical integral c within 0.1 of 31.6",
        asym.c_display,
        QUOTED_C,
        0.1,
        true,
    );
    rep.check_abs(
        &format!("{NAME}.asymptotic_length"),
        "asymptotic contour length within 0.3 R of 12.6 R",
        asym.length_display / r0,
        QUOTED_LENGTH,
        0.3,
        true,
    );

    let mut dist: Vec<(f64, f64, f64)> = Vec::new();
    let mut ts = cfg.t_values.clone();
    ts.sort_by(f64::total_cmp);
    for &t in &ts {
        let (reports, ms) = timed(|| run_trials(cfg.doughnut_trials, |i| measure_trial(cfg, r0, t, i)))?;
        eprintln!(
            "{NAME}: T = {t}, {} trials in {:.1} s",
            cfg.doughnut_trials,
            ms as f64 / 1000.0
        );
        let model = FieldModel::DoughnutProjection {
            big_r: r0,
            small_r: r0 / t,
        };
        let src = MomentSource::from_model(model)?;
        let (pred, pms) = timed(|| {
            Ok(length_estimates_general(
                &src,
                &cfg.doughnut_quad(),
                cfg.doughnut_prediction_samples,
                mc_seed(cfg.seed, tag::DOUGHNUT, t.to_bits()),
            )?)
        })?;
        eprintln!("{NAME}: T = {t}, Kac–Rice prediction in {:.1} s", pms as f64 / 1000.0);
        let params = json!({ "big_r": r0, "small_r": r0 / t });
        rep.records.push(record(
            "thm2.9",
            "doughnut_projection",
            params.clone(),
            json!({ "target": "contour" }),
            &pred.contour.total,
            pms,
        ));
        rep.records.push(record(
            "thm2.6",
            "doughnut_projection",
            params,
            json!({ "target": "critical_curve" }),
            &pred.critical.total,
            pms,
        ));

        let kt = key_t(t);
        let contour: Vec<f64> = reports.iter().map(|r| r.contour_length / r0).collect();
        let critical: Vec<f64> = reports.iter().map(|r| r.critical_length / r0).collect();
        let sc = summarize(&contour);
        let sk = summarize(&critical);
        let pc = pred.contour.total.scaled(1.0 / r0);
        let pk = pred.critical.total.scaled(1.0 / r0);
        rep.put_summary(&format!("doughnut.{kt}.contour_per_r"), &sc);
        rep.put_summary(&format!("doughnut.{kt}.critical_per_r"), &sk);
        rep.put_estimate(&format!("doughnut.{kt}.contour_per_r.prediction"), &pc);
        rep.put_estimate(&format!("doughnut.{kt}.critical_per_r.prediction"), &pk);
        rep.rows
            .push(SweepRow::new(NAME, "T", t, "contour_length_per_r", &contour, &sc).with_prediction(&pc));
        rep.rows
            .push(SweepRow::new(NAME, "T", t, "critical_length_per_r", &critical, &sk).with_prediction(&pk));

        for (name, s, p) in [("contour", &sc, &pc), ("critical", &sk, &pk)] {
            let z = z_score(s.mean, s.stderr, p.mean, p.stderr);
            rep.put(format!("doughnut.{kt}.{name}_per_r.z"), z);
            rep.check_below(
                &format!("{NAME}.{kt}.{name}_formula_vs_empirical"),
                "Kac–Rice length within 3 combined stderr of the trial mean",
                z,
                3.0,
                full,
            );
        }
        dist.push((t, (sc.mean - QUOTED_LENGTH).abs(), sc.stderr));
        if t == t_max {
            rep.check_below(
                &format!("{NAME}.empirical_length"),
                "empirical contour length per R at the largest T within 10% of 12.6",
                rel(sc.mean, QUOTED_LENGTH),
                0.10,
                full,
            );
        }
    }
    // the distance to 12.6 may not grow by more than 3 stderr from one T to the next
    let monotone = dist.windows(2).all(|w| w[1].1 <= w[0].1 + 3.0 * w[1].2.hypot(w[0].2));
    let last = dist.last().map_or(f64::NAN, |d| d.1);
    rep.check(
        &format!("{NAME}.monotone_approach"),
        "distance of the contour mean to 12.6 R is non-increasing in T within 3 stderr",
        last,
        0.0,
        0.0,
        monotone,
        full,
    );

    // critical-curve length is linear in R at fixed T
    let r1 = cfg.big_r_scaled;
    let scaled = run_trials(cfg.doughnut_trials, |i| measure_trial(cfg, r1, t_max, i))?;
    let base = run_trials(cfg.doughnut_trials, |i| measure_trial(cfg, r0, t_max, i))?;
    let mean = |v: &[LengthReport], f: fn(&LengthReport) -> f64| v.iter().map(f).sum::<f64>() / v.len() as f64;
    let ratio = mean(&scaled, |r| r.critical_length) / mean(&base, |r| r.critical_length);
    let cratio = mean(&scaled, |r| r.contour_length) / mean(&base, |r| r.contour_length);
    rep.put("doughnut.r_scaling.critical_ratio", ratio);
    rep.put("doughnut.r_scaling.contour_ratio", cratio);
    rep.check_below(
        &format!("{NAME}.critical_linear_in_r"),
        "critical-curve length ratio between the two radii within 1% of their ratio",
        rel(ratio, r1 / r0),
        0.01,
        true,
    );
    Ok(())
}
