//! Critical-curve and contour lengths of bandlimited maps on the flat torus
//! over a range of bandwidths.

use anyhow::Result;
use serde_json::json;
use std::f64::consts::PI;

use singmap_core::fields::{make_bandlimited, FieldModel};
use singmap_core::geometry::{extract_critical_curve, measure_lengths, LengthReport};
use singmap_core::kac_rice::{constant_c_golden, length_estimates_iid, McEstimate, MomentSource};

use super::{mc_seed, record, rel, run_trials, tag, timed};
use crate::config::ExperimentConfig;
use crate::report::{Report, SweepRow};
use crate::stats::{fit_line, polyfit, summarize, z_score};

pub const NAME: &str = "bandlimited-sweep";

/// Quoted slope of mean critical-curve length against `K`.
pub const QUOTED_SLOPE: f64 = 3.33;
/// Quoted value of `l`.
pub const QUOTED_L: f64 = 0.607;

/// Bandwidths at which the Kac–Rice prediction is compared with the trials.
pub const MATCH_BANDWIDTHS: [usize; 2] = [3, 5];

pub fn measure_trial(k: usize, cfg: &ExperimentConfig, trial: u64) -> Result<LengthReport> {
    let real = make_bandlimited(k, super::trial_stream(cfg.seed, tag::BANDLIMITED, k as u64, trial))?;
    let ex = extract_critical_curve(&real, &cfg.grid())?;
    Ok(measure_lengths(&real, &ex))
}

pub fn run(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let grid = cfg.grid();
    grid.validate()?;
    let quad = cfg.quad();
    let full = cfg.full_scale();
    let mut ks = Vec::new();
    let (mut crit_means, mut cont_means) = (Vec::new(), Vec::new());
    for &k in &cfg.k_values {
        let (reports, ms) = timed(|| run_trials(cfg.trials, |t| measure_trial(k, cfg, t)))?;
        eprintln!("{NAME}: K = {k}, {} trials in {:.1} s", cfg.trials, ms as f64 / 1000.0);

        let src = MomentSource::from_model(FieldModel::BandlimitedTorus { k })?;
        let (pred, pms) = timed(|| {
            Ok(length_estimates_iid(
                &src,
                &quad,
                cfg.prediction_samples,
                mc_seed(cfg.seed, tag::BANDLIMITED, k as u64),
            )?)
        })?;
        let params = json!({ "k": k });
        rep.records.push(record(
            "thm3.1",
            "bandlimited_torus",
            params.clone(),
            json!({ "target": "critical_curve" }),
            &pred.critical.total,
            pms,
        ));
        rep.records.push(record(
            "thm3.1",
            "bandlimited_torus",
            params,
            json!({ "target": "contour" }),
            &pred.contour.total,
            pms,
        ));

        type Column = (&'static str, fn(&LengthReport) -> f64, Option<McEstimate>);
        let columns: [Column; 4] = [
            ("critical_length", |r| r.critical_length, Some(pred.critical.total)),
            ("contour_length", |r| r.contour_length, Some(pred.contour.total)),
            (
                "pareto_critical_length",
                |r| r.pareto_critical,
                Some(pred.critical.pareto),
            ),
            ("unattributed_critical_length", |r| r.unattributed_critical, None),
        ];
        for (name, get, p) in columns {
            let xs: Vec<f64> = reports.iter().map(get).collect();
            let s = summarize(&xs);
            let key = format!("bandlimited.k{k}.{name}");
            rep.put_summary(&key, &s);
            let mut row = SweepRow::new(NAME, "K", k as f64, name, &xs, &s);
            if let Some(p) = p {
                rep.put_estimate(&format!("{key}.prediction"), &p);
                row = row.with_prediction(&p);
            }
            rep.check(
                &format!("{NAME}.k{k}.{name}.mean_in_range"),
                "trial mean lies within the trial range",
                s.mean,
                s.mean,
                0.0,
                s.min <= s.mean && s.mean <= s.max,
                true,
            );
            rep.rows.push(row);
        }
        let crit = summarize(&reports.iter().map(|r| r.critical_length).collect::<Vec<_>>());
        if MATCH_BANDWIDTHS.contains(&k) {
            let z = z_score(
                crit.mean,
                crit.stderr,
                pred.critical.total.mean,
                pred.critical.total.stderr,
            );
            rep.put(format!("bandlimited.k{k}.critical_length.z"), z);
            rep.check_below(
                &format!("{NAME}.k{k}.formula_vs_empirical"),
                "Kac–Rice critical-curve length within 3 combined stderr of the trial mean",
                z,
                3.0,
                full,
            );
        }
        ks.push(k as f64);
        crit_means.push(crit.mean);
        cont_means.push(summarize(&reports.iter().map(|r| r.contour_length).collect::<Vec<_>>()).mean);
    }

    let golden_c = constant_c_golden();
    let lead_c = 4.0 * PI * PI * golden_c.mean;
    rep.put("bandlimited.prediction.contour_cubic_coefficient", lead_c);
    if let Some(fit) = fit_line(&ks, &crit_means) {
        rep.put("bandlimited.fit.slope", fit.slope);
        rep.put("bandlimited.fit.intercept", fit.intercept);
        rep.put("bandlimited.prediction.slope", 3f64.sqrt() * PI * QUOTED_L);
        eprintln!("{NAME}: slope {:.4}, intercept {:.4}", fit.slope, fit.intercept);
        rep.check_below(
            &format!("{NAME}.slope"),
            "fitted slope within 10% of 3.33",
            rel(fit.slope, QUOTED_SLOPE),
            0.10,
            full,
        );
        rep.check_below(
            &format!("{NAME}.intercept"),
            "|fitted intercept| below 0.5",
            fit.intercept.abs(),
            0.5,
            full,
        );
    }
    if let Some(c) = polyfit(&ks, &cont_means, 3) {
        rep.put("bandlimited.fit.contour_cubic_coefficient", c[3]);
        rep.check_below(
            &format!("{NAME}.contour_cubic"),
            "leading coefficient of the cubic contour fit within 15% of 4 pi^2 c",
            rel(c[3], lead_c),
            0.15,
            full,
        );
    }
    Ok(())
}
