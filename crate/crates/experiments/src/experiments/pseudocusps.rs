//! Pseudocusp counts per index on the flat torus, counted on realizations
//! and predicted by Kac–Rice.

use anyhow::Result;
use serde_json::json;

use singmap_core::fields::{make_bandlimited, FieldModel};
use singmap_core::geometry::{count_pseudocusps, PseudocuspCounts};
use singmap_core::kac_rice::{pseudocusp_estimates, MomentSource};

use super::{mc_seed, record, run_trials, tag, timed, trial_stream};
use crate::config::ExperimentConfig;
use crate::report::{Report, SweepRow};
use crate::stats::{summarize, z_score};

pub const NAME: &str = "pseudocusps";

pub const KINDS: [&str; 2] = ["vertical", "horizontal"];

fn count(c: &PseudocuspCounts, kind: usize, k: usize) -> f64 {
    [&c.vertical, &c.horizontal][kind][k] as f64
}

pub fn run(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let full = cfg.full_scale();
    let k = cfg.pseudocusp_k;
    let grid = cfg.grid();
    let (counts, ms) = timed(|| {
        run_trials(cfg.pseudocusp_trials, |t| {
            let real = make_bandlimited(k, trial_stream(cfg.seed, tag::PSEUDOCUSPS, k as u64, t))?;
            Ok(count_pseudocusps(&real, &grid)?)
        })
    })?;
    eprintln!(
        "{NAME}: K = {k}, {} realizations in {:.1} s",
        cfg.pseudocusp_trials,
        ms as f64 / 1000.0
    );
    let src = MomentSource::from_model(FieldModel::BandlimitedTorus { k })?;
    let (est, ems) = timed(|| {
        Ok(pseudocusp_estimates(
            &src,
            &cfg.quad(),
            cfg.pseudocusp_samples,
            mc_seed(cfg.seed, tag::PSEUDOCUSPS, k as u64),
        )?)
    })?;
    rep.put(
        "pseudocusps.newton_failures",
        counts.iter().map(|c| c.newton_failures).sum::<u64>() as f64,
    );

    let mut empirical = [[(0.0, 0.0); 3]; 2];
    for (kind, name) in KINDS.iter().enumerate() {
        let pred = [&est.vertical, &est.horizontal][kind];
        for idx in 0..3 {
            let xs: Vec<f64> = counts.iter().map(|c| count(c, kind, idx)).collect();
            let s = summarize(&xs);
            let p = pred[idx];
            let pre = format!("pseudocusps.{name}.k{idx}");
            rep.put_summary(&pre, &s);
            rep.put_estimate(&format!("{pre}.prediction"), &p);
            rep.rows
                .push(SweepRow::new(NAME, "K", k as f64, &format!("{name}_index{idx}"), &xs, &s).with_prediction(&p));
            rep.records.push(record(
                "thm5.1",
                "bandlimited_torus",
                json!({ "k": k }),
                json!({ "kind": name, "index": idx }),
                &p,
                ems,
            ));
            let z = z_score(s.mean, s.stderr, p.mean, p.stderr);
            rep.put(format!("{pre}.z"), z);
            rep.check_below(
                &format!("{NAME}.{name}.k{idx}"),
                "Kac–Rice count within 3 combined stderr of the realization mean",
                z,
                3.0,
                full,
            );
            empirical[kind][idx] = (s.mean, s.stderr);
        }
    }
    for (idx, (&(a, sa), &(b, sb))) in empirical[0].iter().zip(&empirical[1]).enumerate() {
        let z = z_score(a, sa, b, sb);
        rep.put(format!("pseudocusps.exchange.k{idx}.z"), z);
        rep.check_below(
            &format!("{NAME}.exchange.k{idx}"),
            "vertical and horizontal counts within 3 stderr",
            z,
            3.0,
            full,
        );
        let (v, h) = (est.vertical[idx], est.horizontal[idx]);
        let z = z_score(v.mean, v.stderr, h.mean, h.stderr);
        rep.put(format!("pseudocusps.exchange_prediction.k{idx}.z"), z);
        rep.check_below(
            &format!("{NAME}.exchange_prediction.k{idx}"),
            "vertical and horizontal Kac–Rice counts within 3 stderr",
            z,
            3.0,
            full,
        );
    }
    Ok(())
}
