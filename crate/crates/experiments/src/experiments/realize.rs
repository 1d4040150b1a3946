//! One bandlimited realization: its critical polylines, lengths and
//! pseudocusp counts.

use anyhow::{Context, Result};
use std::fs;

use singmap_core::fields::make_bandlimited;
use singmap_core::geometry::{extract_critical_curve, lemma_length_oracle, measure, write_polylines_csv};

use super::{rel, tag, trial_stream};
use crate::config::ExperimentConfig;
use crate::report::Report;

pub const NAME: &str = "single-realization";

/// Writes `polylines.csv` into the output directory.
pub fn run(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let k = cfg.realize_k;
    let grid = cfg.grid();
    let real = make_bandlimited(k, trial_stream(cfg.seed, tag::REALIZE, k as u64, cfg.realize_trial))?;
    let ex = extract_critical_curve(&real, &grid)?;
    let r = measure(&real, &ex, &grid)?;
    let o = lemma_length_oracle(&real, &ex.polylines);

    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let path = cfg.output_dir.join("polylines.csv");
    write_polylines_csv(
        fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?,
        &ex.polylines,
    )?;
    eprintln!(
        "{NAME}: K = {k}, {} polylines written to {}",
        ex.polylines.len(),
        path.display()
    );

    rep.put("realize.polylines", ex.polylines.len() as f64);
    rep.put("realize.segments", r.segments as f64);
    rep.put("realize.degenerate_vertices", ex.degenerate_vertices as f64);
    rep.put("realize.critical_length", r.critical_length);
    rep.put("realize.contour_length", r.contour_length);
    rep.put("realize.pareto_critical", r.pareto_critical);
    rep.put("realize.pareto_contour", r.pareto_contour);
    for i in 0..3 {
        rep.put(format!("realize.k{i}.critical_length"), r.per_index_critical[i]);
        rep.put(format!("realize.k{i}.contour_length"), r.per_index_contour[i]);
    }
    if let Some(c) = &r.pseudocusp_counts {
        for i in 0..3 {
            rep.put(format!("realize.vertical.k{i}"), c.vertical[i] as f64);
            rep.put(format!("realize.horizontal.k{i}"), c.horizontal[i] as f64);
        }
    }
    rep.put("realize.oracle.critical_length", o.critical_length);
    rep.put("realize.oracle.contour_length", o.contour_length);
    rep.check(
        &format!("{NAME}.closed"),
        "every polyline closes on the torus",
        ex.polylines.iter().filter(|p| !p.closed).count() as f64,
        0.0,
        0.0,
        ex.polylines.iter().all(|p| p.closed),
        true,
    );
    rep.check_below(
        &format!("{NAME}.oracle"),
        "weighted-integral critical length within 1% of the polyline length",
        rel(o.critical_length, r.critical_length),
        0.01,
        true,
    );
    Ok(())
}
