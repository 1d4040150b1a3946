//! The constants `l` and `c` of the bandlimited length formulas.

use anyhow::Result;
use serde_json::json;
use std::f64::consts::PI;

use singmap_core::kac_rice::{constant_c_bandlimited, constant_c_golden, constant_l};

use super::bandlimited::QUOTED_L;
use super::{mc_seed, record, tag, timed};
use crate::config::ExperimentConfig;
use crate::report::Report;
use crate::stats::z_score;

pub const NAME: &str = "constants";

/// Wall-clock budget for `l` at 10^6 samples.
pub const L_BUDGET_SECONDS: f64 = 10.0;

pub fn run(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let full = cfg.full_scale();
    let mc = cfg.mc_samples;
    let (l, lms) = timed(|| Ok(constant_l(mc, mc_seed(cfg.seed, tag::CONSTANTS, 0))?))?;
    let (c, cms) = timed(|| Ok(constant_c_bandlimited(mc, mc_seed(cfg.seed, tag::CONSTANTS, 1))?))?;
    let golden = constant_c_golden();
    let secs = lms as f64 / 1000.0;
    eprintln!(
        "{NAME}: l = {:.5} ± {:.5} ({secs:.2} s), c = {:.5} ± {:.5}",
        l.mean, l.stderr, c.mean, c.stderr
    );

    rep.put_estimate("constants.l", &l);
    rep.put("constants.l.seconds", secs);
    rep.put("constants.sqrt3_pi_l", 3f64.sqrt() * PI * l.mean);
    rep.put_estimate("constants.c", &c);
    rep.put_estimate("constants.c_golden", &golden);
    rep.records
        .push(record("const_l", "goi_hessian", json!({}), json!({}), &l, lms));
    rep.records
        .push(record("const_c", "bandlimited_torus", json!({}), json!({}), &c, cms));

    rep.check_abs(
        &format!("{NAME}.l"),
        "l within 0.01 of 0.607",
        l.mean,
        QUOTED_L,
        0.01,
        true,
    );
    rep.check_below(
        &format!("{NAME}.l_time"),
        "l computed within the time budget",
        secs,
        L_BUDGET_SECONDS,
        full,
    );
    rep.check_abs(
        &format!("{NAME}.sqrt3_pi_l"),
        "sqrt(3) pi l within [3.2, 3.4]",
        3f64.sqrt() * PI * l.mean,
        3.3,
        0.1,
        true,
    );
    let z = z_score(c.mean, c.stderr, golden.mean, golden.stderr);
    rep.put("constants.c.z_golden", z);
    rep.check_below(
        &format!("{NAME}.c_golden"),
        "c within 3 combined stderr of the stored reference",
        z,
        3.0,
        full,
    );
    Ok(())
}
