//! Closed-form contour lengths on isotropic spheres against the general
//! i.i.d. evaluator fed with the sphere moments.

use anyhow::Result;
use serde_json::json;

use singmap_core::fields::FieldModel;
use singmap_core::kac_rice::sphere::sphere_contour_n2_analytic;
use singmap_core::kac_rice::{length_estimates_iid, sphere_contour_estimates, MomentSource};

use super::{mc_seed, record, rel, tag, timed};
use crate::config::ExperimentConfig;
use crate::report::Report;
use crate::stats::z_score;

pub const NAME: &str = "sphere-consistency";

pub fn run(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let full = cfg.full_scale();
    let (cp, cpp) = (cfg.c_prime, cfg.c_double_prime);
    for &n in &cfg.sphere_dims {
        let (closed, cms) = timed(|| {
            Ok(sphere_contour_estimates(
                n,
                cp,
                cpp,
                cfg.mc_samples,
                mc_seed(cfg.seed, tag::SPHERE, 2 * n as u64),
            )?)
        })?;
        let model = FieldModel::IsotropicSphere {
            n,
            c_prime: cp,
            c_double_prime: cpp,
        };
        let src = MomentSource::from_model(model)?;
        let (direct, dms) = timed(|| {
            Ok(length_estimates_iid(
                &src,
                &cfg.quad(),
                cfg.mc_samples,
                mc_seed(cfg.seed, tag::SPHERE, 2 * n as u64 + 1),
            )?)
        })?;
        eprintln!(
            "{NAME}: n = {n}, closed form {:.1} s, direct {:.1} s",
            cms as f64 / 1000.0,
            dms as f64 / 1000.0
        );
        let params = json!({ "n": n, "c_prime": cp, "c_double_prime": cpp });
        for k in 0..n {
            let (a, b) = (closed.per_index[k], direct.contour.per_index[k]);
            let pre = format!("sphere.n{n}.k{k}");
            rep.put_estimate(&format!("{pre}.closed"), &a);
            rep.put_estimate(&format!("{pre}.direct"), &b);
            rep.put(format!("{pre}.relative_difference"), rel(a.mean, b.mean));
            rep.records.push(record(
                "thm4.2",
                "isotropic_sphere",
                params.clone(),
                json!({ "target": "contour", "index": k }),
                &a,
                cms,
            ));
            rep.records.push(record(
                "thm2.13",
                "isotropic_sphere",
                params.clone(),
                json!({ "target": "contour", "index": k }),
                &b,
                dms,
            ));
            rep.check_below(
                &format!("{NAME}.n{n}.k{k}"),
                "closed form and direct simulation differ by less than 2%",
                rel(a.mean, b.mean),
                0.02,
                full,
            );
        }
        let sum: f64 = closed.per_index.iter().map(|e| e.mean).sum();
        rep.put_estimate(&format!("sphere.n{n}.closed_total"), &closed.total);
        rep.check_abs(
            &format!("{NAME}.n{n}.partition"),
            "per-index closed forms sum to the unfiltered closed form",
            sum,
            closed.total.mean,
            3.0 * closed.total.stderr,
            true,
        );
        if n == 2 {
            let exact = sphere_contour_n2_analytic(cp, cpp)?;
            rep.put("sphere.n2.analytic", exact);
            for (k, e) in closed.per_index.iter().enumerate() {
                let z = z_score(e.mean, e.stderr, exact, 0.0);
                rep.put(format!("sphere.n2.k{k}.analytic_z"), z);
                rep.check_below(
                    &format!("{NAME}.n2.k{k}.analytic"),
                    "closed form within 3 stderr of the half-normal evaluation",
                    z,
                    3.0,
                    full,
                );
            }
        }
    }
    Ok(())
}
