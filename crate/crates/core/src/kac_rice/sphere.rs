//! Closed form for the visible contour of an isotropic map on `S^n`.
//!
//! With `eta = sqrt(C'/C'')` and `kappa = C'/sqrt(C'')` the expected contour
//! length of index `k` is
//! `sqrt(2 pi^3) n / Gamma((n+1)/2) * kappa / eta^n * E[prod |lambda_i| 1{k negative}]`
//! where the eigenvalues are those of a `GOI((1 + eta^2)/2)` matrix of size `n - 1`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use super::mc::{run_replicates, McEstimate};
use crate::error::{Error, Result};
use crate::gaussian::{GoiParams, GoiSampler};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereContour {
    pub prefactor: f64,
    pub goi_c: f64,
    /// Index `k = 0..n-1`.
    pub per_index: Vec<McEstimate>,
    pub total: McEstimate,
}

fn check(n: usize, c_prime: f64, c_double_prime: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "sphere dimension must be >= 2, got {n}"
        )));
    }
    if !(c_prime > 0.0 && c_double_prime > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "C' and C'' must be positive, got {c_prime} and {c_double_prime}"
        )));
    }
    Ok(())
}

pub fn sphere_prefactor(n: usize, c_prime: f64, c_double_prime: f64) -> f64 {
    let eta = (c_prime / c_double_prime).sqrt();
    let kappa = c_prime / c_double_prime.sqrt();
    (2.0 * PI.powi(3)).sqrt() * n as f64 / gamma((n as f64 + 1.0) / 2.0) * kappa / eta.powi(n as i32)
}

/// Per-index and total contour lengths from one set of GOI draws.
pub fn sphere_contour_estimates(
    n: usize,
    c_prime: f64,
    c_double_prime: f64,
    mc: u64,
    seed: u64,
) -> Result<SphereContour> {
    check(n, c_prime, c_double_prime)?;
    let goi_c = (1.0 + c_prime / c_double_prime) / 2.0;
    let sampler = GoiSampler::new(GoiParams::new(n - 1, goi_c)?)?;
    let pre = sphere_prefactor(n, c_prime, c_double_prime);
    let est = run_replicates(mc, seed, n + 1, |rng, y| {
        let ev = sampler.sample(rng).eigenvalues();
        let prod: f64 = ev.iter().map(|v| v.abs()).product();
        let k = ev.iter().filter(|v| **v < 0.0).count();
        y[k] = pre * prod;
        y[n] = pre * prod;
        Ok(0)
    })?;
    Ok(SphereContour {
        prefactor: pre,
        goi_c,
        per_index: est[..n].to_vec(),
        total: est[n],
    })
}

/// Expected contour length of index `k`; `k = 0` is the all-positive and
/// `k = n - 1` the all-negative event.
pub fn expected_contour_sphere(
    n: usize,
    c_prime: f64,
    c_double_prime: f64,
    k: usize,
    mc: u64,
    seed: u64,
) -> Result<McEstimate> {
    check(n, c_prime, c_double_prime)?;
    if k >= n {
        return Err(Error::InvalidParameter(format!("index {k} out of range 0..{n}")));
    }
    Ok(sphere_contour_estimates(n, c_prime, c_double_prime, mc, seed)?.per_index[k])
}

/// For `n = 2` the GOI matrix is a scalar normal with variance `1 + c/2`,
/// so each sign contributes `sigma / sqrt(2 pi)`.
pub fn sphere_contour_n2_analytic(c_prime: f64, c_double_prime: f64) -> Result<f64> {
    check(2, c_prime, c_double_prime)?;
    let c = (1.0 + c_prime / c_double_prime) / 2.0;
    let sigma = (1.0 + c / 2.0).sqrt();
    Ok(sphere_prefactor(2, c_prime, c_double_prime) * 0.5 * sigma * (2.0 / PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n2_matches_half_normal() {
        let exact = sphere_contour_n2_analytic(1.0, 0.5).unwrap();
        let est = sphere_contour_estimates(2, 1.0, 0.5, 200_000, 3).unwrap();
        for k in 0..2 {
            assert!((est.per_index[k].mean - exact).abs() < 3.0 * est.per_index[k].stderr);
        }
    }

    #[test]
    fn indices_partition_total() {
        let est = sphere_contour_estimates(3, 2.0, 1.5, 5000, 1).unwrap();
        let sum: f64 = est.per_index.iter().map(|e| e.mean).sum();
        assert!((sum - est.total.mean).abs() < 1e-9 * est.total.mean);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(expected_contour_sphere(1, 1.0, 1.0, 0, 10, 0).is_err());
        assert!(expected_contour_sphere(2, -1.0, 1.0, 0, 10, 0).is_err());
        assert!(expected_contour_sphere(2, 1.0, 1.0, 2, 10, 0).is_err());
    }
}
