//! Universal constants of the bandlimited torus in the large-`K` limit.
//!
//! `M` is the normalized conditional Hessian with `Var M_11 = Var M_22 = 1/5`,
//! `Var M_12 = Cov(M_11, M_22) = 1/9` and the mixed covariances zero; `Z` is
//! an independent standard normal 2-vector.

use nalgebra::DMatrix;

use super::mc::{run_replicates, McEstimate};
use crate::error::Result;
use crate::gaussian::{GaussianSampler, GaussianSpec, SymMatrix};

/// Covariance of the packed `(M_11, M_12, M_22)`.
pub fn normalized_hessian_covariance() -> DMatrix<f64> {
    let (a, b) = (1.0 / 5.0, 1.0 / 9.0);
    DMatrix::from_row_slice(3, 3, &[a, 0.0, b, 0.0, b, 0.0, b, 0.0, a])
}

/// `E[func(M, Z)]` for packed `M ~ N(0, cov)` and standard normal `Z`.
pub fn hessian_functional<F>(cov: &DMatrix<f64>, mc: u64, seed: u64, func: F) -> Result<McEstimate>
where
    F: Fn(&SymMatrix, &[f64]) -> f64 + Sync,
{
    let sampler = GaussianSampler::new(&GaussianSpec::centered(cov.clone())?);
    let z = GaussianSampler::new(&GaussianSpec::centered(DMatrix::identity(2, 2))?);
    let est = run_replicates(mc, seed, 1, |rng, y| {
        let mut m = [0.0; 3];
        let mut v = [0.0; 2];
        sampler.sample_into(rng, &mut m);
        z.sample_into(rng, &mut v);
        y[0] = func(&SymMatrix::from_packed(2, m.to_vec())?, &v);
        Ok(0)
    })?;
    Ok(est[0])
}

pub fn adj_norm(m: &SymMatrix, z: &[f64]) -> f64 {
    let w = m.adjugate().mul_vec(z);
    w[0].hypot(w[1])
}

pub fn abs_quadratic(m: &SymMatrix, z: &[f64]) -> f64 {
    m.quad_form(z).abs()
}

/// `l = E |adj(M) Z|`.
pub fn constant_l(mc: u64, seed: u64) -> Result<McEstimate> {
    hessian_functional(&normalized_hessian_covariance(), mc, seed, adj_norm)
}

/// `c = E |Z^T M Z|`.
pub fn constant_c_bandlimited(mc: u64, seed: u64) -> Result<McEstimate> {
    hessian_functional(&normalized_hessian_covariance(), mc, seed, abs_quadratic)
}

/// Reference value of `c` from 10^7 draws, stored with the crate.
pub fn constant_c_golden() -> McEstimate {
    serde_json::from_str(include_str!("../../data/constant_c.json")).expect("bundled golden file parses")
}
