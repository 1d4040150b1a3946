//! Gaussian orthogonally invariant ensembles.
//!
//! `GOI(c)` is the law of a symmetric matrix with centered Gaussian entries
//! and `E[M_ij M_kl] = (d_ik d_jl + d_il d_jk + c d_ij d_kl) / 2`, so
//! `Var M_ii = 1 + c/2`, `Var M_ij = 1/2` and `Cov(M_ii, M_jj) = c/2`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::sym::{packed_index, packed_len, SymMatrix};
use super::{GaussianSampler, GaussianSpec, RngStream};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoiParams {
    pub n: usize,
    pub c: f64,
}

impl GoiParams {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        let p = Self { n, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("GOI size must be positive".into()));
        }
        if !self.c.is_finite() || self.c < -1.0 / self.n as f64 {
            return Err(Error::InvalidParameter(format!(
                "GOI parameter c = {} below -1/n for n = {}",
                self.c, self.n
            )));
        }
        Ok(())
    }
}

/// Covariance of the packed upper-triangle entries of a `GOI(c)` matrix.
pub fn goi_covariance(params: GoiParams) -> DMatrix<f64> {
    let n = params.n;
    let d = packed_len(n);
    let mut cov = DMatrix::zeros(d, d);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                for l in k..n {
                    cov[(packed_index(n, i, j), packed_index(n, k, l))] = 0.5
                        * (delta(i, k) * delta(j, l)
                            + delta(i, l) * delta(j, k)
                            + params.c * delta(i, j) * delta(k, l));
                }
            }
        }
    }
    cov
}

/// Reusable sampler for one parameter set.
#[derive(Clone, Debug)]
pub enum GoiSampler {
    /// GOE plus an independent `N(0, c/2)` multiple of the identity.
    Shifted { n: usize, shift_sd: f64 },
    /// Spectral factor of the full entry covariance, used for `c < 0`.
    Factored { n: usize, sampler: GaussianSampler },
}

impl GoiSampler {
    pub fn new(params: GoiParams) -> Result<Self> {
        params.validate()?;
        if params.c >= 0.0 {
            Ok(Self::Shifted {
                n: params.n,
                shift_sd: (params.c / 2.0).sqrt(),
            })
        } else {
            let spec = GaussianSpec::centered(goi_covariance(params))?;
            Ok(Self::Factored {
                n: params.n,
                sampler: GaussianSampler::new(&spec),
            })
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SymMatrix {
        match self {
            Self::Shifted { n, shift_sd } => {
                let n = *n;
                let z: f64 = rng.sample::<f64, _>(StandardNormal) * shift_sd;
                let mut m = SymMatrix::zeros(n);
                for i in 0..n {
                    for j in i..n {
                        let g: f64 = rng.sample(StandardNormal);
                        let v = if i == j {
                            g + z
                        } else {
                            g * std::f64::consts::FRAC_1_SQRT_2
                        };
                        m.set(i, j, v);
                    }
                }
                m
            }
            Self::Factored { n, sampler } => {
                let mut packed = vec![0.0; packed_len(*n)];
                sampler.sample_into(rng, &mut packed);
                SymMatrix::from_packed(*n, packed).expect("packed length matches")
            }
        }
    }
}

pub fn sample_goi(params: GoiParams, stream: RngStream) -> Result<SymMatrix> {
    Ok(GoiSampler::new(params)?.sample(&mut stream.rng()))
}

/// `2^(n/2) prod_{i=1..n} Gamma(i/2)`.
pub fn goi_normalization(n: usize) -> f64 {
    (1..=n).fold(2f64.powf(n as f64 / 2.0), |acc, i| acc * gamma(i as f64 / 2.0))
}

/// Density of the ordered eigenvalues of a `GOI(c)` matrix.
///
/// The closed form is usually quoted for the parametrisation in which the
/// diagonal covariance is `c` rather than `c/2`; it is evaluated here at
/// `c/2` so that it describes the matrices drawn by [`GoiSampler`].
pub fn goi_eigenvalue_density(params: GoiParams, lambdas: &[f64]) -> Result<f64> {
    let n = params.n;
    if lambdas.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: lambdas.len(),
        });
    }
    if n == 0 || 1.0 + n as f64 * params.c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "GOI density needs 1 + n c > 0 (n = {n}, c = {})",
            params.c
        )));
    }
    if lambdas.windows(2).any(|w| w[0] > w[1]) {
        return Ok(0.0);
    }
    let c = params.c / 2.0;
    let nc1 = 1.0 + n as f64 * c;
    let sum: f64 = lambdas.iter().sum();
    let sq: f64 = lambdas.iter().map(|l| l * l).sum();
    let mut vandermonde = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            vandermonde *= (lambdas[j] - lambdas[i]).abs();
        }
    }
    let expo = -0.5 * sq + c / (2.0 * nc1) * sum * sum;
    Ok(expo.exp() * vandermonde / (goi_normalization(n) * nc1.sqrt()))
}
