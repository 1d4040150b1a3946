//! Gaussian linear algebra: covariance specs, conditioning, sampling,
//! symmetric matrices and GOI ensembles.

pub mod goi;
pub mod rng;
pub mod sym;

pub use goi::{goi_covariance, goi_eigenvalue_density, sample_goi, GoiParams, GoiSampler};
pub use rng::RngStream;
pub use sym::{adjugate, biparametric_index, index_of, SymMatrix, INDEX_TOL};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative PSD tolerance, measured against the largest eigenvalue.
pub const TOL_PSD: f64 = 1e-10;

/// A Gaussian vector given by its covariance. The mean is zero for every
/// law built from a centered field; conditioning on a nonzero observation
/// produces a shifted mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    covariance: DMatrix<f64>,
    mean: DVector<f64>,
}

impl GaussianSpec {
    pub fn centered(covariance: DMatrix<f64>) -> Result<Self> {
        let n = covariance.nrows();
        Self::with_mean(covariance, DVector::zeros(n))
    }

    pub fn with_mean(covariance: DMatrix<f64>, mean: DVector<f64>) -> Result<Self> {
        let n = covariance.nrows();
        if covariance.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: covariance.ncols(),
            });
        }
        if mean.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: mean.len(),
            });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("empty covariance".into()));
        }
        let scale = covariance.abs().max().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let covariance = symmetrize(covariance);
        let ev = SymmetricEigen::new(covariance.clone()).eigenvalues;
        let max = ev.iter().fold(0.0_f64, |a, v| a.max(*v));
        let min = ev.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        if !min.is_finite() || min < -TOL_PSD * max.max(f64::MIN_POSITIVE) {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        Ok(Self { covariance, mean })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Marginal law of the listed coordinates.
    pub fn marginal(&self, idx: &[usize]) -> Self {
        Self {
            covariance: select(&self.covariance, idx, idx),
            mean: DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i])),
        }
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Linear regression of the unobserved block on the observed block.
///
/// `coefficients` is `S_uo S_oo^-1` and `residual` the Schur complement
/// `S_uu - S_uo S_oo^-1 S_ou`; the conditional law given `x_o = v` is
/// `N(mu_u + coefficients (v - mu_o), residual)`.
#[derive(Clone, Debug)]
pub struct Regression {
    pub unobserved: Vec<usize>,
    pub observed: Vec<usize>,
    pub coefficients: DMatrix<f64>,
    pub residual: DMatrix<f64>,
}

pub fn regression(joint: &GaussianSpec, observed: &[usize]) -> Result<Regression> {
    let n = joint.dim();
    let mut seen = vec![false; n];
    for &i in observed {
        if i >= n || seen[i] {
            return Err(Error::InvalidParameter(format!(
                "bad observed index {i} for dimension {n}"
            )));
        }
        seen[i] = true;
    }
    let unobserved: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
    let s = &joint.covariance;
    let s_oo = select(s, observed, observed);
    let s_uo = select(s, &unobserved, observed);
    let s_uu = select(s, &unobserved, &unobserved);

    let coefficients = if observed.is_empty() {
        DMatrix::zeros(unobserved.len(), 0)
    } else {
        let eig = SymmetricEigen::new(s_oo.clone());
        let max = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        if !(min > TOL_PSD * max) {
            return Err(Error::SingularObservation { min_eigenvalue: min });
        }
        let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
        let inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
        &s_uo * inv
    };
    let residual = symmetrize(&s_uu - &coefficients * s_uo.transpose());
    Ok(Regression {
        unobserved,
        observed: observed.to_vec(),
        coefficients,
        residual,
    })
}

/// Conditional law of the unobserved coordinates (in increasing index
/// order) given that `observed` coordinates equal `value`.
pub fn condition_gaussian(joint: &GaussianSpec, observed: &[usize], value: &[f64]) -> Result<GaussianSpec> {
    if value.len() != observed.len() {
        return Err(Error::DimensionMismatch {
            expected: observed.len(),
            got: value.len(),
        });
    }
    let reg = regression(joint, observed)?;
    let shift = DVector::from_iterator(
        observed.len(),
        observed.iter().zip(value).map(|(&i, v)| v - joint.mean[i]),
    );
    let mu_u = DVector::from_iterator(reg.unobserved.len(), reg.unobserved.iter().map(|&i| joint.mean[i]));
    let mean = mu_u + &reg.coefficients * shift;
    // the Schur complement of a PSD matrix is PSD; clamp rounding noise
    let residual = clamp_psd(reg.residual);
    GaussianSpec::with_mean(residual, mean)
}

fn clamp_psd(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(*v));
    if eig.eigenvalues.iter().all(|v| *v >= 0.0) || max <= 0.0 {
        return if max <= 0.0 { m * 0.0 } else { m };
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0)));
    symmetrize(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Precomputed spectral factor `L` with `L L^T = covariance`; columns of
/// numerically zero eigenvalues are dropped, so draws stay exactly in the
/// column space.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(spec: &GaussianSpec) -> Self {
        let eig = SymmetricEigen::new(spec.covariance.clone());
        let max = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(*v));
        let keep: Vec<usize> = (0..spec.dim())
            .filter(|&i| eig.eigenvalues[i] > TOL_PSD * max)
            .collect();
        let factor = DMatrix::from_fn(spec.dim(), keep.len(), |i, j| {
            eig.eigenvectors[(i, keep[j])] * eig.eigenvalues[keep[j]].sqrt()
        });
        Self {
            mean: spec.mean.clone(),
            factor,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Writes one draw into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let z: Vec<f64> = (0..self.rank()).map(|_| rng.sample(StandardNormal)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.mean[i];
            for (j, zj) in z.iter().enumerate() {
                acc += self.factor[(i, j)] * zj;
            }
            *o = acc;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        DVector::from_vec(out)
    }
}

/// One draw from `spec` using the stream's own generator.
pub fn sample_gaussian(spec: &GaussianSpec, stream: RngStream) -> DVector<f64> {
    GaussianSampler::new(spec).sample(&mut stream.rng())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(rows: &[&[f64]]) -> GaussianSpec {
        let n = rows.len();
        GaussianSpec::centered(DMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn schur_complement_2x2() {
        let joint = spec(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let c = condition_gaussian(&joint, &[1], &[0.0]).unwrap();
        assert!((c.covariance()[(0, 0)] - 1.5).abs() < 1e-15);
        assert_eq!(c.mean()[0], 0.0);
        let shifted = condition_gaussian(&joint, &[1], &[2.0]).unwrap();
        assert!((shifted.mean()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn independent_block_unchanged() {
        let joint = spec(&[&[3.0, 0.5, 0.0], &[0.5, 1.0, 0.0], &[0.0, 0.0, 4.0]]);
        let c = condition_gaussian(&joint, &[2], &[0.0]).unwrap();
        assert_eq!(c.covariance(), joint.marginal(&[0, 1]).covariance());
    }

    #[test]
    fn singular_observation_rejected() {
        let joint = spec(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(matches!(
            condition_gaussian(&joint, &[0, 1], &[0.0, 0.0]),
            Err(Error::SingularObservation { .. })
        ));
    }

    #[test]
    fn invalid_covariances_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianSpec::centered(m),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.2, 1.0]);
        assert!(GaussianSpec::centered(m).is_err());
    }

    #[test]
    fn identity_draws_have_identity_covariance() {
        let id = GaussianSpec::centered(DMatrix::identity(3, 3)).unwrap();
        let sampler = GaussianSampler::new(&id);
        let mut rng = RngStream::new(11, 0).rng();
        let n = 100_000;
        let mut acc = DMatrix::<f64>::zeros(3, 3);
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            acc += &x * x.transpose();
        }
        acc /= n as f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                // standard error of a product moment of unit normals
                let se = if i == j {
                    (2.0 / n as f64).sqrt()
                } else {
                    (1.0 / n as f64).sqrt()
                };
                assert!((acc[(i, j)] - target).abs() < 4.0 * se, "{i},{j}: {}", acc[(i, j)]);
            }
        }
    }

    #[test]
    fn degenerate_draws_stay_in_column_space() {
        let u = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let w = DVector::from_vec(vec![0.0, 1.0, 1.0]);
        let cov = &u * u.transpose() + &w * w.transpose() * 3.0;
        let g = GaussianSpec::centered(cov).unwrap();
        let sampler = GaussianSampler::new(&g);
        assert_eq!(sampler.rank(), 2);
        let normal = u.cross(&w).normalize();
        let mut rng = RngStream::new(3, 1).rng();
        for _ in 0..1000 {
            let x = sampler.sample(&mut rng);
            assert!(x.dot(&normal).abs() < 1e-10 * x.norm().max(1.0));
        }
    }

    #[test]
    fn fixed_stream_is_deterministic() {
        let g = spec(&[&[2.0, 0.3], &[0.3, 1.0]]);
        let s = RngStream::new(7, 0);
        assert_eq!(sample_gaussian(&g, s), sample_gaussian(&g, s));
    }

    fn arb_cov(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
            let a = DMatrix::from_vec(n, n, v);
            &a * a.transpose() + DMatrix::identity(n, n) * 0.05
        })
    }

    proptest! {
        #[test]
        fn conditioning_twice_is_conditioning_once(cov in arb_cov(5), v in -2.0f64..2.0) {
            let joint = GaussianSpec::centered(cov).unwrap();
            let once = condition_gaussian(&joint, &[1, 3], &[v, -v]).unwrap();
            let again = condition_gaussian(&joint, &[3, 1], &[-v, v]).unwrap();
            let diff = (once.covariance() - again.covariance()).abs().max();
            prop_assert!(diff < 1e-10);
            prop_assert!((once.mean() - again.mean()).abs().max() < 1e-10);
            // sequential conditioning on the same information
            let step1 = condition_gaussian(&joint, &[1], &[v]).unwrap();
            let step2 = condition_gaussian(&step1, &[2], &[-v]).unwrap();
            prop_assert!((step2.covariance() - once.covariance()).abs().max() < 1e-9);
            prop_assert!((step2.mean() - once.mean()).abs().max() < 1e-9);
        }

        #[test]
        fn conditional_covariance_is_psd(cov in arb_cov(6)) {
            let joint = GaussianSpec::centered(cov).unwrap();
            let c = condition_gaussian(&joint, &[0, 2, 4], &[0.0, 0.0, 0.0]).unwrap();
            let ev = SymmetricEigen::new(c.covariance().clone()).eigenvalues;
            prop_assert!(ev.iter().all(|v| *v >= -1e-12));
        }
    }
}
