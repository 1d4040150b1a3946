//! Chart-change check of the length integrand.
//!
//! Under `x = x(y)` with Jacobian `J`, at a zero of `V`:
//! `V_x -> J^T V_x J`, `V_theta -> J^T V_theta`, `G -> J^T G J` and
//! `det Var V -> det(J)^2 det Var V`. Integrand times volume element must
//! not change.

use nalgebra::DMatrix;
use rand::Rng;
use std::f64::consts::PI;

use super::length::conditional_pencil;
use crate::error::{Error, Result};
use crate::fields::JetMoments;
use crate::gaussian::sym::packed_len;
use crate::gaussian::{GaussianSampler, RngStream, SymMatrix};

fn integrands(vx: &SymMatrix, vt: &[f64], metric: &SymMatrix, det_var: f64) -> (f64, f64) {
    let n = vt.len();
    let lv = vx.adjugate().mul_vec(vt);
    let dens = 1.0 / ((2.0 * PI).powi(n as i32) * det_var).sqrt();
    let crit = metric.quad_form(&lv).sqrt() * dens;
    let cont = vt.iter().zip(&lv).map(|(a, b)| a * b).sum::<f64>().abs() * dens;
    (crit, cont)
}

/// Largest relative change of the critical-curve and contour integrands
/// (times `|dx|`) over `samples` conditional draws at random angles.
pub fn integrand_coordinate_invariance_check(
    moments: &JetMoments,
    j: &DMatrix<f64>,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = moments.dim;
    if j.nrows() != n || j.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: j.nrows(),
        });
    }
    let det_j = j.determinant();
    if det_j == 0.0 || !det_j.is_finite() {
        return Err(Error::InvalidParameter("chart change must be invertible".into()));
    }
    let pair = moments.pair_covariance();
    let metric_x = moments.metric.congruence(j);
    let mut rng = RngStream::new(seed, 0).rng();
    let mut worst = 0.0f64;
    let mut buf = vec![0.0; n + packed_len(n)];
    for _ in 0..samples {
        let theta = rng.random::<f64>() * PI;
        let (cond, dens) = conditional_pencil(&pair, n, theta)?;
        let det_var = 1.0 / ((2.0 * PI).powi(n as i32) * dens * dens);
        GaussianSampler::new(&cond).sample_into(&mut rng, &mut buf);
        let vt = &buf[..n];
        let vx = SymMatrix::from_packed(n, buf[n..].to_vec())?;
        let (cy, ty) = integrands(&vx, vt, &moments.metric, det_var);

        let vt_x: Vec<f64> = (j.transpose() * DMatrix::from_column_slice(n, 1, vt))
            .iter()
            .copied()
            .collect();
        let (cx, tx) = integrands(&vx.congruence(j), &vt_x, &metric_x, det_j * det_j * det_var);
        for (a, b) in [(cx / det_j.abs(), cy), (tx / det_j.abs(), ty)] {
            if b != 0.0 {
                worst = worst.max((a / b - 1.0).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{model_moments, FieldModel};

    #[test]
    fn identity_and_scaling() {
        let m = model_moments(FieldModel::BandlimitedTorus { k: 3 }, &[0.0, 0.0]).unwrap();
        let id = DMatrix::identity(2, 2);
        assert_eq!(integrand_coordinate_invariance_check(&m, &id, 100, 1).unwrap(), 0.0);
        let two = id * 2.0;
        assert!(integrand_coordinate_invariance_check(&m, &two, 100, 1).unwrap() < 1e-8);
    }

    #[test]
    fn rejects_singular_jacobian() {
        let m = model_moments(FieldModel::BandlimitedTorus { k: 3 }, &[0.0, 0.0]).unwrap();
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(integrand_coordinate_invariance_check(&m, &j, 10, 1).is_err());
    }
}
