//! Sample summaries and least-squares fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean; zero for a single value.
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    if n == 0 {
        return Summary {
            n,
            mean: f64::NAN,
            stderr: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Summary {
        n,
        mean,
        stderr,
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// `|a - b| / sqrt(sa^2 + sb^2)`; zero when both values agree exactly.
pub fn z_score(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / sa.hypot(sb)
    }
}

/// Coefficients `c_0..=c_deg` of the least-squares polynomial, lowest first.
pub fn polyfit(xs: &[f64], ys: &[f64], deg: usize) -> Option<Vec<f64>> {
    if xs.len() != ys.len() || xs.len() <= deg {
        return None;
    }
    let a = DMatrix::from_fn(xs.len(), deg + 1, |i, j| xs[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let sol = a.svd(true, true).solve(&b, 1e-12).ok()?;
    Some(sol.iter().copied().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let c = polyfit(xs, ys, 1)?;
    Some(LineFit {
        slope: c[1],
        intercept: c[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_and_cubic() {
        let xs: Vec<f64> = (2..=10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powi(3) + x).collect();
        let c = polyfit(&xs, &ys, 3).unwrap();
        assert!((c[3] - 3.0).abs() < 1e-9 && (c[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn summary_of_constant_sample() {
        let s = summarize(&[1.5; 4]);
        assert_eq!((s.mean, s.stderr, s.min, s.max), (1.5, 0.0, 1.5, 1.5));
        assert_eq!(summarize(&[2.0]).stderr, 0.0);
    }

    #[test]
    fn fits_need_enough_points() {
        assert!(fit_line(&[1.0], &[2.0]).is_none());
        assert!(polyfit(&[1.0, 2.0], &[1.0], 1).is_none());
    }
}
