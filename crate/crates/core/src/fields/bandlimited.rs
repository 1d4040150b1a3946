//! Random trigonometric polynomials on the flat torus `[0,1)^2`.
//!
//! Each component is `f(x, y) = sum a_{m,n} exp(2 pi i (m x + n y))` over
//! `|m|, |n| <= K`, with `a_{-m,-n} = conj(a_{m,n})`.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Coefficients of both components, stored as `[component][m + K][n + K]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub k: usize,
    pub data: Vec<C64>,
}

impl Coefficients {
    pub fn zeros(k: usize) -> Self {
        let side = 2 * k + 1;
        Self {
            k,
            data: vec![C64::new(0.0, 0.0); 2 * side * side],
        }
    }

    pub fn side(&self) -> usize {
        2 * self.k + 1
    }

    pub fn offset(&self, comp: usize, m: i64, n: i64) -> usize {
        let k = self.k as i64;
        debug_assert!(m.abs() <= k && n.abs() <= k);
        let side = self.side();
        (comp * side + (m + k) as usize) * side + (n + k) as usize
    }

    pub fn get(&self, comp: usize, m: i64, n: i64) -> C64 {
        self.data[self.offset(comp, m, n)]
    }

    /// Sets `a_{m,n}` and its mirror `a_{-m,-n}`.
    pub fn set_hermitian(&mut self, comp: usize, m: i64, n: i64, a: C64) {
        let i = self.offset(comp, m, n);
        let j = self.offset(comp, -m, -n);
        self.data[i] = a;
        self.data[j] = a.conj();
    }

    /// Largest violation of `a_{-m,-n} = conj(a_{m,n})`.
    pub fn hermitian_defect(&self) -> f64 {
        let k = self.k as i64;
        let mut worst = 0.0_f64;
        for comp in 0..2 {
            for m in -k..=k {
                for n in -k..=k {
                    let d = self.get(comp, m, n) - self.get(comp, -m, -n).conj();
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }

    /// Real view, re/im interleaved in storage order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.data.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn from_flat(k: usize, flat: &[f64]) -> Result<Self> {
        let side = 2 * k + 1;
        let expected = 4 * side * side;
        if flat.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: flat.len(),
            });
        }
        Ok(Self {
            k,
            data: flat.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect(),
        })
    }
}

/// A mode is free when it comes first lexicographically among `(m, n)` and
/// `(-m, -n)`; its mirror is then fixed by symmetry.
fn is_free(m: i64, n: i64) -> bool {
    m > 0 || (m == 0 && n > 0)
}

pub fn sample_coefficients<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Coefficients {
    let mut c = Coefficients::zeros(k);
    let ki = k as i64;
    for comp in 0..2 {
        let a00: f64 = rng.sample(StandardNormal);
        c.set_hermitian(comp, 0, 0, C64::new(a00, 0.0));
        for m in -ki..=ki {
            for n in -ki..=ki {
                if !is_free(m, n) {
                    continue;
                }
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c.set_hermitian(comp, m, n, C64::new(re, im) * FRAC_1_SQRT_2);
            }
        }
    }
    c
}

fn phases(k: usize, t: f64) -> Vec<C64> {
    let ki = k as i64;
    (-ki..=ki)
        .map(|m| C64::from_polar(1.0, 2.0 * PI * m as f64 * t))
        .collect()
}

/// Value and derivatives of one component, ordered
/// `[f, f_x, f_y, f_xx, f_xy, f_yy]`.
pub fn jet(c: &Coefficients, comp: usize, x: f64, y: f64) -> [f64; 6] {
    let k = c.k as i64;
    let side = c.side();
    let ex = phases(c.k, x);
    let ey = phases(c.k, y);
    let w = 2.0 * PI;
    let mut out = [C64::new(0.0, 0.0); 6];
    for (mi, m) in (-k..=k).enumerate() {
        let row = &c.data[(comp * side + mi) * side..(comp * side + mi + 1) * side];
        let (mut s0, mut s1, mut s2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (ni, n) in (-k..=k).enumerate() {
            let t = row[ni] * ey[ni];
            let nf = n as f64;
            s0 += t;
            s1 += t * nf;
            s2 += t * (nf * nf);
        }
        let e = ex[mi];
        let mf = m as f64;
        out[0] += e * s0;
        out[1] += e * s0 * mf;
        out[2] += e * s1;
        out[3] += e * s0 * (mf * mf);
        out[4] += e * s1 * mf;
        out[5] += e * s2;
    }
    // i * w per first derivative, -w^2 per second derivative
    let i = C64::new(0.0, 1.0);
    [
        out[0].re,
        (out[1] * i * w).re,
        (out[2] * i * w).re,
        -(out[3] * w * w).re,
        -(out[4] * w * w).re,
        -(out[5] * w * w).re,
    ]
}

/// Complex value of one component, used to check that it is real.
pub fn value_complex(c: &Coefficients, comp: usize, x: f64, y: f64) -> C64 {
    let k = c.k as i64;
    let ex = phases(c.k, x);
    let ey = phases(c.k, y);
    let mut acc = C64::new(0.0, 0.0);
    for (mi, m) in (-k..=k).enumerate() {
        for (ni, n) in (-k..=k).enumerate() {
            acc += c.get(comp, m, n) * ex[mi] * ey[ni];
        }
    }
    acc
}

/// Gradients of both components on the `res x res` grid with nodes
/// `origin + (i, j) / res`; arrays are indexed `i * res + j` with `i` along x.
pub fn grid_gradients(c: &Coefficients, res: usize, origin: [f64; 2]) -> [Vec<f64>; 4] {
    let k = c.k as i64;
    let side = c.side();
    let w = 2.0 * PI;
    let ex: Vec<Vec<C64>> = (0..res)
        .map(|i| phases(c.k, origin[0] + i as f64 / res as f64))
        .collect();
    let ey: Vec<Vec<C64>> = (0..res)
        .map(|j| phases(c.k, origin[1] + j as f64 / res as f64))
        .collect();
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; res * res]);
    for comp in 0..2 {
        // partial sums over n: c0[m][j] = sum a e_n(y_j), c1 with factor n
        let mut c0 = vec![C64::new(0.0, 0.0); side * res];
        let mut c1 = vec![C64::new(0.0, 0.0); side * res];
        for mi in 0..side {
            let row = &c.data[(comp * side + mi) * side..(comp * side + mi + 1) * side];
            for (j, eyj) in ey.iter().enumerate() {
                let (mut s0, mut s1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for (ni, n) in (-k..=k).enumerate() {
                    let t = row[ni] * eyj[ni];
                    s0 += t;
                    s1 += t * n as f64;
                }
                c0[mi * res + j] = s0;
                c1[mi * res + j] = s1;
            }
        }
        let (gx, gy) = out.split_at_mut(2 * comp + 1);
        let gx = &mut gx[2 * comp];
        let gy = &mut gy[0];
        for (i, exi) in ex.iter().enumerate() {
            for j in 0..res {
                let (mut dx, mut dy) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for (mi, m) in (-k..=k).enumerate() {
                    dx += exi[mi] * c0[mi * res + j] * m as f64;
                    dy += exi[mi] * c1[mi * res + j];
                }
                // Re(i w z) = -w Im(z)
                gx[i * res + j] = -w * dx.im;
                gy[i * res + j] = -w * dy.im;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::RngStream;

    #[test]
    fn sampled_coefficients_are_hermitian() {
        let c = sample_coefficients(3, &mut RngStream::new(1, 0).rng());
        assert_eq!(c.hermitian_defect(), 0.0);
        assert_eq!(c.get(0, 0, 0).im, 0.0);
    }

    #[test]
    fn grid_matches_pointwise() {
        let c = sample_coefficients(4, &mut RngStream::new(2, 0).rng());
        let res = 16;
        let origin = [0.013, 0.27];
        let g = grid_gradients(&c, res, origin);
        for i in [0, 3, 15] {
            for j in [0, 7, 11] {
                let x = origin[0] + i as f64 / res as f64;
                let y = origin[1] + j as f64 / res as f64;
                let jf = jet(&c, 0, x, y);
                let jg = jet(&c, 1, x, y);
                let idx = i * res + j;
                let scale = 1.0 + jf[1].abs() + jf[2].abs() + jg[1].abs() + jg[2].abs();
                assert!((g[0][idx] - jf[1]).abs() < 1e-11 * scale);
                assert!((g[1][idx] - jf[2]).abs() < 1e-11 * scale);
                assert!((g[2][idx] - jg[1]).abs() < 1e-11 * scale);
                assert!((g[3][idx] - jg[2]).abs() < 1e-11 * scale);
            }
        }
    }

    #[test]
    fn flat_round_trip() {
        let c = sample_coefficients(2, &mut RngStream::new(3, 0).rng());
        let back = Coefficients::from_flat(2, &c.to_flat()).unwrap();
        assert_eq!(back, c);
    }
}
