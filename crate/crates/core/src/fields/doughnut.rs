//! Random planar projections of the torus of revolution
//! `E(phi, rho) = ((R + r sin rho) cos phi, (R + r sin rho) sin phi, r cos rho)`.

/// `[E, E_phi, E_rho, E_phiphi, E_phirho, E_rhorho]`, each a point of R^3.
pub fn embedding_jet(big_r: f64, r: f64, phi: f64, rho: f64) -> [[f64; 3]; 6] {
    let (sp, cp) = phi.sin_cos();
    let (sr, cr) = rho.sin_cos();
    let w = big_r + r * sr;
    [
        [w * cp, w * sp, r * cr],
        [-w * sp, w * cp, 0.0],
        [r * cr * cp, r * cr * sp, -r * sr],
        [-w * cp, -w * sp, 0.0],
        [-r * cr * sp, r * cr * cp, 0.0],
        [-r * sr * cp, -r * sr * sp, -r * cr],
    ]
}

/// Induced metric `diag((R + r sin rho)^2, r^2)`, packed.
pub fn metric(big_r: f64, r: f64, rho: f64) -> [f64; 3] {
    let w = big_r + r * rho.sin();
    [w * w, 0.0, r * r]
}

/// Jet of `v . E` in the order `[f, f_phi, f_rho, f_phiphi, f_phirho, f_rhorho]`.
pub fn jet(v: &[f64; 3], big_r: f64, r: f64, phi: f64, rho: f64) -> [f64; 6] {
    let e = embedding_jet(big_r, r, phi, rho);
    std::array::from_fn(|i| e[i][0] * v[0] + e[i][1] * v[1] + e[i][2] * v[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let (big_r, r) = (1.3, 0.4);
        let h = 1e-6;
        for (phi, rho) in [(0.3, 1.1), (2.0, -0.7), (5.5, 3.0)] {
            let e = embedding_jet(big_r, r, phi, rho);
            let ep = embedding_jet(big_r, r, phi + h, rho);
            let em = embedding_jet(big_r, r, phi - h, rho);
            let erp = embedding_jet(big_r, r, phi, rho + h);
            let erm = embedding_jet(big_r, r, phi, rho - h);
            for c in 0..3 {
                assert!(((ep[0][c] - em[0][c]) / (2.0 * h) - e[1][c]).abs() < 1e-8);
                assert!(((erp[0][c] - erm[0][c]) / (2.0 * h) - e[2][c]).abs() < 1e-8);
                assert!(((ep[1][c] - em[1][c]) / (2.0 * h) - e[3][c]).abs() < 1e-8);
                assert!(((erp[1][c] - erm[1][c]) / (2.0 * h) - e[4][c]).abs() < 1e-8);
                assert!(((erp[2][c] - erm[2][c]) / (2.0 * h) - e[5][c]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn metric_is_gram_of_tangents() {
        let e = embedding_jet(2.0, 0.5, 0.8, 0.3);
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let g = metric(2.0, 0.5, 0.3);
        assert!((dot(&e[1], &e[1]) - g[0]).abs() < 1e-12);
        assert!(dot(&e[1], &e[2]).abs() < 1e-12);
        assert!((dot(&e[2], &e[2]) - g[2]).abs() < 1e-12);
    }
}
