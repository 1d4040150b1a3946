//! Concrete Gaussian random maps `h = (f, g)` and their jet moments.

pub mod bandlimited;
pub mod doughnut;
pub mod moments;

pub use moments::{model_moments, validate_nondegeneracy, JetMoments, NondegeneracyReport};

use nalgebra::Complex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gaussian::{RngStream, SymMatrix};
use bandlimited::Coefficients;

/// Version tag written into every serialized artifact.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum FieldModel {
    BandlimitedTorus {
        k: usize,
    },
    DoughnutProjection {
        big_r: f64,
        small_r: f64,
    },
    /// Moment-level model only; no realizations are sampled.
    IsotropicSphere {
        n: usize,
        c_prime: f64,
        c_double_prime: f64,
    },
}

impl FieldModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::BandlimitedTorus { k: 0 } => Err(Error::InvalidParameter("bandwidth K must be at least 1".into())),
            Self::DoughnutProjection { big_r, small_r } if !(big_r > small_r && small_r > 0.0) => Err(
                Error::InvalidParameter(format!("doughnut needs R > r > 0, got R = {big_r}, r = {small_r}")),
            ),
            Self::IsotropicSphere {
                n,
                c_prime,
                c_double_prime,
            } if n < 2 || !(c_prime > 0.0) || !(c_double_prime > 0.0) => Err(Error::InvalidParameter(format!(
                "sphere needs n >= 2 and C', C'' > 0, got n = {n}, C' = {c_prime}, C'' = {c_double_prime}"
            ))),
            _ => Ok(()),
        }
    }

    /// Dimension of the domain manifold.
    pub fn dim(&self) -> usize {
        match *self {
            Self::IsotropicSphere { n, .. } => n,
            _ => 2,
        }
    }

    pub fn is_stationary(&self) -> bool {
        !matches!(self, Self::DoughnutProjection { .. })
    }

    /// Side length of the periodic chart, where there is one.
    pub fn chart_period(&self) -> Option<f64> {
        match self {
            Self::BandlimitedTorus { .. } => Some(1.0),
            Self::DoughnutProjection { .. } => Some(2.0 * PI),
            Self::IsotropicSphere { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::BandlimitedTorus { .. } => "bandlimited_torus",
            Self::DoughnutProjection { .. } => "doughnut_projection",
            Self::IsotropicSphere { .. } => "isotropic_sphere",
        }
    }
}

/// Values, first and second derivatives of both components at a chart
/// point, together with the metric there.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub point: [f64; 2],
    pub f: f64,
    pub g: f64,
    pub grad_f: [f64; 2],
    pub grad_g: [f64; 2],
    pub hess_f: SymMatrix,
    pub hess_g: SymMatrix,
    pub metric: SymMatrix,
}

impl Jet2 {
    fn from_parts(point: [f64; 2], jf: [f64; 6], jg: [f64; 6], metric: [f64; 3]) -> Self {
        let hess = |j: &[f64; 6]| SymMatrix::from_packed(2, vec![j[3], j[4], j[5]]).expect("2x2");
        Self {
            point,
            f: jf[0],
            g: jg[0],
            grad_f: [jf[1], jf[2]],
            grad_g: [jg[1], jg[2]],
            hess_f: hess(&jf),
            hess_g: hess(&jg),
            metric: SymMatrix::from_packed(2, metric.to_vec()).expect("2x2"),
        }
    }

    /// `det Dh = f_x g_y - f_y g_x`.
    pub fn det_dh(&self) -> f64 {
        self.grad_f[0] * self.grad_g[1] - self.grad_f[1] * self.grad_g[0]
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Data {
    Bandlimited(Coefficients),
    Doughnut([[f64; 3]; 2]),
}

/// A sampled map `h = (f, g)`, immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RealizationDoc", try_from = "RealizationDoc")]
pub struct FieldRealization {
    model: FieldModel,
    data: Data,
    seed: Option<RngStream>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RealizationDoc {
    schema_version: u32,
    model: FieldModel,
    /// Row-major, real and imaginary parts interleaved for complex data.
    coefficients: Vec<f64>,
    seed: Option<RngStream>,
}

impl From<FieldRealization> for RealizationDoc {
    fn from(r: FieldRealization) -> Self {
        let coefficients = match &r.data {
            Data::Bandlimited(c) => c.to_flat(),
            Data::Doughnut(a) => a.iter().flatten().copied().collect(),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            model: r.model,
            coefficients,
            seed: r.seed,
        }
    }
}

impl TryFrom<RealizationDoc> for FieldRealization {
    type Error = Error;

    fn try_from(doc: RealizationDoc) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        doc.model.validate()?;
        let data = match doc.model {
            FieldModel::BandlimitedTorus { k } => {
                let c = Coefficients::from_flat(k, &doc.coefficients)?;
                if c.hermitian_defect() > 0.0 {
                    return Err(Error::InvalidParameter(
                        "coefficients are not Hermitian symmetric".into(),
                    ));
                }
                Data::Bandlimited(c)
            }
            FieldModel::DoughnutProjection { .. } => {
                if doc.coefficients.len() != 6 {
                    return Err(Error::DimensionMismatch {
                        expected: 6,
                        got: doc.coefficients.len(),
                    });
                }
                let a = &doc.coefficients;
                Data::Doughnut([[a[0], a[1], a[2]], [a[3], a[4], a[5]]])
            }
            FieldModel::IsotropicSphere { .. } => {
                return Err(Error::InvalidParameter("the sphere model has no realizations".into()))
            }
        };
        Ok(Self {
            model: doc.model,
            data,
            seed: doc.seed,
        })
    }
}

/// Bandlimited realization with i.i.d. components of bandwidth `k`.
pub fn make_bandlimited(k: usize, stream: RngStream) -> Result<FieldRealization> {
    let model = FieldModel::BandlimitedTorus { k };
    model.validate()?;
    let coeffs = bandlimited::sample_coefficients(k, &mut stream.rng());
    Ok(FieldRealization {
        model,
        data: Data::Bandlimited(coeffs),
        seed: Some(stream),
    })
}

/// `h = A E` with `A` a 2x3 matrix of i.i.d. standard normals.
pub fn make_doughnut(big_r: f64, small_r: f64, stream: RngStream) -> Result<FieldRealization> {
    let model = FieldModel::DoughnutProjection { big_r, small_r };
    model.validate()?;
    let mut rng = stream.rng();
    let mut a = [[0.0; 3]; 2];
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
    }
    Ok(FieldRealization {
        model,
        data: Data::Doughnut(a),
        seed: Some(stream),
    })
}

/// A Fourier mode `(m, n, re, im)`; its mirror is filled in automatically.
pub type Mode = (i64, i64, f64, f64);

impl FieldRealization {
    /// Deterministic bandlimited map from explicit modes.
    pub fn bandlimited_from_modes(k: usize, f_modes: &[Mode], g_modes: &[Mode]) -> Result<Self> {
        let model = FieldModel::BandlimitedTorus { k };
        model.validate()?;
        let mut c = Coefficients::zeros(k);
        for (comp, modes) in [f_modes, g_modes].into_iter().enumerate() {
            for &(m, n, re, im) in modes {
                if m.unsigned_abs() as usize > k || n.unsigned_abs() as usize > k {
                    return Err(Error::InvalidParameter(format!(
                        "mode ({m}, {n}) outside bandwidth {k}"
                    )));
                }
                let a = Complex::new(re, im);
                if m == 0 && n == 0 && im != 0.0 {
                    return Err(Error::InvalidParameter("constant mode must be real".into()));
                }
                c.set_hermitian(comp, m, n, a);
            }
        }
        Ok(Self {
            model,
            data: Data::Bandlimited(c),
            seed: None,
        })
    }

    /// Deterministic doughnut projection with a given matrix.
    pub fn doughnut_from_matrix(big_r: f64, small_r: f64, a: [[f64; 3]; 2]) -> Result<Self> {
        let model = FieldModel::DoughnutProjection { big_r, small_r };
        model.validate()?;
        Ok(Self {
            model,
            data: Data::Doughnut(a),
            seed: None,
        })
    }

    pub fn model(&self) -> FieldModel {
        self.model
    }

    pub fn seed(&self) -> Option<RngStream> {
        self.seed
    }

    /// Side of the periodic chart: 1 for the flat torus, 2 pi for the doughnut.
    pub fn period(&self) -> f64 {
        self.model.chart_period().expect("realizations live on periodic charts")
    }

    /// The same map with `f` and `g` exchanged.
    pub fn swapped(&self) -> Self {
        let data = match &self.data {
            Data::Bandlimited(c) => {
                let half = c.data.len() / 2;
                let mut d = c.clone();
                d.data.rotate_left(half);
                Data::Bandlimited(d)
            }
            Data::Doughnut(a) => Data::Doughnut([a[1], a[0]]),
        };
        Self {
            model: self.model,
            data,
            seed: self.seed,
        }
    }

    pub fn metric_at(&self, point: [f64; 2]) -> [f64; 3] {
        match self.model {
            FieldModel::DoughnutProjection { big_r, small_r } => doughnut::metric(big_r, small_r, point[1]),
            _ => [1.0, 0.0, 1.0],
        }
    }

    /// Jets of both components in the order `[v, v_x, v_y, v_xx, v_xy, v_yy]`.
    pub fn raw_jet(&self, point: [f64; 2]) -> ([f64; 6], [f64; 6]) {
        match (&self.data, self.model) {
            (Data::Bandlimited(c), _) => (
                bandlimited::jet(c, 0, point[0], point[1]),
                bandlimited::jet(c, 1, point[0], point[1]),
            ),
            (Data::Doughnut(a), FieldModel::DoughnutProjection { big_r, small_r }) => (
                doughnut::jet(&a[0], big_r, small_r, point[0], point[1]),
                doughnut::jet(&a[1], big_r, small_r, point[0], point[1]),
            ),
            _ => unreachable!("data matches model"),
        }
    }

    pub fn eval_jet(&self, point: [f64; 2]) -> Jet2 {
        let (jf, jg) = self.raw_jet(point);
        Jet2::from_parts(point, jf, jg, self.metric_at(point))
    }

    /// `h(point)`.
    pub fn value(&self, point: [f64; 2]) -> [f64; 2] {
        let (jf, jg) = self.raw_jet(point);
        [jf[0], jg[0]]
    }

    /// Full complex value of a component before taking the real part. For
    /// the doughnut the imaginary part is identically zero.
    pub fn value_complex(&self, comp: usize, point: [f64; 2]) -> Complex<f64> {
        match &self.data {
            Data::Bandlimited(c) => bandlimited::value_complex(c, comp, point[0], point[1]),
            Data::Doughnut(_) => {
                let v = self.value(point);
                Complex::new(v[comp], 0.0)
            }
        }
    }

    /// Gradients `[f_x, f_y, g_x, g_y]` at the nodes
    /// `origin + (i, j) * period / res`, stored at `i * res + j`.
    pub fn grid_gradients(&self, res: usize, origin: [f64; 2]) -> [Vec<f64>; 4] {
        match &self.data {
            Data::Bandlimited(c) => bandlimited::grid_gradients(c, res, origin),
            Data::Doughnut(_) => {
                let h = self.period() / res as f64;
                let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; res * res]);
                for i in 0..res {
                    for j in 0..res {
                        let p = [origin[0] + i as f64 * h, origin[1] + j as f64 * h];
                        let (jf, jg) = self.raw_jet(p);
                        let idx = i * res + j;
                        out[0][idx] = jf[1];
                        out[1][idx] = jf[2];
                        out[2][idx] = jg[1];
                        out[3][idx] = jg[2];
                    }
                }
                out
            }
        }
    }
}
