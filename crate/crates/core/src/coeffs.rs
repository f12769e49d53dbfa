//! Random coefficient fields `M_z(x)` and initial data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pce::DistributionSpec;
use crate::poly::PolyCoeffs;
use crate::spatial::{scalar_tensor, Tensor2};

/// Diffusion coefficient depending on a random parameter `z` and a spatial
/// point `x`. Scalar fields in 1D use entry `[0][0]` of the returned tensor.
pub trait CoefficientField: Send + Sync {
    fn spatial_dim(&self) -> usize;

    fn eval(&self, z: &[f64], x: &[f64]) -> Tensor2;

    /// Declared ellipticity bounds `(κ, K)`; `None` when the field is not
    /// uniformly elliptic.
    fn bounds(&self) -> Option<(f64, f64)>;

    /// `∂_z^α M_z(x)` if available.
    fn z_derivative(&self, _alpha: &[usize], _z: &[f64], _x: &[f64]) -> Option<Tensor2> {
        None
    }

    /// Total polynomial degree in `z`, when the field is polynomial in `z`.
    fn z_degree(&self) -> Option<usize> {
        None
    }
}

/// Scalar random factor `f(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZFactor {
    Constant { value: f64 },
    /// `offset + slope · z_component`
    Affine {
        offset: f64,
        slope: f64,
        #[serde(default)]
        component: usize,
    },
    /// `1/(1 + e^{-z_component}) + 1`
    Logistic {
        #[serde(default)]
        component: usize,
    },
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Polynomials `P_k` with `d^k σ / dt^k = P_k(σ)`, `k = 1..=order`.
fn logistic_derivative_polys(order: usize) -> Vec<PolyCoeffs> {
    let s_one_minus_s = PolyCoeffs::new(vec![0.0, 1.0, -1.0]);
    let mut out = vec![PolyCoeffs::new(vec![0.0, 1.0])];
    for _ in 0..order {
        let next = &out.last().unwrap().derivative() * &s_one_minus_s;
        out.push(next);
    }
    out
}

impl ZFactor {
    pub fn component(&self) -> Option<usize> {
        match self {
            ZFactor::Constant { .. } => None,
            ZFactor::Affine { component, .. } | ZFactor::Logistic { component } => Some(*component),
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match *self {
            ZFactor::Constant { value } => value,
            ZFactor::Affine { offset, slope, component } => offset + slope * z[component],
            ZFactor::Logistic { component } => sigmoid(z[component]) + 1.0,
        }
    }

    /// `k`-th derivative with respect to the active component.
    pub fn derivative(&self, k: usize, z: &[f64]) -> f64 {
        if k == 0 {
            return self.eval(z);
        }
        match *self {
            ZFactor::Constant { .. } => 0.0,
            ZFactor::Affine { slope, .. } => {
                if k == 1 {
                    slope
                } else {
                    0.0
                }
            }
            ZFactor::Logistic { component } => {
                let polys = logistic_derivative_polys(k);
                polys[k].eval(sigmoid(z[component]))
            }
        }
    }

    /// `∂_z^α f` for a multi-index `α`.
    pub fn partial(&self, alpha: &[usize], z: &[f64]) -> f64 {
        let order: usize = alpha.iter().sum();
        match self.component() {
            None => {
                if order == 0 {
                    self.eval(z)
                } else {
                    0.0
                }
            }
            Some(c) => {
                if alpha.get(c).copied().unwrap_or(0) != order {
                    0.0
                } else {
                    self.derivative(order, z)
                }
            }
        }
    }

    pub fn z_degree(&self) -> Option<usize> {
        match self {
            ZFactor::Constant { .. } => Some(0),
            ZFactor::Affine { slope, .. } => Some(usize::from(*slope != 0.0)),
            ZFactor::Logistic { .. } => None,
        }
    }

    /// Infimum and supremum over the support of `dist` (possibly infinite).
    pub fn range(&self, dist: &DistributionSpec) -> (f64, f64) {
        match *self {
            ZFactor::Constant { value } => (value, value),
            ZFactor::Affine { offset, slope, component } => {
                let (lo, hi) = dist.components()[component].support();
                let a = offset + slope * lo;
                let b = offset + slope * hi;
                let fix = |v: f64| if v.is_nan() { offset } else { v };
                let (a, b) = (fix(a), fix(b));
                (a.min(b), a.max(b))
            }
            ZFactor::Logistic { .. } => (1.0, 2.0),
        }
    }

    fn validate(&self, dist: &DistributionSpec) -> Result<()> {
        if let Some(c) = self.component() {
            if c >= dist.dim() {
                return Err(Error::InvalidParameter(format!(
                    "factor uses component {c} of a {}-dimensional parameter",
                    dist.dim()
                )));
            }
        }
        Ok(())
    }
}

/// Deterministic spatial profile `g(x)`, a diagonal tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialProfile {
    /// `g ≡ I`
    Identity,
    /// `(1 + |x|²) I`
    Quadratic,
    /// `diag(1 + |x|², 3 - |x|²)`; the first entry alone in 1D.
    AnisotropicQuadratic,
}

impl SpatialProfile {
    pub fn eval(&self, x: &[f64]) -> Tensor2 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            SpatialProfile::Identity => scalar_tensor(1.0),
            SpatialProfile::Quadratic => scalar_tensor(1.0 + r2),
            SpatialProfile::AnisotropicQuadratic => [[1.0 + r2, 0.0], [0.0, 3.0 - r2]],
        }
    }

    /// Eigenvalue range over the closed unit interval or square.
    pub fn range(&self, dim: usize) -> (f64, f64) {
        let r2_max = dim as f64;
        match self {
            SpatialProfile::Identity => (1.0, 1.0),
            SpatialProfile::Quadratic => (1.0, 1.0 + r2_max),
            SpatialProfile::AnisotropicQuadratic => {
                if dim == 1 {
                    (1.0, 2.0)
                } else {
                    (1.0, 3.0)
                }
            }
        }
    }
}

/// `M_z(x) = f(z) · g(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableField {
    factor: ZFactor,
    profile: SpatialProfile,
    spatial_dim: usize,
    bounds: Option<(f64, f64)>,
}

/// Builds `f(z)·g(x)`, rejecting factors whose infimum over a bounded range
/// is nonpositive. Factors unbounded on the support are accepted but flagged
/// as not uniformly elliptic (`bounds() == None`).
pub fn builtin_separable(
    factor: ZFactor,
    profile: SpatialProfile,
    dist: &DistributionSpec,
    spatial_dim: usize,
) -> Result<SeparableField> {
    factor.validate(dist)?;
    if !(spatial_dim == 1 || spatial_dim == 2) {
        return Err(Error::InvalidParameter(format!("spatial dimension {spatial_dim}")));
    }
    let (f_lo, f_hi) = factor.range(dist);
    let (g_lo, g_hi) = profile.range(spatial_dim);
    let bounds = if f_lo.is_finite() && f_hi.is_finite() {
        if f_lo <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "random factor has nonpositive infimum {f_lo}"
            )));
        }
        Some((f_lo * g_lo, f_hi * g_hi))
    } else {
        None
    };
    Ok(SeparableField {
        factor,
        profile,
        spatial_dim,
        bounds,
    })
}

impl SeparableField {
    pub fn factor(&self) -> &ZFactor {
        &self.factor
    }

    pub fn profile(&self) -> SpatialProfile {
        self.profile
    }

    /// Overrides the declared bounds.
    pub fn with_bounds(mut self, kappa: f64, big_k: f64) -> Self {
        self.bounds = Some((kappa, big_k));
        self
    }

    pub fn is_elliptic(&self) -> bool {
        self.bounds.is_some()
    }
}

impl CoefficientField for SeparableField {
    fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    fn eval(&self, z: &[f64], x: &[f64]) -> Tensor2 {
        let f = self.factor.eval(z);
        let g = self.profile.eval(x);
        [[f * g[0][0], f * g[0][1]], [f * g[1][0], f * g[1][1]]]
    }

    fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    fn z_derivative(&self, alpha: &[usize], z: &[f64], x: &[f64]) -> Option<Tensor2> {
        let d = self.factor.partial(alpha, z);
        let g = self.profile.eval(x);
        Some([[d * g[0][0], d * g[0][1]], [d * g[1][0], d * g[1][1]]])
    }

    fn z_degree(&self) -> Option<usize> {
        self.factor.z_degree()
    }
}

/// Eigenvalues of the symmetric part of `t`, ascending; scalar in 1D.
pub fn tensor_eigenvalues(t: &Tensor2, dim: usize) -> Vec<f64> {
    if dim == 1 {
        return vec![t[0][0]];
    }
    let off = 0.5 * (t[0][1] + t[1][0]);
    let mean = 0.5 * (t[0][0] + t[1][1]);
    let rad = (0.25 * (t[0][0] - t[1][1]).powi(2) + off * off).sqrt();
    vec![mean - rad, mean + rad]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsViolation {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub declared: Option<(f64, f64)>,
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub violations: Vec<BoundsViolation>,
}

impl BoundsReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `field` on `z_samples × x_samples` and lists points where the
/// eigenvalues leave `[κ - 1e-10, K + 1e-10]` or the 2D tensor is not
/// symmetric. Fields without declared bounds are only checked for symmetry.
pub fn eval_bounds_check<F: CoefficientField + ?Sized>(
    field: &F,
    z_samples: &[Vec<f64>],
    x_samples: &[Vec<f64>],
) -> BoundsReport {
    let dim = field.spatial_dim();
    let declared = field.bounds();
    let mut report = BoundsReport {
        declared,
        samples: 0,
        min_eigenvalue: f64::INFINITY,
        max_eigenvalue: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for z in z_samples {
        for x in x_samples {
            let t = field.eval(z, x);
            let eig = tensor_eigenvalues(&t, dim);
            let asymmetry = if dim == 2 { (t[0][1] - t[1][0]).abs() } else { 0.0 };
            report.samples += 1;
            report.min_eigenvalue = report.min_eigenvalue.min(eig[0]);
            report.max_eigenvalue = report.max_eigenvalue.max(*eig.last().unwrap());
            let out_of_range = declared.is_some_and(|(lo, hi)| {
                eig.iter().any(|&e| !(e >= lo - 1e-10 && e <= hi + 1e-10))
            });
            if out_of_range || asymmetry > 0.0 {
                report.violations.push(BoundsViolation {
                    z: z.clone(),
                    x: x.clone(),
                    eigenvalues: eig,
                    asymmetry,
                });
            }
        }
    }
    report
}

/// Monomial term `coeff · Π_j z_j^{powers_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZMonomial {
    pub powers: Vec<usize>,
    pub coeff: f64,
}

/// Sine mode `coeff · Π_i sin(freq_i π x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineMode {
    pub freq: Vec<usize>,
    pub coeff: f64,
}

fn default_z_terms() -> Vec<ZMonomial> {
    vec![ZMonomial {
        powers: Vec::new(),
        coeff: 1.0,
    }]
}

fn default_sine() -> Vec<SineMode> {
    vec![SineMode {
        freq: vec![1, 1],
        coeff: 1.0,
    }]
}

/// Initial datum `u0(z, x) = p(z) · s(x)` with `p` a polynomial and `s` a
/// finite sine series (vanishing on the boundary).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    #[serde(default = "default_z_terms")]
    pub z_terms: Vec<ZMonomial>,
    #[serde(default = "default_sine")]
    pub sine_modes: Vec<SineMode>,
    /// Declared regularity class, reported but not verified.
    #[serde(default)]
    pub regularity: Option<String>,
}

impl Default for InitialDatum {
    fn default() -> Self {
        Self {
            z_terms: default_z_terms(),
            sine_modes: default_sine(),
            regularity: None,
        }
    }
}

impl InitialDatum {
    /// Deterministic `sin(πx)` (or `sin(πx)sin(πy)`).
    pub fn sine() -> Self {
        Self::default()
    }

    pub fn with_z_terms(mut self, terms: Vec<(Vec<usize>, f64)>) -> Self {
        self.z_terms = terms
            .into_iter()
            .map(|(powers, coeff)| ZMonomial { powers, coeff })
            .collect();
        self
    }

    pub fn zero() -> Self {
        Self {
            z_terms: Vec::new(),
            sine_modes: Vec::new(),
            regularity: None,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.z_terms.iter().all(|t| t.powers.iter().all(|&p| p == 0))
    }

    pub fn z_degree(&self) -> usize {
        self.z_terms
            .iter()
            .map(|t| t.powers.iter().sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval_z(&self, z: &[f64]) -> f64 {
        self.z_terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.powers
                        .iter()
                        .enumerate()
                        .map(|(j, &p)| z.get(j).copied().unwrap_or(0.0).powi(p as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn eval_x(&self, x: &[f64]) -> f64 {
        self.sine_modes
            .iter()
            .map(|m| {
                m.coeff
                    * x.iter()
                        .enumerate()
                        .map(|(i, &xi)| {
                            let k = m.freq.get(i).copied().unwrap_or(1) as f64;
                            (k * std::f64::consts::PI * xi).sin()
                        })
                        .product::<f64>()
            })
            .sum()
    }

    pub fn eval(&self, z: &[f64], x: &[f64]) -> f64 {
        self.eval_z(z) * self.eval_x(x)
    }
}
