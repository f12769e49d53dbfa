//! Reference solutions and errors in the mean-square norm
//! `‖v‖² = Σ_q w_q ‖v(z_q)‖²_{L²}`.

use rayon::prelude::*;

use crate::coeffs::{CoefficientField, InitialDatum, SpatialProfile, ZFactor};
use crate::error::{Error, Result};
use crate::linalg::SymSparseMatrix;
use crate::pce::{DistributionSpec, MultiIndexSet, TensorRule};
use crate::sgsystem::SgState;
use crate::spatial::FeSpace;
use crate::timestep::{evolve_final, RationalScheme, TimeGrid};

/// Exact solution for `a(z)` constant in `x` and sine-series data:
/// `u = p(z) Σ_j c_j e^{-a(z) π² |j|² t} Π sin(j_i π x_i)`.
#[derive(Debug, Clone)]
pub struct AnalyticSolution {
    factor: ZFactor,
    u0: InitialDatum,
}

impl AnalyticSolution {
    pub fn new(factor: ZFactor, profile: SpatialProfile, u0: InitialDatum) -> Result<Self> {
        if profile != SpatialProfile::Identity {
            return Err(Error::Config(
                "analytic reference needs a coefficient that is constant in x".into(),
            ));
        }
        Ok(Self { factor, u0 })
    }

    pub fn eval(&self, t: f64, z: &[f64], x: &[f64]) -> f64 {
        let a = self.factor.eval(z);
        let pi2 = std::f64::consts::PI.powi(2);
        let s: f64 = self
            .u0
            .sine_modes
            .iter()
            .map(|m| {
                let mut k2 = 0.0;
                let mut prod = 1.0;
                for (i, &xi) in x.iter().enumerate() {
                    let k = m.freq.get(i).copied().unwrap_or(1) as f64;
                    k2 += k * k;
                    prod *= (k * std::f64::consts::PI * xi).sin();
                }
                m.coeff * (-a * pi2 * k2 * t).exp() * prod
            })
            .sum();
        self.u0.eval_z(z) * s
    }
}

/// `(Σ_q w_q ‖u_h(z_q) - u(t, z_q)‖²)^{1/2}` for a chaos state on `space`.
pub fn analytic_error(
    dist: &DistributionSpec,
    mis: &MultiIndexSet,
    state: &SgState,
    space: &FeSpace,
    exact: &AnalyticSolution,
    rule: &TensorRule,
) -> f64 {
    let t = state.time;
    let parts: Vec<f64> = rule
        .points
        .par_iter()
        .zip(&rule.weights)
        .map(|(z, w)| {
            let uh = state.reconstruct(dist, mis, z);
            let e = space.l2_error(&uh, |x| exact.eval(t, z, x));
            w * e * e
        })
        .collect();
    parts.iter().sum::<f64>().sqrt()
}

/// Fine deterministic solutions at the nodes of a tensor Gauss rule.
#[derive(Debug, Clone)]
pub struct CollocationReference {
    pub space: FeSpace,
    pub mass: SymSparseMatrix,
    pub rule: TensorRule,
    pub samples: Vec<Vec<f64>>,
    pub time: f64,
}

/// Crank–Nicolson on `grid` at every node of the `q_ref`-point rule.
pub fn collocation_reference<F: CoefficientField + ?Sized>(
    dist: &DistributionSpec,
    q_ref: usize,
    space: &FeSpace,
    grid: &TimeGrid,
    field: &F,
    u0: &InitialDatum,
) -> Result<CollocationReference> {
    let rule = dist.tensor_rule(q_ref)?;
    let mass = space.assemble_mass();
    let profile = space.l2_project(|x| u0.eval_x(x))?;
    let samples = rule
        .points
        .par_iter()
        .enumerate()
        .map(|(node, z)| {
            let run = || -> Result<Vec<f64>> {
                let c = u0.eval_z(z);
                let start: Vec<f64> = profile.iter().map(|p| c * p).collect();
                let k = space.assemble_stiffness(|x| field.eval(z, x))?;
                evolve_final(RationalScheme::CrankNicolson, grid, &mass, &k, &start)
            };
            run().map_err(|e| Error::NodeFailure {
                node,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CollocationReference {
        space: space.clone(),
        mass,
        rule,
        samples,
        time: grid.t_bar(),
    })
}

impl CollocationReference {
    /// Mean-square distance to node values `approx[q]` given on `space`,
    /// prolongated to the reference mesh.
    pub fn error_of_samples(&self, space: &FeSpace, approx: &[Vec<f64>]) -> Result<f64> {
        if approx.len() != self.samples.len() {
            return Err(Error::DimensionMismatch {
                expected: self.samples.len(),
                got: approx.len(),
            });
        }
        let parts = approx
            .par_iter()
            .zip(&self.samples)
            .zip(&self.rule.weights)
            .map(|((a, r), w)| {
                let fine = self.space.prolongate_from(space, a)?;
                let diff: Vec<f64> = fine.iter().zip(r).map(|(p, q)| p - q).collect();
                Ok(w * self.mass.bilinear(&diff, &diff).max(0.0))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(parts.iter().sum::<f64>().sqrt())
    }

    /// `error_norm_H` of a chaos state against this reference.
    pub fn error(&self, dist: &DistributionSpec, mis: &MultiIndexSet, state: &SgState, space: &FeSpace) -> Result<f64> {
        let approx: Vec<Vec<f64>> = self
            .rule
            .points
            .iter()
            .map(|z| state.reconstruct(dist, mis, z))
            .collect();
        self.error_of_samples(space, &approx)
    }

    /// Mean-square norm of the reference itself.
    pub fn norm(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.rule.weights)
            .map(|(s, w)| w * self.mass.bilinear(s, s))
            .sum::<f64>()
            .sqrt()
    }
}
