//! The coupled deterministic block system of the stochastic Galerkin method.
//!
//! Unknowns are stored interleaved: spatial dof `i`, mode `β` sits at global
//! index `i·d + β`, so the block operator keeps the banded structure of the
//! spatial matrices.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientField, InitialDatum};
use crate::error::{Error, Result};
use crate::linalg::{SymBuilder, SymSparseMatrix};
use crate::pce::{pce_project, tensor_basis_eval, DistributionSpec, MultiIndexSet, TripleProductTensor};
use crate::spatial::FeSpace;

/// Largest `d_n · dof` the dense brute-force construction accepts.
pub const BRUTE_FORCE_LIMIT: usize = 2000;

/// Chaos coefficients `Â_α = Σ_q w_q Φ_α(z_q) K(z_q)` of the stiffness
/// matrix for `|α| ≤ 2n`.
#[derive(Debug, Clone)]
pub struct CoefficientMatrices {
    pub n: usize,
    pub mis: MultiIndexSet,
    pub mats: Vec<SymSparseMatrix>,
    /// `max |Â_α|` over `2n < |α| ≤ 2n + 2`, relative to `max |Â_0|`.
    pub aliasing_probe: f64,
    pub nodes_per_dim: usize,
}

impl CoefficientMatrices {
    pub fn get(&self, alpha: &[usize]) -> Option<&SymSparseMatrix> {
        self.mis.position(alpha).map(|p| &self.mats[p])
    }
}

/// Smallest admissible number of nodes per dimension.
pub fn min_quadrature_nodes<F: CoefficientField + ?Sized>(n: usize, field: &F) -> usize {
    2 * n + 1 + field.z_degree().unwrap_or(0)
}

/// Stiffness matrices at every node of a `q`-point tensor rule, in rule order.
pub fn stiffness_at_nodes<F: CoefficientField + ?Sized>(
    space: &FeSpace,
    field: &F,
    points: &[Vec<f64>],
) -> Result<Vec<SymSparseMatrix>> {
    points
        .par_iter()
        .map(|z| space.assemble_stiffness(|x| field.eval(z, x)))
        .collect()
}

pub fn pce_coefficient_matrices<F: CoefficientField + ?Sized>(
    dist: &DistributionSpec,
    n: usize,
    space: &FeSpace,
    field: &F,
    q: usize,
) -> Result<CoefficientMatrices> {
    let need = min_quadrature_nodes(n, field);
    if q < need {
        return Err(Error::InvalidParameter(format!(
            "coefficient expansion of order {} needs at least {need} nodes per dimension, got {q}",
            2 * n
        )));
    }
    if field.spatial_dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: field.spatial_dim(),
        });
    }
    let mis = MultiIndexSet::new(dist.dim(), 2 * n)?;
    let probe = MultiIndexSet::new(dist.dim(), 2 * n + 2)?;
    let rule = dist.tensor_rule(q)?;
    let stiff = stiffness_at_nodes(space, field, &rule.points)?;
    let template = &stiff[0];
    debug_assert!(stiff.iter().all(|k| k.same_pattern(template)));
    let phi: Vec<Vec<f64>> = rule
        .points
        .iter()
        .map(|z| tensor_basis_eval(dist, &probe, z))
        .collect();
    let nnz = template.nnz_upper();
    let combine = |a: usize| -> Vec<f64> {
        let mut vals = vec![0.0; nnz];
        for ((k, p), w) in stiff.iter().zip(&phi).zip(&rule.weights) {
            let c = w * p[a];
            for (v, s) in vals.iter_mut().zip(k.values()) {
                *v += c * s;
            }
        }
        vals
    };
    let all: Vec<Vec<f64>> = (0..probe.len()).into_par_iter().map(combine).collect();
    let scale = all[0].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let aliasing_probe = all[mis.len()..]
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        / scale;
    let mats = all
        .into_iter()
        .take(mis.len())
        .map(|v| template.with_values(v))
        .collect();
    Ok(CoefficientMatrices {
        n,
        mis,
        mats,
        aliasing_probe,
        nodes_per_dim: q,
    })
}

/// Range of `|α|` entering the blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// `|α| ≤ 2n`, the full Galerkin projection.
    #[default]
    Full,
    /// `|α| ≤ n`; experimental.
    Inner,
}

/// Assembled block stiffness `𝔄_n` and block mass `I ⊗ M`.
#[derive(Debug, Clone)]
pub struct SgOperator {
    n: usize,
    mis: MultiIndexSet,
    ndof: usize,
    stiffness: SymSparseMatrix,
    mass: SymSparseMatrix,
}

pub fn assemble_block_operator(
    coeff_mats: &CoefficientMatrices,
    eps: &TripleProductTensor,
    mass: &SymSparseMatrix,
    truncation: Truncation,
) -> Result<SgOperator> {
    let n = eps.order();
    if coeff_mats.mis.dim() != eps.outer().dim() || coeff_mats.mis.order() < 2 * n {
        let alpha = vec![0; eps.outer().dim()];
        let missing = eps
            .outer()
            .indices()
            .iter()
            .find(|a| coeff_mats.mis.position(a).is_none())
            .cloned()
            .unwrap_or(alpha);
        return Err(Error::MissingCoefficient(missing));
    }
    let ndof = mass.dim();
    let template = &coeff_mats.mats[0];
    if template.dim() != ndof {
        return Err(Error::DimensionMismatch {
            expected: ndof,
            got: template.dim(),
        });
    }
    let max_alpha = match truncation {
        Truncation::Full => 2 * n,
        Truncation::Inner => n,
    };
    let inner = eps.inner();
    let d = inner.len();
    // ε positions refer to eps.outer(); coefficient matrices may use a larger set
    let mat_of: Vec<Option<&SymSparseMatrix>> = eps
        .outer()
        .indices()
        .iter()
        .map(|a| {
            let deg: usize = a.iter().sum();
            if deg <= max_alpha {
                coeff_mats.get(a)
            } else {
                None
            }
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|b| (b..d).map(move |c| (b, c))).collect();
    let blocks: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(b, c)| {
            let mut vals = vec![0.0; template.nnz_upper()];
            for &(a, e) in eps.pair(b, c) {
                if let Some(m) = mat_of[a] {
                    for (v, s) in vals.iter_mut().zip(m.values()) {
                        *v += e * s;
                    }
                }
            }
            vals
        })
        .collect();
    let mut builder = SymBuilder::new(ndof * d);
    let entries: Vec<(usize, usize)> = template.upper_entries().map(|(i, j, _)| (i, j)).collect();
    for (&(b, c), vals) in pairs.iter().zip(&blocks) {
        for (&(i, j), &v) in entries.iter().zip(vals) {
            builder.add(i * d + b, j * d + c, v);
            if b != c && i != j {
                builder.add(j * d + b, i * d + c, v);
            }
        }
    }
    Ok(SgOperator {
        n,
        mis: inner.clone(),
        ndof,
        stiffness: builder.build(),
        mass: mass.kron_identity(d),
    })
}

impl SgOperator {
    /// Coefficient expansion, triple products and block assembly in one go.
    pub fn build<F: CoefficientField + ?Sized>(
        dist: &DistributionSpec,
        n: usize,
        space: &FeSpace,
        field: &F,
        q: usize,
        truncation: Truncation,
    ) -> Result<(Self, CoefficientMatrices)> {
        let mats = pce_coefficient_matrices(dist, n, space, field, q)?;
        let eps = TripleProductTensor::new(dist, n)?;
        let op = assemble_block_operator(&mats, &eps, &space.assemble_mass(), truncation)?;
        Ok((op, mats))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mis(&self) -> &MultiIndexSet {
        &self.mis
    }

    pub fn modes(&self) -> usize {
        self.mis.len()
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn dim(&self) -> usize {
        self.ndof * self.modes()
    }

    pub fn stiffness(&self) -> &SymSparseMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &SymSparseMatrix {
        &self.mass
    }

    /// Dense copy of block `(β, γ)`.
    pub fn block_dense(&self, beta: usize, gamma: usize) -> DMatrix<f64> {
        let d = self.modes();
        DMatrix::from_fn(self.ndof, self.ndof, |i, j| {
            self.stiffness.get(i * d + beta, j * d + gamma)
        })
    }

    /// Coordinate export of the block stiffness preceded by a layout header.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# block layout: index = dof * {} + mode, dofs = {}, modes = {}",
            self.modes(),
            self.ndof,
            self.modes()
        );
        out.push_str(&self.stiffness.to_coordinate_text());
        out
    }
}

/// Mode coefficients `𝔲_n(t)`: `coefficients[β]` is the spatial vector of
/// mode `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgState {
    pub time: f64,
    pub coefficients: Vec<Vec<f64>>,
}

impl SgState {
    pub fn zeros(modes: usize, ndof: usize) -> Self {
        Self {
            time: 0.0,
            coefficients: vec![vec![0.0; ndof]; modes],
        }
    }

    pub fn modes(&self) -> usize {
        self.coefficients.len()
    }

    pub fn ndof(&self) -> usize {
        self.coefficients.first().map_or(0, Vec::len)
    }

    pub fn to_global(&self) -> Vec<f64> {
        let d = self.modes();
        let mut out = vec![0.0; d * self.ndof()];
        for (b, mode) in self.coefficients.iter().enumerate() {
            for (i, v) in mode.iter().enumerate() {
                out[i * d + b] = *v;
            }
        }
        out
    }

    pub fn from_global(time: f64, modes: usize, global: &[f64]) -> Result<Self> {
        if modes == 0 || global.len() % modes != 0 {
            return Err(Error::DimensionMismatch {
                expected: modes,
                got: global.len(),
            });
        }
        let ndof = global.len() / modes;
        let coefficients = (0..modes)
            .map(|b| (0..ndof).map(|i| global[i * modes + b]).collect())
            .collect();
        Ok(Self { time, coefficients })
    }

    /// Spatial vector `Σ_β Φ_β(z) u_β`.
    pub fn reconstruct(&self, dist: &DistributionSpec, mis: &MultiIndexSet, z: &[f64]) -> Vec<f64> {
        let phi = tensor_basis_eval(dist, mis, z);
        let mut out = vec![0.0; self.ndof()];
        for (mode, p) in self.coefficients.iter().zip(&phi) {
            for (o, v) in out.iter_mut().zip(mode) {
                *o += p * v;
            }
        }
        out
    }

    /// `(uᵀ (I ⊗ M) u)^{1/2}`.
    pub fn mass_norm(&self, mass: &SymSparseMatrix) -> f64 {
        self.coefficients
            .iter()
            .map(|u| mass.bilinear(u, u))
            .sum::<f64>()
            .sqrt()
    }
}

/// Mode `α` = `P_m ⟨u0, Φ_α⟩`. The datum is separable, so the chaos
/// coefficients of its `z` factor scale one projected spatial profile.
pub fn initial_coefficients(
    dist: &DistributionSpec,
    mis: &MultiIndexSet,
    u0: &InitialDatum,
    space: &FeSpace,
    q: usize,
) -> Result<SgState> {
    let q_eff = q.max((mis.order() + u0.z_degree()) / 2 + 1);
    let zc = pce_project(dist, mis, |z| vec![u0.eval_z(z)], q_eff)?;
    let profile = space.l2_project(|x| u0.eval_x(x))?;
    let coefficients = zc
        .modes
        .iter()
        .map(|c| profile.iter().map(|p| c[0] * p).collect())
        .collect();
    Ok(SgState {
        time: 0.0,
        coefficients,
    })
}

/// Dense oracle for `𝔄_n`: the collocation representation of `R_n A R_n`
/// restricted to the chaos basis, in weak form and interleaved layout.
///
/// With `E` evaluating chaos coefficients at the `q`-point nodes, `P` the
/// discrete projection back onto the modes and `A = diag(M⁻¹ K(z_q))`, the
/// result is `(I ⊗ M) P A E`.
pub fn brute_force_rnarn<F: CoefficientField + ?Sized>(
    dist: &DistributionSpec,
    n: usize,
    space: &FeSpace,
    field: &F,
    q: usize,
) -> Result<DMatrix<f64>> {
    let mis = MultiIndexSet::new(dist.dim(), n)?;
    let d = mis.len();
    let ndof = space.ndof();
    if d * ndof > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!(
            "brute-force operator of size {} exceeds {BRUTE_FORCE_LIMIT}",
            d * ndof
        )));
    }
    let rule = dist.tensor_rule(q)?;
    let nq = rule.len();
    if nq * ndof > 4 * BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!(
            "collocation space of size {} exceeds {}",
            nq * ndof,
            4 * BRUTE_FORCE_LIMIT
        )));
    }
    let mass = space.assemble_mass().to_dense();
    let mass_chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?;
    let stiff = stiffness_at_nodes(space, field, &rule.points)?;
    let phi: Vec<Vec<f64>> = rule.points.iter().map(|z| tensor_basis_eval(dist, &mis, z)).collect();

    // node-side index: i·nq + q
    let mut e = DMatrix::zeros(nq * ndof, d * ndof);
    let mut p = DMatrix::zeros(d * ndof, nq * ndof);
    for (k, ph) in phi.iter().enumerate() {
        for i in 0..ndof {
            for b in 0..d {
                e[(i * nq + k, i * d + b)] = ph[b];
                p[(i * d + b, i * nq + k)] = rule.weights[k] * ph[b];
            }
        }
    }
    let mut a = DMatrix::zeros(nq * ndof, nq * ndof);
    for (k, km) in stiff.iter().enumerate() {
        let block = mass_chol.solve(&km.to_dense());
        for i in 0..ndof {
            for j in 0..ndof {
                a[(i * nq + k, j * nq + k)] = block[(i, j)];
            }
        }
    }
    let mut big_mass = DMatrix::zeros(d * ndof, d * ndof);
    for i in 0..ndof {
        for j in 0..ndof {
            for b in 0..d {
                big_mass[(i * d + b, j * d + b)] = mass[(i, j)];
            }
        }
    }
    Ok(big_mass * (p * (a * e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{builtin_separable, SpatialProfile, ZFactor};
    use crate::orthopoly::PolyFamily;
    use crate::spatial::{FeOrder, Mesh};

    fn hermite1() -> DistributionSpec {
        DistributionSpec::iid(PolyFamily::hermite(), 1).unwrap()
    }

    fn space(m: usize) -> FeSpace {
        FeSpace::new(Mesh::interval(m).unwrap(), FeOrder::P1)
    }

    fn max_dev(a: &SymSparseMatrix, b: &SymSparseMatrix) -> f64 {
        (a.to_dense() - b.to_dense()).abs().max()
    }

    #[test]
    fn constant_field_has_only_mean_matrix() {
        let dist = hermite1();
        let s = space(6);
        let f = builtin_separable(ZFactor::Constant { value: 2.0 }, SpatialProfile::Quadratic, &dist, 1)
            .unwrap();
        let cm = pce_coefficient_matrices(&dist, 2, &s, &f, 5).unwrap();
        let k = s.assemble_stiffness(|x| f.eval(&[0.0], x)).unwrap();
        assert!(max_dev(&cm.mats[0], &k) < 1e-12);
        for m in &cm.mats[1..] {
            assert!(m.max_abs() < 1e-12);
        }
        assert!(cm.aliasing_probe < 1e-12);
    }

    #[test]
    fn affine_field_matrices_and_blocks() {
        let dist = hermite1();
        let s = space(5);
        let aff = ZFactor::Affine {
            offset: 1.0,
            slope: 0.5,
            component: 0,
        };
        let f = builtin_separable(aff, SpatialProfile::Quadratic, &dist, 1).unwrap();
        let kg = s.assemble_stiffness(|x| SpatialProfile::Quadratic.eval(x)).unwrap();
        let cm = pce_coefficient_matrices(&dist, 1, &s, &f, 4).unwrap();
        assert!(max_dev(&cm.mats[0], &kg) < 1e-12);
        assert!(max_dev(&cm.mats[1], &kg.scaled(0.5)) < 1e-12);
        assert!(cm.mats[2].max_abs() < 1e-12);
        assert!(pce_coefficient_matrices(&dist, 1, &s, &f, 3).is_err());

        let eps = TripleProductTensor::new(&dist, 1).unwrap();
        let op = assemble_block_operator(&cm, &eps, &s.assemble_mass(), Truncation::Full).unwrap();
        let kd = kg.to_dense();
        assert!((op.block_dense(0, 0) - &kd).abs().max() < 1e-12);
        assert!((op.block_dense(1, 1) - &kd).abs().max() < 1e-12);
        assert!((op.block_dense(0, 1) - &kd * 0.5).abs().max() < 1e-12);
        assert!((op.block_dense(1, 0) - &kd * 0.5).abs().max() < 1e-12);
    }

    #[test]
    fn n_zero_is_mean_stiffness() {
        let dist = hermite1();
        let s = space(4);
        let f = builtin_separable(ZFactor::Logistic { component: 0 }, SpatialProfile::Identity, &dist, 1)
            .unwrap();
        let (op, cm) = SgOperator::build(&dist, 0, &s, &f, 20, Truncation::Full).unwrap();
        assert_eq!(op.modes(), 1);
        assert!(max_dev(op.stiffness(), &cm.mats[0]) < 1e-15);
    }

    #[test]
    fn constant_field_is_block_diagonal() {
        let dist = DistributionSpec::iid(PolyFamily::legendre(), 2).unwrap();
        let s = space(4);
        let f = builtin_separable(ZFactor::Constant { value: 1.0 }, SpatialProfile::Identity, &dist, 1)
            .unwrap();
        let (op, _) = SgOperator::build(&dist, 2, &s, &f, 5, Truncation::Full).unwrap();
        let k = s.h1_gram().to_dense();
        for b in 0..op.modes() {
            for c in 0..op.modes() {
                let blk = op.block_dense(b, c);
                let target = if b == c { k.clone() } else { DMatrix::zeros(k.nrows(), k.ncols()) };
                assert!((blk - target).abs().max() < 1e-12, "block {b},{c}");
            }
        }
    }

    #[test]
    fn brute_force_matches_assembly() {
        let dist = hermite1();
        let s = space(4);
        for factor in [
            ZFactor::Affine {
                offset: 1.0,
                slope: 0.5,
                component: 0,
            },
            ZFactor::Logistic { component: 0 },
        ] {
            let f = builtin_separable(factor, SpatialProfile::Quadratic, &dist, 1).unwrap();
            for n in 0..=2 {
                let q = 2 * n + 8;
                let (op, _) = SgOperator::build(&dist, n, &s, &f, q, Truncation::Full).unwrap();
                let bf = brute_force_rnarn(&dist, n, &s, &f, q).unwrap();
                assert!((bf - op.stiffness().to_dense()).abs().max() < 1e-9);
            }
        }
    }

    #[test]
    fn initial_coefficient_examples() {
        let dist = hermite1();
        let s = space(8);
        let mis = MultiIndexSet::new(1, 3).unwrap();
        let prof = s.l2_project(|x| (std::f64::consts::PI * x[0]).sin()).unwrap();
        let check = |u0: &InitialDatum, expect: &[f64]| {
            let st = initial_coefficients(&dist, &mis, u0, &s, 4).unwrap();
            for (mode, c) in st.coefficients.iter().zip(expect) {
                for (a, p) in mode.iter().zip(&prof) {
                    assert!((a - c * p).abs() < 1e-12);
                }
            }
        };
        check(&InitialDatum::sine(), &[1.0, 0.0, 0.0, 0.0]);
        check(&InitialDatum::sine().with_z_terms(vec![(vec![1], 1.0)]), &[0.0, 1.0, 0.0, 0.0]);
        check(
            &InitialDatum::sine().with_z_terms(vec![(vec![2], 1.0)]),
            &[1.0, 0.0, std::f64::consts::SQRT_2, 0.0],
        );
    }

    #[test]
    fn state_layout_round_trip() {
        let st = SgState {
            time: 0.5,
            coefficients: vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
        };
        let g = st.to_global();
        assert_eq!(g, vec![1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
        assert_eq!(SgState::from_global(0.5, 3, &g).unwrap(), st);
        assert!(SgState::from_global(0.0, 4, &g).is_err());
    }

    #[test]
    fn brute_force_size_guard() {
        let dist = hermite1();
        let s = space(400);
        let f = builtin_separable(ZFactor::Constant { value: 1.0 }, SpatialProfile::Identity, &dist, 1)
            .unwrap();
        assert!(matches!(brute_force_rnarn(&dist, 5, &s, &f, 12), Err(Error::TooLarge(_))));
    }
}
