//! Tensorized polynomial chaos: multi-index sets, basis evaluation,
//! projections, triple products and the error constants of the truncated
//! expansion.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthopoly::{PolyFamily, QuadratureRule};

/// Largest admissible number of chaos modes.
pub const MAX_MODES: u128 = 10_000_000;

/// Entries of the triple-product tensor below this magnitude are dropped.
pub const EPS_DROP_TOL: f64 = 1e-12;

/// Law of the random vector `Z = (Z_0, …, Z_{N-1})` with independent components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct DistributionSpec {
    components: Vec<PolyFamily>,
}

#[derive(Deserialize)]
struct RawDistribution {
    components: Vec<PolyFamily>,
}

impl TryFrom<RawDistribution> for DistributionSpec {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        DistributionSpec::new(raw.components)
    }
}

impl DistributionSpec {
    pub fn new(components: Vec<PolyFamily>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter(
                "a distribution needs at least one component".into(),
            ));
        }
        for c in &components {
            c.validate()?;
        }
        Ok(Self { components })
    }

    /// `N` independent copies of one law.
    pub fn iid(family: PolyFamily, dim: usize) -> Result<Self> {
        Self::new(vec![family; dim])
    }

    pub fn components(&self) -> &[PolyFamily] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `ρ(z)^α`, the weight of `∂^α f` in the weighted Sobolev norm.
    pub fn sobolev_weight(&self, alpha: &[usize], z: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(alpha)
            .zip(z)
            .map(|((f, &a), &zj)| f.sobolev_weight(zj).powi(a as i32))
            .product()
    }

    /// Tensor Gauss rule with `q` nodes per dimension.
    pub fn tensor_rule(&self, q: usize) -> Result<TensorRule> {
        let rules = self
            .components
            .iter()
            .map(|f| f.gauss_rule(q))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorRule::from_rules(&rules))
    }
}

/// Tensor product of univariate rules; points in lexicographic order with the
/// last coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TensorRule {
    pub fn from_rules(rules: &[QuadratureRule]) -> Self {
        let mut points = vec![Vec::new()];
        let mut weights = vec![1.0];
        for rule in rules {
            let mut next_p = Vec::with_capacity(points.len() * rule.len());
            let mut next_w = Vec::with_capacity(points.len() * rule.len());
            for (p, w) in points.iter().zip(&weights) {
                for (&z, &wz) in rule.nodes.iter().zip(&rule.weights) {
                    let mut np = p.clone();
                    np.push(z);
                    next_p.push(np);
                    next_w.push(w * wz);
                }
            }
            points = next_p;
            weights = next_w;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn binomial_checked(n: u128, k: u128) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
        if acc > MAX_MODES * 1_000 {
            return None;
        }
    }
    Some(acc)
}

/// Number of multi-indices in `ℕ₀^dim` with total degree at most `order`.
pub fn total_degree_cardinality(dim: usize, order: usize) -> Option<u128> {
    binomial_checked((order + dim) as u128, order.min(dim) as u128)
}

/// The total-degree set `{α ∈ ℕ₀^N : |α| ≤ n}` in graded order, ties broken
/// by descending lexicographic order (`(1,0)` before `(0,1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    dim: usize,
    order: usize,
    indices: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

fn compositions(total: usize, parts: usize, out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>) {
    if parts == 1 {
        let mut idx = prefix.clone();
        idx.push(total);
        out.push(idx);
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, parts - 1, out, prefix);
        prefix.pop();
    }
}

impl MultiIndexSet {
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension N must be >= 1".into()));
        }
        match total_degree_cardinality(dim, order) {
            Some(c) if c <= MAX_MODES => {}
            _ => {
                return Err(Error::TooLarge(format!(
                    "C({}+{dim}, {order}) exceeds {MAX_MODES} modes",
                    order
                )))
            }
        }
        let mut indices = Vec::new();
        for d in 0..=order {
            compositions(d, dim, &mut indices, &mut Vec::with_capacity(dim));
        }
        let lookup = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Ok(Self {
            dim,
            order,
            indices,
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.indices[i]
    }

    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Number of modes with total degree at most `degree`. Graded ordering makes
    /// them a prefix of the set.
    pub fn count_up_to(&self, degree: usize) -> usize {
        self.indices.partition_point(|a| a.iter().sum::<usize>() <= degree)
    }
}

/// Univariate values `h_k(z_j)` for `k <= n` and each component, multiplied
/// into `Φ_α(z)` for every `α` of the set.
pub fn tensor_basis_eval(dist: &DistributionSpec, mis: &MultiIndexSet, z: &[f64]) -> Vec<f64> {
    assert_eq!(z.len(), dist.dim(), "point dimension must match the distribution");
    let uni: Vec<Vec<f64>> = dist
        .components()
        .iter()
        .zip(z)
        .map(|(f, &zj)| f.eval_orthonormal(mis.order(), zj))
        .collect();
    mis.indices()
        .iter()
        .map(|alpha| alpha.iter().enumerate().map(|(j, &a)| uni[j][a]).product())
        .collect()
}

/// Chaos coefficients `(f̂_α)` of a scalar- or vector-valued map; each mode
/// holds one payload vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PceVector {
    pub modes: Vec<Vec<f64>>,
}

impl PceVector {
    pub fn payload_len(&self) -> usize {
        self.modes.first().map_or(0, Vec::len)
    }

    /// `Σ_α f̂_α Φ_α(z)`.
    pub fn eval(&self, dist: &DistributionSpec, mis: &MultiIndexSet, z: &[f64]) -> Vec<f64> {
        let phi = tensor_basis_eval(dist, mis, z);
        let mut out = vec![0.0; self.payload_len()];
        for (mode, p) in self.modes.iter().zip(&phi) {
            for (o, v) in out.iter_mut().zip(mode) {
                *o += p * v;
            }
        }
        out
    }
}

/// `f̂_α = Σ_i w_i f(z_i) Φ_α(z_i)` with a `q`-point tensor Gauss rule.
pub fn pce_project<F>(dist: &DistributionSpec, mis: &MultiIndexSet, f: F, q: usize) -> Result<PceVector>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if q < mis.order() + 1 {
        return Err(Error::InvalidParameter(format!(
            "projection of order {} needs at least {} nodes per dimension, got {q}",
            mis.order(),
            mis.order() + 1
        )));
    }
    let rule = dist.tensor_rule(q)?;
    let samples: Vec<Vec<f64>> = rule.points.par_iter().map(|z| f(z)).collect();
    let len = samples[0].len();
    if let Some(bad) = samples.iter().find(|s| s.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: bad.len(),
        });
    }
    let mut modes = vec![vec![0.0; len]; mis.len()];
    for ((z, w), s) in rule.points.iter().zip(&rule.weights).zip(&samples) {
        let phi = tensor_basis_eval(dist, mis, z);
        for (mode, p) in modes.iter_mut().zip(&phi) {
            for (m, v) in mode.iter_mut().zip(s) {
                *m += w * p * v;
            }
        }
    }
    Ok(PceVector { modes })
}

/// `(Σ_{|α|≤order} ‖ρ^{α/2} ∂^α f‖²)^{1/2}` by tensor quadrature with `q`
/// nodes per dimension. `deriv(α, z)` returns `∂^α f(z)` or `None` if that
/// derivative is not available.
pub fn weighted_sobolev_norm<D>(dist: &DistributionSpec, deriv: D, order: usize, q: usize) -> Result<f64>
where
    D: Fn(&[usize], &[f64]) -> Option<f64>,
{
    let rule = dist.tensor_rule(q)?;
    let alphas = MultiIndexSet::new(dist.dim(), order)?;
    let mut total = 0.0;
    for alpha in alphas.indices() {
        let mut part = 0.0;
        for (z, w) in rule.points.iter().zip(&rule.weights) {
            let v = deriv(alpha, z).ok_or_else(|| Error::MissingDerivative(alpha.clone()))?;
            part += w * dist.sobolev_weight(alpha, z) * v * v;
        }
        total += part;
    }
    Ok(total.sqrt())
}

/// `C_{ℓ,N} = N^{ℓ/2} Π_{r<ℓ} max_j C_j(2r)`.
pub fn pce_error_constant(dist: &DistributionSpec, ell: usize) -> f64 {
    let n = dist.dim() as f64;
    let product: f64 = (0..ell)
        .map(|r| {
            dist.components()
                .iter()
                .map(|f| f.q_bound_constant(2 * r))
                .fold(0.0, f64::max)
        })
        .product();
    n.powf(ell as f64 / 2.0) * product
}

/// `d(n) = min_{|α| ≥ n} Σ_j λ^j_{α_j}`; informational sharpening of the
/// `n^{-ℓ}` bound.
pub fn lower_eigenvalue_sum_bound(dist: &DistributionSpec, n: usize) -> f64 {
    // eigenvalues increase with degree, so the minimum sits on |α| = n
    let mut shell = Vec::new();
    compositions(n, dist.dim(), &mut shell, &mut Vec::new());
    shell
        .iter()
        .map(|alpha| {
            dist.components()
                .iter()
                .zip(alpha)
                .map(|(f, &a)| f.sl_eigenvalue(a))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Sparse `ε_{α,β,γ} = E[Φ_α Φ_β Φ_γ]` for `|α| ≤ 2n`, `|β|, |γ| ≤ n`.
#[derive(Debug, Clone)]
pub struct TripleProductTensor {
    order: usize,
    outer: MultiIndexSet,
    inner: MultiIndexSet,
    /// indexed by `β * d_n + γ`: `(α position in outer, value)` sorted by α
    by_pair: Vec<Vec<(usize, f64)>>,
}

fn symmetric_law(f: &PolyFamily) -> bool {
    match *f {
        PolyFamily::Hermite => true,
        PolyFamily::Jacobi { alpha, beta } => alpha == beta,
        PolyFamily::Laguerre { .. } => false,
    }
}

/// Univariate `e(a,b,c) = E[h_a h_b h_c]` for sorted `a ≤ b ≤ c` with
/// `a, b ≤ n`, `c ≤ 2n`, by a `(2n+1)`-point rule (exact up to degree `4n+1`).
struct UnivariateTriples {
    n: usize,
    table: Vec<f64>,
}

impl UnivariateTriples {
    fn new(family: &PolyFamily, n: usize) -> Result<Self> {
        let rule = family.gauss_rule(2 * n + 1)?;
        let values: Vec<Vec<f64>> = rule
            .nodes
            .iter()
            .map(|&z| family.eval_orthonormal(2 * n, z))
            .collect();
        let parity = symmetric_law(family);
        let mut table = vec![0.0; (n + 1) * (n + 1) * (2 * n + 1)];
        for a in 0..=n {
            for b in a..=n {
                for c in b..=2 * n {
                    if c > a + b || (parity && (a + b + c) % 2 == 1) {
                        continue;
                    }
                    let v: f64 = values
                        .iter()
                        .zip(&rule.weights)
                        .map(|(h, w)| w * h[a] * h[b] * h[c])
                        .sum();
                    table[(a * (n + 1) + b) * (2 * n + 1) + c] = v;
                }
            }
        }
        Ok(Self { n, table })
    }

    fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        let mut s = [x, y, z];
        s.sort_unstable();
        let [a, b, c] = s;
        if b > self.n || c > 2 * self.n {
            return 0.0;
        }
        self.table[(a * (self.n + 1) + b) * (2 * self.n + 1) + c]
    }
}

impl TripleProductTensor {
    pub fn new(dist: &DistributionSpec, n: usize) -> Result<Self> {
        let inner = MultiIndexSet::new(dist.dim(), n)?;
        let outer = MultiIndexSet::new(dist.dim(), 2 * n)?;
        let tables = dist
            .components()
            .iter()
            .map(|f| UnivariateTriples::new(f, n))
            .collect::<Result<Vec<_>>>()?;
        let parity: Vec<bool> = dist.components().iter().map(symmetric_law).collect();
        let d = inner.len();
        let by_pair: Vec<Vec<(usize, f64)>> = (0..d * d)
            .into_par_iter()
            .map(|pair| {
                let beta = inner.get(pair / d);
                let gamma = inner.get(pair % d);
                let ranges: Vec<(usize, usize, usize)> = beta
                    .iter()
                    .zip(gamma)
                    .zip(&parity)
                    .map(|((&b, &c), &p)| (b.abs_diff(c), b + c, if p { 2 } else { 1 }))
                    .collect();
                let mut entries = Vec::new();
                let mut alpha: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                loop {
                    let v: f64 = (0..alpha.len())
                        .map(|j| tables[j].get(alpha[j], beta[j], gamma[j]))
                        .product();
                    if v.abs() >= EPS_DROP_TOL {
                        let pos = outer.position(&alpha).expect("|α| ≤ |β| + |γ| ≤ 2n");
                        entries.push((pos, v));
                    }
                    // odometer over the per-dimension ranges
                    let mut j = alpha.len();
                    loop {
                        if j == 0 {
                            entries.sort_by_key(|e| e.0);
                            return entries;
                        }
                        j -= 1;
                        let (lo, hi, step) = ranges[j];
                        if alpha[j] + step <= hi {
                            alpha[j] += step;
                            break;
                        }
                        alpha[j] = lo;
                    }
                }
            })
            .collect();
        Ok(Self {
            order: n,
            outer,
            inner,
            by_pair,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Index set of `α` (total degree ≤ 2n).
    pub fn outer(&self) -> &MultiIndexSet {
        &self.outer
    }

    /// Index set of `β, γ` (total degree ≤ n).
    pub fn inner(&self) -> &MultiIndexSet {
        &self.inner
    }

    pub fn nnz(&self) -> usize {
        self.by_pair.iter().map(Vec::len).sum()
    }

    /// Nonzero `(α position, ε_{α,β,γ})` for positions `β, γ` of the inner set.
    pub fn pair(&self, beta: usize, gamma: usize) -> &[(usize, f64)] {
        &self.by_pair[beta * self.inner.len() + gamma]
    }

    /// `ε` by positions; zero for entries outside the stored range or pattern.
    pub fn get(&self, alpha: usize, beta: usize, gamma: usize) -> f64 {
        let entries = self.pair(beta, gamma);
        match entries.binary_search_by_key(&alpha, |e| e.0) {
            Ok(p) => entries[p].1,
            Err(_) => 0.0,
        }
    }

    /// `ε` by multi-indices; `None` if an index lies outside the stored range.
    pub fn get_multi(&self, alpha: &[usize], beta: &[usize], gamma: &[usize]) -> Option<f64> {
        let a = self.outer.position(alpha)?;
        let b = self.inner.position(beta)?;
        let c = self.inner.position(gamma)?;
        Some(self.get(a, b, c))
    }

    /// All stored entries sorted by `(α, β, γ)` positions.
    pub fn entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let d = self.inner.len();
        let mut all: Vec<(usize, usize, usize, f64)> = self
            .by_pair
            .iter()
            .enumerate()
            .flat_map(|(pair, list)| list.iter().map(move |&(a, v)| (a, pair / d, pair % d, v)))
            .collect();
        all.sort_by_key(|e| (e.0, e.1, e.2));
        all
    }

    /// Text form: one `alpha beta gamma value` line per entry, indices within
    /// a tuple separated by commas, sorted by `(α, β, γ)` positions.
    pub fn to_text(&self) -> String {
        let join = |a: &[usize]| a.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        for (a, b, c, v) in self.entries() {
            let _ = writeln!(
                out,
                "{} {} {} {:.16e}",
                join(self.outer.get(a)),
                join(self.inner.get(b)),
                join(self.inner.get(c)),
                v
            );
        }
        out
    }
}

/// Parses the text form produced by [`TripleProductTensor::to_text`] into
/// `(α, β, γ, value)` records.
pub fn parse_triple_text(text: &str) -> Result<Vec<(Vec<usize>, Vec<usize>, Vec<usize>, f64)>> {
    let tuple = |s: &str| -> Result<Vec<usize>> {
        s.split(',')
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Config(format!("bad index '{t}': {e}")))
            })
            .collect()
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(Error::Config(format!("malformed tensor line '{line}'")));
            }
            let value = parts[3]
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad value '{}': {e}", parts[3])))?;
            Ok((tuple(parts[0])?, tuple(parts[1])?, tuple(parts[2])?, value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermite1() -> DistributionSpec {
        DistributionSpec::iid(PolyFamily::Hermite, 1).unwrap()
    }

    #[test]
    fn multi_index_examples() {
        let m = MultiIndexSet::new(2, 2).unwrap();
        let expect: Vec<Vec<usize>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(m.indices(), expect.as_slice());
        assert_eq!(MultiIndexSet::new(1, 4).unwrap().len(), 5);
        assert_eq!(MultiIndexSet::new(3, 2).unwrap().len(), 10);
        assert_eq!(m.count_up_to(1), 3);
    }

    #[test]
    fn multi_index_guards() {
        assert!(matches!(MultiIndexSet::new(0, 2), Err(Error::InvalidParameter(_))));
        assert!(matches!(MultiIndexSet::new(10, 30), Err(Error::TooLarge(_))));
        assert!(DistributionSpec::new(vec![]).is_err());
    }

    #[test]
    fn basis_eval_examples() {
        let d2 = DistributionSpec::iid(PolyFamily::Hermite, 2).unwrap();
        let m = MultiIndexSet::new(2, 2).unwrap();
        let phi = tensor_basis_eval(&d2, &m, &[1.0, 2.0]);
        assert_eq!(phi[0], 1.0);
        assert!((phi[m.position(&[1, 1]).unwrap()] - 2.0).abs() < 1e-15);
        let phi1 = tensor_basis_eval(&hermite1(), &MultiIndexSet::new(1, 2).unwrap(), &[0.0]);
        assert!((phi1[2] + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn hermite_triple_products() {
        let eps = TripleProductTensor::new(&hermite1(), 2).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        assert!((eps.get_multi(&[2], &[1], &[1]).unwrap() - s2).abs() < 1e-13);
        assert!((eps.get_multi(&[3], &[1], &[2]).unwrap() - 3f64.sqrt()).abs() < 1e-13);
        for b in 0..3 {
            for c in 0..3 {
                let e = eps.get(0, b, c);
                assert!((e - if b == c { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        // beyond |β| + |γ| nothing is stored
        assert_eq!(eps.get_multi(&[4], &[1], &[1]), Some(0.0));
    }

    #[test]
    fn text_round_trip() {
        let dist = DistributionSpec::new(vec![PolyFamily::Hermite, PolyFamily::legendre()]).unwrap();
        let eps = TripleProductTensor::new(&dist, 2).unwrap();
        let text = eps.to_text();
        let parsed = parse_triple_text(&text).unwrap();
        assert_eq!(parsed.len(), eps.nnz());
        for (a, b, c, v) in parsed {
            let stored = eps.get_multi(&a, &b, &c).unwrap();
            assert!((stored - v).abs() <= 1e-15 * v.abs().max(1.0));
        }
        assert!(text.lines().next().unwrap().starts_with("0,0 0,0 0,0 "));
    }

    #[test]
    fn projection_examples() {
        let dist = hermite1();
        let mis = MultiIndexSet::new(1, 4).unwrap();
        let p = pce_project(&dist, &mis, |z| vec![z[0]], 8).unwrap();
        for (k, m) in p.modes.iter().enumerate() {
            assert!((m[0] - if k == 1 { 1.0 } else { 0.0 }).abs() < 1e-14);
        }
        let c = pce_project(&dist, &mis, |_| vec![2.5], 5).unwrap();
        assert!((c.modes[0][0] - 2.5).abs() < 1e-14);
        assert!(c.modes[1..].iter().all(|m| m[0].abs() < 1e-14));
        let sq = pce_project(&dist, &mis, |z| vec![z[0] * z[0]], 8).unwrap();
        let expect = [1.0, 0.0, std::f64::consts::SQRT_2, 0.0, 0.0];
        for (m, e) in sq.modes.iter().zip(expect) {
            assert!((m[0] - e).abs() < 1e-13);
        }
    }

    #[test]
    fn projection_rejects_bad_input() {
        let dist = hermite1();
        let mis = MultiIndexSet::new(1, 4).unwrap();
        assert!(pce_project(&dist, &mis, |z| vec![z[0]], 3).is_err());
        let ragged = pce_project(&dist, &mis, |z| vec![0.0; if z[0] > 0.0 { 2 } else { 1 }], 6);
        assert!(matches!(ragged, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sobolev_norm_examples() {
        let dist = hermite1();
        let one = weighted_sobolev_norm(&dist, |a, _| Some(if a[0] == 0 { 1.0 } else { 0.0 }), 3, 10).unwrap();
        assert!((one - 1.0).abs() < 1e-14);
        let id = |a: &[usize], z: &[f64]| match a[0] {
            0 => Some(z[0]),
            1 => Some(1.0),
            _ => Some(0.0),
        };
        assert!((weighted_sobolev_norm(&dist, id, 0, 10).unwrap() - 1.0).abs() < 1e-14);
        let h1 = weighted_sobolev_norm(&dist, id, 1, 10).unwrap();
        assert!((h1 - std::f64::consts::SQRT_2).abs() < 1e-14);
        let partial = |a: &[usize], z: &[f64]| if a[0] == 0 { Some(z[0]) } else { None };
        assert!(matches!(
            weighted_sobolev_norm(&dist, partial, 1, 10),
            Err(Error::MissingDerivative(_))
        ));
    }

    #[test]
    fn error_constants() {
        assert_eq!(pce_error_constant(&hermite1(), 0), 1.0);
        assert!((pce_error_constant(&hermite1(), 1) - 21f64.sqrt()).abs() < 1e-14);
        let d2 = DistributionSpec::iid(PolyFamily::Hermite, 2).unwrap();
        assert!((pce_error_constant(&d2, 1) - 2f64.sqrt() * 21f64.sqrt()).abs() < 1e-13);
        // ℓ = 2 takes C(0) C(2)
        let c2 = pce_error_constant(&hermite1(), 2);
        assert!((c2 - 21f64.sqrt() * 33f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_sum_bound_dominates_n() {
        let mixed = DistributionSpec::new(vec![
            PolyFamily::Hermite,
            PolyFamily::legendre(),
            PolyFamily::laguerre(0.5).unwrap(),
        ])
        .unwrap();
        for n in 0..8 {
            assert!(lower_eigenvalue_sum_bound(&mixed, n) >= n as f64);
        }
        assert_eq!(lower_eigenvalue_sum_bound(&hermite1(), 5), 5.0);
    }
}
