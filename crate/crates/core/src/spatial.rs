//! Lagrange finite elements on structured meshes of `(0,1)` and `(0,1)²`
//! with homogeneous Dirichlet conditions.
//!
//! Nodes live on a uniform lattice (spacing `1/m` for P1, `1/(2m)` for P2);
//! boundary nodes are eliminated and the remaining ones numbered
//! lexicographically, which keeps assembled matrices banded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, SymBuilder, SymSparseMatrix};
use crate::orthopoly::PolyFamily;

/// 2×2 coefficient tensor. One-dimensional problems use entry `[0][0]`.
pub type Tensor2 = [[f64; 2]; 2];

pub fn scalar_tensor(c: f64) -> Tensor2 {
    [[c, 0.0], [0.0, c]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeOrder {
    P1,
    P2,
}

impl FeOrder {
    pub fn degree(self) -> usize {
        match self {
            FeOrder::P1 => 1,
            FeOrder::P2 => 2,
        }
    }
}

/// Uniform mesh of the unit interval (`dim = 1`, `m` cells) or of the unit
/// square (`dim = 2`, `2m²` right triangles split along the main diagonal).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh {
    dim: usize,
    m: usize,
}

impl Mesh {
    pub fn new(dim: usize, m: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidParameter(format!("mesh dimension must be 1 or 2, got {dim}")));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("mesh needs at least one cell".into()));
        }
        Ok(Self { dim, m })
    }

    pub fn interval(m: usize) -> Result<Self> {
        Self::new(1, m)
    }

    pub fn unit_square(m: usize) -> Result<Self> {
        Self::new(2, m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_cells(&self) -> usize {
        match self.dim {
            1 => self.m,
            _ => 2 * self.m * self.m,
        }
    }

    /// Cell diameter bound: `1/m` on the interval, `√2/m` on the square.
    pub fn h(&self) -> f64 {
        match self.dim {
            1 => 1.0 / self.m as f64,
            _ => std::f64::consts::SQRT_2 / self.m as f64,
        }
    }
}

/// Reference-element quadrature with basis values and reference gradients.
#[derive(Debug, Clone)]
struct ElementRule {
    weights: Vec<f64>,
    points: Vec<[f64; 2]>,
    values: Vec<Vec<f64>>,
    grads: Vec<Vec<[f64; 2]>>,
}

fn ref_basis(dim: usize, order: FeOrder, p: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    match (dim, order) {
        (1, FeOrder::P1) => (vec![1.0 - p[0], p[0]], vec![[-1.0, 0.0], [1.0, 0.0]]),
        (1, FeOrder::P2) => {
            let x = p[0];
            (
                vec![(1.0 - x) * (1.0 - 2.0 * x), x * (2.0 * x - 1.0), 4.0 * x * (1.0 - x)],
                vec![[4.0 * x - 3.0, 0.0], [4.0 * x - 1.0, 0.0], [4.0 - 8.0 * x, 0.0]],
            )
        }
        (_, FeOrder::P1) => (
            vec![1.0 - p[0] - p[1], p[0], p[1]],
            vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
        ),
        (_, FeOrder::P2) => {
            let l = [1.0 - p[0] - p[1], p[0], p[1]];
            let g = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let mut vals = Vec::with_capacity(6);
            let mut grads = Vec::with_capacity(6);
            for i in 0..3 {
                vals.push(l[i] * (2.0 * l[i] - 1.0));
                let s = 4.0 * l[i] - 1.0;
                grads.push([s * g[i][0], s * g[i][1]]);
            }
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                vals.push(4.0 * l[i] * l[j]);
                grads.push([
                    4.0 * (g[i][0] * l[j] + l[i] * g[j][0]),
                    4.0 * (g[i][1] * l[j] + l[i] * g[j][1]),
                ]);
            }
            (vals, grads)
        }
    }
}

impl ElementRule {
    /// Gauss rule on the reference cell: `q` points on `[0,1]`, or a collapsed
    /// `q × q` rule on the unit triangle (exact to degree `2q - 1`).
    fn new(dim: usize, order: FeOrder, q: usize) -> Self {
        let legendre = PolyFamily::legendre().gauss_rule(q).expect("Gauss-Legendre rule");
        let mut points = Vec::new();
        let mut weights = Vec::new();
        if dim == 1 {
            for (&t, &w) in legendre.nodes.iter().zip(&legendre.weights) {
                points.push([0.5 * (1.0 + t), 0.0]);
                weights.push(w);
            }
        } else {
            // ∫_T f = ∫∫_{[0,1]²} f(u(1-v), v) (1-v) du dv
            let jac = PolyFamily::jacobi(1.0, 0.0)
                .and_then(|f| f.gauss_rule(q))
                .expect("Gauss-Jacobi rule");
            for (&t, &wv) in jac.nodes.iter().zip(&jac.weights) {
                let v = 0.5 * (1.0 + t);
                for (&s, &wu) in legendre.nodes.iter().zip(&legendre.weights) {
                    let u = 0.5 * (1.0 + s);
                    points.push([u * (1.0 - v), v]);
                    weights.push(0.5 * wv * wu);
                }
            }
        }
        let (values, grads) = points.iter().map(|&p| ref_basis(dim, order, p)).unzip();
        Self {
            weights,
            points,
            values,
            grads,
        }
    }
}

/// Geometry of one cell: vertices and the affine map from the reference cell.
#[derive(Debug, Clone, Copy)]
struct CellMap {
    origin: [f64; 2],
    jac: [[f64; 2]; 2],
    inv_t: [[f64; 2]; 2],
    det: f64,
}

impl CellMap {
    fn new(dim: usize, verts: &[[f64; 2]]) -> Self {
        if dim == 1 {
            let h = verts[1][0] - verts[0][0];
            return Self {
                origin: verts[0],
                jac: [[h, 0.0], [0.0, 1.0]],
                inv_t: [[1.0 / h, 0.0], [0.0, 1.0]],
                det: h,
            };
        }
        let a = [verts[1][0] - verts[0][0], verts[1][1] - verts[0][1]];
        let b = [verts[2][0] - verts[0][0], verts[2][1] - verts[0][1]];
        let jac = [[a[0], b[0]], [a[1], b[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        // J^{-T}
        let inv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Self {
            origin: verts[0],
            jac,
            inv_t,
            det: det.abs(),
        }
    }

    fn map(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * p[0] + self.jac[0][1] * p[1],
            self.origin[1] + self.jac[1][0] * p[0] + self.jac[1][1] * p[1],
        ]
    }

    fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

/// Continuous Lagrange space of order 1 or 2 with homogeneous Dirichlet dofs
/// removed.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Mesh,
    order: FeOrder,
    /// lattice points per direction
    lattice: usize,
    /// lattice node → free dof
    free_of_node: Vec<Option<usize>>,
    /// free dof → lattice node
    node_of_free: Vec<usize>,
    assembly_rule: ElementRule,
    accurate_rule: ElementRule,
}

impl FeSpace {
    pub fn new(mesh: Mesh, order: FeOrder) -> Self {
        let step = order.degree();
        let lattice = mesh.m() * step + 1;
        let total = lattice.pow(mesh.dim() as u32);
        let mut free_of_node = vec![None; total];
        let mut node_of_free = Vec::new();
        for node in 0..total {
            let interior = match mesh.dim() {
                1 => node > 0 && node + 1 < lattice,
                _ => {
                    let (ix, iy) = (node % lattice, node / lattice);
                    ix > 0 && iy > 0 && ix + 1 < lattice && iy + 1 < lattice
                }
            };
            if interior {
                free_of_node[node] = Some(node_of_free.len());
                node_of_free.push(node);
            }
        }
        // P2 with the degree-4 spatial coefficients needs degree 6 for the
        // stiffness integrand; q = 3 (collapsed 3×3) is exact to degree 5 and
        // q = 4 to degree 7.
        let (qa, qf) = match mesh.dim() {
            1 => (4, 8),
            _ => (3, 6),
        };
        Self {
            mesh,
            order,
            lattice,
            free_of_node,
            node_of_free,
            assembly_rule: ElementRule::new(mesh.dim(), order, qa),
            accurate_rule: ElementRule::new(mesh.dim(), order, qf),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn order(&self) -> FeOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    /// Number of free (interior) dofs.
    pub fn ndof(&self) -> usize {
        self.node_of_free.len()
    }

    fn node_coords(&self, node: usize) -> Vec<f64> {
        let s = (self.lattice - 1) as f64;
        match self.dim() {
            1 => vec![node as f64 / s],
            _ => vec![(node % self.lattice) as f64 / s, (node / self.lattice) as f64 / s],
        }
    }

    /// Coordinates of free dof `i`.
    pub fn dof_coords(&self, i: usize) -> Vec<f64> {
        self.node_coords(self.node_of_free[i])
    }

    /// Lattice nodes of `cell` in local basis order together with vertex
    /// coordinates.
    fn cell(&self, cell: usize) -> (Vec<usize>, Vec<[f64; 2]>) {
        let s = self.order.degree();
        let m = self.mesh.m() as f64;
        if self.dim() == 1 {
            let nodes = match self.order {
                FeOrder::P1 => vec![cell, cell + 1],
                FeOrder::P2 => vec![2 * cell, 2 * cell + 2, 2 * cell + 1],
            };
            let verts = vec![[cell as f64 / m, 0.0], [(cell + 1) as f64 / m, 0.0]];
            return (nodes, verts);
        }
        let square = cell / 2;
        let (i, j) = (square % self.mesh.m(), square / self.mesh.m());
        let vert_ij: [(usize, usize); 3] = if cell % 2 == 0 {
            [(i, j), (i + 1, j), (i + 1, j + 1)]
        } else {
            [(i, j), (i + 1, j + 1), (i, j + 1)]
        };
        let lat = |(a, b): (usize, usize)| a + b * self.lattice;
        let mut nodes: Vec<usize> = vert_ij.iter().map(|&(a, b)| lat((s * a, s * b))).collect();
        if self.order == FeOrder::P2 {
            for (p, q) in [(0, 1), (1, 2), (2, 0)] {
                let (a0, b0) = vert_ij[p];
                let (a1, b1) = vert_ij[q];
                nodes.push(lat((a0 + a1, b0 + b1)));
            }
        }
        let verts = vert_ij
            .iter()
            .map(|&(a, b)| [a as f64 / m, b as f64 / m])
            .collect();
        (nodes, verts)
    }

    fn local_matrix_loop(
        &self,
        rule: &ElementRule,
        mut local: impl FnMut(&CellMap, &ElementRule, &mut Vec<Vec<f64>>) -> Result<()>,
    ) -> Result<SymSparseMatrix> {
        let mut builder = SymBuilder::new(self.ndof());
        let nb = rule.values[0].len();
        let mut ke = vec![vec![0.0; nb]; nb];
        for c in 0..self.mesh.num_cells() {
            let (nodes, verts) = self.cell(c);
            let map = CellMap::new(self.dim(), &verts);
            ke.iter_mut().for_each(|r| r.iter_mut().for_each(|v| *v = 0.0));
            local(&map, rule, &mut ke)?;
            for a in 0..nb {
                let Some(ia) = self.free_of_node[nodes[a]] else { continue };
                for b in a..nb {
                    let Some(ib) = self.free_of_node[nodes[b]] else { continue };
                    builder.add(ia, ib, ke[a][b]);
                }
            }
        }
        Ok(builder.build())
    }

    /// Mass matrix `M_ij = ∫ φ_i φ_j`.
    pub fn assemble_mass(&self) -> SymSparseMatrix {
        self.local_matrix_loop(&self.assembly_rule, |map, rule, ke| {
            for (q, w) in rule.weights.iter().enumerate() {
                let wq = w * map.det;
                let v = &rule.values[q];
                for a in 0..v.len() {
                    for b in a..v.len() {
                        ke[a][b] += wq * v[a] * v[b];
                    }
                }
            }
            Ok(())
        })
        .expect("mass assembly cannot fail")
    }

    /// Stiffness matrix `K_ij = ∫ (C(x) ∇φ_j)·∇φ_i` for a coefficient tensor
    /// field `C`; in 1D only `C[0][0]` is used.
    pub fn assemble_stiffness<C>(&self, coeff: C) -> Result<SymSparseMatrix>
    where
        C: Fn(&[f64]) -> Tensor2,
    {
        let dim = self.dim();
        self.local_matrix_loop(&self.assembly_rule, |map, rule, ke| {
            for (q, w) in rule.weights.iter().enumerate() {
                let x = map.map(rule.points[q]);
                let xs = &x[..dim];
                let c = coeff(xs);
                if dim == 2 {
                    let scale = c[0][1].abs().max(c[1][0].abs()).max(c[0][0].abs()).max(c[1][1].abs());
                    if (c[0][1] - c[1][0]).abs() > 1e-12 * scale.max(1.0) {
                        return Err(Error::NonSymmetricCoefficient {
                            x: xs.to_vec(),
                            upper: c[0][1],
                            lower: c[1][0],
                        });
                    }
                }
                let wq = w * map.det;
                let grads: Vec<[f64; 2]> = rule.grads[q].iter().map(|&g| map.grad(g)).collect();
                for a in 0..grads.len() {
                    for b in a..grads.len() {
                        let ga = grads[a];
                        let gb = grads[b];
                        let v = if dim == 1 {
                            c[0][0] * ga[0] * gb[0]
                        } else {
                            ga[0] * (c[0][0] * gb[0] + c[0][1] * gb[1])
                                + ga[1] * (c[1][0] * gb[0] + c[1][1] * gb[1])
                        };
                        ke[a][b] += wq * v;
                    }
                }
            }
            Ok(())
        })
    }

    /// Discrete `H¹₀` Gram matrix (stiffness of the identity coefficient).
    pub fn h1_gram(&self) -> SymSparseMatrix {
        self.assemble_stiffness(|_| scalar_tensor(1.0))
            .expect("identity coefficient is symmetric")
    }

    /// Load vector `b_i = ∫ f φ_i`.
    pub fn load_vector<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        let rule = &self.accurate_rule;
        let mut b = vec![0.0; self.ndof()];
        for c in 0..self.mesh.num_cells() {
            let (nodes, verts) = self.cell(c);
            let map = CellMap::new(self.dim(), &verts);
            for (q, w) in rule.weights.iter().enumerate() {
                let x = map.map(rule.points[q]);
                let fx = f(&x[..self.dim()]) * w * map.det;
                for (a, &node) in nodes.iter().enumerate() {
                    if let Some(i) = self.free_of_node[node] {
                        b[i] += fx * rule.values[q][a];
                    }
                }
            }
        }
        b
    }

    /// `L²`-orthogonal projection onto the space.
    pub fn l2_project<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> f64,
    {
        let b = self.load_vector(f);
        solve_spd(&self.assemble_mass(), &b)
    }

    /// Galerkin solution of `-div(C ∇u) = rhs` with zero boundary values.
    pub fn stationary_solve<C, F>(&self, coeff: C, rhs: F) -> Result<Vec<f64>>
    where
        C: Fn(&[f64]) -> Tensor2,
        F: Fn(&[f64]) -> f64,
    {
        let k = self.assemble_stiffness(coeff)?;
        let b = self.load_vector(rhs);
        let u = solve_spd(&k, &b)?;
        let r: Vec<f64> = k.matvec(&u).iter().zip(&b).map(|(a, b)| a - b).collect();
        let b_norm = crate::linalg::norm2(&b);
        let residual = if b_norm > 0.0 { crate::linalg::norm2(&r) / b_norm } else { crate::linalg::norm2(&r) };
        if residual > 1e-10 {
            return Err(Error::SolverNotConverged {
                residual,
                iterations: 1,
            });
        }
        Ok(u)
    }

    /// Nodal interpolant at the free dofs.
    pub fn interpolate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        (0..self.ndof()).map(|i| f(&self.dof_coords(i))).collect()
    }

    /// Point evaluation of the finite element function with free values `u`.
    pub fn eval(&self, u: &[f64], x: &[f64]) -> f64 {
        let m = self.mesh.m();
        let mf = m as f64;
        let (cell, p) = if self.dim() == 1 {
            let i = ((x[0] * mf).floor() as usize).min(m - 1);
            (i, [x[0] * mf - i as f64, 0.0])
        } else {
            let i = ((x[0] * mf).floor() as usize).min(m - 1);
            let j = ((x[1] * mf).floor() as usize).min(m - 1);
            let a = x[0] * mf - i as f64;
            let b = x[1] * mf - j as f64;
            let square = i + j * m;
            if b <= a {
                (2 * square, [a - b, b])
            } else {
                (2 * square + 1, [a, b - a])
            }
        };
        let (nodes, _) = self.cell(cell);
        let (vals, _) = ref_basis(self.dim(), self.order, p);
        nodes
            .iter()
            .zip(vals)
            .map(|(&node, v)| self.free_of_node[node].map_or(0.0, |i| u[i] * v))
            .sum()
    }

    /// Exact transfer of a function from a coarser nested space (same order,
    /// `self.m` a multiple of `coarse.m`) to this one.
    pub fn prolongate_from(&self, coarse: &FeSpace, u: &[f64]) -> Result<Vec<f64>> {
        if coarse.dim() != self.dim()
            || coarse.order != self.order
            || self.mesh.m() % coarse.mesh.m() != 0
            || u.len() != coarse.ndof()
        {
            return Err(Error::InvalidParameter(format!(
                "cannot prolongate {:?} m={} to {:?} m={}: meshes are not nested",
                coarse.order,
                coarse.mesh.m(),
                self.order,
                self.mesh.m()
            )));
        }
        Ok((0..self.ndof())
            .map(|i| coarse.eval(u, &self.dof_coords(i)))
            .collect())
    }

    /// `‖u_h - f‖_{L²}` with a high-order element rule.
    pub fn l2_error<F>(&self, u: &[f64], f: F) -> f64
    where
        F: Fn(&[f64]) -> f64,
    {
        let rule = &self.accurate_rule;
        let mut total = 0.0;
        for c in 0..self.mesh.num_cells() {
            let (nodes, verts) = self.cell(c);
            let map = CellMap::new(self.dim(), &verts);
            for (q, w) in rule.weights.iter().enumerate() {
                let x = map.map(rule.points[q]);
                let uh: f64 = nodes
                    .iter()
                    .zip(&rule.values[q])
                    .map(|(&node, v)| self.free_of_node[node].map_or(0.0, |i| u[i] * v))
                    .sum();
                let e = uh - f(&x[..self.dim()]);
                total += w * map.det * e * e;
            }
        }
        total.sqrt()
    }
}
