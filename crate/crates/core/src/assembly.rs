//! Discretization of the nonlocal energy
//!
//! ```text
//! F(u) = ∫_Ω |g(x)|² dx − 2∫_Ω f u dx + (1/ξ) ∫_∂Ω |h(x)|² dx
//! g(x) = δ⁻² ∫_Ω R_δ(x,y)(u(x) − u(y)) dy − 2 ∫_∂Ω R̄_δ(x,y) b(y) dS(y)
//! h(x) = ∫_Ω K_δ(x,y)(a(x) − u(y)) dy
//! ```
//!
//! on the multi-cubic space. Because the kernel and the basis are both
//! tensor products, every inner integral factors into 1D integrals
//! `I[s, j] = ∫_0^1 exp(-η²(s-t)²) ψ_j(t) dt`, which are tabulated once per
//! outer coordinate. Over a tensor grid of outer points the quadratic form then
//! collapses into Kronecker products of small 1D matrices.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{moments_unchecked, KernelParams};
use crate::mesh::{DofIndex, TensorMesh};
use crate::problems::ManufacturedProblem;
use crate::quadrature::{composite_layered_rule, simpson38_node_weights, QuadRule};

/// `∫ exp(-η²(s-t)²) ψ_j(t) dt` over the support of `ψ_j`, in closed form.
pub fn basis_kernel_integral(mesh: &TensorMesh, j: usize, s: f64, eta: f64) -> Result<f64> {
    if j >= mesh.nodes_per_dim() {
        return Err(Error::arg(format!("basis index {j} out of range")));
    }
    if !(s.is_finite() && (0.0..=1.0).contains(&s)) {
        return Err(Error::arg(format!("outer coordinate {s} outside [0, 1]")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::arg(format!("eta must be positive, got {eta}")));
    }
    Ok(mesh
        .support_cells(j)
        .map(|cell| {
            let (a, b) = mesh.cell_bounds(cell);
            let c = mesh.local_basis(j, cell).expect("support cell").shifted_monomials(s);
            let m = moments_unchecked(eta, a - s, b - s);
            c[0] * m[0] + c[1] * m[1] + c[2] * m[2] + c[3] * m[3]
        })
        .sum())
}

/// `[I[s, 0], …, I[s, 3N]]`, one cell's moments shared by its four basis branches.
fn kernel_integral_row(mesh: &TensorMesh, s: f64, eta: f64) -> Vec<f64> {
    let mut row = vec![0.0; mesh.nodes_per_dim()];
    for cell in 0..mesh.n_cells() {
        let (a, b) = mesh.cell_bounds(cell);
        let m = moments_unchecked(eta, a - s, b - s);
        for (j, slot) in row.iter_mut().enumerate().skip(3 * cell).take(4) {
            let c = mesh.local_basis(j, cell).expect("local node").shifted_monomials(s);
            *slot += c[0] * m[0] + c[1] * m[1] + c[2] * m[2] + c[3] * m[3];
        }
    }
    row
}

/// Boundary edges of the unit square, in the order used by [`NeumannData`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// `x₁ = 0`
    Left,
    /// `x₁ = 1`
    Right,
    /// `x₂ = 0`
    Bottom,
    /// `x₂ = 1`
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    /// Coordinate axis held fixed on this edge and its value.
    pub fn fixed(self) -> (usize, f64) {
        match self {
            Edge::Left => (0, 0.0),
            Edge::Right => (0, 1.0),
            Edge::Bottom => (1, 0.0),
            Edge::Top => (1, 1.0),
        }
    }

    pub fn normal(self) -> [f64; 2] {
        match self {
            Edge::Left => [-1.0, 0.0],
            Edge::Right => [1.0, 0.0],
            Edge::Bottom => [0.0, -1.0],
            Edge::Top => [0.0, 1.0],
        }
    }

    /// Point on the edge with free coordinate `t`.
    pub fn point(self, t: f64) -> [f64; 2] {
        let (axis, v) = self.fixed();
        if axis == 0 {
            [v, t]
        } else {
            [t, v]
        }
    }
}

/// Outward normal-derivative data `b` in the form the boundary source needs.
///
/// In 2D each edge carries the nodal values of `b` along its free coordinate;
/// the source integral uses the piecewise-cubic interpolant of those values.
#[derive(Debug, Clone, PartialEq)]
pub enum NeumannData {
    OneD { at0: f64, at1: f64 },
    TwoD { edges: [Vec<f64>; 4] },
}

impl NeumannData {
    /// Samples `b(point, outward_normal)` at the boundary nodes of `mesh`.
    pub fn from_fn<F: Fn(&[f64], &[f64]) -> f64>(mesh: &TensorMesh, b: F) -> Result<Self> {
        let check = |v: f64, x: &[f64]| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::data(format!("non-finite boundary datum {v} at {x:?}")))
            }
        };
        match mesh.dim() {
            1 => Ok(NeumannData::OneD { at0: check(b(&[0.0], &[-1.0]), &[0.0])?, at1: check(b(&[1.0], &[1.0]), &[1.0])? }),
            _ => {
                let edge_values = |edge: Edge| -> Result<Vec<f64>> {
                    mesh.nodes()
                        .into_iter()
                        .map(|t| {
                            let x = edge.point(t);
                            check(b(&x, &edge.normal()), &x)
                        })
                        .collect()
                };
                Ok(NeumannData::TwoD {
                    edges: [
                        edge_values(Edge::Left)?,
                        edge_values(Edge::Right)?,
                        edge_values(Edge::Bottom)?,
                        edge_values(Edge::Top)?,
                    ],
                })
            }
        }
    }

    pub fn from_problem(mesh: &TensorMesh, problem: &ManufacturedProblem) -> Result<Self> {
        use crate::problems::ReferenceField;
        Self::from_fn(mesh, |x, n| problem.normal_derivative(x, &n[..mesh.dim()]))
    }

    pub fn zero(mesh: &TensorMesh) -> Self {
        Self::from_fn(mesh, |_, _| 0.0).expect("zero data is finite")
    }
}

/// 1D inner-integral tables at a registered set of outer coordinates.
#[derive(Debug, Clone)]
pub struct InnerTables {
    kernel: KernelParams,
    dim: usize,
    n1: usize,
    coords: Vec<f64>,
    /// `I[s, j]`, row per coordinate.
    ints: Vec<f64>,
    /// `ψ_j(s)·m₁(s)`, row per coordinate.
    alpha: Vec<f64>,
    /// `m₁(s) = ∫_0^1 exp(-η²(s-t)²) dt`.
    mass1: Vec<f64>,
    /// `exp(-η²s²)` and `exp(-η²(1-s)²)`.
    e0: Vec<f64>,
    e1: Vec<f64>,
    /// 2D: `Σ_j b_edge[j]·I[s, j]` per edge; 1D: unused zeros.
    edge_src: Vec<[f64; 4]>,
    neumann: NeumannData,
}

/// Tabulates inner integrals at every coordinate in `coords` (any order, duplicates allowed).
pub fn build_inner_tables(
    mesh: &TensorMesh,
    kernel: &KernelParams,
    coords: &[f64],
    neumann: &NeumannData,
) -> Result<InnerTables> {
    InnerTables::build(mesh, kernel, coords, neumann)
}

impl InnerTables {
    pub fn build(mesh: &TensorMesh, kernel: &KernelParams, coords: &[f64], neumann: &NeumannData) -> Result<Self> {
        if kernel.dim() != mesh.dim() {
            return Err(Error::arg("kernel and mesh dimensions differ"));
        }
        match (neumann, mesh.dim()) {
            (NeumannData::OneD { at0, at1 }, 1) => {
                if !(at0.is_finite() && at1.is_finite()) {
                    return Err(Error::data("non-finite normal-derivative data"));
                }
            }
            (NeumannData::TwoD { edges }, 2) => {
                if edges.iter().any(|e| e.len() != mesh.nodes_per_dim()) {
                    return Err(Error::arg("edge data length does not match the mesh"));
                }
                if edges.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::data("non-finite normal-derivative data"));
                }
            }
            _ => return Err(Error::arg("boundary data dimension does not match the mesh")),
        }
        if let Some(bad) = coords.iter().find(|s| !(s.is_finite() && (0.0..=1.0).contains(*s))) {
            return Err(Error::arg(format!("outer coordinate {bad} outside [0, 1]")));
        }
        let mut coords = coords.to_vec();
        coords.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        coords.dedup();

        let eta = kernel.eta();
        let n1 = mesh.nodes_per_dim();
        let mut ints = Vec::with_capacity(coords.len() * n1);
        let mut alpha = Vec::with_capacity(coords.len() * n1);
        let mut mass1 = Vec::with_capacity(coords.len());
        let mut e0 = Vec::with_capacity(coords.len());
        let mut e1 = Vec::with_capacity(coords.len());
        let mut edge_src = Vec::with_capacity(coords.len());
        for &s in &coords {
            let row = kernel_integral_row(mesh, s, eta);
            let m = crate::kernel::unit_mass_1d(eta, s);
            alpha.extend((0..n1).map(|j| mesh.basis_eval_unchecked(j, s) * m));
            edge_src.push(match neumann {
                NeumannData::TwoD { edges } => {
                    let mut out = [0.0; 4];
                    for (slot, b) in out.iter_mut().zip(edges) {
                        *slot = b.iter().zip(&row).map(|(b, i)| b * i).sum();
                    }
                    out
                }
                NeumannData::OneD { .. } => [0.0; 4],
            });
            ints.extend(row);
            mass1.push(m);
            e0.push(kernel.gauss_1d(s));
            e1.push(kernel.gauss_1d(1.0 - s));
        }
        let tables = Self {
            kernel: *kernel,
            dim: mesh.dim(),
            n1,
            coords,
            ints,
            alpha,
            mass1,
            e0,
            e1,
            edge_src,
            neumann: neumann.clone(),
        };
        if let Some(k) = tables.ints.iter().position(|v| !v.is_finite()) {
            return Err(Error::AssemblyFailure {
                point: vec![tables.coords[k / n1]],
                reason: "non-finite inner integral".into(),
            });
        }
        Ok(tables)
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Position of a registered coordinate.
    pub fn coord_index(&self, s: f64) -> Result<usize> {
        self.coords
            .binary_search_by(|c| c.partial_cmp(&s).unwrap_or(std::cmp::Ordering::Less))
            .map_err(|_| Error::arg(format!("coordinate {s} is not a registered outer point")))
    }

    fn point_indices(&self, x: &[f64]) -> Result<[usize; 2]> {
        if x.len() != self.dim {
            return Err(Error::arg(format!("point {x:?} does not have dimension {}", self.dim)));
        }
        let mut out = [0; 2];
        for (slot, &s) in out.iter_mut().zip(x) {
            *slot = self.coord_index(s)?;
        }
        Ok(out)
    }

    pub fn inner_row(&self, k: usize) -> &[f64] {
        &self.ints[k * self.n1..(k + 1) * self.n1]
    }

    fn alpha_row(&self, k: usize) -> &[f64] {
        &self.alpha[k * self.n1..(k + 1) * self.n1]
    }

    /// `I[s, j]` for a registered `s`.
    pub fn inner_integral(&self, s: f64, j: usize) -> Result<f64> {
        let k = self.coord_index(s)?;
        self.inner_row(k).get(j).copied().ok_or_else(|| Error::arg(format!("basis index {j} out of range")))
    }

    /// `∫_Ω R_δ(x, y) ψ_dof(y) dy = c_δ ∏_k I[x_k, j_k]`.
    pub fn kernel_basis_integral(&self, x: &[f64], dof: &DofIndex) -> Result<f64> {
        let idx = self.point_indices(x)?;
        let js = dof.as_slice();
        if js.len() != self.dim || js.iter().any(|&j| j >= self.n1) {
            return Err(Error::arg("dof index does not match the tables"));
        }
        Ok(self.kernel.c_delta() * (0..self.dim).map(|d| self.inner_row(idx[d])[js[d]]).product::<f64>())
    }

    /// `∫_Ω R_δ(x, y) dy` at a registered point.
    pub fn mass(&self, x: &[f64]) -> Result<f64> {
        let idx = self.point_indices(x)?;
        Ok(self.kernel.c_delta() * idx[..self.dim].iter().map(|&k| self.mass1[k]).product::<f64>())
    }

    fn source_at(&self, idx: [usize; 2]) -> f64 {
        let half_c = 0.5 * self.kernel.c_delta();
        match &self.neumann {
            NeumannData::OneD { at0, at1 } => {
                let p = idx[0];
                half_c * (self.e0[p] * at0 + self.e1[p] * at1)
            }
            NeumannData::TwoD { .. } => {
                let [p, q] = idx;
                let (sp, sq) = (&self.edge_src[p], &self.edge_src[q]);
                half_c * (self.e0[p] * sq[0] + self.e1[p] * sq[1] + self.e0[q] * sp[2] + self.e1[q] * sp[3])
            }
        }
    }

    /// Boundary source `G_b(x) = 2 ∫_∂Ω R̄_δ(x, y) b(y) dS(y)`.
    pub fn source(&self, x: &[f64]) -> Result<f64> {
        Ok(self.source_at(self.point_indices(x)?))
    }

    /// Row `G(x)` with `g(x) = G(x)·u − G_b(x)`, and `G_b(x)`.
    ///
    /// `G(x)_dof = δ⁻²[ψ_dof(x)·m(x) − c_δ ∏_k I[x_k, j_k]]`.
    pub fn eval_g_row(&self, mesh: &TensorMesh, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        if mesh.nodes_per_dim() != self.n1 || mesh.dim() != self.dim {
            return Err(Error::arg("mesh does not match the tables"));
        }
        let idx = self.point_indices(x)?;
        let scale = self.kernel.c_delta() / (self.kernel.delta() * self.kernel.delta());
        let row = match self.dim {
            1 => {
                let (a, i) = (self.alpha_row(idx[0]), self.inner_row(idx[0]));
                a.iter().zip(i).map(|(a, i)| scale * (a - i)).collect()
            }
            _ => {
                let (a1, i1) = (self.alpha_row(idx[0]), self.inner_row(idx[0]));
                let (a2, i2) = (self.alpha_row(idx[1]), self.inner_row(idx[1]));
                let mut row = Vec::with_capacity(self.n1 * self.n1);
                for j1 in 0..self.n1 {
                    for j2 in 0..self.n1 {
                        row.push(scale * (a1[j1] * a2[j2] - i1[j1] * i2[j2]));
                    }
                }
                row
            }
        };
        Ok((row, self.source_at(idx)))
    }

    /// Row `H(x)` with `h(x) = a(x)·k(x) − H(x)·u`, and `a(x)·k(x)`.
    pub fn eval_h_row(&self, mesh: &TensorMesh, x: &[f64], a: f64) -> Result<(Vec<f64>, f64)> {
        if mesh.nodes_per_dim() != self.n1 || mesh.dim() != self.dim {
            return Err(Error::arg("mesh does not match the tables"));
        }
        if x.len() != self.dim || !x.iter().any(|&s| s == 0.0 || s == 1.0) {
            return Err(Error::arg(format!("point {x:?} is not on the boundary")));
        }
        let idx = self.point_indices(x)?;
        let c = self.kernel.c_delta();
        let row = match self.dim {
            1 => self.inner_row(idx[0]).iter().map(|i| c * i).collect(),
            _ => {
                let (i1, i2) = (self.inner_row(idx[0]), self.inner_row(idx[1]));
                i1.iter().flat_map(|&u| i2.iter().map(move |&v| c * u * v)).collect()
            }
        };
        let k = c * idx[..self.dim].iter().map(|&k| self.mass1[k]).product::<f64>();
        Ok((row, a * k))
    }
}

/// Dense quadratic form `F(u) = uᵀAu − 2·rhsᵀu + constant`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub dim: usize,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub constant: f64,
}

impl LinearSystem {
    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        (u.transpose() * &self.matrix * &u)[(0, 0)] - 2.0 * self.rhs.dot(&u) + self.constant
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..i).all(|j| self.matrix[(i, j)].to_bits() == self.matrix[(j, i)].to_bits()))
    }

    /// Plain-text dump: `dim n`, then the rhs, then the lower triangle row by row.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let n = self.size();
        writeln!(w, "{} {}", self.dim, n)?;
        for v in self.rhs.iter() {
            writeln!(w, "{}", fmt17(*v))?;
        }
        for i in 0..n {
            let line: Vec<String> = (0..=i).map(|j| fmt17(self.matrix[(i, j)])).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Decimal with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// A boundary quadrature point of the penalty integral.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub x: [f64; 2],
    pub weight: f64,
    /// Dirichlet datum `a(x)`.
    pub a: f64,
}

/// Everything needed to evaluate or assemble the discrete energy for one
/// `(mesh, δ, ξ, problem)` combination.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: TensorMesh,
    kernel: KernelParams,
    xi: f64,
    outer: QuadRule,
    tables: InnerTables,
    load: Vec<f64>,
    boundary: Vec<BoundaryPoint>,
}

fn outer_product_sum<'a>(n: usize, terms: impl Iterator<Item = (f64, &'a [f64], &'a [f64])>) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for (w, x, y) in terms {
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let wx = w * xi;
            let row = &mut m[i * n..(i + 1) * n];
            for (r, &yj) in row.iter_mut().zip(y) {
                *r += wx * yj;
            }
        }
    }
    m
}

fn weighted_sum<'a>(n: usize, terms: impl Iterator<Item = (f64, &'a [f64])>) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for (w, x) in terms {
        for (acc, &xi) in v.iter_mut().zip(x) {
            *acc += w * xi;
        }
    }
    v
}

impl Discretization {
    pub fn new(mesh: &TensorMesh, kernel: &KernelParams, problem: &ManufacturedProblem, xi: f64) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::arg(format!("penalty weight must be positive, got {xi}")));
        }
        if problem.dim() != mesh.dim() || kernel.dim() != mesh.dim() {
            return Err(Error::arg(format!(
                "dimension mismatch: mesh {}, kernel {}, problem `{}` {}",
                mesh.dim(),
                kernel.dim(),
                problem.name(),
                problem.dim()
            )));
        }
        let outer = composite_layered_rule(mesh, kernel.delta())?;
        let mut coords = outer.points.clone();
        coords.extend([0.0, 1.0]);
        let neumann = NeumannData::from_problem(mesh, problem)?;
        let tables = InnerTables::build(mesh, kernel, &coords, &neumann)?;

        let node_w = simpson38_node_weights(mesh);
        let load = (0..mesh.n_dofs())
            .map(|lin| {
                let dof = mesh.dof_index(lin);
                let x = mesh.node_point(&dof);
                let f = problem.load(&x);
                if !f.is_finite() {
                    return Err(Error::AssemblyFailure { point: x, reason: format!("non-finite load {f}") });
                }
                Ok(dof.as_slice().iter().map(|&j| node_w[j]).product::<f64>() * f)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut boundary = Vec::new();
        match mesh.dim() {
            1 => {
                for x in [0.0, 1.0] {
                    boundary.push(BoundaryPoint { x: [x, 0.0], weight: 1.0, a: problem.dirichlet(&[x]) });
                }
            }
            _ => {
                for edge in Edge::ALL {
                    for (&t, &w) in outer.points.iter().zip(&outer.weights) {
                        let x = edge.point(t);
                        boundary.push(BoundaryPoint { x, weight: w, a: problem.dirichlet(&x) });
                    }
                }
            }
        }
        if let Some(bp) = boundary.iter().find(|bp| !bp.a.is_finite()) {
            return Err(Error::AssemblyFailure {
                point: bp.x[..mesh.dim()].to_vec(),
                reason: format!("non-finite Dirichlet datum {}", bp.a),
            });
        }
        Ok(Self { mesh: *mesh, kernel: *kernel, xi, outer, tables, load, boundary })
    }

    pub fn mesh(&self) -> &TensorMesh {
        &self.mesh
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn tables(&self) -> &InnerTables {
        &self.tables
    }

    /// 1D outer rule; the interior rule is its tensor power.
    pub fn outer_rule(&self) -> &QuadRule {
        &self.outer
    }

    pub fn boundary_points(&self) -> &[BoundaryPoint] {
        &self.boundary
    }

    pub fn load_vector(&self) -> &[f64] {
        &self.load
    }

    /// Interior outer quadrature points with their weights.
    pub fn interior_points(&self) -> Vec<([f64; 2], f64)> {
        let r = &self.outer;
        match self.mesh.dim() {
            1 => r.points.iter().zip(&r.weights).map(|(&p, &w)| ([p, 0.0], w)).collect(),
            _ => r
                .points
                .iter()
                .zip(&r.weights)
                .flat_map(|(&p, &wp)| r.points.iter().zip(&r.weights).map(move |(&q, &wq)| ([p, q], wp * wq)))
                .collect(),
        }
    }

    fn coord_rows(&self) -> Vec<usize> {
        self.outer.points.iter().map(|&p| self.tables.coord_index(p).expect("registered")).collect()
    }

    /// `g(x_q)` for the V_h function `u` at every interior outer point (x-major).
    ///
    /// Evaluated point by point from the definition of `g`; this path is
    /// independent of the Kronecker-structured assembly.
    pub fn g_values(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.mesh.n_dofs() {
            return Err(Error::arg("coefficient vector does not match the mesh"));
        }
        let t = &self.tables;
        let scale = self.kernel.c_delta() / (self.kernel.delta() * self.kernel.delta());
        let rows = self.coord_rows();
        let n1 = self.mesh.nodes_per_dim();
        Ok(match self.mesh.dim() {
            1 => rows
                .iter()
                .map(|&k| {
                    let gu: f64 = t.alpha_row(k).iter().zip(t.inner_row(k)).zip(u).map(|((a, i), u)| (a - i) * u).sum();
                    scale * gu - t.source_at([k, 0])
                })
                .collect(),
            _ => {
                // U·α_q and U·I_q for every x₂ coordinate q, with U[j1][j2] = u[j1·n1 + j2].
                let apply = |v: &[f64]| -> Vec<f64> {
                    (0..n1).map(|j1| u[j1 * n1..(j1 + 1) * n1].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
                };
                let ua: Vec<Vec<f64>> = rows.iter().map(|&k| apply(t.alpha_row(k))).collect();
                let ui: Vec<Vec<f64>> = rows.iter().map(|&k| apply(t.inner_row(k))).collect();
                let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                let mut out = Vec::with_capacity(rows.len() * rows.len());
                for &kp in &rows {
                    let (ap, ip) = (t.alpha_row(kp), t.inner_row(kp));
                    for (iq, &kq) in rows.iter().enumerate() {
                        let gu = dot(ap, &ua[iq]) - dot(ip, &ui[iq]);
                        out.push(scale * gu - t.source_at([kp, kq]));
                    }
                }
                out
            }
        })
    }

    /// `h(x)` at every boundary point, in the order of [`Self::boundary_points`].
    pub fn h_values(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.boundary
            .iter()
            .map(|bp| {
                let (row, ak) = self.tables.eval_h_row(&self.mesh, &bp.x[..self.mesh.dim()], bp.a)?;
                Ok(ak - row.iter().zip(u).map(|(r, u)| r * u).sum::<f64>())
            })
            .collect()
    }

    /// Discrete energy evaluated directly by quadrature of `|g|²`, `f·u` and `|h|²`.
    pub fn functional(&self, u: &[f64]) -> Result<f64> {
        let g = self.g_values(u)?;
        let interior: f64 = self.interior_points().iter().zip(&g).map(|((_, w), g)| w * g * g).sum();
        let load: f64 = self.load.iter().zip(u).map(|(l, u)| l * u).sum();
        let h = self.h_values(u)?;
        let penalty: f64 = self.boundary.iter().zip(&h).map(|(bp, h)| bp.weight * h * h).sum();
        Ok(interior - 2.0 * load + penalty / self.xi)
    }

    /// Assembles the SPD system whose solution minimizes the discrete energy.
    pub fn assemble(&self) -> Result<LinearSystem> {
        let system = match self.mesh.dim() {
            1 => self.assemble_1d(),
            _ => self.assemble_2d(),
        };
        if let Some(k) = system.rhs.iter().position(|v| !v.is_finite()) {
            let x = self.mesh.node_point(&self.mesh.dof_index(k));
            return Err(Error::AssemblyFailure { point: x, reason: "non-finite right-hand side".into() });
        }
        if let Some(k) = system.matrix.iter().position(|v| !v.is_finite()) {
            let n = system.size();
            let x = self.mesh.node_point(&self.mesh.dof_index(k % n));
            return Err(Error::AssemblyFailure { point: x, reason: "non-finite matrix entry".into() });
        }
        if !system.constant.is_finite() {
            return Err(Error::AssemblyFailure { point: vec![], reason: "non-finite energy constant".into() });
        }
        Ok(system)
    }

    fn d_rows(&self, rows: &[usize]) -> Vec<Vec<f64>> {
        let t = &self.tables;
        rows.iter().map(|&k| t.alpha_row(k).iter().zip(t.inner_row(k)).map(|(a, i)| a - i).collect()).collect()
    }

    fn assemble_1d(&self) -> LinearSystem {
        let t = &self.tables;
        let n = self.mesh.nodes_per_dim();
        let c = self.kernel.c_delta();
        let s = c / (self.kernel.delta() * self.kernel.delta());
        let rows = self.coord_rows();
        let w = &self.outer.weights;
        let d = self.d_rows(&rows);

        let dd = outer_product_sum(n, w.iter().zip(&d).map(|(&w, d)| (w, d.as_slice(), d.as_slice())));
        let ends: Vec<usize> = [0.0, 1.0].iter().map(|&x| t.coord_index(x).expect("registered")).collect();
        let pen = outer_product_sum(n, ends.iter().map(|&k| (1.0, t.inner_row(k), t.inner_row(k))));
        let pen_scale = c * c / self.xi;
        let mut matrix: Vec<f64> = dd.iter().zip(&pen).map(|(a, p)| s * s * a + pen_scale * p).collect();
        symmetrize_from_lower(&mut matrix, n);

        let gb: Vec<f64> = rows.iter().map(|&k| t.source_at([k, 0])).collect();
        let interior_rhs = weighted_sum(n, w.iter().zip(&gb).zip(&d).map(|((&w, &g), d)| (s * w * g, d.as_slice())));
        let pen_rhs = weighted_sum(
            n,
            self.boundary.iter().zip(&ends).map(|(bp, &k)| (pen_scale * bp.a * t.mass1[k], t.inner_row(k))),
        );
        let rhs: Vec<f64> = (0..n).map(|i| interior_rhs[i] + self.load[i] + pen_rhs[i]).collect();

        let gb2: f64 = w.iter().zip(&gb).map(|(w, g)| w * g * g).sum();
        let ak2: f64 = self.boundary.iter().zip(&ends).map(|(bp, &k)| (bp.a * c * t.mass1[k]).powi(2)).sum();
        LinearSystem {
            dim: 1,
            matrix: DMatrix::from_vec(n, n, matrix),
            rhs: DVector::from_vec(rhs),
            constant: gb2 + ak2 / self.xi,
        }
    }

    fn assemble_2d(&self) -> LinearSystem {
        let t = &self.tables;
        let n1 = self.mesh.nodes_per_dim();
        let n = n1 * n1;
        let c = self.kernel.c_delta();
        let s = c / (self.kernel.delta() * self.kernel.delta());
        let pen_scale = c * c / self.xi;
        let rows = self.coord_rows();
        let w = &self.outer.weights;
        let d = self.d_rows(&rows);
        let alpha: Vec<&[f64]> = rows.iter().map(|&k| t.alpha_row(k)).collect();
        let ints: Vec<&[f64]> = rows.iter().map(|&k| t.inner_row(k)).collect();
        let gram = |x: &[&[f64]], y: &[&[f64]]| {
            outer_product_sum(n1, w.iter().zip(x.iter().zip(y)).map(|(&w, (x, y))| (w, *x, *y)))
        };
        let dref: Vec<&[f64]> = d.iter().map(|v| v.as_slice()).collect();
        let m_dd = gram(&dref, &dref);
        let m_aa = gram(&alpha, &alpha);
        let m_di = gram(&dref, &ints);
        let m_ad = gram(&alpha, &dref);
        let m_id = gram(&ints, &dref);
        let m_da = gram(&dref, &alpha);
        let m_ii = gram(&ints, &ints);
        let (k0, k1) = (t.coord_index(0.0).expect("registered"), t.coord_index(1.0).expect("registered"));
        let b_ends = outer_product_sum(n1, [k0, k1].iter().map(|&k| (1.0, t.inner_row(k), t.inner_row(k))));

        // g-row G(p,q) = s·(D_p ⊗ α_q + I_p ⊗ D_q); penalty rows c·I_0 ⊗ I_q etc.
        let s2 = s * s;
        let terms: [(f64, &[f64], &[f64]); 6] = [
            (s2, &m_dd, &m_aa),
            (s2, &m_di, &m_ad),
            (s2, &m_id, &m_da),
            (s2, &m_ii, &m_dd),
            (pen_scale, &b_ends, &m_ii),
            (pen_scale, &m_ii, &b_ends),
        ];
        let mut matrix = vec![0.0; n * n];
        for j1 in 0..n1 {
            for k1 in 0..=j1 {
                let coef: [f64; 6] = std::array::from_fn(|i| terms[i].0 * terms[i].1[j1 * n1 + k1]);
                for j2 in 0..n1 {
                    let r = j1 * n1 + j2;
                    let k2_end = if k1 == j1 { j2 + 1 } else { n1 };
                    let out = &mut matrix[r * n + k1 * n1..r * n + k1 * n1 + k2_end];
                    for (k2, o) in out.iter_mut().enumerate() {
                        let idx = j2 * n1 + k2;
                        *o = coef[0] * terms[0].2[idx]
                            + coef[1] * terms[1].2[idx]
                            + coef[2] * terms[2].2[idx]
                            + coef[3] * terms[3].2[idx]
                            + coef[4] * terms[4].2[idx]
                            + coef[5] * terms[5].2[idx];
                    }
                }
            }
        }
        symmetrize_from_lower(&mut matrix, n);

        // Boundary source G_b(p,q) = (c/2)·Σ φ(p)·χ(q) over the four edges.
        let e0: Vec<f64> = rows.iter().map(|&k| t.e0[k]).collect();
        let e1: Vec<f64> = rows.iter().map(|&k| t.e1[k]).collect();
        let src = |edge: usize| -> Vec<f64> { rows.iter().map(|&k| t.edge_src[k][edge]).collect() };
        let (src_l, src_r, src_b, src_t) = (src(0), src(1), src(2), src(3));
        let separable: [(&[f64], &[f64]); 4] = [(&e0, &src_l), (&e1, &src_r), (&src_b, &e0), (&src_t, &e1)];
        let wsum = |phi: &[f64], x: &[&[f64]]| weighted_sum(n1, w.iter().zip(phi).zip(x).map(|((&w, &f), x)| (w * f, *x)));
        let mut rhs = self.load.clone();
        let rs = 0.5 * c * s;
        for (phi, chi) in separable {
            let (vd, va) = (wsum(phi, &dref), wsum(chi, &alpha));
            let (vi, vdq) = (wsum(phi, &ints), wsum(chi, &dref));
            for j1 in 0..n1 {
                for j2 in 0..n1 {
                    rhs[j1 * n1 + j2] += rs * (vd[j1] * va[j2] + vi[j1] * vdq[j2]);
                }
            }
        }
        // Penalty source: (1/ξ)·Σ w·a·k·H along each edge.
        let per_edge = self.outer.len();
        for (e, edge) in Edge::ALL.iter().enumerate() {
            let bps = &self.boundary[e * per_edge..(e + 1) * per_edge];
            let (axis, v) = edge.fixed();
            let kf = if v == 0.0 { k0 } else { k1 };
            let along = weighted_sum(
                n1,
                bps.iter().zip(&rows).map(|(bp, &k)| (bp.weight * bp.a * t.mass1[k], t.inner_row(k))),
            );
            let fixed_row = t.inner_row(kf);
            let scale = pen_scale * t.mass1[kf];
            for j1 in 0..n1 {
                for j2 in 0..n1 {
                    let v = if axis == 0 { fixed_row[j1] * along[j2] } else { along[j1] * fixed_row[j2] };
                    rhs[j1 * n1 + j2] += scale * v;
                }
            }
        }

        let mut gb2 = 0.0;
        for (ip, &kp) in rows.iter().enumerate() {
            for (iq, &kq) in rows.iter().enumerate() {
                let g = t.source_at([kp, kq]);
                gb2 += w[ip] * w[iq] * g * g;
            }
        }
        let ak2: f64 = self
            .boundary
            .iter()
            .map(|bp| {
                let k = c * t.mass1[t.coord_index(bp.x[0]).expect("registered")]
                    * t.mass1[t.coord_index(bp.x[1]).expect("registered")];
                bp.weight * (bp.a * k).powi(2)
            })
            .sum();
        LinearSystem {
            dim: 2,
            matrix: DMatrix::from_vec(n, n, matrix),
            rhs: DVector::from_vec(rhs),
            constant: gb2 + ak2 / self.xi,
        }
    }
}

/// Copies the strict lower triangle of a row-major square matrix onto the upper one.
fn symmetrize_from_lower(m: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            m[j * n + i] = m[i * n + j];
        }
    }
}

/// Assembles `A`, `rhs` and the energy constant for penalty weight `xi`.
pub fn assemble_system(
    mesh: &TensorMesh,
    kernel: &KernelParams,
    problem: &ManufacturedProblem,
    xi: f64,
) -> Result<LinearSystem> {
    Discretization::new(mesh, kernel, problem, xi)?.assemble()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin_poly10, builtin_xlog, custom_problem};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn affine(dim: usize) -> ManufacturedProblem {
        custom_problem(
            "affine",
            dim,
            Arc::new(|x| 0.5 + 2.0 * x[0] - if x.len() > 1 { 3.0 * x[1] } else { 0.0 }),
            Arc::new(|_| [2.0, -3.0]),
            Arc::new(|_| 0.0),
        )
        .unwrap()
    }

    fn zero(dim: usize) -> ManufacturedProblem {
        custom_problem("zero", dim, Arc::new(|_| 0.0), Arc::new(|_| [0.0, 0.0]), Arc::new(|_| 0.0)).unwrap()
    }

    fn oracle_basis_integral(mesh: &TensorMesh, j: usize, s: f64, eta: f64) -> f64 {
        mesh.support_cells(j)
            .map(|cell| {
                let (a, b) = mesh.cell_bounds(cell);
                let basis = mesh.local_basis(j, cell).unwrap();
                let breaks = nlbh_oracle::gaussian_breaks(s, 1.0 / eta, 8);
                nlbh_oracle::integrate(|t| (-(eta * (s - t)).powi(2)).exp() * basis.eval(t), a, b, &breaks, 1e-15, 1e-13)
            })
            .sum()
    }

    fn random_u(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn basis_integrals_match_oracle() {
        let mesh = TensorMesh::new(5, 1).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let j = rng.gen_range(0..mesh.nodes_per_dim());
            let s: f64 = rng.gen_range(0.0..1.0);
            let eta = [1.0, 10.0, 40.0, 100.0][rng.gen_range(0..4)];
            let closed = basis_kernel_integral(&mesh, j, s, eta).unwrap();
            let oracle = oracle_basis_integral(&mesh, j, s, eta);
            assert!((closed - oracle).abs() <= 1e-12, "{j} {s} {eta}: {closed} {oracle}");
            assert!((kernel_integral_row(&mesh, s, eta)[j] - closed).abs() <= 1e-15);
        }
    }

    #[test]
    fn far_basis_integral_vanishes() {
        let mesh = TensorMesh::new(10, 1).unwrap();
        let v = basis_kernel_integral(&mesh, 0, 0.9, 100.0).unwrap();
        assert!(v.abs() < 1e-300);
        assert!(basis_kernel_integral(&mesh, 31, 0.5, 1.0).is_err());
        assert!(basis_kernel_integral(&mesh, 0, 1.5, 1.0).is_err());
        assert!(basis_kernel_integral(&mesh, 0, 0.5, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn inner_rows_partition_unity(n in 1usize..12, s in 0.0f64..=1.0, eta in 1.0f64..200.0) {
            let mesh = TensorMesh::new(n, 1).unwrap();
            let sum: f64 = kernel_integral_row(&mesh, s, eta).iter().sum();
            let m = crate::kernel::unit_mass_1d(eta, s);
            prop_assert!((sum - m).abs() <= 1e-12 * m.max(1e-300) + 1e-15, "{} vs {}", sum, m);
        }
    }

    #[test]
    fn boundary_source_1d() {
        let mesh = TensorMesh::new(10, 1).unwrap();
        let kernel = KernelParams::new(0.1, 1).unwrap();
        let neumann = NeumannData::from_problem(&mesh, &builtin_poly10()).unwrap();
        assert_eq!(neumann, NeumannData::OneD { at0: 0.0, at1: 10.0 });
        let t = InnerTables::build(&mesh, &kernel, &[1.0, 0.0, 0.5], &neumann).unwrap();
        let gb = t.source(&[1.0]).unwrap();
        assert!((gb - 5.0 * kernel.c_delta()).abs() < 1e-12 * gb);
        assert!((gb - 112.838).abs() < 1e-3);
        assert!(t.source(&[0.3]).is_err());
    }

    #[test]
    fn affine_g_vanishes() {
        for dim in [1, 2] {
            for n in [3, 10] {
                for delta in [0.1, 0.025] {
                    let mesh = TensorMesh::new(n, dim).unwrap();
                    let kernel = KernelParams::new(delta, dim).unwrap();
                    let p = affine(dim);
                    let disc = Discretization::new(&mesh, &kernel, &p, 1.0).unwrap();
                    let u = mesh.interpolate(|x| p.u_gt(x)).unwrap();
                    let g = disc.g_values(&u).unwrap();
                    let tol = 1e-10 * kernel.c_delta() / (delta * delta);
                    let worst = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    assert!(worst <= tol, "dim {dim} N {n} delta {delta}: {worst} > {tol}");
                }
            }
        }
    }

    #[test]
    fn g_approximates_minus_laplacian() {
        let mesh = TensorMesh::new(10, 1).unwrap();
        let u = mesh.interpolate(|x| x[0] * x[0]).unwrap();
        let mut last = f64::INFINITY;
        for delta in [0.02, 0.01] {
            let kernel = KernelParams::new(delta, 1).unwrap();
            let neumann = NeumannData::OneD { at0: 0.0, at1: 2.0 };
            let t = InnerTables::build(&mesh, &kernel, &[0.5], &neumann).unwrap();
            let (row, gb) = t.eval_g_row(&mesh, &[0.5]).unwrap();
            let g: f64 = row.iter().zip(&u).map(|(r, u)| r * u).sum::<f64>() - gb;
            let err = (g + 2.0).abs();
            // Rounding in δ⁻²(ψ·m − I) grows like k/δ²; below that floor errors are not comparable.
            let floor = 50.0 * f64::EPSILON * kernel.kernel_mass() / (delta * delta);
            assert!(err <= 1e-6, "delta {delta}: g = {g}");
            assert!(err <= last.max(floor), "delta {delta}: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn h_rows_sum_to_mass() {
        let mesh = TensorMesh::new(6, 1).unwrap();
        let kernel = KernelParams::new(0.05, 1).unwrap();
        let t = InnerTables::build(&mesh, &kernel, &[0.0, 1.0, 0.4], &NeumannData::zero(&mesh)).unwrap();
        for x in [0.0, 1.0] {
            let (row, ak) = t.eval_h_row(&mesh, &[x], 1.0).unwrap();
            let sum: f64 = row.iter().sum();
            assert!((sum - ak).abs() < 1e-13 * ak);
            assert!((ak - 2.0).abs() < 1e-12, "k({x}) = {ak}");
            assert!((t.mass(&[x]).unwrap() - ak).abs() < 1e-15);
        }
        assert!(t.eval_h_row(&mesh, &[0.4], 1.0).is_err());

        let mesh2 = TensorMesh::new(3, 2).unwrap();
        let kernel2 = KernelParams::new(0.05, 2).unwrap();
        let t2 = InnerTables::build(&mesh2, &kernel2, &[0.0, 0.5, 1.0], &NeumannData::zero(&mesh2)).unwrap();
        let (row, k) = t2.eval_h_row(&mesh2, &[0.5, 1.0], 1.0).unwrap();
        assert!((row.iter().sum::<f64>() - k).abs() < 1e-12 * k);
        assert!((k - 2.0).abs() < 1e-9);
        let (_, kc) = t2.eval_h_row(&mesh2, &[0.0, 0.0], 1.0).unwrap();
        assert!((kc - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separable_integral_matches_product() {
        let mesh = TensorMesh::new(4, 2).unwrap();
        let kernel = KernelParams::new(0.1, 2).unwrap();
        let t = InnerTables::build(&mesh, &kernel, &[0.3, 0.77], &NeumannData::zero(&mesh)).unwrap();
        let dof = DofIndex::new_2d(4, 9);
        let v = t.kernel_basis_integral(&[0.3, 0.77], &dof).unwrap();
        let expect = kernel.c_delta()
            * basis_kernel_integral(&mesh, 4, 0.3, 10.0).unwrap()
            * basis_kernel_integral(&mesh, 9, 0.77, 10.0).unwrap();
        assert!((v - expect).abs() <= 1e-14 * expect.abs());
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        for dim in [1, 2] {
            let mesh = TensorMesh::new(3, dim).unwrap();
            let kernel = KernelParams::new(0.1, dim).unwrap();
            let sys = assemble_system(&mesh, &kernel, &zero(dim), 0.01).unwrap();
            assert!(sys.rhs.iter().all(|&v| v == 0.0));
            assert_eq!(sys.constant, 0.0);
        }
    }

    #[test]
    fn single_cell_system() {
        let mesh = TensorMesh::new(1, 1).unwrap();
        let kernel = KernelParams::new(0.1, 1).unwrap();
        let sys = assemble_system(&mesh, &kernel, &builtin_poly10(), 0.1 / 1000.0).unwrap();
        assert_eq!(sys.size(), 4);
        assert!(sys.is_exactly_symmetric());
        assert!(sys.matrix.clone().cholesky().is_some());
    }

    #[test]
    fn invalid_inputs() {
        let mesh = TensorMesh::new(2, 1).unwrap();
        let kernel = KernelParams::new(0.1, 1).unwrap();
        let p = builtin_poly10();
        assert!(matches!(Discretization::new(&mesh, &kernel, &p, 0.0), Err(Error::InvalidArgument(_))));
        assert!(Discretization::new(&mesh, &kernel, &p, -1.0).is_err());
        assert!(Discretization::new(&mesh, &kernel, &builtin_xlog(), 1.0).is_err());
        let two = TensorMesh::new(2, 2).unwrap();
        assert!(InnerTables::build(&two, &kernel, &[0.5], &NeumannData::zero(&two)).is_err());
        assert!(InnerTables::build(&mesh, &kernel, &[1.5], &NeumannData::zero(&mesh)).is_err());
        assert!(InnerTables::build(&mesh, &kernel, &[0.5], &NeumannData::OneD { at0: f64::NAN, at1: 0.0 }).is_err());
    }

    #[test]
    fn quadratic_form_reproduces_functional() {
        for (dim, n, delta, xi) in [(1, 5, 0.05, 0.05 / 1000.0), (1, 20, 0.0125, 1e-5), (2, 3, 0.1, 0.01), (2, 4, 0.03, 0.003)] {
            let mesh = TensorMesh::new(n, dim).unwrap();
            let kernel = KernelParams::new(delta, dim).unwrap();
            let p = if dim == 1 { builtin_poly10() } else { builtin_xlog() };
            let disc = Discretization::new(&mesh, &kernel, &p, xi).unwrap();
            let sys = disc.assemble().unwrap();
            for seed in 0..100 {
                let u = random_u(mesh.n_dofs(), seed);
                let direct = disc.functional(&u).unwrap();
                let quad = sys.quadratic_form(&u);
                assert!((direct - quad).abs() <= 1e-12 * direct.abs(), "dim {dim}: {direct} vs {quad}");
            }
        }
    }

    /// Rank-one accumulation from explicit rows, the textbook form of the assembly.
    fn direct_system(disc: &Discretization) -> (DMatrix<f64>, DVector<f64>, f64) {
        let mesh = disc.mesh();
        let n = mesh.n_dofs();
        let mut a = DMatrix::zeros(n, n);
        let mut rhs = DVector::from_column_slice(disc.load_vector());
        let mut constant = 0.0;
        for (x, w) in disc.interior_points() {
            let (row, gb) = disc.tables().eval_g_row(mesh, &x[..mesh.dim()]).unwrap();
            let g = DVector::from_vec(row);
            a += w * &g * g.transpose();
            rhs += w * gb * &g;
            constant += w * gb * gb;
        }
        for bp in disc.boundary_points() {
            let (row, ak) = disc.tables().eval_h_row(mesh, &bp.x[..mesh.dim()], bp.a).unwrap();
            let h = DVector::from_vec(row);
            a += (bp.weight / disc.xi) * &h * h.transpose();
            rhs += (bp.weight / disc.xi * ak) * &h;
            constant += bp.weight / disc.xi * ak * ak;
        }
        (a, rhs, constant)
    }

    #[test]
    fn kronecker_assembly_matches_direct() {
        for (dim, n, delta) in [(1, 4, 0.05), (1, 3, 0.2), (2, 2, 0.1), (2, 3, 0.04)] {
            let mesh = TensorMesh::new(n, dim).unwrap();
            let kernel = KernelParams::new(delta, dim).unwrap();
            let p = if dim == 1 { builtin_poly10() } else { builtin_xlog() };
            let disc = Discretization::new(&mesh, &kernel, &p, delta / 10.0).unwrap();
            let sys = disc.assemble().unwrap();
            let (a, rhs, constant) = direct_system(&disc);
            let scale = a.amax();
            assert!((&sys.matrix - &a).amax() <= 1e-12 * scale, "dim {dim} N {n}");
            assert!((&sys.rhs - &rhs).amax() <= 1e-12 * rhs.amax());
            assert!((sys.constant - constant).abs() <= 1e-12 * constant.abs());
            assert!(sys.is_exactly_symmetric());
        }
    }

    #[test]
    fn dump_format() {
        let mesh = TensorMesh::new(1, 1).unwrap();
        let kernel = KernelParams::new(0.1, 1).unwrap();
        let sys = assemble_system(&mesh, &kernel, &builtin_poly10(), 1e-4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sys.txt");
        sys.write_dump(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1 4");
        assert_eq!(lines.len(), 1 + 4 + 4);
        for i in 0..4 {
            let v: f64 = lines[1 + i].parse().unwrap();
            assert_eq!(v.to_bits(), sys.rhs[i].to_bits());
            let row: Vec<f64> = lines[5 + i].split(' ').map(|s| s.parse().unwrap()).collect();
            assert_eq!(row.len(), i + 1);
            for (j, v) in row.iter().enumerate() {
                assert_eq!(v.to_bits(), sys.matrix[(i, j)].to_bits());
            }
        }
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
    }
}
