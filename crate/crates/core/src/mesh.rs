//! Uniform tensor-product mesh of `[0,1]^d` and the piecewise cubic Lagrange
//! basis attached to it.
//!
//! Along each axis the mesh has `N` cells `[i·h, (i+1)·h]` and `3N+1` nodes
//! `s_j = j·h/3`. Basis function `ψ_j` is the cubic Lagrange polynomial of its
//! node on every cell that contains that node, and zero elsewhere; nodes with
//! `j % 3 == 0` sit on cell boundaries and are shared by two cells.

use crate::error::{Error, Result};

/// Which one-sided limit to take at a cell interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Multi-index of a tensor-product basis function, one entry per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DofIndex {
    idx: [usize; 2],
    dim: usize,
}

impl DofIndex {
    pub fn new_1d(j: usize) -> Self {
        Self { idx: [j, 0], dim: 1 }
    }

    pub fn new_2d(j1: usize, j2: usize) -> Self {
        Self { idx: [j1, j2], dim: 2 }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.idx[..self.dim]
    }
}

/// One branch of a basis function: `(s-r₀)(s-r₁)(s-r₂) / denom`.
#[derive(Debug, Clone, Copy)]
pub struct LocalCubic {
    roots: [f64; 3],
    denom: f64,
}

impl LocalCubic {
    pub fn eval(&self, s: f64) -> f64 {
        let [a, b, c] = self.roots;
        (s - a) * (s - b) * (s - c) / self.denom
    }

    pub fn deriv(&self, s: f64) -> f64 {
        let [a, b, c] = self.roots;
        ((s - b) * (s - c) + (s - a) * (s - c) + (s - a) * (s - b)) / self.denom
    }

    /// Monomial coefficients `[c₀, c₁, c₂, c₃]` of `r ↦ p(s + r)`.
    pub fn shifted_monomials(&self, s: f64) -> [f64; 4] {
        let e = self.roots.map(|r| r - s);
        let k = 1.0 / self.denom;
        [
            -k * e[0] * e[1] * e[2],
            k * (e[0] * e[1] + e[0] * e[2] + e[1] * e[2]),
            -k * (e[0] + e[1] + e[2]),
            k,
        ]
    }
}

/// Uniform partition of `[0,1]^d` into `N^d` cells with the multi-cubic nodal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorMesh {
    n_cells: usize,
    dim: usize,
}

impl TensorMesh {
    pub fn new(n_cells: usize, dim: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::arg("mesh needs at least one cell per dimension"));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::arg(format!("dimension must be 1 or 2, got {dim}")));
        }
        Ok(Self { n_cells, dim })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// `3N + 1`.
    pub fn nodes_per_dim(&self) -> usize {
        3 * self.n_cells + 1
    }

    /// `(3N + 1)^d`.
    pub fn n_dofs(&self) -> usize {
        self.nodes_per_dim().pow(self.dim as u32)
    }

    /// Node coordinate `s_j = j·h/3`.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 / (3 * self.n_cells) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nodes_per_dim()).map(|j| self.node(j)).collect()
    }

    /// Endpoints of cell `e_i`. They coincide bit-for-bit with `node(3i)` and `node(3i+3)`.
    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.node(3 * i), self.node(3 * i + 3))
    }

    /// Row-major linearization `j₁·(3N+1) + j₂`.
    pub fn linear_index(&self, dof: &DofIndex) -> usize {
        let n1 = self.nodes_per_dim();
        dof.as_slice().iter().fold(0, |acc, &j| acc * n1 + j)
    }

    pub fn dof_index(&self, linear: usize) -> DofIndex {
        let n1 = self.nodes_per_dim();
        match self.dim {
            1 => DofIndex::new_1d(linear),
            _ => DofIndex::new_2d(linear / n1, linear % n1),
        }
    }

    /// Physical coordinates of a node multi-index.
    pub fn node_point(&self, dof: &DofIndex) -> Vec<f64> {
        dof.as_slice().iter().map(|&j| self.node(j)).collect()
    }

    /// Cell containing `s`; at an interface `side` selects the neighbour.
    pub fn cell_index(&self, s: f64, side: Side) -> usize {
        let n = self.n_cells;
        let t = s * n as f64;
        let r = t.round();
        if (t - r).abs() <= 1e-12 * t.abs().max(1.0) {
            let r = r.max(0.0) as usize;
            match side {
                Side::Left => r.saturating_sub(1).min(n - 1),
                Side::Right => r.min(n - 1),
            }
        } else {
            (t.floor().max(0.0) as usize).min(n - 1)
        }
    }

    /// The branch of `ψ_j` on cell `i`, if `ψ_j` does not vanish there.
    pub fn local_basis(&self, j: usize, cell: usize) -> Option<LocalCubic> {
        if cell >= self.n_cells || j < 3 * cell || j > 3 * cell + 3 {
            return None;
        }
        let xj = self.node(j);
        let mut roots = [0.0; 3];
        let mut denom = 1.0;
        let mut k = 0;
        for m in 3 * cell..=3 * cell + 3 {
            if m != j {
                let xm = self.node(m);
                roots[k] = xm;
                denom *= xj - xm;
                k += 1;
            }
        }
        Some(LocalCubic { roots, denom })
    }

    /// Cells on which `ψ_j` is supported (one or two).
    pub fn support_cells(&self, j: usize) -> impl Iterator<Item = usize> {
        let n = self.n_cells;
        let lo = if j.is_multiple_of(3) { (j / 3).saturating_sub(1) } else { j / 3 };
        let hi = (j / 3).min(n - 1);
        lo..=hi
    }

    fn check_basis_args(&self, j: usize, s: f64) -> Result<()> {
        if j >= self.nodes_per_dim() {
            return Err(Error::arg(format!("basis index {j} out of range 0..={}", 3 * self.n_cells)));
        }
        if !(s.is_finite() && (0.0..=1.0).contains(&s)) {
            return Err(Error::arg(format!("evaluation point {s} outside [0, 1]")));
        }
        Ok(())
    }

    /// `ψ_j(s)`; at interfaces the left cell's formula is used.
    pub fn basis_eval(&self, j: usize, s: f64) -> Result<f64> {
        self.check_basis_args(j, s)?;
        Ok(self.basis_eval_unchecked(j, s))
    }

    pub(crate) fn basis_eval_unchecked(&self, j: usize, s: f64) -> f64 {
        let cell = self.cell_index(s, Side::Left);
        self.local_basis(j, cell).map_or(0.0, |p| p.eval(s))
    }

    /// One-sided derivative `ψ_j'(s±)`.
    pub fn basis_deriv(&self, j: usize, s: f64, side: Side) -> Result<f64> {
        self.check_basis_args(j, s)?;
        let cell = self.cell_index(s, side);
        Ok(self.local_basis(j, cell).map_or(0.0, |p| p.deriv(s)))
    }

    pub fn multi_basis_eval(&self, dof: &DofIndex, x: &[f64]) -> Result<f64> {
        if dof.as_slice().len() != self.dim || x.len() != self.dim {
            return Err(Error::arg("dimension mismatch between mesh, dof and point"));
        }
        dof.as_slice().iter().zip(x).try_fold(1.0, |acc, (&j, &s)| Ok(acc * self.basis_eval(j, s)?))
    }

    /// Nodal interpolant: coefficient `values(node)` for every dof, in linear order.
    pub fn interpolate<F: Fn(&[f64]) -> f64>(&self, values: F) -> Result<Vec<f64>> {
        (0..self.n_dofs())
            .map(|lin| {
                let x = self.node_point(&self.dof_index(lin));
                let v = values(&x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::data(format!("non-finite value {v} at node {x:?}")))
                }
            })
            .collect()
    }

    /// Values (`deriv = None`) or one-sided derivatives of the 1D basis branches
    /// active at `s`, as `(j, value)` pairs.
    fn active_1d(&self, s: f64, deriv: Option<Side>) -> [(usize, f64); 4] {
        let side = deriv.unwrap_or(Side::Left);
        let cell = self.cell_index(s, side);
        let mut out = [(0, 0.0); 4];
        for (m, slot) in out.iter_mut().enumerate() {
            let j = 3 * cell + m;
            let p = self.local_basis(j, cell).expect("local node belongs to its cell");
            *slot = (j, if deriv.is_some() { p.deriv(s) } else { p.eval(s) });
        }
        out
    }

    /// Evaluates `Σ coeffs[dof]·ψ_dof(x)`.
    pub fn evaluate(&self, coeffs: &[f64], x: &[f64]) -> Result<f64> {
        self.evaluate_with(coeffs, x, None)
    }

    /// One-sided partial derivative `∂u/∂x_axis` of the V_h function `coeffs` at `x`.
    pub fn evaluate_partial(&self, coeffs: &[f64], x: &[f64], axis: usize, side: Side) -> Result<f64> {
        if axis >= self.dim {
            return Err(Error::arg(format!("axis {axis} out of range for dimension {}", self.dim)));
        }
        self.evaluate_with(coeffs, x, Some((axis, side)))
    }

    fn evaluate_with(&self, coeffs: &[f64], x: &[f64], deriv: Option<(usize, Side)>) -> Result<f64> {
        if coeffs.len() != self.n_dofs() || x.len() != self.dim {
            return Err(Error::arg("coefficient vector or point does not match the mesh"));
        }
        if x.iter().any(|s| !(s.is_finite() && (0.0..=1.0).contains(s))) {
            return Err(Error::arg(format!("evaluation point {x:?} outside the unit cube")));
        }
        let along = |axis: usize| {
            let d = deriv.and_then(|(a, side)| (a == axis).then_some(side));
            self.active_1d(x[axis], d)
        };
        let n1 = self.nodes_per_dim();
        let first = along(0);
        Ok(match self.dim {
            1 => first.iter().map(|&(j, v)| coeffs[j] * v).sum(),
            _ => {
                let second = along(1);
                first
                    .iter()
                    .map(|&(j1, v1)| v1 * second.iter().map(|&(j2, v2)| coeffs[j1 * n1 + j2] * v2).sum::<f64>())
                    .sum()
            }
        })
    }
}
