//! Outer quadrature rules: Simpson 3/8 on cells, Gauss–Legendre with a
//! boundary-layer split, and tensor products of 1D rules.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::TensorMesh;

/// Points and weights of a 1D rule on `interval`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Appends the points of `other`, widening the interval.
    pub fn concat(mut self, other: QuadRule) -> QuadRule {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
        self.interval = (self.interval.0.min(other.interval.0), self.interval.1.max(other.interval.1));
        self
    }
}

/// Cartesian product of two 1D rules with weights `w_i·w_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorQuadRule {
    pub rx: QuadRule,
    pub ry: QuadRule,
}

impl TensorQuadRule {
    pub fn len(&self) -> usize {
        self.rx.len() * self.ry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(point, weight)` pairs, x-major.
    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.rx.points.iter().zip(&self.rx.weights).flat_map(move |(&x, &wx)| {
            self.ry.points.iter().zip(&self.ry.weights).map(move |(&y, &wy)| ([x, y], wx * wy))
        })
    }

    pub fn weight_sum(&self) -> f64 {
        self.iter().map(|(_, w)| w).sum()
    }

    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(p, w)| w * f(p[0], p[1])).sum()
    }
}

pub fn tensorize(rx: QuadRule, ry: QuadRule) -> TensorQuadRule {
    TensorQuadRule { rx, ry }
}

/// Four-point Simpson 3/8 rule on one cell; exact for cubics.
pub fn simpson38_cell(a: f64, b: f64) -> Result<QuadRule> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::arg(format!("degenerate cell [{a}, {b}]")));
    }
    let len = b - a;
    let w = len / 8.0;
    Ok(QuadRule {
        points: vec![a, a + len / 3.0, a + 2.0 * len / 3.0, b],
        weights: vec![w, 3.0 * w, 3.0 * w, w],
        interval: (a, b),
    })
}

/// Composite Simpson 3/8 weights attached to the mesh nodes along one axis.
///
/// Node `3i..=3i+3` of cell `i` receive `h/8·{1,3,3,1}`, so shared interface
/// nodes collect `h/4`.
pub fn simpson38_node_weights(mesh: &TensorMesh) -> Vec<f64> {
    let w = mesh.h() / 8.0;
    let mut out = vec![0.0; mesh.nodes_per_dim()];
    for i in 0..mesh.n_cells() {
        for (m, f) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
            out[3 * i + m] += f * w;
        }
    }
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let legendre = |x: f64| {
        // Returns (P_n(x), P_n'(x)).
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn cached_reference(n: usize) -> Result<&'static (Vec<f64>, Vec<f64>)> {
    static GL2: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static GL5: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static GL15: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let cell = match n {
        2 => &GL2,
        5 => &GL5,
        15 => &GL15,
        _ => return Err(Error::arg(format!("unsupported Gauss-Legendre order {n} (expected 2, 5 or 15)"))),
    };
    Ok(cell.get_or_init(|| legendre_reference(n)))
}

/// `n`-point Gauss–Legendre rule mapped affinely onto `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadRule> {
    if !(a.is_finite() && b.is_finite() && b >= a) {
        return Err(Error::arg(format!("invalid interval [{a}, {b}]")));
    }
    let (ref_nodes, ref_weights) = cached_reference(n)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadRule {
        points: ref_nodes.iter().map(|&x| half * x + mid).collect(),
        weights: ref_weights.iter().map(|&w| half * w).collect(),
        interval: (a, b),
    })
}

/// 15-point rule for one cell that resolves `3δ` layers at both cell edges.
///
/// When `6δ < h` the cell is split into `[a, a+3δ]`, `[a+3δ, b-3δ]`,
/// `[b-3δ, b]` with five Gauss–Legendre points each; otherwise the whole cell
/// gets one 15-point rule.
pub fn layered_cell_rule(a: f64, b: f64, delta: f64) -> Result<QuadRule> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::arg(format!("horizon must be positive, got {delta}")));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::arg(format!("degenerate cell [{a}, {b}]")));
    }
    let layer = 3.0 * delta;
    if 2.0 * layer < b - a {
        Ok(gauss_legendre(5, a, a + layer)?
            .concat(gauss_legendre(5, a + layer, b - layer)?)
            .concat(gauss_legendre(5, b - layer, b)?))
    } else {
        gauss_legendre(15, a, b)
    }
}

/// Layered rules of every cell along one axis, concatenated over `[0, 1]`.
pub fn composite_layered_rule(mesh: &TensorMesh, delta: f64) -> Result<QuadRule> {
    (0..mesh.n_cells()).try_fold(QuadRule { points: vec![], weights: vec![], interval: (0.0, 0.0) }, |acc, i| {
        let (a, b) = mesh.cell_bounds(i);
        Ok(acc.concat(layered_cell_rule(a, b, delta)?))
    })
}
