//! Manufactured problems: an analytic solution of the local clamped biharmonic
//! problem `Δ²u = f` together with the boundary data read off from it.
//!
//! Boundary data follow the outward-normal convention. On the unit square the
//! normals are `(-1,0)` on `x₁=0`, `(1,0)` on `x₁=1`, `(0,-1)` on `x₂=0` and
//! `(0,1)` on `x₂=1`; in 1D they are `-1` at `x=0` and `+1` at `x=1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Gradient; in 1D only the first component is meaningful.
pub type GradFn = Arc<dyn Fn(&[f64]) -> [f64; 2] + Send + Sync>;

/// Anything that can serve as the "truth" in error metrics: a closed-form
/// solution or a finer discrete solution.
pub trait ReferenceField {
    fn value(&self, x: &[f64]) -> f64;
    fn normal_derivative(&self, x: &[f64], normal: &[f64]) -> f64;
}

#[derive(Clone)]
pub struct ManufacturedProblem {
    name: String,
    dim: usize,
    u: ScalarFn,
    grad: GradFn,
    f: ScalarFn,
}

impl fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedProblem").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

/// Outward unit normal at a boundary point, or `None` for interior points and
/// 2D corners (where the normal is undefined).
pub fn outward_normal(x: &[f64]) -> Option<[f64; 2]> {
    let mut found = None;
    let mut count = 0;
    for (axis, &s) in x.iter().enumerate() {
        let sign = if s == 0.0 {
            -1.0
        } else if s == 1.0 {
            1.0
        } else {
            continue;
        };
        let mut n = [0.0; 2];
        n[axis] = sign;
        found = Some(n);
        count += 1;
    }
    if count == 1 {
        found
    } else {
        None
    }
}

impl ManufacturedProblem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u_gt(&self, x: &[f64]) -> f64 {
        (self.u)(x)
    }

    pub fn grad_u_gt(&self, x: &[f64]) -> [f64; 2] {
        (self.grad)(x)
    }

    /// Load `f = Δ²u_gt`.
    pub fn load(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    /// Dirichlet datum `a = u_gt|∂Ω`.
    pub fn dirichlet(&self, x: &[f64]) -> f64 {
        self.u_gt(x)
    }

    /// Neumann datum `b = ∂u_gt/∂n` with the outward normal at `x`.
    pub fn neumann(&self, x: &[f64]) -> Result<f64> {
        let n = outward_normal(x)
            .ok_or_else(|| Error::arg(format!("no unique outward normal at {x:?} (interior point or corner)")))?;
        Ok(self.normal_derivative(x, &n[..self.dim]))
    }
}

impl ReferenceField for ManufacturedProblem {
    fn value(&self, x: &[f64]) -> f64 {
        self.u_gt(x)
    }

    fn normal_derivative(&self, x: &[f64], normal: &[f64]) -> f64 {
        let g = self.grad_u_gt(x);
        normal.iter().zip(g).map(|(n, g)| n * g).sum()
    }
}

/// `u_gt(x) = x^10` on `[0,1]`.
pub fn builtin_poly10() -> ManufacturedProblem {
    ManufacturedProblem {
        name: "poly10".into(),
        dim: 1,
        u: Arc::new(|x| x[0].powi(10)),
        grad: Arc::new(|x| [10.0 * x[0].powi(9), 0.0]),
        f: Arc::new(|x| 5040.0 * x[0].powi(6)),
    }
}

/// `u_gt(x₁, x₂) = x₁·ln(1 + x₂)` on `[0,1]²`.
pub fn builtin_xlog() -> ManufacturedProblem {
    ManufacturedProblem {
        name: "xlog".into(),
        dim: 2,
        u: Arc::new(|x| x[0] * x[1].ln_1p()),
        grad: Arc::new(|x| [x[1].ln_1p(), x[0] / (1.0 + x[1])]),
        f: Arc::new(|x| -6.0 * x[0] / (1.0 + x[1]).powi(4)),
    }
}

/// Built-in problem by name.
pub fn lookup(name: &str) -> Option<ManufacturedProblem> {
    match name {
        "poly10" => Some(builtin_poly10()),
        "xlog" => Some(builtin_xlog()),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["poly10", "xlog"]
}

/// Central-difference bilaplacian with step `h` (5-point stencil per axis, nested in 2D).
pub fn fd_bilaplacian(u: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let lap = |p: &[f64]| -> f64 {
        let mut acc = 0.0;
        let mut q = p.to_vec();
        for axis in 0..p.len() {
            let c = p[axis];
            q[axis] = c + h;
            let up = u(&q);
            q[axis] = c - h;
            let dn = u(&q);
            q[axis] = c;
            acc += up - 2.0 * u(p) + dn;
        }
        acc / (h * h)
    };
    let mut acc = 0.0;
    let mut q = x.to_vec();
    for axis in 0..x.len() {
        let c = x[axis];
        q[axis] = c + h;
        let up = lap(&q);
        q[axis] = c - h;
        let dn = lap(&q);
        q[axis] = c;
        acc += up - 2.0 * lap(x) + dn;
    }
    acc / (h * h)
}

fn interior_samples(dim: usize) -> Vec<Vec<f64>> {
    let ticks: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
    match dim {
        1 => ticks.iter().map(|&s| vec![s]).collect(),
        _ => ticks.iter().flat_map(|&a| ticks.iter().map(move |&b| vec![a, b])).collect(),
    }
}

/// Largest FD mismatch and the magnitude it is judged against.
fn bilaplacian_mismatch(p: &ManufacturedProblem) -> (f64, f64) {
    let u = |x: &[f64]| p.u_gt(x);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for x in interior_samples(p.dim) {
        let fd = fd_bilaplacian(&u, &x, 1e-2);
        let exact = p.load(&x);
        worst = worst.max((fd - exact).abs());
        scale = scale.max(fd.abs()).max(exact.abs());
    }
    (worst, scale)
}

/// Registers a user problem after checking `f` against a finite-difference `Δ²u_gt`.
pub fn custom_problem(
    name: impl Into<String>,
    dim: usize,
    u: ScalarFn,
    grad: GradFn,
    f: ScalarFn,
) -> Result<ManufacturedProblem> {
    if !(1..=2).contains(&dim) {
        return Err(Error::arg(format!("dimension must be 1 or 2, got {dim}")));
    }
    let problem = ManufacturedProblem { name: name.into(), dim, u, grad, f };
    let (worst, scale) = bilaplacian_mismatch(&problem);
    if worst.is_nan() || worst > 1e-2 * scale {
        return Err(Error::InconsistentProblem {
            name: problem.name.clone(),
            reason: format!("load differs from finite-difference bilaplacian by {worst:.3e} (scale {scale:.3e})"),
        });
    }
    Ok(problem)
}
