//! Gaussian kernel `R_δ(x, y) = c_δ·exp(-|x-y|²/δ²)` and its Gaussian–polynomial
//! moment primitives.
//!
//! The same kernel is used for the interior term and the boundary penalty, so
//! `K_δ = R_δ`. Its antiderivative kernel is `R̄_δ = R_δ / 4`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameters of the scaled Gaussian kernel for one horizon `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    delta: f64,
    dim: usize,
    c_delta: f64,
    eta: f64,
}

impl KernelParams {
    /// Ratio `R̄_δ / R_δ`.
    pub const RBAR_RATIO: f64 = 0.25;
    /// `∫_{ℝ^d} R_δ(x, y) dy`.
    pub const KERNEL_MASS: f64 = 4.0;
    /// `∫_{ℝ^d} R̄_δ(x, y) dy`, i.e. half of the second-moment constant `σ_R = 2`.
    pub const RBAR_MASS: f64 = 1.0;

    pub fn new(delta: f64, dim: usize) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::arg(format!("horizon must be positive and finite, got {delta}")));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::arg(format!("dimension must be 1 or 2, got {dim}")));
        }
        let c_delta = 4.0 * PI.powf(-(dim as f64) / 2.0) * delta.powi(-(dim as i32));
        Ok(Self { delta, dim, c_delta, eta: 1.0 / delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Normalization constant `4·π^(-d/2)·δ^(-d)`.
    pub fn c_delta(&self) -> f64 {
        self.c_delta
    }

    /// Inverse horizon, the scaling used by [`gaussian_moment`].
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rbar_ratio(&self) -> f64 {
        Self::RBAR_RATIO
    }

    pub fn kernel_mass(&self) -> f64 {
        Self::KERNEL_MASS
    }

    pub fn rbar_mass(&self) -> f64 {
        Self::RBAR_MASS
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::arg(format!("point has dimension {} but kernel has dimension {}", x.len(), self.dim)));
        }
        Ok(())
    }

    /// `exp(-η²r²)` for a single coordinate offset.
    #[inline]
    pub fn gauss_1d(&self, r: f64) -> f64 {
        let z = self.eta * r;
        (-z * z).exp()
    }

    pub fn kernel_eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(self.c_delta * (-dist2 / (self.delta * self.delta)).exp())
    }

    pub fn rbar_eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(Self::RBAR_RATIO * self.kernel_eval(x, y)?)
    }

    /// `m(x) = ∫_{[0,1]^d} R_δ(x, y) dy`, evaluated coordinate-wise in closed form.
    pub fn domain_mass(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.c_delta * x.iter().map(|&s| unit_mass_1d(self.eta, s)).product::<f64>())
    }
}

/// `∫_0^1 exp(-η²(s-t)²) dt`.
#[inline]
pub fn unit_mass_1d(eta: f64, s: f64) -> f64 {
    moments_unchecked(eta, s - 1.0, s)[0]
}

/// `∫_a^b r^k·exp(-η²r²) dr` for `k ∈ {0, 1, 2, 3}`.
///
/// For `a > b` the sign-flipped integral is returned.
pub fn gaussian_moment(k: usize, eta: f64, a: f64, b: f64) -> Result<f64> {
    if k > 3 {
        return Err(Error::arg(format!("moment order must be in 0..=3, got {k}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::arg(format!("eta must be positive and finite, got {eta}")));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::arg("integration limits must be finite"));
    }
    Ok(moments_unchecked(eta, a, b)[k])
}

/// All four moments `[f₀, f₁, f₂, f₃]` of `exp(-η²r²)` over `[a, b]`.
///
/// `f₀` and `f₁` are closed forms; `f₂` and `f₃` follow from integration by
/// parts in terms of `f₀` and `f₁`. Arguments are not validated.
pub fn moments_unchecked(eta: f64, a: f64, b: f64) -> [f64; 4] {
    if a > b {
        return moments_unchecked(eta, b, a).map(|v| -v);
    }
    let eta2 = eta * eta;
    let ea = (-eta2 * a * a).exp();
    let eb = (-eta2 * b * b).exp();

    let f0 = 0.5 * PI.sqrt() / eta * erf_diff(eta * a, eta * b);

    // ea - eb, written via expm1 so that narrow intervals keep relative accuracy.
    let exp_diff = if a.abs() <= b.abs() {
        -ea * (-eta2 * (b - a) * (b + a)).exp_m1()
    } else {
        eb * (-eta2 * (a - b) * (a + b)).exp_m1()
    };
    let inv = 0.5 / eta2;
    let f1 = inv * exp_diff;
    let f2 = inv * (a * ea - b * eb) + inv * f0;
    let f3 = inv * (a * a * ea - b * b * eb) + f1 / eta2;
    [f0, f1, f2, f3]
}

/// `erf(v) - erf(u)` for `u ≤ v`, using `erfc` on same-sign intervals where the
/// plain difference would cancel.
fn erf_diff(u: f64, v: f64) -> f64 {
    if u >= 0.0 {
        libm::erfc(u) - libm::erfc(v)
    } else if v <= 0.0 {
        libm::erfc(-v) - libm::erfc(-u)
    } else {
        libm::erf(v) - libm::erf(u)
    }
}
