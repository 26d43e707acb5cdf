//! Smooth cutoffs: the envelope profile `φ`, defined through its compactly
//! supported transform `φ̂`, and the Littlewood–Paley generators `ϑ`, `ψ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::quad;

/// Absolute target for the cosine/sine transforms of `φ̂`.
const PHI_TOL: f64 = 1e-13;

/// Shape of the `C^∞` transition between the plateau and zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// `g(t)/(g(t)+g(1-t))` with `g(t) = exp(-1/t)`; point-symmetric about `t = 1/2`.
    #[default]
    #[serde(rename = "default-smoothstep")]
    DefaultSmoothstep,
}

impl Transition {
    /// Rising step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
    pub fn step(self, t: f64) -> f64 {
        match self {
            Transition::DefaultSmoothstep => {
                if t <= 0.0 {
                    0.0
                } else if t >= 1.0 {
                    1.0
                } else {
                    let a = (-1.0 / t).exp();
                    let b = (-1.0 / (1.0 - t)).exp();
                    a / (a + b)
                }
            }
        }
    }

    /// Falls from 1 at `r ≤ inner` to 0 at `r ≥ outer`.
    fn plateau(self, r: f64, inner: f64, outer: f64) -> f64 {
        if r <= inner {
            1.0
        } else if r >= outer {
            0.0
        } else {
            1.0 - self.step((r - inner) / (outer - inner))
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::DefaultSmoothstep => f.write_str("default-smoothstep"),
        }
    }
}

impl FromStr for Transition {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default-smoothstep" => Ok(Transition::DefaultSmoothstep),
            other => Err(config(format!("unknown transition shape {other:?}"))),
        }
    }
}

/// Envelope cutoff `φ̂`: 1 on `|s| ≤ inner_radius`, 0 on `|s| ≥ outer_radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub transition: Transition,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            inner_radius: 0.25,
            outer_radius: 0.5,
            transition: Transition::default(),
        }
    }
}

impl CutoffSpec {
    pub fn phi_hat(&self, s: f64) -> f64 {
        self.transition
            .plateau(s.abs(), self.inner_radius, self.outer_radius)
    }

    /// Breakpoints of `[0, outer]` fine enough that each panel holds at most
    /// about half an oscillation of `cos(x s)`.
    fn panels(&self, x: f64) -> Vec<f64> {
        let mut breaks = vec![0.0];
        for (lo, hi) in [
            (0.0, self.inner_radius),
            (self.inner_radius, self.outer_radius),
        ] {
            let pieces = ((x.abs() * (hi - lo) / PI).ceil() as usize).max(1);
            for i in 1..=pieces {
                breaks.push(lo + (hi - lo) * i as f64 / pieces as f64);
            }
        }
        breaks
    }

    /// `φ(x) = (2π)^{-1} ∫ e^{ixs} φ̂(s) ds = π^{-1} ∫_0^∞ φ̂(s) cos(xs) ds`.
    pub fn phi(&self, x: f64) -> Result<f64> {
        let f = |s: f64| self.phi_hat(s) * (x * s).cos();
        Ok(quad::integrate_panels(&f, &self.panels(x), PHI_TOL)? / PI)
    }

    /// `φ'(x) = -π^{-1} ∫_0^∞ s φ̂(s) sin(xs) ds`.
    pub fn phi_prime(&self, x: f64) -> Result<f64> {
        let f = |s: f64| s * self.phi_hat(s) * (x * s).sin();
        Ok(-quad::integrate_panels(&f, &self.panels(x), PHI_TOL)? / PI)
    }

    /// `∫_ℝ φ̂`.
    pub fn phi_hat_integral(&self) -> Result<f64> {
        let f = |s: f64| self.phi_hat(s);
        Ok(2.0 * quad::integrate_panels(&f, &self.panels(0.0), 1e-15)?)
    }

    /// `‖φ‖²_{L²(ℝ)} = (2π)^{-1} ∫ φ̂²`.
    pub fn phi_l2_sq(&self) -> Result<f64> {
        let f = |s: f64| self.phi_hat(s).powi(2);
        Ok(quad::integrate_panels(&f, &self.panels(0.0), 1e-15)? / PI)
    }

    /// `‖φ‖_{L∞} = φ(0)`, since `φ̂ ≥ 0`.
    pub fn phi_linf(&self) -> Result<f64> {
        self.phi(0.0)
    }
}

/// `φ̂` with the default cutoff.
pub fn phi_hat(s: f64) -> f64 {
    CutoffSpec::default().phi_hat(s)
}

/// `φ` with the default cutoff.
pub fn phi(x: f64) -> Result<f64> {
    CutoffSpec::default().phi(x)
}

/// Radial Littlewood–Paley generator: `ϑ ≡ 1` on `|ξ| ≤ 3/4`, supported in `|ξ| ≤ 4/3`;
/// `ψ(ξ) = ϑ(ξ/2) - ϑ(ξ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub transition: Transition,
}

impl Default for LpSpec {
    fn default() -> Self {
        Self {
            inner_radius: 0.75,
            outer_radius: 4.0 / 3.0,
            transition: Transition::default(),
        }
    }
}

impl LpSpec {
    pub fn theta_radial(&self, r: f64) -> f64 {
        self.transition
            .plateau(r, self.inner_radius, self.outer_radius)
    }

    pub fn psi_radial(&self, r: f64) -> f64 {
        self.theta_radial(0.5 * r) - self.theta_radial(r)
    }

    /// Multiplier of block `j` at radius `r`: `ϑ` for `j = -1`, `ψ(2^{-j}·)` for
    /// `j ≥ 0`, zero below.
    pub fn block_multiplier(&self, j: i32, r: f64) -> f64 {
        match j {
            j if j < -1 => 0.0,
            -1 => self.theta_radial(r),
            j => self.psi_radial(r * 0.5f64.powi(j)),
        }
    }
}

pub fn lp_theta(xi: &[f64]) -> f64 {
    LpSpec::default().theta_radial(norm(xi))
}

pub fn lp_psi(xi: &[f64]) -> f64 {
    LpSpec::default().psi_radial(norm(xi))
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}
