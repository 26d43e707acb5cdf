//! The comparison flow `U(t) = e^{εtΔ} u_0`.
//!
//! On grids the flow is an exact Fourier multiplier and dissipation integrals
//! are taken in closed form per mode. For the constructed data a grid-free route
//! integrates the analytic spectrum instead, which works at any `n`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{config, contract, Result};
use crate::fourier::{Field, Grid};
use crate::initial_data::InitialData;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatParams {
    pub eps: f64,
    pub horizon: f64,
}

impl HeatParams {
    pub fn new(eps: f64, horizon: f64) -> Result<Self> {
        if !(eps > 0.0) || !(horizon > 0.0) {
            return Err(config(format!(
                "heat flow needs eps > 0 and T > 0, got {eps}, {horizon}"
            )));
        }
        Ok(Self { eps, horizon })
    }
}

fn squared_frequencies(grid: &Grid) -> Vec<f64> {
    let mut k2 = vec![0.0; grid.len()];
    grid.visit_frequencies(|flat, xi| k2[flat] = xi.iter().map(|x| x * x).sum());
    k2
}

/// Multiplies every coefficient by `exp(-eps |ξ|² t)`.
pub fn heat_evolve(u0: &Field, eps: f64, t: f64) -> Result<Field> {
    if t < 0.0 {
        return Err(contract(format!(
            "heat flow time must be non-negative, got {t}"
        )));
    }
    let comps = u0.spectral_components()?;
    let k2 = squared_frequencies(u0.grid());
    let out = comps
        .iter()
        .map(|c| {
            c.iter()
                .zip(&k2)
                .map(|(v, q)| v * (-eps * q * t).exp())
                .collect()
        })
        .collect();
    Field::spectral(u0.grid().clone(), out)
}

/// `eps ∫_0^T ‖∇U‖²_{L²} dt = V^{-1} Σ_ξ ½ (1 - e^{-2 eps |ξ|² T}) |û_0(ξ)|²`.
pub fn heat_dissipation_grid(u0: &Field, eps: f64, horizon: f64) -> Result<f64> {
    if horizon < 0.0 {
        return Err(contract("horizon must be non-negative"));
    }
    let comps = u0.spectral_components()?;
    let k2 = squared_frequencies(u0.grid());
    let mut total = 0.0;
    for (i, q) in k2.iter().enumerate() {
        let e: f64 = comps.iter().map(|c| c[i].norm_sqr()).sum();
        if e != 0.0 {
            total += 0.5 * -(-2.0 * eps * q * horizon).exp_m1() * e;
        }
    }
    Ok(total / u0.grid().volume())
}

/// Grid-free `eps_n ∫_0^T ‖∇U‖²` for the constructed data, as
/// `½ (‖u_0‖² - ‖U(T)‖²)` with both norms from separable spectral quadrature.
pub fn heat_dissipation_exact(data: &InitialData, horizon: f64) -> Result<f64> {
    let eps = data.params().eps();
    let e0 = data.damped_l2_sq(0.0)?;
    let et = data.damped_l2_sq(2.0 * eps * horizon)?;
    Ok(0.5 * (e0 - et))
}

/// One frequency node of a discrete spectral measure.
#[derive(Clone, Copy, Debug, PartialEq)]
struct MeasureNode {
    k2: f64,
    /// Contribution to `‖u‖²_{L²}`.
    energy: f64,
    /// Contribution to the Fourier-`L¹` majorant `(2π)^{-d} ∫ |ξ| |û|` of `‖∇u‖_{L∞}`.
    magnitude: f64,
}

/// Frequency content of `u_0` reduced to what the heat-flow norms need.
/// Either the nonzero lattice modes of a grid field or quadrature nodes over
/// the analytic spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    nodes: Vec<MeasureNode>,
}

impl SpectralMeasure {
    pub fn from_field(field: &Field) -> Result<Self> {
        let comps = field.spectral_components()?;
        let inv_v = 1.0 / field.grid().volume();
        let mut nodes = Vec::new();
        field.grid().visit_frequencies(|flat, xi| {
            let e: f64 = comps.iter().map(|c| c[flat].norm_sqr()).sum();
            if e > 0.0 {
                let k2: f64 = xi.iter().map(|x| x * x).sum();
                nodes.push(MeasureNode {
                    k2,
                    energy: e * inv_v,
                    magnitude: k2.sqrt() * e.sqrt() * inv_v,
                });
            }
        });
        Ok(Self { nodes })
    }

    /// Tensor Gauss–Legendre nodes over the bump at `+κ`, doubled for its
    /// mirror image. `per_panel` nodes on each of the three panels per axis.
    pub fn from_data(data: &InitialData, per_panel: usize) -> Result<Self> {
        let per_panel =
            NonZeroUsize::new(per_panel).ok_or_else(|| config("need at least one node"))?;
        let params = data.params();
        let d = params.d;
        let eps = params.eps();
        let kappa = params.carrier();
        let amp = params.amplitude();
        let cut = data.cutoff();
        let (r, ri) = (cut.outer_radius, cut.inner_radius);
        let rule = GaussLegendre::new(per_panel);
        let mut axis_nodes: Vec<(f64, f64)> = Vec::new();
        for (a, b) in [(-r, -ri), (-ri, ri), (ri, r)] {
            let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
            for &(x, w) in rule.as_node_weight_pairs() {
                let s = mid + half * x;
                let v = cut.phi_hat(s);
                if v > 0.0 {
                    axis_nodes.push((s, w * half));
                }
            }
        }
        let fhat_scale = 2f64.powi(2 * params.n as i32 * d as i32 - 1);
        let vol = (2.0 * PI).powi(-(d as i32)) * eps.powi(d as i32) * 2.0;
        let m = axis_nodes.len();
        let mut nodes = Vec::with_capacity(m.pow(d as u32));
        let mut idx = vec![0usize; d];
        loop {
            let mut xi = [0.0f64; 8];
            let mut weight = vol;
            let mut fhat = fhat_scale;
            for a in 0..d {
                let (s, w) = axis_nodes[idx[a]];
                xi[a] = if a == 0 { kappa + eps * s } else { eps * s };
                weight *= w;
                fhat *= cut.phi_hat(s);
            }
            let k2: f64 = xi[..d].iter().map(|x| x * x).sum();
            let u_abs = amp * xi[0].hypot(xi[1]) * fhat;
            nodes.push(MeasureNode {
                k2,
                energy: weight * u_abs * u_abs,
                magnitude: weight * k2.sqrt() * u_abs,
            });
            let mut a = d;
            loop {
                if a == 0 {
                    return Ok(Self { nodes });
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < m {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `‖e^{εtΔ}u‖²_{L²}`.
    pub fn energy_at(&self, eps: f64, t: f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.energy * (-2.0 * eps * t * n.k2).exp())
            .sum()
    }

    /// Fourier-`L¹` majorant of `‖∇e^{εtΔ}u‖_{L∞}` (pointwise Frobenius norm).
    pub fn grad_linf_majorant_at(&self, eps: f64, t: f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.magnitude * (-eps * t * n.k2).exp())
            .sum()
    }
}

/// Heat-flow norms sampled on a uniform time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatSeries {
    pub times: Vec<f64>,
    /// `‖U(t)‖²_{L²}`.
    pub l2_sq: Vec<f64>,
    /// Upper bound on `‖∇U(t)‖_{L∞}`.
    pub grad_linf: Vec<f64>,
}

impl HeatSeries {
    pub fn sample(measure: &SpectralMeasure, eps: f64, horizon: f64, intervals: usize) -> Self {
        let times: Vec<f64> = (0..=intervals)
            .map(|i| horizon * i as f64 / intervals as f64)
            .collect();
        let l2_sq = times.iter().map(|&t| measure.energy_at(eps, t)).collect();
        let grad_linf = times
            .iter()
            .map(|&t| measure.grad_linf_majorant_at(eps, t))
            .collect();
        Self {
            times,
            l2_sq,
            grad_linf,
        }
    }

    pub fn zero(horizon: f64, intervals: usize) -> Self {
        Self::sample(
            &SpectralMeasure { nodes: Vec::new() },
            1.0,
            horizon,
            intervals,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{l2_norm_sq, Rank};

    fn shear(grid: &Grid) -> Field {
        Field::sample(grid, Rank::Vector, |x, o| {
            o[0] = (3.0 * x[1]).sin();
            o[1] = 0.0;
        })
        .to_spectral()
    }

    #[test]
    fn zero_time_is_identity_and_negative_time_rejected() {
        let grid = Grid::cubic(2, 16, 2.0 * PI).unwrap();
        let u = shear(&grid);
        assert_eq!(heat_evolve(&u, 0.3, 0.0).unwrap(), u);
        assert!(heat_evolve(&u, 0.3, -1.0).is_err());
        assert!(heat_evolve(&u.to_physical(), 0.3, 1.0).is_err());
        assert_eq!(heat_dissipation_grid(&u, 0.3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_decays_exactly() {
        let grid = Grid::cubic(2, 16, 2.0 * PI).unwrap();
        let u = shear(&grid);
        let (eps, t) = (0.07, 1.3);
        let ut = heat_evolve(&u, eps, t).unwrap();
        let ratio = (l2_norm_sq(&ut) / l2_norm_sq(&u)).sqrt();
        assert!((ratio - (-eps * 9.0 * t).exp()).abs() < 1e-14);
    }

    #[test]
    fn large_viscosity_dissipates_everything() {
        let grid = Grid::cubic(2, 16, 2.0 * PI).unwrap();
        let u = shear(&grid);
        let dis = heat_dissipation_grid(&u, 1e3, 1.0).unwrap();
        assert!((dis - 0.5 * l2_norm_sq(&u)).abs() < 1e-13 * l2_norm_sq(&u));
    }

    #[test]
    fn heat_params_validate() {
        assert!(HeatParams::new(0.0, 1.0).is_err());
        assert!(HeatParams::new(0.1, -1.0).is_err());
        assert!(HeatParams::new(0.1, 1.0).is_ok());
    }
}
