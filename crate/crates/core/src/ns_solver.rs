//! Pseudo-spectral solver for the unforced incompressible Navier–Stokes system
//! on a periodic box.
//!
//! Diffusion is integrated exactly by an integrating factor; the projected
//! advection term `-P[(u·∇)u]` is advanced with the classical four-stage
//! Runge–Kutta scheme in the integrating-factor frame (Lawson RK4). Products
//! are dealiased by truncation and pressure never appears.
//!
//! The dissipation integral `ε ∫ ‖∇u‖²` is accumulated per step from a cubic
//! Hermite interpolant of the state in the integrating-factor frame, evaluated
//! at Gauss–Legendre nodes. Endpoint values and slopes come from stage data the
//! step already has, so it costs no extra transforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, contract, Error, Result};
use crate::fourier::{
    derivative_factors, divergence_residual_of, leray_in_place, linf_of_components, FftEngine,
    Field, Grid, Rank,
};
use crate::littlewood_paley::{besov_norm, BesovIndex};

/// Gauss–Legendre nodes and weights on `[0, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.046_910_077_030_668, 0.118_463_442_528_094_5),
    (0.230_765_344_947_158_5, 0.239_314_335_249_683_2),
    (0.5, 0.284_444_444_444_444_4),
    (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
    (0.953_089_922_969_332, 0.118_463_442_528_094_5),
];

/// Above this `ε|ξ|²dt` a mode is interpolated directly rather than in the
/// integrating-factor frame, where it would grow like `e^{ε|ξ|²dt}`.
const STIFF_LIMIT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeStep {
    Fixed(f64),
    /// `dt = min(cfl / (‖u_0‖_∞ max_i N_i/L_i), max)`, then shortened to divide `T`.
    Auto {
        cfl: f64,
        max: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    #[serde(rename = "if-rk4")]
    IntegratingFactorRk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub time_step: TimeStep,
    pub scheme: Scheme,
    /// Modes with any `|k_i| > fraction · N_i/2` are zeroed after each product.
    pub dealias_fraction: f64,
    pub horizon: f64,
    pub diagnostics_stride: usize,
    /// Guard trips when kinetic energy exceeds this multiple of the initial energy.
    pub blowup_energy_factor: f64,
    /// Energy balance tolerance relative to `‖u_0‖²`.
    pub tol_balance: f64,
    /// CFL limit used for automatic steps and to vet fixed ones.
    pub cfl: f64,
    /// Record `‖u‖_{B¹_{∞,1}}` at diagnostic samples.
    pub monitor_besov: bool,
}

pub const DEFAULT_CFL: f64 = 0.4;
pub const DEFAULT_MAX_DT: f64 = 1.0 / 32.0;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_step: TimeStep::Auto {
                cfl: DEFAULT_CFL,
                max: DEFAULT_MAX_DT,
            },
            scheme: Scheme::default(),
            dealias_fraction: 2.0 / 3.0,
            horizon: 1.0,
            diagnostics_stride: 1,
            blowup_energy_factor: 1.01,
            tol_balance: 1e-8,
            cfl: DEFAULT_CFL,
            monitor_besov: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(config(format!(
                "dealias fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        if !(self.horizon > 0.0) {
            return Err(config("horizon must be positive"));
        }
        if self.diagnostics_stride == 0 {
            return Err(config("diagnostics stride must be at least 1"));
        }
        if !(self.blowup_energy_factor >= 1.0) {
            return Err(config("blow-up energy factor must be at least 1"));
        }
        match self.time_step {
            TimeStep::Fixed(dt) if !(dt > 0.0) => Err(config("time step must be positive")),
            TimeStep::Auto { cfl, max } if !(cfl > 0.0 && max > 0.0) => {
                Err(config("automatic time step needs positive CFL and cap"))
            }
            _ => Ok(()),
        }
    }
}

/// Diagnostics at one recorded time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// `½‖u‖²_{L²}`.
    pub energy: f64,
    pub grad_l2_sq: f64,
    pub u_linf: f64,
    pub grad_linf: f64,
    pub divergence_residual: f64,
    /// `ε ∫_0^t ‖∇u‖²`.
    pub dissipation: f64,
    pub besov_b1_inf1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SolverFailure {
    BlowUp { time: f64, reason: String },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Last valid state.
    pub terminal: Field,
    pub terminal_time: f64,
    pub dt: f64,
    pub steps: usize,
    pub dissipation: f64,
    pub initial_energy: f64,
    /// `½‖u(t)‖² - ½‖u_0‖² + ε∫_0^t‖∇u‖²` at the terminal time.
    pub balance_residual: f64,
    pub balance_ok: bool,
    pub failure: Option<SolverFailure>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// `max |u|` and `max |∇u|` (componentwise, Euclidean-combined) of a state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhysicalStats {
    pub u_linf: f64,
    pub grad_linf: f64,
}

type Spectrum = Vec<Vec<Complex64>>;

/// Spectral operators of one `(grid, ε, dealias)` configuration.
#[derive(Debug)]
pub struct NavierStokes {
    grid: Grid,
    engine: FftEngine,
    eps: f64,
    k2: Vec<f64>,
    deriv: Vec<Vec<Complex64>>,
    strides: Vec<usize>,
    keep: Vec<bool>,
}

impl NavierStokes {
    pub fn new(grid: &Grid, eps: f64, dealias_fraction: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(config("viscosity must be non-negative"));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(config("dealias fraction must lie in (0, 1]"));
        }
        let d = grid.dim();
        let mut k2 = vec![0.0; grid.len()];
        grid.visit_frequencies(|flat, xi| k2[flat] = xi.iter().map(|x| x * x).sum());
        let cut: Vec<f64> = grid
            .points()
            .iter()
            .map(|&n| dealias_fraction * n as f64 / 2.0)
            .collect();
        let mut keep = vec![true; grid.len()];
        grid.visit_positions(|flat, pos| {
            keep[flat] = (0..d).all(|a| (grid.mode_number(a, pos[a]).abs() as f64) <= cut[a]);
        });
        Ok(Self {
            grid: grid.clone(),
            engine: FftEngine::new(grid),
            eps,
            k2,
            deriv: (0..d).map(|a| derivative_factors(grid, a)).collect(),
            strides: grid.strides(),
            keep,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `-P[(u·∇)u]`, dealiased, plus physical-space maxima of `u` and `∇u`.
    pub fn nonlinear(&self, u: &[Vec<Complex64>]) -> (Spectrum, PhysicalStats) {
        let d = self.grid.dim();
        let len = self.grid.len();
        let points = self.grid.points();
        let inv_v = 1.0 / self.grid.volume();
        let phys: Vec<Vec<f64>> = u.iter().map(|c| self.engine.to_physical(c)).collect();
        let u_linf = linf_of_components(&phys);
        let mut grad_sq = 0.0;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut out: Spectrum = Vec::with_capacity(d);
        for ui in u {
            let mut acc = vec![0.0f64; len];
            for j in 0..d {
                let (stride, n) = (self.strides[j], points[j]);
                let table = &self.deriv[j];
                for (flat, (b, v)) in buf.iter_mut().zip(ui).enumerate() {
                    *b = v * table[(flat / stride) % n];
                }
                self.engine.inverse(&mut buf);
                let mut gmax = 0.0f64;
                for ((a, b), uj) in acc.iter_mut().zip(&buf).zip(&phys[j]) {
                    let g = b.re * inv_v;
                    gmax = gmax.max(g.abs());
                    *a += uj * g;
                }
                grad_sq += gmax * gmax;
            }
            out.push(self.engine.to_spectral(&acc));
        }
        for comp in out.iter_mut() {
            for (v, &k) in comp.iter_mut().zip(&self.keep) {
                if k {
                    *v = -*v;
                } else {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        leray_in_place(&self.grid, &mut out);
        (
            out,
            PhysicalStats {
                u_linf,
                grad_linf: grad_sq.sqrt(),
            },
        )
    }

    fn propagator(&self, t: f64) -> Vec<f64> {
        self.k2.iter().map(|q| (-self.eps * q * t).exp()).collect()
    }

    /// One Lawson RK4 step from `a` with `k1 = N(a)` already known.
    fn advance(
        &self,
        a: &[Vec<Complex64>],
        k1: &[Vec<Complex64>],
        dt: f64,
        half: &[f64],
        full: &[f64],
    ) -> Spectrum {
        let h2 = 0.5 * dt;
        let u2: Spectrum = a
            .iter()
            .zip(k1)
            .map(|(ac, kc)| {
                ac.iter()
                    .zip(kc)
                    .zip(half)
                    .map(|((x, k), e)| (x + k * h2) * e)
                    .collect()
            })
            .collect();
        let (k2, _) = self.nonlinear(&u2);
        drop(u2);
        let u3: Spectrum = a
            .iter()
            .zip(&k2)
            .map(|(ac, kc)| {
                ac.iter()
                    .zip(kc)
                    .zip(half)
                    .map(|((x, k), e)| x * e + k * h2)
                    .collect()
            })
            .collect();
        let (k3, _) = self.nonlinear(&u3);
        drop(u3);
        let u4: Spectrum = a
            .iter()
            .zip(&k3)
            .map(|(ac, kc)| {
                ac.iter()
                    .zip(kc)
                    .zip(half.iter().zip(full))
                    .map(|((x, k), (eh, ef))| x * ef + k * (dt * eh))
                    .collect()
            })
            .collect();
        let (k4, _) = self.nonlinear(&u4);
        drop(u4);
        let w = dt / 6.0;
        (0..a.len())
            .map(|c| {
                (0..a[c].len())
                    .map(|i| {
                        a[c][i] * full[i]
                            + (k1[c][i] * full[i]
                                + (k2[c][i] + k3[c][i]) * (2.0 * half[i])
                                + k4[c][i])
                                * w
                    })
                    .collect()
            })
            .collect()
    }

    /// `ε ∫_0^dt ‖∇u‖²` from endpoint states and their nonlinear terms.
    fn step_dissipation(
        &self,
        a: &[Vec<Complex64>],
        ka: &[Vec<Complex64>],
        b: &[Vec<Complex64>],
        kb: &[Vec<Complex64>],
        dt: f64,
    ) -> f64 {
        let mut total = 0.0;
        for (i, &q) in self.k2.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let live = (0..a.len()).any(|c| {
                a[c][i].norm_sqr() + b[c][i].norm_sqr() + ka[c][i].norm_sqr() + kb[c][i].norm_sqr()
                    > 0.0
            });
            if !live {
                continue;
            }
            let lam = self.eps * q;
            let stiff = lam * dt > STIFF_LIMIT;
            let mut mode = 0.0;
            for &(sigma, w) in &GAUSS5 {
                let s = sigma * dt;
                let h00 = (2.0 * sigma - 3.0) * sigma * sigma + 1.0;
                let h10 = ((sigma - 2.0) * sigma + 1.0) * sigma;
                let h01 = (3.0 - 2.0 * sigma) * sigma * sigma;
                let h11 = (sigma - 1.0) * sigma * sigma;
                let mut e = 0.0;
                for c in 0..a.len() {
                    let v = if stiff {
                        // direct Hermite on û with û' = -λû + N
                        a[c][i] * h00
                            + (ka[c][i] - a[c][i] * lam) * (h10 * dt)
                            + b[c][i] * h01
                            + (kb[c][i] - b[c][i] * lam) * (h11 * dt)
                    } else {
                        let left = (-lam * s).exp();
                        let right = (lam * (dt - s)).exp();
                        (a[c][i] * h00 + ka[c][i] * (h10 * dt)) * left
                            + (b[c][i] * h01 + kb[c][i] * (h11 * dt)) * right
                    };
                    e += v.norm_sqr();
                }
                mode += w * e;
            }
            total += q * mode;
        }
        self.eps * dt * total / self.grid.volume()
    }

    fn energy(&self, u: &[Vec<Complex64>]) -> f64 {
        let s: f64 = u.iter().flat_map(|c| c.iter()).map(|v| v.norm_sqr()).sum();
        0.5 * s / self.grid.volume()
    }

    fn grad_l2_sq(&self, u: &[Vec<Complex64>]) -> f64 {
        let mut s = 0.0;
        for c in u {
            for (v, q) in c.iter().zip(&self.k2) {
                s += q * v.norm_sqr();
            }
        }
        s / self.grid.volume()
    }

    /// One step of size `dt`; fails on a non-finite state.
    pub fn step(&self, u: &[Vec<Complex64>], dt: f64) -> Result<Spectrum> {
        let (k1, _) = self.nonlinear(u);
        let next = self.advance(u, &k1, dt, &self.propagator(0.5 * dt), &self.propagator(dt));
        if !self.energy(&next).is_finite() {
            return Err(Error::BlowUp {
                time: 0.0,
                reason: "non-finite state".into(),
            });
        }
        Ok(next)
    }
}

fn vector_components(u: &Field, grid_dim: usize) -> Result<Spectrum> {
    if u.rank() != Rank::Vector || u.component_count() != grid_dim {
        return Err(contract("Navier–Stokes state must be a vector field"));
    }
    Ok(u.spectral_components()?.to_vec())
}

/// `-P[(u·∇)u]` with the given dealiasing fraction.
pub fn nonlinear_term(u: &Field, dealias_fraction: f64) -> Result<Field> {
    let comps = vector_components(u, u.grid().dim())?;
    let ns = NavierStokes::new(u.grid(), 0.0, dealias_fraction)?;
    let (out, _) = ns.nonlinear(&comps);
    Field::spectral(u.grid().clone(), out)
}

/// One integrating-factor RK4 step with 2/3-rule dealiasing.
pub fn step(u: &Field, dt: f64, eps: f64) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(contract("time step must be positive"));
    }
    let comps = vector_components(u, u.grid().dim())?;
    let ns = NavierStokes::new(u.grid(), eps, 2.0 / 3.0)?;
    let next = ns.step(&comps, dt)?;
    Field::spectral(u.grid().clone(), next)
}

/// Integrates from `u0` to `config.horizon`.
///
/// A tripped guard (energy growth or non-finite state) ends the run early with
/// the partial trajectory and `failure` set.
pub fn solve(u0: &Field, eps: f64, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = u0.grid().clone();
    let mut u = vector_components(u0, grid.dim())?;
    let ns = NavierStokes::new(&grid, eps, config.dealias_fraction)?;

    let (mut k1, mut stats) = ns.nonlinear(&u);
    let inv_spacing = (0..grid.dim())
        .map(|a| 1.0 / grid.spacing(a))
        .fold(0.0, f64::max);
    let cfl_number = |dt: f64| dt * stats.u_linf * inv_spacing;
    let raw_dt = match config.time_step {
        TimeStep::Fixed(dt) => {
            if cfl_number(dt) > config.cfl {
                return Err(Error::Config(format!(
                    "fixed dt = {dt} gives CFL number {:.3} above {}",
                    cfl_number(dt),
                    config.cfl
                )));
            }
            dt
        }
        TimeStep::Auto { cfl, max } => {
            if stats.u_linf > 0.0 {
                (cfl / (stats.u_linf * inv_spacing)).min(max)
            } else {
                max
            }
        }
    };
    let steps = ((config.horizon / raw_dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = config.horizon / steps as f64;
    let half = ns.propagator(0.5 * dt);
    let full = ns.propagator(dt);

    let e0 = ns.energy(&u);
    let mut dissipation = 0.0;
    let mut t = 0.0;
    let mut samples = Vec::new();
    let mut failure = None;

    let sample = |u: &Spectrum, t: f64, stats: PhysicalStats, dissipation: f64| -> Result<Sample> {
        let besov_b1_inf1 = if config.monitor_besov {
            Some(besov_norm(
                &Field::spectral(grid.clone(), u.clone())?,
                BesovIndex::b1_inf1(),
            )?)
        } else {
            None
        };
        Ok(Sample {
            t,
            energy: ns.energy(u),
            grad_l2_sq: ns.grad_l2_sq(u),
            u_linf: stats.u_linf,
            grad_linf: stats.grad_linf,
            divergence_residual: divergence_residual_of(&grid, u),
            dissipation,
            besov_b1_inf1,
        })
    };
    samples.push(sample(&u, 0.0, stats, 0.0)?);

    let mut taken = 0;
    for n in 0..steps {
        let next = ns.advance(&u, &k1, dt, &half, &full);
        let e = ns.energy(&next);
        if !e.is_finite() {
            failure = Some(SolverFailure::BlowUp {
                time: t,
                reason: "non-finite state".into(),
            });
            break;
        }
        if e > config.blowup_energy_factor * e0 && e0 > 0.0 {
            failure = Some(SolverFailure::BlowUp {
                time: t,
                reason: format!("energy grew by factor {:.4}", e / e0),
            });
            break;
        }
        let (k_next, stats_next) = ns.nonlinear(&next);
        dissipation += ns.step_dissipation(&u, &k1, &next, &k_next, dt);
        u = next;
        k1 = k_next;
        stats = stats_next;
        t = (n + 1) as f64 * dt;
        taken = n + 1;
        if taken % config.diagnostics_stride == 0 || taken == steps {
            samples.push(sample(&u, t, stats, dissipation)?);
        }
    }

    let terminal_energy = ns.energy(&u);
    let balance_residual = terminal_energy - e0 + dissipation;
    let balance_ok = balance_residual.abs() <= config.tol_balance * 2.0 * e0;
    Ok(Trajectory {
        samples,
        terminal: Field::spectral(grid.clone(), u)?,
        terminal_time: t,
        dt,
        steps: taken,
        dissipation,
        initial_energy: e0,
        balance_residual,
        balance_ok,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{l2_norm, Representation};
    use std::f64::consts::PI;

    fn taylor_green(grid: &Grid) -> Field {
        Field::sample(grid, Rank::Vector, |x, o| {
            o[0] = x[0].sin() * x[1].cos();
            o[1] = -x[0].cos() * x[1].sin();
        })
        .to_spectral()
    }

    #[test]
    fn zero_field_is_a_fixed_point() {
        let grid = Grid::cubic(2, 16, 2.0 * PI).unwrap();
        let z = Field::zeros(&grid, Rank::Vector, Representation::Spectral);
        assert_eq!(l2_norm(&nonlinear_term(&z, 2.0 / 3.0).unwrap()), 0.0);
        assert_eq!(l2_norm(&step(&z, 0.1, 0.3).unwrap()), 0.0);
        let traj = solve(&z, 0.1, &SolverConfig::default()).unwrap();
        assert!(traj.completed());
        assert_eq!(traj.dissipation, 0.0);
    }

    #[test]
    fn shear_advection_vanishes() {
        let grid = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let u = Field::sample(&grid, Rank::Vector, |x, o| {
            o[0] = 0.7 * (3.0 * x[1]).sin();
            o[1] = 0.0;
        })
        .to_spectral();
        let nl = nonlinear_term(&u, 2.0 / 3.0).unwrap();
        assert!(l2_norm(&nl) < 1e-13);
    }

    #[test]
    fn taylor_green_advection_is_a_gradient() {
        let grid = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let nl = nonlinear_term(&taylor_green(&grid), 2.0 / 3.0).unwrap();
        assert!(l2_norm(&nl) < 1e-12);
    }

    #[test]
    fn config_validation() {
        let bad = [
            SolverConfig {
                dealias_fraction: 0.0,
                ..SolverConfig::default()
            },
            SolverConfig {
                diagnostics_stride: 0,
                ..SolverConfig::default()
            },
            SolverConfig {
                time_step: TimeStep::Fixed(-1.0),
                ..SolverConfig::default()
            },
            SolverConfig {
                horizon: f64::NAN,
                ..SolverConfig::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn fixed_step_above_cfl_is_rejected() {
        let grid = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let c = SolverConfig {
            time_step: TimeStep::Fixed(0.5),
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve(&taylor_green(&grid), 0.1, &c),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn scalar_state_is_rejected() {
        let grid = Grid::cubic(2, 16, 2.0 * PI).unwrap();
        let s = Field::zeros(&grid, Rank::Scalar, Representation::Spectral);
        assert!(solve(&s, 0.1, &SolverConfig::default()).is_err());
        assert!(step(&s, 0.1, 0.1).is_err());
    }

    fn perturbed_taylor_green(grid: &Grid) -> Field {
        Field::sample(grid, Rank::Vector, |x, o| {
            o[0] = x[0].sin() * x[1].cos() + 0.5 * (2.0 * x[1]).sin();
            o[1] = -x[0].cos() * x[1].sin() + 0.3 * x[0].cos();
        })
        .to_spectral()
    }

    fn fixed(dt: f64, horizon: f64) -> SolverConfig {
        SolverConfig {
            time_step: TimeStep::Fixed(dt),
            horizon,
            cfl: 1.0,
            ..SolverConfig::default()
        }
    }

    fn difference(a: &Field, b: &Field) -> f64 {
        let (x, y) = (
            a.spectral_components().unwrap(),
            b.spectral_components().unwrap(),
        );
        let s: f64 = x
            .iter()
            .zip(y)
            .flat_map(|(p, q)| p.iter().zip(q).map(|(u, v)| (u - v).norm_sqr()))
            .sum();
        (s / a.grid().volume()).sqrt()
    }

    #[test]
    fn taylor_green_decays_at_the_heat_rate() {
        let grid = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let eps = 0.1;
        let traj = solve(&taylor_green(&grid), eps, &fixed(0.05, 1.0)).unwrap();
        assert!(traj.completed());
        let e0 = traj.initial_energy;
        for s in &traj.samples {
            assert!((s.energy - e0 * (-4.0 * eps * s.t).exp()).abs() < 1e-8 * e0);
            assert!(s.divergence_residual < 1e-12);
        }
        assert!(traj.balance_residual.abs() < 1e-8 * e0);
    }

    #[test]
    fn perturbed_taylor_green_converges_at_fourth_order() {
        let grid = Grid::cubic(2, 32, 2.0 * PI).unwrap();
        let u0 = perturbed_taylor_green(&grid);
        let (eps, horizon) = (0.05, 0.5);
        let run = |dt| solve(&u0, eps, &fixed(dt, horizon)).unwrap();
        let (a, b, c) = (run(0.05), run(0.025), run(0.0125));
        let order =
            (difference(&a.terminal, &b.terminal) / difference(&b.terminal, &c.terminal)).log2();
        assert!(order >= 3.8, "observed order {order}");
        let balance = (a.balance_residual / b.balance_residual).abs().log2();
        assert!(balance >= 3.0, "balance order {balance}");
        assert!(c.balance_residual.abs() < 1e-8 * 2.0 * c.initial_energy);
    }

    #[test]
    fn non_finite_state_trips_the_guard() {
        let grid = Grid::cubic(2, 16, 2.0 * PI).unwrap();
        let mut comps = taylor_green(&grid).into_spectral_components().unwrap();
        comps[0][1] = Complex64::new(f64::NAN, 0.0);
        let bad = Field::spectral(grid, comps).unwrap();
        assert!(matches!(step(&bad, 0.01, 0.1), Err(Error::BlowUp { .. })));
        let traj = solve(&bad, 0.1, &fixed(0.01, 1.0)).unwrap();
        assert!(matches!(traj.failure, Some(SolverFailure::BlowUp { time, .. }) if time == 0.0));
        assert_eq!(traj.steps, 0);
    }
}
