//! The viscosity-indexed family of divergence-free initial data.
//!
//! For dyadic index `n` and dimension `d`, with `ε = 2^{-2n}` and carrier
//! `κ = (17/12) 2^n`,
//!
//! ```text
//! f_n(x) = cos(κ x_1) ∏_i φ(ε x_i),
//! u_0(x) = 2^{-dn-n} (-∂_2 f_n, ∂_1 f_n, 0, …, 0).
//! ```
//!
//! Its transform is two translated copies of a product of `φ̂` factors, so the
//! spectrum sits in a thin shell around `|ξ| = κ`. Grid instances are built by
//! sampling the transform at lattice frequencies, which keeps them exactly
//! band-limited and exactly divergence-free.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::cutoffs::CutoffSpec;
use crate::error::{config, Result};
use crate::fourier::{self, Field, Grid};
use crate::littlewood_paley::{besov_norm, BesovIndex};
use crate::quad;

/// Relative periodization discrepancy above which a [`BoxPlan`] is flagged.
pub const TAIL_THRESHOLD: f64 = 1e-6;

/// Default box length in units of the envelope scale `2^{2n}`.
pub const DEFAULT_BOX_MULTIPLIER: f64 = 512.0;

/// Resolved spectrum must sit below `1/DEALIAS_MARGIN` of the Nyquist frequency.
const DEALIAS_MARGIN: f64 = 1.5;

pub fn carrier_ratio() -> Rational64 {
    Rational64::new(17, 12)
}

pub fn annulus_inner_ratio() -> Rational64 {
    Rational64::new(33, 24)
}

pub fn annulus_outer_ratio() -> Rational64 {
    Rational64::new(35, 24)
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Construction parameters of one member of the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataParams {
    pub n: u32,
    pub d: usize,
}

impl DataParams {
    pub fn new(n: u32, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(config("dyadic index n must be at least 1"));
        }
        if d < 2 {
            return Err(config("dimension must be at least 2"));
        }
        if n > 60 {
            return Err(config("dyadic index n is limited to 60"));
        }
        Ok(Self { n, d })
    }

    pub fn two_pow_n(&self) -> f64 {
        2f64.powi(self.n as i32)
    }

    /// Viscosity `ε_n = 2^{-2n}`.
    pub fn eps(&self) -> f64 {
        2f64.powi(-2 * self.n as i32)
    }

    /// `κ_n = (17/12) 2^n`.
    pub fn carrier(&self) -> f64 {
        let r = carrier_ratio();
        *r.numer() as f64 * self.two_pow_n() / *r.denom() as f64
    }

    /// `A_n = 2^{-dn-n}`.
    pub fn amplitude(&self) -> f64 {
        2f64.powi(-((self.d as i32 + 1) * self.n as i32))
    }

    /// Nominal annulus `[33/24, 35/24] · 2^n`.
    pub fn annulus(&self) -> (f64, f64) {
        (
            ratio_f64(annulus_inner_ratio()) * self.two_pow_n(),
            ratio_f64(annulus_outer_ratio()) * self.two_pow_n(),
        )
    }
}

/// Box and resolution chosen for one grid instance, with the measured
/// periodization discrepancy of the data on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxPlan {
    /// Box length along the carrier axis over `2^{2n}`.
    pub box_multiplier: f64,
    pub box_lengths: Vec<f64>,
    pub points_per_axis: Vec<usize>,
    /// `1 - (periodic L² mass)/(whole-space L² mass)`.
    pub tail_mass: f64,
    pub tail_warning: bool,
}

/// One nonzero lattice coefficient of a sparse spectral field.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMode {
    pub flat: usize,
    pub k: Vec<i64>,
    pub xi: Vec<f64>,
    pub coeff: Vec<Complex64>,
}

/// Lattice spectrum stored by its nonzero modes only.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpectrum {
    grid: Grid,
    modes: Vec<SparseMode>,
}

impl SparseSpectrum {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn modes(&self) -> &[SparseMode] {
        &self.modes
    }

    /// Parseval `L²` mass on the periodic box.
    pub fn l2_sq(&self) -> f64 {
        let sum: f64 = self
            .modes
            .iter()
            .flat_map(|m| m.coeff.iter())
            .map(|c| c.norm_sqr())
            .sum();
        sum / self.grid.volume()
    }

    /// Dense spectral field with the same coefficients.
    pub fn to_field(&self) -> Field {
        let d = self.grid.dim();
        let zero = Complex64::new(0.0, 0.0);
        let mut comps = vec![vec![zero; self.grid.len()]; d];
        for m in &self.modes {
            for (c, v) in comps.iter_mut().zip(&m.coeff) {
                c[m.flat] = *v;
            }
        }
        Field::spectral(self.grid.clone(), comps).expect("shape matches grid")
    }

    /// Band-limited synthesis at an arbitrary point, `V^{-1} Σ_k û_k e^{iξ·x}`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.grid.dim();
        let mut out = vec![0.0; d];
        for m in &self.modes {
            let phase: f64 = m.xi.iter().zip(x).map(|(a, b)| a * b).sum();
            let e = Complex64::from_polar(1.0, phase);
            for (o, c) in out.iter_mut().zip(&m.coeff) {
                *o += (c * e).re;
            }
        }
        let inv_v = 1.0 / self.grid.volume();
        out.iter_mut().for_each(|o| *o *= inv_v);
        out
    }

    /// Smallest and largest `|ξ|` among nonzero modes.
    pub fn radius_range(&self) -> (f64, f64) {
        self.modes
            .iter()
            .filter(|m| m.coeff.iter().any(|c| c.norm() > 0.0))
            .map(|m| m.xi.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            })
    }
}

/// Norms of a grid instance and their ratios to the envelope norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub linf: f64,
    /// `L∞` after 2× band-limited oversampling; a sharper lower bound.
    pub linf_oversampled: f64,
    pub besov_b1_inf1: f64,
    pub phi_l2: f64,
    pub phi_linf: f64,
    /// `‖u_0‖_{L²} / ‖φ‖^d_{L²}`.
    pub l2_ratio: f64,
    /// `‖u_0‖_{B¹_{∞,1}} / (2^{(1-d)n} ‖φ‖^d_{L∞})`.
    pub besov_ratio: f64,
    /// `|linf_oversampled / linf - 1|`.
    pub refinement_change: f64,
}

/// The data family for one `(n, d)` with a given envelope cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    params: DataParams,
    cutoff: CutoffSpec,
}

impl InitialData {
    pub fn new(params: DataParams) -> Self {
        Self::with_cutoff(params, CutoffSpec::default())
    }

    pub fn with_cutoff(params: DataParams, cutoff: CutoffSpec) -> Self {
        Self { params, cutoff }
    }

    pub fn params(&self) -> &DataParams {
        &self.params
    }

    pub fn cutoff(&self) -> &CutoffSpec {
        &self.cutoff
    }

    /// Half-width of each spectral bump per axis, `R ε` with `R` the cutoff radius.
    pub fn bump_half_width(&self) -> f64 {
        self.cutoff.outer_radius * self.params.eps()
    }

    /// Exact bound on `|ξ_axis|` over the spectral support.
    pub fn support_extent(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.params.carrier() + self.bump_half_width()
        } else {
            self.bump_half_width()
        }
    }

    fn dim_check(&self, len: usize) {
        assert_eq!(
            len, self.params.d,
            "point dimension does not match data dimension"
        );
    }

    pub fn f_n(&self, x: &[f64]) -> Result<f64> {
        self.dim_check(x.len());
        let eps = self.params.eps();
        let mut prod = (self.params.carrier() * x[0]).cos();
        for &xi in x {
            prod *= self.cutoff.phi(eps * xi)?;
        }
        Ok(prod)
    }

    pub fn grad_f_n(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.dim_check(x.len());
        let eps = self.params.eps();
        let kappa = self.params.carrier();
        let phis = x
            .iter()
            .map(|&xi| self.cutoff.phi(eps * xi))
            .collect::<Result<Vec<_>>>()?;
        let dphis = x
            .iter()
            .map(|&xi| self.cutoff.phi_prime(eps * xi))
            .collect::<Result<Vec<_>>>()?;
        let (s, c) = (kappa * x[0]).sin_cos();
        let others = |skip: usize| -> f64 {
            phis.iter()
                .enumerate()
                .filter(|(i, _)| *i != skip && *i != 0)
                .map(|(_, v)| v)
                .product()
        };
        let mut grad = vec![0.0; x.len()];
        grad[0] = (-kappa * s * phis[0] + eps * c * dphis[0]) * others(0);
        for j in 1..x.len() {
            grad[j] = eps * c * phis[0] * dphis[j] * others(j);
        }
        Ok(grad)
    }

    /// `u_0(x) = A (-∂_2 f, ∂_1 f, 0, …)`.
    pub fn u0_physical(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.grad_f_n(x)?;
        let a = self.params.amplitude();
        let mut u = vec![0.0; x.len()];
        u[0] = -a * g[1];
        u[1] = a * g[0];
        Ok(u)
    }

    /// `f̂_n(ξ) = 2^{2nd-1} [φ̂(2^{2n}(ξ_1+κ)) + φ̂(2^{2n}(ξ_1-κ))] ∏_{i≥2} φ̂(2^{2n} ξ_i)`.
    pub fn f_hat(&self, xi: &[f64]) -> f64 {
        self.dim_check(xi.len());
        let inv_eps = 1.0 / self.params.eps();
        let kappa = self.params.carrier();
        let mut transverse = 1.0;
        for &x in &xi[1..] {
            transverse *= self.cutoff.phi_hat(inv_eps * x);
            if transverse == 0.0 {
                return 0.0;
            }
        }
        let carrier = self.cutoff.phi_hat(inv_eps * (xi[0] + kappa))
            + self.cutoff.phi_hat(inv_eps * (xi[0] - kappa));
        let prefactor = 2f64.powi((2 * self.params.n as i32) * self.params.d as i32 - 1);
        prefactor * carrier * transverse
    }

    /// `û_0(ξ) = A (-iξ_2, iξ_1, 0, …) f̂_n(ξ)`; orthogonal to `ξ` identically.
    pub fn u0_fourier(&self, xi: &[f64]) -> Vec<Complex64> {
        let f = self.params.amplitude() * self.f_hat(xi);
        let mut u = vec![Complex64::new(0.0, 0.0); xi.len()];
        u[0] = Complex64::new(0.0, -xi[1] * f);
        u[1] = Complex64::new(0.0, xi[0] * f);
        u
    }

    /// Grid with box `M·2^{2n}` per axis and, per axis, the smallest power of two
    /// whose Nyquist frequency clears the spectral extent with dealiasing
    /// margin. `carrier_points` overrides the resolution of axis 0.
    pub fn auto_grid(&self, box_multiplier: f64, carrier_points: Option<usize>) -> Result<Grid> {
        if !(box_multiplier > 0.0 && box_multiplier.is_finite()) {
            return Err(config(format!(
                "box multiplier must be positive, got {box_multiplier}"
            )));
        }
        let length = box_multiplier / self.params.eps();
        let points = (0..self.params.d)
            .map(|axis| {
                if axis == 0 {
                    if let Some(n) = carrier_points {
                        return n;
                    }
                }
                let need = DEALIAS_MARGIN * self.required_extent(axis) * length / PI;
                (need.ceil() as usize).next_power_of_two().max(8)
            })
            .collect();
        Grid::new(points, vec![length; self.params.d])
    }

    /// Extent the Nyquist frequency must clear: the nominal annulus on the
    /// carrier axis (or the exact support if it sticks out), the bump elsewhere.
    fn required_extent(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.support_extent(0).max(self.params.annulus().1)
        } else {
            self.support_extent(axis)
        }
    }

    pub fn check_nyquist(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.params.d {
            return Err(config(format!(
                "grid dimension {} differs from data dimension {}",
                grid.dim(),
                self.params.d
            )));
        }
        for axis in 0..grid.dim() {
            let need = DEALIAS_MARGIN * self.required_extent(axis);
            if grid.nyquist_frequency(axis) < need {
                return Err(config(format!(
                    "axis {axis}: Nyquist frequency {:.6} below required {need:.6}",
                    grid.nyquist_frequency(axis)
                )));
            }
        }
        Ok(())
    }

    /// Nonzero lattice coefficients of the grid instance.
    pub fn lattice_spectrum(&self, grid: &Grid) -> Result<SparseSpectrum> {
        self.check_nyquist(grid)?;
        let d = self.params.d;
        let kappa = self.params.carrier();
        let w = self.bump_half_width();
        let mut ranges: Vec<Vec<i64>> = Vec::with_capacity(d);
        let step0 = grid.frequency_step(0);
        let lo = ((kappa - w) / step0).ceil() as i64;
        let hi = ((kappa + w) / step0).floor() as i64;
        let mut axis0: Vec<i64> = (-hi..=-lo).chain(lo..=hi).collect();
        axis0.sort_unstable();
        ranges.push(axis0);
        for axis in 1..d {
            let m = (w / grid.frequency_step(axis)).floor() as i64;
            ranges.push((-m..=m).collect());
        }
        let steps: Vec<f64> = (0..d).map(|a| grid.frequency_step(a)).collect();

        let mut modes = Vec::new();
        let mut k = vec![0i64; d];
        let mut idx = vec![0usize; d];
        'outer: loop {
            for a in 0..d {
                k[a] = ranges[a][idx[a]];
            }
            let xi: Vec<f64> = k.iter().zip(&steps).map(|(&ka, s)| ka as f64 * s).collect();
            let coeff = self.u0_fourier(&xi);
            if coeff.iter().any(|c| c.norm() > 0.0) {
                let flat = grid.flat_mode_index(&k).ok_or_else(|| {
                    config(format!(
                        "lattice mode {k:?} is not representable on the grid"
                    ))
                })?;
                modes.push(SparseMode {
                    flat,
                    k: k.clone(),
                    xi,
                    coeff,
                });
            }
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < ranges[a].len() {
                    continue 'outer;
                }
                idx[a] = 0;
            }
            break;
        }
        modes.sort_by_key(|m| m.flat);
        Ok(SparseSpectrum {
            grid: grid.clone(),
            modes,
        })
    }

    /// Dense spectral field on `grid` plus its box plan.
    pub fn u0_on_grid(&self, grid: &Grid) -> Result<(Field, BoxPlan)> {
        let sparse = self.lattice_spectrum(grid)?;
        let plan = self.box_plan(&sparse)?;
        Ok((sparse.to_field(), plan))
    }

    pub fn box_plan(&self, sparse: &SparseSpectrum) -> Result<BoxPlan> {
        let grid = sparse.grid();
        let tail_mass = 1.0 - sparse.l2_sq() / self.exact_l2_sq()?;
        Ok(BoxPlan {
            box_multiplier: grid.lengths()[0] * self.params.eps(),
            box_lengths: grid.lengths().to_vec(),
            points_per_axis: grid.points().to_vec(),
            tail_mass,
            tail_warning: tail_mass.abs() > TAIL_THRESHOLD,
        })
    }

    /// `∫ ξ_1^p w_1(ξ_1) e^{-a ξ_1²} dξ_1` over the carrier axis, where
    /// `w_1 = φ̂²(2^{2n}(ξ_1+κ)) + φ̂²(2^{2n}(ξ_1-κ))`, divided by `κ^p e^{-aκ²}`.
    fn carrier_moment_scaled(&self, p: i32, a: f64) -> Result<f64> {
        let eps = self.params.eps();
        let kappa = self.params.carrier();
        let r = self.cutoff.outer_radius;
        let ri = self.cutoff.inner_radius;
        let f = |s: f64| {
            let y = eps * s / kappa;
            (1.0 + y).powi(p)
                * self.cutoff.phi_hat(s).powi(2)
                * (-a * eps * s * (2.0 * kappa + eps * s)).exp()
        };
        Ok(2.0 * eps * quad::integrate_panels(&f, &[-r, -ri, ri, r], 1e-14)?)
    }

    /// `∫ ξ^p φ̂²(2^{2n} ξ) e^{-a ξ²} dξ` over a transverse axis, divided by `ε^p`.
    fn transverse_moment_scaled(&self, p: i32, a: f64) -> Result<f64> {
        let eps = self.params.eps();
        let r = self.cutoff.outer_radius;
        let ri = self.cutoff.inner_radius;
        let f =
            |s: f64| s.powi(p) * self.cutoff.phi_hat(s).powi(2) * (-a * eps * eps * s * s).exp();
        Ok(eps * quad::integrate_panels(&f, &[-r, -ri, ri, r], 1e-14)?)
    }

    /// `(2π)^{-d} ∫ |û_0(ξ)|² e^{-a|ξ|²} dξ`, by separable one-dimensional quadrature.
    /// At `a = 0` this is `‖u_0‖²_{L²(ℝ^d)}`; at `a = 2εt` it is `‖e^{εtΔ}u_0‖²`.
    pub fn damped_l2_sq(&self, a: f64) -> Result<f64> {
        let d = self.params.d as i32;
        let eps = self.params.eps();
        let kappa = self.params.carrier();
        let c0 = self.carrier_moment_scaled(0, a)?;
        let c2 = self.carrier_moment_scaled(2, a)? * kappa * kappa;
        let t0 = self.transverse_moment_scaled(0, a)?;
        let t2 = self.transverse_moment_scaled(2, a)? * eps * eps;
        let damping = (-a * kappa * kappa).exp();
        let amp = self.params.amplitude();
        let prefactor =
            (2.0 * PI).powi(-d) * amp * amp * 2f64.powi(4 * self.params.n as i32 * d - 2);
        Ok(prefactor * damping * (c2 * t0.powi(d - 1) + c0 * t2 * t0.powi(d - 2)))
    }

    /// Whole-space `‖u_0‖²_{L²}` by Plancherel quadrature.
    pub fn exact_l2_sq(&self) -> Result<f64> {
        self.damped_l2_sq(0.0)
    }

    /// Whole-space `‖u_0‖_{L∞}` (componentwise maxima combined in the Euclidean
    /// sense), from the closed form. The transverse envelope peaks at the
    /// origin because `φ̂ ≥ 0`, which reduces each component to a 1-d search.
    pub fn exact_linf(&self) -> Result<f64> {
        let eps = self.params.eps();
        let kappa = self.params.carrier();
        let amp = self.params.amplitude();
        let phi0 = self.cutoff.phi(0.0)?;
        let d = self.params.d as i32;

        let max_dphi = maximize(|y| Ok(self.cutoff.phi_prime(y)?.abs()), 0.0, 40.0, 400)?;
        let first = amp * eps * phi0.powi(d - 1) * max_dphi;

        let g = |x: f64| -> Result<f64> {
            let (s, c) = (kappa * x).sin_cos();
            Ok((-kappa * s * self.cutoff.phi(eps * x)?
                + eps * c * self.cutoff.phi_prime(eps * x)?)
            .abs())
        };
        let second = amp * phi0.powi(d - 1) * maximize(g, 0.0, 3.0 * 2.0 * PI / kappa, 240)?;
        Ok(first.hypot(second))
    }
}

/// Scan `[lo, hi]` on `samples` points, then golden-section refine around the best.
fn maximize(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, samples: usize) -> Result<f64> {
    let h = (hi - lo) / samples as f64;
    let mut best = (lo, f(lo)?);
    for i in 1..=samples {
        let x = lo + h * i as f64;
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..80 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(best.1.max(f1).max(f2))
}

/// Norms of the grid instance and their ratios to the envelope norms.
pub fn verify_norms(data: &InitialData, grid: &Grid) -> Result<NormReport> {
    let (u0, _) = data.u0_on_grid(grid)?;
    let params = data.params();
    let d = params.d as i32;
    let l2 = fourier::l2_norm(&u0);
    let linf = fourier::linf_norm(&u0.to_physical())?;
    let linf_oversampled = fourier::linf_norm(&fourier::oversample(&u0, 2)?.to_physical())?;
    let besov_b1_inf1 = besov_norm(&u0, BesovIndex::b1_inf1())?;
    let phi_l2 = data.cutoff().phi_l2_sq()?.sqrt();
    let phi_linf = data.cutoff().phi_linf()?;
    Ok(NormReport {
        l2,
        linf,
        linf_oversampled,
        besov_b1_inf1,
        phi_l2,
        phi_linf,
        l2_ratio: l2 / phi_l2.powi(d),
        besov_ratio: besov_b1_inf1 / (2f64.powi((1 - d) * params.n as i32) * phi_linf.powi(d)),
        refinement_change: (linf_oversampled / linf - 1.0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: u32, d: usize) -> InitialData {
        InitialData::new(DataParams::new(n, d).unwrap())
    }

    #[test]
    fn params_are_exact_dyadic_values() {
        let p = DataParams::new(3, 2).unwrap();
        assert_eq!(p.eps(), 1.0 / 64.0);
        assert_eq!(p.carrier() / p.two_pow_n(), 17.0 / 12.0);
        assert_eq!(p.amplitude(), 2f64.powi(-9));
        assert!(DataParams::new(0, 2).is_err());
        assert!(DataParams::new(1, 1).is_err());
        let (lo, hi) = DataParams::new(1, 2).unwrap().annulus();
        assert_eq!(lo, 2.75);
        assert!((hi - 35.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn f_n_and_u0_at_origin() {
        let u = data(2, 3);
        let phi0 = u.cutoff().phi(0.0).unwrap();
        assert!((u.f_n(&[0.0; 3]).unwrap() - phi0.powi(3)).abs() < 1e-15);
        let g = u.grad_f_n(&[0.0; 3]).unwrap();
        assert!(g[1].abs() < 1e-18 && g[2].abs() < 1e-18);
        let v = u.u0_physical(&[0.0; 3]).unwrap();
        assert!(v.iter().all(|c| c.abs() < 1e-18));
        let w = u.u0_physical(&[0.3, -1.2, 4.0]).unwrap();
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn fourier_value_at_carrier_center() {
        for (n, d) in [(1u32, 2usize), (2, 2), (2, 3)] {
            let u = data(n, d);
            let mut xi = vec![0.0; d];
            xi[0] = u.params().carrier();
            let v = u.u0_fourier(&xi);
            let expected = 17.0 / 12.0 * 2f64.powi(n as i32 * d as i32 - 1);
            assert_eq!(v[0], Complex64::new(0.0, 0.0));
            assert!((v[1].im - expected).abs() < 1e-12 * expected);
            assert_eq!(v[1].re, 0.0);
        }
    }

    #[test]
    fn nyquist_violation_is_a_configuration_error() {
        let u = data(1, 2);
        let coarse = Grid::new(vec![32, 64], vec![64.0 * 16.0; 2]).unwrap();
        assert!(matches!(
            u.lattice_spectrum(&coarse),
            Err(crate::Error::Config(_))
        ));
        let wrong_dim = Grid::cubic(3, 64, 64.0).unwrap();
        assert!(u.lattice_spectrum(&wrong_dim).is_err());
    }

    #[test]
    fn auto_grid_is_anisotropic_power_of_two() {
        let u = data(2, 2);
        let g = u.auto_grid(256.0, None).unwrap();
        assert_eq!(g.points(), &[16384, 64]);
        assert_eq!(g.lengths(), &[4096.0, 4096.0]);
        u.check_nyquist(&g).unwrap();
        let g1 = data(1, 2).auto_grid(16.0, None).unwrap();
        assert_eq!(g1.points(), &[128, 8]);
    }

    #[test]
    fn sparse_and_dense_instances_agree() {
        let u = data(1, 2);
        let grid = u.auto_grid(64.0, None).unwrap();
        let sparse = u.lattice_spectrum(&grid).unwrap();
        let (dense, plan) = u.u0_on_grid(&grid).unwrap();
        assert!((fourier::l2_norm_sq(&dense) - sparse.l2_sq()).abs() < 1e-14 * sparse.l2_sq());
        assert_eq!(plan.points_per_axis, grid.points().to_vec());
        let phys = dense.to_physical();
        let comps = phys.physical_components().unwrap();
        let mut checked = 0;
        grid.visit_points(|flat, x| {
            if flat % 97 == 0 {
                let v = sparse.eval(x);
                for c in 0..2 {
                    assert!((v[c] - comps[c][flat]).abs() < 1e-12);
                }
                checked += 1;
            }
        });
        assert!(checked > 10);
    }
}
