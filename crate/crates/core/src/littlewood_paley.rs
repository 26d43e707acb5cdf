//! Nonhomogeneous dyadic blocks and Besov norms of grid fields.
//!
//! `Δ_{-1} = ϑ(D)`, `Δ_j = ψ(2^{-j} D)` for `j ≥ 0`, `Δ_j = 0` below, with the
//! multipliers applied at lattice frequencies.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoffs::LpSpec;
use crate::error::{config, Result};
use crate::fourier::{linf_of_components, spectral_energy_sum, FftEngine, Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrability {
    Two,
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Summability {
    One,
    Two,
    Infinity,
}

/// Exponents `(s, p, r)` of `B^s_{p,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s: f64,
    pub p: Integrability,
    pub r: Summability,
}

impl BesovIndex {
    pub fn new(s: f64, p: Integrability, r: Summability) -> Self {
        Self { s, p, r }
    }

    /// `B¹_{∞,1}`, the space of the a-priori estimate.
    pub fn b1_inf1() -> Self {
        Self::new(1.0, Integrability::Infinity, Summability::One)
    }
}

/// Largest `j` whose block can meet the lattice, `3/4 · 2^j ≤ max |ξ|`.
pub fn highest_block(grid: &Grid) -> i32 {
    let spec = LpSpec::default();
    let kmax = grid.max_frequency();
    let mut j = -1;
    while spec.inner_radius * 2f64.powi(j + 1) <= kmax {
        j += 1;
    }
    j
}

fn block_components(j: i32, field: &Field, spec: &LpSpec) -> Vec<Vec<Complex64>> {
    let spectral = field.to_spectral();
    let comps = spectral.spectral_components().expect("spectral");
    let grid = spectral.grid();
    let mut out = comps.to_vec();
    grid.visit_frequencies(|flat, xi| {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let m = spec.block_multiplier(j, r);
        if m != 1.0 {
            for c in out.iter_mut() {
                c[flat] *= m;
            }
        }
    });
    out
}

/// `Δ_j u` as a spectral field.
pub fn dyadic_block(j: i32, field: &Field) -> Result<Field> {
    let comps = block_components(j, field, &LpSpec::default());
    Field::spectral(field.grid().clone(), comps)
}

/// Relative size of Nyquist-plane coefficients still treated as rounding noise.
const NYQUIST_NOISE: f64 = 1e-12;

/// Blocks are only meaningful when no content sits on an unpaired Nyquist plane.
fn check_resolved(field: &Field) -> Result<()> {
    let spectral = field.to_spectral();
    let comps = spectral.spectral_components()?;
    let grid = spectral.grid();
    // sampled fields leave rounding noise on the Nyquist planes
    let peak = comps
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let floor = NYQUIST_NOISE * peak;
    let mut bad = false;
    grid.visit_positions(|flat, pos| {
        if !bad && pos.iter().enumerate().any(|(a, &p)| grid.is_nyquist(a, p)) {
            bad = comps.iter().any(|c| c[flat].norm() > floor);
        }
    });
    if bad {
        return Err(config(
            "field has content on a Nyquist plane; grid too coarse for its dyadic blocks",
        ));
    }
    Ok(())
}

/// `(j, ‖Δ_j u‖_{L^p})` for `j = -1 ..= highest_block`. Vector fields combine
/// componentwise norms in the Euclidean sense. `L∞` is the max over samples.
pub fn block_norms(field: &Field, p: Integrability) -> Result<Vec<(i32, f64)>> {
    check_resolved(field)?;
    let grid = field.grid();
    let spec = LpSpec::default();
    let engine = FftEngine::new(grid);
    let mut norms = Vec::new();
    for j in -1..=highest_block(grid) {
        let comps = block_components(j, field, &spec);
        let energy = spectral_energy_sum(&comps);
        let norm = if energy == 0.0 {
            0.0
        } else {
            match p {
                Integrability::Two => (energy / grid.volume()).sqrt(),
                Integrability::Infinity => {
                    let phys: Vec<Vec<f64>> = comps.iter().map(|c| engine.to_physical(c)).collect();
                    linf_of_components(&phys)
                }
            }
        };
        norms.push((j, norm));
    }
    Ok(norms)
}

/// `‖ 2^{js} ‖Δ_j u‖_{L^p} ‖_{ℓ^r(j ≥ -1)}`.
pub fn besov_norm(field: &Field, idx: BesovIndex) -> Result<f64> {
    let weighted = block_norms(field, idx.p)?.into_iter().map(|(j, n)| {
        if n == 0.0 {
            0.0
        } else {
            2f64.powi(j).powf(idx.s) * n
        }
    });
    Ok(match idx.r {
        Summability::One => weighted.sum(),
        Summability::Two => weighted.map(|w| w * w).sum::<f64>().sqrt(),
        Summability::Infinity => weighted.fold(0.0, f64::max),
    })
}
