//! Periodic grids, the continuum-normalized discrete Fourier transform and the
//! spectral operators built on it.
//!
//! Transform convention: `û(ξ) = ∫ e^{-i x·ξ} u(x) dx`, discretized as
//! `û_k = (∏ L/N) Σ_j u_j e^{-2πi k·j/N}` so spectral values approximate the
//! whole-space transform directly. The inverse carries `(2π)^{-d}` times the
//! lattice weight `∏ 2π/L`, i.e. `1/V`. Parseval then reads
//! `‖u‖² = (2π)^{-d} ‖û‖² = V^{-1} Σ_k |û_k|²`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{config, contract, Result};

/// Periodic box `∏ [0, L_i)` sampled with `N_i` points per axis.
///
/// Axes may have different lengths and resolutions; the data used by the
/// experiments is strongly anisotropic in frequency and only the carrier axis
/// needs fine resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<usize>,
    lengths: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        if points.len() != lengths.len() {
            return Err(config(format!(
                "grid has {} point counts but {} box lengths",
                points.len(),
                lengths.len()
            )));
        }
        if points.len() < 2 {
            return Err(config("grid dimension must be at least 2"));
        }
        for (&n, &l) in points.iter().zip(&lengths) {
            if n < 8 || n % 2 != 0 {
                return Err(config(format!(
                    "points per axis must be even and >= 8, got {n}"
                )));
            }
            if !(l > 0.0 && l.is_finite()) {
                return Err(config(format!("box length must be positive, got {l}")));
            }
        }
        Ok(Self { points, lengths })
    }

    /// Same resolution and length on every axis.
    pub fn cubic(d: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(vec![n; d], vec![length; d])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Quadrature weight of one grid cell, `∏ L_i / N_i`.
    pub fn cell_volume(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.lengths)
            .map(|(&n, &l)| l / n as f64)
            .product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    /// Lattice spacing in frequency, `2π / L`.
    pub fn frequency_step(&self, axis: usize) -> f64 {
        2.0 * PI / self.lengths[axis]
    }

    /// Largest representable frequency along `axis`, `π N / L`.
    pub fn nyquist_frequency(&self, axis: usize) -> f64 {
        PI * self.points[axis] as f64 / self.lengths[axis]
    }

    /// Radius of the smallest ball containing every lattice frequency.
    pub fn max_frequency(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.nyquist_frequency(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Signed mode number of array position `i` along `axis`: `0..N/2-1`, then `-N/2..-1`.
    pub fn mode_number(&self, axis: usize, i: usize) -> i64 {
        let n = self.points[axis];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Array position of signed mode number `k`, if it is on the lattice.
    pub fn mode_position(&self, axis: usize, k: i64) -> Option<usize> {
        let n = self.points[axis] as i64;
        if k < -n / 2 || k >= n / 2 {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + n) as usize)
        }
    }

    /// Physical frequencies `ξ = (2π/L) k` in array order.
    pub fn frequencies(&self, axis: usize) -> Vec<f64> {
        let step = self.frequency_step(axis);
        (0..self.points[axis])
            .map(|i| step * self.mode_number(axis, i) as f64)
            .collect()
    }

    /// Coordinate of point `j` folded into `[-L/2, L/2)`.
    pub fn centered_coordinate(&self, axis: usize, j: usize) -> f64 {
        self.spacing(axis) * self.mode_number(axis, j) as f64
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for a in (0..self.dim() - 1).rev() {
            strides[a] = strides[a + 1] * self.points[a + 1];
        }
        strides
    }

    /// Flat (row-major) index of the lattice mode with signed numbers `k`.
    pub fn flat_mode_index(&self, k: &[i64]) -> Option<usize> {
        let strides = self.strides();
        let mut flat = 0;
        for (a, &ka) in k.iter().enumerate() {
            flat += self.mode_position(a, ka)? * strides[a];
        }
        Some(flat)
    }

    /// Calls `f(flat, ξ)` for every lattice frequency in storage order.
    pub fn visit_frequencies(&self, mut f: impl FnMut(usize, &[f64])) {
        let tables: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.frequencies(a)).collect();
        self.visit_positions(|flat, pos| {
            let mut xi = [0.0; 8];
            for (a, &p) in pos.iter().enumerate() {
                xi[a] = tables[a][p];
            }
            f(flat, &xi[..pos.len()]);
        });
    }

    /// Calls `f(flat, x)` for every grid point, with centered coordinates.
    pub fn visit_points(&self, mut f: impl FnMut(usize, &[f64])) {
        let d = self.dim();
        self.visit_positions(|flat, pos| {
            let mut x = [0.0; 8];
            for a in 0..d {
                x[a] = self.centered_coordinate(a, pos[a]);
            }
            f(flat, &x[..d]);
        });
    }

    /// Odometer over array positions.
    pub(crate) fn visit_positions(&self, mut f: impl FnMut(usize, &[usize])) {
        let d = self.dim();
        assert!(d <= 8, "grids above eight dimensions are not supported");
        let mut pos = [0usize; 8];
        for flat in 0..self.len() {
            f(flat, &pos[..d]);
            for a in (0..d).rev() {
                pos[a] += 1;
                if pos[a] < self.points[a] {
                    break;
                }
                pos[a] = 0;
            }
        }
    }

    /// True when position `i` is the unpaired `-N/2` mode of `axis`.
    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.points[axis] / 2
    }
}

/// Unnormalized multi-dimensional FFT over a [`Grid`], one plan per axis.
pub struct FftEngine {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftEngine")
            .field("grid", &self.grid)
            .finish()
    }
}

impl FftEngine {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid
            .points()
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect();
        let inverse = grid
            .points()
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect();
        Self {
            grid: grid.clone(),
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `Σ_j u_j e^{-2πi k·j/N}` in place.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.apply(&self.forward, buf);
    }

    /// `Σ_k û_k e^{+2πi k·j/N}` in place (no `1/N` factor).
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.apply(&self.inverse, buf);
    }

    fn apply(&self, plans: &[Arc<dyn Fft<f64>>], buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.grid.len(), "buffer does not match grid");
        let points = self.grid.points();
        let zero = Complex64::new(0.0, 0.0);
        for (axis, plan) in plans.iter().enumerate() {
            let n = points[axis];
            let inner: usize = points[axis + 1..].iter().product();
            let mut scratch = vec![zero; plan.get_inplace_scratch_len()];
            if inner == 1 {
                plan.process_with_scratch(buf, &mut scratch);
                continue;
            }
            // Lines along this axis are strided: transpose each n×inner block so
            // they become contiguous rows, transform, transpose back.
            let mut tmp = vec![zero; n * inner];
            for block in buf.chunks_exact_mut(n * inner) {
                for r in 0..n {
                    for c in 0..inner {
                        tmp[c * n + r] = block[r * inner + c];
                    }
                }
                plan.process_with_scratch(&mut tmp, &mut scratch);
                for r in 0..n {
                    for c in 0..inner {
                        block[r * inner + c] = tmp[c * n + r];
                    }
                }
            }
        }
    }

    /// Continuum-normalized forward transform of real samples.
    pub fn to_spectral(&self, values: &[f64]) -> Vec<Complex64> {
        let w = self.grid.cell_volume();
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v * w, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Continuum-normalized inverse transform; imaginary round-off is dropped.
    pub fn to_physical(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse(&mut buf);
        let inv_v = 1.0 / self.grid.volume();
        buf.iter().map(|c| c.re * inv_v).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Physical to spectral.
    Forward,
    /// Spectral to physical.
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Physical(Vec<Vec<f64>>),
    Spectral(Vec<Vec<Complex64>>),
}

/// Scalar or `d`-vector samples on a grid, tagged with their representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    data: FieldData,
}

impl Field {
    fn check_components(
        grid: &Grid,
        count: usize,
        lens: impl Iterator<Item = usize>,
    ) -> Result<()> {
        if count != 1 && count != grid.dim() {
            return Err(contract(format!(
                "field must have 1 or {} components, got {count}",
                grid.dim()
            )));
        }
        for len in lens {
            if len != grid.len() {
                return Err(contract(format!(
                    "component has {len} samples, grid has {}",
                    grid.len()
                )));
            }
        }
        Ok(())
    }

    pub fn physical(grid: Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        Self::check_components(&grid, components.len(), components.iter().map(Vec::len))?;
        Ok(Self {
            grid,
            data: FieldData::Physical(components),
        })
    }

    pub fn spectral(grid: Grid, components: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::check_components(&grid, components.len(), components.iter().map(Vec::len))?;
        Ok(Self {
            grid,
            data: FieldData::Spectral(components),
        })
    }

    pub fn zeros(grid: &Grid, rank: Rank, representation: Representation) -> Self {
        let count = match rank {
            Rank::Scalar => 1,
            Rank::Vector => grid.dim(),
        };
        let data = match representation {
            Representation::Physical => FieldData::Physical(vec![vec![0.0; grid.len()]; count]),
            Representation::Spectral => {
                FieldData::Spectral(vec![vec![Complex64::new(0.0, 0.0); grid.len()]; count])
            }
        };
        Self {
            grid: grid.clone(),
            data,
        }
    }

    /// Samples `f(x, out)` at centered grid coordinates into a physical field.
    pub fn sample(grid: &Grid, rank: Rank, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let count = match rank {
            Rank::Scalar => 1,
            Rank::Vector => grid.dim(),
        };
        let mut comps = vec![vec![0.0; grid.len()]; count];
        let mut out = vec![0.0; count];
        grid.visit_points(|flat, x| {
            f(x, &mut out);
            for (c, v) in comps.iter_mut().zip(&out) {
                c[flat] = *v;
            }
        });
        Self {
            grid: grid.clone(),
            data: FieldData::Physical(comps),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &FieldData {
        &self.data
    }

    pub fn representation(&self) -> Representation {
        match self.data {
            FieldData::Physical(_) => Representation::Physical,
            FieldData::Spectral(_) => Representation::Spectral,
        }
    }

    pub fn component_count(&self) -> usize {
        match &self.data {
            FieldData::Physical(c) => c.len(),
            FieldData::Spectral(c) => c.len(),
        }
    }

    pub fn rank(&self) -> Rank {
        if self.component_count() == 1 {
            Rank::Scalar
        } else {
            Rank::Vector
        }
    }

    pub fn physical_components(&self) -> Result<&[Vec<f64>]> {
        match &self.data {
            FieldData::Physical(c) => Ok(c),
            FieldData::Spectral(_) => Err(contract("expected a physical field")),
        }
    }

    pub fn spectral_components(&self) -> Result<&[Vec<Complex64>]> {
        match &self.data {
            FieldData::Spectral(c) => Ok(c),
            FieldData::Physical(_) => Err(contract("expected a spectral field")),
        }
    }

    pub fn into_spectral_components(self) -> Result<Vec<Vec<Complex64>>> {
        match self.data {
            FieldData::Spectral(c) => Ok(c),
            FieldData::Physical(_) => Err(contract("expected a spectral field")),
        }
    }

    /// Spectral copy of this field, transforming if needed.
    pub fn to_spectral(&self) -> Field {
        match self.data {
            FieldData::Spectral(_) => self.clone(),
            FieldData::Physical(_) => transform(self, Direction::Forward).expect("physical input"),
        }
    }

    /// Physical copy of this field, transforming if needed.
    pub fn to_physical(&self) -> Field {
        match self.data {
            FieldData::Physical(_) => self.clone(),
            FieldData::Spectral(_) => transform(self, Direction::Inverse).expect("spectral input"),
        }
    }
}

pub fn transform(field: &Field, direction: Direction) -> Result<Field> {
    let engine = FftEngine::new(field.grid());
    match (direction, field.data()) {
        (Direction::Forward, FieldData::Physical(comps)) => Ok(Field {
            grid: field.grid.clone(),
            data: FieldData::Spectral(comps.iter().map(|c| engine.to_spectral(c)).collect()),
        }),
        (Direction::Inverse, FieldData::Spectral(comps)) => Ok(Field {
            grid: field.grid.clone(),
            data: FieldData::Physical(comps.iter().map(|c| engine.to_physical(c)).collect()),
        }),
        (Direction::Forward, _) => Err(contract("forward transform needs a physical field")),
        (Direction::Inverse, _) => Err(contract("inverse transform needs a spectral field")),
    }
}

/// Multiplies by `iξ_axis`; the unpaired Nyquist plane of that axis is zeroed
/// so derivatives of real fields stay real.
pub fn derivative(field: &Field, axis: usize) -> Result<Field> {
    let comps = field.spectral_components()?;
    let grid = field.grid();
    if axis >= grid.dim() {
        return Err(contract(format!(
            "axis {axis} out of range for a {}-d grid",
            grid.dim()
        )));
    }
    let mut out = comps.to_vec();
    let factors = derivative_factors(grid, axis);
    let stride = grid.strides()[axis];
    let n = grid.points()[axis];
    for comp in &mut out {
        for (flat, v) in comp.iter_mut().enumerate() {
            *v *= factors[(flat / stride) % n];
        }
    }
    Field::spectral(grid.clone(), out)
}

/// `iξ` along one axis with the Nyquist entry set to zero.
pub(crate) fn derivative_factors(grid: &Grid, axis: usize) -> Vec<Complex64> {
    grid.frequencies(axis)
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            if grid.is_nyquist(axis, i) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, xi)
            }
        })
        .collect()
}

/// Orthogonal projection onto divergence-free fields, `v̂ - ξ (ξ·v̂)/|ξ|²`.
/// The mean mode passes through unchanged.
pub fn leray_project(field: &Field) -> Result<Field> {
    let comps = field.spectral_components()?;
    if field.rank() != Rank::Vector {
        return Err(contract("Leray projection needs a vector field"));
    }
    let mut out = comps.to_vec();
    leray_in_place(field.grid(), &mut out);
    Field::spectral(field.grid().clone(), out)
}

pub(crate) fn leray_in_place(grid: &Grid, comps: &mut [Vec<Complex64>]) {
    let d = grid.dim();
    grid.visit_frequencies(|flat, xi| {
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            return;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for a in 0..d {
            dot += comps[a][flat] * xi[a];
        }
        let s = dot / k2;
        for a in 0..d {
            comps[a][flat] -= s * xi[a];
        }
    });
}

/// `‖u‖_{L²}` over the box, computed in whichever representation the field has.
pub fn l2_norm(field: &Field) -> f64 {
    l2_norm_sq(field).sqrt()
}

pub fn l2_norm_sq(field: &Field) -> f64 {
    match field.data() {
        FieldData::Physical(comps) => {
            let w = field.grid().cell_volume();
            w * comps
                .iter()
                .flat_map(|c| c.iter())
                .map(|v| v * v)
                .sum::<f64>()
        }
        FieldData::Spectral(comps) => spectral_energy_sum(comps) / field.grid().volume(),
    }
}

pub(crate) fn spectral_energy_sum(comps: &[Vec<Complex64>]) -> f64 {
    comps
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm_sqr())
        .sum()
}

/// Max of samples; vector fields combine componentwise maxima in the
/// Euclidean sense, which bounds the pointwise magnitude from above.
pub fn linf_norm(field: &Field) -> Result<f64> {
    let comps = field.physical_components()?;
    Ok(linf_of_components(comps))
}

pub(crate) fn linf_of_components(comps: &[Vec<f64>]) -> f64 {
    comps
        .iter()
        .map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `Σ_j ‖∂_j u‖²_{L²}` (summed over components), with the same Nyquist
/// treatment as [`derivative`].
pub fn grad_l2_sq(field: &Field) -> f64 {
    let spectral = field.to_spectral();
    let comps = spectral.spectral_components().expect("spectral");
    let grid = spectral.grid();
    let tables: Vec<Vec<f64>> = (0..grid.dim())
        .map(|a| {
            grid.frequencies(a)
                .iter()
                .enumerate()
                .map(|(i, &x)| if grid.is_nyquist(a, i) { 0.0 } else { x * x })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    grid.visit_positions(|flat, pos| {
        let k2: f64 = pos.iter().enumerate().map(|(a, &p)| tables[a][p]).sum();
        let e: f64 = comps.iter().map(|c| c[flat].norm_sqr()).sum();
        total += k2 * e;
    });
    total / grid.volume()
}

/// Band-limited interpolation onto a grid with `factor`× the points per axis
/// (same box). The unpaired Nyquist modes of the source are dropped.
pub fn oversample(field: &Field, factor: usize) -> Result<Field> {
    let spectral = field.to_spectral();
    let comps = spectral.spectral_components()?;
    let grid = spectral.grid();
    if factor == 0 {
        return Err(contract("oversampling factor must be positive"));
    }
    let fine = Grid::new(
        grid.points().iter().map(|n| n * factor).collect(),
        grid.lengths().to_vec(),
    )?;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![vec![zero; fine.len()]; comps.len()];
    let d = grid.dim();
    let mut k = vec![0i64; d];
    grid.visit_positions(|flat, pos| {
        if pos.iter().enumerate().any(|(a, &p)| grid.is_nyquist(a, p)) {
            return;
        }
        for a in 0..d {
            k[a] = grid.mode_number(a, pos[a]);
        }
        let target = fine
            .flat_mode_index(&k)
            .expect("finer lattice contains coarse modes");
        for (o, c) in out.iter_mut().zip(comps) {
            o[target] = c[flat];
        }
    });
    Field::spectral(fine, out)
}

/// `max_ξ |ξ·v̂(ξ)|`, relative to `max |v̂|` (zero for the zero field).
pub fn spectral_divergence_residual(field: &Field) -> Result<f64> {
    let comps = field.spectral_components()?;
    if field.rank() != Rank::Vector {
        return Err(contract("divergence needs a vector field"));
    }
    Ok(divergence_residual_of(field.grid(), comps))
}

pub(crate) fn divergence_residual_of(grid: &Grid, comps: &[Vec<Complex64>]) -> f64 {
    let mut max_div = 0.0f64;
    let mut max_coef = 0.0f64;
    grid.visit_frequencies(|flat, xi| {
        let mut div = Complex64::new(0.0, 0.0);
        for (a, c) in comps.iter().enumerate() {
            div += c[flat] * xi[a];
            max_coef = max_coef.max(c[flat].norm());
        }
        max_div = max_div.max(div.norm());
    });
    if max_coef == 0.0 {
        0.0
    } else {
        max_div / max_coef
    }
}

/// Largest `|v̂(-k) - conj(v̂(k))|` over paired modes, relative to `max |v̂|`.
/// Unpaired Nyquist positions are mapped onto themselves.
pub fn hermitian_defect(field: &Field) -> Result<f64> {
    let comps = field.spectral_components()?;
    let grid = field.grid();
    let strides = grid.strides();
    let points = grid.points();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    grid.visit_positions(|flat, pos| {
        let mirror: usize = pos
            .iter()
            .enumerate()
            .map(|(a, &p)| ((points[a] - p) % points[a]) * strides[a])
            .sum();
        for c in comps {
            worst = worst.max((c[mirror] - c[flat].conj()).norm());
            scale = scale.max(c[flat].norm());
        }
    });
    Ok(if scale == 0.0 { 0.0 } else { worst / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn constant_field_has_all_mass_at_zero() {
        let grid = Grid::new(vec![8, 16], vec![2.0, 3.0]).unwrap();
        let u = Field::sample(&grid, Rank::Scalar, |_, o| o[0] = 1.5);
        let s = u.to_spectral();
        let c = &s.spectral_components().unwrap()[0];
        assert!(close(c[0].re, 1.5 * 6.0, 1e-14));
        assert!(c.iter().skip(1).all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn single_cosine_has_two_half_volume_coefficients() {
        let l = 5.0;
        let grid = Grid::cubic(2, 16, l).unwrap();
        let u = Field::sample(&grid, Rank::Scalar, |x, o| {
            o[0] = (2.0 * PI * x[0] / l).cos()
        });
        let s = u.to_spectral();
        let c = &s.spectral_components().unwrap()[0];
        let v = grid.volume();
        let plus = grid.flat_mode_index(&[1, 0]).unwrap();
        let minus = grid.flat_mode_index(&[-1, 0]).unwrap();
        assert!(close(c[plus].re, v / 2.0, 1e-13));
        assert!(close(c[minus].re, v / 2.0, 1e-13));
        let rest: f64 = c
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != plus && *i != minus)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        assert!(rest < 1e-12);
    }

    #[test]
    fn round_trip_is_identity() {
        let grid = Grid::new(vec![8, 12, 10], vec![1.0, 2.0, 3.0]).unwrap();
        let u = Field::sample(&grid, Rank::Vector, |x, o| {
            o[0] = (x[0] * 3.0).sin() + x[1];
            o[1] = x[2].cos() * x[0];
            o[2] = 1.0 + x[0] * x[1] * x[2];
        });
        let back = u.to_spectral().to_physical();
        let a = u.physical_components().unwrap();
        let b = back.physical_components().unwrap();
        let scale = linf_norm(&u).unwrap();
        for (ca, cb) in a.iter().zip(b) {
            for (x, y) in ca.iter().zip(cb) {
                assert!((x - y).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn wrong_representation_is_a_contract_violation() {
        let grid = Grid::cubic(2, 8, 1.0).unwrap();
        let phys = Field::zeros(&grid, Rank::Vector, Representation::Physical);
        let spec = Field::zeros(&grid, Rank::Vector, Representation::Spectral);
        assert!(transform(&phys, Direction::Inverse).is_err());
        assert!(transform(&spec, Direction::Forward).is_err());
        assert!(derivative(&phys, 0).is_err());
        assert!(leray_project(&phys).is_err());
        assert!(linf_norm(&spec).is_err());
        let scalar = Field::zeros(&grid, Rank::Scalar, Representation::Spectral);
        assert!(leray_project(&scalar).is_err());
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::new(vec![8], vec![1.0]).is_err());
        assert!(Grid::new(vec![8, 7], vec![1.0, 1.0]).is_err());
        assert!(Grid::new(vec![8, 6], vec![1.0, 1.0]).is_err());
        assert!(Grid::new(vec![8, 8], vec![1.0, 0.0]).is_err());
        assert!(Grid::new(vec![8, 8], vec![1.0]).is_err());
    }

    #[test]
    fn derivative_of_cosine_and_constants() {
        let l = 2.0 * PI;
        let grid = Grid::cubic(2, 32, l).unwrap();
        let kappa = 3.0;
        let u = Field::sample(&grid, Rank::Scalar, |x, o| {
            o[0] = (kappa * x[0]).cos() + 2.0
        });
        let du = derivative(&u.to_spectral(), 0).unwrap().to_physical();
        let d2 = derivative(&u.to_spectral(), 1).unwrap().to_physical();
        let expected = Field::sample(&grid, Rank::Scalar, |x, o| {
            o[0] = -kappa * (kappa * x[0]).sin()
        });
        let a = &du.physical_components().unwrap()[0];
        let b = &expected.physical_components().unwrap()[0];
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(linf_norm(&d2).unwrap() < 1e-12);
    }

    #[test]
    fn sine_norms_match_exact_integrals() {
        let grid = Grid::new(vec![16, 8], vec![3.0, 2.0]).unwrap();
        let u = Field::sample(&grid, Rank::Scalar, |x, o| {
            o[0] = (2.0 * PI * x[0] / 3.0).sin()
        });
        let v = grid.volume();
        assert!(close(l2_norm_sq(&u), v / 2.0, 1e-13));
        assert!(close(l2_norm_sq(&u.to_spectral()), v / 2.0, 1e-13));
        let k = 2.0 * PI / 3.0;
        assert!(close(grad_l2_sq(&u), k * k * v / 2.0, 1e-12));
        let z = Field::zeros(&grid, Rank::Vector, Representation::Physical);
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(linf_norm(&z).unwrap(), 0.0);
        assert_eq!(grad_l2_sq(&z), 0.0);
    }

    #[test]
    fn gradient_fields_are_annihilated_by_leray() {
        let l = 2.0 * PI;
        let grid = Grid::cubic(2, 16, l).unwrap();
        let q = Field::sample(&grid, Rank::Scalar, |x, o| {
            o[0] = (x[0] + 2.0 * x[1]).sin() + (3.0 * x[1]).cos()
        });
        let qs = q.to_spectral();
        let grad = Field::spectral(
            grid.clone(),
            vec![
                derivative(&qs, 0)
                    .unwrap()
                    .into_spectral_components()
                    .unwrap()
                    .remove(0),
                derivative(&qs, 1)
                    .unwrap()
                    .into_spectral_components()
                    .unwrap()
                    .remove(0),
            ],
        )
        .unwrap();
        let p = leray_project(&grad).unwrap();
        assert!(l2_norm(&p) < 1e-12 * l2_norm(&grad));
    }

    #[test]
    fn nyquist_helpers() {
        let grid = Grid::new(vec![8, 10], vec![1.0, 1.0]).unwrap();
        assert_eq!(grid.mode_number(0, 4), -4);
        assert_eq!(grid.mode_number(0, 3), 3);
        assert!(grid.is_nyquist(0, 4));
        assert_eq!(grid.mode_position(1, -5), Some(5));
        assert_eq!(grid.mode_position(1, 5), None);
        assert_eq!(grid.flat_mode_index(&[-1, 2]), Some(7 * 10 + 2));
    }
}
