//! Adaptive integration on top of the double-exponential rule: intervals whose
//! error estimate misses the target are bisected.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 14;
const ROUNDOFF: f64 = 1e3 * f64::EPSILON;

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    adapt(f, a, b, tol, 0)
}

/// Sum of [`integrate`] over consecutive breakpoints, tolerance split evenly.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> Result<f64> {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    breaks
        .windows(2)
        .map(|w| integrate(f, w[0], w[1], tol / panels))
        .sum()
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let out = quadrature::double_exponential::integrate(f, a, b, tol);
    // below this the estimate is rounding noise
    let floor = ROUNDOFF * out.integral.abs().max(f64::MIN_POSITIVE);
    if out.error_estimate <= tol.max(floor) {
        return Ok(out.integral);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Numerical(format!(
            "quadrature on [{a}, {b}] stalled at error {:.3e} (target {tol:.3e})",
            out.error_estimate
        )));
    }
    let mid = 0.5 * (a + b);
    Ok(adapt(f, a, mid, 0.5 * tol, depth + 1)? + adapt(f, mid, b, 0.5 * tol, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_oscillatory_integrals() {
        let v = integrate(&|x: f64| x * x, 0.0, 3.0, 1e-13).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let w = integrate(&|x: f64| (50.0 * x).cos(), 0.0, 2.0, 1e-13).unwrap();
        assert!((w - (100.0f64).sin() / 50.0).abs() < 1e-12);
    }
}
