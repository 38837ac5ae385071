//! Adaptive Simpson quadrature with Richardson extrapolation.

use crate::error::{Error, Result};

/// Default absolute tolerance for Hamiltonian phases.
pub const PHASE_TOLERANCE: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Returns [`Error::Quadrature`] with the achieved error estimate when the
/// recursion bottoms out before meeting the tolerance, and
/// [`Error::NonFinite`] if the integrand is not finite somewhere.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    adaptive_simpson_depth(f, a, b, tol, MAX_DEPTH)
}

pub(crate) fn adaptive_simpson_depth<F>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut achieved = 0.0;
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut achieved);
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    // Rounding floor: the estimate cannot beat a few ulps of the value.
    let floor = 64.0 * f64::EPSILON * value.abs();
    if achieved > tol.max(floor) {
        return Err(Error::Quadrature { achieved, tol });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    achieved: &mut f64,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let floor = 64.0 * f64::EPSILON * (left + right).abs();
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) || !delta.is_finite() {
        if depth == 0 {
            *achieved += delta.abs() / 15.0;
        }
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, achieved)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, achieved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let v = adaptive_simpson(|x| 3.0 * x * x * x - x + 2.0, -1.0, 2.0, 1e-12).unwrap();
        // 3/4 (16 - 1) - (4 - 1)/2 + 2*3
        assert!((v - (45.0 / 4.0 - 1.5 + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn smooth_oscillatory() {
        let v = adaptive_simpson(|x| (10.0 * x).sin(), 0.0, PI, 1e-12).unwrap();
        assert!((v - (1.0 - (10.0 * PI).cos()) / 10.0).abs() < 1e-11);
    }

    #[test]
    fn kinked_integrand() {
        let v = adaptive_simpson(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-11).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
    }

    #[test]
    fn non_finite_is_reported() {
        assert!(matches!(
            adaptive_simpson(|x| 1.0 / x, 0.0, 1.0, 1e-10),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let r = adaptive_simpson_depth(
            |x| if x < 1.0 / 3.0 { 0.0 } else { 1.0 },
            0.0,
            1.0,
            1e-12,
            4,
        );
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
