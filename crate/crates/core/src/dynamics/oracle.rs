//! Product-formula propagation on a k-grid, used to check the analytic
//! propagator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::KGrid;

/// Points at each edge that must stay empty during propagation.
const GUARD_POINTS: usize = 8;
/// Allowed fraction of the norm inside the guard band.
const GUARD_TOLERANCE: f64 = 1e-8;

/// Integrates `i d_t psi = omega(k) psi + i f(t) d_k psi` with `steps`
/// first-order splitting steps.
///
/// Step `j` shifts `psi(k) -> psi(k + eps f(t_j))` (exact spectral shift on
/// the periodic extension of the grid) and then multiplies by
/// `exp(-i eps omega(k))`, with `t_j = j eps`.
pub fn numeric_propagate_oracle<W, F>(
    psi0: &[Complex64],
    grid: &KGrid,
    omega: W,
    f: F,
    t_final: f64,
    steps: usize,
) -> Result<Vec<Complex64>>
where
    W: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
{
    let n = grid.len();
    if psi0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: psi0.len(),
        });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter(
            "oracle needs at least one step".into(),
        ));
    }
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "final time must be positive (got {t_final})"
        )));
    }
    let eps = t_final / steps as f64;
    let dk = grid.spacing();
    let period = n as f64 * dk;
    let wavenumbers: Vec<f64> = (0..n)
        .map(|m| {
            let m = if m <= n / 2 {
                m as f64
            } else {
                m as f64 - n as f64
            };
            2.0 * PI * m / period
        })
        .collect();
    let phases: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&k| Complex64::from_polar(1.0, -eps * omega(k)))
        .collect();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let scale = 1.0 / n as f64;
    let norm0: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();

    let mut psi = psi0.to_vec();
    check_guard(&psi, norm0, 0.0)?;
    for j in 0..steps {
        let t = j as f64 * eps;
        let shift = eps * f(t);
        if shift != 0.0 {
            forward.process(&mut psi);
            for (z, q) in psi.iter_mut().zip(&wavenumbers) {
                *z *= Complex64::from_polar(scale, q * shift);
            }
            inverse.process(&mut psi);
        }
        for (z, p) in psi.iter_mut().zip(&phases) {
            *z *= p;
        }
        check_guard(&psi, norm0, t + eps)?;
    }
    Ok(psi)
}

fn check_guard(psi: &[Complex64], norm: f64, t: f64) -> Result<()> {
    let n = psi.len();
    let g = GUARD_POINTS.min(n / 4);
    let edge: f64 = psi[..g]
        .iter()
        .chain(&psi[n - g..])
        .map(|z| z.norm_sqr())
        .sum();
    if edge > GUARD_TOLERANCE * norm {
        return Err(Error::OffGrid(format!(
            "{:.3e} of the norm reached the grid edge at t = {t}",
            edge / norm
        )));
    }
    Ok(())
}

/// L2 distance `sqrt(dk sum |a - b|^2)`.
pub fn l2_distance(a: &[Complex64], b: &[Complex64], grid: &KGrid) -> f64 {
    (a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        * grid.spacing())
    .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &KGrid, center: f64) -> Vec<Complex64> {
        let c = (2.0 * PI).powf(-0.25);
        grid.points()
            .iter()
            .map(|k| Complex64::new(c * (-(k - center) * (k - center) / 4.0).exp(), 0.0))
            .collect()
    }

    #[test]
    fn zero_drive_is_pure_phase() {
        let grid = KGrid::centered(0.0, 12.0, 512).unwrap();
        let psi0 = gaussian(&grid, 0.0);
        let psi = numeric_propagate_oracle(&psi0, &grid, |k| k * k / 2.0, |_| 0.0, 1.3, 7).unwrap();
        for (i, k) in grid.points().iter().enumerate() {
            let expected = psi0[i] * Complex64::from_polar(1.0, -k * k / 2.0 * 1.3);
            assert!((psi[i] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn pure_drift_shifts_exactly() {
        let grid = KGrid::centered(0.0, 20.0, 1024).unwrap();
        let psi0 = gaussian(&grid, 0.0);
        let psi = numeric_propagate_oracle(&psi0, &grid, |_| 0.0, |t| 1.0 + t, 2.0, 40).unwrap();
        // Left sums of 1 + t over 40 steps on [0, 2].
        let eps = 0.05;
        let total: f64 = (0..40).map(|j| eps * (1.0 + j as f64 * eps)).sum();
        let expected = grid
            .points()
            .iter()
            .map(|k| {
                let u = k + total;
                Complex64::new((2.0 * PI).powf(-0.25) * (-u * u / 4.0).exp(), 0.0)
            })
            .collect::<Vec<_>>();
        let d = l2_distance(&psi, &expected, &grid);
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn norm_is_preserved() {
        let grid = KGrid::centered(0.0, 12.0, 256).unwrap();
        let psi0 = gaussian(&grid, 0.0);
        let psi =
            numeric_propagate_oracle(&psi0, &grid, |k| k * k / 2.0, |t| t.sin(), 3.0, 300).unwrap();
        let n0: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((n0 - n1).abs() < 1e-10 * n0);
    }

    #[test]
    fn leaving_the_grid_is_an_error() {
        let grid = KGrid::centered(0.0, 6.0, 256).unwrap();
        let psi0 = gaussian(&grid, 0.0);
        let r = numeric_propagate_oracle(&psi0, &grid, |_| 0.0, |_| 10.0, 1.0, 100);
        assert!(matches!(r, Err(Error::OffGrid(_))));
    }

    #[test]
    fn rejects_bad_arguments() {
        let grid = KGrid::centered(0.0, 6.0, 64).unwrap();
        let psi0 = gaussian(&grid, 0.0);
        assert!(numeric_propagate_oracle(&psi0, &grid, |_| 0.0, |_| 0.0, 1.0, 0).is_err());
        assert!(numeric_propagate_oracle(&psi0[1..], &grid, |_| 0.0, |_| 0.0, 1.0, 1).is_err());
    }
}
