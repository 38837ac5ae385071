use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Probe, WignerGrid};
use crate::error::{Error, Result};
use crate::grid::KGrid;

const TRACE_TOLERANCE: f64 = 1e-8;
const PSD_TOLERANCE: f64 = 1e-8;
const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Probe density matrix tabulated on a uniform k-grid.
///
/// Off-grid elements use bilinear interpolation and vanish outside the grid.
/// The Wigner function is tabulated on first use by a discrete transform
/// along the antidiagonal.
#[derive(Debug)]
pub struct GridProbe {
    grid: KGrid,
    rho: DMatrix<Complex64>,
    derivatives: [Vec<f64>; 3],
    k_mean: f64,
    k_spread: f64,
    wigner: OnceLock<WignerGrid>,
}

impl Clone for GridProbe {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid,
            rho: self.rho.clone(),
            derivatives: self.derivatives.clone(),
            k_mean: self.k_mean,
            k_spread: self.k_spread,
            wigner: OnceLock::new(),
        }
    }
}

impl GridProbe {
    pub fn new(grid: KGrid, rho: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.len();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rho.nrows(),
            });
        }
        let dk = grid.spacing();
        let scale = rho.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !scale.is_finite() {
            return Err(Error::NonFinite("probe density matrix".into()));
        }
        for i in 0..n {
            for j in 0..=i {
                if (rho[(i, j)] - rho[(j, i)].conj()).norm() > HERMITIAN_TOLERANCE * scale.max(1.0)
                {
                    return Err(Error::InvalidState(format!(
                        "probe matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let trace: f64 = (0..n).map(|i| rho[(i, i)].re).sum::<f64>() * dk;
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "probe trace is {trace}, expected 1"
            )));
        }
        if !is_positive_definite(
            rho.map(|z| z * dk) + DMatrix::identity(n, n) * Complex64::new(PSD_TOLERANCE, 0.0),
        ) {
            return Err(Error::InvalidState(
                "probe matrix is not positive semidefinite".into(),
            ));
        }

        let diag: Vec<f64> = (0..n).map(|i| rho[(i, i)].re).collect();
        let derivatives = finite_differences(&diag, dk);
        let k_mean = grid.integrate(
            &grid
                .points()
                .iter()
                .zip(&diag)
                .map(|(k, p)| k * p)
                .collect::<Vec<_>>(),
        );
        let k2 = grid.integrate(
            &grid
                .points()
                .iter()
                .zip(&diag)
                .map(|(k, p)| k * k * p)
                .collect::<Vec<_>>(),
        );
        Ok(Self {
            grid,
            rho,
            derivatives,
            k_mean,
            k_spread: (k2 - k_mean * k_mean).max(0.0).sqrt(),
            wigner: OnceLock::new(),
        })
    }

    /// `rho(k_i, k_j) = f(k_i, k_j)` sampled on the grid.
    pub fn from_fn<F>(grid: KGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let k = grid.points();
        let n = grid.len();
        Self::new(grid, DMatrix::from_fn(n, n, |i, j| f(k[i], k[j])))
    }

    /// Samples another probe's density matrix.
    pub fn sample<P: Probe + ?Sized>(probe: &P, grid: KGrid) -> Result<Self> {
        Self::from_fn(grid, |a, b| probe.rho(a, b))
    }

    /// Pure state `psi(k)`, normalized so that `dk sum |psi|^2 = 1`.
    pub fn from_wavefunction(grid: KGrid, psi: &[Complex64]) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: psi.len(),
            });
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero wavefunction".into()));
        }
        let n = psi.len();
        Self::new(
            grid,
            DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / norm),
        )
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    fn interpolate(values: &[f64], grid: &KGrid, k: f64) -> f64 {
        match grid.locate(k) {
            None => 0.0,
            Some((i, t)) => (1.0 - t) * values[i] + t * values[i + 1],
        }
    }

    fn build_wigner(&self) -> WignerGrid {
        let n = self.grid.len();
        let dk = self.grid.spacing();
        let len = (n + 1).next_power_of_two();
        let dx = PI / (len as f64 * dk);
        let half = len / 2;
        let x: Vec<f64> = (0..len).map(|j| (j as f64 - half as f64) * dx).collect();
        let fft = FftPlanner::new().plan_fft_inverse(len);
        let mut values = Vec::with_capacity(n * len);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..n {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            let reach = i.min(n - 1 - i);
            for m in 0..=reach {
                buf[m] = self.rho[(i + m, i - m)];
                if m > 0 {
                    buf[len - m] = self.rho[(i - m, i + m)];
                }
            }
            fft.process(&mut buf);
            // Output index j carries x = j dx; reorder to ascending x.
            for j in 0..len {
                let src = (j + len - half) % len;
                values.push(buf[src].re * dk / PI);
            }
        }
        WignerGrid::new(self.grid, x, values).expect("table dimensions are consistent")
    }
}

/// In-place Cholesky factorization that fails on the first nonpositive pivot.
fn is_positive_definite(mut m: DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for p in 0..j {
            d -= m[(j, p)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        m[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for p in 0..j {
                s -= m[(i, p)] * m[(j, p)].conj();
            }
            m[(i, j)] = s / d;
        }
    }
    true
}

fn finite_differences(d: &[f64], h: f64) -> [Vec<f64>; 3] {
    let n = d.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        if i >= 2 && i + 2 < n {
            d1[i] = (-d[i + 2] + 8.0 * d[i + 1] - 8.0 * d[i - 1] + d[i - 2]) / (12.0 * h);
            d2[i] = (-d[i + 2] + 16.0 * d[i + 1] - 30.0 * d[i] + 16.0 * d[i - 1] - d[i - 2])
                / (12.0 * h * h);
        } else if i >= 1 && i + 1 < n {
            d1[i] = (d[i + 1] - d[i - 1]) / (2.0 * h);
            d2[i] = (d[i + 1] - 2.0 * d[i] + d[i - 1]) / (h * h);
        }
    }
    d1[0] = d1[1];
    d2[0] = d2[1];
    d1[n - 1] = d1[n - 2];
    d2[n - 1] = d2[n - 2];
    [d.to_vec(), d1, d2]
}

impl Probe for GridProbe {
    fn rho(&self, k1: f64, k2: f64) -> Complex64 {
        let (Some((i, s)), Some((j, t))) = (self.grid.locate(k1), self.grid.locate(k2)) else {
            return Complex64::new(0.0, 0.0);
        };
        let r = &self.rho;
        r[(i, j)] * ((1.0 - s) * (1.0 - t))
            + r[(i + 1, j)] * (s * (1.0 - t))
            + r[(i, j + 1)] * ((1.0 - s) * t)
            + r[(i + 1, j + 1)] * (s * t)
    }

    fn p0(&self, k: f64) -> f64 {
        Self::interpolate(&self.derivatives[0], &self.grid, k)
    }

    fn p0_derivatives(&self, k: f64) -> [f64; 3] {
        [0, 1, 2].map(|n| Self::interpolate(&self.derivatives[n], &self.grid, k))
    }

    fn x_moments(&self, k: f64, chi: f64) -> [Complex64; 3] {
        let w = self.wigner_grid();
        let slice = w.slice_at(k);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (v, &x) in slice.iter().zip(w.x_points()) {
            let e = Complex64::from_polar(*v * w.dx(), chi * x);
            out[0] += e;
            out[1] += e * x;
            out[2] += e * x * x;
        }
        out
    }

    fn wigner(&self, x: f64, k: f64) -> f64 {
        let w = self.wigner_grid();
        let xs = w.x_points();
        let t = (x - xs[0]) / w.dx();
        if t < 0.0 || t > (xs.len() - 1) as f64 {
            return 0.0;
        }
        let j = (t.floor() as usize).min(xs.len() - 2);
        let f = t - j as f64;
        let slice = w.slice_at(k);
        (1.0 - f) * slice[j] + f * slice[j + 1]
    }

    fn wigner_grid(&self) -> &WignerGrid {
        self.wigner.get_or_init(|| self.build_wigner())
    }

    fn wigner_slice(&self, k: f64) -> Vec<f64> {
        self.wigner_grid().slice_at(k)
    }

    fn default_grid(&self) -> KGrid {
        self.grid
    }

    fn mean_k(&self) -> f64 {
        self.k_mean
    }

    fn mean_x(&self) -> f64 {
        self.moment(1, 0)
    }

    fn spread_k(&self) -> f64 {
        self.k_spread
    }

    fn spread_x(&self) -> f64 {
        let m = self.mean_x();
        (self.moment(2, 0) - m * m).max(0.0).sqrt()
    }
}
