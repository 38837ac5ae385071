//! Weak-coupling expansion of the readout statistics.
//!
//! Everything is kept as a ratio of quadratic polynomials in `lambda`:
//! numerators are scaled by `alpha_00` and divided by the expanded
//! `alpha_00 N` at the very end, so nearly orthogonal pre/postselection stays
//! finite.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{MeasurementSetup, ReadoutDistribution, POSTSELECTION_FLOOR};
use crate::grid::KGrid;
use crate::probe::{Dispersion, Probe};
use crate::system::{weak_values, WeakValueSet};

/// First-order mean formulas refuse when `alpha_00 < NOPPS_RATIO sqrt(alpha_11)`.
pub const NOPPS_RATIO: f64 = 0.01;

/// Phase-space averages of the free probe that the expansion needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeAverages {
    pub mean_k: f64,
    pub mean_x: f64,
    /// `avg(omega')`.
    pub velocity: f64,
    /// `avg(omega'')`.
    pub curvature: f64,
    /// `avg(x_{tau0})`.
    pub x_tau0: f64,
    /// `avg(x_{tau0}^2)`.
    pub x2_tau0: f64,
    /// `C(x_{tau0}, k)`.
    pub cov_x_tau0_k: f64,
    /// `C(x_tau, x_{tau0})`.
    pub cov_x_tau_x_tau0: f64,
}

/// Weak values, probe averages and time scales for one measurement setup.
#[derive(Debug)]
pub struct ExpansionContext<'a, P> {
    setup: &'a MeasurementSetup<P>,
    grid: KGrid,
    weak: WeakValueSet,
    averages: ProbeAverages,
    /// `4 eps / K_D^2`, added to `x_{tau0}^2` in the second-order terms.
    decoherence_shift: f64,
    /// Expanded `alpha_00 N`.
    alpha00_n: f64,
}

impl<'a, P: Probe> ExpansionContext<'a, P> {
    /// Uses the probe's default grid for k-quadrature.
    pub fn new(setup: &'a MeasurementSetup<P>) -> Result<Self> {
        Self::with_grid(setup, setup.probe().default_grid())
    }

    pub fn with_grid(setup: &'a MeasurementSetup<P>, grid: KGrid) -> Result<Self> {
        let weak = weak_values(setup.rho_i(), setup.rho_f(), setup.system())?;
        let averages = probe_averages(setup, &grid);
        let decoherence_shift = setup
            .decoherence()
            .map_or(0.0, |d| 4.0 * d.shape_factor() / (d.scale() * d.scale()));
        let lambda = setup.lambda();
        let alpha00_n = weak.alpha00 - 2.0 * lambda * averages.x_tau0 * weak.alpha01.im
            + lambda * lambda * (averages.x2_tau0 + decoherence_shift) * weak.alpha11;
        if !alpha00_n.is_finite() {
            return Err(Error::NonFinite(
                "expanded postselection probability".into(),
            ));
        }
        Ok(Self {
            setup,
            grid,
            weak,
            averages,
            decoherence_shift,
            alpha00_n,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.setup.lambda()
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn weak_values(&self) -> &WeakValueSet {
        &self.weak
    }

    pub fn averages(&self) -> &ProbeAverages {
        &self.averages
    }

    pub fn decoherence_shift(&self) -> f64 {
        self.decoherence_shift
    }

    /// `P_post ~ W [alpha_00 - 2 lambda avg(x_{tau0}) Im alpha_01
    /// + lambda^2 avg(x_{tau0}^2) alpha_11]`.
    pub fn p_post_expanded(&self) -> f64 {
        self.setup.prefactor() * self.alpha00_n
    }

    /// `N = P_post / (W alpha_00)`; `None` when `alpha_00` vanishes.
    pub fn normalization(&self) -> Option<f64> {
        (!self.weak.is_nopps()).then(|| self.alpha00_n / self.weak.alpha00)
    }

    fn check_postselection(&self) -> Result<()> {
        if !(self.alpha00_n > POSTSELECTION_FLOOR) {
            return Err(Error::PostselectionImpossible(self.alpha00_n));
        }
        Ok(())
    }

    fn check_nopps(&self) -> Result<(Complex64, f64)> {
        let threshold = NOPPS_RATIO * self.weak.alpha11.max(0.0).sqrt();
        if self.weak.alpha00 < threshold || self.weak.is_nopps() {
            return Err(Error::Nopps {
                alpha00: self.weak.alpha00,
                threshold,
            });
        }
        self.weak.ratios()
    }

    fn tau0_velocity(&self, k: f64) -> f64 {
        self.setup.dispersion().velocity(k) * self.setup.profile().tau0()
    }

    /// Characteristic function of k, `Z(theta)`, with `Z(0) = 1`.
    pub fn characteristic_function_k(&self, theta: f64) -> Result<Complex64> {
        self.check_postselection()?;
        let lambda = self.lambda();
        let w = &self.weak;
        let probe = self.setup.probe();
        let values: Vec<Complex64> = self
            .grid
            .points()
            .par_iter()
            .map(|&k| {
                let m = probe.x_moments(k, 0.0);
                let v = self.tau0_velocity(k);
                let x1 = m[1].re + v * m[0].re;
                let x2 = m[2].re + 2.0 * v * m[1].re + v * v * m[0].re;
                let p0 = m[0].re;
                let e = Complex64::from_polar(1.0, theta * k);
                let inner = Complex64::new(w.alpha00 * p0, 0.0)
                    + lambda
                        * (Complex64::new(0.0, theta * p0 * w.alpha01.re)
                            - 2.0 * x1 * w.alpha01.im)
                    + lambda
                        * lambda
                        * (x2 + (self.decoherence_shift - theta * theta / 4.0) * p0)
                        * w.alpha11;
                e * inner
            })
            .collect();
        Ok(self.grid.integrate_complex(&values) / self.alpha00_n)
    }

    /// `alpha_00 N Q(k)` from the interpolating formula.
    pub fn interpolating_numerator(&self, k: f64) -> f64 {
        let lambda = self.lambda();
        let w = &self.weak;
        let probe = self.setup.probe();
        let [p0, d1, d2] = probe.p0_derivatives(k);
        let m = probe.x_moments(k, 0.0);
        let v = self.tau0_velocity(k);
        let x1 = m[1].re + v * m[0].re;
        let x2 = m[2].re + 2.0 * v * m[1].re + v * v * m[0].re;
        w.alpha00 * p0 - 2.0 * lambda * x1 * w.alpha01.im
            + lambda * lambda * (x2 + self.decoherence_shift * p0) * w.alpha11
            - lambda * (d1 * w.alpha01.re - 0.25 * lambda * d2 * w.alpha11)
    }

    /// Interpolating `Q(k)`; may dip slightly below zero in the tails.
    pub fn interpolating_probability(&self, k: f64) -> Result<f64> {
        self.check_postselection()?;
        Ok(self.interpolating_numerator(k) / self.alpha00_n)
    }

    pub fn interpolating_distribution(&self, grid: &KGrid) -> Result<ReadoutDistribution> {
        self.check_postselection()?;
        let values: Vec<f64> = grid
            .points()
            .par_iter()
            .map(|&k| self.interpolating_numerator(k) / self.alpha00_n)
            .collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "interpolated distribution value {v}"
            )));
        }
        Ok(ReadoutDistribution::with_values(
            *grid,
            values,
            self.p_post_expanded(),
        ))
    }

    /// `<k> ~ kbar + lambda Re A_w - 2 lambda C(x_{tau0}, k) Im A_w`.
    pub fn mean_k_first_order(&self) -> Result<f64> {
        let (a_w, _) = self.check_nopps()?;
        let lambda = self.lambda();
        Ok(self.averages.mean_k + lambda * a_w.re
            - 2.0 * lambda * self.averages.cov_x_tau0_k * a_w.im)
    }

    /// `<x> ~ xbar_tau - 2 lambda [C(x_tau, x_{tau0}) Im A_w - avg(omega'') t_v Re A_w]`.
    pub fn mean_x_first_order(&self) -> Result<f64> {
        let (a_w, _) = self.check_nopps()?;
        let lambda = self.lambda();
        let profile = self.setup.profile();
        let a = &self.averages;
        let x_tau = a.mean_x + profile.duration() * a.velocity;
        Ok(x_tau
            - 2.0 * lambda * (a.cov_x_tau_x_tau0 * a_w.im - a.curvature * profile.t_v() * a_w.re))
    }

    /// Characteristic function of the write-in variable after the coupling,
    /// `Z_x(chi)`, with `Z_x(0) = 1`.
    pub fn characteristic_function_x(&self, chi: f64) -> Result<Complex64> {
        self.check_postselection()?;
        let lambda = self.lambda();
        let w = &self.weak;
        let profile = self.setup.profile();
        let (tau, tau0, t_v) = (profile.duration(), profile.tau0(), profile.t_v());
        let disp: &Dispersion = self.setup.dispersion();
        let probe = self.setup.probe();
        let half = 0.5 * chi;
        let i = Complex64::i();
        let values: Vec<Complex64> = self
            .grid
            .points()
            .par_iter()
            .map(|&k| {
                let (kp, km) = (k + half, k - half);
                let e = Complex64::from_polar(1.0, (disp.omega(kp) - disp.omega(km)) * tau);
                let m = probe.x_moments(k, chi);
                let xc = 0.5 * (disp.velocity(kp) + disp.velocity(km)) * tau0;
                let y = (disp.velocity(kp) - disp.velocity(km)) * t_v;
                let curv = disp.curvature(kp) - disp.curvature(km);
                let avg_x = m[1] + xc * m[0];
                let avg_x2 =
                    m[2] + 2.0 * xc * m[1] + (xc * xc - y * y + self.decoherence_shift) * m[0];
                let first = -2.0 * lambda * (w.alpha01.im * avg_x - i * w.alpha01.re * y * m[0]);
                let second = lambda
                    * lambda
                    * w.alpha11
                    * (avg_x2 + 0.5 * i * (0.5 * tau - tau0) * curv * m[0]);
                e * (w.alpha00 * m[0] + first + second)
            })
            .collect();
        Ok(self.grid.integrate_complex(&values) / self.alpha00_n)
    }
}

fn probe_averages<P: Probe>(setup: &MeasurementSetup<P>, grid: &KGrid) -> ProbeAverages {
    let probe = setup.probe();
    let disp = setup.dispersion();
    let profile = setup.profile();
    let (tau, tau0) = (profile.duration(), profile.tau0());
    let rows: Vec<[f64; 10]> = grid
        .points()
        .par_iter()
        .map(|&k| {
            let m = probe.x_moments(k, 0.0);
            let (m0, m1, m2) = (m[0].re, m[1].re, m[2].re);
            let v = disp.velocity(k);
            [
                m0,
                k * m0,
                m1,
                m2,
                v * m0,
                v * m1,
                v * v * m0,
                k * m1,
                k * v * m0,
                disp.curvature(k) * m0,
            ]
        })
        .collect();
    let integral = |j: usize| grid.integrate(&rows.iter().map(|r| r[j]).collect::<Vec<_>>());
    let s: Vec<f64> = (0..10).map(integral).collect();
    let norm = s[0];
    let [mean_k, x, x2, v, xv, v2, xk, kv, curv] =
        [s[1], s[2], s[3], s[4], s[5], s[6], s[7], s[8], s[9]].map(|v| v / norm);
    let x_tau0 = x + tau0 * v;
    let x_tau = x + tau * v;
    ProbeAverages {
        mean_k,
        mean_x: x,
        velocity: v,
        curvature: curv,
        x_tau0,
        x2_tau0: x2 + 2.0 * tau0 * xv + tau0 * tau0 * v2,
        cov_x_tau0_k: xk + tau0 * kv - x_tau0 * mean_k,
        cov_x_tau_x_tau0: x2 + (tau + tau0) * xv + tau * tau0 * v2 - x_tau * x_tau0,
    }
}

/// `U_k = exp{i lambda omega'(k) tau0 A - i (lambda^2/2) omega''(k) (tau0 - tau1) A^2}`
/// as a diagonal matrix.
pub fn oscillation_unitary<P: Probe>(setup: &MeasurementSetup<P>, k: f64) -> DMatrix<Complex64> {
    let lambda = setup.lambda();
    let profile = setup.profile();
    let disp = setup.dispersion();
    let lin = lambda * disp.velocity(k) * profile.tau0();
    let quad = 0.5 * lambda * lambda * disp.curvature(k) * (profile.tau0() - profile.tau1());
    let diag: Vec<Complex64> = setup
        .system()
        .eigenvalues()
        .iter()
        .map(|&a| Complex64::from_polar(1.0, lin * a - quad * a * a))
        .collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// Weak values with the k-dependent postselected state
/// `rho_f(k) = U_k^dagger rho_f U_k`.
pub fn oscillation_weak_values<P: Probe>(
    setup: &MeasurementSetup<P>,
    k: f64,
) -> Result<WeakValueSet> {
    let u = oscillation_unitary(setup, k);
    let rho_fk = setup.rho_f().rotated(&u.adjoint())?;
    weak_values(setup.rho_i(), &rho_fk, setup.system())
}

/// `k_H^2 / Delta_k < lambda < kappa_k`: Hamiltonian phases must be kept but
/// the probe coherence is not yet lost.
pub fn in_oscillation_regime(lambda: f64, k_h: f64, spread: f64, coherence: f64) -> bool {
    k_h * k_h / spread < lambda && lambda < coherence
}

/// Interpolating formula with `rho_f -> rho_f(k)` and `x_t -> x`,
/// normalized by quadrature on `grid`.
pub fn oscillation_distribution<P: Probe>(
    setup: &MeasurementSetup<P>,
    grid: &KGrid,
) -> Result<ReadoutDistribution> {
    let lambda = setup.lambda();
    let shift = setup
        .decoherence()
        .map_or(0.0, |d| 4.0 * d.shape_factor() / (d.scale() * d.scale()));
    let probe = setup.probe();
    let numerator: Vec<f64> = grid
        .points()
        .par_iter()
        .map(|&k| {
            let w = oscillation_weak_values(setup, k)?;
            let [p0, d1, d2] = probe.p0_derivatives(k);
            let m = probe.x_moments(k, 0.0);
            Ok(w.alpha00 * p0 - 2.0 * lambda * m[1].re * w.alpha01.im
                + lambda * lambda * (m[2].re + shift * p0) * w.alpha11
                - lambda * (d1 * w.alpha01.re - 0.25 * lambda * d2 * w.alpha11))
        })
        .collect::<Result<_>>()?;
    ReadoutDistribution::from_joint(*grid, numerator)
}
