use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::{normal_raw_moment, Probe, WignerGrid};
use crate::error::{Error, Result};
use crate::grid::{KGrid, DEFAULT_HALF_WIDTH, DEFAULT_POINTS};

const WIGNER_X_POINTS: usize = 512;
const WIGNER_X_HALF_WIDTH: f64 = 10.0;

/// Gaussian probe
/// `rho_0(k,k') = C exp(-(k+k'-2kbar)^2/8D^2 - (k-k')^2/2kappa^2) e^{i xbar (k'-k)}`.
///
/// Its Wigner function is the product of normals in `k` (variance `D^2`) and
/// `x` (variance `1/kappa^2`).
#[derive(Debug)]
pub struct GaussianProbe {
    spread: f64,
    coherence: f64,
    k_mean: f64,
    x_mean: f64,
    wigner: OnceLock<WignerGrid>,
}

impl Clone for GaussianProbe {
    fn clone(&self) -> Self {
        Self {
            wigner: OnceLock::new(),
            ..*self
        }
    }
}

impl PartialEq for GaussianProbe {
    fn eq(&self, other: &Self) -> bool {
        self.spread == other.spread
            && self.coherence == other.coherence
            && self.k_mean == other.k_mean
            && self.x_mean == other.x_mean
    }
}

impl GaussianProbe {
    pub fn new(spread: f64, coherence: f64, k_mean: f64, x_mean: f64) -> Result<Self> {
        if !(spread > 0.0 && spread.is_finite()) || !(coherence > 0.0 && coherence.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "probe scales must be positive (Delta_k = {spread}, kappa_k = {coherence})"
            )));
        }
        if !(k_mean.is_finite() && x_mean.is_finite()) {
            return Err(Error::NonFinite("probe means".into()));
        }
        if coherence > 2.0 * spread * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "uncertainty relation violated: kappa_k = {coherence} > 2 Delta_k = {}",
                2.0 * spread
            )));
        }
        Ok(Self {
            spread,
            coherence,
            k_mean,
            x_mean,
            wigner: OnceLock::new(),
        })
    }

    /// Centered probe with `Delta_k = 1`.
    pub fn unit(coherence: f64) -> Result<Self> {
        Self::new(1.0, coherence, 0.0, 0.0)
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn coherence(&self) -> f64 {
        self.coherence
    }

    pub fn is_pure(&self) -> bool {
        (self.coherence - 2.0 * self.spread).abs() <= 1e-12 * self.spread
    }

    fn x_variance(&self) -> f64 {
        1.0 / (self.coherence * self.coherence)
    }

    fn normal_k(&self, k: f64) -> f64 {
        let u = (k - self.k_mean) / self.spread;
        (-0.5 * u * u).exp() / ((2.0 * PI).sqrt() * self.spread)
    }
}

impl Probe for GaussianProbe {
    fn rho(&self, k1: f64, k2: f64) -> Complex64 {
        let s = k1 + k2 - 2.0 * self.k_mean;
        let d = k1 - k2;
        let mag = (-s * s / (8.0 * self.spread * self.spread)
            - d * d / (2.0 * self.coherence * self.coherence))
            .exp()
            / ((2.0 * PI).sqrt() * self.spread);
        Complex64::from_polar(mag, self.x_mean * (k2 - k1))
    }

    fn p0(&self, k: f64) -> f64 {
        self.normal_k(k)
    }

    fn p0_derivatives(&self, k: f64) -> [f64; 3] {
        let p = self.normal_k(k);
        let v = self.spread * self.spread;
        let u = k - self.k_mean;
        [p, -u / v * p, (u * u / (v * v) - 1.0 / v) * p]
    }

    fn x_moments(&self, k: f64, chi: f64) -> [Complex64; 3] {
        let s2 = self.x_variance();
        let phi = Complex64::from_polar((-0.5 * chi * chi * s2).exp(), chi * self.x_mean)
            * self.normal_k(k);
        let m1 = Complex64::new(self.x_mean, chi * s2);
        [phi, m1 * phi, (m1 * m1 + s2) * phi]
    }

    fn wigner(&self, x: f64, k: f64) -> f64 {
        let s2 = self.x_variance();
        let u = x - self.x_mean;
        self.normal_k(k) * (-0.5 * u * u / s2).exp() / (2.0 * PI * s2).sqrt()
    }

    fn wigner_grid(&self) -> &WignerGrid {
        self.wigner.get_or_init(|| {
            let half = WIGNER_X_HALF_WIDTH / self.coherence;
            let dx = 2.0 * half / WIGNER_X_POINTS as f64;
            let x = (0..WIGNER_X_POINTS)
                .map(|j| self.x_mean - half + j as f64 * dx)
                .collect();
            WignerGrid::from_fn(self.default_grid(), x, |x, k| self.wigner(x, k))
                .expect("Gaussian Wigner grid is well formed")
        })
    }

    fn default_grid(&self) -> KGrid {
        KGrid::centered(
            self.k_mean,
            DEFAULT_HALF_WIDTH * self.spread,
            DEFAULT_POINTS,
        )
        .expect("positive spread gives a valid grid")
    }

    fn mean_k(&self) -> f64 {
        self.k_mean
    }

    fn mean_x(&self) -> f64 {
        self.x_mean
    }

    fn spread_k(&self) -> f64 {
        self.spread
    }

    fn spread_x(&self) -> f64 {
        1.0 / self.coherence
    }

    fn coherence_scale(&self) -> f64 {
        self.coherence
    }

    fn moment(&self, p: u32, q: u32) -> f64 {
        normal_raw_moment(p, self.x_mean, self.x_variance())
            * normal_raw_moment(q, self.k_mean, self.spread * self.spread)
    }
}
