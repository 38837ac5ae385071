use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Free probe frequency `omega_P(k)` with its first two derivatives
/// (`hbar = 1`).
#[derive(Clone)]
pub enum Dispersion {
    /// `omega_P = 0`: the von Neumann limit.
    Zero,
    /// `omega_P(k) = k^2 / 2M`.
    Quadratic { mass: f64 },
    /// User supplied `omega`, `omega'`, `omega''`.
    Custom {
        omega: RealFn,
        d1: RealFn,
        d2: RealFn,
    },
}

impl fmt::Debug for Dispersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Dispersion::Zero"),
            Self::Quadratic { mass } => write!(f, "Dispersion::Quadratic {{ mass: {mass} }}"),
            Self::Custom { .. } => write!(f, "Dispersion::Custom"),
        }
    }
}

impl Dispersion {
    pub fn quadratic(mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive (got {mass})"
            )));
        }
        Ok(Self::Quadratic { mass })
    }

    /// Quadratic dispersion with Hamiltonian scale `k_H`, `k_H^2 = M / tau_0`.
    pub fn from_hamiltonian_scale(k_h: f64, tau0: f64) -> Result<Self> {
        if !(k_h > 0.0) || !(tau0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k_H and tau_0 must be positive (got {k_h}, {tau0})"
            )));
        }
        if k_h.is_infinite() {
            return Ok(Self::Zero);
        }
        Self::quadratic(k_h * k_h * tau0)
    }

    pub fn custom<F, G, H>(omega: F, d1: G, d2: H) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::Custom {
            omega: Arc::new(omega),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    pub fn omega(&self, k: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Quadratic { mass } => k * k / (2.0 * mass),
            Self::Custom { omega, .. } => omega(k),
        }
    }

    /// Group velocity `omega_P'(k)`.
    pub fn velocity(&self, k: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Quadratic { mass } => k / mass,
            Self::Custom { d1, .. } => d1(k),
        }
    }

    pub fn curvature(&self, k: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Quadratic { mass } => 1.0 / mass,
            Self::Custom { d2, .. } => d2(k),
        }
    }

    /// `k_H = sqrt(M / tau_0)` for quadratic dispersion, infinite for zero.
    pub fn hamiltonian_scale(&self, tau0: f64) -> Option<f64> {
        match self {
            Self::Zero => Some(f64::INFINITY),
            Self::Quadratic { mass } => Some((mass / tau0).sqrt()),
            Self::Custom { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_curvature_is_constant() {
        let d = Dispersion::quadratic(2.5).unwrap();
        for k in [-3.0, 0.0, 1.7] {
            assert_eq!(d.curvature(k), 0.4);
            assert!((d.omega(k) - k * k / 5.0).abs() < 1e-15);
            assert!((d.velocity(k) - k / 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_scale_round_trip() {
        let d = Dispersion::from_hamiltonian_scale(10.0, 0.5).unwrap();
        assert!((d.hamiltonian_scale(0.5).unwrap() - 10.0).abs() < 1e-12);
        assert!(Dispersion::quadratic(0.0).is_err());
        assert!(matches!(
            Dispersion::from_hamiltonian_scale(f64::INFINITY, 0.5).unwrap(),
            Dispersion::Zero
        ));
    }
}
