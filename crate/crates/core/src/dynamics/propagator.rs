use num_complex::Complex64;

use crate::dynamics::profile::CouplingProfile;
use crate::dynamics::quadrature::{adaptive_simpson, PHASE_TOLERANCE};
use crate::error::Result;
use crate::probe::Dispersion;

/// `Gamma_a(k) = int_0^tau omega_P(k - lambda a [1 - h(s)]) ds`.
pub fn hamiltonian_phase(
    a: f64,
    k: f64,
    profile: &CouplingProfile,
    dispersion: &Dispersion,
) -> Result<f64> {
    if matches!(dispersion, Dispersion::Zero) {
        return Ok(0.0);
    }
    let la = profile.lambda() * a;
    adaptive_simpson(
        |s| dispersion.omega(k - la * (1.0 - profile.h(s))),
        0.0,
        profile.duration(),
        PHASE_TOLERANCE,
    )
}

/// `Gamma_a(k) - Gamma_a'(k)`, integrated as one difference so that large
/// common phases do not cancel in floating point.
pub fn phase_difference(
    a: f64,
    a_prime: f64,
    k: f64,
    profile: &CouplingProfile,
    dispersion: &Dispersion,
) -> Result<f64> {
    if a == a_prime || matches!(dispersion, Dispersion::Zero) {
        return Ok(0.0);
    }
    let lambda = profile.lambda();
    if let Dispersion::Quadratic { mass } = dispersion {
        if matches!(profile.shape(), crate::dynamics::ProfileShape::Constant) {
            return Ok(closed_form_phase_difference(
                a,
                a_prime,
                k,
                lambda,
                profile.duration(),
                *mass,
            ));
        }
    }
    adaptive_simpson(
        |s| {
            let r = 1.0 - profile.h(s);
            dispersion.omega(k - lambda * a * r) - dispersion.omega(k - lambda * a_prime * r)
        },
        0.0,
        profile.duration(),
        PHASE_TOLERANCE,
    )
}

/// Closed form of `Gamma_a(k)` for `omega = k^2/2M` and constant coupling.
pub fn closed_form_phase(a: f64, k: f64, lambda: f64, tau: f64, mass: f64) -> f64 {
    let la = lambda * a;
    tau / (2.0 * mass) * (k * k - la * k + la * la / 3.0)
}

/// Closed form of `Gamma_a(k) - Gamma_a'(k)` for quadratic dispersion and
/// constant coupling.
pub fn closed_form_phase_difference(
    a: f64,
    a_prime: f64,
    k: f64,
    lambda: f64,
    tau: f64,
    mass: f64,
) -> f64 {
    tau / (2.0 * mass)
        * (-lambda * (a - a_prime) * k + lambda * lambda * (a * a - a_prime * a_prime) / 3.0)
}

/// Matrix element `<k,a|U|k0,a> = delta(k - k0 - shift) exp(-i phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorElement {
    pub shift: f64,
    pub phase: f64,
    /// `k - k0 - shift`; the element is supported only where this vanishes.
    pub detuning: f64,
}

impl PropagatorElement {
    pub fn is_on_support(&self, tol: f64) -> bool {
        self.detuning.abs() <= tol
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.phase)
    }
}

pub fn analytic_propagator(
    k: f64,
    k0: f64,
    a: f64,
    profile: &CouplingProfile,
    dispersion: &Dispersion,
) -> Result<PropagatorElement> {
    let shift = profile.lambda() * a;
    Ok(PropagatorElement {
        shift,
        phase: hamiltonian_phase(a, k, profile, dispersion)?,
        detuning: k - k0 - shift,
    })
}

/// Evolved probe element for the `(a, a')` block:
/// `rho_0(k1 - lambda a, k2 - lambda a') exp(-i [Gamma_a(k1) - Gamma_a'(k2)])`.
pub fn evolve_probe_element<R>(
    rho0: R,
    k1: f64,
    k2: f64,
    a: f64,
    a_prime: f64,
    profile: &CouplingProfile,
    dispersion: &Dispersion,
) -> Result<Complex64>
where
    R: Fn(f64, f64) -> Complex64,
{
    let lambda = profile.lambda();
    let phase = if k1 == k2 {
        phase_difference(a, a_prime, k1, profile, dispersion)?
    } else {
        hamiltonian_phase(a, k1, profile, dispersion)?
            - hamiltonian_phase(a_prime, k2, profile, dispersion)?
    };
    Ok(rho0(k1 - lambda * a, k2 - lambda * a_prime) * Complex64::from_polar(1.0, -phase))
}

/// Closed-form solution of `i d_t psi = omega(k) psi + i f(t) d_k psi`:
/// `psi(k,t) = exp(-i int_0^t omega(k + int_s^t f) ds) psi0(k + int_0^t f)`.
///
/// `drift(s)` must return `int_s^t f`.
pub fn lemma_solution<W, D, P>(k: f64, t: f64, omega: W, drift: D, psi0: P) -> Result<Complex64>
where
    W: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    P: Fn(f64) -> Complex64,
{
    let phase = adaptive_simpson(|s| omega(k + drift(s)), 0.0, t, PHASE_TOLERANCE)?;
    Ok(Complex64::from_polar(1.0, -phase) * psi0(k + drift(0.0)))
}

/// `s -> int_s^t f` by adaptive quadrature, for use with [`lemma_solution`].
pub fn drift_integral<F>(f: F, t: f64) -> impl Fn(f64) -> f64
where
    F: Fn(f64) -> f64,
{
    move |s| adaptive_simpson(&f, s, t, 1e-13).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ProfileShape;

    fn quad(k_h: f64, profile: &CouplingProfile) -> Dispersion {
        Dispersion::from_hamiltonian_scale(k_h, profile.tau0()).unwrap()
    }

    #[test]
    fn free_evolution_when_uncoupled() {
        let p = CouplingProfile::constant(1.0, 0.0).unwrap();
        let d = quad(3.0, &p);
        for a in [-1.0, 0.0, 2.0] {
            let g = hamiltonian_phase(a, 1.3, &p, &d).unwrap();
            assert!((g - d.omega(1.3)).abs() < 1e-12);
        }
        let p = CouplingProfile::constant(1.0, 0.7).unwrap();
        assert!((hamiltonian_phase(0.0, -0.4, &p, &d).unwrap() - d.omega(-0.4)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let p = CouplingProfile::constant(1.0, 0.5).unwrap();
        let d = Dispersion::quadratic(0.8).unwrap();
        let g = hamiltonian_phase(1.0, 1.0, &p, &d).unwrap();
        assert!((g - closed_form_phase(1.0, 1.0, 0.5, 1.0, 0.8)).abs() < 1e-10);
        // (1/1.6) (1 - 0.5 + 0.25/3)
        assert!((g - (1.0 - 0.5 + 0.25 / 3.0) / 1.6).abs() < 1e-12);
    }

    #[test]
    fn difference_matches_spin_phase() {
        // Spin eigenvalues +-1: the linear part is 2 lambda k / k_H^2.
        let lambda = 0.5;
        let p = CouplingProfile::constant(1.0, lambda).unwrap();
        let k_h = 0.2;
        let d = quad(k_h, &p);
        for k in [-2.0, 0.3, 1.1] {
            let diff = phase_difference(1.0, -1.0, k, &p, &d).unwrap();
            assert!((diff + 2.0 * lambda * k / (k_h * k_h)).abs() < 1e-9 * (1.0 + diff.abs()));
        }
    }

    #[test]
    fn difference_by_quadrature_matches_separate_phases() {
        let p = CouplingProfile::new(1.2, ProfileShape::RaisedCosine, 0.4).unwrap();
        let d = Dispersion::custom(|k| k * k * k / 3.0 + k, |k| k * k + 1.0, |k| 2.0 * k);
        let k = 0.9;
        let direct = phase_difference(1.5, -0.5, k, &p, &d).unwrap();
        let separate = hamiltonian_phase(1.5, k, &p, &d).unwrap()
            - hamiltonian_phase(-0.5, k, &p, &d).unwrap();
        assert!((direct - separate).abs() < 1e-9);
    }

    #[test]
    fn propagator_shift_is_total_coupling() {
        let p = CouplingProfile::custom(2.0, |t| t / 2.0, 0.3).unwrap();
        let d = Dispersion::Zero;
        let e = analytic_propagator(1.0, 1.0 - 0.3 * 2.5, 2.5, &p, &d).unwrap();
        assert!((e.shift - 0.75).abs() < 1e-15);
        assert!(e.is_on_support(1e-12));
        assert_eq!(e.phase, 0.0);
    }

    #[test]
    fn lemma_solution_zero_drive() {
        let psi0 = |k: f64| Complex64::new((-k * k).exp(), 0.0);
        let v = lemma_solution(0.4, 2.0, |k| k * k, |_| 0.0, psi0).unwrap();
        let expected = Complex64::from_polar(1.0, -0.32) * (-0.16f64).exp();
        assert!((v - expected).norm() < 1e-12);
    }

    #[test]
    fn drift_integral_of_sine() {
        let d = drift_integral(f64::sin, std::f64::consts::PI);
        for s in [0.0, 1.0, 2.5] {
            assert!((d(s) - (1.0 + s.cos())).abs() < 1e-12);
        }
    }
}
