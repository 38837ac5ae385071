//! Exact joint and conditional readout statistics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{evolve_probe_element, phase_difference, CouplingProfile};
use crate::error::{Error, Result};
use crate::grid::KGrid;
use crate::probe::{Dispersion, Probe};
use crate::system::{DensityMatrix, PostselectionScheme, SystemSpec};

/// Imaginary residue of `P(k, rho_f)` tolerated before it is dropped.
pub const IMAGINARY_TOLERANCE: f64 = 1e-8;

/// Smallest postselection probability that can be conditioned on.
pub const POSTSELECTION_FLOOR: f64 = 1e-14;

/// Lowest value an exact distribution may take before it is reported as a bug.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// Environmental dephasing of the probe during the coupling.
///
/// Each `(a, a')` term of the joint probability is damped by
/// `exp(-2 eps lambda^2 (a - a')^2 / K_D^2)` with
/// `K_D = [gamma k_B T tau^3 / 2M]^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceModel {
    scale: f64,
    shape_factor: f64,
}

impl DecoherenceModel {
    /// Shape factor used when none is given (constant coupling).
    pub const DEFAULT_SHAPE_FACTOR: f64 = 1.0 / 12.0;

    /// From the rate `gamma`, thermal energy `k_B T`, shape factor, probe mass
    /// and coupling duration. `gamma = 0` disables decoherence.
    pub fn new(
        gamma: f64,
        thermal_energy: f64,
        shape_factor: f64,
        mass: f64,
        tau: f64,
    ) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("k_B T", thermal_energy)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative (got {v})"
                )));
            }
        }
        for (name, v) in [("shape factor", shape_factor), ("mass", mass), ("tau", tau)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive (got {v})"
                )));
            }
        }
        let inv_sq = gamma * thermal_energy * tau.powi(3) / (2.0 * mass);
        let scale = if inv_sq > 0.0 {
            inv_sq.sqrt().recip()
        } else {
            f64::INFINITY
        };
        Ok(Self {
            scale,
            shape_factor,
        })
    }

    /// Directly from the decoherence scale `K_D` (may be infinite).
    pub fn from_scale(scale: f64, shape_factor: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "K_D must be positive (got {scale})"
            )));
        }
        if !(shape_factor > 0.0) || !shape_factor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "shape factor must be positive (got {shape_factor})"
            )));
        }
        Ok(Self {
            scale,
            shape_factor,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape_factor(&self) -> f64 {
        self.shape_factor
    }

    pub fn is_coherent(&self) -> bool {
        self.scale.is_infinite()
    }

    /// Damping of the `(a, a')` term.
    pub fn factor(&self, lambda: f64, a: f64, a_prime: f64) -> f64 {
        if self.is_coherent() || a == a_prime {
            return 1.0;
        }
        let d = lambda * (a - a_prime) / self.scale;
        (-2.0 * self.shape_factor * d * d).exp()
    }
}

/// Which `(a, a')` terms of the joint probability to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Terms {
    #[default]
    All,
    /// `a = a'` only: the incoherent mixture of shifted probe distributions.
    Diagonal,
    /// `a != a'` only.
    Coherent,
}

/// Whether the total postselection weight `W` multiplies the joint
/// probability. Conditional distributions do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightConvention {
    #[default]
    Explicit,
    Omitted,
}

/// A complete measurement: system, pre/postselection, probe and coupling.
#[derive(Debug, Clone)]
pub struct MeasurementSetup<P> {
    system: SystemSpec,
    rho_i: DensityMatrix,
    scheme: PostselectionScheme,
    rho_f: DensityMatrix,
    probe: P,
    profile: CouplingProfile,
    dispersion: Dispersion,
    decoherence: Option<DecoherenceModel>,
    convention: WeightConvention,
    coefficients: Vec<(usize, usize, Complex64)>,
}

impl<P: Probe> MeasurementSetup<P> {
    pub fn new(
        system: SystemSpec,
        rho_i: DensityMatrix,
        scheme: PostselectionScheme,
        probe: P,
        profile: CouplingProfile,
        dispersion: Dispersion,
    ) -> Result<Self> {
        let d = system.dim();
        for got in [rho_i.dim(), scheme.dim()] {
            if got != d {
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        let rho_f = scheme.postselected_state()?;
        let mut coefficients = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let c = rho_f.get(b, a) * rho_i.get(a, b);
                if c != Complex64::new(0.0, 0.0) {
                    coefficients.push((a, b, c));
                }
            }
        }
        Ok(Self {
            system,
            rho_i,
            scheme,
            rho_f,
            probe,
            profile,
            dispersion,
            decoherence: None,
            convention: WeightConvention::Explicit,
            coefficients,
        })
    }

    pub fn with_decoherence(mut self, model: DecoherenceModel) -> Self {
        self.decoherence = if model.is_coherent() {
            None
        } else {
            Some(model)
        };
        self
    }

    pub fn with_weight_convention(mut self, convention: WeightConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Same setup with another coupling strength.
    pub fn with_lambda(&self, lambda: f64) -> Self
    where
        P: Clone,
    {
        Self {
            profile: self.profile.with_lambda(lambda),
            ..self.clone()
        }
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn rho_i(&self) -> &DensityMatrix {
        &self.rho_i
    }

    pub fn rho_f(&self) -> &DensityMatrix {
        &self.rho_f
    }

    pub fn scheme(&self) -> &PostselectionScheme {
        &self.scheme
    }

    pub fn probe(&self) -> &P {
        &self.probe
    }

    pub fn profile(&self) -> &CouplingProfile {
        &self.profile
    }

    pub fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }

    pub fn decoherence(&self) -> Option<&DecoherenceModel> {
        self.decoherence.as_ref()
    }

    pub fn lambda(&self) -> f64 {
        self.profile.lambda()
    }

    /// `W` under the explicit convention, 1 otherwise.
    pub fn prefactor(&self) -> f64 {
        match self.convention {
            WeightConvention::Explicit => self.scheme.total_weight(),
            WeightConvention::Omitted => 1.0,
        }
    }

    /// Decoherence damping of the `(a, a')` term.
    pub fn damping(&self, a: f64, b: f64) -> f64 {
        self.decoherence
            .map_or(1.0, |d| d.factor(self.lambda(), a, b))
    }

    /// Complex sum before the imaginary residue is checked.
    pub fn joint_amplitude(&self, k: f64, terms: Terms) -> Result<Complex64> {
        let ev = self.system.eigenvalues();
        let lambda = self.lambda();
        let mut total = Complex64::new(0.0, 0.0);
        for &(i, j, c) in &self.coefficients {
            let keep = match terms {
                Terms::All => true,
                Terms::Diagonal => i == j,
                Terms::Coherent => i != j,
            };
            if !keep {
                continue;
            }
            let (a, b) = (ev[i], ev[j]);
            let phase = phase_difference(a, b, k, &self.profile, &self.dispersion)?;
            let element =
                self.probe.rho(k - lambda * a, k - lambda * b) * Complex64::from_polar(1.0, -phase);
            total += c * element * self.damping(a, b);
        }
        Ok(total * self.prefactor())
    }

    /// `P(k, rho_f)`.
    pub fn joint_probability(&self, k: f64) -> Result<f64> {
        self.joint_probability_terms(k, Terms::All)
    }

    pub fn joint_probability_terms(&self, k: f64, terms: Terms) -> Result<f64> {
        let z = self.joint_amplitude(k, terms)?;
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite(format!("joint probability at k = {k}")));
        }
        if z.im.abs() > IMAGINARY_TOLERANCE {
            return Err(Error::Consistency(format!(
                "joint probability at k = {k} has imaginary part {:e}",
                z.im
            )));
        }
        Ok(z.re)
    }

    pub fn joint_on_grid(&self, grid: &KGrid, terms: Terms) -> Result<Vec<f64>> {
        grid.points()
            .into_par_iter()
            .map(|k| self.joint_probability_terms(k, terms))
            .collect()
    }

    /// `P_post = int P(k, rho_f) dk`.
    pub fn postselection_probability(&self, grid: &KGrid) -> Result<f64> {
        Ok(grid.integrate(&self.joint_on_grid(grid, Terms::All)?))
    }

    /// `Q(k) = P(k, rho_f) / P_post` on the grid.
    pub fn conditional_distribution(&self, grid: &KGrid) -> Result<ReadoutDistribution> {
        self.conditional_distribution_terms(grid, Terms::All)
    }

    pub fn conditional_distribution_terms(
        &self,
        grid: &KGrid,
        terms: Terms,
    ) -> Result<ReadoutDistribution> {
        let joint = self.joint_on_grid(grid, terms)?;
        if let Some((i, v)) = joint
            .iter()
            .enumerate()
            .find(|(_, v)| **v < -NEGATIVITY_TOLERANCE)
        {
            return Err(Error::Consistency(format!(
                "exact joint probability is negative ({v:e}) at k = {}",
                grid.point(i)
            )));
        }
        ReadoutDistribution::from_joint(*grid, joint)
    }

    /// Exact `Z_x(chi) = int dk rho_P(k - chi/2, k + chi/2) / P_post`, the
    /// characteristic function of the write-in variable right after the
    /// coupling.
    pub fn characteristic_function_x(&self, chi: f64, grid: &KGrid) -> Result<Complex64> {
        let ev = self.system.eigenvalues();
        let half = 0.5 * chi;
        let values: Vec<Complex64> = grid
            .points()
            .into_par_iter()
            .map(|k| {
                let mut total = Complex64::new(0.0, 0.0);
                for &(i, j, c) in &self.coefficients {
                    let (a, b) = (ev[i], ev[j]);
                    let e = evolve_probe_element(
                        |u, v| self.probe.rho(u, v),
                        k - half,
                        k + half,
                        a,
                        b,
                        &self.profile,
                        &self.dispersion,
                    )?;
                    total += c * e * self.damping(a, b);
                }
                Ok(total)
            })
            .collect::<Result<_>>()?;
        let p_post: f64 = grid.integrate(&self.joint_on_grid(grid, Terms::All)?) / self.prefactor();
        if !(p_post > POSTSELECTION_FLOOR) {
            return Err(Error::PostselectionImpossible(p_post));
        }
        Ok(grid.integrate_complex(&values) / p_post)
    }
}

/// A tabulated readout distribution with its postselection probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutDistribution {
    grid: KGrid,
    values: Vec<f64>,
    p_post: f64,
    moments: [f64; 5],
}

impl ReadoutDistribution {
    /// Normalizes a joint probability table by its integral.
    pub fn from_joint(grid: KGrid, joint: Vec<f64>) -> Result<Self> {
        let p_post = grid.integrate(&joint);
        if !p_post.is_finite() {
            return Err(Error::NonFinite("postselection probability".into()));
        }
        if !(p_post > POSTSELECTION_FLOOR) {
            return Err(Error::PostselectionImpossible(p_post));
        }
        let values = joint.into_iter().map(|v| v / p_post).collect();
        Ok(Self::with_values(grid, values, p_post))
    }

    /// Wraps already-normalized values.
    pub fn with_values(grid: KGrid, values: Vec<f64>, p_post: f64) -> Self {
        let ks = grid.points();
        let mut moments = [0.0; 5];
        for (n, m) in moments.iter_mut().enumerate() {
            let w: Vec<f64> = ks
                .iter()
                .zip(&values)
                .map(|(k, q)| k.powi(n as i32) * q)
                .collect();
            *m = grid.integrate(&w);
        }
        Self {
            grid,
            values,
            p_post,
            moments,
        }
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p_post(&self) -> f64 {
        self.p_post
    }

    /// `<k^n>` for `n <= 4`.
    pub fn moment(&self, n: usize) -> Result<f64> {
        self.moments.get(n).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("moments are tabulated up to order 4 (asked {n})"))
        })
    }

    pub fn normalization(&self) -> f64 {
        self.moments[0]
    }

    pub fn mean(&self) -> f64 {
        self.moments[1] / self.moments[0]
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moments[2] / self.moments[0] - m * m
    }

    pub fn peak(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `int e^{i theta k} Q(k) dk`.
    pub fn characteristic_function(&self, theta: f64) -> Complex64 {
        let w: Vec<Complex64> = self
            .grid
            .points()
            .iter()
            .zip(&self.values)
            .map(|(k, q)| Complex64::from_polar(*q, theta * k))
            .collect();
        self.grid.integrate_complex(&w)
    }

    pub fn max_abs_difference(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter(
                "distributions live on different grids".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::GaussianProbe;
    use crate::system::WeakValueSet;
    use nalgebra::DMatrix;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spin_setup(
        lambda: f64,
        k_h: f64,
        rho_i: DensityMatrix,
        scheme: PostselectionScheme,
    ) -> MeasurementSetup<GaussianProbe> {
        let system = SystemSpec::with_eigenvalues(vec![1.0, -1.0]).unwrap();
        let profile = CouplingProfile::constant(1.0, lambda).unwrap();
        let dispersion = Dispersion::from_hamiltonian_scale(k_h, profile.tau0()).unwrap();
        let probe = GaussianProbe::unit(2.0).unwrap();
        MeasurementSetup::new(system, rho_i, scheme, probe, profile, dispersion).unwrap()
    }

    fn plus_x() -> Vec<Complex64> {
        vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]
    }

    #[test]
    fn decoherence_scale() {
        let d = DecoherenceModel::new(2.0, 0.5, 1.0 / 12.0, 4.0, 2.0).unwrap();
        // gamma kT tau^3 / 2M = 2 * 0.5 * 8 / 8 = 1
        assert!((d.scale() - 1.0).abs() < 1e-15);
        assert!(DecoherenceModel::new(0.0, 0.5, 0.1, 1.0, 1.0)
            .unwrap()
            .is_coherent());
        let d = DecoherenceModel::from_scale(0.5, 0.25).unwrap();
        assert!((d.factor(1.0, 1.0, -1.0) - (-8.0f64).exp()).abs() < 1e-15);
        assert_eq!(d.factor(1.0, 1.0, 1.0), 1.0);
        assert!(DecoherenceModel::from_scale(0.0, 0.1).is_err());
    }

    #[test]
    fn uncoupled_probability_is_overlap_times_p0() {
        let rho_i = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let scheme = PostselectionScheme::pure(&plus_x(), 0.6).unwrap();
        let s = spin_setup(0.0, 10.0, rho_i, scheme);
        for k in [-1.0, 0.0, 2.0] {
            let p = s.joint_probability(k).unwrap();
            assert!((p - 0.6 * 0.5 * s.probe().p0(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn maximally_mixed_postselection_has_no_coherent_terms() {
        let rho_i = DensityMatrix::pure(&plus_x()).unwrap();
        let scheme = PostselectionScheme::computational(vec![1.0, 1.0]).unwrap();
        let s = spin_setup(0.7, 1.0, rho_i, scheme);
        for k in [-1.0, 0.2, 1.5] {
            assert!(s.joint_probability_terms(k, Terms::Coherent).unwrap().abs() < 1e-15);
            // (W/D) sum_a rho_i(a,a) P_0(k - lambda a)
            let expected = 0.5 * (s.probe().p0(k - 0.7) + s.probe().p0(k + 0.7));
            assert!((s.joint_probability(k).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn postselection_probability_limits() {
        let up = [c(1.0, 0.0), c(0.0, 0.0)];
        let down = [c(0.0, 0.0), c(1.0, 0.0)];
        let grid = KGrid::centered(0.0, 10.0, 2048).unwrap();
        let s = spin_setup(
            0.5,
            10.0,
            DensityMatrix::pure(&up).unwrap(),
            PostselectionScheme::pure(&up, 1.0).unwrap(),
        );
        assert!((s.postselection_probability(&grid).unwrap() - 1.0).abs() < 1e-12);
        let s = spin_setup(
            0.5,
            10.0,
            DensityMatrix::pure(&up).unwrap(),
            PostselectionScheme::pure(&down, 1.0).unwrap(),
        );
        assert!(s.postselection_probability(&grid).unwrap().abs() < 1e-15);
        assert!(matches!(
            s.conditional_distribution(&grid),
            Err(Error::PostselectionImpossible(_))
        ));
    }

    #[test]
    fn conditional_distribution_is_independent_of_weight() {
        let rho_i = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let grid = KGrid::centered(0.0, 8.0, 1024).unwrap();
        let full = spin_setup(
            0.4,
            1.0,
            rho_i.clone(),
            PostselectionScheme::pure(&plus_x(), 1.0).unwrap(),
        );
        let part = spin_setup(
            0.4,
            1.0,
            rho_i,
            PostselectionScheme::pure(&plus_x(), 0.3).unwrap(),
        );
        let q1 = full.conditional_distribution(&grid).unwrap();
        let q2 = part.conditional_distribution(&grid).unwrap();
        assert!(q1.max_abs_difference(&q2).unwrap() < 1e-14);
        assert!((q2.p_post() - 0.3 * q1.p_post()).abs() < 1e-14);
        let omitted = part
            .clone()
            .with_weight_convention(WeightConvention::Omitted);
        let q3 = omitted.conditional_distribution(&grid).unwrap();
        assert!(q1.max_abs_difference(&q3).unwrap() < 1e-14);
        assert!((q3.p_post() - q1.p_post()).abs() < 1e-14);
    }

    #[test]
    fn distribution_moments_and_characteristic_function() {
        let rho_i = DensityMatrix::maximally_mixed(2).unwrap();
        let grid = KGrid::centered(0.0, 8.0, 2048).unwrap();
        let s = spin_setup(
            0.0,
            10.0,
            rho_i,
            PostselectionScheme::computational(vec![1.0, 1.0]).unwrap(),
        );
        let q = s.conditional_distribution(&grid).unwrap();
        assert!((q.normalization() - 1.0).abs() < 1e-10);
        assert!(q.mean().abs() < 1e-14);
        assert!(q.moment(2).unwrap() >= q.mean() * q.mean());
        assert!(q.moment(5).is_err());
        assert!((q.characteristic_function(0.0) - 1.0).norm() < 1e-10);
        let z = q.characteristic_function(0.8);
        assert!((z - c((-0.32f64).exp(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn weak_value_shift_for_instantaneous_coupling() {
        // Tiny lambda, no dispersion: <k> ~ lambda Re A_w.
        let psi_i = [c(0.6, 0.0), c(0.8, 0.0)];
        let rho_i = DensityMatrix::pure(&psi_i).unwrap();
        let scheme = PostselectionScheme::pure(&plus_x(), 1.0).unwrap();
        let system = SystemSpec::with_eigenvalues(vec![1.0, -1.0]).unwrap();
        let lambda = 1e-3;
        let profile = CouplingProfile::constant(1.0, lambda).unwrap();
        let probe = GaussianProbe::unit(2.0).unwrap();
        let s = MeasurementSetup::new(
            system.clone(),
            rho_i.clone(),
            scheme.clone(),
            probe,
            profile,
            Dispersion::Zero,
        )
        .unwrap();
        let grid = KGrid::centered(0.0, 8.0, 2048).unwrap();
        let q = s.conditional_distribution(&grid).unwrap();
        let rho_f = scheme.postselected_state().unwrap();
        let w: WeakValueSet = crate::system::weak_values(&rho_i, &rho_f, &system).unwrap();
        let a_w = w.a_w().unwrap();
        assert!((q.mean() - lambda * a_w.re).abs() < 1e-8);
    }

    #[test]
    fn decoherence_suppresses_coherent_terms() {
        let rho_i = DensityMatrix::pure(&plus_x()).unwrap();
        let f = [c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)];
        let s = spin_setup(0.5, 1.0, rho_i, PostselectionScheme::pure(&f, 1.0).unwrap());
        let strong = s
            .clone()
            .with_decoherence(DecoherenceModel::from_scale(0.05, 1.0 / 12.0).unwrap());
        for k in [-0.5, 0.0, 0.7] {
            let full = strong.joint_probability(k).unwrap();
            let diag = s.joint_probability_terms(k, Terms::Diagonal).unwrap();
            assert!((full - diag).abs() < 1e-12);
        }
        let none = s
            .clone()
            .with_decoherence(DecoherenceModel::from_scale(f64::INFINITY, 0.1).unwrap());
        assert!(none.decoherence().is_none());
    }

    #[test]
    fn imaginary_residue_is_a_consistency_error() {
        // Build a setup by hand with a non-Hermitian coefficient table.
        let rho_i = DensityMatrix::pure(&plus_x()).unwrap();
        let mut s = spin_setup(
            0.5,
            1.0,
            rho_i,
            PostselectionScheme::pure(&plus_x(), 1.0).unwrap(),
        );
        s.coefficients[1].2 += c(0.0, 0.1);
        assert!(matches!(
            s.joint_probability(0.0),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn write_in_characteristic_function_at_zero() {
        let rho_i = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let s = spin_setup(
            0.3,
            2.0,
            rho_i,
            PostselectionScheme::pure(&plus_x(), 1.0).unwrap(),
        );
        let grid = KGrid::centered(0.0, 8.0, 1024).unwrap();
        assert!((s.characteristic_function_x(0.0, &grid).unwrap() - 1.0).norm() < 1e-12);
        let z = s.characteristic_function_x(0.6, &grid).unwrap();
        assert!(z.norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let system = SystemSpec::with_eigenvalues(vec![1.0, 0.0, -1.0]).unwrap();
        let rho_i = DensityMatrix::maximally_mixed(2).unwrap();
        let scheme = PostselectionScheme::computational(vec![1.0, 1.0]).unwrap();
        let profile = CouplingProfile::constant(1.0, 0.1).unwrap();
        let r = MeasurementSetup::new(
            system,
            rho_i,
            scheme,
            GaussianProbe::unit(1.0).unwrap(),
            profile,
            Dispersion::Zero,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
        let _ = DMatrix::<f64>::zeros(1, 1);
    }
}
