//! Closed forms for a spin 1/2 measured along `a`, with Bloch-vector pre- and
//! postselection, a centered Gaussian probe and constant coupling.
//!
//! Units: `Delta_k = 1`, `tau = 1`, so `M = k_H^2 / 2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::CouplingProfile;
use crate::error::{Error, Result};
use crate::exact::{DecoherenceModel, MeasurementSetup, ReadoutDistribution};
use crate::expansion::{oscillation_distribution, ExpansionContext};
use crate::grid::KGrid;
use crate::probe::{Dispersion, GaussianProbe};
use crate::system::{DensityMatrix, PostselectionScheme, SystemSpec};

const UNIT_TOLERANCE: f64 = 1e-12;

/// Spin-1/2 measurement in Bloch-vector form.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochConfig {
    m: Vector3<f64>,
    n: Vector3<f64>,
    a: Vector3<f64>,
    lambda: f64,
    coherence: f64,
    k_h: f64,
    k_d: f64,
    shape_factor: f64,
}

impl BlochConfig {
    /// Coherent configuration (`K_D = infinity`). `k_h` may be infinite.
    pub fn new(
        m: [f64; 3],
        n: [f64; 3],
        a: [f64; 3],
        lambda: f64,
        coherence: f64,
        k_h: f64,
    ) -> Result<Self> {
        let (m, n, a) = (Vector3::from(m), Vector3::from(n), Vector3::from(a));
        if (a.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "|a| = {} is not 1",
                a.norm()
            )));
        }
        for (name, v) in [("m", &m), ("n", &n)] {
            if !(v.norm() <= 1.0 + UNIT_TOLERANCE) {
                return Err(Error::InvalidState(format!(
                    "|{name}| = {} exceeds 1",
                    v.norm()
                )));
            }
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and nonnegative (got {lambda})"
            )));
        }
        if !(coherence > 0.0 && coherence <= 2.0 + UNIT_TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "kappa_k must lie in (0, 2] (got {coherence})"
            )));
        }
        if !(k_h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k_H must be positive (got {k_h})"
            )));
        }
        Ok(Self {
            m,
            n,
            a,
            lambda,
            coherence,
            k_h,
            k_d: f64::INFINITY,
            shape_factor: DecoherenceModel::DEFAULT_SHAPE_FACTOR,
        })
    }

    /// Finite decoherence scale `K_D` with shape factor `eps`.
    pub fn with_decoherence(mut self, k_d: f64, eps: f64) -> Result<Self> {
        DecoherenceModel::from_scale(k_d, eps)?;
        self.k_d = k_d;
        self.shape_factor = eps;
        Ok(self)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut c = self.clone();
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and nonnegative (got {lambda})"
            )));
        }
        c.lambda = lambda;
        Ok(c)
    }

    pub fn with_k_h(&self, k_h: f64) -> Result<Self> {
        let mut c = Self::new(
            self.m.into(),
            self.n.into(),
            self.a.into(),
            self.lambda,
            self.coherence,
            k_h,
        )?;
        c.k_d = self.k_d;
        c.shape_factor = self.shape_factor;
        Ok(c)
    }

    /// Small-dispersion preset: `a = z`, `m` at `pi/3` from `a`, `n` a further
    /// `pi - 0.1` away in the same plane; `lambda = 0.5`, `kappa_k = 2`,
    /// `k_H = 10`.
    pub fn fig2() -> Self {
        Self::in_plane(PI / 3.0, PI - 0.1, 0.5, 2.0, 10.0).expect("preset is valid")
    }

    /// Strong-dispersion preset: as [`BlochConfig::fig2`] with `k_H = 0.2`.
    pub fn fig3() -> Self {
        Self::in_plane(PI / 3.0, PI - 0.1, 0.5, 2.0, 0.2).expect("preset is valid")
    }

    /// Pure states in the x-z plane: `m` at polar angle `pre`, `n` at
    /// `pre + post`, measured along `z`.
    pub fn in_plane(pre: f64, post: f64, lambda: f64, coherence: f64, k_h: f64) -> Result<Self> {
        let dir = |t: f64| [t.sin(), 0.0, t.cos()];
        Self::new(
            dir(pre),
            dir(pre + post),
            [0.0, 0.0, 1.0],
            lambda,
            coherence,
            k_h,
        )
    }

    pub fn m(&self) -> [f64; 3] {
        self.m.into()
    }

    pub fn n(&self) -> [f64; 3] {
        self.n.into()
    }

    pub fn a(&self) -> [f64; 3] {
        self.a.into()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn coherence(&self) -> f64 {
        self.coherence
    }

    pub fn k_h(&self) -> f64 {
        self.k_h
    }

    pub fn k_d(&self) -> f64 {
        self.k_d
    }

    pub fn shape_factor(&self) -> f64 {
        self.shape_factor
    }

    /// Oscillation period `pi k_H^2 / lambda`.
    pub fn oscillation_period(&self) -> f64 {
        PI * self.k_h * self.k_h / self.lambda
    }

    /// Coherent oscillations are resolvable when `k_osc < Delta_k`.
    pub fn oscillates(&self) -> bool {
        self.oscillation_period() < 1.0
    }

    fn terms(&self) -> Terms {
        let ma = self.m.dot(&self.a);
        let na = self.n.dot(&self.a);
        let decoherence = if self.k_d.is_finite() {
            let r = self.lambda / self.k_d;
            (-8.0 * self.shape_factor * r * r).exp()
        } else {
            1.0
        };
        let b = if self.k_h.is_finite() {
            2.0 * self.lambda / (self.k_h * self.k_h)
        } else {
            0.0
        };
        Terms {
            up: (1.0 + ma) * (1.0 + na),
            down: (1.0 - ma) * (1.0 - na),
            ma,
            na,
            cos: self.m.dot(&self.n) - ma * na,
            sin: self.m.cross(&self.n).dot(&self.a),
            damping: (-2.0 * self.lambda * self.lambda / (self.coherence * self.coherence)).exp()
                * decoherence,
            b,
        }
    }
}

struct Terms {
    up: f64,
    down: f64,
    ma: f64,
    na: f64,
    cos: f64,
    sin: f64,
    damping: f64,
    b: f64,
}

fn p0(k: f64) -> f64 {
    (-0.5 * k * k).exp() / (2.0 * PI).sqrt()
}

pub fn spin_p_post(cfg: &BlochConfig) -> f64 {
    let t = cfg.terms();
    0.5 * (1.0 + t.ma * t.na + t.damping * (-0.5 * t.b * t.b).exp() * t.cos)
}

pub fn spin_joint_probability(cfg: &BlochConfig, k: f64) -> f64 {
    let t = cfg.terms();
    let l = cfg.lambda;
    let phase = t.b * k;
    0.25 * (t.up * p0(k - l)
        + t.down * p0(k + l)
        + 2.0 * t.damping * (t.cos * phase.cos() - t.sin * phase.sin()) * p0(k))
}

/// The `a = a'` part of the joint probability.
pub fn spin_incoherent_probability(cfg: &BlochConfig, k: f64) -> f64 {
    let t = cfg.terms();
    let l = cfg.lambda;
    0.25 * (t.up * p0(k - l) + t.down * p0(k + l))
}

/// `Z(theta)`; the hyperbolic factors are folded into shifted Gaussians so
/// large `lambda theta / k_H^2` does not overflow.
pub fn spin_characteristic_function(cfg: &BlochConfig, theta: f64) -> Result<Complex64> {
    let p = spin_p_post(cfg);
    if !(p > 0.0) {
        return Err(Error::PostselectionImpossible(p));
    }
    let t = cfg.terms();
    let l = cfg.lambda;
    let z0 = (-0.5 * theta * theta).exp();
    let diag = Complex64::new(
        (1.0 + t.ma * t.na) * (l * theta).cos(),
        (t.ma + t.na) * (l * theta).sin(),
    ) * z0;
    let plus = (-0.5 * (theta + t.b).powi(2)).exp();
    let minus = (-0.5 * (theta - t.b).powi(2)).exp();
    // int e^{i theta k} cos(bk) P_0 = (plus + minus)/2, sin -> (plus - minus)/2i
    let coherent =
        Complex64::new(t.cos * 0.5 * (plus + minus), t.sin * 0.5 * (plus - minus)) * t.damping;
    Ok(0.5 * (diag + coherent) / p)
}

/// Exact `Q(k)` on `grid`, normalized with the closed-form `P_post`.
pub fn spin_distribution(cfg: &BlochConfig, grid: &KGrid) -> Result<ReadoutDistribution> {
    let p = spin_p_post(cfg);
    if !(p > 0.0) {
        return Err(Error::PostselectionImpossible(p));
    }
    let values = grid
        .points()
        .into_par_iter()
        .map(|k| spin_joint_probability(cfg, k) / p)
        .collect();
    Ok(ReadoutDistribution::with_values(*grid, values, p))
}

/// Default grid for spin problems: `[-8, 8]` with 2048 points.
pub fn default_grid() -> KGrid {
    KGrid::centered(
        0.0,
        crate::grid::DEFAULT_HALF_WIDTH,
        crate::grid::DEFAULT_POINTS,
    )
    .expect("valid default grid")
}

fn bloch_matrix(v: &Vector3<f64>) -> DMatrix<Complex64> {
    let c = |re, im| Complex64::new(re, im);
    DMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.5 * (1.0 + v.z), 0.0),
            c(0.5 * v.x, -0.5 * v.y),
            c(0.5 * v.x, 0.5 * v.y),
            c(0.5 * (1.0 - v.z), 0.0),
        ],
    )
}

/// Columns `|+a>`, `|-a>`.
fn eigenbasis(a: &Vector3<f64>) -> DMatrix<Complex64> {
    let (u, v) = if a.z >= 0.0 {
        let r = (2.0 * (1.0 + a.z)).sqrt();
        (
            Complex64::new((1.0 + a.z) / r, 0.0),
            Complex64::new(a.x, a.y) / r,
        )
    } else {
        let r = (2.0 * (1.0 - a.z)).sqrt();
        (
            Complex64::new(a.x, -a.y) / r,
            Complex64::new((1.0 - a.z) / r, 0.0),
        )
    };
    DMatrix::from_row_slice(2, 2, &[u, -v.conj(), v, u.conj()])
}

/// The same measurement expressed for the generic engine, in the eigenbasis
/// of `a . sigma` (eigenvalues `+1, -1`).
pub fn generic_setup(cfg: &BlochConfig) -> Result<MeasurementSetup<GaussianProbe>> {
    let v = eigenbasis(&cfg.a);
    let vd = v.adjoint();
    let rho_i = DensityMatrix::new(&vd * bloch_matrix(&cfg.m) * &v)?;
    let rho_f = DensityMatrix::new(&vd * bloch_matrix(&cfg.n) * &v)?;
    let scheme = PostselectionScheme::from_state(&rho_f)?;
    let profile = CouplingProfile::constant(1.0, cfg.lambda)?;
    let dispersion = Dispersion::from_hamiltonian_scale(cfg.k_h, profile.tau0())?;
    let probe = GaussianProbe::new(1.0, cfg.coherence, 0.0, 0.0)?;
    let system = SystemSpec::with_eigenvalues(vec![1.0, -1.0])?;
    let setup = MeasurementSetup::new(system, rho_i, scheme, probe, profile, dispersion)?;
    Ok(if cfg.k_d.is_finite() {
        setup.with_decoherence(DecoherenceModel::from_scale(cfg.k_d, cfg.shape_factor)?)
    } else {
        setup
    })
}

/// Interpolating approximation to `Q(k)`.
pub fn spin_interpolated_distribution(
    cfg: &BlochConfig,
    grid: &KGrid,
) -> Result<ReadoutDistribution> {
    let setup = generic_setup(cfg)?;
    ExpansionContext::with_grid(&setup, *grid)?.interpolating_distribution(grid)
}

/// Approximation with the k-dependent rotation of the postselected state.
pub fn spin_oscillation_approximation(
    cfg: &BlochConfig,
    grid: &KGrid,
) -> Result<ReadoutDistribution> {
    oscillation_distribution(&generic_setup(cfg)?, grid)
}

/// Exact distribution plus the oscillation period read off the data.
#[derive(Debug, Clone)]
pub struct OscillationScan {
    pub distribution: ReadoutDistribution,
    /// Mean spacing of the maxima of `Q - Q_incoherent`; `None` with fewer
    /// than two maxima.
    pub measured_period: Option<f64>,
    pub predicted_period: f64,
    pub oscillating: bool,
}

pub fn oscillation_scan(cfg: &BlochConfig, grid: &KGrid) -> Result<OscillationScan> {
    let distribution = spin_distribution(cfg, grid)?;
    let p = distribution.p_post();
    let ks = grid.points();
    let residual: Vec<f64> = ks
        .iter()
        .zip(distribution.values())
        .map(|(&k, q)| q - spin_incoherent_probability(cfg, k) / p)
        .collect();
    // Only trust maxima where the coherent envelope is appreciable.
    let floor = 1e-3 * p0(0.0);
    let dk = grid.spacing();
    let mut peaks = Vec::new();
    for i in 1..residual.len() - 1 {
        let (l, c, r) = (residual[i - 1], residual[i], residual[i + 1]);
        if c > l && c >= r && p0(ks[i]) > floor {
            let curvature = l - 2.0 * c + r;
            let offset = if curvature < 0.0 {
                0.5 * (l - r) / curvature
            } else {
                0.0
            };
            peaks.push(ks[i] + offset * dk);
        }
    }
    let measured_period =
        (peaks.len() >= 2).then(|| (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64);
    Ok(OscillationScan {
        distribution,
        measured_period,
        predicted_period: cfg.oscillation_period(),
        oscillating: cfg.oscillates(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Terms as ExactTerms;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let r = (1.0 - z * z).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    }

    fn random_bloch(rng: &mut ChaCha8Rng) -> [f64; 3] {
        let r: f64 = rng.random_range(0.0..=1.0);
        random_unit(rng).map(|x| x * r)
    }

    fn random_config(rng: &mut ChaCha8Rng) -> BlochConfig {
        let m = random_bloch(rng);
        let n = random_bloch(rng);
        let a = random_unit(rng);
        BlochConfig::new(
            m,
            n,
            a,
            rng.random_range(0.0..=1.0),
            rng.random_range(0.05..=2.0),
            rng.random_range(0.1..=20.0),
        )
        .unwrap()
    }

    #[test]
    fn p_post_examples() {
        let z = [0.0, 0.0, 1.0];
        let c = BlochConfig::new(z, z, z, 0.5, 2.0, 3.0).unwrap();
        assert!((spin_p_post(&c) - 1.0).abs() < 1e-15);
        let c = BlochConfig::new(z, [0.0, 0.0, -1.0], z, 0.5, 2.0, 3.0).unwrap();
        assert!(spin_p_post(&c).abs() < 1e-15);
        let (m, n) = ([0.3, -0.4, 0.5], [0.6, 0.1, -0.2]);
        let c = BlochConfig::new(m, n, [1.0, 0.0, 0.0], 0.0, 1.0, 3.0).unwrap();
        assert!((spin_p_post(&c) - 0.5 * (1.0 + 0.18 - 0.04 - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let z = [0.0, 0.0, 1.0];
        assert!(BlochConfig::new(z, z, [0.0, 0.0, 1.1], 0.5, 2.0, 1.0).is_err());
        assert!(BlochConfig::new([0.0, 0.8, 0.8], z, z, 0.5, 2.0, 1.0).is_err());
        assert!(BlochConfig::new(z, z, z, 0.5, 2.1, 1.0).is_err());
        assert!(BlochConfig::new(z, z, z, -0.5, 2.0, 1.0).is_err());
        assert!(BlochConfig::new(z, z, z, 0.5, 2.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn presets() {
        let f2 = BlochConfig::fig2();
        assert!((f2.m()[2] - 0.5).abs() < 1e-15);
        let angle = (Vector3::from(f2.m()).dot(&Vector3::from(f2.n()))).acos();
        assert!((angle - (PI - 0.1)).abs() < 1e-12);
        assert!(!f2.oscillates());
        assert!((f2.oscillation_period() - 628.3185307179587).abs() < 1e-9);
        let f3 = BlochConfig::fig3();
        assert!(f3.oscillates());
        assert!((f3.oscillation_period() - 0.25132741228718347).abs() < 1e-15);
    }

    #[test]
    fn commuting_states_give_two_gaussians() {
        let z = [0.0, 0.0, 1.0];
        let c = BlochConfig::new([0.0, 0.0, 0.6], [0.0, 0.0, -0.2], z, 0.7, 2.0, 0.5).unwrap();
        for k in [-1.0, 0.1, 0.8] {
            assert!(
                (spin_joint_probability(&c, k) - spin_incoherent_probability(&c, k)).abs() < 1e-16
            );
        }
    }

    #[test]
    fn joint_integrates_to_p_post() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = default_grid();
        for _ in 0..50 {
            let c = random_config(&mut rng);
            let v: Vec<f64> = g
                .points()
                .iter()
                .map(|&k| spin_joint_probability(&c, k))
                .collect();
            assert!((g.integrate(&v) - spin_p_post(&c)).abs() < 1e-8);
        }
    }

    #[test]
    fn characteristic_function_matches_quadrature() {
        let c = BlochConfig::fig2();
        let q = spin_distribution(&c, &default_grid()).unwrap();
        for theta in [0.0, 0.5, 1.7] {
            let z = spin_characteristic_function(&c, theta).unwrap();
            assert!((z - q.characteristic_function(theta)).norm() < 1e-9);
        }
        let zero = c.with_lambda(0.0).unwrap();
        let z = spin_characteristic_function(&zero, 1.2).unwrap();
        assert!((z - (-0.72f64).exp()).norm() < 1e-12);
    }

    #[test]
    fn characteristic_function_is_stable() {
        let c = BlochConfig::new(
            [0.0, 0.6, 0.8],
            [0.6, 0.0, -0.8],
            [0.0, 0.0, 1.0],
            1.0,
            2.0,
            0.1,
        )
        .unwrap();
        let z = spin_characteristic_function(&c, 50.0).unwrap();
        assert!(z.re.is_finite() && z.im.is_finite());
    }

    #[test]
    fn agrees_with_generic_engine() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = default_grid();
        for i in 0..10 {
            let mut c = random_config(&mut rng);
            if i % 3 == 0 {
                c = c
                    .with_decoherence(rng.random_range(0.2..3.0), 1.0 / 12.0)
                    .unwrap();
            }
            let s = generic_setup(&c).unwrap();
            assert!((s.postselection_probability(&g).unwrap() - spin_p_post(&c)).abs() < 1e-10);
            for k in [-2.5, -0.3, 0.0, 0.77, 3.1] {
                let p = s.joint_probability_terms(k, ExactTerms::All).unwrap();
                assert!(
                    (p - spin_joint_probability(&c, k)).abs() < 1e-10,
                    "config {i}, k = {k}"
                );
            }
        }
    }

    #[test]
    fn p_post_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let c = random_config(&mut rng);
            let p = spin_p_post(&c);
            assert!((-1e-15..=1.0 + 1e-15).contains(&p), "{p}");
        }
    }

    #[test]
    fn oscillation_scan_fig3() {
        let g = default_grid();
        let scan = oscillation_scan(&BlochConfig::fig3(), &g).unwrap();
        let period = scan.measured_period.unwrap();
        assert!(
            (period - scan.predicted_period).abs() < g.spacing(),
            "{period}"
        );
        assert!(scan.oscillating);
        let quiet = oscillation_scan(&BlochConfig::fig2(), &g).unwrap();
        assert!(!quiet.oscillating);
    }

    #[test]
    fn fig2_interpolation_is_normalized() {
        let g = default_grid();
        let q = spin_interpolated_distribution(&BlochConfig::fig2(), &g).unwrap();
        assert!((q.normalization() - 1.0).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn reversing_the_axis_mirrors_q(seed in any::<u64>(), k in -4.0f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_config(&mut rng);
            let a = c.a().map(|x| -x);
            let flipped = BlochConfig::new(c.m(), c.n(), a, c.lambda(), c.coherence(), c.k_h()).unwrap();
            let (p, q) = (spin_joint_probability(&c, k), spin_joint_probability(&flipped, -k));
            prop_assert!((p - q).abs() < 1e-14);
        }

        #[test]
        fn eigenbasis_diagonalizes_axis(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Vector3::from(random_unit(&mut rng));
            let v = eigenbasis(&a);
            let sigma_a = bloch_matrix(&a) - bloch_matrix(&(-a));
            let d = v.adjoint() * sigma_a * &v;
            prop_assert!((d[(0, 0)] - 1.0).norm() < 1e-12);
            prop_assert!((d[(1, 1)] + 1.0).norm() < 1e-12);
            prop_assert!(d[(0, 1)].norm() < 1e-12);
        }
    }
}
