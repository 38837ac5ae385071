//! Oracle battery: each check pits an implementation path against an
//! independent one (closed forms, brute-force propagation, exact quadrature)
//! and reports the measured discrepancies against fixed bounds.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{drift_integral, l2_distance, lemma_solution, numeric_propagate_oracle};
use crate::error::{Error, Result};
use crate::exact::{DecoherenceModel, MeasurementSetup, Terms};
use crate::expansion::ExpansionContext;
use crate::grid::KGrid;
use crate::probe::{Dispersion, GaussianProbe};
use crate::spinhalf::{
    default_grid, generic_setup, oscillation_scan, spin_characteristic_function, spin_distribution,
    spin_joint_probability, spin_oscillation_approximation, spin_p_post, BlochConfig,
};
use crate::system::{weak_values, DensityMatrix, PostselectionScheme, SystemSpec};

/// Seed for every randomized check.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Below(f64),
    AtLeast(f64),
    Within(f64, f64),
    /// Reported for context only.
    Info,
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::Below(b) => v < b,
            Bound::AtLeast(b) => v >= b,
            Bound::Within(lo, hi) => (lo..=hi).contains(&v),
            Bound::Info => true,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Below(b) => write!(f, "< {b:e}"),
            Bound::AtLeast(b) => write!(f, ">= {b:e}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo:e}, {hi:e}]"),
            Bound::Info => write!(f, "(info)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    pub bound: Bound,
    pub note: Option<String>,
}

impl Measurement {
    pub fn new(label: impl Into<String>, value: f64, bound: Bound) -> Self {
        Self {
            label: label.into(),
            value,
            bound,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.bound.holds(self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measurements: Vec<Measurement>,
}

impl Check {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            measurements: Vec::new(),
        }
    }

    fn push(&mut self, m: Measurement) {
        self.measurements.push(m);
    }

    pub fn passed(&self) -> bool {
        self.measurements.iter().all(Measurement::passed)
    }

    /// One summary line plus one indented line per measurement.
    pub fn report(&self) -> String {
        let mut s = format!(
            "{} {}\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name
        );
        for m in &self.measurements {
            s.push_str(&format!(
                "    [{}] {} = {:.6e} {}",
                if m.passed() { "ok" } else { "!!" },
                m.label,
                m.value,
                m.bound
            ));
            if let Some(n) = &m.note {
                s.push_str(&format!(" ({n})"));
            }
            s.push('\n');
        }
        s
    }
}

/// Random density matrix `G G^dagger / Tr` with `G` of shape `d x rank`.
pub fn random_density_matrix<R: Rng>(rng: &mut R, d: usize, rank: usize) -> Result<DensityMatrix> {
    let g = DMatrix::from_fn(d, rank, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr)
}

/// Uniform on the sphere.
pub fn random_unit_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Random spin configuration with `lambda in [0, 1]`, `kappa_k in (0, 2]`,
/// `k_H in [0.1, 20]` and Bloch vectors inside the ball.
pub fn random_bloch_config<R: Rng>(rng: &mut R) -> Result<BlochConfig> {
    let bloch = |rng: &mut R| {
        let r = rng.random::<f64>().cbrt();
        random_unit_vector(rng).map(|x| x * r)
    };
    let m = bloch(rng);
    let n = bloch(rng);
    let a = random_unit_vector(rng);
    let lambda = rng.random_range(0.0..=1.0);
    let coherence = 2.0 * (1.0 - rng.random::<f64>());
    let k_h = rng.random_range(0.1..=20.0);
    BlochConfig::new(m, n, a, lambda, coherence, k_h)
}

/// Brute-force product-formula propagation against the analytic solution
/// for `omega = k^2/2`, `f = 1/tau`, on a 2048-point grid.
pub fn propagator_lemma() -> Result<Check> {
    let started = Instant::now();
    let tau = 1.0;
    let grid = KGrid::centered(0.0, 16.0, 2048)?;
    let psi0 = |k: f64| Complex64::new((2.0 * PI).powf(-0.25) * (-0.25 * k * k).exp(), 0.0);
    let omega = |k: f64| 0.5 * k * k;
    let f = |_: f64| 1.0 / tau;
    let initial: Vec<Complex64> = grid.points().iter().map(|&k| psi0(k)).collect();
    let drift = drift_integral(f, tau);
    let analytic: Vec<Complex64> = grid
        .points()
        .into_par_iter()
        .map(|k| lemma_solution(k, tau, omega, &drift, psi0))
        .collect::<Result<_>>()?;
    let coarse = numeric_propagate_oracle(&initial, &grid, omega, f, tau, 10_000)?;
    let fine = numeric_propagate_oracle(&initial, &grid, omega, f, tau, 20_000)?;
    let e1 = l2_distance(&coarse, &analytic, &grid);
    let e2 = l2_distance(&fine, &analytic, &grid);
    let mut c = Check::new("propagator lemma vs product-formula oracle");
    c.push(Measurement::new(
        "L2 error, 10^4 steps",
        e1,
        Bound::Below(1e-4),
    ));
    c.push(Measurement::new(
        "error ratio 10^4 / 2*10^4 steps",
        e1 / e2,
        Bound::Within(1.8, 2.2),
    ));
    c.push(Measurement::new(
        "runtime [s]",
        started.elapsed().as_secs_f64(),
        Bound::Below(10.0),
    ));
    Ok(c)
}

/// Thetas at which characteristic functions are compared.
pub fn theta_samples() -> Vec<f64> {
    (0..20).map(|j| 0.25 * j as f64).collect()
}

/// Generic engine against the spin closed forms on random configurations.
/// `build` turns a configuration into a generic setup; passing anything but
/// [`generic_setup`] is for mutation testing.
pub fn spin_cross_check<B>(configs: usize, seed: u64, build: B) -> Result<Check>
where
    B: Fn(&BlochConfig) -> Result<MeasurementSetup<GaussianProbe>> + Sync,
{
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfgs: Vec<BlochConfig> = (0..configs)
        .map(|_| random_bloch_config(&mut rng))
        .collect::<Result<_>>()?;
    let grid = default_grid();
    let thetas = theta_samples();
    let errors: Vec<[f64; 3]> = cfgs
        .par_iter()
        .map(|cfg| {
            let setup = build(cfg)?;
            let joint = setup.joint_on_grid(&grid, Terms::All)?;
            let p_generic = grid.integrate(&joint) / setup.prefactor();
            let dp = (p_generic - spin_p_post(cfg)).abs();
            let dk = grid
                .points()
                .iter()
                .zip(&joint)
                .map(|(&k, p)| (p - spin_joint_probability(cfg, k)).abs())
                .fold(0.0, f64::max);
            let mut dz: f64 = 0.0;
            for &theta in &thetas {
                let w: Vec<Complex64> = grid
                    .points()
                    .iter()
                    .zip(&joint)
                    .map(|(&k, p)| Complex64::from_polar(*p, theta * k))
                    .collect();
                let z = grid.integrate_complex(&w) / (p_generic * setup.prefactor());
                dz = dz.max((z - spin_characteristic_function(cfg, theta)?).norm());
            }
            Ok([dp, dk, dz])
        })
        .collect::<Result<_>>()?;
    let worst = |j: usize| errors.iter().map(|e| e[j]).fold(0.0, f64::max);
    let mut c = Check::new(format!(
        "generic engine vs spin closed forms ({configs} configurations)"
    ));
    c.push(Measurement::new(
        "max |P_post difference|",
        worst(0),
        Bound::Below(1e-10),
    ));
    c.push(Measurement::new(
        "max |P(k) difference|",
        worst(1),
        Bound::Below(1e-10),
    ));
    c.push(Measurement::new(
        "max |Z(theta) difference|",
        worst(2),
        Bound::Below(1e-10),
    ));
    c.push(Measurement::new(
        "runtime [s]",
        started.elapsed().as_secs_f64(),
        Bound::Below(30.0),
    ));
    Ok(c)
}

/// Exact and interpolated `Q(k)` for the small-dispersion setting.
pub fn fig2_reproduction() -> Result<Check> {
    let cfg = BlochConfig::fig2();
    let grid = default_grid();
    let setup = generic_setup(&cfg)?;
    let exact = setup.conditional_distribution(&grid)?;
    let closed = spin_distribution(&cfg, &grid)?;
    let interp = ExpansionContext::with_grid(&setup, grid)?.interpolating_distribution(&grid)?;
    let deviation = exact.max_abs_difference(&interp)? / exact.peak();
    let mut c = Check::new("two-level readout, k_H = 10");
    c.push(Measurement::new(
        "|1 - int Q_exact|",
        (1.0 - exact.normalization()).abs(),
        Bound::Below(1e-8),
    ));
    c.push(Measurement::new(
        "|1 - int Q_closed_form|",
        (1.0 - closed.normalization()).abs(),
        Bound::Below(1e-8),
    ));
    c.push(Measurement::new(
        "|1 - int Q_interp|",
        (1.0 - interp.normalization()).abs(),
        Bound::Below(1e-8),
    ));
    c.push(Measurement::new(
        "max |Q_interp - Q_exact| / peak",
        deviation,
        Bound::Within(0.005, 0.2),
    ));
    Ok(c)
}

/// Coherent oscillations for `k_H = 0.2`.
pub fn fig3_reproduction() -> Result<Check> {
    let cfg = BlochConfig::fig3();
    let grid = default_grid();
    let scan = oscillation_scan(&cfg, &grid)?;
    let approx = spin_oscillation_approximation(&cfg, &grid)?;
    let exact = &scan.distribution;
    let mut c = Check::new("coherent oscillations, k_H = 0.2");
    let period_error = scan
        .measured_period
        .map_or(f64::INFINITY, |p| (p - scan.predicted_period).abs());
    c.push(
        Measurement::new(
            "|measured - pi k_H^2/lambda|",
            period_error,
            Bound::Below(grid.spacing()),
        )
        .with_note(format!("predicted {:.6}", scan.predicted_period)),
    );
    c.push(Measurement::new(
        "max |Q_rotated - Q_exact| / peak",
        exact.max_abs_difference(&approx)? / exact.peak(),
        Bound::Below(0.05),
    ));
    Ok(c)
}

/// Error of the interpolating formula and of the first-order mean at the
/// angles of [`BlochConfig::fig2`].
pub fn expansion_scaling() -> Result<Check> {
    let grid = default_grid();
    let base = BlochConfig::fig2();
    let mut c = Check::new("expansion error scaling, k_H = 10 angles");
    let interp_error = |lambda: f64| -> Result<f64> {
        let setup = generic_setup(&base.with_lambda(lambda)?)?;
        let exact = setup.conditional_distribution(&grid)?;
        let interp =
            ExpansionContext::with_grid(&setup, grid)?.interpolating_distribution(&grid)?;
        exact.max_abs_difference(&interp)
    };
    let (e2, e1) = (interp_error(0.2)?, interp_error(0.1)?);
    c.push(Measurement::new(
        "max|Q_interp - Q_exact| at lambda = 0.2",
        e2,
        Bound::Info,
    ));
    c.push(Measurement::new(
        "max|Q_interp - Q_exact| at lambda = 0.1",
        e1,
        Bound::Info,
    ));
    c.push(Measurement::new(
        "error ratio 0.2 / 0.1",
        e2 / e1,
        Bound::AtLeast(6.0),
    ));
    for lambda in [0.2, 0.1] {
        let setup = generic_setup(&base.with_lambda(lambda)?)?;
        let exact = setup.conditional_distribution(&grid)?.mean();
        let label = format!("|<k>_first_order - <k>_exact| at lambda = {lambda}");
        let m = match ExpansionContext::with_grid(&setup, grid)?.mean_k_first_order() {
            Ok(v) => Measurement::new(
                label,
                (v - exact).abs(),
                Bound::Below(0.5 * lambda * lambda),
            ),
            Err(e @ Error::Nopps { .. }) => {
                Measurement::new(label, f64::INFINITY, Bound::Below(0.5 * lambda * lambda))
                    .with_note(e.to_string())
            }
            Err(e) => return Err(e),
        };
        c.push(m);
    }
    Ok(c)
}

fn pure_pair<R: Rng>(rng: &mut R, d: usize) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok((
        random_density_matrix(rng, d, 1)?,
        random_density_matrix(rng, d, 1)?,
    ))
}

fn qutrit_setup(
    rho_i: DensityMatrix,
    scheme: PostselectionScheme,
    lambda: f64,
) -> Result<MeasurementSetup<GaussianProbe>> {
    let system = SystemSpec::with_eigenvalues(vec![1.0, 0.3, -0.8])?;
    let profile = crate::dynamics::CouplingProfile::constant(1.0, lambda)?;
    let dispersion = Dispersion::from_hamiltonian_scale(1.5, profile.tau0())?;
    MeasurementSetup::new(
        system,
        rho_i,
        scheme,
        GaussianProbe::new(1.0, 1.2, 0.0, 0.0)?,
        profile,
        dispersion,
    )
}

/// Limits that must hold exactly.
pub fn trivial_limits(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = default_grid();
    let mut c = Check::new("trivial limits");

    let rho_i = random_density_matrix(&mut rng, 3, 2)?;
    let rho_f = random_density_matrix(&mut rng, 3, 3)?;
    let uncoupled = qutrit_setup(rho_i.clone(), PostselectionScheme::from_state(&rho_f)?, 0.0)?;
    let q = uncoupled.conditional_distribution(&grid)?;
    let p0_error = grid
        .points()
        .iter()
        .zip(q.values())
        .map(|(&k, v)| (v - (-0.5 * k * k).exp() / (2.0 * PI).sqrt()).abs())
        .fold(0.0, f64::max);
    c.push(Measurement::new(
        "lambda = 0: max |Q - P_0|",
        p0_error,
        Bound::Below(1e-12),
    ));

    let mixed = DensityMatrix::maximally_mixed(3)?;
    let mut off = 0.0f64;
    for (ri, rf) in [(rho_i.clone(), mixed.clone()), (mixed, rho_f)] {
        let s = qutrit_setup(ri, PostselectionScheme::from_state(&rf)?, 0.6)?;
        for k in grid.points().iter().step_by(16) {
            off = off.max(s.joint_amplitude(*k, Terms::Coherent)?.norm());
        }
    }
    c.push(Measurement::new(
        "maximally mixed state: max |coherent part|",
        off,
        Bound::Below(1e-12),
    ));

    let z = [0.0, 0.0, 1.0];
    let aligned = generic_setup(&BlochConfig::new(z, z, z, 0.7, 1.5, 0.8)?)?;
    c.push(Measurement::new(
        "aligned pure spins: |P_post - 1|",
        (aligned.postselection_probability(&grid)? - 1.0).abs(),
        Bound::Below(1e-12),
    ));
    let opposite = generic_setup(&BlochConfig::new(z, [0.0, 0.0, -1.0], z, 0.7, 1.5, 0.8)?)?;
    c.push(Measurement::new(
        "orthogonal commuting spins: P_post",
        opposite.postselection_probability(&grid)?.abs(),
        Bound::Below(1e-12),
    ));

    let system = SystemSpec::with_eigenvalues(vec![1.0, 0.3, -0.8])?;
    let mut pure_gap = 0.0f64;
    for _ in 0..100 {
        let (ri, rf) = pure_pair(&mut rng, 3)?;
        let w = weak_values(&ri, &rf, &system)?;
        let (a_w, b_w) = w.ratios()?;
        pure_gap = pure_gap.max((b_w - a_w.norm_sqr()).abs() / b_w.max(1.0));
    }
    c.push(Measurement::new(
        "pure pairs: max |B_w - |A_w|^2| (relative)",
        pure_gap,
        Bound::Below(1e-12),
    ));
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let (ri_rank, rf_rank) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let ri = random_density_matrix(&mut rng, 3, ri_rank)?;
        let rf = random_density_matrix(&mut rng, 3, rf_rank)?;
        let w = weak_values(&ri, &rf, &system)?;
        let (a_w, b_w) = w.ratios()?;
        worst = worst.min((b_w - a_w.norm_sqr()) / b_w.max(1.0));
    }
    c.push(Measurement::new(
        "mixed pairs: min (B_w - |A_w|^2) (relative)",
        worst,
        Bound::AtLeast(-1e-12),
    ));
    Ok(c)
}

/// Strong and weak decoherence against their limiting distributions.
pub fn decoherence_regimes() -> Result<Check> {
    let grid = default_grid();
    let eps = DecoherenceModel::DEFAULT_SHAPE_FACTOR;
    let mut c = Check::new("decoherence regimes");
    let right_angle = BlochConfig::in_plane(PI / 3.0, PI / 2.0, 0.5, 2.0, 10.0)?;
    let run = |cfg: &BlochConfig, ratio: f64| -> Result<(f64, f64)> {
        let lambda = cfg.lambda();
        let coherent = generic_setup(cfg)?;
        let damped = coherent
            .clone()
            .with_decoherence(DecoherenceModel::from_scale(lambda / ratio, eps)?);
        let q = damped.conditional_distribution(&grid)?;
        let q_diag = coherent.conditional_distribution_terms(&grid, Terms::Diagonal)?;
        let q_free = coherent.conditional_distribution(&grid)?;
        Ok((
            q.max_abs_difference(&q_diag)?,
            q.max_abs_difference(&q_free)?,
        ))
    };
    let (strong, _) = run(&right_angle, 10.0)?;
    let (_, weak) = run(&right_angle, 0.01)?;
    c.push(Measurement::new(
        "lambda/K_D = 10: max |Q - Q_incoherent|",
        strong,
        Bound::Below(1e-3),
    ));
    c.push(Measurement::new(
        "lambda/K_D = 0.01: max |Q - Q_coherent|",
        weak,
        Bound::Below(1e-4),
    ));
    let (_, fig2_weak) = run(&BlochConfig::fig2(), 0.01)?;
    c.push(
        Measurement::new(
            "lambda/K_D = 0.01 at postselection angle pi - 0.1",
            fig2_weak,
            Bound::Info,
        )
        .with_note("1/P_post amplifies the damping there"),
    );

    // gamma = 0 and K_D = infinity must take the same path.
    let setup = generic_setup(&right_angle)?;
    let from_gamma = setup
        .clone()
        .with_decoherence(DecoherenceModel::new(0.0, 1.0, eps, 50.0, 1.0)?);
    let from_scale = setup.with_decoherence(DecoherenceModel::from_scale(f64::INFINITY, eps)?);
    let a = from_gamma.joint_on_grid(&grid, Terms::All)?;
    let b = from_scale.joint_on_grid(&grid, Terms::All)?;
    let identical = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    c.push(Measurement::new(
        "gamma = 0 vs K_D = inf bitwise mismatch",
        if identical { 0.0 } else { 1.0 },
        Bound::Below(0.5),
    ));
    Ok(c)
}

/// Nearly orthogonal pure spin states: the ratio form stays finite and
/// normalized while the naive shift diverges.
pub fn nopps_robustness() -> Result<Check> {
    let grid = default_grid();
    let mut c = Check::new("nearly orthogonal pre/postselection");
    for delta in [1e-2, 1e-3, 1e-4] {
        let cfg = BlochConfig::in_plane(PI / 3.0, PI - delta, 0.1, 2.0, 10.0)?;
        let setup = generic_setup(&cfg)?;
        let ctx = ExpansionContext::with_grid(&setup, grid)?;
        let q = ctx.interpolating_distribution(&grid)?;
        let finite = q.values().iter().all(|v| v.is_finite());
        let norm_err = if finite {
            (1.0 - q.normalization()).abs()
        } else {
            f64::INFINITY
        };
        c.push(Measurement::new(
            format!("delta = {delta:e}: |1 - int Q_interp|"),
            norm_err,
            Bound::Below(1e-6),
        ));
        let a_w = ctx.weak_values().a_w().map_or(f64::INFINITY, |a| a.norm());
        let bound = if delta == 1e-4 {
            Bound::AtLeast(10.0)
        } else {
            Bound::Info
        };
        c.push(Measurement::new(
            format!("delta = {delta:e}: |lambda A_w|"),
            0.1 * a_w,
            bound,
        ));
    }
    Ok(c)
}

/// Integrals of joint probabilities against the postselection probability
/// for every coherence setting of the engine.
pub fn normalization_battery(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = default_grid();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let cfg = random_bloch_config(&mut rng)?;
        if spin_p_post(&cfg) < 1e-6 {
            continue;
        }
        let q = spin_distribution(&cfg, &grid)?;
        worst = worst.max((1.0 - q.normalization()).abs());
        let g = generic_setup(&cfg)?.conditional_distribution(&grid)?;
        worst = worst.max((1.0 - g.normalization()).abs());
    }
    let mut c = Check::new("normalization battery");
    c.push(Measurement::new(
        "max |1 - int Q|",
        worst,
        Bound::Below(1e-8),
    ));
    Ok(c)
}

/// Every check the `verify` command runs.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        propagator_lemma()?,
        spin_cross_check(100, seed, generic_setup)?,
        fig2_reproduction()?,
        fig3_reproduction()?,
        expansion_scaling()?,
        trivial_limits(seed)?,
        decoherence_regimes()?,
        nopps_robustness()?,
        normalization_battery(seed)?,
    ])
}
