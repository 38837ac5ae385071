//! Run configuration: TOML in, fully resolved values out.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use ndweak_core::dynamics::{CouplingProfile, ProfileShape};
use ndweak_core::exact::{DecoherenceModel, MeasurementSetup};
use ndweak_core::probe::{Dispersion, GaussianProbe};
use ndweak_core::spinhalf::{generic_setup, BlochConfig};
use ndweak_core::system::{DensityMatrix, PostselectionScheme, SystemSpec};
use ndweak_core::KGrid;

use crate::error::CliError;

/// Smallest accepted number of grid points.
pub const MIN_POINTS: usize = 256;
/// The grid must reach this many spreads on each side of the mean.
pub const MIN_HALF_COVERAGE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SpinHalf,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "Q_exact")]
    QExact,
    #[serde(rename = "Q_interp")]
    QInterp,
    #[serde(rename = "Q_rotated")]
    QRotated,
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "Z_x")]
    ZX,
    #[serde(rename = "moments")]
    Moments,
    #[serde(rename = "P_post")]
    PPost,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<SpinSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(default)]
    pub probe: ProbeSection,
    pub coupling: CouplingSection,
    #[serde(default)]
    pub dispersion: DispersionSection,
    #[serde(default)]
    pub decoherence: DecoherenceSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

/// Bloch vectors, or in-plane angles (`pre_angle` from the axis,
/// `post_angle` from the preselection, both in the x-z plane).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<[f64; 3]>,
    #[serde(default = "z_axis")]
    pub axis: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_angle: Option<f64>,
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexMatrix {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexVector {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

/// Generic system in the eigenbasis of the measured observable.
/// Postselect either on a pure state (`post_state`, `post_weight`) or on a
/// mixed state `rho_f` with unit total weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub eigenvalues: Vec<f64>,
    pub rho_i: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_f: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_state: Option<ComplexVector>,
    #[serde(default = "one")]
    pub post_weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default = "one")]
    pub spread: f64,
    #[serde(default = "two")]
    pub coherence: f64,
    #[serde(default)]
    pub k_mean: f64,
    #[serde(default)]
    pub x_mean: f64,
}

fn two() -> f64 {
    2.0
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            spread: 1.0,
            coherence: 2.0,
            k_mean: 0.0,
            x_mean: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfilePreset {
    #[default]
    Constant,
    Triangular,
    RaisedCosine,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub lambda: f64,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default)]
    pub profile: ProfilePreset,
}

/// At most one of `k_h` and `mass`; neither means no free evolution.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

/// Either `k_d` directly or `gamma` with `thermal_energy`; neither means
/// no decoherence.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_energy: Option<f64>,
    #[serde(default = "default_shape_factor")]
    pub shape_factor: f64,
}

fn default_shape_factor() -> f64 {
    DecoherenceModel::DEFAULT_SHAPE_FACTOR
}

impl Default for DecoherenceSection {
    fn default() -> Self {
        Self {
            k_d: None,
            gamma: None,
            thermal_energy: None,
            shape_factor: default_shape_factor(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub n_points: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    #[serde(default = "default_samples")]
    pub n_theta: usize,
    #[serde(default = "default_theta_max")]
    pub chi_max: f64,
    #[serde(default = "default_samples")]
    pub n_chi: usize,
    #[serde(default = "yes")]
    pub sidecar: bool,
}

fn default_quantities() -> Vec<Quantity> {
    vec![
        Quantity::QExact,
        Quantity::QInterp,
        Quantity::Moments,
        Quantity::PPost,
    ]
}

fn default_theta_max() -> f64 {
    4.0
}

fn default_samples() -> usize {
    81
}

fn yes() -> bool {
    true
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            quantities: default_quantities(),
            theta_max: default_theta_max(),
            n_theta: default_samples(),
            chi_max: default_theta_max(),
            n_chi: default_samples(),
            sidecar: true,
        }
    }
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Lambda,
    Kappa,
    KH,
    KD,
    /// Postselection angle from the preselection (spin-half, in-plane).
    Angle,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lambda => "lambda",
            Self::Kappa => "kappa_k",
            Self::KH => "k_H",
            Self::KD => "K_D",
            Self::Angle => "angle",
        }
    }
}

/// A ready-to-evaluate setup.
pub struct Resolved {
    pub setup: MeasurementSetup<GaussianProbe>,
    pub bloch: Option<BlochConfig>,
    pub grid: KGrid,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.check_structure()?;
        cfg.fill_defaults();
        Ok(cfg)
    }

    /// Structural checks that do not involve physics.
    fn check_structure(&self) -> Result<(), CliError> {
        match self.scenario {
            Scenario::SpinHalf => {
                let spin = self.spin.as_ref().ok_or_else(|| {
                    CliError::Parse("scenario \"spin-half\" needs a [spin] section".into())
                })?;
                if self.system.is_some() {
                    return Err(CliError::Parse(
                        "[system] is only valid with scenario \"generic\"".into(),
                    ));
                }
                let vectors = spin.pre.is_some() || spin.post.is_some();
                let angles = spin.pre_angle.is_some() || spin.post_angle.is_some();
                if vectors == angles || (vectors && (spin.pre.is_none() || spin.post.is_none())) {
                    return Err(CliError::Parse(
                        "[spin] needs either both `pre` and `post` vectors or both `pre_angle` and `post_angle`".into(),
                    ));
                }
                if angles && (spin.pre_angle.is_none() || spin.post_angle.is_none()) {
                    return Err(CliError::Parse(
                        "[spin] needs both `pre_angle` and `post_angle`".into(),
                    ));
                }
            }
            Scenario::Generic => {
                let sys = self.system.as_ref().ok_or_else(|| {
                    CliError::Parse("scenario \"generic\" needs a [system] section".into())
                })?;
                if self.spin.is_some() {
                    return Err(CliError::Parse(
                        "[spin] is only valid with scenario \"spin-half\"".into(),
                    ));
                }
                if sys.rho_f.is_some() == sys.post_state.is_some() {
                    return Err(CliError::Parse(
                        "[system] needs exactly one of `rho_f` and `post_state`".into(),
                    ));
                }
            }
        }
        if self.dispersion.k_h.is_some() && self.dispersion.mass.is_some() {
            return Err(CliError::Parse(
                "[dispersion] takes `k_h` or `mass`, not both".into(),
            ));
        }
        let d = &self.decoherence;
        if d.k_d.is_some() && (d.gamma.is_some() || d.thermal_energy.is_some()) {
            return Err(CliError::Parse(
                "[decoherence] takes `k_d` or `gamma` + `thermal_energy`, not both".into(),
            ));
        }
        if d.gamma.is_some() != d.thermal_energy.is_some() {
            return Err(CliError::Parse(
                "[decoherence] `gamma` and `thermal_energy` go together".into(),
            ));
        }
        if self.outputs.quantities.is_empty() {
            return Err(CliError::Parse(
                "[outputs] quantities must not be empty".into(),
            ));
        }
        if self.outputs.n_theta < 2 || self.outputs.n_chi < 2 {
            return Err(CliError::Parse(
                "[outputs] n_theta and n_chi must be at least 2".into(),
            ));
        }
        Ok(())
    }

    fn fill_defaults(&mut self) {
        let p = &self.probe;
        let half = ndweak_core::grid::DEFAULT_HALF_WIDTH * p.spread;
        self.grid.k_min.get_or_insert(p.k_mean - half);
        self.grid.k_max.get_or_insert(p.k_mean + half);
        self.grid
            .n_points
            .get_or_insert(ndweak_core::grid::DEFAULT_POINTS);
        let mut seen = Vec::new();
        self.outputs.quantities.retain(|q| {
            let fresh = !seen.contains(q);
            seen.push(*q);
            fresh
        });
    }

    pub fn wants(&self, q: Quantity) -> bool {
        self.outputs.quantities.contains(&q)
    }

    /// Copy with one parameter replaced.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        match parameter {
            SweepParameter::Lambda => c.coupling.lambda = value,
            SweepParameter::Kappa => c.probe.coherence = value,
            SweepParameter::KH => {
                c.dispersion.k_h = Some(value);
                c.dispersion.mass = None;
            }
            SweepParameter::KD => {
                c.decoherence.k_d = Some(value);
                c.decoherence.gamma = None;
                c.decoherence.thermal_energy = None;
            }
            SweepParameter::Angle => {
                match c.spin.as_mut() {
                    Some(s) if s.post_angle.is_some() => s.post_angle = Some(value),
                    _ => return Err(CliError::Parse(
                        "angle sweeps need scenario \"spin-half\" with `pre_angle`/`post_angle`"
                            .into(),
                    )),
                }
            }
        }
        Ok(c)
    }

    pub fn grid(&self) -> Result<KGrid, CliError> {
        let (lo, hi, n) = (
            self.grid.k_min.expect("filled"),
            self.grid.k_max.expect("filled"),
            self.grid.n_points.expect("filled"),
        );
        if n < MIN_POINTS {
            return Err(CliError::Range(format!(
                "grid needs at least {MIN_POINTS} points (got {n})"
            )));
        }
        let p = &self.probe;
        let reach = MIN_HALF_COVERAGE * p.spread;
        if lo > p.k_mean - reach || hi < p.k_mean + reach {
            return Err(CliError::Range(format!(
                "grid [{lo}, {hi}] must cover k_mean +- {MIN_HALF_COVERAGE} Delta_k = [{}, {}]",
                p.k_mean - reach,
                p.k_mean + reach
            )));
        }
        Ok(KGrid::new(lo, hi, n)?)
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let grid = self.grid()?;
        match self.scenario {
            Scenario::SpinHalf => {
                let bloch = self.bloch()?;
                Ok(Resolved {
                    setup: generic_setup(&bloch)?,
                    bloch: Some(bloch),
                    grid,
                })
            }
            Scenario::Generic => Ok(Resolved {
                setup: self.generic()?,
                bloch: None,
                grid,
            }),
        }
    }

    fn bloch(&self) -> Result<BlochConfig, CliError> {
        let p = &self.probe;
        let c = &self.coupling;
        if p.spread != 1.0 || p.k_mean != 0.0 || p.x_mean != 0.0 {
            return Err(CliError::Range(
                "spin-half runs are in units of Delta_k with a centered probe: spread = 1, k_mean = x_mean = 0".into(),
            ));
        }
        if c.tau != 1.0 || c.profile != ProfilePreset::Constant {
            return Err(CliError::Range(
                "spin-half runs use constant coupling with tau = 1".into(),
            ));
        }
        if self.dispersion.mass.is_some() {
            return Err(CliError::Range(
                "spin-half runs set the dispersion through k_h".into(),
            ));
        }
        let spin = self.spin.as_ref().expect("checked");
        let k_h = self.dispersion.k_h.unwrap_or(f64::INFINITY);
        let cfg = match (spin.pre, spin.post, spin.pre_angle, spin.post_angle) {
            (Some(m), Some(n), _, _) => {
                BlochConfig::new(m, n, spin.axis, c.lambda, p.coherence, k_h)?
            }
            (_, _, Some(pre), Some(post)) => {
                if spin.axis != z_axis() {
                    return Err(CliError::Range(
                        "angle form is defined for axis = [0, 0, 1]".into(),
                    ));
                }
                BlochConfig::in_plane(pre, post, c.lambda, p.coherence, k_h)?
            }
            _ => unreachable!("checked"),
        };
        let d = &self.decoherence;
        let k_d = match (d.k_d, d.gamma, d.thermal_energy) {
            (Some(k), _, _) => Some(k),
            (None, Some(g), Some(t)) => {
                let model = DecoherenceModel::new(g, t, d.shape_factor, k_h * k_h * 0.5, 1.0)?;
                (!model.is_coherent()).then(|| model.scale())
            }
            _ => None,
        };
        Ok(match k_d {
            Some(k) if k.is_finite() => cfg.with_decoherence(k, d.shape_factor)?,
            Some(k) if k > 0.0 => cfg,
            Some(k) => return Err(CliError::Range(format!("K_D must be positive (got {k})"))),
            None => cfg,
        })
    }

    fn generic(&self) -> Result<MeasurementSetup<GaussianProbe>, CliError> {
        let sys = self.system.as_ref().expect("checked");
        let system = SystemSpec::with_eigenvalues(sys.eigenvalues.clone())?;
        let d = system.dim();
        let rho_i = DensityMatrix::new(matrix(&sys.rho_i, d, "rho_i")?)?;
        let scheme = match (&sys.rho_f, &sys.post_state) {
            (Some(m), None) => {
                if sys.post_weight != 1.0 {
                    return Err(CliError::Parse(
                        "`post_weight` only applies to `post_state`".into(),
                    ));
                }
                PostselectionScheme::from_state(&DensityMatrix::new(matrix(m, d, "rho_f")?)?)?
            }
            (None, Some(v)) => {
                PostselectionScheme::pure(&vector(v, d, "post_state")?, sys.post_weight)?
            }
            _ => unreachable!("checked"),
        };
        let p = &self.probe;
        let probe = GaussianProbe::new(p.spread, p.coherence, p.k_mean, p.x_mean)?;
        let c = &self.coupling;
        let shape = match c.profile {
            ProfilePreset::Constant => ProfileShape::Constant,
            ProfilePreset::Triangular => ProfileShape::Triangular,
            ProfilePreset::RaisedCosine => ProfileShape::RaisedCosine,
        };
        let profile = CouplingProfile::new(c.tau, shape, c.lambda)?;
        let dispersion = match (self.dispersion.k_h, self.dispersion.mass) {
            (Some(k_h), _) => Dispersion::from_hamiltonian_scale(k_h, profile.tau0())?,
            (None, Some(m)) => Dispersion::quadratic(m)?,
            (None, None) => Dispersion::Zero,
        };
        let mass = match dispersion {
            Dispersion::Quadratic { mass } => Some(mass),
            _ => None,
        };
        let setup = MeasurementSetup::new(system, rho_i, scheme, probe, profile, dispersion)?;
        let dec = &self.decoherence;
        let model = match (dec.k_d, dec.gamma, dec.thermal_energy) {
            (Some(k), _, _) => Some(DecoherenceModel::from_scale(k, dec.shape_factor)?),
            (None, Some(g), Some(t)) => {
                let m = mass.ok_or_else(|| {
                    CliError::Range(
                        "gamma/thermal_energy decoherence needs a finite probe mass".into(),
                    )
                })?;
                Some(DecoherenceModel::new(g, t, dec.shape_factor, m, c.tau)?)
            }
            _ => None,
        };
        Ok(match model {
            Some(m) => setup.with_decoherence(m),
            None => setup,
        })
    }
}

fn matrix(m: &ComplexMatrix, d: usize, name: &str) -> Result<DMatrix<Complex64>, CliError> {
    let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
    if !shape_ok(&m.re) || m.im.as_ref().is_some_and(|im| !shape_ok(im)) {
        return Err(CliError::Parse(format!("`{name}` must be {d} x {d}")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| {
        Complex64::new(m.re[i][j], m.im.as_ref().map_or(0.0, |im| im[i][j]))
    }))
}

fn vector(v: &ComplexVector, d: usize, name: &str) -> Result<Vec<Complex64>, CliError> {
    if v.re.len() != d || v.im.as_ref().is_some_and(|im| im.len() != d) {
        return Err(CliError::Parse(format!("`{name}` must have {d} entries")));
    }
    Ok((0..d)
        .map(|i| Complex64::new(v.re[i], v.im.as_ref().map_or(0.0, |im| im[i])))
        .collect())
}
