//! Turns a resolved configuration into output tables.

use num_complex::Complex64;
use rayon::prelude::*;

use ndweak_core::exact::ReadoutDistribution;
use ndweak_core::expansion::{oscillation_distribution, ExpansionContext};
use ndweak_core::spinhalf::{oscillation_scan, spin_characteristic_function, spin_distribution};

use crate::config::{Quantity, Resolved, RunConfig, SweepParameter};
use crate::error::CliError;

/// Largest accepted `|1 - int Q dk|` before a run is declared inconsistent.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Step for the finite-difference mean of the write-in variable.
const CHI_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    #[cfg(test)]
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// Human-readable remarks for stdout.
    pub notes: Vec<String>,
}

fn check_normalization(label: &str, q: &ReadoutDistribution) -> Result<(), CliError> {
    let drift = (1.0 - q.normalization()).abs();
    if drift.is_nan() || drift > NORMALIZATION_TOLERANCE {
        return Err(CliError::Numerical(format!(
            "{label} integrates to {} (drift {drift:e} > {NORMALIZATION_TOLERANCE:e}); widen the grid",
            q.normalization()
        )));
    }
    Ok(())
}

fn exact_distribution(r: &Resolved) -> Result<ReadoutDistribution, CliError> {
    let q = match &r.bloch {
        Some(b) => spin_distribution(b, &r.grid)?,
        None => r.setup.conditional_distribution(&r.grid)?,
    };
    check_normalization("Q_exact", &q)?;
    Ok(q)
}

fn samples(max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| max * j as f64 / (n - 1) as f64).collect()
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let r = cfg.resolve()?;
    let grid = r.grid;
    let exact = exact_distribution(&r)?;
    let ctx = ExpansionContext::with_grid(&r.setup, grid)?;
    let mut out = RunOutput::default();

    let needs_interp = cfg.wants(Quantity::QInterp) || cfg.wants(Quantity::Moments);
    let interp = if needs_interp {
        let q = ctx.interpolating_distribution(&grid)?;
        check_normalization("Q_interp", &q)?;
        Some(q)
    } else {
        None
    };
    let rotated = if cfg.wants(Quantity::QRotated) {
        let q = oscillation_distribution(&r.setup, &grid)?;
        check_normalization("Q_rotated", &q)?;
        Some(q)
    } else {
        None
    };

    let mut columns = vec!["k"];
    let mut series: Vec<&[f64]> = Vec::new();
    if cfg.wants(Quantity::QExact) {
        columns.push("Q_exact");
        series.push(exact.values());
    }
    if cfg.wants(Quantity::QInterp) {
        columns.push("Q_interp");
        series.push(interp.as_ref().expect("computed").values());
    }
    if let Some(q) = &rotated {
        columns.push("Q_rotated");
        series.push(q.values());
    }
    if !series.is_empty() {
        let mut t = Table::new("readout", &columns);
        for (i, k) in grid.points().into_iter().enumerate() {
            let mut row = vec![Cell::Num(k)];
            row.extend(series.iter().map(|s| Cell::Num(s[i])));
            t.rows.push(row);
        }
        out.tables.push(t);
    }

    if cfg.wants(Quantity::Z) {
        let mut t = Table::new(
            "characteristic_k",
            &[
                "theta",
                "Z_exact_re",
                "Z_exact_im",
                "Z_interp_re",
                "Z_interp_im",
            ],
        );
        let thetas = samples(cfg.outputs.theta_max, cfg.outputs.n_theta);
        let rows: Vec<Vec<Cell>> = thetas
            .par_iter()
            .map(|&theta| {
                let z = match &r.bloch {
                    Some(b) => spin_characteristic_function(b, theta)?,
                    None => exact.characteristic_function(theta),
                };
                let zi = ctx.characteristic_function_k(theta)?;
                Ok(vec![
                    theta.into(),
                    z.re.into(),
                    z.im.into(),
                    zi.re.into(),
                    zi.im.into(),
                ])
            })
            .collect::<Result<_, CliError>>()?;
        t.rows = rows;
        out.tables.push(t);
    }

    if cfg.wants(Quantity::ZX) {
        let mut t = Table::new(
            "characteristic_x",
            &[
                "chi",
                "Z_x_exact_re",
                "Z_x_exact_im",
                "Z_x_interp_re",
                "Z_x_interp_im",
            ],
        );
        let chis = samples(cfg.outputs.chi_max, cfg.outputs.n_chi);
        let rows: Vec<Vec<Cell>> = chis
            .par_iter()
            .map(|&chi| {
                let z = r.setup.characteristic_function_x(chi, &grid)?;
                let zi = ctx.characteristic_function_x(chi)?;
                Ok(vec![
                    chi.into(),
                    z.re.into(),
                    z.im.into(),
                    zi.re.into(),
                    zi.im.into(),
                ])
            })
            .collect::<Result<_, CliError>>()?;
        t.rows = rows;
        out.tables.push(t);
    }

    let mut summary = Table::new("summary", &["quantity", "value"]);
    let mut put = |name: &str, v: f64| summary.rows.push(vec![name.into(), v.into()]);
    if cfg.wants(Quantity::PPost) {
        put("P_post", exact.p_post());
        put("P_post_interp", ctx.p_post_expanded());
    }
    if cfg.wants(Quantity::Moments) {
        let interp = interp.as_ref().expect("computed");
        put("mean_k_exact", exact.mean());
        put("var_k_exact", exact.variance());
        put("mean_k_interp", interp.mean());
        put("var_k_interp", interp.variance());
        let dz = (r.setup.characteristic_function_x(CHI_STEP, &grid)?
            - r.setup.characteristic_function_x(-CHI_STEP, &grid)?)
            / (2.0 * CHI_STEP);
        put("mean_x_exact", (dz / Complex64::i()).re);
        match (ctx.mean_k_first_order(), ctx.mean_x_first_order()) {
            (Ok(k), Ok(x)) => {
                put("mean_k_first_order", k);
                put("mean_x_first_order", x);
            }
            (Err(e), _) | (_, Err(e)) => out.notes.push(format!("first-order means skipped: {e}")),
        }
        let w = ctx.weak_values();
        put("alpha_00", w.alpha00);
        put("alpha_01_re", w.alpha01.re);
        put("alpha_01_im", w.alpha01.im);
        put("alpha_11", w.alpha11);
        if let (Some(a), Some(b)) = (w.a_w(), w.b_w()) {
            put("A_w_re", a.re);
            put("A_w_im", a.im);
            put("B_w", b);
        }
    }
    if let Some(b) = &r.bloch {
        if b.oscillates() {
            let scan = oscillation_scan(b, &grid)?;
            put("k_osc_predicted", scan.predicted_period);
            match scan.measured_period {
                Some(p) => {
                    put("k_osc_measured", p);
                    out.notes.push(format!(
                        "oscillation period: measured {p:.6}, predicted {:.6}",
                        scan.predicted_period
                    ));
                }
                None => out
                    .notes
                    .push("oscillation regime, but fewer than two maxima resolved".into()),
            }
        }
    }
    if !summary.rows.is_empty() {
        out.tables.push(summary);
    }
    Ok(out)
}

/// One row per value: `P_post`, exact and interpolated means, and the largest
/// pointwise gap between the two distributions.
pub fn sweep(
    cfg: &RunConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Table, CliError> {
    if values.is_empty() {
        return Err(CliError::Parse("sweep needs at least one value".into()));
    }
    let rows: Vec<Vec<Cell>> = values
        .par_iter()
        .map(|&v| {
            let c = cfg.with_parameter(parameter, v)?;
            let r = c.resolve()?;
            let exact = exact_distribution(&r)?;
            let interp = ExpansionContext::with_grid(&r.setup, r.grid)?
                .interpolating_distribution(&r.grid)?;
            check_normalization("Q_interp", &interp)?;
            Ok(vec![
                parameter.name().into(),
                v.into(),
                exact.p_post().into(),
                exact.mean().into(),
                interp.mean().into(),
                exact.max_abs_difference(&interp)?.into(),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = Table::new(
        "sweep",
        &[
            "parameter",
            "value",
            "P_post",
            "mean_k_exact",
            "mean_k_interp",
            "max_abs_Q_diff",
        ],
    );
    t.rows = rows;
    Ok(t)
}
