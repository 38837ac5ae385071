//! Probe states, their Wigner functions and phase-space averages.

mod dispersion;
mod gaussian;
mod grid_probe;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::KGrid;

pub use dispersion::Dispersion;
pub use gaussian::GaussianProbe;
pub use grid_probe::GridProbe;

/// Below this `P_0(k)` conditional averages are refused.
pub const CONDITIONING_TOLERANCE: f64 = 1e-12;

/// A probe state in the k representation.
///
/// Conventions: `Pi(x,k) = (1/2pi) int dq rho(k + q/2, k - q/2) e^{ixq}`, so
/// that `int dx e^{i chi x} Pi(x,k) = rho(k - chi/2, k + chi/2)`.
pub trait Probe: Send + Sync {
    fn rho(&self, k1: f64, k2: f64) -> Complex64;

    fn p0(&self, k: f64) -> f64 {
        self.rho(k, k).re
    }

    /// `[P_0, P_0', P_0'']` at `k`.
    fn p0_derivatives(&self, k: f64) -> [f64; 3];

    /// `int x^n e^{i chi x} Pi(x,k) dx` for `n = 0, 1, 2`.
    fn x_moments(&self, k: f64, chi: f64) -> [Complex64; 3];

    fn wigner(&self, x: f64, k: f64) -> f64;

    /// Tabulated Wigner function used for generic phase-space quadrature.
    fn wigner_grid(&self) -> &WignerGrid;

    /// `Pi(x_j, k)` on the x-points of [`Probe::wigner_grid`].
    fn wigner_slice(&self, k: f64) -> Vec<f64> {
        let w = self.wigner_grid();
        w.x_points().iter().map(|&x| self.wigner(x, k)).collect()
    }

    fn default_grid(&self) -> KGrid;

    fn mean_k(&self) -> f64;
    fn mean_x(&self) -> f64;
    /// Standard deviation of k, `Delta_k`.
    fn spread_k(&self) -> f64;
    /// Standard deviation of x, `Delta_x = 1/kappa_k`.
    fn spread_x(&self) -> f64;

    fn coherence_scale(&self) -> f64 {
        1.0 / self.spread_x()
    }

    /// Raw moment `avg(x^p k^q)`.
    fn moment(&self, p: u32, q: u32) -> f64 {
        self.wigner_grid()
            .integrate(|x, k| x.powi(p as i32) * k.powi(q as i32))
    }
}

/// `Pi(x_j, k_i)` on a product grid; x is uniform with spacing `dx`.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    k: KGrid,
    x: Vec<f64>,
    dx: f64,
    values: Vec<f64>,
}

impl WignerGrid {
    /// `values` is row-major with one row per k-point.
    pub fn new(k: KGrid, x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidParameter(
                "Wigner grid needs at least two x-points".into(),
            ));
        }
        if values.len() != k.len() * x.len() {
            return Err(Error::DimensionMismatch {
                expected: k.len() * x.len(),
                got: values.len(),
            });
        }
        let dx = x[1] - x[0];
        Ok(Self { k, x, dx, values })
    }

    pub fn from_fn<F>(k: KGrid, x: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut values = Vec::with_capacity(k.len() * x.len());
        for kk in k.points() {
            values.extend(x.iter().map(|&xx| f(xx, kk)));
        }
        Self::new(k, x, values)
    }

    pub fn k_grid(&self) -> &KGrid {
        &self.k
    }

    pub fn x_points(&self) -> &[f64] {
        &self.x
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nx = self.x.len();
        &self.values[i * nx..(i + 1) * nx]
    }

    /// Linear interpolation in k; zero outside the k-range.
    pub fn slice_at(&self, k: f64) -> Vec<f64> {
        match self.k.locate(k) {
            None => vec![0.0; self.x.len()],
            Some((i, t)) => self
                .row(i)
                .iter()
                .zip(self.row(i + 1))
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        }
    }

    /// `int int f Pi dx dk`.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(f64, f64) -> f64,
    {
        (0..self.k.len())
            .map(|i| {
                let k = self.k.point(i);
                let row: f64 = self
                    .row(i)
                    .iter()
                    .zip(&self.x)
                    .map(|(w, &x)| f(x, k) * w)
                    .sum();
                self.k.weight(i) * row * self.dx
            })
            .sum()
    }

    /// `int Pi dx` at each k-point.
    pub fn marginal_k(&self) -> Vec<f64> {
        (0..self.k.len())
            .map(|i| self.row(i).iter().sum::<f64>() * self.dx)
            .collect()
    }

    /// `int Pi dk` at each x-point.
    pub fn marginal_x(&self) -> Vec<f64> {
        let nx = self.x.len();
        let mut out = vec![0.0; nx];
        for i in 0..self.k.len() {
            let w = self.k.weight(i);
            for (o, v) in out.iter_mut().zip(self.row(i)) {
                *o += w * v;
            }
        }
        out
    }
}

/// A real function on phase space.
///
/// Polynomials get exact moment treatment; any closure `Fn(x, k) -> f64`
/// falls back to quadrature on the Wigner grid.
pub trait PhaseSpaceFn {
    fn eval(&self, x: f64, k: f64) -> f64;

    fn as_polynomial(&self) -> Option<&PhasePolynomial> {
        None
    }
}

impl<F: Fn(f64, f64) -> f64> PhaseSpaceFn for F {
    fn eval(&self, x: f64, k: f64) -> f64 {
        self(x, k)
    }
}

/// `sum_j c_j x^{p_j} k^{q_j}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhasePolynomial {
    terms: Vec<(f64, u32, u32)>,
}

impl PhasePolynomial {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![(c, 0, 0)],
        }
    }

    pub fn x() -> Self {
        Self {
            terms: vec![(1.0, 1, 0)],
        }
    }

    pub fn k() -> Self {
        Self {
            terms: vec![(1.0, 0, 1)],
        }
    }

    pub fn monomial(c: f64, p: u32, q: u32) -> Self {
        Self {
            terms: vec![(c, p, q)],
        }
    }

    /// `x_t = x + omega'(k) t` for quadratic dispersion with the given mass.
    pub fn free_position(mass: f64, t: f64) -> Self {
        Self {
            terms: vec![(1.0, 1, 0), (t / mass, 0, 1)],
        }
    }

    pub fn terms(&self) -> &[(f64, u32, u32)] {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self { terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(c1, p1, q1) in &self.terms {
            for &(c2, p2, q2) in &other.terms {
                terms.push((c1 * c2, p1 + p2, q1 + q2));
            }
        }
        Self { terms }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|&(a, p, q)| (a * c, p, q)).collect(),
        }
    }
}

impl PhaseSpaceFn for PhasePolynomial {
    fn eval(&self, x: f64, k: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, p, q)| c * x.powi(p as i32) * k.powi(q as i32))
            .sum()
    }

    fn as_polynomial(&self) -> Option<&PhasePolynomial> {
        Some(self)
    }
}

/// `avg(f) = int int f Pi dx dk`.
pub fn phase_space_average<P: Probe + ?Sized>(f: &dyn PhaseSpaceFn, probe: &P) -> Result<f64> {
    let v = match f.as_polynomial() {
        Some(poly) => poly
            .terms()
            .iter()
            .map(|&(c, p, q)| c * probe.moment(p, q))
            .sum(),
        None => probe.wigner_grid().integrate(|x, k| f.eval(x, k)),
    };
    if !v.is_finite() {
        return Err(Error::NonFinite("phase-space average".into()));
    }
    Ok(v)
}

/// `avg(f)_{|k} = int f Pi(x,k) dx / P_0(k)`.
pub fn conditional_average<P: Probe + ?Sized>(
    f: &dyn PhaseSpaceFn,
    probe: &P,
    k: f64,
) -> Result<f64> {
    let p0 = probe.p0(k);
    if !(p0 > CONDITIONING_TOLERANCE) {
        return Err(Error::ConditioningOnNull { k, p0 });
    }
    let v = match f.as_polynomial() {
        Some(poly) if poly.terms().iter().all(|&(_, p, _)| p <= 2) => {
            let m = probe.x_moments(k, 0.0);
            poly.terms()
                .iter()
                .map(|&(c, p, q)| c * k.powi(q as i32) * m[p as usize].re)
                .sum::<f64>()
                / p0
        }
        _ => {
            let w = probe.wigner_grid();
            let slice = probe.wigner_slice(k);
            let s: f64 = slice
                .iter()
                .zip(w.x_points())
                .map(|(v, &x)| f.eval(x, k) * v)
                .sum();
            s * w.dx() / p0
        }
    };
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("conditional average at k = {k}")));
    }
    Ok(v)
}

/// `C(f,g) = avg(fg) - avg(f) avg(g)`.
pub fn covariance<P: Probe + ?Sized>(
    f: &dyn PhaseSpaceFn,
    g: &dyn PhaseSpaceFn,
    probe: &P,
) -> Result<f64> {
    let fg = match (f.as_polynomial(), g.as_polynomial()) {
        (Some(a), Some(b)) => phase_space_average(&a.mul(b), probe)?,
        _ => {
            let v = probe
                .wigner_grid()
                .integrate(|x, k| f.eval(x, k) * g.eval(x, k));
            if !v.is_finite() {
                return Err(Error::NonFinite("covariance".into()));
            }
            v
        }
    };
    Ok(fg - phase_space_average(f, probe)? * phase_space_average(g, probe)?)
}

/// Raw moment `E[y^n]` of a normal variable with mean `mu` and variance `var`.
pub(crate) fn normal_raw_moment(n: u32, mu: f64, var: f64) -> f64 {
    // E[y^n] = sum_{j even} C(n,j) mu^{n-j} var^{j/2} (j-1)!!
    let mut total = 0.0;
    let mut binom = 1.0;
    let mut dfact = 1.0;
    for j in 0..=n {
        if j > 0 {
            binom *= (n - j + 1) as f64 / j as f64;
        }
        if j % 2 == 0 {
            if j >= 2 {
                dfact *= (j - 1) as f64;
            }
            total += binom * mu.powi((n - j) as i32) * var.powi((j / 2) as i32) * dfact;
        }
    }
    total
}
