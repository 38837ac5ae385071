//! Finite-dimensional system algebra: states, pre/postselection and the
//! normal weak values `alpha_{m,n} = Tr{A^m rho_f A^n rho_i}`.
//!
//! Everything lives in the joint eigenbasis of the measured observable `A`
//! and the system Hamiltonian. Inputs prepared in another basis must be
//! rotated by the caller (see [`DensityMatrix::rotated`]).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on Hermiticity and trace of density matrices.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Smallest eigenvalue accepted as "positive".
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// `alpha_00` at or below this value is treated as exact NOPPS.
pub const NOPPS_ALPHA_FLOOR: f64 = 1e-14;

/// Eigenvalues of `A` and system frequencies, one per basis state.
///
/// Repeated eigenvalues are allowed: sums always run over basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    eigenvalues: Vec<f64>,
    frequencies: Vec<f64>,
}

impl SystemSpec {
    pub fn new(eigenvalues: Vec<f64>, frequencies: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidParameter(
                "system dimension must be positive".into(),
            ));
        }
        if frequencies.len() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                got: frequencies.len(),
            });
        }
        if eigenvalues
            .iter()
            .chain(&frequencies)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("system eigenvalues/frequencies".into()));
        }
        Ok(Self {
            eigenvalues,
            frequencies,
        })
    }

    /// A system with zero internal frequencies.
    pub fn with_eigenvalues(eigenvalues: Vec<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        Self::new(eigenvalues, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// `a_M`, the largest distance between two eigenvalues.
    pub fn eigenvalue_spread(&self) -> f64 {
        let max = self
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Largest `|a|`; bounds the probe shift `lambda a`.
    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    /// Every eigenvalue is 0 or +-1, so `A^3 = A`. These observables are the
    /// known exceptions to the generic NOPPS asymptotics; they are flagged
    /// here, not classified.
    pub fn is_idempotent_like(&self) -> bool {
        self.eigenvalues
            .iter()
            .all(|a| a.abs() < 1e-12 || (a.abs() - 1.0).abs() < 1e-12)
    }
}

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::new_unnormalized(m)?;
        let tr = rho.trace();
        if (tr - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        Ok(rho)
    }

    /// Hermitian and positive semidefinite, any trace.
    fn new_unnormalized(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "matrix is not square: {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density matrix entry".into()));
        }
        let d = m.nrows();
        for i in 0..d {
            for j in i..d {
                let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
                if dev > STATE_TOLERANCE {
                    return Err(Error::InvalidState(format!(
                        "not Hermitian at ({i},{j}): deviation {dev:e}"
                    )));
                }
            }
        }
        let min_eig = m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -POSITIVITY_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { m })
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if psi.is_empty() || !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::InvalidState(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let d = psi.len();
        let m = DMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / norm2);
        Ok(Self { m })
    }

    /// `1/D`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self {
            m: DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0),
        })
    }

    /// Diagonal state with the given populations (renormalized).
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let total: f64 = populations.iter().sum();
        if populations.iter().any(|p| *p < 0.0 || !p.is_finite()) || !(total > 0.0) {
            return Err(Error::InvalidState(
                "populations must be nonnegative with positive sum".into(),
            ));
        }
        let d = populations.len();
        Ok(Self {
            m: DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(populations[i] / total, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// `<a|rho|b>`.
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.m[(a, b)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// `U rho U^dagger`. `u` must be unitary.
    pub fn rotated(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.nrows(),
            });
        }
        let m = u * &self.m * u.adjoint();
        // Re-symmetrize to kill rounding asymmetry before validation.
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self::new(m)
    }

    /// `Tr{rho sigma}`.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        (&self.m * &other.m).trace().re
    }

    fn check_conforms(&self, sys: &SystemSpec) -> Result<()> {
        if self.dim() != sys.dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.dim(),
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// Projective postselection on an orthonormal basis `{|S>}` where outcome
/// `S` is kept with probability `w(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectionScheme {
    /// Columns are the outcome states `|S>`.
    basis: DMatrix<Complex64>,
    weights: Vec<f64>,
}

impl PostselectionScheme {
    pub fn new(basis: DMatrix<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if !basis.is_square() || basis.nrows() == 0 {
            return Err(Error::InvalidState(
                "postselection basis must be square".into(),
            ));
        }
        if weights.len() != basis.ncols() {
            return Err(Error::DimensionMismatch {
                expected: basis.ncols(),
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidParameter(format!(
                "postselection weight {w} outside [0, 1]"
            )));
        }
        let gram = basis.adjoint() * &basis;
        let d = basis.ncols();
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - Complex64::new(target, 0.0)).norm() > 1e-10 {
                    return Err(Error::InvalidState(
                        "postselection basis is not orthonormal".into(),
                    ));
                }
            }
        }
        Ok(Self { basis, weights })
    }

    /// Keep outcome `|S>` for basis states of the computational basis.
    pub fn computational(weights: Vec<f64>) -> Result<Self> {
        let d = weights.len();
        Self::new(DMatrix::identity(d, d), weights)
    }

    /// Postselection in the pure state `psi` (completed to a basis by
    /// Gram-Schmidt), kept with probability `weight`.
    pub fn pure(psi: &[Complex64], weight: f64) -> Result<Self> {
        let d = psi.len();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if d == 0 || !(norm > 0.0) {
            return Err(Error::InvalidState(
                "postselection state has zero norm".into(),
            ));
        }
        let mut cols: Vec<Vec<Complex64>> = vec![psi.iter().map(|z| z / norm).collect()];
        for e in 0..d {
            if cols.len() == d {
                break;
            }
            let mut v: Vec<Complex64> = (0..d)
                .map(|i| Complex64::new(if i == e { 1.0 } else { 0.0 }, 0.0))
                .collect();
            for c in &cols {
                let proj: Complex64 = c.iter().zip(&v).map(|(ci, vi)| ci.conj() * vi).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-8 {
                cols.push(v.into_iter().map(|z| z / n).collect());
            }
        }
        let basis = DMatrix::from_fn(d, d, |i, j| cols[j][i]);
        let mut weights = vec![0.0; d];
        weights[0] = weight;
        Self::new(basis, weights)
    }

    /// Postselection that realizes a given mixed state with `W = 1`: the
    /// eigenbasis of `rho` weighted by its eigenvalues.
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        let eig = rho.matrix().clone().symmetric_eigen();
        let weights = eig.eigenvalues.iter().map(|l| l.clamp(0.0, 1.0)).collect();
        Self::new(eig.eigenvectors, weights)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    /// `W = sum_S w(S)`, in `[0, D]`.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same scheme with every weight multiplied by `r`.
    pub fn rescaled(&self, r: f64) -> Result<Self> {
        Self::new(
            self.basis.clone(),
            self.weights.iter().map(|w| w * r).collect(),
        )
    }

    /// `rho_f = sum_S w(S)|S><S| / W`.
    pub fn postselected_state(&self) -> Result<DensityMatrix> {
        let total = self.total_weight();
        if !(total > 0.0) {
            return Err(Error::EmptyPostselection);
        }
        let d = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (s, w) in self.weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let col = self.basis.column(s);
            m += col * col.adjoint() * Complex64::new(*w / total, 0.0);
        }
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        DensityMatrix::new(m)
    }
}

/// Free-function form of [`PostselectionScheme::postselected_state`].
pub fn postselected_state(scheme: &PostselectionScheme) -> Result<DensityMatrix> {
    scheme.postselected_state()
}

/// `alpha_{m,n} = Tr{A^m rho_f A^n rho_i}` with `A` diagonal.
pub fn alpha(
    m: u32,
    n: u32,
    rho_i: &DensityMatrix,
    rho_f: &DensityMatrix,
    sys: &SystemSpec,
) -> Result<Complex64> {
    rho_i.check_conforms(sys)?;
    rho_f.check_conforms(sys)?;
    let a = sys.eigenvalues();
    let d = sys.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..d {
        let am = a[r].powi(m as i32);
        for (c, &ac) in a.iter().enumerate() {
            acc += am * ac.powi(n as i32) * rho_f.get(r, c) * rho_i.get(c, r);
        }
    }
    Ok(acc)
}

/// The weak-value data entering every expansion formula.
///
/// The raw `alpha` values are always kept; ratios are only available when
/// `alpha_00` is not (numerically) zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValueSet {
    pub alpha00: f64,
    pub alpha01: Complex64,
    pub alpha11: f64,
    /// Neglected in the expansion; kept for diagnostics.
    pub alpha02: Complex64,
}

impl WeakValueSet {
    /// `alpha_00` is zero: the ratios `A_w`, `B_w` do not exist.
    pub fn is_nopps(&self) -> bool {
        self.alpha00 <= NOPPS_ALPHA_FLOOR
    }

    /// `A_w = alpha_01 / alpha_00`.
    pub fn a_w(&self) -> Option<Complex64> {
        (!self.is_nopps()).then(|| self.alpha01 / self.alpha00)
    }

    /// `B_w = alpha_11 / alpha_00`.
    pub fn b_w(&self) -> Option<f64> {
        (!self.is_nopps()).then(|| self.alpha11 / self.alpha00)
    }

    pub fn ratios(&self) -> Result<(Complex64, f64)> {
        match (self.a_w(), self.b_w()) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Nopps {
                alpha00: self.alpha00,
                threshold: NOPPS_ALPHA_FLOOR,
            }),
        }
    }
}

pub fn weak_values(
    rho_i: &DensityMatrix,
    rho_f: &DensityMatrix,
    sys: &SystemSpec,
) -> Result<WeakValueSet> {
    Ok(WeakValueSet {
        alpha00: alpha(0, 0, rho_i, rho_f, sys)?.re,
        alpha01: alpha(0, 1, rho_i, rho_f, sys)?,
        alpha11: alpha(1, 1, rho_i, rho_f, sys)?.re,
        alpha02: alpha(0, 2, rho_i, rho_f, sys)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_z() -> SystemSpec {
        SystemSpec::with_eigenvalues(vec![1.0, -1.0]).unwrap()
    }

    fn up() -> DensityMatrix {
        DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    fn plus_x() -> DensityMatrix {
        DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    pub(crate) fn random_state(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> DensityMatrix {
        let g = DMatrix::from_fn(d, rank, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityMatrix::new(m / tr).unwrap()
    }

    #[test]
    fn alpha_identical_pure_states() {
        let a = alpha(0, 0, &up(), &up(), &sigma_z()).unwrap();
        assert!((a - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn alpha_up_to_plus_x() {
        let a = alpha(0, 1, &up(), &plus_x(), &sigma_z()).unwrap();
        assert!((a - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn alpha_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sys = SystemSpec::with_eigenvalues(vec![0.3, -1.2, 2.0]).unwrap();
        let ri = random_state(&mut rng, 3, 3);
        let rf = random_state(&mut rng, 3, 2);
        // Dense oracle: explicit loops over a full (non-diagonal-shortcut) A.
        let amat = |p: u32| {
            let mut m = vec![vec![c(0.0, 0.0); 3]; 3];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = c(sys.eigenvalues()[i].powi(p as i32), 0.0);
            }
            m
        };
        let mul = |x: &Vec<Vec<Complex64>>, y: &Vec<Vec<Complex64>>| {
            let mut out = vec![vec![c(0.0, 0.0); 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        out[i][j] += x[i][k] * y[k][j];
                    }
                }
            }
            out
        };
        let to_vec = |r: &DensityMatrix| {
            (0..3)
                .map(|i| (0..3).map(|j| r.get(i, j)).collect())
                .collect::<Vec<Vec<_>>>()
        };
        let prod = mul(&mul(&mul(&amat(1), &to_vec(&rf)), &amat(2)), &to_vec(&ri));
        let expected: Complex64 = (0..3).map(|i| prod[i][i]).sum();
        let got = alpha(1, 2, &ri, &rf, &sys).unwrap();
        assert!((got - expected).norm() < 1e-14, "{got} vs {expected}");
    }

    #[test]
    fn alpha_rejects_dimension_mismatch() {
        let sys = SystemSpec::with_eigenvalues(vec![1.0, 0.0, -1.0]).unwrap();
        assert!(matches!(
            alpha(0, 0, &up(), &up(), &sys),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn weak_value_pure_states() {
        let wv = weak_values(&up(), &plus_x(), &sigma_z()).unwrap();
        let (a_w, b_w) = wv.ratios().unwrap();
        assert!((a_w - c(1.0, 0.0)).norm() < 1e-14);
        assert!((b_w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weak_value_without_postselection() {
        let wv = weak_values(
            &up(),
            &DensityMatrix::maximally_mixed(2).unwrap(),
            &sigma_z(),
        )
        .unwrap();
        let (a_w, b_w) = wv.ratios().unwrap();
        assert!((a_w - c(1.0, 0.0)).norm() < 1e-14);
        assert!((b_w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_states_flag_nopps() {
        let down = DensityMatrix::pure(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let wv = weak_values(&up(), &down, &sigma_z()).unwrap();
        assert!(wv.is_nopps());
        assert!(wv.a_w().is_none());
        assert!(matches!(wv.ratios(), Err(Error::Nopps { .. })));
    }

    #[test]
    fn b_w_bounds_a_w_for_mixed_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sys = SystemSpec::with_eigenvalues(vec![1.0, 0.5, -0.7, -1.0]).unwrap();
        for _ in 0..200 {
            let rank = 1 + rng.random_range(0..4);
            let ri = random_state(&mut rng, 4, rank);
            let rank = 1 + rng.random_range(0..4);
            let rf = random_state(&mut rng, 4, rank);
            let wv = weak_values(&ri, &rf, &sys).unwrap();
            let (a_w, b_w) = wv.ratios().unwrap();
            assert!(b_w >= a_w.norm_sqr() - 1e-10);
        }
    }

    #[test]
    fn postselection_pure_and_uniform() {
        let scheme = PostselectionScheme::computational(vec![0.7, 0.0]).unwrap();
        let rf = scheme.postselected_state().unwrap();
        assert!((rf.get(0, 0).re - 1.0).abs() < 1e-15);
        assert!(rf.get(1, 1).norm() < 1e-15);

        let scheme = PostselectionScheme::computational(vec![0.4; 3]).unwrap();
        let rf = scheme.postselected_state().unwrap();
        for i in 0..3 {
            assert!((rf.get(i, i).re - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((scheme.total_weight() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn postselection_rejects_bad_weights() {
        assert!(matches!(
            PostselectionScheme::computational(vec![0.0, 0.0])
                .unwrap()
                .postselected_state(),
            Err(Error::EmptyPostselection)
        ));
        assert!(PostselectionScheme::computational(vec![1.2, 0.0]).is_err());
        assert!(PostselectionScheme::computational(vec![-0.1, 0.0]).is_err());
    }

    #[test]
    fn pure_scheme_completes_basis() {
        let psi = [c(0.6, 0.1), c(-0.2, 0.5), c(0.3, 0.0)];
        let scheme = PostselectionScheme::pure(&psi, 1.0).unwrap();
        let rf = scheme.postselected_state().unwrap();
        let direct = DensityMatrix::pure(&psi).unwrap();
        assert!((rf.matrix() - direct.matrix()).norm() < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5, 0.0), c(0.6, 0.0)]));
        assert!(DensityMatrix::new(bad_trace).is_err());
        let non_herm =
            DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(non_herm).is_err());
        let negative =
            DMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(DensityMatrix::new(negative).is_err());
    }

    #[test]
    fn spread_and_idempotence() {
        let s = SystemSpec::with_eigenvalues(vec![1.0, 1.0, -1.0]).unwrap();
        assert_eq!(s.eigenvalue_spread(), 2.0);
        assert!(s.is_idempotent_like());
        assert!(!SystemSpec::with_eigenvalues(vec![0.5])
            .unwrap()
            .is_idempotent_like());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn state_strategy(d: usize) -> impl Strategy<Value = DensityMatrix> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_filter_map(
                "degenerate",
                move |v| {
                    let g = DMatrix::from_fn(d, d, |i, j| c(v[i * d + j].0, v[i * d + j].1));
                    let m = &g * g.adjoint();
                    let tr = m.trace();
                    (tr.re > 1e-3)
                        .then(|| DensityMatrix::new(m / tr).ok())
                        .flatten()
                },
            )
        }

        proptest! {
            #[test]
            fn alpha_conjugate_symmetry(ri in state_strategy(3), rf in state_strategy(3), m in 0u32..4, n in 0u32..4) {
                let sys = SystemSpec::with_eigenvalues(vec![1.5, -0.4, 0.9]).unwrap();
                let amn = alpha(m, n, &ri, &rf, &sys).unwrap();
                let anm = alpha(n, m, &ri, &rf, &sys).unwrap();
                prop_assert!((amn - anm.conj()).norm() < 1e-12);
                if m == n {
                    prop_assert!(amn.im.abs() < 1e-12);
                }
            }

            #[test]
            fn rescaling_leaves_rho_f(ws in proptest::collection::vec(0.0f64..1.0, 3), r in 0.01f64..1.0) {
                prop_assume!(ws.iter().sum::<f64>() > 1e-3);
                let s = PostselectionScheme::computational(ws).unwrap();
                let a = s.postselected_state().unwrap();
                let b = s.rescaled(r).unwrap().postselected_state().unwrap();
                prop_assert!((a.matrix() - b.matrix()).norm() < 1e-12);
            }
        }
    }
}
