//! Validated domain types: probability vectors, pure and mixed states,
//! unitaries, POVMs and ensembles.
//!
//! Every type is immutable once constructed. Checked constructors enforce
//! the invariants against [`Tolerances::current`]; `*_unchecked`
//! constructors exist for values produced by routines that preserve them
//! by construction.

use std::sync::OnceLock;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::scalar::Real;
use crate::tolerance::Tolerances;

/// Nonnegative weights, optionally known to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<T: Real> {
    values: Vec<T>,
    normalized: bool,
}

impl<T: Real> ProbVector<T> {
    /// Checked normalized distribution.
    pub fn new(values: Vec<T>) -> Result<Self> {
        let tol = Tolerances::current::<T>();
        if let Some(&neg) = values.iter().find(|&&v| v < T::zero() || !v.is_finite()) {
            return Err(Error::NegativeProbability(neg.as_f64()));
        }
        let sum: T = values.iter().copied().fold(T::zero(), |a, b| a + b);
        if (sum - T::one()).abs() > T::lit(tol.prob_sum) {
            return Err(Error::NotNormalized(sum.as_f64()));
        }
        Ok(Self { values, normalized: true })
    }

    /// Unnormalized nonnegative weights.
    pub fn raw(values: Vec<T>) -> Result<Self> {
        if let Some(&neg) = values.iter().find(|&&v| v < T::zero() || !v.is_finite()) {
            return Err(Error::NegativeProbability(neg.as_f64()));
        }
        Ok(Self { values, normalized: false })
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalize(values: Vec<T>) -> Result<Self> {
        let raw = Self::raw(values)?;
        let sum = raw.sum();
        if sum <= T::zero() {
            return Err(Error::NotNormalized(sum.as_f64()));
        }
        Ok(Self {
            values: raw.values.into_iter().map(|v| v / sum).collect(),
            normalized: true,
        })
    }

    pub fn uniform(n: usize) -> Self {
        let w = T::one() / T::lit(n as f64);
        Self { values: vec![w; n], normalized: true }
    }

    pub fn point(n: usize, k: usize) -> Self {
        let mut values = vec![T::zero(); n];
        values[k] = T::one();
        Self { values, normalized: true }
    }

    pub(crate) fn normalized_unchecked(values: Vec<T>) -> Self {
        Self { values, normalized: true }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().fold(T::zero(), |a, b| a + b)
    }

    /// Total variation distance `1/2 sum |p - q|`.
    pub fn tv_distance(&self, other: &Self) -> Result<T> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: other.len() });
        }
        let s = self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc + (*a - *b).abs());
        Ok(s * T::lit(0.5))
    }
}

impl<T: Real> std::ops::Index<usize> for ProbVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// Unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: ComplexVector<T>,
}

impl<T: Real> PureState<T> {
    pub fn new(amplitudes: ComplexVector<T>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let tol = Tolerances::current::<T>();
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > T::lit(tol.pure_norm) {
            return Err(Error::NotNormalized(norm.as_f64()));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: ComplexVector<T>) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || norm <= T::zero() || !norm.is_finite() {
            return Err(Error::NotNormalized(norm.as_f64()));
        }
        Ok(Self { amplitudes: amplitudes.unscale(norm) })
    }

    /// Computational basis vector `|k>`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = ComplexVector::zeros(d);
        v[k] = linalg::real(T::one());
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector<T> {
        &self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix<T> {
        linalg::projector(&self.amplitudes)
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix.
///
/// Pure states keep their state vector so that overlaps and fidelities can
/// skip the matrix square root.
#[derive(Debug, Clone)]
pub struct DensityMatrix<T: Real> {
    matrix: ComplexMatrix<T>,
    vector: Option<ComplexVector<T>>,
    sqrt: OnceLock<ComplexMatrix<T>>,
}

impl<T: Real> PartialEq for DensityMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// Checks every density-matrix invariant and returns the validated state.
pub fn validate_density<T: Real>(m: ComplexMatrix<T>) -> Result<DensityMatrix<T>> {
    DensityMatrix::new(m)
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        let tol = Tolerances::current::<T>();
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !linalg::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let herm = linalg::hermiticity_defect(&m);
        if herm > T::lit(tol.hermitian) {
            return Err(Error::NotHermitian(herm.as_f64()));
        }
        let tr = linalg::trace(&m).re;
        if (tr - T::one()).abs() > T::lit(tol.trace) {
            return Err(Error::TraceNotOne(tr.as_f64()));
        }
        let m = linalg::hermitian_part(&m);
        let min = linalg::hermitian_eigenvalues(&m)
            .into_iter()
            .reduce(|a, b| a.min(b))
            .unwrap_or_else(T::zero);
        if min < -T::lit(tol.psd) {
            return Err(Error::NotPsd(min.as_f64()));
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        Self {
            matrix: psi.projector(),
            vector: Some(psi.amplitudes.clone()),
            sqrt: OnceLock::new(),
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let m = linalg::identity::<T>(d).unscale(T::lit(d as f64));
        Self::from_matrix_unchecked(m)
    }

    /// Convex combination `sum_a w_a rho_a`. Weights must be a normalized
    /// distribution over states of equal dimension.
    pub fn mixture(weights: &[T], states: &[DensityMatrix<T>]) -> Result<Self> {
        if weights.len() != states.len() {
            return Err(Error::LengthMismatch { expected: states.len(), found: weights.len() });
        }
        let d = states.first().map(|s| s.dim()).ok_or(Error::InvalidDimension(0))?;
        let mut acc = ComplexMatrix::<T>::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: s.dim() });
            }
            if *w != T::zero() {
                acc.zip_apply(&s.matrix, |a, b| *a += b.scale(*w));
            }
        }
        Ok(Self::from_matrix_unchecked(linalg::hermitian_part(&acc)))
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix<T>) -> Self {
        Self { matrix, vector: None, sqrt: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    /// State vector when the state was constructed as pure.
    pub fn pure_vector(&self) -> Option<&ComplexVector<T>> {
        self.vector.as_ref()
    }

    pub fn purity(&self) -> T {
        linalg::trace_product_re(&self.matrix, &self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Number of eigenvalues above `cutoff`.
    pub fn rank(&self, cutoff: T) -> usize {
        self.eigenvalues().into_iter().filter(|&x| x > cutoff).count()
    }

    /// Cached `sqrt(rho)`.
    pub fn sqrt(&self) -> &ComplexMatrix<T> {
        self.sqrt.get_or_init(|| match &self.vector {
            Some(v) => linalg::projector(v),
            None => linalg::sqrt_from_eigen(&linalg::hermitian_eigen(&self.matrix)),
        })
    }

    /// Born probability `Tr(E rho)` for a Hermitian effect.
    pub fn expectation(&self, effect: &ComplexMatrix<T>) -> T {
        match &self.vector {
            Some(v) => linalg::expectation(v, effect),
            None => linalg::trace_product_re(effect, &self.matrix),
        }
    }

    /// `<v| rho |v>`.
    pub fn overlap(&self, v: &ComplexVector<T>) -> T {
        match &self.vector {
            Some(psi) => linalg::overlap_sq(v, psi),
            None => linalg::expectation(v, &self.matrix),
        }
    }
}

/// Unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary<T: Real> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> Unitary<T> {
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !linalg::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let defect = unitarity_defect(&m);
        if defect > T::lit(Tolerances::current::<T>().unitarity) {
            return Err(Error::NotUnitary(defect.as_f64()));
        }
        Ok(Self { matrix: m })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: linalg::identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn column(&self, k: usize) -> ComplexVector<T> {
        self.matrix.column(k).into_owned()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix }
    }
}

/// Max abs entry of `U^dagger U - 1`.
pub fn unitarity_defect<T: Real>(m: &ComplexMatrix<T>) -> T {
    let g = m.adjoint() * m;
    linalg::max_abs_diff(&g, &linalg::identity(m.ncols()))
}

/// Positive operator-valued measure on `C^d`.
///
/// Rank-one POVMs built from an orthonormal basis keep the basis vectors,
/// which turns every Born probability into a quadratic form.
#[derive(Debug, Clone)]
pub struct Povm<T: Real> {
    dim: usize,
    effects: Vec<ComplexMatrix<T>>,
    vectors: Option<Vec<ComplexVector<T>>>,
}

impl<T: Real> Povm<T> {
    pub fn new(effects: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let tol = Tolerances::current::<T>();
        let d = effects.first().map(|e| e.nrows()).ok_or(Error::InvalidDimension(0))?;
        let mut sum = ComplexMatrix::<T>::zeros(d, d);
        for e in &effects {
            if e.nrows() != e.ncols() {
                return Err(Error::NotSquare { rows: e.nrows(), cols: e.ncols() });
            }
            if e.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, found: e.nrows() });
            }
            let herm = linalg::hermiticity_defect(e);
            if herm > T::lit(tol.hermitian) {
                return Err(Error::NotHermitian(herm.as_f64()));
            }
            let min = linalg::hermitian_eigenvalues(e)
                .into_iter()
                .reduce(|a, b| a.min(b))
                .unwrap_or_else(T::zero);
            if min < -T::lit(tol.psd) {
                return Err(Error::NotPsd(min.as_f64()));
            }
            sum += e;
        }
        let defect = linalg::max_abs_diff(&sum, &linalg::identity(d));
        if defect > T::lit(tol.povm_completeness) {
            return Err(Error::IncompletePovm(defect.as_f64()));
        }
        Ok(Self { dim: d, effects, vectors: None })
    }

    pub(crate) fn from_effects_unchecked(dim: usize, effects: Vec<ComplexMatrix<T>>) -> Self {
        Self { dim, effects, vectors: None }
    }

    /// Projective measurement onto the columns of `u`.
    pub fn from_basis(u: &Unitary<T>) -> Self {
        let vectors: Vec<_> = (0..u.dim()).map(|k| u.column(k)).collect();
        let effects = vectors.iter().map(linalg::projector).collect();
        Self { dim: u.dim(), effects, vectors: Some(vectors) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[ComplexMatrix<T>] {
        &self.effects
    }

    pub fn basis_vectors(&self) -> Option<&[ComplexVector<T>]> {
        self.vectors.as_deref()
    }

    /// `Tr(E_x rho)` without clamping.
    pub fn born(&self, x: usize, rho: &DensityMatrix<T>) -> T {
        match &self.vectors {
            Some(v) => rho.overlap(&v[x]),
            None => rho.expectation(&self.effects[x]),
        }
    }

    /// Max abs entry of `sum_x E_x - 1`.
    pub fn completeness_defect(&self) -> T {
        let mut sum = ComplexMatrix::<T>::zeros(self.dim, self.dim);
        for e in &self.effects {
            sum += e;
        }
        linalg::max_abs_diff(&sum, &linalg::identity(self.dim))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    PureHaar,
    Ginibre,
    MixedRank,
    Custom,
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnsembleKind::PureHaar => "pure-haar",
            EnsembleKind::Ginibre => "ginibre",
            EnsembleKind::MixedRank => "mixed-rank",
            EnsembleKind::Custom => "custom",
        })
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure-haar" => Ok(EnsembleKind::PureHaar),
            "ginibre" => Ok(EnsembleKind::Ginibre),
            "mixed-rank" => Ok(EnsembleKind::MixedRank),
            "custom" => Ok(EnsembleKind::Custom),
            other => Err(Error::InvalidConfig(format!("unknown ensemble kind '{other}'"))),
        }
    }
}

/// Finite ensemble `{p_a, rho_a}` stored in factored form.
#[derive(Debug, Clone)]
pub struct Ensemble<T: Real> {
    dim: usize,
    states: Vec<DensityMatrix<T>>,
    prior: ProbVector<T>,
    kind: EnsembleKind,
}

impl<T: Real> Ensemble<T> {
    pub fn new(states: Vec<DensityMatrix<T>>, prior: ProbVector<T>, kind: EnsembleKind) -> Result<Self> {
        let dim = states
            .first()
            .map(|s| s.dim())
            .ok_or_else(|| Error::InvalidEnsemble("no states".into()))?;
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
        }
        if prior.len() != states.len() {
            return Err(Error::LengthMismatch { expected: states.len(), found: prior.len() });
        }
        if !prior.is_normalized() {
            return Err(Error::NotNormalized(prior.sum().as_f64()));
        }
        Ok(Self { dim, states, prior, kind })
    }

    pub fn uniform(states: Vec<DensityMatrix<T>>, kind: EnsembleKind) -> Result<Self> {
        let prior = ProbVector::uniform(states.len());
        Self::new(states, prior, kind)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn states(&self) -> &[DensityMatrix<T>] {
        &self.states
    }

    pub fn state(&self, a: usize) -> &DensityMatrix<T> {
        &self.states[a]
    }

    pub fn prior(&self) -> &ProbVector<T> {
        &self.prior
    }

    /// Unnormalized `p_a rho_a`.
    pub fn weighted_state(&self, a: usize) -> ComplexMatrix<T> {
        self.states[a].matrix().scale(self.prior[a])
    }

    /// `rho_out = sum_a p_a rho_a`.
    pub fn average_state(&self) -> DensityMatrix<T> {
        DensityMatrix::mixture(self.prior.as_slice(), &self.states)
            .expect("ensemble states share a dimension")
    }
}

/// Helper for building matrices from `(re, im)` rows in tests and examples.
pub fn matrix_from_pairs<T: Real>(d: usize, entries: &[(f64, f64)]) -> ComplexMatrix<T> {
    ComplexMatrix::from_row_iterator(d, d, entries.iter().map(|&(re, im)| Complex::new(T::lit(re), T::lit(im))))
}
