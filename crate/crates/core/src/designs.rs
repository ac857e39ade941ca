//! Finite families of measurement bases for qubits and the frame-potential
//! certificate for the design order each family claims.
//!
//! The certificate compares `(1/|S|^2) sum_{U,V} |Tr(U^dagger V)|^{2t}` with
//! the Haar value `int |Tr U|^{2t} dU`, the number of permutations of `t`
//! letters with no increasing subsequence longer than `d`. That count is
//! `t!` for `t <= d`; for qubits it is the Catalan number, so the Haar value
//! at `t = 3` is 5.

use nalgebra::{Complex, ComplexField};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix};
use crate::scalar::Real;
use crate::state::{unitarity_defect, Unitary};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetLabel {
    Pauli,
    #[serde(rename = "qubit-2design")]
    Qubit2Design,
    Clifford,
    Custom,
}

/// Unitaries with a certified design order. Elements are distinct modulo
/// global phase.
#[derive(Debug, Clone)]
pub struct UnitarySet<T: Real> {
    dim: usize,
    elements: Vec<Unitary<T>>,
    label: SetLabel,
    claimed_order: u32,
}

impl<T: Real> UnitarySet<T> {
    /// Validates unitarity and checks the frame potential against the Haar
    /// value for every `t <= claimed_order`.
    pub fn certify(elements: Vec<ComplexMatrix<T>>, label: SetLabel, claimed_order: u32) -> Result<Self> {
        let dim = elements.first().map(|m| m.nrows()).ok_or(Error::InvalidDimension(0))?;
        let elements = elements
            .into_iter()
            .map(|m| {
                if m.nrows() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
                }
                Unitary::new(m)
            })
            .collect::<Result<Vec<_>>>()?;
        let set = Self { dim, elements, label, claimed_order };
        let tol = Tolerances::current::<T>().frame_potential;
        for t in 1..=claimed_order {
            let value = frame_potential(&set, t).as_f64();
            let expected = haar_frame_potential(dim, t);
            if (value - expected).abs() > tol {
                return Err(Error::CertificationFailed { order: t, value, expected });
            }
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Unitary<T>] {
        &self.elements
    }

    pub fn label(&self) -> SetLabel {
        self.label
    }

    pub fn claimed_order(&self) -> u32 {
        self.claimed_order
    }

    /// Same set with every element left-multiplied by `w`.
    pub fn rotated(&self, w: &Unitary<T>) -> Self {
        Self {
            elements: self.elements.iter().map(|u| w.mul(u)).collect(),
            ..self.clone()
        }
    }
}

/// `(1/|S|^2) sum_{U,V in S} |Tr(U^dagger V)|^{2t}` by exhaustive enumeration.
pub fn frame_potential<T: Real>(set: &UnitarySet<T>, t: u32) -> T {
    let n = set.elements.len();
    let mut acc = T::zero();
    for u in &set.elements {
        for v in &set.elements {
            let tr = u
                .matrix()
                .iter()
                .zip(v.matrix().iter())
                .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b);
            acc += tr.norm_sqr().powi(t as i32);
        }
    }
    acc / T::lit((n * n) as f64)
}

/// Haar frame potential `int |Tr U|^{2t} dU` over `U(d)`.
///
/// Sum of squared standard-tableau counts over partitions of `t` with at
/// most `d` rows.
pub fn haar_frame_potential(d: usize, t: u32) -> f64 {
    let mut total: u128 = 0;
    for_each_partition(t as usize, t as usize, &mut Vec::new(), &mut |parts| {
        if parts.len() <= d {
            let f = standard_tableaux(parts);
            total += f * f;
        }
    });
    total as f64
}

fn for_each_partition(n: usize, max: usize, prefix: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if n == 0 {
        visit(prefix);
        return;
    }
    for k in (1..=n.min(max)).rev() {
        prefix.push(k);
        for_each_partition(n - k, k, prefix, visit);
        prefix.pop();
    }
}

/// Hook length formula.
fn standard_tableaux(shape: &[usize]) -> u128 {
    let n: usize = shape.iter().sum();
    let mut num: u128 = (1..=n as u128).product();
    let mut den: u128 = 1;
    for (i, &row) in shape.iter().enumerate() {
        for j in 0..row {
            let arm = row - j - 1;
            let leg = shape[i + 1..].iter().filter(|&&r| r > j).count();
            den *= (arm + leg + 1) as u128;
        }
    }
    let g = gcd(num, den);
    num /= g;
    num / (den / g)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Uniform draw from the set.
pub fn sample_from_set<'a, T: Real, R: Rng + ?Sized>(set: &'a UnitarySet<T>, rng: &mut R) -> &'a Unitary<T> {
    &set.elements[rng.random_range(0..set.elements.len())]
}

fn gate<T: Real>(entries: [(f64, f64); 4]) -> ComplexMatrix<T> {
    ComplexMatrix::from_row_slice(2, 2, &entries.map(|(re, im)| c::<T>(re, im)))
}

fn pauli_x<T: Real>() -> ComplexMatrix<T> {
    gate([(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
}

fn pauli_y<T: Real>() -> ComplexMatrix<T> {
    gate([(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)])
}

fn pauli_z<T: Real>() -> ComplexMatrix<T> {
    gate([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)])
}

fn hadamard<T: Real>() -> ComplexMatrix<T> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    gate([(h, 0.0), (h, 0.0), (h, 0.0), (-h, 0.0)])
}

fn phase_gate<T: Real>() -> ComplexMatrix<T> {
    gate([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 1.0)])
}

/// Representative modulo global phase: the first entry (column-major) of
/// non-negligible modulus is made real and positive.
fn phase_canonical<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let threshold = T::lit(1e-6);
    match m.iter().find(|z| z.modulus() > threshold) {
        Some(z) => m * z.conj().unscale(z.modulus()),
        None => m.clone(),
    }
}

/// Whether `a` equals `b` up to a global phase. The phase is taken from
/// `Tr(a^dag b)`, so no single entry has to be well conditioned.
pub fn equal_up_to_phase<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>, tol: T) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let overlap = (a.adjoint() * b).trace();
    let size = overlap.modulus();
    if size <= tol {
        return linalg::max_abs(a) <= tol && linalg::max_abs(b) <= tol;
    }
    linalg::max_abs_diff(&(a * overlap.unscale(size)), b) <= tol
}

/// Group generated by `generators`, deduplicated modulo phase.
fn closure<T: Real>(generators: &[ComplexMatrix<T>]) -> Vec<ComplexMatrix<T>> {
    const LIMIT: usize = 4096;
    let tol = T::lit(10.0 * Tolerances::current::<T>().unitarity);
    let d = generators[0].nrows();
    let mut elements = vec![linalg::identity::<T>(d)];
    let mut frontier = elements.clone();
    while !frontier.is_empty() && elements.len() < LIMIT {
        let mut next = Vec::new();
        for u in &frontier {
            for g in generators {
                let candidate = phase_canonical(&(g * u));
                if !elements.iter().any(|e| equal_up_to_phase(e, &candidate, tol)) {
                    elements.push(candidate.clone());
                    next.push(candidate);
                }
            }
        }
        frontier = next;
    }
    elements
}

/// `{I, X, Y, Z}`: a unitary 1-design.
pub fn pauli_group<T: Real>() -> UnitarySet<T> {
    let elements = vec![linalg::identity(2), pauli_x(), pauli_y(), pauli_z()];
    UnitarySet::certify(elements, SetLabel::Pauli, 1).expect("Pauli group is a 1-design")
}

/// The 12-element group generated by the Paulis and the order-3 Clifford
/// rotation `S H` (which cycles `X -> Z -> Y -> X`): a unitary 2-design.
pub fn qubit_2design<T: Real>() -> Result<UnitarySet<T>> {
    let cycle = phase_gate::<T>() * hadamard::<T>();
    let elements = closure(&[pauli_x(), pauli_z(), cycle]);
    UnitarySet::certify(elements, SetLabel::Qubit2Design, 2)
}

/// Single-qubit Clifford group modulo phase (24 elements): a unitary 3-design.
pub fn clifford_group_qubit<T: Real>() -> Result<UnitarySet<T>> {
    let elements = closure(&[hadamard(), phase_gate()]);
    UnitarySet::certify(elements, SetLabel::Clifford, 3)
}

/// JSON import format for user-supplied sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitarySetFile {
    pub claimed_order: u32,
    pub elements: Vec<Vec<Vec<[f64; 2]>>>,
}

impl UnitarySetFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_set<T: Real>(&self) -> Result<UnitarySet<T>> {
        let elements = self
            .elements
            .iter()
            .map(|rows| {
                let d = rows.len();
                if d == 0 || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::NotSquare { rows: d, cols: rows.first().map_or(0, |r| r.len()) });
                }
                Ok(ComplexMatrix::from_fn(d, d, |i, j| c::<T>(rows[i][j][0], rows[i][j][1])))
            })
            .collect::<Result<Vec<_>>>()?;
        UnitarySet::certify(elements, SetLabel::Custom, self.claimed_order)
    }
}

/// Largest `|U^dagger U - 1|` entry over the set.
pub fn max_unitarity_defect<T: Real>(set: &UnitarySet<T>) -> T {
    set.elements
        .iter()
        .map(|u| unitarity_defect(u.matrix()))
        .fold(T::zero(), |a, b| a.max(b))
}
