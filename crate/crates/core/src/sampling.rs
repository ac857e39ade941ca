//! Random matrices, states and ensembles under a deterministic seeding
//! discipline.
//!
//! Every sampler draws from an [`RngStream`]: a ChaCha8 generator keyed by a
//! master seed and selected by a 64-bit stream index. Identical
//! `(master_seed, stream_index)` pairs reproduce identical draws on every
//! platform, and distinct stream indices are independent, so a batch of
//! experiments can be spread over any number of workers.
//!
//! Complex Gaussian entries have variance one in each real component. Any
//! other fixed scale cancels both in the QR phase correction and in the
//! normalization `G^dagger G / Tr(G^dagger G)`.

use nalgebra::{Complex, ComplexField};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::scalar::Real;
use crate::state::{DensityMatrix, Ensemble, EnsembleKind, ProbVector, PureState, Unitary};
use crate::tolerance::Tolerances;

/// Resamples attempted after a degenerate QR factorization.
const QR_RETRIES: usize = 3;

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self { master_seed, stream_index, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// `rows x cols` matrix of IID standard complex Gaussians.
pub fn ginibre_block<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix<T> {
    // Row-major fill so the draw order does not depend on nalgebra's storage.
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

pub fn ginibre_matrix<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<ComplexMatrix<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(ginibre_block(d, d, rng))
}

/// Haar-distributed `d x r` isometry: QR of a Ginibre block with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_isometry<T: Real, R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> Result<ComplexMatrix<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if r == 0 || r > d {
        return Err(Error::RankOutOfRange { rank: r, dim: d });
    }
    let pivot = T::lit(Tolerances::current::<T>().qr_pivot);
    for _ in 0..=QR_RETRIES {
        let qr = ginibre_block::<T, R>(d, r, rng).qr();
        let rdiag = qr.r().diagonal();
        if rdiag.iter().any(|z| z.modulus() < pivot) {
            continue;
        }
        let mut q = qr.q();
        for (j, z) in rdiag.iter().enumerate() {
            let phase = z.unscale(z.modulus());
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
        return Ok(q);
    }
    Err(Error::DegenerateQr { attempts: QR_RETRIES + 1 })
}

pub fn haar_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Unitary<T>> {
    haar_isometry(d, d, rng).map(Unitary::from_matrix_unchecked)
}

/// First column of a Haar unitary.
pub fn haar_pure_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PureState<T>> {
    let u = haar_unitary::<T, R>(d, rng)?;
    PureState::normalized(u.column(0))
}

/// `G^dagger G / Tr(G^dagger G)` for a Ginibre matrix `G`.
pub fn ginibre_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    let g = ginibre_matrix::<T, R>(d, rng)?;
    let w = g.adjoint() * &g;
    let tr = linalg::trace(&w).re;
    Ok(DensityMatrix::from_matrix_unchecked(linalg::hermitian_part(&w.unscale(tr))))
}

/// Rank-`r` state `V diag(lambda) V^dagger` with `lambda` normalized
/// uniforms on `(0, 1)` and `V` a Haar `d x r` isometry.
pub fn fixed_rank_state<T: Real, R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if r == 0 || r > d {
        return Err(Error::RankOutOfRange { rank: r, dim: d });
    }
    let mut lambda: Vec<f64> = (0..r)
        .map(|_| loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        })
        .collect();
    let total: f64 = lambda.iter().sum();
    lambda.iter_mut().for_each(|x| *x /= total);
    let v = haar_isometry::<T, R>(d, r, rng)?;
    let mut scaled = v.clone();
    for (j, &l) in lambda.iter().enumerate() {
        for i in 0..d {
            scaled[(i, j)] = scaled[(i, j)].scale(T::lit(l));
        }
    }
    let rho = scaled * v.adjoint();
    Ok(DensityMatrix::from_matrix_unchecked(linalg::hermitian_part(&rho)))
}

/// Draws `u` uniform on `[0, 1)` and returns the smallest index whose
/// cumulative probability exceeds `u`.
pub fn inverse_transform_sample<T: Real, R: Rng + ?Sized>(p: &ProbVector<T>, rng: &mut R) -> Result<usize> {
    if !p.is_normalized() {
        return Err(Error::NotNormalized(p.sum().as_f64()));
    }
    sample_index(p.as_slice(), rng)
}

/// Inverse-transform sampling over nonnegative weights summing to one
/// within rounding.
pub(crate) fn sample_index<T: Real, R: Rng + ?Sized>(p: &[T], rng: &mut R) -> Result<usize> {
    let u = T::lit(rng.random::<f64>());
    let mut acc = T::zero();
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if acc > u {
            return Ok(i);
        }
    }
    // Rounding left the total just below u: fall back to the last supported outcome.
    p.iter()
        .rposition(|&x| x > T::zero())
        .ok_or_else(|| Error::NotNormalized(acc.as_f64()))
}

/// Uniform-prior ensemble of `len` states.
///
/// `MixedRank` assigns rank `(a mod d) + 1` to state `a`, so ranks are
/// balanced and any remainder goes to the lowest ranks first.
pub fn build_ensemble<T: Real, R: Rng + ?Sized>(
    kind: EnsembleKind,
    d: usize,
    len: usize,
    rng: &mut R,
) -> Result<Ensemble<T>> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if len == 0 {
        return Err(Error::InvalidEnsemble("ensemble size must be positive".into()));
    }
    let states = match kind {
        EnsembleKind::PureHaar => (0..len)
            .map(|_| haar_pure_state::<T, R>(d, rng).map(|psi| DensityMatrix::from_pure(&psi)))
            .collect::<Result<Vec<_>>>()?,
        EnsembleKind::Ginibre => (0..len).map(|_| ginibre_state(d, rng)).collect::<Result<Vec<_>>>()?,
        EnsembleKind::MixedRank => (0..len)
            .map(|a| fixed_rank_state(d, a % d + 1, rng))
            .collect::<Result<Vec<_>>>()?,
        EnsembleKind::Custom => {
            return Err(Error::InvalidEnsemble("custom ensembles are loaded, not sampled".into()))
        }
    };
    Ensemble::uniform(states, kind)
}

/// On-disk ensemble: states as nested `[re, im]` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub kind: EnsembleKind,
    pub d: usize,
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub states: Vec<Vec<Vec<[f64; 2]>>>,
    pub prior: Vec<f64>,
}

impl EnsembleFile {
    pub fn from_ensemble<T: Real>(ensemble: &Ensemble<T>, seed: Option<u64>) -> Self {
        let states = ensemble
            .states()
            .iter()
            .map(|s| {
                let m = s.matrix();
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()]).collect())
                    .collect()
            })
            .collect();
        Self {
            kind: ensemble.kind(),
            d: ensemble.dim(),
            len: ensemble.len(),
            seed,
            states,
            prior: ensemble.prior().as_slice().iter().map(|p| p.as_f64()).collect(),
        }
    }

    /// Validates every state and the prior.
    pub fn to_ensemble<T: Real>(&self) -> Result<Ensemble<T>> {
        if self.states.len() != self.len {
            return Err(Error::LengthMismatch { expected: self.len, found: self.states.len() });
        }
        let states = self
            .states
            .iter()
            .map(|rows| {
                if rows.len() != self.d || rows.iter().any(|r| r.len() != self.d) {
                    return Err(Error::InvalidEnsemble(format!("state is not {0}x{0}", self.d)));
                }
                let m = ComplexMatrix::from_fn(self.d, self.d, |i, j| {
                    let [re, im] = rows[i][j];
                    Complex::new(T::lit(re), T::lit(im))
                });
                DensityMatrix::new(m)
            })
            .collect::<Result<Vec<_>>>()?;
        let prior = ProbVector::new(self.prior.iter().map(|&p| T::lit(p)).collect())?;
        Ensemble::new(states, prior, self.kind)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::validate_density;

    #[test]
    fn ginibre_is_deterministic() {
        let a: ComplexMatrix<f64> = ginibre_matrix(2, &mut RngStream::new(42, 0)).unwrap();
        let b: ComplexMatrix<f64> = ginibre_matrix(2, &mut RngStream::new(42, 0)).unwrap();
        let c: ComplexMatrix<f64> = ginibre_matrix(2, &mut RngStream::new(42, 1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ginibre_moments() {
        let mut rng = RngStream::new(7, 0);
        let n = 100_000;
        let (mut mean_re, mut mean_im, mut second) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let g: ComplexMatrix<f64> = ginibre_matrix(2, &mut rng).unwrap();
            mean_re += g[(0, 1)].re;
            mean_im += g[(0, 1)].im;
            second += g[(1, 0)].norm_sqr();
        }
        let n = n as f64;
        assert!((mean_re / n).abs() < 0.02);
        assert!((mean_im / n).abs() < 0.02);
        assert!((second / n - 2.0).abs() < 0.05);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(ginibre_matrix::<f64, _>(0, &mut rng), Err(Error::InvalidDimension(0))));
        assert!(matches!(haar_unitary::<f64, _>(0, &mut rng), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn unitarity_of_haar_samples() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            let u: Unitary<f64> = haar_unitary(5, &mut rng).unwrap();
            assert!(crate::state::unitarity_defect(u.matrix()) < 1e-10);
        }
    }

    #[test]
    fn haar_pure_state_norm_and_determinism() {
        let a: PureState<f64> = haar_pure_state(4, &mut RngStream::new(3, 9)).unwrap();
        let b: PureState<f64> = haar_pure_state(4, &mut RngStream::new(3, 9)).unwrap();
        assert!((a.amplitudes().norm() - 1.0).abs() < 1e-12);
        assert_eq!(a, b);
    }

    #[test]
    fn ginibre_state_is_valid_and_full_rank() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..1000 {
            let rho: DensityMatrix<f64> = ginibre_state(4, &mut rng).unwrap();
            assert!((linalg::trace(rho.matrix()).re - 1.0).abs() < 1e-12);
            assert!(rho.eigenvalues().iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn fixed_rank_states() {
        let mut rng = RngStream::new(11, 0);
        let pure: DensityMatrix<f64> = fixed_rank_state(3, 1, &mut rng).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-10);
        let full: DensityMatrix<f64> = fixed_rank_state(2, 2, &mut rng).unwrap();
        assert_eq!(full.rank(1e-10), 2);
        assert!((linalg::trace(full.matrix()).re - 1.0).abs() < 1e-12);
        for _ in 0..100 {
            let rho: DensityMatrix<f64> = fixed_rank_state(4, 2, &mut rng).unwrap();
            assert_eq!(rho.rank(1e-10), 2);
            assert!(validate_density(rho.matrix().clone()).is_ok());
        }
        assert!(matches!(
            fixed_rank_state::<f64, _>(2, 3, &mut rng),
            Err(Error::RankOutOfRange { rank: 3, dim: 2 })
        ));
        assert!(matches!(
            fixed_rank_state::<f64, _>(2, 0, &mut rng),
            Err(Error::RankOutOfRange { rank: 0, dim: 2 })
        ));
    }

    #[test]
    fn inverse_transform_degenerate_and_unnormalized() {
        let mut rng = RngStream::new(2, 0);
        let p = ProbVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        for _ in 0..1000 {
            assert_eq!(inverse_transform_sample(&p, &mut rng).unwrap(), 0);
        }
        let raw = ProbVector::raw(vec![0.2, 0.2]).unwrap();
        assert!(matches!(inverse_transform_sample(&raw, &mut rng), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn inverse_transform_fair_coin() {
        let mut rng = RngStream::new(2, 1);
        let p = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let zeros = (0..100_000).filter(|_| inverse_transform_sample(&p, &mut rng).unwrap() == 0).count();
        let freq = zeros as f64 / 100_000.0;
        assert!((0.49..=0.51).contains(&freq), "{freq}");
    }

    #[test]
    fn ensemble_builders() {
        let mut rng = RngStream::new(9, 0);
        let e: Ensemble<f64> = build_ensemble(EnsembleKind::PureHaar, 2, 10, &mut rng).unwrap();
        assert_eq!(e.len(), 10);
        assert!(e.prior().as_slice().iter().all(|&p| (p - 0.1).abs() < 1e-15));
        assert!(e.states().iter().all(|s| s.rank(1e-10) == 1));

        let e: Ensemble<f64> = build_ensemble(EnsembleKind::MixedRank, 4, 8, &mut rng).unwrap();
        let mut counts = [0usize; 4];
        for s in e.states() {
            counts[s.rank(1e-10) - 1] += 1;
        }
        assert_eq!(counts, [2, 2, 2, 2]);

        let e: Ensemble<f64> = build_ensemble(EnsembleKind::MixedRank, 3, 10, &mut rng).unwrap();
        let mut counts = [0usize; 3];
        for s in e.states() {
            counts[s.rank(1e-10) - 1] += 1;
        }
        assert_eq!(counts, [4, 3, 3]);

        assert!(build_ensemble::<f64, _>(EnsembleKind::Ginibre, 2, 0, &mut rng).is_err());
        assert!(build_ensemble::<f64, _>(EnsembleKind::Custom, 2, 3, &mut rng).is_err());
    }

    #[test]
    fn ensemble_json_round_trip_is_exact() {
        for kind in [EnsembleKind::PureHaar, EnsembleKind::Ginibre, EnsembleKind::MixedRank] {
            let e: Ensemble<f64> = build_ensemble(kind, 3, 5, &mut RngStream::new(4, 0)).unwrap();
            let text = EnsembleFile::from_ensemble(&e, Some(4)).to_json().unwrap();
            let back: Ensemble<f64> = EnsembleFile::from_json(&text).unwrap().to_ensemble().unwrap();
            let again = EnsembleFile::from_ensemble(&back, Some(4)).to_json().unwrap();
            assert_eq!(text, again);
        }
    }

    #[test]
    fn corrupted_ensemble_json_is_rejected() {
        let e: Ensemble<f64> = build_ensemble(EnsembleKind::Ginibre, 2, 2, &mut RngStream::new(4, 0)).unwrap();
        let mut file = EnsembleFile::from_ensemble(&e, None);
        file.states[0][0][0][0] += 0.5;
        assert!(matches!(file.to_ensemble::<f64>(), Err(Error::TraceNotOne(_))));
        assert!(EnsembleFile::from_json("{\"kind\": \"ginibre\"").is_err());
    }
}
