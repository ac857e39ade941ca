//! Pretty good measurement of an ensemble, its single-shot Bayesian
//! posterior, and the Petz recovery map of the preparation channel.
//!
//! For an ensemble `{p_a, rho_a}` with average state `rho_out`, the effects
//! are `E_x = rho_out^{-1/2} p_x rho_x rho_out^{-1/2}`, with the inverse
//! square root taken on the support of `rho_out`. A residual effect
//! `E_perp = 1 - sum_x E_x` completes the POVM when `rho_out` is rank
//! deficient; it has zero weight on every ensemble state.
//!
//! Under this measurement the Bayes posterior is the outcome distribution
//! with its indices swapped, `p(a|x) = Tr(E_a rho_x)`, and the Petz map of
//! `|a><a| -> rho_a` returns exactly that posterior. Both facts are checked
//! numerically by [`verify_identities`].

use rand::Rng;

use crate::bayes::Posterior;
use crate::error::{Error, Result};
use crate::fidelity::fidelity;
use crate::linalg::{self, ComplexMatrix};
use crate::sampling::{build_ensemble, sample_index, RngStream};
use crate::scalar::Real;
use crate::state::{DensityMatrix, Ensemble, EnsembleKind, Povm, ProbVector};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct PgmMeasurement<'e, T: Real> {
    ensemble: &'e Ensemble<T>,
    rho_out: DensityMatrix<T>,
    inv_sqrt: ComplexMatrix<T>,
    effects: Vec<ComplexMatrix<T>>,
    residual: ComplexMatrix<T>,
    support_rank: usize,
}

pub fn build_pgm<T: Real>(ensemble: &Ensemble<T>) -> Result<PgmMeasurement<'_, T>> {
    let tol = Tolerances::current::<T>();
    let rho_out = ensemble.average_state();
    let (inv_sqrt, _, support_rank) = linalg::pinv_sqrt(rho_out.matrix(), T::lit(tol.pinv_cutoff));
    if support_rank == 0 {
        return Err(Error::DegenerateEnsemble);
    }
    let d = ensemble.dim();
    let mut residual = linalg::identity::<T>(d);
    let effects: Vec<_> = (0..ensemble.len())
        .map(|a| {
            let e = linalg::hermitian_part(&(&inv_sqrt * ensemble.weighted_state(a) * &inv_sqrt));
            residual -= &e;
            e
        })
        .collect();
    Ok(PgmMeasurement {
        ensemble,
        rho_out,
        inv_sqrt,
        effects,
        residual: linalg::hermitian_part(&residual),
        support_rank,
    })
}

/// Posterior computed two ways for one outcome.
struct PosteriorRoutes<T: Real> {
    /// `p(x|a) p_a / p(x)`.
    bayes: Vec<T>,
    /// `Tr(E_a rho_x)`.
    swapped: Vec<T>,
    /// `p(x) = sum_a p(x|a) p_a`.
    marginal: T,
}

impl<'e, T: Real> PgmMeasurement<'e, T> {
    pub fn ensemble(&self) -> &'e Ensemble<T> {
        self.ensemble
    }

    pub fn rho_out(&self) -> &DensityMatrix<T> {
        &self.rho_out
    }

    pub fn effects(&self) -> &[ComplexMatrix<T>] {
        &self.effects
    }

    pub fn residual(&self) -> &ComplexMatrix<T> {
        &self.residual
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// The full POVM: the `L` ensemble effects followed by the residual.
    pub fn povm(&self) -> Povm<T> {
        let mut effects = self.effects.clone();
        effects.push(self.residual.clone());
        Povm::from_effects_unchecked(self.ensemble.dim(), effects)
    }

    /// Max abs entry of `sum_x E_x + E_perp - 1`.
    pub fn completeness_defect(&self) -> T {
        self.povm().completeness_defect()
    }

    /// `Tr(E_x rho)` for every ensemble outcome, and `Tr(E_perp rho)`.
    pub fn outcome_probabilities(&self, rho: &DensityMatrix<T>) -> Result<(Vec<T>, T)> {
        if rho.dim() != self.ensemble.dim() {
            return Err(Error::DimensionMismatch { expected: self.ensemble.dim(), found: rho.dim() });
        }
        let probs = self.effects.iter().map(|e| rho.expectation(e)).collect();
        Ok((probs, rho.expectation(&self.residual)))
    }

    fn check_outcome(&self, x: usize) -> Result<()> {
        if x >= self.effects.len() {
            return Err(Error::OutcomeOutOfRange { outcome: x, len: self.effects.len() });
        }
        Ok(())
    }

    fn posterior_routes(&self, x: usize) -> Result<PosteriorRoutes<T>> {
        self.check_outcome(x)?;
        let prior = self.ensemble.prior();
        let joint: Vec<T> = self
            .ensemble
            .states()
            .iter()
            .enumerate()
            .map(|(a, rho)| rho.expectation(&self.effects[x]) * prior[a])
            .collect();
        let marginal = joint.iter().copied().fold(T::zero(), |s, v| s + v);
        let floor = T::lit(Tolerances::current::<T>().min_outcome_probability);
        if marginal.partial_cmp(&floor) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::ZeroProbabilityOutcome { outcome: x, probability: marginal.as_f64() });
        }
        let bayes = joint.into_iter().map(|v| v / marginal).collect();
        let rho_x = self.ensemble.state(x);
        let swapped = self.effects.iter().map(|e| rho_x.expectation(e)).collect();
        Ok(PosteriorRoutes { bayes, swapped, marginal })
    }

    /// Petz recovery of `input`: weights `p_a Tr(rho_out^{-1/2} input rho_out^{-1/2} rho_a)`
    /// and the residual mass outside the support of `rho_out`.
    pub fn petz_recovery(&self, input: &DensityMatrix<T>) -> Result<PetzOutput<T>> {
        if input.dim() != self.ensemble.dim() {
            return Err(Error::DimensionMismatch { expected: self.ensemble.dim(), found: input.dim() });
        }
        let conj = &self.inv_sqrt * input.matrix() * &self.inv_sqrt;
        let prior = self.ensemble.prior();
        let weights: Vec<T> = self
            .ensemble
            .states()
            .iter()
            .enumerate()
            .map(|(a, rho)| (prior[a] * linalg::trace_product_re(&conj, rho.matrix())).max(T::zero()))
            .collect();
        let total = weights.iter().copied().fold(T::zero(), |s, v| s + v);
        Ok(PetzOutput {
            distribution: ProbVector::raw(weights)?,
            residual: (T::one() - total).max(T::zero()),
        })
    }
}

/// Output of the Petz recovery map: a distribution over registers `a`.
#[derive(Debug, Clone)]
pub struct PetzOutput<T: Real> {
    /// Sums to one when the input lies in the support of `rho_out`.
    pub distribution: ProbVector<T>,
    pub residual: T,
}

/// Posterior `p(a|x)` after observing PGM outcome `x`.
///
/// Computed both by Bayes' rule and as `Tr(E_a rho_x)`; the two must agree
/// and the outcome marginal must equal the prior weight `p_x`.
pub fn pgm_posterior<T: Real>(pgm: &PgmMeasurement<'_, T>, x: usize) -> Result<ProbVector<T>> {
    let routes = pgm.posterior_routes(x)?;
    let tol = T::lit(Tolerances::current::<T>().identity);
    let dev = max_deviation(&routes.bayes, &routes.swapped);
    let marginal_dev = (routes.marginal - pgm.ensemble.prior()[x]).abs();
    let worst = dev.max(marginal_dev);
    if worst > tol {
        return Err(Error::IdentityViolated(worst.as_f64()));
    }
    Ok(ProbVector::normalized_unchecked(routes.swapped))
}

/// `sum_a p(a|x) rho_a` for PGM outcome `x`.
pub fn pgm_bayes_estimator<T: Real>(pgm: &PgmMeasurement<'_, T>, x: usize) -> Result<DensityMatrix<T>> {
    let posterior = pgm_posterior(pgm, x)?;
    DensityMatrix::mixture(posterior.as_slice(), pgm.ensemble.states())
}

/// Petz recovery map of the preparation channel `|a><a| -> rho_a`.
pub fn petz_recovery<T: Real>(ensemble: &Ensemble<T>, input: &DensityMatrix<T>) -> Result<PetzOutput<T>> {
    build_pgm(ensemble)?.petz_recovery(input)
}

fn max_deviation<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

/// Where the input state of a naive-vs-Bayes trial comes from.
#[derive(Debug, Clone)]
pub enum InputState<T: Real> {
    /// Redrawn from the ensemble prior on every trial.
    FromEnsemble,
    Fixed(DensityMatrix<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint<T: Real> {
    pub trial: usize,
    /// Ensemble index of the input when drawn from the ensemble.
    pub input_index: Option<usize>,
    pub outcome: usize,
    /// `F(rho_0, rho_x)`.
    pub f_naive: T,
    /// `F(rho_0, rho_hat_B(x))`.
    pub f_bayes: T,
}

/// Fidelity of the naive estimate `rho_x` against the Bayesian mean
/// estimate for PGM outcomes drawn from `input`.
///
/// Outcomes are drawn from `Tr(E_x rho_0)` over the ensemble effects; the
/// residual outcome is conditioned away.
pub fn naive_vs_bayes<T: Real, R: Rng + ?Sized>(
    pgm: &PgmMeasurement<'_, T>,
    input: &InputState<T>,
    rng: &mut R,
    trials: usize,
) -> Result<Vec<ScatterPoint<T>>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    let ensemble = pgm.ensemble;
    let mut estimates: Vec<Option<DensityMatrix<T>>> = vec![None; ensemble.len()];
    let mut points = Vec::with_capacity(trials);
    for trial in 0..trials {
        let (rho0, input_index) = match input {
            InputState::FromEnsemble => {
                let a = sample_index(ensemble.prior().as_slice(), rng)?;
                (ensemble.state(a), Some(a))
            }
            InputState::Fixed(rho) => (rho, None),
        };
        let (probs, _) = pgm.outcome_probabilities(rho0)?;
        let probs: Vec<T> = probs.into_iter().map(|p| p.max(T::zero())).collect();
        let total = probs.iter().copied().fold(T::zero(), |s, v| s + v);
        if total.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::ZeroProbabilityOutcome { outcome: 0, probability: total.as_f64() });
        }
        let probs: Vec<T> = probs.into_iter().map(|p| p / total).collect();
        let x = sample_index(&probs, rng)?;
        if estimates[x].is_none() {
            estimates[x] = Some(pgm_bayes_estimator(pgm, x)?);
        }
        let bayes = estimates[x].as_ref().expect("estimate cached above");
        points.push(ScatterPoint {
            trial,
            input_index,
            outcome: x,
            f_naive: fidelity(rho0, ensemble.state(x))?,
            f_bayes: fidelity(rho0, bayes)?,
        });
    }
    Ok(points)
}

/// Random ensembles with `2 <= d <= 5` and `1 <= L <= 20`, cycling through
/// pure, Ginibre and mixed-rank kinds. Ensemble `i` is drawn from stream `i`.
pub fn identity_corpus<T: Real>(master_seed: u64, count: usize) -> Result<Vec<Ensemble<T>>> {
    const KINDS: [EnsembleKind; 3] = [EnsembleKind::PureHaar, EnsembleKind::Ginibre, EnsembleKind::MixedRank];
    (0..count)
        .map(|i| {
            let mut rng = RngStream::new(master_seed, i as u64);
            let d = rng.random_range(2..=5);
            let len = rng.random_range(1..=20);
            build_ensemble(KINDS[i % KINDS.len()], d, len, &mut rng)
        })
        .collect()
}

/// Worst deviations observed over a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdentityReport {
    pub ensembles: usize,
    /// `max |p(x|a) p_a / p(x) - Tr(E_a rho_x)|`.
    pub posterior: f64,
    /// `max |p(x) - p_x|`.
    pub marginal: f64,
    /// `max |Petz(rho_x)_a - p(a|x)|`.
    pub petz: f64,
    /// `max |sum E + E_perp - 1|`.
    pub completeness: f64,
    /// `max Tr(E_perp rho_a)`.
    pub residual_weight: f64,
}

impl IdentityReport {
    pub fn worst(&self) -> f64 {
        self.posterior.max(self.marginal).max(self.petz).max(self.completeness)
    }
}

/// Checks the swapped-index posterior and the Petz equivalence on every
/// outcome of every ensemble.
pub fn verify_identities<T: Real>(corpus: &[Ensemble<T>]) -> Result<IdentityReport> {
    let mut report = IdentityReport { ensembles: corpus.len(), ..Default::default() };
    for ensemble in corpus {
        let pgm = build_pgm(ensemble)?;
        report.completeness = report.completeness.max(pgm.completeness_defect().as_f64());
        for (a, rho) in ensemble.states().iter().enumerate() {
            let residual = rho.expectation(&pgm.residual).as_f64();
            report.residual_weight = report.residual_weight.max(residual);
            let routes = pgm.posterior_routes(a)?;
            report.posterior = report.posterior.max(max_deviation(&routes.bayes, &routes.swapped).as_f64());
            report.marginal = report.marginal.max((routes.marginal - ensemble.prior()[a]).abs().as_f64());
            let petz = pgm.petz_recovery(rho)?;
            report.petz = report
                .petz
                .max(max_deviation(petz.distribution.as_slice(), &routes.swapped).as_f64());
        }
    }
    Ok(report)
}

/// Posterior-mean state for PGM outcome `x`, built through the generic
/// Bayes estimator.
pub fn pgm_estimator_via_bayes<T: Real>(pgm: &PgmMeasurement<'_, T>, x: usize) -> Result<DensityMatrix<T>> {
    let posterior = Posterior::from_distribution(pgm_posterior(pgm, x)?);
    crate::bayes::bayes_estimator(pgm.ensemble, &posterior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PureState;

    fn basis_ensemble(d: usize) -> Ensemble<f64> {
        let states = (0..d).map(|k| DensityMatrix::from_pure(&PureState::basis(d, k))).collect();
        Ensemble::uniform(states, EnsembleKind::Custom).unwrap()
    }

    #[test]
    fn orthonormal_ensemble_gives_projective_measurement() {
        let e = basis_ensemble(3);
        let pgm = build_pgm(&e).unwrap();
        for (x, eff) in pgm.effects().iter().enumerate() {
            assert!(linalg::max_abs_diff(eff, e.state(x).matrix()) < 1e-12);
            let post = pgm_posterior(&pgm, x).unwrap();
            assert!(post.tv_distance(&ProbVector::point(3, x)).unwrap() < 1e-12);
            let est = pgm_bayes_estimator(&pgm, x).unwrap();
            assert!(linalg::max_abs_diff(est.matrix(), e.state(x).matrix()) < 1e-12);
            let petz = pgm.petz_recovery(e.state(x)).unwrap();
            assert!(petz.distribution.tv_distance(&ProbVector::point(3, x)).unwrap() < 1e-12);
        }
        assert!(linalg::max_abs(pgm.residual()) < 1e-12);
    }

    #[test]
    fn single_state_support_projector() {
        let rho = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let e: Ensemble<f64> = Ensemble::uniform(vec![rho.clone()], EnsembleKind::Custom).unwrap();
        let pgm = build_pgm(&e).unwrap();
        assert_eq!(pgm.support_rank(), 1);
        assert!(linalg::max_abs_diff(&pgm.effects()[0], rho.matrix()) < 1e-12);
        assert!((pgm.residual()[(1, 1)].re - 1.0).abs() < 1e-12);
        let est = pgm_bayes_estimator(&pgm, 0).unwrap();
        assert!(linalg::max_abs_diff(est.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn outcome_out_of_range() {
        let e = basis_ensemble(2);
        let pgm = build_pgm(&e).unwrap();
        assert!(matches!(pgm_posterior(&pgm, 2), Err(Error::OutcomeOutOfRange { outcome: 2, len: 2 })));
    }

    #[test]
    fn petz_dimension_mismatch() {
        let e = basis_ensemble(2);
        assert!(matches!(
            petz_recovery(&e, &DensityMatrix::maximally_mixed(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn naive_vs_bayes_on_orthonormal_and_single_state() {
        let e = basis_ensemble(2);
        let pgm = build_pgm(&e).unwrap();
        let rho0 = InputState::Fixed(e.state(0).clone());
        let mut rng = RngStream::new(1, 0);
        for p in naive_vs_bayes(&pgm, &rho0, &mut rng, 50).unwrap() {
            assert_eq!(p.outcome, 0);
            assert!((p.f_naive - 1.0).abs() < 1e-12 && (p.f_bayes - 1.0).abs() < 1e-12);
        }

        let rho = DensityMatrix::maximally_mixed(2);
        let single: Ensemble<f64> = Ensemble::uniform(vec![rho], EnsembleKind::Custom).unwrap();
        let pgm = build_pgm(&single).unwrap();
        let input = InputState::Fixed(DensityMatrix::from_pure(&PureState::basis(2, 1)));
        for p in naive_vs_bayes(&pgm, &input, &mut rng, 10).unwrap() {
            assert!((p.f_naive - p.f_bayes).abs() < 1e-12);
        }
        assert!(naive_vs_bayes(&pgm, &input, &mut rng, 0).is_err());
    }
}
