//! Born likelihoods, Bayes updates, the Bayesian mean estimator, and risk.

use crate::error::{Error, Result};
use crate::fidelity::infidelity;
use crate::linalg;
use crate::scalar::Real;
use crate::state::{unitarity_defect, DensityMatrix, Ensemble, Povm, ProbVector, Unitary};
use crate::tolerance::Tolerances;

/// Posteriors over more states, or after more updates, than this are kept
/// as log-weights.
pub const LOG_SPACE_THRESHOLD: usize = 1000;

/// Projective measurement `{U|x><x|U^dagger}` onto the columns of `u`.
pub fn basis_povm<T: Real>(u: &Unitary<T>) -> Result<Povm<T>> {
    let defect = unitarity_defect(u.matrix());
    if defect > T::lit(Tolerances::current::<T>().unitarity) {
        return Err(Error::NotUnitary(defect.as_f64()));
    }
    Ok(Povm::from_basis(u))
}

fn clamp_probability<T: Real>(p: T, tol: T) -> Result<T> {
    if p >= T::zero() {
        Ok(p)
    } else if p >= -tol {
        Ok(T::zero())
    } else {
        Err(Error::NegativeProbability(p.as_f64()))
    }
}

/// Born distribution `p(x) = Tr(E_x rho)`.
pub fn likelihood<T: Real>(povm: &Povm<T>, rho: &DensityMatrix<T>) -> Result<ProbVector<T>> {
    if povm.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), found: rho.dim() });
    }
    let tol = Tolerances::current::<T>();
    let values = (0..povm.len())
        .map(|x| clamp_probability(povm.born(x, rho), T::lit(tol.likelihood_clamp)))
        .collect::<Result<Vec<_>>>()?;
    let sum = values.iter().copied().fold(T::zero(), |a, b| a + b);
    if (sum - T::one()).abs() <= T::lit(tol.povm_completeness) {
        Ok(ProbVector::normalized_unchecked(values))
    } else {
        ProbVector::raw(values)
    }
}

/// Conditional probabilities `p(x|a)` laid out as one row per outcome.
pub fn likelihood_table<T: Real>(povm: &Povm<T>, ensemble: &Ensemble<T>) -> Result<Vec<Vec<T>>> {
    if povm.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), found: ensemble.dim() });
    }
    let tol = T::lit(Tolerances::current::<T>().likelihood_clamp);
    (0..povm.len())
        .map(|x| {
            ensemble
                .states()
                .iter()
                .map(|rho| clamp_probability(povm.born(x, rho), tol))
                .collect()
        })
        .collect()
}

/// Distribution over ensemble members after `update_count` Bayes updates.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior<T: Real> {
    weights: Vec<T>,
    log_weights: Option<Vec<T>>,
    update_count: usize,
}

impl<T: Real> Posterior<T> {
    pub fn prior(ensemble: &Ensemble<T>) -> Self {
        Self::from_distribution(ensemble.prior().clone())
    }

    pub fn from_distribution(p: ProbVector<T>) -> Self {
        let weights = p.into_vec();
        let log_weights = (weights.len() > LOG_SPACE_THRESHOLD).then(|| weights.iter().map(|w| w.ln()).collect());
        Self { weights, log_weights, update_count: 0 }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn distribution(&self) -> ProbVector<T> {
        ProbVector::normalized_unchecked(self.weights.clone())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn update_count(&self) -> usize {
        self.update_count
    }

    pub fn is_log_space(&self) -> bool {
        self.log_weights.is_some()
    }

    /// `sum_a w_a p(x|a)`.
    pub fn predictive(&self, likelihood: &[T]) -> T {
        self.weights
            .iter()
            .zip(likelihood)
            .fold(T::zero(), |acc, (w, l)| acc + *w * *l)
    }

    /// Multiplies in the likelihood row of the observed outcome and renormalizes.
    pub fn update_in_place(&mut self, likelihood: &[T], outcome: usize) -> Result<()> {
        if likelihood.len() != self.weights.len() {
            return Err(Error::LengthMismatch { expected: self.weights.len(), found: likelihood.len() });
        }
        let evidence = self.predictive(likelihood);
        let floor = T::lit(Tolerances::current::<T>().min_outcome_probability);
        if evidence.partial_cmp(&floor) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::ZeroProbabilityOutcome { outcome, probability: evidence.as_f64() });
        }
        if self.log_weights.is_none() && self.update_count >= LOG_SPACE_THRESHOLD {
            self.log_weights = Some(self.weights.iter().map(|w| w.ln()).collect());
        }
        match &mut self.log_weights {
            Some(logs) => {
                for (lw, l) in logs.iter_mut().zip(likelihood) {
                    *lw += l.ln();
                }
                let max = logs.iter().copied().reduce(|a, b| a.max(b)).unwrap_or_else(T::zero);
                let mut total = T::zero();
                for (w, lw) in self.weights.iter_mut().zip(logs.iter_mut()) {
                    *lw -= max;
                    *w = lw.exp();
                    total += *w;
                }
                for w in &mut self.weights {
                    *w /= total;
                }
            }
            None => {
                for (w, l) in self.weights.iter_mut().zip(likelihood) {
                    *w = *w * *l / evidence;
                }
            }
        }
        self.update_count += 1;
        Ok(())
    }
}

/// `p(x) = sum_a w_a Tr(E_x rho_a)`, cross-checked against `Tr(E_x rho_bar)`
/// for the posterior-mean state `rho_bar`.
pub fn total_probability<T: Real>(
    povm: &Povm<T>,
    ensemble: &Ensemble<T>,
    posterior: &Posterior<T>,
) -> Result<ProbVector<T>> {
    if posterior.len() != ensemble.len() {
        return Err(Error::LengthMismatch { expected: ensemble.len(), found: posterior.len() });
    }
    let table = likelihood_table(povm, ensemble)?;
    let by_states: Vec<T> = table.iter().map(|row| posterior.predictive(row)).collect();
    let mean = bayes_estimator(ensemble, posterior)?;
    let tol = Tolerances::current::<T>();
    for (x, &p) in by_states.iter().enumerate() {
        let q = povm.born(x, &mean);
        let dev = (p - q).abs();
        if dev > T::lit(tol.identity) {
            return Err(Error::IdentityViolated(dev.as_f64()));
        }
    }
    let sum = by_states.iter().copied().fold(T::zero(), |a, b| a + b);
    if (sum - T::one()).abs() <= T::lit(tol.povm_completeness) {
        Ok(ProbVector::normalized_unchecked(by_states))
    } else {
        ProbVector::raw(by_states)
    }
}

/// Posterior after observing `outcome` of `povm`.
pub fn bayes_update<T: Real>(
    posterior: &Posterior<T>,
    ensemble: &Ensemble<T>,
    povm: &Povm<T>,
    outcome: usize,
) -> Result<Posterior<T>> {
    if outcome >= povm.len() {
        return Err(Error::OutcomeOutOfRange { outcome, len: povm.len() });
    }
    if posterior.len() != ensemble.len() {
        return Err(Error::LengthMismatch { expected: ensemble.len(), found: posterior.len() });
    }
    if povm.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch { expected: ensemble.dim(), found: povm.dim() });
    }
    let tol = T::lit(Tolerances::current::<T>().likelihood_clamp);
    let row = ensemble
        .states()
        .iter()
        .map(|rho| clamp_probability(povm.born(outcome, rho), tol))
        .collect::<Result<Vec<_>>>()?;
    let mut next = posterior.clone();
    next.update_in_place(&row, outcome)?;
    Ok(next)
}

/// Posterior mean `sum_a p(a|x) rho_a`.
pub fn bayes_estimator<T: Real>(ensemble: &Ensemble<T>, posterior: &Posterior<T>) -> Result<DensityMatrix<T>> {
    DensityMatrix::mixture(posterior.weights(), ensemble.states())
}

/// `R(rho, est) = sum_x Tr(E_x rho) (1 - F(rho, est(x)))`. Outcomes of zero
/// probability are skipped, so `estimator` is never called for them.
pub fn risk<T: Real, F>(rho: &DensityMatrix<T>, estimator: F, povm: &Povm<T>) -> Result<T>
where
    F: Fn(usize) -> Result<DensityMatrix<T>>,
{
    let p = likelihood(povm, rho)?;
    let mut acc = T::zero();
    for (x, &px) in p.as_slice().iter().enumerate() {
        if px > T::zero() {
            acc += px * infidelity(rho, &estimator(x)?)?;
        }
    }
    Ok(acc)
}

/// `sum_a w_a R_a`.
pub fn average_risk<T: Real>(weights: &ProbVector<T>, risks: &[T]) -> Result<T> {
    if weights.len() != risks.len() {
        return Err(Error::LengthMismatch { expected: weights.len(), found: risks.len() });
    }
    Ok(weights
        .as_slice()
        .iter()
        .zip(risks)
        .fold(T::zero(), |acc, (w, r)| acc + *w * *r))
}

/// Smallest eigenvalue over the ensemble states.
pub fn min_state_eigenvalue<T: Real>(ensemble: &Ensemble<T>) -> T {
    ensemble
        .states()
        .iter()
        .flat_map(|s| linalg::hermitian_eigenvalues(s.matrix()))
        .reduce(|a, b| a.min(b))
        .unwrap_or_else(T::zero)
}
