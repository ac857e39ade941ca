//! Numerical tolerances.
//!
//! One record carries every threshold used by validation and identity
//! checks. The double-precision record can be replaced process-wide with
//! [`Tolerances::set_global`], which is how configuration files tighten or
//! loosen checks uniformly.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max abs entry of `M - M^dagger`.
    pub hermitian: f64,
    /// Smallest admissible eigenvalue is `-psd`. Eigenvalues in `[-psd, 0)` are clamped.
    pub psd: f64,
    pub trace: f64,
    /// Euclidean norm deviation for pure states.
    pub pure_norm: f64,
    /// Entrywise deviation of a POVM effect sum from the identity.
    pub povm_completeness: f64,
    /// Entrywise deviation of `U^dagger U` from the identity.
    pub unitarity: f64,
    /// Sum deviation for normalized probability vectors.
    pub prob_sum: f64,
    /// Born probabilities in `[-likelihood_clamp, 0)` are set to zero.
    pub likelihood_clamp: f64,
    /// Relative eigenvalue cutoff for pseudo-inverse square roots.
    pub pinv_cutoff: f64,
    /// Max disagreement between two routes to the same quantity.
    pub identity: f64,
    /// Smallest admissible `|R_jj|` in a QR factorization.
    pub qr_pivot: f64,
    /// Smallest admissible probability of an observed outcome.
    pub min_outcome_probability: f64,
    /// Agreement between a frame potential and its Haar value.
    pub frame_potential: f64,
}

impl Tolerances {
    pub const fn double() -> Self {
        Self {
            hermitian: 1e-10,
            psd: 1e-10,
            trace: 1e-10,
            pure_norm: 1e-12,
            povm_completeness: 1e-9,
            unitarity: 1e-10,
            prob_sum: 1e-12,
            likelihood_clamp: 1e-12,
            pinv_cutoff: 1e-12,
            identity: 1e-8,
            qr_pivot: 1e-14,
            min_outcome_probability: 1e-300,
            frame_potential: 1e-8,
        }
    }

    pub const fn single() -> Self {
        Self {
            hermitian: 1e-5,
            psd: 1e-5,
            trace: 1e-5,
            pure_norm: 1e-5,
            povm_completeness: 1e-4,
            unitarity: 1e-5,
            prob_sum: 1e-5,
            likelihood_clamp: 1e-6,
            pinv_cutoff: 1e-6,
            identity: 1e-3,
            qr_pivot: 1e-6,
            min_outcome_probability: 1e-37,
            frame_potential: 1e-3,
        }
    }

    /// Tolerances in effect for scalar type `T`.
    ///
    /// A global override only applies to `f64`.
    pub fn current<T: Real>() -> Self {
        if T::is_double() {
            if let Some(t) = *GLOBAL.read().unwrap_or_else(|e| e.into_inner()) {
                return t;
            }
        }
        T::default_tolerances()
    }

    pub fn set_global(tol: Tolerances) {
        *GLOBAL.write().unwrap_or_else(|e| e.into_inner()) = Some(tol);
    }

    pub fn reset_global() {
        *GLOBAL.write().unwrap_or_else(|e| e.into_inner()) = None;
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::double()
    }
}

static GLOBAL: RwLock<Option<Tolerances>> = RwLock::new(None);
