//! Closed forms for pure-state ensembles measured in Haar-random bases.
//!
//! Values are evaluated exactly in rational arithmetic and converted to
//! `f64` at the end, so no factorial overflows for any `(d, N)`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn check(d: usize, n_shots: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidConfig(format!("dimension must be at least 2, got {d}")));
    }
    if n_shots < 1 {
        return Err(Error::InvalidConfig("number of measurements must be at least 1".into()));
    }
    Ok(())
}

/// Dimension `C(N + d - 1, N)` of the symmetric subspace of `(C^d)^{⊗N}`.
pub fn sym_subspace_dim(d: usize, n_shots: usize) -> BigUint {
    // Multiplicative binomial; each partial product is itself a binomial.
    let mut acc = BigUint::one();
    for k in 1..=n_shots as u64 {
        acc = acc * BigUint::from(d as u64 - 1 + k) / BigUint::from(k);
    }
    acc
}

/// `f(d, N) = (d+3) (N+d-1)! / (d^N (d+1)^2 N! (d-1)!)`.
pub fn multi_shot_fidelity_exact(d: usize, n_shots: usize) -> Result<BigRational> {
    check(d, n_shots)?;
    let (d, n) = (d as u64, n_shots as u64);
    let numer = BigInt::from(d + 3) * factorial(n + d - 1);
    let denom = BigInt::from(d).pow(n as u32)
        * BigInt::from((d + 1) * (d + 1))
        * factorial(n)
        * factorial(d - 1);
    Ok(BigRational::new(numer, denom))
}

/// Upper bound `1 - f(d, N)` on the Haar-averaged infidelity after `N`
/// random-basis measurements of a Haar-random pure state.
pub fn multi_shot_infidelity_bound(d: usize, n_shots: usize) -> Result<f64> {
    let f = multi_shot_fidelity_exact(d, n_shots)?;
    Ok(1.0 - f.to_f64().unwrap_or(0.0))
}

/// `(d+3) / (d+1)^2`: average fidelity of the Bayes estimate after one
/// measurement of a Haar-random pure state.
pub fn single_shot_pure_fidelity_exact(d: usize) -> Result<BigRational> {
    check(d, 1)?;
    let d = d as i64;
    Ok(BigRational::new(BigInt::from(d + 3), BigInt::from((d + 1) * (d + 1))))
}

pub fn single_shot_pure_fidelity(d: usize) -> Result<f64> {
    Ok(single_shot_pure_fidelity_exact(d)?.to_f64().unwrap_or(0.0))
}

/// `1 - (d+3)/(d+1)^2`.
pub fn single_shot_pure_infidelity(d: usize) -> Result<f64> {
    Ok(1.0 - single_shot_pure_fidelity(d)?)
}
