//! Squared Uhlmann fidelity `F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`,
//! the distance underlying every risk in the crate.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::state::DensityMatrix;

/// Fidelity with fast paths for pure states (`<psi|sigma|psi>`) and qubits
/// (`Tr(rho sigma) + 2 sqrt(det rho det sigma)`).
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    check_dims(rho, sigma)?;
    let f = if let Some(psi) = rho.pure_vector() {
        sigma.overlap(psi)
    } else if let Some(phi) = sigma.pure_vector() {
        rho.overlap(phi)
    } else if rho.dim() == 2 {
        let a = linalg::det2_hermitian(rho.matrix()).max(T::zero());
        let b = linalg::det2_hermitian(sigma.matrix()).max(T::zero());
        linalg::trace_product_re(rho.matrix(), sigma.matrix()) + T::lit(2.0) * (a * b).sqrt()
    } else {
        linalg::uhlmann_from_sqrts(rho.sqrt(), sigma.sqrt())
    };
    Ok(clamp_unit(f))
}

/// Fidelity through the general matrix square-root formula, ignoring any
/// pure-state or qubit shortcut.
pub fn uhlmann_fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    check_dims(rho, sigma)?;
    Ok(clamp_unit(linalg::uhlmann_from_sqrts(rho.sqrt(), sigma.sqrt())))
}

pub fn infidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    Ok(T::one() - fidelity(rho, sigma)?)
}

fn check_dims<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok(())
}

fn clamp_unit<T: Real>(f: T) -> T {
    f.max(T::zero()).min(T::one())
}
