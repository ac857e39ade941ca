//! Dense complex linear algebra helpers built on `nalgebra`.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::scalar::Real;

pub type C<T> = Complex<T>;
pub type ComplexMatrix<T> = DMatrix<Complex<T>>;
pub type ComplexVector<T> = DVector<Complex<T>>;

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub fn identity<T: Real>(d: usize) -> ComplexMatrix<T> {
    DMatrix::identity(d, d)
}

/// Largest absolute entry.
pub fn max_abs<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn max_abs_diff<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).modulus()))
}

pub fn is_finite<T: Real>(m: &ComplexMatrix<T>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Max abs entry of `m - m^dagger`.
pub fn hermiticity_defect<T: Real>(m: &ComplexMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).modulus());
        }
    }
    worst
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let half = T::lit(0.5);
    let n = m.nrows();
    ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()).scale(half))
}

pub fn trace<T: Real>(m: &ComplexMatrix<T>) -> Complex<T> {
    m.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + *z)
}

/// `Re Tr(a b)` without forming the product.
pub fn trace_product_re<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    let n = a.nrows();
    let mut acc = T::zero();
    for i in 0..n {
        for k in 0..n {
            let x = a[(i, k)];
            let y = b[(k, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// `Re <v| m |v>`.
pub fn expectation<T: Real>(v: &ComplexVector<T>, m: &ComplexMatrix<T>) -> T {
    let n = v.len();
    let mut acc = T::zero();
    for i in 0..n {
        let mut row = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            row += m[(i, j)] * v[j];
        }
        let z = v[i].conj() * row;
        acc += z.re;
    }
    acc
}

/// `|<u|v>|^2`.
pub fn overlap_sq<T: Real>(u: &ComplexVector<T>, v: &ComplexVector<T>) -> T {
    u.dotc(v).norm_sqr()
}

/// `|v><v|`.
pub fn projector<T: Real>(v: &ComplexVector<T>) -> ComplexMatrix<T> {
    v * v.adjoint()
}

/// Eigendecomposition of a Hermitian matrix. Only the lower triangle is read.
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

pub fn hermitian_eigen<T: Real>(m: &ComplexMatrix<T>) -> HermitianEigen<T> {
    let eig = SymmetricEigen::new(hermitian_part(m));
    HermitianEigen {
        values: eig.eigenvalues.iter().copied().collect(),
        vectors: eig.eigenvectors,
    }
}

pub fn hermitian_eigenvalues<T: Real>(m: &ComplexMatrix<T>) -> Vec<T> {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect()
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(Lambda) V^dagger`.
    pub fn apply(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] = scaled[(i, j)].scale(s);
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().reduce(|a, b| a.min(b)).unwrap_or_else(T::zero)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().reduce(|a, b| a.max(b)).unwrap_or_else(T::zero)
    }
}

/// Square root of a PSD matrix, clamping eigenvalues in `[-tol, 0)` to zero.
///
/// Returns the offending eigenvalue when one lies below `-tol`.
pub fn psd_sqrt<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Result<ComplexMatrix<T>, T> {
    let eig = hermitian_eigen(m);
    let min = eig.min_value();
    if min < -tol {
        return Err(min);
    }
    Ok(sqrt_from_eigen(&eig))
}

/// Square root from a Hermitian eigendecomposition. Eigenvalues at the
/// round-off level of the largest one are dropped: their square roots would
/// otherwise inject errors near `sqrt(eps)`.
pub fn sqrt_from_eigen<T: Real>(eig: &HermitianEigen<T>) -> ComplexMatrix<T> {
    let n = T::lit(eig.values.len() as f64);
    let floor = T::default_epsilon() * n * eig.max_value().max(T::zero());
    eig.apply(|x| if x > floor { x.sqrt() } else { T::zero() })
}

/// Inverse square root restricted to the support of a PSD matrix.
///
/// Eigenvalues below `rel_cutoff * lambda_max` are treated as zero. Returns
/// the pseudo-inverse square root, the projector onto the retained support,
/// and its rank.
pub fn pinv_sqrt<T: Real>(
    m: &ComplexMatrix<T>,
    rel_cutoff: T,
) -> (ComplexMatrix<T>, ComplexMatrix<T>, usize) {
    let eig = hermitian_eigen(m);
    let cutoff = rel_cutoff * eig.max_value().max(T::zero());
    let keep = |x: T| x > cutoff && x > T::zero();
    let rank = eig.values.iter().filter(|&&x| keep(x)).count();
    let inv = eig.apply(|x| if keep(x) { T::one() / x.sqrt() } else { T::zero() });
    let support = eig.apply(|x| if keep(x) { T::one() } else { T::zero() });
    (inv, support, rank)
}

/// `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, evaluated as the squared trace
/// norm of `sqrt(rho) sqrt(sigma)`. Singular values carry absolute error near
/// machine epsilon, unlike square roots of the eigenvalues of the product.
pub fn uhlmann_from_sqrts<T: Real>(sqrt_rho: &ComplexMatrix<T>, sqrt_sigma: &ComplexMatrix<T>) -> T {
    let s = (sqrt_rho * sqrt_sigma).singular_values().iter().fold(T::zero(), |acc, &x| acc + x);
    s * s
}

/// Determinant of a 2x2 Hermitian matrix (real).
#[inline]
pub fn det2_hermitian<T: Real>(m: &ComplexMatrix<T>) -> T {
    m[(0, 0)].re * m[(1, 1)].re - m[(0, 1)].norm_sqr()
}
