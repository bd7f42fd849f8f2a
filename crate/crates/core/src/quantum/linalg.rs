use nalgebra::SymmetricEigen;

use super::operator::{CMatrix, HermitianOperator, C64};
use super::SUPPORT_CUTOFF;

/// Spectral decomposition `A = V diag(values) V^dagger`, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        from_spectrum(self, |l| l)
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// Non-Hermitian matrices are rejected when the [`HermitianOperator`] is built.
pub fn eig_hermitian(a: &HermitianOperator) -> Eigen {
    eig_hermitian_matrix(a.matrix())
}

pub(crate) fn eig_hermitian_matrix(m: &CMatrix) -> Eigen {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

/// `V diag(f(values)) V^dagger`.
pub(crate) fn from_spectrum(e: &Eigen, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = e.values.len();
    let mut scaled = e.vectors.clone();
    for (c, &l) in e.values.iter().enumerate() {
        let w = C64::new(f(l), 0.0);
        for r in 0..n {
            scaled[(r, c)] *= w;
        }
    }
    scaled * e.vectors.adjoint()
}

/// Pseudo-inverse square root: eigenvalues at or below `SUPPORT_CUTOFF * lambda_max`
/// are mapped to zero.
pub(crate) fn inverse_sqrt_on_support(m: &CMatrix) -> CMatrix {
    let e = eig_hermitian_matrix(m);
    let cutoff = SUPPORT_CUTOFF * e.values.first().copied().unwrap_or(0.0).max(0.0);
    from_spectrum(&e, |l| if l > cutoff && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 })
}
