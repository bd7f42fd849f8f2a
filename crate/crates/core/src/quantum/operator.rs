// Validation uses negated float comparisons on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::eig_hermitian_matrix;
use super::{DENSITY_TOL, HERMITIAN_TOL};
use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct HermitianOperator {
    m: CMatrix,
}

/// Positive semidefinite Hermitian operator of unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct DensityOperator {
    op: HermitianOperator,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<MatrixRepr> for CMatrix {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        if r.dim == 0 || r.entries.len() != r.dim || r.entries.iter().any(|row| row.len() != r.dim) {
            return Err(Error::DimensionMismatch(format!("matrix entries do not form a {0}x{0} array", r.dim)));
        }
        Ok(CMatrix::from_fn(r.dim, r.dim, |i, j| {
            let [re, im] = r.entries[i][j];
            C64::new(re, im)
        }))
    }
}

fn repr(m: &CMatrix) -> MatrixRepr {
    MatrixRepr { dim: m.nrows(), entries: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect() }
}

impl TryFrom<MatrixRepr> for HermitianOperator {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        HermitianOperator::new(CMatrix::try_from(r)?)
    }
}

impl From<HermitianOperator> for MatrixRepr {
    fn from(h: HermitianOperator) -> Self {
        repr(&h.m)
    }
}

impl TryFrom<MatrixRepr> for DensityOperator {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        DensityOperator::new(CMatrix::try_from(r)?)
    }
}

impl From<DensityOperator> for MatrixRepr {
    fn from(d: DensityOperator) -> Self {
        repr(&d.op.m)
    }
}

pub(crate) fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A^dagger) / 2`.
pub(crate) fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

impl HermitianOperator {
    /// Validates Hermiticity within [`HERMITIAN_TOL`] and symmetrizes away the residue.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
        }
        let defect = hermitian_defect(&m);
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { m: symmetrize(&m) })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        debug_assert!(hermitian_defect(&m) <= 1e-8);
        Self { m: symmetrize(&m) }
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self { m: CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) }) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    /// `|i><i|` in dimension `dim`.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, i)] = C64::new(1.0, 0.0);
        Self { m }
    }

    /// `|psi><psi|` for an arbitrary (unnormalized) vector.
    pub fn outer(psi: &[C64]) -> Self {
        let n = psi.len();
        Self { m: CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian_matrix(&self.m).values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: &self.m * C64::new(c, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self { m: &self.m - &other.m })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.m - &other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("dimensions {a} and {b} differ")));
    }
    Ok(())
}

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::from_operator(HermitianOperator::new(m)?)
    }

    pub fn from_operator(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if !((tr - 1.0).abs() <= DENSITY_TOL) {
            return Err(Error::InvalidTrace(tr));
        }
        let min = op.min_eigenvalue();
        if min < -DENSITY_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { op })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { op: HermitianOperator::from_matrix_unchecked(m) }
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::from_operator(HermitianOperator::diagonal(probs))
    }

    /// Pure state `|psi><psi|` after normalization.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        Self::from_operator(HermitianOperator::outer(psi).scale(1.0 / norm2))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.op.m
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.op
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }
}

impl AsRef<HermitianOperator> for DensityOperator {
    fn as_ref(&self) -> &HermitianOperator {
        &self.op
    }
}

impl AsRef<HermitianOperator> for HermitianOperator {
    fn as_ref(&self) -> &HermitianOperator {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_format() {
        let rho = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&rho).unwrap();
        assert_eq!(s, r#"{"dim":2,"entries":[[[0.25,0.0],[0.0,0.0]],[[0.0,0.0],[0.75,0.0]]]}"#);
        let back: DensityOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn validation() {
        let not_herm = CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(not_herm), Err(Error::NotHermitian(_))));
        assert!(matches!(DensityOperator::diagonal(&[0.5, 0.6]), Err(Error::InvalidTrace(_))));
        assert!(matches!(DensityOperator::diagonal(&[1.5, -0.5]), Err(Error::NotPsd(_))));
        let bad = r#"{"dim":2,"entries":[[[1,0]],[[0,0],[0,0]]]}"#;
        assert!(serde_json::from_str::<DensityOperator>(bad).is_err());
    }
}
