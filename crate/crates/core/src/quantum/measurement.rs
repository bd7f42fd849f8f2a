use serde::{Deserialize, Serialize};

use super::linalg::{eig_hermitian_matrix, inverse_sqrt_on_support};
use super::operator::{hermitian_defect, same_dim, symmetrize, CMatrix, DensityOperator, HermitianOperator};
use super::ops::trace_product;
use super::POVM_TOL;
use crate::error::{Error, Result};
use crate::prob::{cumulative, sample_cdf};
use crate::rng::SeededRng;

/// Largest tolerated deviation of outcome probabilities from a unit total.
const OUTCOME_MASS_TOL: f64 = 1e-6;

/// Measurement whose last element completes the sum to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
}

impl Povm {
    /// Appends `I - sum(elements)` and validates the result.
    pub fn with_completion(mut elements: Vec<HermitianOperator>) -> Result<Self> {
        let dim = elements.first().map(HermitianOperator::dim).ok_or_else(|| Error::InvalidInput("empty POVM".into()))?;
        let mut rest = CMatrix::identity(dim, dim);
        for e in &elements {
            same_dim(dim, e.dim())?;
            rest -= e.matrix();
        }
        elements.push(HermitianOperator::from_matrix_unchecked(symmetrize(&rest)));
        Self::new(elements)
    }

    /// Validates positivity and completeness within [`POVM_TOL`].
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let dim = elements.first().map(HermitianOperator::dim).ok_or_else(|| Error::InvalidInput("empty POVM".into()))?;
        let mut total = CMatrix::zeros(dim, dim);
        for (k, e) in elements.iter().enumerate() {
            same_dim(dim, e.dim())?;
            let min = e.min_eigenvalue();
            if min < -POVM_TOL {
                return Err(Error::Constraint(format!("POVM element {k} has eigenvalue {min:e}")));
            }
            total += e.matrix();
        }
        let dev = (total - CMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > POVM_TOL {
            return Err(Error::Constraint(format!("POVM elements sum to identity only within {dev:e}")));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// Index of the completion element (always the last one).
    pub fn completion_index(&self) -> usize {
        self.elements.len() - 1
    }
}

/// `T_k = S^{-1/2} L_k S^{-1/2}` with `S = sum L_k` inverted on its support,
/// followed by the completion `I - sum T_k`.
pub fn pretty_good_measurement(ops: &[HermitianOperator]) -> Result<Povm> {
    let dim = ops.first().map(HermitianOperator::dim).ok_or_else(|| Error::InvalidInput("no operators".into()))?;
    let mut sum = CMatrix::zeros(dim, dim);
    for op in ops {
        same_dim(dim, op.dim())?;
        let min = op.min_eigenvalue();
        if min < -POVM_TOL {
            return Err(Error::NotPsd(min));
        }
        sum += op.matrix();
    }
    if sum.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::InvalidInput("all operators are zero".into()));
    }
    let root = inverse_sqrt_on_support(&sum);
    let elements = ops.iter().map(|op| HermitianOperator::from_matrix_unchecked(symmetrize(&(&root * op.matrix() * &root)))).collect();
    Povm::with_completion(elements)
}

/// `Tr[T_k rho]` for each element, clamped at zero.
///
/// A total deviating from one by more than `1e-6` is an error rather than dust.
pub fn outcome_probabilities(state: &DensityOperator, povm: &Povm) -> Result<Vec<f64>> {
    same_dim(state.dim(), povm.dim())?;
    let raw: Vec<f64> = povm.elements().iter().map(|t| trace_product(t.matrix(), state.matrix())).collect();
    let total: f64 = raw.iter().sum();
    if (total - 1.0).abs() > OUTCOME_MASS_TOL {
        return Err(Error::ProbabilityMass(total));
    }
    let clamped: Vec<f64> = raw.iter().map(|p| p.max(0.0)).collect();
    let norm: f64 = clamped.iter().sum();
    Ok(clamped.into_iter().map(|p| p / norm).collect())
}

/// Samples a measurement outcome.
pub fn measure(state: &DensityOperator, povm: &Povm, rng: &mut SeededRng) -> Result<usize> {
    let probs = outcome_probabilities(state, povm)?;
    Ok(sample_cdf(&cumulative(&probs), rng.uniform()))
}

/// Smallest eigenvalue of `2(I - S) + 4T - (I - (S+T)^{-1/2} S (S+T)^{-1/2})`.
pub fn hayashi_nagaoka_check(s: &HermitianOperator, t: &HermitianOperator) -> Result<f64> {
    same_dim(s.dim(), t.dim())?;
    let dim = s.dim();
    let s_eig = s.eigenvalues();
    if s_eig.last().copied().unwrap_or(0.0) < -POVM_TOL || s_eig[0] > 1.0 + POVM_TOL {
        return Err(Error::Constraint(format!("S must satisfy 0 <= S <= I, spectrum spans [{:e}, {:e}]", s_eig.last().unwrap(), s_eig[0])));
    }
    let t_min = t.min_eigenvalue();
    if t_min < -POVM_TOL {
        return Err(Error::Constraint(format!("T must be PSD, min eigenvalue {t_min:e}")));
    }
    let id = CMatrix::identity(dim, dim);
    let root = inverse_sqrt_on_support(&(s.matrix() + t.matrix()));
    let error_op = &id - &root * s.matrix() * &root;
    let two = nalgebra::Complex::new(2.0, 0.0);
    let four = nalgebra::Complex::new(4.0, 0.0);
    let slack = (&id - s.matrix()) * two + t.matrix() * four - error_op;
    debug_assert!(hermitian_defect(&slack) < 1e-8);
    Ok(*eig_hermitian_matrix(&symmetrize(&slack)).values.last().unwrap())
}
