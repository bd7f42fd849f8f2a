use super::operator::{CMatrix, DensityOperator, HermitianOperator, C64};
use crate::error::{Error, Result};

/// Kronecker product of two density operators.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    DensityOperator::from_matrix_unchecked(a.matrix().kronecker(b.matrix()))
}

/// Kronecker product of two Hermitian operators.
pub fn tensor_operator(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::from_matrix_unchecked(a.matrix().kronecker(b.matrix()))
}

/// Reduced state on the factors listed in `keep` (kept in their original order).
pub fn partial_trace(rho: &DensityOperator, dims: &[usize], keep: &[usize]) -> Result<DensityOperator> {
    let m = partial_trace_matrix(rho.matrix(), dims, keep)?;
    Ok(DensityOperator::from_matrix_unchecked(m))
}

/// Partial trace of an arbitrary Hermitian operator.
pub fn partial_trace_operator(a: &HermitianOperator, dims: &[usize], keep: &[usize]) -> Result<HermitianOperator> {
    let m = partial_trace_matrix(a.matrix(), dims, keep)?;
    Ok(HermitianOperator::from_matrix_unchecked(m))
}

/// `Tr[A B]` for Hermitian `A`, `B` (real by construction).
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    // Tr[AB] = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

pub(crate) fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || total != m.nrows() {
        return Err(Error::DimensionMismatch(format!("factor dims {dims:?} multiply to {total}, operator has dim {}", m.nrows())));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("invalid keep list {keep:?} for {} factors", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();

    // Row-major strides of the full index.
    let mut stride = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * dims[i + 1];
    }
    let out_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    let offsets = |factors: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut idx| {
                let mut off = 0;
                for &f in factors.iter().rev() {
                    off += (idx % dims[f]) * stride[f];
                    idx /= dims[f];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept, out_dim);
    let traced_off = offsets(&traced, traced_dim);

    let mut out = CMatrix::from_element(out_dim, out_dim, C64::new(0.0, 0.0));
    for (i, &ri) in kept_off.iter().enumerate() {
        for (j, &cj) in kept_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &traced_off {
                acc += m[(ri + t, cj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::random_density;
    use crate::rng::SeededRng;

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_tensor() {
        let i2 = HermitianOperator::identity(2);
        assert_eq!(tensor_operator(&i2, &i2), HermitianOperator::identity(4));
    }

    #[test]
    fn basis_tensor() {
        let a = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityOperator::diagonal(&[0.0, 1.0]).unwrap();
        assert_eq!(tensor(&a, &b).as_operator(), &HermitianOperator::basis_projector(4, 1));
    }

    #[test]
    fn tensor_trace_multiplies() {
        let mut rng = SeededRng::new(9, 0);
        for _ in 0..10 {
            let r = random_density(3, 3, &mut rng);
            let s = random_density(2, 1, &mut rng);
            assert!((tensor(&r, &s).trace() - r.trace() * s.trace()).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_marginals_are_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = DensityOperator::pure(&[C64::new(h, 0.0), z, z, C64::new(h, 0.0)]).unwrap();
        let mixed = DensityOperator::maximally_mixed(2);
        for keep in [[0usize], [1]] {
            let red = partial_trace(&bell, &[2, 2], &keep).unwrap();
            assert!(max_diff(red.matrix(), mixed.matrix()) < 1e-12);
        }
    }

    #[test]
    fn product_recovers_factor() {
        let mut rng = SeededRng::new(9, 1);
        let r = random_density(3, 2, &mut rng);
        let s = random_density(4, 4, &mut rng);
        let rs = tensor(&r, &s);
        assert!(max_diff(partial_trace(&rs, &[3, 4], &[0]).unwrap().matrix(), r.matrix()) < 1e-12);
        assert!(max_diff(partial_trace(&rs, &[3, 4], &[1]).unwrap().matrix(), s.matrix()) < 1e-12);
    }

    #[test]
    fn three_factor_middle() {
        let mut rng = SeededRng::new(9, 2);
        let a = random_density(2, 2, &mut rng);
        let b = random_density(3, 2, &mut rng);
        let c = random_density(2, 1, &mut rng);
        let abc = tensor(&tensor(&a, &b), &c);
        let ac = partial_trace(&abc, &[2, 3, 2], &[0, 2]).unwrap();
        assert!(max_diff(ac.matrix(), tensor(&a, &c).matrix()) < 1e-12);
        let b_only = partial_trace(&abc, &[2, 3, 2], &[1]).unwrap();
        assert!(max_diff(b_only.matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let r = DensityOperator::maximally_mixed(4);
        assert!(partial_trace(&r, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&r, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn trace_product_matches_dense() {
        let mut rng = SeededRng::new(9, 3);
        let a = random_density(4, 4, &mut rng);
        let b = random_density(4, 2, &mut rng);
        let dense = (a.matrix() * b.matrix()).trace().re;
        assert!((trace_product(a.matrix(), b.matrix()) - dense).abs() < 1e-12);
    }
}
