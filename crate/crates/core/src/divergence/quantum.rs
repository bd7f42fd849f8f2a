//! Quantum Neyman-Pearson test for states that are classical on a first register.

use super::{check_epsilon, DivergenceResult, Method, Witness};
use crate::error::{Error, Result};
use crate::quantum::{eig_hermitian_matrix as eigh, CMatrix, DensityOperator, HermitianOperator, C64};

const MAX_ITERATIONS: usize = 200;
/// Off-diagonal block entries allowed in a classical register.
const CLASSICAL_TOL: f64 = 1e-10;
/// Boundary eigenvalues: `|l| < BOUNDARY_REL * scale`.
const BOUNDARY_REL: f64 = 1e-9;
/// Required accuracy of `Tr[Gamma rho] = 1 - eps`.
const CONSTRAINT_TOL: f64 = 1e-10;

/// Optimal test for `rho^{UB}` against `rho^U (x) rho^B`, stored per classical block.
#[derive(Clone, Debug)]
pub struct CqNpTest {
    pub lambda: f64,
    pub boundary_weight: f64,
    /// Diagonal blocks of the test; block `u` is the operator on B paired with `|u><u|`.
    pub blocks: Vec<HermitianOperator>,
    pub positive_rank: usize,
    pub boundary_rank: usize,
    /// `Tr[Gamma rho]`.
    pub acceptance: f64,
    /// `Tr[Gamma (rho^U (x) rho^B)]`.
    pub objective: f64,
}

struct CqBlocks {
    /// `p(u) rho_u`.
    weighted: Vec<CMatrix>,
    pu: Vec<f64>,
    rho_b: CMatrix,
}

fn split_blocks(state: &DensityOperator, dim_u: usize) -> Result<CqBlocks> {
    let d = state.dim();
    if dim_u == 0 || !d.is_multiple_of(dim_u) {
        return Err(Error::DimensionMismatch(format!("register of dim {dim_u} does not divide {d}")));
    }
    let db = d / dim_u;
    let m = state.matrix();
    let mut worst: f64 = 0.0;
    for bu in 0..dim_u {
        for bv in 0..dim_u {
            if bu == bv {
                continue;
            }
            for i in 0..db {
                for j in 0..db {
                    worst = worst.max(m[(bu * db + i, bv * db + j)].norm());
                }
            }
        }
    }
    if worst > CLASSICAL_TOL {
        return Err(Error::NonClassicalRegister(worst));
    }
    let weighted: Vec<CMatrix> = (0..dim_u).map(|u| m.view((u * db, u * db), (db, db)).into_owned()).collect();
    let pu: Vec<f64> = weighted.iter().map(|b| b.diagonal().iter().map(|z| z.re).sum::<f64>().max(0.0)).collect();
    let rho_b = weighted.iter().fold(CMatrix::zeros(db, db), |acc, b| acc + b);
    Ok(CqBlocks { weighted, pu, rho_b })
}

struct Spectral {
    // Per block: eigenvalues and eigenvectors of p(u)(rho_u - lambda rho^B).
    eig: Vec<(Vec<f64>, CMatrix)>,
    tol: f64,
}

fn spectral(blocks: &CqBlocks, lambda: f64, norm_rho: f64, norm_sigma: f64) -> Spectral {
    let eig = blocks
        .weighted
        .iter()
        .zip(&blocks.pu)
        .map(|(w, &p)| {
            let diff = w - &blocks.rho_b * C64::new(lambda * p, 0.0);
            let e = eigh(&diff);
            (e.values, e.vectors)
        })
        .collect();
    // Scale of rho - lambda sigma from its operands; it stays meaningful where the difference vanishes.
    Spectral { eig, tol: BOUNDARY_REL * (norm_rho + lambda * norm_sigma) }
}

/// `<v| A |v>` for column `c` of `vecs`.
fn quad(a: &CMatrix, vecs: &CMatrix, c: usize) -> f64 {
    let v = vecs.column(c);
    (v.adjoint() * a * v)[(0, 0)].re
}

/// `(Tr[P+ rho], Tr[P0 rho], Tr[P+ sigma], Tr[P0 sigma], rank+, rank0)`.
fn masses(blocks: &CqBlocks, s: &Spectral) -> (f64, f64, f64, f64, usize, usize) {
    let mut out = (0.0, 0.0, 0.0, 0.0, 0, 0);
    for (u, (vals, vecs)) in s.eig.iter().enumerate() {
        for (c, &l) in vals.iter().enumerate() {
            if l.abs() < s.tol {
                out.1 += quad(&blocks.weighted[u], vecs, c);
                out.3 += blocks.pu[u] * quad(&blocks.rho_b, vecs, c);
                out.5 += 1;
            } else if l > 0.0 {
                out.0 += quad(&blocks.weighted[u], vecs, c);
                out.2 += blocks.pu[u] * quad(&blocks.rho_b, vecs, c);
                out.4 += 1;
            }
        }
    }
    out
}

fn spectral_norm(m: &CMatrix) -> f64 {
    eigh(m).values.iter().fold(0.0f64, |a, l| a.max(l.abs()))
}

/// Solves `min Tr[Gamma sigma]` subject to `Tr[Gamma rho] >= 1 - eps`, `0 <= Gamma <= I`,
/// for a state on `U (x) B` whose `U` register (dimension `dim_u`, first factor) is classical.
pub fn cq_np_test(state: &DensityOperator, dim_u: usize, eps: f64) -> Result<CqNpTest> {
    check_epsilon(eps)?;
    let blocks = split_blocks(state, dim_u)?;
    let norm_rho = blocks.weighted.iter().map(spectral_norm).fold(0.0, f64::max);
    let norm_sigma = blocks.pu.iter().fold(0.0f64, |a, &p| a.max(p)) * spectral_norm(&blocks.rho_b);
    let target = 1.0 - eps;
    let min_p = blocks.pu.iter().copied().filter(|&p| p > 0.0).fold(f64::INFINITY, f64::min);

    let accepted = |lambda: f64| {
        let s = spectral(&blocks, lambda, norm_rho, norm_sigma);
        masses(&blocks, &s).0
    };
    let (mut lo, mut hi) = (0.0, 1.0 / min_p + 1.0);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if accepted(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    for lambda in [hi, lo] {
        let s = spectral(&blocks, lambda, norm_rho, norm_sigma);
        let (m_pos, m_zero, q_pos, q_zero, rank_pos, rank_zero) = masses(&blocks, &s);
        let w = if m_zero > 0.0 { ((target - m_pos) / m_zero).clamp(0.0, 1.0) } else { 0.0 };
        let acceptance = m_pos + w * m_zero;
        if (acceptance - target).abs() > CONSTRAINT_TOL {
            continue;
        }
        let test = build_blocks(&s, w);
        return Ok(CqNpTest {
            lambda,
            boundary_weight: w,
            blocks: test,
            positive_rank: rank_pos,
            boundary_rank: rank_zero,
            acceptance,
            objective: q_pos + w * q_zero,
        });
    }
    Err(Error::NoConvergence(iterations))
}

fn build_blocks(s: &Spectral, w: f64) -> Vec<HermitianOperator> {
    s.eig
        .iter()
        .map(|(vals, vecs)| {
            let n = vals.len();
            let mut scaled = vecs.clone();
            for (c, &l) in vals.iter().enumerate() {
                let f = if l.abs() < s.tol {
                    w
                } else if l > 0.0 {
                    1.0
                } else {
                    0.0
                };
                for r in 0..n {
                    scaled[(r, c)] *= C64::new(f, 0.0);
                }
            }
            HermitianOperator::from_matrix_unchecked(scaled * vecs.adjoint())
        })
        .collect()
}

/// Smooth min divergence of a state classical on its first register of dimension `dim_u`.
pub fn quantum_i0(state: &DensityOperator, dim_u: usize, eps: f64) -> Result<DivergenceResult> {
    let t = cq_np_test(state, dim_u, eps)?;
    Ok(DivergenceResult {
        value: -t.objective.log2(),
        epsilon: eps,
        method: Method::NeymanPearson,
        witness: Witness::QuantumTest {
            lambda: t.lambda,
            boundary_weight: t.boundary_weight,
            positive_rank: t.positive_rank,
            boundary_rank: t.boundary_rank,
            acceptance: t.acceptance,
            objective: t.objective,
        },
        relaxation_gap: None,
    })
}

/// Rebuilds the full test operator on `U (x) B` from a witness's `(lambda, w)`.
pub fn quantum_test_operator(state: &DensityOperator, dim_u: usize, lambda: f64, boundary_weight: f64) -> Result<HermitianOperator> {
    let blocks = split_blocks(state, dim_u)?;
    let norm_rho = blocks.weighted.iter().map(spectral_norm).fold(0.0, f64::max);
    let norm_sigma = blocks.pu.iter().fold(0.0f64, |a, &p| a.max(p)) * spectral_norm(&blocks.rho_b);
    let s = spectral(&blocks, lambda, norm_rho, norm_sigma);
    let parts = build_blocks(&s, boundary_weight);
    let db = blocks.rho_b.nrows();
    let mut full = CMatrix::zeros(dim_u * db, dim_u * db);
    for (u, b) in parts.iter().enumerate() {
        full.view_mut((u * db, u * db), (db, db)).copy_from(b.matrix());
    }
    Ok(HermitianOperator::from_matrix_unchecked(full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{classical_i0, I0Method};
    use crate::prob::{labels, JointPmf};
    use crate::quantum::random::random_density;
    use crate::quantum::{partial_trace, tensor, trace_product};
    use crate::rng::SeededRng;

    fn embed(j: &JointPmf) -> DensityOperator {
        DensityOperator::diagonal(j.flat()).unwrap()
    }

    #[test]
    fn product_state_identity() {
        let mut rng = SeededRng::new(21, 0);
        let ru = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        let rb = random_density(2, 2, &mut rng);
        let state = tensor(&ru, &rb);
        for eps in [0.0, 0.1, 0.25, 0.5] {
            let r = quantum_i0(&state, 2, eps).unwrap();
            assert!((r.value + (1.0 - eps).log2()).abs() < 1e-9, "eps {eps}: {}", r.value);
        }
    }

    #[test]
    fn classically_correlated_bit() {
        let state = DensityOperator::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        let r = quantum_i0(&state, 2, 0.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_embedding_matches_randomized() {
        let j = JointPmf::new(labels("u", 2), labels("v", 3), vec![vec![0.3, 0.05, 0.15], vec![0.1, 0.25, 0.15]]).unwrap();
        for eps in [0.0, 0.05, 0.2, 0.6] {
            let q = quantum_i0(&embed(&j), 2, eps).unwrap();
            let c = classical_i0(&j, eps, I0Method::Randomized).unwrap();
            assert!((q.value - c.value).abs() < 1e-9, "eps {eps}: {} vs {}", q.value, c.value);
        }
    }

    #[test]
    fn rejects_coherent_register() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = DensityOperator::pure(&[C64::new(h, 0.0), z, z, C64::new(h, 0.0)]).unwrap();
        assert!(matches!(quantum_i0(&bell, 2, 0.1), Err(Error::NonClassicalRegister(_))));
    }

    #[test]
    fn witness_rebuilds_test() {
        let mut rng = SeededRng::new(21, 1);
        let r0 = random_density(2, 2, &mut rng);
        let r1 = random_density(2, 1, &mut rng);
        let mut m = CMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&(r0.matrix() * C64::new(0.4, 0.0)));
        m.view_mut((2, 2), (2, 2)).copy_from(&(r1.matrix() * C64::new(0.6, 0.0)));
        let state = DensityOperator::new(m).unwrap();
        let r = quantum_i0(&state, 2, 0.1).unwrap();
        let Witness::QuantumTest { lambda, boundary_weight, .. } = r.witness else { panic!() };
        let gamma = quantum_test_operator(&state, 2, lambda, boundary_weight).unwrap();
        let rho_u = partial_trace(&state, &[2, 2], &[0]).unwrap();
        let rho_b = partial_trace(&state, &[2, 2], &[1]).unwrap();
        let sigma = tensor(&rho_u, &rho_b);
        assert!((trace_product(gamma.matrix(), state.matrix()) - 0.9).abs() < 1e-10);
        assert!((-trace_product(gamma.matrix(), sigma.matrix()).log2() - r.value).abs() < 1e-9);
        let e = gamma.eigenvalues();
        assert!(e[0] <= 1.0 + 1e-9 && *e.last().unwrap() >= -1e-9);
    }
}
