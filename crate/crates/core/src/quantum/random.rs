//! Random operators for tests, benchmarks and synthetic channels.

use rand_distr::{Distribution, StandardNormal};

use super::linalg::{eig_hermitian_matrix, from_spectrum};
use super::operator::{CMatrix, DensityOperator, HermitianOperator, C64};
use crate::rng::SeededRng;

fn gaussian(rng: &mut SeededRng) -> f64 {
    StandardNormal.sample(rng)
}

/// `dim x cols` matrix of iid standard complex Gaussians.
pub fn ginibre(dim: usize, cols: usize, rng: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(dim, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Random PSD operator `G G^dagger` of the given rank.
pub fn random_psd(dim: usize, rank: usize, rng: &mut SeededRng) -> HermitianOperator {
    let g = ginibre(dim, rank, rng);
    HermitianOperator::from_matrix_unchecked(&g * g.adjoint())
}

/// Random density operator of the given rank (trace-normalized Wishart).
pub fn random_density(dim: usize, rank: usize, rng: &mut SeededRng) -> DensityOperator {
    let w = random_psd(dim, rank, rng);
    DensityOperator::from_matrix_unchecked(w.matrix() / C64::new(w.trace(), 0.0))
}

/// Random Hermitian operator from the Gaussian unitary ensemble.
pub fn random_hermitian(dim: usize, rng: &mut SeededRng) -> HermitianOperator {
    let g = ginibre(dim, dim, rng);
    HermitianOperator::from_matrix_unchecked((&g + g.adjoint()) * C64::new(0.5, 0.0))
}

/// Random operator with `0 <= S <= I`: random eigenbasis, eigenvalues uniform in `[0, 1]`
/// with occasional exact 0 or 1.
pub fn random_contraction(dim: usize, rng: &mut SeededRng) -> HermitianOperator {
    let basis = eig_hermitian_matrix(random_hermitian(dim, rng).matrix());
    let values: Vec<f64> = (0..dim)
        .map(|_| match rng.below(8) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.uniform(),
        })
        .collect();
    let spectrum = super::linalg::Eigen { values, vectors: basis.vectors };
    let m = from_spectrum(&spectrum, |l| l);
    HermitianOperator::from_matrix_unchecked(m)
}
