//! Mutual covering: the probability that an `r x s` array of dependent indicators is all zero.

use serde::{Deserialize, Serialize};

use super::stats::{compare_to_bound, BoundComparison, Proportion};
use crate::coding::{encode, generate_codebook, CodingDesign, InputQuality, RateParams};
use crate::error::{Error, Result};
use crate::parallel::{map_reduce, Execution};
use crate::rng::SeededRng;

/// Array shape `r x s` and moment parameters: `E[J] >= alpha q`, pair moments `<= q^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringParams {
    pub r: u64,
    pub s: u64,
    pub q: f64,
    pub alpha: f64,
}

impl CoveringParams {
    pub fn new(r: u64, s: u64, q: f64, alpha: f64) -> Result<Self> {
        if r == 0 || s == 0 {
            return Err(Error::InvalidInput("r and s must be positive".into()));
        }
        if !(q > 0.0 && q <= 1.0) || !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidInput(format!("q = {q} and alpha = {alpha} must lie in (0, 1]")));
        }
        Ok(Self { r, s, q, alpha })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringBound {
    /// `1 / (alpha r s q)`.
    pub first_term: f64,
    /// `(r + s) / (alpha^2 r s)`.
    pub second_term: f64,
    pub raw: f64,
    /// `min(raw, 1)`.
    pub value: f64,
}

pub fn covering_bound(p: &CoveringParams) -> CoveringBound {
    let (r, s) = (p.r as f64, p.s as f64);
    let first_term = 1.0 / (p.alpha * r * s * p.q);
    let second_term = (r + s) / (p.alpha * p.alpha * r * s);
    let raw = first_term + second_term;
    CoveringBound { first_term, second_term, raw, value: raw.min(1.0) }
}

/// `J(k, l) = A_k B_l C_kl` with independent Bernoulli factors.
///
/// `row = col = 1` is the iid array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticArray {
    pub row: f64,
    pub col: f64,
    pub cell: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// `E[J(k,l) J(k,l')]`, `l != l'`.
    pub same_row: f64,
    /// `E[J(k,l) J(k',l)]`, `k != k'`.
    pub same_col: f64,
}

impl SyntheticArray {
    /// An array meeting the moment hypotheses with equality where possible.
    ///
    /// For `q <= alpha^3`: `A, B ~ Bern(alpha^2)`, `C ~ Bern(q / alpha^3)`, so `E[J] = alpha q`
    /// and both pair moments equal `q^2`. Otherwise iid `Bern(alpha q)`.
    pub fn extremal(p: &CoveringParams) -> Self {
        let a3 = p.alpha.powi(3);
        if p.q <= a3 {
            let t = p.alpha * p.alpha;
            Self { row: t, col: t, cell: p.q / a3 }
        } else {
            Self { row: 1.0, col: 1.0, cell: p.alpha * p.q }
        }
    }

    pub fn iid(p: f64) -> Self {
        Self { row: 1.0, col: 1.0, cell: p }
    }

    pub fn moments(&self) -> Moments {
        let (a, b, c) = (self.row, self.col, self.cell);
        Moments { mean: a * b * c, same_row: a * b * b * c * c, same_col: a * a * b * c * c }
    }

    /// `E[J] >= alpha q` and both pair moments `<= q^2` (relative slack `1e-12`).
    pub fn satisfies(&self, p: &CoveringParams) -> bool {
        let m = self.moments();
        let q2 = p.q * p.q * (1.0 + 1e-12);
        m.mean >= p.alpha * p.q * (1.0 - 1e-12) && m.same_row <= q2 && m.same_col <= q2
    }

    /// One draw of `Z = 0`.
    ///
    /// Only pairs with `A_k = B_l = 1` can be nonzero; the first nonzero cell among them is
    /// located by a geometric skip, which is exact for a sequence of iid Bernoulli cells.
    fn all_zero(&self, r: u64, s: u64, rng: &mut SeededRng) -> bool {
        let count = |n: u64, p: f64, rng: &mut SeededRng| -> u64 {
            if p >= 1.0 {
                n
            } else {
                (0..n).filter(|_| rng.uniform() < p).count() as u64
            }
        };
        let active = u128::from(count(r, self.row, rng)) * u128::from(count(s, self.col, rng));
        if active == 0 || self.cell <= 0.0 {
            return true;
        }
        if self.cell >= 1.0 {
            return false;
        }
        // Index of the first success in an iid Bernoulli(c) sequence.
        let first = (rng.uniform_open_closed().ln() / (-self.cell).ln_1p()).floor();
        first >= active as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringEstimate {
    pub params: CoveringParams,
    pub zeros: Proportion,
    pub bound: CoveringBound,
    pub comparison: BoundComparison,
}

fn estimate(params: &CoveringParams, zeros: u64, trials: u64) -> CoveringEstimate {
    let bound = covering_bound(params);
    CoveringEstimate {
        params: *params,
        zeros: Proportion::new(zeros, trials),
        comparison: compare_to_bound(zeros, trials, bound.raw),
        bound,
    }
}

/// Monte Carlo `Pr{Z = 0}` for a synthetic array; trial `t` uses stream `t` of `seed`.
pub fn simulate_synthetic(
    params: &CoveringParams,
    array: &SyntheticArray,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> CoveringEstimate {
    let master = SeededRng::new(seed, 0);
    let zeros =
        map_reduce(execution, trials, || 0u64, |t| u64::from(array.all_zero(params.r, params.s, &mut master.substream(t))), |a, b| a + b);
    estimate(params, zeros, trials)
}

/// Monte Carlo `Pr{Z = 0}` for the encoder's own array: a fresh codebook per trial with a
/// single `r x s` band, `Z = 0` meaning the encoder falls back.
#[allow(clippy::too_many_arguments)]
pub fn empirical_covering(
    design: &CodingDesign,
    quality: &(impl InputQuality + Sync),
    word_len: usize,
    i_inf: f64,
    eps0: f64,
    params: &CoveringParams,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> Result<CoveringEstimate> {
    let bits = |n: u64| -> Result<u32> {
        if n.is_power_of_two() {
            Ok(n.trailing_zeros())
        } else {
            Err(Error::InvalidInput(format!("band size {n} must be a power of two")))
        }
    };
    let rate = RateParams {
        rate1: 0,
        rate2: 0,
        band1: bits(params.r)?,
        band2: bits(params.s)?,
        eps_tilde: 0.5,
        eps0,
        eps_inf: 0.0,
        i_inf,
        i0_b: 0.0,
        i0_c: 0.0,
    };
    // Surface size errors before the parallel loop.
    let master = SeededRng::new(seed, 0);
    generate_codebook(design, &rate, word_len, &master.substream(0))?;
    let zeros = map_reduce(
        execution,
        trials,
        || 0u64,
        |t| {
            let cb = generate_codebook(design, &rate, word_len, &master.substream(t)).expect("size checked");
            u64::from(encode(&cb, 0, 0, quality).is_fallback())
        },
        |a, b| a + b,
    );
    Ok(estimate(params, zeros, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_classical_joints, ClassicalBroadcastChannel, InputDesign};
    use crate::coding::{certified_set, ClassicalQuality};
    use crate::divergence::{classical_i_infty, I0Method};
    use crate::prob::{labels, JointPmf};

    #[test]
    fn reference_bound() {
        let p = CoveringParams::new(1024, 1024, 2f64.powi(-10), 0.25).unwrap();
        let b = covering_bound(&p);
        assert!((b.first_term - 1.0 / 256.0).abs() < 1e-15);
        assert!((b.second_term - 1.0 / 32.0).abs() < 1e-15);
        assert!((b.raw - 0.03515625).abs() < 1e-15);
        let b = covering_bound(&CoveringParams::new(2, 2, 1.0, 1.0).unwrap());
        assert_eq!((b.raw, b.value), (1.25, 1.0));
    }

    #[test]
    fn doubling_r_decreases_both_terms() {
        let a = covering_bound(&CoveringParams::new(16, 32, 0.1, 0.5).unwrap());
        let b = covering_bound(&CoveringParams::new(32, 32, 0.1, 0.5).unwrap());
        assert!(b.first_term < a.first_term && b.second_term < a.second_term);
    }

    #[test]
    fn extremal_arrays_meet_hypotheses() {
        for (q, alpha) in [(2f64.powi(-10), 0.25), (0.5, 0.5), (0.01, 1.0), (1.0, 1.0)] {
            let p = CoveringParams::new(8, 8, q, alpha).unwrap();
            let a = SyntheticArray::extremal(&p);
            assert!(a.satisfies(&p), "{p:?} {a:?}");
        }
        let p = CoveringParams::new(8, 8, 2f64.powi(-10), 0.25).unwrap();
        let m = SyntheticArray::extremal(&p).moments();
        assert!((m.same_row - p.q * p.q).abs() < 1e-18);
    }

    #[test]
    fn skip_sampler_matches_closed_form() {
        // Pr{Z=0} for the iid array is (1 - c)^{rs}.
        let p = CoveringParams::new(4, 5, 0.1, 1.0).unwrap();
        let est = simulate_synthetic(&p, &SyntheticArray::iid(0.1), 40_000, 3, Execution::Parallel);
        let exact = 0.9f64.powi(20);
        let sigma = (exact * (1.0 - exact) / 40_000.0).sqrt();
        assert!((est.zeros.rate - exact).abs() < 4.0 * sigma);
        let again = simulate_synthetic(&p, &SyntheticArray::iid(0.1), 40_000, 3, Execution::Sequential);
        assert_eq!(est.zeros.count, again.zeros.count);
    }

    #[test]
    fn codebook_covering() {
        let ch = ClassicalBroadcastChannel::binary_symmetric(0.05, 0.05).unwrap();
        let bits = labels("b", 2);
        // Independent design: every cell accepted, alpha and beta clear any floor below 0.9.
        let uv = JointPmf::new(bits.clone(), bits.clone(), vec![vec![0.25; 2]; 2]).unwrap();
        let design = InputDesign::from_fn(uv, ch.x_alphabet(), |u, _| u).unwrap();
        let (uy, vz) = build_classical_joints(&ch, &design).unwrap();
        let b = certified_set(&uy, 1, 0.1, I0Method::Greedy).unwrap();
        let c = certified_set(&vz, 1, 0.01, I0Method::Greedy).unwrap();
        let q = ClassicalQuality::new(&ch, &b.set, &c.set);
        let cd = CodingDesign::new(&design, ch.x_alphabet()).unwrap();
        let p = CoveringParams::new(8, 8, 1.0, 0.25).unwrap();
        let est = empirical_covering(&cd, &q, 1, 0.0, 0.2, &p, 200, 1, Execution::Parallel).unwrap();
        assert_eq!(est.zeros.count, 0);

        // Correlated design at 64 x 64.
        let uv = JointPmf::new(bits.clone(), bits, vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let design = InputDesign::from_fn(uv.clone(), ch.x_alphabet(), |u, v| u & v).unwrap();
        let (uy, vz) = build_classical_joints(&ch, &design).unwrap();
        let b = certified_set(&uy, 1, 0.05, I0Method::Greedy).unwrap();
        let c = certified_set(&vz, 1, 0.05, I0Method::Greedy).unwrap();
        let q = ClassicalQuality::new(&ch, &b.set, &c.set);
        let cd = CodingDesign::new(&design, ch.x_alphabet()).unwrap();
        let i_inf = classical_i_infty(&uv, 0.0).unwrap().value;
        let p = CoveringParams::new(64, 64, (-i_inf).exp2(), 0.25).unwrap();
        let est = empirical_covering(&cd, &q, 1, i_inf, 0.05, &p, 500, 2, Execution::Parallel).unwrap();
        assert!(est.comparison.within_3sigma, "{est:?}");
        let again = empirical_covering(&cd, &q, 1, i_inf, 0.05, &p, 500, 2, Execution::Sequential).unwrap();
        assert_eq!(est.zeros, again.zeros);
        assert!(matches!(
            empirical_covering(&cd, &q, 1, i_inf, 0.05, &CoveringParams::new(6, 8, 0.5, 0.25).unwrap(), 1, 0, Execution::Sequential),
            Err(Error::InvalidInput(_))
        ));
    }
}
