//! Per-letter one-shot divergences of iid products against their Shannon limits.

use serde::{Deserialize, Serialize};

use crate::divergence::{classical_i0_iid, classical_i_infty_iid};
use crate::error::Result;
use crate::prob::{mutual_information, JointPmf};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    /// `I0^eps / n` of the first base.
    pub i0_per_letter: f64,
    /// `I_inf^eps / n` of the second base.
    pub i_inf_per_letter: f64,
    pub i0_target: f64,
    pub i_inf_target: f64,
    pub i0_gap: f64,
    pub i_inf_gap: f64,
}

/// One row per blocklength; `i0_base` plays `(U, Y)`, `i_inf_base` plays `(U, V)`.
pub fn iid_convergence_curve(i0_base: &JointPmf, i_inf_base: &JointPmf, eps: f64, n_list: &[usize]) -> Result<Vec<CurvePoint>> {
    let i0_target = mutual_information(i0_base);
    let i_inf_target = mutual_information(i_inf_base);
    n_list
        .iter()
        .map(|&n| {
            let i0 = classical_i0_iid(i0_base, n, eps)?.value / n as f64;
            let i_inf = classical_i_infty_iid(i_inf_base, n, eps)?.value / n as f64;
            Ok(CurvePoint {
                n,
                i0_per_letter: i0,
                i_inf_per_letter: i_inf,
                i0_target,
                i_inf_target,
                i0_gap: (i0 - i0_target).abs(),
                i_inf_gap: (i_inf - i_inf_target).abs(),
            })
        })
        .collect()
}

/// Powers of two `1, 2, 4, ..., max`.
pub fn doubling(max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |&n| n.checked_mul(2)).take_while(|&n| n <= max).collect()
}
