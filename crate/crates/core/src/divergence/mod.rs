//! Smooth one-shot divergences and their iid evaluators.

mod classical;
mod quantum;
pub(crate) mod spectrum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classical::{classical_i0, classical_i_infty, evaluate_cell_witness, I0Method, EXHAUSTIVE_CELL_LIMIT};
pub use quantum::{cq_np_test, quantum_i0, quantum_test_operator, CqNpTest};
pub use spectrum::{
    classical_i0_iid, classical_i_infty_iid, iid_llr_spectrum, iid_llr_spectrum_with_cap, iid_threshold_set, LlrSpectrum, SpectrumAtom,
    ThresholdSet, DEFAULT_ATOM_CAP, LLR_RESOLUTION, THRESHOLD_SLACK,
};

/// Slack applied to every `mass >= 1 - eps` comparison.
pub const MASS_SLACK: f64 = 1e-12;

/// Outcome of a smooth divergence program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    /// Value in bits.
    pub value: f64,
    pub epsilon: f64,
    pub method: Method,
    pub witness: Witness,
    /// For set-based min divergences: the randomized relaxation value minus `value`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relaxation_gap: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Exact ratio thresholding for the max divergence.
    Threshold,
    Greedy,
    Exhaustive,
    Randomized,
    NeymanPearson,
    /// Evaluation on the llr spectrum of an iid product.
    Spectrum,
}

/// Certificate of feasibility for the returned value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Set of `(row, col)` cells, with an optional fractional cell.
    Cells {
        cells: Vec<(usize, usize)>,
        #[serde(skip_serializing_if = "Option::is_none")]
        fractional: Option<FractionalCell>,
        joint_mass: f64,
        product_mass: f64,
    },
    /// Threshold test on the llr of an iid product.
    LlrThreshold { blocklength: usize, threshold: f64, boundary_weight: f64, joint_mass: f64, product_mass: f64 },
    /// `Gamma = P(rho - lambda sigma > 0) + w P(rho - lambda sigma = 0)`.
    QuantumTest { lambda: f64, boundary_weight: f64, positive_rank: usize, boundary_rank: usize, acceptance: f64, objective: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalCell {
    pub cell: (usize, usize),
    pub weight: f64,
}

pub(crate) fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidEpsilon(eps));
    }
    Ok(())
}
