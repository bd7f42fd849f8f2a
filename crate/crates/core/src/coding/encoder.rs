//! Lexicographic scan of a message band for the first usable cell.

use serde::{Deserialize, Serialize};

use super::codebook::Codebook;

/// Reliability of a row (resp. column) word for a given channel input word.
pub trait InputQuality {
    /// `alpha`: probability that the first receiver's test accepts `u` when `x` is sent.
    fn alpha(&self, u: &[u16], x: &[u16]) -> f64;
    /// `beta`: the same for the second receiver and column word `v`.
    fn beta(&self, v: &[u16], x: &[u16]) -> f64;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodeOutcome {
    /// `(row, col)` of the accepted cell; `None` on fallback.
    pub chosen: Option<(usize, usize)>,
    /// Channel input word (input indices).
    pub x: Vec<u16>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Cells examined, including the accepted one.
    pub scanned: usize,
}

impl EncodeOutcome {
    pub fn is_fallback(&self) -> bool {
        self.chosen.is_none()
    }
}

/// Sends the first cell of the band `(m1, m2)` with `I = 1` and `alpha, beta > 1 - 4 eps0`.
///
/// Without such a cell the first input letter is sent in every slot.
pub fn encode(codebook: &Codebook, m1: usize, m2: usize, quality: &impl InputQuality) -> EncodeOutcome {
    let floor = 1.0 - 4.0 * codebook.params().eps0;
    let mut scanned = 0;
    for k in codebook.row_band(m1) {
        for l in codebook.col_band(m2) {
            scanned += 1;
            if !codebook.indicator(k, l) {
                continue;
            }
            let x = codebook.input_word(k, l);
            let alpha = quality.alpha(codebook.row(k), &x);
            if alpha <= floor {
                continue;
            }
            let beta = quality.beta(codebook.col(l), &x);
            if beta <= floor {
                continue;
            }
            return EncodeOutcome { chosen: Some((k, l)), x, alpha: Some(alpha), beta: Some(beta), scanned };
        }
    }
    EncodeOutcome { chosen: None, x: vec![0; codebook.word_len()], alpha: None, beta: None, scanned }
}
