//! Random codebook: rows from `p_U`, columns from `p_V`, and a lazily drawn acceptance indicator.

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::params::RateParams;
use crate::channel::InputDesign;
use crate::error::{Error, Result};
use crate::prob::{cumulative, sample_cdf};
use crate::rng::{unit_open_closed, SeededRng};

/// Bound on the number of stored symbols (`(rows + cols) * word_len`).
pub const CODEBOOK_SYMBOL_CAP: u128 = 1 << 27;

const ROW_STREAM: u64 = 0;
const COL_STREAM: u64 = 1;
const ACCEPT_STREAM: u64 = 2;

/// Per-letter tables of an input design, resolved against an input alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct CodingDesign {
    nu: usize,
    nv: usize,
    pu: Vec<f64>,
    pv: Vec<f64>,
    pu_cdf: Vec<f64>,
    pv_cdf: Vec<f64>,
    llr: Vec<f64>,
    input: Vec<u16>,
}

impl CodingDesign {
    pub fn new(design: &InputDesign, x_alphabet: &[String]) -> Result<Self> {
        let uv = design.uv();
        if x_alphabet.len() > usize::from(u16::MAX) || uv.nrows() > usize::from(u16::MAX) || uv.ncols() > usize::from(u16::MAX) {
            return Err(Error::CapExceeded {
                what: "alphabet size",
                needed: x_alphabet.len().max(uv.nrows()).max(uv.ncols()) as u128,
                cap: u128::from(u16::MAX),
            });
        }
        let pu = uv.row_marginal();
        let pv = uv.col_marginal();
        Ok(Self {
            nu: uv.nrows(),
            nv: uv.ncols(),
            pu_cdf: cumulative(&pu),
            pv_cdf: cumulative(&pv),
            pu,
            pv,
            llr: uv.llr_table(),
            input: design.resolve(x_alphabet)?.into_iter().map(|x| x as u16).collect(),
        })
    }

    pub fn u_size(&self) -> usize {
        self.nu
    }

    pub fn v_size(&self) -> usize {
        self.nv
    }

    pub fn pu(&self) -> &[f64] {
        &self.pu
    }

    pub fn pv(&self) -> &[f64] {
        &self.pv
    }

    /// `log2 p(u,v) / (p(u) p(v))`, `-inf` off the support.
    pub fn llr(&self, u: u16, v: u16) -> f64 {
        self.llr[usize::from(u) * self.nv + usize::from(v)]
    }

    /// Input index `f(u, v)`.
    pub fn input(&self, u: u16, v: u16) -> u16 {
        self.input[usize::from(u) * self.nv + usize::from(v)]
    }
}

/// Codebook with `2^{R1+r1}` rows and `2^{R2+r2}` columns of words of length `word_len`.
///
/// Row `k` belongs to message `k >> r1`; column `l` to message `l >> r2`.
#[derive(Clone, Debug)]
pub struct Codebook {
    design: CodingDesign,
    params: RateParams,
    word_len: usize,
    nrows: usize,
    ncols: usize,
    rows: Vec<u16>,
    cols: Vec<u16>,
    accept: SeededRng,
}

#[derive(Serialize)]
struct DigestView<'a> {
    word_len: usize,
    nrows: usize,
    ncols: usize,
    params: &'a RateParams,
    master_seed: u64,
    accept_stream: u64,
}

/// Draws a codebook from `rng`'s substreams: rows, columns, then acceptance words.
pub fn generate_codebook(design: &CodingDesign, params: &RateParams, word_len: usize, rng: &SeededRng) -> Result<Codebook> {
    if word_len == 0 {
        return Err(Error::InvalidInput("word length must be positive".into()));
    }
    let row_bits = params.rate1 + params.band1;
    let col_bits = params.rate2 + params.band2;
    if row_bits > 40 || col_bits > 40 {
        return Err(Error::CapExceeded { what: "codebook index bits", needed: u128::from(row_bits.max(col_bits)), cap: 40 });
    }
    let (nrows, ncols) = (1usize << row_bits, 1usize << col_bits);
    let symbols = (nrows as u128 + ncols as u128) * word_len as u128;
    if symbols > CODEBOOK_SYMBOL_CAP {
        return Err(Error::CapExceeded { what: "codebook symbols", needed: symbols, cap: CODEBOOK_SYMBOL_CAP });
    }
    let draw = |count: usize, cdf: &[f64], mut stream: SeededRng| -> Vec<u16> {
        (0..count * word_len).map(|_| sample_cdf(cdf, stream.uniform()) as u16).collect()
    };
    Ok(Codebook {
        rows: draw(nrows, &design.pu_cdf, rng.substream(ROW_STREAM)),
        cols: draw(ncols, &design.pv_cdf, rng.substream(COL_STREAM)),
        accept: rng.substream(ACCEPT_STREAM),
        design: design.clone(),
        params: *params,
        word_len,
        nrows,
        ncols,
    })
}

impl Codebook {
    pub fn design(&self) -> &CodingDesign {
        &self.design
    }

    pub fn params(&self) -> &RateParams {
        &self.params
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, k: usize) -> &[u16] {
        &self.rows[k * self.word_len..(k + 1) * self.word_len]
    }

    pub fn col(&self, l: usize) -> &[u16] {
        &self.cols[l * self.word_len..(l + 1) * self.word_len]
    }

    /// Rows owned by first-receiver message `m`.
    pub fn row_band(&self, m: usize) -> std::ops::Range<usize> {
        let w = 1usize << self.params.band1;
        m * w..(m + 1) * w
    }

    pub fn col_band(&self, m: usize) -> std::ops::Range<usize> {
        let w = 1usize << self.params.band2;
        m * w..(m + 1) * w
    }

    pub fn row_message(&self, k: usize) -> usize {
        k >> self.params.band1
    }

    pub fn col_message(&self, l: usize) -> usize {
        l >> self.params.band2
    }

    /// Sum of per-letter llrs of the pair `(U[k], V[l])`.
    pub fn pair_llr(&self, k: usize, l: usize) -> f64 {
        self.row(k).iter().zip(self.col(l)).map(|(&u, &v)| self.design.llr(u, v)).sum()
    }

    /// `Pr{I(k,l) = 1 | U[k], V[l]} = min(1, 2^{llr - I_inf})`.
    pub fn acceptance_probability(&self, k: usize, l: usize) -> f64 {
        (self.pair_llr(k, l) - self.params.i_inf).min(0.0).exp2()
    }

    /// The uniform draw in `(0, 1]` attached to cell `(k, l)`.
    pub fn acceptance_draw(&self, k: usize, l: usize) -> f64 {
        unit_open_closed(self.accept.word_at((k as u128) * (self.ncols as u128) + l as u128))
    }

    pub fn indicator(&self, k: usize, l: usize) -> bool {
        let p = self.acceptance_probability(k, l);
        p > 0.0 && self.acceptance_draw(k, l) <= p
    }

    /// Channel input word `f(U[k]_t, V[l]_t)`.
    pub fn input_word(&self, k: usize, l: usize) -> Vec<u16> {
        self.row(k).iter().zip(self.col(l)).map(|(&u, &v)| self.design.input(u, v)).collect()
    }

    /// Hex sha256 over the stored words, the shape and the acceptance stream.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let view = DigestView {
            word_len: self.word_len,
            nrows: self.nrows,
            ncols: self.ncols,
            params: &self.params,
            master_seed: self.accept.master_seed(),
            accept_stream: self.accept.stream_id(),
        };
        h.update(serde_json::to_vec(&view).expect("digest view serializes"));
        for w in [&self.rows, &self.cols] {
            for s in w.iter() {
                h.update(s.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::InputDesign;
    use crate::prob::{labels, JointPmf};

    pub(crate) fn params(rate1: u32, band1: u32, rate2: u32, band2: u32, i_inf: f64) -> RateParams {
        RateParams { rate1, rate2, band1, band2, eps_tilde: 0.1, eps0: 0.01, eps_inf: 0.0, i_inf, i0_b: 0.0, i0_c: 0.0 }
    }

    fn correlated_design() -> CodingDesign {
        let uv = JointPmf::new(labels("u", 2), labels("v", 2), vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let x = labels("x", 2);
        let d = InputDesign::from_fn(uv, &x, |u, v| u ^ v).unwrap();
        CodingDesign::new(&d, &x).unwrap()
    }

    #[test]
    fn shape_and_bands() {
        let d = correlated_design();
        let cb = generate_codebook(&d, &params(2, 3, 1, 2, 0.0), 3, &SeededRng::new(5, 0)).unwrap();
        assert_eq!((cb.nrows(), cb.ncols()), (32, 8));
        assert_eq!(cb.row(31).len(), 3);
        assert_eq!(cb.row_band(2), 16..24);
        assert_eq!(cb.row_message(23), 2);
        assert_eq!(cb.col_message(7), 1);
    }

    #[test]
    fn regenerates_identically() {
        let d = correlated_design();
        let p = params(1, 4, 1, 4, 0.5);
        let a = generate_codebook(&d, &p, 2, &SeededRng::new(9, 3)).unwrap();
        let b = generate_codebook(&d, &p, 2, &SeededRng::new(9, 3)).unwrap();
        assert_eq!(a.digest(), b.digest());
        for k in 0..a.nrows() {
            for l in 0..a.ncols() {
                assert_eq!(a.indicator(k, l), b.indicator(k, l));
            }
        }
        let c = generate_codebook(&d, &p, 2, &SeededRng::new(9, 4)).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn acceptance_matches_llr() {
        let d = correlated_design();
        let i_inf = 0.6;
        let cb = generate_codebook(&d, &params(0, 3, 0, 3, i_inf), 1, &SeededRng::new(1, 0)).unwrap();
        for k in 0..cb.nrows() {
            for l in 0..cb.ncols() {
                let (u, v) = (cb.row(k)[0], cb.col(l)[0]);
                let expected = if u == v { (0.4f64 / 0.25).log2() } else { (0.1f64 / 0.25).log2() };
                assert!((cb.pair_llr(k, l) - expected).abs() < 1e-12);
                assert!((cb.acceptance_probability(k, l) - (expected - i_inf).min(0.0).exp2()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn size_cap() {
        let d = correlated_design();
        let err = generate_codebook(&d, &params(20, 10, 1, 1, 0.0), 1, &SeededRng::new(1, 0)).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }
}
