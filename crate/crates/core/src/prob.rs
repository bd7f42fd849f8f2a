//! Finite probability mass functions over labeled alphabets.
//!
//! All information quantities in this crate are in bits.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Default slack on total probability mass.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Mass function over an ordered alphabet of string labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr", into = "PmfRepr")]
pub struct Pmf {
    labels: Vec<String>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl TryFrom<PmfRepr> for Pmf {
    type Error = Error;
    fn try_from(r: PmfRepr) -> Result<Self> {
        Pmf::new(r.labels, r.probs)
    }
}

impl From<Pmf> for PmfRepr {
    fn from(p: Pmf) -> Self {
        PmfRepr { labels: p.labels, probs: p.probs }
    }
}

impl Pmf {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(labels, probs, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(labels: Vec<String>, probs: Vec<f64>, tol: f64) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!("{} labels but {} probabilities", labels.len(), probs.len())));
        }
        check_labels(&labels, "labels")?;
        check_masses(&probs, tol)?;
        let cdf = cumulative(&probs);
        Ok(Self { labels, probs, cdf })
    }

    /// Uniform distribution over the given labels.
    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Self::new(labels, vec![1.0 / n as f64; n])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Index drawn by inverse CDF from one uniform draw.
    pub fn sample_index(&self, rng: &mut SeededRng) -> usize {
        sample_cdf(&self.cdf, rng.uniform())
    }
}

/// Mass function over a product of two labeled alphabets, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointRepr", into = "JointRepr")]
pub struct JointPmf {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JointRepr {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    probs: Vec<Vec<f64>>,
}

impl TryFrom<JointRepr> for JointPmf {
    type Error = Error;
    fn try_from(r: JointRepr) -> Result<Self> {
        JointPmf::new(r.row_labels, r.col_labels, r.probs)
    }
}

impl From<JointPmf> for JointRepr {
    fn from(j: JointPmf) -> Self {
        let ncols = j.col_labels.len();
        let probs = j.probs.chunks(ncols.max(1)).map(<[f64]>::to_vec).collect();
        JointRepr { row_labels: j.row_labels, col_labels: j.col_labels, probs }
    }
}

impl JointPmf {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, probs: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(row_labels, col_labels, probs, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(row_labels: Vec<String>, col_labels: Vec<String>, probs: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        if probs.len() != row_labels.len() {
            return Err(Error::InvalidDistribution(format!("{} row labels but {} rows", row_labels.len(), probs.len())));
        }
        if let Some((i, row)) = probs.iter().enumerate().find(|(_, r)| r.len() != col_labels.len()) {
            return Err(Error::InvalidDistribution(format!("row {i} has {} entries, expected {}", row.len(), col_labels.len())));
        }
        let flat: Vec<f64> = probs.into_iter().flatten().collect();
        Self::from_flat(row_labels, col_labels, flat, tol)
    }

    pub(crate) fn from_flat(row_labels: Vec<String>, col_labels: Vec<String>, probs: Vec<f64>, tol: f64) -> Result<Self> {
        check_labels(&row_labels, "row_labels")?;
        check_labels(&col_labels, "col_labels")?;
        if probs.len() != row_labels.len() * col_labels.len() {
            return Err(Error::InvalidDistribution("probability matrix has wrong shape".into()));
        }
        check_masses(&probs, tol)?;
        Ok(Self { row_labels, col_labels, probs })
    }

    /// Product of two marginals.
    pub fn product(a: &Pmf, b: &Pmf) -> Result<Self> {
        let probs = a.probs().iter().flat_map(|&pa| b.probs().iter().map(move |&pb| pa * pb)).collect();
        Self::from_flat(a.labels().to_vec(), b.labels().to_vec(), probs, 1e-10)
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn nrows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.probs[row * self.ncols() + col]
    }

    /// Row-major probabilities.
    pub fn flat(&self) -> &[f64] {
        &self.probs
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.probs.chunks(self.ncols()).map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols()];
        for row in self.probs.chunks(self.ncols()) {
            for (acc, p) in out.iter_mut().zip(row) {
                *acc += p;
            }
        }
        out
    }

    /// Row and column marginals as validated [`Pmf`]s.
    pub fn marginals(&self) -> (Pmf, Pmf) {
        // Sums of a valid joint stay within tolerance; the checks cannot fail.
        let rows = Pmf::with_tolerance(self.row_labels.clone(), self.row_marginal(), 1e-10).expect("row marginal of a valid joint");
        let cols = Pmf::with_tolerance(self.col_labels.clone(), self.col_marginal(), 1e-10).expect("column marginal of a valid joint");
        (rows, cols)
    }

    /// `(row, col, p)` for every cell, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let ncols = self.ncols();
        self.probs.iter().enumerate().map(move |(i, &p)| (i / ncols, i % ncols, p))
    }

    /// `log2(p(u,v) / (p(u) p(v)))` per cell; `-inf` where `p(u,v) = 0`.
    pub fn llr_table(&self) -> Vec<f64> {
        let pu = self.row_marginal();
        let pv = self.col_marginal();
        self.cells().map(|(i, j, p)| if p > 0.0 { (p / (pu[i] * pv[j])).log2() } else { f64::NEG_INFINITY }).collect()
    }

    /// Whether the joint equals the product of its marginals within `tol`.
    pub fn is_product(&self, tol: f64) -> bool {
        let pu = self.row_marginal();
        let pv = self.col_marginal();
        self.cells().all(|(i, j, p)| (p - pu[i] * pv[j]).abs() <= tol)
    }

    /// The transposed joint (columns become rows).
    pub fn transpose(&self) -> JointPmf {
        let (r, c) = (self.nrows(), self.ncols());
        let mut probs = vec![0.0; r * c];
        for (i, j, p) in self.cells() {
            probs[j * r + i] = p;
        }
        JointPmf { row_labels: self.col_labels.clone(), col_labels: self.row_labels.clone(), probs }
    }
}

/// Row and column marginals of `joint`.
pub fn marginals(joint: &JointPmf) -> (Pmf, Pmf) {
    joint.marginals()
}

/// Label drawn from `pmf`.
pub fn sample<'a>(pmf: &'a Pmf, rng: &mut SeededRng) -> &'a str {
    &pmf.labels[pmf.sample_index(rng)]
}

/// `I[U;V]` in bits, with `0 log 0 = 0`.
pub fn mutual_information(joint: &JointPmf) -> f64 {
    let llr = joint.llr_table();
    let mi: f64 = joint.flat().iter().zip(&llr).filter(|(p, _)| **p > 0.0).map(|(p, l)| p * l).sum();
    mi.max(0.0)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

pub(crate) fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Inverse-CDF lookup; the last positive-mass index absorbs rounding.
pub(crate) fn sample_cdf(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("non-empty cdf");
    let target = u * total;
    let idx = cdf.partition_point(|&c| c <= target);
    if idx < cdf.len() {
        return idx;
    }
    // u * total landed on the final cumulative value: take the last index with mass.
    let mut i = cdf.len() - 1;
    while i > 0 && cdf[i] == cdf[i - 1] {
        i -= 1;
    }
    i
}

fn check_labels(labels: &[String], field: &str) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidDistribution(format!("{field}: empty alphabet")));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidDistribution(format!("{field}: duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn check_masses(probs: &[f64], tol: f64) -> Result<()> {
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("probs[{i}] = {p} is not a nonnegative number")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn joint(rows: Vec<Vec<f64>>) -> JointPmf {
        let (r, c) = (rows.len(), rows[0].len());
        JointPmf::new(labels("u", r), labels("v", c), rows).unwrap()
    }

    #[test]
    fn marginals_symmetric() {
        let (a, b) = joint(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).marginals();
        assert_abs_diff_eq!(a.probs()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.probs()[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn marginals_point_mass() {
        let (a, b) = joint(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).marginals();
        assert_eq!(a.probs(), &[1.0, 0.0]);
        assert_eq!(b.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn marginals_dsbs() {
        let (a, b) = joint(vec![vec![0.45, 0.05], vec![0.05, 0.45]]).marginals();
        for p in a.probs().iter().chain(b.probs()) {
            assert_abs_diff_eq!(*p, 0.5, epsilon = 1e-15);
        }
        assert!((a.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rejects_bad_masses_and_labels() {
        assert!(Pmf::new(labels("a", 2), vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(labels("a", 2), vec![-0.1, 1.1]).is_err());
        assert!(Pmf::new(vec!["x".into(), "x".into()], vec![0.5, 0.5]).is_err());
        assert!(JointPmf::new(labels("u", 2), labels("v", 2), vec![vec![0.5, 0.5], vec![0.0]]).is_err());
        assert!(Pmf::with_tolerance(labels("a", 2), vec![0.5, 0.5001], 1e-3).is_ok());
    }

    #[test]
    fn mutual_information_cases() {
        assert_abs_diff_eq!(mutual_information(&joint(vec![vec![0.25, 0.25], vec![0.25, 0.25]])), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mutual_information(&joint(vec![vec![0.5, 0.0], vec![0.0, 0.5]])), 1.0, epsilon = 1e-15);
        let dsbs = joint(vec![vec![0.45, 0.05], vec![0.05, 0.45]]);
        assert_abs_diff_eq!(mutual_information(&dsbs), 1.0 - binary_entropy(0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&dsbs), 0.531, epsilon = 5e-4);
    }

    #[test]
    fn point_mass_sampling() {
        let p = Pmf::new(vec!["a".into(), "b".into()], vec![1.0, 0.0]).unwrap();
        let mut rng = SeededRng::new(1, 0);
        for _ in 0..1000 {
            assert_eq!(sample(&p, &mut rng), "a");
        }
        let q = Pmf::new(vec!["a".into(), "b".into(), "c".into()], vec![0.0, 1.0, 0.0]).unwrap();
        for _ in 0..1000 {
            assert_eq!(sample(&q, &mut rng), "b");
        }
    }

    #[test]
    fn sample_cdf_edges() {
        let cdf = [0.25, 0.25, 1.0, 1.0];
        assert_eq!(sample_cdf(&cdf, 0.0), 0);
        assert_eq!(sample_cdf(&cdf, 0.25), 2);
        assert_eq!(sample_cdf(&cdf, 1.0), 2);
    }

    #[test]
    fn uniform_frequencies_within_three_sigma() {
        let p = Pmf::uniform(labels("s", 4)).unwrap();
        let mut rng = SeededRng::new(11, 2);
        let n = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[p.sample_index(&mut rng)] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * 0.25).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn golden_label_sequence() {
        let p = Pmf::uniform(labels("s", 4)).unwrap();
        let mut rng = SeededRng::new(42, 0);
        let seq: Vec<&str> = (0..10).map(|_| sample(&p, &mut rng)).collect();
        assert_eq!(seq, GOLDEN_LABELS);
    }

    #[test]
    fn json_round_trip_shape() {
        let j = joint(vec![vec![0.4, 0.1], vec![0.1, 0.4]]);
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(s, r#"{"row_labels":["u0","u1"],"col_labels":["v0","v1"],"probs":[[0.4,0.1],[0.1,0.4]]}"#);
        let back: JointPmf = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
        let bad = r#"{"labels":["a","b"],"probs":[0.7,0.7]}"#;
        assert!(serde_json::from_str::<Pmf>(bad).is_err());
    }

    // Frozen from the first run of `golden_label_sequence`.
    const GOLDEN_LABELS: [&str; 10] = ["s2", "s3", "s1", "s2", "s1", "s0", "s1", "s3", "s3", "s0"];
}
