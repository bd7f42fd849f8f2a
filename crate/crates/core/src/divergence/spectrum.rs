//! Distribution of the log-likelihood ratio under iid products.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_epsilon, DivergenceResult, Method, Witness, MASS_SLACK};
use crate::error::{Error, Result};
use crate::prob::JointPmf;

/// Atoms closer than this (in bits) are merged.
pub const LLR_RESOLUTION: f64 = 1e-9;
/// Default bound on the number of atoms.
pub const DEFAULT_ATOM_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAtom {
    /// `log2 p(u,v) / (p(u) p(v))` in bits.
    pub llr: f64,
    /// Mass under the joint measure.
    pub mass: f64,
}

impl SpectrumAtom {
    /// Mass of the same sequences under the product of the marginals.
    pub fn product_mass(&self) -> f64 {
        self.mass * (-self.llr).exp2()
    }
}

/// Law of the llr under the joint measure, atoms sorted by ascending llr.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlrSpectrum {
    pub blocklength: usize,
    pub atoms: Vec<SpectrumAtom>,
}

/// Slack used when testing `llr >= threshold` on sums of per-letter values.
pub const THRESHOLD_SLACK: f64 = 1e-6;

pub(crate) fn key(llr: f64) -> i64 {
    (llr / LLR_RESOLUTION).round() as i64
}

fn from_keys(blocklength: usize, map: &BTreeMap<i64, f64>) -> LlrSpectrum {
    LlrSpectrum { blocklength, atoms: map.iter().map(|(&k, &mass)| SpectrumAtom { llr: k as f64 * LLR_RESOLUTION, mass }).collect() }
}

fn base_keys(base: &JointPmf) -> BTreeMap<i64, f64> {
    let mut map = BTreeMap::new();
    for (&p, l) in base.flat().iter().zip(base.llr_table()) {
        if p > 0.0 {
            *map.entry(key(l)).or_insert(0.0) += p;
        }
    }
    map
}

/// llr law of the `n`-fold product of `base`, capped at [`DEFAULT_ATOM_CAP`] atoms.
pub fn iid_llr_spectrum(base: &JointPmf, n: usize) -> Result<LlrSpectrum> {
    iid_llr_spectrum_with_cap(base, n, DEFAULT_ATOM_CAP)
}

pub fn iid_llr_spectrum_with_cap(base: &JointPmf, n: usize, cap: usize) -> Result<LlrSpectrum> {
    if n == 0 {
        return Err(Error::InvalidInput("blocklength must be positive".into()));
    }
    let step = base_keys(base);
    let mut acc = step.clone();
    for _ in 1..n {
        let mut next = BTreeMap::new();
        for (&ka, &ma) in &acc {
            for (&kb, &mb) in &step {
                *next.entry(ka + kb).or_insert(0.0) += ma * mb;
            }
        }
        if next.len() > cap {
            return Err(Error::CapExceeded { what: "llr spectrum atoms", needed: next.len() as u128, cap: cap as u128 });
        }
        acc = next;
    }
    Ok(from_keys(n, &acc))
}

impl LlrSpectrum {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }
}

/// Smooth max divergence of the iid product: smallest atom whose lower set has mass `>= 1 - eps`.
pub fn classical_i_infty_iid(base: &JointPmf, n: usize, eps: f64) -> Result<DivergenceResult> {
    check_epsilon(eps)?;
    let s = iid_llr_spectrum(base, n)?;
    let target = 1.0 - eps - MASS_SLACK;
    let (mut m, mut q) = (0.0, 0.0);
    let mut threshold = s.atoms.last().map_or(0.0, |a| a.llr);
    for a in &s.atoms {
        m += a.mass;
        q += a.product_mass();
        if m >= target {
            threshold = a.llr;
            break;
        }
    }
    Ok(DivergenceResult {
        value: threshold,
        epsilon: eps,
        method: Method::Spectrum,
        witness: Witness::LlrThreshold { blocklength: n, threshold, boundary_weight: 1.0, joint_mass: m, product_mass: q },
        relaxation_gap: None,
    })
}

/// Randomized Neyman-Pearson min divergence of the iid product.
pub fn classical_i0_iid(base: &JointPmf, n: usize, eps: f64) -> Result<DivergenceResult> {
    check_epsilon(eps)?;
    let s = iid_llr_spectrum(base, n)?;
    let target = 1.0 - eps;
    let (mut m, mut q) = (0.0, 0.0);
    let mut threshold = s.atoms.first().map_or(0.0, |a| a.llr);
    let mut weight = 1.0;
    for a in s.atoms.iter().rev() {
        threshold = a.llr;
        if m + a.mass < target {
            m += a.mass;
            q += a.product_mass();
        } else {
            weight = ((target - m) / a.mass).clamp(0.0, 1.0);
            m += weight * a.mass;
            q += weight * a.product_mass();
            break;
        }
    }
    Ok(DivergenceResult {
        value: -q.log2(),
        epsilon: eps,
        method: Method::Spectrum,
        witness: Witness::LlrThreshold { blocklength: n, threshold, boundary_weight: weight, joint_mass: m, product_mass: q },
        relaxation_gap: None,
    })
}

/// Deterministic upper llr set `{llr >= threshold}` meeting `1 - eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub blocklength: usize,
    /// llr threshold in bits.
    pub threshold: f64,
    pub joint_mass: f64,
    pub product_mass: f64,
    /// `-log2(product_mass)`: the min divergence value certified by this set.
    pub value: f64,
}

/// Smallest whole-atom upper set of the iid llr law with joint mass `>= 1 - eps`.
pub fn iid_threshold_set(base: &JointPmf, n: usize, eps: f64) -> Result<ThresholdSet> {
    check_epsilon(eps)?;
    let s = iid_llr_spectrum(base, n)?;
    let target = 1.0 - eps - MASS_SLACK;
    let (mut m, mut q) = (0.0, 0.0);
    let mut threshold = f64::NEG_INFINITY;
    let mut taken = 0;
    for a in s.atoms.iter().rev() {
        m += a.mass;
        q += a.product_mass();
        threshold = a.llr;
        taken += 1;
        if m >= target {
            break;
        }
    }
    // Membership tests use `llr >= threshold - THRESHOLD_SLACK`; count what they admit.
    for a in s.atoms.iter().rev().skip(taken) {
        if a.llr < threshold - THRESHOLD_SLACK {
            break;
        }
        m += a.mass;
        q += a.product_mass();
    }
    Ok(ThresholdSet { blocklength: n, threshold, joint_mass: m, product_mass: q, value: -q.log2() })
}
