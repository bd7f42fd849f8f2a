//! Classical decoding sets, their acceptance probabilities, and the band decoders.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use super::encoder::InputQuality;
use crate::channel::ClassicalBroadcastChannel;
use crate::divergence::spectrum::{key, THRESHOLD_SLACK};
use crate::divergence::{classical_i0, iid_threshold_set, I0Method, Witness, LLR_RESOLUTION};
use crate::error::{Error, Result};
use crate::prob::JointPmf;

/// Which receiver a set, a decoder or a bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Receiver {
    /// Decodes rows (`U`) from `Y`.
    B,
    /// Decodes columns (`V`) from `Z`.
    C,
}

/// Acceptance region `A` of a receiver's hypothesis test on (codeword, output) pairs.
#[derive(Clone, Debug, PartialEq)]
pub enum DecodingSet {
    /// Explicit single-letter cells `(u, y)`, row-major over the output alphabet.
    Explicit { outputs: usize, member: Vec<bool> },
    /// `{ (u, y) : sum_t llr(u_t, y_t) >= threshold }` over words of any length.
    Threshold { outputs: usize, llr: Vec<f64>, threshold: f64 },
}

/// A decoding set with the min divergence it certifies.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedSet {
    pub set: DecodingSet,
    /// `-log2` of the set's mass under the product of marginals.
    pub value: f64,
    /// Mass under the joint.
    pub joint_mass: f64,
}

impl DecodingSet {
    /// Set from the cell witness of a single-letter divergence.
    pub fn from_witness(joint: &JointPmf, witness: &Witness) -> Result<Self> {
        let Witness::Cells { cells, fractional, .. } = witness else {
            return Err(Error::InvalidInput("decoding set needs a cell witness".into()));
        };
        if fractional.is_some() {
            return Err(Error::InvalidInput("a randomized test has no deterministic decoding set".into()));
        }
        let mut member = vec![false; joint.flat().len()];
        for &(u, y) in cells {
            member[u * joint.ncols() + y] = true;
        }
        Ok(Self::Explicit { outputs: joint.ncols(), member })
    }

    pub fn threshold(joint: &JointPmf, threshold: f64) -> Self {
        Self::Threshold { outputs: joint.ncols(), llr: joint.llr_table(), threshold }
    }

    pub fn contains(&self, u: &[u16], y: &[u16]) -> bool {
        match self {
            Self::Explicit { outputs, member } => u.len() == 1 && member[usize::from(u[0]) * outputs + usize::from(y[0])],
            Self::Threshold { outputs, llr, threshold } => {
                let s: f64 = u.iter().zip(y).map(|(&a, &b)| llr[usize::from(a) * outputs + usize::from(b)]).sum();
                s >= threshold - THRESHOLD_SLACK
            }
        }
    }
}

/// Decoding set for `word_len` iid uses of `joint` with joint mass at least `1 - eps0`.
///
/// Length one uses `method` on the single-letter table; longer words use the llr threshold set.
pub fn certified_set(joint: &JointPmf, word_len: usize, eps0: f64, method: I0Method) -> Result<CertifiedSet> {
    if word_len == 1 {
        if method == I0Method::Randomized {
            return Err(Error::InvalidInput("a randomized test has no deterministic decoding set".into()));
        }
        let r = classical_i0(joint, eps0, method)?;
        let joint_mass = match &r.witness {
            Witness::Cells { joint_mass, .. } => *joint_mass,
            _ => unreachable!("cell methods return cell witnesses"),
        };
        Ok(CertifiedSet { set: DecodingSet::from_witness(joint, &r.witness)?, value: r.value, joint_mass })
    } else {
        let t = iid_threshold_set(joint, word_len, eps0)?;
        Ok(CertifiedSet { set: DecodingSet::threshold(joint, t.threshold), value: t.value, joint_mass: t.joint_mass })
    }
}

/// Exact `alpha`/`beta` for a classical channel, memoized on letter-class counts.
#[derive(Debug)]
pub struct ClassicalQuality<'a> {
    channel: &'a ClassicalBroadcastChannel,
    set_b: &'a DecodingSet,
    set_c: &'a DecodingSet,
    cache: [Mutex<HashMap<Vec<u32>, f64>>; 2],
}

impl<'a> ClassicalQuality<'a> {
    pub fn new(channel: &'a ClassicalBroadcastChannel, set_b: &'a DecodingSet, set_c: &'a DecodingSet) -> Self {
        Self { channel, set_b, set_c, cache: [Mutex::new(HashMap::new()), Mutex::new(HashMap::new())] }
    }

    /// `Pr{(w, output) in A | x}` for the given receiver.
    pub fn acceptance(&self, receiver: Receiver, w: &[u16], x: &[u16]) -> f64 {
        let (set, outputs, cache) = match receiver {
            Receiver::B => (self.set_b, self.channel.y_alphabet().len(), &self.cache[0]),
            Receiver::C => (self.set_c, self.channel.z_alphabet().len(), &self.cache[1]),
        };
        let law = |x: usize| match receiver {
            Receiver::B => self.channel.y_given_x(x),
            Receiver::C => self.channel.z_given_x(x),
        };
        match set {
            DecodingSet::Explicit { member, .. } => {
                let base = usize::from(w[0]) * outputs;
                law(usize::from(x[0])).iter().enumerate().filter(|(y, _)| member[base + y]).map(|(_, p)| p).sum()
            }
            DecodingSet::Threshold { llr, threshold, .. } => {
                let nx = self.channel.x_alphabet().len();
                let nw = llr.len() / outputs;
                let mut counts = vec![0u32; nw * nx];
                for (&a, &b) in w.iter().zip(x) {
                    counts[usize::from(a) * nx + usize::from(b)] += 1;
                }
                if let Some(&v) = cache.lock().expect("cache lock").get(&counts) {
                    return v;
                }
                let v = threshold_acceptance(&counts, nx, outputs, llr, *threshold, &law);
                cache.lock().expect("cache lock").insert(counts, v);
                v
            }
        }
    }
}

/// Law of `sum_t llr(w_t, Y_t)` by convolution over (codeword letter, input letter) classes.
fn threshold_acceptance<'l>(
    counts: &[u32],
    nx: usize,
    outputs: usize,
    llr: &[f64],
    threshold: f64,
    law: &impl Fn(usize) -> &'l [f64],
) -> f64 {
    let mut acc: BTreeMap<i64, f64> = BTreeMap::from([(0, 1.0)]);
    for (class, &m) in counts.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let (w, x) = (class / nx, class % nx);
        let mut step: BTreeMap<i64, f64> = BTreeMap::new();
        for (y, &p) in law(x).iter().enumerate() {
            let l = llr[w * outputs + y];
            if p > 0.0 && l.is_finite() {
                *step.entry(key(l)).or_insert(0.0) += p;
            }
        }
        for _ in 0..m {
            let mut next = BTreeMap::new();
            for (&ka, &pa) in &acc {
                for (&kb, &pb) in &step {
                    *next.entry(ka + kb).or_insert(0.0) += pa * pb;
                }
            }
            acc = next;
        }
    }
    let cut = threshold - THRESHOLD_SLACK;
    acc.iter().filter(|(&k, _)| k as f64 * LLR_RESOLUTION >= cut).map(|(_, p)| p).sum::<f64>().min(1.0)
}

impl InputQuality for ClassicalQuality<'_> {
    fn alpha(&self, u: &[u16], x: &[u16]) -> f64 {
        self.acceptance(Receiver::B, u, x)
    }

    fn beta(&self, v: &[u16], x: &[u16]) -> f64 {
        self.acceptance(Receiver::C, v, x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalDecode {
    /// Every codebook index whose word passes the test with the received word.
    pub matches: Vec<usize>,
    /// Smallest matching index.
    pub index: Option<usize>,
    /// Band of `index`, or message 0 when nothing matches.
    pub message: usize,
}

impl ClassicalDecode {
    /// More than one message band contains a match.
    pub fn ambiguous(&self, codebook: &Codebook, receiver: Receiver) -> bool {
        let band = |i: usize| match receiver {
            Receiver::B => codebook.row_message(i),
            Receiver::C => codebook.col_message(i),
        };
        self.matches.iter().any(|&i| band(i) != self.message)
    }
}

/// Threshold decoder: all rows (columns) whose word tests positive with `received`.
pub fn decode_classical(codebook: &Codebook, receiver: Receiver, received: &[u16], set: &DecodingSet) -> ClassicalDecode {
    let matches: Vec<usize> = match receiver {
        Receiver::B => (0..codebook.nrows()).filter(|&k| set.contains(codebook.row(k), received)).collect(),
        Receiver::C => (0..codebook.ncols()).filter(|&l| set.contains(codebook.col(l), received)).collect(),
    };
    let index = matches.first().copied();
    let message = match (index, receiver) {
        (None, _) => 0,
        (Some(k), Receiver::B) => codebook.row_message(k),
        (Some(l), Receiver::C) => codebook.col_message(l),
    };
    ClassicalDecode { matches, index, message }
}

pub fn decode_bob_classical(codebook: &Codebook, y: &[u16], set: &DecodingSet) -> ClassicalDecode {
    decode_classical(codebook, Receiver::B, y, set)
}

pub fn decode_charlie_classical(codebook: &Codebook, z: &[u16], set: &DecodingSet) -> ClassicalDecode {
    decode_classical(codebook, Receiver::C, z, set)
}
