//! Pretty-good-measurement decoders for classical-quantum broadcast channels.

use serde::{Deserialize, Serialize};

use super::classical::Receiver;
use super::codebook::Codebook;
use super::encoder::InputQuality;
use crate::channel::CqBroadcastChannel;
use crate::divergence::CqNpTest;
use crate::error::{Error, Result};
use crate::prob::{cumulative, sample_cdf};
use crate::quantum::{inverse_sqrt_on_support, trace_product, CMatrix, DensityOperator, HermitianOperator, C64};
use crate::rng::SeededRng;

/// `alpha(u, x) = Tr[Lambda_u rho^B_x]` and `beta(v, x) = Tr[Lambda_v rho^C_x]`, tabulated.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumQuality {
    nx: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl QuantumQuality {
    pub fn new(channel: &CqBroadcastChannel, test_b: &CqNpTest, test_c: &CqNpTest) -> Result<Self> {
        let nx = channel.x_alphabet().len();
        let table = |blocks: &[HermitianOperator], marg: &dyn Fn(usize) -> DensityOperator, dim: usize| -> Result<Vec<f64>> {
            let states: Vec<DensityOperator> = (0..nx).map(marg).collect();
            let mut out = Vec::with_capacity(blocks.len() * nx);
            for b in blocks {
                if b.dim() != dim {
                    return Err(Error::DimensionMismatch(format!("test block of dim {} on a system of dim {dim}", b.dim())));
                }
                out.extend(states.iter().map(|s| trace_product(b.matrix(), s.matrix()).clamp(0.0, 1.0)));
            }
            Ok(out)
        };
        Ok(Self {
            nx,
            alpha: table(&test_b.blocks, &|x| channel.state_b(x), channel.dim_b())?,
            beta: table(&test_c.blocks, &|x| channel.state_c(x), channel.dim_c())?,
        })
    }

    pub fn alpha_at(&self, u: usize, x: usize) -> f64 {
        self.alpha[u * self.nx + x]
    }

    pub fn beta_at(&self, v: usize, x: usize) -> f64 {
        self.beta[v * self.nx + x]
    }
}

impl InputQuality for QuantumQuality {
    fn alpha(&self, u: &[u16], x: &[u16]) -> f64 {
        self.alpha_at(usize::from(u[0]), usize::from(x[0]))
    }

    fn beta(&self, v: &[u16], x: &[u16]) -> f64 {
        self.beta_at(usize::from(v[0]), usize::from(x[0]))
    }
}

/// PGM over every row (column) of a codebook, stored per distinct codeword symbol.
///
/// Rows sharing a symbol share `T_k`, so the measurement is sampled as a symbol group
/// followed by a uniform member of the group.
#[derive(Clone, Debug)]
pub struct ReceiverMeasurement {
    receiver: Receiver,
    /// Indices of the rows (columns) in each group.
    members: Vec<Vec<usize>>,
    /// `n_u T_u` per group, then the completion.
    elements: Vec<CMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumDecode {
    pub index: Option<usize>,
    pub message: usize,
    /// The completion outcome occurred.
    pub failure: bool,
}

impl ReceiverMeasurement {
    /// `blocks[u]` is the receiver's test operator for codeword symbol `u`.
    pub fn new(codebook: &Codebook, receiver: Receiver, blocks: &[HermitianOperator]) -> Result<Self> {
        if codebook.word_len() != 1 {
            return Err(Error::InvalidInput("quantum decoding uses single-letter words over an n-fold design".into()));
        }
        let (count, symbols) = match receiver {
            Receiver::B => (codebook.nrows(), codebook.design().u_size()),
            Receiver::C => (codebook.ncols(), codebook.design().v_size()),
        };
        if blocks.len() != symbols {
            return Err(Error::DimensionMismatch(format!("{} test blocks for {symbols} symbols", blocks.len())));
        }
        let dim = blocks[0].dim();
        let mut members = vec![Vec::new(); symbols];
        for i in 0..count {
            let s = match receiver {
                Receiver::B => codebook.row(i)[0],
                Receiver::C => codebook.col(i)[0],
            };
            members[usize::from(s)].push(i);
        }
        let mut total = CMatrix::zeros(dim, dim);
        for (b, m) in blocks.iter().zip(&members) {
            total += b.matrix() * C64::new(m.len() as f64, 0.0);
        }
        let root = inverse_sqrt_on_support(&total);
        let mut elements: Vec<CMatrix> =
            blocks.iter().zip(&members).map(|(b, m)| &root * b.matrix() * &root * C64::new(m.len() as f64, 0.0)).collect();
        let completion = elements.iter().fold(CMatrix::identity(dim, dim), |acc, e| acc - e);
        elements.push(completion);
        Ok(Self { receiver, members, elements })
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Probability of each symbol group, then of the completion, on `state`.
    pub fn group_probabilities(&self, state: &CMatrix) -> Result<Vec<f64>> {
        if state.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!("state of dim {} for a measurement of dim {}", state.nrows(), self.dim())));
        }
        Ok(self.elements.iter().map(|e| trace_product(e, state).max(0.0)).collect())
    }

    /// `Tr[T_i rho]` for codebook index `i`.
    pub fn index_probability(&self, state: &CMatrix, i: usize) -> Result<f64> {
        let probs = self.group_probabilities(state)?;
        for (g, m) in self.members.iter().enumerate() {
            if m.contains(&i) {
                return Ok(probs[g] / m.len() as f64);
            }
        }
        Ok(0.0)
    }

    fn resolve(&self, codebook: &Codebook, group: usize, rng: &mut SeededRng) -> QuantumDecode {
        if group == self.members.len() {
            return QuantumDecode { index: None, message: 0, failure: true };
        }
        let m = &self.members[group];
        let i = m[rng.below(m.len() as u64) as usize];
        let message = match self.receiver {
            Receiver::B => codebook.row_message(i),
            Receiver::C => codebook.col_message(i),
        };
        QuantumDecode { index: Some(i), message, failure: false }
    }
}

fn draw(probs: &[f64], rng: &mut SeededRng) -> usize {
    sample_cdf(&cumulative(probs), rng.uniform())
}

/// Measures one receiver's reduced state.
pub fn decode_quantum(
    measurement: &ReceiverMeasurement,
    codebook: &Codebook,
    state: &DensityOperator,
    rng: &mut SeededRng,
) -> Result<QuantumDecode> {
    let probs = measurement.group_probabilities(state.matrix())?;
    let g = draw(&probs, rng);
    Ok(measurement.resolve(codebook, g, rng))
}

/// Both receivers measure their halves of `rho^{BC}`; the second sees the post-measurement
/// conditional state of the first.
pub fn decode_quantum_pair(
    bob: &ReceiverMeasurement,
    charlie: &ReceiverMeasurement,
    codebook: &Codebook,
    state: &DensityOperator,
    rng: &mut SeededRng,
) -> Result<(QuantumDecode, QuantumDecode)> {
    let (db, dc) = (bob.dim(), charlie.dim());
    if state.dim() != db * dc {
        return Err(Error::DimensionMismatch(format!("state of dim {} for receivers of dims {db} and {dc}", state.dim())));
    }
    let rho = state.matrix();
    let rho_b = CMatrix::from_fn(db, db, |i, j| (0..dc).map(|c| rho[(i * dc + c, j * dc + c)]).sum());
    let probs = bob.group_probabilities(&rho_b)?;
    let g = draw(&probs, rng);
    let first = bob.resolve(codebook, g, rng);
    // Tr_B[(G (x) I) rho], normalized.
    let e = &bob.elements[g];
    let mut cond = CMatrix::from_fn(dc, dc, |c, c2| {
        let mut acc = C64::new(0.0, 0.0);
        for b in 0..db {
            for b2 in 0..db {
                acc += e[(b2, b)] * rho[(b * dc + c, b2 * dc + c2)];
            }
        }
        acc
    });
    let mass: f64 = cond.diagonal().iter().map(|z| z.re).sum();
    if mass > 0.0 {
        cond /= C64::new(mass, 0.0);
    }
    let probs = charlie.group_probabilities(&cond)?;
    let h = draw(&probs, rng);
    Ok((first, charlie.resolve(codebook, h, rng)))
}
