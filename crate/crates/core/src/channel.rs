//! Broadcast channel models, input designs and the joint objects built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{cumulative, sample_cdf, JointPmf};
use crate::quantum::{partial_trace, CMatrix, DensityOperator, C64};
use crate::rng::SeededRng;

/// Separator between per-letter labels of product alphabets.
pub const PRODUCT_LABEL_SEPARATOR: &str = "|";
/// Largest transition table materialized by [`ClassicalBroadcastChannel::nfold`].
pub const CLASSICAL_DENSE_CAP: usize = 1_000_000;
/// Largest total Hilbert dimension handled densely.
pub const QUANTUM_DIM_CAP: usize = 1 << 10;

/// `x -> p(y, z | x)` over finite alphabets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassicalRepr", into = "ClassicalRepr")]
pub struct ClassicalBroadcastChannel {
    x_alphabet: Vec<String>,
    y_alphabet: Vec<String>,
    z_alphabet: Vec<String>,
    transition: Vec<JointPmf>,
    y_given_x: Vec<Vec<f64>>,
    z_given_x: Vec<Vec<f64>>,
    cdf: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ClassicalRepr {
    x_alphabet: Vec<String>,
    y_alphabet: Vec<String>,
    z_alphabet: Vec<String>,
    p: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<ClassicalRepr> for ClassicalBroadcastChannel {
    type Error = Error;
    fn try_from(r: ClassicalRepr) -> Result<Self> {
        if r.p.len() != r.x_alphabet.len() {
            return Err(Error::InvalidInput(format!("p: {} slices for {} input symbols", r.p.len(), r.x_alphabet.len())));
        }
        let transition = r
            .p
            .into_iter()
            .zip(&r.x_alphabet)
            .map(|(slice, x)| {
                JointPmf::new(r.y_alphabet.clone(), r.z_alphabet.clone(), slice).map_err(|e| Error::InvalidInput(format!("p[{x:?}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(r.x_alphabet, transition)
    }
}

impl From<ClassicalBroadcastChannel> for ClassicalRepr {
    fn from(c: ClassicalBroadcastChannel) -> Self {
        let ny = c.y_alphabet.len();
        let nz = c.z_alphabet.len();
        ClassicalRepr {
            p: c.transition.iter().map(|t| (0..ny).map(|y| (0..nz).map(|z| t.get(y, z)).collect()).collect()).collect(),
            x_alphabet: c.x_alphabet,
            y_alphabet: c.y_alphabet,
            z_alphabet: c.z_alphabet,
        }
    }
}

fn unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    if labels.is_empty() {
        return Err(Error::InvalidInput(format!("{what} is empty")));
    }
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::InvalidInput(format!("{what}: duplicate symbol {l:?}")));
        }
    }
    Ok(())
}

impl ClassicalBroadcastChannel {
    /// One joint over `Y x Z` per input symbol; all slices must share the output alphabets.
    pub fn new(x_alphabet: Vec<String>, transition: Vec<JointPmf>) -> Result<Self> {
        unique(&x_alphabet, "x_alphabet")?;
        let first = transition.first().ok_or_else(|| Error::InvalidInput("no transition slices".into()))?;
        if transition.len() != x_alphabet.len() {
            return Err(Error::InvalidInput("one transition slice per input symbol is required".into()));
        }
        let y_alphabet = first.row_labels().to_vec();
        let z_alphabet = first.col_labels().to_vec();
        if transition.iter().any(|t| t.row_labels() != y_alphabet || t.col_labels() != z_alphabet) {
            return Err(Error::InvalidInput("transition slices use different output alphabets".into()));
        }
        let y_given_x = transition.iter().map(JointPmf::row_marginal).collect();
        let z_given_x = transition.iter().map(JointPmf::col_marginal).collect();
        let cdf = transition.iter().map(|t| cumulative(t.flat())).collect();
        Ok(Self { x_alphabet, y_alphabet, z_alphabet, transition, y_given_x, z_given_x, cdf })
    }

    /// Both receivers see the input unchanged.
    pub fn noiseless(alphabet: Vec<String>) -> Result<Self> {
        let n = alphabet.len();
        let slices = (0..n)
            .map(|x| {
                let mut rows = vec![vec![0.0; n]; n];
                rows[x][x] = 1.0;
                JointPmf::new(alphabet.clone(), alphabet.clone(), rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, slices)
    }

    /// Binary input; `Y` and `Z` are independent flips of `X` with the given crossover probabilities.
    pub fn binary_symmetric(p_y: f64, p_z: f64) -> Result<Self> {
        let bits = vec!["0".to_string(), "1".to_string()];
        let slices = (0..2)
            .map(|x| {
                let py = |y: usize| if y == x { 1.0 - p_y } else { p_y };
                let pz = |z: usize| if z == x { 1.0 - p_z } else { p_z };
                JointPmf::new(bits.clone(), bits.clone(), (0..2).map(|y| (0..2).map(|z| py(y) * pz(z)).collect()).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits, slices)
    }

    pub fn x_alphabet(&self) -> &[String] {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &[String] {
        &self.y_alphabet
    }

    pub fn z_alphabet(&self) -> &[String] {
        &self.z_alphabet
    }

    pub fn transition(&self, x: usize) -> &JointPmf {
        &self.transition[x]
    }

    /// `p(y | x)`.
    pub fn y_given_x(&self, x: usize) -> &[f64] {
        &self.y_given_x[x]
    }

    /// `p(z | x)`.
    pub fn z_given_x(&self, x: usize) -> &[f64] {
        &self.z_given_x[x]
    }

    pub fn x_index(&self, x: &str) -> Result<usize> {
        self.x_alphabet.iter().position(|s| s == x).ok_or_else(|| Error::UnknownSymbol(x.to_string()))
    }

    /// Joint draw of output indices for input index `x`.
    pub fn sample_indices(&self, x: usize, rng: &mut SeededRng) -> (usize, usize) {
        let cell = sample_cdf(&self.cdf[x], rng.uniform());
        let nz = self.z_alphabet.len();
        (cell / nz, cell % nz)
    }

    /// Memoryless use on a word of input indices; returns the two output words.
    pub fn sample_word(&self, x: &[u16], rng: &mut SeededRng) -> (Vec<u16>, Vec<u16>) {
        x.iter()
            .map(|&xi| {
                let (y, z) = self.sample_indices(xi as usize, rng);
                (y as u16, z as u16)
            })
            .unzip()
    }

    /// Dense `n`-fold memoryless extension with `|`-joined product labels.
    pub fn nfold(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("blocklength must be positive".into()));
        }
        let entries = (self.x_alphabet.len() as u128 * self.y_alphabet.len() as u128 * self.z_alphabet.len() as u128)
            .checked_pow(n as u32)
            .unwrap_or(u128::MAX);
        if entries > CLASSICAL_DENSE_CAP as u128 {
            return Err(Error::CapExceeded {
                what: "dense classical transition entries",
                needed: entries,
                cap: CLASSICAL_DENSE_CAP as u128,
            });
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.product(self)?;
        }
        Ok(out)
    }

    fn product(&self, other: &Self) -> Result<Self> {
        let xs = product_labels(&self.x_alphabet, &other.x_alphabet);
        let ys = product_labels(&self.y_alphabet, &other.y_alphabet);
        let zs = product_labels(&self.z_alphabet, &other.z_alphabet);
        let (ny2, nz2) = (other.y_alphabet.len(), other.z_alphabet.len());
        let mut slices = Vec::with_capacity(xs.len());
        for a in &self.transition {
            for b in &other.transition {
                let mut flat = vec![0.0; ys.len() * zs.len()];
                for (y1, z1, p1) in a.cells() {
                    for (y2, z2, p2) in b.cells() {
                        flat[(y1 * ny2 + y2) * zs.len() + z1 * nz2 + z2] = p1 * p2;
                    }
                }
                slices.push(JointPmf::from_flat(ys.clone(), zs.clone(), flat, 1e-9)?);
            }
        }
        Self::new(xs, slices)
    }
}

pub(crate) fn product_labels(a: &[String], b: &[String]) -> Vec<String> {
    a.iter().flat_map(|x| b.iter().map(move |y| format!("{x}{PRODUCT_LABEL_SEPARATOR}{y}"))).collect()
}

/// Joint draw of `(y, z)` labels for input `x`.
pub fn sample_output<'a>(channel: &'a ClassicalBroadcastChannel, x: &str, rng: &mut SeededRng) -> Result<(&'a str, &'a str)> {
    let xi = channel.x_index(x)?;
    let (y, z) = channel.sample_indices(xi, rng);
    Ok((&channel.y_alphabet[y], &channel.z_alphabet[z]))
}

/// `x -> rho_x^{BC}` with classical input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CqRepr", into = "CqRepr")]
pub struct CqBroadcastChannel {
    x_alphabet: Vec<String>,
    dim_b: usize,
    dim_c: usize,
    states: Vec<DensityOperator>,
}

#[derive(Serialize, Deserialize)]
struct CqRepr {
    x_alphabet: Vec<String>,
    dim_b: usize,
    dim_c: usize,
    states: BTreeMap<String, DensityOperator>,
}

impl TryFrom<CqRepr> for CqBroadcastChannel {
    type Error = Error;
    fn try_from(mut r: CqRepr) -> Result<Self> {
        let states = r
            .x_alphabet
            .iter()
            .map(|x| r.states.remove(x).ok_or_else(|| Error::InvalidInput(format!("states: missing entry for input {x:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = r.states.keys().next() {
            return Err(Error::UnknownSymbol(extra.clone()));
        }
        Self::new(r.x_alphabet, r.dim_b, r.dim_c, states)
    }
}

impl From<CqBroadcastChannel> for CqRepr {
    fn from(c: CqBroadcastChannel) -> Self {
        CqRepr { states: c.x_alphabet.iter().cloned().zip(c.states).collect(), x_alphabet: c.x_alphabet, dim_b: c.dim_b, dim_c: c.dim_c }
    }
}

impl CqBroadcastChannel {
    pub fn new(x_alphabet: Vec<String>, dim_b: usize, dim_c: usize, states: Vec<DensityOperator>) -> Result<Self> {
        unique(&x_alphabet, "x_alphabet")?;
        if states.len() != x_alphabet.len() {
            return Err(Error::InvalidInput("one output state per input symbol is required".into()));
        }
        if let Some((x, s)) = x_alphabet.iter().zip(&states).find(|(_, s)| s.dim() != dim_b * dim_c) {
            return Err(Error::DimensionMismatch(format!("state for {x:?} has dim {}, expected {}", s.dim(), dim_b * dim_c)));
        }
        if dim_b * dim_c > QUANTUM_DIM_CAP {
            return Err(Error::CapExceeded {
                what: "output Hilbert dimension",
                needed: (dim_b * dim_c) as u128,
                cap: QUANTUM_DIM_CAP as u128,
            });
        }
        Ok(Self { x_alphabet, dim_b, dim_c, states })
    }

    /// Classical channel embedded as diagonal states (`B`, `C` in the computational basis).
    pub fn from_classical(channel: &ClassicalBroadcastChannel) -> Result<Self> {
        let states = channel.transition.iter().map(|t| DensityOperator::diagonal(t.flat())).collect::<Result<Vec<_>>>()?;
        Self::new(channel.x_alphabet.clone(), channel.y_alphabet.len(), channel.z_alphabet.len(), states)
    }

    pub fn x_alphabet(&self) -> &[String] {
        &self.x_alphabet
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn state(&self, x: usize) -> &DensityOperator {
        &self.states[x]
    }

    pub fn x_index(&self, x: &str) -> Result<usize> {
        self.x_alphabet.iter().position(|s| s == x).ok_or_else(|| Error::UnknownSymbol(x.to_string()))
    }

    /// `rho_x^B = Tr_C rho_x^{BC}`.
    pub fn state_b(&self, x: usize) -> DensityOperator {
        partial_trace(&self.states[x], &[self.dim_b, self.dim_c], &[0]).expect("dims validated at construction")
    }

    /// `rho_x^C = Tr_B rho_x^{BC}`.
    pub fn state_c(&self, x: usize) -> DensityOperator {
        partial_trace(&self.states[x], &[self.dim_b, self.dim_c], &[1]).expect("dims validated at construction")
    }

    /// `rho_{x1..xn}` on `(B1..Bn) (x) (C1..Cn)`.
    pub fn nfold(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("blocklength must be positive".into()));
        }
        let total = (self.dim_b * self.dim_c) as u128;
        let needed = total.checked_pow(n as u32).unwrap_or(u128::MAX);
        if needed > QUANTUM_DIM_CAP as u128 {
            return Err(Error::CapExceeded { what: "n-fold Hilbert dimension", needed, cap: QUANTUM_DIM_CAP as u128 });
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.product(self);
        }
        Ok(out)
    }

    fn product(&self, other: &Self) -> Self {
        let xs = product_labels(&self.x_alphabet, &other.x_alphabet);
        let (b1, c1, b2, c2) = (self.dim_b, self.dim_c, other.dim_b, other.dim_c);
        // Kronecker order is (B1 C1 B2 C2); reorder to (B1 B2 C1 C2).
        let index = |b_1: usize, c_1: usize, b_2: usize, c_2: usize| ((b_1 * c1 + c_1) * b2 + b_2) * c2 + c_2;
        let dim = b1 * c1 * b2 * c2;
        let mut perm = vec![0usize; dim];
        for bb1 in 0..b1 {
            for bb2 in 0..b2 {
                for cc1 in 0..c1 {
                    for cc2 in 0..c2 {
                        let new = ((bb1 * b2 + bb2) * c1 + cc1) * c2 + cc2;
                        perm[new] = index(bb1, cc1, bb2, cc2);
                    }
                }
            }
        }
        let states = self
            .states
            .iter()
            .flat_map(|a| {
                other.states.iter().map(|b| {
                    let k = a.matrix().kronecker(b.matrix());
                    DensityOperator::from_matrix_unchecked(CMatrix::from_fn(dim, dim, |i, j| k[(perm[i], perm[j])]))
                })
            })
            .collect::<Vec<_>>();
        Self { x_alphabet: xs, dim_b: b1 * b2, dim_c: c1 * c2, states }
    }
}

/// Channel of either kind, as read from a channel file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BroadcastChannel {
    Classical(ClassicalBroadcastChannel),
    Cq(CqBroadcastChannel),
}

impl BroadcastChannel {
    pub fn x_alphabet(&self) -> &[String] {
        match self {
            Self::Classical(c) => c.x_alphabet(),
            Self::Cq(c) => c.x_alphabet(),
        }
    }
}

/// Auxiliary joint `p(u, v)` and the combining map `f: U x V -> X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DesignRepr", into = "DesignRepr")]
pub struct InputDesign {
    uv: JointPmf,
    /// Row-major `f(u, v)` labels; `None` only off the support.
    f: Vec<Option<String>>,
}

#[derive(Serialize, Deserialize)]
struct DesignRepr {
    uv: JointPmf,
    f: BTreeMap<String, String>,
}

impl TryFrom<DesignRepr> for InputDesign {
    type Error = Error;
    fn try_from(mut r: DesignRepr) -> Result<Self> {
        let mut f = Vec::with_capacity(r.uv.flat().len());
        for u in r.uv.row_labels() {
            for v in r.uv.col_labels() {
                f.push(r.f.remove(&format!("{u},{v}")));
            }
        }
        if let Some(extra) = r.f.keys().next() {
            return Err(Error::InvalidInput(format!("f: key {extra:?} is not a (u,v) pair of the design")));
        }
        Self::new(r.uv, f)
    }
}

impl From<InputDesign> for DesignRepr {
    fn from(d: InputDesign) -> Self {
        let mut f = BTreeMap::new();
        for (i, (u, v, _)) in d.uv.cells().enumerate() {
            if let Some(x) = &d.f[i] {
                f.insert(format!("{},{}", d.uv.row_labels()[u], d.uv.col_labels()[v]), x.clone());
            }
        }
        DesignRepr { uv: d.uv, f }
    }
}

impl InputDesign {
    pub fn new(uv: JointPmf, f: Vec<Option<String>>) -> Result<Self> {
        if f.len() != uv.flat().len() {
            return Err(Error::DimensionMismatch("f must have one entry per (u,v) cell".into()));
        }
        for (i, (u, v, p)) in uv.cells().enumerate() {
            if p > 0.0 && f[i].is_none() {
                return Err(Error::InvalidInput(format!(
                    "f: missing value for ({},{}) on the support",
                    uv.row_labels()[u],
                    uv.col_labels()[v]
                )));
            }
        }
        Ok(Self { uv, f })
    }

    /// Design whose map is given by a closure on indices.
    pub fn from_fn(uv: JointPmf, x_alphabet: &[String], f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let labels = uv.cells().map(|(u, v, _)| Some(x_alphabet[f(u, v)].clone())).collect();
        Self::new(uv, labels)
    }

    pub fn uv(&self) -> &JointPmf {
        &self.uv
    }

    pub fn f_label(&self, u: usize, v: usize) -> Option<&str> {
        self.f[u * self.uv.ncols() + v].as_deref()
    }

    /// Design on `n`-letter words with product labels, matching the channel's `nfold`.
    pub fn nfold(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("blocklength must be positive".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.product(self)?;
        }
        Ok(out)
    }

    fn product(&self, other: &Self) -> Result<Self> {
        let (a, b) = (&self.uv, &other.uv);
        let cells = (a.flat().len() as u128) * (b.flat().len() as u128);
        if cells > CLASSICAL_DENSE_CAP as u128 {
            return Err(Error::CapExceeded { what: "n-fold design cells", needed: cells, cap: CLASSICAL_DENSE_CAP as u128 });
        }
        let (rows, cols) = (a.nrows() * b.nrows(), a.ncols() * b.ncols());
        let mut probs = vec![0.0; rows * cols];
        let mut f = vec![None; rows * cols];
        for (u1, v1, p1) in a.cells() {
            for (u2, v2, p2) in b.cells() {
                let i = (u1 * b.nrows() + u2) * cols + v1 * b.ncols() + v2;
                probs[i] = p1 * p2;
                if let (Some(x1), Some(x2)) = (self.f_label(u1, v1), other.f_label(u2, v2)) {
                    f[i] = Some(format!("{x1}{PRODUCT_LABEL_SEPARATOR}{x2}"));
                }
            }
        }
        let uv = JointPmf::from_flat(
            product_labels(a.row_labels(), b.row_labels()),
            product_labels(a.col_labels(), b.col_labels()),
            probs,
            1e-10,
        )?;
        Self::new(uv, f)
    }

    /// Input indices per `(u, v)` cell; off-support cells without a value map to input 0.
    pub fn resolve(&self, x_alphabet: &[String]) -> Result<Vec<usize>> {
        self.f
            .iter()
            .map(|x| match x {
                None => Ok(0),
                Some(x) => x_alphabet.iter().position(|s| s == x).ok_or_else(|| Error::UnknownSymbol(x.clone())),
            })
            .collect()
    }
}

/// `rho^{UVBC}` with its register dimensions `[U, V, B, C]`.
#[derive(Clone, Debug)]
pub struct JointState {
    pub state: DensityOperator,
    pub dims: [usize; 4],
}

pub fn build_joint_state(channel: &CqBroadcastChannel, design: &InputDesign) -> Result<JointState> {
    let f = design.resolve(channel.x_alphabet())?;
    let uv = design.uv();
    let (du, dv, db, dc) = (uv.nrows(), uv.ncols(), channel.dim_b(), channel.dim_c());
    let dim = du * dv * db * dc;
    if dim > QUANTUM_DIM_CAP {
        return Err(Error::CapExceeded { what: "joint state dimension", needed: dim as u128, cap: QUANTUM_DIM_CAP as u128 });
    }
    let bc = db * dc;
    let mut m = CMatrix::zeros(dim, dim);
    for (u, v, p) in uv.cells() {
        if p == 0.0 {
            continue;
        }
        let off = (u * dv + v) * bc;
        let rho = channel.state(f[u * dv + v]).matrix() * C64::new(p, 0.0);
        m.view_mut((off, off), (bc, bc)).copy_from(&rho);
    }
    Ok(JointState { state: DensityOperator::from_matrix_unchecked(m), dims: [du, dv, db, dc] })
}

/// `rho^{UB} = sum_{u,v} p(u,v) |u><u| (x) rho^B_{f(u,v)}`, built directly.
pub fn build_ub_state(channel: &CqBroadcastChannel, design: &InputDesign) -> Result<DensityOperator> {
    side_state(channel, design, Side::B)
}

/// `rho^{VC}`, built directly.
pub fn build_vc_state(channel: &CqBroadcastChannel, design: &InputDesign) -> Result<DensityOperator> {
    side_state(channel, design, Side::C)
}

#[derive(Clone, Copy)]
enum Side {
    B,
    C,
}

fn side_state(channel: &CqBroadcastChannel, design: &InputDesign, side: Side) -> Result<DensityOperator> {
    let f = design.resolve(channel.x_alphabet())?;
    let uv = design.uv();
    let (reg, d) = match side {
        Side::B => (uv.nrows(), channel.dim_b()),
        Side::C => (uv.ncols(), channel.dim_c()),
    };
    let marg: Vec<DensityOperator> = (0..channel.x_alphabet().len())
        .map(|x| match side {
            Side::B => channel.state_b(x),
            Side::C => channel.state_c(x),
        })
        .collect();
    let mut m = CMatrix::zeros(reg * d, reg * d);
    for (u, v, p) in uv.cells() {
        if p == 0.0 {
            continue;
        }
        let r = match side {
            Side::B => u,
            Side::C => v,
        };
        let add = marg[f[u * uv.ncols() + v]].matrix() * C64::new(p, 0.0);
        let mut block = m.view_mut((r * d, r * d), (d, d));
        block += add;
    }
    Ok(DensityOperator::from_matrix_unchecked(m))
}

/// `(p(u, y), p(v, z))` for a classical channel under a design.
pub fn build_classical_joints(channel: &ClassicalBroadcastChannel, design: &InputDesign) -> Result<(JointPmf, JointPmf)> {
    let f = design.resolve(channel.x_alphabet())?;
    let uv = design.uv();
    let (ny, nz) = (channel.y_alphabet().len(), channel.z_alphabet().len());
    let mut uy = vec![0.0; uv.nrows() * ny];
    let mut vz = vec![0.0; uv.ncols() * nz];
    for (u, v, p) in uv.cells() {
        if p == 0.0 {
            continue;
        }
        let x = f[u * uv.ncols() + v];
        for (y, py) in channel.y_given_x(x).iter().enumerate() {
            uy[u * ny + y] += p * py;
        }
        for (z, pz) in channel.z_given_x(x).iter().enumerate() {
            vz[v * nz + z] += p * pz;
        }
    }
    Ok((
        JointPmf::from_flat(uv.row_labels().to_vec(), channel.y_alphabet().to_vec(), uy, 1e-10)?,
        JointPmf::from_flat(uv.col_labels().to_vec(), channel.z_alphabet().to_vec(), vz, 1e-10)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::labels;
    use crate::quantum::random::random_density;
    use crate::quantum::{partial_trace, tensor};

    fn bits() -> Vec<String> {
        vec!["0".into(), "1".into()]
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn random_cq(rng: &mut SeededRng, nx: usize) -> CqBroadcastChannel {
        let xs = labels("x", nx);
        let states = (0..nx).map(|_| random_density(4, 2, rng)).collect();
        CqBroadcastChannel::new(xs, 2, 2, states).unwrap()
    }

    fn random_joint(rng: &mut SeededRng, r: usize, c: usize) -> JointPmf {
        let raw: Vec<f64> = (0..r * c).map(|_| rng.uniform() + 0.05).collect();
        let t: f64 = raw.iter().sum();
        JointPmf::from_flat(labels("u", r), labels("v", c), raw.iter().map(|x| x / t).collect(), 1e-10).unwrap()
    }

    #[test]
    fn classical_json_round_trip() {
        let ch = ClassicalBroadcastChannel::binary_symmetric(0.1, 0.2).unwrap();
        let s = serde_json::to_string(&BroadcastChannel::Classical(ch.clone())).unwrap();
        assert!(s.starts_with(r#"{"type":"classical","x_alphabet":["0","1"]"#));
        let back: BroadcastChannel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, BroadcastChannel::Classical(ch));
    }

    #[test]
    fn cq_json_round_trip_and_errors() {
        let mut rng = SeededRng::new(1, 0);
        let ch = random_cq(&mut rng, 2);
        let s = serde_json::to_string(&BroadcastChannel::Cq(ch.clone())).unwrap();
        let back: BroadcastChannel = serde_json::from_str(&s).unwrap();
        let BroadcastChannel::Cq(back) = back else { panic!() };
        assert!(max_diff(back.state(1).matrix(), ch.state(1).matrix()) < 1e-15);
        let missing = r#"{"type":"cq","x_alphabet":["a"],"dim_b":1,"dim_c":1,"states":{}}"#;
        assert!(serde_json::from_str::<BroadcastChannel>(missing).is_err());
    }

    #[test]
    fn point_mass_design() {
        let mut rng = SeededRng::new(1, 1);
        let ch = random_cq(&mut rng, 2);
        let uv = JointPmf::new(bits(), bits(), vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let d = InputDesign::from_fn(uv, ch.x_alphabet(), |u, v| u ^ v).unwrap();
        let js = build_joint_state(&ch, &d).unwrap();
        let u0 = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
        let v1 = DensityOperator::diagonal(&[0.0, 1.0]).unwrap();
        let expected = tensor(&tensor(&u0, &v1), ch.state(1));
        assert!(max_diff(js.state.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn diagonal_states_match_classical() {
        let cl = ClassicalBroadcastChannel::binary_symmetric(0.1, 0.3).unwrap();
        let cq = CqBroadcastChannel::from_classical(&cl).unwrap();
        let uv = JointPmf::new(bits(), bits(), vec![vec![0.25; 2]; 2]).unwrap();
        let d = InputDesign::from_fn(uv, cl.x_alphabet(), |u, v| u ^ v).unwrap();
        let js = build_joint_state(&cq, &d).unwrap();
        let (uy, _) = build_classical_joints(&cl, &d).unwrap();
        let ub = partial_trace(&js.state, &js.dims, &[0, 2]).unwrap();
        let diag: Vec<f64> = ub.matrix().diagonal().iter().map(|z| z.re).collect();
        for (a, b) in diag.iter().zip(uy.flat()) {
            assert!((a - b).abs() < 1e-12);
        }
        let off = ub.matrix().iter().enumerate().filter(|(i, _)| i % 5 != 0).map(|(_, z)| z.norm()).fold(0.0, f64::max);
        assert!(off < 1e-15);
    }

    #[test]
    fn joint_state_trace_and_commuting_constructions() {
        let mut rng = SeededRng::new(1, 2);
        for _ in 0..10 {
            let ch = random_cq(&mut rng, 3);
            let uv = random_joint(&mut rng, 2, 3);
            let d = InputDesign::from_fn(uv, ch.x_alphabet(), |u, v| (u + v) % 3).unwrap();
            let js = build_joint_state(&ch, &d).unwrap();
            assert!((js.state.trace() - 1.0).abs() < 1e-10);
            let ub = partial_trace(&js.state, &js.dims, &[0, 2]).unwrap();
            assert!(max_diff(ub.matrix(), build_ub_state(&ch, &d).unwrap().matrix()) < 1e-10);
            let vc = partial_trace(&js.state, &js.dims, &[1, 3]).unwrap();
            assert!(max_diff(vc.matrix(), build_vc_state(&ch, &d).unwrap().matrix()) < 1e-10);
        }
    }

    #[test]
    fn noiseless_classical_joint() {
        let ch = ClassicalBroadcastChannel::noiseless(bits()).unwrap();
        let uv = JointPmf::new(bits(), bits(), vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let d = InputDesign::from_fn(uv, ch.x_alphabet(), |u, _| u).unwrap();
        let (uy, _) = build_classical_joints(&ch, &d).unwrap();
        assert_eq!(uy.flat(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn independent_design_reduces_to_single_user() {
        let ch = ClassicalBroadcastChannel::binary_symmetric(0.1, 0.4).unwrap();
        let uv = JointPmf::new(bits(), bits(), vec![vec![0.3 * 0.6, 0.3 * 0.4], vec![0.7 * 0.6, 0.7 * 0.4]]).unwrap();
        let d = InputDesign::from_fn(uv, ch.x_alphabet(), |u, _| u).unwrap();
        let (uy, _) = build_classical_joints(&ch, &d).unwrap();
        let expected = [0.3 * 0.9, 0.3 * 0.1, 0.7 * 0.1, 0.7 * 0.9];
        for (a, b) in uy.flat().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn classical_joints_match_enumeration() {
        let mut rng = SeededRng::new(1, 3);
        let slices = (0..2)
            .map(|_| {
                let j = random_joint(&mut rng, 2, 2);
                JointPmf::from_flat(bits(), bits(), j.flat().to_vec(), 1e-10).unwrap()
            })
            .collect();
        let ch = ClassicalBroadcastChannel::new(bits(), slices).unwrap();
        let uv = random_joint(&mut rng, 2, 2);
        let d = InputDesign::from_fn(uv.clone(), ch.x_alphabet(), |u, v| u & v).unwrap();
        let (uy, vz) = build_classical_joints(&ch, &d).unwrap();
        let mut buy = [0.0; 4];
        let mut bvz = [0.0; 4];
        for u in 0..2 {
            for v in 0..2 {
                for y in 0..2 {
                    for z in 0..2 {
                        let p = uv.get(u, v) * ch.transition(u & v).get(y, z);
                        buy[u * 2 + y] += p;
                        bvz[v * 2 + z] += p;
                    }
                }
            }
        }
        for i in 0..4 {
            assert!((uy.flat()[i] - buy[i]).abs() < 1e-14);
            assert!((vz.flat()[i] - bvz[i]).abs() < 1e-14);
        }
        let (pu, _) = uy.marginals();
        for (a, b) in pu.probs().iter().zip(uv.row_marginal()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn classical_nfold() {
        let ch = ClassicalBroadcastChannel::binary_symmetric(0.1, 0.3).unwrap();
        assert_eq!(ch.nfold(1).unwrap(), ch);
        let two = ch.nfold(2).unwrap();
        assert_eq!(two.x_alphabet()[2], "1|0");
        for x1 in 0..2 {
            for x2 in 0..2 {
                let t = two.transition(x1 * 2 + x2);
                for (y, z, p) in t.cells() {
                    let expected = ch.transition(x1).get(y / 2, z / 2) * ch.transition(x2).get(y % 2, z % 2);
                    assert!((p - expected).abs() < 1e-15);
                }
            }
        }
        // Marginalizing the second slot returns the base channel.
        for x in 0..2 {
            let t = two.transition(x * 2);
            for y in 0..2 {
                for z in 0..2 {
                    let m: f64 = (0..2).flat_map(|y2| (0..2).map(move |z2| (y2, z2))).map(|(y2, z2)| t.get(y * 2 + y2, z * 2 + z2)).sum();
                    assert!((m - ch.transition(x).get(y, z)).abs() < 1e-15);
                }
            }
        }
        assert!(matches!(ch.nfold(20), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn quantum_nfold_reorders_subsystems() {
        let mut rng = SeededRng::new(1, 4);
        let ch = random_cq(&mut rng, 2);
        let two = ch.nfold(2).unwrap();
        assert_eq!(two.dim_b(), 4);
        // Tracing out C1 C2 must give rho^B_{x1} (x) rho^B_{x2}.
        let b = partial_trace(two.state(1), &[2, 2, 2, 2], &[0, 1]).unwrap();
        let expected = tensor(&ch.state_b(0), &ch.state_b(1));
        assert!(max_diff(b.matrix(), expected.matrix()) < 1e-12);
        let full = tensor(ch.state(0), ch.state(1));
        let reordered = partial_trace(&full, &[2, 2, 2, 2], &[0, 2]).unwrap();
        assert!(max_diff(b.matrix(), reordered.matrix()) < 1e-12);
        assert!(ch.nfold(6).is_err());
    }

    #[test]
    fn design_nfold_matches_channel_nfold() {
        let mut rng = SeededRng::new(1, 7);
        let ch = random_cq(&mut rng, 2);
        let uv = JointPmf::new(bits(), bits(), vec![vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let d = InputDesign::from_fn(uv, ch.x_alphabet(), |u, v| (u + v) % 2).unwrap();
        let (ch2, d2) = (ch.nfold(2).unwrap(), d.nfold(2).unwrap());
        assert_eq!(d2.uv().get(1, 2), 0.2 * 0.1);
        assert_eq!(d2.f_label(1, 2), Some("x1|x1"));
        assert_eq!(d2.f_label(0, 1), Some("x0|x1"));
        // The U register of the two-letter state is the product of the one-letter ones.
        let one = build_ub_state(&ch, &d).unwrap();
        let two = build_ub_state(&ch2, &d2).unwrap();
        let direct = tensor(&one, &one);
        // tensor gives (U1 B1 U2 B2); reorder to (U1 U2 B1 B2).
        let reordered = partial_trace(&direct, &[2, 2, 2, 2], &[0, 1, 2, 3]).unwrap();
        let perm = |i: usize| {
            let (u1, u2, b1, b2) = (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
            (u1 << 3) | (b1 << 2) | (u2 << 1) | b2
        };
        let m = CMatrix::from_fn(16, 16, |i, j| reordered.matrix()[(perm(i), perm(j))]);
        assert!(max_diff(two.matrix(), &m) < 1e-12);
    }

    #[test]
    fn sampling() {
        let mut rng = SeededRng::new(1, 5);
        let ch = ClassicalBroadcastChannel::noiseless(bits()).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_output(&ch, "1", &mut rng).unwrap(), ("1", "1"));
        }
        assert!(matches!(sample_output(&ch, "2", &mut rng), Err(Error::UnknownSymbol(_))));
        // Deterministic to Bob, noisy to Charlie.
        let half = ClassicalBroadcastChannel::binary_symmetric(0.0, 0.5).unwrap();
        let zs: Vec<&str> = (0..200)
            .map(|_| sample_output(&half, "0", &mut rng).unwrap())
            .map(|(y, z)| {
                assert_eq!(y, "0");
                z
            })
            .collect();
        assert!(zs.contains(&"0") && zs.contains(&"1"));
    }

    #[test]
    fn output_frequencies() {
        let mut rng = SeededRng::new(1, 6);
        let ch = ClassicalBroadcastChannel::binary_symmetric(0.1, 0.3).unwrap();
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let (y, z) = ch.sample_indices(1, &mut rng);
            counts[y * 2 + z] += 1;
        }
        for (c, p) in counts.iter().zip(ch.transition(1).flat()) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() <= 3.0 * sigma + 1.0);
        }
    }

    #[test]
    fn design_validation() {
        let uv = JointPmf::new(bits(), bits(), vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let json = serde_json::json!({"uv": uv, "f": {"0,0": "a", "1,1": "b"}});
        let d: InputDesign = serde_json::from_value(json).unwrap();
        assert_eq!(d.f_label(1, 1), Some("b"));
        assert!(d.resolve(&["a".into()]).is_err());
        let missing = serde_json::json!({"uv": uv, "f": {"0,0": "a"}});
        assert!(serde_json::from_value::<InputDesign>(missing).is_err());
    }
}
