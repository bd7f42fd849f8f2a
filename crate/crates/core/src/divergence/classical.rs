use serde::{Deserialize, Serialize};

use super::{check_epsilon, DivergenceResult, FractionalCell, Method, Witness, MASS_SLACK};
use crate::error::{Error, Result};
use crate::prob::JointPmf;

/// Largest support handled by [`I0Method::Exhaustive`].
pub const EXHAUSTIVE_CELL_LIMIT: usize = 24;

/// Algorithm for the set-based min divergence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum I0Method {
    /// Descending likelihood ratio until the mass target is met. Feasible, possibly suboptimal.
    #[default]
    Greedy,
    /// Exact search over all subsets of the support.
    Exhaustive,
    /// Neyman-Pearson relaxation with one fractional cell.
    Randomized,
}

impl std::str::FromStr for I0Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Self::Greedy),
            "exhaustive" => Ok(Self::Exhaustive),
            "randomized" => Ok(Self::Randomized),
            other => Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    row: usize,
    col: usize,
    joint: f64,
    product: f64,
}

impl Cell {
    fn ratio(&self) -> f64 {
        self.joint / self.product
    }
}

fn support_cells(joint: &JointPmf) -> Vec<Cell> {
    let pu = joint.row_marginal();
    let pv = joint.col_marginal();
    joint.cells().filter(|&(_, _, p)| p > 0.0).map(|(row, col, p)| Cell { row, col, joint: p, product: pu[row] * pv[col] }).collect()
}

/// Smooth max divergence: the smallest `t` such that the cells with ratio at
/// most `2^t` carry mass at least `1 - eps`.
pub fn classical_i_infty(joint: &JointPmf, eps: f64) -> Result<DivergenceResult> {
    check_epsilon(eps)?;
    let mut cells = support_cells(joint);
    cells.sort_by(|a, b| a.ratio().total_cmp(&b.ratio()));
    let target = 1.0 - eps - MASS_SLACK;
    let mut mass = 0.0;
    let mut cut = cells.len() - 1;
    for (i, c) in cells.iter().enumerate() {
        mass += c.joint;
        if mass >= target {
            cut = i;
            break;
        }
    }
    let top = cells[cut].ratio();
    // Ties with the last admitted ratio do not change the maximum.
    let kept: Vec<&Cell> = cells.iter().filter(|c| c.ratio() <= top).collect();
    Ok(DivergenceResult {
        value: top.log2(),
        epsilon: eps,
        method: Method::Threshold,
        witness: Witness::Cells {
            cells: kept.iter().map(|c| (c.row, c.col)).collect(),
            fractional: None,
            joint_mass: kept.iter().map(|c| c.joint).sum(),
            product_mass: kept.iter().map(|c| c.product).sum(),
        },
        relaxation_gap: None,
    })
}

/// Smooth min divergence `sup { -log2 sum_A p_U p_V : p_UV(A) >= 1 - eps }`.
pub fn classical_i0(joint: &JointPmf, eps: f64, method: I0Method) -> Result<DivergenceResult> {
    check_epsilon(eps)?;
    let mut cells = support_cells(joint);
    // Descending ratio; index order breaks ties so results are reproducible.
    cells.sort_by(|a, b| b.ratio().total_cmp(&a.ratio()).then((a.row, a.col).cmp(&(b.row, b.col))));
    let target = 1.0 - eps;
    let (chosen, fractional) = match method {
        I0Method::Greedy => (greedy(&cells, target), None),
        I0Method::Exhaustive => {
            if cells.len() > EXHAUSTIVE_CELL_LIMIT {
                return Err(Error::MethodSize { method: "exhaustive", cells: cells.len(), limit: EXHAUSTIVE_CELL_LIMIT });
            }
            (exhaustive(&cells, target), None)
        }
        I0Method::Randomized => {
            let (full, frac) = randomized(&cells, target);
            (full, frac)
        }
    };
    let mut joint_mass: f64 = chosen.iter().map(|&i| cells[i].joint).sum();
    let mut product_mass: f64 = chosen.iter().map(|&i| cells[i].product).sum();
    let fractional = fractional.map(|(i, w)| {
        joint_mass += w * cells[i].joint;
        product_mass += w * cells[i].product;
        FractionalCell { cell: (cells[i].row, cells[i].col), weight: w }
    });
    let value = -product_mass.log2();
    let relaxation_gap = match method {
        I0Method::Randomized => None,
        _ => {
            let (full, frac) = randomized(&cells, target);
            let q: f64 = full.iter().map(|&i| cells[i].product).sum::<f64>() + frac.map_or(0.0, |(i, w)| w * cells[i].product);
            Some(-q.log2() - value)
        }
    };
    Ok(DivergenceResult {
        value,
        epsilon: eps,
        method: match method {
            I0Method::Greedy => Method::Greedy,
            I0Method::Exhaustive => Method::Exhaustive,
            I0Method::Randomized => Method::Randomized,
        },
        witness: Witness::Cells {
            cells: chosen.iter().map(|&i| (cells[i].row, cells[i].col)).collect(),
            fractional,
            joint_mass,
            product_mass,
        },
        relaxation_gap,
    })
}

fn greedy(cells: &[Cell], target: f64) -> Vec<usize> {
    let mut mass = 0.0;
    let mut out = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if mass >= target - MASS_SLACK {
            break;
        }
        mass += c.joint;
        out.push(i);
    }
    out
}

/// Full cells plus one fractional cell meeting the mass target with equality.
fn randomized(cells: &[Cell], target: f64) -> (Vec<usize>, Option<(usize, f64)>) {
    let mut mass = 0.0;
    let mut full = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if mass + c.joint < target {
            mass += c.joint;
            full.push(i);
        } else {
            let w = ((target - mass) / c.joint).clamp(0.0, 1.0);
            return (full, (w > 0.0).then_some((i, w)));
        }
    }
    (full, None)
}

/// Exact minimum product mass by meet-in-the-middle over the two halves of the support.
fn exhaustive(cells: &[Cell], target: f64) -> Vec<usize> {
    let split = cells.len() / 2;
    let (left, right) = cells.split_at(split);
    let enumerate = |half: &[Cell]| -> Vec<(f64, f64, u32)> {
        (0u32..1 << half.len())
            .map(|mask| {
                let (mut m, mut q) = (0.0, 0.0);
                for (b, c) in half.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        m += c.joint;
                        q += c.product;
                    }
                }
                (m, q, mask)
            })
            .collect()
    };
    let lefts = enumerate(left);
    let mut rights = enumerate(right);
    rights.sort_by(|a, b| a.0.total_cmp(&b.0));
    // suffix_best[i]: index in `rights` of the least product mass among rights[i..].
    let mut suffix_best = vec![0usize; rights.len()];
    let mut best = rights.len() - 1;
    for i in (0..rights.len()).rev() {
        if rights[i].1 < rights[best].1 {
            best = i;
        }
        suffix_best[i] = best;
    }
    let mut optimum: Option<(f64, u32, u32)> = None;
    for &(m, q, lmask) in &lefts {
        let need = target - MASS_SLACK - m;
        let start = rights.partition_point(|r| r.0 < need);
        if start == rights.len() {
            continue;
        }
        let r = rights[suffix_best[start]];
        let total = q + r.1;
        if optimum.is_none_or(|(best_q, _, _)| total < best_q) {
            optimum = Some((total, lmask, r.2));
        }
    }
    let (_, lmask, rmask) = optimum.expect("the full support is always feasible");
    let mut out: Vec<usize> = (0..left.len()).filter(|b| lmask >> b & 1 == 1).collect();
    out.extend((0..right.len()).filter(|b| rmask >> b & 1 == 1).map(|b| b + split));
    out
}

/// Joint and product mass of a cell witness, recomputed from the joint.
pub fn evaluate_cell_witness(joint: &JointPmf, witness: &Witness) -> Option<(f64, f64)> {
    let Witness::Cells { cells, fractional, .. } = witness else {
        return None;
    };
    let pu = joint.row_marginal();
    let pv = joint.col_marginal();
    let mut m = 0.0;
    let mut q = 0.0;
    for &(r, c) in cells {
        m += joint.get(r, c);
        q += pu[r] * pv[c];
    }
    if let Some(f) = fractional {
        let (r, c) = f.cell;
        m += f.weight * joint.get(r, c);
        q += f.weight * pu[r] * pv[c];
    }
    Some((m, q))
}
