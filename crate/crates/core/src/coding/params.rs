//! Message rates, band exponents and the constraints tying them to the divergences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates, band exponents and the one-shot quantities they were chosen against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// Message exponent for the first receiver (`2^R1` messages).
    #[serde(rename = "R1")]
    pub rate1: u32,
    #[serde(rename = "R2")]
    pub rate2: u32,
    /// Band exponent: each first-receiver message owns `2^r1` rows.
    #[serde(rename = "r1")]
    pub band1: u32,
    #[serde(rename = "r2")]
    pub band2: u32,
    pub eps_tilde: f64,
    pub eps0: f64,
    pub eps_inf: f64,
    #[serde(rename = "I_inf")]
    pub i_inf: f64,
    #[serde(rename = "I0B")]
    pub i0_b: f64,
    #[serde(rename = "I0C")]
    pub i0_c: f64,
}

/// One constraint of the band selection, with its slack (`rhs - lhs` for `<=`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `log2(1 / eps_tilde)`.
pub fn log_inv(eps_tilde: f64) -> f64 {
    -eps_tilde.log2()
}

fn le(name: &'static str, lhs: f64, rhs: f64) -> ConstraintCheck {
    ConstraintCheck { name: name.into(), relation: "<=".into(), lhs, rhs, slack: rhs - lhs, holds: lhs <= rhs + 1e-9 }
}

fn ge(name: &'static str, lhs: f64, rhs: f64) -> ConstraintCheck {
    ConstraintCheck { name: name.into(), relation: ">=".into(), lhs, rhs, slack: lhs - rhs, holds: lhs + 1e-9 >= rhs }
}

/// The three rate inequalities of the inner bound.
pub fn rate_constraints(rate1: f64, rate2: f64, i0_b: f64, i0_c: f64, i_inf: f64, eps_tilde: f64) -> [ConstraintCheck; 3] {
    let l = log_inv(eps_tilde);
    [
        le("a1: R1 <= I0B - 5 log(1/eps~) - 2", rate1, i0_b - 5.0 * l - 2.0),
        le("a2: R2 <= I0C - 5 log(1/eps~) - 2", rate2, i0_c - 5.0 * l - 2.0),
        le("a3: R1 + R2 <= I0B + I0C - I_inf - 11 log(1/eps~) - 5", rate1 + rate2, i0_b + i0_c - i_inf - 11.0 * l - 5.0),
    ]
}

impl RateParams {
    pub fn log_inv_eps_tilde(&self) -> f64 {
        log_inv(self.eps_tilde)
    }

    /// Required value of `r1 + r2`.
    pub fn band_sum_target(&self) -> i64 {
        band_sum_target(self.i_inf, self.eps_tilde)
    }

    /// Band constraints: the two size caps, the two floors and the sum equality.
    pub fn band_constraints(&self) -> Vec<ConstraintCheck> {
        let l = self.log_inv_eps_tilde();
        let (r1, r2) = (f64::from(self.band1), f64::from(self.band2));
        let target = self.band_sum_target() as f64;
        vec![
            le("R1 + r1 <= I0B - 4 log(1/eps~) - 1", f64::from(self.rate1) + r1, self.i0_b - 4.0 * l - 1.0),
            le("R2 + r2 <= I0C - 4 log(1/eps~) - 1", f64::from(self.rate2) + r2, self.i0_c - 4.0 * l - 1.0),
            ge("r1 >= log(1/eps~)", r1, l),
            ge("r2 >= log(1/eps~)", r2, l),
            ConstraintCheck {
                name: "r1 + r2 = ceil(I_inf + 3 log(1/eps~))".into(),
                relation: "=".into(),
                lhs: r1 + r2,
                rhs: target,
                slack: target - (r1 + r2),
                holds: r1 + r2 == target,
            },
        ]
    }

    /// Whether every band constraint holds (the hypotheses of the epsilon-form bounds).
    pub fn bands_feasible(&self) -> bool {
        self.band_constraints().iter().all(|c| c.holds)
    }

    pub fn rate_constraints(&self) -> [ConstraintCheck; 3] {
        rate_constraints(f64::from(self.rate1), f64::from(self.rate2), self.i0_b, self.i0_c, self.i_inf, self.eps_tilde)
    }
}

pub fn band_sum_target(i_inf: f64, eps_tilde: f64) -> i64 {
    (i_inf + 3.0 * log_inv(eps_tilde) - 1e-9).ceil() as i64
}

/// Deterministic choice of `(r1, r2)`.
///
/// Both start at `ceil(log(1/eps~))`; `r1` then grows up to its size cap, then `r2`,
/// until the sum reaches `ceil(I_inf + 3 log(1/eps~))`.
pub fn select_band_exponents(rate1: u32, rate2: u32, i0_b: f64, i0_c: f64, i_inf: f64, eps_tilde: f64) -> Result<(u32, u32)> {
    if !(eps_tilde > 0.0 && eps_tilde < 1.0) {
        return Err(Error::InvalidEpsilon(eps_tilde));
    }
    let l = log_inv(eps_tilde);
    let checks = rate_constraints(f64::from(rate1), f64::from(rate2), i0_b, i0_c, i_inf, eps_tilde);
    for (check, tag) in checks.iter().zip(["a1", "a2"]) {
        if !check.holds {
            return Err(Error::Infeasible { constraint: tag, detail: format!("{}: {} exceeds {:.6}", check.name, check.lhs, check.rhs) });
        }
    }
    let start = (l - 1e-9).ceil() as i64;
    let cap1 = (i0_b - 4.0 * l - 1.0 - f64::from(rate1) + 1e-9).floor() as i64;
    let cap2 = (i0_c - 4.0 * l - 1.0 - f64::from(rate2) + 1e-9).floor() as i64;
    if cap1 < start || cap2 < start {
        let tag = if cap1 < start { "a1" } else { "a2" };
        return Err(Error::Infeasible { constraint: tag, detail: format!("band size cap below the floor ceil(log(1/eps~)) = {start}") });
    }
    let target = band_sum_target(i_inf, eps_tilde);
    let (mut r1, mut r2) = (start, start);
    if r1 + r2 > target {
        return Err(Error::Infeasible {
            constraint: "eps_tilde",
            detail: format!("2 ceil(log(1/eps~)) = {} exceeds the required band sum {target}", r1 + r2),
        });
    }
    let grow1 = (target - r1 - r2).min(cap1 - r1);
    r1 += grow1;
    let grow2 = (target - r1 - r2).min(cap2 - r2);
    r2 += grow2;
    if r1 + r2 < target {
        return Err(Error::Infeasible {
            constraint: "a3",
            detail: format!("band sum reaches only {} of the required {target} ({})", r1 + r2, checks[2].name),
        });
    }
    Ok((r1 as u32, r2 as u32))
}

/// Largest integer rates allowed by the three rate inequalities, split as evenly as the
/// individual caps permit.
pub fn auto_rates(i0_b: f64, i0_c: f64, i_inf: f64, eps_tilde: f64) -> Result<(u32, u32)> {
    let l = log_inv(eps_tilde);
    let max1 = (i0_b - 5.0 * l - 2.0 + 1e-9).floor();
    let max2 = (i0_c - 5.0 * l - 2.0 + 1e-9).floor();
    let max_sum = (i0_b + i0_c - i_inf - 11.0 * l - 5.0 + 1e-9).floor().min(max1 + max2);
    if max1 < 0.0 || max2 < 0.0 || max_sum < 0.0 {
        let constraint = if max1 < 0.0 {
            "a1"
        } else if max2 < 0.0 {
            "a2"
        } else {
            "a3"
        };
        return Err(Error::Infeasible { constraint, detail: "no nonnegative integer rate pair satisfies the rate inequalities".into() });
    }
    let mut r1 = max1.min((max_sum / 2.0).ceil());
    let r2 = max2.min(max_sum - r1);
    r1 = max1.min(max_sum - r2);
    Ok((r1 as u32, r2 as u32))
}
