//! Closed-form error-event bounds, recomputable from the rate parameters alone.

use serde::{Deserialize, Serialize};

use crate::coding::RateParams;

/// Which channel model a bound set refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Classical,
    Quantum,
}

impl std::str::FromStr for Setting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "classical" => Ok(Self::Classical),
            "quantum" | "cq" => Ok(Self::Quantum),
            other => Err(format!("unknown setting {other:?} (classical|quantum)")),
        }
    }
}

/// Total error guaranteed by the theorem: `40 eps~ + 16 eps0` (quantum) or `37 eps~ + 8 eps0` (classical).
pub fn theorem_bounds(eps_tilde: f64, eps0: f64, setting: Setting) -> f64 {
    match setting {
        Setting::Quantum => 40.0 * eps_tilde + 16.0 * eps0,
        Setting::Classical => 37.0 * eps_tilde + 8.0 * eps0,
    }
}

/// Total once the ceiling in `r1 + r2` is accounted for in the confusion terms.
pub fn corrected_theorem_bounds(eps_tilde: f64, eps0: f64, setting: Setting) -> f64 {
    match setting {
        Setting::Quantum => 44.0 * eps_tilde + 16.0 * eps0,
        Setting::Classical => 38.0 * eps_tilde + 8.0 * eps0,
    }
}

/// Bounds on each error event.
///
/// Fields without `eps_form` hold for any band exponents; the `eps_form` ones need the
/// band constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventBounds {
    pub setting: Setting,
    /// `2^{-r1-r2+I_inf+2} + 2^{-r1+4} + 2^{-r2+4}`.
    pub encoding_failure: f64,
    /// The same expression with `-r1-r1` in the first exponent.
    pub encoding_failure_doubled_r1: f64,
    /// `36 eps~`.
    pub encoding_failure_eps_form: f64,
    /// Classical: the transmitted row fails the first receiver's test, `<= 4 eps0`.
    pub miss_b: Option<f64>,
    pub miss_c: Option<f64>,
    /// Classical: `2^{R1+2r1+r2-I_inf-I0B}`, another row passes.
    /// Quantum: `8 eps0 + 2^{R1+2r1+r2+2-I_inf-I0B}`, wrong row decoded.
    pub decode_b: f64,
    pub decode_c: f64,
    /// As stated: `eps~/2` (classical) or `8 eps0 + 2 eps~` (quantum).
    pub decode_b_eps_form: f64,
    /// With the ceiling: `eps~` (classical) or `8 eps0 + 4 eps~` (quantum).
    pub decode_b_eps_form_ceiled: f64,
    pub total: f64,
    pub total_ceiled: f64,
    /// Sum of the parameter-free event bounds.
    pub total_unconditional: f64,
    pub bands_feasible: bool,
}

pub fn event_bounds(params: &RateParams, setting: Setting) -> EventBounds {
    let (r1, r2) = (f64::from(params.band1), f64::from(params.band2));
    let (rate1, rate2) = (f64::from(params.rate1), f64::from(params.rate2));
    let (i_inf, e, e0) = (params.i_inf, params.eps_tilde, params.eps0);
    let encoding_failure = (-r1 - r2 + i_inf + 2.0).exp2() + (-r1 + 4.0).exp2() + (-r2 + 4.0).exp2();
    let encoding_failure_doubled_r1 = (-2.0 * r1 + i_inf + 2.0).exp2() + (-r1 + 4.0).exp2() + (-r2 + 4.0).exp2();
    let exp_b = rate1 + 2.0 * r1 + r2 - i_inf - params.i0_b;
    let exp_c = rate2 + 2.0 * r2 + r1 - i_inf - params.i0_c;
    let (miss_b, miss_c, decode_b, decode_c, stated, ceiled) = match setting {
        Setting::Classical => (Some(4.0 * e0), Some(4.0 * e0), exp_b.exp2(), exp_c.exp2(), e / 2.0, e),
        Setting::Quantum => {
            (None, None, 8.0 * e0 + (exp_b + 2.0).exp2(), 8.0 * e0 + (exp_c + 2.0).exp2(), 8.0 * e0 + 2.0 * e, 8.0 * e0 + 4.0 * e)
        }
    };
    let total_unconditional = encoding_failure + miss_b.unwrap_or(0.0) + miss_c.unwrap_or(0.0) + decode_b + decode_c;
    EventBounds {
        setting,
        encoding_failure,
        encoding_failure_doubled_r1,
        encoding_failure_eps_form: 36.0 * e,
        miss_b,
        miss_c,
        decode_b,
        decode_c,
        decode_b_eps_form: stated,
        decode_b_eps_form_ceiled: ceiled,
        total: theorem_bounds(e, e0, setting),
        total_ceiled: corrected_theorem_bounds(e, e0, setting),
        total_unconditional,
        bands_feasible: params.bands_feasible(),
    }
}
