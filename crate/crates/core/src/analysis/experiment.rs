//! Monte Carlo runs of the full pipeline: codebook, encoder, channel, both decoders.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::bounds::{event_bounds, EventBounds, Setting};
use super::stats::{compare_to_bound, BoundComparison, Proportion};
use crate::channel::{build_classical_joints, build_ub_state, build_vc_state, ClassicalBroadcastChannel, CqBroadcastChannel, InputDesign};
use crate::coding::{
    certified_set, decode_classical, decode_quantum_pair, encode, generate_codebook, select_band_exponents, ClassicalQuality, Codebook,
    CodingDesign, ConstraintCheck, DecodingSet, InputQuality, QuantumQuality, RateParams, Receiver, ReceiverMeasurement,
};
use crate::divergence::{classical_i_infty, classical_i_infty_iid, cq_np_test, CqNpTest, I0Method};
use crate::error::{Error, Result};
use crate::parallel::{map_reduce, Execution};
use crate::rng::SeededRng;

const CODEBOOK_STREAM: u64 = 0;
const MESSAGE_STREAM: u64 = 1;
const CHANNEL_STREAM: u64 = 2;
const MEASUREMENT_STREAM: u64 = 3;
/// Stream of the master generator reserved for a shared codebook.
const SHARED_CODEBOOK_STREAM: u64 = u64::MAX;

/// Whether each trial draws its own codebook.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodebookMode {
    #[default]
    Fresh,
    Shared,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: u64,
    pub seed: u64,
    pub codebook: CodebookMode,
    pub execution: Execution,
}

/// One-shot quantities of a channel and design at a blocklength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantities {
    pub i0_b: f64,
    pub i0_c: f64,
    pub i_inf: f64,
    pub eps0: f64,
    pub eps_inf: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digests {
    pub channel: String,
    pub design: String,
    /// Codebook of trial 0 (or the shared one).
    pub codebook: Option<String>,
}

#[derive(Debug)]
enum Receivers {
    Classical { channel: ClassicalBroadcastChannel, set_b: DecodingSet, set_c: DecodingSet },
    Quantum { channel: CqBroadcastChannel, test_b: CqNpTest, test_c: CqNpTest, quality: QuantumQuality },
}

/// Everything a run needs besides the rates: divergences, decoding tests, digests.
#[derive(Debug)]
pub struct ExperimentSetup {
    pub setting: Setting,
    pub blocklength: usize,
    pub quantities: Quantities,
    pub digests: Digests,
    design: CodingDesign,
    word_len: usize,
    receivers: Receivers,
}

/// Hex sha256 of a value's JSON form.
pub fn digest_json<T: Serialize>(value: &T) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(value).expect("serializable")))
}

fn i_inf(design: &InputDesign, n: usize, eps_inf: f64) -> Result<f64> {
    Ok(if n == 1 { classical_i_infty(design.uv(), eps_inf)?.value } else { classical_i_infty_iid(design.uv(), n, eps_inf)?.value })
}

impl ExperimentSetup {
    /// Classical channel used `n` times letter by letter; `method` picks the single-letter test.
    pub fn classical(
        channel: &ClassicalBroadcastChannel,
        design: &InputDesign,
        n: usize,
        eps0: f64,
        eps_inf: f64,
        method: I0Method,
    ) -> Result<Self> {
        let (uy, vz) = build_classical_joints(channel, design)?;
        let b = certified_set(&uy, n, eps0, method)?;
        let c = certified_set(&vz, n, eps0, method)?;
        Ok(Self {
            setting: Setting::Classical,
            blocklength: n,
            quantities: Quantities { i0_b: b.value, i0_c: c.value, i_inf: i_inf(design, n, eps_inf)?, eps0, eps_inf },
            digests: Digests { channel: digest_json(channel), design: digest_json(design), codebook: None },
            design: CodingDesign::new(design, channel.x_alphabet())?,
            word_len: n,
            receivers: Receivers::Classical { channel: channel.clone(), set_b: b.set, set_c: c.set },
        })
    }

    /// cq channel; `n > 1` runs the single-letter scheme on the `n`-fold channel and design.
    pub fn quantum(channel: &CqBroadcastChannel, design: &InputDesign, n: usize, eps0: f64, eps_inf: f64) -> Result<Self> {
        let (ch_n, design_n) = (channel.nfold(n)?, design.nfold(n)?);
        let uv = design_n.uv();
        let test_b = cq_np_test(&build_ub_state(&ch_n, &design_n)?, uv.nrows(), eps0)?;
        let test_c = cq_np_test(&build_vc_state(&ch_n, &design_n)?, uv.ncols(), eps0)?;
        let quality = QuantumQuality::new(&ch_n, &test_b, &test_c)?;
        Ok(Self {
            setting: Setting::Quantum,
            blocklength: n,
            quantities: Quantities {
                i0_b: -test_b.objective.log2(),
                i0_c: -test_c.objective.log2(),
                i_inf: i_inf(design, n, eps_inf)?,
                eps0,
                eps_inf,
            },
            digests: Digests { channel: digest_json(channel), design: digest_json(design), codebook: None },
            design: CodingDesign::new(&design_n, ch_n.x_alphabet())?,
            word_len: 1,
            receivers: Receivers::Quantum { channel: ch_n, test_b, test_c, quality },
        })
    }

    /// Parameters with band exponents chosen by [`select_band_exponents`].
    pub fn params(&self, rate1: u32, rate2: u32, eps_tilde: f64) -> Result<RateParams> {
        let q = &self.quantities;
        let (band1, band2) = select_band_exponents(rate1, rate2, q.i0_b, q.i0_c, q.i_inf, eps_tilde)?;
        Ok(self.params_with_bands(rate1, rate2, band1, band2, eps_tilde))
    }

    /// Parameters with explicit band exponents; the band constraints need not hold.
    pub fn params_with_bands(&self, rate1: u32, rate2: u32, band1: u32, band2: u32, eps_tilde: f64) -> RateParams {
        let q = &self.quantities;
        RateParams { rate1, rate2, band1, band2, eps_tilde, eps0: q.eps0, eps_inf: q.eps_inf, i_inf: q.i_inf, i0_b: q.i0_b, i0_c: q.i0_c }
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn design(&self) -> &CodingDesign {
        &self.design
    }
}

/// Event counts, summed over trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub trials: u64,
    /// No usable cell in the band; the encoder fell back.
    pub encoding_failure: u64,
    /// Classical, encoder succeeded: the sent row fails the first receiver's test.
    pub miss_b: u64,
    pub miss_c: u64,
    /// Classical, encoder succeeded: some other row passes the first receiver's test.
    pub confusion_b: u64,
    pub confusion_c: u64,
    /// Encoder succeeded and the decoded row differs from the sent one.
    pub decode_error_b: u64,
    pub decode_error_c: u64,
    /// Quantum: the completion outcome occurred.
    pub completion_b: u64,
    pub completion_c: u64,
    pub message_error_b: u64,
    pub message_error_c: u64,
    /// Either message wrong.
    pub message_error: u64,
    /// Encoder failed or either decoded index wrong.
    pub index_error: u64,
}

impl std::ops::Add for EventCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            encoding_failure: self.encoding_failure + o.encoding_failure,
            miss_b: self.miss_b + o.miss_b,
            miss_c: self.miss_c + o.miss_c,
            confusion_b: self.confusion_b + o.confusion_b,
            confusion_c: self.confusion_c + o.confusion_c,
            decode_error_b: self.decode_error_b + o.decode_error_b,
            decode_error_c: self.decode_error_c + o.decode_error_c,
            completion_b: self.completion_b + o.completion_b,
            completion_c: self.completion_c + o.completion_c,
            message_error_b: self.message_error_b + o.message_error_b,
            message_error_c: self.message_error_c + o.message_error_c,
            message_error: self.message_error + o.message_error,
            index_error: self.index_error + o.index_error,
        }
    }
}

impl EventCounts {
    /// `(name, count)` for every event.
    pub fn named(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("encoding_failure", self.encoding_failure),
            ("miss_b", self.miss_b),
            ("miss_c", self.miss_c),
            ("confusion_b", self.confusion_b),
            ("confusion_c", self.confusion_c),
            ("decode_error_b", self.decode_error_b),
            ("decode_error_c", self.decode_error_c),
            ("completion_b", self.completion_b),
            ("completion_c", self.completion_c),
            ("message_error_b", self.message_error_b),
            ("message_error_c", self.message_error_c),
            ("message_error", self.message_error),
            ("index_error", self.index_error),
        ]
    }

    pub fn get(&self, event: &str) -> Option<u64> {
        self.named().into_iter().find(|(n, _)| *n == event).map(|(_, c)| c)
    }
}

struct Sent {
    m1: usize,
    m2: usize,
    cell: Option<(usize, usize)>,
}

fn score(sent: &Sent, b: (Option<usize>, usize), c: (Option<usize>, usize)) -> EventCounts {
    let mut e = EventCounts { trials: 1, ..Default::default() };
    let (wrong_b, wrong_c) = (b.1 != sent.m1, c.1 != sent.m2);
    e.message_error_b = u64::from(wrong_b);
    e.message_error_c = u64::from(wrong_c);
    e.message_error = u64::from(wrong_b || wrong_c);
    match sent.cell {
        None => {
            e.encoding_failure = 1;
            e.index_error = 1;
        }
        Some((k, l)) => {
            e.decode_error_b = u64::from(b.0 != Some(k));
            e.decode_error_c = u64::from(c.0 != Some(l));
            e.index_error = e.decode_error_b | e.decode_error_c;
        }
    }
    e
}

fn trial_codebook(
    setup: &ExperimentSetup,
    params: &RateParams,
    config: &ExperimentConfig,
    shared: Option<&Codebook>,
    t: u64,
) -> Result<Codebook> {
    match shared {
        Some(cb) => Ok(cb.clone()),
        None => generate_codebook(&setup.design, params, setup.word_len, &trial_rng(config, t).substream(CODEBOOK_STREAM)),
    }
}

fn trial_rng(config: &ExperimentConfig, t: u64) -> SeededRng {
    SeededRng::new(config.seed, 0).substream(t)
}

fn messages(params: &RateParams, rng: &mut SeededRng) -> (usize, usize) {
    let m1 = rng.below(1u64 << params.rate1) as usize;
    let m2 = rng.below(1u64 << params.rate2) as usize;
    (m1, m2)
}

fn classical_trial(
    channel: &ClassicalBroadcastChannel,
    sets: (&DecodingSet, &DecodingSet),
    quality: &ClassicalQuality<'_>,
    cb: &Codebook,
    rng: &SeededRng,
) -> EventCounts {
    let (m1, m2) = messages(cb.params(), &mut rng.substream(MESSAGE_STREAM));
    let out = encode(cb, m1, m2, quality);
    let (y, z) = channel.sample_word(&out.x, &mut rng.substream(CHANNEL_STREAM));
    let db = decode_classical(cb, Receiver::B, &y, sets.0);
    let dc = decode_classical(cb, Receiver::C, &z, sets.1);
    let sent = Sent { m1, m2, cell: out.chosen };
    let mut e = score(&sent, (db.index, db.message), (dc.index, dc.message));
    if let Some((k, l)) = out.chosen {
        e.miss_b = u64::from(!db.matches.contains(&k));
        e.miss_c = u64::from(!dc.matches.contains(&l));
        e.confusion_b = u64::from(db.matches.iter().any(|&i| i != k));
        e.confusion_c = u64::from(dc.matches.iter().any(|&i| i != l));
    }
    e
}

fn quantum_trial(
    channel: &CqBroadcastChannel,
    tests: (&CqNpTest, &CqNpTest),
    quality: &QuantumQuality,
    measurements: Option<&(ReceiverMeasurement, ReceiverMeasurement)>,
    cb: &Codebook,
    rng: &SeededRng,
) -> Result<EventCounts> {
    let (m1, m2) = messages(cb.params(), &mut rng.substream(MESSAGE_STREAM));
    let out = encode(cb, m1, m2, quality);
    let owned;
    let (bob, charlie) = match measurements {
        Some((b, c)) => (b, c),
        None => {
            owned =
                (ReceiverMeasurement::new(cb, Receiver::B, &tests.0.blocks)?, ReceiverMeasurement::new(cb, Receiver::C, &tests.1.blocks)?);
            (&owned.0, &owned.1)
        }
    };
    let state = channel.state(usize::from(out.x[0]));
    let (db, dc) = decode_quantum_pair(bob, charlie, cb, state, &mut rng.substream(MEASUREMENT_STREAM))?;
    let sent = Sent { m1, m2, cell: out.chosen };
    let mut e = score(&sent, (db.index, db.message), (dc.index, dc.message));
    e.completion_b = u64::from(db.failure);
    e.completion_c = u64::from(dc.failure);
    Ok(e)
}

/// Runs `config.trials` independent trials. Counts depend only on the seed, never on scheduling.
pub fn run_trials(setup: &ExperimentSetup, params: &RateParams, config: &ExperimentConfig) -> Result<(EventCounts, Option<String>)> {
    let shared = match config.codebook {
        CodebookMode::Shared => Some(generate_codebook(
            &setup.design,
            params,
            setup.word_len,
            &SeededRng::new(config.seed, 0).substream(SHARED_CODEBOOK_STREAM),
        )?),
        CodebookMode::Fresh => None,
    };
    // Trial 0's codebook doubles as a size check before the parallel loop.
    let first = trial_codebook(setup, params, config, shared.as_ref(), 0)?;
    let digest = Some(first.digest());
    drop(first);
    let counts = match &setup.receivers {
        Receivers::Classical { channel, set_b, set_c } => {
            let quality = ClassicalQuality::new(channel, set_b, set_c);
            map_reduce(
                config.execution,
                config.trials,
                EventCounts::default,
                |t| {
                    let cb = trial_codebook(setup, params, config, shared.as_ref(), t).expect("size checked");
                    classical_trial(channel, (set_b, set_c), &quality, &cb, &trial_rng(config, t))
                },
                |a, b| a + b,
            )
        }
        Receivers::Quantum { channel, test_b, test_c, quality } => {
            let fixed = match &shared {
                Some(cb) => Some((
                    ReceiverMeasurement::new(cb, Receiver::B, &test_b.blocks)?,
                    ReceiverMeasurement::new(cb, Receiver::C, &test_c.blocks)?,
                )),
                None => None,
            };
            let result = map_reduce(
                config.execution,
                config.trials,
                || Ok(EventCounts::default()),
                |t| {
                    let cb = trial_codebook(setup, params, config, shared.as_ref(), t)?;
                    quantum_trial(channel, (test_b, test_c), quality, fixed.as_ref(), &cb, &trial_rng(config, t))
                },
                |a: Result<EventCounts>, b: Result<EventCounts>| Ok(a? + b?),
            );
            result?
        }
    };
    Ok((counts, digest))
}

/// One comparison of an empirical rate against a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub event: String,
    pub bound_name: String,
    /// Whether the bound's hypotheses hold for these parameters.
    pub applicable: bool,
    pub proportion: Proportion,
    pub comparison: BoundComparison,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRate {
    pub event: String,
    pub proportion: Proportion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub setting: Setting,
    pub blocklength: usize,
    pub params: RateParams,
    pub band_constraints: Vec<ConstraintCheck>,
    pub rate_constraints: Vec<ConstraintCheck>,
    pub trials: u64,
    pub seed: u64,
    pub codebook_mode: CodebookMode,
    pub digests: Digests,
    pub counts: EventCounts,
    pub rates: Vec<EventRate>,
    pub bounds: EventBounds,
    pub checks: Vec<BoundCheck>,
    /// Some applicable check has its lower confidence limit above the bound.
    pub violation: bool,
    pub wall_clock_seconds: f64,
}

/// Flat per-check row for CSV output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub event: String,
    pub count: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound_name: String,
    pub bound: f64,
    pub applicable: bool,
    pub within_3sigma: bool,
    pub violation: bool,
}

impl ExperimentReport {
    pub fn check_rows(&self) -> Vec<CheckRow> {
        self.checks
            .iter()
            .map(|c| CheckRow {
                event: c.event.clone(),
                count: c.proportion.count,
                trials: c.proportion.trials,
                rate: c.proportion.rate,
                ci_low: c.proportion.ci_low,
                ci_high: c.proportion.ci_high,
                bound_name: c.bound_name.clone(),
                bound: c.comparison.bound,
                applicable: c.applicable,
                within_3sigma: c.comparison.within_3sigma,
                violation: c.comparison.violation,
            })
            .collect()
    }

    pub fn check(&self, event: &str, bound_name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.event == event && c.bound_name == bound_name)
    }
}

fn checks(counts: &EventCounts, bounds: &EventBounds) -> Vec<BoundCheck> {
    let n = counts.trials;
    let feasible = bounds.bands_feasible;
    let mut plan: Vec<(&str, &str, f64, bool)> = vec![
        ("encoding_failure", "encoding_failure", bounds.encoding_failure, true),
        ("encoding_failure", "36 eps~", bounds.encoding_failure_eps_form, feasible),
    ];
    match bounds.setting {
        Setting::Classical => {
            let m = bounds.miss_b.unwrap_or(1.0);
            plan.extend([
                ("miss_b", "4 eps0", m, true),
                ("miss_c", "4 eps0", bounds.miss_c.unwrap_or(1.0), true),
                ("confusion_b", "confusion chain", bounds.decode_b, true),
                ("confusion_c", "confusion chain", bounds.decode_c, true),
                ("confusion_b", "eps~", bounds.decode_b_eps_form_ceiled, feasible),
                ("confusion_c", "eps~", bounds.decode_b_eps_form_ceiled, feasible),
            ]);
        }
        Setting::Quantum => {
            plan.extend([
                ("decode_error_b", "decoding chain", bounds.decode_b, true),
                ("decode_error_c", "decoding chain", bounds.decode_c, true),
                ("decode_error_b", "8 eps0 + 4 eps~", bounds.decode_b_eps_form_ceiled, feasible),
                ("decode_error_c", "8 eps0 + 4 eps~", bounds.decode_b_eps_form_ceiled, feasible),
            ]);
        }
    }
    plan.extend([
        ("index_error", "sum of event bounds", bounds.total_unconditional, true),
        ("message_error", "theorem total", bounds.total, feasible),
        ("message_error", "theorem total, ceiled", bounds.total_ceiled, feasible),
    ]);
    plan.into_iter()
        .map(|(event, name, bound, applicable)| {
            let count = counts.get(event).expect("known event");
            BoundCheck {
                event: event.into(),
                bound_name: name.into(),
                applicable,
                proportion: Proportion::new(count, n),
                comparison: compare_to_bound(count, n, bound),
            }
        })
        .collect()
}

/// Runs the trials and compares every event rate against its bounds.
pub fn run_experiment(setup: &ExperimentSetup, params: &RateParams, config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    let start = Instant::now();
    let (counts, codebook) = run_trials(setup, params, config)?;
    let bounds = event_bounds(params, setup.setting);
    let checks = checks(&counts, &bounds);
    let violation = checks.iter().any(|c| c.applicable && c.comparison.violation);
    Ok(ExperimentReport {
        setting: setup.setting,
        blocklength: setup.blocklength,
        params: *params,
        band_constraints: params.band_constraints(),
        rate_constraints: params.rate_constraints().to_vec(),
        trials: config.trials,
        seed: config.seed,
        codebook_mode: config.codebook,
        digests: Digests { codebook, ..setup.digests.clone() },
        rates: counts
            .named()
            .into_iter()
            .map(|(event, c)| EventRate { event: event.into(), proportion: Proportion::new(c, counts.trials) })
            .collect(),
        counts,
        bounds,
        checks,
        violation,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Encoder-side quality for a setup, for use outside [`run_experiment`].
pub fn with_quality<R>(setup: &ExperimentSetup, f: impl FnOnce(&(dyn InputQualitySync + '_)) -> R) -> R {
    match &setup.receivers {
        Receivers::Classical { channel, set_b, set_c } => f(&ClassicalQuality::new(channel, set_b, set_c)),
        Receivers::Quantum { quality, .. } => f(quality),
    }
}

/// [`InputQuality`] usable across threads.
pub trait InputQualitySync: InputQuality + Sync {}
impl<T: InputQuality + Sync> InputQualitySync for T {}

impl InputQuality for &(dyn InputQualitySync + '_) {
    fn alpha(&self, u: &[u16], x: &[u16]) -> f64 {
        (**self).alpha(u, x)
    }
    fn beta(&self, v: &[u16], x: &[u16]) -> f64 {
        (**self).beta(v, x)
    }
}
