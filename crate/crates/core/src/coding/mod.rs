//! Band-structured random coding for two receivers.

pub mod classical;
pub mod codebook;
pub mod encoder;
pub mod params;
pub mod quantum;

pub use classical::{
    certified_set, decode_bob_classical, decode_charlie_classical, decode_classical, CertifiedSet, ClassicalDecode, ClassicalQuality,
    DecodingSet, Receiver,
};
pub use codebook::{generate_codebook, Codebook, CodingDesign, CODEBOOK_SYMBOL_CAP};
pub use encoder::{encode, EncodeOutcome, InputQuality};
pub use params::{auto_rates, band_sum_target, rate_constraints, select_band_exponents, ConstraintCheck, RateParams};
pub use quantum::{decode_quantum, decode_quantum_pair, QuantumDecode, QuantumQuality, ReceiverMeasurement};
