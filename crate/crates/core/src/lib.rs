//! Root-protograph LDPC codes for block-fading and relay channels.
//!
//! The crate covers the whole pipeline: protograph construction and
//! validation, quasi-cyclic lifting, GF(2) encoding, block-fading channels,
//! belief-propagation decoding, outage limits and coded-cooperation
//! simulation, plus a Monte-Carlo sweep harness.
//!
//! Numeric code is generic over [`Real`]; the aliases below fix the usual
//! `f64` instantiation.

pub mod channel;
pub mod cooperation;
pub mod decoder;
pub mod gf2;
pub mod harness;
pub mod lifting;
pub mod outage;
pub mod protograph;
pub mod scalar;
pub mod seeds;

pub use channel::{ChannelConfig, ChannelRealization, Fading};
pub use decoder::{bp_decode, erasure_decode, BpDecoder, CheckRule, DecodeResult};
pub use gf2::{build_encoder, build_encoder_strict, complete_codeword, encode, syndrome, BitVector, Encoder, SparseMatrix};
pub use lifting::{circulant_peg_lift, circulant_peg_lift_with, girth_of, LiftOptions, LiftedCode};
pub use protograph::{
    build_rcrp_base, build_regular_cw3_base, build_rp_base, builtin, singleton_bound, BaseMatrix,
    CodeSpec, Rate,
};
pub use scalar::Real;

/// Double-precision BP decoder.
pub type Decoder = BpDecoder<f64>;
/// Single-precision BP decoder.
pub type DecoderF32 = BpDecoder<f32>;
