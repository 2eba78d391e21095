//! Turning a code spec into a simulation-ready lifted code.

use std::path::Path;

use thiserror::Error;

use crate::cooperation::{CoopCode, CoopError};
use crate::gf2::{build_encoder, build_encoder_strict, Encoder, Gf2Error};
use crate::lifting::{circulant_peg_lift_with, LiftError, LiftOptions, LiftedCode};
use crate::protograph::{CodeFamily, CodeSpec, ProtographError};
use crate::seeds::mix;

use super::config::CodeSource;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Spec(#[from] ProtographError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Encoder(#[from] Gf2Error),
    #[error(transparent)]
    Coop(#[from] CoopError),
    #[error("no usable lift in {attempts} seeds (last problem: {last})")]
    Exhausted { attempts: usize, last: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub z: usize,
    pub seed: u64,
    /// Lift seeds tried before giving up.
    pub attempts: usize,
    /// Lifts with a shorter cycle are rejected.
    pub min_girth: usize,
}

impl BuildOptions {
    pub fn new(z: usize, seed: u64) -> Self {
        Self {
            z,
            seed,
            attempts: 32,
            min_girth: 6,
        }
    }
}

/// A lifted code with its encoder and, when frame 1 determines the
/// codeword, relay support.
#[derive(Clone, Debug)]
pub struct BuiltCode {
    pub code: LiftedCode,
    pub encoder: Encoder,
    pub coop: Option<CoopCode>,
    /// Lift seed that produced the code.
    pub lift_seed: u64,
    /// Seeds examined.
    pub attempts: usize,
}

impl BuiltCode {
    fn new(code: LiftedCode, encoder: Encoder, lift_seed: u64, attempts: usize) -> Self {
        let coop = CoopCode::new(code.clone(), encoder.clone()).ok();
        Self {
            code,
            encoder,
            coop,
            lift_seed,
            attempts,
        }
    }
}

/// Candidate ranking: larger is better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Score {
    strict_encoder: bool,
    girth_ok: bool,
    fewer_dependent: std::cmp::Reverse<usize>,
}

/// Lifts `spec`, retrying over up to `attempts` derived seeds.
///
/// Seed `i` is `seed` itself for `i = 0` and `mix(seed, i)` afterwards. A
/// candidate is accepted at once when its encoder is strict (every
/// information position carries payload), its girth reaches 8 where that is
/// attainable (`Z >= 64` and no weight-3 circulant, which always closes a
/// 6-cycle), and, for RCRP codes, frame 1 determines the codeword. Otherwise
/// the best candidate seen is returned.
pub fn build_code(spec: &CodeSpec, opts: &BuildOptions) -> Result<BuiltCode, BuildError> {
    let want_girth8 = opts.z >= 64 && spec.base.max_entry() < 3;
    let needs_relay = spec.family == CodeFamily::Rcrp;
    let mut best: Option<(Score, BuiltCode)> = None;
    let mut last = String::from("none");
    let mut tried = 0;
    for i in 0..opts.attempts.max(1) {
        tried = i + 1;
        let seed = if i == 0 { opts.seed } else { mix(&[opts.seed, i as u64]) };
        let lift = LiftOptions {
            girth_target: if want_girth8 { 8 } else { 6 },
            min_girth: opts.min_girth,
            ..LiftOptions::new(opts.z, seed)
        };
        let code = match circulant_peg_lift_with(spec, &lift) {
            Ok(c) => c,
            Err(e @ LiftError::GirthInfeasible { .. }) => {
                last = e.to_string();
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let strict = build_encoder_strict(&code).is_ok();
        let encoder = build_encoder(&code)?;
        let score = Score {
            strict_encoder: strict,
            girth_ok: !want_girth8 || code.girth().is_none_or(|g| g >= 8),
            fewer_dependent: std::cmp::Reverse(encoder.dependent_info_bits()),
        };
        let built = BuiltCode::new(code, encoder, seed, 0);
        if needs_relay && built.coop.is_none() {
            last = CoopError::NotDetermining.to_string();
            continue;
        }
        let ideal = score.strict_encoder && score.girth_ok;
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, built));
        }
        if ideal {
            break;
        }
    }
    match best {
        Some((_, built)) => Ok(BuiltCode {
            attempts: tried,
            ..built
        }),
        None => Err(BuildError::Exhausted {
            attempts: tried,
            last,
        }),
    }
}

/// Loads a QC code file and prepares it without any retry.
pub fn load_code(path: &Path) -> Result<BuiltCode, BuildError> {
    let text = std::fs::read_to_string(path).map_err(|source| BuildError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let code = LiftedCode::from_text(&text)?;
    prepare(code, 0)
}

/// Wraps an existing lifted code.
pub fn prepare(code: LiftedCode, lift_seed: u64) -> Result<BuiltCode, BuildError> {
    let needs_relay = code.spec().family == CodeFamily::Rcrp;
    let encoder = build_encoder(&code)?;
    let built = BuiltCode::new(code, encoder, lift_seed, 1);
    if needs_relay && built.coop.is_none() {
        return Err(CoopError::NotDetermining.into());
    }
    Ok(built)
}

/// Resolves a sweep's code source.
pub fn build_from_source(source: &CodeSource, z: usize, seed: u64) -> Result<BuiltCode, BuildError> {
    match source {
        CodeSource::Builtin(name) => {
            let spec = crate::protograph::builtin(name)?;
            build_code(&spec, &BuildOptions::new(z, seed))
        }
        CodeSource::File(path) => load_code(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protograph::builtin;

    #[test]
    fn builds_every_builtin_at_z64() {
        for name in ["rp_a", "rcrp_a", "rp_b", "rcrp_b", "rcrp_c", "reg36"] {
            let built = build_code(&builtin(name).unwrap(), &BuildOptions::new(64, 1)).unwrap();
            assert!(built.code.girth().unwrap() >= 6, "{name}");
            assert!(built.attempts >= 1 && built.attempts <= 32);
        }
    }

    #[test]
    fn rp_b_prefers_girth_8() {
        let built = build_code(&builtin("rp_b").unwrap(), &BuildOptions::new(64, 1)).unwrap();
        assert!(built.code.girth().unwrap() >= 8);
        // Two relations among the information columns are structural.
        assert!(built.encoder.dependent_info_bits() >= 2);
    }

    #[test]
    fn exhaustion_is_reported() {
        let opts = BuildOptions {
            attempts: 2,
            ..BuildOptions::new(8, 1)
        };
        match build_code(&builtin("rcrp_b").unwrap(), &opts) {
            Err(BuildError::Exhausted { attempts: 2, .. }) => {}
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }
}
