//! Monte-Carlo word-error-rate sweeps.
//!
//! Every word draws its payload, fading and noise from its own stream,
//! seeded by `mix(mix(seed, point), word)`. Workers decode batches of
//! consecutive words and the outcomes are scanned in word order, stopping
//! exactly at the word that brings the error count to the target. The result
//! is therefore the same for any number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{llrs, transmit, ChannelConfig, ChannelError, Fading};
use crate::cooperation::{CoopError, CoopSession, FrameOrigin, Protocol, ProtocolConfig};
use crate::decoder::BpDecoder;
use crate::gf2::BitVector;
use crate::outage::binomial_half_width;
use crate::scalar::Real;
use crate::seeds::mix;

use super::build::{build_from_source, BuildError, BuiltCode};
use super::config::{ConfigError, Precision, SweepConfig, SweepScenario};

const MIN_BATCH: u64 = 64;
const MAX_BATCH: u64 = 16_384;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Coop(#[from] CoopError),
}

/// Relay and decoder counters accumulated over the words of one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Telemetry {
    pub relay_attempts: u64,
    pub relay_successes: u64,
    pub false_successes: u64,
    pub inconsistent_completions: u64,
    pub frames_from_source: u64,
    pub frames_from_relays: u64,
    pub decoder_iterations: u64,
}

impl Telemetry {
    fn add(&mut self, o: &Telemetry) {
        self.relay_attempts += o.relay_attempts;
        self.relay_successes += o.relay_successes;
        self.false_successes += o.false_successes;
        self.inconsistent_completions += o.inconsistent_completions;
        self.frames_from_source += o.frames_from_source;
        self.frames_from_relays += o.frames_from_relays;
        self.decoder_iterations += o.decoder_iterations;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WerPoint {
    pub snr_db: f64,
    pub words: u64,
    pub word_errors: u64,
    pub info_bit_errors: u64,
    /// Information positions per word.
    pub info_len: usize,
    pub wer: f64,
    /// 95% normal-approximation half width.
    pub ci: f64,
    pub seed: u64,
    pub telemetry: Telemetry,
}

impl WerPoint {
    pub fn ber(&self) -> f64 {
        if self.words == 0 {
            return 0.0;
        }
        self.info_bit_errors as f64 / (self.words as f64 * self.info_len as f64)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct WordOutcome {
    error: bool,
    bit_errors: u32,
    telemetry: Telemetry,
}

/// Builds the configured code and runs the sweep.
pub fn run_wer_sweep(cfg: &SweepConfig) -> Result<Vec<WerPoint>, SweepError> {
    cfg.validate()?;
    let built = build_from_source(&cfg.code, cfg.z, cfg.lift_seed)?;
    run_wer_sweep_with(cfg, &built, |_| {})
}

/// Runs the sweep on an already built code. `sink` sees each point as it
/// completes.
pub fn run_wer_sweep_with(
    cfg: &SweepConfig,
    built: &BuiltCode,
    mut sink: impl FnMut(&WerPoint),
) -> Result<Vec<WerPoint>, SweepError> {
    cfg.validate()?;
    check_scenario(cfg, built)?;
    let mut out = Vec::with_capacity(cfg.snr_db.len());
    for (idx, &snr) in cfg.snr_db.iter().enumerate() {
        let seed = mix(&[cfg.seed, idx as u64]);
        let point = match cfg.precision {
            Precision::F64 => run_point::<f64>(cfg, built, snr, seed)?,
            Precision::F32 => run_point::<f32>(cfg, built, snr, seed)?,
        };
        sink(&point);
        out.push(point);
    }
    Ok(out)
}

fn check_scenario(cfg: &SweepConfig, built: &BuiltCode) -> Result<(), SweepError> {
    let (protocol, relays) = match cfg.scenario {
        SweepScenario::P2p => return Ok(()),
        SweepScenario::DistributedCc { relays } => (Protocol::DistributedCc, relays),
        SweepScenario::MrcCc { relays } => (Protocol::MrcCc, relays),
    };
    let frames = built.code.num_blocks();
    let expected = match protocol {
        Protocol::DistributedCc => relays + 1,
        Protocol::MrcCc => 2,
    };
    if frames != expected {
        return Err(CoopError::FrameCount {
            protocol: match protocol {
                Protocol::DistributedCc => "distributed CC",
                Protocol::MrcCc => "MRC CC",
            },
            expected,
            got: frames,
        }
        .into());
    }
    if built.coop.is_none() {
        return Err(CoopError::NotDetermining.into());
    }
    Ok(())
}

fn link(cfg: &SweepConfig, built: &BuiltCode, snr_db: f64) -> Result<ChannelConfig, ChannelError> {
    let rate = built.code.spec().rate;
    if cfg.noiseless {
        ChannelConfig::new(Fading::AwgnOnly, f64::INFINITY, rate)
    } else {
        ChannelConfig::new(cfg.fading, snr_db, rate)
    }
}

fn run_point<T: Real>(
    cfg: &SweepConfig,
    built: &BuiltCode,
    snr_db: f64,
    seed: u64,
) -> Result<WerPoint, SweepError> {
    let link = link(cfg, built, snr_db)?;
    let protocol = match cfg.scenario {
        SweepScenario::P2p => None,
        SweepScenario::DistributedCc { relays } => Some(ProtocolConfig {
            rule: cfg.success_rule,
            relay_max_iter: cfg.max_iterations,
            ..ProtocolConfig::new(Protocol::DistributedCc, relays, link)
        }),
        SweepScenario::MrcCc { relays } => Some(ProtocolConfig {
            rule: cfg.success_rule,
            relay_max_iter: cfg.max_iterations,
            ..ProtocolConfig::new(Protocol::MrcCc, relays, link)
        }),
    };
    let code = &built.code;
    let info = code.info_positions();
    let k = built.encoder.k();
    let blocks = code.num_blocks();
    let block_map = code.block_map();

    let simulate = |state: &mut (BpDecoder<T>, Option<CoopSession<'_, T>>), w: u64| -> Result<WordOutcome, CoopError> {
        let (decoder, session) = state;
        let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, w]));
        let payload = BitVector::random(k, &mut rng);
        let mut telemetry = Telemetry::default();
        let (x, llr) = match (&protocol, session) {
            (Some(pc), Some(session)) => {
                let trace = session.run(&payload, pc, &mut rng)?;
                telemetry.relay_attempts = trace.relay_success.len() as u64;
                telemetry.relay_successes = trace.relay_success.iter().filter(|&&s| s).count() as u64;
                telemetry.false_successes = trace.false_successes as u64;
                telemetry.inconsistent_completions = trace.inconsistent_completions as u64;
                for o in &trace.origins {
                    match o {
                        FrameOrigin::Source => telemetry.frames_from_source += 1,
                        FrameOrigin::Relay(_) => telemetry.frames_from_relays += 1,
                        FrameOrigin::Combined { relays } => {
                            telemetry.frames_from_source += 1;
                            telemetry.frames_from_relays += *relays as u64;
                        }
                    }
                }
                (trace.codeword, trace.llr)
            }
            _ => {
                let x = built.encoder.encode(&payload)?;
                let real = link.realize::<T, _>(blocks, &mut rng);
                let y = transmit(&x, block_map, &real, &mut rng);
                telemetry.frames_from_source = blocks as u64;
                (x, llrs(&y, block_map, &real))
            }
        };
        let result = decoder.decode(&llr, cfg.max_iterations);
        telemetry.decoder_iterations = result.iterations_used as u64;
        let bit_errors = info
            .iter()
            .filter(|&&p| result.hard_bits.get(p) != x.get(p))
            .count() as u32;
        Ok(WordOutcome {
            error: bit_errors > 0,
            bit_errors,
            telemetry,
        })
    };

    let init = || {
        let decoder = BpDecoder::<T>::new(code).with_rule(cfg.decoder);
        let session = match (&protocol, &built.coop) {
            (Some(_), Some(coop)) => Some(CoopSession::new(coop)),
            _ => None,
        };
        (decoder, session)
    };

    let mut words = 0u64;
    let mut word_errors = 0u64;
    let mut bit_errors = 0u64;
    let mut telemetry = Telemetry::default();
    'outer: while words < cfg.max_words && word_errors < cfg.min_word_errors {
        let batch = batch_size(words, word_errors, cfg.min_word_errors).min(cfg.max_words - words);
        let outcomes: Vec<Result<WordOutcome, CoopError>> = (words..words + batch)
            .into_par_iter()
            .map_init(init, |state, w| simulate(state, w))
            .collect();
        for o in outcomes {
            let o = o?;
            words += 1;
            word_errors += o.error as u64;
            bit_errors += o.bit_errors as u64;
            telemetry.add(&o.telemetry);
            if word_errors >= cfg.min_word_errors {
                break 'outer;
            }
        }
    }
    let wer = if words == 0 { 0.0 } else { word_errors as f64 / words as f64 };
    Ok(WerPoint {
        snr_db,
        words,
        word_errors,
        info_bit_errors: bit_errors,
        info_len: info.len(),
        wer,
        ci: binomial_half_width(wer, words),
        seed,
        telemetry,
    })
}

/// Sized so that one batch is likely to finish the point, within bounds.
fn batch_size(words: u64, errors: u64, target: u64) -> u64 {
    if errors == 0 {
        return (words.max(MIN_BATCH / 2) * 2).clamp(MIN_BATCH, MAX_BATCH);
    }
    let rate = errors as f64 / words as f64;
    let needed = ((target - errors) as f64 / rate * 1.1).ceil() as u64;
    needed.clamp(MIN_BATCH, MAX_BATCH)
}
