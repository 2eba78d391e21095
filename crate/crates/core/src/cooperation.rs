//! Signal-level simulation of one transmission period of the coded
//! cooperation protocols.
//!
//! In the distributed protocol the source broadcasts frame 1 to the
//! destination and to `L` relays. Relay `k` decodes frame 1 with the
//! standalone frame-1 subcode (rootchecks touch frames it never received),
//! rebuilds the whole codeword by linear completion, and forwards frame
//! `k+1`. When it fails, error-free one-bit feedback lets the source send
//! that frame itself over a fresh link. In the MRC protocol the codeword has
//! two frames; the source and every successful relay send frame 2 on
//! orthogonal channels and the destination adds their LLRs.

use rand::Rng;
use thiserror::Error;

use crate::channel::{llr_value, transmit_positions, ChannelConfig};
use crate::decoder::BpDecoder;
use crate::gf2::{BitVector, Completer, Encoder, Gf2Error, SparseMatrix};
use crate::lifting::LiftedCode;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoopError {
    #[error("frame 1 does not determine the codeword")]
    NotDetermining,
    #[error("{protocol} needs {expected} frames, the code has {got}")]
    FrameCount {
        protocol: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("at least one relay is required")]
    NoRelays,
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    DistributedCc,
    MrcCc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SuccessRule {
    /// The relay knows whether its frame-1 estimate is correct.
    #[default]
    Genie,
    /// The relay trusts a zero frame-1 syndrome.
    Syndrome,
}

/// Per-link SNR offsets in dB relative to the common average SNR.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LinkOffsets {
    pub source_destination: f64,
    pub source_relay: f64,
    pub relay_destination: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    pub relays: usize,
    pub link: ChannelConfig,
    pub offsets: LinkOffsets,
    pub rule: SuccessRule,
    /// BP iterations spent by each relay on frame 1.
    pub relay_max_iter: usize,
    /// Forces every source-relay amplitude to this value.
    pub source_relay_gain: Option<f64>,
}

impl ProtocolConfig {
    pub fn new(protocol: Protocol, relays: usize, link: ChannelConfig) -> Self {
        Self {
            protocol,
            relays,
            link,
            offsets: LinkOffsets::default(),
            rule: SuccessRule::Genie,
            relay_max_iter: 100,
            source_relay_gain: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameOrigin {
    Source,
    Relay(usize),
    /// Source plus this many relays, combined at the destination.
    Combined { relays: usize },
}

/// Amplitudes used in one period. `source_destination[f]` is the source link
/// that carried (or would have carried) frame `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkGains<T> {
    pub source_destination: Vec<T>,
    pub source_relay: Vec<T>,
    pub relay_destination: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace<T> {
    pub codeword: BitVector,
    pub relay_success: Vec<bool>,
    /// Relays whose accepted frame-1 estimate was wrong.
    pub false_successes: usize,
    /// Accepted estimates that no codeword extends.
    pub inconsistent_completions: usize,
    pub origins: Vec<FrameOrigin>,
    pub gains: LinkGains<T>,
    /// Destination LLRs in codeword order.
    pub llr: Vec<T>,
}

/// A lifted code prepared for relaying: frame maps, the standalone frame-1
/// subcode and the frame-1 completion solver.
#[derive(Clone, Debug)]
pub struct CoopCode {
    code: LiftedCode,
    encoder: Encoder,
    frames: Vec<Vec<usize>>,
    frame1_h: SparseMatrix,
    completer: Completer,
    /// Frame-1 positions lead the completer's known set; fixed zeros follow.
    known_len_frame1: usize,
}

impl CoopCode {
    /// Checks frame-1 determinacy. The encoder's fixed-zero parity positions
    /// are known a priori and join frame 1 in the completion.
    pub fn new(code: LiftedCode, encoder: Encoder) -> Result<Self, CoopError> {
        let frames: Vec<Vec<usize>> = (0..code.num_blocks())
            .map(|f| code.block_positions(f))
            .collect();
        let (frame1_h, _) = code.h().restrict_to_columns(&frames[0]);
        let mut known = frames[0].clone();
        let known_len_frame1 = known.len();
        known.extend(
            encoder
                .fixed_zero_positions()
                .iter()
                .filter(|&&p| code.block_map()[p] != 0),
        );
        let completer = Completer::new(code.h(), &known).map_err(|e| match e {
            Gf2Error::NotDetermining => CoopError::NotDetermining,
            other => CoopError::Gf2(other),
        })?;
        Ok(Self {
            code,
            encoder,
            frames,
            frame1_h,
            completer,
            known_len_frame1,
        })
    }

    pub fn code(&self) -> &LiftedCode {
        &self.code
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn frame_positions(&self, f: usize) -> &[usize] {
        &self.frames[f]
    }

    /// Parity checks that only involve frame-1 bits, in frame-1 coordinates.
    pub fn frame1_subcode(&self) -> &SparseMatrix {
        &self.frame1_h
    }

    /// Rebuilds the codeword from frame-1 values (in frame-1 order).
    pub fn complete_from_frame1(&self, frame1: &BitVector) -> Result<BitVector, Gf2Error> {
        self.completer.complete(&self.known_values(frame1))
    }

    fn known_values(&self, frame1: &BitVector) -> BitVector {
        assert_eq!(frame1.len(), self.known_len_frame1);
        let mut v = BitVector::zeros(self.completer.known_positions().len());
        for t in 0..frame1.len() {
            if frame1.get(t) {
                v.set(t, true);
            }
        }
        v
    }

    fn check(&self, cfg: &ProtocolConfig) -> Result<(), CoopError> {
        if cfg.relays == 0 {
            return Err(CoopError::NoRelays);
        }
        let (protocol, expected) = match cfg.protocol {
            Protocol::DistributedCc => ("distributed CC", cfg.relays + 1),
            Protocol::MrcCc => ("MRC CC", 2),
        };
        if self.num_frames() != expected {
            return Err(CoopError::FrameCount {
                protocol,
                expected,
                got: self.num_frames(),
            });
        }
        Ok(())
    }
}

/// Per-worker state: the relay decoder and scratch space.
pub struct CoopSession<'a, T> {
    coop: &'a CoopCode,
    relay_decoder: BpDecoder<T>,
}

struct RelayOutcome {
    success: bool,
    wrong: bool,
    inconsistent: bool,
    /// Codeword the relay forwards from, when successful.
    derived: Option<BitVector>,
}

impl<'a, T: Real> CoopSession<'a, T> {
    pub fn new(coop: &'a CoopCode) -> Self {
        Self {
            coop,
            relay_decoder: BpDecoder::from_matrix(coop.frame1_h.clone(), Vec::new()),
        }
    }

    pub fn coop(&self) -> &CoopCode {
        self.coop
    }

    /// One period of the protocol selected by `cfg`.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        payload: &BitVector,
        cfg: &ProtocolConfig,
        rng: &mut R,
    ) -> Result<RoundTrace<T>, CoopError> {
        match cfg.protocol {
            Protocol::DistributedCc => self.run_distributed_cc(payload, cfg, rng),
            Protocol::MrcCc => self.run_mrc_cc(payload, cfg, rng),
        }
    }

    pub fn run_distributed_cc<R: Rng + ?Sized>(
        &mut self,
        payload: &BitVector,
        cfg: &ProtocolConfig,
        rng: &mut R,
    ) -> Result<RoundTrace<T>, CoopError> {
        let coop = self.coop;
        let mut cfg = *cfg;
        cfg.protocol = Protocol::DistributedCc;
        coop.check(&cfg)?;
        let x = coop.encoder.encode(payload)?;
        let l = cfg.relays;
        let links = Links::new(&cfg);
        let mut llr = vec![T::zero(); x.len()];
        let mut gains = LinkGains {
            source_destination: Vec::with_capacity(l + 1),
            source_relay: Vec::with_capacity(l),
            relay_destination: Vec::with_capacity(l),
        };

        let g = links.sample(&cfg, rng);
        gains.source_destination.push(g);
        send(&x, &coop.frames[0], g, links.sd, rng, &mut llr);

        let mut trace_success = Vec::with_capacity(l);
        let mut origins = vec![FrameOrigin::Source];
        let (mut false_successes, mut inconsistent) = (0, 0);
        for k in 0..l {
            let g_sr = links.sample_sr(&cfg, rng);
            gains.source_relay.push(g_sr);
            let out = self.relay(&x, g_sr, links.sr, &cfg, rng);
            false_successes += out.wrong as usize;
            inconsistent += out.inconsistent as usize;
            trace_success.push(out.success);
            let frame = &coop.frames[k + 1];
            let g = links.sample(&cfg, rng);
            match out.derived {
                Some(derived) => {
                    gains.relay_destination.push(g);
                    origins.push(FrameOrigin::Relay(k));
                    send(&derived, frame, g, links.rd, rng, &mut llr);
                }
                None => {
                    gains.source_destination.push(g);
                    origins.push(FrameOrigin::Source);
                    send(&x, frame, g, links.sd, rng, &mut llr);
                }
            }
        }
        Ok(RoundTrace {
            codeword: x,
            relay_success: trace_success,
            false_successes,
            inconsistent_completions: inconsistent,
            origins,
            gains,
            llr,
        })
    }

    pub fn run_mrc_cc<R: Rng + ?Sized>(
        &mut self,
        payload: &BitVector,
        cfg: &ProtocolConfig,
        rng: &mut R,
    ) -> Result<RoundTrace<T>, CoopError> {
        let coop = self.coop;
        let mut cfg = *cfg;
        cfg.protocol = Protocol::MrcCc;
        coop.check(&cfg)?;
        let x = coop.encoder.encode(payload)?;
        let links = Links::new(&cfg);
        let mut llr = vec![T::zero(); x.len()];
        let mut gains = LinkGains {
            source_destination: Vec::with_capacity(2),
            source_relay: Vec::with_capacity(cfg.relays),
            relay_destination: Vec::new(),
        };

        // Slot 1: broadcast of frame 1.
        let g = links.sample(&cfg, rng);
        gains.source_destination.push(g);
        send(&x, &coop.frames[0], g, links.sd, rng, &mut llr);
        let mut derived = Vec::new();
        let mut relay_success = Vec::with_capacity(cfg.relays);
        let (mut false_successes, mut inconsistent) = (0, 0);
        for _ in 0..cfg.relays {
            let g_sr = links.sample_sr(&cfg, rng);
            gains.source_relay.push(g_sr);
            let out = self.relay(&x, g_sr, links.sr, &cfg, rng);
            false_successes += out.wrong as usize;
            inconsistent += out.inconsistent as usize;
            relay_success.push(out.success);
            derived.extend(out.derived);
        }

        // Slot 2: source plus successful relays on orthogonal channels.
        let frame2 = &coop.frames[1];
        let g = links.sample(&cfg, rng);
        gains.source_destination.push(g);
        send(&x, frame2, g, links.sd, rng, &mut llr);
        for word in &derived {
            let g = links.sample(&cfg, rng);
            gains.relay_destination.push(g);
            let y = transmit_positions(word, frame2, g, links.rd, rng);
            for (&p, &yv) in frame2.iter().zip(&y) {
                llr[p] = llr[p] + llr_value(yv, g, links.rd);
            }
        }
        Ok(RoundTrace {
            codeword: x,
            relay_success,
            false_successes,
            inconsistent_completions: inconsistent,
            origins: vec![
                FrameOrigin::Source,
                FrameOrigin::Combined {
                    relays: derived.len(),
                },
            ],
            gains,
            llr,
        })
    }

    /// Relay reception and decoding of frame 1.
    fn relay<R: Rng + ?Sized>(
        &mut self,
        x: &BitVector,
        gain: T,
        noise_var: T,
        cfg: &ProtocolConfig,
        rng: &mut R,
    ) -> RelayOutcome {
        let coop = self.coop;
        let frame1 = &coop.frames[0];
        let y = transmit_positions(x, frame1, gain, noise_var, rng);
        let llr: Vec<T> = y.iter().map(|&v| llr_value(v, gain, noise_var)).collect();
        let result = self.relay_decoder.decode(&llr, cfg.relay_max_iter);
        let truth = x.select(frame1);
        let correct = result.hard_bits == truth;
        let success = match cfg.rule {
            SuccessRule::Genie => correct,
            SuccessRule::Syndrome => result.converged,
        };
        if !success {
            return RelayOutcome {
                success,
                wrong: false,
                inconsistent: false,
                derived: None,
            };
        }
        if correct {
            // Completion is unique, so it reproduces the transmitted word.
            return RelayOutcome {
                success,
                wrong: false,
                inconsistent: false,
                derived: Some(x.clone()),
            };
        }
        let known = coop.known_values(&result.hard_bits);
        let (derived, inconsistent) = match coop.completer.complete(&known) {
            Ok(w) => (w, false),
            Err(_) => (coop.completer.complete_unchecked(&known), true),
        };
        RelayOutcome {
            success,
            wrong: true,
            inconsistent,
            derived: Some(derived),
        }
    }
}

/// Noise variances of the three link types.
struct Links<T> {
    sd: T,
    sr: T,
    rd: T,
}

impl<T: Real> Links<T> {
    fn new(cfg: &ProtocolConfig) -> Self {
        let var = |off: f64| T::lit(cfg.link.with_offset(off).noise_var());
        Self {
            sd: var(cfg.offsets.source_destination),
            sr: var(cfg.offsets.source_relay),
            rd: var(cfg.offsets.relay_destination),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, cfg: &ProtocolConfig, rng: &mut R) -> T {
        T::lit(cfg.link.fading.sample_power(rng).sqrt())
    }

    fn sample_sr<R: Rng + ?Sized>(&self, cfg: &ProtocolConfig, rng: &mut R) -> T {
        // Draw even when forced so the random stream does not depend on it.
        let g = self.sample(cfg, rng);
        cfg.source_relay_gain.map_or(g, T::lit)
    }
}

fn send<T: Real, R: Rng + ?Sized>(
    word: &BitVector,
    positions: &[usize],
    gain: T,
    noise_var: T,
    rng: &mut R,
    llr: &mut [T],
) {
    let y = transmit_positions(word, positions, gain, noise_var, rng);
    for (&p, &v) in positions.iter().zip(&y) {
        llr[p] = llr_value(v, gain, noise_var);
    }
}

/// One distributed-CC period with a throwaway session.
pub fn run_distributed_cc<T: Real, R: Rng + ?Sized>(
    coop: &CoopCode,
    payload: &BitVector,
    cfg: &ProtocolConfig,
    rng: &mut R,
) -> Result<RoundTrace<T>, CoopError> {
    CoopSession::new(coop).run_distributed_cc(payload, cfg, rng)
}

/// One MRC-CC period with a throwaway session.
pub fn run_mrc_cc<T: Real, R: Rng + ?Sized>(
    coop: &CoopCode,
    payload: &BitVector,
    cfg: &ProtocolConfig,
    rng: &mut R,
) -> Result<RoundTrace<T>, CoopError> {
    CoopSession::new(coop).run_mrc_cc(payload, cfg, rng)
}
