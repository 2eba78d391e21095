//! Outage limits of block-fading channels.
//!
//! A transmission period is in outage when the mutual information averaged
//! over its fading blocks falls below the code rate. The per-block mutual
//! information is the BPSK-input AWGN capacity at the instantaneous symbol
//! SNR `α² γs`, where `γs = 2 r γb` follows the channel module's convention.
//!
//! Relay scenarios use an information-accumulation model:
//! - **distributed CC**: relay `k` succeeds when its source-relay capacity
//!   reaches the broadcast threshold (the standalone frame-1 rate by
//!   default). Frame `k+1` then travels over the relay link, otherwise over a
//!   fresh source link. Both links have the same statistics, and the choice
//!   is independent of their gains, so one gain per frame is drawn.
//! - **MRC CC**: frame 2 is sent by the source and every successful relay on
//!   orthogonal channels. Maximum-ratio combining of the same symbols adds
//!   their SNRs.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::Fading;
use crate::protograph::Rate;
use crate::seeds::mix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OutageError {
    #[error("invalid outage query: {0}")]
    Config(String),
}

/// Gauss-Hermite rule for the weight `exp(-x²)`, by Newton iteration on the
/// Hermite recurrence. Nodes are returned in decreasing order.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const GH_NODES: usize = 64;

fn gh_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(GH_NODES))
}

/// `log2(1 + e^{-l})` without overflow.
fn log2_1p_exp_neg(l: f64) -> f64 {
    let v = if l > 0.0 {
        (-l).exp().ln_1p()
    } else {
        -l + l.exp().ln_1p()
    };
    v / std::f64::consts::LN_2
}

/// Mutual information of BPSK over real AWGN at symbol SNR `s = 1/σ²`, by
/// 64-node Gauss-Hermite quadrature of `1 - E[log2(1 + e^{-L})]` with
/// `L ~ N(2s, 4s)`.
pub fn bpsk_capacity(s: f64) -> f64 {
    if s.is_nan() || s <= 0.0 {
        return 0.0;
    }
    if s.is_infinite() {
        return 1.0;
    }
    let (x, w) = gh_rule();
    let scale = 2.0 * (2.0 * s).sqrt();
    let mean: f64 = x
        .iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * log2_1p_exp_neg(2.0 * s + scale * xi))
        .sum::<f64>()
        / std::f64::consts::PI.sqrt();
    (1.0 - mean).clamp(0.0, 1.0)
}

/// Capacity of the real AWGN channel with Gaussian input, `½ log2(1 + s)`.
pub fn gaussian_capacity(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    0.5 * s.ln_1p() / std::f64::consts::LN_2
}

/// `bpsk_capacity` tabulated on a log grid, linearly interpolated in `log10 s`.
pub struct CapacityTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl CapacityTable {
    const LOG_LO: f64 = -6.0;
    const LOG_HI: f64 = 6.0;
    const POINTS: usize = 8193;

    pub fn new() -> Self {
        let step = (Self::LOG_HI - Self::LOG_LO) / (Self::POINTS - 1) as f64;
        let values = (0..Self::POINTS)
            .map(|i| bpsk_capacity(10f64.powf(Self::LOG_LO + step * i as f64)))
            .collect();
        Self {
            lo: Self::LOG_LO,
            step,
            values,
        }
    }

    /// Process-wide shared table.
    pub fn shared() -> &'static CapacityTable {
        static TABLE: OnceLock<CapacityTable> = OnceLock::new();
        TABLE.get_or_init(CapacityTable::new)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 || s.is_nan() {
            return 0.0;
        }
        let t = (s.log10() - self.lo) / self.step;
        if t < 0.0 || t >= (self.values.len() - 1) as f64 {
            return bpsk_capacity(s);
        }
        let i = t as usize;
        let f = t - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

impl Default for CapacityTable {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Point-to-point over `blocks` fading blocks.
    P2p { blocks: usize },
    DistributedCc { relays: usize },
    MrcCc { relays: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InputModel {
    #[default]
    Bpsk,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutageQuery {
    pub scenario: Scenario,
    /// Overall code rate; also fixes `γs = 2 r γb`.
    pub rate: Rate,
    pub fading: Fading,
    pub snr_db: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub input: InputModel,
    /// Relay decoding threshold; defaults to the standalone frame-1 rate.
    pub broadcast_rate: Option<f64>,
    /// Treat every source-relay link as error free.
    pub perfect_source_relay: bool,
}

impl OutageQuery {
    pub const MIN_SAMPLES: usize = 10_000;

    pub fn new(scenario: Scenario, rate: Rate, fading: Fading, snr_db: Vec<f64>) -> Self {
        Self {
            scenario,
            rate,
            fading,
            snr_db,
            samples: 1_000_000,
            seed: 1,
            input: InputModel::Bpsk,
            broadcast_rate: None,
            perfect_source_relay: false,
        }
    }

    fn rate_f64(&self) -> f64 {
        *self.rate.numer() as f64 / *self.rate.denom() as f64
    }

    fn frames(&self) -> usize {
        match self.scenario {
            Scenario::P2p { blocks } => blocks,
            Scenario::DistributedCc { relays } => relays + 1,
            Scenario::MrcCc { .. } => 2,
        }
    }

    /// Broadcast threshold in use.
    pub fn broadcast_threshold(&self) -> f64 {
        self.broadcast_rate
            .unwrap_or(self.frames() as f64 * self.rate_f64())
    }

    fn validate(&self) -> Result<(), OutageError> {
        let r = self.rate_f64();
        if !(r > 0.0 && r < 1.0) {
            return Err(OutageError::Config(format!("rate {} outside (0, 1)", self.rate)));
        }
        if self.samples < Self::MIN_SAMPLES {
            return Err(OutageError::Config(format!(
                "need at least {} samples, got {}",
                Self::MIN_SAMPLES,
                self.samples
            )));
        }
        match self.scenario {
            Scenario::P2p { blocks: 0 } => {
                return Err(OutageError::Config("at least one block required".into()))
            }
            Scenario::DistributedCc { relays: 0 } | Scenario::MrcCc { relays: 0 } => {
                return Err(OutageError::Config("relay scenarios need at least one relay".into()))
            }
            _ => {}
        }
        if let Some(m) = self.fading.shape() {
            if m.is_nan() || m < 0.5 {
                return Err(OutageError::Config(format!("Nakagami shape {m} below 0.5")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub samples: u64,
    pub outages: u64,
    pub p_out: f64,
    /// 95% normal-approximation half-width.
    pub ci: f64,
}

/// Normal-approximation 95% half-width of a binomial proportion.
pub fn binomial_half_width(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

pub fn outage_p2p(q: &OutageQuery) -> Result<Vec<OutagePoint>, OutageError> {
    if !matches!(q.scenario, Scenario::P2p { .. }) {
        return Err(OutageError::Config("outage_p2p needs a p2p scenario".into()));
    }
    run(q)
}

pub fn outage_relay(q: &OutageQuery) -> Result<Vec<OutagePoint>, OutageError> {
    if matches!(q.scenario, Scenario::P2p { .. }) {
        return Err(OutageError::Config("outage_relay needs a relay scenario".into()));
    }
    run(q)
}

/// Dispatches on the scenario.
pub fn outage(q: &OutageQuery) -> Result<Vec<OutagePoint>, OutageError> {
    run(q)
}

const CHUNK: usize = 4096;

fn run(q: &OutageQuery) -> Result<Vec<OutagePoint>, OutageError> {
    q.validate()?;
    let table = CapacityTable::shared();
    let cap = |s: f64| match q.input {
        InputModel::Bpsk => table.eval(s),
        InputModel::Gaussian => gaussian_capacity(s),
    };
    let r = q.rate_f64();
    let gammas: Vec<f64> = q
        .snr_db
        .iter()
        .map(|db| 2.0 * r * 10f64.powf(db / 10.0))
        .collect();
    let frames = q.frames();
    let threshold = q.broadcast_threshold();
    let chunks = q.samples.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(&[q.seed, c as u64]));
            let n = CHUNK.min(q.samples - c * CHUNK);
            let mut out = vec![0u64; gammas.len()];
            let mut frame_gain = vec![0.0; frames];
            let relays = match q.scenario {
                Scenario::P2p { .. } => 0,
                Scenario::DistributedCc { relays } | Scenario::MrcCc { relays } => relays,
            };
            let mut sr = vec![0.0; relays];
            let mut rd = vec![0.0; relays];
            for _ in 0..n {
                for g in frame_gain.iter_mut() {
                    *g = q.fading.sample_power(&mut rng);
                }
                for g in sr.iter_mut() {
                    *g = q.fading.sample_power(&mut rng);
                }
                if matches!(q.scenario, Scenario::MrcCc { .. }) {
                    for g in rd.iter_mut() {
                        *g = q.fading.sample_power(&mut rng);
                    }
                }
                for (o, &gs) in out.iter_mut().zip(&gammas) {
                    let ok = |k: usize| q.perfect_source_relay || cap(sr[k] * gs) >= threshold;
                    let total: f64 = match q.scenario {
                        Scenario::P2p { .. } | Scenario::DistributedCc { .. } => {
                            frame_gain.iter().map(|&g| cap(g * gs)).sum()
                        }
                        Scenario::MrcCc { .. } => {
                            let combined: f64 = frame_gain[1]
                                + (0..relays).filter(|&k| ok(k)).map(|k| rd[k]).sum::<f64>();
                            cap(frame_gain[0] * gs) + cap(combined * gs)
                        }
                    };
                    if total / (frames as f64) < r {
                        *o += 1;
                    }
                }
            }
            out
        })
        .reduce(
            || vec![0u64; gammas.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let n = q.samples as u64;
    Ok(q.snr_db
        .iter()
        .zip(counts)
        .map(|(&snr_db, outages)| {
            let p_out = outages as f64 / n as f64;
            OutagePoint {
                snr_db,
                samples: n,
                outages,
                p_out,
                ci: binomial_half_width(p_out, n),
            }
        })
        .collect())
}
