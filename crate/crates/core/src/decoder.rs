//! Flooding belief propagation and exact erasure peeling.

use std::collections::VecDeque;

use thiserror::Error;

use crate::gf2::{BitVector, SparseMatrix};
use crate::lifting::LiftedCode;
use crate::scalar::Real;

/// LLR magnitudes are clamped to this before the hyperbolic transforms.
pub const LLR_CLAMP: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("check {0} is fully known but unsatisfied")]
    Inconsistent(usize),
    #[error("input length {got} does not match code length {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum CheckRule {
    /// Exact tanh rule.
    #[default]
    SumProduct,
    /// Min-sum with the check output scaled by `factor`.
    NormalizedMinSum { factor: f64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub hard_bits: BitVector,
    pub iterations_used: usize,
    /// The hard decision satisfies every check.
    pub converged: bool,
    pub info_bits: BitVector,
}

/// Reusable flooding BP decoder. Buffers are sized once per code so a worker
/// can decode many words without allocating.
#[derive(Clone, Debug)]
pub struct BpDecoder<T> {
    h: SparseMatrix,
    info_positions: Vec<usize>,
    rule: CheckRule,
    v2c: Vec<T>,
    c2v: Vec<T>,
    total: Vec<T>,
    hard: Vec<bool>,
    fwd: Vec<T>,
}

impl<T: Real> BpDecoder<T> {
    pub fn new(code: &LiftedCode) -> Self {
        Self::from_matrix(code.h().clone(), code.info_positions().to_vec())
    }

    pub fn from_matrix(h: SparseMatrix, info_positions: Vec<usize>) -> Self {
        let e = h.nnz();
        let n = h.cols();
        let max_row = (0..h.rows()).map(|i| h.row_weight(i)).max().unwrap_or(0);
        Self {
            h,
            info_positions,
            rule: CheckRule::SumProduct,
            v2c: vec![T::zero(); e],
            c2v: vec![T::zero(); e],
            total: vec![T::zero(); n],
            hard: vec![false; n],
            fwd: vec![T::zero(); max_row + 1],
        }
    }

    pub fn with_rule(mut self, rule: CheckRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.h
    }

    /// Decodes `llr` with at most `max_iter` flooding iterations. The hard
    /// decision is tested before the first update, so clean inputs cost no
    /// message passing.
    pub fn decode(&mut self, llr: &[T], max_iter: usize) -> DecodeResult {
        assert_eq!(llr.len(), self.h.cols(), "LLR length must equal code length");
        assert!(max_iter >= 1, "max_iter must be at least 1");
        let clamp = T::lit(LLR_CLAMP);
        for (j, &l) in llr.iter().enumerate() {
            let l = l.max(-clamp).min(clamp);
            self.total[j] = l;
            self.hard[j] = l < T::zero();
        }
        let mut iterations = 0;
        let mut converged = self.syndrome_ok();
        if !converged {
            for j in 0..self.h.cols() {
                let l = self.total[j];
                for &e in self.h.col_edges(j) {
                    self.v2c[e as usize] = l;
                }
            }
            while iterations < max_iter {
                iterations += 1;
                self.check_update();
                self.variable_update(llr, clamp);
                if self.syndrome_ok() {
                    converged = true;
                    break;
                }
            }
        }
        let hard_bits: BitVector = self.hard.iter().copied().collect();
        let info_bits = hard_bits.select(&self.info_positions);
        DecodeResult {
            hard_bits,
            iterations_used: iterations,
            converged,
            info_bits,
        }
    }

    fn syndrome_ok(&self) -> bool {
        (0..self.h.rows()).all(|i| {
            self.h
                .row(i)
                .iter()
                .fold(false, |acc, &j| acc ^ self.hard[j as usize])
                == false
        })
    }

    fn check_update(&mut self) {
        match self.rule {
            CheckRule::SumProduct => self.check_update_tanh(),
            CheckRule::NormalizedMinSum { factor } => self.check_update_min_sum(T::lit(factor)),
        }
    }

    fn check_update_tanh(&mut self) {
        let two = T::lit(2.0);
        let clamp = T::lit(LLR_CLAMP);
        let one = T::one();
        for i in 0..self.h.rows() {
            let edges = self.h.row_edges(i);
            let start = edges.start;
            let d = edges.len();
            // Forward prefix products in fwd, backward product carried in `back`.
            self.fwd[0] = one;
            // tanh(v/2) = 1 - 2/(e^v + 1), 2 atanh(p) = ln((1+p)/(1-p)).
            for k in 0..d {
                let t = one - two / (self.v2c[start + k].exp() + one);
                self.c2v[start + k] = t;
                self.fwd[k + 1] = self.fwd[k] * t;
            }
            let mut back = one;
            for k in (0..d).rev() {
                let t = self.c2v[start + k];
                let p = self.fwd[k] * back;
                back = back * t;
                let m = ((one + p) / (one - p)).ln();
                self.c2v[start + k] = m.max(-clamp).min(clamp);
            }
        }
    }

    fn check_update_min_sum(&mut self, factor: T) {
        for i in 0..self.h.rows() {
            let edges = self.h.row_edges(i);
            let mut min1 = T::infinity();
            let mut min2 = T::infinity();
            let mut arg = usize::MAX;
            let mut negative = false;
            for e in edges.clone() {
                let v = self.v2c[e];
                negative ^= v < T::zero();
                let a = v.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    arg = e;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for e in edges {
                let mag = if e == arg { min2 } else { min1 };
                let neg = negative ^ (self.v2c[e] < T::zero());
                let m = factor * mag;
                self.c2v[e] = if neg { -m } else { m };
            }
        }
    }

    fn variable_update(&mut self, llr: &[T], clamp: T) {
        for j in 0..self.h.cols() {
            let edges = self.h.col_edges(j);
            let mut t = llr[j].max(-clamp).min(clamp);
            for &e in edges {
                t = t + self.c2v[e as usize];
            }
            self.total[j] = t;
            self.hard[j] = t < T::zero();
            for &e in edges {
                let v = t - self.c2v[e as usize];
                self.v2c[e as usize] = v.max(-clamp).min(clamp);
            }
        }
    }
}

/// One-shot sum-product decode.
pub fn bp_decode<T: Real>(code: &LiftedCode, llr: &[T], max_iter: usize) -> DecodeResult {
    BpDecoder::new(code).decode(llr, max_iter)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasureResult {
    /// Bits known or recovered.
    pub resolved: Vec<bool>,
    /// Bit values; meaningful only where `resolved` is set.
    pub values: BitVector,
}

impl ErasureResult {
    pub fn all_resolved(&self, positions: &[usize]) -> bool {
        positions.iter().all(|&p| self.resolved[p])
    }
}

/// Iterative peeling: a check with exactly one unresolved neighbour fixes it.
/// Runs to a fixpoint.
pub fn erasure_decode(
    code: &LiftedCode,
    known_mask: &[bool],
    known_bits: &BitVector,
) -> Result<ErasureResult, DecodeError> {
    peel(code.h(), known_mask, known_bits)
}

pub fn peel(
    h: &SparseMatrix,
    known_mask: &[bool],
    known_bits: &BitVector,
) -> Result<ErasureResult, DecodeError> {
    let n = h.cols();
    for len in [known_mask.len(), known_bits.len()] {
        if len != n {
            return Err(DecodeError::LengthMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let mut resolved = known_mask.to_vec();
    let mut values = BitVector::zeros(n);
    for j in 0..n {
        if resolved[j] && known_bits.get(j) {
            values.set(j, true);
        }
    }
    let m = h.rows();
    let mut unknown = vec![0usize; m];
    let mut parity = vec![false; m];
    let mut queue = VecDeque::new();
    for i in 0..m {
        for &j in h.row(i) {
            if resolved[j as usize] {
                parity[i] ^= values.get(j as usize);
            } else {
                unknown[i] += 1;
            }
        }
        match unknown[i] {
            0 if parity[i] => return Err(DecodeError::Inconsistent(i)),
            1 => queue.push_back(i),
            _ => {}
        }
    }
    while let Some(i) = queue.pop_front() {
        if unknown[i] != 1 {
            continue;
        }
        let j = h
            .row(i)
            .iter()
            .map(|&j| j as usize)
            .find(|&j| !resolved[j])
            .expect("one unknown neighbour");
        let bit = parity[i];
        resolved[j] = true;
        values.set(j, bit);
        for c in h.col_rows(j) {
            unknown[c] -= 1;
            parity[c] ^= bit;
            match unknown[c] {
                0 if parity[c] => return Err(DecodeError::Inconsistent(c)),
                1 => queue.push_back(c),
                _ => {}
            }
        }
    }
    Ok(ErasureResult { resolved, values })
}

/// Erasure-diversity check of a lifted code on the all-zero codeword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedDiversityReport {
    /// `single_erasure[b]`: all info bits recovered with block `b` erased.
    pub single_erasure: Vec<bool>,
    /// `keep_one[b]`: all info bits recovered with only block `b` received.
    pub keep_one: Vec<bool>,
}

impl LiftedDiversityReport {
    pub fn full_diversity(&self) -> bool {
        self.single_erasure.iter().all(|&ok| ok)
    }

    pub fn mds_like(&self) -> bool {
        self.keep_one.iter().all(|&ok| ok)
    }
}

pub fn lifted_diversity_check(code: &LiftedCode) -> LiftedDiversityReport {
    let zero = BitVector::zeros(code.n());
    let blocks = code.num_blocks();
    let run = |keep: &dyn Fn(usize) -> bool| {
        let mask: Vec<bool> = code.block_map().iter().map(|&b| keep(b)).collect();
        peel(code.h(), &mask, &zero)
            .expect("all-zero word is consistent")
            .all_resolved(code.info_positions())
    };
    LiftedDiversityReport {
        single_erasure: (0..blocks).map(|e| run(&|b| b != e)).collect(),
        keep_one: (0..blocks).map(|k| run(&|b| b == k)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::build_encoder;
    use crate::lifting::{circulant_peg_lift, circulant_peg_lift_with, LiftOptions};
    use crate::protograph::builtin;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lift(name: &str, z: usize) -> LiftedCode {
        let opts = LiftOptions {
            min_girth: 4,
            ..LiftOptions::new(z, 3)
        };
        circulant_peg_lift_with(&builtin(name).unwrap(), &opts).unwrap()
    }

    fn codeword(code: &LiftedCode, seed: u64) -> BitVector {
        let enc = build_encoder(code).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        enc.encode(&BitVector::random(enc.k(), &mut rng)).unwrap()
    }

    fn bpsk(x: &BitVector, mag: f64) -> Vec<f64> {
        x.iter().map(|b| if b { -mag } else { mag }).collect()
    }

    #[test]
    fn clean_codeword_needs_no_iterations() {
        let code = lift("rp_a", 32);
        let x = codeword(&code, 1);
        for mag in [4.0, f64::INFINITY] {
            let r = bp_decode(&code, &bpsk(&x, mag), 100);
            assert!(r.converged);
            assert_eq!(r.iterations_used, 0);
            assert_eq!(r.hard_bits, x);
            assert_eq!(r.info_bits, x.select(code.info_positions()));
        }
    }

    #[test]
    fn zero_llr_ties_to_bit_zero() {
        let code = lift("rp_a", 32);
        let r = bp_decode::<f64>(&code, &vec![0.0; code.n()], 10);
        assert!(r.hard_bits.is_zero());
        // The all-zero word is a codeword, so the tie-broken decision passes
        // every check.
        assert!(r.converged);
    }

    #[test]
    fn corrects_a_few_flips() {
        let code = lift("rp_b", 64);
        let x = codeword(&code, 5);
        let mut llr = bpsk(&x, 2.0);
        for p in [3, 200, 377, 500] {
            llr[p] = -llr[p] * 0.5;
        }
        for rule in [CheckRule::SumProduct, CheckRule::NormalizedMinSum { factor: 0.8 }] {
            let r = BpDecoder::new(&code).with_rule(rule).decode(&llr, 50);
            assert!(r.converged, "{rule:?}");
            assert_eq!(r.hard_bits, x);
            assert!(r.iterations_used >= 1);
        }
    }

    #[test]
    fn erased_block_recovered_by_bp() {
        let code = lift("rp_a", 64);
        let x = codeword(&code, 9);
        let mut llr = bpsk(&x, 8.0);
        for p in code.block_positions(1) {
            llr[p] = 0.0;
        }
        let r = bp_decode(&code, &llr, 100);
        assert_eq!(r.info_bits, x.select(code.info_positions()));
    }

    #[test]
    fn f32_and_f64_agree_on_easy_input() {
        let code = lift("rp_a", 32);
        let x = codeword(&code, 2);
        let mut llr = bpsk(&x, 3.0);
        llr[5] = -llr[5];
        let llr32: Vec<f32> = llr.iter().map(|&v| v as f32).collect();
        let a = bp_decode(&code, &llr, 20);
        let b = bp_decode(&code, &llr32, 20);
        assert_eq!(a.hard_bits, b.hard_bits);
    }

    #[test]
    fn peeling_basics() {
        let code = lift("rp_a", 16);
        let x = codeword(&code, 4);
        let all = vec![true; code.n()];
        let r = erasure_decode(&code, &all, &x).unwrap();
        assert!(r.resolved.iter().all(|&b| b));
        let mut bad = x.clone();
        bad.flip(0);
        assert!(matches!(
            erasure_decode(&code, &all, &bad),
            Err(DecodeError::Inconsistent(_))
        ));
        // Erasing block 1 leaves every info bit recoverable with correct values.
        let mask: Vec<bool> = code.block_map().iter().map(|&b| b == 0).collect();
        let r = erasure_decode(&code, &mask, &x).unwrap();
        for &p in code.info_positions() {
            assert!(r.resolved[p]);
            assert_eq!(r.values.get(p), x.get(p));
        }
    }

    #[test]
    fn lifted_diversity_follows_the_protograph() {
        for z in [8, 64] {
            for name in ["rp_a", "rp_b", "rcrp_a", "rcrp_b", "rcrp_c"] {
                let report = lifted_diversity_check(&lift(name, z));
                assert!(report.full_diversity(), "{name} Z={z}: {report:?}");
            }
            assert!(!lifted_diversity_check(&lift("reg36", z)).full_diversity());
        }
        let code = circulant_peg_lift(&builtin("rp_b").unwrap(), 64, 1, 6).unwrap();
        assert!(lifted_diversity_check(&code).mds_like());
    }
}
