//! Protograph, lifting and GF(2) properties checked against independent
//! oracles.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpldpc::decoder::{erasure_decode, lifted_diversity_check};
use rpldpc::gf2::{rank, Completer};
use rpldpc::harness::{build_code, BuildOptions};
use rpldpc::lifting::LiftOptions;
use rpldpc::protograph::{protograph_diversity_check, Builtin, CodeFamily};
use rpldpc::{
    build_encoder, build_encoder_strict, circulant_peg_lift_with, complete_codeword, girth_of, syndrome, BitVector,
    LiftedCode, SparseMatrix,
};

const RP_FAMILY: [&str; 5] = ["rp_a", "rcrp_a", "rp_b", "rcrp_b", "rcrp_c"];

fn lift(name: &str, z: usize, seed: u64) -> LiftedCode {
    let spec = rpldpc::builtin(name).unwrap();
    let opts = LiftOptions {
        min_girth: 4,
        ..LiftOptions::new(z, seed)
    };
    circulant_peg_lift_with(&spec, &opts).unwrap()
}

/// Girth by deleting each edge in turn and measuring the shortest detour
/// between its endpoints.
fn girth_by_edge_removal(h: &SparseMatrix) -> Option<usize> {
    let (m, n) = (h.rows(), h.cols());
    // Node ids: variables 0..n, checks n..n+m.
    let mut adj = vec![Vec::new(); n + m];
    for i in 0..m {
        for &j in h.row(i) {
            adj[j as usize].push(n + i);
            adj[n + i].push(j as usize);
        }
    }
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; n + m];
    for i in 0..m {
        for &j in h.row(i) {
            let (src, dst) = (j as usize, n + i);
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[src] = 0;
            let mut q = VecDeque::from([src]);
            while let Some(u) = q.pop_front() {
                if best.is_some_and(|b| dist[u] + 1 >= b) {
                    break;
                }
                for &v in &adj[u] {
                    if (u == src && v == dst) || dist[v] != usize::MAX {
                        continue;
                    }
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
            if dist[dst] != usize::MAX {
                let cycle = dist[dst] + 1;
                best = Some(best.map_or(cycle, |b| b.min(cycle)));
            }
        }
    }
    best
}

#[test]
fn girth_agrees_with_edge_removal_oracle() {
    for b in Builtin::ALL {
        for (z, seed) in [(8, 1), (12, 2), (16, 3)] {
            let code = lift(b.name(), z, seed);
            let oracle = girth_by_edge_removal(code.h());
            assert_eq!(girth_of(code.h()), oracle, "{} z={z}", b.name());
            assert_eq!(code.girth(), oracle, "{} z={z}", b.name());
        }
    }
}

#[test]
fn lifted_degrees_match_base() {
    for b in Builtin::ALL {
        let code = lift(b.name(), 16, 7);
        let base = &code.spec().base;
        for j in 0..code.n() {
            assert_eq!(code.h().col_weight(j), base.col_sum(j / 16));
        }
        for i in 0..code.m() {
            assert_eq!(code.h().row_weight(i), base.row_sum(i / 16));
        }
    }
}

#[test]
fn circulant_blocks_are_sums_of_distinct_shifts() {
    let code = lift("rcrp_b", 16, 5);
    let z = 16;
    let base = &code.spec().base;
    for bi in 0..base.rows() {
        for bj in 0..base.cols() {
            // Row r of the block: ones at (r + s) mod Z for each shift s.
            let shifts: Vec<usize> = (0..z).filter(|&c| code.h().get(bi * z, bj * z + c)).collect();
            assert_eq!(shifts.len(), base.get(bi, bj) as usize);
            for r in 0..z {
                for c in 0..z {
                    let expect = shifts.iter().any(|&s| (s + r) % z == c);
                    assert_eq!(code.h().get(bi * z + r, bj * z + c), expect);
                }
            }
        }
    }
}

#[test]
fn lifted_layout_matches_spec() {
    let code = lift("rp_b", 16, 1);
    let spec = code.spec();
    let mut expect = Vec::new();
    for j in spec.layout.info_columns() {
        expect.extend(j * 16..(j + 1) * 16);
    }
    assert_eq!(code.info_positions(), &expect[..]);
    for (p, &b) in code.block_map().iter().enumerate() {
        assert_eq!(b, spec.layout.block_of(p / 16));
    }
}

#[test]
fn lifting_is_deterministic_and_round_trips() {
    for b in Builtin::ALL {
        let a = lift(b.name(), 16, 11);
        let c = lift(b.name(), 16, 11);
        assert_eq!(a.to_text(), c.to_text());
        let back = LiftedCode::from_text(&a.to_text()).unwrap();
        assert_eq!(back.to_text(), a.to_text());
        assert_eq!(back.h().to_dense().rank(), a.h().to_dense().rank());
    }
}

#[test]
fn lifted_peeling_agrees_with_protograph_oracle() {
    for b in Builtin::ALL {
        let proto = protograph_diversity_check(&b.spec());
        for z in [8, 16] {
            let code = lift(b.name(), z, 2);
            let lifted = lifted_diversity_check(&code);
            assert_eq!(proto.recovered_from_block, lifted.keep_one, "{} z={z}", b.name());
        }
    }
}

#[test]
fn erasure_diversity_of_builtins() {
    for z in [8, 64, 256] {
        for name in RP_FAMILY {
            let code = lift(name, z, 1);
            assert!(lifted_diversity_check(&code).full_diversity(), "{name} z={z}");
        }
        assert!(!lifted_diversity_check(&lift("reg36", z, 1)).full_diversity());
    }
}

#[test]
fn rp_a_erased_block_resolves_info() {
    let code = lift("rp_a", 64, 1);
    let enc = build_encoder(&code).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = enc.encode(&BitVector::random(enc.k(), &mut rng)).unwrap();
    let mask: Vec<bool> = code.block_map().iter().map(|&b| b != 1).collect();
    let r = erasure_decode(&code, &mask, &x).unwrap();
    assert!(r.all_resolved(code.info_positions()));
    for &p in code.info_positions() {
        assert_eq!(r.values.get(p), x.get(p));
    }
}

#[test]
fn encoder_round_trips_on_every_builtin() {
    for b in Builtin::ALL {
        for z in [8, 64] {
            let opts = BuildOptions {
                min_girth: 4,
                ..BuildOptions::new(z, 1)
            };
            let built = build_code(&b.spec(), &opts).unwrap();
            let (code, enc) = (&built.code, &built.encoder);
            let mut rng = ChaCha8Rng::seed_from_u64(z as u64);
            for _ in 0..1000 {
                let s = BitVector::random(enc.k(), &mut rng);
                let x = enc.encode(&s).unwrap();
                assert!(syndrome(code, &x).unwrap().is_zero());
                assert_eq!(x.select(enc.payload_positions()), s);
            }
            assert!(enc.encode(&BitVector::zeros(enc.k())).unwrap().is_zero());
        }
    }
}

#[test]
fn encoder_is_linear() {
    let code = lift("rcrp_b", 64, 4);
    let enc = build_encoder(&code).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let a = BitVector::random(enc.k(), &mut rng);
        let b = BitVector::random(enc.k(), &mut rng);
        let mut ab = a.clone();
        ab.xor_assign(&b);
        let mut sum = enc.encode(&a).unwrap();
        sum.xor_assign(&enc.encode(&b).unwrap());
        assert_eq!(enc.encode(&ab).unwrap(), sum);
    }
}

#[test]
fn rp_a_strict_encoder_within_seed_budget() {
    let spec = rpldpc::builtin("rp_a").unwrap();
    let found = (0..32u64).any(|seed| {
        let opts = LiftOptions {
            min_girth: 4,
            ..LiftOptions::new(8, seed)
        };
        circulant_peg_lift_with(&spec, &opts)
            .map(|c| build_encoder_strict(&c).is_ok())
            .unwrap_or(false)
    });
    assert!(found);
}

#[test]
fn rp_b_info_columns_carry_structural_relations() {
    // Summing all Z rows of a row block cancels every multiplicity-2 parity
    // cell, so H restricted to the two-block-row sums only sees info columns.
    let code = lift("rp_b", 16, 1);
    assert!(build_encoder_strict(&code).is_err());
    let enc = build_encoder(&code).unwrap();
    assert!(enc.dependent_info_bits() >= 2);
}

#[test]
fn frame_one_determines_rcrp_codewords() {
    for name in ["rcrp_a", "rcrp_b", "rcrp_c"] {
        for z in [8, 64] {
            let opts = BuildOptions {
                min_girth: 4,
                ..BuildOptions::new(z, 1)
            };
            let built = build_code(&rpldpc::builtin(name).unwrap(), &opts).unwrap();
            let coop = built.coop.as_ref().expect("frame 1 determines the codeword");
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..20 {
                let x = built.encoder.encode(&BitVector::random(built.encoder.k(), &mut rng)).unwrap();
                let f1 = x.select(coop.frame_positions(0));
                assert_eq!(coop.complete_from_frame1(&f1).unwrap(), x);
                // A corrupted frame never completes silently to the original.
                let mut bad = f1.clone();
                bad.flip(rng.random_range(0..bad.len()));
                if let Ok(w) = coop.complete_from_frame1(&bad) {
                    assert_ne!(w, x);
                }
            }
        }
    }
}

#[test]
fn completion_from_all_positions_is_identity() {
    let code = lift("rp_b", 8, 1);
    let enc = build_encoder(&code).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = enc.encode(&BitVector::random(enc.k(), &mut rng)).unwrap();
    let all: Vec<usize> = (0..code.n()).collect();
    assert_eq!(complete_codeword(&code, &all, &x).unwrap(), x);
    // Too few known positions cannot determine the word.
    assert!(Completer::new(code.h(), &all[..code.n() / 4]).is_err());
}

#[test]
fn rank_is_invariant_under_row_operations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for b in Builtin::ALL {
        let code = lift(b.name(), 8, 3);
        let r = rank(code.h());
        let mut dense = code.h().to_dense();
        for _ in 0..200 {
            let (a, c) = (rng.random_range(0..dense.rows()), rng.random_range(0..dense.rows()));
            if a != c {
                if rng.random() {
                    dense.swap_rows(a, c);
                } else {
                    dense.add_row(a, c);
                }
            }
        }
        assert_eq!(dense.rank(), r);
    }
}

#[test]
fn builtin_rates_and_families() {
    let expected = [
        ("rp_a", (1, 2), CodeFamily::Rp),
        ("rcrp_a", (1, 3), CodeFamily::Rcrp),
        ("rp_b", (1, 3), CodeFamily::Rp),
        ("rcrp_b", (1, 4), CodeFamily::Rcrp),
        ("rcrp_c", (1, 4), CodeFamily::Rcrp),
        ("reg36", (1, 2), CodeFamily::RegularCw3),
    ];
    for (name, (p, q), family) in expected {
        let spec = rpldpc::builtin(name).unwrap();
        assert_eq!(spec.rate, rpldpc::Rate::new(p, q), "{name}");
        assert_eq!(spec.base.design_rate(), Some(spec.rate));
        assert_eq!(spec.family, family);
        assert!(spec.validate().is_ok(), "{name}");
    }
}
