use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rpldpc::channel::{llrs, transmit};
use rpldpc::cooperation::{CoopSession, FrameOrigin, LinkOffsets, Protocol, ProtocolConfig, SuccessRule};
use rpldpc::harness::{build_code, BuildOptions, BuiltCode};
use rpldpc::{BitVector, ChannelConfig, Decoder, Fading};

fn built(name: &str, z: usize) -> BuiltCode {
    let opts = BuildOptions {
        min_girth: 4,
        ..BuildOptions::new(z, 1)
    };
    build_code(&rpldpc::builtin(name).unwrap(), &opts).unwrap()
}

fn signed(llr: &[f64], x: &BitVector, positions: &[usize]) -> Vec<f64> {
    positions
        .iter()
        .map(|&p| if x.get(p) { -llr[p] } else { llr[p] })
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn noiseless_links_deliver_the_codeword() {
    let b = built("rcrp_b", 64);
    let coop = b.coop.as_ref().unwrap();
    let link = ChannelConfig::new(Fading::AwgnOnly, f64::INFINITY, b.code.spec().rate).unwrap();
    let cfg = ProtocolConfig::new(Protocol::DistributedCc, 2, link);
    let mut session = CoopSession::<f64>::new(coop);
    let mut dec = Decoder::new(&b.code);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let payload = BitVector::random(b.encoder.k(), &mut rng);
        let t = session.run(&payload, &cfg, &mut rng).unwrap();
        assert_eq!(t.relay_success, vec![true, true]);
        assert_eq!(t.origins, vec![FrameOrigin::Source, FrameOrigin::Relay(0), FrameOrigin::Relay(1)]);
        let r = dec.decode(&t.llr, 100);
        assert_eq!(r.hard_bits, t.codeword);
    }
}

#[test]
fn dead_source_relay_links_fall_back_to_source() {
    let b = built("rcrp_b", 16);
    let link = ChannelConfig::new(Fading::Rayleigh, 20.0, b.code.spec().rate).unwrap();
    let cfg = ProtocolConfig {
        source_relay_gain: Some(0.0),
        ..ProtocolConfig::new(Protocol::DistributedCc, 2, link)
    };
    let mut session = CoopSession::<f64>::new(b.coop.as_ref().unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let t = session.run(&BitVector::random(b.encoder.k(), &mut rng), &cfg, &mut rng).unwrap();
        assert_eq!(t.relay_success, vec![false, false]);
        assert!(t.origins.iter().all(|o| *o == FrameOrigin::Source));
        assert_eq!(t.gains.source_destination.len(), 3);
    }
}

#[test]
fn origins_follow_success_flags() {
    let b = built("rcrp_b", 16);
    let link = ChannelConfig::new(Fading::Nakagami { m: 1.5 }, 4.0, b.code.spec().rate).unwrap();
    for rule in [SuccessRule::Genie, SuccessRule::Syndrome] {
        let cfg = ProtocolConfig {
            rule,
            ..ProtocolConfig::new(Protocol::DistributedCc, 2, link)
        };
        let mut session = CoopSession::<f64>::new(b.coop.as_ref().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut ok, mut fail) = (0, 0);
        for _ in 0..300 {
            let t = session.run(&BitVector::random(b.encoder.k(), &mut rng), &cfg, &mut rng).unwrap();
            assert_eq!(t.origins.len(), 3);
            assert_eq!(t.origins[0], FrameOrigin::Source);
            for (k, &s) in t.relay_success.iter().enumerate() {
                assert_eq!(t.origins[k + 1] == FrameOrigin::Relay(k), s);
                if s { ok += 1 } else { fail += 1 }
            }
            let sent = t.gains.source_destination.len() + t.gains.relay_destination.len();
            assert_eq!(sent, 3);
            if rule == SuccessRule::Genie {
                assert_eq!(t.false_successes, 0);
            }
            assert!(t.false_successes <= t.relay_success.iter().filter(|&&s| s).count());
        }
        // The operating point exercises both branches.
        assert!(ok > 0 && fail > 0, "{rule:?}: ok={ok} fail={fail}");
    }
}

#[test]
fn mrc_combining_scales_llr_statistics() {
    // Unit gains and error-free source-relay links: every relay joins, and
    // frame 2 carries the sum of L+1 independent Gaussian LLRs.
    let b = built("rcrp_c", 32);
    let coop = b.coop.as_ref().unwrap();
    let link = ChannelConfig::new(Fading::AwgnOnly, 2.0, b.code.spec().rate).unwrap();
    let s2 = link.noise_var();
    let frame2 = coop.frame_positions(1).to_vec();
    for relays in [1usize, 3] {
        let cfg = ProtocolConfig {
            offsets: LinkOffsets {
                source_relay: 200.0,
                ..LinkOffsets::default()
            },
            ..ProtocolConfig::new(Protocol::MrcCc, relays, link)
        };
        let mut session = CoopSession::<f64>::new(coop);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut samples = Vec::new();
        for _ in 0..200 {
            let t = session.run(&BitVector::random(b.encoder.k(), &mut rng), &cfg, &mut rng).unwrap();
            assert_eq!(t.origins[1], FrameOrigin::Combined { relays });
            samples.extend(signed(&t.llr, &t.codeword, &frame2));
        }
        let (m, v) = mean_var(&samples);
        let c = (relays + 1) as f64;
        assert!((m / (2.0 * c / s2) - 1.0).abs() < 0.02, "relays={relays} mean={m}");
        assert!((v / (4.0 * c / s2) - 1.0).abs() < 0.03, "relays={relays} var={v}");
        // Normalised spread var/mean^2 = 1/(c/s2) halves per doubling.
        assert!((v / (m * m) * c / s2 - 1.0).abs() < 0.05);
    }
}

#[test]
fn successful_relays_look_like_independent_blocks() {
    let b = built("rcrp_b", 32);
    let coop = b.coop.as_ref().unwrap();
    let link = ChannelConfig::new(Fading::Rayleigh, 3.0, b.code.spec().rate).unwrap();
    let cfg = ProtocolConfig {
        offsets: LinkOffsets {
            source_relay: 200.0,
            ..LinkOffsets::default()
        },
        ..ProtocolConfig::new(Protocol::DistributedCc, 2, link)
    };
    let mut session = CoopSession::<f64>::new(coop);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rounds = 3000;
    let mut relay_frames = vec![Vec::new(); 3];
    let mut p2p_frames = vec![Vec::new(); 3];
    for _ in 0..rounds {
        let t = session.run(&BitVector::random(b.encoder.k(), &mut rng), &cfg, &mut rng).unwrap();
        assert!(t.relay_success.iter().all(|&s| s));
        let x = b.encoder.encode(&BitVector::random(b.encoder.k(), &mut rng)).unwrap();
        let real = link.realize::<f64, _>(3, &mut rng);
        let y = transmit(&x, b.code.block_map(), &real, &mut rng);
        let l = llrs(&y, b.code.block_map(), &real);
        for f in 0..3 {
            // One sample per frame and round keeps the draws independent.
            let p = coop.frame_positions(f)[0];
            relay_frames[f].push(if t.codeword.get(p) { -t.llr[p] } else { t.llr[p] });
            p2p_frames[f].push(if x.get(p) { -l[p] } else { l[p] });
        }
    }
    for f in 0..3 {
        let (ma, va) = mean_var(&relay_frames[f]);
        let (mb, vb) = mean_var(&p2p_frames[f]);
        let se = ((va + vb) / rounds as f64).sqrt();
        assert!((ma - mb).abs() < 4.0 * se, "frame {f}: {ma} vs {mb}");
        assert!((va / vb - 1.0).abs() < 0.25, "frame {f}: {va} vs {vb}");
    }
}

#[test]
fn frame_count_mismatch_is_an_error() {
    let b = built("rcrp_b", 16);
    let link = ChannelConfig::new(Fading::Rayleigh, 10.0, b.code.spec().rate).unwrap();
    let mut session = CoopSession::<f64>::new(b.coop.as_ref().unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let payload = BitVector::random(b.encoder.k(), &mut rng);
    for cfg in [
        ProtocolConfig::new(Protocol::DistributedCc, 1, link),
        ProtocolConfig::new(Protocol::MrcCc, 2, link),
        ProtocolConfig::new(Protocol::DistributedCc, 0, link),
    ] {
        assert!(session.run(&payload, &cfg, &mut rng).is_err());
    }
}
