use rpldpc::harness::report::{wer_rows, write_rows};
use rpldpc::harness::{
    build_code, run_wer_sweep, run_wer_sweep_with, BuildOptions, BuiltCode, CodeSource, SweepConfig, SweepScenario,
    WerPoint,
};
use rpldpc::Fading;

fn small_cfg(code: &str, scenario: SweepScenario) -> SweepConfig {
    SweepConfig {
        code: CodeSource::Builtin(code.into()),
        z: 32,
        scenario,
        snr_db: vec![3.0, 6.0, 9.0],
        min_word_errors: 15,
        max_words: 3000,
        max_iterations: 40,
        seed: 42,
        ..SweepConfig::default()
    }
}

fn built(cfg: &SweepConfig) -> BuiltCode {
    let CodeSource::Builtin(name) = &cfg.code else { unreachable!() };
    let opts = BuildOptions {
        min_girth: 4,
        ..BuildOptions::new(cfg.z, cfg.lift_seed)
    };
    build_code(&rpldpc::builtin(name).unwrap(), &opts).unwrap()
}

fn csv(points: &[WerPoint], hash: &str) -> Vec<u8> {
    let rows: Vec<_> = points.iter().flat_map(|p| wer_rows(p, hash)).collect();
    let mut out = Vec::new();
    write_rows(&mut out, &rows).unwrap();
    out
}

fn with_threads<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn results_do_not_depend_on_worker_count() {
    for (code, scenario) in [
        ("rp_a", SweepScenario::P2p),
        ("rcrp_b", SweepScenario::DistributedCc { relays: 2 }),
        ("rcrp_c", SweepScenario::MrcCc { relays: 2 }),
    ] {
        let cfg = small_cfg(code, scenario);
        let b = built(&cfg);
        let hash = cfg.config_hash();
        let one = with_threads(1, || run_wer_sweep_with(&cfg, &b, |_| {}).unwrap());
        let four = with_threads(4, || run_wer_sweep_with(&cfg, &b, |_| {}).unwrap());
        assert_eq!(csv(&one, &hash), csv(&four, &hash), "{code}");
    }
}

#[test]
fn point_statistics_are_consistent() {
    let cfg = small_cfg("rp_b", SweepScenario::P2p);
    let pts = run_wer_sweep_with(&cfg, &built(&cfg), |_| {}).unwrap();
    for p in &pts {
        assert_eq!(p.wer, p.word_errors as f64 / p.words as f64);
        assert!(p.word_errors == cfg.min_word_errors || p.words == cfg.max_words);
        // A word error has at least one and at most all information bits wrong.
        assert!(p.info_bit_errors >= p.word_errors);
        assert!(p.info_bit_errors <= p.word_errors * p.info_len as u64);
        assert_eq!(p.telemetry.frames_from_source, 3 * p.words);
    }
}

#[test]
fn wer_falls_by_five_db() {
    let mut cfg = small_cfg("rp_a", SweepScenario::P2p);
    cfg.snr_db = vec![2.0, 7.0];
    cfg.fading = Fading::Nakagami { m: 1.5 };
    cfg.min_word_errors = 40;
    let pts = run_wer_sweep_with(&cfg, &built(&cfg), |_| {}).unwrap();
    assert!(pts[1].wer < pts[0].wer);
}

#[test]
fn seeds_change_results() {
    let cfg = small_cfg("rp_a", SweepScenario::P2p);
    let b = built(&cfg);
    let a = run_wer_sweep_with(&cfg, &b, |_| {}).unwrap();
    let other = SweepConfig { seed: 43, ..cfg.clone() };
    let c = run_wer_sweep_with(&other, &b, |_| {}).unwrap();
    assert_ne!(
        a.iter().map(|p| p.words).collect::<Vec<_>>(),
        c.iter().map(|p| p.words).collect::<Vec<_>>()
    );
}

#[test]
fn sink_sees_points_in_order() {
    let cfg = small_cfg("rp_a", SweepScenario::P2p);
    let mut seen = Vec::new();
    let pts = run_wer_sweep_with(&cfg, &built(&cfg), |p| seen.push(p.snr_db)).unwrap();
    assert_eq!(seen, cfg.snr_db);
    assert_eq!(pts.len(), 3);
}

#[test]
fn noiseless_stops_at_max_words() {
    let cfg = SweepConfig {
        noiseless: true,
        max_words: 500,
        z: 64,
        ..small_cfg("rcrp_b", SweepScenario::DistributedCc { relays: 2 })
    };
    let pts = run_wer_sweep(&cfg).unwrap();
    for p in pts {
        assert_eq!((p.words, p.word_errors, p.info_bit_errors), (500, 0, 0));
        assert_eq!(p.telemetry.relay_successes, 1000);
    }
}
