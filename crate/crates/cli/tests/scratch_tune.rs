use icebound_core::baselines::{solve_independent_with_unary, BetaMode};
use icebound_core::trw::{infer, TrwConfig};
use icebound_core::{build_unary, eval, synth, training, EnergyParams, ExtraEvidence, MessageKernel};

fn batch(cfg: &synth::SynthConfig, seeds: std::ops::Range<u64>, train_seed: u64) -> (f64, f64, f64) {
    let train_cfg = synth::SynthConfig { seed: train_seed, ..cfg.clone() };
    let (tseq, tgt) = synth::generate(&train_cfg).unwrap();
    let template = training::learn_template(&[(&tseq, &tgt)], 11).unwrap();
    let est = training::learn_pairwise(&[&tgt], true).unwrap();
    let params = EnergyParams::new(template, 10, est.alpha, est.sigma_hat, est.beta).unwrap();
    let n = seeds.len() as f64;
    let (mut e_trw, mut e_dv, mut e_fx) = (0.0, 0.0, 0.0);
    for seed in seeds {
        let (seq, gt) = synth::generate(&synth::SynthConfig { seed, ..cfg.clone() }).unwrap();
        let unary = build_unary(&seq, &params, &ExtraEvidence::default()).unwrap();
        let trw = infer(&seq, &params, &ExtraEvidence::default(), &TrwConfig::default()).unwrap().surface;
        let dv = solve_independent_with_unary(&unary, &params, BetaMode::Dynamic, MessageKernel::Fast).unwrap();
        let fx = solve_independent_with_unary(&unary, &params, BetaMode::Fixed, MessageKernel::Fast).unwrap();
        e_trw += eval::evaluate(&trw, &gt, &[1]).unwrap().mean_error;
        e_dv += eval::evaluate(&dv, &gt, &[1]).unwrap().mean_error;
        e_fx += eval::evaluate(&fx, &gt, &[1]).unwrap().mean_error;
    }
    (e_trw / n, e_dv / n, e_fx / n)
}

#[test]
#[ignore]
fn scan_noise_levels() {
    for noise in [1.1, 1.15, 1.2] {
        let cfg0 = synth::suite_config("noisy", 0).unwrap();
        let cfg = synth::SynthConfig { noise_sigma: noise, ..cfg0 };
        for (lo, hi, ts) in [(0u64, 10u64, 999u64), (100, 110, 998), (200, 210, 997)] {
            let (t, d, f) = batch(&cfg, lo..hi, ts);
            println!("noise {noise:.2} seeds {lo}..{hi} train {ts}: trw {t:.3}  dv {d:.3}  fixed {f:.3}  ordering_ok={}", t <= d && d <= f && t < f);
        }
    }
    let rough = synth::suite_config("rough", 0).unwrap();
    let (t, d, f) = batch(&rough, 0..10, 999);
    println!("rough: trw {t:.3}  dv {d:.3}  fixed {f:.3}");
    let easy = synth::suite_config("easy", 0).unwrap();
    let (t, d, f) = batch(&easy, 0..10, 999);
    println!("easy: trw {t:.3}  dv {d:.3}  fixed {f:.3}");
}
