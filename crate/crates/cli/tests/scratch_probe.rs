use icebound_core::{synth, training, EnergyParams, ExtraEvidence, build_unary};
use icebound_core::trw::{infer, TrwConfig};

#[test]
#[ignore]
fn probe() {
    let cfg0 = synth::suite_config("noisy", 0).unwrap();
    println!("air_brightness = {}", cfg0.air_brightness);
    let cfg = synth::SynthConfig { noise_sigma: 1.0, ..cfg0 };
    let (seq, gt) = synth::generate(&synth::SynthConfig { seed: 3, ..cfg.clone() }).unwrap();
    println!("air row at (0,0) = {}, gt at (0,0) = {}", seq.air_at(0,0), gt.label(0,0));
    // train
    let (tseq, tgt) = synth::generate(&synth::SynthConfig { seed: 999, ..cfg.clone() }).unwrap();
    let template = training::learn_template(&[(&tseq, &tgt)], 11).unwrap();
    println!("learned mu = {:?}", template.mu().iter().map(|v| (v*100.0).round()/100.0).collect::<Vec<_>>());
    println!("learned sigma = {:?}", template.sigma().iter().map(|v| (v*100.0).round()/100.0).collect::<Vec<_>>());
    let est = training::learn_pairwise(&[&tgt], true).unwrap();
    println!("alpha = {}, sigma_hat = {:.3}, beta[0..6] = {:?}", est.alpha, est.sigma_hat,
        est.beta.iter().take(6).map(|v| (v*100.0).round()/100.0).collect::<Vec<_>>());
    let params = EnergyParams::new(template, 10, est.alpha, est.sigma_hat, est.beta).unwrap();
    let unary = build_unary(&seq, &params, &ExtraEvidence::default()).unwrap();
    // unary profile at slice 0 col 0: cost at air+1..air+5, and around truth
    let a = seq.air_at(0,0); let t = gt.label(0,0);
    for s in [a+1, a+3, a+8, t.saturating_sub(10), t, t+10, 126] {
        println!("unary(0,0,{s}) = {:.2}", unary.get(0,0,s));
    }
    let out = infer(&seq, &params, &ExtraEvidence::default(), &TrwConfig::default()).unwrap();
    println!("trw labels slice 0: {:?}", (0..32).map(|j| out.surface.label(0,j)).collect::<Vec<_>>());
    println!("gt     slice 0: {:?}", (0..32).map(|j| gt.label(0,j)).collect::<Vec<_>>());
    println!("bin slice 0: {:?}", seq.bin(0));
}
