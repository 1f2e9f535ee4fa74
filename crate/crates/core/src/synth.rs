//! Deterministic synthetic topographic sequences with known ground truth.
//!
//! Ground-truth surfaces are clamped sums of low-frequency 2D cosine
//! harmonics (bandlimited, so adjacent-label steps obey an analytic bound);
//! the intensity volume renders the template profile at the true boundary, a
//! dimmer bump at the air surface, and i.i.d. Gaussian noise. Every random
//! quantity draws from its own ChaCha stream derived from the master seed,
//! so adding a randomized field never perturbs existing ones and equal seeds
//! give bit-identical outputs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::types::{EnergyParams, Surface, TemplateModel, TopoSequence};

/// RNG stream ids, one per generated artifact.
const STREAM_SURFACE: u64 = 1;
const STREAM_AIR: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_BINS: u64 = 4;

/// Generator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub l: usize,
    pub phi: usize,
    pub rho: usize,
    pub seed: u64,
    /// Std of the additive intensity noise.
    pub noise_sigma: f64,
    /// Number of cosine harmonics in the ground-truth surface.
    pub harmonics: usize,
    /// Per-harmonic amplitude range in rows.
    pub amp_range: (f64, f64),
    /// Column-dependent amplitude ramp in [0, 2): 0 gives uniform roughness,
    /// larger values make right-hand columns rougher than left-hand ones.
    pub roughness_gradient: f64,
    /// Appearance profile rendered at the true boundary.
    pub template: TemplateModel,
    /// Peak brightness of the bump rendered at the air surface (0 disables).
    pub air_brightness: f64,
    /// Minimum rows between the air surface and the boundary; choose it
    /// above the model's `tau` so the true surface pays no air penalty.
    pub air_margin: usize,
    /// Rows between the bin bound `b_i` and the true label at the bin column.
    pub bin_slack: usize,
    /// Smoothness window the generated surface promises to respect.
    pub alpha: usize,
}

impl SynthConfig {
    /// Parameters under which every generated instance is feasible by
    /// construction: the render template, `tau` one below the air margin,
    /// and the configured window with uniform unit smoothness weights.
    pub fn nominal_params(&self) -> EnergyParams {
        EnergyParams::new(
            self.template.clone(),
            self.air_margin.saturating_sub(1),
            self.alpha,
            1.0,
            vec![1.0; self.phi],
        )
        .expect("nominal parameters are valid by construction")
    }
}

/// A rendered boundary profile: a symmetric bump of the given peak
/// brightness over a zero background, `t = 11` pixels tall.
pub fn render_template(peak: f64) -> TemplateModel {
    let half = 5isize;
    let mu: Vec<f64> = (-half..=half)
        .map(|p| peak * (-((p * p) as f64) / (2.2 * 2.2)).exp())
        .collect();
    let sigma = vec![1.0; mu.len()];
    TemplateModel::new(mu, sigma).expect("static template is valid")
}

/// The default rendered boundary profile (unit peak).
pub fn default_render_template() -> TemplateModel {
    render_template(1.0)
}

fn stream(seed: u64, id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn gen_in(rng: &mut ChaCha12Rng, range: (f64, f64)) -> f64 {
    if range.0 < range.1 {
        rng.gen_range(range.0..range.1)
    } else {
        range.0
    }
}

/// One cosine harmonic over the (slice, column) grid.
struct Harmonic {
    amp: f64,
    u: f64,
    v: f64,
    phase: f64,
}

impl Harmonic {
    fn eval(&self, fi: f64, fj: f64) -> f64 {
        self.amp * (std::f64::consts::TAU * (self.u * fi + self.v * fj) + self.phase).cos()
    }
}

fn draw_harmonics(rng: &mut ChaCha12Rng, count: usize, amp_range: (f64, f64)) -> Vec<Harmonic> {
    (0..count)
        .map(|_| Harmonic {
            amp: gen_in(rng, amp_range),
            u: rng.gen_range(1..=2) as f64,
            v: rng.gen_range(1..=2) as f64,
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        })
        .collect()
}

/// Generates a sequence and its ground-truth surface. Deterministic per
/// seed. Fails with `ConfigInfeasible` when the volume cannot host the
/// requested margins or the realized surface violates the promised window.
pub fn generate(cfg: &SynthConfig) -> Result<(TopoSequence, Surface), ModelError> {
    let (l, phi, rho) = (cfg.l, cfg.phi, cfg.rho);
    if l == 0 || phi == 0 || rho == 0 {
        return Err(ModelError::ConfigInfeasible("zero dimension".into()));
    }
    if rho <= cfg.air_margin + 2 {
        return Err(ModelError::ConfigInfeasible(format!(
            "rho = {rho} cannot host an air margin of {}",
            cfg.air_margin
        )));
    }

    // Air surface: gentle fixed-amplitude harmonics clamped high in the
    // column so the band below can hold the boundary.
    let mut air_rng = stream(cfg.seed, STREAM_AIR);
    let air_harmonics = draw_harmonics(&mut air_rng, 2, (2.0, 2.0));
    let air_base = (rho / 8) as f64;
    let air_cap = (rho / 4).min(rho - 1 - cfg.air_margin);
    let mut air = Vec::with_capacity(l * phi);
    for i in 0..l {
        for j in 0..phi {
            let fi = i as f64 / l as f64;
            let fj = j as f64 / phi as f64;
            let raw: f64 = air_base + air_harmonics.iter().map(|h| h.eval(fi, fj)).sum::<f64>();
            let a = raw.round().clamp(0.0, air_cap as f64) as usize;
            air.push(a);
        }
    }

    // Ground-truth boundary: seeded harmonics with a column-dependent
    // amplitude envelope, clamped into the feasible band. The band floor is
    // the global air maximum plus the margin; clamping against a constant
    // cannot introduce steps the harmonics did not already have.
    let air_max = *air.iter().max().expect("air is non-empty");
    let floor = air_max + cfg.air_margin;
    if floor > rho - 1 {
        return Err(ModelError::ConfigInfeasible(format!(
            "air margin {} leaves no band below row {rho}",
            cfg.air_margin
        )));
    }
    let mut surf_rng = stream(cfg.seed, STREAM_SURFACE);
    let harmonics = draw_harmonics(&mut surf_rng, cfg.harmonics, cfg.amp_range);
    let base = 0.55 * rho as f64;
    let g = cfg.roughness_gradient;
    let mut labels = Vec::with_capacity(l * phi);
    for i in 0..l {
        for j in 0..phi {
            let fi = i as f64 / l as f64;
            let fj = j as f64 / phi as f64;
            let env = if phi > 1 {
                1.0 + g * (j as f64 / (phi - 1) as f64 - 0.5)
            } else {
                1.0
            };
            let relief: f64 = harmonics.iter().map(|h| h.eval(fi, fj)).sum();
            let raw = base + env * relief;
            let s = raw.round().clamp(floor as f64, (rho - 1) as f64) as usize;
            labels.push(s);
        }
    }
    let surface = Surface::new(l, phi, labels)?;

    // The promised smoothness window must hold after rounding and clamping.
    for i in 0..l {
        for j in 0..phi {
            let s = surface.label(i, j);
            let bad_right = j + 1 < phi && s.abs_diff(surface.label(i, j + 1)) >= cfg.alpha;
            let bad_down = i + 1 < l && s.abs_diff(surface.label(i + 1, j)) >= cfg.alpha;
            if bad_right || bad_down {
                return Err(ModelError::ConfigInfeasible(format!(
                    "amplitudes produce a step >= alpha = {} at ({i}, {j})",
                    cfg.alpha
                )));
            }
        }
    }

    // Render: template bump at the boundary, dim bump at the air surface,
    // then per-voxel Gaussian noise from its own stream.
    let mut noise_rng = stream(cfg.seed, STREAM_NOISE);
    let noise = Normal::new(0.0, cfg.noise_sigma.max(0.0))
        .map_err(|e| ModelError::InvalidParameter(format!("noise sigma: {e}")))?;
    let half = cfg.template.half() as isize;
    let mut intensity = vec![0.0f32; l * phi * rho];
    for i in 0..l {
        for j in 0..phi {
            let col_base = (i * phi + j) * rho;
            let mut col = vec![0.0f64; rho];
            let s = surface.label(i, j) as isize;
            for (k, p) in (-half..=half).enumerate() {
                let r = s + p;
                if r >= 0 && (r as usize) < rho {
                    col[r as usize] += cfg.template.mu()[k];
                }
            }
            if cfg.air_brightness > 0.0 {
                let a = air[i * phi + j] as isize;
                for p in -2isize..=2 {
                    let r = a + p;
                    if r >= 0 && (r as usize) < rho {
                        col[r as usize] +=
                            cfg.air_brightness * (-((p * p) as f64) / 2.0).exp();
                    }
                }
            }
            for (r, v) in col.iter().enumerate() {
                let n = noise.sample(&mut noise_rng);
                intensity[col_base + r] = (v + n) as f32;
            }
        }
    }

    // Bottom bins: one random column per slice, bounded just below truth.
    let mut bin_rng = stream(cfg.seed, STREAM_BINS);
    let bins: Vec<Option<(usize, usize)>> = (0..l)
        .map(|i| {
            let ji = bin_rng.gen_range(0..phi);
            let bi = surface.label(i, ji).saturating_sub(cfg.bin_slack);
            Some((ji, bi))
        })
        .collect();

    let seq = TopoSequence::new(l, phi, rho, intensity, air, bins)?;
    Ok((seq, surface))
}

/// The fixed desk-scale benchmark suite: three named configurations at
/// `32 x 32 x 128` with increasing difficulty.
///
/// * `easy` — low noise, uniform roughness.
/// * `noisy` — noise comparable to the template contrast, with a roughness
///   gradient across columns so per-column smoothing weights matter.
/// * `rough` — slightly noisier still, with more and larger harmonics under
///   a wider window.
pub fn benchmark_suite(seed: u64) -> Vec<(String, SynthConfig)> {
    let base = SynthConfig {
        l: 32,
        phi: 32,
        rho: 128,
        seed,
        noise_sigma: 0.05,
        harmonics: 3,
        amp_range: (1.5, 3.0),
        roughness_gradient: 0.0,
        template: default_render_template(),
        air_brightness: 0.0,
        air_margin: 12,
        bin_slack: 4,
        alpha: 6,
    };
    let easy = base.clone();
    let noisy = SynthConfig {
        noise_sigma: 1.0,
        roughness_gradient: 0.8,
        template: render_template(2.0),
        ..base.clone()
    };
    let rough = SynthConfig {
        noise_sigma: 1.1,
        harmonics: 4,
        amp_range: (2.0, 3.0),
        roughness_gradient: 0.8,
        template: render_template(2.0),
        alpha: 8,
        ..base
    };
    vec![
        ("easy".to_string(), easy),
        ("noisy".to_string(), noisy),
        ("rough".to_string(), rough),
    ]
}

/// Looks up one suite entry by name.
pub fn suite_config(name: &str, seed: u64) -> Option<SynthConfig> {
    benchmark_suite(seed)
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, c)| c)
}
