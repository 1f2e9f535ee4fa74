//! Test-only oracles and instance generators.
//!
//! Everything here exists to verify the solvers from an independent angle:
//! exhaustive enumeration over all labelings, an exact transfer-matrix DP
//! over grid columns, and exhaustive single-slice path search. None of it is
//! shipped; the crate is a dev-dependency only.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use icebound_core::energy::{pairwise_cost, total_energy_with_unary, UnaryTable};
use icebound_core::{EnergyParams, Surface, TemplateModel, TopoSequence};

/// A random grid instance exercising the full pipeline types.
pub struct RandomInstance {
    pub seq: TopoSequence,
    pub params: EnergyParams,
}

/// Builds a seeded random instance: uniform random intensities, a length-1
/// template (so the unary is just the squared intensity), random per-column
/// smoothness weights, and air surface fixed at row 0 (labels >= 1 feasible).
pub fn random_instance(l: usize, phi: usize, rho: usize, alpha: usize, seed: u64) -> RandomInstance {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let intensity: Vec<f32> = (0..l * phi * rho)
        .map(|_| rng.gen_range(-1.5f32..1.5f32))
        .collect();
    let air = vec![0usize; l * phi];
    let bin_cap = (rho / 2 + 2).min(rho); // keep the top label feasible
    let bins = (0..l)
        .map(|_| {
            if rng.gen_bool(0.3) {
                Some((rng.gen_range(0..phi), rng.gen_range(1..bin_cap)))
            } else {
                None
            }
        })
        .collect();
    let seq = TopoSequence::new(l, phi, rho, intensity, air, bins).unwrap();
    let template = TemplateModel::new(vec![0.0], vec![1.0]).unwrap();
    let beta: Vec<f64> = (0..phi).map(|_| rng.gen_range(0.5f64..2.0f64)).collect();
    let sigma_hat = rng.gen_range(0.7f64..2.0f64);
    let params = EnergyParams::new(template, 1, alpha, sigma_hat, beta).unwrap();
    RandomInstance { seq, params }
}

/// A random message-kernel input: costs in [0, 10) with `p_inf` probability
/// of an infinite (hard-excluded) entry; always keeps at least one finite.
pub fn random_cost_vector(rho: usize, p_inf: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let mut h: Vec<f64> = (0..rho)
        .map(|_| {
            if rng.gen_bool(p_inf) {
                f64::INFINITY
            } else {
                rng.gen_range(0.0..10.0)
            }
        })
        .collect();
    if h.iter().all(|c| c.is_infinite()) {
        let k = rng.gen_range(0..rho);
        h[k] = rng.gen_range(0.0..10.0);
    }
    h
}

/// Exact optimum by enumerating every labeling (use only for tiny grids).
pub fn exhaustive_optimum(unary: &UnaryTable, params: &EnergyParams) -> (Surface, f64) {
    let (l, phi, rho) = unary.dims();
    let nodes = l * phi;
    let mut labels = vec![0usize; nodes];
    let mut best_labels = labels.clone();
    let mut best = f64::INFINITY;
    loop {
        let surface = Surface::new(l, phi, labels.clone()).unwrap();
        let e = total_energy_with_unary(&surface, unary, params);
        if e < best {
            best = e;
            best_labels = labels.clone();
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == nodes {
                return (Surface::new(l, phi, best_labels).unwrap(), best);
            }
            labels[k] += 1;
            if labels[k] < rho {
                break;
            }
            labels[k] = 0;
            k += 1;
        }
    }
}

/// Exact optimum via dynamic programming over grid columns: the state for
/// column `j` is the joint label of the `l` nodes `(0, j) .. (l-1, j)`.
/// Exponential in `l` only (`rho^l` states), so it handles grids that defeat
/// full enumeration. Independent of the message-passing code paths.
pub fn column_dp_optimum(unary: &UnaryTable, params: &EnergyParams) -> f64 {
    let (l, phi, rho) = unary.dims();
    let states = rho.pow(l as u32);
    let digit = |state: usize, i: usize| -> usize { state / rho.pow(i as u32) % rho };

    // Unary-plus-vertical cost of one column in one joint state.
    let node_cost = |j: usize, state: usize| -> f64 {
        let beta = params.beta_at(j);
        let mut c = 0.0;
        for i in 0..l {
            c += unary.get(i, j, digit(state, i));
            if i + 1 < l {
                c += pairwise_cost(
                    digit(state, i),
                    digit(state, i + 1),
                    beta,
                    params.sigma_hat,
                    params.alpha,
                );
            }
        }
        c
    };

    let mut dp: Vec<f64> = (0..states).map(|s| node_cost(0, s)).collect();
    for j in 1..phi {
        let beta = params.beta_at(j - 1);
        let mut next = vec![f64::INFINITY; states];
        for (to, slot) in next.iter_mut().enumerate() {
            let own = node_cost(j, to);
            if own.is_infinite() {
                continue;
            }
            let mut best = f64::INFINITY;
            for (from, &acc) in dp.iter().enumerate() {
                if acc.is_infinite() {
                    continue;
                }
                let mut trans = 0.0;
                for i in 0..l {
                    trans += pairwise_cost(
                        digit(from, i),
                        digit(to, i),
                        beta,
                        params.sigma_hat,
                        params.alpha,
                    );
                    if trans.is_infinite() {
                        break;
                    }
                }
                let cand = acc + trans;
                if cand < best {
                    best = cand;
                }
            }
            *slot = best + own;
        }
        dp = next;
    }
    dp.into_iter().fold(f64::INFINITY, f64::min)
}

/// Exact optimum of a single-slice chain by enumerating all `rho^phi` paths.
/// `edge_beta[j]` weights the edge between columns `j` and `j+1`.
pub fn slice_enumeration_optimum(
    unary: &UnaryTable,
    slice: usize,
    edge_beta: &[f64],
    sigma_hat: f64,
    alpha: usize,
) -> f64 {
    let (_, phi, rho) = unary.dims();
    assert_eq!(edge_beta.len(), phi.saturating_sub(1));
    let mut labels = vec![0usize; phi];
    let mut best = f64::INFINITY;
    loop {
        let mut e = 0.0;
        for j in 0..phi {
            e += unary.get(slice, j, labels[j]);
            if j + 1 < phi {
                e += pairwise_cost(labels[j], labels[j + 1], edge_beta[j], sigma_hat, alpha);
            }
        }
        if e < best {
            best = e;
        }
        let mut k = 0;
        loop {
            if k == phi {
                return best;
            }
            labels[k] += 1;
            if labels[k] < rho {
                break;
            }
            labels[k] = 0;
            k += 1;
        }
    }
}

/// Hard-constraint violations of a surface: below-air labels, bin bounds at
/// designated columns, intra-slice window violations, and (optionally)
/// inter-slice window violations. Returns human-readable descriptions.
pub fn constraint_violations(
    surface: &Surface,
    seq: &TopoSequence,
    alpha: usize,
    check_inter_slice: bool,
) -> Vec<String> {
    let (l, phi, _) = seq.dims();
    let mut out = Vec::new();
    for i in 0..l {
        for j in 0..phi {
            let s = surface.label(i, j);
            if s <= seq.air_at(i, j) {
                out.push(format!("label {s} not below air at ({i}, {j})"));
            }
            if let Some((ji, bi)) = seq.bin(i) {
                if ji == j && s < bi {
                    out.push(format!("label {s} above bin bound {bi} at ({i}, {j})"));
                }
            }
            if j + 1 < phi && s.abs_diff(surface.label(i, j + 1)) >= alpha {
                out.push(format!("intra-slice jump >= alpha at ({i}, {j})"));
            }
            if check_inter_slice && i + 1 < l && s.abs_diff(surface.label(i + 1, j)) >= alpha {
                out.push(format!("inter-slice jump >= alpha at ({i}, {j})"));
            }
        }
    }
    out
}
