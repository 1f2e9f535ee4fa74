//! Min-sum message kernels for the truncated log-Gaussian pairwise term.
//!
//! A message maps a source cost vector `h` to `m(s_hat) = min_s h(s) +
//! psi2(s, s_hat)`. Two interchangeable kernels compute it:
//!
//! * [`message_naive`] — exhaustive O(rho^2) scan; the reference oracle.
//! * [`message_fast`] — O(rho * alpha) windowed minimization while the
//!   truncation window is active, and the O(rho) lower-envelope quadratic
//!   distance transform when `alpha >= rho` (no truncation). Because the
//!   pairwise cost is +inf (not a constant) outside the window, the plain
//!   unrestricted distance transform is only correct in the untruncated
//!   regime; the windowed scan keeps the truncated regime exact.
//!
//! Infinities mark labels excluded by hard constraints: `inf + finite = inf`
//! and an output entry is finite only if some finite source lies within the
//! window. Argmin ties break toward the smaller source label.

use crate::energy::{gaussian_log_norm, pairwise_cost};

/// A computed message: per-target costs plus the minimizing source label for
/// each target. `argmin` entries are meaningful only where the cost is
/// finite (infinite entries hold `usize::MAX`).
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub costs: Vec<f64>,
    pub argmin: Vec<usize>,
}

impl Message {
    fn infinite(n: usize) -> Self {
        Message {
            costs: vec![f64::INFINITY; n],
            argmin: vec![usize::MAX; n],
        }
    }
}

/// Which kernel a solver should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MessageKernel {
    /// Windowed / distance-transform kernel.
    #[default]
    Fast,
    /// Exhaustive quadratic-time oracle.
    Naive,
}

impl MessageKernel {
    pub fn run(self, h: &[f64], beta: f64, sigma_hat: f64, alpha: usize) -> Message {
        match self {
            MessageKernel::Fast => message_fast(h, beta, sigma_hat, alpha),
            MessageKernel::Naive => message_naive(h, beta, sigma_hat, alpha),
        }
    }
}

/// Exhaustive O(rho^2) message computation. Scans every source for every
/// target; ties break toward the smaller source.
pub fn message_naive(h: &[f64], beta: f64, sigma_hat: f64, alpha: usize) -> Message {
    let n = h.len();
    let mut out = Message::infinite(n);
    for s_hat in 0..n {
        let mut best = f64::INFINITY;
        let mut best_src = usize::MAX;
        for (s, &hs) in h.iter().enumerate() {
            let cand = hs + pairwise_cost(s, s_hat, beta, sigma_hat, alpha);
            if cand < best {
                best = cand;
                best_src = s;
            }
        }
        out.costs[s_hat] = best;
        out.argmin[s_hat] = best_src;
    }
    out
}

/// Fast message computation with the same output contract as
/// [`message_naive`] (values within 1e-9; identical in the windowed regime,
/// which reuses the exact cost arithmetic).
pub fn message_fast(h: &[f64], beta: f64, sigma_hat: f64, alpha: usize) -> Message {
    if alpha == 0 {
        // Degenerate window admits no pairs at all.
        Message::infinite(h.len())
    } else if alpha >= h.len() {
        envelope_transform(h, beta, sigma_hat)
    } else {
        windowed_min(h, beta, sigma_hat, alpha)
    }
}

/// Exact minimization over the active window `|s - s_hat| <= alpha - 1`.
fn windowed_min(h: &[f64], beta: f64, sigma_hat: f64, alpha: usize) -> Message {
    let n = h.len();
    let w = alpha - 1;
    let mut out = Message::infinite(n);
    for s_hat in 0..n {
        let lo = s_hat.saturating_sub(w);
        let hi = (s_hat + w).min(n - 1);
        let mut best = f64::INFINITY;
        let mut best_src = usize::MAX;
        for s in lo..=hi {
            let cand = h[s] + pairwise_cost(s, s_hat, beta, sigma_hat, alpha);
            if cand < best {
                best = cand;
                best_src = s;
            }
        }
        out.costs[s_hat] = best;
        out.argmin[s_hat] = best_src;
    }
    out
}

/// Lower-envelope quadratic distance transform (untruncated regime): each
/// finite source contributes the parabola `h(s) + coeff * (s_hat - s)^2`,
/// and the output reads the pointwise minimum of all parabolas in O(rho).
/// Infinite sources contribute no parabola. At an exact intersection the
/// earlier (smaller-rooted) parabola wins, matching the tie-break rule.
fn envelope_transform(h: &[f64], beta: f64, sigma_hat: f64) -> Message {
    let n = h.len();
    let coeff = beta / (2.0 * sigma_hat * sigma_hat);
    let offset = beta * gaussian_log_norm(sigma_hat);

    // roots[k] is the source label of the k-th envelope piece; bounds[k] is
    // that piece's left boundary (bounds[0] = -inf).
    let mut roots: Vec<usize> = Vec::with_capacity(n);
    let mut bounds: Vec<f64> = Vec::with_capacity(n);
    for (q, &hq) in h.iter().enumerate() {
        if !hq.is_finite() {
            continue;
        }
        let fq = hq + coeff * (q * q) as f64;
        loop {
            match roots.last() {
                None => {
                    roots.push(q);
                    bounds.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&r) => {
                    let fr = h[r] + coeff * (r * r) as f64;
                    // Intersection of the parabolas rooted at q and r (q > r).
                    let cut = (fq - fr) / (2.0 * coeff * (q - r) as f64);
                    if cut <= bounds[roots.len() - 1] {
                        roots.pop();
                        bounds.pop();
                    } else {
                        roots.push(q);
                        bounds.push(cut);
                        break;
                    }
                }
            }
        }
    }

    if roots.is_empty() {
        return Message::infinite(n);
    }

    let mut out = Message::infinite(n);
    let mut k = 0usize;
    for s_hat in 0..n {
        while k + 1 < roots.len() && bounds[k + 1] < s_hat as f64 {
            k += 1;
        }
        let v = roots[k];
        let d = s_hat.abs_diff(v) as f64;
        out.costs[s_hat] = h[v] + coeff * d * d + offset;
        out.argmin[s_hat] = v;
    }
    out
}
