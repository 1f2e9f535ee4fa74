//! Sequential tree-reweighted message passing over the slice-column grid.
//!
//! Nodes are the (slice, column) pixels in row-major order; each undirected
//! 4-neighbor edge carries the truncated log-Gaussian pairwise term. The
//! grid decomposes into monotonic chains — the `l` rows (horizontal edges)
//! and the `phi` columns (vertical edges) — each edge in exactly one chain,
//! each node's unary split evenly across the chains through it. One
//! iteration is a forward pass in increasing row-major order followed by a
//! backward pass in decreasing order; processing a node averages the chain
//! min-marginals at that node and re-sends its pass-direction messages, so
//! the update at node p uses `gamma_p * D_p(x) - M_reverse(x)` with `D_p`
//! the unary plus all incoming messages and `gamma_p = 1 / #chains through
//! p` (1/2 on a 2D grid, 1 on a chain, where the sweep is plain min-sum
//! belief propagation and decoding is exact).
//!
//! Hard constraints never enter the message arithmetic: before solving, the
//! per-node feasible label intervals (finite unary entries) are narrowed to
//! arc consistency under the `|s - s_hat| < alpha` window, which either
//! proves the instance infeasible or guarantees every message entry read
//! inside the windows stays finite.
//!
//! The lower bound reported per iteration is the chain-decomposition dual:
//! the sum over chains of each chain's minimum energy under the current
//! split. During the backward pass, the last node of every chain (column 0
//! for a row chain, slice 0 for a column chain) has fresh messages from the
//! whole chain, so its post-averaging min-marginal minimum IS that chain's
//! minimum, and the bound falls out of the sweep at no extra cost. The sum
//! of the chain energies equals the total energy for every labeling, so the
//! bound can never exceed the optimum; min-marginal averaging never
//! decreases it. Messages are stored raw (no per-message renormalization):
//! they are bounded by chain partial energies, well inside f64 range, and
//! keeping them exact keeps the recorded chain minima exact.

use crate::energy::{build_unary, pairwise_cost, total_energy_with_unary, UnaryTable};
use crate::error::ModelError;
use crate::msgpass::MessageKernel;
use crate::types::{EnergyParams, ExtraEvidence, Surface, TopoSequence};

/// Message stores are indexed by the direction the message ARRIVES from.
const FROM_LEFT: usize = 0;
const FROM_RIGHT: usize = 1;
const FROM_UP: usize = 2;
const FROM_DOWN: usize = 3;

/// Solver configuration.
#[derive(Debug, Clone, Copy)]
pub struct TrwConfig {
    /// Iteration cap. `None` means the slice width `phi`, which lets
    /// evidence from one side of a slice reach the other.
    pub max_iterations: Option<usize>,
    /// Stop early once an iteration improves the lower bound by less than
    /// this. Set to a negative value to always run the full cap.
    pub tolerance: f64,
    /// Message kernel used for every per-edge minimization.
    pub kernel: MessageKernel,
}

impl Default for TrwConfig {
    fn default() -> Self {
        TrwConfig {
            max_iterations: None,
            tolerance: 1e-6,
            kernel: MessageKernel::Fast,
        }
    }
}

/// Result of a full inference run.
#[derive(Debug, Clone)]
pub struct TrwOutcome {
    pub surface: Surface,
    /// Total energy of `surface` (finite by construction).
    pub energy: f64,
    /// Lower bound after each completed forward+backward iteration.
    pub bound_trace: Vec<f64>,
}

/// Stateful solver: messages, feasible windows, and the bound trace.
pub struct TrwSolver<'a> {
    unary: &'a UnaryTable,
    params: &'a EnergyParams,
    l: usize,
    phi: usize,
    rho: usize,
    /// Arc-consistent feasible label interval per node.
    lo: Vec<usize>,
    hi: Vec<usize>,
    /// Directed messages: `msg[dir][node * rho + s]`, finite inside windows.
    msg: [Vec<f64>; 4],
    kernel: MessageKernel,
    trace: Vec<f64>,
}

impl<'a> TrwSolver<'a> {
    /// Prepares a solver: computes arc-consistent label windows and zeroes
    /// all messages. Fails with `Infeasible` naming the first pixel whose
    /// label set empties.
    pub fn new(
        unary: &'a UnaryTable,
        params: &'a EnergyParams,
        kernel: MessageKernel,
    ) -> Result<Self, ModelError> {
        let (l, phi, rho) = unary.dims();
        let nodes = l * phi;
        let mut lo = vec![0usize; nodes];
        let mut hi = vec![0usize; nodes];
        for i in 0..l {
            for j in 0..phi {
                match unary.finite_window(i, j) {
                    Some((a, b)) => {
                        lo[i * phi + j] = a;
                        hi[i * phi + j] = b;
                    }
                    None => return Err(ModelError::Infeasible { slice: i, column: j }),
                }
            }
        }
        arc_consistency(&mut lo, &mut hi, l, phi, params.alpha)?;
        let msg = [
            vec![0.0; nodes * rho],
            vec![0.0; nodes * rho],
            vec![0.0; nodes * rho],
            vec![0.0; nodes * rho],
        ];
        Ok(TrwSolver {
            unary,
            params,
            l,
            phi,
            rho,
            lo,
            hi,
            msg,
            kernel,
            trace: Vec::new(),
        })
    }

    /// Lower bound after each completed iteration, in order.
    pub fn bound_trace(&self) -> &[f64] {
        &self.trace
    }

    /// Latest lower bound, if at least one iteration has completed.
    pub fn lower_bound(&self) -> Option<f64> {
        self.trace.last().copied()
    }

    /// Feasible window of a node after constraint propagation.
    pub fn window(&self, i: usize, j: usize) -> (usize, usize) {
        let n = i * self.phi + j;
        (self.lo[n], self.hi[n])
    }

    fn node(&self, i: usize, j: usize) -> usize {
        i * self.phi + j
    }

    /// Sum of unary and all incoming messages over the node's window.
    fn aggregate(&self, i: usize, j: usize, d: &mut [f64]) {
        let n = self.node(i, j);
        let base = n * self.rho;
        let col = self.unary.column(i, j);
        for x in self.lo[n]..=self.hi[n] {
            d[x] = col[x]
                + self.msg[FROM_LEFT][base + x]
                + self.msg[FROM_RIGHT][base + x]
                + self.msg[FROM_UP][base + x]
                + self.msg[FROM_DOWN][base + x];
        }
    }

    /// `1 / #chains through a node`: 1/2 when both a row chain and a column
    /// chain exist, 1 on chain-shaped grids.
    fn gamma(&self) -> f64 {
        let chains = usize::from(self.phi > 1) + usize::from(self.l > 1);
        1.0 / chains.max(1) as f64
    }

    /// Sends the message from node (i, j) along one edge. `incoming` is the
    /// direction index (at the sender) of the message arriving on that same
    /// edge; `store` is the direction index at the receiver.
    #[allow(clippy::too_many_arguments)]
    fn send(
        &mut self,
        i: usize,
        j: usize,
        d: &[f64],
        gamma: f64,
        incoming: usize,
        to: (usize, usize),
        store: usize,
        beta: f64,
        h: &mut Vec<f64>,
    ) {
        let n = self.node(i, j);
        let base = n * self.rho;
        h.clear();
        h.resize(self.rho, f64::INFINITY);
        for x in self.lo[n]..=self.hi[n] {
            h[x] = gamma * d[x] - self.msg[incoming][base + x];
        }
        let m = self
            .kernel
            .run(h, beta, self.params.sigma_hat, self.params.alpha);
        let tn = self.node(to.0, to.1);
        let tbase = tn * self.rho;
        self.msg[store][tbase..tbase + self.rho].copy_from_slice(&m.costs);
    }

    /// One full forward+backward sweep. Returns the lower bound at the end
    /// of the sweep and appends it to the trace.
    pub fn iterate(&mut self) -> f64 {
        let mut d = vec![f64::INFINITY; self.rho];
        let mut h: Vec<f64> = Vec::with_capacity(self.rho);
        let gamma = self.gamma();

        // Forward pass: send right and down in increasing row-major order.
        for i in 0..self.l {
            for j in 0..self.phi {
                self.aggregate(i, j, &mut d);
                if j + 1 < self.phi {
                    let beta = self.params.beta_at(j);
                    self.send(i, j, &d, gamma, FROM_RIGHT, (i, j + 1), FROM_LEFT, beta, &mut h);
                }
                if i + 1 < self.l {
                    let beta = self.params.beta_at(j);
                    self.send(i, j, &d, gamma, FROM_DOWN, (i + 1, j), FROM_UP, beta, &mut h);
                }
            }
        }

        // Backward pass: send left and up in decreasing row-major order.
        // When the pass reaches a chain's first node (column 0 for a row
        // chain, slice 0 for a column chain) its messages cover the whole
        // chain, so gamma * min(D) is exactly that chain's minimum energy
        // under the current split; their sum is the iteration's bound.
        let mut bound = 0.0f64;
        for i in (0..self.l).rev() {
            for j in (0..self.phi).rev() {
                self.aggregate(i, j, &mut d);
                let closing = usize::from(j == 0 && self.phi > 1)
                    + usize::from(i == 0 && self.l > 1)
                    + usize::from(self.phi == 1 && self.l == 1);
                if closing > 0 {
                    let n = self.node(i, j);
                    let mut m = f64::INFINITY;
                    for x in self.lo[n]..=self.hi[n] {
                        m = m.min(d[x]);
                    }
                    bound += closing as f64 * gamma * m;
                }
                if j > 0 {
                    let beta = self.params.beta_at(j - 1);
                    self.send(i, j, &d, gamma, FROM_LEFT, (i, j - 1), FROM_RIGHT, beta, &mut h);
                }
                if i > 0 {
                    let beta = self.params.beta_at(j);
                    self.send(i, j, &d, gamma, FROM_UP, (i - 1, j), FROM_DOWN, beta, &mut h);
                }
            }
        }

        self.trace.push(bound);
        bound
    }

    /// Assigns labels in row-major order: each pixel minimizes its unary
    /// plus the messages from its not-yet-decoded neighbors (right, down)
    /// plus the pairwise terms against its already-fixed neighbors (left,
    /// up). Ties break toward the smaller label. Fails with `Infeasible` if
    /// some pixel has no finite-score label given its fixed predecessors.
    pub fn decode(&self) -> Result<Surface, ModelError> {
        let mut labels: Vec<usize> = Vec::with_capacity(self.l * self.phi);
        for i in 0..self.l {
            for j in 0..self.phi {
                let n = self.node(i, j);
                let base = n * self.rho;
                let col = self.unary.column(i, j);
                let mut best = f64::INFINITY;
                let mut best_s = usize::MAX;
                for x in self.lo[n]..=self.hi[n] {
                    let mut c = col[x];
                    if j + 1 < self.phi {
                        c += self.msg[FROM_RIGHT][base + x];
                    }
                    if i + 1 < self.l {
                        c += self.msg[FROM_DOWN][base + x];
                    }
                    if j > 0 {
                        c += pairwise_cost(
                            x,
                            labels[n - 1],
                            self.params.beta_at(j - 1),
                            self.params.sigma_hat,
                            self.params.alpha,
                        );
                    }
                    if i > 0 {
                        c += pairwise_cost(
                            x,
                            labels[n - self.phi],
                            self.params.beta_at(j),
                            self.params.sigma_hat,
                            self.params.alpha,
                        );
                    }
                    if c < best {
                        best = c;
                        best_s = x;
                    }
                }
                if !best.is_finite() {
                    return Err(ModelError::Infeasible { slice: i, column: j });
                }
                labels.push(best_s);
            }
        }
        Surface::new(self.l, self.phi, labels)
    }
}

/// Narrows per-node label intervals to arc consistency under the pairwise
/// window: every surviving label has a surviving partner within `alpha - 1`
/// rows at each neighbor. Because all constraints are intervals, an empty
/// interval here is exact proof of infeasibility, and non-empty intervals
/// guarantee a finite-energy labeling exists (take every node's lower end).
fn arc_consistency(
    lo: &mut [usize],
    hi: &mut [usize],
    l: usize,
    phi: usize,
    alpha: usize,
) -> Result<(), ModelError> {
    let w = alpha - 1;
    loop {
        let mut changed = false;
        let mut tighten = |lo: &mut [usize], hi: &mut [usize], a: usize, b: usize| {
            let nl = lo[a].max(lo[b].saturating_sub(w));
            let nh = hi[a].min(hi[b] + w);
            if nl != lo[a] || nh != hi[a] {
                lo[a] = nl;
                hi[a] = nh;
                changed = true;
            }
        };
        for i in 0..l {
            for j in 0..phi {
                let n = i * phi + j;
                if j > 0 {
                    tighten(lo, hi, n, n - 1);
                }
                if i > 0 {
                    tighten(lo, hi, n, n - phi);
                }
            }
        }
        for i in (0..l).rev() {
            for j in (0..phi).rev() {
                let n = i * phi + j;
                if j + 1 < phi {
                    tighten(lo, hi, n, n + 1);
                }
                if i + 1 < l {
                    tighten(lo, hi, n, n + phi);
                }
            }
        }
        for i in 0..l {
            for j in 0..phi {
                let n = i * phi + j;
                if lo[n] > hi[n] {
                    return Err(ModelError::Infeasible { slice: i, column: j });
                }
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

/// Full inference: builds the unary table, sweeps until the iteration cap
/// (default `phi`) or until the bound stalls below `tolerance`, then decodes.
/// Hitting the cap without convergence is not an error; the best decoded
/// surface is returned with its bound trace.
pub fn infer(
    seq: &TopoSequence,
    params: &EnergyParams,
    extra: &ExtraEvidence,
    cfg: &TrwConfig,
) -> Result<TrwOutcome, ModelError> {
    params.check_phi(seq.columns())?;
    let unary = build_unary(seq, params, extra)?;
    let mut solver = TrwSolver::new(&unary, params, cfg.kernel)?;
    let cap = cfg.max_iterations.unwrap_or(seq.columns()).max(1);
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..cap {
        let bound = solver.iterate();
        if bound - prev < cfg.tolerance {
            break;
        }
        prev = bound;
    }
    let surface = solver.decode()?;
    let energy = total_energy_with_unary(&surface, &unary, params);
    Ok(TrwOutcome {
        surface,
        energy,
        bound_trace: solver.trace.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::TemplateModel;

    #[test]
    fn single_node_bound_equals_unary_min_and_decode() {
        let intensity = vec![2.0f32, 1.0, 0.5, 3.0];
        let seq = TopoSequence::new(1, 1, 4, intensity, vec![0], vec![None]).unwrap();
        let tmpl = TemplateModel::new(vec![0.0], vec![1.0]).unwrap();
        let params = EnergyParams::uniform(tmpl, 0, 2, 1.0, 1).unwrap();
        let out = infer(&seq, &params, &ExtraEvidence::default(), &TrwConfig::default()).unwrap();
        assert_eq!(out.surface.label(0, 0), 2);
        let b = *out.bound_trace.last().unwrap();
        assert!((b - out.energy).abs() < 1e-12);
    }

    /// Hand-built 2x2 instance for tests needing private message access.
    fn instance_2x2() -> (TopoSequence, EnergyParams) {
        let intensity: Vec<f32> = vec![
            0.9, -0.3, 0.2, 1.4, -1.1, // (0,0)
            0.4, 1.2, -0.8, 0.1, 0.7, // (0,1)
            -0.5, 0.3, 1.0, -0.2, 0.6, // (1,0)
            1.3, -0.9, 0.5, 0.8, -0.4, // (1,1)
        ];
        let seq = TopoSequence::new(2, 2, 5, intensity, vec![0; 4], vec![None, None]).unwrap();
        let tmpl = TemplateModel::new(vec![0.0], vec![1.0]).unwrap();
        let params = EnergyParams::new(tmpl, 1, 5, 1.1, vec![0.8, 1.5]).unwrap();
        (seq, params)
    }

    #[test]
    fn decode_recurrence_matches_independent_recomputation() {
        // Recompute the decode rule pixel by pixel from raw messages and
        // check the solver's surface agrees.
        let (seq, params) = instance_2x2();
        let unary = build_unary(&seq, &params, &ExtraEvidence::default()).unwrap();
        let mut solver = TrwSolver::new(&unary, &params, MessageKernel::Fast).unwrap();
        for _ in 0..4 {
            solver.iterate();
        }
        let surface = solver.decode().unwrap();

        let score = |i: usize, j: usize, x: usize, fixed: &[usize]| -> f64 {
            let n = i * 2 + j;
            let base = n * 5;
            let mut c = unary.get(i, j, x);
            if j + 1 < 2 {
                c += solver.msg[FROM_RIGHT][base + x];
            }
            if i + 1 < 2 {
                c += solver.msg[FROM_DOWN][base + x];
            }
            if j > 0 {
                c += pairwise_cost(x, fixed[n - 1], params.beta_at(j - 1), params.sigma_hat, params.alpha);
            }
            if i > 0 {
                c += pairwise_cost(x, fixed[n - 2], params.beta_at(j), params.sigma_hat, params.alpha);
            }
            c
        };
        let mut fixed = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let mut best = f64::INFINITY;
                let mut best_s = usize::MAX;
                let (lo, hi) = solver.window(i, j);
                for x in lo..=hi {
                    let c = score(i, j, x, &fixed);
                    if c < best {
                        best = c;
                        best_s = x;
                    }
                }
                fixed.push(best_s);
            }
        }
        assert_eq!(surface.labels(), &fixed[..]);
    }

    #[test]
    fn infeasible_window_is_detected_up_front() {
        // Column 1 must sit at rows >= 8 (air), column 0 is pinned to rows
        // 1..=3; alpha = 2 cannot bridge them.
        let seq = TopoSequence::new(1, 2, 12, vec![0.0; 24], vec![0, 7], vec![None]).unwrap();
        let tmpl = TemplateModel::new(vec![0.0], vec![1.0]).unwrap();
        let params = EnergyParams::uniform(tmpl, 0, 2, 1.0, 2).unwrap();
        let extra = ExtraEvidence {
            ranges: vec![crate::types::RangeConstraint { slice: 0, column: 0, lo: 1, hi: 3 }],
            pins: vec![],
        };
        let err = infer(&seq, &params, &extra, &TrwConfig::default()).unwrap_err();
        assert!(matches!(err, ModelError::Infeasible { .. }));
    }

    #[test]
    fn arc_consistency_narrows_windows_pairwise() {
        let (seq, params) = instance_2x2();
        let mut params = params;
        params.alpha = 2;
        let extra = ExtraEvidence {
            pins: vec![crate::types::Pin { slice: 0, column: 0, label: 4 }],
            ranges: vec![],
        };
        let unary = build_unary(&seq, &params, &extra).unwrap();
        let solver = TrwSolver::new(&unary, &params, MessageKernel::Fast).unwrap();
        assert_eq!(solver.window(0, 0), (4, 4));
        // Neighbors of the pinned pixel can sit at most alpha - 1 away.
        assert_eq!(solver.window(0, 1), (3, 4));
        assert_eq!(solver.window(1, 0), (3, 4));
        assert_eq!(solver.window(1, 1), (2, 4));
    }
}
