//! Semantic channel capacity and semantic rate-distortion.
//!
//! The semantic capacity maximizes the up semantic mutual information over
//! input distributions, `Cs = max_p Is_up(X~;Y~)`, and is never below the
//! classical capacity. The semantic rate-distortion function minimizes the
//! raw down semantic mutual information over test channels subject to an
//! expected semantic distortion bound,
//! `Rs(D) = min { Is_down(X~;X^~) : E[ds] <= D }`, and is never above the
//! classical `R(D)` for the lifted distortion. Clamping at zero applies only
//! to reported rates, never inside the search.
//!
//! Neither objective is concave/convex in general, so both solvers run
//! multi-start projected gradient with finite-difference gradients and a
//! backtracking line search. Starting points are the uniform point, the
//! simplex corners (capacity) or deterministic minimum-distortion rows
//! (rate-distortion), the Blahut-Arimoto baseline optimum, and seeded
//! Dirichlet draws. At small sizes an exhaustive simplex grid doubles as a
//! global-optimality oracle: its best point is polished and merged into the
//! answer, and the pre-merge gap is reported as evidence.
//!
//! The distortion constraint is enforced by an escalating quadratic penalty;
//! any residual infeasibility is repaired by blending toward a deterministic
//! feasible channel (distortion is linear in the channel, so the blend hits
//! the bound exactly).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::baselines::{
    ba_capacity, ba_rate_distortion, expected_distortion, RdResult, SolverConfig, SolverError,
};
use crate::measures::{down_semantic_mi, up_semantic_mi, xlog2};
use crate::model::{
    Channel, Distribution, JointModel, ModelError, SemanticVariable, SynonymousPartition,
};
use crate::optim::{for_each_simplex_grid_point, lex_less, project_to_simplex, random_simplex_point};

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("distortion entry ({row},{col}) is {value}; must be finite and nonnegative")]
    InvalidDistortion { row: usize, col: usize, value: f64 },
    #[error("distortion matrix is {rows}x{cols}, expected {want_rows}x{want_cols} (source cells x reconstruction cells)")]
    DistortionShape {
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Search controls for the multi-start projected-gradient solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Passed to the embedded Blahut-Arimoto baseline runs; its tolerance
    /// also stops a gradient start once improvements fall below it.
    pub solver: SolverConfig,
    /// Number of starting points (uniform, corners/deterministic, baseline,
    /// Dirichlet fills).
    pub starts: usize,
    /// Gradient steps allowed per start.
    pub max_steps_per_start: usize,
    /// Seed for the Dirichlet starting points.
    pub seed: u64,
    /// Central finite-difference step.
    pub fd_step: f64,
    /// Grid resolution of the capacity oracle (input alphabets of size <= 4).
    pub capacity_grid_step: f64,
    /// Per-row grid resolution of the rate-distortion oracle
    /// (`n_x * n_xhat <= 6`).
    pub rd_grid_step: f64,
    /// Quadratic-penalty escalation for the distortion constraint.
    pub penalty_rounds: usize,
    pub penalty_init: f64,
    pub penalty_growth: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            solver: SolverConfig::default(),
            starts: 32,
            max_steps_per_start: 300,
            seed: 42,
            fd_step: 1e-6,
            capacity_grid_step: 0.01,
            rd_grid_step: 0.05,
            penalty_rounds: 6,
            penalty_init: 10.0,
            penalty_growth: 10.0,
        }
    }
}

/// Result of comparing the gradient search against the exhaustive grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCheck {
    /// Best objective value found on the grid (after polishing).
    pub value: f64,
    /// Gradient-search value minus grid value before merging; a large
    /// negative capacity gap (or positive rate gap) means the search missed
    /// the global optimum and the grid rescued it.
    pub gap: f64,
}

// ---------------------------------------------------------------------------
// Semantic channel capacity
// ---------------------------------------------------------------------------

/// A channel whose input and output alphabets carry synonymous partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticChannelProblem {
    channel: Channel,
    input_partition: SynonymousPartition,
    output_partition: SynonymousPartition,
}

impl SemanticChannelProblem {
    pub fn new(
        channel: Channel,
        input_partition: SynonymousPartition,
        output_partition: SynonymousPartition,
    ) -> Result<Self, ProblemError> {
        if input_partition.alphabet() != channel.input_alphabet() {
            return Err(ModelError::AlphabetMismatch(
                "input partition must cover the channel input alphabet".into(),
            )
            .into());
        }
        if output_partition.alphabet() != channel.output_alphabet() {
            return Err(ModelError::AlphabetMismatch(
                "output partition must cover the channel output alphabet".into(),
            )
            .into());
        }
        Ok(SemanticChannelProblem {
            channel,
            input_partition,
            output_partition,
        })
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn input_partition(&self) -> &SynonymousPartition {
        &self.input_partition
    }

    pub fn output_partition(&self) -> &SynonymousPartition {
        &self.output_partition
    }

    /// The joint model induced by an input distribution.
    pub fn joint_for_input(&self, p_x: &Distribution) -> Result<JointModel, ModelError> {
        let input = SemanticVariable::new(p_x.clone(), self.input_partition.clone())?;
        JointModel::from_input_and_channel(&input, &self.channel, self.output_partition.clone())
    }
}

/// Up semantic mutual information of an input distribution through the
/// problem's channel, in sebits.
pub fn up_mi_for_input(p_x: &Distribution, prob: &SemanticChannelProblem) -> Result<f64, ModelError> {
    Ok(up_semantic_mi(&prob.joint_for_input(p_x)?))
}

/// Allocation-free evaluator for the capacity objective.
struct UpMiEvaluator<'a> {
    w: &'a [Vec<f64>],
    n: usize,
    m: usize,
    /// Product-partition cell of each `(x, y)` pair, row-major.
    pair_cell: Vec<usize>,
    q_y: Vec<f64>,
    cell_mass: Vec<f64>,
}

impl<'a> UpMiEvaluator<'a> {
    fn new(prob: &'a SemanticChannelProblem) -> Self {
        let n = prob.channel.input_alphabet().size();
        let m = prob.channel.output_alphabet().size();
        let col_cells = prob.output_partition.cell_count();
        let mut pair_cell = vec![0usize; n * m];
        for x in 0..n {
            for y in 0..m {
                pair_cell[x * m + y] =
                    prob.input_partition.cell_of(x) * col_cells + prob.output_partition.cell_of(y);
            }
        }
        UpMiEvaluator {
            w: prob.channel.rows(),
            n,
            m,
            pair_cell,
            q_y: vec![0.0; m],
            cell_mass: vec![0.0; prob.input_partition.cell_count() * col_cells],
        }
    }

    /// `H(X) + H(Y) - Hs(X~,Y~)` at input `p` (extended smoothly off the
    /// simplex: nonpositive masses contribute nothing).
    fn eval(&mut self, p: &[f64]) -> f64 {
        let mut h_x = 0.0;
        self.q_y.iter_mut().for_each(|v| *v = 0.0);
        self.cell_mass.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..self.n {
            let px = p[x];
            if px <= 0.0 {
                continue;
            }
            h_x -= xlog2(px);
            let row = &self.w[x];
            let base = x * self.m;
            for y in 0..self.m {
                let mass = px * row[y];
                self.q_y[y] += mass;
                self.cell_mass[self.pair_cell[base + y]] += mass;
            }
        }
        let h_y = -self.q_y.iter().copied().map(xlog2).sum::<f64>();
        let hs_pair = -self.cell_mass.iter().copied().map(xlog2).sum::<f64>();
        h_x + h_y - hs_pair
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticCapacityResult {
    /// `Cs` in sebits: the objective at `input_dist`.
    pub capacity: f64,
    pub input_dist: Vec<f64>,
    /// Present when the input alphabet was small enough for the grid oracle.
    pub oracle: Option<OracleCheck>,
    pub converged: bool,
}

/// Maximizes the up semantic mutual information over input distributions.
pub fn semantic_capacity(prob: &SemanticChannelProblem, cfg: &SearchConfig) -> SemanticCapacityResult {
    let n = prob.channel.input_alphabet().size();
    let mut eval = UpMiEvaluator::new(prob);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.starts);
    starts.push(vec![1.0 / n as f64; n]);
    for i in 0..n.min(cfg.starts.saturating_sub(1)) {
        let mut corner = vec![0.0; n];
        corner[i] = 1.0;
        starts.push(corner);
    }
    starts.push(ba_capacity(&prob.channel, &cfg.solver).input_dist);
    while starts.len() < cfg.starts {
        let mut p = vec![0.0; n];
        random_simplex_point(&mut rng, &mut p);
        starts.push(p);
    }

    let mut best_value = f64::NEG_INFINITY;
    let mut best_p = vec![1.0 / n as f64; n];
    let mut best_converged = false;
    for start in &starts {
        let (value, p, converged) = ascend(&mut eval, start.clone(), cfg);
        if value > best_value + 1e-12
            || ((value - best_value).abs() <= 1e-12 && lex_less(&p, &best_p))
        {
            best_value = value;
            best_p = p;
            best_converged = converged;
        }
    }

    let mut oracle = None;
    if n <= 4 {
        let steps = (1.0 / cfg.capacity_grid_step).round().max(1.0) as usize;
        let mut grid_best = f64::NEG_INFINITY;
        let mut grid_p = vec![0.0; n];
        for_each_simplex_grid_point(n, steps, |p| {
            let value = eval.eval(p);
            if value > grid_best + 1e-12
                || ((value - grid_best).abs() <= 1e-12 && lex_less(p, &grid_p))
            {
                grid_best = value;
                grid_p.copy_from_slice(p);
            }
        });
        // Polish the grid winner; it may sit in a basin every start missed.
        let (polished, polished_p, polished_conv) = ascend(&mut eval, grid_p, cfg);
        oracle = Some(OracleCheck {
            value: polished,
            gap: best_value - polished,
        });
        if polished > best_value + 1e-12
            || ((polished - best_value).abs() <= 1e-12 && lex_less(&polished_p, &best_p))
        {
            best_p = polished_p;
            best_converged = polished_conv;
        }
    }

    // Report the objective recomputed at the returned point.
    let capacity = eval.eval(&best_p);
    SemanticCapacityResult {
        capacity,
        input_dist: best_p,
        oracle,
        converged: best_converged,
    }
}

/// Projected gradient ascent with central finite differences and a halving
/// line search. Returns `(value, point, converged)`.
fn ascend(
    eval: &mut UpMiEvaluator<'_>,
    mut p: Vec<f64>,
    cfg: &SearchConfig,
) -> (f64, Vec<f64>, bool) {
    let n = p.len();
    project_to_simplex(&mut p);
    let mut f = eval.eval(&p);
    let mut grad = vec![0.0; n];
    let mut candidate = vec![0.0; n];
    let mut stalls = 0usize;
    let mut converged = false;
    for _ in 0..cfg.max_steps_per_start {
        for i in 0..n {
            let orig = p[i];
            p[i] = orig + cfg.fd_step;
            let up = eval.eval(&p);
            p[i] = orig - cfg.fd_step;
            let down = eval.eval(&p);
            p[i] = orig;
            grad[i] = (up - down) / (2.0 * cfg.fd_step);
        }
        let scale = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
        if scale == 0.0 {
            converged = true;
            break;
        }
        let mut improved = false;
        let mut step = 1.0 / scale;
        for _ in 0..50 {
            for i in 0..n {
                candidate[i] = p[i] + step * grad[i];
            }
            project_to_simplex(&mut candidate);
            let fc = eval.eval(&candidate);
            if fc > f {
                let gain = fc - f;
                p.copy_from_slice(&candidate);
                f = fc;
                improved = true;
                if gain < cfg.solver.tolerance {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                break;
            }
            step *= 0.5;
        }
        if !improved || stalls >= 3 {
            converged = true;
            break;
        }
    }
    (f, p, converged)
}

// ---------------------------------------------------------------------------
// Semantic rate-distortion
// ---------------------------------------------------------------------------

/// A distortion table over `(source cell, reconstruction cell)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionSpec {
    values: Vec<Vec<f64>>,
}

impl DistortionSpec {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self, ProblemError> {
        if values.is_empty() || values[0].is_empty() {
            return Err(ProblemError::DistortionShape {
                rows: values.len(),
                cols: 0,
                want_rows: 1,
                want_cols: 1,
            });
        }
        let cols = values[0].len();
        for (row, r) in values.iter().enumerate() {
            if r.len() != cols {
                return Err(ProblemError::DistortionShape {
                    rows: values.len(),
                    cols: r.len(),
                    want_rows: values.len(),
                    want_cols: cols,
                });
            }
            for (col, &value) in r.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(ProblemError::InvalidDistortion { row, col, value });
                }
            }
        }
        Ok(DistortionSpec { values })
    }

    /// Zero on the diagonal, one off it.
    pub fn semantic_hamming(cells: usize) -> Self {
        DistortionSpec {
            values: (0..cells)
                .map(|i| (0..cells).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
                .collect(),
        }
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// A semantic source, a partitioned reconstruction alphabet, and a semantic
/// distortion between their cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticRdProblem {
    source: SemanticVariable,
    recon_partition: SynonymousPartition,
    distortion: DistortionSpec,
}

impl SemanticRdProblem {
    pub fn new(
        source: SemanticVariable,
        recon_partition: SynonymousPartition,
        distortion: DistortionSpec,
    ) -> Result<Self, ProblemError> {
        let want_rows = source.partition().cell_count();
        let want_cols = recon_partition.cell_count();
        let rows = distortion.values().len();
        let cols = distortion.values()[0].len();
        if rows != want_rows || cols != want_cols {
            return Err(ProblemError::DistortionShape {
                rows,
                cols,
                want_rows,
                want_cols,
            });
        }
        Ok(SemanticRdProblem {
            source,
            recon_partition,
            distortion,
        })
    }

    pub fn source(&self) -> &SemanticVariable {
        &self.source
    }

    pub fn recon_partition(&self) -> &SynonymousPartition {
        &self.recon_partition
    }

    pub fn distortion(&self) -> &DistortionSpec {
        &self.distortion
    }

    /// The distortion lifted to syntactic symbol pairs:
    /// `d(x, x^) = ds(cell(x), cell(x^))`.
    pub fn lifted_distortion(&self) -> Vec<Vec<f64>> {
        let n = self.source.alphabet().size();
        let m = self.recon_partition.alphabet().size();
        (0..n)
            .map(|x| {
                let cx = self.source.partition().cell_of(x);
                (0..m)
                    .map(|y| self.distortion.values()[cx][self.recon_partition.cell_of(y)])
                    .collect()
            })
            .collect()
    }
}

/// Raw and clamped down semantic mutual information of a test channel,
/// together with its expected semantic distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownMiPoint {
    pub raw: f64,
    pub clamped: f64,
    pub distortion: f64,
}

/// Evaluates a concrete test channel `t(x^|x)` against the problem.
pub fn down_mi_for_test_channel(
    t: &[Vec<f64>],
    prob: &SemanticRdProblem,
) -> Result<DownMiPoint, ModelError> {
    let p = prob.source.dist().probs();
    let channel = Channel::new(
        prob.source.alphabet().clone(),
        prob.recon_partition.alphabet().clone(),
        t.to_vec(),
    )?;
    let joint = JointModel::from_input_and_channel(
        &prob.source,
        &channel,
        prob.recon_partition.clone(),
    )?;
    let down = down_semantic_mi(&joint);
    let lifted = prob.lifted_distortion();
    Ok(DownMiPoint {
        raw: down.raw,
        clamped: down.clamped,
        distortion: expected_distortion(p, channel.rows(), &lifted),
    })
}

/// Allocation-free evaluator for the rate-distortion objective.
struct DownMiEvaluator<'a> {
    p: &'a [f64],
    hs_src: f64,
    rec_cell: Vec<usize>,
    lifted: Vec<Vec<f64>>,
    n: usize,
    m: usize,
    rec_mass: Vec<f64>,
}

impl<'a> DownMiEvaluator<'a> {
    fn new(prob: &'a SemanticRdProblem) -> Self {
        let n = prob.source.alphabet().size();
        let m = prob.recon_partition.alphabet().size();
        DownMiEvaluator {
            p: prob.source.dist().probs(),
            hs_src: crate::measures::semantic_entropy(&prob.source),
            rec_cell: (0..m).map(|y| prob.recon_partition.cell_of(y)).collect(),
            lifted: prob.lifted_distortion(),
            n,
            m,
            rec_mass: vec![0.0; prob.recon_partition.cell_count()],
        }
    }

    /// Returns `(raw down-MI, expected distortion)` for a row-major flat
    /// channel `t` (extended smoothly off the simplex).
    fn eval(&mut self, t: &[f64]) -> (f64, f64) {
        self.rec_mass.iter_mut().for_each(|v| *v = 0.0);
        let mut h_joint = 0.0;
        let mut dist = 0.0;
        for x in 0..self.n {
            let px = self.p[x];
            if px <= 0.0 {
                continue;
            }
            let row = &t[x * self.m..(x + 1) * self.m];
            for y in 0..self.m {
                let txy = row[y];
                if txy <= 0.0 {
                    continue;
                }
                let mass = px * txy;
                h_joint -= xlog2(mass);
                self.rec_mass[self.rec_cell[y]] += mass;
                dist += mass * self.lifted[x][y];
            }
        }
        let hs_rec = -self.rec_mass.iter().copied().map(xlog2).sum::<f64>();
        (self.hs_src + hs_rec - h_joint, dist)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticRdResult {
    /// `Rs(D)` in sebits: `max(raw_rate, 0)`.
    pub rate: f64,
    /// The unclamped minimized objective; may be negative.
    pub raw_rate: f64,
    /// Expected semantic distortion of `test_channel` (`<= D`).
    pub distortion: f64,
    pub test_channel: Vec<Vec<f64>>,
    /// Classical Blahut-Arimoto solution of the lifted problem.
    pub baseline: RdResult,
    /// Present when `n_x * n_xhat <= 6`.
    pub oracle: Option<OracleCheck>,
    pub converged: bool,
}

/// Minimizes the raw down semantic mutual information subject to
/// `E[ds] <= target`.
pub fn semantic_rd(
    prob: &SemanticRdProblem,
    target: f64,
    cfg: &SearchConfig,
) -> Result<SemanticRdResult, SolverError> {
    let p = prob.source.dist().probs();
    let n = prob.source.alphabet().size();
    let m = prob.recon_partition.alphabet().size();
    let lifted = prob.lifted_distortion();

    // Feasibility: the deterministic row-minimizer channel attains d_min.
    let mut det = vec![0.0; n * m];
    let mut d_min = 0.0;
    for x in 0..n {
        let arg = (0..m)
            .min_by(|&a, &b| lifted[x][a].partial_cmp(&lifted[x][b]).expect("finite"))
            .expect("nonempty row");
        det[x * m + arg] = 1.0;
        d_min += p[x] * lifted[x][arg];
    }
    if target < d_min - 1e-12 {
        return Err(SolverError::InfeasibleDistortion { target, d_min });
    }

    let baseline = ba_rate_distortion(prob.source.dist(), &lifted, target, &cfg.solver)?;
    let mut eval = DownMiEvaluator::new(prob);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.starts);
    starts.push(baseline.test_channel.iter().flatten().copied().collect());
    starts.push(det.clone());
    starts.push(vec![1.0 / m as f64; n * m]);
    if n == m {
        let mut identity = vec![0.0; n * m];
        for x in 0..n {
            identity[x * m + x] = 1.0;
        }
        starts.push(identity);
    }
    while starts.len() < cfg.starts {
        let mut t = vec![0.0; n * m];
        for x in 0..n {
            random_simplex_point(&mut rng, &mut t[x * m..(x + 1) * m]);
        }
        starts.push(t);
    }

    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let consider = |raw: f64, t: Vec<f64>, conv: bool, best: &mut Option<(f64, Vec<f64>, bool)>| {
        let better = match best {
            None => true,
            Some((b_raw, b_t, _)) => {
                raw < *b_raw - 1e-12 || ((raw - *b_raw).abs() <= 1e-12 && lex_less(&t, b_t))
            }
        };
        if better {
            *best = Some((raw, t, conv));
        }
    };
    for start in &starts {
        let (raw, t, conv) = descend_rd(&mut eval, start.clone(), &det, target, cfg);
        consider(raw, t, conv, &mut best);
    }
    // The baseline and deterministic channels are feasible; polishing them
    // directly (without the penalty phase) can only improve, which pins the
    // semantic rate at or below the classical rate of the lifted problem.
    for cand in [starts[0].clone(), det.clone()] {
        let (raw, t) = polish_feasible(&mut eval, cand, target, cfg);
        consider(raw, t, true, &mut best);
    }
    let (mut best_raw, mut best_t, mut best_conv) = best.expect("at least one start");

    let mut oracle = None;
    if n * m <= 6 {
        let steps = (1.0 / cfg.rd_grid_step).round().max(1.0) as usize;
        let mut grid_rows: Vec<Vec<f64>> = Vec::new();
        for_each_simplex_grid_point(m, steps, |row| grid_rows.push(row.to_vec()));
        let mut grid_best = f64::INFINITY;
        let mut grid_t: Vec<f64> = det.clone();
        let mut pick = vec![0usize; n];
        let mut flat = vec![0.0; n * m];
        loop {
            for x in 0..n {
                flat[x * m..(x + 1) * m].copy_from_slice(&grid_rows[pick[x]]);
            }
            let (raw, dist) = eval.eval(&flat);
            if dist <= target + 1e-12
                && (raw < grid_best - 1e-12
                    || ((raw - grid_best).abs() <= 1e-12 && lex_less(&flat, &grid_t)))
            {
                grid_best = raw;
                grid_t.copy_from_slice(&flat);
            }
            // Odometer over row choices.
            let mut x = 0;
            loop {
                if x == n {
                    break;
                }
                pick[x] += 1;
                if pick[x] < grid_rows.len() {
                    break;
                }
                pick[x] = 0;
                x += 1;
            }
            if x == n {
                break;
            }
        }
        let (polished, polished_t, polished_conv) =
            descend_rd(&mut eval, grid_t, &det, target, cfg);
        oracle = Some(OracleCheck {
            value: polished,
            gap: best_raw - polished,
        });
        if polished < best_raw - 1e-12
            || ((polished - best_raw).abs() <= 1e-12 && lex_less(&polished_t, &best_t))
        {
            best_raw = polished;
            best_t = polished_t;
            best_conv = polished_conv;
        }
    }

    let (raw, dist) = eval.eval(&best_t);
    debug_assert!((raw - best_raw).abs() < 1e-9);
    let test_channel: Vec<Vec<f64>> = best_t.chunks(m).map(|r| r.to_vec()).collect();
    Ok(SemanticRdResult {
        rate: raw.max(0.0),
        raw_rate: raw,
        distortion: dist,
        test_channel,
        baseline,
        oracle,
        converged: best_conv,
    })
}

/// Penalized projected gradient descent for the rate-distortion objective,
/// followed by a feasibility repair blend. Returns `(raw, channel,
/// converged)` with the channel feasible.
fn descend_rd(
    eval: &mut DownMiEvaluator<'_>,
    mut t: Vec<f64>,
    det_feasible: &[f64],
    target: f64,
    cfg: &SearchConfig,
) -> (f64, Vec<f64>, bool) {
    let n = eval.n;
    let m = eval.m;
    for x in 0..n {
        project_to_simplex(&mut t[x * m..(x + 1) * m]);
    }
    let mut grad = vec![0.0; n * m];
    let mut candidate = vec![0.0; n * m];
    let mut converged = false;
    let steps_per_round = (cfg.max_steps_per_start / cfg.penalty_rounds).max(10);
    let mut mu = cfg.penalty_init;
    for round in 0..cfg.penalty_rounds {
        let penalized = |eval: &mut DownMiEvaluator<'_>, t: &[f64]| -> f64 {
            let (raw, dist) = eval.eval(t);
            raw + mu * (dist - target).max(0.0).powi(2)
        };
        let mut f = penalized(eval, &t);
        let mut stalls = 0usize;
        for _ in 0..steps_per_round {
            for i in 0..n * m {
                let orig = t[i];
                t[i] = orig + cfg.fd_step;
                let up = penalized(eval, &t);
                t[i] = orig - cfg.fd_step;
                let down = penalized(eval, &t);
                t[i] = orig;
                grad[i] = (up - down) / (2.0 * cfg.fd_step);
            }
            let scale = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
            if scale == 0.0 {
                converged = true;
                break;
            }
            let mut improved = false;
            let mut step = 1.0 / scale;
            for _ in 0..50 {
                for i in 0..n * m {
                    candidate[i] = t[i] - step * grad[i];
                }
                for x in 0..n {
                    project_to_simplex(&mut candidate[x * m..(x + 1) * m]);
                }
                let fc = penalized(eval, &candidate);
                if fc < f {
                    let gain = f - fc;
                    t.copy_from_slice(&candidate);
                    f = fc;
                    improved = true;
                    if gain < cfg.solver.tolerance {
                        stalls += 1;
                    } else {
                        stalls = 0;
                    }
                    break;
                }
                step *= 0.5;
            }
            if !improved || stalls >= 3 {
                converged = round + 1 == cfg.penalty_rounds || converged;
                break;
            }
        }
        mu *= cfg.penalty_growth;
    }

    repair_feasibility(eval, &mut t, det_feasible, target);
    let (raw, t) = polish_feasible(eval, t, target, cfg);
    (raw, t, converged)
}

/// Forces `t` into the feasible set. Away from the distortion floor a blend
/// toward the deterministic channel suffices (distortion is linear in the
/// channel, so the blend coefficient is exact). At the floor the blend
/// degenerates (any residual would collapse the whole channel), so instead
/// each row is restricted to its minimum-distortion entries.
fn repair_feasibility(
    eval: &mut DownMiEvaluator<'_>,
    t: &mut [f64],
    det_feasible: &[f64],
    target: f64,
) {
    let (_, dist) = eval.eval(t);
    if dist <= target + 1e-12 {
        return;
    }
    let (_, d_det) = eval.eval(det_feasible);
    let n = eval.n;
    let m = eval.m;
    if target <= d_det + 1e-9 {
        for x in 0..n {
            let row = &mut t[x * m..(x + 1) * m];
            let row_min = eval.lifted[x].iter().copied().fold(f64::INFINITY, f64::min);
            let mut kept = 0.0;
            for y in 0..m {
                if eval.lifted[x][y] > row_min + 1e-12 {
                    row[y] = 0.0;
                } else {
                    kept += row[y];
                }
            }
            if kept > 1e-12 {
                row.iter_mut().for_each(|v| *v /= kept);
            } else {
                row.copy_from_slice(&det_feasible[x * m..(x + 1) * m]);
            }
        }
    } else {
        let lambda = ((dist - target) / (dist - d_det)).clamp(0.0, 1.0);
        for i in 0..t.len() {
            t[i] = (1.0 - lambda) * t[i] + lambda * det_feasible[i];
        }
    }
}

/// Feasibility-preserving gradient polish of the raw objective. Moves are
/// restricted to the current support plus entries whose lifted distortion
/// already fits under the target, and a candidate is accepted only when it
/// both improves the objective and stays feasible, so the result is never
/// worse than the starting point.
fn polish_feasible(
    eval: &mut DownMiEvaluator<'_>,
    mut t: Vec<f64>,
    target: f64,
    cfg: &SearchConfig,
) -> (f64, Vec<f64>) {
    let n = eval.n;
    let m = eval.m;
    for x in 0..n {
        project_to_simplex(&mut t[x * m..(x + 1) * m]);
    }
    let mut mask = vec![false; n * m];
    for x in 0..n {
        for y in 0..m {
            mask[x * m + y] = t[x * m + y] > 1e-15 || eval.lifted[x][y] <= target + 1e-12;
        }
    }
    let mut grad = vec![0.0; n * m];
    let mut candidate = vec![0.0; n * m];
    let (mut raw, _) = eval.eval(&t);
    let mut stalls = 0usize;
    for _ in 0..cfg.max_steps_per_start {
        for i in 0..n * m {
            if !mask[i] {
                grad[i] = 0.0;
                continue;
            }
            let orig = t[i];
            t[i] = orig + cfg.fd_step;
            let (up, _) = eval.eval(&t);
            t[i] = orig - cfg.fd_step;
            let (down, _) = eval.eval(&t);
            t[i] = orig;
            grad[i] = (up - down) / (2.0 * cfg.fd_step);
        }
        let scale = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
        if scale == 0.0 {
            break;
        }
        let mut improved = false;
        let mut step = 1.0 / scale;
        'search: for _ in 0..50 {
            for i in 0..n * m {
                candidate[i] = t[i] - step * grad[i];
            }
            for x in 0..n {
                let row = &mut candidate[x * m..(x + 1) * m];
                project_to_simplex(row);
                // The projection may leak mass onto masked-out entries;
                // confine the row to the mask and renormalize.
                let mut kept = 0.0;
                for y in 0..m {
                    if !mask[x * m + y] {
                        row[y] = 0.0;
                    } else {
                        kept += row[y];
                    }
                }
                if kept <= 1e-12 {
                    step *= 0.5;
                    continue 'search;
                }
                row.iter_mut().for_each(|v| *v /= kept);
            }
            let (fc, dc) = eval.eval(&candidate);
            if dc <= target + 1e-12 && fc < raw {
                let gain = raw - fc;
                t.copy_from_slice(&candidate);
                raw = fc;
                improved = true;
                if gain < cfg.solver.tolerance {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                break;
            }
            step *= 0.5;
        }
        if !improved || stalls >= 3 {
            break;
        }
    }
    (raw, t)
}

/// One point of a rate-distortion sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    pub d: f64,
    /// Clamped rate after monotonicity repair.
    pub rate: f64,
    pub raw_rate: f64,
    /// True when the isotonic repair lowered this point.
    pub repaired: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdCurve {
    pub points: Vec<RdPoint>,
    /// True when any point needed repair (solver noise made the raw sweep
    /// non-monotone).
    pub repaired_any: bool,
}

/// Sweeps `semantic_rd` over a distortion grid (sorted ascending) and
/// repairs any violation of monotonicity: a rate achievable at a smaller D
/// is achievable at every larger D, so the running minimum is sound.
pub fn rd_curve(
    prob: &SemanticRdProblem,
    d_grid: &[f64],
    cfg: &SearchConfig,
) -> Result<RdCurve, SolverError> {
    let mut grid = d_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite distortion targets"));
    let mut points = Vec::with_capacity(grid.len());
    let mut repaired_any = false;
    let mut running_min = f64::INFINITY;
    for &d in &grid {
        let res = semantic_rd(prob, d, cfg)?;
        let mut rate = res.rate;
        let mut repaired = false;
        if rate > running_min + 1e-12 {
            rate = running_min;
            repaired = true;
            repaired_any = true;
        }
        running_min = running_min.min(rate);
        points.push(RdPoint {
            d,
            rate,
            raw_rate: res.raw_rate,
            repaired,
        });
    }
    Ok(RdCurve {
        points,
        repaired_any,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::binary_entropy;
    use crate::model::Alphabet;
    use crate::testkit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn singleton_problem(ch: Channel) -> SemanticChannelProblem {
        let ip = SynonymousPartition::singletons(ch.input_alphabet().clone());
        let op = SynonymousPartition::singletons(ch.output_alphabet().clone());
        SemanticChannelProblem::new(ch, ip, op).unwrap()
    }

    #[test]
    fn singleton_capacity_matches_blahut_arimoto() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cfg = SearchConfig::default();
        for trial in 0..10 {
            let n = 2 + trial % 3;
            let m = 2 + (trial + 1) % 3;
            let ch = testkit::rand_channel(&mut rng, n, m);
            let ba = ba_capacity(&ch, &cfg.solver);
            let prob = singleton_problem(ch);
            let res = semantic_capacity(&prob, &cfg);
            assert!(
                (res.capacity - ba.capacity).abs() <= 1e-4,
                "trial {trial}: Cs {} vs C {}",
                res.capacity,
                ba.capacity
            );
            assert!(res.capacity >= ba.capacity - 1e-6);
        }
    }

    #[test]
    fn bsc_capacity_through_semantic_solver() {
        let prob = singleton_problem(Channel::binary_symmetric(0.1));
        let res = semantic_capacity(&prob, &SearchConfig::default());
        let want = 1.0 - binary_entropy(0.1);
        assert!((res.capacity - want).abs() < 1e-5, "got {}", res.capacity);
    }

    #[test]
    fn merged_output_cells_reduce_capacity_to_max_output_entropy() {
        let ch = Channel::binary_symmetric(0.1);
        let ip = SynonymousPartition::singletons(ch.input_alphabet().clone());
        let op = SynonymousPartition::single_cell(ch.output_alphabet().clone());
        // Single output cell: Hs(X~,Y~) collapses to H(X), so the objective
        // is exactly H(Y), maximized at 1 bit by the uniform input.
        let prob = SemanticChannelProblem::new(ch, ip, op).unwrap();
        let res = semantic_capacity(&prob, &SearchConfig::default());
        assert!((res.capacity - 1.0).abs() < 1e-6, "got {}", res.capacity);
        assert!((res.input_dist[0] - 0.5).abs() < 1e-4);
        let oracle = res.oracle.expect("binary input is oracle-eligible");
        assert!(oracle.gap.abs() < 2e-3);
    }

    #[test]
    fn noiseless_four_ary_with_paired_partitions() {
        let ch = Channel::new(
            Alphabet::indexed("x", 4),
            Alphabet::indexed("y", 4),
            (0..4)
                .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
        .unwrap();
        let ip = SynonymousPartition::new(ch.input_alphabet().clone(), vec![vec![0, 1], vec![2, 3]])
            .unwrap();
        let op =
            SynonymousPartition::new(ch.output_alphabet().clone(), vec![vec![0, 1], vec![2, 3]])
                .unwrap();
        let prob = SemanticChannelProblem::new(ch, ip, op).unwrap();
        let res = semantic_capacity(&prob, &SearchConfig::default());
        assert!(
            (res.capacity - 3.0).abs() < 5e-3,
            "expected 2H(X) - Hs at uniform = 3, got {}",
            res.capacity
        );
        let ba = ba_capacity(prob.channel(), &SolverConfig::default());
        assert!(res.capacity >= ba.capacity - 1e-6, "Cs must dominate C");
    }

    #[test]
    fn capacity_objective_is_recomputable_at_the_returned_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..5 {
            let ch = testkit::rand_channel(&mut rng, 3, 3);
            let ip = SynonymousPartition::new(
                ch.input_alphabet().clone(),
                testkit::rand_cells(&mut rng, 3),
            )
            .unwrap();
            let op = SynonymousPartition::new(
                ch.output_alphabet().clone(),
                testkit::rand_cells(&mut rng, 3),
            )
            .unwrap();
            let prob = SemanticChannelProblem::new(ch, ip, op).unwrap();
            let res = semantic_capacity(&prob, &SearchConfig::default());
            let p = Distribution::new(
                prob.channel().input_alphabet().clone(),
                res.input_dist.clone(),
            )
            .unwrap();
            let recomputed = up_mi_for_input(&p, &prob).unwrap();
            assert!(
                (res.capacity - recomputed).abs() < 1e-12,
                "stale value: {} vs {}",
                res.capacity,
                recomputed
            );
        }
    }

    #[test]
    fn semantic_capacity_dominates_classical_on_random_partitioned_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let cfg = SearchConfig::default();
        for trial in 0..10 {
            let n = 2 + trial % 3;
            let m = 2 + (trial + 2) % 3;
            let ch = testkit::rand_channel(&mut rng, n, m);
            let ba = ba_capacity(&ch, &cfg.solver);
            let ip =
                SynonymousPartition::new(ch.input_alphabet().clone(), testkit::rand_cells(&mut rng, n))
                    .unwrap();
            let op =
                SynonymousPartition::new(ch.output_alphabet().clone(), testkit::rand_cells(&mut rng, m))
                    .unwrap();
            let prob = SemanticChannelProblem::new(ch, ip, op).unwrap();
            let res = semantic_capacity(&prob, &cfg);
            assert!(
                res.capacity >= ba.capacity - 1e-6,
                "trial {trial}: Cs {} < C {}",
                res.capacity,
                ba.capacity
            );
            if let Some(oracle) = res.oracle {
                assert!(
                    oracle.gap.abs() <= 2e-3,
                    "trial {trial}: search and grid disagree: {oracle:?}"
                );
            }
        }
    }

    fn binary_singleton_rd() -> SemanticRdProblem {
        let alphabet = Alphabet::indexed("x", 2);
        let source = SemanticVariable::new(
            Distribution::uniform(alphabet.clone()),
            SynonymousPartition::singletons(alphabet.clone()),
        )
        .unwrap();
        let recon = SynonymousPartition::singletons(alphabet);
        SemanticRdProblem::new(source, recon, DistortionSpec::semantic_hamming(2)).unwrap()
    }

    #[test]
    fn singleton_rd_matches_closed_form() {
        let prob = binary_singleton_rd();
        let cfg = SearchConfig::default();
        for (target, want) in [
            (0.0, 1.0),
            (0.1, 1.0 - binary_entropy(0.1)),
            (0.25, 1.0 - binary_entropy(0.25)),
        ] {
            let res = semantic_rd(&prob, target, &cfg).unwrap();
            assert!(
                (res.rate - want).abs() < 1e-3,
                "D={target}: got {}, want {want}",
                res.rate
            );
            assert!(res.distortion <= target + 1e-9);
            assert!(res.rate <= res.baseline.rate + 1e-6);
        }
    }

    #[test]
    fn merged_pairs_make_zero_distortion_free() {
        let alphabet = Alphabet::indexed("x", 4);
        let source = SemanticVariable::new(
            Distribution::uniform(alphabet.clone()),
            SynonymousPartition::new(alphabet.clone(), vec![vec![0, 1], vec![2, 3]]).unwrap(),
        )
        .unwrap();
        let recon = SynonymousPartition::new(alphabet, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let prob =
            SemanticRdProblem::new(source, recon, DistortionSpec::semantic_hamming(2)).unwrap();
        let res = semantic_rd(&prob, 0.0, &SearchConfig::default()).unwrap();
        assert!(res.rate.abs() < 1e-3, "Rs(0) should be 0, got {}", res.rate);
        // Spreading each row uniformly inside its own cell drives the raw
        // objective to its floor of -1.
        assert!(
            (res.raw_rate - (-1.0)).abs() < 1e-3,
            "raw floor is -1, got {}",
            res.raw_rate
        );
        assert!(res.distortion <= 1e-12);
    }

    #[test]
    fn down_mi_identity_channel_on_merged_pairs_is_zero() {
        let alphabet = Alphabet::indexed("x", 4);
        let source = SemanticVariable::new(
            Distribution::uniform(alphabet.clone()),
            SynonymousPartition::new(alphabet.clone(), vec![vec![0, 1], vec![2, 3]]).unwrap(),
        )
        .unwrap();
        let recon = SynonymousPartition::new(alphabet, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let prob =
            SemanticRdProblem::new(source, recon, DistortionSpec::semantic_hamming(2)).unwrap();
        let identity: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let point = down_mi_for_test_channel(&identity, &prob).unwrap();
        assert!(point.raw.abs() < 1e-12);
        assert!(point.distortion.abs() < 1e-15);

        let identical_rows: Vec<Vec<f64>> = (0..4).map(|_| vec![0.25; 4]).collect();
        let point = down_mi_for_test_channel(&identical_rows, &prob).unwrap();
        assert!(point.raw <= 1e-12, "constant channels cannot be positive");
        assert_eq!(point.clamped, 0.0);
    }

    #[test]
    fn semantic_rate_never_exceeds_lifted_classical_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let cfg = SearchConfig::default();
        for trial in 0..8 {
            let n = 2 + trial % 3;
            let m = 2 + (trial + 1) % 2;
            let source = testkit::rand_semantic_variable(&mut rng, n);
            let recon =
                SynonymousPartition::new(Alphabet::indexed("r", m), testkit::rand_cells(&mut rng, m))
                    .unwrap();
            let d: Vec<Vec<f64>> = (0..source.partition().cell_count())
                .map(|_| (0..recon.cell_count()).map(|_| rng.random::<f64>()).collect())
                .collect();
            let prob = SemanticRdProblem::new(source, recon, DistortionSpec::new(d).unwrap())
                .unwrap();
            let lifted = prob.lifted_distortion();
            let p = prob.source().dist().probs();
            let d_min: f64 = (0..p.len())
                .map(|x| {
                    p[x] * lifted[x].iter().copied().fold(f64::INFINITY, f64::min)
                })
                .sum();
            let d_max = (0..lifted[0].len())
                .map(|y| (0..p.len()).map(|x| p[x] * lifted[x][y]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let target = d_min + 0.5 * (d_max - d_min);
            let res = semantic_rd(&prob, target, &cfg).unwrap();
            assert!(
                res.rate <= res.baseline.rate + 1e-6,
                "trial {trial}: Rs {} > R {}",
                res.rate,
                res.baseline.rate
            );
            assert!(res.distortion <= target + 1e-9);
            if let Some(oracle) = res.oracle {
                assert!(
                    res.raw_rate <= oracle.value + 2e-3,
                    "trial {trial}: solver {} worse than grid {}",
                    res.raw_rate,
                    oracle.value
                );
            }
        }
    }

    #[test]
    fn infeasible_semantic_target_is_rejected() {
        let alphabet = Alphabet::indexed("x", 2);
        let source = SemanticVariable::new(
            Distribution::uniform(alphabet.clone()),
            SynonymousPartition::singletons(alphabet.clone()),
        )
        .unwrap();
        let recon = SynonymousPartition::singletons(alphabet);
        let d = DistortionSpec::new(vec![vec![0.5, 1.0], vec![1.0, 0.5]]).unwrap();
        let prob = SemanticRdProblem::new(source, recon, d).unwrap();
        let err = semantic_rd(&prob, 0.1, &SearchConfig::default()).unwrap_err();
        assert!(matches!(err, SolverError::InfeasibleDistortion { .. }));
    }

    #[test]
    fn rd_curve_is_nonincreasing() {
        let prob = binary_singleton_rd();
        let curve = rd_curve(&prob, &[0.0, 0.1, 0.25, 0.4, 0.5], &SearchConfig::default())
            .unwrap();
        for pair in curve.points.windows(2) {
            assert!(
                pair[1].rate <= pair[0].rate + 1e-12,
                "curve must be nonincreasing: {curve:?}"
            );
        }
        assert!((curve.points[0].rate - 1.0).abs() < 1e-3);
        assert!(curve.points.last().unwrap().rate.abs() < 1e-9);
    }

    #[test]
    fn distortion_spec_validation() {
        assert!(matches!(
            DistortionSpec::new(vec![vec![0.0, -1.0]]),
            Err(ProblemError::InvalidDistortion { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            DistortionSpec::new(vec![vec![0.0, 1.0], vec![1.0]]),
            Err(ProblemError::DistortionShape { .. })
        ));
        let alphabet = Alphabet::indexed("x", 2);
        let source = SemanticVariable::new(
            Distribution::uniform(alphabet.clone()),
            SynonymousPartition::single_cell(alphabet.clone()),
        )
        .unwrap();
        let recon = SynonymousPartition::singletons(alphabet);
        // Source has 1 cell, recon has 2: a 2x2 table must be rejected.
        let err = SemanticRdProblem::new(
            source,
            recon,
            DistortionSpec::semantic_hamming(2),
        )
        .unwrap_err();
        assert!(matches!(err, ProblemError::DistortionShape { .. }));
    }
}
