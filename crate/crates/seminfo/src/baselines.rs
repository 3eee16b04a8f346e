//! Classical Blahut-Arimoto baselines: channel capacity and rate-distortion.
//!
//! These are the purely syntactic reference solvers the semantic limits in
//! [`crate::semlimits`] are compared against. Both work in nats internally
//! and report bits.
//!
//! [`ba_capacity`] alternates the classical updates
//! `q = pW`, `p'(x) ∝ p(x) exp(D(W_x || q))` and stops when the capacity
//! bracket `max_x D(W_x||q) - log sum_x p(x) exp(D(W_x||q))` falls below the
//! configured tolerance.
//!
//! [`ba_rate_distortion`] solves the slope-parameterized problem
//! `min I(X;X^) + beta * E[d]` with the alternating updates
//! `t(y|x) ∝ q(y) exp(-beta d(x,y))`, `q' = p t`, and bisects over the slope
//! `beta >= 0` to meet the distortion target. When the target falls inside a
//! linear segment of the curve, the two bracketing solutions are blended;
//! the blend meets the target exactly and its rate lies on the lower convex
//! envelope, so returned points are on the curve up to solver tolerance.

use thiserror::Error;

use crate::model::{Channel, Distribution};

/// Iteration controls shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Convergence tolerance in bits.
    pub tolerance: f64,
    /// Hard cap on iterations; hitting it clears `converged`.
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-9,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("target distortion {target} is below the minimum achievable {d_min}")]
    InfeasibleDistortion { target: f64, d_min: f64 },
}

/// Mutual information `I(X;Y)` in bits of input `p` through row-stochastic
/// `w`, with `0 log 0 = 0`.
pub fn mutual_information_bits(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let m = w[0].len();
    let mut q = vec![0.0; m];
    for (x, row) in w.iter().enumerate() {
        for (y, &wxy) in row.iter().enumerate() {
            q[y] += p[x] * wxy;
        }
    }
    let mut mi = 0.0;
    for (x, row) in w.iter().enumerate() {
        if p[x] <= 0.0 {
            continue;
        }
        for (y, &wxy) in row.iter().enumerate() {
            if wxy > 0.0 && q[y] > 0.0 {
                mi += p[x] * wxy * (wxy / q[y]).log2();
            }
        }
    }
    mi.max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// Capacity estimate in bits: the mutual information at `input_dist`.
    pub capacity: f64,
    pub input_dist: Vec<f64>,
    pub iterations: usize,
    /// False when the capacity bracket was still wider than the tolerance at
    /// the iteration cap; the best iterate is returned regardless.
    pub converged: bool,
}

/// Blahut-Arimoto channel capacity.
pub fn ba_capacity(ch: &Channel, cfg: &SolverConfig) -> CapacityResult {
    let n = ch.input_alphabet().size();
    let m = ch.output_alphabet().size();
    let w = ch.rows();
    let ln2 = std::f64::consts::LN_2;
    let mut p = vec![1.0 / n as f64; n];
    let mut q = vec![0.0; m];
    let mut kl = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        iterations += 1;
        q.iter_mut().for_each(|v| *v = 0.0);
        for (x, row) in w.iter().enumerate() {
            if p[x] > 0.0 {
                for (y, &wxy) in row.iter().enumerate() {
                    q[y] += p[x] * wxy;
                }
            }
        }
        for (x, row) in w.iter().enumerate() {
            let mut acc = 0.0;
            for (y, &wxy) in row.iter().enumerate() {
                if wxy > 0.0 {
                    acc += wxy * (wxy / q[y]).ln();
                }
            }
            kl[x] = acc;
        }
        let mut z = 0.0;
        let mut upper = f64::NEG_INFINITY;
        for x in 0..n {
            if p[x] > 0.0 {
                z += p[x] * kl[x].exp();
            }
            upper = upper.max(kl[x]);
        }
        let lower = z.ln();
        for x in 0..n {
            if p[x] > 0.0 {
                p[x] *= kl[x].exp() / z;
            }
        }
        if upper - lower < cfg.tolerance * ln2 {
            converged = true;
            break;
        }
    }

    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    CapacityResult {
        capacity: mutual_information_bits(&p, w),
        input_dist: p,
        iterations,
        converged,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdResult {
    /// Rate `R(D)` in bits: the mutual information of `test_channel`.
    pub rate: f64,
    /// The distortion the returned channel actually achieves (`<= target`
    /// up to rounding).
    pub distortion: f64,
    /// Test channel `t(x^|x)`, rows indexed by source symbols.
    pub test_channel: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

/// Blahut-Arimoto rate-distortion.
///
/// `distortion[x][y]` must be finite and nonnegative, with one row per
/// source symbol. Fails with [`SolverError::InfeasibleDistortion`] when
/// `target` is below `sum_x p(x) min_y d(x,y)`.
pub fn ba_rate_distortion(
    source: &Distribution,
    distortion: &[Vec<f64>],
    target: f64,
    cfg: &SolverConfig,
) -> Result<RdResult, SolverError> {
    let p = source.probs();
    let n = p.len();
    assert_eq!(distortion.len(), n, "one distortion row per source symbol");
    let m = distortion[0].len();
    assert!(
        distortion.iter().all(|row| row.len() == m),
        "distortion matrix must be rectangular"
    );
    assert!(
        distortion.iter().flatten().all(|d| d.is_finite() && *d >= 0.0),
        "distortion entries must be finite and nonnegative"
    );

    let row_min: Vec<f64> = distortion
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let d_min: f64 = p.iter().zip(&row_min).map(|(&px, &d)| px * d).sum();
    if target < d_min - 1e-12 {
        return Err(SolverError::InfeasibleDistortion { target, d_min });
    }

    // Cheapest constant reproduction; at or beyond it the rate is zero.
    let (best_col, d_max) = (0..m)
        .map(|y| (y, (0..n).map(|x| p[x] * distortion[x][y]).sum::<f64>()))
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distortions"))
        .expect("at least one reproduction symbol");
    if target >= d_max - 1e-15 {
        let mut t = vec![vec![0.0; m]; n];
        for row in &mut t {
            row[best_col] = 1.0;
        }
        return Ok(RdResult {
            rate: 0.0,
            distortion: d_max,
            test_channel: t,
            iterations: 0,
            converged: true,
        });
    }

    let mut iterations = 0usize;
    let mut solve = |beta: f64| -> (f64, f64, Vec<Vec<f64>>, bool) {
        inner_rd(p, distortion, &row_min, beta, cfg, &mut iterations)
    };

    // D(beta) is nonincreasing; grow beta until the target is bracketed.
    let mut lo = 0.0;
    let mut lo_point = solve(0.0);
    let mut hi = 1.0;
    let mut hi_point = solve(hi);
    let mut bracketed = true;
    while hi_point.1 > target {
        if hi > 1e8 {
            bracketed = false;
            break;
        }
        lo = hi;
        lo_point = hi_point;
        hi *= 2.0;
        hi_point = solve(hi);
    }

    let mut inner_converged = lo_point.3 && hi_point.3;
    if bracketed {
        for _ in 0..200 {
            if (hi_point.1 - target).abs() <= 1e-12 || (hi - lo) < 1e-13 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let mid_point = solve(mid);
            inner_converged &= mid_point.3;
            if mid_point.1 <= target {
                hi = mid;
                hi_point = mid_point;
            } else {
                lo = mid;
                lo_point = mid_point;
            }
        }
    }

    // The hi side is feasible. If it undershoots the target (vertex of a
    // linear segment, or an unbracketed target near d_min), blend with an
    // infeasible-side channel: distortion is linear and rate convex in the
    // channel, so the blend lands on the curve at the target exactly.
    let (mut rate, mut d_achieved, mut channel) = if bracketed {
        (hi_point.0, hi_point.1, hi_point.2)
    } else {
        // Could not push distortion down to the target by slope alone;
        // blend toward the deterministic row-minimizer channel (d = d_min).
        let mut det = vec![vec![0.0; m]; n];
        for (x, row) in det.iter_mut().enumerate() {
            let arg = (0..m)
                .min_by(|&a, &b| {
                    distortion[x][a]
                        .partial_cmp(&distortion[x][b])
                        .expect("finite")
                })
                .expect("nonempty row");
            row[arg] = 1.0;
        }
        inner_converged = false;
        let d_det: f64 = (0..n).map(|x| p[x] * (0..m).map(|y| det[x][y] * distortion[x][y]).sum::<f64>()).sum();
        let start = lo_point.clone();
        let lambda = if start.1 - d_det > 1e-15 {
            ((start.1 - target) / (start.1 - d_det)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let blended = blend_channels(&start.2, &det, lambda);
        let d = expected_distortion(p, &blended, distortion);
        (mutual_information_bits(p, &blended), d, blended)
    };

    if d_achieved < target - 1e-12 && lo_point.1 > target {
        let lambda = (lo_point.1 - target) / (lo_point.1 - d_achieved);
        let blended = blend_channels(&lo_point.2, &channel, lambda);
        let d = expected_distortion(p, &blended, distortion);
        rate = mutual_information_bits(p, &blended);
        channel = blended;
        d_achieved = d;
    }

    Ok(RdResult {
        rate,
        distortion: d_achieved,
        test_channel: channel,
        iterations,
        converged: bracketed && inner_converged,
    })
}

/// One slope-parameterized inner solve. Returns `(rate_bits, distortion,
/// channel, converged)`.
fn inner_rd(
    p: &[f64],
    d: &[Vec<f64>],
    row_min: &[f64],
    beta: f64,
    cfg: &SolverConfig,
    iterations: &mut usize,
) -> (f64, f64, Vec<Vec<f64>>, bool) {
    let n = p.len();
    let m = d[0].len();
    // exp(-beta (d - row_min)) keeps every row's largest weight at 1.
    let a: Vec<Vec<f64>> = d
        .iter()
        .zip(row_min)
        .map(|(row, &dm)| row.iter().map(|&dxy| (-beta * (dxy - dm)).exp()).collect())
        .collect();
    let mut q = vec![1.0 / m as f64; m];
    let mut q_next = vec![0.0; m];
    let inner_tol = (cfg.tolerance * 1e-2).clamp(1e-15, 1e-10);
    let mut converged = false;
    let mut t = vec![vec![0.0; m]; n];

    for _ in 0..cfg.max_iterations {
        *iterations += 1;
        q_next.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..n {
            if p[x] <= 0.0 {
                continue;
            }
            let z: f64 = (0..m).map(|y| q[y] * a[x][y]).sum();
            for y in 0..m {
                q_next[y] += p[x] * q[y] * a[x][y] / z;
            }
        }
        let delta = q
            .iter()
            .zip(&q_next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut q, &mut q_next);
        if delta < inner_tol {
            converged = true;
            break;
        }
    }

    for x in 0..n {
        if p[x] <= 0.0 {
            // Unreachable rows do not affect rate or distortion; pin them to
            // the row minimizer to keep the channel stochastic.
            let arg = (0..m)
                .min_by(|&i, &j| d[x][i].partial_cmp(&d[x][j]).expect("finite"))
                .expect("nonempty row");
            t[x].iter_mut().for_each(|v| *v = 0.0);
            t[x][arg] = 1.0;
            continue;
        }
        let z: f64 = (0..m).map(|y| q[y] * a[x][y]).sum();
        for y in 0..m {
            t[x][y] = q[y] * a[x][y] / z;
        }
    }
    let rate = mutual_information_bits(p, &t);
    let dist = expected_distortion(p, &t, d);
    (rate, dist, t, converged)
}

fn blend_channels(a: &[Vec<f64>], b: &[Vec<f64>], lambda_toward_b: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(&x, &y)| (1.0 - lambda_toward_b) * x + lambda_toward_b * y)
                .collect()
        })
        .collect()
}

/// `E[d] = sum_{x,y} p(x) t(y|x) d(x,y)`.
pub fn expected_distortion(p: &[f64], t: &[Vec<f64>], d: &[Vec<f64>]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(x, &px)| {
            px * t[x]
                .iter()
                .zip(&d[x])
                .map(|(&txy, &dxy)| txy * dxy)
                .sum::<f64>()
        })
        .sum()
}

/// Binary entropy `H2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    crate::measures::entropy(&[p, 1.0 - p])
}
