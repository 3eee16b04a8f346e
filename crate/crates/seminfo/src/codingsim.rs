//! Desk-scale Monte Carlo simulators for semantic source and channel
//! coding: empirical error probability on both sides of the semantic
//! entropy and the semantic capacity.
//!
//! The source simulator indexes semantically typical cell sequences
//! most-probable-first up to a real-valued capacity of `2^{nR}` entries.
//! Everything runs in log2 space over *types* (cell count vectors), because
//! at block length 500 both the codebook capacity and the number of typical
//! classes are astronomically large: a type's member count comes from a
//! log-factorial table, cumulative counts use log-sum-exp, the boundary type
//! is included up to a fractional cut, and each sampled sequence is located
//! against that cut by its lexicographic rank fraction inside its own type
//! (a product of ratios in `[0,1]`, so no big integers ever materialize).
//!
//! The channel simulator draws random synonymous codebooks and decodes by
//! joint typicality on the pair alphabet under the product partition. Two
//! regimes are supported. With a small codebook the codebook is drawn
//! explicitly (with distinct codewords, so noiseless channels decode
//! perfectly) and every codeword is tested. Above that budget the simulator
//! switches to an ensemble computation: conditioned on the received block,
//! the probability that one random competitor is jointly typical is computed
//! exactly by enumerating per-output-group count vectors, and the
//! competitor-collision event is then drawn once per trial from the implied
//! Bernoulli law. Both regimes report the same statistics.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::measures::{entropy, semantic_entropy};
use crate::model::{Distribution, ModelError, SemanticVariable};
use crate::semlimits::{semantic_capacity, SearchConfig, SemanticChannelProblem};
use crate::typicality::{
    pack_log_probs, sample_index, wilson_interval, LogTables, Targets, TypicalityError,
};

/// Most work the explicit-codebook decoder may do: `trials * M * L * n`.
pub const EXPLICIT_DECODE_BUDGET: f64 = 2e8;
/// Most per-trial count-vector configurations the ensemble decoder may
/// enumerate.
pub const ENSEMBLE_CONFIG_BUDGET: f64 = 2e5;
/// Most semantic types the source-coding constructor may enumerate.
pub const TYPE_ENUMERATION_BUDGET: f64 = 1e6;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("synonymous rate {rate} outside [0, {max}]")]
    SynRateOutOfRange { rate: f64, max: f64 },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("{0:.3e} semantic types exceed the enumeration budget of {1:.3e}")]
    TooManyTypes(f64, f64),
    #[error(
        "experiment exceeds simulation budgets (explicit decode cost {explicit:.3e} > {explicit_budget:.3e}, ensemble configurations {ensemble:.3e} > {ensemble_budget:.3e})"
    )]
    BudgetExceeded {
        explicit: f64,
        explicit_budget: f64,
        ensemble: f64,
        ensemble_budget: f64,
    },
    #[error("codebook of {requested:.3e} distinct codewords cannot be drawn from {available:.3e} supported sequences")]
    CodebookTooDense { requested: f64, available: f64 },
    #[error(transparent)]
    Typicality(#[from] TypicalityError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ---------------------------------------------------------------------------
// Source coding
// ---------------------------------------------------------------------------

/// A block-coding experiment for a semantic source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCodeExperiment {
    sv: SemanticVariable,
    n: usize,
    rate: f64,
    syn_rate: f64,
    trials: usize,
    seed: u64,
    epsilon: f64,
}

impl SourceCodeExperiment {
    /// `rate` is the semantic index rate in sebits per symbol; `syn_rate`
    /// the within-class synonymous rate, bounded by `H(U) - Hs(U~)` (plus
    /// slack). The semantic error event does not depend on `syn_rate`, so it
    /// is validated and carried but does not alter `P_e`.
    pub fn new(
        sv: SemanticVariable,
        n: usize,
        rate: f64,
        syn_rate: f64,
        trials: usize,
        seed: u64,
        epsilon: f64,
    ) -> Result<Self, SimError> {
        if n == 0 {
            return Err(TypicalityError::EmptySequenceLength.into());
        }
        if !(epsilon > 0.0) {
            return Err(TypicalityError::NonPositiveEpsilon(epsilon).into());
        }
        if !(rate > 0.0) {
            return Err(SimError::NonPositiveRate(rate));
        }
        let max_syn = entropy(sv.dist().probs()) - semantic_entropy(&sv) + 1e-6;
        if !(0.0..=max_syn).contains(&syn_rate) {
            return Err(SimError::SynRateOutOfRange {
                rate: syn_rate,
                max: max_syn,
            });
        }
        if trials == 0 {
            return Err(SimError::NoTrials);
        }
        Ok(SourceCodeExperiment {
            sv,
            n,
            rate,
            syn_rate,
            trials,
            seed,
            epsilon,
        })
    }

    pub fn source(&self) -> &SemanticVariable {
        &self.sv
    }

    pub fn syn_rate(&self) -> f64 {
        self.syn_rate
    }
}

/// Result of a source-coding run.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCodingReport {
    /// Fraction of trials whose semantic sequence had no index.
    pub p_e: f64,
    /// Wilson 95% interval for `p_e`.
    pub ci95: (f64, f64),
    /// log2 of the number of indexed semantic sequences (fractional because
    /// the boundary type is cut part-way).
    pub codebook_log2: f64,
    /// `2^codebook_log2` (infinite if it overflows).
    pub codebook_size: f64,
    /// Exact probability that a fresh block's semantic sequence is indexed.
    pub coverage: f64,
    pub trials: usize,
}

/// One semantic type: a count vector over cells plus its derived log
/// quantities.
struct SemType {
    counts: Vec<usize>,
    /// log2 probability of each member sequence.
    log_q: f64,
    /// log2 of the number of member sequences (multinomial coefficient).
    log_count: f64,
}

/// log2(2^a + 2^b) with `-inf` identities.
fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

/// log2(2^a - 2^b) for `a >= b`; `-inf` when they coincide.
fn log2_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    let diff = 1.0 - (b - a).exp2();
    if diff <= 0.0 {
        f64::NEG_INFINITY
    } else {
        a + diff.log2()
    }
}

/// Natural-log factorial table: `table[k] = ln k!`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = vec![0.0; n + 1];
    for k in 1..=n {
        table[k] = table[k - 1] + (k as f64).ln();
    }
    table
}

fn log2_multinomial(ln_fact: &[f64], total: usize, counts: &[usize]) -> f64 {
    let ln = ln_fact[total] - counts.iter().map(|&k| ln_fact[k]).sum::<f64>();
    ln / std::f64::consts::LN_2
}

fn for_each_composition(
    total: usize,
    parts: usize,
    buf: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if parts == 1 {
        buf.push(total);
        f(buf);
        buf.pop();
        return;
    }
    for first in 0..=total {
        buf.push(first);
        for_each_composition(total - first, parts - 1, buf, f);
        buf.pop();
    }
}

fn compositions_count(total: usize, parts: usize) -> f64 {
    // C(total + parts - 1, parts - 1), computed in floating point.
    let mut c = 1.0f64;
    for i in 0..parts - 1 {
        c = c * (total + i + 1) as f64 / (i + 1) as f64;
    }
    c
}

/// The semantic codebook: typical types sorted most-probable-first with a
/// fractional cut through the boundary type.
struct SemanticCodebook {
    /// Sorted included types; all but possibly the last are fully included.
    types: Vec<SemType>,
    /// Fraction of the last type's members that are indexed (1.0 when it is
    /// fully included).
    boundary_fraction: f64,
    codebook_log2: f64,
    coverage: f64,
    /// Position of each cell count vector in `types`, for O(1) trial lookup:
    /// parallel sorted key list searched by binary search.
    keys: Vec<Vec<usize>>,
}

impl SemanticCodebook {
    fn build(exp: &SourceCodeExperiment) -> Result<Self, SimError> {
        let masses = crate::model::semantic_marginal(&exp.sv);
        let masses = masses.probs();
        let k_cells = masses.len();
        let n = exp.n;
        let type_count = compositions_count(n, k_cells);
        if type_count > TYPE_ENUMERATION_BUDGET {
            return Err(SimError::TooManyTypes(type_count, TYPE_ENUMERATION_BUDGET));
        }
        let hs = semantic_entropy(&exp.sv);
        let ln_fact = ln_factorials(n);
        let log_mass: Vec<f64> = masses
            .iter()
            .map(|&m| if m > 0.0 { m.log2() } else { f64::NEG_INFINITY })
            .collect();

        let mut typical: Vec<SemType> = Vec::new();
        let mut buf = Vec::with_capacity(k_cells);
        for_each_composition(n, k_cells, &mut buf, &mut |counts| {
            let mut log_q = 0.0;
            for (c, &count) in counts.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                log_q += count as f64 * log_mass[c];
            }
            if log_q == f64::NEG_INFINITY {
                return;
            }
            if (-log_q / n as f64 - hs).abs() >= exp.epsilon {
                return;
            }
            typical.push(SemType {
                counts: counts.to_vec(),
                log_q,
                log_count: log2_multinomial(&ln_fact, n, counts),
            });
        });
        // Most probable first; equal-probability types in ascending
        // lexicographic order of their count vectors.
        typical.sort_by(|a, b| {
            b.log_q
                .partial_cmp(&a.log_q)
                .expect("finite log probabilities")
                .then_with(|| a.counts.cmp(&b.counts))
        });

        let capacity_log2 = n as f64 * exp.rate;
        let mut included: Vec<SemType> = Vec::new();
        let mut cum_log2 = f64::NEG_INFINITY;
        let mut coverage = 0.0;
        let mut boundary_fraction = 1.0;
        for t in typical {
            let with_t = log2_add(cum_log2, t.log_count);
            if with_t <= capacity_log2 + 1e-9 {
                cum_log2 = with_t;
                coverage += (t.log_count + t.log_q).exp2();
                included.push(t);
                continue;
            }
            // The boundary type is cut at the remaining capacity. Member
            // ranks are integers, so when the numbers are small enough to
            // resolve exactly, snap the cut to the integer-rank rule
            // (ranks r with r < remaining are indexed); at astronomical
            // sizes the fractional cut is indistinguishable from it.
            let remaining_log2 = log2_sub(capacity_log2, cum_log2);
            let mut fraction = (remaining_log2 - t.log_count).exp2().clamp(0.0, 1.0);
            let mut included_log2 = remaining_log2;
            let remaining_real = remaining_log2.exp2();
            let count_real = t.log_count.exp2();
            if remaining_real < 9.0e15 && count_real < 9.0e15 {
                let members = (remaining_real - 1e-6).ceil().max(0.0);
                fraction = (members / count_real.round()).clamp(0.0, 1.0);
                included_log2 = members.log2();
            }
            if fraction > 0.0 {
                cum_log2 = log2_add(cum_log2, included_log2);
                coverage += fraction * (t.log_count + t.log_q).exp2();
                boundary_fraction = fraction;
                included.push(t);
            }
            break;
        }
        let keys: Vec<Vec<usize>> = included.iter().map(|t| t.counts.clone()).collect();
        Ok(SemanticCodebook {
            types: included,
            boundary_fraction,
            codebook_log2: cum_log2,
            coverage,
            keys,
        })
    }

    /// Whether the semantic sequence with the given cell counts and in-type
    /// lexicographic rank fraction is indexed.
    fn contains(&self, counts: &[usize], rank_fraction: f64) -> bool {
        // The included types are sorted by probability, not by key, so keep
        // a by-key index via linear scan over the (small) type list when
        // types are few, else binary search over sorted copies would be
        // needed; type lists here are at most a few hundred entries.
        match self.keys.iter().position(|k| k.as_slice() == counts) {
            None => false,
            Some(pos) => {
                if pos + 1 < self.types.len() {
                    true
                } else {
                    rank_fraction < self.boundary_fraction
                }
            }
        }
    }
}

/// Runs the source-coding experiment.
pub fn simulate_source_coding(exp: &SourceCodeExperiment) -> Result<SourceCodingReport, SimError> {
    let codebook = SemanticCodebook::build(exp)?;
    let probs = exp.sv.dist().probs();
    let k_cells = exp.sv.partition().cell_count();
    let cell_of: Vec<usize> = (0..probs.len())
        .map(|u| exp.sv.partition().cell_of(u))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
    let mut cells = vec![0usize; exp.n];
    let mut counts = vec![0usize; k_cells];
    let mut remaining = vec![0usize; k_cells];
    let mut errors = 0usize;
    for _ in 0..exp.trials {
        counts.iter_mut().for_each(|c| *c = 0);
        for slot in cells.iter_mut() {
            let u = sample_index(&mut rng, probs);
            *slot = cell_of[u];
            counts[*slot] += 1;
        }
        // Lexicographic rank fraction of `cells` within its type: at each
        // position, the fraction of type-mates that branch to a smaller cell
        // first, scaled by the fraction sharing the prefix so far.
        remaining.copy_from_slice(&counts);
        let mut rank_fraction = 0.0;
        let mut prefix_share = 1.0;
        for (i, &c) in cells.iter().enumerate() {
            let left = (exp.n - i) as f64;
            let smaller: usize = remaining[..c].iter().sum();
            rank_fraction += prefix_share * smaller as f64 / left;
            prefix_share *= remaining[c] as f64 / left;
            remaining[c] -= 1;
        }
        if !codebook.contains(&counts, rank_fraction) {
            errors += 1;
        }
    }
    let p_e = errors as f64 / exp.trials as f64;
    Ok(SourceCodingReport {
        p_e,
        ci95: wilson_interval(errors, exp.trials),
        codebook_log2: codebook.codebook_log2,
        codebook_size: codebook.codebook_log2.exp2(),
        coverage: codebook.coverage,
        trials: exp.trials,
    })
}

// ---------------------------------------------------------------------------
// Channel coding
// ---------------------------------------------------------------------------

/// A random-coding experiment over a partitioned channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCodeExperiment {
    prob: SemanticChannelProblem,
    n: usize,
    rate: f64,
    trials: usize,
    seed: u64,
    epsilon: f64,
    codewords_per_set: usize,
    input_dist: Option<Vec<f64>>,
}

impl ChannelCodeExperiment {
    pub fn new(
        prob: SemanticChannelProblem,
        n: usize,
        rate: f64,
        trials: usize,
        seed: u64,
        epsilon: f64,
    ) -> Result<Self, SimError> {
        if n == 0 {
            return Err(TypicalityError::EmptySequenceLength.into());
        }
        if !(epsilon > 0.0) {
            return Err(TypicalityError::NonPositiveEpsilon(epsilon).into());
        }
        if !(rate > 0.0) {
            return Err(SimError::NonPositiveRate(rate));
        }
        if trials == 0 {
            return Err(SimError::NoTrials);
        }
        Ok(ChannelCodeExperiment {
            prob,
            n,
            rate,
            trials,
            seed,
            epsilon,
            codewords_per_set: 1,
            input_dist: None,
        })
    }

    /// Number of synonymous codewords per message set (default 1).
    pub fn with_codewords_per_set(mut self, l: usize) -> Result<Self, SimError> {
        if l == 0 {
            return Err(SimError::NoTrials);
        }
        self.codewords_per_set = l;
        Ok(self)
    }

    /// Overrides the codeword-generating input distribution (default: the
    /// best input found by the semantic capacity search).
    pub fn with_input_dist(mut self, p: Vec<f64>) -> Result<Self, SimError> {
        Distribution::new(self.prob.channel().input_alphabet().clone(), p.clone())?;
        self.input_dist = Some(p);
        Ok(self)
    }
}

/// Which decoding regime a channel-coding run used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Explicit,
    Ensemble,
}

/// Result of a channel-coding run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCodingReport {
    /// Fraction of trials not decoded to the correct message.
    pub p_e: f64,
    pub ci95: (f64, f64),
    /// Fraction of trials decoding to the correct message (`1 - p_e`).
    pub semantic_accuracy: f64,
    /// Fraction of trials decoding to the exact transmitted codeword.
    pub syntactic_accuracy: f64,
    pub mode: SimMode,
    pub trials: usize,
}

/// Shared per-run state: pair-alphabet tables and typicality targets.
struct PairDecoder {
    tables: LogTables,
    targets: Targets,
    n: usize,
    epsilon: f64,
    n_outputs: usize,
}

impl PairDecoder {
    fn jointly_typical(&self, x_seq: &[usize], y_seq: &[usize]) -> bool {
        let mut logp_syn = 0.0;
        let mut logp_sem = 0.0;
        for (&x, &y) in x_seq.iter().zip(y_seq) {
            let pair = x * self.n_outputs + y;
            logp_syn += self.tables.log_syn[pair];
            logp_sem += self.tables.log_sem[pair];
        }
        self.targets
            .verdict(pack_log_probs(logp_syn, logp_sem), self.n, self.epsilon)
            .synonymous_typical
    }
}

/// Runs the channel-coding experiment, choosing the regime by budget.
pub fn simulate_channel_coding(exp: &ChannelCodeExperiment) -> Result<ChannelCodingReport, SimError> {
    let channel = exp.prob.channel();
    let n_in = channel.input_alphabet().size();
    let n_out = channel.output_alphabet().size();
    let p_x: Vec<f64> = match &exp.input_dist {
        Some(p) => p.clone(),
        None => semantic_capacity(&exp.prob, &SearchConfig::default()).input_dist,
    };
    let input = SemanticVariable::new(
        Distribution::new(channel.input_alphabet().clone(), p_x.clone())?,
        exp.prob.input_partition().clone(),
    )?;
    let joint = crate::model::JointModel::from_input_and_channel(
        &input,
        channel,
        exp.prob.output_partition().clone(),
    )?;
    let pair = joint.pair_variable();
    let decoder = PairDecoder {
        tables: LogTables::new(&pair),
        targets: Targets::new(&pair),
        n: exp.n,
        epsilon: exp.epsilon,
        n_outputs: n_out,
    };

    let l = exp.codewords_per_set as f64;
    let m_real = (exp.n as f64 * exp.rate).exp2();
    let explicit_cost = exp.trials as f64 * m_real * l * exp.n as f64;
    let support = p_x.iter().filter(|&&p| p > 0.0).count();
    let support_log2 = exp.n as f64 * (support as f64).log2();

    if explicit_cost <= EXPLICIT_DECODE_BUDGET {
        let m = m_real.ceil() as usize;
        let requested = m as f64 * l;
        if support_log2 < 1000.0 && requested > 0.25 * support_log2.exp2() {
            return Err(SimError::CodebookTooDense {
                requested,
                available: support_log2.exp2(),
            });
        }
        return Ok(simulate_explicit(exp, &decoder, &p_x, m));
    }

    // Balanced output groups maximize the per-trial configuration count, so
    // this bound is safe for every realization.
    let per_group = exp.n.div_ceil(n_out);
    let ensemble_cost = compositions_count(per_group, n_in).powi(n_out as i32);
    if ensemble_cost <= ENSEMBLE_CONFIG_BUDGET {
        return Ok(simulate_ensemble(exp, &decoder, &p_x, m_real));
    }
    Err(SimError::BudgetExceeded {
        explicit: explicit_cost,
        explicit_budget: EXPLICIT_DECODE_BUDGET,
        ensemble: ensemble_cost,
        ensemble_budget: ENSEMBLE_CONFIG_BUDGET,
    })
}

fn simulate_explicit(
    exp: &ChannelCodeExperiment,
    decoder: &PairDecoder,
    p_x: &[f64],
    m: usize,
) -> ChannelCodingReport {
    let channel = exp.prob.channel();
    let l = exp.codewords_per_set;
    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
    let mut codebook: Vec<Vec<usize>> = Vec::with_capacity(m * l);
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(m * l);
    let mut y = vec![0usize; exp.n];
    let mut sem_ok = 0usize;
    let mut syn_ok = 0usize;
    for _ in 0..exp.trials {
        codebook.clear();
        seen.clear();
        while codebook.len() < m * l {
            let cw: Vec<usize> = (0..exp.n).map(|_| sample_index(&mut rng, p_x)).collect();
            if seen.insert(cw.clone()) {
                codebook.push(cw);
            }
        }
        // Message 0 is transmitted (the codebook is exchangeable), via a
        // random codeword of its set.
        let sent = rng.random_range(0..l);
        for (i, slot) in y.iter_mut().enumerate() {
            *slot = sample_index(&mut rng, &channel.rows()[codebook[sent][i]]);
        }
        let mut matched_message: Option<usize> = None;
        let mut ambiguous = false;
        let mut own_matches = 0usize;
        let mut own_exact = false;
        for msg in 0..m {
            for cw in 0..l {
                let idx = msg * l + cw;
                if !decoder.jointly_typical(&codebook[idx], &y) {
                    continue;
                }
                if msg == 0 {
                    own_matches += 1;
                    own_exact |= idx == sent;
                }
                match matched_message {
                    None => matched_message = Some(msg),
                    Some(prev) if prev != msg => {
                        ambiguous = true;
                    }
                    _ => {}
                }
            }
            if ambiguous {
                break;
            }
        }
        if !ambiguous && matched_message == Some(0) {
            sem_ok += 1;
            if own_matches == 1 && own_exact {
                syn_ok += 1;
            }
        }
    }
    report(exp.trials, sem_ok, syn_ok, SimMode::Explicit)
}

fn simulate_ensemble(
    exp: &ChannelCodeExperiment,
    decoder: &PairDecoder,
    p_x: &[f64],
    m_real: f64,
) -> ChannelCodingReport {
    let channel = exp.prob.channel();
    let n_in = channel.input_alphabet().size();
    let n_out = channel.output_alphabet().size();
    let log_px: Vec<f64> = p_x
        .iter()
        .map(|&p| if p > 0.0 { p.log2() } else { f64::NEG_INFINITY })
        .collect();
    let ln_fact = ln_factorials(exp.n);
    let l = exp.codewords_per_set as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
    let mut x1 = vec![0usize; exp.n];
    let mut y = vec![0usize; exp.n];
    let mut group_sizes = vec![0usize; n_out];
    let mut sem_ok = 0usize;
    let mut syn_ok = 0usize;

    for _ in 0..exp.trials {
        group_sizes.iter_mut().for_each(|g| *g = 0);
        for i in 0..exp.n {
            x1[i] = sample_index(&mut rng, p_x);
            y[i] = sample_index(&mut rng, &channel.rows()[x1[i]]);
            group_sizes[y[i]] += 1;
        }
        let transmitted_typical = decoder.jointly_typical(&x1, &y);

        // Exact probability that an independent competitor codeword is
        // jointly typical with this y: enumerate, per output group, the
        // count vector of competitor symbols, and sum the multinomial
        // weights of configurations satisfying all three conditions.
        let mut group_terms: Vec<Vec<(f64, f64, f64)>> = Vec::with_capacity(n_out);
        for (out, &size) in group_sizes.iter().enumerate() {
            let mut terms = Vec::new();
            let mut buf = Vec::with_capacity(n_in);
            for_each_composition(size, n_in, &mut buf, &mut |counts| {
                let mut log_w = log2_multinomial(&ln_fact, size, counts);
                let mut s_syn = 0.0;
                let mut s_sem = 0.0;
                for (x, &c) in counts.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let cf = c as f64;
                    log_w += cf * log_px[x];
                    let pair = x * n_out + out;
                    s_syn += cf * decoder.tables.log_syn[pair];
                    s_sem += cf * decoder.tables.log_sem[pair];
                }
                if log_w > f64::NEG_INFINITY {
                    terms.push((log_w, s_syn, s_sem));
                }
            });
            group_terms.push(terms);
        }
        let mut p_competitor = 0.0;
        let mut pick = vec![0usize; n_out];
        'outer: loop {
            let mut log_w = 0.0;
            let mut s_syn = 0.0;
            let mut s_sem = 0.0;
            for (g, &i) in pick.iter().enumerate() {
                let (w, a, b) = group_terms[g][i];
                log_w += w;
                s_syn += a;
                s_sem += b;
            }
            let verdict =
                decoder
                    .targets
                    .verdict(pack_log_probs(s_syn, s_sem), exp.n, exp.epsilon);
            if verdict.synonymous_typical {
                p_competitor += log_w.exp2();
            }
            let mut g = 0;
            loop {
                if g == n_out {
                    break 'outer;
                }
                pick[g] += 1;
                if pick[g] < group_terms[g].len() {
                    break;
                }
                pick[g] = 0;
                g += 1;
            }
        }
        let p_competitor = p_competitor.clamp(0.0, 1.0);

        // No cross-message competitor matches; within the transmitted set
        // the other L-1 codewords must also miss for an exact syntactic
        // decision.
        let cross = (m_real - 1.0) * l;
        let p_no_cross = if p_competitor >= 1.0 {
            0.0
        } else {
            (cross * (-p_competitor).ln_1p()).exp()
        };
        let p_no_own = if p_competitor >= 1.0 {
            0.0
        } else {
            ((l - 1.0) * (-p_competitor).ln_1p()).exp()
        };
        let sem_prob = if transmitted_typical { p_no_cross } else { 0.0 };
        let syn_prob = sem_prob * p_no_own;
        let u: f64 = rng.random();
        if u < sem_prob {
            sem_ok += 1;
            if u < syn_prob {
                syn_ok += 1;
            }
        }
    }
    report(exp.trials, sem_ok, syn_ok, SimMode::Ensemble)
}

fn report(trials: usize, sem_ok: usize, syn_ok: usize, mode: SimMode) -> ChannelCodingReport {
    let errors = trials - sem_ok;
    ChannelCodingReport {
        p_e: errors as f64 / trials as f64,
        ci95: wilson_interval(errors, trials),
        semantic_accuracy: sem_ok as f64 / trials as f64,
        syntactic_accuracy: syn_ok as f64 / trials as f64,
        mode,
        trials,
    }
}
