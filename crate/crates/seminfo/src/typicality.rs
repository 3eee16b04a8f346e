//! Synonymous typicality: sequence log-probabilities, the three-condition
//! typicality test, exhaustive typical-set enumeration with quotient
//! classes, and Monte Carlo AEP estimates.
//!
//! A length-`n` i.i.d. sequence is *synonymous typical* at level `eps` when
//! three empirical rates are simultaneously close to their limits:
//!
//! 1. `|-(1/n) log2 p(u^n) - H(U)| < eps` (syntactic),
//! 2. `|-(1/n) log2 p(u~^n) - Hs(U~)| < eps` (semantic, where `u~^n` is the
//!    sequence of cells), and
//! 3. `|-(1/n) log2 p(u~^n -> u^n) - (H(U) - Hs(U~))| < eps` (the
//!    conditional probability of the sequence within its synonymous class).
//!
//! Sequences containing a zero-probability symbol get a `-inf` log
//! probability sentinel and are never typical. Enumeration groups the
//! typical set by semantic sequence; each group's size is compared against
//! the `2^{n(H - Hs +/- eps)}` bounds, with violations counted rather than
//! hidden because the bounds are only guaranteed for large `n`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::measures::semantic_entropy;
use crate::model::SemanticVariable;

/// Hard cap on exhaustive enumeration work.
pub const ENUMERATION_BUDGET: f64 = 1e7;

#[derive(Debug, Error, PartialEq)]
pub enum TypicalityError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("sequence length must be at least 1")]
    EmptySequenceLength,
    #[error("sequence index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("sequence has length {got}, model expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("enumeration of {total:.3e} sequences exceeds the budget of {budget:.3e}")]
    TooLargeToEnumerate { total: f64, budget: f64 },
}

/// An i.i.d. semantic source observed through length-`n` blocks at
/// typicality level `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceModel {
    sv: SemanticVariable,
    n: usize,
    epsilon: f64,
}

impl SequenceModel {
    pub fn new(sv: SemanticVariable, n: usize, epsilon: f64) -> Result<Self, TypicalityError> {
        if n == 0 {
            return Err(TypicalityError::EmptySequenceLength);
        }
        if !(epsilon > 0.0) {
            return Err(TypicalityError::NonPositiveEpsilon(epsilon));
        }
        Ok(SequenceModel { sv, n, epsilon })
    }

    pub fn source(&self) -> &SemanticVariable {
        &self.sv
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Log base-2 probabilities of a sequence, its semantic (cell) sequence, and
/// the conditional probability of the sequence within its class. Zero
/// probabilities appear as `-inf`; `logp_map` is pinned to `-inf` whenever
/// the sequence itself has zero probability so the difference never becomes
/// NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceLogProbs {
    pub logp_syn: f64,
    pub logp_sem: f64,
    pub logp_map: f64,
}

/// Per-symbol log tables for a source, reused across sequences and trials.
pub(crate) struct LogTables {
    pub(crate) log_syn: Vec<f64>,
    pub(crate) log_sem: Vec<f64>,
}

impl LogTables {
    pub(crate) fn new(sv: &SemanticVariable) -> Self {
        let probs = sv.dist().probs();
        let masses = crate::model::semantic_marginal(sv);
        let log_syn = probs
            .iter()
            .map(|&p| if p > 0.0 { p.log2() } else { f64::NEG_INFINITY })
            .collect();
        let log_sem = (0..probs.len())
            .map(|i| {
                let mass = masses.probs()[sv.partition().cell_of(i)];
                if mass > 0.0 {
                    mass.log2()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        LogTables { log_syn, log_sem }
    }

    fn accumulate(&self, seq: &[usize]) -> SequenceLogProbs {
        let mut logp_syn = 0.0;
        let mut logp_sem = 0.0;
        for &u in seq {
            logp_syn += self.log_syn[u];
            logp_sem += self.log_sem[u];
        }
        pack_log_probs(logp_syn, logp_sem)
    }
}

pub(crate) fn pack_log_probs(logp_syn: f64, logp_sem: f64) -> SequenceLogProbs {
    let logp_map = if logp_syn == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        logp_syn - logp_sem
    };
    SequenceLogProbs {
        logp_syn,
        logp_sem,
        logp_map,
    }
}

/// Log probabilities of `u_seq` under the i.i.d. law of `sv`.
pub fn sequence_log_probs(
    u_seq: &[usize],
    sv: &SemanticVariable,
) -> Result<SequenceLogProbs, TypicalityError> {
    let size = sv.alphabet().size();
    if let Some(&bad) = u_seq.iter().find(|&&u| u >= size) {
        return Err(TypicalityError::IndexOutOfRange { index: bad, size });
    }
    Ok(LogTables::new(sv).accumulate(u_seq))
}

/// Outcome of the three-condition typicality test, together with the
/// empirical rates it compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalityVerdict {
    pub syn_typical: bool,
    pub sem_typical: bool,
    /// All three conditions hold.
    pub synonymous_typical: bool,
    /// `-(1/n) log2 p(u^n)`; `+inf` for zero-probability sequences.
    pub empirical_h: f64,
    /// `-(1/n) log2 p(u~^n)`.
    pub empirical_hs: f64,
    /// `-(1/n) log2 p(u~^n -> u^n)`.
    pub empirical_cond: f64,
}

/// Reference entropies the typicality conditions compare against.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Targets {
    pub(crate) h: f64,
    pub(crate) hs: f64,
}

impl Targets {
    pub(crate) fn new(sv: &SemanticVariable) -> Self {
        Targets {
            h: crate::measures::entropy(sv.dist().probs()),
            hs: semantic_entropy(sv),
        }
    }

    pub(crate) fn verdict(&self, lp: SequenceLogProbs, n: usize, eps: f64) -> TypicalityVerdict {
        let n = n as f64;
        let empirical_h = -lp.logp_syn / n;
        let empirical_hs = -lp.logp_sem / n;
        let empirical_cond = -lp.logp_map / n;
        let syn_typical = (empirical_h - self.h).abs() < eps;
        let sem_typical = (empirical_hs - self.hs).abs() < eps;
        let cond_typical = (empirical_cond - (self.h - self.hs)).abs() < eps;
        TypicalityVerdict {
            syn_typical,
            sem_typical,
            synonymous_typical: syn_typical && sem_typical && cond_typical,
            empirical_h,
            empirical_hs,
            empirical_cond,
        }
    }
}

/// Applies the three-condition test to one sequence.
pub fn classify(u_seq: &[usize], model: &SequenceModel) -> Result<TypicalityVerdict, TypicalityError> {
    if u_seq.len() != model.n {
        return Err(TypicalityError::LengthMismatch {
            expected: model.n,
            got: u_seq.len(),
        });
    }
    let lp = sequence_log_probs(u_seq, &model.sv)?;
    Ok(Targets::new(&model.sv).verdict(lp, model.n, model.epsilon))
}

/// One quotient class of the typical set: the typical sequences sharing a
/// semantic (cell) sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalClass {
    pub semantic_seq: Vec<usize>,
    /// Typical members, in lexicographic order.
    pub members: Vec<Vec<usize>>,
    /// Probability of the semantic sequence (product of cell masses).
    pub semantic_probability: f64,
    /// Total probability of the typical members.
    pub member_probability: f64,
}

/// Exhaustive description of the synonymous typical set.
#[derive(Debug, Clone, PartialEq)]
pub struct TypicalSetSummary {
    /// Quotient classes keyed by semantic sequence, lexicographic order.
    pub classes: Vec<TypicalClass>,
    /// `|A_eps|`: total number of typical sequences across all classes.
    pub typical_count: usize,
    /// Total probability of the typical set.
    pub typical_probability: f64,
    /// Number of sequences scanned (`N^n`).
    pub scanned: usize,
    /// `2^{n(H - Hs - eps)}` and `2^{n(H - Hs + eps)}`.
    pub class_size_bounds: (f64, f64),
    /// Classes whose size falls outside the bounds (expected to be zero for
    /// large `n`; reported rather than asserted at small `n`).
    pub bound_violations: usize,
}

/// Theoretical bounds on the size of a typical quotient class.
pub fn class_size_bounds(model: &SequenceModel) -> (f64, f64) {
    let t = Targets::new(&model.sv);
    let n = model.n as f64;
    let gap = t.h - t.hs;
    (
        (n * (gap - model.epsilon)).exp2(),
        (n * (gap + model.epsilon)).exp2(),
    )
}

/// Enumerates every length-`n` sequence, collects the synonymous typical
/// set, and groups it into quotient classes.
pub fn enumerate_typical(model: &SequenceModel) -> Result<TypicalSetSummary, TypicalityError> {
    let size = model.sv.alphabet().size();
    let total = (size as f64).powi(model.n as i32);
    if total > ENUMERATION_BUDGET {
        return Err(TypicalityError::TooLargeToEnumerate {
            total,
            budget: ENUMERATION_BUDGET,
        });
    }
    let tables = LogTables::new(&model.sv);
    let targets = Targets::new(&model.sv);
    let cell_of: Vec<usize> = (0..size).map(|u| model.sv.partition().cell_of(u)).collect();

    let mut classes: BTreeMap<Vec<usize>, TypicalClass> = BTreeMap::new();
    let mut seq = vec![0usize; model.n];
    let mut scanned = 0usize;
    loop {
        scanned += 1;
        let lp = tables.accumulate(&seq);
        let verdict = targets.verdict(lp, model.n, model.epsilon);
        if verdict.synonymous_typical {
            let sem_seq: Vec<usize> = seq.iter().map(|&u| cell_of[u]).collect();
            let entry = classes.entry(sem_seq.clone()).or_insert_with(|| TypicalClass {
                semantic_seq: sem_seq,
                members: Vec::new(),
                semantic_probability: lp.logp_sem.exp2(),
                member_probability: 0.0,
            });
            entry.members.push(seq.clone());
            entry.member_probability += lp.logp_syn.exp2();
        }
        // Lexicographic odometer.
        let mut k = model.n;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            seq[k] += 1;
            if seq[k] < size {
                break;
            }
            seq[k] = 0;
        }
        if seq.iter().all(|&u| u == 0) {
            break;
        }
    }
    debug_assert_eq!(scanned as f64, total);

    let bounds = class_size_bounds(model);
    let classes: Vec<TypicalClass> = classes.into_values().collect();
    let typical_count = classes.iter().map(|c| c.members.len()).sum();
    let typical_probability = classes.iter().map(|c| c.member_probability).sum();
    let bound_violations = classes
        .iter()
        .filter(|c| {
            let len = c.members.len() as f64;
            len < bounds.0 || len > bounds.1
        })
        .count();
    Ok(TypicalSetSummary {
        classes,
        typical_count,
        typical_probability,
        scanned,
        class_size_bounds: bounds,
        bound_violations,
    })
}

/// Monte Carlo estimate of the probability that a block is synonymous
/// typical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AepEstimate {
    pub prob_typical: f64,
    /// Wilson 95% confidence interval.
    pub ci95: (f64, f64),
    pub trials: usize,
}

/// Samples `trials` i.i.d. blocks and reports the typical fraction.
pub fn monte_carlo_aep(model: &SequenceModel, trials: usize, seed: u64) -> AepEstimate {
    let tables = LogTables::new(&model.sv);
    let targets = Targets::new(&model.sv);
    let probs = model.sv.dist().probs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..trials {
        let mut logp_syn = 0.0;
        let mut logp_sem = 0.0;
        for _ in 0..model.n {
            let u = sample_index(&mut rng, probs);
            logp_syn += tables.log_syn[u];
            logp_sem += tables.log_sem[u];
        }
        let verdict = targets.verdict(pack_log_probs(logp_syn, logp_sem), model.n, model.epsilon);
        if verdict.synonymous_typical {
            hits += 1;
        }
    }
    let (lo, hi) = wilson_interval(hits, trials);
    AepEstimate {
        prob_typical: hits as f64 / trials.max(1) as f64,
        ci95: (lo, hi),
        trials,
    }
}

/// Inverse-CDF draw from a finite distribution.
pub(crate) fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let mut u: f64 = rng.random();
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_positive = i;
        if u < p {
            return i;
        }
        u -= p;
    }
    last_positive
}

/// Wilson 95% score interval for a binomial proportion.
pub(crate) fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At p = 0 or 1 the score interval touches the boundary exactly; pin it
    // there instead of leaving floating-point dust.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alphabet, Distribution, SynonymousPartition};
    use crate::testkit;

    fn example_u() -> SemanticVariable {
        testkit::example_source()
    }

    fn uniform_binary() -> SemanticVariable {
        let alphabet = Alphabet::indexed("b", 2);
        SemanticVariable::new(
            Distribution::uniform(alphabet.clone()),
            SynonymousPartition::singletons(alphabet),
        )
        .unwrap()
    }

    #[test]
    fn log_probs_match_hand_products() {
        let sv = example_u();
        let lp = sequence_log_probs(&[0, 2], &sv).unwrap();
        assert!((lp.logp_syn.exp2() - 0.06).abs() < 1e-12);
        assert!((lp.logp_sem.exp2() - 0.24).abs() < 1e-12);
        assert!((lp.logp_map.exp2() - 0.25).abs() < 1e-12);
        assert!(lp.logp_map <= 0.0);
    }

    #[test]
    fn uniform_binary_blocks_are_exactly_typical() {
        let sv = uniform_binary();
        let lp = sequence_log_probs(&[0, 1, 1, 0], &sv).unwrap();
        assert!((-lp.logp_syn / 4.0 - 1.0).abs() < 1e-12);
        let model = SequenceModel::new(sv, 4, 1e-6).unwrap();
        let verdict = classify(&[0, 1, 1, 0], &model).unwrap();
        assert!(verdict.syn_typical && verdict.sem_typical && verdict.synonymous_typical);
        assert_eq!(verdict.empirical_cond, 0.0);
    }

    #[test]
    fn single_cell_partition_makes_sem_condition_trivial() {
        let alphabet = Alphabet::indexed("b", 2);
        let sv = SemanticVariable::new(
            Distribution::new(alphabet.clone(), vec![0.9, 0.1]).unwrap(),
            SynonymousPartition::single_cell(alphabet),
        )
        .unwrap();
        let lp = sequence_log_probs(&[0, 0, 1], &sv).unwrap();
        assert_eq!(lp.logp_sem, 0.0);
        let model = SequenceModel::new(sv, 3, 0.05).unwrap();
        let verdict = classify(&[0, 0, 1], &model).unwrap();
        assert!(verdict.sem_typical);
        assert!((verdict.empirical_hs - 0.0).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_symbols_are_never_typical() {
        let alphabet = Alphabet::indexed("b", 3);
        let sv = SemanticVariable::new(
            Distribution::new(alphabet.clone(), vec![0.5, 0.5, 0.0]).unwrap(),
            SynonymousPartition::new(alphabet, vec![vec![0], vec![1, 2]]).unwrap(),
        )
        .unwrap();
        let lp = sequence_log_probs(&[0, 2], &sv).unwrap();
        assert_eq!(lp.logp_syn, f64::NEG_INFINITY);
        assert_eq!(lp.logp_map, f64::NEG_INFINITY);
        assert!(lp.logp_sem.is_finite());
        let model = SequenceModel::new(sv, 2, 10.0).unwrap();
        let verdict = classify(&[0, 2], &model).unwrap();
        assert!(!verdict.syn_typical);
        assert!(!verdict.synonymous_typical);
        assert!(verdict.empirical_h.is_infinite());
    }

    #[test]
    fn repeated_rare_symbol_fails_the_syntactic_condition() {
        let model = SequenceModel::new(example_u(), 10, 0.1).unwrap();
        let verdict = classify(&[0; 10], &model).unwrap();
        assert!((verdict.empirical_h - 1.737).abs() < 1e-3);
        assert!(!verdict.syn_typical);
        assert!(!verdict.synonymous_typical);
    }

    #[test]
    fn invalid_sequences_are_rejected() {
        let model = SequenceModel::new(uniform_binary(), 3, 0.1).unwrap();
        assert_eq!(
            classify(&[0, 1], &model).unwrap_err(),
            TypicalityError::LengthMismatch { expected: 3, got: 2 }
        );
        assert_eq!(
            classify(&[0, 1, 7], &model).unwrap_err(),
            TypicalityError::IndexOutOfRange { index: 7, size: 2 }
        );
        assert_eq!(
            SequenceModel::new(uniform_binary(), 0, 0.1).unwrap_err(),
            TypicalityError::EmptySequenceLength
        );
        assert_eq!(
            SequenceModel::new(uniform_binary(), 3, 0.0).unwrap_err(),
            TypicalityError::NonPositiveEpsilon(0.0)
        );
    }

    #[test]
    fn skewed_binary_enumeration_matches_binomial_count() {
        let alphabet = Alphabet::indexed("b", 2);
        let sv = SemanticVariable::new(
            Distribution::new(alphabet.clone(), vec![0.7, 0.3]).unwrap(),
            SynonymousPartition::singletons(alphabet),
        )
        .unwrap();
        let model = SequenceModel::new(sv, 10, 0.1).unwrap();
        let summary = enumerate_typical(&model).unwrap();
        // Only sequences with exactly three rare symbols land inside the
        // window: C(10,3) = 120 of them, each its own singleton class.
        assert_eq!(summary.typical_count, 120);
        assert_eq!(summary.classes.len(), 120);
        assert!(summary.classes.iter().all(|c| c.members.len() == 1));
        assert_eq!(summary.scanned, 1024);
        let each = 0.7f64.powi(7) * 0.3f64.powi(3);
        assert!((summary.typical_probability - 120.0 * each).abs() < 1e-12);
    }

    #[test]
    fn single_cell_partition_with_huge_epsilon_collects_everything() {
        let alphabet = Alphabet::indexed("b", 2);
        let sv = SemanticVariable::new(
            Distribution::new(alphabet.clone(), vec![0.7, 0.3]).unwrap(),
            SynonymousPartition::single_cell(alphabet),
        )
        .unwrap();
        let model = SequenceModel::new(sv, 4, 10.0).unwrap();
        let summary = enumerate_typical(&model).unwrap();
        assert_eq!(summary.classes.len(), 1);
        assert_eq!(summary.classes[0].members.len(), 16);
        assert!((summary.typical_probability - 1.0).abs() < 1e-12);
        assert_eq!(summary.bound_violations, 0);
    }

    #[test]
    fn example_source_classes_fill_whole_cells() {
        // Within each cell of the example source the symbols are
        // equiprobable, so every member of a class shares one syntactic
        // probability and classes appear whole: 2^6 = 64 members each. The
        // typical cell counts are k in {2..5} rare-cell occurrences, giving
        // C(6,2)+C(6,3)+C(6,4)+C(6,5) = 56 classes.
        let model = SequenceModel::new(example_u(), 6, 0.2).unwrap();
        let summary = enumerate_typical(&model).unwrap();
        assert_eq!(summary.classes.len(), 56);
        assert_eq!(summary.typical_count, 56 * 64);
        assert!(summary.classes.iter().all(|c| c.members.len() == 64));
        let (lo, hi) = summary.class_size_bounds;
        assert!(lo < 64.0 && 64.0 < hi, "bounds ({lo}, {hi}) must straddle 64");
        assert_eq!(summary.bound_violations, 0);
        let mass: f64 = (2..=5)
            .map(|k| binom(6, k as u32) as f64 * 0.6f64.powi(k) * 0.4f64.powi(6 - k))
            .sum();
        assert!((summary.typical_probability - mass).abs() < 1e-9);
    }

    fn binom(n: u32, k: u32) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
    }

    #[test]
    fn classes_partition_the_typical_set() {
        let model = SequenceModel::new(example_u(), 5, 0.35).unwrap();
        let summary = enumerate_typical(&model).unwrap();
        let mut seen = std::collections::HashSet::new();
        for class in &summary.classes {
            for member in &class.members {
                assert!(seen.insert(member.clone()), "classes must be disjoint");
                let verdict = classify(member, &model).unwrap();
                assert!(verdict.synonymous_typical);
                let cells: Vec<usize> = member
                    .iter()
                    .map(|&u| model.source().partition().cell_of(u))
                    .collect();
                assert_eq!(cells, class.semantic_seq);
            }
        }
        assert_eq!(seen.len(), summary.typical_count);
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let model = SequenceModel::new(example_u(), 32, 0.1).unwrap();
        assert!(matches!(
            enumerate_typical(&model).unwrap_err(),
            TypicalityError::TooLargeToEnumerate { .. }
        ));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_certain_for_uniform_sources() {
        let model = SequenceModel::new(uniform_binary(), 50, 0.1).unwrap();
        let a = monte_carlo_aep(&model, 2000, 7);
        let b = monte_carlo_aep(&model, 2000, 7);
        assert_eq!(a, b);
        assert_eq!(a.prob_typical, 1.0);
        assert!(a.ci95.0 > 0.99 && a.ci95.1 == 1.0);
    }

    #[test]
    fn aep_probability_grows_with_block_length() {
        let mut last = 0.0;
        for n in [100, 500, 2000] {
            let model = SequenceModel::new(example_u(), n, 0.05).unwrap();
            let est = monte_carlo_aep(&model, 4000, 11);
            assert!(
                est.prob_typical >= last - 0.01,
                "n={n}: {} < previous {last}",
                est.prob_typical
            );
            last = est.prob_typical;
        }
        assert!(last >= 0.99, "n=2000 should be nearly surely typical, got {last}");
    }

    #[test]
    fn small_blocks_with_tight_epsilon_are_rarely_typical() {
        let model = SequenceModel::new(example_u(), 10, 0.01).unwrap();
        let est = monte_carlo_aep(&model, 10_000, 13);
        assert!(est.prob_typical < 0.5, "got {}", est.prob_typical);
    }

    #[test]
    fn wilson_interval_brackets_the_point_estimate() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(lo > 0.40 && hi < 0.60);
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(100, 100);
        assert!(lo > 0.95 && lo < 1.0);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn sampling_respects_zero_probability_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probs = [0.0, 0.6, 0.0, 0.4, 0.0];
        for _ in 0..1000 {
            let i = sample_index(&mut rng, &probs);
            assert!(i == 1 || i == 3);
        }
    }
}
