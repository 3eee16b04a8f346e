//! Finite probability models annotated with synonymous partitions.
//!
//! A synonymous partition groups the symbols of an alphabet into disjoint,
//! nonempty, ordered cells; every cell collects syntactic symbols that share
//! one meaning. A [`SemanticVariable`] pairs a distribution with such a
//! partition, and a [`JointModel`] carries a joint distribution together with
//! a partition per axis. Quotient objects (cell-mass distributions, product
//! partitions) are derived here; the information measures built on top of
//! them live in [`crate::measures`].
//!
//! All constructors validate their inputs. Probabilities may be off by at
//! most [`NORMALIZATION_TOL`] from summing to one and are renormalized
//! exactly on construction, so downstream code can rely on clean simplexes.

use thiserror::Error;

/// Largest tolerated deviation of a probability vector's sum from 1.
pub const NORMALIZATION_TOL: f64 = 1e-9;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol label `{0}`")]
    DuplicateLabel(String),
    #[error("expected {expected} probabilities, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("probability at index {index} is {value}; must be finite and nonnegative")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, further than {NORMALIZATION_TOL} from 1")]
    NotNormalized { sum: f64 },
    #[error("channel row {row} sums to {sum}, further than {NORMALIZATION_TOL} from 1")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("partition cell {cell} is empty")]
    EmptyCell { cell: usize },
    #[error("symbol index {index} appears in cells {first} and {second}")]
    OverlappingCells { index: usize, first: usize, second: usize },
    #[error("symbol indices {missing:?} are not covered by any cell")]
    IncompleteCover { missing: Vec<usize> },
    #[error("cell {cell} references symbol index {index}, but the alphabet has {size} symbols")]
    IndexOutOfRange { cell: usize, index: usize, size: usize },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("matrix row {row} has {got} entries, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, got: usize },
}

// ---------------------------------------------------------------------------
// Alphabet
// ---------------------------------------------------------------------------

/// An ordered set of unique symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        let mut seen = std::collections::HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(ModelError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Alphabet { labels })
    }

    /// Synthesizes `n` labels `prefix0, prefix1, ...`.
    pub fn indexed(prefix: &str, n: usize) -> Self {
        let labels = (0..n).map(|i| format!("{prefix}{i}")).collect();
        Alphabet { labels }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

fn validate_probs(probs: &[f64], expected_len: usize) -> Result<f64> {
    if probs.len() != expected_len {
        return Err(ModelError::LengthMismatch {
            expected: expected_len,
            got: probs.len(),
        });
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(ModelError::InvalidProbability { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(ModelError::NotNormalized { sum });
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// Distribution
// ---------------------------------------------------------------------------

/// A probability distribution over an [`Alphabet`].
///
/// Zero-probability symbols are kept so indices stay aligned with the
/// alphabet. The vector is renormalized to sum exactly to 1 on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(alphabet: Alphabet, mut probs: Vec<f64>) -> Result<Self> {
        let sum = validate_probs(&probs, alphabet.size())?;
        for p in &mut probs {
            *p /= sum;
        }
        Ok(Distribution { alphabet, probs })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        Distribution {
            alphabet,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }
}

// ---------------------------------------------------------------------------
// Synonymous partitions
// ---------------------------------------------------------------------------

/// Checks that `cells` forms a partition of `{0, .., alphabet_size-1}`:
/// every cell nonempty, no index in two cells, no index missed.
pub fn validate_partition(alphabet_size: usize, cells: &[Vec<usize>]) -> Result<()> {
    if cells.is_empty() {
        return Err(ModelError::IncompleteCover {
            missing: (0..alphabet_size).collect(),
        });
    }
    let mut owner: Vec<Option<usize>> = vec![None; alphabet_size];
    for (c, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            return Err(ModelError::EmptyCell { cell: c });
        }
        for &index in cell {
            if index >= alphabet_size {
                return Err(ModelError::IndexOutOfRange {
                    cell: c,
                    index,
                    size: alphabet_size,
                });
            }
            match owner[index] {
                Some(first) => {
                    return Err(ModelError::OverlappingCells {
                        index,
                        first,
                        second: c,
                    })
                }
                None => owner[index] = Some(c),
            }
        }
    }
    let missing: Vec<usize> = (0..alphabet_size).filter(|&i| owner[i].is_none()).collect();
    if !missing.is_empty() {
        return Err(ModelError::IncompleteCover { missing });
    }
    Ok(())
}

/// An ordered partition of an alphabet into synonymous cells.
///
/// Cell order is meaningful (it indexes the quotient alphabet); the order of
/// symbol indices inside a cell is not, and is normalized to ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SynonymousPartition {
    alphabet: Alphabet,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl SynonymousPartition {
    pub fn new(alphabet: Alphabet, mut cells: Vec<Vec<usize>>) -> Result<Self> {
        validate_partition(alphabet.size(), &cells)?;
        for cell in &mut cells {
            cell.sort_unstable();
        }
        let mut cell_of = vec![0; alphabet.size()];
        for (c, cell) in cells.iter().enumerate() {
            for &index in cell {
                cell_of[index] = c;
            }
        }
        Ok(SynonymousPartition {
            alphabet,
            cells,
            cell_of,
        })
    }

    /// The identity partition: every symbol is its own cell.
    pub fn singletons(alphabet: Alphabet) -> Self {
        let cells = (0..alphabet.size()).map(|i| vec![i]).collect();
        SynonymousPartition::new(alphabet, cells).expect("singleton cells always valid")
    }

    /// The trivial partition: one cell holding the whole alphabet.
    pub fn single_cell(alphabet: Alphabet) -> Self {
        let cells = vec![(0..alphabet.size()).collect()];
        SynonymousPartition::new(alphabet, cells).expect("single cell always valid")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Index of the cell containing symbol `index`.
    pub fn cell_of(&self, index: usize) -> usize {
        self.cell_of[index]
    }

    pub fn is_singletons(&self) -> bool {
        self.cells.len() == self.alphabet.size()
    }

    /// Quotient alphabet with one label per cell, built by joining member
    /// labels. Falls back to positional labels if the joins collide.
    pub fn quotient_alphabet(&self) -> Alphabet {
        let labels: Vec<String> = self
            .cells
            .iter()
            .map(|cell| {
                let parts: Vec<&str> = cell.iter().map(|&i| self.alphabet.label(i)).collect();
                parts.join("|")
            })
            .collect();
        Alphabet::new(labels).unwrap_or_else(|_| Alphabet::indexed("cell", self.cells.len()))
    }
}

/// A distribution together with a synonymous partition of its alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticVariable {
    dist: Distribution,
    partition: SynonymousPartition,
}

impl SemanticVariable {
    pub fn new(dist: Distribution, partition: SynonymousPartition) -> Result<Self> {
        if dist.alphabet() != partition.alphabet() {
            return Err(ModelError::AlphabetMismatch(
                "distribution and partition must share one alphabet".into(),
            ));
        }
        Ok(SemanticVariable { dist, partition })
    }

    pub fn dist(&self) -> &Distribution {
        &self.dist
    }

    pub fn partition(&self) -> &SynonymousPartition {
        &self.partition
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.dist.alphabet()
    }
}

/// Cell masses of a semantic variable: the distribution of the quotient
/// variable, `q(cell) = sum of p(symbol) over the cell's members`.
pub fn semantic_marginal(sv: &SemanticVariable) -> Distribution {
    let mut masses = vec![0.0; sv.partition().cell_count()];
    for (i, &p) in sv.dist().probs().iter().enumerate() {
        masses[sv.partition().cell_of(i)] += p;
    }
    Distribution::new(sv.partition().quotient_alphabet(), masses)
        .expect("cell masses of a valid distribution form a distribution")
}

// ---------------------------------------------------------------------------
// Joint models
// ---------------------------------------------------------------------------

/// A joint distribution over two partitioned alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    row_partition: SynonymousPartition,
    col_partition: SynonymousPartition,
    probs: Vec<Vec<f64>>,
}

impl JointModel {
    pub fn new(
        row_partition: SynonymousPartition,
        col_partition: SynonymousPartition,
        mut probs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let rows = row_partition.alphabet().size();
        let cols = col_partition.alphabet().size();
        if probs.len() != rows {
            return Err(ModelError::LengthMismatch {
                expected: rows,
                got: probs.len(),
            });
        }
        for (r, row) in probs.iter().enumerate() {
            if row.len() != cols {
                return Err(ModelError::RaggedMatrix {
                    row: r,
                    expected: cols,
                    got: row.len(),
                });
            }
            for (c, &value) in row.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(ModelError::InvalidProbability {
                        index: r * cols + c,
                        value,
                    });
                }
            }
        }
        let sum: f64 = probs.iter().flatten().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ModelError::NotNormalized { sum });
        }
        for row in &mut probs {
            for p in row {
                *p /= sum;
            }
        }
        Ok(JointModel {
            row_partition,
            col_partition,
            probs,
        })
    }

    /// Builds the joint `p(x) * w(y|x)` from an input variable and a channel.
    pub fn from_input_and_channel(
        input: &SemanticVariable,
        channel: &Channel,
        output_partition: SynonymousPartition,
    ) -> Result<Self> {
        if input.alphabet() != channel.input_alphabet() {
            return Err(ModelError::AlphabetMismatch(
                "input variable and channel input must share one alphabet".into(),
            ));
        }
        if output_partition.alphabet() != channel.output_alphabet() {
            return Err(ModelError::AlphabetMismatch(
                "output partition and channel output must share one alphabet".into(),
            ));
        }
        let probs = channel
            .rows()
            .iter()
            .zip(input.dist().probs())
            .map(|(row, &px)| row.iter().map(|&w| px * w).collect())
            .collect();
        JointModel::new(input.partition().clone(), output_partition, probs)
    }

    pub fn rows(&self) -> usize {
        self.row_partition.alphabet().size()
    }

    pub fn cols(&self) -> usize {
        self.col_partition.alphabet().size()
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i][j]
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn row_partition(&self) -> &SynonymousPartition {
        &self.row_partition
    }

    pub fn col_partition(&self) -> &SynonymousPartition {
        &self.col_partition
    }

    pub fn row_marginal(&self) -> Distribution {
        let probs = self.probs.iter().map(|row| row.iter().sum()).collect();
        Distribution::new(self.row_partition.alphabet().clone(), probs)
            .expect("marginal of a valid joint is a distribution")
    }

    pub fn col_marginal(&self) -> Distribution {
        let mut probs = vec![0.0; self.cols()];
        for row in &self.probs {
            for (j, &p) in row.iter().enumerate() {
                probs[j] += p;
            }
        }
        Distribution::new(self.col_partition.alphabet().clone(), probs)
            .expect("marginal of a valid joint is a distribution")
    }

    pub fn row_variable(&self) -> SemanticVariable {
        SemanticVariable::new(self.row_marginal(), self.row_partition.clone())
            .expect("row marginal shares the row alphabet")
    }

    pub fn col_variable(&self) -> SemanticVariable {
        SemanticVariable::new(self.col_marginal(), self.col_partition.clone())
            .expect("col marginal shares the col alphabet")
    }

    /// Flattens the joint into a single semantic variable over the pair
    /// alphabet (row-major), partitioned by the product partition.
    pub fn pair_variable(&self) -> SemanticVariable {
        let cols = self.cols();
        let mut labels = Vec::with_capacity(self.rows() * cols);
        for i in 0..self.rows() {
            for j in 0..cols {
                labels.push(format!(
                    "({},{})",
                    self.row_partition.alphabet().label(i),
                    self.col_partition.alphabet().label(j)
                ));
            }
        }
        let alphabet =
            Alphabet::new(labels).unwrap_or_else(|_| Alphabet::indexed("pair", self.rows() * cols));
        let probs: Vec<f64> = self.probs.iter().flatten().copied().collect();
        let dist = Distribution::new(alphabet.clone(), probs)
            .expect("flattened joint is a distribution");
        let cells = product_cells(&self.row_partition, &self.col_partition, cols);
        let partition = SynonymousPartition::new(alphabet, cells)
            .expect("product of valid partitions is a valid partition");
        SemanticVariable::new(dist, partition).expect("built over one alphabet")
    }
}

fn product_cells(
    row: &SynonymousPartition,
    col: &SynonymousPartition,
    cols: usize,
) -> Vec<Vec<usize>> {
    let mut cells = Vec::with_capacity(row.cell_count() * col.cell_count());
    for row_cell in row.cells() {
        for col_cell in col.cells() {
            let mut members = Vec::with_capacity(row_cell.len() * col_cell.len());
            for &i in row_cell {
                for &j in col_cell {
                    members.push(i * cols + j);
                }
            }
            cells.push(members);
        }
    }
    cells
}

/// Product partition on the pair alphabet (row-major pair indexing): the cell
/// for semantic pair `(i_s, j_s)` is the Cartesian product of the two cells,
/// and cells are ordered row-major in `(i_s, j_s)`.
pub fn product_partition(
    row: &SynonymousPartition,
    col: &SynonymousPartition,
) -> SynonymousPartition {
    let cols = col.alphabet().size();
    let mut labels = Vec::with_capacity(row.alphabet().size() * cols);
    for i in 0..row.alphabet().size() {
        for j in 0..cols {
            labels.push(format!("({},{})", row.alphabet().label(i), col.alphabet().label(j)));
        }
    }
    let alphabet = Alphabet::new(labels)
        .unwrap_or_else(|_| Alphabet::indexed("pair", row.alphabet().size() * cols));
    SynonymousPartition::new(alphabet, product_cells(row, col, cols))
        .expect("product of valid partitions is a valid partition")
}

/// Cell-mass matrix of the product partition: entry `(i_s, j_s)` is the total
/// joint probability of the cell `U_is x V_js`.
pub fn joint_cell_mass(jm: &JointModel) -> Vec<Vec<f64>> {
    let mut mass = vec![vec![0.0; jm.col_partition().cell_count()]; jm.row_partition().cell_count()];
    for (i, row) in jm.probs().iter().enumerate() {
        let ci = jm.row_partition().cell_of(i);
        for (j, &p) in row.iter().enumerate() {
            mass[ci][jm.col_partition().cell_of(j)] += p;
        }
    }
    mass
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

/// A discrete memoryless channel: a row-stochastic matrix `w(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(input: Alphabet, output: Alphabet, mut rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != input.size() {
            return Err(ModelError::LengthMismatch {
                expected: input.size(),
                got: rows.len(),
            });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != output.size() {
                return Err(ModelError::RaggedMatrix {
                    row: r,
                    expected: output.size(),
                    got: row.len(),
                });
            }
            for (c, &value) in row.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(ModelError::InvalidProbability {
                        index: r * output.size() + c,
                        value,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(ModelError::RowNotNormalized { row: r, sum });
            }
        }
        for row in &mut rows {
            let sum: f64 = row.iter().sum();
            for w in row {
                *w /= sum;
            }
        }
        Ok(Channel {
            input,
            output,
            rows,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn binary_symmetric(p: f64) -> Self {
        Channel::new(
            Alphabet::indexed("x", 2),
            Alphabet::indexed("y", 2),
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        )
        .expect("BSC matrix is row-stochastic")
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::example_joint;

    fn abc() -> Alphabet {
        Alphabet::new(vec!["a", "b", "c"]).unwrap()
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert_eq!(
            Alphabet::new(vec!["a", "a"]).unwrap_err(),
            ModelError::DuplicateLabel("a".into())
        );
        assert_eq!(
            Alphabet::new(Vec::<String>::new()).unwrap_err(),
            ModelError::EmptyAlphabet
        );
    }

    #[test]
    fn distribution_renormalizes_within_tolerance() {
        let d = Distribution::new(abc(), vec![0.5, 0.3, 0.2 + 4e-10]).unwrap();
        let sum: f64 = d.probs().iter().sum();
        assert_eq!(sum, 1.0, "renormalization must be exact");
    }

    #[test]
    fn distribution_rejects_bad_vectors() {
        assert!(matches!(
            Distribution::new(abc(), vec![0.5, 0.3, 0.3]),
            Err(ModelError::NotNormalized { .. })
        ));
        assert!(matches!(
            Distribution::new(abc(), vec![0.5, -0.1, 0.6]),
            Err(ModelError::InvalidProbability { index: 1, .. })
        ));
        assert!(matches!(
            Distribution::new(abc(), vec![0.5, 0.5]),
            Err(ModelError::LengthMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(
            Distribution::new(abc(), vec![0.5, f64::NAN, 0.5]),
            Err(ModelError::InvalidProbability { .. })
        ));
    }

    #[test]
    fn zero_probability_symbols_are_kept() {
        let d = Distribution::new(abc(), vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(d.probs().len(), 3);
        assert_eq!(d.prob(1), 0.0);
    }

    #[test]
    fn validate_partition_reports_each_failure_mode() {
        assert_eq!(
            validate_partition(3, &[vec![0, 1], vec![]]).unwrap_err(),
            ModelError::EmptyCell { cell: 1 }
        );
        assert_eq!(
            validate_partition(3, &[vec![0, 1], vec![1, 2]]).unwrap_err(),
            ModelError::OverlappingCells { index: 1, first: 0, second: 1 }
        );
        assert_eq!(
            validate_partition(3, &[vec![0], vec![2]]).unwrap_err(),
            ModelError::IncompleteCover { missing: vec![1] }
        );
        assert_eq!(
            validate_partition(3, &[vec![0, 1], vec![2, 3]]).unwrap_err(),
            ModelError::IndexOutOfRange { cell: 1, index: 3, size: 3 }
        );
        assert!(validate_partition(3, &[vec![2, 0], vec![1]]).is_ok());
    }

    #[test]
    fn partition_normalizes_cell_member_order() {
        let p = SynonymousPartition::new(abc(), vec![vec![1, 0], vec![2]]).unwrap();
        assert_eq!(p.cells(), &[vec![0, 1], vec![2]]);
        assert_eq!(p.cell_of(0), 0);
        assert_eq!(p.cell_of(2), 1);
        assert_eq!(p.quotient_alphabet().labels(), &["a|b".to_string(), "c".to_string()]);
    }

    #[test]
    fn semantic_marginal_sums_cells() {
        let dist = Distribution::new(abc(), vec![0.2, 0.3, 0.5]).unwrap();
        let part = SynonymousPartition::new(abc(), vec![vec![0, 1], vec![2]]).unwrap();
        let sv = SemanticVariable::new(dist, part).unwrap();
        let q = semantic_marginal(&sv);
        assert!((q.prob(0) - 0.5).abs() < 1e-15);
        assert!((q.prob(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn semantic_variable_requires_matching_alphabets() {
        let dist = Distribution::new(abc(), vec![0.2, 0.3, 0.5]).unwrap();
        let other = Alphabet::new(vec!["x", "y", "z"]).unwrap();
        let part = SynonymousPartition::singletons(other);
        assert!(matches!(
            SemanticVariable::new(dist, part),
            Err(ModelError::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn product_partition_is_row_major_and_valid() {
        let row = SynonymousPartition::new(
            Alphabet::indexed("u", 4),
            vec![vec![0, 1], vec![2, 3]],
        )
        .unwrap();
        let col = SynonymousPartition::new(
            Alphabet::indexed("v", 3),
            vec![vec![0], vec![1, 2]],
        )
        .unwrap();
        let prod = product_partition(&row, &col);
        assert_eq!(prod.cell_count(), 4);
        // Cell (0,0) = {u0,u1} x {v0} -> pair indices {0*3+0, 1*3+0}.
        assert_eq!(prod.cells()[0], vec![0, 3]);
        // Cell (0,1) = {u0,u1} x {v1,v2} -> {1, 2, 4, 5}.
        assert_eq!(prod.cells()[1], vec![1, 2, 4, 5]);
        assert_eq!(prod.cells()[2], vec![6, 9]);
        assert!(validate_partition(12, prod.cells()).is_ok());
    }

    /// Joint cell masses for the running four-by-five example; the expected
    /// matrix is the hand-summed cell table.
    #[test]
    fn joint_cell_mass_matches_hand_summed_table() {
        let jm = example_joint();
        let mass = joint_cell_mass(&jm);
        let expected = [
            [0.15, 0.15, 0.20, 0.10],
            [0.15, 0.05, 0.00, 0.20],
        ];
        for i in 0..2 {
            for j in 0..4 {
                assert!(
                    (mass[i][j] - expected[i][j]).abs() < 1e-12,
                    "cell ({i},{j}): got {}, want {}",
                    mass[i][j],
                    expected[i][j]
                );
            }
        }
    }

    #[test]
    fn joint_cell_mass_rows_match_row_semantic_marginal() {
        let jm = example_joint();
        let mass = joint_cell_mass(&jm);
        let row_q = semantic_marginal(&jm.row_variable());
        for (i, row) in mass.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert!(
                (sum - row_q.prob(i)).abs() < 1e-12,
                "row {i} cell mass must match the row quotient marginal"
            );
        }
    }

    #[test]
    fn pair_variable_agrees_with_joint_cell_mass() {
        let jm = example_joint();
        let pair = jm.pair_variable();
        let q = semantic_marginal(&pair);
        let mass = joint_cell_mass(&jm);
        let flat: Vec<f64> = mass.iter().flatten().copied().collect();
        for (k, &m) in flat.iter().enumerate() {
            assert!((q.prob(k) - m).abs() < 1e-12, "pair cell {k}");
        }
    }

    #[test]
    fn channel_validates_rows() {
        let bad = Channel::new(
            Alphabet::indexed("x", 2),
            Alphabet::indexed("y", 2),
            vec![vec![0.6, 0.3], vec![0.5, 0.5]],
        );
        assert!(matches!(bad, Err(ModelError::RowNotNormalized { row: 0, .. })));
        let ok = Channel::binary_symmetric(0.1);
        assert_eq!(ok.prob(0, 1), 0.1);
    }

    #[test]
    fn joint_from_input_and_channel_multiplies_rows() {
        let input = SemanticVariable::new(
            Distribution::new(Alphabet::indexed("x", 2), vec![0.25, 0.75]).unwrap(),
            SynonymousPartition::singletons(Alphabet::indexed("x", 2)),
        )
        .unwrap();
        let ch = Channel::binary_symmetric(0.1);
        let out_part = SynonymousPartition::singletons(Alphabet::indexed("y", 2));
        let jm = JointModel::from_input_and_channel(&input, &ch, out_part).unwrap();
        assert!((jm.prob(0, 0) - 0.225).abs() < 1e-15);
        assert!((jm.prob(1, 0) - 0.075).abs() < 1e-15);
    }
}
