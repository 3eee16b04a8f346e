//! Shared fixtures and generators for the test suites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{
    Alphabet, Channel, Distribution, JointModel, SemanticVariable, SynonymousPartition,
};

/// The running 4x5 joint example: rows u1..u4 with cells {u1,u2} and
/// {u3,u4}, columns v1..v5 with cells {v1}, {v2}, {v3} and {v4,v5}.
pub(crate) fn example_joint() -> JointModel {
    let row = SynonymousPartition::new(
        Alphabet::new(vec!["u1", "u2", "u3", "u4"]).unwrap(),
        vec![vec![0, 1], vec![2, 3]],
    )
    .unwrap();
    let col = SynonymousPartition::new(
        Alphabet::new(vec!["v1", "v2", "v3", "v4", "v5"]).unwrap(),
        vec![vec![0], vec![1], vec![2], vec![3, 4]],
    )
    .unwrap();
    JointModel::new(
        row,
        col,
        vec![
            vec![0.05, 0.10, 0.15, 0.00, 0.00],
            vec![0.10, 0.05, 0.05, 0.10, 0.00],
            vec![0.10, 0.05, 0.00, 0.00, 0.05],
            vec![0.05, 0.00, 0.00, 0.10, 0.05],
        ],
    )
    .unwrap()
}

/// Row marginal of [`example_joint`]: p = (0.3, 0.3, 0.2, 0.2) with cells
/// {u1,u2}, {u3,u4}.
pub(crate) fn example_source() -> SemanticVariable {
    example_joint().row_variable()
}

/// A random point of the `n`-simplex (Dirichlet(1, .., 1)).
pub(crate) fn rand_dist<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut probs: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    probs
}

/// Like [`rand_dist`], but sometimes zeroes one entry (zero-probability
/// symbols are part of the contract and must stay exercised).
pub(crate) fn rand_dist_with_zeros<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut probs = rand_dist(rng, n);
    if n >= 3 && rng.random::<f64>() < 0.3 {
        let k = rng.random_range(0..n);
        probs[k] = 0.0;
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
    }
    probs
}

/// A uniformly random partition of `{0..n-1}` into a random number of
/// nonempty cells.
pub(crate) fn rand_cells<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<usize>> {
    let k = rng.random_range(1..=n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cells: Vec<Vec<usize>> = (0..k).map(|c| vec![order[c]]).collect();
    for &index in &order[k..] {
        cells[rng.random_range(0..k)].push(index);
    }
    cells
}

pub(crate) fn rand_semantic_variable<R: Rng>(rng: &mut R, n: usize) -> SemanticVariable {
    let alphabet = Alphabet::indexed("u", n);
    let dist = Distribution::new(alphabet.clone(), rand_dist_with_zeros(rng, n)).unwrap();
    let partition = SynonymousPartition::new(alphabet, rand_cells(rng, n)).unwrap();
    SemanticVariable::new(dist, partition).unwrap()
}

pub(crate) fn rand_joint<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> JointModel {
    let row_alphabet = Alphabet::indexed("u", rows);
    let col_alphabet = Alphabet::indexed("v", cols);
    let flat = rand_dist_with_zeros(rng, rows * cols);
    let probs: Vec<Vec<f64>> = flat.chunks(cols).map(|c| c.to_vec()).collect();
    JointModel::new(
        SynonymousPartition::new(row_alphabet, rand_cells(rng, rows)).unwrap(),
        SynonymousPartition::new(col_alphabet, rand_cells(rng, cols)).unwrap(),
        probs,
    )
    .unwrap()
}

pub(crate) fn rand_channel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Channel {
    let rows = (0..inputs).map(|_| rand_dist(rng, outputs)).collect();
    Channel::new(
        Alphabet::indexed("x", inputs),
        Alphabet::indexed("y", outputs),
        rows,
    )
    .unwrap()
}
