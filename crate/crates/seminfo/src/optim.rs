//! Small optimization utilities shared by the solvers: Euclidean projection
//! onto the probability simplex, exhaustive simplex grids, and uniform
//! random simplex points.

use rand::Rng;

/// Projects `v` onto the probability simplex in Euclidean norm
/// (sort-and-threshold construction).
pub fn project_to_simplex(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n > 0);
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let mut cumulative = 0.0;
    let mut theta = sorted[0] - 1.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
    // The threshold makes the sum 1 up to rounding; renormalize exactly.
    let sum: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Visits every point of the simplex grid with coordinates `k/steps`,
/// i.e. all compositions of `steps` into `dim` nonnegative parts.
/// The number of points is `C(steps + dim - 1, dim - 1)`.
pub fn for_each_simplex_grid_point<F: FnMut(&[f64])>(dim: usize, steps: usize, mut f: F) {
    assert!(dim >= 1 && steps >= 1);
    let mut counts = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    visit_compositions(&mut counts, 0, steps, &mut |counts| {
        for (x, &c) in point.iter_mut().zip(counts.iter()) {
            *x = c as f64 / steps as f64;
        }
        f(&point);
    });
}

fn visit_compositions<F: FnMut(&[usize])>(
    counts: &mut Vec<usize>,
    pos: usize,
    remaining: usize,
    f: &mut F,
) {
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        f(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        visit_compositions(counts, pos + 1, remaining - c, f);
    }
}

/// A uniform random point of the simplex (Dirichlet(1, .., 1)), written
/// into `out`.
pub fn random_simplex_point<R: Rng>(rng: &mut R, out: &mut [f64]) {
    let mut sum = 0.0;
    for x in out.iter_mut() {
        // 1 - U avoids ln(0).
        *x = -(1.0 - rng.random::<f64>()).ln();
        sum += *x;
    }
    for x in out.iter_mut() {
        *x /= sum;
    }
}

/// Strict lexicographic order on equal-length slices; used to break ties
/// among equal-value optima deterministically.
pub fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_simplex(v: &[f64]) {
        assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)), "{v:?}");
        let sum: f64 = v.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "sum {sum}");
    }

    #[test]
    fn projection_fixes_points_already_on_the_simplex() {
        let mut v = vec![0.2, 0.5, 0.3];
        project_to_simplex(&mut v);
        for (got, want) in v.iter().zip([0.2, 0.5, 0.3]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_handles_exterior_points() {
        let mut v = vec![1.0, 1.0];
        project_to_simplex(&mut v);
        assert_simplex(&v);
        assert!((v[0] - 0.5).abs() < 1e-12);

        let mut v = vec![-1.0, 0.4, 3.0];
        project_to_simplex(&mut v);
        assert_simplex(&v);
        assert_eq!(v[0], 0.0, "strongly negative coordinate clips to zero");

        let mut v = vec![-5.0, -7.0];
        project_to_simplex(&mut v);
        assert_simplex(&v);
        assert_eq!(v[0], 1.0, "largest coordinate takes all mass");
    }

    #[test]
    fn projection_is_idempotent_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut v: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            project_to_simplex(&mut v);
            assert_simplex(&v);
            let again = {
                let mut w = v.clone();
                project_to_simplex(&mut w);
                w
            };
            for (a, b) in v.iter().zip(&again) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_point_count_is_the_stars_and_bars_number() {
        let mut count = 0usize;
        for_each_simplex_grid_point(3, 10, |p| {
            count += 1;
            assert_simplex(p);
        });
        // C(12, 2) = 66.
        assert_eq!(count, 66);

        let mut count = 0usize;
        for_each_simplex_grid_point(1, 7, |p| {
            count += 1;
            assert_eq!(p, [1.0]);
        });
        assert_eq!(count, 1);
    }

    #[test]
    fn grid_contains_vertices_and_uniform() {
        let mut has_vertex = false;
        let mut has_uniform = false;
        for_each_simplex_grid_point(4, 100, |p| {
            if p[3] == 1.0 {
                has_vertex = true;
            }
            if p.iter().all(|&x| (x - 0.25).abs() < 1e-12) {
                has_uniform = true;
            }
        });
        assert!(has_vertex && has_uniform);
    }

    #[test]
    fn random_simplex_points_are_valid_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut a = vec![0.0; 5];
        random_simplex_point(&mut rng, &mut a);
        assert_simplex(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut b = vec![0.0; 5];
        random_simplex_point(&mut rng, &mut b);
        assert_eq!(a, b, "same seed, same point");
    }

    #[test]
    fn lex_order_breaks_ties() {
        assert!(lex_less(&[0.1, 0.9], &[0.2, 0.8]));
        assert!(!lex_less(&[0.2, 0.8], &[0.1, 0.9]));
        assert!(!lex_less(&[0.5, 0.5], &[0.5, 0.5]));
        assert!(lex_less(&[0.5, 0.2, 0.3], &[0.5, 0.3, 0.2]));
    }
}
