//! Upper bounds on the CMH statistic reachable by any descendant of a
//! pattern, used to cut subtrees that cannot contain testable patterns.
//!
//! Inside the region `x^i <= min(n1^i, n^i - n1^i)` the maximum attainable
//! statistic splits into a "left" branch (all `a^i = 0`) and a "right"
//! branch (all `a^i = x^i`). Over the box `0 <= z^i <= x^i` each branch is
//! maximised on a vertex, and the optimal vertex switches on exactly the
//! categories with the smallest sort keys. Sorting once per branch and
//! scanning prefixes therefore yields the exact maximum in `O(K log K)`.

use crate::error::{Error, Result};
use crate::stats::{chi2_sf, max_attainable_statistic, StratifiedCounts};

/// Largest K accepted by [`t_prune_bruteforce_vertices`].
pub const MAX_VERTEX_CATEGORIES: usize = 20;
/// Largest grid accepted by [`t_prune_bruteforce_grid`].
pub const MAX_GRID_POINTS: u64 = 1_000_000;

/// Something that can evaluate the prune bound for a vector of supports.
pub trait PruneBound {
    fn t_prune(&mut self, counts: &StratifiedCounts, x: &[u32]) -> f64;

    /// Vertex evaluations performed so far (brute-force bounds only).
    fn vertex_evaluations(&self) -> u64 {
        0
    }
}

/// Reusable buffers for [`PruneWorkspace::eval_t_prune`].
#[derive(Debug, Clone, Default)]
pub struct PruneWorkspace {
    beta_l: Vec<f64>,
    beta_r: Vec<f64>,
    idx_l: Vec<usize>,
    idx_r: Vec<usize>,
    left: Vec<f64>,
    right: Vec<f64>,
    var: Vec<f64>,
}

impl PruneWorkspace {
    pub fn with_capacity(k: usize) -> Self {
        Self {
            beta_l: Vec::with_capacity(k),
            beta_r: Vec::with_capacity(k),
            idx_l: Vec::with_capacity(k),
            idx_r: Vec::with_capacity(k),
            left: Vec::with_capacity(k),
            right: Vec::with_capacity(k),
            var: Vec::with_capacity(k),
        }
    }

    /// Exact maximum of the attainable CMH statistic over `0 <= z <= x`.
    ///
    /// Requires `x^i <= min(n1^i, n^i - n1^i)` for every category; callers go
    /// through [`is_not_prunable`], which short-circuits outside that region.
    pub fn eval_t_prune(&mut self, counts: &StratifiedCounts, x: &[u32]) -> f64 {
        let k = counts.categories();
        debug_assert_eq!(x.len(), k);
        debug_assert!((0..k).all(|i| x[i] <= counts.prune_cap(i)));

        self.beta_l.clear();
        self.beta_r.clear();
        self.left.clear();
        self.right.clear();
        self.var.clear();
        let gamma = counts.gamma();
        for (i, &xi) in x.iter().enumerate() {
            let n = counts.n()[i];
            let absent = (n - xi) as f64 / n as f64;
            self.beta_l.push((1.0 - gamma[i]) * absent);
            self.beta_r.push(gamma[i] * absent);
            // |a_min - gamma x| with a_min = 0, and a_max - gamma x with a_max = x.
            self.left.push(-counts.deviation(i, xi, 0));
            self.right.push(counts.deviation(i, xi, xi));
            self.var.push(counts.variance_term(i, xi));
        }

        argsort(&self.beta_l, &mut self.idx_l);
        argsort(&self.beta_r, &mut self.idx_r);

        let h_l = best_prefix(&self.idx_l, &self.left, &self.var);
        let h_r = best_prefix(&self.idx_r, &self.right, &self.var);
        h_l.max(h_r)
    }
}

impl PruneBound for PruneWorkspace {
    fn t_prune(&mut self, counts: &StratifiedCounts, x: &[u32]) -> f64 {
        self.eval_t_prune(counts, x)
    }
}

/// Ascending argsort, ties broken by category index.
fn argsort(keys: &[f64], idx: &mut Vec<usize>) {
    idx.clear();
    idx.extend(0..keys.len());
    idx.sort_unstable_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
}

fn best_prefix(order: &[usize], num: &[f64], var: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut v = 0.0;
    let mut best = 0.0f64;
    for &i in order {
        s += num[i];
        v += var[i];
        if v > 0.0 {
            best = best.max(s * s / v);
        }
    }
    best
}

/// Brute-force prune bound over the `2^K` vertices `z^i in {0, x^i}`.
#[derive(Debug, Clone, Default)]
pub struct VertexOracle {
    evaluations: u64,
    z: Vec<u32>,
}

impl VertexOracle {
    pub fn new() -> Self {
        Self::default()
    }
}

impl PruneBound for VertexOracle {
    fn t_prune(&mut self, counts: &StratifiedCounts, x: &[u32]) -> f64 {
        let k = x.len();
        assert!(k <= MAX_VERTEX_CATEGORIES, "vertex enumeration with K = {k}");
        self.z.clear();
        self.z.resize(k, 0);
        let mut best = 0.0f64;
        for mask in 0u32..(1u32 << k) {
            for (i, zi) in self.z.iter_mut().enumerate() {
                *zi = if mask >> i & 1 == 1 { x[i] } else { 0 };
            }
            best = best.max(max_attainable_statistic(counts, &self.z));
        }
        self.evaluations += 1u64 << k;
        best
    }

    fn vertex_evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// Never prunes: every subtree is explored.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPruning;

impl PruneBound for NoPruning {
    fn t_prune(&mut self, _counts: &StratifiedCounts, _x: &[u32]) -> f64 {
        f64::INFINITY
    }
}

/// Maximum attainable statistic over all vertices `z^i in {0, x^i}`.
pub fn t_prune_bruteforce_vertices(counts: &StratifiedCounts, x: &[u32]) -> Result<f64> {
    if x.len() > MAX_VERTEX_CATEGORIES {
        return Err(Error::BruteForceTooLarge {
            what: "category count",
            value: x.len() as u64,
            limit: MAX_VERTEX_CATEGORIES as u64,
        });
    }
    Ok(VertexOracle::new().t_prune(counts, x))
}

/// Maximum attainable statistic over the full integer box `0 <= z^i <= x^i`.
pub fn t_prune_bruteforce_grid(counts: &StratifiedCounts, x: &[u32]) -> Result<f64> {
    if x.len() > 3 {
        return Err(Error::BruteForceTooLarge {
            what: "category count",
            value: x.len() as u64,
            limit: 3,
        });
    }
    let points = x
        .iter()
        .try_fold(1u64, |acc, &xi| acc.checked_mul(xi as u64 + 1))
        .unwrap_or(u64::MAX);
    if points > MAX_GRID_POINTS {
        return Err(Error::BruteForceTooLarge {
            what: "grid size",
            value: points,
            limit: MAX_GRID_POINTS,
        });
    }
    let mut z = vec![0u32; x.len()];
    let mut best = 0.0f64;
    loop {
        best = best.max(max_attainable_statistic(counts, &z));
        // odometer increment
        let mut i = 0;
        loop {
            if i == z.len() {
                return Ok(best);
            }
            if z[i] < x[i] {
                z[i] += 1;
                break;
            }
            z[i] = 0;
            i += 1;
        }
    }
}

/// Whether the children of a pattern with supports `x` may still contain
/// patterns testable at level `delta`.
pub fn is_not_prunable<B: PruneBound + ?Sized>(
    bound: &mut B,
    counts: &StratifiedCounts,
    x: &[u32],
    delta: f64,
) -> bool {
    if x.iter().enumerate().any(|(i, &xi)| xi > counts.prune_cap(i)) {
        return true;
    }
    chi2_sf(bound.t_prune(counts, x)) <= delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn counts(n: &[u32], n1: &[u32]) -> StratifiedCounts {
        StratifiedCounts::new(n.to_vec(), n1.to_vec()).unwrap()
    }

    fn random_region_instance(rng: &mut impl Rng, max_k: usize, max_n: u32) -> (StratifiedCounts, Vec<u32>) {
        let k = rng.gen_range(1..=max_k);
        let n: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=max_n)).collect();
        let n1: Vec<u32> = n.iter().map(|&n| rng.gen_range(0..=n)).collect();
        let c = counts(&n, &n1);
        let x = (0..k).map(|i| rng.gen_range(0..=c.prune_cap(i))).collect();
        (c, x)
    }

    #[test]
    fn single_category_example() {
        let c = counts(&[4], &[2]);
        let mut ws = PruneWorkspace::default();
        assert_eq!(ws.eval_t_prune(&c, &[2]), 4.0);
        assert_eq!(ws.eval_t_prune(&c, &[0]), 0.0);
        for x in 0..=2 {
            let fast = ws.eval_t_prune(&c, &[x]);
            assert_eq!(fast, t_prune_bruteforce_vertices(&c, &[x]).unwrap());
        }
    }

    #[test]
    fn zero_supports_give_zero() {
        let c = counts(&[5, 7, 9], &[2, 3, 4]);
        let mut ws = PruneWorkspace::default();
        assert_eq!(ws.eval_t_prune(&c, &[0, 0, 0]), 0.0);
        assert_eq!(t_prune_bruteforce_vertices(&c, &[0, 0, 0]).unwrap(), 0.0);
        assert_eq!(t_prune_bruteforce_grid(&counts(&[5], &[2]), &[0]).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_two_category_vertices() {
        // (0,0) -> 0, (2,0) and (0,2) -> 4, (2,2) -> 8 by exact evaluation.
        let c = counts(&[4, 4], &[2, 2]);
        assert_eq!(t_prune_bruteforce_vertices(&c, &[2, 2]).unwrap(), 8.0);
        let mut ws = PruneWorkspace::default();
        assert_eq!(ws.eval_t_prune(&c, &[2, 2]), 8.0);
    }

    #[test]
    fn unit_grid_equals_vertices() {
        let c = counts(&[6, 5, 9], &[2, 3, 4]);
        let g = t_prune_bruteforce_grid(&c, &[1, 1, 1]).unwrap();
        let v = t_prune_bruteforce_vertices(&c, &[1, 1, 1]).unwrap();
        assert_eq!(g, v);
    }

    #[test]
    fn brute_force_guards() {
        let c = StratifiedCounts::new(vec![4; 21], vec![2; 21]).unwrap();
        assert!(t_prune_bruteforce_vertices(&c, &[1; 21]).is_err());
        let c = StratifiedCounts::new(vec![4; 4], vec![2; 4]).unwrap();
        assert!(t_prune_bruteforce_grid(&c, &[1; 4]).is_err());
        let c = counts(&[4000, 4000], &[2000, 2000]);
        assert!(t_prune_bruteforce_grid(&c, &[1500, 1500]).is_err());
    }

    #[test]
    fn fast_matches_vertices_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ws = PruneWorkspace::default();
        for _ in 0..2000 {
            let (c, x) = random_region_instance(&mut rng, 10, 30);
            let fast = ws.eval_t_prune(&c, &x);
            let slow = t_prune_bruteforce_vertices(&c, &x).unwrap();
            assert!((fast - slow).abs() <= 1e-10 * slow.max(1e-300), "{fast} vs {slow} at {x:?}");
        }
    }

    #[test]
    fn grid_lies_on_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let (c, x) = random_region_instance(&mut rng, 3, 8);
            let g = t_prune_bruteforce_grid(&c, &x).unwrap();
            let v = t_prune_bruteforce_vertices(&c, &x).unwrap();
            assert_eq!(g, v, "{x:?} {:?} {:?}", c.n(), c.n1());
        }
    }

    #[test]
    fn identical_sort_keys_fail_the_oracle() {
        // Using the left keys for the right branch as well must disagree
        // with the vertex oracle somewhere.
        fn literal(counts: &StratifiedCounts, x: &[u32]) -> f64 {
            let k = x.len();
            let gamma = counts.gamma();
            let keys: Vec<f64> = (0..k)
                .map(|i| (1.0 - gamma[i]) * (counts.n()[i] - x[i]) as f64 / counts.n()[i] as f64)
                .collect();
            let mut idx = Vec::new();
            argsort(&keys, &mut idx);
            let left: Vec<f64> = (0..k).map(|i| -counts.deviation(i, x[i], 0)).collect();
            let right: Vec<f64> = (0..k).map(|i| counts.deviation(i, x[i], x[i])).collect();
            let var: Vec<f64> = (0..k).map(|i| counts.variance_term(i, x[i])).collect();
            best_prefix(&idx, &left, &var).max(best_prefix(&idx, &right, &var))
        }
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut mismatches = 0;
        for _ in 0..2000 {
            let (c, x) = random_region_instance(&mut rng, 6, 30);
            let slow = t_prune_bruteforce_vertices(&c, &x).unwrap();
            if (literal(&c, &x) - slow).abs() > 1e-10 * slow.max(1e-300) {
                mismatches += 1;
            }
        }
        assert!(mismatches > 0);
    }

    #[test]
    fn bound_dominates_sub_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut ws = PruneWorkspace::default();
        for _ in 0..500 {
            let (c, x) = random_region_instance(&mut rng, 8, 30);
            let bound = ws.eval_t_prune(&c, &x);
            for _ in 0..20 {
                let sub: Vec<u32> = x.iter().map(|&xi| rng.gen_range(0..=xi)).collect();
                let t = max_attainable_statistic(&c, &sub);
                assert!(t <= bound * (1.0 + 1e-12), "{t} > {bound}");
            }
        }
    }

    #[test]
    fn workspace_reuse_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut ws = PruneWorkspace::with_capacity(10);
        let mut fresh_values = Vec::new();
        let instances: Vec<_> = (0..200).map(|_| random_region_instance(&mut rng, 10, 30)).collect();
        for (c, x) in &instances {
            fresh_values.push(PruneWorkspace::default().eval_t_prune(c, x).to_bits());
        }
        for ((c, x), fresh) in instances.iter().zip(&fresh_values) {
            assert_eq!(ws.eval_t_prune(c, x).to_bits(), *fresh);
            assert_eq!(ws.eval_t_prune(c, x).to_bits(), *fresh);
        }
    }

    #[test]
    fn prunability_examples() {
        let c = counts(&[4], &[2]);
        let mut ws = PruneWorkspace::default();
        assert!(!is_not_prunable(&mut ws, &c, &[2], 0.01));
        assert!(is_not_prunable(&mut ws, &c, &[2], 1.0));
        assert!(is_not_prunable(&mut ws, &c, &[3], 1e-300));
        let c = counts(&[10, 10], &[2, 5]);
        assert!(is_not_prunable(&mut ws, &c, &[3, 0], 1e-300));
        assert!(is_not_prunable(&mut NoPruning, &c, &[1, 1], 1e-300));
    }

    #[test]
    fn vertex_counter() {
        let c = StratifiedCounts::new(vec![10; 5], vec![4; 5]).unwrap();
        let mut oracle = VertexOracle::new();
        oracle.t_prune(&c, &[1, 2, 3, 4, 0]);
        oracle.t_prune(&c, &[0; 5]);
        assert_eq!(oracle.vertex_evaluations(), 64);
    }
}
