//! Synthetic graphs and partition-sequence generators.
//!
//! These stand in for a community-detection sweep: the planted-interpolation
//! mode walks through a known list of partitions with controllable noise, so the
//! ground truth of every experiment is available. All randomness comes from
//! ChaCha8 seeded by `(seed, stream)`, so outputs are reproducible across runs
//! and platforms.

use std::fmt::Write as _;

use petgraph::unionfind::UnionFind;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::partitions::{Partition, ScaledPartitionSequence};

/// The generator used throughout: ChaCha8 keyed by `seed`, on stream `stream`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// A simple undirected graph on `0..n` with edges stored as sorted pairs `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    seed: u64,
}

impl RandomGraph {
    /// Edges are normalised to `u < v`, sorted and deduplicated.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, seed: u64) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {u}")));
            }
            if u.max(v) >= n {
                return Err(Error::IndexOutOfRange {
                    index: u.max(v),
                    len: n,
                });
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(RandomGraph {
            n,
            edges: norm,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Edge-list text, one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in &self.edges {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }
}

fn pair_from_index(mut idx: usize, n: usize) -> (usize, usize) {
    // row u holds the pairs (u, u+1..n)
    let mut u = 0;
    while idx >= n - 1 - u {
        idx -= n - 1 - u;
        u += 1;
    }
    (u, u + 1 + idx)
}

/// Uniformly random graph with exactly `m_edges` edges.
pub fn gen_er(n: usize, m_edges: usize, seed: u64) -> Result<RandomGraph> {
    let total = n * n.saturating_sub(1) / 2;
    if m_edges > total {
        return Err(Error::InvalidParameter(format!(
            "{m_edges} edges requested but a graph on {n} vertices has at most {total}"
        )));
    }
    let mut r = rng(seed, 0);
    let edges = sample(&mut r, total, m_edges)
        .into_iter()
        .map(|i| pair_from_index(i, n))
        .collect();
    RandomGraph::new(n, edges, seed)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    Ok(())
}

fn coin_flip_graph(
    n: usize,
    seed: u64,
    mut prob: impl FnMut(usize, usize) -> f64,
) -> Result<RandomGraph> {
    let mut r = rng(seed, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(prob(u, v)) {
                edges.push((u, v));
            }
        }
    }
    RandomGraph::new(n, edges, seed)
}

/// Stochastic block model with consecutive blocks of the given sizes.
pub fn gen_sbm(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<RandomGraph> {
    check_probability(p_in)?;
    check_probability(p_out)?;
    let labels: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat(b).take(s))
        .collect();
    coin_flip_graph(labels.len(), seed, |u, v| {
        if labels[u] == labels[v] {
            p_in
        } else {
            p_out
        }
    })
}

/// A chain of partitions, finest first, each refining the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedHierarchy {
    levels: Vec<Partition>,
}

impl PlantedHierarchy {
    pub fn new(levels: Vec<Partition>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("planted hierarchy without levels".into()));
        }
        for w in levels.windows(2) {
            if !w[0].refines(&w[1])? {
                return Err(Error::InvalidPartition(
                    "planted levels must each refine the next".into(),
                ));
            }
        }
        Ok(PlantedHierarchy { levels })
    }

    /// Level with `c` clusters puts point `i` in cluster `⌊i·c/n⌋`. Counts must
    /// decrease and each must be a multiple of the next for the levels to nest.
    pub fn uniform(n: usize, counts: &[usize]) -> Result<Self> {
        if counts.iter().any(|&c| c == 0 || c > n) {
            return Err(Error::InvalidParameter(format!(
                "cluster counts {counts:?} must lie in 1..={n}"
            )));
        }
        let levels = counts
            .iter()
            .map(|&c| {
                let labels: Vec<usize> = (0..n).map(|i| i * c / n).collect();
                Partition::from_labels(&labels)
            })
            .collect();
        Self::new(levels)
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    pub fn n_points(&self) -> usize {
        self.levels[0].len()
    }
}

/// Multiscale SBM. `probs[l]` is the edge probability for pairs whose finest
/// shared level is `l`; the last entry covers pairs sharing no level, so
/// `probs.len() == levels + 1`.
pub fn gen_msbm(planted: &PlantedHierarchy, probs: &[f64], seed: u64) -> Result<RandomGraph> {
    let levels = planted.levels();
    if probs.len() != levels.len() + 1 {
        return Err(Error::SizeMismatch {
            expected: levels.len() + 1,
            found: probs.len(),
        });
    }
    for &p in probs {
        check_probability(p)?;
    }
    coin_flip_graph(planted.n_points(), seed, |u, v| {
        let l = levels
            .iter()
            .position(|p| p.same_cluster(u, v))
            .unwrap_or(levels.len());
        probs[l]
    })
}

/// Independent, balanced random partitions with the given cluster counts.
pub fn random_levels(n: usize, counts: &[usize], seed: u64) -> Result<Vec<Partition>> {
    let mut r = rng(seed, 1);
    counts
        .iter()
        .map(|&c| {
            if c == 0 || c > n {
                return Err(Error::InvalidParameter(format!(
                    "cluster count {c} outside 1..={n}"
                )));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut r);
            let mut labels = vec![0; n];
            for (pos, &x) in order.iter().enumerate() {
                labels[x] = pos % c;
            }
            Ok(Partition::from_labels(&labels))
        })
        .collect()
}

/// Single-linkage clustering of a distance matrix. The scales are `0` followed
/// by the distinct merge heights; the partition at scale `s` is given by the
/// connected components of the pairs at distance `<= s`.
pub fn single_linkage(dist: &[Vec<f64>]) -> Result<ScaledPartitionSequence> {
    let n = dist.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty distance matrix".into()));
    }
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: row.len(),
            });
        }
        if row[i] != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "non-zero diagonal entry at {i}"
            )));
        }
        for (j, &d) in row.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "distance ({i}, {j}) = {d} is not finite and non-negative"
                )));
            }
            if d != dist[j][i] {
                return Err(Error::InvalidParameter(format!(
                    "distance matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (dist[i][j], i, j))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut uf = UnionFind::<usize>::new(n);
    let mut partitions = Vec::new();
    let mut scales = Vec::new();
    let mut k = 0;
    // scale 0 absorbs any zero-distance merges
    let mut level = 0.0;
    loop {
        let mut merged = false;
        while k < pairs.len() && pairs[k].0 <= level {
            merged |= uf.union(pairs[k].1, pairs[k].2);
            k += 1;
        }
        if merged || scales.is_empty() {
            let labels: Vec<usize> = (0..n).map(|x| uf.find(x)).collect();
            partitions.push(Partition::from_labels(&labels));
            scales.push(level);
        }
        match pairs.get(k) {
            Some(&(d, _, _)) => level = d,
            None => break,
        }
    }
    ScaledPartitionSequence::new(partitions, scales)
}

/// Configuration of the planted-interpolation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSweep {
    /// Partitions visited in order, one block of scales each. They need not nest.
    pub levels: Vec<Partition>,
    /// Per-point reassignment probability in the transition scales.
    pub noise: f64,
    /// Fraction of each block, at its start, spent in transition from the
    /// previous level; the rest of the block is the exact level.
    pub transition: f64,
    /// Start from the all-singletons partition: it is the first scale, and the
    /// first block transitions out of it. Otherwise the first block is exact.
    pub singletons_first: bool,
}

impl PlantedSweep {
    pub fn new(levels: Vec<Partition>, noise: f64) -> Self {
        PlantedSweep {
            levels,
            noise,
            transition: 0.5,
            singletons_first: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepMode {
    /// Connected components of the edges whose endpoints share at least `τ_m`
    /// common neighbours, with `τ_m` falling linearly from `κ_max + 1` (no edges)
    /// to `0` (all edges) over the scales.
    Components,
    PlantedInterpolation(PlantedSweep),
}

/// Builds one partition per scale from graph `g`.
///
/// In planted-interpolation mode the scales are cut into consecutive blocks,
/// one per level. The leading `round(len · transition)` scales of block `l`
/// interpolate from level `l − 1` towards level `l`: each point is, with
/// probability `noise`, reassigned to the level-`(l − 1)` cluster of a random
/// graph neighbour lying in its own level-`l` cluster (any member of that
/// cluster when it has no such neighbour). The remaining scales of the block
/// are level `l` itself. With nested levels every transition partition refines
/// level `l` but the transitions disagree with each other, so conflicts appear
/// inside a block and are all resolved at its first exact scale.
pub fn sweep_partitions(
    g: &RandomGraph,
    scales: &[f64],
    mode: &SweepMode,
    seed: u64,
) -> Result<ScaledPartitionSequence> {
    if scales.is_empty() {
        return Err(Error::InvalidSequence("sweep over no scales".into()));
    }
    let partitions = match mode {
        SweepMode::Components => components_sweep(g, scales.len()),
        SweepMode::PlantedInterpolation(cfg) => planted_sweep(g, scales.len(), cfg, seed)?,
    };
    ScaledPartitionSequence::new(partitions, scales.to_vec())
}

fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Partition {
    let mut uf = UnionFind::<usize>::new(n);
    for (u, v) in edges {
        uf.union(u, v);
    }
    let labels: Vec<usize> = (0..n).map(|x| uf.find(x)).collect();
    Partition::from_labels(&labels)
}

fn components_sweep(g: &RandomGraph, m: usize) -> Vec<Partition> {
    let adj = g.adjacency();
    let common: Vec<usize> = g
        .edges()
        .iter()
        .map(|&(u, v)| adj[u].iter().filter(|x| adj[v].binary_search(x).is_ok()).count())
        .collect();
    let top = common.iter().copied().max().unwrap_or(0) + 1;
    (0..m)
        .map(|i| {
            let tau = if m == 1 {
                0
            } else {
                top - ((i * top) as f64 / (m - 1) as f64).round() as usize
            };
            components(
                g.n(),
                g.edges()
                    .iter()
                    .zip(&common)
                    .filter(|(_, &c)| c >= tau)
                    .map(|(&e, _)| e),
            )
        })
        .collect()
}

fn planted_sweep(
    g: &RandomGraph,
    m: usize,
    cfg: &PlantedSweep,
    seed: u64,
) -> Result<Vec<Partition>> {
    check_probability(cfg.noise)?;
    check_probability(cfg.transition)?;
    let k = cfg.levels.len();
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!(
            "{k} levels cannot be spread over {m} scales"
        )));
    }
    for level in &cfg.levels {
        if level.len() != g.n() {
            return Err(Error::SizeMismatch {
                expected: g.n(),
                found: level.len(),
            });
        }
    }
    let adj = g.adjacency();
    let singletons = Partition::singletons(g.n());
    let mut r = rng(seed, 2);
    let mut out = Vec::with_capacity(m);
    for (l, level) in cfg.levels.iter().enumerate() {
        let (start, end) = (l * m / k, (l + 1) * m / k);
        let base = match l {
            0 if cfg.singletons_first => Some(&singletons),
            0 => None,
            _ => Some(&cfg.levels[l - 1]),
        };
        let steps = match base {
            Some(_) => ((end - start) as f64 * cfg.transition).round() as usize,
            None => 0,
        };
        for i in start..end {
            match base {
                Some(base) if i < start + steps => {
                    out.push(reassign(base, level, &adj, cfg.noise, &mut r))
                }
                _ => out.push(level.clone()),
            }
        }
    }
    if cfg.singletons_first {
        out[0] = singletons;
    }
    Ok(out)
}

/// `base` with each point moved, with probability `noise`, to the base cluster
/// of a random neighbour sharing its `target` cluster.
fn reassign(
    base: &Partition,
    target: &Partition,
    adj: &[Vec<usize>],
    noise: f64,
    r: &mut ChaCha8Rng,
) -> Partition {
    let members = target.clusters();
    let labels: Vec<usize> = (0..base.len())
        .map(|x| {
            if !r.gen_bool(noise) {
                return base.label(x);
            }
            let near: Vec<usize> = adj[x]
                .iter()
                .copied()
                .filter(|&y| target.same_cluster(x, y))
                .collect();
            let pool: Vec<usize> = if near.is_empty() {
                members[target.label(x)].iter().copied().filter(|&y| y != x).collect()
            } else {
                near
            };
            match pool.choose(r) {
                Some(&y) => base.label(y),
                None => base.label(x),
            }
        })
        .collect();
    Partition::from_labels(&labels)
}

/// Shifts every scale by an independent uniform draw from `(−ε, ε)`. Requires
/// `ε` below half the smallest gap so the order is preserved.
pub fn perturb_scales(
    seq: &ScaledPartitionSequence,
    epsilon: f64,
    seed: u64,
) -> Result<ScaledPartitionSequence> {
    let t = seq.scales();
    let min_gap = t
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if !(epsilon >= 0.0) || !epsilon.is_finite() || epsilon >= min_gap / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} must be non-negative and below half the smallest scale gap ({})",
            min_gap / 2.0
        )));
    }
    if epsilon == 0.0 {
        return Ok(seq.clone());
    }
    let mut r = rng(seed, 3);
    let scales = t
        .iter()
        .map(|&s| s + r.gen_range(-epsilon..epsilon))
        .collect();
    ScaledPartitionSequence::new(seq.partitions().to_vec(), scales)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtrations::build_cag;

    #[test]
    fn er_edge_counts() {
        let g = gen_er(270, 3473, 7).unwrap();
        assert_eq!(g.edges().len(), 3473);
        assert_eq!(gen_er(5, 10, 1).unwrap().edges().len(), 10);
        assert!(gen_er(5, 11, 1).is_err());
        assert_eq!(gen_er(40, 100, 9).unwrap(), gen_er(40, 100, 9).unwrap());
        assert_ne!(gen_er(40, 100, 9).unwrap(), gen_er(40, 100, 10).unwrap());
    }

    #[test]
    fn pair_indexing_covers_all_pairs() {
        let n = 6;
        let pairs: Vec<_> = (0..15).map(|i| pair_from_index(i, n)).collect();
        let expected: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn sbm_extremes_are_disjoint_cliques() {
        let g = gen_sbm(&[3, 4], 1.0, 0.0, 0).unwrap();
        assert_eq!(g.edges().len(), 3 + 6);
        assert!(gen_sbm(&[3], 1.5, 0.0, 0).is_err());
    }

    #[test]
    fn planted_uniform_levels_nest() {
        let h = PlantedHierarchy::uniform(90, &[27, 9, 3]).unwrap();
        let counts: Vec<_> = h.levels().iter().map(Partition::num_clusters).collect();
        assert_eq!(counts, vec![27, 9, 3]);
        assert!(PlantedHierarchy::uniform(10, &[3, 2]).is_err());
    }

    #[test]
    fn single_linkage_hand_example() {
        let d = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 2.0],
            vec![5.0, 2.0, 0.0],
        ];
        let seq = single_linkage(&d).unwrap();
        assert_eq!(seq.scales(), &[0.0, 1.0, 2.0]);
        assert_eq!(seq.partition(1), &Partition::from_labels(&[0, 0, 1]));
        assert!(seq.is_hierarchical());
        let cag = build_cag(&seq);
        assert_eq!(cag.weight(0, 2), Some(2.0));
        assert!(cag.is_ultrametric());

        let flat = single_linkage(&[vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(flat.scales(), &[0.0, 3.0]);
        assert!(single_linkage(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn noiseless_planted_sweep_is_the_levels() {
        let h = PlantedHierarchy::uniform(90, &[27, 9, 3]).unwrap();
        let g = gen_msbm(&h, &[0.9, 0.5, 0.2, 0.02], 4).unwrap();
        let scales: Vec<f64> = (0..60).map(f64::from).collect();
        let cfg = PlantedSweep::new(h.levels().to_vec(), 0.0);
        let seq = sweep_partitions(&g, &scales, &SweepMode::PlantedInterpolation(cfg), 1).unwrap();
        let mut distinct = seq.partitions().to_vec();
        distinct.dedup();
        assert_eq!(distinct, h.levels());
        assert!(seq.is_hierarchical());
    }

    #[test]
    fn light_noise_breaks_the_hierarchy() {
        let h = PlantedHierarchy::uniform(90, &[27, 9, 3]).unwrap();
        let g = gen_msbm(&h, &[0.9, 0.5, 0.2, 0.02], 4).unwrap();
        let scales: Vec<f64> = (0..60).map(f64::from).collect();
        let cfg = PlantedSweep::new(h.levels().to_vec(), 0.05);
        let seq = sweep_partitions(&g, &scales, &SweepMode::PlantedInterpolation(cfg), 1).unwrap();
        assert!(!seq.is_hierarchical());
        assert!(crate::measures::sequence_average_hierarchy(&seq).unwrap() < 1.0);
    }

    #[test]
    fn transitions_refine_the_target_level() {
        let h = PlantedHierarchy::uniform(30, &[3]).unwrap();
        let g = gen_sbm(&[10, 10, 10], 0.8, 0.05, 2).unwrap();
        let mut r = rng(5, 0);
        let base = Partition::singletons(30);
        for _ in 0..20 {
            let p = reassign(&base, &h.levels()[0], &g.adjacency(), 0.3, &mut r);
            assert!(p.refines(&h.levels()[0]).unwrap());
            assert!(p.num_clusters() < 30);
        }
    }

    #[test]
    fn singletons_first_starts_the_sweep() {
        let h = PlantedHierarchy::uniform(30, &[3]).unwrap();
        let g = gen_sbm(&[10, 10, 10], 0.8, 0.05, 2).unwrap();
        let mut cfg = PlantedSweep::new(h.levels().to_vec(), 0.3);
        cfg.singletons_first = true;
        let scales: Vec<f64> = (0..10).map(f64::from).collect();
        let seq = sweep_partitions(&g, &scales, &SweepMode::PlantedInterpolation(cfg), 3).unwrap();
        assert_eq!(seq.partition(0), &Partition::singletons(30));
        assert_eq!(seq.partition(9), &h.levels()[0]);
        let r = crate::homology::reduce(&crate::filtrations::build_mcf(&seq, 1).unwrap(), 2).unwrap();
        assert_eq!(r.betti_curve(0).unwrap().values()[0], 30);
        assert!(!seq.is_hierarchical());
    }

    #[test]
    fn components_sweep_coarsens() {
        let g = gen_sbm(&[10, 10], 0.7, 0.1, 3).unwrap();
        let scales: Vec<f64> = (0..8).map(f64::from).collect();
        let seq = sweep_partitions(&g, &scales, &SweepMode::Components, 0).unwrap();
        assert_eq!(seq.partition(0), &Partition::singletons(20));
        assert!(seq.is_hierarchical());
    }

    #[test]
    fn perturbation_bounds() {
        let seq = crate::partitions::tests::running_example();
        assert_eq!(perturb_scales(&seq, 0.0, 1).unwrap(), seq);
        let moved = perturb_scales(&seq, 0.3, 1).unwrap();
        for (a, b) in seq.scales().iter().zip(moved.scales()) {
            assert!((a - b).abs() < 0.3);
        }
        assert!(perturb_scales(&seq, 0.5, 1).is_err());
    }
}
