#![allow(dead_code)]

use mcf::homology::PersistenceDiagram;
use mcf::partitions::{Partition, ScaledPartitionSequence};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    mcf::synth::rng(seed, 99)
}

pub fn running_example() -> ScaledPartitionSequence {
    ScaledPartitionSequence::enumerated(vec![
        Partition::from_labels(&[0, 1, 2]),
        Partition::from_labels(&[0, 0, 1]),
        Partition::from_labels(&[0, 1, 1]),
        Partition::from_labels(&[0, 1, 0]),
        Partition::from_labels(&[0, 0, 0]),
    ])
    .unwrap()
}

pub fn random_partition(r: &mut ChaCha8Rng, n: usize) -> Partition {
    let c = r.gen_range(1..=n);
    let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..c)).collect();
    Partition::from_labels(&labels)
}

/// Integer-valued increasing scales, so sums and differences of scales are exact.
pub fn random_scales(r: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let mut t = r.gen_range(0..3) as f64;
    (0..m)
        .map(|_| {
            t += r.gen_range(1..=3) as f64;
            t
        })
        .collect()
}

pub fn random_sequence(r: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> ScaledPartitionSequence {
    let n = r.gen_range(2..=max_n);
    let m = r.gen_range(1..=max_m);
    let parts = (0..m).map(|_| random_partition(r, n)).collect();
    ScaledPartitionSequence::new(parts, random_scales(r, m)).unwrap()
}

/// Symmetric matrix of small integer distances (ties on purpose).
pub fn random_distances(r: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = r.gen_range(1..=20) as f64;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

pub fn random_diagram(r: &mut ChaCha8Rng, max_points: usize) -> PersistenceDiagram {
    let k = r.gen_range(0..=max_points);
    let points = (0..k)
        .map(|_| {
            let b: f64 = r.gen_range(0.0..10.0);
            (b, b + r.gen_range(0.0..5.0))
        })
        .collect();
    PersistenceDiagram::new(1, points)
}

/// Components of the union of all clusters up to each scale, by union-find.
pub fn beta0_oracle(seq: &ScaledPartitionSequence) -> Vec<usize> {
    let n = seq.n_points();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    seq.partitions()
        .iter()
        .map(|p| {
            for x in 0..n {
                for y in x + 1..n {
                    if p.same_cluster(x, y) {
                        let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                        parent[a] = b;
                    }
                }
            }
            (0..n).filter(|&x| find(&mut parent, x) == x).count()
        })
        .collect()
}

/// Average hierarchy from the union-find β₀.
pub fn average_hierarchy_oracle(seq: &ScaledPartitionSequence) -> f64 {
    let b = beta0_oracle(seq);
    let t = seq.scales();
    let m = t.len();
    let mut acc = 0.0;
    for i in 0..m - 1 {
        acc += b[i] as f64 / seq.partition(i).num_clusters() as f64 * (t[i + 1] - t[i]);
    }
    acc / (t[m - 1] - t[0])
}

fn injections(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    i: usize,
    used: &mut Vec<bool>,
    costs: &mut Vec<f64>,
    visit: &mut dyn FnMut(&[f64]),
    point: &dyn Fn((f64, f64), (f64, f64)) -> f64,
    diag: &dyn Fn((f64, f64)) -> f64,
) {
    if i == a.len() {
        let before = costs.len();
        for (j, &y) in b.iter().enumerate() {
            if !used[j] {
                costs.push(diag(y));
            }
        }
        visit(costs);
        costs.truncate(before);
        return;
    }
    costs.push(diag(a[i]));
    injections(a, b, i + 1, used, costs, visit, point, diag);
    costs.pop();
    for j in 0..b.len() {
        if !used[j] {
            used[j] = true;
            costs.push(point(a[i], b[j]));
            injections(a, b, i + 1, used, costs, visit, point, diag);
            costs.pop();
            used[j] = false;
        }
    }
}

/// Every partial matching of finite points (the rest go to the diagonal).
fn brute_force(
    a: &PersistenceDiagram,
    b: &PersistenceDiagram,
    point: &dyn Fn((f64, f64), (f64, f64)) -> f64,
    diag: &dyn Fn((f64, f64)) -> f64,
    mut visit: impl FnMut(&[f64]),
) {
    let fa: Vec<_> = a.finite().collect();
    let fb: Vec<_> = b.finite().collect();
    let mut used = vec![false; fb.len()];
    injections(&fa, &fb, 0, &mut used, &mut Vec::new(), &mut visit, point, diag);
}

pub fn brute_wasserstein(a: &PersistenceDiagram, b: &PersistenceDiagram, q: f64) -> f64 {
    let mut best = f64::INFINITY;
    brute_force(
        a,
        b,
        &|x, y| ((x.0 - y.0).abs().powf(q) + (x.1 - y.1).abs().powf(q)).powf(1.0 / q),
        &|x| (2.0 * ((x.1 - x.0) / 2.0).powf(q)).powf(1.0 / q),
        |costs| {
            let total: f64 = costs.iter().map(|c| c.powf(q)).sum();
            best = best.min(total.powf(1.0 / q));
        },
    );
    best
}

pub fn brute_bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    let mut best = f64::INFINITY;
    brute_force(
        a,
        b,
        &|x, y| (x.0 - y.0).abs().max((x.1 - y.1).abs()),
        &|x| (x.1 - x.0) / 2.0,
        |costs| best = best.min(costs.iter().copied().fold(0.0, f64::max)),
    );
    best
}
