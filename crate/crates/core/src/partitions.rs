//! Partitions of a finite point set and scale-indexed sequences of partitions.
//!
//! A [`Partition`] is stored as a label vector normalised to `0..c` by order of
//! first occurrence, so two partitions compare equal exactly when they induce the
//! same equivalence relation on the points.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the sequence length accepted by [`ReorderStrategy::Exhaustive`].
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 8;

/// A partition of the points `0..n` into non-empty, pairwise disjoint clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl Partition {
    /// Builds a partition from arbitrary per-point labels. Labels are renumbered
    /// to `0..c` in order of first occurrence.
    pub fn from_labels<L: Hash + Eq + Clone>(raw: &[L]) -> Self {
        let mut map: HashMap<L, usize> = HashMap::with_capacity(raw.len());
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(l.clone()).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            num_clusters: map.len(),
        }
    }

    /// Every point in its own cluster.
    pub fn singletons(n: usize) -> Self {
        Partition {
            labels: (0..n).collect(),
            num_clusters: n,
        }
    }

    /// The one-cluster partition `{X}`.
    pub fn trivial(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            num_clusters: usize::from(n > 0),
        }
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, point: usize) -> usize {
        self.labels[point]
    }

    /// Whether `x` and `y` lie in the same cluster.
    pub fn same_cluster(&self, x: usize, y: usize) -> bool {
        self.labels[x] == self.labels[y]
    }

    /// Materialises the clusters as sorted member lists, indexed by label.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut clusters = vec![Vec::new(); self.num_clusters];
        for (point, &label) in self.labels.iter().enumerate() {
            clusters[label].push(point);
        }
        clusters
    }

    /// `true` iff every cluster of `self` is contained in some cluster of `other`.
    pub fn refines(&self, other: &Partition) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let mut image = vec![usize::MAX; self.num_clusters];
        for (&mine, &theirs) in self.labels.iter().zip(&other.labels) {
            if image[mine] == usize::MAX {
                image[mine] = theirs;
            } else if image[mine] != theirs {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Partitions `P^{t_1}, …, P^{t_M}` indexed by strictly increasing scales.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPartitionSequence {
    partitions: Vec<Partition>,
    scales: Vec<f64>,
}

impl ScaledPartitionSequence {
    /// Validates and builds a sequence. Scales must be finite and strictly
    /// increasing; every partition must cover the same number of points.
    pub fn new(partitions: Vec<Partition>, scales: Vec<f64>) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::InvalidSequence("no partitions".into()));
        }
        if partitions.len() != scales.len() {
            return Err(Error::InvalidSequence(format!(
                "{} partitions but {} scales",
                partitions.len(),
                scales.len()
            )));
        }
        if let Some(t) = scales.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidSequence(format!("non-finite scale {t}")));
        }
        if let Some(w) = scales.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSequence(format!(
                "scales must be strictly increasing ({} is followed by {})",
                w[0], w[1]
            )));
        }
        let n = partitions[0].len();
        if let Some(p) = partitions.iter().find(|p| p.len() != n) {
            return Err(Error::SizeMismatch {
                expected: n,
                found: p.len(),
            });
        }
        Ok(ScaledPartitionSequence { partitions, scales })
    }

    /// Integer-indexed sequence with scales `1, 2, …, M`.
    pub fn enumerated(partitions: Vec<Partition>) -> Result<Self> {
        let scales = (1..=partitions.len()).map(|m| m as f64).collect();
        Self::new(partitions, scales)
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.partitions[0].len()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn partition(&self, m: usize) -> &Partition {
        &self.partitions[m]
    }

    pub fn scale(&self, m: usize) -> f64 {
        self.scales[m]
    }

    /// Index of the partition in effect at scale `t`: the last `m` with
    /// `t_m <= t`, or the first partition when `t < t_1`.
    pub fn index_at(&self, t: f64) -> usize {
        self.scales.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// The piecewise-constant, left-closed scale function `θ(t)`.
    pub fn at(&self, t: f64) -> &Partition {
        &self.partitions[self.index_at(t)]
    }

    /// `true` iff every earlier partition (including `m` itself) refines partition `m`.
    /// Indices are 0-based.
    pub fn is_non_fractured(&self, m: usize) -> Result<bool> {
        if m >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.len(),
            });
        }
        let target = &self.partitions[m];
        for p in &self.partitions[..m] {
            if !p.refines(target)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `true` iff every partition of the sequence is non-fractured.
    pub fn is_hierarchical(&self) -> bool {
        (0..self.len()).all(|m| self.is_non_fractured(m).unwrap_or(false))
    }

    /// Returns the sequence with its partitions rearranged so that position `i`
    /// holds the original partition `perm[i]`. Scales stay in place.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        let partitions = perm.iter().map(|&i| self.partitions[i].clone()).collect();
        Self::new(partitions, self.scales.clone())
    }

    /// Appends the one-cluster partition at scale `scale`, which must exceed `t_M`.
    pub fn with_trivial_tail(&self, scale: f64) -> Result<Self> {
        let mut partitions = self.partitions.clone();
        let mut scales = self.scales.clone();
        partitions.push(Partition::trivial(self.n_points()));
        scales.push(scale);
        Self::new(partitions, scales)
    }

    /// Computes an ordering of the partitions. See [`ReorderStrategy`].
    pub fn reorder(&self, strategy: ReorderStrategy) -> Result<Vec<usize>> {
        match strategy {
            ReorderStrategy::ClusterCount => {
                let mut perm: Vec<usize> = (0..self.len()).collect();
                perm.sort_by_key(|&i| std::cmp::Reverse(self.partitions[i].num_clusters()));
                Ok(perm)
            }
            ReorderStrategy::Exhaustive { cap } => {
                if self.len() > cap {
                    return Err(Error::ReorderCapExceeded {
                        len: self.len(),
                        cap,
                    });
                }
                let mut perm: Vec<usize> = (0..self.len()).collect();
                if self.len() < 2 {
                    return Ok(perm);
                }
                let mut best = perm.clone();
                let mut best_score = f64::NEG_INFINITY;
                loop {
                    let score = crate::measures::sequence_average_hierarchy(&self.permuted(&perm)?)?;
                    if score > best_score {
                        best_score = score;
                        best.clone_from(&perm);
                    }
                    if !next_permutation(&mut perm) {
                        break;
                    }
                }
                Ok(best)
            }
        }
    }
}

/// How [`ScaledPartitionSequence::reorder`] chooses an ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReorderStrategy {
    /// Decreasing number of clusters, ties kept in input order.
    ClusterCount,
    /// Maximise the average persistent hierarchy over all `M!` orderings. The
    /// first maximiser in lexicographic order is returned.
    Exhaustive { cap: usize },
}

impl ReorderStrategy {
    pub fn exhaustive() -> Self {
        ReorderStrategy::Exhaustive {
            cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::InvalidParameter(format!(
            "permutation of length {} for {len} partitions",
            perm.len()
        )));
    }
    let mut seen = vec![false; len];
    for &i in perm {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

/// Advances `v` to the next permutation in lexicographic order.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    n_points: usize,
    scales: Vec<f64>,
    partitions: Vec<Vec<i64>>,
}

impl ScaledPartitionSequence {
    /// JSON form `{"n_points": N, "scales": [...], "partitions": [[label, ...], ...]}`.
    pub fn to_json(&self) -> String {
        let file = SequenceFile {
            n_points: self.n_points(),
            scales: self.scales.clone(),
            partitions: self
                .partitions
                .iter()
                .map(|p| p.labels().iter().map(|&l| l as i64).collect())
                .collect(),
        };
        let mut out = serde_json::to_string(&file).expect("sequence serialises");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let file: SequenceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let parse_err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: 1,
            message,
        };
        if let Some(p) = file.partitions.iter().find(|p| p.len() != file.n_points) {
            return Err(parse_err(format!(
                "field \"partitions\": expected {} labels per partition, found {}",
                file.n_points,
                p.len()
            )));
        }
        let partitions = file
            .partitions
            .iter()
            .map(|p| Partition::from_labels(p))
            .collect();
        Self::new(partitions, file.scales).map_err(|e| parse_err(e.to_string()))
    }

    /// CSV with one row per scale: the scale, then one label per point. A first
    /// row whose leading field is not a number is taken as a header.
    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut partitions = Vec::new();
        let mut scales = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = |e: &csv::Error| e.position().map_or(i + 1, |p| p.line() as usize);
            let record = record.map_err(|e| Error::Parse {
                path: origin.to_string(),
                line: line(&e),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(i + 1, |p| p.line() as usize);
            let err = |message: String| Error::Parse {
                path: origin.to_string(),
                line,
                message,
            };
            let Some(first) = record.get(0) else {
                continue;
            };
            let scale: f64 = match first.parse() {
                Ok(s) => s,
                Err(_) if i == 0 => continue,
                Err(_) => return Err(err(format!("field 1: scale {first:?} is not a number"))),
            };
            let labels: Vec<&str> = record.iter().skip(1).collect();
            if labels.is_empty() {
                return Err(err("no labels after the scale".into()));
            }
            if let Some(p) = partitions.first().map(Partition::len) {
                if p != labels.len() {
                    return Err(err(format!("expected {p} labels, found {}", labels.len())));
                }
            }
            partitions.push(Partition::from_labels(&labels));
            scales.push(scale);
        }
        Self::new(partitions, scales).map_err(|e| Error::Parse {
            path: origin.to_string(),
            line: 1,
            message: e.to_string(),
        })
    }

    /// CSV form read by [`from_csv`](Self::from_csv), with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale");
        for i in 0..self.n_points() {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (t, p) in self.scales.iter().zip(&self.partitions) {
            out.push_str(&t.to_string());
            for l in p.labels() {
                out.push_str(&format!(",{l}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The five-partition sequence on three points used throughout the docs.
    pub(crate) fn running_example() -> ScaledPartitionSequence {
        let parts = [
            vec![0, 1, 2],
            vec![0, 0, 1],
            vec![0, 1, 1],
            vec![0, 1, 0],
            vec![0, 0, 0],
        ];
        ScaledPartitionSequence::enumerated(parts.iter().map(|l| Partition::from_labels(l)).collect())
            .unwrap()
    }

    #[test]
    fn labels_are_normalised_by_first_occurrence() {
        let p = Partition::from_labels(&["b", "a", "b", "c"]);
        assert_eq!(p.labels(), &[0, 1, 0, 2]);
        assert_eq!(p.num_clusters(), 3);
        assert_eq!(p, Partition::from_labels(&[7, 3, 7, 1]));
        assert_eq!(p.clusters(), vec![vec![0, 2], vec![1], vec![3]]);
    }

    #[test]
    fn refinement_examples() {
        let seq = running_example();
        let p = |m: usize| seq.partition(m - 1);
        assert!(Partition::singletons(3).refines(p(4)).unwrap());
        assert!(p(2).refines(p(5)).unwrap());
        assert!(!p(3).refines(p(4)).unwrap());
        assert!(matches!(
            p(1).refines(&Partition::singletons(4)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn fracture_and_hierarchy() {
        let seq = running_example();
        assert!(seq.is_non_fractured(0).unwrap());
        assert!(seq.is_non_fractured(1).unwrap());
        assert!(!seq.is_non_fractured(2).unwrap());
        assert!(seq.is_non_fractured(4).unwrap());
        assert!(!seq.is_hierarchical());
        assert!(matches!(
            seq.is_non_fractured(5),
            Err(Error::IndexOutOfRange { .. })
        ));
        let single = ScaledPartitionSequence::enumerated(vec![Partition::trivial(4)]).unwrap();
        assert!(single.is_hierarchical());
    }

    #[test]
    fn scale_function_is_left_closed() {
        let seq = ScaledPartitionSequence::new(
            vec![Partition::singletons(2), Partition::trivial(2)],
            vec![-1.5, 0.5],
        )
        .unwrap();
        assert_eq!(seq.at(-10.0), &Partition::singletons(2));
        assert_eq!(seq.at(-1.5), &Partition::singletons(2));
        assert_eq!(seq.at(0.49), &Partition::singletons(2));
        assert_eq!(seq.at(0.5), &Partition::trivial(2));
        assert_eq!(seq.at(9.0), &Partition::trivial(2));
    }

    #[test]
    fn rejects_bad_scales() {
        let parts = vec![Partition::singletons(2), Partition::trivial(2)];
        assert!(ScaledPartitionSequence::new(parts.clone(), vec![1.0, 1.0]).is_err());
        assert!(ScaledPartitionSequence::new(parts.clone(), vec![2.0, 1.0]).is_err());
        assert!(ScaledPartitionSequence::new(parts.clone(), vec![1.0, f64::NAN]).is_err());
        assert!(ScaledPartitionSequence::new(parts, vec![1.0]).is_err());
        assert!(ScaledPartitionSequence::new(
            vec![Partition::singletons(2), Partition::trivial(3)],
            vec![1.0, 2.0]
        )
        .is_err());
    }

    #[test]
    fn cluster_count_reordering() {
        let seq = running_example();
        assert_eq!(
            seq.reorder(ReorderStrategy::ClusterCount).unwrap(),
            vec![0, 1, 2, 3, 4]
        );
        let swapped = seq.permuted(&[4, 1, 2, 3, 0]).unwrap();
        let perm = swapped.reorder(ReorderStrategy::ClusterCount).unwrap();
        assert_eq!(perm, vec![4, 1, 2, 3, 0]);
        assert_eq!(swapped.permuted(&perm).unwrap(), seq);
    }

    #[test]
    fn exhaustive_reordering_respects_cap() {
        let parts = vec![Partition::singletons(2); 9];
        let seq = ScaledPartitionSequence::enumerated(parts).unwrap();
        assert!(matches!(
            seq.reorder(ReorderStrategy::exhaustive()),
            Err(Error::ReorderCapExceeded { len: 9, cap: 8 })
        ));
    }

    #[test]
    fn next_permutation_enumerates_all() {
        let mut v = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(v, vec![3, 2, 1, 0]);
    }
}
