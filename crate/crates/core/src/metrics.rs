//! Wasserstein and bottleneck distances between persistence diagrams, and the
//! sup/L_q distance between two filtration functions on the same complex.

use crate::error::{Error, Result};
use crate::filtrations::FilteredComplex;
use crate::homology::PersistenceDiagram;

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method with
/// potentials, O(n³)). Returns `assignment[row] = col` and the total cost.
pub fn assignment(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-based arrays; row 0 / column 0 is a virtual start node
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut rows = vec![0usize; n];
    for j in 1..=n {
        rows[p[j] - 1] = j - 1;
    }
    let total = rows.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (rows, total)
}

fn check_dims(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidParameter(format!(
            "diagrams of different dimensions ({} and {})",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Essential births of both diagrams, sorted, or `None` when the counts differ.
fn essential_pairs(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Option<Vec<(f64, f64)>> {
    let mut ea: Vec<f64> = a.essential_births().collect();
    let mut eb: Vec<f64> = b.essential_births().collect();
    if ea.len() != eb.len() {
        return None;
    }
    ea.sort_by(f64::total_cmp);
    eb.sort_by(f64::total_cmp);
    Some(ea.into_iter().zip(eb).collect())
}

/// L_q distance from `(b, d)` to the nearest diagonal point, raised to the q.
fn diagonal_cost_q(p: (f64, f64), q: f64) -> f64 {
    2.0 * ((p.1 - p.0) / 2.0).powf(q)
}

fn point_cost_q(x: (f64, f64), y: (f64, f64), q: f64) -> f64 {
    (x.0 - y.0).abs().powf(q) + (x.1 - y.1).abs().powf(q)
}

/// Diagonal-augmented cost matrix of size `|A| + |B|`. Rows are the points of
/// `a` followed by diagonal slots for `b`; columns are the points of `b`
/// followed by diagonal slots for `a`.
fn augmented_costs(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    point: impl Fn((f64, f64), (f64, f64)) -> f64,
    diag: impl Fn((f64, f64)) -> f64,
) -> Vec<Vec<f64>> {
    let n = a.len() + b.len();
    let mut c = vec![vec![0.0; n]; n];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = match (i < a.len(), j < b.len()) {
                (true, true) => point(a[i], b[j]),
                (true, false) => diag(a[i]),
                (false, true) => diag(b[j]),
                (false, false) => 0.0,
            };
        }
    }
    c
}

/// q-Wasserstein distance with L_q ground metric, `1 <= q < ∞`. Essential points
/// are matched among themselves by sorted birth; differing essential counts give
/// `+∞`.
pub fn wasserstein(a: &PersistenceDiagram, b: &PersistenceDiagram, q: f64) -> Result<f64> {
    check_dims(a, b)?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "wasserstein needs finite q >= 1, got {q}"
        )));
    }
    let Some(ess) = essential_pairs(a, b) else {
        return Ok(f64::INFINITY);
    };
    let fa: Vec<_> = a.finite().collect();
    let fb: Vec<_> = b.finite().collect();
    let cost = augmented_costs(
        &fa,
        &fb,
        |x, y| point_cost_q(x, y, q),
        |x| diagonal_cost_q(x, q),
    );
    let (_, matched) = assignment(&cost);
    let essential: f64 = ess.iter().map(|(x, y)| (x - y).abs().powf(q)).sum();
    Ok((matched + essential).powf(1.0 / q))
}

/// Bottleneck distance (L_∞ ground metric), found by binary search over the
/// candidate edge lengths with a perfect-matching feasibility test.
pub fn bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<f64> {
    check_dims(a, b)?;
    let Some(ess) = essential_pairs(a, b) else {
        return Ok(f64::INFINITY);
    };
    let essential = ess.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let fa: Vec<_> = a.finite().collect();
    let fb: Vec<_> = b.finite().collect();
    let cost = augmented_costs(
        &fa,
        &fb,
        |x, y| (x.0 - y.0).abs().max((x.1 - y.1).abs()),
        |x| (x.1 - x.0) / 2.0,
    );
    let mut candidates: Vec<f64> = cost.iter().flatten().copied().collect();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&cost, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo].max(essential))
}

/// Wasserstein for finite `q`, bottleneck for `q = ∞`.
pub fn diagram_distance(a: &PersistenceDiagram, b: &PersistenceDiagram, q: f64) -> Result<f64> {
    if q == f64::INFINITY {
        bottleneck(a, b)
    } else {
        wasserstein(a, b, q)
    }
}

/// Kuhn's augmenting-path matching on the threshold graph `cost <= delta`.
fn has_perfect_matching(cost: &[Vec<f64>], delta: f64) -> bool {
    fn augment(
        i: usize,
        cost: &[Vec<f64>],
        delta: f64,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..cost.len() {
            if cost[i][j] <= delta && !seen[j] {
                seen[j] = true;
                if owner[j].map_or(true, |k| augment(k, cost, delta, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let n = cost.len();
    let mut owner = vec![None; n];
    (0..n).all(|i| augment(i, cost, delta, &mut vec![false; n], &mut owner))
}

/// `‖f − f′‖_q` over the cells of two filtrations on the same simplicial
/// complex; `q = ∞` gives the sup norm.
pub fn filtration_distance(f1: &FilteredComplex, f2: &FilteredComplex, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("need q >= 1, got {q}")));
    }
    if f1.len() != f2.len() {
        return Err(Error::CellSetMismatch(format!(
            "{} cells against {}",
            f1.len(),
            f2.len()
        )));
    }
    let mut diffs = Vec::with_capacity(f1.len());
    for cell in f1.cells() {
        let other = f2.filtration_value(&cell.simplex).map_err(|_| {
            Error::CellSetMismatch(format!("simplex {} missing from the second filtration", cell.simplex))
        })?;
        diffs.push((cell.value - other).abs());
    }
    Ok(if q == f64::INFINITY {
        diffs.into_iter().fold(0.0, f64::max)
    } else {
        diffs.iter().map(|d| d.powf(q)).sum::<f64>().powf(1.0 / q)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtrations::build_mcf;
    use crate::homology::reduce;
    use crate::partitions::tests::running_example;
    use crate::partitions::{Partition, ScaledPartitionSequence};

    fn dgm(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(1, points.to_vec())
    }

    #[test]
    fn assignment_small() {
        let c = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let (rows, total) = assignment(&c);
        assert_eq!(total, 5.0);
        assert_eq!(rows, vec![1, 0, 2]);
    }

    #[test]
    fn single_point_against_empty() {
        let a = dgm(&[(4.0, 5.0)]);
        let e = PersistenceDiagram::empty(1);
        assert!((wasserstein(&a, &e, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(wasserstein(&a, &e, 1.0).unwrap(), 1.0);
        assert_eq!(bottleneck(&a, &e).unwrap(), 0.5);
        assert_eq!(wasserstein(&a, &a, 2.0).unwrap(), 0.0);
        assert_eq!(bottleneck(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn essentials() {
        let a = PersistenceDiagram::new(0, vec![(1.0, f64::INFINITY), (1.0, 2.0)]);
        let b = PersistenceDiagram::new(0, vec![(1.5, f64::INFINITY)]);
        assert_eq!(bottleneck(&a, &b).unwrap(), 0.5);
        assert_eq!(wasserstein(&a, &b, 1.0).unwrap(), 1.5);
        let c = PersistenceDiagram::new(0, vec![(1.0, 2.0)]);
        assert_eq!(bottleneck(&a, &c).unwrap(), f64::INFINITY);
        assert_eq!(wasserstein(&a, &c, 2.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rejects_bad_input() {
        let a = dgm(&[]);
        let b = PersistenceDiagram::empty(0);
        assert!(wasserstein(&a, &b, 1.0).is_err());
        assert!(wasserstein(&a, &a, 0.5).is_err());
        assert!(wasserstein(&a, &a, f64::INFINITY).is_err());
        assert_eq!(diagram_distance(&a, &a, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn moving_the_last_scale() {
        let seq = running_example();
        let mut scales = seq.scales().to_vec();
        scales[4] = 5.3;
        let moved = ScaledPartitionSequence::new(seq.partitions().to_vec(), scales).unwrap();
        let (f, g) = (build_mcf(&seq, 3).unwrap(), build_mcf(&moved, 3).unwrap());
        assert_eq!(filtration_distance(&f, &f, 2.0).unwrap(), 0.0);
        assert!((filtration_distance(&f, &g, f64::INFINITY).unwrap() - 0.3).abs() < 1e-12);
        let d1 = reduce(&f, 2).unwrap().diagram(1).unwrap();
        let d2 = reduce(&g, 2).unwrap().diagram(1).unwrap();
        assert!((bottleneck(&d1, &d2).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn mismatched_cells_explain_padding() {
        let a = ScaledPartitionSequence::enumerated(vec![Partition::singletons(3)]).unwrap();
        let b = ScaledPartitionSequence::enumerated(vec![Partition::trivial(3)]).unwrap();
        let err = filtration_distance(&build_mcf(&a, 2).unwrap(), &build_mcf(&b, 2).unwrap(), 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::CellSetMismatch(_)));
        assert!(err.to_string().contains("trivial"));
    }
}
