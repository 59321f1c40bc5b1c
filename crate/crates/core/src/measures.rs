//! Scalar summaries of a partition sequence derived from the persistent
//! homology of its MCF: persistent hierarchy, persistent conflict, and a
//! scale-selection heuristic.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtrations::build_mcf;
use crate::homology::{reduce, ReductionResult};
use crate::partitions::ScaledPartitionSequence;

/// A piecewise-constant function with one value per critical scale. On
/// `[t_m, t_{m+1})` it equals `v_m`; before `t_1` it equals `v_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<T> {
    scales: Vec<f64>,
    values: Vec<T>,
}

impl<T: Copy> StepFunction<T> {
    pub fn new(scales: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if scales.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} scales but {} values",
                scales.len(),
                values.len()
            )));
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "step function scales must be strictly increasing".into(),
            ));
        }
        Ok(StepFunction { scales, values })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, t: f64) -> T {
        let m = self.scales.partition_point(|&s| s <= t).saturating_sub(1);
        self.values[m]
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(&T) -> U) -> StepFunction<U> {
        StepFunction {
            scales: self.scales.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }
}

fn check_same_scales(seq: &ScaledPartitionSequence, r: &ReductionResult) -> Result<()> {
    if seq.scales() != r.scales() {
        return Err(Error::InvalidParameter(
            "reduction was not computed from this sequence (critical scales differ)".into(),
        ));
    }
    Ok(())
}

/// `h(t_m) = β_0(t_m) / #P^{t_m}`.
pub fn persistent_hierarchy(
    seq: &ScaledPartitionSequence,
    r: &ReductionResult,
) -> Result<StepFunction<f64>> {
    check_same_scales(seq, r)?;
    let beta0 = r.betti_curve(0)?;
    let values = beta0
        .values()
        .iter()
        .zip(seq.partitions())
        .map(|(&b, p)| b as f64 / p.num_clusters() as f64)
        .collect();
    StepFunction::new(seq.scales().to_vec(), values)
}

/// Time-average of `h` over `[t_1, t_M]`. The last partition spans an interval of
/// zero width and so carries no weight.
pub fn average_hierarchy(h: &StepFunction<f64>) -> Result<f64> {
    if h.len() < 2 {
        return Err(Error::UndefinedAverage);
    }
    let t = h.scales();
    let integral: f64 = (0..h.len() - 1)
        .map(|m| h.values()[m] * (t[m + 1] - t[m]))
        .sum();
    Ok(integral / (t[h.len() - 1] - t[0]))
}

/// Average hierarchy of a sequence, from the 1-skeleton of its MCF.
pub fn sequence_average_hierarchy(seq: &ScaledPartitionSequence) -> Result<f64> {
    let r = reduce(&build_mcf(seq, 1)?, 2)?;
    average_hierarchy(&persistent_hierarchy(seq, &r)?)
}

/// Births, deaths and conflict `c_k = b_k − d_k` per critical scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictCurves {
    pub births: StepFunction<i64>,
    pub deaths: StepFunction<i64>,
    pub conflict: StepFunction<i64>,
}

/// Conflict curves in dimension `1 <= k <= max_dim − 1`. Births include classes
/// that never die; classes born and killed at the same scale are not counted.
pub fn conflict_curves(r: &ReductionResult, k: usize) -> Result<ConflictCurves> {
    if k == 0 || k > r.top_homology_dim() {
        return Err(Error::DimensionOutOfRange {
            dim: k,
            max: r.top_homology_dim(),
        });
    }
    let scales = r.scales();
    let slot = |v: f64| {
        scales
            .binary_search_by(|s| s.total_cmp(&v))
            .expect("cell values are critical scales")
    };
    let mut births = vec![0i64; scales.len()];
    let mut deaths = vec![0i64; scales.len()];
    for p in r.pairs().iter().filter(|p| p.dim == k) {
        let (b, d) = (r.value(p.birth), r.value(p.death));
        if b < d {
            births[slot(b)] += 1;
            deaths[slot(d)] += 1;
        }
    }
    for e in r.essentials().iter().filter(|e| e.dim == k) {
        births[slot(r.value(e.birth))] += 1;
    }
    let conflict = births.iter().zip(&deaths).map(|(b, d)| b - d).collect();
    Ok(ConflictCurves {
        births: StepFunction::new(scales.to_vec(), births)?,
        deaths: StepFunction::new(scales.to_vec(), deaths)?,
        conflict: StepFunction::new(scales.to_vec(), conflict)?,
    })
}

/// `c(t_m) = Σ_{k=1}^{max_dim−1} c_k(t_m)`; identically zero when `max_dim < 2`.
pub fn total_conflict(r: &ReductionResult) -> Result<StepFunction<i64>> {
    let mut total = vec![0i64; r.scales().len()];
    for k in 1..=r.top_homology_dim() {
        let c = conflict_curves(r, k)?;
        for (acc, v) in total.iter_mut().zip(c.conflict.values()) {
            *acc += v;
        }
    }
    StepFunction::new(r.scales().to_vec(), total)
}

/// Parameters of [`select_scales`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionParams {
    /// Minimum plateau length `L`, counting the scale where the dip lands.
    pub min_plateau: usize,
    /// Ceiling `B` on the number of unresolved conflicts `Σ_{k≥1} β_k`.
    pub betti_ceiling: usize,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            min_plateau: 3,
            betti_ceiling: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedScale {
    pub scale: f64,
    /// 0-based position in the sequence.
    pub index: usize,
    pub plateau_length: usize,
    pub betti_sum: usize,
    pub hierarchy: f64,
}

/// Candidate conflict-resolving scales.
///
/// A scale `t_m` (m ≥ 2) qualifies when the total conflict strictly decreases
/// into it, `c(t_m) < c(t_{m−1})`, and the dip is followed by a plateau: the
/// dip scale plus the maximal run of equal values `c(t_{m+1}) = … = c(t_{m+r})`
/// must cover at least `L` scales. Candidates with `Σ_k β_k(t_m) > B` over the
/// supplied conflict dimensions are dropped. The rest are ranked by plateau
/// length (longest first), then Betti sum, then hierarchy (highest first), then
/// scale.
pub fn select_scales(
    h: &StepFunction<f64>,
    c: &StepFunction<i64>,
    betti: &[StepFunction<usize>],
    params: SelectionParams,
) -> Result<Vec<SelectedScale>> {
    if h.scales() != c.scales() || betti.iter().any(|b| b.scales() != c.scales()) {
        return Err(Error::InvalidParameter(
            "select_scales inputs have different critical scales".into(),
        ));
    }
    let cv = c.values();
    let n = cv.len();
    let mut selected = Vec::new();
    for m in 1..n {
        if cv[m] >= cv[m - 1] {
            continue;
        }
        let run = if m + 1 < n {
            cv[m + 1..].iter().take_while(|&&v| v == cv[m + 1]).count()
        } else {
            0
        };
        let plateau_length = 1 + run;
        if plateau_length < params.min_plateau {
            continue;
        }
        let betti_sum: usize = betti.iter().map(|b| b.values()[m]).sum();
        if betti_sum > params.betti_ceiling {
            continue;
        }
        selected.push(SelectedScale {
            scale: c.scales()[m],
            index: m,
            plateau_length,
            betti_sum,
            hierarchy: h.values()[m],
        });
    }
    selected.sort_by(|a, b| {
        b.plateau_length
            .cmp(&a.plateau_length)
            .then(a.betti_sum.cmp(&b.betti_sum))
            .then(b.hierarchy.total_cmp(&a.hierarchy))
            .then(a.scale.total_cmp(&b.scale))
    });
    Ok(selected)
}

/// Everything the measures report needs, computed from one MCF reduction.
#[derive(Debug, Clone)]
pub struct MeasuresReport {
    pub hierarchy: StepFunction<f64>,
    pub average_hierarchy: Option<f64>,
    pub total_conflict: StepFunction<i64>,
    /// `β_0 … β_{max_dim−1}`.
    pub betti: Vec<StepFunction<usize>>,
    pub selected: Vec<SelectedScale>,
}

impl MeasuresReport {
    pub fn compute(
        seq: &ScaledPartitionSequence,
        r: &ReductionResult,
        params: SelectionParams,
    ) -> Result<Self> {
        let hierarchy = persistent_hierarchy(seq, r)?;
        let average_hierarchy = match average_hierarchy(&hierarchy) {
            Ok(v) => Some(v),
            Err(Error::UndefinedAverage) => None,
            Err(e) => return Err(e),
        };
        let total_conflict = total_conflict(r)?;
        let betti = (0..=r.top_homology_dim())
            .map(|k| r.betti_curve(k))
            .collect::<Result<Vec<_>>>()?;
        let selected = select_scales(&hierarchy, &total_conflict, &betti[1..], params)?;
        Ok(MeasuresReport {
            hierarchy,
            average_hierarchy,
            total_conflict,
            betti,
            selected,
        })
    }

    /// CSV with header `scale,h,c_total,beta0,beta1,…`, one row per critical scale.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,h,c_total");
        for k in 0..self.betti.len() {
            write!(out, ",beta{k}").unwrap();
        }
        out.push('\n');
        for m in 0..self.hierarchy.len() {
            write!(
                out,
                "{},{},{}",
                self.hierarchy.scales()[m],
                self.hierarchy.values()[m],
                self.total_conflict.values()[m]
            )
            .unwrap();
            for b in &self.betti {
                write!(out, ",{}", b.values()[m]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::tests::running_example;
    use crate::partitions::{Partition, ReorderStrategy};

    fn example() -> (ScaledPartitionSequence, ReductionResult) {
        let seq = running_example();
        let r = reduce(&build_mcf(&seq, 3).unwrap(), 2).unwrap();
        (seq, r)
    }

    #[test]
    fn step_function_evaluation() {
        let f = StepFunction::new(vec![1.0, 2.0, 4.0], vec![10, 20, 40]).unwrap();
        assert_eq!(f.eval(0.0), 10);
        assert_eq!(f.eval(1.0), 10);
        assert_eq!(f.eval(3.99), 20);
        assert_eq!(f.eval(4.0), 40);
        assert_eq!(f.eval(100.0), 40);
        assert!(StepFunction::new(vec![1.0], vec![1, 2]).is_err());
    }

    #[test]
    fn running_example_hierarchy() {
        let (seq, r) = example();
        let h = persistent_hierarchy(&seq, &r).unwrap();
        assert_eq!(h.values(), &[1.0, 1.0, 0.5, 0.5, 1.0]);
        assert_eq!(average_hierarchy(&h).unwrap(), 0.75);
        assert_eq!(sequence_average_hierarchy(&seq).unwrap(), 0.75);
    }

    #[test]
    fn average_of_constant_ignores_spacing() {
        let h = StepFunction::new(vec![-1.5, -1.4, 0.0, 0.5], vec![0.3; 4]).unwrap();
        assert!((average_hierarchy(&h).unwrap() - 0.3).abs() < 1e-15);
        let single = StepFunction::new(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(
            average_hierarchy(&single),
            Err(Error::UndefinedAverage)
        ));
    }

    #[test]
    fn running_example_conflicts() {
        let (_, r) = example();
        let c1 = conflict_curves(&r, 1).unwrap();
        assert_eq!(c1.births.values(), &[0, 0, 0, 1, 0]);
        assert_eq!(c1.deaths.values(), &[0, 0, 0, 0, 1]);
        assert_eq!(c1.conflict.values(), &[0, 0, 0, 1, -1]);
        assert_eq!(total_conflict(&r).unwrap().values(), &[0, 0, 0, 1, -1]);
        assert!(conflict_curves(&r, 0).is_err());
        assert!(conflict_curves(&r, 3).is_err());
    }

    #[test]
    fn running_example_selection() {
        let (seq, r) = example();
        let report = MeasuresReport::compute(
            &seq,
            &r,
            SelectionParams {
                min_plateau: 1,
                betti_ceiling: 0,
            },
        )
        .unwrap();
        assert_eq!(report.selected.len(), 1);
        assert_eq!(report.selected[0].scale, 5.0);
        assert_eq!(report.selected[0].index, 4);
        assert!(report.to_csv().starts_with("scale,h,c_total,beta0,beta1,beta2\n1,1,0,3,0,0\n"));
    }

    #[test]
    fn increasing_conflict_selects_nothing() {
        let scales = vec![1.0, 2.0, 3.0, 4.0];
        let h = StepFunction::new(scales.clone(), vec![1.0; 4]).unwrap();
        let c = StepFunction::new(scales.clone(), vec![0, 1, 2, 3]).unwrap();
        let b = StepFunction::new(scales, vec![0; 4]).unwrap();
        let sel = select_scales(
            &h,
            &c,
            &[b],
            SelectionParams {
                min_plateau: 1,
                betti_ceiling: 10,
            },
        )
        .unwrap();
        assert!(sel.is_empty());
    }

    #[test]
    fn plateau_counts_the_dip_and_the_run_after_it() {
        let scales: Vec<f64> = (1..=8).map(f64::from).collect();
        let h = StepFunction::new(scales.clone(), vec![1.0; 8]).unwrap();
        let c = StepFunction::new(scales.clone(), vec![0, 2, 1, -3, 0, 0, 0, 1]).unwrap();
        let b = StepFunction::new(scales, vec![0, 2, 3, 0, 0, 0, 0, 1]).unwrap();
        let sel = select_scales(&h, &c, &[b], SelectionParams::default()).unwrap();
        assert_eq!(sel.len(), 1);
        assert_eq!(sel[0].index, 3);
        assert_eq!(sel[0].plateau_length, 4);
    }

    #[test]
    fn exhaustive_reorder_beats_given_order() {
        let seq = running_example();
        let perm = seq.reorder(ReorderStrategy::exhaustive()).unwrap();
        let best = sequence_average_hierarchy(&seq.permuted(&perm).unwrap()).unwrap();
        assert!(best >= 0.75);
        let hier = ScaledPartitionSequence::enumerated(vec![
            Partition::singletons(4),
            Partition::from_labels(&[0, 0, 1, 2]),
            Partition::trivial(4),
        ])
        .unwrap();
        assert_eq!(
            hier.reorder(ReorderStrategy::exhaustive()).unwrap(),
            vec![0, 1, 2]
        );
    }
}
