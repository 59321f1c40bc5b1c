//! Persistent homology of a [`FilteredComplex`] over a prime field.
//!
//! [`reduce`] runs the standard left-to-right column reduction of the boundary
//! matrix, with the optional clearing optimisation. The result records
//! persistence pairs as cell indices; cell values are only consulted when a
//! diagram, Betti curve or persistent Betti number is requested.

mod field;
pub mod oracle;

use std::fmt::Write as _;

pub use field::PrimeField;

use crate::error::{Error, Result};
use crate::filtrations::FilteredComplex;
use crate::measures::StepFunction;

/// Coefficient field used when none is given.
pub const DEFAULT_MODULUS: u64 = 2;

/// A class born when cell `birth` enters and killed by cell `death`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PersistencePair {
    pub birth: usize,
    pub death: usize,
    pub dim: usize,
}

/// A class that never dies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Essential {
    pub birth: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionOptions {
    pub modulus: u64,
    /// Reduce the highest dimension first and zero out columns known to be
    /// pivot rows. Produces the same pairs as the plain algorithm.
    pub clearing: bool,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions {
            modulus: DEFAULT_MODULUS,
            clearing: true,
        }
    }
}

/// Output of [`reduce`]. Pairs are sorted by death cell, essentials by birth cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pairs: Vec<PersistencePair>,
    essentials: Vec<Essential>,
    modulus: u32,
    values: Vec<f64>,
    scales: Vec<f64>,
    max_dim: usize,
}

type Column = Vec<(usize, u32)>;

/// Reduces `fc` over `Z_p` with the default options.
pub fn reduce(fc: &FilteredComplex, modulus: u64) -> Result<ReductionResult> {
    reduce_with(
        fc,
        ReductionOptions {
            modulus,
            ..Default::default()
        },
    )
}

pub fn reduce_with(fc: &FilteredComplex, opts: ReductionOptions) -> Result<ReductionResult> {
    let field = PrimeField::new(opts.modulus)?;
    let report = fc.validate();
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidComplex(format!(
            "{v} ({} violation(s) in total)",
            report.violations.len()
        )));
    }
    let boundary = boundary_matrix(fc, field);
    check_boundary_squares_to_zero(&boundary, field)?;

    let n = fc.len();
    let dims: Vec<usize> = fc.cells().iter().map(|c| c.dim()).collect();
    let mut reduced: Vec<Column> = vec![Vec::new(); n];
    // pivot_of[row] = column whose reduced form has its lowest entry at `row`
    let mut pivot_of: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];

    let order: Vec<usize> = if opts.clearing {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&j| (std::cmp::Reverse(dims[j]), j));
        order
    } else {
        (0..n).collect()
    };

    for j in order {
        if cleared[j] || dims[j] == 0 {
            continue;
        }
        let mut col = boundary[j].clone();
        while let Some(&(low, coeff)) = col.last() {
            let Some(k) = pivot_of[low] else { break };
            let other = &reduced[k];
            let factor = field.mul(coeff, field.inv(other.last().unwrap().1));
            col = axpy(&col, other, field.neg(factor), field);
        }
        if let Some(&(low, _)) = col.last() {
            pivot_of[low] = Some(j);
            if opts.clearing {
                cleared[low] = true;
            }
        }
        reduced[j] = col;
    }

    let mut pairs = Vec::new();
    let mut essentials = Vec::new();
    for (i, pivot) in pivot_of.iter().enumerate() {
        if let Some(death) = *pivot {
            pairs.push(PersistencePair {
                birth: i,
                death,
                dim: dims[i],
            });
        } else if reduced[i].is_empty() {
            essentials.push(Essential {
                birth: i,
                dim: dims[i],
            });
        }
    }
    pairs.sort_by_key(|p| p.death);

    Ok(ReductionResult {
        pairs,
        essentials,
        modulus: field.modulus(),
        values: fc.cells().iter().map(|c| c.value).collect(),
        scales: fc.scales().to_vec(),
        max_dim: fc.max_dim(),
    })
}

fn boundary_matrix(fc: &FilteredComplex, field: PrimeField) -> Vec<Column> {
    fc.cells()
        .iter()
        .map(|cell| {
            let mut col: Column = cell
                .simplex
                .facets()
                .enumerate()
                .map(|(i, face)| {
                    let row = fc.position(&face).expect("validated complex is closed");
                    (row, field.sign(i))
                })
                .collect();
            col.sort_unstable_by_key(|&(r, _)| r);
            col
        })
        .collect()
}

fn check_boundary_squares_to_zero(boundary: &[Column], field: PrimeField) -> Result<()> {
    for (j, col) in boundary.iter().enumerate() {
        let mut acc: Column = Vec::new();
        for &(row, coeff) in col {
            acc = axpy(&acc, &boundary[row], coeff, field);
        }
        if !acc.is_empty() {
            return Err(Error::InvalidComplex(format!(
                "boundary of boundary of cell {j} is non-zero"
            )));
        }
    }
    Ok(())
}

/// `a + factor * b` for sparse columns sorted by row.
fn axpy(a: &[(usize, u32)], b: &[(usize, u32)], factor: u32, field: PrimeField) -> Column {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = field.mul(factor, b[j].1);
            if v != 0 {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = field.add(a[i].1, field.mul(factor, b[j].1));
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl ReductionResult {
    /// All pairs, including zero-persistence ones.
    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn essentials(&self) -> &[Essential] {
        &self.essentials
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Critical scales of the reduced complex.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Filtration value of a cell by reduction index.
    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    /// Largest dimension for which homology is reported, `max_dim - 1`.
    pub fn top_homology_dim(&self) -> usize {
        self.max_dim.saturating_sub(1)
    }

    fn check_dim(&self, k: usize) -> Result<()> {
        if k > self.top_homology_dim() {
            return Err(Error::DimensionOutOfRange {
                dim: k,
                max: self.top_homology_dim(),
            });
        }
        Ok(())
    }

    /// `(birth, death)` scale pairs in dimension `k`, essentials with death
    /// `+inf`, zero-persistence pairs included.
    fn intervals(&self, k: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let finite = self
            .pairs
            .iter()
            .filter(move |p| p.dim == k)
            .map(|p| (self.values[p.birth], self.values[p.death]));
        let infinite = self
            .essentials
            .iter()
            .filter(move |e| e.dim == k)
            .map(|e| (self.values[e.birth], f64::INFINITY));
        finite.chain(infinite)
    }

    /// The persistence diagram in dimension `k`, without zero-persistence points.
    pub fn diagram(&self, k: usize) -> Result<PersistenceDiagram> {
        self.check_dim(k)?;
        Ok(PersistenceDiagram::new(
            k,
            self.intervals(k).filter(|(b, d)| b < d).collect(),
        ))
    }

    /// Diagrams for every reported dimension.
    pub fn diagrams(&self) -> Vec<PersistenceDiagram> {
        (0..=self.top_homology_dim())
            .map(|k| self.diagram(k).expect("dimension in range"))
            .collect()
    }

    /// `β_k(t)` at every critical scale, counting essential classes as alive.
    pub fn betti_curve(&self, k: usize) -> Result<StepFunction<usize>> {
        self.check_dim(k)?;
        let intervals: Vec<(f64, f64)> = self.intervals(k).collect();
        let values = self
            .scales
            .iter()
            .map(|&t| intervals.iter().filter(|&&(b, d)| b <= t && t < d).count())
            .collect();
        StepFunction::new(self.scales.clone(), values)
    }

    /// `β_k^{i,p}`: classes born at or before `i` that are still alive at `i + p`.
    pub fn persistent_betti(&self, k: usize, i: f64, p: f64) -> Result<usize> {
        self.check_dim(k)?;
        if !(p >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative persistence {p}")));
        }
        Ok(self
            .intervals(k)
            .filter(|&(b, d)| b <= i && d > i + p)
            .count())
    }

    /// Multiplicity of the point `(i, j)` in the dimension-`k` diagram; `j`
    /// may be `+inf`.
    pub fn multiplicity(&self, k: usize, i: f64, j: f64) -> Result<usize> {
        self.check_dim(k)?;
        if !(i < j) {
            return Err(Error::InvalidParameter(format!(
                "multiplicity needs birth < death, got ({i}, {j})"
            )));
        }
        Ok(self.intervals(k).filter(|&(b, d)| b == i && d == j).count())
    }
}

/// Points `(birth, death)` of one homological dimension; `death` is `+inf` for
/// essential classes. Points are kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    dim: usize,
    points: Vec<(f64, f64)>,
}

impl PersistenceDiagram {
    pub fn new(dim: usize, mut points: Vec<(f64, f64)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        PersistenceDiagram { dim, points }
    }

    pub fn empty(dim: usize) -> Self {
        PersistenceDiagram {
            dim,
            points: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points with finite death.
    pub fn finite(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().filter(|p| p.1.is_finite())
    }

    /// Births of the essential points.
    pub fn essential_births(&self) -> impl Iterator<Item = f64> + '_ {
        self.points
            .iter()
            .filter(|p| p.1 == f64::INFINITY)
            .map(|p| p.0)
    }
}

/// Writes diagrams as CSV with header `dim,birth,death`, sorted by
/// `(dim, birth, death)`; essential deaths are written as `inf`.
pub fn diagrams_to_csv(diagrams: &[PersistenceDiagram]) -> String {
    let mut sorted: Vec<&PersistenceDiagram> = diagrams.iter().collect();
    sorted.sort_by_key(|d| d.dim);
    let mut out = String::from("dim,birth,death\n");
    for d in sorted {
        for &(b, e) in &d.points {
            writeln!(out, "{},{},{}", d.dim, b, e).unwrap();
        }
    }
    out
}

/// Parses the CSV written by [`diagrams_to_csv`]. Returns one diagram per
/// dimension from 0 up to the largest dimension present.
pub fn diagrams_from_csv(text: &str, origin: &str) -> Result<Vec<PersistenceDiagram>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut by_dim: Vec<Vec<(f64, f64)>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let err = |message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let record = record.map_err(|e| err(e.to_string()))?;
        if record.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", record.len())));
        }
        let dim: usize = record[0]
            .parse()
            .map_err(|e| err(format!("bad dim: {e}")))?;
        let birth: f64 = record[1]
            .parse()
            .map_err(|e| err(format!("bad birth: {e}")))?;
        let death: f64 = record[2]
            .parse()
            .map_err(|e| err(format!("bad death: {e}")))?;
        if !birth.is_finite() || death.is_nan() || death < birth {
            return Err(err(format!("invalid point ({birth}, {death})")));
        }
        if by_dim.len() <= dim {
            by_dim.resize(dim + 1, Vec::new());
        }
        by_dim[dim].push((birth, death));
    }
    Ok(by_dim
        .into_iter()
        .enumerate()
        .map(|(k, pts)| PersistenceDiagram::new(k, pts))
        .collect())
}
