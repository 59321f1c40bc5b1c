//! Filtered simplicial complexes built from a partition sequence.
//!
//! Three constructions are provided:
//!
//! * [`build_mcf`], the multiscale clustering filtration: the union of the solid
//!   simplices of every cluster seen up to each scale.
//! * [`build_cag`] followed by [`build_clique_filtration`], the clique complex of the
//!   cluster assignment graph. It agrees with the MCF on 1-skeletons but is
//!   2-determined, so it loses conflicts in higher dimensions.
//! * [`build_mcnf`], the nerve of all clusters seen up to each scale.
//!
//! All builders emit only the `max_dim`-skeleton, so homology is meaningful for
//! dimensions `0..max_dim`. Sublevel sets are closed: a cell with value `t`
//! belongs to `K^t`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::partitions::ScaledPartitionSequence;

/// Default dimension cap for built complexes.
pub const DEFAULT_MAX_DIM: usize = 3;

/// An abstract simplex: a non-empty, strictly increasing list of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts the vertices; rejects empty input and repeated vertices.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidSimplex("empty vertex list".into()));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSimplex(format!("repeated vertex in {vertices:?}")));
        }
        Ok(Simplex(vertices))
    }

    /// Caller guarantees the vertices are strictly increasing.
    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(!vertices.is_empty() && vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces; the `i`-th omits vertex `i` and enters the
    /// boundary with sign `(-1)^i`.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |i| {
            let mut v = self.0.clone();
            v.remove(i);
            Simplex(v)
        })
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// A simplex together with its filtration value.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub simplex: Simplex,
    pub value: f64,
}

impl Cell {
    pub fn dim(&self) -> usize {
        self.simplex.dim()
    }
}

fn reduction_order(a: &Cell, b: &Cell) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.dim().cmp(&b.dim()))
        .then_with(|| a.simplex.cmp(&b.simplex))
}

/// Cells sorted by `(value, dimension, lexicographic vertices)`, which is the
/// order used by the boundary-matrix reduction.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    cells: Vec<Cell>,
    max_dim: usize,
    scales: Vec<f64>,
    index: HashMap<Simplex, usize>,
}

impl PartialEq for FilteredComplex {
    fn eq(&self, other: &Self) -> bool {
        self.max_dim == other.max_dim && self.scales == other.scales && self.cells == other.cells
    }
}

impl FilteredComplex {
    /// Sorts `cells` into reduction order. No closure or monotonicity check is
    /// made here; see [`FilteredComplex::validate`]. When `scales` is `None` the
    /// critical scales are the distinct cell values.
    pub fn from_cells(mut cells: Vec<Cell>, max_dim: usize, scales: Option<Vec<f64>>) -> Self {
        cells.sort_by(reduction_order);
        let scales = scales.unwrap_or_else(|| {
            let mut s: Vec<f64> = cells.iter().map(|c| c.value).collect();
            s.dedup();
            s
        });
        let mut index = HashMap::with_capacity(cells.len());
        for (i, c) in cells.iter().enumerate() {
            index.entry(c.simplex.clone()).or_insert(i);
        }
        FilteredComplex {
            cells,
            max_dim,
            scales,
            index,
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Critical scales at which homology is reported.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Position of `s` in reduction order.
    pub fn position(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index.contains_key(s)
    }

    /// The filtration function: the smallest `t` with `s ∈ K^t`.
    pub fn filtration_value(&self, s: &Simplex) -> Result<f64> {
        self.position(s)
            .map(|i| self.cells[i].value)
            .ok_or_else(|| Error::SimplexNotFound(s.vertices().to_vec()))
    }

    /// Cells of the closed sublevel set `K^t`.
    pub fn sublevel(&self, t: f64) -> &[Cell] {
        let end = self.cells.partition_point(|c| c.value <= t);
        &self.cells[..end]
    }

    /// The `d`-skeleton, keeping values and critical scales.
    pub fn skeleton(&self, d: usize) -> FilteredComplex {
        let cells = self.cells.iter().filter(|c| c.dim() <= d).cloned().collect();
        FilteredComplex::from_cells(cells, d, Some(self.scales.clone()))
    }

    /// Checks closure under faces, monotonicity of values, the dimension cap and
    /// uniqueness of cells.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (i, cell) in self.cells.iter().enumerate() {
            if !cell.value.is_finite() {
                violations.push(Violation::NonFiniteValue(cell.simplex.clone()));
            }
            if cell.dim() > self.max_dim {
                violations.push(Violation::AboveMaxDim(cell.simplex.clone()));
            }
            if self.index[&cell.simplex] != i {
                violations.push(Violation::Duplicate(cell.simplex.clone()));
                continue;
            }
            for face in cell.simplex.facets() {
                match self.index.get(&face) {
                    None => violations.push(Violation::MissingFace {
                        simplex: cell.simplex.clone(),
                        face,
                    }),
                    Some(&j) if self.cells[j].value > cell.value => {
                        violations.push(Violation::NotMonotone {
                            simplex: cell.simplex.clone(),
                            face,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        ValidationReport { violations }
    }

    /// Serialises one cell per line as `value dim v0 v1 … vk` in reduction order,
    /// after `# max_dim` and `# scales` header comments.
    pub fn to_text(&self) -> String {
        let mut out = format!("# max_dim {}\n# scales", self.max_dim);
        for t in &self.scales {
            out.push_str(&format!(" {t}"));
        }
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!("{} {}", c.value, c.dim()));
            for v in c.simplex.vertices() {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`FilteredComplex::to_text`]. Blank lines and
    /// other `#` comments are skipped. Without headers, `max_dim` is the largest
    /// dimension present and the scales are the distinct cell values; `origin` is
    /// used in error messages.
    pub fn from_text(text: &str, origin: &str) -> Result<FilteredComplex> {
        let mut cells = Vec::new();
        let mut max_dim = None;
        let mut scales = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: lineno + 1,
                message,
            };
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                match words.next() {
                    Some("max_dim") => {
                        let d = words.next().unwrap_or("");
                        max_dim = Some(d.parse::<usize>().map_err(|_| err(format!("bad max_dim {d:?}")))?);
                    }
                    Some("scales") => {
                        let t = words
                            .map(str::parse::<f64>)
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|e| err(format!("bad scale: {e}")))?;
                        if t.windows(2).any(|w| w[0] >= w[1]) {
                            return Err(err("scales must be strictly increasing".into()));
                        }
                        scales = Some(t);
                    }
                    _ => {}
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let value: f64 = fields
                .next()
                .unwrap()
                .parse()
                .map_err(|e| err(format!("bad value: {e}")))?;
            let dim: usize = fields
                .next()
                .ok_or_else(|| err("missing dimension".into()))?
                .parse()
                .map_err(|e| err(format!("bad dimension: {e}")))?;
            let vertices = fields
                .map(|f| f.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(format!("bad vertex: {e}")))?;
            if vertices.len() != dim + 1 {
                return Err(err(format!(
                    "dimension {dim} needs {} vertices, found {}",
                    dim + 1,
                    vertices.len()
                )));
            }
            let simplex = Simplex::new(vertices).map_err(|e| err(e.to_string()))?;
            cells.push(Cell { simplex, value });
        }
        let max_dim = max_dim.unwrap_or_else(|| cells.iter().map(Cell::dim).max().unwrap_or(0));
        Ok(FilteredComplex::from_cells(cells, max_dim, scales))
    }
}

/// A single failure found by [`FilteredComplex::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MissingFace { simplex: Simplex, face: Simplex },
    NotMonotone { simplex: Simplex, face: Simplex },
    AboveMaxDim(Simplex),
    Duplicate(Simplex),
    NonFiniteValue(Simplex),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingFace { simplex, face } => {
                write!(f, "{simplex} is present but its face {face} is not")
            }
            Violation::NotMonotone { simplex, face } => {
                write!(f, "face {face} enters after its coface {simplex}")
            }
            Violation::AboveMaxDim(s) => write!(f, "{s} exceeds the dimension cap"),
            Violation::Duplicate(s) => write!(f, "{s} appears more than once"),
            Violation::NonFiniteValue(s) => write!(f, "{s} has a non-finite value"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Calls `f` on every `k`-subset of `items`, in lexicographic order.
pub(crate) fn for_each_combination(items: &[usize], k: usize, mut f: impl FnMut(&[usize])) {
    let n = items.len();
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<usize> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..k {
            buf[j] = items[idx[j]];
        }
    }
}

fn check_max_dim(max_dim: usize) -> Result<()> {
    if max_dim == 0 {
        return Err(Error::InvalidParameter("max_dim must be at least 1".into()));
    }
    Ok(())
}

/// Builds the multiscale clustering filtration, truncated to `max_dim`.
///
/// Each simplex gets the first scale at which all of its vertices share a
/// cluster. Clusters contained in a cluster of an earlier partition add nothing
/// and are skipped.
pub fn build_mcf(seq: &ScaledPartitionSequence, max_dim: usize) -> Result<FilteredComplex> {
    check_max_dim(max_dim)?;
    let mut values: HashMap<Simplex, f64> = HashMap::new();
    for (m, partition) in seq.partitions().iter().enumerate() {
        let t = seq.scale(m);
        for cluster in partition.clusters() {
            let covered = seq.partitions()[..m].iter().any(|earlier| {
                let l = earlier.label(cluster[0]);
                cluster.iter().all(|&x| earlier.label(x) == l)
            });
            if covered {
                continue;
            }
            for size in 1..=(max_dim + 1).min(cluster.len()) {
                for_each_combination(&cluster, size, |s| {
                    values
                        .entry(Simplex::from_sorted(s.to_vec()))
                        .or_insert(t);
                });
            }
        }
    }
    let cells = values
        .into_iter()
        .map(|(simplex, value)| Cell { simplex, value })
        .collect();
    Ok(FilteredComplex::from_cells(
        cells,
        max_dim,
        Some(seq.scales().to_vec()),
    ))
}

/// Cluster assignment graph: the weight of `{x, y}` is the first scale at which
/// `x` and `y` share a cluster. Pairs that never share a cluster have no edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: BTreeMap<(usize, usize), f64>,
    scales: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(n: usize, scales: Vec<f64>) -> Self {
        WeightedGraph {
            n,
            edges: BTreeMap::new(),
            scales,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Scale at which vertices enter, `t_1`.
    pub fn vertex_scale(&self) -> f64 {
        self.scales.first().copied().unwrap_or(0.0)
    }

    /// Sets the weight of `{x, y}`. Self-loops are ignored.
    pub fn set_weight(&mut self, x: usize, y: usize, w: f64) {
        if x != y {
            self.edges.insert((x.min(y), x.max(y)), w);
        }
    }

    /// `None` when the pair is never co-clustered.
    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        self.edges.get(&(x.min(y), x.max(y))).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.edges.iter().map(|(&k, &w)| (k, w))
    }

    /// Strong triangle inequality `w(x,z) <= max(w(x,y), w(y,z))` over all
    /// triples, with absent edges treated as `+inf`.
    pub fn is_ultrametric(&self) -> bool {
        let w = |a: usize, b: usize| self.weight(a, b).unwrap_or(f64::INFINITY);
        for x in 0..self.n {
            for y in 0..self.n {
                for z in (x + 1)..self.n {
                    if y == x || y == z {
                        continue;
                    }
                    if w(x, z) > w(x, y).max(w(y, z)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Builds the cluster assignment graph of `seq`.
pub fn build_cag(seq: &ScaledPartitionSequence) -> WeightedGraph {
    let mut g = WeightedGraph::new(seq.n_points(), seq.scales().to_vec());
    for (m, partition) in seq.partitions().iter().enumerate() {
        let t = seq.scale(m);
        for cluster in partition.clusters() {
            for (i, &x) in cluster.iter().enumerate() {
                for &y in &cluster[i + 1..] {
                    g.edges.entry((x, y)).or_insert(t);
                }
            }
        }
    }
    g
}

/// Clique complex filtration of `g`: a simplex enters at the largest weight
/// among its edges; vertices enter at `t_1`.
pub fn build_clique_filtration(g: &WeightedGraph, max_dim: usize) -> Result<FilteredComplex> {
    check_max_dim(max_dim)?;
    let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.n];
    for ((x, y), w) in g.edges() {
        upper[x].push((y, w));
    }
    let t0 = g.vertex_scale();
    let mut cells = Vec::new();
    let mut clique = Vec::with_capacity(max_dim + 1);
    for v in 0..g.n {
        clique.push(v);
        cells.push(Cell {
            simplex: Simplex::from_sorted(vec![v]),
            value: t0,
        });
        let candidates: Vec<usize> = upper[v].iter().map(|&(u, _)| u).collect();
        extend_cliques(g, &mut clique, t0, &candidates, max_dim, &mut cells);
        clique.pop();
    }
    Ok(FilteredComplex::from_cells(
        cells,
        max_dim,
        Some(g.scales.clone()),
    ))
}

fn extend_cliques(
    g: &WeightedGraph,
    clique: &mut Vec<usize>,
    value: f64,
    candidates: &[usize],
    max_dim: usize,
    cells: &mut Vec<Cell>,
) {
    if clique.len() > max_dim {
        return;
    }
    for (i, &u) in candidates.iter().enumerate() {
        let mut v = value;
        for &c in clique.iter() {
            v = v.max(g.weight(c, u).expect("candidate adjacent to clique"));
        }
        clique.push(u);
        cells.push(Cell {
            simplex: Simplex::from_sorted(clique.clone()),
            value: v,
        });
        let next: Vec<usize> = candidates[i + 1..]
            .iter()
            .copied()
            .filter(|&w| g.weight(u, w).is_some())
            .collect();
        extend_cliques(g, clique, v, &next, max_dim, cells);
        clique.pop();
    }
}

/// Layout of the nerve vertices of [`build_mcnf`]: cluster `i` of partition `m`
/// is vertex `offset(m) + i`.
#[derive(Debug, Clone)]
pub struct NerveVertices {
    offsets: Vec<usize>,
}

impl NerveVertices {
    pub fn new(seq: &ScaledPartitionSequence) -> Self {
        let mut offsets = Vec::with_capacity(seq.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for p in seq.partitions() {
            acc += p.num_clusters();
            offsets.push(acc);
        }
        NerveVertices { offsets }
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertex(&self, m: usize, cluster: usize) -> usize {
        self.offsets[m] + cluster
    }

    /// Inverse of [`NerveVertices::vertex`].
    pub fn cluster_of(&self, v: usize) -> (usize, usize) {
        let m = self.offsets.partition_point(|&o| o <= v) - 1;
        (m, v - self.offsets[m])
    }
}

/// Multiscale clustering nerve filtration, truncated to `max_dim`.
///
/// A set of clusters has a common point exactly when it is contained in the
/// set of clusters through some point `x` (one per partition), so simplices are
/// enumerated from those per-point stars. A simplex enters at the scale of its
/// latest cluster.
pub fn build_mcnf(seq: &ScaledPartitionSequence, max_dim: usize) -> Result<FilteredComplex> {
    check_max_dim(max_dim)?;
    let layout = NerveVertices::new(seq);
    let mut seen: HashSet<Simplex> = HashSet::new();
    let mut cells = Vec::new();
    let mut star = Vec::with_capacity(seq.len());
    for x in 0..seq.n_points() {
        star.clear();
        star.extend(
            seq.partitions()
                .iter()
                .enumerate()
                .map(|(m, p)| layout.vertex(m, p.label(x))),
        );
        for size in 1..=(max_dim + 1).min(star.len()) {
            for_each_combination(&star, size, |s| {
                let simplex = Simplex::from_sorted(s.to_vec());
                if seen.insert(simplex.clone()) {
                    let (m, _) = layout.cluster_of(*s.last().unwrap());
                    cells.push(Cell {
                        simplex,
                        value: seq.scale(m),
                    });
                }
            });
        }
    }
    Ok(FilteredComplex::from_cells(
        cells,
        max_dim,
        Some(seq.scales().to_vec()),
    ))
}
