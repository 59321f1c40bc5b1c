//! Command-line front end. Every stage reads and writes files so that stages can
//! be run and inspected one at a time.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 when an input fails
//! validation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtrations::{
    build_cag, build_clique_filtration, build_mcf, build_mcnf, FilteredComplex, DEFAULT_MAX_DIM,
};
use crate::homology::{
    diagrams_from_csv, diagrams_to_csv, reduce, PersistenceDiagram, PrimeField, DEFAULT_MODULUS,
};
use crate::measures::{MeasuresReport, SelectedScale, SelectionParams};
use crate::metrics::{diagram_distance, filtration_distance};
use crate::partitions::{Partition, ReorderStrategy, ScaledPartitionSequence};
use crate::synth::{
    gen_er, gen_msbm, gen_sbm, random_levels, sweep_partitions, PlantedHierarchy, PlantedSweep,
    RandomGraph, SweepMode,
};

#[derive(Debug, Parser)]
#[command(name = "mcf", version, about = "Persistent homology of partition sequences")]
pub struct Cli {
    /// Seed for every random generator.
    #[arg(long, env = "MCF_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random graph and a partition sequence swept from it.
    Generate(GenerateArgs),
    /// Sweep an existing edge-list graph into a partition sequence.
    Sweep(SweepArgs),
    /// Build a filtered complex from a partition sequence.
    Build(BuildArgs),
    /// Persistence diagrams of a partition sequence or filtration file.
    Ph(PhArgs),
    /// Hierarchy, conflict and selected scales of a partition sequence.
    Measures(MeasuresArgs),
    /// Distance between two diagram CSVs, or between two filtrations.
    Distance(DistanceArgs),
    /// Check a partition-sequence or filtration file.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FiltrationKind {
    Mcf,
    Mcnf,
    CagClique,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReorderKind {
    None,
    Clusters,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Er,
    Sbm,
    Msbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Components,
    Planted,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Partition sequence (.json or .csv).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FiltrationKind::Mcf)]
    pub filtration: FiltrationKind,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
    /// Prime field characteristic.
    #[arg(long, default_value_t = DEFAULT_MODULUS)]
    pub modulus: u64,
    /// Append the one-cluster partition at this scale, so that every
    /// dimension-0 class but one dies.
    #[arg(long, value_name = "SCALE")]
    pub append_trivial: Option<f64>,
    /// Reorder the partitions before building; scales stay in place.
    #[arg(long, value_enum, default_value_t = ReorderKind::None)]
    pub reorder: ReorderKind,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PhArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Output directory for measures.csv and selection.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Minimum plateau length for scale selection.
    #[arg(long, default_value_t = 3)]
    pub plateau: usize,
    /// Maximum number of unresolved conflicts at a selected scale.
    #[arg(long, default_value_t = 0)]
    pub betti_ceiling: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DistanceArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Order of the distance; `inf` gives the bottleneck / sup distance.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub q: f64,
    /// Homology dimension compared when the inputs are diagram CSVs.
    #[arg(long, default_value_t = 0)]
    pub dim: usize,
    /// Compare filtration functions instead of diagrams. Inputs are filtration
    /// files or partition sequences.
    #[arg(long)]
    pub filtrations: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepOpts {
    #[arg(long, value_enum, default_value_t = SweepKind::Planted)]
    pub mode: SweepKind,
    /// Number of scales.
    #[arg(long, default_value_t = 60)]
    pub scales: usize,
    #[arg(long, default_value_t = 0.0)]
    pub scale_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale_step: f64,
    /// Planted levels as cluster counts, finest first (uniform blocks).
    #[arg(long, value_delimiter = ',')]
    pub planted: Vec<usize>,
    /// Independent random levels with these cluster counts, instead of planted ones.
    #[arg(long, value_delimiter = ',')]
    pub random_levels: Vec<usize>,
    /// Take the levels from the partitions of a sequence file.
    #[arg(long)]
    pub levels_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.5)]
    pub transition: f64,
    #[arg(long)]
    pub singletons_first: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = GraphKind::Msbm)]
    pub kind: GraphKind,
    #[arg(long, default_value_t = 90)]
    pub n: usize,
    /// Edge count for `er`.
    #[arg(long, default_value_t = 400)]
    pub edges: usize,
    /// Block sizes for `sbm`.
    #[arg(long, value_delimiter = ',', default_value = "30,30,30")]
    pub blocks: Vec<usize>,
    #[arg(long, default_value_t = 0.3)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    pub p_out: f64,
    /// Edge probabilities for `msbm`, finest shared level first, then unrelated pairs.
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.4,0.15,0.02")]
    pub probs: Vec<f64>,
    #[command(flatten)]
    pub sweep: SweepOpts,
    /// Output directory for graph.txt, levels.json and sequence.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Edge-list graph (`u v` per line).
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub sweep: SweepOpts,
    #[arg(long, short)]
    pub out: PathBuf,
}

/// Resolved settings shared by the build, ph and measures stages.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub filtration: FiltrationKind,
    pub max_dim: usize,
    pub modulus: u64,
    pub append_trivial: Option<f64>,
    pub reorder: ReorderKind,
    pub seed: u64,
    pub selection: SelectionParams,
}

impl RunConfig {
    pub fn from_pipeline(p: &PipelineArgs, seed: u64) -> Result<Self> {
        let cfg = RunConfig {
            input: p.input.clone(),
            filtration: p.filtration,
            max_dim: p.max_dim,
            modulus: p.modulus,
            append_trivial: p.append_trivial,
            reorder: p.reorder,
            seed,
            selection: SelectionParams::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_dim < 1 {
            return Err(Error::InvalidParameter("max-dim must be at least 1".into()));
        }
        PrimeField::new(self.modulus)?;
        Ok(())
    }

    /// Reads, optionally reorders and pads the input sequence.
    pub fn sequence(&self) -> Result<ScaledPartitionSequence> {
        let mut seq = read_sequence(&self.input)?;
        let strategy = match self.reorder {
            ReorderKind::None => None,
            ReorderKind::Clusters => Some(ReorderStrategy::ClusterCount),
            ReorderKind::Exhaustive => Some(ReorderStrategy::exhaustive()),
        };
        if let Some(s) = strategy {
            seq = seq.permuted(&seq.reorder(s)?)?;
        }
        if let Some(t) = self.append_trivial {
            seq = seq.with_trivial_tail(t)?;
        }
        Ok(seq)
    }

    pub fn complex(&self, seq: &ScaledPartitionSequence) -> Result<FilteredComplex> {
        build(seq, self.filtration, self.max_dim)
    }
}

fn build(
    seq: &ScaledPartitionSequence,
    kind: FiltrationKind,
    max_dim: usize,
) -> Result<FilteredComplex> {
    match kind {
        FiltrationKind::Mcf => build_mcf(seq, max_dim),
        FiltrationKind::Mcnf => build_mcnf(seq, max_dim),
        FiltrationKind::CagClique => build_clique_filtration(&build_cag(seq), max_dim),
    }
}

fn origin(path: &Path) -> String {
    path.display().to_string()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Reads a partition sequence; `.csv` files use the CSV layout, anything else JSON.
pub fn read_sequence(path: &Path) -> Result<ScaledPartitionSequence> {
    let text = read_text(path)?;
    if has_extension(path, "csv") {
        ScaledPartitionSequence::from_csv(&text, &origin(path))
    } else {
        ScaledPartitionSequence::from_json(&text, &origin(path))
    }
}

fn is_sequence_file(path: &Path) -> bool {
    has_extension(path, "json") || has_extension(path, "csv")
}

/// Reads an edge list. A `# n <count>` comment fixes the vertex count;
/// otherwise it is one more than the largest vertex id.
pub fn read_edge_list(path: &Path) -> Result<RandomGraph> {
    let text = read_text(path)?;
    let mut n = None;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| Error::Parse {
            path: origin(path),
            line: i + 1,
            message,
        };
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let mut it = comment.split_whitespace();
            if it.next() == Some("n") {
                let v = it.next().unwrap_or("");
                n = Some(v.parse().map_err(|_| err(format!("bad vertex count {v:?}")))?);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected `u v`, found {} fields", fields.len())));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("vertex {s:?} is not a non-negative integer")))
        };
        edges.push((parse(fields[0])?, parse(fields[1])?));
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    RandomGraph::new(n, edges, 0)
}

fn edge_list_text(g: &RandomGraph) -> String {
    format!("# n {}\n{}", g.n(), g.to_edge_list())
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[derive(Serialize)]
struct SelectionFile<'a> {
    average_hierarchy: Option<f64>,
    params: SelectionParams,
    selected: &'a [SelectedScale],
}

fn levels_for(opts: &SweepOpts, n: usize, seed: u64) -> Result<Vec<Partition>> {
    if let Some(path) = &opts.levels_file {
        return Ok(read_sequence(path)?.partitions().to_vec());
    }
    if !opts.random_levels.is_empty() {
        return random_levels(n, &opts.random_levels, seed);
    }
    if opts.planted.is_empty() {
        return Err(Error::InvalidParameter(
            "planted sweeps need --planted, --random-levels or --levels-file".into(),
        ));
    }
    Ok(PlantedHierarchy::uniform(n, &opts.planted)?.levels().to_vec())
}

fn run_sweep(
    g: &RandomGraph,
    opts: &SweepOpts,
    levels: Option<Vec<Partition>>,
    seed: u64,
) -> Result<ScaledPartitionSequence> {
    if !(opts.scale_step > 0.0) {
        return Err(Error::InvalidParameter("--scale-step must be positive".into()));
    }
    let scales: Vec<f64> = (0..opts.scales)
        .map(|m| opts.scale_start + m as f64 * opts.scale_step)
        .collect();
    let mode = match opts.mode {
        SweepKind::Components => SweepMode::Components,
        SweepKind::Planted => {
            let levels = match levels {
                Some(l) => l,
                None => levels_for(opts, g.n(), seed)?,
            };
            SweepMode::PlantedInterpolation(PlantedSweep {
                levels,
                noise: opts.noise,
                transition: opts.transition,
                singletons_first: opts.singletons_first,
            })
        }
    };
    sweep_partitions(g, &scales, &mode, seed)
}

fn cmd_generate(a: &GenerateArgs, seed: u64) -> Result<()> {
    let (graph, levels) = match a.kind {
        GraphKind::Er => (gen_er(a.n, a.edges, seed)?, None),
        GraphKind::Sbm => (gen_sbm(&a.blocks, a.p_in, a.p_out, seed)?, None),
        GraphKind::Msbm => {
            let counts = if a.sweep.planted.is_empty() {
                vec![27, 9, 3]
            } else {
                a.sweep.planted.clone()
            };
            let planted = PlantedHierarchy::uniform(a.n, &counts)?;
            let g = gen_msbm(&planted, &a.probs, seed)?;
            let levels = (a.sweep.random_levels.is_empty() && a.sweep.levels_file.is_none())
                .then(|| planted.levels().to_vec());
            (g, levels)
        }
    };
    let levels = match (a.sweep.mode, levels) {
        (SweepKind::Components, _) => None,
        (_, Some(l)) => Some(l),
        (_, None) if a.kind == GraphKind::Sbm && a.sweep.planted.is_empty()
            && a.sweep.random_levels.is_empty()
            && a.sweep.levels_file.is_none() =>
        {
            let labels: Vec<usize> = a
                .blocks
                .iter()
                .enumerate()
                .flat_map(|(b, &s)| std::iter::repeat(b).take(s))
                .collect();
            Some(vec![Partition::from_labels(&labels)])
        }
        (_, None) => Some(levels_for(&a.sweep, graph.n(), seed)?),
    };
    let seq = run_sweep(&graph, &a.sweep, levels.clone(), seed)?;
    write_atomic(&a.out_dir.join("graph.txt"), &edge_list_text(&graph))?;
    if let Some(levels) = levels {
        let planted = ScaledPartitionSequence::enumerated(levels)?;
        write_atomic(&a.out_dir.join("levels.json"), &planted.to_json())?;
    }
    write_atomic(&a.out_dir.join("sequence.json"), &seq.to_json())
}

fn cmd_sweep(a: &SweepArgs, seed: u64) -> Result<()> {
    let g = read_edge_list(&a.graph)?;
    let seq = run_sweep(&g, &a.sweep, None, seed)?;
    write_atomic(&a.out, &seq.to_json())
}

fn cmd_build(a: &BuildArgs, seed: u64) -> Result<()> {
    let cfg = RunConfig::from_pipeline(&a.pipeline, seed)?;
    let fc = cfg.complex(&cfg.sequence()?)?;
    write_atomic(&a.out, &fc.to_text())
}

/// A filtration from a filtration text file, or built from a sequence file.
fn load_complex(cfg: &RunConfig) -> Result<FilteredComplex> {
    if is_sequence_file(&cfg.input) {
        return cfg.complex(&cfg.sequence()?);
    }
    let text = read_text(&cfg.input)?;
    let fc = FilteredComplex::from_text(&text, &origin(&cfg.input))?;
    let report = fc.validate();
    if !report.is_valid() {
        return Err(Error::InvalidComplex(format!(
            "{}: {}",
            cfg.input.display(),
            report.violations[0]
        )));
    }
    Ok(fc)
}

fn cmd_ph(a: &PhArgs, seed: u64) -> Result<()> {
    let cfg = RunConfig::from_pipeline(&a.pipeline, seed)?;
    let r = reduce(&load_complex(&cfg)?, cfg.modulus)?;
    write_atomic(&a.out, &diagrams_to_csv(&r.diagrams()))
}

fn cmd_measures(a: &MeasuresArgs, seed: u64) -> Result<()> {
    let mut cfg = RunConfig::from_pipeline(&a.pipeline, seed)?;
    cfg.selection = SelectionParams {
        min_plateau: a.plateau,
        betti_ceiling: a.betti_ceiling,
    };
    let seq = cfg.sequence()?;
    let r = reduce(&cfg.complex(&seq)?, cfg.modulus)?;
    let report = MeasuresReport::compute(&seq, &r, cfg.selection)?;
    let selection = SelectionFile {
        average_hierarchy: report.average_hierarchy,
        params: cfg.selection,
        selected: &report.selected,
    };
    let mut json = serde_json::to_string_pretty(&selection).expect("selection serialises");
    json.push('\n');
    write_atomic(&a.out_dir.join("measures.csv"), &report.to_csv())?;
    write_atomic(&a.out_dir.join("selection.json"), &json)
}

fn diagram_of(path: &Path, dim: usize) -> Result<PersistenceDiagram> {
    let all = diagrams_from_csv(&read_text(path)?, &origin(path))?;
    Ok(all
        .into_iter()
        .find(|d| d.dim() == dim)
        .unwrap_or_else(|| PersistenceDiagram::empty(dim)))
}

fn cmd_distance(a: &DistanceArgs) -> Result<f64> {
    if !(a.q >= 1.0) {
        return Err(Error::InvalidParameter(format!("need q >= 1, got {}", a.q)));
    }
    if a.filtrations {
        let load = |path: &Path| -> Result<FilteredComplex> {
            if is_sequence_file(path) {
                build_mcf(&read_sequence(path)?, a.max_dim)
            } else {
                FilteredComplex::from_text(&read_text(path)?, &origin(path))
            }
        };
        return filtration_distance(&load(&a.a)?, &load(&a.b)?, a.q);
    }
    diagram_distance(&diagram_of(&a.a, a.dim)?, &diagram_of(&a.b, a.dim)?, a.q)
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<bool> {
    if is_sequence_file(&a.path) {
        let seq = read_sequence(&a.path)?;
        writeln!(
            out,
            "ok: {} partitions of {} points; hierarchical: {}",
            seq.len(),
            seq.n_points(),
            seq.is_hierarchical()
        )?;
        return Ok(true);
    }
    let fc = FilteredComplex::from_text(&read_text(&a.path)?, &origin(&a.path))?;
    let report = fc.validate();
    if report.is_valid() {
        writeln!(out, "ok: {} cells, max dim {}", fc.len(), fc.max_dim())?;
    } else {
        for v in &report.violations {
            writeln!(out, "{}: {v}", a.path.display())?;
        }
    }
    Ok(report.is_valid())
}

/// Exit status for an error: 2 for inputs that fail validation, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::InvalidSequence(_)
        | Error::InvalidPartition(_)
        | Error::InvalidSimplex(_)
        | Error::InvalidComplex(_)
        | Error::SizeMismatch { .. }
        | Error::CellSetMismatch(_) => 2,
        _ => 1,
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let seed = cli.seed;
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, seed)?,
        Command::Sweep(a) => cmd_sweep(a, seed)?,
        Command::Build(a) => cmd_build(a, seed)?,
        Command::Ph(a) => cmd_ph(a, seed)?,
        Command::Measures(a) => cmd_measures(a, seed)?,
        Command::Distance(a) => {
            let d = cmd_distance(a)?;
            writeln!(out, "{d}")?;
        }
        Command::Validate(a) => {
            return Ok(if cmd_validate(a, out)? { 0 } else { 2 });
        }
    }
    Ok(0)
}

/// Parses `args` (program name first) and runs the command, returning the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
