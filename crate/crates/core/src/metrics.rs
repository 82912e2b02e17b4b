//! Experiment records, density/time sweeps over `k`, and report files.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{density_upper_bound, greedy_feige, rank1_lrbo};
use crate::error::{DksError, Result};
use crate::fw::{fw_solve, FwConfig, SolveReport};
use crate::graph::{Graph, ProblemInstance};
use crate::param::{param_solve, OptimizerConfig};
use crate::rounding::VertexSelection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Fw,
    Param,
    Greedy,
    Rank1,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::Fw, SolverKind::Param, SolverKind::Greedy, SolverKind::Rank1];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Fw => "fw",
            SolverKind::Param => "param",
            SolverKind::Greedy => "greedy",
            SolverKind::Rank1 => "rank1",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = DksError;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| DksError::Config(format!("unknown solver {s:?} (expected fw, param, greedy or rank1)")))
    }
}

/// Per-solver settings shared by `solve` and `sweep`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverSettings {
    pub fw: FwConfig<f64>,
    pub param: OptimizerConfig<f64>,
}

fn baseline_report(
    solver: &'static str,
    g: &Graph,
    selection: VertexSelection<f64>,
    lambda: f64,
    started: Instant,
) -> SolveReport<f64> {
    let selection = selection.with_lambda(lambda);
    let mut point = vec![0.0; g.n()];
    for &v in &selection.vertices {
        point[v] = 1.0;
    }
    SolveReport {
        solver,
        objective_trace: vec![selection.objective_at_lambda],
        iterations: 0,
        converged: true,
        integral: true,
        final_point: point,
        final_gap: None,
        selection,
        wall_time: started.elapsed().as_secs_f64(),
    }
}

/// Runs one solver with its documented defaults.
pub fn run_solver(
    kind: SolverKind,
    g: &Graph,
    k: usize,
    lambda: f64,
    settings: &SolverSettings,
) -> Result<SolveReport<f64>> {
    let inst = ProblemInstance::new(g, k, lambda)?;
    let started = Instant::now();
    match kind {
        SolverKind::Fw => fw_solve(&inst, &settings.fw, None),
        SolverKind::Param => param_solve(&inst, &settings.param, None),
        SolverKind::Greedy => Ok(baseline_report("greedy", g, greedy_feige(g, k)?, lambda, started)),
        SolverKind::Rank1 => Ok(baseline_report("rank1", g, rank1_lrbo(g, k)?, lambda, started)),
    }
}

/// One cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub lambda: f64,
    pub solver: String,
    pub normalized_density: f64,
    pub objective: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub integral_before_projection: bool,
    pub upper_bound: Option<f64>,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
}

impl ExperimentRecord {
    fn from_report(dataset: &str, g: &Graph, k: usize, lambda: f64, report: &SolveReport<f64>, bound: Option<f64>) -> Self {
        Self {
            dataset: dataset.to_string(),
            n: g.n(),
            m: g.m(),
            k,
            lambda,
            solver: report.solver.to_string(),
            normalized_density: report.selection.normalized_density,
            objective: report.selection.objective_at_lambda,
            iterations: report.iterations,
            wall_time_s: report.wall_time,
            integral_before_projection: report.integral,
            upper_bound: bound,
            status: "ok".into(),
        }
    }

    fn failed(dataset: &str, g: &Graph, k: usize, lambda: f64, solver: &str, bound: Option<f64>, err: &DksError) -> Self {
        Self {
            dataset: dataset.to_string(),
            n: g.n(),
            m: g.m(),
            k,
            lambda,
            solver: solver.to_string(),
            normalized_density: f64::NAN,
            objective: f64::NAN,
            iterations: 0,
            wall_time_s: 0.0,
            integral_before_projection: false,
            upper_bound: bound,
            status: format!("failed: {err}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Sweep description.
#[derive(Debug, Clone)]
pub struct SweepSpec<'a> {
    pub dataset: &'a str,
    pub lambda: f64,
    pub k_values: &'a [usize],
    pub solvers: &'a [SolverKind],
    pub settings: SolverSettings,
    /// Worker threads; `0` uses the rayon default.
    pub jobs: usize,
}

/// Runs every solver at every `k`, attaching the spectral density bound.
///
/// A failing cell becomes a `failed` record; the sweep carries on. Records are
/// sorted by `(dataset, solver, k)`.
pub fn run_sweep(g: &Graph, spec: &SweepSpec<'_>) -> Result<Vec<ExperimentRecord>> {
    if spec.k_values.is_empty() || spec.solvers.is_empty() {
        return Err(DksError::Config("a sweep needs at least one k and one solver".into()));
    }
    if spec.k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DksError::Domain("k values must be strictly ascending".into()));
    }
    if let Some(&bad) = spec.k_values.iter().find(|&&k| k == 0 || k > g.n()) {
        return Err(DksError::Domain(format!("k={bad} is outside 1..={}", g.n())));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| DksError::Config(format!("thread pool: {e}")))?;

    let mut records = pool.install(|| {
        let bounds: Vec<Option<f64>> = spec
            .k_values
            .par_iter()
            .map(|&k| if k >= 2 { density_upper_bound(g, k).ok() } else { None })
            .collect();
        let cells: Vec<(usize, Option<f64>, SolverKind)> = spec
            .k_values
            .iter()
            .zip(&bounds)
            .flat_map(|(&k, &b)| spec.solvers.iter().map(move |&s| (k, b, s)))
            .collect();
        cells
            .into_par_iter()
            .map(|(k, bound, solver)| match run_solver(solver, g, k, spec.lambda, &spec.settings) {
                Ok(report) => ExperimentRecord::from_report(spec.dataset, g, k, spec.lambda, &report, bound),
                Err(e) => ExperimentRecord::failed(spec.dataset, g, k, spec.lambda, solver.name(), bound, &e),
            })
            .collect::<Vec<_>>()
    });
    records.sort_by(|a, b| (&a.dataset, &a.solver, a.k).cmp(&(&b.dataset, &b.solver, b.k)));
    Ok(records)
}

/// Scores an externally produced vertex set as a record.
pub fn score_selection(
    g: &Graph,
    dataset: &str,
    solver: &str,
    vertices: Vec<usize>,
    lambda: f64,
) -> Result<ExperimentRecord> {
    let k = vertices.len();
    if k == 0 {
        return Err(DksError::Domain("selection is empty".into()));
    }
    let sel = VertexSelection::from_vertices(g, vertices, lambda)?;
    let bound = if k >= 2 { Some(density_upper_bound(g, k)?) } else { None };
    Ok(ExperimentRecord {
        dataset: dataset.to_string(),
        n: g.n(),
        m: g.m(),
        k,
        lambda,
        solver: solver.to_string(),
        normalized_density: sel.normalized_density,
        objective: sel.objective_at_lambda,
        iterations: 0,
        wall_time_s: 0.0,
        integral_before_projection: true,
        upper_bound: bound,
        status: "ok".into(),
    })
}

/// Reads one original vertex id per line (`#` comments allowed) and maps the
/// ids onto `g`'s dense ids.
pub fn read_selection_file<P: AsRef<Path>>(path: P, g: &Graph) -> Result<Vec<usize>> {
    let index = g.label_index();
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let label: u64 = t.parse().map_err(|_| DksError::Parse {
            line: i + 1,
            message: format!("invalid vertex id {t:?}"),
        })?;
        let v = *index.get(&label).ok_or_else(|| DksError::Parse {
            line: i + 1,
            message: format!("vertex {label} is not in the graph"),
        })?;
        if std::mem::replace(&mut seen[v], true) {
            return Err(DksError::Parse { line: i + 1, message: format!("vertex {label} listed twice") });
        }
        out.push(v);
    }
    Ok(out)
}

/// Rounds to 12 significant digits.
pub fn sig12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = DksError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(DksError::Config(format!("unknown report format {other:?}"))),
        }
    }
}

fn rounded(r: &ExperimentRecord) -> ExperimentRecord {
    ExperimentRecord {
        lambda: sig12(r.lambda),
        normalized_density: sig12(r.normalized_density),
        objective: sig12(r.objective),
        wall_time_s: sig12(r.wall_time_s),
        upper_bound: r.upper_bound.map(sig12),
        ..r.clone()
    }
}

/// Serializes records to any writer.
pub fn write_records<W: Write>(records: &[ExperimentRecord], out: W, format: ReportFormat) -> Result<()> {
    if records.is_empty() {
        return Err(DksError::Domain("no records to write".into()));
    }
    let records: Vec<ExperimentRecord> = records.iter().map(rounded).collect();
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in &records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        ReportFormat::Json => {
            let mut w = BufWriter::new(out);
            serde_json::to_writer_pretty(&mut w, &records)?;
            writeln!(w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes records as CSV (header plus one row each) or a JSON array.
pub fn write_report<P: AsRef<Path>>(records: &[ExperimentRecord], path: P, format: ReportFormat) -> Result<()> {
    if records.is_empty() {
        return Err(DksError::Domain("no records to write".into()));
    }
    write_records(records, File::create(path)?, format)
}

pub fn read_report<P: AsRef<Path>>(path: P, format: ReportFormat) -> Result<Vec<ExperimentRecord>> {
    let file = File::open(path)?;
    match format {
        ReportFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(file);
            Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
        }
        ReportFormat::Json => Ok(serde_json::from_reader(BufReader::new(file))?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn record(k: usize, density: f64) -> ExperimentRecord {
        ExperimentRecord {
            dataset: "toy".into(),
            n: 6,
            m: 6,
            k,
            lambda: 1.0,
            solver: "fw".into(),
            normalized_density: density,
            objective: 9.0,
            iterations: 3,
            wall_time_s: 0.00123456789012,
            integral_before_projection: true,
            upper_bound: Some(1.0),
            status: "ok".into(),
        }
    }

    #[test]
    fn one_record_is_a_two_line_csv() {
        let mut buf = Vec::new();
        write_records(&[record(3, 1.0)], &mut buf, ReportFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(
            text.lines().next().unwrap(),
            "dataset,n,m,k,lambda,solver,normalized_density,objective,iterations,wall_time_s,\
             integral_before_projection,upper_bound,status"
        );
    }

    #[test]
    fn empty_report_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_report(&[], dir.path().join("r.csv"), ReportFormat::Csv).is_err());
    }

    #[test]
    fn round_trip_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![record(2, 2.0 / 3.0), record(3, 1.0), ExperimentRecord { upper_bound: None, ..record(4, 0.5) }];
        for (format, name) in [(ReportFormat::Csv, "r.csv"), (ReportFormat::Json, "r.json")] {
            let path = dir.path().join(name);
            write_report(&records, &path, format).unwrap();
            let back = read_report(&path, format).unwrap();
            assert_eq!(back.len(), records.len());
            for (a, b) in records.iter().zip(&back) {
                assert!((a.normalized_density - b.normalized_density).abs() <= 1e-12);
                assert!((a.wall_time_s - b.wall_time_s).abs() <= 1e-12);
                assert_eq!((a.k, &a.solver, a.upper_bound), (b.k, &b.solver, b.upper_bound));
            }
        }
    }

    #[test]
    fn sig12_rounding() {
        assert_eq!(sig12(2.0 / 3.0), 0.666666666667);
        assert_eq!(sig12(1234.5678901234567), 1234.56789012);
        assert_eq!(sig12(0.0), 0.0);
    }

    #[test]
    fn sweep_on_two_triangles() {
        let g = two_triangles();
        let spec = SweepSpec {
            dataset: "two-triangles",
            lambda: 1.0,
            k_values: &[2, 3],
            solvers: &[SolverKind::Fw, SolverKind::Greedy],
            settings: SolverSettings::default(),
            jobs: 2,
        };
        let records = run_sweep(&g, &spec).unwrap();
        assert_eq!(records.len(), 4);
        for r in &records {
            assert!(r.is_ok());
            assert_eq!(r.normalized_density, 1.0, "{r:?}");
            assert!(r.normalized_density <= r.upper_bound.unwrap() + 1e-9);
        }
        let order: Vec<(&str, usize)> = records.iter().map(|r| (r.solver.as_str(), r.k)).collect();
        assert_eq!(order, vec![("fw", 2), ("fw", 3), ("greedy", 2), ("greedy", 3)]);
    }

    #[test]
    fn whole_graph_forces_global_density() {
        let g = path(5);
        let spec = SweepSpec {
            dataset: "p5",
            lambda: 1.0,
            k_values: &[5],
            solvers: &SolverKind::ALL,
            settings: SolverSettings::default(),
            jobs: 1,
        };
        for r in run_sweep(&g, &spec).unwrap() {
            assert!((r.normalized_density - 2.0 * 4.0 / 20.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sweep_validation() {
        let g = complete(4);
        let mut spec = SweepSpec {
            dataset: "k4",
            lambda: 1.0,
            k_values: &[3, 2],
            solvers: &[SolverKind::Fw],
            settings: SolverSettings::default(),
            jobs: 1,
        };
        assert!(run_sweep(&g, &spec).is_err());
        spec.k_values = &[2, 5];
        assert!(run_sweep(&g, &spec).is_err());
    }

    #[test]
    fn failed_cells_are_recorded() {
        let g = complete(4);
        let mut settings = SolverSettings::default();
        settings.param.learning_rate = -1.0;
        let spec = SweepSpec {
            dataset: "k4",
            lambda: 1.0,
            k_values: &[2],
            solvers: &[SolverKind::Fw, SolverKind::Param],
            settings,
            jobs: 1,
        };
        let records = run_sweep(&g, &spec).unwrap();
        assert!(records.iter().find(|r| r.solver == "fw").unwrap().is_ok());
        assert!(records.iter().find(|r| r.solver == "param").unwrap().status.starts_with("failed"));
    }

    #[test]
    fn sweeps_are_reproducible() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let g = crate::oracle::family::random_gnp(80, 0.1, &mut rng);
        let spec = SweepSpec {
            dataset: "gnp",
            lambda: 1.0,
            k_values: &[5, 10, 20],
            solvers: &SolverKind::ALL,
            settings: SolverSettings::default(),
            jobs: 4,
        };
        let a = run_sweep(&g, &spec).unwrap();
        let b = run_sweep(&g, &spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.normalized_density, x.iterations), (y.normalized_density, y.iterations));
            assert!(x.normalized_density <= x.upper_bound.unwrap() + 1e-9);
        }
    }

    #[test]
    fn selection_files() {
        let g = crate::graph::parse_edge_list(std::io::BufReader::new(&b"10 20\n20 30\n30 10\n30 40\n"[..]), false).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sel.txt");
        std::fs::write(&path, "# from elsewhere\n30\n10\n20\n").unwrap();
        let vs = read_selection_file(&path, &g).unwrap();
        let r = score_selection(&g, "toy", "external", vs, 1.0).unwrap();
        assert_eq!((r.k, r.normalized_density, r.objective), (3, 1.0, 9.0));
        std::fs::write(&path, "10\n99\n").unwrap();
        assert!(read_selection_file(&path, &g).is_err());
        std::fs::write(&path, "10\n10\n").unwrap();
        assert!(read_selection_file(&path, &g).is_err());
    }
}
