//! Error metrics and the δ- / c-sweep drivers behind the CLI.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::assembly::{fmt17, Discretization};
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::mesh::{Side, TensorMesh};
use crate::problems::{self, outward_normal, ManufacturedProblem, ReferenceField};
use crate::solve::{solve_spd, SolutionField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    DeltaSweep,
    CSweep,
}

/// One study: either a sweep over `deltas` at fixed `c`, or a sweep over
/// `c_values` for every entry of `deltas`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub n_cells: usize,
    pub deltas: Vec<f64>,
    pub c: f64,
    pub c_values: Vec<f64>,
    pub problem: String,
    pub study: Study,
    pub output_path: PathBuf,
    pub dump_system: Option<PathBuf>,
    pub reference_n: Option<usize>,
}

impl ExperimentConfig {
    /// Default horizons `δ₀·2^(-k)`, `k = 0..4`, with `δ₀ = 0.1` in 1D and `0.2` in 2D.
    pub fn default_deltas(dim: usize) -> Vec<f64> {
        let start = if dim == 1 { 0.1 } else { 0.2 };
        (0..5).map(|k| start * 0.5f64.powi(k)).collect()
    }

    /// Penalty strength used for the convergence studies: 1000 in 1D, 10 in 2D.
    pub fn default_c(dim: usize) -> f64 {
        if dim == 1 {
            1000.0
        } else {
            10.0
        }
    }

    pub fn default_c_values() -> Vec<f64> {
        vec![1.0, 10.0, 100.0, 1000.0, 10000.0]
    }

    pub fn default_problem(dim: usize) -> &'static str {
        if dim == 1 {
            "poly10"
        } else {
            "xlog"
        }
    }

    /// Paper-style defaults for a δ-sweep in `dim` dimensions.
    pub fn delta_sweep(dim: usize, output_path: impl Into<PathBuf>) -> Self {
        Self {
            dim,
            n_cells: 20,
            deltas: Self::default_deltas(dim),
            c: Self::default_c(dim),
            c_values: Self::default_c_values(),
            problem: Self::default_problem(dim).into(),
            study: Study::DeltaSweep,
            output_path: output_path.into(),
            dump_system: None,
            reference_n: None,
        }
    }

    pub fn validate(&self) -> Result<ManufacturedProblem> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(1..=2).contains(&self.dim) {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if self.n_cells == 0 {
            return bad("N must be positive".into());
        }
        if self.deltas.is_empty() {
            return bad("the list of deltas is empty".into());
        }
        if let Some(d) = self.deltas.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return bad(format!("delta must be positive, got {d}"));
        }
        let cs: &[f64] = match self.study {
            Study::DeltaSweep => std::slice::from_ref(&self.c),
            Study::CSweep => &self.c_values,
        };
        if cs.is_empty() {
            return bad("the list of c values is empty".into());
        }
        if let Some(c) = cs.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return bad(format!("c must be positive, got {c}"));
        }
        if let Some(r) = self.reference_n {
            if r <= self.n_cells {
                return bad(format!("reference N ({r}) must exceed N ({})", self.n_cells));
            }
        }
        let problem = problems::lookup(&self.problem).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown problem `{}` (available: {})",
                self.problem,
                problems::builtin_names().join(", ")
            ))
        })?;
        if problem.dim() != self.dim {
            return bad(format!("problem `{}` is {}D but dim is {}", self.problem, problem.dim(), self.dim));
        }
        Ok(problem)
    }

    /// `(delta, c)` pairs in execution order.
    pub fn runs(&self) -> Vec<(f64, f64)> {
        match self.study {
            Study::DeltaSweep => self.deltas.iter().map(|&d| (d, self.c)).collect(),
            Study::CSweep => self.deltas.iter().flat_map(|&d| self.c_values.iter().map(move |&c| (d, c))).collect(),
        }
    }
}

/// Errors of one run against the reference field.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub dim: usize,
    pub n_cells: usize,
    pub delta: f64,
    pub c: f64,
    pub problem: String,
    pub rmse: f64,
    pub bd_error: f64,
    pub bd_dn_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySummary {
    pub reports: Vec<ErrorReport>,
    /// Fitted log–log slope of rmse against δ (δ-sweeps with at least two horizons).
    pub slope: Option<f64>,
}

/// A solved V_h function used as the truth for mesh-refinement comparisons.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub mesh: TensorMesh,
    pub coefficients: Vec<f64>,
}

impl ReferenceField for DiscreteField {
    fn value(&self, x: &[f64]) -> f64 {
        self.mesh.evaluate(&self.coefficients, x).expect("point inside the unit cube")
    }

    fn normal_derivative(&self, x: &[f64], normal: &[f64]) -> f64 {
        normal_derivative_from_interior(&self.mesh, &self.coefficients, x, normal)
    }
}

/// `∂u/∂n` of a V_h function using one-sided derivatives from inside the domain.
pub fn normal_derivative_from_interior(mesh: &TensorMesh, coeffs: &[f64], x: &[f64], normal: &[f64]) -> f64 {
    normal
        .iter()
        .enumerate()
        .filter(|(_, &n)| n != 0.0)
        .map(|(axis, &n)| {
            let side = if n < 0.0 { Side::Right } else { Side::Left };
            n * mesh.evaluate_partial(coeffs, x, axis, side).expect("valid boundary point")
        })
        .sum()
}

/// Root mean squared nodal error over all `(3N+1)^d` nodes.
pub fn compute_rmse(coeffs: &[f64], truth: &dyn ReferenceField, mesh: &TensorMesh) -> f64 {
    let n = mesh.n_dofs();
    let sum: f64 = (0..n)
        .map(|lin| {
            let x = mesh.node_point(&mesh.dof_index(lin));
            let e = truth.value(&x) - coeffs[lin];
            e * e
        })
        .sum();
    (sum / n as f64).sqrt()
}

/// Linear indices of the boundary nodes, and whether each one is a corner.
pub fn boundary_nodes(mesh: &TensorMesh) -> Vec<(usize, bool)> {
    let last = 3 * mesh.n_cells();
    match mesh.dim() {
        1 => vec![(0, false), (last, false)],
        _ => {
            let n1 = mesh.nodes_per_dim();
            let mut out = Vec::with_capacity(4 * last);
            for j1 in 0..n1 {
                for j2 in 0..n1 {
                    let e1 = j1 == 0 || j1 == last;
                    let e2 = j2 == 0 || j2 == last;
                    if e1 || e2 {
                        out.push((j1 * n1 + j2, e1 && e2));
                    }
                }
            }
            out
        }
    }
}

/// Boundary RMS errors `(value, outward normal derivative)`; corners are
/// excluded from the derivative error.
pub fn compute_bd_errors(coeffs: &[f64], truth: &dyn ReferenceField, mesh: &TensorMesh) -> (f64, f64) {
    let nodes = boundary_nodes(mesh);
    let mut val_sum = 0.0;
    let mut dn_sum = 0.0;
    let mut dn_count = 0usize;
    for &(lin, corner) in &nodes {
        let x = mesh.node_point(&mesh.dof_index(lin));
        let e = truth.value(&x) - coeffs[lin];
        val_sum += e * e;
        if !corner {
            let n = outward_normal(&x).expect("boundary node");
            let n = &n[..mesh.dim()];
            let e = truth.normal_derivative(&x, n) - normal_derivative_from_interior(mesh, coeffs, &x, n);
            dn_sum += e * e;
            dn_count += 1;
        }
    }
    ((val_sum / nodes.len() as f64).sqrt(), (dn_sum / dn_count as f64).sqrt())
}

/// Least-squares slope of `log(error)` against `log(delta)`.
pub fn fit_slope(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::data("slope fit needs at least two points"));
    }
    if pairs.iter().any(|&(d, e)| !(d > 0.0 && e > 0.0 && d.is_finite() && e.is_finite())) {
        return Err(Error::data("slope fit needs positive finite values"));
    }
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(d, e)| (d.ln(), e.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::data("slope fit needs at least two distinct deltas"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// Result of assembling and solving one `(N, δ, c)` configuration.
#[derive(Debug, Clone)]
pub struct NonlocalSolve {
    pub mesh: TensorMesh,
    pub kernel: KernelParams,
    pub xi: f64,
    pub solution: SolutionField,
}

impl NonlocalSolve {
    pub fn field(&self) -> DiscreteField {
        DiscreteField { mesh: self.mesh, coefficients: self.solution.coefficients.clone() }
    }
}

/// Assembles with `ξ = δ/c` and solves; optionally dumps the system first.
pub fn solve_nonlocal(
    problem: &ManufacturedProblem,
    n_cells: usize,
    delta: f64,
    c: f64,
    dump: Option<&Path>,
) -> Result<NonlocalSolve> {
    let dim = problem.dim();
    let wrap = |e: Error| match e {
        Error::Io(_) | Error::Csv(_) => e,
        other => Error::RunFailed { dim, n_cells, delta, c, source: Box::new(other) },
    };
    let mesh = TensorMesh::new(n_cells, dim).map_err(wrap)?;
    let kernel = KernelParams::new(delta, dim).map_err(wrap)?;
    let xi = delta / c;
    let system = Discretization::new(&mesh, &kernel, problem, xi).and_then(|d| d.assemble()).map_err(wrap)?;
    if let Some(path) = dump {
        system.write_dump(path)?;
    }
    let solution = solve_spd(&system).map_err(wrap)?;
    Ok(NonlocalSolve { mesh, kernel, xi, solution })
}

/// Computes all three error metrics of a run against `truth`.
pub fn report_for(
    solve: &NonlocalSolve,
    truth: &dyn ReferenceField,
    problem: &str,
    c: f64,
) -> ErrorReport {
    let coeffs = &solve.solution.coefficients;
    let (bd_error, bd_dn_error) = compute_bd_errors(coeffs, truth, &solve.mesh);
    ErrorReport {
        dim: solve.mesh.dim(),
        n_cells: solve.mesh.n_cells(),
        delta: solve.kernel.delta(),
        c,
        problem: problem.to_string(),
        rmse: compute_rmse(coeffs, truth, &solve.mesh),
        bd_error,
        bd_dn_error,
    }
}

fn dump_path(base: &Path, index: usize, total: usize) -> PathBuf {
    if total == 1 {
        return base.to_path_buf();
    }
    let mut name = base.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(format!(".{index}"));
    base.with_file_name(name)
}

/// Runs every configuration of the study and returns the reports in config order.
pub fn run_reports(config: &ExperimentConfig) -> Result<StudySummary> {
    let problem = config.validate()?;
    let runs = config.runs();
    let total = runs.len();
    let results: Vec<Result<ErrorReport>> = runs
        .par_iter()
        .enumerate()
        .map(|(i, &(delta, c))| {
            let dump = config.dump_system.as_deref().map(|p| dump_path(p, i, total));
            let solve = solve_nonlocal(&problem, config.n_cells, delta, c, dump.as_deref())?;
            Ok(match config.reference_n {
                Some(n_ref) => {
                    let reference = solve_nonlocal(&problem, n_ref, delta, c, None)?.field();
                    report_for(&solve, &reference, problem.name(), c)
                }
                None => report_for(&solve, &problem, problem.name(), c),
            })
        })
        .collect();
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;
    let slope = match config.study {
        Study::DeltaSweep if reports.len() >= 2 => {
            Some(fit_slope(&reports.iter().map(|r| (r.delta, r.rmse)).collect::<Vec<_>>())?)
        }
        _ => None,
    };
    Ok(StudySummary { reports, slope })
}

pub const CSV_HEADER: [&str; 8] = ["dim", "N", "delta", "c", "problem", "rmse", "bd_error", "bd_dn_error"];

fn write_rows<W: std::io::Write>(w: &mut csv::Writer<W>, reports: &[ErrorReport]) -> Result<()> {
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record([
            r.dim.to_string(),
            r.n_cells.to_string(),
            fmt17(r.delta),
            fmt17(r.c),
            r.problem.clone(),
            fmt17(r.rmse),
            fmt17(r.bd_error),
            fmt17(r.bd_dn_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, reports: &[ErrorReport]) -> Result<()> {
    write_rows(&mut csv::Writer::from_path(path)?, reports)
}

/// Runs the study and writes its CSV. The output file is opened before any
/// computation so an unwritable path fails fast.
pub fn run_study(config: &ExperimentConfig) -> Result<StudySummary> {
    config.validate()?;
    let mut writer = csv::Writer::from_path(&config.output_path)?;
    let summary = run_reports(config)?;
    write_rows(&mut writer, &summary.reports)?;
    Ok(summary)
}
