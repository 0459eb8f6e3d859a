//! Subcommand drivers.

use std::cmp::Ordering;
use std::f64::consts::PI;

use hopflab::charts::ManifoldSpec;
use hopflab::complexgeom::{volume, VolumeQuadrature};
use hopflab::convergence::{collapse_run, gh_bound, CollapseRun};
use hopflab::exec::Execution;
use hopflab::sampling::random_points;
use hopflab::stability::{stability_radius_scan, stability_spectrum, FiberInclusion, RadiusScan, StabilityReport};
use num_complex::Complex64;
use serde::Serialize;

use crate::args::{Cli, Command, Format, Options};
use crate::grid::{parse_epsilon_grid, parse_ray};
use crate::output::{write_csv, write_json};
use crate::records::{IdentityRecord, Report};
use crate::verify::{run_higher_dim, run_verify, SuiteConfig, SAMPLE_RADIUS};
use crate::{CliError, CliResult, Status, SCHEMA_VERSION};

pub const SCAN_HEADER: [&str; 8] = ["epsilon", "x1", "x3", "mode_m", "mode_k", "min_eig", "overall_min", "stable"];

/// One `(fiber, mode)` row of a spectral table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRow {
    pub epsilon: f64,
    pub x1: f64,
    pub x3: f64,
    pub mode_m: i32,
    pub mode_k: i32,
    pub min_eig: f64,
    pub overall_min: f64,
    pub stable: bool,
}

impl ModeRow {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.epsilon
            .total_cmp(&other.epsilon)
            .then(self.x1.total_cmp(&other.x1))
            .then(self.x3.total_cmp(&other.x3))
            .then(self.mode_m.cmp(&other.mode_m))
            .then(self.mode_k.cmp(&other.mode_k))
    }
}

pub fn sort_rows(rows: &mut [ModeRow]) {
    rows.sort_by(ModeRow::key_cmp);
}

fn exec(opts: &Options) -> Execution {
    if opts.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn epsilons(opts: &Options, default: &str) -> CliResult<Vec<f64>> {
    parse_epsilon_grid(opts.epsilon.as_deref().unwrap_or(default))
}

fn suite_config(opts: &Options, default_n: usize) -> CliResult<SuiteConfig> {
    Ok(SuiteConfig {
        epsilons: epsilons(opts, "0:1:5")?,
        samples: opts.samples.unwrap_or(200),
        seed: opts.seed,
        n: opts.n.unwrap_or(default_n),
        fd_step: opts.fd_step,
        fourier_cap: opts.fourier_cap.unwrap_or(8),
        r0: opts.r0,
        tol: opts.tol,
        inject_error: opts.inject_error,
        exec: exec(opts),
    })
}

/// Run the parsed command line, writing its report.
pub fn run(cli: &Cli) -> CliResult<Status> {
    let opts = &cli.opts;
    match cli.command {
        Command::Verify => {
            let cfg = suite_config(opts, 2)?;
            emit_records("verify", &cfg, run_verify(&cfg)?, opts)
        }
        Command::HigherDim => {
            let cfg = suite_config(opts, 3)?;
            emit_records("higher-dim", &cfg, run_higher_dim(&cfg)?, opts)
        }
        Command::StabilityScan => stability_scan(opts),
        Command::Spectrum => spectrum(opts),
        Command::Collapse => collapse(opts),
        Command::Volume => volume_cmd(opts),
    }
}

fn emit_records(command: &'static str, cfg: &SuiteConfig, records: Vec<IdentityRecord>, opts: &Options) -> CliResult<Status> {
    let all_pass = records.iter().all(|r| r.pass);
    for r in records.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {}: residual {:e} vs tolerance {:e}", r.id, r.max_residual, r.tolerance);
    }
    match opts.format.unwrap_or(Format::Json) {
        Format::Json => {
            let report = Report {
                schema_version: SCHEMA_VERSION,
                command,
                epsilon: cfg.epsilons.clone(),
                seed: cfg.seed,
                samples: cfg.samples,
                all_pass,
                records,
            };
            write_json(&report, opts.out.as_deref())?;
        }
        Format::Csv => {
            write_csv(&records, &["id", "anchor", "max_residual", "tolerance", "pass", "bound"], opts.out.as_deref())?
        }
    }
    Ok(if all_pass { Status::Pass } else { Status::Fail })
}

fn require_surface(opts: &Options) -> CliResult<()> {
    match opts.n {
        None | Some(2) => Ok(()),
        Some(n) => Err(CliError::Config(format!("this command runs on the surface (n = 2), got --n {n}"))),
    }
}

fn cap(opts: &Options, default: i32) -> CliResult<i32> {
    let k = opts.fourier_cap.unwrap_or(default);
    if k < 1 {
        return Err(CliError::Config("--fourier-cap must be at least 1".into()));
    }
    Ok(k)
}

/// Per-mode rows of a radius scan.
pub fn scan_rows(scan: &RadiusScan) -> Vec<ModeRow> {
    let mut rows = Vec::new();
    for row in &scan.rows {
        let stable = row.overall_min >= -hopflab::stability::WITNESS_TOLERANCE;
        for (&(m, k), &v) in &row.mode_minima {
            rows.push(ModeRow {
                epsilon: scan.epsilon,
                x1: row.x1,
                x3: row.x3,
                mode_m: m,
                mode_k: k,
                min_eig: v,
                overall_min: row.overall_min,
                stable,
            });
        }
    }
    rows
}

fn stability_scan(opts: &Options) -> CliResult<Status> {
    require_surface(opts)?;
    let eps = epsilons(opts, "1")?;
    let ray = parse_ray(&opts.ray)?;
    let steps = opts.grid_steps.unwrap_or(300);
    if steps == 0 {
        return Err(CliError::Config("--grid-steps must be positive".into()));
    }
    if !(opts.r_max > 0.0) {
        return Err(CliError::Config("--r-max must be positive".into()));
    }
    let k = cap(opts, 2)?;
    let step = opts.r_max / steps as f64;
    let mut scans = Vec::new();
    for &e in &eps {
        let scan = stability_radius_scan(&ManifoldSpec::hopf_surface(e)?, ray, k, step, opts.r_max, exec(opts))?;
        eprintln!(
            "epsilon {e}: last stable {}, first unstable {}, witness sign change {}",
            fmt_opt(scan.last_stable),
            fmt_opt(scan.first_unstable),
            scan.witness_bracket.map_or("none".into(), |(a, b)| format!("[{a}, {b}]")),
        );
        scans.push(scan);
    }
    match opts.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut rows: Vec<ModeRow> = scans.iter().flat_map(scan_rows).collect();
            sort_rows(&mut rows);
            write_csv(&rows, &SCAN_HEADER, opts.out.as_deref())?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema_version: u32,
                command: &'static str,
                scans: &'a [RadiusScan],
            }
            write_json(&Out { schema_version: SCHEMA_VERSION, command: "stability-scan", scans: &scans }, opts.out.as_deref())?;
        }
    }
    Ok(Status::Pass)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("none".into(), |x| x.to_string())
}

fn spectrum(opts: &Options) -> CliResult<Status> {
    let eps = epsilons(opts, "1")?;
    let n = opts.n.unwrap_or(2);
    let k = cap(opts, 8)?;
    let mut reports = Vec::new();
    for &e in &eps {
        let spec = ManifoldSpec::hopf(n, e)?;
        let mut base = vec![Complex64::new(0.0, 0.0); n - 1];
        base[0] = Complex64::new(opts.x1, opts.x3);
        reports.push(stability_spectrum(&FiberInclusion::new(spec, base)?, k, exec(opts))?);
    }
    match opts.format.unwrap_or(Format::Json) {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema_version: u32,
                command: &'static str,
                reports: &'a [StabilityReport],
            }
            write_json(&Out { schema_version: SCHEMA_VERSION, command: "spectrum", reports: &reports }, opts.out.as_deref())?;
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for r in &reports {
                for (&(m, k), &v) in &r.min_eigenvalue_per_mode {
                    rows.push(ModeRow {
                        epsilon: r.epsilon,
                        x1: opts.x1,
                        x3: opts.x3,
                        mode_m: m,
                        mode_k: k,
                        min_eig: v,
                        overall_min: r.overall_min,
                        stable: r.is_stable(),
                    });
                }
            }
            sort_rows(&mut rows);
            write_csv(&rows, &SCAN_HEADER, opts.out.as_deref())?;
        }
    }
    Ok(Status::Pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseSummary {
    pub schema_version: u32,
    pub command: &'static str,
    pub r0: f64,
    pub steps: usize,
    pub runs: Vec<CollapseRun>,
    /// Largest `length / ε` over the grid.
    pub measured_constant: Option<f64>,
    /// `(max − min) / max` of `length / ε`.
    pub constant_spread: Option<f64>,
    pub closed_form_max_error: f64,
    pub gh_bounds: Vec<GhBound>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GhBound {
    pub epsilon: f64,
    pub path_leg: f64,
    pub c0_leg: f64,
    pub bound: f64,
}

pub fn collapse_summary(opts: &Options) -> CliResult<CollapseSummary> {
    let eps = epsilons(opts, "0.25,0.5,1")?;
    let steps = opts.grid_steps.unwrap_or(10_000);
    if steps == 0 {
        return Err(CliError::Config("--grid-steps must be positive".into()));
    }
    if !(opts.r0 > 0.0) {
        return Err(CliError::Config("--r0 must be positive".into()));
    }
    let samples = opts.samples.unwrap_or(200);
    if samples == 0 {
        return Err(CliError::Config("--samples must be positive".into()));
    }
    let grid = random_points(&ManifoldSpec::hopf_surface(0.0)?, opts.seed, samples, SAMPLE_RADIUS);
    let runs: Vec<CollapseRun> =
        eps.iter().map(|&e| collapse_run(e, opts.r0, steps, &grid, exec(opts))).collect::<Result<_, _>>()?;
    let constants: Vec<f64> = runs.iter().filter_map(|r| r.length_constant).collect();
    let measured_constant = constants.iter().copied().reduce(f64::max);
    let constant_spread = measured_constant.map(|max| {
        let min = constants.iter().copied().fold(f64::INFINITY, f64::min);
        (max - min) / max
    });
    let closed_form_max_error = runs.iter().map(|r| r.check.radius_error).fold(0.0, f64::max);
    let gh_bounds = runs
        .iter()
        .map(|r| GhBound {
            epsilon: r.epsilon,
            path_leg: r.length,
            c0_leg: r.c0.sqrt(),
            bound: gh_bound(measured_constant.unwrap_or(0.0), r.epsilon),
        })
        .collect();
    Ok(CollapseSummary {
        schema_version: SCHEMA_VERSION,
        command: "collapse",
        r0: opts.r0,
        steps,
        runs,
        measured_constant,
        constant_spread,
        closed_form_max_error,
        gh_bounds,
    })
}

fn collapse(opts: &Options) -> CliResult<Status> {
    let summary = collapse_summary(opts)?;
    match opts.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&summary, opts.out.as_deref())?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                epsilon: f64,
                a1: f64,
                length: f64,
                radius_error: f64,
                c0: f64,
                gh_bound: f64,
            }
            let rows: Vec<Row> = summary
                .runs
                .iter()
                .zip(&summary.gh_bounds)
                .map(|(r, b)| Row {
                    epsilon: r.epsilon,
                    a1: r.a1,
                    length: r.length,
                    radius_error: r.check.radius_error,
                    c0: r.c0,
                    gh_bound: b.bound,
                })
                .collect();
            write_csv(&rows, &["epsilon", "a1", "length", "radius_error", "c0", "gh_bound"], opts.out.as_deref())?;
        }
    }
    Ok(Status::Pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeRow {
    pub epsilon: f64,
    pub total: f64,
    pub exact: f64,
    pub relative_error: f64,
    pub samples: usize,
}

fn volume_cmd(opts: &Options) -> CliResult<Status> {
    require_surface(opts)?;
    let eps = epsilons(opts, "0:1:5")?;
    let mut q = VolumeQuadrature::default();
    if let Some(s) = opts.samples {
        if s == 0 {
            return Err(CliError::Config("--samples must be positive".into()));
        }
        q.radial_nodes = s;
    }
    let mut rows = Vec::new();
    for &e in &eps {
        let v = volume(&ManifoldSpec::hopf_surface(e)?, q, exec(opts))?;
        let exact = (1.0 + e * e) * PI.powi(3);
        rows.push(VolumeRow { epsilon: e, total: v.total, exact, relative_error: (v.total - exact).abs() / exact, samples: v.samples });
    }
    let tol = opts.tol.unwrap_or(1e-2);
    let pass = rows.iter().all(|r| r.relative_error < tol);
    match opts.format.unwrap_or(Format::Json) {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema_version: u32,
                command: &'static str,
                tolerance: f64,
                pass: bool,
                rows: &'a [VolumeRow],
            }
            write_json(&Out { schema_version: SCHEMA_VERSION, command: "volume", tolerance: tol, pass, rows: &rows }, opts.out.as_deref())?;
        }
        Format::Csv => write_csv(&rows, &["epsilon", "total", "exact", "relative_error", "samples"], opts.out.as_deref())?,
    }
    Ok(if pass { Status::Pass } else { Status::Fail })
}
