//! The four subcommands. Each `run_*` returns a report; `cmd_*` prints it
//! and maps it to a process exit code.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use graphsurf::calculus::{codazzi_residual, divergence_probe, divergence_residual, simons_residual_sup};
use graphsurf::estimators::params_string;
use graphsurf::family::{build_surface, family_sweep, SweepOutput};
use graphsurf::geometry::{embedded_graph_geometry, graph_map_jacobian, riemann_from_b, riemann_symmetry_residual};
use graphsurf::norms::lp_norm;
use graphsurf::{GeometryBundle, GraphError};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{line_chart_svg, num, opt_num, write_atomic, Table};

/// Fraction of sweep samples that must succeed for exit code 0.
pub const SWEEP_SUCCESS_THRESHOLD: f64 = 0.9;
/// Observed order every verify check has to reach.
pub const VERIFY_MIN_ORDER: f64 = 3.5;
/// Residuals at or below this on both grids count as converged; their ratio
/// is rounding noise and carries no order.
pub const VERIFY_FLOOR: f64 = 1e-11;

pub const THREADS_ENV: &str = "GRAPHSURF_THREADS";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

impl RunOptions {
    pub fn new(config: impl Into<PathBuf>) -> Self {
        Self {
            config: config.into(),
            ..Self::default()
        }
    }
}

struct Prepared {
    cfg: Config,
    out: PathBuf,
    pool: rayon::ThreadPool,
}

fn prepare(opts: &RunOptions) -> Result<Prepared, CliError> {
    let mut cfg = Config::load(&opts.config)?;
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    let threads = match opts.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("{THREADS_ENV}: not a thread count: {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("threads: must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let out = opts.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok(Prepared { cfg, out, pool })
}

fn geometry_err(e: GraphError) -> CliError {
    CliError::Geometry(e)
}

fn finish<R>(result: Result<R, CliError>, report: impl FnOnce(&R) -> i32) -> i32 {
    match result {
        Ok(r) => report(&r),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------- geometry

#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub volume: f64,
    pub b_l2: f64,
    pub h_l2: f64,
    pub csv: PathBuf,
}

pub fn run_geometry(opts: &RunOptions) -> Result<GeometryReport, CliError> {
    let Prepared { cfg, out, pool } = prepare(opts)?;
    let base = cfg.base.build()?;
    let psi = cfg.height_field(&base)?;
    pool.install(|| {
        let bundle = Arc::new(embedded_graph_geometry(&psi).map_err(geometry_err)?);
        let jac = graph_map_jacobian(&psi).map_err(geometry_err)?;
        let b_l2 = lp_norm(&bundle.b_field(), 2.0).map_err(geometry_err)?;
        let h_l2 = lp_norm(&bundle.h_field(), 2.0).map_err(geometry_err)?;
        let mut bytes = Vec::new();
        bundle
            .write_csv(&mut bytes, Some(&jac))
            .expect("in-memory write");
        let csv = out.join("geometry.csv");
        write_atomic(&csv, &bytes)?;
        Ok(GeometryReport {
            volume: bundle.volume(),
            b_l2,
            h_l2,
            csv,
        })
    })
}

pub fn cmd_geometry(opts: &RunOptions) -> i32 {
    finish(run_geometry(opts), |r| {
        println!("volume={} b_l2={} h_l2={}", num(r.volume), num(r.b_l2), num(r.h_l2));
        0
    })
}

// --------------------------------------------------------------- constants

#[derive(Debug, Clone)]
pub struct ConstantRow {
    pub inequality: String,
    pub params: String,
    pub estimate: Option<f64>,
    pub witness: String,
    pub wall_time_ms: f64,
    /// `ok` or the error kind.
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct ConstantsReport {
    pub rows: Vec<ConstantRow>,
    pub csv: PathBuf,
}

pub fn run_constants(opts: &RunOptions) -> Result<ConstantsReport, CliError> {
    let Prepared { cfg, out, pool } = prepare(opts)?;
    let base = cfg.base.build()?;
    let psi = cfg.height_field(&base)?;
    pool.install(|| {
        let bundle = build_surface(&psi).map_err(geometry_err)?;
        let rows: Vec<ConstantRow> = cfg
            .estimators
            .iter()
            .map(|spec| {
                let t = Instant::now();
                let res = spec.run(&bundle, cfg.seed);
                let wall_time_ms = t.elapsed().as_secs_f64() * 1e3;
                let inequality = spec.inequality().name().to_string();
                let params = params_string(&spec.params());
                match res {
                    Ok(c) => ConstantRow {
                        inequality,
                        params,
                        estimate: Some(c.value),
                        witness: c.witness,
                        wall_time_ms,
                        status: "ok".into(),
                    },
                    Err(e) => ConstantRow {
                        inequality,
                        params,
                        estimate: None,
                        witness: e.to_string(),
                        wall_time_ms,
                        status: e.kind().into(),
                    },
                }
            })
            .collect();
        let mut header = vec!["inequality", "params", "estimate", "witness_description"];
        if cfg.output.timings {
            header.push("wall_time_ms");
        }
        header.push("status");
        let mut table = Table::new(&header);
        for r in &rows {
            let mut f = vec![r.inequality.clone(), r.params.clone(), opt_num(r.estimate), r.witness.clone()];
            if cfg.output.timings {
                f.push(format!("{:.3}", r.wall_time_ms));
            }
            f.push(r.status.clone());
            table.row(&f);
        }
        let csv = out.join("constants.csv");
        write_atomic(&csv, &table.into_bytes())?;
        Ok(ConstantsReport { rows, csv })
    })
}

pub fn cmd_constants(opts: &RunOptions) -> i32 {
    finish(run_constants(opts), |r| {
        for row in &r.rows {
            println!(
                "{} [{}] {} ({}, {:.1} ms)",
                row.inequality,
                row.params,
                opt_num(row.estimate),
                row.status,
                row.wall_time_ms
            );
        }
        0
    })
}

// ------------------------------------------------------------------- sweep

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub output: SweepOutput<f64>,
    pub labels: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl SweepReport {
    pub fn exit_code(&self) -> i32 {
        if self.output.success_fraction() >= SWEEP_SUCCESS_THRESHOLD {
            0
        } else {
            4
        }
    }

    /// Per-delta maxima of one estimator, in delta order.
    pub fn maxima(&self, label: &str) -> Option<Vec<Option<f64>>> {
        let k = self.labels.iter().position(|l| l == label)?;
        Some(self.output.aggregates.iter().map(|a| a.max[k]).collect())
    }
}

pub fn run_sweep(opts: &RunOptions) -> Result<SweepReport, CliError> {
    let Prepared { cfg, out, pool } = prepare(opts)?;
    let base = cfg.base.build()?;
    let (spec, deltas) = cfg.family_spec(&base)?;
    let output = pool
        .install(|| family_sweep(&spec, &deltas, &cfg.estimators))
        .map_err(|e| CliError::Config(format!("family: {e}")))?;
    let labels: Vec<String> = cfg.estimators.iter().map(|e| e.label()).collect();

    let mut header: Vec<String> = [
        "delta",
        "sample_id",
        "status",
        "c1_norm_actual",
        "volume",
        "b_l2",
        "h_l2",
        "jpsi_min",
        "jpsi_max",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for l in &labels {
        header.push(l.clone());
        header.push(format!("{l}_status"));
    }
    let mut records = Table::new(&header);
    for r in &output.records {
        let mut f = vec![
            num(r.delta),
            r.sample_id.to_string(),
            r.failure.as_ref().map_or("ok", |e| e.kind()).to_string(),
            num(r.c1_norm_actual),
            num(r.volume),
            num(r.b_l2),
            num(r.h_l2),
            num(r.jpsi_min),
            num(r.jpsi_max),
        ];
        for e in &r.estimates {
            match e {
                Ok(c) => {
                    f.push(num(c.value));
                    f.push("ok".into());
                }
                Err(err) => {
                    f.push(String::new());
                    f.push(err.kind().into());
                }
            }
        }
        records.row(&f);
    }

    let mut header: Vec<String> = vec!["delta".into(), "succeeded".into(), "attempted".into()];
    header.extend(labels.iter().cloned());
    let mut aggregates = Table::new(&header);
    for a in &output.aggregates {
        let mut f = vec![num(a.delta), a.succeeded.to_string(), a.attempted.to_string()];
        f.extend(a.max.iter().map(|&m| opt_num(m)));
        aggregates.row(&f);
    }

    let mut trend = Table::new(&["estimator", "base_value", "smallest_delta", "smallest_delta_max", "relative_gap"]);
    for t in &output.trend {
        trend.row(&[
            t.label.clone(),
            opt_num(t.base_value),
            num(t.smallest_delta),
            opt_num(t.smallest_delta_max),
            opt_num(t.relative_gap),
        ]);
    }

    let xs: Vec<f64> = output.aggregates.iter().map(|a| a.delta).collect();
    let series: Vec<(String, Vec<Option<f64>>)> = labels
        .iter()
        .enumerate()
        .map(|(k, l)| (l.clone(), output.aggregates.iter().map(|a| a.max[k]).collect()))
        .collect();
    let svg = line_chart_svg("per-delta maximum constant", "delta", &xs, &series);

    let files = vec![
        out.join("records.csv"),
        out.join("aggregates.csv"),
        out.join("trend.csv"),
        out.join("sweep.svg"),
    ];
    let contents = [records.into_bytes(), aggregates.into_bytes(), trend.into_bytes(), svg.into_bytes()];
    for (p, c) in files.iter().zip(&contents) {
        write_atomic(p, c)?;
    }
    Ok(SweepReport { output, labels, files })
}

pub fn cmd_sweep(opts: &RunOptions) -> i32 {
    finish(run_sweep(opts), |r| {
        let o = &r.output;
        let ok = o.records.iter().filter(|x| x.succeeded()).count();
        println!("samples: {ok} of {} succeeded", o.records.len());
        for t in &o.trend {
            println!(
                "{}: base {} | delta {} max {} | gap {}",
                t.label,
                opt_num(t.base_value),
                num(t.smallest_delta),
                opt_num(t.smallest_delta_max),
                opt_num(t.relative_gap)
            );
        }
        let code = r.exit_code();
        if code != 0 {
            eprintln!("error: fewer than {:.0}% of samples succeeded", SWEEP_SUCCESS_THRESHOLD * 100.0);
        }
        code
    })
}

// ------------------------------------------------------------------ verify

pub const VERIFY_CHECKS: [&str; 5] = ["simons", "codazzi", "riemann_symmetry", "trace_identity", "divergence"];

#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub check: String,
    pub grids: [String; 2],
    pub residuals: [f64; 2],
    pub observed_order: f64,
    /// `pass`, `floor` (both residuals at rounding level) or `fail`.
    pub status: &'static str,
}

impl VerifyCheck {
    pub fn passed(&self) -> bool {
        self.status != "fail"
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
    pub csv: PathBuf,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().all(|c| c.passed()) {
            0
        } else {
            5
        }
    }

    pub fn check(&self, name: &str) -> Option<&VerifyCheck> {
        self.checks.iter().find(|c| c.check == name)
    }
}

fn residuals(bundle: &Arc<GeometryBundle<f64>>) -> Result<[f64; 5], GraphError> {
    Ok([
        simons_residual_sup(bundle)?,
        codazzi_residual(bundle)?,
        riemann_symmetry_residual(&riemann_from_b(bundle)),
        bundle.trace_identity_residual(),
        divergence_residual(&divergence_probe(bundle))?,
    ])
}

/// Order from two grids one refinement factor apart.
pub fn observed_order(coarse: f64, fine: f64, factor: f64) -> f64 {
    (coarse / fine).ln() / factor.ln()
}

pub fn run_verify(opts: &RunOptions) -> Result<VerifyReport, CliError> {
    let Prepared { cfg, out, pool } = prepare(opts)?;
    let grids = [cfg.base.clone(), cfg.base.refined(2)];
    let mut res = [[0.0; 5]; 2];
    for (g, r) in grids.iter().zip(res.iter_mut()) {
        let base = g.build()?;
        let psi = cfg.height_field(&base)?;
        *r = pool.install(|| {
            let bundle = build_surface(&psi)?;
            residuals(&bundle)
        })
        .map_err(geometry_err)?;
    }
    let checks: Vec<VerifyCheck> = VERIFY_CHECKS
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let (c, f) = (res[0][k], res[1][k]);
            let order = observed_order(c, f, 2.0);
            let status = if c <= VERIFY_FLOOR && f <= VERIFY_FLOOR {
                "floor"
            } else if order >= VERIFY_MIN_ORDER {
                "pass"
            } else {
                "fail"
            };
            VerifyCheck {
                check: name.to_string(),
                grids: [grids[0].grid_label(), grids[1].grid_label()],
                residuals: [c, f],
                observed_order: order,
                status,
            }
        })
        .collect();
    let mut table = Table::new(&["check", "grid", "residual", "observed_order", "status"]);
    for c in &checks {
        table.row(&[c.check.clone(), c.grids[0].clone(), num(c.residuals[0]), String::new(), String::new()]);
        table.row(&[
            c.check.clone(),
            c.grids[1].clone(),
            num(c.residuals[1]),
            num(c.observed_order),
            c.status.to_string(),
        ]);
    }
    let csv = out.join("verify.csv");
    write_atomic(&csv, &table.into_bytes())?;
    Ok(VerifyReport { checks, csv })
}

pub fn cmd_verify(opts: &RunOptions) -> i32 {
    finish(run_verify(opts), |r| {
        for c in &r.checks {
            println!(
                "{:<17} {} -> {}: {:e} -> {:e}, order {:.2} [{}]",
                c.check, c.grids[0], c.grids[1], c.residuals[0], c.residuals[1], c.observed_order, c.status
            );
        }
        r.exit_code()
    })
}

/// Writes `config` as JSON to a file, for tests and scripted runs.
pub fn write_config(path: &Path, config: &Config) -> Result<(), CliError> {
    write_atomic(path, config.to_json().as_bytes())
}
