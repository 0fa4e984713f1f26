// `!(x > y)` is used on purpose so that NaN inputs fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use qdelaunay::export::{convergence_csv, json, portrait_csv, sweep_csv, trajectory_csv};
use qdelaunay::functionals::invariant_value;
use qdelaunay::portrait::build_portrait;
use qdelaunay::selfcheck::run_selfcheck;
use qdelaunay::solver::{linear_grid, orbit_for_period, sweep, DelaunayOrbit};
use qdelaunay::stability::{discretized_spectrum, Operator};
use qdelaunay::study::convergence_study;
use qdelaunay::{make_params, shoot, DimensionParams, Error};

#[derive(Parser, Debug)]
#[command(
    name = "qdelaunay",
    version,
    about = "Delaunay solutions of the constant Q-curvature equation on the cylinder"
)]
struct Cli {
    /// Also write results into this directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV on stdout and mirror CSV files as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Dimension-dependent constants.
    Params {
        #[arg(long)]
        n: u32,
    },
    /// One Delaunay orbit.
    Solve {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Orbits on an equally spaced grid of a.
    Sweep {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        a_min: f64,
        #[arg(long)]
        a_max: f64,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// The orbit with a prescribed period.
    Period {
        #[arg(long)]
        n: u32,
        #[arg(long = "T")]
        period: f64,
        /// Relative tolerance on the period.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Y(a_k)/Y_sph for a_k = 1 − 10^−k.
    Convergence {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        kmax: u32,
    },
    /// (v, v') projections of orbits.
    PhasePortrait {
        #[arg(long)]
        n: u32,
        #[arg(long, value_delimiter = ',')]
        a: Vec<f64>,
        #[arg(long)]
        sphere: bool,
    },
    /// Lowest eigenvalues of the linearization on the l-fold orbit.
    Spectrum {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Run every invariant check.
    Selfcheck {
        #[arg(long)]
        n: u32,
    },
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { 2 } else { 1 };
        Failure { code, err: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        // a wrapped library error keeps its own classification
        let code = match err.downcast_ref::<Error>() {
            Some(e) if e.is_numerical() => 2,
            Some(_) => 1,
            None => 2,
        };
        Failure { code, err }
    }
}

fn usage(msg: String) -> Failure {
    Failure {
        code: 1,
        err: anyhow::anyhow!(msg),
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol <= 1e-3 {
        Ok(())
    } else {
        Err(usage(format!("--tol {tol} must lie in (0, 1e-3]")))
    }
}

struct Output {
    dir: Option<PathBuf>,
    json: bool,
}

impl Output {
    fn file(&self, name: &str, contents: &str) -> Result<(), Failure> {
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating {}", dir.display()))
                .map_err(io_failure)?;
            let path: PathBuf = Path::new(dir).join(name);
            fs::write(&path, contents)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(io_failure)?;
        }
        Ok(())
    }
}

/// Write to stdout; a closed reader is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            Err(io_failure(anyhow::Error::new(e).context("writing stdout")))
        }
        _ => Ok(()),
    }
}

fn io_failure(err: anyhow::Error) -> Failure {
    Failure { code: 2, err }
}

#[derive(Serialize)]
struct OrbitSummary {
    version: &'static str,
    n: u32,
    a: f64,
    b: f64,
    t_a: f64,
    eps_a: f64,
    h: f64,
    i_a: f64,
    y: f64,
    y_over_ysph: f64,
    defect: f64,
    g_residual: f64,
    max_drift: f64,
}

fn summary(params: &DimensionParams, o: &DelaunayOrbit) -> OrbitSummary {
    let y = invariant_value(params, o);
    OrbitSummary {
        version: qdelaunay::VERSION,
        n: params.n,
        a: o.a,
        b: o.b,
        t_a: o.t_a,
        eps_a: o.eps_a,
        h: o.h,
        i_a: o.i_a,
        y,
        y_over_ysph: y / params.y_sph,
        defect: o.defect,
        g_residual: o.g_residual,
        max_drift: o.max_drift,
    }
}

fn write_orbit(params: &DimensionParams, o: &DelaunayOrbit, out: &Output, settings: &str) -> Result<(), Failure> {
    let doc = json(&summary(params, o));
    emit(&doc)?;
    out.file("summary.json", &doc)?;
    out.file("orbit.csv", &trajectory_csv(params, &o.samples, settings)?)?;
    if out.json {
        out.file("orbit.json", &json(&o.samples))?;
    }
    Ok(())
}

fn context<T>(r: Result<T, Error>, what: impl FnOnce() -> String) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.err = f.err.context(what());
        f
    })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let out = Output {
        dir: cli.out.clone(),
        json: cli.json,
    };
    match cli.cmd {
        Cmd::Params { n } => {
            let p = context(make_params(n), || format!("params(n={n})"))?;
            let doc = json(&p);
            emit(&doc)?;
            out.file("params.json", &doc)?;
        }
        Cmd::Solve { n, a, tol } => {
            check_tol(tol)?;
            let p = context(make_params(n), || format!("params(n={n})"))?;
            let o = context(shoot(&p, a, tol), || {
                format!("delaunay-solver::shoot(n={n}, a={a}, tol={tol:e})")
            })?;
            write_orbit(&p, &o, &out, &format!("a={a} tol={tol:e}"))?;
        }
        Cmd::Period { n, period, tol } => {
            check_tol(tol)?;
            let p = context(make_params(n), || format!("params(n={n})"))?;
            let o = context(orbit_for_period(&p, period, tol), || {
                format!("delaunay-solver::orbit_for_period(n={n}, T={period}, tol={tol:e})")
            })?;
            write_orbit(&p, &o, &out, &format!("T={period} tol={tol:e}"))?;
        }
        Cmd::Sweep {
            n,
            a_min,
            a_max,
            count,
            tol,
        } => {
            check_tol(tol)?;
            let p = context(make_params(n), || format!("params(n={n})"))?;
            if count == 0 || !(a_min > p.v_cyl) || !(a_max < 1.0) || (count > 1 && !(a_max > a_min)) {
                return Err(usage(format!(
                    "sweep grid [{a_min}, {a_max}] x {count} must satisfy v_cyl = {} < a_min < a_max < 1 and count >= 1",
                    p.v_cyl
                )));
            }
            let grid = linear_grid(a_min, a_max, count);
            let rep = context(sweep(&p, &grid, tol), || format!("delaunay-solver::sweep(n={n})"))?;
            let settings = format!("tol={tol:e}");
            let csv = sweep_csv(&rep, &settings);
            #[derive(Serialize)]
            struct Row {
                a: f64,
                orbit: Option<OrbitSummary>,
                error: Option<String>,
            }
            #[derive(Serialize)]
            struct Doc {
                version: &'static str,
                n: u32,
                tol: f64,
                t_increasing: bool,
                eps_decreasing: bool,
                h_in_range: bool,
                audits_passed: bool,
                rows: Vec<Row>,
            }
            let doc = json(&Doc {
                version: qdelaunay::VERSION,
                n,
                tol,
                t_increasing: rep.t_increasing,
                eps_decreasing: rep.eps_decreasing,
                h_in_range: rep.h_in_range,
                audits_passed: rep.audits_passed,
                rows: rep
                    .points
                    .iter()
                    .map(|pt| Row {
                        a: pt.a,
                        orbit: pt.result.as_ref().ok().map(|o| summary(&p, o)),
                        error: pt.result.as_ref().err().map(|e| e.to_string()),
                    })
                    .collect(),
            });
            emit(if out.json { &doc } else { &csv })?;
            out.file("sweep.csv", &csv)?;
            if out.json {
                out.file("sweep.json", &doc)?;
            }
            for pt in &rep.points {
                if let Err(e) = &pt.result {
                    eprintln!("error: delaunay-solver::shoot(n={n}, a={}, tol={tol:e}): {e}", pt.a);
                }
            }
            if rep.failures() > 0 {
                return Ok(2);
            }
        }
        Cmd::Convergence { n, kmax } => {
            let p = context(make_params(n), || format!("params(n={n})"))?;
            let rep = context(convergence_study(&p, kmax), || {
                format!("convergence_study(n={n}, kmax={kmax})")
            })?;
            let csv = convergence_csv(&rep, &format!("kmax={kmax}"));
            #[derive(Serialize)]
            struct Doc<'a> {
                version: &'static str,
                n: u32,
                y_sph: f64,
                rows: &'a [qdelaunay::study::ConvergenceRow],
                verdict: bool,
                increasing: bool,
                below_one: bool,
            }
            let doc = json(&Doc {
                version: qdelaunay::VERSION,
                n,
                y_sph: rep.y_sph,
                rows: &rep.rows,
                verdict: rep.verdict(),
                increasing: rep.increasing,
                below_one: rep.below_one,
            });
            emit(if out.json { &doc } else { &csv })?;
            out.file("convergence.csv", &csv)?;
            out.file("convergence.json", &doc)?;
            let mut failed = false;
            for r in &rep.rows {
                if let Some(e) = &r.error {
                    eprintln!("error: convergence_study(n={n}) row a={}: {e}", r.a);
                    failed = true;
                }
            }
            if failed {
                return Ok(2);
            }
        }
        Cmd::PhasePortrait { n, a, sphere } => {
            let p = context(make_params(n), || format!("params(n={n})"))?;
            let set = context(build_portrait(&p, &a, sphere), || {
                format!("phase-portrait::build_portrait(n={n}, a={a:?})")
            })?;
            let doc = json(&set);
            emit(&doc)?;
            out.file("portrait.json", &doc)?;
            out.file("portrait.csv", &portrait_csv(&set, &format!("sphere={sphere}")))?;
        }
        Cmd::Spectrum { n, a, l, grid } => {
            let p = context(make_params(n), || format!("params(n={n})"))?;
            if l == 0 {
                return Err(usage("--l must be >= 1".into()));
            }
            let o = context(shoot(&p, a, 1e-9), || format!("delaunay-solver::shoot(n={n}, a={a})"))?;
            let rep = context(
                discretized_spectrum(&p, &Operator::Delaunay { orbit: &o, l }, grid),
                || format!("stability::discretized_spectrum(n={n}, a={a}, l={l}, grid={grid})"),
            )?;
            let doc = json(&rep);
            emit(&doc)?;
            out.file("spectrum.json", &doc)?;
        }
        Cmd::Selfcheck { n } => {
            let p = context(make_params(n), || format!("params(n={n})"))?;
            let rep = run_selfcheck(&p);
            let doc = json(&rep);
            emit(&doc)?;
            out.file("selfcheck.json", &doc)?;
            if !rep.passed() {
                for f in &rep.failures {
                    eprintln!("selfcheck failure: {f}");
                }
                return Ok(3);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
