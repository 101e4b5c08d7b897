//! Command-line front end: `solve`, `classify`, `verify`, `hypotheses`.
//!
//! Exit status: 0 success, 1 fault (bad input, no convergence, blow-up),
//! 2 inconclusive classification, 3 hypothesis violations.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::classify::{self, check_hypotheses, ClassifyOptions, HypothesisOptions, Verdict};
use crate::config::{load_config, Config};
use crate::expr::parse;
use crate::hessian::{pde_residual, RadialProfile};
use crate::iteration::{solve, SolveError, SolveOptions, SolveOutcome};
use crate::limits::LimitOptions;
use crate::output::{self, sci, write_csv};
use crate::quadrature::uniform_grid;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAULT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_VIOLATIONS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "radhess", version, about = "Radial solver and asymptotics classifier for coupled k-Hessian systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the radial solution by monotone iteration; writes solution.csv and solution.svg.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the structural integrals and report bounded/large behavior; writes report.csv.
    Classify {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the PDE residual of closed-form candidates; writes residual.csv.
    Verify {
        config: PathBuf,
        #[arg(long)]
        u1: String,
        #[arg(long)]
        u2: String,
        /// Use finite differences of the sampled candidates instead of exact derivatives.
        #[arg(long)]
        fd: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Sample the structural hypotheses; writes violations.csv.
    Hypotheses {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long = "grid-n")]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long = "limit-budget")]
    pub limit_budget: Option<f64>,
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

impl Common {
    fn solve_options(&self, cfg: &Config) -> SolveOptions {
        let d = SolveOptions::default();
        let n = &cfg.numerics;
        SolveOptions {
            r_max: self.rmax.or(n.rmax).unwrap_or(d.r_max),
            grid_n: self.grid_n.or(n.grid_n).unwrap_or(d.grid_n),
            tol: self.tol.or(n.tol).unwrap_or(d.tol),
            max_iter: self.max_iter.or(n.max_iter).unwrap_or(d.max_iter),
            refine_cap: n.refine_cap.unwrap_or(d.refine_cap),
            refine_tol: d.refine_tol,
        }
    }

    fn classify_options(&self, cfg: &Config) -> ClassifyOptions {
        let d = ClassifyOptions::default();
        let limits = LimitOptions {
            r0: cfg.numerics.limit_r0.unwrap_or(d.limits.r0),
            r_budget: self.limit_budget.or(cfg.numerics.limit_budget).unwrap_or(d.limits.r_budget),
            ..d.limits
        };
        ClassifyOptions { limits, ..d }
    }
}

/// Parses arguments and runs; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_FAULT
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve { config, common } => with_config(config, common, run_solve),
        Command::Classify { config, common } => with_config(config, common, run_classify),
        Command::Hypotheses { config, common } => with_config(config, common, run_hypotheses),
        Command::Verify { config, u1, u2, fd, common } => {
            with_config(config, common, |cfg, common| run_verify(cfg, common, u1, u2, *fd))
        }
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_FAULT
        }
    }
}

type CmdResult = Result<i32, String>;

fn with_config(path: &Path, common: &Common, f: impl FnOnce(&Config, &Common) -> CmdResult) -> CmdResult {
    let cfg = load_config(path).map_err(|e| format!("{}: {e}", path.display()))?;
    std::fs::create_dir_all(&common.out_dir).map_err(|e| format!("{}: {e}", common.out_dir.display()))?;
    f(&cfg, common)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> String + '_ {
    move |e| format!("writing {}: {e}", path.display())
}

fn emit_profile(dir: &Path, p: &crate::iteration::SolutionProfile) -> Result<(), String> {
    let csv = dir.join("solution.csv");
    output::write_solution_csv(&csv, p).map_err(io_err(&csv))?;
    let svg = dir.join("solution.svg");
    output::write_solution_svg(&svg, p).map_err(io_err(&svg))
}

fn run_solve(cfg: &Config, common: &Common) -> CmdResult {
    let opts = common.solve_options(cfg);
    match solve(&cfg.spec, &opts) {
        Ok(SolveOutcome::Converged(p)) => {
            emit_profile(&common.out_dir, &p)?;
            println!(
                "converged: {} nodes on [0, {}], {} iterations, refinement level {}, last change {:.3e}",
                p.grid.len(),
                opts.r_max,
                p.iterations_used,
                p.refinement_level,
                p.sup_norm_delta
            );
            if let Some(gap) = p.resolution_gap {
                println!("resolution gap to previous grid: {gap:.3e}");
            }
            println!("u1({}) = {}, u2({}) = {}", opts.r_max, sci(p.u1[p.u1.len() - 1]), opts.r_max, sci(p.u2[p.u2.len() - 1]));
            Ok(EXIT_OK)
        }
        Ok(SolveOutcome::BlowUp(b)) => {
            eprintln!(
                "blow-up: iterates exceeded the overflow guard near r = {:.6} at iteration {} (r_max = {}, {} intervals)",
                b.radius, b.iteration, b.r_max, b.grid_n
            );
            Ok(EXIT_FAULT)
        }
        Err(SolveError::NotConverged { budget, partial }) => {
            emit_profile(&common.out_dir, &partial)?;
            eprintln!("budget exhausted ({budget:?}); partial profile written");
            Ok(EXIT_FAULT)
        }
        Err(e) => Err(e.to_string()),
    }
}

fn run_classify(cfg: &Config, common: &Common) -> CmdResult {
    let witness = cfg.witness.clone().unwrap_or_default();
    let opts = common.classify_options(cfg);
    let report = classify::classify(&cfg.spec, &witness, &opts).map_err(|e| e.to_string())?;

    let c = &report.constants;
    let constant = |name: &str, v: f64| vec![name.to_string(), "constant".into(), sci(v), String::new(), String::new(), String::new()];
    let mut rows = vec![
        constant("M1", c.m1_cap),
        constant("M2", c.m2_cap),
        constant("m1", c.m1_low),
        constant("m2", c.m2_low),
        output::limit_row("M1_plus", Some(&c.m1_plus)),
        output::limit_row("M2_plus", Some(&c.m2_plus)),
    ];
    for (name, est) in report.estimates() {
        rows.push(output::limit_row(name, est));
    }
    let r = &report.remarks;
    for (name, on) in [
        ("alternate_H12_used", r.mplus12_used),
        ("alternate_H21_used", r.mplus21_used),
        ("alternate_H12_available", r.mplus12_available),
        ("alternate_H21_available", r.mplus21_available),
        ("lower1_defaulted", r.lower1_defaulted),
        ("lower2_defaulted", r.lower2_defaulted),
    ] {
        rows.push(vec![name.into(), "flag".into(), String::new(), on.to_string(), String::new(), String::new()]);
    }
    rows.push(vec![
        "verdict".into(),
        "verdict".into(),
        String::new(),
        report.verdict.to_string(),
        report.blocking.unwrap_or("").to_string(),
        String::new(),
    ]);
    let path = common.out_dir.join("report.csv");
    write_csv(&path, &["name", "kind", "value", "verdict", "extrapolated_limit", "error_estimate"], &rows).map_err(io_err(&path))?;

    for (name, est) in report.estimates() {
        match est {
            Some(e) => println!("{name:<11} {:<12} at r_budget {}", e.verdict.to_string(), sci(e.value_at_rmax)),
            None => println!("{name:<11} absent"),
        }
    }
    for v in &report.hypotheses.violations {
        println!("violation ({}): {} at t = {}{}", v.hypothesis.label(), v.message, v.t, v.w.map(|w| format!(", w = {w}")).unwrap_or_default());
    }
    match report.blocking {
        Some(b) => println!("verdict: {} (blocked by {b})", report.verdict),
        None => println!("verdict: {}", report.verdict),
    }
    Ok(match report.verdict {
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        Verdict::HypothesesNotMet if !report.hypotheses.is_clean() => EXIT_VIOLATIONS,
        _ => EXIT_OK,
    })
}

fn run_verify(cfg: &Config, common: &Common, u1: &str, u2: &str, fd: bool) -> CmdResult {
    let e1 = parse(u1).map_err(|e| format!("--u1: {e}"))?;
    let e2 = parse(u2).map_err(|e| format!("--u2: {e}"))?;
    let opts = common.solve_options(cfg);
    let grid = uniform_grid(opts.r_max, opts.grid_n);
    let n = cfg.spec.n;
    let profile = |e: &crate::expr::Expr| -> Result<RadialProfile, String> {
        if fd {
            let xi = grid.iter().map(|&r| e.eval(r, n)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            RadialProfile::from_samples(&grid, &xi).map_err(|e| e.to_string())
        } else {
            RadialProfile::from_expr(&grid, e, n).map_err(|e| e.to_string())
        }
    };
    let (p1, p2) = (profile(&e1)?, profile(&e2)?);
    let res = pde_residual(&cfg.spec, &p1, &p2).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<String>> = grid.iter().enumerate().map(|(i, &r)| vec![sci(r), sci(res.r1[i]), sci(res.r2[i])]).collect();
    let path = common.out_dir.join("residual.csv");
    write_csv(&path, &["r", "residual1", "residual2"], &rows).map_err(io_err(&path))?;
    let (s1, s2) = res.sup_norm();
    if !res.negative_slope_nodes.is_empty() {
        eprintln!("warning: {} nodes with negative slope", res.negative_slope_nodes.len());
    }
    println!("mode: {}", if fd { "finite-difference" } else { "analytic" });
    println!("sup-norm residual: eq1 {s1:.3e}, eq2 {s2:.3e}, max {:.3e}", s1.max(s2));
    Ok(EXIT_OK)
}

fn run_hypotheses(cfg: &Config, common: &Common) -> CmdResult {
    let witness = cfg.witness.clone().unwrap_or_default();
    let opts = HypothesisOptions { radius: common.rmax.or(cfg.numerics.rmax).unwrap_or(10.0), ..Default::default() };
    let rep = check_hypotheses(&cfg.spec, &witness, &opts);
    let opt = |v: Option<f64>| v.map_or_else(String::new, sci);
    let rows: Vec<Vec<String>> = rep
        .violations
        .iter()
        .map(|v| vec![v.hypothesis.label().into(), sci(v.t), opt(v.w), sci(v.lhs), sci(v.rhs), v.count.to_string(), v.message.clone()])
        .collect();
    let path = common.out_dir.join("violations.csv");
    write_csv(&path, &["hypothesis", "t", "w", "lhs", "rhs", "count", "message"], &rows).map_err(io_err(&path))?;
    for v in &rep.violations {
        println!(
            "({}) {}: t = {}{}, lhs = {}, rhs = {} [{} failing samples]",
            v.hypothesis.label(),
            v.message,
            v.t,
            v.w.map(|w| format!(", w = {w}")).unwrap_or_default(),
            v.lhs,
            v.rhs,
            v.count
        );
    }
    println!("{} samples checked, {} violations", rep.samples_checked, rep.violations.len());
    Ok(if rep.is_clean() { EXIT_OK } else { EXIT_VIOLATIONS })
}
