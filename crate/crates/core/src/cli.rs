//! Command line front end. Every subcommand produces a [`ReportDocument`];
//! the exit code is 0 when all checks pass, 1 when one fails and 2 for
//! invalid input or an inconclusive computation.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::branch::{continue_branch, solve_at, BranchRow, ContinuationControls, ProblemParams};
use crate::error::Error;
use crate::hardy_rellich::{
    bessel_pair_test, boundary_gradient_weight, first_order_boundary_weight, paired_weight_w1,
    verify_weight_rayleigh_with, BesselOptions, BesselPairSpec, OdeVerdict, RadialWeight,
    WeightChoice,
};
use crate::radial::powersum::to_f64;
use crate::radial::{int, make_grid, Grading, PowerSum, RadialGrid, Rational};
use crate::report::{Check, Outcome, ReportDocument};
use crate::stability::{self, Potential};
use crate::subsolutions::{
    certify_spec, h_n, lambda_bar, regularity_criterion, CertifyOptions, SubSolutionSpec,
    TableCase, Verdict,
};

/// Environment override for the default grid size of every subcommand.
pub const GRID_SIZE_ENV: &str = "NAVIER_MEMS_GRID_SIZE";

#[derive(Debug, Parser)]
#[command(
    name = "navier-mems",
    version,
    about = "Radial biharmonic MEMS laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regularity criterion 2λ̄ ≤ H_N over a range of dimensions.
    Criterion {
        #[command(flatten)]
        dims: Dimensions,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal branch continuation and the pull-in bracket.
    Branch {
        #[command(flatten)]
        problem: Problem,
        /// Solve only at these λ values instead of continuing.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        /// Compute μ₁ at every accepted point.
        #[arg(long)]
        mu1: bool,
        #[command(flatten)]
        common: Common,
    },
    /// First eigenvalue of the linearized operator along the branch.
    Stability {
        #[command(flatten)]
        problem: Problem,
        /// Branch points to examine; without values only λ = 0 is used.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Pointwise certificates for the singular sub-solutions.
    Certify {
        #[command(flatten)]
        dims: Dimensions,
        /// Row rule: nine, explicit, mid-range or high-range.
        #[arg(long)]
        rule: Option<String>,
        /// Override λ′ (integer, fraction or decimal).
        #[arg(long)]
        lambda_prime: Option<String>,
        /// Override σ.
        #[arg(long)]
        sigma: Option<String>,
        /// Override the Hardy-Rellich weight.
        #[arg(long)]
        weight: Option<String>,
        /// Grid used to verify the weight.
        #[arg(long, default_value_t = 4000)]
        verify_nodes: usize,
        #[arg(long, default_value_t = 3)]
        k_max: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Rayleigh-quotient and Bessel-pair verification of a weight.
    HrVerify {
        #[command(flatten)]
        dims: Dimensions,
        /// classical, improved31 or improved32.
        #[arg(long, default_value = "classical")]
        weight: String,
        #[arg(long, default_value_t = 3)]
        k_max: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Combine report files into one document.
    ReportMerge {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Dimensions {
    #[arg(long, short = 'N')]
    pub dimension: Option<u32>,
    /// Inclusive range such as `5..12`.
    #[arg(long, conflicts_with = "dimension")]
    pub dimension_range: Option<String>,
}

impl Dimensions {
    pub fn resolve(&self) -> Result<Vec<u32>, CliError> {
        match (&self.dimension, &self.dimension_range) {
            (Some(n), None) => Ok(vec![*n]),
            (None, Some(r)) => parse_range(r),
            _ => Err(CliError::invalid("give --dimension or --dimension-range")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Problem {
    #[arg(long, short = 'N')]
    pub dimension: u32,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Boundary value of u.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Boundary value of Δu.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
}

impl Problem {
    fn params(&self) -> Result<ProblemParams, CliError> {
        ProblemParams::with_boundary(self.dimension, self.beta, self.tau, self.alpha, self.gamma)
            .map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, env = GRID_SIZE_ENV)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub output: OutputFormat,
    #[arg(long)]
    pub out_file: Option<PathBuf>,
}

/// Failure before a report could be assembled.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: msg.into(),
        }
    }

    pub fn failed(msg: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inconsistent(_) => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// A finished command: the report and, for branch tables, CSV rows.
pub struct Output {
    pub report: ReportDocument,
    pub csv_rows: Option<Vec<BranchRow>>,
}

pub fn parse_range(s: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::invalid(format!("bad dimension range '{s}', expected A..B"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

/// Parses `"249"`, `"3/2"` or `"2.8"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::invalid(format!("'{s}' is not a rational number"));
    let t = s.trim();
    if t.contains('/') {
        return Rational::from_str(t).map_err(|_| bad());
    }
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (ip, fp) = t.split_once('.').unwrap_or((t, ""));
    if ip.is_empty() && fp.is_empty() || !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let num: num_bigint::BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_bigint::BigInt::from(10u32).pow(fp.len() as u32);
    let v = Rational::new(num, den);
    Ok(if neg { -v } else { v })
}

fn parse_rule(s: &str) -> Result<TableCase, CliError> {
    match s {
        "nine" => Ok(TableCase::Nine),
        "explicit" => Ok(TableCase::Explicit),
        "mid-range" | "mid_range" => Ok(TableCase::MidRange),
        "high-range" | "high_range" => Ok(TableCase::HighRange),
        _ => Err(CliError::invalid(format!("unknown rule '{s}'"))),
    }
}

fn geometric(nodes: usize, r_min: f64) -> Result<Arc<RadialGrid>, CliError> {
    Ok(Arc::new(make_grid(nodes, r_min, Grading::Geometric)?))
}

fn tolerances(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| ((*k).to_string(), *v)).collect()
}

fn cmd_criterion(dims: &Dimensions) -> Result<Output, CliError> {
    let ns = dims.resolve()?;
    if let Some(n) = ns.iter().find(|n| !(5..=64).contains(*n)) {
        return Err(CliError::invalid(format!(
            "criterion needs N in 5..64, got {n}"
        )));
    }
    let rows: Vec<_> = ns
        .iter()
        .map(|&n| {
            let lb = lambda_bar(n);
            let h = h_n(n);
            json!({
                "N": n,
                "lambda_bar": lb.to_string(),
                "lambda_bar_approx": to_f64(&lb),
                "h_n": h.to_string(),
                "h_n_approx": to_f64(&h),
                "regular": regularity_criterion(n),
            })
        })
        .collect();
    let mut report = ReportDocument::new("criterion", json!({ "dimensions": ns }));
    report.results = json!({ "rows": rows });
    report.provenance.tolerances = tolerances(&[("exact", 0.0)]);
    Ok(Output {
        report,
        csv_rows: None,
    })
}

fn cmd_branch(
    problem: &Problem,
    lambdas: &[f64],
    mu1: bool,
    common: &Common,
) -> Result<Output, CliError> {
    let params = problem.params()?;
    let nodes = common.grid_size.unwrap_or(2000);
    let r_min = common.r_min.unwrap_or(1e-6);
    let tol = common.tolerance.unwrap_or(0.02);
    let grid = geometric(nodes, r_min)?;
    let controls = ContinuationControls {
        compute_mu1: mu1,
        ..ContinuationControls::default()
    };
    let mut report = ReportDocument::new(
        "branch",
        json!({ "params": params, "lambda": lambdas, "mu1": mu1, "controls": controls }),
    );
    report.provenance.grid_nodes = Some(nodes);
    report.provenance.r_min = Some(r_min);
    report.provenance.tolerances = tolerances(&[
        ("bound", tol),
        ("iteration", controls.iteration.tol),
        ("error_estimate", controls.iteration.error_tol),
        ("touchdown_margin", controls.iteration.touchdown_margin),
        ("bracket_rel_width", controls.rel_width),
    ]);
    let rows = if lambdas.is_empty() {
        let res = continue_branch(&params, grid.clone(), None, &controls)?;
        let rows = res.rows();
        let ub = res.upper_bound.clone();
        report.results = json!({
            "lambda_star_low": res.lambda_star_low,
            "lambda_star_high": res.lambda_star_high,
            "upper_bound": ub,
            "points": rows,
        });
        if let Some(ub) = ub {
            report.push_check(Check::at_most(
                "lambda_star_high_within_bound",
                res.lambda_star_high,
                ub.value * (1.0 + tol),
            ));
        }
        rows
    } else {
        let pts = solve_at(&params, grid, lambdas, &controls).map_err(|e| match e {
            Error::NonConvergence { .. } => CliError::failed(e.to_string()),
            other => other.into(),
        })?;
        let rows: Vec<BranchRow> = pts.iter().map(|p| p.row()).collect();
        report.results = json!({ "points": rows });
        rows
    };
    Ok(Output {
        report,
        csv_rows: Some(rows),
    })
}

fn cmd_stability(problem: &Problem, lambdas: &[f64], common: &Common) -> Result<Output, CliError> {
    let params = problem.params()?;
    let nodes = common.grid_size.unwrap_or(2000);
    let r_min = common.r_min.unwrap_or(1e-6);
    let grid = geometric(nodes, r_min)?;
    let controls = ContinuationControls::default();
    let base = stability::navier_eigen_smallest(&params, grid.clone(), Potential::Zero)?;
    let mut report =
        ReportDocument::new("stability", json!({ "params": params, "lambda": lambdas }));
    report.provenance.grid_nodes = Some(nodes);
    report.provenance.r_min = Some(r_min);
    let residual_rtol = crate::linalg::EigenOptions::default().residual_rtol;
    report.provenance.tolerances = tolerances(&[("eigen_residual_rtol", residual_rtol)]);
    report.push_check(Check::at_least("mu1_at_zero_positive", base.mu, 0.0));
    let mut points = Vec::new();
    if !lambdas.is_empty() {
        let pts = solve_at(&params, grid, lambdas, &controls)?;
        let mut prev: Option<f64> = None;
        for p in &pts {
            let e = stability::mu1_of_solution(&params, p)?;
            report.push_check(Check::at_least(
                format!("mu1_positive_at_{}", p.lambda),
                e.mu,
                0.0,
            ));
            if let Some(prev) = prev {
                report.push_check(Check::at_most(
                    format!("mu1_non_increasing_at_{}", p.lambda),
                    e.mu,
                    prev,
                ));
            }
            prev = Some(e.mu);
            points
                .push(json!({ "lambda": p.lambda, "sup_norm": p.sup_norm, "eigen": e.summary() }));
        }
    }
    report.results = json!({ "unperturbed": base.summary(), "points": points });
    Ok(Output {
        report,
        csv_rows: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_certify(
    dims: &Dimensions,
    rule: Option<&str>,
    lambda_prime: Option<&str>,
    sigma: Option<&str>,
    weight: Option<&str>,
    verify_nodes: usize,
    k_max: u32,
    common: &Common,
) -> Result<Output, CliError> {
    let ns = dims.resolve()?;
    if let Some(n) = ns.iter().find(|n| **n < 9) {
        return Err(CliError::invalid(format!(
            "certification needs N >= 9, got {n}"
        )));
    }
    let rule = rule.map(parse_rule).transpose()?;
    let lp = lambda_prime.map(parse_rational).transpose()?;
    let sg = sigma.map(parse_rational).transpose()?;
    let wc = weight.map(WeightChoice::from_str).transpose()?;
    let opts = CertifyOptions {
        grid_nodes: common.grid_size.unwrap_or(20_000),
        r_min: common.r_min.unwrap_or(1e-8),
        verify_nodes,
        verify_k_max: k_max,
    };
    let specs = ns
        .iter()
        .map(|&n| {
            let mut spec = match rule {
                Some(c) => SubSolutionSpec::for_case(n, c)?,
                None => SubSolutionSpec::table(n)?,
            };
            if let Some(l) = &lp {
                spec.lambda_prime = l.clone();
            }
            if let Some(s) = &sg {
                spec.sigma = s.clone();
            }
            if let Some(w) = wc {
                spec.weight = w;
            }
            Ok(spec)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let reports: Vec<_> = specs.par_iter().map(|s| certify_spec(s, &opts)).collect();
    let mut report = ReportDocument::new(
        "certify",
        json!({
            "dimensions": ns,
            "rule": rule,
            "lambda_prime": lambda_prime,
            "sigma": sigma,
            "weight": weight,
            "options": opts,
        }),
    );
    report.provenance.grid_nodes = Some(opts.grid_nodes);
    report.provenance.r_min = Some(opts.r_min);
    report.provenance.tolerances = tolerances(&[
        ("margin", 0.0),
        ("weight_rayleigh", crate::hardy_rellich::DEFAULT_TOLERANCE),
    ]);
    let mut certs = Vec::new();
    for (n, r) in ns.iter().zip(reports) {
        let c = r?;
        report.push_check(Check::at_least(
            format!("N{n}_pde_margin"),
            c.margins.pde.min,
            0.0,
        ));
        report.push_check(Check::at_least(
            format!("N{n}_stability_margin"),
            c.margins.stability.min,
            0.0,
        ));
        match &c.verdict {
            Verdict::Certified => report.push_check(Check::flag(format!("N{n}_certified"), true)),
            Verdict::Violated { .. } => {
                report.push_check(Check::flag(format!("N{n}_certified"), false))
            }
            Verdict::Inconclusive { .. } => {
                report.outcome = report.outcome.combine(Outcome::Inconclusive);
            }
        }
        certs.push(c);
    }
    report.results = json!({ "certificates": certs });
    Ok(Output {
        report,
        csv_rows: None,
    })
}

fn ode_verdict(
    report: &mut ReportDocument,
    name: &str,
    v: RadialWeight,
    w: RadialWeight,
    n: u32,
) -> crate::Result<serde_json::Value> {
    let spec = BesselPairSpec::new(v, w, n)?;
    let sol = bessel_pair_test(&spec, &BesselOptions::default())?;
    match &sol.verdict {
        OdeVerdict::Positive => {
            report.push_check(Check::flag(format!("{name}_ode_positive"), true))
        }
        OdeVerdict::SignChange { .. } => {
            report.push_check(Check::flag(format!("{name}_ode_positive"), false))
        }
        OdeVerdict::Inconclusive { .. } => {
            report.outcome = report.outcome.combine(Outcome::Inconclusive)
        }
    }
    Ok(json!({
        "pair": name,
        "verdict": sol.verdict,
        "exponent": sol.exponent,
        "complex_exponents": sol.complex_exponents,
        "steps": sol.steps,
        "inverse_integral_diverges": spec.inverse_integral_diverges,
        "mass_converges": spec.mass_converges,
    }))
}

fn cmd_hr_verify(
    dims: &Dimensions,
    weight: &str,
    k_max: u32,
    common: &Common,
) -> Result<Output, CliError> {
    let ns = dims.resolve()?;
    let choice = WeightChoice::from_str(weight)?;
    let nodes = common.grid_size.unwrap_or(4000);
    let r_min = common.r_min.unwrap_or(1e-8);
    let tol = common
        .tolerance
        .unwrap_or(crate::hardy_rellich::DEFAULT_TOLERANCE);
    let grid = geometric(nodes, r_min)?;
    let weights = ns
        .iter()
        .map(|&n| {
            if n < 5 {
                return Err(CliError::invalid(format!("weights need N >= 5, got {n}")));
            }
            choice.build(n).map_err(CliError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = ReportDocument::new(
        "hr-verify",
        json!({ "dimensions": ns, "weight": choice.label(), "k_max": k_max }),
    );
    report.provenance.grid_nodes = Some(nodes);
    report.provenance.r_min = Some(r_min);
    report.provenance.tolerances = tolerances(&[("rayleigh", tol), ("pointwise", 0.0)]);
    let rayleigh: Vec<_> = ns
        .par_iter()
        .zip(&weights)
        .map(|(&n, w)| verify_weight_rayleigh_with(n, w, k_max, grid.clone(), tol))
        .collect();
    let mut results = Vec::new();
    for ((&n, w), rr) in ns.iter().zip(&weights).zip(rayleigh) {
        let rr = rr?;
        for m in &rr.modes {
            report.push_check(Check::at_least(
                format!("N{n}_mode{}_quotient", m.k),
                m.quotient,
                1.0 - tol,
            ));
        }
        report.push_check(Check::at_least(
            format!("N{n}_first_order_dirichlet"),
            rr.first_order_dirichlet,
            1.0 - tol,
        ));
        report.push_check(Check::at_least(
            format!("N{n}_first_order_free"),
            rr.first_order_free,
            1.0 - tol,
        ));
        let mut odes = vec![ode_verdict(
            &mut report,
            &format!("N{n}_first_order"),
            RadialWeight::from_power_sum("one", PowerSum::one())?,
            first_order_boundary_weight(n)?,
            n,
        )?];
        odes.push(ode_verdict(
            &mut report,
            &format!("N{n}_boundary_pair"),
            boundary_gradient_weight(n)?,
            paired_weight_w1(n)?,
            n,
        )?);
        // pointwise margin against the sub-solution row that uses this weight
        let mut pointwise = serde_json::Value::Null;
        if let Ok(spec) = SubSolutionSpec::table(n) {
            if spec.weight == choice {
                let stab = w.mul_power_sum(&spec.gap().pow(3));
                let ev = stab.evaluator();
                let two_sigma = to_f64(&(int(2) * &spec.sigma));
                let cert = geometric(20_000, r_min)?;
                let (mut min, mut arg) = (f64::INFINITY, f64::NAN);
                for &r in cert.interior() {
                    let v = ev.eval(r) - two_sigma;
                    if v < min {
                        min = v;
                        arg = r;
                    }
                }
                report.push_check(Check::at_least(format!("N{n}_pointwise_margin"), min, 0.0));
                pointwise = json!({ "two_sigma": two_sigma, "min": min, "argmin": arg });
            }
        }
        results.push(json!({ "rayleigh": rr, "ode": odes, "pointwise": pointwise }));
    }
    report.results = json!({ "verifications": results });
    Ok(Output {
        report,
        csv_rows: None,
    })
}

fn cmd_report_merge(inputs: &[PathBuf]) -> Result<Output, CliError> {
    if inputs.is_empty() {
        return Err(CliError::invalid("report-merge needs at least one input"));
    }
    let docs = inputs
        .iter()
        .map(|p| {
            let s = std::fs::read_to_string(p)
                .map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?;
            ReportDocument::from_json(&s)
                .map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output {
        report: ReportDocument::merge(docs),
        csv_rows: None,
    })
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Criterion { common, .. }
        | Command::Branch { common, .. }
        | Command::Stability { common, .. }
        | Command::Certify { common, .. }
        | Command::HrVerify { common, .. }
        | Command::ReportMerge { common, .. } => common,
    }
}

/// Runs a parsed command and returns its output.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let start = Instant::now();
    let mut out = match &cli.command {
        Command::Criterion { dims, .. } => cmd_criterion(dims),
        Command::Branch {
            problem,
            lambda,
            mu1,
            common,
        } => cmd_branch(problem, lambda, *mu1, common),
        Command::Stability {
            problem,
            lambda,
            common,
        } => cmd_stability(problem, lambda, common),
        Command::Certify {
            dims,
            rule,
            lambda_prime,
            sigma,
            weight,
            verify_nodes,
            k_max,
            common,
        } => cmd_certify(
            dims,
            rule.as_deref(),
            lambda_prime.as_deref(),
            sigma.as_deref(),
            weight.as_deref(),
            *verify_nodes,
            *k_max,
            common,
        ),
        Command::HrVerify {
            dims,
            weight,
            k_max,
            common,
        } => cmd_hr_verify(dims, weight, *k_max, common),
        Command::ReportMerge { inputs, .. } => cmd_report_merge(inputs),
    }?;
    if !matches!(cli.command, Command::ReportMerge { .. }) {
        out.report.provenance.wall_time_seconds = start.elapsed().as_secs_f64();
    }
    Ok(out)
}

fn render(out: &Output, format: OutputFormat) -> Result<Vec<u8>, CliError> {
    match format {
        OutputFormat::Json => {
            let mut s = out.report.to_json().map_err(Error::from)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        OutputFormat::Csv => {
            let rows = out.csv_rows.as_ref().ok_or_else(|| {
                CliError::invalid("CSV output is only available for branch tables")
            })?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(Error::from)?;
            }
            w.into_inner().map_err(|e| CliError::invalid(e.to_string()))
        }
    }
}

/// Parses `args`, runs the command, writes the output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let c = common(&cli.command);
    let result = execute(&cli).and_then(|out| Ok((render(&out, c.output)?, out.report.outcome)));
    match result {
        Ok((bytes, outcome)) => {
            let written = match &c.out_file {
                Some(p) => std::fs::write(p, &bytes).map_err(|e| e.to_string()),
                None => std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
