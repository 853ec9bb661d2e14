//! The `coreg` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a check, synthesis step or tolerance
//! fails, 2 when an input document cannot be read or is malformed.
//!
//! Parameter precedence, lowest to highest: scenario file, `--gains` file,
//! command-line flags.

pub mod trace;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use coreg_core::scenario::{preset, validate_assumptions, PRESET_NAMES};
use coreg_core::sim::{assemble_closed_loop, convergence_metrics, integrate, Feedback};
use coreg_core::{load_scenario, Design, GainsFile, Mode, Scenario};
use thiserror::Error;

pub use trace::{gnuplot_script, trace_csv, trace_header, write_trace_csv};

#[derive(Debug, Parser)]
#[command(name = "coreg", version, about = "Coordinated output regulation over switching networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every structural and switching assumption of a scenario.
    Check(CommonArgs),
    /// Synthesize gains and write them as a gains document.
    Synthesize(CommonArgs),
    /// Report the dwell-time / high-gain certification quantities.
    Certify(CommonArgs),
    /// Simulate the closed loop and write a CSV trace.
    Simulate(SimulateArgs),
    /// Write a built-in example scenario (example1, example2, example3).
    Preset {
        name: String,
        /// Output path; stdout when omitted.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario document (JSON).
    pub scenario: PathBuf,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Gains document written by `synthesize`.
    #[arg(long)]
    pub gains: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Integration step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Simulated time span.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Pass threshold on the final max_i ‖e_i‖.
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    /// Feed back true states instead of observer estimates.
    #[arg(long)]
    pub true_state: bool,
    /// Also write a gnuplot script plotting the CSV (requires -o).
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    Output { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failed(_) | CliError::Output { .. } => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command, writing human-readable output to `out`.
pub fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Check(args) => check(&args, out),
        Command::Synthesize(args) => synthesize_cmd(&args, out),
        Command::Certify(args) => certify(&args, out),
        Command::Simulate(args) => simulate(&args, out),
        Command::Preset { name, output } => {
            let s = preset(&name).map_err(|_| {
                CliError::Input(format!("unknown preset {name:?}; expected one of {PRESET_NAMES:?}"))
            })?;
            emit(output.as_deref(), &(s.to_json() + "\n"), out)?;
            Ok(0)
        }
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(out, "{}", line.as_ref());
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Output {
            path: p.display().to_string(),
            source,
        }),
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Output {
            path: "<stdout>".into(),
            source,
        }),
    }
}

/// Loads the scenario and applies the gains file and flag overrides.
pub fn load_with_overrides(args: &CommonArgs) -> Result<Scenario> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
    };
    let mut s = load_scenario(&read(&args.scenario)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.scenario.display())))?;
    if let Some(path) = &args.gains {
        let file: GainsFile = serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let g = file
            .overrides()
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        s.mode = file.mode;
        s.gains.epsilon = g.epsilon;
        s.gains.theta = g.theta;
        s.gains.alpha = g.alpha;
        s.gains.f = g.f.or(s.gains.f);
        s.gains.k_a = g.k_a.or(s.gains.k_a);
        s.gains.k_s = g.k_s.or(s.gains.k_s);
    }
    if let Some(m) = args.mode {
        if m != s.mode {
            // mode-specific injection gains no longer apply
            s.gains.k_a = None;
            s.gains.k_s = None;
        }
        s.mode = m;
    }
    s.gains.epsilon = args.epsilon.or(s.gains.epsilon);
    s.gains.theta = args.theta.or(s.gains.theta);
    s.gains.alpha = args.alpha.or(s.gains.alpha);
    Ok(s)
}

fn design(s: &Scenario) -> Result<Design> {
    s.synthesize()
        .map_err(|e| CliError::Failed(format!("synthesis failed: {e}")))
}

fn check(args: &CommonArgs, out: &mut dyn Write) -> Result<i32> {
    let s = load_with_overrides(args)?;
    let report = validate_assumptions(&s);
    let mut text = String::new();
    for e in &report.entries {
        let who = e.index.map(|i| format!(" [{i}]")).unwrap_or_default();
        text += &format!(
            "{} {}{who}: {}\n",
            if e.passed { "PASS" } else { "FAIL" },
            e.name,
            e.detail
        );
    }
    let failed = report.failures().count();
    text += &if failed == 0 {
        format!("all {} checks passed\n", report.entries.len())
    } else {
        format!("{failed} of {} checks failed\n", report.entries.len())
    };
    emit(args.output.as_deref(), &text, out)?;
    Ok(i32::from(failed > 0))
}

fn synthesize_cmd(args: &CommonArgs, out: &mut dyn Write) -> Result<i32> {
    let s = load_with_overrides(args)?;
    let d = design(&s)?;
    let json = serde_json::to_string_pretty(&d.gains_file()).expect("gains serialize") + "\n";
    emit(args.output.as_deref(), &json, out)?;
    if args.output.is_some() {
        say(
            out,
            format!(
                "synthesized {} agents in {} mode (ε = {}, θ = {}, α = {})",
                s.agents.len(),
                d.mode,
                d.epsilon,
                d.theta,
                d.alpha
            ),
        );
    }
    Ok(0)
}

fn certify(args: &CommonArgs, out: &mut dyn Write) -> Result<i32> {
    let s = load_with_overrides(args)?;
    let d = design(&s)?;
    let c = &d.certification;
    if let Some(path) = &args.output {
        let json = serde_json::to_string_pretty(c).expect("report serializes") + "\n";
        emit(Some(path), &json, out)?;
    }
    say(out, format!("mode            {}", d.mode));
    say(out, format!("epsilon         {}", c.epsilon));
    say(out, format!("theta           {}", d.theta));
    say(out, format!("alpha           {}", c.alpha));
    say(out, format!("lambda_min(P)   {}", c.lambda_min_p));
    say(out, format!("lambda_max(P)   {}", c.lambda_max_p));
    say(out, format!("lambda_c        {}", c.lambda_c));
    say(out, format!("lambda_d        {}", c.lambda_d));
    say(out, format!("a               {}", c.a));
    say(out, format!("c*              {}", c.c_star));
    say(out, format!("kappa*          {}", c.kappa_star));
    say(out, format!("kappa_achieved  {}", c.kappa_achieved));
    say(out, format!("tau_d           {}", c.tau_d));
    say(out, format!("eps*            {}", c.eps_star));
    say(out, format!("||L_eps||       {} (bound {})", c.norm_leps, c.norm_bound_leps));
    say(out, format!("eps_norm        {}", c.eps_norm));
    if !c.kappa_ok {
        say(
            out,
            format!(
                "WARN kappa_achieved = {} < kappa* = {}; the sufficient condition is not met",
                c.kappa_achieved, c.kappa_star
            ),
        );
    }
    if !c.epsilon_ok {
        say(
            out,
            format!(
                "WARN epsilon = {} exceeds the certified range (eps* = {}, eps_norm = {})",
                c.epsilon, c.eps_star, c.eps_norm
            ),
        );
    }
    if c.certified() {
        say(out, "certified");
    }
    Ok(0)
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let mut s = load_with_overrides(&args.common)?;
    s.sim.h = args.h.unwrap_or(s.sim.h);
    s.sim.horizon = args.horizon.unwrap_or(s.sim.horizon);
    s.sim
        .validate()
        .map_err(|e| CliError::Input(e.to_string()))?;
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(CliError::Input(format!("--tol must be positive, got {}", args.tol)));
    }
    let d = design(&s)?;
    let feedback = if args.true_state {
        Feedback::TrueState
    } else {
        Feedback::Observer
    };
    let system = assemble_closed_loop(&s.agents, &s.group, &d, feedback)
        .map_err(|e| CliError::Failed(format!("closed loop: {e}")))?;
    let trace = integrate(&system, &s.schedule, &s.sim)
        .map_err(|e| CliError::Failed(format!("simulation failed: {e}")))?;

    let csv = trace_csv(&trace);
    let log: &mut dyn Write = match &args.common.output {
        Some(path) => {
            emit(Some(path), &csv, out)?;
            out
        }
        None => {
            emit(None, &csv, out)?;
            &mut io::sink()
        }
    };
    if let Some(script) = &args.gnuplot {
        let Some(csv_path) = &args.common.output else {
            return Err(CliError::Input("--gnuplot requires -o".into()));
        };
        let text = gnuplot_script(&csv_path.display().to_string(), &trace.error_dims);
        emit(Some(script), &text, log)?;
    }

    let metrics = convergence_metrics(&trace, &[args.tol]);
    let final_max = trace.len().checked_sub(1).map_or(0.0, |r| trace.max_error_norm(r));
    let settled = metrics
        .settling(args.tol)
        .map_or("not settled".to_string(), |t| format!("{t}"));
    let summary = format!(
        "{} records; final max_i |e_i| = {final_max:e}; settling time (tol {}) = {settled}",
        trace.len(),
        args.tol
    );
    if args.common.output.is_some() {
        say(log, &summary);
    } else {
        eprintln!("{summary}");
    }
    let passed = final_max < args.tol;
    if !passed {
        eprintln!("final error {final_max:e} is not below --tol {}", args.tol);
    }
    Ok(i32::from(!passed))
}
