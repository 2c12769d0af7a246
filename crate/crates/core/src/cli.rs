//! Command-line interface.
//!
//! Exit codes: 0 when every requested bound is reproduced, 1 when the
//! computation ran but a bound or the cell budget failed, 2 for invalid
//! configuration.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::buchstab::BuchstabTable;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::oracle;
use crate::report::{self, Format};
use crate::sieve::aggregate::{self, legacy_fixed_sum, paper_bound, FixedSum};
use crate::sieve::{
    compute_term, Mode, QuadratureConfig, TermId, TermResult, DEFAULT_MAX_CELLS, DEFAULT_WIDTH_2D,
    DEFAULT_WIDTH_4D,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "buchstab-bounds", version, about = "Certified bounds for Buchstab-function sieve integrals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enclosures of ω(u) as CSV rows `u,lo,hi`.
    Omega(OmegaArgs),
    /// Evaluate one term.
    Term(TermArgs),
    /// Evaluate all sixteen terms and the aggregate bounds.
    Report(ReportArgs),
    /// Largest admissible exponent from the certified fixed sum.
    Solve(SolveArgs),
    /// Monte Carlo estimate of a term and agreement with the rigorous value.
    Oracle(OracleArgs),
    /// Count n ≤ x whose n²+1 has a primitive divisor.
    RhoEmpirical(RhoArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Upper end of the ω table.
    #[arg(long = "umax", default_value_t = 10.0)]
    pub u_max: f64,
    /// Step of the ω table.
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
}

impl TableArgs {
    fn build(&self) -> Result<BuchstabTable> {
        BuchstabTable::build(self.u_max, self.h)
    }
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    #[arg(long, default_value = "rigorous")]
    pub mode: Mode,
    /// Target enclosure width for the double integrals.
    #[arg(long)]
    pub width: Option<f64>,
    /// Target enclosure width for G4 and G4p.
    #[arg(long = "width-4d")]
    pub width_4d: Option<f64>,
    #[arg(long = "max-cells", default_value_t = DEFAULT_MAX_CELLS)]
    pub max_cells: u64,
    /// Exponent τ used by G7 and G7p.
    #[arg(long, default_value_t = 1.317)]
    pub tau: f64,
    #[command(flatten)]
    pub table: TableArgs,
}

impl QuadArgs {
    fn config(&self) -> QuadratureConfig {
        QuadratureConfig {
            mode: self.mode,
            target_width_2d: self.width.unwrap_or(DEFAULT_WIDTH_2D),
            target_width_4d: self.width_4d.unwrap_or(DEFAULT_WIDTH_4D),
            max_cells: self.max_cells,
            tau: self.tau,
            ..QuadratureConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write to a file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OmegaArgs {
    #[arg(long, conflicts_with_all = ["from", "to", "step"])]
    pub u: Option<f64>,
    #[arg(long, requires_all = ["to", "step"])]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TermArgs {
    pub id: TermId,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Compare against the older published bounds.
    #[arg(long = "legacy-bounds")]
    pub legacy: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long = "legacy-bounds")]
    pub legacy: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Solve from the older published bounds instead of computed terms.
    #[arg(long = "legacy-bounds")]
    pub legacy: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub id: TermId,
    /// Number of samples; accepts forms like `1e7`.
    #[arg(long, default_value = "1e7", value_parser = parse_count)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    #[arg(long = "xmax", value_parser = parse_count)]
    pub x_max: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(format!("not a nonnegative integer: {s}")),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) | Error::InconsistentEnclosure(_) => EXIT_FAILED,
        _ => EXIT_CONFIG,
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_omega(a: &OmegaArgs, stdout: &mut dyn Write) -> Result<i32> {
    let points: Vec<f64> = match (a.u, a.from, a.to, a.step) {
        (Some(u), None, None, None) => vec![u],
        (None, Some(from), Some(to), Some(step)) => {
            if !(step > 0.0 && step.is_finite() && to >= from) {
                return Err(Error::Config("need step > 0 and to ≥ from".into()));
            }
            let n = ((to - from) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| from + i as f64 * step).collect()
        }
        _ => return Err(Error::Config("give either --u or --from/--to/--step".into())),
    };
    let table = a.table.build()?;
    let mut csv = String::from("u,lo,hi\n");
    for u in points {
        if !(u >= 1.0 && u <= table.u_max()) {
            return Err(Error::Range { u, u_max: table.u_max() });
        }
        let e = table.omega(Enclosure::from_f64_decimal(u)?)?;
        let d = report::DecimalEnclosure::from_enclosure(&e);
        csv.push_str(&format!("{u},{},{}\n", d.lo, d.hi));
    }
    emit(&a.out, &csv, stdout)?;
    Ok(EXIT_OK)
}

fn term_config(quad: &QuadArgs, id: TermId) -> QuadratureConfig {
    let mut c = quad.config();
    if id.index() == 4 && quad.width_4d.is_none() {
        if let Some(w) = quad.width {
            c.target_width_4d = w;
        }
    }
    c
}

fn term_passes(r: &TermResult, legacy: bool) -> bool {
    r.certified
        && !r.budget_exceeded
        && paper_bound(r.id, legacy).is_none_or(|b| b.holds(&r.enclosure))
}

fn cmd_term(a: &TermArgs, stdout: &mut dyn Write) -> Result<i32> {
    let config = term_config(&a.quad, a.id);
    config.validate()?;
    let table = a.quad.table.build()?;
    let r = compute_term(a.id, &config, &table)?;
    let pass = term_passes(&r, a.legacy);
    let text = match a.output.format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "result": &r,
            "lo": report::format_directed(r.enclosure.lo(), false),
            "hi": report::format_directed(r.enclosure.hi(), true),
            "paper_bound": paper_bound(r.id, a.legacy),
            "pass": pass,
        }))? + "\n",
        Format::Csv => format!(
            "name,lo,hi,cells,seconds,budget_exceeded,pass\n{},{},{},{},{},{},{}\n",
            r.id,
            report::format_directed(r.enclosure.lo(), false),
            report::format_directed(r.enclosure.hi(), true),
            r.cells,
            r.seconds,
            r.budget_exceeded,
            pass
        ),
        Format::Human => {
            let bound = paper_bound(r.id, a.legacy)
                .map(|b| format!("  bound {:?} {}", b.kind, b.value))
                .unwrap_or_default();
            format!(
                "{} ∈ [{}, {}]  width {:.3e}  cells {}  {:.2}s{}{}  {}\n",
                r.id,
                report::format_directed(r.enclosure.lo(), false),
                report::format_directed(r.enclosure.hi(), true),
                r.enclosure.width(),
                r.cells,
                r.seconds,
                bound,
                if r.budget_exceeded { "  budget exceeded" } else { "" },
                if pass { "ok" } else { "FAIL" }
            )
        }
    };
    emit(&a.output.out, &text, stdout)?;
    Ok(if pass { EXIT_OK } else { EXIT_FAILED })
}

/// Evaluates every term in [`TermId::ALL`] order.
pub fn compute_all(config: &QuadratureConfig, table: &BuchstabTable) -> Result<Vec<TermResult>> {
    TermId::ALL
        .iter()
        .map(|&id| {
            let r = compute_term(id, config, table)?;
            log::info!("{id}: {} ({} cells, {:.2}s)", r.enclosure, r.cells, r.seconds);
            Ok(r)
        })
        .collect()
}

fn cmd_report(a: &ReportArgs, stdout: &mut dyn Write) -> Result<i32> {
    let config = a.quad.config();
    config.validate()?;
    let table = a.quad.table.build()?;
    let results = compute_all(&config, &table)?;
    let rep = report::build_report(&results, config.tau, a.legacy)?;
    emit(&a.output.out, &rep.render(a.output.format)?, stdout)?;
    Ok(if rep.all_pass { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write) -> Result<i32> {
    let fixed = if a.legacy {
        legacy_fixed_sum()
    } else {
        let config = a.quad.config();
        config.validate()?;
        let table = a.quad.table.build()?;
        let results = (0..=6)
            .map(|i| compute_term(TermId::from_parts(i, false).expect("index"), &config, &table))
            .collect::<Result<Vec<_>>>()?;
        if results.iter().any(|r| r.budget_exceeded || !r.certified) {
            writeln!(stdout, "fixed sum not certified (budget exceeded or fast mode)")?;
            return Ok(EXIT_FAILED);
        }
        FixedSum::from_results(&results, false)?
    };
    let sol = aggregate::solve_tau(&fixed)?;
    writeln!(
        stdout,
        "fixed sum ≤ {}\ntau* ∈ [{}, {}]\nadmissible tau: {}",
        report::format_directed(fixed.value.hi(), true),
        report::format_directed(sol.tau.lo(), false),
        report::format_directed(sol.tau.hi(), true),
        sol.admissible
    )?;
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &OracleArgs, stdout: &mut dyn Write) -> Result<i32> {
    let config = term_config(&a.quad, a.id);
    config.validate()?;
    let est = oracle::mc_term(a.id, a.samples, a.seed, config.tau)?;
    let table = a.quad.table.build()?;
    let r = compute_term(a.id, &config, &table)?;
    let ok = est.agrees_with(r.enclosure.mid());
    let text = serde_json::to_string_pretty(&serde_json::json!({
        "estimate": &est,
        "rigorous": { "lo": report::format_directed(r.enclosure.lo(), false),
                      "hi": report::format_directed(r.enclosure.hi(), true) },
        "verdict": if ok { "ok" } else { "disagree" },
    }))? + "\n";
    emit(&a.out, &text, stdout)?;
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_rho(a: &RhoArgs, stdout: &mut dyn Write) -> Result<i32> {
    let c = oracle::empirical_rho(a.x_max)?;
    emit(&a.out, &(serde_json::to_string_pretty(&c)? + "\n"), stdout)?;
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Omega(a) => cmd_omega(a, stdout),
        Command::Term(a) => cmd_term(a, stdout),
        Command::Report(a) => cmd_report(a, stdout),
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Oracle(a) => cmd_oracle(a, stdout),
        Command::RhoEmpirical(a) => cmd_rho(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main_from_env() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
