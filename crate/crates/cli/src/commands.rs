use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cumrate::achieve::{
    check_effective_lossless, check_linear_rd, check_lossless, check_lossy, min_distortion, Verdict,
};
use cumrate::cumfn::{effective_crdf, rate_leakage_gap, KnotList};
use cumrate::envelope::{concave_envelope, segment_slopes};
use cumrate::oracle::{brute_force_with_mode, SearchMode};
use cumrate::ratedist::CurveForm;
use cumrate::schedule::{rate_profile, transmission_plan};
use cumrate::{CumulativeFunction, Mode, RdCurve};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::problem::ProblemFile;
use crate::table::{alpha_grid, function_table, Table};
use crate::{EXIT_INVALID, EXIT_NOT_ACHIEVABLE, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "cumrate", version, about = "Achievability and scheduling under cumulative rate and leakage constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check both functions for regularity.
    Validate(CommonArgs),
    /// Effective rate function.
    Effective(CommonArgs),
    /// Concave envelope of the effective rate function.
    Envelope(CommonArgs),
    /// Distortion-rate curve of the source.
    RdCurve(CommonArgs),
    /// Lossless achievability.
    CheckLossless(CommonArgs),
    /// Lossy achievability at distortion `dbar`.
    CheckLossy(CommonArgs),
    MinDistortion(CommonArgs),
    /// Block-by-block transmission plan.
    Schedule(CommonArgs),
    /// Brute-force minimum distortion over `k` blocks.
    Oracle(CommonArgs),
    /// Data tables for the illustrative figures.
    EmitFigure {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// G, L, effective rate, envelope, slope and D of slope.
    Theorem2,
    /// Effective rate against the erasure upper bound.
    Example1,
    /// Effective rate against the log-loss upper bound.
    Example2,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Problem file, or `-` for stdin.
    pub problem: PathBuf,
    /// Also write a function table to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Attach a brute-force cross-check.
    #[arg(long)]
    pub oracle: bool,
    /// Number of blocks; overrides the problem file.
    #[arg(long)]
    pub k: Option<usize>,
    /// Oracle grid step; overrides the problem file.
    #[arg(long)]
    pub grid_step: Option<f64>,
}

/// What a command prints and how it exits.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub output: Value,
    pub exit: u8,
}

impl Emission {
    fn ok(output: Value) -> Self {
        Emission { output, exit: EXIT_OK }
    }

    fn verdict(output: Value, achievable: bool) -> Self {
        Emission { output, exit: if achievable { EXIT_OK } else { EXIT_NOT_ACHIEVABLE } }
    }
}

struct Context {
    problem: ProblemFile,
    args: CommonArgs,
}

impl Context {
    fn k(&self) -> Result<usize, CliError> {
        self.args.k.or(self.problem.k).ok_or(CliError::Missing("k"))
    }

    fn grid_step(&self) -> f64 {
        self.args.grid_step.unwrap_or(self.problem.options.grid_step)
    }

    fn functions(&self) -> Result<(CumulativeFunction, CumulativeFunction), CliError> {
        Ok((self.problem.crdf()?, self.problem.cldf()?))
    }

    fn oracle(&self, g: &CumulativeFunction, l: &CumulativeFunction, curve: &RdCurve) -> Result<Value, CliError> {
        let k = self.args.k.or(self.problem.k).unwrap_or(2);
        let res = brute_force_with_mode(g, l, curve, k, self.grid_step(), SearchMode::Greedy)?;
        Ok(serde_json::to_value(res)?)
    }

    fn write_csv(&self, curve: Option<&RdCurve>) -> Result<(), CliError> {
        let Some(path) = &self.args.csv else { return Ok(()) };
        let (g, l) = self.functions()?;
        let table = function_table(&g, &l, self.problem.mode()?, curve, self.problem.options.csv_points)?;
        table.write_csv(path)
    }

    fn curve_if_any(&self) -> Result<Option<RdCurve>, CliError> {
        if self.problem.has_curve() {
            self.problem.curve().map(Some)
        } else {
            Ok(None)
        }
    }
}

/// Runs one command. Errors map to exit code 2.
pub fn run(command: &Command) -> Result<Emission, CliError> {
    let (args, figure) = match command {
        Command::EmitFigure { figure, common } => (common, Some(*figure)),
        Command::Validate(a)
        | Command::Effective(a)
        | Command::Envelope(a)
        | Command::RdCurve(a)
        | Command::CheckLossless(a)
        | Command::CheckLossy(a)
        | Command::MinDistortion(a)
        | Command::Schedule(a)
        | Command::Oracle(a) => (a, None),
    };
    let ctx = Context { problem: ProblemFile::read(&args.problem)?, args: args.clone() };
    match command {
        Command::Validate(_) => validate(&ctx),
        Command::Effective(_) => effective(&ctx),
        Command::Envelope(_) => envelope(&ctx),
        Command::RdCurve(_) => rd_curve(&ctx),
        Command::CheckLossless(_) => lossless(&ctx),
        Command::CheckLossy(_) => lossy(&ctx),
        Command::MinDistortion(_) => distortion(&ctx),
        Command::Schedule(_) => schedule(&ctx),
        Command::Oracle(_) => oracle(&ctx),
        Command::EmitFigure { .. } => emit_figure(&ctx, figure.expect("figure command")),
    }
}

fn validate(ctx: &Context) -> Result<Emission, CliError> {
    let (crdf, cldf) = ctx.problem.validation()?;
    let valid = crdf.as_ref().is_none_or(|r| r.is_valid()) && cldf.as_ref().is_none_or(|r| r.is_valid());
    let output = json!({ "valid": valid, "crdf": crdf, "cldf": cldf });
    Ok(Emission { output, exit: if valid { EXIT_OK } else { EXIT_INVALID } })
}

fn effective(ctx: &Context) -> Result<Emission, CliError> {
    let (g, l) = ctx.functions()?;
    let mode = ctx.problem.mode()?;
    let g_eff = effective_crdf(&g, &l, mode)?;
    let withheld = match mode {
        Mode::Lossy => rate_leakage_gap(&g, &l)?.value.max(0.0),
        Mode::Lossless { entropy } => (g.final_value() - entropy).max(0.0),
    };
    ctx.write_csv(ctx.curve_if_any()?.as_ref())?;
    Ok(Emission::ok(json!({
        "mode": ctx.problem.options.mode,
        "withheld_rate": withheld,
        "g_eff": KnotList::from(g_eff),
    })))
}

fn envelope(ctx: &Context) -> Result<Emission, CliError> {
    let (g, l) = ctx.functions()?;
    let g_eff = effective_crdf(&g, &l, ctx.problem.mode()?)?;
    let env = concave_envelope(&g_eff)?;
    let mut output = json!({
        "g_eff": KnotList::from(g_eff.clone()),
        "envelope": env,
    });
    if let Some(k) = ctx.args.k.or(ctx.problem.k) {
        output["envelope_profile"] = serde_json::to_value(segment_slopes(&env, k)?)?;
        output["effective_profile"] = serde_json::to_value(rate_profile(&g_eff, k)?)?;
    }
    ctx.write_csv(ctx.curve_if_any()?.as_ref())?;
    Ok(Emission::ok(output))
}

fn rd_curve(ctx: &Context) -> Result<Emission, CliError> {
    let curve = ctx.problem.curve()?;
    let points: Vec<(f64, f64)> = match curve.form() {
        CurveForm::Sampled { points } => points.clone(),
        _ => {
            // Tabulate a closed form on a rate grid reaching zero distortion.
            let top = rate_for_floor(&curve);
            let n = ctx.problem.options.rd_points.max(2);
            (0..n)
                .map(|i| {
                    let r = top * i as f64 / (n - 1) as f64;
                    (r, curve.distortion(r))
                })
                .collect()
        }
    };
    if let Some(path) = &ctx.args.csv {
        let mut table = Table::new(&["rate", "distortion"]);
        table.rows = points.iter().map(|&(r, d)| vec![Some(r), Some(d)]).collect();
        table.write_csv(path)?;
    }
    Ok(Emission::ok(json!({
        "form": curve.form(),
        "d_max": curve.d_max(),
        "d_min": curve.d_min(),
        "points": points,
    })))
}

fn rate_for_floor(curve: &RdCurve) -> f64 {
    match curve.form() {
        CurveForm::AnalyticLinear { c } => *c,
        CurveForm::AnalyticHammingBinary { p } => cumrate::ratedist::binary_entropy(*p),
        CurveForm::Sampled { points } => points[points.len() - 1].0,
    }
}

fn lossless(ctx: &Context) -> Result<Emission, CliError> {
    let (g, l) = ctx.functions()?;
    let source = ctx.problem.source()?;
    let direct = check_lossless(&g, &l, source)?;
    let effective = check_effective_lossless(&g, &l, source)?;
    ctx.write_csv(None)?;
    let achievable = direct.achievable;
    Ok(Emission::verdict(json!({ "verdict": direct, "effective_form": effective }), achievable))
}

fn lossy(ctx: &Context) -> Result<Emission, CliError> {
    let (g, l) = ctx.functions()?;
    let curve = ctx.problem.curve()?;
    let dbar = ctx.problem.dbar()?;
    let verdict: Verdict = check_lossy(&g, &l, &curve, dbar)?;
    let mut output = json!({ "verdict": verdict });
    if let CurveForm::AnalyticLinear { c } = curve.form() {
        output["linear_form"] = serde_json::to_value(check_linear_rd(&g, &l, *c, dbar)?)?;
    }
    if ctx.args.oracle {
        output["oracle"] = ctx.oracle(&g, &l, &curve)?;
    }
    ctx.write_csv(Some(&curve))?;
    Ok(Emission::verdict(output, verdict.achievable))
}

fn distortion(ctx: &Context) -> Result<Emission, CliError> {
    let (g, l) = ctx.functions()?;
    let curve = ctx.problem.curve()?;
    let mut output = json!({ "min_distortion": min_distortion(&g, &l, &curve)? });
    if ctx.args.oracle {
        output["oracle"] = ctx.oracle(&g, &l, &curve)?;
    }
    ctx.write_csv(Some(&curve))?;
    Ok(Emission::ok(output))
}

fn schedule(ctx: &Context) -> Result<Emission, CliError> {
    let (g, l) = ctx.functions()?;
    let curve = ctx.problem.curve()?;
    let plan = transmission_plan(&g, &l, &curve, ctx.k()?)?;
    ctx.write_csv(Some(&curve))?;
    Ok(Emission::ok(serde_json::to_value(plan)?))
}

fn oracle(ctx: &Context) -> Result<Emission, CliError> {
    let (g, l) = ctx.functions()?;
    let curve = ctx.problem.curve()?;
    let found = ctx.oracle(&g, &l, &curve)?;
    let formula = min_distortion(&g, &l, &curve)?;
    Ok(Emission::ok(json!({ "oracle": found, "min_distortion": formula })))
}

fn emit_figure(ctx: &Context, figure: Figure) -> Result<Emission, CliError> {
    let (g, l) = ctx.functions()?;
    let points = ctx.problem.options.csv_points;
    let table = match figure {
        Figure::Theorem2 => {
            let curve = ctx.curve_if_any()?;
            function_table(&g, &l, ctx.problem.mode()?, curve.as_ref(), points)?
        }
        Figure::Example1 => bound_table(&g, &l, 1.0, ctx.problem.dbar()?, points)?,
        Figure::Example2 => {
            let h = ctx.problem.source()?.entropy();
            bound_table(&g, &l, h, ctx.problem.dbar()?, points)?
        }
    };
    if let Some(path) = &ctx.args.csv {
        table.write_csv(path)?;
    }
    let name = figure.to_possible_value().expect("named figure").get_name().to_string();
    let mut output = table.to_json();
    output["figure"] = Value::String(name);
    Ok(Emission::ok(output))
}

/// `G_eff` against `min{alpha c + G_eff(1) - c + dbar, G_eff(1)}`.
fn bound_table(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    c: f64,
    dbar: f64,
    points: usize,
) -> Result<Table, CliError> {
    let g_eff = effective_crdf(g, l, Mode::Lossy)?;
    let total = g_eff.final_value();
    let corner = 1.0 - dbar / c;
    let extra: Vec<f64> = (0.0..=1.0).contains(&corner).then_some(corner).into_iter().collect();
    let mut table = Table::new(&["alpha", "G_eff", "upper_bound", "below"]);
    for a in alpha_grid(points, &[&g_eff], &extra) {
        let bound = (a * c + total - c + dbar).min(total);
        let v = g_eff.value(a);
        let below = if v <= bound + 1e-12 { 1.0 } else { 0.0 };
        table.rows.push(vec![Some(a), Some(v), Some(bound), Some(below)]);
    }
    Ok(table)
}
