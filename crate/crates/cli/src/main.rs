//! `homogamy` — transform contingency tables to new margins, decompose
//! changes in homogamy shares, run the pseudo-panel survey pipeline, compare
//! the two transforms by simulation, and regenerate the bundled reference
//! numbers.
//!
//! Exit codes: 0 success, 1 regeneration-check failure, 2 usage error,
//! 3 input error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use homogamy_core::bayes::{analyze_pair, pooled_histogram};
use homogamy_core::decompose::{
    decompose_change, granularity_sensitivity, Base, MergeStep, Method, Statistic,
};
use homogamy_core::io::{load_counts_csv, load_table_csv, write_table_csv};
use homogamy_core::ipf::{ipf_transform, IpfConfig};
use homogamy_core::nm::nm_transform;
use homogamy_core::repro::{self, ReproConfig};
use homogamy_core::survey::{
    decide_one_sided, method_verdict, one_sided_p, panel_estimates, select_panel, Alternative,
    EffectEstimate, EstimateCI, Gender, GenerationPair, VerdictInput, DEFAULT_ALPHA, DEFAULT_SCALE,
};
use homogamy_core::table::{Axis, ContingencyTable};

#[derive(Parser)]
#[command(name = "homogamy", version, about, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rescale a seed table to the margins of another table.
    Transform(TransformArgs),
    /// Split the change in homogamy share between two tables into
    /// preference, availability, and interaction components.
    Decompose(DecomposeArgs),
    /// Estimate population shares and generation/age/net effects from survey
    /// counts, test them, and report the supported method.
    Survey(SurveyArgs),
    /// Simulate net-generation-effect distributions under the null and the
    /// estimated alternative; report the Bayes factor and crossover error
    /// rate.
    Bayes(BayesArgs),
    /// Regenerate every bundled reference number and report pass/fail.
    Repro(ReproArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Ipf,
    Nm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Text,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaseArg {
    Early,
    Late,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairArg {
    Boomer,
    Genx,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenderArg {
    Male,
    Female,
}

#[derive(Args)]
struct TransformArgs {
    /// Transformation method.
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Seed table CSV (the association source).
    #[arg(long)]
    seed: PathBuf,
    /// Table CSV whose row and column totals become the targets.
    #[arg(long)]
    margins_from: PathBuf,
    /// Run exactly this many row+column iterations (IPF only).
    #[arg(long, conflicts_with = "tol")]
    iterations: Option<u32>,
    /// Convergence tolerance on the margin residual (IPF only).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    output: OutputArg,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Earlier observed table CSV.
    #[arg(long)]
    early: PathBuf,
    /// Later observed table CSV.
    #[arg(long)]
    late: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Reference period for the single-factor effects.
    #[arg(long, value_enum, default_value = "early")]
    base: BaseArg,
    /// Adjacent-category merge like "col:2+3" (1-based); repeatable. Reports
    /// the decomposition with merges applied before and after the transform.
    #[arg(long = "merge")]
    merges: Vec<String>,
    /// Iterations for the IPF counterfactuals.
    #[arg(long, conflicts_with = "tol")]
    iterations: Option<u32>,
    /// Convergence tolerance for the IPF counterfactuals.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    output: OutputArg,
}

#[derive(Args)]
struct SurveyArgs {
    /// Survey counts CSV (gender,generation,survey_year,n,x).
    #[arg(long)]
    counts: PathBuf,
    /// Correlation between a generation's share estimates across the two
    /// waves; affects standard errors only.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Two-sided confidence level parameter (0.4 gives 60% intervals).
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Net-generation scale applied to the age effect.
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: f64,
    /// One-sided significance level for the test decisions.
    #[arg(long, default_value_t = 0.2)]
    level: f64,
    #[arg(long, value_enum, default_value = "text")]
    output: OutputArg,
}

#[derive(Args)]
struct BayesArgs {
    /// Survey counts CSV (gender,generation,survey_year,n,x).
    #[arg(long)]
    counts: PathBuf,
    #[arg(long, value_enum)]
    pair: PairArg,
    #[arg(long, value_enum)]
    gender: GenderArg,
    /// Monte-Carlo replications per hypothesis.
    #[arg(long, default_value_t = repro::DEFAULT_REPLICATIONS)]
    reps: usize,
    /// Simulation seed (default may be overridden by HOMOGAMY_SEED).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: f64,
    /// Write the pooled histogram of both distributions to this CSV file.
    #[arg(long)]
    histogram: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    /// Run only checks whose name contains this substring (e.g. "ipf",
    /// "c5/", "nm").
    #[arg(long)]
    only: Option<String>,
    /// Monte-Carlo replications for the simulation checks.
    #[arg(long, default_value_t = repro::DEFAULT_REPLICATIONS)]
    reps: usize,
    /// Simulation seed (default may be overridden by HOMOGAMY_SEED).
    #[arg(long)]
    seed: Option<u64>,
}

/// Resolve the seed: flag beats environment beats default. Returns the seed
/// and a human-readable provenance for the report header.
fn resolve_seed(flag: Option<u64>) -> Result<(u64, &'static str)> {
    if let Some(seed) = flag {
        return Ok((seed, "--seed"));
    }
    if let Ok(raw) = std::env::var("HOMOGAMY_SEED") {
        let seed = raw
            .parse::<u64>()
            .map_err(|_| anyhow!("HOMOGAMY_SEED must be an unsigned integer, got {raw:?}"))?;
        return Ok((seed, "HOMOGAMY_SEED"));
    }
    Ok((repro::DEFAULT_SEED, "default"))
}

fn ipf_config(iterations: Option<u32>, tol: Option<f64>) -> IpfConfig {
    match (iterations, tol) {
        (Some(n), _) => IpfConfig::FixedIterations(n),
        (None, Some(tolerance)) => IpfConfig::Converge {
            tolerance,
            max_iterations: 10_000,
        },
        (None, None) => IpfConfig::default_converge(),
    }
}

fn method_for(arg: MethodArg, iterations: Option<u32>, tol: Option<f64>) -> Method {
    match arg {
        MethodArg::Ipf => Method::Ipf(ipf_config(iterations, tol)),
        MethodArg::Nm => Method::Nm,
    }
}

fn parse_merge(raw: &str) -> Result<MergeStep> {
    let (axis_raw, span) = raw
        .split_once(':')
        .ok_or_else(|| anyhow!("merge must look like col:2+3, got {raw:?}"))?;
    let axis = match axis_raw {
        "col" => Axis::Col,
        "row" => Axis::Row,
        other => bail!("merge axis must be row or col, got {other:?}"),
    };
    let (a, b) = span
        .split_once('+')
        .ok_or_else(|| anyhow!("merge must name two adjacent categories, got {raw:?}"))?;
    let a: usize = a.parse().context("merge index")?;
    let b: usize = b.parse().context("merge index")?;
    if a < 1 || b != a + 1 {
        bail!("merge categories must be adjacent and 1-based, got {raw:?}");
    }
    Ok(MergeStep { axis, index: a - 1 })
}

fn render_table(t: &ContingencyTable) -> String {
    let mut widths: Vec<usize> = t.col_labels().iter().map(|l| l.len().max(10)).collect();
    let mut cells: Vec<Vec<String>> = Vec::with_capacity(t.rows());
    for r in 0..t.rows() {
        let mut row = Vec::with_capacity(t.cols());
        for (c, width) in widths.iter_mut().enumerate() {
            let s = format!("{:.4}", t.get(r, c));
            *width = (*width).max(s.len());
            row.push(s);
        }
        cells.push(row);
    }
    let label_width = t
        .row_labels()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(1);
    let mut out = String::new();
    let _ = write!(out, "{:label_width$}", "");
    for (c, label) in t.col_labels().iter().enumerate() {
        let _ = write!(out, "  {label:>width$}", width = widths[c]);
    }
    out.push('\n');
    for (label, row) in t.row_labels().iter().zip(&cells) {
        let _ = write!(out, "{label:label_width$}");
        for (cell, width) in row.iter().zip(&widths) {
            let _ = write!(out, "  {cell:>width$}");
        }
        out.push('\n');
    }
    out
}

fn cmd_transform(args: TransformArgs) -> Result<()> {
    let seed = load_table_csv(&args.seed)?;
    let margin_table = load_table_csv(&args.margins_from)?;
    let target = margin_table.margins()?;

    match args.method {
        MethodArg::Ipf => {
            let cfg = ipf_config(args.iterations, args.tol);
            let report = ipf_transform(&seed, &target, &cfg)?;
            match args.output {
                OutputArg::Csv => print!("{}", write_table_csv(&report.result)?),
                OutputArg::Text => {
                    println!("method: ipf");
                    println!("iterations: {}", report.iterations_used);
                    println!("max margin residual: {:e}", report.max_margin_residual);
                    print!("{}", render_table(&report.result));
                }
            }
        }
        MethodArg::Nm => {
            if args.iterations.is_some() || args.tol.is_some() {
                bail!("--iterations/--tol apply to the ipf method only");
            }
            let report = nm_transform(&seed, &target)?;
            match args.output {
                OutputArg::Csv => print!("{}", write_table_csv(&report.result)?),
                OutputArg::Text => {
                    println!("method: nm");
                    let drift = report
                        .preserved_ll
                        .max_abs_diff(&report.achieved_ll)
                        .unwrap_or(f64::NAN);
                    println!("association drift: {drift:e}");
                    print!("{}", render_table(&report.result));
                }
            }
        }
    }
    Ok(())
}

fn cmd_decompose(args: DecomposeArgs) -> Result<()> {
    let early = load_table_csv(&args.early)?;
    let late = load_table_csv(&args.late)?;
    let method = method_for(args.method, args.iterations, args.tol);
    let base = match args.base {
        BaseArg::Early => Base::Early,
        BaseArg::Late => Base::Late,
    };
    let merge_plan: Vec<MergeStep> = args
        .merges
        .iter()
        .map(|raw| parse_merge(raw))
        .collect::<Result<_>>()?;

    let rows: Vec<(&str, homogamy_core::decompose::DecompositionResult)> = if merge_plan.is_empty()
    {
        vec![(
            "plain",
            decompose_change(&early, &late, &method, Statistic::HomogamyShare, base)?,
        )]
    } else {
        let (before, after) = granularity_sensitivity(
            &early,
            &late,
            &method,
            Statistic::HomogamyShare,
            base,
            &merge_plan,
        )?;
        vec![
            ("merge_before_transform", before),
            ("merge_after_transform", after),
        ]
    };

    match args.output {
        OutputArg::Csv => {
            println!(
                "variant,method,statistic,total,preference_effect,availability_effect,interaction"
            );
            for (variant, r) in &rows {
                println!(
                    "{variant},{},{},{},{},{},{}",
                    r.method,
                    r.statistic,
                    r.total,
                    r.preference_effect,
                    r.availability_effect,
                    r.interaction
                );
            }
        }
        OutputArg::Text => {
            for (variant, r) in &rows {
                println!("{variant} ({}, {}):", r.method, r.statistic);
                println!("  total change:        {:+8.4} pp", 100.0 * r.total);
                println!(
                    "  preference effect:   {:+8.4} pp",
                    100.0 * r.preference_effect
                );
                println!(
                    "  availability effect: {:+8.4} pp",
                    100.0 * r.availability_effect
                );
                println!("  interaction:         {:+8.4} pp", 100.0 * r.interaction);
            }
        }
    }
    Ok(())
}

fn pct(v: f64) -> f64 {
    100.0 * v
}

fn ci_text(e: &EstimateCI) -> String {
    format!(
        "{:5.1} [{:5.1}; {:5.1}]",
        pct(e.point),
        pct(e.ci_low),
        pct(e.ci_high)
    )
}

fn effect_text(e: &EffectEstimate) -> String {
    format!(
        "{:+6.1} [{:+6.1}; {:+6.1}]",
        pct(e.point),
        pct(e.ci_low),
        pct(e.ci_high)
    )
}

fn cmd_survey(args: SurveyArgs) -> Result<()> {
    let counts = load_counts_csv(&args.counts)?;
    let mut decisions = Vec::new();
    let mut csv_rows: Vec<String> = Vec::new();
    let mut text = String::new();

    for (gender, gender_name) in [(Gender::Male, "male"), (Gender::Female, "female")] {
        for (pair, pair_name) in [
            (GenerationPair::Boomer, "boomer"),
            (GenerationPair::GenX, "genx"),
        ] {
            let groups = select_panel(&counts, gender, pair)?;
            let est = panel_estimates(&groups, args.alpha, args.rho, args.scale)?;
            let p_neg = one_sided_p(&est.nge, Alternative::Negative)?;
            let p_pos = one_sided_p(&est.nge, Alternative::Positive)?;
            let decision = decide_one_sided(&est.nge, args.level)?;
            decisions.push(decision);

            let _ = writeln!(text, "{gender_name} {pair_name}:");
            for (label, group, e) in [
                ("late  @t ", &groups.late, &est.late),
                ("early @t ", &groups.early, &est.early),
                ("pooled@t ", &groups.pooled_t, &est.pooled_t),
                ("pooled@t+", &groups.pooled_t_plus, &est.pooled_t_plus),
            ] {
                let _ = writeln!(
                    text,
                    "  {label} n={:4} x={:3}  share {:5.1}%  PS {}",
                    group.n,
                    group.x,
                    100.0 * group.sample_share(),
                    ci_text(e),
                );
            }
            let _ = writeln!(text, "  GE  {}", effect_text(&est.ge));
            let _ = writeln!(
                text,
                "  AE  {}   (rho = {})",
                effect_text(&est.ae),
                args.rho
            );
            let _ = writeln!(text, "  NGE {}", effect_text(&est.nge));
            let _ = writeln!(
                text,
                "  p one-sided: negative {:4.1}%, positive {:4.1}%  ->  {} at the {:.0}% level",
                100.0 * p_neg,
                100.0 * p_pos,
                decision,
                100.0 * args.level,
            );

            for (quantity, e) in [
                ("ps_late", &est.late),
                ("ps_early", &est.early),
                ("ps_pooled_t", &est.pooled_t),
                ("ps_pooled_t_plus", &est.pooled_t_plus),
            ] {
                csv_rows.push(format!(
                    "{gender_name},{pair_name},{quantity},{},{},{},{},,",
                    e.point, e.sigma, e.ci_low, e.ci_high
                ));
            }
            for (quantity, e) in [("ge", &est.ge), ("ae", &est.ae), ("nge", &est.nge)] {
                let (pn, pp) = if quantity == "nge" {
                    (p_neg.to_string(), p_pos.to_string())
                } else {
                    (String::new(), String::new())
                };
                csv_rows.push(format!(
                    "{gender_name},{pair_name},{quantity},{},{},{},{},{pn},{pp}",
                    e.point, e.sigma, e.ci_low, e.ci_high
                ));
            }
        }
    }

    // decisions arrive in (male boomer, male genx, female boomer, female
    // genx) order
    let verdict = method_verdict(&VerdictInput {
        male_boomer: decisions[0],
        female_boomer: decisions[2],
        male_genx: decisions[1],
        female_genx: decisions[3],
    });

    match args.output {
        OutputArg::Csv => {
            println!("gender,pair,quantity,point,sigma,ci_low,ci_high,p_negative,p_positive");
            for row in csv_rows {
                println!("{row}");
            }
            println!("verdict,,method_supported,{verdict},,,,,");
        }
        OutputArg::Text => {
            println!(
                "survey report (alpha = {}, rho = {}, scale = {}, level = {})",
                args.alpha, args.rho, args.scale, args.level
            );
            print!("{text}");
            println!("supported method: {verdict}");
        }
    }
    Ok(())
}

fn cmd_bayes(args: BayesArgs) -> Result<()> {
    let counts = load_counts_csv(&args.counts)?;
    let (seed, seed_source) = resolve_seed(args.seed)?;
    let gender = match args.gender {
        GenderArg::Male => Gender::Male,
        GenderArg::Female => Gender::Female,
    };
    let pair = match args.pair {
        PairArg::Boomer => GenerationPair::Boomer,
        PairArg::Genx => GenerationPair::GenX,
    };
    let groups = select_panel(&counts, gender, pair)?;
    let analysis = analyze_pair(&groups, args.alpha, args.scale, args.reps, seed)?;

    println!(
        "bayes report ({} {}, reps = {}, seed = {} [{seed_source}])",
        match gender {
            Gender::Male => "male",
            Gender::Female => "female",
        },
        match pair {
            GenerationPair::Boomer => "boomer",
            GenerationPair::GenX => "genx",
        },
        args.reps,
        seed,
    );
    println!(
        "observed NGE: {:+.2} pp (tested direction: {})",
        analysis.observed_nge_pp,
        match analysis.direction {
            Alternative::Negative => "negative",
            Alternative::Positive => "positive",
        }
    );
    println!(
        "H0 distribution: mean {:+.3} pp, sd {:.3} pp",
        analysis.h0.mean(),
        analysis.h0.std()
    );
    println!(
        "H1 distribution: mean {:+.3} pp, sd {:.3} pp",
        analysis.h1.mean(),
        analysis.h1.std()
    );
    if analysis.h0.is_degenerate() || analysis.h1.is_degenerate() {
        println!("warning: degenerate simulated distribution (too few replications)");
    }
    println!("Bayes factor K = {:.4}", analysis.report.k);
    println!("crossover error rate = {:.4}", analysis.report.cer);
    println!("verdict: {}", analysis.report.verdict);

    if let Some(path) = args.histogram {
        let mut out = String::from("bin_left,bin_right,h0_density,h1_density\n");
        for (left, right, d0, d1) in pooled_histogram(&analysis.h0, &analysis.h1) {
            let _ = writeln!(out, "{left},{right},{d0},{d1}");
        }
        std::fs::write(&path, out)
            .with_context(|| format!("writing histogram to {}", path.display()))?;
        println!("histogram written to {}", path.display());
    }
    Ok(())
}

fn cmd_repro(args: ReproArgs) -> Result<ExitCode> {
    let (seed, seed_source) = resolve_seed(args.seed)?;
    let cfg = ReproConfig {
        replications: args.reps,
        seed,
        filter: args.only.clone(),
    };
    println!(
        "regenerating reference values (reps = {}, seed = {} [{seed_source}]{})",
        cfg.replications,
        cfg.seed,
        cfg.filter
            .as_deref()
            .map(|f| format!(", filter = {f:?}"))
            .unwrap_or_default(),
    );
    let results = repro::run(&cfg);
    if results.is_empty() {
        bail!("no checks match the filter");
    }
    let mut failed = 0usize;
    for check in &results {
        println!(
            "{} {}  expected {} | got {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.expected,
            check.actual
        );
        if let Some(note) = &check.note {
            println!("     note: {note}");
        }
        if !check.passed {
            failed += 1;
        }
    }
    println!(
        "{} checks, {} passed, {} failed",
        results.len(),
        results.len() - failed,
        failed
    );
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes instead of panicking on
    // EPIPE
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Transform(args) => cmd_transform(args).map(|()| ExitCode::SUCCESS),
        Command::Decompose(args) => cmd_decompose(args).map(|()| ExitCode::SUCCESS),
        Command::Survey(args) => cmd_survey(args).map(|()| ExitCode::SUCCESS),
        Command::Bayes(args) => cmd_bayes(args).map(|()| ExitCode::SUCCESS),
        Command::Repro(args) => cmd_repro(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}
