use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use equistat::io::{self, InstanceFile, Payload};
use equistat::report::{Outcome, Report, EXIT_INPUT_ERROR};
use equistat::{fixtures, oracle, suite};
use equistat_core::corr::{
    check_monotonicity, check_substitutes, classify, FiniteCorrespondence,
    MonotonicityProperty, SubstitutesNotion,
};
use equistat_core::flow::{
    sample_equilibrium_correspondence, solve_additive, solve_general, solve_latest_departure,
    verify_equilibrium, FlowOutcome, FlowProblem, GeneralOpts, GeneralOutcome,
};
use equistat_core::lattice::{
    check_inverse, equivalence_suite, invert, solution_sets, InverseProperty,
};
use equistat_core::markets::{
    check_stability_itu, check_stability_ntu, flow_to_matching, gale_shapley, hedonic_to_flow,
    itu_to_flow, meet_join_closure, ntu_payoffs, ntu_solve, tu_extreme_payoffs,
    tu_payoff_is_equilibrium, verify_hedonic, HedonicAllocation, ItuMarket, ProposingSide,
};
use equistat_core::point::{Point, PriceGrid};
use equistat_core::rat::Rat;
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::exit;
use std::str::FromStr;

/// Checkers and solvers for substitutes correspondences, equilibrium
/// network flow, and matching markets.
#[derive(Parser)]
#[command(name = "equistat", version, about)]
struct Cli {
    /// Emit the machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a property checker on a correspondence instance.
    Check(CheckArgs),
    /// Classify a correspondence in the substitutes taxonomy.
    Classify(InputArgs),
    /// Invert a correspondence (membership transpose).
    Invert(InvertArgs),
    /// Inverse-isotonicity reports and solution structure.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Equilibrium flow: solve, verify, or sample.
    #[command(subcommand)]
    Flow(FlowCmd),
    /// Matching markets.
    #[command(subcommand)]
    Match(MatchCmd),
    /// Hedonic pricing.
    #[command(subcommand)]
    Hedonic(HedonicCmd),
    /// Emit a catalog fixture.
    Fixtures(FixturesArgs),
    /// Run the acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    /// Property name, e.g. ugs, kelso_crawford, nonreversing,
    /// constant_aggregate_output, totally_isotone, domain.
    #[arg(long)]
    property: String,
    /// Weights for constant_aggregate_output, comma separated.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args)]
struct InvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Run the inverse-isotonicity equivalence suite on a correspondence.
    Equivalence(InputArgs),
    /// Classify sub/supersolutions against a target quantity.
    Solutions(SolutionsArgs),
    /// Equilibrium-payoff lattice report for a market instance.
    Report(InputArgs),
}

#[derive(Args)]
struct SolutionsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Target quantity, comma separated; defaults to the zero vector.
    #[arg(long)]
    target: Option<String>,
}

#[derive(Subcommand)]
enum FlowCmd {
    /// Solve the additive instance exactly, or iterate the general one.
    Solve(FlowSolveArgs),
    /// Verify an outcome file against the three equilibrium conditions.
    Verify(FlowVerifyArgs),
    /// Sample the truncated equilibrium correspondence on a price grid.
    Sample(FlowSampleArgs),
    /// Latest-departure fixed point toward a destination node.
    Latest(FlowLatestArgs),
}

#[derive(Args)]
struct FlowSolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Tolerance for the general solver.
    #[arg(long, default_value = "1e-9")]
    eps: String,
}

#[derive(Args)]
struct FlowVerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    outcome: PathBuf,
    #[arg(long, default_value = "0")]
    eps: String,
}

#[derive(Args)]
struct FlowSampleArgs {
    #[arg(long)]
    input: PathBuf,
    /// Integer flow cap per tight arc.
    #[arg(long, default_value_t = 1)]
    cap: u32,
    /// Price levels applied to every node, comma separated.
    #[arg(long, default_value = "0,1,2")]
    levels: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FlowLatestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    destination: String,
    #[arg(long, default_value = "0")]
    arrival: String,
}

#[derive(Subcommand)]
enum MatchCmd {
    /// Solve a matching market.
    Solve(MatchSolveArgs),
}

#[derive(Args)]
struct MatchSolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// tu | itu | ntu
    #[arg(long)]
    kind: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum HedonicCmd {
    /// Solve a hedonic market through the flow reduction.
    Solve(InputArgs),
}

#[derive(Args)]
struct FixturesArgs {
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// List the catalog names.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct SuiteArgs {
    /// Seed for the randomized property suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(code) => exit(code),
        Err(e) => {
            if json {
                eprintln!("{{\"error\": {:?}}}", format!("{e:#}"));
            } else {
                eprintln!("error: {e:#}");
            }
            exit(EXIT_INPUT_ERROR);
        }
    }
}

fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s).map_err(|e| anyhow!("invalid rational `{s}`: {e}"))
}

fn parse_rat_list(s: &str) -> Result<Vec<Rat>> {
    s.split(',').map(|part| parse_rat(part.trim())).collect()
}

fn load_correspondence(path: &PathBuf) -> Result<FiniteCorrespondence> {
    match io::load(path)?.payload {
        Payload::Correspondence(c) => Ok(c),
        other => bail!("expected a correspondence instance, found {}", other.kind()),
    }
}

fn load_network(path: &PathBuf) -> Result<FlowProblem> {
    match io::load(path)?.payload {
        Payload::Network(n) => Ok(n),
        other => bail!("expected a network instance, found {}", other.kind()),
    }
}

fn emit(report: &mut Report, json: bool) -> i32 {
    let code = report.finish();
    if json {
        println!("{}", report.render_json());
    } else {
        print!("{}", report.render_text());
    }
    code
}

fn verdict_item(report: &mut Report, v: &equistat_core::corr::Verdict) {
    let outcome = if v.holds { Outcome::Pass } else { Outcome::Fail };
    let detail = match &v.witness {
        Some(w) => format!("{}", w),
        None => "holds on this grid".to_string(),
    };
    report.push_data(
        v.property.clone(),
        outcome,
        detail,
        serde_json::to_value(v).unwrap(),
    );
}

fn run(cli: Cli) -> Result<i32> {
    let json = cli.json;
    match cli.command {
        Command::Check(args) => {
            let corr = load_correspondence(&args.input)?;
            let mut report = Report::new(format!("check {}", args.property));
            let verdict = match args.property.as_str() {
                "domain" => corr.validate_domain(),
                "ugs" => check_substitutes(&corr, SubstitutesNotion::Ugs)?,
                "ugs_strong_antecedent" => {
                    check_substitutes(&corr, SubstitutesNotion::UgsStrongAntecedent)?
                }
                "kelso_crawford" => {
                    check_substitutes(&corr, SubstitutesNotion::KelsoCrawford)?
                }
                "polterovich_spivak" => {
                    check_substitutes(&corr, SubstitutesNotion::PolterovichSpivak)?
                }
                "wgs_function" => check_substitutes(&corr, SubstitutesNotion::WgsFunction)?,
                "nonreversing" => {
                    check_monotonicity(&corr, &MonotonicityProperty::Nonreversing)?
                }
                "strongly_nonreversing" => {
                    check_monotonicity(&corr, &MonotonicityProperty::StronglyNonreversing)?
                }
                "p_correspondence" => {
                    check_monotonicity(&corr, &MonotonicityProperty::PCorrespondence)?
                }
                "constant_aggregate_output" => {
                    let weights = match &args.weights {
                        Some(w) => parse_rat_list(w)?,
                        None => vec![Rat::one(); corr.dim()],
                    };
                    check_monotonicity(
                        &corr,
                        &MonotonicityProperty::ConstantAggregateOutput(weights),
                    )?
                }
                "monotone_total_output" => {
                    check_monotonicity(&corr, &MonotonicityProperty::MonotoneTotalOutput)?
                }
                "aggregate_monotonicity" => {
                    check_monotonicity(&corr, &MonotonicityProperty::AggregateMonotonicity)?
                }
                "weighted_monotonicity" => {
                    check_monotonicity(&corr, &MonotonicityProperty::WeightedMonotonicity)?
                }
                "walras" => check_monotonicity(&corr, &MonotonicityProperty::Walras)?,
                "bgh3" => check_monotonicity(&corr, &MonotonicityProperty::Bgh3)?,
                "totally_isotone" => check_inverse(&corr, InverseProperty::TotallyIsotone)?,
                "sso_isotone" => check_inverse(&corr, InverseProperty::SsoIsotone)?,
                "sublattice_fibers" => {
                    check_inverse(&corr, InverseProperty::SublatticeFibers)?
                }
                "point_valued" => check_inverse(&corr, InverseProperty::PointValued)?,
                other => bail!("unknown property `{other}`"),
            };
            verdict_item(&mut report, &verdict);
            Ok(emit(&mut report, json))
        }
        Command::Classify(args) => {
            let corr = load_correspondence(&args.input)?;
            let taxonomy = classify(&corr)?;
            let mut report = Report::new("classify");
            report.push_data(
                "taxonomy",
                Outcome::Info,
                format!(
                    "{} (ugs={} nonreversing={} point_valued={} inverse_point_valued={})",
                    taxonomy.label,
                    taxonomy.ugs,
                    taxonomy.nonreversing,
                    taxonomy.point_valued,
                    taxonomy.inverse_point_valued
                ),
                serde_json::to_value(&taxonomy)?,
            );
            Ok(emit(&mut report, json))
        }
        Command::Invert(args) => {
            let corr = load_correspondence(&args.input)?;
            let (inv, closure) = invert(&corr);
            let mut report = Report::new("invert");
            report.push(
                "inverse_domain_sublattice",
                Outcome::Info,
                if closure.holds {
                    "inverse domain is a sublattice".to_string()
                } else {
                    format!("inverse domain is not a sublattice: {:?}", closure.witness)
                },
            );
            if let Some(path) = &args.output {
                io::save(
                    &InstanceFile::new(Payload::Correspondence(inv)),
                    path,
                )?;
                report.push("written", Outcome::Info, path.display().to_string());
            } else {
                report.push_data(
                    "inverse",
                    Outcome::Info,
                    format!("{} quantity points", inv.domain_len()),
                    serde_json::to_value(&inv)?,
                );
            }
            Ok(emit(&mut report, json))
        }
        Command::Lattice(cmd) => run_lattice(cmd, json),
        Command::Flow(cmd) => run_flow(cmd, json),
        Command::Match(cmd) => run_match(cmd, json),
        Command::Hedonic(cmd) => run_hedonic(cmd, json),
        Command::Fixtures(args) => {
            let mut report = Report::new("fixtures");
            if args.list || args.name.is_none() {
                for name in fixtures::CATALOG {
                    report.push("catalog", Outcome::Info, *name);
                }
                return Ok(emit(&mut report, json));
            }
            let name = args.name.unwrap();
            let file = fixtures::fixture(&name)?;
            match &args.output {
                Some(path) => {
                    io::save(&file, path)?;
                    report.push(name, Outcome::Info, format!("written to {}", path.display()));
                    Ok(emit(&mut report, json))
                }
                None => {
                    println!("{}", serde_json::to_string_pretty(&file)?);
                    Ok(0)
                }
            }
        }
        Command::Suite(args) => {
            let mut report = Report::new(format!("suite --seed {}", args.seed));
            for criterion in suite::run_acceptance(args.seed) {
                report.push(
                    format!("criterion {:02} {}", criterion.id, criterion.name),
                    if criterion.passed {
                        Outcome::Pass
                    } else {
                        Outcome::Fail
                    },
                    criterion.detail,
                );
            }
            Ok(emit(&mut report, json))
        }
    }
}

fn run_lattice(cmd: LatticeCmd, json: bool) -> Result<i32> {
    match cmd {
        LatticeCmd::Equivalence(args) => {
            let corr = load_correspondence(&args.input)?;
            let mut report = Report::new("lattice equivalence");
            match equivalence_suite(&corr) {
                Ok(rep) => {
                    report.push_data(
                        "equivalence",
                        Outcome::Pass,
                        format!(
                            "ugs={} nonreversing={} totally_isotone={} strongly_nonreversing={} consistent",
                            rep.ugs,
                            rep.nonreversing,
                            rep.totally_isotone_inverse,
                            rep.strongly_nonreversing
                        ),
                        serde_json::to_value(&rep)?,
                    );
                }
                Err(e) => report.push("equivalence", Outcome::Fail, format!("{e}")),
            }
            Ok(emit(&mut report, json))
        }
        LatticeCmd::Solutions(args) => {
            let corr = load_correspondence(&args.input)?;
            let target = match &args.target {
                Some(t) => Point::new(parse_rat_list(t)?),
                None => Point::zero(corr.dim()),
            };
            let (sets, structure) = solution_sets(&corr, &target)?;
            let mut report = Report::new("lattice solutions");
            report.push_data(
                "solution_sets",
                Outcome::Info,
                format!(
                    "{} subsolutions, {} supersolutions, {} solutions",
                    sets.subsolutions.len(),
                    sets.supersolutions.len(),
                    sets.solutions.len()
                ),
                serde_json::to_value(&sets)?,
            );
            for v in [
                structure.subsolutions_join_closed.as_ref(),
                structure.supersolutions_meet_closed.as_ref(),
                structure.max_subsolution_is_solution.as_ref(),
            ]
            .into_iter()
            .flatten()
            {
                verdict_item(&mut report, v);
            }
            Ok(emit(&mut report, json))
        }
        LatticeCmd::Report(args) => {
            let file = io::load(&args.input)?;
            let mut report = Report::new("lattice report");
            match file.payload {
                Payload::Itu(m) => tu_lattice_report(&m, &mut report)?,
                Payload::Ntu(m) => {
                    let outcomes = ntu_solve(&m)?;
                    let set: BTreeSet<Point> =
                        outcomes.iter().map(|o| Point::new(o.v.clone())).collect();
                    let closure = meet_join_closure(&set, |v| {
                        outcomes.iter().any(|o| Point::new(o.v.clone()) == *v)
                    });
                    report.push(
                        "stable_payoff_lattice",
                        if closure.holds { Outcome::Pass } else { Outcome::Fail },
                        format!(
                            "{} stable payoff vectors, {} pairs re-verified",
                            set.len(),
                            closure.pairs_checked
                        ),
                    );
                }
                other => bail!("lattice report expects itu or ntu, found {}", other.kind()),
            }
            Ok(emit(&mut report, json))
        }
    }
}

fn tu_lattice_report(m: &ItuMarket, report: &mut Report) -> Result<()> {
    let optimum = oracle::tu_assignment_optimum(m)
        .ok_or_else(|| anyhow!("lattice report needs a unit-count fully transferable market"))?;
    let extremes = tu_extreme_payoffs(m, &optimum)?
        .ok_or_else(|| anyhow!("payoff extremes need singles"))?;
    let nx = m.workers.len();
    // Lattice operations act on the network coordinates (u, -v).
    let to_network = |p: &Point| -> Point {
        Point::new(
            p.coords()[..nx]
                .iter()
                .cloned()
                .chain(p.coords()[nx..].iter().map(|t| -t))
                .collect(),
        )
    };
    let sample: BTreeSet<Point> = [to_network(&extremes.0), to_network(&extremes.1)].into();
    let closure = meet_join_closure(&sample, |point| {
        let u = &point.coords()[..nx];
        let v: Vec<Rat> = point.coords()[nx..].iter().map(|t| -t).collect();
        tu_payoff_is_equilibrium(m, u, &v, &optimum).unwrap_or(false)
    });
    report.push(
        "payoff_lattice",
        if closure.holds { Outcome::Pass } else { Outcome::Fail },
        format!(
            "assignment optimum {optimum}; {} extreme payoff pairs re-verified",
            closure.pairs_checked
        ),
    );
    Ok(())
}

fn run_flow(cmd: FlowCmd, json: bool) -> Result<i32> {
    match cmd {
        FlowCmd::Solve(args) => {
            let prob = load_network(&args.input)?;
            let mut report = Report::new("flow solve");
            let outcome = if prob.network.additive_costs().is_some() {
                Some(solve_additive(&prob).context("additive solve failed")?)
            } else {
                let eps: Rat = parse_rat(&args.eps)?;
                let opts = GeneralOpts {
                    eps: eps.to_f64(),
                    ..GeneralOpts::default()
                };
                match solve_general(&prob, &opts)? {
                    GeneralOutcome::Converged { outcome, iterations } => {
                        report.push(
                            "iterations",
                            Outcome::Info,
                            format!("converged in {iterations} iterations"),
                        );
                        Some(outcome)
                    }
                    GeneralOutcome::Exhausted { residual_trace, .. } => {
                        report.push(
                            "general_solver",
                            Outcome::Inconclusive,
                            format!(
                                "iteration budget exhausted; final residual {:.3e} (no nonexistence claim)",
                                residual_trace.last().copied().unwrap_or(f64::NAN)
                            ),
                        );
                        None
                    }
                }
            };
            if let Some(out) = outcome {
                let verdict = verify_equilibrium(&prob, &out, &parse_rat("0")?)?;
                report.push(
                    "equilibrium",
                    if verdict.holds { Outcome::Pass } else { Outcome::Fail },
                    format!("{} violations", verdict.violations.len()),
                );
                if let Some(path) = &args.output {
                    std::fs::write(path, serde_json::to_string_pretty(&out)?)?;
                    report.push("written", Outcome::Info, path.display().to_string());
                } else {
                    report.push_data(
                        "outcome",
                        Outcome::Info,
                        "flows and prices",
                        serde_json::to_value(&out)?,
                    );
                }
            }
            Ok(emit(&mut report, json))
        }
        FlowCmd::Verify(args) => {
            let prob = load_network(&args.input)?;
            let text = std::fs::read_to_string(&args.outcome)
                .with_context(|| format!("failed to read {}", args.outcome.display()))?;
            let out: FlowOutcome = serde_json::from_str(&text)?;
            let eps = parse_rat(&args.eps)?;
            let verdict = verify_equilibrium(&prob, &out, &eps)?;
            let mut report = Report::new("flow verify");
            report.push_data(
                "equilibrium",
                if verdict.holds { Outcome::Pass } else { Outcome::Fail },
                format!("{} violations at eps={eps}", verdict.violations.len()),
                serde_json::to_value(&verdict)?,
            );
            Ok(emit(&mut report, json))
        }
        FlowCmd::Sample(args) => {
            let prob = load_network(&args.input)?;
            let levels = parse_rat_list(&args.levels)?;
            let grid = PriceGrid::product(prob.network.num_nodes(), &levels);
            let sampled = sample_equilibrium_correspondence(&prob.network, &grid, args.cap)?;
            let mut report = Report::new("flow sample");
            report.push(
                "retained",
                Outcome::Info,
                format!(
                    "{} grid prices retained, {} filtered by the rent condition",
                    sampled.retained, sampled.filtered
                ),
            );
            let ugs = check_substitutes(&sampled.corr, SubstitutesNotion::Ugs)?;
            verdict_item(&mut report, &ugs);
            if let Some(path) = &args.output {
                io::save(
                    &InstanceFile::new(Payload::Correspondence(sampled.corr)),
                    path,
                )?;
                report.push("written", Outcome::Info, path.display().to_string());
            }
            Ok(emit(&mut report, json))
        }
        FlowCmd::Latest(args) => {
            let prob = load_network(&args.input)?;
            let dest = prob
                .network
                .node_index(&args.destination)
                .ok_or_else(|| anyhow!("unknown node `{}`", args.destination))?;
            let arrival = parse_rat(&args.arrival)?;
            let res = solve_latest_departure(&prob.network, dest, arrival)?;
            let mut report = Report::new("flow latest");
            for (z, price) in res.prices.iter().enumerate() {
                match price {
                    Some(p) => report.push(
                        prob.network.node_name(z),
                        Outcome::Info,
                        format!("latest departure {p}"),
                    ),
                    None => report.push(
                        prob.network.node_name(z),
                        Outcome::Info,
                        "destination unreachable",
                    ),
                }
            }
            Ok(emit(&mut report, json))
        }
    }
}

fn run_match(cmd: MatchCmd, json: bool) -> Result<i32> {
    let MatchCmd::Solve(args) = cmd;
    let file = io::load(&args.input)?;
    let mut report = Report::new(format!("match solve --kind {}", args.kind));
    match (args.kind.as_str(), file.payload) {
        ("tu" | "itu", Payload::Itu(m)) => {
            let (prob, node_map) = itu_to_flow(&m)?;
            let out = if prob.network.additive_costs().is_some() {
                let mut out = solve_additive(&prob)?;
                if let Some(zero) = node_map.reservation {
                    let shift = out.p[zero].clone();
                    out.p = out.p.iter().map(|v| v - &shift).collect();
                }
                out
            } else {
                let opts = GeneralOpts {
                    fixed_nodes: node_map.reservation.into_iter().collect(),
                    ..GeneralOpts::default()
                };
                match solve_general(&prob, &opts)? {
                    GeneralOutcome::Converged { outcome, .. } => outcome,
                    GeneralOutcome::Exhausted { residual_trace, .. } => {
                        report.push(
                            "general_solver",
                            Outcome::Inconclusive,
                            format!(
                                "budget exhausted at residual {:.3e}",
                                residual_trace.last().copied().unwrap_or(f64::NAN)
                            ),
                        );
                        return Ok(emit(&mut report, json));
                    }
                }
            };
            let matching = flow_to_matching(&m, &node_map, &out)?;
            let stability = check_stability_itu(&m, &matching)?;
            report.push(
                "stability",
                if stability.holds { Outcome::Pass } else { Outcome::Fail },
                format!("{stability}"),
            );
            if let Some(path) = &args.output {
                std::fs::write(path, serde_json::to_string_pretty(&matching)?)?;
                report.push("written", Outcome::Info, path.display().to_string());
            } else {
                report.push_data(
                    "matching",
                    Outcome::Info,
                    format!("{} matched pairs", matching.mu.len()),
                    serde_json::to_value(&matching)?,
                );
            }
        }
        ("ntu", Payload::Ntu(m)) => {
            let outcomes = ntu_solve(&m)?;
            report.push(
                "stable_outcomes",
                Outcome::Info,
                format!("{} stable matchings on the candidate grid", outcomes.len()),
            );
            let men = gale_shapley(&m, ProposingSide::Men)?;
            let (_, v_men) = ntu_payoffs(&m, &men)?;
            report.push(
                "men_proposing",
                if check_stability_ntu(&m, &men)?.holds {
                    Outcome::Pass
                } else {
                    Outcome::Fail
                },
                format!("deferred acceptance payoff v = {}", Point::new(v_men)),
            );
            report.push_data(
                "outcomes",
                Outcome::Info,
                "stable payoff vectors",
                serde_json::to_value(&outcomes)?,
            );
        }
        (kind, payload) => bail!(
            "kind `{kind}` does not match instance payload `{}`",
            payload.kind()
        ),
    }
    Ok(emit(&mut report, json))
}

fn run_hedonic(cmd: HedonicCmd, json: bool) -> Result<i32> {
    let HedonicCmd::Solve(args) = cmd;
    let file = io::load(&args.input)?;
    let Payload::Hedonic(m) = file.payload else {
        bail!("expected a hedonic instance");
    };
    let mut report = Report::new("hedonic solve");
    let (prob, node_map) = hedonic_to_flow(&m)?;
    let out = if prob.network.additive_costs().is_some() {
        let mut out = solve_additive(&prob)?;
        let shift = out.p[node_map.reservation()].clone();
        out.p = out.p.iter().map(|v| v - &shift).collect();
        out
    } else {
        let opts = GeneralOpts {
            fixed_nodes: vec![node_map.reservation()],
            ..GeneralOpts::default()
        };
        match solve_general(&prob, &opts)? {
            GeneralOutcome::Converged { outcome, .. } => outcome,
            GeneralOutcome::Exhausted { residual_trace, .. } => {
                report.push(
                    "general_solver",
                    Outcome::Inconclusive,
                    format!(
                        "budget exhausted at residual {:.3e}",
                        residual_trace.last().copied().unwrap_or(f64::NAN)
                    ),
                );
                return Ok(emit(&mut report, json));
            }
        }
    };
    let alloc = HedonicAllocation::from_flow(&m, &out);
    let pw: Vec<Rat> = (0..m.qualities.len())
        .map(|w| out.p[node_map.quality(w)].clone())
        .collect();
    let verdict = verify_hedonic(&m, &pw, &alloc, &parse_rat("1e-9")?)?;
    report.push_data(
        "hedonic_equilibrium",
        if verdict.holds { Outcome::Pass } else { Outcome::Fail },
        format!("{} violations", verdict.violations.len()),
        serde_json::to_value(&verdict)?,
    );
    report.push_data(
        "prices",
        Outcome::Info,
        format!(
            "quality prices: {}",
            pw.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
        ),
        serde_json::to_value(&alloc)?,
    );
    Ok(emit(&mut report, json))
}
