//! `tropgraph`: independence, rank, games, gadgets and divisors from JSON files.
//!
//! The result document goes to stdout. Exit status is 0 when a verdict was
//! reached, 2 when the answer is unresolved within the budget and 1 on input
//! errors.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use tropgraph::divisor::{divisor_of, in_riemann_roch};
use tropgraph::gadgets::{
    complete_instance, csp_feasibility, csp_to_generalized, matrix_gadget, CspVerdict, InfeasibilityEvidence,
};
use tropgraph::game::{brute_force_mean_payoff, decide_sign, verify_certificate, SignDecision, SignOptions};
use tropgraph::gen::{self, FunctionParams, GameParams};
use tropgraph::independence::{build_game, check_independence, troprank, IndependenceVerdict, RankBudget, RankValue};
use tropgraph::io::{self, BundleDoc, CspDoc, Family, GameDoc};
use tropgraph::rational::format_rational;

#[derive(Parser)]
#[command(name = "tropgraph", version, about = "Tropical independence and rank of functions on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Budget {
    /// Iteration cap for the game solver.
    #[arg(long, env = "TROPGRAPH_MAX_ITERS", default_value_t = 10_000)]
    max_iters: usize,
}

#[derive(Args)]
struct FamilyInput {
    /// A bundle `{graph, generators}`, or with --graph, one function file per argument.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Graph file; the positional files are then function documents.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide tropical independence of a family of functions.
    Indep {
        #[command(flatten)]
        input: FamilyInput,
        #[command(flatten)]
        budget: Budget,
        /// Include the game certificate.
        #[arg(long)]
        emit_cert: bool,
        /// Include witness points and the permutation check.
        #[arg(long)]
        emit_points: bool,
        /// Write the constructed game here, for `game verify`.
        #[arg(long)]
        emit_game: Option<PathBuf>,
        /// Write an SVG sketch of the function profiles.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Tropical rank of the semimodule generated by a family.
    Rank {
        #[command(flatten)]
        input: FamilyInput,
        #[command(flatten)]
        budget: Budget,
        /// Midpoint refinement levels for evaluation lower bounds.
        #[arg(long, default_value_t = 2)]
        levels: u32,
        /// Largest number of generator subfamilies decided by games.
        #[arg(long, default_value_t = 256)]
        max_subfamilies: usize,
    },
    /// Mean-payoff games.
    #[command(subcommand)]
    Game(GameCommand),
    /// Hardness gadgets.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Evaluate a function at points (`vertex` or `edge@offset`).
    Eval {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(required = true)]
        points: Vec<String>,
        /// Write an SVG sketch of the function profile.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Principal divisor of a total function.
    Divisor {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        function: PathBuf,
        /// Also check `div f + D ≥ 0` for this divisor file.
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// Random instances.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Subcommand)]
enum GameCommand {
    /// Decide the sign of every mean payoff.
    Solve {
        game: PathBuf,
        #[command(flatten)]
        budget: Budget,
    },
    /// Check a certificate against a game.
    Verify { game: PathBuf, certificate: PathBuf },
    /// Exact mean payoffs by enumerating positional strategies (small games only).
    Oracle { game: PathBuf },
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Functions whose independence encodes infeasibility of a constraint system.
    Csp {
        input: PathBuf,
        /// Also emit the connected completion.
        #[arg(long)]
        complete: bool,
        /// Also decide feasibility of the system.
        #[arg(long)]
        decide: bool,
        /// Write `instance.json` (and `completed.json`) here instead of inlining them.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Semimodule on a complete graph whose rank is the rank of a 0/1 matrix.
    Matrix {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Functions on a random graph.
    Family {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        vertices: usize,
        #[arg(long, default_value_t = 4)]
        edges: usize,
        /// `random`, `independent` or `dependent`.
        #[arg(long, default_value = "random")]
        kind: String,
    },
    /// A random stochastic game.
    Game {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        states: usize,
    },
    /// A random constraint system.
    Csp {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Plant a contradiction.
        #[arg(long)]
        infeasible: bool,
    },
}

/// Exit status and document of one invocation.
struct Outcome {
    code: u8,
    doc: Value,
    summary: String,
}

impl Outcome {
    fn verdict(doc: Value, summary: impl Into<String>) -> Self {
        Outcome { code: 0, doc, summary: summary.into() }
    }

    fn unresolved(doc: Value, summary: impl Into<String>) -> Self {
        Outcome { code: 2, doc, summary: summary.into() }
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(io::read_text(path)?)
}

fn parse_with<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, io::IoError>) -> Result<T> {
    f(&read(path)?).with_context(|| path.display().to_string())
}

fn load_family(input: &FamilyInput) -> Result<Family> {
    match &input.graph {
        Some(g) => {
            let graph = parse_with(g, io::parse_graph)?;
            let mut names = Vec::new();
            let mut functions = Vec::new();
            for (k, path) in input.files.iter().enumerate() {
                let text = read(path)?;
                let doc: io::FunctionDoc = serde_json::from_str(&text)
                    .map_err(io::IoError::from)
                    .with_context(|| path.display().to_string())?;
                functions.push(doc.build(&graph).with_context(|| path.display().to_string())?);
                names.push(if doc.name.is_empty() { format!("f{}", k + 1) } else { doc.name });
            }
            Ok(Family { graph, names, functions })
        }
        None => {
            let [path] = input.files.as_slice() else {
                bail!("pass one bundle file, or --graph with function files");
            };
            parse_with(path, |t| io::parse_bundle(t, path.parent()))
        }
    }
}

fn options(b: &Budget) -> SignOptions {
    SignOptions::with_max_iters(b.max_iters)
}

struct Emit<'a> {
    cert: bool,
    points: bool,
    game: Option<&'a Path>,
    plot: Option<&'a Path>,
}

fn indep(input: &FamilyInput, budget: &Budget, emit: &Emit) -> Result<Outcome> {
    let fam = load_family(input)?;
    if fam.functions.len() < 2 {
        bail!("need at least 2 functions, got {}", fam.functions.len());
    }
    if let Some(path) = emit.plot {
        write_file(path, &plot::profiles(&fam.graph, &fam.names, &fam.functions))?;
    }
    if let Some(path) = emit.game {
        let built = build_game(&fam.functions)?;
        write_file(path, &io::to_pretty(&GameDoc::from_game(&built.game)))?;
    }
    let v = check_independence(&fam.functions, &options(budget))?;
    let doc = io::independence_doc(&fam.graph, &fam.names, &v, emit.cert, emit.points);
    Ok(match &v {
        IndependenceVerdict::Unresolved { lo, hi, .. } => Outcome::unresolved(
            doc,
            format!("unresolved: mean payoffs in [{}, {}]", format_rational(lo), format_rational(hi)),
        ),
        _ => Outcome::verdict(doc, v.name()),
    })
}

fn rank(input: &FamilyInput, budget: &Budget, levels: u32, max_subfamilies: usize) -> Result<Outcome> {
    let fam = load_family(input)?;
    let module = tropgraph::Semimodule::new(fam.functions)?;
    let report = troprank(&module, &RankBudget { levels, max_iters: budget.max_iters, max_subfamilies })?;
    let doc = io::rank_doc(&report);
    Ok(match report.value {
        RankValue::Exact(k) => Outcome::verdict(doc, format!("rank {k}")),
        RankValue::Bounds { lo, hi } => Outcome::unresolved(doc, format!("rank between {lo} and {hi}")),
    })
}

fn game(cmd: &GameCommand) -> Result<Outcome> {
    match cmd {
        GameCommand::Solve { game, budget } => {
            let g = parse_with(game, io::parse_game)?;
            let d = decide_sign(&g, &options(budget));
            let doc = io::decision_doc(&d);
            Ok(match d {
                SignDecision::Unresolved { .. } => Outcome::unresolved(doc, "unresolved"),
                SignDecision::Positive(_) => Outcome::verdict(doc, "positive"),
                SignDecision::NonPositive(_) => Outcome::verdict(doc, "nonpositive"),
            })
        }
        GameCommand::Verify { game, certificate } => {
            let g = parse_with(game, io::parse_game)?;
            let cert = parse_with(certificate, io::parse_certificate)?;
            let ok = verify_certificate(&g, &cert)?;
            Ok(Outcome::verdict(
                json!({"valid": ok, "kind": cert.kind(), "proves_positive": ok && cert.proves_positive()}),
                if ok { "valid" } else { "invalid" },
            ))
        }
        GameCommand::Oracle { game } => {
            let g = parse_with(game, io::parse_game)?;
            let chi = brute_force_mean_payoff(&g)?;
            let values: serde_json::Map<String, Value> =
                g.states().iter().zip(&chi).map(|(s, x)| (s.clone(), json!(format_rational(x)))).collect();
            Ok(Outcome::verdict(json!({"mean_payoffs": values}), "mean payoffs computed"))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn gadget(cmd: &GadgetCommand) -> Result<Outcome> {
    match cmd {
        GadgetCommand::Csp { input, complete, decide, out, budget } => {
            let csp = parse_with(input, io::parse_csp)?;
            let gi = csp_to_generalized(&csp)?;
            let mut parts = vec![("instance", io::generalized_doc(&gi))];
            if *complete {
                parts.push(("completed", io::completed_doc(&complete_instance(&gi)?)));
            }
            let mut doc = json!({"M": gi.m, "functions": gi.names});
            emit_parts(&mut doc, parts, out.as_deref())?;
            let mut code = 0;
            if *decide {
                let (verdict, c) = match csp_feasibility(&csp, &options(budget))? {
                    CspVerdict::Feasible(c) => {
                        ("feasible", json!({"solution": c.iter().map(format_rational).collect::<Vec<_>>()}))
                    }
                    CspVerdict::Infeasible(InfeasibilityEvidence::Certificate(cert)) => {
                        ("infeasible", json!({"certificate": io::certificate_value(&cert)}))
                    }
                    CspVerdict::Infeasible(InfeasibilityEvidence::Partial(c)) => {
                        let v: Vec<Value> =
                            c.iter().map(|x| x.as_ref().map_or(Value::Null, |x| json!(format_rational(x)))).collect();
                        ("infeasible", json!({"partial_certificate": v}))
                    }
                    CspVerdict::Unresolved { lo, hi } => {
                        code = 2;
                        ("unresolved", json!({"lower": format_rational(&lo), "upper": format_rational(&hi)}))
                    }
                };
                let mut f = json!({"verdict": verdict});
                f.as_object_mut().unwrap().extend(c.as_object().unwrap().clone());
                doc["feasibility"] = f;
            }
            let summary = format!("{} functions, M = {}", gi.names.len(), gi.m);
            Ok(Outcome { code, doc, summary })
        }
        GadgetCommand::Matrix { input, out } => {
            let a = parse_with(input, io::parse_matrix)?;
            let m = matrix_gadget(&a)?;
            let mut doc = json!({"generators": m.semimodule.len()});
            emit_parts(&mut doc, vec![("instance", io::matrix_gadget_doc(&m))], out.as_deref())?;
            Ok(Outcome::verdict(doc, format!("{} generators on K_{}", m.semimodule.len(), a.len())))
        }
    }
}

fn emit_parts(doc: &mut Value, parts: Vec<(&str, Value)>, out: Option<&Path>) -> Result<()> {
    for (name, part) in parts {
        match out {
            Some(dir) => {
                std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
                let path = dir.join(format!("{name}.json"));
                write_file(&path, &io::to_pretty(&part))?;
                doc[name] = json!(path.display().to_string());
            }
            None => doc[name] = part,
        }
    }
    Ok(())
}

fn eval(graph: &Path, function: &Path, points: &[String], svg: Option<&Path>) -> Result<Outcome> {
    let g = parse_with(graph, io::parse_graph)?;
    let f = parse_with(function, |t| io::parse_function(t, &g))?;
    if let Some(path) = svg {
        write_file(path, &plot::profiles(&g, &["f".to_string()], std::slice::from_ref(&f)))?;
    }
    let mut values = serde_json::Map::new();
    for p in points {
        let x = g.parse_point(p).with_context(|| format!("point {p:?}"))?;
        values.insert(p.clone(), json!(f.evaluate(&x)?.to_string()));
    }
    Ok(Outcome::verdict(json!({"values": values}), format!("{} values", points.len())))
}

fn divisor(graph: &Path, function: &Path, check: Option<&Path>) -> Result<Outcome> {
    let g = parse_with(graph, io::parse_graph)?;
    let f = parse_with(function, |t| io::parse_function(t, &g))?;
    let d = divisor_of(&f)?;
    let mut doc = io::divisor_report(&g, &d);
    if let Some(path) = check {
        let e = parse_with(path, |t| io::parse_divisor(t, &g))?;
        doc["in_riemann_roch"] = json!(in_riemann_roch(&f, &e)?);
    }
    Ok(Outcome::verdict(doc, format!("degree {}", d.degree())))
}

fn generate(cmd: &GenCommand) -> Result<Outcome> {
    match cmd {
        GenCommand::Family { seed, n, vertices, edges, kind } => {
            let mut rng = gen::rng(*seed);
            let g = gen::random_graph(&mut rng, *vertices, *edges);
            let p = FunctionParams::default();
            let fs = match kind.as_str() {
                "random" => (0..*n).map(|_| gen::random_function(&mut rng, &g, &p, None)).collect(),
                "independent" => gen::independent_family(&mut rng, &g, *n, &p),
                "dependent" if *n >= 2 => gen::dependent_family(&mut rng, &g, *n, &p).0,
                "dependent" => bail!("a dependent family needs n ≥ 2"),
                other => bail!("unknown family kind {other:?}"),
            };
            let names: Vec<String> = (1..=fs.len()).map(|i| format!("f{i}")).collect();
            let doc = serde_json::to_value(BundleDoc::from_family(&g, &names, &fs))?;
            Ok(Outcome::verdict(doc, format!("{} functions", fs.len())))
        }
        GenCommand::Game { seed, states } => {
            let p = GameParams { max_states: *states, ..GameParams::default() };
            let g = gen::random_game(&mut gen::rng(*seed), &p);
            Ok(Outcome::verdict(serde_json::to_value(GameDoc::from_game(&g))?, format!("{} states", g.num_states())))
        }
        GenCommand::Csp { seed, n, infeasible } => {
            if *n < 3 {
                bail!("need n ≥ 3");
            }
            let mut rng = gen::rng(*seed);
            let csp =
                if *infeasible { gen::infeasible_csp(&mut rng, *n) } else { gen::feasible_csp(&mut rng, *n, 2).0 };
            Ok(Outcome::verdict(serde_json::to_value(CspDoc::from_csp(&csp))?, format!("{} variables", csp.n)))
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Indep { input, budget, emit_cert, emit_points, emit_game, plot } => {
            let emit =
                Emit { cert: *emit_cert, points: *emit_points, game: emit_game.as_deref(), plot: plot.as_deref() };
            indep(input, budget, &emit)
        }
        Command::Rank { input, budget, levels, max_subfamilies } => rank(input, budget, *levels, *max_subfamilies),
        Command::Game(cmd) => game(cmd),
        Command::Gadget(cmd) => gadget(cmd),
        Command::Eval { graph, function, points, plot } => eval(graph, function, points, plot.as_deref()),
        Command::Divisor { graph, function, check } => divisor(graph, function, check.as_deref()),
        Command::Gen(cmd) => generate(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", io::to_pretty(&out.doc));
            eprintln!("{}", out.summary);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
