use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lacon_core::coloring::{self, check_colfacts, optimal_order, treedepth, treewidth, Radius, ReachMode, Sampling, Strategy};
use lacon_core::lacon::{build_directed_lacon, check_lemma5_bounds, directed_to_undirected, directed_to_undirected_pruned, BuildOptions, Lacon};
use lacon_core::logic::determination::all_instances;
use lacon_core::logic::separation::r_separates_in;
use lacon_core::logic::types::type_of;
use lacon_core::logic::{check_determination, eval, interpret, parse_formula, separated_expression, BlockSpec, Formula};
use lacon_core::parity::{check_lemma8_bounds, lacon_to_parity};
use lacon_core::pipeline::{all_choices, apply_transduction, check_pipeline, theorem4_pipeline, ExpansionChoice};
use lacon_core::report::Report;
use lacon_core::shrub::{check_lemma7_bounds, lacon_to_shrub};
use lacon_core::{LabeledGraph, LinearOrder};
use lacon_tools::corpus::{graphs_up_to_iso, run_corpus, Caps, RunConfig, DEFAULT_SEED};
use lacon_tools::formats::{self, name_list};
use lacon_tools::render::{render_events, render_report, render_type, Format};

#[derive(Parser)]
#[command(name = "lacon", version, about = "Lacon, shrub and parity decompositions of first-order interpretations")]
struct Cli {
    /// Seed for sampled checks and the corpus runner.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report format: text or json-lines.
    #[arg(long, global = true, default_value = "text")]
    format: Format,
    /// Cap overrides, e.g. `graph-size=5,type-rank=2`.
    #[arg(long, global = true, default_value = "")]
    caps: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strong,
    Weak,
}

impl From<Mode> for ReachMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strong => ReachMode::Strong,
            Mode::Weak => ReachMode::Weak,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchStrategy {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lacon,
    Shrub,
    Parity,
}

#[derive(Args)]
struct GraphArg {
    /// Graph file.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluates a formula under an assignment such as `x=a,y=b`.
    Eval {
        #[command(flatten)]
        graph: GraphArg,
        /// Formula text, or `@path` to read it from a file.
        #[arg(long)]
        formula: String,
        #[arg(long, default_value = "")]
        assign: String,
    },
    /// Prints the graph defined by a binary formula.
    Interpret {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        formula: String,
    },
    /// Prints the rank-q type of a vertex tuple.
    Type {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value = "")]
        tuple: String,
        #[arg(long)]
        rank: u32,
    },
    /// Tests whether a separator set separates parts such as `a,b;c` within a radius.
    Separate {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value = "")]
        separator: String,
        #[arg(long)]
        parts: String,
        #[arg(long)]
        radius: usize,
    },
    /// Rewrites a formula into a separated expression.
    Rewrite {
        #[arg(long)]
        formula: String,
        /// Separator variables.
        #[arg(long, default_value = "")]
        xbar: String,
        /// Variable blocks separated by `;`, e.g. `y1;y2`.
        #[arg(long)]
        blocks: String,
        #[arg(long, default_value_t = 2)]
        rank_cap: usize,
    },
    /// Checks that block types determine the joint type on all small graphs.
    CheckDetermination {
        #[arg(long = "q")]
        joint: u32,
        #[arg(long = "Q")]
        block: u32,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 1)]
        separator_len: usize,
        #[arg(long, default_value_t = 2)]
        blocks: usize,
    },
    /// Coloring number of an ordered graph.
    Colnum {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        order: PathBuf,
        /// Radius, or `inf`.
        #[arg(long)]
        radius: String,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Searches for an order minimizing the coloring number.
    OrderSearch {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        radius: String,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, value_enum, default_value = "exhaustive")]
        strategy: SearchStrategy,
    },
    /// Treewidth by exhaustive elimination orders.
    Tw {
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Treedepth by exhaustive recursion.
    Td {
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Checks the reachability facts; exhaustive unless `--samples` is given.
    CheckColfacts {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        order: PathBuf,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Builds a directed lacon-decomposition of a binary formula.
    BuildLacon {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        order: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        type_rank: Option<u32>,
    },
    /// Converts a directed lacon to an undirected one.
    Lacon2undirected {
        #[arg(long = "in")]
        input: PathBuf,
        /// Drop hidden vertices that dominate no pair, before and during the conversion.
        #[arg(long)]
        prune: bool,
    },
    /// Converts an undirected lacon to a shrub-decomposition.
    Lacon2shrub {
        #[arg(long = "in")]
        input: PathBuf,
        /// Drop hidden vertices that dominate no pair first.
        #[arg(long)]
        prune: bool,
    },
    /// Converts an undirected lacon to a parity-decomposition.
    Lacon2parity {
        #[arg(long = "in")]
        input: PathBuf,
        /// Drop hidden vertices that dominate no pair first.
        #[arg(long)]
        prune: bool,
    },
    /// Prints the decoded graph.
    Decode {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Verifies a decomposition, optionally against a graph.
    Verify {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Checks the size bounds of a conversion of the given lacon, after
    /// dropping hidden vertices that dominate no pair.
    CheckBounds {
        #[arg(long, value_parser = ["5", "7", "8"])]
        lemma: String,
        #[arg(long = "in")]
        input: PathBuf,
        /// Largest radius checked.
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Runs a transduction through the decomposition pipeline. Shrub and
    /// parity output convert the lacon after dropping hidden vertices that
    /// dominate no pair.
    Pipeline {
        #[arg(long)]
        transduction: PathBuf,
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        order: PathBuf,
        #[arg(long)]
        choice: Option<PathBuf>,
        #[arg(long)]
        type_rank: Option<u32>,
        #[arg(long, value_enum, default_value = "lacon")]
        emit: Kind,
        /// Check every expansion choice instead of emitting one decomposition.
        #[arg(long)]
        enumerate: bool,
    },
    /// Runs the acceptance corpus.
    RunCorpus,
}

/// Failure kinds mapped to exit code 2.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

type Outcome = Result<bool, CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_file<T, E: std::fmt::Display>(path: &Path, parse: impl FnOnce(&str) -> Result<T, E>) -> Result<T, CliError> {
    let text = read(path)?;
    parse(&text).map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })
}

fn graph(path: &Path) -> Result<LabeledGraph, CliError> {
    parse_file(path, formats::parse_graph)
}

fn order(path: &Path) -> Result<LinearOrder, CliError> {
    parse_file(path, formats::parse_order)
}

fn lacon(path: &Path) -> Result<Lacon, CliError> {
    parse_file(path, formats::parse_lacon)
}

fn formula(arg: &str) -> Result<Formula, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => parse_file(Path::new(path), parse_formula),
        None => parse_formula(arg).map_err(|e| CliError::Parse { path: "formula".into(), message: e.to_string() }),
    }
}

fn radius(arg: &str) -> Result<Radius, CliError> {
    match arg {
        "inf" | "infinite" | "infinity" => Ok(Radius::Infinite),
        n => n.parse().map(Radius::Finite).map_err(|_| usage(format!("radius `{n}` is neither a number nor `inf`"))),
    }
}

fn vertices(g: &LabeledGraph, names: &str) -> Result<Vec<usize>, CliError> {
    name_list(names).iter().map(|n| g.require(n).map_err(usage)).collect()
}

fn print_report(report: &Report, format: Format) -> bool {
    print!("{}", render_report(report, format));
    report.passed()
}

fn print_scalar(format: Format, key: &str, value: serde_json::Value) {
    match format {
        Format::Text => match &value {
            serde_json::Value::String(s) => println!("{s}"),
            other => println!("{other}"),
        },
        Format::JsonLines => println!("{}", serde_json::json!({ key: value })),
    }
}

fn run(cli: Cli) -> Outcome {
    let format = cli.format;
    let caps = Caps::parse(&cli.caps).map_err(usage)?;
    match cli.command {
        Command::Eval { graph: g, formula: f, assign } => {
            let g = graph(&g.graph)?;
            let f = formula(&f)?;
            let mut pairs = Vec::new();
            for item in name_list(&assign) {
                let (var, v) = item.split_once('=').ok_or_else(|| usage(format!("assignment `{item}` is not var=vertex")))?;
                pairs.push((var.to_string(), g.require(v).map_err(usage)?));
            }
            let assignment: Vec<(&str, usize)> = pairs.iter().map(|(v, i)| (v.as_str(), *i)).collect();
            let value = eval(&g, &f, &assignment).map_err(usage)?;
            print_scalar(format, "value", value.into());
            Ok(true)
        }
        Command::Interpret { graph: g, formula: f } => {
            let out = interpret(&graph(&g.graph)?, &formula(&f)?).map_err(usage)?;
            print!("{}", formats::write_graph(&out));
            Ok(true)
        }
        Command::Type { graph: g, tuple, rank } => {
            let g = graph(&g.graph)?;
            let tuple = vertices(&g, &tuple)?;
            let t = type_of(&g, &tuple, rank, rank.max(caps.type_rank)).map_err(usage)?;
            print!("{}", render_type(&t));
            Ok(true)
        }
        Command::Separate { graph: g, separator, parts, radius } => {
            let g = graph(&g.graph)?;
            let sep = vertices(&g, &separator)?;
            let parts = parts.split(';').map(|p| vertices(&g, p)).collect::<Result<Vec<_>, _>>()?;
            print_scalar(format, "separates", r_separates_in(&g, &sep, &parts, radius).into());
            Ok(true)
        }
        Command::Rewrite { formula: f, xbar, blocks, rank_cap } => {
            let f = formula(&f)?;
            let spec = BlockSpec::new(name_list(&xbar), blocks.split(';').map(name_list).collect());
            let e = separated_expression(&f, &spec, rank_cap).map_err(usage)?;
            let violations = e.separation_violations();
            match format {
                Format::Text => {
                    println!("{}", e.to_formula());
                    for v in &violations {
                        eprintln!("separation violation: {v}");
                    }
                }
                Format::JsonLines => println!(
                    "{}",
                    serde_json::json!({ "expression": e.to_formula().to_string(), "conjuncts": e.conjunct_count(), "violations": violations })
                ),
            }
            Ok(violations.is_empty())
        }
        Command::CheckDetermination { joint, block, max_n, separator_len, blocks } => {
            let graphs: Vec<LabeledGraph> = (1..=max_n).flat_map(|n| graphs_up_to_iso(n, false)).collect();
            let instances = graphs
                .iter()
                .flat_map(|g| all_instances(g.vertex_count(), separator_len, blocks, 1).into_iter().map(move |i| (g, i)));
            let report = check_determination(joint, block, instances).map_err(usage)?;
            Ok(print_report(&report, format))
        }
        Command::Colnum { graph: g, order: o, radius: r, mode } => {
            let value = coloring::coloring_number(&graph(&g.graph)?, &order(&o)?, radius(&r)?, mode.into()).map_err(usage)?;
            print_scalar(format, "value", value.into());
            Ok(true)
        }
        Command::OrderSearch { graph: g, radius: r, mode, strategy } => {
            let strategy = match strategy {
                SearchStrategy::Exhaustive => Strategy::Exhaustive,
                SearchStrategy::Greedy => Strategy::Greedy,
            };
            let (o, value) = optimal_order(&graph(&g.graph)?, radius(&r)?, mode.into(), strategy, caps.exhaustive_order).map_err(usage)?;
            match format {
                Format::Text => {
                    print!("{}", formats::write_order(&o));
                    println!("# value {value}");
                }
                Format::JsonLines => println!("{}", serde_json::json!({ "order": o.sequence(), "value": value })),
            }
            Ok(true)
        }
        Command::Tw { graph: g } => {
            print_scalar(format, "treewidth", treewidth(&graph(&g.graph)?, caps.exhaustive_order).map_err(usage)?.into());
            Ok(true)
        }
        Command::Td { graph: g } => {
            print_scalar(format, "treedepth", treedepth(&graph(&g.graph)?, caps.exhaustive_order).map_err(usage)?.into());
            Ok(true)
        }
        Command::CheckColfacts { graph: g, order: o, radius, samples } => {
            let sampling = match samples {
                Some(samples) => Sampling::Random { samples, seed: cli.seed },
                None => Sampling::Exhaustive,
            };
            let report = check_colfacts(&graph(&g.graph)?, &order(&o)?, radius, sampling).map_err(usage)?;
            Ok(print_report(&report, format))
        }
        Command::BuildLacon { graph: g, order: o, formula: f, type_rank } => {
            let options = BuildOptions { rank: type_rank, ..BuildOptions::default() };
            let built = build_directed_lacon(&graph(&g.graph)?, &order(&o)?, &formula(&f)?, options).map_err(usage)?;
            if built.escalations > 0 {
                eprintln!("type rank escalated {} time(s) to {}", built.escalations, built.rank);
            }
            print!("{}", formats::write_lacon(&built.lacon));
            Ok(true)
        }
        Command::Lacon2undirected { input, prune } => {
            let d = lacon(&input)?;
            let converted = if prune { directed_to_undirected_pruned(&d.pruned()) } else { directed_to_undirected(&d) };
            print!("{}", formats::write_lacon(&converted.map_err(usage)?.lacon));
            Ok(true)
        }
        Command::Lacon2shrub { input, prune } => {
            let l = lacon(&input)?;
            let l = if prune { l.pruned() } else { l };
            print!("{}", formats::write_shrub(&lacon_to_shrub(&l).map_err(usage)?));
            Ok(true)
        }
        Command::Lacon2parity { input, prune } => {
            let l = lacon(&input)?;
            let l = if prune { l.pruned() } else { l };
            print!("{}", formats::write_parity(&lacon_to_parity(&l).map_err(usage)?.parity));
            Ok(true)
        }
        Command::Decode { kind, input } => {
            let decoded = match kind {
                Kind::Lacon => lacon(&input)?.decode().map_err(usage)?,
                Kind::Shrub => parse_file(&input, formats::parse_shrub)?.decode().map_err(usage)?,
                Kind::Parity => parse_file(&input, formats::parse_parity)?.decode().map_err(usage)?,
            };
            print!("{}", formats::write_graph(&decoded));
            Ok(true)
        }
        Command::Verify { kind, input, graph: g } => {
            let g = g.as_deref().map(graph).transpose()?;
            let report = match kind {
                Kind::Lacon => lacon(&input)?.verify(g.as_ref()),
                Kind::Shrub => parse_file(&input, formats::parse_shrub)?.verify(g.as_ref()),
                Kind::Parity => parse_file(&input, formats::parse_parity)?.verify(g.as_ref()),
            };
            Ok(print_report(&report, format))
        }
        Command::CheckBounds { lemma, input, radius } => {
            let l = lacon(&input)?.pruned();
            let report = match lemma.as_str() {
                "5" => check_lemma5_bounds(&l, &directed_to_undirected(&l).map_err(usage)?, radius.unwrap_or(4)),
                "7" => check_lemma7_bounds(&l, &lacon_to_shrub(&l).map_err(usage)?, radius.unwrap_or(2)),
                _ => check_lemma8_bounds(&l, &lacon_to_parity(&l).map_err(usage)?, radius.unwrap_or(4)),
            };
            Ok(print_report(&report, format))
        }
        Command::Pipeline { transduction, graph: g, order: o, choice, type_rank, emit, enumerate } => {
            let t = parse_file(&transduction, formats::parse_transduction)?;
            let g = graph(&g.graph)?;
            let o = order(&o)?;
            let options = BuildOptions { rank: type_rank, ..BuildOptions::default() };
            if enumerate {
                let mut report = Report::new();
                for (i, c) in all_choices(&g, t.params).map_err(usage)?.iter().enumerate() {
                    if apply_transduction(&t, &g, c).map_err(usage)?.is_none() {
                        continue;
                    }
                    let out = theorem4_pipeline(&t, &g, &o, c, options).map_err(usage)?;
                    for mut check in check_pipeline(&t, &g, &o, c, &out, 3).map_err(usage)?.checks {
                        check.name = format!("choice-{i}/{}", check.name);
                        report.push(check);
                    }
                }
                return Ok(print_report(&report, format));
            }
            let choice = match choice {
                Some(path) => parse_file(&path, |text| formats::parse_choice(text, t.params))?,
                None if t.params == 0 => ExpansionChoice::empty(0),
                None => return Err(usage("--choice is required for transductions with parameters")),
            };
            let out = theorem4_pipeline(&t, &g, &o, &choice, options).map_err(usage)?;
            match emit {
                Kind::Lacon => print!("{}", formats::write_lacon(out.lacon())),
                Kind::Shrub => print!("{}", formats::write_shrub(&lacon_to_shrub(&out.lacon().pruned()).map_err(usage)?)),
                Kind::Parity => {
                    print!("{}", formats::write_parity(&lacon_to_parity(&out.lacon().pruned()).map_err(usage)?.parity))
                }
            }
            Ok(true)
        }
        Command::RunCorpus => {
            let (report, events) = run_corpus(&RunConfig { seed: cli.seed, caps });
            print!("{}", render_events(&events, format));
            Ok(print_report(&report, format))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
