use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kronecker_core::bounds::{bound_table, BoundReport};
use kronecker_core::euler::{
    chi_trivial_aka_closed_form, labeled_stable_tree_count, t_weight_sum_census,
    t_weight_sum_closed_form,
};
use kronecker_core::partitions::enumerate_partition_pairs;
use kronecker_core::splitting::{first_chain, refine_to_trivial, trace_to_json};
use kronecker_core::trees::{cayley_count, is_stable, tree_weight_v, visit_spanning_trees, CensusMode, LocalizationTree, TreeDocument};
use kronecker_core::verify::{self, Suite};
use kronecker_core::{Engine, Error, PartitionPair, SupportQuiver, WeightedPartition};

const DEFAULT_BUDGET: u128 = 10_000_000_000_000;

#[derive(Parser)]
#[command(name = "kronecker", version, about = "Euler characteristics of Kronecker moduli spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads for the tree census (default: all cores).
    #[arg(long, env = "KRONECKER_WORKERS", global = true)]
    workers: Option<usize>,
    /// Refuse censuses with more labeled spanning trees than this.
    #[arg(long, default_value_t = DEFAULT_BUDGET, global = true, value_parser = positive_budget)]
    budget: u128,
}

fn positive_budget(s: &str) -> Result<u128, String> {
    match s.parse::<u128>() {
        Ok(0) => Err("budget must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// χ of the Kronecker moduli space of dimension (a, b).
    Chi {
        a: u32,
        b: u32,
        /// Evaluate at this number of arrows.
        #[arg(long, conflicts_with = "symbolic")]
        at: Option<i64>,
        /// Print the polynomial in m (default).
        #[arg(long)]
        symbolic: bool,
    },
    /// χ of the split moduli space of one partition pair, e.g. `1*2 1*3`.
    ChiPair { source: WeightedPartition, sink: WeightedPartition },
    /// List the labeled spanning trees of the support quivers of (a, b).
    Enumerate {
        a: u32,
        b: u32,
        /// Restrict to one partition pair.
        #[arg(long, num_args = 2, value_names = ["SOURCE", "SINK"])]
        pair: Option<Vec<WeightedPartition>>,
        #[arg(long)]
        stable_only: bool,
    },
    /// Closed formulas for the pair (1·a, 1·(ka+1)), checked against the census.
    ClosedForm { a: u32, k: u32 },
    /// Upper bounds and asymptotic comparison functions.
    Bounds {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        amax: u32,
    },
    /// Split a stable tree (JSON file) down to the trivial partition.
    SplitDemo { tree_file: PathBuf },
    /// Run the self-check suites.
    Verify {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
    },
}

enum Failure {
    Lib(Error),
    Usage(String),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let engine = Engine::new().with_budget(cli.global.budget);
    match run(&cli.command, cli.global.format, &engine) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::BudgetExceeded { .. } => 3,
                Error::Internal(_) | Error::Json(_) => 1,
                _ => 2,
            })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Checks(out)) => {
            print!("{out}");
            ExitCode::from(1)
        }
    }
}

fn json_line(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("serializable"))
}

fn run(cmd: &Command, format: Format, engine: &Engine) -> Outcome {
    match cmd {
        Command::Chi { a, b, at, .. } => chi(engine, *a, *b, *at, format),
        Command::ChiPair { source, sink } => chi_pair(engine, PartitionPair::new(source.clone(), sink.clone()), format),
        Command::Enumerate { a, b, pair, stable_only } => enumerate(engine, *a, *b, pair.as_deref(), *stable_only, format),
        Command::ClosedForm { a, k } => closed_form(engine, *a, *k, format),
        Command::Bounds { m, amax } => bounds(engine, *m, *amax, format),
        Command::SplitDemo { tree_file } => split_demo(tree_file, format),
        Command::Verify { full, .. } => run_verify(engine, if *full { Suite::Full } else { Suite::Quick }, format),
    }
}

fn chi(engine: &Engine, a: u32, b: u32, at: Option<i64>, format: Format) -> Outcome {
    let r = engine.chi_kronecker(a, b)?;
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(m) = at {
        if m >= 3 && !kronecker_core::quiver::is_imaginary_schur_root(a as u64, b as u64, m as u64) {
            eprintln!("warning: ({a}, {b}) is not an imaginary Schur root for m = {m}");
        }
    }
    let value = at.map(|m| r.chi.eval_int(m));
    Ok(match format {
        Format::Text => match &value {
            Some(v) => format!("{v}\n"),
            None => format!("{}\n", r.chi),
        },
        Format::Json => {
            let mut doc = r.to_json(false);
            if let (Some(m), Some(v)) = (at, &value) {
                doc["m"] = json!(m);
                doc["value"] = json!(v.to_string());
            }
            json_line(&doc)
        }
        Format::Csv => {
            let mut out = String::from("pair,coefficient,chi_pair,contribution\n");
            for s in &r.summands {
                let _ = writeln!(
                    out,
                    "\"{}\",{},{},{}",
                    s.pair,
                    kronecker_core::algebra::rational_to_string(&s.coefficient),
                    s.chi_pair,
                    s.contribution()
                );
            }
            out
        }
    })
}

fn chi_pair(engine: &Engine, pair: PartitionPair, format: Format) -> Outcome {
    let r = engine.chi_partition_pair(&pair)?;
    Ok(match format {
        Format::Text => format!("{}\n", r.chi),
        Format::Json => json_line(&r.to_json(false)),
        Format::Csv => format!("pair,chi\n\"{}\",{}\n", pair, r.chi),
    })
}

fn enumerate(
    engine: &Engine,
    a: u32,
    b: u32,
    pair: Option<&[WeightedPartition]>,
    stable_only: bool,
    format: Format,
) -> Outcome {
    let pairs = match pair {
        Some([s, t]) => {
            let p = PartitionPair::new(s.clone(), t.clone());
            if p.source.total() != a as u64 || p.sink.total() != b as u64 {
                return Err(Failure::Usage(format!("{p} is not a partition pair of ({a}, {b})")));
            }
            vec![p]
        }
        Some(_) => return Err(Failure::Usage("--pair takes two partitions".into())),
        None => enumerate_partition_pairs(a, b)?,
    };
    let mode = if stable_only { CensusMode::Stable } else { CensusMode::All };
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("pair,edges,stable,weight\n");
    }
    for p in pairs {
        let q = SupportQuiver::from_pair(&p);
        engine.check_budget(q.sources().len(), q.sinks().len())?;
        let support = std::sync::Arc::new(q.clone());
        if format == Format::Text {
            let _ = writeln!(out, "# {p}");
        }
        visit_spanning_trees(&q, mode, |masks| {
            let t = LocalizationTree::from_neighbourhoods(support.clone(), masks.to_vec())
                .expect("census yields trees");
            let stable = stable_only || is_stable(&t);
            let weight = tree_weight_v(&t);
            let edges: Vec<String> = t
                .labeled_edges()
                .into_iter()
                .map(|(s, j)| format!("{s}-{j}"))
                .collect();
            let _ = match format {
                Format::Text => writeln!(out, "{} {} v={weight}", edges.join(" "), if stable { "stable" } else { "unstable" }),
                Format::Csv => writeln!(out, "\"{p}\",{},{stable},{weight}", edges.join(" ")),
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({"pair": p.to_string(), "tree": t.to_document(), "stable": stable, "weight": weight.to_string()})
                ),
            };
        });
    }
    Ok(out)
}

/// Largest census the closed-form command runs for its cross-check.
const CLOSED_FORM_CENSUS_LIMIT: u64 = 5_000_000;

fn closed_form(engine: &Engine, a: u32, k: u32, format: Format) -> Outcome {
    let count = labeled_stable_tree_count(a, k)?;
    let chi = chi_trivial_aka_closed_form(a, k)?;
    let t = t_weight_sum_closed_form(a, k)?;
    let b = k * a + 1;
    let estimate = cayley_count(a as u64, b as u64);
    let census = if estimate <= CLOSED_FORM_CENSUS_LIMIT.into() {
        let by_census = engine.chi_partition_pair(&PartitionPair::trivial(a, b))?.chi;
        let orbits = t_weight_sum_census(a, k)?;
        if by_census == chi && orbits == t {
            "OK".to_string()
        } else {
            format!("MISMATCH: census gives {by_census} and T = {orbits}")
        }
    } else {
        format!("skipped ({estimate} labeled trees)")
    };
    let t = kronecker_core::algebra::rational_to_string(&t);
    Ok(match format {
        Format::Text => format!("count: {count}\nchi: {chi}\nT: {t}\ncensus: {census}\n"),
        Format::Json => json_line(&json!({
            "a": a, "k": k, "count": count.to_string(), "chi": chi.to_string(), "T": t, "census": census,
        })),
        Format::Csv => format!("a,k,count,chi,T,census\n{a},{k},{count},{chi},{t},{census}\n"),
    })
}

fn bounds(engine: &Engine, m: u32, amax: u32, format: Format) -> Outcome {
    let rows = bound_table(engine, amax, m)?;
    Ok(match format {
        Format::Csv => {
            let mut out = format!("{}\n", BoundReport::CSV_HEADER);
            for r in &rows {
                let _ = writeln!(out, "{}", r.csv_row());
            }
            out
        }
        Format::Json => json_line(&Value::Array(rows.iter().map(BoundReport::to_json).collect())),
        Format::Text => {
            let mut out = format!(
                "{:>3} {:>3} {:>12} {:>18} {:>10} {:>8} {:>8} {:>8} {:>8}\n",
                "a", "b", "chi", "upper bound", "ratio", "f", "g", "h", "i"
            );
            for r in &rows {
                let s = &r.asymptotics;
                let _ = writeln!(
                    out,
                    "{:>3} {:>3} {:>12} {:>18} {:>10.3e} {:>8.4} {:>8.4} {:>8.4} {:>8}",
                    r.a,
                    r.b,
                    r.chi_value.to_string(),
                    r.upper_bound.to_string_radix(10, Some(8)),
                    r.ratio(),
                    s.f,
                    s.g,
                    s.h,
                    s.i_triv.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into()),
                );
            }
            out.push_str("f is the conjectured growth rate and is shown for comparison only\n");
            out
        }
    })
}

fn split_demo(path: &PathBuf, format: Format) -> Outcome {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let doc: TreeDocument = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let tree = LocalizationTree::from_document(doc)?;
    if !is_stable(&tree) {
        return Err(Failure::Usage("the input tree is not stable".into()));
    }
    let chain = first_chain(&tree)?;
    let refinement = refine_to_trivial(&tree)?;
    Ok(match format {
        Format::Json | Format::Csv => json_line(&json!({
            "input": tree.to_document(),
            "trace": trace_to_json(&chain),
            "targets": refinement.to_json(),
        })),
        Format::Text => {
            let mut out = format!("input:\n{}", tree.diagram());
            for (n, (mv, t)) in chain.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "\nstep {}: split {} (level {}) into {{{}}} and {{{}}}",
                    n + 1,
                    mv.vertex,
                    mv.level,
                    mv.first_part().join(", "),
                    mv.second_part().join(", ")
                );
                out.push_str(&t.diagram());
            }
            let _ = writeln!(out, "\n{} reachable trivial shapes:", refinement.targets.len());
            for target in &refinement.targets {
                let _ = writeln!(out, "\n{} chain(s):", target.chains);
                out.push_str(&target.tree.diagram());
            }
            out
        }
    })
}

fn run_verify(engine: &Engine, suite: Suite, format: Format) -> Outcome {
    let report = verify::run(suite, engine);
    let out = match format {
        Format::Json => json_line(&serde_json::to_value(&report).expect("serializable")),
        Format::Csv => {
            let mut out = String::from("check,passed,detail\n");
            for c in &report.checks {
                let _ = writeln!(out, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"));
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for c in &report.checks {
                let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let _ = writeln!(out, "{} passed, {} failed", report.passed, report.failed);
            out
        }
    };
    if report.all_passed() {
        Ok(out)
    } else {
        Err(Failure::Checks(out))
    }
}
