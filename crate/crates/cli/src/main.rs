use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kleincl::constructions::{
    baer_construction, from_disjoint_lines, greedy_partial_ovoid, greedy_partial_spread, holes_construction,
    is_maximal, linear_set_construction, pencil_union, projected_pg5_construction, random_scattered_spec,
    LinearSetSpec,
};
use kleincl::document::{Provenance, SetDocument};
use kleincl::engine::{default_image_mode, from_pg3, run_check, verify_all, CheckKind, VerificationReport};
use kleincl::linalg::ImageMode;
use kleincl::search::{exhaustive_search, pencil_decomposition, SearchConfig};
use kleincl::{Budget, Error, Field, KleinModel};

#[derive(Parser)]
#[command(name = "kleincl", version, about = "Cameron-Liebler sets of generators of the Klein quadric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a generator set and write it as a JSON document.
    Construct {
        kind: Construction,
        /// Order of the base field GF(q).
        #[arg(long)]
        q: u64,
        /// Extension degree for baer (2), projected (3) and linear-set.
        #[arg(long)]
        t: Option<u32>,
        /// Parameter for pencils, lines and spread-holes.
        #[arg(long)]
        x: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification checks on a document.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        check: CheckArg,
        /// Force exact rational elimination for the image check.
        #[arg(long, conflicts_with = "modular")]
        exact: bool,
        /// Force the two-prime modular image check.
        #[arg(long)]
        modular: bool,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Enumerate all sets of parameter x.
    Search {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        x: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Keep only the first N solutions.
        #[arg(long)]
        cap: Option<usize>,
        /// Disable class and disjointness pruning.
        #[arg(long)]
        unpruned: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a document into point-pencils.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Print cardinalities of PG(3, q^t) and its Klein quadric.
    Enumerate {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        t: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Pencils,
    Lines,
    SpreadHoles,
    Baer,
    Projected,
    LinearSet,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Disjoint,
    Intersections,
    Image,
    Property31,
    All,
}

/// Failure with its exit code: 1 check failed, 2 invalid input, 3 budget.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    /// Maps a library error, prefixing the flag or file it concerns.
    fn from(context: &str, e: Error) -> Failure {
        let code = if matches!(e, Error::Budget(_)) { 3 } else { 2 };
        Failure { code, message: format!("{context}: {e}") }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let budget = Budget::from_env().map_err(|e| Failure::from(kleincl::config::BUDGET_ENV, e))?;
    match cli.command {
        Command::Construct { kind, q, t, x, seed, out } => construct(&budget, kind, q, t, x, seed, &out),
        Command::Verify { input, check, exact, modular, csv } => verify(&budget, &input, check, exact, modular, csv),
        Command::Search { q, x, workers, cap, unpruned, out } => search(&budget, q, x, workers, cap, unpruned, &out),
        Command::Decompose { input } => decompose(&budget, &input),
        Command::Enumerate { q, t } => enumerate(&budget, q, t),
    }
}

fn model(budget: &Budget, q: u64, t: u32) -> Result<KleinModel, Failure> {
    let field = Field::tower(q, t).map_err(|e| Failure::from(&format!("--q {q} --t {t}"), e))?;
    KleinModel::new(Arc::new(field), budget).map_err(|e| Failure::from(&format!("--q {q} --t {t}"), e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load<'m>(
    budget: &Budget,
    path: &Path,
    slot: &'m mut Option<KleinModel>,
) -> Result<kleincl::engine::Candidate<'m>, Failure> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{name}: {e}")))?;
    let doc = SetDocument::parse(&text).map_err(|e| Failure::from(&name, e))?;
    let field = doc.field.build().map_err(|e| Failure::from(&name, e))?;
    let m = slot.insert(KleinModel::new(Arc::new(field), budget).map_err(|e| Failure::from(&name, e))?);
    doc.candidate(m).map_err(|e| Failure::from(&name, e))
}

fn construct(
    budget: &Budget,
    kind: Construction,
    q: u64,
    t: Option<u32>,
    x: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Outcome {
    let need_x = || x.ok_or_else(|| Failure::input("--x is required for this construction"));
    let fixed_t = |want: u32| match t {
        Some(t) if t != want => Err(Failure::input(format!("--t must be {want} for this construction"))),
        _ => Ok(want),
    };
    let t = match kind {
        Construction::Baer => fixed_t(2)?,
        Construction::Projected => fixed_t(3)?,
        Construction::LinearSet => t.unwrap_or(2),
        _ => fixed_t(1)?,
    };
    let m = model(budget, q, t)?;
    let pg = m.pg3();
    let mut params: BTreeMap<String, Value> = BTreeMap::new();
    let seed_value = seed.unwrap_or(0);
    let (name, candidate) = match kind {
        Construction::Pencils => {
            let vertices = greedy_partial_ovoid(&m, need_x()?, seed_value).map_err(|e| Failure::from("--x", e))?;
            params.insert("vertices".into(), json!(vertices));
            ("pencils", pencil_union(&m, &vertices).map_err(|e| Failure::from("--x", e))?)
        }
        Construction::Lines => {
            let x = need_x()?;
            let spread = greedy_partial_spread(pg, seed_value, Some(x));
            if spread.len() < x {
                return Err(Failure::input(format!(
                    "--x {x}: greedy partial spread with seed {seed_value} stopped at {} lines",
                    spread.len()
                )));
            }
            params.insert("lines".into(), json!(spread.lines));
            let sys = from_disjoint_lines(pg, &spread.lines).map_err(|e| Failure::from("--x", e))?;
            ("lines", from_pg3(&m, &sys))
        }
        Construction::SpreadHoles => {
            let stop = x.map(|x| (q * q + 1).checked_sub(x as u64).map(|s| s as usize));
            let stop = match stop {
                Some(None) => return Err(Failure::input(format!("--x must be at most {}", q * q + 1))),
                Some(Some(s)) => Some(s),
                None => None,
            };
            let mut spread = greedy_partial_spread(pg, seed_value, stop);
            if let Some(s) = stop {
                if spread.len() < s {
                    return Err(Failure::input(format!(
                        "--x: greedy spread stopped at {} lines, {s} needed",
                        spread.len()
                    )));
                }
            }
            is_maximal(pg, &mut spread);
            params.insert("spread".into(), json!(spread.lines));
            params.insert("maximality".into(), json!(spread.maximality));
            ("spread-holes", from_pg3(&m, &holes_construction(pg, &spread)))
        }
        Construction::Baer => ("baer", from_pg3(&m, &baer_construction(pg).map_err(|e| Failure::from("--q", e))?)),
        Construction::Projected => {
            let out = projected_pg5_construction(pg, seed_value, budget.max_trials)
                .map_err(|e| Failure::from("--seed", e))?;
            params.insert("trials".into(), json!(out.trials));
            params.insert("vertex".into(), json!(out.vertex));
            params.insert("solid".into(), json!(out.solid.rows()));
            ("projected", from_pg3(&m, &out.system))
        }
        Construction::LinearSet => {
            let spec = match (t, seed) {
                (2, None) => LinearSetSpec::standard(pg.field()),
                _ => {
                    random_scattered_spec(pg, seed_value, budget.max_trials).map_err(|e| Failure::from("--seed", e))?
                }
            };
            params.insert("basis".into(), json!(spec.basis));
            let sys = linear_set_construction(pg, &spec).map_err(|e| Failure::from("--t", e))?;
            ("linear-set", from_pg3(&m, &sys))
        }
    };
    if let Some(x) = x {
        params.insert("x".into(), json!(x));
    }
    let prov = Provenance { construction: name.into(), q, t, seed, parameters: params };
    let doc = SetDocument::from_candidate(&candidate, Some(prov));
    write(out, &doc.to_json())?;
    println!("{}", serde_json::to_string(&json!({ "out": out, "derived": doc.derived })).unwrap());
    Ok(0)
}

fn verify(budget: &Budget, input: &Path, check: CheckArg, exact: bool, modular: bool, csv: Option<PathBuf>) -> Outcome {
    let mut slot = None;
    let c = load(budget, input, &mut slot)?;
    let mode = if exact {
        ImageMode::Exact
    } else if modular {
        ImageMode::Modular
    } else {
        default_image_mode(c.model())
    };
    let image_err = |e| Failure::from(if exact { "--exact" } else { "--check image" }, e);
    let report = match check {
        CheckArg::All => verify_all(&c, mode).map_err(image_err)?,
        one => {
            let kind = match one {
                CheckArg::Disjoint => CheckKind::Disjointness,
                CheckArg::Intersections => CheckKind::Intersections,
                CheckArg::Image => CheckKind::Image,
                _ => CheckKind::Property31,
            };
            VerificationReport { checks: vec![run_check(&c, kind, mode).map_err(image_err)?] }
        }
    };
    println!("{}", report.to_json());
    if let Some(path) = csv {
        write(&path, &report.to_csv())?;
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn search(
    budget: &Budget,
    q: u64,
    x: usize,
    workers: usize,
    cap: Option<usize>,
    unpruned: bool,
    out: &Path,
) -> Outcome {
    let m = model(budget, q, 1)?;
    let mut cfg = SearchConfig::new(x);
    cfg.workers = workers;
    cfg.cap = cap;
    if unpruned {
        cfg = cfg.unpruned();
    }
    let result = exhaustive_search(&m, &cfg).map_err(|e| Failure::from(&format!("--q {q} --x {x}"), e))?;
    fs::create_dir_all(out).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
    for (i, c) in result.solutions.iter().enumerate() {
        let prov = Provenance {
            construction: "search".into(),
            q,
            t: 1,
            seed: None,
            parameters: BTreeMap::from([("x".to_string(), json!(x)), ("solution".to_string(), json!(i))]),
        };
        write(&out.join(format!("solution-{i:05}.json")), &SetDocument::from_candidate(c, Some(prov)).to_json())?;
    }
    let summary = json!({
        "q": q,
        "x": x,
        "count": result.solutions.len(),
        "stats": result.stats,
        "pruning": { "class": cfg.prune_class, "disjoint": cfg.prune_disjoint },
    });
    let text = serde_json::to_string_pretty(&summary).unwrap();
    write(&out.join("summary.json"), &(text.clone() + "\n"))?;
    println!("{text}");
    Ok(0)
}

fn decompose(budget: &Budget, input: &Path) -> Outcome {
    let mut slot = None;
    let c = load(budget, input, &mut slot)?;
    let m = c.model();
    let found = pencil_decomposition(&c);
    let vertices = found.clone().unwrap_or_default();
    let lines: Vec<usize> = vertices.iter().map(|&v| m.line_of_point(v)).collect();
    let report = json!({ "decomposable": found.is_some(), "vertices": vertices, "lines": lines });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(if found.is_some() { 0 } else { 1 })
}

fn enumerate(budget: &Budget, q: u64, t: u32) -> Outcome {
    let m = model(budget, q, t)?;
    let pg = m.pg3();
    let latin = (0..m.num_generators()).filter(|&g| m.class(g) == kleincl::GeneratorClass::Latin).count();
    let report = json!({
        "q": q,
        "t": t,
        "order": m.q(),
        "points": pg.num_points(),
        "lines": pg.num_lines(),
        "planes": pg.num_planes(),
        "quadric_points": m.num_points(),
        "generators": m.num_generators(),
        "latin": latin,
        "greek": m.num_generators() - latin,
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(0)
}
