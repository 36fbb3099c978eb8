//! mcbell command-line front end. Every subcommand is a thin adapter over the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use mcbell::bell::{iterate, restrict, to_probability_form, BellFunction};
use mcbell::catalog::{self, load_catalog};
use mcbell::error::Error;
use mcbell::lhv;
use mcbell::quantum::{critical_visibility, optimize_phases, optimize_with_bound, OptimizeOptions};
use mcbell::rational::{self, Rational};
use mcbell::repro::{self, ReproOptions};
use mcbell::search::{run_search, verify_candidate, SearchConfig, SearchResult};
use mcbell::symmetry::orbit::{canonical_with_witness, equivalent, orbit, Equivalence};
use mcbell::symmetry::{invariant_certificate, orbit::DEFAULT_BUDGET};

#[derive(Parser)]
#[command(name = "mcbell", version, about = "Multi-component (n,2,d) Bell functions")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Human-readable table instead of JSON.
    #[arg(long, global = true, conflicts_with = "json")]
    table: bool,
    /// JSON output (default).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

/// A Bell function given by catalog id or JSON file.
#[derive(Args, Clone)]
struct Input {
    /// Catalog id.
    #[arg(long, conflicts_with = "file")]
    id: Option<String>,
    /// Bell-function JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Optim {
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Optim {
    fn options(&self) -> OptimizeOptions {
        OptimizeOptions { restarts: self.restarts, tol: self.tol, seed: self.seed, ..OptimizeOptions::default() }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build I_n from two (n−1)-party functions by the iteration formula.
    ConstructIterate {
        /// I^{0,0}: catalog id or JSON file.
        #[arg(long)]
        f00: String,
        /// I^{0,1}: catalog id or JSON file.
        #[arg(long)]
        f01: String,
    },
    /// I^{k0,k1}: fix the last party's outcome labels.
    Restrict {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k0: usize,
        #[arg(long)]
        k1: usize,
    },
    /// Coincidence-probability form.
    ProbForm {
        #[command(flatten)]
        input: Input,
    },
    /// Exact LHV bound by deterministic-strategy enumeration.
    Lhv {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = lhv::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Set of deterministic values.
    Spectrum {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = lhv::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Maximal GHZ value over beam-splitter phases.
    QuantumMax {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        optim: Optim,
    },
    /// Critical visibility against white noise.
    Visibility {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        optim: Optim,
        #[arg(long, default_value_t = lhv::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Orbit under party permutations, setting swaps and outcome shifts.
    Orbit {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u128,
        /// Include every element with its transformation.
        #[arg(long)]
        elements: bool,
    },
    /// Canonical representative with a witness transformation.
    Canon {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Decide whether two functions are related by the symmetry group.
    Equiv {
        #[command(flatten)]
        input: Input,
        /// Second function: catalog id or JSON file.
        #[arg(long)]
        other: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Group-invariant certificate (multiset of rotation classes).
    Certificate {
        #[command(flatten)]
        input: Input,
    },
    /// Embedded catalog of printed functions.
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Projector identity on random orthonormal bases.
    VerifyAppendixA {
        /// Dimensions to check.
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        d: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep I^{0,1} over an orbit and report the minimal-vc iterates.
    Search {
        #[arg(long)]
        seed00: String,
        #[arg(long)]
        orbit: String,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 64)]
        refine_restarts: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        tie_tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Orbit size limit.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u128,
    },
    /// Check a candidate's spectrum exactly and its vc within a tolerance.
    VerifyCandidate {
        #[command(flatten)]
        input: Input,
        /// Expected deterministic values, e.g. "-3/2,-1/4,1".
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        spectrum: Vec<String>,
        #[arg(long)]
        vc: f64,
        #[arg(long, default_value_t = 1e-4)]
        vc_tol: f64,
        #[command(flatten)]
        optim: Optim,
        #[arg(long, default_value_t = lhv::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Repro {
        /// Criteria to run, e.g. "1,4,9" (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        /// All four cells of the I_4_3_1 row of the five-party search grid.
        #[arg(long)]
        full_row: bool,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Ids with (n, d) and source.
    List,
    /// One entry with its function.
    Show {
        #[arg(long)]
        id: String,
    },
    /// Recipes, iterate/restrict links, printed forms and the suspect list.
    Verify {
        /// Also check exact bounds for entries with n ≤ this value.
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = lhv::DEFAULT_BUDGET)]
        budget: u128,
    },
}

enum Failure {
    Usage(String),
    Verification(Value),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownId(_) | Error::Parse(_) | Error::Invalid(_) | Error::BudgetExceeded { .. } | Error::NotPrime(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Out = Result<Value, Failure>;

fn load_source(s: &str) -> Result<BellFunction, Failure> {
    let path = PathBuf::from(s);
    if path.is_file() {
        return load_file(&path);
    }
    Ok(load_catalog().function(s)?.clone())
}

fn load_file(path: &PathBuf) -> Result<BellFunction, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

impl Input {
    fn load(&self) -> Result<BellFunction, Failure> {
        match (&self.id, &self.file) {
            (Some(id), None) => Ok(load_catalog().function(id)?.clone()),
            (None, Some(p)) => load_file(p),
            _ => Err(Failure::Usage("give exactly one of --id or --file".into())),
        }
    }
}

fn rational_json(x: &Rational) -> Value {
    json!({ "rational": rational::to_string(x), "decimal": rational::to_f64(x) })
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn verdict(ok: bool, v: Value) -> Out {
    if ok {
        Ok(v)
    } else {
        Err(Failure::Verification(v))
    }
}

fn run(cmd: Cmd, table: &mut Option<String>) -> Out {
    match cmd {
        Cmd::ConstructIterate { f00, f01 } => Ok(to_value(&iterate(&load_source(&f00)?, &load_source(&f01)?)?)),
        Cmd::Restrict { input, k0, k1 } => Ok(to_value(&restrict(&input.load()?, k0, k1)?)),
        Cmd::ProbForm { input } => Ok(to_value(&to_probability_form(&input.load()?).to_json())),
        Cmd::Lhv { input, budget } => Ok(to_value(&lhv::lhv_bound(&input.load()?, budget)?.to_json())),
        Cmd::Spectrum { input, budget } => {
            let rep = lhv::lhv_bound(&input.load()?, budget)?;
            Ok(json!({ "spectrum": rep.spectrum.iter().map(rational_json).collect::<Vec<_>>() }))
        }
        Cmd::QuantumMax { input, optim } => {
            let f = input.load()?;
            let q = optimize_with_bound(&f, &rational::int(1), &optim.options())?;
            Ok(json!({
                "nl_psi": q.nl_psi,
                "nl_mix": q.nl_mix,
                "best_phases": q.best_phases,
                "best_restart": q.best_restart,
                "restarts_used": q.restarts_used,
                "converged_restarts": q.converged_restarts,
            }))
        }
        Cmd::Visibility { input, optim, budget } => {
            let q = optimize_phases(&input.load()?, &optim.options(), budget)?;
            let v = critical_visibility(&q.lhv_bound, q.nl_psi, q.nl_mix)?;
            let mut out = to_value(&q.to_json());
            out["vc"] = json!(v.vc);
            Ok(out)
        }
        Cmd::Orbit { input, budget, elements } => {
            let r = orbit(&input.load()?, budget, elements)?;
            let mut out = json!({
                "size": r.size,
                "group_order": r.group_order.to_string(),
                "stabilizer_order": r.stabilizer_order.to_string(),
            });
            if let Some(es) = r.elements {
                out["elements"] = es
                    .iter()
                    .map(|(g, t)| json!({ "recipe": t.to_recipe(), "function": g }))
                    .collect::<Vec<_>>()
                    .into();
            }
            Ok(out)
        }
        Cmd::Canon { input, budget } => {
            let (c, w) = canonical_with_witness(&input.load()?, budget)?;
            Ok(json!({ "canonical": c, "witness": w.to_recipe() }))
        }
        Cmd::Equiv { input, other, budget } => {
            let (f, g) = (input.load()?, load_source(&other)?);
            Ok(match equivalent(&f, &g, budget)? {
                Equivalence::Equivalent(t) => json!({ "verdict": "equivalent", "witness": t.to_recipe() }),
                Equivalence::Inequivalent(why) => json!({ "verdict": "inequivalent", "reason": why }),
                Equivalence::Unknown(why) => json!({ "verdict": "unknown", "reason": why }),
            })
        }
        Cmd::Certificate { input } => {
            let c = invariant_certificate(&input.load()?);
            Ok(json!({ "certificate": c.to_strings() }))
        }
        Cmd::Catalog { action } => run_catalog(action, table),
        Cmd::VerifyAppendixA { d, trials, seed } => {
            let reps = d
                .iter()
                .map(|&d| mcbell::quantum::projector::verify_projector_identity(d, trials, seed))
                .collect::<Result<Vec<_>, _>>()?;
            let ok = reps.iter().all(|r| r.passed);
            verdict(ok, json!({ "passed": ok, "reports": reps }))
        }
        Cmd::Search { seed00, orbit, d, restarts, refine_restarts, tol, tie_tol, seed, budget } => {
            let cfg = SearchConfig {
                restarts,
                refine_restarts,
                tol,
                vc_tie_tolerance: tie_tol,
                seed,
                orbit_budget: budget,
                ..SearchConfig::new(&seed00, &orbit, d)
            };
            let r = run_search(&cfg)?;
            *table = Some(search_table(&r));
            Ok(to_value(&r))
        }
        Cmd::VerifyCandidate { input, spectrum, vc, vc_tol, optim, budget } => {
            let want = spectrum.iter().map(|s| rational::parse(s)).collect::<Result<Vec<_>, _>>()?;
            let rep = verify_candidate(&input.load()?, &want, vc, vc_tol, &optim.options(), budget)?;
            verdict(rep.passed, to_value(&rep))
        }
        Cmd::Repro { only, full_row, restarts, seed } => {
            let opts = ReproOptions { seed, restarts, full_row };
            let ids = if only.is_empty() { (1..=repro::TITLES.len()).collect() } else { only };
            let results: Vec<_> = ids.iter().map(|&id| repro::run_criterion(id, &opts)).collect();
            *table = Some(repro::format_table(&results));
            let ok = results.iter().all(|r| r.passed);
            verdict(ok, json!({ "passed": ok, "criteria": results }))
        }
    }
}

fn run_catalog(action: CatalogCmd, table: &mut Option<String>) -> Out {
    let cat = load_catalog();
    match action {
        CatalogCmd::List => {
            let rows: Vec<Value> = cat
                .entries()
                .iter()
                .map(|e| json!({ "id": e.id(), "n": e.raw.n, "d": e.raw.d, "source": e.raw.source, "suspect": e.is_suspect() }))
                .collect();
            *table = Some(
                cat.entries()
                    .iter()
                    .map(|e| format!("{:<14} ({},2,{}) {}{}\n", e.id(), e.raw.n, e.raw.d, e.raw.source, if e.is_suspect() { " [suspect]" } else { "" }))
                    .collect(),
            );
            Ok(Value::Array(rows))
        }
        CatalogCmd::Show { id } => {
            let e = cat.get(&id)?;
            *table = Some(format!("{} ({},2,{}) {}\n{}\n", e.id(), e.raw.n, e.raw.d, e.raw.source, e.function.pretty()));
            let mut v = to_value(&e.raw);
            v["function"] = to_value(&e.function);
            Ok(v)
        }
        CatalogCmd::Verify { max_n, budget } => {
            let recipes = catalog::verify_recipes(cat);
            let links = catalog::verify_links(cat);
            let forms = catalog::verify_printed_forms(cat, budget)?;
            let bounds = catalog::verify_bounds(cat, max_n, budget)?;
            let suspects = catalog::suspects(cat);
            let ok = recipes.ok() && links.iter().all(|l| l.result.is_match()) && bounds.iter().all(|b| b.matches);
            let mut t = format!(
                "recipes: {} verified, {} failed, {} suspect\nlinks: {}/{} match\nbounds: {}/{} match\n",
                recipes.passed,
                recipes.failed,
                recipes.suspect,
                links.iter().filter(|l| l.result.is_match()).count(),
                links.len(),
                bounds.iter().filter(|b| b.matches).count(),
                bounds.len()
            );
            for f in &forms {
                t.push_str(&format!(
                    "form {:<10} affine match {:<5} printed max {} vs printed bound {}\n",
                    f.id, f.affine_match, f.printed_lhv_max, f.printed_bound
                ));
            }
            for (kind, what, why) in &suspects {
                t.push_str(&format!("suspect {kind} {what}: {why}\n"));
            }
            *table = Some(t);
            verdict(
                ok,
                json!({ "passed": ok, "recipes": recipes, "links": links, "forms": forms, "bounds": bounds,
                        "suspects": suspects.iter().map(|(k, w, r)| json!({"kind": k, "item": w, "reason": r})).collect::<Vec<_>>() }),
            )
        }
    }
}

fn search_table(r: &SearchResult) -> String {
    let c = &r.config;
    let mut t = format!(
        "I^{{0,0}} = {}, I^{{0,1}} ~ {}, d = {}\norbit {} | evaluated {} | refined {} | non-violating {}\n",
        c.seed00, c.orbit_source, c.d, r.orbit_size, r.candidates_evaluated, r.refined, r.non_violating
    );
    t.push_str(&format!(
        "lowest vc {:.6}: {} winners raw, {} after dedup, {} classes ({:.1} s)\nvc histogram (tie tolerance {:.0e}):\n",
        r.min_vc,
        r.raw_winner_count,
        r.dedup_winner_count,
        r.winner_classes.map_or("?".into(), |k| k.to_string()),
        r.wall_time_secs,
        c.vc_tie_tolerance
    ));
    for b in r.histogram.iter().take(10) {
        t.push_str(&format!("  {:.7}  {}\n", b.vc, b.count));
    }
    for w in &r.winners {
        t.push_str(&format!("  #{:<6} L = {} NL = {:.6} vc = {:.7} {}\n", w.index, w.lhv, w.nl_psi, w.vc, w.recipe));
    }
    t
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: --workers: {e}");
            return ExitCode::from(2);
        }
    }
    let mut table = None;
    let (value, code) = match run(cli.cmd, &mut table) {
        Ok(v) => (Some(v), 0),
        Err(Failure::Verification(v)) => (Some(v), 1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            (None, 2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            (None, 1)
        }
    };
    if let Some(v) = value {
        match (&table, cli.table) {
            (Some(t), true) => print!("{t}"),
            _ => println!("{}", serde_json::to_string_pretty(&v).expect("serializable")),
        }
    }
    ExitCode::from(code)
}
