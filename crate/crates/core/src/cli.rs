//! The `maltsev` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::algebra::{validate_model, FiniteAlgebra};
use crate::analysis::Analysis;
use crate::asymptotics::parameters;
use crate::budget::Budget;
use crate::builtins::{builtin_system, BuiltinId, Family};
use crate::census::{parse_property_list, sample_algebra, sweep_census, to_csv, system_hash, Experiment, Property};
use crate::error::{Error, Result};
use crate::factory::{build_dispatch, enumerate_models, Backend, FamilyLayout};
use crate::kelly::{assumptions, default_closure, entails_identity, AssumptionReport};
use crate::props::{self, PropertyResult};
use crate::syntax::{parse_identity, parse_system, render_system, render_term, variable_names, SystemSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "maltsev", version, about = "Analyze idempotent linear Maltsev conditions and sample their random finite models")]
pub struct Cli {
    /// Largest variable count for closure computations.
    #[arg(long, global = true)]
    pub max_vars: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Family,
    Brute,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closure, transversal, minimal terms, subalgebra limits and the idemprimality verdict.
    Analyze {
        /// A .mlt file or a builtin such as `hagemann-mitschke:3`.
        system: String,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether the system entails a linear identity.
    Entail {
        system: String,
        identity: String,
        #[arg(long)]
        json: bool,
    },
    /// Draw uniformly random models, one JSON document per line.
    Sample {
        system: String,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// List every model on an n-element carrier, one JSON document per line.
    Enumerate {
        system: String,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Family)]
        backend: BackendArg,
    },
    /// Evaluate properties of a concrete algebra given as JSON.
    Check {
        algebra: PathBuf,
        /// Also validate the algebra as a model of this system.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        property: String,
    },
    /// Monte Carlo estimates of property probabilities, as CSV.
    Census {
        system: String,
        /// Carrier sizes, comma separated.
        #[arg(short = 'n', value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        property: String,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Print a builtin system as a .mlt document.
    Builtin {
        name: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "n")]
        n: Option<usize>,
    },
}

/// Load a system from a file, or else interpret the argument as a builtin id.
pub fn load_system(arg: &str) -> Result<SystemSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{arg}: {e}")))?;
        let mut spec = parse_system(&text)?;
        if spec.name.is_empty() {
            spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        return Ok(spec);
    }
    match arg.parse::<BuiltinId>() {
        Ok(id) => builtin_system(&id),
        Err(_) => Err(Error::Invalid(format!("{arg}: no such file or builtin system"))),
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::Invalid("--seed is required: randomized commands have no default seed".into()))
}

fn write_out(output: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Invalid(format!("write failed: {e}"));
    match output {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => stdout.write_all(text.as_bytes()).map_err(io),
    }
}

fn assumptions_json(a: &AssumptionReport) -> Value {
    json!({
        "idempotent": a.idempotent,
        "satisfiable": a.satisfiable,
        "has_nontrivial_term": a.has_nontrivial_term,
    })
}

/// Report for `analyze`, or the failing assumption with its report.
fn analysis_document(spec: &SystemSpec, budget: &Budget) -> Result<std::result::Result<Value, (Value, Error)>> {
    let closure = default_closure(spec, budget)?;
    let report = assumptions(&closure);
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("system".into(), json!(spec.name));
    doc.insert("hash".into(), json!(system_hash(spec)));
    doc.insert("m".into(), json!(closure.m()));
    doc.insert("class_count".into(), json!(closure.class_count()));
    doc.insert("assumptions".into(), assumptions_json(&report));
    if let Err(e) = report.require() {
        if let Some((a, b)) = closure.unsat_witness() {
            let names = variable_names(&spec.signature, closure.m());
            doc.insert("witness".into(), json!(format!("{} = {}", names[a], names[b])));
        }
        return Ok(Err((Value::Object(doc), e)));
    }
    let analysis = Analysis::new(closure)?;
    let params = parameters(&analysis.transversal)?;
    let sig = &spec.signature;
    doc.insert("orbit_count".into(), json!(analysis.orbit_count()));
    doc.insert("d_M".into(), json!(params.d_min));
    let max_d = params.entries.iter().map(|e| e.0).max().unwrap_or(params.d_min);
    let mut p = Map::new();
    for k in 2..=max_d as u64 + 1 {
        let v = match params.p(k) {
            Ok(v) => json!(v),
            Err(_) => json!(params.p_of_k(k).to_string()),
        };
        p.insert(k.to_string(), v);
    }
    doc.insert("p".into(), Value::Object(p));
    let transversal: Vec<Value> = analysis
        .transversal
        .nontrivial()
        .iter()
        .map(|e| {
            let names = variable_names(sig, e.arity);
            json!({
                "representative": render_term(sig, &e.representative, &names),
                "arity": e.arity,
                "group_order": e.group.order(),
                "q": e.q,
            })
        })
        .collect();
    doc.insert("transversal".into(), json!(transversal));
    let minimal: Vec<Value> = analysis
        .minimal_reports()?
        .iter()
        .map(|r| {
            let names = variable_names(sig, r.term.max_variable() + 1);
            json!({"term": render_term(sig, &r.term, &names), "kind": r.kind.as_str()})
        })
        .collect();
    doc.insert("minimal_terms".into(), json!(minimal));
    let table: Vec<Value> = params
        .asymptotic_table()?
        .rows
        .iter()
        .map(|(size, limit)| json!({"size": size.to_string(), "limit": limit.to_string(), "value": limit.value()}))
        .collect();
    doc.insert("subalgebra_limits".into(), json!(table));
    let v = params.idemprimality_verdict()?;
    doc.insert(
        "idemprimality".into(),
        json!({
            "almost_surely": v.almost_surely,
            "limit": v.limit.to_string(),
            "limit_value": v.limit.value(),
            "justification": v.justification,
        }),
    );
    Ok(Ok(Value::Object(doc)))
}

/// The `analyze --json` document; fails when an assumption does not hold.
pub fn analysis_json(spec: &SystemSpec, budget: &Budget) -> Result<Value> {
    analysis_document(spec, budget)?.map_err(|(_, e)| e)
}

fn analysis_text(doc: &Value) -> String {
    let mut s = String::new();
    let get = |k: &str| doc.get(k).cloned().unwrap_or(Value::Null);
    let plain = |v: &Value| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    s.push_str(&format!("system: {}\n", plain(&get("system"))));
    s.push_str(&format!("hash: {}\n", plain(&get("hash"))));
    s.push_str(&format!("variables: {}, classes: {}\n", get("m"), get("class_count")));
    let a = get("assumptions");
    let yn = |k: &str| if a[k].as_bool() == Some(true) { "yes" } else { "no" };
    s.push_str(&format!(
        "idempotent: {}, satisfiable: {}, nontrivial term: {}\n",
        yn("idempotent"),
        yn("satisfiable"),
        yn("has_nontrivial_term")
    ));
    if let Some(w) = doc.get("witness") {
        s.push_str(&format!("witness: {}\n", plain(w)));
    }
    if doc.get("d_M").is_none() {
        return s;
    }
    s.push_str(&format!("orbits: {}\nd_M: {}\n", get("orbit_count"), get("d_M")));
    if let Some(p) = get("p").as_object() {
        let parts: Vec<String> = p.iter().map(|(k, v)| format!("p({k}) = {}", plain(v))).collect();
        s.push_str(&format!("{}\n", parts.join(", ")));
    }
    s.push_str("transversal:\n");
    for e in get("transversal").as_array().into_iter().flatten() {
        s.push_str(&format!(
            "  {}  arity {}  |G| = {}  q = {}\n",
            plain(&e["representative"]),
            e["arity"],
            e["group_order"],
            e["q"]
        ));
    }
    s.push_str("minimal terms:\n");
    for e in get("minimal_terms").as_array().into_iter().flatten() {
        s.push_str(&format!("  {}  {}\n", plain(&e["term"]), plain(&e["kind"])));
    }
    s.push_str("subalgebra limits:\n");
    for e in get("subalgebra_limits").as_array().into_iter().flatten() {
        s.push_str(&format!("  size {}: {}\n", plain(&e["size"]), plain(&e["limit"])));
    }
    let v = get("idemprimality");
    s.push_str(&format!(
        "almost surely idemprimal: {} (limit {})\n",
        if v["almost_surely"].as_bool() == Some(true) { "YES" } else { "NO" },
        plain(&v["limit"])
    ));
    for j in v["justification"].as_array().into_iter().flatten() {
        s.push_str(&format!("  {}\n", plain(j)));
    }
    s
}

fn property_result(algebra: &FiniteAlgebra, p: &Property, budget: &Budget) -> Result<PropertyResult> {
    let mut r = match p {
        Property::Subalg(k) => props::has_subalgebra_of_size(algebra, *k, budget)?,
        Property::NoSubalg2 => {
            let r = props::has_subalgebra_of_size(algebra, 2, budget)?;
            PropertyResult {
                property: String::new(),
                holds: !r.holds,
                witness: None,
            }
        }
        Property::SubalgGT1 => {
            if algebra.n < 2 {
                PropertyResult {
                    property: String::new(),
                    holds: false,
                    witness: None,
                }
            } else {
                props::has_proper_subalgebra_size_gt1(algebra)?
            }
        }
        Property::Automorphism => props::has_nontrivial_automorphism(algebra, budget)?,
        Property::Cross => props::has_compatible_cross(algebra)?,
        Property::Idemprimal => props::is_idemprimal(algebra, budget)?,
        Property::Minority2 => {
            let s = algebra
                .operations
                .iter()
                .position(|op| op.arity == 3)
                .ok_or_else(|| Error::Invalid("minority2 needs a ternary operation".into()))?;
            props::has_minority_two_subalgebra(algebra, s)?
        }
        Property::FixedB(b) => props::is_subuniverse(algebra, b)?,
    };
    r.property = p.to_string();
    Ok(r)
}

fn budget_for(max_vars: Option<usize>) -> Budget {
    match max_vars {
        Some(m) => Budget::default().with_max_vars(m),
        None => Budget::default(),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let budget = budget_for(cli.max_vars);
    let io = |e: std::io::Error| Error::Invalid(format!("write failed: {e}"));
    match cli.command {
        Command::Analyze { system, json } => {
            let spec = load_system(&system)?;
            let (doc, err) = match analysis_document(&spec, &budget)? {
                Ok(doc) => (doc, None),
                Err((doc, e)) => (doc, Some(e)),
            };
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("json")).map_err(io)?;
            } else {
                write!(stdout, "{}", analysis_text(&doc)).map_err(io)?;
            }
            match err {
                Some(e) => Err(e),
                None => Ok(0),
            }
        }
        Command::Entail { system, identity, json } => {
            let spec = load_system(&system)?;
            let query = parse_identity(&spec.signature, &identity)?;
            let e = entails_identity(&spec, &query, &budget)?;
            if json {
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "identity": identity,
                    "entailed": e.entailed,
                    "m": e.m,
                    "satisfiable": e.satisfiable,
                });
                writeln!(stdout, "{doc}").map_err(io)?;
            } else {
                writeln!(stdout, "{}", if e.entailed { "ENTAILED" } else { "NOT ENTAILED" }).map_err(io)?;
            }
            Ok(0)
        }
        Command::Sample {
            system,
            n,
            seed,
            count,
            output,
        } => {
            let seed = require_seed(seed)?;
            let spec = load_system(&system)?;
            let layout = layout_for(&spec, n, &budget)?;
            let mut text = String::new();
            for j in 0..count {
                text.push_str(&sample_algebra(&layout, seed, j).to_json());
                text.push('\n');
            }
            write_out(&output, stdout, &text)?;
            Ok(0)
        }
        Command::Enumerate { system, n, backend } => {
            let spec = load_system(&system)?;
            let closure = default_closure(&spec, &budget)?;
            assumptions(&closure).require()?;
            let analysis = Analysis::new(closure)?;
            let backend = match backend {
                BackendArg::Family => Backend::Family,
                BackendArg::Brute => Backend::Brute,
            };
            for a in enumerate_models(&analysis, n, backend, &budget)? {
                writeln!(stdout, "{}", a.to_json()).map_err(io)?;
            }
            Ok(0)
        }
        Command::Check {
            algebra,
            system,
            property,
        } => {
            let text = std::fs::read_to_string(&algebra)
                .map_err(|e| Error::Invalid(format!("{}: {e}", algebra.display())))?;
            let alg = FiniteAlgebra::from_json(&text)?;
            let properties = parse_property_list(&property)?;
            if let Some(system) = system {
                let spec = load_system(&system)?;
                let v = validate_model(&spec, &alg)?;
                let witness = v
                    .counterexample
                    .map(|c| json!({"identity": spec.display_identity(&spec.identities[c.identity]), "assignment": c.assignment}));
                writeln!(stdout, "{}", json!({"property": "model", "holds": v.holds, "witness": witness})).map_err(io)?;
            }
            for p in &properties {
                let r = property_result(&alg, p, &budget)?;
                writeln!(stdout, "{}", r.to_json()).map_err(io)?;
            }
            Ok(0)
        }
        Command::Census {
            system,
            n,
            samples,
            seed,
            property,
            threads,
            output,
        } => {
            let seed = require_seed(seed)?;
            let spec = load_system(&system)?;
            let exp = Experiment {
                spec,
                n: n[0],
                samples,
                master_seed: seed,
                properties: parse_property_list(&property)?,
                threads,
                budget,
            };
            let reports = sweep_census(&exp, &n)?;
            write_out(&output, stdout, &to_csv(&reports)?)?;
            Ok(0)
        }
        Command::Builtin { name, k, m, n } => {
            let family: Family = name.parse()?;
            let id = match (k, m, n) {
                (None, None, None) => BuiltinId::new(family),
                (Some(k), None, None) => BuiltinId::with_k(family, k),
                (None, Some(m), Some(n)) => BuiltinId::with_mn(family, m, n),
                _ => return Err(Error::Invalid("use either --k or both --m and --n".into())),
            };
            id.validate()?;
            write!(stdout, "{}", render_system(&builtin_system(&id)?)).map_err(io)?;
            Ok(0)
        }
    }
}

fn layout_for(spec: &SystemSpec, n: usize, budget: &Budget) -> Result<FamilyLayout> {
    let closure = default_closure(spec, budget)?;
    assumptions(&closure).require()?;
    let analysis = Analysis::new(closure)?;
    let dispatch = build_dispatch(&analysis)?;
    FamilyLayout::new(&analysis, &dispatch, n, budget)
}

/// Run the command line; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return e.exit_code();
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
