use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use twistlab::expr::{self, Bindings};
use twistlab::relations::{mutation_sweep, Catalog};
use twistlab::{
    abelianize, double_cover_h1, first_difference, run_suite, validate_table, ElementaryTable, Error, MappingClass,
    SurfaceModel, WordError,
};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_OVERFLOW: u8 = 3;

#[derive(Parser)]
#[command(name = "twistlab", version, about = "Exact Dehn twist calculus on N_{k,1}")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Abort when any word grows past this many letters.
    #[arg(long, global = true, value_name = "N")]
    max_word_length: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Surface model, e.g. N5,1.
    #[arg(long, value_name = "Nk,1")]
    surface: SurfaceModel,

    /// Bind a lowercase name, e.g. --let a1=T(1,2). Later bindings may use earlier ones.
    #[arg(long = "let", value_name = "NAME=EXPR")]
    bindings: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the generator images of a factorization.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        expr: String,
    },
    /// Decide whether two factorizations give the same mapping class.
    Equal {
        #[command(flatten)]
        model: ModelArgs,
        lhs: String,
        rhs: String,
    },
    /// Print the action on the first homology of the orientation double cover.
    Homology {
        #[command(flatten)]
        model: ModelArgs,
        /// Reduce entries mod m (m >= 2).
        #[arg(long = "mod", value_name = "M")]
        modulus: Option<i64>,
        /// Use the surface's own H1 instead of the double cover.
        #[arg(long)]
        base: bool,
        expr: String,
    },
    /// Run the relation catalog.
    Suite {
        /// Only fixtures whose id starts with this prefix.
        #[arg(long)]
        filter: Option<String>,
        /// Only fixtures on this surface.
        #[arg(long, value_name = "Nk,1")]
        surface: Option<SurfaceModel>,
        /// Catalog file to use instead of the bundled one.
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Run fixtures one at a time.
        #[arg(long)]
        serial: bool,
        /// Also check that every single-factor mutation fails.
        #[arg(long)]
        mutations: bool,
    },
    /// Check the elementary table of a model.
    Validate {
        #[arg(long, value_name = "Nk,1")]
        surface: SurfaceModel,
    },
    /// Print the elementary table as JSON.
    Describe {
        #[arg(long, value_name = "Nk,1")]
        surface: SurfaceModel,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    offset: Option<usize>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind, offset) = match &e {
            Error::Word(WordError::Overflow { .. }) => (EXIT_OVERFLOW, "overflow", None),
            Error::Parse(p) => (EXIT_USAGE, "parse", Some(p.offset)),
            Error::OneSided { .. } | Error::InvalidInterval { .. } | Error::Unbound(_) | Error::InvalidModulus(_) => {
                (EXIT_USAGE, "usage", None)
            }
            Error::Catalog(_) => (EXIT_USAGE, "catalog", None),
            _ => (EXIT_FAIL, "error", None),
        };
        Failure { code, kind, message: e.to_string(), offset }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: EXIT_USAGE, kind: "usage", message, offset: None }
}

struct Session {
    table: Arc<ElementaryTable>,
    env: Bindings,
}

impl Session {
    fn new(m: &ModelArgs) -> Result<Self, Failure> {
        let table = Arc::new(ElementaryTable::standard(m.surface));
        let mut pairs = Vec::new();
        for b in &m.bindings {
            let (name, src) = b.split_once('=').ok_or_else(|| usage(format!("--let expects NAME=EXPR, got {b:?}")))?;
            pairs.push((name.trim(), src));
        }
        let env = expr::bind_all(pairs, &table)?;
        Ok(Session { table, env })
    }

    fn class(&self, src: &str) -> Result<MappingClass, Failure> {
        Ok(expr::mapping_class(src, &self.table, &self.env)?)
    }
}

fn images(mc: &MappingClass) -> Result<Vec<String>, Failure> {
    Ok(mc.witness()?.forward().images().iter().map(|w| w.to_string()).collect())
}

/// Returns the exit code with either a JSON value or text to print.
fn run(cli: &Cli) -> Result<(u8, Value, String), Failure> {
    match &cli.command {
        Command::Eval { model, expr } => {
            let s = Session::new(model)?;
            let mc = s.class(expr)?;
            let imgs = images(&mc)?;
            let text = imgs.iter().enumerate().map(|(n, w)| format!("x{} -> {w}", n + 1)).collect::<Vec<_>>().join("\n");
            let v = json!({ "surface": model.surface.to_string(), "expression": expr, "images": imgs });
            Ok((0, v, text))
        }
        Command::Equal { model, lhs, rhs } => {
            let s = Session::new(model)?;
            let (a, b) = (s.class(lhs)?, s.class(rhs)?);
            let diff = first_difference(&a, &b)?;
            let (code, detail, text) = match diff {
                None => (0, Value::Null, "equal".to_string()),
                Some(g) => {
                    let l = a.witness()?.forward().image(g).to_string();
                    let r = b.witness()?.forward().image(g).to_string();
                    let text = format!("not equal: first difference at x{g}\n  lhs: {l}\n  rhs: {r}");
                    (EXIT_FAIL, json!({ "generator": g, "lhs": l, "rhs": r }), text)
                }
            };
            let v = json!({
                "surface": model.surface.to_string(),
                "lhs": lhs,
                "rhs": rhs,
                "equal": diff.is_none(),
                "first_difference": detail,
            });
            Ok((code, v, text))
        }
        Command::Homology { model, modulus, base, expr } => {
            let s = Session::new(model)?;
            let mc = s.class(expr)?;
            if let Some(m) = modulus {
                if *m < 2 {
                    return Err(Error::InvalidModulus(*m).into());
                }
            }
            let raw = if *base { abelianize(mc.witness()?.forward()) } else { double_cover_h1(&mc)? };
            let mat = modulus.map_or(raw.clone(), |m| raw.reduce_mod(m));
            let identity = modulus.map_or(raw.is_identity(), |m| raw.congruent_identity(m));
            let v = json!({
                "surface": model.surface.to_string(),
                "expression": expr,
                "level": if *base { "surface" } else { "double_cover" },
                "modulus": modulus,
                "dimension": mat.rows(),
                "matrix": mat,
                "identity": identity,
            });
            let text = format!("{mat}\n{}", if identity { "identity" } else { "not identity" });
            Ok((0, v, text))
        }
        Command::Suite { filter, surface, catalog, serial, mutations } => {
            let mut cat = match catalog {
                Some(p) => Catalog::load(p)?,
                None => Catalog::builtin(),
            };
            if let Some(m) = surface {
                cat.fixtures.retain(|f| f.surface == m.crosscaps());
            }
            let report = run_suite(&cat, filter.as_deref(), !serial);
            let mut code = if report.all_passed() {
                0
            } else if report.failed + report.errors > 0 {
                EXIT_FAIL
            } else {
                EXIT_OVERFLOW
            };
            let mut v = serde_json::to_value(&report).expect("report serializes");
            let mut text = report.to_text();
            if *mutations {
                let sweep = mutation_sweep(&cat, filter.as_deref());
                let weak: Vec<_> = sweep.iter().filter(|m| !m.killed_all()).collect();
                let total: usize = sweep.iter().map(|m| m.mutants).sum();
                text.push_str(&format!("\nmutations: {total} mutants over {} fixtures, {} fixtures insensitive", sweep.len(), weak.len()));
                for m in &weak {
                    text.push_str(&format!("\n  {}: {:?} {}", m.id, m.survivors, m.error.clone().unwrap_or_default()));
                }
                if !weak.is_empty() && code == 0 {
                    code = EXIT_FAIL;
                }
                v["mutations"] = serde_json::to_value(&sweep).expect("sweep serializes");
            }
            Ok((code, v, text))
        }
        Command::Validate { surface } => {
            let r = validate_table(&ElementaryTable::standard(*surface));
            let text = if r.passed() {
                format!("{surface}: {} checks passed", r.checks)
            } else {
                format!("{surface}: {} of {} checks failed\n  {}", r.failures.len(), r.checks, r.failures.join("\n  "))
            };
            let code = if r.passed() { 0 } else { EXIT_FAIL };
            Ok((code, serde_json::to_value(&r).expect("report serializes"), text))
        }
        Command::Describe { surface } => {
            let d = ElementaryTable::standard(*surface).describe();
            let v = serde_json::to_value(&d).expect("description serializes");
            let text = serde_json::to_string_pretty(&v).expect("json");
            Ok((0, v, text))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.max_word_length {
        twistlab::word::set_max_word_length(n);
    }
    match run(&cli) {
        Ok((code, v, text)) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            } else {
                println!("{text}");
            }
            ExitCode::from(code)
        }
        Err(f) => {
            if cli.json {
                let v = json!({ "error": { "kind": f.kind, "message": f.message, "offset": f.offset } });
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            }
            eprintln!("twistlab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
