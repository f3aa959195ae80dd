//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classification::{ko_s_alpha_beta, ko_s_orthant, ko_t_hat, strong_group_lookup, AzClass};
use crate::compressions::{build_orthant, fredholm_criterion, slope_normalize, wedge_fredholm, Slope};
use crate::error::{Error, Result};
use crate::invariants::{
    corner_invariant, localized_fredholm_index, localized_kernel_count, spectral_flow, stability_check, z2_spectral_flow,
    CornerQuery, InvariantReport, MatrixFamily, Region, Thresholds,
};
use crate::json::to_string_pretty;
use crate::linalg::{canonical_j, diag_real, identity, I};
use crate::model::ModelSpec;
use crate::models::{a_hat, g_operator, kitaev, product_hamiltonian, ssh};
use crate::spectra::{band_structure, window_spectrum};

#[derive(Parser, Debug)]
#[command(name = "cornerlab", version, about = "Corner invariants of lattice Hamiltonians with symmetry")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Output::Json, global = true)]
    pub output: Output,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Window {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub codim: Option<usize>,
    #[arg(long = "L", default_value_t = 24)]
    pub l: i64,
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    #[arg(long)]
    pub alpha: Option<Slope>,
    #[arg(long)]
    pub beta: Option<Slope>,
    #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
    pub convex: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bulk and face gap check for the corner geometry.
    Gap {
        #[command(flatten)]
        window: Window,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Band structure, or the window spectrum with --codim.
    Spectrum {
        #[command(flatten)]
        window: Window,
    },
    /// Numerical corner invariant.
    Invariant {
        #[command(flatten)]
        window: Window,
        #[arg(long)]
        zero_eps: Option<f64>,
        #[arg(long, default_value_t = 0.8)]
        loc_lambda: f64,
        /// Run the 2L and perturbation checks with this many perturbations.
        #[arg(long)]
        stability: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Strong invariant group for a class and codimension.
    Classify {
        #[arg(long)]
        class: AzClass,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// KO-groups of the corner algebras.
    KoTable {
        #[arg(long, value_enum)]
        algebra: Algebra,
        #[arg(long)]
        i: i32,
        #[arg(long)]
        alpha: Option<Slope>,
        #[arg(long)]
        beta: Option<Slope>,
    },
    /// Product of two model specs: `--model A --model B` or `--model A B`.
    Product {
        #[arg(long, num_args = 1..=2, required = true, action = clap::ArgAction::Append)]
        model: Vec<PathBuf>,
    },
    /// Runs a fixed check suite and prints a pass/fail table.
    Demo {
        #[arg(long, value_enum, default_value_t = Suite::Paper)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algebra {
    /// Quarter-plane symbol algebra.
    S,
    /// Quarter-plane Toeplitz algebra.
    T,
    Orthant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Paper,
}

/// Process exit status for an error: usage problems give 2, everything else 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Ordering(_) => 2,
        _ => 1,
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. Reports go to stdout or `--out`, errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok((doc, ok)) => match emit(&cli, &doc) {
            Ok(()) => i32::from(!ok),
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("CORNERLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

enum Doc {
    Json(Value),
    Table { header: Vec<&'static str>, rows: Vec<Vec<String>>, json: Value },
}

fn emit(cli: &Cli, doc: &Doc) -> Result<()> {
    let text = match (cli.output, doc) {
        (Output::Json, Doc::Json(v)) | (Output::Json, Doc::Table { json: v, .. }) => to_string_pretty(v)? + "\n",
        (Output::Csv, Doc::Table { header, rows, .. }) => csv(header, rows),
        (Output::Csv, Doc::Json(v)) => {
            let rows = match v {
                Value::Object(m) => m.iter().map(|(k, v)| vec![k.clone(), scalar(v)]).collect(),
                other => vec![vec!["value".into(), scalar(other)]],
            };
            csv(&["key", "value"], &rows)
        }
    };
    match &cli.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().filter(|_| n.is_f64()).map(crate::json::fmt17).unwrap_or_else(|| n.to_string()),
        other => other.to_string(),
    }
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let quote = |s: &str| if s.contains([',', '"', '\n']) { format!("\"{}\"", s.replace('"', "\"\"")) } else { s.to_string() };
    let mut out = header.join(",") + "\n";
    for r in rows {
        out += &(r.iter().map(|c| quote(c)).collect::<Vec<_>>().join(",") + "\n");
    }
    out
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn region(w: &Window) -> Result<Region> {
    match (&w.alpha, &w.beta) {
        (None, None) => Ok(Region::Orthant),
        (Some(a), Some(b)) => Ok(Region::Quarter { alpha: *a, beta: *b, convex: w.convex }),
        _ => Err(Error::Input("--alpha and --beta go together".into())),
    }
}

fn codim(w: &Window, spec: &ModelSpec) -> usize {
    w.codim.unwrap_or(spec.model.dim())
}

fn execute(cli: &Cli) -> Result<(Doc, bool)> {
    match &cli.command {
        Command::Gap { window, tol } => {
            let spec = ModelSpec::load(&window.model)?;
            let k = codim(window, &spec);
            let report = match region(window)? {
                Region::Quarter { alpha, beta, .. } => wedge_fredholm(&spec.model, &alpha, &beta, window.grid, window.l, *tol)?,
                Region::Orthant => fredholm_criterion(&spec.model, k, window.grid, window.l, *tol)?,
            };
            let doc = to_value(&report)?;
            let ok = match report.into_result() {
                Ok(_) => true,
                Err(e) => {
                    eprintln!("error: {e}");
                    false
                }
            };
            Ok((Doc::Json(doc), ok))
        }
        Command::Spectrum { window } => {
            let spec = ModelSpec::load(&window.model)?;
            match window.codim {
                None => {
                    let bands = band_structure(&spec.model, window.grid)?;
                    let rows = bands
                        .iter()
                        .flat_map(|b| {
                            b.energies.iter().enumerate().map(move |(i, e)| {
                                let mut r: Vec<String> = b.momentum.iter().map(|t| crate::json::fmt17(*t)).collect();
                                r.push(i.to_string());
                                r.push(crate::json::fmt17(*e));
                                r
                            })
                        })
                        .collect();
                    let header = match spec.model.dim() {
                        1 => vec!["t1", "band", "energy"],
                        2 => vec!["t1", "t2", "band", "energy"],
                        _ => vec!["t", "band", "energy"],
                    };
                    Ok((Doc::Table { header, rows, json: to_value(&bands)? }, true))
                }
                Some(k) => {
                    let momentum = vec![0.0; spec.model.dim() - k.min(spec.model.dim())];
                    let op = build_orthant(&spec.model, k, &momentum, window.l)?;
                    let s = window_spectrum(&op)?;
                    let rows = s.eigenvalues.iter().enumerate().map(|(i, e)| vec![i.to_string(), crate::json::fmt17(*e)]).collect();
                    Ok((Doc::Table { header: vec!["index", "energy"], rows, json: to_value(&s)? }, true))
                }
            }
        }
        Command::Invariant { window, zero_eps, loc_lambda, stability, seed } => {
            let spec = ModelSpec::load(&window.model)?;
            let mut q = CornerQuery::new(codim(window, &spec), window.l);
            q.grid = window.grid;
            q.region = region(window)?;
            q.zero_eps = *zero_eps;
            q.loc_lambda = *loc_lambda;
            let outcome = corner_invariant(&spec, &q)?;
            let stab = stability.map(|n| stability_check(&spec, &q, &outcome, n, *seed)).transpose()?;
            let ok = stab.as_ref().map(|s| s.doubled_l_agrees && s.perturbation_agrees).unwrap_or(true);
            let mut report = InvariantReport::from(outcome);
            report.stability = stab;
            let mut doc = to_value(&report)?;
            doc["group"] = json!(report.group_tag.to_string());
            Ok((Doc::Json(doc), ok))
        }
        Command::Classify { class, n, k } => {
            let g = strong_group_lookup(*class, *n, *k)?;
            Ok((Doc::Json(json!({"class": class.to_string(), "n": n, "k": k, "group": g.to_string()})), true))
        }
        Command::KoTable { algebra, i, alpha, beta } => {
            let i = *i;
            if !(0..8).contains(&i) {
                return Err(Error::Input(format!("degree {i} outside 0..7")));
            }
            let doc = match algebra {
                Algebra::Orthant => json!({"algebra": "orthant", "i": i, "group": ko_s_orthant(i).to_string()}),
                Algebra::S | Algebra::T => {
                    let (a, b) = match (alpha, beta) {
                        (Some(a), Some(b)) => (a, b),
                        _ => return Err(Error::Input("--alpha and --beta are required for this algebra".into())),
                    };
                    let g = if *algebra == Algebra::S { ko_s_alpha_beta(i, a, b)? } else { ko_t_hat(i, a, b)? };
                    let t = slope_normalize(a, b).ok().map(|n| n.t);
                    let name = if *algebra == Algebra::S { "S" } else { "T" };
                    json!({"algebra": name, "i": i, "alpha": a.to_string(), "beta": b.to_string(), "t": t, "group": g.to_string()})
                }
            };
            Ok((Doc::Json(doc), true))
        }
        Command::Product { model } => {
            if model.len() != 2 {
                return Err(Error::Input(format!("product takes two models, got {}", model.len())));
            }
            let a = ModelSpec::load(&model[0])?;
            let b = ModelSpec::load(&model[1])?;
            let p = product_hamiltonian(&a, &b)?;
            let spec: Value = serde_json::from_str(&p.spec.to_json()?)?;
            Ok((Doc::Json(spec), true))
        }
        Command::Demo { suite: Suite::Paper } => {
            let checks = reference_suite();
            let ok = checks.iter().all(|c| c.pass);
            let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            for c in &checks {
                eprintln!("{:<width$}  expected {:>3}  got {:>3}  {}", c.name, c.expected, c.got, if c.pass { "PASS" } else { "FAIL" });
            }
            let rows = checks
                .iter()
                .map(|c| vec![c.name.to_string(), c.expected.to_string(), c.got.clone(), if c.pass { "PASS" } else { "FAIL" }.into()])
                .collect();
            Ok((Doc::Table { header: vec!["check", "expected", "got", "status"], rows, json: to_value(&checks)? }, ok))
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub expected: i64,
    pub got: String,
    pub pass: bool,
}

fn check(name: &'static str, expected: i64, got: Result<i64>) -> Check {
    match got {
        Ok(v) => Check { name, expected, got: v.to_string(), pass: v == expected },
        Err(e) => Check { name, expected, got: format!("error: {e}"), pass: false },
    }
}

/// Operator indices, flow examples and product corner invariants with their
/// known values.
pub fn reference_suite() -> Vec<Check> {
    let half = Slope::Rational { p: 1, q: 2 };
    let one = Slope::Rational { p: 1, q: 1 };
    let th = |l: i64| Thresholds::for_window(l, 1.0);
    let j = canonical_j(2);
    let corner = |a: &ModelSpec, b: &ModelSpec| -> Result<i64> {
        let p = product_hamiltonian(a, b)?;
        Ok(corner_invariant(&p.spec, &CornerQuery::new(2, 24))?.value.value)
    };
    let kit = || kitaev(0.0, 0.5, 0.5);
    vec![
        check("index of A-hat", -1, a_hat(&half, &one, true, 20).and_then(|a| localized_fredholm_index(&a, &th(20))).map(|v| v.value)),
        check("index of A-check", 1, a_hat(&half, &one, false, 20).and_then(|a| localized_fredholm_index(&a, &th(20))).map(|v| v.value)),
        check("index of G (k=3)", 1, g_operator(3, 8).and_then(|g| localized_fredholm_index(&g, &th(8))).map(|v| v.value)),
        check("sf of s", 1, spectral_flow(&MatrixFamily(|s: f64| diag_real(&[s])), -1.0, 1.0, 8)),
        check("sf of diag(s,-s)", 0, spectral_flow(&MatrixFamily(|s: f64| diag_real(&[s, -s])), -1.0, 1.0, 8)),
        check("qsf of diag(s,-s)", 1, z2_spectral_flow(&MatrixFamily(|s: f64| diag_real(&[s, -s])), 1.0, 8, &j).map(|v| v.value)),
        check("csf D of is", 1, spectral_flow(&MatrixFamily(|s: f64| identity(1) * (I * s) * (-I)), -1.0, 1.0, 8)),
        check("csf C of diag(is,is)", 2, spectral_flow(&MatrixFamily(|s: f64| identity(2) * (I * s) * (-I)), -1.0, 1.0, 8)),
        check("SSH x SSH corner", 1, ssh(0.4, 1.0).and_then(|s| corner(&s, &s))),
        check("Kitaev x Kitaev corner", 1, kit().and_then(|k| corner(&k, &k))),
        check(
            "Kitaev x Kitaev kernel",
            2,
            kit().and_then(|k| {
                let p = product_hamiltonian(&k, &k)?;
                let gap = fredholm_criterion(&p.spec.model, 2, 16, 24, 1e-3)?.into_result()?.min_gap();
                Ok(localized_kernel_count(&build_orthant(&p.spec.model, 2, &[], 24)?, &Thresholds::for_window(24, gap))? as i64)
            }),
        ),
    ]
}
