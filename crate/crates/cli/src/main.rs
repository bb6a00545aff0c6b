//! Command-line front end for the foldgrowth library.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use foldgrowth::apt::{
    apt_certificate, verify_main_theorem, witness_circuit, AptError, TheoremConfig,
    DEFAULT_MAX_SHEETS,
};
use foldgrowth::folding::{complete_to_cover, core_of_loop, fold, FoldError};
use foldgrowth::graph::Path;
use foldgrowth::growth_units::Units;
use foldgrowth::homology::HomologyError;
use foldgrowth::labelled::{combine_based, to_dot, LabelledGraph};
use foldgrowth::path_units::{canonical_f_split, classify_piece};
use foldgrowth::rep::{
    analyze_growth, reverse_rep, Efficient, Representative, DEFAULT_PROBE_DEPTH,
};

#[derive(Parser)]
#[command(
    name = "foldgrowth",
    version,
    about = "Folding, train track iteration and homology growth of free group automorphisms"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Directory for DOT files of the graphs a command builds.
    #[arg(long, global = true, value_name = "DIR")]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Verb {
    /// Parse and validate a representative.
    Validate { file: PathBuf },
    /// Growth degree of every edge, the growth degree eta and the breakpoints.
    Degrees { file: PathBuf },
    /// Tightened image of a path under an iterate of the map.
    Iterate {
        file: PathBuf,
        #[arg(long)]
        path: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Iterate f^q, so the result is f^(k q).
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Iterate the inverse map instead.
        #[arg(long)]
        reverse: bool,
    },
    /// Canonical separation of a path of at most linear growth into growth units.
    Separate {
        file: PathBuf,
        #[arg(long)]
        path: String,
    },
    /// Canonical splitting of a path of degree at least 2.
    Split {
        file: PathBuf,
        #[arg(long)]
        path: String,
    },
    /// Stallings graph of the subgroup generated by closed paths.
    Fold {
        file: PathBuf,
        #[arg(long, required = true)]
        path: Vec<String>,
    },
    /// Completion of the Stallings graph of closed paths to a finite cover.
    Cover {
        file: PathBuf,
        #[arg(long, required = true)]
        path: Vec<String>,
        #[command(flatten)]
        sheets: Sheets,
    },
    /// Immersion carrying the iterates of a circuit, with sampled lengths.
    Apt {
        file: PathBuf,
        /// Circuit to use; defaults to a shortest circuit through the top edge.
        #[arg(long)]
        path: Option<String>,
        #[arg(long)]
        k_max: Option<usize>,
        #[command(flatten)]
        sheets: Sheets,
    },
    /// Finite cover whose homology grows with the degree of the map.
    Verify {
        file: PathBuf,
        #[arg(long)]
        k_max: Option<usize>,
        #[command(flatten)]
        sheets: Sheets,
        /// Largest sheet count of the exhaustive cover search.
        #[arg(long, default_value_t = foldgrowth::apt::theorem::DEFAULT_FALLBACK_BOUND)]
        search_bound: usize,
        /// Skip the exhaustive search when the constructed cover succeeds.
        #[arg(long)]
        no_confirm: bool,
        /// Worker threads of the cover search.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args, Clone, Copy)]
struct Sheets {
    #[arg(long, env = "FOLDGROWTH_MAX_SHEETS", default_value_t = DEFAULT_MAX_SHEETS)]
    max_sheets: usize,
}

/// Validation failures exit with 1, resource bounds with 2.
enum Failure {
    Invalid(String),
    Resource(String),
}

impl From<AptError> for Failure {
    fn from(e: AptError) -> Failure {
        match e {
            AptError::Resource(_)
            | AptError::Homology(HomologyError::Bound(_))
            | AptError::Fold(FoldError::BoundExceeded { .. }) => Failure::Resource(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn invalid(e: impl ToString) -> Failure {
    Failure::Invalid(e.to_string())
}

struct Report {
    json: Value,
    table: String,
    ok: bool,
}

impl Report {
    fn new(json: Value) -> Report {
        let table = table(&json);
        Report {
            json,
            table,
            ok: true,
        }
    }

    fn with_table(json: Value, table: String) -> Report {
        Report {
            json,
            table,
            ok: true,
        }
    }
}

/// `key  value` lines; nested values are printed as compact JSON.
fn table(v: &Value) -> String {
    match v {
        Value::Object(m) => {
            let width = m.keys().map(|k| k.len()).max().unwrap_or(0);
            m.iter()
                .map(|(k, v)| {
                    let shown = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    format!("{k:<width$}  {shown}\n")
                })
                .collect()
        }
        other => format!("{other}\n"),
    }
}

fn load(file: &FsPath) -> Result<Representative, Failure> {
    let text = fs::read_to_string(file).map_err(|e| invalid(format!("{}: {e}", file.display())))?;
    Representative::parse(&text).map_err(|e| invalid(format!("{}: {e}", file.display())))
}

fn efficient(rep: &Representative) -> Result<Efficient, Failure> {
    Efficient::new(rep).map_err(invalid)
}

fn parse_path(rep: &Representative, text: &str) -> Result<Path, Failure> {
    rep.path(text).map_err(invalid)
}

fn write_dot(
    dir: &Option<PathBuf>,
    name: &str,
    g: &LabelledGraph,
    names: &[String],
) -> Result<Option<String>, Failure> {
    let Some(dir) = dir else { return Ok(None) };
    fs::create_dir_all(dir).map_err(|e| invalid(format!("{}: {e}", dir.display())))?;
    let file = dir.join(format!("{name}.dot"));
    fs::write(&file, to_dot(&g.canonical_relabel(), names))
        .map_err(|e| invalid(format!("{}: {e}", file.display())))?;
    Ok(Some(file.display().to_string()))
}

fn validate(file: &FsPath) -> Result<Report, Failure> {
    let rep = match load(file) {
        Ok(r) => r,
        Err(Failure::Invalid(msg)) => {
            let mut r = Report::new(json!({ "valid": false, "error": msg }));
            r.ok = false;
            return Ok(r);
        }
        Err(other) => return Err(other),
    };
    let info = analyze_growth(&rep);
    let (eta, violations, error) = match &info {
        Ok(i) => (Some(i.eta), i.violations.clone(), None),
        Err(e) => (None, Vec::new(), Some(e.to_string())),
    };
    let valid = error.is_none() && violations.is_empty();
    let mut r = Report::new(json!({
        "valid": valid,
        "name": rep.name,
        "rank": rep.rank(),
        "vertices": rep.graph.vertex_count(),
        "edges": rep.edge_count(),
        "eta": eta,
        "warnings": rep.warnings,
        "violations": violations,
        "error": error,
    }));
    r.ok = valid;
    Ok(r)
}

fn degrees(file: &FsPath) -> Result<Report, Failure> {
    let rep = load(file)?;
    let info = analyze_growth(&rep).map_err(invalid)?;
    Ok(Report::new(info.to_json(&rep)))
}

fn iterate(
    file: &FsPath,
    path: &str,
    k: usize,
    q: usize,
    reverse: bool,
) -> Result<Report, Failure> {
    let rep = load(file)?;
    let p = parse_path(&rep, path)?;
    let map = if reverse {
        reverse_rep(&rep).map_err(invalid)?
    } else {
        rep.map.clone()
    };
    let image = map.iterate(&p, k * q);
    let shown = rep.show(&image);
    Ok(Report::with_table(
        json!({ "path": rep.show(&p.tighten()), "power": k * q, "reverse": reverse, "image": shown, "length": image.len() }),
        format!("{shown}\n"),
    ))
}

fn separate(file: &FsPath, path: &str) -> Result<Report, Failure> {
    let rep = load(file)?;
    let eff = efficient(&rep)?;
    let p = parse_path(&eff.rep, path)?;
    let units = Units::new(&eff).map_err(invalid)?;
    let sep = units.separate(&p).map_err(invalid)?;
    let names = &eff.rep.edge_names;
    let tokens: Vec<String> = sep.units.iter().map(|u| u.token(names)).collect();
    let joined: Vec<String> = sep
        .units
        .iter()
        .map(|u| u.path.display(names).to_string())
        .collect();
    let joined = joined.join(" ◇ ");
    Ok(Report::with_table(
        json!({
            "units": tokens,
            "separation": joined,
            "passive": sep.units.iter().all(|u| u.kind.is_passive()),
        }),
        format!("{}\n{joined}\n", tokens.join(" ")),
    ))
}

fn split(file: &FsPath, path: &str) -> Result<Report, Failure> {
    let rep = load(file)?;
    let eff = efficient(&rep)?;
    let p = parse_path(&eff.rep, path)?;
    let d = eff.path_degree(&p);
    let pieces = canonical_f_split(&eff, &p, DEFAULT_PROBE_DEPTH).map_err(invalid)?;
    let mut shown = Vec::new();
    let mut items = Vec::new();
    for piece in &pieces {
        let pd = eff.path_degree(piece);
        let unit = (pd >= 2 && pd == d)
            .then(|| classify_piece(&eff, piece, d))
            .flatten()
            .map(|u| format!("{:?}", u.kind));
        shown.push(format!("{} [{pd}]", eff.rep.show(piece)));
        items.push(json!({ "path": eff.rep.show(piece), "degree": pd, "unit": unit }));
    }
    let joined = shown.join(" * ");
    Ok(Report::with_table(
        json!({ "degree": d, "pieces": items, "split": joined }),
        format!("{joined}\n"),
    ))
}

fn subgroup_graph(rep: &Representative, paths: &[String]) -> Result<LabelledGraph, Failure> {
    let mut parts = Vec::new();
    let mut base_vertex = None;
    for text in paths {
        let p = parse_path(rep, text)?;
        if !p.is_closed() || p.is_trivial() {
            return Err(invalid(format!(
                "`{text}` is not a non-trivial closed path"
            )));
        }
        if *base_vertex.get_or_insert(p.start()) != p.start() {
            return Err(invalid("all paths must start at the same vertex"));
        }
        parts.push(core_of_loop(&rep.graph, &p).map_err(invalid)?);
    }
    let wedge = combine_based(&parts).map_err(invalid)?;
    let f = fold(&wedge);
    let v = f.vertex_map[wedge.initial_point.unwrap()];
    Ok(f.graph.with_points(Some(v), Some(v)).trim())
}

fn graph_summary(g: &LabelledGraph) -> Value {
    json!({
        "vertices": g.carrier.vertex_count(),
        "edges": g.carrier.edge_count(),
        "rank": g.carrier.rank(),
        "immersion": g.is_immersion(),
        "cover": g.is_cover(),
    })
}

fn fold_verb(file: &FsPath, paths: &[String], dot: &Option<PathBuf>) -> Result<Report, Failure> {
    let rep = load(file)?;
    let g = subgroup_graph(&rep, paths)?;
    let mut out = graph_summary(&g);
    out["dot"] = json!(write_dot(dot, "fold", &g, &rep.edge_names)?);
    Ok(Report::new(out))
}

fn cover_verb(
    file: &FsPath,
    paths: &[String],
    max_sheets: usize,
    dot: &Option<PathBuf>,
) -> Result<Report, Failure> {
    let rep = load(file)?;
    let eff = efficient(&rep)?;
    let g = subgroup_graph(&eff.rep, paths)?;
    let sheets = g.fiber_sizes().into_iter().max().unwrap_or(1);
    if sheets > max_sheets {
        return Err(Failure::Resource(format!(
            "the cover needs {sheets} sheets, over the bound {max_sheets}"
        )));
    }
    let (cover, cert) = complete_to_cover(&g).map_err(invalid)?;
    let mut out = graph_summary(&cover);
    out["sheets"] = json!(cert.sheets);
    out["homology"] = match foldgrowth::apt::cover_homology(&eff, &cover, 100_000) {
        Ok(w) => json!({ "power": w.power, "rank": w.rank, "class": w.class.to_json() }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    out["dot"] = json!(write_dot(dot, "cover", &cover, &eff.rep.edge_names)?);
    Ok(Report::new(out))
}

fn apt_verb(
    file: &FsPath,
    path: &Option<String>,
    k_max: Option<usize>,
    max_sheets: usize,
    dot: &Option<PathBuf>,
) -> Result<Report, Failure> {
    let rep = load(file)?;
    let eff = efficient(&rep)?;
    let circuit = match path {
        Some(text) => parse_path(&eff.rep, text)?,
        None => witness_circuit(&eff)?,
    };
    if !circuit.is_closed() || !circuit.is_cyclically_reduced() {
        return Err(invalid(format!(
            "`{}` is not a cyclically reduced circuit",
            eff.rep.show(&circuit)
        )));
    }
    let cfg = TheoremConfig {
        k_max,
        max_sheets,
        ..TheoremConfig::default()
    };
    let (cert, notes) = apt_certificate(&eff, &circuit, &cfg)?;
    let mut out = cert.to_json();
    out["eta"] = json!(eff.eta);
    out["circuit"] = json!(eff.rep.show(&circuit));
    out["rho"] = json!(eff.rep.show(&cert.rho));
    out["sheets"] = json!(foldgrowth::apt::sigma::max_fiber(&cert.sigma));
    out["notes"] = json!(notes);
    out["dot"] = json!(write_dot(dot, "sigma", &cert.sigma, &eff.rep.edge_names)?);
    Ok(Report::new(out))
}

fn verify_verb(
    file: &FsPath,
    cfg: TheoremConfig,
    dot: &Option<PathBuf>,
) -> Result<Report, Failure> {
    let rep = load(file)?;
    let names = efficient(&rep)?.rep.edge_names;
    let cert = verify_main_theorem(&rep, &cfg)?;
    let mut out = cert.to_json();
    let mut files = Vec::new();
    if let Some(a) = &cert.apt {
        files.extend(write_dot(dot, "sigma", &a.sigma, &names)?);
    }
    let chosen = match cert.route {
        foldgrowth::apt::Route::Pipeline => cert.pipeline.as_ref(),
        foldgrowth::apt::Route::Fallback => cert.fallback.as_ref(),
        _ => None,
    };
    if let Some(w) = chosen {
        files.extend(write_dot(dot, "cover", &w.cover, &names)?);
    }
    out["dot"] = json!(files);
    let mut r = Report::new(out);
    if !cert.holds() {
        r.ok = false;
    }
    Ok(r)
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.verb {
        Verb::Validate { file } => validate(file),
        Verb::Degrees { file } => degrees(file),
        Verb::Iterate {
            file,
            path,
            k,
            q,
            reverse,
        } => iterate(file, path, *k, *q, *reverse),
        Verb::Separate { file, path } => separate(file, path),
        Verb::Split { file, path } => split(file, path),
        Verb::Fold { file, path } => fold_verb(file, path, &cli.dot),
        Verb::Cover { file, path, sheets } => cover_verb(file, path, sheets.max_sheets, &cli.dot),
        Verb::Apt {
            file,
            path,
            k_max,
            sheets,
        } => apt_verb(file, path, *k_max, sheets.max_sheets, &cli.dot),
        Verb::Verify {
            file,
            k_max,
            sheets,
            search_bound,
            no_confirm,
            jobs,
        } => {
            let cfg = TheoremConfig {
                k_max: *k_max,
                max_sheets: sheets.max_sheets,
                fallback_bound: *search_bound,
                confirm: !no_confirm,
                jobs: (*jobs).max(1),
                ..TheoremConfig::default()
            };
            verify_verb(file, cfg, &cli.dot)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report.json).unwrap()),
                Format::Table => print!("{}", report.table),
            }
            if report.ok {
                ExitCode::SUCCESS
            } else if matches!(cli.verb, Verb::Verify { .. }) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("resource error: {msg}");
            ExitCode::from(2)
        }
    }
}
