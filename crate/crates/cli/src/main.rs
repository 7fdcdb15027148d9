use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use deltaprime::experiments::{run_experiment, EXPERIMENTS};
use deltaprime::export::{eigen_csv, matrix_text};
use deltaprime::report::num;
use deltaprime::{parse_config, CliError, Config, Format};
use deltaprime_core::closedform::{
    halfplane_bottoms, interval_delta_prime, m_functions, minimax_star, omega_star, star_delta_bottom, wedge_trace_bound,
    wedge_trace_bound_split,
};
use deltaprime_core::eigen::lowest_eigenpairs;
use deltaprime_core::forms::{assemble_delta, assemble_delta_prime, DiscreteForm};
use deltaprime_core::geometry::{adjacency_graph, chromatic_colouring, edge_constant, is_admissible};
use deltaprime_core::mesh::triangulate;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "deltaprime", version, about = "δ and δ′ interaction forms on planar partitions")]
struct Cli {
    /// Output format; defaults to the config's `format` (json) or text for closed-form.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorArg {
    Delta,
    DeltaPrime,
}

#[derive(Subcommand)]
enum Command {
    /// Partition summaries.
    Partition {
        #[command(subcommand)]
        action: PartitionAction,
    },
    /// Lowest eigenvalues of one discrete form.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        operator: OperatorArg,
    },
    /// Analytic constants. Names: halfplane-bottoms, wedge-trace-bound,
    /// wedge-trace-bound-split, star-delta-bottom, m-functions, omega-star,
    /// minimax, interval-delta-prime, edge-constant.
    ClosedForm {
        name: String,
        #[arg(allow_negative_numbers = true)]
        params: Vec<f64>,
    },
    /// Run a named experiment and check its assertions.
    Verify {
        experiment: String,
        #[arg(long)]
        config: PathBuf,
    },
    /// Plain-text mesh or matrix dumps.
    Export {
        #[command(subcommand)]
        what: ExportWhat,
    },
}

#[derive(Subcommand)]
enum PartitionAction {
    Info {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExportWhat {
    Mesh {
        #[arg(long)]
        config: PathBuf,
    },
    Matrix {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "delta")]
        operator: OperatorArg,
        /// `a` for the form matrix, `m` for the mass matrix.
        #[arg(long, default_value = "a")]
        which: String,
    },
}

enum Outcome {
    Ok(String),
    AssertionFailure(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Ok(s)) => {
            emit(&s);
            ExitCode::SUCCESS
        }
        Ok(Outcome::AssertionFailure(s)) => {
            emit(&s);
            eprintln!("deltaprime: assertion failure");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("deltaprime: {e}");
            ExitCode::from(1)
        }
    }
}

// A closed pipe (`| head`) is not an error worth a panic.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn load(path: &PathBuf) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn pick(arg: Option<FormatArg>, fallback: Format) -> Format {
    match arg {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Text) => Format::Text,
        Some(FormatArg::Csv) => Format::Csv,
        None => fallback,
    }
}

fn form(cfg: &Config, op: OperatorArg) -> Result<DiscreteForm, CliError> {
    let p = cfg.partition()?;
    let d = cfg.interaction(&p)?;
    let mesh = triangulate(&p, cfg.levels)?;
    Ok(match op {
        OperatorArg::Delta => assemble_delta(&mesh, &d, cfg.boundary)?,
        OperatorArg::DeltaPrime => assemble_delta_prime(&mesh, &d, cfg.boundary)?,
    })
}

fn json_out(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Partition { action: PartitionAction::Info { config } } => {
            let cfg = load(&config)?;
            partition_info(&cfg, pick(cli.format, cfg.format))
        }
        Command::Spectrum { config, operator } => {
            let cfg = load(&config)?;
            let f = form(&cfg, operator)?;
            let s = lowest_eigenpairs(&f.a, &f.m, &cfg.solver_options())?;
            let out = match pick(cli.format, cfg.format) {
                Format::Csv => eigen_csv(&s.eigenvalues, &s.residuals),
                Format::Text => {
                    let mut t = format!("dofs {}\niterations {}\nconverged {}\n", s.dimension, s.iterations, s.converged);
                    for (i, (v, r)) in s.eigenvalues.iter().zip(&s.residuals).enumerate() {
                        t.push_str(&format!("{} {} {}\n", i + 1, num(*v), num(*r)));
                    }
                    t
                }
                Format::Json => json_out(&json!({
                    "operator": match operator { OperatorArg::Delta => "delta", OperatorArg::DeltaPrime => "delta_prime" },
                    "config": cfg.source,
                    "spectrum": s,
                })),
            };
            Ok(if s.converged { Outcome::Ok(out) } else { Outcome::AssertionFailure(out) })
        }
        Command::ClosedForm { name, params } => closed_form(&name, &params, pick(cli.format, Format::Text)).map(Outcome::Ok),
        Command::Verify { experiment, config } => {
            if !EXPERIMENTS.contains(&experiment.as_str()) {
                return Err(CliError::Usage(format!("unknown experiment `{experiment}`; expected one of: {}", EXPERIMENTS.join(", "))));
            }
            let cfg = load(&config)?;
            let report = run_experiment(&experiment, &cfg)?;
            let out = match pick(cli.format, cfg.format) {
                Format::Json => format!("{}\n", report.to_json()),
                Format::Text => report.to_text(),
                Format::Csv => report.to_csv(),
            };
            Ok(if report.passed { Outcome::Ok(out) } else { Outcome::AssertionFailure(out) })
        }
        Command::Export { what: ExportWhat::Mesh { config } } => {
            let cfg = load(&config)?;
            let mesh = triangulate(&cfg.partition()?, cfg.levels)?;
            Ok(Outcome::Ok(mesh.export_text()))
        }
        Command::Export { what: ExportWhat::Matrix { config, operator, which } } => {
            let cfg = load(&config)?;
            let f = form(&cfg, operator)?;
            let m = match which.as_str() {
                "a" => &f.a,
                "m" => &f.m,
                other => return Err(CliError::Usage(format!("--which expects `a` or `m`, got `{other}`"))),
            };
            Ok(Outcome::Ok(matrix_text(m)))
        }
    }
}

fn partition_info(cfg: &Config, format: Format) -> Result<Outcome, CliError> {
    let p = cfg.partition()?;
    let d = cfg.interaction(&p)?;
    let col = chromatic_colouring(&adjacency_graph(&p))?;
    let mut admissible = true;
    let mut rows = Vec::new();
    for i in p.interfaces() {
        let (a, b) = (d.alpha(i.id)?, d.beta(i.id)?);
        admissible &= is_admissible(col.chi, a, b)?;
        rows.push((i.id, i.k, i.l, i.length, a, b));
    }
    let c = if col.chi >= 2 { Some(edge_constant(col.chi)?) } else { None };
    let out = match format {
        Format::Json => json_out(&json!({
            "geometry": cfg.geometry.name(),
            "subdomains": p.subdomain_count(),
            "chromatic_number": col.chi,
            "colours": col.phi,
            "edge_constant": c,
            "admissible": admissible,
            "interfaces": rows.iter().map(|r| json!({"id": r.0, "k": r.1, "l": r.2, "length": r.3, "alpha": r.4, "beta": r.5})).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut t = format!("subdomains {}\nchromatic number {}\n", p.subdomain_count(), col.chi);
            if let Some(c) = c {
                t.push_str(&format!("edge constant {c}\n"));
            }
            t.push_str(&format!("admissible {admissible}\n"));
            for r in &rows {
                t.push_str(&format!("interface {} between {} and {}: length {} alpha {} beta {}\n", r.0, r.1, r.2, r.3, r.4, r.5));
            }
            t
        }
        Format::Csv => {
            let mut t = String::from("id,k,l,length,alpha,beta\n");
            for r in &rows {
                t.push_str(&format!("{},{},{},{},{},{}\n", r.0, r.1, r.2, r.3, r.4, r.5));
            }
            t
        }
    };
    Ok(Outcome::Ok(out))
}

fn closed_form(name: &str, params: &[f64], format: Format) -> Result<String, CliError> {
    let need = |n: usize, usage: &str| -> Result<(), CliError> {
        if params.len() == n {
            Ok(())
        } else {
            Err(CliError::Usage(format!("closed-form {name} expects {usage}")))
        }
    };
    let values: Vec<(&str, f64)> = match name {
        "halfplane-bottoms" => {
            need(2, "ALPHA BETA")?;
            let (d, dp) = halfplane_bottoms(params[0], params[1])?;
            vec![("delta", d), ("delta_prime", dp)]
        }
        "wedge-trace-bound" => {
            need(2, "GAMMA PHI")?;
            vec![("bound", wedge_trace_bound(params[0], params[1])?)]
        }
        "wedge-trace-bound-split" => {
            need(2, "GAMMA PHI")?;
            vec![("bound", wedge_trace_bound_split(params[0], params[1])?)]
        }
        "star-delta-bottom" => {
            need(1, "ALPHA")?;
            vec![("bottom", star_delta_bottom(params[0])?)]
        }
        "m-functions" => {
            need(2, "OMEGA T")?;
            let (m1, m2) = m_functions(params[0], params[1])?;
            vec![("m1", m1), ("m2", m2)]
        }
        "omega-star" => {
            need(1, "T")?;
            vec![("omega", omega_star(params[0])?)]
        }
        "interval-delta-prime" => {
            need(2, "BETA L")?;
            let r = interval_delta_prime(params[0], params[1])?;
            vec![("epsilon", r.epsilon), ("k", r.k_rate), ("gap_to_threshold", r.gap_to_threshold)]
        }
        "edge-constant" => {
            need(1, "CHI")?;
            let chi = params[0];
            if chi.fract() != 0.0 || chi < 0.0 {
                return Err(CliError::Usage("edge-constant expects a non-negative integer".into()));
            }
            vec![("edge_constant", edge_constant(chi as usize)?)]
        }
        "minimax" => {
            need(0, "no parameters")?;
            let mm = minimax_star(1e-12)?;
            return Ok(match format {
                Format::Json => json_out(&serde_json::to_value(&mm).expect("report serializes")),
                _ => {
                    let v = serde_json::to_value(&mm).expect("report serializes");
                    let mut t = String::new();
                    let sep = if matches!(format, Format::Csv) { "," } else { " " };
                    if matches!(format, Format::Csv) {
                        t.push_str("name,value\n");
                    }
                    for (k, x) in v.as_object().expect("struct serializes to an object") {
                        t.push_str(&format!("{k}{sep}{x}\n"));
                    }
                    t
                }
            });
        }
        _ => return Err(CliError::Usage(format!("unknown closed-form name `{name}`"))),
    };
    Ok(match format {
        Format::Text => {
            let line: Vec<String> = values.iter().map(|(_, v)| num(*v)).collect();
            format!("{}\n", line.join(" "))
        }
        Format::Csv => {
            let mut t = String::from("name,value\n");
            for (k, v) in &values {
                t.push_str(&format!("{k},{}\n", num(*v)));
            }
            t
        }
        Format::Json => {
            let obj: serde_json::Map<String, Value> = values.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            json_out(&Value::Object(obj))
        }
    })
}
