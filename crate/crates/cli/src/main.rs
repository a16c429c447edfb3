//! `osclab`: verification suites, geodesic integration and isometry tools for
//! oscillator groups.
//!
//! Exit codes: 0 when every asserted check passes, 1 on a failed check or a
//! failed computation, 2 on bad input.

mod error;
mod scenario;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use osclab_core::flow::FlowForm;
use osclab_core::report::Report;
use serde_json::Value;

use crate::error::CliError;
use crate::scenario::{Artifacts, Frequency, Scenario, StateSpec, Task};

#[derive(Parser, Debug)]
#[command(name = "osclab", version, about = "Numerical geometry of oscillator groups")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here (a `.csv` path receives the trajectory, the report goes next to it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report on stdout instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct LambdaArg {
    /// Frequencies, e.g. `1,2,3`, `1,sqrt(2),3` or `2/3,1`.
    #[arg(long, default_value = "1")]
    lambda: String,
}

#[derive(Args, Debug, Clone)]
struct MetricArgs {
    #[command(flatten)]
    lambda: LambdaArg,
    /// Descriptor JSON, a kind name (`identity`, `u1_dim4`, `u2_dim4`, `lattice_dim4`) or a file.
    #[arg(long, default_value = "identity")]
    metric: String,
}

#[derive(Args, Debug, Clone)]
struct FlowArgs {
    #[command(flatten)]
    metric: MetricArgs,
    /// `gamma1:c=1,rho=1`, `random` or comma separated coordinates.
    #[arg(long)]
    x0: String,
    #[arg(long, conflicts_with = "t_span")]
    t_max: Option<f64>,
    /// `t0,t1`; integrating backwards is allowed.
    #[arg(long, value_parser = parse_pair)]
    t_span: Option<(f64, f64)>,
    /// `euler_u`, `body` or `lax`.
    #[arg(long, default_value = "euler_u", value_parser = parse_form)]
    form: FlowForm,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct ProbeArgs {
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Extra initial state tried before the random ones; repeatable.
    #[arg(long = "seed-state")]
    seed_state: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct IsoArgs {
    #[command(flatten)]
    lambda: LambdaArg,
    /// Isometry JSON (inline or file); random when omitted.
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct PolarArgs {
    #[command(flatten)]
    lambda: LambdaArg,
    #[arg(long)]
    u: Option<String>,
    /// Group element `t,s,re_1,im_1,…`.
    #[arg(long)]
    g: String,
}

#[derive(Args, Debug, Clone)]
struct LatticeArgs {
    #[arg(long)]
    lambda: String,
    /// Reject float input instead of answering undecidable.
    #[arg(long)]
    exact: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structure constants, Jacobi identity and distinguished subalgebras.
    AlgebraCheck {
        #[command(flatten)]
        lambda: LambdaArg,
        #[arg(long, default_value_t = 1000)]
        triples: usize,
    },
    /// Signature, conditioning and completeness conditions of a metric.
    MetricInfo(MetricArgs),
    /// Levi-Civita residuals and curvature norms.
    ConnectionReport(MetricArgs),
    /// Local symmetry residual.
    LocsymCheck(MetricArgs),
    /// Integrate one geodesic; `--out traj.csv` saves the trajectory.
    GeodesicIntegrate(FlowArgs),
    /// Random search for incomplete geodesics.
    CompletenessProbe(ProbeArgs),
    /// Check an isotropy element and the polar closed form.
    IsometryVerify(IsoArgs),
    /// Dimension of the isometry group.
    IsometryDim(LambdaArg),
    /// Lattice existence for exact frequencies.
    LatticeCheck(LatticeArgs),
    /// Algebra, metric, connection, local symmetry and a short probe.
    FullReport(ProbeArgs),
    /// `connection report`.
    Connection {
        #[command(subcommand)]
        command: ConnectionCommand,
    },
    /// `isometry dim | verify | polar`.
    Isometry {
        #[command(subcommand)]
        command: IsometryCommand,
    },
    /// `lattice check`.
    Lattice {
        #[command(subcommand)]
        command: LatticeCommand,
    },
    /// Run a scenario file.
    Run { scenario: PathBuf },
}

#[derive(Subcommand, Debug)]
enum ConnectionCommand {
    Report(MetricArgs),
}

#[derive(Subcommand, Debug)]
enum IsometryCommand {
    Dim(LambdaArg),
    Verify(IsoArgs),
    Polar(PolarArgs),
}

#[derive(Subcommand, Debug)]
enum LatticeCommand {
    Check(LatticeArgs),
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `t0,t1`")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_form(s: &str) -> Result<FlowForm, String> {
    match s {
        "body" => Ok(FlowForm::Body),
        "euler_u" | "euler-u" | "euler" => Ok(FlowForm::EulerU),
        "lax" => Ok(FlowForm::Lax),
        other => Err(format!("unknown flow form `{other}` (body, euler_u, lax)")),
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn frequencies(text: &str) -> Vec<Frequency> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<i64>() {
                Ok(v) => Frequency::Int(v),
                Err(_) => Frequency::Text(s.to_string()),
            }
        })
        .collect()
}

/// Inline JSON, or the contents of a file when the argument names one.
fn json_or_file(text: &str, what: &str) -> Result<Value, CliError> {
    let t = text.trim();
    let body = if t.starts_with('{') { t.to_string() } else { read_file(Path::new(t))? };
    serde_json::from_str(&body).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

fn metric_value(text: &str) -> Result<Value, CliError> {
    let t = text.trim();
    if t.starts_with('{') || Path::new(t).is_file() {
        json_or_file(t, "metric descriptor")
    } else {
        Ok(Value::String(t.to_string()))
    }
}

fn with_metric(task: Task, m: &MetricArgs) -> Result<Scenario, CliError> {
    let mut sc = Scenario::new(task);
    sc.lambda = frequencies(&m.lambda.lambda);
    sc.metric = Some(metric_value(&m.metric)?);
    Ok(sc)
}

fn with_lambda(task: Task, l: &LambdaArg) -> Scenario {
    let mut sc = Scenario::new(task);
    sc.lambda = frequencies(&l.lambda);
    sc
}

fn probe_scenario(task: Task, p: &ProbeArgs) -> Result<Scenario, CliError> {
    let mut sc = with_metric(task, &p.metric)?;
    sc.params.samples = p.samples;
    sc.params.t_max = p.t_max;
    sc.params.seeded = p.seed_state.iter().cloned().map(StateSpec::Text).collect();
    Ok(sc)
}

fn iso_scenario(task: Task, lambda: &LambdaArg, u: Option<&str>) -> Result<Scenario, CliError> {
    let mut sc = with_lambda(task, lambda);
    sc.params.isometry = u.map(|u| json_or_file(u, "isometry")).transpose()?;
    Ok(sc)
}

fn lattice_scenario(l: &LatticeArgs) -> Scenario {
    let mut sc = Scenario::new(Task::LatticeCheck);
    sc.lambda = l.lambda.split(',').map(|s| Frequency::Text(s.trim().to_string())).collect();
    sc.params.exact = l.exact;
    sc
}

fn scenario(cmd: &Command) -> Result<Scenario, CliError> {
    Ok(match cmd {
        Command::AlgebraCheck { lambda, triples } => {
            let mut sc = with_lambda(Task::AlgebraCheck, lambda);
            sc.params.triples = *triples;
            sc
        }
        Command::MetricInfo(m) => with_metric(Task::MetricInfo, m)?,
        Command::ConnectionReport(m) | Command::Connection { command: ConnectionCommand::Report(m) } => {
            with_metric(Task::ConnectionReport, m)?
        }
        Command::LocsymCheck(m) => with_metric(Task::LocsymCheck, m)?,
        Command::GeodesicIntegrate(f) => {
            let mut sc = with_metric(Task::GeodesicIntegrate, &f.metric)?;
            sc.params.x0 = Some(StateSpec::Text(f.x0.clone()));
            sc.params.t_max = f.t_max;
            sc.params.t_span = f.t_span.map(|(a, b)| [a, b]);
            sc.params.form = f.form;
            if let Some(r) = f.rtol {
                sc.params.tolerances.rtol = r;
            }
            if let Some(a) = f.atol {
                sc.params.tolerances.atol = a;
            }
            sc
        }
        Command::CompletenessProbe(p) => probe_scenario(Task::CompletenessProbe, p)?,
        Command::FullReport(p) => probe_scenario(Task::FullReport, p)?,
        Command::IsometryVerify(a) | Command::Isometry { command: IsometryCommand::Verify(a) } => {
            let mut sc = iso_scenario(Task::IsometryVerify, &a.lambda, a.u.as_deref())?;
            sc.params.samples = a.samples;
            sc
        }
        Command::IsometryDim(l) | Command::Isometry { command: IsometryCommand::Dim(l) } => {
            with_lambda(Task::IsometryDim, l)
        }
        Command::Isometry { command: IsometryCommand::Polar(p) } => {
            let mut sc = iso_scenario(Task::IsometryPolar, &p.lambda, p.u.as_deref())?;
            sc.params.g = Some(p.g.clone());
            sc
        }
        Command::LatticeCheck(l) | Command::Lattice { command: LatticeCommand::Check(l) } => lattice_scenario(l),
        Command::Run { scenario } => Scenario::load(scenario)?,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn summary(report: &Report) -> String {
    if report.task == "isometry-dim" {
        if let Some(d) = report.data.get("dim") {
            return format!("{d}\n");
        }
    }
    let mut s = format!("task {}  lambda {:?}\n", report.task, report.lambda);
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        s.push_str(&format!("{verdict}  {:<40} residual {:.3e}  tolerance {:.1e}\n", c.name, c.residual, c.tolerance));
    }
    for key in ["status", "verdict", "completeness_verdict", "locsym_residual", "flatness_residual", "dim", "admits_lattice"] {
        if let Some(v) = report.data.get(key) {
            s.push_str(&format!("{key}: {v}\n"));
        }
    }
    if let Some(Value::Object(p)) = report.data.get("probe") {
        for key in ["blown_up_samples", "earliest_blowup", "verdict"] {
            if let Some(v) = p.get(key) {
                s.push_str(&format!("{key}: {v}\n"));
            }
        }
    }
    s.push_str(if report.pass { "result: PASS\n" } else { "result: FAIL\n" });
    s
}

fn emit(cli: &Cli, art: &Artifacts) -> Result<(), CliError> {
    let json = art.report.to_json();
    match (&cli.out, &art.csv) {
        (Some(out), Some(csv)) => {
            let (csv_path, json_path) = if out.extension().is_some_and(|e| e == "csv") {
                (out.clone(), out.with_extension("json"))
            } else {
                (out.with_extension("csv"), out.clone())
            };
            write(&csv_path, csv)?;
            write(&json_path, &json)?;
        }
        (Some(out), None) => write(out, &json)?,
        (None, _) => {}
    }
    if cli.json {
        print!("{json}");
    } else {
        print!("{}", summary(&art.report));
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let mut sc = scenario(&cli.command)?;
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    let art = scenario::run(&sc)?;
    emit(cli, &art)?;
    Ok(art.report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("osclab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
