//! `pathsum` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid circuit, 2 I/O failure, 64 usage error.

mod output;
mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use pathsum::circuit::ElementKind;
use pathsum::dsl::{eval_phase_expr, parse, serialize};
use pathsum::entanglement::{arm_detectors, first_pair_source, joint_table, ProbabilityTable};
use pathsum::interference::{fringe_sweep, single_source};
use pathsum::montecarlo::{
    binomial_sigma, coincidence_counts, sample_events, singles_counts, write_events_csv,
};
use pathsum::scenarios::{
    build_jaeger, build_lemos_with, build_mzi, jaeger_table, lemos, lemos_image_with,
    lemos_probabilities, mzi, write_grid_csv, LemosOptions, PhaseImage,
};
use pathsum::{Arm, Circuit, Error};

pub use output::fmt_sig;
pub use report::{circuit_digest, Computation, RunReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// One diagnostic line per problem.
    Invalid(Vec<String>),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownDetector(_)
            | Error::UnknownShifter(_)
            | Error::UnknownSource(_)
            | Error::UnknownElement(_)
            | Error::NotSinglePhoton(_)
            | Error::NotPairSource(_)
            | Error::InvalidImage(_) => CliError::Usage(e.to_string()),
            other => CliError::Invalid(vec![other.to_string()]),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Probabilities are squared amplitudes, so a true zero comes back as
/// round-off of order 1e-33. Reported values below 1e-24 are shown as 0.
fn reported(p: f64) -> f64 {
    if p.abs() < 1e-24 {
        0.0
    } else {
        p
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "pathsum",
    version,
    about = "Path-sum simulator for photonic interferometers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and check a circuit file; prints OK or one diagnostic per line.
    Validate { file: PathBuf },
    /// Tabulate detection probabilities while stepping one phase shifter.
    Sweep(SweepArgs),
    /// Sample pair detection events and summarize coincidence statistics.
    Sample(SampleArgs),
    /// Emit a built-in setup with its analytic results.
    Scenario(ScenarioArgs),
}

#[derive(Debug, Clone)]
struct PhaseRange {
    shifter: String,
    start: f64,
    end: f64,
    steps: usize,
}

impl PhaseRange {
    /// `steps` evenly spaced values from `start` to `end`, both included.
    fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| self.start + step * k as f64)
            .collect()
    }
}

fn phase_arg(text: &str) -> Result<f64, String> {
    eval_phase_expr(text.trim()).map_err(|e| format!("bad phase `{text}`: {}", e.message))
}

fn parse_range(text: &str) -> Result<PhaseRange, String> {
    let (name, range) = text
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=START:END:STEPS, got `{text}`"))?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, end, steps] = parts[..] else {
        return Err(format!("expected START:END:STEPS, got `{range}`"));
    };
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| format!("STEPS must be a positive integer, got `{steps}`"))?;
    if steps == 0 {
        return Err("STEPS must be at least 1".into());
    }
    Ok(PhaseRange {
        shifter: name.trim().to_owned(),
        start: phase_arg(start)?,
        end: phase_arg(end)?,
        steps,
    })
}

#[derive(Debug, Clone)]
struct Assignment {
    shifter: String,
    value: f64,
}

fn parse_assignment(text: &str) -> Result<Assignment, String> {
    let (name, expr) = text
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=EXPR, got `{text}`"))?;
    Ok(Assignment {
        shifter: name.trim().to_owned(),
        value: phase_arg(expr)?,
    })
}

#[derive(Debug, Clone)]
struct DetectorPair {
    arm1: String,
    arm2: String,
}

fn parse_detector_pair(text: &str) -> Result<DetectorPair, String> {
    match text.split(',').map(str::trim).collect::<Vec<_>>()[..] {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok(DetectorPair {
            arm1: a.to_owned(),
            arm2: b.to_owned(),
        }),
        _ => Err(format!("expected D1,D2, got `{text}`")),
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("target").required(true).args(["joint", "detector"])))]
struct SweepArgs {
    file: PathBuf,
    /// Shifter and range, e.g. `F=0:2*pi:64`. Both ends are included.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    phase: PhaseRange,
    /// Joint sweep: the first detector of each arm, `D1,D2`. The other
    /// detector of each arm is found from the circuit.
    #[arg(long, value_parser = parse_detector_pair)]
    joint: Option<DetectorPair>,
    /// Single-photon sweep at one detector.
    #[arg(long)]
    detector: Option<String>,
    /// Fixed values for other shifters, `NAME=EXPR,...`.
    #[arg(long, value_parser = parse_assignment, value_delimiter = ',', allow_hyphen_values = true)]
    phases: Vec<Assignment>,
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    file: PathBuf,
    /// Number of trials.
    #[arg(short = 'n', long = "trials")]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shifter values, `NAME=EXPR,...`.
    #[arg(long, value_parser = parse_assignment, value_delimiter = ',', allow_hyphen_values = true)]
    phases: Vec<Assignment>,
    /// Restrict to a 2x2 table: the first detector of each arm, `D1,D2`.
    #[arg(long, value_parser = parse_detector_pair)]
    joint: Option<DetectorPair>,
    /// Event CSV destination.
    #[arg(long)]
    out: PathBuf,
    /// Summary JSON destination; defaults to the event file with a `.json`
    /// extension.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioName {
    Mzi,
    Jaeger,
    Lemos,
}

impl ScenarioName {
    fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Mzi => "mzi",
            ScenarioName::Jaeger => "jaeger",
            ScenarioName::Lemos => "lemos",
        }
    }
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[arg(value_enum)]
    name: ScenarioName,
    /// mzi: shifter phase.
    #[arg(long, value_parser = phase_arg, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// jaeger: arm-1 shifter phase.
    #[arg(long, value_parser = phase_arg, allow_hyphen_values = true)]
    phi1: Option<f64>,
    /// jaeger: arm-2 shifter phase.
    #[arg(long, value_parser = phase_arg, allow_hyphen_values = true)]
    phi2: Option<f64>,
    /// lemos: phase imprinted by the object on the idler.
    #[arg(long, value_parser = phase_arg, allow_hyphen_values = true)]
    object_phase: Option<f64>,
    /// lemos: make the two idler modes distinguishable.
    #[arg(long)]
    distinguishable: bool,
    /// lemos: CSV grid of object phases; writes g and h intensity grids.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// Parse arguments, run, print messages, and return the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Sample(args) => cmd_sample(&args),
        Command::Scenario(args) => cmd_scenario(&args),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            match &e {
                CliError::Invalid(lines) => lines.iter().for_each(|l| println!("{l}")),
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Io(msg) => eprintln!("error: {msg}"),
            }
            e.exit_code()
        }
    }
}

fn load_circuit(path: &Path) -> CliResult<Circuit> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Io(format!("{}: not valid UTF-8", path.display())))?;
    parse(&text).map_err(|errors| {
        CliError::Invalid(
            errors
                .iter()
                .map(|e| {
                    format!(
                        "{}:{}:{}: {}: {}",
                        path.display(),
                        e.span.line,
                        e.span.column,
                        e.kind,
                        e.message
                    )
                })
                .collect(),
        )
    })
}

fn cmd_validate(path: &Path) -> CliResult<String> {
    load_circuit(path)?;
    Ok("OK\n".into())
}

fn apply_phases(circuit: Circuit, phases: &[Assignment]) -> CliResult<Circuit> {
    phases.iter().try_fold(circuit, |c, a| {
        c.with_shifter_value(&a.shifter, a.value)
            .map_err(CliError::from)
    })
}

fn shifters_on(circuit: &Circuit, pair: &str, arm: Arm) -> Vec<String> {
    let src = circuit.source(pair).expect("pair source exists");
    let starts = pathsum::BranchLabel::BOTH
        .iter()
        .filter_map(|b| src.branch_mode(*b, arm));
    let reach = circuit.wiring().reachable_modes(circuit, starts);
    circuit
        .elements
        .iter()
        .filter(
            |e| matches!(&e.kind, ElementKind::PhaseShifter { input, .. } if reach.contains(input)),
        )
        .map(|e| e.id.clone())
        .collect()
}

fn shifter_value(circuit: &Circuit, id: &str) -> f64 {
    match circuit.element(id).map(|e| &e.kind) {
        Some(ElementKind::PhaseShifter { value, .. }) => *value,
        _ => 0.0,
    }
}

/// The two-by-two layout behind `--joint D1,D2`: `[[D1, L1], [D2, L2]]`
/// where `Lk` is the other detector of arm k.
fn arm_layout(circuit: &Circuit, pair: &str, joint: &DetectorPair) -> CliResult<[[String; 2]; 2]> {
    let mut layout: [[String; 2]; 2] = Default::default();
    for (slot, (arm, first)) in [(Arm::One, &joint.arm1), (Arm::Two, &joint.arm2)]
        .into_iter()
        .enumerate()
    {
        let detectors = arm_detectors(circuit, pair, arm)?;
        if !detectors.contains(first) {
            return Err(CliError::Usage(format!(
                "`{first}` is not an arm-{arm} detector; arm {arm} has {}",
                detectors.join(", ")
            )));
        }
        let [a, b] = &detectors[..] else {
            return Err(CliError::Usage(format!(
                "--joint needs exactly two detectors in arm {arm}, found {}",
                detectors.len()
            )));
        };
        let other = if a == first { b } else { a };
        layout[slot] = [first.clone(), other.clone()];
    }
    Ok(layout)
}

fn require_pair(circuit: &Circuit, what: &str) -> CliResult<String> {
    first_pair_source(circuit)
        .map(str::to_owned)
        .ok_or_else(|| CliError::Usage(format!("{what} needs a circuit with a pair source")))
}

fn layout_table(
    circuit: &Circuit,
    pair: &str,
    layout: &[[String; 2]; 2],
) -> CliResult<ProbabilityTable> {
    let arm1: Vec<&str> = layout[0].iter().map(String::as_str).collect();
    let arm2: Vec<&str> = layout[1].iter().map(String::as_str).collect();
    Ok(joint_table(circuit, pair, &arm1, &arm2)?)
}

fn write_or_return(out: Option<&Path>, text: String) -> CliResult<String> {
    match out {
        Some(path) => {
            output::write_atomic(path, text.as_bytes()).map_err(|e| io_err(path, e))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<String> {
    let circuit = apply_phases(load_circuit(&args.file)?, &args.phases)?;
    let range = &args.phase;
    let is_shifter = circuit
        .element(&range.shifter)
        .is_some_and(|e| matches!(e.kind, ElementKind::PhaseShifter { .. }));
    if !is_shifter {
        return Err(CliError::Usage(format!(
            "no phase shifter named `{}`",
            range.shifter
        )));
    }
    let values = range.values();
    let mut csv = String::new();
    if let Some(detector) = &args.detector {
        let source = single_source(&circuit)
            .ok_or_else(|| CliError::Usage("--detector needs a single-photon source".into()))?;
        csv.push_str("phi,p\n");
        for (phi, p) in fringe_sweep(&circuit, source, &range.shifter, &values, detector)? {
            writeln!(csv, "{},{}", fmt_sig(phi), fmt_sig(reported(p.value))).unwrap();
        }
    } else if let Some(joint) = &args.joint {
        let pair = require_pair(&circuit, "--joint")?;
        let layout = arm_layout(&circuit, &pair, joint)?;
        let mut columns = [None, None];
        for (k, arm) in Arm::BOTH.iter().enumerate() {
            let on_arm = shifters_on(&circuit, &pair, *arm);
            if on_arm.contains(&range.shifter) {
                columns[k] = Some(range.shifter.clone());
            } else if on_arm.len() > 1 {
                return Err(CliError::Usage(format!(
                    "arm {arm} has several shifters ({}); the phi{arm} column is ambiguous",
                    on_arm.join(", ")
                )));
            } else {
                columns[k] = on_arm.into_iter().next();
            }
        }
        if !columns.contains(&Some(range.shifter.clone())) {
            return Err(CliError::Usage(format!(
                "shifter `{}` is in neither photon arm",
                range.shifter
            )));
        }
        csv.push_str("phi1,phi2,p_u1u2,p_u1l2,p_l1u2,p_l1l2,p_u1,p_l1,p_u2,p_l2\n");
        for phi in values {
            let c = circuit.with_shifter_value(&range.shifter, phi)?;
            let t = layout_table(&c, &pair, &layout)?;
            let column = |k: usize| match columns[k].as_deref() {
                Some(id) if id == range.shifter => phi,
                Some(id) => shifter_value(&c, id),
                None => 0.0,
            };
            let mut cells = vec![column(0), column(1)];
            cells.extend(t.joint.iter().flatten().map(|p| reported(*p)));
            cells.extend(layout.iter().flatten().map(|d| reported(t.marginals[d])));
            let cells: Vec<String> = cells.into_iter().map(fmt_sig).collect();
            writeln!(csv, "{}", cells.join(",")).unwrap();
        }
    }
    write_or_return(args.out.as_deref(), csv)
}

fn cmd_sample(args: &SampleArgs) -> CliResult<String> {
    let circuit = apply_phases(load_circuit(&args.file)?, &args.phases)?;
    let pair = require_pair(&circuit, "sample")?;
    let table = match &args.joint {
        Some(joint) => layout_table(&circuit, &pair, &arm_layout(&circuit, &pair, joint)?)?,
        None => {
            let a1 = arm_detectors(&circuit, &pair, Arm::One)?;
            let a2 = arm_detectors(&circuit, &pair, Arm::Two)?;
            let a1: Vec<&str> = a1.iter().map(String::as_str).collect();
            let a2: Vec<&str> = a2.iter().map(String::as_str).collect();
            joint_table(&circuit, &pair, &a1, &a2)?
        }
    };
    let events = sample_events(&table, args.n, args.seed)?;
    let mut csv = Vec::new();
    write_events_csv(&mut csv, &events).expect("writing to memory");
    output::write_atomic(&args.out, &csv).map_err(|e| io_err(&args.out, e))?;

    let coincidences = coincidence_counts(&events)?;
    let singles = singles_counts(&events);
    let n = args.n;
    let freq = |count: u64| if n == 0 { 0.0 } else { count as f64 / n as f64 };
    let sigma = |p: f64| {
        if n == 0 {
            0.0
        } else {
            binomial_sigma(n, p) / n as f64
        }
    };
    let joint: Vec<Value> = table
        .entries()
        .map(|(o, p)| {
            let count = coincidences.joint(&o.detector_1, &o.detector_2);
            json!({
                "detector_1": o.detector_1,
                "detector_2": o.detector_2,
                "count": count,
                "frequency": freq(count),
                "target": reported(p),
                "sigma": sigma(reported(p)),
            })
        })
        .collect();
    let single: Vec<Value> = table
        .arm1
        .iter()
        .map(|d| (Arm::One, d))
        .chain(table.arm2.iter().map(|d| (Arm::Two, d)))
        .map(|(arm, d)| {
            let count = singles.single(d);
            let p = reported(table.marginals[d]);
            json!({
                "arm": arm.index() + 1,
                "detector": d,
                "count": count,
                "frequency": freq(count),
                "target": p,
                "sigma": sigma(p),
            })
        })
        .collect();
    let phases: Map<String, Value> = args
        .phases
        .iter()
        .map(|a| {
            (
                a.shifter.clone(),
                json!(shifter_value(&circuit, &a.shifter)),
            )
        })
        .collect();
    let report = RunReport::new(
        Computation::Sample,
        &circuit,
        json!({
            "trials": n,
            "seed": args.seed,
            "pair_source": pair,
            "phases": phases,
            "events": args.out.display().to_string(),
        }),
        json!({
            "trials": coincidences.total,
            "events": events.len(),
            "joint": joint,
            "singles": single,
        }),
    );
    let summary = args
        .summary
        .clone()
        .unwrap_or_else(|| args.out.with_extension("json"));
    output::write_atomic(&summary, report.to_json().as_bytes()).map_err(|e| io_err(&summary, e))?;
    Ok(format!(
        "sampled {n} trials with seed {}: {} events -> {}, summary -> {}\n",
        args.seed,
        events.len(),
        args.out.display(),
        summary.display()
    ))
}

fn check_scenario_options(args: &ScenarioArgs) -> CliResult<()> {
    let given = [
        ("--phi", args.phi.is_some(), ScenarioName::Mzi),
        ("--phi1", args.phi1.is_some(), ScenarioName::Jaeger),
        ("--phi2", args.phi2.is_some(), ScenarioName::Jaeger),
        (
            "--object-phase",
            args.object_phase.is_some(),
            ScenarioName::Lemos,
        ),
        (
            "--distinguishable",
            args.distinguishable,
            ScenarioName::Lemos,
        ),
        ("--image", args.image.is_some(), ScenarioName::Lemos),
    ];
    for (flag, present, owner) in given {
        if present && owner != args.name {
            return Err(CliError::Usage(format!(
                "{flag} applies to the {} scenario, not {}",
                owner.as_str(),
                args.name.as_str()
            )));
        }
    }
    Ok(())
}

fn cmd_scenario(args: &ScenarioArgs) -> CliResult<String> {
    check_scenario_options(args)?;
    let name = args.name.as_str();
    output::ensure_dir(&args.out).map_err(|e| io_err(&args.out, e))?;
    let mut summary = String::new();
    let mut files = vec![format!("{name}.pic"), format!("{name}.json")];
    let (circuit, parameters, results) = match args.name {
        ScenarioName::Mzi => {
            let phi = args.phi.unwrap_or(0.0);
            let circuit = build_mzi(phi);
            let source = single_source(&circuit).expect("mzi has a source");
            let mut probabilities = Map::new();
            for d in [mzi::CONSTRUCTIVE, mzi::DARK] {
                let p = reported(
                    fringe_sweep(&circuit, source, mzi::SHIFTER, &[phi], d)?[0]
                        .1
                        .value,
                );
                writeln!(summary, "P({d}) = {}", fmt_sig(p)).unwrap();
                probabilities.insert(d.to_owned(), json!(p));
            }
            let results = json!({
                "constructive": mzi::CONSTRUCTIVE,
                "probabilities": probabilities,
            });
            (circuit, json!({ "phi": phi }), results)
        }
        ScenarioName::Jaeger => {
            let (phi1, phi2) = (args.phi1.unwrap_or(0.0), args.phi2.unwrap_or(0.0));
            let circuit = build_jaeger(phi1, phi2);
            let table = jaeger_table(&circuit)?;
            let joint: Vec<Value> = table
                .entries()
                .map(|(o, p)| {
                    let p = reported(p);
                    writeln!(summary, "P({}, {}) = {}", o.detector_1, o.detector_2, fmt_sig(p)).unwrap();
                    json!({ "detector_1": o.detector_1, "detector_2": o.detector_2, "probability": p })
                })
                .collect();
            let marginals: Map<String, Value> = table
                .marginals
                .iter()
                .map(|(d, p)| {
                    writeln!(summary, "P({d}) = {}", fmt_sig(reported(*p))).unwrap();
                    (d.clone(), json!(reported(*p)))
                })
                .collect();
            let results = json!({ "joint": joint, "marginals": marginals });
            (circuit, json!({ "phi1": phi1, "phi2": phi2 }), results)
        }
        ScenarioName::Lemos => {
            let options = LemosOptions {
                object_phase: args.object_phase.unwrap_or(0.0),
                distinguishable: args.distinguishable,
            };
            let circuit = build_lemos_with(options);
            let (g, h) = lemos_probabilities(&circuit)?;
            let (g, h) = (reported(g), reported(h));
            writeln!(summary, "P({}) = {}", lemos::G, fmt_sig(g)).unwrap();
            writeln!(summary, "P({}) = {}", lemos::H, fmt_sig(h)).unwrap();
            let mut results = json!({ "signal": { lemos::G: g, lemos::H: h } });
            if let Some(path) = &args.image {
                let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                let image = PhaseImage::from_csv(&text)?;
                let grids = lemos_image_with(&image, options.distinguishable)?;
                for (file, values) in [("lemos_g.csv", &grids.g), ("lemos_h.csv", &grids.h)] {
                    let mut buf = Vec::new();
                    write_grid_csv(&mut buf, grids.width, values, |v| fmt_sig(reported(v)))
                        .expect("writing to memory");
                    let dest = args.out.join(file);
                    output::write_atomic(&dest, &buf).map_err(|e| io_err(&dest, e))?;
                    files.push(file.to_owned());
                }
                results["image"] = json!({
                    "source": path.display().to_string(),
                    "width": grids.width,
                    "height": grids.height,
                    "g": "lemos_g.csv",
                    "h": "lemos_h.csv",
                });
            }
            let parameters = json!({
                "object_phase": options.object_phase,
                "distinguishable": options.distinguishable,
            });
            (circuit, parameters, results)
        }
    };
    let pic = serialize(&circuit)?;
    let pic_path = args.out.join(format!("{name}.pic"));
    output::write_atomic(&pic_path, pic.as_bytes()).map_err(|e| io_err(&pic_path, e))?;
    let mut parameters = parameters;
    parameters["scenario"] = json!(name);
    let report = RunReport::new(Computation::Scenario, &circuit, parameters, results);
    let json_path = args.out.join(format!("{name}.json"));
    output::write_atomic(&json_path, report.to_json().as_bytes())
        .map_err(|e| io_err(&json_path, e))?;
    writeln!(
        summary,
        "wrote {} in {}",
        files.join(", "),
        args.out.display()
    )
    .unwrap();
    Ok(summary)
}
