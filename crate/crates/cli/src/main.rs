use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use tiqca::assembler::{compile, recommended_padding, Circuit};
use tiqca::chain::{parse_bits, Boundary, ChainLayout, InitialConditions, SCHEMA_VERSION};
use tiqca::evolver::{
    configuration_distribution, evolve_with, measure_program, postselected_readout, readout,
    repeat_until_success, success_predicate, success_probability, EvolveOptions, Method,
};
use tiqca::hamiltonian::{build_chain_hamiltonian, GateSet};
use tiqca::qma::{verify_promise_with, EigenMethod, InputHamiltonian, VerifyOptions};
use tiqca::transport::{
    appendix_estimate, default_departures, slater_distribution, transport_report, HoppingModel,
    Statistics,
};
use tiqca::Error;

const THREADS_VAR: &str = "TIQCA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "tiqca", version, about = "Continuous-time quantum cellular automaton toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a circuit into a command program and emit a layout document (JSON).
    Assemble(AssembleArgs),
    /// Evolve a layout under the chain Hamiltonian and report or sample the program register.
    Evolve(EvolveArgs),
    /// Transport curve p1(t) with the success bound, one CSV row per time.
    P1(P1Args),
    /// Three-term breakdown of the transport bound (JSON).
    Appendix(AppendixArgs),
    /// Configuration distribution of free fermions hopping on a ring (CSV).
    Slater(SlaterArgs),
    /// Translation-invariant QMA construction.
    Qma {
        #[command(subcommand)]
        command: QmaCommand,
    },
}

#[derive(Subcommand, Debug)]
enum QmaCommand {
    /// Build the translation-invariant Hamiltonian for an input and check the promise (JSON).
    Verify(QmaVerifyArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundaryArg {
    Open,
    Periodic,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Open => Boundary::Open,
            BoundaryArg::Periodic => Boundary::Periodic,
        }
    }
}

#[derive(Args, Debug)]
struct AssembleArgs {
    /// Circuit JSON: {"n_qubits": n, "gates": [{"g": "G", "q": [a, b]}, ...]}.
    #[arg(long)]
    circuit: PathBuf,
    /// Initial qubit string, e.g. 010; defaults to all zeros.
    #[arg(long)]
    qubits: Option<String>,
    /// Qubit the pointer starts on.
    #[arg(long, default_value_t = 0)]
    pointer_start: usize,
    /// Number of padding L commands; defaults to the recommended amount.
    #[arg(long)]
    padding: Option<usize>,
    /// Empty sites left of the qubit window; defaults to the program length.
    #[arg(long)]
    left_margin: Option<usize>,
    /// Empty sites right of the program.
    #[arg(long, default_value_t = 0)]
    right_margin: usize,
    #[arg(long, value_enum, default_value = "open")]
    boundary: BoundaryArg,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    /// Layout document (JSON).
    #[arg(long)]
    layout: PathBuf,
    /// Evolution time.
    #[arg(long)]
    t: f64,
    /// Krylov residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Subspaces up to this dimension use a dense exponential, larger ones Krylov.
    #[arg(long, default_value_t = 2048)]
    dense_threshold: usize,
    /// Gate-set JSON overriding the default G gate.
    #[arg(long)]
    gate_file: Option<PathBuf>,
    /// Sample the program register once and report the outcome.
    #[arg(long)]
    measure: bool,
    /// Seed for --measure.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// With --measure, re-evolve after a failed measurement, up to this many rounds.
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    /// Emit the full configuration distribution as CSV (configuration,probability,success).
    #[arg(long, conflicts_with = "measure")]
    distribution: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct P1Args {
    /// Number of particles.
    #[arg(long = "N")]
    n: usize,
    /// Ring length; defaults to 100 N.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    /// Comma-separated multiples of N used as times.
    #[arg(long, value_delimiter = ',')]
    t_mult: Vec<f64>,
    /// Required departures; defaults to floor(sqrt N).
    #[arg(long)]
    k: Option<usize>,
    /// Write the CSV to this file instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AppendixArgs {
    #[arg(long = "N")]
    n: usize,
    /// Defaults to 100 N.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Defaults to 5000 N.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 0.001)]
    eps: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct SlaterArgs {
    /// Comma-separated initial sites.
    #[arg(long, value_delimiter = ',', required = true)]
    sites: Vec<usize>,
    /// Ring length.
    #[arg(long = "M")]
    m: usize,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    /// Evolve the hopping Hamiltonian directly instead of using determinants.
    #[arg(long)]
    hopping: bool,
    #[arg(long, value_enum, default_value = "periodic")]
    boundary: BoundaryArg,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Dense,
    Iterative,
}

#[derive(Args, Debug)]
struct QmaVerifyArgs {
    /// Input JSON: {"n": n, "d": d, "bonds": [matrix, ...]}.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    method: MethodArg,
    /// Energies below this count as zero.
    #[arg(long, default_value_t = 1e-9)]
    zero_tol: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises");
    s.push('\n');
    s
}

fn finite(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be finite")))
    }
}

fn non_negative(name: &str, v: f64) -> CliResult<f64> {
    if finite(name, v)? >= 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be >= 0")))
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if finite(name, v)? > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be > 0")))
    }
}

fn assemble(args: &AssembleArgs) -> CliResult<()> {
    let circuit = Circuit::from_json(&read(&args.circuit)?)?;
    let qubits = match &args.qubits {
        Some(s) => parse_bits(s)?,
        None => vec![0; circuit.n_qubits],
    };
    if qubits.len() != circuit.n_qubits {
        return Err(usage(format!(
            "--qubits has {} bits, circuit has {} qubits",
            qubits.len(),
            circuit.n_qubits
        )));
    }
    let program = compile(&circuit, args.pointer_start)?;
    let padding = args
        .padding
        .unwrap_or_else(|| recommended_padding(program.l_p(), circuit.n_qubits));
    let program = program.padded(padding);
    let left = args.left_margin.unwrap_or(program.total_len());
    let mut layout = ChainLayout::for_program(
        circuit.n_qubits,
        &program,
        left,
        args.right_margin,
        args.boundary.into(),
    )?;
    layout.pointer_site = layout.qc_window.0 + args.pointer_start;
    layout.validate()?;
    let ic = InitialConditions { layout, qubits, program };
    ic.initial_state()?;
    emit(args.out.output.as_deref(), &format!("{}\n", ic.to_json()))
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Dense => "dense",
        Method::Krylov => "krylov",
        Method::FullSpace => "full-space",
    }
}

fn evolve_cmd(args: &EvolveArgs) -> CliResult<()> {
    let t = non_negative("t", args.t)?;
    let tol = positive("tol", args.tol)?;
    if args.repeat == 0 {
        return Err(usage("--repeat must be at least 1"));
    }
    let ic = InitialConditions::from_json(&read(&args.layout)?)?;
    let gates = match &args.gate_file {
        Some(p) => GateSet::from_json(&read(p)?)?,
        None => GateSet::default(),
    };
    let layout = &ic.layout;
    let open = layout.boundary == Boundary::Open;
    let state = ic.initial_state()?;
    let h = build_chain_hamiltonian(layout.n_sites, layout.boundary, gates)?;
    let mut opts = EvolveOptions::with_tol(tol);
    opts.dense_threshold = args.dense_threshold;
    let out = args.out.output.as_deref();

    if args.measure {
        let (outcome, rounds, success) = if args.repeat > 1 {
            let r = repeat_until_success(&state, &h, layout, t, args.repeat, args.seed, &opts)?;
            (r.outcome, r.rounds, r.success)
        } else {
            let (evolved, _) = evolve_with(&state, &h, t, &opts)?;
            let o = measure_program(&evolved, args.seed)?;
            let s = success_predicate(&o.configuration, layout);
            (o, 1, s)
        };
        let readout = if success && open {
            Some(readout(&outcome.collapsed, layout, &outcome)?)
        } else {
            None
        };
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "t": t,
            "seed": args.seed,
            "rounds": rounds,
            "outcome": outcome.configuration.label(),
            "probability": outcome.probability,
            "success": success,
            "readout": readout,
        });
        return emit(out, &to_json(&doc));
    }

    let (evolved, report) = evolve_with(&state, &h, t, &opts)?;
    if args.distribution {
        let mut csv = String::from("configuration,probability,success\n");
        for (config, p) in configuration_distribution(&evolved) {
            let _ = writeln!(csv, "{},{:.17e},{}", config.label(), p, success_predicate(&config, layout));
        }
        return emit(out, &csv);
    }

    let dist = configuration_distribution(&evolved);
    let (likely, likely_p) = dist
        .iter()
        .fold((None, -1.0), |acc, (c, &p)| if p > acc.1 { (Some(c), p) } else { acc });
    let ps = success_probability(&evolved, layout);
    let readout: Option<BTreeMap<String, f64>> = if open && ps > 0.0 {
        Some(postselected_readout(&evolved, layout)?.distribution)
    } else {
        None
    };
    let methods: Vec<&str> = report.methods.iter().map(|m| method_name(*m)).collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "t": t,
        "n_sites": layout.n_sites,
        "subspace_dim": report.subspace_dim,
        "methods": methods,
        "norm": report.norm,
        "configurations": dist.len(),
        "most_likely": likely.map(|c| c.label()),
        "most_likely_probability": likely_p,
        "success_probability": ps,
        "readout": readout,
    });
    emit(out, &to_json(&doc))
}

fn p1_cmd(args: &P1Args) -> CliResult<()> {
    let n = args.n;
    if n == 0 {
        return Err(usage("--N must be at least 1"));
    }
    let m = args.m.unwrap_or(100 * n);
    let k = args.k.unwrap_or_else(|| default_departures(n));
    let mut times = Vec::new();
    for &t in &args.t {
        times.push(non_negative("t", t)?);
    }
    for &mult in &args.t_mult {
        times.push(non_negative("t-mult", mult)? * n as f64);
    }
    if times.is_empty() {
        times.push(5000.0 * n as f64);
    }
    let rows = {
        use rayon::prelude::*;
        times
            .par_iter()
            .map(|&t| transport_report(n, m, t, k))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut csv = String::from("t,N,M,p1,p,departures,departures_one_sided,k,bound,ballistic_crossing,wraps\n");
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{},{}",
            r.t,
            r.n,
            r.m,
            r.p1,
            r.p,
            r.departures,
            r.departures_one_sided,
            r.k,
            r.bound,
            r.ballistic_crossing,
            r.wraps
        );
    }
    emit(args.csv.as_deref(), &csv)
}

fn appendix_cmd(args: &AppendixArgs) -> CliResult<()> {
    if args.n == 0 {
        return Err(usage("--N must be at least 1"));
    }
    let m = args.m.unwrap_or(100 * args.n);
    let t = match args.t {
        Some(t) => non_negative("t", t)?,
        None => 5000.0 * args.n as f64,
    };
    let eps = positive("eps", args.eps)?;
    let estimate = appendix_estimate(args.n, m, t, eps)?;
    let mut doc = serde_json::to_value(&estimate).expect("estimate serialises");
    if let Value::Object(map) = &mut doc {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    emit(args.out.output.as_deref(), &to_json(&doc))
}

fn sites_label(sites: &[usize]) -> String {
    sites.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

fn slater_cmd(args: &SlaterArgs) -> CliResult<()> {
    let mut times = Vec::new();
    for &t in &args.t {
        times.push(non_negative("t", t)?);
    }
    let boundary: Boundary = args.boundary.into();
    let dists = if args.hopping {
        let model = HoppingModel::new(args.m, args.sites.len(), boundary, Statistics::Fermion)?;
        model.evolve_distribution(&args.sites, &times)?
    } else {
        if boundary != Boundary::Periodic {
            return Err(usage("the determinant formula needs --boundary periodic; use --hopping for open chains"));
        }
        times
            .iter()
            .map(|&t| slater_distribution(&args.sites, t, args.m))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut csv = String::from("t,configuration,probability\n");
    for (t, dist) in times.iter().zip(dists) {
        for (sites, p) in dist {
            let _ = writeln!(csv, "{t},{},{:.17e}", sites_label(&sites), p);
        }
    }
    emit(args.out.output.as_deref(), &csv)
}

fn qma_verify(args: &QmaVerifyArgs) -> CliResult<()> {
    let h = InputHamiltonian::from_json(&read(&args.input)?)?;
    let opts = VerifyOptions {
        method: match args.method {
            MethodArg::Dense => EigenMethod::Dense,
            MethodArg::Iterative => EigenMethod::Iterative,
        },
        zero_tol: positive("zero-tol", args.zero_tol)?,
    };
    let result = verify_promise_with(&h, &opts)?;
    emit(args.out.output.as_deref(), &to_json(&result))
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot configure threads: {e}")))
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Assemble(a) => assemble(a),
        Command::Evolve(a) => evolve_cmd(a),
        Command::P1(a) => p1_cmd(a),
        Command::Appendix(a) => appendix_cmd(a),
        Command::Slater(a) => slater_cmd(a),
        Command::Qma { command: QmaCommand::Verify(a) } => qma_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
