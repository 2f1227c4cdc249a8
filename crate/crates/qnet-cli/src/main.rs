//! Command-line front end: parses `.qn` network descriptions, runs gain
//! sweeps, unitarity checks, mode classification, gain-rule cross-checks and
//! time-domain simulations, and emits CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qnet::netdsl::{build_graph, parse_network, BuiltNetwork};
use qnet::netlib::IOSystem;
use qnet::sfg::NodeId;
use qnet::timedomain::{simulate_io, InputSignal, SimulationConfig};
use qnet::{classify_modes, DMatrix, Error};

// exit codes: 0 ok / check passed, 1 runtime failure or check failed,
// 2 netlist parse or validation error, 3 singular evaluation, 4 bad flags
const EXIT_RUNTIME: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_FLAGS: u8 = 4;

#[derive(Parser)]
#[command(name = "qnet", version, about = "Frequency-domain analysis of linear quantum feedback networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a queried gain over a frequency grid and emit CSV.
    Gain(GainArgs),
    /// Check flat-unitarity of a gain on the imaginary axis.
    CheckUnitarity(CheckArgs),
    /// Print the mode invariants (a, C) of a declared system.
    Classify(ClassifyArgs),
    /// Compare the matrix gain rule against the direct linear solve.
    RiegleVsSolve(RiegleArgs),
    /// Integrate the time-domain dynamics of a system and emit CSV.
    Simulate(SimArgs),
}

#[derive(Args, Clone)]
struct IoArgs {
    /// Network description file (.qn).
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EndpointArgs {
    /// Source node; defaults to the file's first query.
    #[arg(long)]
    from: Option<String>,
    /// Sink node; defaults to the file's first query.
    #[arg(long)]
    to: Option<String>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Lower edge of the frequency grid (rad/time).
    #[arg(long, default_value_t = 0.1)]
    wmin: f64,
    /// Upper edge of the frequency grid (rad/time).
    #[arg(long, default_value_t = 10.0)]
    wmax: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Scale::Log)]
    scale: Scale,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Scale {
    Log,
    Linear,
}

#[derive(Args)]
struct GainArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    endpoints: EndpointArgs,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    endpoints: EndpointArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Pass threshold on the flat-unitarity defect.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Name of the declared system to classify.
    #[arg(long)]
    system: String,
}

#[derive(Args)]
struct RiegleArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    endpoints: EndpointArgs,
    /// Number of random evaluation points.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy)]
enum Drive {
    Impulse,
    Sinusoid,
    Chirp,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Name of the declared system to simulate.
    #[arg(long)]
    system: String,
    /// Integration step.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Horizon.
    #[arg(long = "T", default_value_t = 200.0)]
    horizon: f64,
    /// Drive applied to every channel.
    #[arg(long, value_enum, default_value_t = Drive::Impulse)]
    drive: Drive,
    /// Sinusoid frequency (with --drive sinusoid).
    #[arg(long)]
    omega: Option<f64>,
    /// Center of the impulse pulse.
    #[arg(long, default_value_t = 3.0)]
    pulse_center: f64,
    /// Width of the impulse pulse.
    #[arg(long, default_value_t = 0.15)]
    pulse_width: f64,
    /// Chirp band (with --drive chirp).
    #[arg(long, default_value_t = 0.1)]
    wlo: f64,
    #[arg(long, default_value_t = 10.0)]
    whi: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn flags(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_FLAGS,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::NotPassive { .. } => EXIT_PARSE,
            Error::SingularAt { .. } => EXIT_SINGULAR,
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let kind = e.kind();
            let _ = e.print();
            return if kind == clap::error::ErrorKind::DisplayHelp
                || kind == clap::error::ErrorKind::DisplayVersion
            {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FLAGS)
            };
        }
    };
    let outcome = match cli.command {
        Command::Gain(args) => cmd_gain(args),
        Command::CheckUnitarity(args) => cmd_check_unitarity(args),
        Command::Classify(args) => cmd_classify(args),
        Command::RiegleVsSolve(args) => cmd_riegle_vs_solve(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("qnet: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<BuiltNetwork, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_RUNTIME,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let spec = parse_network(&text).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: e.to_string(),
    })?;
    Ok(build_graph(&spec)?)
}

fn endpoints(net: &BuiltNetwork, args: &EndpointArgs) -> Result<(NodeId, NodeId), Failure> {
    match (&args.from, &args.to) {
        (Some(f), Some(t)) => Ok((
            net.graph.node(f).map_err(Failure::from)?,
            net.graph.node(t).map_err(Failure::from)?,
        )),
        (None, None) => net
            .queries
            .first()
            .copied()
            .ok_or_else(|| Failure::flags("no query in the file; pass --from and --to")),
        _ => Err(Failure::flags("--from and --to must be given together")),
    }
}

fn grid(sweep: &SweepArgs) -> Result<Vec<f64>, Failure> {
    if sweep.points < 2 {
        return Err(Failure::flags("--points must be at least 2"));
    }
    if sweep.wmin >= sweep.wmax || sweep.wmin.is_nan() {
        return Err(Failure::flags("--wmin must be below --wmax"));
    }
    if sweep.scale == Scale::Log && sweep.wmin <= 0.0 {
        return Err(Failure::flags("log scale needs --wmin > 0"));
    }
    let n = sweep.points;
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            match sweep.scale {
                Scale::Log => sweep.wmin * (sweep.wmax / sweep.wmin).powf(t),
                Scale::Linear => sweep.wmin + (sweep.wmax - sweep.wmin) * t,
            }
        })
        .collect())
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn gain_header(rows: usize, cols: usize) -> String {
    let mut header = String::from("omega");
    for r in 1..=rows {
        for c in 1..=cols {
            for part in ["are", "aim", "bre", "bim"] {
                let _ = write!(header, ",g_{r}_{c}_{part}");
            }
        }
    }
    header
}

fn push_matrix(line: &mut String, m: &DMatrix) {
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let p = m[(r, c)];
            let _ = write!(line, ",{},{},{},{}", p.a, p.b, p.c, p.d);
        }
    }
}

fn cmd_gain(args: GainArgs) -> Result<ExitCode, Failure> {
    let net = load(&args.io.input)?;
    let (from, to) = endpoints(&net, &args.endpoints)?;
    let omegas = grid(&args.sweep)?;
    let gain = net.graph.gain_riegle(from, to)?;
    let mut csv = gain_header(gain.rows(), gain.cols());
    csv.push('\n');
    for &w in &omegas {
        let value = gain.eval(Complex64::new(0.0, w)).map_err(Failure::from)?;
        let mut line = format!("{w}");
        push_matrix(&mut line, &value);
        csv.push_str(&line);
        csv.push('\n');
    }
    emit(&args.io.output, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_unitarity(args: CheckArgs) -> Result<ExitCode, Failure> {
    let net = load(&args.io.input)?;
    let (from, to) = endpoints(&net, &args.endpoints)?;
    let omegas = grid(&args.sweep)?;
    let gain = net.graph.gain_riegle(from, to)?;
    if gain.rows() != gain.cols() {
        return Err(Failure::flags("unitarity check needs a square gain"));
    }
    let identity = DMatrix::identity(gain.rows());
    let mut csv = String::from("omega,defect\n");
    let mut max_defect = 0.0_f64;
    let mut argmax = omegas[0];
    for &w in &omegas {
        let value = gain.eval(Complex64::new(0.0, w)).map_err(Failure::from)?;
        let defect = (&(&value.flat() * &value) - &identity).norm();
        let _ = writeln!(csv, "{w},{defect}");
        if defect > max_defect {
            max_defect = defect;
            argmax = w;
        }
    }
    emit(&args.io.output, &csv)?;
    let pass = max_defect <= args.tol;
    println!(
        "max defect {max_defect:.6e} at omega = {argmax} over {} points (tol {:.1e}): {}",
        omegas.len(),
        args.tol,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_RUNTIME)
    })
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode, Failure> {
    let net = load(&args.io.input)?;
    let sys = net.systems.get(&args.system).ok_or_else(|| {
        Failure::flags(format!("no system named `{}` in the file", args.system))
    })?;
    let modes = classify_modes(sys.generator().matrix()).map_err(Failure::from)?;
    let mut table = String::from("mode,a,C,label\n");
    for (i, m) in modes.iter().enumerate() {
        let _ = writeln!(table, "{},{},{},{}", i + 1, m.a, m.c, m.label(1e-10));
    }
    emit(&args.io.output, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_riegle_vs_solve(args: RiegleArgs) -> Result<ExitCode, Failure> {
    let net = load(&args.io.input)?;
    let (from, to) = endpoints(&net, &args.endpoints)?;
    if args.samples == 0 {
        return Err(Failure::flags("--samples must be positive"));
    }
    let riegle = net.graph.gain_riegle(from, to)?;
    let solve = net.graph.gain_direct_solve(from, to)?;
    let mut rng = StdRng::seed_from_u64(args.seed);
    let mut max_dev = 0.0_f64;
    let mut used = 0usize;
    for _ in 0..args.samples {
        let s = Complex64::new(rng.gen_range(0.2..2.0), rng.gen_range(-3.0..3.0));
        // points in the singular set are skipped on both routes
        if let (Ok(a), Ok(b)) = (riegle.eval(s), solve.eval(s)) {
            max_dev = max_dev.max((&a - &b).norm());
            used += 1;
        }
    }
    println!("samples {used}/{} max deviation {max_dev:.6e}", args.samples);
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimArgs) -> Result<ExitCode, Failure> {
    let net = load(&args.io.input)?;
    let sys: &IOSystem = net.systems.get(&args.system).ok_or_else(|| {
        Failure::flags(format!("no system named `{}` in the file", args.system))
    })?;
    let channels = sys.channels();
    if channels == 0 {
        return Err(Failure::flags(format!(
            "system `{}` has no coupling to drive",
            args.system
        )));
    }
    let signal = match args.drive {
        Drive::Impulse => InputSignal::Impulse {
            center: args.pulse_center,
            width: args.pulse_width,
        },
        Drive::Sinusoid => InputSignal::Sinusoid {
            omega: args
                .omega
                .ok_or_else(|| Failure::flags("--drive sinusoid needs --omega"))?,
        },
        Drive::Chirp => InputSignal::Chirp {
            omega_lo: args.wlo,
            omega_hi: args.whi,
        },
    };
    let cfg = SimulationConfig::new(args.dt, args.horizon, vec![signal; channels]);
    let sim = simulate_io(sys, &cfg).map_err(Failure::from)?;

    let mut csv = String::from("t");
    for j in 1..=sim.modes {
        for part in ["are", "aim", "bre", "bim"] {
            let _ = write!(csv, ",x{j}_{part}");
        }
    }
    for c in 1..=sim.channels {
        for part in ["are", "aim", "bre", "bim"] {
            let _ = write!(csv, ",win{c}_{part}");
        }
    }
    for c in 1..=sim.channels {
        for part in ["are", "aim", "bre", "bim"] {
            let _ = write!(csv, ",wout{c}_{part}");
        }
    }
    csv.push('\n');
    let push_pairs = |line: &mut String, v: &[Complex64]| {
        for j in 0..v.len() / 2 {
            let _ = write!(
                line,
                ",{},{},{},{}",
                v[2 * j].re,
                v[2 * j].im,
                v[2 * j + 1].re,
                v[2 * j + 1].im
            );
        }
    };
    for i in 0..sim.t.len() {
        let mut line = format!("{}", sim.t[i]);
        push_pairs(&mut line, &sim.state[i]);
        push_pairs(&mut line, &sim.w_in[i]);
        push_pairs(&mut line, &sim.w_out[i]);
        csv.push_str(&line);
        csv.push('\n');
    }
    emit(&args.io.output, &csv)?;
    Ok(ExitCode::SUCCESS)
}
