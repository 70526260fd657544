//! Command-line front end for the qsec-core experiments.
//!
//! Global options resolve as flag, then `--config` file entry, then default.
//! Exit codes: 0 ok, 2 argument or usage error, 3 resource or I/O error,
//! 4 probabilistic failure.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use qsec_core::b92::{run_b92_session, DEFAULT_DISCLOSE_FRACTION};
use qsec_core::grover::{grover_subspace, plan_iterations, Oracle};
use qsec_core::noisechan::{
    detect_eavesdropping, noise_sweep, simulate_eve_qber, write_sweep_csv, ChannelConfig, Eavesdropper,
};
use qsec_core::ppm::run_ppm_session;
use qsec_core::qsim::DEFAULT_QUBIT_CAP;
use qsec_core::registry::{eavesdroppers, grover_backends, period_finders, SimConfig};
use qsec_core::saes::{brute_force_key, grover_key_search_with, parse_word, saes_encrypt, SaesBlock, SaesKey, DEFAULT_RETRY_LIMIT};
use qsec_core::shor::{shor_factor, FailureReason, DEFAULT_PERIOD_SAMPLES};
use qsec_core::{Error, Seed, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_PROBABILISTIC: i32 = 4;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "qsec", version, about = "Seeded quantum-security experiments: B92/PPM key distribution, noise, Grover, S-AES, Shor")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Master seed [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report format [default: json, csv for `noise sweep`]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Largest full-amplitude simulation, in qubits [default: 24]
    #[arg(long, global = true)]
    pub statevector_cap: Option<usize>,
    /// key=value file with defaults for seed, format, output, statevector_cap
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a B92 key-distribution session
    B92(SessionArgs),
    /// Run a PPM-framed B92 session
    Ppm {
        #[command(flatten)]
        session: SessionArgs,
        /// Key bits carried per frame (2^b slots)
        #[arg(long, default_value_t = 2)]
        bits_per_pulse: usize,
    },
    /// Collective-rotation noise tools
    #[command(subcommand)]
    Noise(NoiseCommand),
    /// Grover search for planted targets
    Grover(GroverArgs),
    /// S-AES known-plaintext attacks
    #[command(subcommand)]
    Saes(SaesCommand),
    /// Factor an integer with Shor's procedure
    Shor(ShorArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ChannelArgs {
    /// Channel rotation angle in radians
    #[arg(long, conflicts_with = "epsilon")]
    pub theta: Option<f64>,
    /// Channel noise level sin^2(theta), alternative to --theta
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Eavesdropper: none, measured_resend or conclusive_fixed
    #[arg(long, default_value = "none")]
    pub eve: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SessionArgs {
    /// Pulses (frames for `ppm`) to send
    #[arg(long, visible_alias = "frames", default_value_t = 100_000)]
    pub pulses: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub channel: ChannelArgs,
    /// Fraction of sifted bits disclosed for error estimation
    #[arg(long, default_value_t = DEFAULT_DISCLOSE_FRACTION)]
    pub disclose: f64,
}

#[derive(Debug, Subcommand)]
pub enum NoiseCommand {
    /// Closed-form error rates over an epsilon grid
    Sweep(SweepArgs),
    /// Monte Carlo error rate with optional eavesdropper, plus detection
    Simulate {
        #[arg(long, default_value_t = 100_000)]
        pulses: u64,
        #[command(flatten)]
        channel: ChannelArgs,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 0.7)]
    pub eps_max: f64,
    /// Grid points, endpoints included
    #[arg(long, default_value_t = 71)]
    pub steps: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct GroverArgs {
    /// Search width in bits
    #[arg(long)]
    pub bits: u32,
    /// Marked value (decimal, 0x hex or 0b binary); repeatable
    #[arg(long = "target", required = true, value_parser = parse_u64)]
    pub targets: Vec<u64>,
    /// statevector or subspace
    #[arg(long, default_value = "statevector")]
    pub backend: String,
    /// Grover rounds [default: planned count]
    #[arg(long)]
    pub iterations: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum SaesCommand {
    /// Recover a key from one plaintext/ciphertext pair
    Crack(CrackArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrackMethod {
    Exhaustive,
    Grover,
}

#[derive(Debug, Args, Serialize)]
pub struct CrackArgs {
    #[arg(long, value_parser = parse_u16)]
    pub plaintext: u16,
    /// Known ciphertext; required unless --key plants one
    #[arg(long, value_parser = parse_u16, required_unless_present = "key", conflicts_with = "key")]
    pub ciphertext: Option<u16>,
    /// Plant this key: the ciphertext is computed from it
    #[arg(long, value_parser = parse_u16)]
    pub key: Option<u16>,
    #[arg(long, value_enum, default_value = "grover")]
    pub method: CrackMethod,
    /// Grover runs before giving up
    #[arg(long, default_value_t = DEFAULT_RETRY_LIMIT)]
    pub retries: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct ShorArgs {
    #[arg(long)]
    pub n: u64,
    /// classical or quantum
    #[arg(long, default_value = "classical")]
    pub backend: String,
    #[arg(long, default_value_t = 20)]
    pub max_attempts: u32,
    /// Circuit runs per attempt (quantum backend)
    #[arg(long, default_value_t = DEFAULT_PERIOD_SAMPLES)]
    pub period_samples: u32,
}

fn parse_u16(s: &str) -> Result<u16, String> {
    parse_word(s).map_err(|e| e.to_string())
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(h, 16)
    } else if let Some(b) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        u64::from_str_radix(b, 2)
    } else {
        t.parse()
    };
    parsed.map_err(|e| format!("`{s}` is not a non-negative integer: {e}"))
}

/// Resolved global settings, embedded in every JSON report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub output_format: Format,
    pub output_path: Option<PathBuf>,
    pub statevector_cap: usize,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(String),
    /// Report already written; exit with `code` after printing `msg`.
    Reported { code: i32, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_RESOURCE,
            CliError::Reported { code, .. } => *code,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Reported { msg, .. } => f.write_str(msg),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Precondition(_) | Error::UnknownStrategy { .. } => EXIT_USAGE,
        Error::Resource { .. } => EXIT_RESOURCE,
        Error::ProbabilisticFailure { .. } | Error::UndefinedQber { .. } => EXIT_PROBABILISTIC,
        Error::NoFactorsFound(r) => match r.failure {
            Some(FailureReason::Prime) => EXIT_USAGE,
            _ => EXIT_PROBABILISTIC,
        },
        Error::Consistency(_) => EXIT_INTERNAL,
    }
}

/// `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

fn resolve(global: &GlobalOpts, default_format: Format) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig {
        seed: DEFAULT_SEED,
        output_format: default_format,
        output_path: None,
        statevector_cap: DEFAULT_QUBIT_CAP,
    };
    if let Some(path) = &global.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        for (k, v) in parse_config(&text)? {
            let bad = |what: &str| CliError::Usage(format!("config `{k}`: {what}, got `{v}`"));
            match k.as_str() {
                "seed" => cfg.seed = v.parse().map_err(|_| bad("expected a 64-bit unsigned integer"))?,
                "format" => {
                    cfg.output_format = Format::from_str(&v, true).map_err(|_| bad("expected json or csv"))?
                }
                "output" => cfg.output_path = Some(PathBuf::from(v)),
                "statevector_cap" => {
                    cfg.statevector_cap = v.parse().map_err(|_| bad("expected a qubit count"))?
                }
                _ => {
                    return Err(CliError::Usage(format!(
                        "unknown config key `{k}` (known: seed, format, output, statevector_cap)"
                    )))
                }
            }
        }
    }
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(f) = global.format {
        cfg.output_format = f;
    }
    if let Some(p) = &global.output {
        cfg.output_path = Some(p.clone());
    }
    if let Some(c) = global.statevector_cap {
        cfg.statevector_cap = c;
    }
    if cfg.statevector_cap == 0 {
        return Err(CliError::Usage("statevector cap must be at least 1".into()));
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct Meta<'a, P: Serialize> {
    artifact_version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a RunConfig,
    params: &'a P,
}

/// A finished report: either structured (rendered as JSON or a one-row CSV)
/// or raw CSV text.
enum Body {
    Record(Value),
    Csv(String),
}

fn record<T: Serialize>(v: &T) -> Result<Body, CliError> {
    serde_json::to_value(v)
        .map(Body::Record)
        .map_err(|e| CliError::Core(Error::Consistency(e.to_string())))
}

fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn render<P: Serialize>(body: Body, command: &str, cfg: &RunConfig, params: &P) -> Result<String, CliError> {
    let meta = Meta {
        artifact_version: VERSION,
        command,
        seed: cfg.seed,
        config: cfg,
        params,
    };
    match (body, cfg.output_format) {
        (Body::Csv(text), _) => Ok(text),
        (Body::Record(v), Format::Json) => {
            let mut obj = match v {
                Value::Object(m) => m,
                other => {
                    let mut m = Map::new();
                    m.insert("result".into(), other);
                    m
                }
            };
            obj.insert("meta".into(), serde_json::to_value(&meta).expect("meta serializes"));
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
        (Body::Record(v), Format::Csv) => {
            let obj = match v {
                Value::Object(m) => m,
                other => Map::from_iter([("result".to_string(), other)]),
            };
            let mut head: Vec<String> = obj.keys().cloned().collect();
            let mut row: Vec<String> = obj.values().map(csv_field).collect();
            head.extend(["seed".into(), "artifact_version".into()]);
            row.extend([cfg.seed.to_string(), VERSION.to_string()]);
            Ok(format!("{}\n{}\n", head.join(","), row.join(",")))
        }
    }
}

fn channel(args: &ChannelArgs) -> Result<ChannelConfig, CliError> {
    Ok(match (args.theta, args.epsilon) {
        (_, Some(eps)) => ChannelConfig::from_epsilon(eps)?,
        (Some(theta), None) => ChannelConfig::new(theta)?,
        (None, None) => ChannelConfig::noiseless(),
    })
}

fn eavesdropper(name: &str, sim: &SimConfig) -> Result<Option<Box<dyn Eavesdropper>>, CliError> {
    if name == "none" {
        return Ok(None);
    }
    Ok(Some(eavesdroppers().create(name, sim)?))
}

#[derive(Serialize)]
struct SimulateReport {
    #[serde(flatten)]
    estimate: qsec_core::noisechan::QberEstimate,
    theta: f64,
    epsilon: f64,
    baseline_qber: f64,
    eve: String,
    eve_detected: bool,
}

#[derive(Serialize)]
struct GroverReport {
    #[serde(flatten)]
    run: qsec_core::grover::GroverRun,
    marked_count: u64,
    planned_iterations: u64,
    predicted_success: f64,
}

/// Writes the report to the configured path or standard output.
fn emit(text: &str, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write report: {e}"))),
    }
}

/// Writes the closed-form sweep as CSV to `out`.
pub fn emit_noise_sweep(eps_min: f64, eps_max: f64, steps: usize, out: &std::path::Path) -> Result<(), CliError> {
    let rows = noise_sweep(eps_min, eps_max, steps)?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).expect("in-memory write");
    fs::write(out, buf).map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let default_format = match cli.command {
        Command::Noise(NoiseCommand::Sweep(_)) => Format::Csv,
        _ => Format::Json,
    };
    let cfg = resolve(&cli.global, default_format)?;
    let seed = Seed::new(cfg.seed);
    let mut sim = SimConfig {
        qubit_cap: cfg.statevector_cap,
        ..SimConfig::default()
    };
    let _ = writeln!(stderr, "seed={}", cfg.seed);

    let text = match &cli.command {
        Command::B92(a) => {
            let eve = eavesdropper(&a.channel.eve, &sim)?;
            let r = run_b92_session(a.pulses, &channel(&a.channel)?, eve.as_deref(), a.disclose, seed)?;
            render(record(&r)?, "b92", &cfg, a)?
        }
        Command::Ppm { session: a, bits_per_pulse } => {
            let eve = eavesdropper(&a.channel.eve, &sim)?;
            let r = run_ppm_session(a.pulses, *bits_per_pulse, &channel(&a.channel)?, eve.as_deref(), a.disclose, seed)?;
            #[derive(Serialize)]
            struct P<'a> {
                #[serde(flatten)]
                session: &'a SessionArgs,
                bits_per_pulse: usize,
            }
            let params = P { session: a, bits_per_pulse: *bits_per_pulse };
            render(record(&r)?, "ppm", &cfg, &params)?
        }
        Command::Noise(NoiseCommand::Sweep(a)) => {
            let rows = noise_sweep(a.eps_min, a.eps_max, a.steps)?;
            let body = match cfg.output_format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_sweep_csv(&mut buf, &rows).expect("in-memory write");
                    Body::Csv(String::from_utf8(buf).expect("ascii"))
                }
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|(eps, b)| serde_json::json!({"epsilon": eps, "ber0": b.ber0, "ber1": b.ber1, "ber2": b.ber2}))
                        .collect();
                    Body::Record(serde_json::json!({ "rows": rows }))
                }
            };
            render(body, "noise sweep", &cfg, a)?
        }
        Command::Noise(NoiseCommand::Simulate { pulses, channel: ch }) => {
            let chan = channel(ch)?;
            let eve = eavesdropper(&ch.eve, &sim)?;
            let est = simulate_eve_qber(chan.theta(), eve.as_deref(), *pulses, seed)?;
            let baseline = chan.baseline_qber();
            let report = SimulateReport {
                estimate: est,
                theta: chan.theta(),
                epsilon: chan.epsilon(),
                baseline_qber: baseline,
                eve: ch.eve.clone(),
                eve_detected: detect_eavesdropping(est.qber, baseline, est.conclusive)?,
            };
            #[derive(Serialize)]
            struct P<'a> {
                pulses: u64,
                #[serde(flatten)]
                channel: &'a ChannelArgs,
            }
            render(record(&report)?, "noise simulate", &cfg, &P { pulses: *pulses, channel: ch })?
        }
        Command::Grover(a) => {
            let oracle = Oracle::from_targets(a.bits, &a.targets)?;
            let m = oracle.marked_count();
            let plan = plan_iterations(a.bits, m as u128)?;
            let k = a.iterations.unwrap_or(plan.iterations);
            let backend = grover_backends().create(&a.backend, &sim)?;
            let run = backend.run(&oracle, k, &mut seed.stream())?;
            match cfg.output_format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    run.write_history_csv(&mut buf).expect("in-memory write");
                    String::from_utf8(buf).expect("ascii")
                }
                Format::Json => {
                    let report = GroverReport {
                        run,
                        marked_count: m,
                        planned_iterations: plan.iterations,
                        predicted_success: grover_subspace(a.bits, m as u128, k)?,
                    };
                    render(record(&report)?, "grover", &cfg, a)?
                }
            }
        }
        Command::Saes(SaesCommand::Crack(a)) => {
            let p = SaesBlock(a.plaintext);
            let c = match (a.ciphertext, a.key) {
                (Some(c), _) => SaesBlock(c),
                (None, Some(k)) => saes_encrypt(p, SaesKey(k)),
                (None, None) => return Err(CliError::Usage("need --ciphertext or --key".into())),
            };
            let exhaustive = brute_force_key(p, c);
            let report = match a.method {
                CrackMethod::Exhaustive => exhaustive,
                CrackMethod::Grover => grover_key_search_with(&exhaustive, seed, a.retries)?,
            };
            render(record(&report)?, "saes crack", &cfg, a)?
        }
        Command::Shor(a) => {
            sim.period_samples = a.period_samples;
            let finder = period_finders().create(&a.backend, &sim)?;
            match shor_factor(a.n, finder.as_ref(), seed, a.max_attempts) {
                Ok(r) => render(record(&r)?, "shor", &cfg, a)?,
                Err(Error::NoFactorsFound(r)) => {
                    // the trace is the useful part of a failure: emit it, then fail
                    let code = match r.failure {
                        Some(FailureReason::Prime) => EXIT_USAGE,
                        _ => EXIT_PROBABILISTIC,
                    };
                    let msg = Error::NoFactorsFound(r.clone()).to_string();
                    emit(&render(record(&r)?, "shor", &cfg, a)?, &cfg, stdout)?;
                    return Err(CliError::Reported { code, msg });
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    emit(&text, &cfg, stdout)
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_command<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
