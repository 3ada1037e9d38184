//! `phecd`: run the scheme end to end, play security games, and print exact
//! oracle tables.
//!
//! Exit codes: 0 success, 1 contract violation, 2 usage error.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use phecd_core::bits::BitString;
use phecd_core::dem::DemVariant;
use phecd_core::demcd::VrfyMode;
use phecd_core::games::builtin::{self, Builtin};
use phecd_core::games::record::{self, GameRecord};
use phecd_core::games::{GameConfig, GameError, GameKind};
use phecd_core::ikem::{IkemConfig, IkemParams};
use phecd_core::oracle::{self, MAX_ORACLE_LAMBDA};
use phecd_core::phecd::{self, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use config::{resolve_scheme, DemoPath, Preset, RunConfig, SchemeFlags};

const FORMATS_DOC: &str = include_str!("../../../docs/FORMATS.md");

const SCHEMAS: [(&str, &str); 5] = [
    ("game-record", include_str!("../../../docs/schemas/game_record.schema.json")),
    ("tradeoff-table", include_str!("../../../docs/schemas/tradeoff_table.schema.json")),
    ("demo-transcript", include_str!("../../../docs/schemas/demo_transcript.schema.json")),
    ("ikem-distance", include_str!("../../../docs/schemas/ikem_distance.schema.json")),
    ("run-config", include_str!("../../../docs/schemas/run_config.schema.json")),
];

const DEFAULT_GOLDEN_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/golden");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            Self::Contract(_) => ExitCode::from(1),
            Self::Usage(_) => ExitCode::from(2),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phecd", version, about = "Hybrid encryption with certified deletion over correlated randomness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, clap::Args)]
struct SchemeArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Qubits per message bit.
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long, value_parser = parse_dem)]
    dem: Option<DemVariant>,
    #[arg(long, value_parser = parse_vrfy_mode)]
    vrfy_mode: Option<VrfyMode>,
    #[arg(long, env = "PHECD_SEED")]
    seed: Option<u64>,
}

impl SchemeArgs {
    fn flags(&self) -> SchemeFlags {
        SchemeFlags {
            preset: self.preset,
            lambda: self.lambda,
            dem: self.dem,
            vrfy_mode: self.vrfy_mode,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Key generation, encryption, then decryption or deletion.
    Demo {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Message as a string of 0s and 1s.
        #[arg(long)]
        message: Option<String>,
        #[arg(long, value_enum)]
        path: Option<DemoPath>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Play a security game against a built-in adversary.
    Game {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        adversary: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        /// Oracle query budget.
        #[arg(long)]
        q_e: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// List games and adversaries instead of running.
        #[arg(long)]
        list: bool,
    },
    /// Exact acceptance and distance table for the deletion strategies.
    Oracle {
        #[arg(long, default_value_t = MAX_ORACLE_LAMBDA)]
        lambda: usize,
        #[arg(long, value_parser = parse_vrfy_mode, default_value = "default")]
        vrfy_mode: VrfyMode,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Rewrite the golden tables for every supported lambda.
        #[arg(long)]
        regen_golden: bool,
        #[arg(long, default_value = DEFAULT_GOLDEN_DIR)]
        golden_dir: PathBuf,
        /// Print the exact iKEM key distance at the tiny preset instead.
        #[arg(long)]
        ikem_sd: bool,
        #[arg(long, default_value_t = 0.25)]
        p_e: f64,
    },
    /// Print byte layouts, or one JSON schema.
    Formats {
        #[arg(long)]
        schema: Option<String>,
    },
}

fn parse_dem(s: &str) -> Result<DemVariant, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("expected otp or stream, got {s:?}"))
}

fn parse_vrfy_mode(s: &str) -> Result<VrfyMode, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("expected default or strict, got {s:?}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Demo {
            scheme,
            message,
            path,
            format,
        } => cmd_demo(&scheme, message, path, format),
        Command::Game {
            scheme,
            name,
            adversary,
            trials,
            q_e,
            output,
            format,
            list,
        } => {
            if list {
                Ok(catalog())
            } else {
                cmd_game(&scheme, name, adversary, trials, q_e, output, format)
            }
        }
        Command::Oracle {
            lambda,
            vrfy_mode,
            format,
            regen_golden,
            golden_dir,
            ikem_sd,
            p_e,
        } => {
            if ikem_sd {
                cmd_ikem_sd(p_e, format)
            } else {
                cmd_oracle(lambda, vrfy_mode, format, regen_golden.then_some(golden_dir.as_path()))
            }
        }
        Command::Formats { schema } => cmd_formats(schema.as_deref()),
    };
    match result {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("phecd: {e}");
            e.exit_code()
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable output");
    s.push('\n');
    s
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn build_scheme(args: &SchemeArgs) -> Result<(RunConfig, String, Scheme), CliError> {
    let file = RunConfig::load(args.config.as_deref())?;
    let (label, config) = resolve_scheme(&args.flags(), &file)?;
    let scheme = Scheme::new(config).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((file, label, scheme))
}

fn seed_of(args: &SchemeArgs, file: &RunConfig) -> u64 {
    args.seed.or(file.seed).unwrap_or(0)
}

#[derive(Debug, Serialize)]
struct DemoTranscript {
    scheme: String,
    params: phecd::SchemeConfig,
    seed: u64,
    path: DemoPath,
    message: String,
    /// Classical ciphertext bytes: capsules then classical parts.
    classical: String,
    capsules: Vec<String>,
    registers: Vec<String>,
    verification_keys: String,
    decrypted: Option<String>,
    certificates: Option<String>,
    verified: Option<bool>,
    registers_after: Vec<String>,
}

fn cmd_demo(
    args: &SchemeArgs,
    message: Option<String>,
    path: Option<DemoPath>,
    format: Format,
) -> Result<String, CliError> {
    let (file, label, scheme) = build_scheme(args)?;
    let seed = seed_of(args, &file);
    let path = path.or(file.path).unwrap_or(DemoPath::Decrypt);
    let message_text = message.or(file.message).unwrap_or_else(|| "101".into());
    let message: BitString = message_text
        .parse()
        .map_err(|e| CliError::Usage(format!("message: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let triple = scheme.keygen(&mut rng);
    let (vks, mut ct) = scheme
        .enc(&triple.x, &message, &mut rng)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut transcript = DemoTranscript {
        scheme: label,
        params: scheme.config().clone(),
        seed,
        path,
        message: message.to_string(),
        classical: hex_string(&ct.classical_bytes()),
        capsules: ct.capsules.iter().map(|c| hex_string(&c.to_bytes())).collect(),
        registers: ct.register_summary(),
        verification_keys: hex_string(&phecd::vks_to_bytes(&vks)),
        decrypted: None,
        certificates: None,
        verified: None,
        registers_after: Vec::new(),
    };
    let contract = |e: phecd::PhecdError| CliError::Contract(e.to_string());
    if matches!(path, DemoPath::Decrypt | DemoPath::Both) {
        let out = scheme.dec(&triple.y, &mut ct, &mut rng).map_err(contract)?;
        transcript.decrypted = Some(out.map_or_else(|| "⊥".into(), |m| m.to_string()));
    }
    if matches!(path, DemoPath::Delete | DemoPath::Both) {
        let certs = scheme.del(&mut ct, &mut rng).map_err(contract)?;
        transcript.verified = Some(scheme.vrfy(&vks, &certs).map_err(contract)?);
        transcript.certificates = Some(hex_string(&phecd::certs_to_bytes(&certs)));
    }
    transcript.registers_after = ct.register_summary();
    Ok(match format {
        Format::Human => demo_human(&transcript),
        _ => to_json(&transcript),
    })
}

fn demo_human(t: &DemoTranscript) -> String {
    let mut s = format!(
        "scheme      {} (lambda {}, {} DEM)\nmessage     {}\nclassical   {}\nregisters   {}\n",
        t.scheme,
        t.params.lambda,
        t.params.dem.name(),
        t.message,
        t.classical,
        t.registers.join(" "),
    );
    if let Some(m) = &t.decrypted {
        s += &format!("decrypted   {m}\n");
    }
    if let Some(v) = t.verified {
        s += &format!("certificate {}\nverified    {}\n", t.certificates.as_deref().unwrap_or(""), if v { "⊤" } else { "⊥" });
    }
    s += &format!("afterwards  {}\n", t.registers_after.join(" "));
    s
}

fn catalog() -> String {
    let mut s = String::from("games:\n");
    for g in GameKind::ALL {
        s += &format!("  {g}\n");
    }
    s += "adversaries:\n";
    for a in Builtin::ALL {
        let games: Vec<_> = GameKind::ALL
            .iter()
            .filter(|&&g| a.supports(g))
            .map(|g| g.name())
            .collect();
        s += &format!("  {:<22} {} [{}]\n", a.name(), a.summary(), games.join(", "));
    }
    s
}

fn cmd_game(
    args: &SchemeArgs,
    name: Option<String>,
    adversary: Option<String>,
    trials: Option<u64>,
    q_e: Option<usize>,
    output: Option<PathBuf>,
    format: Format,
) -> Result<String, CliError> {
    let (file, label, scheme) = build_scheme(args)?;
    let usage = |e: GameError| CliError::Usage(e.to_string());
    let game: GameKind = name
        .or(file.game.clone())
        .ok_or_else(|| CliError::Usage("--name is required".into()))?
        .parse()
        .map_err(usage)?;
    let adversary: Builtin = adversary
        .or(file.adversary.clone())
        .ok_or_else(|| CliError::Usage("--adversary is required".into()))?
        .parse()
        .map_err(usage)?;
    let seed = seed_of(args, &file);
    let q_e = q_e.or(file.q_e).unwrap_or(0);
    let cfg = GameConfig::new(trials.or(file.trials).unwrap_or(10_000), q_e, seed).map_err(usage)?;
    let result = builtin::run(game, adversary, &scheme, &cfg).map_err(|e| match e {
        GameError::Scheme(e) => CliError::Contract(e.to_string()),
        other => usage(other),
    })?;
    let record = GameRecord::new(&result, &label, adversary.name(), scheme.config().clone(), q_e, seed);
    let text = match format {
        Format::Json => to_json(&record),
        Format::Csv => {
            let mut buf = Vec::new();
            record::write_csv(std::slice::from_ref(&record), &mut buf)
                .map_err(|e| CliError::Contract(e.to_string()))?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        Format::Human => game_human(&record),
    };
    if let Some(path) = output.or(file.output) {
        fs::write(&path, &text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(text)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.6}"))
}

fn game_human(r: &GameRecord) -> String {
    format!(
        "game        {}\nadversary   {}\nscheme      {} (lambda {})\ntrials      {} per arm, {} aborted\nacceptance  {}\nadvantage   {} [{}, {}]\nseed        {}\n",
        r.game,
        r.adversary,
        r.scheme,
        r.params.lambda,
        r.trials,
        r.aborted,
        fmt_opt(r.acceptance),
        fmt_opt(r.advantage),
        fmt_opt(r.ci_low),
        fmt_opt(r.ci_high),
        r.seed,
    )
}

fn cmd_oracle(
    lambda: usize,
    mode: VrfyMode,
    format: Format,
    regen: Option<&Path>,
) -> Result<String, CliError> {
    if !(1..=MAX_ORACLE_LAMBDA).contains(&lambda) {
        return Err(CliError::Usage(format!("--lambda must be in 1..={MAX_ORACLE_LAMBDA}")));
    }
    let mut notes = String::new();
    if let Some(dir) = regen {
        let written = oracle::regenerate_golden(dir, mode)
            .map_err(|e| CliError::Contract(e.to_string()))?;
        for path in written {
            notes += &format!("wrote {}\n", path.display());
        }
    }
    let rows = oracle::tradeoff_table(lambda, &oracle::builtin_menu(), mode)
        .map_err(|e| CliError::Contract(e.to_string()))?;
    let text = match format {
        Format::Json => oracle::table_json(&rows),
        Format::Csv => {
            let mut buf = Vec::new();
            oracle::write_table_csv(&rows, &mut buf).map_err(|e| CliError::Contract(e.to_string()))?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        Format::Human => {
            let mut s = format!("{:<22} {:>12} {:>12}\n", "strategy", "acceptance", "distance");
            for r in &rows {
                s += &format!("{:<22} {:>12.9} {:>12.9}\n", r.strategy, r.acceptance, r.distance);
            }
            s
        }
    };
    if !notes.is_empty() {
        eprint!("{notes}");
    }
    Ok(text)
}

#[derive(Debug, Serialize)]
struct IkemDistance {
    n: usize,
    key_len: usize,
    check_len: usize,
    p_e: f64,
    distance: f64,
}

fn cmd_ikem_sd(p_e: f64, format: Format) -> Result<String, CliError> {
    let params = IkemParams::new(IkemConfig::tiny(p_e)).map_err(|e| CliError::Usage(e.to_string()))?;
    let distance = oracle::exact_ikem_sd(&params).map_err(|e| CliError::Contract(e.to_string()))?;
    let out = IkemDistance {
        n: params.n(),
        key_len: params.key_len(),
        check_len: params.check_len(),
        p_e,
        distance,
    };
    Ok(match format {
        Format::Human => format!(
            "n {} key {} check {} p_E {}: distance {:.15}\n",
            out.n, out.key_len, out.check_len, out.p_e, out.distance
        ),
        _ => to_json(&out),
    })
}

fn cmd_formats(schema: Option<&str>) -> Result<String, CliError> {
    match schema {
        None => Ok(FORMATS_DOC.to_string()),
        Some(name) => SCHEMAS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, body)| body.to_string())
            .ok_or_else(|| {
                let names: Vec<_> = SCHEMAS.iter().map(|(n, _)| *n).collect();
                CliError::Usage(format!("unknown schema {name:?}; expected one of {}", names.join(", ")))
            }),
    }
}
