//! `oss`: key generation, signing, covert embedding, and the reproduction
//! oracles from the command line.
//!
//! Exit codes: 0 success, 1 verification or extraction failure, 2 usage or
//! parse error, 3 precondition error.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use oss_core::codec::{read_covert_bundle, read_signed_message, write_covert_bundle, write_signed_message};
use oss_core::keys::{keygen, parse_key_file, KeyFile};
use oss_core::oracle::tables::{parse_table_fixture, reproduce_tables, TableFixture};
use oss_core::oracle::trace::{trace_signature, trace_subliminal};
use oss_core::sigscheme::{sign_bytes, verify_bytes, MessageVerdict};
use oss_core::sim::{render_transcript, run_scenario, Scenario, Tamper};
use oss_core::subliminal::{covert_embed_text, covert_extract_text, verify_bundle};
use oss_core::{Error, PrivateKey, PublicKey, RMode, Scheme, SeededRng, SignedMessage};
use rand::RngCore;

const BROKEN_WARNING: &str = "warning: this signature scheme is cryptanalytically broken; \
                              use these keys for study and demonstration only";

#[derive(Parser)]
#[command(
    name = "oss",
    version,
    about = "Quadratic-congruence signatures and their subliminal channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair, writing PREFIX.pub and PREFIX.key.
    Keygen {
        /// Modulus size in bits.
        #[arg(long, default_value_t = 256)]
        bits: u64,
        /// Size of the secret k in bits; defaults to half the modulus size.
        #[arg(long)]
        k_bits: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH_PREFIX")]
        out: PathBuf,
    },
    /// Sign every byte of a file.
    Sign {
        /// Private key file.
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in", value_name = "MSG")]
        input: PathBuf,
        /// Signed-message file to write.
        #[arg(long)]
        sig: PathBuf,
        /// `fresh` draws a new r per byte; `fixed:R` reuses R for every byte.
        #[arg(long, default_value = "fresh", value_parser = parse_r_mode)]
        r_mode: RMode,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify a signed-message file, optionally against a separate copy of the message.
    Verify {
        /// Public or private key file.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        sig: PathBuf,
        /// Check the pairs against this file instead of the embedded message.
        #[arg(long = "in", value_name = "MSG")]
        input: Option<PathBuf>,
    },
    /// Hide a secret inside signatures on an innocuous cover text.
    CovertEmbed {
        /// Private key file.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        secret: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        /// Covert bundle file to write.
        #[arg(long)]
        bundle: PathBuf,
    },
    /// Verify a covert bundle and print the hidden secret.
    CovertExtract {
        /// Private key file.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
    },
    /// Recompute a worked example over exact rationals.
    Trace {
        #[arg(value_enum)]
        name: TraceName,
    },
    /// Fit and regenerate the published signature tables.
    Tables {
        /// Directory of `*.table` fixtures; the built-in fixtures when omitted.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Replay the warden scenario and print its transcript.
    Demo(DemoArgs),
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, value_enum, default_value = "subliminal", conflicts_with = "scenario")]
    scheme: SchemeArg,
    /// The signed message, or the hidden secret in the subliminal scheme.
    #[arg(long, required_unless_present = "scenario", conflicts_with = "scenario")]
    secret: Option<String>,
    /// The disguise text; subliminal scheme only.
    #[arg(long, conflicts_with = "scenario")]
    cover: Option<String>,
    /// `field@pos[:random|+d|-d]` with field one of s1, s2, cover_byte, msg_byte.
    #[arg(long, value_parser = parse_tamper, conflicts_with = "scenario")]
    tamper: Option<Tamper>,
    #[arg(long, conflicts_with = "scenario")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 128, conflicts_with = "scenario")]
    bits: u64,
    /// Replay a saved scenario file instead of building one from flags.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Write the scenario that was run.
    #[arg(long, value_name = "PATH")]
    save_scenario: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceName {
    PaperSig,
    PaperSubliminal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Signature,
    Subliminal,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Signature => Scheme::Signature,
            SchemeArg::Subliminal => Scheme::Subliminal,
        }
    }
}

fn parse_r_mode(s: &str) -> Result<RMode, String> {
    match s {
        "fresh" => Ok(RMode::Fresh),
        _ => s
            .strip_prefix("fixed:")
            .and_then(|r| r.parse::<BigInt>().ok())
            .map(RMode::Fixed)
            .ok_or_else(|| format!("expected `fresh` or `fixed:R`, got {s:?}")),
    }
}

fn parse_tamper(s: &str) -> Result<Tamper, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failed command: the exit code and what to print on stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotCoprime { .. }
            | Error::EvenModulus
            | Error::InvalidParameter(_)
            | Error::CoverTooShort { .. } => 3,
            Error::ExtractOutOfRange { .. } | Error::NoFit(_) => 1,
            _ => 2,
        };
        Failure::new(code, e)
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?).map_err(|_| Failure::new(2, format!("{}: not UTF-8", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

#[cfg(unix)]
fn write_private(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    use std::os::unix::fs::OpenOptionsExt;
    fs::OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .mode(0o600)
        .open(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

#[cfg(not(unix))]
fn write_private(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write(path, bytes)
}

fn rng(seed: Option<u64>) -> SeededRng {
    seed.map_or_else(SeededRng::from_entropy, SeededRng::from_seed)
}

fn load_private(path: &Path) -> Result<PrivateKey, Failure> {
    match parse_key_file(&read_text(path)?)? {
        KeyFile::Private(k) => Ok(k),
        KeyFile::Public(_) => Err(Failure::new(
            2,
            format!("{}: a private key is required", path.display()),
        )),
    }
}

fn load_public(path: &Path) -> Result<PublicKey, Failure> {
    Ok(parse_key_file::<BigInt>(&read_text(path)?)?.public())
}

fn check_modulus(file_n: &BigInt, key_n: &BigInt) -> Result<(), Failure> {
    if file_n == key_n {
        Ok(())
    } else {
        Err(Failure::new(
            1,
            "signatures were made under a different modulus than the key's",
        ))
    }
}

fn report_verdict(verdict: &MessageVerdict, text: &[u8]) -> u8 {
    let mut out = String::new();
    for (i, ok) in verdict.per_byte.iter().enumerate() {
        let byte = text
            .get(i)
            .map_or_else(String::new, |b| [*b].escape_ascii().to_string());
        out += &format!("byte {i} '{byte}' {}\n", if *ok { "ok" } else { "FAIL" });
    }
    if let Some((message, pairs)) = verdict.length_mismatch {
        out += &format!("length mismatch: {message} bytes, {pairs} pairs\n");
    }
    let valid = verdict.is_valid();
    out += if valid {
        "verdict: valid\n"
    } else {
        "verdict: INVALID\n"
    };
    print!("{out}");
    u8::from(!valid)
}

fn cmd_keygen(bits: u64, k_bits: Option<u64>, seed: Option<u64>, out: &Path) -> CmdResult {
    eprintln!("{BROKEN_WARNING}");
    let kp = keygen(bits, k_bits.unwrap_or(bits.div_ceil(2)), &mut rng(seed))?;
    let prefix = out.as_os_str().to_owned();
    let with_ext = |ext: &str| {
        let mut p = prefix.clone();
        p.push(ext);
        PathBuf::from(p)
    };
    write(&with_ext(".pub"), kp.public.to_key_file().as_bytes())?;
    write_private(&with_ext(".key"), kp.private.to_key_file().as_bytes())?;
    println!("n has {} bits", kp.n().bits());
    Ok(0)
}

fn cmd_sign(key: &Path, input: &Path, sig: &Path, r_mode: &RMode, seed: Option<u64>) -> CmdResult {
    let key = load_private(key)?;
    let message = read(input)?;
    let signed = sign_bytes(&message, &key, &mut rng(seed), r_mode)?;
    write(sig, &write_signed_message(&signed, key.n()))?;
    println!("signed {} bytes", signed.message.len());
    Ok(0)
}

fn cmd_verify(key: &Path, sig: &Path, input: Option<&Path>) -> CmdResult {
    let key = load_public(key)?;
    let (n, mut signed) = read_signed_message::<BigInt>(&read(sig)?)?;
    check_modulus(&n, key.n())?;
    if let Some(path) = input {
        signed = SignedMessage {
            message: read(path)?,
            pairs: signed.pairs,
        };
    }
    Ok(report_verdict(&verify_bytes(&signed, &key), &signed.message))
}

fn cmd_covert_embed(key: &Path, secret: &Path, cover: &Path, bundle: &Path) -> CmdResult {
    let key = load_private(key)?;
    let made = covert_embed_text(&read(secret)?, &read(cover)?, &key)?;
    write(bundle, &write_covert_bundle(&made, key.n()))?;
    eprintln!("embedded into {} cover bytes", made.cover.len());
    Ok(0)
}

fn cmd_covert_extract(key: &Path, bundle: &Path) -> CmdResult {
    let key = load_private(key)?;
    let (n, bundle) = read_covert_bundle::<BigInt>(&read(bundle)?)?;
    check_modulus(&n, key.n())?;
    let verdict = verify_bundle(&bundle, &key.public());
    if !verdict.is_valid() {
        let failed: Vec<String> = verdict
            .per_byte
            .iter()
            .enumerate()
            .filter(|(_, ok)| !**ok)
            .map(|(i, _)| i.to_string())
            .collect();
        return Err(Failure::new(
            1,
            format!("cover signature does not verify at positions [{}]", failed.join(",")),
        ));
    }
    let secret = covert_extract_text(&bundle, &key).map_err(|e| Failure::new(1, e))?;
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(&secret)
        .and_then(|()| stdout.write_all(b"\n"))
        .map_err(|e| Failure::new(2, e))?;
    Ok(0)
}

fn cmd_trace(name: TraceName) -> CmdResult {
    let report = match name {
        TraceName::PaperSig => trace_signature(),
        TraceName::PaperSubliminal => trace_subliminal(),
    };
    print!("{report}");
    Ok(u8::from(!report.verdict))
}

fn load_fixture_dir(dir: &Path) -> Result<Vec<TableFixture>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::new(2, format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "table"))
        .collect();
    if paths.is_empty() {
        return Err(Failure::new(2, format!("{}: no *.table fixtures", dir.display())));
    }
    paths.sort();
    paths
        .iter()
        .map(|p| parse_table_fixture(&read_text(p)?).map_err(|e| Failure::new(2, format!("{}: {e}", p.display()))))
        .collect()
}

fn cmd_tables(fixtures: Option<&Path>) -> CmdResult {
    let fixtures = match fixtures {
        Some(dir) => load_fixture_dir(dir)?,
        None => oss_core::oracle::tables::shipped_fixtures(),
    };
    let report = reproduce_tables(&fixtures);
    print!("{report}");
    Ok(u8::from(!report.passed()))
}

fn scenario_from_flags(args: DemoArgs) -> Result<Scenario, Failure> {
    let scheme = Scheme::from(args.scheme);
    if scheme == Scheme::Signature && args.cover.is_some() {
        return Err(Failure::new(2, "--cover only applies to the subliminal scheme"));
    }
    if scheme == Scheme::Subliminal && args.cover.is_none() {
        return Err(Failure::new(2, "the subliminal scheme needs --cover"));
    }
    let seed = args.seed.unwrap_or_else(|| SeededRng::from_entropy().next_u64());
    Ok(Scenario::with_generated_keys(
        scheme,
        args.secret.unwrap_or_default().into_bytes(),
        args.cover.map(String::into_bytes),
        args.bits,
        args.tamper,
        seed,
    )?)
}

fn cmd_demo(args: DemoArgs) -> CmdResult {
    let save_scenario = args.save_scenario.clone();
    let scenario = match &args.scenario {
        Some(path) => Scenario::from_scenario_file(&read_text(path)?)?,
        None => scenario_from_flags(args)?,
    };
    if let Some(path) = &save_scenario {
        write_private(path, scenario.to_scenario_file().as_bytes())?;
    }
    let transcript = run_scenario(&scenario)?;
    print!("{}", render_transcript(&transcript));
    Ok(u8::from(
        !(transcript.warden_verdict && transcript.receiver_output.is_ok()),
    ))
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Keygen {
            bits,
            k_bits,
            seed,
            out,
        } => cmd_keygen(bits, k_bits, seed, &out),
        Command::Sign {
            key,
            input,
            sig,
            r_mode,
            seed,
        } => cmd_sign(&key, &input, &sig, &r_mode, seed),
        Command::Verify { key, sig, input } => cmd_verify(&key, &sig, input.as_deref()),
        Command::CovertEmbed {
            key,
            secret,
            cover,
            bundle,
        } => cmd_covert_embed(&key, &secret, &cover, &bundle),
        Command::CovertExtract { key, bundle } => cmd_covert_extract(&key, &bundle),
        Command::Trace { name } => cmd_trace(name),
        Command::Tables { fixtures } => cmd_tables(fixtures.as_deref()),
        Command::Demo(args) => cmd_demo(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("oss: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
