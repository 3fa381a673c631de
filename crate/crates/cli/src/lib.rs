//! Command-line front end. [`run`] parses arguments, merges an optional
//! `key = value` config file underneath them, and dispatches to the pipeline
//! stages in `heliocover`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, CommandFactory, FromArgMatches, Parser};
use sha2::{Digest, Sha256};

pub mod commands;
pub mod config;
mod output;

pub use output::Metadata;

pub const TOOL_NAME: &str = "heliocover";

/// Exit code for a validation or runtime failure.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for bad usage: unknown subcommand, flag or malformed value.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "heliocover", version, about = "Sun-synchronous constellation design against time-varying demand")]
pub struct Cli {
    /// Flat `key = value` file; keys are flag names, flags given on the
    /// command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Directory for output files. Without it the primary output goes to
    /// stdout and sidecars are skipped.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: commands::Command,
}

#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Config(String),
    Core(heliocover::Error),
}

impl From<heliocover::Error> for CliError {
    fn from(e: heliocover::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) | CliError::Core(_) => EXIT_FAILURE,
        }
    }

    /// Single line: `error kind=<tag> message=<text>`.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(e) => ("usage", e.to_string()),
            CliError::Config(m) => ("config", m.clone()),
            CliError::Core(e) => (e.kind(), e.to_string()),
        };
        let msg = msg.split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error kind={kind} message={msg}")
    }
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    match run_inner(&argv) {
        Ok(()) => 0,
        Err(CliError::Usage(e)) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                0
            } else {
                eprintln!("{}", CliError::Usage(e).line());
                EXIT_USAGE
            }
        }
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}

fn command() -> clap::Command {
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for n in names {
        cmd = cmd.mut_subcommand(n, |s| s.args_override_self(true));
    }
    cmd.args_override_self(true)
}

fn run_inner(argv: &[OsString]) -> Result<(), CliError> {
    let cmd = command();
    let argv = match config_path(argv) {
        Some(path) => merge_config(&cmd, argv, &config::load(&path)?)?,
        None => argv.to_vec(),
    };
    let matches = cmd.clone().try_get_matches_from(&argv).map_err(CliError::Usage)?;
    let cli = Cli::from_arg_matches(&matches).map_err(CliError::Usage)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let meta = Metadata::new(name, config_hash(name, sub));
    let mut emitter = output::Emitter::new(cli.out.clone(), meta);
    for n in commands::notes(&cli.command) {
        emitter.note(n);
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if cli.threads > 0 {
        builder = builder.num_threads(cli.threads);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| commands::dispatch(&cli.command, &emitter))
}

/// `--config` is looked up by hand: the config may supply flags that a
/// full parse would report as missing.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Insert config entries as flags right after the subcommand name, so any
/// flag the user typed later overrides them. Keys that belong to another
/// subcommand are skipped, so one file can drive a whole pipeline.
fn merge_config(
    cmd: &clap::Command,
    argv: &[OsString],
    entries: &BTreeMap<String, (usize, String)>,
) -> Result<Vec<OsString>, CliError> {
    let global_values = ["--config", "--threads", "--out"];
    let mut pos = None;
    let mut skip_next = false;
    for (i, a) in argv.iter().enumerate().skip(1) {
        if skip_next {
            skip_next = false;
            continue;
        }
        let a = a.to_string_lossy();
        if global_values.contains(&a.as_ref()) {
            skip_next = true;
        } else if !a.starts_with('-') {
            pos = Some(i);
            break;
        }
    }
    // let clap report the missing or unknown subcommand
    let Some(pos) = pos else { return Ok(argv.to_vec()) };
    let name = argv[pos].to_string_lossy().into_owned();
    let Some(sub) = cmd.find_subcommand(&name) else { return Ok(argv.to_vec()) };
    let mut injected: Vec<OsString> = Vec::new();
    for (key, (line, value)) in entries {
        let long = key.replace('_', "-");
        if long == "config" {
            return Err(CliError::Config(format!("line {line}: 'config' cannot be set from a config file")));
        }
        let found = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(long.as_str()));
        let Some(arg) = found else {
            let known = cmd
                .get_subcommands()
                .any(|s| s.get_arguments().any(|a| a.get_long() == Some(long.as_str())));
            if known {
                log::debug!("config key '{key}' does not apply to '{name}'");
                continue;
            }
            return Err(CliError::Config(format!("line {line}: unknown key '{key}'")));
        };
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "yes" | "1" => injected.push(format!("--{long}").into()),
                "false" | "no" | "0" => {}
                _ => return Err(CliError::Config(format!("line {line}: '{key}' expects true or false"))),
            }
        } else {
            injected.push(format!("--{long}={value}").into());
        }
    }
    let mut out = argv[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

/// SHA-256 over the subcommand name and every resolved argument value,
/// defaults included. Thread count and output location are left out: they
/// do not change results.
pub fn config_hash(name: &str, sub: &clap::ArgMatches) -> String {
    let mut text = format!("command={name}\n");
    let mut ids: Vec<&str> = sub.ids().map(|id| id.as_str()).collect();
    ids.sort_unstable();
    for id in ids {
        if matches!(id, "threads" | "out" | "config") {
            continue;
        }
        if let Ok(Some(raw)) = sub.try_get_raw(id) {
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            text.push_str(&format!("{id}={}\n", vals.join(",")));
        }
    }
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
