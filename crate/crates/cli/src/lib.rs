//! The `nibe` command-line tool: parameter setup, key extraction and
//! hybrid file encryption over the identity-based scheme, plus analysis
//! reports for its security reduction.
//!
//! Exit codes: 0 success, 2 usage or format error, 3 cryptographic
//! rejection, 4 internal error.

pub mod analyze;
pub mod format;
pub mod kem;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nibe_core::abort_analysis::AnalysisError;
use nibe_core::bilinear::{BackendId, Bls12Pairing, PairingGroup, ToyPairing};
use nibe_core::ibe::{keygen, setup, setup_with_oracle, EncodedIdentity, HashId, SchemeConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::format::{FileKind, FormatError, Header};
use crate::kem::OpenError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: key does not verify against the parameters")]
    KeyRejected(PathBuf),
    #[error("authentication failed: wrong key or tampered envelope")]
    TagMismatch,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Format { .. } | CliError::Io { .. } | CliError::Analysis(_) => 2,
            CliError::KeyRejected(_) | CliError::TagMismatch => 3,
            CliError::Internal(_) => 4,
        }
    }

    /// Short machine-readable class, printed with the message.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Format { source, .. } => source.code(),
            CliError::Io { .. } => "io",
            CliError::KeyRejected(_) => "key-rejected",
            CliError::TagMismatch => "tag-mismatch",
            CliError::Analysis(AnalysisError::Infeasible { .. }) => "infeasible",
            CliError::Analysis(_) => "analysis",
            CliError::Internal(_) => "internal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Toy,
    Curve,
}

impl From<BackendArg> for BackendId {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Toy => BackendId::Toy,
            BackendArg::Curve => BackendId::Curve,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Reduction,
    AbortBound,
    Lemma1,
    Sizes,
}

#[derive(Debug, Parser)]
#[command(name = "nibe", version, about = "Identity-based file encryption with compact public parameters")]
pub struct Cli {
    /// Seed for all randomness; fresh entropy when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Allow the toy backend, which offers no security.
    #[arg(long, global = true)]
    pub insecure_toy: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate public parameters and a master secret.
    Setup(SetupArgs),
    /// Extract the private key of an identity.
    Keygen(KeygenArgs),
    /// Encrypt a file to an identity.
    Encrypt(EncryptArgs),
    /// Decrypt an envelope with a private key.
    Decrypt(DecryptArgs),
    /// Write an analysis report.
    Analyze(AnalyzeCmd),
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    /// Number of identity blocks.
    #[arg(long, default_value_t = 8)]
    pub n: u16,
    /// Bits per identity block.
    #[arg(long, default_value_t = 32)]
    pub ell: u16,
    #[arg(long, value_enum, env = "NIBE_BACKEND", default_value = "curve")]
    pub backend: BackendArg,
    #[arg(long)]
    pub params_out: PathBuf,
    #[arg(long)]
    pub master_out: PathBuf,
    /// Keep the exponent alpha in the master file (toy backend only).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub master: PathBuf,
    #[arg(long)]
    pub identity: String,
    #[arg(long)]
    pub key_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Recipient identity.
    #[arg(long)]
    pub to: String,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeCmd {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long, default_value_t = 1)]
    pub ell: u16,
    #[arg(long, default_value_t = 1)]
    pub n: u16,
    /// Games (reduction) or Monte Carlo samples (abort-bound).
    #[arg(long)]
    pub trials: Option<u64>,
    /// Advantage the survival estimator is tuned for (reduction).
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Modulus for the pairwise check; defaults to 2q (lemma1).
    #[arg(long)]
    pub m: Option<u64>,
    /// Require exhaustive enumeration (abort-bound).
    #[arg(long)]
    pub exact: bool,
    /// Backend whose element sizes are reported (sizes).
    #[arg(long, value_enum, env = "NIBE_BACKEND", default_value = "curve")]
    pub backend: BackendArg,
    /// Where to write the report; stdout when absent.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    /// One line per game (reduction).
    #[arg(long)]
    pub transcript_out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so a failed command never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8], mode: u32) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(mode)).map_err(io)?;
    }
    #[cfg(not(unix))]
    let _ = mode;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn format_err(path: &Path) -> impl Fn(FormatError) -> CliError + '_ {
    move |source| CliError::Format {
        path: path.to_path_buf(),
        source,
    }
}

fn allow_backend(backend: BackendId, insecure_toy: bool) -> Result<(), CliError> {
    if backend == BackendId::Toy && !insecure_toy {
        return Err(CliError::Usage(
            "the toy backend is insecure; pass --insecure-toy to use it".into(),
        ));
    }
    Ok(())
}

/// Runs `$body` with `$g` bound to the group selected by `$backend`.
macro_rules! with_group {
    ($backend:expr, $g:ident => $body:expr) => {
        match $backend {
            BackendId::Toy => {
                let $g = ToyPairing::default();
                $body
            }
            BackendId::Curve => {
                let $g = Bls12Pairing::new();
                $body
            }
        }
    };
}

fn cmd_setup(a: &SetupArgs, seed: Option<u64>, insecure_toy: bool) -> Result<(), CliError> {
    let backend = BackendId::from(a.backend);
    allow_backend(backend, insecure_toy)?;
    if a.oracle && backend != BackendId::Toy {
        return Err(CliError::Usage("--oracle is only available with the toy backend".into()));
    }
    let config = SchemeConfig::new(a.n, a.ell, HashId::Sha256).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut rng = rng(seed);
    with_group!(backend, g => {
        config.check_group(g.descriptor()).map_err(|e| CliError::Usage(e.to_string()))?;
        let (params, master) = if a.oracle {
            setup_with_oracle(&g, config, &mut rng)
        } else {
            setup(&g, config, &mut rng)
        }
        .map_err(|e| CliError::Internal(e.to_string()))?;
        let pbytes = format::encode_params(&g, &params);
        let mbytes = format::encode_master(&g, &config, &master);
        write_atomic(&a.master_out, &mbytes, 0o600)?;
        write_atomic(&a.params_out, &pbytes, 0o644)
    })
}

fn cmd_keygen(a: &KeygenArgs, seed: Option<u64>, insecure_toy: bool) -> Result<(), CliError> {
    let pbytes = read(&a.params)?;
    let header = Header::peek(FileKind::Params, &pbytes).map_err(format_err(&a.params))?;
    allow_backend(header.backend, insecure_toy)?;
    let mbytes = read(&a.master)?;
    let mut rng = rng(seed);
    with_group!(header.backend, g => {
        let params = format::decode_params(&g, &pbytes).map_err(format_err(&a.params))?;
        let master = format::decode_master(&g, &params, &mbytes).map_err(format_err(&a.master))?;
        let v = EncodedIdentity::encode(a.identity.as_bytes(), params.config());
        let key = keygen(&g, &params, &master, &v, &mut rng).map_err(|e| CliError::Internal(e.to_string()))?;
        write_atomic(&a.key_out, &format::encode_key(&g, &params, a.identity.as_bytes(), &key), 0o600)
    })
}

fn cmd_encrypt(a: &EncryptArgs, seed: Option<u64>, insecure_toy: bool) -> Result<(), CliError> {
    let pbytes = read(&a.params)?;
    let header = Header::peek(FileKind::Params, &pbytes).map_err(format_err(&a.params))?;
    allow_backend(header.backend, insecure_toy)?;
    let payload = read(&a.input)?;
    let mut rng = rng(seed);
    with_group!(header.backend, g => {
        let params = format::decode_params(&g, &pbytes).map_err(format_err(&a.params))?;
        let env = kem::seal(&g, &params, a.to.as_bytes(), &payload, &mut rng);
        write_atomic(&a.out, &env, 0o644)
    })
}

fn cmd_decrypt(a: &DecryptArgs, insecure_toy: bool) -> Result<(), CliError> {
    let pbytes = read(&a.params)?;
    let header = Header::peek(FileKind::Params, &pbytes).map_err(format_err(&a.params))?;
    allow_backend(header.backend, insecure_toy)?;
    let kbytes = read(&a.key)?;
    let ebytes = read(&a.input)?;
    with_group!(header.backend, g => {
        let params = format::decode_params(&g, &pbytes).map_err(format_err(&a.params))?;
        let key = format::decode_key(&g, &params, &kbytes).map_err(format_err(&a.key))?.key;
        if !key.is_well_formed(&g, &params) {
            return Err(CliError::KeyRejected(a.key.clone()));
        }
        let plain = kem::open(&g, &params, &key, &ebytes).map_err(|e| match e {
            OpenError::Format(source) => CliError::Format { path: a.input.clone(), source },
            OpenError::TagMismatch => CliError::TagMismatch,
        })?;
        write_atomic(&a.out, &plain, 0o600)
    })
}

fn cmd_analyze(a: &AnalyzeCmd, seed: Option<u64>) -> Result<(), CliError> {
    let args = analyze::AnalyzeArgs {
        q: a.q,
        ell: a.ell,
        n: a.n,
        trials: a.trials,
        seed: seed.unwrap_or(0),
        epsilon: a.epsilon,
        modulus: a.m,
        exact: a.exact,
        backend: a.backend.into(),
    };
    let report = match a.mode {
        Mode::Reduction => {
            let (report, lines) = analyze::reduction(&args)?;
            if let Some(path) = &a.transcript_out {
                let mut text = lines.join("\n");
                text.push('\n');
                write_atomic(path, text.as_bytes(), 0o644)?;
            }
            report
        }
        Mode::AbortBound => analyze::abort_bound(&args)?,
        Mode::Lemma1 => analyze::lemma1(&args)?,
        Mode::Sizes => analyze::sizes(&args)?,
    };
    match &a.report_out {
        Some(path) => write_atomic(path, report.as_bytes(), 0o644),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Setup(a) => cmd_setup(a, cli.seed, cli.insecure_toy),
        Command::Keygen(a) => cmd_keygen(a, cli.seed, cli.insecure_toy),
        Command::Encrypt(a) => cmd_encrypt(a, cli.seed, cli.insecure_toy),
        Command::Decrypt(a) => cmd_decrypt(a, cli.insecure_toy),
        Command::Analyze(a) => cmd_analyze(a, cli.seed),
    }
}
