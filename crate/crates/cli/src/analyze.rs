//! Report generators behind `nibe analyze`. Every report is `key=value`
//! lines and depends only on the arguments and the seed.

use std::fmt::Write as _;

use nibe_core::abort_analysis::{bound_check, enumeration_size, lemma1_sweep, AbortExperiment, AnalysisError, ENUMERATION_LIMIT};
use nibe_core::bilinear::{BackendId, Bls12Pairing, PairingGroup, ToyPairing};
use nibe_core::ibe::{HashId, SchemeConfig};
use nibe_core::reduction::{lambda, measure_dbdh_advantage, ReductionParams, ToyDlogAdversary};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::CliError;

/// Element size the size comparison in the literature assumes, in bits.
pub const REFERENCE_ELEMENT_BITS: u64 = 1024;
/// Parameter sizes as quoted there for `n' = 160` ("kilobytes").
pub const QUOTED_WATERS_SIZE: u64 = 164;
pub const QUOTED_COMPACT_SIZE: u64 = 9;

#[derive(Clone, Debug)]
pub struct AnalyzeArgs {
    pub q: u64,
    pub ell: u16,
    pub n: u16,
    pub trials: Option<u64>,
    pub seed: u64,
    pub epsilon: f64,
    pub modulus: Option<u64>,
    pub exact: bool,
    pub backend: BackendId,
}

fn config(args: &AnalyzeArgs) -> Result<SchemeConfig, CliError> {
    SchemeConfig::new(args.n, args.ell, HashId::Sha256).map_err(|e| CliError::Usage(e.to_string()))
}

fn positive_q(args: &AnalyzeArgs) -> Result<usize, CliError> {
    if args.q == 0 {
        return Err(CliError::Usage("--q must be positive".into()));
    }
    Ok(args.q as usize)
}

/// Plays the reduction against the discrete-log adversary on the toy group.
/// Also returns the per-game transcript lines.
pub fn reduction(args: &AnalyzeArgs) -> Result<(String, Vec<String>), CliError> {
    let q = positive_q(args)?;
    if !(args.epsilon > 0.0 && args.epsilon < 1.0) {
        return Err(CliError::Usage("--epsilon must lie in (0, 1)".into()));
    }
    let params = ReductionParams::new(config(args)?, q, args.epsilon);
    let games = args.trials.unwrap_or(20_000);
    if games == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let grp = ToyPairing::default();
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let m = measure_dbdh_advantage(&mut ToyDlogAdversary::new(), &grp, &params, games, &mut rng)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let lam = lambda(args.q, args.ell as u32, args.n as u64);
    let threshold = params.lambda() * args.epsilon / 4.0;
    let mut out = String::new();
    let _ = writeln!(out, "mode=reduction");
    let _ = writeln!(out, "seed={}", args.seed);
    let _ = writeln!(out, "q={}", args.q);
    let _ = writeln!(out, "ell={}", args.ell);
    let _ = writeln!(out, "n={}", args.n);
    let _ = writeln!(out, "epsilon={}", args.epsilon);
    let _ = writeln!(out, "lambda={lam}");
    let _ = writeln!(out, "eta_samples={}", params.eta_samples());
    let _ = writeln!(out, "threshold={threshold:.6}");
    out.push_str(&m.to_report());
    let _ = writeln!(out, "pass={}", m.advantage() >= threshold - 3.0 * m.std_error());
    let lines = m.records.iter().map(|r| r.to_line()).collect();
    Ok((out, lines))
}

/// Random queries and challenge, survival probability against `lambda`.
pub fn abort_bound(args: &AnalyzeArgs) -> Result<String, CliError> {
    let q = positive_q(args)?;
    let ell = args.ell as u32;
    let n = args.n as usize;
    let m = 2 * args.q;
    if args.exact {
        match enumeration_size(m, n, ell) {
            Some(s) if s <= ENUMERATION_LIMIT => {}
            size => {
                return Err(CliError::Analysis(AnalysisError::Infeasible {
                    size: size.unwrap_or(u128::MAX),
                    limit: ENUMERATION_LIMIT,
                }))
            }
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let exp = AbortExperiment::random(q, ell, n, args.trials.unwrap_or(100_000), &mut rng)?;
    let report = bound_check(&exp, &mut rng);
    let mut out = String::new();
    let _ = writeln!(out, "mode=abort-bound");
    let _ = writeln!(out, "seed={}", args.seed);
    for (j, v) in exp.queries().iter().enumerate() {
        let _ = writeln!(out, "query_{j}={v:?}");
    }
    let _ = writeln!(out, "challenge={:?}", exp.v_star());
    out.push_str(&report.to_report());
    Ok(out)
}

/// Exhaustive pairwise check; `m` defaults to `2q`.
pub fn lemma1(args: &AnalyzeArgs) -> Result<String, CliError> {
    let m = match args.modulus {
        Some(m) => m,
        None => 2 * positive_q(args)? as u64,
    };
    let sweep = lemma1_sweep(m, args.n as usize, args.ell as u32)?;
    let mut out = String::new();
    let _ = writeln!(out, "mode=lemma1");
    out.push_str(&sweep.to_report());
    Ok(out)
}

fn element_sizes(backend: BackendId) -> (u64, u64, u64) {
    match backend {
        BackendId::Toy => {
            let d = ToyPairing::default().descriptor().clone();
            (d.source_len as u64, d.source_len as u64, d.target_len as u64)
        }
        BackendId::Curve => {
            let d = Bls12Pairing::new().descriptor().clone();
            (Bls12Pairing::logical_element_len() as u64, d.source_len as u64, d.target_len as u64)
        }
    }
}

/// Public parameter sizes for `n` blocks of `ell` bits against the
/// bit-per-element layout with `n * ell` entries.
pub fn sizes(args: &AnalyzeArgs) -> Result<String, CliError> {
    let cfg = config(args)?;
    let n = cfg.n() as u64;
    let n_prime = cfg.n_prime() as u64;
    let (logical, stored, target) = element_sizes(args.backend);
    let count = n + 4;
    let waters = n_prime + 4;
    let mut out = String::new();
    let _ = writeln!(out, "mode=sizes");
    let _ = writeln!(out, "n={n}");
    let _ = writeln!(out, "ell={}", cfg.ell());
    let _ = writeln!(out, "n_prime={n_prime}");
    let _ = writeln!(out, "logical_elements={count}");
    let _ = writeln!(out, "waters_logical_elements={waters}");
    let _ = writeln!(out, "backend={}", args.backend);
    let _ = writeln!(out, "logical_element_bytes={logical}");
    let _ = writeln!(out, "stored_element_bytes={stored}");
    let _ = writeln!(out, "target_element_bytes={target}");
    let _ = writeln!(out, "logical_params_bytes={}", count * logical);
    let _ = writeln!(out, "waters_logical_params_bytes={}", waters * logical);
    let _ = writeln!(out, "params_file_bytes={}", crate::format::HEADER_LEN as u64 + count * stored + target);
    let _ = writeln!(out, "reference_element_bits={REFERENCE_ELEMENT_BITS}");
    let _ = writeln!(out, "reference_params_bits={}", count * REFERENCE_ELEMENT_BITS);
    let _ = writeln!(out, "reference_waters_params_bits={}", waters * REFERENCE_ELEMENT_BITS);
    let _ = writeln!(out, "quoted_compact_size_kb={QUOTED_COMPACT_SIZE}");
    let _ = writeln!(out, "quoted_waters_size_kb={QUOTED_WATERS_SIZE}");
    Ok(out)
}
