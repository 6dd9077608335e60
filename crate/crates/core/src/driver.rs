//! Range verification: every prime `p` in `[lo, hi)` gets a certificate line
//! in a JSONL log, or is listed as a failure.
//!
//! Primes are cut into shards of consecutive primes. Shards are decided in
//! parallel and handed back in order to a single writer, which appends the
//! shard's lines and then atomically replaces the checkpoint. A resumed run
//! truncates the log to the length recorded in the checkpoint, so lines from
//! a shard that was being written when the process died are dropped.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criterion::{self, CriterionError, Method, WitnessCertificate};
use crate::curve::CurveOverK;
use crate::primes::{self, PrimalityMode};

pub const CHECKPOINT_VERSION: u32 = 1;
pub const DEFAULT_SHARD_PRIMES: usize = 10_000;
/// Environment variable overriding the default worker count.
pub const THREADS_ENV: &str = "FLT5_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("range [{lo}, {hi}) is invalid: need 5 <= lo < hi")]
    BadRange { lo: u64, hi: u64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed checkpoint {path}: {source}")]
    Checkpoint {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid {THREADS_ENV} value `{0}`")]
    ThreadsEnv(String),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("p = {p}: {source}")]
    Criterion {
        p: u64,
        #[source]
        source: CriterionError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DriverError + '_ {
    move |source| DriverError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Everything that changes the content of the log. A checkpoint is only
/// resumed when this matches exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub n_max: Option<u64>,
    pub curve_sha256: String,
    pub primality_mode: PrimalityMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub lo: u64,
    pub hi: u64,
    /// Every prime below this has been decided and written.
    pub next_p: u64,
    /// Length in bytes of the log covering the primes below `next_p`.
    pub log_len: u64,
    pub certificates: u64,
    pub methods: BTreeMap<Method, u64>,
    pub failures: Vec<u64>,
    pub complete: bool,
    pub fingerprint: Fingerprint,
}

impl Checkpoint {
    fn fresh(lo: u64, hi: u64, fingerprint: Fingerprint) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            lo,
            hi,
            next_p: lo,
            log_len: 0,
            certificates: 0,
            methods: BTreeMap::new(),
            failures: Vec::new(),
            complete: false,
            fingerprint,
        }
    }

    fn resumes(&self, lo: u64, hi: u64, fingerprint: &Fingerprint) -> bool {
        self.version == CHECKPOINT_VERSION
            && self.lo == lo
            && self.hi == hi
            && self.fingerprint == *fingerprint
    }
}

/// `FILE.ckpt` next to the log `FILE`.
pub fn checkpoint_path(log: &Path) -> PathBuf {
    let mut s = log.as_os_str().to_owned();
    s.push(".ckpt");
    PathBuf::from(s)
}

pub fn read_checkpoint(path: &Path) -> Result<Option<Checkpoint>, DriverError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(path)(e)),
    };
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|source| DriverError::Checkpoint {
            path: path.to_path_buf(),
            source,
        })
}

fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), DriverError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let body = serde_json::to_vec_pretty(ckpt).expect("checkpoint serializes");
    let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(&body).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Simulated crashes for testing resume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Stop cleanly after this many shards have been committed.
    StopAfter(usize),
    /// After this many committed shards, write half of the next shard's
    /// lines without updating the checkpoint, then stop.
    TornWriteAfter(usize),
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Exclusive cap on the witness search; a capped miss is retried uncapped.
    pub n_max: Option<u64>,
    /// Worker threads; falls back to `FLT5_THREADS`, then to the core count.
    pub threads: Option<usize>,
    pub shard_primes: usize,
    pub resume: bool,
    pub progress: bool,
    pub fault: Option<Fault>,
    /// Checked between shards; once set the run stops with a valid checkpoint.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_max: None,
            threads: None,
            shard_primes: DEFAULT_SHARD_PRIMES,
            resume: false,
            progress: false,
            fault: None,
            cancel: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifySummary {
    pub lo: u64,
    pub hi: u64,
    pub certificates: u64,
    pub methods: BTreeMap<Method, u64>,
    pub failures: Vec<u64>,
    /// Whether an earlier checkpoint was picked up.
    pub resumed: bool,
    pub complete: bool,
}

impl VerifySummary {
    pub fn success(&self) -> bool {
        self.complete && self.failures.is_empty()
    }
}

impl std::fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}): {} certificates", self.lo, self.hi, self.certificates)?;
        for (m, c) in &self.methods {
            write!(f, ", {m} {c}")?;
        }
        write!(f, "; {} failures", self.failures.len())?;
        if !self.failures.is_empty() {
            let shown: Vec<String> = self.failures.iter().take(20).map(u64::to_string).collect();
            write!(f, " ({})", shown.join(", "))?;
        }
        if !self.complete {
            f.write_str("; incomplete")?;
        }
        Ok(())
    }
}

/// Worker count from the explicit option, then [`THREADS_ENV`]; `None` leaves
/// the choice to rayon.
pub fn resolve_threads(explicit: Option<usize>) -> Result<Option<usize>, DriverError> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| DriverError::ThreadsEnv(v)),
        Err(_) => Ok(None),
    }
}

/// Primality guarantee for every `q = np + 1 < p^2` in the range.
fn range_mode(hi: u64) -> PrimalityMode {
    if (hi as u128) * (hi as u128) <= u64::MAX as u128 {
        PrimalityMode::Deterministic
    } else {
        PrimalityMode::Probable
    }
}

type ShardResult = Result<Vec<(u64, Option<WitnessCertificate>)>, DriverError>;

fn decide_shard(shard: &[u64], curve: &CurveOverK, n_max: Option<u64>) -> ShardResult {
    shard
        .iter()
        .map(|&p| {
            criterion::decide(&BigUint::from(p), curve, n_max)
                .map(|c| (p, c))
                .map_err(|source| DriverError::Criterion { p, source })
        })
        .collect()
}

/// Decides every prime in `[lo, hi)` and writes certificates to `out`.
pub fn verify_range(
    lo: u64,
    hi: u64,
    curve: &CurveOverK,
    out: &Path,
    opts: &VerifyOptions,
) -> Result<VerifySummary, DriverError> {
    if lo < 5 || lo >= hi {
        return Err(DriverError::BadRange { lo, hi });
    }
    let fingerprint = Fingerprint {
        n_max: opts.n_max,
        curve_sha256: curve.fingerprint(),
        primality_mode: range_mode(hi),
    };
    let ckpt_path = checkpoint_path(out);
    let previous = if opts.resume {
        read_checkpoint(&ckpt_path)?.filter(|c| c.resumes(lo, hi, &fingerprint))
    } else {
        None
    };
    let resumed = previous.is_some();
    let mut state = previous.unwrap_or_else(|| Checkpoint::fresh(lo, hi, fingerprint));

    let mut log = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(false)
        .open(out)
        .map_err(io_err(out))?;
    log.set_len(state.log_len).map_err(io_err(out))?;
    log.seek(SeekFrom::End(0)).map_err(io_err(out))?;
    write_checkpoint(&ckpt_path, &state)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = resolve_threads(opts.threads)? {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let window = pool.current_num_threads().max(1) * 2;
    let shard_len = opts.shard_primes.max(1);

    let mut primes = primes::primes_in_range(state.next_p, hi).peekable();
    let mut committed = 0usize;
    let summary = |state: &Checkpoint| VerifySummary {
        lo,
        hi,
        certificates: state.certificates,
        methods: state.methods.clone(),
        failures: state.failures.clone(),
        resumed,
        complete: state.complete,
    };

    while primes.peek().is_some() {
        let mut batch: Vec<Vec<u64>> = Vec::with_capacity(window);
        while batch.len() < window && primes.peek().is_some() {
            batch.push(primes.by_ref().take(shard_len).collect());
        }
        let results: Vec<ShardResult> = pool.install(|| {
            batch
                .par_iter()
                .map(|shard| decide_shard(shard, curve, opts.n_max))
                .collect()
        });
        for (shard, result) in batch.iter().zip(results) {
            let decided = result?;
            let mut buf = String::new();
            let mut shard_state = state.clone();
            for (p, cert) in decided {
                match cert {
                    Some(c) => {
                        buf.push_str(&serde_json::to_string(&c).expect("certificate serializes"));
                        buf.push('\n');
                        shard_state.certificates += 1;
                        *shard_state.methods.entry(c.method).or_insert(0) += 1;
                    }
                    None => shard_state.failures.push(p),
                }
            }
            if opts.fault == Some(Fault::TornWriteAfter(committed)) {
                log.write_all(&buf.as_bytes()[..buf.len() / 2]).map_err(io_err(out))?;
                log.sync_data().map_err(io_err(out))?;
                return Ok(summary(&state));
            }
            log.write_all(buf.as_bytes()).map_err(io_err(out))?;
            log.sync_data().map_err(io_err(out))?;
            shard_state.log_len += buf.len() as u64;
            shard_state.next_p = shard.last().map_or(hi, |&p| p + 1);
            write_checkpoint(&ckpt_path, &shard_state)?;
            state = shard_state;
            committed += 1;
            if opts.progress {
                eprintln!(
                    "verified up to {} ({} certificates, {} failures)",
                    state.next_p,
                    state.certificates,
                    state.failures.len()
                );
            }
            let cancelled = opts
                .cancel
                .as_ref()
                .is_some_and(|c| c.load(Ordering::Relaxed));
            if cancelled || opts.fault == Some(Fault::StopAfter(committed)) {
                return Ok(summary(&state));
            }
        }
    }
    state.next_p = hi;
    state.complete = true;
    write_checkpoint(&ckpt_path, &state)?;
    Ok(summary(&state))
}

/// Outcome of re-validating a certificate log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecheckSummary {
    pub lines: u64,
    pub accepted: u64,
    /// `(line number, reason)`, 1-based.
    pub rejected: Vec<(u64, String)>,
}

impl RecheckSummary {
    pub fn success(&self) -> bool {
        self.rejected.is_empty()
    }
}

/// Re-validates every line of a certificate log.
pub fn recheck_file(path: &Path, curve: &CurveOverK) -> Result<RecheckSummary, DriverError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = RecheckSummary::default();
    let mut last_p: Option<BigUint> = None;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let no = idx as u64 + 1;
        out.lines += 1;
        let cert: WitnessCertificate = match serde_json::from_str(&line) {
            Ok(c) => c,
            Err(e) => {
                out.rejected.push((no, format!("unparsable: {e}")));
                continue;
            }
        };
        if last_p.as_ref().is_some_and(|prev| *prev >= cert.p) {
            out.rejected.push((no, format!("p = {} out of order", cert.p)));
            continue;
        }
        last_p = Some(cert.p.clone());
        match criterion::recheck(&cert, curve) {
            Ok(()) => out.accepted += 1,
            Err(e) => out.rejected.push((no, format!("p = {}: {e}", cert.p))),
        }
    }
    Ok(out)
}
