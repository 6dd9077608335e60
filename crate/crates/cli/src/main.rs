//! `flt5`: witness search and range verification for Fermat's equation over
//! `Q(sqrt 5)`.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on usage or I/O
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use num_bigint::BigUint;

use flt5_core::criterion::{self, Precedence};
use flt5_core::curve::{self, CurveOverK};
use flt5_core::driver::{self, VerifyOptions};
use flt5_core::modarith::PrimeModulus;
use flt5_core::okring::{self, Lemma3Case};
use flt5_core::wendt;

#[derive(Parser)]
#[command(name = "flt5", version, about = "Fermat's Last Theorem over Q(sqrt 5), exponent by exponent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a certificate for the prime exponent P, or check a given n.
    Witness {
        p: BigUint,
        /// Check the theorem's conditions for this n instead of searching.
        #[arg(long)]
        n: Option<u64>,
        /// Exclusive cap on the search.
        #[arg(long)]
        nmax: Option<u64>,
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Certify every prime in [FROM, TO), or re-check a certificate log.
    Verify {
        #[arg(long, required_unless_present = "recheck")]
        from: Option<u64>,
        #[arg(long, required_unless_present = "recheck")]
        to: Option<u64>,
        #[arg(long, required_unless_present = "recheck")]
        out: Option<PathBuf>,
        #[arg(long)]
        resume: bool,
        /// Worker threads (default: $FLT5_THREADS, else all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        nmax: Option<u64>,
        /// Primes per shard.
        #[arg(long, default_value_t = driver::DEFAULT_SHARD_PRIMES)]
        shard: usize,
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Re-validate the certificates in FILE.
        #[arg(long, value_name = "FILE", conflicts_with_all = ["from", "to", "out", "resume"])]
        recheck: Option<PathBuf>,
        /// No per-shard progress on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Print the Wendt resultant W_N.
    Wendt {
        n: u64,
        #[arg(long)]
        factor: bool,
    },
    /// Whether the prime Q divides W_N (requires N | Q - 1).
    WendtDivides { q: BigUint, n: u64 },
    /// Frobenius traces of the auxiliary curve above a split prime Q.
    Aq {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Run the exceptional check for the pair (P, N).
    CheckExceptional {
        p: u64,
        n: u64,
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Exhaustive normalization check of Fermat triples modulo 4.
    Lemma1Check {
        /// p mod 12; all of 1, 5, 7, 11 when omitted.
        #[arg(long)]
        pclass: Option<u64>,
    },
    /// Sample the 2-adic valuations of the Frey invariants.
    Lemma3Check {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(path: Option<&Path>) -> Result<CurveOverK> {
    match path {
        Some(p) => curve::load_curve(p).with_context(|| format!("loading curve {}", p.display())),
        None => CurveOverK::bundled().context("loading bundled curve"),
    }
}

fn flag(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Witness { p, n, nmax, curve } => {
            let p_mode = criterion::check_exponent(&p)?;
            if let Some(n) = n {
                return match criterion::theorem_conditions(&p, n)? {
                    Ok(q_mode) => {
                        let cert = criterion::WitnessCertificate {
                            q: &p * n + 1u32,
                            p,
                            n,
                            method: criterion::Method::Theorem,
                            primality_mode: p_mode.combine(q_mode),
                        };
                        println!("{cert}");
                        Ok(ExitCode::SUCCESS)
                    }
                    Err(v) => {
                        println!("p={p} n={n} fails: {v}");
                        Ok(ExitCode::from(1))
                    }
                };
            }
            let curve = load(curve.as_deref())?;
            match criterion::decide_with(&p, &curve, nmax, Precedence::TheoremFirst)? {
                Some(cert) => {
                    println!("{cert}");
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("p={p} no witness found");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Verify {
            from,
            to,
            out,
            resume,
            threads,
            nmax,
            shard,
            curve,
            recheck,
            quiet,
        } => {
            let curve = load(curve.as_deref())?;
            if let Some(path) = recheck {
                let r = driver::recheck_file(&path, &curve)?;
                for (line, why) in &r.rejected {
                    println!("line {line}: {why}");
                }
                println!("{} lines, {} accepted, {} rejected", r.lines, r.accepted, r.rejected.len());
                return Ok(flag(r.success()));
            }
            let (Some(lo), Some(hi), Some(out)) = (from, to, out) else {
                bail!("--from, --to and --out are required");
            };
            let opts = VerifyOptions {
                n_max: nmax,
                threads,
                shard_primes: shard,
                resume,
                progress: !quiet,
                ..VerifyOptions::default()
            };
            let summary = driver::verify_range(lo, hi, &curve, &out, &opts)?;
            println!("{summary}");
            Ok(flag(summary.success()))
        }
        Command::Wendt { n, factor } => {
            let w = wendt::wendt_exact(n)?;
            if factor {
                println!("{}", wendt::format_factored(&w.value)?);
            } else {
                println!("{}", w.value);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::WendtDivides { q, n } => {
            let (m, _) = PrimeModulus::new(q)?;
            println!("{}", wendt::divides_wendt(&m, n)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Aq { q, curve } => {
            let curve = load(curve.as_deref())?;
            println!("{}", curve::trace_pair(&curve, q)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckExceptional { p, n, curve } => {
            let curve = load(curve.as_deref())?;
            let ev = criterion::exceptional_check(p, n, &curve)?;
            println!("{ev}");
            Ok(flag(ev.holds()))
        }
        Command::Lemma1Check { pclass } => {
            let classes = match pclass {
                Some(c) => vec![c],
                None => vec![1, 5, 7, 11],
            };
            let (first, second) = okring::lemma1_identities();
            println!("1+2u = u^3: {first}");
            println!("u(u^2+2) = 1+4u: {second}");
            let mut ok = first && second;
            for c in classes {
                let r = okring::lemma1_verify(c)?;
                println!(
                    "p = {c} mod 12: {} triples, {} orbits, {} failing",
                    r.triples,
                    r.orbits,
                    r.failures.len()
                );
                ok &= r.holds();
            }
            Ok(flag(ok))
        }
        Command::Lemma3Check { samples, seed } => {
            let mut ok = true;
            for case in Lemma3Case::ALL {
                let r = okring::lemma3_verify(case, samples, seed);
                let (e4, e6, ed) = case.expected();
                let ed = ed.map_or("4+2v(ABC)".to_string(), |d| d.to_string());
                println!(
                    "{case}: expected ({e4}, {e6}, {ed}), {}/{} samples agree",
                    samples - r.mismatches.len(),
                    samples
                );
                if let Some(m) = r.mismatches.first() {
                    let (v4, v6, vd) = m.valuations;
                    println!("  first mismatch: A={} B={} gives ({v4}, {v6}, {vd})", m.a, m.b);
                }
                ok &= r.holds();
            }
            Ok(flag(ok))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
