//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use flt5_core::criterion::{self, Method, Precedence, EXCEPTIONAL_TABLE};
use flt5_core::curve::{self, CurveOverK};
use flt5_core::driver::{self, Fault, VerifyOptions};
use flt5_core::modarith::PrimeModulus;
use flt5_core::okring::{self, Lemma3Case};
use flt5_core::primes::{self, PrimalityMode};
use flt5_core::wendt;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn curve() -> Result<CurveOverK, String> {
    CurveOverK::bundled().map_err(|e| e.to_string())
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

const SMALL_WITNESSES: [(u64, u64); 10] = [
    (5, 2),
    (13, 10),
    (17, 14),
    (19, 10),
    (29, 2),
    (31, 10),
    (37, 34),
    (41, 38),
    (43, 10),
    (47, 14),
];

fn witness_table() -> Outcome {
    let e = curve()?;
    for (p, n) in SMALL_WITNESSES {
        let cert = criterion::decide_with(&big(p), &e, None, Precedence::TheoremFirst)
            .map_err(|e| e.to_string())?
            .ok_or(format!("p={p}: no certificate"))?;
        ensure(
            cert.n == n && cert.method == Method::Theorem,
            format!("p={p}: got {cert}, expected n={n}"),
        )?;
        for m in (2..n).step_by(4) {
            let smaller = criterion::theorem_conditions(&big(p), m).map_err(|e| e.to_string())?;
            ensure(smaller.is_err(), format!("p={p}: n={m} also works"))?;
        }
    }
    let out = Command::new(env!("CARGO_BIN_EXE_flt5"))
        .args(["witness", "13"])
        .output()
        .map_err(|e| e.to_string())?;
    let line = String::from_utf8_lossy(&out.stdout);
    ensure(
        line.trim() == "p=13 n=10 q=131 method=theorem",
        format!("`flt5 witness 13` printed {line:?}"),
    )?;
    Ok("ten witnesses, each minimal".into())
}

fn wendt_values() -> Outcome {
    let b = |x: i64| BigInt::from(x);
    let cases = [
        (2, b(-3), "-3"),
        (8, -(b(3).pow(7) * b(5).pow(3) * b(17).pow(3)), "-3^7 * 5^3 * 17^3"),
        (10, b(-3) * b(11).pow(9) * b(31).pow(3), "-3 * 11^9 * 31^3"),
    ];
    for (n, expected, factored) in cases {
        let w = wendt::wendt_exact(n).map_err(|e| e.to_string())?.value;
        ensure(w == expected, format!("W_{n} = {w}"))?;
        let f = wendt::format_factored(&w).map_err(|e| e.to_string())?;
        ensure(f == factored, format!("W_{n} factors as {f}"))?;
    }
    Ok("W_2, W_8, W_10 and their factorizations".into())
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0;
    for n in (1..=20u64).filter(|n| n % 6 != 0) {
        let w = wendt::wendt_exact(n).map_err(|e| e.to_string())?.value;
        for q in primes::primes_in_range(3, 2001).filter(|q| (q - 1) % n == 0) {
            let m = PrimeModulus::from_u64(q).map_err(|e| e.to_string())?;
            let fast = wendt::divides_wendt(&m, n).map_err(|e| e.to_string())?;
            let exact = (&w % BigInt::from(q)).is_zero();
            ensure(fast == exact, format!("q={q} n={n}: root test {fast}, exact {exact}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (q, n) pairs agree"))
}

fn curve_trace() -> Outcome {
    let e = curve()?;
    let pair = curve::trace_pair(&e, 89).map_err(|e| e.to_string())?;
    ensure(pair.traces == [-6, -6], format!("a_89 = {:?}", pair.traces))?;
    let mut count = 0;
    for q in curve::split_primes().take_while(|&q| q <= 1000) {
        let pair = curve::trace_pair(&e, q).map_err(|e| e.to_string())?;
        ensure(pair.satisfies_congruence(), format!("{pair} breaks a = q+1 mod 4"))?;
        count += 1;
    }
    Ok(format!("a_89 = (-6, -6); congruence at {count} split primes"))
}

fn exceptional_closure() -> Outcome {
    let e = curve()?;
    for (p, n) in EXCEPTIONAL_TABLE {
        let ev = criterion::exceptional_check(p, n, &e).map_err(|e| e.to_string())?;
        ensure(ev.q_prime && ev.q_split, format!("{ev}"))?;
        ensure(ev.q_divides_wendt == Some(false), format!("{ev}"))?;
        ensure(ev.traces_excluded, format!("{ev}"))?;
    }
    Ok("all eight pairs".into())
}

fn desk_scale() -> Outcome {
    let e = curve()?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("c.jsonl");
    let opts = VerifyOptions {
        threads: Some(1),
        ..VerifyOptions::default()
    };
    let s = driver::verify_range(5, 100_000, &e, &out, &opts).map_err(|e| e.to_string())?;
    let total = primes::primes_in_range(5, 100_000).count() as u64;
    ensure(s.success(), format!("failures: {:?}", s.failures))?;
    ensure(s.certificates == total, format!("{} of {total} primes certified", s.certificates))?;
    let text = fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let mut exceptional = BTreeSet::new();
    for line in text.lines() {
        let c: criterion::WitnessCertificate = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if c.method == Method::Exceptional {
            exceptional.insert(c.p.to_string().parse::<u64>().unwrap());
        }
        if c.p == big(7) {
            ensure(c.method == Method::Corollary2b && c.q == big(71), format!("p=7: {c}"))?;
        }
    }
    let expected: BTreeSet<u64> = [11, 23, 53, 59, 67, 79, 83, 127].into();
    ensure(
        exceptional == expected,
        format!("exceptional path taken by {exceptional:?}"),
    )?;
    Ok(format!(
        "{total} certificates, 0 failures, exceptional path {exceptional:?}"
    ))
}

fn googol() -> Outcome {
    let p = criterion::googol_prime();
    let mode = criterion::theorem_conditions(&p, 754)
        .map_err(|e| e.to_string())?
        .map_err(|v| format!("n=754 fails: {v}"))?;
    ensure(mode == PrimalityMode::Probable, "q not flagged probable")?;
    let p_mode = criterion::check_exponent(&p).map_err(|e| e.to_string())?;
    ensure(p_mode == PrimalityMode::Probable, "p not flagged probable")?;
    Ok("p = 10^100+267, n = 754 holds, primality probable".into())
}

fn lemma1() -> Outcome {
    let (first, second) = okring::lemma1_identities();
    ensure(first, "1+2u != u^3 in O_K/4")?;
    ensure(second, "u(u^2+2) != 1+4u in O_K/4")?;
    let mut orbits = 0;
    for c in [1, 5, 7, 11] {
        let r = okring::lemma1_verify(c).map_err(|e| e.to_string())?;
        ensure(r.holds(), format!("p = {c} mod 12: {} failing triples", r.failures.len()))?;
        orbits += r.orbits;
    }
    Ok(format!("4 classes, {orbits} orbits, no failures"))
}

fn lemma3() -> Outcome {
    let mut bad = Vec::new();
    for case in Lemma3Case::ALL {
        let r = okring::lemma3_verify(case, 100, 2024);
        if case == Lemma3Case::OneU2Plus2U {
            ensure(
                r.samples.iter().all(|s| s.quadratic_valuations == [1, 1, 1]),
                "remark valuations differ from 1",
            )?;
        }
        if case == Lemma3Case::Even {
            ensure(
                r.min_delta_valuation_deep().is_some_and(|v| v >= 26),
                "v(Delta) < 26 with v(A) >= 11",
            )?;
        }
        if let Some(m) = r.mismatches.first() {
            bad.push(format!(
                "{case}: {}/100 differ, e.g. A={} B={} gives {:?}",
                r.mismatches.len(),
                m.a,
                m.b,
                m.valuations
            ));
        }
    }
    if bad.is_empty() {
        Ok("all five classes match the table".into())
    } else {
        Err(bad.join("; "))
    }
}

fn determinism() -> Outcome {
    let e = curve()?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str, opts: VerifyOptions| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        driver::verify_range(5, 10_000, &e, &out, &opts).map_err(|e| e.to_string())?;
        fs::read(&out).map_err(|e| e.to_string())
    };
    let base = VerifyOptions {
        shard_primes: 100,
        ..VerifyOptions::default()
    };
    let reference = run(
        "one.jsonl",
        VerifyOptions {
            threads: Some(1),
            ..base.clone()
        },
    )?;
    for threads in [2, 4, 8] {
        let other = run(
            &format!("t{threads}.jsonl"),
            VerifyOptions {
                threads: Some(threads),
                ..base.clone()
            },
        )?;
        ensure(other == reference, format!("{threads} threads differ"))?;
    }
    let default_shards = run("default.jsonl", VerifyOptions::default())?;
    ensure(default_shards == reference, "default sharding differs")?;
    let mut kills = 0;
    for fault in [
        Fault::StopAfter(1),
        Fault::StopAfter(6),
        Fault::TornWriteAfter(0),
        Fault::TornWriteAfter(3),
        Fault::TornWriteAfter(11),
    ] {
        let name = format!("{fault:?}.jsonl");
        run(
            &name,
            VerifyOptions {
                fault: Some(fault),
                threads: Some(3),
                ..base.clone()
            },
        )?;
        let resumed = run(
            &name,
            VerifyOptions {
                resume: true,
                threads: Some(2),
                ..base.clone()
            },
        )?;
        ensure(resumed == reference, format!("resume after {fault:?} differs"))?;
        kills += 1;
    }
    Ok(format!(
        "{} bytes identical across 1/2/4/8 threads and {kills} kill/resume runs",
        reference.len()
    ))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("witness table", Duration::from_secs(1), witness_table),
        ("Wendt values", Duration::from_secs(5), wendt_values),
        ("oracle equivalence", Duration::from_secs(30), oracle_equivalence),
        ("curve trace", Duration::from_secs(60), curve_trace),
        ("exceptional closure", Duration::from_secs(60), exceptional_closure),
        ("desk-scale range", Duration::from_secs(300), desk_scale),
        ("googol exponent", Duration::from_secs(60), googol),
        ("normalization mod 4", Duration::from_secs(10), lemma1),
        ("Frey valuations", Duration::from_secs(10), lemma3),
        ("determinism and resume", Duration::from_secs(600), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > limit => Err(format!("{detail}, but took {took:.2?} > {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} ({took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
