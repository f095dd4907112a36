//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use symcanon::fixture::{available, Ref};
use symcanon::report::percent;
use symcanon::{
    classify, general_rank_strata, symmetric_rank_strata, verify_against_paper, with_threads, Budget,
    ClassificationReport, CompactSym, Error, FieldSpec, Fixture, Format, Gl2, Rank, RankStratification, ReportDocument,
    SymTensor, Tensor,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn field(p: u32) -> FieldSpec {
    FieldSpec::new(p).unwrap()
}

fn strata(p: u32, k: usize) -> RankStratification {
    symmetric_rank_strata(field(p), k, Budget::default()).unwrap()
}

/// Classifications are shared between criteria.
fn report(p: u32, k: usize) -> &'static ClassificationReport {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), &'static ClassificationReport>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(&(p, k)) {
        return r;
    }
    let r = Box::leak(Box::new(classify(field(p), k, Budget::default()).unwrap()));
    cache.lock().unwrap().insert((p, k), r);
    r
}

const ORDER3: [u32; 7] = [2, 3, 5, 7, 11, 13, 17];
const ORDER4: [u32; 4] = [2, 3, 5, 7];

fn all_fields() -> impl Iterator<Item = (u32, usize)> {
    ORDER3.iter().map(|&p| (p, 3)).chain(ORDER4.iter().map(|&p| (p, 4)))
}

fn timed_strata(p: u32, k: usize, limit: Duration) -> Result<RankStratification, String> {
    let start = Instant::now();
    let s = strata(p, k);
    let took = start.elapsed();
    ensure!(took < limit, "F_{p} k={k} took {took:?}, limit {limit:?}");
    Ok(s)
}

fn stratum_counts_order3() -> Outcome {
    let expected: [(u32, &[u64]); 7] = [
        (2, &[1, 3, 3, 1]),
        (3, &[1, 8, 24, 32, 16]),
        (5, &[1, 24, 240, 360]),
        (7, &[1, 16, 128, 688, 1232, 336]),
        (11, &[1, 120, 6600, 7920]),
        (13, &[1, 56, 1568, 16016, 10920]),
        (17, &[1, 288, 39168, 44064]),
    ];
    for (p, counts) in expected {
        let s = timed_strata(p, 3, Duration::from_secs(10))?;
        ensure!(
            s.stratum_sizes() == counts,
            "F_{p}: {:?} != {counts:?}",
            s.stratum_sizes()
        );
    }
    Ok("7 fields".into())
}

fn stratum_counts_order4() -> Outcome {
    let expected: [(u32, &[u64], u64); 4] = [
        (2, &[1, 3, 3, 1], 24),
        (3, &[1, 4, 10, 16, 19, 16, 10, 4, 1], 162),
        (5, &[1, 6, 21, 56, 126, 240, 395, 570, 690, 660, 360], 0),
        (7, &[1, 24, 276, 1932, 7119, 6615, 840], 0),
    ];
    for (p, counts, undecomposable) in expected {
        let s = timed_strata(p, 4, Duration::from_secs(120))?;
        ensure!(
            s.stratum_sizes() == counts,
            "F_{p}: {:?} != {counts:?}",
            s.stratum_sizes()
        );
        ensure!(
            s.undecomposable_count() == undecomposable,
            "F_{p}: {} undecomposable, expected {undecomposable}",
            s.undecomposable_count()
        );
    }
    let five: u64 = strata(5, 4).stratum_sizes().iter().sum();
    ensure!(five == 3125, "F_5 strata sum to {five}");
    Ok("4 fields".into())
}

fn maximum_ranks() -> Outcome {
    let order3 = [3, 4, 3, 5, 3, 4, 3];
    let order4 = [3, 8, 10, 6];
    for (&p, &m) in ORDER3.iter().zip(&order3) {
        let got = strata(p, 3).max_rank();
        ensure!(got == m, "F_{p} k=3: max rank {got}, expected {m}");
    }
    for (&p, &m) in ORDER4.iter().zip(&order4) {
        let got = strata(p, 4).max_rank();
        ensure!(got == m, "F_{p} k=4: max rank {got}, expected {m}");
    }
    ensure!(
        order3.iter().max() == Some(&5) && order4.iter().max() == Some(&10),
        "overall maxima"
    );
    Ok("11 fields".into())
}

type Key = (u32, u64, Vec<u32>);

fn orbit_inventories() -> Outcome {
    let tables = [(3, 3), (5, 3), (11, 3), (13, 3), (3, 4), (5, 4), (7, 4), (2, 3)];
    let mut matched = 0;
    let mut excluded = Vec::new();
    for (p, k) in tables {
        let fixture = Fixture::embedded(p, k).map_err(|e| e.to_string())?;
        let faulted: HashSet<usize> = fixture
            .faults(true)
            .into_iter()
            .filter_map(|f| match f.reference {
                Ref::Row(n) => Some(n - 1),
                _ => None,
            })
            .collect();
        let mut computed: HashMap<Key, usize> = HashMap::new();
        for rec in &report(p, k).records {
            let key = (rec.rank.finite().unwrap(), rec.orbit_size, rec.canonical.clone());
            *computed.entry(key).or_default() += 1;
        }
        for (i, row) in fixture.rows.iter().enumerate() {
            if faulted.contains(&i) {
                excluded.push(format!("F_{p} k={k} row {}", i + 1));
                continue;
            }
            let size = row
                .joined_size()
                .ok_or(format!("F_{p} k={k} row {}: bad size", i + 1))?;
            let key = (row.rank, size, row.canonical.clone());
            match computed.get_mut(&key) {
                Some(n) if *n > 0 => *n -= 1,
                _ => return Err(format!("F_{p} k={k} row {} has no computed orbit: {key:?}", i + 1)),
            }
            matched += 1;
        }
        let left: usize = computed.values().sum();
        ensure!(
            left == faulted.len(),
            "F_{p} k={k}: {left} computed orbits unmatched, {} rows excluded",
            faulted.len()
        );
        if !fixture.listed_undecomposable.is_empty() {
            let s = strata(p, k);
            let listed: BTreeSet<Vec<u32>> = fixture.listed_undecomposable.iter().cloned().collect();
            let actual: BTreeSet<Vec<u32>> = s
                .undecomposable()
                .into_iter()
                .map(|c| Tensor::decode(c, field(p), k).unwrap().flatten())
                .collect();
            ensure!(listed == actual, "F_{p} k={k}: listed undecomposable tensors differ");
        }
    }
    Ok(format!(
        "{matched} rows matched; excluded as self-inconsistent: {}",
        excluded.join(", ")
    ))
}

fn errata_audit() -> Outcome {
    let expected: BTreeSet<String> = [
        "p13-size-typo",
        "p17-sizes-copied",
        "p7-duplicate-row",
        "p2k4-sizes",
        "p17-field-label",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let mut found = BTreeSet::new();
    for (p, k) in available() {
        let fixture = Fixture::embedded(p, k).map_err(|e| e.to_string())?;
        let audit = verify_against_paper(report(p, k), &fixture).map_err(|e| e.to_string())?;
        ensure!(!audit.has_mismatch(), "F_{p} k={k}: MISMATCH {:?}", audit.discrepancies);
        ensure!(
            audit.stale_errata.is_empty(),
            "F_{p} k={k}: stale {:?}",
            audit.stale_errata
        );
        for d in &audit.discrepancies {
            ensure!(
                !d.computed.is_empty() && d.computed != d.printed,
                "F_{p} k={k} {}: no replacement value",
                d.reference
            );
        }
        found.extend(audit.suspected_errata());
    }
    let extra: Vec<_> = found.difference(&expected).cloned().collect();
    let missing: Vec<_> = expected.difference(&found).cloned().collect();
    ensure!(
        extra.is_empty() && missing.is_empty(),
        "{} suspected errata; unexpected {extra:?}, missing {missing:?}",
        found.len()
    );
    Ok(format!("{found:?}"))
}

fn counting_identities() -> Outcome {
    for (p, k) in all_fields() {
        let r = report(p, k);
        r.check_identities().map_err(|e| format!("F_{p} k={k}: {e}"))?;
        let group = field(p).gl2_order();
        let direct = (p <= 5 && k == 3).then(|| Gl2::new(field(p)));
        for rec in r.records.iter().chain(&r.undecomposable_records) {
            ensure!(
                group.is_multiple_of(rec.orbit_size),
                "F_{p} k={k}: size {} does not divide {group}",
                rec.orbit_size
            );
            ensure!(
                rec.orbit_size * rec.stabilizer_size == group,
                "F_{p} k={k}: orbit-stabilizer"
            );
            if let Some(g) = &direct {
                let x = SymTensor::decode(rec.code, field(p), k).unwrap();
                let n = g.stabilizer_count_direct(&x).unwrap();
                ensure!(
                    n == rec.stabilizer_size,
                    "F_{p}: direct stabilizer {n} != {}",
                    rec.stabilizer_size
                );
            }
        }
        let s = strata(p, k);
        let mut seen = HashSet::new();
        for r in 0..=s.max_rank() {
            for c in s.stratum(r) {
                ensure!(seen.insert(c), "F_{p} k={k}: {c} in two strata");
            }
        }
        for c in s.undecomposable() {
            ensure!(seen.insert(c), "F_{p} k={k}: {c} both ranked and undecomposable");
        }
        let total = u64::from(p).pow(k as u32 + 1);
        ensure!(
            seen.len() as u64 == total,
            "F_{p} k={k}: {} of {total} covered",
            seen.len()
        );
    }
    Ok("11 fields".into())
}

fn rank_inequality() -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    for (p, k) in [(2, 3), (3, 3), (5, 3), (2, 4), (3, 4)] {
        let general = general_rank_strata(field(p), k, Budget::default()).map_err(|e| e.to_string())?;
        let s = strata(p, k);
        for r in 0..=s.max_rank() {
            for c in s.stratum(r) {
                let x = Tensor::decode(c, field(p), k).unwrap();
                let rank = general.rank_of(&x).map_err(|e| e.to_string())?;
                ensure!(
                    rank <= Rank::Finite(r),
                    "F_{p} k={k} {c}: rank {rank} > symmetric rank {r}"
                );
                checked += 1;
            }
        }
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(60), "took {took:?}");
    Ok(format!("{checked} tensors"))
}

fn check_witness(s: &RankStratification, x: &SymTensor) -> Result<bool, String> {
    match (s.rank_of(x).unwrap(), s.decompose(x)) {
        (Rank::Finite(r), Ok(w)) => {
            ensure!(
                w.vectors.len() == r as usize,
                "{}: {} vectors for rank {r}",
                x.encode(),
                w.vectors.len()
            );
            let back = w.evaluate(s.field(), s.order()).unwrap();
            ensure!(&back == x, "{}: witness re-sums to {}", x.encode(), back.encode());
            Ok(true)
        }
        (Rank::Undecomposable, Err(Error::Undecomposable(_))) => Ok(false),
        (rank, other) => Err(format!("{}: rank {rank} but decompose gave {other:?}", x.encode())),
    }
}

fn witness_soundness() -> Outcome {
    let mut exhaustive = 0;
    for (p, k) in [(2, 3), (3, 3), (2, 4), (3, 4)] {
        let s = strata(p, k);
        for r in 0..=s.max_rank() {
            for c in s.stratum(r) {
                ensure!(
                    check_witness(&s, &SymTensor::decode(c, field(p), k).unwrap())?,
                    "{c} not decomposed"
                );
                exhaustive += 1;
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut sampled = 0;
    for (p, k) in all_fields().filter(|&(p, _)| p > 3) {
        let s = strata(p, k);
        let n = s.total();
        let mut decomposed = 0;
        while decomposed < 1000 {
            let idx = rng.gen_range(0..n);
            let x = SymTensor::from_compact(&CompactSym::from_index(idx, field(p), k).unwrap());
            if check_witness(&s, &x)? {
                decomposed += 1;
            }
        }
        sampled += decomposed;
    }
    Ok(format!("{exhaustive} exhaustive, {sampled} sampled"))
}

fn determinism() -> Outcome {
    let emit = |threads: usize| {
        with_threads(threads, || {
            let r = classify(field(7), 4, Budget::default()).unwrap();
            ReportDocument::from_report(&r, false).emit(Format::Structured)
        })
        .unwrap()
    };
    let many = std::thread::available_parallelism().map_or(4, |n| n.get()).max(4);
    let one = emit(1);
    ensure!(one == emit(1), "two single-threaded runs differ");
    ensure!(one == emit(many), "1 and {many} threads differ");
    Ok(format!("1 vs {many} threads, {} bytes", one.len()))
}

fn percentages() -> Outcome {
    let printed: [(u32, &[&str]); 2] = [
        (2, &["6.25", "18.75", "18.75", "6.25"]),
        (3, &["1.23", "9.88", "29.63", "39.51", "19.75"]),
    ];
    let hundredths = |s: &str| -> i64 {
        let (whole, frac) = s.split_once('.').unwrap();
        whole.parse::<i64>().unwrap() * 100 + frac.parse::<i64>().unwrap()
    };
    for (p, expected) in printed {
        let s = strata(p, 3);
        ensure!(s.stratum_sizes().len() == expected.len(), "F_{p}: stratum count");
        for (&n, &want) in s.stratum_sizes().iter().zip(expected) {
            let got = percent(n, s.total());
            ensure!(
                (hundredths(&got) - hundredths(want)).abs() <= 1,
                "F_{p}: {got}% vs {want}%"
            );
        }
    }
    Ok("F_2 and F_3".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("stratum counts, order 3", stratum_counts_order3),
        ("stratum counts, order 4", stratum_counts_order4),
        ("maximum symmetric ranks", maximum_ranks),
        ("orbit inventories", orbit_inventories),
        ("errata audit", errata_audit),
        ("counting identities", counting_identities),
        ("rank inequality", rank_inequality),
        ("witness soundness", witness_soundness),
        ("determinism", determinism),
        ("percentage rendering", percentages),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
