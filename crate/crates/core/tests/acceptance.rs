//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use csl::ap::{self, inverse_vdw, VdwTable};
use csl::cantor;
use csl::digits::{DigitStream, Radix, RationalAlpha};
use csl::generator::{floor_power_oracle, verify_delta_lemma, GeneratorTable};
use csl::intset::{self, fs_bitmap};
use csl::theorems;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn alpha(s: &str) -> RationalAlpha {
    s.parse().unwrap()
}

fn radix(p: u64) -> Radix {
    Radix::new(p).unwrap()
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let el = start.elapsed();
    if el <= limit {
        Ok(el)
    } else {
        Err(format!("took {el:?}, limit {limit:?}"))
    }
}

const TWENTY: [&str; 20] = [
    "3/2",
    "5/3",
    "7/4",
    "4/3",
    "6/5",
    "7/5",
    "8/5",
    "9/5",
    "11/6",
    "13/8",
    "27/16",
    "9/7",
    "11/7",
    "13/7",
    "17/10",
    "19/11",
    "23/13",
    "31/17",
    "99/70",
    "1001/1000",
];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let n = 200;
    let mut checked = 0;
    for a in TWENTY {
        let a = alpha(a);
        for p in [2, 3, 5, 10] {
            let stream = DigitStream::rational(a, radix(p));
            let t = GeneratorTable::build(&stream, n);
            let terms = t.terms().map_err(|e| e.to_string())?;
            for (k, x) in terms.iter().enumerate() {
                if *x != floor_power_oracle(a, radix(p), k as u32) {
                    return Err(format!(
                        "alpha={a} p={p}: term {k} differs from the floor oracle"
                    ));
                }
            }
            let lemma = verify_delta_lemma(&t);
            if !lemma.pass {
                return Err(format!(
                    "alpha={a} p={p}: delta mismatch at {:?}",
                    lemma.first_failure
                ));
            }
            let sums: Vec<u64> = t
                .digits()
                .iter()
                .scan(0u64, |acc, &d| {
                    *acc += d as u64;
                    Some(*acc)
                })
                .collect();
            if t.deltas() != &sums[..] {
                return Err(format!(
                    "alpha={a} p={p}: delta is not the digit prefix sum"
                ));
            }
            checked += 1;
        }
    }
    let el = within(Duration::from_secs(5), start)?;
    Ok(format!("{checked} (alpha, p) pairs to n={n}, {el:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (i, a) in ["3/2", "5/3", "7/4", "13/8", "27/16"]
        .into_iter()
        .enumerate()
    {
        let stream = DigitStream::rational(alpha(a), radix(2));
        let limit = 10_000_000;
        let cover = GeneratorTable::build_covering(&stream, limit);
        let n = cover
            .deepest_with_sum_at_most(limit)
            .map_err(|e| e.to_string())?
            .ok_or("no depth fits")?;
        let table = GeneratorTable::build(&stream, n);
        let top = table.partial_sums_u64(n).map_err(|e| e.to_string())?[n];
        let r = theorems::verify_thm24(&table, n, top).map_err(|e| e.to_string())?;
        if !r.pass {
            return Err(format!(
                "alpha={a}: {:?} missing from C2+C2",
                r.first_missing
            ));
        }
        let terms = table.terms_u64(n).map_err(|e| e.to_string())?;
        let c = fs_bitmap(&terms, top as usize);
        let mut xs: Vec<u64> = (0..=100_000u64.min(top)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        xs.extend((0..10_000).map(|_| rng.gen_range(0..=top)));
        let sweep = theorems::witness_sweep(&table, &c, &xs).map_err(|e| e.to_string())?;
        if let Some(x) = sweep.first_failure {
            return Err(format!("alpha={a}: witness for {x} fails"));
        }
        parts.push(format!("{a}:n={n},s_n={top}"));
    }
    let el = within(Duration::from_secs(60), start)?;
    Ok(format!("{} {el:.2?}", parts.join(" ")))
}

fn criterion_3() -> Outcome {
    let table = VdwTable::builtin();
    let mut kept = 0usize;
    for p in [3u64, 5, 10] {
        for seed in 0..100 {
            let stream = DigitStream::seeded(seed, radix(p));
            let r = theorems::thm21_pipeline(&stream, 10_000, &table).map_err(|e| e.to_string())?;
            if !r.invariants_ok {
                return Err(format!("p={p} seed={seed}: {:?}", r.invariant_failure));
            }
            kept += r.m;
        }
    }
    let mut membership = 0usize;
    for (p, n) in [(3u64, 12usize), (5, 8)] {
        for seed in 0..100 {
            let stream = DigitStream::seeded(seed, radix(p));
            let t = GeneratorTable::build(&stream, n);
            let top = t.partial_sums_u64(n).map_err(|e| e.to_string())?[n];
            if top > 2_000_000 {
                return Err(format!(
                    "p={p} seed={seed}: s_n={top} exceeds the bitset budget"
                ));
            }
            let r = theorems::verify_y_membership(&t, n, top).map_err(|e| e.to_string())?;
            if !r.pass {
                let bad = r
                    .checks
                    .iter()
                    .find(|c| !c.in_sumset || !c.decomposition_ok);
                return Err(format!("p={p} seed={seed} n={n}: {bad:?}"));
            }
            membership += r.checks.len();
        }
    }
    Ok(format!(
        "300 streams, {kept} kept indices with gaps in range; {membership} y_k memberships"
    ))
}

fn criterion_4() -> Outcome {
    let n = 1_000_000;
    let mut parts = Vec::new();
    for p in [3u64, 5, 10] {
        let stream = DigitStream::seeded(2024 + p, radix(p));
        let t = GeneratorTable::build_with_mode(&stream, n, csl::generator::TableMode::DeltasOnly);
        let y = theorems::y_sequence(&t, n).map_err(|e| e.to_string())?;
        let ratio = y.m as f64 / n as f64;
        let predicted = (p - 1) as f64 / p as f64;
        let rel = (ratio - predicted).abs() / predicted;
        if rel >= 0.01 {
            return Err(format!("p={p}: m/n={ratio:.5} vs {predicted:.5}"));
        }
        parts.push(format!("p={p}:m/n={ratio:.5}(rel {rel:.1e})"));
    }
    Ok(parts.join(" "))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let table = VdwTable::builtin();
    let m = 2000;
    let mut min_len = usize::MAX;
    for seed in 0..1000u64 {
        let k = 1 + seed % 3;
        let t = ap::lemma23_trial(seed, m, k, &table).map_err(|e| e.to_string())?;
        let target = inverse_vdw(&table, k as usize, (m / k as usize) as u64);
        if !t.pass || t.target_length != target.length {
            return Err(format!("seed={seed} K={k}: {t:?}"));
        }
        min_len = min_len.min(t.extracted.length);
    }
    let el = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "1000 trials, shortest extracted AP {min_len}, {el:.2?}"
    ))
}

/// Independent check that a coloring has no monochromatic k-AP.
fn ap_free(col: &[u8], k: usize) -> bool {
    let n = col.len();
    for a in 0..n {
        for d in 1..n {
            if a + (k - 1) * d >= n {
                break;
            }
            if (1..k).all(|j| col[a + j * d] == col[a]) {
                return false;
            }
        }
    }
    true
}

fn criterion_6() -> Outcome {
    let c = ap::verify_vdw_small(2, 3, ap::DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
    if c.w != 9 || !c.verified || c.witness_coloring.len() != 8 || !ap_free(&c.witness_coloring, 3)
    {
        return Err(format!("W(2,3): {c:?}"));
    }
    // every 2-coloring of [1, 9] has a mono 3-AP
    let all_fail = (0u32..1 << 9).all(|mask| {
        let col: Vec<u8> = (0..9).map(|i| (mask >> i & 1) as u8).collect();
        !ap_free(&col, 3)
    });
    if !all_fail {
        return Err("a 2-coloring of [1, 9] avoids 3-APs".into());
    }
    for k in 1..=10 {
        let c = ap::verify_vdw_small(1, k, ap::DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
        if c.w != k as u64 || !c.verified {
            return Err(format!("W(1,{k}) = {}", c.w));
        }
    }
    for s in 1..=10 {
        let c = ap::verify_vdw_small(s, 2, ap::DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
        if c.w != s as u64 + 1 || !c.verified {
            return Err(format!("W({s},2) = {}", c.w));
        }
    }
    Ok(format!(
        "W(2,3)=9 in {} nodes; W(1,k)=k and W(s,2)=s+1 for k,s <= 10",
        c.nodes
    ))
}

fn criterion_7() -> Outcome {
    let sweep = cantor::prefix_sweep(50, 10..=60);
    if !sweep.failures.is_empty() {
        return Err(format!("construction failures: {:?}", sweep.failures));
    }
    for seed in 0..200u64 {
        let len = 1 + (seed % 24) as usize;
        let b = cantor::random_superincreasing(seed, len);
        let a = fs_bitmap(b.as_slice(), b.total() as usize);
        match cantor::recover_generators(&a) {
            Ok(r) if r.generators == b && r.validated => {}
            other => return Err(format!("seed={seed} B={b:?}: {other:?}")),
        }
    }
    let boundary: Vec<bool> = (1..=100).map(cantor::check_prefix_condition).collect();
    if boundary[..3].iter().any(|&h| h) || boundary[3..].iter().any(|&h| !h) {
        return Err(format!("prefix condition boundary: {boundary:?}"));
    }
    Ok(format!(
        "{} constructions ({} rebalanced), 200 round trips, condition holds exactly for n >= 4",
        sweep.cases,
        sweep.rebalanced.len()
    ))
}

fn criterion_8() -> Outcome {
    let expected = [1, 2, 1, 3, 1, 2, 1, 4, 1, 2, 1, 3, 1, 2, 1, 5];
    let got = intset::ruler_sequence(16);
    if got != expected {
        return Err(format!("ruler prefix {got:?}"));
    }
    for level in 1..=10 {
        let r = intset::gap_index_correspondence(level);
        if !r.pass {
            return Err(format!(
                "level {level}: {:?}",
                &r.indices[..r.indices.len().min(32)]
            ));
        }
    }
    Ok("16-term prefix matches; levels 1..=10 pass".into())
}

fn criterion_9() -> Outcome {
    let n = 10_000_000;
    let mut parts = Vec::new();
    for a in ["3/2", "5/3", "7/4", "13/8", "27/16"] {
        let a = alpha(a);
        let r = theorems::density_report(&DigitStream::rational(a, radix(2)), None, n)
            .map_err(|e| e.to_string())?;
        let d = r.set[2].value;
        let target = a.den() as f64 / a.num() as f64;
        let rel = (d - target).abs() / target;
        if rel > 0.005 {
            return Err(format!(
                "alpha={a}: density {d:.5} vs 1/alpha {target:.5} (rel {rel:.2e})"
            ));
        }
        parts.push(format!("{a}:{d:.5}"));
    }
    let stream = DigitStream::rational(alpha("3/2"), radix(5));
    let r = theorems::density_report(&stream, Some(4), n).map_err(|e| e.to_string())?;
    let s: Vec<f64> = r
        .sumset
        .as_ref()
        .ok_or("no sumset series")?
        .iter()
        .map(|d| d.value)
        .collect();
    if !(s[0] > s[1] && s[1] > s[2]) {
        return Err(format!("C+4C densities not decreasing: {s:?}"));
    }
    parts.push(format!("C5+4C5: {:.4} > {:.4} > {:.4}", s[0], s[1], s[2]));
    Ok(parts.join(" "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "generator exactness", criterion_1),
        (2, "C2 + C2 covers [0, s_n]", criterion_2),
        (3, "y-sequence gaps and membership", criterion_3),
        (4, "kept-digit frequency", criterion_4),
        (5, "AP extraction property suite", criterion_5),
        (6, "van der Waerden backstop", criterion_6),
        (7, "prefix constructions and recovery", criterion_7),
        (8, "ruler correspondence", criterion_8),
        (9, "density spot-checks", criterion_9),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let el = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{el:.2?}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{el:.2?}] {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
