//! End-to-end verifiers over C_{p,alpha} = FS({floor(p^k alpha)}).
//!
//! * AP content of C + (p-1) C: the values y_k = s_n - Delta_k all lie in the
//!   sumset (as (s_n - x_k) + (p-1) s_{k-1}), drop by one digit at a time, and
//!   the nonzero drops form a sequence with gaps in [1, p-1] that is handed to
//!   the block-coloring extractor.
//! * C_2 + C_2 = N: a bitset check that [0, s_n] is covered, plus explicit
//!   two-summand witnesses from the gap-filling induction.
//! * Density spot-checks at three scales.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::ap::{lemma23_extract, APWitness, VdwTable};
use crate::digits::{digit_prefix_sums, DigitStream};
use crate::error::{Error, Result};
use crate::generator::GeneratorTable;
use crate::intset::{density, fs_bitmap, sumset_with_generators, IntSetBitmap};

/// y_k = s_n - (eta_0 + ... + eta_k) for k = 1..=n.
///
/// Values are stored as their distance below s_n so deep sequences never
/// need s_n itself; `top` carries s_n when the table is exact.
#[derive(Debug, Clone, Serialize)]
pub struct YSequence {
    pub n: usize,
    pub p: u32,
    #[serde(serialize_with = "crate::report::opt_big_as_string")]
    pub top: Option<BigUint>,
    /// drops[k - 1] = s_n - y_k.
    pub drops: Vec<u64>,
    /// Indices k with eta_k != 0, increasing (so y decreasing).
    pub kept: Vec<usize>,
    pub m: usize,
}

impl YSequence {
    /// y_k when s_n is known.
    pub fn value(&self, k: usize) -> Option<BigUint> {
        let top = self.top.as_ref()?;
        Some(top - self.drops[k - 1])
    }

    /// Kept values in increasing order, measured from the smallest kept value.
    pub fn kept_relative(&self) -> Vec<i64> {
        let Some(&deepest) = self.kept.last() else {
            return Vec::new();
        };
        let floor = self.drops[deepest - 1];
        self.kept
            .iter()
            .rev()
            .map(|&k| (floor - self.drops[k - 1]) as i64)
            .collect()
    }

    /// First k violating: consecutive differences in [0, p-1], and kept
    /// differences in [1, p-1].
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let p = self.p as u64;
        for (i, w) in self.drops.windows(2).enumerate() {
            let d = w[1]
                .checked_sub(w[0])
                .ok_or(format!("y increases at k = {}", i + 1))?;
            if d > p - 1 {
                return Err(format!("y_{} - y_{} = {d} > p - 1", i + 1, i + 2));
            }
        }
        for w in self.kept.windows(2) {
            let d = self.drops[w[1] - 1] - self.drops[w[0] - 1];
            if d < 1 || d > p - 1 {
                return Err(format!(
                    "kept gap {d} between k = {} and k = {}",
                    w[0], w[1]
                ));
            }
        }
        Ok(())
    }
}

pub fn y_sequence(table: &GeneratorTable, n: usize) -> Result<YSequence> {
    if n > table.depth() {
        return Err(Error::IndexOutOfRange {
            index: n,
            max: table.depth(),
        });
    }
    let digits = &table.digits()[..=n];
    let prefix = digit_prefix_sums(digits);
    let drops = prefix[1..].to_vec();
    let kept: Vec<usize> = (1..=n).filter(|&k| digits[k] != 0).collect();
    let top = table.partial_sums().ok().map(|s| s[n].clone());
    Ok(YSequence {
        n,
        p: table.radix().get(),
        top,
        m: kept.len(),
        drops,
        kept,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct YCheck {
    pub k: usize,
    pub y: u64,
    pub in_sumset: bool,
    /// s_n - x_k, the subset sum over {0..=n} minus {k}.
    pub complement_sum: u64,
    /// s_{k-1}, scaled by p - 1 in the decomposition.
    pub scaled_sum: u64,
    pub decomposition_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct YMembershipReport {
    pub pass: bool,
    pub n: usize,
    pub bound: u64,
    pub checks: Vec<YCheck>,
}

/// Checks each y_k against the bitset C + (p-1) C on [0, bound], and
/// separately verifies y_k = (s_n - x_k) + (p-1) s_{k-1} with both summands
/// members of C.
pub fn verify_y_membership(
    table: &GeneratorTable,
    n: usize,
    bound: u64,
) -> Result<YMembershipReport> {
    let seq = y_sequence(table, n)?;
    let top = seq.top.as_ref().ok_or(Error::DeltasOnly)?;
    let s_n = top.to_u64().ok_or(Error::TermOverflow { index: n })?;
    if s_n > bound {
        return Err(Error::BoundTooSmall { needed: s_n, bound });
    }
    let p = table.radix().get() as u64;
    let n_bits = usize::try_from(bound).map_err(|_| Error::BoundTooSmall {
        needed: bound,
        bound,
    })?;
    let cover = GeneratorTable::build_covering(table.stream(), bound);
    let gens = cover.terms_at_most(bound)?;
    let c = fs_bitmap(&gens, n_bits);
    let sum = sumset_with_generators(&c, &gens, p - 1, n_bits);

    let x = table.terms_u64(n)?;
    let s = table.partial_sums_u64(n)?;
    let checks: Vec<YCheck> = (1..=n)
        .map(|k| {
            let y = s_n - seq.drops[k - 1];
            let complement_sum = s_n - x[k];
            let scaled_sum = s[k - 1];
            let decomposition_ok = complement_sum + (p - 1) * scaled_sum == y
                && c.contains(complement_sum as usize)
                && c.contains(scaled_sum as usize);
            YCheck {
                k,
                y,
                in_sumset: sum.contains(y as usize),
                complement_sum,
                scaled_sum,
                decomposition_ok,
            }
        })
        .collect();
    Ok(YMembershipReport {
        pass: checks.iter().all(|c| c.in_sumset && c.decomposition_ok),
        n,
        bound,
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Thm21Report {
    pub p: u32,
    pub n: usize,
    pub m: usize,
    pub ratio: f64,
    pub predicted_ratio: f64,
    /// log_p(s_n), from s_n ~ alpha p^(n+1) / (p - 1).
    pub log_p_top_estimate: f64,
    /// m / log_p(s_n), the count against the log N / log p scale.
    pub ratio_vs_log_scale: f64,
    pub invariants_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_failure: Option<String>,
    /// Progression in kept-value coordinates (offsets above the smallest kept y).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ap: Option<APWitness>,
    pub ap_target_length: usize,
    pub table_limited: bool,
}

fn log_p_top_estimate(digits: &[u32], p: u32, n: usize) -> f64 {
    let pf = p as f64;
    let alpha: f64 = digits
        .iter()
        .take(64)
        .enumerate()
        .map(|(i, &d)| d as f64 * pf.powi(-(i as i32)))
        .sum();
    n as f64 + (alpha * pf / (pf - 1.0)).ln() / pf.ln()
}

/// Builds the y-sequence from the digits alone, checks its invariants and
/// extracts an AP from the kept values with gap bound K = p - 1.
pub fn thm21_pipeline(stream: &DigitStream, n: usize, table: &VdwTable) -> Result<Thm21Report> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let t = GeneratorTable::build_with_mode(stream, n, crate::generator::TableMode::DeltasOnly);
    let seq = y_sequence(&t, n)?;
    let p = stream.radix().get();
    let invariant = seq.check_invariants();
    let z = seq.kept_relative();
    let (ap, target, limited) = if z.is_empty() {
        (None, 0, false)
    } else {
        let r = lemma23_extract(&z, p as u64 - 1, table)?;
        (Some(r.ap), r.target_length, r.table_limited)
    };
    let log_top = log_p_top_estimate(t.digits(), p, n);
    Ok(Thm21Report {
        p,
        n,
        m: seq.m,
        ratio: seq.m as f64 / n as f64,
        predicted_ratio: (p - 1) as f64 / p as f64,
        log_p_top_estimate: log_top,
        ratio_vs_log_scale: seq.m as f64 / log_top,
        invariants_ok: invariant.is_ok(),
        invariant_failure: invariant.err(),
        ap,
        ap_target_length: target,
        table_limited: limited,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Thm24Report {
    pub pass: bool,
    pub n: usize,
    pub top: u64,
    pub bound: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_missing: Option<u64>,
}

fn require_base_two(table: &GeneratorTable) -> Result<()> {
    if table.radix().get() != 2 {
        return Err(Error::InvalidParameter(format!(
            "this check needs p = 2, got p = {}",
            table.radix()
        )));
    }
    Ok(())
}

/// C_2 + C_2 restricted to [0, bound], with C_2 built from every term <= bound.
pub fn doubled_set(stream: &DigitStream, bound: u64) -> Result<(IntSetBitmap, IntSetBitmap)> {
    let n_bits = usize::try_from(bound).map_err(|_| Error::BoundTooSmall {
        needed: bound,
        bound,
    })?;
    let cover = GeneratorTable::build_covering(stream, bound);
    let gens = cover.terms_at_most(bound)?;
    let c = fs_bitmap(&gens, n_bits);
    let cc = sumset_with_generators(&c, &gens, 1, n_bits);
    Ok((c, cc))
}

/// Checks [0, s_n] inside C_2 + C_2.
pub fn verify_thm24(table: &GeneratorTable, n: usize, bound: u64) -> Result<Thm24Report> {
    require_base_two(table)?;
    let top = table.partial_sums_u64(n)?[n];
    if top > bound {
        return Err(Error::BoundTooSmall { needed: top, bound });
    }
    let (_, cc) = doubled_set(table.stream(), bound)?;
    let first_missing = (0..=top as usize)
        .find(|&i| !cc.contains(i))
        .map(|i| i as u64);
    Ok(Thm24Report {
        pass: first_missing.is_none(),
        n,
        top,
        bound,
        first_missing,
    })
}

/// x = u + v with u, v subset sums of B, given by their index sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SumWitness {
    pub target: u64,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub left_sum: u64,
    pub right_sum: u64,
}

impl SumWitness {
    /// Both sums recomputed from `terms`, and both are members of `c`.
    pub fn validate(&self, terms: &[u64], c: &IntSetBitmap) -> bool {
        let sum = |idx: &[usize]| {
            idx.iter()
                .map(|&i| terms.get(i).copied())
                .sum::<Option<u64>>()
        };
        sum(&self.left) == Some(self.left_sum)
            && sum(&self.right) == Some(self.right_sum)
            && self.left_sum + self.right_sum == self.target
            && c.contains(self.left_sum as usize)
            && c.contains(self.right_sum as usize)
    }
}

/// Decomposes x following the gap-filling induction for p = 2:
///
/// * x <= s_{n-1}: descend to depth n - 1;
/// * a_n <= x <= s_n: put a_n on the left and continue with x - a_n;
/// * s_{n-1} < x < a_n: r = x - s_{n-1} is a digit prefix sum eta_0 + ... + eta_m
///   with m < n, and x = (s_{n-1} - s_{m-1}) + a_m.
///
/// The same index may appear on both sides.
pub fn witness_decompose(x: u64, table: &GeneratorTable) -> Result<SumWitness> {
    require_base_two(table)?;
    let depth = table.depth();
    let sums = table.partial_sums()?;
    let big_x = BigUint::from(x);
    let Some(mut n) = sums.iter().position(|s| *s >= big_x) else {
        let top = sums[depth].to_u64().unwrap_or(u64::MAX);
        return Err(Error::NoWitness { x, top });
    };
    let a = table.terms_u64(n)?;
    let s = table.partial_sums_u64(n)?;
    let prefix = digit_prefix_sums(&table.digits()[..=n]);

    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut rest = x;
    while rest > 0 {
        if n == 0 {
            // s_0 = a_0 = 1
            left.push(0);
            break;
        }
        if rest <= s[n - 1] {
            n -= 1;
        } else if rest >= a[n] {
            left.push(n);
            rest -= a[n];
            n -= 1;
        } else {
            let r = rest - s[n - 1];
            let m = prefix
                .iter()
                .position(|&q| q == r)
                .filter(|&m| m < n)
                .ok_or_else(|| Error::Precondition(format!("digit prefix sums skip {r}")))?;
            left.extend(m..n);
            right.push(m);
            break;
        }
    }
    left.sort_unstable();
    let left_sum = left.iter().map(|&i| a[i]).sum();
    let right_sum = right.iter().map(|&i| a[i]).sum();
    let w = SumWitness {
        target: x,
        left,
        right,
        left_sum,
        right_sum,
    };
    if w.left_sum + w.right_sum != x {
        return Err(Error::Precondition(format!(
            "witness for {x} does not add up: {w:?}"
        )));
    }
    Ok(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSweep {
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<u64>,
}

/// Builds and validates a witness for every x in `xs` (in parallel). `c` must
/// hold C_2 on a range covering s_n.
pub fn witness_sweep(table: &GeneratorTable, c: &IntSetBitmap, xs: &[u64]) -> Result<WitnessSweep> {
    require_base_two(table)?;
    let terms = table.terms_u64(table.depth())?;
    let first_failure = xs
        .par_iter()
        .filter(|&&x| match witness_decompose(x, table) {
            Ok(w) => !w.validate(&terms, c),
            Err(_) => true,
        })
        .min()
        .copied();
    Ok(WitnessSweep {
        checked: xs.len(),
        first_failure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    pub scale: u64,
    #[serde(serialize_with = "crate::report::ratio_as_string")]
    pub exact: Ratio<u64>,
    pub value: f64,
}

impl DensityPoint {
    fn new(s: &IntSetBitmap, scale: u64) -> Self {
        let exact = density(s, scale as usize);
        DensityPoint {
            scale,
            exact,
            value: *exact.numer() as f64 / *exact.denom() as f64,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub p: u32,
    pub bound: u64,
    pub set: Vec<DensityPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_factor: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sumset: Option<Vec<DensityPoint>>,
}

/// Densities of C_{p,alpha} (and of C + tC when `t` is given) on [0, N/100],
/// [0, N/10] and [0, N].
pub fn density_report(stream: &DigitStream, t: Option<u64>, bound: u64) -> Result<DensityReport> {
    if bound < 100 {
        return Err(Error::BoundTooSmall { needed: 100, bound });
    }
    let n_bits = usize::try_from(bound).map_err(|_| Error::BoundTooSmall {
        needed: bound,
        bound,
    })?;
    let cover = GeneratorTable::build_covering(stream, bound);
    let gens = cover.terms_at_most(bound)?;
    let c = fs_bitmap(&gens, n_bits);
    let scales = [bound / 100, bound / 10, bound];
    let set = scales.iter().map(|&s| DensityPoint::new(&c, s)).collect();
    let sumset = match t {
        Some(0) => return Err(Error::InvalidParameter("t must be >= 1".into())),
        Some(t) => {
            let cc = sumset_with_generators(&c, &gens, t, n_bits);
            Some(scales.iter().map(|&s| DensityPoint::new(&cc, s)).collect())
        }
        None => None,
    };
    Ok(DensityReport {
        p: stream.radix().get(),
        bound,
        set,
        scale_factor: t,
        sumset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::Radix;
    use crate::intset::sumset;

    fn stream(a: &str, p: u64) -> DigitStream {
        DigitStream::rational(a.parse().unwrap(), Radix::new(p).unwrap())
    }

    #[test]
    fn y_sequence_base_three() {
        let t = GeneratorTable::build(&stream("3/2", 3), 3);
        let y = y_sequence(&t, 3).unwrap();
        let values: Vec<_> = (1..=3).map(|k| y.value(k).unwrap()).collect();
        assert_eq!(values, vec![56u32.into(), 55u32.into(), 54u32.into()]);
        assert_eq!(y.kept, vec![1, 2, 3]);
        assert_eq!(y.m, 3);
        assert!(y.check_invariants().is_ok());
    }

    #[test]
    fn y_sequence_base_two() {
        // eta = 1,1,0,0 and s_3 = 22; only eta_1 is nonzero
        let t = GeneratorTable::build(&stream("3/2", 2), 3);
        let y = y_sequence(&t, 3).unwrap();
        let values: Vec<_> = (1..=3).map(|k| y.value(k).unwrap()).collect();
        assert_eq!(values, vec![20u32.into(), 20u32.into(), 20u32.into()]);
        assert_eq!(y.kept, vec![1]);
        assert_eq!(y.m, 1);
    }

    #[test]
    fn y_sequence_empty_kept() {
        // 5/4 = 1.01 in base 2, so eta_1 = 0
        let t = GeneratorTable::build(&stream("5/4", 2), 1);
        let y = y_sequence(&t, 1).unwrap();
        assert_eq!(y.m, 0);
        assert!(y.kept_relative().is_empty());
    }

    #[test]
    fn membership_examples() {
        let t = GeneratorTable::build(&stream("3/2", 3), 3);
        let r = verify_y_membership(&t, 3, 200).unwrap();
        assert!(r.pass);
        let first = &r.checks[0];
        assert_eq!(
            (first.y, first.complement_sum, first.scaled_sum),
            (56, 54, 1)
        );

        let t = GeneratorTable::build(&stream("3/2", 2), 2);
        assert!(verify_y_membership(&t, 2, 50).unwrap().pass);

        let t = GeneratorTable::build(&stream("7/4", 5), 0);
        let r = verify_y_membership(&t, 0, 10).unwrap();
        assert!(r.pass && r.checks.is_empty());

        let t = GeneratorTable::build(&stream("3/2", 3), 3);
        assert_eq!(
            verify_y_membership(&t, 3, 57).unwrap_err(),
            Error::BoundTooSmall {
                needed: 58,
                bound: 57
            }
        );
    }

    #[test]
    fn membership_against_pairwise_sumset() {
        // independent route: generic pairwise A + (p-1) A
        for (a, p, n) in [("7/5", 3, 5), ("11/7", 5, 3), ("5/3", 4, 4)] {
            let t = GeneratorTable::build(&stream(a, p), n);
            let top = t.partial_sums_u64(n).unwrap()[n];
            let gens = GeneratorTable::build_covering(t.stream(), top)
                .terms_at_most(top)
                .unwrap();
            let c = fs_bitmap(&gens, top as usize);
            let slow = crate::intset::scaled_sumset(&c, p as usize - 1, top as usize);
            let r = verify_y_membership(&t, n, top).unwrap();
            assert!(r.pass, "{a} p={p}");
            for ch in &r.checks {
                assert!(slow.contains(ch.y as usize));
            }
        }
    }

    #[test]
    fn thm21_all_ones() {
        let r = thm21_pipeline(&stream("3/2", 3), 100, &VdwTable::builtin()).unwrap();
        assert_eq!(r.m, 100);
        // gaps are all 1 but K = p - 1 = 2, so blocks pair up consecutive terms
        let ap = r.ap.unwrap();
        assert_eq!((ap.diff, ap.length), (2, 50));
        assert!(ap.length >= r.ap_target_length);
        assert!(r.invariants_ok);
    }

    #[test]
    fn thm21_base_two_is_a_run() {
        for a in ["5/3", "7/4", "13/8", "99/70"] {
            let r = thm21_pipeline(&stream(a, 2), 200, &VdwTable::builtin()).unwrap();
            let ap = r.ap.unwrap();
            assert_eq!((ap.diff, ap.length), (1, r.m), "{a}");
        }
    }

    #[test]
    fn thm24_examples() {
        let t = GeneratorTable::build(&stream("3/2", 2), 4);
        let r = verify_thm24(&t, 4, 92).unwrap();
        assert!(r.pass && r.top == 46);

        let t = GeneratorTable::build(&stream("5/3", 2), 12);
        let top = t.partial_sums_u64(12).unwrap()[12];
        assert!(verify_thm24(&t, 12, 2 * top).unwrap().pass);

        let t = GeneratorTable::build(&stream("5/3", 2), 1);
        assert!(verify_thm24(&t, 0, 1).unwrap().pass);
        assert!(verify_thm24(&t, 1, 4).unwrap().pass);

        let t = GeneratorTable::build(&stream("3/2", 3), 4);
        assert!(verify_thm24(&t, 2, 100).is_err());
    }

    #[test]
    fn doubled_set_matches_pairwise() {
        let (c, cc) = doubled_set(&stream("13/8", 2), 3000).unwrap();
        assert_eq!(cc, sumset(&c, &c, 3000));
    }

    #[test]
    fn witness_examples() {
        let t = GeneratorTable::build(&stream("3/2", 2), 3);
        let w = witness_decompose(11, &t).unwrap();
        assert_eq!(w.left, vec![0, 1, 2]);
        assert_eq!(w.right, vec![0]);
        assert_eq!((w.left_sum, w.right_sum), (10, 1));

        let w = witness_decompose(0, &t).unwrap();
        assert!(w.left.is_empty() && w.right.is_empty());

        // 16 = 1 + 3 + 12 is in C_2: one-sided greedy witness
        let w = witness_decompose(16, &t).unwrap();
        assert_eq!(w.left, vec![0, 1, 3]);
        assert!(w.right.is_empty());

        assert_eq!(
            witness_decompose(23, &t).unwrap_err(),
            Error::NoWitness { x: 23, top: 22 }
        );
    }

    #[test]
    fn witness_full_sweep_small() {
        for a in [
            "3/2", "5/3", "7/4", "13/8", "27/16", "9/8", "17/16", "31/16",
        ] {
            let t = GeneratorTable::build(&stream(a, 2), 14);
            let terms = t.terms_u64(14).unwrap();
            let top = t.partial_sums_u64(14).unwrap()[14];
            let c = fs_bitmap(&terms, top as usize);
            for x in 0..=top {
                let w = witness_decompose(x, &t).unwrap();
                assert!(w.validate(&terms, &c), "{a} x={x} {w:?}");
                // a member of C_2 always gets a one-sided witness
                if c.contains(x as usize) {
                    assert!(w.right.is_empty(), "{a} x={x}");
                }
            }
        }
    }

    #[test]
    fn density_report_trend() {
        let r = density_report(&stream("5/3", 2), None, 100_000).unwrap();
        assert!((r.set[2].value - 0.6).abs() < 0.01);
        let r = density_report(&stream("3/2", 5), Some(4), 1_000_000).unwrap();
        let s = r.sumset.unwrap();
        assert!(s[2].value < s[0].value);
    }
}
