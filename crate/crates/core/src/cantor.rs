//! Cantor-type sequences as subset sums: explicit generators for the four
//! prefix families, the super-increasing converse, and greedy recovery of
//! generators from a (truncated) set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intset::{
    fs_bitmap, piecewise_shift_invariant, sumset, IntSetBitmap, ShiftInvarianceReport,
};

/// Prefix families. P1 = {0,1,k,...}, P2 = {0..3,k,...}, P3 = {0..7,k,...},
/// P4 = {0..r,k,...}; k is the first member after the first gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family")]
pub enum PrefixSpec {
    P1 { k: u64 },
    P2 { k: u64 },
    P3 { k: u64 },
    P4 { r: u64, k: u64 },
}

impl PrefixSpec {
    pub fn new(family: u8, k: u64, r: Option<u64>) -> Result<Self> {
        let spec = match (family, r) {
            (1, None) => PrefixSpec::P1 { k },
            (2, None) => PrefixSpec::P2 { k },
            (3, None) => PrefixSpec::P3 { k },
            (4, Some(r)) => PrefixSpec::P4 { r, k },
            (4, None) => return Err(Error::InvalidParameter("P4 needs r".into())),
            (1..=3, Some(_)) => return Err(Error::InvalidParameter("only P4 takes r".into())),
            _ => return Err(Error::InvalidParameter(format!("unknown family P{family}"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PrefixSpec::P1 { k } => k > 2,
            PrefixSpec::P2 { k } => k > 4,
            PrefixSpec::P3 { k } => k > 8,
            PrefixSpec::P4 { r, k } => r >= 10 && k > r + 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "parameters out of range for {self:?}"
            )))
        }
    }

    /// Last member of the initial interval [0, r].
    pub fn run_end(&self) -> u64 {
        match *self {
            PrefixSpec::P1 { .. } => 1,
            PrefixSpec::P2 { .. } => 3,
            PrefixSpec::P3 { .. } => 7,
            PrefixSpec::P4 { r, .. } => r,
        }
    }

    pub fn first_after_gap(&self) -> u64 {
        match *self {
            PrefixSpec::P1 { k }
            | PrefixSpec::P2 { k }
            | PrefixSpec::P3 { k }
            | PrefixSpec::P4 { k, .. } => k,
        }
    }

    /// {0, ..., run_end, k} as a bitmap on [0, k].
    pub fn pattern(&self) -> IntSetBitmap {
        let k = self.first_after_gap() as usize;
        IntSetBitmap::from_members(k, (0..=self.run_end() as usize).chain([k]))
    }
}

/// Strictly increasing positive generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct GeneratorSet(Vec<u64>);

impl GeneratorSet {
    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.first() == Some(&0) {
            return Err(Error::InvalidParameter(
                "generators must be positive".into(),
            ));
        }
        if let Some(w) = elements.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "generators must increase strictly: {} then {}",
                w[0], w[1]
            )));
        }
        Ok(GeneratorSet(elements))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Construction {
    pub spec: PrefixSpec,
    pub generators: GeneratorSet,
    /// P4 only: n with C(n+1,2) <= r < C(n+2,2), and s = r - C(n+1,2).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    /// The direct P4 recipe {1..n-1, n+s} leaves a hole when
    /// n + s > C(n,2) + 1 (only r = 14); the top two generators are then
    /// rebalanced.
    pub rebalanced: bool,
}

fn binom2(n: u64) -> u64 {
    n * (n - 1) / 2
}

/// Generators whose subset sums start with the prefix pattern of `spec`.
/// Zeros in the textbook generator lists add nothing to subset sums and are
/// left out.
pub fn construct_b(spec: PrefixSpec) -> Result<Construction> {
    spec.validate()?;
    let plain = |v: Vec<u64>| -> Result<Construction> {
        Ok(Construction {
            spec,
            generators: GeneratorSet::new(v)?,
            n: None,
            s: None,
            rebalanced: false,
        })
    };
    match spec {
        PrefixSpec::P1 { k } => plain(vec![1, k]),
        PrefixSpec::P2 { k } => plain(vec![1, 2, k]),
        PrefixSpec::P3 { k } => plain(vec![1, 2, 4, k]),
        PrefixSpec::P4 { r, k } => {
            let mut n = 1;
            while binom2(n + 2) <= r {
                n += 1;
            }
            let s = r - binom2(n + 1);
            let mut gens: Vec<u64> = (1..n).collect();
            let top = n + s;
            let rebalanced = top > binom2(n) + 1;
            if rebalanced {
                // {1..n-2} reaches C(n-1,2); split the remaining mass over two
                // generators a < b with a <= C(n-1,2) + 1 and b <= C(n-1,2) + a + 1
                gens.pop();
                let base = binom2(n - 1);
                let rest = r - base;
                let a = (base + 1).min(rest / 2);
                let b = rest - a;
                if b <= a || b > base + a + 1 {
                    return Err(Error::Precondition(format!("cannot realize r = {r}")));
                }
                gens.extend([a, b]);
            } else {
                gens.push(top);
            }
            gens.push(k);
            Ok(Construction {
                spec,
                generators: GeneratorSet::new(gens)?,
                n: Some(n),
                s: Some(s),
                rebalanced,
            })
        }
    }
}

/// C(n+1,2) - n >= C(n+2,2) - C(n+1,2), evaluated exactly.
pub fn check_prefix_condition(n: u64) -> bool {
    let lhs = binom2(n + 1) as i128 - n as i128;
    let rhs = binom2(n + 2) as i128 - binom2(n + 1) as i128;
    lhs >= rhs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuperincreasingViolation {
    /// 1-based position of the offending element.
    pub position: usize,
    pub element: u64,
    pub preceding_sum: u64,
}

/// Every element exceeds the sum of all before it, starting from b_1 = 1.
pub fn superincreasing(b: &[u64]) -> std::result::Result<(), SuperincreasingViolation> {
    if let Some(&first) = b.first() {
        if first != 1 {
            return Err(SuperincreasingViolation {
                position: 1,
                element: first,
                preceding_sum: 0,
            });
        }
    }
    let mut acc = 0u128;
    for (i, &x) in b.iter().enumerate() {
        if (x as u128) <= acc {
            return Err(SuperincreasingViolation {
                position: i + 1,
                element: x,
                preceding_sum: acc.min(u64::MAX as u128) as u64,
            });
        }
        acc += x as u128;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CantorTypeReport {
    pub pass: bool,
    pub shift_invariance: ShiftInvarianceReport,
    /// FS(b_1..b_j) = FS(b_1..b_{j-1}) + {0, b_j} for every j.
    pub decomposition_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_failure_depth: Option<usize>,
}

/// Shift invariance of FS(B) cap [0, bound] (gaps unresolved at the bound
/// excluded) plus the one-generator-at-a-time decomposition.
pub fn check_cantor_type(b: &[u64], bound: usize) -> CantorTypeReport {
    let full = fs_bitmap(b, bound);
    let shift_invariance = piecewise_shift_invariant(&full);
    let mut prev = fs_bitmap(&[], bound);
    let mut failure = None;
    for j in 1..=b.len() {
        let current = fs_bitmap(&b[..j], bound);
        let pair = IntSetBitmap::from_members(bound, [0, b[j - 1] as usize]);
        if sumset(&prev, &pair, bound) != current {
            failure = Some(j);
            break;
        }
        prev = current;
    }
    CantorTypeReport {
        pass: shift_invariance.pass && failure.is_none(),
        shift_invariance,
        decomposition_ok: failure.is_none(),
        decomposition_failure_depth: failure,
    }
}

/// The converse direction: for super-increasing B, FS(B) is Cantor-type.
pub fn verify_converse(b: &GeneratorSet, bound: usize) -> Result<CantorTypeReport> {
    superincreasing(b.as_slice())
        .map_err(|v| Error::Precondition(format!("not super-increasing: {v:?}")))?;
    Ok(check_cantor_type(b.as_slice(), bound))
}

#[derive(Debug, Clone, Serialize)]
pub struct Recovery {
    pub generators: GeneratorSet,
    /// FS(generators) agrees with the input on [0, resolvable_bound].
    pub resolvable_bound: usize,
    pub validated: bool,
}

/// Greedy recovery: scan upward, adopting each member not yet reachable as a
/// subset sum of the generators found so far. A reachable non-member means
/// the input is not FS of anything. Every generator <= N is seen, so the
/// whole window [0, N] is certified.
pub fn recover_generators(a: &IntSetBitmap) -> Result<Recovery> {
    if !a.contains(0) || !a.contains(1) {
        return Err(Error::Precondition("set must contain 0 and 1".into()));
    }
    let bound = a.bound();
    let mut reach = IntSetBitmap::from_members(bound, [0]);
    let mut gens = Vec::new();
    let words_a = a.words();
    let mut w = 0;
    while w < words_a.len() {
        let diff = words_a[w] ^ reach.words()[w];
        if diff == 0 {
            w += 1;
            continue;
        }
        let i = w * 64 + diff.trailing_zeros() as usize;
        if !a.contains(i) {
            return Err(Error::NotSubsetSumSet(i));
        }
        gens.push(i as u64);
        reach.or_shift_self(i);
    }
    Ok(Recovery {
        generators: GeneratorSet::new(gens)?,
        resolvable_bound: bound,
        validated: reach == *a,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PrefixSweep {
    pub cases: usize,
    pub rebalanced: Vec<PrefixSpec>,
    pub failures: Vec<PrefixSpec>,
}

/// construct_b over P1..P3 with k <= max_k and P4 with r in r_range (k from
/// r + 2 up to max_k, at least one k per r); each FS cap [0, k] must equal
/// the prefix pattern exactly.
pub fn prefix_sweep(max_k: u64, r_range: std::ops::RangeInclusive<u64>) -> PrefixSweep {
    let mut specs = Vec::new();
    for k in 3..=max_k {
        for family in 1..=3 {
            if let Ok(spec) = PrefixSpec::new(family, k, None) {
                specs.push(spec);
            }
        }
    }
    for r in r_range {
        for k in r + 2..=max_k.max(r + 2) {
            specs.push(PrefixSpec::P4 { r, k });
        }
    }
    let mut out = PrefixSweep {
        cases: specs.len(),
        rebalanced: Vec::new(),
        failures: Vec::new(),
    };
    for spec in specs {
        match construct_b(spec) {
            Ok(c) => {
                let k = spec.first_after_gap() as usize;
                if fs_bitmap(c.generators.as_slice(), k) != spec.pattern() {
                    out.failures.push(spec);
                }
                if c.rebalanced {
                    out.rebalanced.push(spec);
                }
            }
            Err(_) => out.failures.push(spec),
        }
    }
    out
}

/// Super-increasing set of `len` elements: b_1 = 1 and each next element is
/// the running sum plus 1 plus a uniform slack in [0, sum / 8].
pub fn random_superincreasing(seed: u64, len: usize) -> GeneratorSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(len);
    let mut sum = 0u64;
    for _ in 0..len {
        let next = sum + 1 + rng.gen_range(0..=sum / 8);
        out.push(next);
        sum += next;
    }
    GeneratorSet(out)
}
