//! Arithmetic progressions: exact longest-AP search, the inverse van der
//! Waerden function, and AP extraction from bounded-gap sequences through a
//! residue coloring of blocks.

mod vdw;

pub use vdw::{
    inverse_vdw, verify_vdw_small, InverseVdw, Provenance, SearchMethod, VdwCertificate, VdwEntry,
    VdwTable, DEFAULT_NODE_BUDGET,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// start, start + diff, ..., start + (length - 1) diff, all inside a host set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct APWitness {
    pub start: i64,
    pub diff: i64,
    pub length: usize,
}

impl APWitness {
    /// Builds the witness only if every term satisfies `host`.
    pub fn checked(
        start: i64,
        diff: i64,
        length: usize,
        host: impl Fn(i64) -> bool,
    ) -> Result<Self> {
        if diff < 1 || length < 1 {
            return Err(Error::InvalidParameter(format!(
                "progression needs diff >= 1 and length >= 1 (got {diff}, {length})"
            )));
        }
        let ap = APWitness {
            start,
            diff,
            length,
        };
        for t in ap.terms() {
            if !host(t) {
                return Err(Error::Precondition(format!(
                    "term {t} of {ap:?} is not in the host set"
                )));
            }
        }
        Ok(ap)
    }

    pub fn terms(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.length as i64).map(move |i| self.start + i * self.diff)
    }

    pub fn last(&self) -> i64 {
        self.start + (self.length as i64 - 1) * self.diff
    }
}

fn check_increasing(z: &[i64]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(i) = z.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "sequence not strictly increasing at position {}: {} -> {}",
            i + 1,
            z[i],
            z[i + 1]
        )));
    }
    Ok(())
}

/// Membership test for a sorted slice, backed by a bitmap when the span is small.
struct Membership<'a> {
    sorted: &'a [i64],
    base: i64,
    bits: Option<Vec<u64>>,
}

impl<'a> Membership<'a> {
    fn new(sorted: &'a [i64]) -> Self {
        let base = sorted[0];
        let span = sorted[sorted.len() - 1].abs_diff(base);
        let bits = (span < 1 << 26).then(|| {
            let mut bits = vec![0u64; span as usize / 64 + 1];
            for &z in sorted {
                let o = (z - base) as usize;
                bits[o / 64] |= 1 << (o % 64);
            }
            bits
        });
        Membership { sorted, base, bits }
    }

    fn contains(&self, x: i64) -> bool {
        match &self.bits {
            Some(bits) => {
                let Some(o) = x.checked_sub(self.base) else {
                    return false;
                };
                if o < 0 {
                    return false;
                }
                let o = o as u64;
                bits.get((o / 64) as usize)
                    .is_some_and(|w| w >> (o % 64) & 1 == 1)
            }
            None => self.sorted.binary_search(&x).is_ok(),
        }
    }
}

/// A longest AP inside `z` (strictly increasing). Ties go to the smallest
/// difference, then the smallest start; a singleton reports diff 1.
///
/// Walks each pair (z_i, z_j) that starts a maximal progression, skipping
/// pairs whose remaining range cannot beat the current best.
pub fn longest_ap(z: &[i64]) -> Result<APWitness> {
    check_increasing(z)?;
    let n = z.len();
    let last = z[n - 1];
    if (last - z[0]) as u128 == (n - 1) as u128 {
        return Ok(APWitness {
            start: z[0],
            diff: 1,
            length: n,
        });
    }
    let member = Membership::new(z);
    let mut best = APWitness {
        start: z[0],
        diff: 1,
        length: 1,
    };

    for i in 0..n {
        for j in i + 1..n {
            let d = z[j] - z[i];
            let reach = ((last - z[i]) / d) as usize + 1;
            if reach < best.length {
                break;
            }
            if z[i]
                .checked_sub(d)
                .is_some_and(|prev| member.contains(prev))
            {
                continue;
            }
            let mut len = 2;
            let mut next = z[j].checked_add(d);
            while let Some(v) = next {
                if !member.contains(v) {
                    break;
                }
                len += 1;
                next = v.checked_add(d);
            }
            if len > best.length || (len == best.length && (d, z[i]) < (best.diff, best.start)) {
                best = APWitness {
                    start: z[i],
                    diff: d,
                    length: len,
                };
            }
        }
    }
    Ok(best)
}

/// m integers starting at 0 with consecutive differences drawn uniformly
/// from [1, K] (ChaCha8 seeded with `seed`).
pub fn bounded_gap_sequence(seed: u64, m: usize, k: u64) -> Vec<i64> {
    assert!(k >= 1, "gap bound must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = Vec::with_capacity(m);
    let mut v = 0i64;
    for _ in 0..m {
        z.push(v);
        v += rng.gen_range(1..=k) as i64;
    }
    z
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma23Trial {
    pub seed: u64,
    pub extracted: APWitness,
    pub target_length: usize,
    pub longest: usize,
    pub pass: bool,
}

/// Extraction on one seeded bounded-gap sequence: the AP must lie in Z, reach
/// the certified target length, and not beat the exact longest AP.
pub fn lemma23_trial(seed: u64, m: usize, k: u64, table: &VdwTable) -> Result<Lemma23Trial> {
    let z = bounded_gap_sequence(seed, m, k);
    let r = lemma23_extract(&z, k, table)?;
    let longest = longest_ap(&z)?;
    let contained = r.ap.terms().all(|t| z.binary_search(&t).is_ok());
    Ok(Lemma23Trial {
        seed,
        extracted: r.ap,
        target_length: r.target_length,
        longest: longest.length,
        pass: contained && r.ap.length >= r.target_length && longest.length >= r.ap.length,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma23Report {
    pub ap: APWitness,
    /// inverse_vdw(K, floor(m / K)) from the certified table.
    pub target_length: usize,
    pub table_limited: bool,
    pub blocks: usize,
    /// The common residue r of the monochromatic block progression.
    pub color: u64,
}

/// Extracts an AP from `z` whose consecutive differences lie in [1, K].
///
/// After translating so z_1 = 0, block i = [iK, (i+1)K) for 0 <= i < floor(m/K)
/// is colored by the offset of its first element, chi(i) = z_s - iK in [0, K).
/// A monochromatic progression of blocks of the certified length
/// inverse_vdw(K, floor(m/K)) exists by van der Waerden; the first one in
/// (diff, start) order is extended while the color persists and mapped back
/// by adding the color and the original offset.
pub fn lemma23_extract(z: &[i64], k: u64, table: &VdwTable) -> Result<Lemma23Report> {
    check_increasing(z)?;
    if k == 0 {
        return Err(Error::InvalidParameter("gap bound K must be >= 1".into()));
    }
    if let Some(i) = z.windows(2).position(|w| (w[1] - w[0]) as u128 > k as u128) {
        return Err(Error::GapBoundViolated {
            position: i + 1,
            left: z[i],
            right: z[i + 1],
            bound: k,
        });
    }

    let m = z.len();
    let kk = k as usize;
    let blocks = m / kk;
    let origin = z[0];
    let member = |x: i64| z.binary_search(&x).is_ok();

    if blocks == 0 {
        return Ok(Lemma23Report {
            ap: APWitness::checked(origin, 1, 1, member)?,
            target_length: 1,
            table_limited: false,
            blocks,
            color: 0,
        });
    }

    let mut colors = Vec::with_capacity(blocks);
    let mut pos = 0;
    for i in 0..blocks {
        let lo = (i * kk) as i64;
        while pos < m && z[pos] - origin < lo {
            pos += 1;
        }
        match z.get(pos).map(|&v| v - origin) {
            Some(v) if v < lo + k as i64 => colors.push((v - lo) as u64),
            _ => {
                return Err(Error::Precondition(format!(
                    "block {i} = [{lo}, {}) holds no element",
                    lo + k as i64
                )))
            }
        }
    }

    let target = inverse_vdw(table, kk, blocks as u64);
    let want = target.length;
    let mut found = None;
    'search: for d in 1..=blocks.max(1) {
        if (want - 1) * d >= blocks && want > 1 {
            break;
        }
        for a in 0..blocks {
            if a + (want - 1) * d >= blocks {
                break;
            }
            let c = colors[a];
            if (1..want).all(|j| colors[a + j * d] == c) {
                found = Some((a, d));
                break 'search;
            }
        }
    }
    let Some((a, d)) = found else {
        return Err(Error::Precondition(format!(
            "no monochromatic {want}-term progression among {blocks} blocks; vdW table entry is wrong"
        )));
    };
    let color = colors[a];
    let mut len = want;
    while a + len * d < blocks && colors[a + len * d] == color {
        len += 1;
    }

    let start = origin + (a * kk) as i64 + color as i64;
    let ap = APWitness::checked(start, (d * kk) as i64, len, member)?;
    Ok(Lemma23Report {
        ap,
        target_length: want,
        table_limited: target.table_limited,
        blocks,
        color,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // every (start, diff) pair, no pruning
    fn brute_longest(z: &[i64]) -> APWitness {
        let set: std::collections::BTreeSet<i64> = z.iter().copied().collect();
        let mut best = APWitness {
            start: z[0],
            diff: 1,
            length: 1,
        };
        for (i, &a) in z.iter().enumerate() {
            for &b in &z[i + 1..] {
                let d = b - a;
                let mut len = 1;
                while set.contains(&(a + len as i64 * d)) {
                    len += 1;
                }
                if len > best.length || (len == best.length && (d, a) < (best.diff, best.start)) {
                    best = APWitness {
                        start: a,
                        diff: d,
                        length: len,
                    };
                }
            }
        }
        best
    }

    #[test]
    fn longest_examples() {
        assert_eq!(
            longest_ap(&[1, 3, 5, 8]).unwrap(),
            APWitness {
                start: 1,
                diff: 2,
                length: 3
            }
        );
        assert_eq!(
            longest_ap(&[7]).unwrap(),
            APWitness {
                start: 7,
                diff: 1,
                length: 1
            }
        );
        let run: Vec<i64> = (1..=40).collect();
        assert_eq!(longest_ap(&run).unwrap().length, 40);
        assert_eq!(longest_ap(&[]), Err(Error::Empty));
        assert!(longest_ap(&[3, 3]).is_err());
    }

    #[test]
    fn longest_tie_breaking() {
        // {0, 5, 10} and {1, 2, 3} both have length 3; diff 1 wins
        assert_eq!(
            longest_ap(&[0, 1, 2, 3, 5, 10]).unwrap(),
            APWitness {
                start: 0,
                diff: 1,
                length: 4
            }
        );
        assert_eq!(
            longest_ap(&[0, 2, 4, 7, 8, 9]).unwrap(),
            APWitness {
                start: 7,
                diff: 1,
                length: 3
            }
        );
        assert_eq!(
            longest_ap(&[-10, 0, 1, 10]).unwrap(),
            APWitness {
                start: -10,
                diff: 10,
                length: 3
            }
        );
    }

    #[test]
    fn longest_matches_brute_force_on_fixed_sets() {
        let sets: Vec<Vec<i64>> = vec![
            vec![0, 1, 3, 4, 9, 10, 12, 13],
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47],
            vec![-5, -3, 0, 1, 4, 6, 9, 12, 13, 15, 20],
            vec![0, 1_000_000_000_000, 2_000_000_000_000, 2_000_000_000_001],
        ];
        for z in sets {
            assert_eq!(longest_ap(&z).unwrap(), brute_longest(&z), "{z:?}");
        }
    }

    #[test]
    fn witness_checks_membership() {
        let z = [0i64, 2, 4, 6];
        let host = |x: i64| z.contains(&x);
        assert!(APWitness::checked(0, 2, 4, host).is_ok());
        assert!(APWitness::checked(0, 2, 5, host).is_err());
        assert!(APWitness::checked(0, 0, 2, host).is_err());
    }

    #[test]
    fn lemma23_unit_gaps() {
        let table = VdwTable::builtin();
        let z: Vec<i64> = (0..27).collect();
        let r = lemma23_extract(&z, 1, &table).unwrap();
        assert_eq!(
            r.ap,
            APWitness {
                start: 0,
                diff: 1,
                length: 27
            }
        );
        assert_eq!(r.target_length, 27);
    }

    #[test]
    fn lemma23_even_numbers() {
        let table = VdwTable::builtin();
        let m = 40;
        let z: Vec<i64> = (0..=m).map(|i| 2 * i).collect();
        let r = lemma23_extract(&z, 2, &table).unwrap();
        let want = inverse_vdw(&table, 2, (z.len() / 2) as u64).length;
        assert!(r.ap.length >= want);
        assert_eq!(r.color, 0);
        assert!(r.ap.terms().all(|t| z.contains(&t)));
    }

    #[test]
    fn lemma23_rejects_wide_gaps() {
        let table = VdwTable::builtin();
        let e = lemma23_extract(&[0, 1, 5, 6], 3, &table).unwrap_err();
        assert_eq!(
            e,
            Error::GapBoundViolated {
                position: 2,
                left: 1,
                right: 5,
                bound: 3
            }
        );
    }

    #[test]
    fn lemma23_short_input() {
        let table = VdwTable::builtin();
        let r = lemma23_extract(&[4, 6], 3, &table).unwrap();
        assert_eq!(
            r.ap,
            APWitness {
                start: 4,
                diff: 1,
                length: 1
            }
        );
        assert_eq!(r.blocks, 0);
    }

    #[test]
    fn lemma23_translates_back() {
        let table = VdwTable::builtin();
        let z: Vec<i64> = vec![100, 102, 103, 105, 107, 108, 110, 111, 113, 115, 116, 118];
        let r = lemma23_extract(&z, 2, &table).unwrap();
        assert!(r.ap.terms().all(|t| z.contains(&t)), "{r:?}");
        assert!(r.ap.length >= r.target_length);
        assert!(longest_ap(&z).unwrap().length >= r.ap.length);
    }
}
