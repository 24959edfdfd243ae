//! Base-p digit expansions of alpha in (1, 2).
//!
//! A stream yields eta_0, eta_1, ... with alpha = sum eta_i p^-i. Rational
//! sources are expanded by exact long division (greedy, so a terminating
//! expansion stays terminating). Seeded sources model a "typical" alpha by
//! drawing eta_1, eta_2, ... uniformly from a ChaCha8 generator.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer base p >= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Radix(u32);

impl Radix {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p > u32::MAX as u64 {
            return Err(Error::InvalidRadix(p));
        }
        Ok(Radix(p as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u64> for Radix {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        Radix::new(p)
    }
}

impl From<Radix> for u64 {
    fn from(r: Radix) -> u64 {
        r.0 as u64
    }
}

impl fmt::Display for Radix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A reduced fraction num/den with 1 < num/den < 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalAlpha {
    num: u64,
    den: u64,
}

impl RationalAlpha {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::AlphaOutOfRange { num, den });
        }
        let g = num.gcd(&den);
        let (n, d) = (num / g, den / g);
        // den < num < 2 den, written without overflow
        if n <= d || n - d >= d {
            return Err(Error::AlphaOutOfRange { num, den });
        }
        Ok(RationalAlpha { num: n, den: d })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }
}

impl FromStr for RationalAlpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let (a, b) = s.trim().split_once('/').ok_or_else(bad)?;
        let num = a.trim().parse::<u64>().map_err(|_| bad())?;
        let den = b.trim().parse::<u64>().map_err(|_| bad())?;
        RationalAlpha::new(num, den)
    }
}

impl fmt::Display for RationalAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for RationalAlpha {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RationalAlpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DigitSource {
    Rational(RationalAlpha),
    SeededRandom(u64),
}

impl fmt::Display for DigitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitSource::Rational(a) => write!(f, "alpha={a}"),
            DigitSource::SeededRandom(seed) => write!(f, "seed={seed}"),
        }
    }
}

/// The digit expansion of alpha in a fixed radix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitStream {
    radix: Radix,
    source: DigitSource,
}

impl DigitStream {
    pub fn rational(alpha: RationalAlpha, radix: Radix) -> Self {
        DigitStream {
            radix,
            source: DigitSource::Rational(alpha),
        }
    }

    pub fn seeded(seed: u64, radix: Radix) -> Self {
        DigitStream {
            radix,
            source: DigitSource::SeededRandom(seed),
        }
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    pub fn source(&self) -> DigitSource {
        self.source
    }

    /// Lazy iterator over eta_0, eta_1, ... (unbounded).
    pub fn iter(&self) -> DigitIter {
        let p = self.radix.get();
        let inner = match self.source {
            DigitSource::Rational(a) => DigitIterInner::LongDivision {
                remainder: (a.num - a.den) as u128,
                den: a.den as u128,
                p: p as u128,
            },
            DigitSource::SeededRandom(seed) => DigitIterInner::Random {
                rng: Box::new(ChaCha8Rng::seed_from_u64(seed)),
                p,
            },
        };
        DigitIter {
            leading: true,
            inner,
        }
    }

    /// eta_0 ..= eta_n.
    pub fn digits(&self, n: usize) -> Vec<u32> {
        self.iter().take(n + 1).collect()
    }
}

pub struct DigitIter {
    leading: bool,
    inner: DigitIterInner,
}

enum DigitIterInner {
    LongDivision { remainder: u128, den: u128, p: u128 },
    Random { rng: Box<ChaCha8Rng>, p: u32 },
}

impl Iterator for DigitIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.leading {
            self.leading = false;
            return Some(1);
        }
        let d = match &mut self.inner {
            DigitIterInner::LongDivision { remainder, den, p } => {
                let scaled = *remainder * *p;
                *remainder = scaled % *den;
                (scaled / *den) as u32
            }
            DigitIterInner::Random { rng, p } => rng.gen_range(0..*p),
        };
        Some(d)
    }
}

/// Digits eta_0 ..= eta_n of a rational alpha by exact long division of
/// (num - den) / den.
pub fn expand_rational(alpha: RationalAlpha, p: Radix, n: usize) -> Vec<u32> {
    DigitStream::rational(alpha, p).digits(n)
}

/// eta_0 = 1 followed by n i.i.d. uniform digits from ChaCha8 seeded with `seed`.
pub fn random_stream(seed: u64, p: Radix, n: usize) -> Vec<u32> {
    DigitStream::seeded(seed, p).digits(n)
}

/// Running sums eta_0 + ... + eta_k for every k.
pub fn digit_prefix_sums(digits: &[u32]) -> Vec<u64> {
    digits
        .iter()
        .scan(0u64, |acc, &d| {
            *acc += d as u64;
            Some(*acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn radix(p: u64) -> Radix {
        Radix::new(p).unwrap()
    }

    fn alpha(s: &str) -> RationalAlpha {
        s.parse().unwrap()
    }

    // eta_i = floor(p^i alpha) - p floor(p^(i-1) alpha), straight from big integers.
    fn digit_oracle(a: RationalAlpha, p: u64, n: usize) -> Vec<u32> {
        let floor_at = |i: usize| BigUint::from(p).pow(i as u32) * a.num() / a.den();
        let mut out = vec![1];
        for i in 1..=n {
            let d = floor_at(i) - floor_at(i - 1) * p;
            out.push(u32::try_from(d).unwrap());
        }
        out
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(
            expand_rational(alpha("3/2"), radix(2), 4),
            vec![1, 1, 0, 0, 0]
        );
        assert_eq!(
            expand_rational(alpha("5/3"), radix(2), 5),
            vec![1, 1, 0, 1, 0, 1]
        );
        assert_eq!(expand_rational(alpha("3/2"), radix(3), 3), vec![1, 1, 1, 1]);
    }

    #[test]
    fn expansion_matches_floor_oracle() {
        for s in [
            "3/2",
            "5/3",
            "7/4",
            "13/8",
            "27/16",
            "99/70",
            "17/10",
            "1000001/1000000",
        ] {
            for p in [2, 3, 5, 7, 10, 16] {
                let a = alpha(s);
                assert_eq!(
                    expand_rational(a, radix(p), 60),
                    digit_oracle(a, p, 60),
                    "{s} p={p}"
                );
            }
        }
    }

    #[test]
    fn rejects_boundary_alpha() {
        for s in ["1/1", "7/7", "2/1", "6/3", "1/2", "5/2"] {
            assert!(s.parse::<RationalAlpha>().is_err(), "{s}");
        }
        assert!(RationalAlpha::new(3, 0).is_err());
        assert!("abc".parse::<RationalAlpha>().is_err());
        assert_eq!(alpha("6/4"), alpha("3/2"));
    }

    #[test]
    fn rejects_small_radix() {
        assert_eq!(Radix::new(1), Err(Error::InvalidRadix(1)));
        assert_eq!(Radix::new(0), Err(Error::InvalidRadix(0)));
    }

    #[test]
    fn reconstruction_within_one_ulp() {
        for s in ["3/2", "5/3", "7/4", "11/7", "123/100"] {
            for p in [2u64, 3, 5, 10] {
                let a = alpha(s);
                let target = BigRational::new(a.num().into(), a.den().into());
                let digits = expand_rational(a, radix(p), 200);
                let mut partial = BigRational::zero();
                let mut scale = BigRational::one();
                let inv_p = BigRational::new(1.into(), p.into());
                for (i, &d) in digits.iter().enumerate() {
                    partial += &scale * BigRational::from_integer(d.into());
                    let err = &target - &partial;
                    scale *= &inv_p;
                    // 0 <= alpha - partial_i < p^-i
                    assert!(err >= BigRational::zero(), "{s} p={p} i={i}");
                    assert!(
                        err < &scale * BigRational::from_integer(p.into()),
                        "{s} p={p} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn random_stream_contract() {
        assert_eq!(random_stream(42, radix(2), 0), vec![1]);
        let a = random_stream(7, radix(5), 1000);
        let b = random_stream(7, radix(5), 1000);
        assert_eq!(a, b);
        assert_ne!(a, random_stream(8, radix(5), 1000));
        assert_eq!(a[0], 1);
        assert!(a.iter().all(|&d| d < 5));
        // prefix-stable: a longer draw extends a shorter one
        assert_eq!(&random_stream(7, radix(5), 2000)[..1001], &a[..]);
    }

    #[test]
    fn random_digits_are_equidistributed() {
        let n = 1_000_000;
        let digits = random_stream(0xC0FFEE, radix(5), n);
        let mut counts = [0usize; 5];
        for &d in &digits[1..] {
            counts[d as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            // sd is 4e-4 at this n
            assert!((freq - 0.2).abs() < 0.002, "freq {freq}");
        }
    }

    #[test]
    fn prefix_sums() {
        assert_eq!(digit_prefix_sums(&[1, 1, 0, 0]), vec![1, 2, 2, 2]);
        assert_eq!(digit_prefix_sums(&[1, 1, 0, 1]), vec![1, 2, 2, 3]);
        assert_eq!(digit_prefix_sums(&[1]), vec![1]);
    }
}
