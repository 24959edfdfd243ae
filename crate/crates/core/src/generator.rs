//! The generating sequence x_k = floor(p^k alpha), its partial sums and the
//! delta sequence Delta_k = x_k - (p-1) s_{k-1}.
//!
//! Terms are built from the digit recursion x_{k+1} = p x_k + eta_{k+1} and
//! never by rounding. Deep tables (n around 10^6) cannot hold the exact terms,
//! so [`TableMode::DeltasOnly`] keeps x_k and s_k reduced modulo the Mersenne
//! prime 2^61 - 1 instead. That is enough to re-check the delta identity.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::digits::{digit_prefix_sums, DigitSource, DigitStream, Radix, RationalAlpha};
use crate::error::{Error, Result};

const RESIDUE_MODULUS: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % RESIDUE_MODULUS as u128) as u64
}

fn add_mod(a: u64, b: u64) -> u64 {
    (a + b) % RESIDUE_MODULUS
}

fn sub_mod(a: u64, b: u64) -> u64 {
    (a + RESIDUE_MODULUS - b) % RESIDUE_MODULUS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableMode {
    Materialized,
    DeltasOnly,
}

#[derive(Debug, Clone)]
enum Terms {
    Exact {
        terms: Vec<BigUint>,
        sums: Vec<BigUint>,
    },
    Residue {
        terms: Vec<u64>,
        sums: Vec<u64>,
    },
}

/// Rows (x_k, s_k, Delta_k) for k = 0..=n.
#[derive(Debug, Clone)]
pub struct GeneratorTable {
    stream: DigitStream,
    digits: Vec<u32>,
    terms: Terms,
    deltas: Vec<u64>,
}

impl GeneratorTable {
    /// Exact table of depth n.
    pub fn build(stream: &DigitStream, n: usize) -> Self {
        Self::build_with_mode(stream, n, TableMode::Materialized)
    }

    pub fn build_with_mode(stream: &DigitStream, n: usize, mode: TableMode) -> Self {
        let digits = stream.digits(n);
        let p = stream.radix().get();
        let (terms, deltas) = match mode {
            TableMode::Materialized => {
                let mut terms: Vec<BigUint> = Vec::with_capacity(n + 1);
                let mut sums: Vec<BigUint> = Vec::with_capacity(n + 1);
                let mut deltas = Vec::with_capacity(n + 1);
                let pm1 = BigInt::from(p - 1);
                for (k, &eta) in digits.iter().enumerate() {
                    let x = match terms.last() {
                        None => BigUint::from(eta),
                        Some(prev) => prev * p + eta,
                    };
                    let prev_sum = sums.last().cloned().unwrap_or_default();
                    let delta = BigInt::from(x.clone()) - &pm1 * BigInt::from(prev_sum.clone());
                    // a delta outside u64 can only come from a broken recursion; verify() catches it
                    deltas.push(delta.to_u64().unwrap_or(u64::MAX));
                    sums.push(prev_sum + &x);
                    terms.push(x);
                    debug_assert_eq!(terms.len(), k + 1);
                }
                (Terms::Exact { terms, sums }, deltas)
            }
            TableMode::DeltasOnly => {
                let mut terms = Vec::with_capacity(n + 1);
                let mut sums = Vec::with_capacity(n + 1);
                let mut deltas = Vec::with_capacity(n + 1);
                let mut x = 0u64;
                let mut s = 0u64;
                let mut delta = 0u64;
                for (k, &eta) in digits.iter().enumerate() {
                    x = if k == 0 {
                        eta as u64
                    } else {
                        add_mod(mul_mod(x, p as u64), eta as u64)
                    };
                    s = add_mod(s, x);
                    // Delta_{k} = Delta_{k-1} + eta_k
                    delta += eta as u64;
                    terms.push(x);
                    sums.push(s);
                    deltas.push(delta);
                }
                (Terms::Residue { terms, sums }, deltas)
            }
        };
        GeneratorTable {
            stream: *stream,
            digits,
            terms,
            deltas,
        }
    }

    /// Smallest exact table whose last term exceeds `bound`, so every term of
    /// B that is <= bound is present.
    pub fn build_covering(stream: &DigitStream, bound: u64) -> Self {
        // x_k >= p^k, so depth log_p(bound) + 1 always suffices
        let p = stream.radix().get() as u64;
        let mut n = 0usize;
        let mut pow = 1u128;
        while pow <= bound as u128 {
            pow *= p as u128;
            n += 1;
        }
        Self::build(stream, n)
    }

    pub fn mode(&self) -> TableMode {
        match self.terms {
            Terms::Exact { .. } => TableMode::Materialized,
            Terms::Residue { .. } => TableMode::DeltasOnly,
        }
    }

    pub fn radix(&self) -> Radix {
        self.stream.radix()
    }

    pub fn stream(&self) -> &DigitStream {
        &self.stream
    }

    /// Largest index n.
    pub fn depth(&self) -> usize {
        self.digits.len() - 1
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn deltas(&self) -> &[u64] {
        &self.deltas
    }

    pub fn terms(&self) -> Result<&[BigUint]> {
        match &self.terms {
            Terms::Exact { terms, .. } => Ok(terms),
            Terms::Residue { .. } => Err(Error::DeltasOnly),
        }
    }

    pub fn partial_sums(&self) -> Result<&[BigUint]> {
        match &self.terms {
            Terms::Exact { sums, .. } => Ok(sums),
            Terms::Residue { .. } => Err(Error::DeltasOnly),
        }
    }

    /// s_k with the convention s_{-1} = 0 expressed as `partial_sum_before(k)`.
    pub fn partial_sum_before(&self, k: usize) -> Result<BigUint> {
        let sums = self.partial_sums()?;
        Ok(if k == 0 {
            BigUint::zero()
        } else {
            sums[k - 1].clone()
        })
    }

    /// Terms x_0..=x_k as machine words, up to the first one that overflows.
    pub fn terms_u64(&self, upto: usize) -> Result<Vec<u64>> {
        let terms = self.terms()?;
        if upto > self.depth() {
            return Err(Error::IndexOutOfRange {
                index: upto,
                max: self.depth(),
            });
        }
        terms[..=upto]
            .iter()
            .enumerate()
            .map(|(i, t)| t.to_u64().ok_or(Error::TermOverflow { index: i }))
            .collect()
    }

    /// Every term <= bound, as machine words.
    pub fn terms_at_most(&self, bound: u64) -> Result<Vec<u64>> {
        let terms = self.terms()?;
        let big = BigUint::from(bound);
        Ok(terms
            .iter()
            .take_while(|t| **t <= big)
            .map(|t| t.to_u64().expect("bounded by a u64"))
            .collect())
    }

    pub fn partial_sums_u64(&self, upto: usize) -> Result<Vec<u64>> {
        let sums = self.partial_sums()?;
        if upto > self.depth() {
            return Err(Error::IndexOutOfRange {
                index: upto,
                max: self.depth(),
            });
        }
        sums[..=upto]
            .iter()
            .enumerate()
            .map(|(i, t)| t.to_u64().ok_or(Error::TermOverflow { index: i }))
            .collect()
    }

    /// Deepest n with s_n <= bound, if any.
    pub fn deepest_with_sum_at_most(&self, bound: u64) -> Result<Option<usize>> {
        let sums = self.partial_sums()?;
        let big = BigUint::from(bound);
        Ok(sums.iter().rposition(|s| *s <= big))
    }

    pub fn to_json(&self) -> TableJson {
        let (alpha, seed) = match self.stream.source() {
            DigitSource::Rational(a) => (Some(a), None),
            DigitSource::SeededRandom(s) => (None, Some(s)),
        };
        let (x, s) = match &self.terms {
            Terms::Exact { terms, sums } => (
                Some(terms.iter().map(|t| t.to_string()).collect()),
                Some(sums.iter().map(|t| t.to_string()).collect()),
            ),
            Terms::Residue { .. } => (None, None),
        };
        TableJson {
            p: self.radix().get(),
            alpha,
            seed,
            n: self.depth(),
            mode: self.mode(),
            x,
            s,
            delta: self.deltas.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableJson {
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<RationalAlpha>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub n: usize,
    pub mode: TableMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<String>>,
    pub delta: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    pub pass: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<usize>,
}

/// Checks Delta_k = eta_0 + ... + eta_k for every row, recomputing Delta_k
/// from the stored terms and partial sums (exactly, or modulo 2^61 - 1 in
/// deltas-only mode) rather than trusting the stored deltas.
pub fn verify_delta_lemma(table: &GeneratorTable) -> LemmaCheck {
    let prefix = digit_prefix_sums(&table.digits);
    let p = table.radix().get() as u64;
    let first_failure = match &table.terms {
        Terms::Exact { terms, sums } => {
            let pm1 = BigUint::from(p - 1);
            (0..terms.len()).find(|&k| {
                let before = if k == 0 {
                    BigUint::zero()
                } else {
                    &pm1 * &sums[k - 1]
                };
                let expected = BigUint::from(prefix[k]);
                // x_k = (p-1) s_{k-1} + Delta_k, avoiding negative intermediates
                terms[k] != before + expected || table.deltas[k] != prefix[k]
            })
        }
        Terms::Residue { terms, sums } => (0..terms.len()).find(|&k| {
            let before = if k == 0 {
                0
            } else {
                mul_mod(p - 1, sums[k - 1])
            };
            sub_mod(terms[k], before) != prefix[k] % RESIDUE_MODULUS || table.deltas[k] != prefix[k]
        }),
    };
    LemmaCheck {
        pass: first_failure.is_none(),
        checked: table.digits.len(),
        first_failure,
    }
}

/// floor(p^n * alpha) by big-integer division, independent of the recursion.
pub fn floor_power_oracle(alpha: RationalAlpha, p: Radix, n: u32) -> BigUint {
    BigUint::from(p.get()).pow(n) * alpha.num() / alpha.den()
}

/// {0..=n} minus `subset`, sorted.
pub fn complement_in_prefix(subset: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut member = vec![false; n + 1];
    for &i in subset {
        if i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
        member[i] = true;
    }
    Ok((0..=n).filter(|&i| !member[i]).collect())
}
