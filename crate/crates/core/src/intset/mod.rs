//! Exact set arithmetic on [0, N] over packed bitmaps.
//!
//! Layout is fixed: integer i lives at bit (i mod 64) of word i / 64, words
//! are little-endian on disk. Bits above N are always zero.

mod ops;
mod structure;

pub use ops::{fs_bitmap, scaled_sumset, sumset, sumset_with_generators};
pub use structure::{
    density, gap_index_correspondence, gaps, piecewise_shift_invariant, ruler_sequence, Gap,
    GapIndexReport, ShiftInvarianceReport, ShiftViolation,
};

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

const MAGIC: &[u8; 4] = b"CSLB";
const FORMAT_VERSION: u32 = 1;

/// Membership bitmap of a subset of [0, N].
#[derive(Clone, PartialEq, Eq)]
pub struct IntSetBitmap {
    bound: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for IntSetBitmap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let shown: Vec<usize> = self.iter().take(32).collect();
        f.debug_struct("IntSetBitmap")
            .field("bound", &self.bound)
            .field("len", &self.len())
            .field("head", &shown)
            .finish()
    }
}

impl IntSetBitmap {
    pub fn empty(bound: usize) -> Self {
        IntSetBitmap {
            bound,
            words: vec![0; bound / WORD_BITS + 1],
        }
    }

    /// {0, 1, ..., bound}.
    pub fn full(bound: usize) -> Self {
        let mut s = IntSetBitmap {
            bound,
            words: vec![u64::MAX; bound / WORD_BITS + 1],
        };
        s.clear_tail();
        s
    }

    /// Members above `bound` are dropped.
    pub fn from_members<I: IntoIterator<Item = usize>>(bound: usize, members: I) -> Self {
        let mut s = Self::empty(bound);
        for m in members {
            if m <= bound {
                s.insert(m);
            }
        }
        s
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn contains(&self, i: usize) -> bool {
        i <= self.bound && self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i <= self.bound, "{i} outside [0, {}]", self.bound);
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// |S cap [0, n]|.
    pub fn count_upto(&self, n: usize) -> usize {
        let n = n.min(self.bound);
        let last = n / WORD_BITS;
        let full: usize = self.words[..last]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum();
        let rem = n % WORD_BITS;
        let mask = if rem == WORD_BITS - 1 {
            u64::MAX
        } else {
            (1u64 << (rem + 1)) - 1
        };
        full + (self.words[last] & mask).count_ones() as usize
    }

    pub fn max_member(&self) -> Option<usize> {
        self.words
            .iter()
            .rposition(|&w| w != 0)
            .map(|i| i * WORD_BITS + (WORD_BITS - 1 - self.words[i].leading_zeros() as usize))
    }

    /// Members in increasing order.
    pub fn iter(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn is_subset_of(&self, other: &IntSetBitmap) -> bool {
        self.iter().all(|m| other.contains(m))
    }

    /// Same members, different bound (members above the new bound are dropped).
    pub fn with_bound(&self, bound: usize) -> Self {
        let mut words = vec![0; bound / WORD_BITS + 1];
        let n = words.len().min(self.words.len());
        words[..n].copy_from_slice(&self.words[..n]);
        let mut s = IntSetBitmap { bound, words };
        s.clear_tail();
        s
    }

    pub(crate) fn clear_tail(&mut self) {
        let rem = self.bound % WORD_BITS;
        if rem != WORD_BITS - 1 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << (rem + 1)) - 1;
        }
    }

    /// self |= (self << shift), restricted to [0, bound]. In place: words are
    /// visited from the top so every source word is read before it is written.
    pub(crate) fn or_shift_self(&mut self, shift: usize) {
        if shift == 0 || shift > self.bound {
            return;
        }
        let (q, r) = (shift / WORD_BITS, shift % WORD_BITS);
        let words = &mut self.words;
        for i in (q..words.len()).rev() {
            let src = i - q;
            let mut v = words[src] << r;
            if r != 0 && src > 0 {
                v |= words[src - 1] >> (WORD_BITS - r);
            }
            words[i] |= v;
        }
        self.clear_tail();
    }

    /// self |= (other << shift), restricted to [0, self.bound].
    pub(crate) fn or_shifted(&mut self, other: &IntSetBitmap, shift: usize) {
        if shift > self.bound {
            return;
        }
        let (q, r) = (shift / WORD_BITS, shift % WORD_BITS);
        let hi = self.words.len().min(other.words.len() + q + 1);
        for i in q..hi {
            let src = i - q;
            let mut v = other.words.get(src).map_or(0, |w| w << r);
            if r != 0 && src > 0 {
                v |= other.words.get(src - 1).map_or(0, |w| w >> (WORD_BITS - r));
            }
            self.words[i] |= v;
        }
        self.clear_tail();
    }

    /// 16-byte header ("CSLB", version u32 LE, N u64 LE) followed by the words
    /// as u64 LE.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.bound as u64).to_le_bytes())?;
        for word in &self.words {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.words.len());
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::BadBitmap(e.to_string());
        let mut header = [0u8; 16];
        r.read_exact(&mut header).map_err(io)?;
        if &header[..4] != MAGIC {
            return Err(Error::BadBitmap("missing CSLB magic".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::BadBitmap(format!("unsupported version {version}")));
        }
        let bound = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let bound = usize::try_from(bound).map_err(|_| Error::BadBitmap("N too large".into()))?;
        let mut words = vec![0u64; bound / WORD_BITS + 1];
        let mut buf = [0u8; 8];
        for word in words.iter_mut() {
            r.read_exact(&mut buf).map_err(io)?;
            *word = u64::from_le_bytes(buf);
        }
        let s = IntSetBitmap { bound, words };
        let mut check = s.clone();
        check.clear_tail();
        if check != s {
            return Err(Error::BadBitmap("bits set above N".into()));
        }
        Ok(s)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let expected_len = bytes
            .get(8..16)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
            .and_then(|n| usize::try_from(n).ok())
            .map(|n| 16 + 8 * (n / WORD_BITS + 1));
        if expected_len != Some(bytes.len()) {
            return Err(Error::BadBitmap("length does not match header".into()));
        }
        Self::read_from(bytes)
    }

    pub fn summary(&self) -> SetSummary {
        SetSummary {
            bound: self.bound,
            count: self.len(),
            max_member: self.max_member(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SetSummary {
    pub bound: usize,
    pub count: usize,
    pub max_member: Option<usize>,
}

pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}
