use num_rational::Ratio;
use serde::Serialize;

use super::{fs_bitmap, IntSetBitmap};

/// Maximal run of missing integers strictly between two members `left` and
/// `right`. Its length is the number of missing integers, right - left - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub left: usize,
    pub right: usize,
}

impl Gap {
    pub fn len(&self) -> usize {
        self.right - self.left - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Gaps inside [0, max member], left to right. Absence after the last member
/// is truncation, not a gap.
pub fn gaps(s: &IntSetBitmap) -> Vec<Gap> {
    let mut out = Vec::new();
    let mut members = s.iter();
    let Some(mut prev) = members.next() else {
        return out;
    };
    for m in members {
        if m > prev + 1 {
            out.push(Gap {
                left: prev,
                right: m,
            });
        }
        prev = m;
    }
    out
}

/// |S cap [0, n]| / (n + 1).
pub fn density(s: &IntSetBitmap, n: usize) -> Ratio<u64> {
    assert!(
        n <= s.bound(),
        "density window {n} exceeds bound {}",
        s.bound()
    );
    Ratio::new(s.count_upto(n) as u64, n as u64 + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShiftViolation {
    /// `element` lies in the block [alpha, beta] but element + shift is absent.
    BlockNotContained {
        gap: Gap,
        alpha: usize,
        shift: usize,
        element: usize,
    },
    /// The translated gap hits the member `element`.
    GapNotMapped {
        gap: Gap,
        alpha: usize,
        shift: usize,
        element: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftInvarianceReport {
    pub pass: bool,
    pub gaps_total: usize,
    pub gaps_checked: usize,
    /// Gaps whose translated image reaches past the largest member. Their
    /// block translation is still checked when it stays in range.
    pub unresolved: Vec<Gap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<ShiftViolation>,
}

/// For each gap (beta, gamma) take the longest block [alpha, beta] ending at
/// beta that meets no gap at least as long; alpha is the right end of the
/// nearest such gap to the left, or 0. With t = gamma - alpha, require
/// (S cap [alpha, beta]) + t inside S and (beta, gamma) + t free of members.
pub fn piecewise_shift_invariant(s: &IntSetBitmap) -> ShiftInvarianceReport {
    let all = gaps(s);
    let limit = s.max_member().unwrap_or(0);
    let mut unresolved = Vec::new();
    let mut checked = 0;
    let mut first_violation = None;
    // indices of earlier gaps with strictly decreasing lengths
    let mut stack: Vec<usize> = Vec::new();

    for (i, &gap) in all.iter().enumerate() {
        while let Some(&j) = stack.last() {
            if all[j].len() < gap.len() {
                stack.pop();
            } else {
                break;
            }
        }
        let alpha = stack.last().map_or(0, |&j| all[j].right);
        stack.push(i);

        let shift = gap.right - alpha;
        // a translated block below the largest member is decidable even when
        // the translated gap is not
        if first_violation.is_none() && gap.left + shift <= limit {
            let block_miss = (alpha..=gap.left).find(|&m| s.contains(m) && !s.contains(m + shift));
            if let Some(element) = block_miss {
                first_violation = Some(ShiftViolation::BlockNotContained {
                    gap,
                    alpha,
                    shift,
                    element,
                });
            }
        }
        if gap.right + shift > limit {
            unresolved.push(gap);
            continue;
        }
        checked += 1;
        if first_violation.is_some() {
            continue;
        }
        let hit = (gap.left + 1 + shift..gap.right + shift).find(|&m| s.contains(m));
        if let Some(element) = hit {
            first_violation = Some(ShiftViolation::GapNotMapped {
                gap,
                alpha,
                shift,
                element,
            });
        }
    }

    ShiftInvarianceReport {
        pass: first_violation.is_none(),
        gaps_total: all.len(),
        gaps_checked: checked,
        unresolved,
        first_violation,
    }
}

/// 1 + (2-adic valuation of k) for k = 1..=n.
pub fn ruler_sequence(n: usize) -> Vec<u32> {
    (1..=n as u64).map(|k| 1 + k.trailing_zeros()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GapIndexReport {
    pub level: u32,
    pub pass: bool,
    pub gap_count: usize,
    pub indices: Vec<u32>,
}

/// Builds D_l = FS({2*3^i : i < level}) on [0, 3^level - 1], labels each gap of
/// length 3^(j-1) with j, and compares the labels with the ruler sequence.
pub fn gap_index_correspondence(level: u32) -> GapIndexReport {
    assert!((1..=30).contains(&level), "level must be in 1..=30");
    let gens: Vec<u64> = (0..level).map(|i| 2 * 3u64.pow(i)).collect();
    let bound = 3usize.pow(level) - 1;
    let d = fs_bitmap(&gens, bound);
    let found = gaps(&d);

    let indices: Vec<u32> = found
        .iter()
        .map(|g| {
            let mut len = g.len();
            let mut j = 1;
            while len > 1 && len % 3 == 0 {
                len /= 3;
                j += 1;
            }
            // lengths that are not powers of 3 get label 0 and fail the comparison
            if len == 1 {
                j
            } else {
                0
            }
        })
        .collect();
    let expected = ruler_sequence((1usize << level) - 1);
    GapIndexReport {
        level,
        pass: indices == expected,
        gap_count: found.len(),
        indices,
    }
}
