use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Reproduced by [`verify_vdw_small`] (or a closed-form family).
    ExhaustivelyVerified,
    /// Published value, never used by a certified lookup.
    Literature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VdwEntry {
    pub s: usize,
    pub k: usize,
    #[serde(rename = "W")]
    pub w: u64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableFile {
    schema: u32,
    entries: Vec<VdwEntry>,
}

/// Van der Waerden numbers W(s, k). The families W(s,1) = 1, W(1,k) = k and
/// W(s,2) = s+1 are answered in closed form; everything else is a stored entry.
#[derive(Debug, Clone)]
pub struct VdwTable {
    entries: BTreeMap<(usize, usize), VdwEntry>,
}

const LITERATURE: &[(usize, usize, u64)] = &[
    (2, 4, 35),
    (2, 5, 178),
    (2, 6, 1132),
    (3, 3, 27),
    (3, 4, 293),
    (4, 3, 76),
];

impl VdwTable {
    pub fn builtin() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(
            (2, 3),
            VdwEntry {
                s: 2,
                k: 3,
                w: 9,
                provenance: Provenance::ExhaustivelyVerified,
            },
        );
        for &(s, k, w) in LITERATURE {
            entries.insert(
                (s, k),
                VdwEntry {
                    s,
                    k,
                    w,
                    provenance: Provenance::Literature,
                },
            );
        }
        VdwTable { entries }
    }

    /// Built-in table extended by a JSON file `{"schema": 1, "entries": [...]}`.
    /// Entries may not contradict values already present.
    pub fn with_file_entries(mut self, json: &str) -> Result<Self> {
        let file: TableFile =
            serde_json::from_str(json).map_err(|e| Error::BadTable(e.to_string()))?;
        if file.schema != 1 {
            return Err(Error::BadTable(format!(
                "unsupported schema {}",
                file.schema
            )));
        }
        for e in file.entries {
            if e.s == 0 || e.k == 0 {
                return Err(Error::BadTable(format!("invalid entry {e:?}")));
            }
            if let Some(known) = self.lookup(e.s, e.k) {
                if known.w != e.w {
                    return Err(Error::BadTable(format!(
                        "W({},{}) = {} contradicts known value {}",
                        e.s, e.k, e.w, known.w
                    )));
                }
                continue;
            }
            self.entries.insert((e.s, e.k), e);
        }
        Ok(self)
    }

    /// Honors `CSL_TABLE_PATH` when set.
    pub fn from_env() -> Result<Self> {
        let table = Self::builtin();
        match std::env::var_os("CSL_TABLE_PATH") {
            Some(path) => {
                let json = std::fs::read_to_string(&path)
                    .map_err(|e| Error::BadTable(format!("{}: {e}", path.to_string_lossy())))?;
                table.with_file_entries(&json)
            }
            None => Ok(table),
        }
    }

    pub fn lookup(&self, s: usize, k: usize) -> Option<VdwEntry> {
        let closed = |w: u64| {
            Some(VdwEntry {
                s,
                k,
                w,
                provenance: Provenance::ExhaustivelyVerified,
            })
        };
        if s == 0 || k == 0 {
            return None;
        }
        if k == 1 {
            return closed(1);
        }
        if s == 1 {
            return closed(k as u64);
        }
        if k == 2 {
            return closed(s as u64 + 1);
        }
        self.entries.get(&(s, k)).copied()
    }

    pub fn certified(&self, s: usize, k: usize) -> Option<u64> {
        self.lookup(s, k)
            .filter(|e| e.provenance == Provenance::ExhaustivelyVerified)
            .map(|e| e.w)
    }

    pub fn entries(&self) -> impl Iterator<Item = &VdwEntry> {
        self.entries.values()
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            schema: 1,
            entries: self.entries.values().copied().collect(),
        };
        serde_json::to_string_pretty(&file).expect("table serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InverseVdw {
    pub length: usize,
    /// The next entry W(s, length + 1) is not certified, so `length` is only
    /// a lower bound for w(s, N).
    pub table_limited: bool,
}

/// max { k : W(s, k) <= N } over certified entries.
pub fn inverse_vdw(table: &VdwTable, s: usize, n: u64) -> InverseVdw {
    assert!(s >= 1 && n >= 1, "inverse_vdw needs s >= 1 and N >= 1");
    if s == 1 {
        return InverseVdw {
            length: n as usize,
            table_limited: false,
        };
    }
    let mut k = 1;
    loop {
        match table.certified(s, k + 1) {
            Some(w) if w <= n => k += 1,
            Some(_) => {
                return InverseVdw {
                    length: k,
                    table_limited: false,
                }
            }
            None => {
                return InverseVdw {
                    length: k,
                    table_limited: true,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Exhaustive,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VdwCertificate {
    pub s: usize,
    pub k: usize,
    #[serde(rename = "W")]
    pub w: u64,
    /// A coloring of [1, W-1] (colors 0..s) with no monochromatic k-AP.
    pub witness_coloring: Vec<u8>,
    /// Every coloring of [1, W] was shown to contain one.
    pub verified: bool,
    pub method: SearchMethod,
    pub nodes: u64,
}

/// True when some k-AP ending at the last position of `col` is monochromatic.
fn closes_progression(col: &[u8], k: usize) -> bool {
    let n = col.len();
    let last = n - 1;
    let c = col[last];
    let mut d = 1;
    while (k - 1) * d <= last {
        if (1..k).all(|j| col[last - j * d] == c) {
            return true;
        }
        d += 1;
    }
    false
}

fn has_mono_ap(col: &[u8], k: usize) -> bool {
    (1..=col.len()).any(|n| closes_progression(&col[..n], k))
}

/// Computes W(s, k) by depth-first search over colorings of [1, n] that avoid
/// monochromatic k-APs, up to color permutation (a new color is only opened
/// after all lower ones are used). The deepest valid coloring has length
/// W - 1, and exhausting the tree proves no coloring of [1, W] survives.
pub fn verify_vdw_small(s: usize, k: usize, budget: u64) -> Result<VdwCertificate> {
    if s == 0 || k == 0 {
        return Err(Error::InvalidParameter("need s >= 1 and k >= 1".into()));
    }
    let closed = |w: u64, witness: Vec<u8>| {
        debug_assert!(!has_mono_ap(&witness, k));
        Ok(VdwCertificate {
            s,
            k,
            w,
            witness_coloring: witness,
            verified: true,
            method: SearchMethod::ClosedForm,
            nodes: 0,
        })
    };
    if k == 1 {
        return closed(1, vec![]);
    }
    if s == 1 {
        return closed(k as u64, vec![0; k - 1]);
    }
    if k == 2 {
        if s > u8::MAX as usize + 1 {
            return Err(Error::InvalidParameter("at most 256 colors".into()));
        }
        return closed(s as u64 + 1, (0..s).map(|c| c as u8).collect());
    }
    if s > u8::MAX as usize {
        return Err(Error::InvalidParameter("at most 255 colors".into()));
    }

    let mut col: Vec<u8> = Vec::new();
    let mut best: Vec<u8> = Vec::new();
    let mut nodes = 0u64;
    // next color to try at each depth, plus the number of colors used below it
    let mut next: Vec<u8> = vec![0];
    let mut used: Vec<u8> = vec![0];

    while let Some(&c) = next.last() {
        let depth = next.len() - 1;
        let limit = (used[depth] as usize + 1).min(s) as u8;
        if c >= limit {
            next.pop();
            used.pop();
            col.pop();
            continue;
        }
        *next.last_mut().unwrap() += 1;
        nodes += 1;
        if nodes > budget {
            return Err(Error::Infeasible { s, k, budget });
        }
        col.push(c);
        if closes_progression(&col, k) {
            col.pop();
            continue;
        }
        if col.len() > best.len() {
            best = col.clone();
        }
        let u = used[depth].max(c + 1);
        next.push(0);
        used.push(u);
    }

    Ok(VdwCertificate {
        s,
        k,
        w: best.len() as u64 + 1,
        witness_coloring: best,
        verified: true,
        method: SearchMethod::Exhaustive,
        nodes,
    })
}
