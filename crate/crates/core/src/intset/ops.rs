use super::IntSetBitmap;

/// FS(B) cap [0, bound] by iterated shift-or. Terms above the bound cannot
/// contribute and are skipped; 0 (the empty sum) is always present.
pub fn fs_bitmap(generators: &[u64], bound: usize) -> IntSetBitmap {
    let mut s = IntSetBitmap::empty(bound);
    s.insert(0);
    for &b in generators {
        if b as u128 <= bound as u128 {
            s.or_shift_self(b as usize);
        }
    }
    s
}

/// A + B restricted to [0, bound], OR-ing shifted copies of the denser
/// operand once per member of the sparser one.
pub fn sumset(a: &IntSetBitmap, b: &IntSetBitmap, bound: usize) -> IntSetBitmap {
    let (sparse, dense) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut out = IntSetBitmap::empty(bound);
    for m in sparse.iter() {
        if m > bound {
            break;
        }
        out.or_shifted(dense, m);
    }
    out
}

/// A + t*A restricted to [0, bound].
pub fn scaled_sumset(a: &IntSetBitmap, t: usize, bound: usize) -> IntSetBitmap {
    assert!(t >= 1, "scale must be positive");
    let mut out = IntSetBitmap::empty(bound);
    for m in a.iter() {
        match m.checked_mul(t) {
            Some(shift) if shift <= bound => out.or_shifted(a, shift),
            _ => break,
        }
    }
    out
}

/// A + t*FS(G) restricted to [0, bound].
///
/// Since FS(G) = {0, g_1} + {0, g_2} + ..., this is |G| in-place shift-ors
/// and costs O(|G| N / 64) regardless of how dense A is. The theorem
/// verifiers use it for C + C and C + (p-1) C at N around 10^7.
pub fn sumset_with_generators(
    a: &IntSetBitmap,
    generators: &[u64],
    t: u64,
    bound: usize,
) -> IntSetBitmap {
    assert!(t >= 1, "scale must be positive");
    let mut out = a.with_bound(bound);
    for &g in generators {
        match g.checked_mul(t) {
            Some(shift) if shift as u128 <= bound as u128 => out.or_shift_self(shift as usize),
            _ => {}
        }
    }
    out
}
