//! Library of derived gates built from the generators.
//!
//! Every constructor here returns a plain [`Circuit`] term; nothing is a new
//! primitive.  The n-ary families follow the usual recursions with the unit as
//! base case (`and_n(0) = flip(1)`, `copy_1_to_n(0) = del`, ...).

use super::{chain, flip, pars, sq, Circuit};
use crate::error::{Error, Result};
use crate::rat::Rat;

/// Default bound on the number of output wires of [`all_n`].
pub const DEFAULT_MAX_WIRES: usize = 1 << 10;

/// The identity on `n` wires (`id0` when `n = 0`).
pub fn id_n(n: usize) -> Circuit {
    pars(vec![Circuit::id(); n])
}

/// Discards `n` wires.
pub fn discard_n(n: usize) -> Circuit {
    pars(vec![Circuit::discard(); n])
}

/// Negates each of `n` wires.
pub fn not_n(n: usize) -> Circuit {
    pars(vec![Circuit::not(); n])
}

/// `n` copies of `flip(0)` side by side.
pub fn zeros(n: usize) -> Circuit {
    pars(vec![Circuit::constant(false); n])
}

/// Broadcasts one wire to `n` wires: `copy_1_to_n(0) = del`,
/// `copy_1_to_n(k+1) = copy ; (id ⊗ copy_1_to_n(k))`.
pub fn copy_1_to_n(n: usize) -> Circuit {
    match n {
        0 => Circuit::discard(),
        _ => sq(Circuit::copy(), Circuit::par(Circuit::id(), copy_1_to_n(n - 1))),
    }
}

/// n-ary conjunction: `and_n(0) = flip(1)`, `and_n(k+1) = (id ⊗ and_n(k)) ; and`.
pub fn and_n(n: usize) -> Circuit {
    match n {
        0 => Circuit::constant(true),
        _ => sq(Circuit::par(Circuit::id(), and_n(n - 1)), Circuit::and()),
    }
}

/// n-ary disjunction: `or_n(0) = flip(0)`, `or_n(k+1) = (id ⊗ or_n(k)) ; or`.
pub fn or_n(n: usize) -> Circuit {
    match n {
        0 => Circuit::constant(false),
        _ => sq(Circuit::par(Circuit::id(), or_n(n - 1)), or2()),
    }
}

/// Binary disjunction by De Morgan: `(not ⊗ not) ; and ; not`.
pub fn or2() -> Circuit {
    chain(vec![Circuit::par(Circuit::not(), Circuit::not()), Circuit::and(), Circuit::not()])
}

/// Exclusive or: `(x ∨ y) ∧ ¬(x ∧ y)`.
pub fn xor2() -> Circuit {
    chain(vec![
        copy_bundle(2),
        Circuit::par(or2(), sq(Circuit::and(), Circuit::not())),
        Circuit::and(),
    ])
}

/// The multiplexer `mux(g, t, e)`: outputs `t` when `g = 1` and `e` when
/// `g = 0`.  Built as `(g ∧ t) ∨ (¬g ∧ e)`.
pub fn mux() -> Circuit {
    chain(vec![
        Circuit::par(Circuit::copy(), id_n(2)),
        Circuit::par(Circuit::id(), Circuit::par(Circuit::swap(), Circuit::id())),
        Circuit::par(Circuit::and(), sq(Circuit::par(Circuit::not(), Circuit::id()), Circuit::and())),
        or2(),
    ])
}

/// Wire-wise multiplexer on `n`-wire branches: `1 + 2n -> n` with inputs
/// `(g, t_1..t_n, e_1..e_n)`.
pub fn mux_n(n: usize) -> Circuit {
    match n {
        0 => Circuit::discard(),
        1 => mux(),
        _ => {
            // (g_1..g_n, t_1..t_n, e_1..e_n) -> (g_1, t_1, e_1, g_2, ...)
            let mut perm = Vec::with_capacity(3 * n);
            for i in 0..n {
                perm.extend([i, n + i, 2 * n + i]);
            }
            chain(vec![
                Circuit::par(copy_1_to_n(n), id_n(2 * n)),
                permutation(&perm),
                pars(vec![mux(); n]),
            ])
        }
    }
}

/// Pairwise conditioning `2n -> n`: inputs `(x_1..x_n, x'_1..x'_n)`, output
/// `x_i` constrained equal to `x'_i`.
pub fn cond_n(n: usize) -> Circuit {
    if n == 0 {
        return Circuit::id0();
    }
    sq(interleave(n, 2), pars(vec![Circuit::cond(); n]))
}

/// A permutation of wires: output position `j` carries input wire `perm[j]`.
///
/// Realised with layers of disjoint adjacent swaps (odd–even transposition
/// sort), so the depth is at most the width.  Panics if `perm` is not a
/// permutation of `0..perm.len()`.
pub fn permutation(perm: &[usize]) -> Circuit {
    let w = perm.len();
    let mut seen = vec![false; w];
    for &p in perm {
        assert!(p < w && !seen[p], "not a permutation: {perm:?}");
        seen[p] = true;
    }
    // key[pos] = destination of the wire currently at `pos`.
    let mut dest = vec![0; w];
    for (j, &p) in perm.iter().enumerate() {
        dest[p] = j;
    }
    let mut key = dest;
    let mut layers = Vec::new();
    let mut round = 0;
    while key.windows(2).any(|p| p[0] > p[1]) {
        let mut parts = Vec::new();
        let mut i = 0;
        if round % 2 == 1 && w > 0 {
            parts.push(Circuit::id());
            i = 1;
        }
        let mut swapped = false;
        while i < w {
            if i + 1 < w && key[i] > key[i + 1] {
                key.swap(i, i + 1);
                parts.push(Circuit::swap());
                swapped = true;
                i += 2;
            } else if i + 1 < w {
                parts.push(Circuit::id());
                parts.push(Circuit::id());
                i += 2;
            } else {
                parts.push(Circuit::id());
                i += 1;
            }
        }
        if swapped {
            layers.push(pars(parts));
        }
        round += 1;
    }
    if layers.is_empty() {
        id_n(w)
    } else {
        chain(layers)
    }
}

/// The block symmetry `σ_{m,k}`: moves the top `m` wires below the next `k`.
pub fn swap_block(m: usize, k: usize) -> Circuit {
    let perm: Vec<usize> = (m..m + k).chain(0..m).collect();
    permutation(&perm)
}

/// Reorders `k` blocks of `n` wires into `n` groups of `k`: input
/// `(b_1^1..b_1^n, ..., b_k^1..b_k^n)` becomes `(b_1^1, ..., b_k^1, b_1^2, ...)`.
pub fn interleave(n: usize, k: usize) -> Circuit {
    let mut perm = Vec::with_capacity(n * k);
    for i in 0..n {
        for b in 0..k {
            perm.push(b * n + i);
        }
    }
    permutation(&perm)
}

/// Copies an `n`-wire bundle `k` times: `n -> k·n`, output `(x, x, ..., x)`.
pub fn copy_bundle_k(n: usize, k: usize) -> Circuit {
    if n == 0 {
        return Circuit::id0();
    }
    // After the per-wire copies the layout is (x_1 × k, x_2 × k, ...);
    // regroup into k consecutive blocks.
    let mut perm = Vec::with_capacity(n * k);
    for b in 0..k {
        for i in 0..n {
            perm.push(i * k + b);
        }
    }
    sq(pars(vec![copy_1_to_n(k); n]), permutation(&perm))
}

/// Copies an `n`-wire bundle: `n -> 2n`, output `(x, x)`.
pub fn copy_bundle(n: usize) -> Circuit {
    if n == 0 {
        return Circuit::id0();
    }
    let mut perm = Vec::with_capacity(2 * n);
    perm.extend((0..n).map(|i| 2 * i));
    perm.extend((0..n).map(|i| 2 * i + 1));
    sq(pars(vec![Circuit::copy(); n]), permutation(&perm))
}

/// The always-failing constraint `(flip(0) ⊗ flip(1)) ; cond`.
pub fn flip_bot() -> Circuit {
    sq(
        Circuit::par(Circuit::constant(false), Circuit::constant(true)),
        Circuit::cond(),
    )
}

/// Canonical failing circuit `m -> n`: `discard_m ⊗ (flip_bot ; copy_1_to_n)`.
pub fn failure_circuit(m: usize, n: usize) -> Circuit {
    Circuit::par(discard_n(m), sq(flip_bot(), copy_1_to_n(n)))
}

/// Convex combination `2 -> 1`: `mux(flip(p), a, b)`.
pub fn convex_sum(p: &Rat) -> Circuit {
    sq(Circuit::par(flip(p), id_n(2)), mux())
}

/// Guarded coin `2 -> 1`: `(g, x) ↦ mux(g, flip(p), x)`.
pub fn guarded_flip(p: &Rat) -> Circuit {
    sq(
        Circuit::par(Circuit::id(), Circuit::par(flip(p), Circuit::id())),
        mux(),
    )
}

/// Coin selected by a wire, `1 -> 1`: `g ↦ mux(g, flip(p), flip(q))`.
pub fn select_flip(p: &Rat, q: &Rat) -> Circuit {
    sq(
        Circuit::par(Circuit::id(), Circuit::par(flip(p), flip(q))),
        mux(),
    )
}

/// One step of the all-inputs construction, `2 -> 3`:
/// `(o, x) ↦ (x, o ∧ x, o ∧ ¬x)`.
fn split_slot() -> Circuit {
    chain(vec![
        Circuit::par(Circuit::copy(), copy_1_to_n(3)),
        permutation(&[2, 0, 3, 4, 1]),
        pars(vec![
            Circuit::id(),
            Circuit::and(),
            sq(Circuit::par(Circuit::not(), Circuit::id()), Circuit::and()),
        ]),
    ])
}

/// Refines `k` one-hot slots by one more bit `x` (the bottom input),
/// `k + 1 -> 2k`: slot `o` becomes the pair `(o ∧ x, o ∧ ¬x)`.
fn refine_slots(k: usize) -> Circuit {
    match k {
        0 => Circuit::discard(),
        _ => sq(
            Circuit::par(id_n(k - 1), split_slot()),
            Circuit::par(refine_slots(k - 1), id_n(2)),
        ),
    }
}

/// The all-inputs circuit `n -> 2^n` with the default wire bound.
pub fn all(n: usize) -> Result<Circuit> {
    all_n(n, DEFAULT_MAX_WIRES)
}

/// The all-inputs circuit `n -> 2^n`: maps `x` to the one-hot vector whose
/// single set wire is `x`'s slot.
///
/// Slots enumerate bit-vectors in descending binary order (all ones first)
/// with the top input as the most significant bit.  Built recursively:
/// `all_0 = flip(1)` and `all_{n+1} = (all_n ⊗ id) ; refine`, where `refine`
/// splits every slot by the new least significant bit, 1-branch first.
pub fn all_n(n: usize, max_wires: usize) -> Result<Circuit> {
    let wires = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
    if wires > max_wires as u128 {
        return Err(Error::CapExceeded {
            what: "all-inputs circuit",
            needed: wires,
            cap: max_wires as u128,
        });
    }
    let mut c = Circuit::constant(true);
    for level in 0..n {
        c = sq(Circuit::par(c, Circuit::id()), refine_slots(1 << level));
    }
    Ok(c)
}

/// Looks up a derived gate by its textual name and arguments, as accepted by
/// the circuit parser.
pub fn derived_gate(name: &str, args: &[usize]) -> Option<Result<Circuit>> {
    let c = match (name, args) {
        ("mux", []) => mux(),
        ("or", []) => or2(),
        ("xor", []) => xor2(),
        ("bot", []) => flip_bot(),
        ("all", [n]) => return Some(all(*n)),
        ("fail", [m, n]) => failure_circuit(*m, *n),
        ("id", [n]) => id_n(*n),
        ("del", [n]) => discard_n(*n),
        ("not", [n]) => not_n(*n),
        ("copy", [n]) => copy_1_to_n(*n),
        ("and", [n]) => and_n(*n),
        ("or", [n]) => or_n(*n),
        ("cond", [n]) => cond_n(*n),
        ("mux", [n]) => mux_n(*n),
        ("swap", [m, k]) => swap_block(*m, *k),
        _ => return None,
    };
    Some(Ok(c))
}

/// Names and arities of all derived gates known to [`derived_gate`].
pub fn derived_gates() -> Vec<(&'static str, usize)> {
    vec![
        ("mux", 0),
        ("or", 0),
        ("xor", 0),
        ("bot", 0),
        ("all", 1),
        ("fail", 2),
        ("id", 1),
        ("del", 1),
        ("not", 1),
        ("copy", 1),
        ("and", 1),
        ("or", 1),
        ("cond", 1),
        ("mux", 1),
        ("swap", 2),
    ]
}
