//! Canonical flattening modulo associativity and unit laws.
//!
//! After [`flatten`], sequential and parallel chains are right-nested, no
//! element of a sequential chain is an identity bundle, and no element of a
//! parallel chain is `id0`.  Symmetry and interchange are *not* quotiented.

use super::{Circuit, Node};

/// Whether `c` is a parallel bundle of plain wires (`id`, `id0`, or a `par`
/// chain of those).
pub fn is_identity_bundle(c: &Circuit) -> bool {
    match c.node() {
        Node::Id | Node::Id0 => true,
        Node::Par(a, b) => is_identity_bundle(a) && is_identity_bundle(b),
        _ => false,
    }
}

/// The elements of a right-nested sequential chain (a single element if `c`
/// is not a `seq`).
pub fn seq_elements(c: &Circuit) -> Vec<Circuit> {
    let mut out = Vec::new();
    let mut cur = c;
    while let Node::Seq(a, b) = cur.node() {
        out.push(a.clone());
        cur = b;
    }
    out.push(cur.clone());
    out
}

/// The elements of a right-nested parallel chain (a single element if `c` is
/// not a `par`).
pub fn par_elements(c: &Circuit) -> Vec<Circuit> {
    let mut out = Vec::new();
    let mut cur = c;
    while let Node::Par(a, b) = cur.node() {
        out.push(a.clone());
        cur = b;
    }
    out.push(cur.clone());
    out
}

fn collect_seq(c: &Circuit, out: &mut Vec<Circuit>) {
    match c.node() {
        Node::Seq(a, b) => {
            collect_seq(a, out);
            collect_seq(b, out);
        }
        _ => {
            let f = flatten(c);
            if f.is_seq() {
                out.extend(seq_elements(&f));
            } else {
                out.push(f);
            }
        }
    }
}

fn collect_par(c: &Circuit, out: &mut Vec<Circuit>) {
    match c.node() {
        Node::Par(a, b) => {
            collect_par(a, out);
            collect_par(b, out);
        }
        _ => {
            let f = flatten(c);
            if f.is_par() {
                out.extend(par_elements(&f));
            } else {
                out.push(f);
            }
        }
    }
}

/// Normalizes `c` modulo associativity of `seq`/`par` and the unit laws.
/// Semantics is unchanged and `flatten` is idempotent.
pub fn flatten(c: &Circuit) -> Circuit {
    match c.node() {
        Node::Seq(..) => {
            let mut elems = Vec::new();
            collect_seq(c, &mut elems);
            elems.retain(|e| !is_identity_bundle(e));
            if elems.is_empty() {
                super::gates::id_n(c.inputs())
            } else {
                super::chain(elems)
            }
        }
        Node::Par(..) => {
            let mut elems = Vec::new();
            collect_par(c, &mut elems);
            elems.retain(|e| !matches!(e.node(), Node::Id0));
            Circuit::par_all(elems)
        }
        _ => c.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::sq;

    #[test]
    fn associativity_and_units() {
        let (a, b, c) = (Circuit::not(), Circuit::copy(), Circuit::and());
        let left = sq(sq(a.clone(), b.clone()), c.clone());
        let right = sq(a.clone(), sq(b.clone(), c.clone()));
        assert_eq!(flatten(&left), right);
        assert_eq!(flatten(&Circuit::par(Circuit::id0(), a.clone())), a);
        let with_unit = sq(Circuit::copy(), Circuit::par(Circuit::id(), Circuit::id()));
        assert_eq!(flatten(&with_unit), Circuit::copy());
        let id2 = sq(Circuit::par(Circuit::id(), Circuit::id()), Circuit::par(Circuit::id(), Circuit::id()));
        assert_eq!(flatten(&id2), Circuit::par(Circuit::id(), Circuit::id()));
    }

    #[test]
    fn idempotent() {
        let t = Circuit::par(
            Circuit::par(Circuit::id(), sq(Circuit::not(), sq(Circuit::id(), Circuit::not()))),
            Circuit::par(Circuit::id0(), Circuit::copy()),
        );
        let f = flatten(&t);
        assert_eq!(flatten(&f), f);
        assert_eq!(par_elements(&f).len(), 3);
    }
}
