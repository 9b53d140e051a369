//! Constructors for the small stock graphs used throughout.
//!
//! All of them live over the single-binary-symbol signature [`Signature::graph`]
//! and store undirected edges as both ordered tuples.

use crate::structure::{RelStructure, Signature};

/// Add the symmetric edge `{u, v}`.
pub fn add_edge(g: &mut RelStructure, u: usize, v: usize) {
    g.insert_tuple("E", vec![u, v]).unwrap();
    g.insert_tuple("E", vec![v, u]).unwrap();
}

/// `n` isolated vertices.
pub fn edgeless(n: usize) -> RelStructure {
    RelStructure::discrete(Signature::graph(), n)
}

/// Complete loop-free graph on `n` vertices.
pub fn kn(n: usize) -> RelStructure {
    let mut g = edgeless(n);
    for u in 0..n {
        for v in u + 1..n {
            add_edge(&mut g, u, v);
        }
    }
    g
}

/// Path on `n` vertices (`n - 1` edges).
pub fn path(n: usize) -> RelStructure {
    let mut g = edgeless(n);
    for u in 1..n {
        add_edge(&mut g, u - 1, u);
    }
    g
}

/// Cycle on `n >= 3` vertices.
pub fn cycle(n: usize) -> RelStructure {
    assert!(n >= 3, "cycles need at least 3 vertices");
    let mut g = path(n);
    add_edge(&mut g, n - 1, 0);
    g
}

/// Star with `leaves` leaves; the centre is element 0.
pub fn star(leaves: usize) -> RelStructure {
    let mut g = edgeless(leaves + 1);
    for v in 1..=leaves {
        add_edge(&mut g, 0, v);
    }
    g
}

/// Single directed edge `0 -> 1`.
pub fn directed_edge() -> RelStructure {
    RelStructure::new(Signature::graph(), 2, vec![("E", vec![vec![0, 1]])]).unwrap()
}
