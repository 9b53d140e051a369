//! The game comonads as finite structures: carriers of plays, counit and
//! coextension, the comonad laws, and the passage between coalgebras and
//! covers.

use homlab::comonad::{
    build_comonad, check_coalgebra, check_comonad_laws, coalgebra_to_cover, coextension,
    ef_cover_to_coalgebra, pebble_cover_to_coalgebra, Base, ComonadKind, CoverFromCoalgebra,
    DEFAULT_CARRIER_BOUND,
};
use homlab::cover::{compute_tree_depth, find_pebble_forest_cover, DEFAULT_COVER_CAP};
use homlab::graphs::{kn, path};

fn main() -> homlab::Result<()> {
    let bound = DEFAULT_CARRIER_BOUND;
    let p3 = path(3);

    // plays of length <= 2 over a 3-element structure: 3 + 9 of them
    let ef2 = build_comonad(&ComonadKind::Ef { n: 2 }, &Base::Plain(p3.clone()), bound)?;
    println!("|E_2(P3)| = {}", ef2.carrier.size());
    println!("first plays: {:?}", &ef2.plays[..5]);
    println!("counit sends each play to its last element: {:?}", &ef2.counit[..5]);

    // coextension of the counit is the identity (one of the comonad laws)
    let (_, eps_star) = coextension(&ef2, &Base::Plain(p3.clone()), &ef2.counit, bound)?;
    assert!(eps_star.iter().enumerate().all(|(i, &s)| i == s));
    println!("counit* = id holds");

    // all three equations, for a fold of the path onto an edge
    let fold = [0usize, 1, 0];
    let f: Vec<usize> = ef2.counit.clone();
    let cb = build_comonad(&ComonadKind::Ef { n: 2 }, &Base::Plain(p3.clone()), bound)?;
    let g: Vec<usize> = cb.counit.iter().map(|&e| fold[e]).collect();
    let ok = check_comonad_laws(
        &ComonadKind::Ef { n: 2 },
        &Base::Plain(p3.clone()),
        &Base::Plain(p3.clone()),
        &Base::Plain(kn(2)),
        &f,
        &g,
        bound,
    )?;
    println!("comonad laws hold: {ok}");

    // tree-depth 2 certificate of P3 becomes an E_2-coalgebra and back
    let (td, cover) = compute_tree_depth(&p3, DEFAULT_COVER_CAP)?;
    println!("tree-depth of P3 = {td}");
    let coalg = ef_cover_to_coalgebra(&p3, &cover, td, bound)?;
    println!("coalgebra laws hold: {}", check_coalgebra(&coalg)?);
    if let CoverFromCoalgebra::Forest(back) = coalgebra_to_cover(&coalg)? {
        println!("round-trip reproduces the forest: {}", back.parents() == cover.parents());
    }

    // the same for a 2-pebble cover
    let pcover = find_pebble_forest_cover(&p3, 2, None, DEFAULT_COVER_CAP)?.unwrap();
    let pcoalg = pebble_cover_to_coalgebra(&p3, &pcover, 2, 3, bound)?;
    println!("pebble coalgebra checks: {}", check_coalgebra(&pcoalg)?);

    // K3 has tree-width 2, so there is no P_{2,n} coalgebra to be found
    assert!(find_pebble_forest_cover(&kn(3), 2, None, DEFAULT_COVER_CAP)?.is_none());
    println!("K3 admits no 2-pebble coalgebra, matching tree-width 2");
    Ok(())
}
