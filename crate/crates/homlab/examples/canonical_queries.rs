//! Canonical conjunctive queries and counting-threshold lifts: a sentence
//! that holds exactly in the homomorphism targets, sharpened to "at least t
//! homomorphisms", with variable and depth budgets taken from covers.

use std::collections::BTreeMap;

use homlab::cover::{compute_tree_depth, find_pebble_forest_cover};
use homlab::formula::{eval_formula, print_counting, quantifier_depth, variable_width};
use homlab::graphs::{cycle, kn, path};
use homlab::homcount::hom_count;
use homlab::query::{
    canonical_conjunctive_query, count_witnesses, distinct_edge_sentence, QueryLayout,
    ThresholdLifter,
};

fn main() -> homlab::Result<()> {
    let empty = BTreeMap::new();
    let p3 = path(3);

    // one variable per element
    let plain = canonical_conjunctive_query(&p3, QueryLayout::Chain)?;
    println!("chain layout:  {}", print_counting(plain.formula()));

    // two variables suffice along a 2-pebble cover; depth two along the
    // tree-depth witness
    let cover = find_pebble_forest_cover(&p3, 2, None, 10)?.unwrap();
    let narrow = canonical_conjunctive_query(&p3, QueryLayout::Pebble(&cover))?;
    println!(
        "pebble layout: {} (width {})",
        print_counting(narrow.formula()),
        variable_width(narrow.formula())
    );
    let (_, forest) = compute_tree_depth(&p3, 10)?;
    let shallow = canonical_conjunctive_query(&p3, QueryLayout::Forest(&forest))?;
    println!(
        "forest layout: {} (depth {})",
        print_counting(shallow.formula()),
        quantifier_depth(shallow.formula())
    );

    // the query holds exactly in the hom targets, and its witness count is
    // the hom count
    for target in [kn(2), kn(3), homlab::graphs::edgeless(2)] {
        let holds = eval_formula(&target, narrow.formula(), &empty)?;
        let witnesses = count_witnesses(&target, &plain, &empty)?;
        println!(
            "{target}: holds={holds}, witnesses={witnesses}, hom={}",
            hom_count(&p3, &target)?
        );
    }

    // the threshold lift expresses "at least t homomorphisms" without
    // equality or negation
    let k2q = canonical_conjunctive_query(&kn(2), QueryLayout::Chain)?;
    let mut lifter = ThresholdLifter::new();
    let c4 = cycle(4);
    for t in [1, 8, 9] {
        let lifted = lifter.lift(&k2q, t)?;
        println!(
            "C4 has >= {t} homs from K2: {} (hom count is {})",
            eval_formula(&c4, &lifted, &empty)?,
            hom_count(&kn(2), &c4)?
        );
    }
    let lifted = lifter.lift(&k2q, 5)?;
    println!(
        "lift keeps width {} and depth {}",
        variable_width(&lifted),
        quantifier_depth(&lifted)
    );

    // equality elimination in action: an edge between distinct vertices,
    // said without the equality symbol
    let phi = distinct_edge_sentence(9)?;
    for target in [kn(2), {
        let mut l = homlab::graphs::edgeless(1);
        l.insert_tuple("E", vec![0, 0])?;
        l
    }] {
        println!("{target}: distinct edge (no equality) = {}", eval_formula(&target, &phi, &empty)?);
    }
    Ok(())
}
