//! Deciding equivalence in counting logics: bijective games at bounded depth
//! and width, Weisfeiler-Leman refinement, and extraction of a separating
//! sentence from a lost game.

use std::collections::BTreeMap;

use homlab::formula::{eval_formula, print_counting};
use homlab::game::{distinguishing_formula, equiv_counting};
use homlab::graphs::{cycle, edgeless, kn};
use homlab::structure::disjoint_union;
use homlab::wl::k_wl_refine;

fn main() -> homlab::Result<()> {
    let c6 = cycle(6);
    let (two_k3, _, _) = disjoint_union(&kn(3), &kn(3))?;

    // the classic pair: equivalent with two variables, split by three
    println!("C6 ~ K3+K3 in 2-variable counting logic: {}", equiv_counting(&c6, &two_k3, None, Some(2))?);
    println!("C6 ~ K3+K3 in 3-variable counting logic: {}", equiv_counting(&c6, &two_k3, None, Some(3))?);

    // the same split through Weisfeiler-Leman refinement
    let (_, _, wl1) = k_wl_refine(&c6, &two_k3, 1)?;
    let (_, _, wl2) = k_wl_refine(&c6, &two_k3, 2)?;
    println!("1-WL equivalent: {wl1}, 2-WL equivalent: {wl2}");

    // depth bounds: an edge takes two quantifiers to find
    let k2 = kn(2);
    let e2 = edgeless(2);
    println!("K2 ~ 2K1 at depth 1: {}", equiv_counting(&k2, &e2, Some(1), None)?);
    println!("K2 ~ 2K1 at depth 2: {}", equiv_counting(&k2, &e2, Some(2), None)?);

    // extract the separating sentence from the lost game
    let phi = distinguishing_formula(&k2, &e2, 2, None)?.expect("not equivalent");
    println!("separator: {}", print_counting(&phi));
    let empty = BTreeMap::new();
    assert!(eval_formula(&k2, &phi, &empty)?);
    assert!(!eval_formula(&e2, &phi, &empty)?);

    // a width-3 separator for the classic pair
    let phi = distinguishing_formula(&c6, &two_k3, 4, Some(3))?.expect("split at width 3");
    println!(
        "width-3 separator has depth {} and width {}",
        homlab::formula::quantifier_depth(&phi),
        homlab::formula::variable_width(&phi)
    );
    Ok(())
}
