//! Graded modal logic on pointed Kripke structures: evaluation, the standard
//! translation, equivalence by type refinement, and synchronization trees.

use std::collections::BTreeMap;

use homlab::comonad::{build_comonad, sync_tree_certificate, Base, ComonadKind};
use homlab::formula::{
    eval_formula, eval_modal, print_counting, standard_translation, ModalFormula,
    TRANSLATION_POINT_VAR,
};
use homlab::structure::{PointedStructure, RelStructure, Signature};
use homlab::wl::modal_equiv;

fn kripke(size: usize, edges: &[(usize, usize)], props: &[usize], point: usize) -> PointedStructure {
    let sig = Signature::new(vec![("R", 2), ("P", 1)]).unwrap();
    let mut st = RelStructure::discrete(sig, size);
    for &(x, y) in edges {
        st.insert_tuple("R", vec![x, y]).unwrap();
    }
    for &x in props {
        st.insert_tuple("P", vec![x]).unwrap();
    }
    PointedStructure::new(st, point).unwrap()
}

fn main() -> homlab::Result<()> {
    // a root with two successors, one of them labelled
    let a = kripke(3, &[(0, 1), (0, 2)], &[1], 0);

    let two_succ = ModalFormula::diamond("R", 2, ModalFormula::truth());
    let one_p = ModalFormula::diamond("R", 1, ModalFormula::Prop("P".into()));
    println!("at least two successors: {}", eval_modal(&a, &two_succ)?);
    println!("some successor satisfies P: {}", eval_modal(&a, &one_p)?);

    // the standard translation agrees with Kripke semantics
    let translated = standard_translation(&one_p);
    println!("translation: {}", print_counting(&translated));
    let mut env = BTreeMap::new();
    env.insert(TRANSLATION_POINT_VAR.to_string(), a.point);
    assert_eq!(eval_modal(&a, &one_p)?, eval_formula(&a.structure, &translated, &env)?);

    // graded counting splits structures that plain bisimulation would not
    let b = kripke(2, &[(0, 1)], &[1], 0);
    println!("two-successor vs one-successor root, depth 1: {}", modal_equiv(&a, &b, 1)?);
    println!("same pair at depth 0: {}", modal_equiv(&a, &b, 0)?);

    // unreachable junk never matters
    let c = kripke(3, &[(0, 1), (2, 2)], &[1], 0);
    println!("extra unreachable loop, depth 5: {}", modal_equiv(&b, &c, 5)?);

    // the modal comonad carrier is the tree of bounded paths
    let chain = kripke(3, &[(0, 1), (1, 2)], &[], 0);
    let m2 = build_comonad(&ComonadKind::Modal { k: 2 }, &Base::Pointed(chain.clone()), 1_000_000)?;
    println!("paths of length <= 2 from the chain root: {}", m2.carrier.size());

    // synchronization trees are exactly the structures with unique point-paths
    let cert = sync_tree_certificate(&chain).expect("a chain is a sync tree");
    println!("chain is a sync tree of height {}", cert.height);
    let looped = kripke(2, &[(0, 1), (1, 0)], &[], 0);
    println!("2-cycle is a sync tree: {}", sync_tree_certificate(&looped).is_some());
    Ok(())
}
