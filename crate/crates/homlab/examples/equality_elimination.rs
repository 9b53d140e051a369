//! The signature-extension adjunction and equality elimination on covers: the
//! I-quotient of an extended structure, hom-count transposition, and the
//! one-step quotient that repairs a pebbling.

use homlab::cover::{
    eliminate_equalities, one_step_quotient, validate_pebble_cover, ForestCover,
    PebbleForestCover,
};
use homlab::graphs::kn;
use homlab::homcount::hom_count;
use homlab::quotient::{functor_h, functor_j};
use homlab::structure::{RelStructure, Signature};

fn main() -> homlab::Result<()> {
    // J freely adds the identity relation; H collapses it away
    let k2 = kn(2);
    let jk2 = functor_j(&k2)?;
    println!("J(K2) has I = {:?}", jk2.relation("I")?);
    let (back, _) = functor_h(&jk2)?;
    println!("H(J(K2)) = K2 again: {}", back == k2);

    // the adjunction transposes hom counts: hom+(D, J(A)) = hom(H(D), A)
    let sig = Signature::graph().extended()?;
    let d = RelStructure::new(
        sig.clone(),
        3,
        vec![("I", vec![vec![0, 1]]), ("E", vec![vec![1, 2]])],
    )?;
    let (hd, _) = functor_h(&d)?;
    let a = kn(3);
    println!(
        "hom+(D, J(K3)) = {} = hom(H(D), K3) = {}",
        hom_count(&d, &functor_j(&a)?)?,
        hom_count(&hd, &a)?
    );

    // one-step quotient: identify an I-pair and repair the pebbling
    let chain = ForestCover::new(vec![None, Some(0), Some(1)])?;
    let cover = PebbleForestCover::new(chain, vec![1, 2, 1], 2)?;
    let mut st = RelStructure::discrete(sig.clone(), 3);
    st.insert_tuple("I", vec![0, 1])?;
    st.insert_tuple("E", vec![1, 2])?;
    assert!(validate_pebble_cover(&st, &cover, 2, 3));
    let (st2, cover2, _) = one_step_quotient(&st, &cover, 0, 1)?;
    println!("after identifying 0 ~ 1: size {}, pebbles {:?}", st2.size(), cover2.pebbles);
    assert!(validate_pebble_cover(&st2, &cover2, 2, 3));

    // iterating to the fixpoint reproduces the I-quotient, with a cover at
    // the same parameters
    let (reduced, final_cover) = eliminate_equalities(&st, &cover)?;
    let (expected, _) = functor_h(&st)?;
    println!(
        "eliminate_equalities: {} elements, matches H: {}",
        reduced.size(),
        homlab::structure::iso_check(&reduced, &expected).is_some()
    );
    println!("final cover still valid: {}", validate_pebble_cover(&reduced, &final_cover, 2, 3));
    Ok(())
}
