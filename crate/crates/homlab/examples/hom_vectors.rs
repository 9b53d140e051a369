//! Exact homomorphism counting: plain counts, strong embeddings, and the
//! dynamic-programming path driven by a pebble forest cover.

use homlab::cover::find_pebble_forest_cover;
use homlab::graphs::{cycle, kn, path};
use homlab::homcount::{hom_count, hom_count_treedec, strong_emb_count};
use homlab::structure::disjoint_union;

fn main() -> homlab::Result<()> {
    let k3 = kn(3);
    let c6 = cycle(6);
    let (two_k3, _, _) = disjoint_union(&k3, &k3)?;

    println!("hom(K2, K3)  = {}", hom_count(&kn(2), &k3)?);
    println!("hom(C6, K3)  = {}", hom_count(&c6, &k3)?);
    println!("hom(K3, C6)  = {}", hom_count(&k3, &c6)?);
    println!("hom(K3, K3+K3) = {}", hom_count(&k3, &two_k3)?);

    // strong embeddings reflect structure: two isolated vertices never embed
    // into an edge
    println!("emb(K2, P3)  = {}", strong_emb_count(&kn(2), &path(3))?);
    println!("emb(2K1, K2) = {}", strong_emb_count(&homlab::graphs::edgeless(2), &kn(2))?);

    // the same count via dynamic programming over a width-2 cover of C6
    let cover = find_pebble_forest_cover(&c6, 3, None, 10)?.expect("C6 has tree-width 2");
    println!("hom(C6, K3) via cover DP = {}", hom_count_treedec(&c6, &cover, &k3)?);

    // counting is multiplicative over components and additive over targets
    let (c6_plus_k3, _, _) = disjoint_union(&c6, &k3)?;
    println!(
        "hom(C6+K3, K3) = {} = {} * {}",
        hom_count(&c6_plus_k3, &k3)?,
        hom_count(&c6, &k3)?,
        hom_count(&k3, &k3)?
    );
    Ok(())
}
