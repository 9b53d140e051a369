//! Forest covers as certificates: tree-depth via elimination forests,
//! tree-width via pebble covers, and the sees relation that makes a pebbling
//! valid.

use homlab::cover::{
    compute_tree_depth, find_pebble_forest_cover, sees, tree_width, validate_pebble_cover,
    DEFAULT_COVER_CAP,
};
use homlab::graphs::{cycle, kn, path, star};

fn main() -> homlab::Result<()> {
    for (name, g) in [
        ("P4", path(4)),
        ("star(3)", star(3)),
        ("C5", cycle(5)),
        ("K4", kn(4)),
    ] {
        let (td, cover) = compute_tree_depth(&g, DEFAULT_COVER_CAP)?;
        let tw = tree_width(&g, DEFAULT_COVER_CAP)?;
        println!("{name}: tree-depth {td}, tree-width {tw}");
        println!("  witness forest parents: {:?}", cover.parents());
    }

    // a pebble cover of C6 with three pebbles
    let c6 = cycle(6);
    let cover = find_pebble_forest_cover(&c6, 3, None, DEFAULT_COVER_CAP)?.unwrap();
    println!("C6 cover: parents {:?}, pebbles {:?}", cover.cover.parents(), cover.pebbles);
    assert!(validate_pebble_cover(&c6, &cover, 3, 6));

    // adjacent vertices must see each other: the pebble of the lower one
    // cannot recur strictly between them
    for (a, b) in [(0usize, 1usize), (0, 5), (2, 3)] {
        println!("  sees({a}, {b}) = {}", sees(&cover, a, b));
    }

    // there is no 2-pebble cover of C6 at any height: its tree-width is 2
    assert!(find_pebble_forest_cover(&c6, 2, None, DEFAULT_COVER_CAP)?.is_none());
    println!("C6 admits no 2-pebble cover, at any height");

    // bounded height is strictly harder: P3 needs height 2 even with 2 pebbles
    assert!(find_pebble_forest_cover(&path(3), 2, Some(1), DEFAULT_COVER_CAP)?.is_none());
    assert!(find_pebble_forest_cover(&path(3), 2, Some(2), DEFAULT_COVER_CAP)?.is_some());
    println!("P3: 2 pebbles suffice at height 2 but not at height 1");
    Ok(())
}
