//! Cross-module property batteries: the spec-level invariants that are not
//! already acceptance criteria.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use homlab::comonad::{build_comonad, carrier_size, comonad_map, Base, ComonadKind};
use homlab::cover::{compute_tree_depth, find_pebble_forest_cover, quotient_forest_cover, tree_width, ForestCover};
use homlab::enumerate::{
    enumerate_structures, ClassKind, ClassSpec, DEFAULT_GENERAL_ENUM_CAP, DEFAULT_GRAPH_ENUM_CAP,
};
use homlab::formula::{
    eval_formula, eval_modal, standard_translation, ModalFormula, TRANSLATION_POINT_VAR,
};
use homlab::game::{distinguishing_formula, equiv_counting};
use homlab::homcount::{hom_count, hom_count_treedec, pointed_hom_count, strong_emb_count};
use homlab::query::{
    canonical_conjunctive_query, count_witnesses, distinct_edge_sentence, threshold_lift,
    PrimitivePositiveFormula, QueryLayout, ThresholdLifter,
};
use homlab::quotient::{enumerate_quotient_objects, epi_mono_factorize, functor_h, functor_j, pushout};
use homlab::structure::{
    disjoint_union, gaifman, iso_check, validate_hom, validate_strong_embedding, Homomorphism,
    PointedStructure, RelStructure, Signature,
};
use homlab::wl::{characteristic_formula, modal_equiv};

mod common;

fn directed_reps(max: usize) -> Vec<RelStructure> {
    let spec = ClassSpec::general(ClassKind::All, Signature::graph(), max);
    enumerate_structures(&spec, DEFAULT_GENERAL_ENUM_CAP)
        .unwrap()
        .into_iter()
        .map(|e| e.structure)
        .collect()
}

fn graph_reps(max: usize) -> Vec<RelStructure> {
    let spec = ClassSpec::simple_graphs(ClassKind::All, max);
    enumerate_structures(&spec, DEFAULT_GRAPH_ENUM_CAP)
        .unwrap()
        .into_iter()
        .map(|e| e.structure)
        .collect()
}

#[test]
fn pushout_universal_property() {
    let small = directed_reps(2);
    let cocone_targets = directed_reps(3);
    // a deterministic set of pushout instances
    let mut instances = Vec::new();
    for a in &small {
        for b in &small {
            for c in &small {
                let fs = common::all_homs(a, b, 2);
                let gs = common::all_homs(a, c, 2);
                for f in &fs {
                    for g in &gs {
                        instances.push((
                            Homomorphism::new(a.clone(), b.clone(), f.clone()),
                            Homomorphism::new(a.clone(), c.clone(), g.clone()),
                        ));
                    }
                }
            }
        }
    }
    instances.truncate(40);
    instances.par_iter().for_each(|(f, g)| {
        let (d, leg_b, leg_c) = pushout(f, g).unwrap();
        assert_eq!(f.then(&leg_b).unwrap().map, g.then(&leg_c).unwrap().map);
        for e in &cocone_targets {
            let homs_b = common::all_homs(&f.target, e, usize::MAX);
            let homs_c = common::all_homs(&g.target, e, usize::MAX);
            let homs_d = common::all_homs(&d, e, usize::MAX);
            for ib in &homs_b {
                for ic in &homs_c {
                    // commuting cocone?
                    let via_b: Vec<usize> = f.map.iter().map(|&x| ib[x]).collect();
                    let via_c: Vec<usize> = g.map.iter().map(|&x| ic[x]).collect();
                    if via_b != via_c {
                        continue;
                    }
                    let mediators = homs_d
                        .iter()
                        .filter(|m| {
                            leg_b.map.iter().enumerate().all(|(x, &dx)| m[dx] == ib[x])
                                && leg_c.map.iter().enumerate().all(|(x, &dx)| m[dx] == ic[x])
                        })
                        .count();
                    assert_eq!(mediators, 1, "mediating homomorphism must be unique");
                }
            }
        }
    });
}

#[test]
fn factorization_on_all_small_homs() {
    let reps = directed_reps(3);
    reps.par_iter().for_each(|x| {
        for y in &reps {
            for map in common::all_homs(x, y, usize::MAX) {
                let f = Homomorphism::new(x.clone(), y.clone(), map);
                let (e, m) = epi_mono_factorize(&f).unwrap();
                assert!(validate_hom(&e).unwrap());
                assert!(validate_hom(&m).unwrap());
                assert!(e.is_surjective());
                assert!(validate_strong_embedding(&m).unwrap());
                assert_eq!(e.then(&m).unwrap().map, f.map);
            }
        }
    });
}

#[test]
fn h_after_j_is_identity_up_to_size_four() {
    for a in directed_reps(4) {
        let (back, _) = functor_h(&functor_j(&a).unwrap()).unwrap();
        assert!(iso_check(&back, &a).is_some());
    }
}

#[test]
fn gaifman_laws_on_enumerated_graphs() {
    let reps = directed_reps(3);
    for a in &reps {
        let g = gaifman(a);
        let e = g.relation("E").unwrap();
        for t in e {
            assert_ne!(t[0], t[1], "gaifman graphs are loop-free");
            assert!(e.contains(&vec![t[1], t[0]]), "gaifman graphs are symmetric");
        }
        for b in reps.iter().take(6) {
            let (sum, _, _) = disjoint_union(a, b).unwrap();
            let (gsum, _, _) = disjoint_union(&gaifman(a), &gaifman(b)).unwrap();
            assert_eq!(gaifman(&sum), gsum);
        }
    }
}

#[test]
fn hom_count_union_laws_exhaustive() {
    // hom(C, A + B) = hom(C, A) + hom(C, B) for Gaifman-connected C up to 4
    let connected: Vec<RelStructure> = graph_reps(4)
        .into_iter()
        .filter(|g| g.gaifman_components().len() == 1)
        .collect();
    let targets = graph_reps(3);
    connected.par_iter().for_each(|c| {
        for a in &targets {
            for b in &targets {
                let (sum, _, _) = disjoint_union(a, b).unwrap();
                assert_eq!(
                    hom_count(c, &sum).unwrap(),
                    hom_count(c, a).unwrap() + hom_count(c, b).unwrap()
                );
            }
        }
    });
    // hom(C1 + C2, A) = hom(C1, A) * hom(C2, A), sizes <= 3
    let smalls = graph_reps(3);
    for c1 in &smalls {
        for c2 in &smalls {
            let (sum, _, _) = disjoint_union(c1, c2).unwrap();
            for a in &targets {
                assert_eq!(
                    hom_count(&sum, a).unwrap(),
                    hom_count(c1, a).unwrap() * hom_count(c2, a).unwrap()
                );
            }
        }
    }
}

#[test]
fn treedec_dp_matches_backtracking_on_random_instances() {
    let mut rng = common::rng(4242);
    let mut done = 0;
    while done < 200 {
        let c = {
            // random loop-free symmetric graph with <= 6 vertices
            let n = rng.gen_range(1..=6);
            let mut g = homlab::graphs::edgeless(n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.45) {
                        homlab::graphs::add_edge(&mut g, u, v);
                    }
                }
            }
            g
        };
        let k = tree_width(&c, 10).unwrap() + 1;
        let cover = match find_pebble_forest_cover(&c, k, None, 10).unwrap() {
            Some(cover) => cover,
            None => continue,
        };
        let a = common::random_structure(&mut rng, 5);
        assert_eq!(
            hom_count_treedec(&c, &cover, &a).unwrap(),
            hom_count(&c, &a).unwrap(),
            "C={c}, A={a}"
        );
        done += 1;
    }
}

#[test]
fn strong_embeddings_bounded_and_tight_without_strict_quotient_images() {
    let reps = directed_reps(3);
    reps.par_iter().for_each(|c| {
        let objects = enumerate_quotient_objects(c, 5).unwrap();
        for a in &reps {
            let homs = hom_count(c, a).unwrap();
            let embs = strong_emb_count(c, a).unwrap();
            assert!(embs <= homs);
            let strict_images: u64 = objects
                .iter()
                .filter(|o| o.strict)
                .map(|o| strong_emb_count(&o.codomain, a).unwrap())
                .sum();
            if strict_images == 0 {
                assert_eq!(embs, homs);
            }
        }
    });
}

#[test]
fn tree_depth_agrees_with_exhaustive_cover_search() {
    // independent oracle: minimal height over all compatible forest covers
    fn exhaustive_td(g: &RelStructure) -> usize {
        let n = g.size();
        if n == 0 {
            return 0;
        }
        let mut best = usize::MAX;
        let mut parent: Vec<Option<usize>> = vec![None; n];
        fn rec(
            i: usize,
            n: usize,
            parent: &mut Vec<Option<usize>>,
            g: &RelStructure,
            best: &mut usize,
        ) {
            if i == n {
                if let Ok(cover) = ForestCover::new(parent.clone()) {
                    if cover.is_compatible(g) {
                        *best = (*best).min(cover.height());
                    }
                }
                return;
            }
            parent[i] = None;
            rec(i + 1, n, parent, g, best);
            for p in 0..n {
                if p != i {
                    parent[i] = Some(p);
                    rec(i + 1, n, parent, g, best);
                }
            }
            parent[i] = None;
        }
        rec(0, n, &mut parent, g, &mut best);
        best
    }
    graph_reps(5).par_iter().for_each(|g| {
        let (td, cover) = compute_tree_depth(g, 10).unwrap();
        assert_eq!(td, exhaustive_td(g), "tree-depth of {g}");
        assert!(cover.is_compatible(g));
        assert_eq!(cover.height(), td);
    });
}

#[test]
fn quotient_forest_cover_preserves_height_and_compatibility() {
    let mut rng = common::rng(99);
    for _ in 0..300 {
        let (d, cover) = common::random_extended_instance(&mut rng);
        let forest = cover.cover.clone();
        let q = quotient_forest_cover(&d, &forest).unwrap();
        let (h, _) = functor_h(&d).unwrap();
        assert_eq!(q.size(), h.size());
        assert!(q.height() <= forest.height());
        assert!(q.is_compatible(&h));
    }
}

#[test]
fn carrier_sizes_match_the_formulas() {
    for size in 0..=3usize {
        let a = homlab::graphs::edgeless(size);
        for n in 1..=3usize {
            let cs =
                build_comonad(&ComonadKind::Ef { n }, &Base::Plain(a.clone()), 1_000_000).unwrap();
            let expected: u64 = (1..=n as u32).map(|i| (size as u64).pow(i)).sum();
            assert_eq!(cs.carrier.size() as u64, expected);
            assert_eq!(carrier_size(&ComonadKind::Ef { n }, &Base::Plain(a.clone())), expected);
        }
        for k in 1..=2usize {
            for n in 1..=2usize {
                let kind = ComonadKind::Pebble { k, n };
                let cs = build_comonad(&kind, &Base::Plain(a.clone()), 1_000_000).unwrap();
                let expected: u64 =
                    (1..=n as u32).map(|i| (k as u64 * size as u64).pow(i)).sum();
                assert_eq!(cs.carrier.size() as u64, expected);
            }
        }
    }
}

#[test]
fn comonad_functor_laws() {
    let reps = directed_reps(2);
    let kind = ComonadKind::Ef { n: 2 };
    for a in &reps {
        let ca = build_comonad(&kind, &Base::Plain(a.clone()), 1_000_000).unwrap();
        // C(id) = id
        let id: Vec<usize> = (0..a.size()).collect();
        let (_, cid) = comonad_map(&ca, &Base::Plain(a.clone()), &id, 1_000_000).unwrap();
        assert_eq!(cid, (0..ca.plays.len()).collect::<Vec<_>>());
        for b in &reps {
            for f in common::all_homs(a, b, 2) {
                for c in &reps {
                    for g in common::all_homs(b, c, 2) {
                        // C(g . f) = C(g) . C(f)
                        let gf: Vec<usize> = f.iter().map(|&x| g[x]).collect();
                        let (_, c_gf) =
                            comonad_map(&ca, &Base::Plain(c.clone()), &gf, 1_000_000).unwrap();
                        let (cb, c_f) =
                            comonad_map(&ca, &Base::Plain(b.clone()), &f, 1_000_000).unwrap();
                        let (_, c_g) =
                            comonad_map(&cb, &Base::Plain(c.clone()), &g, 1_000_000).unwrap();
                        let composed: Vec<usize> = c_f.iter().map(|&s| c_g[s]).collect();
                        assert_eq!(c_gf, composed);
                    }
                }
            }
        }
    }
}

#[test]
fn equivalence_relations_and_monotonicity() {
    let graphs = graph_reps(4);
    let params: Vec<(Option<usize>, Option<usize>)> = vec![
        (Some(1), None),
        (Some(2), None),
        (Some(3), None),
        (Some(2), Some(2)),
        (Some(3), Some(2)),
        (Some(3), Some(3)),
        (None, Some(2)),
        (None, Some(3)),
    ];
    for (depth, width) in &params {
        let verdicts: Vec<Vec<bool>> = graphs
            .par_iter()
            .map(|a| {
                graphs
                    .iter()
                    .map(|b| equiv_counting(a, b, *depth, *width).unwrap())
                    .collect()
            })
            .collect();
        let n = graphs.len();
        for i in 0..n {
            assert!(verdicts[i][i], "reflexive");
            for j in 0..n {
                assert_eq!(verdicts[i][j], verdicts[j][i], "symmetric");
                for k in 0..n {
                    if verdicts[i][j] && verdicts[j][k] {
                        assert!(verdicts[i][k], "transitive");
                    }
                }
            }
        }
    }
    // monotonicity in both bounds
    for a in graphs.iter() {
        for b in graphs.iter() {
            for n in 1..=2usize {
                for k in 1..=2usize {
                    let fine = equiv_counting(a, b, Some(n + 1), Some(k)).unwrap();
                    let coarse = equiv_counting(a, b, Some(n), Some(k)).unwrap();
                    assert!(!fine || coarse, "equivalence at depth {} implies depth {n}", n + 1);
                    let fine_w = equiv_counting(a, b, Some(n), Some(k + 1)).unwrap();
                    assert!(!fine_w || coarse, "equivalence at width {} implies width {k}", k + 1);
                }
            }
        }
    }
}

#[test]
fn losing_games_yield_separating_formulas() {
    let graphs = graph_reps(4);
    let mut found = 0;
    let empty = BTreeMap::new();
    'outer: for (i, a) in graphs.iter().enumerate() {
        for b in graphs.iter().skip(i + 1) {
            for (depth, width) in [(2, None), (3, None), (3, Some(2)), (4, Some(3))] {
                if equiv_counting(a, b, Some(depth), width).unwrap() {
                    continue;
                }
                let phi = distinguishing_formula(a, b, depth, width)
                    .unwrap()
                    .expect("inequivalent pair must yield a separator");
                assert!(eval_formula(a, &phi, &empty).unwrap());
                assert!(!eval_formula(b, &phi, &empty).unwrap());
                assert!(homlab::formula::quantifier_depth(&phi) <= depth);
                if let Some(k) = width {
                    assert!(homlab::formula::variable_width(&phi) <= k);
                }
                found += 1;
                if found >= 50 {
                    break 'outer;
                }
            }
        }
    }
    assert!(found >= 50, "expected at least 50 separated pairs, found {found}");
}

#[test]
fn modal_equiv_agrees_with_characteristic_formulas() {
    let sig = Signature::new(vec![("R", 2), ("P", 1)]).unwrap();
    let spec = ClassSpec::pointed(ClassKind::All, sig, 3);
    let all = enumerate_structures(&spec, DEFAULT_GENERAL_ENUM_CAP).unwrap();
    // all pairs among sizes <= 2, a deterministic slice of size 3
    let small: Vec<PointedStructure> = all
        .iter()
        .filter(|e| e.structure.size() <= 2)
        .map(|e| e.pointed().unwrap())
        .collect();
    let sampled: Vec<PointedStructure> = all
        .iter()
        .filter(|e| e.structure.size() == 3)
        .step_by(7)
        .map(|e| e.pointed().unwrap())
        .collect();
    let pool: Vec<PointedStructure> = small.into_iter().chain(sampled).collect();
    pool.par_iter().for_each(|a| {
        for b in &pool {
            for k in 0..=2usize {
                let equivalent = modal_equiv(a, b, k).unwrap();
                let chi = characteristic_formula(&a.structure, a.point, k);
                assert!(eval_modal(a, &chi).unwrap(), "chi holds at its own point");
                assert_eq!(
                    eval_modal(b, &chi).unwrap(),
                    equivalent,
                    "characteristic formula at depth {k}"
                );
            }
        }
    });
}

#[test]
fn standard_translation_matches_kripke_semantics() {
    let sig = Signature::new(vec![("R", 2), ("P", 1)]).unwrap();
    let mut rng = common::rng(777);
    fn random_modal(rng: &mut rand::rngs::StdRng, depth: usize) -> ModalFormula {
        if depth == 0 || rng.gen_bool(0.3) {
            return match rng.gen_range(0..3) {
                0 => ModalFormula::Prop("P".to_string()),
                1 => ModalFormula::And(vec![]),
                _ => ModalFormula::Not(Box::new(ModalFormula::Prop("P".to_string()))),
            };
        }
        match rng.gen_range(0..4) {
            0 => ModalFormula::Diamond(
                "R".to_string(),
                rng.gen_range(1..=3),
                Box::new(random_modal(rng, depth - 1)),
            ),
            1 => ModalFormula::Box(
                "R".to_string(),
                rng.gen_range(1..=3),
                Box::new(random_modal(rng, depth - 1)),
            ),
            2 => ModalFormula::And(vec![
                random_modal(rng, depth - 1),
                random_modal(rng, depth - 1),
            ]),
            _ => ModalFormula::Not(Box::new(random_modal(rng, depth - 1))),
        }
    }
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let mut st = RelStructure::discrete(sig.clone(), n);
        for u in 0..n {
            for v in 0..n {
                if rng.gen_bool(0.4) {
                    st.insert_tuple("R", vec![u, v]).unwrap();
                }
            }
            if rng.gen_bool(0.5) {
                st.insert_tuple("P", vec![u]).unwrap();
            }
        }
        let point = rng.gen_range(0..n);
        let p = PointedStructure::new(st, point).unwrap();
        let phi = random_modal(&mut rng, 3);
        let translated = standard_translation(&phi);
        let mut env = BTreeMap::new();
        env.insert(TRANSLATION_POINT_VAR.to_string(), point);
        assert_eq!(
            eval_modal(&p, &phi).unwrap(),
            eval_formula(&p.structure, &translated, &env).unwrap(),
            "phi = {}",
            homlab::formula::print_modal(&phi)
        );
    }
}

#[test]
fn lift_is_monotone_and_counts_witnesses() {
    let sources = directed_reps(2);
    let targets = directed_reps(3);
    let empty = BTreeMap::new();
    for a in &sources {
        if a.size() == 0 {
            continue;
        }
        let gamma = canonical_conjunctive_query(a, QueryLayout::Chain).unwrap();
        let mut lifter = ThresholdLifter::new();
        for b in &targets {
            let count = count_witnesses(b, &gamma, &empty).unwrap();
            assert_eq!(count, hom_count(a, b).unwrap());
            let mut previous = true;
            for t in 1..=6 {
                let holds = eval_formula(b, &lifter.lift(&gamma, t).unwrap(), &empty).unwrap();
                assert!(!holds || previous, "lift must be monotone in t");
                assert_eq!(holds, count >= t);
                previous = holds;
            }
        }
    }
}

#[test]
fn ccq_layouts_bound_width_and_depth() {
    for g in graph_reps(4) {
        if g.size() == 0 {
            continue;
        }
        let (td, forest) = compute_tree_depth(&g, 10).unwrap();
        let q = canonical_conjunctive_query(&g, QueryLayout::Forest(&forest)).unwrap();
        assert!(homlab::formula::quantifier_depth(q.formula()) <= td);
        let k = tree_width(&g, 10).unwrap() + 1;
        let cover = find_pebble_forest_cover(&g, k, None, 10).unwrap().unwrap();
        let q = canonical_conjunctive_query(&g, QueryLayout::Pebble(&cover)).unwrap();
        assert!(homlab::formula::variable_width(q.formula()) <= k);
        // still equivalent to hom existence against a few targets
        for b in graph_reps(3) {
            let holds = eval_formula(&b, q.formula(), &BTreeMap::new()).unwrap();
            assert_eq!(holds, hom_count(&g, &b).unwrap() >= 1);
        }
    }
}

#[test]
fn distinct_edge_sentence_matches_equality_sentence() {
    let reference =
        homlab::formula::parse_counting("(geq 1 x (geq 1 y (and (not (= x y)) (E x y))))")
            .unwrap();
    let phi = distinct_edge_sentence(9).unwrap();
    let empty = BTreeMap::new();
    for b in directed_reps(3) {
        assert_eq!(
            eval_formula(&b, &phi, &empty).unwrap(),
            eval_formula(&b, &reference, &empty).unwrap(),
            "B = {b}"
        );
    }
}

#[test]
fn pointed_hom_count_respects_identity_and_degree() {
    let sig = Signature::graph();
    let chain = RelStructure::new(sig, 2, vec![("E", vec![vec![0, 1]])]).unwrap();
    let c = PointedStructure::new(chain, 0).unwrap();
    for e in enumerate_structures(
        &ClassSpec::pointed(ClassKind::All, Signature::graph(), 3),
        DEFAULT_GENERAL_ENUM_CAP,
    )
    .unwrap()
    {
        let a = e.pointed().unwrap();
        let out_degree = a
            .structure
            .relation("E")
            .unwrap()
            .iter()
            .filter(|t| t[0] == a.point)
            .count() as u64;
        assert_eq!(pointed_hom_count(&c, &a).unwrap(), out_degree);
        assert!(pointed_hom_count(&a, &a).unwrap() >= 1);
    }
}

#[test]
fn threshold_lift_rejects_and_caps() {
    let gamma = PrimitivePositiveFormula::new(homlab::formula::CountingFormula::atom(
        "E",
        vec!["x", "y"],
    ))
    .unwrap();
    assert!(threshold_lift(&gamma, 0).is_err());
    // non-primitive-positive input is rejected at construction
    assert!(PrimitivePositiveFormula::new(
        homlab::formula::parse_counting("(not (E x y))").unwrap()
    )
    .is_err());
    assert!(PrimitivePositiveFormula::new(
        homlab::formula::parse_counting("(geq 2 x (E x x))").unwrap()
    )
    .is_err());
}
