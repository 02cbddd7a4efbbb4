use nodal_atlas::construct::*;
use nodal_atlas::rng::{stream, StreamTag};
use nodal_atlas::topology::{canonical_code, enumerate_rooted_trees, random_rooted_tree, RootedTreeCode};

fn code(s: &str) -> RootedTreeCode {
    RootedTreeCode::parse(s).unwrap()
}

fn realized(p: &str, eps: f64) -> RootedTreeCode {
    realize_and_verify(&code(p), eps).unwrap().code
}

#[test]
fn chains() {
    assert_eq!(realized("()", 0.1), code("()"));
    assert_eq!(realized("(())", 0.1), code("(())"));
    assert_eq!(realized("(((())))", 0.1), code("(((())))"));
}

#[test]
fn cherry_and_mixed_join() {
    assert_eq!(realized("(()())", 0.1), code("(()())"));
    assert_eq!(realized("((())())", 0.1), code("((())())"));
}

#[test]
fn every_tree_up_to_six_matches_on_the_whole_sweep() {
    for n in 1..=6 {
        for t in enumerate_rooted_trees(n) {
            for eps in EPSILON_SWEEP {
                let r = realize_and_verify(&t, eps).unwrap();
                assert!(r.matched, "{t} at {eps}: got {}", r.code);
            }
        }
    }
}

#[test]
fn random_trees_of_seven_and_eight() {
    let mut rng = stream(2024, 0, StreamTag::TreeSampling);
    for k in 0..20 {
        let t = canonical_code(&random_rooted_tree(7 + k % 2, &mut rng));
        let out = realize_with_sweep(&t, None);
        assert!(out.matched_at.is_some(), "{t}: {:?}", out.tried);
    }
}

#[test]
fn join_is_symmetric_up_to_isomorphism() {
    let a = grow_chain(2).unwrap();
    let b = LatticeSignPattern::trivial();
    let ab = engulf(&join(&a, &b).unwrap()).unwrap();
    let ba = engulf(&join(&b, &a).unwrap()).unwrap();
    assert_eq!(ab.len(), ba.len());
    assert_eq!(realized("((())())", 0.05), realized("(()(()))", 0.05));
}
