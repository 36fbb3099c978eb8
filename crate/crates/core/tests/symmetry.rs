use std::collections::HashSet;

use mcbell::catalog::load_catalog;
use mcbell::lhv::{lhv_bound, DEFAULT_BUDGET};
use mcbell::symmetry::orbit::{canonical_form, canonical_with_witness, equivalent, orbit, Equivalence};
use mcbell::symmetry::recipe::parse_recipe;
use mcbell::symmetry::{apply, group_order, invariant_certificate, Transformation};
use mcbell::BellFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every group element built from its parts, with no use of the library's generators.
fn whole_group(n: usize, d: usize) -> Vec<Transformation> {
    let mut out = Vec::new();
    for perm in permutations(n) {
        for swaps in 0..1usize << n {
            for mut code in 0..d.pow(2 * n as u32) {
                let mut shift = vec![[0, 0]; n];
                for s in shift.iter_mut() {
                    s[0] = code % d;
                    code /= d;
                    s[1] = code % d;
                    code /= d;
                }
                let swap = (0..n).map(|p| swaps >> p & 1 == 1).collect();
                out.push(Transformation::new(perm.clone(), swap, shift, d).unwrap());
            }
        }
    }
    out
}

fn brute_orbit(f: &BellFunction) -> HashSet<String> {
    whole_group(f.n(), f.d()).iter().map(|g| format!("{:?}", apply(g, f).unwrap())).collect()
}

#[test]
fn orbit_sizes_against_whole_group() {
    let cat = load_catalog();
    for (id, want) in [("I_2_3", 54usize), ("I_2_5", 250), ("I_3_3_1", 648)] {
        let f = cat.function(id).unwrap();
        let o = orbit(f, DEFAULT_BUDGET, true).unwrap();
        assert_eq!(o.size, want, "{id}");
        assert_eq!(o.group_order, group_order(f.n(), f.d()));
        assert_eq!(o.size as u128 * o.stabilizer_order, o.group_order);
        if f.n() == 2 {
            assert_eq!(brute_orbit(f).len(), want, "{id}");
        }
        for (g, t) in o.elements.unwrap().iter().step_by(17) {
            assert_eq!(&apply(t, f).unwrap(), g);
        }
    }
    let f = cat.function("I_3_5_1").unwrap();
    assert_eq!(orbit(f, DEFAULT_BUDGET, false).unwrap().size, 1250);
}

#[test]
fn group_order_counts_elements() {
    assert_eq!(whole_group(2, 3).len() as u128, group_order(2, 3));
    assert_eq!(whole_group(3, 2).len() as u128, group_order(3, 2));
}

#[test]
fn invariants_under_random_elements() {
    let cat = load_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for id in ["I_2_3", "I_3_3_1", "I_3_3_3", "I_2_5_2"] {
        let f = cat.function(id).unwrap();
        let canon = canonical_form(f, DEFAULT_BUDGET).unwrap();
        let rep = lhv_bound(f, DEFAULT_BUDGET).unwrap();
        for _ in 0..5 {
            let g = Transformation::random(f.n(), f.d(), &mut rng);
            let h = apply(&g, f).unwrap();
            assert_eq!(canonical_form(&h, DEFAULT_BUDGET).unwrap(), canon);
            assert_eq!(invariant_certificate(&h), invariant_certificate(f));
            let hr = lhv_bound(&h, DEFAULT_BUDGET).unwrap();
            assert_eq!((hr.bound, hr.spectrum), (rep.bound.clone(), rep.spectrum.clone()));
            match equivalent(f, &h, DEFAULT_BUDGET).unwrap() {
                Equivalence::Equivalent(w) => assert_eq!(apply(&w, f).unwrap(), h),
                other => panic!("{id}: {other:?}"),
            }
        }
        let (c, w) = canonical_with_witness(f, DEFAULT_BUDGET).unwrap();
        assert_eq!(apply(&w, f).unwrap(), c);
    }
}

#[test]
fn distinct_functions_are_told_apart() {
    let cat = load_catalog();
    let ids = ["I_4_3_1", "I_4_3_2", "I_4_3_3", "I_4_3_4"];
    let fs: Vec<BellFunction> = ids.iter().map(|id| cat.get(id).unwrap().corrected_function().unwrap()).collect();
    let forms: HashSet<_> = fs.iter().map(|f| format!("{:?}", canonical_form(f, DEFAULT_BUDGET).unwrap())).collect();
    assert_eq!(forms.len(), 4);
    assert!(!matches!(equivalent(&fs[0], &fs[1], DEFAULT_BUDGET).unwrap(), Equivalence::Equivalent(_)));
    let (a, b) = (cat.function("I_3_3_1").unwrap(), cat.function("I_3_3_3").unwrap());
    match equivalent(a, b, DEFAULT_BUDGET).unwrap() {
        Equivalence::Equivalent(w) => assert_eq!(&apply(&w, a).unwrap(), b),
        other => panic!("{other:?}"),
    }
}

#[test]
fn recipes_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for (n, d) in [(2usize, 3usize), (3, 3), (4, 5)] {
        for _ in 0..50 {
            let g = Transformation::random(n, d, &mut rng);
            assert_eq!(parse_recipe(&g.to_recipe(), n, d).unwrap(), g);
        }
    }
    let g = parse_recipe("{ABC->CAB}", 3, 3).unwrap();
    assert_eq!(g.perm, vec![2, 0, 1]);
    assert!(parse_recipe("{ABCD->AB}", 4, 3).is_err());
}
