use mcbell::catalog::{check_printed_form, load_catalog, suspects, verify_bounds, verify_links, verify_recipes, Catalog};
use mcbell::lhv::{lhv_max, DEFAULT_BUDGET};
use mcbell::rational::int;
use mcbell::{iterate, restrict};

#[test]
fn loads_every_entry() {
    let cat = load_catalog();
    assert!(cat.entries().len() > 60);
    for e in cat.entries() {
        assert_eq!(cat.get(e.id()).unwrap().id(), e.id());
    }
    assert!(cat.get("I_9_9_9").is_err());
}

#[test]
fn json_round_trip() {
    let cat = load_catalog();
    let again = Catalog::from_json(&cat.to_json().to_string()).unwrap();
    assert_eq!(again.entries().len(), cat.entries().len());
    for e in cat.entries() {
        assert_eq!(again.function(e.id()).unwrap(), &e.function);
    }
}

#[test]
fn recipes_fail_only_on_suspects() {
    let rep = verify_recipes(load_catalog());
    assert!(rep.passed >= 30);
    assert_eq!(rep.passed + rep.failed + rep.suspect, rep.checks.len());
    for c in &rep.checks {
        if !c.result.is_match() {
            assert!(c.suspect.is_some(), "{} <- {} via {}", c.target, c.source, c.recipe);
        }
    }
    let alt = rep.checks.iter().filter(|c| c.alternative_result.as_ref().is_some_and(|r| r.is_match())).count();
    assert!(alt >= 2);
}

#[test]
fn links_hold() {
    for l in verify_links(load_catalog()) {
        assert!(l.result.is_match(), "{} {}: {:?}", l.kind, l.target, l.result);
    }
}

#[test]
fn corrections_restore_the_iteration() {
    let cat = load_catalog();
    let f = cat.get("I_4_3_4").unwrap();
    assert!(f.is_suspect());
    assert_eq!(lhv_max(&f.function, DEFAULT_BUDGET).unwrap(), mcbell::rational::rat(3, 2));
    let fixed = f.corrected_function().unwrap();
    assert_eq!(lhv_max(&fixed, DEFAULT_BUDGET).unwrap(), int(1));
    let seed00 = restrict(&fixed, 0, 0).unwrap();
    let seed01 = restrict(&fixed, 0, 1).unwrap();
    assert_eq!(iterate(&seed00, &seed01).unwrap(), fixed);
}

#[test]
fn suspect_list_names_known_items() {
    let list = suspects(load_catalog());
    let items: Vec<&str> = list.iter().map(|(_, item, _)| item.as_str()).collect();
    for id in ["I_4_3_4", "I_4_3_16", "I_3_3_01_11"] {
        assert!(items.iter().any(|i| i.contains(id)), "{id} missing from {items:?}");
    }
    assert!(list.iter().all(|(_, _, why)| !why.is_empty()));
}

#[test]
fn printed_forms() {
    let cat = load_catalog();
    let two = check_printed_form(cat, "I_2_3", DEFAULT_BUDGET).unwrap().unwrap();
    assert!(two.affine_match && two.bound_tight);
    let five = check_printed_form(cat, "I_3_3_5", DEFAULT_BUDGET).unwrap().unwrap();
    assert!(!five.affine_match);
    assert!(five.equivalent_via.is_some());
}

#[test]
fn bounds_up_to_three_parties() {
    for b in verify_bounds(load_catalog(), 3, DEFAULT_BUDGET).unwrap() {
        assert!(b.matches, "{}: {}", b.id, b.lhv);
    }
}
