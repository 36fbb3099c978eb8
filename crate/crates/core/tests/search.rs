use mcbell::catalog::load_catalog;
use mcbell::lhv::DEFAULT_BUDGET;
use mcbell::quantum::{optimize_phases, OptimizeOptions};
use mcbell::rational::rat;
use mcbell::search::{run_search, verify_candidate, SearchConfig};
use mcbell::symmetry::recipe::parse_recipe;
use mcbell::symmetry::{apply, Transformation};
use mcbell::{restrict, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spectrum(xs: &[(i64, i64)]) -> Vec<Rational> {
    xs.iter().map(|&(n, d)| rat(n, d)).collect()
}

#[test]
fn two_party_sweep() {
    let cfg = SearchConfig::new("I_2_3", "I_2_3", 3);
    let a = run_search(&cfg).unwrap();
    assert_eq!(a.orbit_size, 54);
    assert_eq!(a.candidates_evaluated, 54);
    assert_eq!(a.dedup_winner_count, 4);
    assert_eq!(a.raw_winner_count, a.dedup_winner_count);
    assert_eq!(a.winner_classes, Some(1));
    assert!((a.min_vc - 0.6).abs() < 1e-6);
    assert_eq!(a.histogram[0].count, 4);
    assert_eq!(a.histogram.iter().map(|b| b.count).sum::<usize>() + a.non_violating, 54);
    assert_eq!(run_search(&cfg).unwrap(), a);

    let cat = load_catalog();
    let seed = cat.function("I_2_3").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for w in &a.winners {
        assert_eq!(&restrict(&w.function, 0, 0).unwrap(), seed);
        let g = parse_recipe(&w.recipe, 2, 3).unwrap();
        assert_eq!(restrict(&w.function, 0, 1).unwrap(), apply(&g, seed).unwrap());
        let moved = apply(&Transformation::random(3, 3, &mut rng), &w.function).unwrap();
        let q = optimize_phases(&moved, &OptimizeOptions::default(), DEFAULT_BUDGET).unwrap();
        assert!((q.vc - w.vc).abs() < 1e-6, "{} vs {}", q.vc, w.vc);
    }
}

#[test]
fn rejects_bad_inputs() {
    assert!(run_search(&SearchConfig::new("I_2_3", "I_2_3", 4)).is_err());
    assert!(run_search(&SearchConfig::new("I_2_3", "nope", 3)).is_err());
    assert!(run_search(&SearchConfig::new("I_2_3", "I_2_5", 3)).is_err());
}

#[test]
fn candidate_checks() {
    let cat = load_catalog();
    let opts = OptimizeOptions::default();
    let s5 = spectrum(&[(-3, 2), (-1, 4), (1, 1)]);
    let s7 = spectrum(&[(-4, 3), (-1, 6), (1, 1)]);
    let r = verify_candidate(cat.function("I_2_5_2").unwrap(), &s5, 0.687157, 1e-4, &opts, DEFAULT_BUDGET).unwrap();
    assert!(r.passed, "{r:?}");
    let fixed = cat.get("I_2_7_3").unwrap().corrected_function().unwrap();
    let r = verify_candidate(&fixed, &s7, 0.683256, 1e-4, &opts, DEFAULT_BUDGET).unwrap();
    assert!(r.passed, "{r:?}");
    let chsh = cat.function("I_2_2").unwrap();
    let r = verify_candidate(chsh, &s5, 0.7071, 1e-3, &opts, DEFAULT_BUDGET).unwrap();
    assert!(!r.spectrum_ok && r.vc_ok && !r.passed);
}
