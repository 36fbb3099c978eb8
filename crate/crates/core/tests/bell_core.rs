use std::collections::BTreeSet;

use mcbell::bell::{cglmp, mabk, restriction_from_seeds, ProbabilityTable};
use mcbell::catalog::load_catalog;
use mcbell::lhv::{lhv_bound, lhv_max, DEFAULT_BUDGET};
use mcbell::rational::{int, rat};
use mcbell::{evaluate_deterministic, iterate, restrict, to_probability_form, BellFunction, Coefficient, DeterministicStrategy, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_coeff(d: usize, rng: &mut ChaCha8Rng) -> Coefficient {
    Coefficient::from_raw((0..d).map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))).collect()).unwrap()
}

fn rand_function(n: usize, d: usize, rng: &mut ChaCha8Rng) -> BellFunction {
    BellFunction::new(n, d, (0..1 << n).map(|_| rand_coeff(d, rng)).collect()).unwrap()
}

/// Every deterministic strategy, enumerated digit by digit.
fn all_strategies(n: usize, d: usize) -> Vec<DeterministicStrategy> {
    let total = d.pow(2 * n as u32);
    (0..total)
        .map(|mut i| {
            let mut outcomes = vec![[0, 0]; n];
            for o in outcomes.iter_mut() {
                o[0] = i % d;
                i /= d;
                o[1] = i % d;
                i /= d;
            }
            DeterministicStrategy { outcomes }
        })
        .collect()
}

/// Direct value: Σ_s first component of v_{residue} ∘ ω_s, read off the simplex picture.
fn brute_value(f: &BellFunction, st: &DeterministicStrategy) -> Rational {
    let (n, d) = (f.n(), f.d());
    let mut total = Rational::from_integer(0.into());
    for s in 0..1 << n {
        let mut r = 0;
        for (p, o) in st.outcomes.iter().enumerate() {
            r += o[(s >> (n - 1 - p)) & 1];
        }
        let alpha = f.coeff(s).alpha();
        for (k, a) in alpha.iter().enumerate() {
            let pos = (k + r) % d;
            total += if pos == 0 { a.clone() } else { a * rat(-1, d as i64 - 1) };
        }
    }
    total
}

#[test]
fn round_trip_and_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [2usize, 3, 5, 7] {
        for _ in 0..40 {
            let n = rng.gen_range(1..=3);
            let f00 = rand_function(n, d, &mut rng);
            let f01 = rand_function(n, d, &mut rng);
            let g = iterate(&f00, &f01).unwrap();
            assert_eq!((g.n(), g.d()), (n + 1, d));
            assert_eq!(restrict(&g, 0, 0).unwrap(), f00);
            assert_eq!(restrict(&g, 0, 1).unwrap(), f01);
            for l in 0..d {
                assert_eq!(restrict(&g, 0, l).unwrap(), restriction_from_seeds(&f00, &f01, l).unwrap());
            }
        }
    }
}

#[test]
fn second_restriction_by_hand() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for d in [3usize, 5, 7] {
        let f00 = rand_function(2, d, &mut rng);
        let f01 = rand_function(2, d, &mut rng);
        let g = iterate(&f00, &f01).unwrap();
        let v0 = Coefficient::basis(0, d).unwrap();
        let v1 = Coefficient::basis(1, d).unwrap();
        let coeffs = (0..4)
            .map(|s| {
                let a = f00.coeff(s).convolve(&v1.neg()).unwrap();
                let b = f01.coeff(s).convolve(&v0.add(&v1).unwrap()).unwrap();
                a.add(&b).unwrap()
            })
            .collect();
        assert_eq!(restrict(&g, 0, 2).unwrap(), BellFunction::new(2, d, coeffs).unwrap());
    }
}

#[test]
fn restriction_shift_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let f = rand_function(3, 5, &mut rng);
    for (k0, k1) in [(0, 1), (2, 4), (3, 3)] {
        let base = restrict(&f, k0, k1).unwrap();
        for c in 1..5 {
            let moved = restrict(&f, (k0 + c) % 5, (k1 + c) % 5).unwrap();
            let want = BellFunction::new(2, 5, base.coeffs().iter().map(|x| x.shift(c)).collect()).unwrap();
            assert_eq!(moved, want);
        }
    }
}

#[test]
fn iterate_is_linear_in_the_seed_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (a, b, c) = (rand_function(2, 3, &mut rng), rand_function(2, 3, &mut rng), rand_function(2, 3, &mut rng));
    let lhs = iterate(&a.add(&b).unwrap(), &c.scale(&int(2))).unwrap();
    let rhs = iterate(&a, &c).unwrap().add(&iterate(&b, &c).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
    let half = iterate(&a, &c).unwrap().scale(&rat(1, 2));
    assert_eq!(iterate(&a.scale(&rat(1, 2)), &c.scale(&rat(1, 2))).unwrap(), half);
}

#[test]
fn deterministic_value_three_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for (n, d) in [(2usize, 3usize), (3, 2), (2, 5), (3, 3)] {
        let f = rand_function(n, d, &mut rng);
        let form = to_probability_form(&f);
        for st in all_strategies(n, d).into_iter().step_by(7) {
            let v = evaluate_deterministic(&f, &st).unwrap();
            assert_eq!(v, brute_value(&f, &st));
            assert_eq!(form.evaluate(&ProbabilityTable::deterministic(&st, d)).unwrap(), v);
        }
        assert_eq!(form.evaluate(&ProbabilityTable::uniform(n, d)).unwrap(), int(0));
    }
}

#[test]
fn lhv_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for (n, d) in [(2usize, 2usize), (2, 3), (3, 2), (2, 5), (3, 3)] {
        for _ in 0..3 {
            let f = rand_function(n, d, &mut rng);
            let values: BTreeSet<Rational> = all_strategies(n, d).iter().map(|st| brute_value(&f, st)).collect();
            let rep = lhv_bound(&f, DEFAULT_BUDGET).unwrap();
            assert_eq!(&rep.bound, values.iter().next_back().unwrap());
            assert_eq!(rep.spectrum.iter().cloned().collect::<BTreeSet<_>>(), values);
            assert_eq!(evaluate_deterministic(&f, &rep.argmax).unwrap(), rep.bound);
            assert_eq!(lhv_max(&f, DEFAULT_BUDGET).unwrap(), rep.bound);
        }
    }
}

#[test]
fn known_bounds() {
    for d in [2usize, 3, 5, 7] {
        assert_eq!(lhv_max(&cglmp(d).unwrap(), DEFAULT_BUDGET).unwrap(), int(1));
    }
    let cat = load_catalog();
    let chsh = cat.function("I_2_2").unwrap();
    for n in 3..=4 {
        let f = mabk(n, chsh).unwrap();
        assert_eq!(&f, cat.function(&format!("MABK_{n}")).unwrap());
        assert_eq!(lhv_max(&f, DEFAULT_BUDGET).unwrap(), int(1));
    }
    assert!(lhv_max(&rand_function(4, 7, &mut ChaCha8Rng::seed_from_u64(1)), 1000).is_err());
}

#[test]
fn catalog_iterates() {
    let cat = load_catalog();
    let f = cat.function("I_3_3_1").unwrap();
    assert_eq!(restrict(f, 0, 0).unwrap(), *cat.function("I_2_3").unwrap());
    let g = iterate(cat.function("I_2_3").unwrap(), &restrict(f, 0, 1).unwrap()).unwrap();
    assert_eq!(&g, f);
}
