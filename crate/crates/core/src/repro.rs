//! The acceptance suite: thirteen numbered criteria, each a list of named checks.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{outcome_vector, Coefficient};
use crate::bell::{cglmp, iterate, restrict, restriction_from_seeds, BellFunction};
use crate::catalog::{check_printed_form, load_catalog, suspects, verify_recipes, Catalog};
use crate::error::Result;
use crate::lhv;
use crate::quantum::oracle::{coincidence_from_state, StateVector};
use crate::quantum::projector::verify_projector_identity;
use crate::quantum::{coincidence_probability, optimize_with_bound, OptimizeOptions, PhaseConfig, TWO_PI};
use crate::rational::{self, int, rat, Rational};
use crate::search::{run_search, verify_candidate, SearchConfig};
use crate::symmetry::orbit::{canonical_form, orbit, DEFAULT_BUDGET};
use crate::symmetry::invariant_certificate;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ReproOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Runs all four cells of the I_4_3_1 row of the five-party search grid instead of the first cell only.
    pub full_row: bool,
}

impl Default for ReproOptions {
    fn default() -> Self {
        ReproOptions { seed: 0, restarts: 64, full_row: false }
    }
}

impl ReproOptions {
    fn optimizer(&self) -> OptimizeOptions {
        OptimizeOptions { restarts: self.restarts, seed: self.seed, ..OptimizeOptions::default() }
    }
}

pub const TITLES: [&str; 13] = [
    "outcome algebra properties",
    "restriction of iterates",
    "MABK recovery",
    "CGLMP d = 3, 5, 7",
    "(3,2,3) functions",
    "(4,2,3) functions and search",
    "(5,2,3) functions",
    "(3,2,5) functions",
    "orbit counts",
    "spectra and (2,2,5), (2,2,7) candidates",
    "closed form vs state vector",
    "projector identity",
    "catalog recipes",
];

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn result(&mut self, name: &str, r: Result<(bool, String)>) {
        match r {
            Ok((ok, detail)) => self.push(name, ok, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

fn rand_coeff(d: usize, rng: &mut ChaCha8Rng) -> Coefficient {
    let raw = (0..d).map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=6))).collect();
    Coefficient::from_raw(raw).expect("d ≥ 2")
}

fn rand_function(n: usize, d: usize, rng: &mut ChaCha8Rng) -> BellFunction {
    BellFunction::new(n, d, (0..1 << n).map(|_| rand_coeff(d, rng)).collect()).expect("valid shape")
}

fn close(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn criterion_1(seed: u64, c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in [2usize, 3, 5, 7] {
        let mut ring = true;
        let mut gauge = true;
        let mut geometry: f64 = 0.0;
        for _ in 0..200 {
            let (x, y, z) = (rand_coeff(d, &mut rng), rand_coeff(d, &mut rng), rand_coeff(d, &mut rng));
            let xy = x.convolve(&y).unwrap();
            ring &= xy == y.convolve(&x).unwrap();
            ring &= xy.convolve(&z).unwrap() == x.convolve(&y.convolve(&z).unwrap()).unwrap();
            ring &= x.convolve(&y.add(&z).unwrap()).unwrap() == xy.add(&x.convolve(&z).unwrap()).unwrap();
            ring &= x.convolve(&Coefficient::basis(0, d).unwrap()).unwrap() == x;
            let t = rat(rng.gen_range(-9..=9), rng.gen_range(1..=5));
            let raw: Vec<Rational> = (0..d).map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=6))).collect();
            let lifted: Vec<Rational> = raw.iter().map(|a| a + &t).collect();
            gauge &= Coefficient::from_raw(raw).unwrap() == Coefficient::from_raw(lifted).unwrap();
            let cshift = rng.gen_range(0..d);
            let exact = rational::to_f64(&x.shift(cshift).first_component());
            let float: f64 = x
                .alpha()
                .iter()
                .enumerate()
                .map(|(k, a)| rational::to_f64(a) * outcome_vector((k + cshift) % d, d).unwrap().components[0])
                .sum();
            geometry = geometry.max((exact - float).abs());
        }
        c.push(format!("ring axioms d={d}"), ring, "200 random triples");
        c.push(format!("gauge d={d}"), gauge, "constant lift gives the same coefficient");
        c.push(format!("first component d={d}"), geometry < 1e-12, format!("max deviation {geometry:.2e}"));
    }
    let mut worst: f64 = 0.0;
    for d in 2..=11 {
        let vs: Vec<_> = (0..d).map(|k| outcome_vector(k, d).unwrap()).collect();
        for m in 0..d - 1 {
            worst = worst.max(vs.iter().map(|v| v.components[m]).sum::<f64>().abs());
        }
        for (j, a) in vs.iter().enumerate() {
            for (k, b) in vs.iter().enumerate() {
                let want = if j == k { 1.0 } else { -1.0 / (d - 1) as f64 };
                worst = worst.max((a.dot(b) - want).abs());
            }
        }
    }
    c.push("simplex identities d ≤ 11", worst < 1e-12, format!("max deviation {worst:.2e}"));
}

fn criterion_2(seed: u64, c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    for d in [3usize, 5, 7] {
        let mut round = true;
        let mut closed = true;
        for _ in 0..100 {
            let n = rng.gen_range(1..=2);
            let f00 = rand_function(n, d, &mut rng);
            let f01 = rand_function(n, d, &mut rng);
            let f = iterate(&f00, &f01).unwrap();
            round &= restrict(&f, 0, 0).unwrap() == f00 && restrict(&f, 0, 1).unwrap() == f01;
            for l in 0..d {
                closed &= restrict(&f, 0, l).unwrap() == restriction_from_seeds(&f00, &f01, l).unwrap();
            }
        }
        c.push(format!("round trip d={d}"), round, "100 random seed pairs");
        c.push(format!("I^{{0,l}} closed form d={d}"), closed, "all l on 100 random seed pairs");
    }
}

fn vc_check(
    c: &mut Checks,
    name: &str,
    f: &BellFunction,
    l_want: Option<&Rational>,
    nl_want: Option<f64>,
    vc_want: f64,
    vc_tol: f64,
    opts: &ReproOptions,
) {
    let r = (|| -> Result<(bool, String)> {
        let l = lhv::lhv_max(f, lhv::DEFAULT_BUDGET)?;
        let q = optimize_with_bound(f, &l, &opts.optimizer())?;
        let l_ok = l_want.map_or(true, |w| *w == l);
        let nl_ok = nl_want.map_or(true, |w| close(q.nl_psi, w, 1e-6));
        let vc_ok = q.violation && close(q.vc, vc_want, vc_tol);
        Ok((
            l_ok && nl_ok && vc_ok,
            format!("L = {}, NL = {:.7}, vc = {:.6} (want {vc_want} ± {vc_tol:.0e})", rational::to_string(&l), q.nl_psi, q.vc),
        ))
    })();
    c.result(name, r);
}

fn form_matches(c: &mut Checks, cat: &Catalog, id: &str) {
    let r = check_printed_form(cat, id, lhv::DEFAULT_BUDGET).map(|f| match f {
        Some(f) => (
            f.affine_match,
            match (&f.lambda, &f.equivalent_via) {
                (Some(l), _) => format!("scale {l}, printed bound maps to {}", f.mapped_bound.unwrap_or_default()),
                (None, Some(t)) => format!("no affine match; the printed form belongs to the image under {t}"),
                (None, None) => "no affine match".into(),
            },
        ),
        None => (false, "no printed form".into()),
    });
    c.result(&format!("{id} printed form"), r);
}

fn criterion_3(opts: &ReproOptions, c: &mut Checks) {
    let cat = load_catalog();
    for (n, id) in [(3, "MABK_3"), (4, "MABK_4")] {
        let f = cat.function(id).unwrap();
        let r = lhv::lhv_max(f, lhv::DEFAULT_BUDGET).map(|l| (l == int(1), format!("L = {}", rational::to_string(&l))));
        c.result(&format!("MABK n={n} exact bound"), r);
    }
    let want = 0.5f64;
    vc_check(c, "MABK n=3 vc", cat.function("MABK_3").unwrap(), Some(&int(1)), None, want, 1e-4, opts);
}

fn criterion_4(opts: &ReproOptions, c: &mut Checks) {
    let cat = load_catalog();
    form_matches(c, cat, "I_2_3");
    for (d, want, tol) in [(3, 0.6962, 2e-3), (5, 0.687157, 1e-4), (7, 0.683256, 1e-4)] {
        vc_check(c, &format!("I_2_{d}"), &cglmp(d).unwrap(), Some(&int(1)), None, want, tol, opts);
    }
}

fn criterion_5(opts: &ReproOptions, c: &mut Checks) {
    let cat = load_catalog();
    vc_check(c, "I_3_3_1", cat.function("I_3_3_1").unwrap(), Some(&int(1)), Some(5.0 / 3.0), 0.6, 1e-4, opts);
    form_matches(c, cat, "I_3_3_5");
}

fn scoring_function(cat: &Catalog, id: &str) -> (BellFunction, &'static str) {
    let e = cat.get(id).unwrap();
    if e.is_suspect() {
        (e.corrected_function().unwrap(), " (corrected entries)")
    } else {
        (e.function.clone(), "")
    }
}

fn criterion_6(opts: &ReproOptions, c: &mut Checks) {
    let cat = load_catalog();
    let ids = ["I_4_3_1", "I_4_3_2", "I_4_3_3", "I_4_3_4"];
    let mut canon = Vec::new();
    for id in ids {
        let (f, note) = scoring_function(cat, id);
        vc_check(c, &format!("{id}{note}"), &f, Some(&int(1)), Some(2.0), 0.5, 1e-4, opts);
        canon.push(canonical_form(&f, DEFAULT_BUDGET));
    }
    let r = (|| -> Result<(bool, String)> {
        let forms = canon.into_iter().collect::<Result<Vec<_>>>()?;
        let distinct = (0..4).all(|i| (0..i).all(|j| forms[i] != forms[j]));
        Ok((distinct, format!("{} distinct canonical forms of 4", if distinct { 4 } else { 0 })))
    })();
    c.result("I_4_3_1..4 pairwise inequivalent", r);
    let cfg = SearchConfig { seed: opts.seed, ..SearchConfig::new("I_3_3_3", "I_3_3_3", 3) };
    let r = run_search(&cfg).map(|s| {
        (
            s.orbit_size == 648 && s.dedup_winner_count == 16 && close(s.min_vc, 0.5, 1e-4),
            format!(
                "orbit {}, {} winners at vc = {:.6}, {} classes, {:.0} s",
                s.orbit_size,
                s.dedup_winner_count,
                s.min_vc,
                s.winner_classes.map_or("?".into(), |k| k.to_string()),
                s.wall_time_secs
            ),
        )
    });
    c.result("search I_3_3_3 x orbit(I_3_3_3)", r);
}

fn criterion_7(opts: &ReproOptions, c: &mut Checks) {
    let cat = load_catalog();
    for id in ["I_5_3_1", "I_5_3_2"] {
        let f = cat.function(id).unwrap();
        let r = verify_candidate(f, &[], 0.488756, 2e-4, &opts.optimizer(), lhv::DEFAULT_BUDGET).map(|rep| {
            (
                rep.lhv == "1" && rep.vc_ok,
                format!("L = {} from 3^10 strategies, vc = {:.6} (want 0.488756 ± 2e-4)", rep.lhv, rep.vc),
            )
        });
        c.result(id, r);
    }
    let a = invariant_certificate(cat.function("I_5_3_1").unwrap());
    let b = invariant_certificate(cat.function("I_5_3_2").unwrap());
    c.push("I_5_3_1 vs I_5_3_2 certificates", a != b, if a != b { "certificates differ" } else { "certificates agree" });
    let columns: &[&str] = if opts.full_row { &["I_4_3_1", "I_4_3_2", "I_4_3_3", "I_4_3_4"] } else { &["I_4_3_1"] };
    for col in columns {
        let cfg = SearchConfig { seed: opts.seed, ..SearchConfig::new("I_4_3_1", col, 3) };
        let r = run_search(&cfg).map(|s| {
            (
                s.dedup_winner_count == 12 && close(s.min_vc, 0.488756, 2e-4),
                format!(
                    "{} candidates, {} winners at vc = {:.6}, {:.0} s",
                    s.candidates_evaluated, s.dedup_winner_count, s.min_vc, s.wall_time_secs
                ),
            )
        });
        c.result(&format!("grid: I_4_3_1 x orbit({col})"), r);
    }
}

fn criterion_8(opts: &ReproOptions, c: &mut Checks) {
    let cat = load_catalog();
    vc_check(c, "I_3_5_1", cat.function("I_3_5_1").unwrap(), Some(&int(1)), None, 0.595047, 1e-4, opts);
    form_matches(c, cat, "I_3_5_1");
    let rep = verify_recipes(cat);
    for target in ["I_3_5_2", "I_3_5_3"] {
        for k in rep.checks.iter().filter(|k| k.target == target) {
            let detail = match (&k.result, &k.suspect) {
                (r, _) if r.is_match() => "exact".to_string(),
                (_, Some(why)) => format!("mismatch; listed as suspect: {why}"),
                (r, None) => format!("{r:?}"),
            };
            c.push(format!("{target} <- {} recipe", k.source), k.result.is_match(), detail);
        }
    }
}

fn criterion_9(c: &mut Checks) {
    let cat = load_catalog();
    for (id, want) in [("I_2_3", 54usize), ("I_3_3_1", 648), ("I_3_5_1", 1250)] {
        let r = orbit(cat.function(id).unwrap(), DEFAULT_BUDGET, false)
            .map(|o| (o.size == want, format!("{} elements (want {want}), stabilizer {}", o.size, o.stabilizer_order)));
        c.result(&format!("orbit of {id}"), r);
    }
}

fn spectrum(xs: &[(i64, i64)]) -> Vec<Rational> {
    xs.iter().map(|&(p, q)| rat(p, q)).collect()
}

fn criterion_10(opts: &ReproOptions, c: &mut Checks) {
    let cat = load_catalog();
    let s5 = spectrum(&[(-3, 2), (-1, 4), (1, 1)]);
    let s7 = spectrum(&[(-4, 3), (-1, 6), (1, 1)]);
    for (d, want) in [(5, &s5), (7, &s7)] {
        let r = lhv::lhv_bound(&cglmp(d).unwrap(), lhv::DEFAULT_BUDGET).map(|rep| {
            let got: Vec<String> = rep.spectrum.iter().map(rational::to_string).collect();
            (rep.spectrum == *want, format!("{{{}}}", got.join(", ")))
        });
        c.result(&format!("spectrum of I_2_{d}"), r);
    }
    for (id, want, vc) in [
        ("I_2_5_2", &s5, 0.687157),
        ("I_2_7_2", &s7, 0.683256),
        ("I_2_7_3", &s7, 0.683256),
        ("I_2_7_4", &s7, 0.683256),
    ] {
        let r = verify_candidate(cat.function(id).unwrap(), want, vc, 1e-4, &opts.optimizer(), lhv::DEFAULT_BUDGET)
            .map(|rep| (rep.passed, format!("spectrum {{{}}}, vc = {:.6}", rep.spectrum.join(", "), rep.vc)));
        c.result(&format!("{id} candidate"), r);
    }
}

fn criterion_11(seed: u64, c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(11));
    for (n, d) in [(2usize, 3usize), (3, 3), (2, 5), (3, 5), (2, 7)] {
        let ghz = StateVector::ghz(n, d);
        let mut agree: f64 = 0.0;
        let mut norm: f64 = 0.0;
        for _ in 0..1000 {
            let mut pc = PhaseConfig::zeros(n, d);
            pc.phases.iter_mut().for_each(|x| *x = rng.gen_range(0.0..TWO_PI));
            let s = rng.gen_range(0..1 << n);
            let oracle = coincidence_from_state(&ghz, &pc, s).unwrap();
            let closed: Vec<f64> = (0..d).map(|r| coincidence_probability(&pc, s, r)).collect();
            for (a, b) in oracle.iter().zip(&closed) {
                agree = agree.max((a - b).abs());
            }
            norm = norm.max((closed.iter().sum::<f64>() - 1.0).abs());
        }
        c.push(
            format!("(n, d) = ({n}, {d})"),
            agree < 1e-10 && norm < 1e-12,
            format!("max difference {agree:.1e}, normalization {norm:.1e}"),
        );
    }
}

fn criterion_12(seed: u64, c: &mut Checks) {
    for d in [2usize, 3, 5, 7] {
        let r = verify_projector_identity(d, 50, seed.wrapping_add(d as u64))
            .map(|rep| (rep.passed && rep.max_residual < 1e-10, format!("max residual {:.1e}", rep.max_residual)));
        c.result(&format!("d = {d}"), r);
    }
}

fn criterion_13(c: &mut Checks) {
    let cat = load_catalog();
    let rep = verify_recipes(cat);
    c.push(
        "printed recipes",
        rep.ok(),
        format!("{} verified, {} failed, {} listed as suspect", rep.passed, rep.failed, rep.suspect),
    );
    for k in rep.checks.iter().filter(|k| k.suspect.is_none() && !k.result.is_match()) {
        c.push(format!("{} <- {} ({})", k.target, k.source, k.location), false, format!("{:?}", k.result));
    }
    let listed = suspects(cat);
    c.push("suspect list", !listed.is_empty(), format!("{} transcription-suspect items", listed.len()));
}

/// Runs one criterion (1-based).
pub fn run_criterion(id: usize, opts: &ReproOptions) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks(Vec::new());
    match id {
        1 => criterion_1(opts.seed, &mut c),
        2 => criterion_2(opts.seed, &mut c),
        3 => criterion_3(opts, &mut c),
        4 => criterion_4(opts, &mut c),
        5 => criterion_5(opts, &mut c),
        6 => criterion_6(opts, &mut c),
        7 => criterion_7(opts, &mut c),
        8 => criterion_8(opts, &mut c),
        9 => criterion_9(&mut c),
        10 => criterion_10(opts, &mut c),
        11 => criterion_11(opts.seed, &mut c),
        12 => criterion_12(opts.seed, &mut c),
        13 => criterion_13(&mut c),
        _ => c.push("criterion id", false, format!("no criterion {id}")),
    }
    let checks = c.0;
    CriterionResult {
        id,
        title: TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown").into(),
        passed: !checks.is_empty() && checks.iter().all(|k| k.passed),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(opts: &ReproOptions) -> Vec<CriterionResult> {
    (1..=TITLES.len()).map(|id| run_criterion(id, opts)).collect()
}

/// One line per criterion, followed by the failing checks.
pub fn summary_line(r: &CriterionResult) -> String {
    let mut s = format!(
        "criterion {:>2} {} {} ({:.1} s)",
        r.id,
        if r.passed { "PASS" } else { "FAIL" },
        r.title,
        r.seconds
    );
    for k in r.checks.iter().filter(|k| !k.passed) {
        s.push_str(&format!("\n    failed: {}: {}", k.name, k.detail));
    }
    s
}

/// Table of every check.
pub fn format_table(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&summary_line(r));
        out.push('\n');
        for k in &r.checks {
            out.push_str(&format!("    [{}] {}: {}\n", if k.passed { "ok" } else { "XX" }, k.name, k.detail));
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
    out
}
