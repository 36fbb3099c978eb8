//! Iteration search: fix I^{0,0}, sweep I^{0,1} over an orbit, score every
//! iterate by critical visibility and keep the minimal-vc set.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{is_prime, iterate, BellFunction};
use crate::catalog::load_catalog;
use crate::error::{Error, Result};
use crate::lhv;
use crate::quantum::{optimize_with_bound, OptimizeOptions};
use crate::rational::{self, Rational};
use crate::symmetry::{effective_group_order, orbit::canonical_form, orbit::orbit, IntContext};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub seed00: String,
    pub orbit_source: String,
    pub d: usize,
    /// Restarts per candidate in the screening pass.
    pub restarts: usize,
    /// Restarts for candidates inside the refinement window.
    pub refine_restarts: usize,
    /// Screening vc above min + window is not refined.
    pub refine_window: f64,
    pub tol: f64,
    pub max_evals: usize,
    pub seed: u64,
    pub vc_tie_tolerance: f64,
    pub orbit_budget: u128,
    pub lhv_budget: u128,
    /// Winners are grouped by canonical form when the group fits this budget.
    pub class_budget: u128,
}

impl SearchConfig {
    pub fn new(seed00: &str, orbit_source: &str, d: usize) -> Self {
        SearchConfig {
            seed00: seed00.into(),
            orbit_source: orbit_source.into(),
            d,
            restarts: 16,
            refine_restarts: 64,
            refine_window: 0.02,
            tol: 1e-9,
            max_evals: 20_000,
            seed: 0,
            vc_tie_tolerance: 1e-6,
            orbit_budget: 1_000_000,
            lhv_budget: 1 << 32,
            class_budget: 10_000_000,
        }
    }

    fn options(&self, restarts: usize, index: usize) -> OptimizeOptions {
        OptimizeOptions {
            restarts,
            tol: self.tol,
            seed: self.seed.wrapping_add(index as u64),
            max_evals: self.max_evals,
            ..OptimizeOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Winner {
    /// Position of I^{0,1} in the orbit enumeration.
    pub index: usize,
    /// Transformation taking the orbit source to I^{0,1}.
    pub recipe: String,
    pub function: BellFunction,
    pub vc: f64,
    pub lhv: String,
    pub nl_psi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    /// Lowest vc in the cluster.
    pub vc: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub config: SearchConfig,
    pub orbit_size: usize,
    pub candidates_evaluated: usize,
    pub refined: usize,
    /// Candidates with no violation of their own LHV bound.
    pub non_violating: usize,
    pub min_vc: f64,
    pub winners: Vec<Winner>,
    pub raw_winner_count: usize,
    pub dedup_winner_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winner_classes: Option<usize>,
    /// Final vc values clustered at the tie tolerance, lowest first.
    pub histogram: Vec<HistogramBin>,
    pub wall_time_secs: f64,
}

impl PartialEq for SearchResult {
    /// Equality ignores wall time.
    fn eq(&self, o: &Self) -> bool {
        self.config == o.config
            && self.orbit_size == o.orbit_size
            && self.candidates_evaluated == o.candidates_evaluated
            && self.refined == o.refined
            && self.non_violating == o.non_violating
            && self.min_vc == o.min_vc
            && self.winners == o.winners
            && self.raw_winner_count == o.raw_winner_count
            && self.dedup_winner_count == o.dedup_winner_count
            && self.winner_classes == o.winner_classes
            && self.histogram == o.histogram
    }
}

struct Scored {
    function: BellFunction,
    lhv: Rational,
    vc: f64,
    nl_psi: f64,
}

fn score(f: BellFunction, lhv: Option<Rational>, cfg: &SearchConfig, restarts: usize, index: usize) -> Result<Scored> {
    let lhv = match lhv {
        Some(l) => l,
        None => lhv::lhv_max(&f, cfg.lhv_budget)?,
    };
    let q = optimize_with_bound(&f, &lhv, &cfg.options(restarts, index))?;
    let vc = if q.violation { q.vc } else { f64::INFINITY };
    Ok(Scored { function: f, lhv, vc, nl_psi: q.nl_psi })
}

fn histogram(sorted: &[f64], tie: f64) -> Vec<HistogramBin> {
    let mut out: Vec<HistogramBin> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &v in sorted.iter().filter(|v| v.is_finite()) {
        match out.last_mut() {
            Some(b) if v - last <= tie => b.count += 1,
            _ => out.push(HistogramBin { vc: v, count: 1 }),
        }
        last = v;
    }
    out
}

/// Runs the sweep. Per-candidate seeds are `seed + index`, so the result does not
/// depend on the thread count.
pub fn run_search(cfg: &SearchConfig) -> Result<SearchResult> {
    let start = Instant::now();
    if !is_prime(cfg.d) {
        return Err(Error::NotPrime(cfg.d));
    }
    if !(cfg.vc_tie_tolerance > 0.0) {
        return Err(Error::Invalid("tie tolerance must be positive".into()));
    }
    if cfg.restarts == 0 || cfg.refine_restarts == 0 {
        return Err(Error::Invalid("restarts must be at least 1".into()));
    }
    let cat = load_catalog();
    let f00 = cat.get(&cfg.seed00)?.corrected_function()?;
    let src = cat.get(&cfg.orbit_source)?.corrected_function()?;
    for f in [&f00, &src] {
        if f.d() != cfg.d {
            return Err(Error::DimensionMismatch(f.d(), cfg.d));
        }
    }
    let orb = orbit(&src, cfg.orbit_budget, true)?;
    let elements = orb.elements.expect("elements kept");

    let mut scored: Vec<(usize, Scored)> = elements
        .par_iter()
        .enumerate()
        .map(|(i, (g, _))| Ok((i, score(iterate(&f00, g)?, None, cfg, cfg.restarts, i)?)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| a.1.vc.total_cmp(&b.1.vc).then(a.0.cmp(&b.0)));

    let screen_min = scored.first().map_or(f64::INFINITY, |s| s.1.vc);
    let window = scored.iter().take_while(|s| s.1.vc <= screen_min + cfg.refine_window).count();
    let refined: Vec<(usize, Scored)> = scored[..window]
        .par_iter()
        .map(|(i, s)| {
            let r = score(s.function.clone(), Some(s.lhv.clone()), cfg, cfg.refine_restarts, *i)?;
            // Keep the better of the two optimizations.
            let best = if r.vc <= s.vc { r } else { Scored { vc: s.vc, nl_psi: s.nl_psi, ..r } };
            Ok((*i, best))
        })
        .collect::<Result<_>>()?;
    scored.splice(..window, refined);
    scored.sort_by(|a, b| a.1.vc.total_cmp(&b.1.vc).then(a.0.cmp(&b.0)));

    let min_vc = scored.first().map_or(f64::INFINITY, |s| s.1.vc);
    let mut winners: Vec<Winner> = scored
        .iter()
        .take_while(|s| s.1.vc.is_finite() && s.1.vc <= min_vc + cfg.vc_tie_tolerance)
        .map(|(i, s)| Winner {
            index: *i,
            recipe: elements[*i].1.to_recipe(),
            function: s.function.clone(),
            vc: s.vc,
            lhv: rational::to_string(&s.lhv),
            nl_psi: s.nl_psi,
        })
        .collect();
    winners.sort_by_key(|w| w.index);
    let raw_winner_count = winners.len();
    if !winners.is_empty() {
        let mut seen = HashSet::new();
        let ctx = IntContext::for_functions(&winners.iter().map(|w| &w.function).collect::<Vec<_>>())?;
        winners.retain(|w| seen.insert(ctx.encode(&w.function).expect("encodable")));
    }

    let n = f00.n() + 1;
    let winner_classes = if !winners.is_empty() && effective_group_order(n, cfg.d) <= cfg.class_budget {
        let forms: Vec<BellFunction> =
            winners.par_iter().map(|w| canonical_form(&w.function, cfg.class_budget)).collect::<Result<_>>()?;
        let mut distinct: Vec<&BellFunction> = Vec::new();
        for f in &forms {
            if !distinct.contains(&f) {
                distinct.push(f);
            }
        }
        Some(distinct.len())
    } else {
        None
    };

    let vcs: Vec<f64> = scored.iter().map(|s| s.1.vc).collect();
    Ok(SearchResult {
        config: cfg.clone(),
        orbit_size: elements.len(),
        candidates_evaluated: scored.len(),
        refined: window,
        non_violating: vcs.iter().filter(|v| !v.is_finite()).count(),
        min_vc,
        dedup_winner_count: winners.len(),
        winners,
        raw_winner_count,
        winner_classes,
        histogram: histogram(&vcs, cfg.vc_tie_tolerance),
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateReport {
    pub lhv: String,
    pub lhv_decimal: f64,
    pub spectrum: Vec<String>,
    pub expected_spectrum: Vec<String>,
    pub spectrum_ok: bool,
    pub nl_psi: f64,
    pub vc: f64,
    pub expected_vc: f64,
    pub vc_ok: bool,
    pub passed: bool,
}

/// Exact spectrum comparison and vc agreement within `tol`.
pub fn verify_candidate(
    f: &BellFunction,
    expected_spectrum: &[Rational],
    expected_vc: f64,
    tol: f64,
    opts: &OptimizeOptions,
    lhv_budget: u128,
) -> Result<CandidateReport> {
    let rep = lhv::lhv_bound(f, lhv_budget)?;
    let q = optimize_with_bound(f, &rep.bound, opts)?;
    let spectrum_ok = rep.spectrum == expected_spectrum;
    let vc_ok = q.violation && (q.vc - expected_vc).abs() <= tol;
    Ok(CandidateReport {
        lhv: rational::to_string(&rep.bound),
        lhv_decimal: rational::to_f64(&rep.bound),
        spectrum: rep.spectrum.iter().map(rational::to_string).collect(),
        expected_spectrum: expected_spectrum.iter().map(rational::to_string).collect(),
        spectrum_ok,
        nl_psi: q.nl_psi,
        vc: q.vc,
        expected_vc,
        vc_ok,
        passed: spectrum_ok && vc_ok,
    })
}
