//! Orbits, canonical forms and equivalence decisions.

use std::collections::HashSet;

use rayon::prelude::*;

use super::{effective_group_order, group_order, invariant_certificate, IntContext, IntForm, Transformation};
use crate::bell::{setting_of, BellFunction};
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub size: usize,
    pub group_order: u128,
    pub stabilizer_order: u128,
    /// Orbit elements in BFS order, each with a transformation reaching it from f.
    pub elements: Option<Vec<(BellFunction, Transformation)>>,
}

fn generators(n: usize, d: usize) -> Vec<Transformation> {
    let mut gens = Vec::new();
    for p in 0..n {
        let mut g = Transformation::identity(n, d);
        g.swap[p] = true;
        gens.push(g);
        for i in 0..2 {
            let mut g = Transformation::identity(n, d);
            g.shift[p][i] = 1;
            gens.push(g);
        }
    }
    if n >= 2 {
        let mut t = Transformation::identity(n, d);
        t.perm.swap(0, 1);
        gens.push(t);
    }
    if n >= 3 {
        let mut c = Transformation::identity(n, d);
        c.perm = (0..n).map(|p| (p + 1) % n).collect();
        gens.push(c);
    }
    gens
}

/// Breadth-first closure of f under the generators, deduplicated by exact coefficients.
pub fn orbit(f: &BellFunction, budget: u128, keep_elements: bool) -> Result<OrbitReport> {
    let (n, d) = (f.n(), f.d());
    let ctx = IntContext::for_functions(&[f])?;
    let gens = generators(n, d);
    let start = ctx.encode(f)?;
    let mut seen: HashSet<IntForm> = HashSet::new();
    seen.insert(start.clone());
    let mut elements = vec![(start, Transformation::identity(n, d))];
    let mut frontier = 0..1;
    while !frontier.is_empty() {
        let ctx = &ctx;
        let images: Vec<(IntForm, Transformation)> = elements[frontier.clone()]
            .par_iter()
            .flat_map_iter(|(x, t)| gens.iter().map(move |g| (ctx.apply(g, x), g.compose(t))))
            .collect();
        let begin = elements.len();
        for (y, t) in images {
            if seen.insert(y.clone()) {
                elements.push((y, t));
                if elements.len() as u128 > budget {
                    return Err(Error::BudgetExceeded { needed: elements.len() as u128, budget });
                }
            }
        }
        frontier = begin..elements.len();
    }
    let order = group_order(n, d);
    let size = elements.len();
    debug_assert_eq!(order % size as u128, 0);
    Ok(OrbitReport {
        size,
        group_order: order,
        stabilizer_order: order / size as u128,
        elements: keep_elements.then(|| elements.into_iter().map(|(x, t)| (ctx.decode(&x), t)).collect()),
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

/// Every party permutation combined with every setting-swap pattern.
fn perm_swap_elements(n: usize, d: usize) -> Vec<Transformation> {
    let mut out = Vec::new();
    for perm in permutations(n) {
        for mask in 0..1usize << n {
            let swap = (0..n).map(|p| (mask >> p) & 1 == 1).collect();
            out.push(Transformation::new(perm.clone(), swap, vec![[0, 0]; n], d).expect("valid permutation"));
        }
    }
    out
}

/// Shift vectors with c_{p,0} = 0 for p ≥ 1: one representative per distinct action.
fn reduced_shift(idx: usize, n: usize, d: usize) -> Vec<[usize; 2]> {
    let mut x = idx;
    let mut next = || {
        let v = x % d;
        x /= d;
        v
    };
    let mut shift = vec![[0, 0]; n];
    shift[0] = [next(), next()];
    for s in shift.iter_mut().skip(1) {
        s[1] = next();
    }
    shift
}

fn shift_per_setting(shift: &[[usize; 2]], n: usize, d: usize, out: &mut [usize]) {
    for (s, o) in out.iter_mut().enumerate() {
        *o = (0..n).map(|p| shift[p][setting_of(s, p, n)]).sum::<usize>() % d;
    }
}

fn reduced_shift_count(n: usize, d: usize) -> usize {
    d.pow(n as u32 + 1)
}

fn check_effective(n: usize, d: usize, budget: u128) -> Result<()> {
    let needed = effective_group_order(n, d);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// Lexicographically least image over the whole group (settings in bitstring order, alpha in index order).
pub fn canonical_form(f: &BellFunction, budget: u128) -> Result<BellFunction> {
    Ok(canonical_with_witness(f, budget)?.0)
}

pub fn canonical_with_witness(f: &BellFunction, budget: u128) -> Result<(BellFunction, Transformation)> {
    let (n, d) = (f.n(), f.d());
    check_effective(n, d, budget)?;
    let ctx = IntContext::for_functions(&[f])?;
    let x = ctx.encode(f)?;
    let taus = perm_swap_elements(n, d);
    let best = taus
        .par_iter()
        .map(|tau| {
            let y = ctx.apply(tau, &x);
            let mut cs = vec![0usize; 1 << n];
            let mut best: Option<(Vec<i64>, usize)> = None;
            let mut cand = vec![0i64; y.data.len()];
            for idx in 0..reduced_shift_count(n, d) {
                let shift = reduced_shift(idx, n, d);
                shift_per_setting(&shift, n, d, &mut cs);
                // out[s][k] = y[s][k − c(s)]
                let mut state = std::cmp::Ordering::Equal;
                for s in 0..1 << n {
                    for k in 0..d {
                        let v = y.data[s * d + (k + d - cs[s]) % d];
                        cand[s * d + k] = v;
                        if state == std::cmp::Ordering::Equal {
                            if let Some((b, _)) = &best {
                                state = v.cmp(&b[s * d + k]);
                            } else {
                                state = std::cmp::Ordering::Less;
                            }
                        }
                    }
                    if state == std::cmp::Ordering::Greater {
                        break;
                    }
                }
                if state == std::cmp::Ordering::Less {
                    best = Some((cand.clone(), idx));
                }
            }
            let (b, idx) = best.expect("at least the identity shift");
            let h = Transformation::new((0..n).collect(), vec![false; n], reduced_shift(idx, n, d), d)
                .expect("valid transformation");
            (b, h.compose(tau))
        })
        .min_by(|a, b| a.0.cmp(&b.0))
        .expect("non-empty group");
    Ok((ctx.decode(&IntForm { data: best.0 }), best.1))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Equivalence {
    /// g = apply(witness, f).
    Equivalent(Transformation),
    Inequivalent(String),
    Unknown(String),
}

/// Decides whether g is an image of f under the group.
pub fn equivalent(f: &BellFunction, g: &BellFunction, budget: u128) -> Result<Equivalence> {
    if f.n() != g.n() || f.d() != g.d() {
        return Ok(Equivalence::Inequivalent("different (n, d)".into()));
    }
    if invariant_certificate(f) != invariant_certificate(g) {
        return Ok(Equivalence::Inequivalent("invariant certificates differ".into()));
    }
    let (n, d) = (f.n(), f.d());
    if effective_group_order(n, d) > budget {
        return Ok(Equivalence::Unknown(format!(
            "certificates agree and the group ({} actions) exceeds the budget {budget}",
            effective_group_order(n, d)
        )));
    }
    let ctx = IntContext::for_functions(&[f, g])?;
    let x = ctx.encode(f)?;
    let target = ctx.encode(g)?;
    let taus = perm_swap_elements(n, d);
    let found = taus.par_iter().find_map_first(|tau| {
        let y = ctx.apply(tau, &x);
        // Allowed shifts per setting as bitmasks.
        let mut masks = vec![0u64; 1 << n];
        for (s, m) in masks.iter_mut().enumerate() {
            for c in 0..d {
                if (0..d).all(|k| y.data[s * d + k] == target.data[s * d + (k + c) % d]) {
                    *m |= 1 << c;
                }
            }
            if *m == 0 {
                return None;
            }
        }
        let mut cs = vec![0usize; 1 << n];
        for idx in 0..reduced_shift_count(n, d) {
            let shift = reduced_shift(idx, n, d);
            shift_per_setting(&shift, n, d, &mut cs);
            if cs.iter().zip(&masks).all(|(&c, &m)| (m >> c) & 1 == 1) {
                let h = Transformation::new((0..n).collect(), vec![false; n], shift, d).expect("valid");
                return Some(h.compose(tau));
            }
        }
        None
    });
    Ok(match found {
        Some(t) => Equivalence::Equivalent(t),
        None => Equivalence::Inequivalent("exhaustive search over the group found no map".into()),
    })
}
