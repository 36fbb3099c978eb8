//! Exact LHV bounds by exhaustive enumeration of deterministic strategies.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{BellFunction, DeterministicStrategy};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LhvReport {
    pub bound: Rational,
    pub spectrum: Vec<Rational>,
    pub argmax_count: u64,
    pub strategies: u128,
    /// First maximizing strategy in odometer order.
    pub argmax: DeterministicStrategy,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LhvReportJson {
    pub bound: String,
    pub bound_decimal: f64,
    pub spectrum: Vec<String>,
    pub argmax_count: u64,
    pub strategies: String,
    pub argmax: Vec<[usize; 2]>,
}

impl LhvReport {
    pub fn to_json(&self) -> LhvReportJson {
        LhvReportJson {
            bound: rational::to_string(&self.bound),
            bound_decimal: rational::to_f64(&self.bound),
            spectrum: self.spectrum.iter().map(rational::to_string).collect(),
            argmax_count: self.argmax_count,
            strategies: self.strategies.to_string(),
            argmax: self.argmax.outcomes.clone(),
        }
    }
}

/// Integer tables W[s][t] = D·first_component(v_t∘ω_s) with a common denominator D.
pub struct ScaledTables {
    pub n: usize,
    pub d: usize,
    pub den: BigInt,
    pub w: Vec<i64>,
}

impl ScaledTables {
    pub fn new(f: &BellFunction) -> Result<Self> {
        let (n, d) = (f.n(), f.d());
        let vals: Vec<Rational> =
            f.coeffs().iter().flat_map(|c| (0..d).map(move |t| c.shift(t).first_component())).collect();
        let den = rational::common_denominator(&vals);
        let w = rational::scale_to_i64(&vals, &den)
            .filter(|w| {
                let m = w.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
                (m as u128) << n < i64::MAX as u128
            })
            .ok_or_else(|| Error::Invalid("coefficients too large for exact integer enumeration".into()))?;
        Ok(ScaledTables { n, d, den, w })
    }

    #[inline]
    fn at(&self, s: usize, t: usize) -> i64 {
        self.w[s * self.d + t]
    }

    fn to_rational(&self, v: i64) -> Rational {
        Rational::new(BigInt::from(v), self.den.clone())
    }
}

pub fn strategy_count(n: usize, d: usize) -> u128 {
    (d as u128).saturating_pow(2 * n as u32)
}

fn check_budget(n: usize, d: usize, budget: u128) -> Result<u128> {
    let needed = strategy_count(n, d);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(needed)
}

trait Acc: Default + Send {
    fn push(&mut self, v: i64, path: &[usize]);
    fn merge(self, later: Self) -> Self;
}

#[derive(Default)]
struct MaxAcc {
    max: Option<i64>,
    count: u64,
    arg: Vec<usize>,
}

impl Acc for MaxAcc {
    #[inline]
    fn push(&mut self, v: i64, path: &[usize]) {
        match self.max {
            Some(m) if v < m => {}
            Some(m) if v == m => self.count += 1,
            _ => {
                self.max = Some(v);
                self.count = 1;
                self.arg = path.to_vec();
            }
        }
    }

    fn merge(self, later: Self) -> Self {
        match (self.max, later.max) {
            (None, _) => later,
            (_, None) => self,
            (Some(a), Some(b)) if a > b => self,
            (Some(a), Some(b)) if a < b => later,
            _ => MaxAcc { count: self.count + later.count, ..self },
        }
    }
}

#[derive(Default)]
struct FullAcc {
    max: MaxAcc,
    values: BTreeSet<i64>,
}

impl Acc for FullAcc {
    #[inline]
    fn push(&mut self, v: i64, path: &[usize]) {
        self.max.push(v, path);
        self.values.insert(v);
    }

    fn merge(mut self, later: Self) -> Self {
        self.values.extend(later.values);
        FullAcc { max: self.max.merge(later.max), values: self.values }
    }
}

/// Depth-first enumeration; `path` holds (o0, o1) per assigned party.
fn descend<A: Acc>(t: &ScaledTables, p: usize, res: &[usize], path: &mut Vec<usize>, acc: &mut A) {
    let d = t.d;
    let n = t.n;
    if p == n - 1 {
        // Last party: value = A(o0) + B(o1).
        let mut a = vec![0i64; d];
        let mut b = vec![0i64; d];
        for (sp, &r) in res.iter().enumerate() {
            let s0 = sp << 1;
            for o in 0..d {
                let idx = (r + o) % d;
                a[o] += t.at(s0, idx);
                b[o] += t.at(s0 | 1, idx);
            }
        }
        for o0 in 0..d {
            for o1 in 0..d {
                path.push(o0);
                path.push(o1);
                acc.push(a[o0] + b[o1], path);
                path.truncate(path.len() - 2);
            }
        }
        return;
    }
    let mut next = vec![0usize; res.len() * 2];
    for o0 in 0..d {
        for o1 in 0..d {
            for (sp, &r) in res.iter().enumerate() {
                next[sp << 1] = (r + o0) % d;
                next[(sp << 1) | 1] = (r + o1) % d;
            }
            path.push(o0);
            path.push(o1);
            descend(t, p + 1, &next, path, acc);
            path.truncate(path.len() - 2);
        }
    }
}

fn run<A: Acc>(t: &ScaledTables) -> A {
    let d = t.d;
    if t.n == 1 {
        let mut acc = A::default();
        descend(t, 0, &[0], &mut Vec::new(), &mut acc);
        return acc;
    }
    (0..d * d)
        .into_par_iter()
        .map(|c| {
            let (o0, o1) = (c / d, c % d);
            let mut acc = A::default();
            let mut path = vec![o0, o1];
            descend(t, 1, &[o0, o1], &mut path, &mut acc);
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(A::default(), |a, b| a.merge(b))
}

fn to_strategy(path: &[usize]) -> DeterministicStrategy {
    DeterministicStrategy { outcomes: path.chunks(2).map(|c| [c[0], c[1]]).collect() }
}

/// Maximum, spectrum and argmax count over all d^(2n) deterministic strategies.
pub fn lhv_bound(f: &BellFunction, budget: u128) -> Result<LhvReport> {
    let strategies = check_budget(f.n(), f.d(), budget)?;
    let t = ScaledTables::new(f)?;
    let acc: FullAcc = run(&t);
    let max = acc.max.max.expect("at least one strategy");
    Ok(LhvReport {
        bound: t.to_rational(max),
        spectrum: acc.values.iter().map(|&v| t.to_rational(v)).collect(),
        argmax_count: acc.max.count,
        strategies,
        argmax: to_strategy(&acc.max.arg),
    })
}

/// The bound alone, skipping the spectrum bookkeeping.
pub fn lhv_max(f: &BellFunction, budget: u128) -> Result<Rational> {
    check_budget(f.n(), f.d(), budget)?;
    let t = ScaledTables::new(f)?;
    let acc: MaxAcc = run(&t);
    Ok(t.to_rational(acc.max.expect("at least one strategy")))
}

pub fn spectrum_matches(f: &BellFunction, target: &[Rational], budget: u128) -> Result<bool> {
    let mut want = target.to_vec();
    want.sort();
    want.dedup();
    Ok(!target.is_empty() && lhv_bound(f, budget)?.spectrum == want)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{cglmp, evaluate_deterministic};
    use crate::rational::{int, rat};

    /// Plain odometer over all strategies using the exact rational evaluator.
    fn brute(f: &BellFunction) -> (Rational, BTreeSet<Rational>, u64) {
        let (n, d) = (f.n(), f.d());
        let total = d.pow(2 * n as u32);
        let mut vals = BTreeSet::new();
        let mut best: Option<Rational> = None;
        let mut count = 0;
        for idx in 0..total {
            let mut x = idx;
            let mut digits = vec![0; 2 * n];
            for k in (0..2 * n).rev() {
                digits[k] = x % d;
                x /= d;
            }
            let v = evaluate_deterministic(f, &to_strategy(&digits)).unwrap();
            match &best {
                Some(b) if v < *b => {}
                Some(b) if v == *b => count += 1,
                _ => {
                    best = Some(v.clone());
                    count = 1;
                }
            }
            vals.insert(v);
        }
        (best.unwrap(), vals, count)
    }

    #[test]
    fn chsh_bound() {
        let r = lhv_bound(&cglmp(2).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.bound, int(1));
        assert_eq!(r.spectrum, vec![int(-1), int(1)]);
        assert_eq!(r.strategies, 16);
        assert!(spectrum_matches(&cglmp(2).unwrap(), &[int(1), int(-1)], DEFAULT_BUDGET).unwrap());
        assert!(!spectrum_matches(&cglmp(2).unwrap(), &[], DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn matches_brute_force() {
        for d in [2, 3, 5] {
            let f = cglmp(d).unwrap();
            let r = lhv_bound(&f, DEFAULT_BUDGET).unwrap();
            let (b, vals, count) = brute(&f);
            assert_eq!(r.bound, b);
            assert_eq!(r.spectrum, vals.into_iter().collect::<Vec<_>>());
            assert_eq!(r.argmax_count, count);
            assert_eq!(evaluate_deterministic(&f, &r.argmax).unwrap(), r.bound);
            assert_eq!(lhv_max(&f, DEFAULT_BUDGET).unwrap(), r.bound);
        }
    }

    #[test]
    fn cglmp5_spectrum() {
        let r = lhv_bound(&cglmp(5).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.spectrum, vec![rat(-3, 2), rat(-1, 4), int(1)]);
        let r = lhv_bound(&cglmp(7).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.spectrum, vec![rat(-4, 3), rat(-1, 6), int(1)]);
    }

    #[test]
    fn budget_guard() {
        let f = cglmp(3).unwrap();
        assert_eq!(lhv_bound(&f, 80), Err(Error::BudgetExceeded { needed: 81, budget: 80 }));
    }
}
