//! Full-correlated Bell functions, their probability forms, restriction and iteration.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use serde::{Deserialize, Serialize};

use crate::algebra::Coefficient;
use crate::error::{Error, Result};
use crate::rational::{self, int, rat, Rational};

/// Setting tuples are indexed by integers whose most significant of n bits is the first party.
pub fn setting_bits(index: usize, n: usize) -> String {
    (0..n).map(|p| if (index >> (n - 1 - p)) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_setting(bits: &str, n: usize) -> Result<usize> {
    if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::Parse(format!("setting {bits:?} is not a {n}-bit string")));
    }
    Ok(usize::from_str_radix(bits, 2).expect("binary digits"))
}

/// Setting of party `p` inside setting index `s`.
#[inline]
pub fn setting_of(s: usize, p: usize, n: usize) -> usize {
    (s >> (n - 1 - p)) & 1
}

pub fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|k| k * k <= d).all(|k| d % k != 0)
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BellFunction {
    n: usize,
    d: usize,
    coeffs: Vec<Coefficient>,
}

impl BellFunction {
    pub fn new(n: usize, d: usize, coeffs: Vec<Coefficient>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if n < 1 {
            return Err(Error::TooFewParties { need: 1, got: n });
        }
        if coeffs.len() != 1 << n {
            return Err(Error::ShapeMismatch(format!("{} coefficients for n = {n}", coeffs.len())));
        }
        if let Some(c) = coeffs.iter().find(|c| c.d() != d) {
            return Err(Error::DimensionMismatch(c.d(), d));
        }
        Ok(BellFunction { n, d, coeffs })
    }

    pub fn zero(n: usize, d: usize) -> Result<Self> {
        Self::new(n, d, vec![Coefficient::zero(d); 1 << n])
    }

    /// Builds from v-notation strings keyed by bitstrings; missing settings are zero.
    pub fn from_exprs<K: AsRef<str>, V: AsRef<str>>(n: usize, d: usize, terms: &[(K, V)]) -> Result<Self> {
        let mut coeffs = vec![Coefficient::zero(d); 1 << n];
        for (k, v) in terms {
            let s = parse_setting(k.as_ref(), n)?;
            coeffs[s] = coeffs[s].add(&Coefficient::parse_expr(v.as_ref(), d)?)?;
        }
        Self::new(n, d, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn coeff(&self, s: usize) -> &Coefficient {
        &self.coeffs[s]
    }

    fn same_shape(&self, other: &BellFunction) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::ShapeMismatch(format!(
                "(n,d) = ({},{}) vs ({},{})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &BellFunction) -> Result<BellFunction> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        BellFunction::new(self.n, self.d, coeffs)
    }

    pub fn scale(&self, c: &Rational) -> BellFunction {
        BellFunction { n: self.n, d: self.d, coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect() }
    }

    /// Multiplies every coefficient by a fixed ring element.
    pub fn convolve_all(&self, k: &Coefficient) -> Result<BellFunction> {
        let coeffs = self.coeffs.iter().map(|x| x.convolve(k)).collect::<Result<_>>()?;
        BellFunction::new(self.n, self.d, coeffs)
    }

    /// Swaps the two settings of every party.
    pub fn swap_all_settings(&self) -> BellFunction {
        let mask = (1 << self.n) - 1;
        let coeffs = (0..1 << self.n).map(|s| self.coeffs[s ^ mask].clone()).collect();
        BellFunction { n: self.n, d: self.d, coeffs }
    }

    /// Every distinct rational appearing in the alpha arrays.
    pub fn all_alpha(&self) -> impl Iterator<Item = &Rational> {
        self.coeffs.iter().flat_map(|c| c.alpha().iter())
    }

    pub fn to_json(&self) -> BellJson {
        BellJson {
            n: self.n,
            d: self.d,
            coeffs: (0..1 << self.n)
                .map(|s| (setting_bits(s, self.n), self.coeffs[s].to_strings()))
                .collect(),
        }
    }

    pub fn from_json(j: &BellJson) -> Result<Self> {
        let mut coeffs = vec![None; 1 << j.n];
        for (k, v) in &j.coeffs {
            let s = parse_setting(k, j.n)?;
            if v.len() != j.d {
                return Err(Error::ShapeMismatch(format!("setting {k}: {} entries for d = {}", v.len(), j.d)));
            }
            coeffs[s] = Some(Coefficient::from_strings(v)?);
        }
        let coeffs = coeffs
            .into_iter()
            .enumerate()
            .map(|(s, c)| c.ok_or_else(|| Error::ShapeMismatch(format!("missing setting {}", setting_bits(s, j.n)))))
            .collect::<Result<_>>()?;
        BellFunction::new(j.n, j.d, coeffs)
    }

    /// Human-readable listing in v-notation, one setting per line.
    pub fn pretty(&self) -> String {
        (0..1 << self.n)
            .map(|s| format!("{}: {}", setting_bits(s, self.n), self.coeffs[s]))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Bell-function JSON: {"n", "d", "coeffs": {"<bits>": ["p/q", …]}}.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BellJson {
    pub n: usize,
    pub d: usize,
    pub coeffs: BTreeMap<String, Vec<String>>,
}

impl Serialize for BellFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BellFunction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = BellJson::deserialize(de)?;
        BellFunction::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Σ_{s,r} w[s][r]·P(s = r) + constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbabilityForm {
    pub n: usize,
    pub d: usize,
    pub weights: Vec<Vec<Rational>>,
    pub constant: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbabilityFormJson {
    pub n: usize,
    pub d: usize,
    pub weights: BTreeMap<String, Vec<String>>,
    pub constant: String,
}

/// Coincidence probabilities P(s = r), exact or floating point.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable<T> {
    pub n: usize,
    pub d: usize,
    pub p: Vec<Vec<T>>,
}

impl ProbabilityTable<Rational> {
    pub fn uniform(n: usize, d: usize) -> Self {
        ProbabilityTable { n, d, p: vec![vec![rat(1, d as i64); d]; 1 << n] }
    }

    /// Table of a deterministic strategy: P(s = t_s) = 1.
    pub fn deterministic(strat: &DeterministicStrategy, d: usize) -> Self {
        let n = strat.outcomes.len();
        let p = (0..1 << n)
            .map(|s| {
                let mut row = vec![Rational::zero(); d];
                row[strat.residue(s, d)] = Rational::one();
                row
            })
            .collect();
        ProbabilityTable { n, d, p }
    }
}

impl ProbabilityForm {
    pub fn from_terms(n: usize, d: usize, terms: &[(usize, usize, Rational)], constant: Rational) -> Result<Self> {
        let mut weights = vec![vec![Rational::zero(); d]; 1 << n];
        for (s, r, w) in terms {
            if *s >= 1 << n || *r >= d {
                return Err(Error::ShapeMismatch(format!("term ({s},{r}) outside (n,d) = ({n},{d})")));
            }
            weights[*s][*r] += w;
        }
        Ok(ProbabilityForm { n, d, weights, constant })
    }

    fn check<T>(&self, t: &ProbabilityTable<T>) -> Result<()> {
        if t.n != self.n || t.d != self.d || t.p.len() != 1 << self.n || t.p.iter().any(|r| r.len() != self.d) {
            return Err(Error::ShapeMismatch("probability table does not match the form".into()));
        }
        Ok(())
    }

    pub fn evaluate(&self, t: &ProbabilityTable<Rational>) -> Result<Rational> {
        self.check(t)?;
        let mut acc = self.constant.clone();
        for (ws, ps) in self.weights.iter().zip(&t.p) {
            for (w, p) in ws.iter().zip(ps) {
                acc += w * p;
            }
        }
        Ok(acc)
    }

    pub fn evaluate_f64(&self, t: &ProbabilityTable<f64>) -> Result<f64> {
        self.check(t)?;
        let mut acc = rational::to_f64(&self.constant);
        for (ws, ps) in self.weights.iter().zip(&t.p) {
            for (w, p) in ws.iter().zip(ps) {
                acc += rational::to_f64(w) * p;
            }
        }
        Ok(acc)
    }

    pub fn weights_f64(&self) -> Vec<Vec<f64>> {
        self.weights.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect()
    }

    /// Per-setting mean-centred weights; on normalized tables the form equals these plus a constant.
    fn centred(&self) -> Vec<Vec<Rational>> {
        let d = int(self.d as i64);
        self.weights
            .iter()
            .map(|r| {
                let m = r.iter().sum::<Rational>() / &d;
                r.iter().map(|w| w - &m).collect()
            })
            .collect()
    }

    /// The Bell function g with self ≡ to_probability_form(g) + offset() on normalized tables.
    pub fn to_bell_function(&self) -> Result<BellFunction> {
        let d = self.d;
        let scale = rat(d as i64 - 1, d as i64);
        let coeffs = self
            .centred()
            .iter()
            .map(|w| Coefficient::from_raw((0..d).map(|k| &w[(d - k) % d] * &scale).collect()))
            .collect::<Result<Vec<_>>>()?;
        BellFunction::new(self.n, d, coeffs)
    }

    /// The value of the form on normalized tables is `centred·P + offset`.
    pub fn offset(&self) -> Rational {
        let d = int(self.d as i64);
        &self.constant + self.weights.iter().map(|r| r.iter().sum::<Rational>() / &d).sum::<Rational>()
    }

    /// Returns λ > 0 with self ≡ λ·other + const on normalized tables, if one exists.
    pub fn affine_ratio(&self, other: &ProbabilityForm) -> Option<Rational> {
        if self.n != other.n || self.d != other.d {
            return None;
        }
        let a = self.centred();
        let b = other.centred();
        let mut lambda: Option<Rational> = None;
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                match (x.is_zero(), y.is_zero()) {
                    (true, true) => {}
                    (false, false) => {
                        let q = x / y;
                        match &lambda {
                            None => lambda = Some(q),
                            Some(l) if *l == q => {}
                            Some(_) => return None,
                        }
                    }
                    _ => return None,
                }
            }
        }
        match lambda {
            Some(l) if l.is_positive() => Some(l),
            Some(_) => None,
            None => Some(Rational::one()),
        }
    }

    /// A bound L of `other` mapped to the normalization of `self`, given `self ≡ λ·other + c`.
    pub fn map_bound(&self, other: &ProbabilityForm, other_bound: &Rational) -> Option<Rational> {
        let l = self.affine_ratio(other)?;
        Some(&l * (other_bound - other.offset()) + self.offset())
    }

    pub fn to_json(&self) -> ProbabilityFormJson {
        ProbabilityFormJson {
            n: self.n,
            d: self.d,
            weights: (0..1 << self.n)
                .map(|s| (setting_bits(s, self.n), self.weights[s].iter().map(rational::to_string).collect()))
                .collect(),
            constant: rational::to_string(&self.constant),
        }
    }

    pub fn from_json(j: &ProbabilityFormJson) -> Result<Self> {
        let mut weights = vec![vec![Rational::zero(); j.d]; 1 << j.n];
        for (k, v) in &j.weights {
            let s = parse_setting(k, j.n)?;
            if v.len() != j.d {
                return Err(Error::ShapeMismatch(format!("setting {k}: {} weights for d = {}", v.len(), j.d)));
            }
            weights[s] = v.iter().map(|x| rational::parse(x)).collect::<Result<_>>()?;
        }
        Ok(ProbabilityForm { n: j.n, d: j.d, weights, constant: rational::parse(&j.constant)? })
    }
}

/// weights[s][r] = (d·α_{s,−r} − Σα_s)/(d−1), constant 0.
pub fn to_probability_form(f: &BellFunction) -> ProbabilityForm {
    let d = f.d;
    let dd = int(d as i64);
    let dm1 = int(d as i64 - 1);
    let weights = f
        .coeffs
        .iter()
        .map(|c| {
            let a = c.alpha();
            let sum: Rational = a.iter().sum();
            (0..d).map(|r| (&dd * &a[(d - r) % d] - &sum) / &dm1).collect()
        })
        .collect();
    ProbabilityForm { n: f.n, d, weights, constant: Rational::zero() }
}

/// Outcome of every (party, setting) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub outcomes: Vec<[usize; 2]>,
}

impl DeterministicStrategy {
    /// Σ_parties outcome mod d for setting index s.
    pub fn residue(&self, s: usize, d: usize) -> usize {
        let n = self.outcomes.len();
        self.outcomes.iter().enumerate().map(|(p, o)| o[setting_of(s, p, n)]).sum::<usize>() % d
    }
}

pub fn evaluate_deterministic(f: &BellFunction, strat: &DeterministicStrategy) -> Result<Rational> {
    if strat.outcomes.len() != f.n {
        return Err(Error::ShapeMismatch(format!("strategy for {} parties, function has {}", strat.outcomes.len(), f.n)));
    }
    if strat.outcomes.iter().flatten().any(|&o| o >= f.d) {
        return Err(Error::Invalid("strategy outcome outside Z_d".into()));
    }
    Ok((0..1 << f.n).map(|s| f.coeffs[s].shift(strat.residue(s, f.d)).first_component()).sum())
}

/// ω'_s = v_{k0}∘ω_{s,0} + v_{k1}∘ω_{s,1}, removing the last party.
pub fn restrict(f: &BellFunction, k0: usize, k1: usize) -> Result<BellFunction> {
    if f.n < 2 {
        return Err(Error::TooFewParties { need: 2, got: f.n });
    }
    for k in [k0, k1] {
        if k >= f.d {
            return Err(Error::IndexOutOfRange { index: k, d: f.d });
        }
    }
    let coeffs = (0..1 << (f.n - 1))
        .map(|s| f.coeffs[s << 1].shift(k0).add(&f.coeffs[(s << 1) | 1].shift(k1)))
        .collect::<Result<_>>()?;
    BellFunction::new(f.n - 1, f.d, coeffs)
}

/// I^{0,l} of an iterate in terms of its two seeds: f00 + (v_0 + ⋯ + v_{l−1})∘(f01 − f00).
pub fn restriction_from_seeds(f00: &BellFunction, f01: &BellFunction, l: usize) -> Result<BellFunction> {
    if f00.n != f01.n || f00.d != f01.d {
        return Err(Error::ShapeMismatch("seeds differ in (n, d)".into()));
    }
    if l >= f00.d {
        return Err(Error::IndexOutOfRange { index: l, d: f00.d });
    }
    let mut raw = vec![Rational::zero(); f00.d];
    raw.iter_mut().take(l).for_each(|x| *x = int(1));
    let ramp = Coefficient::from_raw(raw)?;
    f01.add(&f00.scale(&int(-1)))?.convolve_all(&ramp)?.add(f00)
}

/// The four fixed ring elements of the iteration formula, in the order K00, K01, K10, K11.
pub fn iteration_kernel(d: usize) -> Result<[Coefficient; 4]> {
    let mut dk = vec![Rational::zero(); d];
    let mut k = vec![Rational::zero(); d];
    for i in 1..d {
        dk[i] = int((d - i) as i64);
        k[i] = int(i as i64);
    }
    let inv = rat(1, d as i64);
    let sum_dk = Coefficient::from_raw(dk)?;
    let sum_k = Coefficient::from_raw(k)?;
    Ok([sum_dk.scale(&-&inv), sum_k.scale(&-&inv), sum_k.scale(&-&inv), sum_k.scale(&inv)])
}

/// Builds the n-party function whose (0,0) and (0,1) restrictions are f00 and f01 (prime d).
pub fn iterate(f00: &BellFunction, f01: &BellFunction) -> Result<BellFunction> {
    f00.same_shape(f01)?;
    let d = f00.d;
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    let [k00, k01, k10, k11] = iteration_kernel(d)?;
    let n = f00.n + 1;
    let mut coeffs = vec![Coefficient::zero(d); 1 << n];
    for s in 0..1 << f00.n {
        let a = &f00.coeffs[s];
        let b = &f01.coeffs[s];
        coeffs[s << 1] = a.convolve(&k00)?.add(&b.convolve(&k01)?)?;
        coeffs[(s << 1) | 1] = a.convolve(&k10)?.add(&b.convolve(&k11)?)?;
    }
    BellFunction::new(n, d, coeffs)
}

/// MABK_n from I_{2,2} by repeated d = 2 iteration, with f01 = f00 under a global setting swap.
pub fn mabk(n: usize, chsh: &BellFunction) -> Result<BellFunction> {
    if chsh.n != 2 || chsh.d != 2 {
        return Err(Error::ShapeMismatch("MABK iteration starts from a (2,2,2) function".into()));
    }
    if n < 2 {
        return Err(Error::TooFewParties { need: 2, got: n });
    }
    let mut f = chsh.clone();
    while f.n < n {
        f = iterate(&f, &f.swap_all_settings())?;
    }
    Ok(f)
}

/// CGLMP-type I_{2,d}: (1/d)[−Σk v_{d−k} A0B0 − Σk v_k (A0B1 + A1B0) + Σk v_k A1B1].
pub fn cglmp(d: usize) -> Result<BellFunction> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let mut a = vec![Rational::zero(); d];
    let mut b = vec![Rational::zero(); d];
    for k in 1..d {
        a[d - k] = rat(-(k as i64), d as i64);
        b[k] = rat(k as i64, d as i64);
    }
    let a = Coefficient::from_raw(a)?;
    let b = Coefficient::from_raw(b)?;
    BellFunction::new(2, d, vec![a, b.neg(), b.neg(), b])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chsh() -> BellFunction {
        BellFunction::from_exprs(2, 2, &[("00", "-v1/2"), ("01", "-v1/2"), ("10", "-v1/2"), ("11", "v1/2")]).unwrap()
    }

    #[test]
    fn form_to_function_round_trip() {
        for f in [chsh(), cglmp(3).unwrap(), cglmp(5).unwrap()] {
            let mut form = to_probability_form(&f);
            form.constant = rat(2, 3);
            form.weights[1][0] += rat(1, 2);
            form.weights[1].iter_mut().for_each(|w| *w -= rat(1, 4));
            let g = form.to_bell_function().unwrap();
            assert_eq!(to_probability_form(&g).affine_ratio(&form), Some(Rational::one()));
            assert_eq!(form.to_bell_function().unwrap(), form.clone().to_bell_function().unwrap());
        }
        assert_eq!(to_probability_form(&chsh()).to_bell_function().unwrap(), chsh());
    }

    #[test]
    fn bits() {
        assert_eq!(setting_bits(5, 4), "0101");
        assert_eq!(parse_setting("0101", 4).unwrap(), 5);
        assert_eq!(setting_of(0b100, 0, 3), 1);
        assert!(parse_setting("012", 3).is_err());
    }

    #[test]
    fn chsh_probability_form() {
        let pf = to_probability_form(&chsh());
        for s in 0..4 {
            let sign = if s == 3 { -1 } else { 1 };
            assert_eq!(pf.weights[s], vec![rat(sign, 2), rat(-sign, 2)]);
        }
        let zero = to_probability_form(&BellFunction::zero(3, 5).unwrap());
        assert!(zero.weights.iter().flatten().all(Zero::is_zero));
    }

    #[test]
    fn evaluate_examples() {
        let pf = to_probability_form(&chsh());
        assert_eq!(pf.evaluate(&ProbabilityTable::uniform(2, 2)).unwrap(), int(0));
        let strat = DeterministicStrategy { outcomes: vec![[0, 0], [0, 0]] };
        assert_eq!(pf.evaluate(&ProbabilityTable::deterministic(&strat, 2)).unwrap(), int(1));
        assert_eq!(evaluate_deterministic(&chsh(), &strat).unwrap(), int(1));
        let c = ProbabilityForm { constant: rat(7, 3), ..to_probability_form(&BellFunction::zero(2, 3).unwrap()) };
        assert_eq!(c.evaluate(&ProbabilityTable::uniform(2, 3)).unwrap(), rat(7, 3));
    }

    #[test]
    fn iterate_rejects_composite() {
        let f = BellFunction::zero(2, 4).unwrap();
        assert_eq!(iterate(&f, &f), Err(Error::NotPrime(4)));
    }

    #[test]
    fn restrict_shape() {
        let f = cglmp(3).unwrap();
        let r = restrict(&f, 1, 2).unwrap();
        assert_eq!((r.n(), r.d()), (1, 3));
        assert!(restrict(&r, 0, 0).is_err());
    }

    #[test]
    fn iterate_round_trip_d2() {
        let f0 = chsh();
        let f1 = f0.swap_all_settings();
        let g = iterate(&f0, &f1).unwrap();
        assert_eq!(restrict(&g, 0, 0).unwrap(), f0);
        assert_eq!(restrict(&g, 0, 1).unwrap(), f1);
    }

    #[test]
    fn cglmp_d2_is_chsh() {
        assert_eq!(cglmp(2).unwrap(), chsh());
    }

    #[test]
    fn affine_ratio_detects_scaling() {
        let pf = to_probability_form(&cglmp(3).unwrap());
        let mut other = pf.clone();
        for row in other.weights.iter_mut() {
            for w in row.iter_mut() {
                *w = &*w * rat(3, 2) + rat(1, 5);
            }
        }
        other.constant = rat(4, 1);
        assert_eq!(other.affine_ratio(&pf), Some(rat(3, 2)));
        let neg = ProbabilityForm { weights: pf.weights.iter().map(|r| r.iter().map(|w| -w).collect()).collect(), ..pf.clone() };
        assert_eq!(neg.affine_ratio(&pf), None);
        assert_eq!(other.map_bound(&pf, &int(1)), Some(other.evaluate(&ProbabilityTable::uniform(2, 3)).unwrap() + rat(3, 2)));
    }

    #[test]
    fn json_round_trip() {
        let f = cglmp(5).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: BellFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        let raw = r#"{"n":1,"d":3,"coeffs":{"0":["1","1","2"],"1":["0","0","0"]}}"#;
        let h: BellFunction = serde_json::from_str(raw).unwrap();
        assert_eq!(h.coeff(0), &Coefficient::basis(2, 3).unwrap().scale(&int(1)));
    }
}
