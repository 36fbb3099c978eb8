//! Outcome vectors v_k and the coefficient ring they span.
//!
//! A [`Coefficient`] is an element of R[Z_d] modulo the relation Σ_k v_k = 0,
//! stored as exact rationals in mean-zero gauge so that equality is decidable.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};

/// Vertex k of the regular simplex in d−1 dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeVector {
    pub d: usize,
    pub components: Vec<f64>,
}

impl OutcomeVector {
    pub fn dot(&self, other: &OutcomeVector) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

pub fn outcome_vector(k: usize, d: usize) -> Result<OutcomeVector> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if k >= d {
        return Err(Error::IndexOutOfRange { index: k, d });
    }
    let nn = (d - 1) as f64;
    let components = (0..d - 1)
        .map(|m| {
            let mf = m as f64;
            if m < k {
                -(1.0 / nn) * ((nn + 1.0) * nn / ((nn - mf + 1.0) * (nn - mf))).sqrt()
            } else if m == k {
                (1.0 / nn) * ((nn + 1.0) * nn * (nn - mf) / (nn - mf + 1.0)).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(OutcomeVector { d, components })
}

/// v_a ∘ v_b = v_{(a+b) mod d}.
pub fn compose(a: usize, b: usize, d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    for x in [a, b] {
        if x >= d {
            return Err(Error::IndexOutOfRange { index: x, d });
        }
    }
    Ok((a + b) % d)
}

/// ω = Σ_k α_k v_k with Σ_k α_k = 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coefficient {
    alpha: Vec<Rational>,
}

impl Coefficient {
    /// Canonicalizes a raw alpha array given in any gauge.
    pub fn from_raw(raw: Vec<Rational>) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::DimensionTooSmall(raw.len()));
        }
        let d = raw.len();
        let mean: Rational = raw.iter().sum::<Rational>() / int(d as i64);
        let alpha = raw.into_iter().map(|a| a - &mean).collect();
        Ok(Coefficient { alpha })
    }

    pub fn from_i64(raw: &[i64], den: i64) -> Result<Self> {
        Self::from_raw(raw.iter().map(|&a| rational::rat(a, den)).collect())
    }

    pub fn zero(d: usize) -> Self {
        Coefficient { alpha: vec![Rational::zero(); d] }
    }

    /// The basis element v_k.
    pub fn basis(k: usize, d: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::IndexOutOfRange { index: k, d });
        }
        let mut raw = vec![Rational::zero(); d];
        raw[k] = Rational::one();
        Self::from_raw(raw)
    }

    pub fn d(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Rational] {
        &self.alpha
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Coefficient) -> Result<()> {
        if self.d() != other.d() {
            return Err(Error::DimensionMismatch(self.d(), other.d()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Coefficient) -> Result<Coefficient> {
        self.check(other)?;
        Ok(Coefficient { alpha: self.alpha.iter().zip(&other.alpha).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Coefficient) -> Result<Coefficient> {
        self.check(other)?;
        Ok(Coefficient { alpha: self.alpha.iter().zip(&other.alpha).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, c: &Rational) -> Coefficient {
        Coefficient { alpha: self.alpha.iter().map(|a| a * c).collect() }
    }

    pub fn neg(&self) -> Coefficient {
        Coefficient { alpha: self.alpha.iter().map(|a| -a).collect() }
    }

    /// Cyclic convolution z_m = Σ_{k+j≡m} x_k y_j, re-gauged.
    pub fn convolve(&self, other: &Coefficient) -> Result<Coefficient> {
        self.check(other)?;
        let d = self.d();
        let mut z = vec![Rational::zero(); d];
        for (k, x) in self.alpha.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in other.alpha.iter().enumerate() {
                if !y.is_zero() {
                    z[(k + j) % d] += x * y;
                }
            }
        }
        Coefficient::from_raw(z)
    }

    /// v_c ∘ x: α'_{k+c} = α_k.
    pub fn shift(&self, c: usize) -> Coefficient {
        let d = self.d();
        let c = c % d;
        let mut alpha = vec![Rational::zero(); d];
        for (k, a) in self.alpha.iter().enumerate() {
            alpha[(k + c) % d] = a.clone();
        }
        Coefficient { alpha }
    }

    /// First component of Σ α_k v_k, i.e. d·α_0/(d−1) in mean-zero gauge.
    pub fn first_component(&self) -> Rational {
        let d = self.d() as i64;
        let f_other = rational::rat(-1, d - 1);
        self.alpha
            .iter()
            .enumerate()
            .map(|(k, a)| if k == 0 { a.clone() } else { a * &f_other })
            .sum()
    }

    /// Geometric vector Σ α_k v_k.
    pub fn to_vector(&self) -> Vec<f64> {
        let d = self.d();
        let mut out = vec![0.0; d - 1];
        for (k, a) in self.alpha.iter().enumerate() {
            let v = outcome_vector(k, d).expect("k < d");
            let af = rational::to_f64(a);
            for (o, c) in out.iter_mut().zip(&v.components) {
                *o += af * c;
            }
        }
        out
    }

    /// Lexicographically least cyclic rotation of the alpha array.
    pub fn rotation_class(&self) -> Vec<Rational> {
        (0..self.d()).map(|c| self.shift(c).alpha).min().expect("d ≥ 2")
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.alpha.iter().map(rational::to_string).collect()
    }

    pub fn from_strings<S: AsRef<str>>(xs: &[S]) -> Result<Coefficient> {
        let raw = xs.iter().map(|s| rational::parse(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Coefficient::from_raw(raw)
    }

    /// Parses the v-notation used in printed formulas, e.g. "(-4v1+v2)/9", "2v0/3", "-v_1-2v_2", "0".
    pub fn parse_expr(s: &str, d: usize) -> Result<Coefficient> {
        let raw = VExprParser::new(s, d).parse()?;
        Coefficient::from_raw(raw)
    }

    /// Renders in v-notation with the smallest-support gauge where α has a zero entry.
    pub fn to_expr(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        // Choose the gauge that zeroes the most frequent entry.
        let mut best = self.alpha[0].clone();
        let mut best_count = 0;
        for a in &self.alpha {
            let c = self.alpha.iter().filter(|b| *b == a).count();
            if c > best_count {
                best_count = c;
                best = a.clone();
            }
        }
        let raw: Vec<Rational> = self.alpha.iter().map(|a| a - &best).collect();
        let den = rational::common_denominator(&raw);
        let mut out = String::new();
        for (k, a) in raw.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let c = (a * Rational::from_integer(den.clone())).to_integer();
            let sign = if c.is_negative() { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = c.abs();
            if mag.is_one() {
                out.push_str(&format!("{sign}v{k}"));
            } else {
                out.push_str(&format!("{sign}{mag}v{k}"));
            }
        }
        if den.is_one() {
            out
        } else {
            format!("({out})/{den}")
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let xs = Vec::<String>::deserialize(de)?;
        Coefficient::from_strings(&xs).map_err(serde::de::Error::custom)
    }
}

struct VExprParser<'a> {
    chars: Vec<char>,
    pos: usize,
    d: usize,
    src: &'a str,
}

impl<'a> VExprParser<'a> {
    fn new(src: &'a str, d: usize) -> Self {
        let chars = src
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '*')
            .map(|c| if c == '\u{2212}' { '-' } else { c })
            .collect();
        VExprParser { chars, pos: 0, d, src }
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at position {} in {:?}", self.pos, self.src))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Vec<Rational>> {
        let v = self.sum()?;
        if self.pos != self.chars.len() {
            return Err(self.err("trailing input"));
        }
        Ok(v)
    }

    fn sum(&mut self) -> Result<Vec<Rational>> {
        let mut acc = vec![Rational::zero(); self.d];
        let mut first = true;
        loop {
            let mut sign = Rational::one();
            match self.peek() {
                Some('+') => self.pos += 1,
                Some('-') => {
                    self.pos += 1;
                    sign = -sign;
                }
                _ if !first => return Ok(acc),
                _ => {}
            }
            let t = self.term()?;
            for (a, b) in acc.iter_mut().zip(t) {
                *a += &sign * b;
            }
            first = false;
        }
    }

    fn number(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            let s: String = self.chars[start..self.pos].iter().collect();
            s.parse().ok()
        }
    }

    fn term(&mut self) -> Result<Vec<Rational>> {
        let coef = self.number().map(Rational::from_integer);
        let mut val = match self.peek() {
            Some('v') => {
                self.pos += 1;
                let k = self.number().ok_or_else(|| self.err("expected index after v"))?;
                let k: usize = k.try_into().map_err(|_| self.err("bad index"))?;
                if k >= self.d {
                    return Err(Error::IndexOutOfRange { index: k, d: self.d });
                }
                let mut v = vec![Rational::zero(); self.d];
                v[k] = Rational::one();
                v
            }
            Some('(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected )"));
                }
                self.pos += 1;
                v
            }
            _ => match &coef {
                // A bare number is only meaningful as 0 since there is no constant term.
                Some(c) if c.is_zero() => vec![Rational::zero(); self.d],
                _ => return Err(self.err("expected v<k> or (")),
            },
        };
        if let Some(c) = coef {
            val.iter_mut().for_each(|a| *a *= &c);
        }
        while self.peek() == Some('/') {
            self.pos += 1;
            let q = self.number().ok_or_else(|| self.err("expected denominator"))?;
            if q.is_zero() {
                return Err(Error::DivisionByZero(self.src.to_string()));
            }
            let q = Rational::from_integer(q);
            val.iter_mut().for_each(|a| *a /= &q);
        }
        Ok(val)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn c(s: &str, d: usize) -> Coefficient {
        Coefficient::parse_expr(s, d).unwrap()
    }

    #[test]
    fn outcome_vector_examples() {
        assert_eq!(outcome_vector(0, 2).unwrap().components, vec![1.0]);
        assert_eq!(outcome_vector(1, 2).unwrap().components, vec![-1.0]);
        let v = outcome_vector(1, 3).unwrap();
        assert!((v.components[0] + 0.5).abs() < 1e-15);
        assert!((v.components[1] - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(outcome_vector(3, 3).is_err());
        assert!(outcome_vector(0, 1).is_err());
    }

    #[test]
    fn simplex_identities() {
        for d in 2..=11 {
            let vs: Vec<_> = (0..d).map(|k| outcome_vector(k, d).unwrap()).collect();
            for i in 0..d {
                assert!((vs[i].norm() - 1.0).abs() < 1e-12);
                for j in 0..d {
                    if i != j {
                        assert!((vs[i].dot(&vs[j]) + 1.0 / (d as f64 - 1.0)).abs() < 1e-12);
                    }
                }
            }
            for m in 0..d - 1 {
                let s: f64 = vs.iter().map(|v| v.components[m]).sum();
                assert!(s.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose(1, 2, 3).unwrap(), 0);
        assert_eq!(compose(0, 4, 7).unwrap(), 4);
        assert_eq!(compose(4, 4, 5).unwrap(), 3);
        assert!(compose(5, 0, 5).is_err());
    }

    #[test]
    fn convolve_examples() {
        let v0 = Coefficient::basis(0, 3).unwrap();
        let v1 = Coefficient::basis(1, 3).unwrap();
        let v2 = Coefficient::basis(2, 3).unwrap();
        let z = v1.convolve(&v2).unwrap();
        assert_eq!(z.alpha(), &[rat(2, 3), rat(-1, 3), rat(-1, 3)]);
        assert_eq!(z, v0);
        let x = c("3v1/7-2v2", 3);
        assert_eq!(v0.convolve(&x).unwrap(), x);
        let s = v1.add(&v2).unwrap().convolve(&v1).unwrap();
        assert_eq!(s, v2.add(&v0).unwrap());
    }

    #[test]
    fn shift_examples() {
        let v1 = Coefficient::basis(1, 3).unwrap();
        assert_eq!(v1.shift(2), Coefficient::basis(0, 3).unwrap());
        let x = c("(3v1-v2)/4", 5);
        assert_eq!(x.shift(0), x);
        assert_eq!(x.shift(3).shift(4), x.shift(2));
    }

    #[test]
    fn first_component_examples() {
        assert_eq!(Coefficient::basis(0, 3).unwrap().first_component(), int(1));
        assert_eq!(Coefficient::basis(1, 3).unwrap().first_component(), rat(-1, 2));
        assert_eq!(c("v1+v2", 3).first_component(), int(-1));
        assert_eq!(c("v1+v2", 3), c("-v0", 3));
    }

    #[test]
    fn gauge() {
        let a = Coefficient::from_i64(&[1, 2, 5], 1).unwrap();
        let b = Coefficient::from_i64(&[11, 12, 15], 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parse_notation() {
        assert_eq!(c("(-4v1+v2)/9", 3), Coefficient::from_i64(&[0, -4, 1], 9).unwrap());
        assert_eq!(c("2v0/3", 3), Coefficient::from_i64(&[2, 0, 0], 3).unwrap());
        assert_eq!(c("-v_1-2v_2", 3), Coefficient::from_i64(&[0, -1, -2], 1).unwrap());
        assert_eq!(c("0", 5), Coefficient::zero(5));
        assert_eq!(c("\u{2212}(v1+2v2)/3", 3), Coefficient::from_i64(&[0, -1, -2], 3).unwrap());
        assert!(Coefficient::parse_expr("v3", 3).is_err());
        assert!(Coefficient::parse_expr("v1+", 3).is_err());
        for s in ["(-4v1+v2)/9", "v0", "(3v1+v2-v3+2v4)/5", "-v2"] {
            let d = if s.contains("v4") { 5 } else { 3 };
            let x = c(s, d);
            assert_eq!(c(&x.to_expr(), d), x);
        }
    }

    #[test]
    fn first_component_matches_geometry() {
        for d in [2usize, 3, 5, 7] {
            let x = Coefficient::from_raw((0..d).map(|k| rat(k as i64 * 3 - 2, 7)).collect()).unwrap();
            for c in 0..d {
                let exact = rational::to_f64(&x.shift(c).first_component());
                let geo = x.shift(c).to_vector()[0];
                assert!((exact - geo).abs() < 1e-12);
            }
        }
    }
}
