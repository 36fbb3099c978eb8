//! The equivalence group: party permutations, per-party setting swaps and cyclic
//! outcome shifts of every observable.

pub mod orbit;
pub mod recipe;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Coefficient;
use crate::bell::{setting_of, BellFunction};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use orbit::{canonical_form, equivalent, orbit, Equivalence, OrbitReport};
pub use recipe::parse_recipe;

/// Acts on a Bell function by shifting outcomes (original labels), then swapping
/// settings, then moving party p to position `perm[p]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transformation {
    pub perm: Vec<usize>,
    pub swap: Vec<bool>,
    pub shift: Vec<[usize; 2]>,
    #[serde(skip)]
    d: usize,
}

impl Transformation {
    pub fn identity(n: usize, d: usize) -> Self {
        Transformation { perm: (0..n).collect(), swap: vec![false; n], shift: vec![[0, 0]; n], d }
    }

    pub fn new(perm: Vec<usize>, swap: Vec<bool>, shift: Vec<[usize; 2]>, d: usize) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::Invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if swap.len() != n || shift.len() != n {
            return Err(Error::ShapeMismatch("perm, swap and shift must all have n entries".into()));
        }
        let shift = shift.into_iter().map(|[a, b]| [a % d, b % d]).collect();
        Ok(Transformation { perm, swap, shift, d })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Restores the dimension after deserialization.
    pub fn with_d(mut self, d: usize) -> Self {
        self.shift.iter_mut().for_each(|s| {
            s[0] %= d;
            s[1] %= d;
        });
        self.d = d;
        self
    }

    /// Target setting index and outcome shift for original setting index s.
    #[inline]
    pub fn map_setting(&self, s: usize) -> (usize, usize) {
        let n = self.n();
        let mut t = 0;
        let mut c = 0;
        for p in 0..n {
            let b = setting_of(s, p, n);
            c += self.shift[p][b];
            let nb = b ^ self.swap[p] as usize;
            t |= nb << (n - 1 - self.perm[p]);
        }
        (t, c % self.d)
    }

    /// self ∘ other: apply `other` first.
    pub fn compose(&self, other: &Transformation) -> Transformation {
        let n = self.n();
        let d = self.d;
        let mut perm = vec![0; n];
        let mut swap = vec![false; n];
        let mut shift = vec![[0, 0]; n];
        for p in 0..n {
            let q = other.perm[p];
            perm[p] = self.perm[q];
            swap[p] = other.swap[p] ^ self.swap[q];
            for i in 0..2 {
                let j = i ^ other.swap[p] as usize;
                shift[p][i] = (other.shift[p][i] + self.shift[q][j]) % d;
            }
        }
        Transformation { perm, swap, shift, d }
    }

    pub fn inverse(&self) -> Transformation {
        let n = self.n();
        let d = self.d;
        let mut perm = vec![0; n];
        let mut swap = vec![false; n];
        let mut shift = vec![[0, 0]; n];
        for p in 0..n {
            let q = self.perm[p];
            perm[q] = p;
            swap[q] = self.swap[p];
            for i in 0..2 {
                shift[q][i ^ self.swap[p] as usize] = (d - self.shift[p][i]) % d;
            }
        }
        Transformation { perm, swap, shift, d }
    }

    pub fn random<R: Rng>(n: usize, d: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let swap = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let shift = (0..n).map(|_| [rng.gen_range(0..d), rng.gen_range(0..d)]).collect();
        Transformation { perm, swap, shift, d }
    }

    /// The recipe-language rendering, e.g. "{a_1→Mod[a_1+2,3], B_0↔B_1}".
    pub fn to_recipe(&self) -> String {
        let n = self.n();
        let mut items = Vec::new();
        // Outcome and setting rules name the relabeled parties.
        for p in 0..n {
            let l = recipe::party_letter(self.perm[p]).to_ascii_lowercase();
            for i in 0..2 {
                let c = self.shift[p][i];
                if c != 0 {
                    items.push(format!("{l}_{i}→Mod[{l}_{i}+{c},{}]", self.d));
                }
            }
        }
        for p in 0..n {
            if self.swap[p] {
                let u = recipe::party_letter(self.perm[p]);
                items.push(format!("{u}_0↔{u}_1"));
            }
        }
        if self.perm.iter().enumerate().any(|(p, &q)| p != q) {
            let src: String = (0..n).map(recipe::party_letter).collect();
            let dst: String = self.perm.iter().map(|&q| recipe::party_letter(q)).collect();
            items.push(format!("{src}→{dst}"));
        }
        format!("{{{}}}", items.join(", "))
    }
}

/// Nominal group order n!·2^n·d^(2n).
pub fn group_order(n: usize, d: usize) -> u128 {
    let fact: u128 = (1..=n as u128).product();
    fact * (1u128 << n) * (d as u128).pow(2 * n as u32)
}

/// Order of the group actually acting on coefficients: shift vectors differing by
/// (c, c) per party with Σc = 0 act identically, leaving n!·2^n·d^(n+1) distinct actions.
pub fn effective_group_order(n: usize, d: usize) -> u128 {
    let fact: u128 = (1..=n as u128).product();
    fact * (1u128 << n) * (d as u128).pow(n as u32 + 1)
}

pub fn apply(g: &Transformation, f: &BellFunction) -> Result<BellFunction> {
    if g.n() != f.n() || g.d() != f.d() {
        return Err(Error::ShapeMismatch(format!(
            "transformation for (n,d) = ({},{}), function ({},{})",
            g.n(),
            g.d(),
            f.n(),
            f.d()
        )));
    }
    let mut coeffs = vec![Coefficient::zero(f.d()); 1 << f.n()];
    for s in 0..1 << f.n() {
        let (t, c) = g.map_setting(s);
        coeffs[t] = f.coeff(s).shift(c);
    }
    BellFunction::new(f.n(), f.d(), coeffs)
}

/// Multiset of cyclic-rotation classes of the coefficients, as sorted (class, multiplicity) pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate(pub Vec<(Vec<Rational>, usize)>);

impl Certificate {
    pub fn to_strings(&self) -> Vec<(String, usize)> {
        self.0
            .iter()
            .map(|(c, m)| {
                let coeff = Coefficient::from_raw(c.clone()).expect("d ≥ 2");
                (coeff.to_expr(), *m)
            })
            .collect()
    }
}

pub fn invariant_certificate(f: &BellFunction) -> Certificate {
    let mut classes: Vec<Vec<Rational>> = f.coeffs().iter().map(|c| c.rotation_class()).collect();
    classes.sort();
    let mut out: Vec<(Vec<Rational>, usize)> = Vec::new();
    for c in classes {
        match out.last_mut() {
            Some((last, m)) if *last == c => *m += 1,
            _ => out.push((c, 1)),
        }
    }
    Certificate(out)
}

/// Integer image of a function: mean-zero alpha arrays times a common denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntForm {
    pub data: Vec<i64>,
}

pub struct IntContext {
    pub n: usize,
    pub d: usize,
    pub den: BigInt,
}

impl IntContext {
    pub fn for_functions(fs: &[&BellFunction]) -> Result<Self> {
        let f0 = fs.first().ok_or_else(|| Error::Invalid("no functions".into()))?;
        let den = rational::common_denominator(fs.iter().flat_map(|f| f.all_alpha()));
        Ok(IntContext { n: f0.n(), d: f0.d(), den })
    }

    pub fn encode(&self, f: &BellFunction) -> Result<IntForm> {
        let data = rational::scale_to_i64(f.all_alpha(), &self.den)
            .ok_or_else(|| Error::Invalid("coefficients too large for integer encoding".into()))?;
        Ok(IntForm { data })
    }

    pub fn decode(&self, x: &IntForm) -> BellFunction {
        let d = self.d;
        let coeffs = x
            .data
            .chunks(d)
            .map(|c| {
                Coefficient::from_raw(c.iter().map(|&v| Rational::new(BigInt::from(v), self.den.clone())).collect())
                    .expect("d ≥ 2")
            })
            .collect();
        BellFunction::new(self.n, d, coeffs).expect("shape preserved")
    }

    pub fn apply(&self, g: &Transformation, x: &IntForm) -> IntForm {
        let d = self.d;
        let mut out = vec![0i64; x.data.len()];
        for s in 0..1 << self.n {
            let (t, c) = g.map_setting(s);
            for k in 0..d {
                out[t * d + (k + c) % d] = x.data[s * d + k];
            }
        }
        IntForm { data: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::cglmp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_composition() {
        let f = cglmp(3).unwrap();
        assert_eq!(apply(&Transformation::identity(2, 3), &f).unwrap(), f);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g3 = crate::bell::iterate(&f, &apply(&Transformation::random(2, 3, &mut rng), &f).unwrap()).unwrap();
        for _ in 0..200 {
            let g = Transformation::random(3, 3, &mut rng);
            let h = Transformation::random(3, 3, &mut rng);
            let gh = g.compose(&h);
            assert_eq!(apply(&gh, &g3).unwrap(), apply(&g, &apply(&h, &g3).unwrap()).unwrap());
            assert_eq!(apply(&g.inverse(), &apply(&g, &g3).unwrap()).unwrap(), g3);
            let k = Transformation::random(3, 3, &mut rng);
            assert_eq!(g.compose(&h).compose(&k), g.compose(&h.compose(&k)));
        }
    }

    #[test]
    fn orders() {
        assert_eq!(group_order(2, 3), 648);
        assert_eq!(effective_group_order(2, 3), 216);
    }

    #[test]
    fn certificate_invariant() {
        let f = cglmp(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let g = Transformation::random(2, 5, &mut rng);
            assert_eq!(invariant_certificate(&apply(&g, &f).unwrap()), invariant_certificate(&f));
        }
    }

    #[test]
    fn int_form_matches_rational_apply() {
        let f = cglmp(3).unwrap();
        let ctx = IntContext::for_functions(&[&f]).unwrap();
        let x = ctx.encode(&f).unwrap();
        assert_eq!(ctx.decode(&x), f);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let g = Transformation::random(2, 3, &mut rng);
            assert_eq!(ctx.decode(&ctx.apply(&g, &x)), apply(&g, &f).unwrap());
        }
    }
}
