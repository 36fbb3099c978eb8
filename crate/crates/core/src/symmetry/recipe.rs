//! Parser for transformation recipes written as replacement rules, e.g.
//! `/.{a_1→Mod[a_1+2,3], B_0↔B_1, ABCD→CBAD}`.
//!
//! The party relabeling acts first; outcome and setting rules then name the
//! parties of the relabeled function. Every recipe in the catalog is read this way.

use super::Transformation;
use crate::error::{Error, Result};

const LETTERS: &[u8] = b"ABCDEFGHIJ";

pub fn party_letter(p: usize) -> char {
    LETTERS[p] as char
}

fn party_index(c: char, n: usize) -> Result<usize> {
    let u = c.to_ascii_uppercase() as u8;
    LETTERS
        .iter()
        .position(|&l| l == u)
        .filter(|&p| p < n)
        .ok_or_else(|| Error::Parse(format!("party {c:?} outside the first {n} letters")))
}

fn normalize(s: &str) -> String {
    s.replace('\u{2192}', "->")
        .replace('\u{2194}', "<->")
        .replace("\\leftrightarrow", "<->")
        .replace("\\rightarrow", "->")
        .replace("{\\rm Mod}", "Mod")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect()
}

/// Splits on commas that are not inside brackets.
fn split_items(body: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in body.chars() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        items.push(cur);
    }
    items
}

/// "x_i" → (party, setting).
fn observable(s: &str, n: usize) -> Result<(usize, usize)> {
    let mut it = s.chars();
    let letter = it.next().ok_or_else(|| Error::Parse("empty observable".into()))?;
    let rest: String = it.collect();
    let rest = rest.trim_start_matches('_');
    let i = match rest {
        "0" => 0,
        "1" => 1,
        _ => return Err(Error::Parse(format!("bad setting in {s:?}"))),
    };
    Ok((party_index(letter, n)?, i))
}

pub fn parse_recipe(src: &str, n: usize, d: usize) -> Result<Transformation> {
    let s = normalize(src);
    let s = s.strip_prefix("/.").unwrap_or(&s);
    let body = s
        .strip_prefix('{')
        .and_then(|b| b.strip_suffix('}'))
        .ok_or_else(|| Error::Parse(format!("recipe must be braced: {src:?}")))?;
    let mut t = Transformation::identity(n, d);
    let mut perm_set = false;
    let mut swaps = vec![false; n];
    let mut shifts = vec![[0usize; 2]; n];
    for item in split_items(body) {
        if let Some((l, r)) = item.split_once("<->") {
            let (pl, il) = observable(l, n)?;
            let (pr, ir) = observable(r, n)?;
            if pl != pr || il == ir {
                return Err(Error::Parse(format!("swap must exchange X_0 and X_1 of one party: {item:?}")));
            }
            swaps[pl] ^= true;
        } else if let Some((l, r)) = item.split_once("->") {
            if l.chars().all(|c| c.is_ascii_uppercase()) && l.len() > 1 {
                if l.len() != n || r.len() != n {
                    return Err(Error::Parse(format!("party relabeling must list all {n} parties: {item:?}")));
                }
                if perm_set {
                    return Err(Error::Parse("more than one party relabeling".into()));
                }
                let mut perm = vec![usize::MAX; n];
                for (a, b) in l.chars().zip(r.chars()) {
                    perm[party_index(a, n)?] = party_index(b, n)?;
                }
                t.perm = perm;
                perm_set = true;
            } else {
                let (p, i) = observable(l, n)?;
                if !l.starts_with(|c: char| c.is_ascii_lowercase()) {
                    return Err(Error::Parse(format!("outcome rules use lower-case labels: {item:?}")));
                }
                let inner = r.strip_prefix("Mod[").and_then(|x| x.strip_suffix(']')).unwrap_or(r);
                let (expr, modulus) = match inner.rsplit_once(',') {
                    Some((e, m)) => (e, Some(m)),
                    None => (inner, None),
                };
                if let Some(m) = modulus {
                    let m: usize = m.parse().map_err(|_| Error::Parse(format!("bad modulus in {item:?}")))?;
                    if m != d {
                        return Err(Error::Parse(format!("modulus {m} does not match d = {d}")));
                    }
                }
                let c = expr
                    .strip_prefix(l)
                    .and_then(|x| x.strip_prefix('+'))
                    .and_then(|x| x.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse(format!("expected {l}+c in {item:?}")))?;
                shifts[p][i] = (shifts[p][i] + c) % d;
            }
        } else {
            return Err(Error::Parse(format!("unrecognized rule {item:?}")));
        }
    }
    // Rule for relabeled party q lands on source party perm⁻¹(q).
    for p in 0..n {
        let q = t.perm[p];
        t.swap[p] = swaps[q];
        t.shift[p] = shifts[q];
    }
    Transformation::new(t.perm, t.swap, t.shift, d)
}
