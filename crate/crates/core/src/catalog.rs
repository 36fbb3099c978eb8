//! Embedded archive of printed Bell functions, the recipes linking them and
//! their printed probability forms.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bell::{
    cglmp, iterate, mabk, parse_setting, restrict, setting_bits, to_probability_form, BellFunction, ProbabilityForm,
};
use crate::error::{Error, Result};
use crate::lhv;
use crate::rational::{self, Rational};
use crate::symmetry::{apply, recipe::parse_recipe};

const DATA: &str = include_str!("../data/catalog.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecipeRef {
    pub source: String,
    pub recipe: String,
    #[serde(rename = "where")]
    pub location: String,
    /// Replacement text used when the printed recipe cannot be applied literally.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reading: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Why the printed recipe is believed mis-transcribed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suspect: Option<String>,
    /// A nearby recipe that does verify, listed for reference only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternative: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Suspect {
    pub reason: String,
    /// Settings whose printed value disagrees with every consistency check, with the consistent value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected: Option<BTreeMap<String, String>>,
    /// Settings whose printed value is unreadable, verbatim; the stored coefficient is the resolved one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrintedForm {
    /// (setting bits, r, weight) for each printed P(setting = r) term.
    pub terms: Vec<(String, usize, String)>,
    pub constant: String,
    pub bound: String,
    #[serde(rename = "where")]
    pub location: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suspect: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Generator {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterateRef {
    pub f00: String,
    pub f01: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictionRef {
    pub k0: usize,
    pub k1: usize,
    pub target: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawEntry {
    pub id: String,
    pub n: usize,
    pub d: usize,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_lhv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_nl_psi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_vc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_spectrum: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suspect: Option<Suspect>,
    #[serde(default)]
    pub recipes: Vec<RecipeRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed_form: Option<PrintedForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterate: Option<IterateRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub restrictions: Vec<RestrictionRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawCatalog {
    version: u32,
    entries: Vec<RawEntry>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub raw: RawEntry,
    pub function: BellFunction,
    pub expected_lhv: Option<Rational>,
    pub expected_spectrum: Option<Vec<Rational>>,
}

impl CatalogEntry {
    pub fn id(&self) -> &str {
        &self.raw.id
    }

    pub fn is_suspect(&self) -> bool {
        self.raw.suspect.is_some()
    }

    /// The function with any listed corrections applied; equal to `function` otherwise.
    pub fn corrected_function(&self) -> Result<BellFunction> {
        let Some(fix) = self.raw.suspect.as_ref().and_then(|s| s.corrected.as_ref()) else {
            return Ok(self.function.clone());
        };
        let mut terms: BTreeMap<String, String> = self.raw.coeffs.clone().unwrap_or_default();
        for (k, v) in fix {
            terms.insert(k.clone(), v.clone());
        }
        let terms: Vec<_> = terms.into_iter().collect();
        BellFunction::from_exprs(self.raw.n, self.raw.d, &terms)
    }

    /// The printed probability form and its printed LHV bound.
    pub fn printed_form(&self) -> Result<Option<(ProbabilityForm, Rational)>> {
        let Some(p) = &self.raw.printed_form else { return Ok(None) };
        let terms = p
            .terms
            .iter()
            .map(|(bits, r, w)| Ok((parse_setting(bits, self.raw.n)?, *r, rational::parse(w)?)))
            .collect::<Result<Vec<_>>>()?;
        let form = ProbabilityForm::from_terms(self.raw.n, self.raw.d, &terms, rational::parse(&p.constant)?)?;
        Ok(Some((form, rational::parse(&p.bound)?)))
    }
}

#[derive(Debug)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    index: HashMap<String, usize>,
}

impl Catalog {
    pub fn from_json(src: &str) -> Result<Self> {
        let raw: RawCatalog = serde_json::from_str(src).map_err(|e| Error::Parse(format!("catalog: {e}")))?;
        let mut cat = Catalog { entries: Vec::new(), index: HashMap::new() };
        for r in raw.entries {
            let function = cat.build(&r).map_err(|e| Error::Parse(format!("catalog entry {}: {e}", r.id)))?;
            let expected_lhv = r.expected_lhv.as_deref().map(rational::parse).transpose()?;
            let expected_spectrum = r
                .expected_spectrum
                .as_ref()
                .map(|v| v.iter().map(|x| rational::parse(x)).collect::<Result<Vec<_>>>())
                .transpose()?;
            if cat.index.insert(r.id.clone(), cat.entries.len()).is_some() {
                return Err(Error::Parse(format!("duplicate catalog id {}", r.id)));
            }
            cat.entries.push(CatalogEntry { raw: r, function, expected_lhv, expected_spectrum });
        }
        Ok(cat)
    }

    fn build(&self, r: &RawEntry) -> Result<BellFunction> {
        match (&r.coeffs, &r.generator) {
            (Some(c), None) => {
                let terms: Vec<_> = c.iter().collect();
                let f = BellFunction::from_exprs(r.n, r.d, &terms)?;
                for k in c.keys() {
                    parse_setting(k, r.n)?;
                }
                Ok(f)
            }
            (None, Some(g)) => match g.kind.as_str() {
                "cglmp" => cglmp(g.d.unwrap_or(r.d)),
                "mabk" => mabk(g.n.unwrap_or(r.n), &self.get("I_2_2")?.function),
                k => Err(Error::Parse(format!("unknown generator {k:?}"))),
            },
            _ => Err(Error::Parse("entry needs exactly one of coeffs or generator".into())),
        }
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Result<&CatalogEntry> {
        self.index.get(id).map(|&i| &self.entries[i]).ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn function(&self, id: &str) -> Result<&BellFunction> {
        Ok(&self.get(id)?.function)
    }

    /// Serializes the catalog back to its JSON form.
    pub fn to_json(&self) -> serde_json::Value {
        let raw = RawCatalog { version: 1, entries: self.entries.iter().map(|e| e.raw.clone()).collect() };
        serde_json::to_value(raw).expect("catalog serializes")
    }
}

/// The embedded catalog, parsed once.
pub fn load_catalog() -> &'static Catalog {
    static CAT: OnceLock<Catalog> = OnceLock::new();
    CAT.get_or_init(|| Catalog::from_json(DATA).expect("embedded catalog is well formed"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CheckStatus {
    Match,
    Mismatch { settings: Vec<String> },
    Error { message: String },
}

impl CheckStatus {
    pub fn is_match(&self) -> bool {
        matches!(self, CheckStatus::Match)
    }
}

fn compare(got: &BellFunction, want: &BellFunction) -> CheckStatus {
    if got.n() != want.n() || got.d() != want.d() {
        return CheckStatus::Error { message: format!("shape ({},{}) vs ({},{})", got.n(), got.d(), want.n(), want.d()) };
    }
    let settings: Vec<String> = (0..1 << got.n())
        .filter(|&s| got.coeff(s) != want.coeff(s))
        .map(|s| setting_bits(s, got.n()))
        .collect();
    if settings.is_empty() {
        CheckStatus::Match
    } else {
        CheckStatus::Mismatch { settings }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecipeCheck {
    pub target: String,
    pub source: String,
    pub recipe: String,
    #[serde(rename = "where")]
    pub location: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reading: Option<String>,
    pub result: CheckStatus,
    /// Why this check does not count: a transcription-suspect source, target or recipe.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suspect: Option<String>,
    /// The recipe applied to the corrected source and compared with the corrected target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected_result: Option<CheckStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative_result: Option<CheckStatus>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecipeReport {
    pub checks: Vec<RecipeCheck>,
    pub passed: usize,
    pub failed: usize,
    pub suspect: usize,
}

impl RecipeReport {
    /// Every recipe outside the suspect list verifies.
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

fn check_recipe(text: &str, src: &BellFunction, target: &BellFunction) -> CheckStatus {
    match parse_recipe(text, src.n(), src.d()).and_then(|t| apply(&t, src)) {
        Ok(img) => compare(&img, target),
        Err(err) => CheckStatus::Error { message: err.to_string() },
    }
}

fn suspect_reason(e: &CatalogEntry, src: Option<&CatalogEntry>, r: &RecipeRef) -> Option<String> {
    if let Some(why) = &r.suspect {
        return Some(format!("recipe: {why}"));
    }
    if e.is_suspect() {
        return Some(format!("target {} is transcription-suspect", e.raw.id));
    }
    match src {
        Some(s) if s.is_suspect() => Some(format!("source {} is transcription-suspect", s.raw.id)),
        _ => None,
    }
}

/// Applies every printed recipe to its source and compares with the target exactly.
pub fn verify_recipes(cat: &Catalog) -> RecipeReport {
    let mut checks = Vec::new();
    for e in cat.entries() {
        for r in &e.raw.recipes {
            let text = r.reading.as_deref().unwrap_or(&r.recipe);
            let src = cat.get(&r.source);
            let suspect = suspect_reason(e, src.as_ref().ok().copied(), r);
            let (result, corrected_result, alternative_result) = match src {
                Ok(s) => {
                    let corrected = (s.is_suspect() || e.is_suspect()).then(|| {
                        match (s.corrected_function(), e.corrected_function()) {
                            (Ok(a), Ok(b)) => check_recipe(text, &a, &b),
                            (Err(err), _) | (_, Err(err)) => CheckStatus::Error { message: err.to_string() },
                        }
                    });
                    let alt = r.alternative.as_deref().map(|a| check_recipe(a, &s.function, &e.function));
                    (check_recipe(text, &s.function, &e.function), corrected, alt)
                }
                Err(err) => (CheckStatus::Error { message: err.to_string() }, None, None),
            };
            checks.push(RecipeCheck {
                target: e.raw.id.clone(),
                source: r.source.clone(),
                recipe: r.recipe.clone(),
                location: r.location.clone(),
                reading: r.reading.clone(),
                result,
                suspect,
                corrected_result,
                alternative: r.alternative.clone(),
                alternative_result,
            });
        }
    }
    let suspect = checks.iter().filter(|c| c.suspect.is_some()).count();
    let passed = checks.iter().filter(|c| c.suspect.is_none() && c.result.is_match()).count();
    let failed = checks.iter().filter(|c| c.suspect.is_none() && !c.result.is_match()).count();
    RecipeReport { checks, passed, failed, suspect }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkCheck {
    pub kind: String,
    pub target: String,
    pub detail: String,
    /// Computed on corrected functions wherever a correction is listed.
    pub result: CheckStatus,
    pub uses_correction: bool,
}

/// Iteration and restriction relations between entries: iterate(f00, f01) = target and
/// restrict(f, k0, k1) = target.
pub fn verify_links(cat: &Catalog) -> Vec<LinkCheck> {
    let mut out = Vec::new();
    for e in cat.entries() {
        if let Some(it) = &e.raw.iterate {
            let res = (|| -> Result<(CheckStatus, bool)> {
                let a = cat.get(&it.f00)?;
                let b = cat.get(&it.f01)?;
                let got = iterate(&a.corrected_function()?, &b.corrected_function()?)?;
                Ok((compare(&got, &e.corrected_function()?), a.is_suspect() || b.is_suspect() || e.is_suspect()))
            })();
            let (result, uses_correction) =
                res.unwrap_or_else(|err| (CheckStatus::Error { message: err.to_string() }, false));
            out.push(LinkCheck {
                kind: "iterate".into(),
                target: e.raw.id.clone(),
                detail: format!("iterate({}, {})", it.f00, it.f01),
                result,
                uses_correction,
            });
        }
        for r in &e.raw.restrictions {
            let res = (|| -> Result<(CheckStatus, bool)> {
                let t = cat.get(&r.target)?;
                let got = restrict(&e.corrected_function()?, r.k0, r.k1)?;
                Ok((compare(&got, &t.corrected_function()?), t.is_suspect() || e.is_suspect()))
            })();
            let (result, uses_correction) =
                res.unwrap_or_else(|err| (CheckStatus::Error { message: err.to_string() }, false));
            out.push(LinkCheck {
                kind: "restrict".into(),
                target: r.target.clone(),
                detail: format!("restrict({}, {}, {})", e.raw.id, r.k0, r.k1),
                result,
                uses_correction,
            });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct FormCheck {
    pub id: String,
    #[serde(rename = "where")]
    pub location: String,
    /// λ with (computed form) ≡ λ·(printed form) + const on normalized tables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    /// The printed bound carried to the normalization of the function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapped_bound: Option<String>,
    /// Maximum of the printed form over deterministic strategies.
    pub printed_lhv_max: String,
    pub printed_bound: String,
    /// Same coefficients up to a positive scale and constant.
    pub affine_match: bool,
    /// The printed bound equals the printed form's deterministic maximum.
    pub bound_tight: bool,
    /// The function read off the printed form, rescaled, is an image of the entry under the symmetry group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalent_via: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suspect: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn max_abs(f: &BellFunction) -> Rational {
    f.all_alpha().map(|a| a.abs()).max().unwrap_or_else(Rational::zero)
}

fn form_check(e: &CatalogEntry, p: &PrintedForm, budget: u128) -> Result<FormCheck> {
    let (printed, bound) = e.printed_form()?.expect("printed form present");
    let ours = to_probability_form(&e.function);
    let lambda = ours.affine_ratio(&printed);
    let mapped = ours.map_bound(&printed, &bound);
    let g = printed.to_bell_function()?;
    let printed_max = lhv::lhv_max(&g, budget)? + printed.offset();
    let equivalent_via = if lambda.is_none() && !g.all_alpha().all(|a| a.is_zero()) {
        let scaled = g.scale(&(max_abs(&e.function) / max_abs(&g)));
        match crate::symmetry::orbit::equivalent(&e.function, &scaled, crate::symmetry::orbit::DEFAULT_BUDGET)? {
            crate::symmetry::orbit::Equivalence::Equivalent(t) => Some(t.to_recipe()),
            _ => None,
        }
    } else {
        None
    };
    Ok(FormCheck {
        id: e.raw.id.clone(),
        location: p.location.clone(),
        lambda: lambda.as_ref().map(rational::to_string),
        mapped_bound: mapped.as_ref().map(rational::to_string),
        printed_lhv_max: rational::to_string(&printed_max),
        printed_bound: rational::to_string(&bound),
        affine_match: lambda.is_some() && mapped.is_some() && e.expected_lhv.as_ref().map_or(true, |l| Some(l) == mapped.as_ref()),
        bound_tight: printed_max == bound,
        equivalent_via,
        suspect: p.suspect.clone(),
        note: p.note.clone(),
    })
}

/// The printed-form comparison for one entry, if it has a printed form.
pub fn check_printed_form(cat: &Catalog, id: &str, budget: u128) -> Result<Option<FormCheck>> {
    let e = cat.get(id)?;
    e.raw.printed_form.as_ref().map(|p| form_check(e, p, budget)).transpose()
}

/// Compares each entry's probability form with its printed form up to a positive affine map
/// and checks that the printed bound maps onto the expected LHV bound.
pub fn verify_printed_forms(cat: &Catalog, budget: u128) -> Result<Vec<FormCheck>> {
    cat.entries()
        .iter()
        .filter_map(|e| e.raw.printed_form.as_ref().map(|p| form_check(e, p, budget)))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub id: String,
    pub lhv: String,
    pub spectrum: Vec<String>,
    /// Present for suspect entries with listed corrections.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected_lhv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_spectrum: Option<Vec<String>>,
    /// Judged on the corrected function where one is listed.
    pub matches: bool,
}

/// Exact LHV bound (and spectrum where one is listed) of every entry with n ≤ max_n.
pub fn verify_bounds(cat: &Catalog, max_n: usize, budget: u128) -> Result<Vec<BoundCheck>> {
    let mut out = Vec::new();
    for e in cat.entries().iter().filter(|e| e.raw.n <= max_n) {
        let rep = lhv::lhv_bound(&e.function, budget)?;
        let fixed = if e.is_suspect() { Some(lhv::lhv_bound(&e.corrected_function()?, budget)?) } else { None };
        let judged = fixed.as_ref().unwrap_or(&rep);
        let lhv_ok = e.expected_lhv.as_ref().map_or(true, |l| *l == judged.bound);
        let spec_ok = e.expected_spectrum.as_ref().map_or(true, |s| *s == judged.spectrum);
        out.push(BoundCheck {
            id: e.raw.id.clone(),
            lhv: rational::to_string(&rep.bound),
            spectrum: rep.spectrum.iter().map(rational::to_string).collect(),
            corrected_lhv: fixed.as_ref().map(|f| rational::to_string(&f.bound)),
            expected: e.expected_lhv.as_ref().map(rational::to_string),
            expected_spectrum: e.raw.expected_spectrum.clone(),
            matches: lhv_ok && spec_ok,
        });
    }
    Ok(out)
}

/// Every transcription-suspect item: entries, printed forms and recipes, with reasons.
pub fn suspects(cat: &Catalog) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for e in cat.entries() {
        if let Some(s) = &e.raw.suspect {
            out.push(("entry".into(), e.raw.id.clone(), s.reason.clone()));
        }
        if let Some(why) = e.raw.printed_form.as_ref().and_then(|p| p.suspect.as_ref()) {
            out.push(("printed form".into(), e.raw.id.clone(), why.clone()));
        }
        for r in &e.raw.recipes {
            if let Some(why) = &r.suspect {
                out.push(("recipe".into(), format!("{} <- {} ({})", e.raw.id, r.source, r.location), why.clone()));
            }
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_round_trips() {
        let cat = load_catalog();
        assert!(cat.entries().len() > 60);
        let again = Catalog::from_json(&cat.to_json().to_string()).unwrap();
        for (a, b) in cat.entries().iter().zip(again.entries()) {
            assert_eq!(a.function, b.function);
            let j = a.function.to_json();
            assert_eq!(BellFunction::from_json(&j).unwrap(), a.function);
        }
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(load_catalog().get("I_9_9"), Err(Error::UnknownId(_))));
    }
}
