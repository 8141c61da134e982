//! JSON schemas for alphabets, series, drivers, translations, fields and
//! basis exports, with conversions to and from kernel types.
//!
//! Conversions report the offending location as a dotted path, e.g.
//! `segments[1].velocity.series.terms[0].word`.

use std::path::Path;
use std::sync::Arc;

use roughforge_core::develop::{Poly1, Segment, Velocity};
use roughforge_core::field::{FieldTable, PolyVectorField, Polynomial};
use roughforge_core::lie::LieBasisElement;
use roughforge_core::renorm::{Translation, TranslationMode};
use roughforge_core::{Alphabet, Driver, HopfContext, Letter, ProductKind, TensorSeries, Word};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

type Res<T> = Result<T, CliError>;

fn invalid<T>(path: &str, msg: impl std::fmt::Display) -> Res<T> {
    Err(CliError::Validation(format!("{path}: {msg}")))
}

fn kernel<T>(path: &str, r: roughforge_core::Result<T>) -> Res<T> {
    r.or_else(|e| invalid(path, e))
}

/// Reads and deserializes a JSON file; schema errors name the JSON path.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_json(&text).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Deserializes JSON text; schema errors name the JSON path.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Res<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Validation(inner.to_string())
        } else {
            CliError::Validation(format!("field `{path}`: {inner}"))
        }
    })?;
    de.end().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(value)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("schema types serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub a: String,
    pub b: String,
    pub ab: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketJson {
    pub pairs: Vec<PairJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiIndexJson {
    pub d: usize,
    pub m: u32,
}

/// Alphabet: explicit `letters` (with optional `weights`, default 1, and
/// `bracket`), or one of the shorthands `standard: d` and
/// `multi_index: {d, m}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub letters: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BracketJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_index: Option<MultiIndexJson>,
}

impl AlphabetJson {
    /// Explicit form of an alphabet.
    pub fn from_alphabet(a: &Alphabet) -> Self {
        let pairs: Vec<PairJson> = a
            .bracket_pairs()
            .into_iter()
            .map(|(x, y, z)| PairJson { a: a.name(x).into(), b: a.name(y).into(), ab: Some(a.name(z).into()) })
            .collect();
        Self {
            letters: Some(a.names().to_vec()),
            weights: if a.weights().iter().all(|&w| w == 1) { None } else { Some(a.weights().to_vec()) },
            bracket: if pairs.is_empty() { None } else { Some(BracketJson { pairs }) },
            standard: None,
            multi_index: None,
        }
    }

    pub fn to_alphabet(&self, path: &str) -> Res<Alphabet> {
        let sources = [self.letters.is_some(), self.standard.is_some(), self.multi_index.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return invalid(path, "give exactly one of `letters`, `standard`, `multi_index`");
        }
        if let Some(d) = self.standard {
            if self.weights.is_some() || self.bracket.is_some() {
                return invalid(path, "`standard` takes no `weights` or `bracket`");
            }
            return kernel(&format!("{path}.standard"), Alphabet::standard(d));
        }
        if let Some(mi) = &self.multi_index {
            if self.weights.is_some() || self.bracket.is_some() {
                return invalid(path, "`multi_index` takes no `weights` or `bracket`");
            }
            return kernel(&format!("{path}.multi_index"), Alphabet::multi_index(mi.d, mi.m));
        }
        let names = self.letters.as_ref().expect("checked above");
        let weights = match &self.weights {
            Some(w) if w.len() != names.len() => {
                return invalid(&format!("{path}.weights"), format!("{} weights for {} letters", w.len(), names.len()))
            }
            Some(w) => w.clone(),
            None => vec![1; names.len()],
        };
        let base = kernel(&format!("{path}.letters"), Alphabet::new(names, &weights))?;
        match &self.bracket {
            None => Ok(base),
            Some(b) => {
                let mut pairs = Vec::with_capacity(b.pairs.len());
                for (i, p) in b.pairs.iter().enumerate() {
                    let at = format!("{path}.bracket.pairs[{i}]");
                    let l = |n: &str, f: &str| base.letter(n).map_or_else(|| invalid(&format!("{at}.{f}"), format!("unknown letter \"{n}\"")), Ok);
                    let ab = match &p.ab {
                        Some(n) => Some(l(n, "ab")?),
                        None => None,
                    };
                    pairs.push((l(&p.a, "a")?, l(&p.b, "b")?, ab));
                }
                kernel(&format!("{path}.bracket"), base.with_bracket(&pairs))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub word: Vec<String>,
    pub coeff: f64,
}

/// Series: `{alphabet, level, terms}`. Inside a driver or translation the
/// alphabet may be omitted and is then inherited.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<AlphabetJson>,
    pub level: u32,
    pub terms: Vec<TermJson>,
    /// Options and defaults of the producing command; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
}

impl SeriesJson {
    pub fn from_series(x: &TensorSeries, with_alphabet: bool) -> Self {
        let a = x.alphabet();
        Self {
            alphabet: with_alphabet.then(|| AlphabetJson::from_alphabet(a)),
            level: x.level(),
            terms: x.terms().map(|(w, c)| TermJson { word: w.names(a).into_iter().map(String::from).collect(), coeff: c }).collect(),
            meta: None,
        }
    }

    pub fn to_series(&self, inherited: Option<&Arc<Alphabet>>, path: &str) -> Res<TensorSeries> {
        let alphabet = match (&self.alphabet, inherited) {
            (Some(j), inherit) => {
                let a = j.to_alphabet(&format!("{path}.alphabet"))?;
                match inherit {
                    Some(b) if **b != a => return invalid(&format!("{path}.alphabet"), "differs from the enclosing alphabet"),
                    Some(b) => b.clone(),
                    None => Arc::new(a),
                }
            }
            (None, Some(b)) => b.clone(),
            (None, None) => return invalid(path, "missing field `alphabet`"),
        };
        let mut terms = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            let at = format!("{path}.terms[{i}]");
            if !t.coeff.is_finite() {
                return invalid(&format!("{at}.coeff"), "coefficient is not finite");
            }
            let w = Word::parse(&alphabet, &t.word).or_else(|e| invalid(&format!("{at}.word"), e))?;
            if w.weight() > self.level {
                return invalid(&format!("{at}.word"), format!("weight {} exceeds level {}", w.weight(), self.level));
            }
            terms.push((w, t.coeff));
        }
        kernel(path, TensorSeries::from_terms(&alphabet, self.level, terms))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextJson {
    Shuffle,
    Quasishuffle,
}

impl From<ProductKind> for ContextJson {
    fn from(k: ProductKind) -> Self {
        match k {
            ProductKind::Shuffle => ContextJson::Shuffle,
            ProductKind::QuasiShuffle => ContextJson::Quasishuffle,
        }
    }
}

impl From<ContextJson> for ProductKind {
    fn from(k: ContextJson) -> Self {
        match k {
            ContextJson::Shuffle => ProductKind::Shuffle,
            ContextJson::Quasishuffle => ProductKind::QuasiShuffle,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTermJson {
    /// Coefficients of `p(t) = c0 + c1 t + …` in absolute time.
    pub coeffs: Vec<f64>,
    pub series: SeriesJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum VelocityJson {
    Constant { series: SeriesJson },
    Polynomial { terms: Vec<PolyTermJson> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentJson {
    pub t0: f64,
    pub t1: f64,
    pub velocity: VelocityJson,
}

/// Driver (and model) file. `working_level` defaults to `level`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<AlphabetJson>,
    pub context: ContextJson,
    pub level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working_level: Option<u32>,
    pub segments: Vec<SegmentJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
}

impl DriverJson {
    pub fn from_driver(d: &Driver, working_level: Option<u32>) -> Self {
        let segments = d
            .segments()
            .iter()
            .map(|s| SegmentJson {
                t0: s.t0,
                t1: s.t1,
                velocity: match &s.velocity {
                    Velocity::Constant(v) => VelocityJson::Constant { series: SeriesJson::from_series(v, false) },
                    Velocity::Polynomial(terms) => VelocityJson::Polynomial {
                        terms: terms
                            .iter()
                            .map(|(p, x)| PolyTermJson { coeffs: p.coeffs().to_vec(), series: SeriesJson::from_series(x, false) })
                            .collect(),
                    },
                },
            })
            .collect();
        Self {
            alphabet: Some(AlphabetJson::from_alphabet(d.alphabet())),
            context: d.context().into(),
            level: d.level(),
            working_level: working_level.filter(|&l| l != d.level()),
            segments,
            meta: None,
        }
    }

    pub fn to_driver(&self) -> Res<Driver> {
        let top = match &self.alphabet {
            Some(j) => Some(Arc::new(j.to_alphabet("alphabet")?)),
            None => None,
        };
        // Without a top-level alphabet, the first series fixes it.
        let mut alphabet = top;
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, s) in self.segments.iter().enumerate() {
            let at = format!("segments[{i}].velocity");
            let velocity = match &s.velocity {
                VelocityJson::Constant { series } => {
                    let x = series.to_series(alphabet.as_ref(), &format!("{at}.series"))?;
                    alphabet.get_or_insert_with(|| x.alphabet().clone());
                    Velocity::Constant(x)
                }
                VelocityJson::Polynomial { terms } => {
                    if terms.is_empty() {
                        return invalid(&format!("{at}.terms"), "polynomial velocity without terms");
                    }
                    let mut out = Vec::with_capacity(terms.len());
                    for (k, t) in terms.iter().enumerate() {
                        if t.coeffs.iter().any(|c| !c.is_finite()) {
                            return invalid(&format!("{at}.terms[{k}].coeffs"), "coefficient is not finite");
                        }
                        let x = t.series.to_series(alphabet.as_ref(), &format!("{at}.terms[{k}].series"))?;
                        alphabet.get_or_insert_with(|| x.alphabet().clone());
                        out.push((Poly1::new(t.coeffs.clone()), x));
                    }
                    Velocity::Polynomial(out)
                }
            };
            segments.push(Segment { t0: s.t0, t1: s.t1, velocity });
        }
        let alphabet = match alphabet {
            Some(a) => a,
            None => return invalid("segments", "driver without segments"),
        };
        kernel("segments", Driver::new(&alphabet, self.context.into(), self.level, segments))
    }

    /// Working level: `working_level` if present, else `level`.
    pub fn model_level(&self) -> u32 {
        self.working_level.unwrap_or(self.level)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeJson {
    Geometric,
    Quasi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionJson {
    pub letter: String,
    pub series: SeriesJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationJson {
    pub mode: ModeJson,
    pub directions: Vec<DirectionJson>,
}

impl TranslationJson {
    pub fn from_translation(t: &Translation) -> Self {
        Self {
            mode: match t.mode() {
                TranslationMode::Geometric => ModeJson::Geometric,
                TranslationMode::Quasi => ModeJson::Quasi,
            },
            directions: t
                .directions()
                .map(|(a, v)| DirectionJson { letter: t.alphabet().name(a).into(), series: SeriesJson::from_series(v, false) })
                .collect(),
        }
    }

    /// Builds the translation over the context's alphabet.
    pub fn to_translation(&self, ctx: &HopfContext) -> Res<Translation> {
        let alphabet = ctx.alphabet();
        let mut dirs = Vec::with_capacity(self.directions.len());
        for (i, d) in self.directions.iter().enumerate() {
            let at = format!("directions[{i}]");
            let a = letter(alphabet, &d.letter, &format!("{at}.letter"))?;
            dirs.push((a, d.series.to_series(Some(alphabet), &format!("{at}.series"))?));
        }
        let mode = match self.mode {
            ModeJson::Geometric => TranslationMode::Geometric,
            ModeJson::Quasi => TranslationMode::Quasi,
        };
        kernel("directions", Translation::new(ctx, mode, dirs))
    }
}

fn letter(alphabet: &Alphabet, name: &str, path: &str) -> Res<Letter> {
    alphabet.letter(name).map_or_else(|| invalid(path, format!("unknown letter \"{name}\"")), Ok)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialJson {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub monomials: Vec<MonomialJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LetterFieldJson {
    pub letter: String,
    pub components: Vec<ComponentJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsJson {
    pub dimension: usize,
    pub fields: Vec<LetterFieldJson>,
}

impl FieldsJson {
    pub fn from_table(t: &FieldTable) -> Self {
        let a = t.alphabet();
        let fields = a
            .letters()
            .filter_map(|l| {
                t.base(l).map(|f| LetterFieldJson {
                    letter: a.name(l).into(),
                    components: f
                        .components()
                        .iter()
                        .map(|p| ComponentJson {
                            monomials: p.terms().map(|(e, c)| MonomialJson { exponents: e.clone(), coeff: c }).collect(),
                        })
                        .collect(),
                })
            })
            .collect();
        Self { dimension: t.dimension(), fields }
    }

    /// Field table over `alphabet` with word fields up to `level`.
    pub fn to_table(&self, alphabet: &Arc<Alphabet>, level: u32) -> Res<FieldTable> {
        let e = self.dimension;
        if e == 0 {
            return invalid("dimension", "must be positive");
        }
        let mut base = Vec::with_capacity(self.fields.len());
        for (i, f) in self.fields.iter().enumerate() {
            let at = format!("fields[{i}]");
            let a = letter(alphabet, &f.letter, &format!("{at}.letter"))?;
            if f.components.len() != e {
                return invalid(&format!("{at}.components"), format!("{} components, dimension is {e}", f.components.len()));
            }
            let mut comps = Vec::with_capacity(e);
            for (j, c) in f.components.iter().enumerate() {
                let terms = c
                    .monomials
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let mt = format!("{at}.components[{j}].monomials[{k}]");
                        if m.exponents.len() != e {
                            return invalid(&format!("{mt}.exponents"), format!("{} exponents, dimension is {e}", m.exponents.len()));
                        }
                        if !m.coeff.is_finite() {
                            return invalid(&format!("{mt}.coeff"), "coefficient is not finite");
                        }
                        Ok((m.exponents.clone(), m.coeff))
                    })
                    .collect::<Res<Vec<_>>>()?;
                comps.push(kernel(&format!("{at}.components[{j}]"), Polynomial::from_terms(e, terms))?);
            }
            base.push((a, kernel(&at, PolyVectorField::new(comps))?));
        }
        kernel("fields", FieldTable::new(alphabet, base, level))
    }
}

/// One exported basis element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisElementJson {
    pub grade: u32,
    pub lyndon_word: Vec<String>,
    pub series: SeriesJson,
}

pub fn basis_json(elements: &[LieBasisElement]) -> Vec<BasisElementJson> {
    elements
        .iter()
        .map(|e| {
            let a = e.series.alphabet();
            BasisElementJson {
                grade: e.grade(),
                lyndon_word: e.word.names(a).into_iter().map(String::from).collect(),
                series: SeriesJson::from_series(&e.series, true),
            }
        })
        .collect()
}
