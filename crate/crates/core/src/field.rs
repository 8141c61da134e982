//! Polynomial vector fields, the pre-Lie product and word-indexed fields.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::alphabet::{Alphabet, Letter};
use crate::error::{bail, Result};
use crate::hoffman::hoffman_exp_adjoint;
use crate::renorm::{Translation, TranslationMode};
use crate::series::TensorSeries;
use crate::word::{words_up_to, Word};

/// Real polynomial in `nvars` variables, stored as exponent vector → coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    /// The coordinate `y_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, 1.0)
    }

    pub fn monomial(nvars: usize, exponents: Vec<u32>, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(exponents, c);
        p
    }

    /// Builds from `(exponents, coeff)` pairs, checking arity.
    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, f64)>>(nvars: usize, terms: I) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                bail!(Structural, "monomial has {} exponents, expected {nvars}", e.len());
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let v = self.terms.entry(e.clone()).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn axpy(&self, lambda: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), lambda * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self::zero(self.nvars).axpy(lambda, self)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, &c) in &self.terms {
            for (b, &d) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, c * d);
            }
        }
        out
    }

    /// `∂p/∂y_i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, &c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * e[i] as f64);
            }
        }
        out
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| c * e.iter().zip(y).map(|(&k, &x)| crate::series::powi(x, k)).product::<f64>())
            .sum()
    }

    /// Largest coefficientwise difference.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).terms.values().fold(0.0, |m, &c| m.max(libm::fabs(c)))
    }
}

/// Vector field on `ℝᵉ` with polynomial components.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField {
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let e = components.len();
        if e == 0 {
            bail!(Structural, "vector field needs at least one component");
        }
        if let Some(j) = components.iter().position(|p| p.nvars() != e) {
            bail!(Structural, "component {j} has {} variables, expected {e}", components[j].nvars());
        }
        Ok(Self { components })
    }

    pub fn zero(e: usize) -> Self {
        Self { components: vec![Polynomial::zero(e); e] }
    }

    /// `y ↦ y`.
    pub fn identity(e: usize) -> Self {
        Self { components: (0..e).map(|i| Polynomial::var(e, i)).collect() }
    }

    /// `y ↦ A y` for a square matrix given by rows.
    pub fn linear(a: &[Vec<f64>]) -> Result<Self> {
        let e = a.len();
        let mut comps = Vec::with_capacity(e);
        for (j, row) in a.iter().enumerate() {
            if row.len() != e {
                bail!(Structural, "matrix row {j} has length {}, expected {e}", row.len());
            }
            let mut p = Polynomial::zero(e);
            for (i, &c) in row.iter().enumerate() {
                p = p.axpy(c, &Polynomial::var(e, i));
            }
            comps.push(p);
        }
        Self::new(comps)
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.dimension() != other.dimension() {
            bail!(Structural, "vector fields on ℝ^{} and ℝ^{}", self.dimension(), other.dimension());
        }
        Ok(())
    }

    pub fn axpy(&self, lambda: f64, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { components: self.components.iter().zip(&other.components).map(|(p, q)| p.axpy(lambda, q)).collect() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self { components: self.components.iter().map(|p| p.scale(lambda)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval(y)).collect()
    }

    /// `J[j][i] = ∂_i f^j`.
    pub fn jacobian(&self) -> Vec<Vec<Polynomial>> {
        let e = self.dimension();
        self.components.iter().map(|p| (0..e).map(|i| p.partial(i)).collect()).collect()
    }

    /// Largest coefficientwise difference.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.dimension() != other.dimension() {
            return f64::INFINITY;
        }
        self.components.iter().zip(&other.components).map(|(p, q)| p.distance(q)).fold(0.0, f64::max)
    }
}

/// Pre-Lie product `(f ▷ g)^j = f^i ∂_i g^j`.
pub fn prelie(f: &PolyVectorField, g: &PolyVectorField) -> Result<PolyVectorField> {
    f.check(g)?;
    let e = f.dimension();
    let mut comps = Vec::with_capacity(e);
    for gj in &g.components {
        let mut acc = Polynomial::zero(e);
        for (i, fi) in f.components.iter().enumerate() {
            let d = gj.partial(i);
            if !d.is_zero() {
                acc = acc.add(&fi.mul(&d));
            }
        }
        comps.push(acc);
    }
    Ok(PolyVectorField { components: comps })
}

/// `[f, g]_▷ = f ▷ g − g ▷ f`.
pub fn prelie_bracket(f: &PolyVectorField, g: &PolyVectorField) -> Result<PolyVectorField> {
    prelie(f, g)?.sub(&prelie(g, f)?)
}

/// Which word fields a series is mapped to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldMode {
    /// `x ↦ Σ ⟨x,w⟩ f_w`.
    Geometric,
    /// `x ↦ Σ ⟨x,w⟩ f̂_w = f_{Φ*_H x}`.
    Quasi,
}

/// Base fields `f_a` and the derived word fields
/// `f_{a_1…a_n} = f_{a_1} ▷ (… ▷ f_{a_n})` up to a weighted level.
/// The empty word carries the identity field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTable {
    alphabet: Arc<Alphabet>,
    dimension: usize,
    base: Vec<Option<PolyVectorField>>,
    level: u32,
    words: BTreeMap<Word, PolyVectorField>,
}

impl FieldTable {
    /// Precomputes word fields up to `level`; letters may be left without a
    /// field, in which case words using them are unavailable.
    pub fn new(alphabet: &Arc<Alphabet>, base: Vec<(Letter, PolyVectorField)>, level: u32) -> Result<Self> {
        let mut slots: Vec<Option<PolyVectorField>> = vec![None; alphabet.len()];
        let mut dimension = None;
        for (a, f) in base {
            if a.index() >= alphabet.len() {
                bail!(Structural, "field for unknown letter index {}", a.0);
            }
            match dimension {
                None => dimension = Some(f.dimension()),
                Some(e) if e != f.dimension() => {
                    bail!(Structural, "field for \"{}\" has dimension {}, expected {e}", alphabet.name(a), f.dimension())
                }
                _ => {}
            }
            if slots[a.index()].replace(f).is_some() {
                bail!(Structural, "two fields for letter \"{}\"", alphabet.name(a));
            }
        }
        let dimension = match dimension {
            Some(e) => e,
            None => bail!(Structural, "field table without any base field"),
        };
        Self::build(alphabet, dimension, slots, level)
    }

    fn build(alphabet: &Arc<Alphabet>, dimension: usize, base: Vec<Option<PolyVectorField>>, level: u32) -> Result<Self> {
        let mut words = BTreeMap::new();
        for w in words_up_to(alphabet, level) {
            let field = match w.letters().split_first() {
                None => PolyVectorField::identity(dimension),
                Some((&a, [])) => match &base[a.index()] {
                    Some(f) => f.clone(),
                    None => continue,
                },
                Some((&a, rest)) => {
                    let tail = Word::new(alphabet, rest.to_vec());
                    match (&base[a.index()], words.get(&tail)) {
                        (Some(f), Some(g)) => prelie(f, g)?,
                        _ => continue,
                    }
                }
            };
            words.insert(w, field);
        }
        Ok(Self { alphabet: alphabet.clone(), dimension, base, level, words })
    }

    /// Same base fields, word fields recomputed up to `level`.
    pub fn with_level(&self, level: u32) -> Result<Self> {
        if level == self.level {
            return Ok(self.clone());
        }
        Self::build(&self.alphabet, self.dimension, self.base.clone(), level)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn base(&self, a: Letter) -> Option<&PolyVectorField> {
        self.base[a.index()].as_ref()
    }

    /// `f_w`.
    pub fn word_field(&self, w: &Word) -> Result<&PolyVectorField> {
        if w.weight() > self.level {
            bail!(Precondition, "word of weight {} above field table level {}", w.weight(), self.level);
        }
        match self.words.get(w) {
            Some(f) => Ok(f),
            None => {
                let missing = w.letters().iter().find(|a| self.base[a.index()].is_none()).copied();
                match missing {
                    Some(a) => bail!(Structural, "no vector field for letter \"{}\"", self.alphabet.name(a)),
                    None => bail!(Structural, "word field unavailable"),
                }
            }
        }
    }

    /// `Σ_w ⟨x,w⟩ f_w` (geometric) or `f̂_x = f_{Φ*_H x}` (quasi).
    pub fn field_for(&self, x: &TensorSeries, mode: FieldMode) -> Result<PolyVectorField> {
        if !(Arc::ptr_eq(x.alphabet(), &self.alphabet) || **x.alphabet() == *self.alphabet) {
            bail!(Structural, "series and field table live over different alphabets");
        }
        let x = match mode {
            FieldMode::Geometric => x.clone(),
            FieldMode::Quasi => hoffman_exp_adjoint(x)?,
        };
        let mut acc = PolyVectorField::zero(self.dimension);
        for (w, c) in x.terms() {
            acc = acc.axpy(c, self.word_field(w)?)?;
        }
        Ok(acc)
    }

    /// The table built on the quasi base fields
    /// `f̂_a = Σ_{{a_1…a_n} = a} f_{a_1…a_n} / n!`; its word fields are `f̂_w`.
    /// Every letter needs a base field.
    pub fn hat(&self) -> Result<FieldTable> {
        if let Some(a) = self.alphabet.letters().find(|a| self.base[a.index()].is_none()) {
            bail!(Structural, "quasi fields need a base field for every letter, \"{}\" has none", self.alphabet.name(a));
        }
        let top = self.alphabet.letters().map(|a| self.alphabet.weight(a)).max().unwrap_or(1);
        let helper = if top > self.level { self.with_level(top)? } else { self.clone() };
        let mut base = Vec::with_capacity(self.alphabet.len());
        for a in self.alphabet.letters() {
            let mut acc = PolyVectorField::zero(self.dimension);
            for seq in self.alphabet.decompositions(a) {
                let n = seq.len();
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                let w = Word::new(&self.alphabet, seq);
                acc = acc.axpy(1.0 / fact, helper.word_field(&w)?)?;
            }
            base.push(Some(acc));
        }
        Self::build(&self.alphabet, self.dimension, base, self.level)
    }

    /// Translated base fields: `f_a + f_{v_a}` (geometric) or
    /// `f_a + f_{Φ*_H u_a}` (quasi, to be used with [`FieldMode::Quasi`]).
    pub fn translated(&self, t: &Translation) -> Result<FieldTable> {
        if !(Arc::ptr_eq(t.alphabet(), &self.alphabet) || **t.alphabet() == *self.alphabet) {
            bail!(Structural, "translation and field table live over different alphabets");
        }
        let top = t.max_grade();
        let helper = if top > self.level { self.with_level(top)? } else { self.clone() };
        let mut base = self.base.clone();
        for (a, v) in t.directions() {
            let f = match &self.base[a.index()] {
                Some(f) => f,
                None => bail!(Structural, "direction for \"{}\" but no base field", self.alphabet.name(a)),
            };
            let shift = match t.mode() {
                TranslationMode::Geometric => helper.field_for(v, FieldMode::Geometric)?,
                TranslationMode::Quasi => helper.field_for(&hoffman_exp_adjoint(v)?, FieldMode::Geometric)?,
            };
            base[a.index()] = Some(f.add(&shift)?);
        }
        Self::build(&self.alphabet, self.dimension, base, self.level)
    }
}
