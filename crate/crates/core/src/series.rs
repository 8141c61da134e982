//! Truncated tensor series.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::alphabet::{Alphabet, Letter};
use crate::error::{bail, Result};
use crate::word::Word;

/// A linear combination of words of weighted length at most `level`.
///
/// Zero coefficients are never stored and iteration follows the canonical
/// word order.
#[derive(Clone, Debug)]
pub struct TensorSeries {
    alphabet: Arc<Alphabet>,
    level: u32,
    coeffs: BTreeMap<Word, f64>,
}

impl PartialEq for TensorSeries {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level && self.same_alphabet(other) && self.coeffs == other.coeffs
    }
}

impl TensorSeries {
    pub fn zero(alphabet: &Arc<Alphabet>, level: u32) -> Self {
        Self { alphabet: alphabet.clone(), level, coeffs: BTreeMap::new() }
    }

    /// The unit `𝟏`.
    pub fn one(alphabet: &Arc<Alphabet>, level: u32) -> Self {
        Self::word(alphabet, level, Word::empty(), 1.0)
    }

    /// `c · w`, or zero if `‖w‖ > level`.
    pub fn word(alphabet: &Arc<Alphabet>, level: u32, w: Word, c: f64) -> Self {
        let mut s = Self::zero(alphabet, level);
        s.add_term(w, c);
        s
    }

    /// The letter `e_a`.
    pub fn letter(alphabet: &Arc<Alphabet>, level: u32, a: Letter) -> Self {
        Self::word(alphabet, level, Word::letter(alphabet, a), 1.0)
    }

    /// Builds a series from named words, e.g. `&[(&["1", "2"], 0.5)]`.
    pub fn from_names(alphabet: &Arc<Alphabet>, level: u32, terms: &[(&[&str], f64)]) -> Result<Self> {
        let mut s = Self::zero(alphabet, level);
        for (names, c) in terms {
            let w = Word::parse(alphabet, names)?;
            if w.weight() > level {
                bail!(Precondition, "word of weight {} exceeds level {level}", w.weight());
            }
            s.add_term(w, *c);
        }
        Ok(s)
    }

    /// Builds a series from explicit terms; words above `level` are rejected.
    pub fn from_terms<I: IntoIterator<Item = (Word, f64)>>(alphabet: &Arc<Alphabet>, level: u32, terms: I) -> Result<Self> {
        let mut s = Self::zero(alphabet, level);
        for (w, c) in terms {
            if w.weight() > level {
                bail!(Precondition, "word of weight {} exceeds level {level}", w.weight());
            }
            if w.letters().iter().any(|l| l.index() >= alphabet.len()) {
                bail!(Structural, "word uses a letter outside the alphabet");
            }
            s.add_term(w, c);
        }
        Ok(s)
    }

    /// Adds `c·w` in place; words above the level are dropped.
    pub(crate) fn add_term(&mut self, w: Word, c: f64) {
        if c == 0.0 || w.weight() > self.level {
            return;
        }
        let entry = self.coeffs.entry(w);
        match entry {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, f64)> + '_ {
        self.coeffs.iter().map(|(w, &c)| (w, c))
    }

    /// `⟨x, w⟩`, zero when absent.
    pub fn pair(&self, w: &Word) -> f64 {
        self.coeffs.get(w).copied().unwrap_or(0.0)
    }

    /// `⟨x, w⟩` for a word given by letter names; unknown names give zero.
    pub fn pair_names(&self, names: &[&str]) -> f64 {
        match Word::parse(&self.alphabet, names) {
            Ok(w) => self.pair(&w),
            Err(_) => 0.0,
        }
    }

    /// `⟨x, 𝟏⟩`.
    pub fn constant(&self) -> f64 {
        self.pair(&Word::empty())
    }

    pub fn same_alphabet(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.alphabet, &other.alphabet) || *self.alphabet == *other.alphabet
    }

    pub(crate) fn check_alphabet(&self, other: &Self) -> Result<()> {
        if !self.same_alphabet(other) {
            bail!(Structural, "series live over different alphabets");
        }
        Ok(())
    }

    /// Largest weighted length carrying a non-zero coefficient (0 for zero).
    pub fn max_grade(&self) -> u32 {
        self.coeffs.keys().map(Word::weight).max().unwrap_or(0)
    }

    /// Homogeneous component of weighted grade `g`.
    pub fn grade(&self, g: u32) -> Self {
        let coeffs = self.coeffs.iter().filter(|(w, _)| w.weight() == g).map(|(w, &c)| (w.clone(), c)).collect();
        Self { alphabet: self.alphabet.clone(), level: self.level, coeffs }
    }

    /// `x + y` at the larger of the two levels.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    /// `x − y` at the larger of the two levels.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `x + λ y` at the larger of the two levels.
    pub fn axpy(&self, lambda: f64, other: &Self) -> Result<Self> {
        self.check_alphabet(other)?;
        let mut out = self.clone();
        out.level = self.level.max(other.level);
        for (w, &c) in &other.coeffs {
            out.add_term(w.clone(), lambda * c);
        }
        Ok(out)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        let mut out = Self::zero(&self.alphabet, self.level);
        for (w, &c) in &self.coeffs {
            out.add_term(w.clone(), lambda * c);
        }
        out
    }

    /// Dilation `δ_λ`: multiplies grade `n` by `λⁿ`.
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut out = Self::zero(&self.alphabet, self.level);
        for (w, &c) in &self.coeffs {
            out.add_term(w.clone(), c * powi(lambda, w.weight()));
        }
        out
    }

    /// Truncated concatenation product `x ⊗_N y`.
    pub fn concat(&self, other: &Self, level: u32) -> Result<Self> {
        self.check_alphabet(other)?;
        let mut out = Self::zero(&self.alphabet, level);
        for (u, &a) in &self.coeffs {
            if u.weight() > level {
                break;
            }
            for (v, &b) in &other.coeffs {
                if u.weight() + v.weight() > level {
                    break;
                }
                out.add_term(u.concat(v), a * b);
            }
        }
        Ok(out)
    }

    /// `[x, y] = x⊗y − y⊗x` truncated at `level`.
    pub fn commutator(&self, other: &Self, level: u32) -> Result<Self> {
        self.concat(other, level)?.sub(&other.concat(self, level)?)
    }

    /// Drops all words with `‖w‖ > m`; requires `m ≤ level`.
    pub fn project(&self, m: u32) -> Result<Self> {
        if m > self.level {
            bail!(Precondition, "cannot project level {} series to higher level {m}", self.level);
        }
        Ok(self.truncate(m))
    }

    /// Re-levels the series: projects when `m` is smaller, embeds otherwise.
    pub fn truncate(&self, m: u32) -> Self {
        let coeffs = self.coeffs.iter().filter(|(w, _)| w.weight() <= m).map(|(w, &c)| (w.clone(), c)).collect();
        Self { alphabet: self.alphabet.clone(), level: m, coeffs }
    }

    /// Truncated exponential `Σ_{n≤N} x^{⊗n}/n!`; requires `⟨x,𝟏⟩ = 0`.
    pub fn exp_trunc(&self, level: u32) -> Result<Self> {
        if self.constant() != 0.0 {
            bail!(Domain, "exp_trunc needs a vanishing unit coefficient, got {}", self.constant());
        }
        let x = self.truncate(level);
        let mut out = Self::one(&self.alphabet, level);
        let mut power = Self::one(&self.alphabet, level);
        for n in 1..=level {
            power = power.concat(&x, level)?.scale(1.0 / n as f64);
            if power.is_zero() {
                break;
            }
            out = out.add(&power)?;
        }
        Ok(out)
    }

    /// Truncated logarithm `Σ (−1)^{n+1}(g−𝟏)^{⊗n}/n`; requires `⟨g,𝟏⟩ = 1`.
    pub fn log_trunc(&self, level: u32) -> Result<Self> {
        let y = self.unit_offset()?.truncate(level);
        let mut out = Self::zero(&self.alphabet, level);
        let mut power = Self::one(&self.alphabet, level);
        for n in 1..=level {
            power = power.concat(&y, level)?;
            if power.is_zero() {
                break;
            }
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            out = out.axpy(sign / n as f64, &power)?;
        }
        Ok(out)
    }

    /// Inverse of a series with unit coefficient 1: `Σ_n (𝟏 − g)^{⊗n}`.
    pub fn inverse(&self) -> Result<Self> {
        let y = self.unit_offset()?.scale(-1.0);
        let mut out = Self::one(&self.alphabet, self.level);
        let mut power = Self::one(&self.alphabet, self.level);
        for _ in 1..=self.level {
            power = power.concat(&y, self.level)?;
            if power.is_zero() {
                break;
            }
            out = out.add(&power)?;
        }
        Ok(out)
    }

    // g − 𝟏, after checking ⟨g,𝟏⟩ = 1 up to rounding.
    fn unit_offset(&self) -> Result<Self> {
        let c = self.constant();
        if libm::fabs(c - 1.0) > 1e-9 {
            bail!(Domain, "expected unit coefficient 1, got {c}");
        }
        let mut y = self.clone();
        y.coeffs.remove(&Word::empty());
        Ok(y)
    }

    /// Word inner product (distinct words orthonormal).
    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs.iter().map(|(w, &c)| c * other.pair(w)).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, &c| m.max(libm::fabs(c)))
    }

    /// Max coefficientwise distance; infinite for different alphabets.
    pub fn distance(&self, other: &Self) -> f64 {
        match self.sub(other) {
            Ok(d) => d.norm_inf(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Re-expresses the series over `target` by renaming letters; every
    /// letter must exist in `target` with the same weight.
    pub fn embed(&self, target: &Arc<Alphabet>) -> Result<Self> {
        let mut map = Vec::with_capacity(self.alphabet.len());
        for a in self.alphabet.letters() {
            let b = target.require(self.alphabet.name(a))?;
            if target.weight(b) != self.alphabet.weight(a) {
                bail!(Structural, "letter \"{}\" changes weight under embedding", self.alphabet.name(a));
            }
            map.push(b);
        }
        let mut out = Self::zero(target, self.level);
        for (w, &c) in &self.coeffs {
            let letters = w.letters().iter().map(|l| map[l.index()]).collect();
            out.add_term(Word::new(target, letters), c);
        }
        Ok(out)
    }

    /// Applies a linear map given on words, truncating the result at `level`.
    pub fn map_words<F>(&self, level: u32, mut f: F) -> Result<Self>
    where
        F: FnMut(&Word) -> Result<TensorSeries>,
    {
        let mut out = Self::zero(&self.alphabet, level);
        for (w, &c) in &self.coeffs {
            let image = f(w)?;
            for (v, d) in image.terms() {
                out.add_term(v.clone(), c * d);
            }
        }
        Ok(out)
    }
}

pub(crate) fn powi(x: f64, n: u32) -> f64 {
    let mut r = 1.0;
    for _ in 0..n {
        r *= x;
    }
    r
}

impl fmt::Display for TensorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·[{}]", self.alphabet.render(w.letters()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std2() -> Arc<Alphabet> {
        Arc::new(Alphabet::standard(2).unwrap())
    }

    #[test]
    fn concat_truncates() {
        let a = std2();
        let x = TensorSeries::from_names(&a, 1, &[(&[], 1.0), (&["1"], 1.0)]).unwrap();
        let y = x.concat(&x, 1).unwrap();
        assert_eq!(y.constant(), 1.0);
        assert_eq!(y.pair_names(&["1"]), 2.0);
        assert_eq!(y.len(), 2);
    }

    #[test]
    fn exp_of_letter_matches_power_series() {
        let a = std2();
        let x = TensorSeries::from_names(&a, 2, &[(&["1"], 3.0)]).unwrap();
        let g = x.exp_trunc(2).unwrap();
        assert_eq!(g.pair_names(&["1", "1"]), 4.5);
        assert!(TensorSeries::letter(&a, 2, Letter(0)).scale(-1.0).add(&TensorSeries::one(&a, 2)).unwrap().exp_trunc(2).is_err());
    }

    #[test]
    fn inverse_and_project_errors() {
        let a = std2();
        let x = TensorSeries::from_names(&a, 3, &[(&["1"], 0.5), (&["1", "2"], 2.0)]).unwrap();
        let g = x.exp_trunc(3).unwrap();
        let e = g.concat(&g.inverse().unwrap(), 3).unwrap();
        assert!(e.distance(&TensorSeries::one(&a, 3)) < 1e-15);
        assert!(g.project(4).is_err());
        assert!(x.log_trunc(3).is_err());
    }
}
