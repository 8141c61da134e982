//! Hoffman exponential and logarithm between shuffle and quasi-shuffle
//! algebras, and their adjoints.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::alphabet::{Alphabet, Letter};
use crate::error::{bail, Result};
use crate::series::TensorSeries;
use crate::word::Word;

/// Largest word length accepted by composition enumeration.
pub const MAX_COMPOSITION_ORDER: usize = 12;

/// All compositions of `n` in colexicographic order.
pub fn compositions(n: usize) -> Result<Vec<Vec<usize>>> {
    if n > MAX_COMPOSITION_ORDER {
        bail!(Capacity, "compositions of {n} exceed the cap {MAX_COMPOSITION_ORDER}");
    }
    if n == 0 {
        return Ok(alloc::vec![Vec::new()]);
    }
    let mut out = Vec::with_capacity(1 << (n - 1));
    // Bit k of the mask set means a cut after position k+1.
    for mask in 0u32..(1 << (n - 1)) {
        let mut parts = Vec::new();
        let mut len = 1;
        for k in 0..n - 1 {
            if mask & (1 << k) != 0 {
                parts.push(len);
                len = 1;
            } else {
                len += 1;
            }
        }
        parts.push(len);
        out.push(parts);
    }
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    Ok(out)
}

/// `{w}_I`: brackets consecutive blocks of `w` of sizes `I`; `None` if any
/// block brackets to zero.
pub fn bracket_by_composition(alphabet: &Alphabet, w: &Word, parts: &[usize]) -> Option<Word> {
    let mut letters = Vec::with_capacity(parts.len());
    let mut start = 0;
    for &p in parts {
        letters.push(alphabet.fold_bracket(&w.letters()[start..start + p])?);
        start += p;
    }
    Some(Word::new(alphabet, letters))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `Φ_H(w) = Σ_I {w}_I / I!`.
pub fn hoffman_exp(alphabet: &Arc<Alphabet>, w: &Word) -> Result<TensorSeries> {
    hoffman_word(alphabet, w, |parts| 1.0 / parts.iter().map(|&p| factorial(p)).product::<f64>())
}

/// `Ψ_H(w) = Σ_I (−1)^{|w|−|I|} {w}_I / Π i_k`.
pub fn hoffman_log(alphabet: &Arc<Alphabet>, w: &Word) -> Result<TensorSeries> {
    let n = w.len();
    hoffman_word(alphabet, w, |parts| {
        let sign = if (n - parts.len()) % 2 == 0 { 1.0 } else { -1.0 };
        sign / parts.iter().map(|&p| p as f64).product::<f64>()
    })
}

fn hoffman_word<F: Fn(&[usize]) -> f64>(alphabet: &Arc<Alphabet>, w: &Word, coeff: F) -> Result<TensorSeries> {
    let mut out = TensorSeries::zero(alphabet, w.weight());
    for parts in compositions(w.len())? {
        if let Some(v) = bracket_by_composition(alphabet, w, &parts) {
            out.add_term(v, coeff(&parts));
        }
    }
    Ok(out)
}

/// Linear extension of [`hoffman_exp`].
pub fn hoffman_exp_series(x: &TensorSeries) -> Result<TensorSeries> {
    let a = x.alphabet().clone();
    x.map_words(x.level(), |w| hoffman_exp(&a, w))
}

/// Linear extension of [`hoffman_log`].
pub fn hoffman_log_series(x: &TensorSeries) -> Result<TensorSeries> {
    let a = x.alphabet().clone();
    x.map_words(x.level(), |w| hoffman_log(&a, w))
}

/// Image of a letter under `Φ*_H` (`inverse = false`) or `Ψ*_H`.
pub fn adjoint_letter_image(alphabet: &Arc<Alphabet>, a: Letter, inverse: bool) -> TensorSeries {
    let mut out = TensorSeries::zero(alphabet, alphabet.weight(a));
    for seq in alphabet.decompositions(a) {
        let n = seq.len();
        let c = if inverse {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            sign / n as f64
        } else {
            1.0 / factorial(n)
        };
        out.add_term(Word::new(alphabet, seq), c);
    }
    out
}

/// Letterwise-multiplicative map on words with precomputed letter images.
pub(crate) struct LetterMorphism {
    images: Vec<TensorSeries>,
}

impl LetterMorphism {
    pub(crate) fn new(images: Vec<TensorSeries>) -> Self {
        Self { images }
    }

    pub(crate) fn hoffman(alphabet: &Arc<Alphabet>, inverse: bool) -> Self {
        Self::new(alphabet.letters().map(|a| adjoint_letter_image(alphabet, a, inverse)).collect())
    }

    pub(crate) fn apply_word(&self, alphabet: &Arc<Alphabet>, w: &Word, level: u32) -> Result<TensorSeries> {
        let mut acc = TensorSeries::one(alphabet, level);
        for &a in w.letters() {
            acc = acc.concat(&self.images[a.index()], level)?;
        }
        Ok(acc)
    }

    pub(crate) fn apply(&self, x: &TensorSeries, level: u32) -> Result<TensorSeries> {
        let a = x.alphabet().clone();
        x.map_words(level, |w| self.apply_word(&a, w, level))
    }
}

/// `Φ*_H`, the adjoint of the Hoffman exponential (grade preserving).
pub fn hoffman_exp_adjoint(x: &TensorSeries) -> Result<TensorSeries> {
    if x.alphabet().has_trivial_bracket() {
        return Ok(x.clone());
    }
    LetterMorphism::hoffman(x.alphabet(), false).apply(x, x.level())
}

/// `Ψ*_H`, the adjoint of the Hoffman logarithm and inverse of `Φ*_H`.
pub fn hoffman_log_adjoint(x: &TensorSeries) -> Result<TensorSeries> {
    if x.alphabet().has_trivial_bracket() {
        return Ok(x.clone());
    }
    LetterMorphism::hoffman(x.alphabet(), true).apply(x, x.level())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_colex() {
        let c = compositions(3).unwrap();
        assert_eq!(c, alloc::vec![alloc::vec![1, 1, 1], alloc::vec![2, 1], alloc::vec![1, 2], alloc::vec![3]]);
        assert_eq!(compositions(12).unwrap().len(), 2048);
        assert!(compositions(13).is_err());
    }

    #[test]
    fn exp_and_log_of_two_letters() {
        let a = Arc::new(Alphabet::multi_index(2, 2).unwrap());
        let w = Word::parse(&a, &["(1,0)", "(0,1)"]).unwrap();
        let e = hoffman_exp(&a, &w).unwrap();
        assert_eq!(e.pair(&w), 1.0);
        assert_eq!(e.pair_names(&["(1,1)"]), 0.5);
        let l = hoffman_log(&a, &w).unwrap();
        assert_eq!(l.pair_names(&["(1,1)"]), -0.5);
    }
}
