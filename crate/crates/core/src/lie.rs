//! Lyndon bases, bracket expansion and orthonormal Lie bases.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::alphabet::Alphabet;
use crate::error::{bail, Result};
use crate::hoffman::hoffman_log_adjoint;
use crate::hopf::HopfContext;
use crate::series::TensorSeries;
use crate::word::{words_up_to, Word};

/// A Lyndon word with its bracketed expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct LieBasisElement {
    pub word: Word,
    pub series: TensorSeries,
}

impl LieBasisElement {
    pub fn grade(&self) -> u32 {
        self.word.weight()
    }
}

/// Lyndon words of weighted length at most `level`, bracketed by standard
/// factorization, in canonical word order.
#[derive(Clone, Debug, PartialEq)]
pub struct LyndonBasis {
    alphabet: Arc<Alphabet>,
    level: u32,
    elements: Vec<LieBasisElement>,
}

/// Image of a [`LyndonBasis`] under `Ψ*_H`: quasi-shuffle primitive elements.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiLieBasis {
    pub elements: Vec<LieBasisElement>,
}

/// True when `w` is strictly smaller than each of its proper suffixes
/// (letter order only).
pub fn is_lyndon(w: &[crate::alphabet::Letter]) -> bool {
    !w.is_empty() && (1..w.len()).all(|k| w < &w[k..])
}

/// `w = uv` with `v` the longest proper Lyndon suffix.
pub fn standard_factorization(alphabet: &Alphabet, w: &Word) -> Option<(Word, Word)> {
    let l = w.letters();
    (1..l.len()).find(|&k| is_lyndon(&l[k..])).map(|k| w.split_at(alphabet, k))
}

/// Bracketing of a Lyndon word expanded into a series at level `‖w‖`.
pub fn lyndon_bracket(alphabet: &Arc<Alphabet>, w: &Word) -> Result<TensorSeries> {
    if !is_lyndon(w.letters()) {
        bail!(Precondition, "\"{}\" is not a Lyndon word", alphabet.render(w.letters()));
    }
    let level = w.weight();
    match standard_factorization(alphabet, w) {
        None => Ok(TensorSeries::word(alphabet, level, w.clone(), 1.0)),
        Some((u, v)) => {
            let pu = lyndon_bracket(alphabet, &u)?.truncate(level);
            let pv = lyndon_bracket(alphabet, &v)?.truncate(level);
            pu.commutator(&pv, level)
        }
    }
}

/// All Lyndon basis elements of weighted length `1..=level`.
pub fn lyndon_basis(alphabet: &Arc<Alphabet>, level: u32) -> Result<LyndonBasis> {
    if level == 0 {
        bail!(Precondition, "Lyndon basis needs level ≥ 1");
    }
    let mut elements = Vec::new();
    for w in words_up_to(alphabet, level) {
        if is_lyndon(w.letters()) {
            let series = lyndon_bracket(alphabet, &w)?.truncate(level);
            elements.push(LieBasisElement { word: w, series });
        }
    }
    Ok(LyndonBasis { alphabet: alphabet.clone(), level, elements })
}

impl LyndonBasis {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn elements(&self) -> &[LieBasisElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements of weighted grade `g`.
    pub fn grade(&self, g: u32) -> impl Iterator<Item = &LieBasisElement> + '_ {
        self.elements.iter().filter(move |e| e.grade() == g)
    }

    /// Coordinates of a Lie element in this basis. Each bracket equals its
    /// Lyndon word plus lexicographically larger words, so peeling elements
    /// off in canonical order is triangular.
    pub fn coordinates(&self, x: &TensorSeries) -> Result<Vec<f64>> {
        let mut rest = x.truncate(self.level);
        let mut coords = alloc::vec![0.0; self.elements.len()];
        for (i, e) in self.elements.iter().enumerate() {
            let c = rest.pair(&e.word);
            if c != 0.0 {
                coords[i] = c;
                rest = rest.axpy(-c, &e.series)?;
            }
        }
        Ok(coords)
    }
}

/// Gram–Schmidt within each grade (classical, with one re-orthogonalization
/// pass) under the word inner product.
pub fn orthonormal_lie_basis(basis: &LyndonBasis) -> Result<Vec<TensorSeries>> {
    let mut out = Vec::with_capacity(basis.len());
    for g in 1..=basis.level {
        let mut block: Vec<TensorSeries> = Vec::new();
        for e in basis.grade(g) {
            let mut v = e.series.clone();
            let scale = libm::sqrt(v.inner(&v));
            for _ in 0..2 {
                let mut corr = v.clone();
                for q in &block {
                    corr = corr.axpy(-v.inner(q), q)?;
                }
                v = corr;
            }
            let norm = libm::sqrt(v.inner(&v));
            if !(norm > 1e-10 * scale) {
                bail!(Degeneracy, "Gram matrix is numerically singular at grade {g}");
            }
            block.push(v.scale(1.0 / norm));
        }
        out.extend(block);
    }
    Ok(out)
}

/// `Ψ*_H` applied to each basis element.
pub fn quasi_lie_basis(basis: &LyndonBasis) -> Result<QuasiLieBasis> {
    let elements = basis
        .elements
        .iter()
        .map(|e| Ok(LieBasisElement { word: e.word.clone(), series: hoffman_log_adjoint(&e.series)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuasiLieBasis { elements })
}

/// Lie membership under the context's product.
pub fn is_lie(x: &TensorSeries, level: u32, ctx: &HopfContext, tol: f64) -> bool {
    ctx.is_lie(x, level, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyndon_words_d2_n3() {
        let a = Arc::new(Alphabet::standard(2).unwrap());
        let b = lyndon_basis(&a, 3).unwrap();
        let words: Vec<_> = b.elements().iter().map(|e| e.word.names(&a).join("")).collect();
        assert_eq!(words, ["1", "2", "12", "112", "122"]);
        let e = &b.elements()[2].series;
        assert_eq!(e.pair_names(&["1", "2"]), 1.0);
        assert_eq!(e.pair_names(&["2", "1"]), -1.0);
    }

    #[test]
    fn coordinates_recover_combination() {
        let a = Arc::new(Alphabet::standard(2).unwrap());
        let b = lyndon_basis(&a, 4).unwrap();
        let mut x = TensorSeries::zero(&a, 4);
        for (i, e) in b.elements().iter().enumerate() {
            x = x.axpy(0.5 + i as f64, &e.series).unwrap();
        }
        let c = b.coordinates(&x).unwrap();
        for (i, v) in c.iter().enumerate() {
            assert!((v - (0.5 + i as f64)).abs() < 1e-12);
        }
    }
}
