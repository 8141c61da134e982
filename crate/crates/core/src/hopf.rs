//! Shuffle and quasi-shuffle products and character predicates.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::alphabet::Alphabet;
use crate::error::Result;
use crate::series::TensorSeries;
use crate::word::{words_up_to, Word};

/// Which commutative product the coalgebra side uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKind {
    /// Plain shuffle `⧢` (geometric).
    Shuffle,
    /// Quasi-shuffle `⧢̂` driven by the alphabet's bracket (quasi-geometric).
    QuasiShuffle,
}

/// An alphabet together with the product used for characters and Lie
/// membership. Products are recomputed on demand, so the context is a plain
/// immutable value.
#[derive(Clone, Debug, PartialEq)]
pub struct HopfContext {
    alphabet: Arc<Alphabet>,
    kind: ProductKind,
}

type Poly = BTreeMap<Word, f64>;

impl HopfContext {
    pub fn new(alphabet: &Arc<Alphabet>, kind: ProductKind) -> Self {
        Self { alphabet: alphabet.clone(), kind }
    }

    pub fn shuffle(alphabet: &Arc<Alphabet>) -> Self {
        Self::new(alphabet, ProductKind::Shuffle)
    }

    pub fn quasi(alphabet: &Arc<Alphabet>) -> Self {
        Self::new(alphabet, ProductKind::QuasiShuffle)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    /// `u ⧢ v` or `u ⧢̂ v` depending on the context.
    pub fn product(&self, u: &Word, v: &Word) -> TensorSeries {
        let bracket = self.kind == ProductKind::QuasiShuffle;
        let poly = product_poly(&self.alphabet, u, v, bracket);
        self.to_series(poly, u.weight() + v.weight())
    }

    /// Bilinear extension of [`product`](Self::product), truncated at `level`.
    pub fn product_series(&self, x: &TensorSeries, y: &TensorSeries, level: u32) -> Result<TensorSeries> {
        x.check_alphabet(y)?;
        let bracket = self.kind == ProductKind::QuasiShuffle;
        let mut out = TensorSeries::zero(&self.alphabet, level);
        for (u, a) in x.terms() {
            for (v, b) in y.terms() {
                if u.weight() + v.weight() > level {
                    continue;
                }
                for (w, c) in product_poly(&self.alphabet, u, v, bracket) {
                    out.add_term(w, a * b * c);
                }
            }
        }
        Ok(out)
    }

    fn to_series(&self, poly: Poly, level: u32) -> TensorSeries {
        let mut out = TensorSeries::zero(&self.alphabet, level);
        for (w, c) in poly {
            out.add_term(w, c);
        }
        out
    }

    /// Largest violation of `⟨x,𝟏⟩ = 1` and `⟨x, u⋆v⟩ = ⟨x,u⟩⟨x,v⟩` over all
    /// non-empty `u, v` with `‖u‖+‖v‖ ≤ level`.
    pub fn character_residual(&self, x: &TensorSeries, level: u32) -> f64 {
        let mut worst = libm::fabs(x.constant() - 1.0);
        self.for_each_pair(level, |u, v, uv| {
            let lhs = pair_poly(x, uv);
            let r = libm::fabs(lhs - x.pair(u) * x.pair(v));
            if r > worst {
                worst = r;
            }
        });
        worst
    }

    /// Largest violation of `⟨x,𝟏⟩ = 0` and `⟨x, u⋆v⟩ = 0` over non-empty
    /// `u, v` with `‖u‖+‖v‖ ≤ level`.
    pub fn inf_character_residual(&self, x: &TensorSeries, level: u32) -> f64 {
        let mut worst = libm::fabs(x.constant());
        self.for_each_pair(level, |_, _, uv| {
            let r = libm::fabs(pair_poly(x, uv));
            if r > worst {
                worst = r;
            }
        });
        worst
    }

    /// Character test with relative tolerance `tol · max(1, ‖x‖∞²)`.
    pub fn is_character(&self, x: &TensorSeries, level: u32, tol: f64) -> bool {
        let scale = x.norm_inf().max(1.0);
        self.character_residual(x, level) <= tol * scale * scale
    }

    /// Infinitesimal character test with tolerance `tol · max(1, ‖x‖∞)`.
    pub fn is_inf_character(&self, x: &TensorSeries, level: u32, tol: f64) -> bool {
        self.inf_character_residual(x, level) <= tol * x.norm_inf().max(1.0)
    }

    /// Lie membership: primitive under this context's product.
    pub fn is_lie(&self, x: &TensorSeries, level: u32, tol: f64) -> bool {
        self.is_inf_character(x, level, tol)
    }

    // Visits every unordered pair u ≤ v of non-empty words with the product u⋆v.
    fn for_each_pair<F: FnMut(&Word, &Word, &Poly)>(&self, level: u32, mut f: F) {
        let words: Vec<Word> = words_up_to(&self.alphabet, level).into_iter().skip(1).collect();
        let bracket = self.kind == ProductKind::QuasiShuffle;
        for (i, u) in words.iter().enumerate() {
            for v in &words[i..] {
                if u.weight() + v.weight() > level {
                    break;
                }
                let uv = product_poly(&self.alphabet, u, v, bracket);
                f(u, v, &uv);
            }
        }
    }
}

fn pair_poly(x: &TensorSeries, p: &Poly) -> f64 {
    p.iter().map(|(w, c)| c * x.pair(w)).sum()
}

/// Plain shuffle of two words.
pub fn shuffle(alphabet: &Arc<Alphabet>, u: &Word, v: &Word) -> TensorSeries {
    HopfContext::shuffle(alphabet).product(u, v)
}

/// Quasi-shuffle of two words under the alphabet's bracket.
pub fn quasi_shuffle(alphabet: &Arc<Alphabet>, u: &Word, v: &Word) -> TensorSeries {
    HopfContext::quasi(alphabet).product(u, v)
}

// Table over prefixes: P[i][j] = u[..i] ⋆ v[..j], built by appending the
// last letter of either side (plus the bracket of both last letters).
fn product_poly(alphabet: &Alphabet, u: &Word, v: &Word, bracket: bool) -> Poly {
    let (n, m) = (u.len(), v.len());
    let ul = u.letters();
    let vl = v.letters();
    let mut prev_row: Vec<Poly> = Vec::with_capacity(m + 1);
    // Row 0: prefixes of v.
    let mut w = Word::empty();
    prev_row.push(single(w.clone()));
    for &b in vl {
        w.push(b, alphabet.weight(b));
        prev_row.push(single(w.clone()));
    }
    let mut uprefix = Word::empty();
    for i in 1..=n {
        let a = ul[i - 1];
        uprefix.push(a, alphabet.weight(a));
        let mut row: Vec<Poly> = Vec::with_capacity(m + 1);
        row.push(single(uprefix.clone()));
        for j in 1..=m {
            let b = vl[j - 1];
            let mut acc = Poly::new();
            append_into(&mut acc, &prev_row[j], a, alphabet);
            append_into(&mut acc, &row[j - 1], b, alphabet);
            if bracket {
                if let Some(ab) = alphabet.bracket(a, b) {
                    append_into(&mut acc, &prev_row[j - 1], ab, alphabet);
                }
            }
            row.push(acc);
        }
        prev_row = row;
    }
    prev_row.pop().unwrap_or_default()
}

fn single(w: Word) -> Poly {
    let mut p = Poly::new();
    p.insert(w, 1.0);
    p
}

fn append_into(acc: &mut Poly, src: &Poly, a: crate::alphabet::Letter, alphabet: &Alphabet) {
    let wa = alphabet.weight(a);
    for (w, &c) in src {
        let mut w = w.clone();
        w.push(a, wa);
        *acc.entry(w).or_insert(0.0) += c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quasi_shuffle_of_two_letters() {
        let a = Arc::new(Alphabet::multi_index(2, 2).unwrap());
        let u = Word::parse(&a, &["(1,0)"]).unwrap();
        let v = Word::parse(&a, &["(0,1)"]).unwrap();
        let p = quasi_shuffle(&a, &u, &v);
        assert_eq!(p.len(), 3);
        assert_eq!(p.pair_names(&["(1,0)", "(0,1)"]), 1.0);
        assert_eq!(p.pair_names(&["(0,1)", "(1,0)"]), 1.0);
        assert_eq!(p.pair_names(&["(1,1)"]), 1.0);
        assert_eq!(shuffle(&a, &u, &v).len(), 2);
    }

    #[test]
    fn area_element_is_not_primitive() {
        let a = Arc::new(Alphabet::standard(2).unwrap());
        let ctx = HopfContext::shuffle(&a);
        let x = TensorSeries::from_names(&a, 2, &[(&["1", "2"], 1.0)]).unwrap();
        assert!(!ctx.is_inf_character(&x, 2, 1e-9));
        let c = x.sub(&TensorSeries::from_names(&a, 2, &[(&["2", "1"], 1.0)]).unwrap()).unwrap();
        assert!(ctx.is_lie(&c, 2, 1e-9));
    }
}
