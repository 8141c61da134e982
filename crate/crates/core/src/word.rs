//! Words over a weighted alphabet.

use alloc::vec::Vec;

use crate::alphabet::{Alphabet, Letter};
use crate::error::{bail, Result};

/// A finite letter sequence together with its weighted length.
///
/// The derived order compares weighted length first and then letters
/// lexicographically, which is the canonical iteration order of series.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word {
    weight: u32,
    letters: Vec<Letter>,
}

impl Word {
    /// The empty word `𝟏`.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(alphabet: &Alphabet, letters: Vec<Letter>) -> Self {
        let weight = letters.iter().map(|&l| alphabet.weight(l)).sum();
        Self { weight, letters }
    }

    pub fn letter(alphabet: &Alphabet, a: Letter) -> Self {
        Self { weight: alphabet.weight(a), letters: alloc::vec![a] }
    }

    /// Parses letter names, failing on unknown names.
    pub fn parse<S: AsRef<str>>(alphabet: &Alphabet, names: &[S]) -> Result<Self> {
        let mut letters = Vec::with_capacity(names.len());
        for n in names {
            match alphabet.letter(n.as_ref()) {
                Some(l) => letters.push(l),
                None => bail!(Structural, "unknown letter \"{}\"", n.as_ref()),
            }
        }
        Ok(Self::new(alphabet, letters))
    }

    /// Weighted length `‖w‖`.
    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Length `|w|`.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word { weight: self.weight + other.weight, letters }
    }

    /// Appends one letter of weight `w`.
    pub(crate) fn push(&mut self, a: Letter, w: u32) {
        self.letters.push(a);
        self.weight += w;
    }

    /// Splits after the first `k` letters.
    pub fn split_at(&self, alphabet: &Alphabet, k: usize) -> (Word, Word) {
        let (l, r) = self.letters.split_at(k);
        (Word::new(alphabet, l.to_vec()), Word::new(alphabet, r.to_vec()))
    }

    /// Deconcatenation coproduct: all splittings `(u, v)` with `uv = w`.
    pub fn deconcatenate(&self, alphabet: &Alphabet) -> Vec<(Word, Word)> {
        (0..=self.len()).map(|k| self.split_at(alphabet, k)).collect()
    }

    pub fn names<'a>(&self, alphabet: &'a Alphabet) -> Vec<&'a str> {
        self.letters.iter().map(|&l| alphabet.name(l)).collect()
    }
}

/// All words of weighted length at most `level`, in canonical order.
pub fn words_up_to(alphabet: &Alphabet, level: u32) -> Vec<Word> {
    let mut by_weight: Vec<Vec<Word>> = alloc::vec![Vec::new(); level as usize + 1];
    by_weight[0].push(Word::empty());
    for g in 1..=level as usize {
        let mut block = Vec::new();
        for a in alphabet.letters() {
            let wa = alphabet.weight(a) as usize;
            if wa > g {
                continue;
            }
            for tail in &by_weight[g - wa] {
                let mut letters = Vec::with_capacity(tail.len() + 1);
                letters.push(a);
                letters.extend_from_slice(tail.letters());
                block.push(Word { weight: g as u32, letters });
            }
        }
        block.sort();
        by_weight[g] = block;
    }
    by_weight.into_iter().flatten().collect()
}
