//! Dense graded storage with precomputed concatenation tables.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::alphabet::Alphabet;
use crate::series::TensorSeries;
use crate::word::{words_up_to, Word};

/// All words up to a level, indexed in canonical order, with the table
/// `right[j] = [(i, k)]` meaning `word_i · word_j = word_k`.
pub(crate) struct WordIndex {
    alphabet: Arc<Alphabet>,
    level: u32,
    words: Vec<Word>,
    lookup: BTreeMap<Word, usize>,
    right: Vec<Vec<(u32, u32)>>,
}

impl WordIndex {
    pub(crate) fn new(alphabet: &Arc<Alphabet>, level: u32) -> Self {
        let words = words_up_to(alphabet, level);
        let lookup: BTreeMap<Word, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let mut right = vec![Vec::new(); words.len()];
        for (j, v) in words.iter().enumerate() {
            for (i, u) in words.iter().enumerate() {
                if u.weight() + v.weight() > level {
                    break;
                }
                let k = lookup[&u.concat(v)];
                right[j].push((i as u32, k as u32));
            }
        }
        Self { alphabet: alphabet.clone(), level, words, lookup, right }
    }

    pub(crate) fn len(&self) -> usize {
        self.words.len()
    }

    pub(crate) fn to_series(&self, x: &[f64]) -> TensorSeries {
        let mut out = TensorSeries::zero(&self.alphabet, self.level);
        for (w, &c) in self.words.iter().zip(x) {
            out.add_term(w.clone(), c);
        }
        out
    }

    /// `out = x ⊗ y` where `y` is given by its non-zero entries.
    pub(crate) fn mul_sparse(&self, x: &[f64], y: &[(usize, f64)], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(j, b) in y {
            for &(i, k) in &self.right[j] {
                out[k as usize] += x[i as usize] * b;
            }
        }
    }

    /// `x ⊗ y` for dense operands.
    pub(crate) fn mul(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nz: Vec<(usize, f64)> = y.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect();
        let mut out = vec![0.0; self.len()];
        self.mul_sparse(x, &nz, &mut out);
        out
    }

    pub(crate) fn sparse(&self, x: &TensorSeries) -> Vec<(usize, f64)> {
        x.terms().filter_map(|(w, c)| self.lookup.get(w).map(|&i| (i, c))).collect()
    }

    pub(crate) fn one(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        v[0] = 1.0;
        v
    }

    /// `exp(y)` for `y` without unit component.
    pub(crate) fn exp(&self, y: &[(usize, f64)]) -> Vec<f64> {
        let mut out = self.one();
        let mut power = self.one();
        let mut next = vec![0.0; self.len()];
        for n in 1..=self.level {
            self.mul_sparse(&power, y, &mut next);
            let inv = 1.0 / n as f64;
            next.iter_mut().for_each(|v| *v *= inv);
            core::mem::swap(&mut power, &mut next);
            for (o, p) in out.iter_mut().zip(&power) {
                *o += p;
            }
        }
        out
    }
}
