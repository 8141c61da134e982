//! Weighted alphabets with an optional commutative bracket.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Index of a letter inside its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u16);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered set of named letters, each with a positive weight, plus a
/// symmetric associative bracket `{a,b}` that is either a letter or zero.
///
/// An alphabet without bracket entries is the geometric (shuffle) case.
#[derive(Clone, Debug, PartialEq)]
pub struct Alphabet {
    names: Vec<String>,
    weights: Vec<u32>,
    // n*n table; `None` is the zero bracket.
    bracket: Vec<Option<Letter>>,
}

impl Alphabet {
    /// Letters with the given names and weights and a trivial bracket.
    pub fn new<S: AsRef<str>>(names: &[S], weights: &[u32]) -> Result<Self> {
        if names.len() != weights.len() {
            bail!(Structural, "{} letters but {} weights", names.len(), weights.len());
        }
        if names.is_empty() {
            bail!(Structural, "alphabet has no letters");
        }
        if names.len() > u16::MAX as usize {
            bail!(Capacity, "too many letters ({})", names.len());
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                bail!(Structural, "letter {i} has an empty name");
            }
            if names[..i].contains(n) {
                bail!(Structural, "duplicate letter \"{n}\"");
            }
        }
        if let Some(i) = weights.iter().position(|&w| w == 0) {
            bail!(Structural, "letter \"{}\" has weight 0", names[i]);
        }
        let n = names.len();
        Ok(Self { names, weights: weights.to_vec(), bracket: vec![None; n * n] })
    }

    /// `d` unit-weight letters named `"1"`, …, `"d"`.
    pub fn standard(d: usize) -> Result<Self> {
        let names: Vec<String> = (1..=d).map(|i| i.to_string()).collect();
        Self::new(&names, &vec![1; d])
    }

    /// Adds bracket entries `{a,b} = ab` (`None` meaning zero). Entries are
    /// symmetrized; missing pairs stay zero. The table is then checked for
    /// weight compatibility and associativity.
    pub fn with_bracket(mut self, pairs: &[(Letter, Letter, Option<Letter>)]) -> Result<Self> {
        let n = self.len();
        let mut set = vec![false; n * n];
        for &(a, b, ab) in pairs {
            for l in [Some(a), Some(b), ab].into_iter().flatten() {
                if l.index() >= n {
                    bail!(Structural, "bracket refers to unknown letter index {}", l.0);
                }
            }
            for (x, y) in [(a, b), (b, a)] {
                let k = x.index() * n + y.index();
                if set[k] && self.bracket[k] != ab {
                    bail!(
                        Structural,
                        "bracket {{{},{}}} given twice with different values",
                        self.name(a),
                        self.name(b)
                    );
                }
                set[k] = true;
                self.bracket[k] = ab;
            }
        }
        self.validate_bracket()?;
        Ok(self)
    }

    fn validate_bracket(&self) -> Result<()> {
        let n = self.len();
        for a in self.letters() {
            for b in self.letters() {
                if let Some(c) = self.bracket(a, b) {
                    if self.weight(c) != self.weight(a) + self.weight(b) {
                        bail!(
                            Structural,
                            "bracket {{{},{}}} = {} breaks weight additivity",
                            self.name(a),
                            self.name(b),
                            self.name(c)
                        );
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (a, b, c) = (Letter(a as u16), Letter(b as u16), Letter(c as u16));
                    let left = self.bracket(a, b).and_then(|ab| self.bracket(ab, c));
                    let right = self.bracket(b, c).and_then(|bc| self.bracket(a, bc));
                    if left != right {
                        bail!(
                            Structural,
                            "bracket is not associative on ({},{},{})",
                            self.name(a),
                            self.name(b),
                            self.name(c)
                        );
                    }
                }
            }
        }
        Ok(())
    }

    /// The alphabet of multi-indices `α ∈ ℕᵈ` with `1 ≤ |α| ≤ m`, weight
    /// `|α|` and bracket `{α,β} = α+β` when `|α+β| ≤ m`, zero otherwise.
    ///
    /// Letters are ordered by weight, then with `e_1` first inside a weight;
    /// names look like `"(1,0)"`.
    pub fn multi_index(d: usize, m: u32) -> Result<Self> {
        if d == 0 || m == 0 {
            bail!(Structural, "multi-index alphabet needs d ≥ 1 and m ≥ 1");
        }
        let mut indices: Vec<Vec<u32>> = Vec::new();
        for weight in 1..=m {
            let mut block = Vec::new();
            multi_indices_of_weight(d, weight, &mut Vec::new(), &mut block);
            block.sort_by(|a, b| b.cmp(a));
            indices.extend(block);
        }
        let names: Vec<String> = indices.iter().map(|a| multi_index_name(a)).collect();
        let weights: Vec<u32> = indices.iter().map(|a| a.iter().sum()).collect();
        let alphabet = Self::new(&names, &weights)?;
        let mut pairs = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate().skip(i) {
                let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let target = indices.iter().position(|c| *c == sum).map(|k| Letter(k as u16));
                pairs.push((Letter(i as u16), Letter(j as u16), target));
            }
        }
        alphabet.with_bracket(&pairs)
    }

    /// Disjoint union: letters of `self` followed by letters of `other`,
    /// brackets of each part kept, mixed brackets zero.
    pub fn union(&self, other: &Alphabet) -> Result<Self> {
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut weights = self.weights.clone();
        weights.extend(other.weights.iter().copied());
        for n in &other.names {
            if self.names.contains(n) {
                bail!(Structural, "alphabets overlap in letter \"{n}\"");
            }
        }
        let shift = self.len() as u16;
        let mut pairs = Vec::new();
        for (alph, off) in [(self, 0u16), (other, shift)] {
            for a in alph.letters() {
                for b in alph.letters() {
                    if let Some(c) = alph.bracket(a, b) {
                        pairs.push((Letter(a.0 + off), Letter(b.0 + off), Some(Letter(c.0 + off))));
                    }
                }
            }
        }
        Self::new(&names, &weights)?.with_bracket(&pairs)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.names.len()).map(|i| Letter(i as u16))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn name(&self, a: Letter) -> &str {
        &self.names[a.index()]
    }

    pub fn weight(&self, a: Letter) -> u32 {
        self.weights[a.index()]
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == name).map(|i| Letter(i as u16))
    }

    /// Looks up a letter by name, failing with a structural error.
    pub fn require(&self, name: &str) -> Result<Letter> {
        match self.letter(name) {
            Some(l) => Ok(l),
            None => bail!(Structural, "unknown letter \"{name}\""),
        }
    }

    /// `{a,b}`, `None` standing for zero.
    pub fn bracket(&self, a: Letter, b: Letter) -> Option<Letter> {
        self.bracket[a.index() * self.len() + b.index()]
    }

    /// True when every bracket is zero (shuffle case).
    pub fn has_trivial_bracket(&self) -> bool {
        self.bracket.iter().all(Option::is_none)
    }

    /// All non-zero bracket entries `(a, b, {a,b})` with `a ≤ b`.
    pub fn bracket_pairs(&self) -> Vec<(Letter, Letter, Letter)> {
        let mut out = Vec::new();
        for a in self.letters() {
            for b in self.letters().filter(|b| *b >= a) {
                if let Some(c) = self.bracket(a, b) {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    /// Iterated bracket `{a_1 … a_n}`; `None` if any step is zero or the
    /// slice is empty.
    pub fn fold_bracket(&self, letters: &[Letter]) -> Option<Letter> {
        let (&first, rest) = letters.split_first()?;
        rest.iter().try_fold(first, |acc, &b| self.bracket(acc, b))
    }

    /// All ordered letter sequences `a_1 … a_n` (n ≥ 1) with `{a_1 … a_n} = a`,
    /// including the one-letter sequence `a` itself.
    pub fn decompositions(&self, a: Letter) -> Vec<Vec<Letter>> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        self.collect_decompositions(a, self.weight(a), &mut current, &mut out);
        out
    }

    fn collect_decompositions(
        &self,
        target: Letter,
        remaining: u32,
        current: &mut Vec<Letter>,
        out: &mut Vec<Vec<Letter>>,
    ) {
        if remaining == 0 {
            if self.fold_bracket(current) == Some(target) {
                out.push(current.clone());
            }
            return;
        }
        for b in self.letters() {
            let w = self.weight(b);
            if w > remaining {
                continue;
            }
            if !current.is_empty() && self.fold_bracket(current).and_then(|c| self.bracket(c, b)).is_none() {
                continue;
            }
            current.push(b);
            self.collect_decompositions(target, remaining - w, current, out);
            current.pop();
        }
    }

    /// Human-readable word rendering, letters separated by spaces.
    pub fn render(&self, letters: &[Letter]) -> String {
        if letters.is_empty() {
            return String::from("1");
        }
        let parts: Vec<&str> = letters.iter().map(|&l| self.name(l)).collect();
        parts.join(" ")
    }
}

fn multi_indices_of_weight(d: usize, weight: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == d {
        prefix.push(weight);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=weight {
        prefix.push(k);
        multi_indices_of_weight(d, weight - k, prefix, out);
        prefix.pop();
    }
}

fn multi_index_name(alpha: &[u32]) -> String {
    let parts: Vec<String> = alpha.iter().map(|k| format!("{k}")).collect();
    format!("({})", parts.join(","))
}
