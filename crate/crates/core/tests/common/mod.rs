//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughforge_core::develop::{Poly1, Segment};
use roughforge_core::{Alphabet, Driver, Letter, ProductKind, TensorSeries, Word};

/// Unit-weight words as index vectors.
pub type NaiveSeries = BTreeMap<Vec<usize>, f64>;

pub fn naive_mul(x: &NaiveSeries, y: &NaiveSeries, level: usize) -> NaiveSeries {
    let mut out = NaiveSeries::new();
    for (u, a) in x {
        for (v, b) in y {
            if u.len() + v.len() <= level {
                let mut w = u.clone();
                w.extend(v);
                *out.entry(w).or_insert(0.0) += a * b;
            }
        }
    }
    out
}

/// `Σ x^n / n!` by repeated naive multiplication.
pub fn naive_exp(x: &NaiveSeries, level: usize) -> NaiveSeries {
    let mut out = NaiveSeries::new();
    out.insert(vec![], 1.0);
    let mut power = out.clone();
    for n in 1..=level {
        power = naive_mul(&power, x, level);
        for v in power.values_mut() {
            *v /= n as f64;
        }
        for (w, c) in &power {
            *out.entry(w.clone()).or_insert(0.0) += c;
        }
    }
    out
}

pub fn to_naive(x: &TensorSeries) -> NaiveSeries {
    x.terms().map(|(w, c)| (w.letters().iter().map(|l| l.index()).collect(), c)).collect()
}

pub fn naive_distance(x: &TensorSeries, y: &NaiveSeries) -> f64 {
    let xn = to_naive(x);
    let mut worst = 0.0f64;
    for (w, c) in y {
        worst = worst.max((xn.get(w).copied().unwrap_or(0.0) - c).abs());
    }
    for (w, c) in &xn {
        worst = worst.max((y.get(w).copied().unwrap_or(0.0) - c).abs());
    }
    worst
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1) + rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// Iterated integral `∫_{s<t_1<…<t_k<t} dY^{i_1} … dY^{i_k}` by nested
/// adaptive quadrature, given the derivatives `dy[i]`.
pub fn iterated_integral(dy: &[&dyn Fn(f64) -> f64], word: &[usize], s: f64, t: f64, tol: f64) -> f64 {
    match word.split_last() {
        None => 1.0,
        Some((&last, rest)) => {
            let inner = |r: f64| iterated_integral(dy, rest, s, r, tol) * dy[last](r);
            adaptive_simpson(&inner, s, t, tol)
        }
    }
}

pub type Matrix = Vec<Vec<f64>>;

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub fn mat_vec(a: &Matrix, y: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(y).map(|(x, v)| x * v).sum()).collect()
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor core.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.len();
    let norm: f64 = a.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm / f64::from(1u32 << s) > 0.5 {
        s += 1;
    }
    let scale = 1.0 / f64::from(1u32 << s);
    let b: Matrix = a.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
    let mut out: Matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = out.clone();
    for k in 1..=18 {
        term = mat_mul(&term, &b);
        for r in term.iter_mut() {
            for x in r.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                out[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        out = mat_mul(&out, &out);
    }
    out
}

/// Rank by Gaussian elimination with partial pivoting.
pub fn rank(mut rows: Vec<Vec<f64>>, tol: f64) -> usize {
    let mut r = 0;
    let cols = rows.first().map(Vec::len).unwrap_or(0);
    for c in 0..cols {
        let pivot = (r..rows.len()).max_by(|&i, &j| rows[i][c].abs().total_cmp(&rows[j][c].abs()));
        let p = match pivot {
            Some(p) if rows[p][c].abs() > tol => p,
            _ => continue,
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][c] / rows[r][c];
                if f != 0.0 {
                    for k in c..cols {
                        rows[i][k] -= f * rows[r][k];
                    }
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn std_alphabet(d: usize) -> Arc<Alphabet> {
    Arc::new(Alphabet::standard(d).unwrap())
}

pub fn letter(a: &Arc<Alphabet>, level: u32, name: &str) -> TensorSeries {
    TensorSeries::letter(a, level, a.require(name).unwrap())
}

pub fn bracket(x: &TensorSeries, y: &TensorSeries, level: u32) -> TensorSeries {
    x.commutator(y, level).unwrap()
}

/// Canonical lift driver of `Y(t) = (t, t²)` on `[0, T]` (level 1).
pub fn parabola_driver(horizon: f64) -> Driver {
    let a = std_alphabet(2);
    let e1 = letter(&a, 1, "1");
    let e2 = letter(&a, 1, "2");
    let seg = Segment::polynomial(0.0, horizon, vec![(Poly1::constant(1.0), e1), (Poly1::new(vec![0.0, 2.0]), e2)]);
    Driver::new(&a, ProductKind::Shuffle, 1, vec![seg]).unwrap()
}

/// Driver over two letters with velocity quadratic in time in
/// `e1, e2, [e1,e2]`.
pub fn quadratic_driver(horizon: f64) -> Driver {
    let a = std_alphabet(2);
    let e1 = letter(&a, 2, "1");
    let e2 = letter(&a, 2, "2");
    let area = bracket(&e1, &e2, 2);
    let seg = Segment::polynomial(
        0.0,
        horizon,
        vec![
            (Poly1::new(vec![1.0, -0.5, 0.75]), e1),
            (Poly1::new(vec![0.3, 1.2, -0.4]), e2),
            (Poly1::new(vec![-0.2, 0.0, 0.9]), area),
        ],
    );
    Driver::new(&a, ProductKind::Shuffle, 2, vec![seg]).unwrap()
}

/// Random Lie polynomial over `alphabet` from brackets of the Lyndon basis.
pub fn random_lie(alphabet: &Arc<Alphabet>, level: u32, rng: &mut ChaCha8Rng) -> TensorSeries {
    let basis = roughforge_core::lie::lyndon_basis(alphabet, level).unwrap();
    let mut x = TensorSeries::zero(alphabet, level);
    for e in basis.elements() {
        x = x.axpy(rng.gen_range(-1.0..1.0), &e.series).unwrap();
    }
    x
}

/// Random sparse series with up to `terms` words of weight ≤ level.
pub fn random_series(alphabet: &Arc<Alphabet>, level: u32, terms: usize, with_unit: bool, rng: &mut ChaCha8Rng) -> TensorSeries {
    let words = roughforge_core::word::words_up_to(alphabet, level);
    let mut x = TensorSeries::zero(alphabet, level);
    for _ in 0..terms {
        let w = words[rng.gen_range(1..words.len())].clone();
        x = x.add(&TensorSeries::word(alphabet, level, w, rng.gen_range(-1.0..1.0))).unwrap();
    }
    if with_unit {
        x = x.add(&TensorSeries::one(alphabet, level)).unwrap();
    }
    x
}

pub fn word(a: &Arc<Alphabet>, names: &[&str]) -> Word {
    Word::parse(a, names).unwrap()
}

pub fn letter_of(a: &Arc<Alphabet>, name: &str) -> Letter {
    a.require(name).unwrap()
}
