mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use roughforge_core::hopf::HopfContext;
use roughforge_core::lie::{is_lie, lyndon_basis, lyndon_bracket, orthonormal_lie_basis, quasi_lie_basis, standard_factorization};
use roughforge_core::word::words_up_to;
use roughforge_core::{Alphabet, Error, TensorSeries, Word};

// Lyndon by rotations: strictly smaller than every nontrivial rotation.
fn lyndon_by_rotation(w: &Word) -> bool {
    let l = w.letters();
    let n = l.len();
    n > 0 && (1..n).all(|k| {
        let rot: Vec<_> = l[k..].iter().chain(&l[..k]).copied().collect();
        l < rot.as_slice()
    })
}

fn mobius(n: u32) -> i64 {
    let (mut n, mut m, mut p) = (n, 1i64, 2u32);
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            m = -m;
        }
        p += 1;
    }
    if n > 1 {
        -m
    } else {
        m
    }
}

fn witt(q: i64, n: u32) -> i64 {
    (1..=n).filter(|d| n % d == 0).map(|d| mobius(d) * q.pow(n / d)).sum::<i64>() / n as i64
}

fn weighted() -> Arc<Alphabet> {
    Arc::new(Alphabet::multi_index(2, 2).unwrap())
}

#[test]
fn dimensions_follow_witt_formula() {
    for d in 1..=3usize {
        let a = std_alphabet(d);
        let basis = lyndon_basis(&a, 6).unwrap();
        for n in 1..=6 {
            assert_eq!(basis.grade(n).count() as i64, witt(d as i64, n), "d = {d}, n = {n}");
        }
    }
}

#[test]
fn weighted_lyndon_words_match_rotation_test() {
    let a = weighted();
    let basis = lyndon_basis(&a, 6).unwrap();
    let expect: Vec<Word> = words_up_to(&a, 6).into_iter().filter(lyndon_by_rotation).collect();
    let got: Vec<Word> = basis.elements().iter().map(|e| e.word.clone()).collect();
    assert_eq!(got, expect);
}

#[test]
fn brackets_are_independent_lie_elements() {
    for a in [std_alphabet(2), std_alphabet(3), weighted()] {
        let level = 5;
        let basis = lyndon_basis(&a, level).unwrap();
        let ctx = HopfContext::shuffle(&a);
        let words = words_up_to(&a, level);
        let rows: Vec<Vec<f64>> = basis.elements().iter().map(|e| words.iter().map(|w| e.series.pair(w)).collect()).collect();
        assert_eq!(rank(rows, 1e-9), basis.len());
        for e in basis.elements() {
            assert!(ctx.is_lie(&e.series, level, 1e-12));
            // Leading word of the expansion is the Lyndon word, with coefficient 1.
            let first = e.series.terms().next().unwrap();
            assert_eq!((first.0, first.1), (&e.word, 1.0));
        }
    }
}

#[test]
fn standard_factorization_examples() {
    let a = std_alphabet(2);
    let f = |n: &[&str]| {
        let (u, v) = standard_factorization(&a, &word(&a, n)).unwrap();
        (u.names(&a).join(""), v.names(&a).join(""))
    };
    assert_eq!(f(&["1", "1", "2"]), ("1".into(), "12".into()));
    assert_eq!(f(&["1", "2", "2"]), ("12".into(), "2".into()));
    assert_eq!(f(&["1", "1", "2", "1", "2"]), ("112".into(), "12".into()));
    // [1,[1,2]] = 112 − 2·121 + 211
    let b = lyndon_bracket(&a, &word(&a, &["1", "1", "2"])).unwrap();
    let expect = TensorSeries::from_names(&a, 3, &[(&["1", "1", "2"], 1.0), (&["1", "2", "1"], -2.0), (&["2", "1", "1"], 1.0)]).unwrap();
    assert_eq!(b, expect);
    assert!(matches!(lyndon_bracket(&a, &word(&a, &["2", "1"])), Err(Error::Precondition(_))));
}

#[test]
fn orthonormal_basis_is_orthonormal_and_spans() {
    let a = std_alphabet(3);
    let basis = lyndon_basis(&a, 4).unwrap();
    let q = orthonormal_lie_basis(&basis).unwrap();
    assert_eq!(q.len(), basis.len());
    for (i, x) in q.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((x.inner(y) - expect).abs() < 1e-12);
        }
    }
    let ctx = HopfContext::shuffle(&a);
    assert!(q.iter().all(|x| ctx.is_lie(x, 4, 1e-12)));
}

#[test]
fn quasi_basis_elements_are_quasi_primitive() {
    let a = weighted();
    let basis = lyndon_basis(&a, 4).unwrap();
    let quasi = quasi_lie_basis(&basis).unwrap();
    let qctx = HopfContext::quasi(&a);
    let sctx = HopfContext::shuffle(&a);
    for e in &quasi.elements {
        assert!(is_lie(&e.series, 4, &qctx, 1e-12));
    }
    // Ψ* moves the bracket letter (1,1) off the shuffle primitives.
    let e = &quasi.elements.iter().find(|e| e.word.names(&a) == ["(1,1)"]).unwrap().series;
    let expect =
        TensorSeries::from_names(&a, 2, &[(&["(1,1)"], 1.0), (&["(1,0)", "(0,1)"], -0.5), (&["(0,1)", "(1,0)"], -0.5)]).unwrap();
    assert!(e.truncate(2).distance(&expect) < 1e-15);
    assert!(!sctx.is_lie(e, 4, 1e-9));
}

#[test]
fn non_lie_elements_are_rejected() {
    let a = std_alphabet(2);
    let ctx = HopfContext::shuffle(&a);
    let x = TensorSeries::from_names(&a, 2, &[(&["1", "2"], 1.0)]).unwrap();
    assert!(!ctx.is_lie(&x, 2, 1e-9));
    assert!(!ctx.is_lie(&TensorSeries::one(&a, 2), 2, 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn coordinates_reconstruct_lie_elements(seed in any::<u64>()) {
        let a = std_alphabet(3);
        let basis = lyndon_basis(&a, 4).unwrap();
        let x = random_lie(&a, 4, &mut rng(seed));
        let c = basis.coordinates(&x).unwrap();
        let mut y = TensorSeries::zero(&a, 4);
        for (ci, e) in c.iter().zip(basis.elements()) {
            y = y.axpy(*ci, &e.series).unwrap();
        }
        prop_assert!(y.distance(&x) < 1e-12);
    }

    #[test]
    fn log_of_signature_is_lie(seed in any::<u64>()) {
        let a = std_alphabet(2);
        let mut r = rng(seed);
        let g = random_lie(&a, 4, &mut r).exp_trunc(4).unwrap().concat(&random_lie(&a, 4, &mut r).exp_trunc(4).unwrap(), 4).unwrap();
        prop_assert!(HopfContext::shuffle(&a).is_lie(&g.log_trunc(4).unwrap(), 4, 1e-10));
    }
}
