mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use roughforge_core::develop::{Poly1, Segment};
use roughforge_core::field::{prelie, prelie_bracket, FieldMode, FieldTable, PolyVectorField, Polynomial};
use roughforge_core::hoffman::hoffman_log_adjoint;
use roughforge_core::hopf::HopfContext;
use roughforge_core::lie::{lyndon_basis, orthonormal_lie_basis, quasi_lie_basis};
use roughforge_core::rde::{davie_check, equivalence_check, lie_basis_field, rhs_field, solve_rde, translated_fields};
use roughforge_core::renorm::{Translation, TranslationMode};
use roughforge_core::{Alphabet, Driver, Error, ProductKind, SmoothModel};

fn m1() -> Matrix {
    vec![vec![0.0, 1.0], vec![-1.0, 0.0]]
}

fn m2() -> Matrix {
    vec![vec![0.5, 0.0], vec![0.2, -0.3]]
}

fn linear_table(a: &Arc<Alphabet>, level: u32) -> FieldTable {
    FieldTable::new(
        a,
        vec![(letter_of(a, "1"), PolyVectorField::linear(&m1()).unwrap()), (letter_of(a, "2"), PolyVectorField::linear(&m2()).unwrap())],
        level,
    )
    .unwrap()
}

fn sample_points() -> Vec<Vec<f64>> {
    vec![vec![1.0, 0.0], vec![0.3, -2.0], vec![-1.5, 0.7]]
}

#[test]
fn linear_prelie_products_are_matrix_products() {
    let (f, g) = (PolyVectorField::linear(&m1()).unwrap(), PolyVectorField::linear(&m2()).unwrap());
    let p = prelie(&f, &g).unwrap();
    let b = prelie_bracket(&f, &g).unwrap();
    let ba = mat_mul(&m2(), &m1());
    let ab = mat_mul(&m1(), &m2());
    for y in sample_points() {
        let expect = mat_vec(&ba, &y);
        let comm: Vec<f64> = mat_vec(&ab, &y).iter().zip(&expect).map(|(x, z)| -(x - z)).collect();
        for k in 0..2 {
            assert!((p.eval(&y)[k] - expect[k]).abs() < 1e-14);
            assert!((b.eval(&y)[k] - comm[k]).abs() < 1e-14);
        }
    }
}

#[test]
fn prelie_on_nonlinear_fields() {
    // f = (y², 0), g = (0, y₁y₂): (∇g)f = (0, y₂·y₁²).
    let f = PolyVectorField::new(vec![Polynomial::monomial(2, vec![2, 0], 1.0), Polynomial::zero(2)]).unwrap();
    let g = PolyVectorField::new(vec![Polynomial::zero(2), Polynomial::monomial(2, vec![1, 1], 1.0)]).unwrap();
    let p = prelie(&f, &g).unwrap();
    let expect = PolyVectorField::new(vec![Polynomial::zero(2), Polynomial::monomial(2, vec![2, 1], 1.0)]).unwrap();
    assert!(p.distance(&expect) < 1e-15);
}

#[test]
fn constant_letter_gives_matrix_exponential() {
    let a = std_alphabet(2);
    let m = SmoothModel::from_driver(Driver::constant(letter(&a, 1, "1").scale(0.8), ProductKind::Shuffle, 2.0).unwrap());
    let traj = solve_rde(&m, &linear_table(&a, 1), FieldMode::Geometric, &[1.0, 0.5], 400).unwrap();
    let scaled: Matrix = m1().iter().map(|r| r.iter().map(|x| x * 1.6).collect()).collect();
    let exact = mat_vec(&expm(&scaled), &[1.0, 0.5]);
    for k in 0..2 {
        assert!((traj.last()[k] - exact[k]).abs() < 1e-9);
    }
}

#[test]
fn solver_on_parabola_matches_fine_quadrature() {
    // dY = A1 Y dt + A2 Y d(t²): same as the ODE Y' = (A1 + 2t A2) Y.
    let model = SmoothModel::from_driver(parabola_driver(1.0));
    let a = model.alphabet().clone();
    let traj = solve_rde(&model, &linear_table(&a, 1), FieldMode::Geometric, &[1.0, 0.0], 1000).unwrap();
    let mut y = vec![1.0, 0.0];
    let n = 20000;
    let h = 1.0 / n as f64;
    let f = |t: f64, y: &[f64]| -> Vec<f64> {
        let m: Matrix = m1().iter().zip(m2()).map(|(r, s)| r.iter().zip(s).map(|(x, z)| x + 2.0 * t * z).collect()).collect();
        mat_vec(&m, y)
    };
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = f(t, &y);
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = f(t + 0.5 * h, &y2);
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = f(t + 0.5 * h, &y3);
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = f(t + h, &y4);
        for k in 0..2 {
            y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
    }
    for k in 0..2 {
        assert!((traj.last()[k] - y[k]).abs() < 1e-10);
    }
}

#[test]
fn davie_remainders_decay_faster_than_h() {
    let model = SmoothModel::new(quadratic_driver(1.0), 2).unwrap();
    let a = model.alphabet().clone();
    let table = linear_table(&a, 2);
    let traj = solve_rde(&model, &table, FieldMode::Geometric, &[1.0, 0.0], 500).unwrap();
    let report = davie_check(&model, &table, FieldMode::Geometric, &traj, 0.05).unwrap();
    assert!(report.ratio > 10.0, "{report:?}");
    assert!(matches!(davie_check(&model, &table, FieldMode::Geometric, &traj, 2.0), Err(Error::Precondition(_))));
}

#[test]
fn divergence_is_reported() {
    let a = std_alphabet(1);
    let m = SmoothModel::from_driver(Driver::constant(letter(&a, 1, "1"), ProductKind::Shuffle, 2.0).unwrap());
    let blowup = PolyVectorField::new(vec![Polynomial::monomial(1, vec![3], 1.0)]).unwrap();
    let table = FieldTable::new(&a, vec![(letter_of(&a, "1"), blowup)], 1).unwrap();
    assert!(matches!(solve_rde(&m, &table, FieldMode::Geometric, &[2.0], 2000), Err(Error::Divergence(_))));
}

#[test]
fn solver_rejects_mismatched_inputs() {
    let a = std_alphabet(2);
    let m = SmoothModel::from_driver(parabola_driver(1.0));
    let table = linear_table(&a, 1);
    assert!(matches!(solve_rde(&m, &table, FieldMode::Geometric, &[1.0], 10), Err(Error::Structural(_))));
    assert!(matches!(solve_rde(&m, &table, FieldMode::Geometric, &[1.0, 0.0], 0), Err(Error::Precondition(_))));
    let b = std_alphabet(3);
    let other = FieldTable::new(&b, vec![(letter_of(&b, "1"), PolyVectorField::identity(2))], 1).unwrap();
    assert!(matches!(solve_rde(&m, &other, FieldMode::Geometric, &[1.0, 0.0], 10), Err(Error::Structural(_))));
    // Missing base field for a letter the driver uses.
    let partial = FieldTable::new(&a, vec![(letter_of(&a, "1"), PolyVectorField::identity(2))], 1).unwrap();
    assert!(solve_rde(&m, &partial, FieldMode::Geometric, &[1.0, 0.0], 10).unwrap_err().to_string().contains('2'));
}

#[test]
fn rhs_expands_the_velocity() {
    let model = SmoothModel::new(quadratic_driver(1.0), 2).unwrap();
    let a = model.alphabet().clone();
    let table = linear_table(&a, 2);
    let s = 0.35;
    let v = model.diagonal_derivative(s).unwrap();
    let f1 = table.base(letter_of(&a, "1")).unwrap();
    let f2 = table.base(letter_of(&a, "2")).unwrap();
    let expect =
        f1.scale(v.pair_names(&["1"])).add(&f2.scale(v.pair_names(&["2"]))).unwrap().axpy(v.pair_names(&["1", "2"]), &prelie_bracket(f1, f2).unwrap()).unwrap();
    assert!(rhs_field(&model, &table, FieldMode::Geometric, s).unwrap().distance(&expect) < 1e-12);
}

#[test]
fn lie_basis_field_is_linear_in_coordinates() {
    let a = std_alphabet(2);
    let q = orthonormal_lie_basis(&lyndon_basis(&a, 3).unwrap()).unwrap();
    let table = linear_table(&a, 3);
    let x = random_lie(&a, 3, &mut rng(9));
    let direct = table.field_for(&x, FieldMode::Geometric).unwrap();
    assert!(lie_basis_field(&x, &q, &table).unwrap().distance(&direct) < 1e-12);
}

#[test]
fn translated_fields_add_direction_fields() {
    let a = std_alphabet(2);
    let table = linear_table(&a, 2);
    let area = bracket(&letter(&a, 2, "1"), &letter(&a, 2, "2"), 2);
    let t = Translation::new(&HopfContext::shuffle(&a), TranslationMode::Geometric, vec![(letter_of(&a, "2"), area)]).unwrap();
    let shifted = translated_fields(&table, &t).unwrap();
    let f1 = table.base(letter_of(&a, "1")).unwrap();
    let f2 = table.base(letter_of(&a, "2")).unwrap();
    let expect = f2.add(&prelie_bracket(f1, f2).unwrap()).unwrap();
    assert!(shifted.base(letter_of(&a, "2")).unwrap().distance(&expect) < 1e-15);
    assert_eq!(shifted.base(letter_of(&a, "1")), table.base(letter_of(&a, "1")));
}

fn ito_setup() -> (SmoothModel, FieldTable) {
    let a = Arc::new(Alphabet::multi_index(2, 2).unwrap());
    let basis = quasi_lie_basis(&lyndon_basis(&a, 2).unwrap()).unwrap();
    let terms = basis.elements.iter().enumerate().map(|(i, e)| (Poly1::new(vec![0.4 - 0.1 * i as f64, 0.2 * i as f64]), e.series.clone()));
    let d = Driver::new(&a, ProductKind::QuasiShuffle, 2, vec![Segment::polynomial(0.0, 1.0, terms.collect())]).unwrap();
    let fields = a
        .letters()
        .enumerate()
        .map(|(k, l)| {
            let c = 0.3 / (k + 1) as f64;
            let f = PolyVectorField::new(vec![
                Polynomial::monomial(2, vec![0, 1], c),
                Polynomial::monomial(2, vec![1, 0], -c).add(&Polynomial::monomial(2, vec![2, 0], 0.1 * c)),
            ])
            .unwrap();
            (l, f)
        })
        .collect();
    (SmoothModel::from_driver(d), FieldTable::new(&a, fields, 2).unwrap())
}

#[test]
fn quasi_renormalization_equivalence() {
    let (model, table) = ito_setup();
    let a = model.alphabet().clone();
    let ctx = HopfContext::quasi(&a);
    let u = hoffman_log_adjoint(&bracket(&letter(&a, 2, "(1,0)"), &letter(&a, 2, "(0,1)"), 2)).unwrap();
    let t = Translation::new(&ctx, TranslationMode::Quasi, vec![(letter_of(&a, "(1,0)"), u)]).unwrap();
    let report = equivalence_check(&model, &table, &t, FieldMode::Quasi, &[0.4, 0.1], 500, 8).unwrap();
    assert!(report.deviation < 1e-8, "{report:?}");
    assert!(report.conjugated_deviation.unwrap() < 1e-8, "{report:?}");
}

#[test]
fn quasi_mode_requires_every_base_field() {
    let (model, _) = ito_setup();
    let a = model.alphabet().clone();
    let partial = FieldTable::new(&a, vec![(letter_of(&a, "(1,0)"), PolyVectorField::identity(2))], 2).unwrap();
    let err = solve_rde(&model, &partial, FieldMode::Quasi, &[0.0, 0.0], 10).unwrap_err();
    assert!(matches!(err, Error::Structural(_)));
    assert!(matches!(solve_rde(&model, &partial, FieldMode::Geometric, &[0.0, 0.0], 10), Err(Error::Structural(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn geometric_equivalence_for_random_directions(seed in any::<u64>()) {
        let model = SmoothModel::new(quadratic_driver(1.0), 2).unwrap();
        let a = model.alphabet().clone();
        let mut r = rng(seed);
        let dir = random_lie(&a, 2, &mut r);
        let t = Translation::new(&HopfContext::shuffle(&a), TranslationMode::Geometric, vec![(letter_of(&a, "1"), dir)]).unwrap();
        let report = equivalence_check(&model, &linear_table(&a, 2), &t, FieldMode::Geometric, &[1.0, -0.5], 400, 8).unwrap();
        prop_assert!(report.deviation < 1e-8);
    }

    #[test]
    fn field_for_is_linear(seed in any::<u64>(), l in -3.0f64..3.0) {
        let a = std_alphabet(2);
        let table = linear_table(&a, 3);
        let mut r = rng(seed);
        let (x, y) = (random_series(&a, 3, 6, false, &mut r), random_series(&a, 3, 6, false, &mut r));
        let lhs = table.field_for(&x.axpy(l, &y).unwrap(), FieldMode::Geometric).unwrap();
        let rhs = table.field_for(&x, FieldMode::Geometric).unwrap().axpy(l, &table.field_for(&y, FieldMode::Geometric).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs) < 1e-12);
    }
}
