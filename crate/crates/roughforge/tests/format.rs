use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughforge::format::{parse_json, to_json, AlphabetJson, DriverJson, FieldsJson, SeriesJson, TranslationJson};
use roughforge::CliError;
use roughforge_core::develop::{Poly1, Segment};
use roughforge_core::field::{FieldTable, PolyVectorField, Polynomial};
use roughforge_core::lie::lyndon_basis;
use roughforge_core::renorm::{Translation, TranslationMode};
use roughforge_core::word::words_up_to;
use roughforge_core::{Alphabet, Driver, HopfContext, ProductKind, TensorSeries};

fn random_series(a: &Arc<Alphabet>, level: u32, seed: u64) -> TensorSeries {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let words = words_up_to(a, level);
    let terms = (0..12).map(|_| (words[r.gen_range(0..words.len())].clone(), r.gen_range(-1e3..1e3) * 10f64.powi(r.gen_range(-12..3))));
    TensorSeries::from_terms(a, level, terms).unwrap()
}

fn random_lie(a: &Arc<Alphabet>, level: u32, seed: u64) -> TensorSeries {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut x = TensorSeries::zero(a, level);
    for e in lyndon_basis(a, level).unwrap().elements() {
        x = x.axpy(r.gen_range(-1.0..1.0), &e.series).unwrap();
    }
    x
}

fn alphabets() -> Vec<Arc<Alphabet>> {
    vec![
        Arc::new(Alphabet::standard(3).unwrap()),
        Arc::new(Alphabet::multi_index(2, 2).unwrap()),
        Arc::new(Alphabet::new(&["x", "y,z", "t"], &[1, 2, 1]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_json_round_trips(seed in any::<u64>(), which in 0usize..3) {
        let a = &alphabets()[which];
        let x = random_series(a, 4, seed);
        let text = to_json(&SeriesJson::from_series(&x, true));
        let back: SeriesJson = parse_json(&text).unwrap();
        prop_assert_eq!(back.to_series(None, "series").unwrap(), x);
    }

    #[test]
    fn driver_json_round_trips(seed in any::<u64>()) {
        let a = Arc::new(Alphabet::standard(2).unwrap());
        let segs = vec![
            Segment::constant(0.0, 0.3, random_lie(&a, 2, seed)),
            Segment::polynomial(0.3, 1.0, vec![(Poly1::new(vec![0.1, -2.0, 0.5]), random_lie(&a, 2, seed ^ 1))]),
        ];
        let d = Driver::new(&a, ProductKind::Shuffle, 2, segs).unwrap();
        let text = to_json(&DriverJson::from_driver(&d, Some(4)));
        let back: DriverJson = parse_json(&text).unwrap();
        prop_assert_eq!(back.model_level(), 4);
        prop_assert_eq!(back.to_driver().unwrap(), d);
    }
}

#[test]
fn alphabet_shorthands_expand() {
    let j: AlphabetJson = parse_json(r#"{"multi_index": {"d": 2, "m": 2}}"#).unwrap();
    let a = j.to_alphabet("alphabet").unwrap();
    assert_eq!(a, Alphabet::multi_index(2, 2).unwrap());
    let explicit = AlphabetJson::from_alphabet(&a);
    assert_eq!(explicit.to_alphabet("alphabet").unwrap(), a);
    assert_eq!(explicit.bracket.unwrap().pairs.len(), a.bracket_pairs().len());
}

#[test]
fn bracket_table_json() {
    let j: AlphabetJson = parse_json(
        r#"{"letters": ["a", "b", "c"], "weights": [1, 1, 2],
            "bracket": {"pairs": [{"a": "a", "b": "b", "ab": "c"}, {"a": "a", "b": "a", "ab": null}]}}"#,
    )
    .unwrap();
    let a = j.to_alphabet("alphabet").unwrap();
    let l = |n| a.letter(n).unwrap();
    assert_eq!(a.bracket(l("b"), l("a")), Some(l("c")));
    assert_eq!(a.bracket(l("a"), l("a")), None);
    assert_eq!(a.bracket(l("b"), l("b")), None);
}

fn validation(e: CliError) -> String {
    match e {
        CliError::Validation(m) => m,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn diagnostics_name_the_offending_field() {
    let e = parse_json::<DriverJson>(r#"{"context": "shuffle", "level": 1, "segments": [{"t0": 0, "t1": 1, "velocity": {"kind": "cubic"}}]}"#)
        .unwrap_err();
    assert!(validation(e).contains("segments[0].velocity"));
    let e = parse_json::<SeriesJson>(r#"{"level": "two", "terms": []}"#).unwrap_err();
    assert!(validation(e).contains("level"));
    let j: DriverJson = parse_json(
        r#"{"alphabet": {"standard": 2}, "context": "shuffle", "level": 1,
            "segments": [{"t0": 0, "t1": 1, "velocity": {"kind": "constant", "series": {"level": 1, "terms": [{"word": ["3"], "coeff": 1}]}}}]}"#,
    )
    .unwrap();
    let m = validation(j.to_driver().unwrap_err());
    assert!(m.contains("segments[0].velocity.series.terms[0].word"), "{m}");
    let e = parse_json::<AlphabetJson>(r#"{"standard": 2, "letters": ["a"]}"#).unwrap().to_alphabet("alphabet").unwrap_err();
    assert!(validation(e).contains("exactly one"));
    assert!(parse_json::<SeriesJson>(r#"{"level": 1, "terms": []} trailing"#).is_err());
}

#[test]
fn translation_and_fields_round_trip() {
    let a = Arc::new(Alphabet::standard(2).unwrap());
    let ctx = HopfContext::shuffle(&a);
    let t = Translation::new(&ctx, TranslationMode::Geometric, vec![(a.letter("1").unwrap(), random_lie(&a, 2, 3))]).unwrap();
    let back: TranslationJson = parse_json(&to_json(&TranslationJson::from_translation(&t))).unwrap();
    assert_eq!(back.to_translation(&ctx).unwrap(), t);

    let f = PolyVectorField::new(vec![
        Polynomial::from_terms(2, [(vec![1, 0], 2.0), (vec![0, 3], -0.5)]).unwrap(),
        Polynomial::constant(2, 1.5),
    ])
    .unwrap();
    let table = FieldTable::new(&a, vec![(a.letter("2").unwrap(), f)], 3).unwrap();
    let back: FieldsJson = parse_json(&to_json(&FieldsJson::from_table(&table))).unwrap();
    let rebuilt = back.to_table(&a, 3).unwrap();
    assert_eq!(rebuilt.base(a.letter("2").unwrap()), table.base(a.letter("2").unwrap()));
    assert!(rebuilt.base(a.letter("1").unwrap()).is_none());
}

#[test]
fn field_arity_is_checked() {
    let a = Arc::new(Alphabet::standard(1).unwrap());
    let j: FieldsJson =
        parse_json(r#"{"dimension": 2, "fields": [{"letter": "1", "components": [{"monomials": [{"exponents": [1], "coeff": 1}]}, {"monomials": []}]}]}"#)
            .unwrap();
    let m = validation(j.to_table(&a, 1).unwrap_err());
    assert!(m.contains("fields[0].components[0].monomials[0].exponents"), "{m}");
}
