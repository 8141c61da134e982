//! Invariant suites run by `roughforge verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roughforge_core::field::{FieldMode, FieldTable};
use roughforge_core::hoffman::{hoffman_exp, hoffman_exp_series, hoffman_log, hoffman_log_series};
use roughforge_core::rde::{davie_check, equivalence_check, solve_rde};
use roughforge_core::renorm::{canonical_sum, renormalize_model, scalar, translate, Translation};
use roughforge_core::word::words_up_to;
use roughforge_core::{Alphabet, HopfContext, SmoothModel, TensorSeries};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::CliError;

/// Measured quantity against its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub measured: f64,
    /// `"<="` or `">="`.
    pub relation: String,
    pub threshold: f64,
    pub passed: bool,
}

impl Property {
    fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, relation: "<=".into(), threshold, passed: measured <= threshold }
    }

    fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), measured, relation: ">=".into(), threshold, passed: measured >= threshold }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub passed: bool,
    pub properties: Vec<Property>,
}

impl Report {
    fn new(suite: &str, properties: Vec<Property>) -> Self {
        Self { suite: suite.into(), passed: properties.iter().all(|p| p.passed), properties }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Chen,
    Character,
    Lie,
    Hoffman,
    Renormalization,
    Sum,
    Rde,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Chen => "chen",
            Suite::Character => "character",
            Suite::Lie => "lie",
            Suite::Hoffman => "hoffman",
            Suite::Renormalization => "renormalization",
            Suite::Sum => "sum",
            Suite::Rde => "rde",
        }
    }

    /// Tolerance used when `--tol` is not given.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Hoffman => 1e-12,
            Suite::Lie => 1e-9,
            Suite::Rde => 1e-6,
            _ => 1e-8,
        }
    }
}

/// Inputs of a suite; which ones are required depends on the suite.
pub struct Inputs<'a> {
    pub model: Option<&'a SmoothModel>,
    pub other: Option<&'a SmoothModel>,
    pub alphabet: Option<Arc<Alphabet>>,
    pub translation: Option<&'a Translation>,
    pub fields: Option<&'a FieldTable>,
    pub mode: Option<FieldMode>,
    pub y0: Option<&'a [f64]>,
}

pub struct Options {
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
    pub level: u32,
    pub steps: usize,
    pub max_level: u32,
}

fn need<'a, T>(x: Option<&'a T>, what: &str, suite: Suite) -> Result<&'a T, CliError> {
    x.ok_or_else(|| CliError::Validation(format!("suite `{}` needs {what}", suite.name())))
}

fn grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect()
}

pub fn run(suite: Suite, inputs: &Inputs, opts: &Options) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let tol = opts.tol;
    let props = match suite {
        Suite::Chen => {
            let m = need(inputs.model, "--model", suite)?;
            let h = m.horizon();
            let mut worst = 0.0f64;
            for _ in 0..opts.samples {
                let (s, u, t) = (rng.gen_range(0.0..=h), rng.gen_range(0.0..=h), rng.gen_range(0.0..=h));
                worst = worst.max(m.chen_residual(s, u, t)?);
            }
            vec![Property::at_most("chen-residual", worst, tol)]
        }
        Suite::Character => {
            let m = need(inputs.model, "--model", suite)?;
            let h = m.horizon();
            let mut worst = 0.0f64;
            for _ in 0..opts.samples {
                worst = worst.max(m.character_residual(rng.gen_range(0.0..=h), rng.gen_range(0.0..=h))?);
            }
            vec![Property::at_most("character-residual", worst, tol)]
        }
        Suite::Lie => {
            let m = need(inputs.model, "--model", suite)?;
            let ctx = m.driver().hopf_context();
            let (mut lie, mut fd) = (0.0f64, 0.0f64);
            for _ in 0..opts.samples {
                let s = rng.gen_range(0.0..m.horizon());
                let x = m.diagonal_derivative(s)?;
                lie = lie.max(ctx.inf_character_residual(&x, m.level()));
                fd = fd.max(x.distance(&m.diagonal_derivative_fd(s, 1e-6)?) / (1.0 + x.norm_inf()));
            }
            vec![Property::at_most("diagonal-derivative-lie-residual", lie, tol), Property::at_most("finite-difference-agreement", fd, 1e-4)]
        }
        Suite::Hoffman => {
            let a = match (&inputs.alphabet, inputs.model) {
                (Some(a), _) => a.clone(),
                (None, Some(m)) => m.alphabet().clone(),
                _ => return Err(CliError::Validation("suite `hoffman` needs --alphabet or --model".into())),
            };
            let words = words_up_to(&a, opts.level);
            let mut inverse = 0.0f64;
            for w in &words {
                let unit = TensorSeries::word(&a, w.weight(), w.clone(), 1.0);
                inverse = inverse.max(hoffman_log_series(&hoffman_exp(&a, w)?)?.distance(&unit));
                inverse = inverse.max(hoffman_exp_series(&hoffman_log(&a, w)?)?.distance(&unit));
            }
            let (sh, qs) = (HopfContext::shuffle(&a), HopfContext::quasi(&a));
            let mut morphism = 0.0f64;
            for u in words.iter().skip(1) {
                for v in words.iter().skip(1).filter(|v| u.weight() + v.weight() <= opts.level) {
                    let level = u.weight() + v.weight();
                    let lhs = hoffman_exp_series(&sh.product(u, v))?;
                    let rhs = qs.product_series(&hoffman_exp(&a, u)?, &hoffman_exp(&a, v)?, level)?;
                    morphism = morphism.max(lhs.distance(&rhs));
                }
            }
            vec![Property::at_most("inverse-residual", inverse, tol), Property::at_most("morphism-residual", morphism, tol)]
        }
        Suite::Renormalization => {
            let m = need(inputs.model, "--model", suite)?;
            let t = need(inputs.translation, "--translation", suite)?;
            let r = renormalize_model(m, t, opts.max_level)?;
            let g = grid(m.horizon(), 10);
            let mut worst = 0.0f64;
            for (i, &s) in g.iter().enumerate() {
                for &u in &g[i + 1..] {
                    let lhs = translate(&m.signature(s, u, r.level())?, t, r.level())?;
                    worst = worst.max(lhs.distance(&r.increment(s, u)?));
                }
            }
            vec![Property::at_most("translated-signature-vs-renormalized-model", worst, tol)]
        }
        Suite::Sum => {
            let x = need(inputs.model, "--model", suite)?;
            let reversed = x.reverse_time();
            let y = inputs.other.unwrap_or(&reversed);
            let g = grid(x.horizon(), 8);
            let diff = |p: &SmoothModel, q: &SmoothModel| -> Result<f64, CliError> {
                let mut worst = 0.0f64;
                for (i, &s) in g.iter().enumerate() {
                    for &t in &g[i + 1..] {
                        worst = worst.max(p.increment(s, t)?.distance(&q.increment(s, t)?));
                    }
                }
                Ok(worst)
            };
            let xy = canonical_sum(x, y)?;
            let comm = diff(&xy, &canonical_sum(y, x)?)?;
            let l = rng.gen_range(-2.0..2.0);
            let dist = diff(&scalar(l, &xy)?, &canonical_sum(&scalar(l, x)?, &scalar(l, y)?)?)?;
            let zero = scalar(0.0, x)?;
            let one = TensorSeries::one(x.alphabet(), zero.level());
            let mut zero_dev = 0.0f64;
            for &t in &g {
                zero_dev = zero_dev.max(zero.increment(0.0, t)?.distance(&one));
            }
            let level = xy.level();
            let mut rates = [0.0f64; 2];
            for (r, h) in rates.iter_mut().zip([1e-3 * x.horizon(), 1e-4 * x.horizon()]) {
                for &s in &g[..g.len() - 1] {
                    let z = xy.increment(s, s + h)?;
                    let p = x.signature(s, s + h, level)?.concat(&y.signature(s, s + h, level)?, level)?;
                    *r = r.max(z.distance(&p) / h);
                }
            }
            let mut props = vec![
                Property::at_most("commutativity", comm, tol),
                Property::at_most("scalar-distributivity", dist, tol),
                Property::at_most("zero-scalar-is-unit", zero_dev, tol),
            ];
            // Below tolerance the discrepancy is roundoff and has no decay rate.
            if rates[0] * 1e-3 * x.horizon() <= tol {
                props.push(Property::at_most("sum-vs-product-discrepancy", rates[0] * 1e-3 * x.horizon(), tol));
            } else {
                props.push(Property::at_least("first-order-decay-per-decade", rates[0] / rates[1].max(f64::MIN_POSITIVE), 5.0));
            }
            props
        }
        Suite::Rde => {
            let m = need(inputs.model, "--model", suite)?;
            let f = need(inputs.fields, "--fields", suite)?;
            let y0 = inputs.y0.ok_or_else(|| CliError::Validation("suite `rde` needs --y0".into()))?;
            let mode = inputs.mode.unwrap_or(FieldMode::Geometric);
            let traj = solve_rde(m, f, mode, y0, opts.steps)?;
            let report = davie_check(m, f, mode, &traj, 0.05 * m.horizon())?;
            let mut props = vec![Property::at_least("davie-remainder-decay", report.ratio, 10.0)];
            if let Some(t) = inputs.translation {
                let eq = equivalence_check(m, f, t, mode, y0, opts.steps, opts.max_level)?;
                props.push(Property::at_most("renormalization-equivalence", eq.deviation, tol));
                if let Some(c) = eq.conjugated_deviation {
                    props.push(Property::at_most("conjugated-equivalence", c, tol));
                }
            }
            props
        }
    };
    Ok(Report::new(suite.name(), props))
}
