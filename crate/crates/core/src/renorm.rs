//! Translation maps, renormalization of models, canonical sums and
//! minimal coupling.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::alphabet::{Alphabet, Letter};
use crate::develop::{Driver, Segment, SmoothModel, Velocity};
use crate::error::{bail, Result};
use crate::hoffman::LetterMorphism;
use crate::hopf::{HopfContext, ProductKind};
use crate::series::TensorSeries;
use crate::{DEFAULT_MAX_LEVEL, DEFAULT_TOL};

/// How a translation acts on letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationMode {
    /// Substitution `e_a ↦ e_a + v_a`, extended multiplicatively.
    Geometric,
    /// `T̂_u = Ψ*_H ∘ T_û ∘ Φ*_H` with `û_a = Φ*_H(u_a)`.
    Quasi,
}

/// A family of directions indexed by letters. Letters without a direction
/// are left fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct Translation {
    alphabet: Arc<Alphabet>,
    mode: TranslationMode,
    directions: BTreeMap<Letter, TensorSeries>,
}

impl Translation {
    /// Builds a translation whose directions must be Lie elements under the
    /// context's product. Quasi mode needs a quasi-shuffle context.
    pub fn new(ctx: &HopfContext, mode: TranslationMode, directions: Vec<(Letter, TensorSeries)>) -> Result<Self> {
        if mode == TranslationMode::Quasi && ctx.kind() != ProductKind::QuasiShuffle {
            bail!(Structural, "quasi translations need a quasi-shuffle context");
        }
        let alphabet = ctx.alphabet().clone();
        let mut map = BTreeMap::new();
        for (a, v) in directions {
            if a.index() >= alphabet.len() {
                bail!(Structural, "direction for unknown letter index {}", a.0);
            }
            if !(Arc::ptr_eq(v.alphabet(), &alphabet) || **v.alphabet() == *alphabet) {
                bail!(Structural, "direction for \"{}\" uses a different alphabet", alphabet.name(a));
            }
            if !ctx.is_lie(&v, v.level(), DEFAULT_TOL) {
                bail!(Domain, "direction for \"{}\" is not a Lie element", alphabet.name(a));
            }
            if map.insert(a, v).is_some() {
                bail!(Structural, "two directions for \"{}\"", alphabet.name(a));
            }
        }
        Ok(Self { alphabet, mode, directions: map })
    }

    /// The identity translation.
    pub fn identity(alphabet: &Arc<Alphabet>, mode: TranslationMode) -> Self {
        Self { alphabet: alphabet.clone(), mode, directions: BTreeMap::new() }
    }

    pub fn mode(&self) -> TranslationMode {
        self.mode
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn direction(&self, a: Letter) -> Option<&TensorSeries> {
        self.directions.get(&a)
    }

    pub fn directions(&self) -> impl Iterator<Item = (Letter, &TensorSeries)> + '_ {
        self.directions.iter().map(|(a, v)| (*a, v))
    }

    /// `N′`: the largest grade among directions, at least 1.
    pub fn max_grade(&self) -> u32 {
        self.directions.values().map(TensorSeries::max_grade).max().unwrap_or(0).max(1)
    }

    // Letter images e_a + d_a at `level`, where d_a is produced by `dir`.
    fn substitution<F>(&self, level: u32, mut dir: F) -> Result<LetterMorphism>
    where
        F: FnMut(&TensorSeries) -> Result<TensorSeries>,
    {
        let mut images = Vec::with_capacity(self.alphabet.len());
        for a in self.alphabet.letters() {
            let mut img = TensorSeries::letter(&self.alphabet, level, a);
            if let Some(v) = self.directions.get(&a) {
                img = img.add(&dir(v)?.truncate(level))?.truncate(level);
            }
            images.push(img);
        }
        Ok(LetterMorphism::new(images))
    }

    /// `proj_M T(x)`.
    pub fn apply(&self, x: &TensorSeries, level: u32) -> Result<TensorSeries> {
        if !(Arc::ptr_eq(x.alphabet(), &self.alphabet) || **x.alphabet() == *self.alphabet) {
            bail!(Structural, "series and translation live over different alphabets");
        }
        let x = x.truncate(x.level().min(level));
        match self.mode {
            TranslationMode::Geometric => self.substitution(level, |v| Ok(v.clone()))?.apply(&x, level),
            TranslationMode::Quasi => {
                let phi = LetterMorphism::hoffman(&self.alphabet, false);
                let psi = LetterMorphism::hoffman(&self.alphabet, true);
                let t_hat = self.substitution(level, |u| phi.apply(u, u.level()))?;
                let y = phi.apply(&x, x.level())?;
                psi.apply(&t_hat.apply(&y, level)?, level)
            }
        }
    }
}

/// `proj_M T(x)`; see [`Translation::apply`].
pub fn translate(x: &TensorSeries, t: &Translation, level: u32) -> Result<TensorSeries> {
    t.apply(x, level)
}

/// Renormalized model with driver `T(𝔶(t))`. Levels are multiplied by the
/// translation's `N′`; results above `max_level` are refused.
pub fn renormalize_model(model: &SmoothModel, t: &Translation, max_level: u32) -> Result<SmoothModel> {
    if !(Arc::ptr_eq(model.alphabet(), &t.alphabet) || **model.alphabet() == *t.alphabet) {
        bail!(Structural, "model and translation live over different alphabets");
    }
    let n_prime = t.max_grade();
    let driver_level = model.driver().level() * n_prime;
    let level = model.level() * n_prime;
    if level > max_level {
        bail!(Capacity, "renormalized level {level} exceeds the cap {max_level}");
    }
    let d = model.driver().map_velocities(model.context(), driver_level, |x| t.apply(x, driver_level))?;
    model_with(model, d, level)
}

/// [`renormalize_model`] with the default level cap.
pub fn renormalize(model: &SmoothModel, t: &Translation) -> Result<SmoothModel> {
    renormalize_model(model, t, DEFAULT_MAX_LEVEL)
}

fn model_with(template: &SmoothModel, driver: Driver, level: u32) -> Result<SmoothModel> {
    Ok(SmoothModel::new(driver, level)?.with_integrator(template.integrator()))
}

/// The model with zero velocity, `X_{s,t} = 𝟏`.
pub fn zero_model(alphabet: &Arc<Alphabet>, context: ProductKind, level: u32, horizon: f64) -> Result<SmoothModel> {
    let d = Driver::new(alphabet, context, level, alloc::vec![Segment::constant(0.0, horizon, TensorSeries::zero(alphabet, level))])?;
    SmoothModel::new(d, level)
}

/// Model with constant velocity `v` on `[0, T]`.
pub fn constant_model(v: &TensorSeries, context: ProductKind, level: u32, horizon: f64) -> Result<SmoothModel> {
    let d = Driver::new(v.alphabet(), context, v.max_grade().max(1), alloc::vec![Segment::constant(0.0, horizon, v.clone())])?;
    SmoothModel::new(d, level.max(v.max_grade()))
}

/// `X ⊞ Y`: velocities add over the common refinement of segments. The result
/// uses the larger driver and working levels.
pub fn canonical_sum(x: &SmoothModel, y: &SmoothModel) -> Result<SmoothModel> {
    if !(Arc::ptr_eq(x.alphabet(), y.alphabet()) || **x.alphabet() == **y.alphabet()) {
        bail!(Structural, "canonical sum needs a common alphabet");
    }
    if x.context() != y.context() {
        bail!(Structural, "canonical sum of shuffle and quasi-shuffle models");
    }
    let (tx, ty) = (x.horizon(), y.horizon());
    if tx != ty {
        bail!(Structural, "canonical sum of models on [0,{tx}] and [0,{ty}]");
    }
    let level = x.driver().level().max(y.driver().level());
    let mut cuts = x.driver().breakpoints();
    cuts.extend(y.driver().breakpoints());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut segments = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let vx = segment_at(x.driver(), mid);
        let vy = segment_at(y.driver(), mid);
        let velocity = match (vx, vy) {
            (Velocity::Constant(p), Velocity::Constant(q)) => Velocity::Constant(p.truncate(level).add(&q.truncate(level))?),
            (p, q) => {
                let mut terms = p.terms();
                terms.extend(q.terms());
                Velocity::Polynomial(terms.into_iter().map(|(c, s)| (c, s.truncate(level))).collect())
            }
        };
        segments.push(Segment { t0: a, t1: b, velocity });
    }
    let mut d = Driver::new_unchecked(x.alphabet(), x.context(), level, segments);
    d.set_approximate(x.driver().is_approximate() || y.driver().is_approximate());
    model_with(x, d, x.level().max(y.level()).max(level))
}

fn segment_at(d: &Driver, t: f64) -> &Velocity {
    &d.segments().iter().find(|s| t < s.t1).unwrap_or_else(|| d.segments().last().unwrap()).velocity
}

/// `λ ⊡ X`: velocities scaled by `λ`.
pub fn scalar(lambda: f64, x: &SmoothModel) -> Result<SmoothModel> {
    let d = x.driver().map_velocities(x.context(), x.driver().level(), |v| Ok(v.scale(lambda)))?;
    model_with(x, d, x.level())
}

/// Embeds every model into the union of the (disjoint) alphabets and sums.
pub fn minimal_coupling(models: &[SmoothModel]) -> Result<SmoothModel> {
    let (first, rest) = match models.split_first() {
        Some(p) => p,
        None => bail!(Structural, "minimal coupling of no models"),
    };
    let mut alphabet = (**first.alphabet()).clone();
    for m in rest {
        if m.context() != first.context() {
            bail!(Structural, "minimal coupling of shuffle and quasi-shuffle models");
        }
        alphabet = alphabet.union(m.alphabet())?;
    }
    let alphabet = Arc::new(alphabet);
    let mut embedded = Vec::with_capacity(models.len());
    for m in models {
        let d = m.driver().map_into(&alphabet, m.context(), m.driver().level(), |v| v.embed(&alphabet))?;
        embedded.push(model_with(m, d, m.level())?);
    }
    let mut acc = embedded[0].clone();
    for m in &embedded[1..] {
        acc = canonical_sum(&acc, m)?;
    }
    Ok(acc)
}

/// The translation `e_0 ↦ e_0 + v0` fixing every other letter, in the mode
/// matching the model's context (geometric for shuffle, quasi otherwise).
pub fn time_translation(model: &SmoothModel, time_letter: Letter, v0: &TensorSeries) -> Result<Translation> {
    let mode = match model.context() {
        ProductKind::Shuffle => TranslationMode::Geometric,
        ProductKind::QuasiShuffle => TranslationMode::Quasi,
    };
    Translation::new(&model.driver().hopf_context(), mode, alloc::vec![(time_letter, v0.clone())])
}

/// `V₀ ⊞ X̄` with `(V₀)_{s,t} = exp(v0 (t − s))`.
pub fn time_translate(model: &SmoothModel, v0: &TensorSeries) -> Result<SmoothModel> {
    let ctx = model.driver().hopf_context();
    if !ctx.is_lie(v0, v0.level(), DEFAULT_TOL) {
        bail!(Domain, "time-translation direction is not a Lie element");
    }
    let level = model.level().max(v0.max_grade());
    let v = constant_model(v0, model.context(), level, model.horizon())?.with_integrator(model.integrator());
    canonical_sum(&v, model)
}
