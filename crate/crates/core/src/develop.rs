//! Drivers, Cartan development and smooth rough models.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::alphabet::Alphabet;
use crate::dense::WordIndex;
use crate::error::{bail, Result};
use crate::hoffman::LetterMorphism;
use crate::hopf::{HopfContext, ProductKind};
use crate::series::TensorSeries;
use crate::DEFAULT_TOL;

/// Polynomial in absolute time, `Σ c_k t^k`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly1 {
    coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        while p.coeffs.last() == Some(&0.0) {
            p.coeffs.pop();
        }
        p
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * lambda).collect())
    }

    /// `q(t) = p(T − t)`.
    pub fn reflect(&self, horizon: f64) -> Self {
        // Expand Σ c_k (T − t)^k with binomial coefficients.
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let mut binom = 1.0;
            for j in 0..=k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out[j] += c * binom * sign * crate::series::powi(horizon, (k - j) as u32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        Self::new(out)
    }
}

/// Velocity of a driver on one segment.
#[derive(Clone, Debug, PartialEq)]
pub enum Velocity {
    /// A fixed Lie element.
    Constant(TensorSeries),
    /// `Σ_k p_k(t) x_k` for Lie elements `x_k` and scalar polynomials `p_k`.
    Polynomial(Vec<(Poly1, TensorSeries)>),
}

impl Velocity {
    pub fn at(&self, t: f64) -> Result<TensorSeries> {
        match self {
            Velocity::Constant(v) => Ok(v.clone()),
            Velocity::Polynomial(terms) => {
                let (_, first) = match terms.first() {
                    Some(t) => t,
                    None => bail!(Structural, "polynomial velocity without terms"),
                };
                let mut out = TensorSeries::zero(first.alphabet(), first.level());
                for (p, x) in terms {
                    out = out.axpy(p.eval(t), x)?;
                }
                Ok(out)
            }
        }
    }

    /// The series appearing in the velocity.
    pub fn series(&self) -> Vec<&TensorSeries> {
        match self {
            Velocity::Constant(v) => vec![v],
            Velocity::Polynomial(terms) => terms.iter().map(|(_, x)| x).collect(),
        }
    }

    /// Polynomial-form terms, constants becoming degree-0 terms.
    pub fn terms(&self) -> Vec<(Poly1, TensorSeries)> {
        match self {
            Velocity::Constant(v) => vec![(Poly1::constant(1.0), v.clone())],
            Velocity::Polynomial(terms) => terms.clone(),
        }
    }

    /// Applies a linear map to every series.
    pub fn map_series<F>(&self, mut f: F) -> Result<Velocity>
    where
        F: FnMut(&TensorSeries) -> Result<TensorSeries>,
    {
        Ok(match self {
            Velocity::Constant(v) => Velocity::Constant(f(v)?),
            Velocity::Polynomial(terms) => {
                Velocity::Polynomial(terms.iter().map(|(p, x)| Ok((p.clone(), f(x)?))).collect::<Result<_>>()?)
            }
        })
    }
}

/// A time interval `[t0, t1]` with its velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub velocity: Velocity,
}

impl Segment {
    pub fn constant(t0: f64, t1: f64, v: TensorSeries) -> Self {
        Self { t0, t1, velocity: Velocity::Constant(v) }
    }

    pub fn polynomial(t0: f64, t1: f64, terms: Vec<(Poly1, TensorSeries)>) -> Self {
        Self { t0, t1, velocity: Velocity::Polynomial(terms) }
    }
}

/// Piecewise closed-form Lie-valued velocity `t ↦ 𝔶(t)` on `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Driver {
    alphabet: Arc<Alphabet>,
    context: ProductKind,
    level: u32,
    segments: Vec<Segment>,
    approximate: bool,
}

impl Driver {
    /// Validates tiling of `[0,T]`, alphabets, levels and Lie membership of
    /// every velocity series under the context's product.
    pub fn new(alphabet: &Arc<Alphabet>, context: ProductKind, level: u32, segments: Vec<Segment>) -> Result<Self> {
        if level == 0 {
            bail!(Precondition, "driver level must be at least 1");
        }
        if segments.is_empty() {
            bail!(Structural, "driver has no segments");
        }
        if segments[0].t0 != 0.0 {
            bail!(Structural, "segments must start at t = 0, first starts at {}", segments[0].t0);
        }
        for (k, seg) in segments.iter().enumerate() {
            if !(seg.t1 > seg.t0) || !seg.t1.is_finite() {
                bail!(Structural, "segment {k} has empty or invalid interval [{}, {}]", seg.t0, seg.t1);
            }
            if k > 0 && seg.t0 != segments[k - 1].t1 {
                bail!(Structural, "segment {k} starts at {} but segment {} ends at {}", seg.t0, k - 1, segments[k - 1].t1);
            }
            if let Velocity::Polynomial(terms) = &seg.velocity {
                if terms.is_empty() {
                    bail!(Structural, "segment {k} has a polynomial velocity without terms");
                }
            }
        }
        let ctx = HopfContext::new(alphabet, context);
        for (k, seg) in segments.iter().enumerate() {
            for x in seg.velocity.series() {
                if !(Arc::ptr_eq(x.alphabet(), alphabet) || **x.alphabet() == **alphabet) {
                    bail!(Structural, "segment {k} velocity uses a different alphabet");
                }
                if x.max_grade() > level {
                    bail!(Precondition, "segment {k} velocity has grade {} above driver level {level}", x.max_grade());
                }
                if !ctx.is_lie(x, level, DEFAULT_TOL) {
                    bail!(
                        Domain,
                        "segment {k} velocity is not a Lie element (residual {:e})",
                        ctx.inf_character_residual(x, level)
                    );
                }
            }
        }
        Ok(Self::new_unchecked(alphabet, context, level, segments))
    }

    pub(crate) fn new_unchecked(alphabet: &Arc<Alphabet>, context: ProductKind, level: u32, segments: Vec<Segment>) -> Self {
        let segments = segments
            .into_iter()
            .map(|s| Segment {
                t0: s.t0,
                t1: s.t1,
                velocity: s.velocity.map_series(|x| Ok(x.truncate(level))).unwrap_or(s.velocity),
            })
            .collect();
        Self { alphabet: alphabet.clone(), context, level, segments, approximate: false }
    }

    /// A single constant-velocity segment on `[0, T]`.
    pub fn constant(v: TensorSeries, context: ProductKind, horizon: f64) -> Result<Self> {
        let level = v.level().max(1);
        let alphabet = v.alphabet().clone();
        Self::new(&alphabet, context, level, vec![Segment::constant(0.0, horizon, v)])
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn context(&self) -> ProductKind {
        self.context
    }

    pub fn hopf_context(&self) -> HopfContext {
        HopfContext::new(&self.alphabet, self.context)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// End time `T`.
    pub fn horizon(&self) -> f64 {
        self.segments.last().map(|s| s.t1).unwrap_or(0.0)
    }

    /// Segment boundaries `0 = τ_0 < … < τ_k = T`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.segments.iter().map(|s| s.t0).collect();
        out.push(self.horizon());
        out
    }

    /// True for drivers fitted from samples.
    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    /// `𝔶(t)`; right-continuous at joints, left limit at `T`.
    pub fn velocity_at(&self, t: f64) -> Result<TensorSeries> {
        self.check_time(t)?;
        let seg = self.segments.iter().find(|s| t < s.t1).unwrap_or_else(|| self.segments.last().unwrap());
        seg.velocity.at(t)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let horizon = self.horizon();
        if !(t >= 0.0 && t <= horizon) {
            bail!(Precondition, "time {t} lies outside [0, {horizon}]");
        }
        Ok(())
    }

    /// Maps every velocity series through `f`, keeping segment times.
    pub(crate) fn map_velocities<F>(&self, context: ProductKind, level: u32, f: F) -> Result<Driver>
    where
        F: FnMut(&TensorSeries) -> Result<TensorSeries>,
    {
        let alphabet = self.alphabet.clone();
        self.map_into(&alphabet, context, level, f)
    }

    /// As [`map_velocities`](Self::map_velocities) with a new alphabet.
    pub(crate) fn map_into<F>(&self, alphabet: &Arc<Alphabet>, context: ProductKind, level: u32, mut f: F) -> Result<Driver>
    where
        F: FnMut(&TensorSeries) -> Result<TensorSeries>,
    {
        let segments = self
            .segments
            .iter()
            .map(|s| Ok(Segment { t0: s.t0, t1: s.t1, velocity: s.velocity.map_series(&mut f)? }))
            .collect::<Result<Vec<_>>>()?;
        let mut d = Driver::new_unchecked(alphabet, context, level, segments);
        d.approximate = self.approximate;
        Ok(d)
    }

    pub(crate) fn set_approximate(&mut self, approximate: bool) {
        self.approximate = approximate;
    }

    /// Velocity `−𝔶(T − t)`.
    pub fn reverse_time(&self) -> Driver {
        let horizon = self.horizon();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| {
                let velocity = match &s.velocity {
                    Velocity::Constant(v) => Velocity::Constant(v.scale(-1.0)),
                    Velocity::Polynomial(terms) => {
                        Velocity::Polynomial(terms.iter().map(|(p, x)| (p.reflect(horizon).scale(-1.0), x.clone())).collect())
                    }
                };
                Segment { t0: horizon - s.t1, t1: horizon - s.t0, velocity }
            })
            .collect();
        let mut d = Driver::new_unchecked(&self.alphabet, self.context, self.level, segments);
        d.approximate = self.approximate;
        d
    }

    /// Fits a driver from group values `X_{t_k}` sampled on increasing
    /// times starting at 0. Velocities are central differences
    /// `log(X_{t_{k-1}}^{-1} X_{t_{k+1}}) / (t_{k+1} − t_{k−1})` (one-sided at
    /// the ends), joined piecewise linearly. The result is flagged approximate.
    pub fn fit_from_samples(times: &[f64], values: &[TensorSeries], context: ProductKind, level: u32) -> Result<Driver> {
        if times.len() != values.len() || times.len() < 2 {
            bail!(Structural, "need at least two samples with matching times");
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            bail!(Structural, "sample times must start at 0 and increase strictly");
        }
        let alphabet = values[0].alphabet().clone();
        let n = times.len();
        let mut vel = Vec::with_capacity(n);
        for k in 0..n {
            let (i, j) = (k.saturating_sub(1), (k + 1).min(n - 1));
            let inc = values[i].truncate(level).inverse()?.concat(&values[j].truncate(level), level)?;
            vel.push(inc.log_trunc(level)?.scale(1.0 / (times[j] - times[i])));
        }
        let mut segments = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            let (a, b) = (times[k], times[k + 1]);
            // Linear interpolation: v_k (b − t)/(b − a) + v_{k+1} (t − a)/(b − a).
            let pa = Poly1::new(vec![b / (b - a), -1.0 / (b - a)]);
            let pb = Poly1::new(vec![-a / (b - a), 1.0 / (b - a)]);
            segments.push(Segment::polynomial(a, b, vec![(pa, vel[k].clone()), (pb, vel[k + 1].clone())]));
        }
        let mut d = Driver::new_unchecked(&alphabet, context, level, segments);
        d.approximate = true;
        Ok(d)
    }
}

/// Fixed-step settings for polynomial segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Integrator {
    /// RK4 steps per (partial) polynomial segment.
    pub steps_per_segment: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { steps_per_segment: 1000 }
    }
}

/// Cartan development: solves `Ẋ = X ⊗_N 𝔶(t)`, `X_s = 𝟏`, on `[s, t]`.
/// Constant segments are stepped exactly with `exp`, polynomial segments with
/// RK4. Reversed intervals return the inverse of the forward increment.
pub fn develop(driver: &Driver, s: f64, t: f64, level: u32, integrator: Integrator) -> Result<TensorSeries> {
    if level < driver.level {
        bail!(Precondition, "working level {level} is below the driver level {}", driver.level);
    }
    let index = WordIndex::new(&driver.alphabet, level);
    develop_with(driver, &index, s, t, integrator)
}

fn develop_with(driver: &Driver, index: &WordIndex, s: f64, t: f64, integrator: Integrator) -> Result<TensorSeries> {
    driver.check_time(s)?;
    driver.check_time(t)?;
    if t < s {
        return index.to_series(&develop_dense(driver, index, t, s, integrator)?).inverse();
    }
    Ok(index.to_series(&develop_dense(driver, index, s, t, integrator)?))
}

fn develop_dense(driver: &Driver, index: &WordIndex, s: f64, t: f64, integrator: Integrator) -> Result<Vec<f64>> {
    let mut x = index.one();
    if s == t {
        return Ok(x);
    }
    let steps = integrator.steps_per_segment.max(1);
    for seg in &driver.segments {
        let (a, b) = (s.max(seg.t0), t.min(seg.t1));
        if !(b > a) {
            continue;
        }
        match &seg.velocity {
            Velocity::Constant(v) => {
                let y: Vec<(usize, f64)> = index.sparse(v).into_iter().map(|(i, c)| (i, c * (b - a))).collect();
                x = index.mul(&x, &index.exp(&y));
            }
            Velocity::Polynomial(terms) => {
                let sparse: Vec<(Poly1, Vec<(usize, f64)>)> = terms.iter().map(|(p, v)| (p.clone(), index.sparse(v))).collect();
                rk4(index, &mut x, &sparse, a, b, steps);
            }
        }
    }
    Ok(x)
}

// Evaluates Σ p_k(t) v_k as a sparse vector over the union of supports.
struct SparseVelocity<'a> {
    terms: &'a [(Poly1, Vec<(usize, f64)>)],
    support: Vec<usize>,
    scratch: Vec<f64>,
}

impl<'a> SparseVelocity<'a> {
    fn new(terms: &'a [(Poly1, Vec<(usize, f64)>)], n: usize) -> Self {
        let mut support: Vec<usize> = terms.iter().flat_map(|(_, v)| v.iter().map(|e| e.0)).collect();
        support.sort_unstable();
        support.dedup();
        Self { terms, support, scratch: vec![0.0; n] }
    }

    fn eval(&mut self, t: f64, out: &mut Vec<(usize, f64)>) {
        for &i in &self.support {
            self.scratch[i] = 0.0;
        }
        for (p, v) in self.terms {
            let c = p.eval(t);
            for &(i, x) in v {
                self.scratch[i] += c * x;
            }
        }
        out.clear();
        out.extend(self.support.iter().map(|&i| (i, self.scratch[i])));
    }
}

fn rk4(index: &WordIndex, x: &mut [f64], terms: &[(Poly1, Vec<(usize, f64)>)], a: f64, b: f64, steps: usize) {
    let n = index.len();
    let h = (b - a) / steps as f64;
    let mut vel = SparseVelocity::new(terms, n);
    let (mut y1, mut y2, mut y3) = (Vec::new(), Vec::new(), Vec::new());
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    for step in 0..steps {
        let t0 = a + step as f64 * h;
        let t1 = if step + 1 == steps { b } else { t0 + h };
        vel.eval(t0, &mut y1);
        vel.eval(0.5 * (t0 + t1), &mut y2);
        vel.eval(t1, &mut y3);
        index.mul_sparse(x, &y1, &mut k[0]);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k[0][i];
        }
        index.mul_sparse(&tmp, &y2, &mut k[1]);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k[1][i];
        }
        index.mul_sparse(&tmp, &y2, &mut k[2]);
        for i in 0..n {
            tmp[i] = x[i] + h * k[2][i];
        }
        index.mul_sparse(&tmp, &y3, &mut k[3]);
        for i in 0..n {
            x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
    }
}

/// A driver developed at a working level `N′ ≥ N`.
#[derive(Clone)]
pub struct SmoothModel {
    driver: Driver,
    level: u32,
    integrator: Integrator,
    index: Arc<WordIndex>,
}

impl core::fmt::Debug for SmoothModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SmoothModel")
            .field("driver", &self.driver)
            .field("level", &self.level)
            .field("integrator", &self.integrator)
            .finish()
    }
}

impl SmoothModel {
    pub fn new(driver: Driver, level: u32) -> Result<Self> {
        if level < driver.level {
            bail!(Precondition, "working level {level} is below the driver level {}", driver.level);
        }
        let index = Arc::new(WordIndex::new(&driver.alphabet, level));
        Ok(Self { driver, level, integrator: Integrator::default(), index })
    }

    /// Model at the driver's own level.
    pub fn from_driver(driver: Driver) -> Self {
        let level = driver.level;
        Self::new(driver, level).expect("driver level is admissible")
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.driver.alphabet
    }

    pub fn context(&self) -> ProductKind {
        self.driver.context
    }

    pub fn horizon(&self) -> f64 {
        self.driver.horizon()
    }

    /// `X_{s,t}` at the working level.
    pub fn increment(&self, s: f64, t: f64) -> Result<TensorSeries> {
        develop_with(&self.driver, &self.index, s, t, self.integrator)
    }

    /// `X_t = X_{0,t}`.
    pub fn path(&self, t: f64) -> Result<TensorSeries> {
        self.increment(0.0, t)
    }

    /// Same driver developed at a higher level.
    pub fn minimal_extension(&self, level: u32) -> Result<SmoothModel> {
        if level <= self.level {
            bail!(Precondition, "extension level {level} must exceed the model level {}", self.level);
        }
        Ok(SmoothModel::new(self.driver.clone(), level)?.with_integrator(self.integrator))
    }

    /// Signature on `[s, t]` at level `N′ ≥` driver level.
    pub fn signature(&self, s: f64, t: f64, level: u32) -> Result<TensorSeries> {
        if level == self.level {
            return self.increment(s, t);
        }
        develop(&self.driver, s, t, level, self.integrator)
    }

    /// `Ẋ_{s,s}` in closed form.
    pub fn diagonal_derivative(&self, s: f64) -> Result<TensorSeries> {
        Ok(self.driver.velocity_at(s)?.truncate(self.level))
    }

    /// Finite-difference estimate `(X_{s,s+h} − 𝟏)/h` (backward near `T`).
    pub fn diagonal_derivative_fd(&self, s: f64, h: f64) -> Result<TensorSeries> {
        let one = TensorSeries::one(self.alphabet(), self.level);
        if s + h <= self.horizon() {
            Ok(self.increment(s, s + h)?.sub(&one)?.scale(1.0 / h))
        } else {
            Ok(one.sub(&self.increment(s, s - h)?)?.scale(1.0 / h))
        }
    }

    /// Largest coefficient of `X_{s,u} ⊗ X_{u,t} − X_{s,t}`.
    pub fn chen_residual(&self, s: f64, u: f64, t: f64) -> Result<f64> {
        let lhs = self.increment(s, u)?.concat(&self.increment(u, t)?, self.level)?;
        Ok(lhs.distance(&self.increment(s, t)?))
    }

    /// Character residual of `X_{s,t}` under the model's product.
    pub fn character_residual(&self, s: f64, t: f64) -> Result<f64> {
        let x = self.increment(s, t)?;
        Ok(self.driver.hopf_context().character_residual(&x, self.level))
    }

    /// `Φ*_H` applied to the driver: a weighted geometric model.
    pub fn hoffman_conjugate(&self) -> Result<SmoothModel> {
        if self.context() != ProductKind::QuasiShuffle {
            bail!(Structural, "Hoffman conjugation needs a quasi-shuffle model");
        }
        let m = LetterMorphism::hoffman(self.alphabet(), false);
        let level = self.driver.level;
        let d = self.driver.map_velocities(ProductKind::Shuffle, level, |x| m.apply(x, level))?;
        Ok(SmoothModel::new(d, self.level)?.with_integrator(self.integrator))
    }

    /// Inverse of [`hoffman_conjugate`](Self::hoffman_conjugate) (`Ψ*_H`).
    pub fn hoffman_deconjugate(&self) -> Result<SmoothModel> {
        if self.context() != ProductKind::Shuffle {
            bail!(Structural, "Hoffman deconjugation needs a shuffle model");
        }
        let m = LetterMorphism::hoffman(self.alphabet(), true);
        let level = self.driver.level;
        let d = self.driver.map_velocities(ProductKind::QuasiShuffle, level, |x| m.apply(x, level))?;
        Ok(SmoothModel::new(d, self.level)?.with_integrator(self.integrator))
    }

    /// Model driven by `−𝔶(T − t)`.
    pub fn reverse_time(&self) -> SmoothModel {
        SmoothModel { driver: self.driver.reverse_time(), ..self.clone() }
    }

    /// Pointwise dilation `δ_λ X`, realized on the driver.
    pub fn dilate(&self, lambda: f64) -> SmoothModel {
        let d = self
            .driver
            .map_velocities(self.context(), self.driver.level, |x| Ok(x.dilate(lambda)))
            .expect("dilation is total");
        SmoothModel { driver: d, ..self.clone() }
    }
}
