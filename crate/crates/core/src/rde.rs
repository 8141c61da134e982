//! Differential equations driven by smooth rough models.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::develop::{Poly1, SmoothModel};
use crate::error::{bail, Result};
use crate::field::{FieldMode, FieldTable, PolyVectorField};
use crate::hopf::ProductKind;
use crate::renorm::{renormalize_model, Translation};
use crate::series::TensorSeries;
use crate::word::Word;

/// States whose magnitude exceeds this are reported as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Solution sampled at uniform step boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest componentwise difference at matching samples.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        if self.states.len() != other.states.len() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (a, b) in self.states.iter().zip(&other.states) {
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            for (x, y) in a.iter().zip(b) {
                worst = worst.max(libm::fabs(x - y));
            }
        }
        worst
    }
}

// Per segment: polynomial coefficient and the vector field of each term.
struct Rhs {
    segments: Vec<(f64, f64, Vec<(Poly1, PolyVectorField)>)>,
    dimension: usize,
}

impl Rhs {
    fn new(model: &SmoothModel, table: &FieldTable, mode: FieldMode) -> Result<Self> {
        let table = solver_table(model, table, mode, model.driver().level())?;
        let mut segments = Vec::with_capacity(model.driver().segments().len());
        for seg in model.driver().segments() {
            let mut terms = Vec::new();
            for (p, x) in seg.velocity.terms() {
                let x = drop_unit(&x)?;
                if x.is_zero() {
                    continue;
                }
                terms.push((p, table.field_for(&x, FieldMode::Geometric)?));
            }
            segments.push((seg.t0, seg.t1, terms));
        }
        Ok(Self { segments, dimension: table.dimension() })
    }

    fn segment(&self, t: f64) -> usize {
        self.segments.iter().position(|s| t < s.1).unwrap_or(self.segments.len() - 1)
    }

    fn eval(&self, seg: usize, t: f64, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (p, f) in &self.segments[seg].2 {
            let c = p.eval(t);
            if c == 0.0 {
                continue;
            }
            for (o, comp) in out.iter_mut().zip(f.components()) {
                *o += c * comp.eval(y);
            }
        }
    }

    // One RK4 step with the segment chosen by the step midpoint.
    fn step(&self, t0: f64, h: f64, y: &mut [f64], k: &mut [Vec<f64>; 4], tmp: &mut [f64]) {
        let seg = self.segment(t0 + 0.5 * h);
        self.eval(seg, t0, y, &mut k[0]);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * h * k[0][i];
        }
        self.eval(seg, t0 + 0.5 * h, tmp, &mut k[1]);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * h * k[1][i];
        }
        self.eval(seg, t0 + 0.5 * h, tmp, &mut k[2]);
        for i in 0..y.len() {
            tmp[i] = y[i] + h * k[2][i];
        }
        self.eval(seg, t0 + h, tmp, &mut k[3]);
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
    }

    fn integrate(&self, y: &mut [f64], a: f64, b: f64, steps: usize) -> Result<()> {
        let n = self.dimension;
        let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut tmp = vec![0.0; n];
        let h = (b - a) / steps as f64;
        for i in 0..steps {
            self.step(a + i as f64 * h, h, y, &mut k, &mut tmp);
            check_finite(y, a + (i + 1) as f64 * h)?;
        }
        Ok(())
    }
}

fn check_finite(y: &[f64], t: f64) -> Result<()> {
    if y.iter().any(|v| !v.is_finite() || libm::fabs(*v) > DIVERGENCE_THRESHOLD) {
        bail!(Divergence, "solution left the representable range at t = {t}");
    }
    Ok(())
}

fn drop_unit(x: &TensorSeries) -> Result<TensorSeries> {
    let c = x.constant();
    if c == 0.0 {
        return Ok(x.clone());
    }
    x.sub(&TensorSeries::word(x.alphabet(), x.level(), Word::empty(), c))
}

// Table at `level` whose geometric word fields realize the requested mode.
fn solver_table(model: &SmoothModel, table: &FieldTable, mode: FieldMode, level: u32) -> Result<FieldTable> {
    if !(Arc::ptr_eq(model.alphabet(), table.alphabet()) || **model.alphabet() == **table.alphabet()) {
        bail!(Structural, "model and field table live over different alphabets");
    }
    let trivial = model.alphabet().has_trivial_bracket();
    match (mode, model.context()) {
        (FieldMode::Geometric, ProductKind::QuasiShuffle) if !trivial => {
            bail!(Structural, "geometric fields on a quasi-shuffle model; use quasi mode or conjugate the model")
        }
        (FieldMode::Quasi, ProductKind::Shuffle) if !trivial => {
            bail!(Structural, "quasi fields on a shuffle model")
        }
        _ => {}
    }
    let t = table.with_level(level)?;
    match mode {
        FieldMode::Geometric => Ok(t),
        FieldMode::Quasi => t.hat(),
    }
}

/// RK4 solution of `Ẏ_s = Σ_{1≤‖w‖≤N} f_w(Y_s)⟨Ẋ_{s,s}, w⟩` (`f̂_w` in quasi
/// mode) with `steps` uniform steps over `[0, T]`.
pub fn solve_rde(model: &SmoothModel, table: &FieldTable, mode: FieldMode, y0: &[f64], steps: usize) -> Result<Trajectory> {
    if y0.len() != table.dimension() {
        bail!(Structural, "initial value has {} components, fields act on ℝ^{}", y0.len(), table.dimension());
    }
    if steps == 0 {
        bail!(Precondition, "need at least one step");
    }
    let rhs = Rhs::new(model, table, mode)?;
    let horizon = model.horizon();
    let h = horizon / steps as f64;
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(y.clone());
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    for i in 0..steps {
        let t0 = i as f64 * h;
        rhs.step(t0, h, &mut y, &mut k, &mut tmp);
        let t1 = if i + 1 == steps { horizon } else { t0 + h };
        check_finite(&y, t1)?;
        times.push(t1);
        states.push(y.clone());
    }
    Ok(Trajectory { times, states })
}

/// The field on the right-hand side at time `s`.
pub fn rhs_field(model: &SmoothModel, table: &FieldTable, mode: FieldMode, s: f64) -> Result<PolyVectorField> {
    let t = solver_table(model, table, mode, model.driver().level())?;
    t.field_for(&drop_unit(&model.diagonal_derivative(s)?)?, FieldMode::Geometric)
}

/// `Σ_u f_u ⟨x, u⟩` over a list of basis elements (geometric word fields of
/// `table`); equals `f_x` when the basis is orthonormal and `x` in its span.
pub fn lie_basis_field(x: &TensorSeries, basis: &[TensorSeries], table: &FieldTable) -> Result<PolyVectorField> {
    let mut acc = PolyVectorField::zero(table.dimension());
    for u in basis {
        let c = x.inner(u);
        if c != 0.0 {
            acc = acc.axpy(c, &table.field_for(u, FieldMode::Geometric)?)?;
        }
    }
    Ok(acc)
}

/// Remainders of the Davie expansion at two step sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct DavieReport {
    /// `[h, h/10]`.
    pub steps: [f64; 2],
    /// Max over sample points of `|Y_{s+h} − Y_s − Σ f_w(Y_s)⟨X_{s,s+h}, w⟩|`.
    pub remainders: [f64; 2],
    /// `remainders[0] / remainders[1]`; above 10 means `o(h)` decay.
    pub ratio: f64,
}

/// Measures `Y_t − Y_s − Σ_{1≤‖w‖≤N} f_w(Y_s)⟨X_{s,t}, w⟩` at `t = s+h` and
/// `t = s+h/10` from points of the trajectory, `N` being the model level.
/// `Y_{s+h}` is re-integrated locally with fine steps.
pub fn davie_check(model: &SmoothModel, table: &FieldTable, mode: FieldMode, trajectory: &Trajectory, h: f64) -> Result<DavieReport> {
    let rhs = Rhs::new(model, table, mode)?;
    let words = solver_table(model, table, mode, model.level())?;
    let horizon = model.horizon();
    let candidates: Vec<usize> = (0..trajectory.times.len()).filter(|&i| trajectory.times[i] + h <= horizon).collect();
    if candidates.is_empty() {
        bail!(Precondition, "step {h} does not fit in [0, {horizon}]");
    }
    let stride = (candidates.len() / 8).max(1);
    let mut remainders = [0.0f64; 2];
    let steps = [h, h / 10.0];
    for &i in candidates.iter().step_by(stride) {
        let s = trajectory.times[i];
        let ys = &trajectory.states[i];
        for (r, &dh) in remainders.iter_mut().zip(&steps) {
            let mut y = ys.clone();
            rhs.integrate(&mut y, s, s + dh, 200)?;
            let inc = model.increment(s, s + dh)?;
            let expansion = words.field_for(&drop_unit(&inc)?, FieldMode::Geometric)?.eval(ys);
            for ((yt, y0), e) in y.iter().zip(ys).zip(&expansion) {
                *r = r.max(libm::fabs(yt - y0 - e));
            }
        }
    }
    let ratio = if remainders[1] > 0.0 { remainders[0] / remainders[1] } else { f64::INFINITY };
    Ok(DavieReport { steps, remainders, ratio })
}

/// `f^v` (geometric) or the base of `f̂^u` (quasi); see [`FieldTable::translated`].
pub fn translated_fields(table: &FieldTable, t: &Translation) -> Result<FieldTable> {
    table.translated(t)
}

/// Deviations between the renormalized equation and the translated fields.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    /// `dY = f(Y) d(T X)` against `dY = f^T(Y) dX`.
    pub deviation: f64,
    /// Quasi mode only: `dY = f^û(Y) d(Φ*_H X)` against `dY = f̂^u(Y) dX`.
    pub conjugated_deviation: Option<f64>,
}

/// Solves both sides of the renormalization equivalence from `y0`.
pub fn equivalence_check(
    model: &SmoothModel,
    table: &FieldTable,
    t: &Translation,
    mode: FieldMode,
    y0: &[f64],
    steps: usize,
    max_level: u32,
) -> Result<EquivalenceReport> {
    let renormalized = renormalize_model(model, t, max_level)?;
    let lhs = solve_rde(&renormalized, table, mode, y0, steps)?;
    let shifted = translated_fields(table, t)?;
    let rhs = solve_rde(model, &shifted, mode, y0, steps)?;
    let conjugated_deviation = match mode {
        FieldMode::Geometric => None,
        FieldMode::Quasi => {
            let conj = solve_rde(&model.hoffman_conjugate()?, &shifted, FieldMode::Geometric, y0, steps)?;
            Some(conj.max_deviation(&rhs))
        }
    };
    Ok(EquivalenceReport { deviation: lhs.max_deviation(&rhs), conjugated_deviation })
}
