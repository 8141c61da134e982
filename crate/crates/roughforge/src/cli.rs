//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use roughforge_core::develop::Integrator;
use roughforge_core::field::{FieldMode, FieldTable};
use roughforge_core::hoffman::{hoffman_exp_adjoint, hoffman_exp_series, hoffman_log_adjoint, hoffman_log_series};
use roughforge_core::lie::{lyndon_basis, orthonormal_lie_basis, quasi_lie_basis, LieBasisElement};
use roughforge_core::rde::{solve_rde, Trajectory};
use roughforge_core::renorm::{canonical_sum, minimal_coupling, renormalize_model, scalar, Translation};
use roughforge_core::word::words_up_to;
use roughforge_core::{Alphabet, ProductKind, SmoothModel, TensorSeries, DEFAULT_MAX_LEVEL, DEFAULT_TOL};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::format::{basis_json, read_json, to_json, AlphabetJson, DriverJson, FieldsJson, SeriesJson, TranslationJson};
use crate::verify::{self, Suite};

/// Name of the environment variable capping working levels.
pub const MAX_LEVEL_ENV: &str = "ROUGHFORGE_MAX_LEVEL";
const DEFAULT_STEPS: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "roughforge", version, about = "Smooth rough paths: signatures, renormalization, canonical sums and RDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; `rde` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Geometric,
    Quasi,
}

impl From<ModeArg> for FieldMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Geometric => FieldMode::Geometric,
            ModeArg::Quasi => FieldMode::Quasi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HoffmanMap {
    /// Φ_H
    Exp,
    /// Ψ_H
    Log,
    /// Φ*_H
    ExpAdjoint,
    /// Ψ*_H
    LogAdjoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisKind {
    Lyndon,
    Orthonormal,
    Quasi,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signature X_{s,t} of a driver.
    Sig {
        #[arg(long, visible_alias = "model")]
        driver: PathBuf,
        /// Working level (default: the file's working level).
        #[arg(long)]
        level: Option<u32>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s: f64,
        /// End time (default: the horizon).
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// RK4 steps per polynomial segment.
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
    /// Minimal extension X_{0,t} at a higher level on a uniform grid.
    Extend {
        #[arg(long, visible_alias = "driver")]
        model: PathBuf,
        #[arg(long)]
        level: u32,
        /// Number of grid points on [0, T].
        #[arg(long, default_value_t = 11)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
    /// Renormalized model T(X), written as a driver file.
    Translate {
        #[arg(long, visible_alias = "driver")]
        model: PathBuf,
        #[arg(long)]
        translation: PathBuf,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Canonical sum λX ⊞ μY, written as a driver file.
    Sum {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        scale_left: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        scale_right: f64,
    },
    /// Minimal coupling of models over disjoint alphabets.
    Couple {
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
    },
    /// Solve dY = f(Y) dX (optionally driven by T(X)).
    Rde {
        #[arg(long, visible_alias = "driver")]
        model: PathBuf,
        #[arg(long)]
        fields: PathBuf,
        /// Initial value, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y0: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        /// Default: geometric for shuffle models, quasi for quasi-shuffle models.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Drive by the renormalized model T(X).
        #[arg(long)]
        translation: Option<PathBuf>,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Hoffman maps on a series, or Hoffman (de)conjugation of a model.
    Hoffman {
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        series: Option<PathBuf>,
        /// Quasi-shuffle models are conjugated, shuffle models deconjugated.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = HoffmanMap::ExpAdjoint)]
        map: HoffmanMap,
    },
    /// Export a Lie basis.
    Basis {
        #[arg(long, conflicts_with = "standard", required_unless_present = "standard")]
        alphabet: Option<PathBuf>,
        /// Shorthand for the alphabet "1".."d".
        #[arg(long)]
        standard: Option<usize>,
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum, default_value_t = BasisKind::Lyndon)]
        kind: BasisKind,
    },
    /// Run an invariant suite and report measured residuals.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, visible_alias = "driver")]
        model: Option<PathBuf>,
        /// Second model for the `sum` suite (default: the time reversal).
        #[arg(long)]
        other: Option<PathBuf>,
        #[arg(long)]
        alphabet: Option<PathBuf>,
        #[arg(long)]
        translation: Option<PathBuf>,
        #[arg(long)]
        fields: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y0: Option<Vec<f64>>,
        /// Default depends on the suite.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Word weight bound for the `hoffman` suite.
        #[arg(long, default_value_t = 4)]
        level: u32,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
}

/// Reads the level cap from the environment value, if any.
pub fn parse_max_level(raw: Option<&str>) -> Result<u32, CliError> {
    match raw {
        None => Ok(DEFAULT_MAX_LEVEL),
        Some(s) => match s.trim().parse::<u32>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Validation(format!("{MAX_LEVEL_ENV}: expected a positive integer, got \"{s}\""))),
        },
    }
}

struct Ctx {
    max_level: u32,
}

impl Ctx {
    fn check_level(&self, level: u32, what: &str) -> Result<(), CliError> {
        if level > self.max_level {
            return Err(CliError::Validation(format!("{what} {level} exceeds the level cap {} ({MAX_LEVEL_ENV})", self.max_level)));
        }
        Ok(())
    }

    fn model(&self, path: &Path, level: Option<u32>, steps: usize) -> Result<(SmoothModel, DriverJson), CliError> {
        if steps == 0 {
            return Err(CliError::Validation("--steps must be positive".into()));
        }
        let json: DriverJson = read_json(path)?;
        let driver = json.to_driver().map_err(|e| prefix(path, e))?;
        let level = level.unwrap_or_else(|| json.model_level());
        self.check_level(level, "working level")?;
        let model = SmoothModel::new(driver, level).map_err(|e| prefix(path, e.into()))?;
        Ok((model.with_integrator(Integrator { steps_per_segment: steps }), json))
    }
}

fn prefix(path: &Path, e: CliError) -> CliError {
    match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        CliError::Kernel(k) if !matches!(k, roughforge_core::Error::Divergence(_)) => {
            CliError::Validation(format!("{}: {k}", path.display()))
        }
        other => other,
    }
}

fn meta(command: &str, max_level: u32, extra: Value) -> Value {
    let mut m = json!({ "command": command, "max_level": max_level, "kernel_tolerance": DEFAULT_TOL });
    if let (Some(obj), Value::Object(more)) = (m.as_object_mut(), extra) {
        obj.extend(more);
    }
    m
}

fn csv_header(meta: &Value) -> String {
    let mut out = String::new();
    if let Some(obj) = meta.as_object() {
        for (k, v) in obj {
            out.push_str(&format!("# {k}={v}\n"));
        }
    }
    out
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_rows(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
}

fn series_output(x: &TensorSeries, meta: Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut j = SeriesJson::from_series(x, true);
            j.meta = Some(meta);
            to_json(&j)
        }
        Format::Csv => {
            let a = x.alphabet();
            let rows = x.terms().map(|(w, c)| vec![w.names(a).join(" "), fmt_f64(c)]);
            csv_header(&meta) + &csv_rows(&["word".into(), "coeff".into()], rows)
        }
    }
}

fn driver_output(model: &SmoothModel, meta: Value, format: Format) -> Result<String, CliError> {
    if format == Format::Csv {
        return Err(CliError::Validation("drivers are only written as json".into()));
    }
    let mut j = DriverJson::from_driver(model.driver(), Some(model.level()));
    j.meta = Some(meta);
    Ok(to_json(&j))
}

fn trajectory_output(traj: &Trajectory, meta: Value, format: Format) -> String {
    let e = traj.states.first().map_or(0, Vec::len);
    let mut header = vec!["time".to_string()];
    header.extend((1..=e).map(|i| format!("Y{i}")));
    match format {
        Format::Csv => {
            let rows = traj.times.iter().zip(&traj.states).map(|(t, y)| std::iter::once(*t).chain(y.iter().copied()).map(fmt_f64).collect());
            csv_header(&meta) + &csv_rows(&header, rows)
        }
        Format::Json => to_json(&json!({ "meta": meta, "columns": header, "times": traj.times, "states": traj.states })),
    }
}

fn default_mode(model: &SmoothModel) -> FieldMode {
    match model.context() {
        ProductKind::Shuffle => FieldMode::Geometric,
        ProductKind::QuasiShuffle => FieldMode::Quasi,
    }
}

fn mode_name(m: FieldMode) -> &'static str {
    match m {
        FieldMode::Geometric => "geometric",
        FieldMode::Quasi => "quasi",
    }
}

fn load_translation(path: &Path, model: &SmoothModel) -> Result<Translation, CliError> {
    let j: TranslationJson = read_json(path)?;
    j.to_translation(&model.driver().hopf_context()).map_err(|e| prefix(path, e))
}

fn load_fields(path: &Path, alphabet: &Arc<Alphabet>, level: u32) -> Result<FieldTable, CliError> {
    let j: FieldsJson = read_json(path)?;
    j.to_table(alphabet, level).map_err(|e| prefix(path, e))
}

fn load_alphabet(path: &Path) -> Result<Arc<Alphabet>, CliError> {
    let j: AlphabetJson = read_json(path)?;
    Ok(Arc::new(j.to_alphabet("alphabet").map_err(|e| prefix(path, e))?))
}

/// Executes a parsed command and writes its artifact. Failed verification
/// still writes the report before returning [`CliError::VerifyFailed`].
pub fn run(cli: Cli, max_level: u32) -> Result<(), CliError> {
    let ctx = Ctx { max_level };
    let format = cli.format;
    let json_fmt = format.unwrap_or(Format::Json);
    let mut verdict = Ok(());
    let text = match cli.command {
        Command::Sig { driver, level, s, t, steps } => {
            let (m, _) = ctx.model(&driver, level, steps)?;
            let t = t.unwrap_or(m.horizon());
            let x = m.increment(s, t)?;
            let meta = meta("sig", max_level, json!({ "level": m.level(), "s": s, "t": t, "steps_per_segment": steps }));
            series_output(&x, meta, json_fmt)
        }
        Command::Extend { model, level, grid, steps } => {
            ctx.check_level(level, "extension level")?;
            if grid < 2 {
                return Err(CliError::Validation("--grid needs at least 2 points".into()));
            }
            let (m, _) = ctx.model(&model, None, steps)?;
            let ext = m.minimal_extension(level)?;
            let h = ext.horizon();
            let times: Vec<f64> = (0..grid).map(|i| if i + 1 == grid { h } else { h * i as f64 / (grid - 1) as f64 }).collect();
            let values = times.iter().map(|&t| ext.path(t)).collect::<Result<Vec<_>, _>>()?;
            let meta = meta("extend", max_level, json!({ "level": level, "grid": grid, "steps_per_segment": steps }));
            match json_fmt {
                Format::Json => {
                    let samples: Vec<Value> =
                        times.iter().zip(&values).map(|(t, x)| json!({ "t": t, "series": SeriesJson::from_series(x, false) })).collect();
                    to_json(&json!({ "meta": meta, "alphabet": AlphabetJson::from_alphabet(ext.alphabet()), "level": level, "samples": samples }))
                }
                Format::Csv => {
                    let a = ext.alphabet();
                    let words = words_up_to(a, level);
                    let mut header = vec!["time".to_string()];
                    header.extend(words.iter().map(|w| if w.is_empty() { "1".into() } else { w.names(a).join(" ") }));
                    let rows = times
                        .iter()
                        .zip(&values)
                        .map(|(t, x)| std::iter::once(*t).chain(words.iter().map(|w| x.pair(w))).map(fmt_f64).collect());
                    csv_header(&meta) + &csv_rows(&header, rows)
                }
            }
        }
        Command::Translate { model, translation, level } => {
            let (m, _) = ctx.model(&model, level, DEFAULT_STEPS)?;
            let t = load_translation(&translation, &m)?;
            let r = renormalize_model(&m, &t, max_level)?;
            driver_output(&r, meta("translate", max_level, json!({ "level": r.level(), "n_prime": t.max_grade() })), json_fmt)?
        }
        Command::Sum { left, right, scale_left, scale_right } => {
            let (x, _) = ctx.model(&left, None, DEFAULT_STEPS)?;
            let (y, _) = ctx.model(&right, None, DEFAULT_STEPS)?;
            let z = canonical_sum(&scalar(scale_left, &x)?, &scalar(scale_right, &y)?)?;
            let meta = meta("sum", max_level, json!({ "scale_left": scale_left, "scale_right": scale_right }));
            driver_output(&z, meta, json_fmt)?
        }
        Command::Couple { models } => {
            let ms = models.iter().map(|p| ctx.model(p, None, DEFAULT_STEPS).map(|(m, _)| m)).collect::<Result<Vec<_>, _>>()?;
            let z = minimal_coupling(&ms)?;
            driver_output(&z, meta("couple", max_level, json!({ "models": models.len() })), json_fmt)?
        }
        Command::Rde { model, fields, y0, steps, mode, translation, level } => {
            let (mut m, _) = ctx.model(&model, level, DEFAULT_STEPS)?;
            if steps == 0 {
                return Err(CliError::Validation("--steps must be positive".into()));
            }
            let mode = mode.map_or_else(|| default_mode(&m), FieldMode::from);
            if let Some(tp) = &translation {
                let t = load_translation(tp, &m)?;
                m = renormalize_model(&m, &t, max_level)?;
            }
            let table = load_fields(&fields, m.alphabet(), m.level())?;
            let traj = solve_rde(&m, &table, mode, &y0, steps)?;
            let meta = meta(
                "rde",
                max_level,
                json!({ "level": m.level(), "steps": steps, "mode": mode_name(mode), "translated": translation.is_some(), "y0": y0 }),
            );
            trajectory_output(&traj, meta, format.unwrap_or(Format::Csv))
        }
        Command::Hoffman { series, model, map } => match (series, model) {
            (Some(p), _) => {
                let j: SeriesJson = read_json(&p)?;
                let x = j.to_series(None, "series").map_err(|e| prefix(&p, e))?;
                ctx.check_level(x.level(), "series level")?;
                let y = match map {
                    HoffmanMap::Exp => hoffman_exp_series(&x)?,
                    HoffmanMap::Log => hoffman_log_series(&x)?,
                    HoffmanMap::ExpAdjoint => hoffman_exp_adjoint(&x)?,
                    HoffmanMap::LogAdjoint => hoffman_log_adjoint(&x)?,
                };
                let name = map.to_possible_value().expect("no skipped variants").get_name().to_string();
                series_output(&y, meta("hoffman", max_level, json!({ "map": name })), json_fmt)
            }
            (None, Some(p)) => {
                let (m, _) = ctx.model(&p, None, DEFAULT_STEPS)?;
                let (out, dir) = match m.context() {
                    ProductKind::QuasiShuffle => (m.hoffman_conjugate()?, "conjugate"),
                    ProductKind::Shuffle => (m.hoffman_deconjugate()?, "deconjugate"),
                };
                driver_output(&out, meta("hoffman", max_level, json!({ "direction": dir })), json_fmt)?
            }
            (None, None) => return Err(CliError::Validation("give --series or --model".into())),
        },
        Command::Basis { alphabet, standard, level, kind } => {
            ctx.check_level(level, "basis level")?;
            let a = match (alphabet, standard) {
                (Some(p), _) => load_alphabet(&p)?,
                (None, Some(d)) => Arc::new(Alphabet::standard(d)?),
                (None, None) => return Err(CliError::Validation("give --alphabet or --standard".into())),
            };
            let basis = lyndon_basis(&a, level)?;
            let elements: Vec<LieBasisElement> = match kind {
                BasisKind::Lyndon => basis.elements().to_vec(),
                BasisKind::Quasi => quasi_lie_basis(&basis)?.elements,
                BasisKind::Orthonormal => orthonormal_lie_basis(&basis)?
                    .into_iter()
                    .zip(basis.elements())
                    .map(|(series, e)| LieBasisElement { word: e.word.clone(), series })
                    .collect(),
            };
            if json_fmt == Format::Csv {
                return Err(CliError::Validation("bases are only written as json".into()));
            }
            to_json(&basis_json(&elements))
        }
        Command::Verify { suite, model, other, alphabet, translation, fields, mode, y0, tol, seed, samples, level, steps } => {
            ctx.check_level(level, "verify level")?;
            if samples == 0 || steps == 0 {
                return Err(CliError::Validation("--samples and --steps must be positive".into()));
            }
            let m = match &model {
                Some(p) => Some(ctx.model(p, None, steps)?.0),
                None => None,
            };
            let o = match &other {
                Some(p) => Some(ctx.model(p, None, steps)?.0),
                None => None,
            };
            let a = match &alphabet {
                Some(p) => Some(load_alphabet(p)?),
                None => None,
            };
            let t = match (&translation, &m) {
                (Some(p), Some(m)) => Some(load_translation(p, m)?),
                (Some(_), None) => return Err(CliError::Validation("--translation needs --model".into())),
                _ => None,
            };
            let f = match (&fields, &m) {
                (Some(p), Some(m)) => Some(load_fields(p, m.alphabet(), m.level())?),
                (Some(_), None) => return Err(CliError::Validation("--fields needs --model".into())),
                _ => None,
            };
            let tol = tol.unwrap_or(suite.default_tol());
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(CliError::Validation(format!("--tol must be a finite non-negative number, got {tol}")));
            }
            let mode = mode.map(FieldMode::from).or(m.as_ref().map(default_mode));
            let inputs = verify::Inputs {
                model: m.as_ref(),
                other: o.as_ref(),
                alphabet: a,
                translation: t.as_ref(),
                fields: f.as_ref(),
                mode,
                y0: y0.as_deref(),
            };
            let opts = verify::Options { tol, seed, samples, level, steps, max_level };
            let report = verify::run(suite, &inputs, &opts)?;
            if !report.passed {
                verdict = Err(CliError::VerifyFailed(format!("suite `{}`", report.suite)));
            }
            let meta = meta(
                "verify",
                max_level,
                json!({ "suite": suite.name(), "tol": tol, "seed": seed, "samples": samples, "level": level, "steps": steps }),
            );
            match json_fmt {
                Format::Json => to_json(&json!({ "meta": meta, "report": report })),
                Format::Csv => {
                    let rows = report.properties.iter().map(|p| {
                        vec![p.name.clone(), fmt_f64(p.measured), p.relation.clone(), fmt_f64(p.threshold), if p.passed { "pass" } else { "fail" }.into()]
                    });
                    let header = ["property", "measured", "relation", "threshold", "result"].map(String::from);
                    csv_header(&meta) + &csv_rows(&header, rows)
                }
            }
        }
    };
    emit(cli.output.as_deref(), &text)?;
    verdict
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Parses arguments, runs, prints diagnostics and returns the exit status.
/// Usage errors count as validation failures (3).
pub fn main_with<I, T>(args: I, max_level_env: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = parse_max_level(max_level_env).and_then(|cap| run(cli, cap));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("roughforge: {e}");
            e.exit_code()
        }
    }
}
