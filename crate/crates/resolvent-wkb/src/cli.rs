//! Run configuration and the experiment driver behind the `rwkb` binary.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics;
use crate::discretize::{self, ResolventSample};
use crate::examples::{self, ExampleId, NumericOptions};
use crate::levelcurve;
use crate::quasimode::{self, Side, SmoothWindow};
use crate::symbol::C64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_NUMERIC,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_STRICT: i32 = 4;
pub const SCHEMA_VERSION: &str = "1";

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Asym,
    Numeric,
    Compare,
    Trace,
    Quasimode,
    Dk,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Asym => "asym",
            Command::Numeric => "numeric",
            Command::Compare => "compare",
            Command::Trace => "trace",
            Command::Quasimode => "quasimode",
            Command::Dk => "dk",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asym" => Ok(Command::Asym),
            "numeric" => Ok(Command::Numeric),
            "compare" => Ok(Command::Compare),
            "trace" => Ok(Command::Trace),
            "quasimode" => Ok(Command::Quasimode),
            "dk" => Ok(Command::Dk),
            other => Err(config_err(format!("unknown command `{other}`"))),
        }
    }
}

/// `v`, `a,b,c`, `start:stop:count` (linear, inclusive) or
/// `start:stop:countL` (log-spaced).
#[derive(Clone, Debug, PartialEq)]
pub struct RangeSpec {
    pub text: String,
    pub values: Vec<f64>,
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| config_err(format!("{what}: `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(config_err(format!("{what}: `{s}` is not finite")));
    }
    Ok(v)
}

pub fn parse_range(text: &str) -> Result<RangeSpec, CliError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(config_err("empty range"));
    }
    let parts: Vec<&str> = t.split(':').collect();
    let values = match parts.as_slice() {
        [one] => one.split(',').map(|s| parse_f64(s, "range")).collect::<Result<Vec<_>, _>>()?,
        [a, b, c] => {
            let (a, b) = (parse_f64(a, "range start")?, parse_f64(b, "range stop")?);
            let (count, log) = match c.trim().strip_suffix('L') {
                Some(n) => (n, true),
                None => (c.trim(), false),
            };
            let n: usize = count.parse().map_err(|_| config_err(format!("range count `{c}` is not an integer")))?;
            if n == 0 {
                return Err(config_err(format!("range `{t}` is empty")));
            }
            if log && !(a > 0.0 && b > 0.0) {
                return Err(config_err(format!("log range `{t}` needs positive endpoints")));
            }
            (0..n)
                .map(|k| {
                    let s = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                    if log {
                        (a.ln() + s * (b.ln() - a.ln())).exp()
                    } else {
                        a + s * (b - a)
                    }
                })
                .collect()
        }
        _ => return Err(config_err(format!("malformed range `{t}`"))),
    };
    if values.is_empty() {
        return Err(config_err(format!("range `{t}` is empty")));
    }
    Ok(RangeSpec { text: t.to_string(), values })
}

/// Every setting as optional, as read from flags or a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<String>,
    pub example: Option<String>,
    pub re_z: Option<String>,
    pub im_z: Option<String>,
    pub y: Option<String>,
    pub alpha: Option<String>,
    pub h: Option<String>,
    pub theta: Option<String>,
    pub log_eps: Option<String>,
    pub bracket: Option<String>,
    pub n: Option<usize>,
    pub half_width: Option<f64>,
    pub order: Option<usize>,
    pub action_tol: Option<f64>,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub out: Option<String>,
    pub workers: Option<usize>,
    pub strict: Option<bool>,
}

macro_rules! prefer {
    ($a:expr, $b:expr, $($f:ident),*) => {
        RawConfig { $($f: $a.$f.clone().or_else(|| $b.$f.clone()),)* }
    };
}

impl RawConfig {
    /// `self` wins over `file`.
    pub fn over(&self, file: &RawConfig) -> RawConfig {
        prefer!(
            self, file, command, example, re_z, im_z, y, alpha, h, theta, log_eps, bracket, n, half_width, order,
            action_tol, c0, c1, out, workers, strict
        )
    }

    pub fn from_toml(text: &str) -> Result<RawConfig, CliError> {
        toml::from_str(text).map_err(|e| config_err(format!("config file: {e}")))
    }

    pub fn from_toml_file(path: &Path) -> Result<RawConfig, CliError> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        RawConfig::from_toml(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridOverrides {
    pub n: Option<usize>,
    pub half_width: Option<f64>,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub action_tol: f64,
    pub level_rel_tol: f64,
    pub c0: f64,
    pub c1: f64,
    pub power_iteration_rel_tol: f64,
    pub power_iteration_max_iter: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub example: Option<ExampleId>,
    pub re_z: Option<RangeSpec>,
    pub im_z: Option<RangeSpec>,
    pub y: Option<RangeSpec>,
    pub alpha: Option<RangeSpec>,
    pub h: Option<RangeSpec>,
    pub theta: Option<RangeSpec>,
    pub log_eps: Option<RangeSpec>,
    pub bracket: Option<(f64, f64)>,
    pub grid: GridOverrides,
    pub tolerances: Tolerances,
    pub out: PathBuf,
    pub workers: usize,
    pub strict: bool,
}

fn opt_range(s: &Option<String>) -> Result<Option<RangeSpec>, CliError> {
    s.as_deref().map(parse_range).transpose()
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<RunConfig, CliError> {
        let command: Command = raw.command.as_deref().ok_or_else(|| config_err("missing command"))?.parse()?;
        let example = raw
            .example
            .as_deref()
            .map(|s| s.parse::<ExampleId>().map_err(|e| config_err(e.to_string())))
            .transpose()?;
        let bracket = match raw.bracket.as_deref() {
            None => None,
            Some(b) => {
                let p: Vec<&str> = b.split(':').collect();
                if p.len() != 2 {
                    return Err(config_err(format!("bracket `{b}` must be lo:hi")));
                }
                let (lo, hi) = (parse_f64(p[0], "bracket")?, parse_f64(p[1], "bracket")?);
                if !(hi > lo) {
                    return Err(config_err(format!("bracket `{b}` is empty")));
                }
                Some((lo, hi))
            }
        };
        let order = raw.order.unwrap_or(4);
        if order != 2 && order != 4 {
            return Err(config_err(format!("order must be 2 or 4, got {order}")));
        }
        if let Some(n) = raw.n {
            if n < discretize::MIN_POINTS {
                return Err(config_err(format!("n = {n} below {}", discretize::MIN_POINTS)));
            }
        }
        let workers = raw.workers.unwrap_or(1);
        if workers == 0 {
            return Err(config_err("workers must be at least 1"));
        }
        let cfg = RunConfig {
            command,
            example,
            re_z: opt_range(&raw.re_z)?,
            im_z: opt_range(&raw.im_z)?,
            y: opt_range(&raw.y)?,
            alpha: opt_range(&raw.alpha)?,
            h: opt_range(&raw.h)?,
            theta: opt_range(&raw.theta)?,
            log_eps: opt_range(&raw.log_eps)?,
            bracket,
            grid: GridOverrides { n: raw.n, half_width: raw.half_width, order },
            tolerances: Tolerances {
                action_tol: raw.action_tol.unwrap_or(1e-13),
                level_rel_tol: levelcurve::LEVEL_REL_TOL,
                c0: raw.c0.unwrap_or(asymptotics::DEFAULT_C0),
                c1: raw.c1.unwrap_or(asymptotics::DEFAULT_C1),
                power_iteration_rel_tol: crate::banded::DEFAULT_REL_TOL,
                power_iteration_max_iter: crate::banded::DEFAULT_MAX_ITER,
            },
            out: PathBuf::from(raw.out.clone().unwrap_or_else(|| "rwkb-out".to_string())),
            workers,
            strict: raw.strict.unwrap_or(false),
        };
        let mut cfg = cfg;
        let default = |r: &mut Option<RangeSpec>, text: &str| {
            if r.is_none() {
                *r = Some(parse_range(text).expect("default range parses"));
            }
        };
        match cfg.command {
            Command::Dk => default(&mut cfg.theta, "0"),
            Command::Quasimode => default(&mut cfg.h, "0.08,0.04,0.02,0.01"),
            Command::Trace => default(&mut cfg.log_eps, "-8"),
            _ => {}
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        match self.command {
            Command::Asym | Command::Numeric | Command::Compare => {
                let id = self.example.ok_or_else(|| config_err("--example is required"))?;
                if id == ExampleId::DaviesKuijlaars {
                    return Err(config_err("davies-kuijlaars has no norm; use the dk command"));
                }
                self.points(id).map(|_| ())
            }
            Command::Trace => {
                let id = self.example.ok_or_else(|| config_err("--example is required"))?;
                levelcurve::law_axis(id).map_err(|e| config_err(e.to_string()))?;
                self.trace_axis(id)?;
                Ok(())
            }
            Command::Quasimode | Command::Dk => Ok(()),
        }
    }

    fn need<'a>(&'a self, r: &'a Option<RangeSpec>, name: &str) -> Result<&'a [f64], CliError> {
        r.as_ref().map(|r| r.values.as_slice()).ok_or_else(|| config_err(format!("--{name} is required")))
    }

    /// Physical spectral parameters, with the advection `h` when given.
    pub fn points(&self, id: ExampleId) -> Result<Vec<(C64, Option<f64>)>, CliError> {
        let im_default = [0.0];
        let mut out = Vec::new();
        match id {
            ExampleId::Airy => {
                let im = self.im_z.as_ref().map(|r| r.values.as_slice()).unwrap_or(&im_default);
                for &re in self.need(&self.re_z, "re-z")? {
                    for &i in im {
                        out.push((C64::new(re, i), None));
                    }
                }
            }
            ExampleId::Harmonic => {
                let re = self.need(&self.re_z, "re-z")?;
                match (&self.y, &self.im_z) {
                    (Some(y), _) => re.iter().for_each(|&r| y.values.iter().for_each(|&y| out.push((C64::new(r, y * r), None)))),
                    (None, Some(im)) => re.iter().for_each(|&r| im.values.iter().for_each(|&i| out.push((C64::new(r, i), None)))),
                    (None, None) => return Err(config_err("--im-z or --y is required")),
                }
            }
            ExampleId::Cubic => {
                let im = self.need(&self.im_z, "im-z")?;
                match (&self.y, &self.re_z) {
                    (Some(y), _) => im.iter().for_each(|&i| y.values.iter().for_each(|&y| out.push((C64::new(y * i, i), None)))),
                    (None, Some(re)) => im.iter().for_each(|&i| re.values.iter().for_each(|&r| out.push((C64::new(r, i), None)))),
                    (None, None) => return Err(config_err("--re-z or --y is required")),
                }
            }
            ExampleId::Advection => {
                let hs = self.h.as_ref().map(|r| r.values.clone());
                for &a in self.need(&self.alpha, "alpha")? {
                    if !(a > 0.0) {
                        return Err(config_err(format!("alpha = {a} must be positive")));
                    }
                    match &hs {
                        Some(hs) => hs.iter().for_each(|&h| out.push((examples::advection_z(a), Some(h)))),
                        None => out.push((examples::advection_z(a), None)),
                    }
                }
            }
            ExampleId::DaviesKuijlaars => return Err(config_err("davies-kuijlaars has no norm")),
        }
        Ok(out)
    }

    fn trace_axis(&self, id: ExampleId) -> Result<&[f64], CliError> {
        match id {
            ExampleId::Harmonic => self.need(&self.re_z, "re-z"),
            _ => self.need(&self.im_z, "im-z"),
        }
    }

    fn numeric_options(&self) -> NumericOptions {
        NumericOptions { n: self.grid.n, half_width: self.grid.half_width, order: self.grid.order }
    }

    fn effective_n(&self) -> Option<usize> {
        match self.command {
            Command::Dk | Command::Asym => self.grid.n,
            Command::Quasimode => Some(self.grid.n.unwrap_or(QUASIMODE_N)),
            _ => self.grid.n.or_else(|| self.example.and_then(examples::default_n)),
        }
    }

    fn half_width_rule(&self) -> Option<&'static str> {
        if self.grid.half_width.is_some() {
            return None;
        }
        match (self.command, self.example) {
            (Command::Numeric | Command::Compare | Command::Trace, Some(id)) => match id {
                ExampleId::Airy => Some("max(12, 3 re_z) about im_z"),
                ExampleId::Harmonic => Some("3 sqrt(alpha) + 6 sqrt(h)"),
                ExampleId::Cubic => Some("[0.5, 1.5]"),
                _ => None,
            },
            (Command::Quasimode, _) => Some("[-0.5, 2.5]"),
            _ => None,
        }
    }

    fn manifest(&self, wall: f64) -> serde_json::Value {
        let r = |x: &Option<RangeSpec>| x.as_ref().map(|r| r.text.clone());
        serde_json::json!({
            "command": self.command.as_str(),
            "example": self.example.map(|e| e.as_str()),
            "grid": {
                "re_z": r(&self.re_z),
                "im_z": r(&self.im_z),
                "y": r(&self.y),
                "alpha": r(&self.alpha),
                "h": r(&self.h),
                "theta": r(&self.theta),
                "log_eps": r(&self.log_eps),
                "bracket": self.bracket.map(|(a, b)| vec![a, b]),
                "bracket_rule": match (self.command, self.bracket, self.example) {
                    (Command::Trace, None, Some(ExampleId::Harmonic)) => Some("(re_z^(1/3), 0.4 re_z)"),
                    (Command::Trace, None, Some(_)) => Some("(im_z^(4/9), 0.3 im_z)"),
                    _ => None,
                },
                "n": self.effective_n(),
                "half_width": self.grid.half_width,
                "half_width_rule": self.half_width_rule(),
                "order": self.grid.order,
                "strict": self.strict,
                "out": self.out.display().to_string(),
                "version": env!("CARGO_PKG_VERSION"),
            },
            "tolerances": self.tolerances,
            "workers": self.workers,
            "wall_seconds": wall,
            "schema_version": SCHEMA_VERSION,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
    pub invalid_rows: usize,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Validity of a parameter point: the example's strip and, except for the
/// Airy operator whose `alpha` is fixed, the semiclassical window.
pub fn point_validity(id: ExampleId, z: C64, h: Option<f64>, tol: &Tolerances) -> bool {
    let strip = examples::validity_strip(id, z, h).map(|s| s.ok).unwrap_or(false);
    let window = examples::scale(id, z, h)
        .map(|s| id == ExampleId::Airy || asymptotics::validity(s.h, s.alpha, tol.c0, tol.c1).ok)
        .unwrap_or(false);
    strip && window
}

pub const ASYM_HEADER: &str = "re_z,im_z,h,alpha,log_norm_asym,exponent,correction_scale,floor_log,branch_tag,valid";
pub const DK_HEADER: &str = "theta,rate_closed,rate_quadrature";
pub const RESIDUAL_HEADER: &str = "h,residual,log_residual,normalization_error,discrete_norm";

struct Table {
    text: String,
    failures: Vec<String>,
    invalid: usize,
}

impl Table {
    fn new(header: &str) -> Self {
        Table { text: format!("{header}\n"), failures: Vec::new(), invalid: 0 }
    }
    fn row(&mut self, r: String) {
        self.text.push_str(&r);
        self.text.push('\n');
    }
}

fn samples(cfg: &RunConfig, id: ExampleId, with_asym: bool) -> Result<Table, CliError> {
    let pts = cfg.points(id)?;
    let opts = cfg.numeric_options();
    let rows: Vec<Result<ResolventSample, String>> = discretize::parallel_map(&pts, cfg.workers, |(z, h)| {
        let r = if with_asym {
            examples::compare_sample(id, *z, *h, &opts)
        } else {
            examples::numeric_sample(id, *z, *h, &opts)
        };
        r.map_err(|e| format!("z = {z}: {e}"))
    });
    let mut header = discretize::CSV_HEADER.to_string();
    if with_asym {
        header.push_str(",rel_log_err");
    }
    let mut t = Table::new(&header);
    for ((z, h), r) in pts.iter().zip(rows) {
        match r {
            Ok(mut s) => {
                s.valid = !s.singular && point_validity(id, *z, *h, &cfg.tolerances);
                if !s.valid {
                    t.invalid += 1;
                }
                let mut line = s.csv_row();
                if with_asym {
                    line.push(',');
                    line.push_str(&examples::rel_log_err(&s).map(|v| v.to_string()).unwrap_or_default());
                }
                t.row(line);
            }
            Err(e) => t.failures.push(e),
        }
    }
    Ok(t)
}

fn asym_table(cfg: &RunConfig, id: ExampleId) -> Result<Table, CliError> {
    let mut t = Table::new(ASYM_HEADER);
    for (z, h) in cfg.points(id)? {
        let s = examples::scale(id, z, h);
        match (s, examples::closed_norm(id, z, h, true)) {
            (Ok(s), Ok(e)) => {
                let valid = point_validity(id, z, h, &cfg.tolerances);
                if !valid {
                    t.invalid += 1;
                }
                t.row(format!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    z.re,
                    z.im,
                    s.h,
                    s.alpha,
                    e.log_leading,
                    e.exponent,
                    e.correction_scale,
                    e.floor_log,
                    e.branch_tag.map(|b| b.to_string()).unwrap_or_default(),
                    u8::from(valid)
                ));
            }
            (Err(e), _) | (_, Err(e)) => t.failures.push(format!("z = {z}: {e}")),
        }
    }
    Ok(t)
}

fn default_bracket(id: ExampleId, axis_value: f64) -> (f64, f64) {
    match id {
        ExampleId::Harmonic => (axis_value.powf(1.0 / 3.0), 0.4 * axis_value),
        _ => (axis_value.powf(4.0 / 9.0), 0.3 * axis_value),
    }
}

fn trace_table(cfg: &RunConfig, id: ExampleId) -> Result<Table, CliError> {
    let axis_values = cfg.trace_axis(id)?.to_vec();
    let log_eps = cfg.log_eps.as_ref().map(|r| r.values.clone()).unwrap_or_default();
    let axis = levelcurve::law_axis(id).map_err(|e| config_err(e.to_string()))?;
    let brackets: Vec<(f64, f64)> = axis_values.iter().map(|&v| cfg.bracket.unwrap_or_else(|| default_bracket(id, v))).collect();
    let sigma = levelcurve::example_sigma(id);
    let mut t = Table::new(levelcurve::CSV_HEADER);
    for le in log_eps {
        let eps = le.exp();
        let pts = levelcurve::trace_numeric(&sigma, eps, axis, &axis_values, &brackets, cfg.workers)
            .map_err(|e| config_err(e.to_string()))?;
        for p in pts {
            match p {
                Ok(p) => t.row(p.csv_row()),
                Err(e) => t.failures.push(e.to_string()),
            }
        }
        for &v in &axis_values {
            match levelcurve::level_asymptotic(id, eps, v) {
                Ok(p) => {
                    if !p.valid {
                        t.invalid += 1;
                    }
                    t.row(p.csv_row());
                }
                Err(e) => t.failures.push(e.to_string()),
            }
        }
    }
    Ok(t)
}

fn airy_fourier_g(x: f64) -> C64 {
    C64::new(0.0, 1.0 - x * x)
}

pub const QUASIMODE_INTERVAL: (f64, f64) = (-0.5, 2.5);
pub const QUASIMODE_N: usize = 6001;
pub const QUASIMODE_WINDOW: SmoothWindow = SmoothWindow { flat_lo: 0.6, flat_hi: 1.4, taper: 0.2 };

fn quasimode_run(cfg: &RunConfig, files: &mut Vec<PathBuf>) -> Result<Table, CliError> {
    let hs = cfg.h.as_ref().map(|r| r.values.clone()).unwrap_or_default();
    let n = cfg.grid.n.unwrap_or(QUASIMODE_N);
    let g = discretize::Potential::Poly(vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, -1.0)]);
    let mut t = Table::new(RESIDUAL_HEADER);
    for (k, &h) in hs.iter().enumerate() {
        let m = match quasimode::build_mode(&airy_fourier_g, h, 1.0, Side::Plus, QUASIMODE_INTERVAL, n) {
            Ok(m) => m,
            Err(e) => {
                t.failures.push(format!("h = {h}: {e}"));
                continue;
            }
        };
        let path = cfg.out.join(format!("mode_{k}.csv"));
        write(&path, &m.to_csv())?;
        files.push(path);
        let r = discretize::first_order_matrix(&g, h, &m.grid)
            .map_err(|e| e.to_string())
            .and_then(|op| quasimode::residual(&op, &m, &QUASIMODE_WINDOW).map_err(|e| e.to_string()));
        match r {
            Ok(r) => t.row(format!("{},{},{},{},{}", h, r, r.ln(), m.normalization_error(), m.norm())),
            Err(e) => t.failures.push(format!("h = {h}: {e}")),
        }
    }
    Ok(t)
}

fn dk_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let thetas = cfg.theta.as_ref().map(|r| r.values.clone()).unwrap_or_default();
    let mut t = Table::new(DK_HEADER);
    for th in thetas {
        match (examples::dk_growth_rate(th), examples::dk_growth_rate_quadrature(th)) {
            (Ok(a), Ok(b)) => t.row(format!("{th},{a},{b}")),
            (Err(e), _) | (_, Err(e)) => t.failures.push(format!("theta = {th}: {e}")),
        }
    }
    Ok(t)
}

/// Runs one command, writing `<command>.csv` and `manifest.json` into `out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    fs::create_dir_all(&cfg.out).map_err(|source| CliError::Io { path: cfg.out.clone(), source })?;
    let mut files = Vec::new();
    let id = cfg.example;
    let table = match cfg.command {
        Command::Asym => asym_table(cfg, id.ok_or_else(|| config_err("--example is required"))?)?,
        Command::Numeric => samples(cfg, id.ok_or_else(|| config_err("--example is required"))?, false)?,
        Command::Compare => samples(cfg, id.ok_or_else(|| config_err("--example is required"))?, true)?,
        Command::Trace => trace_table(cfg, id.ok_or_else(|| config_err("--example is required"))?)?,
        Command::Quasimode => quasimode_run(cfg, &mut files)?,
        Command::Dk => dk_table(cfg)?,
    };
    let csv = cfg.out.join(format!("{}.csv", cfg.command.as_str()));
    write(&csv, &table.text)?;
    files.insert(0, csv);
    let manifest = cfg.out.join("manifest.json");
    let m = cfg.manifest(start.elapsed().as_secs_f64());
    write(&manifest, &serde_json::to_string_pretty(&m).expect("manifest serializes"))?;
    files.push(manifest);
    let exit_code = if !table.failures.is_empty() {
        EXIT_NUMERIC
    } else if cfg.strict && table.invalid > 0 {
        EXIT_STRICT
    } else {
        EXIT_OK
    };
    Ok(RunOutcome { exit_code, files, failures: table.failures, invalid_rows: table.invalid })
}
