//! Decay-rate fitting, the table of predicted exponents, experiment reports
//! and their CSV/JSON writers.

mod experiments;

pub use experiments::{find, registry, Experiment, ExperimentContext};

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::FluidParams;
use crate::spectral::MultiIndex;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Fits below this coefficient of determination are flagged.
pub const RELIABLE_R2: f64 = 0.98;

pub const MIN_SAMPLES: usize = 6;

/// Samples `(t, value)` with a fit window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    samples: Vec<(f64, f64)>,
    window: (f64, f64),
}

impl RateSeries {
    /// Window defaults to the whole sampled range.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let window = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => (0.0, 0.0),
        };
        Self::with_window(samples, window)
    }

    pub fn with_window(samples: Vec<(f64, f64)>, window: (f64, f64)) -> Result<Self> {
        let s = Self { samples, window };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Series("times must be strictly increasing".into()));
        }
        if let Some(&(t, v)) = self
            .samples
            .iter()
            .find(|s| !(s.1 > 0.0) || !s.1.is_finite())
        {
            return Err(Error::Series(format!("nonpositive value {v} at t = {t}")));
        }
        let used = self.windowed().len();
        if used < MIN_SAMPLES {
            return Err(Error::Series(format!(
                "{used} samples in the fit window, need at least {MIN_SAMPLES}"
            )));
        }
        Ok(())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    fn windowed(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = self.window;
        self.samples
            .iter()
            .copied()
            .filter(|&(t, _)| t >= lo && t <= hi)
            .collect()
    }
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl Fit {
    pub fn reliable(&self) -> bool {
        self.r2 >= RELIABLE_R2
    }
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> Fit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r2 = if ss_tot <= f64::EPSILON * my.abs().max(1.0) * n {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Fit {
        slope,
        intercept,
        r2,
    }
}

/// Slope of `log value` against `log t`; with `log_correction` the values
/// are first divided by `ln(1+t)`.
pub fn fit_rate(series: &RateSeries, log_correction: bool) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = series
        .windowed()
        .into_iter()
        .map(|(t, v)| {
            let v = if log_correction { v / t.ln_1p() } else { v };
            (t.ln(), v.ln())
        })
        .collect();
    if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::Series("log-log fit needs positive times".into()));
    }
    Ok(least_squares(&pts))
}

/// Slope of `log value` against `t`; a decay `e^{−bt}` gives slope `−b`.
pub fn fit_exponential(series: &RateSeries) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = series
        .windowed()
        .into_iter()
        .map(|(t, v)| (t, v.ln()))
        .collect();
    Ok(least_squares(&pts))
}

/// The estimates whose exponents are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimate {
    /// Low-frequency part of `S∥`.
    BfFacile,
    /// `S∥^{LF} − S̃∥^{LF}`.
    BfDiff,
    /// Artificial-viscosity kernel `S̃∥`.
    SSparLp,
    /// `D^σ K_μ ⋆ R⊥`.
    PerpL1,
    /// Heat flow of `K_BS⋆ω₀`, zero circulation.
    PerpLp1,
    /// Same, with vanishing first moments as well.
    PerpLp2,
    /// `|x|`-weighted norm under the assumptions of `PerpLp2`.
    PerpLp3,
    /// `1 < p ≤ 2` counterpart of `PerpLp2`.
    PerpLpPetit,
    /// Sound part `X∥` of a nonlinear run.
    Sound,
    /// Deviation of `X` from `(0, ρ* u^β)`.
    Perp2,
    /// `‖X − S⋆X₀‖` against the amplitude.
    NonlinearEps,
    /// Time envelope of `‖D^σ(X − S⋆X₀)‖_p`, without its `ln(1+t)`.
    NonlinearEnvelope,
    /// `ω^G(t)` in `L^p`.
    OseenVorticity,
    /// `u^G(t)` in `L^p`.
    OseenVelocity,
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Predicted exponent of `t` (or of `ε` for [`Estimate::NonlinearEps`]).
pub fn predicted_exponent(estimate: Estimate, p: f64, sigma_order: u32) -> f64 {
    let s = 0.5 * sigma_order as f64;
    let heat = 1.0 - inv(p) + s;
    let sound = 1.25 - 1.5 * inv(p) + s;
    match estimate {
        Estimate::BfFacile | Estimate::PerpL1 | Estimate::PerpLp1 | Estimate::PerpLp3 => -heat,
        Estimate::SSparLp | Estimate::Sound | Estimate::Perp2 => -sound,
        Estimate::BfDiff | Estimate::PerpLp2 | Estimate::PerpLpPetit => -(heat + 0.5),
        Estimate::NonlinearEps => 2.0,
        Estimate::NonlinearEnvelope => {
            if p >= 2.0 {
                -(heat + 0.5)
            } else {
                -(sound + 0.5)
            }
        }
        Estimate::OseenVorticity => -heat,
        Estimate::OseenVelocity => -(0.5 - inv(p) + s),
    }
}

/// How a report row turns its numbers into pass/fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Check {
    /// `|fitted − predicted| ≤ tolerance`.
    Sharp,
    /// `fitted ≤ predicted + tolerance`: the estimate is an upper bound.
    UpperBound,
    /// `fitted > predicted` with a reliable fit.
    PositiveRate,
    /// Second half monotonically decreasing and `fitted < predicted`, where
    /// `fitted` is the final-to-first ratio.
    Decay,
    /// `fitted < predicted` where `fitted` is a max/min ratio.
    BoundedRatio,
    /// `fitted ≤ predicted`.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub case: String,
    pub p: Option<f64>,
    pub sigma: Option<MultiIndex>,
    pub check: Check,
    pub predicted: f64,
    pub fitted: f64,
    pub r2: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl ExperimentReport {
    fn new(case: &str, check: Check, predicted: f64, fitted: f64, tolerance: f64) -> Self {
        let pass = match check {
            Check::Sharp => (fitted - predicted).abs() <= tolerance,
            Check::UpperBound => fitted <= predicted + tolerance,
            Check::PositiveRate => fitted > predicted,
            Check::Decay | Check::BoundedRatio => fitted < predicted,
            Check::Below => fitted <= predicted,
        } && fitted.is_finite();
        Self {
            experiment: String::new(),
            case: case.into(),
            p: None,
            sigma: None,
            check,
            predicted,
            fitted,
            r2: None,
            tolerance,
            pass,
        }
    }

    /// A fitted exponent compared with the formula table.
    pub fn rate(
        case: &str,
        estimate: Estimate,
        p: f64,
        sigma: MultiIndex,
        fit: &Fit,
        tolerance: f64,
        check: Check,
    ) -> Self {
        let predicted = predicted_exponent(estimate, p, sigma.order());
        Self::new(case, check, predicted, fit.slope, tolerance)
            .with_p(p)
            .with_sigma(sigma)
            .with_r2(fit.r2)
    }

    /// Exponential decay rate `b` of a fit of `log value` against `t`.
    pub fn positive_rate(case: &str, fit: &Fit) -> Self {
        let mut r = Self::new(case, Check::PositiveRate, 0.0, -fit.slope, 0.0).with_r2(fit.r2);
        r.pass &= fit.reliable();
        r
    }

    /// "Tends to zero": monotone over the second half and final/first below
    /// `threshold`.
    pub fn decay(case: &str, values: &[f64], threshold: f64) -> Self {
        let ratio = match (values.first(), values.last()) {
            (Some(&a), Some(&b)) if a > 0.0 => b / a,
            _ => f64::NAN,
        };
        let half = &values[values.len() / 2..];
        let monotone = half.windows(2).all(|w| w[1] < w[0]);
        let mut r = Self::new(case, Check::Decay, threshold, ratio, 0.0);
        r.pass &= monotone;
        r
    }

    pub fn bounded_ratio(case: &str, values: &[f64], limit: f64) -> Self {
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        Self::new(case, Check::BoundedRatio, limit, max / min, 0.0)
    }

    pub fn below(case: &str, value: f64, threshold: f64) -> Self {
        Self::new(case, Check::Below, threshold, value, 0.0)
    }

    pub fn sharp(case: &str, predicted: f64, fitted: f64, tolerance: f64) -> Self {
        Self::new(case, Check::Sharp, predicted, fitted, tolerance)
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_sigma(mut self, sigma: MultiIndex) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_r2(mut self, r2: f64) -> Self {
        self.r2 = Some(r2);
        self
    }

    /// `experiment/case`.
    pub fn name(&self) -> String {
        format!("{}/{}", self.experiment, self.case)
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        let mut s = format!(
            "{} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name()
        );
        if let Some(p) = self.p {
            let _ = write!(s, " p={}", fmt_p(p));
        }
        if let Some(sig) = self.sigma {
            let _ = write!(s, " sigma={sig}");
        }
        let _ = write!(
            s,
            " {:?}: fitted {:.4e} vs {:.4e}",
            self.check, self.fitted, self.predicted
        );
        if self.tolerance > 0.0 {
            let _ = write!(s, " ± {}", self.tolerance);
        }
        if let Some(r2) = self.r2 {
            let _ = write!(s, " (R² {r2:.4})");
            if r2 < RELIABLE_R2 {
                s.push_str(" [unreliable fit]");
            }
        }
        s
    }
}

/// A named `(t, value)` series for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl NamedSeries {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub reports: Vec<ExperimentReport>,
    pub series: Vec<NamedSeries>,
}

impl ExperimentOutput {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Run-level metadata written into the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub n: usize,
    pub length: f64,
    pub params: FluidParams,
    pub epsilon: f64,
    pub threads: usize,
    pub seed: u64,
}

fn fmt_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.9e}")
}

pub fn reports_csv(reports: &[ExperimentReport]) -> String {
    let mut out = format!("# cnslab reports v{REPORT_FORMAT_VERSION}\n");
    out.push_str("experiment,p,sigma,predicted,fitted,r2,tolerance,pass\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.name(),
            r.p.map(fmt_p).unwrap_or_default(),
            r.sigma.map(|s| format!("\"{s}\"")).unwrap_or_default(),
            fmt_num(r.predicted),
            fmt_num(r.fitted),
            r.r2.map(fmt_num).unwrap_or_default(),
            r.tolerance,
            r.pass
        );
    }
    out
}

pub fn series_csv(series: &[NamedSeries]) -> String {
    let mut out = format!("# cnslab series v{REPORT_FORMAT_VERSION}\n");
    out.push_str("series,t,value\n");
    for s in series {
        for &(t, v) in &s.points {
            let _ = writeln!(out, "\"{}\",{},{}", s.name, fmt_num(t), fmt_num(v));
        }
    }
    out
}

#[derive(Serialize)]
struct Summary<'a> {
    format: &'static str,
    version: u32,
    metadata: &'a RunMetadata,
    all_pass: bool,
    reports: &'a [ExperimentReport],
}

pub fn summary_json(reports: &[ExperimentReport], metadata: &RunMetadata) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Summary {
        format: "cnslab-summary",
        version: REPORT_FORMAT_VERSION,
        metadata,
        all_pass: reports.iter().all(|r| r.pass),
        reports,
    })?)
}

/// Creates `dir` if needed and checks that files can be written in it.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let probe = dir.join(".cnslab-write-probe");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(&probe)?;
    Ok(())
}

/// Writes `reports.csv`, `summary.json` and `<experiment>_series.csv` files.
///
/// Everything is rendered in memory first, so a failure to create the
/// directory leaves nothing behind.
pub fn write_outputs(
    dir: &Path,
    outputs: &[(String, ExperimentOutput)],
    metadata: &RunMetadata,
) -> Result<()> {
    let reports: Vec<ExperimentReport> = outputs
        .iter()
        .flat_map(|(_, o)| o.reports.iter().cloned())
        .collect();
    let mut files = vec![
        ("reports.csv".to_string(), reports_csv(&reports)),
        (
            "summary.json".to_string(),
            summary_json(&reports, metadata)?,
        ),
    ];
    for (name, o) in outputs {
        if !o.series.is_empty() {
            files.push((format!("{name}_series.csv"), series_csv(&o.series)));
        }
    }
    ensure_writable(dir)?;
    for (name, body) in files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}
