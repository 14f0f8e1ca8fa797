//! Finite-sample checks of decay-rate inequalities.
//!
//! Asymptotic statements are tested on a log-spaced window of `n` with the
//! following surrogates:
//!
//! * `O(·)`: the log-ratio has slope at most [`BOUNDED_SLOPE`] against `log n`
//!   over the top decade of the window;
//! * `limsup > 0`: the maximum ratio over the top decade is at least [`LIMSUP_FLOOR`];
//! * `liminf` over small angles: the minimum over the smallest trusted θ-decade.
//!
//! Every report records the `ε`- and `n`-windows on which its inputs were trusted.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::numeric::{integer_log_grid, least_squares, log_grid, trend_slope};
use crate::operators::{DecayProfile, OperatorError, OperatorModel};
use crate::ratefun::{Inverse, RateError, RateForm, RateFunction, PositiveIncreaseReport};

/// Maximum log-log slope of a ratio that still counts as bounded.
pub const BOUNDED_SLOPE: f64 = 0.05;
/// Minimum windowed maximum that counts as bounded away from zero.
pub const LIMSUP_FLOOR: f64 = 1e-3;
/// Relative margin by which the small-angle resolvent growth must beat the power bound.
pub const HYPOTHESIS_MARGIN: f64 = 1e-3;
/// Relative slack when testing pointwise inequalities.
pub const INEQUALITY_RTOL: f64 = 1e-9;
/// Largest top-decade relative deviation for an accepted rate fit.
pub const FIT_RESIDUAL_MAX: f64 = 0.05;
/// Default density of the `n`-grid.
pub const DEFAULT_N_PER_DECADE: usize = 20;
/// Density of `ε`-grids used for hypothesis checks.
const HYPOTHESIS_EPS_PER_DECADE: usize = 16;
/// Dilation used by positive-increase diagnostics inside checks.
const POSINC_T: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("outside applicability: {0}")]
    Applicability(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Rate(#[from] RateError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail { reason: String },
    HypothesisNotSatisfied { hypothesis: String },
    Skipped { reason: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn rank(&self) -> u8 {
        match self {
            Verdict::Fail { .. } => 3,
            Verdict::HypothesisNotSatisfied { .. } => 2,
            Verdict::Pass => 1,
            Verdict::Skipped { .. } => 0,
        }
    }

    /// Worst of several verdicts: fail, then hypothesis failure, then pass.
    pub fn combine<'a, I: IntoIterator<Item = &'a Verdict>>(verdicts: I) -> Verdict {
        verdicts
            .into_iter()
            .fold(None::<&Verdict>, |acc, v| match acc {
                Some(a) if a.rank() >= v.rank() => Some(a),
                _ => Some(v),
            })
            .cloned()
            .unwrap_or(Verdict::Skipped {
                reason: "no parts".into(),
            })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail { reason } => write!(f, "FAIL ({reason})"),
            Verdict::HypothesisNotSatisfied { hypothesis } => {
                write!(f, "HYPOTHESIS NOT SATISFIED ({hypothesis})")
            }
            Verdict::Skipped { reason } => write!(f, "SKIPPED ({reason})"),
        }
    }
}

/// One sampled comparison `lhs` vs `rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`.
    pub ratio: f64,
    /// An inverse on either side hit the end of its rate-function domain.
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimPart {
    pub id: String,
    pub inequality: String,
    pub margins: Vec<Margin>,
    pub verdict: Verdict,
}

/// Range of `ε` and `n` on which a check's inputs were trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub eps: (f64, f64),
    pub n: (u64, u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub claim_id: String,
    pub n_range: (u64, u64),
    pub constants: BTreeMap<String, f64>,
    pub applicability_window: Window,
    pub parts: Vec<ClaimPart>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl VerificationReport {
    fn new(claim_id: &str, range: NRange, eps: (f64, f64)) -> Self {
        Self {
            claim_id: claim_id.into(),
            n_range: (range.min, range.max),
            constants: BTreeMap::new(),
            applicability_window: Window {
                eps,
                n: (range.min, range.max),
            },
            parts: Vec::new(),
            notes: Vec::new(),
            verdict: Verdict::Skipped {
                reason: "not evaluated".into(),
            },
        }
    }

    fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.into(), value);
    }

    fn hypothesis_failure(mut self, hypothesis: String) -> Self {
        self.verdict = Verdict::HypothesisNotSatisfied { hypothesis };
        self
    }

    fn finish(mut self) -> Self {
        self.verdict = Verdict::combine(self.parts.iter().map(|p| &p.verdict));
        self
    }

    /// All margins of all parts, tagged with the part id.
    pub fn margin_rows(&self) -> Vec<(&str, &Margin)> {
        self.parts
            .iter()
            .flat_map(|p| p.margins.iter().map(move |m| (p.id.as_str(), m)))
            .collect()
    }
}

/// Log-spaced integer window `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NRange {
    pub min: u64,
    pub max: u64,
    pub per_decade: usize,
}

impl NRange {
    pub fn new(min: u64, max: u64) -> Self {
        Self {
            min,
            max,
            per_decade: DEFAULT_N_PER_DECADE,
        }
    }

    pub fn with_per_decade(mut self, per_decade: usize) -> Self {
        self.per_decade = per_decade;
        self
    }

    pub fn grid(&self) -> Vec<u64> {
        integer_log_grid(self.min, self.max, self.per_decade)
    }

    fn validate(&self) -> Result<(), VerifyError> {
        if self.min < 1 || self.max <= self.min || self.per_decade == 0 {
            return Err(VerifyError::InvalidInput(format!(
                "n range {}..{} must satisfy 1 ≤ min < max",
                self.min, self.max
            )));
        }
        Ok(())
    }

    /// `n` in the top decade `[max/10, max]`.
    fn in_top_decade(&self, n: u64) -> bool {
        n as f64 >= self.max as f64 / 10.0
    }

    /// `n` in the upper half of the window on a log scale.
    fn in_top_half(&self, n: u64) -> bool {
        n as f64 >= (self.min as f64 * self.max as f64).sqrt()
    }
}

fn check_resolution(t: &OperatorModel, range: &NRange) -> Result<(), VerifyError> {
    range.validate()?;
    t.resolution()
        .check(range.max)
        .map_err(|e| VerifyError::Applicability(e.to_string()))
}

fn margin(n: u64, lhs: f64, rhs: f64, extrapolated: bool) -> Margin {
    Margin {
        n,
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { f64::INFINITY },
        extrapolated,
    }
}

/// Log-log slope of the positive ratios in the top decade (0 if fewer than two).
fn top_decade_slope(range: &NRange, margins: &[Margin]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = margins
        .iter()
        .filter(|m| range.in_top_decade(m.n) && m.ratio > 0.0 && m.ratio.is_finite())
        .map(|m| ((m.n as f64).ln(), m.ratio.ln()))
        .unzip();
    trend_slope(&x, &y).unwrap_or(0.0)
}

fn boundedness_part(id: &str, inequality: String, range: &NRange, margins: Vec<Margin>) -> (ClaimPart, f64, f64) {
    let slope = top_decade_slope(range, &margins);
    let c = margins.iter().map(|m| m.ratio).fold(0.0, f64::max);
    let verdict = if margins.iter().any(|m| m.extrapolated) {
        Verdict::Fail {
            reason: "rate-function domain exhausted (extrapolated inverse)".into(),
        }
    } else if !c.is_finite() {
        Verdict::Fail {
            reason: "right-hand side vanishes".into(),
        }
    } else if slope <= BOUNDED_SLOPE {
        Verdict::Pass
    } else {
        Verdict::Fail {
            reason: format!("ratio grows: top-decade slope {slope:.4} > {BOUNDED_SLOPE}"),
        }
    };
    (
        ClaimPart {
            id: id.into(),
            inequality,
            margins,
            verdict,
        },
        c,
        slope,
    )
}

/// Check `m(ε) ≥ p(ε)` (and optionally `δ·m(ε) ≤ p(ε)`) for the resolvent envelope `p`
/// at the envelope grid nodes inside `[lo, hi]`. Returns the first violation.
fn envelope_comparison(
    t: &OperatorModel,
    m: &RateFunction,
    lo: f64,
    hi: f64,
    lower_factor: Option<f64>,
) -> Result<Option<String>, VerifyError> {
    let env = t.envelope_rate_function(lo)?;
    let RateForm::Table(table) = env.form() else {
        unreachable!("envelope is tabulated")
    };
    for (&e, &p) in table.eps().iter().zip(table.values()) {
        if e > hi * (1.0 + 1e-12) {
            break;
        }
        let mv = m.eval(e)?;
        if mv < p * (1.0 - INEQUALITY_RTOL) {
            return Ok(Some(format!(
                "m majorizes the resolvent envelope: m({e:.6e}) = {mv:.6e} < {p:.6e}"
            )));
        }
        if let Some(d) = lower_factor {
            if d * mv > p * (1.0 + INEQUALITY_RTOL) {
                return Ok(Some(format!(
                    "δ·m(ε) ≤ max_(ε≤|θ|≤π) 1/dist(e^(iθ), σ(T)): fails at ε = {e:.6e} ({:.6e} > {p:.6e})",
                    d * mv
                )));
            }
        }
    }
    Ok(None)
}

fn posinc_on_window(m: &RateFunction, lo: f64, hi: f64) -> Result<PositiveIncreaseReport, VerifyError> {
    let decades = ((hi / lo).log10().ceil() as u32).max(2);
    m.positive_increase_at(POSINC_T, decades, hi).map_err(|e| match e {
        RateError::InsufficientDomain { .. } => VerifyError::Applicability(format!(
            "positive-increase diagnostic needs m below the window: {e}"
        )),
        other => other.into(),
    })
}

fn inverse_checked(inv: Result<Inverse, RateError>) -> Result<Inverse, VerifyError> {
    Ok(inv?)
}

/// `‖Tⁿ(I−T)‖ = O(m_log⁻¹(cn))` for `c ∈ (0, 1)`.
pub fn check_upper_mlog(
    t: &OperatorModel,
    m: &RateFunction,
    c: f64,
    range: NRange,
) -> Result<VerificationReport, VerifyError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(VerifyError::InvalidInput(format!("c must lie in (0,1), got {c}")));
    }
    check_resolution(t, &range)?;
    let hi = inverse_checked(m.m_log_inverse(c * range.min as f64))?;
    let lo = inverse_checked(m.m_log_inverse(c * range.max as f64))?;
    let mut report = VerificationReport::new("upper-mlog", range, (lo.eps, hi.eps));
    report.constant("c", c);
    if lo.extrapolated {
        return Err(VerifyError::Applicability(format!(
            "m_log⁻¹({}) lies below the domain of m",
            c * range.max as f64
        )));
    }
    if let Some(h) = envelope_comparison(t, m, lo.eps, hi.eps, None)? {
        return Ok(report.hypothesis_failure(h));
    }
    let ns = range.grid();
    let profile = t.decay_profile(&ns)?;
    let mut margins = Vec::with_capacity(ns.len());
    for e in &profile.entries {
        let inv = m.m_log_inverse(c * e.n as f64)?;
        margins.push(margin(e.n, e.value, inv.eps, inv.extrapolated));
    }
    let (part, big_c, slope) = boundedness_part("bound", format!("‖Tⁿ(I−T)‖ ≤ C·m_log⁻¹({c}·n)"), &range, margins);
    report.constant("C", big_c);
    report.constant("slope_top_decade", slope);
    report.constant("slope_threshold", BOUNDED_SLOPE);
    report.parts.push(part);
    Ok(report.finish())
}

/// `‖Tⁿ(I−T)‖ = O(m⁻¹(n))` under reciprocally positive increase of `m`.
pub fn check_upper_posinc(
    t: &OperatorModel,
    m: &RateFunction,
    range: NRange,
) -> Result<VerificationReport, VerifyError> {
    check_resolution(t, &range)?;
    let hi = inverse_checked(m.right_inverse(range.min as f64))?;
    let lo = inverse_checked(m.right_inverse(range.max as f64))?;
    let mut report = VerificationReport::new("upper-posinc", range, (lo.eps, hi.eps));
    if lo.extrapolated {
        return Err(VerifyError::Applicability(format!(
            "m⁻¹({}) lies below the domain of m",
            range.max
        )));
    }
    let diag = posinc_on_window(m, lo.eps, hi.eps)?;
    report.constant("c_hat", diag.c_hat);
    report.constant("alpha_hat", diag.alpha_hat);
    report.constant("posinc_inf_ratio", diag.inf_ratio);
    if !diag.holds {
        return Ok(report.hypothesis_failure(format!(
            "reciprocally positive increase m(ε/t)/m(ε) ≥ c·t^α on [{:.6e}, {:.6e}]",
            diag.window.0, diag.window.1
        )));
    }
    if let Some(h) = envelope_comparison(t, m, lo.eps, hi.eps, None)? {
        return Ok(report.hypothesis_failure(h));
    }
    let ns = range.grid();
    let profile = t.decay_profile(&ns)?;
    let mut margins = Vec::with_capacity(ns.len());
    for e in &profile.entries {
        let inv = m.right_inverse(e.n as f64)?;
        margins.push(margin(e.n, e.value, inv.eps, inv.extrapolated));
    }
    let (part, big_c, slope) = boundedness_part("bound", "‖Tⁿ(I−T)‖ ≤ C·m⁻¹(n)".into(), &range, margins);
    report.constant("C", big_c);
    report.constant("slope_top_decade", slope);
    report.constant("slope_threshold", BOUNDED_SLOPE);
    report.parts.push(part);
    Ok(report.finish())
}

/// `limsup ‖Tⁿ(I−T)‖ / m⁻¹(cn) > 0` for each `c`, given the small-angle growth hypothesis.
pub fn check_lower(
    t: &OperatorModel,
    m: &RateFunction,
    c_list: &[f64],
    range: NRange,
) -> Result<VerificationReport, VerifyError> {
    if c_list.is_empty() || c_list.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(VerifyError::InvalidInput("c list must be nonempty and positive".into()));
    }
    check_resolution(t, &range)?;
    let c_max = c_list.iter().copied().fold(0.0, f64::max);
    let c_min = c_list.iter().copied().fold(f64::INFINITY, f64::min);
    let lo = inverse_checked(m.right_inverse(c_max * range.max as f64))?;
    let hi = inverse_checked(m.right_inverse(c_min * range.min as f64))?;
    let mut report = VerificationReport::new("lower", range, (lo.eps, hi.eps));
    let k = t.power_bound();
    report.constant("K", k);

    // smallest trusted θ-decade
    let theta_lo = lo.eps;
    let decade = log_grid(theta_lo, (10.0 * theta_lo).min(std::f64::consts::PI), HYPOTHESIS_EPS_PER_DECADE);
    let mut liminf = f64::INFINITY;
    let mut nontrivial: f64 = 0.0;
    for &th in &decade {
        let r = t.resolvent_norm(th)?.max(t.resolvent_norm(-th)?);
        liminf = liminf.min(th * r);
        nontrivial = nontrivial.max(r / m.eval(th)?);
    }
    report.constant("liminf_theta_resolvent", liminf);
    report.constant("limsup_resolvent_over_m", nontrivial);
    if !(liminf > k * (1.0 + HYPOTHESIS_MARGIN)) {
        return Ok(report.hypothesis_failure(format!(
            "hypothesis (2.3) not satisfied: liminf θ·‖R(e^(±iθ),T)‖ ≈ {liminf:.6e} does not exceed K = {k} on [{:.3e}, {:.3e}]",
            decade[0],
            decade[decade.len() - 1]
        )));
    }
    if nontrivial < LIMSUP_FLOOR {
        return Ok(report.hypothesis_failure(format!(
            "limsup ‖R(e^(iθ),T)‖/m(|θ|) > 0: windowed maximum {nontrivial:.3e} < {LIMSUP_FLOOR}"
        )));
    }

    let ns = range.grid();
    let profile = t.decay_profile(&ns)?;
    for &c in c_list {
        let mut margins = Vec::with_capacity(ns.len());
        for e in &profile.entries {
            let inv = m.right_inverse(c * e.n as f64)?;
            margins.push(margin(e.n, e.value, inv.eps, inv.extrapolated));
        }
        let sup = margins
            .iter()
            .filter(|mg| range.in_top_decade(mg.n))
            .map(|mg| mg.ratio)
            .fold(0.0, f64::max);
        let verdict = if margins.iter().any(|mg| mg.extrapolated && range.in_top_decade(mg.n)) {
            Verdict::Fail {
                reason: "rate-function domain exhausted (extrapolated inverse)".into(),
            }
        } else if sup >= LIMSUP_FLOOR {
            Verdict::Pass
        } else {
            Verdict::Fail {
                reason: format!("top-decade maximum {sup:.3e} < {LIMSUP_FLOOR}"),
            }
        };
        report.constant(&format!("sup_ratio[c={c}]"), sup);
        report.parts.push(ClaimPart {
            id: format!("c={c}"),
            inequality: format!("limsup ‖Tⁿ(I−T)‖ / m⁻¹({c}·n) ≥ {LIMSUP_FLOOR}"),
            margins,
            verdict,
        });
    }
    Ok(report.finish())
}

/// Smallest `δ` with `min_{ε≤|θ|≤π} dist(e^{iθ}, σ(T)) ≤ δε` on the sampled tail.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    pub window: (f64, f64),
    /// `(ε, min-window distance / ε)` per sample.
    pub samples: Vec<(f64, f64)>,
}

pub fn delta_estimate(t: &OperatorModel, eps_grid: &[f64]) -> Result<DeltaEstimate, VerifyError> {
    if !t.contains_one() {
        return Err(VerifyError::InvalidInput("δ estimate needs 1 ∈ σ(T)".into()));
    }
    if eps_grid.is_empty() {
        return Err(VerifyError::InvalidInput("empty ε grid".into()));
    }
    let mut samples = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        // the windowed minimum distance is the reciprocal of the envelope
        let d = 1.0 / t.resolvent_envelope(e)?;
        samples.push((e, d / e));
    }
    let delta_hat = samples.iter().map(|s| s.1).fold(0.0, f64::max).min(1.0);
    let lo = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eps_grid.iter().copied().fold(0.0, f64::max);
    Ok(DeltaEstimate {
        delta_hat,
        window: (lo, hi),
        samples,
    })
}

/// `(1−δ′)·m_max⁻¹(cn) ≤ ‖Tⁿ(I−T)‖ ≤ (1+δ)·m_max⁻¹(n)` with `m` the resolvent envelope.
///
/// Part (ii) is evaluated only when `delta_prime` is given.
pub fn check_sandwich_quasimult(
    t: &OperatorModel,
    delta: f64,
    delta_prime: Option<f64>,
    c: f64,
    range: NRange,
) -> Result<VerificationReport, VerifyError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(VerifyError::InvalidInput(format!("δ must lie in (0,1], got {delta}")));
    }
    if let Some(dp) = delta_prime {
        if !(dp > delta && dp < 1.0) {
            return Err(VerifyError::InvalidInput(format!("δ′ must lie in (δ, 1) = ({delta}, 1), got {dp}")));
        }
        if !(c > 1.0) {
            return Err(VerifyError::InvalidInput(format!("c must exceed 1, got {c}")));
        }
    }
    if !t.contains_one() {
        return Err(VerifyError::InvalidInput("sandwich needs 1 ∈ σ(T)".into()));
    }
    check_resolution(t, &range)?;
    let c_eff = if delta_prime.is_some() { c } else { 1.0 };
    let eps_min = 1.0 / (10.0 * std::f64::consts::E * c_eff * range.max as f64);
    let m = t.envelope_rate_function(eps_min)?;
    let lo = inverse_checked(m.m_max_inverse(c_eff * range.max as f64))?;
    let hi = inverse_checked(m.m_max_inverse(range.min as f64))?;
    let mut report = VerificationReport::new("sandwich", range, (lo.eps, hi.eps));
    report.constant("delta", delta);
    if let Some(dp) = delta_prime {
        report.constant("delta_prime", dp);
        report.constant("c", c);
    }
    let tail = log_grid(lo.eps, hi.eps.max(lo.eps), HYPOTHESIS_EPS_PER_DECADE);
    let est = delta_estimate(t, &tail)?;
    report.constant("delta_hat", est.delta_hat);

    let ns = range.grid();
    let profile: DecayProfile = t.decay_profile(&ns)?;

    let upper_hyp = est.delta_hat <= delta;
    let mut margins = Vec::with_capacity(ns.len());
    for e in &profile.entries {
        let inv = m.m_max_inverse(e.n as f64)?;
        margins.push(margin(e.n, e.value, (1.0 + delta) * inv.eps, inv.extrapolated));
    }
    let verdict = if !upper_hyp {
        Verdict::HypothesisNotSatisfied {
            hypothesis: format!(
                "(i) needs dist(e^(iθ), σ(T)) ≤ δε on the window: δ̂ = {:.6} > δ = {delta}",
                est.delta_hat
            ),
        }
    } else {
        pointwise_verdict(&range, &margins, |r| r <= 1.0 + INEQUALITY_RTOL)
    };
    report.parts.push(ClaimPart {
        id: "i".into(),
        inequality: format!("‖Tⁿ(I−T)‖ ≤ (1+{delta})·m_max⁻¹(n)"),
        margins,
        verdict,
    });

    if let Some(dp) = delta_prime {
        let mut margins = Vec::with_capacity(ns.len());
        for e in &profile.entries {
            let inv = m.m_max_inverse(c * e.n as f64)?;
            margins.push(margin(e.n, e.value, (1.0 - dp) * inv.eps, inv.extrapolated));
        }
        let verdict = if est.delta_hat >= dp {
            Verdict::HypothesisNotSatisfied {
                hypothesis: format!(
                    "(ii) needs dist(e^(iθ), σ) ≤ δε for some δ < δ′: δ̂ = {:.6} ≥ δ′ = {dp}",
                    est.delta_hat
                ),
            }
        } else {
            pointwise_verdict(&range, &margins, |r| r >= 1.0 - INEQUALITY_RTOL)
        };
        report.parts.push(ClaimPart {
            id: "ii".into(),
            inequality: format!("‖Tⁿ(I−T)‖ ≥ (1−{dp})·m_max⁻¹({c}·n)"),
            margins,
            verdict,
        });
    }
    let lower_violations = report
        .parts
        .iter()
        .flat_map(|p| p.margins.iter().map(move |m| (p, m)))
        .filter(|(p, mg)| {
            !range.in_top_half(mg.n)
                && match p.id.as_str() {
                    "i" => mg.ratio > 1.0 + INEQUALITY_RTOL,
                    _ => mg.ratio < 1.0 - INEQUALITY_RTOL,
                }
        })
        .count();
    if lower_violations > 0 {
        report
            .notes
            .push(format!("{lower_violations} margin(s) violated below the top half of the n range"));
    }
    Ok(report.finish())
}

fn pointwise_verdict<F: Fn(f64) -> bool>(range: &NRange, margins: &[Margin], ok: F) -> Verdict {
    let top: Vec<&Margin> = margins.iter().filter(|m| range.in_top_half(m.n)).collect();
    if top.iter().any(|m| m.extrapolated) {
        return Verdict::Fail {
            reason: "rate-function domain exhausted (extrapolated inverse)".into(),
        };
    }
    match top.iter().find(|m| !ok(m.ratio)) {
        None => Verdict::Pass,
        Some(m) => Verdict::Fail {
            reason: format!("violated at n = {} (ratio {:.9})", m.n, m.ratio),
        },
    }
}

/// The three closing comparisons between `m_max⁻¹`, `m_log⁻¹` and `m⁻¹`.
pub fn check_comparisons(
    m: &RateFunction,
    alpha: f64,
    c: f64,
    c_prime: f64,
    range: NRange,
) -> Result<VerificationReport, VerifyError> {
    range.validate()?;
    if !(c > 0.0 && c_prime > 0.0) {
        return Err(VerifyError::InvalidInput(format!("c, c′ must be positive (got {c}, {c_prime})")));
    }
    let hi = m.right_inverse(range.min as f64)?;
    let lo = m.right_inverse(range.max as f64)?;
    let mut report = VerificationReport::new("comparisons", range, (lo.eps, hi.eps));
    report.constant("alpha", alpha);
    report.constant("c", c);
    report.constant("c_prime", c_prime);
    let ns = range.grid();

    // 1. m_max⁻¹(n) ≤ m_log⁻¹(cn) for c ∈ (0, 1+α), given m(ε) ≥ c_α ε^{−α}, α ≥ 1
    let mut margins = Vec::with_capacity(ns.len());
    for &n in &ns {
        let a = m.m_max_inverse(n as f64)?;
        let b = m.m_log_inverse(c * n as f64)?;
        margins.push(margin(n, a.eps, b.eps, a.extrapolated || b.extrapolated));
    }
    let verdict = match power_lower_bound_mismatch(m, alpha) {
        Some(reason) => Verdict::Skipped { reason },
        None if !(c < 1.0 + alpha) => Verdict::Skipped {
            reason: format!("c = {c} outside (0, 1+α) = (0, {})", 1.0 + alpha),
        },
        None => inequality_verdict(&margins, |r| r <= 1.0 + INEQUALITY_RTOL),
    };
    report.parts.push(ClaimPart {
        id: "mmax-vs-mlog".into(),
        inequality: format!("m_max⁻¹(n) ≤ m_log⁻¹({c}·n)"),
        margins,
        verdict,
    });

    // 2. m_max⁻¹(n) = O(m⁻¹(n)) under positive increase
    let mut margins = Vec::with_capacity(ns.len());
    for &n in &ns {
        let a = m.m_max_inverse(n as f64)?;
        let b = m.right_inverse(n as f64)?;
        margins.push(margin(n, a.eps, b.eps, a.extrapolated || b.extrapolated));
    }
    let verdict = match posinc_on_window(m, lo.eps, hi.eps) {
        Ok(d) if d.holds => {
            report.constant("c_hat", d.c_hat);
            report.constant("alpha_hat", d.alpha_hat);
            let (part, big_c, slope) = boundedness_part("x", String::new(), &range, margins.clone());
            report.constant("C_mmax_over_minv", big_c);
            report.constant("slope_top_decade", slope);
            part.verdict
        }
        Ok(d) => Verdict::Skipped {
            reason: format!(
                "positive increase not verified on [{:.3e}, {:.3e}]",
                d.window.0, d.window.1
            ),
        },
        Err(e) => Verdict::Skipped { reason: e.to_string() },
    };
    report.parts.push(ClaimPart {
        id: "mmax-vs-minv".into(),
        inequality: "m_max⁻¹(n) ≤ C·m⁻¹(n)".into(),
        margins,
        verdict,
    });

    // 3. m_max⁻¹(cn) ≥ e^{−c/c′}·m⁻¹(c′n)
    let factor = (-c / c_prime).exp();
    let mut margins = Vec::with_capacity(ns.len());
    for &n in &ns {
        let a = m.m_max_inverse(c * n as f64)?;
        let b = m.right_inverse(c_prime * n as f64)?;
        margins.push(margin(n, a.eps, factor * b.eps, a.extrapolated || b.extrapolated));
    }
    let verdict = inequality_verdict(&margins, |r| r >= 1.0 - INEQUALITY_RTOL);
    report.parts.push(ClaimPart {
        id: "mmax-vs-shifted-minv".into(),
        inequality: format!("m_max⁻¹({c}·n) ≥ e^(−{c}/{c_prime})·m⁻¹({c_prime}·n)"),
        margins,
        verdict,
    });
    Ok(report.finish())
}

/// Pointwise verdict separating inequality failures from window exhaustion.
fn inequality_verdict<F: Fn(f64) -> bool>(margins: &[Margin], ok: F) -> Verdict {
    let trusted: Vec<&Margin> = margins.iter().filter(|m| !m.extrapolated).collect();
    if trusted.is_empty() {
        return Verdict::Skipped {
            reason: "window exhausted: every sample extrapolated".into(),
        };
    }
    match trusted.iter().find(|m| !ok(m.ratio)) {
        Some(m) => Verdict::Fail {
            reason: format!("violated at n = {} (ratio {:.9})", m.n, m.ratio),
        },
        None => Verdict::Pass,
    }
}

/// Whether `m(ε) ≥ c_α ε^{−α}` fails to follow from the form of `m`.
fn power_lower_bound_mismatch(m: &RateFunction, alpha: f64) -> Option<String> {
    if alpha < 1.0 {
        return Some(format!("α = {alpha} < 1"));
    }
    match m.form() {
        RateForm::PowerLaw { exponent, .. } if *exponent >= alpha => None,
        RateForm::PowerLog {
            exponent, log_exponent, ..
        } if *exponent > alpha || (*exponent == alpha && *log_exponent >= 0.0) => None,
        RateForm::Table(_) => None,
        _ => Some(format!("m is not bounded below by a multiple of ε^(−{alpha})")),
    }
}

/// Consistency of a decay bound `O(m⁻¹(cn))` with positive increase of `m`.
pub fn necessity_diagnostic(
    t: &OperatorModel,
    m: &RateFunction,
    c: f64,
    delta: f64,
    range: NRange,
) -> Result<VerificationReport, VerifyError> {
    if !(c > 0.0) || !(delta > 0.0 && delta <= 1.0) {
        return Err(VerifyError::InvalidInput(format!("need c > 0 and δ ∈ (0,1] (got {c}, {delta})")));
    }
    check_resolution(t, &range)?;
    let lo = m.right_inverse(c * range.max as f64)?;
    let hi = m.right_inverse(c * range.min as f64)?;
    let mut report = VerificationReport::new("necessity", range, (lo.eps, hi.eps));
    report.constant("c", c);
    report.constant("delta", delta);
    if lo.extrapolated {
        return Err(VerifyError::Applicability(format!(
            "m⁻¹({}) lies below the domain of m",
            c * range.max as f64
        )));
    }
    if let Some(h) = envelope_comparison(t, m, lo.eps, hi.eps, Some(delta))? {
        return Ok(report.hypothesis_failure(h));
    }
    let ns = range.grid();
    let profile = t.decay_profile(&ns)?;
    let mut margins = Vec::with_capacity(ns.len());
    for e in &profile.entries {
        let inv = m.right_inverse(c * e.n as f64)?;
        margins.push(margin(e.n, e.value, inv.eps, inv.extrapolated));
    }
    let (mut part, big_c, slope) = boundedness_part("decay-bound", format!("‖Tⁿ(I−T)‖ ≤ C·m⁻¹({c}·n)"), &range, margins);
    report.constant("C", big_c);
    report.constant("slope_top_decade", slope);
    if !part.verdict.is_pass() {
        let reason = format!("decay bound O(m⁻¹({c}n)) not observed");
        part.verdict = Verdict::HypothesisNotSatisfied { hypothesis: reason };
        report.parts.push(part);
        return Ok(report.finish());
    }
    report.parts.push(part);
    let diag = posinc_on_window(m, lo.eps, hi.eps)?;
    report.constant("c_hat", diag.c_hat);
    report.constant("alpha_hat", diag.alpha_hat);
    let verdict = if diag.holds {
        Verdict::Pass
    } else {
        report.notes.push("paper-inconsistency".into());
        Verdict::Fail {
            reason: "paper-inconsistency: decay bound holds but positive increase fails".into(),
        }
    };
    report.parts.push(ClaimPart {
        id: "positive-increase".into(),
        inequality: "m(ε/t)/m(ε) ≥ c·t^α".into(),
        margins: Vec::new(),
        verdict,
    });
    Ok(report.finish())
}

/// Model family for [`fit_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `C·n^{−a}·log(n)^b`
    PowerLog,
    /// `C·n^{−a}` (`b = 0`)
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub a: f64,
    pub b: f64,
    pub log_c: f64,
    /// Largest relative deviation of the fit over the top decade.
    pub residual: f64,
    pub accepted: bool,
}

/// Least-squares fit of `log value` against `(1, log n, log log n)`.
pub fn fit_rate(profile: &DecayProfile, model: FitModel) -> Result<RateFit, VerifyError> {
    let entries = &profile.entries;
    if entries.iter().all(|e| e.value == 0.0) {
        return Err(VerifyError::Fit("degenerate profile: all values are zero".into()));
    }
    if entries.iter().any(|e| e.n < 2) {
        return Err(VerifyError::Fit("fit needs n ≥ 2".into()));
    }
    let n_min = entries.iter().map(|e| e.n).min().unwrap_or(0);
    let n_max = entries.iter().map(|e| e.n).max().unwrap_or(0);
    if (n_max as f64) < 100.0 * n_min as f64 {
        return Err(VerifyError::Fit(format!("fit needs two decades of n, got {n_min}..{n_max}")));
    }
    let pos: Vec<_> = entries.iter().filter(|e| e.value > 0.0).collect();
    let rows: Vec<Vec<f64>> = pos
        .iter()
        .map(|e| {
            let l = (e.n as f64).ln();
            match model {
                FitModel::PowerLog => vec![1.0, -l, l.ln()],
                FitModel::Power => vec![1.0, -l],
            }
        })
        .collect();
    let y: Vec<f64> = pos.iter().map(|e| e.value.ln()).collect();
    let coef = least_squares(&rows, &y).ok_or_else(|| VerifyError::Fit("rank-deficient design".into()))?;
    let (log_c, a) = (coef[0], coef[1]);
    let b = if model == FitModel::PowerLog { coef[2] } else { 0.0 };
    let residual = entries
        .iter()
        .filter(|e| e.n as f64 >= n_max as f64 / 10.0)
        .map(|e| {
            let l = (e.n as f64).ln();
            let fit = (log_c - a * l + b * l.ln()).exp();
            if e.value == 0.0 {
                f64::INFINITY
            } else {
                (fit / e.value - 1.0).abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(RateFit {
        a,
        b,
        log_c,
        residual,
        accepted: residual <= FIT_RESIDUAL_MAX,
    })
}

/// `C·ε^{−α}` with `C` the smallest constant majorizing a tabulated envelope on `[lo, hi]`.
pub fn majorant_power_law(envelope: &RateFunction, alpha: f64, lo: f64, hi: f64) -> Result<RateFunction, VerifyError> {
    let RateForm::Table(table) = envelope.form() else {
        return Err(VerifyError::InvalidInput("majorant fit needs a tabulated envelope".into()));
    };
    let c = table
        .eps()
        .iter()
        .zip(table.values())
        .filter(|(e, _)| **e >= lo * (1.0 - 1e-12) && **e <= hi * (1.0 + 1e-12))
        .map(|(e, v)| v * e.powf(alpha))
        .fold(0.0, f64::max);
    if c <= 0.0 {
        return Err(VerifyError::InvalidInput(format!("no envelope nodes in [{lo}, {hi}]")));
    }
    Ok(RateFunction::power_law(c, alpha)?)
}

/// Log-spaced sweep of candidate constants, for search-mode checks.
pub fn c_sweep(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    log_grid(lo, hi, per_decade)
}
