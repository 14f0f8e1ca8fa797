//! Rate functions `m: (0, π] → (0, ∞)` and their calculus.
//!
//! A [`RateFunction`] is a continuous non-increasing majorant, given either in
//! closed form or as a monotone sample table. On top of evaluation this module
//! provides the right-inverse `m⁻¹(s) = inf{ε : m(ε) ≤ s}`, the transforms
//! `m_log(ε) = m(ε)·log(1 + m(ε)/ε)` and
//! `m_max(ε) = max_{θ∈[ε,π]} m(θ)·log(θ/ε)` with their inverses, and a
//! finite-window diagnostic for reciprocally positive increase
//! (`m(ε/t)/m(ε) ≥ c·t^α` for small `ε`).

use std::f64::consts::PI;

use thiserror::Error;

use crate::numeric::{grid_max, least_squares, log_grid, Extremum};

/// Relative tolerance of every bisection-based inversion.
pub const INVERSION_RTOL: f64 = 1e-12;
/// Iteration cap of the inversion bisection.
pub const INVERSION_MAX_ITER: usize = 200;
/// Default θ-grid density for `m_max`.
pub const MMAX_POINTS_PER_DECADE: usize = 64;
/// Bracket tolerance for golden-section refinement of `m_max`.
const MMAX_XTOL: f64 = 1e-10;
/// Relative slack when checking that an argument lies in the domain.
const DOMAIN_SLACK: f64 = 1e-12;
/// Default lower end of closed-form domains.
pub const DEFAULT_DOMAIN_MIN: f64 = 1e-12;
/// Default upper end of closed forms carrying a logarithmic factor.
pub const DEFAULT_LOG_DOMAIN_MAX: f64 = 0.5;
/// Number of powers `t, t², …` probed by the positive-increase diagnostic.
pub const POSINC_POWERS: u32 = 3;
/// Extrapolated regular-variation index below which positive increase is rejected.
pub const POSINC_INDEX_FLOOR: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("argument {eps} outside the domain [{min}, {max}]")]
    OutOfDomain { eps: f64, min: f64, max: f64 },
    #[error("level {s} is below the minimum value {min} of the function on its domain")]
    BelowRange { s: f64, min: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid sample table: {0}")]
    InvalidTable(String),
    #[error("rate function is not a resolvent majorant: m({eps}) = {value} < 1/eps")]
    NotMajorant { eps: f64, value: f64 },
    #[error("insufficient domain for diagnostic: need down to {needed}, domain starts at {available}")]
    InsufficientDomain { needed: f64, available: f64 },
}

/// Monotone sample table, stored with ascending `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    log_eps: Vec<f64>,
    log_values: Vec<f64>,
    eps: Vec<f64>,
    values: Vec<f64>,
}

impl SampleTable {
    /// Build from a strictly monotone `ε`-grid (either direction) and positive values.
    pub fn new(eps: Vec<f64>, values: Vec<f64>) -> Result<Self, RateError> {
        if eps.len() != values.len() {
            return Err(RateError::InvalidTable("length mismatch".into()));
        }
        if eps.len() < 2 {
            return Err(RateError::InvalidTable("need at least two nodes".into()));
        }
        let (mut eps, mut values) = (eps, values);
        if eps[0] > eps[eps.len() - 1] {
            eps.reverse();
            values.reverse();
        }
        if !eps.windows(2).all(|w| w[0] < w[1]) {
            return Err(RateError::InvalidTable("ε-grid must be strictly monotone".into()));
        }
        if eps[0] <= 0.0 || eps[eps.len() - 1] > PI * (1.0 + DOMAIN_SLACK) {
            return Err(RateError::InvalidTable("ε-grid must lie in (0, π]".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(RateError::InvalidTable(format!("non-positive or non-finite value {v}")));
        }
        if let Some(i) = (1..values.len()).find(|&i| values[i] > values[i - 1]) {
            return Err(RateError::InvalidTable(format!(
                "values increase between ε={} and ε={}",
                eps[i - 1],
                eps[i]
            )));
        }
        Ok(Self {
            log_eps: eps.iter().map(|e| e.ln()).collect(),
            log_values: values.iter().map(|v| v.ln()).collect(),
            eps,
            values,
        })
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Log-log linear interpolation; `eps` must lie in the table range.
    fn interpolate(&self, eps: f64) -> f64 {
        let n = self.eps.len();
        if eps <= self.eps[0] {
            return self.values[0];
        }
        if eps >= self.eps[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.eps.partition_point(|&e| e < eps);
        if self.eps[hi] == eps {
            return self.values[hi];
        }
        let lo = hi - 1;
        let x = eps.ln();
        let w = (x - self.log_eps[lo]) / (self.log_eps[hi] - self.log_eps[lo]);
        (self.log_values[lo] + w * (self.log_values[hi] - self.log_values[lo])).exp()
    }
}

/// Closed-form descriptor or sample table.
#[derive(Debug, Clone, PartialEq)]
pub enum RateForm {
    /// `C·ε^{−α}`
    PowerLaw { scale: f64, exponent: f64 },
    /// `C·ε^{−α}·|log ε|^β`
    PowerLog {
        scale: f64,
        exponent: f64,
        log_exponent: f64,
    },
    Table(SampleTable),
}

/// A continuous non-increasing rate function on `[domain_min, domain_max] ⊆ (0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    form: RateForm,
    domain_min: f64,
    domain_max: f64,
    power_bound_hint: Option<f64>,
    resolvent_majorant: bool,
}

/// Result of a right-inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse {
    pub eps: f64,
    /// The level exceeds the function's value at `domain_min`; `eps` is clamped there.
    pub extrapolated: bool,
}

/// Maximizer and value of `m_max` at a given `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPoint {
    pub value: f64,
    pub theta: f64,
}

impl RateFunction {
    /// `C·ε^{−α}` on `[1e-12, π]`.
    pub fn power_law(scale: f64, exponent: f64) -> Result<Self, RateError> {
        Self::from_form(
            RateForm::PowerLaw { scale, exponent },
            DEFAULT_DOMAIN_MIN,
            PI,
        )
    }

    /// `C·ε^{−α}·|log ε|^β`; the default domain stops at 0.5 when `β ≠ 0`
    /// (the factor vanishes at `ε = 1`).
    pub fn power_log(scale: f64, exponent: f64, log_exponent: f64) -> Result<Self, RateError> {
        let max = if log_exponent == 0.0 { PI } else { DEFAULT_LOG_DOMAIN_MAX };
        Self::from_form(
            RateForm::PowerLog {
                scale,
                exponent,
                log_exponent,
            },
            DEFAULT_DOMAIN_MIN,
            max,
        )
    }

    /// Sample table; its domain is the table range.
    pub fn from_table(eps: Vec<f64>, values: Vec<f64>) -> Result<Self, RateError> {
        let table = SampleTable::new(eps, values)?;
        let (min, max) = (table.eps[0], table.eps[table.eps.len() - 1].min(PI));
        Self::from_form(RateForm::Table(table), min, max)
    }

    fn from_form(form: RateForm, domain_min: f64, domain_max: f64) -> Result<Self, RateError> {
        let m = Self {
            form,
            domain_min,
            domain_max,
            power_bound_hint: None,
            resolvent_majorant: false,
        };
        m.validate()?;
        Ok(m)
    }

    /// Restrict or move the domain (closed forms only may extend beyond a table).
    pub fn with_domain(mut self, min: f64, max: f64) -> Result<Self, RateError> {
        if let RateForm::Table(t) = &self.form {
            let (lo, hi) = (t.eps[0], t.eps[t.eps.len() - 1]);
            if min < lo * (1.0 - DOMAIN_SLACK) || max > hi * (1.0 + DOMAIN_SLACK) {
                return Err(RateError::InvalidParameter(format!(
                    "domain [{min}, {max}] exceeds table range [{lo}, {hi}]"
                )));
            }
        }
        self.domain_min = min;
        self.domain_max = max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_power_bound_hint(mut self, k: f64) -> Self {
        self.power_bound_hint = Some(k);
        self
    }

    /// Flag as a resolvent majorant of an operator with `1 ∈ σ(T)`; requires `m(ε) ≥ 1/ε`.
    pub fn as_resolvent_majorant(mut self) -> Result<Self, RateError> {
        self.resolvent_majorant = true;
        self.validate()?;
        Ok(self)
    }

    pub fn form(&self) -> &RateForm {
        &self.form
    }

    pub fn domain_min(&self) -> f64 {
        self.domain_min
    }

    pub fn domain_max(&self) -> f64 {
        self.domain_max
    }

    pub fn power_bound_hint(&self) -> Option<f64> {
        self.power_bound_hint
    }

    pub fn is_resolvent_majorant(&self) -> bool {
        self.resolvent_majorant
    }

    fn validate(&self) -> Result<(), RateError> {
        let (lo, hi) = (self.domain_min, self.domain_max);
        if !(lo > 0.0 && lo < hi && hi <= PI * (1.0 + DOMAIN_SLACK)) {
            return Err(RateError::InvalidParameter(format!(
                "domain [{lo}, {hi}] must satisfy 0 < min < max ≤ π"
            )));
        }
        match &self.form {
            RateForm::PowerLaw { scale, exponent } => {
                if !(*scale > 0.0 && scale.is_finite()) || !(*exponent >= 0.0 && exponent.is_finite()) {
                    return Err(RateError::InvalidParameter(format!(
                        "power law needs C > 0, α ≥ 0 (got C={scale}, α={exponent})"
                    )));
                }
            }
            RateForm::PowerLog {
                scale,
                exponent,
                log_exponent,
            } => {
                if !(*scale > 0.0) || !(*exponent >= 0.0) || !log_exponent.is_finite() {
                    return Err(RateError::InvalidParameter(format!(
                        "power-log needs C > 0, α ≥ 0 (got C={scale}, α={exponent}, β={log_exponent})"
                    )));
                }
                if *log_exponent != 0.0 {
                    if hi >= 1.0 {
                        return Err(RateError::InvalidParameter(
                            "power-log with β ≠ 0 needs domain below ε = 1".into(),
                        ));
                    }
                    // d/dε log m = −(α + β/|log ε|)/ε; |log ε| is smallest at the top.
                    let l = -hi.ln();
                    if exponent + log_exponent / l < 0.0 {
                        return Err(RateError::InvalidParameter(format!(
                            "power-log increases near ε = {hi}; shrink the domain"
                        )));
                    }
                }
            }
            RateForm::Table(_) => {}
        }
        if self.resolvent_majorant {
            self.check_majorant()?;
        }
        Ok(())
    }

    fn check_majorant(&self) -> Result<(), RateError> {
        let nodes: Vec<f64> = match &self.form {
            // log-log interpolation and 1/ε are both linear in log space: nodes suffice
            RateForm::Table(t) => t
                .eps
                .iter()
                .copied()
                .filter(|&e| e >= self.domain_min && e <= self.domain_max)
                .chain([self.domain_min, self.domain_max])
                .collect(),
            _ => log_grid(self.domain_min, self.domain_max, 64),
        };
        for e in nodes {
            let v = self.eval_unchecked(e);
            if v * e < 1.0 - 1e-12 {
                return Err(RateError::NotMajorant { eps: e, value: v });
            }
        }
        Ok(())
    }

    fn clamp_domain(&self, eps: f64) -> Result<f64, RateError> {
        let (lo, hi) = (self.domain_min, self.domain_max);
        if eps >= lo && eps <= hi {
            Ok(eps)
        } else if eps >= lo * (1.0 - DOMAIN_SLACK) && eps <= hi * (1.0 + DOMAIN_SLACK) {
            Ok(eps.clamp(lo, hi))
        } else {
            Err(RateError::OutOfDomain {
                eps,
                min: lo,
                max: hi,
            })
        }
    }

    fn eval_unchecked(&self, eps: f64) -> f64 {
        match &self.form {
            RateForm::PowerLaw { scale, exponent } => scale * eps.powf(-exponent),
            RateForm::PowerLog {
                scale,
                exponent,
                log_exponent,
            } => scale * eps.powf(-exponent) * eps.ln().abs().powf(*log_exponent),
            RateForm::Table(t) => t.interpolate(eps),
        }
    }

    /// `m(ε)`.
    pub fn eval(&self, eps: f64) -> Result<f64, RateError> {
        let e = self.clamp_domain(eps)?;
        Ok(self.eval_unchecked(e))
    }

    /// `m_log(ε) = m(ε)·log(1 + m(ε)/ε)`.
    pub fn m_log(&self, eps: f64) -> Result<f64, RateError> {
        let e = self.clamp_domain(eps)?;
        Ok(self.m_log_unchecked(e))
    }

    fn m_log_unchecked(&self, e: f64) -> f64 {
        let m = self.eval_unchecked(e);
        m * (m / e).ln_1p()
    }

    /// `m⁻¹(s) = inf{ε : m(ε) ≤ s}`.
    pub fn right_inverse(&self, s: f64) -> Result<Inverse, RateError> {
        invert_nonincreasing(|e| self.eval_unchecked(e), s, self.domain_min, self.domain_max)
    }

    /// `m_log⁻¹(s)`.
    pub fn m_log_inverse(&self, s: f64) -> Result<Inverse, RateError> {
        invert_nonincreasing(|e| self.m_log_unchecked(e), s, self.domain_min, self.domain_max)
    }

    /// `m_max(ε) = max_{θ∈[ε, domain_max]} m(θ)·log(θ/ε)` at the default grid density.
    pub fn m_max(&self, eps: f64) -> Result<f64, RateError> {
        Ok(self.m_max_point(eps, MMAX_POINTS_PER_DECADE)?.value)
    }

    /// `m_max` with its maximizer, on a log θ-grid of the given density refined
    /// by golden-section search around every discrete local maximum.
    pub fn m_max_point(&self, eps: f64, points_per_decade: usize) -> Result<MaxPoint, RateError> {
        let e = self.clamp_domain(eps)?;
        Ok(self.m_max_unchecked(e, points_per_decade))
    }

    fn m_max_unchecked(&self, e: f64, ppd: usize) -> MaxPoint {
        if e >= self.domain_max {
            return MaxPoint {
                value: 0.0,
                theta: self.domain_max,
            };
        }
        let nodes = log_grid(e, self.domain_max, ppd);
        let f = |theta: f64| {
            if theta < e || theta > self.domain_max {
                f64::NEG_INFINITY
            } else {
                self.eval_unchecked(theta) * (theta / e).ln()
            }
        };
        let Extremum { arg, value } = grid_max(&nodes, &f, MMAX_XTOL);
        MaxPoint {
            value: value.max(0.0),
            theta: arg,
        }
    }

    /// `m_max⁻¹(s)` for `s ≥ 0`.
    pub fn m_max_inverse(&self, s: f64) -> Result<Inverse, RateError> {
        if s < 0.0 || s.is_nan() {
            return Err(RateError::BelowRange { s, min: 0.0 });
        }
        invert_nonincreasing(
            |e| self.m_max_unchecked(e, MMAX_POINTS_PER_DECADE).value,
            s,
            self.domain_min,
            self.domain_max,
        )
    }

    /// Positive-increase diagnostic over the lowest `decades` decades of the domain.
    pub fn positive_increase_diagnostic(
        &self,
        t: f64,
        decades: u32,
    ) -> Result<PositiveIncreaseReport, RateError> {
        check_diag_args(t, decades)?;
        let eps0 = self.domain_min * t.powi(POSINC_POWERS as i32) * 10f64.powi(decades as i32);
        if eps0 > self.domain_max * (1.0 + DOMAIN_SLACK) {
            return Err(RateError::InsufficientDomain {
                needed: self.domain_max / (t.powi(POSINC_POWERS as i32) * 10f64.powi(decades as i32)),
                available: self.domain_min,
            });
        }
        self.positive_increase_at(t, decades, eps0.min(self.domain_max))
    }

    /// Positive-increase diagnostic on the window `[eps0·10^{−decades}, eps0]`.
    pub fn positive_increase_at(
        &self,
        t: f64,
        decades: u32,
        eps0: f64,
    ) -> Result<PositiveIncreaseReport, RateError> {
        check_diag_args(t, decades)?;
        let eps0 = self.clamp_domain(eps0)?;
        let bottom = eps0 * 10f64.powi(-(decades as i32));
        let deepest = bottom / t.powi(POSINC_POWERS as i32);
        if deepest < self.domain_min * (1.0 - DOMAIN_SLACK) {
            return Err(RateError::InsufficientDomain {
                needed: deepest,
                available: self.domain_min,
            });
        }
        Ok(posinc_scan(|e| self.eval_unchecked(e.max(self.domain_min)), t, eps0, bottom))
    }
}

fn check_diag_args(t: f64, decades: u32) -> Result<(), RateError> {
    if !(t >= 2.0 && t.is_finite()) {
        return Err(RateError::InvalidParameter(format!("t must be ≥ 2 (got {t})")));
    }
    if decades < 2 {
        return Err(RateError::InvalidParameter(format!("decades must be ≥ 2 (got {decades})")));
    }
    Ok(())
}

/// Bisection for `inf{ε ∈ [lo, hi] : f(ε) ≤ s}` with `f` non-increasing.
///
/// Returns an `ε` with `f(ε) ≤ s` that is within [`INVERSION_RTOL`] of the infimum.
pub fn invert_nonincreasing<F: Fn(f64) -> f64>(
    f: F,
    s: f64,
    lo: f64,
    hi: f64,
) -> Result<Inverse, RateError> {
    let f_hi = f(hi);
    if s.is_nan() || s < f_hi {
        return Err(RateError::BelowRange { s, min: f_hi });
    }
    let f_lo = f(lo);
    if f_lo <= s {
        return Ok(Inverse {
            eps: lo,
            extrapolated: f_lo < s,
        });
    }
    // invariant: f(a) > s, f(b) ≤ s
    let (mut a, mut b) = (lo, hi);
    for _ in 0..INVERSION_MAX_ITER {
        if b / a - 1.0 <= INVERSION_RTOL {
            break;
        }
        let mid = a * (b / a).sqrt();
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) <= s {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Inverse {
        eps: b,
        extrapolated: false,
    })
}

/// Outcome of the finite-window positive-increase diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveIncreaseReport {
    pub holds: bool,
    pub c_hat: f64,
    pub alpha_hat: f64,
    pub eps0: f64,
    /// `(lowest ε, highest ε)` of the sampled dyadic grid.
    pub window: (f64, f64),
    pub t: f64,
    /// Smallest sampled ratio `m(ε/t^k)/m(ε)`.
    pub inf_ratio: f64,
    /// Local index `log(m(ε/t)/m(ε))/log t` extrapolated to `1/|log ε| → 0`;
    /// `None` when the window reaches `ε ≥ 1`.
    pub limit_index: Option<f64>,
    pub samples: usize,
}

fn posinc_scan<F: Fn(f64) -> f64>(m: F, t: f64, eps0: f64, bottom: f64) -> PositiveIncreaseReport {
    let mut eps_grid = Vec::new();
    let mut e = eps0;
    while e >= bottom * (1.0 - 1e-12) {
        eps_grid.push(e);
        e *= 0.5;
    }
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    let mut inf_ratio = f64::INFINITY;
    let mut local = Vec::new();
    for &e in &eps_grid {
        let base = m(e);
        for k in 1..=POSINC_POWERS {
            let tk = t.powi(k as i32);
            let r = m(e / tk) / base;
            inf_ratio = inf_ratio.min(r);
            rows.push(vec![1.0, tk.ln()]);
            ys.push(r.ln());
            if k == 1 {
                local.push((e, r.ln() / t.ln()));
            }
        }
    }
    let alpha_hat = least_squares(&rows, &ys).map_or(f64::NAN, |c| c[1]);
    let c_min = rows
        .iter()
        .zip(&ys)
        .map(|(row, y)| (y - alpha_hat * row[1]).exp())
        .fold(f64::INFINITY, f64::min);
    let c_hat = c_min.min(1.0);
    let limit_index = if eps0 < 1.0 {
        let rows: Vec<Vec<f64>> = local.iter().map(|(e, _)| vec![1.0, 1.0 / (-e.ln())]).collect();
        let y: Vec<f64> = local.iter().map(|(_, i)| *i).collect();
        least_squares(&rows, &y).map(|c| c[0])
    } else {
        None
    };
    let index_ok = match limit_index {
        Some(i) => i >= POSINC_INDEX_FLOOR,
        None => local.iter().all(|(_, i)| *i >= POSINC_INDEX_FLOOR),
    };
    PositiveIncreaseReport {
        holds: inf_ratio > 1.0 && alpha_hat > 0.0 && index_ok,
        c_hat,
        alpha_hat,
        eps0,
        window: (*eps_grid.last().unwrap_or(&eps0), eps0),
        t,
        inf_ratio,
        limit_index,
        samples: ys.len(),
    }
}
