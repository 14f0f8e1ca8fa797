//! Quasi-multiplication operator models.
//!
//! For these operators `‖f(T)‖ = sup_{λ∈σ(T)} |f(λ)|`, so decay norms
//! `‖Tⁿ(I−T)‖` and resolvent norms reduce to optimization over the spectrum.
//! Spectra are held so that `1 − λ` is available without cancellation: near
//! `λ = 1` everything is computed from the complement.

mod section;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::density::{Density, DensityError};
use crate::numeric::{grid_max, grid_max_with_values, grid_min, log_grid, log_modulus_from_complement, one_minus_cis};
use crate::ratefun::{RateError, RateFunction};

pub use section::{FiniteSection, SectionNorm, SECTION_VALIDITY_DIVISOR};

/// Tolerance on `|λ| ≤ 1` and on detecting points of the unit circle.
pub const MODULUS_TOLERANCE: f64 = 1e-12;
/// Minimum grid density satisfying the spacing rule: a log grid of `p` points per
/// decade has spacing `t·(10^{1/p} − 1)`, which is `≤ t/10` iff `p ≥ 25`.
pub const MIN_POINTS_PER_DECADE: usize = 25;
/// Largest `n` for which decay grids are trusted.
pub const MAX_TRUSTED_N: u64 = 1_000_000_000;
/// Lower end of the distance search grid relative to `|θ|`.
const DISTANCE_GRID_FLOOR: f64 = 1e-6;
/// Lower end of the decay search grid is this over `n + 1`.
const DECAY_GRID_FLOOR: f64 = 1e-3;
/// Bracket tolerance for golden refinement in parameter space.
const REFINE_XTOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("spectrum touches e^(iθ) at θ = {theta}")]
    Singular { theta: f64 },
    #[error("power iteration did not converge after {iterations} squarings")]
    NonConvergence { iterations: usize },
    #[error("spectral-resolution rule violated: {0}")]
    Resolution(String),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Rate(#[from] RateError),
}

/// Grid resolution shared by all curve and symbol searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub points_per_decade: usize,
    /// Relative accuracy recorded in error budgets of grid-based values.
    pub tolerance: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            points_per_decade: 64,
            tolerance: 1e-9,
        }
    }
}

impl Resolution {
    /// Check the spacing rule: grid spacing at the transition scale `1/n` must be
    /// at most `1/(10n)` for every `n ≤ n_max`.
    pub fn check(&self, n_max: u64) -> Result<(), OperatorError> {
        if self.points_per_decade < MIN_POINTS_PER_DECADE {
            return Err(OperatorError::Resolution(format!(
                "spacing ≤ (10·n_max)⁻¹ near 1 needs at least {MIN_POINTS_PER_DECADE} points per decade, got {}",
                self.points_per_decade
            )));
        }
        if n_max > MAX_TRUSTED_N {
            return Err(OperatorError::Resolution(format!(
                "n_max = {n_max} exceeds the trusted range {MAX_TRUSTED_N}"
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1e-3) {
            return Err(OperatorError::Resolution(format!(
                "tolerance {} must lie in (0, 1e-3)",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Parametrized spectral curves `t ↦ λ(t)`, `t ∈ [−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralCurve {
    /// `λ(t) = max(0, 1 − c|t|^p)·e^{it}`.
    RadialPower { coeff: f64, power: f64 },
}

impl SpectralCurve {
    fn complement(&self, t: f64) -> Complex64 {
        match *self {
            SpectralCurve::RadialPower { coeff, power } => {
                let drop = coeff * t.abs().powf(power);
                if drop >= 1.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    // 1 − r·e^{it} = (1 − r) + r·(1 − e^{it})
                    Complex64::new(drop, 0.0) + one_minus_cis(t) * (1.0 - drop)
                }
            }
        }
    }
}

impl fmt::Display for SpectralCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralCurve::RadialPower { coeff, power } => {
                write!(f, "radial_power(c={coeff}, p={power})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Diagonal(Vec<Complex64>),
    Curve(SpectralCurve),
    Toeplitz(Density),
}

/// How a decay value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    SymbolExact,
    GridSup,
    FiniteSection,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::SymbolExact => "symbol-exact",
            Method::GridSup => "grid-sup",
            Method::FiniteSection => "finite-section",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEntry {
    pub n: u64,
    pub value: f64,
    pub method: Method,
    pub error_budget: f64,
}

/// Table `n ↦ ‖Tⁿ(I−T)‖`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecayProfile {
    pub entries: Vec<DecayEntry>,
}

impl DecayProfile {
    pub fn ns(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.n).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

/// Distance from `e^{iθ}` to the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    /// `e^{iθ}` itself is a spectral point.
    pub at_spectrum: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorModel {
    kind: ModelKind,
    power_bound: f64,
    contains_one: bool,
    resolution: Resolution,
}

impl OperatorModel {
    /// Normal operator with the given eigenvalues; `1` is appended when
    /// `contains_one` and absent.
    pub fn diagonal(points: Vec<Complex64>, contains_one: bool) -> Result<Self, OperatorError> {
        let mut points = points;
        let one = Complex64::new(1.0, 0.0);
        if contains_one && !points.contains(&one) {
            points.push(one);
        }
        if points.is_empty() {
            return Err(OperatorError::InvalidModel("empty spectrum".into()));
        }
        for p in &points {
            let r = p.norm();
            if !r.is_finite() || r > 1.0 + MODULUS_TOLERANCE {
                return Err(OperatorError::InvalidModel(format!("point {p} lies outside the closed unit disk")));
            }
            if *p != one && r >= 1.0 - MODULUS_TOLERANCE {
                return Err(OperatorError::InvalidModel(format!(
                    "point {p} lies on the unit circle away from 1"
                )));
            }
        }
        let contains_one = points.contains(&one);
        Ok(Self {
            kind: ModelKind::Diagonal(points),
            power_bound: 1.0,
            contains_one,
            resolution: Resolution::default(),
        })
    }

    /// Diagonal model with real eigenvalues.
    pub fn diagonal_real(points: &[f64], contains_one: bool) -> Result<Self, OperatorError> {
        Self::diagonal(points.iter().map(|&x| Complex64::new(x, 0.0)).collect(), contains_one)
    }

    pub fn identity() -> Self {
        Self::diagonal(vec![Complex64::new(1.0, 0.0)], true).expect("identity is valid")
    }

    /// Curve `max(0, 1 − c|t|^p)·e^{it}`; passes through 1 at `t = 0`.
    pub fn radial_curve(coeff: f64, power: f64) -> Result<Self, OperatorError> {
        if !(coeff > 0.0 && coeff.is_finite() && power > 0.0 && power.is_finite()) {
            return Err(OperatorError::InvalidModel(format!(
                "radial curve needs c > 0 and p > 0 (got c={coeff}, p={power})"
            )));
        }
        Ok(Self {
            kind: ModelKind::Curve(SpectralCurve::RadialPower { coeff, power }),
            power_bound: 1.0,
            contains_one: true,
            resolution: Resolution::default(),
        })
    }

    /// Analytic Toeplitz operator with symbol `φ_a`.
    pub fn toeplitz(density: Density) -> Result<Self, OperatorError> {
        density.validate()?;
        if !density.circle_meets_spectrum_only_at_one() {
            return Err(OperatorError::InvalidModel(format!(
                "φ_a(T) meets the unit circle away from 1 for {density}"
            )));
        }
        Ok(Self {
            kind: ModelKind::Toeplitz(density),
            power_bound: 1.0,
            contains_one: true,
            resolution: Resolution::default(),
        })
    }

    pub fn with_resolution(mut self, resolution: Resolution) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn power_bound(&self) -> f64 {
        self.power_bound
    }

    pub fn contains_one(&self) -> bool {
        self.contains_one
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ModelKind::Diagonal(p) => {
                let pts: Vec<String> = p
                    .iter()
                    .map(|z| if z.im == 0.0 { format!("{}", z.re) } else { format!("{z}") })
                    .collect();
                format!("diagonal[{}]", pts.join(", "))
            }
            ModelKind::Curve(c) => format!("curve {c}"),
            ModelKind::Toeplitz(d) => format!("toeplitz {d}"),
        }
    }

    /// Whether `σ(T)` is closed under conjugation.
    fn symmetric(&self) -> bool {
        match &self.kind {
            ModelKind::Diagonal(points) => points
                .iter()
                .all(|p| points.iter().any(|q| *q == p.conj())),
            _ => true,
        }
    }

    /// `1 − λ(t)` along a curve or symbol boundary.
    fn complement_at(&self, t: f64) -> Complex64 {
        match &self.kind {
            ModelKind::Curve(c) => c.complement(t),
            ModelKind::Toeplitz(d) => d.symbol_on_circle(t).complement,
            ModelKind::Diagonal(_) => unreachable!("diagonal spectra are finite"),
        }
    }

    fn check_theta(theta: f64) -> Result<(), OperatorError> {
        if !(theta.abs() <= PI * (1.0 + 1e-15)) {
            return Err(OperatorError::InvalidInput(format!("θ = {theta} outside [−π, π]")));
        }
        Ok(())
    }

    /// `dist(e^{iθ}, σ(T))`.
    pub fn spectrum_distance(&self, theta: f64) -> Result<Distance, OperatorError> {
        Self::check_theta(theta)?;
        let w = one_minus_cis(theta);
        let value = match &self.kind {
            ModelKind::Diagonal(points) => points
                .iter()
                .map(|p| ((Complex64::new(1.0, 0.0) - p) - w).norm())
                .fold(f64::INFINITY, f64::min),
            _ => {
                if theta == 0.0 {
                    0.0
                } else {
                    let f = |t: f64| (self.complement_at(t) - w).norm();
                    let half = log_grid(DISTANCE_GRID_FLOOR * theta.abs(), PI, self.resolution.points_per_decade);
                    let nodes: Vec<f64> = half
                        .iter()
                        .rev()
                        .map(|t| -t)
                        .chain(std::iter::once(0.0))
                        .chain(half.iter().copied())
                        .collect();
                    grid_min(&nodes, &f, REFINE_XTOL).value
                }
            }
        };
        Ok(Distance {
            value,
            at_spectrum: value == 0.0,
        })
    }

    /// `‖R(e^{iθ}, T)‖ = 1/dist(e^{iθ}, σ(T))`.
    pub fn resolvent_norm(&self, theta: f64) -> Result<f64, OperatorError> {
        let d = self.spectrum_distance(theta)?;
        if d.at_spectrum {
            return Err(OperatorError::Singular { theta });
        }
        Ok(1.0 / d.value)
    }

    fn resolvent_or_inf(&self, theta: f64) -> f64 {
        self.resolvent_norm(theta).unwrap_or(f64::INFINITY)
    }

    fn signs(&self) -> &'static [f64] {
        if self.symmetric() {
            &[1.0]
        } else {
            &[1.0, -1.0]
        }
    }

    /// `m₀(ε) = max_{ε≤|θ|≤π} ‖R(e^{iθ}, T)‖`.
    pub fn resolvent_envelope(&self, eps: f64) -> Result<f64, OperatorError> {
        if !(eps > 0.0 && eps <= PI * (1.0 + 1e-15)) {
            return Err(OperatorError::InvalidInput(format!("ε = {eps} outside (0, π]")));
        }
        let eps = eps.min(PI);
        let nodes = log_grid(eps, PI, self.resolution.points_per_decade);
        let mut best = f64::NEG_INFINITY;
        for &s in self.signs() {
            let f = |th: f64| self.resolvent_or_inf(s * th);
            let values: Vec<f64> = nodes.par_iter().map(|&th| f(th)).collect();
            best = best.max(grid_max_with_values(&nodes, &values, &f, REFINE_XTOL).value);
        }
        if !best.is_finite() {
            return Err(OperatorError::Singular { theta: eps });
        }
        Ok(best)
    }

    /// Envelope sampled on the log grid from `eps_min` to `π`, as a rate function.
    ///
    /// Values are suffix maxima over grid nodes and refined local maxima, so the
    /// table is non-increasing. With `1 ∈ σ(T)` the result is flagged as a
    /// resolvent majorant.
    pub fn envelope_rate_function(&self, eps_min: f64) -> Result<RateFunction, OperatorError> {
        if !(eps_min > 0.0 && eps_min < PI) {
            return Err(OperatorError::InvalidInput(format!("ε_min = {eps_min} outside (0, π)")));
        }
        let nodes = log_grid(eps_min, PI, self.resolution.points_per_decade);
        let mut env = vec![f64::NEG_INFINITY; nodes.len()];
        let mut peaks: Vec<(f64, f64)> = Vec::new();
        for &s in self.signs() {
            let values: Vec<f64> = nodes.par_iter().map(|&th| self.resolvent_or_inf(s * th)).collect();
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(OperatorError::Singular { theta: s * nodes[i] });
            }
            for (e, v) in env.iter_mut().zip(&values) {
                *e = e.max(*v);
            }
            let f = |th: f64| self.resolvent_or_inf(s * th);
            for i in 1..nodes.len() - 1 {
                let (l, v, r) = (values[i - 1], values[i], values[i + 1]);
                if v >= l && v >= r && (v > l || v > r) {
                    let p = grid_max(&[nodes[i - 1], nodes[i], nodes[i + 1]], &f, REFINE_XTOL);
                    peaks.push((p.arg, p.value));
                }
            }
        }
        for (arg, value) in peaks {
            // the peak counts for every window [ε, π] containing it
            let k = nodes.partition_point(|&e| e <= arg);
            for e in env.iter_mut().take(k) {
                *e = e.max(value);
            }
        }
        for i in (0..env.len() - 1).rev() {
            env[i] = env[i].max(env[i + 1]);
        }
        let m = RateFunction::from_table(nodes, env)?;
        Ok(if self.contains_one {
            m.as_resolvent_majorant()?
        } else {
            m
        })
    }

    /// `‖Tⁿ(I−T)‖ = sup_{λ∈σ(T)} |λ|ⁿ·|1−λ|`.
    pub fn decay_norm(&self, n: u64) -> DecayEntry {
        let p = |c: Complex64| decay_objective(c, n);
        match &self.kind {
            ModelKind::Diagonal(points) => {
                let value = points
                    .iter()
                    .map(|z| p(Complex64::new(1.0, 0.0) - z))
                    .fold(0.0, f64::max);
                DecayEntry {
                    n,
                    value,
                    method: Method::SymbolExact,
                    error_budget: 0.0,
                }
            }
            _ => {
                // conjugation symmetry: t ∈ [0, π] suffices
                let f = |t: f64| p(self.complement_at(t));
                let lo = DECAY_GRID_FLOOR / (n as f64 + 1.0);
                let nodes: Vec<f64> = std::iter::once(0.0)
                    .chain(log_grid(lo, PI, self.resolution.points_per_decade))
                    .collect();
                let value = grid_max(&nodes, &f, REFINE_XTOL).value.max(0.0);
                let (method, truncation) = match &self.kind {
                    ModelKind::Toeplitz(d) if d.generator().is_none() => {
                        (Method::SymbolExact, (n as f64 + 2.0) * d.tail_mass_bound())
                    }
                    ModelKind::Toeplitz(_) => (Method::SymbolExact, 0.0),
                    _ => (Method::GridSup, 0.0),
                };
                DecayEntry {
                    n,
                    value,
                    method,
                    error_budget: truncation + self.resolution.tolerance * value,
                }
            }
        }
    }

    /// Decay norms for an ascending list of `n`, computed in parallel.
    ///
    /// Values are made non-increasing by taking suffix maxima: each value is a
    /// lower estimate of a non-increasing quantity, so a later larger value is
    /// also a valid lower estimate for earlier `n`.
    pub fn decay_profile(&self, ns: &[u64]) -> Result<DecayProfile, OperatorError> {
        if !ns.windows(2).all(|w| w[0] <= w[1]) {
            return Err(OperatorError::InvalidInput("n list must be sorted ascending".into()));
        }
        let mut entries: Vec<DecayEntry> = ns.par_iter().map(|&n| self.decay_norm(n)).collect();
        if self.power_bound <= 1.0 {
            for i in (0..entries.len().saturating_sub(1)).rev() {
                if entries[i + 1].value > entries[i].value {
                    entries[i].value = entries[i + 1].value;
                }
            }
        }
        Ok(DecayProfile { entries })
    }

    /// `N×N` finite section of a Toeplitz model.
    pub fn finite_section(&self, dimension: usize) -> Result<FiniteSection, OperatorError> {
        match &self.kind {
            ModelKind::Toeplitz(d) => FiniteSection::new(d, dimension),
            _ => Err(OperatorError::InvalidModel("finite sections need a Toeplitz model".into())),
        }
    }
}

/// `|λ|ⁿ·|1−λ|` from the complement `c = 1 − λ`.
fn decay_objective(c: Complex64, n: u64) -> f64 {
    let mag = c.norm();
    if n == 0 {
        return mag;
    }
    let lm = log_modulus_from_complement(c);
    if lm == f64::NEG_INFINITY {
        return 0.0;
    }
    (n as f64 * lm).exp() * mag
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rtol: f64) -> bool {
        (a - b).abs() <= rtol * b.abs()
    }

    fn sample_curve() -> OperatorModel {
        OperatorModel::radial_curve(1.0, 2.0).unwrap()
    }

    /// Brute-force oracle: uniform dense scan of the boundary parameter.
    fn dense_min_distance(model: &OperatorModel, theta: f64, n: usize) -> f64 {
        let w = one_minus_cis(theta);
        (0..=n)
            .map(|k| -PI + 2.0 * PI * k as f64 / n as f64)
            .map(|t| (model.complement_at(t) - w).norm())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn distance_examples() {
        let id = OperatorModel::identity();
        for &th in &[0.3, -1.2, PI] {
            assert!(close(id.spectrum_distance(th).unwrap().value, 2.0 * (th.abs() / 2.0).sin(), 1e-15));
        }
        let lazy = OperatorModel::toeplitz(Density::lazy_bernoulli(0.5).unwrap()).unwrap();
        let d = lazy.spectrum_distance(PI).unwrap().value;
        assert!(close(d, 1.0, 1e-12));
        assert!(close(dense_min_distance(&lazy, PI, 100_000), 1.0, 1e-9));
        let two = OperatorModel::diagonal_real(&[1.0, 0.5], true).unwrap();
        assert_eq!(two.spectrum_distance(PI).unwrap().value, 1.5);
        let z = id.spectrum_distance(0.0).unwrap();
        assert!(z.at_spectrum && z.value == 0.0);
    }

    #[test]
    fn distance_matches_dense_oracle_on_curves() {
        let curve = sample_curve();
        let log = OperatorModel::toeplitz(Density::log_example(1000).unwrap()).unwrap();
        for model in [&curve, &log] {
            for &th in &[0.05, 0.4, 2.0, -1.0] {
                let fast = model.spectrum_distance(th).unwrap().value;
                let slow = dense_min_distance(model, th, 2_000_000);
                assert!(fast <= slow * (1.0 + 1e-12), "{th}: {fast} vs {slow}");
                assert!(close(fast, slow, 1e-5), "{th}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn resolvent_examples() {
        let id = OperatorModel::identity();
        assert_eq!(id.resolvent_norm(PI).unwrap(), 0.5);
        assert!(matches!(id.resolvent_norm(0.0), Err(OperatorError::Singular { .. })));
        let lazy = OperatorModel::toeplitz(Density::lazy_bernoulli(0.5).unwrap()).unwrap();
        assert!(close(lazy.resolvent_norm(PI).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn envelope_examples() {
        let id = OperatorModel::identity();
        for &e in &[1e-3, 0.5, 2.0] {
            assert!(close(id.resolvent_envelope(e).unwrap(), 1.0 / (2.0 * (e / 2.0).sin()), 1e-14));
        }
        let log = OperatorModel::toeplitz(Density::log_example(1 << 16).unwrap()).unwrap();
        let e = 1e-4;
        assert!(close(log.resolvent_envelope(e).unwrap(), log.resolvent_norm(e).unwrap(), 1e-6));
    }

    #[test]
    fn curve_envelope_grows_like_inverse_square() {
        let curve = sample_curve();
        let eps: Vec<f64> = log_grid(1e-4, 1e-2, 8);
        let logs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let vals: Vec<f64> = eps.iter().map(|&e| curve.resolvent_envelope(e).unwrap().ln()).collect();
        let slope = crate::numeric::trend_slope(&logs, &vals).unwrap();
        assert!((slope + 2.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn envelope_table_is_monotone_majorant() {
        let curve = sample_curve();
        let m = curve.envelope_rate_function(1e-5).unwrap();
        assert!(m.is_resolvent_majorant());
        let (eps, vals) = match m.form() {
            crate::ratefun::RateForm::Table(t) => (t.eps().to_vec(), t.values().to_vec()),
            _ => unreachable!(),
        };
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        for k in (0..eps.len()).step_by(37) {
            let direct = curve.resolvent_envelope(eps[k]).unwrap();
            assert!(close(vals[k], direct, 1e-9), "{}", eps[k]);
        }
        // between nodes the table is a log-log interpolant
        for &e in &[3e-4, 0.01, 0.7, 3.0] {
            assert!(close(m.eval(e).unwrap(), curve.resolvent_envelope(e).unwrap(), 1e-3), "{e}");
        }
    }

    #[test]
    fn decay_examples() {
        let two = OperatorModel::diagonal_real(&[1.0, 0.9], true).unwrap();
        assert!(close(two.decay_norm(10).value, 0.9f64.powi(10) * 0.1, 1e-14));
        let lazy = OperatorModel::toeplitz(Density::lazy_bernoulli(0.5).unwrap()).unwrap();
        assert!(close(lazy.decay_norm(1).value, 0.5, 1e-12));
        assert!(close(lazy.decay_norm(4).value, 16.0 / 5f64.powf(2.5), 1e-12));
        let zero_one = OperatorModel::diagonal_real(&[0.0, 1.0], true).unwrap();
        assert_eq!(zero_one.decay_norm(3).value, 0.0);
        assert_eq!(zero_one.decay_norm(0).value, 1.0);
    }

    #[test]
    fn lazy_closed_form_across_n() {
        let lazy = OperatorModel::toeplitz(Density::lazy_bernoulli(0.5).unwrap()).unwrap();
        for n in [2u64, 7, 30, 1000, 10_000] {
            let nf = n as f64;
            // nⁿᐟ²/(n+1)^{(n+1)/2}
            let exact = (0.5 * nf * nf.ln() - 0.5 * (nf + 1.0) * (nf + 1.0).ln()).exp();
            assert!(close(lazy.decay_norm(n).value, exact, 1e-10), "{n}");
        }
    }

    #[test]
    fn profile_examples() {
        let two = OperatorModel::diagonal_real(&[1.0, 0.9], true).unwrap();
        let p = two.decay_profile(&[1, 2, 3]).unwrap();
        let v = p.values();
        assert!(close(v[0], 0.09, 1e-15) && close(v[1], 0.081, 1e-15) && close(v[2], 0.0729, 1e-14));
        let log = OperatorModel::toeplitz(Density::log_example(1 << 16).unwrap()).unwrap();
        let p = log.decay_profile(&[1000, 10_000]).unwrap().values();
        let target = 10.0 * (1e3f64.ln() / 1e4f64.ln());
        let ratio = p[0] / p[1];
        assert!(ratio >= 0.9 * target && ratio <= 1.1 * target, "{ratio} vs {target}");
        assert!(two.decay_profile(&[3, 1]).is_err());
    }

    #[test]
    fn maximum_modulus_consistency() {
        let dens = Density::log_example(4096).unwrap();
        let log = OperatorModel::toeplitz(dens.clone()).unwrap();
        for n in [3u64, 40] {
            let boundary = log.decay_norm(n).value;
            let mut filled: f64 = 0.0;
            for i in 0..=200 {
                let rho = i as f64 / 200.0;
                for k in 0..=2000 {
                    let t = PI * k as f64 / 2000.0;
                    filled = filled.max(decay_objective(dens.symbol_polar(rho, t).complement, n));
                }
            }
            assert!(filled <= boundary * (1.0 + 1e-12));
            assert!(close(filled, boundary, 1e-3), "{n}: {filled} vs {boundary}");
        }
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(OperatorModel::diagonal_real(&[1.1], false).is_err());
        assert!(OperatorModel::diagonal_real(&[-1.0], true).is_err());
        assert!(OperatorModel::radial_curve(0.0, 2.0).is_err());
        assert!(OperatorModel::toeplitz(Density::point_mass(1).unwrap()).is_err());
        assert!(OperatorModel::toeplitz(Density::point_mass(0).unwrap()).is_ok());
    }

    #[test]
    fn resolution_rule() {
        let r = Resolution::default();
        assert!(r.check(100_000).is_ok());
        let coarse = Resolution {
            points_per_decade: 16,
            ..r
        };
        let err = coarse.check(1000).unwrap_err().to_string();
        assert!(err.contains("spectral-resolution"), "{err}");
        assert!(r.check(MAX_TRUSTED_N + 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn decay_is_nonincreasing(n in 0u64..5000, which in 0usize..3) {
            let model = match which {
                0 => sample_curve(),
                1 => OperatorModel::toeplitz(Density::lazy_bernoulli(0.3).unwrap()).unwrap(),
                _ => OperatorModel::toeplitz(Density::log_example(1024).unwrap()).unwrap(),
            };
            let a = model.decay_norm(n).value;
            let b = model.decay_norm(n + 1).value;
            prop_assert!(b <= a * (1.0 + 1e-9), "{} {}", a, b);
        }

        #[test]
        fn resolvent_dominates_inverse_angle(theta in 1e-6f64..PI, which in 0usize..3) {
            let model = match which {
                0 => sample_curve(),
                1 => OperatorModel::toeplitz(Density::geometric(0.5, None).unwrap()).unwrap(),
                _ => OperatorModel::toeplitz(Density::log_example(1024).unwrap()).unwrap(),
            };
            let r = model.resolvent_norm(theta).unwrap();
            let chord = 1.0 / one_minus_cis(theta).norm();
            prop_assert!(r >= chord * (1.0 - 1e-12));
            prop_assert!(chord >= 1.0 / theta);
        }

        #[test]
        fn envelope_is_monotone(e1 in 1e-5f64..3.0, e2 in 1e-5f64..3.0) {
            let model = sample_curve();
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let a = model.resolvent_envelope(lo).unwrap();
            let b = model.resolvent_envelope(hi).unwrap();
            prop_assert!(a >= b * (1.0 - 1e-12));
            prop_assert!(a >= model.resolvent_norm(hi).unwrap() * (1.0 - 1e-12));
        }

        #[test]
        fn refinement_never_lowers_sups(n in 1u64..2000, theta in 1e-4f64..1.0) {
            let model = OperatorModel::toeplitz(Density::log_example(1024).unwrap()).unwrap();
            let coarse = model.clone().with_resolution(Resolution { points_per_decade: 32, ..Resolution::default() });
            let fine = model.with_resolution(Resolution { points_per_decade: 64, ..Resolution::default() });
            prop_assert!(fine.decay_norm(n).value >= coarse.decay_norm(n).value * (1.0 - 1e-12));
            prop_assert!(fine.resolvent_envelope(theta).unwrap() >= coarse.resolvent_envelope(theta).unwrap() * (1.0 - 1e-12));
        }
    }
}
