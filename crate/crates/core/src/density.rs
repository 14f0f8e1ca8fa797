//! Probability densities on `Z₊` and their generating functions
//! `φ_a(λ) = Σ aₙ λⁿ`.
//!
//! A [`Density`] stores an explicit coefficient prefix together with a bound
//! on the mass that was cut off. Built-in families also carry a closed-form
//! generator, which is used for all symbol evaluations; the prefix then only
//! serves finite sections and support queries.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::numeric::{compensated_sum, one_minus_cis};

/// Allowed deviation of `prefix mass + tail bound` from 1.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Allowed excess of `|λ|` over 1 in symbol evaluation.
pub const MODULUS_TOLERANCE: f64 = 1e-12;
/// Target tail mass for families truncated without a closed form remainder.
pub const TAIL_TARGET: f64 = 1e-12;
/// Default prefix length for `log_example`.
pub const LOG_EXAMPLE_DEFAULT_N: usize = 1 << 16;
/// Largest prefix the built-in constructors will allocate.
pub const MAX_PREFIX: usize = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("coefficient a[{index}] = {value} is negative or not finite")]
    NegativeCoefficient { index: usize, value: f64 },
    #[error("total mass {mass} (prefix + tail bound) differs from 1 by more than {MASS_TOLERANCE}")]
    Mass { mass: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("|λ| = {modulus} exceeds 1")]
    Domain { modulus: f64 },
    #[error("empty coefficient list")]
    Empty,
}

/// Closed-form generating function of one convolution factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// Finitely supported density with exactly these coefficients.
    Polynomial(Vec<f64>),
    /// `λ + (1−λ)·log(1−λ)`.
    LogExample,
    /// `(1−r)/(1−rλ)`.
    Geometric(f64),
}

/// A symbol value `λ = φ(z)` together with its accurately computed complement `1 − λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValue {
    pub value: Complex64,
    pub complement: Complex64,
    /// Bound on `|φ(z) − value|` from truncated mass.
    pub error_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    coeffs: Vec<f64>,
    tail_mass_bound: f64,
    generator: Option<Vec<Factor>>,
    label: String,
}

/// Outcome of the aperiodicity test.
#[derive(Debug, Clone, PartialEq)]
pub struct Aperiodicity {
    pub aperiodic: bool,
    /// gcd of pairwise support differences (`None` for supports of size < 2).
    pub gcd: Option<usize>,
    /// Smallest `n` with `aₙ, aₙ₊₁ > 0`, if any.
    pub consecutive_witness: Option<usize>,
    pub reason: Option<String>,
}

impl Density {
    /// Explicit coefficients with a bound on the omitted mass; no closed-form tail.
    pub fn from_prefix(coeffs: Vec<f64>, tail_mass_bound: f64) -> Result<Self, DensityError> {
        let generator = if tail_mass_bound == 0.0 {
            Some(vec![Factor::Polynomial(coeffs.clone())])
        } else {
            None
        };
        let d = Self {
            label: format!("explicit(len={})", coeffs.len()),
            coeffs,
            tail_mass_bound,
            generator,
        };
        d.validate()?;
        Ok(d)
    }

    /// Finitely supported density given by all of its coefficients.
    pub fn from_coefficients(coeffs: Vec<f64>) -> Result<Self, DensityError> {
        Self::from_prefix(coeffs, 0.0)
    }

    pub fn point_mass(k: usize) -> Result<Self, DensityError> {
        if k > MAX_PREFIX {
            return Err(DensityError::InvalidParameter(format!("point_mass index {k} too large")));
        }
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        let mut d = Self::from_coefficients(coeffs)?;
        d.label = format!("point_mass({k})");
        Ok(d)
    }

    /// `(1−p, p)`.
    pub fn lazy_bernoulli(p: f64) -> Result<Self, DensityError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DensityError::InvalidParameter(format!("lazy_bernoulli needs p ∈ [0,1], got {p}")));
        }
        let mut d = Self::from_coefficients(vec![1.0 - p, p])?;
        d.label = format!("lazy_bernoulli({p})");
        Ok(d)
    }

    /// `aₙ = 1/(n(n−1))` for `2 ≤ n ≤ N`; the omitted mass is exactly `1/N`.
    pub fn log_example(n: usize) -> Result<Self, DensityError> {
        if !(2..=MAX_PREFIX).contains(&n) {
            return Err(DensityError::InvalidParameter(format!(
                "log_example needs 2 ≤ N ≤ {MAX_PREFIX}, got {n}"
            )));
        }
        let mut coeffs = vec![0.0; n + 1];
        for (k, a) in coeffs.iter_mut().enumerate().skip(2) {
            let k = k as f64;
            *a = 1.0 / (k * (k - 1.0));
        }
        let d = Self {
            coeffs,
            tail_mass_bound: 1.0 / n as f64,
            generator: Some(vec![Factor::LogExample]),
            label: format!("log_example(N={n})"),
        };
        d.validate()?;
        Ok(d)
    }

    /// `aₙ = (1−r)rⁿ` for `n ≤ N`; the omitted mass is `r^{N+1}`.
    /// With `n = None` the prefix is extended until the tail is below [`TAIL_TARGET`].
    pub fn geometric(r: f64, n: Option<usize>) -> Result<Self, DensityError> {
        if !(r > 0.0 && r < 1.0) {
            return Err(DensityError::InvalidParameter(format!("geometric needs r ∈ (0,1), got {r}")));
        }
        let n = match n {
            Some(n) => n,
            None => {
                let k = (TAIL_TARGET.ln() / r.ln()).ceil() as usize;
                k.saturating_sub(1).max(1)
            }
        };
        if n > MAX_PREFIX {
            return Err(DensityError::InvalidParameter(format!("geometric prefix {n} too long")));
        }
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut p = 1.0 - r;
        for _ in 0..=n {
            coeffs.push(p);
            p *= r;
        }
        let d = Self {
            coeffs,
            tail_mass_bound: r.powi(n as i32 + 1),
            generator: Some(vec![Factor::Geometric(r)]),
            label: format!("geometric({r})"),
        };
        d.validate()?;
        Ok(d)
    }

    /// Named family lookup: `lazy_bernoulli`, `log_example`, `geometric`, `point_mass`.
    pub fn builtin_family(name: &str, params: &[f64]) -> Result<Self, DensityError> {
        let arg = |i: usize| params.get(i).copied();
        let as_index = |x: f64, what: &str| -> Result<usize, DensityError> {
            if x >= 0.0 && x.fract() == 0.0 && x <= MAX_PREFIX as f64 {
                Ok(x as usize)
            } else {
                Err(DensityError::InvalidParameter(format!("{what} must be a nonnegative integer, got {x}")))
            }
        };
        match name {
            "lazy_bernoulli" => Self::lazy_bernoulli(arg(0).unwrap_or(0.5)),
            "log_example" => match arg(0) {
                Some(n) => Self::log_example(as_index(n, "N")?),
                None => Self::log_example(LOG_EXAMPLE_DEFAULT_N),
            },
            "geometric" => {
                let r = arg(0).ok_or_else(|| DensityError::InvalidParameter("geometric needs r".into()))?;
                let n = arg(1).map(|n| as_index(n, "N")).transpose()?;
                Self::geometric(r, n)
            }
            "point_mass" => Self::point_mass(as_index(arg(0).unwrap_or(0.0), "k")?),
            other => Err(DensityError::InvalidParameter(format!("unknown family '{other}'"))),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    pub fn generator(&self) -> Option<&[Factor]> {
        self.generator.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Indices with a positive coefficient inside the prefix.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn prefix_mass(&self) -> f64 {
        compensated_sum(self.coeffs.iter().copied())
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if self.coeffs.is_empty() {
            return Err(DensityError::Empty);
        }
        if let Some((index, &value)) = self
            .coeffs
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a >= 0.0))
        {
            return Err(DensityError::NegativeCoefficient { index, value });
        }
        if !(self.tail_mass_bound >= 0.0 && self.tail_mass_bound.is_finite()) {
            return Err(DensityError::InvalidParameter(format!(
                "tail bound {} must be nonnegative",
                self.tail_mass_bound
            )));
        }
        let mass = self.prefix_mass() + self.tail_mass_bound;
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(DensityError::Mass { mass });
        }
        Ok(())
    }

    pub fn is_aperiodic(&self) -> Aperiodicity {
        let support = self.support();
        let consecutive_witness = support.windows(2).find(|w| w[1] == w[0] + 1).map(|w| w[0]);
        if support.len() < 2 {
            let reason = if support.is_empty() {
                "empty support"
            } else {
                "support is a single point"
            };
            return Aperiodicity {
                aperiodic: false,
                gcd: None,
                consecutive_witness,
                reason: Some(reason.into()),
            };
        }
        let g = support_gcd(&support);
        Aperiodicity {
            aperiodic: g == 1,
            gcd: Some(g),
            consecutive_witness,
            reason: (g != 1).then(|| format!("support differences have gcd {g}")),
        }
    }

    /// Whether `φ_a(T) ∩ T = {1}`: with `s₀` the smallest support index and
    /// `d` the gcd of support differences, this holds iff `d` divides `s₀`.
    pub fn circle_meets_spectrum_only_at_one(&self) -> bool {
        let support = self.support();
        match support.as_slice() {
            [] => false,
            [k] => *k == 0,
            s => s[0] % support_gcd(s) == 0,
        }
    }

    /// `φ_a(λ)` with an error radius from truncated mass.
    pub fn phi(&self, lambda: Complex64) -> Result<SymbolValue, DensityError> {
        let rho = lambda.norm();
        if rho > 1.0 + MODULUS_TOLERANCE {
            return Err(DensityError::Domain { modulus: rho });
        }
        if lambda == Complex64::new(1.0, 0.0) && self.generator.is_some() {
            return Ok(SymbolValue {
                value: Complex64::new(1.0, 0.0),
                complement: Complex64::new(0.0, 0.0),
                error_radius: 0.0,
            });
        }
        Ok(self.symbol_polar(rho.min(1.0), lambda.arg()))
    }

    /// `φ_a(ρ·e^{it})` for `0 ≤ ρ ≤ 1`, with `1 − φ_a` evaluated without cancellation.
    ///
    /// Without a closed-form generator the value is the prefix polynomial
    /// (within `error_radius` of `φ_a`) and the complement is the prefix part of
    /// `Σ aₙ(1 − zⁿ)` (within twice that).
    pub fn symbol_polar(&self, rho: f64, t: f64) -> SymbolValue {
        let z_comp = polar_complement(rho, t);
        match &self.generator {
            Some(factors) => {
                let mut comp = Complex64::new(0.0, 0.0);
                for f in factors {
                    let c = factor_complement(f, rho, t, z_comp);
                    comp = comp + c - comp * c;
                }
                SymbolValue {
                    value: Complex64::new(1.0, 0.0) - comp,
                    complement: comp,
                    error_radius: 0.0,
                }
            }
            None => {
                let z = Complex64::from_polar(rho, t);
                let value = self
                    .coeffs
                    .iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
                SymbolValue {
                    value,
                    complement: polynomial_complement(&self.coeffs, rho, t),
                    error_radius: self.tail_mass_bound,
                }
            }
        }
    }

    /// `φ_a(e^{it})` on the unit circle.
    pub fn symbol_on_circle(&self, t: f64) -> SymbolValue {
        self.symbol_polar(1.0, t)
    }

    /// Convolution `a ∗ b`; the omitted mass is `tₐ + t_b − tₐt_b`.
    pub fn convolve(&self, other: &Density) -> Result<Density, DensityError> {
        let (a, b) = (&self.coeffs, &other.coeffs);
        let mut out = vec![0.0; a.len() + b.len() - 1];
        // fixed summation order: outer index over the shorter factor
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        for (i, &x) in short.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in long.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        let (ta, tb) = (self.tail_mass_bound, other.tail_mass_bound);
        let tail = ta + tb - ta * tb;
        let generator = match (&self.generator, &other.generator) {
            (Some(x), Some(y)) => {
                let mut g = x.clone();
                g.extend(y.iter().cloned());
                Some(g)
            }
            _ => None,
        };
        let d = Density {
            coeffs: out,
            tail_mass_bound: tail,
            generator,
            label: format!("{}*{}", self.label, other.label),
        };
        d.validate()?;
        Ok(d)
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn support_gcd(support: &[usize]) -> usize {
    support.iter().skip(1).fold(0, |g, &s| gcd(g, s - support[0]))
}

/// `1 − ρe^{it}` without cancellation near `z = 1`.
fn polar_complement(rho: f64, t: f64) -> Complex64 {
    Complex64::new(1.0 - rho, 0.0) + one_minus_cis(t) * rho
}

/// `Σ aₙ(1 − ρⁿe^{int})`.
fn polynomial_complement(coeffs: &[f64], rho: f64, t: f64) -> Complex64 {
    let log_rho = rho.ln();
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, &a) in coeffs.iter().enumerate().skip(1) {
        if a == 0.0 {
            continue;
        }
        let nf = n as f64;
        let term = if rho == 1.0 {
            one_minus_cis(nf * t)
        } else {
            let rn = (nf * log_rho).exp();
            Complex64::new(-(nf * log_rho).exp_m1(), 0.0) + one_minus_cis(nf * t) * rn
        };
        acc += term * a;
    }
    acc
}

fn factor_complement(f: &Factor, rho: f64, t: f64, c: Complex64) -> Complex64 {
    match f {
        Factor::Polynomial(coeffs) => polynomial_complement(coeffs, rho, t),
        Factor::LogExample => {
            if c == Complex64::new(0.0, 0.0) {
                return c;
            }
            // 1 − [λ + (1−λ)log(1−λ)] = c·(1 − log c), principal branch
            let c_log = if c.im == 0.0 && c.re < 0.0 {
                Complex64::new(c.re, -0.0)
            } else {
                c
            };
            c * (Complex64::new(1.0, 0.0) - c_log.ln())
        }
        Factor::Geometric(r) => c * *r / (Complex64::new(1.0 - r, 0.0) + c * *r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn validate_examples() {
        assert!(Density::from_coefficients(vec![1.0, 0.0, 0.0]).is_ok());
        assert!(Density::from_coefficients(vec![0.5, 0.5]).is_ok());
        assert!(matches!(
            Density::from_coefficients(vec![0.5, 0.75]),
            Err(DensityError::Mass { .. })
        ));
        assert!(matches!(
            Density::from_coefficients(vec![1.5, -0.5]),
            Err(DensityError::NegativeCoefficient { index: 1, .. })
        ));
    }

    #[test]
    fn aperiodicity_examples() {
        let lazy = Density::lazy_bernoulli(0.5).unwrap();
        let r = lazy.is_aperiodic();
        assert!(r.aperiodic && r.consecutive_witness == Some(0));

        let even = Density::from_coefficients(vec![0.5, 0.0, 0.5]).unwrap();
        let r = even.is_aperiodic();
        assert!(!r.aperiodic && r.gcd == Some(2));
        // φ(−1) = 1: the symbol revisits 1, yet its image (1 + e^{2it})/2 meets T only there
        assert!((even.phi(c(-1.0, 0.0)).unwrap().value - c(1.0, 0.0)).norm() < 1e-15);
        assert!(even.circle_meets_spectrum_only_at_one());

        let log = Density::log_example(1000).unwrap();
        let r = log.is_aperiodic();
        assert!(r.aperiodic && r.consecutive_witness == Some(2));

        let pm = Density::point_mass(0).unwrap().is_aperiodic();
        assert!(!pm.aperiodic && pm.reason.is_some());
    }

    #[test]
    fn circle_intersection_rule() {
        assert!(Density::point_mass(0).unwrap().circle_meets_spectrum_only_at_one());
        assert!(!Density::point_mass(1).unwrap().circle_meets_spectrum_only_at_one());
        // support {2, 4}: d = 2 divides s₀ = 2, φ(e^{iπ}) = 1 only
        let d = Density::from_coefficients(vec![0.0, 0.0, 0.5, 0.0, 0.5]).unwrap();
        assert!(d.circle_meets_spectrum_only_at_one());
        let d = Density::from_coefficients(vec![0.0, 0.5, 0.0, 0.5]).unwrap();
        assert!(!d.circle_meets_spectrum_only_at_one());
    }

    #[test]
    fn phi_examples() {
        let lazy = Density::lazy_bernoulli(0.5).unwrap();
        assert_eq!(lazy.phi(c(1.0, 0.0)).unwrap().value, c(1.0, 0.0));
        assert!(lazy.phi(c(-1.0, 0.0)).unwrap().value.norm() < 1e-16);
        let log = Density::log_example(100).unwrap();
        assert_eq!(log.phi(c(1.0, 0.0)).unwrap().value, c(1.0, 0.0));
        let v = log.phi(c(-1.0, 0.0)).unwrap().value;
        assert!((v - c(-1.0 + 2.0 * 2f64.ln(), 0.0)).norm() < 1e-15);
        assert!(matches!(lazy.phi(c(1.1, 0.0)), Err(DensityError::Domain { .. })));
    }

    #[test]
    fn log_example_closed_form_matches_alternating_partial_sum() {
        // alternating series: error after N terms is below 1/N²
        let n = 100_000;
        let partial: f64 = compensated_sum(
            (2..=n).map(|k| (if k % 2 == 0 { 1.0 } else { -1.0 }) / (k as f64 * (k as f64 - 1.0))),
        );
        assert!((partial - (-1.0 + 2.0 * 2f64.ln())).abs() < 1e-8);
    }

    #[test]
    fn log_example_closed_form_agrees_with_prefix_on_circle() {
        let d = Density::log_example(10_000).unwrap();
        let explicit = Density::from_prefix(d.coefficients().to_vec(), d.tail_mass_bound()).unwrap();
        // deterministic pseudo-random angles
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        for _ in 0..1000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let t = ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 * PI - PI;
            let a = d.symbol_on_circle(t).value;
            let b = explicit.symbol_on_circle(t);
            assert!((a - b.value).norm() <= b.error_radius * (1.0 + 1e-9), "t={t}");
        }
    }

    #[test]
    fn complement_is_accurate_near_one() {
        let t = 1e-9;
        let d = Density::lazy_bernoulli(0.5).unwrap();
        let s = d.symbol_on_circle(t);
        // 1 − φ = ½(1 − e^{it}) ≈ ½(t²/2 − it)
        assert!((s.complement.re / (t * t / 4.0) - 1.0).abs() < 1e-9);
        assert!((s.complement.im / (-t / 2.0) - 1.0).abs() < 1e-12);
        let g = Density::geometric(0.5, None).unwrap();
        let s = g.symbol_on_circle(t);
        // 1 − φ = r·c/((1−r) + r·c) ≈ c for r = ½
        assert!((s.complement.im / (-t) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn builtin_families() {
        let d = Density::builtin_family("log_example", &[1e6]).unwrap();
        assert_eq!(d.tail_mass_bound(), 1e-6);
        let d = Density::builtin_family("lazy_bernoulli", &[0.5]).unwrap();
        assert_eq!(d.coefficients(), &[0.5, 0.5]);
        let d = Density::builtin_family("geometric", &[0.5, 20.0]).unwrap();
        for (n, a) in d.coefficients().iter().enumerate() {
            assert_eq!(*a, 2f64.powi(-(n as i32 + 1)));
        }
        assert_eq!(d.tail_mass_bound(), 2f64.powi(-21));
        let d = Density::geometric(0.9, None).unwrap();
        assert!(d.tail_mass_bound() < TAIL_TARGET);
        assert!(Density::builtin_family("geometric", &[1.0]).is_err());
        assert!(Density::builtin_family("lazy_bernoulli", &[1.5]).is_err());
        assert!(Density::builtin_family("nope", &[]).is_err());
    }

    #[test]
    fn convolve_examples() {
        let lazy = Density::lazy_bernoulli(0.5).unwrap();
        let id = Density::point_mass(0).unwrap();
        assert_eq!(id.convolve(&lazy).unwrap().coefficients(), lazy.coefficients());
        assert_eq!(lazy.convolve(&lazy).unwrap().coefficients(), &[0.25, 0.5, 0.25]);
        let log = Density::log_example(50).unwrap();
        let shifted = log.convolve(&Density::point_mass(1).unwrap()).unwrap();
        assert_eq!(shifted.coefficients()[0], 0.0);
        assert_eq!(&shifted.coefficients()[1..], log.coefficients());
        assert_eq!(shifted.tail_mass_bound(), log.tail_mass_bound());
        // the product generator reproduces λ·φ(λ)
        let z = Complex64::from_polar(0.7, 2.0);
        let lhs = shifted.phi(z).unwrap().value;
        let rhs = z * log.phi(z).unwrap().value;
        assert!((lhs - rhs).norm() < 1e-15);
    }

    fn density_strategy() -> impl Strategy<Value = Density> {
        prop::collection::vec(0.0f64..1.0, 1..6).prop_filter_map("nonzero", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-3).then(|| {
                let mut v: Vec<f64> = w.iter().map(|x| x / s).collect();
                let r = 1.0 - compensated_sum(v.iter().copied());
                v[0] += r;
                Density::from_coefficients(v).ok()
            })?
        })
    }

    proptest! {
        #[test]
        fn convolve_commutes_and_associates(a in density_strategy(), b in density_strategy(), c3 in density_strategy()) {
            let ab = a.convolve(&b).unwrap();
            let ba = b.convolve(&a).unwrap();
            for (x, y) in ab.coefficients().iter().zip(ba.coefficients()) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
            let l = ab.convolve(&c3).unwrap();
            let r = a.convolve(&b.convolve(&c3).unwrap()).unwrap();
            for (x, y) in l.coefficients().iter().zip(r.coefficients()) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
        }

        #[test]
        fn phi_is_contractive(a in density_strategy(), rho in 0.0f64..=1.0, t in -PI..PI) {
            let s = a.symbol_polar(rho, t);
            prop_assert!(s.value.norm() <= 1.0 + 1e-12);
            prop_assert!((s.value + s.complement - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }

        #[test]
        fn aperiodic_symbols_avoid_the_circle(t in 0.05f64..PI) {
            for d in [Density::lazy_bernoulli(0.3).unwrap(), Density::log_example(64).unwrap(), Density::geometric(0.6, None).unwrap()] {
                prop_assert!(d.symbol_on_circle(t).complement.norm() > 0.0);
                prop_assert!(d.symbol_on_circle(t).value.norm() < 1.0);
            }
        }
    }
}
