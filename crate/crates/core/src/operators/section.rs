//! Finite sections of convolution operators and their spectral norms.

use ndarray::{Array1, Array2};

use super::OperatorError;
use crate::density::Density;

/// Decay norms of a section of dimension `N` are trusted for `n ≤ N / 8`.
pub const SECTION_VALIDITY_DIVISOR: usize = 8;
/// Relative stopping tolerance of the norm iteration.
const NORM_RTOL: f64 = 1e-10;
/// Cap on Gram-matrix squarings.
const MAX_SQUARINGS: usize = 40;

/// `N×N` lower-triangular Toeplitz matrix with entries `a_{i−j}`, stored by its first column.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSection {
    column: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionNorm {
    pub value: f64,
    pub squarings: usize,
    /// `n ≤ N/8`; outside this window truncation bias is not controlled.
    pub within_validity_window: bool,
}

impl FiniteSection {
    pub fn new(density: &Density, dimension: usize) -> Result<Self, OperatorError> {
        if dimension == 0 {
            return Err(OperatorError::InvalidInput("section dimension must be ≥ 1".into()));
        }
        let mut column = vec![0.0; dimension];
        for (c, a) in column.iter_mut().zip(density.coefficients()) {
            *c = *a;
        }
        Ok(Self { column })
    }

    pub fn dimension(&self) -> usize {
        self.column.len()
    }

    pub fn column(&self) -> &[f64] {
        &self.column
    }

    pub fn matrix(&self) -> Array2<f64> {
        toeplitz_lower(&self.column)
    }

    /// Whitespace-separated rows, one line per row.
    pub fn to_text(&self) -> String {
        let n = self.dimension();
        let mut out = String::new();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| format!("{:.16e}", if i >= j { self.column[i - j] } else { 0.0 }))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// First column of `Sⁿ(I − S)`, itself lower-triangular Toeplitz.
    pub fn decay_column(&self, n: u64) -> Vec<f64> {
        let dim = self.dimension();
        let mut result = vec![0.0; dim];
        result[0] = 1.0;
        for (r, a) in result.iter_mut().zip(&self.column) {
            *r -= a;
        }
        let mut base = self.column.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = truncated_product(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = truncated_product(&base, &base);
            }
        }
        result
    }

    /// Spectral norm of `Sⁿ(I − S)`.
    ///
    /// Power iteration on the Gram matrix `G = AᵀA`, accelerated by repeated
    /// squaring: after `k` squarings a column of `G^{2^k}` is the `2^k`-th
    /// power iterate. Stops when `‖Ax‖/‖x‖` changes by less than `1e-10`.
    pub fn decay_norm(&self, n: u64) -> Result<SectionNorm, OperatorError> {
        let within_validity_window = n as usize <= self.dimension() / SECTION_VALIDITY_DIVISOR;
        let col = self.decay_column(n);
        if col.iter().all(|&x| x == 0.0) {
            return Ok(SectionNorm {
                value: 0.0,
                squarings: 0,
                within_validity_window,
            });
        }
        let a = toeplitz_lower(&col);
        let mut g = a.t().dot(&a);
        let rayleigh = |g: &Array2<f64>| -> f64 {
            // column with the largest diagonal entry as the iterate
            let j = (0..g.ncols())
                .max_by(|&p, &q| g[[p, p]].total_cmp(&g[[q, q]]))
                .unwrap_or(0);
            let x: Array1<f64> = g.column(j).to_owned();
            let nx = x.dot(&x).sqrt();
            if nx == 0.0 {
                return 0.0;
            }
            let ax = a.dot(&x);
            ax.dot(&ax).sqrt() / nx
        };
        let mut prev = rayleigh(&g);
        for k in 1..=MAX_SQUARINGS {
            g = g.dot(&g);
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale == 0.0 || !scale.is_finite() {
                return Err(OperatorError::NonConvergence { iterations: k });
            }
            g.mapv_inplace(|v| v / scale);
            let cur = rayleigh(&g);
            if (cur - prev).abs() <= NORM_RTOL * cur {
                return Ok(SectionNorm {
                    value: cur.max(prev),
                    squarings: k,
                    within_validity_window,
                });
            }
            prev = cur;
        }
        Err(OperatorError::NonConvergence {
            iterations: MAX_SQUARINGS,
        })
    }
}

fn toeplitz_lower(col: &[f64]) -> Array2<f64> {
    let n = col.len();
    Array2::from_shape_fn((n, n), |(i, j)| if i >= j { col[i - j] } else { 0.0 })
}

/// Product of power series truncated to the length of `a`.
fn truncated_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().take(n - i).enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_examples() {
        let id = FiniteSection::new(&Density::point_mass(0).unwrap(), 3).unwrap();
        assert_eq!(id.matrix(), Array2::eye(3));
        let lazy = FiniteSection::new(&Density::lazy_bernoulli(0.5).unwrap(), 2).unwrap();
        assert_eq!(lazy.matrix(), ndarray::arr2(&[[0.5, 0.0], [0.5, 0.5]]));
        let log = FiniteSection::new(&Density::log_example(100).unwrap(), 4).unwrap();
        assert_eq!(log.column(), &[0.0, 0.0, 0.5, 1.0 / 6.0]);
    }

    #[test]
    fn text_export_round_trips() {
        let s = FiniteSection::new(&Density::lazy_bernoulli(0.25).unwrap(), 3).unwrap();
        let parsed: Vec<Vec<f64>> = s
            .to_text()
            .lines()
            .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(parsed[1], vec![0.25, 0.75, 0.0]);
        assert_eq!(parsed[2], vec![0.0, 0.25, 0.75]);
    }

    #[test]
    fn identity_decay_vanishes() {
        let id = FiniteSection::new(&Density::point_mass(0).unwrap(), 16).unwrap();
        for n in [1, 5] {
            assert_eq!(id.decay_norm(n).unwrap().value, 0.0);
        }
    }

    #[test]
    fn decay_column_matches_matrix_powers() {
        let s = FiniteSection::new(&Density::log_example(100).unwrap(), 12).unwrap();
        let m = s.matrix();
        let mut p = Array2::eye(12) - &m;
        for _ in 0..5 {
            p = m.dot(&p);
        }
        let col = s.decay_column(5);
        for i in 0..12 {
            assert!((p[[i, 0]] - col[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn lazy_section_norms() {
        let s = FiniteSection::new(&Density::lazy_bernoulli(0.5).unwrap(), 512).unwrap();
        let n1 = s.decay_norm(1).unwrap();
        assert!((n1.value - 0.5).abs() < 0.01 && n1.within_validity_window);
        let n4 = s.decay_norm(4).unwrap().value;
        assert!((n4 / 0.286217 - 1.0).abs() < 0.02);
        assert!(!s.decay_norm(100).unwrap().within_validity_window);
    }

    #[test]
    fn small_section_matches_closed_form() {
        // I − S for lazy_bernoulli(0.3) in dimension 2 is [[a, 0], [b, a]] with a = 0.3, b = −0.3;
        // its top singular value is √((t + √(t² − 4a⁴))/2), t = 2a² + b²
        let s = FiniteSection::new(&Density::lazy_bernoulli(0.3).unwrap(), 2).unwrap();
        let col = s.decay_column(0);
        let (a, b) = (col[0], col[1]);
        assert!((a - 0.3).abs() < 1e-16 && (b + 0.3).abs() < 1e-16);
        let t = 2.0 * a * a + b * b;
        let top = ((t + (t * t - 4.0 * a.powi(4)).sqrt()) / 2.0).sqrt();
        assert!((s.decay_norm(0).unwrap().value - top).abs() < 1e-12);
    }

    #[test]
    fn section_norms_grow_with_dimension() {
        let d = Density::log_example(4096).unwrap();
        for n in [2u64, 9] {
            let mut prev = 0.0;
            for dim in [16, 32, 64, 128] {
                let v = FiniteSection::new(&d, dim).unwrap().decay_norm(n).unwrap().value;
                assert!(v >= prev * (1.0 - 1e-9), "{n} {dim}");
                prev = v;
            }
        }
    }
}
