//! Small numerical kernels shared by the rate-function and operator code.

use num_complex::Complex64;

/// Golden ratio conjugate, (√5 − 1)/2.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Iteration cap for golden-section searches.
const GOLDEN_MAX_ITER: usize = 200;

/// `1 − e^{it}` without cancellation for small `t`.
#[inline]
pub fn one_minus_cis(t: f64) -> Complex64 {
    let s = (0.5 * t).sin();
    Complex64::new(2.0 * s * s, -t.sin())
}

/// `log |λ|` for `λ = 1 − c`, accurate both for small `c` and for small `|λ|`.
#[inline]
pub fn log_modulus_from_complement(c: Complex64) -> f64 {
    let x = -2.0 * c.re + c.norm_sqr();
    if x < -0.5 {
        Complex64::new(1.0 - c.re, -c.im).norm().ln()
    } else {
        0.5 * x.ln_1p()
    }
}

/// Geometric grid from `lo` to `hi` with `per_decade` points per decade.
///
/// Nodes are anchored at `lo` (`lo·10^{k/per_decade}`), so doubling the
/// density yields a superset of the previous nodes. The final node is `hi`.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && per_decade > 0);
    if hi == lo {
        return vec![lo];
    }
    let steps = ((hi / lo).log10() * per_decade as f64).ceil() as usize;
    let mut nodes = Vec::with_capacity(steps + 1);
    for k in 0..steps {
        let x = lo * 10f64.powf(k as f64 / per_decade as f64);
        if x >= hi {
            break;
        }
        nodes.push(x);
    }
    nodes.push(hi);
    nodes
}

/// Location and value of an extremum found on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
}

impl Extremum {
    /// Keep the larger value; ties go to the smaller `|arg|`, then to the positive side.
    fn better_max(self, other: Extremum) -> Extremum {
        if other.value > self.value
            || (other.value == self.value && prefer_arg(other.arg, self.arg))
        {
            other
        } else {
            self
        }
    }
}

fn prefer_arg(candidate: f64, incumbent: f64) -> bool {
    let (a, b) = (candidate.abs(), incumbent.abs());
    a < b || (a == b && candidate > incumbent)
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
///
/// Stops when the bracket is narrower than `xtol` relative to the midpoint
/// magnitude (absolute `xtol·1e-300` floor). Returns the best point evaluated.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, xtol: f64) -> Extremum {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = Extremum { arg: c, value: fc }.better_max(Extremum { arg: d, value: fd });
    for _ in 0..GOLDEN_MAX_ITER {
        let scale = (0.5 * (a + b)).abs().max(1e-300);
        if (b - a) <= xtol * scale {
            break;
        }
        // NaN-safe: treat NaN as -inf.
        if nan_low(fc) >= nan_low(fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            best = best.better_max(Extremum { arg: c, value: fc });
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            best = best.better_max(Extremum { arg: d, value: fd });
        }
    }
    best
}

#[inline]
fn nan_low(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

/// Maximize `f` over sorted `nodes`, refining every non-flat discrete local
/// maximum with a golden-section search on its neighbouring bracket.
pub fn grid_max<F: Fn(f64) -> f64>(nodes: &[f64], f: &F, xtol: f64) -> Extremum {
    let values: Vec<f64> = nodes.iter().map(|&x| nan_low(f(x))).collect();
    grid_max_with_values(nodes, &values, f, xtol)
}

/// As [`grid_max`], with node values already computed.
pub fn grid_max_with_values<F: Fn(f64) -> f64>(
    nodes: &[f64],
    values: &[f64],
    f: &F,
    xtol: f64,
) -> Extremum {
    assert_eq!(nodes.len(), values.len());
    assert!(!nodes.is_empty());
    let mut best = Extremum {
        arg: nodes[0],
        value: values[0],
    };
    for (&x, &v) in nodes.iter().zip(values) {
        best = best.better_max(Extremum { arg: x, value: v });
    }
    let n = nodes.len();
    for i in 1..n.saturating_sub(1) {
        let (l, v, r) = (values[i - 1], values[i], values[i + 1]);
        if v >= l && v >= r && (v > l || v > r) {
            let refined = golden_max(f, nodes[i - 1], nodes[i + 1], xtol);
            best = best.better_max(refined);
        }
    }
    best
}

/// Minimize `f` over sorted `nodes` with the same refinement policy.
pub fn grid_min<F: Fn(f64) -> f64>(nodes: &[f64], f: &F, xtol: f64) -> Extremum {
    let neg = |x: f64| -f(x);
    let e = grid_max(nodes, &neg, xtol);
    Extremum {
        arg: e.arg,
        value: -e.value,
    }
}

/// Neumaier-compensated sum in the given order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Ordinary least squares for a small dense design (columns ≤ ~4).
///
/// Solves the normal equations by Gaussian elimination with partial pivoting.
/// Returns `None` when the design is rank deficient.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let k = rows.first()?.len();
    let mut ata = vec![vec![0.0; k + 1]; k];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                ata[i][j] += row[i] * row[j];
            }
            ata[i][k] += row[i] * yi;
        }
    }
    let scale = ata
        .iter()
        .enumerate()
        .map(|(i, r)| r[i].abs())
        .fold(0.0, f64::max);
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))?;
        if ata[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        ata.swap(col, piv);
        for r in 0..k {
            if r != col {
                let factor = ata[r][col] / ata[col][col];
                for c in col..=k {
                    ata[r][c] -= factor * ata[col][c];
                }
            }
        }
    }
    Some((0..k).map(|i| ata[i][k] / ata[i][i]).collect())
}

/// Slope of the least-squares line through `(x, y)`.
pub fn trend_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let rows: Vec<Vec<f64>> = x.iter().map(|&xi| vec![1.0, xi]).collect();
    least_squares(&rows, y).map(|c| c[1])
}

/// Integer grid on `[lo, hi]` with about `per_decade` log-spaced points per
/// decade; always contains both endpoints, strictly increasing.
pub fn integer_log_grid(lo: u64, hi: u64, per_decade: usize) -> Vec<u64> {
    assert!(lo <= hi);
    let start = lo.max(1);
    let mut out: Vec<u64> = Vec::new();
    if lo == 0 {
        out.push(0);
    }
    for x in log_grid(start as f64, hi.max(start) as f64, per_decade) {
        let n = (x.round() as u64).clamp(start, hi.max(start));
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    if out.last() != Some(&hi) && hi >= start {
        out.push(hi);
    }
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_minus_cis_matches_naive_for_moderate_t() {
        for &t in &[0.3, 1.0, -2.0, 3.1] {
            let naive = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, t);
            assert!((one_minus_cis(t) - naive).norm() < 1e-15);
        }
        // relative accuracy at tiny t, where 1 − cos t cancels
        let t = 1e-9;
        let c = one_minus_cis(t);
        assert!((c.re / (t * t / 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_modulus_in_both_regimes() {
        let tiny = Complex64::new(1e-12, 3e-13);
        let exact = -1e-12 + 0.5 * (1e-24 + 9e-26) - 0.5 * 1e-24;
        assert!((log_modulus_from_complement(tiny) / exact - 1.0).abs() < 1e-9);
        for lam in [-0.0752, 0.01, 0.25] {
            let c = Complex64::new(1.0 - lam, 0.0);
            assert!((log_modulus_from_complement(c) / f64::abs(lam).ln() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn log_grid_is_nested_under_doubling() {
        let coarse = log_grid(1e-4, 3.0, 8);
        let fine = log_grid(1e-4, 3.0, 16);
        for x in &coarse[..coarse.len() - 1] {
            assert!(fine.iter().any(|y| ((y - x) / x).abs() < 1e-14), "{x}");
        }
        assert_eq!(*fine.last().unwrap(), 3.0);
        assert!(fine.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let f = |x: f64| -(x - 0.3).powi(2);
        let e = golden_max(&f, 0.0, 1.0, 1e-12);
        assert!((e.arg - 0.3).abs() < 1e-9);
        assert!(e.value.abs() < 1e-17);
    }

    #[test]
    fn grid_max_refines_every_local_peak() {
        // two bumps, the narrower one higher and between nodes
        let f = |x: f64| (-(x - 1.0).powi(2) * 50.0).exp() + 1.2 * (-(x - 2.03).powi(2) * 400.0).exp();
        let nodes: Vec<f64> = (0..31).map(|k| k as f64 * 0.1).collect();
        let e = grid_max(&nodes, &f, 1e-12);
        assert!((e.arg - 2.03).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn ties_prefer_smaller_magnitude() {
        let f = |x: f64| -(x * x - 1.0).powi(2);
        let nodes: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.1).collect();
        let e = grid_max(&nodes, &f, 1e-12);
        assert!((e.arg - 1.0).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let v: Vec<f64> = std::iter::once(1.0).chain(std::iter::repeat(1e-16).take(10_000)).collect();
        assert!((compensated_sum(v.iter().copied()) - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn least_squares_recovers_plane() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![1.0, i as f64, (i as f64).sqrt()])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 - 0.5 * r[1] + 3.0 * r[2]).collect();
        let c = least_squares(&rows, &y).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-10 && (c[1] + 0.5).abs() < 1e-10 && (c[2] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn integer_grid_has_endpoints() {
        let g = integer_log_grid(100, 10_000, 8);
        assert_eq!(g.first(), Some(&100));
        assert_eq!(g.last(), Some(&10_000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(integer_log_grid(1, 3, 64), vec![1, 2, 3]);
    }
}
