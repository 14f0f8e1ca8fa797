//! Plain-text rendering of verification reports and fits.

use std::fmt::Write as _;

use crate::verify::{RateFit, VerificationReport, Verdict};

/// `x` to `digits` significant figures; scientific outside `[1e-3, 1e5)`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let mag = x.abs().log10().floor() as i32;
    if (-3..5).contains(&mag) {
        let decimals = (digits as i32 - 1 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into the next decade, e.g. 9.99996 → 10.000
        let carried = s.parse::<f64>().is_ok_and(|r| r.abs() >= 10f64.powi(mag + 1));
        if carried && decimals > 0 {
            format!("{x:.prec$}", prec = decimals - 1)
        } else {
            s
        }
    } else {
        format!("{x:.prec$e}", prec = digits.saturating_sub(1))
    }
}

/// Deterministic record for one claim.
pub fn render_report(report: &VerificationReport) -> String {
    let mut s = String::new();
    let w = &report.applicability_window;
    let _ = writeln!(s, "claim: {}", report.claim_id);
    let _ = writeln!(s, "verdict: {}", report.verdict);
    let _ = writeln!(s, "n_range: {}..{}", report.n_range.0, report.n_range.1);
    let _ = writeln!(
        s,
        "window: eps [{:.6e}, {:.6e}], n [{}, {}]",
        w.eps.0, w.eps.1, w.n.0, w.n.1
    );
    if !report.constants.is_empty() {
        s.push_str("constants:\n");
        for (k, v) in &report.constants {
            let _ = writeln!(s, "  {k} = {v:.9e}");
        }
    }
    if let Verdict::HypothesisNotSatisfied { hypothesis } = &report.verdict {
        let _ = writeln!(s, "failed hypothesis: {hypothesis}");
    }
    for part in &report.parts {
        let _ = writeln!(s, "part {}: {}", part.id, part.inequality);
        let _ = writeln!(s, "  verdict: {}", part.verdict);
        let finite = part.margins.iter().filter(|m| m.ratio.is_finite());
        let min = finite.clone().min_by(|a, b| a.ratio.total_cmp(&b.ratio));
        let max = finite.max_by(|a, b| a.ratio.total_cmp(&b.ratio));
        if let (Some(lo), Some(hi)) = (min, max) {
            let _ = writeln!(s, "  min ratio: {:.9e} at n = {}", lo.ratio, lo.n);
            let _ = writeln!(s, "  max ratio: {:.9e} at n = {}", hi.ratio, hi.n);
        }
        let extrapolated = part.margins.iter().filter(|m| m.extrapolated).count();
        if extrapolated > 0 {
            let _ = writeln!(s, "  extrapolated samples: {extrapolated}");
        }
    }
    for note in &report.notes {
        let _ = writeln!(s, "note: {note}");
    }
    s
}

pub fn render_fit(fit: &RateFit, n_range: (u64, u64)) -> String {
    format!(
        "fit: C·n^(-a)·log(n)^b over n in [{}, {}]\na = {}\nb = {}\nresidual = {}\nverdict: {}\n",
        n_range.0,
        n_range.1,
        format_sig(fit.a, 4),
        format_sig(fit.b, 4),
        format_sig(fit.residual, 4),
        if fit.accepted { "ACCEPTED" } else { "REJECTED" }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{ClaimPart, Margin, Window};
    use std::collections::BTreeMap;

    fn report(verdict: Verdict) -> VerificationReport {
        let margins = vec![
            Margin {
                n: 10,
                lhs: 1.0,
                rhs: 2.0,
                ratio: 0.5,
                extrapolated: false,
            },
            Margin {
                n: 100,
                lhs: 3.0,
                rhs: 2.0,
                ratio: 1.5,
                extrapolated: false,
            },
        ];
        VerificationReport {
            claim_id: "upper-mlog".into(),
            n_range: (10, 100),
            constants: BTreeMap::from([("c".to_string(), 0.5)]),
            applicability_window: Window {
                eps: (1e-3, 1e-1),
                n: (10, 100),
            },
            parts: vec![ClaimPart {
                id: "bound".into(),
                inequality: "x ≤ y".into(),
                margins,
                verdict: verdict.clone(),
            }],
            notes: vec![],
            verdict,
        }
    }

    #[test]
    fn pass_report_shows_extremes() {
        let text = render_report(&report(Verdict::Pass));
        assert!(text.contains("PASS") && text.contains("upper-mlog"));
        assert!(text.contains("5.000000000e-1") && text.contains("1.500000000e0"));
        assert_eq!(text, render_report(&report(Verdict::Pass)));
    }

    #[test]
    fn hypothesis_report_names_precondition() {
        let text = render_report(&report(Verdict::HypothesisNotSatisfied {
            hypothesis: "hypothesis (2.3) not satisfied".into(),
        }));
        assert!(text.contains("failed hypothesis: hypothesis (2.3) not satisfied"));
    }

    #[test]
    fn fit_report_four_figures() {
        let fit = RateFit {
            a: 1.00234,
            b: 0.987654,
            log_c: 0.0,
            residual: 0.0123456,
            accepted: true,
        };
        let text = render_fit(&fit, (1000, 100000));
        assert!(text.contains("a = 1.002") && text.contains("b = 0.9877") && text.contains("residual = 0.01235"));
    }

    #[test]
    fn significant_figures() {
        assert_eq!(format_sig(0.5, 4), "0.5000");
        assert_eq!(format_sig(-12.3456, 4), "-12.35");
        assert_eq!(format_sig(9.99996, 4), "10.00");
        assert_eq!(format_sig(1.5e-7, 4), "1.500e-7");
    }
}
