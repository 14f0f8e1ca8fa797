//! Batch drivers: one job in, CSV/plot-data/report artifacts out.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::operators::{DecayEntry, DecayProfile, FiniteSection, Method, ModelKind, OperatorModel};
use crate::ratefun::{RateFunction, INVERSION_RTOL};
use crate::verify::{self, FitModel, NRange, VerificationReport, Verdict};

use super::render::{render_fit, render_report};
use super::spec::{Claim, FitSpec, JobSpec, NSpec, RateSpec, SectionMethod, Task};
use super::{CliError, EXIT_ERROR, EXIT_HYPOTHESIS, EXIT_OK};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

const CSV_HEADER_RATES: &str = "n,value,method,error_budget";

fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn dat_num(x: f64) -> String {
    format!("{x:.8e}")
}

struct Artifacts<'a> {
    dir: &'a Path,
    plot: bool,
    written: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    fn new(dir: &'a Path, plot: bool) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir,
            plot,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(path);
        Ok(())
    }

    /// Two-column `log10 x, log10 y` series; nonpositive points are dropped.
    fn plot_data(&mut self, name: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Result<(), CliError> {
        if !self.plot {
            return Ok(());
        }
        let mut s = String::new();
        for (x, y) in points {
            if x > 0.0 && y > 0.0 && y.is_finite() {
                let _ = writeln!(s, "{} {}", dat_num(x.log10()), dat_num(y.log10()));
            }
        }
        self.write(name, &s)
    }
}

/// Run a validated job. On failure a diagnostic `error.txt` is left in the output directory.
pub fn run(job: &JobSpec) -> Result<RunOutcome, CliError> {
    let mut art = Artifacts::new(&job.output.dir, job.output.plot)?;
    match run_task(job, &mut art) {
        Ok((exit_code, summary)) => Ok(RunOutcome {
            exit_code,
            artifacts: art.written,
            summary,
        }),
        Err(e) => {
            let _ = art.write("error.txt", &format!("task: {}\nerror: {e}\n", job.task.name()));
            Err(e)
        }
    }
}

fn run_task(job: &JobSpec, art: &mut Artifacts) -> Result<(i32, String), CliError> {
    match job.task {
        Task::Rates => rates(job, art),
        Task::Resolvent => resolvent(job, art),
        Task::Envelope => envelope(job, art),
        Task::Compare => compare(job, art),
        Task::Fit => fit(job, art),
        Task::Verify => verify_job(job, art),
    }
}

fn build_rate(job: &JobSpec, t: Option<&OperatorModel>) -> Result<RateFunction, CliError> {
    let (spec, domain) = job
        .rate
        .as_ref()
        .ok_or_else(|| CliError::Invalid("no [rate] section".into()))?;
    let need_t = || t.ok_or_else(|| CliError::Invalid("envelope-based rate needs an [operator] section".into()));
    let m = match spec {
        RateSpec::PowerLaw { scale, exponent } => RateFunction::power_law(*scale, *exponent)?,
        RateSpec::PowerLog {
            scale,
            exponent,
            log_exponent,
        } => RateFunction::power_log(*scale, *exponent, *log_exponent)?,
        RateSpec::Table { eps, values } => RateFunction::from_table(eps.clone(), values.clone())?,
        RateSpec::FromEnvelope { eps_min } => need_t()?.envelope_rate_function(*eps_min)?,
        RateSpec::EnvelopeMajorant {
            exponent,
            eps_min,
            eps_max,
        } => {
            let env = need_t()?.envelope_rate_function(*eps_min)?;
            verify::majorant_power_law(&env, *exponent, *eps_min, *eps_max)?
        }
    };
    Ok(match domain {
        Some((lo, hi)) => m.with_domain(*lo, *hi)?,
        None => m,
    })
}

fn decay_entries(job: &JobSpec, t: &OperatorModel, ns: &[u64]) -> Result<DecayProfile, CliError> {
    match job.params.method {
        SectionMethod::Exact => Ok(t.decay_profile(ns)?),
        SectionMethod::Section { dimension } => {
            let ModelKind::Toeplitz(density) = t.kind() else {
                return Err(CliError::Invalid("method = section needs a toeplitz operator".into()));
            };
            let section = FiniteSection::new(density, dimension)?;
            let entries = ns
                .par_iter()
                .map(|&n| {
                    let norm = section.decay_norm(n)?;
                    Ok(DecayEntry {
                        n,
                        value: norm.value,
                        method: Method::FiniteSection,
                        error_budget: 1e-10 * norm.value,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(DecayProfile { entries })
        }
    }
}

fn profile_csv(profile: &DecayProfile) -> String {
    let mut s = format!("{CSV_HEADER_RATES}\n");
    for e in &profile.entries {
        let _ = writeln!(s, "{},{},{},{}", e.n, csv_num(e.value), e.method, csv_num(e.error_budget));
    }
    s
}

fn rates(job: &JobSpec, art: &mut Artifacts) -> Result<(i32, String), CliError> {
    let t = job.build_operator()?;
    let profile = decay_entries(job, &t, &job.params.n_values())?;
    art.write("rates.csv", &profile_csv(&profile))?;
    art.plot_data("rates.dat", profile.entries.iter().map(|e| (e.n as f64, e.value)))?;
    Ok((
        EXIT_OK,
        format!("rates: {} values for {}", profile.entries.len(), t.label()),
    ))
}

fn exact_spectrum(t: &OperatorModel) -> bool {
    matches!(t.kind(), ModelKind::Diagonal(_))
}

fn resolvent(job: &JobSpec, art: &mut Artifacts) -> Result<(i32, String), CliError> {
    let t = job.build_operator()?;
    let thetas = job.params.grid_values();
    let (method, rel) = if exact_spectrum(&t) {
        ("exact", 0.0)
    } else {
        ("grid-min", t.resolution().tolerance)
    };
    let rows = thetas
        .par_iter()
        .map(|&th| {
            let d = t.spectrum_distance(th)?;
            if d.at_spectrum {
                return Err(CliError::Operator(crate::operators::OperatorError::Singular { theta: th }));
            }
            Ok((th, d.value, 1.0 / d.value))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut s = String::from("theta,distance,resolvent_norm,method,error_budget\n");
    for &(th, d, r) in &rows {
        let _ = writeln!(s, "{},{},{},{method},{}", csv_num(th), csv_num(d), csv_num(r), csv_num(rel * r));
    }
    art.write("resolvent.csv", &s)?;
    art.plot_data("resolvent.dat", rows.iter().map(|r| (r.0.abs(), r.2)))?;
    Ok((EXIT_OK, format!("resolvent: {} angles for {}", rows.len(), t.label())))
}

fn envelope(job: &JobSpec, art: &mut Artifacts) -> Result<(i32, String), CliError> {
    let t = job.build_operator()?;
    let eps = job.params.grid_values();
    let (method, rel) = if exact_spectrum(&t) {
        ("exact", 0.0)
    } else {
        ("grid-max", t.resolution().tolerance)
    };
    let mut rows = Vec::with_capacity(eps.len());
    for &e in &eps {
        rows.push((e, t.resolvent_envelope(e)?));
    }
    let mut s = String::from("eps,envelope,method,error_budget\n");
    for &(e, p) in &rows {
        let _ = writeln!(s, "{},{},{method},{}", csv_num(e), csv_num(p), csv_num(rel * p));
    }
    art.write("envelope.csv", &s)?;
    art.plot_data("envelope.dat", rows.iter().copied())?;
    Ok((EXIT_OK, format!("envelope: {} samples for {}", rows.len(), t.label())))
}

fn compare(job: &JobSpec, art: &mut Artifacts) -> Result<(i32, String), CliError> {
    let t = job.operator.as_ref().map(|_| job.build_operator()).transpose()?;
    let m = build_rate(job, t.as_ref())?;
    let ns = job.params.n_values();
    let rows = ns
        .par_iter()
        .map(|&n| {
            let s = n as f64;
            let a = m.right_inverse(s)?;
            let b = m.m_log_inverse(s)?;
            let c = m.m_max_inverse(s)?;
            Ok((n, a, b, c))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut s = String::from("n,m_inv,m_log_inv,m_max_inv,method,error_budget,extrapolated\n");
    for (n, a, b, c) in &rows {
        let budget = INVERSION_RTOL * a.eps.max(b.eps).max(c.eps);
        let _ = writeln!(
            s,
            "{n},{},{},{},bisection,{},{}",
            csv_num(a.eps),
            csv_num(b.eps),
            csv_num(c.eps),
            csv_num(budget),
            a.extrapolated || b.extrapolated || c.extrapolated
        );
    }
    art.write("compare.csv", &s)?;
    art.plot_data("compare_m_inv.dat", rows.iter().map(|r| (r.0 as f64, r.1.eps)))?;
    art.plot_data("compare_m_log_inv.dat", rows.iter().map(|r| (r.0 as f64, r.2.eps)))?;
    art.plot_data("compare_m_max_inv.dat", rows.iter().map(|r| (r.0 as f64, r.3.eps)))?;
    let extrapolated = rows
        .iter()
        .filter(|r| r.1.extrapolated || r.2.extrapolated || r.3.extrapolated)
        .count();
    let mut summary = format!("compare: {} rows", rows.len());
    if extrapolated > 0 {
        let _ = write!(summary, " ({extrapolated} extrapolated)");
    }
    Ok((EXIT_OK, summary))
}

fn n_range(job: &JobSpec) -> Result<NRange, CliError> {
    match job.params.n {
        NSpec::Range { min, max } => Ok(NRange::new(min, max).with_per_decade(job.params.n_per_decade)),
        NSpec::List(_) => Err(CliError::Invalid(format!("task '{}' needs an n range", job.task.name()))),
    }
}

fn fit(job: &JobSpec, art: &mut Artifacts) -> Result<(i32, String), CliError> {
    let t = job.build_operator()?;
    let range = n_range(job)?;
    let profile = decay_entries(job, &t, &range.grid())?;
    let model = match job.params.fit {
        FitSpec::PowerLog => FitModel::PowerLog,
        FitSpec::Power => FitModel::Power,
    };
    let f = verify::fit_rate(&profile, model)?;
    let text = render_fit(&f, (range.min, range.max));
    art.write("fit.csv", &profile_csv(&profile))?;
    art.write("fit.txt", &text)?;
    art.plot_data("fit.dat", profile.entries.iter().map(|e| (e.n as f64, e.value)))?;
    Ok((EXIT_OK, text))
}

fn verify_job(job: &JobSpec, art: &mut Artifacts) -> Result<(i32, String), CliError> {
    let p = &job.params;
    let claim = p.claim.ok_or_else(|| CliError::Invalid("verify needs 'claim'".into()))?;
    let range = n_range(job)?;
    let req = |name: &str, v: Option<f64>| v.ok_or_else(|| CliError::Invalid(format!("claim needs '{name}'")));
    let report: VerificationReport = match claim {
        Claim::Comparisons => {
            let t = job.operator.as_ref().map(|_| job.build_operator()).transpose()?;
            let m = build_rate(job, t.as_ref())?;
            verify::check_comparisons(&m, req("alpha", p.alpha)?, req("c", p.c)?, req("c_prime", p.c_prime)?, range)?
        }
        _ => {
            let t = job.build_operator()?;
            match claim {
                Claim::UpperMlog => verify::check_upper_mlog(&t, &build_rate(job, Some(&t))?, req("c", p.c)?, range)?,
                Claim::UpperPosinc => verify::check_upper_posinc(&t, &build_rate(job, Some(&t))?, range)?,
                Claim::Lower => {
                    let c_list = match (&p.c_list, p.c_sweep) {
                        (Some(v), _) => v.clone(),
                        (None, Some((lo, hi, k))) => verify::c_sweep(lo, hi, k),
                        (None, None) => return Err(CliError::Invalid("claim lower needs c_list".into())),
                    };
                    verify::check_lower(&t, &build_rate(job, Some(&t))?, &c_list, range)?
                }
                Claim::Sandwich => {
                    verify::check_sandwich_quasimult(&t, req("delta", p.delta)?, p.delta_prime, p.c.unwrap_or(1.0), range)?
                }
                Claim::Necessity => verify::necessity_diagnostic(
                    &t,
                    &build_rate(job, Some(&t))?,
                    req("c", p.c)?,
                    req("delta", p.delta)?,
                    range,
                )?,
                Claim::Comparisons => unreachable!(),
            }
        }
    };
    let text = render_report(&report);
    art.write("report.txt", &text)?;
    let mut csv = String::from("part,n,lhs,rhs,ratio,extrapolated\n");
    for (part, m) in report.margin_rows() {
        let _ = writeln!(
            csv,
            "{part},{},{},{},{},{}",
            m.n,
            csv_num(m.lhs),
            csv_num(m.rhs),
            csv_num(m.ratio),
            m.extrapolated
        );
    }
    art.write("margins.csv", &csv)?;
    Ok((exit_code(&report.verdict), text))
}

/// Exit status for a verdict: pass (or nothing applicable) 0, hypothesis failure 2, failure 1.
pub fn exit_code(verdict: &Verdict) -> i32 {
    match verdict {
        Verdict::Pass | Verdict::Skipped { .. } => EXIT_OK,
        Verdict::HypothesisNotSatisfied { .. } => EXIT_HYPOTHESIS,
        Verdict::Fail { .. } => EXIT_ERROR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_spec;

    fn job(text: &str, dir: &Path) -> JobSpec {
        let mut j = parse_spec(text).unwrap();
        j.output.dir = dir.to_path_buf();
        j
    }

    #[test]
    fn diagonal_rates_rows() {
        let dir = tempfile::tempdir().unwrap();
        let j = job("[operator]\nkind = diagonal\npoints = [1, 0.9]\n[task]\ntask = rates\nn = [1, 2, 3]\n", dir.path());
        let out = run(&j).unwrap();
        assert_eq!(out.exit_code, 0);
        let csv = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        let expect = [0.09, 0.081, 0.0729];
        for (row, e) in rows.iter().zip(expect) {
            let v: f64 = row[1].parse().unwrap();
            assert!((v - e).abs() < 1e-15, "{row:?}");
            assert_eq!(row[2], "symbol-exact");
        }
    }

    #[test]
    fn identity_lower_bound_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let j = job(
            "[operator]\nkind = identity\n[rate]\nform = power_law\nexponent = 1\n[task]\ntask = verify\nclaim = lower\nc_list = [1]\nn = 100..10000\n",
            dir.path(),
        );
        let out = run(&j).unwrap();
        assert_eq!(out.exit_code, EXIT_HYPOTHESIS);
        let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(report.contains("hypothesis (2.3) not satisfied"));
    }

    #[test]
    fn compare_for_reciprocal_rate() {
        let dir = tempfile::tempdir().unwrap();
        let j = job(
            "[rate]\nform = power_law\nexponent = 1\n[task]\ntask = compare\nn = 10..1000\n",
            dir.path(),
        );
        run(&j).unwrap();
        let csv = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
        for line in csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let n: f64 = f[0].parse().unwrap();
            let minv: f64 = f[1].parse().unwrap();
            assert!((minv * n - 1.0).abs() < 1e-10);
            assert_eq!(f[6], "false");
        }
    }
}
