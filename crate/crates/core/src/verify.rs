//! Invariant suites over curves and surfaces, reported as residual tables.

use std::collections::BTreeMap;
use std::fmt;

use crate::curves::PolarizedCurve;
use crate::error::{Error, Result};
use crate::numerics::{fd_derivative, StepPolicy};
use crate::surface::{check_isothermic, moutard_lift, surface_christoffel, surface_connection, SemiDiscreteSurface};

pub const SUITES: [&str; 5] = ["christoffel", "connection.flatness", "curve.derivative", "isothermic", "moutard"];

/// Spectral parameters tried, in order, for the flatness check.
const FLATNESS_PARAMS: [f64; 3] = [0.5, 0.37, -0.61];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub check: String,
    pub target: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "edge_or_curve", "max_residual", "tolerance", "pass"])
            .map_err(csv_error)?;
        for r in &self.rows {
            w.write_record([
                r.check.clone(),
                r.target.clone(),
                format!("{:e}", r.residual),
                format!("{:e}", r.tolerance),
                r.pass.to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:<10} {:>12} {:>10}  result", "check", "target", "residual", "tol")?;
        for r in &self.rows {
            write!(
                f,
                "{:<28} {:<10} {:>12.3e} {:>10.1e}  {}",
                r.check,
                r.target,
                r.residual,
                r.tolerance,
                if r.pass { "pass" } else { "FAIL" }
            )?;
            if let Some(n) = &r.note {
                write!(f, "  ({n})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub suites: Vec<String>,
    pub overrides: BTreeMap<String, f64>,
    pub policy: StepPolicy,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suites: SUITES.iter().map(|s| s.to_string()).collect(),
            overrides: BTreeMap::new(),
            policy: StepPolicy::Grid,
        }
    }
}

impl VerifyOptions {
    /// `all` or a list of suite names.
    pub fn with_suites(mut self, names: &[String]) -> Result<Self> {
        let mut out = Vec::new();
        for name in names {
            if name == "all" {
                out.extend(SUITES.iter().map(|s| s.to_string()));
            } else if SUITES.contains(&name.as_str()) {
                out.push(name.clone());
            } else {
                return Err(Error::InvalidInput(format!("unknown suite {name:?}")));
            }
        }
        out.sort();
        out.dedup();
        self.suites = out;
        Ok(self)
    }

    /// Exact check names win over suite-wide overrides.
    fn tolerance(&self, check: &str, default: f64) -> f64 {
        if let Some(v) = self.overrides.get(check) {
            return *v;
        }
        let suite = check.rsplit_once('.').map_or(check, |(s, _)| s);
        self.overrides.get(suite).copied().unwrap_or(default)
    }

    fn wants(&self, suite: &str) -> bool {
        self.suites.iter().any(|s| s == suite)
    }
}

/// Parses `check=value`.
pub fn parse_override(text: &str) -> Result<(String, f64)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("override {text:?} is not check=value")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad tolerance in {text:?}")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidInput(format!("tolerance must be positive in {text:?}")));
    }
    Ok((k.trim().to_string(), v))
}

struct Collector<'a> {
    opts: &'a VerifyOptions,
    rows: Vec<Row>,
}

impl Collector<'_> {
    fn push(&mut self, check: &str, target: String, residual: f64, default_tol: f64) {
        let tolerance = self.opts.tolerance(check, default_tol);
        self.rows.push(Row {
            check: check.to_string(),
            target,
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
            note: None,
        });
    }

    fn error(&mut self, check: &str, target: String, default_tol: f64, err: &Error) {
        let tolerance = self.opts.tolerance(check, default_tol);
        self.rows.push(Row {
            check: check.to_string(),
            target,
            residual: f64::INFINITY,
            tolerance,
            pass: false,
            note: Some(err.to_string()),
        });
    }
}

fn derivative_residual(c: &PolarizedCurve) -> Result<f64> {
    let fd = fd_derivative(c.x(), c.grid().step())?;
    Ok(c.xprime()
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).norm() / a.norm())
        .fold(0.0, f64::max))
}

pub fn verify_curve(c: &PolarizedCurve, opts: &VerifyOptions) -> Result<Report> {
    let s = SemiDiscreteSurface::new(vec![c.clone()], vec![])?;
    verify_surface(&s, opts)
}

pub fn verify_surface(s: &SemiDiscreteSurface, opts: &VerifyOptions) -> Result<Report> {
    let mut col = Collector { opts, rows: Vec::new() };
    let edge = |e: usize| format!("edge {e}");
    let curve = |i: usize| format!("curve {i}");

    if opts.wants("curve.derivative") {
        for (i, c) in s.curves().iter().enumerate() {
            match derivative_residual(c) {
                Ok(r) => col.push("curve.derivative", curve(i), r, 1e-6),
                Err(e) => col.error("curve.derivative", curve(i), 1e-6, &e),
            }
        }
    }
    if opts.wants("isothermic") && !s.mu().is_empty() {
        match check_isothermic(s, 1e-6) {
            Ok(rep) => {
                for e in &rep.edges {
                    col.push("isothermic.reality", edge(e.edge), e.reality, 1e-6);
                    col.push("isothermic.constancy", edge(e.edge), e.constancy, 1e-6);
                    col.push("isothermic.mu", edge(e.edge), e.mu_mismatch, 1e-6);
                    if let Some(v) = e.nu_factorization {
                        col.push("isothermic.nu", edge(e.edge), v, 1e-6);
                    }
                }
            }
            Err(err) => col.error("isothermic.reality", "surface".into(), 1e-6, &err),
        }
    }
    if opts.wants("moutard") && s.m().iter().all(|&m| m > 0.0) {
        match moutard_lift(s) {
            Ok(ml) => {
                col.push("moutard.normalization", "surface".into(), ml.normalization_residual, 1e-6);
                for (e, (a, p)) in ml.area_residual.iter().zip(&ml.product_residual).enumerate() {
                    col.push("moutard.area", edge(e), *a, 1e-7);
                    col.push("moutard.product", edge(e), *p, 1e-8);
                }
            }
            Err(err) => {
                let target = match &err {
                    Error::InconsistentSign { edge: e } => edge(*e),
                    _ => "surface".into(),
                };
                col.error("moutard.area", target, 1e-7, &err);
            }
        }
    }
    if opts.wants("connection.flatness") && !s.mu().is_empty() {
        let t = FLATNESS_PARAMS
            .into_iter()
            .find(|t| s.mu().iter().all(|mu| (mu - t).abs() > 1e-3))
            .expect("three candidates cannot all collide with distinct checks");
        match surface_connection(s, t) {
            Ok(c) => {
                for (e, r) in c.flatness.iter().enumerate() {
                    col.push("connection.flatness", edge(e), *r, 1e-6);
                }
            }
            Err(err) => col.error("connection.flatness", "surface".into(), 1e-6, &err),
        }
    }
    if opts.wants("christoffel") {
        match surface_christoffel(s, opts.policy) {
            Ok(d) => {
                for (i, r) in d.consistency.iter().enumerate() {
                    col.push("christoffel.consistency", curve(i + 1), *r, 1e-7);
                }
                if s.mu().is_empty() {
                    let r = crate::transforms::dual_derivative_residual(&s.curves()[0], &d.dual.curves()[0]);
                    col.push("christoffel.consistency", curve(0), r, 1e-7);
                }
            }
            Err(err) => col.error("christoffel.consistency", "surface".into(), 1e-7, &err),
        }
    }
    let mut rows = col.rows;
    rows.sort_by(|a, b| (&a.check, &a.target).cmp(&(&b.check, &b.target)));
    Ok(Report { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture_grid, named_surface, SURFACE_FIXTURES};
    use nalgebra::DVector;

    #[test]
    fn fixtures_pass_every_suite() {
        for name in SURFACE_FIXTURES {
            let s = named_surface(name).unwrap();
            let rep = verify_surface(&s, &VerifyOptions::default()).unwrap();
            assert!(rep.passed(), "{name}\n{rep}");
            let mut sorted = rep.rows.clone();
            sorted.sort_by(|a, b| (&a.check, &a.target).cmp(&(&b.check, &b.target)));
            assert_eq!(sorted, rep.rows);
        }
    }

    #[test]
    fn noise_names_the_failing_checks() {
        let s = named_surface("three-layer").unwrap();
        let noise: Vec<DVector<f64>> = (0..fixture_grid().len())
            .map(|k| DVector::from_vec(vec![1e-3 * ((k * 37) % 11) as f64 / 11.0, -1e-3 * ((k * 17) % 7) as f64 / 7.0]))
            .collect();
        let mut curves = s.curves().to_vec();
        curves[2] = curves[2].perturbed(&noise).unwrap();
        let s = SemiDiscreteSurface::new(curves, s.mu().to_vec()).unwrap();
        let rep = verify_surface(&s, &VerifyOptions::default()).unwrap();
        assert!(!rep.passed());
        assert!(rep.failures().any(|r| r.check.starts_with("isothermic") && r.target == "edge 1"));
    }

    #[test]
    fn overrides_and_suite_selection() {
        let s = named_surface("cylinder-patch").unwrap();
        let mut opts = VerifyOptions::default()
            .with_suites(&["isothermic".to_string()])
            .unwrap();
        opts.overrides.insert("isothermic".into(), 1e-30);
        opts.overrides.insert("isothermic.mu".into(), 1.0);
        let rep = verify_surface(&s, &opts).unwrap();
        assert!(rep.rows.iter().all(|r| r.check.starts_with("isothermic.")));
        let mu_row = rep.rows.iter().find(|r| r.check == "isothermic.mu").unwrap();
        assert_eq!(mu_row.tolerance, 1.0);
        assert!(VerifyOptions::default().with_suites(&["bogus".into()]).is_err());
        assert_eq!(parse_override("moutard.area=1e-5").unwrap(), ("moutard.area".into(), 1e-5));
        assert!(parse_override("moutard.area").is_err());
        assert!(parse_override("x=-1").is_err());
    }

    #[test]
    fn csv_has_the_report_columns() {
        let s = named_surface("concentric-pair").unwrap();
        let rep = verify_surface(&s, &VerifyOptions::default()).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "check,edge_or_curve,max_residual,tolerance,pass");
        assert_eq!(lines.count(), rep.rows.len());
    }
}
