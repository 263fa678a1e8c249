//! JSON formats for curves and surfaces, and OBJ mesh export.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::curves::{Grid, PolarizedCurve};
use crate::error::{Error, Result};
use crate::surface::SemiDiscreteSurface;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridJson {
    pub s0: f64,
    pub s1: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveJson {
    pub n: usize,
    pub grid: GridJson,
    pub x: Vec<Vec<f64>>,
    pub m: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xprime: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceJson {
    pub curves: Vec<CurveJson>,
    pub mu: Vec<f64>,
}

fn rows(v: &[DVector<f64>]) -> Vec<Vec<f64>> {
    v.iter().map(|p| p.as_slice().to_vec()).collect()
}

fn columns(n: usize, what: &str, rows: &[Vec<f64>]) -> Result<Vec<DVector<f64>>> {
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            if r.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{what}[{k}] has {} coordinates, expected {n}",
                    r.len()
                )));
            }
            Ok(DVector::from_column_slice(r))
        })
        .collect()
}

impl CurveJson {
    /// Derivatives are written only when they are not finite-difference
    /// estimates, so a reload reproduces the curve exactly.
    pub fn from_curve(c: &PolarizedCurve) -> Self {
        let g = c.grid();
        Self {
            n: c.n(),
            grid: GridJson {
                s0: g.s0,
                s1: g.s1,
                n: g.len(),
            },
            x: rows(c.x()),
            m: c.m().to_vec(),
            xprime: c.has_exact_derivative().then(|| rows(c.xprime())),
        }
    }

    pub fn to_curve(&self) -> Result<PolarizedCurve> {
        let grid = Grid::new(self.grid.s0, self.grid.s1, self.grid.n)?;
        let x = columns(self.n, "x", &self.x)?;
        let xprime = self
            .xprime
            .as_ref()
            .map(|d| columns(self.n, "xprime", d))
            .transpose()?;
        PolarizedCurve::new(grid, x, self.m.clone(), xprime)
    }
}

impl SurfaceJson {
    pub fn from_surface(s: &SemiDiscreteSurface) -> Self {
        Self {
            curves: s.curves().iter().map(CurveJson::from_curve).collect(),
            mu: s.mu().to_vec(),
        }
    }

    pub fn to_surface(&self) -> Result<SemiDiscreteSurface> {
        let curves = self
            .curves
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_curve().map_err(|e| e.in_layer("curve", i)))
            .collect::<Result<Vec<_>>>()?;
        SemiDiscreteSurface::new(curves, self.mu.clone())
    }
}

pub fn curve_to_string(c: &PolarizedCurve) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CurveJson::from_curve(c))?)
}

pub fn surface_to_string(s: &SemiDiscreteSurface) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SurfaceJson::from_surface(s))?)
}

pub fn curve_from_str(text: &str) -> Result<PolarizedCurve> {
    serde_json::from_str::<CurveJson>(text)?.to_curve()
}

pub fn surface_from_str(text: &str) -> Result<SemiDiscreteSurface> {
    serde_json::from_str::<SurfaceJson>(text)?.to_surface()
}

/// Either file kind; surfaces are recognized by their `curves` key.
#[derive(Clone, Debug)]
pub enum Document {
    Curve(PolarizedCurve),
    Surface(SemiDiscreteSurface),
}

pub fn document_from_str(text: &str) -> Result<Document> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("curves").is_some() {
        Ok(Document::Surface(serde_json::from_value::<SurfaceJson>(value)?.to_surface()?))
    } else {
        Ok(Document::Curve(serde_json::from_value::<CurveJson>(value)?.to_curve()?))
    }
}

pub fn read_document(path: &std::path::Path) -> Result<Document> {
    document_from_str(&std::fs::read_to_string(path)?)
}

/// Quad mesh of a surface in `R^2` (padded with `z = 0`) or `R^3`.
pub fn write_obj<W: Write>(s: &SemiDiscreteSurface, out: &mut W) -> Result<()> {
    let n = s.n();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let len = s.grid().len();
    writeln!(out, "o surface")?;
    for c in s.curves() {
        for p in c.x() {
            let z = if n == 3 { p[2] } else { 0.0 };
            writeln!(out, "v {} {} {}", p[0], p[1], z)?;
        }
    }
    let idx = |i: usize, k: usize| i * len + k + 1;
    for i in 0..s.curves().len() - 1 {
        for k in 0..len - 1 {
            writeln!(out, "f {} {} {} {}", idx(i, k), idx(i, k + 1), idx(i + 1, k + 1), idx(i + 1, k))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{concentric_pair, three_layer};

    #[test]
    fn round_trip_is_byte_identical() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let s = three_layer(g).unwrap();
        let text = surface_to_string(&s).unwrap();
        let again = surface_to_string(&surface_from_str(&text).unwrap()).unwrap();
        assert_eq!(text, again);
        let c = &s.curves()[1];
        let ctext = curve_to_string(c).unwrap();
        assert_eq!(ctext, curve_to_string(&curve_from_str(&ctext).unwrap()).unwrap());
        assert!(matches!(document_from_str(&ctext).unwrap(), Document::Curve(_)));
        assert!(matches!(document_from_str(&text).unwrap(), Document::Surface(_)));
    }

    #[test]
    fn fd_curves_reload_without_derivatives() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let x = g.nodes().map(|s| DVector::from_vec(vec![s, s * s])).collect();
        let c = PolarizedCurve::new(g, x, vec![1.0; 11], None).unwrap();
        let j = CurveJson::from_curve(&c);
        assert!(j.xprime.is_none());
        assert_eq!(j.to_curve().unwrap().xprime(), c.xprime());
    }

    #[test]
    fn malformed_input_is_rejected() {
        let bad = [
            r#"{"n":2,"grid":{"s0":0,"s1":1,"N":5},"x":[[0,0],[1,0],[2,0],[3,0],[4,0]],"m":[1,1,1,1,NaN]}"#,
            r#"{"n":2,"grid":{"s0":0,"s1":1,"N":5},"x":[[0,0],[1,0],[2,0],[3,0],[4,0]],"m":[1,1,1,1,1e999]}"#,
            r#"{"n":2,"grid":{"s0":0,"s1":1,"N":6},"x":[[0,0],[1,0],[2,0],[3,0],[4,0]],"m":[1,1,1,1,1]}"#,
            r#"{"n":2,"grid":{"s0":0,"s1":1,"N":5},"x":[[0,0],[1,0],[2],[3,0],[4,0]],"m":[1,1,1,1,1]}"#,
            r#"{"n":2,"grid":{"s0":0,"s1":1,"N":5},"x":[[0,0],[1,0],[2,0],[3,0],[4,0]],"m":[1,1,1,1,1],"extra":0}"#,
        ];
        for text in bad {
            assert!(curve_from_str(text).is_err(), "{text}");
        }
        let good = r#"{"n":2,"grid":{"s0":0,"s1":1,"N":5},"x":[[0,0],[1,0],[2,0],[3,0],[4,0]],"m":[1,1,1,1,1]}"#;
        assert!(curve_from_str(good).is_ok());
        let mixed = format!(
            r#"{{"curves":[{good},{}],"mu":[1]}}"#,
            good.replace(r#""s1":1"#, r#""s1":2"#)
        );
        assert!(surface_from_str(&mixed).is_err());
    }

    #[test]
    fn obj_layout() {
        let g = Grid::new(0.0, 1.0, 5).unwrap();
        let s = concentric_pair(g).unwrap();
        let mut buf = Vec::new();
        write_obj(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 10);
        let faces: Vec<&str> = text.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces.len(), 4);
        assert_eq!(faces[0], "f 1 2 7 6");
        assert!(text.lines().nth(1).unwrap().ends_with(" 0"));
    }
}
