//! Sampled polarized curves, analytic fixture families and the tractrix
//! construction of Darboux pairs.

use nalgebra::DVector;

use crate::clifford::{DEGENERACY_TOL, MAX_DIM};
use crate::error::{Error, Result};
use crate::numerics::fd_derivative;

/// Uniform grid `s_k = s0 + k h` with `N >= 5` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub s0: f64,
    pub s1: f64,
    n: usize,
}

impl Grid {
    pub fn new(s0: f64, s1: f64, n: usize) -> Result<Self> {
        if !(s0.is_finite() && s1.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if n < 5 {
            return Err(Error::InvalidGrid(format!("need at least 5 samples, got {n}")));
        }
        if s1 <= s0 {
            return Err(Error::InvalidGrid(format!("empty interval [{s0}, {s1}]")));
        }
        Ok(Self { s0, s1, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.s1 - self.s0) / (self.n - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.s1
        } else {
            self.s0 + k as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.node(k))
    }

    /// Same interval with `2N - 1` nodes.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }
}

/// An immersed curve `x: I -> R^n` sampled on a grid, with its derivative and
/// the polarization denominator `m` of `ds^2 / m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizedCurve {
    n: usize,
    grid: Grid,
    x: Vec<DVector<f64>>,
    xprime: Vec<DVector<f64>>,
    m: Vec<f64>,
    analytic: bool,
}

impl PolarizedCurve {
    /// Builds a curve from samples; `xprime` is computed by finite differences
    /// when absent.
    pub fn new(
        grid: Grid,
        x: Vec<DVector<f64>>,
        m: Vec<f64>,
        xprime: Option<Vec<DVector<f64>>>,
    ) -> Result<Self> {
        let analytic = xprime.is_some();
        let xprime = match xprime {
            Some(d) => d,
            None => {
                if x.len() != grid.len() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.len(),
                        actual: x.len(),
                    });
                }
                fd_derivative(&x, grid.step())?
            }
        };
        Self::validated(grid, x, xprime, m, analytic)
    }

    fn validated(
        grid: Grid,
        x: Vec<DVector<f64>>,
        xprime: Vec<DVector<f64>>,
        m: Vec<f64>,
        analytic: bool,
    ) -> Result<Self> {
        for len in [x.len(), xprime.len(), m.len()] {
            if len != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    actual: len,
                });
            }
        }
        let n = x[0].len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        for v in x.iter().chain(&xprime) {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput("non-finite curve sample".into()));
            }
        }
        for (k, (d, mk)) in xprime.iter().zip(&m).enumerate() {
            let s = grid.node(k);
            if d.norm() <= DEGENERACY_TOL {
                return Err(Error::NotImmersed { index: k, s });
            }
            if !mk.is_finite() || *mk == 0.0 {
                return Err(Error::ZeroPolarization { index: k, s });
            }
        }
        Ok(Self {
            n,
            grid,
            x,
            xprime,
            m,
            analytic,
        })
    }

    /// Curve given by closed-form position and velocity.
    pub fn from_fn<F, M>(grid: Grid, f: F, m: M) -> Result<Self>
    where
        F: Fn(f64) -> (Vec<f64>, Vec<f64>),
        M: Fn(f64) -> f64,
    {
        let mut x = Vec::with_capacity(grid.len());
        let mut d = Vec::with_capacity(grid.len());
        for s in grid.nodes() {
            let (p, v) = f(s);
            x.push(DVector::from_vec(p));
            d.push(DVector::from_vec(v));
        }
        let m = grid.nodes().map(m).collect();
        Self::validated(grid, x, d, m, true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self) -> &[DVector<f64>] {
        &self.x
    }

    pub fn xprime(&self) -> &[DVector<f64>] {
        &self.xprime
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    /// Whether `xprime` came from a closed form or an ODE right-hand side
    /// rather than from finite differences.
    pub fn has_exact_derivative(&self) -> bool {
        self.analytic
    }

    pub fn with_m(&self, m: Vec<f64>) -> Result<Self> {
        Self::validated(
            self.grid,
            self.x.clone(),
            self.xprime.clone(),
            m,
            self.analytic,
        )
    }

    /// Finite-difference derivative of the stored positions.
    pub fn fd_xprime(&self) -> Result<Vec<DVector<f64>>> {
        fd_derivative(&self.x, self.grid.step())
    }

    /// Second derivative from finite differences of `xprime`.
    pub fn xsecond(&self) -> Result<Vec<DVector<f64>>> {
        fd_derivative(&self.xprime, self.grid.step())
    }

    /// Copy of the curve with every sample moved by `offset`.
    pub fn translated(&self, offset: &DVector<f64>) -> Self {
        Self {
            x: self.x.iter().map(|p| p + offset).collect(),
            ..self.clone()
        }
    }

    /// Adds `noise[k]` to the positions and recomputes derivatives.
    pub fn perturbed(&self, noise: &[DVector<f64>]) -> Result<Self> {
        let x: Vec<DVector<f64>> = self.x.iter().zip(noise).map(|(p, e)| p + e).collect();
        Self::new(self.grid, x, self.m.clone(), None)
    }
}

/// Built-in analytic families.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `r (cos s, sin s)` in the first two coordinates of `R^dim`.
    Circle { radius: f64, dim: usize },
    /// `(r cos s, r sin s, p s)` in `R^3`.
    Helix { radius: f64, pitch: f64 },
    /// `s e_1` in `R^dim`.
    Line { dim: usize },
    /// Given samples; derivatives by finite differences.
    Samples(Vec<Vec<f64>>),
}

/// Fixture curve with `m = 1`.
pub fn make_curve(family: &Family, grid: Grid) -> Result<PolarizedCurve> {
    match family {
        Family::Circle { radius, dim } => {
            let (r, dim) = (*radius, *dim);
            if r == 0.0 || !r.is_finite() {
                return Err(Error::NotImmersed { index: 0, s: grid.s0 });
            }
            if !(2..=MAX_DIM).contains(&dim) {
                return Err(Error::UnsupportedDimension(dim));
            }
            PolarizedCurve::from_fn(
                grid,
                |s| {
                    let mut p = vec![0.0; dim];
                    let mut v = vec![0.0; dim];
                    p[0] = r * s.cos();
                    p[1] = r * s.sin();
                    v[0] = -r * s.sin();
                    v[1] = r * s.cos();
                    (p, v)
                },
                |_| 1.0,
            )
        }
        Family::Helix { radius, pitch } => {
            let (r, p) = (*radius, *pitch);
            if r == 0.0 && p == 0.0 {
                return Err(Error::NotImmersed { index: 0, s: grid.s0 });
            }
            PolarizedCurve::from_fn(
                grid,
                |s| {
                    (
                        vec![r * s.cos(), r * s.sin(), p * s],
                        vec![-r * s.sin(), r * s.cos(), p],
                    )
                },
                |_| 1.0,
            )
        }
        Family::Line { dim } => {
            let dim = *dim;
            if !(1..=MAX_DIM).contains(&dim) {
                return Err(Error::UnsupportedDimension(dim));
            }
            PolarizedCurve::from_fn(
                grid,
                |s| {
                    let mut p = vec![0.0; dim];
                    let mut v = vec![0.0; dim];
                    p[0] = s;
                    v[0] = 1.0;
                    (p, v)
                },
                |_| 1.0,
            )
        }
        Family::Samples(points) => {
            let x = points.iter().map(|p| DVector::from_vec(p.clone())).collect();
            PolarizedCurve::new(grid, x, vec![1.0; grid.len()], None)
        }
    }
}

/// Replaces `m` by `1 / (x', x')`.
pub fn arc_length_polarization(c: &PolarizedCurve) -> Result<PolarizedCurve> {
    let m = c.xprime().iter().map(|d| 1.0 / d.norm_squared()).collect();
    c.with_m(m)
}

/// Largest deviation of `|x'|` from 1.
pub fn unit_speed_deviation(c: &PolarizedCurve) -> f64 {
    c.xprime()
        .iter()
        .map(|d| (d.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// The pair `x_pm = y +- y' / (2 sqrt(mu))` over a unit-speed curve `y`, with
/// their common arc-length polarization.
///
/// `y''` is taken from finite differences of `y'` unless `second` supplies it.
pub fn tractrix_pair(
    y: &PolarizedCurve,
    mu: f64,
    second: Option<&[DVector<f64>]>,
) -> Result<(PolarizedCurve, PolarizedCurve)> {
    let deviation = unit_speed_deviation(y);
    if deviation > 1e-8 {
        return Err(Error::NonUnitSpeed { deviation });
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidInput(format!(
            "tractrix parameter must be positive, got {mu}"
        )));
    }
    let owned;
    let ypp = match second {
        Some(v) => v,
        None => {
            owned = y.xsecond()?;
            &owned
        }
    };
    let c = 0.5 / mu.sqrt();
    let build = |sign: f64| -> Result<PolarizedCurve> {
        let x = y
            .x()
            .iter()
            .zip(y.xprime())
            .map(|(p, v)| p + v * (sign * c))
            .collect();
        let d: Vec<DVector<f64>> = y
            .xprime()
            .iter()
            .zip(ypp)
            .map(|(v, a)| v + a * (sign * c))
            .collect();
        let m = d.iter().map(|v| 1.0 / v.norm_squared()).collect();
        PolarizedCurve::validated(*y.grid(), x, d, m, y.has_exact_derivative() && second.is_some())
    };
    Ok((build(1.0)?, build(-1.0)?))
}

/// Closed-form second derivative of a circle family sample set.
pub fn circle_second_derivative(radius: f64, dim: usize, grid: &Grid) -> Vec<DVector<f64>> {
    grid.nodes()
        .map(|s| {
            let mut a = DVector::zeros(dim);
            a[0] = -radius * s.cos();
            a[1] = -radius * s.sin();
            a
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(r: f64, n: usize) -> PolarizedCurve {
        make_curve(&Family::Circle { radius: r, dim: 2 }, Grid::new(0.0, 2.0 * PI, n).unwrap()).unwrap()
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid::new(0.0, 1.0, 4).is_err());
        assert!(Grid::new(1.0, 1.0, 10).is_err());
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        assert!((g.step() - 0.1).abs() < 1e-15);
        assert_eq!(g.node(10), 1.0);
        assert_eq!(g.refined().len(), 21);
    }

    #[test]
    fn unit_circle_has_unit_speed() {
        let c = circle(1.0, 629);
        assert!(unit_speed_deviation(&c) < 1e-15);
        assert!(c.m().iter().all(|&m| m == 1.0));
    }

    #[test]
    fn line_has_constant_tangent() {
        let c = make_curve(&Family::Line { dim: 2 }, Grid::new(-1.0, 1.0, 21).unwrap()).unwrap();
        for d in c.xprime() {
            assert_eq!(d.as_slice(), &[1.0, 0.0]);
        }
    }

    #[test]
    fn zero_pitch_helix_is_the_circle() {
        let g = Grid::new(0.0, 2.0 * PI, 101).unwrap();
        let h = make_curve(&Family::Helix { radius: 1.0, pitch: 0.0 }, g).unwrap();
        let c = circle(1.0, 101);
        for (a, b) in h.x().iter().zip(c.x()) {
            assert_eq!(a[0], b[0]);
            assert_eq!(a[1], b[1]);
            assert_eq!(a[2], 0.0);
        }
    }

    #[test]
    fn degenerate_families_are_rejected() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        assert!(matches!(
            make_curve(&Family::Circle { radius: 0.0, dim: 2 }, g),
            Err(Error::NotImmersed { .. })
        ));
        let pts = vec![vec![1.0, 2.0]; 11];
        assert!(matches!(
            make_curve(&Family::Samples(pts), g),
            Err(Error::NotImmersed { .. })
        ));
    }

    #[test]
    fn arc_length_polarization_examples() {
        let c = arc_length_polarization(&circle(1.0, 101)).unwrap();
        assert!(c.m().iter().all(|m| (m - 1.0).abs() < 1e-15));
        let c = arc_length_polarization(&circle(2.0, 101)).unwrap();
        assert!(c.m().iter().all(|m| (m - 0.25).abs() < 1e-15));
    }

    #[test]
    fn tractrix_over_unit_circle() {
        let y = circle(1.0, 629);
        let ypp = circle_second_derivative(1.0, 2, y.grid());
        let (xp, xm) = tractrix_pair(&y, 0.25, Some(&ypp)).unwrap();
        for k in 0..y.len() {
            assert!((xp.m()[k] - 0.5).abs() < 1e-14);
            assert!((xm.m()[k] - 0.5).abs() < 1e-14);
            assert!(((&xp.x()[k] - &xm.x()[k]).norm() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tractrix_width_shrinks_with_mu() {
        let y = circle(1.0, 201);
        let ypp = circle_second_derivative(1.0, 2, y.grid());
        let (xp, xm) = tractrix_pair(&y, 100.0, Some(&ypp)).unwrap();
        for k in 0..y.len() {
            assert!(((&xp.x()[k] - &xm.x()[k]).norm() - 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn tractrix_over_a_line_translates_it() {
        let y = make_curve(&Family::Line { dim: 2 }, Grid::new(0.0, 1.0, 11).unwrap()).unwrap();
        let (xp, _) = tractrix_pair(&y, 1.0, None).unwrap();
        for (a, b) in xp.x().iter().zip(y.x()) {
            assert!((a - b - DVector::from_vec(vec![0.5, 0.0])).norm() < 1e-12);
        }
    }

    #[test]
    fn tractrix_needs_unit_speed() {
        assert!(matches!(
            tractrix_pair(&circle(2.0, 101), 1.0, None),
            Err(Error::NonUnitSpeed { .. })
        ));
    }

    #[test]
    fn fd_derivative_converges_at_fourth_order() {
        let err = |n: usize| {
            let c = circle(1.0, n);
            let fd = c.fd_xprime().unwrap();
            fd.iter()
                .zip(c.xprime())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        let ratio = err(101) / err(201);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }
}
