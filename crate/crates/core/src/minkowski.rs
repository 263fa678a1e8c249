//! Linear algebra of `R^{n+1,1}`: the Minkowski inner product, Euclidean lifts
//! into the light cone, wedge operators and metric-orthogonal maps.
//!
//! Coordinates are `(y_1, ..., y_n, y_{n+1}, y_{n+2})` with inner product
//! `y_1^2 + ... + y_{n+1}^2 - y_{n+2}^2`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::Linear;

/// Relative tolerance for classifying a vector as lightlike.
pub const LIGHTLIKE_TOL: f64 = 1e-9;

/// Relative threshold below which `(xi, q)` counts as zero (point at infinity).
pub const INFINITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct MinkVector(DVector<f64>);

impl MinkVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::UnsupportedDimension(coords.len().saturating_sub(2)));
        }
        Ok(Self(DVector::from_vec(coords)))
    }

    pub fn from_dvector(v: DVector<f64>) -> Self {
        Self(v)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n + 2))
    }

    /// Unit coordinate vector `e_k` (0-based) in `R^{n+1,1}`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = DVector::zeros(n + 2);
        v[k] = 1.0;
        Self(v)
    }

    /// Dimension `n` of the conformal sphere this vector lives over.
    pub fn n(&self) -> usize {
        self.0.len() - 2
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.0
    }

    pub fn inner(&self, other: &Self) -> f64 {
        let d = self.0.len();
        debug_assert_eq!(d, other.0.len());
        let spatial: f64 = self.0.rows(0, d - 1).dot(&other.0.rows(0, d - 1));
        spatial - self.0[d - 1] * other.0[d - 1]
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    /// Coordinate (Euclidean) norm, used for scale estimates only.
    pub fn euclid_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Removes a small null defect along the spatial reflection of `self`,
    /// which is null with pairing `-|v|^2`.
    pub fn renull(&self) -> Self {
        let d = self.0.len();
        let mut w = -self.0.clone();
        w[d - 1] = self.0[d - 1];
        let scale = self.0.norm_squared();
        if scale == 0.0 {
            return self.clone();
        }
        Self(&self.0 + w * (self.norm_sq() / (2.0 * scale)))
    }

    pub fn is_lightlike(&self, tol: f64) -> bool {
        self.norm_sq().abs() <= tol * self.0.norm_squared()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(&self.0 * a)
    }

    /// Unit representative of the projective point, sign fixed by the first
    /// non-negligible coordinate.
    pub fn projective_normal_form(&self) -> DVector<f64> {
        let norm = self.0.norm();
        let mut v = &self.0 / norm;
        if let Some(lead) = v.iter().copied().find(|c| c.abs() > 1e-3) {
            if lead < 0.0 {
                v = -v;
            }
        }
        v
    }

    /// Distance between the projective points `<self>` and `<other>`.
    pub fn projective_distance(&self, other: &Self) -> f64 {
        let a = &self.0 / self.0.norm();
        let b = &other.0 / other.0.norm();
        (&a - &b).norm().min((&a + &b).norm())
    }
}

impl Linear for MinkVector {
    fn zero_like(&self) -> Self {
        Self(DVector::zeros(self.0.len()))
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        self.0.axpy(a, &other.0, 1.0);
    }
}

impl Add for &MinkVector {
    type Output = MinkVector;
    fn add(self, rhs: &MinkVector) -> MinkVector {
        MinkVector(&self.0 + &rhs.0)
    }
}

impl Sub for &MinkVector {
    type Output = MinkVector;
    fn sub(self, rhs: &MinkVector) -> MinkVector {
        MinkVector(&self.0 - &rhs.0)
    }
}

impl Add for MinkVector {
    type Output = MinkVector;
    fn add(self, rhs: MinkVector) -> MinkVector {
        MinkVector(self.0 + rhs.0)
    }
}

impl Sub for MinkVector {
    type Output = MinkVector;
    fn sub(self, rhs: MinkVector) -> MinkVector {
        MinkVector(self.0 - rhs.0)
    }
}

impl Neg for MinkVector {
    type Output = MinkVector;
    fn neg(self) -> MinkVector {
        MinkVector(-self.0)
    }
}

impl Mul<f64> for &MinkVector {
    type Output = MinkVector;
    fn mul(self, rhs: f64) -> MinkVector {
        self.scale(rhs)
    }
}

/// Gram matrix `diag(1, ..., 1, -1)` of the Minkowski form.
pub fn minkowski_form(dim: usize) -> DMatrix<f64> {
    let mut g = DMatrix::identity(dim, dim);
    g[(dim - 1, dim - 1)] = -1.0;
    g
}

/// Inner product used by sampled vector fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Minkowski,
}

impl Metric {
    pub fn inner(self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self {
            Metric::Euclidean => a.dot(b),
            Metric::Minkowski => {
                let d = a.len();
                a.rows(0, d - 1).dot(&b.rows(0, d - 1)) - a[d - 1] * b[d - 1]
            }
        }
    }

    /// `v^{-1} = v / (v, v)` in the Clifford algebra of this metric.
    pub fn vector_inverse(self, v: &DVector<f64>, scale: f64) -> Result<DVector<f64>> {
        let nsq = self.inner(v, v);
        if nsq.abs() <= (crate::clifford::DEGENERACY_TOL * scale.max(1.0)).powi(2) {
            return Err(Error::DegenerateSecant { norm: nsq.abs().sqrt() });
        }
        Ok(v / nsq)
    }
}

/// A pair of lightlike vectors `o, q` with `(o, q) = -1`, together with an
/// orthonormal basis of `<o, q>^perp` identifying it with `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    o: MinkVector,
    q: MinkVector,
    basis: Vec<MinkVector>,
}

impl Frame {
    /// `o = (0, ..., 0, 1/2, 1/2)`, `q = (0, ..., 0, -1, 1)`; `R^n` sits in the
    /// first `n` coordinates.
    pub fn canonical(n: usize) -> Self {
        let mut o = vec![0.0; n + 2];
        o[n] = 0.5;
        o[n + 1] = 0.5;
        let mut q = vec![0.0; n + 2];
        q[n] = -1.0;
        q[n + 1] = 1.0;
        Self {
            o: MinkVector(DVector::from_vec(o)),
            q: MinkVector(DVector::from_vec(q)),
            basis: (0..n).map(|k| MinkVector::unit(n, k)).collect(),
        }
    }

    /// Frame whose point at infinity is `q = (u, 1)` for a unit vector `u` of
    /// `R^{n+1}`, with `o = (-u, 1) / 2`.
    ///
    /// The `R^n` basis is the image of `e_1, ..., e_n` under the Householder
    /// reflection taking `e_{n+1}` to `-u`; `u = -e_{n+1}` gives the canonical frame.
    pub fn with_infinity_direction(u: &[f64]) -> Result<Self> {
        let d = u.len();
        if d < 2 {
            return Err(Error::UnsupportedDimension(d.saturating_sub(1)));
        }
        let n = d - 1;
        let norm = u.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("infinity direction must be a unit vector".into()));
        }
        let w = DVector::from_iterator(d, u.iter().map(|c| -c));
        let mut v = -w.clone();
        v[n] += 1.0;
        let vv = v.norm_squared();
        let reflect = |x: &DVector<f64>| -> DVector<f64> {
            if vv < 1e-30 {
                x.clone()
            } else {
                x - &v * (2.0 * v.dot(x) / vv)
            }
        };
        let basis = (0..n)
            .map(|k| {
                let mut e = DVector::zeros(d);
                e[k] = 1.0;
                let r = reflect(&e);
                let mut coords = r.as_slice().to_vec();
                coords.push(0.0);
                MinkVector(DVector::from_vec(coords))
            })
            .collect();
        let mut q: Vec<f64> = u.to_vec();
        q.push(1.0);
        let mut o: Vec<f64> = u.iter().map(|c| -0.5 * c).collect();
        o.push(0.5);
        Ok(Self {
            o: MinkVector(DVector::from_vec(o)),
            q: MinkVector(DVector::from_vec(q)),
            basis,
        })
    }

    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn o(&self) -> &MinkVector {
        &self.o
    }

    pub fn q(&self) -> &MinkVector {
        &self.q
    }

    pub fn basis(&self) -> &[MinkVector] {
        &self.basis
    }

    fn embed(&self, x: &[f64]) -> MinkVector {
        let mut v = MinkVector::zeros(self.n());
        for (b, c) in self.basis.iter().zip(x) {
            v.add_scaled(*c, b);
        }
        v
    }

    fn coordinates(&self, v: &MinkVector) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.basis.iter().map(|b| b.inner(v)))
    }
}

/// Euclidean lift `xi = o + x + (x, x) q / 2`, a point of the light cone with
/// `(xi, q) = -1`.
pub fn euclidean_lift(x: &[f64], frame: &Frame) -> Result<MinkVector> {
    if x.len() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            actual: x.len(),
        });
    }
    let half_sq = 0.5 * x.iter().map(|c| c * c).sum::<f64>();
    let mut xi = frame.embed(x);
    xi.add_scaled(1.0, &frame.o);
    xi.add_scaled(half_sq, &frame.q);
    Ok(xi)
}

/// Derivative of the Euclidean lift along a curve: `x' + (x, x') q`.
pub fn euclidean_lift_velocity(x: &[f64], dx: &[f64], frame: &Frame) -> Result<MinkVector> {
    if x.len() != frame.n() || dx.len() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            actual: x.len().max(dx.len()),
        });
    }
    let dot: f64 = x.iter().zip(dx).map(|(a, b)| a * b).sum();
    let mut v = frame.embed(dx);
    v.add_scaled(dot, &frame.q);
    Ok(v)
}

fn check_finite_point(xi: &MinkVector, frame: &Frame) -> Result<f64> {
    let a = -xi.inner(&frame.q);
    if a.abs() <= INFINITY_TOL * xi.euclid_norm() {
        return Err(Error::PointAtInfinity(a));
    }
    Ok(a)
}

/// Point of `R^n` represented by the projective point `<xi>`.
pub fn affine_point(xi: &MinkVector, frame: &Frame) -> Result<DVector<f64>> {
    let a = check_finite_point(xi, frame)?;
    Ok(frame.coordinates(xi) / a)
}

/// Velocity of the projected curve given a lift and its derivative.
pub fn affine_velocity(xi: &MinkVector, dxi: &MinkVector, frame: &Frame) -> Result<DVector<f64>> {
    let a = check_finite_point(xi, frame)?;
    let da = -dxi.inner(&frame.q);
    Ok(frame.coordinates(dxi) / a - frame.coordinates(xi) * (da / (a * a)))
}

/// `(xi ^ eta)(y) = (y, xi) eta - (y, eta) xi`.
pub fn wedge_action(xi: &MinkVector, eta: &MinkVector, y: &MinkVector) -> MinkVector {
    let mut out = eta.scale(y.inner(xi));
    out.add_scaled(-y.inner(eta), xi);
    out
}

/// Skew endomorphism of `R^{n+1,1}` (an element of `o(n+1,1)`).
#[derive(Clone, Debug, PartialEq)]
pub struct SkewOp(DMatrix<f64>);

impl SkewOp {
    pub fn zero(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Matrix of `xi ^ eta`.
    pub fn wedge(xi: &MinkVector, eta: &MinkVector) -> Self {
        let g = minkowski_form(xi.dim());
        let gx = &g * xi.coords();
        let ge = &g * eta.coords();
        Self(eta.coords() * gx.transpose() - xi.coords() * ge.transpose())
    }

    /// Wraps a matrix that the caller knows to be skew w.r.t. the Minkowski form.
    pub fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn apply(&self, v: &MinkVector) -> MinkVector {
        MinkVector(&self.0 * v.coords())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(&self.0 * a)
    }

    /// `max |(Av, w) + (v, Aw)|` over coordinate basis pairs, i.e. the
    /// deviation of `G A` from antisymmetry.
    pub fn skewness_residual(&self) -> f64 {
        let g = minkowski_form(self.0.nrows());
        let ga = &g * &self.0;
        (&ga + ga.transpose()).amax()
    }
}

impl Linear for SkewOp {
    fn zero_like(&self) -> Self {
        Self(DMatrix::zeros(self.0.nrows(), self.0.ncols()))
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        self.0.add_scaled(a, &other.0);
    }
}

/// Element of `O(n+1,1)` stored as a dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoMap(DMatrix<f64>);

impl OrthoMap {
    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn apply(&self, v: &MinkVector) -> MinkVector {
        MinkVector(&self.0 * v.coords())
    }

    pub fn compose(&self, other: &OrthoMap) -> OrthoMap {
        OrthoMap(&self.0 * &other.0)
    }

    /// `G T^t G`, the inverse of a metric-preserving map.
    pub fn inverse(&self) -> OrthoMap {
        let g = minkowski_form(self.dim());
        OrthoMap(&g * self.0.transpose() * &g)
    }

    /// `max |(T e_i, T e_j) - (e_i, e_j)|`.
    pub fn metric_drift(&self) -> f64 {
        let g = minkowski_form(self.dim());
        (self.0.transpose() * &g * &self.0 - g).amax()
    }

    /// One step `T <- T (3 I - G T^t G T) / 2` towards `O(n+1,1)`.
    pub fn reorthogonalize(&mut self) {
        let dim = self.dim();
        let g = minkowski_form(dim);
        let defect = &g * self.0.transpose() * &g * &self.0;
        let correction = (DMatrix::identity(dim, dim) * 3.0 - defect) * 0.5;
        self.0 = &self.0 * correction;
    }

    /// `T A T^{-1}`.
    pub fn conjugate(&self, a: &SkewOp) -> SkewOp {
        SkewOp(&self.0 * a.matrix() * self.inverse().0)
    }
}

/// Coefficients of `u ^ v` on the basis `e_a ^ e_b`, `a < b`.
pub fn bivector(u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let d = u.len();
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for a in 0..d {
        for b in a + 1..d {
            out.push(u[a] * v[b] - u[b] * v[a]);
        }
    }
    DVector::from_vec(out)
}

/// Projection onto `<xi>` along `<xi_hat> + <xi, xi_hat>^perp`:
/// `pi(v) = (v, xi_hat) / (xi, xi_hat) xi`.
pub fn line_projection(v: &MinkVector, xi: &MinkVector, xi_hat: &MinkVector) -> Result<MinkVector> {
    let pairing = xi.inner(xi_hat);
    if pairing.abs() <= LIGHTLIKE_TOL * xi.euclid_norm() * xi_hat.euclid_norm() {
        return Err(Error::NonComplementary(pairing));
    }
    Ok(xi.scale(v.inner(xi_hat) / pairing))
}
