//! Tangent cross ratios, the Riccati equation, the isothermic family of
//! connections with its parallel sections, and gauge maps.

use nalgebra::{DMatrix, DVector};

use crate::clifford::{sandwich_inverse, Multivector, DEGENERACY_TOL};
use crate::curves::{Grid, PolarizedCurve};
use crate::error::{Error, Result};
use crate::minkowski::{
    affine_point, affine_velocity, euclidean_lift, euclidean_lift_velocity, line_projection,
    Frame, MinkVector, OrthoMap, SkewOp, LIGHTLIKE_TOL,
};
use crate::numerics::{fd_derivative, median, rk4_on_grid, Interpolant, Linear, StepPolicy};

/// Threshold on `|(xi_hat, q)| / |xi_hat|` below which a sample cannot be
/// projected to `R^n`.
pub const UNPROJECTABLE_TOL: f64 = 1e-8;

/// How the lift of a section is scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `(xi, q) = -1`.
    Euclidean,
    /// `m (xi', xi') = 1`.
    Moutard,
    Raw,
}

/// Sampled light-cone lift `xi: I -> L^{n+1}` with its derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct LightConeSection {
    grid: Grid,
    xi: Vec<MinkVector>,
    dxi: Vec<MinkVector>,
    normalization: Normalization,
}

impl LightConeSection {
    /// Samples of a lift; derivatives are taken by finite differences when
    /// `dxi` is absent.
    pub fn new(
        grid: Grid,
        xi: Vec<MinkVector>,
        dxi: Option<Vec<MinkVector>>,
        normalization: Normalization,
    ) -> Result<Self> {
        if xi.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: xi.len(),
            });
        }
        for v in &xi {
            if !v.is_lightlike(LIGHTLIKE_TOL) {
                return Err(Error::InvalidInput(format!(
                    "section leaves the light cone: (xi, xi) = {:e}",
                    v.norm_sq()
                )));
            }
        }
        let dxi = match dxi {
            Some(d) if d.len() == grid.len() => d,
            Some(d) => {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    actual: d.len(),
                })
            }
            None => fd_derivative(&xi, grid.step())?,
        };
        Ok(Self {
            grid,
            xi,
            dxi,
            normalization,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn xi(&self) -> &[MinkVector] {
        &self.xi
    }

    pub fn dxi(&self) -> &[MinkVector] {
        &self.dxi
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Largest relative light-cone defect `|(xi, xi)| / |xi|^2`.
    pub fn lightcone_defect(&self) -> f64 {
        self.xi
            .iter()
            .map(|v| v.norm_sq().abs() / v.coords().norm_squared())
            .fold(0.0, f64::max)
    }

    /// Indices of samples too close to the point at infinity of `frame`.
    pub fn unprojectable(&self, frame: &Frame) -> Vec<usize> {
        self.xi
            .iter()
            .enumerate()
            .filter(|(_, v)| v.inner(frame.q()).abs() < UNPROJECTABLE_TOL * v.euclid_norm())
            .map(|(k, _)| k)
            .collect()
    }

    /// Projection to `R^n`, failing on the first unprojectable sample.
    pub fn to_curve(&self, frame: &Frame, m: &[f64]) -> Result<PolarizedCurve> {
        if let Some(&k) = self.unprojectable(frame).first() {
            return Err(Error::SingularEncounter {
                s: self.grid.node(k),
                reason: "section passes through the point at infinity".into(),
            });
        }
        let mut x = Vec::with_capacity(self.len());
        let mut d = Vec::with_capacity(self.len());
        for (xi, dxi) in self.xi.iter().zip(&self.dxi) {
            x.push(affine_point(xi, frame)?);
            d.push(affine_velocity(xi, dxi, frame)?);
        }
        PolarizedCurve::new(self.grid, x, m.to_vec(), Some(d))
    }

    /// Affine points where projectable.
    pub fn affine_points(&self, frame: &Frame) -> Vec<Option<DVector<f64>>> {
        let bad = self.unprojectable(frame);
        self.xi
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if bad.contains(&k) {
                    None
                } else {
                    affine_point(v, frame).ok()
                }
            })
            .collect()
    }

    /// Applies a sampled family of linear maps, with the product-rule
    /// derivative when `dmaps` is given.
    pub fn transformed(
        &self,
        maps: &[OrthoMap],
        dmaps: Option<&[DMatrix<f64>]>,
    ) -> Result<LightConeSection> {
        let xi: Vec<MinkVector> = maps.iter().zip(&self.xi).map(|(t, v)| t.apply(v)).collect();
        let dxi = dmaps.map(|dm| {
            maps.iter()
                .zip(dm)
                .zip(self.xi.iter().zip(&self.dxi))
                .map(|((t, dt), (v, dv))| {
                    MinkVector::from_dvector(dt * v.coords() + t.matrix() * dv.coords())
                })
                .collect()
        });
        LightConeSection::new(self.grid, xi, dxi, Normalization::Raw)
    }
}

/// Euclidean lift of a curve with the exact derivative of the lift.
pub fn lift_curve(c: &PolarizedCurve, frame: &Frame) -> Result<LightConeSection> {
    let mut xi = Vec::with_capacity(c.len());
    let mut dxi = Vec::with_capacity(c.len());
    for (x, d) in c.x().iter().zip(c.xprime()) {
        xi.push(euclidean_lift(x.as_slice(), frame)?);
        dxi.push(euclidean_lift_velocity(x.as_slice(), d.as_slice(), frame)?);
    }
    LightConeSection::new(*c.grid(), xi, Some(dxi), Normalization::Euclidean)
}

fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::InvalidGrid("curves are sampled on different grids".into()));
    }
    Ok(())
}

fn mv(v: &DVector<f64>) -> Result<Multivector> {
    Multivector::vector(v.as_slice())
}

/// `cr = x' (x - x_hat)^{-1} x_hat' (x - x_hat)^{-1}` at every sample.
pub fn tangent_cross_ratio(x: &PolarizedCurve, xh: &PolarizedCurve) -> Result<Vec<Multivector>> {
    check_same_grid(x.grid(), xh.grid())?;
    if x.n() != xh.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            actual: xh.n(),
        });
    }
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let secant = &x.x()[k] - &xh.x()[k];
        let scale = x.x()[k].norm().max(xh.x()[k].norm());
        let inv = mv(&secant)?
            .vector_inverse_scaled(scale)
            .map_err(|_| Error::IntersectingCurves {
                index: k,
                s: x.grid().node(k),
            })?;
        let cr = mv(&x.xprime()[k])?
            .geometric_product(&inv)?
            .geometric_product(&mv(&xh.xprime()[k])?)?
            .geometric_product(&inv)?;
        out.push(cr);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RibaucourReport {
    pub passed: bool,
    /// Largest ratio of non-scalar to total magnitude of the cross ratio.
    pub residual: f64,
}

pub fn is_ribaucour(x: &PolarizedCurve, xh: &PolarizedCurve, tol: f64) -> Result<RibaucourReport> {
    let residual = reality_residual(&tangent_cross_ratio(x, xh)?);
    Ok(RibaucourReport {
        passed: residual < tol,
        residual,
    })
}

fn reality_residual(cr: &[Multivector]) -> f64 {
    cr.iter()
        .map(|c| c.non_scalar_norm() / c.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DarbouxReport {
    pub passed: bool,
    /// Median of `cr * m`.
    pub mu: f64,
    /// `max |cr m - mu| / |mu|`.
    pub residual: f64,
    pub reality: f64,
}

/// Fits `mu` to `cr * m` and reports how far the product is from constant.
pub fn is_darboux_pair(
    x: &PolarizedCurve,
    xh: &PolarizedCurve,
    m: &[f64],
    tol: f64,
) -> Result<DarbouxReport> {
    let cr = tangent_cross_ratio(x, xh)?;
    if m.len() != cr.len() {
        return Err(Error::DimensionMismatch {
            expected: cr.len(),
            actual: m.len(),
        });
    }
    let reality = reality_residual(&cr);
    let products: Vec<f64> = cr.iter().zip(m).map(|(c, m)| c.scalar_part() * m).collect();
    let mu = median(&products);
    let scale = if mu.abs() > 0.0 { mu.abs() } else { 1.0 };
    let residual = products
        .iter()
        .map(|v| (v - mu).abs() / scale)
        .fold(0.0, f64::max);
    Ok(DarbouxReport {
        passed: residual < tol && reality < tol,
        mu,
        residual,
        reality,
    })
}

/// Solves `x_hat' = mu (x_hat - x) (m x')^{-1} (x_hat - x)` by RK4.
pub fn integrate_riccati(
    x: &PolarizedCurve,
    mu: f64,
    start: &[f64],
    policy: StepPolicy,
) -> Result<PolarizedCurve> {
    if start.len() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            actual: start.len(),
        });
    }
    let grid = *x.grid();
    let px = Interpolant::new(grid, x.x())?;
    let pd = Interpolant::new(grid, x.xprime())?;
    let pm = Interpolant::new(grid, x.m())?;
    let scale = x.x().iter().map(|p| p.norm()).fold(1.0, f64::max);
    let rhs = |s: f64, xh: &DVector<f64>, xs: &DVector<f64>, ds: &DVector<f64>, ms: f64| {
        if xh.iter().any(|c| !c.is_finite()) {
            return Err(Error::SingularEncounter {
                s,
                reason: "transform escapes to infinity".into(),
            });
        }
        let secant = xh - xs;
        if secant.norm() <= DEGENERACY_TOL * scale {
            return Err(Error::SingularEncounter {
                s,
                reason: "transform meets the curve".into(),
            });
        }
        let v = sandwich_inverse(&mv(&secant)?, &mv(&(ds * ms))?)?;
        Ok(DVector::from_vec(v.vector_part()) * mu)
    };
    let xh = rk4_on_grid(
        &grid,
        policy,
        DVector::from_column_slice(start),
        |s, y| rhs(s, y, &px.at(s), &pd.at(s), pm.at(s)),
        |_, _, _| Ok(()),
    )?;
    let mut d = Vec::with_capacity(xh.len());
    for (k, p) in xh.iter().enumerate() {
        d.push(rhs(grid.node(k), p, &x.x()[k], &x.xprime()[k], x.m()[k])?);
    }
    PolarizedCurve::new(grid, xh, x.m().to_vec(), Some(d))
}

/// `A(s, t) = (2t / m) xi ^ xi' / (xi', xi')`, so that parallel sections solve
/// `xi_hat' = A xi_hat`.
pub fn connection_coeff(xi: &MinkVector, dxi: &MinkVector, m: f64, t: f64) -> Result<SkewOp> {
    if t == 0.0 {
        return Ok(SkewOp::zero(xi.dim()));
    }
    let nsq = dxi.norm_sq();
    if nsq.abs() <= DEGENERACY_TOL * dxi.coords().norm_squared() {
        return Err(Error::IsotropicTangent(nsq));
    }
    Ok(SkewOp::wedge(xi, dxi).scale(2.0 * t / (m * nsq)))
}

/// `A(s, t) v` without materializing the matrix.
fn connection_apply(xi: &MinkVector, dxi: &MinkVector, m: f64, t: f64, v: &MinkVector) -> Result<MinkVector> {
    if t == 0.0 {
        return Ok(v.zero_like());
    }
    let nsq = dxi.norm_sq();
    if nsq.abs() <= DEGENERACY_TOL * dxi.coords().norm_squared() {
        return Err(Error::IsotropicTangent(nsq));
    }
    let mut out = dxi.scale(v.inner(xi));
    out.add_scaled(-v.inner(dxi), xi);
    Ok(out.scale(2.0 * t / (m * nsq)))
}

/// Connection coefficients `A(s_k, t)` at every node of a curve lift.
pub fn connection_samples(lift: &LightConeSection, m: &[f64], t: f64) -> Result<Vec<SkewOp>> {
    lift.xi()
        .iter()
        .zip(lift.dxi())
        .zip(m)
        .map(|((xi, dxi), m)| connection_coeff(xi, dxi, *m, t))
        .collect()
}

/// Removes the light-cone defect along `q` (or `o` when `xi_hat` is close to
/// `<q>`); exact because `q` is lightlike.
pub fn restore_light_cone(v: &mut MinkVector, frame: &Frame) {
    let defect = v.norm_sq();
    if defect == 0.0 {
        return;
    }
    // Both o and q are null, so either gives an exact correction; the larger
    // pairing keeps it small.
    let (pq, po) = (v.inner(frame.q()), v.inner(frame.o()));
    let (dir, pairing) = if pq.abs() >= po.abs() { (frame.q(), pq) } else { (frame.o(), po) };
    if pairing != 0.0 {
        v.add_scaled(-defect / (2.0 * pairing), dir);
    }
}

/// Integrates `xi_hat' = A(s, t) xi_hat` along the lift of a curve, with the
/// connection evaluated between nodes by cubic interpolation of `xi`, `xi'`, `m`.
pub fn parallel_section_along(
    lift: &LightConeSection,
    m: &[f64],
    t: f64,
    start: &MinkVector,
    frame: &Frame,
    policy: StepPolicy,
) -> Result<LightConeSection> {
    if start.dim() != lift.xi()[0].dim() {
        return Err(Error::DimensionMismatch {
            expected: lift.xi()[0].dim(),
            actual: start.dim(),
        });
    }
    if !start.is_lightlike(LIGHTLIKE_TOL) {
        return Err(Error::InvalidInput("initial point is not lightlike".into()));
    }
    let grid = *lift.grid();
    let pxi = Interpolant::new(grid, lift.xi())?;
    let pdxi = Interpolant::new(grid, lift.dxi())?;
    let pm = Interpolant::new(grid, m)?;
    let section = rk4_on_grid(
        &grid,
        policy,
        start.clone(),
        |s, y| connection_apply(&pxi.at(s), &pdxi.at(s), pm.at(s), t, y),
        |_, y, _| {
            restore_light_cone(y, frame);
            Ok(())
        },
    )?;
    let mut dxi = Vec::with_capacity(section.len());
    for (k, y) in section.iter().enumerate() {
        dxi.push(connection_apply(&lift.xi()[k], &lift.dxi()[k], m[k], t, y)?);
    }
    LightConeSection::new(grid, section, Some(dxi), Normalization::Raw)
}

/// Darboux transform with parameter `t` through the point `start` of `R^n`,
/// as a parallel section over the Euclidean lift of `c`.
pub fn integrate_parallel_section(
    c: &PolarizedCurve,
    t: f64,
    start: &[f64],
    policy: StepPolicy,
) -> Result<LightConeSection> {
    let frame = Frame::canonical(c.n());
    let lift = lift_curve(c, &frame)?;
    let xi0 = euclidean_lift(start, &frame)?;
    parallel_section_along(&lift, c.m(), t, &xi0, &frame, policy)
}

/// Largest relative size of the part of `D xi_hat` not along `xi_hat`:
/// zero exactly when `<xi_hat>` is a projectively parallel section.
pub fn parallel_residual(
    lift: &LightConeSection,
    m: &[f64],
    t: f64,
    section: &LightConeSection,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..lift.len() {
        let y = &section.xi()[k];
        let a = connection_apply(&lift.xi()[k], &lift.dxi()[k], m[k], t, y)?;
        let dy = (section.dxi()[k].coords() - a.coords()).clone_owned();
        let yc = y.coords();
        let along = dy.dot(yc) / yc.norm_squared();
        let rest = dy - yc * along;
        worst = worst.max(rest.norm() / yc.norm());
    }
    Ok(worst)
}

/// `Gamma(r) = (1/r) pi + varpi + r pi_hat`: scales `<xi_hat>` by `r`, `<xi>`
/// by `1/r` and fixes `<xi, xi_hat>^perp`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeMap {
    xi: MinkVector,
    xi_hat: MinkVector,
    r: f64,
}

impl GaugeMap {
    pub fn new(xi: &MinkVector, xi_hat: &MinkVector, r: f64) -> Result<Self> {
        if r == 0.0 {
            return Err(Error::ZeroGaugeFactor);
        }
        let pairing = xi.inner(xi_hat);
        if pairing.abs() <= LIGHTLIKE_TOL * xi.euclid_norm() * xi_hat.euclid_norm() {
            return Err(Error::NonComplementary(pairing));
        }
        Ok(Self {
            xi: xi.clone(),
            xi_hat: xi_hat.clone(),
            r,
        })
    }

    pub fn apply(&self, v: &MinkVector) -> Result<MinkVector> {
        let p = line_projection(v, &self.xi, &self.xi_hat)?;
        let ph = line_projection(v, &self.xi_hat, &self.xi)?;
        let mut out = v.clone();
        out.add_scaled(1.0 / self.r - 1.0, &p);
        out.add_scaled(self.r - 1.0, &ph);
        Ok(out)
    }

    pub fn matrix(&self) -> OrthoMap {
        let dim = self.xi.dim();
        let g = crate::minkowski::minkowski_form(dim);
        let pairing = self.xi.inner(&self.xi_hat);
        let gx = &g * self.xi.coords();
        let gxh = &g * self.xi_hat.coords();
        let pi = self.xi.coords() * gxh.transpose() / pairing;
        let pi_hat = self.xi_hat.coords() * gx.transpose() / pairing;
        OrthoMap::from_matrix(
            DMatrix::identity(dim, dim) + pi * (1.0 / self.r - 1.0) + pi_hat * (self.r - 1.0),
        )
    }
}

/// Materialized gauge map `Gamma(r)` for the lines `<xi>`, `<xi_hat>`.
pub fn gauge_map(xi: &MinkVector, xi_hat: &MinkVector, r: f64) -> Result<OrthoMap> {
    Ok(GaugeMap::new(xi, xi_hat, r)?.matrix())
}

/// `max_s |A_hat - (Gamma' Gamma^{-1} + Gamma A Gamma^{-1})|` (Frobenius norm)
/// with `Gamma = gauge_map(xi, xi_hat, 1 - t/mu)` and `Gamma'` by finite
/// differences.
pub fn verify_gauge_relation(
    xi: &LightConeSection,
    xi_hat: &LightConeSection,
    m: &[f64],
    mu: f64,
    t: f64,
) -> Result<f64> {
    if t == mu {
        return Err(Error::ZeroGaugeFactor);
    }
    check_same_grid(xi.grid(), xi_hat.grid())?;
    let r = 1.0 - t / mu;
    let gammas: Vec<OrthoMap> = xi
        .xi()
        .iter()
        .zip(xi_hat.xi())
        .map(|(a, b)| gauge_map(a, b, r))
        .collect::<Result<_>>()?;
    let mats: Vec<DMatrix<f64>> = gammas.iter().map(|g| g.matrix().clone()).collect();
    let dgammas = fd_derivative(&mats, xi.grid().step())?;
    let a = connection_samples(xi, m, t)?;
    let a_hat = connection_samples(xi_hat, m, t)?;
    let mut worst: f64 = 0.0;
    for k in 0..xi.len() {
        let inv = gammas[k].inverse();
        let rhs = &dgammas[k] * inv.matrix() + gammas[k].conjugate(&a[k]).matrix();
        worst = worst.max((a_hat[k].matrix() - rhs).norm());
    }
    Ok(worst)
}

/// Where the tangents of `x` and `x_hat` at sample `k` meet in
/// `y = x + x'/r = x_hat + x_hat'/r_hat`, returns the measured `r_hat / r`
/// and the value `-(x_hat - x)^2 cr / x'^2` predicted from the cross ratio.
///
/// `None` when the tangents are (nearly) parallel or skew.
pub fn icrpoint_ratio(x: &PolarizedCurve, xh: &PolarizedCurve, k: usize) -> Result<Option<(f64, f64)>> {
    let cr = tangent_cross_ratio(x, xh)?[k].scalar_part();
    let p = &x.x()[k];
    let ph = &xh.x()[k];
    let d = &x.xprime()[k];
    let dh = &xh.xprime()[k];
    // p + a d = ph + b dh, least squares in (a, b)
    let n = p.len();
    let mut mat = DMatrix::zeros(n, 2);
    mat.set_column(0, d);
    mat.set_column(1, &(-dh));
    let rhs = ph - p;
    let normal = mat.transpose() * &mat;
    let det = normal.determinant();
    if det.abs() <= 1e-10 * d.norm_squared() * dh.norm_squared() {
        return Ok(None);
    }
    let Some(inv) = normal.try_inverse() else {
        return Ok(None);
    };
    let ab = inv * mat.transpose() * &rhs;
    let miss = (&mat * &ab - &rhs).norm();
    if miss > 1e-8 * rhs.norm().max(1.0) || ab[0] == 0.0 || ab[1] == 0.0 {
        return Ok(None);
    }
    // a = 1/r, b = 1/r_hat
    let measured = ab[0] / ab[1];
    let predicted = -rhs.norm_squared() * cr / d.norm_squared();
    Ok(Some((measured, predicted)))
}
