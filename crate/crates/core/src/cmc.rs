//! Mixed area, Koenigs duality, linear conserved quantities and mixed-area
//! mean curvature of semi-discrete surfaces.
//!
//! 2-vectors are stored by their coefficients on `e_a ^ e_b`, `a < b`, and
//! compared in the Euclidean coefficient inner product.

use nalgebra::DVector;

use crate::darboux::{connection_coeff, gauge_map, LightConeSection};
use crate::error::{Error, Result};
use crate::minkowski::{bivector, euclidean_lift, line_projection, Metric, MinkVector};
use crate::numerics::{fd_derivative, median};
use crate::surface::SemiDiscreteSurface;

/// Relative angle above which two area elements count as non-parallel.
pub const PARALLEL_TOL: f64 = 1e-6;
/// Tolerance of the tangent plane congruence constraints.
pub const CONGRUENCE_TOL: f64 = 1e-10;
/// Spectral parameters at which the full loop conditions are sampled.
pub const LOOP_PARAMS: [f64; 3] = [-1.0, 0.5, 2.0];

/// Per-curve sampled vector field with its `s`-derivative.
#[derive(Clone, Debug)]
pub struct NetField {
    pub metric: Metric,
    pub values: Vec<Vec<DVector<f64>>>,
    pub derivs: Vec<Vec<DVector<f64>>>,
}

impl NetField {
    /// Derivatives by fourth-order finite differences along each curve.
    pub fn from_samples(metric: Metric, h: f64, values: Vec<Vec<DVector<f64>>>) -> Result<Self> {
        let derivs = values
            .iter()
            .map(|v| fd_derivative(v, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { metric, values, derivs })
    }

    pub fn affine(s: &SemiDiscreteSurface) -> Self {
        Self {
            metric: Metric::Euclidean,
            values: s.curves().iter().map(|c| c.x().to_vec()).collect(),
            derivs: s.curves().iter().map(|c| c.xprime().to_vec()).collect(),
        }
    }

    pub fn from_sections(sections: &[LightConeSection]) -> Self {
        let grab = |f: fn(&LightConeSection) -> &[MinkVector]| {
            sections
                .iter()
                .map(|sec| f(sec).iter().map(|v| v.coords().clone()).collect())
                .collect()
        };
        Self {
            metric: Metric::Minkowski,
            values: grab(LightConeSection::xi),
            derivs: grab(LightConeSection::dxi),
        }
    }

    /// Euclidean lifts of the curves of `s`.
    pub fn lifts(s: &SemiDiscreteSurface) -> Result<Self> {
        Ok(Self::from_sections(s.lifts()?))
    }

    pub fn scaled(&self, a: f64) -> Self {
        let sc = |f: &Vec<Vec<DVector<f64>>>| f.iter().map(|c| c.iter().map(|v| v * a).collect()).collect();
        Self {
            metric: self.metric,
            values: sc(&self.values),
            derivs: sc(&self.derivs),
        }
    }

    pub fn curves(&self) -> usize {
        self.values.len()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        let shape = |f: &Self| (f.values.len(), f.values.first().map_or(0, Vec::len));
        if shape(self) != shape(other) || self.metric != other.metric {
            return Err(Error::InvalidInput("fields live on different nets".into()));
        }
        Ok(())
    }
}

/// `A(x, z)` per edge and sample.
#[derive(Clone, Debug)]
pub struct MixedAreaElement {
    pub edges: Vec<Vec<DVector<f64>>>,
    /// `(|x'_{ij}| |d z| + |z'_{ij}| |d x|) / 2` per edge and sample, the size
    /// the element would have if nothing cancelled.
    pub scale: Vec<Vec<f64>>,
}

impl MixedAreaElement {
    /// Largest `|A| / scale` over all edges and samples.
    pub fn relative_max(&self) -> f64 {
        self.edges
            .iter()
            .zip(&self.scale)
            .flat_map(|(e, s)| e.iter().zip(s).map(|(a, s)| a.norm() / s.max(f64::MIN_POSITIVE)))
            .fold(0.0, f64::max)
    }
}

/// `A(x, z) = (x'_{ij} ^ d_{ij} z + z'_{ij} ^ d_{ij} x) / 2` with
/// `f_{ij} = (f_i + f_j) / 2` and `d_{ij} f = f_j - f_i`.
pub fn mixed_area(x: &NetField, z: &NetField) -> Result<MixedAreaElement> {
    x.check_compatible(z)?;
    let mut edges = Vec::new();
    let mut scale = Vec::new();
    for i in 0..x.curves().saturating_sub(1) {
        let (mut e, mut sc) = (Vec::new(), Vec::new());
        for k in 0..x.values[i].len() {
            let xm = (&x.derivs[i][k] + &x.derivs[i + 1][k]) * 0.5;
            let zm = (&z.derivs[i][k] + &z.derivs[i + 1][k]) * 0.5;
            let dx = &x.values[i + 1][k] - &x.values[i][k];
            let dz = &z.values[i + 1][k] - &z.values[i][k];
            e.push((bivector(&xm, &dz) + bivector(&zm, &dx)) * 0.5);
            sc.push(0.5 * (xm.norm() * dz.norm() + zm.norm() * dx.norm()));
        }
        edges.push(e);
        scale.push(sc);
    }
    Ok(MixedAreaElement { edges, scale })
}

/// Christoffel pairs are exactly the nets with vanishing mixed area. The
/// residual is scale invariant in both arguments.
pub fn is_christoffel_pair_mixed_area(x: &NetField, z: &NetField, tol: f64) -> Result<(bool, f64)> {
    let r = mixed_area(x, z)?.relative_max();
    Ok((r < tol, r))
}

/// Christoffel dual of the lifted surface inside `R^{n+1,1}`:
/// `z' = x' / (m (x', x'))` along curve 0 from the origin and
/// `d_{ij} z = d_{ij} x / (mu_ij (d_{ij} x, d_{ij} x))` across edges.
pub fn lifted_christoffel_dual(s: &SemiDiscreteSurface, policy: crate::numerics::StepPolicy) -> Result<NetField> {
    let x = NetField::lifts(s)?;
    let metric = Metric::Minkowski;
    let dim = s.n() + 2;
    let (z0, dz0) = crate::transforms::christoffel_dual_samples(
        s.grid(),
        &x.derivs[0],
        s.m(),
        metric,
        DVector::zeros(dim),
        policy,
    )?;
    let mut values = vec![z0];
    let mut derivs = vec![dz0];
    for (e, &mu) in s.mu().iter().enumerate() {
        if mu == 0.0 {
            return Err(Error::ParameterCollision {
                t: 0.0,
                what: format!("the parameter of edge {e}"),
            });
        }
        let (mut zv, mut zd) = (Vec::new(), Vec::new());
        for k in 0..s.grid().len() {
            let d = &x.values[e + 1][k] - &x.values[e][k];
            let dd = &x.derivs[e + 1][k] - &x.derivs[e][k];
            let nsq = metric.inner(&d, &d);
            if nsq.abs() <= 1e-24 {
                return Err(Error::DegenerateSecant { norm: nsq.abs().sqrt() });
            }
            zv.push(&values[e][k] + &d / (mu * nsq));
            let dinv = &dd / nsq - &d * (2.0 * metric.inner(&d, &dd) / (nsq * nsq));
            zd.push(&derivs[e][k] + dinv / mu);
        }
        values.push(zv);
        derivs.push(zd);
    }
    Ok(NetField { metric, values, derivs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KoenigsReport {
    /// `z_i' = -x_i' / nu_i^2`.
    pub smooth: f64,
    /// `d_{ij} z = d_{ij} x / (nu_i nu_j)`.
    pub edge: f64,
    /// `(d_{ij} z)' = d_{ij}(z')` with `z'` from the smooth equation.
    pub integrability: f64,
    /// `d_{ij}(1/m) = 0` with `1/m = (x', x') / nu^2`.
    pub polarization: f64,
    /// `(1/mu_ij)' = 0` with `1/mu_ij = -(d x, d x) / (nu_i nu_j)`.
    pub edge_parameter: f64,
    /// `|alpha_ij^2 - a_i a_j| / alpha_ij^2` for the fitted parallel-net
    /// coefficients `z_i' = a_i x_i'`, `d z = alpha_ij d x`.
    pub factorization: f64,
}

impl KoenigsReport {
    pub fn worst(&self) -> f64 {
        [
            self.smooth,
            self.edge,
            self.integrability,
            self.polarization,
            self.edge_parameter,
            self.factorization,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn least_squares_ratio(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b) / b.norm_squared()
}

/// Residuals of the Koenigs equations for `x, z` with the function `nu`.
/// The relation `2 (x_i, x_j) = -(d x, d x)` of isotropic nets is used for
/// `1/mu`, so the same formulas apply to affine data.
pub fn verify_koenigs(x: &NetField, z: &NetField, nu: &[Vec<f64>], h: f64) -> Result<KoenigsReport> {
    x.check_compatible(z)?;
    if nu.len() != x.curves() || nu.iter().zip(&x.values).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::InvalidInput("nu does not match the net".into()));
    }
    if nu.iter().flatten().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput("nu must be finite and non-zero".into()));
    }
    let g = x.metric;
    let mut rep = KoenigsReport {
        smooth: 0.0,
        edge: 0.0,
        integrability: 0.0,
        polarization: 0.0,
        edge_parameter: 0.0,
        factorization: 0.0,
    };
    for i in 0..x.curves() {
        for k in 0..nu[i].len() {
            let target = &x.derivs[i][k] * (-1.0 / (nu[i][k] * nu[i][k]));
            rep.smooth = rep.smooth.max((&z.derivs[i][k] - &target).norm() / target.norm());
        }
    }
    for i in 0..x.curves().saturating_sub(1) {
        let j = i + 1;
        let len = nu[i].len();
        let dz: Vec<DVector<f64>> = (0..len).map(|k| &z.values[j][k] - &z.values[i][k]).collect();
        let ddz = fd_derivative(&dz, h)?;
        let mut inv_m_jump: f64 = 0.0;
        let mut inv_mu = Vec::with_capacity(len);
        for k in 0..len {
            let (ni, nj) = (nu[i][k], nu[j][k]);
            let dx = &x.values[j][k] - &x.values[i][k];
            let target = &dx / (ni * nj);
            rep.edge = rep.edge.max((&dz[k] - &target).norm() / target.norm());
            let zpi = &x.derivs[i][k] * (-1.0 / (ni * ni));
            let zpj = &x.derivs[j][k] * (-1.0 / (nj * nj));
            let d_zp = &zpj - &zpi;
            let scale = zpi.norm() + zpj.norm();
            rep.integrability = rep.integrability.max((&ddz[k] - d_zp).norm() / scale);
            let inv_mi = g.inner(&x.derivs[i][k], &x.derivs[i][k]) / (ni * ni);
            let inv_mj = g.inner(&x.derivs[j][k], &x.derivs[j][k]) / (nj * nj);
            inv_m_jump = inv_m_jump.max((inv_mj - inv_mi).abs() / inv_mi.abs().max(inv_mj.abs()));
            inv_mu.push(-g.inner(&dx, &dx) / (ni * nj));
            let a_i = least_squares_ratio(&z.derivs[i][k], &x.derivs[i][k]);
            let a_j = least_squares_ratio(&z.derivs[j][k], &x.derivs[j][k]);
            let alpha = least_squares_ratio(&dz[k], &dx);
            rep.factorization = rep.factorization.max((alpha * alpha - a_i * a_j).abs() / (alpha * alpha));
        }
        rep.polarization = rep.polarization.max(inv_m_jump);
        let d_inv_mu = fd_derivative(&inv_mu, h)?;
        let size = inv_mu.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        rep.edge_parameter = rep
            .edge_parameter
            .max(d_inv_mu.iter().fold(0.0_f64, |a, v| a.max(v.abs())) / size);
    }
    Ok(rep)
}

/// Koenigs data of an isothermic surface with `m > 0`: the lifted net, its
/// dual `z = -x*` and the signed `nu` with `nu_i nu_j = -mu_ij (d x, d x)`.
pub fn koenigs_data(
    s: &SemiDiscreteSurface,
    policy: crate::numerics::StepPolicy,
) -> Result<(NetField, NetField, Vec<Vec<f64>>)> {
    if s.m().iter().any(|&m| m <= 0.0) {
        return Err(Error::InvalidInput("Koenigs data needs m > 0".into()));
    }
    let x = NetField::lifts(s)?;
    let z = lifted_christoffel_dual(s, policy)?.scaled(-1.0);
    let mut nu: Vec<Vec<f64>> = Vec::with_capacity(x.curves());
    let mut sign = 1.0;
    for (i, d) in x.derivs.iter().enumerate() {
        if i > 0 {
            sign *= -s.mu()[i - 1].signum();
        }
        nu.push(
            d.iter()
                .zip(s.m())
                .map(|(v, m)| sign * (m * Metric::Minkowski.inner(v, v)).sqrt())
                .collect(),
        );
    }
    Ok((x, z, nu))
}

/// `n` with `(n, n) = 1`, `n` orthogonal to `q` and to the lift.
#[derive(Clone, Debug)]
pub struct TangentPlaneCongruence {
    pub n: NetField,
}

impl TangentPlaneCongruence {
    /// Validates the constraints against the Euclidean lifts of `s`.
    pub fn new(s: &SemiDiscreteSurface, n: NetField) -> Result<Self> {
        let lifts = s.lifts()?;
        if n.curves() != lifts.len() || n.metric != Metric::Minkowski {
            return Err(Error::InvalidInput("normal field does not match the surface".into()));
        }
        let frame = s.frame();
        let q = frame.q().coords();
        for (i, (vals, lift)) in n.values.iter().zip(lifts).enumerate() {
            if vals.len() != lift.len() {
                return Err(Error::InvalidInput(format!("normal field of curve {i} has the wrong length")));
            }
            for (k, (v, xi)) in vals.iter().zip(lift.xi()).enumerate() {
                let g = Metric::Minkowski;
                let bad = [
                    (g.inner(v, v) - 1.0).abs(),
                    g.inner(v, q).abs(),
                    g.inner(v, xi.coords()).abs() / xi.euclid_norm(),
                ];
                if bad.iter().any(|b| *b > CONGRUENCE_TOL) {
                    return Err(Error::InvalidInput(format!(
                        "normal of curve {i} violates the congruence constraints at sample {k}"
                    )));
                }
            }
        }
        Ok(Self { n })
    }

    /// `n = N + (x, N) q` from Euclidean unit normals `N`; derivatives by
    /// finite differences.
    pub fn from_euclidean_normals(s: &SemiDiscreteSurface, normals: &[Vec<DVector<f64>>]) -> Result<Self> {
        let frame = s.frame();
        let origin = euclidean_lift(&vec![0.0; s.n()], &frame)?;
        let values = s
            .curves()
            .iter()
            .zip(normals)
            .map(|(c, ns)| {
                c.x()
                    .iter()
                    .zip(ns)
                    .map(|(p, nv)| {
                        // lift of N minus the lift of the origin leaves N + |N|^2 q / 2
                        let mut v = euclidean_lift(nv.as_slice(), &frame)?.coords() - origin.coords();
                        v += frame.q().coords() * (p.dot(nv) - 0.5 * nv.norm_squared());
                        Ok(v)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(s, NetField::from_samples(Metric::Minkowski, s.grid().step(), values)?)
    }
}

/// `H = -A(x, n) / A(x, x)` per edge and sample, `x` the Euclidean lift.
pub fn mean_curvature(s: &SemiDiscreteSurface, tpc: &TangentPlaneCongruence) -> Result<Vec<Vec<f64>>> {
    let x = NetField::lifts(s)?;
    let axx = mixed_area(&x, &x)?;
    let axn = mixed_area(&x, &tpc.n)?;
    let mut out = Vec::with_capacity(axx.edges.len());
    for (e, ((bx, bn), sc)) in axx.edges.iter().zip(&axn.edges).zip(&axx.scale).enumerate() {
        let mut hs = Vec::with_capacity(bx.len());
        for ((b, a), sc) in bx.iter().zip(bn).zip(sc) {
            let bb = b.norm_squared();
            if b.norm() <= 1e-12 * sc.max(f64::MIN_POSITIVE) {
                return Err(Error::DegenerateEdge { edge: e });
            }
            let lambda = a.dot(b) / bb;
            let rest = (a - b * lambda).norm();
            if rest > PARALLEL_TOL * a.norm().max(b.norm() * lambda.abs()) && rest > 1e-12 * b.norm() {
                return Err(Error::NonParallel {
                    angle: rest / a.norm(),
                });
            }
            hs.push(-lambda);
        }
        out.push(hs);
    }
    Ok(out)
}

/// `p(t) = z t + q` of degree 1.
#[derive(Clone, Debug)]
pub struct ConservedQuantity {
    pub z: Vec<Vec<MinkVector>>,
    pub q: MinkVector,
    pub degree: usize,
}

impl ConservedQuantity {
    pub fn new(z: Vec<Vec<MinkVector>>, q: MinkVector, degree: usize) -> Result<Self> {
        if degree != 1 {
            return Err(Error::UnsupportedDegree(degree));
        }
        Ok(Self { z, q, degree })
    }

    pub fn at(&self, i: usize, k: usize, t: f64) -> MinkVector {
        let mut p = self.z[i][k].scale(t);
        crate::numerics::Linear::add_scaled(&mut p, 1.0, &self.q);
        p
    }
}

/// Residuals of the conserved-quantity conditions, each relative to
/// `max |z| + |q|` (Euclidean coefficient norms).
#[derive(Clone, Debug, PartialEq)]
pub struct CqReport {
    /// `(z, xi)` and `(z, xi')`.
    pub orthogonality: f64,
    /// `d_{ij} z - (pi_i - pi_j) q / mu_ij`.
    pub edge: f64,
    /// `z' - 2 ((q, xi) xi' - (q, xi') xi) / (m (xi', xi'))`.
    pub smooth: f64,
    /// `p_i - Gamma^t_{ij} p_j` and `p' - A(t) p` at [`LOOP_PARAMS`].
    pub transport: f64,
    /// Spread of the coefficients `|z|^2` and `(z, q)` of `|p(t)|^2`.
    pub norm_coefficients: f64,
}

impl CqReport {
    pub fn worst(&self) -> f64 {
        self.orthogonality
            .max(self.edge)
            .max(self.smooth)
            .max(self.transport)
            .max(self.norm_coefficients)
    }
}

fn spread(values: &[f64]) -> f64 {
    let c = median(values);
    values.iter().fold(0.0, |a, v| a.max((v - c).abs()))
}

pub fn conserved_quantity_residual(s: &SemiDiscreteSurface, cq: &ConservedQuantity) -> Result<CqReport> {
    let lifts = s.lifts()?;
    if cq.z.len() != lifts.len() || cq.z.iter().zip(lifts).any(|(z, l)| z.len() != l.len()) {
        return Err(Error::InvalidInput("conserved quantity does not match the surface".into()));
    }
    if cq.q.dim() != s.n() + 2 {
        return Err(Error::DimensionMismatch {
            expected: s.n() + 2,
            actual: cq.q.dim(),
        });
    }
    let h = s.grid().step();
    let m = s.m();
    let q = &cq.q;
    let scale = cq.z.iter().flatten().fold(0.0_f64, |a, v| a.max(v.euclid_norm())) + q.euclid_norm();
    let mut rep = CqReport {
        orthogonality: 0.0,
        edge: 0.0,
        smooth: 0.0,
        transport: 0.0,
        norm_coefficients: 0.0,
    };
    let (mut zz, mut zq) = (Vec::new(), Vec::new());
    for (i, lift) in lifts.iter().enumerate() {
        let dz = fd_derivative(&cq.z[i], h)?;
        for k in 0..lift.len() {
            let (xi, dxi, z) = (&lift.xi()[k], &lift.dxi()[k], &cq.z[i][k]);
            rep.orthogonality = rep
                .orthogonality
                .max(z.inner(xi).abs() / xi.euclid_norm())
                .max(z.inner(dxi).abs() / dxi.euclid_norm());
            let mut rhs = dxi.scale(q.inner(xi));
            crate::numerics::Linear::add_scaled(&mut rhs, -q.inner(dxi), xi);
            let rhs = rhs.scale(2.0 / (m[k] * dxi.norm_sq()));
            rep.smooth = rep.smooth.max((&dz[k] - &rhs).euclid_norm());
            zz.push(z.norm_sq());
            zq.push(z.inner(q));
        }
        for &t in &LOOP_PARAMS {
            let p: Vec<MinkVector> = (0..lift.len()).map(|k| cq.at(i, k, t)).collect();
            let dp = fd_derivative(&p, h)?;
            for k in 0..lift.len() {
                let a = connection_coeff(&lift.xi()[k], &lift.dxi()[k], m[k], t)?;
                let r = (&dp[k] - &a.apply(&p[k])).euclid_norm() / t.abs().max(1.0);
                rep.transport = rep.transport.max(r);
            }
        }
    }
    for (e, pair) in lifts.windows(2).enumerate() {
        let mu = s.mu()[e];
        for k in 0..pair[0].len() {
            let (xi, xj) = (&pair[0].xi()[k], &pair[1].xi()[k]);
            let pi_i = line_projection(q, xi, xj)?;
            let pi_j = line_projection(q, xj, xi)?;
            let target = (&pi_i - &pi_j).scale(1.0 / mu);
            let dz = &cq.z[e + 1][k] - &cq.z[e][k];
            rep.edge = rep.edge.max((&dz - &target).euclid_norm());
            for &t in LOOP_PARAMS.iter().filter(|&&t| t != mu) {
                let g = gauge_map(xj, xi, 1.0 - t / mu)?;
                let r = (&cq.at(e, k, t) - &g.apply(&cq.at(e + 1, k, t))).euclid_norm();
                rep.transport = rep.transport.max(r / t.abs().max(1.0));
            }
        }
    }
    rep.norm_coefficients = spread(&zz).max(spread(&zq));
    rep.orthogonality /= scale;
    rep.edge /= scale;
    rep.smooth /= scale;
    rep.transport /= scale;
    rep.norm_coefficients /= scale * scale;
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct CmcCertificate {
    pub cq: ConservedQuantity,
    pub residuals: CqReport,
    /// `max | |z|^2 - 1 |`.
    pub unit_norm: f64,
    /// `max |H + (z, q)|`.
    pub h_agreement: f64,
    /// Relative mixed area `A(x, z)`: `z` is a Christoffel dual of `x`.
    pub christoffel: f64,
}

/// `z = n + H x` with `q` the frame's point at infinity.
pub fn cmc_linear_cq(s: &SemiDiscreteSurface, tpc: &TangentPlaneCongruence, h: f64) -> Result<CmcCertificate> {
    let x = NetField::lifts(s)?;
    let zvals: Vec<Vec<DVector<f64>>> = x
        .values
        .iter()
        .zip(&tpc.n.values)
        .map(|(xs, ns)| xs.iter().zip(ns).map(|(xv, nv)| nv + xv * h).collect())
        .collect();
    let zfield = NetField {
        metric: Metric::Minkowski,
        values: zvals.clone(),
        derivs: x
            .derivs
            .iter()
            .zip(&tpc.n.derivs)
            .map(|(xs, ns)| xs.iter().zip(ns).map(|(xv, nv)| nv + xv * h).collect())
            .collect(),
    };
    let z: Vec<Vec<MinkVector>> = zvals
        .into_iter()
        .map(|c| c.into_iter().map(MinkVector::from_dvector).collect())
        .collect();
    let q = s.frame().q().clone();
    let cq = ConservedQuantity::new(z, q, 1)?;
    let residuals = conserved_quantity_residual(s, &cq)?;
    let unit_norm = cq.z.iter().flatten().fold(0.0_f64, |a, v| a.max((v.norm_sq() - 1.0).abs()));
    let h_agreement = cq
        .z
        .iter()
        .flatten()
        .fold(0.0_f64, |a, v| a.max((h + v.inner(&cq.q)).abs()));
    let christoffel = if x.curves() > 1 { mixed_area(&x, &zfield)?.relative_max() } else { 0.0 };
    Ok(CmcCertificate {
        cq,
        residuals,
        unit_norm,
        h_agreement,
        christoffel,
    })
}
