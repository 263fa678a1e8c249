//! Semi-discrete isothermic surfaces over path graphs: sequences of Darboux
//! transforms of polarized curves sharing one grid and one polarization.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::curves::{Grid, PolarizedCurve};
use crate::darboux::{
    gauge_map, integrate_parallel_section, is_darboux_pair, lift_curve, parallel_section_along,
    verify_gauge_relation, LightConeSection, Normalization,
};
use crate::error::{Error, Result};
use crate::minkowski::{bivector, euclidean_lift, Frame, OrthoMap, SkewOp};
use crate::numerics::{fd_derivative, median, StepPolicy};
use crate::transforms::{
    christoffel_darboux_permute, christoffel_dual, constancy_residual, dual_derivative_residual,
    integrate_calapso, MetricCorrection,
};

/// Relative tolerance for the shared polarization of all curves.
pub const SHARED_M_TOL: f64 = 1e-12;

/// Curves `x_0, ..., x_M` with edge parameters `mu_{i,i+1}`.
#[derive(Clone, Debug)]
pub struct SemiDiscreteSurface {
    curves: Vec<PolarizedCurve>,
    mu: Vec<f64>,
    lifts: OnceLock<Vec<LightConeSection>>,
}

impl SemiDiscreteSurface {
    pub fn new(curves: Vec<PolarizedCurve>, mu: Vec<f64>) -> Result<Self> {
        let Some(first) = curves.first() else {
            return Err(Error::InvalidInput("a surface needs at least one curve".into()));
        };
        if mu.len() + 1 != curves.len() {
            return Err(Error::InvalidInput(format!(
                "{} curves need {} edge parameters, got {}",
                curves.len(),
                curves.len() - 1,
                mu.len()
            )));
        }
        for (i, c) in curves.iter().enumerate().skip(1) {
            if c.grid() != first.grid() {
                return Err(Error::InvalidGrid(format!("curve {i} uses a different grid")));
            }
            if c.n() != first.n() {
                return Err(Error::DimensionMismatch {
                    expected: first.n(),
                    actual: c.n(),
                });
            }
            for (a, b) in c.m().iter().zip(first.m()) {
                if (a - b).abs() > SHARED_M_TOL * b.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "curve {i} does not share the polarization of curve 0"
                    )));
                }
            }
        }
        if let Some(k) = mu.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("edge parameter {k} is not finite")));
        }
        Ok(Self {
            curves,
            mu,
            lifts: OnceLock::new(),
        })
    }

    pub fn curves(&self) -> &[PolarizedCurve] {
        &self.curves
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn grid(&self) -> &Grid {
        self.curves[0].grid()
    }

    pub fn m(&self) -> &[f64] {
        self.curves[0].m()
    }

    pub fn n(&self) -> usize {
        self.curves[0].n()
    }

    pub fn frame(&self) -> Frame {
        Frame::canonical(self.n())
    }

    /// Euclidean lifts of all curves (computed once).
    pub fn lifts(&self) -> Result<&[LightConeSection]> {
        if let Some(l) = self.lifts.get() {
            return Ok(l);
        }
        let frame = self.frame();
        let lifts = self
            .curves
            .iter()
            .map(|c| lift_curve(c, &frame))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.lifts.get_or_init(|| lifts))
    }
}

/// Seed curve followed by one Darboux transform per layer `(mu, start point)`,
/// each taken of the previous curve.
pub fn build_surface(
    seed: &PolarizedCurve,
    layers: &[(f64, Vec<f64>)],
    policy: StepPolicy,
) -> Result<SemiDiscreteSurface> {
    let frame = Frame::canonical(seed.n());
    let mut curves = vec![seed.clone()];
    let mut mu = Vec::with_capacity(layers.len());
    for (i, (mu_i, start)) in layers.iter().enumerate() {
        if *mu_i == 0.0 {
            eprintln!("warning: layer {i} has parameter 0 and is a constant curve");
        }
        let prev = curves.last().expect("seed present");
        let curve = integrate_parallel_section(prev, *mu_i, start, policy)
            .and_then(|sec| sec.to_curve(&frame, seed.m()))
            .map_err(|e| e.in_layer("darboux layer", i))?;
        curves.push(curve);
        mu.push(*mu_i);
    }
    SemiDiscreteSurface::new(curves, mu)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeReport {
    pub edge: usize,
    /// Largest relative non-scalar part of the cross ratio.
    pub reality: f64,
    /// Largest relative deviation of `cr m` from its median.
    pub constancy: f64,
    pub mu_fit: f64,
    /// `|mu_fit - mu| / |mu|` against the stored edge parameter.
    pub mu_mismatch: f64,
    /// `max | |mu| - nu_i nu_j / |x_j - x_i|^2 | / |mu|` when `m > 0`.
    pub nu_factorization: Option<f64>,
}

impl EdgeReport {
    pub fn worst(&self) -> f64 {
        self.reality
            .max(self.constancy)
            .max(self.mu_mismatch)
            .max(self.nu_factorization.unwrap_or(0.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsothermicReport {
    pub passed: bool,
    pub edges: Vec<EdgeReport>,
}

impl IsothermicReport {
    pub fn recovered_mu(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.mu_fit).collect()
    }
}

pub fn check_isothermic(s: &SemiDiscreteSurface, tol: f64) -> Result<IsothermicReport> {
    let m = s.m();
    let positive = m.iter().all(|&v| v > 0.0);
    let mut edges = Vec::with_capacity(s.mu().len());
    for (e, pair) in s.curves().windows(2).enumerate() {
        let (xi, xj) = (&pair[0], &pair[1]);
        let rep = is_darboux_pair(xi, xj, m, tol).map_err(|err| err.in_layer("edge", e))?;
        let mu = s.mu()[e];
        let scale = if mu != 0.0 { mu.abs() } else { 1.0 };
        let nu_factorization = positive.then(|| {
            (0..xi.len())
                .map(|k| {
                    let nui = (m[k] * xi.xprime()[k].norm_squared()).sqrt();
                    let nuj = (m[k] * xj.xprime()[k].norm_squared()).sqrt();
                    let d2 = (&xj.x()[k] - &xi.x()[k]).norm_squared();
                    (mu.abs() - nui * nuj / d2).abs() / scale
                })
                .fold(0.0, f64::max)
        });
        edges.push(EdgeReport {
            edge: e,
            reality: rep.reality,
            constancy: rep.residual,
            mu_fit: rep.mu,
            mu_mismatch: (rep.mu - mu).abs() / scale,
            nu_factorization,
        });
    }
    Ok(IsothermicReport {
        passed: edges.iter().all(|e| e.worst() < tol),
        edges,
    })
}

/// Lift with `m (xi', xi') = 1` and vanishing area element on every edge.
#[derive(Clone, Debug)]
pub struct MoutardLift {
    pub xi: Vec<LightConeSection>,
    /// `max |m (xi', xi') - 1|` over all curves.
    pub normalization_residual: f64,
    /// Largest coefficient norm of `xi'_{ij} ^ d_{ij} xi` per edge.
    pub area_residual: Vec<f64>,
    /// `max |(xi_i, xi_j) + 1 / (2 mu_ij)|` per edge.
    pub product_residual: Vec<f64>,
}

/// `xi_i = +- X_i / sqrt(m (x_i', x_i'))` with `X_i` the Euclidean lift, the
/// sign propagated along the path so that `mu_ij (xi_i, xi_j) < 0`.
pub fn moutard_lift(s: &SemiDiscreteSurface) -> Result<MoutardLift> {
    let m = s.m();
    if m.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput("the Moutard lift needs m > 0".into()));
    }
    let grid = *s.grid();
    let lifts = s.lifts()?;
    let mut sections: Vec<LightConeSection> = Vec::with_capacity(lifts.len());
    for (i, (c, lift)) in s.curves().iter().zip(lifts).enumerate() {
        let f: Vec<f64> = c
            .xprime()
            .iter()
            .zip(m)
            .map(|(d, m)| 1.0 / (m * d.norm_squared()).sqrt())
            .collect();
        let df = fd_derivative(&f, grid.step())?;
        let mut xi: Vec<_> = lift.xi().iter().zip(&f).map(|(v, f)| v.scale(*f)).collect();
        let mut dxi: Vec<_> = (0..c.len())
            .map(|k| {
                let mut v = lift.dxi()[k].scale(f[k]);
                crate::numerics::Linear::add_scaled(&mut v, df[k], &lift.xi()[k]);
                v
            })
            .collect();
        if i > 0 {
            let prev = &sections[i - 1];
            let mu = s.mu()[i - 1];
            let signs: Vec<f64> = prev
                .xi()
                .iter()
                .zip(&xi)
                .map(|(a, b)| (mu * a.inner(b)).signum())
                .collect();
            let first = signs[0];
            if signs.iter().any(|&v| v != first) || first == 0.0 {
                return Err(Error::InconsistentSign { edge: i - 1 });
            }
            if first > 0.0 {
                xi.iter_mut().for_each(|v| *v = v.scale(-1.0));
                dxi.iter_mut().for_each(|v| *v = v.scale(-1.0));
            }
        }
        sections.push(LightConeSection::new(grid, xi, Some(dxi), Normalization::Moutard)?);
    }
    let normalization_residual = sections
        .iter()
        .flat_map(|sec| sec.dxi().iter().zip(m).map(|(d, m)| (m * d.norm_sq() - 1.0).abs()))
        .fold(0.0, f64::max);
    let mut area_residual = Vec::new();
    let mut product_residual = Vec::new();
    for (e, pair) in sections.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let mu = s.mu()[e];
        let mut area: f64 = 0.0;
        let mut prod: f64 = 0.0;
        for k in 0..a.len() {
            let mid = (a.dxi()[k].coords() + b.dxi()[k].coords()) * 0.5;
            let diff = b.xi()[k].coords() - a.xi()[k].coords();
            area = area.max(bivector(&mid, &diff).norm());
            prod = prod.max((a.xi()[k].inner(&b.xi()[k]) + 0.5 / mu).abs());
        }
        area_residual.push(area);
        product_residual.push(prod);
    }
    Ok(MoutardLift {
        xi: sections,
        normalization_residual,
        area_residual,
        product_residual,
    })
}

/// Isothermic loop of connections at one spectral parameter.
#[derive(Clone, Debug)]
pub struct SurfaceConnection {
    pub t: f64,
    /// `Gamma^t_{i,i+1} = gauge_map(xi_{i+1}, xi_i, 1 - t/mu)` per sample.
    pub edge_maps: Vec<Vec<OrthoMap>>,
    /// `A(s, t)` per curve and sample.
    pub curve_coeffs: Vec<Vec<SkewOp>>,
    /// Gauge-relation residual per edge.
    pub flatness: Vec<f64>,
}

pub fn surface_connection(s: &SemiDiscreteSurface, t: f64) -> Result<SurfaceConnection> {
    check_parameter(s, t)?;
    let lifts = s.lifts()?;
    let m = s.m();
    let curve_coeffs = lifts
        .iter()
        .map(|l| crate::darboux::connection_samples(l, m, t))
        .collect::<Result<Vec<_>>>()?;
    let mut edge_maps = Vec::new();
    let mut flatness = Vec::new();
    for (e, pair) in lifts.windows(2).enumerate() {
        let r = 1.0 - t / s.mu()[e];
        edge_maps.push(
            pair[1]
                .xi()
                .iter()
                .zip(pair[0].xi())
                .map(|(a, b)| gauge_map(a, b, r))
                .collect::<Result<Vec<_>>>()?,
        );
        flatness.push(verify_gauge_relation(&pair[1], &pair[0], m, s.mu()[e], t)?);
    }
    Ok(SurfaceConnection {
        t,
        edge_maps,
        curve_coeffs,
        flatness,
    })
}

fn check_parameter(s: &SemiDiscreteSurface, t: f64) -> Result<()> {
    if let Some(e) = s.mu().iter().position(|&mu| mu == t) {
        return Err(Error::ParameterCollision {
            t,
            what: format!("the parameter of edge {e}"),
        });
    }
    Ok(())
}

/// Darboux transform of a surface: the transformed curves and the parameter
/// `mu` of the vertical edges joining `x_i` to `x_hat_i`.
#[derive(Clone, Debug)]
pub struct SurfaceDarboux {
    pub transformed: SemiDiscreteSurface,
    pub vertical_mu: f64,
    pub sections: Vec<LightConeSection>,
}

/// `xi_hat_0` is integrated along curve 0 and carried across every edge by
/// `xi_hat_{i+1} = gauge_map(xi_i, xi_{i+1}, 1 - mu/mu_{i,i+1}) xi_hat_i`.
pub fn surface_darboux(
    s: &SemiDiscreteSurface,
    mu: f64,
    start: &[f64],
    policy: StepPolicy,
) -> Result<SurfaceDarboux> {
    check_parameter(s, mu)?;
    let frame = s.frame();
    let lifts = s.lifts()?;
    let xi0 = euclidean_lift(start, &frame)?;
    let first = parallel_section_along(&lifts[0], s.m(), mu, &xi0, &frame, policy)?;
    let mut sections = vec![first];
    for (e, pair) in lifts.windows(2).enumerate() {
        let r = 1.0 - mu / s.mu()[e];
        let prev = sections.last().expect("first section present");
        let moved = (0..prev.len())
            .map(|k| Ok(gauge_map(&pair[0].xi()[k], &pair[1].xi()[k], r)?.apply(&prev.xi()[k])))
            .collect::<Result<Vec<_>>>()
            .map_err(|err| err.in_layer("edge", e))?;
        sections.push(LightConeSection::new(*s.grid(), moved, None, Normalization::Raw)?);
    }
    let curves = sections
        .iter()
        .enumerate()
        .map(|(i, sec)| sec.to_curve(&frame, s.m()).map_err(|e| e.in_layer("curve", i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceDarboux {
        transformed: SemiDiscreteSurface::new(curves, s.mu().to_vec())?,
        vertical_mu: mu,
        sections,
    })
}

#[derive(Clone, Debug)]
pub struct SurfaceCalapso {
    /// Curves `<T_i xi_i>` with edge parameters `mu_ij - t`.
    pub transformed: SemiDiscreteSurface,
    /// `T^t_i` per curve and sample.
    pub maps: Vec<Vec<OrthoMap>>,
    /// Per edge, s-constancy of `T_i Gamma_{i,i+1} (T^direct_{i+1})^{-1}` where
    /// `T^direct` is integrated along curve `i+1` on its own.
    pub trivialization: Vec<f64>,
}

/// `T_0` integrated along curve 0, `T_{i+1} = T_i Gamma^t_{i,i+1}`.
pub fn surface_calapso(
    s: &SemiDiscreteSurface,
    t: f64,
    correction: MetricCorrection,
    policy: StepPolicy,
) -> Result<SurfaceCalapso> {
    check_parameter(s, t)?;
    let frame = s.frame();
    let lifts = s.lifts()?;
    let m = s.m();
    let id = OrthoMap::identity(s.n() + 2);
    let t0 = integrate_calapso(&lifts[0], m, t, &id, correction, policy)?;
    let mut maps = vec![t0.maps().to_vec()];
    let mut sections = vec![t0.apply(&lifts[0])?];
    let mut trivialization = Vec::new();
    for (e, pair) in lifts.windows(2).enumerate() {
        let r = 1.0 - t / s.mu()[e];
        let prev = maps.last().expect("first frame present");
        let next = (0..pair[0].len())
            .map(|k| Ok(prev[k].compose(&gauge_map(&pair[1].xi()[k], &pair[0].xi()[k], r)?)))
            .collect::<Result<Vec<_>>>()?;
        let direct = integrate_calapso(&pair[1], m, t, &id, correction, policy)?;
        let comparison: Vec<DMatrix<f64>> = next
            .iter()
            .zip(direct.maps())
            .map(|(a, b)| a.compose(&b.inverse()).into_matrix())
            .collect();
        trivialization.push(constancy_residual(&comparison));
        let moved = next.iter().zip(pair[1].xi()).map(|(a, v)| a.apply(v)).collect();
        sections.push(LightConeSection::new(*s.grid(), moved, None, Normalization::Raw)?);
        maps.push(next);
    }
    let curves = sections
        .iter()
        .enumerate()
        .map(|(i, sec)| sec.to_curve(&frame, m).map_err(|e| e.in_layer("curve", i)))
        .collect::<Result<Vec<_>>>()?;
    let mu = s.mu().iter().map(|mu| mu - t).collect();
    Ok(SurfaceCalapso {
        transformed: SemiDiscreteSurface::new(curves, mu)?,
        maps,
        trivialization,
    })
}

#[derive(Clone, Debug)]
pub struct SurfaceChristoffel {
    pub dual: SemiDiscreteSurface,
    /// Per layer `i >= 1`, relative deviation of the edge-built derivative from
    /// `(m x_i')^{-1}`.
    pub consistency: Vec<f64>,
}

/// Dual of curve 0 anchored at the origin, later curves placed by
/// `d_{ij} x* = 1 / (mu_ij d_{ij} x)`.
pub fn surface_christoffel(s: &SemiDiscreteSurface, policy: StepPolicy) -> Result<SurfaceChristoffel> {
    if let Some(e) = s.mu().iter().position(|&v| v == 0.0) {
        return Err(Error::ParameterCollision {
            t: 0.0,
            what: format!("the parameter of edge {e}"),
        });
    }
    let first = christoffel_dual(&s.curves()[0], &vec![0.0; s.n()], policy)?;
    let mut duals = vec![first];
    let mut consistency = Vec::new();
    for (e, pair) in s.curves().windows(2).enumerate() {
        let prev = duals.last().expect("first dual present");
        let next = christoffel_darboux_permute(&pair[0], prev, &pair[1], s.mu()[e])
            .map_err(|err| err.in_layer("edge", e))?;
        consistency.push(dual_derivative_residual(&pair[1], &next));
        duals.push(next);
    }
    Ok(SurfaceChristoffel {
        dual: SemiDiscreteSurface::new(duals, s.mu().to_vec())?,
        consistency,
    })
}

/// Median of the edge-function samples, used as a robust constant estimate.
pub fn edge_median(values: &[f64]) -> f64 {
    median(values)
}

/// Edge function `(f_i + f_j) / 2` and difference `f_j - f_i` of two sampled
/// vector fields.
pub fn edge_parts(fi: &[DVector<f64>], fj: &[DVector<f64>]) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    fi.iter()
        .zip(fj)
        .map(|(a, b)| ((a + b) * 0.5, b - a))
        .unzip()
}
