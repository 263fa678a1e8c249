//! Christoffel duality and Calapso transformations of polarized curves, and
//! their permutability with the Darboux transformation.

use nalgebra::{DMatrix, DVector};

use crate::curves::{Grid, PolarizedCurve};
use crate::darboux::{connection_coeff, gauge_map, LightConeSection};
use crate::error::{Error, Result};
use crate::minkowski::{Frame, Metric, OrthoMap};
use crate::numerics::{integrate_samples, rk4_on_grid, Interpolant, StepPolicy};

/// Re-orthogonalization schedule for Calapso frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricCorrection {
    Off,
    Every(usize),
}

impl Default for MetricCorrection {
    fn default() -> Self {
        MetricCorrection::Every(50)
    }
}

impl std::str::FromStr for MetricCorrection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on" => Ok(Self::default()),
            "off" => Ok(MetricCorrection::Off),
            _ => {
                let k = s
                    .strip_prefix("every:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k > 0)
                    .ok_or_else(|| Error::InvalidInput(format!("bad metric correction {s:?}")))?;
                Ok(MetricCorrection::Every(k))
            }
        }
    }
}

/// Antiderivative of `dx / (m (dx, dx))` in the given metric, starting at `start`.
///
/// Returns the dual positions and their (exact) derivatives.
pub fn christoffel_dual_samples(
    grid: &Grid,
    dx: &[DVector<f64>],
    m: &[f64],
    metric: Metric,
    start: DVector<f64>,
    policy: StepPolicy,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    let mut dual_d = Vec::with_capacity(dx.len());
    for (k, (d, mk)) in dx.iter().zip(m).enumerate() {
        if *mk == 0.0 {
            return Err(Error::ZeroPolarization {
                index: k,
                s: grid.node(k),
            });
        }
        let inv = metric
            .vector_inverse(d, d.norm())
            .map_err(|_| Error::NotImmersed {
                index: k,
                s: grid.node(k),
            })?;
        dual_d.push(inv / *mk);
    }
    let x = integrate_samples(grid, policy, start, &dual_d)?;
    Ok((x, dual_d))
}

/// Christoffel dual `(x*)' = (m x')^{-1}` anchored at `start`.
pub fn christoffel_dual(c: &PolarizedCurve, start: &[f64], policy: StepPolicy) -> Result<PolarizedCurve> {
    if start.len() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            actual: start.len(),
        });
    }
    if c.m().windows(2).any(|w| w[0].signum() != w[1].signum()) {
        return Err(Error::InvalidInput("polarization changes sign inside the interval".into()));
    }
    let (x, d) = christoffel_dual_samples(
        c.grid(),
        c.xprime(),
        c.m(),
        Metric::Euclidean,
        DVector::from_column_slice(start),
        policy,
    )?;
    PolarizedCurve::new(*c.grid(), x, c.m().to_vec(), Some(d))
}

/// Largest relative deviation of `(m (x*)')^{-1}` from `x'`.
pub fn dual_derivative_residual(c: &PolarizedCurve, dual: &PolarizedCurve) -> f64 {
    c.xprime()
        .iter()
        .zip(dual.xprime())
        .zip(c.m())
        .map(|((d, ds), m)| {
            let back = ds / (m * ds.norm_squared());
            (back - d).norm() / d.norm()
        })
        .fold(0.0, f64::max)
}

/// `x_hat* = x* + 1 / (mu (x_hat - x))`, with its derivative by the chain rule.
pub fn christoffel_darboux_permute(
    x: &PolarizedCurve,
    xstar: &PolarizedCurve,
    xhat: &PolarizedCurve,
    mu: f64,
) -> Result<PolarizedCurve> {
    if mu == 0.0 {
        return Err(Error::ParameterCollision {
            t: 0.0,
            what: "the trivial parameter".into(),
        });
    }
    let mut pts = Vec::with_capacity(x.len());
    let mut ders = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let d = &xhat.x()[k] - &x.x()[k];
        let dd = &xhat.xprime()[k] - &x.xprime()[k];
        let nsq = d.norm_squared();
        if nsq.sqrt() <= crate::clifford::DEGENERACY_TOL * x.x()[k].norm().max(1.0) {
            return Err(Error::DegenerateSecant { norm: nsq.sqrt() });
        }
        pts.push(&xstar.x()[k] + &d / (mu * nsq));
        let dinv = &dd / nsq - &d * (2.0 * d.dot(&dd) / (nsq * nsq));
        ders.push(&xstar.xprime()[k] + dinv / mu);
    }
    PolarizedCurve::new(*x.grid(), pts, x.m().to_vec(), Some(ders))
}

/// Largest relative residual of `(x_hat*)' = mu (x_hat* - x*) x' (x_hat* - x*)`.
pub fn permutation_identity_residual(
    x: &PolarizedCurve,
    xstar: &PolarizedCurve,
    xhat_star: &PolarizedCurve,
    mu: f64,
) -> f64 {
    (0..x.len())
        .map(|k| {
            let d = &xhat_star.x()[k] - &xstar.x()[k];
            let v = &x.xprime()[k];
            // d v d = 2 (d.v) d - |d|^2 v
            let rhs = (&d * (2.0 * d.dot(v)) - v * d.norm_squared()) * mu;
            (&xhat_star.xprime()[k] - &rhs).norm() / xhat_star.xprime()[k].norm()
        })
        .fold(0.0, f64::max)
}

/// Sampled Calapso transformation `T^t` of a curve, with `T' = -T A(s, t)`.
#[derive(Clone, Debug)]
pub struct CalapsoFrameField {
    grid: Grid,
    t: f64,
    maps: Vec<OrthoMap>,
    derivatives: Vec<DMatrix<f64>>,
}

impl CalapsoFrameField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn maps(&self) -> &[OrthoMap] {
        &self.maps
    }

    pub fn derivatives(&self) -> &[DMatrix<f64>] {
        &self.derivatives
    }

    /// Largest `|T^t G T - G|` over the samples.
    pub fn metric_drift(&self) -> f64 {
        self.maps.iter().map(|t| t.metric_drift()).fold(0.0, f64::max)
    }

    /// `T^t` applied to a section, with the product-rule derivative.
    pub fn apply(&self, section: &LightConeSection) -> Result<LightConeSection> {
        section.transformed(&self.maps, Some(&self.derivatives))
    }
}

/// Integrates `T' = -T A(s, t)` from `T(s0) = start` along a curve lift.
pub fn integrate_calapso(
    lift: &LightConeSection,
    m: &[f64],
    t: f64,
    start: &OrthoMap,
    correction: MetricCorrection,
    policy: StepPolicy,
) -> Result<CalapsoFrameField> {
    let grid = *lift.grid();
    let pxi = Interpolant::new(grid, lift.xi())?;
    let pdxi = Interpolant::new(grid, lift.dxi())?;
    let pm = Interpolant::new(grid, m)?;
    let mats = rk4_on_grid(
        &grid,
        policy,
        start.matrix().clone(),
        |s, y: &DMatrix<f64>| {
            let a = connection_coeff(&pxi.at(s), &pdxi.at(s), pm.at(s), t)?;
            Ok(-(y * a.matrix()))
        },
        |_, y, step| {
            if let MetricCorrection::Every(k) = correction {
                if step % k == 0 {
                    let mut map = OrthoMap::from_matrix(std::mem::replace(y, DMatrix::zeros(0, 0)));
                    map.reorthogonalize();
                    *y = map.into_matrix();
                }
            }
            Ok(())
        },
    )?;
    let mut maps = Vec::with_capacity(mats.len());
    let mut derivatives = Vec::with_capacity(mats.len());
    for (k, tm) in mats.into_iter().enumerate() {
        let a = connection_coeff(&lift.xi()[k], &lift.dxi()[k], m[k], t)?;
        derivatives.push(-(&tm * a.matrix()));
        maps.push(OrthoMap::from_matrix(tm));
    }
    Ok(CalapsoFrameField {
        grid,
        t,
        maps,
        derivatives,
    })
}

/// Largest `|M(s) - M(s0)|` (Frobenius) for a sampled family of maps.
pub fn constancy_residual(maps: &[DMatrix<f64>]) -> f64 {
    let first = &maps[0];
    maps.iter().map(|m| (m - first).norm()).fold(0.0, f64::max)
}

/// s-constancy of `T~^t T^tau (T^{tau+t})^{-1}`, where `T~` is the Calapso
/// transformation of the Calapso transform `T^tau xi`.
pub fn verify_calapso_composition(
    lift: &LightConeSection,
    m: &[f64],
    tau: f64,
    t: f64,
    correction: MetricCorrection,
    policy: StepPolicy,
) -> Result<f64> {
    let dim = lift.xi()[0].dim();
    let id = OrthoMap::identity(dim);
    let t_tau = integrate_calapso(lift, m, tau, &id, correction, policy)?;
    let t_sum = integrate_calapso(lift, m, tau + t, &id, correction, policy)?;
    let moved = t_tau.apply(lift)?;
    let t_tilde = integrate_calapso(&moved, m, t, &id, correction, policy)?;
    let comparison: Vec<DMatrix<f64>> = (0..lift.len())
        .map(|k| {
            t_tilde.maps()[k]
                .compose(&t_tau.maps()[k])
                .compose(&t_sum.maps()[k].inverse())
                .into_matrix()
        })
        .collect();
    Ok(constancy_residual(&comparison))
}

/// s-constancy of `T_hat^t Gamma(1 - t/mu) (T^t)^{-1}` for a Darboux pair
/// `(xi, xi_hat)` with parameter `mu`.
pub fn verify_calapso_gauge(
    lift: &LightConeSection,
    lift_hat: &LightConeSection,
    m: &[f64],
    mu: f64,
    t: f64,
    correction: MetricCorrection,
    policy: StepPolicy,
) -> Result<f64> {
    if t == mu {
        return Err(Error::ZeroGaugeFactor);
    }
    let id = OrthoMap::identity(lift.xi()[0].dim());
    let tt = integrate_calapso(lift, m, t, &id, correction, policy)?;
    let tt_hat = integrate_calapso(lift_hat, m, t, &id, correction, policy)?;
    let comparison: Vec<DMatrix<f64>> = (0..lift.len())
        .map(|k| {
            let g = gauge_map(&lift.xi()[k], &lift_hat.xi()[k], 1.0 - t / mu)?;
            Ok(tt_hat.maps()[k]
                .compose(&g)
                .compose(&tt.maps()[k].inverse())
                .into_matrix())
        })
        .collect::<Result<_>>()?;
    Ok(constancy_residual(&comparison))
}

/// Largest relative motion of `T^mu xi_hat` away from its initial value.
pub fn parallel_constancy(field: &CalapsoFrameField, section: &LightConeSection) -> f64 {
    let first = field.maps()[0].apply(&section.xi()[0]);
    let scale = first.euclid_norm();
    (0..section.len())
        .map(|k| (field.maps()[k].apply(&section.xi()[k]) - first.clone()).euclid_norm() / scale)
        .fold(0.0, f64::max)
}

/// Calapso transforms `(T^tau xi, T^tau xi_hat)` of a Darboux pair with
/// parameter `mu`, both moved by the same `T^tau`.
pub fn calapso_darboux_permute(
    lift: &LightConeSection,
    lift_hat: &LightConeSection,
    m: &[f64],
    mu: f64,
    tau: f64,
    correction: MetricCorrection,
    policy: StepPolicy,
) -> Result<(LightConeSection, LightConeSection)> {
    if tau == mu {
        return Err(Error::ParameterCollision {
            t: tau,
            what: "the Darboux parameter".into(),
        });
    }
    let id = OrthoMap::identity(lift.xi()[0].dim());
    let field = integrate_calapso(lift, m, tau, &id, correction, policy)?;
    Ok((field.apply(lift)?, field.apply(lift_hat)?))
}

/// Calapso transform of a curve, projected back to `R^n`.
pub fn calapso_curve(
    c: &PolarizedCurve,
    t: f64,
    correction: MetricCorrection,
    policy: StepPolicy,
) -> Result<(CalapsoFrameField, PolarizedCurve)> {
    let frame = Frame::canonical(c.n());
    let lift = crate::darboux::lift_curve(c, &frame)?;
    let field = integrate_calapso(&lift, c.m(), t, &OrthoMap::identity(c.n() + 2), correction, policy)?;
    let moved = field.apply(&lift)?;
    let curve = moved.to_curve(&frame, c.m())?;
    Ok((field, curve))
}
