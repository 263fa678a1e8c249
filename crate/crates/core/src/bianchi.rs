//! Bianchi permutability: the algebraic fourth point of a quadrilateral of
//! Darboux transforms, the bigauge identity and the cube.

use nalgebra::DVector;

use crate::clifford::{clifford_cross_ratio, Multivector};
use crate::darboux::{gauge_map, LightConeSection, Normalization};
use crate::error::{Error, Result};
use crate::minkowski::{affine_point, Frame, MinkVector};

/// Relative size of the non-scalar part above which four points are not
/// accepted as concircular.
pub const CONCIRCULAR_TOL: f64 = 1e-7;

/// Direction in `R^{n+1}` (the sphere `S^n` seen from the light cone) of a
/// lightlike vector.
fn sphere_point(v: &MinkVector) -> DVector<f64> {
    let d = v.dim();
    let last = v.coords()[d - 1];
    v.coords().rows(0, d - 1) / last
}

/// Point at infinity for a stereographic projection that keeps away from all
/// given points.
fn far_direction(points: &[DVector<f64>]) -> Vec<f64> {
    let d = points[0].len();
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut u = DVector::zeros(d);
            u[k] = sign;
            candidates.push(u);
        }
    }
    let mean: DVector<f64> = points.iter().fold(DVector::zeros(d), |acc, p| acc + p);
    if mean.norm() > 1e-6 {
        candidates.push(-&mean / mean.norm());
    }
    // maximize the smallest distance 1 - (p, u) over the points
    candidates
        .into_iter()
        .map(|u| {
            let clearance = points
                .iter()
                .map(|p| 1.0 - p.dot(&u))
                .fold(f64::INFINITY, f64::min);
            (clearance, u)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, u)| u.as_slice().to_vec())
        .unwrap_or_default()
}

/// Real cross ratio of four concircular points of `S^n`, normalized so that
/// `<zeta> = <Gamma(r) eta>` with `Gamma = gauge_map(xi, xi_hat, r)` exactly when
/// `moebius_cross_ratio(xi_hat, eta, xi, zeta) = r`.
pub fn moebius_cross_ratio(
    p1: &MinkVector,
    p2: &MinkVector,
    p3: &MinkVector,
    p4: &MinkVector,
) -> Result<f64> {
    let pts = [p1, p2, p3, p4];
    let dim = p1.dim();
    if pts.iter().any(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: pts.iter().map(|p| p.dim()).find(|&d| d != dim).unwrap_or(dim),
        });
    }
    let sphere: Vec<DVector<f64>> = pts.iter().map(|p| sphere_point(p)).collect();
    for i in 0..4 {
        for j in i + 1..4 {
            if (&sphere[i] - &sphere[j]).norm() < 1e-10 {
                return Err(Error::CoincidentPoints);
            }
        }
    }
    let frame = Frame::with_infinity_direction(&far_direction(&sphere))?;
    let affine: Vec<Multivector> = pts
        .iter()
        .map(|p| affine_point(p, &frame).and_then(|x| Multivector::vector(x.as_slice())))
        .collect::<Result<_>>()?;
    let cr = clifford_cross_ratio(&affine[0], &affine[1], &affine[2], &affine[3])?;
    let residual = cr.non_scalar_norm() / cr.norm().max(f64::MIN_POSITIVE);
    if residual > CONCIRCULAR_TOL {
        return Err(Error::NotConcircular { residual });
    }
    Ok(cr.scalar_part())
}

fn check_distinct(mus: &[f64]) -> Result<()> {
    for i in 0..mus.len() {
        if mus[i] == 0.0 {
            return Err(Error::ParameterCollision {
                t: 0.0,
                what: "the trivial parameter".into(),
            });
        }
        for j in i + 1..mus.len() {
            if mus[i] == mus[j] {
                return Err(Error::ParameterCollision {
                    t: mus[i],
                    what: format!("parameter {j}"),
                });
            }
        }
    }
    Ok(())
}

/// Fourth vertex `xi01 = Gamma(1 - mu1/mu0) xi1` with
/// `Gamma = gauge_map(xi, xi0, .)`, sample by sample.
///
/// The derivative of the result is taken by finite differences.
pub fn bianchi_quad(
    xi: &LightConeSection,
    xi0: &LightConeSection,
    xi1: &LightConeSection,
    mu0: f64,
    mu1: f64,
) -> Result<LightConeSection> {
    check_distinct(&[mu0, mu1])?;
    let r = 1.0 - mu1 / mu0;
    let out = xi
        .xi()
        .iter()
        .zip(xi0.xi())
        .zip(xi1.xi())
        // The gauge map only sees the lines through a and b. When those
        // nearly meet, cancellation leaves a roundoff null defect in the output.
        .map(|((a, b), c)| {
            let g = gauge_map(&a.scale(1.0 / a.euclid_norm()), &b.scale(1.0 / b.euclid_norm()), r)?;
            Ok(g.apply(c).renull())
        })
        .collect::<Result<Vec<_>>>()?;
    LightConeSection::new(*xi.grid(), out, None, Normalization::Raw)
}

/// `cr(<xi>, <xi0>, <xi01>, <xi1>)` at every sample.
pub fn quad_cross_ratios(
    xi: &LightConeSection,
    xi0: &LightConeSection,
    xi01: &LightConeSection,
    xi1: &LightConeSection,
) -> Result<Vec<f64>> {
    (0..xi.len())
        .map(|k| moebius_cross_ratio(&xi.xi()[k], &xi0.xi()[k], &xi01.xi()[k], &xi1.xi()[k]))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BigaugeResidual {
    /// Difference of the two compositions.
    pub compositions: f64,
    /// Largest difference of either composition from the middle expression.
    pub middle: f64,
}

/// Residual of the bigauge identity at one sample, in Frobenius norm relative
/// to `max(1, |lhs|)`.
pub fn check_bigauge(
    xi: &MinkVector,
    xi0: &MinkVector,
    xi1: &MinkVector,
    xi01: &MinkVector,
    mu0: f64,
    mu1: f64,
    t: f64,
) -> Result<BigaugeResidual> {
    check_distinct(&[mu0, mu1])?;
    if t == mu0 || t == mu1 {
        return Err(Error::ZeroGaugeFactor);
    }
    let r0 = 1.0 - t / mu0;
    let r1 = 1.0 - t / mu1;
    let left = gauge_map(xi0, xi01, r1)?.compose(&gauge_map(xi, xi0, r0)?);
    let right = gauge_map(xi1, xi01, r0)?.compose(&gauge_map(xi, xi1, r1)?);
    let middle = gauge_map(xi0, xi1, r1 / r0)?;
    let scale = left.matrix().norm().max(1.0);
    Ok(BigaugeResidual {
        compositions: (left.matrix() - right.matrix()).norm() / scale,
        middle: (left.matrix() - middle.matrix())
            .norm()
            .max((right.matrix() - middle.matrix()).norm())
            / scale,
    })
}

/// Largest bigauge residual over all samples of a quadrilateral.
pub fn check_bigauge_sections(
    xi: &LightConeSection,
    xi0: &LightConeSection,
    xi1: &LightConeSection,
    xi01: &LightConeSection,
    mu0: f64,
    mu1: f64,
    t: f64,
) -> Result<BigaugeResidual> {
    let mut worst = BigaugeResidual {
        compositions: 0.0,
        middle: 0.0,
    };
    for k in 0..xi.len() {
        let r = check_bigauge(
            &xi.xi()[k],
            &xi0.xi()[k],
            &xi1.xi()[k],
            &xi01.xi()[k],
            mu0,
            mu1,
            t,
        )?;
        worst.compositions = worst.compositions.max(r.compositions);
        worst.middle = worst.middle.max(r.middle);
    }
    Ok(worst)
}

/// Faces and top vertex of a Bianchi cube.
#[derive(Clone, Debug)]
pub struct BianchiCube {
    pub xi01: LightConeSection,
    pub xi02: LightConeSection,
    pub xi12: LightConeSection,
    /// Built on the face through `xi0`.
    pub xi012: LightConeSection,
    /// Largest projective distance between the three routes to the top vertex.
    pub route_discrepancy: f64,
}

pub fn bianchi_cube(
    xi: &LightConeSection,
    sections: [(&LightConeSection, f64); 3],
) -> Result<BianchiCube> {
    let [(xi0, mu0), (xi1, mu1), (xi2, mu2)] = sections;
    check_distinct(&[mu0, mu1, mu2])?;
    let xi01 = bianchi_quad(xi, xi0, xi1, mu0, mu1)?;
    let xi02 = bianchi_quad(xi, xi0, xi2, mu0, mu2)?;
    let xi12 = bianchi_quad(xi, xi1, xi2, mu1, mu2)?;
    let xi012 = bianchi_quad(xi0, &xi01, &xi02, mu1, mu2)?;
    let via1 = bianchi_quad(xi1, &xi01, &xi12, mu0, mu2)?;
    let via2 = bianchi_quad(xi2, &xi02, &xi12, mu0, mu1)?;
    let mut route_discrepancy: f64 = 0.0;
    for k in 0..xi.len() {
        let top = &xi012.xi()[k];
        route_discrepancy = route_discrepancy
            .max(top.projective_distance(&via1.xi()[k]))
            .max(top.projective_distance(&via2.xi()[k]));
    }
    Ok(BianchiCube {
        xi01,
        xi02,
        xi12,
        xi012,
        route_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{make_curve, Family, Grid, PolarizedCurve};
    use crate::darboux::{
        integrate_parallel_section, is_darboux_pair, lift_curve, parallel_residual,
    };
    use crate::minkowski::euclidean_lift;
    use crate::numerics::{relative_spread, StepPolicy};
    use proptest::prelude::*;

    fn circle() -> PolarizedCurve {
        make_curve(
            &Family::Circle { radius: 1.0, dim: 2 },
            Grid::new(0.0, 1.5, 1501).unwrap(),
        )
        .unwrap()
    }

    fn setup(mu0: f64, mu1: f64) -> (PolarizedCurve, [LightConeSection; 3]) {
        let c = circle();
        let f = Frame::canonical(2);
        let xi = lift_curve(&c, &f).unwrap();
        let xi0 = integrate_parallel_section(&c, mu0, &[2.0, 0.0], StepPolicy::Grid).unwrap();
        let xi1 = integrate_parallel_section(&c, mu1, &[0.4, -0.3], StepPolicy::Grid).unwrap();
        (c, [xi, xi0, xi1])
    }

    #[test]
    fn cross_ratio_round_trip_through_gauge_map() {
        let f = Frame::canonical(2);
        let xi = euclidean_lift(&[0.0, 0.0], &f).unwrap();
        let xh = euclidean_lift(&[1.0, 1.0], &f).unwrap();
        let eta = euclidean_lift(&[2.0, 0.0], &f).unwrap();
        for r in [3.0, -0.5, 0.25] {
            let zeta = gauge_map(&xi, &xh, r).unwrap().apply(&eta);
            let cr = moebius_cross_ratio(&xh, &eta, &xi, &zeta).unwrap();
            assert!((cr - r).abs() < 1e-12, "r = {r}: {cr}");
        }
        let zeta = gauge_map(&xi, &xh, 1.0).unwrap().apply(&eta);
        assert!(zeta.projective_distance(&eta) < 1e-15);
    }

    #[test]
    fn cross_ratio_errors() {
        let f = Frame::canonical(3);
        let p: Vec<MinkVector> = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
            .iter()
            .map(|x| euclidean_lift(x, &f).unwrap())
            .collect();
        assert!(matches!(
            moebius_cross_ratio(&p[0], &p[1], &p[2], &p[3]),
            Err(Error::NotConcircular { .. })
        ));
        assert!(matches!(
            moebius_cross_ratio(&p[0], &p[1], &p[0].scale(2.0), &p[3]),
            Err(Error::CoincidentPoints)
        ));
    }

    #[test]
    fn cross_ratio_handles_the_point_at_infinity() {
        let f = Frame::canonical(2);
        let xi = euclidean_lift(&[0.0, 0.0], &f).unwrap();
        let eta = euclidean_lift(&[1.0, 0.0], &f).unwrap();
        let zeta = euclidean_lift(&[3.0, 0.0], &f).unwrap();
        let cr = moebius_cross_ratio(f.q(), &eta, &xi, &zeta).unwrap();
        assert!((cr - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quad_has_constant_cross_ratio_and_is_parallel() {
        let (c, [xi, xi0, xi1]) = setup(-2.0, 1.0);
        let xi01 = bianchi_quad(&xi, &xi0, &xi1, -2.0, 1.0).unwrap();
        let cr = quad_cross_ratios(&xi, &xi0, &xi01, &xi1).unwrap();
        for v in &cr {
            assert!((v + 0.5).abs() < 1e-8, "{v}");
        }
        let r0 = parallel_residual(&xi0, c.m(), 1.0, &xi01).unwrap();
        let r1 = parallel_residual(&xi1, c.m(), -2.0, &xi01).unwrap();
        assert!(r0 < 1e-6 && r1 < 1e-6, "{r0} {r1}");
        // opposite edges carry equal parameters
        let f = Frame::canonical(2);
        let x1 = xi1.to_curve(&f, c.m()).unwrap();
        let x01 = xi01.to_curve(&f, c.m()).unwrap();
        let rep = is_darboux_pair(&x1, &x01, c.m(), 1e-6).unwrap();
        assert!((rep.mu + 2.0).abs() < 1e-6, "{rep:?}");
        let (_, spread) = relative_spread(&cr);
        assert!(spread < 1e-8);
    }

    #[test]
    fn quad_is_symmetric() {
        let (_, [xi, xi0, xi1]) = setup(-2.0, 1.0);
        let a = bianchi_quad(&xi, &xi0, &xi1, -2.0, 1.0).unwrap();
        let b = bianchi_quad(&xi, &xi1, &xi0, 1.0, -2.0).unwrap();
        for (p, q) in a.xi().iter().zip(b.xi()) {
            assert!(p.projective_distance(q) < 1e-8);
        }
    }

    #[test]
    fn bigauge_identity() {
        let (_, [xi, xi0, xi1]) = setup(-2.0, 1.0);
        let xi01 = bianchi_quad(&xi, &xi0, &xi1, -2.0, 1.0).unwrap();
        let r = check_bigauge_sections(&xi, &xi0, &xi1, &xi01, -2.0, 1.0, 0.0).unwrap();
        assert!(r.compositions < 1e-14 && r.middle < 1e-14);
        let r = check_bigauge_sections(&xi, &xi0, &xi1, &xi01, -2.0, 1.0, 0.37).unwrap();
        assert!(r.compositions < 1e-10 && r.middle < 1e-10, "{r:?}");
        assert!(check_bigauge_sections(&xi, &xi0, &xi1, &xi01, -2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn cube_routes_agree() {
        let (c, [xi, xi0, xi1]) = setup(-2.0, 1.0);
        let xi2 = integrate_parallel_section(&c, 3.0, &[-0.5, 0.6], StepPolicy::Grid).unwrap();
        let cube = bianchi_cube(&xi, [(&xi0, -2.0), (&xi1, 1.0), (&xi2, 3.0)]).unwrap();
        assert!(cube.route_discrepancy < 1e-6, "{}", cube.route_discrepancy);
        assert!(matches!(
            bianchi_cube(&xi, [(&xi0, -2.0), (&xi1, 1.0), (&xi2, 1.0)]),
            Err(Error::ParameterCollision { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip_on_random_circles(a in prop::collection::vec(-2.0f64..2.0, 3),
                                         b in prop::collection::vec(-2.0f64..2.0, 3),
                                         e in prop::collection::vec(-2.0f64..2.0, 3),
                                         r in prop_oneof![-4.0f64..-0.2, 0.2f64..4.0]) {
            let f = Frame::canonical(3);
            let lifts: Vec<MinkVector> = [&a, &b, &e].iter().map(|p| euclidean_lift(p, &f).unwrap()).collect();
            let d = |u: &Vec<f64>, v: &Vec<f64>| u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            prop_assume!(d(&a, &b) > 0.05 && d(&a, &e) > 0.05 && d(&b, &e) > 0.05);
            prop_assume!((r - 1.0).abs() > 0.05);
            let zeta = gauge_map(&lifts[0], &lifts[1], r).unwrap().apply(&lifts[2]);
            let cr = moebius_cross_ratio(&lifts[1], &lifts[2], &lifts[0], &zeta).unwrap();
            prop_assert!((cr - r).abs() < 1e-8 * (1.0 + r.abs()));
        }
    }
}
