//! Closed-form and constructed fixtures, generated on demand.

use nalgebra::DVector;

use crate::cmc::TangentPlaneCongruence;
use crate::curves::{circle_second_derivative, make_curve, tractrix_pair, Family, Grid, PolarizedCurve};
use crate::error::{Error, Result};
use crate::numerics::StepPolicy;
use crate::surface::{build_surface, SemiDiscreteSurface};

/// Shared sampling `s in [0, 1.5]`, `h = 1e-3`.
pub fn fixture_grid() -> Grid {
    Grid::new(0.0, 1.5, 1501).expect("static grid")
}

pub fn unit_circle(grid: Grid) -> PolarizedCurve {
    make_curve(&Family::Circle { radius: 1.0, dim: 2 }, grid).expect("circle is immersed")
}

/// Unit circle and the concentric circle of radius 2, `m = 1`, `mu = -2`.
pub fn concentric_pair(grid: Grid) -> Result<SemiDiscreteSurface> {
    let inner = unit_circle(grid);
    let outer = make_curve(&Family::Circle { radius: 2.0, dim: 2 }, grid)?;
    SemiDiscreteSurface::new(vec![inner, outer], vec![-2.0])
}

/// Tractrix pair `y +- y'` over the unit circle, `m = 1/2`, `mu = 1/4`.
pub fn tractrix_surface(grid: Grid) -> Result<SemiDiscreteSurface> {
    let y = unit_circle(grid);
    let ypp = circle_second_derivative(1.0, 2, &grid);
    let (xp, xm) = tractrix_pair(&y, 0.25, Some(&ypp))?;
    SemiDiscreteSurface::new(vec![xp, xm], vec![0.25])
}

/// Unit circle with its `mu = -2` transform through `(2, 0)`.
pub fn cylinder_patch(grid: Grid) -> Result<SemiDiscreteSurface> {
    build_surface(&unit_circle(grid), &[(-2.0, vec![2.0, 0.0])], StepPolicy::Grid)
}

/// Cylinder patch followed by a `mu = 1` transform through `(3, 1)`.
pub fn three_layer(grid: Grid) -> Result<SemiDiscreteSurface> {
    build_surface(
        &unit_circle(grid),
        &[(-2.0, vec![2.0, 0.0]), (1.0, vec![3.0, 1.0])],
        StepPolicy::Grid,
    )
}

/// Parallel circles of radius `r` at heights `k delta` in `R^3`, polarized by
/// `m = -4/r` so that `z = n + H x` is a linear conserved quantity, together
/// with the outward tangent plane congruence.
pub fn cmc_cylinder(
    grid: Grid,
    r: f64,
    delta: f64,
    layers: usize,
) -> Result<(SemiDiscreteSurface, TangentPlaneCongruence)> {
    if !(r > 0.0) || delta == 0.0 || layers == 0 {
        return Err(Error::InvalidInput("cylinder needs r > 0, delta != 0 and a layer".into()));
    }
    let m = -4.0 / r;
    let mu = 4.0 * r / (delta * delta);
    let curves = (0..layers)
        .map(|k| {
            let h = k as f64 * delta;
            PolarizedCurve::from_fn(
                grid,
                |s| {
                    (
                        vec![r * s.cos(), r * s.sin(), h],
                        vec![-r * s.sin(), r * s.cos(), 0.0],
                    )
                },
                |_| m,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let s = SemiDiscreteSurface::new(curves, vec![mu; layers - 1])?;
    let normals: Vec<Vec<DVector<f64>>> = s
        .curves()
        .iter()
        .map(|c| {
            c.x()
                .iter()
                .map(|p| DVector::from_vec(vec![p[0] / r, p[1] / r, 0.0]))
                .collect()
        })
        .collect();
    let tpc = TangentPlaneCongruence::from_euclidean_normals(&s, &normals)?;
    Ok((s, tpc))
}

/// Two parallel lines `(s, 0, 0)` and `(s, delta, 0)` with constant `m`, and
/// the constant normal `e_3`.
pub fn flat_strip(grid: Grid, delta: f64, m: f64) -> Result<(SemiDiscreteSurface, TangentPlaneCongruence)> {
    let curves = [0.0, delta]
        .iter()
        .map(|&y| PolarizedCurve::from_fn(grid, |s| (vec![s, y, 0.0], vec![1.0, 0.0, 0.0]), |_| m))
        .collect::<Result<Vec<_>>>()?;
    let s = SemiDiscreteSurface::new(curves, vec![-m / (delta * delta)])?;
    let e3 = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    let normals = vec![vec![e3; grid.len()]; 2];
    let tpc = TangentPlaneCongruence::from_euclidean_normals(&s, &normals)?;
    Ok((s, tpc))
}

/// Latitude circles of the sphere of radius `radius` at polar angles `theta`,
/// `m = 1`, with the radial normal.
pub fn sphere_latitudes(
    grid: Grid,
    radius: f64,
    theta: &[f64],
) -> Result<(SemiDiscreteSurface, TangentPlaneCongruence)> {
    let curves = theta
        .iter()
        .map(|&th| {
            let (rho, h) = (radius * th.sin(), radius * th.cos());
            PolarizedCurve::from_fn(
                grid,
                |s| {
                    (
                        vec![rho * s.cos(), rho * s.sin(), h],
                        vec![-rho * s.sin(), rho * s.cos(), 0.0],
                    )
                },
                |_| 1.0,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mu = theta
        .windows(2)
        .map(|w| {
            let (r0, r1) = (radius * w[0].sin(), radius * w[1].sin());
            let dz = radius * (w[1].cos() - w[0].cos());
            -r0 * r1 / ((r1 - r0).powi(2) + dz * dz)
        })
        .collect();
    let s = SemiDiscreteSurface::new(curves, mu)?;
    let normals: Vec<Vec<DVector<f64>>> = s
        .curves()
        .iter()
        .map(|c| c.x().iter().map(|p| p / radius).collect())
        .collect();
    let tpc = TangentPlaneCongruence::from_euclidean_normals(&s, &normals)?;
    Ok((s, tpc))
}

/// Names accepted by [`named_surface`].
pub const SURFACE_FIXTURES: [&str; 5] = [
    "concentric-pair",
    "tractrix-pair",
    "cylinder-patch",
    "three-layer",
    "cmc-cylinder",
];

pub fn named_surface(name: &str) -> Result<SemiDiscreteSurface> {
    let g = fixture_grid();
    match name {
        "concentric-pair" => concentric_pair(g),
        "tractrix-pair" => tractrix_surface(g),
        "cylinder-patch" => cylinder_patch(g),
        "three-layer" => three_layer(g),
        "cmc-cylinder" => cmc_cylinder(g, 1.0, 0.5, 3).map(|(s, _)| s),
        other => Err(Error::InvalidInput(format!("unknown fixture {other:?}"))),
    }
}
