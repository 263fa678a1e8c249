//! Sampled-data numerics: 4th-order finite differences, cubic interpolation
//! between grid nodes and a fixed-step classical Runge-Kutta integrator.

use nalgebra::{DMatrix, DVector};

use crate::curves::Grid;
use crate::error::{Error, Result};

/// Anything that lives in a real vector space.
pub trait Linear: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, a: f64, other: &Self);

    fn combine(terms: &[(f64, &Self)]) -> Self {
        let mut out = terms[0].1.zero_like();
        for (a, v) in terms {
            out.add_scaled(*a, v);
        }
        out
    }
}

impl Linear for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }
}

impl Linear for DVector<f64> {
    fn zero_like(&self) -> Self {
        DVector::zeros(self.len())
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        self.axpy(a, other, 1.0);
    }
}

impl Linear for DMatrix<f64> {
    fn zero_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        self.zip_apply(other, |x, y| *x += a * y);
    }
}

// Fourth-order stencils (coefficients over 12h).
const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const FORWARD_0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const FORWARD_1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

/// Derivative of uniformly sampled data, 4th order everywhere.
///
/// Central differences in the interior and one-sided five-point stencils at the
/// two nodes next to each end. Requires at least five samples.
pub fn fd_derivative<T: Linear>(values: &[T], h: f64) -> Result<Vec<T>> {
    let n = values.len();
    if n < 5 {
        return Err(Error::InvalidGrid(format!(
            "finite differences need at least 5 samples, got {n}"
        )));
    }
    let scale = 1.0 / (12.0 * h);
    let apply = |start: usize, weights: &[f64; 5], sign: f64| {
        let terms: Vec<(f64, &T)> = weights
            .iter()
            .enumerate()
            .map(|(j, w)| (sign * w * scale, &values[start + j]))
            .collect();
        T::combine(&terms)
    };
    let mut out = Vec::with_capacity(n);
    out.push(apply(0, &FORWARD_0, 1.0));
    out.push(apply(0, &FORWARD_1, 1.0));
    for k in 2..n - 2 {
        out.push(apply(k - 2, &CENTRAL, 1.0));
    }
    // mirrored one-sided stencils: reverse the node order and flip the sign
    let back = |weights: &[f64; 5]| {
        let terms: Vec<(f64, &T)> = weights
            .iter()
            .enumerate()
            .map(|(j, w)| (-w * scale, &values[n - 1 - j]))
            .collect();
        T::combine(&terms)
    };
    out.push(back(&FORWARD_1));
    out.push(back(&FORWARD_0));
    Ok(out)
}

/// Piecewise cubic (four-point Lagrange) interpolation of samples on a grid.
#[derive(Clone, Debug)]
pub struct Interpolant<'a, T> {
    grid: Grid,
    values: &'a [T],
}

impl<'a, T: Linear> Interpolant<'a, T> {
    pub fn new(grid: Grid, values: &'a [T]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn at(&self, s: f64) -> T {
        let n = self.values.len();
        let u = (s - self.grid.s0) / self.grid.step();
        let k = u.floor().clamp(0.0, (n - 2) as f64) as usize;
        let frac = u - k as f64;
        if frac.abs() < 1e-13 {
            return self.values[k].clone();
        }
        if (frac - 1.0).abs() < 1e-13 {
            return self.values[k + 1].clone();
        }
        // window of four nodes containing [k, k+1], shifted inside at the ends
        let first = k.saturating_sub(1).min(n - 4);
        let x = u - first as f64;
        let nodes = [0.0, 1.0, 2.0, 3.0];
        let mut terms: Vec<(f64, &T)> = Vec::with_capacity(4);
        for (j, xj) in nodes.iter().enumerate() {
            let mut w = 1.0;
            for (l, xl) in nodes.iter().enumerate() {
                if l != j {
                    w *= (x - xl) / (xj - xl);
                }
            }
            terms.push((w, &self.values[first + j]));
        }
        T::combine(&terms)
    }
}

/// How many RK4 steps are taken per grid interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepPolicy {
    #[default]
    Grid,
    Substep(usize),
}

impl StepPolicy {
    pub fn substeps(self) -> usize {
        match self {
            StepPolicy::Grid => 1,
            StepPolicy::Substep(k) => k.max(1),
        }
    }
}

impl std::str::FromStr for StepPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "grid" {
            return Ok(StepPolicy::Grid);
        }
        if let Some(k) = s.strip_prefix("substep:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad substep count in {s:?}")))?;
            if k == 0 {
                return Err(Error::InvalidInput("substep count must be positive".into()));
            }
            return Ok(StepPolicy::Substep(k));
        }
        Err(Error::InvalidInput(format!("unknown step policy {s:?}")))
    }
}

/// Classical RK4 over the grid, returning the state at every grid node.
///
/// `after_step` runs after every RK4 step and may modify the state (constraint
/// restoration) or abort the integration.
pub fn rk4_on_grid<T, F, P>(
    grid: &Grid,
    policy: StepPolicy,
    initial: T,
    mut rhs: F,
    mut after_step: P,
) -> Result<Vec<T>>
where
    T: Linear,
    F: FnMut(f64, &T) -> Result<T>,
    P: FnMut(f64, &mut T, usize) -> Result<()>,
{
    let substeps = policy.substeps();
    let h = grid.step() / substeps as f64;
    let mut out = Vec::with_capacity(grid.len());
    let mut y = initial;
    out.push(y.clone());
    let mut steps = 0usize;
    for k in 0..grid.len() - 1 {
        let base = grid.node(k);
        for j in 0..substeps {
            let s = base + j as f64 * h;
            let k1 = rhs(s, &y)?;
            let y2 = T::combine(&[(1.0, &y), (0.5 * h, &k1)]);
            let k2 = rhs(s + 0.5 * h, &y2)?;
            let y3 = T::combine(&[(1.0, &y), (0.5 * h, &k2)]);
            let k3 = rhs(s + 0.5 * h, &y3)?;
            let y4 = T::combine(&[(1.0, &y), (h, &k3)]);
            let s_next = if j + 1 == substeps { grid.node(k + 1) } else { s + h };
            let k4 = rhs(s_next, &y4)?;
            y = T::combine(&[
                (1.0, &y),
                (h / 6.0, &k1),
                (h / 3.0, &k2),
                (h / 3.0, &k3),
                (h / 6.0, &k4),
            ]);
            steps += 1;
            after_step(s_next, &mut y, steps)?;
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Antiderivative of sampled data by RK4 (Simpson's rule with cubic midpoints).
pub fn integrate_samples<T: Linear>(
    grid: &Grid,
    policy: StepPolicy,
    start: T,
    derivative: &[T],
) -> Result<Vec<T>> {
    let interp = Interpolant::new(*grid, derivative)?;
    rk4_on_grid(grid, policy, start, |s, _| Ok(interp.at(s)), |_, _, _| Ok(()))
}

/// Largest relative deviation of samples from their median.
pub fn relative_spread(values: &[f64]) -> (f64, f64) {
    let centre = median(values);
    let scale = centre.abs().max(f64::MIN_POSITIVE);
    let spread = values
        .iter()
        .map(|v| (v - centre).abs() / scale)
        .fold(0.0, f64::max);
    (centre, spread)
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
