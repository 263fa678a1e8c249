//! Clifford algebra of Euclidean `R^n` for `n <= 4`.
//!
//! Multivectors are stored densely: coefficient `k` belongs to the basis blade
//! whose index set is the bit pattern of `k` (bit `i` set means `e_{i+1}` is a
//! factor, factors in increasing order). So for `n = 3` the layout is
//! `1, e1, e2, e12, e3, e13, e23, e123`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Relative degeneracy tolerance for vector inversion.
pub const DEGENERACY_TOL: f64 = 1e-12;

const MAX_BLADES: usize = 1 << MAX_DIM;

#[derive(Clone, Copy, PartialEq)]
pub struct Multivector {
    n: usize,
    coeffs: [f64; MAX_BLADES],
}

/// Sign picked up when the blade product `a * b` is brought to canonical order.
fn reorder_sign(a: usize, b: usize) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

impl Multivector {
    pub fn zero(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            n,
            coeffs: [0.0; MAX_BLADES],
        })
    }

    pub fn scalar(n: usize, value: f64) -> Result<Self> {
        let mut mv = Self::zero(n)?;
        mv.coeffs[0] = value;
        Ok(mv)
    }

    /// Grade-1 element with the given Euclidean components.
    pub fn vector(components: &[f64]) -> Result<Self> {
        let mut mv = Self::zero(components.len())?;
        for (i, c) in components.iter().enumerate() {
            mv.coeffs[1 << i] = *c;
        }
        Ok(mv)
    }

    /// The basis vector `e_i` (1-based, as in the usual notation).
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::InvalidInput(format!("basis index {i} out of range 1..={n}")));
        }
        let mut mv = Self::zero(n)?;
        mv.coeffs[1 << (i - 1)] = 1.0;
        Ok(mv)
    }

    /// Single blade given by its bit pattern.
    pub fn blade(n: usize, mask: usize, coeff: f64) -> Result<Self> {
        let mut mv = Self::zero(n)?;
        if mask >= 1 << n {
            return Err(Error::InvalidInput(format!("blade mask {mask:#b} exceeds dimension {n}")));
        }
        mv.coeffs[mask] = coeff;
        Ok(mv)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn blade_count(&self) -> usize {
        1 << self.n
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.blade_count()]
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coeffs[1 << i]).collect()
    }

    pub fn grade(&self, k: usize) -> Self {
        let mut out = *self;
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            if mask.count_ones() as usize != k {
                *c = 0.0;
            }
        }
        out
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Norm of everything but the scalar part.
    pub fn non_scalar_norm(&self) -> f64 {
        self.coeffs()[1..].iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_vector(&self, tol: f64) -> bool {
        self.coeffs()
            .iter()
            .enumerate()
            .all(|(mask, c)| mask.count_ones() == 1 || c.abs() <= tol)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// Reversion: reverses the order of vector factors in every blade.
    pub fn reverse(&self) -> Self {
        let mut out = *self;
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            let k = mask.count_ones();
            if (k * k.saturating_sub(1) / 2) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    pub fn geometric_product(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let count = self.blade_count();
        let mut out = [0.0; MAX_BLADES];
        for a in 0..count {
            let ca = self.coeffs[a];
            if ca == 0.0 {
                continue;
            }
            for b in 0..count {
                let cb = other.coeffs[b];
                if cb == 0.0 {
                    continue;
                }
                out[a ^ b] += reorder_sign(a, b) * ca * cb;
            }
        }
        Ok(Self { n: self.n, coeffs: out })
    }

    fn checked_sum(&self, other: &Self, sign: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let mut out = *self;
        for (c, o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += sign * o;
        }
        Ok(out)
    }

    /// Inverse `v / |v|^2` of a grade-1 element.
    ///
    /// `scale` is the magnitude of the operands the vector was formed from; the
    /// vector counts as degenerate when `|v| <= DEGENERACY_TOL * max(scale, 1)`.
    pub fn vector_inverse_scaled(&self, scale: f64) -> Result<Self> {
        let tol = DEGENERACY_TOL * (scale.max(1.0) + self.norm());
        if !self.is_vector(tol) {
            return Err(Error::InvalidInput("vector_inverse expects a grade-1 element".into()));
        }
        let norm_sq: f64 = self.vector_part().iter().map(|c| c * c).sum();
        let norm = norm_sq.sqrt();
        if norm <= DEGENERACY_TOL * scale.max(1.0) {
            return Err(Error::DegenerateSecant { norm });
        }
        Ok(self.grade(1).scale(1.0 / norm_sq))
    }

    pub fn vector_inverse(&self) -> Result<Self> {
        self.vector_inverse_scaled(self.norm())
    }
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "Multivector(")?;
        for (mask, c) in self.coeffs().iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if mask != 0 {
                write!(f, "e")?;
                for i in 0..self.n {
                    if mask & (1 << i) != 0 {
                        write!(f, "{}", i + 1)?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(self, rhs: Multivector) -> Multivector {
        self.checked_sum(&rhs, 1.0).expect("multivector dimension mismatch")
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(self, rhs: Multivector) -> Multivector {
        self.checked_sum(&rhs, -1.0).expect("multivector dimension mismatch")
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Mul for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: Multivector) -> Multivector {
        self.geometric_product(&rhs).expect("multivector dimension mismatch")
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: f64) -> Multivector {
        self.scale(rhs)
    }
}

/// Cyclic cross ratio `(p1-p2)(p2-p3)^{-1}(p3-p4)(p4-p1)^{-1}` of four points.
///
/// The value is real (a scalar) exactly when the points are concircular.
pub fn clifford_cross_ratio(
    p1: &Multivector,
    p2: &Multivector,
    p3: &Multivector,
    p4: &Multivector,
) -> Result<Multivector> {
    let scale = [p1, p2, p3, p4].iter().map(|p| p.norm()).fold(0.0, f64::max);
    let inv = |v: Multivector| {
        v.vector_inverse_scaled(scale).map_err(|e| match e {
            Error::DegenerateSecant { .. } => Error::CoincidentPoints,
            other => other,
        })
    };
    let a = p1.checked_sum(p2, -1.0)?;
    let b = inv(p2.checked_sum(p3, -1.0)?)?;
    let c = p3.checked_sum(p4, -1.0)?;
    let d = inv(p4.checked_sum(p1, -1.0)?)?;
    a.geometric_product(&b)?
        .geometric_product(&c)?
        .geometric_product(&d)
}

/// `a b^{-1} a` for vectors, the reflection used by the Riccati right-hand side.
pub fn sandwich_inverse(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    let inv = b.vector_inverse()?;
    Ok(a.geometric_product(&inv)?.geometric_product(a)?.grade(1))
}
