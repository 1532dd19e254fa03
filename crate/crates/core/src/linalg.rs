//! Minimal 2×2 real matrix arithmetic.
//!
//! Single-mode moments never need anything bigger, and keeping the
//! determinants as explicit products avoids the rounding noise a general
//! LU factorization would add to near-cancelling fidelity computations.

/// A dense 2×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn diagonal(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    /// a·I for scalar a.
    pub const fn scaled_identity(a: f64) -> Self {
        Self::new(a, 0.0, 0.0, a)
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(a * self.m11, a * self.m12, a * self.m21, a * self.m22)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.m11 + o.m11,
            self.m12 + o.m12,
            self.m21 + o.m21,
            self.m22 + o.m22,
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_and_det() {
        let a = Mat2::new(1.0, 2.0, 3.0, 4.0);
        let b = Mat2::new(5.0, 6.0, 7.0, 8.0);
        let c = a.mul(&b);
        assert_eq!(c, Mat2::new(19.0, 22.0, 43.0, 50.0));
        assert_eq!(a.det(), -2.0);
        assert_eq!(a.transpose().mul_vec([1.0, 1.0]), [4.0, 6.0]);
    }
}
