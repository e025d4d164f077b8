//! Symmetric 2x2 matrices stored by their upper triangle.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn scaled_identity(s: f64) -> Self {
        Sym2::new(s, 0.0, s)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// cof [[a,b],[b,c]] = [[c,-b],[-b,a]]
    pub fn cofactor(&self) -> Sym2 {
        Sym2::new(self.yy, -self.xy, self.xx)
    }

    /// Frobenius product `A : B = trace(A^T B)`.
    pub fn frobenius(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.frobenius(self)
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let dev = 0.5 * (self.xx - self.yy);
        let radius = dev.hypot(self.xy);
        (mean - radius, mean + radius)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, m: Sym2) -> Sym2 {
        Sym2::new(self * m.xx, self * m.xy, self * m.yy)
    }
}

pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm_sq(a: [f64; 2]) -> f64 {
    dot(a, a)
}
