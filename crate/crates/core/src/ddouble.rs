//! Double-double arithmetic (unevaluated sum of two `f64`), about 32
//! significant digits. Used where conserved quantities of long integrations
//! must be resolved below the `f64` rounding floor.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        DD { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - DD::from_f64(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - DD::from_f64(b).mul_f64(q2);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from_f64(q3)
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

/// 4x4 matrix of double-doubles, row-major.
pub type Mat4 = [[DD; 4]; 4];

pub fn mat4_from_f64(m: &[[f64; 4]; 4]) -> Mat4 {
    let mut out = [[DD::ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = DD::from_f64(m[i][j]);
        }
    }
    out
}

pub fn mat4_to_f64(m: &Mat4) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = m[i][j].to_f64();
        }
    }
    out
}

/// `x * m` with `m` exact in `f64`.
pub fn mat4_mul_f64(x: &Mat4, m: &[[f64; 4]; 4]) -> Mat4 {
    let mut out = [[DD::ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = DD::ZERO;
            for k in 0..4 {
                if m[k][j] != 0.0 {
                    acc = acc + x[i][k].mul_f64(m[k][j]);
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

/// `a + s b` entrywise.
pub fn mat4_axpy(a: &Mat4, s: DD, b: &Mat4) -> Mat4 {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[i][j] + s * b[i][j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_f64() {
        let a = DD::from_f64(1.0);
        let tiny = DD::from_f64(1e-20);
        let s = (a + tiny) - a;
        assert!((s.to_f64() - 1e-20).abs() < 1e-35);
        let third = DD::from_f64(1.0).div_f64(3.0);
        let back = third.mul_f64(3.0) - DD::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn product_is_exact_to_double_double() {
        let x = DD::from_f64(1.0 + 2f64.powi(-30));
        let y = x * x;
        let exact_lo = 2f64.powi(-60);
        assert_eq!(y.hi, 1.0 + 2f64.powi(-29));
        assert_eq!(y.lo, exact_lo);
    }
}
