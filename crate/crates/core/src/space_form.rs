//! Ambient space forms `R^n_t`, `S^n_t(c)`, `H^n_t(c)` as level sets of a
//! flat pseudo-Euclidean space.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::pgeom::Signature;

/// `N^n_t(c)`. For `c != 0` the model is `{x : <x,x> = 1/c}` inside a flat
/// space of dimension `n + 1`; for `c = 0` it is the flat space itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceForm {
    dim: usize,
    index: usize,
    curvature: f64,
}

impl SpaceForm {
    pub fn new(dim: usize, index: usize, curvature: f64) -> Result<Self> {
        if dim == 0 || index > dim {
            return Err(GeomError::Invalid(format!(
                "space form needs 0 <= t <= n with n > 0 (got n = {dim}, t = {index})"
            )));
        }
        if !curvature.is_finite() {
            return Err(GeomError::Invalid("curvature must be finite".into()));
        }
        Ok(Self {
            dim,
            index,
            curvature,
        })
    }

    /// `S^n_t(c)`, `c > 0`.
    pub fn sphere(dim: usize, index: usize, curvature: f64) -> Result<Self> {
        if curvature <= 0.0 {
            return Err(GeomError::ConstraintViolation(format!(
                "pseudo-sphere requires c > 0 (got {curvature})"
            )));
        }
        Self::new(dim, index, curvature)
    }

    /// `H^n_t(c)`, `c < 0`.
    pub fn hyperbolic(dim: usize, index: usize, curvature: f64) -> Result<Self> {
        if curvature >= 0.0 {
            return Err(GeomError::ConstraintViolation(format!(
                "pseudo-hyperbolic space requires c < 0 (got {curvature})"
            )));
        }
        Self::new(dim, index, curvature)
    }

    /// `R^n_t`.
    pub fn flat(dim: usize, index: usize) -> Result<Self> {
        Self::new(dim, index, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn is_flat(&self) -> bool {
        self.curvature == 0.0
    }

    /// Signature of the surrounding flat space.
    pub fn flat_model(&self) -> Signature {
        let (n, t) = if self.curvature > 0.0 {
            (self.dim + 1, self.index)
        } else if self.curvature < 0.0 {
            (self.dim + 1, self.index + 1)
        } else {
            (self.dim, self.index)
        };
        Signature::new(n, t).expect("space form invariants imply a valid flat signature")
    }

    /// `|<x,x> - 1/c| < tol`; always true in the flat case.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if self.is_flat() {
            return true;
        }
        let sig = self.flat_model();
        if x.len() != sig.dim() {
            return false;
        }
        (sig.dot(x, x) - 1.0 / self.curvature).abs() < tol
    }

    /// `R(X,Y)Z = c(<Y,Z>X - <X,Z>Y)` in flat coordinates.
    pub fn curvature_tensor(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        let sig = self.flat_model();
        for v in [x, y, z] {
            if v.len() != sig.dim() {
                return Err(GeomError::DimensionMismatch {
                    expected: sig.dim(),
                    got: v.len(),
                });
            }
        }
        let c = self.curvature;
        let yz = sig.dot(y, z);
        let xz = sig.dot(x, z);
        Ok(x.iter()
            .zip(y)
            .map(|(xi, yi)| c * (yz * xi - xz * yi))
            .collect())
    }

    /// Same as [`curvature_tensor`](Self::curvature_tensor), after checking
    /// that the three vectors are tangent at `point`.
    pub fn curvature_tensor_at(
        &self,
        point: &[f64],
        x: &[f64],
        y: &[f64],
        z: &[f64],
        tol: f64,
    ) -> Result<Vec<f64>> {
        if !self.is_flat() {
            let sig = self.flat_model();
            if point.len() != sig.dim() {
                return Err(GeomError::DimensionMismatch {
                    expected: sig.dim(),
                    got: point.len(),
                });
            }
            for v in [x, y, z] {
                if v.len() == sig.dim() {
                    let r = sig.dot(v, point).abs();
                    if r > tol {
                        return Err(GeomError::NotTangent(r));
                    }
                }
            }
        }
        self.curvature_tensor(x, y, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_models() {
        let s = SpaceForm::sphere(3, 1, 1.0).unwrap();
        assert_eq!(s.flat_model(), Signature::new(4, 1).unwrap());
        let h = SpaceForm::hyperbolic(3, 1, -1.0).unwrap();
        assert_eq!(h.flat_model(), Signature::new(4, 2).unwrap());
        let r = SpaceForm::flat(3, 1).unwrap();
        assert_eq!(r.flat_model(), Signature::new(3, 1).unwrap());
    }

    #[test]
    fn membership_examples() {
        let s = SpaceForm::sphere(3, 1, 1.0).unwrap();
        assert!(s.contains(&[0.0, 0.0, 0.0, 1.0], 1e-12));
        assert!(!s.contains(&[1.0, 1.0, 1.0, 1.0], 1e-12));
        let h = SpaceForm::hyperbolic(3, 1, -1.0).unwrap();
        assert!(h.contains(&[1.0, 0.0, 0.0, 0.0], 1e-12));
        assert!(SpaceForm::flat(2, 0).unwrap().contains(&[5.0, 7.0], 1e-12));
    }

    #[test]
    fn membership_is_scale_consistent() {
        let c = 4.0;
        let s = SpaceForm::sphere(2, 0, c).unwrap();
        let x = [0.0, 0.6, 0.8];
        let scaled: Vec<f64> = x.iter().map(|v| v / c.sqrt()).collect();
        assert!(s.contains(&scaled, 1e-12));
        let back: Vec<f64> = scaled.iter().map(|v| v * c.sqrt() / c.sqrt()).collect();
        assert_eq!(s.contains(&back, 1e-12), s.contains(&scaled, 1e-12));
    }

    #[test]
    fn curvature_tensor_examples() {
        let r = SpaceForm::flat(3, 1).unwrap();
        let out = r.curvature_tensor(&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0], &[4.0, 0.0, 1.0]).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));

        // c = 1, <X,Z> = 0, <Y,Z> = 1 gives X.
        let s = SpaceForm::sphere(3, 1, 1.0).unwrap();
        let x = [0.0, 1.0, 0.0, 0.0];
        let y = [0.0, 0.0, 1.0, 0.0];
        let out = s.curvature_tensor(&x, &y, &y).unwrap();
        assert_eq!(out, x.to_vec());

        // c = -1, X = Z spacelike unit, Y orthogonal: result is Y.
        let h = SpaceForm::hyperbolic(3, 1, -1.0).unwrap();
        let z = [0.0, 0.0, 1.0, 0.0];
        let y = [0.0, 0.0, 0.0, 1.0];
        let out = h.curvature_tensor(&z, &y, &z).unwrap();
        assert_eq!(out, y.to_vec());
    }

    #[test]
    fn curvature_tensor_is_antisymmetric() {
        let h = SpaceForm::hyperbolic(3, 1, -0.7).unwrap();
        let x = [0.3, -1.2, 0.5, 2.0];
        let y = [1.1, 0.4, -0.9, 0.2];
        let z = [-0.5, 0.8, 1.3, -0.1];
        let a = h.curvature_tensor(&x, &y, &z).unwrap();
        let b = h.curvature_tensor(&y, &x, &z).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(*p, -*q);
        }
    }

    #[test]
    fn tangency_is_checked() {
        let s = SpaceForm::sphere(3, 1, 1.0).unwrap();
        let p = [0.0, 0.0, 0.0, 1.0];
        let normal = [0.0, 0.0, 0.0, 1.0];
        let t = [0.0, 1.0, 0.0, 0.0];
        assert!(matches!(
            s.curvature_tensor_at(&p, &normal, &t, &t, 1e-9),
            Err(GeomError::NotTangent(_))
        ));
        assert!(s.curvature_tensor_at(&p, &t, &t, &t, 1e-9).is_ok());
    }
}
