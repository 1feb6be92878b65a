//! Sets with closed-form projections on `R^n`.

use nalgebra::DVector;

use super::{project_simplex, ConvexSet, SetDescriptor};
use crate::error::{Error, Result};

/// `{x : lower <= x <= upper}`
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "box bounds of lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || l.is_nan() || u.is_nan()) {
            return Err(Error::InvalidParameter("box lower bound exceeds upper bound".into()));
        }
        Ok(Self {
            lower: DVector::from_vec(lower),
            upper: DVector::from_vec(upper),
        })
    }

    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

impl ConvexSet<DVector<f64>> for BoxSet {
    fn contains(&self, x: &DVector<f64>, feas_tol: f64) -> bool {
        x.len() == self.dim() && self.violation(x) <= feas_tol
    }

    fn violation(&self, x: &DVector<f64>) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .map(|(&xi, (&l, &u))| (l - xi).max(xi - u).max(0.0))
            .fold(0.0, f64::max)
    }

    fn support_point(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        let y = DVector::from_fn(self.dim(), |i, _| {
            if c[i] > 0.0 {
                self.upper[i]
            } else if c[i] < 0.0 {
                self.lower[i]
            } else if self.lower[i].is_finite() {
                self.lower[i]
            } else if self.upper[i].is_finite() {
                self.upper[i]
            } else {
                0.0
            }
        });
        if y.iter().all(|v| v.is_finite()) {
            Ok(y)
        } else {
            Err(Error::Unbounded)
        }
    }

    fn exact_project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_fn(self.dim(), |i, _| {
            v[i].clamp(self.lower[i], self.upper[i])
        }))
    }

    fn descriptor(&self) -> SetDescriptor {
        SetDescriptor::Box {
            lower: self.lower.iter().copied().collect(),
            upper: self.upper.iter().copied().collect(),
        }
    }
}

/// `{x : |x - center| <= radius}`
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: DVector<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid ball radius {radius}")));
        }
        Ok(Self {
            center: DVector::from_vec(center),
            radius,
        })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            center: DVector::zeros(n),
            radius: 1.0,
        }
    }
}

impl ConvexSet<DVector<f64>> for Ball {
    fn contains(&self, x: &DVector<f64>, feas_tol: f64) -> bool {
        x.len() == self.center.len() && self.violation(x) <= feas_tol
    }

    fn violation(&self, x: &DVector<f64>) -> f64 {
        ((x - &self.center).norm() - self.radius).max(0.0)
    }

    fn support_point(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        let norm = c.norm();
        if norm == 0.0 {
            return Ok(self.center.clone());
        }
        Ok(&self.center + c * (self.radius / norm))
    }

    fn exact_project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let offset = v - &self.center;
        let dist = offset.norm();
        if dist <= self.radius {
            Ok(v.clone())
        } else {
            Ok(&self.center + offset * (self.radius / dist))
        }
    }

    fn descriptor(&self) -> SetDescriptor {
        SetDescriptor::Ball {
            center: self.center.iter().copied().collect(),
            radius: self.radius,
        }
    }
}

/// Unit simplex `{x >= 0 : sum x = 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimplexSet {
    dim: usize,
}

impl SimplexSet {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("simplex dimension must be positive".into()));
        }
        Ok(Self { dim })
    }
}

impl ConvexSet<DVector<f64>> for SimplexSet {
    fn contains(&self, x: &DVector<f64>, feas_tol: f64) -> bool {
        x.len() == self.dim && self.violation(x) <= feas_tol
    }

    fn violation(&self, x: &DVector<f64>) -> f64 {
        let negative = x.iter().fold(0.0f64, |m, &v| m.max(-v));
        negative.max((x.sum() - 1.0).abs())
    }

    fn support_point(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        let best = c.imax();
        let mut y = DVector::zeros(self.dim);
        y[best] = 1.0;
        Ok(y)
    }

    fn exact_project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(project_simplex(v.as_slice())?))
    }

    fn descriptor(&self) -> SetDescriptor {
        SetDescriptor::Simplex { dim: self.dim }
    }
}

/// Second-order cone `{(x, t) : |x| <= t}` in `R^dim`, `t` the last coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LorentzCone {
    dim: usize,
}

impl LorentzCone {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter("Lorentz cone needs dimension >= 2".into()));
        }
        Ok(Self { dim })
    }

    fn split(v: &DVector<f64>) -> (f64, f64) {
        let n = v.len();
        (v.rows(0, n - 1).norm(), v[n - 1])
    }
}

impl ConvexSet<DVector<f64>> for LorentzCone {
    fn contains(&self, x: &DVector<f64>, feas_tol: f64) -> bool {
        x.len() == self.dim && self.violation(x) <= feas_tol
    }

    fn violation(&self, x: &DVector<f64>) -> f64 {
        let (xn, t) = Self::split(x);
        (xn - t).max(0.0)
    }

    /// The cone is unbounded: the supremum is finite (and attained at the
    /// origin) only for directions in the polar cone.
    fn support_point(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        let (cn, ct) = Self::split(c);
        if cn <= -ct {
            Ok(DVector::zeros(self.dim))
        } else {
            Err(Error::Unbounded)
        }
    }

    fn exact_project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let (xn, t) = Self::split(v);
        if xn <= t {
            return Ok(v.clone());
        }
        if xn <= -t {
            return Ok(DVector::zeros(self.dim));
        }
        let scale = 0.5 * (xn + t);
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n - 1 {
            out[i] = scale * v[i] / xn;
        }
        out[n - 1] = scale;
        Ok(out)
    }

    fn descriptor(&self) -> SetDescriptor {
        SetDescriptor::Lorentz { dim: self.dim }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::{ForcingParams, ToleranceFn};
    use crate::sets::certify_inexact_projection;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn box_clamps() {
        let b = BoxSet::uniform(2, 0.0, 1.0).unwrap();
        assert_eq!(b.exact_project(&v(&[2.0, -1.0])).unwrap(), v(&[1.0, 0.0]));
    }

    #[test]
    fn ball_scales_radially() {
        let p = Ball::unit(2).exact_project(&v(&[3.0, 4.0])).unwrap();
        assert!((p - v(&[0.6, 0.8])).norm() < 1e-15);
    }

    #[test]
    fn lorentz_polar_point_goes_to_origin() {
        let k = LorentzCone::new(2).unwrap();
        assert_eq!(k.exact_project(&v(&[0.0, -1.0])).unwrap(), v(&[0.0, 0.0]));
    }

    /// In R^2 the cone is generated by the rays (1, 1) and (-1, 1): the
    /// projection is the nearest of the origin, the point itself (if inside)
    /// and the projections onto the two rays.
    #[test]
    fn lorentz_matches_two_ray_oracle() {
        let k = LorentzCone::new(2).unwrap();
        let rays = [v(&[1.0, 1.0]) / 2f64.sqrt(), v(&[-1.0, 1.0]) / 2f64.sqrt()];
        for i in 0..41 {
            for j in 0..41 {
                let p = v(&[-2.0 + 0.1 * i as f64, -2.0 + 0.1 * j as f64]);
                let mut candidates = vec![v(&[0.0, 0.0])];
                if p[0].abs() <= p[1] {
                    candidates.push(p.clone());
                }
                for r in &rays {
                    candidates.push(r * r.dot(&p).max(0.0));
                }
                let oracle = candidates
                    .into_iter()
                    .min_by(|a, b| (a - &p).norm().total_cmp(&(b - &p).norm()))
                    .unwrap();
                let got = k.exact_project(&p).unwrap();
                assert!((got - oracle).norm() < 1e-12, "at {p:?}");
            }
        }
    }

    #[test]
    fn lorentz_projection_satisfies_cone_optimality() {
        let k = LorentzCone::new(4).unwrap();
        let p = v(&[1.0, -2.0, 0.5, 0.3]);
        let w = k.exact_project(&p).unwrap();
        assert!(k.contains(&w, 1e-12));
        // Moreau: w and p - w are orthogonal and p - w lies in the polar cone.
        assert!((&p - &w).dot(&w).abs() < 1e-12);
        let r = &p - &w;
        assert!(r.rows(0, 3).norm() <= -r[3] + 1e-12);
    }

    #[test]
    fn lorentz_support_is_unbounded_outside_polar() {
        let k = LorentzCone::new(3).unwrap();
        assert!(matches!(k.support_point(&v(&[1.0, 0.0, 0.0])), Err(Error::Unbounded)));
    }

    #[test]
    fn exact_projections_certify_with_zero_tolerance() {
        let g = ForcingParams::ZERO;
        let phi = ToleranceFn::Full;
        let u = v(&[0.2, 0.2, 0.2]);
        let p = v(&[1.7, -0.4, 0.9]);
        let sets: Vec<Box<dyn ConvexSet<DVector<f64>>>> = vec![
            Box::new(BoxSet::uniform(3, 0.0, 1.0).unwrap()),
            Box::new(Ball::unit(3)),
            Box::new(SimplexSet::new(3).unwrap()),
        ];
        for set in &sets {
            let w = set.exact_project(&p).unwrap();
            let (ok, gap) = certify_inexact_projection(set.as_ref(), &u, &p, &w, &g, &phi).unwrap();
            assert!(ok, "{:?}: gap {gap}", set.descriptor());
        }
    }

    #[test]
    fn box_rejects_inverted_bounds() {
        assert!(BoxSet::new(vec![1.0], vec![0.0]).is_err());
    }
}
