use serde::{Deserialize, Serialize};

use super::point::{Point, Tangent};
use super::spec::{ManifoldSpec, Segment, SegmentKind};
use super::sphere;
use crate::error::{Error, Result};
use crate::tolerances::TANGENT_REJECT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Dimension,
    NonFinite,
    SphereNorm,
    PreShapeCentroid,
    PreShapeNorm,
}

/// One failed point invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub factor: usize,
    pub copy: usize,
    pub segment: usize,
    pub constraint: Constraint,
    pub deviation: f64,
}

impl ManifoldSpec {
    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.total_ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.total_ambient_dim(), got: v.len() });
        }
        Ok(())
    }

    fn sphere_angle(&self, si: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        let theta = sphere::angle(x, y);
        if sphere::is_antipodal(theta) {
            return Err(Error::AntipodalPoints { segment: si, angle: theta });
        }
        Ok(theta)
    }

    /// Largest normal component of `v` at `x`, relative to `max(1, |v_s|)`,
    /// together with the offending segment.
    pub fn tangent_deviation(&self, x: &[f64], v: &[f64]) -> Result<(usize, f64)> {
        self.check_dim(x)?;
        self.check_dim(v)?;
        let mut worst = (0, 0.0);
        for (si, seg) in self.segments().iter().enumerate() {
            let (xs, vs) = (&x[seg.range()], &v[seg.range()]);
            let dev = match seg.kind {
                SegmentKind::Euclidean => 0.0,
                SegmentKind::Sphere => sphere::dot(xs, vs).abs(),
                SegmentKind::PreShape { landmarks, dim } => sphere::dot(xs, vs)
                    .abs()
                    .max(sphere::centroid_deviation(vs, landmarks, dim)),
            } / sphere::norm(vs).max(1.0);
            if dev > worst.1 {
                worst = (si, dev);
            }
        }
        Ok(worst)
    }

    /// Exponential map, factor-wise. Sphere and pre-shape results are
    /// re-normalized (and re-centered) so they stay on the manifold.
    pub fn exp(&self, x: &Point, v: &Tangent) -> Result<Point> {
        let (segment, deviation) = self.tangent_deviation(x, v)?;
        if deviation > TANGENT_REJECT_TOL {
            return Err(Error::NotTangent { segment, deviation });
        }
        Ok(self.exp_unchecked(x, v))
    }

    pub(crate) fn exp_unchecked(&self, x: &[f64], v: &[f64]) -> Point {
        let mut out = vec![0.0; x.len()];
        for seg in self.segments() {
            let r = seg.range();
            let (xs, vs, os) = (&x[r.clone()], &v[r.clone()], &mut out[r]);
            match seg.kind {
                SegmentKind::Euclidean => {
                    for ((o, a), b) in os.iter_mut().zip(xs).zip(vs) {
                        *o = a + b;
                    }
                }
                SegmentKind::Sphere => {
                    sphere::exp(xs, vs, os);
                    if vs.iter().any(|&c| c != 0.0) {
                        sphere::normalize(os);
                    }
                }
                SegmentKind::PreShape { landmarks, dim } => {
                    sphere::exp(xs, vs, os);
                    if vs.iter().any(|&c| c != 0.0) {
                        sphere::center_rows(os, landmarks, dim);
                        sphere::normalize(os);
                    }
                }
            }
        }
        Point(out)
    }

    /// Logarithm map, factor-wise. Fails with `AntipodalPoints` when a curved
    /// segment has no unique minimizing geodesic.
    pub fn log(&self, x: &Point, y: &Point) -> Result<Tangent> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let mut out = vec![0.0; x.len()];
        for (si, seg) in self.segments().iter().enumerate() {
            let r = seg.range();
            let (xs, ys) = (&x[r.clone()], &y[r.clone()]);
            let os = &mut out[r];
            match seg.kind {
                SegmentKind::Euclidean => {
                    for ((o, a), b) in os.iter_mut().zip(xs).zip(ys) {
                        *o = b - a;
                    }
                }
                SegmentKind::Sphere | SegmentKind::PreShape { .. } => {
                    let theta = self.sphere_angle(si, xs, ys)?;
                    sphere::log(xs, ys, theta, os);
                }
            }
        }
        Ok(Tangent(out))
    }

    /// Point at time `t ∈ [0, 1]` on the minimizing geodesic from `x0` to `x1`.
    /// Euclidean segments use `(1 − t)·x0 + t·x1`.
    pub fn geodesic(&self, x0: &Point, x1: &Point, t: f64) -> Result<Point> {
        check_unit_time(t)?;
        self.check_dim(x0)?;
        self.check_dim(x1)?;
        let mut out = vec![0.0; x0.len()];
        for (si, seg) in self.segments().iter().enumerate() {
            let r = seg.range();
            let (a, b) = (&x0[r.clone()], &x1[r.clone()]);
            let os = &mut out[r];
            match seg.kind {
                SegmentKind::Euclidean => {
                    for ((o, p), q) in os.iter_mut().zip(a).zip(b) {
                        *o = (1.0 - t) * p + t * q;
                    }
                }
                SegmentKind::Sphere | SegmentKind::PreShape { .. } => {
                    let theta = self.sphere_angle(si, a, b)?;
                    sphere::geodesic(a, b, theta, t, os);
                    if t != 0.0 && t != 1.0 {
                        if let SegmentKind::PreShape { landmarks, dim } = seg.kind {
                            sphere::center_rows(os, landmarks, dim);
                        }
                        sphere::normalize(os);
                    }
                }
            }
        }
        Ok(Point(out))
    }

    /// Analytic time derivative of [`geodesic`](Self::geodesic) at `t`.
    /// Euclidean segments return `x1 − x0`.
    pub fn geodesic_velocity(&self, x0: &Point, x1: &Point, t: f64) -> Result<Tangent> {
        let at = self.geodesic(x0, x1, t)?;
        let mut out = vec![0.0; x0.len()];
        for (si, seg) in self.segments().iter().enumerate() {
            let r = seg.range();
            let (a, b, g) = (&x0[r.clone()], &x1[r.clone()], &at[r.clone()]);
            let os = &mut out[r];
            match seg.kind {
                SegmentKind::Euclidean => {
                    for ((o, p), q) in os.iter_mut().zip(a).zip(b) {
                        *o = q - p;
                    }
                }
                SegmentKind::Sphere | SegmentKind::PreShape { .. } => {
                    let theta = self.sphere_angle(si, a, b)?;
                    sphere::velocity(a, b, theta, t, g, os);
                }
            }
        }
        Ok(Tangent(out))
    }

    /// Orthogonal projection of an ambient vector onto `T_x M`.
    pub fn project_tangent(&self, x: &Point, a: &[f64]) -> Result<Tangent> {
        self.check_dim(x)?;
        self.check_dim(a)?;
        Ok(Tangent(self.project_unchecked(x, a)))
    }

    pub(crate) fn project_unchecked(&self, x: &[f64], a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.project_into(x, a, &mut out);
        out
    }

    pub(crate) fn project_into(&self, x: &[f64], a: &[f64], out: &mut [f64]) {
        for seg in self.segments() {
            let r = seg.range();
            let (xs, as_) = (&x[r.clone()], &a[r.clone()]);
            let os = &mut out[r];
            match seg.kind {
                SegmentKind::Euclidean => os.copy_from_slice(as_),
                SegmentKind::Sphere => sphere::project(xs, as_, os),
                SegmentKind::PreShape { landmarks, dim } => {
                    let mut centered = as_.to_vec();
                    sphere::center_rows(&mut centered, landmarks, dim);
                    sphere::project(xs, &centered, os);
                }
            }
        }
    }

    /// Per-segment geodesic distances.
    pub fn segment_distances(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self
            .segments()
            .iter()
            .map(|seg| segment_distance(seg, &x[seg.range()], &y[seg.range()]))
            .collect())
    }

    /// Product geodesic distance: root of the sum of squared segment distances.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    pub(crate) fn distance_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.segments()
            .iter()
            .map(|seg| {
                let d = segment_distance(seg, &x[seg.range()], &y[seg.range()]);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Every point invariant that fails by more than `tol`. Empty when `x`
    /// is a valid point.
    pub fn validate_point(&self, x: &[f64], tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        if x.len() != self.total_ambient_dim() {
            out.push(Violation {
                factor: 0,
                copy: 0,
                segment: 0,
                constraint: Constraint::Dimension,
                deviation: (x.len() as f64 - self.total_ambient_dim() as f64).abs(),
            });
            return out;
        }
        for (si, seg) in self.segments().iter().enumerate() {
            for (constraint, deviation) in segment_deviations(seg, &x[seg.range()]) {
                if deviation > tol || deviation.is_nan() {
                    out.push(Violation { factor: seg.factor, copy: seg.copy, segment: si, constraint, deviation });
                }
            }
        }
        out
    }

    /// Largest deviation over all point invariants (0 for a perfect point).
    pub fn max_point_deviation(&self, x: &[f64]) -> f64 {
        self.segments()
            .iter()
            .flat_map(|seg| segment_deviations(seg, &x[seg.range()]))
            .map(|(_, d)| if d.is_nan() { f64::INFINITY } else { d })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn segment_deviations(seg: &Segment, xs: &[f64]) -> Vec<(Constraint, f64)> {
    let mut out = Vec::with_capacity(2);
    if xs.iter().any(|v| !v.is_finite()) {
        out.push((Constraint::NonFinite, f64::INFINITY));
        return out;
    }
    match seg.kind {
        SegmentKind::Euclidean => {}
        SegmentKind::Sphere => out.push((Constraint::SphereNorm, (sphere::norm(xs) - 1.0).abs())),
        SegmentKind::PreShape { landmarks, dim } => {
            out.push((Constraint::PreShapeCentroid, sphere::centroid_deviation(xs, landmarks, dim)));
            out.push((Constraint::PreShapeNorm, (sphere::norm(xs) - 1.0).abs()));
        }
    }
    out
}

fn segment_distance(seg: &Segment, a: &[f64], b: &[f64]) -> f64 {
    match seg.kind {
        SegmentKind::Euclidean => a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt(),
        SegmentKind::Sphere | SegmentKind::PreShape { .. } => sphere::angle(a, b),
    }
}

fn check_unit_time(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("geodesic time t = {t} outside [0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::manifold::FactorSpec;
    use crate::tolerances::POINT_TOL;

    fn p(v: &[f64]) -> Point {
        Point(v.to_vec())
    }
    fn tv(v: &[f64]) -> Tangent {
        Tangent(v.to_vec())
    }
    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn exp_quarter_arc() {
        let s3 = ManifoldSpec::sphere(3).unwrap();
        let y = s3.exp(&p(&[1.0, 0.0, 0.0, 0.0]), &tv(&[0.0, FRAC_PI_2, 0.0, 0.0])).unwrap();
        close(&y, &[0.0, 1.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn exp_zero_is_identity() {
        let m = ManifoldSpec::new(vec![FactorSpec::euclidean(2), FactorSpec::sphere(2)]).unwrap();
        let x = p(&[0.3, -1.0, 0.6, 0.0, 0.8]);
        assert_eq!(m.exp(&x, &Tangent::zeros(5)).unwrap(), x);
    }

    #[test]
    fn exp_euclidean_is_addition() {
        let r3 = ManifoldSpec::euclidean(3).unwrap();
        let y = r3.exp(&p(&[1.0, 2.0, 3.0]), &tv(&[1.0, 0.0, -1.0])).unwrap();
        assert_eq!(y.0, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn exp_rejects_normal_component() {
        let s2 = ManifoldSpec::sphere(2).unwrap();
        let err = s2.exp(&p(&[1.0, 0.0, 0.0]), &tv(&[0.1, 0.2, 0.0])).unwrap_err();
        assert!(matches!(err, Error::NotTangent { .. }));
        let err = s2.exp(&p(&[1.0, 0.0]), &tv(&[0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn exp_small_vector_branch_stays_on_sphere() {
        let s2 = ManifoldSpec::sphere(2).unwrap();
        let y = s2.exp(&p(&[1.0, 0.0, 0.0]), &tv(&[0.0, 3e-7, -2e-7])).unwrap();
        assert!((sphere::norm(&y) - 1.0).abs() < 1e-15);
        close(&y, &[1.0, 3e-7, -2e-7], 1e-13);
    }

    #[test]
    fn log_examples() {
        let s3 = ManifoldSpec::sphere(3).unwrap();
        let v = s3.log(&p(&[1.0, 0.0, 0.0, 0.0]), &p(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        close(&v, &[0.0, FRAC_PI_2, 0.0, 0.0], 1e-15);
        let x = p(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(s3.log(&x, &x).unwrap().0, vec![0.0; 4]);

        let s2 = ManifoldSpec::sphere(2).unwrap();
        let y = p(&[0.3f64.cos(), 0.3f64.sin(), 0.0]);
        let v = s2.log(&p(&[1.0, 0.0, 0.0]), &y).unwrap();
        close(&v, &[0.0, 0.3, 0.0], 1e-15);
        close(&s2.exp(&p(&[1.0, 0.0, 0.0]), &v).unwrap(), &y, 1e-15);
        assert!((v.norm() - (0.3f64.cos()).acos()).abs() < 1e-12);
    }

    #[test]
    fn log_rejects_antipodes() {
        let s2 = ManifoldSpec::sphere(2).unwrap();
        let err = s2.log(&p(&[1.0, 0.0, 0.0]), &p(&[-1.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::AntipodalPoints { .. }));
        let err = s2.geodesic(&p(&[0.0, 0.0, 1.0]), &p(&[0.0, 0.0, -1.0]), 0.5).unwrap_err();
        assert!(matches!(err, Error::AntipodalPoints { .. }));
    }

    #[test]
    fn geodesic_examples() {
        let s3 = ManifoldSpec::sphere(3).unwrap();
        let g = s3.geodesic(&p(&[1.0, 0.0, 0.0, 0.0]), &p(&[0.0, 1.0, 0.0, 0.0]), 0.5).unwrap();
        let h = 2f64.sqrt() / 2.0;
        close(&g, &[h, h, 0.0, 0.0], 1e-15);

        let r2 = ManifoldSpec::euclidean(2).unwrap();
        let g = r2.geodesic(&p(&[0.0, 0.0]), &p(&[2.0, 4.0]), 0.25).unwrap();
        assert_eq!(g.0, vec![0.5, 1.0]);

        assert!(matches!(
            r2.geodesic(&p(&[0.0, 0.0]), &p(&[2.0, 4.0]), 1.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn preshape_geodesic_midpoint() {
        // X0, X1 are orthogonal pre-shapes (θ = π/2), so Γ(½) = (X0 + X1)/√2.
        let m = ManifoldSpec::preshape(2, 3).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let x0 = p(&[s, 0.0, 0.0, -s, 0.0, 0.0]);
        let x1 = p(&[0.0, s, 0.0, 0.0, -s, 0.0]);
        assert!(m.validate_point(&x0, POINT_TOL).is_empty());
        let g = m.geodesic(&x0, &x1, 0.5).unwrap();
        let w = (FRAC_PI_2 / 2.0).sin() / FRAC_PI_2.sin();
        let expect: Vec<f64> = x0.iter().zip(x1.iter()).map(|(a, b)| w * (a + b)).collect();
        close(&g, &expect, 1e-15);
        assert!(m.validate_point(&g, 1e-12).is_empty());
    }

    #[test]
    fn velocity_examples() {
        let r2 = ManifoldSpec::euclidean(2).unwrap();
        let v = r2.geodesic_velocity(&p(&[1.0, 2.0]), &p(&[-1.0, 5.0]), 0.3).unwrap();
        assert_eq!(v.0, vec![-2.0, 3.0]);

        let s3 = ManifoldSpec::sphere(3).unwrap();
        let x0 = p(&[1.0, 0.0, 0.0, 0.0]);
        let x1 = p(&[0.0, 1.0, 0.0, 0.0]);
        let v = s3.geodesic_velocity(&x0, &x1, 0.0).unwrap();
        close(&v, &s3.log(&x0, &x1).unwrap(), 1e-15);
        close(&v, &[0.0, FRAC_PI_2, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn velocity_small_angle_branch() {
        let s2 = ManifoldSpec::sphere(2).unwrap();
        let x0 = p(&[1.0, 0.0, 0.0]);
        let x1 = s2.exp(&x0, &tv(&[0.0, 4e-7, 0.0])).unwrap();
        let v = s2.geodesic_velocity(&x0, &x1, 0.5).unwrap();
        assert!((v.norm() - 4e-7).abs() < 1e-18);
    }

    #[test]
    fn projection_examples() {
        let s3 = ManifoldSpec::sphere(3).unwrap();
        let x = p(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s3.project_tangent(&x, &[5.0, 1.0, 2.0, 3.0]).unwrap().0, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(s3.project_tangent(&x, &[0.0; 4]).unwrap().0, vec![0.0; 4]);
        let s2 = ManifoldSpec::sphere(2).unwrap();
        let a = [0.0, 0.4, -0.2];
        assert_eq!(s2.project_tangent(&p(&[1.0, 0.0, 0.0]), &a).unwrap().0, a.to_vec());
        assert!(matches!(s2.project_tangent(&p(&[1.0, 0.0, 0.0]), &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn preshape_projection_is_centered_and_orthogonal() {
        let m = ManifoldSpec::preshape(3, 2).unwrap();
        let mut x = vec![1.0, 0.0, -0.5, 0.8, -0.5, -0.8];
        sphere::normalize(&mut x);
        let x = p(&x);
        let v = m.project_tangent(&x, &[0.3, 1.0, -2.0, 0.1, 0.7, 0.7]).unwrap();
        assert!(sphere::centroid_deviation(&v, 3, 2) < 1e-15);
        assert!(sphere::dot(&v, &x).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        let s3 = ManifoldSpec::sphere(3).unwrap();
        let d = s3.distance(&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((d - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(s3.distance(&[0.5; 4], &[0.5; 4]).unwrap(), 0.0);
        let m = ManifoldSpec::new(vec![FactorSpec::euclidean(1), FactorSpec::sphere(1)]).unwrap();
        let d = m.distance(&[0.0, 1.0, 0.0], &[3.0, 0.0, 1.0]).unwrap();
        assert!((d - (9.0 + PI * PI / 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn validate_examples() {
        let s3 = ManifoldSpec::sphere(3).unwrap();
        assert!(s3.validate_point(&[0.5, 0.5, 0.5, 0.5], 1e-12).is_empty());
        let v = s3.validate_point(&[1.01, 0.0, 0.0, 0.0], 1e-6);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, Constraint::SphereNorm);
        assert!((v[0].deviation - 0.01).abs() < 1e-12);

        let m = ManifoldSpec::new(vec![FactorSpec::euclidean(3), FactorSpec::preshape(2, 2)]).unwrap();
        let s = ((1.0 - 2.0 * 0.01) / 4.0f64).sqrt();
        let v = m.validate_point(&[0.0, 0.0, 0.0, s + 0.1, s, -s + 0.1, -s], 1e-6);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, Constraint::PreShapeCentroid);
        assert_eq!(v[0].factor, 1);
        assert!((v[0].deviation - 0.1).abs() < 1e-12);

        let v = m.validate_point(&[0.0; 3], 1e-6);
        assert_eq!(v[0].constraint, Constraint::Dimension);
        let v = s3.validate_point(&[f64::NAN, 1.0, 0.0, 0.0], 1e-6);
        assert_eq!(v[0].constraint, Constraint::NonFinite);
    }
}
