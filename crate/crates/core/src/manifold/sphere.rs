//! Segment-level formulas for unit spheres.
//!
//! A pre-shape is the unit sphere inside the subspace of centered `k × m`
//! matrices, so both factor kinds share these routines; pre-shape callers
//! additionally re-center with [`center_rows`].

use std::f64::consts::PI;

use crate::tolerances::{ANTIPODAL_MARGIN, SMALL_ANGLE};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Great-circle angle between unit vectors, `2·atan2(|x − y|, |x + y|)`.
///
/// Symmetric in its arguments and accurate at both ends of `[0, π]`,
/// where `acos` of the inner product loses half the digits.
pub(crate) fn angle(x: &[f64], y: &[f64]) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (a, b) in x.iter().zip(y) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

pub(crate) fn is_antipodal(theta: f64) -> bool {
    theta >= PI - ANTIPODAL_MARGIN
}

/// Subtract the landmark centroid from each coordinate column of a
/// row-major `k × m` block.
pub(crate) fn center_rows(a: &mut [f64], landmarks: usize, dim: usize) {
    for c in 0..dim {
        let mean = (0..landmarks).map(|r| a[r * dim + c]).sum::<f64>() / landmarks as f64;
        for r in 0..landmarks {
            a[r * dim + c] -= mean;
        }
    }
}

/// Largest absolute landmark-centroid coordinate.
pub(crate) fn centroid_deviation(a: &[f64], landmarks: usize, dim: usize) -> f64 {
    (0..dim)
        .map(|c| ((0..landmarks).map(|r| a[r * dim + c]).sum::<f64>() / landmarks as f64).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn normalize(a: &mut [f64]) {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|v| *v /= n);
    }
}

pub(crate) fn exp(x: &[f64], v: &[f64], out: &mut [f64]) {
    let n = norm(v);
    if n == 0.0 {
        out.copy_from_slice(x);
        return;
    }
    let (c, s) = if n < SMALL_ANGLE {
        (1.0 - 0.5 * n * n, 1.0 - n * n / 6.0)
    } else {
        (n.cos(), n.sin() / n)
    };
    for ((o, xi), vi) in out.iter_mut().zip(x).zip(v) {
        *o = c * xi + s * vi;
    }
}

/// Writes `Log_x(y)` into `out`. Caller checks the angle for antipodality.
pub(crate) fn log(x: &[f64], y: &[f64], theta: f64, out: &mut [f64]) {
    let c = dot(x, y);
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = yi - c * xi;
    }
    // second Gram-Schmidt pass keeps the result orthogonal to x
    let r = dot(out, x);
    for (o, xi) in out.iter_mut().zip(x) {
        *o -= r * xi;
    }
    let un = norm(out);
    if un == 0.0 || theta == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let k = theta / un;
    out.iter_mut().for_each(|o| *o *= k);
}

/// Spherical interpolation; `t = 0` and `t = 1` return the endpoints verbatim.
pub(crate) fn geodesic(x0: &[f64], x1: &[f64], theta: f64, t: f64, out: &mut [f64]) {
    if t == 0.0 {
        out.copy_from_slice(x0);
        return;
    }
    if t == 1.0 {
        out.copy_from_slice(x1);
        return;
    }
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - t, t)
    } else {
        let s = theta.sin();
        (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
    };
    for ((o, p), q) in out.iter_mut().zip(x0).zip(x1) {
        *o = a * p + b * q;
    }
}

/// Time derivative of [`geodesic`]:
/// `θ/sin θ · (−cos((1−t)θ)·x0 + cos(tθ)·x1)`.
pub(crate) fn velocity(x0: &[f64], x1: &[f64], theta: f64, t: f64, at: &[f64], out: &mut [f64]) {
    if theta < SMALL_ANGLE {
        for ((o, p), q) in out.iter_mut().zip(x0).zip(x1) {
            *o = q - p;
        }
        let r = dot(out, at);
        for (o, a) in out.iter_mut().zip(at) {
            *o -= r * a;
        }
        return;
    }
    let k = theta / theta.sin();
    let a = -k * ((1.0 - t) * theta).cos();
    let b = k * (t * theta).cos();
    for ((o, p), q) in out.iter_mut().zip(x0).zip(x1) {
        *o = a * p + b * q;
    }
}

pub(crate) fn project(x: &[f64], a: &[f64], out: &mut [f64]) {
    let r = dot(a, x);
    for ((o, ai), xi) in out.iter_mut().zip(a).zip(x) {
        *o = ai - r * xi;
    }
}
