use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::segment_deviations;
use crate::manifold::{Constraint, ManifoldSpec, Point};

/// Column order of [`MetricReport::csv_row`].
pub const METRIC_CSV_HEADER: &str = "seed,guidance_scale,mmd,mode0,mode1,outliers,max_violation";

fn check_batch(spec: &ManifoldSpec, pts: &[Point]) -> Result<()> {
    for p in pts {
        if p.len() != spec.total_ambient_dim() {
            return Err(Error::DimensionMismatch { expected: spec.total_ambient_dim(), got: p.len() });
        }
    }
    Ok(())
}

fn kernel(d: f64, bandwidth: f64) -> f64 {
    (-d * d / (2.0 * bandwidth * bandwidth)).exp()
}

/// Sum independent of the order the terms were produced in.
fn canonical_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Kernel values `k(a_i, a_j)` for `i < j`.
fn within(spec: &ManifoldSpec, a: &[Point], bw: f64) -> Vec<f64> {
    (0..a.len())
        .into_par_iter()
        .flat_map_iter(|i| (i + 1..a.len()).map(move |j| kernel(spec.distance_unchecked(&a[i], &a[j]), bw)))
        .collect()
}

fn cross(spec: &ManifoldSpec, a: &[Point], b: &[Point], bw: f64) -> Vec<f64> {
    a.par_iter()
        .flat_map_iter(|x| b.iter().map(move |y| kernel(spec.distance_unchecked(x, y), bw)))
        .collect()
}

fn check_bandwidth(bw: f64) -> Result<()> {
    if bw > 0.0 && bw.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("bandwidth", format!("must be positive, got {bw}")))
    }
}

/// Unbiased squared MMD with the kernel `exp(−d²/2σ²)` on geodesic
/// distance. Can be slightly negative; the raw value is returned. Exactly
/// symmetric in `(a, b)`.
pub fn geodesic_mmd(spec: &ManifoldSpec, a: &[Point], b: &[Point], bandwidth: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("samples", "the unbiased estimator needs at least two points per side"));
    }
    check_bandwidth(bandwidth)?;
    check_batch(spec, a)?;
    check_batch(spec, b)?;
    let (m, n) = (a.len() as f64, b.len() as f64);
    let kaa = 2.0 * canonical_sum(within(spec, a, bandwidth)) / (m * (m - 1.0));
    let kbb = 2.0 * canonical_sum(within(spec, b, bandwidth)) / (n * (n - 1.0));
    let kab = canonical_sum(cross(spec, a, b, bandwidth)) / (m * n);
    Ok((kaa + kbb) - 2.0 * kab)
}

/// Biased (V-statistic) squared MMD; zero when `a` and `b` are the same set.
pub fn geodesic_mmd_biased(spec: &ManifoldSpec, a: &[Point], b: &[Point], bandwidth: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyBatch);
    }
    check_bandwidth(bandwidth)?;
    check_batch(spec, a)?;
    check_batch(spec, b)?;
    let (m, n) = (a.len() as f64, b.len() as f64);
    // the diagonal contributes k(x, x) = 1 per point
    let kaa = (2.0 * canonical_sum(within(spec, a, bandwidth)) + m) / (m * m);
    let kbb = (2.0 * canonical_sum(within(spec, b, bandwidth)) + n) / (n * n);
    let kab = canonical_sum(cross(spec, a, b, bandwidth)) / (m * n);
    Ok(((kaa + kbb) - 2.0 * kab).max(0.0))
}

/// Median of all pairwise geodesic distances in `a ∪ b`.
pub fn median_bandwidth(spec: &ManifoldSpec, a: &[Point], b: &[Point]) -> Result<f64> {
    check_batch(spec, a)?;
    check_batch(spec, b)?;
    let pooled: Vec<&Point> = a.iter().chain(b).collect();
    if pooled.len() < 2 {
        return Err(Error::EmptyBatch);
    }
    let mut d: Vec<f64> = (0..pooled.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let pooled = &pooled;
            (i + 1..pooled.len()).map(move |j| spec.distance_unchecked(pooled[i], pooled[j]))
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let k = d.len();
    let med = if k % 2 == 1 { d[k / 2] } else { 0.5 * (d[k / 2 - 1] + d[k / 2]) };
    if med > 0.0 {
        Ok(med)
    } else {
        Err(Error::Domain("median pairwise distance is zero; pass an explicit bandwidth".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoverage {
    pub per_mode: Vec<f64>,
    /// `1 − Σ per_mode`, so the fractions sum to one.
    pub outliers: f64,
}

/// Assigns each sample to its nearest mode (lowest index on ties) when the
/// distance is strictly below `assign_radius`, otherwise to the outliers.
pub fn mode_coverage(spec: &ManifoldSpec, samples: &[Point], modes: &[Point], assign_radius: f64) -> Result<ModeCoverage> {
    if modes.is_empty() {
        return Err(Error::invalid("modes", "need at least one mode"));
    }
    check_batch(spec, modes)?;
    check_batch(spec, samples)?;
    let mut counts = vec![0usize; modes.len()];
    let nearest: Vec<Option<usize>> = samples
        .par_iter()
        .map(|x| {
            let (best, d) = modes
                .iter()
                .enumerate()
                .map(|(i, m)| (i, spec.distance_unchecked(x, m)))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            (d < assign_radius).then_some(best)
        })
        .collect();
    for k in nearest.into_iter().flatten() {
        counts[k] += 1;
    }
    let n = samples.len();
    let per_mode: Vec<f64> = counts.iter().map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 }).collect();
    let assigned: f64 = per_mode.iter().sum();
    Ok(ModeCoverage { outliers: 1.0 - assigned, per_mode })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintStat {
    pub constraint: Constraint,
    /// Largest deviation over all samples and segments.
    pub max: f64,
    /// Mean over samples of the per-sample largest deviation.
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationStats {
    pub count: usize,
    pub max_deviation: f64,
    pub per_constraint: Vec<ConstraintStat>,
}

const CLASSES: [Constraint; 5] = [
    Constraint::SphereNorm,
    Constraint::PreShapeCentroid,
    Constraint::PreShapeNorm,
    Constraint::NonFinite,
    Constraint::Dimension,
];

/// Aggregated point-invariant deviations over a batch. Wrong-length samples
/// count under [`Constraint::Dimension`] by the length difference.
pub fn constraint_violation_stats(spec: &ManifoldSpec, samples: &[Point]) -> ViolationStats {
    let mut max = [0.0f64; CLASSES.len()];
    let mut sum = [0.0f64; CLASSES.len()];
    let slot = |c: Constraint| CLASSES.iter().position(|k| *k == c).expect("listed constraint");
    for x in samples {
        let mut worst = [0.0f64; CLASSES.len()];
        if x.len() != spec.total_ambient_dim() {
            worst[slot(Constraint::Dimension)] = (x.len() as f64 - spec.total_ambient_dim() as f64).abs();
        } else {
            for seg in spec.segments() {
                for (c, d) in segment_deviations(seg, &x[seg.range()]) {
                    let d = if d.is_nan() { f64::INFINITY } else { d };
                    let k = slot(c);
                    worst[k] = worst[k].max(d);
                }
            }
        }
        for k in 0..CLASSES.len() {
            max[k] = max[k].max(worst[k]);
            sum[k] += worst[k];
        }
    }
    let n = samples.len();
    let per_constraint = CLASSES
        .iter()
        .enumerate()
        .map(|(k, c)| ConstraintStat { constraint: *c, max: max[k], mean: if n == 0 { 0.0 } else { sum[k] / n as f64 } })
        .collect();
    ViolationStats { count: n, max_deviation: max.iter().cloned().fold(0.0, f64::max), per_constraint }
}

/// Mean over `samples` of the geodesic distance to the closest reference.
pub fn nearest_neighbor_distance(spec: &ManifoldSpec, samples: &[Point], reference: &[Point]) -> Result<f64> {
    if samples.is_empty() || reference.is_empty() {
        return Err(Error::EmptyBatch);
    }
    check_batch(spec, samples)?;
    check_batch(spec, reference)?;
    let d: Vec<f64> = samples
        .par_iter()
        .map(|x| reference.iter().map(|y| spec.distance_unchecked(x, y)).fold(f64::INFINITY, f64::min))
        .collect();
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Kernel bandwidth; the median pooled pairwise distance when absent.
    pub bandwidth: Option<f64>,
    pub assign_radius: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { bandwidth: None, assign_radius: 1.0 }
    }
}

/// Desk-scale substitute for FID-style reporting. `mmd` is the unbiased
/// geodesic-kernel MMD² against held-out reference samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mmd: f64,
    pub bandwidth: f64,
    pub per_mode_mass: Vec<f64>,
    pub outlier_fraction: f64,
    pub max_constraint_violation: f64,
    pub mean_geodesic_nn_distance: f64,
    pub sample_count: usize,
}

impl MetricReport {
    /// One line in [`METRIC_CSV_HEADER`] order; missing modes report 0.
    pub fn csv_row(&self, seed: u64, guidance_scale: f64) -> String {
        let mode = |i: usize| self.per_mode_mass.get(i).copied().unwrap_or(0.0);
        format!(
            "{seed},{guidance_scale},{},{},{},{},{}",
            self.mmd,
            mode(0),
            mode(1),
            self.outlier_fraction,
            self.max_constraint_violation
        )
    }
}

pub fn evaluate(
    spec: &ManifoldSpec,
    samples: &[Point],
    reference: &[Point],
    modes: &[Point],
    cfg: &EvalConfig,
) -> Result<MetricReport> {
    let bandwidth = match cfg.bandwidth {
        Some(b) => b,
        None => median_bandwidth(spec, samples, reference)?,
    };
    let mmd = geodesic_mmd(spec, samples, reference, bandwidth)?;
    let cov = mode_coverage(spec, samples, modes, cfg.assign_radius)?;
    Ok(MetricReport {
        mmd,
        bandwidth,
        per_mode_mass: cov.per_mode,
        outlier_fraction: cov.outliers,
        max_constraint_violation: constraint_violation_stats(spec, samples).max_deviation,
        mean_geodesic_nn_distance: nearest_neighbor_distance(spec, samples, reference)?,
        sample_count: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{FactorSpec, WrappedGaussian};
    use crate::rng::seeded;

    fn s2() -> ManifoldSpec {
        ManifoldSpec::sphere(2).unwrap()
    }

    fn cluster(m: &ManifoldSpec, mean: Vec<f64>, scale: f64, n: usize, seed: u64) -> Vec<Point> {
        let g = WrappedGaussian::isotropic(m, Point(mean), scale).unwrap();
        let mut rng = seeded(seed);
        (0..n).map(|_| g.sample(m, &mut rng)).collect()
    }

    #[test]
    fn same_set_biased_zero_unbiased_nonpositive() {
        let m = s2();
        let a = cluster(&m, vec![0.0, 0.0, 1.0], 0.5, 200, 1);
        assert!(geodesic_mmd_biased(&m, &a, &a, 0.5).unwrap() < 1e-12);
        assert!(geodesic_mmd(&m, &a, &a, 0.5).unwrap() <= 0.0);
    }

    #[test]
    fn disjoint_clusters_have_large_mmd() {
        let m = s2();
        let a = cluster(&m, vec![0.0, 0.0, 1.0], 0.01, 100, 1);
        let b = cluster(&m, vec![1.0, 0.0, 0.0], 0.01, 100, 2);
        let mmd = geodesic_mmd(&m, &a, &b, 0.5).unwrap();
        // within ≈ 1, cross ≈ exp(−(π/2)²/0.5) ≈ 0.0072
        assert!(mmd > 0.5, "{mmd}");
    }

    #[test]
    fn symmetric_exactly() {
        let m = ManifoldSpec::new(vec![FactorSpec::sphere(3), FactorSpec::euclidean(3)]).unwrap();
        let mu = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let a = cluster(&m, mu.clone(), 0.7, 150, 3);
        let b = cluster(&m, mu, 0.9, 170, 4);
        assert_eq!(geodesic_mmd(&m, &a, &b, 0.8).unwrap(), geodesic_mmd(&m, &b, &a, 0.8).unwrap());
    }

    #[test]
    fn mmd_errors() {
        let m = s2();
        let a = cluster(&m, vec![0.0, 0.0, 1.0], 0.5, 10, 1);
        assert_eq!(geodesic_mmd(&m, &a, &[], 1.0), Err(Error::EmptyBatch));
        assert!(geodesic_mmd(&m, &a, &a, 0.0).is_err());
    }

    #[test]
    fn coverage_examples() {
        let m = s2();
        let modes = vec![Point(vec![0.0, 0.0, 1.0]), Point(vec![1.0, 0.0, 0.0])];
        let at0 = vec![modes[0].clone(); 10];
        let c = mode_coverage(&m, &at0, &modes, 0.5).unwrap();
        assert_eq!(c.per_mode, vec![1.0, 0.0]);
        assert_eq!(c.outliers, 0.0);
        let c = mode_coverage(&m, &at0, &modes, 0.0).unwrap();
        assert_eq!(c.per_mode, vec![0.0, 0.0]);
        assert_eq!(c.outliers, 1.0);
    }

    #[test]
    fn coverage_sums_to_one_exactly() {
        let m = s2();
        let modes = vec![Point(vec![0.0, 0.0, 1.0]), Point(vec![1.0, 0.0, 0.0]), Point(vec![0.0, 1.0, 0.0])];
        for seed in 0..50 {
            let n = 7 + 13 * seed as usize;
            let pts = cluster(&m, vec![0.0, 0.0, 1.0], 1.5, n, seed);
            let c = mode_coverage(&m, &pts, &modes, 0.4 + 0.02 * seed as f64).unwrap();
            assert_eq!(c.per_mode.iter().sum::<f64>() + c.outliers, 1.0);
        }
    }

    #[test]
    fn violation_stats() {
        let m = s2();
        assert_eq!(constraint_violation_stats(&m, &[]).count, 0);
        assert_eq!(constraint_violation_stats(&m, &[]).max_deviation, 0.0);
        let bad = vec![Point(vec![0.0, 0.0, 1.1]), Point(vec![0.0, 1.0, 0.0])];
        let s = constraint_violation_stats(&m, &bad);
        assert!((s.max_deviation - 0.1).abs() < 1e-12);
        let sphere = &s.per_constraint[0];
        assert_eq!(sphere.constraint, Constraint::SphereNorm);
        assert!((sphere.mean - 0.05).abs() < 1e-12);
    }

    #[test]
    fn report_csv_columns() {
        let r = MetricReport {
            mmd: 0.001,
            bandwidth: 1.0,
            per_mode_mass: vec![0.5, 0.25],
            outlier_fraction: 0.25,
            max_constraint_violation: 0.0,
            mean_geodesic_nn_distance: 0.1,
            sample_count: 4,
        };
        assert_eq!(r.csv_row(42, 6.5), "42,6.5,0.001,0.5,0.25,0.25,0");
        assert_eq!(METRIC_CSV_HEADER.split(',').count(), r.csv_row(0, 0.0).split(',').count());
    }
}
