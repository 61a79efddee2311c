use serde::{Deserialize, Serialize};

use super::frame::{MotionFrame, MotionSequence};
use super::kinematics::{compute_preshape, forward_kinematics};
use super::quaternion::Quat;
use super::skeleton::Skeleton;
use crate::error::{Error, Result};
use crate::manifold::{FactorSpec, ManifoldSpec, Point};
use crate::tolerances::POINT_TOL;

/// Which motion factors make up the state vector.
///
/// Blocks are laid out in the fixed order translation, rotations, pre-shape,
/// then the temporal differences of each. Differences are stored in ambient
/// coordinates (3, 4 per joint, 3 per joint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationConfig {
    #[serde(default)]
    pub translation: bool,
    #[serde(default)]
    pub rotation: bool,
    #[serde(default)]
    pub preshape: bool,
    #[serde(default)]
    pub d_translation: bool,
    #[serde(default)]
    pub d_rotation: bool,
    #[serde(default)]
    pub d_preshape: bool,
    pub joints: usize,
}

impl RepresentationConfig {
    /// Translation + rotations, the compact `ℝ³ × (S³)^J` state.
    pub fn translation_rotation(joints: usize) -> Self {
        Self::from_label("T+R", joints).expect("valid label")
    }

    /// Parses labels such as `"T+R"`, `"T+R+P"`, `"dT+R"` or `"T+dR"`.
    pub fn from_label(label: &str, joints: usize) -> Result<Self> {
        let mut cfg = RepresentationConfig {
            translation: false,
            rotation: false,
            preshape: false,
            d_translation: false,
            d_rotation: false,
            d_preshape: false,
            joints,
        };
        for part in label.split('+').map(str::trim) {
            let flag = match part {
                "T" => &mut cfg.translation,
                "R" => &mut cfg.rotation,
                "P" => &mut cfg.preshape,
                "dT" => &mut cfg.d_translation,
                "dR" => &mut cfg.d_rotation,
                "dP" => &mut cfg.d_preshape,
                other => return Err(Error::InvalidConfig(format!("unknown factor `{other}` in `{label}`"))),
            };
            *flag = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn label(&self) -> String {
        let names = [
            (self.translation, "T"),
            (self.rotation, "R"),
            (self.preshape, "P"),
            (self.d_translation, "dT"),
            (self.d_rotation, "dR"),
            (self.d_preshape, "dP"),
        ];
        names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect::<Vec<_>>().join("+")
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints < 1 {
            return Err(Error::InvalidConfig("joints must be >= 1".into()));
        }
        if !(self.translation || self.d_translation) {
            return Err(Error::InvalidConfig("needs a translation factor (T or dT)".into()));
        }
        if !(self.rotation || self.preshape || self.d_rotation || self.d_preshape) {
            return Err(Error::InvalidConfig("needs a pose factor (R, P, dR or dP)".into()));
        }
        if (self.preshape || self.d_preshape) && self.joints < 2 {
            return Err(Error::InvalidConfig("pre-shape factors need at least 2 joints".into()));
        }
        Ok(())
    }

    pub fn has_differences(&self) -> bool {
        self.d_translation || self.d_rotation || self.d_preshape
    }
}

/// Length of the flat state vector for `cfg`.
pub fn ambient_dimension(cfg: &RepresentationConfig) -> Result<usize> {
    cfg.validate()?;
    let j = cfg.joints;
    let parts = [
        (cfg.translation, 3),
        (cfg.rotation, 4 * j),
        (cfg.preshape, 3 * j),
        (cfg.d_translation, 3),
        (cfg.d_rotation, 4 * j),
        (cfg.d_preshape, 3 * j),
    ];
    Ok(parts.iter().filter(|(on, _)| *on).map(|(_, d)| d).sum())
}

/// Product manifold induced by `cfg`. Temporal differences are flat
/// Euclidean blocks: they are data attached to a frame, not states that
/// the flow moves along curved factors.
pub fn config_to_manifold(cfg: &RepresentationConfig) -> Result<ManifoldSpec> {
    cfg.validate()?;
    let j = cfg.joints;
    let mut factors = Vec::new();
    if cfg.translation {
        factors.push(FactorSpec::euclidean(3));
    }
    if cfg.rotation {
        factors.push(FactorSpec::sphere(3).times(j));
    }
    if cfg.preshape {
        factors.push(FactorSpec::preshape(j, 3));
    }
    if cfg.d_translation {
        factors.push(FactorSpec::euclidean(3));
    }
    if cfg.d_rotation {
        factors.push(FactorSpec::euclidean(4).times(j));
    }
    if cfg.d_preshape {
        factors.push(FactorSpec::euclidean(3 * j));
    }
    ManifoldSpec::new(factors)
}

fn check_frame(frame: &MotionFrame, cfg: &RepresentationConfig, skeleton: &Skeleton) -> Result<()> {
    if cfg.joints != skeleton.joint_count() {
        return Err(Error::SkeletonMismatch(format!(
            "config has {} joints, skeleton has {}",
            cfg.joints,
            skeleton.joint_count()
        )));
    }
    if frame.rotations.len() != skeleton.joint_count() {
        return Err(Error::SkeletonMismatch(format!(
            "frame has {} rotations, skeleton has {} joints",
            frame.rotations.len(),
            skeleton.joint_count()
        )));
    }
    Ok(())
}

/// Temporal-difference blocks (`Log_{x_t}(x_{t+1})` per enabled `d·` flag)
/// between two consecutive frames.
pub fn temporal_difference_frames(
    cur: &MotionFrame,
    next: &MotionFrame,
    cfg: &RepresentationConfig,
    skeleton: &Skeleton,
) -> Result<Vec<f64>> {
    check_frame(cur, cfg, skeleton)?;
    check_frame(next, cfg, skeleton)?;
    let mut out = Vec::new();
    if cfg.d_translation {
        out.extend((0..3).map(|c| next.root_translation[c] - cur.root_translation[c]));
    }
    if cfg.d_rotation {
        let s3 = ManifoldSpec::sphere(3)?;
        for (j, (a, b)) in cur.rotations.iter().zip(&next.rotations).enumerate() {
            let v = s3
                .log(&Point(a.to_array().to_vec()), &Point(b.to_array().to_vec()))
                .map_err(|e| match e {
                    Error::AntipodalPoints { angle, .. } => Error::AntipodalPoints { segment: j, angle },
                    e => e,
                })?;
            out.extend_from_slice(&v);
        }
    }
    if cfg.d_preshape {
        let m = ManifoldSpec::preshape(cfg.joints, 3)?;
        let a = compute_preshape(&forward_kinematics(skeleton, cur)?)?;
        let b = compute_preshape(&forward_kinematics(skeleton, next)?)?;
        out.extend_from_slice(&m.log(&Point(a), &Point(b))?);
    }
    Ok(out)
}

/// Temporal-difference blocks between frames `t_index` and `t_index + 1`.
pub fn temporal_difference(seq: &MotionSequence, cfg: &RepresentationConfig, t_index: usize) -> Result<Vec<f64>> {
    if t_index + 1 >= seq.len() {
        return Err(Error::IndexOutOfRange { index: t_index + 1, len: seq.len() });
    }
    temporal_difference_frames(&seq.frames[t_index], &seq.frames[t_index + 1], cfg, &seq.skeleton)
}

/// Embeds a frame as a point of `config_to_manifold(cfg)`.
pub fn frame_to_point(
    frame: &MotionFrame,
    cfg: &RepresentationConfig,
    skeleton: &Skeleton,
    next_frame: Option<&MotionFrame>,
) -> Result<Point> {
    cfg.validate()?;
    check_frame(frame, cfg, skeleton)?;
    let mut out = Vec::with_capacity(ambient_dimension(cfg)?);
    if cfg.translation {
        out.extend_from_slice(&frame.root_translation);
    }
    if cfg.rotation {
        for q in &frame.rotations {
            out.extend_from_slice(&q.to_array());
        }
    }
    if cfg.preshape {
        out.extend(compute_preshape(&forward_kinematics(skeleton, frame)?)?);
    }
    if cfg.has_differences() {
        let next = next_frame.ok_or(Error::MissingNextFrame)?;
        out.extend(temporal_difference_frames(frame, next, cfg, skeleton)?);
    }
    Ok(Point(out))
}

/// A rotation that had to be renormalized when reading a point back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuatDrift {
    pub joint: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredFrame {
    pub frame: MotionFrame,
    /// Quaternions whose norm was off by more than [`POINT_TOL`].
    pub drift: Vec<QuatDrift>,
}

/// Reads a frame back out of a point. Requires the rotation factor; without
/// a translation block the root translation is zero.
pub fn point_to_frame(p: &[f64], cfg: &RepresentationConfig, skeleton: &Skeleton) -> Result<RecoveredFrame> {
    let dim = ambient_dimension(cfg)?;
    if p.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    if cfg.joints != skeleton.joint_count() {
        return Err(Error::SkeletonMismatch(format!(
            "config has {} joints, skeleton has {}",
            cfg.joints,
            skeleton.joint_count()
        )));
    }
    if !cfg.rotation {
        return Err(Error::ConfigLacksRotations);
    }
    let mut off = 0;
    let mut root_translation = [0.0; 3];
    if cfg.translation {
        root_translation.copy_from_slice(&p[0..3]);
        off = 3;
    }
    let mut rotations = Vec::with_capacity(cfg.joints);
    let mut drift = Vec::new();
    for joint in 0..cfg.joints {
        let b = &p[off + 4 * joint..off + 4 * joint + 4];
        let q = Quat::new(b[0], b[1], b[2], b[3]);
        let n = q.norm();
        if (n - 1.0).abs() > POINT_TOL {
            drift.push(QuatDrift { joint, norm: n });
        }
        rotations.push(q.canonicalize()?);
    }
    if !drift.is_empty() {
        log::warn!("renormalized {} drifted quaternions", drift.len());
    }
    Ok(RecoveredFrame { frame: MotionFrame { root_translation, rotations }, drift })
}

/// Joint positions of a point. Uses forward kinematics when rotations are
/// present; otherwise returns the (scale-free) pre-shape landmarks shifted
/// by the root translation.
pub fn point_to_positions(p: &[f64], cfg: &RepresentationConfig, skeleton: &Skeleton) -> Result<Vec<[f64; 3]>> {
    if cfg.rotation {
        let rec = point_to_frame(p, cfg, skeleton)?;
        return forward_kinematics(skeleton, &rec.frame);
    }
    if !cfg.preshape {
        return Err(Error::ConfigLacksRotations);
    }
    let dim = ambient_dimension(cfg)?;
    if p.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    let (shift, off) = if cfg.translation { ([p[0], p[1], p[2]], 3) } else { ([0.0; 3], 0) };
    Ok((0..cfg.joints)
        .map(|j| {
            let r = &p[off + 3 * j..off + 3 * j + 3];
            [r[0] + shift[0], r[1] + shift[1], r[2] + shift[2]]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::manifold::sphere;
    use crate::motion::format_dims;

    fn all_configs(j: usize) -> impl Iterator<Item = RepresentationConfig> {
        (0u8..64).map(move |bits| RepresentationConfig {
            translation: bits & 1 != 0,
            rotation: bits & 2 != 0,
            preshape: bits & 4 != 0,
            d_translation: bits & 8 != 0,
            d_rotation: bits & 16 != 0,
            d_preshape: bits & 32 != 0,
            joints: j,
        })
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(ambient_dimension(&RepresentationConfig::translation_rotation(22)).unwrap(), 91);
        assert_eq!(format_dims::translation_rotation(22), 91);
        let trp = RepresentationConfig::from_label("T+R+P", 22).unwrap();
        assert_eq!(ambient_dimension(&trp).unwrap(), 157);
        assert!(RepresentationConfig::from_label("T", 22).is_err());
        assert!(RepresentationConfig::from_label("R", 22).is_err());
        assert!(RepresentationConfig::from_label("T+Q", 22).is_err());
    }

    #[test]
    fn dimension_matches_manifold_for_every_valid_config() {
        let mut valid = 0;
        for cfg in all_configs(22) {
            match (ambient_dimension(&cfg), config_to_manifold(&cfg)) {
                (Ok(d), Ok(m)) => {
                    assert_eq!(d, m.total_ambient_dim(), "{}", cfg.label());
                    valid += 1;
                }
                (Err(_), Err(_)) => {}
                _ => panic!("disagreement on {}", cfg.label()),
            }
        }
        // (2² − 1 translation choices) × (2⁴ − 1 pose choices)
        assert_eq!(valid, 3 * 15);
    }

    #[test]
    fn manifold_for_ablation_configs() {
        let m = config_to_manifold(&RepresentationConfig::translation_rotation(22)).unwrap();
        assert_eq!(m.factors(), &[FactorSpec::euclidean(3), FactorSpec::sphere(3).times(22)]);
        let m = config_to_manifold(&RepresentationConfig::from_label("T+P", 22).unwrap()).unwrap();
        assert_eq!(m.factors(), &[FactorSpec::euclidean(3), FactorSpec::preshape(22, 3)]);
        let m = config_to_manifold(&RepresentationConfig::from_label("dT+R", 22).unwrap()).unwrap();
        assert_eq!(m.factors(), &[FactorSpec::sphere(3).times(22), FactorSpec::euclidean(3)]);
        assert_eq!(m.total_ambient_dim(), 91);
    }

    #[test]
    fn label_roundtrip() {
        for label in ["T+R", "T+R+P", "T+P", "dT+R", "T+dR", "T+R+P+dT+dR+dP"] {
            let cfg = RepresentationConfig::from_label(label, 22).unwrap();
            assert_eq!(RepresentationConfig::from_label(&cfg.label(), 22).unwrap(), cfg);
        }
    }

    #[test]
    fn rest_frame_is_reference_point() {
        let s = Skeleton::smpl22();
        let cfg = RepresentationConfig::translation_rotation(22);
        let p = frame_to_point(&MotionFrame::rest(22), &cfg, &s, None).unwrap();
        let mut expect = vec![0.0; 3];
        for _ in 0..22 {
            expect.extend([1.0, 0.0, 0.0, 0.0]);
        }
        assert_eq!(p.0, expect);
        let back = point_to_frame(&p, &cfg, &s).unwrap();
        assert_eq!(back.frame, MotionFrame::rest(22));
        assert!(back.drift.is_empty());
    }

    #[test]
    fn yaw_quarter_turn_block() {
        let s = Skeleton::smpl22();
        let cfg = RepresentationConfig::translation_rotation(22);
        let mut f = MotionFrame::rest(22);
        f.rotations[0] = Quat::from_axis_angle([0.0, 1.0, 0.0], FRAC_PI_2);
        let p = frame_to_point(&f, &cfg, &s, None).unwrap();
        let h = 2f64.sqrt() / 2.0;
        let q = &p[3..7];
        assert!((q[0] - h).abs() < 1e-15 && q[1] == 0.0 && (q[2] - h).abs() < 1e-15 && q[3] == 0.0);
        // oracle: rotation matrix of a quarter yaw sends +z to +x
        let v = Quat::new(q[0], q[1], q[2], q[3]).rotate([0.0, 0.0, 1.0]);
        assert!((v[0] - 1.0).abs() < 1e-15 && v[2].abs() < 1e-15);
    }

    #[test]
    fn drifted_point_is_renormalized_with_warning() {
        let s = Skeleton::chain(2, 1.0);
        let cfg = RepresentationConfig::translation_rotation(2);
        let p = vec![0.0, 0.0, 0.0, 0.999, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let rec = point_to_frame(&p, &cfg, &s).unwrap();
        assert_eq!(rec.drift.len(), 1);
        assert_eq!(rec.drift[0].joint, 0);
        assert!((rec.drift[0].norm - 0.999).abs() < 1e-15);
        assert_eq!(rec.frame.rotations[0], Quat::IDENTITY);
        rec.frame.validate(0, 2).unwrap();
    }

    #[test]
    fn point_to_frame_needs_rotations() {
        let s = Skeleton::chain(3, 1.0);
        let cfg = RepresentationConfig::from_label("T+P", 3).unwrap();
        let p = frame_to_point(&MotionFrame::rest(3), &cfg, &s, None).unwrap();
        assert_eq!(point_to_frame(&p, &cfg, &s), Err(Error::ConfigLacksRotations));
        let pos = point_to_positions(&p, &cfg, &s).unwrap();
        assert_eq!(pos.len(), 3);
    }

    #[test]
    fn differences_need_next_frame() {
        let s = Skeleton::chain(2, 1.0);
        let cfg = RepresentationConfig::from_label("dT+R", 2).unwrap();
        assert_eq!(
            frame_to_point(&MotionFrame::rest(2), &cfg, &s, None),
            Err(Error::MissingNextFrame)
        );
        let wrong = RepresentationConfig::translation_rotation(3);
        assert!(matches!(
            frame_to_point(&MotionFrame::rest(2), &wrong, &s, None),
            Err(Error::SkeletonMismatch(_))
        ));
    }

    #[test]
    fn temporal_difference_examples() {
        let s = Skeleton::chain(3, 0.4);
        let seq = MotionSequence::new(30.0, s.clone(), vec![MotionFrame::rest(3); 3]).unwrap();
        let all = RepresentationConfig::from_label("T+R+dT+dR+dP", 3).unwrap();
        assert!(temporal_difference(&seq, &all, 0).unwrap().iter().all(|v| *v == 0.0));
        assert!(matches!(temporal_difference(&seq, &all, 2), Err(Error::IndexOutOfRange { .. })));

        let frames = (0..4)
            .map(|i| {
                let mut f = MotionFrame::rest(3);
                f.root_translation = [0.1 * i as f64, 0.0, 0.0];
                f
            })
            .collect();
        let seq = MotionSequence::new(30.0, s.clone(), frames).unwrap();
        let dt = RepresentationConfig::from_label("dT+R", 3).unwrap();
        let d = temporal_difference(&seq, &dt, 1).unwrap();
        assert!((d[0] - 0.1).abs() < 1e-15 && d[1] == 0.0 && d[2] == 0.0);
    }

    #[test]
    fn constant_angular_velocity_has_constant_difference_norm() {
        // a rotation by φ per frame is a great-circle step of φ/2 on S³
        let s = Skeleton::chain(2, 1.0);
        let phi = 0.07;
        let frames = (0..6)
            .map(|i| {
                let mut f = MotionFrame::rest(2);
                f.rotations[1] = Quat::from_axis_angle([0.2, 1.0, -0.3], phi * i as f64);
                f
            })
            .collect();
        let seq = MotionSequence::new(30.0, s, frames).unwrap();
        let cfg = RepresentationConfig::from_label("T+dR", 2).unwrap();
        for t in 0..5 {
            let d = temporal_difference(&seq, &cfg, t).unwrap();
            assert!(d[0..4].iter().all(|v| *v == 0.0));
            let n = sphere::norm(&d[4..8]);
            assert!((n - phi / 2.0).abs() < 1e-12, "{n}");
        }
    }
}
