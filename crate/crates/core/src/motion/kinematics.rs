use super::frame::{MotionFrame, MotionSequence};
use super::quaternion::Quat;
use super::skeleton::Skeleton;
use crate::error::{Error, Result};
use crate::tolerances::DEGENERATE_NORM;

/// World-space joint positions.
///
/// The root sits at the root translation; each child is its parent's
/// position plus the parent's global rotation applied to the child's rest
/// offset. Global rotations compose down the tree from rotation 0.
pub fn forward_kinematics(skeleton: &Skeleton, frame: &MotionFrame) -> Result<Vec<[f64; 3]>> {
    let j = skeleton.joint_count();
    if frame.rotations.len() != j {
        return Err(Error::SkeletonMismatch(format!(
            "frame has {} rotations, skeleton has {j} joints",
            frame.rotations.len()
        )));
    }
    let mut global: Vec<Quat> = Vec::with_capacity(j);
    let mut pos: Vec<[f64; 3]> = Vec::with_capacity(j);
    for joint in 0..j {
        match skeleton.parent(joint) {
            None => {
                global.push(frame.rotations[joint]);
                pos.push(frame.root_translation);
            }
            Some(p) => {
                let off = global[p].rotate(skeleton.rest_offset(joint));
                let base = pos[p];
                pos.push([base[0] + off[0], base[1] + off[1], base[2] + off[2]]);
                global.push(global[p].mul(frame.rotations[joint]));
            }
        }
    }
    Ok(pos)
}

/// Kendall pre-shape `(P − P̄) / ‖P − P̄‖_F`, flattened row-major.
pub fn compute_preshape(positions: &[[f64; 3]]) -> Result<Vec<f64>> {
    let k = positions.len();
    if k == 0 {
        return Err(Error::DegenerateConfiguration);
    }
    let mut mean = [0.0; 3];
    for p in positions {
        for c in 0..3 {
            mean[c] += p[c];
        }
    }
    mean.iter_mut().for_each(|m| *m /= k as f64);
    let mut out: Vec<f64> = positions.iter().flat_map(|p| (0..3).map(move |c| p[c] - mean[c])).collect();
    let n = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n <= DEGENERATE_NORM || !n.is_finite() {
        return Err(Error::DegenerateConfiguration);
    }
    out.iter_mut().for_each(|v| *v /= n);
    Ok(out)
}

/// Joint positions and per-second velocities for one frame.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PositionFrame {
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
}

/// Joint-based view of a sequence: forward-kinematics positions and
/// forward-difference velocities scaled by fps. The last frame repeats the
/// previous velocity.
pub fn convert_to_position_format(seq: &MotionSequence) -> Result<Vec<PositionFrame>> {
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort { len: seq.len(), min: 2 });
    }
    let positions = seq
        .frames
        .iter()
        .map(|f| forward_kinematics(&seq.skeleton, f))
        .collect::<Result<Vec<_>>>()?;
    let n = positions.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = if i + 1 < n { (i, i + 1) } else { (n - 2, n - 1) };
        let velocities = positions[a]
            .iter()
            .zip(&positions[b])
            .map(|(p, q)| [(q[0] - p[0]) * seq.fps, (q[1] - p[1]) * seq.fps, (q[2] - p[2]) * seq.fps])
            .collect();
        out.push(PositionFrame { positions: positions[i].clone(), velocities });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use proptest::prelude::*;

    use super::*;

    fn rot_z(a: f64) -> [[f64; 3]; 3] {
        [[a.cos(), -a.sin(), 0.0], [a.sin(), a.cos(), 0.0], [0.0, 0.0, 1.0]]
    }

    #[test]
    fn rest_pose_is_cumulative_offsets() {
        let s = Skeleton::smpl22();
        let pos = forward_kinematics(&s, &MotionFrame::rest(22)).unwrap();
        for j in 1..22 {
            let p = s.parent(j).unwrap();
            let o = s.rest_offset(j);
            for c in 0..3 {
                assert!((pos[j][c] - (pos[p][c] + o[c])).abs() < 1e-15);
            }
        }
        // left wrist: pelvis → spine1 → spine2 → spine3 → left collar → shoulder → elbow → wrist
        let chain = [3, 6, 9, 13, 16, 18, 20];
        let x: f64 = chain.iter().map(|&j| s.rest_offset(j)[0]).sum();
        assert!((pos[20][0] - x).abs() < 1e-15);
    }

    #[test]
    fn single_bone_rotated_about_z() {
        let s = Skeleton::chain(2, 1.0);
        let mut f = MotionFrame::rest(2);
        f.rotations[0] = Quat::from_axis_angle([0.0, 0.0, 1.0], FRAC_PI_2);
        let pos = forward_kinematics(&s, &f).unwrap();
        let m = rot_z(FRAC_PI_2);
        let expect = [m[0][0], m[1][0], m[2][0]];
        for c in 0..3 {
            assert!((pos[1][c] - expect[c]).abs() < 1e-15);
        }
        assert!((pos[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn translation_equivariance() {
        let s = Skeleton::smpl22();
        let mut f = MotionFrame::rest(22);
        f.rotations[4] = Quat::from_axis_angle([1.0, 0.0, 0.0], 0.4);
        let a = forward_kinematics(&s, &f).unwrap();
        f.root_translation = [0.5, -1.0, 2.0];
        let b = forward_kinematics(&s, &f).unwrap();
        for (p, q) in a.iter().zip(&b) {
            for c in 0..3 {
                assert!((q[c] - p[c] - f.root_translation[c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fk_rejects_wrong_joint_count() {
        assert!(matches!(
            forward_kinematics(&Skeleton::chain(3, 1.0), &MotionFrame::rest(2)),
            Err(Error::SkeletonMismatch(_))
        ));
    }

    #[test]
    fn preshape_examples() {
        let p = compute_preshape(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let expect = [s, 0.0, 0.0, -s, 0.0, 0.0];
        for (a, b) in p.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(compute_preshape(&[[1.0, 2.0, 3.0]; 4]), Err(Error::DegenerateConfiguration));
        assert_eq!(compute_preshape(&[]), Err(Error::DegenerateConfiguration));
    }

    #[test]
    fn position_format_static_and_translating() {
        let s = Skeleton::chain(3, 0.3);
        let frames = vec![MotionFrame::rest(3); 4];
        let seq = MotionSequence::new(30.0, s.clone(), frames).unwrap();
        let out = convert_to_position_format(&seq).unwrap();
        assert!(out.iter().flat_map(|f| f.velocities.iter().flatten()).all(|v| *v == 0.0));

        let v = [0.6, 0.0, -0.3];
        let frames = (0..5)
            .map(|i| {
                let mut f = MotionFrame::rest(3);
                f.rotations[1] = Quat::from_axis_angle([0.0, 1.0, 0.0], 0.3);
                f.root_translation = [v[0] * i as f64 / 30.0, 0.0, v[2] * i as f64 / 30.0];
                f
            })
            .collect();
        let seq = MotionSequence::new(30.0, s, frames).unwrap();
        for f in convert_to_position_format(&seq).unwrap() {
            for vel in &f.velocities {
                for c in 0..3 {
                    assert!((vel[c] - v[c]).abs() < 1e-12);
                }
            }
        }
        let short = MotionSequence::new(30.0, Skeleton::chain(2, 1.0), vec![MotionFrame::rest(2)]).unwrap();
        assert!(matches!(convert_to_position_format(&short), Err(Error::SequenceTooShort { .. })));
    }

    proptest! {
        #[test]
        fn preshape_invariances(
            pts in prop::collection::vec(prop::array::uniform3(-2.0f64..2.0), 3..8),
            shift in prop::array::uniform3(-5.0f64..5.0),
            scale in 0.1f64..10.0,
        ) {
            let base = compute_preshape(&pts);
            prop_assume!(base.is_ok());
            let base = base.unwrap();
            let moved: Vec<[f64; 3]> = pts
                .iter()
                .map(|p| [scale * p[0] + shift[0], scale * p[1] + shift[1], scale * p[2] + shift[2]])
                .collect();
            let other = compute_preshape(&moved).unwrap();
            for (a, b) in base.iter().zip(&other) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let n: f64 = base.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
