//! Orientation signs of flow lines.
//!
//! Each unstable manifold is oriented once by the frame stored at the
//! representative lift of its critical point (frames at other lifts are
//! pushed forward by the symmetry). Minima carry the orientation `+1`.
//!
//! * index 1 to 0: the sign is `+1` when the line leaves along the oriented
//!   unstable direction of the saddle and `-1` otherwise.
//! * index 2 to 1: the oriented frame of the maximum is carried along the
//!   line by projecting onto tangent planes and re-orthonormalizing; the sign
//!   compares it at the end of the line with the frame
//!   `(flow direction, oriented unstable direction of the saddle)`.

use nalgebra::Vector3;

use super::critical::MorseData;
use super::shooting::FlowLine;
use super::MorseFlowError;

const RANK_FLOOR: f64 = 1e-8;

/// Returns the lines with `sign` set to `±1`.
pub fn assign_signs(lines: &[FlowLine], md: &MorseData) -> Result<Vec<FlowLine>, MorseFlowError> {
    lines
        .iter()
        .map(|line| {
            let sign = line_sign(line, md)?;
            Ok(FlowLine { sign, ..line.clone() })
        })
        .collect()
}

fn line_sign(line: &FlowLine, md: &MorseData) -> Result<i64, MorseFlowError> {
    let src = &md.points[line.source];
    let lift = &src.lifts[0];
    let degenerate = |detail: String| MorseFlowError::SignFrame {
        from: src.name.clone(),
        to: md.points[line.target].name.clone(),
        detail,
    };
    match src.index {
        1 => {
            let launch = line.polyline[1] - line.polyline[0];
            let along = launch.dot(&lift.unstable[0]);
            if along.abs() < RANK_FLOOR * launch.norm() {
                return Err(degenerate("launch direction orthogonal to the unstable direction".into()));
            }
            Ok(if along > 0.0 { 1 } else { -1 })
        }
        2 => {
            let model = &md.model;
            let (mut a1, mut a2) = (lift.unstable[0], lift.unstable[1]);
            // the last polyline entry is the target itself, where the flow vanishes
            let path = &line.polyline[1..line.polyline.len() - 1];
            for x in path {
                let p = model.tangent_projection(x);
                a1 = p * a1;
                let n1 = a1.norm();
                if n1 < RANK_FLOOR {
                    return Err(degenerate(format!("frame collapsed at {x:?}")));
                }
                a1 /= n1;
                a2 = p * a2;
                a2 -= a2.dot(&a1) * a1;
                let n2 = a2.norm();
                if n2 < RANK_FLOOR {
                    return Err(degenerate(format!("frame collapsed at {x:?}")));
                }
                a2 /= n2;
            }
            let end = *path.last().unwrap();
            let flow: Vector3<f64> = -model.gradient(&end);
            let u = md.points[line.target].lifts[line.target_lift].unstable[0];
            let reference = flow.normalize().cross(&u);
            if reference.norm() < RANK_FLOOR {
                return Err(degenerate("flow direction parallel to the target's unstable direction".into()));
            }
            let s = a1.cross(&a2).dot(&reference);
            Ok(if s > 0.0 { 1 } else { -1 })
        }
        _ => Err(degenerate(format!("source index {}", src.index))),
    }
}
