use std::f64::consts::PI;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::critical::MorseData;
use super::model::ManifoldModel;
use super::MorseFlowError;
use crate::ode::{DormandPrince, OdeError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingOptions {
    /// Position of the intermediate level in `(r_j, r_above)`, as a fraction.
    pub level_fraction: f64,
    /// Distance from a critical point at which trajectories are launched, and
    /// radius of the ball a trajectory must enter to count as arriving.
    pub launch_radius: f64,
    /// Integrator tolerance (relative and absolute).
    pub tolerance: f64,
    /// Flow time after which a trajectory is declared stuck.
    pub time_budget: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            level_fraction: 0.5,
            launch_radius: 1e-3,
            tolerance: 1e-11,
            time_budget: 500.0,
        }
    }
}

/// Unbroken flow line between critical points whose indices differ by one.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowLine {
    pub source: usize,
    pub target: usize,
    /// Which lift of the target the line ends at.
    pub target_lift: usize,
    /// Sampled trajectory from the source to the target, `f` decreasing.
    pub polyline: Vec<Vector3<f64>>,
    /// `±1` once assigned, `0` before.
    pub sign: i64,
    /// Launch angle on the unstable circle (index 2 sources) or launch side
    /// `±1` on the unstable 0-sphere (index 1 sources).
    pub shooting_parameter: f64,
}

/// Integrates the flow of `∓ grad F` on the surface (descending when
/// `descend`) until `stop` becomes nonpositive.
pub(crate) fn flow_until(
    model: &ManifoldModel,
    start: &Vector3<f64>,
    descend: bool,
    stop: impl Fn(&Vector3<f64>) -> f64,
    opts: &ShootingOptions,
) -> Result<Vec<Vector3<f64>>, FlowFailure> {
    let sign = if descend { -1.0 } else { 1.0 };
    let v = |y: &[f64]| Vector3::new(y[0], y[1], y[2]);
    let dp = DormandPrince::new(opts.tolerance);
    let sol = dp
        .integrate(
            |y: &[f64], dy: &mut [f64]| {
                let g = sign * model.gradient(&v(y));
                dy.copy_from_slice(g.as_slice());
            },
            start.as_slice(),
            opts.time_budget,
            Some(|y: &[f64]| stop(&v(y))),
            |y: &mut [f64]| {
                let p = model.project(&v(y));
                y.copy_from_slice(p.as_slice());
            },
        )
        .map_err(FlowFailure::Ode)?;
    let states: Vec<Vector3<f64>> = sol.states.iter().map(|s| v(s)).collect();
    if !sol.event {
        return Err(FlowFailure::Budget {
            time: sol.final_time(),
            last: *states.last().unwrap(),
        });
    }
    // f must move monotonically along the accepted steps
    for w in states.windows(2) {
        let (a, b) = (model.f(&w[0]), model.f(&w[1]));
        let ok = if descend { b < a } else { b > a };
        if !ok && w[0] != w[1] {
            return Err(FlowFailure::Monotonicity { at: w[1] });
        }
    }
    Ok(states)
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum FlowFailure {
    Ode(OdeError),
    Budget { time: f64, last: Vector3<f64> },
    Monotonicity { at: Vector3<f64> },
}

impl FlowFailure {
    fn into_error(self, md: &MorseData, i: usize, j: usize, what: &str) -> MorseFlowError {
        match self {
            FlowFailure::Ode(e) => MorseFlowError::Integration {
                from: md.points[i].name.clone(),
                to: md.points[j].name.clone(),
                detail: format!("{what}: {e}"),
            },
            FlowFailure::Budget { time, last } => MorseFlowError::ShootingBudget {
                from: md.points[i].name.clone(),
                to: md.points[j].name.clone(),
                detail: format!(
                    "{what}: no decision after flow time {time:.1}; stuck near ({:.6}, {:.6}, {:.6}) at f = {:.9}",
                    last.x,
                    last.y,
                    last.z,
                    md.model.f(&last)
                ),
            },
            FlowFailure::Monotonicity { at } => MorseFlowError::Monotonicity {
                from: md.points[i].name.clone(),
                to: md.points[j].name.clone(),
                position: at,
            },
        }
    }
}

/// A critical point lift a separatrix may end at.
struct Terminal {
    point: usize,
    lift: usize,
    position: Vector3<f64>,
}

fn terminals(md: &MorseData, index: usize) -> Vec<Terminal> {
    md.points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.index == index)
        .flat_map(|(k, p)| {
            p.lifts.iter().enumerate().map(move |(l, lf)| Terminal {
                point: k,
                lift: l,
                position: lf.position,
            })
        })
        .collect()
}

/// Follows a separatrix from `start` through the regular `level` and on until
/// it enters the `radius` ball of one of `ends`. Returns the trajectory and
/// the index of the terminal reached.
fn follow_separatrix(
    model: &ManifoldModel,
    start: &Vector3<f64>,
    descend: bool,
    level: f64,
    ends: &[Terminal],
    radius: f64,
    opts: &ShootingOptions,
) -> Result<(Vec<Vector3<f64>>, usize), FlowFailure> {
    let sign = if descend { 1.0 } else { -1.0 };
    let mut states = flow_until(model, start, descend, |x| sign * (model.f(x) - level), opts)?;
    let crossing = *states.last().unwrap();
    let distance = |x: &Vector3<f64>| ends.iter().map(|t| (x - t.position).norm()).fold(f64::INFINITY, f64::min);
    let rest = flow_until(model, &crossing, descend, |x| distance(x) - radius, opts)?;
    states.extend(rest.into_iter().skip(1));
    let last = *states.last().unwrap();
    let reached = (0..ends.len())
        .min_by(|&a, &b| (last - ends[a].position).norm().total_cmp(&(last - ends[b].position).norm()))
        .unwrap();
    Ok((states, reached))
}

/// Regular level between `r_j` and the next critical value above it.
fn intermediate_level(md: &MorseData, i: usize, j: usize, opts: &ShootingOptions) -> f64 {
    let low = md.points[j].value;
    let above = md.next_value_above(low).unwrap_or(md.points[i].value);
    low + opts.level_fraction * (above - low)
}

/// Finds every flow line from critical point `i` to critical point `j`,
/// where `index(i) = index(j) + 1`. Lines are ordered by shooting parameter.
pub fn shoot_flow_lines(
    md: &MorseData,
    i: usize,
    j: usize,
    opts: &ShootingOptions,
) -> Result<Vec<FlowLine>, MorseFlowError> {
    let (src, dst) = (&md.points[i], &md.points[j]);
    if src.index != dst.index + 1 {
        return Err(MorseFlowError::IndexGap {
            from: src.name.clone(),
            to: dst.name.clone(),
        });
    }
    if src.value <= dst.value {
        return Ok(Vec::new());
    }
    let mut lines = match src.index {
        1 => shoot_from_saddle(md, i, j, opts)?,
        2 => shoot_into_saddle(md, i, j, opts)?,
        _ => {
            return Err(MorseFlowError::IndexGap {
                from: src.name.clone(),
                to: dst.name.clone(),
            })
        }
    };
    lines.sort_by(|a, b| a.shooting_parameter.total_cmp(&b.shooting_parameter));
    Ok(lines)
}

/// Both descending separatrices of the representative lift of the saddle
/// `i`, kept when they end at a lift of `j`.
fn shoot_from_saddle(md: &MorseData, i: usize, j: usize, opts: &ShootingOptions) -> Result<Vec<FlowLine>, MorseFlowError> {
    let model = &md.model;
    let lift = &md.points[i].lifts[0];
    let minima = terminals(md, 0);
    let level = intermediate_level(md, i, j, opts);
    let sides = [1.0, -1.0];
    let found = sides
        .par_iter()
        .map(|&side| {
            let start = model.project(&(lift.position + side * opts.launch_radius * lift.unstable[0]));
            follow_separatrix(model, &start, true, level, &minima, opts.launch_radius, opts)
                .map(|r| (side, r))
                .map_err(|e| e.into_error(md, i, j, "unstable separatrix"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut lines = Vec::new();
    for (side, (states, t)) in found {
        let end = &minima[t];
        if end.point != j {
            continue;
        }
        let mut polyline = vec![lift.position];
        polyline.extend(states);
        polyline.push(end.position);
        lines.push(FlowLine {
            source: i,
            target: j,
            target_lift: end.lift,
            polyline,
            sign: 0,
            shooting_parameter: side,
        });
    }
    Ok(lines)
}

/// Lines from the maximum `i` into the saddle `j`: every ascending stable
/// separatrix of every lift of `j` is followed through the intermediate level
/// until it enters the launch ball of a maximum, and kept when that is the
/// representative lift of `i`. The shooting parameter is the angle on the
/// unstable circle of `i` at which the line leaves the launch ball.
fn shoot_into_saddle(md: &MorseData, i: usize, j: usize, opts: &ShootingOptions) -> Result<Vec<FlowLine>, MorseFlowError> {
    let model = &md.model;
    let (src, dst) = (&md.points[i], &md.points[j]);
    let maxima = terminals(md, 2);
    let level = intermediate_level(md, i, j, opts);
    let launches: Vec<(usize, f64)> = (0..dst.lifts.len()).flat_map(|l| [(l, 1.0), (l, -1.0)]).collect();
    let found = launches
        .par_iter()
        .map(|&(l, side)| {
            let lift = &dst.lifts[l];
            let start = model.project(&(lift.position + side * opts.launch_radius * lift.stable[0]));
            follow_separatrix(model, &start, false, level, &maxima, opts.launch_radius, opts)
                .map(|r| (l, r))
                .map_err(|e| e.into_error(md, i, j, "stable separatrix"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let top = &src.lifts[0];
    let (a1, a2) = (top.unstable[0], top.unstable[1]);
    let mut lines = Vec::new();
    for (l, (states, t)) in found {
        let end = &maxima[t];
        if end.point != i || end.lift != 0 {
            continue;
        }
        let exit = states.last().unwrap() - top.position;
        let theta = exit.dot(&a2).atan2(exit.dot(&a1)).rem_euclid(2.0 * PI);
        let mut polyline = vec![top.position];
        polyline.extend(states.into_iter().rev());
        polyline.push(dst.lifts[l].position);
        lines.push(FlowLine {
            source: i,
            target: j,
            target_lift: l,
            polyline,
            sign: 0,
            shooting_parameter: theta,
        });
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morseflow::critical::{find_critical_points, CriticalOptions};
    use crate::morseflow::model::TORUS_TILT;

    #[test]
    fn torus_lines_come_in_pairs() {
        let md = find_critical_points(&ManifoldModel::torus(TORUS_TILT), &CriticalOptions::default()).unwrap();
        let opts = ShootingOptions::default();
        for (i, j) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            let lines = shoot_flow_lines(&md, i, j, &opts).unwrap();
            assert_eq!(lines.len(), 2, "{i} -> {j}");
            for l in &lines {
                let f: Vec<f64> = l.polyline.iter().map(|x| md.model.f(x)).collect();
                assert!(f.windows(2).all(|w| w[1] < w[0]), "{i} -> {j} not monotone");
            }
        }
    }

    #[test]
    fn projective_plane_lines() {
        let md = find_critical_points(&ManifoldModel::projective_plane(), &CriticalOptions::default()).unwrap();
        let opts = ShootingOptions::default();
        let top = shoot_flow_lines(&md, 0, 1, &opts).unwrap();
        assert_eq!(top.len(), 2);
        // one line to each lift of the saddle
        assert_ne!(top[0].target_lift, top[1].target_lift);
        assert_eq!(shoot_flow_lines(&md, 1, 2, &opts).unwrap().len(), 2);
    }

    #[test]
    fn index_gap_is_enforced() {
        let md = find_critical_points(&ManifoldModel::sphere(), &CriticalOptions::default()).unwrap();
        assert!(matches!(
            shoot_flow_lines(&md, 0, 1, &ShootingOptions::default()),
            Err(MorseFlowError::IndexGap { .. })
        ));
    }
}
