use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::critical::{find_critical_points, CriticalOptions, MorseData};
use super::model::ManifoldModel;
use super::pseudogradient::{build_pseudogradient, PseudogradientReport};
use super::shooting::{shoot_flow_lines, FlowLine, ShootingOptions};
use super::signs::assign_signs;
use super::MorseFlowError;
use crate::continuation::{ContinuationError, FlowContinuation};
use crate::flowcat::GradedFlowCategory;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MorseFlowOptions {
    pub critical: CriticalOptions,
    pub shooting: ShootingOptions,
}

/// Everything computed on the way from a model to its flow category.
#[derive(Clone, Debug)]
pub struct MorsePipeline {
    pub data: MorseData,
    pub pseudogradient: PseudogradientReport,
    pub lines: Vec<FlowLine>,
    pub category: GradedFlowCategory,
}

/// Pairs `(i, j)` with `index(i) = index(j) + 1` and `f(i) > f(j)`.
pub fn shooting_pairs(md: &MorseData) -> Vec<(usize, usize)> {
    let n = md.points.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if md.points[i].index == md.points[j].index + 1 && md.points[i].value > md.points[j].value {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Signed count and number of lines for every shooting pair.
pub fn count_table(md: &MorseData, lines: &[FlowLine]) -> BTreeMap<(usize, usize), (i64, u64)> {
    let mut table: BTreeMap<(usize, usize), (i64, u64)> = shooting_pairs(md).into_iter().map(|p| (p, (0, 0))).collect();
    for line in lines {
        let entry = table.entry((line.source, line.target)).or_insert((0, 0));
        entry.0 += line.sign;
        entry.1 += 1;
    }
    table
}

/// Flow category with one object per critical point, grading the Morse
/// index, and counts the signed numbers of flow lines.
pub fn assemble_flow_category(md: &MorseData, lines: &[FlowLine]) -> Result<GradedFlowCategory, MorseFlowError> {
    if let Some(line) = lines.iter().find(|l| l.sign == 0) {
        return Err(MorseFlowError::SignFrame {
            from: md.points[line.source].name.clone(),
            to: md.points[line.target].name.clone(),
            detail: "line has no sign".into(),
        });
    }
    let points = md.points.iter().map(|p| (p.name.clone(), p.index as i64)).collect();
    let table = count_table(md, lines);
    let cat = GradedFlowCategory::new(points, table.iter().map(|(&k, &(n, _))| (k, n)))?
        .with_cardinalities(table.iter().map(|(&k, &(_, c))| (k, c)))?;
    let violations = cat.check_d_squared();
    if !violations.is_empty() {
        return Err(crate::flowcat::FlowCatError::DSquared(violations).into());
    }
    Ok(cat)
}

/// Critical points, pseudo-gradient validation, shooting over every index
/// gap one pair, signs, and assembly.
pub fn compute_flow_category(model: &ManifoldModel, opts: &MorseFlowOptions) -> Result<MorsePipeline, MorseFlowError> {
    let data = find_critical_points(model, &opts.critical)?;
    let (_, pseudogradient) = build_pseudogradient(&data, 32)?;
    let mut lines = Vec::new();
    for (i, j) in shooting_pairs(&data) {
        lines.extend(shoot_flow_lines(&data, i, j, &opts.shooting)?);
    }
    let lines = assign_signs(&lines, &data)?;
    let category = assemble_flow_category(&data, &lines)?;
    Ok(MorsePipeline {
        data,
        pseudogradient,
        lines,
        category,
    })
}

/// Continuation of the constant homotopy on `M × [0, 1]` with
/// `F(x, t) = f(x) + h(t)`, `h` having its maximum at `t = 1`. Critical points
/// at the top carry grading `μ + 1`; the only lines to the bottom are the
/// vertical ones over each critical point. Orienting the unstable manifold
/// at the top as `(U_i, -∂t)` and comparing with `(-∂t, U_i)` moves `-∂t`
/// past `μ(i)` vectors, so the vertical line over `i` counts `(-1)^{μ(i)}`.
pub fn product_continuation(category: &GradedFlowCategory) -> Result<FlowContinuation, ContinuationError> {
    let cross = (0..category.len()).map(|i| ((i, i), if category.mu(i) % 2 == 0 { 1 } else { -1 }));
    FlowContinuation::new(category.shifted(1), category.clone(), cross)
}

/// Plain-text polylines: a header line per flow line followed by one
/// `x y z` row per sample and a blank separator line.
pub fn write_trajectories(md: &MorseData, lines: &[FlowLine]) -> String {
    let mut out = String::new();
    writeln!(out, "# model {}", md.model.name).unwrap();
    for p in &md.points {
        let x = p.position();
        writeln!(
            out,
            "# critical {} index={} value={:.12} at {:.12} {:.12} {:.12}",
            p.name, p.index, p.value, x.x, x.y, x.z
        )
        .unwrap();
    }
    for line in lines {
        writeln!(
            out,
            "line {} {} sign={:+} param={:.12}",
            md.points[line.source].name, md.points[line.target].name, line.sign, line.shooting_parameter
        )
        .unwrap();
        for x in &line.polyline {
            writeln!(out, "{:.12} {:.12} {:.12}", x.x, x.y, x.z).unwrap();
        }
        out.push('\n');
    }
    out
}
