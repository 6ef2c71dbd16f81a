//! Static SVG rendering of a map plus an optional trajectory: priority heat
//! layer, no-coverage cells, sensed cells, overlap shading, and the
//! trajectory polyline. Output is deterministic for identical inputs.

use std::collections::HashMap;
use std::fmt::Write as _;

use pancover_core::map::Zone;
use pancover_core::{CellIndex, CoverageMap, Trajectory};

const SCALE: f64 = 8.0;

fn heat_color(p: i64, p_min: i64, p_max: i64) -> String {
    // Urgent (low or negative priority) renders red, fresh renders green.
    let span = (p_max - p_min).max(1) as f64;
    let t = ((p - p_min) as f64 / span).clamp(0.0, 1.0);
    let r = (220.0 * (1.0 - t) + 40.0 * t) as u8;
    let g = (60.0 * (1.0 - t) + 180.0 * t) as u8;
    format!("#{r:02x}{g:02x}50")
}

/// Cells covered by at least two step footprints: the union over steps of
/// each footprint's intersection with everything sensed before it.
pub fn overlap_cells(traj: &Trajectory) -> Vec<CellIndex> {
    let mut counts: HashMap<CellIndex, u32> = HashMap::new();
    for step in &traj.steps {
        for &c in &step.footprint {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    let mut cells: Vec<CellIndex> = counts
        .into_iter()
        .filter_map(|(c, n)| (n >= 2).then_some(c))
        .collect();
    cells.sort_unstable();
    cells
}

pub fn render_svg(map: &CoverageMap, traj: Option<&Trajectory>) -> String {
    let w = map.width() as f64 * SCALE;
    let h = map.height() as f64 * SCALE;
    let cs = map.cell_size();
    // Map y points up; SVG y points down.
    let sx = |x: f64| x / cs * SCALE;
    let sy = |y: f64| h - y / cs * SCALE;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );

    let (mut p_min, mut p_max) = (i64::MAX, i64::MIN);
    for (_, s) in map.iter_cells() {
        if s.zone == Zone::Coverage {
            p_min = p_min.min(s.priority());
            p_max = p_max.max(s.priority());
        }
    }
    if p_min > p_max {
        (p_min, p_max) = (0, 1);
    }

    let _ = writeln!(out, r#"<g shape-rendering="crispEdges">"#);
    for (c, s) in map.iter_cells() {
        let color = match s.zone {
            Zone::NoCoverage => "#6a6a6a".to_string(),
            Zone::Coverage => heat_color(s.priority(), p_min, p_max),
        };
        let x = c.col as f64 * SCALE;
        let y = h - (c.row + 1) as f64 * SCALE;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{SCALE}" height="{SCALE}" fill="{color}"/>"#
        );
    }
    let _ = writeln!(out, "</g>");

    if let Some(traj) = traj {
        // Sensed cells, then overlap shading on top.
        let mut sensed: Vec<CellIndex> = traj
            .steps
            .iter()
            .flat_map(|s| s.footprint.iter().copied())
            .collect();
        sensed.sort_unstable();
        sensed.dedup();
        let _ = writeln!(out, r##"<g fill="#3070d0" fill-opacity="0.35">"##);
        for c in &sensed {
            let x = c.col as f64 * SCALE;
            let y = h - (c.row + 1) as f64 * SCALE;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{SCALE}" height="{SCALE}"/>"#
            );
        }
        let _ = writeln!(out, "</g>");

        let _ = writeln!(out, r##"<g fill="#ff8800" fill-opacity="0.6">"##);
        for c in overlap_cells(traj) {
            let x = c.col as f64 * SCALE;
            let y = h - (c.row + 1) as f64 * SCALE;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{SCALE}" height="{SCALE}"/>"#
            );
        }
        let _ = writeln!(out, "</g>");

        if !traj.steps.is_empty() {
            let mut points = String::new();
            for s in &traj.steps {
                let _ = write!(points, "{:.2},{:.2} ", sx(s.x), sy(s.y));
            }
            let _ = writeln!(
                out,
                r##"<polyline points="{}" fill="none" stroke="#102040" stroke-width="2"/>"##,
                points.trim_end()
            );
            let s0 = &traj.steps[0];
            let _ = writeln!(
                out,
                r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#ffffff" stroke="#102040" stroke-width="2"/>"##,
                sx(s0.x),
                sy(s0.y)
            );
        }
    }

    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use pancover_core::footprint::{footprint_cells, SensorGeometry};
    use pancover_core::map::CellState;
    use pancover_core::trajectory::TrajectoryStep;

    #[test]
    fn overlap_cells_match_pairwise_footprint_overlap() {
        // Oracle: union over steps of this footprint's overlap with every
        // earlier footprint, recomputed through the footprint module.
        let map = CoverageMap::new(40, 40, 1.0, CellState::coverage(100, 0));
        let geom = SensorGeometry::default();
        let mut steps = Vec::new();
        let mut fps = Vec::new();
        for k in 0..8u64 {
            let x = 10.0 + 1.5 * k as f64;
            let y = 15.0 + 0.7 * k as f64;
            let psi_bin = (k % 4) as u8;
            let fp = footprint_cells(&map, x, y, 0.0, geom.psi_angle(psi_bin), &geom).unwrap();
            steps.push(TrajectoryStep {
                t: k,
                x,
                y,
                theta: 0.0,
                v: 1.0,
                psi_bin,
                footprint: fp.cells.clone(),
            });
            fps.push(fp);
        }
        let traj = Trajectory {
            steps,
            primitives: vec![],
            motion_cost: 7.0,
            sensor_cost: 0.0,
        };

        let mut oracle: Vec<CellIndex> = Vec::new();
        for i in 0..fps.len() {
            for j in 0..i {
                oracle.extend(pancover_core::footprint::footprint_overlap(&fps[i], &fps[j]));
            }
        }
        oracle.sort_unstable();
        oracle.dedup();

        assert_eq!(overlap_cells(&traj), oracle);
        assert!(!oracle.is_empty(), "consecutive footprints must overlap here");
    }

    #[test]
    fn empty_trajectory_renders_map_only() {
        let map = CoverageMap::new(10, 10, 1.0, CellState::coverage(100, 20));
        let svg = render_svg(&map, None);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("polyline"));
    }
}
