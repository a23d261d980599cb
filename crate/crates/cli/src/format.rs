//! Text and image encodings of computed spectra.

use std::fmt::Write as _;

use rabi_core::response::SpectrumGrid;
use rabi_core::{ModelParams, TruncationConfig};
use serde::Serialize;

/// Nine significant digits.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Twelve significant digits.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// `epsilon,omega_p,transmission`, epsilon-major.
pub fn grid_csv(grid: &SpectrumGrid) -> String {
    let mut out = String::from("epsilon,omega_p,transmission\n");
    for (a, eps) in grid.epsilon_axis.iter().enumerate() {
        for (b, wp) in grid.probe_axis.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", sig9(*eps), sig9(*wp), sig9(grid.get(a, b)));
        }
    }
    out
}

#[derive(Serialize)]
struct GridMetadata<'a> {
    params: &'a ModelParams,
    probe: &'a rabi_core::response::ProbeConfig,
    thermal: &'a rabi_core::response::ThermalConfig,
    truncation: &'a TruncationConfig,
    clamped_points: usize,
    layout: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct GridJson<'a> {
    epsilon_axis: &'a [f64],
    probe_axis: &'a [f64],
    values: &'a [f64],
    metadata: GridMetadata<'a>,
}

pub fn grid_json(grid: &SpectrumGrid, truncation: &TruncationConfig) -> String {
    let doc = GridJson {
        epsilon_axis: &grid.epsilon_axis,
        probe_axis: &grid.probe_axis,
        values: &grid.values,
        metadata: GridMetadata {
            params: &grid.template,
            probe: &grid.probe,
            thermal: &grid.thermal,
            truncation,
            clamped_points: grid.clamped_points,
            layout: "epsilon-major",
            version: env!("CARGO_PKG_VERSION"),
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("grid serializes");
    s.push('\n');
    s
}

/// Binary P6 pixmap: one pixel per lattice point, epsilon along x, probe
/// frequency increasing upward, gray level `round(255 T)`.
pub fn heatmap_ppm(grid: &SpectrumGrid) -> Vec<u8> {
    let (w, h) = (grid.epsilon_axis.len(), grid.probe_axis.len());
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(3 * w * h);
    for row in (0..h).rev() {
        for col in 0..w {
            let t = grid.get(col, row).clamp(0.0, 1.0);
            let v = (255.0 * t).round() as u8;
            out.extend_from_slice(&[v, v, v]);
        }
    }
    out
}

/// One row of the level table.
pub struct LevelRow {
    pub epsilon: f64,
    pub energies: Vec<f64>,
    pub transitions: Vec<f64>,
}

pub fn levels_csv(levels: usize, transitions: &[(usize, usize)], rows: &[LevelRow]) -> String {
    let mut out = String::from("epsilon");
    for n in 0..levels {
        let _ = write!(out, ",E_{n}");
    }
    for (i, j) in transitions {
        let _ = write!(out, ",omega_{i}{j}");
    }
    out.push('\n');
    for row in rows {
        out.push_str(&sig12(row.epsilon));
        for x in row.energies.iter().chain(&row.transitions) {
            out.push(',');
            out.push_str(&sig12(*x));
        }
        out.push('\n');
    }
    out
}
