//! Thermal multi-level reflection and transmission spectra.
//!
//! Each allowed transition `i -> j` contributes a saturated Lorentzian
//! `R0 P_i W^2 / (W^2 + (omega_p - omega_ij)^2 + Gamma^2)` with Rabi
//! frequency `W = |A_p <j|(a + a^dag)|i>|`; transmission is `T = 1 - R`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::model::{self, EigenSystem, ModelParams, TruncationConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Drive amplitude `A_p`.
    pub amplitude: f64,
    /// Decoherence rate, uniform across transitions.
    pub gamma: f64,
    /// Peak reflection `R0`.
    pub r0: f64,
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidConfig("gamma must be positive"));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidConfig("probe amplitude must be non-negative"));
        }
        if !(self.r0 > 0.0 && self.r0 <= 1.0) {
            return Err(Error::InvalidConfig("r0 must lie in (0, 1]"));
        }
        Ok(())
    }
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            amplitude: 2e-3,
            gamma: 3e-3,
            r0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalConfig {
    /// `k_B T` in frequency units.
    pub kt: f64,
    /// Levels retained in the transition sums.
    pub max_levels: usize,
    /// Populations below this are dropped before renormalization.
    pub population_floor: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            kt: 0.5,
            max_levels: 8,
            population_floor: 1e-6,
        }
    }
}

impl ThermalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kt >= 0.0) {
            return Err(Error::InvalidConfig("kt must be non-negative"));
        }
        if self.max_levels < 2 {
            return Err(Error::InvalidConfig("max_levels must be at least 2"));
        }
        if !(self.population_floor >= 0.0) {
            return Err(Error::InvalidConfig("population_floor must be non-negative"));
        }
        Ok(())
    }
}

/// Boltzmann populations of the lowest `max_levels` levels, floored and
/// renormalized to sum to one.
pub fn thermal_populations(eig: &EigenSystem, thermal: &ThermalConfig) -> Result<Vec<f64>> {
    thermal.validate()?;
    let e = eig.energies();
    let count = thermal.max_levels.min(e.len());
    let mut p: Vec<f64> = if thermal.kt == 0.0 {
        (0..count).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
    } else {
        e[..count]
            .iter()
            .map(|ei| (-(ei - e[0]) / thermal.kt).exp())
            .collect()
    };
    let z: f64 = p.iter().sum();
    for pi in &mut p {
        *pi /= z;
        if *pi < thermal.population_floor {
            *pi = 0.0;
        }
    }
    let z: f64 = p.iter().sum();
    for pi in &mut p {
        *pi /= z;
    }
    Ok(p)
}

/// One Lorentzian term of the reflection sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub from_level: usize,
    pub to_level: usize,
    pub population: f64,
    pub rabi_sq: f64,
    pub frequency: f64,
}

/// Populated transitions of one eigensystem, ready to be evaluated at many
/// probe frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct LineList {
    pub lines: Vec<SpectralLine>,
    probe: ProbeConfig,
}

impl LineList {
    pub fn new(eig: &EigenSystem, probe: &ProbeConfig, thermal: &ThermalConfig) -> Result<Self> {
        probe.validate()?;
        let pops = thermal_populations(eig, thermal)?;
        let count = pops.len();
        let mut lines = Vec::new();
        for (i, &pop) in pops.iter().enumerate() {
            if pop == 0.0 {
                continue;
            }
            let xi = model::apply_position(eig.vector(i));
            for j in (i + 1)..count {
                let element = model::dot(eig.vector(j), &xi).abs();
                let rabi = probe.amplitude * element;
                if rabi == 0.0 {
                    continue;
                }
                lines.push(SpectralLine {
                    from_level: i,
                    to_level: j,
                    population: pop,
                    rabi_sq: rabi * rabi,
                    frequency: eig.energies()[j] - eig.energies()[i],
                });
            }
        }
        Ok(LineList {
            lines,
            probe: *probe,
        })
    }

    /// Reflection before clamping; may exceed one when lines overlap.
    pub fn reflection_unclamped(&self, omega_p: f64) -> f64 {
        let g2 = self.probe.gamma * self.probe.gamma;
        self.probe.r0
            * self
                .lines
                .iter()
                .map(|l| {
                    let det = omega_p - l.frequency;
                    l.population * l.rabi_sq / (l.rabi_sq + det * det + g2)
                })
                .sum::<f64>()
    }

    pub fn reflection(&self, omega_p: f64) -> f64 {
        self.reflection_unclamped(omega_p).min(1.0)
    }
}

/// Reflection coefficient at probe frequency `omega_p`, clamped to 1.
pub fn reflection(
    eig: &EigenSystem,
    probe: &ProbeConfig,
    thermal: &ThermalConfig,
    omega_p: f64,
) -> Result<f64> {
    if !(omega_p >= 0.0) {
        return Err(Error::InvalidConfig("probe frequency must be non-negative"));
    }
    Ok(LineList::new(eig, probe, thermal)?.reflection(omega_p))
}

/// Sweep of the qubit bias with the other parameters fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSweep {
    pub template: ModelParams,
    pub epsilon_axis: Vec<f64>,
}

impl BiasSweep {
    pub fn new(template: ModelParams, epsilon_axis: Vec<f64>) -> Result<Self> {
        template.validate()?;
        check_axis(&epsilon_axis, "epsilon")?;
        Ok(BiasSweep {
            template,
            epsilon_axis,
        })
    }

    pub fn params_at(&self, epsilon: f64) -> ModelParams {
        self.template.with_epsilon(epsilon)
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// 241 points over `[-2 omega, 2 omega]`.
pub fn default_epsilon_axis(omega: f64) -> Vec<f64> {
    linspace(-2.0 * omega, 2.0 * omega, 241)
}

/// 201 points over `[0.8 omega, 1.2 omega]`.
pub fn default_probe_axis(omega: f64) -> Vec<f64> {
    linspace(0.8 * omega, 1.2 * omega, 201)
}

pub(crate) fn check_axis(axis: &[f64], name: &'static str) -> Result<()> {
    if axis.is_empty()
        || axis.iter().any(|x| !x.is_finite())
        || axis.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::BadAxis(name));
    }
    Ok(())
}

/// Transmission over an `(epsilon, omega_p)` lattice, stored row-major with
/// epsilon as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub epsilon_axis: Vec<f64>,
    pub probe_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub template: ModelParams,
    pub probe: ProbeConfig,
    pub thermal: ThermalConfig,
    /// Lattice points where the reflection sum exceeded one.
    pub clamped_points: usize,
}

impl SpectrumGrid {
    pub fn get(&self, eps_index: usize, probe_index: usize) -> f64 {
        self.values[eps_index * self.probe_axis.len() + probe_index]
    }

    pub fn column(&self, eps_index: usize) -> &[f64] {
        let n = self.probe_axis.len();
        &self.values[eps_index * n..(eps_index + 1) * n]
    }
}

/// Transmission column at fixed bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub values: Vec<f64>,
    pub clamped_points: usize,
}

/// Truncation that also converges every level entering the sums.
pub fn response_truncation(trunc: &TruncationConfig, thermal: &ThermalConfig) -> TruncationConfig {
    let levels = trunc.n_levels_checked.max(thermal.max_levels);
    TruncationConfig {
        n_levels_checked: levels,
        n_fock: trunc.n_fock.max(levels),
        max_cutoff: trunc.max_cutoff.max(levels),
        ..*trunc
    }
}

/// One grid column: `T = 1 - R` over `probe_axis` at bias `epsilon`.
pub fn transmission_column(
    params: &ModelParams,
    probe: &ProbeConfig,
    thermal: &ThermalConfig,
    probe_axis: &[f64],
    trunc: &TruncationConfig,
) -> Result<Column> {
    let trunc = response_truncation(trunc, thermal);
    let run = || -> Result<Column> {
        let eig = model::converged_eigensystem(params, &trunc)?;
        let lines = LineList::new(&eig, probe, thermal)?;
        let mut clamped_points = 0;
        let values = probe_axis
            .iter()
            .map(|&wp| {
                let r = lines.reflection_unclamped(wp);
                if r > 1.0 {
                    clamped_points += 1;
                }
                1.0 - r.min(1.0)
            })
            .collect();
        Ok(Column {
            values,
            clamped_points,
        })
    };
    run().map_err(|e| e.at_bias(params.epsilon))
}

/// Assembles independently computed columns (ordered by epsilon index).
pub fn assemble_grid(
    sweep: &BiasSweep,
    probe: &ProbeConfig,
    thermal: &ThermalConfig,
    probe_axis: &[f64],
    columns: Vec<Column>,
) -> SpectrumGrid {
    debug_assert_eq!(columns.len(), sweep.epsilon_axis.len());
    let mut values = Vec::with_capacity(columns.len() * probe_axis.len());
    let mut clamped_points = 0;
    for col in columns {
        clamped_points += col.clamped_points;
        values.extend(col.values);
    }
    SpectrumGrid {
        epsilon_axis: sweep.epsilon_axis.clone(),
        probe_axis: probe_axis.to_vec(),
        values,
        template: sweep.template,
        probe: *probe,
        thermal: *thermal,
        clamped_points,
    }
}

/// Validates grid inputs shared by the sequential and parallel drivers.
pub fn check_grid_inputs(
    probe: &ProbeConfig,
    thermal: &ThermalConfig,
    probe_axis: &[f64],
) -> Result<()> {
    probe.validate()?;
    thermal.validate()?;
    check_axis(probe_axis, "probe")?;
    if probe_axis[0] < 0.0 {
        return Err(Error::BadAxis("probe"));
    }
    Ok(())
}

/// Sequential transmission grid; each bias column uses its own converged
/// eigensystem.
pub fn transmission_grid(
    sweep: &BiasSweep,
    probe: &ProbeConfig,
    thermal: &ThermalConfig,
    probe_axis: &[f64],
    trunc: &TruncationConfig,
) -> Result<SpectrumGrid> {
    check_grid_inputs(probe, thermal, probe_axis)?;
    let columns = sweep
        .epsilon_axis
        .iter()
        .map(|&eps| transmission_column(&sweep.params_at(eps), probe, thermal, probe_axis, trunc))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_grid(sweep, probe, thermal, probe_axis, columns))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinePoint {
    pub epsilon: f64,
    pub frequency: f64,
    pub matrix_element: f64,
}

/// Transition frequency and drive element of one level pair along a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionLine {
    pub from_level: usize,
    pub to_level: usize,
    pub points: Vec<LinePoint>,
}

/// Transition lines for `pairs` at one bias, in the order of `pairs`.
pub fn line_points_at(
    params: &ModelParams,
    pairs: &[(usize, usize)],
    trunc: &TruncationConfig,
) -> Result<Vec<LinePoint>> {
    let highest = pairs.iter().map(|p| p.1).max().unwrap_or(0);
    let trunc = TruncationConfig {
        n_levels_checked: trunc.n_levels_checked.max(highest + 1),
        n_fock: trunc.n_fock.max(highest + 1),
        ..*trunc
    };
    let run = || -> Result<Vec<LinePoint>> {
        let eig = model::converged_eigensystem(params, &trunc)?;
        pairs
            .iter()
            .map(|&(i, j)| {
                Ok(LinePoint {
                    epsilon: params.epsilon,
                    frequency: eig.transition_frequency(i, j)?,
                    matrix_element: eig.drive_matrix_element(i, j)?,
                })
            })
            .collect()
    };
    run().map_err(|e| e.at_bias(params.epsilon))
}

pub fn transition_lines(
    sweep: &BiasSweep,
    pairs: &[(usize, usize)],
    trunc: &TruncationConfig,
) -> Result<Vec<TransitionLine>> {
    for &(i, j) in pairs {
        if i >= j {
            return Err(Error::LevelOrder { i, j });
        }
    }
    let mut lines: Vec<TransitionLine> = pairs
        .iter()
        .map(|&(i, j)| TransitionLine {
            from_level: i,
            to_level: j,
            points: Vec::with_capacity(sweep.epsilon_axis.len()),
        })
        .collect();
    for &eps in &sweep.epsilon_axis {
        let points = line_points_at(&sweep.params_at(eps), pairs, trunc)?;
        for (line, point) in lines.iter_mut().zip(points) {
            line.points.push(point);
        }
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn eig(delta: f64, eps: f64, g: f64) -> EigenSystem {
        let p = ModelParams::normalized(delta, eps, g).unwrap();
        model::converged_eigensystem(&p, &TruncationConfig::default()).unwrap()
    }

    #[test]
    fn zero_temperature_is_ground_state() {
        let e = eig(0.1, 0.0, 0.6);
        let p = thermal_populations(&e, &ThermalConfig { kt: 0.0, ..Default::default() }).unwrap();
        assert_eq!(p[0], 1.0);
        assert!(p[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_level_high_temperature_equipartition() {
        let e = eig(0.1, 0.0, 0.0);
        let thermal = ThermalConfig {
            kt: 1e9,
            max_levels: 2,
            population_floor: 0.0,
        };
        let p = thermal_populations(&e, &thermal).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn populations_at_half_omega_temperature() {
        let e = eig(0.1, 0.0, 0.6);
        let p = thermal_populations(&e, &ThermalConfig::default()).unwrap();
        assert!(p[0] > 0.1 && p[1] > 0.1, "{p:?}");
        assert!(p[4] < 1e-2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_resonant_line() {
        // Uncoupled, zero temperature: only 0 -> 2 (bare photon) is driven.
        let e = eig(0.1, 0.0, 0.0);
        let probe = ProbeConfig {
            amplitude: 2e-3,
            gamma: 3e-3,
            r0: 0.8,
        };
        let thermal = ThermalConfig { kt: 0.0, ..Default::default() };
        let w01 = e.transition_frequency(0, 2).unwrap();
        let r = reflection(&e, &probe, &thermal, w01).unwrap();
        let omega2 = 4e-6;
        let expect = 0.8 * omega2 / (omega2 + 9e-6);
        assert!((r - expect).abs() < 1e-12, "{r} vs {expect}");
    }

    #[test]
    fn no_drive_means_full_transmission() {
        let e = eig(0.1, 0.2, 0.4);
        let probe = ProbeConfig {
            amplitude: 0.0,
            ..Default::default()
        };
        let r = reflection(&e, &probe, &ThermalConfig::default(), 1.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn overlapping_lines_clamp() {
        let e = eig(0.1, 0.0, 0.3);
        let probe = ProbeConfig {
            amplitude: 10.0,
            gamma: 1e-3,
            r0: 1.0,
        };
        let thermal = ThermalConfig {
            kt: 1.0,
            max_levels: 8,
            population_floor: 0.0,
        };
        let lines = LineList::new(&e, &probe, &thermal).unwrap();
        assert!(lines.reflection_unclamped(1.0) > 1.0);
        assert_eq!(lines.reflection(1.0), 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(ProbeConfig { gamma: 0.0, ..Default::default() }.validate().is_err());
        assert!(ProbeConfig { r0: 1.5, ..Default::default() }.validate().is_err());
        assert!(ProbeConfig { amplitude: -1.0, ..Default::default() }.validate().is_err());
        assert!(ThermalConfig { max_levels: 1, ..Default::default() }.validate().is_err());
        assert!(ThermalConfig { kt: -1.0, ..Default::default() }.validate().is_err());
        assert_eq!(check_axis(&[], "x"), Err(Error::BadAxis("x")));
        assert_eq!(check_axis(&[1.0, 0.0], "x"), Err(Error::BadAxis("x")));
    }

    #[test]
    fn linspace_endpoints() {
        let a = default_epsilon_axis(1.0);
        assert_eq!(a.len(), 241);
        assert_eq!(a[0], -2.0);
        assert_eq!(a[120], 0.0);
        assert_eq!(a[240], 2.0);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }

    #[test]
    fn convergence_failure_names_the_bias() {
        let p = ModelParams::normalized(0.1, 0.25, 3.0).unwrap();
        let trunc = TruncationConfig {
            max_cutoff: 40,
            ..Default::default()
        };
        let err = transmission_column(&p, &ProbeConfig::default(), &ThermalConfig::default(), &[1.0], &trunc)
            .unwrap_err();
        assert!(matches!(err, Error::AtBias { epsilon, .. } if epsilon == 0.25));
    }
}
