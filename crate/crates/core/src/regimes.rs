//! Qualitative line-shape features and the coupling-regime taxonomies.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, BoundarySet};
use crate::model::{self, EigenSystem, ModelParams, TruncationConfig};
use crate::{Error, Result};

/// Default probe step for second differences, in units of `omega`.
pub const DEFAULT_STEP: f64 = 0.01;
/// Second differences below this (times `omega`) are flat.
pub const FLAT_TOL: f64 = 1e-6;
/// Drive elements below this (relative to the bare `0 -> 1` element) are
/// forbidden.
pub const ALLOWED_TOL: f64 = 1e-6;
/// Gap (times `omega`) below which a level is reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;
/// Width of the near-boundary band in `g/omega`.
pub const NEAR_BOUNDARY: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// Local maximum of the transition frequency.
    Peak,
    /// Local minimum.
    Dip,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Location {
    /// `epsilon = 0`.
    SymmetryPoint,
    /// The qubit-oscillator resonance near `epsilon = +-omega`.
    Resonance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineShapeFeature {
    pub transition: (usize, usize),
    pub location: Location,
    /// Bias at which the shape was evaluated.
    pub epsilon: f64,
    pub shape: Shape,
    pub second_difference: f64,
    /// Drive element at `epsilon = 0` above [`ALLOWED_TOL`].
    pub allowed: bool,
    /// One of the two levels is within [`DEGENERACY_TOL`] of a neighbour at
    /// the evaluation bias, so the labels are ambiguous.
    pub degenerate: bool,
}

pub fn shape_of(second_difference: f64, omega: f64) -> Shape {
    if second_difference.abs() < FLAT_TOL * omega {
        Shape::Flat
    } else if second_difference < 0.0 {
        Shape::Peak
    } else {
        Shape::Dip
    }
}

fn feature_truncation(transitions: &[(usize, usize)]) -> TruncationConfig {
    let highest = transitions.iter().map(|t| t.1).max().unwrap_or(0);
    let levels = 8.max(highest + 2);
    TruncationConfig {
        n_fock: levels,
        energy_tol: 1e-12,
        n_levels_checked: levels,
        max_cutoff: 2048,
    }
}

fn is_degenerate(eig: &EigenSystem, level: usize, omega: f64) -> bool {
    let e = eig.energies();
    let tol = DEGENERACY_TOL * omega;
    (level > 0 && e[level] - e[level - 1] < tol)
        || (level + 1 < e.len() && e[level + 1] - e[level] < tol)
}

/// Shapes of each transition line at `epsilon = 0` and at the resonance
/// bias, two features per transition in that order.
pub fn extract_features(
    params: &ModelParams,
    transitions: &[(usize, usize)],
    h: f64,
) -> Result<Vec<LineShapeFeature>> {
    params.validate()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidConfig("probe step must be positive"));
    }
    for &(i, j) in transitions {
        if i >= j {
            return Err(Error::LevelOrder { i, j });
        }
    }
    let trunc = feature_truncation(transitions);
    let h = h * params.omega;
    let at = |eps: f64| -> Result<EigenSystem> {
        model::converged_eigensystem(&params.with_epsilon(eps), &trunc).map_err(|e| e.at_bias(eps))
    };

    let resonance = analytic::resonance_bias(&params.with_epsilon(params.omega), &trunc)?;
    let zero = [at(-h)?, at(0.0)?, at(h)?];
    let res = [at(resonance - h)?, at(resonance)?, at(resonance + h)?];

    let mut out = Vec::with_capacity(2 * transitions.len());
    for &(i, j) in transitions {
        let allowed = zero[1].drive_matrix_element(i, j)? > ALLOWED_TOL;
        for (location, epsilon, eigs) in [
            (Location::SymmetryPoint, 0.0, &zero),
            (Location::Resonance, resonance, &res),
        ] {
            let w = |k: usize| eigs[k].transition_frequency(i, j);
            let d = w(2)? - 2.0 * w(1)? + w(0)?;
            out.push(LineShapeFeature {
                transition: (i, j),
                location,
                epsilon,
                shape: shape_of(d, params.omega),
                second_difference: d,
                allowed,
                degenerate: is_degenerate(&eigs[1], i, params.omega)
                    || is_degenerate(&eigs[1], j, params.omega),
            });
        }
    }
    Ok(out)
}

/// Transitions whose shapes define the five-interval taxonomy.
pub const LOW_TRANSITIONS: [(usize, usize); 4] = [(0, 2), (1, 3), (0, 3), (1, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearBoundary {
    /// Boundary index 1..=4.
    pub boundary: usize,
    pub value: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub g_ratio: f64,
    pub delta_ratio: f64,
    /// 1..=5.
    pub interval_index: usize,
    pub lower: f64,
    /// `None` for the unbounded top interval.
    pub upper: Option<f64>,
    pub boundaries: BoundarySet,
    pub features: Vec<LineShapeFeature>,
    pub near_boundary: Option<NearBoundary>,
}

fn check_low_domain(params: &ModelParams) -> Result<()> {
    params.validate()?;
    let r = params.delta_ratio();
    if !(0.0..1.0).contains(&r) {
        return Err(Error::DeltaRatioOutOfDomain(r));
    }
    Ok(())
}

/// Five-interval classification of `g/omega`; the bias in `params` is ignored.
pub fn classify_low(params: &ModelParams) -> Result<RegimeReport> {
    check_low_domain(params)?;
    let boundaries = analytic::regime_boundaries(params.delta_ratio())?;
    classify_low_with(params, &boundaries)
}

/// As [`classify_low`] with precomputed boundaries for the same `delta/omega`.
pub fn classify_low_with(params: &ModelParams, boundaries: &BoundarySet) -> Result<RegimeReport> {
    check_low_domain(params)?;
    let g_ratio = params.g_ratio();
    let interval_index = boundaries.interval_of(g_ratio);
    let (lower, upper) = boundaries.interval_bounds(interval_index);
    let (boundary, distance) = boundaries.nearest(g_ratio);
    let near_boundary = (distance < NEAR_BOUNDARY).then(|| NearBoundary {
        boundary,
        value: boundaries.values()[boundary - 1],
        distance,
    });
    let features = extract_features(&params.with_epsilon(0.0), &LOW_TRANSITIONS, DEFAULT_STEP)?;
    Ok(RegimeReport {
        g_ratio,
        delta_ratio: params.delta_ratio(),
        interval_index,
        lower,
        upper: upper.is_finite().then_some(upper),
        boundaries: *boundaries,
        features,
        near_boundary,
    })
}

/// The four criteria on the `2 -> 4` and `3 -> 5` lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HigherLevelPattern {
    pub allowed_24_35_at0: bool,
    pub shape_24_at0: Shape,
    pub shape_24_at_eps_omega: Shape,
    pub shape_35_at_eps_omega: Shape,
}

impl HigherLevelPattern {
    const fn new(allowed: bool, s24_0: Shape, s24_w: Shape, s35_w: Shape) -> Self {
        HigherLevelPattern {
            allowed_24_35_at0: allowed,
            shape_24_at0: s24_0,
            shape_24_at_eps_omega: s24_w,
            shape_35_at_eps_omega: s35_w,
        }
    }

    /// Index into [`TABLE_CELLS`] if this is one of the nine populated cells.
    pub fn cell_index(&self) -> Option<usize> {
        TABLE_CELLS.iter().position(|(p, _)| p == self)
    }

    /// Reference `g/omega` values (at `delta/omega = 0.1`) listed in the cell.
    pub fn reference_values(&self) -> Option<&'static [f64]> {
        self.cell_index().map(|k| TABLE_CELLS[k].1)
    }

    pub fn validate(&self) -> Result<()> {
        self.cell_index().map(|_| ()).ok_or(Error::UnpopulatedPattern)
    }
}

use Shape::{Dip, Peak};

/// The nine populated cells of the higher-level taxonomy with the
/// `g/omega` values assigned to them at `delta/omega = 0.1`.
pub const TABLE_CELLS: [(HigherLevelPattern, &[f64]); 9] = [
    (HigherLevelPattern::new(true, Peak, Peak, Peak), &[0.3]),
    (HigherLevelPattern::new(true, Peak, Peak, Dip), &[0.1, 0.2]),
    (HigherLevelPattern::new(true, Peak, Dip, Peak), &[0.4]),
    (HigherLevelPattern::new(false, Peak, Peak, Peak), &[1.0, 1.1]),
    (HigherLevelPattern::new(false, Peak, Dip, Dip), &[0.8, 0.9]),
    (HigherLevelPattern::new(false, Dip, Peak, Peak), &[1.2, 1.3]),
    (HigherLevelPattern::new(false, Dip, Peak, Dip), &[1.4, 1.5, 1.6]),
    (HigherLevelPattern::new(false, Dip, Dip, Peak), &[0.5, 0.6]),
    (HigherLevelPattern::new(false, Dip, Dip, Dip), &[0.7]),
];

/// Reference pattern for one of the tabulated `g/omega` values.
pub fn reference_pattern(g_ratio: f64) -> Option<HigherLevelPattern> {
    TABLE_CELLS
        .iter()
        .find(|(_, gs)| gs.iter().any(|g| (g - g_ratio).abs() < 1e-9))
        .map(|(p, _)| *p)
}

/// Evaluates the higher-level criteria. The returned pattern is whatever
/// the spectrum shows; use [`HigherLevelPattern::validate`] to require a
/// populated cell. A flat line is an error since the criteria are binary.
pub fn classify_high(params: &ModelParams) -> Result<HigherLevelPattern> {
    check_low_domain(params)?;
    let f = extract_features(&params.with_epsilon(0.0), &[(2, 4), (3, 5)], DEFAULT_STEP)?;
    let binary = |s: Shape| if s == Shape::Flat { Err(Error::UnpopulatedPattern) } else { Ok(s) };
    Ok(HigherLevelPattern {
        allowed_24_35_at0: f[0].allowed && f[2].allowed,
        shape_24_at0: binary(f[0].shape)?,
        shape_24_at_eps_omega: binary(f[1].shape)?,
        shape_35_at_eps_omega: binary(f[3].shape)?,
    })
}
