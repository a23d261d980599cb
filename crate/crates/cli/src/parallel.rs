//! Column-parallel drivers over bias sweeps.

use rayon::prelude::*;
use rabi_core::model::{self, TruncationConfig};
use rabi_core::response::{self, BiasSweep, ProbeConfig, SpectrumGrid, ThermalConfig};
use rabi_core::Error;

use crate::format::LevelRow;

/// Worker cap read from `RABI_SPEC_THREADS`; unset, empty or `0` means
/// one worker per core.
pub fn thread_count() -> usize {
    std::env::var("RABI_SPEC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

fn pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .expect("thread pool")
}

/// Parallel version of [`response::transmission_grid`]; columns are merged
/// by bias index, so the result does not depend on the worker count.
pub fn transmission_grid(
    sweep: &BiasSweep,
    probe: &ProbeConfig,
    thermal: &ThermalConfig,
    probe_axis: &[f64],
    trunc: &TruncationConfig,
) -> Result<SpectrumGrid, Error> {
    response::check_grid_inputs(probe, thermal, probe_axis)?;
    let columns = pool().install(|| {
        sweep
            .epsilon_axis
            .par_iter()
            .map(|&eps| response::transmission_column(&sweep.params_at(eps), probe, thermal, probe_axis, trunc))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    Ok(response::assemble_grid(sweep, probe, thermal, probe_axis, columns))
}

/// Lowest `levels` energies and the requested transition frequencies at
/// each bias.
pub fn level_table(
    sweep: &BiasSweep,
    levels: usize,
    transitions: &[(usize, usize)],
    trunc: &TruncationConfig,
) -> Result<Vec<LevelRow>, Error> {
    let highest = transitions.iter().map(|t| t.1 + 1).max().unwrap_or(0).max(levels);
    let trunc = TruncationConfig {
        n_levels_checked: trunc.n_levels_checked.max(highest),
        n_fock: trunc.n_fock.max(highest),
        ..*trunc
    };
    pool().install(|| {
        sweep
            .epsilon_axis
            .par_iter()
            .map(|&eps| {
                let (_, e) = model::converged_energies(&sweep.params_at(eps), &trunc).map_err(|err| Error::AtBias {
                    epsilon: eps,
                    source: Box::new(err),
                })?;
                Ok(LevelRow {
                    epsilon: eps,
                    energies: e[..levels].to_vec(),
                    transitions: transitions.iter().map(|&(i, j)| e[j] - e[i]).collect(),
                })
            })
            .collect()
    })
}
