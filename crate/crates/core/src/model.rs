//! Truncated biased quantum Rabi Hamiltonian
//! `H = -(delta/2) sx - (epsilon/2) sz + omega a^dag a + g sz (a + a^dag)`.
//!
//! Basis index `k = 2n + s`: `n` is the photon number and `s = 0` is the
//! `sz = +1` qubit state, `s = 1` the `sz = -1` state. The interleaved order
//! keeps the matrix banded with half-bandwidth 2.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::eigen::{self, SymMatrix};
use crate::{Error, Result};

/// Hamiltonian frequencies, all in one unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub delta: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub g: f64,
}

impl ModelParams {
    pub fn new(delta: f64, epsilon: f64, omega: f64, g: f64) -> Result<Self> {
        let p = ModelParams {
            delta,
            epsilon,
            omega,
            g,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters in units of `omega = 1`.
    pub fn normalized(delta_ratio: f64, epsilon_ratio: f64, g_ratio: f64) -> Result<Self> {
        ModelParams::new(delta_ratio, epsilon_ratio, 1.0, g_ratio)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.delta, self.epsilon, self.omega, self.g];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("all frequencies must be finite"));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParams("omega must be positive"));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParams("g must be non-negative"));
        }
        if self.delta < 0.0 {
            return Err(Error::InvalidParams("delta must be non-negative"));
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        ModelParams { epsilon, ..*self }
    }

    pub fn g_ratio(&self) -> f64 {
        self.g / self.omega
    }

    pub fn delta_ratio(&self) -> f64 {
        self.delta / self.omega
    }

    /// First cutoff tried by [`converged_eigensystem`]. The displaced-state
    /// photon population grows like `(g/omega)^2`.
    pub fn starting_cutoff(&self) -> usize {
        let r = self.g_ratio();
        let guess = (8.0 * r * r + 8.0).ceil() as usize;
        guess.max(16)
    }
}

/// Fock-space truncation and convergence control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Minimum photon cutoff (inclusive) to start from.
    pub n_fock: usize,
    /// Allowed change of each monitored energy when the cutoff grows by 50%.
    pub energy_tol: f64,
    pub n_levels_checked: usize,
    pub max_cutoff: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            n_fock: 8,
            energy_tol: 1e-9,
            n_levels_checked: 8,
            max_cutoff: 2048,
        }
    }
}

impl TruncationConfig {
    pub fn with_tol(energy_tol: f64) -> Self {
        TruncationConfig {
            energy_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.energy_tol > 0.0) {
            return Err(Error::InvalidConfig("energy_tol must be positive"));
        }
        if self.n_levels_checked == 0 {
            return Err(Error::InvalidConfig("n_levels_checked must be at least 1"));
        }
        if self.n_fock < self.n_levels_checked {
            return Err(Error::InvalidConfig("n_fock must be >= n_levels_checked"));
        }
        if self.max_cutoff < self.n_fock {
            return Err(Error::InvalidConfig("max_cutoff must be >= n_fock"));
        }
        Ok(())
    }

    fn start_for(&self, params: &ModelParams) -> usize {
        params.starting_cutoff().max(self.n_fock)
    }
}

/// Ascending energies with orthonormal eigenvectors in the `k = 2n + s` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    energies: Vec<f64>,
    vectors: Vec<f64>,
    params: ModelParams,
    n_fock: usize,
}

impl EigenSystem {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn vector(&self, level: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[level * n..(level + 1) * n]
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level >= self.dim() {
            return Err(Error::LevelOutOfRange {
                level,
                dimension: self.dim(),
            });
        }
        Ok(())
    }

    /// `E_j - E_i` for `i < j`.
    pub fn transition_frequency(&self, i: usize, j: usize) -> Result<f64> {
        transition_check(i, j)?;
        self.check_level(j)?;
        Ok(self.energies[j] - self.energies[i])
    }

    /// `|<j|(a + a^dag)|i>|`.
    pub fn drive_matrix_element(&self, i: usize, j: usize) -> Result<f64> {
        self.check_level(i)?;
        self.check_level(j)?;
        let xi = apply_position(self.vector(i));
        Ok(dot(self.vector(j), &xi).abs())
    }

    /// `<psi|P|psi>` with `P = sx (x) (-1)^{a^dag a}`.
    pub fn parity_expectation(&self, level: usize) -> Result<f64> {
        self.check_level(level)?;
        let v = self.vector(level);
        Ok(dot(v, &apply_parity(v)))
    }
}

fn transition_check(i: usize, j: usize) -> Result<()> {
    if i >= j {
        return Err(Error::LevelOrder { i, j });
    }
    Ok(())
}

/// `E_j - E_i` for `i < j`.
pub fn transition_frequency(eig: &EigenSystem, i: usize, j: usize) -> Result<f64> {
    eig.transition_frequency(i, j)
}

/// `|<j|(a + a^dag)|i>|` in the truncated basis.
pub fn drive_matrix_element(eig: &EigenSystem, i: usize, j: usize) -> Result<f64> {
    eig.drive_matrix_element(i, j)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn sz(s: usize) -> f64 {
    if s == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(a + a^dag) v` in the `k = 2n + s` basis, truncation respected.
pub fn apply_position(v: &[f64]) -> Vec<f64> {
    let levels = v.len() / 2;
    let mut out = vec![0.0; v.len()];
    for n in 0..levels {
        for s in 0..2 {
            let c = v[2 * n + s];
            if c == 0.0 {
                continue;
            }
            if n > 0 {
                out[2 * (n - 1) + s] += (n as f64).sqrt() * c;
            }
            if n + 1 < levels {
                out[2 * (n + 1) + s] += ((n + 1) as f64).sqrt() * c;
            }
        }
    }
    out
}

/// `P v` with `P|n, s> = (-1)^n |n, 1 - s>`.
pub fn apply_parity(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (n, pair) in v.chunks_exact(2).enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        out[2 * n] = sign * pair[1];
        out[2 * n + 1] = sign * pair[0];
    }
    out
}

/// Dense Hamiltonian of dimension `2 (n_fock + 1)`.
pub fn build_hamiltonian(params: &ModelParams, n_fock: usize) -> Result<SymMatrix> {
    params.validate()?;
    if n_fock == 0 {
        return Err(Error::CutoffTooSmall(n_fock));
    }
    let dim = 2 * (n_fock + 1);
    let mut h = SymMatrix::zeros(dim);
    for n in 0..=n_fock {
        for s in 0..2 {
            let k = 2 * n + s;
            h.set(k, k, params.omega * n as f64 - 0.5 * params.epsilon * sz(s));
            if n < n_fock {
                let coupling = params.g * sz(s) * ((n + 1) as f64).sqrt();
                h.set_sym(k, k + 2, coupling);
            }
        }
        h.set_sym(2 * n, 2 * n + 1, -0.5 * params.delta);
    }
    Ok(h)
}

/// Relative energy window inside which eigenvalues count as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;

/// Full diagonalization at a fixed cutoff.
///
/// Exactly degenerate clusters are rotated onto parity eigenstates and
/// ordered with positive parity first, so level labels are reproducible.
pub fn diagonalize(params: &ModelParams, n_fock: usize) -> Result<EigenSystem> {
    let h = build_hamiltonian(params, n_fock)?;
    let dec = eigen::diagonalize(&h)?;
    let dim = dec.dim();
    let mut energies = dec.values;
    let mut vectors = dec.vectors;

    let scale = h.norm_inf().max(1.0);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && energies[end] - energies[start] <= DEGENERACY_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            resolve_cluster(&mut energies, &mut vectors, dim, start, end)?;
        }
        start = end;
    }

    Ok(EigenSystem {
        energies,
        vectors,
        params: *params,
        n_fock,
    })
}

fn resolve_cluster(
    energies: &mut [f64],
    vectors: &mut [f64],
    dim: usize,
    start: usize,
    end: usize,
) -> Result<()> {
    let m = end - start;
    let cols: Vec<&[f64]> = (start..end)
        .map(|k| &vectors[k * dim..(k + 1) * dim])
        .collect();
    let pcols: Vec<Vec<f64>> = cols.iter().map(|c| apply_parity(c)).collect();
    let mut proj = SymMatrix::zeros(m);
    for a in 0..m {
        for b in a..m {
            let val = 0.5 * (dot(cols[a], &pcols[b]) + dot(cols[b], &pcols[a]));
            proj.set_sym(a, b, val);
        }
    }
    let rot = eigen::diagonalize(&proj)?;
    // Descending parity: positive parity first.
    let mut rotated = vec![0.0; m * dim];
    for (slot, r) in (0..m).rev().enumerate() {
        let coeffs = rot.vector(r);
        let out = &mut rotated[slot * dim..(slot + 1) * dim];
        for (c, col) in coeffs.iter().zip(&cols) {
            for (o, x) in out.iter_mut().zip(col.iter()) {
                *o += c * x;
            }
        }
    }
    vectors[start * dim..end * dim].copy_from_slice(&rotated);
    let mean = energies[start..end].iter().sum::<f64>() / m as f64;
    for e in &mut energies[start..end] {
        *e = mean;
    }
    Ok(())
}

/// Eigenvalues only at a fixed cutoff.
pub fn energies(params: &ModelParams, n_fock: usize) -> Result<Vec<f64>> {
    eigen::eigenvalues(&build_hamiltonian(params, n_fock)?)
}

fn moved_less_than(a: &[f64], b: &[f64], count: usize, tol: f64) -> bool {
    a.iter()
        .zip(b)
        .take(count)
        .all(|(x, y)| (x - y).abs() < tol)
}

fn grown(n: usize) -> usize {
    (3 * n).div_ceil(2)
}

/// Smallest cutoff on the 1.5x schedule where the lowest monitored energies
/// move by less than `energy_tol` when the cutoff grows by 50%.
pub fn converged_cutoff(params: &ModelParams, trunc: &TruncationConfig) -> Result<usize> {
    converged_energies(params, trunc).map(|(n, _)| n)
}

/// Converged cutoff together with the energies at that cutoff.
pub fn converged_energies(
    params: &ModelParams,
    trunc: &TruncationConfig,
) -> Result<(usize, Vec<f64>)> {
    params.validate()?;
    trunc.validate()?;
    let count = trunc.n_levels_checked;
    let mut n = trunc.start_for(params);
    let mut current = energies(params, n)?;
    loop {
        let next_n = grown(n);
        if next_n > trunc.max_cutoff {
            return Err(not_converged(trunc, &current, count, n, params));
        }
        let next = energies(params, next_n)?;
        if moved_less_than(&current, &next, count, trunc.energy_tol) {
            return Ok((n, current));
        }
        n = next_n;
        current = next;
    }
}

fn not_converged(
    trunc: &TruncationConfig,
    current: &[f64],
    count: usize,
    n: usize,
    params: &ModelParams,
) -> Error {
    let previous = energies(params, (2 * n / 3).max(1))
        .map(|mut e| {
            e.truncate(count);
            e
        })
        .unwrap_or_default();
    Error::NotConverged {
        max_cutoff: trunc.max_cutoff,
        previous,
        last: current.iter().copied().take(count).collect(),
    }
}

/// Eigensystem at the smallest converged cutoff (see [`converged_energies`]).
pub fn converged_eigensystem(params: &ModelParams, trunc: &TruncationConfig) -> Result<EigenSystem> {
    let (n, _) = converged_energies(params, trunc)?;
    diagonalize(params, n)
}

/// Energies of the two parity sectors at `epsilon = 0`.
///
/// In the `sx` eigenbasis each parity sector is a tridiagonal chain over
/// photon number: site `n` carries `sx = p (-1)^n` and neighbouring sites
/// are coupled by `g sqrt(n + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParitySectors {
    /// Parity `+1` energies, ascending.
    pub even: Vec<f64>,
    /// Parity `-1` energies, ascending.
    pub odd: Vec<f64>,
    pub n_fock: usize,
}

impl ParitySectors {
    /// Signed splitting of the `n`-th doublet, `(-1)^n (odd_n - even_n)`.
    ///
    /// Positive at `g = 0` for every `n`; it changes sign where the doublet
    /// levels cross.
    pub fn signed_splitting(&self, n: usize) -> f64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign * (self.odd[n] - self.even[n])
    }

    /// All energies merged in ascending order.
    pub fn merged(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.even.iter().chain(&self.odd).copied().collect();
        all.sort_by(f64::total_cmp);
        all
    }
}

pub fn parity_sectors(params: &ModelParams, n_fock: usize) -> Result<ParitySectors> {
    params.validate()?;
    if params.epsilon != 0.0 {
        return Err(Error::NonZeroBias(params.epsilon));
    }
    if n_fock == 0 {
        return Err(Error::CutoffTooSmall(n_fock));
    }
    let sector = |p: f64| -> Result<Vec<f64>> {
        let diag: Vec<f64> = (0..=n_fock)
            .map(|n| {
                let sx = if n % 2 == 0 { p } else { -p };
                params.omega * n as f64 - 0.5 * params.delta * sx
            })
            .collect();
        let off: Vec<f64> = (0..n_fock)
            .map(|n| params.g * ((n + 1) as f64).sqrt())
            .collect();
        eigen::tridiagonal_eigenvalues(&diag, &off)
    };
    Ok(ParitySectors {
        even: sector(1.0)?,
        odd: sector(-1.0)?,
        n_fock,
    })
}

/// Parity sectors at the smallest converged cutoff; the monitored levels are
/// the lowest `n_levels_checked` of each sector.
pub fn converged_parity_sectors(
    params: &ModelParams,
    trunc: &TruncationConfig,
) -> Result<ParitySectors> {
    trunc.validate()?;
    let count = trunc.n_levels_checked;
    let mut n = trunc.start_for(params);
    let mut current = parity_sectors(params, n)?;
    loop {
        let next_n = grown(n);
        if next_n > trunc.max_cutoff {
            return Err(Error::NotConverged {
                max_cutoff: trunc.max_cutoff,
                previous: Vec::new(),
                last: current.merged().into_iter().take(count).collect(),
            });
        }
        let next = parity_sectors(params, next_n)?;
        if moved_less_than(&current.even, &next.even, count, trunc.energy_tol)
            && moved_less_than(&current.odd, &next.odd, count, trunc.energy_tol)
        {
            return Ok(current);
        }
        n = next_n;
        current = next;
    }
}
