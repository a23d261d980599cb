//! Built-in invariant suite behind `rabi-spec verify`.

use std::fmt::Write as _;

use rabi_core::analytic::{self, assoc_laguerre, displaced_fock_overlap};
use rabi_core::model::{self, ModelParams, TruncationConfig};
use rabi_core::regimes::{self, TABLE_CELLS};
use rabi_core::response::{self, BiasSweep, ProbeConfig, ThermalConfig};

/// Reference values the suite compares against; replaceable so that a
/// corrupted constant can be shown to fail.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReference {
    /// `delta -> 0` boundaries `b1..b4`.
    pub small_gap_boundaries: [f64; 4],
    pub small_gap_tol: f64,
    /// `(b2, b3)` at `delta/omega = 0.6`.
    pub finite_gap_boundaries: (f64, f64),
    pub finite_gap_tol: f64,
}

impl Default for VerifyReference {
    fn default() -> Self {
        let s2 = std::f64::consts::SQRT_2;
        VerifyReference {
            small_gap_boundaries: [
                (2.0 - s2).sqrt() / 2.0,
                0.5,
                std::f64::consts::FRAC_1_SQRT_2,
                (2.0 + s2).sqrt() / 2.0,
            ],
            small_gap_tol: 1e-3,
            finite_gap_boundaries: (0.477, 0.694),
            finite_gap_tol: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Gating invariants.
    pub checks: Vec<Check>,
    /// Comparison with tabulated reference patterns; reported only.
    pub table_matches: usize,
    pub table_total: usize,
    pub table_mismatches: Vec<f64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<30} {}", c.name, c.detail);
        }
        let mismatches: Vec<String> = self.table_mismatches.iter().map(|g| format!("{g:.1}")).collect();
        let _ = writeln!(
            out,
            "INFO  {:<30} {}/{} g/omega values in their reference cell; differing: [{}]",
            "higher-level table",
            self.table_matches,
            self.table_total,
            mismatches.join(", ")
        );
        let _ = writeln!(
            out,
            "{}",
            if self.passed() { "all checks passed" } else { "some checks FAILED" }
        );
        out
    }
}

fn check(name: &'static str, worst: Result<f64, String>, tol: f64) -> Check {
    match worst {
        Ok(w) => Check {
            name,
            passed: w < tol,
            detail: format!("max deviation {w:.2e} (tol {tol:.0e})"),
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: e,
        },
    }
}

fn selection_rules() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (g, allowed, forbidden) in [
        (0.3, [(0, 2), (1, 3)], [(0, 3), (1, 2)]),
        (0.6, [(0, 3), (1, 2)], [(0, 2), (1, 3)]),
    ] {
        let p = ModelParams::normalized(0.1, 0.0, g).map_err(|e| e.to_string())?;
        let eig = model::converged_eigensystem(&p, &TruncationConfig::with_tol(1e-12)).map_err(|e| e.to_string())?;
        for (i, j) in allowed {
            let m = eig.drive_matrix_element(i, j).map_err(|e| e.to_string())?;
            if m <= 1e-3 {
                return Err(format!("g={g}: <{j}|x|{i}> = {m:.2e} should be allowed"));
            }
        }
        for (i, j) in forbidden {
            worst = worst.max(eig.drive_matrix_element(i, j).map_err(|e| e.to_string())?);
        }
        for k in 0..6 {
            let par = eig.parity_expectation(k).map_err(|e| e.to_string())?;
            worst = worst.max((par.abs() - 1.0).abs());
        }
    }
    Ok(worst)
}

fn laguerre_recurrence() -> f64 {
    let mut worst = 0.0f64;
    for m in 0..4 {
        for n in 1..20 {
            for k in 0..=40 {
                let x = 0.25 * k as f64;
                let (nf, mf) = (n as f64, m as f64);
                // (n+1) L_{n+1} = (2n+1+m-x) L_n - (n+m) L_{n-1}
                let lhs = (nf + 1.0) * assoc_laguerre(n + 1, m, x);
                let rhs = (2.0 * nf + 1.0 + mf - x) * assoc_laguerre(n, m, x) - (nf + mf) * assoc_laguerre(n - 1, m, x);
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
    }
    worst
}

fn displacement_unitarity() -> f64 {
    let mut worst = 0.0f64;
    for alpha in [0.3, 0.8, 1.5, -2.0] {
        let cutoff = (4.0 * alpha * alpha) as usize + 40;
        for n in 0..6 {
            for k in n..6 {
                let s: f64 = (0..=cutoff)
                    .map(|m| displaced_fock_overlap(alpha, m, n) * displaced_fock_overlap(alpha, m, k))
                    .sum();
                worst = worst.max((s - if n == k { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    worst
}

fn grid_symmetry() -> Result<f64, String> {
    let template = ModelParams::normalized(0.1, 0.0, 0.45).map_err(|e| e.to_string())?;
    let sweep = BiasSweep::new(template, response::linspace(-2.0, 2.0, 21)).map_err(|e| e.to_string())?;
    let grid = crate::parallel::transmission_grid(
        &sweep,
        &ProbeConfig::default(),
        &ThermalConfig::default(),
        &response::default_probe_axis(1.0),
        &TruncationConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let n = grid.epsilon_axis.len();
    let mut worst = 0.0f64;
    for a in 0..n {
        for (x, y) in grid.column(a).iter().zip(grid.column(n - 1 - a)) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

fn orthonormality() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (d, e, g) in [(0.1, 0.0, 0.5), (0.6, 0.8, 1.0), (0.0, 0.0, 0.7)] {
        let p = ModelParams::normalized(d, e, g).map_err(|e| e.to_string())?;
        let eig = model::diagonalize(&p, 40).map_err(|e| e.to_string())?;
        for i in 0..eig.dim() {
            for j in i..eig.dim() {
                let dot: f64 = eig.vector(i).iter().zip(eig.vector(j)).map(|(a, b)| a * b).sum();
                worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    Ok(worst)
}

fn boundaries(reference: &VerifyReference) -> (Result<f64, String>, Result<f64, String>) {
    let small = analytic::regime_boundaries(0.001).map_err(|e| e.to_string()).map(|b| {
        b.values()
            .iter()
            .zip(reference.small_gap_boundaries)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    });
    let (r2, r3) = reference.finite_gap_boundaries;
    let finite = analytic::regime_boundaries(0.6)
        .map_err(|e| e.to_string())
        .map(|b| (b.b2 - r2).abs().max((b.b3 - r3).abs()));
    (small, finite)
}

pub fn run(reference: &VerifyReference) -> Report {
    let (small, finite) = boundaries(reference);
    let checks = vec![
        check("parity selection rules", selection_rules(), 1e-10),
        check("laguerre recurrence", Ok(laguerre_recurrence()), 1e-10),
        check("displacement unitarity", Ok(displacement_unitarity()), 1e-8),
        check("grid bias symmetry", grid_symmetry(), 1e-8),
        check("eigenvector orthonormality", orthonormality(), 1e-10),
        check("boundaries, delta/omega=0.001", small, reference.small_gap_tol),
        check("boundaries, delta/omega=0.6", finite, reference.finite_gap_tol),
    ];

    let mut table_matches = 0;
    let mut table_total = 0;
    let mut table_mismatches = Vec::new();
    for (pattern, gs) in TABLE_CELLS {
        for &g in gs {
            table_total += 1;
            let found = ModelParams::normalized(0.1, 0.0, g)
                .and_then(|p| regimes::classify_high(&p))
                .ok();
            if found == Some(pattern) {
                table_matches += 1;
            } else {
                table_mismatches.push(g);
            }
        }
    }
    table_mismatches.sort_by(f64::total_cmp);
    Report {
        checks,
        table_matches,
        table_total,
        table_mismatches,
    }
}
