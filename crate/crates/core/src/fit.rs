//! Least-squares estimation of `(delta, omega, g)` from resonance
//! frequencies, plus the flux-bias calibration helpers.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{self, ModelParams, TruncationConfig};
use crate::{Error, Result};

/// Maps normalized flux to bias: `epsilon = 2 I_p Phi_0 (n_phi - n_phi0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxCalibration {
    pub ip: f64,
    pub flux_quantum: f64,
    /// Pinned symmetry point; `None` picks the half-integer nearest to each
    /// flux value.
    pub n_phi0: Option<f64>,
}

impl FluxCalibration {
    pub fn new(ip: f64, flux_quantum: f64, n_phi0: Option<f64>) -> Result<Self> {
        let cal = FluxCalibration {
            ip,
            flux_quantum,
            n_phi0,
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ip > 0.0) || !self.ip.is_finite() {
            return Err(Error::InvalidConfig("persistent current must be positive"));
        }
        if !(self.flux_quantum > 0.0) || !self.flux_quantum.is_finite() {
            return Err(Error::InvalidConfig("flux quantum must be positive"));
        }
        if let Some(n0) = self.n_phi0 {
            if !n0.is_finite() || (n0 - 0.5).fract() != 0.0 {
                return Err(Error::InvalidConfig("n_phi0 must be a half-integer"));
            }
        }
        Ok(())
    }

    pub fn symmetry_point(&self, n_phi: f64) -> f64 {
        self.n_phi0.unwrap_or_else(|| nearest_half_integer(n_phi))
    }

    pub fn epsilon(&self, n_phi: f64) -> f64 {
        2.0 * self.ip * self.flux_quantum * (n_phi - self.symmetry_point(n_phi))
    }
}

pub fn nearest_half_integer(x: f64) -> f64 {
    (x - 0.5).round() + 0.5
}

pub fn flux_to_epsilon(cal: &FluxCalibration, n_phi: f64) -> f64 {
    cal.epsilon(n_phi)
}

/// Critical current of the two-junction coupler:
/// `4 I_c cos(2 pi n) cos(pi n)` at coupler flux `n`.
pub fn coupler_critical_current(ic: f64, n_phi_c: f64) -> f64 {
    4.0 * ic * (2.0 * PI * n_phi_c).cos() * (PI * n_phi_c).cos()
}

/// Coupler flux for loop-area ratio `r_c` (about 0.05 in practice).
pub fn coupler_flux(r_c: f64, n_phi: f64) -> f64 {
    r_c * n_phi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bias {
    Epsilon(f64),
    NPhi(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceObservation {
    pub bias: Bias,
    pub transition: (usize, usize),
    pub frequency: f64,
    pub weight: f64,
}

impl ResonanceObservation {
    pub fn new(bias: Bias, i: usize, j: usize, frequency: f64) -> Self {
        ResonanceObservation {
            bias,
            transition: (i, j),
            frequency,
            weight: 1.0,
        }
    }
}

/// The fitted parameters; the bias varies per observation and is not part
/// of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedParams {
    pub delta: f64,
    pub omega: f64,
    pub g: f64,
}

impl FittedParams {
    pub fn at_epsilon(&self, epsilon: f64) -> ModelParams {
        ModelParams {
            delta: self.delta,
            epsilon,
            omega: self.omega,
            g: self.g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FittedParams,
    /// `sqrt(sum w r^2 / sum w)`.
    pub residual_rms: f64,
    /// Model minus measured, in input order.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative simplex size at convergence.
    pub xtol: f64,
    /// Initial simplex edge relative to each coordinate.
    pub initial_step: f64,
    pub restart: bool,
    pub seed: u64,
    pub trunc: TruncationConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            xtol: 1e-6,
            initial_step: 0.05,
            restart: true,
            seed: 0,
            trunc: TruncationConfig::with_tol(1e-10),
        }
    }
}

/// Observation with the bias resolved to `epsilon`.
#[derive(Debug, Clone, Copy)]
struct Resolved {
    epsilon: f64,
    i: usize,
    j: usize,
    frequency: f64,
    weight: f64,
    /// Position in the caller's list.
    index: usize,
}

fn canonical(a: &Resolved, b: &Resolved) -> Ordering {
    a.epsilon
        .total_cmp(&b.epsilon)
        .then(a.i.cmp(&b.i))
        .then(a.j.cmp(&b.j))
        .then(a.frequency.total_cmp(&b.frequency))
        .then(a.weight.total_cmp(&b.weight))
}

fn resolve(
    observations: &[ResonanceObservation],
    cal: Option<&FluxCalibration>,
    levels: usize,
) -> Result<Vec<Resolved>> {
    if let Some(cal) = cal {
        cal.validate()?;
    }
    let mut out = Vec::with_capacity(observations.len());
    for (index, obs) in observations.iter().enumerate() {
        let bad = |reason| Error::BadObservation { index, reason };
        let epsilon = match obs.bias {
            Bias::Epsilon(e) => e,
            Bias::NPhi(n) => cal.ok_or(bad("flux bias needs a calibration"))?.epsilon(n),
        };
        let (i, j) = obs.transition;
        if !epsilon.is_finite() {
            return Err(bad("bias is not finite"));
        }
        if i >= j {
            return Err(bad("transition requires i < j"));
        }
        if j >= levels {
            return Err(bad("level index beyond the converged levels"));
        }
        if !(obs.frequency > 0.0) || !obs.frequency.is_finite() {
            return Err(bad("frequency must be positive"));
        }
        if !(obs.weight > 0.0) || !obs.weight.is_finite() {
            return Err(bad("weight must be positive"));
        }
        out.push(Resolved {
            epsilon,
            i,
            j,
            frequency: obs.frequency,
            weight: obs.weight,
            index,
        });
    }
    out.sort_by(canonical);
    Ok(out)
}

/// Model transition frequencies for sorted observations, one
/// diagonalization per distinct bias.
fn model_frequencies(params: &FittedParams, obs: &[Resolved], trunc: &TruncationConfig) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(obs.len());
    let mut current: Option<(f64, Vec<f64>)> = None;
    for o in obs {
        let fresh = !matches!(&current, Some((e, _)) if e.to_bits() == o.epsilon.to_bits());
        if fresh {
            let (_, e) = model::converged_energies(&params.at_epsilon(o.epsilon), trunc)?;
            current = Some((o.epsilon, e));
        }
        let e = &current.as_ref().expect("set above").1;
        out.push(e[o.j] - e[o.i]);
    }
    Ok(out)
}

/// Transition frequencies predicted by `params` for each observation, in
/// input order.
pub fn predict(
    params: &FittedParams,
    observations: &[ResonanceObservation],
    cal: Option<&FluxCalibration>,
    trunc: &TruncationConfig,
) -> Result<Vec<f64>> {
    let obs = resolve(observations, cal, trunc.n_levels_checked)?;
    let freq = model_frequencies(params, &obs, trunc)?;
    let mut out = vec![0.0; obs.len()];
    for (o, f) in obs.iter().zip(freq) {
        out[o.index] = f;
    }
    Ok(out)
}

/// Point and value returned by [`nelder_mead`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Derivative-free Nelder-Mead minimization. `steps[k]` is the initial
/// edge along coordinate `k`; converges when every vertex is within
/// `xtol` (relative to the best point's largest coordinate) of the best.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], max_iterations: usize, xtol: f64) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += steps[k];
        let v = f(&x);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };
    let size = |s: &[(Vec<f64>, f64)]| -> f64 {
        let best = &s[0].0;
        let scale = best.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        s[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
            / scale
    };

    order(&mut simplex);
    let mut iterations = 0;
    while iterations < max_iterations {
        if size(&simplex) < xtol {
            return SimplexResult {
                x: simplex[0].0.clone(),
                value: simplex[0].1,
                iterations,
                converged: true,
            };
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let (worst, f_worst) = simplex[n].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;

        let xr = lerp(&centroid, &worst, -1.0);
        let fr = f(&xr);
        if fr < f_best {
            let xe = lerp(&centroid, &worst, -2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < f_second {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < f_worst {
                let xc = lerp(&centroid, &worst, -0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = lerp(&centroid, &worst, 0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < fr.min(f_worst) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &vertex.0, 0.5);
                    let v = f(&x);
                    *vertex = (x, v);
                }
            }
        }
        order(&mut simplex);
    }
    SimplexResult {
        converged: size(&simplex) < xtol,
        x: simplex[0].0.clone(),
        value: simplex[0].1,
        iterations,
    }
}

fn fold(x: &[f64]) -> FittedParams {
    // The spectrum is even in delta and in g.
    FittedParams {
        delta: x[0].abs(),
        omega: x[1],
        g: x[2].abs(),
    }
}

fn steps_for(x: &[f64], rel: f64) -> Vec<f64> {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.iter()
        .map(|v| if *v != 0.0 { rel * v.abs() } else { rel * scale })
        .collect()
}

/// Restart tolerance relative to [`FitOptions::xtol`].
const POLISH: f64 = 1e-2;

/// Fits `(delta, omega, g)` to the observed transition frequencies. The
/// bias of `initial` is ignored. Non-convergence is reported through
/// `converged = false` with the best point found.
pub fn fit_parameters(
    observations: &[ResonanceObservation],
    initial: &ModelParams,
    cal: Option<&FluxCalibration>,
    opts: &FitOptions,
) -> Result<FitResult> {
    opts.trunc.validate()?;
    initial.validate()?;
    if !(opts.xtol > 0.0) || !(opts.initial_step > 0.0) {
        return Err(Error::InvalidConfig("xtol and initial_step must be positive"));
    }
    if observations.len() < 3 {
        return Err(Error::InsufficientObservations("need at least 3 observations"));
    }
    let obs = resolve(observations, cal, opts.trunc.n_levels_checked)?;
    if obs.windows(2).all(|w| w[0].epsilon == w[1].epsilon) {
        return Err(Error::InsufficientObservations("need at least 2 distinct bias values"));
    }

    let trunc = opts.trunc;
    let objective = |x: &[f64]| -> f64 {
        if !(x[1] > 0.0) || x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        match model_frequencies(&fold(x), &obs, &trunc) {
            Ok(freq) => obs
                .iter()
                .zip(freq)
                .map(|(o, m)| o.weight * (m - o.frequency) * (m - o.frequency))
                .sum(),
            Err(_) => f64::INFINITY,
        }
    };

    let x0 = [initial.delta, initial.omega, initial.g];
    if !objective(&x0).is_finite() {
        // Surface the underlying model error.
        model_frequencies(&fold(&x0), &obs, &trunc)?;
    }
    let mut run = nelder_mead(objective, &x0, &steps_for(&x0, opts.initial_step), opts.max_iterations, opts.xtol);
    let mut iterations = run.iterations;
    if opts.restart {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let start: Vec<f64> = run
            .x
            .iter()
            .map(|v| v * (1.0 + 1e-3 * rng.random_range(-1.0..=1.0)))
            .collect();
        let second = nelder_mead(
            objective,
            &start,
            &steps_for(&start, 0.1 * opts.initial_step),
            opts.max_iterations,
            POLISH * opts.xtol,
        );
        iterations += second.iterations;
        if second.value <= run.value {
            // Reaching the polish tolerance implies the requested one.
            let converged = run.converged || second.converged;
            run = SimplexResult { converged, ..second };
        }
    }

    let params = fold(&run.x);
    let freq = model_frequencies(&params, &obs, &trunc)?;
    let mut residuals = vec![0.0; obs.len()];
    let (mut wsum, mut wr2) = (0.0, 0.0);
    for (o, m) in obs.iter().zip(freq) {
        let r = m - o.frequency;
        residuals[o.index] = r;
        wsum += o.weight;
        wr2 += o.weight * r * r;
    }
    Ok(FitResult {
        params,
        residual_rms: (wr2 / wsum).sqrt(),
        residuals,
        iterations,
        converged: run.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_symmetry_points() {
        let cal = FluxCalibration::new(0.5, 2.0, None).unwrap();
        assert_eq!(cal.epsilon(0.5), 0.0);
        assert_eq!(cal.epsilon(1.5), 0.0);
        assert_eq!(cal.epsilon(-0.5), 0.0);
        assert!((cal.epsilon(0.52) - 2.0 * 0.02).abs() < 1e-12);
        assert!((cal.epsilon(0.49) + 2.0 * 0.01).abs() < 1e-12);
        let pinned = FluxCalibration::new(0.5, 2.0, Some(0.5)).unwrap();
        assert!((pinned.epsilon(1.5) - 2.0).abs() < 1e-12);
        assert!(FluxCalibration::new(0.5, 2.0, Some(1.0)).is_err());
        assert!(FluxCalibration::new(0.0, 2.0, None).is_err());
    }

    #[test]
    fn coupler_current() {
        assert_eq!(coupler_critical_current(1.5, 0.0), 6.0);
        assert!(coupler_critical_current(1.5, 0.25).abs() < 1e-15);
        let n = coupler_flux(0.05, 0.5);
        let expect = 4.0 * (0.05 * PI).cos() * (0.025 * PI).cos();
        assert!((coupler_critical_current(1.0, n) - expect).abs() < 1e-15);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &[0.1, 0.1], 2000, 1e-10);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn nelder_mead_reports_iteration_cap() {
        let f = |x: &[f64]| x[0] * x[0] + x[1] * x[1];
        let r = nelder_mead(f, &[1.0, 1.0], &[0.1, 0.1], 3, 1e-12);
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    fn obs(eps: f64, i: usize, j: usize, f: f64) -> ResonanceObservation {
        ResonanceObservation::new(Bias::Epsilon(eps), i, j, f)
    }

    #[test]
    fn rejects_degenerate_designs() {
        let p = ModelParams::normalized(0.3, 0.0, 0.5).unwrap();
        let o = FitOptions::default();
        let same = [obs(0.2, 0, 1, 1.0), obs(0.2, 0, 2, 1.0), obs(0.2, 1, 3, 1.0)];
        assert!(matches!(
            fit_parameters(&same, &p, None, &o),
            Err(Error::InsufficientObservations(_))
        ));
        assert!(matches!(
            fit_parameters(&same[..2], &p, None, &o),
            Err(Error::InsufficientObservations(_))
        ));
        let bad = [obs(0.1, 0, 1, 1.0), obs(0.2, 0, 9, 1.0), obs(0.3, 1, 3, 1.0)];
        assert_eq!(
            fit_parameters(&bad, &p, None, &o).unwrap_err(),
            Error::BadObservation {
                index: 1,
                reason: "level index beyond the converged levels"
            }
        );
        let flux = [obs(0.1, 0, 1, 1.0), obs(0.2, 0, 1, 1.0), ResonanceObservation::new(Bias::NPhi(0.5), 0, 1, 1.0)];
        assert!(matches!(
            fit_parameters(&flux, &p, None, &o),
            Err(Error::BadObservation { index: 2, .. })
        ));
    }
}
