use proptest::prelude::*;
use rabi_core::fit::{
    self, Bias, FitOptions, FittedParams, FluxCalibration, ResonanceObservation,
};
use rabi_core::ModelParams;

const TRANSITIONS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 3)];

fn synthetic(truth: &FittedParams, biases: &[Bias], cal: Option<&FluxCalibration>) -> Vec<ResonanceObservation> {
    let mut obs: Vec<_> = biases
        .iter()
        .flat_map(|&b| TRANSITIONS.map(|(i, j)| ResonanceObservation::new(b, i, j, 1.0)))
        .collect();
    let freq = fit::predict(truth, &obs, cal, &FitOptions::default().trunc).unwrap();
    for (o, f) in obs.iter_mut().zip(freq) {
        o.frequency = f;
    }
    obs
}

fn eps_biases(omega: f64, n: usize) -> Vec<Bias> {
    (0..n)
        .map(|k| Bias::Epsilon(omega * (-0.5 + 2.5 * k as f64 / (n - 1) as f64)))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn noiseless_round_trip() {
    let truth = FittedParams { delta: 1.85, omega: 6.275, g: 4.44 };
    let obs = synthetic(&truth, &eps_biases(truth.omega, 10), None);
    let guess = ModelParams::new(1.7, 0.0, 6.4, 4.2).unwrap();
    let r = fit::fit_parameters(&obs, &guess, None, &FitOptions::default()).unwrap();
    assert!(r.converged);
    assert!(r.residual_rms < 1e-6, "{}", r.residual_rms);
    assert!(rel(r.params.delta, truth.delta) < 1e-3);
    assert!(rel(r.params.omega, truth.omega) < 1e-3);
    assert!(rel(r.params.g, truth.g) < 1e-3);
    assert_eq!(r.residuals.len(), obs.len());
}

#[test]
fn reordering_and_weight_scaling() {
    let truth = FittedParams { delta: 2.08, omega: 6.305, g: 4.08 };
    let mut obs = synthetic(&truth, &eps_biases(truth.omega, 6), None);
    // Perturb so the optimum is not an exact zero of the objective.
    for (k, o) in obs.iter_mut().enumerate() {
        o.frequency += 1e-3 * ((k * 7 % 5) as f64 - 2.0);
        o.weight = 1.0 + (k % 3) as f64;
    }
    let guess = ModelParams::new(2.2, 0.0, 6.2, 4.0).unwrap();
    let opts = FitOptions::default();
    let base = fit::fit_parameters(&obs, &guess, None, &opts).unwrap();

    let mut reversed = obs.clone();
    reversed.reverse();
    let r = fit::fit_parameters(&reversed, &guess, None, &opts).unwrap();
    assert_eq!(r.params, base.params);
    let mut back = r.residuals.clone();
    back.reverse();
    assert_eq!(back, base.residuals);

    let scaled: Vec<_> = obs
        .iter()
        .map(|o| ResonanceObservation { weight: 3.0 * o.weight, ..*o })
        .collect();
    let s = fit::fit_parameters(&scaled, &guess, None, &opts).unwrap();
    assert!(rel(s.params.delta, base.params.delta) < 1e-8);
    assert!(rel(s.params.omega, base.params.omega) < 1e-8);
    assert!(rel(s.params.g, base.params.g) < 1e-8);
}

#[test]
fn flux_biased_observations() {
    let truth = FittedParams { delta: 1.31, omega: 6.203, g: 5.31 };
    let cal = FluxCalibration::new(0.3, 20.0, None).unwrap();
    let biases: Vec<Bias> = (0..8).map(|k| Bias::NPhi(1.5 + 0.002 * k as f64)).collect();
    let obs = synthetic(&truth, &biases, Some(&cal));
    let guess = ModelParams::new(1.4, 0.0, 6.0, 5.5).unwrap();
    let r = fit::fit_parameters(&obs, &guess, Some(&cal), &FitOptions::default()).unwrap();
    assert!(rel(r.params.g, truth.g) < 1e-3);
    assert!(rel(r.params.delta, truth.delta) < 1e-3);
}

#[test]
fn iteration_cap_reports_best_point() {
    let truth = FittedParams { delta: 2.08, omega: 6.305, g: 4.08 };
    let obs = synthetic(&truth, &eps_biases(truth.omega, 5), None);
    let guess = ModelParams::new(1.5, 0.0, 6.0, 3.5).unwrap();
    let opts = FitOptions { max_iterations: 5, restart: false, ..Default::default() };
    let r = fit::fit_parameters(&obs, &guess, None, &opts).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 5);
    assert!(r.residual_rms.is_finite());
}

proptest! {
    #[test]
    fn flux_map_odd_around_half_integers(k in -3i32..3, d in -0.49..0.49f64, ip in 0.1..2.0f64) {
        let cal = FluxCalibration::new(ip, 1.0, None).unwrap();
        let n0 = k as f64 + 0.5;
        let a = cal.epsilon(n0 + d);
        let b = cal.epsilon(n0 - d);
        prop_assert!((a + b).abs() < 1e-12);
        prop_assert!((a - 2.0 * ip * d).abs() < 1e-12);
    }
}
