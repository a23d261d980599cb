use rabi_core::model::{self, ModelParams, TruncationConfig};
use rabi_core::response::{self, BiasSweep, LineList, ProbeConfig, ThermalConfig};

fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len() - 1)
        .filter(|&k| values[k] < values[k - 1] && values[k] <= values[k + 1])
        .collect()
}

#[test]
fn grid_point_equals_scalar_reflection() {
    let template = ModelParams::normalized(0.1, 0.0, 0.45).unwrap();
    let sweep = BiasSweep::new(template, vec![-0.3, 0.2, 1.1]).unwrap();
    let probe_axis = response::linspace(0.85, 1.15, 31);
    let (probe, thermal, trunc) = (ProbeConfig::default(), ThermalConfig::default(), TruncationConfig::default());
    let grid = response::transmission_grid(&sweep, &probe, &thermal, &probe_axis, &trunc).unwrap();
    let eig = model::converged_eigensystem(&template.with_epsilon(0.2), &response::response_truncation(&trunc, &thermal)).unwrap();
    let r = response::reflection(&eig, &probe, &thermal, probe_axis[17]).unwrap();
    assert_eq!(grid.get(1, 17), 1.0 - r);
}

#[test]
fn dips_straddle_bare_frequency_at_moderate_coupling() {
    let p = ModelParams::normalized(0.1, 0.0, 0.3).unwrap();
    let trunc = TruncationConfig::default();
    let thermal = ThermalConfig::default();
    let eig = model::converged_eigensystem(&p, &response::response_truncation(&trunc, &thermal)).unwrap();
    let probe = ProbeConfig { amplitude: 2e-3, gamma: 3e-3, r0: 1.0 };
    let axis = response::linspace(0.9, 1.1, 2001);
    let lines = LineList::new(&eig, &probe, &thermal).unwrap();
    let t: Vec<f64> = axis.iter().map(|&w| 1.0 - lines.reflection(w)).collect();
    let w02 = eig.transition_frequency(0, 2).unwrap();
    let w13 = eig.transition_frequency(1, 3).unwrap();
    assert!(w13 < 1.0 && w02 > 1.0);
    let minima: Vec<f64> = local_minima(&t).into_iter().map(|k| axis[k]).collect();
    for target in [w02, w13] {
        assert!(minima.iter().any(|m| (m - target).abs() < probe.gamma / 3.0), "{target} not in {minima:?}");
    }
}

#[test]
fn zero_two_line_has_v_shape_above_half() {
    // Minimum of the 0 -> 2 trace sits at the symmetry point.
    let template = ModelParams::normalized(0.1, 0.0, 0.8).unwrap();
    let sweep = BiasSweep::new(template, response::linspace(-0.2, 0.2, 21)).unwrap();
    let lines = response::transition_lines(&sweep, &[(0, 2)], &TruncationConfig::default()).unwrap();
    let freq: Vec<f64> = lines[0].points.iter().map(|p| p.frequency).collect();
    let argmin = (0..freq.len()).min_by(|&a, &b| freq[a].total_cmp(&freq[b])).unwrap();
    assert_eq!(argmin, 10);
    assert!(lines[0].points[10].matrix_element < 1e-10);
    assert!(lines[0].points[0].matrix_element > 1e-3);
}

#[test]
fn population_floor_bound() {
    let template = ModelParams::normalized(0.1, 0.0, 0.6).unwrap();
    let sweep = BiasSweep::new(template, vec![0.0, 0.5]).unwrap();
    let axis = response::default_probe_axis(1.0);
    let probe = ProbeConfig::default();
    let trunc = TruncationConfig::default();
    let floor = 1e-3;
    let kept = ThermalConfig { kt: 0.5, max_levels: 8, population_floor: 0.0 };
    let dropped = ThermalConfig { population_floor: floor, ..kept };
    let a = response::transmission_grid(&sweep, &probe, &kept, &axis, &trunc).unwrap();
    let b = response::transmission_grid(&sweep, &probe, &dropped, &axis, &trunc).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() <= 10.0 * floor * probe.r0);
    }
}

#[test]
fn transition_lines_follow_sweep() {
    let template = ModelParams::normalized(0.2, 0.0, 0.4).unwrap();
    let sweep = BiasSweep::new(template, response::linspace(-1.0, 1.0, 5)).unwrap();
    let lines = response::transition_lines(&sweep, &[(0, 1), (1, 3)], &TruncationConfig::default()).unwrap();
    assert_eq!(lines.len(), 2);
    assert_eq!((lines[1].from_level, lines[1].to_level), (1, 3));
    for (k, pt) in lines[0].points.iter().enumerate() {
        assert_eq!(pt.epsilon, sweep.epsilon_axis[k]);
        assert!(pt.frequency > 0.0);
    }
    assert!(response::transition_lines(&sweep, &[(2, 1)], &TruncationConfig::default()).is_err());
}

#[test]
fn rejects_bad_axes() {
    let template = ModelParams::normalized(0.2, 0.0, 0.4).unwrap();
    assert!(BiasSweep::new(template, vec![]).is_err());
    assert!(BiasSweep::new(template, vec![1.0, f64::NAN]).is_err());
    let sweep = BiasSweep::new(template, vec![0.0]).unwrap();
    let r = response::transmission_grid(
        &sweep,
        &ProbeConfig::default(),
        &ThermalConfig::default(),
        &[1.0, 0.9],
        &TruncationConfig::default(),
    );
    assert!(r.is_err());
}
