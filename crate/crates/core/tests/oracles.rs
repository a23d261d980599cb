use nalgebra::{DMatrix, SymmetricEigen};
use rabi_core::analytic::{self, build_cat_states, displaced_fock_overlap};
use rabi_core::eigen;
use rabi_core::model::{self, ModelParams, TruncationConfig};

fn to_nalgebra(h: &eigen::SymMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(h.dim(), h.dim(), h.as_slice())
}

#[test]
fn eigensolver_matches_nalgebra() {
    for &(delta, eps, g, n) in &[
        (0.1, 0.0, 0.3, 20),
        (0.4, 0.7, 0.9, 40),
        (2.0, -1.3, 1.6, 60),
        (0.0, 0.0, 0.5, 30),
    ] {
        let p = ModelParams::normalized(delta, eps, g).unwrap();
        let h = model::build_hamiltonian(&p, n).unwrap();
        let ours = eigen::diagonalize(&h).unwrap();
        let theirs = SymmetricEigen::new(to_nalgebra(&h));
        let mut reference: Vec<f64> = theirs.eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        let scale = h.norm_inf();
        for (a, b) in ours.values.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-11 * scale, "{a} vs {b}");
        }
        let fast = eigen::eigenvalues(&h).unwrap();
        for (a, b) in fast.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-11 * scale);
        }
        // Residual of each of our eigenpairs.
        for k in 0..h.dim() {
            let v = ours.vector(k);
            let hv = h.mul_vec(v);
            let r: f64 = hv.iter().zip(v).map(|(x, y)| (x - ours.values[k] * y).powi(2)).sum();
            assert!(r.sqrt() < 1e-10 * scale);
        }
    }
}

#[test]
fn uncoupled_closed_form() {
    let (delta, eps) = (0.35, 0.6);
    let p = ModelParams::normalized(delta, eps, 0.0).unwrap();
    let e = model::energies(&p, 10).unwrap();
    let half = 0.5 * (delta * delta + eps * eps).sqrt();
    let mut expect: Vec<f64> = (0..=10)
        .flat_map(|n| [n as f64 - half, n as f64 + half])
        .collect();
    expect.sort_by(f64::total_cmp);
    for (a, b) in e.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn displaced_oscillator_without_gap() {
    // delta = 0: each sz branch is a displaced oscillator at n - r^2.
    let r = 0.8;
    let p = ModelParams::normalized(0.0, 0.3, r).unwrap();
    let (_, e) = model::converged_energies(&p, &TruncationConfig::with_tol(1e-12)).unwrap();
    for n in 0..4 {
        let base = n as f64 - r * r;
        let pair = [base - 0.15, base + 0.15];
        assert!((e[2 * n] - pair[0]).abs() < 1e-9, "{n}: {}", e[2 * n]);
        assert!((e[2 * n + 1] - pair[1]).abs() < 1e-9);
    }
}

#[test]
fn high_cutoff_agreement() {
    for &(delta, eps, g) in &[(0.1, 0.0, 1.5), (0.6, 1.0, 0.8), (0.1, 0.5, 2.0)] {
        let p = ModelParams::normalized(delta, eps, g).unwrap();
        let (_, conv) = model::converged_energies(&p, &TruncationConfig::with_tol(1e-10)).unwrap();
        let big = model::energies(&p, 240).unwrap();
        for k in 0..8 {
            assert!((conv[k] - big[k]).abs() < 1e-8, "{k}: {} vs {}", conv[k], big[k]);
        }
    }
}

/// `exp(A)` by scaling and squaring with a Taylor series.
fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max) * a.nrows() as f64;
    let s = (norm.max(1.0).log2().ceil() as i32 + 1).max(0);
    let scaled = a / 2f64.powi(s);
    let n = a.nrows();
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn displacement_matches_matrix_exponential() {
    let n = 90;
    for alpha in [0.4, -0.9, 1.2] {
        let mut gen = DMatrix::<f64>::zeros(n, n);
        for k in 0..n - 1 {
            let s = ((k + 1) as f64).sqrt();
            gen[(k + 1, k)] = alpha * s;
            gen[(k, k + 1)] = -alpha * s;
        }
        let d = expm(&gen);
        for m in 0..8 {
            for k in 0..8 {
                let a = displaced_fock_overlap(alpha, m, k);
                assert!((a - d[(m, k)]).abs() < 1e-12, "alpha {alpha} <{m}|D|{k}>: {a} vs {}", d[(m, k)]);
            }
        }
    }
}

#[test]
fn symmetry_point_splitting_small_gap() {
    let delta = 0.01;
    for g in [0.2, 0.35, 0.6, 1.0] {
        let p = ModelParams::normalized(delta, 0.0, g).unwrap();
        let sectors = model::converged_parity_sectors(&p, &TruncationConfig::with_tol(1e-13)).unwrap();
        for n in 0..3 {
            let exact = sectors.signed_splitting(n).abs();
            let approx = analytic::symmetry_point_splitting(n, &p).unwrap();
            assert!((exact - approx).abs() < 2e-3 * delta, "g {g} n {n}: {exact} vs {approx}");
        }
    }
}

#[test]
fn resonant_doublet_has_full_gap_prefactor() {
    let delta = 0.01;
    let trunc = TruncationConfig::with_tol(1e-13);
    for g in [0.15, 0.3, 0.7] {
        let p = ModelParams::normalized(delta, 1.0, g).unwrap();
        let eps = analytic::resonance_bias(&p, &trunc).unwrap();
        let (_, e) = model::converged_energies(&p.with_epsilon(eps), &trunc).unwrap();
        let exact = e[2] - e[1];
        let approx = analytic::resonant_doublet_splitting(0, &p).unwrap();
        assert!((exact / approx - 1.0).abs() < 0.02, "g {g}: {exact} vs {approx}");
    }
}

#[test]
fn cat_states_match_low_eigenstates() {
    let n_fock = 60;
    let (zero, three) = build_cat_states(0.3, 1.0, n_fock).unwrap();
    assert!(zero.drive_element(&three) < 1e-10);

    let p = ModelParams::normalized(0.01, 0.0, 0.3).unwrap();
    let eig = model::diagonalize(&p, n_fock).unwrap();
    assert!(zero.overlap(eig.vector(0)) > 0.999);
    assert!(three.overlap(eig.vector(3)) > 0.999);

    let (zero, _) = build_cat_states(0.8, 1.0, n_fock).unwrap();
    let p = ModelParams::normalized(0.01, 0.0, 0.8).unwrap();
    let eig = model::diagonalize(&p, n_fock).unwrap();
    assert!(zero.overlap(eig.vector(0)) > 0.999);
}

#[test]
fn small_gap_boundaries_match_closed_form() {
    let b = analytic::regime_boundaries(0.001).unwrap();
    let limit = analytic::BoundarySet::analytic_limit();
    for (x, y) in b.values().iter().zip(limit.values()) {
        assert!((x - y).abs() < 1e-3, "{x} vs {y}");
    }
}
