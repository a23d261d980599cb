//! Closed-form results for the small-gap limit and the regime boundaries.
//!
//! In the small-`delta` limit the low-lying eigenstates are built from
//! displaced Fock states `D(+-alpha)|n>` with `alpha = g/omega`, and the
//! tunnelling between the two displaced branches is controlled by
//! `<m|D(2 alpha)|n>`, i.e. by associated Laguerre polynomials in
//! `4 g^2 / omega^2`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::model::{self, apply_position, dot, ModelParams, TruncationConfig};
use crate::{Error, Result};

/// Associated Laguerre polynomial `L_n^m(x)` by upward recurrence in `n`.
pub fn assoc_laguerre(n: usize, m: usize, x: f64) -> f64 {
    let m = m as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + m - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + m + 1.0 - x) * cur - (k + m) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `<m|D(alpha)|n>` for real `alpha`, with `D(alpha) = exp(alpha (a^dag - a))`.
pub fn displaced_fock_overlap(alpha: f64, m: usize, n: usize) -> f64 {
    let a2 = alpha * alpha;
    let envelope = (-0.5 * a2).exp();
    let (lo, hi, step) = if m >= n {
        (n, m, alpha)
    } else {
        (m, n, -alpha)
    };
    // sqrt(lo!/hi!) * step^(hi - lo), built incrementally to avoid overflow.
    let mut pref = 1.0;
    for k in (lo + 1)..=hi {
        pref *= step / (k as f64).sqrt();
    }
    pref * envelope * assoc_laguerre(lo, hi - lo, a2)
}

/// Sign choice in the `|1> -> |3>` frequency at `epsilon = omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// Minus below `g/omega = 1/sqrt(2)`, plus from there on.
    pub fn for_coupling(g_ratio: f64) -> Self {
        if g_ratio < core::f64::consts::FRAC_1_SQRT_2 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }
}

/// `exp(-2 r^2) (2 r) [1 +- (2 - 4 r^2) / sqrt(2)]` with `r = g/omega`.
///
/// Second term of the `|1> -> |3>` frequency at `epsilon = omega`, without
/// an overall energy prefactor; only its sign structure is meaningful on its
/// own (see [`resonant_doublet_splitting`] for the absolute scale).
pub fn e31_second_term(g: f64, omega: f64, branch: Branch) -> f64 {
    let r = g / omega;
    let bracket_term = (2.0 - 4.0 * r * r) * core::f64::consts::FRAC_1_SQRT_2;
    let bracket = match branch {
        Branch::Plus => 1.0 + bracket_term,
        Branch::Minus => 1.0 - bracket_term,
    };
    (-2.0 * r * r).exp() * 2.0 * r * bracket
}

/// Small-`delta` estimate of `E_{2n+1} - E_{2n}` at `epsilon = 0`:
/// `delta exp(-2 r^2) |L_n(4 r^2)|`.
pub fn symmetry_point_splitting(n: usize, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.epsilon != 0.0 {
        return Err(Error::NonZeroBias(params.epsilon));
    }
    let r = params.g_ratio();
    Ok(params.delta * (-2.0 * r * r).exp() * assoc_laguerre(n, 0, 4.0 * r * r).abs())
}

/// Small-`delta` estimate of the splitting of the `n`-th resonant doublet at
/// `epsilon = omega` (levels `2n + 1` and `2n + 2`):
/// `delta |<n+1|D(2r)|n>| = delta exp(-2 r^2) 2r |L_n^1(4 r^2)| / sqrt(n + 1)`.
pub fn resonant_doublet_splitting(n: usize, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let r = params.g_ratio();
    Ok(params.delta * displaced_fock_overlap(2.0 * r, n + 1, n).abs())
}

/// Qubit branch of a displaced state: `R` is `sz = +1`, `L` is `sz = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitBranch {
    L,
    R,
}

impl QubitBranch {
    fn basis_offset(self) -> usize {
        match self {
            QubitBranch::R => 0,
            QubitBranch::L => 1,
        }
    }
}

/// `|branch> (x) D(displacement)|fock_index>` expanded over bare Fock states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacedState {
    pub qubit_branch: QubitBranch,
    pub displacement: f64,
    pub fock_index: usize,
    pub coefficients: Vec<f64>,
}

impl DisplacedState {
    pub fn new(qubit_branch: QubitBranch, displacement: f64, fock_index: usize, n_fock: usize) -> Self {
        let coefficients = (0..=n_fock)
            .map(|m| displaced_fock_overlap(displacement, m, fock_index))
            .collect();
        DisplacedState {
            qubit_branch,
            displacement,
            fock_index,
            coefficients,
        }
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Two-branch superposition `(c_R |R> D(-alpha)|n> + c_L |L> D(alpha)|n>)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatState {
    pub components: [(f64, DisplacedState); 2],
}

impl CatState {
    /// Coefficients in the model basis `k = 2n + s`.
    pub fn to_basis(&self) -> Vec<f64> {
        let len = self.components[0].1.coefficients.len();
        let mut out = vec![0.0; 2 * len];
        for (weight, state) in &self.components {
            let s = state.qubit_branch.basis_offset();
            for (m, c) in state.coefficients.iter().enumerate() {
                out[2 * m + s] += weight * c;
            }
        }
        out
    }

    /// `|<other|(a + a^dag)|self>|`.
    pub fn drive_element(&self, other: &CatState) -> f64 {
        dot(&other.to_basis(), &apply_position(&self.to_basis())).abs()
    }

    /// `|<self|psi>|` for a model-basis vector of the same cutoff.
    pub fn overlap(&self, psi: &[f64]) -> f64 {
        dot(&self.to_basis(), psi).abs()
    }
}

/// The displaced-state forms of `|0>` and `|3>` valid for small `delta` at
/// `epsilon = 0` and `g/omega < 1/2`, with `alpha = g/omega`.
///
/// Under `sz (a + a^dag)` the `sz = +1` branch is displaced to `-alpha`.
/// Both states have the same parity, so the drive element between them
/// vanishes.
pub fn build_cat_states(g: f64, omega: f64, n_fock: usize) -> Result<(CatState, CatState)> {
    if !(omega > 0.0) || !g.is_finite() {
        return Err(Error::InvalidParams("omega must be positive and g finite"));
    }
    let alpha = g / omega;
    let w = core::f64::consts::FRAC_1_SQRT_2;
    let make = |n: usize, sign: f64| -> Result<CatState> {
        let r = DisplacedState::new(QubitBranch::R, -alpha, n, n_fock);
        let l = DisplacedState::new(QubitBranch::L, alpha, n, n_fock);
        for part in [&r, &l] {
            let norm = part.norm();
            if norm < 1.0 - 1e-8 {
                return Err(Error::TruncatedCoefficients { norm, n_fock });
            }
        }
        Ok(CatState {
            components: [(w, r), (sign * w, l)],
        })
    };
    Ok((make(0, 1.0)?, make(1, -1.0)?))
}

/// How a [`BoundarySet`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMethod {
    AnalyticLimit,
    NumericRoot,
}

/// The four `g/omega` values separating the five coupling regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub delta_ratio: f64,
    pub method: BoundaryMethod,
}

impl BoundarySet {
    /// `delta -> 0` values: `sqrt(2 - sqrt 2)/2, 1/2, 1/sqrt 2, sqrt(2 + sqrt 2)/2`.
    pub fn analytic_limit() -> Self {
        let s2 = core::f64::consts::SQRT_2;
        BoundarySet {
            b1: (2.0 - s2).sqrt() / 2.0,
            b2: 0.5,
            b3: core::f64::consts::FRAC_1_SQRT_2,
            b4: (2.0 + s2).sqrt() / 2.0,
            delta_ratio: 0.0,
            method: BoundaryMethod::AnalyticLimit,
        }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.b1, self.b2, self.b3, self.b4]
    }

    pub fn is_strictly_increasing(&self) -> bool {
        let v = self.values();
        v[0] > 0.0 && v.windows(2).all(|w| w[0] < w[1])
    }

    /// Interval index 1..=5 containing `g_ratio`; boundaries belong to the
    /// upper interval.
    pub fn interval_of(&self, g_ratio: f64) -> usize {
        1 + self.values().iter().filter(|&&b| g_ratio >= b).count()
    }

    /// `(lower, upper)` of interval `index` (1..=5).
    pub fn interval_bounds(&self, index: usize) -> (f64, f64) {
        let v = self.values();
        let lower = if index <= 1 { 0.0 } else { v[index - 2] };
        let upper = if index >= 5 { f64::INFINITY } else { v[index - 1] };
        (lower, upper)
    }

    /// Closest boundary as `(index 1..=4, |g_ratio - b|)`.
    pub fn nearest(&self, g_ratio: f64) -> (usize, f64) {
        self.values()
            .iter()
            .enumerate()
            .map(|(i, b)| (i + 1, (g_ratio - b).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four boundaries")
    }
}

/// Probe step for the curvature of `omega_13(epsilon)` at `epsilon = omega`.
pub const CURVATURE_STEP: f64 = 0.01;
/// Bisection tolerance in `g/omega`.
pub const ROOT_TOL: f64 = 1e-4;
const SCAN_STEP: f64 = 0.02;
const SCAN_MAX: f64 = 2.0;

pub(crate) fn boundary_truncation() -> TruncationConfig {
    TruncationConfig {
        n_fock: 8,
        energy_tol: 1e-12,
        n_levels_checked: 8,
        max_cutoff: 2048,
    }
}

/// `(E_3 - E_2) - (E_1 - E_0)` at `epsilon = 0` in units of `omega`.
fn doublet_gap_difference(delta_ratio: f64, g: f64) -> Result<f64> {
    let params = ModelParams::normalized(delta_ratio, 0.0, g)?;
    let e = model::converged_parity_sectors(&params, &boundary_truncation())?.merged();
    Ok((e[3] - e[2]) - (e[1] - e[0]))
}

/// Signed `E_3 - E_2` at `epsilon = 0`, tracked through the level crossing
/// by parity.
fn signed_second_doublet(delta_ratio: f64, g: f64) -> Result<f64> {
    let params = ModelParams::normalized(delta_ratio, 0.0, g)?;
    Ok(model::converged_parity_sectors(&params, &boundary_truncation())?.signed_splitting(1))
}

/// Centered second difference of `omega_13(epsilon)` around `center`.
pub fn omega13_second_difference(
    params: &ModelParams,
    center: f64,
    h: f64,
    trunc: &TruncationConfig,
) -> Result<f64> {
    let w13 = |eps: f64| -> Result<f64> {
        let (_, e) = model::converged_energies(&params.with_epsilon(eps), trunc)?;
        Ok(e[3] - e[1])
    };
    Ok(w13(center + h)? - 2.0 * w13(center)? + w13(center - h)?)
}

/// Bias of the first qubit-oscillator resonance near `epsilon = omega`: the
/// minimum of `E_2 - E_1` by golden-section search over a window of
/// `+-0.4 omega` around `sqrt(omega^2 - delta_eff^2)`, where
/// `delta_eff = delta exp(-2 g^2 / omega^2)` is the dressed qubit gap.
///
/// Equals `omega` for `delta -> 0`; a finite gap pulls it towards
/// `sqrt(omega^2 - delta^2)`.
pub fn resonance_bias(params: &ModelParams, trunc: &TruncationConfig) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let gap = |eps: f64| -> Result<f64> {
        let (_, e) = model::converged_energies(&params.with_epsilon(eps), trunc)?;
        Ok(e[2] - e[1])
    };
    let w = params.omega;
    let r = params.g_ratio();
    let dressed = params.delta * (-2.0 * r * r).exp();
    let bare = (w * w - dressed * dressed).max(0.0).sqrt();
    let (mut a, mut b) = ((bare - 0.4 * w).max(0.0), bare + 0.4 * w);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (gap(c)?, gap(d)?);
    while b - a > 1e-7 * params.omega {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = gap(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = gap(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

fn curvature_13(delta_ratio: f64, g: f64) -> Result<f64> {
    let trunc = boundary_truncation();
    let params = ModelParams::normalized(delta_ratio, 1.0, g)?;
    let center = resonance_bias(&params, &trunc)?;
    omega13_second_difference(&params, center, CURVATURE_STEP, &trunc)
}

fn bisect<F>(mut lo: f64, mut hi: f64, mut f_lo: f64, f: &mut F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sign-change brackets of `f` on the scan grid `(start, SCAN_MAX]`.
fn scan_roots<F>(start: f64, max_roots: usize, f: &mut F) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut roots = Vec::new();
    let mut a = start;
    let mut fa = f(a)?;
    let steps = ((SCAN_MAX - start) / SCAN_STEP).ceil() as usize;
    for k in 1..=steps {
        let b = (start + k as f64 * SCAN_STEP).min(SCAN_MAX);
        let fb = f(b)?;
        if fa != 0.0 && fb != 0.0 && (fa > 0.0) != (fb > 0.0) {
            roots.push(bisect(a, b, fa, f)?);
            if roots.len() == max_roots {
                break;
            }
        }
        a = b;
        fa = fb;
    }
    Ok(roots)
}

/// Regime boundaries for a given `delta/omega` in `[0, 1)`.
///
/// * `b2`: zero of the signed `E_3 - E_2` at `epsilon = 0`.
/// * `b3`: zero of `(E_3 - E_2) - (E_1 - E_0)` at `epsilon = 0`.
/// * `b1`, `b4`: sign changes of the second difference (step
///   [`CURVATURE_STEP`]) of `omega_13(epsilon)` at the resonance near
///   `epsilon = omega` ([`resonance_bias`]), i.e. where the `|1> -> |3>`
///   line flips between dip and peak there.
///
/// `delta/omega = 0` returns the analytic limit.
pub fn regime_boundaries(delta_ratio: f64) -> Result<BoundarySet> {
    if !(0.0..1.0).contains(&delta_ratio) {
        return Err(Error::DeltaRatioOutOfDomain(delta_ratio));
    }
    if delta_ratio == 0.0 {
        return Ok(BoundarySet::analytic_limit());
    }

    let b2 = *scan_roots(SCAN_STEP, 1, &mut |g| signed_second_doublet(delta_ratio, g))?
        .first()
        .ok_or(Error::RootNotBracketed { index: 2 })?;
    let b3 = *scan_roots(SCAN_STEP, 1, &mut |g| doublet_gap_difference(delta_ratio, g))?
        .first()
        .ok_or(Error::RootNotBracketed { index: 3 })?;
    let curvature_roots = scan_roots(SCAN_STEP, 2, &mut |g| curvature_13(delta_ratio, g))?;
    let b1 = *curvature_roots.first().ok_or(Error::RootNotBracketed { index: 1 })?;
    let b4 = *curvature_roots.get(1).ok_or(Error::RootNotBracketed { index: 4 })?;

    let set = BoundarySet {
        b1,
        b2,
        b3,
        b4,
        delta_ratio,
        method: BoundaryMethod::NumericRoot,
    };
    if !set.is_strictly_increasing() {
        return Err(Error::UnorderedBoundaries(set.values()));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_low_orders() {
        for x in [0.0, 0.5, 3.0, 7.5] {
            assert_eq!(assoc_laguerre(0, 1, x), 1.0);
            assert!((assoc_laguerre(1, 1, x) - (2.0 - x)).abs() < 1e-14);
        }
        assert_eq!(assoc_laguerre(1, 1, 2.0), 0.0);
        // x^2/2 - 2x + 1 at x = 1.
        assert!((assoc_laguerre(2, 0, 1.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn displacement_limits() {
        for m in 0..5 {
            for n in 0..5 {
                let expect = if m == n { 1.0 } else { 0.0 };
                assert_eq!(displaced_fock_overlap(0.0, m, n), expect);
            }
        }
        for a in [0.3, 1.0, -1.7] {
            let v = displaced_fock_overlap(a, 0, 0);
            assert!((v - (-0.5 * a * a).exp()).abs() < 1e-15);
        }
        // Antisymmetry of the generator: <m|D(a)|n> = <n|D(-a)|m>.
        let a = 0.9;
        assert!((displaced_fock_overlap(a, 3, 1) - displaced_fock_overlap(-a, 1, 3)).abs() < 1e-15);
    }

    #[test]
    fn e31_sign_changes() {
        let s2 = core::f64::consts::SQRT_2;
        let b1 = (2.0 - s2).sqrt() / 2.0;
        let b4 = (2.0 + s2).sqrt() / 2.0;
        assert!(e31_second_term(b1 - 1e-6, 1.0, Branch::Minus) < 0.0);
        assert!(e31_second_term(b1 + 1e-6, 1.0, Branch::Minus) > 0.0);
        assert!(e31_second_term(b4 - 1e-6, 1.0, Branch::Plus) > 0.0);
        assert!(e31_second_term(b4 + 1e-6, 1.0, Branch::Plus) < 0.0);
        assert_eq!(e31_second_term(0.0, 1.0, Branch::Minus), 0.0);
        assert_eq!(Branch::for_coupling(0.5), Branch::Minus);
        assert_eq!(Branch::for_coupling(0.8), Branch::Plus);
    }

    #[test]
    fn symmetry_point_splitting_limits() {
        let p = ModelParams::normalized(0.1, 0.0, 0.5).unwrap();
        assert!(symmetry_point_splitting(1, &p).unwrap().abs() < 1e-15);
        let p0 = ModelParams::normalized(0.1, 0.0, 0.0).unwrap();
        assert!((symmetry_point_splitting(0, &p0).unwrap() - 0.1).abs() < 1e-15);
        let biased = ModelParams::normalized(0.1, 0.2, 0.5).unwrap();
        assert_eq!(symmetry_point_splitting(0, &biased), Err(Error::NonZeroBias(0.2)));
    }

    #[test]
    fn cat_states_at_zero_coupling() {
        let (zero, three) = build_cat_states(0.0, 1.0, 4).unwrap();
        let w = core::f64::consts::FRAC_1_SQRT_2;
        let z = zero.to_basis();
        assert!((z[0] - w).abs() < 1e-15 && (z[1] - w).abs() < 1e-15);
        assert!(z[2..].iter().all(|c| *c == 0.0));
        let t = three.to_basis();
        assert!((t[2] - w).abs() < 1e-15 && (t[3] + w).abs() < 1e-15);
    }

    #[test]
    fn cat_cutoff_too_small() {
        assert!(matches!(
            build_cat_states(2.0, 1.0, 3),
            Err(Error::TruncatedCoefficients { .. })
        ));
    }

    #[test]
    fn boundary_set_intervals() {
        let b = BoundarySet::analytic_limit();
        assert!(b.is_strictly_increasing());
        assert_eq!(b.interval_of(0.1), 1);
        assert_eq!(b.interval_of(0.45), 2);
        assert_eq!(b.interval_of(0.6), 3);
        assert_eq!(b.interval_of(0.8), 4);
        assert_eq!(b.interval_of(1.5), 5);
        assert_eq!(b.interval_bounds(1), (0.0, b.b1));
        assert_eq!(b.interval_bounds(5).0, b.b4);
        let (idx, d) = b.nearest(0.71);
        assert_eq!(idx, 3);
        assert!(d < 0.003);
    }

    #[test]
    fn boundary_domain() {
        assert_eq!(regime_boundaries(1.0), Err(Error::DeltaRatioOutOfDomain(1.0)));
        assert_eq!(regime_boundaries(-0.1), Err(Error::DeltaRatioOutOfDomain(-0.1)));
        assert_eq!(regime_boundaries(0.0).unwrap().method, BoundaryMethod::AnalyticLimit);
    }
}
