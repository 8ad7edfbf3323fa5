//! Qubit state reconstruction and phase-space observables.
//!
//! In the single-excitation sector the reduced density matrix follows
//! directly from the amplitude `B(t)` and the initial superposition
//! `c_g |g> + c_e |e>`:
//!
//! ```text
//! rho_ee(t) = |c_e|^2 |B(t)|^2,    rho_eg(t) = c_e conj(c_g) B(t),
//! rho_gg(t) = 1 - rho_ee(t).
//! ```
//!
//! Phase preference is quantified on the Bloch sphere through the Husimi
//! function `Q(theta, phi) = <theta, phi| rho |theta, phi> / 2 pi` with spin
//! coherent states `|theta, phi> = cos(theta/2)|e> + e^{i phi}
//! sin(theta/2)|g>`, and through the phase distribution obtained by
//! integrating out the polar angle,
//!
//! ```text
//! S(phi, t) = int_0^pi Q(theta, phi, t) sin(theta) dtheta - 1/(2 pi)
//!           = Re(e^{i phi} rho_eg(t)) / 4,
//! ```
//!
//! which vanishes for phase-symmetric states and is bounded by 1/8.

use num_complex::Complex64;

use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};

/// Largest attainable |S(phi, t)|, reached by an equal superposition with
/// undamped coherence.
pub const MAX_SYNC: f64 = 0.125;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Normalized initial superposition `c_g |g> + c_e |e>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub c_g: Complex64,
    pub c_e: Complex64,
}

impl InitialState {
    pub fn new(c_g: Complex64, c_e: Complex64) -> Result<Self> {
        let finite = c_g.re.is_finite()
            && c_g.im.is_finite()
            && c_e.re.is_finite()
            && c_e.im.is_finite();
        if !finite {
            return Err(Error::invalid("state amplitudes must be finite"));
        }
        let norm_sq = c_g.norm_sqr() + c_e.norm_sqr();
        if (norm_sq - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!(
                "state must be normalized: |c_g|^2 + |c_e|^2 = {norm_sq}"
            )));
        }
        Ok(InitialState { c_g, c_e })
    }

    /// `(|g> + |e>) / sqrt(2)`, the state with maximal initial coherence.
    pub fn equal_superposition() -> Self {
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        InitialState { c_g: amp, c_e: amp }
    }

    pub fn excited_population(&self) -> f64 {
        self.c_e.norm_sqr()
    }

    /// Initial coherence `rho_eg(0) = c_e conj(c_g)`.
    pub fn coherence(&self) -> Complex64 {
        self.c_e * self.c_g.conj()
    }
}

/// Trace-one qubit density matrix; `rho_ge` is implied by Hermiticity and
/// `rho_gg` by the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub rho_ee: f64,
    pub rho_eg: Complex64,
}

impl QubitState {
    /// Build a state from its independent entries, enforcing positivity.
    pub fn from_parts(rho_ee: f64, rho_eg: Complex64) -> Result<Self> {
        if !rho_ee.is_finite() || !(rho_eg.re.is_finite() && rho_eg.im.is_finite()) {
            return Err(Error::invalid("density matrix entries must be finite"));
        }
        if !(0.0..=1.0 + 1e-12).contains(&rho_ee) {
            return Err(Error::invalid(format!(
                "rho_ee must lie in [0, 1], got {rho_ee}"
            )));
        }
        let rho_gg = 1.0 - rho_ee;
        if rho_eg.norm_sqr() > rho_ee * rho_gg + 1e-12 {
            return Err(Error::invalid(format!(
                "coherence violates positivity: |rho_eg|^2 = {} > rho_ee rho_gg = {}",
                rho_eg.norm_sqr(),
                rho_ee * rho_gg
            )));
        }
        Ok(QubitState { rho_ee, rho_eg })
    }

    /// `rho = I / 2`; useful as a phase-symmetric reference.
    pub fn maximally_mixed() -> Self {
        QubitState {
            rho_ee: 0.5,
            rho_eg: Complex64::new(0.0, 0.0),
        }
    }

    pub fn rho_gg(&self) -> f64 {
        1.0 - self.rho_ee
    }

    /// `Tr rho^2`, 1 for pure states, 1/2 for the maximally mixed one.
    pub fn purity(&self) -> f64 {
        self.rho_ee * self.rho_ee
            + self.rho_gg() * self.rho_gg()
            + 2.0 * self.rho_eg.norm_sqr()
    }
}

/// Reduced density matrix at the time where the amplitude equals `b`.
pub fn density_matrix(init: &InitialState, b: Complex64) -> Result<QubitState> {
    if !(b.re.is_finite() && b.im.is_finite()) {
        return Err(Error::invalid("amplitude must be finite"));
    }
    if b.norm() > 1.0 + 2e-6 {
        return Err(Error::invalid(format!(
            "amplitude must stay inside the unit disk, got |b| = {}",
            b.norm()
        )));
    }
    let rho_ee = (init.excited_population() * b.norm_sqr()).min(1.0);
    let rho_eg = init.coherence() * b;
    Ok(QubitState { rho_ee, rho_eg })
}

/// Husimi function `Q(theta, phi) = <theta, phi| rho |theta, phi> / 2 pi`.
pub fn husimi_q(state: &QubitState, theta: f64, phi: f64) -> f64 {
    let half = 0.5 * theta;
    let (sin_half, cos_half) = (half.sin(), half.cos());
    let coherent = (Complex64::from_polar(1.0, phi) * state.rho_eg).re;
    let overlap = cos_half * cos_half * state.rho_ee
        + sin_half * sin_half * state.rho_gg()
        + 2.0 * sin_half * cos_half * coherent;
    overlap / TWO_PI
}

/// Husimi function sampled on a regular spherical mesh.
///
/// Polar angles include both poles (`n_theta` points on `[0, pi]`); azimuths
/// cover `[0, 2 pi)` periodically with the endpoint excluded. `normalization`
/// stores the quadrature of `Q sin(theta)` over the mesh, which must come
/// out as 1 for any valid state.
#[derive(Debug, Clone)]
pub struct QGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Row-major: `values[i * n_phi + j] = Q(thetas[i], phis[j])`.
    pub values: Vec<f64>,
    pub normalization: f64,
}

impl QGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.phis.len() + j]
    }

    /// Mesh point with the largest Q, as `(theta, phi, q)`.
    pub fn max_point(&self) -> (f64, f64, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for i in 0..self.thetas.len() {
            for j in 0..self.phis.len() {
                let q = self.value(i, j);
                if q > best.2 {
                    best = (i, j, q);
                }
            }
        }
        (self.thetas[best.0], self.phis[best.1], best.2)
    }
}

pub fn husimi_grid(state: &QubitState, n_theta: usize, n_phi: usize) -> Result<QGrid> {
    if n_theta < 8 || n_phi < 8 {
        return Err(Error::invalid(format!(
            "mesh must have at least 8 points per axis, got {n_theta} x {n_phi}"
        )));
    }
    let d_theta = std::f64::consts::PI / (n_theta - 1) as f64;
    let d_phi = TWO_PI / n_phi as f64;
    let thetas: Vec<f64> = (0..n_theta).map(|i| i as f64 * d_theta).collect();
    let phis: Vec<f64> = (0..n_phi).map(|j| j as f64 * d_phi).collect();

    let mut values = Vec::with_capacity(n_theta * n_phi);
    // phi-integral of each theta row; the rectangle rule is exact here
    // because Q is a degree-one trigonometric polynomial in phi.
    let mut row_integrals = Vec::with_capacity(n_theta);
    for &theta in &thetas {
        let mut row_sum = 0.0;
        for &phi in &phis {
            let q = husimi_q(state, theta, phi);
            values.push(q);
            row_sum += q;
        }
        row_integrals.push(row_sum * d_phi * theta.sin());
    }
    let normalization = integrate_sampled(&row_integrals, d_theta);

    Ok(QGrid {
        thetas,
        phis,
        values,
        normalization,
    })
}

/// Phase quasi-distribution `S(phi, t)` in closed form.
pub fn sync_measure(state: &QubitState, phi: f64) -> f64 {
    0.25 * (Complex64::from_polar(1.0, phi) * state.rho_eg).re
}

/// `S(phi, t)` evaluated from its definition: Simpson quadrature of
/// `Q sin(theta)` over the polar angle, minus the uniform background.
pub fn sync_measure_integral(state: &QubitState, phi: f64) -> f64 {
    const NODES: usize = 201;
    let h = std::f64::consts::PI / (NODES - 1) as f64;
    let samples: Vec<f64> = (0..NODES)
        .map(|i| {
            let theta = i as f64 * h;
            husimi_q(state, theta, phi) * theta.sin()
        })
        .collect();
    integrate_sampled(&samples, h) - 1.0 / TWO_PI
}

/// `S(phi, t)` along an amplitude trajectory, as produced by the solvers.
#[derive(Debug, Clone)]
pub struct SyncSeries {
    pub phi: f64,
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl SyncSeries {
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.grid.dt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|s| s.abs()).fold(0.0, f64::max)
    }

    pub fn final_abs(&self) -> f64 {
        self.values.last().map(|s| s.abs()).unwrap_or(0.0)
    }
}

/// Composite quadrature over equally spaced samples: Simpson's rule, with a
/// 3/8 closing panel when the interval count is odd. Needs >= 4 samples.
pub(crate) fn integrate_sampled(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1; // interval count
    assert!(n >= 3, "quadrature needs at least 4 samples");
    let (simpson_end, mut total) = if n % 2 == 0 {
        (n, 0.0)
    } else {
        // Close the last three intervals with the 3/8 rule.
        let tail = 0.375
            * h
            * (values[n - 3] + 3.0 * values[n - 2] + 3.0 * values[n - 1] + values[n]);
        (n - 3, tail)
    };
    if simpson_end > 0 {
        let mut acc = values[0] + values[simpson_end];
        for (i, v) in values.iter().enumerate().take(simpson_end).skip(1) {
            acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        total += acc * h / 3.0;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Random pure initial state parameterized by Bloch angles.
    fn init_from_angles(alpha: f64, beta: f64) -> InitialState {
        InitialState::new(
            c(alpha.cos(), 0.0),
            Complex64::from_polar(alpha.sin(), beta),
        )
        .unwrap()
    }

    #[test]
    fn initial_state_validation() {
        assert!(InitialState::new(c(1.0, 0.0), c(0.0, 0.0)).is_ok());
        assert!(InitialState::new(c(0.9, 0.0), c(0.1, 0.0)).is_err());
        assert!(InitialState::new(c(f64::NAN, 0.0), c(0.0, 0.0)).is_err());
        let eq = InitialState::equal_superposition();
        assert_abs_diff_eq!(
            eq.c_g.norm_sqr() + eq.c_e.norm_sqr(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(eq.excited_population(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn density_matrix_limits() {
        let eq = InitialState::equal_superposition();
        // Undamped amplitude: the initial projector.
        let rho = density_matrix(&eq, c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(rho.rho_ee, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho_eg.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        // Fully decayed amplitude: ground state.
        let rho = density_matrix(&eq, c(0.0, 0.0)).unwrap();
        assert_eq!(rho.rho_ee, 0.0);
        assert_eq!(rho.rho_eg, c(0.0, 0.0));
        assert_abs_diff_eq!(rho.rho_gg(), 1.0, epsilon = 1e-15);
        // Half-decayed coherence.
        let rho = density_matrix(&eq, c(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(rho.rho_ee, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.rho_eg.re, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn density_matrix_rejects_unphysical_amplitudes() {
        let eq = InitialState::equal_superposition();
        assert!(density_matrix(&eq, c(1.1, 0.0)).is_err());
        assert!(density_matrix(&eq, c(f64::NAN, 0.0)).is_err());
        // ... but tolerates solver-level rounding past 1.
        assert!(density_matrix(&eq, c(1.0 + 1e-9, 0.0)).is_ok());
    }

    #[test]
    fn explicit_state_construction() {
        assert!(QubitState::from_parts(0.5, c(0.5, 0.0)).is_ok());
        assert!(QubitState::from_parts(0.5, c(0.51, 0.0)).is_err()); // not PSD
        assert!(QubitState::from_parts(1.2, c(0.0, 0.0)).is_err());
        assert!(QubitState::from_parts(-0.1, c(0.0, 0.0)).is_err());
        let mixed = QubitState::maximally_mixed();
        assert_abs_diff_eq!(mixed.purity(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn husimi_at_the_poles_reads_the_populations() {
        let state = QubitState::from_parts(0.3, c(0.2, 0.1)).unwrap();
        assert_abs_diff_eq!(husimi_q(&state, 0.0, 1.0), 0.3 / TWO_PI, epsilon = 1e-15);
        assert_abs_diff_eq!(
            husimi_q(&state, std::f64::consts::PI, 2.0),
            0.7 / TWO_PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn husimi_equator_sees_the_full_coherence() {
        let eq = InitialState::equal_superposition();
        let rho = density_matrix(&eq, c(1.0, 0.0)).unwrap();
        let q = husimi_q(&rho, std::f64::consts::FRAC_PI_2, 0.0);
        assert_abs_diff_eq!(q, 1.0 / TWO_PI, epsilon = 1e-15);
    }

    #[test]
    fn maximally_mixed_state_is_flat() {
        let mixed = QubitState::maximally_mixed();
        let grid = husimi_grid(&mixed, 33, 32).unwrap();
        for &q in &grid.values {
            assert_abs_diff_eq!(q, 0.25 / std::f64::consts::PI, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(grid.normalization, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn husimi_grid_peaks_at_phi_zero_for_real_coherence() {
        let eq = InitialState::equal_superposition();
        let rho = density_matrix(&eq, c(0.9, 0.0)).unwrap();
        let grid = husimi_grid(&rho, 33, 64).unwrap();
        let (theta, phi, q) = grid.max_point();
        assert_eq!(phi, 0.0, "positive real coherence must peak at phi = 0");
        assert!(theta > 0.0 && theta < std::f64::consts::PI);
        assert!(q > 0.25 / std::f64::consts::PI);
    }

    #[test]
    fn husimi_grid_rejects_coarse_meshes() {
        let mixed = QubitState::maximally_mixed();
        assert!(husimi_grid(&mixed, 7, 64).is_err());
        assert!(husimi_grid(&mixed, 64, 7).is_err());
    }

    #[test]
    fn sync_measure_of_equal_superposition() {
        let eq = InitialState::equal_superposition();
        let rho = density_matrix(&eq, c(1.0, 0.0)).unwrap();
        assert!((sync_measure(&rho, 0.0) - MAX_SYNC).abs() <= 1e-15);
        // Antiphase observation point sees the opposite preference.
        assert!((sync_measure(&rho, std::f64::consts::PI) + MAX_SYNC).abs() <= 1e-15);
    }

    #[test]
    fn sync_measure_vanishes_without_coherence() {
        let diagonal = QubitState::from_parts(0.77, c(0.0, 0.0)).unwrap();
        for i in 0..16 {
            let phi = i as f64 * 0.4;
            assert_eq!(sync_measure(&diagonal, phi), 0.0);
            // The quadrature route is only zero up to Simpson error.
            assert!(sync_measure_integral(&diagonal, phi).abs() < 1e-8);
        }
    }

    #[test]
    fn quadrature_handles_both_parities() {
        // int_0^pi sin = 2 with an even and an odd interval count.
        for n in [200usize, 201] {
            let h = std::f64::consts::PI / n as f64;
            let samples: Vec<f64> = (0..=n).map(|i| (i as f64 * h).sin()).collect();
            assert_abs_diff_eq!(integrate_sampled(&samples, h), 2.0, epsilon = 1e-8);
        }
    }

    proptest! {
        #[test]
        fn reconstructed_states_are_physical(
            alpha in 0.0f64..std::f64::consts::FRAC_PI_2,
            beta in 0.0f64..TWO_PI,
            b_mag in 0.0f64..1.0,
            b_phase in 0.0f64..TWO_PI,
        ) {
            let init = init_from_angles(alpha, beta);
            let b = Complex64::from_polar(b_mag, b_phase);
            let rho = density_matrix(&init, b).unwrap();
            // Trace one by construction, Hermiticity implicit; check
            // positivity through the determinant and the purity bound.
            let det = rho.rho_ee * rho.rho_gg() - rho.rho_eg.norm_sqr();
            prop_assert!(det >= -1e-12);
            prop_assert!(rho.purity() <= 1.0 + 1e-12);
            prop_assert!(rho.rho_ee >= 0.0 && rho.rho_ee <= 1.0);
        }

        #[test]
        fn husimi_matches_the_projector_overlap(
            alpha in 0.0f64..std::f64::consts::FRAC_PI_2,
            beta in 0.0f64..TWO_PI,
            b_mag in 0.0f64..1.0,
            theta in 0.0f64..std::f64::consts::PI,
            phi in 0.0f64..TWO_PI,
        ) {
            let init = init_from_angles(alpha, beta);
            let rho = density_matrix(&init, c(b_mag, 0.0)).unwrap();
            // <psi| rho |psi> with |psi> = cos(t/2)|e> + e^{i phi} sin(t/2)|g>,
            // written out in full 2x2 matrix algebra.
            let ce = c((0.5 * theta).cos(), 0.0);
            let cg = Complex64::from_polar((0.5 * theta).sin(), phi);
            let overlap = ce.conj() * rho.rho_ee * ce
                + ce.conj() * rho.rho_eg * cg
                + cg.conj() * rho.rho_eg.conj() * ce
                + cg.conj() * rho.rho_gg() * cg;
            prop_assert!((husimi_q(&rho, theta, phi) - overlap.re / TWO_PI).abs() < 1e-14);
        }

        #[test]
        fn husimi_grid_is_normalized(
            rho_ee in 0.0f64..1.0,
            u in 0.0f64..1.0,
            phase in 0.0f64..TWO_PI,
            n_theta in 33usize..100,
        ) {
            // Includes mixed states (u < 1) and both quadrature parities.
            let mag = 0.999 * u * (rho_ee * (1.0 - rho_ee)).sqrt();
            let state = QubitState::from_parts(
                rho_ee,
                Complex64::from_polar(mag, phase),
            ).unwrap();
            let grid = husimi_grid(&state, n_theta, 64).unwrap();
            prop_assert!(
                (grid.normalization - 1.0).abs() < 1e-6,
                "normalization = {}", grid.normalization
            );
        }

        #[test]
        fn sync_closed_form_matches_its_integral(
            alpha in 0.0f64..std::f64::consts::FRAC_PI_2,
            beta in 0.0f64..TWO_PI,
            b_mag in 0.0f64..1.0,
            b_phase in 0.0f64..TWO_PI,
            phi in 0.0f64..TWO_PI,
        ) {
            let init = init_from_angles(alpha, beta);
            let rho = density_matrix(&init, Complex64::from_polar(b_mag, b_phase)).unwrap();
            let closed = sync_measure(&rho, phi);
            let quad = sync_measure_integral(&rho, phi);
            prop_assert!((closed - quad).abs() < 1e-8,
                "closed = {}, quadrature = {}", closed, quad);
        }

        #[test]
        fn sync_measure_is_bounded_and_antiperiodic(
            alpha in 0.0f64..std::f64::consts::FRAC_PI_2,
            beta in 0.0f64..TWO_PI,
            b_mag in 0.0f64..1.0,
            phi in 0.0f64..TWO_PI,
        ) {
            let init = init_from_angles(alpha, beta);
            let rho = density_matrix(&init, c(b_mag, 0.0)).unwrap();
            let s = sync_measure(&rho, phi);
            prop_assert!(s.abs() <= MAX_SYNC + 1e-9);
            let s_anti = sync_measure(&rho, phi + std::f64::consts::PI);
            prop_assert!((s + s_anti).abs() < 1e-12);
        }
    }
}
