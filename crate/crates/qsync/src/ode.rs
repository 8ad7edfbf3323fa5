//! Adaptive Dormand-Prince 5(4) integrator over complex state vectors.
//!
//! This is deliberately minimal: embedded 5th/4th order pair, FSAL, a plain
//! I step-size controller, and hard stops at caller-supplied output times.
//! It serves as the cross-check route for the product-integration Volterra
//! solver, so it shares no code with it.

use num_complex::Complex64;

use crate::error::{Error, Result};

// Dormand-Prince tableau. The b-row equals the last a-row (FSAL), and E is
// the difference between the 5th- and 4th-order weights.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Integrate `dy/dt = rhs(t, y)` from `times[0]`, returning the state at
/// every entry of `times` (which must be finite and strictly increasing).
pub(crate) fn integrate<const N: usize>(
    mut rhs: impl FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    y0: [Complex64; N],
    times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<[Complex64; N]>> {
    if times.len() < 2 {
        return Err(Error::invalid("integration needs at least two output times"));
    }
    let mut out = Vec::with_capacity(times.len());
    out.push(y0);

    let mut t = times[0];
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = initial_step(&k1, times);

    for &target in &times[1..] {
        while t < target {
            let mut last = false;
            let mut hs = h;
            if t + hs >= target {
                hs = target - t;
                last = true;
            }
            if !hs.is_finite() || hs < 1e-13 * t.abs().max(1.0) {
                return Err(Error::diverged(format!(
                    "step size underflow at t = {t:.6e}"
                )));
            }

            let (y_new, k7, err) = attempt_step(&mut rhs, t, &y, hs, &k1, rtol, atol);

            if err.is_finite() && err <= 1.0 {
                t = if last { target } else { t + hs };
                y = y_new;
                k1 = k7;
                if !state_is_finite(&y) {
                    return Err(Error::diverged(format!(
                        "non-finite state at t = {t:.6e}"
                    )));
                }
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                h = hs * fac;
            } else {
                // Rejected (or NaN error estimate): shrink and retry.
                let fac = if err.is_finite() {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, SAFETY)
                } else {
                    0.5
                };
                h = hs * fac;
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn attempt_step<const N: usize>(
    rhs: &mut impl FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    t: f64,
    y: &[Complex64; N],
    h: f64,
    k1: &[Complex64; N],
    rtol: f64,
    atol: f64,
) -> ([Complex64; N], [Complex64; N], f64) {
    let mut tmp = [Complex64::new(0.0, 0.0); N];

    for i in 0..N {
        tmp[i] = y[i] + h * (A21 * k1[i]);
    }
    let k2 = rhs(t + C2 * h, &tmp);

    for i in 0..N {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = rhs(t + C3 * h, &tmp);

    for i in 0..N {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = rhs(t + C4 * h, &tmp);

    for i in 0..N {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = rhs(t + C5 * h, &tmp);

    for i in 0..N {
        tmp[i] =
            y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = rhs(t + h, &tmp);

    let mut y_new = [Complex64::new(0.0, 0.0); N];
    for i in 0..N {
        y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = rhs(t + h, &y_new);

    // Scaled RMS of the embedded error estimate, complex moduli component-wise.
    let mut err_sq = 0.0;
    for i in 0..N {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].norm().max(y_new[i].norm());
        err_sq += (e.norm() / sc).powi(2);
    }
    (y_new, k7, (err_sq / N as f64).sqrt())
}

fn state_is_finite<const N: usize>(y: &[Complex64; N]) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn initial_step<const N: usize>(k1: &[Complex64; N], times: &[f64]) -> f64 {
    let rate: f64 = k1.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let guess = 0.01 / rate.max(1.0);
    guess.min(times[1] - times[0])
}
