//! Adaptive Dormand–Prince 5(4) integrator for systems of 2×2 matrix ODEs.
//!
//! The state is a fixed array of matrices so that a frame and its
//! variational companion can be advanced together.

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use crate::algebra::Mat2;
use crate::error::{Error, Result};

/// Local error tolerance used by the wave-function solver.
pub const LOCAL_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    /// Per-step error bound, relative to `1 + |y|` entrywise.
    pub tol: f64,
    /// Largest admissible step.
    pub h_max: f64,
    /// Steps smaller than `h_min (1 + |t|)` abort the integration.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: LOCAL_TOL, h_max: 0.25, h_min: 1e-13, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Advances `y' = field(t, y)` from `t0` to `t1`.
pub fn integrate<const N: usize, F>(mut field: F, t0: f64, t1: f64, y0: [Mat2; N], opts: &OdeOptions) -> Result<([Mat2; N], OdeStats)>
where
    F: FnMut(f64, &[Mat2; N]) -> Result<[Mat2; N]>,
{
    let mut stats = OdeStats::default();
    if t0 == t1 {
        return Ok((y0, stats));
    }
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = (t1 - t0).abs().min(opts.h_max) * dir;
    let mut k0 = field(t, &y)?;
    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { at: t });
        }
        if (t1 - t).abs() < h.abs() * 1.0001 {
            h = t1 - t;
        }
        let mut k = [k0; 7];
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                for j in 0..s {
                    if A[s][j] != 0.0 {
                        *yi += k[j][i] * (h * A[s][j]);
                    }
                }
            }
            k[s] = field(t + C[s] * h, &ys)?;
        }
        // Stage 7 is evaluated at the fifth-order solution (FSAL).
        let mut y_new = y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            for j in 0..6 {
                if A[6][j] != 0.0 {
                    *yi += k[j][i] * (h * A[6][j]);
                }
            }
        }
        k[6] = field(t + h, &y_new)?;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut e = Mat2::zero();
            for j in 0..7 {
                if E[j] != 0.0 {
                    e += k[j][i] * (h * E[j]);
                }
            }
            let (ea, ya, yb) = (e.entries(), y[i].entries(), y_new[i].entries());
            for m in 0..4 {
                let scale = opts.tol * (1.0 + ya[m].norm().max(yb[m].norm()));
                err = err.max(ea[m].norm() / scale);
            }
        }
        if !err.is_finite() {
            return Err(Error::StepSizeUnderflow { at: t });
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k0 = k[6];
            stats.accepted += 1;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).abs().min(opts.h_max) * dir;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h.abs() < opts.h_min * (1.0 + t.abs()) {
            return Err(Error::StepSizeUnderflow { at: t });
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2;

    #[test]
    fn rotation_generator() {
        // y' = J y with J = [[0,-1],[1,0]] gives the rotation matrix.
        let j = Mat2::real(0.0, -1.0, 1.0, 0.0);
        let (y, stats) = integrate(|_, y: &[Mat2; 1]| Ok([j * y[0]]), 0.0, 3.0, [Mat2::identity()], &OdeOptions::default()).unwrap();
        let exact = Mat2::real(3f64.cos(), -3f64.sin(), 3f64.sin(), 3f64.cos());
        assert!((y[0] - exact).max_abs() < 1e-10);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn backward_and_time_dependent() {
        // y' = t y, y(0) = 1  ⇒  y = exp(t²/2).
        let (y, _) = integrate(|t, y: &[Mat2; 1]| Ok([y[0] * t]), 0.0, -1.5, [Mat2::identity()], &OdeOptions::default()).unwrap();
        assert!((y[0].m11.re - (1.125f64).exp()).abs() < 1e-9);
        assert!((y[0].m22.re - (1.125f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn zero_length_is_identity_map() {
        let y0 = [Mat2::real(1.0, 2.0, 3.0, 4.0)];
        let (y, stats) = integrate(|_, _: &[Mat2; 1]| Err(Error::Invalid("never called")), 1.0, 1.0, y0, &OdeOptions::default()).unwrap();
        assert_eq!(y, y0);
        assert_eq!(stats.accepted, 0);
    }

    #[test]
    fn blow_up_underflows() {
        // y' = y², y(0) = 1 explodes at t = 1.
        let r = integrate(|_, y: &[Mat2; 1]| Ok([y[0] * y[0]]), 0.0, 2.0, [Mat2::identity()], &OdeOptions::default());
        assert!(matches!(r, Err(Error::StepSizeUnderflow { at }) if (at - 1.0).abs() < 1e-2));
    }
}
