//! Special functions and quadrature checked against independent fixed-step
//! Gauss-Legendre integration in trigonometric variables.

use laxsurf_core::model::{EllipticKind, ModelSpec};
use laxsurf_core::special::{antiderivative_along_x, complete_k, elliptic_pi_incomplete, jacobi, EllipticModulus};
use laxsurf_core::wavefunction::{phase_integral, psi_pm_closed, PsiVariant};
use laxsurf_core::laxpair::SpectralContext;
use laxsurf_core::algebra::Scalar;

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_889,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss-Legendre rule on `n` equal panels.
fn gl5(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for p in 0..n {
        let mid = a + (p as f64 + 0.5) * h;
        for (t, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            acc += w * f(mid + 0.5 * h * t);
        }
    }
    0.5 * h * acc
}

/// `F(φ, k) = ∫₀^φ dθ / √(1 - k² sin²θ)`.
fn incomplete_first_kind(phi: f64, k: f64) -> f64 {
    gl5(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 200)
}

#[test]
fn sn_inverts_the_first_kind_integral() {
    for k in [0.0, 0.3, 0.5, 0.9, 0.99] {
        let m = EllipticModulus::new(k).unwrap();
        for i in 0..=30 {
            let phi = -1.5 + 0.1 * i as f64;
            let x = incomplete_first_kind(phi, k);
            let t = jacobi(x, m).unwrap();
            assert!((t.sn - phi.sin()).abs() < 1e-12, "k={k} phi={phi}");
            assert!((t.cn - phi.cos()).abs() < 1e-12, "k={k} phi={phi}");
        }
    }
}

#[test]
fn complete_integral_matches_quadrature() {
    for k in [0.0, 0.2, 0.5, 0.8, 0.95] {
        let q = incomplete_first_kind(core::f64::consts::FRAC_PI_2, k);
        assert!((complete_k(EllipticModulus::new(k).unwrap()) - q).abs() < 1e-12 * q);
    }
}

#[test]
fn third_kind_matches_quadrature_on_a_cube() {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let x = 0.04 + 0.9 * i as f64 / 19.0;
        for j in 0..20 {
            // Keeps 1 - α²x² ≥ 0.2 away from the pole.
            let alpha2 = -3.0 + (3.0 + 0.8 / (x * x)).min(3.9) * j as f64 / 19.0;
            for l in 0..20 {
                let k = 0.95 * l as f64 / 19.0;
                let m = EllipticModulus::new(k).unwrap();
                let got = elliptic_pi_incomplete(x, alpha2, m).unwrap();
                let theta = x.asin();
                let want = gl5(
                    |t| {
                        let s2 = t.sin().powi(2);
                        1.0 / ((1.0 - alpha2 * s2) * (1.0 - k * k * s2).sqrt())
                    },
                    0.0,
                    theta,
                    100,
                );
                worst = worst.max((got - want).abs() / (1.0 + want.abs()));
            }
        }
    }
    assert!(worst < 1e-10, "worst relative deviation {worst:e}");
}

#[test]
fn adaptive_quadrature_matches_fixed_rule() {
    let m = EllipticModulus::new(0.5).unwrap();
    let f = |x: f64| 1.0 / (2.0 * (jacobi(x, m).unwrap().sn + 2.0));
    for x in [-5.0, -1.0, 0.3, 2.0, 7.5] {
        let adaptive = antiderivative_along_x(|t| Scalar::new(f(t), 0.0), 0.0, x).unwrap();
        let fixed = gl5(f, 0.0, x, 400);
        assert!((adaptive.re - fixed).abs() < 1e-11, "x={x}");
        assert_eq!(adaptive.im, 0.0);
    }
}

#[test]
fn phase_integral_matches_fixed_rule() {
    let model = ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap();
    let ctx = SpectralContext::new(model, 1.2).unwrap();
    let m = EllipticModulus::new(0.5).unwrap();
    for x in [-2.0, 0.5, 1.5] {
        let fixed = gl5(|t| 0.5 / (jacobi(t, m).unwrap().sn + 1.2), 0.0, x, 400);
        assert!((phase_integral(&ctx, x).unwrap() - fixed).abs() < 1e-11);
    }
}

#[test]
fn rederived_closed_phase_matches_fixed_rule() {
    // g < 0 at λ = 1.2, so Ψ₊ = exp(i√(-g)(y + phase)) and its argument recovers the phase.
    let model = ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap();
    let ctx = SpectralContext::new(model, 1.2).unwrap();
    let m = EllipticModulus::new(0.5).unwrap();
    let omega = ctx.sqrt_g().im;
    for x in [-1.0, 0.4, 1.1] {
        let (plus, _) = psi_pm_closed(x, 0.0, &ctx, PsiVariant::Rederived).unwrap();
        let fixed = gl5(|t| 0.5 / (jacobi(t, m).unwrap().sn + 1.2), 0.0, x, 400);
        assert!((plus.arg() / omega - fixed).abs() < 1e-9, "x={x}");
    }
}
