//! Jacobi elliptic functions, Carlson symmetric integrals and adaptive quadrature.

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::algebra::Scalar;
use crate::error::{Error, Result};

/// Modulus `k` together with its complement `k' = √(1 - k²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EllipticModulus {
    k: f64,
    kp: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::ModulusOutOfRange { k });
        }
        let kp = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(Self { k, kp })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Complementary modulus `k'`.
    pub fn kp(&self) -> f64 {
        self.kp
    }

    pub fn m(&self) -> f64 {
        self.k * self.k
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

const AGM_TOL: f64 = 1e-15;
const AGM_MAX: usize = 64;

/// `sn, cn, dn` by the descending Landen / AGM scale.
pub fn jacobi(x: f64, k: EllipticModulus) -> Result<JacobiTriple> {
    if !x.is_finite() {
        return Err(Error::Domain { what: "jacobi", value: x });
    }
    let (kk, kp) = (k.k(), k.kp());
    if kk == 0.0 {
        return Ok(JacobiTriple { sn: x.sin(), cn: x.cos(), dn: 1.0 });
    }
    if kp == 0.0 {
        let sech = 1.0 / x.cosh();
        return Ok(JacobiTriple { sn: x.tanh(), cn: sech, dn: sech });
    }

    let mut a = [0.0f64; AGM_MAX + 1];
    let mut c = [0.0f64; AGM_MAX + 1];
    a[0] = 1.0;
    c[0] = kk;
    let mut b = kp;
    let mut n = 0;
    while c[n].abs() > AGM_TOL && n < AGM_MAX {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = (2.0f64).powi(n as i32) * a[n] * x;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = 1 - k² sn² = k'² + k² cn²; the second form avoids cancellation near k sn → 1.
    let ksn2 = kk * kk * sn * sn;
    let dn = if ksn2 < 0.5 { (1.0 - ksn2).sqrt() } else { (kp * kp + kk * kk * cn * cn).sqrt() };
    Ok(JacobiTriple { sn, cn, dn })
}

/// Arithmetic-geometric mean of two nonnegative reals.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX {
        if (a - b).abs() <= AGM_TOL * a.abs() {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete integral of the first kind `K(k) = π / (2 AGM(1, k'))`.
pub fn complete_k(k: EllipticModulus) -> f64 {
    if k.kp() == 0.0 {
        return f64::INFINITY;
    }
    FRAC_PI_2 / agm(1.0, k.kp())
}

const CARLSON_R: f64 = 1e-16;

fn max3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).max(c)
}

/// Carlson's `R_F(x, y, z)`, nonnegative arguments, at most one zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 || (x + y).min(x + z).min(y + z) == 0.0 {
        return Err(Error::Domain { what: "carlson_rf", value: x.min(y).min(z) });
    }
    let (x0, y0) = (x, y);
    let a0 = (x + y + z) / 3.0;
    let q = (3.0 * CARLSON_R).powf(-1.0 / 6.0) * max3((a0 - x).abs(), (a0 - y).abs(), (a0 - z).abs());
    let (mut x, mut y, mut z, mut a) = (x, y, z, a0);
    let mut pow4 = 1.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        a = 0.25 * (a + lam);
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        pow4 *= 0.25;
    }
    let xx = (a0 - x0) * pow4 / a;
    let yy = (a0 - y0) * pow4 / a;
    let zz = -xx - yy;
    let e2 = xx * yy - zz * zz;
    let e3 = xx * yy * zz;
    let series = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0;
    Ok(series / a.sqrt())
}

/// Carlson's degenerate `R_C(x, y)`, `x ≥ 0`, `y ≠ 0` (Cauchy principal value for `y < 0`).
pub fn carlson_rc(x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y == 0.0 {
        return Err(Error::Domain { what: "carlson_rc", value: if x < 0.0 { x } else { y } });
    }
    if y < 0.0 {
        return Ok((x / (x - y)).sqrt() * carlson_rc(x - y, -y)?);
    }
    let y0 = y;
    let a0 = (x + 2.0 * y) / 3.0;
    let q = (3.0 * CARLSON_R).powf(-1.0 / 8.0) * (a0 - x).abs();
    let (mut x, mut y, mut a) = (x, y, a0);
    let mut pow4 = 1.0;
    while pow4 * q >= a.abs() {
        let lam = 2.0 * x.sqrt() * y.sqrt() + y;
        a = 0.25 * (a + lam);
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        pow4 *= 0.25;
    }
    let s = (y0 - a0) * pow4 / a;
    let series = 1.0
        + s * s * (3.0 / 10.0
            + s * (1.0 / 7.0 + s * (3.0 / 8.0 + s * (9.0 / 22.0 + s * (159.0 / 208.0 + s * (9.0 / 8.0))))));
    Ok(series / a.sqrt())
}

/// Carlson's `R_J(x, y, z, p)` for `p > 0`.
pub fn carlson_rj(x: f64, y: f64, z: f64, p: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 || (x + y).min(x + z).min(y + z) == 0.0 {
        return Err(Error::Domain { what: "carlson_rj", value: x.min(y).min(z) });
    }
    if !(p > 0.0) {
        return Err(Error::Domain { what: "carlson_rj", value: p });
    }
    let (x0, y0, z0) = (x, y, z);
    let a0 = (x + y + z + 2.0 * p) / 5.0;
    let delta = (p - x) * (p - y) * (p - z);
    let q = (0.25 * CARLSON_R).powf(-1.0 / 6.0)
        * max3((a0 - x).abs(), (a0 - y).abs(), (a0 - z).abs()).max((a0 - p).abs());
    let (mut x, mut y, mut z, mut p, mut a) = (x, y, z, p, a0);
    let mut pow4 = 1.0;
    let mut sum = 0.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz, sp) = (x.sqrt(), y.sqrt(), z.sqrt(), p.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        let d = (sp + sx) * (sp + sy) * (sp + sz);
        let e = pow4 * pow4 * pow4 * delta / (d * d);
        sum += pow4 * carlson_rc(1.0, 1.0 + e)? / d;
        a = 0.25 * (a + lam);
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        p = 0.25 * (p + lam);
        pow4 *= 0.25;
    }
    let xx = (a0 - x0) * pow4 / a;
    let yy = (a0 - y0) * pow4 / a;
    let zz = (a0 - z0) * pow4 / a;
    let pp = -(xx + yy + zz) / 2.0;
    let e2 = xx * yy + xx * zz + yy * zz - 3.0 * pp * pp;
    let e3 = xx * yy * zz + 2.0 * e2 * pp + 4.0 * pp * pp * pp;
    let e4 = (2.0 * xx * yy * zz + e2 * pp + 3.0 * pp * pp * pp) * pp;
    let e5 = xx * yy * zz * pp * pp;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    Ok(pow4 * series / (a * a.sqrt()) + 6.0 * sum)
}

/// Incomplete integral of the third kind in algebraic form,
/// `∫₀ˣ dt / ((1 - α²t²) √(1 - t²) √(1 - k²t²))`.
pub fn elliptic_pi_incomplete(x: f64, alpha2: f64, k: EllipticModulus) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain { what: "elliptic_pi_incomplete", value: x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let s2 = x * x;
    let p = 1.0 - alpha2 * s2;
    if !(p > 0.0) {
        return Err(Error::PoleOnPath { at: x.signum() / alpha2.sqrt() });
    }
    let c2 = (1.0 - x) * (1.0 + x);
    let d2 = 1.0 - k.m() * s2;
    if !(d2 > 0.0) || (c2 == 0.0 && d2 == 0.0) {
        return Err(Error::Domain { what: "elliptic_pi_incomplete", value: x });
    }
    let rf = carlson_rf(c2, d2, 1.0)?;
    let rj = if alpha2 == 0.0 { 0.0 } else { carlson_rj(c2, d2, 1.0, p)? };
    Ok(x * rf + alpha2 / 3.0 * x * s2 * rj)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at GK_NODES[1], [3], [5], [7].
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute tolerance of [`antiderivative_along_x`].
pub const QUAD_TOL: f64 = 1e-11;
const QUAD_MAX_DEPTH: u32 = 48;

fn gk15<F: Fn(f64) -> Scalar>(f: &F, a: f64, b: f64) -> Result<(Scalar, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> Result<Scalar> {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularIntegrand { at: t })
        }
    };
    let fc = eval(mid)?;
    let mut kron = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let s = eval(mid - dx)? + eval(mid + dx)?;
        kron += s * GK_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += s * G_WEIGHTS[i / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    Ok((kron, (kron - gauss).norm()))
}

/// `∫_{x0}^{x} integrand(t) dt` by adaptive Gauss-Kronrod (7/15) bisection.
pub fn antiderivative_along_x<F: Fn(f64) -> Scalar>(integrand: F, x0: f64, x: f64) -> Result<Scalar> {
    antiderivative_with_tol(integrand, x0, x, QUAD_TOL)
}

pub fn antiderivative_with_tol<F: Fn(f64) -> Scalar>(integrand: F, x0: f64, x: f64, tol: f64) -> Result<Scalar> {
    if x == x0 {
        return Ok(Scalar::new(0.0, 0.0));
    }
    let total = (x - x0).abs();
    let mut stack: Vec<(f64, f64, u32)> = Vec::with_capacity(64);
    stack.push((x0, x, 0));
    let mut acc = Scalar::new(0.0, 0.0);
    while let Some((a, b, depth)) = stack.pop() {
        let (val, err) = gk15(&integrand, a, b)?;
        let budget = tol * (b - a).abs() / total;
        if err <= budget || depth >= QUAD_MAX_DEPTH {
            acc += val;
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modulus(k: f64) -> EllipticModulus {
        EllipticModulus::new(k).unwrap()
    }

    #[test]
    fn jacobi_at_origin() {
        for k in [0.0, 0.3, 0.5, 0.99, 1.0] {
            let j = jacobi(0.0, modulus(k)).unwrap();
            assert_eq!((j.sn, j.cn, j.dn), (0.0, 1.0, 1.0));
        }
    }

    #[test]
    fn degenerate_moduli() {
        let j = jacobi(1.0, modulus(0.0)).unwrap();
        assert!((j.sn - 0.841_470_984_8).abs() < 1e-10);
        let j = jacobi(1.0, modulus(1.0)).unwrap();
        assert!((j.sn - 0.761_594_156_0).abs() < 1e-10);
    }

    #[test]
    fn modulus_range() {
        assert!(matches!(EllipticModulus::new(1.5), Err(Error::ModulusOutOfRange { .. })));
        assert!(EllipticModulus::new(-0.1).is_err());
        let k = modulus(0.6);
        assert!((k.k() * k.k() + k.kp() * k.kp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complete_k_known_values() {
        assert!((complete_k(modulus(0.0)) - FRAC_PI_2).abs() < 1e-15);
        // K(1/√2) = Γ(1/4)² / (4√π)
        let k = complete_k(modulus(core::f64::consts::FRAC_1_SQRT_2));
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn carlson_reference_values() {
        // Carlson (1995) test values.
        assert!((carlson_rf(1.0, 2.0, 0.0).unwrap() - 1.311_028_777_146_06).abs() < 1e-13);
        assert!((carlson_rc(0.0, 0.25).unwrap() - core::f64::consts::PI).abs() < 1e-14);
        assert!((carlson_rj(0.0, 1.0, 2.0, 3.0).unwrap() - 0.776_886_237_785_82).abs() < 1e-13);
        assert!((carlson_rj(2.0, 3.0, 4.0, 5.0).unwrap() - 0.142_975_796_671_57).abs() < 1e-13);
        assert!((carlson_rc(2.25, 2.0).unwrap() - core::f64::consts::LN_2).abs() < 1e-14);
    }

    #[test]
    fn pi_trivial_cases() {
        assert_eq!(elliptic_pi_incomplete(0.0, 0.7, modulus(0.3)).unwrap(), 0.0);
        let v = elliptic_pi_incomplete(0.5, 0.0, modulus(0.0)).unwrap();
        assert!((v - core::f64::consts::PI / 6.0).abs() < 1e-14);
    }

    #[test]
    fn pi_pole_on_path() {
        assert!(matches!(
            elliptic_pi_incomplete(0.8, 4.0, modulus(0.5)),
            Err(Error::PoleOnPath { .. })
        ));
    }

    #[test]
    fn quadrature_constant_and_reversal() {
        let c = |_t: f64| Scalar::new(3.0, -1.0);
        let v = antiderivative_along_x(c, 0.0, 1.0).unwrap();
        assert!((v - Scalar::new(3.0, -1.0)).norm() < 1e-14);
        let f = |t: f64| Scalar::new((t * 3.0).sin(), 0.0);
        let fwd = antiderivative_along_x(f, 0.2, 1.7).unwrap();
        let back = antiderivative_along_x(f, 1.7, 0.2).unwrap();
        assert!((fwd + back).norm() < 1e-12);
    }

    #[test]
    fn quadrature_reports_singularity() {
        let f = |t: f64| Scalar::new(1.0 / (t - 0.5), 0.0);
        // 0.5 is the midpoint of [0, 1]: the first Kronrod sample hits the pole.
        assert!(matches!(antiderivative_along_x(f, 0.0, 1.0), Err(Error::SingularIntegrand { at }) if at == 0.5));
    }
}
