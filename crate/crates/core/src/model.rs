//! The autonomous ODE `u_xx = f'(u)/2`, its first integral `u_x² = f(u)`, and
//! solution jets for the Jacobi elliptic family or a user-supplied `f`.

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use alloc::sync::Arc;
use core::fmt;

use crate::algebra::Scalar;
use crate::error::{Error, Result};
use crate::special::{antiderivative_along_x, jacobi, EllipticModulus};

/// Tolerance of the jet invariants, relative to `1 + |f|` resp. `1 + |f'|`.
pub const JET_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EllipticKind {
    Sn,
    Cn,
    Dn,
}

impl EllipticKind {
    pub fn name(self) -> &'static str {
        match self {
            EllipticKind::Sn => "sn",
            EllipticKind::Cn => "cn",
            EllipticKind::Dn => "dn",
        }
    }
}

/// A potential `f` with the solution it generates, for models outside the
/// elliptic family. `f` must already contain the integration constant.
pub trait CustomPotential: Send + Sync {
    fn f(&self, u: f64) -> f64;
    fn df(&self, u: f64) -> f64;
    fn d2f(&self, u: f64) -> f64;
    fn d3f(&self, u: f64) -> f64;
    /// `(u(x), u_x(x))`.
    fn solution(&self, x: f64) -> (f64, f64);
}

#[derive(Clone)]
pub enum Family {
    /// `f(u) = (1 - u²)(k₁ + k₂u²)`, solved by `sn`, `cn` or `dn`.
    Elliptic { kind: EllipticKind, k: EllipticModulus, k1: f64, k2: f64 },
    Custom { potential: Arc<dyn CustomPotential>, x0: f64 },
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Elliptic { kind, k, k1, k2 } => f
                .debug_struct("Elliptic")
                .field("kind", kind)
                .field("k", &k.k())
                .field("k1", k1)
                .field("k2", k2)
                .finish(),
            Family::Custom { x0, .. } => f.debug_struct("Custom").field("x0", x0).finish_non_exhaustive(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    family: Family,
    epsilon: f64,
}

impl ModelSpec {
    /// Elliptic model with the `(k₁, k₂)` pair fixed by the kind:
    /// sn ↦ `(1, -k²)`, cn ↦ `(k'², k²)`, dn ↦ `(-k'², 1)`.
    ///
    /// The solution is `u(x) = U(εx)` with `U` the chosen Jacobi function.
    pub fn elliptic(kind: EllipticKind, k: f64, epsilon: f64) -> Result<Self> {
        let k = EllipticModulus::new(k)?;
        let epsilon = check_epsilon(epsilon)?;
        let (m, mp) = (k.m(), k.kp() * k.kp());
        let (k1, k2) = match kind {
            EllipticKind::Sn => (1.0, -m),
            EllipticKind::Cn => (mp, m),
            EllipticKind::Dn => (-mp, 1.0),
        };
        Ok(Self { family: Family::Elliptic { kind, k, k1, k2 }, epsilon })
    }

    pub fn custom(potential: Arc<dyn CustomPotential>, x0: f64, epsilon: f64) -> Result<Self> {
        Ok(Self { family: Family::Custom { potential, x0 }, epsilon: check_epsilon(epsilon)? })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kind(&self) -> Option<EllipticKind> {
        match self.family {
            Family::Elliptic { kind, .. } => Some(kind),
            Family::Custom { .. } => None,
        }
    }

    pub fn modulus(&self) -> Option<EllipticModulus> {
        match self.family {
            Family::Elliptic { k, .. } => Some(k),
            Family::Custom { .. } => None,
        }
    }

    /// `(k₁, k₂)` for the elliptic family.
    pub fn constants(&self) -> Option<(f64, f64)> {
        match self.family {
            Family::Elliptic { k1, k2, .. } => Some((k1, k2)),
            Family::Custom { .. } => None,
        }
    }

    /// Base point of the solution: 0 for the elliptic family.
    pub fn x0(&self) -> f64 {
        match self.family {
            Family::Elliptic { .. } => 0.0,
            Family::Custom { x0, .. } => x0,
        }
    }

    /// Coefficients of `f` in powers `1, u, …, u⁴` when it is the elliptic quartic.
    pub fn quartic_coeffs(&self) -> Option<[f64; 5]> {
        self.constants().map(|(k1, k2)| [k1, 0.0, k2 - k1, 0.0, -k2])
    }

    pub fn f(&self, u: f64) -> f64 {
        match &self.family {
            Family::Elliptic { k1, k2, .. } => (1.0 - u * u) * (k1 + k2 * u * u),
            Family::Custom { potential, .. } => potential.f(u),
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        match &self.family {
            Family::Elliptic { k1, k2, .. } => 2.0 * (k2 - k1) * u - 4.0 * k2 * u * u * u,
            Family::Custom { potential, .. } => potential.df(u),
        }
    }

    pub fn d2f(&self, u: f64) -> f64 {
        match &self.family {
            Family::Elliptic { k1, k2, .. } => 2.0 * (k2 - k1) - 12.0 * k2 * u * u,
            Family::Custom { potential, .. } => potential.d2f(u),
        }
    }

    pub fn d3f(&self, u: f64) -> f64 {
        match &self.family {
            Family::Elliptic { k2, .. } => -24.0 * k2 * u,
            Family::Custom { potential, .. } => potential.d3f(u),
        }
    }

    /// The discriminant `g(λ) = f(-λ)`.
    pub fn discriminant(&self, lambda: f64) -> f64 {
        self.f(-lambda)
    }

    /// `g'(λ) = -f'(-λ)`.
    pub fn discriminant_derivative(&self, lambda: f64) -> f64 {
        -self.df(-lambda)
    }

    /// Evaluates the solution and its derivatives up to third order at `x`.
    pub fn jet(&self, x: f64) -> Result<JetPoint> {
        let (u, u_x) = match &self.family {
            Family::Elliptic { kind, k, .. } => {
                let j = jacobi(self.epsilon * x, *k)?;
                let (u, du) = match kind {
                    EllipticKind::Sn => (j.sn, j.cn * j.dn),
                    EllipticKind::Cn => (j.cn, -j.sn * j.dn),
                    EllipticKind::Dn => (j.dn, -k.m() * j.sn * j.cn),
                };
                (u, self.epsilon * du)
            }
            Family::Custom { potential, .. } => {
                let (u, u_x) = potential.solution(x);
                let f = potential.f(u);
                let residual = u_x * u_x - f;
                if !(residual.abs() <= JET_TOL * (1.0 + f.abs())) {
                    return Err(Error::ModelInconsistent { x, residual });
                }
                (u, u_x)
            }
        };
        let u_xx = 0.5 * self.df(u);
        let u_xxx = 0.5 * self.d2f(u) * u_x;
        Ok(JetPoint { x, u, u_x, u_xx, u_xxx })
    }

    pub fn first_integral_residual(&self, jet: &JetPoint) -> f64 {
        first_integral_residual(self, jet)
    }
}

fn check_epsilon(epsilon: f64) -> Result<f64> {
    if epsilon == 1.0 || epsilon == -1.0 {
        Ok(epsilon)
    } else {
        Err(Error::Invalid("epsilon must be +1 or -1"))
    }
}

/// Solution state `(x, u, u_x, u_xx)` plus `u_xxx = f''(u) u_x / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetPoint {
    pub x: f64,
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_xxx: f64,
}

/// `u_x² - f(u)`, zero on solutions.
pub fn first_integral_residual(model: &ModelSpec, jet: &JetPoint) -> f64 {
    jet.u_x * jet.u_x - model.f(jet.u)
}

/// `u_xx - f'(u)/2`, zero on solutions.
pub fn equation_residual(model: &ModelSpec, jet: &JetPoint) -> f64 {
    jet.u_xx - 0.5 * model.df(jet.u)
}

const TURNING_SAMPLES: usize = 64;

/// Deviation of `∫_{u(x0)}^{u(x)} du / √f(u)` from `σ (x - x0)`, where σ is
/// the (constant) sign of `u_x` on the interval; σ = ε on the principal branch.
pub fn integral_solution_check(model: &ModelSpec, x0: f64, x: f64) -> Result<f64> {
    if x == x0 {
        return Ok(0.0);
    }
    let start = model.jet(x0)?;
    let sigma = start.u_x.signum();
    for i in 0..=TURNING_SAMPLES {
        let t = x0 + (x - x0) * i as f64 / TURNING_SAMPLES as f64;
        let j = model.jet(t)?;
        if j.u_x.abs() < 1e-10 || j.u_x.signum() != sigma {
            return Err(Error::TurningPoint { at: t });
        }
    }
    let end = model.jet(x)?;
    let integral = antiderivative_along_x(|u| Scalar::new(1.0 / model.f(u).sqrt(), 0.0), start.u, end.u)?;
    Ok(integral.re - sigma * (x - x0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_constants() {
        let k = 0.6f64;
        let kp2 = 1.0 - k * k;
        let sn = ModelSpec::elliptic(EllipticKind::Sn, k, 1.0).unwrap();
        let cn = ModelSpec::elliptic(EllipticKind::Cn, k, 1.0).unwrap();
        let dn = ModelSpec::elliptic(EllipticKind::Dn, k, 1.0).unwrap();
        assert_eq!(sn.constants(), Some((1.0, -k * k)));
        let (c1, c2) = cn.constants().unwrap();
        assert!((c1 - kp2).abs() < 1e-15 && c2 == k * k);
        let (d1, d2) = dn.constants().unwrap();
        assert!((d1 + kp2).abs() < 1e-15 && d2 == 1.0);
    }

    #[test]
    fn sn_jet_at_origin() {
        let m = ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap();
        let j = m.jet(0.0).unwrap();
        assert_eq!((j.u, j.u_x, j.u_xx), (0.0, 1.0, 0.0));
        assert_eq!(first_integral_residual(&m, &j), 0.0);
    }

    #[test]
    fn dn_jet_at_origin() {
        let m = ModelSpec::elliptic(EllipticKind::Dn, 0.5, 1.0).unwrap();
        let j = m.jet(0.0).unwrap();
        assert_eq!(j.u, 1.0);
        assert_eq!(j.u_x, 0.0);
        assert!((j.u_xx + 0.25).abs() < 1e-15);
    }

    #[test]
    fn residuals_on_shell() {
        let m = ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap();
        let j = m.jet(0.7).unwrap();
        assert!(first_integral_residual(&m, &j).abs() < 1e-10);
        let c = ModelSpec::elliptic(EllipticKind::Cn, 0.6, 1.0).unwrap();
        let j = c.jet(1.1).unwrap();
        assert!(first_integral_residual(&c, &j).abs() < 1e-10);
        assert!(equation_residual(&c, &j).abs() < 1e-12);
    }

    #[test]
    fn corrupted_jet_is_flagged() {
        let m = ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap();
        let mut j = m.jet(0.3).unwrap();
        let clean = first_integral_residual(&m, &j);
        j.u_x += 1e-3;
        let r = first_integral_residual(&m, &j) - clean;
        assert!((r - 2.0 * (j.u_x - 1e-3) * 1e-3).abs() < 2e-6);
    }

    #[test]
    fn quadrature_inverts_solution() {
        let m = ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap();
        assert_eq!(integral_solution_check(&m, 0.3, 0.3).unwrap(), 0.0);
        assert!(integral_solution_check(&m, 0.0, 0.5).unwrap().abs() < 1e-8);
        let back = ModelSpec::elliptic(EllipticKind::Sn, 0.5, -1.0).unwrap();
        assert!(integral_solution_check(&back, 0.0, 0.5).unwrap().abs() < 1e-8);
    }

    #[test]
    fn turning_point_detected() {
        let m = ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap();
        // sn reaches 1 at x = K(0.5) ≈ 1.686.
        assert!(matches!(integral_solution_check(&m, 0.0, 2.5), Err(Error::TurningPoint { .. })));
    }

    #[test]
    fn discriminant_is_reflected_potential() {
        let m = ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap();
        assert!((m.discriminant(0.5) - 0.703_125).abs() < 1e-15);
        assert!((m.discriminant(1.2) + 0.281_6).abs() < 1e-15);
        assert_eq!(m.discriminant(1.0), 0.0);
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(ModelSpec::elliptic(EllipticKind::Sn, 0.5, 0.5).is_err());
    }

    struct Harmonic;

    impl CustomPotential for Harmonic {
        // u = sin x solves u_x² = 1 - u².
        fn f(&self, u: f64) -> f64 {
            1.0 - u * u
        }
        fn df(&self, u: f64) -> f64 {
            -2.0 * u
        }
        fn d2f(&self, _u: f64) -> f64 {
            -2.0
        }
        fn d3f(&self, _u: f64) -> f64 {
            0.0
        }
        fn solution(&self, x: f64) -> (f64, f64) {
            (x.sin(), x.cos())
        }
    }

    struct Broken;

    impl CustomPotential for Broken {
        fn f(&self, _u: f64) -> f64 {
            1.0
        }
        fn df(&self, _u: f64) -> f64 {
            0.0
        }
        fn d2f(&self, _u: f64) -> f64 {
            0.0
        }
        fn d3f(&self, _u: f64) -> f64 {
            0.0
        }
        fn solution(&self, x: f64) -> (f64, f64) {
            (x, 2.0)
        }
    }

    #[test]
    fn custom_models() {
        let m = ModelSpec::custom(Arc::new(Harmonic), 0.0, 1.0).unwrap();
        let j = m.jet(0.4).unwrap();
        assert!((j.u_xx + 0.4f64.sin()).abs() < 1e-15);
        let bad = ModelSpec::custom(Arc::new(Broken), 0.0, 1.0).unwrap();
        assert!(matches!(bad.jet(0.1), Err(Error::ModelInconsistent { .. })));
    }
}
