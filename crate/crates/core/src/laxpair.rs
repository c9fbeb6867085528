//! Potential matrices of the Lax pair, their derivatives along solutions and
//! in the spectral parameter, and the residuals that certify them.
//!
//! Both matrices are driven by one scalar function
//! `P(u, λ) = (f(u) - g(λ)) / (u + λ)`:
//!
//! ```text
//! L = ½ [[0, ∂P/∂u], [1, 0]],    M = [[u_x, -P], [u + λ, -u_x]]
//! ```
//!
//! For the elliptic quartic `P = (u - λ)(k₂ - k₁ - k₂(u² + λ²))` is a cubic
//! polynomial; otherwise it is evaluated through the quotient rule.

use crate::algebra::{re, Scalar, Sl2Matrix};
use crate::error::{Error, Result};
use crate::model::{JetPoint, ModelSpec};

/// Smallest `|u + λ|` the rational form accepts.
pub const DENOMINATOR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LaxForm {
    /// Cubic polynomial entries; only for the elliptic family.
    Polynomial,
    /// Rational entries valid for any `f`, singular at `u = -λ`.
    General,
}

#[derive(Clone, Debug)]
pub struct SpectralContext {
    lambda: f64,
    g: Scalar,
    sqrt_g: Scalar,
    model: ModelSpec,
    form: LaxForm,
}

impl SpectralContext {
    /// Uses the polynomial form whenever the model admits it.
    pub fn new(model: ModelSpec, lambda: f64) -> Result<Self> {
        let form = if model.constants().is_some() { LaxForm::Polynomial } else { LaxForm::General };
        Self::with_form(model, lambda, form)
    }

    pub fn with_form(model: ModelSpec, lambda: f64, form: LaxForm) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Domain { what: "spectral parameter", value: lambda });
        }
        if form == LaxForm::Polynomial && model.constants().is_none() {
            return Err(Error::Invalid("polynomial Lax form needs an elliptic model"));
        }
        let g = re(model.discriminant(lambda));
        Ok(Self { lambda, g, sqrt_g: g.sqrt(), model, form })
    }

    /// Same model and form at another spectral parameter.
    pub fn at_lambda(&self, lambda: f64) -> Result<Self> {
        Self::with_form(self.model.clone(), lambda, self.form)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The discriminant `g(λ) = f(-λ)`.
    pub fn g(&self) -> Scalar {
        self.g
    }

    /// Principal root: nonnegative real part, `+i√|g|` for `g < 0`.
    pub fn sqrt_g(&self) -> Scalar {
        self.sqrt_g
    }

    pub fn epsilon(&self) -> f64 {
        self.model.epsilon()
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn form(&self) -> LaxForm {
        self.form
    }

    pub fn jet(&self, x: f64) -> Result<JetPoint> {
        self.model.jet(x)
    }

    fn potential(&self, u: f64) -> Result<Potential> {
        let lam = self.lambda;
        match (self.form, self.model.constants()) {
            (LaxForm::Polynomial, Some((k1, k2))) => {
                let c = k2 - k1;
                Ok(Potential {
                    p: (u - lam) * (c - k2 * (u * u + lam * lam)),
                    pu: c - 3.0 * k2 * u * u + 2.0 * k2 * lam * u - k2 * lam * lam,
                    puu: -6.0 * k2 * u + 2.0 * k2 * lam,
                    puuu: -6.0 * k2,
                    pl: -c + k2 * u * u - 2.0 * k2 * u * lam + 3.0 * k2 * lam * lam,
                    pul: 2.0 * k2 * (u - lam),
                    puul: 2.0 * k2,
                })
            }
            _ => {
                let s = u + lam;
                if s.abs() < DENOMINATOR_TOL {
                    return Err(Error::SingularDenominator { x: f64::NAN, value: s });
                }
                let m = &self.model;
                let d = m.f(u) - self.g.re;
                let (f1, f2, f3) = (m.df(u), m.d2f(u), m.d3f(u));
                let g1 = m.discriminant_derivative(lam);
                let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
                Ok(Potential {
                    p: d / s,
                    pu: f1 / s - d / s2,
                    puu: f2 / s - 2.0 * f1 / s2 + 2.0 * d / s3,
                    puuu: f3 / s - 3.0 * f2 / s2 + 6.0 * f1 / s3 - 6.0 * d / s4,
                    pl: -g1 / s - d / s2,
                    pul: -(f1 - g1) / s2 + 2.0 * d / s3,
                    puul: -f2 / s2 + (4.0 * f1 - 2.0 * g1) / s3 - 6.0 * d / s4,
                })
            }
        }
    }

    /// L, M and every derivative the immersion and geometry stages need.
    pub fn lax_jet(&self, jet: &JetPoint) -> Result<LaxJet> {
        let p = self.potential(jet.u).map_err(|e| with_x(e, jet.x))?;
        let (ux, uxx, uxxx) = (jet.u_x, jet.u_xx, jet.u_xxx);
        let half = 0.5;
        let off = |v: f64| Sl2Matrix::real(0.0, v, 0.0);
        Ok(LaxJet {
            jet: *jet,
            l: Sl2Matrix::real(0.0, half * p.pu, half),
            m: Sl2Matrix::real(ux, -p.p, jet.u + self.lambda),
            dx_l: off(half * p.puu * ux),
            dx_m: Sl2Matrix::real(uxx, -p.pu * ux, ux),
            dxx_l: off(half * (p.puuu * ux * ux + p.puu * uxx)),
            dxx_m: Sl2Matrix::real(uxxx, -(p.puu * ux * ux + p.pu * uxx), uxx),
            dl_l: off(half * p.pul),
            dl_m: Sl2Matrix::real(0.0, -p.pl, 1.0),
            dx_dl_l: off(half * p.puul * ux),
            dx_dl_m: off(-p.pul * ux),
        })
    }

    pub fn build_l(&self, jet: &JetPoint) -> Result<Sl2Matrix> {
        Ok(self.lax_jet(jet)?.l)
    }

    pub fn build_m(&self, jet: &JetPoint) -> Result<Sl2Matrix> {
        Ok(self.lax_jet(jet)?.m)
    }
}

fn with_x(e: Error, x: f64) -> Error {
    match e {
        Error::SingularDenominator { value, .. } => Error::SingularDenominator { x, value },
        other => other,
    }
}

/// `P` and its partial derivatives at one `(u, λ)`.
#[derive(Clone, Copy, Debug)]
struct Potential {
    p: f64,
    pu: f64,
    puu: f64,
    puuu: f64,
    pl: f64,
    pul: f64,
    puul: f64,
}

/// Potential matrices at a jet with their analytic `x` and `λ` derivatives.
#[derive(Clone, Copy, Debug)]
pub struct LaxJet {
    pub jet: JetPoint,
    pub l: Sl2Matrix,
    pub m: Sl2Matrix,
    pub dx_l: Sl2Matrix,
    pub dx_m: Sl2Matrix,
    pub dxx_l: Sl2Matrix,
    pub dxx_m: Sl2Matrix,
    /// `∂L/∂λ`.
    pub dl_l: Sl2Matrix,
    /// `∂M/∂λ`.
    pub dl_m: Sl2Matrix,
    pub dx_dl_l: Sl2Matrix,
    pub dx_dl_m: Sl2Matrix,
}

impl LaxJet {
    /// `D_x M + [M, L]`.
    pub fn lax_residual(&self) -> Sl2Matrix {
        self.dx_m + crate::algebra::commutator(&self.m, &self.l)
    }
}

/// The `(1,2)` entry of L exactly as displayed for the elliptic family, with
/// `k₁ - k₂` where the Lax equation requires `k₂ - k₁`.
pub fn l12_as_printed(k1: f64, k2: f64, lambda: f64, u: f64) -> f64 {
    0.5 * (-3.0 * k2 * u * u + 2.0 * lambda * k2 * u + k1 - k2 - k2 * lambda * lambda)
}

/// `D_x M + [M, L]` at `x`, with `D_x M` from the chain rule.
pub fn compatibility_residual(ctx: &SpectralContext, x: f64) -> Result<Sl2Matrix> {
    Ok(ctx.lax_jet(&ctx.jet(x)?)?.lax_residual())
}

/// Characteristic of an evolutionary vector field `Q ∂/∂u`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Characteristic {
    /// `Q = u_x`, the translation symmetry.
    Ux,
    /// `Q = a u_x + b u`; only its determining residual is supported.
    Linear { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    L,
    M,
}

/// `pr v_Q` applied to L or M. For `Q = u_x` this is
/// `u_x ∂/∂u + u_xx ∂/∂u_x`, i.e. the total derivative of an `x`-free matrix.
pub fn prolong_apply(q: Characteristic, target: Target, jet: &JetPoint, ctx: &SpectralContext) -> Result<Sl2Matrix> {
    if q != Characteristic::Ux {
        return Err(Error::UnsupportedCharacteristic);
    }
    let lj = ctx.lax_jet(jet)?;
    Ok(match target {
        Target::L => lj.dx_l,
        Target::M => lj.dx_m,
    })
}

/// `D_x² Q - ½ f''(u) Q` on the solution jet.
pub fn determining_residual(model: &ModelSpec, q: Characteristic, x: f64) -> Result<f64> {
    let j = model.jet(x)?;
    let (a, b) = match q {
        Characteristic::Ux => (1.0, 0.0),
        Characteristic::Linear { a, b } => (a, b),
    };
    let q_val = a * j.u_x + b * j.u;
    let q_xx = a * j.u_xxx + b * j.u_xx;
    Ok(q_xx - 0.5 * model.d2f(j.u) * q_val)
}
