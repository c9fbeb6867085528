//! The wave function Φ solving `D_xΦ = LΦ`, `D_yΦ = MΦ` with `Φ(0,0) = 1`.
//!
//! Numerical integration of the linear spectral problem is authoritative.
//! Closed forms built from the scalar factors
//!
//! ```text
//! Ψ± = exp[±√g (y + ∫₀ˣ dx / (2(u + λ)))]
//! ```
//!
//! are provided in several assemblies for cross-checking.

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use crate::algebra::{GroupElement, Mat2, Scalar};
use crate::error::{Error, Result};
use crate::laxpair::{LaxForm, SpectralContext};
use crate::ode::{integrate, OdeOptions};
use crate::special::{antiderivative_along_x, elliptic_pi_incomplete, EllipticModulus};

/// `|g|` below which the closed forms are rejected.
pub const SPECTRUM_TOL: f64 = 1e-12;
/// Step of the λ finite difference.
pub const LAMBDA_STEP: f64 = 1e-5;
/// Step of the residual stencils.
pub const RESIDUAL_STEP: f64 = 1e-3;
/// Samples used to screen `u + λ` for sign changes along `[0, x]`.
const SCREEN_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Route {
    ClosedForm,
    Integrated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PathOrder {
    /// Along `y` at `x = 0`, then along `x`.
    YThenX,
    /// Along `x` at `y = 0`, then along `y`.
    XThenY,
}

#[derive(Clone, Copy, Debug)]
pub struct WaveFrame {
    pub x: f64,
    pub y: f64,
    pub phi: GroupElement,
    pub route: Route,
    /// Max-abs entry of `D_xΦ - LΦ`.
    pub lsp_residual_x: f64,
    /// Max-abs entry of `D_yΦ - MΦ`.
    pub lsp_residual_y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

/// Integrates the linear spectral problem, optionally together with `∂Φ/∂λ`.
#[derive(Clone, Debug)]
pub struct WaveSolver {
    ctx: SpectralContext,
    opts: OdeOptions,
}

impl WaveSolver {
    pub fn new(ctx: SpectralContext) -> Self {
        Self { ctx, opts: OdeOptions::default() }
    }

    pub fn with_options(ctx: SpectralContext, opts: OdeOptions) -> Self {
        Self { ctx, opts }
    }

    pub fn context(&self) -> &SpectralContext {
        &self.ctx
    }

    /// Advances `[Φ]` or `[Φ, Φ_λ]` along `x` at any fixed `y`.
    pub fn propagate_x<const N: usize>(&self, x0: f64, x1: f64, state: [Mat2; N]) -> Result<[Mat2; N]> {
        let field = |x: f64, s: &[Mat2; N]| -> Result<[Mat2; N]> {
            let lj = self.ctx.lax_jet(&self.ctx.jet(x)?)?;
            Ok(apply(lj.l.mat(), lj.dl_l.mat(), s))
        };
        match integrate(field, x0, x1, state, &self.opts) {
            Ok((s, _)) => Ok(s),
            Err(Error::StepSizeUnderflow { at }) if self.ctx.form() == LaxForm::General => {
                let u = self.ctx.jet(at).map(|j| j.u).unwrap_or(f64::NAN);
                Err(Error::SingularDenominator { x: at, value: u + self.ctx.lambda() })
            }
            Err(e) => Err(e),
        }
    }

    /// Advances `[Φ]` or `[Φ, Φ_λ]` along `y` at fixed `x`.
    pub fn propagate_y<const N: usize>(&self, x: f64, y0: f64, y1: f64, state: [Mat2; N]) -> Result<[Mat2; N]> {
        let lj = self.ctx.lax_jet(&self.ctx.jet(x)?)?;
        let (m, dm) = (*lj.m.mat(), *lj.dl_m.mat());
        Ok(integrate(|_, s: &[Mat2; N]| Ok(apply(&m, &dm, s)), y0, y1, state, &self.opts)?.0)
    }

    fn propagate<const N: usize>(&self, axis: Axis, x: f64, from: f64, to: f64, state: [Mat2; N]) -> Result<[Mat2; N]> {
        match axis {
            Axis::X => self.propagate_x(from, to, state),
            Axis::Y => self.propagate_y(x, from, to, state),
        }
    }

    /// `[Φ(x, y)]` or `[Φ, Φ_λ]` from the identity at the origin.
    pub fn solve<const N: usize>(&self, x: f64, y: f64, order: PathOrder) -> Result<[Mat2; N]> {
        let mut s = [Mat2::zero(); N];
        s[0] = Mat2::identity();
        Ok(match order {
            PathOrder::YThenX => self.propagate_x(0.0, x, self.propagate_y(0.0, 0.0, y, s)?)?,
            PathOrder::XThenY => self.propagate_y(x, 0.0, y, self.propagate_x(0.0, x, s)?)?,
        })
    }

    /// Five-point derivative of Φ along an axis by local propagation from `phi`.
    fn local_derivative(&self, axis: Axis, x: f64, y: f64, phi: &Mat2) -> Result<Mat2> {
        let h = RESIDUAL_STEP;
        let at = if axis == Axis::X { x } else { y };
        let mut v = [Mat2::zero(); 4];
        for (slot, off) in v.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
            *slot = self.propagate(axis, x, at, at + off * h, [*phi])?[0];
        }
        Ok((v[0] - v[1] * 8.0 + v[2] * 8.0 - v[3]) * (1.0 / (12.0 * h)))
    }

    /// LSP residuals of an arbitrary frame at `(x, y)`.
    fn lsp_residuals<F: Fn(f64, f64) -> Result<Mat2>>(&self, x: f64, y: f64, phi: &Mat2, eval: F) -> Result<(f64, f64)> {
        let lj = self.ctx.lax_jet(&self.ctx.jet(x)?)?;
        let h = RESIDUAL_STEP;
        let d = |a: Mat2, b: Mat2, c: Mat2, e: Mat2| (a - b * 8.0 + c * 8.0 - e) * (1.0 / (12.0 * h));
        let dx = d(eval(x - 2.0 * h, y)?, eval(x - h, y)?, eval(x + h, y)?, eval(x + 2.0 * h, y)?);
        let dy = d(eval(x, y - 2.0 * h)?, eval(x, y - h)?, eval(x, y + h)?, eval(x, y + 2.0 * h)?);
        Ok(((dx - *lj.l.mat() * *phi).max_abs(), (dy - *lj.m.mat() * *phi).max_abs()))
    }

    /// Integrated frame with its residuals measured by local propagation.
    pub fn frame(&self, x: f64, y: f64, order: PathOrder) -> Result<WaveFrame> {
        let phi = self.solve::<1>(x, y, order)?[0];
        let lj = self.ctx.lax_jet(&self.ctx.jet(x)?)?;
        let rx = (self.local_derivative(Axis::X, x, y, &phi)? - *lj.l.mat() * phi).max_abs();
        let ry = (self.local_derivative(Axis::Y, x, y, &phi)? - *lj.m.mat() * phi).max_abs();
        Ok(WaveFrame { x, y, phi: GroupElement::new(phi)?, route: Route::Integrated, lsp_residual_x: rx, lsp_residual_y: ry })
    }
}

fn apply<const N: usize>(gen: &Mat2, dgen: &Mat2, s: &[Mat2; N]) -> [Mat2; N] {
    let mut out = [Mat2::zero(); N];
    out[0] = *gen * s[0];
    if N > 1 {
        out[1] = *dgen * s[0] + *gen * s[1];
    }
    out
}

/// Integrated frame along the default path order.
pub fn phi_integrated(x: f64, y: f64, ctx: &SpectralContext) -> Result<WaveFrame> {
    WaveSolver::new(ctx.clone()).frame(x, y, PathOrder::YThenX)
}

/// `∂Φ/∂λ` together with an error estimate.
#[derive(Clone, Copy, Debug)]
pub struct LambdaDerivative {
    pub value: Mat2,
    pub error: f64,
}

/// Central difference in λ on the integrated frame, Richardson-extrapolated.
pub fn lambda_derivative(ctx: &SpectralContext, x: f64, y: f64) -> Result<LambdaDerivative> {
    let lam = ctx.lambda();
    let h = LAMBDA_STEP;
    let g0 = ctx.g().re;
    let (lo, hi) = (ctx.at_lambda(lam - h)?, ctx.at_lambda(lam + h)?);
    if g0 == 0.0 || lo.g().re.signum() != g0.signum() || hi.g().re.signum() != g0.signum() {
        return Err(Error::BranchCrossing { lo: lam - h, hi: lam + h });
    }
    let phi = |c: &SpectralContext| WaveSolver::new(c.clone()).solve::<1>(x, y, PathOrder::YThenX).map(|s| s[0]);
    let d1 = (phi(&hi)? - phi(&lo)?) * (0.5 / h);
    let d2 = (phi(&ctx.at_lambda(lam + 0.5 * h)?)? - phi(&ctx.at_lambda(lam - 0.5 * h)?)?) * (1.0 / h);
    let value = (d2 * 4.0 - d1) * (1.0 / 3.0);
    Ok(LambdaDerivative { value, error: (value - d2).max_abs() })
}

/// Finds a sign change of `u + λ` on `[0, x]`, to bisection accuracy.
fn screen_crossing(ctx: &SpectralContext, x: f64) -> Result<Option<f64>> {
    let s = |t: f64| ctx.jet(t).map(|j| j.u + ctx.lambda());
    let mut prev_t = 0.0;
    let mut prev = s(0.0)?;
    if prev == 0.0 {
        return Ok(Some(0.0));
    }
    for i in 1..=SCREEN_SAMPLES {
        let t = x * i as f64 / SCREEN_SAMPLES as f64;
        let cur = s(t)?;
        if cur == 0.0 || cur.signum() != prev.signum() {
            let (mut a, mut b) = (prev_t, t);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if s(mid)?.signum() == prev.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        prev_t = t;
        prev = cur;
    }
    Ok(None)
}

/// `∫₀ˣ dx / (2(u + λ))` by adaptive quadrature.
pub fn phase_integral(ctx: &SpectralContext, x: f64) -> Result<f64> {
    if let Some(at) = screen_crossing(ctx, x)? {
        return Err(Error::SingularIntegrand { at });
    }
    let integrand = |t: f64| match ctx.jet(t) {
        Ok(j) => Scalar::new(0.5 / (j.u + ctx.lambda()), 0.0),
        Err(_) => Scalar::new(f64::NAN, 0.0),
    };
    Ok(antiderivative_along_x(integrand, 0.0, x)?.re)
}

/// `(Ψ₊, Ψ₋)` with the `x`-integral from quadrature.
pub fn psi_pm(x: f64, y: f64, ctx: &SpectralContext) -> Result<(Scalar, Scalar)> {
    let arg = ctx.sqrt_g() * (y + phase_integral(ctx, x)?);
    Ok((arg.exp(), (-arg).exp()))
}

/// Readings of the closed-form phase for the `sn` model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PsiVariant {
    /// Literal display: ratio coefficient `k₂ - k₂ - 2k₂λ²`, prefactor `ε/(λ√k₁)`, power `∓ε/4`.
    AsPrinted,
    /// Ratio coefficient read as `k₂ - k₁ - 2k₂λ²`, otherwise literal.
    K1Corrected,
    /// Corrected coefficient with prefactor `ε/(2λ√k₁)` and power `∓ε/8`,
    /// which is what integrating `1/(2(u+λ))` in closed form produces.
    Rederived,
}

impl PsiVariant {
    pub const ALL: [PsiVariant; 3] = [PsiVariant::AsPrinted, PsiVariant::K1Corrected, PsiVariant::Rederived];

    pub fn name(self) -> &'static str {
        match self {
            PsiVariant::AsPrinted => "as_printed",
            PsiVariant::K1Corrected => "k1_corrected",
            PsiVariant::Rederived => "rederived",
        }
    }
}

/// `(Ψ₊, Ψ₋)` from the elliptic integral of the third kind, normalized so
/// that `Ψ±(0, 0) = 1`.
///
/// Valid for the `sn` model while `u` stays monotone on `[0, x]` and
/// `|u| < |λ|`.
pub fn psi_pm_closed(x: f64, y: f64, ctx: &SpectralContext, variant: PsiVariant) -> Result<(Scalar, Scalar)> {
    let model = ctx.model();
    let (k1, k2) = match (model.kind(), model.constants()) {
        (Some(crate::model::EllipticKind::Sn), Some(c)) => c,
        _ => return Err(Error::Invalid("closed-form phase is only real for the sn model")),
    };
    let lam = ctx.lambda();
    if lam == 0.0 {
        return Err(Error::Domain { what: "closed-form phase (lambda)", value: lam });
    }
    if ctx.g().norm() < SPECTRUM_TOL {
        return Err(Error::DegenerateSpectrum { g: ctx.g().re });
    }
    let quarter = crate::special::complete_k(model.modulus().unwrap_or(EllipticModulus::new(0.0)?));
    if x.abs() >= quarter {
        return Err(Error::TurningPoint { at: quarter.copysign(x) });
    }
    let eps = ctx.epsilon();
    let u = ctx.jet(x)?.u;
    if u.abs() >= lam.abs() {
        return Err(Error::PoleOnPath { at: lam.abs().copysign(u) });
    }
    let modulus = EllipticModulus::new((-k2 / k1).sqrt())?;
    let pi = elliptic_pi_incomplete(u, 1.0 / (lam * lam), modulus)?;
    let (pre, coeff, power) = match variant {
        PsiVariant::AsPrinted => (eps / (lam * k1.sqrt()), -2.0 * k2 * lam * lam, 0.25 * eps),
        PsiVariant::K1Corrected => (eps / (lam * k1.sqrt()), k2 - k1 - 2.0 * k2 * lam * lam, 0.25 * eps),
        PsiVariant::Rederived => (eps / (2.0 * lam * k1.sqrt()), k2 - k1 - 2.0 * k2 * lam * lam, 0.125 * eps),
    };
    let sg = ctx.sqrt_g();
    let log_ratio = |u: f64| -> Scalar {
        let root = sg * (2.0 * ((1.0 - u * u) * (k1 + k2 * u * u)).sqrt());
        let t = coeff * u * u + (k2 - k1) * lam * lam + 2.0 * k1;
        ((root + t) / (root - t)).ln()
    };
    let dlog = log_ratio(u) - log_ratio(0.0);
    let plus = (sg * (y + pre * pi) - dlog * power).exp();
    let minus = (-sg * (y + pre * pi) + dlog * power).exp();
    Ok((plus, minus))
}

/// How Φ is assembled from the two column solutions
/// `φ₁± = (±√g + u_x) Ψ± / √(u+λ)`, `φ₂± = √(u+λ) Ψ±`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PhiAssembly {
    /// Componentwise sums and differences with `1/√2` and `1/(2√g)` weights.
    GeneralComponents,
    /// The explicit matrix displayed for the elliptic family.
    Phi4Matrix,
    /// `[φ₊ φ₋](x, y) · [φ₊ φ₋](0, 0)⁻¹`, which is the identity at the origin.
    Rederived,
}

impl PhiAssembly {
    pub const ALL: [PhiAssembly; 3] = [PhiAssembly::GeneralComponents, PhiAssembly::Phi4Matrix, PhiAssembly::Rederived];

    pub fn name(self) -> &'static str {
        match self {
            PhiAssembly::GeneralComponents => "general_components",
            PhiAssembly::Phi4Matrix => "phi4_matrix",
            PhiAssembly::Rederived => "rederived",
        }
    }
}

/// Where the closed form takes `Ψ±` from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PsiSource {
    Quadrature,
    Closed(PsiVariant),
}

fn column_solutions(ctx: &SpectralContext, x: f64, psi: (Scalar, Scalar)) -> Result<Mat2> {
    let j = ctx.jet(x)?;
    let s = j.u + ctx.lambda();
    if s.abs() < crate::laxpair::DENOMINATOR_TOL {
        return Err(Error::SingularDenominator { x, value: s });
    }
    let r = Scalar::new(s, 0.0).sqrt();
    let sg = ctx.sqrt_g();
    Ok(Mat2::new((sg + j.u_x) * psi.0 / r, (-sg + j.u_x) * psi.1 / r, r * psi.0, r * psi.1))
}

fn assemble(ctx: &SpectralContext, x: f64, psi: (Scalar, Scalar), how: PhiAssembly) -> Result<Mat2> {
    let j = ctx.jet(x)?;
    let s = j.u + ctx.lambda();
    if s.abs() < crate::laxpair::DENOMINATOR_TOL {
        return Err(Error::SingularDenominator { x, value: s });
    }
    let sg = ctx.sqrt_g();
    if sg.norm() * sg.norm() < SPECTRUM_TOL {
        return Err(Error::DegenerateSpectrum { g: ctx.g().re });
    }
    let r = Scalar::new(s, 0.0).sqrt();
    let (pp, pm) = psi;
    let ux = j.u_x;
    Ok(match how {
        PhiAssembly::GeneralComponents => {
            let v = column_solutions(ctx, x, psi)?;
            let w = core::f64::consts::FRAC_1_SQRT_2;
            Mat2::new(
                (v.m11 + v.m12) * w,
                -(v.m11 - v.m12) / (sg * 2.0),
                (v.m21 + v.m22) * w,
                (v.m21 - v.m22) / (sg * 2.0),
            )
        }
        PhiAssembly::Phi4Matrix => Mat2::new(
            ((sg - ux) * pp - (sg + ux) * pm) / (r * 2.0),
            ((sg + ux) * pm - (sg - ux) * pp) / (sg * r * 2.0),
            r * (pp + pm) / 2.0,
            r * (pm - pp) / (sg * 2.0),
        ),
        PhiAssembly::Rederived => {
            let v0 = column_solutions(ctx, 0.0, (Scalar::new(1.0, 0.0), Scalar::new(1.0, 0.0)))?;
            let inv = v0.inverse().ok_or(Error::SingularFrame { det: 0.0 })?;
            column_solutions(ctx, x, psi)? * inv
        }
    })
}

fn psi_from(source: PsiSource, x: f64, y: f64, ctx: &SpectralContext) -> Result<(Scalar, Scalar)> {
    match source {
        PsiSource::Quadrature => psi_pm(x, y, ctx),
        PsiSource::Closed(v) => psi_pm_closed(x, y, ctx, v),
    }
}

/// Closed-form Φ with LSP residuals measured by finite differences of the
/// closed form itself. No accuracy is implied by success.
pub fn phi_closed(x: f64, y: f64, ctx: &SpectralContext, how: PhiAssembly, source: PsiSource) -> Result<WaveFrame> {
    let eval = |x: f64, y: f64| assemble(ctx, x, psi_from(source, x, y, ctx)?, how);
    let phi = eval(x, y)?;
    let solver = WaveSolver::new(ctx.clone());
    let (rx, ry) = solver.lsp_residuals(x, y, &phi, eval)?;
    Ok(WaveFrame { x, y, phi: GroupElement::new(phi)?, route: Route::ClosedForm, lsp_residual_x: rx, lsp_residual_y: ry })
}

/// Agreement of one closed-form assembly with the integrated frame.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClosedFormAssessment {
    pub assembly: PhiAssembly,
    pub source: PsiSource,
    pub max_residual_x: f64,
    pub max_residual_y: f64,
    /// Largest `|det Φ(p) - det Φ(p₀)|` over the points, `p₀` the first one.
    pub det_drift: f64,
    /// Largest max-abs entry of `Φ_closed - Φ_integrated`, relative to `1 + |Φ|`.
    pub max_deviation: f64,
    /// Points at which the closed form could not be evaluated.
    pub failures: usize,
}

impl ClosedFormAssessment {
    /// Whether the assembly reproduces the integrated frame within `tol`.
    pub fn validates(&self, tol: f64) -> bool {
        self.failures == 0 && self.max_residual_x < tol && self.max_residual_y < tol && self.det_drift < tol && self.max_deviation < tol
    }
}

pub fn assess_closed_form(ctx: &SpectralContext, how: PhiAssembly, source: PsiSource, points: &[(f64, f64)]) -> Result<ClosedFormAssessment> {
    let solver = WaveSolver::new(ctx.clone());
    let mut out = ClosedFormAssessment {
        assembly: how,
        source,
        max_residual_x: 0.0,
        max_residual_y: 0.0,
        det_drift: 0.0,
        max_deviation: 0.0,
        failures: 0,
    };
    let mut det0 = None;
    for &(x, y) in points {
        let frame = match phi_closed(x, y, ctx, how, source) {
            Ok(f) => f,
            Err(_) => {
                out.failures += 1;
                continue;
            }
        };
        let reference = solver.solve::<1>(x, y, PathOrder::YThenX)?[0];
        let det = frame.phi.det();
        let d0 = *det0.get_or_insert(det);
        out.det_drift = out.det_drift.max((det - d0).norm());
        out.max_residual_x = out.max_residual_x.max(frame.lsp_residual_x);
        out.max_residual_y = out.max_residual_y.max(frame.lsp_residual_y);
        let dev = (*frame.phi.mat() - reference).max_abs() / (1.0 + reference.max_abs());
        out.max_deviation = out.max_deviation.max(dev);
    }
    Ok(out)
}
