//! Fundamental forms, normals and curvatures of the immersed surfaces in the
//! Euclidean or Killing metric on the basis coefficients.
//!
//! The Killing form is conjugation invariant, so Killing quantities are
//! computed in the moving frame directly from `A`, `B` and never touch Φ.
//! Euclidean quantities are computed from the conjugated tangents.
//!
//! Second derivatives come from central differences of the tangents, with
//! neighbouring frames obtained by local propagation. The moving-frame
//! identities `D_x(Φ⁻¹AΦ) = Φ⁻¹(D_xA + [A, L])Φ` and their `y` analogues give
//! an analytic alternative used as an oracle.

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use crate::algebra::{commutator, conjugate, GroupElement, Mat2, Sl2Matrix};
use crate::error::{Error, Result};
use crate::immersion::{coeffs_re, combined_tangents, cross, FramePoint, ImmersionSpec, TangentPair};
use crate::laxpair::SpectralContext;
use crate::wavefunction::WaveSolver;

/// Differencing step of the second derivatives.
pub const FORM_STEP: f64 = 1e-4;
/// Below this independence measure the tangents are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Metric {
    Euclidean,
    Killing,
}

impl Metric {
    /// Diagonal of the metric in the basis.
    pub fn weights(self) -> [f64; 3] {
        match self {
            Metric::Euclidean => [1.0, 1.0, 1.0],
            Metric::Killing => [1.0, 1.0, -1.0],
        }
    }

    pub fn inner(self, a: [f64; 3], b: [f64; 3]) -> f64 {
        let w = self.weights();
        w[0] * a[0] * b[0] + w[1] * a[1] * b[1] + w[2] * a[2] * b[2]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SecondOrder {
    /// Central differences with the given step.
    Central(f64),
    Analytic,
}

/// Symmetric-matrix convention: `I = E dx² + 2F dx dy + G dy²`, likewise `II`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FundamentalForms {
    pub big_e: f64,
    pub big_f: f64,
    pub big_g: f64,
    pub e: f64,
    pub f: f64,
    pub g2: f64,
    /// Unit normal in basis coefficients, in the frame the metric is evaluated in.
    pub normal: [f64; 3],
    /// Sign of `⟨N, N⟩`; always `+1` for the Euclidean metric.
    pub normal_sign: f64,
    pub metric: Metric,
    /// `|Fx| |Fy|` in the Euclidean norm, the scale of the degeneracy test.
    pub scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvaturePoint {
    pub k: f64,
    pub h: f64,
    pub degenerate: bool,
}

/// Local propagators `Φ(x±h, y) Φ(x, y)⁻¹` and `Φ(x, y±h) Φ(x, y)⁻¹`; both
/// depend on `x` only.
#[derive(Clone, Copy, Debug)]
pub struct LocalPropagators {
    pub x: f64,
    pub h: f64,
    pub x_plus: GroupElement,
    pub x_minus: GroupElement,
    pub y_plus: GroupElement,
    pub y_minus: GroupElement,
}

impl LocalPropagators {
    pub fn new(solver: &WaveSolver, x: f64, h: f64) -> Result<Self> {
        let id = [Mat2::identity()];
        Ok(Self {
            x,
            h,
            x_plus: GroupElement::new(solver.propagate_x(x, x + h, id)?[0])?,
            x_minus: GroupElement::new(solver.propagate_x(x, x - h, id)?[0])?,
            y_plus: GroupElement::new(solver.propagate_y(x, 0.0, h, id)?[0])?,
            y_minus: GroupElement::new(solver.propagate_y(x, 0.0, -h, id)?[0])?,
        })
    }
}

/// Moving-frame images of `F_xx`, `F_xy`, `F_yy`.
fn second_derivatives(
    spec: &ImmersionSpec,
    ctx: &SpectralContext,
    pair: &TangentPair,
    mode: SecondOrder,
    props: Option<&LocalPropagators>,
    solver: &WaveSolver,
) -> Result<[Sl2Matrix; 3]> {
    let x = pair.x;
    let lj = ctx.lax_jet(&ctx.jet(x)?)?;
    match mode {
        SecondOrder::Analytic => Ok([
            pair.dx_a + commutator(&pair.a, &lj.l),
            pair.dy_a + commutator(&pair.a, &lj.m),
            pair.dy_b + commutator(&pair.b, &lj.m),
        ]),
        SecondOrder::Central(h) => {
            let owned;
            let p = match props {
                Some(p) if p.h == h && p.x == x => p,
                _ => {
                    owned = LocalPropagators::new(solver, x, h)?;
                    &owned
                }
            };
            let at = |xx: f64| -> Result<TangentPair> { combined_tangents(spec, &ctx.lax_jet(&ctx.jet(xx)?)?, pair.y) };
            let (plus, minus) = (at(x + h)?, at(x - h)?);
            let s = 0.5 / h;
            let xx = (conjugate(&p.x_plus, &plus.a) - conjugate(&p.x_minus, &minus.a)).scale(s);
            let xy_from_a = (conjugate(&p.y_plus, &pair.a) - conjugate(&p.y_minus, &pair.a)).scale(s);
            let xy_from_b = (conjugate(&p.x_plus, &plus.b) - conjugate(&p.x_minus, &minus.b)).scale(s);
            let yy = (conjugate(&p.y_plus, &pair.b) - conjugate(&p.y_minus, &pair.b)).scale(s);
            Ok([xx, (xy_from_a + xy_from_b).scale(0.5), yy])
        }
    }
}

fn orient(mut n: [f64; 3]) -> [f64; 3] {
    let flip = if n[0].abs() > 1e-14 { n[0] < 0.0 } else { n[1] < 0.0 };
    if flip {
        n = [-n[0], -n[1], -n[2]];
    }
    n
}

/// Forms from moving-frame tangent data; `phi` selects the frame the
/// Euclidean metric is evaluated in.
pub fn forms_with(
    spec: &ImmersionSpec,
    ctx: &SpectralContext,
    frame: &FramePoint,
    metric: Metric,
    mode: SecondOrder,
    props: Option<&LocalPropagators>,
) -> Result<FundamentalForms> {
    let lj = ctx.lax_jet(&ctx.jet(frame.x)?)?;
    let pair = combined_tangents(spec, &lj, frame.y)?;
    if pair.lin_indep_measure < DEGENERACY_TOL {
        return Err(Error::DegenerateTangents { measure: pair.lin_indep_measure });
    }
    let solver = WaveSolver::new(ctx.clone());
    let second = second_derivatives(spec, ctx, &pair, mode, props, &solver)?;
    let to_frame = |m: &Sl2Matrix| -> [f64; 3] {
        match metric {
            Metric::Killing => coeffs_re(m),
            Metric::Euclidean => coeffs_re(&conjugate(&frame.phi, m)),
        }
    };
    let (fx, fy) = (to_frame(&pair.a), to_frame(&pair.b));
    let c = cross(fx, fy);
    let w = metric.weights();
    // ⟨N, ·⟩ ⟂ Fx, Fy: the Euclidean cross product raised by the metric.
    let raw = [w[0] * c[0], w[1] * c[1], w[2] * c[2]];
    let nn = metric.inner(raw, raw);
    let euclid = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let scale = euclid(fx) * euclid(fy);
    if nn.abs() <= 1e-24 * scale * scale || !nn.is_finite() {
        return Err(Error::DegenerateTangents { measure: nn.abs().sqrt() });
    }
    let norm = nn.abs().sqrt();
    let normal = orient([raw[0] / norm, raw[1] / norm, raw[2] / norm]);
    let [xx, xy, yy] = second.map(|m| to_frame(&m));
    Ok(FundamentalForms {
        big_e: metric.inner(fx, fx),
        big_f: metric.inner(fx, fy),
        big_g: metric.inner(fy, fy),
        e: metric.inner(xx, normal),
        f: metric.inner(xy, normal),
        g2: metric.inner(yy, normal),
        normal,
        normal_sign: nn.signum(),
        metric,
        scale,
    })
}

/// Forms with the default differencing step.
pub fn forms_at(spec: &ImmersionSpec, ctx: &SpectralContext, frame: &FramePoint, metric: Metric) -> Result<FundamentalForms> {
    forms_with(spec, ctx, frame, metric, SecondOrder::Central(FORM_STEP), None)
}

pub fn curvatures_at(forms: &FundamentalForms) -> CurvaturePoint {
    let det = forms.big_e * forms.big_g - forms.big_f * forms.big_f;
    if det.abs() < 1e-10 * forms.scale * forms.scale || !det.is_finite() {
        return CurvaturePoint { k: f64::NAN, h: f64::NAN, degenerate: true };
    }
    let s = forms.normal_sign;
    CurvaturePoint {
        k: s * (forms.e * forms.g2 - forms.f * forms.f) / det,
        h: s * (forms.big_e * forms.g2 - 2.0 * forms.big_f * forms.f + forms.big_g * forms.e) / (2.0 * det),
        degenerate: false,
    }
}

/// Curvatures at steps `h, h/2, h/4`, with the observed orders of convergence
/// towards the analytic second derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convergence {
    pub steps: [f64; 3],
    pub k: [f64; 3],
    pub h: [f64; 3],
    pub k_exact: f64,
    pub h_exact: f64,
    pub order_k: f64,
    pub order_h: f64,
}

pub fn curvature_convergence(spec: &ImmersionSpec, ctx: &SpectralContext, frame: &FramePoint, metric: Metric, h0: f64) -> Result<Convergence> {
    let exact = curvatures_at(&forms_with(spec, ctx, frame, metric, SecondOrder::Analytic, None)?);
    let steps = [h0, 0.5 * h0, 0.25 * h0];
    let mut k = [0.0; 3];
    let mut h = [0.0; 3];
    for (i, s) in steps.iter().enumerate() {
        let c = curvatures_at(&forms_with(spec, ctx, frame, metric, SecondOrder::Central(*s), None)?);
        k[i] = c.k;
        h[i] = c.h;
    }
    let order = |v: [f64; 3], ex: f64| {
        let (a, b) = ((v[0] - ex).abs(), (v[2] - ex).abs());
        if b == 0.0 {
            f64::INFINITY
        } else {
            0.5 * (a / b).log2()
        }
    };
    Ok(Convergence { steps, k, h, k_exact: exact.k, h_exact: exact.h, order_k: order(k, exact.k), order_h: order(h, exact.h) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::{frame_at, Term};
    use crate::model::{EllipticKind, ModelSpec};

    fn sn_ctx(lambda: f64) -> SpectralContext {
        SpectralContext::new(ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap(), lambda).unwrap()
    }

    fn frame(ctx: &SpectralContext, spec: &ImmersionSpec, x: f64, y: f64) -> FramePoint {
        frame_at(&WaveSolver::new(ctx.clone()), spec, x, y).unwrap()
    }

    #[test]
    fn sym_tafel_killing_anchors() {
        let c = sn_ctx(0.5);
        let spec = ImmersionSpec::single(Term::SymTafel);
        let f = forms_at(&spec, &c, &frame(&c, &spec, 0.6, 0.4), Metric::Killing).unwrap();
        assert_eq!(f.big_e, 0.0);
        assert!(f.normal[1].abs() < 1e-10 && f.normal[2].abs() < 1e-10);
        assert!((f.normal[0] - 1.0).abs() < 1e-12 && f.normal_sign == 1.0);
    }

    #[test]
    fn normals_are_unit_and_orthogonal() {
        let c = sn_ctx(1.2);
        let spec = ImmersionSpec::new([0.4, 1.0, 0.3, 0.2, 0.0, 0.5]).unwrap();
        let fp = frame(&c, &spec, 0.9, -0.7);
        for metric in [Metric::Euclidean, Metric::Killing] {
            let f = forms_at(&spec, &c, &fp, metric).unwrap();
            assert!((metric.inner(f.normal, f.normal).abs() - 1.0).abs() < 1e-10);
            let lj = c.lax_jet(&c.jet(0.9).unwrap()).unwrap();
            let pair = combined_tangents(&spec, &lj, -0.7).unwrap();
            let (tx, ty) = match metric {
                Metric::Killing => (coeffs_re(&pair.a), coeffs_re(&pair.b)),
                Metric::Euclidean => (coeffs_re(&conjugate(&fp.phi, &pair.a)), coeffs_re(&conjugate(&fp.phi, &pair.b))),
            };
            let s = 1.0 + f.scale;
            assert!(metric.inner(f.normal, tx).abs() < 1e-10 * s);
            assert!(metric.inner(f.normal, ty).abs() < 1e-10 * s);
        }
    }

    #[test]
    fn killing_forms_are_frame_independent() {
        // The conjugated Euclidean route with the Killing weights must reproduce them.
        let c = sn_ctx(0.5);
        let spec = ImmersionSpec::single(Term::Translation);
        let fp = frame(&c, &spec, 0.3, 0.2);
        let k = forms_with(&spec, &c, &fp, Metric::Killing, SecondOrder::Analytic, None).unwrap();
        let lj = c.lax_jet(&c.jet(0.3).unwrap()).unwrap();
        let pair = combined_tangents(&spec, &lj, 0.2).unwrap();
        let fx = coeffs_re(&conjugate(&fp.phi, &pair.a));
        let fy = coeffs_re(&conjugate(&fp.phi, &pair.b));
        let m = Metric::Killing;
        assert!((m.inner(fx, fx) - k.big_e).abs() < 1e-12);
        assert!((m.inner(fx, fy) - k.big_f).abs() < 1e-12);
        assert!((m.inner(fy, fy) - k.big_g).abs() < 1e-12);
    }

    #[test]
    fn symmetry_degenerate_at_turning_point() {
        let c = sn_ctx(0.5);
        let spec = ImmersionSpec::single(Term::Symmetry);
        let k = crate::special::complete_k(crate::special::EllipticModulus::new(0.5).unwrap());
        let fp = frame(&c, &spec, k, 0.1);
        assert!(matches!(forms_at(&spec, &c, &fp, Metric::Killing), Err(Error::DegenerateTangents { .. })));
    }

    #[test]
    fn differencing_converges_at_second_order() {
        let c = sn_ctx(0.5);
        for term in [Term::Translation, Term::SymTafel, Term::DilationX] {
            let spec = ImmersionSpec::single(term);
            let fp = frame(&c, &spec, 0.7, 0.3);
            for metric in [Metric::Killing, Metric::Euclidean] {
                let conv = curvature_convergence(&spec, &c, &fp, metric, 2e-2).unwrap();
                assert!(conv.order_k > 1.9 && conv.order_h > 1.9, "{term:?} {metric:?} {conv:?}");
                let d = forms_at(&spec, &c, &fp, metric).unwrap();
                let cd = curvatures_at(&d);
                assert!((cd.k - conv.k_exact).abs() < 1e-6 * (1.0 + conv.k_exact.abs()), "{term:?} {metric:?}");
            }
        }
    }
}
