//! Tangent matrices `A`, `B` of the immersion terms and the integrated
//! surfaces `F` with `D_xF = Φ⁻¹AΦ`, `D_yF = Φ⁻¹BΦ`.
//!
//! | term          | A                 | B                        | F                 |
//! |---------------|-------------------|--------------------------|-------------------|
//! | translation   | `D_xL`            | `D_xM`                   | `Φ⁻¹LΦ`           |
//! | Sym–Tafel     | `a ∂L/∂λ`         | `a ∂M/∂λ`                | `a Φ⁻¹ ∂Φ/∂λ`     |
//! | gauge `S`     | `D_xS + [S, L]`   | `D_yS + [S, M]`          | `Φ⁻¹SΦ`           |
//! | dilation in x | `D_x(xL)`         | `x D_xM`                 | `x Φ⁻¹LΦ`         |
//! | dilation in y | `0`               | `D_y(yM)`                | `y Φ⁻¹MΦ`         |
//! | symmetry      | `pr v_Q L`        | `pr v_Q M`               | `Φ⁻¹ pr v_Q Φ`    |
//!
//! For `Q = u_x` the prolongation acts as `D_x` on the `x`-free matrices, so
//! the symmetry surface is realized as `Φ⁻¹LΦ`.

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use crate::algebra::{commutator, conjugate, decompose, GroupElement, Mat2, Sl2Matrix};
use crate::error::{Error, Result};
use crate::laxpair::{Characteristic, LaxJet, SpectralContext};
use crate::wavefunction::{PathOrder, WaveSolver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Term {
    Translation,
    SymTafel,
    Gauge,
    DilationX,
    DilationY,
    Symmetry,
}

impl Term {
    /// In the order of the six `α` coefficients.
    pub const ALL: [Term; 6] = [Term::Translation, Term::SymTafel, Term::Gauge, Term::DilationX, Term::DilationY, Term::Symmetry];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Term::Translation => "translation",
            Term::SymTafel => "sym_tafel",
            Term::Gauge => "gauge",
            Term::DilationX => "dilation_x",
            Term::DilationY => "dilation_y",
            Term::Symmetry => "symmetry",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Gauge {
    /// A constant algebra element, given by its basis coefficients.
    Constant([f64; 3]),
    L,
    M,
}

impl Gauge {
    pub fn e1() -> Self {
        Gauge::Constant([1.0, 0.0, 0.0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImmersionSpec {
    pub alpha: [f64; 6],
    /// Constant conformal weight `a(λ)` of the Sym–Tafel term.
    pub a_lambda: f64,
    pub gauge: Gauge,
    pub symmetry: Characteristic,
}

impl ImmersionSpec {
    pub fn new(alpha: [f64; 6]) -> Result<Self> {
        if alpha.iter().all(|a| *a == 0.0) {
            return Err(Error::Invalid("at least one alpha coefficient must be nonzero"));
        }
        Ok(Self { alpha, a_lambda: 1.0, gauge: Gauge::e1(), symmetry: Characteristic::Ux })
    }

    /// Only `term` active, with coefficient 1.
    pub fn single(term: Term) -> Self {
        let mut alpha = [0.0; 6];
        alpha[term.index()] = 1.0;
        Self { alpha, a_lambda: 1.0, gauge: Gauge::e1(), symmetry: Characteristic::Ux }
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn with_a_lambda(mut self, a: f64) -> Self {
        self.a_lambda = a;
        self
    }

    pub fn needs_lambda_derivative(&self) -> bool {
        self.alpha[Term::SymTafel.index()] != 0.0
    }

    pub fn active_terms(&self) -> impl Iterator<Item = (Term, f64)> + '_ {
        Term::ALL.into_iter().map(|t| (t, self.alpha[t.index()])).filter(|(_, a)| *a != 0.0)
    }
}

/// Moving-frame tangents with the derivatives that enter the compatibility
/// condition and the second fundamental form.
#[derive(Clone, Copy, Debug)]
pub struct TangentPair {
    pub x: f64,
    pub y: f64,
    pub a: Sl2Matrix,
    pub b: Sl2Matrix,
    pub dx_a: Sl2Matrix,
    pub dx_b: Sl2Matrix,
    pub dy_a: Sl2Matrix,
    pub dy_b: Sl2Matrix,
    /// `|A × B| / max(|A|, |B|)` in basis coefficients; zero when either vanishes.
    pub lin_indep_measure: f64,
}

impl TangentPair {
    fn new(x: f64, y: f64, a: Sl2Matrix, b: Sl2Matrix, dx_a: Sl2Matrix, dx_b: Sl2Matrix) -> Self {
        let z = Sl2Matrix::zero();
        let mut p = Self { x, y, a, b, dx_a, dx_b, dy_a: z, dy_b: z, lin_indep_measure: 0.0 };
        p.lin_indep_measure = independence(&a, &b);
        p
    }

    fn scaled(&self, s: f64) -> Self {
        let mut p = *self;
        for m in [&mut p.a, &mut p.b, &mut p.dx_a, &mut p.dx_b, &mut p.dy_a, &mut p.dy_b] {
            *m = m.scale(s);
        }
        p
    }

    fn add(&self, o: &Self) -> Self {
        let mut p = *self;
        p.a = p.a + o.a;
        p.b = p.b + o.b;
        p.dx_a = p.dx_a + o.dx_a;
        p.dx_b = p.dx_b + o.dx_b;
        p.dy_a = p.dy_a + o.dy_a;
        p.dy_b = p.dy_b + o.dy_b;
        p
    }

    /// `D_x F`, `D_y F` in the surface frame.
    pub fn conjugated(&self, phi: &GroupElement) -> (Sl2Matrix, Sl2Matrix) {
        (conjugate(phi, &self.a), conjugate(phi, &self.b))
    }
}

/// Real parts of the basis coefficients.
pub fn coeffs_re(x: &Sl2Matrix) -> [f64; 3] {
    let c = decompose(x);
    [c[0].re, c[1].re, c[2].re]
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn independence(a: &Sl2Matrix, b: &Sl2Matrix) -> f64 {
    let (ca, cb) = (coeffs_re(a), coeffs_re(b));
    let big = norm3(ca).max(norm3(cb));
    if big == 0.0 {
        0.0
    } else {
        norm3(cross(ca, cb)) / big
    }
}

/// Tangents of a single term, unweighted by its `α`.
pub fn term_tangents(term: Term, spec: &ImmersionSpec, lj: &LaxJet, y: f64) -> Result<TangentPair> {
    let x = lj.jet.x;
    let pair = |a, b, dxa, dxb| TangentPair::new(x, y, a, b, dxa, dxb);
    Ok(match term {
        Term::Translation => pair(lj.dx_l, lj.dx_m, lj.dxx_l, lj.dxx_m),
        Term::Symmetry => {
            if spec.symmetry != Characteristic::Ux {
                return Err(Error::UnsupportedCharacteristic);
            }
            pair(lj.dx_l, lj.dx_m, lj.dxx_l, lj.dxx_m)
        }
        Term::SymTafel => {
            let w = spec.a_lambda;
            pair(lj.dl_l.scale(w), lj.dl_m.scale(w), lj.dx_dl_l.scale(w), lj.dx_dl_m.scale(w))
        }
        Term::Gauge => match spec.gauge {
            Gauge::Constant(c) => {
                let s = Sl2Matrix::real(c[0], c[1] - c[2], c[1] + c[2]);
                pair(commutator(&s, &lj.l), commutator(&s, &lj.m), commutator(&s, &lj.dx_l), commutator(&s, &lj.dx_m))
            }
            // [L, M] = D_xM on solutions, so S = L reproduces the translation pair.
            Gauge::L => pair(lj.dx_l, commutator(&lj.l, &lj.m), lj.dxx_l, commutator(&lj.dx_l, &lj.m) + commutator(&lj.l, &lj.dx_m)),
            Gauge::M => {
                let a = lj.lax_residual();
                let dxa = lj.dxx_m + commutator(&lj.dx_m, &lj.l) + commutator(&lj.m, &lj.dx_l);
                pair(a, Sl2Matrix::zero(), dxa, Sl2Matrix::zero())
            }
        },
        Term::DilationX => pair(lj.l + lj.dx_l.scale(x), lj.dx_m.scale(x), lj.dx_l.scale(2.0) + lj.dxx_l.scale(x), lj.dx_m + lj.dxx_m.scale(x)),
        Term::DilationY => pair(Sl2Matrix::zero(), lj.m, Sl2Matrix::zero(), lj.dx_m),
    })
}

/// `Σ αᵢ (Aᵢ, Bᵢ)` over the active terms.
pub fn combined_tangents(spec: &ImmersionSpec, lj: &LaxJet, y: f64) -> Result<TangentPair> {
    let z = Sl2Matrix::zero();
    let mut acc = TangentPair::new(lj.jet.x, y, z, z, z, z);
    for (term, alpha) in spec.active_terms() {
        acc = acc.add(&term_tangents(term, spec, lj, y)?.scaled(alpha));
    }
    acc.lin_indep_measure = independence(&acc.a, &acc.b);
    Ok(acc)
}

/// Max-abs entry of `D_yA - D_xB + [A, M] + [L, B]`.
pub fn ab_condition_residual(pair: &TangentPair, lj: &LaxJet) -> f64 {
    (pair.dy_a - pair.dx_b + commutator(&pair.a, &lj.m) + commutator(&lj.l, &pair.b)).max_abs()
}

/// Frame data at one point: `Φ`, and `∂Φ/∂λ` when the Sym–Tafel term is active.
#[derive(Clone, Copy, Debug)]
pub struct FramePoint {
    pub x: f64,
    pub y: f64,
    pub phi: GroupElement,
    pub phi_lambda: Option<Mat2>,
}

/// Contribution of a single term, unweighted by its `α`.
pub fn term_value(term: Term, spec: &ImmersionSpec, lj: &LaxJet, frame: &FramePoint) -> Result<Sl2Matrix> {
    let phi = &frame.phi;
    Ok(match term {
        Term::Translation | Term::Symmetry => conjugate(phi, &lj.l),
        Term::SymTafel => {
            let dl = frame.phi_lambda.ok_or(Error::Invalid("Sym-Tafel term needs the lambda derivative of the frame"))?;
            Sl2Matrix::project((*phi.inverse() * dl) * spec.a_lambda)
        }
        Term::Gauge => match spec.gauge {
            Gauge::Constant(c) => conjugate(phi, &Sl2Matrix::real(c[0], c[1] - c[2], c[1] + c[2])),
            Gauge::L => conjugate(phi, &lj.l),
            Gauge::M => conjugate(phi, &lj.m),
        },
        Term::DilationX => conjugate(phi, &lj.l).scale(frame.x),
        Term::DilationY => conjugate(phi, &lj.m).scale(frame.y),
    })
}

/// `F` at one point from its frame data.
pub fn immersion_from_frame(spec: &ImmersionSpec, lj: &LaxJet, frame: &FramePoint) -> Result<Sl2Matrix> {
    let mut acc = Sl2Matrix::zero();
    for (term, alpha) in spec.active_terms() {
        acc = acc + term_value(term, spec, lj, frame)?.scale(alpha);
    }
    Ok(acc)
}

/// Integrates the frame from the origin and assembles `F(x, y)`.
pub fn frame_at(solver: &WaveSolver, spec: &ImmersionSpec, x: f64, y: f64) -> Result<FramePoint> {
    let (phi, phi_lambda) = if spec.needs_lambda_derivative() {
        let [p, d] = solver.solve::<2>(x, y, PathOrder::YThenX)?;
        (p, Some(d))
    } else {
        (solver.solve::<1>(x, y, PathOrder::YThenX)?[0], None)
    };
    Ok(FramePoint { x, y, phi: GroupElement::new(phi)?, phi_lambda })
}

pub fn immersion_value(spec: &ImmersionSpec, x: f64, y: f64, ctx: &SpectralContext) -> Result<Sl2Matrix> {
    let solver = WaveSolver::new(ctx.clone());
    let frame = frame_at(&solver, spec, x, y)?;
    immersion_from_frame(spec, &ctx.lax_jet(&ctx.jet(x)?)?, &frame)
}

/// Central-difference `D_xF`, `D_yF` against the conjugated tangents.
/// Neighbouring frames come from local propagation out of `(x, y)`.
pub fn tangent_consistency(spec: &ImmersionSpec, ctx: &SpectralContext, x: f64, y: f64, h: f64) -> Result<(f64, f64)> {
    let solver = WaveSolver::new(ctx.clone());
    let base = frame_at(&solver, spec, x, y)?;
    let state = [*base.phi.mat(), base.phi_lambda.unwrap_or(Mat2::zero())];
    let value = |xx: f64, yy: f64, s: [Mat2; 2]| -> Result<Sl2Matrix> {
        let frame = FramePoint { x: xx, y: yy, phi: GroupElement::new(s[0])?, phi_lambda: Some(s[1]) };
        immersion_from_frame(spec, &ctx.lax_jet(&ctx.jet(xx)?)?, &frame)
    };
    let fxp = value(x + h, y, solver.propagate_x(x, x + h, state)?)?;
    let fxm = value(x - h, y, solver.propagate_x(x, x - h, state)?)?;
    let fyp = value(x, y + h, solver.propagate_y(x, y, y + h, state)?)?;
    let fym = value(x, y - h, solver.propagate_y(x, y, y - h, state)?)?;
    let lj = ctx.lax_jet(&ctx.jet(x)?)?;
    let (tx, ty) = combined_tangents(spec, &lj, y)?.conjugated(&base.phi);
    let dx = (fxp - fxm).scale(0.5 / h);
    let dy = (fyp - fym).scale(0.5 / h);
    Ok(((dx - tx).max_abs(), (dy - ty).max_abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::killing_form;
    use crate::model::{EllipticKind, ModelSpec};

    fn sn_ctx(lambda: f64) -> SpectralContext {
        SpectralContext::new(ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap(), lambda).unwrap()
    }

    fn lj(ctx: &SpectralContext, x: f64) -> LaxJet {
        ctx.lax_jet(&ctx.jet(x).unwrap()).unwrap()
    }

    #[test]
    fn translation_at_origin() {
        let c = sn_ctx(0.5);
        let p = term_tangents(Term::Translation, &ImmersionSpec::single(Term::Translation), &lj(&c, 0.0), 0.0).unwrap();
        let [a11, a12, a21, a22] = p.a.mat().entries();
        assert!(a11.norm() == 0.0 && a21.norm() == 0.0 && a22.norm() == 0.0);
        assert!((a12.re + 0.125).abs() < 1e-15);
    }

    #[test]
    fn every_term_satisfies_condition() {
        let c = sn_ctx(0.5);
        for x in [-1.3, 0.0, 0.7, 2.9] {
            let j = lj(&c, x);
            for term in Term::ALL {
                for gauge in [Gauge::e1(), Gauge::Constant([0.2, -0.4, 1.1]), Gauge::L, Gauge::M] {
                    let spec = ImmersionSpec::single(term).with_gauge(gauge).with_a_lambda(1.7);
                    let p = term_tangents(term, &spec, &j, 0.4).unwrap();
                    assert!(ab_condition_residual(&p, &j) < 1e-12, "{term:?} {gauge:?} at {x}");
                }
            }
        }
    }

    #[test]
    fn mismatched_pair_fails() {
        let c = sn_ctx(0.5);
        let j = lj(&c, 0.3);
        let t = term_tangents(Term::Translation, &ImmersionSpec::single(Term::Translation), &j, 0.0).unwrap();
        let s = term_tangents(Term::SymTafel, &ImmersionSpec::single(Term::SymTafel), &j, 0.0).unwrap();
        let mut mixed = t;
        mixed.b = s.b;
        mixed.dx_b = s.dx_b;
        assert!(ab_condition_residual(&mixed, &j) > 1e-3);
    }

    #[test]
    fn symmetry_matches_translation() {
        let c = sn_ctx(1.2);
        let j = lj(&c, 0.9);
        let spec = ImmersionSpec::single(Term::Symmetry);
        let a = term_tangents(Term::Symmetry, &spec, &j, 0.0).unwrap();
        let b = term_tangents(Term::Translation, &spec, &j, 0.0).unwrap();
        assert!((a.a - b.a).max_abs() < 1e-12 && (a.b - b.b).max_abs() < 1e-12);
    }

    #[test]
    fn null_dx_directions() {
        let c = sn_ctx(0.5);
        let j = lj(&c, 0.8);
        for term in [Term::SymTafel, Term::Symmetry] {
            let p = term_tangents(term, &ImmersionSpec::single(term), &j, 0.0).unwrap();
            assert_eq!(killing_form(&p.a, &p.a).norm(), 0.0);
        }
    }

    #[test]
    fn translation_killing_norm_at_origin() {
        let c = sn_ctx(0.5);
        let f = immersion_value(&ImmersionSpec::single(Term::Translation), 0.0, 0.0, &c).unwrap();
        assert!((killing_form(&f, &f).re + 0.296_875).abs() < 1e-15);
        let g = immersion_value(&ImmersionSpec::single(Term::Translation), 1.5, -2.0, &c).unwrap();
        let l = c.build_l(&c.jet(1.5).unwrap()).unwrap();
        assert!((killing_form(&g, &g) - killing_form(&l, &l)).norm() < 1e-10);
    }

    #[test]
    fn vanishing_anchors() {
        let c = sn_ctx(0.5);
        let f4 = immersion_value(&ImmersionSpec::single(Term::DilationX), 0.0, 1.3, &c).unwrap();
        assert_eq!(f4.max_abs(), 0.0);
        let st = immersion_value(&ImmersionSpec::single(Term::SymTafel), 0.0, 0.0, &c).unwrap();
        assert_eq!(st.max_abs(), 0.0);
    }

    #[test]
    fn tangents_match_numerical_derivatives() {
        let c = sn_ctx(0.5);
        let mut spec = ImmersionSpec::new([0.3, -1.1, 0.7, 0.5, 1.3, 0.9]).unwrap();
        spec.a_lambda = 0.8;
        let (ex, ey) = tangent_consistency(&spec, &c, 0.4, 0.7, 1e-3).unwrap();
        assert!(ex < 1e-5 && ey < 1e-5, "{ex} {ey}");
        let (hx, hy) = tangent_consistency(&spec, &c, 0.4, 0.7, 5e-4).unwrap();
        assert!(ex / hx > 3.0 && ey / hy > 3.0, "{} {}", ex / hx, ey / hy);
    }

    #[test]
    fn linearity() {
        let c = sn_ctx(1.2);
        let a = ImmersionSpec::new([1.0, 0.0, 0.5, 0.0, 0.0, 0.0]).unwrap();
        let b = ImmersionSpec::new([0.0, 2.0, 0.0, 1.0, -1.0, 0.3]).unwrap();
        let mut ab = a;
        for i in 0..6 {
            ab.alpha[i] += b.alpha[i];
        }
        let (fa, fb, fab) = (
            immersion_value(&a, 0.5, 0.5, &c).unwrap(),
            immersion_value(&b, 0.5, 0.5, &c).unwrap(),
            immersion_value(&ab, 0.5, 0.5, &c).unwrap(),
        );
        assert!((fa + fb - fab).max_abs() < 1e-10);
    }

    #[test]
    fn degenerate_symmetry_tangents() {
        // u_x vanishes at the quarter period of sn.
        let c = sn_ctx(0.5);
        let k = crate::special::complete_k(crate::special::EllipticModulus::new(0.5).unwrap());
        let p = term_tangents(Term::Symmetry, &ImmersionSpec::single(Term::Symmetry), &lj(&c, k), 0.0).unwrap();
        assert!(p.lin_indep_measure < 1e-10);
    }

    #[test]
    fn rejects_all_zero_alpha() {
        assert!(ImmersionSpec::new([0.0; 6]).is_err());
    }
}
