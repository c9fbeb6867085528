//! Literal evaluation of the displayed fundamental forms, normals and
//! curvatures for the `sn` surfaces, for side-by-side comparison with the
//! numerical geometry. Nothing here is asserted against the numerics.
//!
//! Displayed forms use `I = E dx² + (2F) dx dy + G dy²`; the cross
//! coefficients are halved on input so that every record follows the
//! symmetric-matrix convention of [`crate::geometry`].

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::geometry::{curvatures_at, forms_at, FundamentalForms, Metric};
use crate::immersion::{frame_at, ImmersionSpec, Term};
use crate::laxpair::SpectralContext;
use crate::model::{EllipticKind, JetPoint};
use crate::wavefunction::WaveSolver;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PrintedSurface {
    /// Sym–Tafel surface with `a(λ) = 1`.
    SymTafel,
    /// Symmetry surface for `Q = u_x`.
    Q,
    /// Dilation surface `x Φ⁻¹LΦ`.
    Dil4,
}

impl PrintedSurface {
    pub const ALL: [PrintedSurface; 3] = [PrintedSurface::SymTafel, PrintedSurface::Q, PrintedSurface::Dil4];

    pub fn name(self) -> &'static str {
        match self {
            PrintedSurface::SymTafel => "st",
            PrintedSurface::Q => "q",
            PrintedSurface::Dil4 => "dil4",
        }
    }

    pub fn spec(self) -> ImmersionSpec {
        match self {
            PrintedSurface::SymTafel => ImmersionSpec::single(Term::SymTafel),
            PrintedSurface::Q => ImmersionSpec::single(Term::Symmetry),
            PrintedSurface::Dil4 => ImmersionSpec::single(Term::DilationX),
        }
    }
}

/// Displayed values at one point; absent entries are not displayed.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrintedForms {
    pub surface: PrintedSurface,
    /// `(E, F, G)`.
    pub first: [f64; 3],
    /// `(e, f, g)`.
    pub second: Option<[f64; 3]>,
    /// Normal as the displayed 2×2 matrix `[n11, n12, n21, n22]`.
    pub normal: Option<[f64; 4]>,
    pub k: Option<f64>,
    pub h: Option<f64>,
    /// `F` of `I(F⁴)` with the garbled factor `u^1 - 2` read as `u² - 1`;
    /// `first[1]` keeps the literal reading `u - 2`.
    pub first_alt_f: Option<f64>,
}

/// Evaluates the displayed formulas at a solution jet of the `sn` model with modulus `k`.
pub fn printed_forms(surface: PrintedSurface, k: f64, lambda: f64, jet: &JetPoint) -> PrintedForms {
    let (u, ux, x, l) = (jet.u, jet.u_x, jet.x, lambda);
    let k2 = k * k;
    let k4 = k2 * k2;
    let (u2, u3, u4, u5, u6) = (u * u, u * u * u, u * u * u * u, u.powi(5), u.powi(6));
    let l2 = l * l;
    match surface {
        PrintedSurface::SymTafel => PrintedForms {
            surface,
            first: [0.0, -0.5 * k2 * (u - l), 2.0 * k2 * u2 - 4.0 * l * k2 * u + 6.0 * k2 * l2 - 2.0 * k2 - 2.0],
            second: Some([
                k2 * (u - l) / SQRT_2,
                -0.5 * SQRT_2 * k2 * (u2 - l2),
                2.0 * SQRT_2 * (k2 * u3 - l * k2 * u2 + (k2 * l2 - k2 - 1.0) * u + k2 * l2 * l),
            ]),
            normal: Some([1.0 / SQRT_2, 0.0, 0.0, -1.0 / SQRT_2]),
            k: Some(2.0 * (2.0 * k2 * u2 - k2 - 1.0) * (l - u) * k2 * u),
            h: Some(k2 * l2 - 2.0 * l * k2 * u + 3.0 * k2 * u2 - k2 - 1.0),
            first_alt_f: None,
        },
        PrintedSurface::Q => {
            let g = 2.0
                * (k4 * u6 + 4.0 * k4 * u5 * l - 2.0 * k4 * u4 * l2 - 4.0 * k2 * l * (1.0 + k2) * u3
                    + 2.0 * k2 * (-3.0 + l2 + k2 * l2) * u2
                    + 4.0 * l * k2 * u
                    + 2.0
                    - 2.0 * k2 * l2
                    + 2.0 * k2);
            let bracket = -1.0 + k2 * l2 + 3.0 * k2 * u2 - k2 - 2.0 * l * k2 * u - u2 * k2 * l2 - 2.0 * k4 * u5 * l + 2.0 * u3 * l * k2
                - k4 * u2 * l2
                + 2.0 * k4 * l * u3
                + k4 * u4 * l2
                - k4 * u6;
            let h_bracket = -5.0 * k4 * u6 - 2.0 * k4 * u5 * l + k2 * (6.0 + k2 * l2 + 6.0 * k2) * u4 + 2.0 * k2 * l * (1.0 + k2) * u3
                - k2 * (9.0 + k2 * l2 + l2) * u2
                - 2.0 * l * k2 * u
                + k2 * l2
                + 1.0
                + k2;
            PrintedForms {
                surface,
                first: [0.0, 0.5 * k2 * (u2 - 1.0) * (k2 * u2 - 1.0) * (3.0 * u - l), g],
                second: Some([
                    ux * k2 * (l - 3.0 * u) / SQRT_2,
                    0.5 * SQRT_2 * ux * k2 * (l - 3.0 * u) * (u + l),
                    2.0 * SQRT_2 * (u + l) / ux * bracket,
                ]),
                normal: Some([-0.5 * SQRT_2, (2.0 * k2 * u2 - k2 - 1.0) * u * SQRT_2 / ux, 0.0, 0.5 * SQRT_2]),
                k: Some(2.0 * k2 * (u + l) * (l - 3.0 * u) * (-1.0 - k2 - 3.0 * k2 * u4 + 6.0 * k2 * u2 + 2.0 * k4 * u6 - 3.0 * k4 * u4)),
                h: Some(SQRT_2 * (l - 3.0 * u) * ux * k2 * h_bracket),
                first_alt_f: None,
            }
        }
        PrintedSurface::Dil4 => {
            let e = 1.5 * k2 * u2 - k2 * (l - 3.0 * x * ux) * u + 0.5 * k2 * l2 - ux * x * k2 * l - 0.5 * k2 - 0.5;
            let tail = k2 * x * x * (k2 * u2 - 1.0) * (3.0 * u - l);
            let g = 2.0
                * x
                * x
                * (k4 * u6 + 2.0 * k4 * u5 * l - k4 * u4 * l2 - 2.0 * k2 * l * (1.0 + k2) * u3 + k2 * (-3.0 + l2 + k2 * l2) * u2 + 2.0 * l * k2 * u + 1.0
                    - k2 * l2
                    + k2);
            PrintedForms {
                surface,
                first: [e, 0.5 * tail * (u - 2.0), g],
                second: None,
                normal: None,
                k: None,
                h: None,
                first_alt_f: Some(0.5 * tail * (u2 - 1.0)),
            }
        }
    }
}

/// The general-`f` first fundamental forms `(F, G)` displayed for the
/// Sym–Tafel and `Q = u_x` surfaces, with the stray symbol `v` read as `u`.
pub fn printed_general_first_form(surface: PrintedSurface, ctx: &SpectralContext, u: f64) -> Option<[f64; 2]> {
    let m = ctx.model();
    let l = ctx.lambda();
    let s = u + l;
    let (f, f1, f2) = (m.f(u), m.df(u), m.d2f(u));
    let (g, g1) = (m.discriminant(l), m.discriminant_derivative(l));
    match surface {
        PrintedSurface::SymTafel => Some([
            0.5 * (2.0 * (f - g) / (s * s * s) - (f1 - g1) / (s * s)),
            2.0 * (g1 / s + (f - g) / (s * s)),
        ]),
        PrintedSurface::Q => Some([
            0.5 * (f * f2 / s - 2.0 * f * f1 / (s * s) + 2.0 * f * (f - g) / (s * s * s)),
            f1 * f1 / 2.0 - 2.0 * f * f1 / s + 2.0 * f * (f - g) / (s * s),
        ]),
        PrintedSurface::Dil4 => None,
    }
}

/// Printed and numerical values of one named quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Deviation {
    pub name: &'static str,
    pub printed: f64,
    pub numeric: f64,
    /// `|printed - numeric| / max(1, |numeric|)`.
    pub relative: f64,
}

impl Deviation {
    fn new(name: &'static str, printed: f64, numeric: f64) -> Self {
        Self { name, printed, numeric, relative: (printed - numeric).abs() / numeric.abs().max(1.0) }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Comparison {
    pub surface: PrintedSurface,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub printed: PrintedForms,
    pub numeric: Option<FundamentalForms>,
    pub deviations: Vec<Deviation>,
}

/// Printed values next to the numerical Killing-metric geometry at `(x, y)`.
pub fn compare_at(surface: PrintedSurface, ctx: &SpectralContext, x: f64, y: f64) -> Result<Comparison> {
    let model = ctx.model();
    let k = match (model.kind(), model.modulus()) {
        (Some(EllipticKind::Sn), Some(k)) => k.k(),
        _ => return Err(Error::Invalid("printed closed forms exist only for the sn model")),
    };
    let jet = ctx.jet(x)?;
    let printed = printed_forms(surface, k, ctx.lambda(), &jet);
    let spec = surface.spec();
    let frame = frame_at(&WaveSolver::new(ctx.clone()), &spec, x, y)?;
    let numeric = forms_at(&spec, ctx, &frame, Metric::Killing).ok();
    let mut deviations = Vec::new();
    if let Some(n) = &numeric {
        let names = [("E", n.big_e), ("F", n.big_f), ("G", n.big_g)];
        for (i, (name, v)) in names.into_iter().enumerate() {
            deviations.push(Deviation::new(name, printed.first[i], v));
        }
        if let Some(alt) = printed.first_alt_f {
            deviations.push(Deviation::new("F(u^2-1 reading)", alt, n.big_f));
        }
        if let Some(ii) = printed.second {
            for (i, (name, v)) in [("e", n.e), ("f", n.f), ("g", n.g2)].into_iter().enumerate() {
                deviations.push(Deviation::new(name, ii[i], v));
            }
        }
        let c = curvatures_at(n);
        if let Some(pk) = printed.k {
            deviations.push(Deviation::new("K", pk, c.k));
        }
        if let Some(ph) = printed.h {
            deviations.push(Deviation::new("H", ph, c.h));
        }
    }
    Ok(Comparison { surface, x, y, u: jet.u, printed, numeric, deviations })
}

/// The displayed Sym–Tafel curvatures at `u = 0` next to those implied by
/// the displayed I and II through `K = det II / det I`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZeroCheck {
    pub k_printed: f64,
    pub k_from_forms: f64,
    pub h_printed: f64,
    pub h_from_forms: f64,
}

impl ZeroCheck {
    pub fn consistent(&self, tol: f64) -> bool {
        (self.k_printed - self.k_from_forms).abs() <= tol && (self.h_printed - self.h_from_forms).abs() <= tol
    }
}

pub fn sym_tafel_zero_check(k: f64, lambda: f64) -> ZeroCheck {
    let jet = JetPoint { x: 0.0, u: 0.0, u_x: 1.0, u_xx: 0.0, u_xxx: 0.0 };
    let p = printed_forms(PrintedSurface::SymTafel, k, lambda, &jet);
    let [ee, ff, gg] = p.first;
    let [e, f, g] = p.second.unwrap_or([f64::NAN; 3]);
    let det1 = ee * gg - ff * ff;
    ZeroCheck {
        k_printed: p.k.unwrap_or(f64::NAN),
        k_from_forms: (e * g - f * f) / det1,
        h_printed: p.h.unwrap_or(f64::NAN),
        h_from_forms: (ee * g - 2.0 * ff * f + gg * e) / (2.0 * det1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    fn jet(u: f64, ux: f64) -> JetPoint {
        JetPoint { x: 0.0, u, u_x: ux, u_xx: 0.0, u_xxx: 0.0 }
    }

    #[test]
    fn sym_tafel_at_origin() {
        let p = printed_forms(PrintedSurface::SymTafel, 0.5, 0.5, &jet(0.0, 1.0));
        // Displayed dx dy coefficient -k²(u - λ) = 0.125.
        assert!((2.0 * p.first[1] - 0.125).abs() < 1e-15);
        assert_eq!(p.k, Some(0.0));
        assert!((p.h.unwrap() + 1.1875).abs() < 1e-15);
    }

    #[test]
    fn q_anchors() {
        let p = printed_forms(PrintedSurface::Q, 0.5, 0.5, &jet(0.3, 0.0));
        assert_eq!(p.second.unwrap()[0], 0.0);
        let p = printed_forms(PrintedSurface::Q, 0.5, 0.5, &jet(0.0, 1.0));
        assert_eq!(p.normal.unwrap()[1], 0.0);
    }

    #[test]
    fn dil4_readings_differ() {
        let j = JetPoint { x: 1.0, u: 0.3, u_x: 0.9, u_xx: 0.0, u_xxx: 0.0 };
        let p = printed_forms(PrintedSurface::Dil4, 0.5, 1.2, &j);
        assert!((p.first[1] - p.first_alt_f.unwrap()).abs() > 1e-3);
    }

    #[test]
    fn zero_check_is_inconsistent() {
        let z = sym_tafel_zero_check(0.5, 0.5);
        assert_eq!(z.k_printed, 0.0);
        assert!((z.k_from_forms - 10.0 * 0.25).abs() < 1e-12);
        assert!(!z.consistent(1e-6));
    }

    #[test]
    fn sym_tafel_cross_coefficient_matches_numerics() {
        let ctx = SpectralContext::new(ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap(), 0.5).unwrap();
        let c = compare_at(PrintedSurface::SymTafel, &ctx, 0.3, 0.2).unwrap();
        let e = c.deviations.iter().find(|d| d.name == "E").unwrap();
        let f = c.deviations.iter().find(|d| d.name == "F").unwrap();
        assert_eq!(e.relative, 0.0);
        assert!(f.relative < 1e-12);
    }
}
