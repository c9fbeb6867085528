//! Rectangular sampling of an immersion with per-point masking.
//!
//! Frames on the lattice are built column by column. A serial sweep along
//! `y = 0` gives the base frames `Φ(x_i, 0)`; every column is then an
//! independent sweep in `y` at fixed `x`, so columns may be sampled in any
//! order or concurrently from a shared [`GridPlan`].

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it whenever std is linked
use num_traits::Float;

use crate::algebra::{decompose, GroupElement, Mat2, Sl2Matrix};
use crate::error::{Error, Result};
use crate::geometry::{curvatures_at, forms_with, CurvaturePoint, FundamentalForms, LocalPropagators, Metric, SecondOrder, FORM_STEP};
use crate::immersion::{coeffs_re, combined_tangents, immersion_from_frame, FramePoint, ImmersionSpec};
use crate::laxpair::{LaxJet, SpectralContext};
use crate::wavefunction::WaveSolver;

/// Points with `|u + λ| < SINGULAR_BAND (1 + |λ|)` are masked before any
/// frame is evaluated.
pub const SINGULAR_BAND: f64 = 0.02;
/// A point is complex-tainted once `|Im| ≥ COMPLEX_TOL (1 + |Re|)` in any coefficient.
pub const COMPLEX_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mask {
    Ok,
    Singular,
    Degenerate,
    Complex,
}

impl Mask {
    pub fn name(self) -> &'static str {
        match self {
            Mask::Ok => "ok",
            Mask::Singular => "singular",
            Mask::Degenerate => "degenerate",
            Mask::Complex => "complex",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridConfig {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub metric: Metric,
    /// Subtract `F(0, 0)` from every value.
    pub center: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_range: [-8.0, 8.0], y_range: [-8.0, 8.0], nx: 64, ny: 64, metric: Metric::Killing, center: false }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Invalid("grid resolution must be at least 2x2"));
        }
        for r in [self.x_range, self.y_range] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::Invalid("grid ranges must be finite with lo < hi"));
            }
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        lattice(self.x_range, self.nx, i)
    }

    pub fn y(&self, j: usize) -> f64 {
        lattice(self.y_range, self.ny, j)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }
}

fn lattice(r: [f64; 2], n: usize, i: usize) -> f64 {
    if i + 1 == n {
        r[1]
    } else {
        r[0] + (r[1] - r[0]) * (i as f64) / ((n - 1) as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    /// Real parts of `(F¹, F², F³)`; absent when the frame could not be evaluated.
    pub value: Option<[f64; 3]>,
    pub max_imag: f64,
    /// `D_xF`, `D_yF` in basis coefficients.
    pub tangents: Option<[[f64; 3]; 2]>,
    pub lin_indep_measure: f64,
    pub forms: Option<FundamentalForms>,
    pub curvature: Option<CurvaturePoint>,
    pub mask: Mask,
}

impl SurfacePoint {
    fn masked(x: f64, y: f64, mask: Mask) -> Self {
        Self { x, y, value: None, max_imag: 0.0, tangents: None, lin_indep_measure: 0.0, forms: None, curvature: None, mask }
    }
}

/// Shared, read-only state of a grid evaluation.
#[derive(Clone, Debug)]
pub struct GridPlan {
    spec: ImmersionSpec,
    ctx: SpectralContext,
    config: GridConfig,
    solver: WaveSolver,
    bases: Vec<Result<[Mat2; 2]>>,
    offset: [f64; 3],
}

impl GridPlan {
    pub fn new(spec: &ImmersionSpec, ctx: &SpectralContext, config: &GridConfig) -> Result<Self> {
        config.validate()?;
        let solver = WaveSolver::new(ctx.clone());
        let origin = [Mat2::identity(), Mat2::zero()];
        let bases = sweep(&config.xs(), origin, |x0, x1, s| solver.propagate_x(x0, x1, s));
        let offset = if config.center {
            let lj = ctx.lax_jet(&ctx.jet(0.0)?)?;
            let frame = FramePoint { x: 0.0, y: 0.0, phi: GroupElement::identity(), phi_lambda: Some(Mat2::zero()) };
            coeffs_re(&immersion_from_frame(spec, &lj, &frame)?)
        } else {
            [0.0; 3]
        };
        Ok(Self { spec: *spec, ctx: ctx.clone(), config: *config, solver, bases, offset })
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn spec(&self) -> &ImmersionSpec {
        &self.spec
    }

    pub fn context(&self) -> &SpectralContext {
        &self.ctx
    }

    /// `F(0, 0)` as subtracted from every value; zero unless centering.
    pub fn offset(&self) -> [f64; 3] {
        self.offset
    }

    /// Samples column `i`, ordered by increasing `y`.
    pub fn sample_column(&self, i: usize) -> Vec<SurfacePoint> {
        let cfg = &self.config;
        let x = cfg.x(i);
        let ys = cfg.ys();
        let all = |mask| ys.iter().map(|&y| SurfacePoint::masked(x, y, mask)).collect();
        let lambda = self.ctx.lambda();
        let lj = match self.ctx.jet(x).and_then(|j| self.ctx.lax_jet(&j)) {
            Ok(lj) => lj,
            Err(_) => return all(Mask::Singular),
        };
        if (lj.jet.u + lambda).abs() < SINGULAR_BAND * (1.0 + lambda.abs()) {
            return all(Mask::Singular);
        }
        let base = match &self.bases[i] {
            Ok(b) => *b,
            Err(_) => return all(Mask::Singular),
        };
        let props = LocalPropagators::new(&self.solver, x, FORM_STEP).ok();
        let frames = sweep(&ys, base, |y0, y1, s| self.solver.propagate_y(x, y0, y1, s));
        ys.iter().zip(frames).map(|(&y, s)| self.point(x, y, &lj, s, props.as_ref())).collect()
    }

    fn point(&self, x: f64, y: f64, lj: &LaxJet, state: Result<[Mat2; 2]>, props: Option<&LocalPropagators>) -> SurfacePoint {
        let frame = match state.and_then(|s| Ok(FramePoint { x, y, phi: GroupElement::new(s[0])?, phi_lambda: Some(s[1]) })) {
            Ok(f) => f,
            Err(_) => return SurfacePoint::masked(x, y, Mask::Singular),
        };
        let f = match immersion_from_frame(&self.spec, lj, &frame) {
            Ok(f) => f,
            Err(_) => return SurfacePoint::masked(x, y, Mask::Singular),
        };
        let (value, max_imag, complex) = split(&f, self.offset);
        let mut p = SurfacePoint::masked(x, y, Mask::Ok);
        p.max_imag = max_imag;
        if !value.iter().all(|v| v.is_finite()) {
            p.mask = Mask::Singular;
            return p;
        }
        p.value = Some(value);
        if complex {
            p.mask = Mask::Complex;
            return p;
        }
        match combined_tangents(&self.spec, lj, y) {
            Ok(t) => {
                let (tx, ty) = t.conjugated(&frame.phi);
                p.tangents = Some([coeffs_re(&tx), coeffs_re(&ty)]);
                p.lin_indep_measure = t.lin_indep_measure;
            }
            Err(_) => {
                p.mask = Mask::Singular;
                return p;
            }
        }
        let Some(props) = props else {
            p.mask = Mask::Singular;
            return p;
        };
        match forms_with(&self.spec, &self.ctx, &frame, self.config.metric, SecondOrder::Central(FORM_STEP), Some(props)) {
            Ok(forms) => {
                p.forms = Some(forms);
                let c = curvatures_at(&forms);
                if c.degenerate {
                    p.mask = Mask::Degenerate;
                } else if !(c.k.is_finite() && c.h.is_finite()) {
                    p.mask = Mask::Singular;
                } else {
                    p.curvature = Some(c);
                }
            }
            Err(Error::DegenerateTangents { .. }) => p.mask = Mask::Degenerate,
            Err(_) => p.mask = Mask::Singular,
        }
        p
    }

    /// Collects sampled columns, given in column order, into a grid.
    pub fn assemble(&self, columns: Vec<Vec<SurfacePoint>>) -> Result<SurfaceGrid> {
        if columns.len() != self.config.nx || columns.iter().any(|c| c.len() != self.config.ny) {
            return Err(Error::Invalid("column count or length does not match the grid"));
        }
        let points: Vec<SurfacePoint> = columns.into_iter().flatten().collect();
        if points.iter().all(|p| p.mask != Mask::Ok) {
            return Err(Error::EmptyGrid);
        }
        Ok(SurfaceGrid { config: self.config, offset: self.offset, points })
    }
}

fn split(f: &Sl2Matrix, offset: [f64; 3]) -> ([f64; 3], f64, bool) {
    let c = decompose(f);
    let mut value = [0.0; 3];
    let mut max_imag: f64 = 0.0;
    let mut complex = false;
    for k in 0..3 {
        value[k] = c[k].re - offset[k];
        max_imag = max_imag.max(c[k].im.abs());
        complex |= !(c[k].im.abs() < COMPLEX_TOL * (1.0 + c[k].re.abs()));
    }
    (value, max_imag, complex)
}

/// Advances a state from coordinate 0 to every entry of the ascending
/// `coords`, outward in both directions. After a failure every later entry
/// in the same direction inherits the error.
fn sweep<F>(coords: &[f64], origin: [Mat2; 2], mut advance: F) -> Vec<Result<[Mat2; 2]>>
where
    F: FnMut(f64, f64, [Mat2; 2]) -> Result<[Mat2; 2]>,
{
    let mut out = vec![Err(Error::Invalid("unreached")); coords.len()];
    let split = coords.partition_point(|c| *c < 0.0);
    let mut walk = |order: &mut dyn Iterator<Item = usize>| {
        let mut state: Result<(f64, [Mat2; 2])> = Ok((0.0, origin));
        for i in order {
            state = state.and_then(|(t, s)| Ok((coords[i], advance(t, coords[i], s)?)));
            out[i] = state.clone().map(|(_, s)| s);
        }
    };
    walk(&mut (split..coords.len()));
    walk(&mut (0..split).rev());
    out
}

/// Sampled lattice, stored column-major: `points[i * ny + j]` sits at `(x_i, y_j)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceGrid {
    pub config: GridConfig,
    pub offset: [f64; 3],
    pub points: Vec<SurfacePoint>,
}

impl SurfaceGrid {
    pub fn point(&self, i: usize, j: usize) -> &SurfacePoint {
        &self.points[i * self.config.ny + j]
    }

    /// Number of points per mask code, in the order ok, singular, degenerate, complex.
    pub fn mask_counts(&self) -> [usize; 4] {
        let mut n = [0; 4];
        for p in &self.points {
            n[p.mask as usize] += 1;
        }
        n
    }
}

/// Serial evaluation of the whole grid.
pub fn sample_grid(spec: &ImmersionSpec, ctx: &SpectralContext, config: &GridConfig) -> Result<SurfaceGrid> {
    let plan = GridPlan::new(spec, ctx, config)?;
    let columns = (0..config.nx).map(|i| plan.sample_column(i)).collect();
    plan.assemble(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::{frame_at, Term};
    use crate::model::{EllipticKind, ModelSpec};

    fn sn_ctx(lambda: f64) -> SpectralContext {
        SpectralContext::new(ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap(), lambda).unwrap()
    }

    fn small(nx: usize, ny: usize) -> GridConfig {
        GridConfig { x_range: [-2.0, 2.0], y_range: [-1.5, 1.5], nx, ny, ..GridConfig::default() }
    }

    #[test]
    fn lattice_hits_endpoints() {
        let c = small(5, 4);
        assert_eq!(c.x(0), -2.0);
        assert_eq!(c.x(4), 2.0);
        assert_eq!(c.x(2), 0.0);
        assert_eq!(c.y(3), 1.5);
    }

    #[test]
    fn rejects_bad_configs() {
        let spec = ImmersionSpec::single(Term::Translation);
        assert!(sample_grid(&spec, &sn_ctx(1.2), &small(1, 4)).is_err());
        let mut c = small(3, 3);
        c.x_range = [1.0, 1.0];
        assert!(sample_grid(&spec, &sn_ctx(1.2), &c).is_err());
    }

    #[test]
    fn values_match_pointwise_evaluation() {
        let spec = ImmersionSpec::new([0.3, 1.0, 0.0, 0.5, 0.2, 0.0]).unwrap();
        let ctx = sn_ctx(1.2);
        let grid = sample_grid(&spec, &ctx, &small(3, 3)).unwrap();
        let solver = WaveSolver::new(ctx.clone());
        for p in &grid.points {
            let frame = frame_at(&solver, &spec, p.x, p.y).unwrap();
            let lj = ctx.lax_jet(&ctx.jet(p.x).unwrap()).unwrap();
            let direct = coeffs_re(&immersion_from_frame(&spec, &lj, &frame).unwrap());
            let v = p.value.unwrap();
            for k in 0..3 {
                assert!((v[k] - direct[k]).abs() < 1e-8 * (1.0 + direct[k].abs()), "{p:?}");
            }
        }
    }

    #[test]
    fn dilation_row_at_x0_vanishes() {
        let spec = ImmersionSpec::single(Term::DilationX);
        let grid = sample_grid(&spec, &sn_ctx(1.2), &small(5, 4)).unwrap();
        for j in 0..4 {
            let p = grid.point(2, j);
            assert_eq!(p.x, 0.0);
            assert!(p.value.unwrap().iter().all(|v| v.abs() < 1e-14));
            // B = x D_xM vanishes with x.
            assert_eq!(p.mask, Mask::Degenerate);
        }
    }

    #[test]
    fn singular_band_is_premasked() {
        // sn crosses u = -0.5 near x = -0.52.
        let spec = ImmersionSpec::single(Term::Translation);
        let cfg = GridConfig { x_range: [-0.6, 0.6], y_range: [0.0, 1.0], nx: 121, ny: 2, ..GridConfig::default() };
        let ctx = sn_ctx(0.5);
        let grid = sample_grid(&spec, &ctx, &cfg).unwrap();
        let singular: Vec<f64> = (0..cfg.nx).filter(|&i| grid.point(i, 0).mask == Mask::Singular).map(|i| cfg.x(i)).collect();
        assert!(singular.len() > 3);
        assert!(singular.iter().all(|x| (ctx.jet(*x).unwrap().u + 0.5).abs() < 0.03));
        assert!(grid.point(120, 1).mask == Mask::Ok);
    }

    #[test]
    fn centering_subtracts_origin_value() {
        let spec = ImmersionSpec::single(Term::Translation);
        let ctx = sn_ctx(1.2);
        let plain = sample_grid(&spec, &ctx, &small(3, 3)).unwrap();
        let centered = sample_grid(&spec, &ctx, &GridConfig { center: true, ..small(3, 3) }).unwrap();
        let o = centered.offset;
        assert!(o.iter().any(|v| *v != 0.0));
        let (a, b) = (plain.point(1, 1).value.unwrap(), centered.point(1, 1).value.unwrap());
        assert!(b.iter().all(|v| v.abs() < 1e-12));
        for k in 0..3 {
            assert!((a[k] - o[k] - b[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn columns_are_order_independent() {
        let spec = ImmersionSpec::single(Term::SymTafel);
        let ctx = sn_ctx(0.5);
        let plan = GridPlan::new(&spec, &ctx, &small(4, 3)).unwrap();
        let forward: Vec<_> = (0..4).map(|i| plan.sample_column(i)).collect();
        let mut backward: Vec<_> = (0..4).rev().map(|i| plan.sample_column(i)).collect();
        backward.reverse();
        assert_eq!(forward, backward);
        let grid = plan.assemble(forward).unwrap();
        assert_eq!(grid.mask_counts().iter().sum::<usize>(), 12);
    }

    #[test]
    fn ok_points_carry_finite_real_data() {
        let spec = ImmersionSpec::new([1.0, 1.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let grid = sample_grid(&spec, &sn_ctx(1.2), &small(4, 4)).unwrap();
        for p in grid.points.iter().filter(|p| p.mask == Mask::Ok) {
            assert!(p.value.unwrap().iter().all(|v| v.is_finite()));
            assert!(p.max_imag < 1e-12);
            let c = p.curvature.unwrap();
            assert!(c.k.is_finite() && c.h.is_finite());
        }
    }
}
