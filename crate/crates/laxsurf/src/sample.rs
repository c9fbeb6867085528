//! Column-parallel grid sampling and the branch diagnostics that accompany it.

use laxsurf_core::grid::{GridConfig, GridPlan, SurfaceGrid, SINGULAR_BAND};
use laxsurf_core::immersion::ImmersionSpec;
use laxsurf_core::laxpair::SpectralContext;
use laxsurf_core::wavefunction::{LAMBDA_STEP, SPECTRUM_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Samples every column on the rayon pool. The result does not depend on
/// scheduling: columns are independent and collected in order.
pub fn sample_parallel(spec: &ImmersionSpec, ctx: &SpectralContext, config: &GridConfig) -> Result<SurfaceGrid> {
    let plan = GridPlan::new(spec, ctx, config)?;
    let columns = (0..config.nx).into_par_iter().map(|i| plan.sample_column(i)).collect();
    Ok(plan.assemble(columns)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `g > 0`: real `√g`, exponential growth in `y`.
    Exponential,
    /// `g < 0`: imaginary `√g`, oscillation in `y`.
    Trigonometric,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskCounts {
    pub ok: usize,
    pub singular: usize,
    pub degenerate: usize,
    pub complex: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchDiagnostics {
    pub lambda: f64,
    pub g: f64,
    /// Principal `√g` as `[re, im]`.
    pub sqrt_g: [f64; 2],
    pub regime: Regime,
    /// Whether `g` keeps its sign over the λ-difference stencil.
    pub lambda_stencil_on_branch: bool,
    /// Range of `u` over the sampled `x` values.
    pub u_range: [f64; 2],
    /// Whether `u + λ` changes sign over the sampled `x` values.
    pub crosses_pole: bool,
    /// Half-width of the pre-masked band in `u + λ`.
    pub singular_band: f64,
    pub mask_counts: Option<MaskCounts>,
}

impl BranchDiagnostics {
    pub fn new(ctx: &SpectralContext, xs: &[f64], grid: Option<&SurfaceGrid>) -> Self {
        let lambda = ctx.lambda();
        let model = ctx.model();
        let g = model.discriminant(lambda);
        let regime = if g.abs() < SPECTRUM_TOL {
            Regime::Degenerate
        } else if g > 0.0 {
            Regime::Exponential
        } else {
            Regime::Trigonometric
        };
        let (lo, hi) = (model.discriminant(lambda - LAMBDA_STEP), model.discriminant(lambda + LAMBDA_STEP));
        let mut u_range = [f64::INFINITY, f64::NEG_INFINITY];
        for &x in xs {
            if let Ok(j) = ctx.jet(x) {
                u_range = [u_range[0].min(j.u), u_range[1].max(j.u)];
            }
        }
        let mask_counts = grid.map(|g| {
            let [ok, singular, degenerate, complex] = g.mask_counts();
            MaskCounts { ok, singular, degenerate, complex }
        });
        Self {
            lambda,
            g,
            sqrt_g: [ctx.sqrt_g().re, ctx.sqrt_g().im],
            regime,
            lambda_stencil_on_branch: lo.signum() == g.signum() && hi.signum() == g.signum(),
            u_range,
            crosses_pole: u_range[0] + lambda < 0.0 && u_range[1] + lambda > 0.0,
            singular_band: SINGULAR_BAND * (1.0 + lambda.abs()),
            mask_counts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use laxsurf_core::grid::sample_grid;
    use laxsurf_core::immersion::Term;
    use laxsurf_core::model::{EllipticKind, ModelSpec};

    fn ctx(lambda: f64) -> SpectralContext {
        SpectralContext::new(ModelSpec::elliptic(EllipticKind::Sn, 0.5, 1.0).unwrap(), lambda).unwrap()
    }

    #[test]
    fn parallel_equals_serial() {
        let spec = ImmersionSpec::single(Term::SymTafel);
        let cfg = GridConfig { x_range: [-1.0, 1.0], y_range: [-1.0, 1.0], nx: 6, ny: 5, ..GridConfig::default() };
        let c = ctx(1.2);
        assert_eq!(sample_parallel(&spec, &c, &cfg).unwrap(), sample_grid(&spec, &c, &cfg).unwrap());
    }

    #[test]
    fn regimes() {
        let xs: Vec<f64> = (0..65).map(|i| -8.0 + 0.25 * i as f64).collect();
        let d = BranchDiagnostics::new(&ctx(0.5), &xs, None);
        assert_eq!(d.regime, Regime::Exponential);
        assert!(d.crosses_pole);
        assert!((d.g - 0.703125).abs() < 1e-15);
        let d = BranchDiagnostics::new(&ctx(1.2), &xs, None);
        assert_eq!(d.regime, Regime::Trigonometric);
        assert!(!d.crosses_pole);
        assert!(d.sqrt_g[1] > 0.0);
    }
}
