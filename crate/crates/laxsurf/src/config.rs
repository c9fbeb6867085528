//! Run configuration, read from TOML and overridden by command-line flags.
//!
//! ```toml
//! model = "sn"
//! k = 0.5
//! lambda = 1.2
//! surface = "dilation"
//! xrange = [-8.0, 8.0]
//! nx = 64
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use laxsurf_core::geometry::Metric;
use laxsurf_core::grid::GridConfig;
use laxsurf_core::immersion::{Gauge, ImmersionSpec, Term};
use laxsurf_core::laxpair::SpectralContext;
use laxsurf_core::model::{EllipticKind, ModelSpec};
use laxsurf_core::wavefunction::PsiVariant;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Sn,
    Cn,
    Dn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceName {
    /// Sym–Tafel surface `a Φ⁻¹ ∂Φ/∂λ`.
    St,
    Translation,
    /// `x Φ⁻¹LΦ`, the surface of the regime plots.
    Dilation,
    Symmetry,
    Gauge,
    /// Linear combination weighted by `alpha`.
    Combined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum GaugeName {
    #[serde(rename = "e1")]
    #[value(name = "e1")]
    E1,
    #[serde(rename = "e2")]
    #[value(name = "e2")]
    E2,
    #[serde(rename = "e3")]
    #[value(name = "e3")]
    E3,
    L,
    M,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Euclidean,
    Killing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Obj,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PsiVariantName {
    AsPrinted,
    K1Corrected,
    Rederived,
}

/// Every option of a run. Missing TOML keys take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelName,
    pub k: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub surface: SurfaceName,
    /// Weights of translation, Sym–Tafel, gauge, x-dilation, y-dilation and
    /// symmetry; read only by the combined surface.
    pub alpha: [f64; 6],
    pub gauge: GaugeName,
    pub a_lambda: f64,
    pub metric: MetricName,
    pub xrange: [f64; 2],
    pub yrange: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub psi_variant: PsiVariantName,
    pub center: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            model: ModelName::Sn,
            k: 0.5,
            lambda: 1.2,
            epsilon: 1.0,
            surface: SurfaceName::Dilation,
            alpha: [1.0; 6],
            gauge: GaugeName::E1,
            a_lambda: 1.0,
            metric: MetricName::Killing,
            xrange: [-8.0, 8.0],
            yrange: [-8.0, 8.0],
            nx: 64,
            ny: 64,
            format: Format::Obj,
            out: None,
            psi_variant: PsiVariantName::Rederived,
            center: false,
        }
    }
}

/// Command-line flags; each one set replaces the corresponding config value.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// TOML file with any subset of the options below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Elliptic modulus in [0, 1].
    #[arg(long)]
    pub k: Option<f64>,
    /// Spectral parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Orientation of the solution, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub surface: Option<SurfaceName>,
    /// Six comma-separated weights for the combined surface.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_alpha)]
    pub alpha: Option<[f64; 6]>,
    #[arg(long, value_enum)]
    pub gauge: Option<GaugeName>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricName>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub xrange: Option<[f64; 2]>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub yrange: Option<[f64; 2]>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub psi_variant: Option<PsiVariantName>,
    /// Subtract F(0, 0) from the surface.
    #[arg(long)]
    pub center: bool,
}

fn parse_list<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

fn parse_alpha(s: &str) -> std::result::Result<[f64; 6], String> {
    parse_list(s)
}

fn parse_range(s: &str) -> std::result::Result<[f64; 2], String> {
    parse_list(s)
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// The file named by `--config` (or the defaults) with the flags applied.
    pub fn resolve(flags: &Overrides) -> Result<Self> {
        let mut c = match &flags.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        c.apply(flags);
        Ok(c)
    }

    pub fn apply(&mut self, f: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &f.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        set!(model, k, lambda, epsilon, surface, alpha, gauge, a_lambda, metric, xrange, yrange, nx, ny, format, psi_variant);
        if f.out.is_some() {
            self.out = f.out.clone();
        }
        if f.center {
            self.center = true;
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let kind = match self.model {
            ModelName::Sn => EllipticKind::Sn,
            ModelName::Cn => EllipticKind::Cn,
            ModelName::Dn => EllipticKind::Dn,
        };
        Ok(ModelSpec::elliptic(kind, self.k, self.epsilon)?)
    }

    pub fn context(&self) -> Result<SpectralContext> {
        Ok(SpectralContext::new(self.model_spec()?, self.lambda)?)
    }

    pub fn immersion(&self) -> Result<ImmersionSpec> {
        let gauge = match self.gauge {
            GaugeName::E1 => Gauge::Constant([1.0, 0.0, 0.0]),
            GaugeName::E2 => Gauge::Constant([0.0, 1.0, 0.0]),
            GaugeName::E3 => Gauge::Constant([0.0, 0.0, 1.0]),
            GaugeName::L => Gauge::L,
            GaugeName::M => Gauge::M,
        };
        let base = match self.surface {
            SurfaceName::St => ImmersionSpec::single(Term::SymTafel),
            SurfaceName::Translation => ImmersionSpec::single(Term::Translation),
            SurfaceName::Dilation => ImmersionSpec::single(Term::DilationX),
            SurfaceName::Symmetry => ImmersionSpec::single(Term::Symmetry),
            SurfaceName::Gauge => ImmersionSpec::single(Term::Gauge),
            SurfaceName::Combined => ImmersionSpec::new(self.alpha)?,
        };
        Ok(base.with_gauge(gauge).with_a_lambda(self.a_lambda))
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig {
            x_range: self.xrange,
            y_range: self.yrange,
            nx: self.nx,
            ny: self.ny,
            metric: match self.metric {
                MetricName::Euclidean => Metric::Euclidean,
                MetricName::Killing => Metric::Killing,
            },
            center: self.center,
        }
    }

    pub fn psi_variant(&self) -> PsiVariant {
        match self.psi_variant {
            PsiVariantName::AsPrinted => PsiVariant::AsPrinted,
            PsiVariantName::K1Corrected => PsiVariant::K1Corrected,
            PsiVariantName::Rederived => PsiVariant::Rederived,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c = Config::from_toml("lambda = 0.5\nsurface = \"st\"\nxrange = [-2.0, 3.0]\n").unwrap();
        assert_eq!(c.lambda, 0.5);
        assert_eq!(c.surface, SurfaceName::St);
        assert_eq!(c.xrange, [-2.0, 3.0]);
        assert_eq!(c.nx, 64);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_toml("lamda = 0.5\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut c = Config::from_toml("k = 0.3\nnx = 10\ngauge = \"M\"\n").unwrap();
        c.apply(&Overrides { k: Some(0.9), center: true, ..Overrides::default() });
        assert_eq!(c.k, 0.9);
        assert_eq!(c.nx, 10);
        assert_eq!(c.gauge, GaugeName::M);
        assert!(c.center);
    }

    #[test]
    fn toml_round_trip() {
        let c = Config { out: Some("a.obj".into()), alpha: [0.5, -1.0, 0.0, 2.0, 0.0, 0.25], ..Config::default() };
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn list_parsers() {
        assert_eq!(parse_range("-8, 8").unwrap(), [-8.0, 8.0]);
        assert!(parse_range("1,2,3").is_err());
        assert_eq!(parse_alpha("1,0,0,1,0,0").unwrap(), [1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn builds_core_objects() {
        let c = Config { surface: SurfaceName::Combined, alpha: [0.0, 1.0, 0.0, 0.0, 0.0, 0.0], ..Config::default() };
        assert!(c.immersion().unwrap().needs_lambda_derivative());
        assert!(Config { alpha: [0.0; 6], ..c.clone() }.immersion().is_err());
        assert!(Config { k: 1.5, ..Config::default() }.context().is_err());
    }
}
