//! Grid sampling, mesh and report export, validation and the command-line
//! front end for [`laxsurf_core`].

pub mod config;
pub mod error;
pub mod export;
pub mod report;
pub mod sample;

use laxsurf_core::grid::SurfaceGrid;
use serde::{Deserialize, Serialize};

pub use config::Config;
pub use error::{Error, Result};

use report::ComparisonReport;
use sample::BranchDiagnostics;

/// Everything the JSON export of a surface carries.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceDocument<'a> {
    pub config: &'a Config,
    pub diagnostics: BranchDiagnostics,
    pub comparison: Option<ComparisonReport>,
    pub grid: &'a SurfaceGrid,
}

/// The re-readable part of a [`SurfaceDocument`].
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct SurfaceDump {
    pub config: Config,
    pub diagnostics: BranchDiagnostics,
    pub grid: SurfaceGrid,
}

/// A sampled surface together with the configuration that produced it.
pub struct Run {
    pub config: Config,
    pub grid: SurfaceGrid,
}

impl Run {
    pub fn sample(config: &Config) -> Result<Self> {
        let grid = sample::sample_parallel(&config.immersion()?, &config.context()?, &config.grid())?;
        // The destination is not part of the result, so identical runs stay byte-identical wherever they are written.
        Ok(Self { config: Config { out: None, ..config.clone() }, grid })
    }

    pub fn diagnostics(&self) -> Result<BranchDiagnostics> {
        Ok(BranchDiagnostics::new(&self.config.context()?, &self.config.grid().xs(), Some(&self.grid)))
    }

    pub fn obj(&self) -> String {
        let c = &self.config;
        let header = format!(
            "laxsurf surface={:?} model={:?} k={} lambda={} epsilon={}\nvertices are (F1, F2, F3) in the basis e1, e2, e3",
            c.surface, c.model, c.k, c.lambda, c.epsilon
        );
        export::to_obj(&self.grid, &header)
    }

    pub fn csv(&self) -> String {
        export::to_csv(&self.grid)
    }

    pub fn json(&self) -> Result<String> {
        let doc = SurfaceDocument {
            config: &self.config,
            diagnostics: self.diagnostics()?,
            comparison: report::comparison_report(&self.config.context()?)?,
            grid: &self.grid,
        };
        export::to_json(&doc)
    }

    /// The export selected by the configured format.
    pub fn render(&self) -> Result<String> {
        match self.config.format {
            config::Format::Obj => Ok(self.obj()),
            config::Format::Csv => Ok(self.csv()),
            config::Format::Json => self.json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_dump_reads_back() {
        let config = Config { nx: 4, ny: 3, xrange: [-1.0, 1.0], yrange: [-1.0, 1.0], ..Config::default() };
        let run = Run::sample(&config).unwrap();
        let dump: SurfaceDump = serde_json::from_str(&run.json().unwrap()).unwrap();
        assert_eq!(dump.config, config);
        assert_eq!(dump.grid, run.grid);
    }
}
