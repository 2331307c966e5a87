//! Run configuration: a TOML file with nested sections, overridable by
//! command-line flags, plus the built-in example configurations.

use serde::{Deserialize, Serialize};

use cantilever_core::error::{Error, Result};
use cantilever_core::grid::QuadratureConfig;
use cantilever_core::presets;
use cantilever_core::variational::{ShellSpec, ShellVariant};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub panels: usize,
    pub quadrature: QuadratureSection,
    pub nonlinearity: NonlinearitySection,
    pub shell: ShellSection,
    pub solver: SolverSection,
    pub minimize: MinimizeSection,
    pub mountain_pass: MountainPassSection,
    pub certify: CertifySection,
    pub scan: ScanSection,
    pub reproduce: ReproduceSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            panels: 256,
            quadrature: QuadratureSection::default(),
            nonlinearity: NonlinearitySection::default(),
            shell: ShellSection::default(),
            solver: SolverSection::default(),
            minimize: MinimizeSection::default(),
            mountain_pass: MountainPassSection::default(),
            certify: CertifySection::default(),
            scan: ScanSection::default(),
            reproduce: ReproduceSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub points_per_panel: usize,
    pub refinement_tolerance: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            points_per_panel: 8,
            refinement_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearitySection {
    pub dsl: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShellSection {
    pub variant: ShellVariant,
    pub r0: f64,
    pub r1: f64,
}

impl Default for ShellSection {
    fn default() -> Self {
        Self {
            variant: ShellVariant::Energetic,
            r0: 1.0,
            r1: 37.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// picard | monotone-up | monotone-down | newton
    pub method: String,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: "monotone-down".into(),
            tol: 1e-10,
            max_iterations: 300,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimizeSection {
    pub tol: f64,
    pub starts: usize,
}

impl Default for MinimizeSection {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            starts: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MountainPassSection {
    pub path_points: usize,
    pub tol: f64,
    /// Scale of the upper endpoint `w1 = scale * w0 / sup(u0)` built from
    /// the normalized eigen-shape `w0`.
    pub endpoint_scale: f64,
}

impl Default for MountainPassSection {
    fn default() -> Self {
        Self {
            path_points: 17,
            tol: 1e-6,
            endpoint_scale: 64.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySection {
    /// Station for the pointwise (autonomous) conditions.
    pub a: f64,
    /// Sup-norm radii for the fixed-point conditions; default to the shell
    /// radii when absent.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Which hypothesis families to check: subsets of
    /// ["h2", "f2", "r0", "H1"]. The monotonicity evidence always runs.
    pub checks: Vec<String>,
}

impl Default for CertifySection {
    fn default() -> Self {
        Self {
            a: 0.75,
            alpha: None,
            beta: None,
            checks: ["h2", "f2", "r0", "H1"].map(String::from).to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub a: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    pub pairs: Vec<(f64, f64)>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            a: 0.75,
            tau_min: 1e-8,
            tau_max: 1e4,
            tau_points: 49,
            pairs: vec![(1.0, 37.0)],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReproduceSection {
    pub p: f64,
    pub a: f64,
    pub b_max: f64,
}

impl Default for ReproduceSection {
    fn default() -> Self {
        Self {
            p: 0.5,
            a: 0.75,
            b_max: 1e4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub json: bool,
    pub csv: bool,
    /// Significant digits in CSV output.
    pub csv_digits: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            json: true,
            csv: true,
            csv_digits: 17,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Built-in example configurations selectable by `--example`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "paper-3-3" => {
                let mut cfg = Self::default();
                cfg.nonlinearity.dsl = Some(presets::ramp_saturation_dsl().to_string());
                cfg.shell = ShellSection {
                    variant: ShellVariant::Energetic,
                    r0: 1.0,
                    r1: 37.0,
                };
                // the worked radii certify the integral conditions and the
                // fixed-point compression, not the pointwise or two-norm
                // routes
                cfg.certify.checks = ["h2", "r0"].map(String::from).to_vec();
                Ok(cfg)
            }
            "paper-3-9" => {
                let mut cfg = Self::default();
                let b = cfg.mountain_pass.endpoint_scale;
                cfg.nonlinearity.dsl = Some(presets::power_family_dsl(0.5, b));
                // radii from the pointwise conditions at a = 3/4
                cfg.shell = ShellSection {
                    variant: ShellVariant::Energetic,
                    r0: 2.3763907842810424e-7,
                    r1: 600.0,
                };
                cfg.certify.checks = ["h2", "f2"].map(String::from).to_vec();
                cfg.solver.method = "newton".into();
                Ok(cfg)
            }
            other => Err(Error::Config(format!(
                "unknown example '{other}' (available: paper-3-3, paper-3-9)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.panels.is_power_of_two() || !(32..=4096).contains(&self.panels) {
            return Err(Error::Config(format!(
                "panels must be a power of two between 32 and 4096, got {}",
                self.panels
            )));
        }
        for (name, tol) in [
            (
                "quadrature.refinement_tolerance",
                self.quadrature.refinement_tolerance,
            ),
            ("solver.tol", self.solver.tol),
            ("minimize.tol", self.minimize.tol),
            ("mountain_pass.tol", self.mountain_pass.tol),
        ] {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {tol}")));
            }
        }
        self.quad().validate()?;
        Ok(())
    }

    pub fn quad(&self) -> QuadratureConfig {
        QuadratureConfig {
            panels: self.panels,
            points_per_panel: self.quadrature.points_per_panel,
            refinement_tolerance: self.quadrature.refinement_tolerance,
        }
    }

    pub fn shell_spec(&self) -> ShellSpec {
        ShellSpec {
            variant: self.shell.variant,
            r0: self.shell.r0,
            r1: self.shell.r1,
        }
    }

    pub fn dsl(&self) -> Result<&str> {
        self.nonlinearity.dsl.as_deref().ok_or_else(|| {
            Error::Config("no nonlinearity configured (set nonlinearity.dsl)".into())
        })
    }
}
