//! JSON run configuration.

use serde::{Deserialize, Serialize};

use cofrag_core::analysis::AnalysisConfig;
use cofrag_core::kernels::UniquenessWeights;
use cofrag_core::solver::MomentPlan;
use cofrag_core::{
    truncate, BreakupKernel, CoagulationKernel, CollisionKernel, EnvelopeParams, GridSpec, InitialCondition, MassGrid,
    PositivityMode, SolverConfig,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub coagulation: CoagulationKernel,
    pub collision: CollisionKernel,
    pub breakup: BreakupKernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationBlock {
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub t_end: f64,
    pub dt_init: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    pub rtol: f64,
    pub atol: f64,
    pub dt_safety: f64,
    pub positivity: PositivityMode,
    pub max_steps: usize,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self { rtol: 1e-6, atol: 1e-9, dt_safety: 0.9, positivity: PositivityMode::RejectStep, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsBlock {
    /// Orders recorded in addition to `-omega, 0, 1, 2`.
    pub xi: Vec<f64>,
    pub omega: f64,
    /// Interval of the pointwise bound; defaults to the grid bounds.
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
}

impl Default for MomentsBlock {
    fn default() -> Self {
        Self { xi: Vec::new(), omega: 0.75, lambda1: None, lambda2: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisBlock {
    pub theta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub mass_tolerance: f64,
    pub contraction_tolerance: f64,
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self { theta: 0.5, sigma1: 2.0, sigma2: 0.9, mass_tolerance: 1e-6, contraction_tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub kernels: KernelBlock,
    pub truncation: TruncationBlock,
    pub initial: InitialCondition,
    pub time: TimeBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub moments: MomentsBlock,
    #[serde(default)]
    pub analysis: AnalysisBlock,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Canonical text: pretty JSON with a trailing newline.
    pub fn emit(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("run config serializes");
        text.push('\n');
        text
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.solver_config()?;
        self.initial.validate().map_err(CliError::from_core_config)?;
        self.analysis_config().validate().map_err(CliError::from_core_config)?;
        for (name, v) in [("moments.lambda1", self.moments.lambda1), ("moments.lambda2", self.moments.lambda2)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Config(format!("{name} must be a positive mass, got {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<MassGrid, CliError> {
        MassGrid::try_from(self.grid).map_err(CliError::from_core_config)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let grid = self.grid()?;
        let k = &self.kernels;
        let kernels =
            truncate(k.coagulation.clone(), k.collision.clone(), self.truncation.n).map_err(CliError::from_core_config)?;
        let cfg = SolverConfig {
            grid,
            kernels,
            breakup: k.breakup.clone(),
            t_end: self.time.t_end,
            dt_init: self.time.dt_init,
            dt_safety: self.solver.dt_safety,
            rtol: self.solver.rtol,
            atol: self.solver.atol,
            positivity: self.solver.positivity,
            max_steps: self.solver.max_steps,
            sample_count: self.time.sample_count,
            moments: MomentPlan { omega: self.moments.omega, extra: self.moments.xi.clone() },
        };
        cfg.validate().map_err(CliError::from_core_config)?;
        Ok(cfg)
    }

    pub fn lambda(&self) -> (f64, f64) {
        (self.moments.lambda1.unwrap_or(self.grid.x_min), self.moments.lambda2.unwrap_or(self.grid.x_max))
    }

    pub fn envelope_params(&self) -> Result<EnvelopeParams, CliError> {
        let k = &self.kernels;
        EnvelopeParams::from_kernels(&k.coagulation, &k.collision, &k.breakup, self.moments.omega, self.time.t_end, self.lambda())
            .map_err(CliError::from_core_config)
    }

    pub fn analysis_config(&self) -> AnalysisConfig {
        AnalysisConfig { theta: self.analysis.theta, sigma1: self.analysis.sigma1, sigma2: self.analysis.sigma2 }
    }

    pub fn uniqueness_weights(&self) -> UniquenessWeights {
        UniquenessWeights { theta: self.analysis.theta, sigma1: self.analysis.sigma1, sigma2: self.analysis.sigma2 }
    }

    pub fn with_truncation(&self, n: u32) -> Self {
        Self { truncation: TruncationBlock { n }, ..self.clone() }
    }
}
