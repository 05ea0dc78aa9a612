//! Run configuration, its preflight validation, and the assembled model.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::assembly::assemble_energy;
use crate::diffusion::DiffSolveConfig;
use crate::error::{Error, Result};
use crate::grid::{DirichletSides, Grid, Side};
use crate::laws::{
    biot_material, BiotParams, Clause, ExponentProfile, FreeEnergy, IsotropicViscosity, NeoHookeanEntropy,
    NeoHookeanEntropyParams, PowerHyperstress, PowerMobility, Violation,
};
use crate::loading::{LoadSpec, TimeFunction};
use crate::mechanics::MechSolveConfig;
use crate::operators::DiscreteOperators;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n_cells: usize,
    pub dirichlet: DirichletSides,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dim: 1,
            n_cells: 64,
            dirichlet: DirichletSides::Left,
        }
    }
}

/// Equidistant partition `t_k = kτ`, `τ = T/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSpec {
    pub final_time: f64,
    pub n_steps: usize,
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            final_time: 1.0,
            n_steps: 128,
        }
    }
}

impl TimeSpec {
    pub fn tau(&self) -> f64 {
        self.final_time / self.n_steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum MaterialSpec {
    Biot(BiotParams),
    NeoHookeanEntropy(NeoHookeanEntropyParams),
}

impl Default for MaterialSpec {
    fn default() -> Self {
        MaterialSpec::Biot(BiotParams::default())
    }
}

impl MaterialSpec {
    pub fn build(&self) -> Result<Box<dyn FreeEnergy>> {
        Ok(match *self {
            MaterialSpec::Biot(p) => Box::new(biot_material(p)?),
            MaterialSpec::NeoHookeanEntropy(p) => Box::new(NeoHookeanEntropy::new(p)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PermeabilitySpec {
    pub left: f64,
    pub right: f64,
}

impl Default for PermeabilitySpec {
    fn default() -> Self {
        PermeabilitySpec { left: 0.0, right: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizationSpec {
    pub eta: f64,
    /// Defaults to the smallest integer above `d/2`.
    pub theta: Option<usize>,
}

impl Default for RegularizationSpec {
    fn default() -> Self {
        RegularizationSpec { eta: 1e-4, theta: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialDeformation {
    #[default]
    Identity,
    /// `χ₀(x) = factor · x`; only compatible with a pinned left end.
    Stretch { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConcentration {
    Constant {
        value: f64,
    },
    /// Linear profile from `left` at `x = 0` to `right` at `x = 1`.
    Linear {
        left: f64,
        right: f64,
    },
    /// `mean + amplitude · cos(2π · waves · x)`.
    Cosine {
        mean: f64,
        amplitude: f64,
        waves: f64,
    },
}

impl Default for InitialConcentration {
    fn default() -> Self {
        InitialConcentration::Constant { value: 1.0 }
    }
}

impl InitialConcentration {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            InitialConcentration::Constant { value } => value,
            InitialConcentration::Linear { left, right } => left + (right - left) * x,
            InitialConcentration::Cosine { mean, amplitude, waves } => {
                mean + amplitude * (std::f64::consts::TAU * waves * x).cos()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub chi: InitialDeformation,
    pub c: InitialConcentration,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for `steps.csv`, `diagnostics.csv`, `snapshots/` and
    /// `run.json`; nothing is written when absent.
    pub dir: Option<PathBuf>,
    /// Write field snapshots every this many steps. Defaults to every step
    /// for `N ≤ 256`, otherwise 256 evenly spaced snapshots.
    pub snapshot_every: Option<usize>,
}

/// Complete description of a run. `Default` is the one-dimensional Biot
/// benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub material: MaterialSpec,
    pub hyperstress: PowerHyperstress,
    pub viscosity: IsotropicViscosity,
    pub mobility: PowerMobility,
    pub permeability: PermeabilitySpec,
    pub mu_ext: TimeFunction,
    pub body_force: TimeFunction,
    pub traction: TimeFunction,
    pub regularization: RegularizationSpec,
    pub initial: InitialSpec,
    pub mechanics: MechSolveConfig,
    pub diffusion: DiffSolveConfig,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSpec::default(),
            time: TimeSpec::default(),
            material: MaterialSpec::default(),
            hyperstress: PowerHyperstress::default(),
            viscosity: IsotropicViscosity::default(),
            mobility: PowerMobility::default(),
            permeability: PermeabilitySpec::default(),
            mu_ext: TimeFunction::Sine {
                amplitude: 0.5,
                frequency: 1.0,
                phase: 0.0,
                offset: 0.0,
            },
            body_force: TimeFunction::zero(),
            traction: TimeFunction::Ramp {
                slope: 0.5,
                offset: 0.0,
            },
            regularization: RegularizationSpec::default(),
            initial: InitialSpec::default(),
            mechanics: MechSolveConfig::default(),
            diffusion: DiffSolveConfig::default(),
            output: OutputSpec::default(),
        }
    }
}

/// Named configurations shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Biot benchmark: tensile end ramp, exchange on the right end.
    Benchmark,
    /// The benchmark with both permeabilities set to zero.
    Closed,
    /// The benchmark under a compressive end ramp.
    Compressive,
    /// Calibrated stress-free state without loads or exchange.
    Equilibrium,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Benchmark,
        Preset::Closed,
        Preset::Compressive,
        Preset::Equilibrium,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Benchmark => "benchmark",
            Preset::Closed => "closed",
            Preset::Compressive => "compressive",
            Preset::Equilibrium => "equilibrium",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = RunConfig::default();
        match preset {
            Preset::Benchmark => base,
            Preset::Closed => RunConfig {
                permeability: PermeabilitySpec { left: 0.0, right: 0.0 },
                ..base
            },
            Preset::Compressive => RunConfig {
                traction: TimeFunction::Ramp {
                    slope: -4.0,
                    offset: 0.0,
                },
                ..base
            },
            Preset::Equilibrium => RunConfig {
                mu_ext: TimeFunction::zero(),
                traction: TimeFunction::zero(),
                ..base
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(vec![format!("malformed configuration: {e}")]))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn theta(&self) -> usize {
        self.regularization.theta.unwrap_or(self.grid.dim / 2 + 1)
    }

    pub fn tau(&self) -> f64 {
        self.time.tau()
    }

    pub fn loads(&self) -> LoadSpec {
        LoadSpec {
            body_force: self.body_force,
            traction: self.traction,
        }
    }

    pub fn snapshot_every(&self) -> usize {
        self.output
            .snapshot_every
            .unwrap_or_else(|| self.time.n_steps.div_ceil(256))
            .max(1)
    }
}

/// Laws, grid and operators assembled from a validated configuration.
#[derive(Debug)]
pub struct Model {
    pub grid: Grid,
    pub ops: DiscreteOperators,
    pub material: Box<dyn FreeEnergy>,
    pub hyper: PowerHyperstress,
    pub visc: IsotropicViscosity,
    pub mobility: PowerMobility,
    pub loads: LoadSpec,
    pub mu_ext: TimeFunction,
    pub eta: f64,
    pub tau: f64,
    pub n_steps: usize,
}

impl Model {
    pub fn build(config: &RunConfig) -> Result<Self> {
        let violations = validate_config(config);
        if !violations.is_empty() {
            return Err(Error::ConfigInvalid(violations.iter().map(|v| v.to_string()).collect()));
        }
        Model::build_unchecked(config)
    }

    fn build_unchecked(config: &RunConfig) -> Result<Self> {
        let grid = Grid::new(
            config.grid.n_cells,
            config.grid.dirichlet,
            config.permeability.left,
            config.permeability.right,
        )?;
        let ops = DiscreteOperators::new(&grid, config.theta());
        Ok(Model {
            grid,
            ops,
            material: config.material.build()?,
            hyper: PowerHyperstress::new(config.hyperstress.c_h, config.hyperstress.p)?,
            visc: IsotropicViscosity::new(config.viscosity.nu)?,
            mobility: PowerMobility::new(config.mobility.m, config.mobility.scale)?,
            loads: config.loads(),
            mu_ext: config.mu_ext,
            eta: config.regularization.eta,
            tau: config.tau(),
            n_steps: config.time.n_steps,
        })
    }

    pub fn initial_state(&self, config: &RunConfig) -> (Vec<f64>, Vec<f64>) {
        initial_fields(&self.grid, config)
    }
}

fn initial_fields(grid: &Grid, config: &RunConfig) -> (Vec<f64>, Vec<f64>) {
    let chi = match config.initial.chi {
        InitialDeformation::Identity => grid.identity_map(),
        InitialDeformation::Stretch { factor } => grid.nodes().iter().map(|x| factor * x).collect(),
    };
    let c = grid.cell_centers().iter().map(|&x| config.initial.c.value(x)).collect();
    (chi, c)
}

/// Every structural problem with `config`; empty iff the run may proceed.
pub fn validate_config(config: &RunConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |clause, msg: String| out.push(Violation::new(clause, msg));
    let d = config.grid.dim;
    let theta = config.theta();

    if !(1..=2).contains(&d) {
        push(Clause::Discretization, format!("dimension must be 1 or 2 (d = {d})"));
    } else if d == 2 {
        push(
            Clause::Discretization,
            "two-dimensional grids are not implemented; use d = 1".into(),
        );
    }
    if 2 * theta <= d {
        push(
            Clause::Regularization,
            format!("θ > d/2 required (θ = {theta}, d = {d})"),
        );
    }
    let min_cells = crate::grid::MIN_CELLS.max(theta + 2);
    if config.grid.n_cells < min_cells {
        push(
            Clause::Discretization,
            format!(
                "at least {min_cells} cells are required (n_cells = {})",
                config.grid.n_cells
            ),
        );
    }
    if !(config.regularization.eta > 0.0 && config.regularization.eta.is_finite()) {
        push(
            Clause::Regularization,
            format!("η must be positive (η = {})", config.regularization.eta),
        );
    }
    if !(config.time.final_time > 0.0 && config.time.final_time.is_finite()) || config.time.n_steps == 0 {
        push(
            Clause::Discretization,
            format!(
                "time horizon must be positive with at least one step (T = {}, N = {})",
                config.time.final_time, config.time.n_steps
            ),
        );
    }
    for msg in config
        .mechanics
        .violations()
        .into_iter()
        .chain(config.diffusion.violations())
    {
        push(Clause::Discretization, msg);
    }

    let material = match config.material.build() {
        Ok(m) => Some(m),
        Err(e) => {
            push(Clause::Coercivity, format!("material parameters rejected: {e}"));
            None
        }
    };
    if let Err(e) = PowerHyperstress::new(config.hyperstress.c_h, config.hyperstress.p) {
        push(Clause::Hyperstress, e.to_string());
    }
    if let Err(e) = IsotropicViscosity::new(config.viscosity.nu) {
        push(Clause::Viscosity, e.to_string());
    }
    if let Err(e) = PowerMobility::new(config.mobility.m, config.mobility.scale) {
        push(Clause::Mobility, e.to_string());
    }
    if let Some(m) = &material {
        let profile = ExponentProfile::assemble(m.exponents(), config.hyperstress.p, config.mobility.m);
        out.extend(profile.violations(d));
    }
    let mut push = |clause, msg: String| out.push(Violation::new(clause, msg));

    let kappa = config.permeability;
    if !(kappa.left >= 0.0 && kappa.right >= 0.0 && kappa.left.is_finite() && kappa.right.is_finite()) {
        push(
            Clause::Permeability,
            format!(
                "permeability must be finite and nonnegative (left = {}, right = {})",
                kappa.left, kappa.right
            ),
        );
    }
    for (name, f) in [
        ("mu_ext", config.mu_ext),
        ("body_force", config.body_force),
        ("traction", config.traction),
    ] {
        if !f.is_finite() {
            push(Clause::Loading, format!("{name} has non-finite parameters"));
        }
    }

    if let InitialDeformation::Stretch { factor } = config.initial.chi {
        if !(factor > 0.0 && factor.is_finite()) {
            push(
                Clause::InitialData,
                format!("initial stretch must be positive (factor = {factor})"),
            );
        } else if config.grid.dirichlet.contains(Side::Right) && factor != 1.0 {
            push(
                Clause::InitialData,
                "a stretched initial deformation violates χ = id on a pinned right end".into(),
            );
        }
    }

    // Initial energy and concentration, evaluated only on a usable grid.
    if out.is_empty() {
        if let (Some(m), Ok(grid)) = (
            &material,
            Grid::new(config.grid.n_cells, config.grid.dirichlet, kappa.left, kappa.right),
        ) {
            let (chi, c) = initial_fields(&grid, config);
            let min_c = c.iter().copied().fold(f64::INFINITY, f64::min);
            if !(min_c >= 0.0) {
                out.push(Violation::new(
                    Clause::InitialData,
                    format!("initial concentration must be nonnegative (min = {min_c})"),
                ));
            }
            let ops = DiscreteOperators::new(&grid, theta);
            match assemble_energy(&grid, &ops, m.as_ref(), &config.hyperstress, &chi, &c) {
                Ok(e) if e.is_finite() => {}
                Ok(e) => out.push(Violation::new(
                    Clause::InitialData,
                    format!("initial energy is not finite ({e})"),
                )),
                Err(e) => out.push(Violation::new(
                    Clause::InitialData,
                    format!("initial state inadmissible: {e}"),
                )),
            }
        }
    }
    out
}
