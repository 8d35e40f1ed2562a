//! The JSON experiment config and its translation into solver inputs.
//!
//! Every block has `deny_unknown_fields`, so a typo is a schema violation
//! rather than a silently ignored setting. Defaults are filled in during
//! deserialization and the resolved config is what reports embed.

use nash_core::holder::SpatialGrid;
use nash_core::lq::{riccati_integrate, CouplingParams, Layout, LqGameSpec};
use nash_core::nash::{GameSpec, InitialGuess, MomentumCost};
use nash_core::pde::{Boundary, DiffusionSpec, GridOptions, Profile, ScalarFn, Transport, VectorFn};
use nash_core::weights::{WeightKind, WeightSequence};
use serde::{Deserialize, Serialize};

use crate::RunError;

fn schema(msg: impl Into<String>) -> RunError {
    RunError::Schema(msg.into())
}

/// Core errors raised while building inputs are configuration problems.
fn built<T>(r: nash_core::Result<T>) -> Result<T, RunError> {
    r.map_err(|e| RunError::Schema(e.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand on the command line when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory used when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameConfig>,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fpk: Option<FpkConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<&GridConfig, RunError> {
        self.grid.as_ref().ok_or_else(|| schema("missing `grid` block"))
    }

    pub fn game(&self) -> Result<&GameConfig, RunError> {
        self.game.as_ref().ok_or_else(|| schema("missing `game` block"))
    }

    pub fn seed(&self) -> Result<u64, RunError> {
        self.seed.ok_or_else(|| schema("`seed` is required for this run"))
    }
}

// ---------- weights ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKindName {
    Polynomial,
    GeometricPolynomial,
    Geometric,
    Table,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

/// `{"kind": ..., "params": {...}, "W": ..., "values": [...]}`; `values`
/// runs over `-W..=W` and is only read for tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub kind: WeightKindName,
    #[serde(default)]
    pub params: WeightParams,
    #[serde(rename = "W")]
    pub half_width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        WeightsConfig {
            kind: WeightKindName::Polynomial,
            params: WeightParams { exponent: Some(3.0), ratio: None },
            half_width: 64,
            values: None,
        }
    }
}

impl WeightsConfig {
    pub fn build(&self) -> Result<WeightSequence, RunError> {
        let exponent = || self.params.exponent.ok_or_else(|| schema("weights.params.exponent is required"));
        let ratio = || self.params.ratio.ok_or_else(|| schema("weights.params.ratio is required"));
        let kind = match self.kind {
            WeightKindName::Polynomial => WeightKind::Polynomial { exponent: exponent()? },
            WeightKindName::GeometricPolynomial => {
                WeightKind::GeometricPolynomial { ratio: ratio()?, exponent: exponent()? }
            }
            WeightKindName::Geometric => WeightKind::Geometric { ratio: ratio()? },
            WeightKindName::Table => {
                let values = self.values.as_ref().ok_or_else(|| schema("table weights need `values`"))?;
                if values.len() != 2 * self.half_width + 1 {
                    return Err(schema(format!("table needs 2W+1 = {} values", 2 * self.half_width + 1)));
                }
                return built(WeightSequence::from_table(values));
            }
        };
        built(WeightSequence::build(kind, self.half_width))
    }
}

// ---------- grid and solver ----------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points per axis (odd).
    pub points: usize,
    pub half_width: f64,
}

impl GridConfig {
    pub fn build(&self, dim: usize) -> Result<SpatialGrid, RunError> {
        built(SpatialGrid::new(dim, self.half_width, self.points))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportName {
    Upwind,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    Neumann,
    QuadraticExtrapolation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Explicit step; when absent, `cfl_fraction · h² / (2N sup‖A‖)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl_fraction: f64,
    #[serde(default = "default_transport")]
    pub transport: TransportName,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryName,
}

fn default_cfl() -> f64 {
    0.9
}

fn default_transport() -> TransportName {
    TransportName::Upwind
}

fn default_boundary() -> BoundaryName {
    BoundaryName::Neumann
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { dt: None, cfl_fraction: default_cfl(), transport: default_transport(), boundary: default_boundary() }
    }
}

impl SolverConfig {
    pub fn options(&self, grid: &SpatialGrid, diffusion: &DiffusionSpec, horizon: f64) -> Result<GridOptions, RunError> {
        if !(self.cfl_fraction > 0.0 && self.cfl_fraction <= 1.0) {
            return Err(schema("solver.cfl_fraction must lie in (0, 1]"));
        }
        let h = grid.spacing();
        let dt = match self.dt {
            Some(dt) if dt > 0.0 => dt,
            Some(_) => return Err(schema("solver.dt must be positive")),
            None => self.cfl_fraction * h * h / (2.0 * grid.dim() as f64 * diffusion.sup_norm(horizon)),
        };
        let transport = match self.transport {
            TransportName::Upwind => Transport::Upwind,
            TransportName::Central => Transport::Central,
        };
        let boundary = match self.boundary {
            BoundaryName::Neumann => Boundary::Neumann,
            BoundaryName::QuadraticExtrapolation => Boundary::QuadraticExtrapolation,
        };
        Ok(GridOptions::new(dt).with_transport(transport).with_boundary(boundary))
    }
}

// ---------- games ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutName {
    Chain,
    Cycle,
}

impl From<LayoutName> for Layout {
    fn from(l: LayoutName) -> Self {
        match l {
            LayoutName::Chain => Layout::Chain,
            LayoutName::Cycle => Layout::Cycle,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "half")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub g: f64,
    #[serde(default = "half")]
    pub kappa_terminal: f64,
    #[serde(default = "one")]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig { q: 1.0, kappa: 0.5, g: 1.0, kappa_terminal: 0.5, sigma: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MomentumConfig {
    Quadratic,
    /// `½ψ_κ(p)²`; without `kappa`, ten times the largest `|D_iu^i|` of the
    /// LQ oracle on the grid box.
    Saturated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameConfig {
    /// The coupled LQ family.
    Lq {
        players: usize,
        horizon: f64,
        #[serde(default)]
        coupling: CouplingConfig,
        #[serde(default = "default_layout")]
        layout: LayoutName,
        #[serde(default = "default_momentum")]
        momentum: MomentumConfig,
    },
    /// An LQ game with explicit symmetric matrices (row-major, `N × N`).
    LqMatrices {
        sigma: Vec<f64>,
        q: Vec<Vec<Vec<f64>>>,
        gamma: Vec<Vec<Vec<f64>>>,
        horizon: f64,
        #[serde(default = "default_layout")]
        layout: LayoutName,
        #[serde(default = "default_momentum")]
        momentum: MomentumConfig,
    },
    /// All data zero.
    Trivial {
        players: usize,
        #[serde(default = "default_trivial_horizon")]
        horizon: f64,
    },
}

fn default_layout() -> LayoutName {
    LayoutName::Chain
}

fn default_momentum() -> MomentumConfig {
    MomentumConfig::Quadratic
}

fn default_trivial_horizon() -> f64 {
    0.1
}

fn matrix(n: usize, rows: &[Vec<f64>], what: &str) -> Result<nalgebra::DMatrix<f64>, RunError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(schema(format!("{what} must be {n} x {n}")));
    }
    Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl GameConfig {
    pub fn players(&self) -> usize {
        match self {
            GameConfig::Lq { players, .. } | GameConfig::Trivial { players, .. } => *players,
            GameConfig::LqMatrices { sigma, .. } => sigma.len(),
        }
    }

    pub fn with_players(&self, n: usize) -> Result<GameConfig, RunError> {
        let mut out = self.clone();
        match &mut out {
            GameConfig::Lq { players, .. } | GameConfig::Trivial { players, .. } => *players = n,
            GameConfig::LqMatrices { .. } => return Err(schema("explicit-matrix games have a fixed player count")),
        }
        Ok(out)
    }

    pub fn layout(&self) -> Layout {
        match self {
            GameConfig::Lq { layout, .. } | GameConfig::LqMatrices { layout, .. } => (*layout).into(),
            GameConfig::Trivial { .. } => Layout::Chain,
        }
    }

    /// The LQ data, when the game has any.
    pub fn lq(&self, beta: &WeightSequence) -> Result<Option<LqGameSpec>, RunError> {
        match self {
            GameConfig::Lq { players, horizon, coupling, layout, .. } => {
                let p = CouplingParams {
                    q: coupling.q,
                    kappa: coupling.kappa,
                    g: coupling.g,
                    kappa_terminal: coupling.kappa_terminal,
                    sigma: coupling.sigma,
                    horizon: *horizon,
                    layout: (*layout).into(),
                };
                Ok(Some(built(LqGameSpec::coupled(*players, beta, &p))?))
            }
            GameConfig::LqMatrices { sigma, q, gamma, horizon, .. } => {
                let n = sigma.len();
                if q.len() != n || gamma.len() != n {
                    return Err(schema("need one q and one gamma matrix per player"));
                }
                let q = q.iter().map(|m| matrix(n, m, "q")).collect::<Result<Vec<_>, _>>()?;
                let gamma = gamma.iter().map(|m| matrix(n, m, "gamma")).collect::<Result<Vec<_>, _>>()?;
                Ok(Some(built(LqGameSpec::new(sigma.clone(), q, gamma, *horizon))?))
            }
            GameConfig::Trivial { .. } => Ok(None),
        }
    }

    fn momentum(&self) -> Option<&MomentumConfig> {
        match self {
            GameConfig::Lq { momentum, .. } | GameConfig::LqMatrices { momentum, .. } => Some(momentum),
            GameConfig::Trivial { .. } => None,
        }
    }

    /// Fills in a saturation level left open, so the resolved config
    /// records the value actually used.
    pub fn resolve(&mut self, beta: &WeightSequence, grid: &GridConfig) -> Result<(), RunError> {
        let needs = matches!(self.momentum(), Some(MomentumConfig::Saturated { kappa: None }));
        if !needs {
            return Ok(());
        }
        let lq = self.lq(beta)?.expect("momentum only on LQ games");
        let n = lq.players();
        let traj = riccati_integrate(&lq, lq.horizon() / 200.0).map_err(RunError::Numerical)?;
        let mut p_max: f64 = 0.0;
        for s in &traj.states {
            for (i, p) in s.p.iter().enumerate() {
                let row: f64 = (0..n).map(|k| p[(i, k)].abs()).sum();
                p_max = p_max.max(grid.half_width * row);
            }
        }
        let kappa = 10.0 * p_max.max(f64::MIN_POSITIVE);
        match self {
            GameConfig::Lq { momentum, .. } | GameConfig::LqMatrices { momentum, .. } => {
                *momentum = MomentumConfig::Saturated { kappa: Some(kappa) }
            }
            GameConfig::Trivial { .. } => {}
        }
        Ok(())
    }

    pub fn build(&self, beta: &WeightSequence, grid: &GridConfig, solver: &SolverConfig) -> Result<GameSpec, RunError> {
        let n = self.players();
        let sgrid = grid.build(n)?;
        match self {
            GameConfig::Trivial { horizon, .. } => {
                let a = built(DiffusionSpec::isotropic(n, 0.5))?;
                let opts = solver.options(&sgrid, &a, *horizon)?;
                built(GameSpec::trivial(n, beta.clone(), sgrid, opts).and_then(|g| g.with_horizon(*horizon)))
            }
            _ => {
                let lq = self.lq(beta)?.expect("LQ game");
                let momentum = match self.momentum().expect("LQ game") {
                    MomentumConfig::Quadratic => MomentumCost::Quadratic,
                    MomentumConfig::Saturated { kappa: Some(k) } => MomentumCost::Saturated { kappa: *k },
                    MomentumConfig::Saturated { kappa: None } => return Err(schema("unresolved saturation level")),
                };
                let a = built(DiffusionSpec::from_volatility(lq.sigma()))?;
                let opts = solver.options(&sgrid, &a, lq.horizon())?;
                built(GameSpec::from_lq(&lq, beta.clone(), self.layout(), momentum, sgrid, opts))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessName {
    Zero,
    Terminal,
}

impl From<GuessName> for InitialGuess {
    fn from(g: GuessName) -> Self {
        match g {
            GuessName::Zero => InitialGuess::Zero,
            GuessName::Terminal => InitialGuess::Terminal,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_guess")]
    pub initial: GuessName,
    /// Nodes excluded on each face, as a fraction of the points per axis.
    #[serde(default = "default_collar")]
    pub collar_fraction: f64,
    /// `(R, R')`; leaving it is recorded, not enforced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<[f64; 2]>,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_max_iter() -> usize {
    30
}

fn default_guess() -> GuessName {
    GuessName::Zero
}

fn default_collar() -> f64 {
    0.1
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            tol: default_tol(),
            max_iter: default_max_iter(),
            initial: default_guess(),
            collar_fraction: default_collar(),
            envelope: None,
        }
    }
}

impl PicardConfig {
    pub fn check(&self) -> Result<(), RunError> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(schema("picard.tol must be positive and picard.max_iter at least 1"));
        }
        if !(0.0..0.5).contains(&self.collar_fraction) {
            return Err(schema("picard.collar_fraction must lie in [0, 0.5)"));
        }
        Ok(())
    }

    pub fn apply(&self, game: GameSpec) -> GameSpec {
        let collar = game.grid.collar_nodes(self.collar_fraction);
        let game = game.with_collar(collar);
        match self.envelope {
            Some([r, rp]) => game.with_envelope(r, rp),
            None => game,
        }
    }
}

// ---------- linear problems ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Gaussian,
    Tanh,
    Cos,
}

impl From<ProfileName> for Profile {
    fn from(p: ProfileName) -> Self {
        match p {
            ProfileName::Gaussian => Profile::Gaussian,
            ProfileName::Tanh => Profile::Tanh,
            ProfileName::Cos => Profile::Cos,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftConfig {
    Zero,
    Constant { value: Vec<f64> },
    /// `B^i = Σ_j c β^{j-i} φ(x^j)`.
    CoupledDecaying { c: f64, profile: ProfileName },
}

impl DriftConfig {
    pub fn build(&self, beta: &WeightSequence, dim: usize) -> Result<VectorFn, RunError> {
        match self {
            DriftConfig::Zero => Ok(VectorFn::Zero),
            DriftConfig::Constant { value } => {
                if value.len() != dim {
                    return Err(schema(format!("constant drift needs {dim} entries")));
                }
                Ok(VectorFn::Constant(value.clone()))
            }
            DriftConfig::CoupledDecaying { c, profile } => built(VectorFn::coupled_decaying(beta, dim, *c, (*profile).into())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarConfig {
    Zero,
    Constant { value: f64 },
    Gaussian { amplitude: f64, center: Vec<f64>, variance: f64 },
    /// `c Σ_j (β_i)^j φ(x^j)` for the problem's reference player `i`.
    SeparableDecaying { c: f64, profile: ProfileName },
    /// `½xᵀQx`, `Q` row-major.
    Quadratic { q: Vec<f64> },
    Sine { coeffs: Vec<f64> },
}

impl ScalarConfig {
    pub fn build(&self, weights: &[f64]) -> Result<ScalarFn, RunError> {
        let dim = weights.len();
        Ok(match self {
            ScalarConfig::Zero => ScalarFn::Zero,
            ScalarConfig::Constant { value } => ScalarFn::Constant(*value),
            ScalarConfig::Gaussian { amplitude, center, variance } => {
                if center.len() != dim || !(*variance > 0.0) {
                    return Err(schema("gaussian needs one center entry per axis and a positive variance"));
                }
                ScalarFn::Gaussian { amplitude: *amplitude, center: center.clone(), variance: *variance }
            }
            ScalarConfig::SeparableDecaying { c, profile } => ScalarFn::separable_decaying(weights, *c, (*profile).into()),
            ScalarConfig::Quadratic { q } => {
                if q.len() != dim * dim {
                    return Err(schema(format!("quadratic needs {} entries", dim * dim)));
                }
                ScalarFn::Quadratic { dim, q: q.clone() }
            }
            ScalarConfig::Sine { coeffs } => {
                if coeffs.len() != dim {
                    return Err(schema(format!("sine needs {dim} coefficients")));
                }
                ScalarFn::Sine { coeffs: coeffs.clone() }
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    pub dim: usize,
    /// `A = a I`.
    #[serde(default = "half")]
    pub diffusion: f64,
    pub drift: DriftConfig,
    pub source: ScalarConfig,
    pub terminal: ScalarConfig,
    pub horizon: f64,
    /// Reference player for `β_i` in decay constants and builders.
    #[serde(default)]
    pub player: usize,
    /// Further points per axis for a refinement study.
    #[serde(default)]
    pub refinements: Vec<usize>,
    /// Further horizons, solved on the base grid.
    #[serde(default)]
    pub horizons: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub paths: usize,
    pub dt: f64,
    pub queries: Vec<QueryConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpkConfig {
    #[serde(default = "half")]
    pub diffusion: f64,
    pub drift: DriftConfig,
    /// Starting point; its length is the dimension.
    pub y: Vec<f64>,
    /// `ε` in units of the grid spacing.
    #[serde(default = "default_eps_factor")]
    pub eps_factor: f64,
    pub horizon: f64,
    /// `dt` as a fraction of `h² / (2N a)`.
    #[serde(default = "default_fpk_cfl")]
    pub cfl_fraction: f64,
    #[serde(default = "one_usize")]
    pub save_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_range: Option<[f64; 2]>,
}

fn default_eps_factor() -> f64 {
    4.0
}

fn default_fpk_cfl() -> f64 {
    0.4
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub horizons: Vec<f64>,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_probes() -> usize {
    3
}

fn default_amplitude() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessConfig {
    #[serde(default = "default_guesses")]
    pub guesses: [GuessName; 2],
}

fn default_guesses() -> [GuessName; 2] {
    [GuessName::Zero, GuessName::Terminal]
}

impl UniquenessConfig {
    pub fn default_pair() -> [GuessName; 2] {
        default_guesses()
    }
}

/// Asserted tolerances. Only the ones present are checked; the run exits 0
/// iff all of them pass.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_certified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_increment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doubling_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_mass_drift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_change: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_in_horizon: Option<bool>,
    /// Grid error budget; an MC estimate passes within `max(3·CI, budget)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction_at_smallest: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_spearman: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_decreasing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_bounded: Option<bool>,
    /// Fixed points may differ by at most this many Picard tolerances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness_factor: Option<f64>,
}
