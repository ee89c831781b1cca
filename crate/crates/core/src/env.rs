//! Helitack suppression environment on top of the CA engine.
//!
//! One agent moves one cell per step (Up/Down/Left/Right, clamped at the
//! edges) or drops suppressant over a square footprint. Every action
//! advances the fire by exactly one engine step. Observations stack the four
//! most recent frames of (phase, intensity) channels.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineError, Phase, SimState, Status, StepDelta};
use crate::fuel::FuelCatalog;
use crate::terrain::{Cell, Scenario};

pub const FRAME_STACK: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("agent start ({0}, {1}) is out of bounds")]
    AgentOutOfBounds(u32, u32),
    #[error("episode is done")]
    EpisodeDone,
    #[error("invalid action code {0}")]
    InvalidAction(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
#[repr(u8)]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
    Drop = 4,
}

impl Action {
    pub const ALL: [Action; 5] = [Action::Up, Action::Down, Action::Left, Action::Right, Action::Drop];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn is_move(self) -> bool {
        self != Action::Drop
    }

    /// Cell reached by this action from `pos`, clamped to the grid.
    pub fn apply(self, pos: Cell, width: u32, height: u32) -> Cell {
        match self {
            Action::Up => Cell::new(pos.row.saturating_sub(1), pos.col),
            Action::Down => Cell::new((pos.row + 1).min(height - 1), pos.col),
            Action::Left => Cell::new(pos.row, pos.col.saturating_sub(1)),
            Action::Right => Cell::new(pos.row, (pos.col + 1).min(width - 1)),
            Action::Drop => pos,
        }
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a.code()
    }
}

impl TryFrom<u8> for Action {
    type Error = EnvError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Action::ALL
            .get(v as usize)
            .copied()
            .ok_or(EnvError::InvalidAction(v))
    }
}

/// Reward coefficients. Defaults are the shipped tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    /// Per burning cell extinguished by a drop.
    pub extinguish: f64,
    /// Per newly ignited cell.
    pub new_ignition: f64,
    /// Multiplies the burnt fraction of the grid, every step.
    pub burnt_fraction: f64,
    /// Bonus while a burning cell is within `proximity_radius`.
    pub proximity: f64,
    pub proximity_radius: u32,
    /// Per step whose action is not a drop.
    pub idle: f64,
    /// Per drop that hits no burning cell.
    pub waste: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            extinguish: 1.0,
            new_ignition: -0.02,
            burnt_fraction: -0.001,
            proximity: 0.01,
            proximity_radius: 5,
            idle: -0.005,
            waste: -0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// Chebyshev radius of the drop footprint.
    pub drop_radius: u32,
    pub rewards: RewardWeights,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            drop_radius: 2,
            rewards: RewardWeights::default(),
        }
    }
}

/// One grid snapshot: phase codes (0 unburnt, 1 suppressed, 2 burning,
/// 3 burnt) and intensity, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub phase: Vec<u8>,
    pub intensity: Vec<f32>,
}

impl Frame {
    pub fn render(state: &SimState, width: u32, height: u32) -> Frame {
        let cells = state.cells();
        Frame {
            width,
            height,
            phase: cells.iter().map(|c| c.phase.code()).collect(),
            intensity: cells.iter().map(|c| c.intensity).collect(),
        }
    }

    /// Channel-0 value in [0, 1].
    pub fn phase_value(&self, index: usize) -> f32 {
        self.phase[index] as f32 / 3.0
    }

    pub fn is_burning(&self, index: usize) -> bool {
        self.phase[index] == Phase::Burning.code()
    }

    fn copy_from(&mut self, other: &Frame) {
        self.phase.copy_from_slice(&other.phase);
        self.intensity.copy_from_slice(&other.intensity);
    }

    /// Max-pools `factor`×`factor` blocks (partial blocks at the edges).
    pub fn downsample(&self, factor: u32) -> Frame {
        if factor <= 1 {
            return self.clone();
        }
        let w = self.width.div_ceil(factor);
        let h = self.height.div_ceil(factor);
        let mut phase = vec![0u8; (w * h) as usize];
        let mut intensity = vec![0f32; (w * h) as usize];
        for r in 0..self.height {
            for c in 0..self.width {
                let src = (r * self.width + c) as usize;
                let dst = ((r / factor) * w + c / factor) as usize;
                phase[dst] = phase[dst].max(self.phase[src]);
                intensity[dst] = intensity[dst].max(self.intensity[src]);
            }
        }
        Frame {
            width: w,
            height: h,
            phase,
            intensity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// `frames[0]` is the current state, `frames[3]` the oldest.
    pub frames: [Frame; FRAME_STACK],
    pub agent_pos: Cell,
    pub over_burning: bool,
}

impl Observation {
    pub fn width(&self) -> u32 {
        self.frames[0].width
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height
    }

    pub fn current(&self) -> &Frame {
        &self.frames[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub extinguish: f64,
    pub containment: f64,
    pub proximity: f64,
    pub idle_penalty: f64,
    pub waste_penalty: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn sum_terms(&self) -> f64 {
        self.extinguish + self.containment + self.proximity + self.idle_penalty + self.waste_penalty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ContainedAt(u32),
    MaxStepsReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropRecord {
    /// Step index at which the drop was issued (before the engine advanced).
    pub step: u32,
    pub row: u32,
    pub col: u32,
    pub extinguished: u32,
}

/// Everything needed to rebuild an episode's metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub width: u32,
    pub height: u32,
    pub cell_size_m: f64,
    pub max_steps: u32,
    pub agent_start: Cell,
    pub drops: Vec<DropRecord>,
    /// Burnt cell count after each step.
    pub burnt_trajectory: Vec<u32>,
    /// Burning cell count after each step.
    pub burning_trajectory: Vec<u32>,
    pub actions: Vec<Action>,
    pub outcome: Option<Outcome>,
    pub reward_total: f64,
    /// Cells burnt or still burning when the episode ended, ascending.
    pub burned_cells: Vec<u32>,
    /// Step-0 ignition cells.
    pub ignition_cells: Vec<u32>,
}

impl EpisodeLog {
    pub fn is_complete(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn steps(&self) -> u32 {
        self.actions.len() as u32
    }

    /// Burnt plus still-burning cells at the end of the episode.
    pub fn cells_burned(&self) -> u32 {
        self.burnt_trajectory.last().copied().unwrap_or(0) + self.burning_trajectory.last().copied().unwrap_or(0)
    }

    pub fn helitacks(&self) -> u32 {
        self.drops.len() as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepInfo {
    pub newly_ignited: u32,
    pub newly_burnt: u32,
    pub extinguished: u32,
    pub burnt_count: u32,
    pub burning_count: u32,
    pub step: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: RewardBreakdown,
    pub done: bool,
    pub info: StepInfo,
}

/// An episode in progress.
#[derive(Debug, Clone)]
pub struct Env {
    engine: Arc<Engine>,
    seed: u64,
    config: EnvConfig,
    start: Cell,
    state: SimState,
    obs: Observation,
    log: EpisodeLog,
    status: Status,
    changed: Vec<u32>,
}

impl Env {
    /// Builds the engine for `scenario` and resets. The agent starts at
    /// `agent_start` or the grid center.
    pub fn new(
        scenario: &Scenario,
        catalog: &FuelCatalog,
        agent_start: Option<Cell>,
        config: EnvConfig,
    ) -> Result<Env, EnvError> {
        let engine = Arc::new(Engine::new(scenario, catalog)?);
        Env::with_engine(engine, scenario.seed, agent_start, config)
    }

    /// Resets on a prebuilt engine, sharing its tables.
    pub fn with_engine(
        engine: Arc<Engine>,
        seed: u64,
        agent_start: Option<Cell>,
        config: EnvConfig,
    ) -> Result<Env, EnvError> {
        let start = agent_start.unwrap_or(Cell::new(engine.height() / 2, engine.width() / 2));
        if !engine.contains(start) {
            return Err(EnvError::AgentOutOfBounds(start.row, start.col));
        }
        let state = engine.init(seed);
        let frame = Frame::render(&state, engine.width(), engine.height());
        let frames = [frame.clone(), frame.clone(), frame.clone(), frame];
        let log = EpisodeLog {
            width: engine.width(),
            height: engine.height(),
            cell_size_m: engine.cell_size_m(),
            max_steps: engine.max_steps(),
            agent_start: start,
            drops: Vec::new(),
            burnt_trajectory: Vec::new(),
            burning_trajectory: Vec::new(),
            actions: Vec::new(),
            outcome: None,
            reward_total: 0.0,
            burned_cells: Vec::new(),
            ignition_cells: state.frontier().to_vec(),
        };
        let mut env = Env {
            status: engine.is_finished(&state),
            engine,
            seed,
            config,
            start,
            state,
            obs: Observation {
                frames,
                agent_pos: start,
                over_burning: false,
            },
            log,
            changed: Vec::new(),
        };
        env.log.ignition_cells.sort_unstable();
        env.state.take_changed(&mut env.changed);
        env.refresh_flag();
        if !env.status.is_active() {
            env.finish();
        }
        Ok(env)
    }

    /// Restarts the same scenario from step 0.
    pub fn reset(&mut self) -> &Observation {
        *self = Env::with_engine(self.engine.clone(), self.seed, Some(self.start), self.config)
            .expect("start was validated on construction");
        &self.obs
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn observation(&self) -> &Observation {
        &self.obs
    }

    pub fn log(&self) -> &EpisodeLog {
        &self.log
    }

    pub fn into_log(self) -> EpisodeLog {
        self.log
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_done(&self) -> bool {
        !self.status.is_active()
    }

    pub fn agent_pos(&self) -> Cell {
        self.obs.agent_pos
    }

    pub fn info(&self) -> StepInfo {
        StepInfo {
            newly_ignited: 0,
            newly_burnt: 0,
            extinguished: 0,
            burnt_count: self.state.burnt_count(),
            burning_count: self.state.burning_count(),
            step: self.state.step,
        }
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EnvError> {
        if self.is_done() {
            return Err(EnvError::EpisodeDone);
        }
        let engine = self.engine.clone();
        let issued_at = self.state.step;
        let mut extinguished = 0;
        match action {
            Action::Drop => {
                let pos = self.obs.agent_pos;
                extinguished = engine.apply_suppressant(&mut self.state, pos, self.config.drop_radius)?;
                self.log.drops.push(DropRecord {
                    step: issued_at,
                    row: pos.row,
                    col: pos.col,
                    extinguished,
                });
            }
            mv => {
                self.obs.agent_pos = mv.apply(self.obs.agent_pos, engine.width(), engine.height());
            }
        }
        let delta: StepDelta = engine.step(&mut self.state)?;
        self.status = engine.is_finished(&self.state);

        let reward = self.reward(action, extinguished, delta.newly_ignited);
        self.advance_frames();

        self.log.actions.push(action);
        self.log.burnt_trajectory.push(self.state.burnt_count());
        self.log.burning_trajectory.push(self.state.burning_count());
        self.log.reward_total += reward.total;
        let done = self.is_done();
        if done {
            self.finish();
        }
        Ok(StepOutcome {
            reward,
            done,
            info: StepInfo {
                newly_ignited: delta.newly_ignited,
                newly_burnt: delta.newly_burnt,
                extinguished,
                burnt_count: self.state.burnt_count(),
                burning_count: self.state.burning_count(),
                step: self.state.step,
            },
        })
    }

    fn reward(&self, action: Action, extinguished: u32, newly_ignited: u32) -> RewardBreakdown {
        let w = &self.config.rewards;
        let total_cells = self.engine.cells() as f64;
        let mut r = RewardBreakdown {
            extinguish: w.extinguish * extinguished as f64,
            // The trailing `+ 0.0` turns a -0.0 into 0.0 on quiet steps.
            containment: w.new_ignition * newly_ignited as f64
                + w.burnt_fraction * (self.state.burnt_count() as f64 / total_cells)
                + 0.0,
            proximity: if self.fire_within(w.proximity_radius) {
                w.proximity
            } else {
                0.0
            },
            idle_penalty: if action.is_move() && extinguished == 0 {
                w.idle
            } else {
                0.0
            },
            waste_penalty: if action == Action::Drop && extinguished == 0 {
                w.waste
            } else {
                0.0
            },
            total: 0.0,
        };
        r.total = r.sum_terms();
        r
    }

    /// Whether any burning cell lies within Chebyshev `radius` of the agent.
    pub fn fire_within(&self, radius: u32) -> bool {
        let pos = self.obs.agent_pos;
        let e = &self.engine;
        if (self.state.burning_count() as u64) < (2 * radius as u64 + 1).pow(2) {
            return self
                .state
                .frontier()
                .iter()
                .any(|&i| e.cell_at(i as usize).chebyshev(pos) <= radius);
        }
        let r0 = pos.row.saturating_sub(radius);
        let r1 = (pos.row + radius).min(e.height() - 1);
        let c0 = pos.col.saturating_sub(radius);
        let c1 = (pos.col + radius).min(e.width() - 1);
        (r0..=r1).any(|r| (c0..=c1).any(|c| self.state.cell(e.index(Cell::new(r, c))).phase == Phase::Burning))
    }

    fn advance_frames(&mut self) {
        self.obs.frames.rotate_right(1);
        let (head, tail) = self.obs.frames.split_at_mut(1);
        head[0].copy_from(&tail[0]);
        self.state.take_changed(&mut self.changed);
        let frame = &mut head[0];
        for &i in &self.changed {
            let c = self.state.cell(i as usize);
            frame.phase[i as usize] = c.phase.code();
            frame.intensity[i as usize] = c.intensity;
        }
        self.refresh_flag();
    }

    fn refresh_flag(&mut self) {
        let i = self.engine.index(self.obs.agent_pos);
        self.obs.over_burning = self.state.cell(i).phase == Phase::Burning;
    }

    fn finish(&mut self) {
        self.log.outcome = Some(match self.status {
            Status::ContainedAt(s) => Outcome::ContainedAt(s),
            _ => Outcome::MaxStepsReached,
        });
        self.log.burned_cells = self
            .state
            .cells()
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c.phase, Phase::Burnt | Phase::Burning))
            .map(|(i, _)| i as u32)
            .collect();
    }
}
