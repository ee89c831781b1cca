//! Scripted baseline policies.
//!
//! [`BlindPatrol`] never looks at the fire: it sweeps the grid along a
//! serpentine route and drops on a fixed cadence. [`PerimeterCircler`]
//! heads for the nearest burning cell, drops whenever its footprint covers
//! fire and otherwise works its way counterclockwise around the front.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, Env, EnvError, EpisodeLog, Observation};
use crate::terrain::{synthetic_scenario, Cell, Scenario, SyntheticKind};

pub trait Policy: Send {
    fn act(&mut self, obs: &Observation) -> Action;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    BlindPatrol,
    PerimeterCircler,
}

impl PolicyKind {
    /// Accepts the CLI names `blind` and `circler` as well as the snake-case
    /// variant names.
    pub fn parse(s: &str) -> Option<PolicyKind> {
        match s {
            "blind" | "blind_patrol" => Some(PolicyKind::BlindPatrol),
            "circler" | "perimeter_circler" => Some(PolicyKind::PerimeterCircler),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::BlindPatrol => "blind",
            PolicyKind::PerimeterCircler => "circler",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Blind patrol: drop on every `cadence`-th action.
    pub cadence: u32,
    /// Circler: standoff distance kept outside the drop footprint.
    pub offset: u32,
    /// Must match the environment's drop radius.
    pub drop_radius: u32,
    pub seed: u64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            kind: PolicyKind::PerimeterCircler,
            cadence: 8,
            offset: 1,
            drop_radius: 2,
            seed: 0,
        }
    }
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        PolicyConfig {
            kind,
            seed,
            ..Default::default()
        }
    }

    pub fn build(&self, width: u32, height: u32, start: Cell) -> Box<dyn Policy> {
        match self.kind {
            PolicyKind::BlindPatrol => Box::new(BlindPatrol::new(width, height, start, self.cadence, self.seed)),
            PolicyKind::PerimeterCircler => Box::new(PerimeterCircler::new(width, height, self.drop_radius, self.offset)),
        }
    }
}

/// Serpentine route over the grid. A closed Hamiltonian cycle whenever one
/// side has even length: rows 0.. sweep columns 1..w, then column 0 leads
/// back north. Falls back to an open row serpentine when both sides are odd.
pub fn serpentine_route(width: u32, height: u32) -> Vec<Cell> {
    let transpose = height % 2 != 0 && width % 2 == 0;
    let (w, h) = if transpose { (height, width) } else { (width, height) };
    let mut route = Vec::with_capacity((w * h) as usize);
    if h % 2 == 0 && w >= 2 {
        for r in 0..h {
            if r % 2 == 0 {
                route.extend((1..w).map(|c| Cell::new(r, c)));
            } else {
                route.extend((1..w).rev().map(|c| Cell::new(r, c)));
            }
        }
        route.extend((0..h).rev().map(|r| Cell::new(r, 0)));
    } else {
        for r in 0..h {
            if r % 2 == 0 {
                route.extend((0..w).map(|c| Cell::new(r, c)));
            } else {
                route.extend((0..w).rev().map(|c| Cell::new(r, c)));
            }
        }
    }
    if transpose {
        for c in &mut route {
            *c = Cell::new(c.col, c.row);
        }
    }
    route
}

/// One greedy 4-connected move from `from` toward `to`; `None` when equal.
/// The longer axis goes first; ties move vertically.
pub fn step_toward(from: Cell, to: Cell) -> Option<Action> {
    let dr = to.row as i64 - from.row as i64;
    let dc = to.col as i64 - from.col as i64;
    if dr == 0 && dc == 0 {
        return None;
    }
    Some(if dr.abs() >= dc.abs() {
        if dr < 0 {
            Action::Up
        } else {
            Action::Down
        }
    } else if dc < 0 {
        Action::Left
    } else {
        Action::Right
    })
}

pub struct BlindPatrol {
    route: Vec<Cell>,
    cursor: usize,
    reverse: bool,
    cadence: u32,
    tick: u64,
}

impl BlindPatrol {
    pub fn new(width: u32, height: u32, start: Cell, cadence: u32, seed: u64) -> Self {
        let route = serpentine_route(width, height);
        let cursor = route.iter().position(|&c| c == start).unwrap_or(0);
        let reverse = ChaCha8Rng::seed_from_u64(seed).random::<bool>();
        BlindPatrol {
            route,
            cursor,
            reverse,
            cadence: cadence.max(1),
            tick: 0,
        }
    }

    fn next_index(&self) -> usize {
        let n = self.route.len();
        if self.reverse {
            (self.cursor + n - 1) % n
        } else {
            (self.cursor + 1) % n
        }
    }
}

impl Policy for BlindPatrol {
    /// Reads only `agent_pos`.
    fn act(&mut self, obs: &Observation) -> Action {
        self.tick += 1;
        if self.tick % self.cadence as u64 == 0 {
            return Action::Drop;
        }
        if self.route.len() < 2 {
            return Action::Up;
        }
        let pos = obs.agent_pos;
        let mut target = self.route[self.next_index()];
        if pos == target {
            self.cursor = self.next_index();
            target = self.route[self.next_index()];
        }
        step_toward(pos, target).unwrap_or(Action::Up)
    }
}

pub struct PerimeterCircler {
    width: u32,
    height: u32,
    radius: u32,
    offset: u32,
    last_known: Option<Cell>,
}

impl PerimeterCircler {
    pub fn new(width: u32, height: u32, radius: u32, offset: u32) -> Self {
        PerimeterCircler {
            width,
            height,
            radius,
            offset,
            last_known: None,
        }
    }
}

impl Policy for PerimeterCircler {
    fn act(&mut self, obs: &Observation) -> Action {
        let frame = obs.current();
        let pos = obs.agent_pos;
        let w = frame.width;

        let burning: Vec<Cell> = (0..frame.phase.len())
            .filter(|&i| frame.is_burning(i))
            .map(|i| Cell::new(i as u32 / w, i as u32 % w))
            .collect();
        // Row-major scan, so the first minimum wins ties.
        let nearest = burning
            .iter()
            .copied()
            .fold(None, |best: Option<(u32, Cell)>, c| {
                let d = c.chebyshev(pos);
                match best {
                    Some((bd, _)) if bd <= d => best,
                    _ => Some((d, c)),
                }
            });

        let Some((dist, fire)) = nearest else {
            let target = self.last_known.unwrap_or(Cell::new(self.height / 2, self.width / 2));
            return step_toward(pos, target).unwrap_or(if pos.row > 0 { Action::Up } else { Action::Down });
        };
        self.last_known = Some(fire);
        if dist <= self.radius {
            return Action::Drop;
        }
        if dist > self.radius + self.offset {
            return step_toward(pos, fire).expect("distance is positive");
        }

        // Standoff ring: take the move that brings fire closest, preferring
        // the counterclockwise tangent around the fire's centroid on ties.
        // x grows east, y grows north.
        let n = burning.len() as f64;
        let cx = burning.iter().map(|c| c.col as f64).sum::<f64>() / n;
        let cy = burning.iter().map(|c| c.row as f64).sum::<f64>() / n;
        let (tx, ty) = (pos.row as f64 - cy, pos.col as f64 - cx);
        let mut best: Option<(u32, f64, Action)> = None;
        for a in [Action::Up, Action::Down, Action::Left, Action::Right] {
            let next = a.apply(pos, self.width, self.height);
            if next == pos {
                continue;
            }
            let d = burning.iter().map(|c| c.chebyshev(next)).min().unwrap_or(u32::MAX);
            let (mx, my) = match a {
                Action::Up => (0.0, 1.0),
                Action::Down => (0.0, -1.0),
                Action::Left => (-1.0, 0.0),
                _ => (1.0, 0.0),
            };
            let along = mx * tx + my * ty;
            let better = match best {
                None => true,
                Some((bd, balong, _)) => d < bd || (d == bd && along > balong),
            };
            if better {
                best = Some((d, along, a));
            }
        }
        best.map(|(_, _, a)| a).unwrap_or(Action::Up)
    }
}

/// Plays `policy` until the episode ends.
pub fn run_episode(env: &mut Env, policy: &mut dyn Policy) -> Result<(), EnvError> {
    while !env.is_done() {
        let action = policy.act(env.observation());
        env.step(action)?;
    }
    Ok(())
}

/// Runs a fresh episode and returns its log.
pub fn rollout(
    scenario: &Scenario,
    catalog: &crate::fuel::FuelCatalog,
    start: Option<Cell>,
    env_config: crate::env::EnvConfig,
    policy: PolicyConfig,
) -> Result<EpisodeLog, EnvError> {
    let mut env = Env::new(scenario, catalog, start, env_config)?;
    let pos = env.agent_pos();
    let mut p = PolicyConfig {
        drop_radius: env_config.drop_radius,
        ..policy
    }
    .build(scenario.width, scenario.height, pos);
    run_episode(&mut env, p.as_mut())?;
    Ok(env.into_log())
}

pub const FIXTURE_WIDTH: u32 = 96;
pub const FIXTURE_HEIGHT: u32 = 72;

/// Agent-comparison fixture: the calm flat-uniform synthetic scenario with
/// its centered ignition, plus a seeded agent start 28 to 34 cells away.
pub fn comparison_fixture(seed: u64) -> (Scenario, Cell) {
    let s = synthetic_scenario(SyntheticKind::FlatUniform, FIXTURE_WIDTH, FIXTURE_HEIGHT, seed)
        .expect("fixture dimensions are valid");
    let ig = s.center();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1e1d);
    let start = loop {
        let c = Cell::new(rng.random_range(0..FIXTURE_HEIGHT), rng.random_range(0..FIXTURE_WIDTH));
        if (28..=34).contains(&c.chebyshev(ig)) {
            break c;
        }
    };
    (s, start)
}
