//! Cellular-automata fire spread driven by the Rothermel kernel.
//!
//! Each step every burning cell pushes fire-arrival fraction into its 8
//! unburnt burnable neighbors: `arrival += r_eff·Δt / d`, with `r_eff`
//! evaluated for the receiving cell's fuel along the source→neighbor
//! direction and slope. A neighbor ignites once its arrival reaches 1.
//! Burning cells count down a fuel-load-proportional burn duration and
//! then become burnt. Suppressant turns unburnt and burning cells into
//! permanently suppressed ones.
//!
//! Arrival is accumulated in 32.32 fixed point so the sum is independent of
//! the order in which the frontier is visited. Per-step cost is
//! proportional to the frontier size, not the grid size.

use alloc::vec;
use alloc::vec::Vec;

use libm::{atan2, ceil};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checksum::Fnv64;
use crate::fuel::{FuelCatalog, Resolved, REFERENCE_LOAD};
use crate::rothermel::{effective_rate, FuelSpread, KernelError};
use crate::terrain::{Cell, Scenario, ScenarioError};

/// Simulated minutes per engine step.
pub const DT_MINUTES: f64 = 1.0;
/// Burn duration in steps for a fuel carrying [`REFERENCE_LOAD`].
pub const BURN_STEPS_REF: f64 = 20.0;
/// Reaction intensity mapped to observation intensity 1.0, BTU/ft²/min.
pub const INTENSITY_REF: f64 = 5000.0;
/// Lowest intensity reported for a burning cell, so that `intensity > 0`
/// exactly when the cell burns.
pub const MIN_BURNING_INTENSITY: f32 = 1e-3;

const FIXED_ONE: u64 = 1 << 32;
const NO_FUEL: u16 = u16::MAX;
const NOT_IN_FRONTIER: u32 = u32::MAX;

/// Neighbor offsets `(drow, dcol)`: N, NE, E, SE, S, SW, W, NW.
pub const NEIGHBORS: [(i32, i32); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("ignitions[{index}] at ({row}, {col}) lies on nonburnable cover")]
    NonBurnableIgnition { index: usize, row: u32, col: u32 },
    #[error("episode finished at step {step} (max_steps {max_steps})")]
    Finished { step: u32, max_steps: u32 },
    #[error("cell ({0}, {1}) out of bounds")]
    OutOfBounds(u32, u32),
}

/// Cell lifecycle. Discriminants are the observation phase codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum Phase {
    #[default]
    Unburnt = 0,
    Suppressed = 1,
    Burning = 2,
    Burnt = 3,
}

impl Phase {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Phase> {
        match code {
            0 => Some(Phase::Unburnt),
            1 => Some(Phase::Suppressed),
            2 => Some(Phase::Burning),
            3 => Some(Phase::Burnt),
            _ => None,
        }
    }

    /// Allowed transitions: Unburnt→Burning→Burnt, {Unburnt, Burning}→Suppressed.
    pub fn can_become(self, next: Phase) -> bool {
        use Phase::*;
        self == next
            || matches!(
                (self, next),
                (Unburnt, Burning) | (Burning, Burnt) | (Unburnt, Suppressed) | (Burning, Suppressed)
            )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellState {
    pub phase: Phase,
    /// Normalized 0–1; nonzero exactly while burning.
    pub intensity: f32,
    arrival_fixed: u64,
    pub burn_remaining: u32,
}

impl CellState {
    /// Accumulated fire-arrival fraction.
    pub fn arrival(&self) -> f64 {
        self.arrival_fixed as f64 / FIXED_ONE as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepDelta {
    pub newly_ignited: u32,
    pub newly_burnt: u32,
    pub extinguished: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Active,
    ContainedAt(u32),
    MaxStepsReached,
}

impl Status {
    pub fn is_active(self) -> bool {
        self == Status::Active
    }
}

/// Mutable simulation state. One owner at a time; `Send` so pools can move
/// it between workers.
#[derive(Debug, Clone)]
pub struct SimState {
    pub step: u32,
    cells: Vec<CellState>,
    frontier: Vec<u32>,
    frontier_pos: Vec<u32>,
    burnt_count: u32,
    burning_count: u32,
    ignited_total: u32,
    next_ignition: usize,
    changed: Vec<u32>,
    scratch: Vec<u32>,
    pub rng: ChaCha8Rng,
}

impl SimState {
    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn cell(&self, index: usize) -> &CellState {
        &self.cells[index]
    }

    /// Currently burning cell indices, in no particular order.
    pub fn frontier(&self) -> &[u32] {
        &self.frontier
    }

    pub fn burnt_count(&self) -> u32 {
        self.burnt_count
    }

    pub fn burning_count(&self) -> u32 {
        self.burning_count
    }

    /// Cells that have ever ignited, including later suppressed ones.
    pub fn ignited_total(&self) -> u32 {
        self.ignited_total
    }

    /// Drains the indices of cells whose phase or intensity changed since
    /// the last call. May contain duplicates.
    pub fn take_changed(&mut self, out: &mut Vec<u32>) {
        out.clear();
        out.append(&mut self.changed);
    }

    /// Stable hash of the full cell state and step counter.
    pub fn checksum(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_u64(u64::from(self.step));
        for c in &self.cells {
            h.write(&[c.phase.code()]);
            h.write(&c.intensity.to_bits().to_le_bytes());
            h.write_u64(c.arrival_fixed);
            h.write(&c.burn_remaining.to_le_bytes());
        }
        h.finish()
    }

    fn push_frontier(&mut self, i: u32) {
        self.frontier_pos[i as usize] = self.frontier.len() as u32;
        self.frontier.push(i);
    }

    fn remove_frontier(&mut self, i: u32) {
        let pos = self.frontier_pos[i as usize];
        debug_assert_ne!(pos, NOT_IN_FRONTIER);
        self.frontier.swap_remove(pos as usize);
        if let Some(&moved) = self.frontier.get(pos as usize) {
            self.frontier_pos[moved as usize] = pos;
        }
        self.frontier_pos[i as usize] = NOT_IN_FRONTIER;
    }
}

/// Scenario-derived, immutable spread tables. Share one engine across any
/// number of [`SimState`]s of the same scenario.
#[derive(Debug, Clone)]
pub struct Engine {
    width: u32,
    height: u32,
    max_steps: u32,
    cell_size_m: f64,
    /// Center-to-center distance per neighbor direction, ft.
    dist_ft: [f64; 8],
    /// Horizontal run per neighbor direction, m.
    run_m: [f64; 8],
    elevation: Vec<f64>,
    /// Index into `fuels`, or `NO_FUEL`.
    cell_fuel: Vec<u16>,
    fuels: Vec<FuelEntry>,
    /// Ignitions sorted by step (stable).
    schedule: Vec<(u32, u32)>,
}

#[derive(Debug, Clone)]
struct FuelEntry {
    code: u16,
    spread: FuelSpread,
    wind: [f64; 8],
    burn_steps: u32,
    intensity: f32,
}

impl Engine {
    pub fn new(scenario: &Scenario, catalog: &FuelCatalog) -> Result<Self, EngineError> {
        scenario.validate(catalog)?;
        let wind_speed = scenario.wind.speed_ft_min();
        let wind_dir = scenario.wind.dir_rad();
        let dirs = spread_directions();

        let mut fuels: Vec<FuelEntry> = Vec::new();
        let mut cell_fuel = vec![NO_FUEL; scenario.cells()];
        for (i, &code) in scenario.fuel_code.iter().enumerate() {
            let slot = match fuels.iter().position(|f| f.code == code) {
                Some(p) => p as u16,
                None => match catalog.resolve(code).map_err(|source| ScenarioError::FuelCode { index: i, source })? {
                    Resolved::NonBurnable => NO_FUEL,
                    Resolved::Burnable(model) => {
                        let spread = FuelSpread::new(model, scenario.moisture, wind_speed)?;
                        let mut wind = [0.0; 8];
                        for (k, w) in wind.iter_mut().enumerate() {
                            *w = spread.wind_factor(dirs[k], wind_dir);
                        }
                        let burn_steps = (ceil(BURN_STEPS_REF * model.w0 / REFERENCE_LOAD) as u32).max(1);
                        let intensity = ((spread.i_r / INTENSITY_REF).min(1.0) as f32).max(MIN_BURNING_INTENSITY);
                        fuels.push(FuelEntry {
                            code,
                            spread,
                            wind,
                            burn_steps,
                            intensity,
                        });
                        (fuels.len() - 1) as u16
                    }
                },
            };
            cell_fuel[i] = slot;
        }

        let mut schedule = Vec::with_capacity(scenario.ignitions.len());
        for (index, ig) in scenario.ignitions.iter().enumerate() {
            let cell = scenario.index(Cell::new(ig.row, ig.col));
            if cell_fuel[cell] == NO_FUEL {
                return Err(EngineError::NonBurnableIgnition {
                    index,
                    row: ig.row,
                    col: ig.col,
                });
            }
            schedule.push((ig.step, cell as u32));
        }
        schedule.sort_by_key(|&(step, _)| step);

        let cs = scenario.cell_size_m;
        let mut run_m = [0.0; 8];
        let mut dist_ft = [0.0; 8];
        for (k, &(dr, dc)) in NEIGHBORS.iter().enumerate() {
            run_m[k] = if dr != 0 && dc != 0 {
                cs * core::f64::consts::SQRT_2
            } else {
                cs
            };
            dist_ft[k] = if dr != 0 && dc != 0 {
                scenario.cell_size_ft() * core::f64::consts::SQRT_2
            } else {
                scenario.cell_size_ft()
            };
        }

        Ok(Engine {
            width: scenario.width,
            height: scenario.height,
            max_steps: scenario.max_steps,
            cell_size_m: cs,
            dist_ft,
            run_m,
            elevation: scenario.elevation.clone(),
            cell_fuel,
            fuels,
            schedule,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cells(&self) -> usize {
        self.cell_fuel.len()
    }

    pub fn max_steps(&self) -> u32 {
        self.max_steps
    }

    pub fn cell_size_m(&self) -> f64 {
        self.cell_size_m
    }

    pub fn is_burnable(&self, index: usize) -> bool {
        self.cell_fuel[index] != NO_FUEL
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row as usize * self.width as usize + cell.col as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width as usize;
        Cell::new((index / w) as u32, (index % w) as u32)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    /// Fresh state with step-0 ignitions applied.
    pub fn init(&self, seed: u64) -> SimState {
        let n = self.cells();
        let mut st = SimState {
            step: 0,
            cells: vec![CellState::default(); n],
            frontier: Vec::new(),
            frontier_pos: vec![NOT_IN_FRONTIER; n],
            burnt_count: 0,
            burning_count: 0,
            ignited_total: 0,
            next_ignition: 0,
            changed: Vec::new(),
            scratch: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        self.apply_scheduled(&mut st);
        st
    }

    /// Rate of spread (ft/min) from burning cell `from` into neighbor
    /// direction `k`, for the fuel of the receiving cell.
    pub fn spread_rate(&self, from: usize, k: usize) -> Option<f64> {
        let to = self.neighbor(from, k)?;
        let fuel = self.fuels.get(self.cell_fuel[to] as usize)?;
        let slope = (self.elevation[to] - self.elevation[from]) / self.run_m[k];
        let phi_s = fuel.spread.slope_factor(slope);
        Some(effective_rate(fuel.spread.r_base, fuel.wind[k], phi_s))
    }

    fn increment(&self, from: usize, to: usize, k: usize) -> u64 {
        let fuel = &self.fuels[self.cell_fuel[to] as usize];
        let slope = (self.elevation[to] - self.elevation[from]) / self.run_m[k];
        let r_eff = effective_rate(fuel.spread.r_base, fuel.wind[k], fuel.spread.slope_factor(slope));
        let frac = r_eff * DT_MINUTES / self.dist_ft[k];
        libm::round(frac * FIXED_ONE as f64) as u64
    }

    #[inline]
    pub fn neighbor(&self, index: usize, k: usize) -> Option<usize> {
        let w = self.width as usize;
        let r = (index / w) as i64 + NEIGHBORS[k].0 as i64;
        let c = (index % w) as i64 + NEIGHBORS[k].1 as i64;
        if r < 0 || c < 0 || r >= self.height as i64 || c >= w as i64 {
            None
        } else {
            Some(r as usize * w + c as usize)
        }
    }

    fn ignite(&self, st: &mut SimState, i: usize) {
        let fuel = &self.fuels[self.cell_fuel[i] as usize];
        let c = &mut st.cells[i];
        debug_assert!(c.phase.can_become(Phase::Burning));
        c.phase = Phase::Burning;
        c.burn_remaining = fuel.burn_steps;
        c.intensity = fuel.intensity;
        st.burning_count += 1;
        st.ignited_total += 1;
        st.push_frontier(i as u32);
        st.changed.push(i as u32);
    }

    fn apply_scheduled(&self, st: &mut SimState) -> u32 {
        let mut ignited = 0;
        while let Some(&(step, cell)) = self.schedule.get(st.next_ignition) {
            if step > st.step {
                break;
            }
            st.next_ignition += 1;
            if step == st.step && st.cells[cell as usize].phase == Phase::Unburnt {
                self.ignite(st, cell as usize);
                ignited += 1;
            }
        }
        ignited
    }

    /// Advances one step.
    pub fn step(&self, st: &mut SimState) -> Result<StepDelta, EngineError> {
        if st.step >= self.max_steps {
            return Err(EngineError::Finished {
                step: st.step,
                max_steps: self.max_steps,
            });
        }
        let mut delta = StepDelta::default();

        // Spread from the frontier as it stood at the start of the step.
        let mut ignite = core::mem::take(&mut st.scratch);
        ignite.clear();
        for &b in &st.frontier {
            let b = b as usize;
            for k in 0..8 {
                let Some(n) = self.neighbor(b, k) else { continue };
                if self.cell_fuel[n] == NO_FUEL {
                    continue;
                }
                let cell = &mut st.cells[n];
                if cell.phase != Phase::Unburnt || cell.arrival_fixed >= FIXED_ONE {
                    continue;
                }
                cell.arrival_fixed += self.increment(b, n, k);
                if cell.arrival_fixed >= FIXED_ONE {
                    ignite.push(n as u32);
                }
            }
        }

        // Burn down cells that were burning before this step.
        for pos in (0..st.frontier.len()).rev() {
            let i = st.frontier[pos] as usize;
            let c = &mut st.cells[i];
            c.burn_remaining -= 1;
            if c.burn_remaining == 0 {
                debug_assert!(c.phase.can_become(Phase::Burnt));
                c.phase = Phase::Burnt;
                c.intensity = 0.0;
                st.burning_count -= 1;
                st.burnt_count += 1;
                st.remove_frontier(i as u32);
                st.changed.push(i as u32);
                delta.newly_burnt += 1;
            }
        }

        for &i in &ignite {
            self.ignite(st, i as usize);
        }
        delta.newly_ignited = ignite.len() as u32;
        st.scratch = ignite;

        st.step += 1;
        delta.newly_ignited += self.apply_scheduled(st);
        Ok(delta)
    }

    /// Suppresses every unburnt or burning cell within Chebyshev `radius`
    /// of `center`. Returns how many burning cells were extinguished.
    pub fn apply_suppressant(&self, st: &mut SimState, center: Cell, radius: u32) -> Result<u32, EngineError> {
        if !self.contains(center) {
            return Err(EngineError::OutOfBounds(center.row, center.col));
        }
        let r0 = center.row.saturating_sub(radius);
        let r1 = center.row.saturating_add(radius).min(self.height - 1);
        let c0 = center.col.saturating_sub(radius);
        let c1 = center.col.saturating_add(radius).min(self.width - 1);
        let mut extinguished = 0;
        for r in r0..=r1 {
            for c in c0..=c1 {
                let i = self.index(Cell::new(r, c));
                let phase = st.cells[i].phase;
                match phase {
                    Phase::Burning => {
                        st.remove_frontier(i as u32);
                        st.burning_count -= 1;
                        extinguished += 1;
                    }
                    Phase::Unburnt => {}
                    Phase::Burnt | Phase::Suppressed => continue,
                }
                let cell = &mut st.cells[i];
                cell.phase = Phase::Suppressed;
                cell.intensity = 0.0;
                cell.arrival_fixed = 0;
                cell.burn_remaining = 0;
                st.changed.push(i as u32);
            }
        }
        Ok(extinguished)
    }

    pub fn is_finished(&self, st: &SimState) -> Status {
        if st.burning_count == 0 && st.next_ignition >= self.schedule.len() {
            Status::ContainedAt(st.step)
        } else if st.step >= self.max_steps {
            Status::MaxStepsReached
        } else {
            Status::Active
        }
    }

    /// Recomputes frontier and tallies from the cell array and compares
    /// them with the incrementally maintained ones.
    pub fn check_coherence(&self, st: &SimState) -> Result<(), &'static str> {
        let mut burning = 0u32;
        let mut burnt = 0u32;
        for (i, c) in st.cells.iter().enumerate() {
            match c.phase {
                Phase::Burning => {
                    burning += 1;
                    let pos = st.frontier_pos[i];
                    if pos == NOT_IN_FRONTIER || st.frontier.get(pos as usize) != Some(&(i as u32)) {
                        return Err("burning cell missing from frontier");
                    }
                    if !(c.intensity > 0.0) || c.burn_remaining == 0 {
                        return Err("burning cell without intensity or burn time");
                    }
                }
                Phase::Burnt => {
                    burnt += 1;
                }
                _ => {}
            }
            if c.phase != Phase::Burning {
                if st.frontier_pos[i] != NOT_IN_FRONTIER {
                    return Err("non-burning cell in frontier");
                }
                if c.intensity != 0.0 {
                    return Err("intensity on non-burning cell");
                }
            }
        }
        if burning as usize != st.frontier.len() || burning != st.burning_count {
            return Err("burning tally mismatch");
        }
        if burnt != st.burnt_count {
            return Err("burnt tally mismatch");
        }
        if st.burnt_count + st.burning_count > self.cells() as u32 {
            return Err("tallies exceed grid");
        }
        Ok(())
    }
}

/// Kernel-convention direction (0 = east, counterclockwise) of each
/// neighbor offset, with row 0 at the north edge.
pub fn spread_directions() -> [f64; 8] {
    let mut dirs = [0.0; 8];
    for (k, &(dr, dc)) in NEIGHBORS.iter().enumerate() {
        dirs[k] = atan2(-(dr as f64), dc as f64);
    }
    dirs
}
