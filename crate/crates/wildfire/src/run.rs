//! Episode runs, the episode log file, and the throughput bench.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wildfire_core::agents::{rollout, PolicyConfig, PolicyKind};
use wildfire_core::env::{Action, Env, EnvConfig, EpisodeLog};
use wildfire_core::fuel::FuelCatalog;
use wildfire_core::report::GALLONS_PER_DROP;
use wildfire_core::terrain::{Cell, Forecast, Scenario};
use wildfire_core::Engine;

pub const LOG_VERSION: &str = "1.0";

/// On-disk episode log: the log itself plus the forecast that anchors the
/// grid for report geocoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecast: Option<Forecast>,
    pub log: EpisodeLog,
}

pub fn read_log(path: &Path) -> Result<LogFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f: LogFile = serde_json::from_str(&text).with_context(|| format!("parsing episode log {}", path.display()))?;
    if f.version.split('.').next() != Some("1") {
        bail!("unsupported episode log version {:?}", f.version);
    }
    Ok(f)
}

/// Writes via a temporary sibling and a rename so a failed run leaves nothing.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub episode: u32,
    pub seed: u64,
    pub agent: &'static str,
    pub cells_burned: u32,
    pub timesteps: u32,
    pub helitacks: u32,
    pub water_gal: u64,
    pub contained: bool,
    pub reward_total: f64,
}

impl Summary {
    pub fn from_log(episode: u32, seed: u64, kind: PolicyKind, log: &EpisodeLog) -> Self {
        Summary {
            episode,
            seed,
            agent: kind.name(),
            cells_burned: log.cells_burned(),
            timesteps: log.steps(),
            helitacks: log.helitacks(),
            water_gal: log.helitacks() as u64 * GALLONS_PER_DROP,
            contained: matches!(log.outcome, Some(wildfire_core::env::Outcome::ContainedAt(_))),
            reward_total: log.reward_total,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "agent={} seed={} | Cells Burned: {} | Timesteps: {} | Helitacks: {} | Water Used: {} gal | {}",
            self.agent,
            self.seed,
            self.cells_burned,
            self.timesteps,
            self.helitacks,
            self.water_gal,
            if self.contained { "contained" } else { "not contained" }
        )
    }
}

/// One episode with the scenario seed replaced by `seed`; the agent seed
/// follows it.
pub fn simulate(
    scenario: &Scenario,
    catalog: &FuelCatalog,
    kind: PolicyKind,
    seed: u64,
    start: Option<Cell>,
    max_steps: Option<u32>,
) -> Result<EpisodeLog> {
    let mut s = scenario.clone();
    s.seed = seed;
    if let Some(m) = max_steps {
        s.max_steps = m;
    }
    Ok(rollout(&s, catalog, start, EnvConfig::default(), PolicyConfig::new(kind, seed))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchReport {
    pub steps: u64,
    pub raw_steps_per_sec: f64,
    pub env_steps_per_sec: f64,
    pub episodes: u32,
    pub max_frontier: u32,
    pub raw_checksum: u64,
    pub env_checksum: u64,
}

/// Times `steps` raw CA steps, then `steps` full env steps driven by a fixed
/// move cycle that never drops, restarting whenever an episode finishes.
pub fn bench(scenario: &Scenario, catalog: &FuelCatalog, steps: u64) -> Result<BenchReport> {
    let mut report = BenchReport {
        steps,
        raw_steps_per_sec: 0.0,
        env_steps_per_sec: 0.0,
        episodes: 0,
        max_frontier: 0,
        raw_checksum: 0,
        env_checksum: 0,
    };
    if steps == 0 {
        return Ok(report);
    }
    let engine = std::sync::Arc::new(Engine::new(scenario, catalog)?);

    let mut st = engine.init(scenario.seed);
    let t = Instant::now();
    for _ in 0..steps {
        if !engine.is_finished(&st).is_active() {
            st = engine.init(scenario.seed);
        }
        engine.step(&mut st)?;
        report.max_frontier = report.max_frontier.max(st.frontier().len() as u32);
    }
    report.raw_steps_per_sec = steps as f64 / t.elapsed().as_secs_f64();
    report.raw_checksum = st.checksum();

    const CYCLE: [Action; 4] = [Action::Up, Action::Right, Action::Down, Action::Left];
    let mut env = Env::with_engine(engine, scenario.seed, None, EnvConfig::default())?;
    report.episodes = 1;
    let t = Instant::now();
    for i in 0..steps {
        if env.is_done() {
            env.reset();
            report.episodes += 1;
        }
        env.step(CYCLE[(i % 4) as usize])?;
        report.max_frontier = report.max_frontier.max(env.state().frontier().len() as u32);
    }
    report.env_steps_per_sec = steps as f64 / t.elapsed().as_secs_f64();
    report.env_checksum = env.state().checksum();
    Ok(report)
}
