//! Newline-delimited JSON protocol for trainers and the operator console.
//!
//! Each request line is an object tagged by `cmd`; each gets exactly one
//! reply line. Frames travel run-length encoded per channel as
//! `[[value, run], ...]` in row-major order. The phase channel carries the
//! integer phase codes 0–3 (the observation value is code / 3); the intensity
//! channel carries the intensity itself.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use wildfire_core::agents::{Policy, PolicyConfig, PolicyKind};
use wildfire_core::env::{Action, Env, EnvConfig, Frame, Observation, RewardBreakdown, StepInfo};
use wildfire_core::fuel::FuelCatalog;
use wildfire_core::report::{build_report, ReportConfig, ThreatReport};
use wildfire_core::terrain::{Cell, Scenario};

use crate::scenario::{from_document, load_scenario, ScenarioDocument};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Reset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scenario_path: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scenario_inline: Option<ScenarioDocument>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agent_start: Option<[u32; 2]>,
        /// Extension: a built-in policy (`blind` or `circler`) that chooses
        /// the action for any `step` sent without one.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agent: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agent_seed: Option<u64>,
        /// Extension: 2× max-pooled frames for slow links.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        downsample: Option<bool>,
    },
    Step {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        action: Option<u8>,
    },
    State,
    Close,
}

pub type Run<T> = (T, u32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireFrame {
    pub phase: Vec<Run<u8>>,
    pub intensity: Vec<Run<f32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireObs {
    pub width: u32,
    pub height: u32,
    pub agent_pos: [u32; 2],
    pub over_burning: bool,
    pub frames: Vec<WireFrame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireInfo {
    pub newly_ignited: u32,
    pub newly_burnt: u32,
    pub extinguished: u32,
    pub burnt_count: u32,
    pub step: u32,
}

impl From<StepInfo> for WireInfo {
    fn from(i: StepInfo) -> Self {
        WireInfo {
            newly_ignited: i.newly_ignited,
            newly_burnt: i.newly_burnt,
            extinguished: i.extinguished,
            burnt_count: i.burnt_count,
            step: i.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Response {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs: Option<WireObs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<RewardBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub done: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info: Option<WireInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ThreatReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
}

impl Response {
    pub fn error(code: &str, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        Response {
            ok: false,
            error: Some(code.into()),
            detail: (!detail.is_empty()).then_some(detail),
            ..Default::default()
        }
    }
}

pub fn rle<T: Copy + PartialEq>(values: &[T]) -> Vec<Run<T>> {
    let mut out: Vec<Run<T>> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((last, n)) if *last == v => *n += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

pub fn unrle<T: Copy>(runs: &[Run<T>]) -> Vec<T> {
    runs.iter().flat_map(|&(v, n)| std::iter::repeat_n(v, n as usize)).collect()
}

pub fn encode_frame(f: &Frame) -> WireFrame {
    WireFrame {
        phase: rle(&f.phase),
        intensity: rle(&f.intensity),
    }
}

pub fn encode_obs(obs: &Observation, downsample: bool) -> WireObs {
    let frames: Vec<WireFrame> = obs
        .frames
        .iter()
        .map(|f| {
            if downsample {
                encode_frame(&f.downsample(2))
            } else {
                encode_frame(f)
            }
        })
        .collect();
    let (width, height) = if downsample {
        (obs.width().div_ceil(2), obs.height().div_ceil(2))
    } else {
        (obs.width(), obs.height())
    };
    WireObs {
        width,
        height,
        agent_pos: [obs.agent_pos.row, obs.agent_pos.col],
        over_burning: obs.over_burning,
        frames,
    }
}

struct Episode {
    env: Env,
    scenario: Scenario,
    policy: Option<Box<dyn Policy>>,
    downsample: bool,
}

/// One environment per session.
pub struct Session {
    catalog: Arc<FuelCatalog>,
    base_dir: PathBuf,
    env_config: EnvConfig,
    episode: Option<Episode>,
    closed: bool,
}

impl Session {
    /// Relative `scenario_path`s resolve against `base_dir`.
    pub fn new(catalog: Arc<FuelCatalog>, base_dir: impl Into<PathBuf>) -> Self {
        Session {
            catalog,
            base_dir: base_dir.into(),
            env_config: EnvConfig::default(),
            episode: None,
            closed: false,
        }
    }

    pub fn with_env_config(mut self, cfg: EnvConfig) -> Self {
        self.env_config = cfg;
        self
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Parses one request line and returns the reply line (no newline).
    pub fn handle_line(&mut self, line: &str) -> String {
        let resp = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(req),
            Err(e) => Response::error("bad_request", e.to_string()),
        };
        serde_json::to_string(&resp).expect("responses serialize")
    }

    pub fn handle(&mut self, req: Request) -> Response {
        match req {
            Request::Reset {
                scenario_path,
                scenario_inline,
                agent_start,
                agent,
                agent_seed,
                downsample,
            } => self.reset(scenario_path, scenario_inline, agent_start, agent, agent_seed, downsample),
            Request::Step { action } => self.step(action),
            Request::State => match &self.episode {
                None => Response::error("not_reset", ""),
                Some(ep) => Response {
                    ok: true,
                    obs: Some(encode_obs(ep.env.observation(), ep.downsample)),
                    done: Some(ep.env.is_done()),
                    info: Some(ep.env.info().into()),
                    ..Default::default()
                },
            },
            Request::Close => {
                self.closed = true;
                self.episode = None;
                Response {
                    ok: true,
                    closed: Some(true),
                    ..Default::default()
                }
            }
        }
    }

    fn reset(
        &mut self,
        path: Option<String>,
        inline: Option<ScenarioDocument>,
        start: Option<[u32; 2]>,
        agent: Option<String>,
        agent_seed: Option<u64>,
        downsample: Option<bool>,
    ) -> Response {
        let scenario = match (path, inline) {
            (Some(p), None) => {
                let p = Path::new(&p);
                let full = if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) };
                load_scenario(&full, &self.catalog).map_err(|e| e.to_string())
            }
            (None, Some(doc)) => from_document(doc, Some(&self.base_dir))
                .map_err(|e| e.to_string())
                .and_then(|s| s.validate(&self.catalog).map(|_| s).map_err(|e| e.to_string())),
            _ => Err("exactly one of scenario_path and scenario_inline is required".into()),
        };
        let scenario = match scenario {
            Ok(s) => s,
            Err(e) => return Response::error("scenario", e),
        };
        let kind = match agent.as_deref().map(|a| PolicyKind::parse(a).ok_or(a)) {
            None => None,
            Some(Ok(k)) => Some(k),
            Some(Err(a)) => return Response::error("bad_request", format!("unknown agent `{a}`")),
        };
        let start = start.map(|[r, c]| Cell::new(r, c));
        let env = match Env::new(&scenario, &self.catalog, start, self.env_config) {
            Ok(e) => e,
            Err(e) => return Response::error("scenario", e.to_string()),
        };
        let policy = kind.map(|k| {
            PolicyConfig {
                drop_radius: self.env_config.drop_radius,
                ..PolicyConfig::new(k, agent_seed.unwrap_or(scenario.seed))
            }
            .build(scenario.width, scenario.height, env.agent_pos())
        });
        let downsample = downsample.unwrap_or(false);
        let resp = Response {
            ok: true,
            obs: Some(encode_obs(env.observation(), downsample)),
            done: Some(env.is_done()),
            info: Some(env.info().into()),
            ..Default::default()
        };
        self.episode = Some(Episode {
            env,
            scenario,
            policy,
            downsample,
        });
        resp
    }

    fn step(&mut self, action: Option<u8>) -> Response {
        let Some(ep) = self.episode.as_mut() else {
            return Response::error("not_reset", "");
        };
        if ep.env.is_done() {
            return Response::error("episode_done", "");
        }
        let action = match (action, ep.policy.as_mut()) {
            (Some(code), _) => match Action::try_from(code) {
                Ok(a) => a,
                Err(_) => return Response::error("invalid_action", format!("{code} is not in 0-4")),
            },
            (None, Some(p)) => p.act(ep.env.observation()),
            (None, None) => return Response::error("invalid_action", "action required"),
        };
        let out = match ep.env.step(action) {
            Ok(o) => o,
            Err(e) => return Response::error("episode_done", e.to_string()),
        };
        let report = out
            .done
            .then(|| build_report(ep.env.log(), ep.scenario.forecast.as_ref(), &ReportConfig::default()).ok())
            .flatten();
        Response {
            ok: true,
            action: Some(action.code()),
            obs: Some(encode_obs(ep.env.observation(), ep.downsample)),
            reward: Some(out.reward),
            done: Some(out.done),
            info: Some(out.info.into()),
            report,
            ..Default::default()
        }
    }
}
