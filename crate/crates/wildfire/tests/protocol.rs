use std::path::Path;
use std::sync::Arc;

use proptest::prelude::*;
use wildfire::protocol::{rle, unrle, Request, Response, Session, WireInfo, WireObs};
use wildfire_core::env::RewardBreakdown;
use wildfire_core::fuel::builtin_catalog;

fn request() -> impl Strategy<Value = Request> {
    prop_oneof![
        (
            proptest::option::of("[a-z/._]{1,20}"),
            proptest::option::of(any::<[u32; 2]>()),
            proptest::option::of(prop_oneof![Just("blind".to_string()), Just("circler".to_string())]),
            proptest::option::of(any::<u64>()),
            proptest::option::of(any::<bool>()),
        )
            .prop_map(|(scenario_path, agent_start, agent, agent_seed, downsample)| Request::Reset {
                scenario_path,
                scenario_inline: None,
                agent_start,
                agent,
                agent_seed,
                downsample,
            }),
        proptest::option::of(any::<u8>()).prop_map(|action| Request::Step { action }),
        Just(Request::State),
        Just(Request::Close),
    ]
}

fn finite() -> impl Strategy<Value = f64> {
    -1e6f64..1e6
}

fn response() -> impl Strategy<Value = Response> {
    let obs = (1u32..6, 1u32..6, any::<bool>(), proptest::collection::vec(0u8..4, 36)).prop_map(|(w, h, over, phases)| {
        let phases = &phases[..(w * h) as usize];
        let frame = wildfire::protocol::WireFrame {
            phase: rle(phases),
            intensity: rle(&phases.iter().map(|&p| p as f32 * 0.25).collect::<Vec<_>>()),
        };
        WireObs { width: w, height: h, agent_pos: [0, 0], over_burning: over, frames: vec![frame; 4] }
    });
    let reward = (finite(), finite(), finite(), finite(), finite()).prop_map(|(a, b, c, d, e)| RewardBreakdown {
        extinguish: a,
        containment: b,
        proximity: c,
        idle_penalty: d,
        waste_penalty: e,
        total: a + b + c + d + e,
    });
    let info = any::<[u32; 5]>().prop_map(|v| WireInfo {
        newly_ignited: v[0],
        newly_burnt: v[1],
        extinguished: v[2],
        burnt_count: v[3],
        step: v[4],
    });
    (
        any::<bool>(),
        proptest::option::of("[a-z_]{1,12}"),
        proptest::option::of(0u8..5),
        proptest::option::of(obs),
        proptest::option::of(reward),
        proptest::option::of(any::<bool>()),
        proptest::option::of(info),
    )
        .prop_map(|(ok, error, action, obs, reward, done, info)| Response {
            ok,
            error,
            action,
            obs,
            reward,
            done,
            info,
            ..Default::default()
        })
}

proptest! {
    #[test]
    fn requests_survive_the_wire(r in request()) {
        let line = serde_json::to_string(&r).unwrap();
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(serde_json::from_str::<Request>(&line).unwrap(), r);
    }

    #[test]
    fn responses_survive_the_wire(r in response()) {
        let line = serde_json::to_string(&r).unwrap();
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(serde_json::from_str::<Response>(&line).unwrap(), r);
    }

    #[test]
    fn run_length_coding_is_lossless(v in proptest::collection::vec(0u8..3, 0..400)) {
        let runs = rle(&v);
        prop_assert!(runs.windows(2).all(|w| w[0].0 != w[1].0));
        prop_assert!(runs.iter().all(|r| r.1 > 0));
        prop_assert_eq!(unrle(&runs), v);
    }
}

#[test]
fn golden_transcript_replies_parse_and_reserialize() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/protocol");
    let transcript = std::fs::read_to_string(dir.join("transcript.jsonl")).unwrap();
    for line in transcript.lines() {
        let r: Response = serde_json::from_str(line).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), line);
        if let Some(obs) = &r.obs {
            for f in &obs.frames {
                assert_eq!(unrle(&f.phase).len() as u32, obs.width * obs.height);
                assert_eq!(unrle(&f.intensity).len() as u32, obs.width * obs.height);
            }
        }
    }
}

#[test]
fn a_bad_line_does_not_end_the_session() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/protocol");
    let mut s = Session::new(Arc::new(builtin_catalog()), &dir);
    for bad in ["", "{", "[1,2]", r#"{"cmd":"fly"}"#, r#"{"cmd":"step","action":1,"extra":0}"#] {
        let r: Response = serde_json::from_str(&s.handle_line(bad)).unwrap();
        assert!(!r.ok, "{bad:?} accepted");
        assert!(!s.is_closed());
    }
    let r: Response = serde_json::from_str(&s.handle_line(r#"{"cmd":"reset","scenario_path":"scenario.json"}"#)).unwrap();
    assert!(r.ok, "{r:?}");
    let r: Response = serde_json::from_str(&s.handle_line(r#"{"cmd":"step","action":9}"#)).unwrap();
    assert_eq!(r.error.as_deref(), Some("invalid_action"));
    let r: Response = serde_json::from_str(&s.handle_line(r#"{"cmd":"step","action":0}"#)).unwrap();
    assert!(r.ok);
    assert_eq!(r.info.unwrap().step, 1);
}
