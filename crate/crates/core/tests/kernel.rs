use proptest::prelude::*;
use serde::Deserialize;
use wildfire_core::fuel::builtin_catalog;
use wildfire_core::rothermel::{base_rate, effective_rate, spread_components, SpreadInputs};

#[derive(Deserialize)]
struct Golden {
    spread_dir: f64,
    wind_dir: f64,
    slope_tan: f64,
    cases: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    fuel_id: u16,
    moisture: f64,
    wind_ft_min: f64,
    i_r: f64,
    xi: f64,
    rho_b: f64,
    epsilon: f64,
    q_ig: f64,
    r_base: f64,
    phi_w: f64,
    r_eff: f64,
}

fn close(got: f64, want: f64) -> bool {
    if want == 0.0 {
        got.abs() < 1e-12
    } else {
        ((got - want) / want).abs() <= 1e-6
    }
}

#[test]
fn golden_cases_match_independent_evaluation() {
    let g: Golden = serde_json::from_str(include_str!("data/rothermel_golden.json")).unwrap();
    assert_eq!(g.cases.len(), 27);
    let cat = builtin_catalog();
    for c in &g.cases {
        let out = spread_components(&SpreadInputs {
            fuel: cat.get(c.fuel_id).unwrap(),
            moisture: c.moisture,
            wind_speed: c.wind_ft_min,
            wind_dir: g.wind_dir,
            slope_tan: g.slope_tan,
            spread_dir: g.spread_dir,
        })
        .unwrap();
        let pairs = [
            (out.i_r, c.i_r),
            (out.xi, c.xi),
            (out.rho_b, c.rho_b),
            (out.epsilon, c.epsilon),
            (out.q_ig, c.q_ig),
            (out.r_base, c.r_base),
            (out.phi_w, c.phi_w),
            (out.r_eff, c.r_eff),
        ];
        for (k, (got, want)) in pairs.into_iter().enumerate() {
            assert!(close(got, want), "fuel {} m {} u {} field {k}: {got} vs {want}", c.fuel_id, c.moisture, c.wind_ft_min);
        }
    }
}

#[test]
fn worked_substitutions() {
    assert_eq!(base_rate(1000.0, 0.04, 0.5, 0.01, 250.0).unwrap(), 32.0);
    assert_eq!(base_rate(2000.0, 0.04, 0.5, 0.01, 250.0).unwrap(), 64.0);
    assert_eq!(effective_rate(32.0, 0.0, 0.0), 32.0);
    assert_eq!(effective_rate(10.0, 1.5, 0.5), 30.0);
    assert_eq!(effective_rate(10.0, 0.0, -3.0), 0.0);
}

proptest! {
    #[test]
    fn finite_for_every_builtin_fuel(
        id in 1u16..=13,
        m in 0.0f64..1.0,
        u in 0.0f64..3000.0,
        wd in -7.0f64..7.0,
        sd in -7.0f64..7.0,
        s in -2.0f64..2.0,
    ) {
        let cat = builtin_catalog();
        let c = spread_components(&SpreadInputs {
            fuel: cat.get(id).unwrap(),
            moisture: m,
            wind_speed: u,
            wind_dir: wd,
            slope_tan: s,
            spread_dir: sd,
        }).unwrap();
        for v in [c.i_r, c.xi, c.rho_b, c.epsilon, c.q_ig, c.r_base, c.phi_w, c.phi_s, c.r_eff] {
            prop_assert!(v.is_finite());
        }
        prop_assert!(c.r_eff >= 0.0);
    }

    #[test]
    fn calm_flat_spread_is_direction_free(id in 1u16..=13, m in 0.0f64..0.4, a in -7.0f64..7.0, b in -7.0f64..7.0) {
        let cat = builtin_catalog();
        let at = |dir: f64| spread_components(&SpreadInputs {
            fuel: cat.get(id).unwrap(),
            moisture: m,
            wind_speed: 0.0,
            wind_dir: 0.0,
            slope_tan: 0.0,
            spread_dir: dir,
        }).unwrap().r_eff;
        prop_assert_eq!(at(a), at(b));
    }
}
