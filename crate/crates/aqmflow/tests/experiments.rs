//! Preset experiments through the library API.

use aqmflow::config::ConfigLoader;
use aqmflow::presets::PRESETS;
use aqmflow::run::{run_models, ModelRun};
use aqmflow::sweep::{sweep, Axis};
use aqmflow::ExperimentConfig;
use aqmflow_core::aqm::AqmConfig;
use aqmflow_core::ModelKind;

fn pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().build().unwrap()
}

fn preset(name: &str, overrides: &[(&str, &str)]) -> ExperimentConfig {
    let mut loader = ConfigLoader::new("").unwrap().preset(name).unwrap();
    for (k, v) in overrides {
        loader = loader.set(k, v, "--set").unwrap();
    }
    loader.build().unwrap()
}

fn find<'a>(runs: &'a [ModelRun], label: &str) -> &'a ModelRun {
    runs.iter()
        .find(|r| r.entry.label() == label)
        .unwrap_or_else(|| panic!("no run {label}"))
}

#[test]
fn fig_pi_n2000_selects_scenario_a() {
    let cfg = preset("fig-pi-n2000", &[]);
    assert_eq!(cfg.params.n_flows, 2000);
    assert!(matches!(cfg.aqm, AqmConfig::Pi(_)));
    assert!(cfg.models.iter().any(|m| m.kind == ModelKind::ScenarioA));
    assert!(!cfg.models.iter().any(|m| m.kind == ModelKind::ScenarioB));
}

#[test]
fn every_preset_runs() {
    for p in PRESETS {
        // Long enough for every schedule event.
        let cfg = preset(p.name, &[("duration", "140"), ("output.stride", "200")]);
        let runs = run_models(&cfg, &pool()).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        for r in &runs {
            for row in &r.series.rows {
                assert!(row.q >= 0.0 && row.q <= cfg.params.buffer, "{}", p.name);
                assert!(row.p >= 0.0 && row.p.is_finite(), "{}", p.name);
                if r.entry.kind != ModelKind::MgtUntruncated {
                    assert!(row.p <= 1.0, "{}", p.name);
                }
            }
        }
    }
}

#[test]
fn vary_n_tracks_population_changes() {
    let cfg = preset("vary-n-raq", &[("models", "scenario-b@1")]);
    let runs = run_models(&cfg, &pool()).unwrap();
    let rows = &runs[0].series.rows;
    let p_at = |t: f64| rows.iter().find(|r| r.t >= t).unwrap().p;
    let q_at = |t: f64| rows.iter().find(|r| r.t >= t).unwrap().q;
    // Scenario B with rho = 1: 0.1375 at N = 300, 0.3069 at N = 500.
    assert!((p_at(64.0) - 0.1375).abs() < 0.01, "{}", p_at(64.0));
    assert!((p_at(129.0) - 0.3069).abs() < 0.01, "{}", p_at(129.0));
    assert!((p_at(199.0) - 0.1375).abs() < 0.01, "{}", p_at(199.0));
    assert!((q_at(129.0) - 500.0).abs() < 25.0);
}

#[test]
fn ecn_off_settles_at_dropping_fixed_point() {
    let runs = run_models(&preset("ecn-off-n500", &[]), &pool()).unwrap();
    let measured = find(&runs, "scenario-b@1.9789");
    assert!((measured.metrics.settled_p - 0.1416).abs() < 0.005, "{:?}", measured.metrics);
    assert!((measured.metrics.settled_q - 500.0).abs() < 10.0);
    let unit = find(&runs, "scenario-b@1");
    assert!((unit.metrics.settled_p - 0.2146).abs() < 0.005, "{:?}", unit.metrics);

    // REM keeps the pre-drop rate in its price, so the queue settles below q_ref.
    let runs = run_models(&preset("ecn-off-rem-n500", &[]), &pool()).unwrap();
    let rem = find(&runs, "scenario-b@1.9789");
    assert!((rem.metrics.settled_q - 450.0).abs() < 15.0, "{:?}", rem.metrics);
}

#[test]
fn long_step_with_raq_still_settles() {
    let cfg = preset("dt-02", &[]);
    assert_eq!(cfg.dt, 0.2);
    assert_eq!(cfg.aqm.period(), 0.2);
    let runs = run_models(&cfg, &pool()).unwrap();
    let b = find(&runs, "scenario-b@1.767");
    assert!((b.metrics.settled_q - 500.0).abs() < 25.0, "{:?}", b.metrics);
    assert!(b.metrics.convergence_time.is_some());
}

#[test]
fn raq_converges_faster_than_pi() {
    let pi = run_models(&preset("fig-pi-n200", &[("models", "scenario-b@1.5318")]), &pool()).unwrap();
    let raq = run_models(&preset("fig-raq-n200", &[("models", "scenario-b@1.5318")]), &pool()).unwrap();
    let t_pi = pi[0].metrics.convergence_time.unwrap();
    let t_raq = raq[0].metrics.convergence_time.unwrap();
    assert!(t_raq < t_pi, "raq {t_raq} vs pi {t_pi}");
}

#[test]
fn mgt_saturates_buffer_under_severe_congestion() {
    let runs = run_models(&preset("fig-pi-n2000", &[]), &pool()).unwrap();
    let mgt = find(&runs, "mgt");
    assert!((mgt.metrics.settled_q - 1125.0).abs() < 1e-9);
    assert!((mgt.metrics.settled_p - 1.0).abs() < 1e-9);
    let a = find(&runs, "scenario-a@1");
    assert!((a.metrics.settled_p - 0.7901).abs() < 0.01);
    assert!((a.metrics.settled_q - 500.0).abs() < 10.0);
}

#[test]
fn bound_gap_pairs_scenarios() {
    let runs = run_models(&preset("fig-pi-n800", &[("duration", "300")]), &pool()).unwrap();
    assert!(find(&runs, "mgt").metrics.bound_gap.is_none());
    let a = find(&runs, "scenario-a@2.7921").metrics.bound_gap.unwrap();
    let b = find(&runs, "scenario-b@2.1022").metrics.bound_gap.unwrap();
    assert_eq!(a, b);
    assert!(a < 10.0, "{a}");
}

#[test]
fn sweep_rows_match_single_runs() {
    let base = ConfigLoader::new("models = scenario-a@2, scenario-b@1.5\nduration = 40\n").unwrap();
    let values = vec!["200".to_string(), "800".to_string()];
    let rows = sweep(&base, Axis::NFlows, &values, true, &pool()).unwrap();
    assert_eq!(rows.len(), 4);
    for (i, v) in values.iter().enumerate() {
        let cfg = base.clone().set("n_flows", v, "--set").unwrap().build().unwrap();
        let runs = run_models(&cfg, &pool()).unwrap();
        for (j, run) in runs.iter().enumerate() {
            let row = &rows[2 * i + j];
            assert_eq!(row.value, *v);
            assert_eq!(row.model, run.entry.label());
            assert_eq!(row.metrics, Some(run.metrics));
        }
    }
}
