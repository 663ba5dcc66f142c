//! Acceptance runner. Prints one line per criterion and exits non-zero if
//! any criterion fails. Failing sub-checks are listed under their line.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use aqmflow_core::analysis::{operating_point, rho_a_from_rho_b, rho_from_p0};
use aqmflow_core::aqm::{AqmConfig, PiConfig};
use aqmflow_core::metrics::{convergence_time, settled_rows, RunMetrics};
use aqmflow_core::models::{
    continuous_rhs, step_scenario_a, step_scenario_b, Simulation, StepInput, TimeSeries,
};
use aqmflow_core::stability::{analyze, PiGains};
use aqmflow_core::{mbps_to_pps, rtt, ModelSpec, NetworkParams, Scenario};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const DT: f64 = 0.0005;
const TABLE_TOL: f64 = 0.0005;

#[derive(Default)]
struct Outcome {
    checks: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks += 1;
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn with_n(n: u32) -> NetworkParams {
    NetworkParams {
        n_flows: n,
        ..NetworkParams::default()
    }
}

fn pi() -> AqmConfig {
    AqmConfig::Pi(PiConfig::default())
}

fn run(params: NetworkParams, model: ModelSpec, duration: f64, stride: usize) -> TimeSeries {
    Simulation::new(params, model, pi(), DT)
        .and_then(|mut sim| sim.run(duration, &[], stride))
        .expect("simulation")
}

fn near(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn operating_point_tables(o: &mut Outcome) {
    let c15 = NetworkParams {
        capacity: mbps_to_pps(15.0, 1000.0),
        ..NetworkParams::default()
    };
    let c95 = NetworkParams {
        capacity: mbps_to_pps(95.0, 1000.0),
        ..NetworkParams::default()
    };
    let tp05 = NetworkParams {
        prop_delay: 0.05,
        ..NetworkParams::default()
    };
    let tp15 = NetworkParams {
        prop_delay: 0.15,
        ..NetworkParams::default()
    };
    let mgt = ModelSpec::mgt();
    let a1 = ModelSpec::scenario_a(1.0);
    let b1 = ModelSpec::scenario_b(1.0);
    let rows: &[(&str, NetworkParams, ModelSpec, f64)] = &[
        ("N=200 mgt", with_n(200), mgt, 0.0708),
        ("N=200 B", with_n(200), b1, 0.0662),
        ("N=2000 mgt", with_n(2000), mgt, 7.0827),
        ("N=2000 A", with_n(2000), a1, 0.7901),
        ("N=500 mgt", with_n(500), mgt, 0.4429),
        ("N=500 B", with_n(500), b1, 0.3069),
        ("N=500 A", with_n(500), a1, 0.4848),
        ("N=800 mgt", with_n(800), mgt, 1.1337),
        ("N=800 B", with_n(800), b1, 0.5313),
        ("N=800 A", with_n(800), a1, 0.6009),
        ("N=1100 mgt", with_n(1100), mgt, 2.1434),
        ("N=1100 B", with_n(1100), b1, 0.6819),
        ("N=1100 A", with_n(1100), a1, 0.6743),
        ("Tp=0.05 mgt", tp05, mgt, 0.8191),
        ("Tp=0.05 B", tp05, b1, 0.4503),
        ("Tp=0.15 mgt", tp15, mgt, 0.2769),
        ("Tp=0.15 B", tp15, b1, 0.2168),
        ("C=15 mgt", c15, mgt, 1.0577),
        ("C=15 B", c15, b1, 0.5140),
        ("C=95 mgt", c95, mgt, 0.1756),
        ("C=95 B", c95, b1, 0.1494),
    ];
    for (label, params, model, want) in rows {
        let op = operating_point(params, model).expect("operating point");
        o.check(
            near(op.p0, *want, TABLE_TOL),
            format!("{label}: p0 {:.5} vs {want}", op.p0),
        );
        if op.p0 > 1.0 {
            o.check(op.truncation_required, format!("{label}: truncation flag"));
        }
    }
}

fn rho_inversions(o: &mut Outcome) {
    let rows: &[(&str, u32, f64, Scenario, f64)] = &[
        ("N=200 B", 200, 0.0442, Scenario::B, 1.5318),
        ("N=2000 A", 2000, 0.4879, Scenario::A, 3.9516),
        ("N=500 B", 500, 0.2004, Scenario::B, 1.7670),
        ("N=500 A", 500, 0.2004, Scenario::A, 3.7551),
        ("N=800 B", 800, 0.3504, Scenario::B, 2.1022),
        ("N=800 A", 800, 0.3504, Scenario::A, 2.7921),
        ("N=1100 B", 1100, 0.4212, Scenario::B, 2.9450),
        ("N=1100 A", 1100, 0.4212, Scenario::A, 2.8448),
    ];
    for &(label, n, p0, s, want) in rows {
        let params = with_n(n);
        let rho = rho_from_p0(p0, &params, s, true).expect("rho");
        o.check(near(rho, want, TABLE_TOL), format!("{label}: rho {rho:.5} vs {want}"));
        if s == Scenario::A {
            let rho_b = rho_from_p0(p0, &params, Scenario::B, true).expect("rho");
            let ws0 = rtt(params.q_ref, &params) * params.capacity;
            let bridged = rho_a_from_rho_b(rho_b, ws0, n);
            o.check(
                rel(bridged, rho) < 1e-12,
                format!("{label}: bridged rho {bridged} vs direct {rho}"),
            );
        }
    }
    let off = NetworkParams {
        ecn_on: false,
        ..NetworkParams::default()
    };
    let rho = rho_from_p0(0.1416, &off, Scenario::B, false).expect("rho");
    o.check(near(rho, 1.9789, TABLE_TOL), format!("ECN off B: rho {rho:.5} vs 1.9789"));
}

fn ecn_off_solve(o: &mut Outcome) {
    let params = NetworkParams {
        ecn_on: false,
        ..NetworkParams::default()
    };
    let op = operating_point(&params, &ModelSpec::scenario_b(1.0)).expect("operating point");
    let n = params.n();
    let ws0 = rtt(params.q_ref, &params) * params.capacity / (1.0 - op.p0);
    let residual = op.p0 - 2.0 * n * n / (2.0 * n * n + ws0 * ws0);
    o.check(near(op.p0, 0.2146, TABLE_TOL), format!("p0 {:.6} vs 0.2146", op.p0));
    o.check(residual.abs() < 1e-10, format!("residual {residual:e}"));
    o.note(format!("p0 = {:.6}, residual = {residual:.1e}", op.p0));
}

fn stability_tables(o: &mut Outcome) {
    // (N, scenario, rho, measured p0, [alpha1, beta1, beta2, alpha4])
    let rows: &[(u32, Scenario, f64, f64, [f64; 4])] = &[
        (500, Scenario::A, 3.7551, 0.2004, [14.8205, 946.6351, 1.2581e3, 0.0472]),
        (800, Scenario::A, 2.7921, 0.3504, [14.0721, 799.4057, 8.3581e4, 0.0270]),
        (1100, Scenario::A, 2.8448, 0.4212, [13.6513, 732.6899, 6.7882e4, 0.0225]),
        (2000, Scenario::A, 3.9516, 0.4879, [13.2988, 672.6120, 5.5029e4, 0.0194]),
        (200, Scenario::B, 1.5318, 0.0442, [12.4921, 536.3968, 3.5160e4, 0.0403]),
        (500, Scenario::B, 1.7670, 0.2004, [45.8829, 2.6924e4, 2.6975e7, 0.0422]),
        (800, Scenario::B, 2.1022, 0.3504, [15.7664, 1.1551e3, 1.7474e5, 0.0203]),
        (1100, Scenario::B, 2.9450, 0.4212, [16.9312, 1.4268e3, 2.6368e5, 0.0232]),
    ];
    let pi = PiConfig::default();
    let gains = PiGains::from_discrete(pi.a, pi.b);
    for &(n, s, rho, p0, want) in rows {
        let params = with_n(n);
        let mut op = operating_point(&params, &ModelSpec::scenario(s, rho)).expect("op");
        op.p0 = p0;
        let (_, rep) = analyze(&op, rho, &params, s, gains).expect("stability");
        let got = [rep.alpha[0], rep.beta1, rep.beta2, rep.alpha[3]];
        let names = ["alpha1", "beta1", "beta2", "alpha4"];
        for i in 0..4 {
            o.check(
                rel(got[i], want[i]) < 0.01,
                format!("{s:?} N={n} {}: {:.6e} vs {:e}", names[i], got[i], want[i]),
            );
        }
        o.check(rep.stable, format!("{s:?} N={n}: verdict unstable"));
    }
}

fn fixed_point_invariance(o: &mut Outcome) {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let draws = 1000;
    let steps = 40;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let n_flows = rng.gen_range(50..=5000u32);
        let base = NetworkParams {
            n_flows,
            capacity: rng.gen_range(500.0..20000.0),
            prop_delay: rng.gen_range(0.01..0.5),
            ..NetworkParams::default()
        };
        let rho = rng.gen_range(1.0..=f64::from(n_flows));
        for ecn_on in [true, false] {
            for s in [Scenario::A, Scenario::B] {
                let params = NetworkParams { ecn_on, ..base };
                let model = ModelSpec::scenario(s, rho);
                let op = operating_point(&params, &model).expect("operating point");
                let mut sim =
                    Simulation::from_operating_point(params, model, pi(), DT, &op).expect("sim");
                let mut prev = sim.state();
                for _ in 0..steps {
                    sim.step().expect("step");
                    let cur = sim.state();
                    let dw = (cur.ws - prev.ws).abs() / op.ws0;
                    let dq = (cur.q - prev.q).abs() / op.q0;
                    worst = worst.max(dw).max(dq);
                    prev = cur;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    o.check(worst < 1e-9, format!("worst per-step relative change {worst:e}"));
    o.check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"));
    o.note(format!(
        "{draws} draws x 4 models x {steps} steps, worst relative change {worst:.1e}, {elapsed:.2?}"
    ));
}

fn closed_loop(o: &mut Outcome) {
    let t0 = Instant::now();
    let b = run(with_n(500), ModelSpec::scenario_b(1.7670), 200.0, 1);
    let tb = t0.elapsed();
    let mb = RunMetrics::from_series(&b, 500.0);
    o.check(b.len() == 400_001, format!("B run recorded {} rows", b.len()));
    o.check(near(mb.settled_q, 500.0, 10.0), format!("B settled q {:.2}", mb.settled_q));
    o.check(near(mb.settled_p, 0.2004, 0.01), format!("B settled p {:.5}", mb.settled_p));
    o.check(tb < Duration::from_secs(1), format!("B run took {tb:?}"));

    let t0 = Instant::now();
    let a = run(with_n(2000), ModelSpec::scenario_a(1.0), 200.0, 1);
    let ta = t0.elapsed();
    let ma = RunMetrics::from_series(&a, 500.0);
    o.check(near(ma.settled_p, 0.7901, 0.01), format!("A settled p {:.5}", ma.settled_p));
    o.check(ta < Duration::from_secs(1), format!("A run took {ta:?}"));
    o.note(format!(
        "B: q {:.2} p {:.5} ({tb:.0?}); A: q {:.2} p {:.5} ({ta:.0?})",
        mb.settled_q, mb.settled_p, ma.settled_q, ma.settled_p
    ));
}

fn untruncated_mgt(o: &mut Outcome) {
    let t0 = Instant::now();
    let ts = run(with_n(2000), ModelSpec::mgt_untruncated(), 2600.0, 100);
    let elapsed = t0.elapsed();
    let band = 0.05 * 500.0;
    let first_entry = ts.rows.iter().find(|r| (r.q - 500.0).abs() < band).map(|r| r.t);
    let settled = convergence_time(&ts, 500.0, band, 10.0);
    let at_2500 = ts.rows.iter().find(|r| r.t >= 2500.0).map(|r| r.q);
    o.check(
        first_entry.map_or(true, |t| t >= 1000.0),
        format!("entered band at {first_entry:?} s"),
    );
    o.check(
        at_2500.map_or(false, |q| (q - 500.0).abs() < band) && settled.map_or(false, |t| t <= 2500.0),
        format!("q(2500) = {at_2500:?}, converged at {settled:?} s"),
    );
    o.check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"));
    o.note(format!(
        "first entry {first_entry:?} s, converged {settled:?} s, q(2500) {at_2500:.1?}, {elapsed:.2?}"
    ));
}

fn buffer_saturation(o: &mut Outcome) {
    let params = with_n(2000);
    let ts = run(params, ModelSpec::mgt(), 200.0, 10);
    let full = params.buffer - 1e-9;
    let reached = ts.rows.iter().position(|r| r.q >= full);
    match reached {
        Some(i) => {
            let dips = ts.rows[i..].iter().filter(|r| r.q < full).count();
            o.check(dips == 0, format!("queue left the buffer limit {dips} times"));
            o.note(format!("full from t = {:.2} s", ts.rows[i].t));
        }
        None => o.check(false, "queue never reached the buffer"),
    }
    let tail = settled_rows(&ts);
    o.check(
        tail.iter().all(|r| r.q >= full),
        "settled window not pinned at the buffer",
    );
}

fn bound_closeness(o: &mut Outcome) {
    for (n, rho_b, rho_a) in [(500, 1.7670, 3.7551), (800, 2.1022, 2.7921), (1100, 2.9450, 2.8448)] {
        let a = RunMetrics::from_series(&run(with_n(n), ModelSpec::scenario_a(rho_a), 300.0, 20), 500.0);
        let b = RunMetrics::from_series(&run(with_n(n), ModelSpec::scenario_b(rho_b), 300.0, 20), 500.0);
        let dq = (a.settled_q - b.settled_q).abs() / (0.5 * (a.settled_q + b.settled_q));
        let dp = (a.settled_p - b.settled_p).abs() / (0.5 * (a.settled_p + b.settled_p));
        o.check(dq < 0.02, format!("N={n}: q {:.2} vs {:.2}", a.settled_q, b.settled_q));
        o.check(dp < 0.02, format!("N={n}: p {:.5} vs {:.5}", a.settled_p, b.settled_p));
        o.note(format!("N={n}: dq {:.2}%, dp {:.2}%", 100.0 * dq, 100.0 * dp));
    }
}

fn scenario_mgt_ordering(o: &mut Outcome) {
    let mut rng = StdRng::seed_from_u64(10);
    let mut bad = 0;
    let draws = 10_000;
    for _ in 0..draws {
        let n_flows = rng.gen_range(1..=10_000u32);
        let buffer = rng.gen_range(10.0..5000.0);
        let params = NetworkParams {
            n_flows,
            capacity: rng.gen_range(100.0..50_000.0),
            prop_delay: rng.gen_range(0.001..1.0),
            buffer,
            q_ref: rng.gen_range(1.0..=buffer),
            ..NetworkParams::default()
        };
        let rho = rng.gen_range(1.0..=f64::from(n_flows));
        let b = operating_point(&params, &ModelSpec::scenario_b(rho)).expect("op");
        let m = operating_point(&params, &ModelSpec::mgt()).expect("op");
        if !(b.p0 < m.p0) {
            bad += 1;
        }
    }
    o.check(bad == 0, format!("{bad} of {draws} draws violate the ordering"));
    o.note(format!("{draws} draws"));
}

fn discretization(o: &mut Outcome) {
    let mut rng = StdRng::seed_from_u64(11);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let n_flows = rng.gen_range(1..=5000u32);
        let params = with_n(n_flows);
        let rho = rng.gen_range(1.0..=f64::from(n_flows));
        let input = StepInput {
            ws_now: rng.gen_range(1.0..1e4),
            ws_delayed: rng.gen_range(1.0..1e4),
            p_delayed: rng.gen_range(0.0..=1.0),
            q_delayed: rng.gen_range(0.0..=params.buffer),
            r_delayed: rng.gen_range(params.prop_delay..params.max_rtt()),
            dt: rng.gen_range(1e-5..0.01),
        };
        for s in [Scenario::A, Scenario::B] {
            let step = match s {
                Scenario::A => step_scenario_a(&input, &params, rho),
                Scenario::B => step_scenario_b(&input, &params, rho),
            }
            .expect("step");
            let rhs = continuous_rhs(
                input.ws_now,
                input.ws_delayed,
                input.p_delayed,
                input.r_delayed,
                &params,
                &ModelSpec::scenario(s, rho),
            )
            .expect("rhs");
            if step != rhs * input.dt {
                mismatches += 1;
            }
        }
    }
    o.check(mismatches == 0, format!("{mismatches} steps differ from rhs * dt"));

    let model = ModelSpec::scenario_b(1.7670);
    let coarse = run(with_n(500), model, 100.0, 1);
    let fine = Simulation::new(with_n(500), model, pi(), DT / 2.0)
        .and_then(|mut sim| sim.run(100.0, &[], 2))
        .expect("simulation");
    let sup = coarse
        .rows
        .iter()
        .zip(&fine.rows)
        .map(|(c, f)| (c.q - f.q).abs())
        .fold(0.0, f64::max);
    o.check(coarse.len() == fine.len(), "grids differ in length");
    o.check(sup < 1.0, format!("sup |q(dt) - q(dt/2)| = {sup:.4}"));
    o.note(format!("sup-norm queue difference {sup:.3} packets"));
}

fn main() -> ExitCode {
    let criteria: &[(&str, fn(&mut Outcome))] = &[
        ("1 operating-point tables", operating_point_tables),
        ("2 rho inversions", rho_inversions),
        ("3 ECN-off fixed point", ecn_off_solve),
        ("4 stability tables", stability_tables),
        ("5 fixed-point invariance", fixed_point_invariance),
        ("6 closed-loop convergence", closed_loop),
        ("7 untruncated MGT slow convergence", untruncated_mgt),
        ("8 buffer saturation", buffer_saturation),
        ("9 bound closeness", bound_closeness),
        ("10 scenario B below MGT", scenario_mgt_ordering),
        ("11 discretization consistency", discretization),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let mut o = Outcome::default();
        f(&mut o);
        let pass = o.failures.is_empty();
        let passed = o.checks - o.failures.len();
        println!(
            "{} criterion {name}: {passed}/{} checks",
            if pass { "PASS" } else { "FAIL" },
            o.checks
        );
        for n in &o.notes {
            println!("       {n}");
        }
        for f in &o.failures {
            println!("       x {f}");
        }
        failed += usize::from(!pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
