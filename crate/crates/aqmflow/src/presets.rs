//! Built-in experiments, one per published figure with analytical curves.
//!
//! Each preset is plain config text, so it is parsed and validated exactly
//! like a user file. The durations are our choice; the runs are long enough
//! for every curve to settle.

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn text(name: &str) -> Option<&'static str> {
    find(name).map(|p| p.text)
}

macro_rules! preset {
    ($name:literal, $desc:literal, $($line:literal),+ $(,)?) => {
        Preset {
            name: $name,
            description: $desc,
            text: concat!($($line, "\n"),+),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!(
        "fig-pi-n200", "mild congestion, PI",
        "n_flows = 200", "models = mgt, scenario-b@1, scenario-b@1.5318",
        "aqm.kind = pi", "duration = 100",
    ),
    preset!(
        "fig-rem-n200", "mild congestion, REM",
        "n_flows = 200", "models = mgt, scenario-b@1, scenario-b@1.5318",
        "aqm.kind = rem", "duration = 100",
    ),
    preset!(
        "fig-raq-n200", "mild congestion, RaQ",
        "n_flows = 200", "models = mgt, scenario-b@1, scenario-b@1.5318",
        "aqm.kind = raq", "duration = 100",
    ),
    preset!(
        "fig-pi-n2000", "severe congestion, PI",
        "n_flows = 2000", "models = mgt, scenario-a@1, scenario-a@3.9516",
        "aqm.kind = pi", "duration = 200",
    ),
    preset!(
        "fig-rem-n2000", "severe congestion, REM",
        "n_flows = 2000", "models = mgt, scenario-a@1, scenario-a@3.9516",
        "aqm.kind = rem", "duration = 200",
    ),
    preset!(
        "fig-raq-n2000", "severe congestion, RaQ, with the untruncated MGT queue",
        "n_flows = 2000",
        "models = mgt, mgt-untruncated, scenario-a@1, scenario-a@3.9516",
        "aqm.kind = raq", "duration = 200",
    ),
    preset!(
        "fig-untruncated-pi", "untruncated MGT, PI, N=2000",
        "n_flows = 2000", "models = mgt-untruncated", "aqm.kind = pi",
        "duration = 5000", "output.stride = 200",
    ),
    preset!(
        "fig-untruncated-rem", "untruncated MGT, REM, N=2000",
        "n_flows = 2000", "models = mgt-untruncated", "aqm.kind = rem",
        "duration = 5000", "output.stride = 200",
    ),
    preset!(
        "fig-untruncated-raq", "untruncated MGT, RaQ, N=2000",
        "n_flows = 2000", "models = mgt-untruncated", "aqm.kind = raq",
        "duration = 5000", "output.stride = 200",
    ),
    preset!(
        "fig-pi-n500", "mild/moderate boundary, PI",
        "n_flows = 500",
        "models = mgt, scenario-a@1, scenario-b@1, scenario-a@3.7551, scenario-b@1.767",
        "aqm.kind = pi", "duration = 200",
    ),
    preset!(
        "fig-pi-n800", "moderate congestion, PI",
        "n_flows = 800",
        "models = mgt, scenario-a@1, scenario-b@1, scenario-a@2.7921, scenario-b@2.1022",
        "aqm.kind = pi", "duration = 200",
    ),
    preset!(
        "fig-pi-n1100", "moderate/severe boundary, PI",
        "n_flows = 1100",
        "models = mgt, scenario-a@1, scenario-b@1, scenario-a@2.8448, scenario-b@2.945",
        "aqm.kind = pi", "duration = 200",
    ),
    preset!(
        "ecn-off-n500", "drops instead of marks, PI",
        "ecn = off", "models = mgt, scenario-b@1, scenario-b@1.9789",
        "aqm.kind = pi", "duration = 200", "measured_p0 = 0.1416",
    ),
    preset!(
        "ecn-off-rem-n500", "drops instead of marks, REM",
        "ecn = off", "models = mgt, scenario-b@1, scenario-b@1.9789",
        "aqm.kind = rem", "duration = 200", "measured_p0 = 0.1416",
    ),
    preset!(
        "ecn-off-raq-n500", "drops instead of marks, RaQ",
        "ecn = off", "models = mgt, scenario-b@1, scenario-b@1.9789",
        "aqm.kind = raq", "duration = 200", "measured_p0 = 0.1416",
    ),
    preset!(
        "vary-n", "300 sessions, +200 at 65 s, -200 at 130 s, PI",
        "n_flows = 300", "schedule = 65:+200, 130:-200",
        "models = mgt, scenario-b@1, scenario-b@1.6575;1.767;1.6575",
        "aqm.kind = pi", "duration = 200",
    ),
    preset!(
        "vary-n-rem", "300 sessions, +200 at 65 s, -200 at 130 s, REM",
        "n_flows = 300", "schedule = 65:+200, 130:-200",
        "models = mgt, scenario-b@1, scenario-b@1.6575;1.767;1.6575",
        "aqm.kind = rem", "duration = 200",
    ),
    preset!(
        "vary-n-raq", "300 sessions, +200 at 65 s, -200 at 130 s, RaQ",
        "n_flows = 300", "schedule = 65:+200, 130:-200",
        "models = mgt, scenario-b@1, scenario-b@1.6575;1.767;1.6575",
        "aqm.kind = raq", "duration = 200",
    ),
    preset!(
        "fig-pi-tp005", "propagation delay 0.05 s, PI",
        "prop_delay = 0.05", "models = mgt, scenario-b@1, scenario-b@2.0107",
        "aqm.kind = pi", "duration = 200", "measured_p0 = 0.2894",
    ),
    preset!(
        "fig-pi-tp015", "propagation delay 0.15 s, PI",
        "prop_delay = 0.15", "models = mgt, scenario-b@1, scenario-b@1.6984",
        "aqm.kind = pi", "duration = 200", "measured_p0 = 0.1402",
    ),
    preset!(
        "fig-pi-c15", "15 Mb/s link, PI",
        "capacity_mbps = 15", "models = mgt, scenario-b@1, scenario-b@2.0297",
        "aqm.kind = pi", "duration = 200", "measured_p0 = 0.3426",
    ),
    preset!(
        "fig-pi-c95", "95 Mb/s link, PI",
        "capacity_mbps = 95", "models = mgt, scenario-b@1, scenario-b@1.6286",
        "aqm.kind = pi", "duration = 200", "measured_p0 = 0.0973",
    ),
    preset!(
        "dt-02", "step and sampling period of 0.2 s, RaQ",
        "models = mgt, scenario-b@1, scenario-b@1.767",
        "aqm.kind = raq", "aqm.T = 0.2", "dt = 0.2", "duration = 600",
        "output.stride = 1",
    ),
];
