//! Named experiments.
//!
//! Grids follow one rule: `L = 3` for steady states, `L = 12` for moving
//! pulses, `N = 800`. Initial data not pinned down by the model parameters are
//! reconstructed choices and say so in their summary.

use crate::config::{GridConfig, InitialConfig, OutputConfig, RunConfig};
use crate::profile::{Choice, ProfileSpec};
use crate::scan::ScanSpec;
use crossdiff_core::analytic::critical_epsilon;
use crossdiff_core::{ModelParams, PotentialSpec, Segment, StepControls};

pub enum Plan {
    Simulate(Vec<RunConfig>),
    Construct(Vec<(String, ProfileSpec)>),
    Scan(ScanSpec),
}

impl Plan {
    pub fn kind(&self) -> &'static str {
        match self {
            Plan::Simulate(_) => "simulate",
            Plan::Construct(_) => "construct",
            Plan::Scan(_) => "scan",
        }
    }
}

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub plan: fn() -> Plan,
}

const STEADY_L: f64 = 3.0;
const PULSE_L: f64 = 12.0;
const CELLS: usize = 800;
/// Cross-diffusivity of both pulse presets.
pub const PULSE_EPS: f64 = 0.1;

fn ind(lo: f64, hi: f64, mass: f64) -> Segment {
    Segment::with_mass(lo, hi, mass)
}

fn steady_controls() -> StepControls {
    StepControls {
        t_end: 100.0,
        snapshot_interval: 1.0,
        ..StepControls::default()
    }
}

fn run(
    label: &str,
    l: f64,
    model: ModelParams,
    rho: Vec<Segment>,
    eta: Vec<Segment>,
    reference: Option<ProfileSpec>,
    controls: StepControls,
) -> RunConfig {
    let eps = model.epsilon;
    RunConfig {
        label: label.into(),
        grid: GridConfig { half_width: l, cells: CELLS },
        model,
        initial: InitialConfig::Segments { rho, eta },
        reference: reference.map(|r| r.with_default_epsilon(eps)),
        controls,
        output: OutputConfig::default(),
    }
}

fn aa(eps: f64) -> ModelParams {
    ModelParams::attractive_attractive(eps).expect("positive epsilon")
}

fn ar(eps: f64) -> ModelParams {
    ModelParams::attractive_repulsive(eps).expect("positive epsilon")
}

/// rho on the left half and eta on the right half of `[-1/2, 1/2]`.
fn split(m1: f64, m2: f64) -> (Vec<Segment>, Vec<Segment>) {
    (vec![ind(-0.5, 0.0, m1)], vec![ind(0.0, 0.5, m2)])
}

fn batman() -> Plan {
    let (rho, eta) = split(0.6, 0.1);
    Plan::Simulate(vec![run(
        "main",
        STEADY_L,
        aa(0.12),
        rho,
        eta,
        Some(ProfileSpec::Batman {
            m1: 0.6,
            m2: 0.1,
            epsilon: None,
        }),
        steady_controls(),
    )])
}

fn overlap() -> Plan {
    // nested symmetric data keep both centres at the origin
    Plan::Simulate(vec![run(
        "main",
        STEADY_L,
        aa(1.0),
        vec![ind(-0.5, 0.5, 1.0)],
        vec![ind(-1.0, 1.0, 1.0)],
        Some(ProfileSpec::Batman {
            m1: 1.0,
            m2: 1.0,
            epsilon: None,
        }),
        // the approach is algebraic here; 1e-8 would take until t ~ 1000
        StepControls {
            t_end: 200.0,
            steady_tol: 1e-6,
            ..steady_controls()
        },
    )])
}

fn second_kind() -> Plan {
    Plan::Construct(
        [("p_min", Choice::Min), ("p_mid", Choice::Mid), ("p_max", Choice::Max)]
            .into_iter()
            .map(|(l, p)| {
                (
                    l.to_string(),
                    ProfileSpec::SecondKind {
                        p,
                        m1: 0.1,
                        m2: 0.6,
                        epsilon: Some(1.7),
                    },
                )
            })
            .collect(),
    )
}

fn bifurcation() -> Plan {
    Plan::Scan(ScanSpec::Bifurcation {
        m1: 0.1,
        m2: 0.6,
        eps_min: 0.5,
        eps_max: 3.0,
        steps: 51,
    })
}

fn envelopes() -> Plan {
    let eps = 1.7;
    let reference = |p| {
        Some(ProfileSpec::SecondKind {
            p,
            m1: 0.1,
            m2: 0.6,
            epsilon: None,
        })
    };
    Plan::Simulate(vec![
        run(
            "eta_inside",
            STEADY_L,
            aa(eps),
            vec![ind(-1.0, 1.0, 0.1)],
            vec![ind(-0.5, 0.5, 0.6)],
            reference(Choice::Min),
            steady_controls(),
        ),
        run(
            "eta_around",
            STEADY_L,
            aa(eps),
            vec![ind(-0.5, 0.5, 0.1)],
            vec![ind(-1.5, -0.5, 0.3), ind(0.5, 1.5, 0.3)],
            reference(Choice::Max),
            steady_controls(),
        ),
    ])
}

/// Cells for the eps = 3 runs, where the diffusive step bound makes N = 800 too slow.
const ASYM_CELLS: usize = 400;

fn asym() -> Plan {
    let coarse = |mut c: RunConfig| {
        c.grid.cells = ASYM_CELLS;
        c
    };
    Plan::Simulate(vec![
        coarse(run(
            "unequal",
            STEADY_L,
            aa(3.0),
            vec![ind(-1.5, 0.5, 1.0)],
            vec![ind(-0.5, 1.5, 2.0)],
            None,
            steady_controls(),
        )),
        coarse(run(
            "equal",
            STEADY_L,
            aa(3.0),
            vec![ind(-1.5, 0.5, 1.0)],
            vec![ind(-0.5, 1.5, 1.0)],
            None,
            steady_controls(),
        )),
    ])
}

fn asym_family() -> Plan {
    let m2 = 0.1;
    Plan::Simulate(
        [("left_0.75", 0.75), ("left_0.5", 0.5), ("left_0.25", 0.25)]
            .into_iter()
            .map(|(label, q)| {
                run(
                    label,
                    STEADY_L,
                    aa(1.2),
                    vec![ind(-1.0, 1.0, 0.6)],
                    vec![ind(-1.5, -1.0, q * m2), ind(1.0, 1.5, (1.0 - q) * m2)],
                    None,
                    steady_controls(),
                )
            })
            .collect(),
    )
}

fn segregation() -> Plan {
    let ec = critical_epsilon(1.0, 1.0);
    let seg = |eps: f64, big_m2| ProfileSpec::Segregated {
        m1: 1.0,
        m2: 1.0,
        big_m2,
        epsilon: Some(eps),
    };
    Plan::Construct(vec![
        ("half_eps_c_M2_min".into(), seg(0.5 * ec, Choice::Min)),
        ("half_eps_c_M2_0".into(), seg(0.5 * ec, Choice::Value(0.0))),
        ("half_eps_c_M2_max".into(), seg(0.5 * ec, Choice::Max)),
        ("quarter_eps_c_M2_0".into(), seg(0.25 * ec, Choice::Value(0.0))),
        ("eps_c".into(), seg(ec, Choice::Value(0.0))),
    ])
}

/// Labels and cross-diffusivities of the three sweep runs.
pub fn sweep_epsilons() -> [(&'static str, f64); 3] {
    [("eps_0.05", 0.05), ("eps_c", critical_epsilon(1.0, 1.0)), ("eps_0.5", 0.5)]
}

fn eps_sweep() -> Plan {
    Plan::Simulate(
        sweep_epsilons()
            .into_iter()
            .map(|(label, eps)| {
                let reference = (eps <= critical_epsilon(1.0, 1.0)).then_some(ProfileSpec::Segregated {
                    m1: 1.0,
                    m2: 1.0,
                    big_m2: Choice::Value(0.0),
                    epsilon: None,
                });
                run(
                    label,
                    STEADY_L,
                    ar(eps),
                    vec![ind(-0.5, 0.5, 1.0)],
                    vec![ind(-1.5, -0.5, 0.5), ind(0.5, 1.5, 0.5)],
                    reference,
                    steady_controls(),
                )
            })
            .collect(),
    )
}

fn pulse_controls(t_end: f64, interval: f64) -> StepControls {
    StepControls {
        t_end,
        snapshot_interval: interval,
        ..StepControls::default()
    }
}

fn two_pulse() -> Plan {
    Plan::Simulate(vec![run(
        "main",
        PULSE_L,
        ar(PULSE_EPS),
        vec![ind(-10.5, -8.5, 1.0)],
        vec![ind(-7.5, -5.5, 1.0)],
        Some(ProfileSpec::TwoPulse {
            m: 1.0,
            x0: 3.0,
            epsilon: None,
        }),
        pulse_controls(10.0, 0.1),
    )])
}

fn three_pulse() -> Plan {
    Plan::Simulate(vec![run(
        "main",
        PULSE_L,
        ar(PULSE_EPS),
        vec![ind(-7.0, -6.0, 1.0)],
        vec![ind(-8.5, -7.5, 1.0 / 3.0), ind(-5.5, -4.5, 2.0 / 3.0)],
        Some(ProfileSpec::ThreePulse {
            m: 1.0,
            m_l: 1.0 / 3.0,
            m_r: 2.0 / 3.0,
            big_m2: Choice::Mid,
            epsilon: None,
        }),
        pulse_controls(24.0, 0.2),
    )])
}

/// Cross-interaction kernels compared against `|x|`.
pub fn generality_kernels() -> [(&'static str, PotentialSpec); 6] {
    let p = |s: &str| s.parse::<PotentialSpec>().expect("valid potential");
    [
        ("power_0.5", p("power:0.5")),
        ("abs", p("abs")),
        ("power_1.5", p("power:1.5")),
        ("morse_0.5", p("morse:0.5")),
        ("morse_1", p("morse:1")),
        ("morse_1.5", p("morse:1.5")),
    ]
}

fn generality() -> Plan {
    let (rho, eta) = split(0.6, 0.1);
    Plan::Simulate(
        generality_kernels()
            .into_iter()
            .map(|(label, w)| {
                let model = ModelParams::new(0.12, PotentialSpec::quadratic(), w, w, PotentialSpec::quadratic())
                    .expect("valid model");
                run(label, STEADY_L, model, rho.clone(), eta.clone(), None, steady_controls())
            })
            .collect(),
    )
}

static PRESETS: [Preset; 12] = [
    Preset {
        name: "batman_fig4_1",
        summary: "Batman steady state, eps 0.12, m1 0.6, m2 0.1, from split indicator data",
        plan: batman,
    },
    Preset {
        name: "overlap_fig4_2",
        summary: "equal masses, eps 1: complete overlap in a cosine profile",
        plan: overlap,
    },
    Preset {
        name: "second_kind_fig4_3",
        summary: "second-kind profiles at eps 1.7, m1 0.1, m2 0.6, corner fractions p_min, mid, p_max",
        plan: second_kind,
    },
    Preset {
        name: "bifurcation_fig4_4",
        summary: "existence scan of Batman and second-kind profiles over eps in [0.5, 3], m1 0.1, m2 0.6",
        plan: bifurcation,
    },
    Preset {
        name: "envelopes_fig4_5",
        summary: "eps 1.7, m1 0.1, m2 0.6 from eta inside rho and eta around rho, against p_min and p_max",
        plan: envelopes,
    },
    Preset {
        name: "asym_fig4_6",
        summary: "asymmetric steady states at eps 3 for masses (1, 2) and (1, 1), N = 400; reconstructed initial data, qualitative",
        plan: asym,
    },
    Preset {
        name: "asym_family_fig4_7",
        summary: "asymmetric family at eps 1.2, m1 0.6, m2 0.1, left corner mass decreasing; reconstructed initial data, qualitative",
        plan: asym_family,
    },
    Preset {
        name: "segregation_fig4_8",
        summary: "segregated attractive-repulsive states for m1 = m2 = 1 across the M2 range and at eps_c",
        plan: segregation,
    },
    Preset {
        name: "eps_sweep_fig4_9",
        summary: "attractive-repulsive steady states at eps 0.05, eps_c and 0.5 from the same data",
        plan: eps_sweep,
    },
    Preset {
        name: "two_pulse_fig4_10",
        summary: "two travelling pulses, m = 1 each, x0 = 3, eps 0.1 (eps reconstructed)",
        plan: two_pulse,
    },
    Preset {
        name: "three_pulse_fig4_11",
        summary: "three travelling pulses, m 1, mL 1/3, mR 2/3, eps 0.1 (eps reconstructed)",
        plan: three_pulse,
    },
    Preset {
        name: "generality_fig5_1",
        summary: "Batman setting with power-law and Morse-like cross-interactions; qualitative",
        plan: generality,
    },
];

pub fn all() -> &'static [Preset] {
    &PRESETS
}

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_well_formed() {
        for p in all() {
            match (p.plan)() {
                Plan::Simulate(runs) => {
                    assert!(!runs.is_empty());
                    let mut labels: Vec<&str> = runs.iter().map(|r| r.label.as_str()).collect();
                    labels.sort();
                    labels.dedup();
                    assert_eq!(labels.len(), runs.len(), "{}", p.name);
                    for r in &runs {
                        let want = if p.name == "asym_fig4_6" { ASYM_CELLS } else { CELLS };
                        assert_eq!(r.grid.cells, want, "{}", p.name);
                        let s = r.initial_state().unwrap();
                        // supports start at least ten cells from the walls
                        let g = r.grid();
                        for f in [&s.rho, &s.eta] {
                            let (lo, hi) = f.nonzero_span().unwrap();
                            assert!(lo >= 10 && hi + 10 <= g.len(), "{} {}", p.name, r.label);
                        }
                        if let Some(b) = r.reference().unwrap() {
                            let (m1, m2) = b.profile.masses();
                            let d = crossdiff_core::diagnostics::total_mass;
                            assert!((d(&s.rho, &g) - m1).abs() < 1e-9, "{}", p.name);
                            assert!((d(&s.eta, &g) - m2).abs() < 1e-9, "{}", p.name);
                        }
                    }
                }
                Plan::Construct(list) => {
                    for (label, spec) in list {
                        spec.build().unwrap_or_else(|e| panic!("{} {label}: {e}", p.name));
                    }
                }
                Plan::Scan(_) => {}
            }
        }
    }

    #[test]
    fn names_are_unique() {
        let mut n: Vec<&str> = all().iter().map(|p| p.name).collect();
        n.sort();
        n.dedup();
        assert_eq!(n.len(), 12);
        assert!(find("batman_fig4_1").is_some());
        assert!(find("batman").is_none());
    }
}
