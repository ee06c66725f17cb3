//! Named analytic profiles with their parameters, as used by configs and `construct`.

use crossdiff_core::analytic::{
    envelope_range, max_m2, segregated_state, solve_batman, solve_second_kind, three_pulse, three_pulse_m2_range,
    two_pulse, Profile, ProfileDocument, SharedProfile,
};
use crossdiff_core::Result as CoreResult;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// A parameter that is either a number or an end of its admissible range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Choice {
    Value(f64),
    Min,
    Max,
    Mid,
}

impl Choice {
    fn pick(self, lo: f64, hi: f64) -> f64 {
        match self {
            Choice::Value(v) => v,
            Choice::Min => lo,
            Choice::Max => hi,
            Choice::Mid => 0.5 * (lo + hi),
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Value(v) => write!(f, "{v}"),
            Choice::Min => f.write_str("min"),
            Choice::Max => f.write_str("max"),
            Choice::Mid => f.write_str("mid"),
        }
    }
}

impl FromStr for Choice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "min" => Ok(Choice::Min),
            "max" => Ok(Choice::Max),
            "mid" => Ok(Choice::Mid),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Choice::Value)
                .ok_or_else(|| format!("expected a number or one of min, max, mid; got `{t}`")),
        }
    }
}

impl From<Choice> for String {
    fn from(c: Choice) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Choice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Family and parameters of a closed-form profile.
///
/// `epsilon: None` means "take the model's value".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileSpec {
    Batman {
        m1: f64,
        m2: f64,
        epsilon: Option<f64>,
    },
    SecondKind {
        p: Choice,
        m1: f64,
        m2: f64,
        epsilon: Option<f64>,
    },
    Segregated {
        m1: f64,
        m2: f64,
        #[serde(rename = "M2")]
        big_m2: Choice,
        epsilon: Option<f64>,
    },
    TwoPulse {
        m: f64,
        x0: f64,
        epsilon: Option<f64>,
    },
    ThreePulse {
        m: f64,
        m_l: f64,
        m_r: f64,
        #[serde(rename = "M2")]
        big_m2: Choice,
        epsilon: Option<f64>,
    },
}

pub const FAMILIES: [&str; 5] = ["batman", "second_kind", "segregated", "two_pulse", "three_pulse"];

fn keys_of(family: &str) -> Option<&'static [&'static str]> {
    Some(match family {
        "batman" => &["m1", "m2", "epsilon"],
        "second_kind" => &["p", "m1", "m2", "epsilon"],
        "segregated" => &["m1", "m2", "M2", "epsilon"],
        "two_pulse" => &["m", "x0", "epsilon"],
        "three_pulse" => &["m", "m_l", "m_r", "M2", "epsilon"],
        _ => return None,
    })
}

/// A constructed profile together with its summary document.
pub struct Built {
    pub profile: SharedProfile,
    pub document: ProfileDocument,
}

impl ProfileSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ProfileSpec::Batman { .. } => "batman",
            ProfileSpec::SecondKind { .. } => "second_kind",
            ProfileSpec::Segregated { .. } => "segregated",
            ProfileSpec::TwoPulse { .. } => "two_pulse",
            ProfileSpec::ThreePulse { .. } => "three_pulse",
        }
    }

    /// Builds a spec from `key -> text` pairs; every problem is returned as `(key, message)`.
    pub fn from_pairs(family: &str, pairs: &BTreeMap<String, String>) -> Result<Self, Vec<(String, String)>> {
        let Some(allowed) = keys_of(family) else {
            return Err(vec![(
                "family".into(),
                format!("unknown profile family `{family}` (expected one of {})", FAMILIES.join(", ")),
            )]);
        };
        let mut issues = Vec::new();
        for k in pairs.keys() {
            if !allowed.contains(&k.as_str()) {
                issues.push((k.clone(), format!("not a parameter of `{family}` (expected {})", allowed.join(", "))));
            }
        }
        let mut num = |k: &str, required: bool| -> Option<f64> {
            match pairs.get(k) {
                None => {
                    if required {
                        issues.push((k.to_string(), format!("required by `{family}`")));
                    }
                    None
                }
                Some(t) => match t.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        issues.push((k.to_string(), format!("expected a number, got `{t}`")));
                        None
                    }
                },
            }
        };
        let spec = match family {
            "batman" => {
                let (m1, m2, e) = (num("m1", true), num("m2", true), num("epsilon", false));
                m1.zip(m2).map(|(m1, m2)| ProfileSpec::Batman { m1, m2, epsilon: e })
            }
            "second_kind" => {
                let (m1, m2, e) = (num("m1", true), num("m2", true), num("epsilon", false));
                let p = choice(pairs, "p", &mut issues);
                m1.zip(m2).zip(p).map(|((m1, m2), p)| ProfileSpec::SecondKind { p, m1, m2, epsilon: e })
            }
            "segregated" => {
                let (m1, m2, e) = (num("m1", true), num("m2", true), num("epsilon", false));
                let big = choice(pairs, "M2", &mut issues);
                m1.zip(m2).zip(big).map(|((m1, m2), big_m2)| ProfileSpec::Segregated {
                    m1,
                    m2,
                    big_m2,
                    epsilon: e,
                })
            }
            "two_pulse" => {
                let (m, x0, e) = (num("m", true), num("x0", true), num("epsilon", false));
                m.zip(x0).map(|(m, x0)| ProfileSpec::TwoPulse { m, x0, epsilon: e })
            }
            _ => {
                let (m, ml, mr, e) = (num("m", true), num("m_l", true), num("m_r", true), num("epsilon", false));
                let big = choice(pairs, "M2", &mut issues);
                m.zip(ml).zip(mr).zip(big).map(|(((m, m_l), m_r), big_m2)| ProfileSpec::ThreePulse {
                    m,
                    m_l,
                    m_r,
                    big_m2,
                    epsilon: e,
                })
            }
        };
        match spec {
            Some(s) if issues.is_empty() => Ok(s),
            _ => Err(issues),
        }
    }

    /// The parameters as `key -> text`, the inverse of [`ProfileSpec::from_pairs`].
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        let eps = match self {
            ProfileSpec::Batman { m1, m2, epsilon } => {
                put("m1", m1.to_string());
                put("m2", m2.to_string());
                epsilon
            }
            ProfileSpec::SecondKind { p, m1, m2, epsilon } => {
                put("p", p.to_string());
                put("m1", m1.to_string());
                put("m2", m2.to_string());
                epsilon
            }
            ProfileSpec::Segregated { m1, m2, big_m2, epsilon } => {
                put("m1", m1.to_string());
                put("m2", m2.to_string());
                put("M2", big_m2.to_string());
                epsilon
            }
            ProfileSpec::TwoPulse { m, x0, epsilon } => {
                put("m", m.to_string());
                put("x0", x0.to_string());
                epsilon
            }
            ProfileSpec::ThreePulse {
                m,
                m_l,
                m_r,
                big_m2,
                epsilon,
            } => {
                put("m", m.to_string());
                put("m_l", m_l.to_string());
                put("m_r", m_r.to_string());
                put("M2", big_m2.to_string());
                epsilon
            }
        };
        if let Some(e) = eps {
            put("epsilon", e.to_string());
        }
        m
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            ProfileSpec::Batman { epsilon, .. }
            | ProfileSpec::SecondKind { epsilon, .. }
            | ProfileSpec::Segregated { epsilon, .. }
            | ProfileSpec::TwoPulse { epsilon, .. }
            | ProfileSpec::ThreePulse { epsilon, .. } => *epsilon,
        }
    }

    /// Same spec with `epsilon` filled in where it was left to the model.
    pub fn with_default_epsilon(&self, eps: f64) -> Self {
        let mut s = self.clone();
        match &mut s {
            ProfileSpec::Batman { epsilon, .. }
            | ProfileSpec::SecondKind { epsilon, .. }
            | ProfileSpec::Segregated { epsilon, .. }
            | ProfileSpec::TwoPulse { epsilon, .. }
            | ProfileSpec::ThreePulse { epsilon, .. } => {
                epsilon.get_or_insert(eps);
            }
        }
        s
    }

    /// Solves for the profile; `epsilon` must be known by now.
    pub fn build(&self) -> CoreResult<Built> {
        let eps = self
            .epsilon()
            .ok_or_else(|| crossdiff_core::Error::InvalidArgument("profile epsilon is not set".into()))?;
        let profile: SharedProfile = match *self {
            ProfileSpec::Batman { m1, m2, .. } => Arc::new(solve_batman(m1, m2, eps)?),
            ProfileSpec::SecondKind { p, m1, m2, .. } => match p {
                Choice::Value(p) => Arc::new(solve_second_kind(p, m1, m2, eps)?),
                Choice::Min => Arc::new(envelope_range(m1, m2, eps)?.lower),
                Choice::Max => Arc::new(envelope_range(m1, m2, eps)?.upper),
                Choice::Mid => {
                    let env = envelope_range(m1, m2, eps)?;
                    Arc::new(solve_second_kind(0.5 * (env.p_min + env.p_max), m1, m2, eps)?)
                }
            },
            ProfileSpec::Segregated { m1, m2, big_m2, .. } => {
                let cap = max_m2(m1, m2, eps).m2_max;
                Arc::new(segregated_state(m1, m2, big_m2.pick(-cap, cap), eps)?)
            }
            ProfileSpec::TwoPulse { m, x0, .. } => Arc::new(two_pulse(m, eps, x0)?),
            ProfileSpec::ThreePulse {
                m, m_l, m_r, big_m2, ..
            } => {
                let big = match big_m2 {
                    Choice::Value(v) => v,
                    c => {
                        let r = three_pulse_m2_range(m, m_l, m_r, eps)?;
                        c.pick(r.m2_min, r.m2_max)
                    }
                };
                Arc::new(three_pulse(m, m_l, m_r, big, eps)?)
            }
        };
        let document = profile.document();
        Ok(Built { profile, document })
    }
}

fn choice(pairs: &BTreeMap<String, String>, key: &str, issues: &mut Vec<(String, String)>) -> Option<Choice> {
    match pairs.get(key) {
        None => {
            issues.push((key.to_string(), "required".to_string()));
            None
        }
        Some(t) => match t.parse::<Choice>() {
            Ok(c) => Some(c),
            Err(e) => {
                issues.push((key.to_string(), e));
                None
            }
        },
    }
}

/// Densities of `profile` at the centres `xs` after time `t`.
pub fn sample(profile: &dyn Profile, xs: &[f64], t: f64) -> Vec<(f64, f64)> {
    xs.iter().map(|&x| profile.eval_at(x, t)).collect()
}
