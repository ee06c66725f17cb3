//! Interaction potentials, their sampled difference tables and the model parameters.

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Shape of an even interaction kernel `W(x)`, evaluated on `|x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "snake_case")]
pub enum PotentialFamily {
    /// `x^2 / 2`
    Quadratic,
    /// `|x|^p`
    PowerLaw(f64),
    /// `|x|^p / p`
    PowerLawNormalized(f64),
    /// `|x|`
    Abs,
    /// `1 - exp(-|x|^p)`
    MorseLike(f64),
}

impl PotentialFamily {
    fn exponent(&self) -> Option<f64> {
        match *self {
            PotentialFamily::PowerLaw(p)
            | PotentialFamily::PowerLawNormalized(p)
            | PotentialFamily::MorseLike(p) => Some(p),
            _ => None,
        }
    }

    fn eval_abs(&self, r: f64) -> f64 {
        match *self {
            PotentialFamily::Quadratic => 0.5 * r * r,
            PotentialFamily::PowerLaw(p) => r.powf(p),
            PotentialFamily::PowerLawNormalized(p) => r.powf(p) / p,
            PotentialFamily::Abs => r,
            PotentialFamily::MorseLike(p) => -(-r.powf(p)).exp_m1(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: PotentialFamily,
    /// `+1` attractive, `-1` repulsive.
    pub sign: f64,
}

impl PotentialSpec {
    pub fn new(family: PotentialFamily, sign: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(invalid(format!("potential sign must be +1 or -1, got {sign}")));
        }
        if let Some(p) = family.exponent() {
            if !(p.is_finite() && p > 0.0) {
                return Err(invalid(format!("potential exponent must be positive, got {p}")));
            }
        }
        Ok(Self { family, sign })
    }

    pub const fn quadratic() -> Self {
        Self {
            family: PotentialFamily::Quadratic,
            sign: 1.0,
        }
    }

    pub const fn abs() -> Self {
        Self {
            family: PotentialFamily::Abs,
            sign: 1.0,
        }
    }

    pub const fn neg_abs() -> Self {
        Self {
            family: PotentialFamily::Abs,
            sign: -1.0,
        }
    }

    pub fn negated(self) -> Self {
        Self {
            sign: -self.sign,
            ..self
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sign * self.family.eval_abs(x.abs())
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign < 0.0 {
            f.write_str("-")?;
        }
        match self.family {
            PotentialFamily::Quadratic => f.write_str("quadratic"),
            PotentialFamily::Abs => f.write_str("abs"),
            PotentialFamily::PowerLaw(p) => write!(f, "power:{p}"),
            PotentialFamily::PowerLawNormalized(p) => write!(f, "power_norm:{p}"),
            PotentialFamily::MorseLike(p) => write!(f, "morse:{p}"),
        }
    }
}

/// Parses `quadratic`, `abs`, `power:P`, `power_norm:P`, `morse:P`, each optionally prefixed by `-`.
impl FromStr for PotentialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest.trim()),
            None => (1.0, s.strip_prefix('+').unwrap_or(s).trim()),
        };
        let (name, arg) = match body.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (body, None),
        };
        let exponent = |arg: Option<&str>| -> Result<f64> {
            let a = arg.ok_or_else(|| invalid(format!("potential `{name}` needs an exponent, e.g. `{name}:1.5`")))?;
            a.parse::<f64>()
                .map_err(|_| invalid(format!("bad potential exponent `{a}`")))
        };
        let family = match name {
            "quadratic" => PotentialFamily::Quadratic,
            "abs" => PotentialFamily::Abs,
            "power" => PotentialFamily::PowerLaw(exponent(arg)?),
            "power_norm" => PotentialFamily::PowerLawNormalized(exponent(arg)?),
            "morse" => PotentialFamily::MorseLike(exponent(arg)?),
            other => return Err(invalid(format!("unknown potential family `{other}`"))),
        };
        if arg.is_some() && family.exponent().is_none() {
            return Err(invalid(format!("potential `{name}` takes no exponent")));
        }
        PotentialSpec::new(family, sign)
    }
}

/// `W(x_l - x_k)` for every offset `l - k` in `[-(N-1), N-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    samples: Vec<f64>,
    cells: usize,
    closed: Option<(ClosedForm, f64)>,
}

/// Kernels whose neighbouring-cell differences reduce to running sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ClosedForm {
    Quadratic,
    Abs,
}

impl KernelTable {
    pub fn build(spec: &PotentialSpec, grid: &Grid) -> Self {
        let n = grid.len();
        let dx = grid.dx();
        // Evaluate each non-negative offset once and mirror it so evenness is exact.
        let half: Vec<f64> = (0..n).map(|d| spec.eval(d as f64 * dx)).collect();
        let mut samples = Vec::with_capacity(2 * n - 1);
        samples.extend(half.iter().skip(1).rev());
        samples.extend(half.iter());
        let closed = match spec.family {
            PotentialFamily::Quadratic => Some((ClosedForm::Quadratic, spec.sign)),
            PotentialFamily::Abs => Some((ClosedForm::Abs, spec.sign)),
            _ => None,
        };
        Self { samples, cells: n, closed }
    }

    /// Family and sign when the kernel has a closed-form difference.
    pub(crate) fn closed_form(&self) -> Option<(ClosedForm, f64)> {
        self.closed
    }

    #[cfg(test)]
    pub(crate) fn tabulated_only(mut self) -> Self {
        self.closed = None;
        self
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Raw storage; offset `d` lives at index `d + N - 1`.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn at(&self, offset: isize) -> f64 {
        self.samples[(offset + self.cells as isize - 1) as usize]
    }

    /// `W(x_i - x_k)` for `k = 0..N`, as one contiguous slice.
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        // W(x_i - x_k) = W(x_k - x_i) = samples[k - i + N - 1]
        let start = self.cells - 1 - i;
        &self.samples[start..start + self.cells]
    }
}

/// Cross-diffusivity and the four interaction potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub epsilon: f64,
    pub w11: PotentialSpec,
    pub w12: PotentialSpec,
    pub w21: PotentialSpec,
    pub w22: PotentialSpec,
}

impl ModelParams {
    pub fn new(
        epsilon: f64,
        w11: PotentialSpec,
        w12: PotentialSpec,
        w21: PotentialSpec,
        w22: PotentialSpec,
    ) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self {
            epsilon,
            w11,
            w12,
            w21,
            w22,
        })
    }

    /// Quadratic self-interaction, `W12 = W21 = |x|`.
    pub fn attractive_attractive(epsilon: f64) -> Result<Self> {
        Self::new(
            epsilon,
            PotentialSpec::quadratic(),
            PotentialSpec::abs(),
            PotentialSpec::abs(),
            PotentialSpec::quadratic(),
        )
    }

    /// Quadratic self-interaction, `W12 = |x| = -W21`.
    pub fn attractive_repulsive(epsilon: f64) -> Result<Self> {
        Self::new(
            epsilon,
            PotentialSpec::quadratic(),
            PotentialSpec::abs(),
            PotentialSpec::neg_abs(),
            PotentialSpec::quadratic(),
        )
    }
}

/// The four kernel tables of a model on one grid.
#[derive(Debug, Clone)]
pub struct Kernels {
    pub w11: KernelTable,
    pub w12: KernelTable,
    pub w21: KernelTable,
    pub w22: KernelTable,
}

impl Kernels {
    pub fn build(params: &ModelParams, grid: &Grid) -> Self {
        Self {
            w11: KernelTable::build(&params.w11, grid),
            w12: KernelTable::build(&params.w12, grid),
            w21: KernelTable::build(&params.w21, grid),
            w22: KernelTable::build(&params.w22, grid),
        }
    }

    pub fn cells(&self) -> usize {
        self.w11.cells()
    }
}
