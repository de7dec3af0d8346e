use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::grid::Grid1D;
use super::vec3::Vec3;
use crate::error::{Error, Result};

/// A scalar material coefficient as a function of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    Profile(Profile),
}

/// `mean + amp * sin(wavenumber * x)` or the cosine analogue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Sine { mean: f64, amp: f64, wavenumber: f64 },
    Cosine { mean: f64, amp: f64, wavenumber: f64 },
}

impl Coefficient {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Coefficient::Constant(c) => c,
            Coefficient::Profile(Profile::Sine {
                mean,
                amp,
                wavenumber,
            }) => mean + amp * (wavenumber * x).sin(),
            Coefficient::Profile(Profile::Cosine {
                mean,
                amp,
                wavenumber,
            }) => mean + amp * (wavenumber * x).cos(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Coefficient::Constant(_) => 0.0,
            Coefficient::Profile(Profile::Sine {
                amp, wavenumber, ..
            }) => amp * wavenumber * (wavenumber * x).cos(),
            Coefficient::Profile(Profile::Cosine {
                amp, wavenumber, ..
            }) => -amp * wavenumber * (wavenumber * x).sin(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            Coefficient::Constant(_) => true,
            Coefficient::Profile(Profile::Sine { amp, wavenumber, .. })
            | Coefficient::Profile(Profile::Cosine { amp, wavenumber, .. }) => {
                amp == 0.0 || wavenumber == 0.0
            }
        }
    }

    /// Lower bound of the coefficient over all `x`.
    pub fn min_value(&self) -> f64 {
        match *self {
            Coefficient::Constant(c) => c,
            Coefficient::Profile(Profile::Sine { mean, amp, .. })
            | Coefficient::Profile(Profile::Cosine { mean, amp, .. }) => mean - amp.abs(),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Coefficient::Constant(c) => write!(f, "{c}"),
            Coefficient::Profile(Profile::Sine {
                mean,
                amp,
                wavenumber,
            }) => write!(f, "{mean}{amp:+}*sin({wavenumber}x)"),
            Coefficient::Profile(Profile::Cosine {
                mean,
                amp,
                wavenumber,
            }) => write!(f, "{mean}{amp:+}*cos({wavenumber}x)"),
        }
    }
}

fn coefficient_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^(?P<mean>[-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)(?:(?P<sign>[-+])(?P<amp>[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)?\*?(?P<fun>sin|cos)\((?P<k>[0-9]*\.?[0-9]+)?\*?x\))?$",
        )
        .expect("valid regex")
    })
}

impl FromStr for Coefficient {
    type Err = Error;

    /// Accepts `2`, `2+sin(x)`, `1.5-0.25*cos(2x)` and similar.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let caps = coefficient_regex()
            .captures(&compact)
            .ok_or_else(|| Error::Argument(format!("cannot parse coefficient `{s}`")))?;
        let num = |name: &str, default: f64| -> Result<f64> {
            match caps.name(name) {
                Some(m) => m
                    .as_str()
                    .parse::<f64>()
                    .map_err(|e| Error::Argument(format!("bad number in `{s}`: {e}"))),
                None => Ok(default),
            }
        };
        let mean = num("mean", 0.0)?;
        let Some(fun) = caps.name("fun") else {
            return Ok(Coefficient::Constant(mean));
        };
        let mut amp = num("amp", 1.0)?;
        if caps.name("sign").map(|m| m.as_str()) == Some("-") {
            amp = -amp;
        }
        let wavenumber = num("k", 1.0)?;
        let profile = if fun.as_str() == "sin" {
            Profile::Sine {
                mean,
                amp,
                wavenumber,
            }
        } else {
            Profile::Cosine {
                mean,
                amp,
                wavenumber,
            }
        };
        Ok(Coefficient::Profile(profile))
    }
}

/// Permittivity and permeability as functions of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSpec {
    pub eps: Coefficient,
    pub mu: Coefficient,
}

impl Default for MediumSpec {
    fn default() -> Self {
        MediumSpec::vacuum()
    }
}

impl MediumSpec {
    pub fn vacuum() -> Self {
        MediumSpec::constant(1.0, 1.0)
    }

    pub fn constant(eps: f64, mu: f64) -> Self {
        MediumSpec {
            eps: Coefficient::Constant(eps),
            mu: Coefficient::Constant(mu),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.min_value() > 0.0) {
            return Err(Error::Domain(format!("eps = {} is not strictly positive", self.eps)));
        }
        if !(self.mu.min_value() > 0.0) {
            return Err(Error::Domain(format!("mu = {} is not strictly positive", self.mu)));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.eps.is_constant() && self.mu.is_constant()
    }

    /// `(eps, mu)` when both are constant.
    pub fn constants(&self) -> Option<(f64, f64)> {
        self.is_constant()
            .then(|| (self.eps.value(0.0), self.mu.value(0.0)))
    }

    pub fn sample(&self, grid: &Grid1D) -> Result<MediumProfile> {
        self.validate()?;
        let eps = (0..grid.nx()).map(|i| self.eps.value(grid.mid_x(i))).collect();
        let mu = (0..grid.nx()).map(|i| self.mu.value(grid.mid_x(i))).collect();
        MediumProfile::new(eps, mu)
    }
}

impl fmt::Display for MediumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "eps={};mu={}", self.eps, self.mu)
    }
}

impl FromStr for MediumSpec {
    type Err = Error;

    /// `vacuum`, or `eps=<coef>;mu=<coef>` with either part optional
    /// (missing parts default to 1).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("vacuum") {
            return Ok(MediumSpec::vacuum());
        }
        let mut spec = MediumSpec::vacuum();
        for part in s.split([';', ',']).filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("medium part `{part}` lacks `=`")))?;
            let coef: Coefficient = value.parse()?;
            match key.trim() {
                "eps" => spec.eps = coef,
                "mu" => spec.mu = coef,
                other => {
                    return Err(Error::Argument(format!(
                        "unknown medium key `{other}` (expected eps or mu)"
                    )))
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// `eps_{i+1/2}` and `mu_{i+1/2}` at the cell midpoints of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumProfile {
    eps: Vec<f64>,
    mu: Vec<f64>,
}

impl MediumProfile {
    pub fn new(eps: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if eps.len() != mu.len() {
            return Err(Error::Dimension(format!(
                "eps has {} samples but mu has {}",
                eps.len(),
                mu.len()
            )));
        }
        if let Some(bad) = eps.iter().chain(&mu).find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!(
                "medium samples must be finite and strictly positive, found {bad}"
            )));
        }
        Ok(MediumProfile { eps, mu })
    }

    pub fn constant(eps: f64, mu: f64, nx: usize) -> Result<Self> {
        MediumProfile::new(vec![eps; nx], vec![mu; nx])
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        if self.len() != grid.nx() {
            return Err(Error::Dimension(format!(
                "medium has {} cells, grid has {}",
                self.len(),
                grid.nx()
            )));
        }
        Ok(())
    }

    pub fn is_spatially_constant(&self) -> bool {
        let same = |v: &[f64]| v.iter().all(|x| *x == v[0]);
        self.is_empty() || (same(&self.eps) && same(&self.mu))
    }

    /// Node value as the mean of the adjacent midpoint samples. End nodes
    /// use their single neighbour unless the grid wraps.
    pub fn node_values(&self, i: usize, periodic: bool) -> (f64, f64) {
        let n = self.len();
        let left = if i > 0 {
            Some(i - 1)
        } else if periodic {
            Some(n - 1)
        } else {
            None
        };
        let right = if i < n {
            Some(i)
        } else if periodic {
            Some(0)
        } else {
            None
        };
        match (left, right) {
            (Some(l), Some(r)) => (
                0.5 * (self.eps[l] + self.eps[r]),
                0.5 * (self.mu[l] + self.mu[r]),
            ),
            (Some(k), None) | (None, Some(k)) => (self.eps[k], self.mu[k]),
            (None, None) => unreachable!("medium profile has at least one cell"),
        }
    }
}

type SourceFn = Arc<dyn Fn(f64, f64) -> Vec3 + Send + Sync>;

/// External current densities `J(x, t)` (electric) and `K(x, t)` (magnetic).
#[derive(Clone)]
pub struct SourceProfile {
    j: Option<SourceFn>,
    k: Option<SourceFn>,
}

impl fmt::Debug for SourceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceProfile")
            .field("j", &self.j.as_ref().map(|_| "fn"))
            .field("k", &self.k.as_ref().map(|_| "fn"))
            .finish()
    }
}

impl Default for SourceProfile {
    fn default() -> Self {
        SourceProfile::zero()
    }
}

impl SourceProfile {
    pub fn zero() -> Self {
        SourceProfile { j: None, k: None }
    }

    pub fn new(
        j: impl Fn(f64, f64) -> Vec3 + Send + Sync + 'static,
        k: impl Fn(f64, f64) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        SourceProfile {
            j: Some(Arc::new(j)),
            k: Some(Arc::new(k)),
        }
    }

    pub fn electric(j: impl Fn(f64, f64) -> Vec3 + Send + Sync + 'static) -> Self {
        SourceProfile {
            j: Some(Arc::new(j)),
            k: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.j.is_none() && self.k.is_none()
    }

    pub fn j(&self, x: f64, t: f64) -> Vec3 {
        self.j.as_ref().map_or(Vec3::ZERO, |f| f(x, t))
    }

    pub fn k(&self, x: f64, t: f64) -> Vec3 {
        self.k.as_ref().map_or(Vec3::ZERO, |f| f(x, t))
    }
}

/// Named source profiles accepted in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    #[default]
    Zero,
    /// `J_3 = amplitude * exp(-((x - center)/width)^2) * sin(frequency * t)`.
    GaussianPulse {
        amplitude: f64,
        center: f64,
        width: f64,
        frequency: f64,
    },
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if let SourceSpec::GaussianPulse { width, .. } = self {
            if !(*width > 0.0) {
                return Err(Error::Validation("source width must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SourceSpec::Zero)
    }

    pub fn profile(&self) -> SourceProfile {
        match *self {
            SourceSpec::Zero => SourceProfile::zero(),
            SourceSpec::GaussianPulse {
                amplitude,
                center,
                width,
                frequency,
            } => SourceProfile::electric(move |x, t| {
                let r = (x - center) / width;
                Vec3::new(0.0, 0.0, amplitude * (-r * r).exp() * (frequency * t).sin())
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_constant_and_profiles() {
        assert_eq!("2".parse::<Coefficient>().unwrap(), Coefficient::Constant(2.0));
        assert_eq!(
            "2+sin(x)".parse::<Coefficient>().unwrap(),
            Coefficient::Profile(Profile::Sine {
                mean: 2.0,
                amp: 1.0,
                wavenumber: 1.0
            })
        );
        assert_eq!(
            "1.5 - 0.25*cos(2x)".parse::<Coefficient>().unwrap(),
            Coefficient::Profile(Profile::Cosine {
                mean: 1.5,
                amp: -0.25,
                wavenumber: 2.0
            })
        );
        assert!("2+tan(x)".parse::<Coefficient>().is_err());
    }

    #[test]
    fn medium_spec_round_trips_through_display() {
        let spec: MediumSpec = "eps=2+sin(x);mu=1".parse().unwrap();
        let again: MediumSpec = spec.to_string().parse().unwrap();
        assert_eq!(spec, again);
        assert_eq!("vacuum".parse::<MediumSpec>().unwrap(), MediumSpec::vacuum());
    }

    #[test]
    fn rejects_nonpositive_medium() {
        assert!("eps=0.5+sin(x)".parse::<MediumSpec>().is_err());
        assert!(MediumProfile::new(vec![1.0, -1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn coefficient_json_forms() {
        let c: Coefficient = serde_json::from_str("1.5").unwrap();
        assert_eq!(c, Coefficient::Constant(1.5));
        let c: Coefficient =
            serde_json::from_str(r#"{"kind":"cosine","mean":2,"amp":1,"wavenumber":1}"#).unwrap();
        assert!((c.value(0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn node_values_average_neighbouring_cells() {
        let m = MediumProfile::new(vec![1.0, 3.0, 5.0], vec![2.0, 2.0, 4.0]).unwrap();
        assert_eq!(m.node_values(1, false), (2.0, 2.0));
        assert_eq!(m.node_values(0, false), (1.0, 2.0));
        assert_eq!(m.node_values(3, false), (5.0, 4.0));
        assert_eq!(m.node_values(0, true), (3.0, 3.0));
    }
}
