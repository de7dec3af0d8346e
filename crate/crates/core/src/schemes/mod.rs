//! Time integrators: the six-field box scheme, the nine-point scheme obtained
//! from it by eliminating the potentials, the two-field box scheme, and the
//! banded solver behind every implicit step.

mod banded;
mod boxes;
pub(crate) mod midpoint;
mod nine_point;
mod preissman;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use banded::{banded_lu_solve, BandedBlockMatrix};
pub use midpoint::{midpoint_step_2field, two_field_residual, TwoFieldStepper, TWO_FIELD_DIM};
pub use nine_point::{
    assemble_system, nine_point_residual, nine_point_step, NinePointStepper, SystemMatrices,
};
pub use preissman::{gauge_shift, preissman_residual, preissman_step, PreissmanStepper};

use crate::em_core::{
    exact_extended, exact_plane_wave, ExtendedState, FieldPoint, Grid1D, MediumProfile,
    SourceProfile, Vec3,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    NinePoint,
    Preissman,
    #[serde(rename = "midpoint_2field")]
    Midpoint2Field,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::NinePoint => "nine_point",
            SchemeKind::Preissman => "preissman",
            SchemeKind::Midpoint2Field => "midpoint_2field",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nine_point" => Ok(SchemeKind::NinePoint),
            "preissman" => Ok(SchemeKind::Preissman),
            "midpoint_2field" => Ok(SchemeKind::Midpoint2Field),
            other => Err(Error::Argument(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Choice of the free additive constants in the potentials `V`, `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// The zero-mean antiderivatives of the exact solution.
    Analytic,
    /// `V = U = 0` at `t = 0`, hence `P = mu H`, `Q = eps E` there.
    #[default]
    ZeroAtStart,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    /// The last node duplicates the first; needs an odd cell count.
    Periodic,
    /// End values from the plane-wave solution at every new level.
    DirichletExact { eps: f64, mu: f64, gauge: Gauge },
    /// End values indexed by time level, `left[j]` and `right[j]`. Two-field
    /// and nine-point schemes read only the `(H, E)` part.
    DirichletFixed {
        left: Vec<ExtendedState>,
        right: Vec<ExtendedState>,
    },
}

impl BoundaryCondition {
    pub fn is_periodic(&self) -> bool {
        matches!(self, BoundaryCondition::Periodic)
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        match self {
            BoundaryCondition::Periodic => {
                if grid.nx() < 3 || grid.nx().is_multiple_of(2) {
                    return Err(Error::Validation(format!(
                        "periodic grids need an odd cell count >= 3 (nx = {}); \
                         the midpoint average annihilates the sawtooth mode otherwise",
                        grid.nx()
                    )));
                }
            }
            BoundaryCondition::DirichletExact { eps, mu, .. } => {
                if !(*eps > 0.0 && *mu > 0.0 && eps.is_finite() && mu.is_finite()) {
                    return Err(Error::Domain(format!(
                        "exact boundary data needs positive eps, mu (got {eps}, {mu})"
                    )));
                }
            }
            BoundaryCondition::DirichletFixed { left, right } => {
                if left.len() != right.len() {
                    return Err(Error::Argument(
                        "left and right boundary series differ in length".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Zero data of the same kind, used for tangent (homogeneous) runs.
    pub fn homogeneous(&self, levels: usize) -> BoundaryCondition {
        match self {
            BoundaryCondition::Periodic => BoundaryCondition::Periodic,
            _ => BoundaryCondition::DirichletFixed {
                left: vec![ExtendedState::ZERO; levels],
                right: vec![ExtendedState::ZERO; levels],
            },
        }
    }

    /// Full boundary state at node `x`, time `t`, level `level`.
    pub fn extended_value(&self, right: bool, x: f64, t: f64, level: i64) -> Result<ExtendedState> {
        match self {
            BoundaryCondition::Periodic => Err(Error::Argument(
                "periodic grids carry no boundary data".into(),
            )),
            BoundaryCondition::DirichletExact { eps, mu, gauge } => {
                exact_in_gauge(x, t, *eps, *mu, *gauge)
            }
            BoundaryCondition::DirichletFixed { left, right: r } => {
                let series = if right { r } else { left };
                usize::try_from(level)
                    .ok()
                    .and_then(|j| series.get(j))
                    .copied()
                    .ok_or_else(|| {
                        Error::Argument(format!(
                            "boundary data has {} levels, level {level} requested",
                            series.len()
                        ))
                    })
            }
        }
    }

    pub fn field_value(&self, right: bool, x: f64, t: f64, level: i64) -> Result<FieldPoint> {
        match self {
            BoundaryCondition::DirichletExact { eps, mu, .. } => exact_plane_wave(x, t, *eps, *mu),
            _ => Ok(self.extended_value(right, x, t, level)?.fields()),
        }
    }
}

/// Plane wave with potentials in the requested gauge.
pub fn exact_in_gauge(x: f64, t: f64, eps: f64, mu: f64, gauge: Gauge) -> Result<ExtendedState> {
    let z = exact_extended(x, t, eps, mu)?;
    match gauge {
        Gauge::Analytic => Ok(z),
        Gauge::ZeroAtStart => {
            let z0 = exact_extended(x, 0.0, eps, mu)?;
            Ok(ExtendedState {
                v: z.v - z0.v,
                u: z.u - z0.u,
                p: z.p - (z0.p - z0.h * mu),
                q: z.q - (z0.q - z0.e * eps),
                ..z
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreissmanState {
    pub level: i64,
    pub time: f64,
    pub nodes: Vec<ExtendedState>,
}

/// Two consecutive levels; `level` and `time` refer to `curr`.
#[derive(Debug, Clone, PartialEq)]
pub struct NinePointState {
    pub level: i64,
    pub time: f64,
    pub prev: Vec<FieldPoint>,
    pub curr: Vec<FieldPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFieldState {
    pub level: i64,
    pub time: f64,
    pub nodes: Vec<FieldPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeState {
    NinePoint(NinePointState),
    Preissman(PreissmanState),
    TwoField(TwoFieldState),
}

impl SchemeState {
    pub fn level(&self) -> i64 {
        match self {
            SchemeState::NinePoint(s) => s.level,
            SchemeState::Preissman(s) => s.level,
            SchemeState::TwoField(s) => s.level,
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            SchemeState::NinePoint(s) => s.time,
            SchemeState::Preissman(s) => s.time,
            SchemeState::TwoField(s) => s.time,
        }
    }

    /// `(H, E)` at the current level.
    pub fn fields(&self) -> Vec<FieldPoint> {
        match self {
            SchemeState::NinePoint(s) => s.curr.clone(),
            SchemeState::Preissman(s) => s.nodes.iter().map(|z| z.fields()).collect(),
            SchemeState::TwoField(s) => s.nodes.clone(),
        }
    }
}

pub(crate) fn check_nodes<T>(nodes: &[T], grid: &Grid1D, finite: impl Fn(&T) -> bool) -> Result<()> {
    if nodes.len() != grid.nodes() {
        return Err(Error::Dimension(format!(
            "state has {} nodes, grid has {}",
            nodes.len(),
            grid.nodes()
        )));
    }
    if let Some(i) = nodes.iter().position(|z| !finite(z)) {
        return Err(Error::State(format!("non-finite value at node {i}")));
    }
    Ok(())
}

/// Initial data for [`bootstrap`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    ExactPlaneWave { eps: f64, mu: f64, gauge: Gauge },
    /// Node samples of `(H, E)` and optionally `(V, U, P, Q)`.
    Sampled {
        fields: Vec<FieldPoint>,
        aux: Option<Vec<[Vec3; 4]>>,
    },
}

fn zero_gauge_state(fields: &[FieldPoint], medium: &MediumProfile, periodic: bool) -> Vec<ExtendedState> {
    fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (eps, mu) = medium.node_values(i, periodic);
            ExtendedState {
                h: f.h,
                e: f.e,
                v: Vec3::ZERO,
                u: Vec3::ZERO,
                p: f.h * mu,
                q: f.e * eps,
            }
        })
        .collect()
}

/// Builds the starting state of `kind`: one level for the box schemes, two
/// for the nine-point scheme.
pub fn bootstrap(
    kind: SchemeKind,
    ic: &InitialCondition,
    grid: &Grid1D,
    medium: &MediumProfile,
    sources: &SourceProfile,
    bc: &BoundaryCondition,
) -> Result<SchemeState> {
    medium.check_grid(grid)?;
    let periodic = bc.is_periodic();
    let level0: Vec<ExtendedState> = match ic {
        InitialCondition::ExactPlaneWave { eps, mu, gauge } => (0..grid.nodes())
            .map(|i| exact_in_gauge(grid.node_x(i), 0.0, *eps, *mu, *gauge))
            .collect::<Result<_>>()?,
        InitialCondition::Sampled { fields, aux } => {
            if fields.len() != grid.nodes() {
                return Err(Error::Argument(format!(
                    "initial condition has {} samples, grid has {} nodes",
                    fields.len(),
                    grid.nodes()
                )));
            }
            match aux {
                None => zero_gauge_state(fields, medium, periodic),
                Some(a) => {
                    if a.len() != fields.len() {
                        return Err(Error::Argument(
                            "auxiliary samples do not match the field samples".into(),
                        ));
                    }
                    fields
                        .iter()
                        .zip(a)
                        .map(|(f, [v, u, p, q])| ExtendedState {
                            h: f.h,
                            e: f.e,
                            v: *v,
                            u: *u,
                            p: *p,
                            q: *q,
                        })
                        .collect()
                }
            }
        }
    };
    let fields0: Vec<FieldPoint> = level0.iter().map(|z| z.fields()).collect();
    Ok(match kind {
        SchemeKind::Preissman => SchemeState::Preissman(PreissmanState {
            level: 0,
            time: 0.0,
            nodes: level0,
        }),
        SchemeKind::Midpoint2Field => SchemeState::TwoField(TwoFieldState {
            level: 0,
            time: 0.0,
            nodes: fields0,
        }),
        SchemeKind::NinePoint => {
            let curr = match ic {
                InitialCondition::ExactPlaneWave { eps, mu, .. } => (0..grid.nodes())
                    .map(|i| exact_plane_wave(grid.node_x(i), grid.dt(), *eps, *mu))
                    .collect::<Result<Vec<_>>>()?,
                InitialCondition::Sampled { aux, .. } => {
                    let bc = match (bc, aux) {
                        (BoundaryCondition::DirichletExact { eps, mu, .. }, None) => {
                            BoundaryCondition::DirichletExact {
                                eps: *eps,
                                mu: *mu,
                                gauge: Gauge::ZeroAtStart,
                            }
                        }
                        _ => bc.clone(),
                    };
                    let start = PreissmanState {
                        level: 0,
                        time: 0.0,
                        nodes: level0,
                    };
                    preissman_step(&start, grid, medium, sources, &bc)?
                        .nodes
                        .iter()
                        .map(|z| z.fields())
                        .collect()
                }
            };
            SchemeState::NinePoint(NinePointState {
                level: 1,
                time: grid.dt(),
                prev: fields0,
                curr,
            })
        }
    })
}

/// Stepper for any of the three schemes with a cached factorisation.
pub enum Integrator {
    NinePoint(NinePointStepper),
    Preissman(PreissmanStepper),
    TwoField(TwoFieldStepper),
}

impl Integrator {
    pub fn new(
        kind: SchemeKind,
        grid: &Grid1D,
        medium: &MediumProfile,
        sources: &SourceProfile,
        bc: &BoundaryCondition,
    ) -> Result<Self> {
        Ok(match kind {
            SchemeKind::NinePoint => {
                Integrator::NinePoint(NinePointStepper::new(grid, medium, sources.clone(), bc.clone())?)
            }
            SchemeKind::Preissman => {
                Integrator::Preissman(PreissmanStepper::new(grid, medium, sources.clone(), bc.clone())?)
            }
            SchemeKind::Midpoint2Field => {
                Integrator::TwoField(TwoFieldStepper::new(grid, medium, sources.clone(), bc.clone())?)
            }
        })
    }

    pub fn step(&mut self, state: &SchemeState) -> Result<SchemeState> {
        match (self, state) {
            (Integrator::NinePoint(s), SchemeState::NinePoint(z)) => Ok(SchemeState::NinePoint(s.step(z)?)),
            (Integrator::Preissman(s), SchemeState::Preissman(z)) => Ok(SchemeState::Preissman(s.step(z)?)),
            (Integrator::TwoField(s), SchemeState::TwoField(z)) => Ok(SchemeState::TwoField(s.step(z)?)),
            _ => Err(Error::Argument("state does not belong to this integrator".into())),
        }
    }
}
