//! Two-field box scheme for `Z = (H, E)` in a homogeneous medium:
//! `M Z_t + K Z_x = grad S` with `M = [[0, -I], [I, 0]]`,
//! `K = diag(R_1/eps, R_1/mu)` and the linear `S` carrying the sources.

use super::boxes::{box_residual, BoxEngine, BoxSystem, Closure, Dense};
use super::{check_nodes, BoundaryCondition, TwoFieldState};
use crate::em_core::{rot_matrix, Axis, FieldPoint, Grid1D, MediumProfile, SourceProfile};
use crate::error::{Error, Result};

pub const TWO_FIELD_DIM: usize = 6;
const D: usize = TWO_FIELD_DIM;

#[derive(Clone)]
pub(crate) struct TwoFieldSystem {
    m: Dense,
    k: Dense,
    eps: f64,
    mu: f64,
    sources: SourceProfile,
}

impl TwoFieldSystem {
    pub fn new(eps: f64, mu: f64, sources: SourceProfile) -> Self {
        let r = rot_matrix(Axis::X);
        let mut m = vec![0.0; D * D];
        let mut k = vec![0.0; D * D];
        for i in 0..3 {
            m[i * D + 3 + i] = -1.0;
            m[(3 + i) * D + i] = 1.0;
            for j in 0..3 {
                k[i * D + j] = r[i][j] / eps;
                k[(3 + i) * D + 3 + j] = r[i][j] / mu;
            }
        }
        TwoFieldSystem { m, k, eps, mu, sources }
    }

    pub fn structure(&self) -> (&Dense, &Dense) {
        (&self.m, &self.k)
    }
}

impl BoxSystem for TwoFieldSystem {
    fn dim(&self) -> usize {
        D
    }

    fn m(&self) -> &Dense {
        &self.m
    }

    fn k(&self) -> &Dense {
        &self.k
    }

    fn l(&self, _cell: usize) -> Dense {
        vec![0.0; D * D]
    }

    fn s(&self, x: f64, t: f64) -> Vec<f64> {
        let mut s = vec![0.0; D];
        if !self.sources.is_zero() {
            let j = self.sources.j(x, t) * (1.0 / self.eps);
            let k = self.sources.k(x, t) * (-1.0 / self.mu);
            s[..3].copy_from_slice(&j.to_array());
            s[3..].copy_from_slice(&k.to_array());
        }
        s
    }
}

/// `H_1`, `E_1` and both transverse `E` components at the left end, the
/// transverse `E` components at the right end.
fn closure() -> Closure {
    Closure {
        left: vec![0, 3, 4, 5],
        right: vec![4, 5],
    }
}

pub(crate) fn homogeneous_constants(medium: &MediumProfile) -> Result<(f64, f64)> {
    if !medium.is_spatially_constant() {
        return Err(Error::Precondition(
            "the two-field scheme needs eps and mu constant in space".into(),
        ));
    }
    Ok((medium.eps()[0], medium.mu()[0]))
}

fn to_rows(nodes: &[FieldPoint]) -> Vec<Vec<f64>> {
    nodes.iter().map(|f| f.to_array().to_vec()).collect()
}

#[derive(Clone)]
pub struct TwoFieldStepper {
    engine: BoxEngine<TwoFieldSystem>,
    bc: BoundaryCondition,
}

impl TwoFieldStepper {
    pub fn new(
        grid: &Grid1D,
        medium: &MediumProfile,
        sources: SourceProfile,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        medium.check_grid(grid)?;
        let (eps, mu) = homogeneous_constants(medium)?;
        bc.validate(grid)?;
        let engine = BoxEngine::new(
            TwoFieldSystem::new(eps, mu, sources),
            *grid,
            grid.dt(),
            bc.is_periodic(),
            closure(),
        )?;
        Ok(TwoFieldStepper { engine, bc })
    }

    /// `(M, K)` of the discretised system, row-major `6 x 6`.
    pub fn structure(&self) -> (Vec<f64>, Vec<f64>) {
        let (m, k) = self.engine.system.structure();
        (m.clone(), k.clone())
    }

    pub fn reversed(self) -> Result<Self> {
        let dt = -self.engine.dt;
        Ok(TwoFieldStepper {
            engine: self.engine.with_dt(dt)?,
            bc: self.bc,
        })
    }

    pub fn step(&mut self, state: &TwoFieldState) -> Result<TwoFieldState> {
        let grid = self.engine.grid;
        check_nodes(&state.nodes, &grid, |f| f.is_finite())?;
        let dir = if self.engine.dt > 0.0 { 1 } else { -1 };
        let (level, time) = (state.level + dir, state.time + self.engine.dt);
        let bc = &self.bc;
        let boundary = |right: bool| -> Result<Vec<f64>> {
            let x = grid.node_x(if right { grid.nx() } else { 0 });
            Ok(bc.field_value(right, x, time, level)?.to_array().to_vec())
        };
        let rows = self
            .engine
            .step(&to_rows(&state.nodes), state.time, &boundary)
            .map_err(|e| e.at_step(level.unsigned_abs() as usize))?;
        Ok(TwoFieldState {
            level,
            time,
            nodes: rows
                .iter()
                .map(|r| FieldPoint::from_array(r.as_slice().try_into().expect("6 components")))
                .collect(),
        })
    }
}

/// One two-field step without factorisation reuse.
pub fn midpoint_step_2field(
    state: &TwoFieldState,
    grid: &Grid1D,
    medium: &MediumProfile,
    sources: &SourceProfile,
    bc: &BoundaryCondition,
) -> Result<TwoFieldState> {
    TwoFieldStepper::new(grid, medium, sources.clone(), bc.clone())?.step(state)
}

/// Largest box-equation residual between two levels and the term scale.
pub fn two_field_residual(
    old: &TwoFieldState,
    new: &TwoFieldState,
    grid: &Grid1D,
    medium: &MediumProfile,
    sources: &SourceProfile,
) -> Result<(f64, f64)> {
    let (eps, mu) = homogeneous_constants(medium)?;
    let system = TwoFieldSystem::new(eps, mu, sources.clone());
    box_residual(
        &system,
        grid,
        new.time - old.time,
        old.time,
        &to_rows(&old.nodes),
        &to_rows(&new.nodes),
        !sources.is_zero(),
    )
}
