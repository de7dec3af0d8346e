//! Discrete multisymplectic conservation checks and energy diagnostics.
//!
//! For a box scheme `M d_t + K d_x = grad S` with linear `grad S`, any two
//! solutions `xi`, `eta` of the homogeneous scheme satisfy, cell by cell,
//!
//! `(kappa_{i+1} - kappa_i)/dx + (omega^{j+1} - omega^j)/dt = 0`
//!
//! with `omega^j_{i+1/2} = (mu_x xi^j)^T M (mu_x eta^j)` and
//! `kappa_i^{j+1/2} = (mu_t xi_i)^T K (mu_t eta_i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::em_core::{Block, FieldPoint, Grid1D, MediumProfile, SourceProfile, Vec3, STATE_DIM};
use crate::error::{Error, Result};
use crate::hamilton::{assemble_ms_structure, rot_wedge};
use crate::schemes::midpoint::{homogeneous_constants, TwoFieldSystem};
use crate::schemes::{
    preissman_residual, two_field_residual, BoundaryCondition, PreissmanState, PreissmanStepper,
    SchemeKind, TwoFieldState, TwoFieldStepper, TWO_FIELD_DIM,
};

/// Homogeneous-residual tolerance relative to the term scale.
const CERTIFY_TOL: f64 = 1e-10;

/// Two tangent trajectories, `[level][node][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub scheme: SchemeKind,
    pub grid: Grid1D,
    pub dt: f64,
    pub xi: Vec<Vec<Vec<f64>>>,
    pub eta: Vec<Vec<Vec<f64>>>,
    /// Largest homogeneous-scheme residual relative to its term scale.
    pub certificate: f64,
}

impl TangentPair {
    pub fn dim(&self) -> usize {
        match self.scheme {
            SchemeKind::Midpoint2Field => TWO_FIELD_DIM,
            _ => STATE_DIM,
        }
    }

    pub fn levels(&self) -> usize {
        self.xi.len()
    }

    pub fn scaled(&self, c_xi: f64, c_eta: f64) -> TangentPair {
        let scale = |t: &Vec<Vec<Vec<f64>>>, c: f64| {
            t.iter()
                .map(|l| l.iter().map(|n| n.iter().map(|v| v * c).collect()).collect())
                .collect()
        };
        TangentPair {
            xi: scale(&self.xi, c_xi),
            eta: scale(&self.eta, c_eta),
            ..self.clone()
        }
    }

    pub fn swapped(&self) -> TangentPair {
        TangentPair {
            xi: self.eta.clone(),
            eta: self.xi.clone(),
            ..self.clone()
        }
    }

    /// Evolves two given initial tangents through `steps` homogeneous steps.
    #[allow(clippy::too_many_arguments)]
    pub fn evolve(
        scheme: SchemeKind,
        grid: &Grid1D,
        medium: &MediumProfile,
        bc: &BoundaryCondition,
        xi0: Vec<Vec<f64>>,
        eta0: Vec<Vec<f64>>,
        steps: usize,
    ) -> Result<TangentPair> {
        let bc = bc.homogeneous(steps + 1);
        let (xi, c1) = evolve_one(scheme, grid, medium, &bc, xi0, steps)?;
        let (eta, c2) = evolve_one(scheme, grid, medium, &bc, eta0, steps)?;
        Ok(TangentPair {
            scheme,
            grid: *grid,
            dt: grid.dt(),
            xi,
            eta,
            certificate: c1.max(c2),
        })
    }
}

fn scheme_dim(scheme: SchemeKind) -> Result<usize> {
    match scheme {
        SchemeKind::Preissman => Ok(STATE_DIM),
        SchemeKind::Midpoint2Field => Ok(TWO_FIELD_DIM),
        SchemeKind::NinePoint => Err(Error::Argument(
            "the nine-point scheme has no auxiliary-field tangents; use preissman".into(),
        )),
    }
}

fn evolve_one(
    scheme: SchemeKind,
    grid: &Grid1D,
    medium: &MediumProfile,
    bc: &BoundaryCondition,
    init: Vec<Vec<f64>>,
    steps: usize,
) -> Result<(Vec<Vec<Vec<f64>>>, f64)> {
    let d = scheme_dim(scheme)?;
    if init.len() != grid.nodes() || init.iter().any(|n| n.len() != d) {
        return Err(Error::Dimension(format!(
            "initial tangent must have {} nodes of {d} components",
            grid.nodes()
        )));
    }
    let zero = SourceProfile::zero();
    let mut out = vec![init];
    let mut cert = 0.0_f64;
    let relative = |(r, s): (f64, f64)| if s > 0.0 { r / s } else { r };
    match scheme {
        SchemeKind::Preissman => {
            let mut st = PreissmanStepper::new(grid, medium, zero.clone(), bc.clone())?;
            let mut s = PreissmanState {
                level: 0,
                time: 0.0,
                nodes: out[0]
                    .iter()
                    .map(|v| crate::em_core::ExtendedState::from_array(v.as_slice().try_into().expect("18")))
                    .collect(),
            };
            for _ in 0..steps {
                let next = st.step(&s)?;
                cert = cert.max(relative(preissman_residual(&s, &next, grid, medium, &zero)?));
                out.push(next.nodes.iter().map(|z| z.to_array().to_vec()).collect());
                s = next;
            }
        }
        SchemeKind::Midpoint2Field => {
            let mut st = TwoFieldStepper::new(grid, medium, zero.clone(), bc.clone())?;
            let mut s = TwoFieldState {
                level: 0,
                time: 0.0,
                nodes: out[0]
                    .iter()
                    .map(|v| FieldPoint::from_array(v.as_slice().try_into().expect("6")))
                    .collect(),
            };
            for _ in 0..steps {
                let next = st.step(&s)?;
                cert = cert.max(relative(two_field_residual(&s, &next, grid, medium, &zero)?));
                out.push(next.nodes.iter().map(|f| f.to_array().to_vec()).collect());
                s = next;
            }
        }
        SchemeKind::NinePoint => unreachable!("rejected by scheme_dim"),
    }
    if cert > CERTIFY_TOL {
        return Err(Error::State(format!(
            "tangent violates the homogeneous scheme: relative residual {cert:e}"
        )));
    }
    Ok((out, cert))
}

/// Random initial tangent; seed 0 gives the zero tangent. Periodic grids get
/// a wrapped random field, open grids one vanishing at both end nodes.
pub fn random_tangent(d: usize, grid: &Grid1D, periodic: bool, seed: u64) -> Vec<Vec<f64>> {
    let n = grid.nodes();
    let mut out = vec![vec![0.0; d]; n];
    if seed == 0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = if periodic { (0, n - 1) } else { (1, n - 1) };
    for node in out.iter_mut().take(hi).skip(lo) {
        for v in node.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    if periodic {
        out[n - 1] = out[0].clone();
    }
    out
}

/// Evolves two random tangents through `steps` source-free steps and
/// certifies that each satisfies the homogeneous scheme.
pub fn make_tangent_pair(
    scheme: SchemeKind,
    grid: &Grid1D,
    medium: &MediumProfile,
    bc: &BoundaryCondition,
    seeds: [u64; 2],
    steps: usize,
) -> Result<TangentPair> {
    let d = scheme_dim(scheme)?;
    let periodic = bc.is_periodic();
    TangentPair::evolve(
        scheme,
        grid,
        medium,
        bc,
        random_tangent(d, grid, periodic, seeds[0]),
        random_tangent(d, grid, periodic, seeds[1]),
        steps,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `residual[j][i]` for the cell between levels `j, j+1` and nodes `i, i+1`.
    pub residual: Vec<Vec<f64>>,
    /// Per-cell scale: largest absolute-term sum among the four forms of the
    /// cell, each divided by its step.
    pub cell_scale: Vec<Vec<f64>>,
    pub max_abs: f64,
    pub scale: f64,
    pub relative: f64,
}

impl ResidualReport {
    /// Largest per-cell `residual / cell_scale` (0 for vanishing cells).
    pub fn max_cell_relative(&self) -> f64 {
        self.residual
            .iter()
            .flatten()
            .zip(self.cell_scale.iter().flatten())
            .map(|(r, s)| if *s > 0.0 { r / s } else { *r })
            .fold(0.0, f64::max)
    }

    /// CSV with one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,cell,residual,scale,relative\n");
        for (j, (row, srow)) in self.residual.iter().zip(&self.cell_scale).enumerate() {
            for (i, (r, s)) in row.iter().zip(srow).enumerate() {
                let rel = if *s > 0.0 { r / s } else { *r };
                out.push_str(&format!("{j},{i},{r:.17e},{s:.17e},{rel:.17e}\n"));
            }
        }
        out
    }
}

/// `(a^T B b, sum |a_r B_rc b_c|)`.
fn form(a: &[f64], b: &[f64], mat: &[f64], d: usize) -> (f64, f64) {
    let (mut v, mut mag) = (0.0, 0.0);
    for r in 0..d {
        if a[r] == 0.0 {
            continue;
        }
        for c in 0..d {
            let t = a[r] * mat[r * d + c] * b[c];
            v += t;
            mag += t.abs();
        }
    }
    (v, mag)
}

fn avg(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn check_pair(pair: &TangentPair, grid: &Grid1D) -> Result<()> {
    let d = pair.dim();
    let ok_shape = |t: &Vec<Vec<Vec<f64>>>| {
        t.iter().all(|l| l.len() == grid.nodes() && l.iter().all(|n| n.len() == d))
    };
    if pair.grid.nx() != grid.nx()
        || pair.xi.len() != pair.eta.len()
        || pair.xi.is_empty()
        || !ok_shape(&pair.xi)
        || !ok_shape(&pair.eta)
    {
        return Err(Error::Dimension(format!(
            "tangent pair does not match a grid of {} nodes",
            grid.nodes()
        )));
    }
    Ok(())
}

fn box_conservation(pair: &TangentPair, grid: &Grid1D, m: &[f64], k: &[f64]) -> ResidualReport {
    let d = pair.dim();
    let nx = grid.nx();
    let (dx, dt) = (grid.dx(), pair.dt);
    let levels = pair.levels();
    let omega: Vec<Vec<(f64, f64)>> = (0..levels)
        .map(|j| {
            (0..nx)
                .map(|i| {
                    let a = avg(&pair.xi[j][i], &pair.xi[j][i + 1]);
                    let b = avg(&pair.eta[j][i], &pair.eta[j][i + 1]);
                    form(&a, &b, m, d)
                })
                .collect()
        })
        .collect();
    let kappa: Vec<Vec<(f64, f64)>> = (0..levels.saturating_sub(1))
        .map(|j| {
            (0..=nx)
                .map(|i| {
                    let a = avg(&pair.xi[j][i], &pair.xi[j + 1][i]);
                    let b = avg(&pair.eta[j][i], &pair.eta[j + 1][i]);
                    form(&a, &b, k, d)
                })
                .collect()
        })
        .collect();
    let mut residual = Vec::with_capacity(levels);
    let mut cell_scale = Vec::with_capacity(levels);
    let (mut max_abs, mut scale) = (0.0_f64, 0.0_f64);
    for j in 0..levels.saturating_sub(1) {
        let mut row = Vec::with_capacity(nx);
        let mut srow = Vec::with_capacity(nx);
        for i in 0..nx {
            let r = (kappa[j][i + 1].0 - kappa[j][i].0) / dx + (omega[j + 1][i].0 - omega[j][i].0) / dt;
            let s = (kappa[j][i + 1].1.max(kappa[j][i].1) / dx)
                .max(omega[j + 1][i].1.max(omega[j][i].1) / dt.abs());
            max_abs = max_abs.max(r.abs());
            scale = scale.max(s);
            row.push(r.abs());
            srow.push(s);
        }
        residual.push(row);
        cell_scale.push(srow);
    }
    ResidualReport {
        residual,
        cell_scale,
        max_abs,
        scale,
        relative: if scale > 0.0 { max_abs / scale } else { 0.0 },
    }
}

/// Conservation residual of the six-field scheme on a tangent pair.
pub fn msc_residual_preissman(pair: &TangentPair, grid: &Grid1D, medium: &MediumProfile) -> Result<ResidualReport> {
    if pair.scheme != SchemeKind::Preissman {
        return Err(Error::Argument(format!("expected six-field tangents, got {}", pair.scheme)));
    }
    medium.check_grid(grid)?;
    check_pair(pair, grid)?;
    let s = assemble_ms_structure();
    let flat = |m: &[[f64; STATE_DIM]; STATE_DIM]| m.iter().flatten().copied().collect::<Vec<_>>();
    Ok(box_conservation(pair, grid, &flat(&s.m), &flat(s.k1())))
}

/// Conservation residual of the two-field scheme on a tangent pair.
pub fn msc_residual_2field(pair: &TangentPair, grid: &Grid1D, medium: &MediumProfile) -> Result<ResidualReport> {
    if pair.scheme != SchemeKind::Midpoint2Field {
        return Err(Error::Argument(format!("expected two-field tangents, got {}", pair.scheme)));
    }
    check_pair(pair, grid)?;
    medium.check_grid(grid)?;
    let (eps, mu) = homogeneous_constants(medium)?;
    let system = TwoFieldSystem::new(eps, mu, SourceProfile::zero());
    let (m, k) = system.structure();
    Ok(box_conservation(pair, grid, m, k))
}

/// `R_1`-weighted field wedge `xi_E . R_1 eta_H - eta_E . R_1 xi_H` per
/// level and node; depends on the `(H, E)` blocks only.
pub fn field_wedges(pair: &TangentPair) -> Vec<Vec<f64>> {
    let (ho, eo) = match pair.scheme {
        SchemeKind::Midpoint2Field => (0, 3),
        _ => (Block::H.offset(), Block::E.offset()),
    };
    let v = |n: &[f64], o: usize| Vec3::new(n[o], n[o + 1], n[o + 2]);
    pair.xi
        .iter()
        .zip(&pair.eta)
        .map(|(lx, le)| {
            lx.iter()
                .zip(le)
                .map(|(a, b)| rot_wedge(v(a, eo), v(b, ho)) - rot_wedge(v(b, eo), v(a, ho)))
                .collect()
        })
        .collect()
}

/// Trapezoidal `int (mu |H|^2 + eps |E|^2)/2 dx` per level, with node values
/// of the medium averaged from the adjacent cells.
pub fn energy_diagnostic(
    run: &[Vec<FieldPoint>],
    grid: &Grid1D,
    medium: &MediumProfile,
    periodic: bool,
) -> Result<Vec<f64>> {
    medium.check_grid(grid)?;
    let nx = grid.nx();
    run.iter()
        .map(|level| {
            if level.len() != grid.nodes() {
                return Err(Error::Dimension(format!(
                    "level has {} nodes, grid has {}",
                    level.len(),
                    grid.nodes()
                )));
            }
            Ok(level
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let (eps, mu) = medium.node_values(i, periodic);
                    let w = if i == 0 || i == nx { 0.5 } else { 1.0 };
                    w * 0.5 * (mu * f.h.norm_sq() + eps * f.e.norm_sq())
                })
                .sum::<f64>()
                * grid.dx())
        })
        .collect()
}
