//! Generic box (centred-in-space-and-time) discretisation of a linear
//! multisymplectic system `M Z_t + K Z_x = L(x) Z + s(x, t)`:
//!
//! `M (mu_x Z^{j+1} - mu_x Z^j)/dt + K (mu_t Z_{i+1} - mu_t Z_i)/dx
//!     = L_{i+1/2} mu_x mu_t Z + s(x_{i+1/2}, t_{j+1/2})`
//!
//! per box. Both the six-field and the two-field scheme are instances.

use super::banded::BandedBlockMatrix;
use crate::em_core::Grid1D;
use crate::error::{Error, Result};

/// Dense `d x d` matrix, row-major.
pub(crate) type Dense = Vec<f64>;

pub(crate) trait BoxSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn m(&self) -> &Dense;
    fn k(&self) -> &Dense;
    /// Symmetric Hessian of `S` in box `i`.
    fn l(&self, cell: usize) -> Dense;
    /// Constant part of `grad S` at a box centre.
    fn s(&self, x: f64, t: f64) -> Vec<f64>;
}

/// Components fixed at the left and right end nodes for Dirichlet closures.
#[derive(Debug, Clone)]
pub(crate) struct Closure {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Node ordering of the unknowns. Periodic grids interleave the nodes
/// (0, n-1, 1, n-2, ...) so every box couples block rows at most two apart.
fn periodic_pos(node: usize, n: usize) -> usize {
    if 2 * node < n {
        2 * node
    } else {
        2 * (n - 1 - node) + 1
    }
}

pub(crate) struct BoxEngine<S: BoxSystem> {
    pub system: S,
    pub grid: Grid1D,
    pub dt: f64,
    pub periodic: bool,
    closure: Closure,
    matrix: BandedBlockMatrix,
}

impl<S: BoxSystem + Clone> Clone for BoxEngine<S> {
    fn clone(&self) -> Self {
        BoxEngine {
            system: self.system.clone(),
            grid: self.grid,
            dt: self.dt,
            periodic: self.periodic,
            closure: self.closure.clone(),
            matrix: self.matrix.clone(),
        }
    }
}

impl<S: BoxSystem> BoxEngine<S> {
    pub fn new(system: S, grid: Grid1D, dt: f64, periodic: bool, closure: Closure) -> Result<Self> {
        let d = system.dim();
        if !periodic {
            assert_eq!(closure.left.len() + closure.right.len(), d);
        }
        let matrix = assemble(&system, &grid, dt, periodic, &closure);
        let mut engine = BoxEngine {
            system,
            grid,
            dt,
            periodic,
            closure,
            matrix,
        };
        engine.matrix.factorize()?;
        Ok(engine)
    }

    pub fn with_dt(self, dt: f64) -> Result<Self> {
        BoxEngine::new(self.system, self.grid, dt, self.periodic, self.closure)
    }

    /// Solves for the next level. `boundary` supplies the full state vector
    /// at the left (`false`) or right (`true`) node at the new time.
    pub fn step(
        &mut self,
        old: &[Vec<f64>],
        t_old: f64,
        boundary: &dyn Fn(bool) -> Result<Vec<f64>>,
    ) -> Result<Vec<Vec<f64>>> {
        let d = self.system.dim();
        let nx = self.grid.nx();
        let (dx, dt) = (self.grid.dx(), self.dt);
        let (m, k) = (self.system.m().clone(), self.system.k().clone());
        let t_mid = t_old + 0.5 * dt;
        let n_nodes = if self.periodic { nx } else { nx + 1 };
        let mut rhs = vec![0.0; d * n_nodes];
        let nl = self.closure.left.len();
        for cell in 0..nx {
            let (za, zb) = (&old[cell], &old[cell + 1]);
            let l = self.system.l(cell);
            let s = self.system.s(self.grid.mid_x(cell), t_mid);
            let base = if self.periodic {
                d * periodic_pos(cell, nx)
            } else {
                nl + d * cell
            };
            for r in 0..d {
                let mut v = s[r];
                for c in 0..d {
                    let (sum, diff) = (za[c] + zb[c], zb[c] - za[c]);
                    v += m[r * d + c] * sum / (2.0 * dt) - k[r * d + c] * diff / (2.0 * dx)
                        + l[r * d + c] * sum / 4.0;
                }
                rhs[base + r] = v;
            }
        }
        if !self.periodic {
            let left = boundary(false)?;
            let right = boundary(true)?;
            for (q, &c) in self.closure.left.iter().enumerate() {
                rhs[q] = left[c];
            }
            for (q, &c) in self.closure.right.iter().enumerate() {
                rhs[nl + d * nx + q] = right[c];
            }
        }
        let x = self.matrix.solve(&rhs)?;
        let mut out = vec![vec![0.0; d]; nx + 1];
        for node in 0..n_nodes {
            let p = if self.periodic { periodic_pos(node, nx) } else { node };
            out[node].copy_from_slice(&x[d * p..d * p + d]);
        }
        if self.periodic {
            out[nx] = out[0].clone();
        }
        Ok(out)
    }
}

fn assemble<S: BoxSystem>(
    system: &S,
    grid: &Grid1D,
    dt: f64,
    periodic: bool,
    closure: &Closure,
) -> BandedBlockMatrix {
    let d = system.dim();
    let nx = grid.nx();
    let dx = grid.dx();
    let (m, k) = (system.m(), system.k());
    let mut a = if periodic {
        let n = d * nx;
        let bw = (3 * d - 1).min(n - 1);
        BandedBlockMatrix::with_bandwidths(n, d, bw, bw)
    } else {
        let nl = closure.left.len();
        BandedBlockMatrix::with_bandwidths(d * (nx + 1), d, nl + d - 1, 2 * d - 1 - nl)
    };
    let nl = closure.left.len();
    for cell in 0..nx {
        let l = system.l(cell);
        let (row0, ca, cb) = if periodic {
            (
                d * periodic_pos(cell, nx),
                d * periodic_pos(cell, nx),
                d * periodic_pos((cell + 1) % nx, nx),
            )
        } else {
            (nl + d * cell, d * cell, d * (cell + 1))
        };
        for r in 0..d {
            for c in 0..d {
                let (mm, kk, ll) = (m[r * d + c], k[r * d + c], l[r * d + c]);
                let common = mm / (2.0 * dt) - ll / 4.0;
                a.add(row0 + r, ca + c, common - kk / (2.0 * dx));
                a.add(row0 + r, cb + c, common + kk / (2.0 * dx));
            }
        }
    }
    if !periodic {
        for (q, &c) in closure.left.iter().enumerate() {
            a.set(q, c, 1.0);
        }
        for (q, &c) in closure.right.iter().enumerate() {
            a.set(nl + d * nx + q, d * nx + c, 1.0);
        }
    }
    a
}

/// Largest box-equation residual between two levels and the largest
/// magnitude of the individual terms.
pub(crate) fn box_residual<S: BoxSystem>(
    system: &S,
    grid: &Grid1D,
    dt: f64,
    t_old: f64,
    old: &[Vec<f64>],
    new: &[Vec<f64>],
    with_sources: bool,
) -> Result<(f64, f64)> {
    let d = system.dim();
    let nx = grid.nx();
    if old.len() != nx + 1 || new.len() != nx + 1 {
        return Err(Error::Dimension(format!(
            "levels must have {} nodes, got {} and {}",
            nx + 1,
            old.len(),
            new.len()
        )));
    }
    let dx = grid.dx();
    let (m, k) = (system.m(), system.k());
    let (mut res, mut scale) = (0.0_f64, 0.0_f64);
    for cell in 0..nx {
        let l = system.l(cell);
        let s = if with_sources {
            system.s(grid.mid_x(cell), t_old + 0.5 * dt)
        } else {
            vec![0.0; d]
        };
        for r in 0..d {
            let (mut tm, mut tk, mut tl) = (0.0, 0.0, 0.0);
            for c in 0..d {
                let dt_part = 0.5 * (new[cell][c] + new[cell + 1][c] - old[cell][c] - old[cell + 1][c]);
                let dx_part = 0.5 * (new[cell + 1][c] + old[cell + 1][c] - new[cell][c] - old[cell][c]);
                let avg = 0.25 * (new[cell][c] + new[cell + 1][c] + old[cell][c] + old[cell + 1][c]);
                tm += m[r * d + c] * dt_part / dt;
                tk += k[r * d + c] * dx_part / dx;
                tl += l[r * d + c] * avg;
            }
            res = res.max((tm + tk - tl - s[r]).abs());
            scale = scale.max(tm.abs()).max(tk.abs()).max(tl.abs()).max(s[r].abs());
        }
    }
    Ok((res, scale))
}
