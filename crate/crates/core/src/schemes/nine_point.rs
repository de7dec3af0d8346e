//! Two-step nine-point scheme for `(H, E)`, the six-field box scheme with
//! `V, U, P, Q` eliminated. Centred at node `i`, level `j+1`, and cleared of
//! denominators, the `H` and `E` rows read
//!
//! `dx [mu_{i-1/2}(dH_{i-1} + dH_i) + mu_{i+1/2}(dH_i + dH_{i+1})] + dt R_1 (W(E)_{i+1} - W(E)_{i-1}) = -2 dx dt sum K`
//! `dx [eps_{i-1/2}(dE_{i-1} + dE_i) + eps_{i+1/2}(dE_i + dE_{i+1})] - dt R_1 (W(H)_{i+1} - W(H)_{i-1}) = -2 dx dt sum J`
//!
//! with `dF = F^{j+2} - F^j`, `W(F) = F^j + 2F^{j+1} + F^{j+2}` and the
//! sources summed over the four boxes around the centre.

use super::banded::BandedBlockMatrix;
use super::{check_nodes, BoundaryCondition, NinePointState};
use crate::em_core::{rot_matrix, Axis, FieldPoint, Grid1D, MediumProfile, SourceProfile, Vec3};
use crate::error::{Error, Result};

const D: usize = 6;

type Block6 = [[f64; D]; D];

/// Stencil geometry shared by assembly, stepping and residual evaluation.
#[derive(Clone)]
struct Stencil {
    grid: Grid1D,
    dt: f64,
    eps: Vec<f64>,
    mu: Vec<f64>,
    periodic: bool,
}

impl Stencil {
    fn neighbours(&self, i: usize) -> (usize, usize) {
        let nx = self.grid.nx();
        if self.periodic {
            ((i + nx - 1) % nx, (i + 1) % nx)
        } else {
            (i - 1, i + 1)
        }
    }

    /// Medium samples of the cells left and right of node `i`.
    fn cells(&self, i: usize) -> (usize, usize) {
        let nx = self.grid.nx();
        if self.periodic {
            ((i + nx - 1) % nx, i % nx)
        } else {
            (i - 1, i)
        }
    }

    /// `(med, curl)` blocks coupling node `i` to its neighbours at offsets
    /// -1, 0, +1.
    fn blocks(&self, i: usize) -> [(Block6, Block6); 3] {
        let dx = self.grid.dx();
        let (l, r) = self.cells(i);
        let r1 = rot_matrix(Axis::X);
        let mut out = [([[0.0; D]; D], [[0.0; D]; D]); 3];
        let weights = [
            (self.mu[l], self.eps[l]),
            (self.mu[l] + self.mu[r], self.eps[l] + self.eps[r]),
            (self.mu[r], self.eps[r]),
        ];
        for (k, (wm, we)) in weights.iter().enumerate() {
            for c in 0..3 {
                out[k].0[c][c] = dx * wm;
                out[k].0[3 + c][3 + c] = dx * we;
            }
        }
        for (k, sign) in [(0, -1.0), (2, 1.0)] {
            for a in 0..3 {
                for b in 0..3 {
                    out[k].1[a][3 + b] = sign * self.dt * r1[a][b];
                    out[k].1[3 + a][b] = -sign * self.dt * r1[a][b];
                }
            }
        }
        out
    }

    /// `(med Z)_i` and `(curl Z)_i`.
    fn apply(&self, z: &[FieldPoint], i: usize) -> ([f64; D], [f64; D]) {
        let (im, ip) = self.neighbours(i);
        let blocks = self.blocks(i);
        let mut med = [0.0; D];
        let mut curl = [0.0; D];
        for (k, node) in [im, i, ip].into_iter().enumerate() {
            let v = z[node].to_array();
            for r in 0..D {
                for c in 0..D {
                    med[r] += blocks[k].0[r][c] * v[c];
                    curl[r] += blocks[k].1[r][c] * v[c];
                }
            }
        }
        (med, curl)
    }

    /// `-2 dx dt` times the source sums of the `H` (K) and `E` (J) rows.
    fn source(&self, sources: &SourceProfile, i: usize, t_centre: f64) -> [f64; D] {
        if sources.is_zero() {
            return [0.0; D];
        }
        let (dx, dt) = (self.grid.dx(), self.dt);
        let x = self.grid.node_x(i);
        let (mut j, mut k) = (Vec3::ZERO, Vec3::ZERO);
        for sx in [-0.5, 0.5] {
            for st in [-0.5, 0.5] {
                j += sources.j(x + sx * dx, t_centre + st * dt);
                k += sources.k(x + sx * dx, t_centre + st * dt);
            }
        }
        let f = -2.0 * dx * dt;
        let mut out = [0.0; D];
        out[..3].copy_from_slice(&(k * f).to_array());
        out[3..].copy_from_slice(&(j * f).to_array());
        out
    }

    /// Nodes carrying a stencil equation.
    fn rows(&self) -> std::ops::Range<usize> {
        if self.periodic {
            0..self.grid.nx()
        } else {
            1..self.grid.nx()
        }
    }
}

fn make_stencil(grid: &Grid1D, medium: &MediumProfile, dt: f64, periodic: bool) -> Result<Stencil> {
    medium.check_grid(grid)?;
    if grid.nx() < 2 {
        return Err(Error::Dimension("the nine-point stencil needs nx >= 2".into()));
    }
    Ok(Stencil {
        grid: *grid,
        dt,
        eps: medium.eps().to_vec(),
        mu: medium.mu().to_vec(),
        periodic,
    })
}

fn periodic_pos(node: usize, n: usize) -> usize {
    if 2 * node < n {
        2 * node
    } else {
        2 * (n - 1 - node) + 1
    }
}

/// `A`, `B`, `C` of `A Z^{j+2} = B Z^{j+1} + C Z^j + J` over the unknown
/// nodes in natural order (interior nodes on open grids, `0..nx` on
/// periodic ones). Boundary couplings of open grids are left out.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    pub a: BandedBlockMatrix,
    pub b: BandedBlockMatrix,
    pub c: BandedBlockMatrix,
}

pub fn assemble_system(grid: &Grid1D, medium: &MediumProfile, dt: f64, periodic: bool) -> Result<SystemMatrices> {
    let st = make_stencil(grid, medium, dt, periodic)?;
    let rows = st.rows();
    let n = rows.len();
    let bw = if periodic { n - 1 } else { 1 };
    let mut a = BandedBlockMatrix::new(D, n, bw, bw);
    let mut b = a.clone();
    let mut c = a.clone();
    let first = rows.start;
    for i in rows.clone() {
        let (im, ip) = st.neighbours(i);
        for (k, node) in [im, i, ip].into_iter().enumerate() {
            if !rows.contains(&node) {
                continue;
            }
            let (med, curl) = &st.blocks(i)[k];
            let to_vec = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
                (0..D).map(|r| (0..D).map(|q| f(r, q)).collect()).collect()
            };
            a.add_block(i - first, node - first, &to_vec(&|r, q| med[r][q] + curl[r][q]));
            b.add_block(i - first, node - first, &to_vec(&|r, q| -2.0 * curl[r][q]));
            c.add_block(i - first, node - first, &to_vec(&|r, q| med[r][q] - curl[r][q]));
        }
    }
    Ok(SystemMatrices { a, b, c })
}

/// Nine-point stepper with the factorised `A` cached.
#[derive(Clone)]
pub struct NinePointStepper {
    stencil: Stencil,
    sources: SourceProfile,
    bc: BoundaryCondition,
    matrix: BandedBlockMatrix,
}

impl NinePointStepper {
    pub fn new(
        grid: &Grid1D,
        medium: &MediumProfile,
        sources: SourceProfile,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        bc.validate(grid)?;
        Self::with_dt(grid, medium, sources, bc, grid.dt())
    }

    fn with_dt(
        grid: &Grid1D,
        medium: &MediumProfile,
        sources: SourceProfile,
        bc: BoundaryCondition,
        dt: f64,
    ) -> Result<Self> {
        let stencil = make_stencil(grid, medium, dt, bc.is_periodic())?;
        let rows = stencil.rows();
        let n = rows.len();
        let pos = |node: usize| {
            if stencil.periodic {
                periodic_pos(node, n)
            } else {
                node - 1
            }
        };
        let bw = if stencil.periodic { 2 } else { 1 }.min(n - 1);
        let mut matrix = BandedBlockMatrix::new(D, n, bw, bw);
        for i in rows.clone() {
            let (im, ip) = stencil.neighbours(i);
            let blocks = stencil.blocks(i);
            for (k, node) in [im, i, ip].into_iter().enumerate() {
                if !rows.contains(&node) {
                    continue;
                }
                for r in 0..D {
                    for c in 0..D {
                        matrix.add(D * pos(i) + r, D * pos(node) + c, blocks[k].0[r][c] + blocks[k].1[r][c]);
                    }
                }
            }
        }
        matrix.factorize()?;
        Ok(NinePointStepper {
            stencil,
            sources,
            bc,
            matrix,
        })
    }

    pub fn dt(&self) -> f64 {
        self.stencil.dt
    }

    /// Backward stepper; feed it states with `prev` and `curr` swapped.
    pub fn reversed(self) -> Result<Self> {
        let medium = MediumProfile::new(self.stencil.eps.clone(), self.stencil.mu.clone())?;
        Self::with_dt(&self.stencil.grid, &medium, self.sources, self.bc, -self.stencil.dt)
    }

    pub fn step(&mut self, state: &NinePointState) -> Result<NinePointState> {
        let st = &self.stencil;
        let grid = st.grid;
        check_nodes(&state.prev, &grid, |f| f.is_finite())?;
        check_nodes(&state.curr, &grid, |f| f.is_finite())?;
        let dir = if st.dt > 0.0 { 1 } else { -1 };
        let (level, time) = (state.level + dir, state.time + st.dt);
        let nx = grid.nx();
        let mut known = vec![FieldPoint::ZERO; grid.nodes()];
        if !st.periodic {
            for (right, node) in [(false, 0), (true, nx)] {
                known[node] = self
                    .bc
                    .field_value(right, grid.node_x(node), time, level)
                    .map_err(|e| e.at_step(level.unsigned_abs() as usize))?;
            }
        }
        let rows = st.rows();
        let n = rows.len();
        let mut rhs = vec![0.0; D * n];
        for i in rows.clone() {
            let (_, curl_cur) = st.apply(&state.curr, i);
            let (med_old, curl_old) = st.apply(&state.prev, i);
            let (med_b, curl_b) = st.apply(&known, i);
            let src = st.source(&self.sources, i, state.time);
            let p = if st.periodic { periodic_pos(i, n) } else { i - 1 };
            for r in 0..D {
                rhs[D * p + r] =
                    src[r] - 2.0 * curl_cur[r] - curl_old[r] + med_old[r] - med_b[r] - curl_b[r];
            }
        }
        let x = self
            .matrix
            .solve(&rhs)
            .map_err(|e| e.at_step(level.unsigned_abs() as usize))?;
        let mut next = known;
        for i in rows {
            let p = if st.periodic { periodic_pos(i, n) } else { i - 1 };
            next[i] = FieldPoint::from_array(x[D * p..D * p + D].try_into().expect("6 components"));
        }
        if st.periodic {
            next[nx] = next[0];
        }
        Ok(NinePointState {
            level,
            time,
            prev: state.curr.clone(),
            curr: next,
        })
    }
}

/// One nine-point step without factorisation reuse.
pub fn nine_point_step(
    state: &NinePointState,
    grid: &Grid1D,
    medium: &MediumProfile,
    sources: &SourceProfile,
    bc: &BoundaryCondition,
) -> Result<NinePointState> {
    NinePointStepper::new(grid, medium, sources.clone(), bc.clone())?.step(state)
}

/// Largest violation of the nine-point equations by three consecutive
/// levels (centre level at `t_centre`), and the largest term magnitude.
#[allow(clippy::too_many_arguments)]
pub fn nine_point_residual(
    old: &[FieldPoint],
    cur: &[FieldPoint],
    new: &[FieldPoint],
    grid: &Grid1D,
    medium: &MediumProfile,
    sources: &SourceProfile,
    dt: f64,
    t_centre: f64,
    periodic: bool,
) -> Result<(f64, f64)> {
    let st = make_stencil(grid, medium, dt, periodic)?;
    for level in [old, cur, new] {
        check_nodes(level, grid, |f| f.is_finite())?;
    }
    let (mut res, mut scale) = (0.0_f64, 0.0_f64);
    for i in st.rows() {
        let (m0, c0) = st.apply(old, i);
        let (_, c1) = st.apply(cur, i);
        let (m2, c2) = st.apply(new, i);
        let src = st.source(sources, i, t_centre);
        for r in 0..D {
            let terms = [m2[r], m0[r], c0[r], 2.0 * c1[r], c2[r], src[r]];
            res = res.max((m2[r] - m0[r] + c0[r] + 2.0 * c1[r] + c2[r] - src[r]).abs());
            scale = terms.iter().fold(scale, |s, v| s.max(v.abs()));
        }
    }
    Ok((res, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em_core::{exact_plane_wave, MediumSpec};
    use crate::schemes::Gauge;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn exact(g: &Grid1D, t: f64) -> Vec<FieldPoint> {
        (0..g.nodes()).map(|i| exact_plane_wave(g.node_x(i), t, 1.0, 1.0).unwrap()).collect()
    }

    #[test]
    fn constants_are_preserved() {
        let g = Grid1D::new(0.0, 2.0, 9, 0.1, 1).unwrap();
        let medium = "eps=2+sin(x);mu=1.5".parse::<MediumSpec>().unwrap().sample(&g).unwrap();
        let c = FieldPoint::new(Vec3::new(1.0, -2.0, 0.5), Vec3::new(0.25, 3.0, -1.0));
        let s = NinePointState {
            level: 1,
            time: 0.1,
            prev: vec![c; g.nodes()],
            curr: vec![c; g.nodes()],
        };
        let out = nine_point_step(&s, &g, &medium, &SourceProfile::zero(), &BoundaryCondition::Periodic).unwrap();
        assert!(out.curr.iter().all(|f| (*f - c).max_abs() < 1e-13));
        assert_eq!(out.prev, s.curr);
    }

    #[test]
    fn matrix_matches_stencil_for_random_vectors() {
        let g = Grid1D::new(0.0, 2.0, 4, 0.1, 1).unwrap();
        let medium = "eps=2+sin(x);mu=1.5-0.5cos(x)".parse::<MediumSpec>().unwrap().sample(&g).unwrap();
        let sys = assemble_system(&g, &medium, 0.1, true).unwrap();
        let st = make_stencil(&g, &medium, 0.1, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let z: Vec<FieldPoint> = (0..g.nodes())
                .map(|_| FieldPoint::from_array([(); 6].map(|_| rng.random_range(-1.0..1.0))))
                .collect();
            let flat: Vec<f64> = z[..4].iter().flat_map(|f| f.to_array()).collect();
            let az = sys.a.mul_vec(&flat);
            for i in 0..4 {
                let (m, c) = st.apply(&z, i);
                for r in 0..D {
                    let direct = m[r] + c[r];
                    assert!((az[D * i + r] - direct).abs() <= 1e-13 * direct.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn printed_block_pattern() {
        let g = Grid1D::new(0.0, 2.0, 4, 0.1, 1).unwrap();
        let medium = MediumSpec::vacuum().sample(&g).unwrap();
        let (dx, dt) = (0.5, 0.1);
        let sys = assemble_system(&g, &medium, dt, true).unwrap();
        let a01 = sys.a.block(0, 1);
        // H rows couple to E of the right neighbour through dt R_1
        assert_eq!(a01[1][5], -dt);
        assert_eq!(a01[2][4], dt);
        assert_eq!(a01[4][2], dt);
        assert_eq!(a01[5][1], -dt);
        assert!((a01[0][0] - dx).abs() < 1e-15);
        let a00 = sys.a.block(0, 0);
        assert!((a00[0][0] - 2.0 * dx).abs() < 1e-15);
        assert_eq!(a00[1][5], 0.0);
        for (r, c) in [(0, 0), (0, 1), (0, 3), (1, 0)] {
            let (ab, bb) = (sys.a.block(r, c), sys.b.block(r, c));
            for p in 0..D {
                for q in 0..D {
                    let curl = if (p < 3) != (q < 3) { ab[p][q] } else { 0.0 };
                    assert_eq!(bb[p][q], -2.0 * curl);
                    assert_eq!(sys.c.block(r, c)[p][q], ab[p][q] + bb[p][q]);
                }
            }
        }
    }

    #[test]
    fn reference_experiment_short_run_tracks_the_wave() {
        let len = 2.0 * PI + 3.0;
        let g = Grid1D::new(0.0, len, 61, 0.01, 10).unwrap();
        let medium = MediumSpec::vacuum().sample(&g).unwrap();
        let bc = BoundaryCondition::DirichletExact {
            eps: 1.0,
            mu: 1.0,
            gauge: Gauge::Analytic,
        };
        let mut st = NinePointStepper::new(&g, &medium, SourceProfile::zero(), bc).unwrap();
        let mut s = NinePointState {
            level: 1,
            time: 0.01,
            prev: exact(&g, 0.0),
            curr: exact(&g, 0.01),
        };
        for _ in 0..9 {
            s = st.step(&s).unwrap();
        }
        assert_eq!(s.level, 10);
        let ex = exact(&g, 0.1);
        let err = s.curr.iter().zip(&ex).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");
    }

    #[test]
    fn periodic_reversal() {
        let g = Grid1D::new(0.0, 2.0 * PI, 25, 0.05, 1).unwrap();
        let medium = "eps=1.5;mu=2+cos(x)".parse::<MediumSpec>().unwrap().sample(&g).unwrap();
        let s0 = NinePointState {
            level: 1,
            time: 0.05,
            prev: exact(&g, 0.0),
            curr: exact(&g, 0.05),
        };
        let mut st = NinePointStepper::new(&g, &medium, SourceProfile::zero(), BoundaryCondition::Periodic).unwrap();
        let mut s = s0.clone();
        for _ in 0..12 {
            s = st.step(&s).unwrap();
        }
        let mut back = st.reversed().unwrap();
        let mut r = NinePointState {
            level: s.level - 1,
            time: s.time - 0.05,
            prev: s.curr,
            curr: s.prev,
        };
        for _ in 0..12 {
            r = back.step(&r).unwrap();
        }
        // r.curr is level 0 and r.prev level 1
        let err0 = r.curr.iter().zip(&s0.prev).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max);
        let err1 = r.prev.iter().zip(&s0.curr).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max);
        assert!(err0 < 1e-9 && err1 < 1e-9, "{err0} {err1}");
    }

    #[test]
    fn missing_boundary_data_is_an_argument_error() {
        let g = Grid1D::new(0.0, 1.0, 8, 0.1, 1).unwrap();
        let medium = MediumSpec::vacuum().sample(&g).unwrap();
        let bc = BoundaryCondition::DirichletFixed {
            left: vec![],
            right: vec![],
        };
        let s = NinePointState {
            level: 1,
            time: 0.1,
            prev: vec![FieldPoint::ZERO; 9],
            curr: vec![FieldPoint::ZERO; 9],
        };
        let err = nine_point_step(&s, &g, &medium, &SourceProfile::zero(), &bc).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(matches!(err, Error::Step { ref source, .. } if matches!(**source, Error::Argument(_))));
    }
}
