//! The multisymplectic Hamiltonian form `M Z_t + K_1 Z_x + K_2 Z_y + K_3 Z_z = grad S(Z)`
//! of Maxwell's equations in potential form, with the Lagrangian densities
//! that generate it.
//!
//! States are flattened in block order `(H, E, V, U, P, Q)`; see
//! [`Block`](crate::em_core::Block).

use crate::em_core::{rot_matrix, rot_x, Axis, Block, ExtendedState, Vec3, STATE_DIM};
use crate::error::{Error, Result};

pub type Mat18 = [[f64; STATE_DIM]; STATE_DIM];

/// The skew matrices `M` and `K_1, K_2, K_3`.
#[derive(Debug, Clone, PartialEq)]
pub struct MsStructure {
    pub m: Mat18,
    pub k: [Mat18; 3],
}

impl MsStructure {
    pub fn k1(&self) -> &Mat18 {
        &self.k[0]
    }

    /// The 3x3 block at `(row, col)` of `mat`.
    pub fn block(mat: &Mat18, row: Block, col: Block) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, r) in out.iter_mut().enumerate() {
            for (j, v) in r.iter_mut().enumerate() {
                *v = mat[row.offset() + i][col.offset() + j];
            }
        }
        out
    }
}

fn set_block(mat: &mut Mat18, row: Block, col: Block, scale: f64, b: &[[f64; 3]; 3]) {
    for i in 0..3 {
        for j in 0..3 {
            mat[row.offset() + i][col.offset() + j] = scale * b[i][j];
        }
    }
}

const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn assemble_ms_structure() -> MsStructure {
    let mut m = [[0.0; STATE_DIM]; STATE_DIM];
    set_block(&mut m, Block::V, Block::P, -1.0, &IDENTITY);
    set_block(&mut m, Block::U, Block::Q, -1.0, &IDENTITY);
    set_block(&mut m, Block::P, Block::V, 1.0, &IDENTITY);
    set_block(&mut m, Block::Q, Block::U, 1.0, &IDENTITY);

    let k = Axis::ALL.map(|axis| {
        let r = rot_matrix(axis);
        let mut k = [[0.0; STATE_DIM]; STATE_DIM];
        set_block(&mut k, Block::H, Block::U, 0.5, &r);
        set_block(&mut k, Block::E, Block::V, -0.5, &r);
        set_block(&mut k, Block::V, Block::E, -0.5, &r);
        set_block(&mut k, Block::U, Block::H, 0.5, &r);
        k
    });
    MsStructure { m, k }
}

pub fn mat18_vec(m: &Mat18, v: &[f64; STATE_DIM]) -> [f64; STATE_DIM] {
    let mut out = [0.0; STATE_DIM];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

fn bilinear(xi: &[f64; STATE_DIM], m: &Mat18, eta: &[f64; STATE_DIM]) -> f64 {
    xi.iter().zip(mat18_vec(m, eta)).map(|(a, b)| a * b).sum()
}

/// Covariant Hamiltonian
/// `S = <P,H> + <Q,E> - mu|H|^2/2 - eps|E|^2/2 + <U,J> + <V,K>`.
pub fn covariant_hamiltonian(z: &ExtendedState, eps: f64, mu: f64, j: Vec3, k: Vec3) -> f64 {
    z.p.dot(z.h) + z.q.dot(z.e) - 0.5 * mu * z.h.norm_sq() - 0.5 * eps * z.e.norm_sq()
        + z.u.dot(j)
        + z.v.dot(k)
}

/// Gradient of [`covariant_hamiltonian`], flattened in block order.
pub fn grad_s(z: &ExtendedState, eps: f64, mu: f64, j: Vec3, k: Vec3) -> [f64; STATE_DIM] {
    ExtendedState {
        h: z.p - z.h * mu,
        e: z.q - z.e * eps,
        v: k,
        u: j,
        p: z.h,
        q: z.e,
    }
    .to_array()
}

/// An extended state sampled on a uniform `(x, t)` lattice, `x` fastest.
#[derive(Debug, Clone)]
pub struct SampledExtended {
    pub x0: f64,
    pub dx: f64,
    pub t0: f64,
    pub dt: f64,
    pub nx: usize,
    pub nt: usize,
    pub data: Vec<ExtendedState>,
}

impl SampledExtended {
    pub fn sample(
        (x0, dx, nx): (f64, f64, usize),
        (t0, dt, nt): (f64, f64, usize),
        f: impl Fn(f64, f64) -> ExtendedState,
    ) -> Self {
        let mut data = Vec::with_capacity(nx * nt);
        for j in 0..nt {
            for i in 0..nx {
                data.push(f(x0 + i as f64 * dx, t0 + j as f64 * dt));
            }
        }
        SampledExtended {
            x0,
            dx,
            t0,
            dt,
            nx,
            nt,
            data,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &ExtendedState {
        &self.data[i + self.nx * j]
    }
}

/// Residual of the 1+1D Hamilton form at the interior samples
/// (`2 <= i < nx-2`, `2 <= j < nt-2`).
#[derive(Debug, Clone)]
pub struct PdeResidual {
    pub nx: usize,
    pub nt: usize,
    /// Row-major over interior `(j, i)`.
    pub values: Vec<[f64; STATE_DIM]>,
}

impl PdeResidual {
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

fn d4(f: impl Fn(isize) -> [f64; STATE_DIM], h: f64) -> [f64; STATE_DIM] {
    let (m2, m1, p1, p2) = (f(-2), f(-1), f(1), f(2));
    let mut out = [0.0; STATE_DIM];
    for k in 0..STATE_DIM {
        out[k] = (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h);
    }
    out
}

/// `M D_t Z + K_1 D_x Z - grad S(Z)` with fourth-order central differences.
pub fn pde_residual(
    field: &SampledExtended,
    structure: &MsStructure,
    eps: impl Fn(f64) -> f64,
    mu: impl Fn(f64) -> f64,
    sources: &crate::em_core::SourceProfile,
) -> Result<PdeResidual> {
    if field.nx < 5 || field.nt < 5 {
        return Err(Error::Dimension(format!(
            "residual probe needs at least 5 samples per axis, got {}x{}",
            field.nx, field.nt
        )));
    }
    if field.data.len() != field.nx * field.nt {
        return Err(Error::Dimension("sample count does not match nx*nt".into()));
    }
    let mut values = Vec::with_capacity((field.nx - 4) * (field.nt - 4));
    for j in 2..field.nt - 2 {
        for i in 2..field.nx - 2 {
            let x = field.x0 + i as f64 * field.dx;
            let t = field.t0 + j as f64 * field.dt;
            let zt = d4(
                |o| field.at(i, (j as isize + o) as usize).to_array(),
                field.dt,
            );
            let zx = d4(
                |o| field.at((i as isize + o) as usize, j).to_array(),
                field.dx,
            );
            let mzt = mat18_vec(&structure.m, &zt);
            let kzx = mat18_vec(structure.k1(), &zx);
            let g = grad_s(field.at(i, j), eps(x), mu(x), sources.j(x, t), sources.k(x, t));
            let mut r = [0.0; STATE_DIM];
            for k in 0..STATE_DIM {
                r[k] = mzt[k] + kzx[k] - g[k];
            }
            values.push(r);
        }
    }
    Ok(PdeResidual {
        nx: field.nx - 4,
        nt: field.nt - 4,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagrangianVariant {
    /// First-order Lagrangian for `eps = mu`, both time independent.
    L1,
    /// First-order Lagrangian for spatially constant `eps`, `mu`.
    L2,
    /// Second-order (potential) Lagrangian in `V`, `U`.
    Potential,
}

/// Pointwise inputs for [`lagrangian_density`]. Derivative samples are
/// optional; each variant lists the ones it needs.
#[derive(Debug, Clone, Copy, Default)]
pub struct LagrangianInputs {
    pub h: Vec3,
    pub e: Vec3,
    pub v: Vec3,
    pub u: Vec3,
    pub curl_h: Option<Vec3>,
    pub curl_e: Option<Vec3>,
    pub e_t: Option<Vec3>,
    pub v_t: Option<Vec3>,
    pub u_t: Option<Vec3>,
    pub curl_u: Option<Vec3>,
    pub curl_v: Option<Vec3>,
    pub eps: f64,
    pub mu: f64,
    pub j: Vec3,
    pub k: Vec3,
}

fn need(v: Option<Vec3>, name: &str, variant: LagrangianVariant) -> Result<Vec3> {
    v.ok_or_else(|| Error::Argument(format!("{variant:?} Lagrangian needs `{name}`")))
}

/// Lagrangian density of the chosen variant. Medium restrictions of `L1`
/// (`eps = mu`) and `L2` (constant coefficients) are the caller's concern.
pub fn lagrangian_density(variant: LagrangianVariant, f: &LagrangianInputs) -> Result<f64> {
    use LagrangianVariant::*;
    Ok(match variant {
        L1 => {
            let (ch, ce, et) = (
                need(f.curl_h, "curl_h", variant)?,
                need(f.curl_e, "curl_e", variant)?,
                need(f.e_t, "e_t", variant)?,
            );
            0.5 * f.h.dot(ch) + 0.5 * f.e.dot(ce) - f.mu * f.h.dot(et) - f.h.dot(f.j) + f.e.dot(f.k)
        }
        L2 => {
            let (ch, ce, et) = (
                need(f.curl_h, "curl_h", variant)?,
                need(f.curl_e, "curl_e", variant)?,
                need(f.e_t, "e_t", variant)?,
            );
            f.h.dot(ch) / (2.0 * f.eps) + f.e.dot(ce) / (2.0 * f.mu) - f.h.dot(et)
                - f.h.dot(f.j) / f.eps
                + f.e.dot(f.k) / f.mu
        }
        Potential => {
            let (vt, ut, cu, cv) = (
                need(f.v_t, "v_t", variant)?,
                need(f.u_t, "u_t", variant)?,
                need(f.curl_u, "curl_u", variant)?,
                need(f.curl_v, "curl_v", variant)?,
            );
            0.5 * f.mu * vt.norm_sq() + 0.5 * vt.dot(cu) + 0.5 * f.eps * ut.norm_sq()
                - 0.5 * ut.dot(cv)
                - f.u.dot(f.j)
                - f.v.dot(f.k)
        }
    })
}

/// Conjugate momenta of the potential Lagrangian:
/// `P = mu V_t + curl(U)/2`, `Q = eps U_t - curl(V)/2`.
pub fn legendre_momenta(
    v_t: Vec3,
    u_t: Vec3,
    curl_u: Vec3,
    curl_v: Vec3,
    eps: f64,
    mu: f64,
) -> (Vec3, Vec3) {
    (v_t * mu + curl_u * 0.5, u_t * eps - curl_v * 0.5)
}

/// Values of the presymplectic forms on a pair of tangent vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoFormValue {
    pub omega: f64,
    pub kappa: f64,
}

/// `omega = xi^T M eta`, `kappa = xi^T K_1 eta`.
///
/// The wedge product evaluated on a pair counts each term twice, which
/// cancels the factor 1/2 in `omega = dZ ^ M dZ / 2`.
pub fn two_forms(
    xi: &[f64; STATE_DIM],
    eta: &[f64; STATE_DIM],
    structure: &MsStructure,
) -> TwoFormValue {
    TwoFormValue {
        omega: bilinear(xi, &structure.m, eta),
        kappa: bilinear(xi, structure.k1(), eta),
    }
}

/// `R_1`-weighted wedge `a^T R_1 b`, the 1+1D curl pairing.
pub fn rot_wedge(a: Vec3, b: Vec3) -> f64 {
    a.dot(rot_x(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em_core::transpose;

    fn e(block: Block, comp: usize) -> [f64; STATE_DIM] {
        let mut v = [0.0; STATE_DIM];
        v[block.offset() + comp] = 1.0;
        v
    }

    #[test]
    fn structure_blocks_match_layout() {
        let s = assemble_ms_structure();
        assert_eq!(MsStructure::block(&s.m, Block::P, Block::V), IDENTITY);
        let half_r1 = rot_matrix(Axis::X).map(|r| r.map(|v| 0.5 * v));
        assert_eq!(MsStructure::block(s.k1(), Block::H, Block::U), half_r1);
        // nothing outside the listed pairs
        for (r, c) in [(Block::H, Block::H), (Block::H, Block::P), (Block::P, Block::Q)] {
            assert_eq!(MsStructure::block(&s.m, r, c), [[0.0; 3]; 3]);
            assert_eq!(MsStructure::block(s.k1(), r, c), [[0.0; 3]; 3]);
        }
    }

    #[test]
    fn structure_matrices_are_skew() {
        let s = assemble_ms_structure();
        for mat in std::iter::once(&s.m).chain(s.k.iter()) {
            for i in 0..STATE_DIM {
                for j in 0..STATE_DIM {
                    assert_eq!(mat[i][j] + mat[j][i], 0.0);
                }
            }
        }
        // and the curl blocks are built from the rotation matrices
        let r2 = rot_matrix(Axis::Y);
        assert_eq!(
            MsStructure::block(&s.k[1], Block::V, Block::E),
            r2.map(|r| r.map(|v| -0.5 * v))
        );
        assert_eq!(transpose(&r2), r2.map(|r| r.map(|v| -v)));
    }

    #[test]
    fn grad_s_reference_values() {
        let z = ExtendedState {
            h: Vec3::new(1.0, 0.0, 0.0),
            p: Vec3::new(2.0, 0.0, 0.0),
            ..ExtendedState::ZERO
        };
        let g = ExtendedState::from_array(&grad_s(&z, 1.0, 1.0, Vec3::ZERO, Vec3::ZERO));
        assert_eq!(g.h, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(g.p, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(g.e, Vec3::ZERO);
        assert_eq!(g.v, Vec3::ZERO);
        assert_eq!(g.q, Vec3::ZERO);
        let g0 = grad_s(&ExtendedState::ZERO, 2.0, 3.0, Vec3::ZERO, Vec3::ZERO);
        assert!(g0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn momenta_reference_values() {
        let (p, q) = legendre_momenta(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::ZERO,
            Vec3::ZERO,
            Vec3::ZERO,
            1.0,
            3.0,
        );
        assert_eq!(p, Vec3::new(3.0, 0.0, 0.0));
        assert_eq!(q, Vec3::ZERO);
        let (_, q) = legendre_momenta(
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, 2.0),
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, 1.0),
            0.5,
            1.0,
        );
        assert_eq!(q, Vec3::new(0.0, 0.0, 0.5));
    }

    #[test]
    fn lagrangian_simple_values() {
        let inputs = LagrangianInputs {
            v_t: Some(Vec3::new(0.0, 1.0, 0.0)),
            u_t: Some(Vec3::ZERO),
            curl_u: Some(Vec3::ZERO),
            curl_v: Some(Vec3::ZERO),
            eps: 1.0,
            mu: 2.0,
            ..Default::default()
        };
        assert_eq!(lagrangian_density(LagrangianVariant::Potential, &inputs).unwrap(), 1.0);
        let l2 = LagrangianInputs {
            curl_h: Some(Vec3::new(1.0, 2.0, 3.0)),
            curl_e: Some(Vec3::new(1.0, 2.0, 3.0)),
            e_t: Some(Vec3::new(1.0, 0.0, 0.0)),
            eps: 2.0,
            mu: 1.0,
            ..Default::default()
        };
        assert_eq!(lagrangian_density(LagrangianVariant::L2, &l2).unwrap(), 0.0);
    }

    #[test]
    fn lagrangian_missing_derivative_is_an_argument_error() {
        let inputs = LagrangianInputs {
            eps: 1.0,
            mu: 1.0,
            ..Default::default()
        };
        for v in [
            LagrangianVariant::L1,
            LagrangianVariant::L2,
            LagrangianVariant::Potential,
        ] {
            assert!(matches!(lagrangian_density(v, &inputs), Err(Error::Argument(_))));
        }
    }

    #[test]
    fn two_forms_on_basis_pairs() {
        let s = assemble_ms_structure();
        let xi = e(Block::V, 0);
        let eta = e(Block::P, 0);
        // xi^T M eta picks the (V, P) block of M, which is -I.
        assert_eq!(two_forms(&xi, &eta, &s).omega, -1.0);
        assert_eq!(two_forms(&eta, &xi, &s).omega, 1.0);
        let same = two_forms(&xi, &xi, &s);
        assert_eq!((same.omega, same.kappa), (0.0, 0.0));
        // kappa pairs the (H, U) blocks through R_1/2: e_2^T (R_1/2) e_3 = -1/2
        let k = two_forms(&e(Block::H, 1), &e(Block::U, 2), &s).kappa;
        assert_eq!(k, -0.5);
    }

    #[test]
    fn residual_rejects_coarse_grid() {
        let f = SampledExtended::sample((0.0, 0.1, 4), (0.0, 0.1, 8), |_, _| ExtendedState::ZERO);
        let s = assemble_ms_structure();
        let r = pde_residual(&f, &s, |_| 1.0, |_| 1.0, &Default::default());
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn residual_of_zero_state_is_exactly_zero() {
        let f = SampledExtended::sample((0.0, 0.1, 7), (0.0, 0.1, 7), |_, _| ExtendedState::ZERO);
        let s = assemble_ms_structure();
        let r = pde_residual(&f, &s, |_| 2.0, |_| 3.0, &Default::default()).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn residual_responds_linearly_to_h_perturbation() {
        let (eps, mu, delta) = (1.5, 2.0, 1e-3);
        let base = |x: f64, t: f64| crate::em_core::exact_extended(x, t, eps, mu).unwrap();
        let s = assemble_ms_structure();
        let grid = ((0.0, 1e-3, 9), (0.0, 1e-3, 9));
        let f0 = SampledExtended::sample(grid.0, grid.1, base);
        let f1 = SampledExtended::sample(grid.0, grid.1, |x, t| {
            let mut z = base(x, t);
            z.h.x += delta;
            z
        });
        let r0 = pde_residual(&f0, &s, |_| eps, |_| mu, &Default::default()).unwrap();
        let r1 = pde_residual(&f1, &s, |_| eps, |_| mu, &Default::default()).unwrap();
        // the H row is -(P - mu H), so it rises by mu * delta
        let d = r1.values[0][0] - r0.values[0][0];
        assert!((d - mu * delta).abs() < 1e-12, "{d}");
    }
}
