//! Discrete operator matrices of Maxwell's equations on periodic space-time
//! grids and the Vainberg self-adjointness test.
//!
//! Fields carry six components per node. For `G` and `G1` they are
//! `(H, E)`; for the second-order operator `G2` they are `(V, U)`. All
//! derivatives are periodic central differences, so summation by parts has
//! no boundary term and the test functional isolates the algebraic defect.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::em_core::{rot_matrix, Axis, Mat3, MediumSpec};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Components per node.
pub const NCOMP: usize = 6;

/// Periodic `N^3` spatial lattice on `[0, 2 pi)^3` times `nt` samples of a
/// periodic time window `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeGrid {
    n: usize,
    nt: usize,
}

impl SpaceTimeGrid {
    pub fn new(n: usize, nt: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::Dimension(format!("spatial grid needs N >= 8, got {n}")));
        }
        if nt < 4 {
            return Err(Error::Dimension(format!("time grid needs at least 4 samples, got {nt}")));
        }
        Ok(SpaceTimeGrid { n, nt })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn h(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn dt(&self) -> f64 {
        2.0 * PI / self.nt as f64
    }

    pub fn nodes(&self) -> usize {
        self.n * self.n * self.n * self.nt
    }

    pub fn len(&self) -> usize {
        NCOMP * self.nodes()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(3) * self.dt()
    }

    fn dims(&self) -> [usize; 4] {
        [self.n, self.n, self.n, self.nt]
    }

    fn node_index(&self, c: [usize; 4]) -> usize {
        c[0] + self.n * (c[1] + self.n * (c[2] + self.n * c[3]))
    }

    fn node_coords(&self, mut node: usize) -> [usize; 4] {
        let mut c = [0; 4];
        for (k, d) in self.dims().iter().enumerate() {
            c[k] = node % d;
            node /= d;
        }
        c
    }

    /// `(x, y, z, t)` of a node.
    pub fn position(&self, node: usize) -> [f64; 4] {
        let c = self.node_coords(node);
        [
            c[0] as f64 * self.h(),
            c[1] as f64 * self.h(),
            c[2] as f64 * self.h(),
            c[3] as f64 * self.dt(),
        ]
    }

    fn shifted(&self, node: usize, offset: [i32; 4]) -> usize {
        let mut c = self.node_coords(node);
        for (k, d) in self.dims().iter().enumerate() {
            c[k] = (c[k] as i64 + offset[k] as i64).rem_euclid(*d as i64) as usize;
        }
        self.node_index(c)
    }

    /// Samples a six-component field.
    pub fn sample(&self, f: impl Fn([f64; 4]) -> [f64; NCOMP]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for node in 0..self.nodes() {
            out.extend_from_slice(&f(self.position(node)));
        }
        out
    }
}

type ScalarFn = Arc<dyn Fn([f64; 4]) -> f64 + Send + Sync>;

/// `eps(x, y, z, t)`, `mu(x, y, z, t)` and their time derivatives.
#[derive(Clone)]
pub struct SpaceTimeMedium {
    pub label: String,
    eps: ScalarFn,
    mu: ScalarFn,
    eps_t: ScalarFn,
    mu_t: ScalarFn,
}

impl fmt::Debug for SpaceTimeMedium {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceTimeMedium").field("label", &self.label).finish()
    }
}

impl SpaceTimeMedium {
    pub fn from_spec(spec: &MediumSpec) -> Self {
        let (e, m) = (spec.eps, spec.mu);
        SpaceTimeMedium {
            label: spec.to_string(),
            eps: Arc::new(move |p| e.value(p[0])),
            mu: Arc::new(move |p| m.value(p[0])),
            eps_t: Arc::new(|_| 0.0),
            mu_t: Arc::new(|_| 0.0),
        }
    }

    /// Time-dependent medium with analytic time derivatives.
    pub fn from_fns(
        label: impl Into<String>,
        eps: impl Fn([f64; 4]) -> f64 + Send + Sync + 'static,
        mu: impl Fn([f64; 4]) -> f64 + Send + Sync + 'static,
        eps_t: impl Fn([f64; 4]) -> f64 + Send + Sync + 'static,
        mu_t: impl Fn([f64; 4]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SpaceTimeMedium {
            label: label.into(),
            eps: Arc::new(eps),
            mu: Arc::new(mu),
            eps_t: Arc::new(eps_t),
            mu_t: Arc::new(mu_t),
        }
    }

    pub fn eps(&self, p: [f64; 4]) -> f64 {
        (self.eps)(p)
    }

    pub fn mu(&self, p: [f64; 4]) -> f64 {
        (self.mu)(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `[[curl, -eps d_t], [mu d_t, curl]]` on `(H, E)`.
    G,
    /// `[[curl/eps, d_t], [-d_t, curl/mu]]` on `(H, E)`.
    G1,
    /// `[[mu d_tt, curl d_t], [-curl d_t, eps d_tt]]` on `(V, U)`.
    G2,
    /// Transpose of an assembled `G`.
    GAdjoint,
    /// Transpose of an assembled `G1`.
    G1Adjoint,
    /// Transpose of an assembled `G2`.
    G2Adjoint,
    /// Direct discretisation of the formal adjoint of `G`,
    /// `[[curl, -mu d_t - mu_t], [eps d_t + eps_t, curl]]`.
    GFormalAdjoint,
}

impl OperatorKind {
    fn adjoint(self) -> OperatorKind {
        use OperatorKind::*;
        match self {
            G => GAdjoint,
            GAdjoint => G,
            G1 => G1Adjoint,
            G1Adjoint => G1,
            G2 => G2Adjoint,
            G2Adjoint => G2,
            GFormalAdjoint => GFormalAdjoint,
        }
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" => Ok(OperatorKind::G),
            "G1" => Ok(OperatorKind::G1),
            "G2" => Ok(OperatorKind::G2),
            other => Err(Error::Argument(format!(
                "unknown operator kind `{other}` (expected G, G1 or G2)"
            ))),
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// `out[row] += coeff(node) * sum_taps w * in[col](node + offset)`.
#[derive(Clone)]
struct Term {
    row: usize,
    col: usize,
    coeff: Arc<Vec<f64>>,
    taps: Vec<([i32; 4], f64)>,
}

/// A linear map on sampled six-component space-time fields.
#[derive(Clone)]
pub struct GridOperator {
    kind: OperatorKind,
    medium: String,
    grid: SpaceTimeGrid,
    terms: Option<Vec<Term>>,
    matrix: Option<CsrMatrix>,
}

impl fmt::Debug for GridOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridOperator")
            .field("kind", &self.kind)
            .field("medium", &self.medium)
            .field("grid", &self.grid)
            .field("assembled", &self.matrix.is_some())
            .finish()
    }
}

fn unit(axis: usize, step: i32) -> [i32; 4] {
    let mut o = [0; 4];
    o[axis] = step;
    o
}

struct TermBuilder<'a> {
    grid: &'a SpaceTimeGrid,
    terms: Vec<Term>,
}

impl TermBuilder<'_> {
    fn coeff(&self, f: &dyn Fn([f64; 4]) -> f64) -> Arc<Vec<f64>> {
        Arc::new((0..self.grid.nodes()).map(|n| f(self.grid.position(n))).collect())
    }

    fn d1(&self, axis: usize) -> Vec<([i32; 4], f64)> {
        let h = if axis == 3 { self.grid.dt() } else { self.grid.h() };
        vec![(unit(axis, 1), 0.5 / h), (unit(axis, -1), -0.5 / h)]
    }

    fn d2t(&self) -> Vec<([i32; 4], f64)> {
        let w = 1.0 / (self.grid.dt() * self.grid.dt());
        vec![(unit(3, -1), w), ([0; 4], -2.0 * w), (unit(3, 1), w)]
    }

    /// Mixed `D_axis D_t`.
    fn dxt(&self, axis: usize) -> Vec<([i32; 4], f64)> {
        let w = 0.25 / (self.grid.h() * self.grid.dt());
        let mut taps = Vec::with_capacity(4);
        for (sa, st) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let mut o = unit(axis, sa);
            o[3] = st;
            taps.push((o, w * sa as f64 * st as f64));
        }
        taps
    }

    /// `scale(node) * sum_a R_a * taps_a` on the 3x3 block `(rb, cb)`.
    fn curl_block(
        &mut self,
        rb: usize,
        cb: usize,
        scale: &Arc<Vec<f64>>,
        taps: impl Fn(&Self, usize) -> Vec<([i32; 4], f64)>,
    ) {
        for axis in Axis::ALL {
            let r = rot_matrix(axis);
            let taps = taps(self, axis.index());
            for (i, row) in r.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if *v != 0.0 {
                        self.terms.push(Term {
                            row: 3 * rb + i,
                            col: 3 * cb + j,
                            coeff: Arc::new(scale.iter().map(|s| s * v).collect()),
                            taps: taps.clone(),
                        });
                    }
                }
            }
        }
    }

    /// `scale(node) * taps` on each diagonal entry of block `(rb, cb)`.
    fn diag_block(&mut self, rb: usize, cb: usize, scale: &Arc<Vec<f64>>, taps: Vec<([i32; 4], f64)>) {
        for i in 0..3 {
            self.terms.push(Term {
                row: 3 * rb + i,
                col: 3 * cb + i,
                coeff: scale.clone(),
                taps: taps.clone(),
            });
        }
    }
}

fn check_positive(grid: &SpaceTimeGrid, medium: &SpaceTimeMedium) -> Result<()> {
    for node in 0..grid.nodes() {
        let p = grid.position(node);
        let (e, m) = (medium.eps(p), medium.mu(p));
        if !(e > 0.0 && m > 0.0 && e.is_finite() && m.is_finite()) {
            return Err(Error::Domain(format!(
                "medium `{}` is not strictly positive at {p:?} (eps={e}, mu={m})",
                medium.label
            )));
        }
    }
    Ok(())
}

/// Central-difference discretisation of one of the operator matrices.
pub fn discretize_operator(
    kind: OperatorKind,
    medium: &SpaceTimeMedium,
    grid: &SpaceTimeGrid,
) -> Result<GridOperator> {
    check_positive(grid, medium)?;
    let mut b = TermBuilder {
        grid,
        terms: Vec::new(),
    };
    let one = b.coeff(&|_| 1.0);
    let eps = b.coeff(&|p| medium.eps(p));
    let mu = b.coeff(&|p| medium.mu(p));
    let neg = |v: &Arc<Vec<f64>>| Arc::new(v.iter().map(|x| -x).collect::<Vec<_>>());
    match kind {
        OperatorKind::G => {
            b.curl_block(0, 0, &one, |b, a| b.d1(a));
            b.diag_block(0, 1, &neg(&eps), b.d1(3));
            b.diag_block(1, 0, &mu, b.d1(3));
            b.curl_block(1, 1, &one, |b, a| b.d1(a));
        }
        OperatorKind::G1 => {
            let inv_eps = Arc::new(eps.iter().map(|v| 1.0 / v).collect::<Vec<_>>());
            let inv_mu = Arc::new(mu.iter().map(|v| 1.0 / v).collect::<Vec<_>>());
            b.curl_block(0, 0, &inv_eps, |b, a| b.d1(a));
            b.diag_block(0, 1, &one, b.d1(3));
            b.diag_block(1, 0, &neg(&one), b.d1(3));
            b.curl_block(1, 1, &inv_mu, |b, a| b.d1(a));
        }
        OperatorKind::G2 => {
            b.diag_block(0, 0, &mu, b.d2t());
            b.curl_block(0, 1, &one, |b, a| b.dxt(a));
            b.curl_block(1, 0, &neg(&one), |b, a| b.dxt(a));
            b.diag_block(1, 1, &eps, b.d2t());
        }
        OperatorKind::GFormalAdjoint => {
            let eps_t = b.coeff(&|p| (medium.eps_t)(p));
            let mu_t = b.coeff(&|p| (medium.mu_t)(p));
            b.curl_block(0, 0, &one, |b, a| b.d1(a));
            b.diag_block(0, 1, &neg(&mu), b.d1(3));
            b.diag_block(0, 1, &neg(&mu_t), vec![([0; 4], 1.0)]);
            b.diag_block(1, 0, &eps, b.d1(3));
            b.diag_block(1, 0, &eps_t, vec![([0; 4], 1.0)]);
            b.curl_block(1, 1, &one, |b, a| b.d1(a));
        }
        OperatorKind::GAdjoint | OperatorKind::G1Adjoint | OperatorKind::G2Adjoint => {
            return Err(Error::Argument(format!(
                "{kind} is obtained through adjoint_matrix, not discretised directly"
            )))
        }
    }
    Ok(GridOperator {
        kind,
        medium: medium.label.clone(),
        grid: *grid,
        terms: Some(b.terms),
        matrix: None,
    })
}

impl GridOperator {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn medium_label(&self) -> &str {
        &self.medium
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn matrix(&self) -> Option<&CsrMatrix> {
        self.matrix.as_ref()
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.grid.len() {
            return Err(Error::Dimension(format!(
                "field has {} values, operator grid expects {}",
                u.len(),
                self.grid.len()
            )));
        }
        if let Some(terms) = &self.terms {
            let mut out = vec![0.0; u.len()];
            for t in terms {
                for node in 0..self.grid.nodes() {
                    let c = t.coeff[node];
                    if c == 0.0 {
                        continue;
                    }
                    let s: f64 = t
                        .taps
                        .iter()
                        .map(|(o, w)| w * u[NCOMP * self.grid.shifted(node, *o) + t.col])
                        .sum();
                    out[NCOMP * node + t.row] += c * s;
                }
            }
            Ok(out)
        } else if let Some(m) = &self.matrix {
            Ok(m.mul_vec(u))
        } else {
            Err(Error::State("operator has neither stencil terms nor a matrix".into()))
        }
    }

    /// Explicit sparse matrix built from the stencil terms.
    pub fn assemble(mut self) -> Self {
        if self.matrix.is_none() {
            if let Some(terms) = &self.terms {
                let mut triplets = Vec::new();
                for t in terms {
                    for node in 0..self.grid.nodes() {
                        let c = t.coeff[node];
                        if c == 0.0 {
                            continue;
                        }
                        for (o, w) in &t.taps {
                            triplets.push((
                                NCOMP * node + t.row,
                                NCOMP * self.grid.shifted(node, *o) + t.col,
                                c * w,
                            ));
                        }
                    }
                }
                let n = self.grid.len();
                self.matrix = Some(CsrMatrix::from_triplets(n, n, &triplets));
            }
        }
        self
    }
}

/// Operator realised by the transpose of `op`'s assembled matrix.
pub fn adjoint_matrix(op: &GridOperator) -> Result<GridOperator> {
    let m = op
        .matrix
        .as_ref()
        .ok_or_else(|| Error::State(format!("{} has no assembled matrix", op.kind)))?;
    Ok(GridOperator {
        kind: op.kind.adjoint(),
        medium: op.medium.clone(),
        grid: op.grid,
        terms: None,
        matrix: Some(m.transpose()),
    })
}

/// Largest entry magnitude of each `(H|E row, H|E col)` 3x3 block family.
pub fn block_max_abs(m: &CsrMatrix) -> [[f64; 2]; 2] {
    let mut out = [[0.0_f64; 2]; 2];
    for (r, c, v) in m.iter() {
        let (rb, cb) = ((r % NCOMP) / 3, (c % NCOMP) / 3);
        out[rb][cb] = out[rb][cb].max(v.abs());
    }
    out
}

/// Central-difference Frechet probe `(N(u + h phi) - N(u - h phi)) / 2h`.
pub fn frechet_apply(
    op: impl Fn(&[f64]) -> Vec<f64>,
    u: &[f64],
    phi: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::Argument(format!("probe step must be positive, got {h}")));
    }
    if u.len() != phi.len() {
        return Err(Error::Dimension("state and direction lengths differ".into()));
    }
    let plus: Vec<f64> = u.iter().zip(phi).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = u.iter().zip(phi).map(|(a, b)| a - h * b).collect();
    let (np, nm) = (op(&plus), op(&minus));
    Ok(np.iter().zip(&nm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VainbergDefect {
    /// `S(psi, phi) - S(phi, psi)`.
    pub defect: f64,
    /// Sum of absolute pointwise contributions to both functionals.
    pub scale: f64,
}

impl VainbergDefect {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.defect.abs() / self.scale
        }
    }
}

/// Vainberg test functional asymmetry with the grid Riemann sum as quadrature.
pub fn vainberg_defect(op: &GridOperator, psi: &[f64], phi: &[f64]) -> Result<VainbergDefect> {
    let n = op.grid.len();
    if psi.len() != n || phi.len() != n {
        return Err(Error::Dimension(format!(
            "test fields must have {n} values, got {} and {}",
            psi.len(),
            phi.len()
        )));
    }
    let vol = op.grid.cell_volume();
    let op_phi = op.apply(phi)?;
    let op_psi = op.apply(psi)?;
    let (mut s1, mut s2, mut scale) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (a, b) = (psi[k] * op_phi[k], phi[k] * op_psi[k]);
        s1 += a;
        s2 += b;
        scale += a.abs() + b.abs();
    }
    Ok(VainbergDefect {
        defect: vol * (s1 - s2),
        scale: vol * scale,
    })
}

/// The defect matrix of the `curl/eps` block for `g = grad(1/eps)`:
/// `A v = -g x v`.
pub fn defect_matrix(g: [f64; 3]) -> Mat3 {
    [[0.0, g[2], -g[1]], [-g[2], 0.0, g[0]], [g[1], -g[0], 0.0]]
}

/// `sum psi_H^T A phi_H + psi_E^T B phi_E` over the grid, where `A`, `B` are
/// the defect matrices of `grad(1/eps)` and `grad(1/mu)`.
pub fn ab_quadratic_form(
    grid: &SpaceTimeGrid,
    grad_inv_eps: impl Fn([f64; 4]) -> [f64; 3],
    grad_inv_mu: impl Fn([f64; 4]) -> [f64; 3],
    psi: &[f64],
    phi: &[f64],
) -> Result<f64> {
    if psi.len() != grid.len() || phi.len() != grid.len() {
        return Err(Error::Dimension("test fields do not match the grid".into()));
    }
    let mut sum = 0.0;
    for node in 0..grid.nodes() {
        let p = grid.position(node);
        let base = NCOMP * node;
        for (block, g) in [(0, grad_inv_eps(p)), (1, grad_inv_mu(p))] {
            let a = defect_matrix(g);
            for i in 0..3 {
                for j in 0..3 {
                    sum += psi[base + 3 * block + i] * a[i][j] * phi[base + 3 * block + j];
                }
            }
        }
    }
    Ok(sum * grid.cell_volume())
}

/// `grad(1/c)` for an `x`-dependent coefficient of a [`MediumSpec`].
pub fn grad_inverse(c: crate::em_core::Coefficient) -> impl Fn([f64; 4]) -> [f64; 3] {
    move |p| {
        let v = c.value(p[0]);
        [-c.derivative(p[0]) / (v * v), 0.0, 0.0]
    }
}

/// Smooth periodic test field: a few random Fourier modes per component with
/// wavenumbers up to `max_mode` in every direction.
pub fn fourier_field(grid: &SpaceTimeGrid, seed: u64, max_mode: i32) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<Vec<([f64; 4], f64, f64)>> = (0..NCOMP)
        .map(|_| {
            (0..4)
                .map(|_| {
                    let k = [(); 4].map(|_| rng.random_range(-max_mode..=max_mode) as f64);
                    (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI))
                })
                .collect()
        })
        .collect();
    grid.sample(|p| {
        let mut v = [0.0; NCOMP];
        for (c, comp_modes) in modes.iter().enumerate() {
            v[c] = comp_modes
                .iter()
                .map(|(k, a, ph)| a * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2] + k[3] * p[3] + ph).cos())
                .sum();
        }
        v
    })
}
