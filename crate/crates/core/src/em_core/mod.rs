//! Field, grid and medium data model, the curl algebra and the exact
//! plane-wave reference solution.

mod grid;
mod medium;
mod vec3;

pub use grid::Grid1D;
pub use medium::{Coefficient, MediumProfile, MediumSpec, Profile, SourceProfile, SourceSpec};
pub use vec3::{mat_vec, transpose, Block, ExtendedState, FieldPoint, Mat3, Vec3, STATE_DIM};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// The constant matrices `R_1, R_2, R_3` with `curl = R_1 d/dx + R_2 d/dy + R_3 d/dz`.
pub fn rot_matrix(axis: Axis) -> Mat3 {
    match axis {
        Axis::X => [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]],
        Axis::Y => [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        Axis::Z => [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
    }
}

/// `R_1 v`, the only curl direction of the 1+1D reduction.
pub fn rot_x(v: Vec3) -> Vec3 {
    Vec3::new(0.0, -v.z, v.y)
}

/// Vector samples on a periodic 3D grid, `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGrid3 {
    dims: [usize; 3],
    data: Vec<Vec3>,
}

impl VectorGrid3 {
    pub fn new(dims: [usize; 3], data: Vec<Vec3>) -> Result<Self> {
        if data.len() != dims.iter().product::<usize>() {
            return Err(Error::Dimension(format!(
                "{} samples do not fill a {:?} grid",
                data.len(),
                dims
            )));
        }
        Ok(VectorGrid3 { dims, data })
    }

    /// Samples `f` at `(i*h_x, j*h_y, k*h_z)`.
    pub fn sample(dims: [usize; 3], spacing: [f64; 3], f: impl Fn(f64, f64, f64) -> Vec3) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(
                        i as f64 * spacing[0],
                        j as f64 * spacing[1],
                        k as f64 * spacing[2],
                    ));
                }
            }
        }
        VectorGrid3 { dims, data }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.data[self.index(i, j, k)]
    }

    pub fn data(&self) -> &[Vec3] {
        &self.data
    }
}

/// Discrete curl `R_1 D_x + R_2 D_y + R_3 D_z` with periodic second-order
/// central differences.
pub fn curl_apply(field: &VectorGrid3, spacing: [f64; 3]) -> Result<VectorGrid3> {
    let [nx, ny, nz] = field.dims;
    if field.dims.iter().any(|&n| n < 4) {
        return Err(Error::Dimension(format!(
            "curl needs at least 4 nodes per axis, got {:?}",
            field.dims
        )));
    }
    let mut out = Vec::with_capacity(field.data.len());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let d = |plus: Vec3, minus: Vec3, h: f64| (plus - minus) * (0.5 / h);
                let dx = d(
                    field.get((i + 1) % nx, j, k),
                    field.get((i + nx - 1) % nx, j, k),
                    spacing[0],
                );
                let dy = d(
                    field.get(i, (j + 1) % ny, k),
                    field.get(i, (j + ny - 1) % ny, k),
                    spacing[1],
                );
                let dz = d(
                    field.get(i, j, (k + 1) % nz),
                    field.get(i, j, (k + nz - 1) % nz),
                    spacing[2],
                );
                out.push(
                    mat_vec(&rot_matrix(Axis::X), dx)
                        + mat_vec(&rot_matrix(Axis::Y), dy)
                        + mat_vec(&rot_matrix(Axis::Z), dz),
                );
            }
        }
    }
    Ok(VectorGrid3 {
        dims: field.dims,
        data: out,
    })
}

fn check_medium(eps: f64, mu: f64) -> Result<()> {
    if !(eps > 0.0 && mu > 0.0 && eps.is_finite() && mu.is_finite()) {
        return Err(Error::Domain(format!(
            "eps and mu must be positive and finite, got eps={eps}, mu={mu}"
        )));
    }
    Ok(())
}

/// Right-moving plane wave in a homogeneous medium:
/// `H_2 = -sqrt(eps/mu) sin(x - c t)`, `E_3 = sin(x - c t)`, `c = 1/sqrt(eps mu)`.
pub fn exact_plane_wave(x: f64, t: f64, eps: f64, mu: f64) -> Result<FieldPoint> {
    check_medium(eps, mu)?;
    let phase = x - t / (eps * mu).sqrt();
    let s = phase.sin();
    Ok(FieldPoint::new(
        Vec3::new(0.0, -(eps / mu).sqrt() * s, 0.0),
        Vec3::new(0.0, 0.0, s),
    ))
}

/// Potentials and momenta belonging to [`exact_plane_wave`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potentials {
    pub v: Vec3,
    pub u: Vec3,
    pub p: Vec3,
    pub q: Vec3,
}

/// Zero-mean time antiderivatives `V`, `U` of the plane wave (`V_t = H`,
/// `U_t = E`) and the momenta `P = mu H + curl(U)/2`, `Q = eps E - curl(V)/2`.
pub fn exact_potentials(x: f64, t: f64, eps: f64, mu: f64) -> Result<Potentials> {
    check_medium(eps, mu)?;
    let root = (eps * mu).sqrt();
    let phase = x - t / root;
    let (s, c) = phase.sin_cos();
    // V_2 = -eps cos(phase), U_3 = sqrt(eps mu) cos(phase); their x-derivatives
    // feed the curl terms of P and Q.
    let v = Vec3::new(0.0, -eps * c, 0.0);
    let u = Vec3::new(0.0, 0.0, root * c);
    let v_x = Vec3::new(0.0, eps * s, 0.0);
    let u_x = Vec3::new(0.0, 0.0, -root * s);
    let fields = exact_plane_wave(x, t, eps, mu)?;
    Ok(Potentials {
        v,
        u,
        p: fields.h * mu + rot_x(u_x) * 0.5,
        q: fields.e * eps - rot_x(v_x) * 0.5,
    })
}

/// Plane wave together with its potentials as a six-field state.
pub fn exact_extended(x: f64, t: f64, eps: f64, mu: f64) -> Result<ExtendedState> {
    let f = exact_plane_wave(x, t, eps, mu)?;
    let p = exact_potentials(x, t, eps, mu)?;
    Ok(ExtendedState {
        h: f.h,
        e: f.e,
        v: p.v,
        u: p.u,
        p: p.p,
        q: p.q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rot_x_matches_printed_r1() {
        assert_eq!(
            rot_matrix(Axis::X),
            [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]
        );
        assert_eq!(mat_vec(&rot_matrix(Axis::X), Vec3::new(1.0, 2.0, 3.0)), Vec3::new(0.0, -3.0, 2.0));
        assert_eq!(rot_x(Vec3::new(1.0, 2.0, 3.0)), Vec3::new(0.0, -3.0, 2.0));
    }

    #[test]
    fn rotation_matrices_are_antisymmetric() {
        for a in Axis::ALL {
            let r = rot_matrix(a);
            let t = transpose(&r);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(r[i][j] + t[i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn curl_of_constant_vanishes() {
        let g = VectorGrid3::sample([5, 6, 4], [0.3, 0.2, 0.1], |_, _, _| Vec3::new(1.0, -2.0, 0.5));
        let c = curl_apply(&g, [0.3, 0.2, 0.1]).unwrap();
        assert!(c.data().iter().all(|v| v.max_abs() == 0.0));
    }

    #[test]
    fn curl_of_shear_field_interior() {
        // F = (0, x, 0) is not periodic in x, so only interior nodes are exact.
        let h = 0.1;
        let g = VectorGrid3::sample([8, 8, 8], [h; 3], |x, _, _| Vec3::new(0.0, x, 0.0));
        let c = curl_apply(&g, [h; 3]).unwrap();
        for i in 1..7 {
            let v = c.get(i, 3, 3);
            assert!((v - Vec3::new(0.0, 0.0, 1.0)).max_abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn curl_rejects_tiny_grid() {
        let g = VectorGrid3::sample([3, 8, 8], [0.1; 3], |_, _, _| Vec3::ZERO);
        assert!(matches!(curl_apply(&g, [0.1; 3]), Err(Error::Dimension(_))));
    }

    #[test]
    fn curl_of_sine_converges_second_order() {
        let err = |n: usize| {
            let h = 2.0 * PI / n as f64;
            let g = VectorGrid3::sample([n; 3], [h; 3], |_, y, _| Vec3::new(y.sin(), 0.0, 0.0));
            let c = curl_apply(&g, [h; 3]).unwrap();
            let mut e: f64 = 0.0;
            for j in 0..n {
                let y = j as f64 * h;
                e = e.max((c.get(0, j, 0) - Vec3::new(0.0, 0.0, -y.cos())).max_abs());
            }
            e
        };
        let (e1, e2) = (err(16), err(32));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.05, "order {order}");
    }

    #[test]
    fn plane_wave_reference_values() {
        let f = exact_plane_wave(PI / 2.0, 0.0, 1.0, 1.0).unwrap();
        assert!((f.h - Vec3::new(0.0, -1.0, 0.0)).max_abs() < 1e-15);
        assert!((f.e - Vec3::new(0.0, 0.0, 1.0)).max_abs() < 1e-15);
        let f = exact_plane_wave(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        let f = exact_plane_wave(PI / 6.0, 0.0, 4.0, 1.0).unwrap();
        assert!((f.h.y + 1.0).abs() < 1e-15);
        assert!((f.e.z - 0.5).abs() < 1e-15);
        assert!(exact_plane_wave(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(exact_potentials(0.0, 0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn vacuum_potentials_are_minus_and_plus_cosine() {
        let (x, t) = (0.7, 0.3);
        let p = exact_potentials(x, t, 1.0, 1.0).unwrap();
        assert!((p.v.y + (x - t).cos()).abs() < 1e-15);
        assert!((p.u.z - (x - t).cos()).abs() < 1e-15);
        // at x = t: H = 0, U_x = 0, so P = 0 and Q = 0
        let p = exact_potentials(0.4, 0.4, 1.0, 1.0).unwrap();
        assert!(p.p.max_abs() < 1e-15 && p.q.max_abs() < 1e-15);
    }
}
