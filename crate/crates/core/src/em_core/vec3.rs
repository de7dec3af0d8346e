use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Row-major 3x3 matrix.
pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("Vec3 component index {i} out of range"),
        }
    }
}

/// `m * v` for a row-major 3x3 matrix.
pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    Vec3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t[j][i] = *v;
        }
    }
    t
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

/// The physical field pair, ordered `(H, E)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldPoint {
    pub h: Vec3,
    pub e: Vec3,
}

impl FieldPoint {
    pub const ZERO: FieldPoint = FieldPoint {
        h: Vec3::ZERO,
        e: Vec3::ZERO,
    };

    pub fn new(h: Vec3, e: Vec3) -> Self {
        FieldPoint { h, e }
    }

    /// `[H1, H2, H3, E1, E2, E3]`.
    pub fn to_array(self) -> [f64; 6] {
        [self.h.x, self.h.y, self.h.z, self.e.x, self.e.y, self.e.z]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        FieldPoint {
            h: Vec3::new(a[0], a[1], a[2]),
            e: Vec3::new(a[3], a[4], a[5]),
        }
    }

    pub fn max_abs(self) -> f64 {
        self.h.max_abs().max(self.e.max_abs())
    }

    pub fn is_finite(self) -> bool {
        self.h.is_finite() && self.e.is_finite()
    }
}

impl Add for FieldPoint {
    type Output = FieldPoint;
    fn add(self, o: FieldPoint) -> FieldPoint {
        FieldPoint::new(self.h + o.h, self.e + o.e)
    }
}

impl Sub for FieldPoint {
    type Output = FieldPoint;
    fn sub(self, o: FieldPoint) -> FieldPoint {
        FieldPoint::new(self.h - o.h, self.e - o.e)
    }
}

impl Mul<f64> for FieldPoint {
    type Output = FieldPoint;
    fn mul(self, s: f64) -> FieldPoint {
        FieldPoint::new(self.h * s, self.e * s)
    }
}

/// Number of scalar unknowns in an [`ExtendedState`].
pub const STATE_DIM: usize = 18;

/// Block positions inside the flattened 18-vector `(H, E, V, U, P, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    H = 0,
    E = 1,
    V = 2,
    U = 3,
    P = 4,
    Q = 5,
}

impl Block {
    pub const ALL: [Block; 6] = [Block::H, Block::E, Block::V, Block::U, Block::P, Block::Q];

    /// Offset of the block's first scalar in the flattened state.
    pub fn offset(self) -> usize {
        3 * self as usize
    }
}

/// The six-field state of the Hamilton form: fields `H, E`, potentials
/// `V, U` with `V_t = H`, `U_t = E`, and conjugate momenta `P, Q`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtendedState {
    pub h: Vec3,
    pub e: Vec3,
    pub v: Vec3,
    pub u: Vec3,
    pub p: Vec3,
    pub q: Vec3,
}

impl ExtendedState {
    pub const ZERO: ExtendedState = ExtendedState {
        h: Vec3::ZERO,
        e: Vec3::ZERO,
        v: Vec3::ZERO,
        u: Vec3::ZERO,
        p: Vec3::ZERO,
        q: Vec3::ZERO,
    };

    pub fn block(&self, b: Block) -> Vec3 {
        match b {
            Block::H => self.h,
            Block::E => self.e,
            Block::V => self.v,
            Block::U => self.u,
            Block::P => self.p,
            Block::Q => self.q,
        }
    }

    pub fn block_mut(&mut self, b: Block) -> &mut Vec3 {
        match b {
            Block::H => &mut self.h,
            Block::E => &mut self.e,
            Block::V => &mut self.v,
            Block::U => &mut self.u,
            Block::P => &mut self.p,
            Block::Q => &mut self.q,
        }
    }

    pub fn fields(&self) -> FieldPoint {
        FieldPoint::new(self.h, self.e)
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        let mut out = [0.0; STATE_DIM];
        for b in Block::ALL {
            let v = self.block(b);
            out[b.offset()..b.offset() + 3].copy_from_slice(&v.to_array());
        }
        out
    }

    pub fn from_array(a: &[f64; STATE_DIM]) -> Self {
        let mut s = ExtendedState::ZERO;
        for b in Block::ALL {
            let o = b.offset();
            *s.block_mut(b) = Vec3::new(a[o], a[o + 1], a[o + 2]);
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        Block::ALL
            .iter()
            .map(|b| self.block(*b).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        Block::ALL.iter().all(|b| self.block(*b).is_finite())
    }
}

impl Add for ExtendedState {
    type Output = ExtendedState;
    fn add(self, o: ExtendedState) -> ExtendedState {
        let (a, b) = (self.to_array(), o.to_array());
        let mut c = [0.0; STATE_DIM];
        for k in 0..STATE_DIM {
            c[k] = a[k] + b[k];
        }
        ExtendedState::from_array(&c)
    }
}

impl Sub for ExtendedState {
    type Output = ExtendedState;
    fn sub(self, o: ExtendedState) -> ExtendedState {
        self + o * -1.0
    }
}

impl Mul<f64> for ExtendedState {
    type Output = ExtendedState;
    fn mul(self, s: f64) -> ExtendedState {
        let mut a = self.to_array();
        a.iter_mut().for_each(|v| *v *= s);
        ExtendedState::from_array(&a)
    }
}
