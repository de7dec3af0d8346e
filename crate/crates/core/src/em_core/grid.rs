use crate::error::{Error, Result};

/// Uniform space-time grid of the 1+1D schemes.
///
/// Node `i` sits at `x0 + i*dx` for `i = 0..=nx`; the half index `i+1/2`
/// is the midpoint of cell `i`. Time level `j` is at `j*dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x0: f64,
    length: f64,
    nx: usize,
    dx: f64,
    dt: f64,
    nt: usize,
}

impl Grid1D {
    pub fn new(x0: f64, length: f64, nx: usize, dt: f64, nt: usize) -> Result<Self> {
        if nx == 0 {
            return Err(Error::Dimension("nx must be at least 1".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("domain length must be positive, got {length}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        if !x0.is_finite() {
            return Err(Error::Domain("x0 must be finite".into()));
        }
        Ok(Grid1D {
            x0,
            length,
            nx,
            dx: length / nx as f64,
            dt,
            nt,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Cell count.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Node count, `nx + 1`.
    pub fn nodes(&self) -> usize {
        self.nx + 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn node_x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// Midpoint of cell `i`, i.e. `x_{i+1/2}`.
    pub fn mid_x(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn with_nt(mut self, nt: usize) -> Self {
        self.nt = nt;
        self
    }

    /// Same domain with `nx` doubled and `dt` halved (`nt` doubled).
    pub fn refined(&self) -> Self {
        Grid1D {
            x0: self.x0,
            length: self.length,
            nx: self.nx * 2,
            dx: self.length / (self.nx * 2) as f64,
            dt: self.dt / 2.0,
            nt: self.nt * 2,
        }
    }
}
