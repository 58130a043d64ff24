//! Lattice geometry of the anisotropic torus.
//!
//! Fields live on the standard torus `[0, 2pi)^d`; the anisotropy of the
//! physical domain survives as a weight vector `a` (the squared side ratios,
//! `a_k = nu_k^2`) entering the Fourier symbol
//!
//! ```text
//! |j|^2_a = sum_k a_k j_k^2 ,    j in Z^d \ {0}.
//! ```
//!
//! Everything downstream (dispersion relation, divisor scans, coefficient
//! tables) indexes by nonzero integer modes `j`; the zero mode is handled
//! separately by the gauge reduction.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coord = i32;

/// Anisotropic torus: dimension `d` and weights `a = nu^2`, one per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusShape {
    a: Vec<f64>,
}

impl TorusShape {
    /// A shape inside the working window `a_k in (1, 4)`.
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::BadShape("dimension must be >= 1".into()));
        }
        for &ak in &a {
            if !(ak > 1.0 && ak < 4.0) {
                return Err(Error::BadShape(format!(
                    "a_k = {ak} outside (1, 4); use `relaxed` for diagnostic shapes"
                )));
            }
        }
        Ok(Self { a })
    }

    /// Any positive weights. Diagnostic shapes (isotropic, boundary) live
    /// outside the generic window and are accepted here so that resonance
    /// reporting can exercise them.
    pub fn relaxed(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::BadShape("dimension must be >= 1".into()));
        }
        for &ak in &a {
            if !(ak > 0.0) {
                return Err(Error::BadShape(format!("a_k = {ak} must be positive")));
            }
        }
        Ok(Self { a })
    }

    /// The square torus `a = (1, ..., 1)`.
    pub fn isotropic(d: usize) -> Self {
        Self { a: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// True when every weight sits strictly inside the generic window.
    pub fn in_generic_window(&self) -> bool {
        self.a.iter().all(|&ak| ak > 1.0 && ak < 4.0)
    }
}

/// Nonzero integer mode on the lattice.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    c: SmallVec<[Coord; 3]>,
}

impl LatticePoint {
    pub fn new(coords: &[Coord]) -> Result<Self> {
        if coords.iter().all(|&x| x == 0) {
            return Err(Error::ZeroMode);
        }
        Ok(Self {
            c: SmallVec::from_slice(coords),
        })
    }

    /// Construct without the nonzero check; internal use where the caller
    /// has already excluded the origin.
    pub(crate) fn new_unchecked(coords: &[Coord]) -> Self {
        debug_assert!(coords.iter().any(|&x| x != 0));
        Self {
            c: SmallVec::from_slice(coords),
        }
    }

    pub fn coords(&self) -> &[Coord] {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn neg(&self) -> Self {
        Self {
            c: self.c.iter().map(|&x| -x).collect(),
        }
    }

    /// Squared Euclidean norm `|j|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|&x| (x as f64) * (x as f64)).sum()
    }

    /// Exact integer `|j|^2`, for comparisons and canonical orderings.
    pub fn norm_sq_int(&self) -> i64 {
        self.c.iter().map(|&x| (x as i64) * (x as i64)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Sup norm `max_k |j_k|`.
    pub fn sup_norm(&self) -> Coord {
        self.c.iter().map(|&x| x.abs()).max().unwrap_or(0)
    }
}

impl std::fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.c.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// `|j|^2_a = sum_k a_k j_k^2`; strictly positive for nonzero `j`.
pub fn anisotropic_norm_sq(j: &LatticePoint, shape: &TorusShape) -> f64 {
    j.coords()
        .iter()
        .zip(shape.a())
        .map(|(&jk, &ak)| ak * (jk as f64) * (jk as f64))
        .sum()
}

/// `<j> = sqrt(1 + |j|^2)`.
pub fn japanese_bracket(j: &LatticePoint) -> f64 {
    (1.0 + j.norm_sq()).sqrt()
}

/// Sobolev weight `<j>^{2s} = (1 + |j|^2)^s`.
pub fn sobolev_weight(j: &LatticePoint, s: f64) -> f64 {
    (1.0 + j.norm_sq()).powf(s)
}

/// All nonzero modes in the box `max_k |j_k| <= j_max`, in lexicographic
/// order. The ordering is part of the contract: coefficient tables built
/// from the ball are reproducible bit for bit.
pub fn ball(j_max: Coord, shape: &TorusShape) -> Vec<LatticePoint> {
    assert!(j_max >= 1, "j_max must be >= 1");
    let d = shape.dim();
    let side = (2 * j_max + 1) as usize;
    let total = side.pow(d as u32);
    let mut points = Vec::with_capacity(total - 1);
    let mut coords = vec![-j_max; d];
    'outer: loop {
        if coords.iter().any(|&x| x != 0) {
            points.push(LatticePoint::new_unchecked(&coords));
        }
        // lexicographic increment
        for k in (0..d).rev() {
            if coords[k] < j_max {
                coords[k] += 1;
                continue 'outer;
            }
            coords[k] = -j_max;
        }
        break;
    }
    points
}

/// Descending Euclidean norms `(mu_1, mu_2, mu_3)` of a triple, with
/// multiplicities respected.
pub fn mu_ordering(j1: &LatticePoint, j2: &LatticePoint, j3: &LatticePoint) -> (f64, f64, f64) {
    let mut mu = [j1.norm(), j2.norm(), j3.norm()];
    mu.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (mu[0], mu[1], mu[2])
}
