//! Per-mode symplectic diagonalization of the linearized flow.
//!
//! At mode `j` the linearization acts on the pair `(z_j, conj(z_{-j}))` by
//!
//! ```text
//! L_j = [[ b_j,  c ],          b_j = (hbar/2)|j|^2_a + m g'(m)/hbar,
//!        [ -c, -b_j ]],        c   = m g'(m)/hbar,
//! ```
//!
//! with eigenvalues `+-omega(j)`, `omega^2 = b^2 - c^2`. The symmetric
//! matrix
//!
//! ```text
//! C_j = (2 omega A)^{-1/2} [[ A, -c ], [ -c, A ]],    A = omega + b_j,
//! ```
//!
//! has unit determinant (so it is symplectic for this pairing) and
//! conjugates `L_j` to `diag(omega, -omega)`. In the new variable
//! `[w, conj w] = C^{-1} [z, conj z]` the quadratic Hamiltonian is the
//! plain `sum omega(j) |w_j|^2`.

use crate::dispersion::{omega, ModelParams};
use crate::error::Result;
use crate::lattice::{anisotropic_norm_sq, LatticePoint, TorusShape};
use crate::spectral::SpectralField;

/// The 2x2 block of the change of variables at one mode.
#[derive(Debug, Clone)]
pub struct ModeMatrix {
    pub j: LatticePoint,
    /// `A = omega(j) + (hbar/2)|j|^2_a + m g'(m)/hbar`.
    pub a_val: f64,
    /// `1 / sqrt(2 omega A)`.
    pub norm_factor: f64,
    /// `norm_factor * [[A, -c], [-c, A]]`.
    pub entries: [[f64; 2]; 2],
}

impl ModeMatrix {
    pub fn det(&self) -> f64 {
        self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0]
    }

    /// Diagonal entry `u` and off-diagonal entry `v` (`v <= 0`).
    pub fn uv(&self) -> (f64, f64) {
        (self.entries[0][0], self.entries[0][1])
    }
}

fn b_and_c(j: &LatticePoint, shape: &TorusShape, p: &ModelParams) -> (f64, f64) {
    let x = anisotropic_norm_sq(j, shape);
    let c = p.mass() * p.g_prime_m() / p.hbar();
    (0.5 * p.hbar() * x + c, c)
}

pub fn mode_matrix(j: &LatticePoint, shape: &TorusShape, p: &ModelParams) -> ModeMatrix {
    let (b, c) = b_and_c(j, shape, p);
    let w = omega(j, shape, p);
    let a = w + b;
    let nf = 1.0 / (2.0 * w * a).sqrt();
    let u = a * nf;
    let v = -c * nf;
    ModeMatrix {
        j: j.clone(),
        a_val: a,
        norm_factor: nf,
        entries: [[u, v], [v, u]],
    }
}

/// Max-abs defect of `C_j^{-1} L_j C_j - diag(omega, -omega)`.
pub fn verify_diagonalization(j: &LatticePoint, shape: &TorusShape, p: &ModelParams) -> f64 {
    let (b, c) = b_and_c(j, shape, p);
    let w = omega(j, shape, p);
    let m = mode_matrix(j, shape, p);
    let (u, v) = m.uv();
    // C^{-1} = [[u, -v], [-v, u]] / det; det = 1 up to roundoff
    let det = m.det();
    let l = [[b, c], [-c, -b]];
    let cm = [[u, v], [v, u]];
    let cinv = [[u / det, -v / det], [-v / det, u / det]];
    let mut lc = [[0.0; 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            lc[r][s] = l[r][0] * cm[0][s] + l[r][1] * cm[1][s];
        }
    }
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            out[r][s] = cinv[r][0] * lc[0][s] + cinv[r][1] * lc[1][s];
        }
    }
    let target = [[w, 0.0], [0.0, -w]];
    let mut defect = 0.0f64;
    for r in 0..2 {
        for s in 0..2 {
            defect = defect.max((out[r][s] - target[r][s]).abs());
        }
    }
    defect
}

/// Precomputed `(u, v)` entries over a set of modes, for the coefficient
/// conjugation and the field transforms. Evenness in `j` is used: a query
/// at `-j` reuses the entry at `j`.
pub struct ModeMatrixCache {
    shape: TorusShape,
    params: ModelParams,
    map: std::collections::HashMap<LatticePoint, (f64, f64)>,
}

impl ModeMatrixCache {
    pub fn new(shape: &TorusShape, p: &ModelParams) -> Self {
        Self {
            shape: shape.clone(),
            params: p.clone(),
            map: std::collections::HashMap::new(),
        }
    }

    pub fn with_ball(shape: &TorusShape, p: &ModelParams, j_max: i32) -> Self {
        let mut cache = Self::new(shape, p);
        for j in crate::lattice::ball(j_max, shape) {
            cache.map.insert(
                j.clone(),
                {
                    let m = mode_matrix(&j, shape, p);
                    m.uv()
                },
            );
        }
        cache
    }

    pub fn uv(&self, j: &LatticePoint) -> (f64, f64) {
        if let Some(&uv) = self.map.get(j) {
            return uv;
        }
        let m = mode_matrix(j, &self.shape, &self.params);
        m.uv()
    }
}

/// `w_j = u_j z_j - v_j conj(z_{-j})`, the inverse block applied per mode.
pub fn to_w(z: &SpectralField, shape: &TorusShape, p: &ModelParams) -> SpectralField {
    transform(z, shape, p, true)
}

/// `z_j = u_j w_j + v_j conj(w_{-j})`.
pub fn to_z(w: &SpectralField, shape: &TorusShape, p: &ModelParams) -> SpectralField {
    transform(w, shape, p, false)
}

fn transform(f: &SpectralField, shape: &TorusShape, p: &ModelParams, inverse: bool) -> SpectralField {
    let mut out = SpectralField::zero(f.shape.clone());
    // the block at j mixes the pair (j, -j); cover both even when only one
    // side is populated
    let mut modes: std::collections::HashSet<LatticePoint> = std::collections::HashSet::new();
    for (j, _) in f.iter() {
        modes.insert(j.clone());
        modes.insert(j.neg());
    }
    for j in modes {
        let m = mode_matrix(&j, shape, p);
        let (u, v) = m.uv();
        let v = if inverse { -v } else { v };
        let paired = f.get(&j.neg()).conj();
        out.insert(j.clone(), u * f.get(&j) + v * paired);
    }
    out
}

/// Symplecticity defect `max |C^T J C - J|` with `J` the standard 2x2
/// antisymmetric unit.
pub fn symplectic_defect(m: &ModeMatrix) -> f64 {
    // For symmetric 2x2 blocks C^T J C = det(C) J, so the defect is |det - 1|.
    (m.det() - 1.0).abs()
}

/// Full result set for one mode, used by the structure checks.
pub fn mode_report(j: &LatticePoint, shape: &TorusShape, p: &ModelParams) -> Result<(f64, f64)> {
    let m = mode_matrix(j, shape, p);
    Ok((symplectic_defect(&m), verify_diagonalization(j, shape, p)))
}
