//! Trilinear Hamiltonians on the mode lattice.
//!
//! A cubic Hamiltonian is a sum over signed, momentum-conserving triples,
//!
//! ```text
//! G(w) = sum_{sigma, j : sigma_1 j_1 + sigma_2 j_2 + sigma_3 j_3 = 0}
//!        G_{sigma,j} w_{j_1}^{sigma_1} w_{j_2}^{sigma_2} w_{j_3}^{sigma_3},
//! ```
//!
//! where `w_j^+ = w_j` and `w_j^- = conj(w_j)`, with coefficients invariant
//! under simultaneous permutation of the legs. One canonical representative
//! is stored per permutation class; multiplicity is restored at evaluation.
//!
//! Reality of `G` is the pairing `conj(G_{sigma,j}) = G_{-sigma,j}`.
//!
//! The quadratic Hamiltonians that matter downstream are diagonal
//! (`sum q(j) |w_j|^2`), so their Poisson action on this class is the
//! coefficientwise multiplier `i sum_i sigma_i q(j_i)`; its inverse divides
//! by the same number, which is exactly where small divisors enter.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::Write;

use crate::dispersion::{omega, ModelParams};
use crate::error::{Error, Result};
use crate::lattice::{japanese_bracket, LatticePoint, TorusShape};
use crate::spectral::SpectralField;

/// One leg of a monomial: sign (+1 / -1) and mode.
pub type Leg = (i8, LatticePoint);

fn leg_order(a: &Leg, b: &Leg) -> std::cmp::Ordering {
    // descending Euclidean norm, then lexicographic mode, then + before -
    b.1.norm_sq_int()
        .cmp(&a.1.norm_sq_int())
        .then_with(|| a.1.coords().cmp(b.1.coords()))
        .then_with(|| b.0.cmp(&a.0))
}

/// Canonically sorted triple of legs. The first two entries are the two
/// largest modes (ties broken by the ordering above), which makes the sign
/// split a lookup.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriKey {
    legs: [Leg; 3],
}

impl TriKey {
    pub fn new(mut legs: [Leg; 3]) -> Self {
        legs.sort_by(leg_order);
        Self { legs }
    }

    pub fn legs(&self) -> &[Leg; 3] {
        &self.legs
    }

    /// Number of distinct ordered arrangements of the multiset (1, 3 or 6).
    pub fn multiplicity(&self) -> usize {
        let [a, b, c] = &self.legs;
        if a == b && b == c {
            1
        } else if a == b || b == c || a == c {
            3
        } else {
            6
        }
    }

    pub fn conjugate(&self) -> Self {
        let f = |l: &Leg| (-l.0, l.1.clone());
        Self::new([f(&self.legs[0]), f(&self.legs[1]), f(&self.legs[2])])
    }

    pub fn momentum_conserving(&self) -> bool {
        let d = self.legs[0].1.dim();
        (0..d).all(|k| {
            self.legs
                .iter()
                .map(|(s, j)| *s as i64 * j.coords()[k] as i64)
                .sum::<i64>()
                == 0
        })
    }

    /// Descending Euclidean norms of the three modes.
    pub fn mus(&self) -> (f64, f64, f64) {
        crate::lattice::mu_ordering(&self.legs[0].1, &self.legs[1].1, &self.legs[2].1)
    }

    /// `sum_i sigma_i q(j_i)` for a diagonal multiplier `q`.
    pub fn signed_sum<F: Fn(&LatticePoint) -> f64>(&self, q: F) -> f64 {
        self.legs.iter().map(|(s, j)| *s as f64 * q(j)).sum()
    }
}

impl std::fmt::Debug for TriKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (s, j)) in self.legs.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{:?}", if *s > 0 { '+' } else { '-' }, j)?;
        }
        Ok(())
    }
}

/// Diagonal quadratic Hamiltonian `sum_j q(j) w_j conj(w_j)`.
#[derive(Debug, Clone)]
pub enum QuadraticDiagonal {
    /// `q = omega`: the quadratic part after diagonalization.
    Omega { shape: TorusShape, params: ModelParams },
    /// `q = <j>^{2s}`: the squared Sobolev norm.
    Sobolev { s: f64 },
}

impl QuadraticDiagonal {
    pub fn multiplier(&self, j: &LatticePoint) -> f64 {
        match self {
            QuadraticDiagonal::Omega { shape, params } => omega(j, shape, params),
            QuadraticDiagonal::Sobolev { s } => japanese_bracket(j).powf(2.0 * s),
        }
    }

    pub fn value(&self, w: &SpectralField) -> f64 {
        w.iter()
            .map(|(j, c)| self.multiplier(j) * c.norm_sqr())
            .sum()
    }
}

/// Poisson bracket of two diagonal quadratics evaluated at `w`; vanishes
/// identically, and the float computation below cancels term by term.
#[allow(clippy::eq_op)] // the exact cancellation a - a is the point
pub fn diagonal_poisson_value(q1: &QuadraticDiagonal, q2: &QuadraticDiagonal, w: &SpectralField) -> f64 {
    let mut acc = 0.0;
    for (j, c) in w.iter() {
        let a = q1.multiplier(j) * q2.multiplier(j) * c.norm_sqr();
        acc += a - a;
    }
    acc
}

/// Accumulates raw ordered monomials; `finish` reduces each class sum to
/// the per-arrangement symmetric coefficient.
pub struct TriBuilder {
    shape: TorusShape,
    j_max: i32,
    sums: BTreeMap<TriKey, Complex64>,
}

impl TriBuilder {
    pub fn new(shape: TorusShape, j_max: i32) -> Self {
        Self {
            shape,
            j_max,
            sums: BTreeMap::new(),
        }
    }

    /// Add one ordered monomial `c * w^{s1}_{j1} w^{s2}_{j2} w^{s3}_{j3}`.
    pub fn add_ordered(&mut self, legs: [Leg; 3], c: Complex64) {
        let key = TriKey::new(legs);
        debug_assert!(key.momentum_conserving(), "non-conserving key {key:?}");
        *self.sums.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    /// Add directly to a class sum (the total over all arrangements).
    pub fn add_class_sum(&mut self, key: TriKey, c: Complex64) {
        debug_assert!(key.momentum_conserving());
        *self.sums.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn finish(self) -> TrilinearHamiltonian {
        let coeffs = self
            .sums
            .into_iter()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(k, c)| {
                let m = k.multiplicity() as f64;
                (k, c / m)
            })
            .collect();
        TrilinearHamiltonian {
            shape: self.shape,
            j_max: self.j_max,
            coeffs,
        }
    }
}

/// Sparse symmetric coefficient table over momentum-conserving triples.
#[derive(Debug, Clone)]
pub struct TrilinearHamiltonian {
    pub shape: TorusShape,
    pub j_max: i32,
    coeffs: BTreeMap<TriKey, Complex64>,
}

impl TrilinearHamiltonian {
    pub fn zero(shape: TorusShape, j_max: i32) -> Self {
        Self {
            shape,
            j_max,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, key: &TriKey) -> Complex64 {
        self.coeffs
            .get(key)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TriKey, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn insert_symmetric(&mut self, key: TriKey, c: Complex64) {
        self.coeffs.insert(key, c);
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn map_coeffs<F: Fn(&TriKey, Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            shape: self.shape.clone(),
            j_max: self.j_max,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, &c)| (k.clone(), f(k, c)))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            *coeffs.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Self {
            shape: self.shape.clone(),
            j_max: self.j_max.max(other.j_max),
            coeffs,
        }
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        self.map_coeffs(|_, c| c * lambda)
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Class invariants: momentum conservation, canonical storage, and the
    /// reality pairing `conj(G_{sigma,j}) = G_{-sigma,j}`.
    pub fn validate(&self) -> Result<()> {
        for (key, c) in &self.coeffs {
            if !key.momentum_conserving() {
                return Err(Error::Config(format!("non-conserving key {key:?}")));
            }
            let mate = self.get(&key.conjugate());
            if (mate - c.conj()).norm() > 1e-10 * (1.0 + c.norm()) {
                return Err(Error::Config(format!(
                    "reality pairing broken at {key:?}: {c} vs {mate}"
                )));
            }
        }
        Ok(())
    }

    /// Monomial value `prod_i w^{sigma_i}_{j_i}`.
    fn monomial(key: &TriKey, w: &SpectralField) -> Complex64 {
        key.legs
            .iter()
            .map(|(s, j)| {
                let c = w.get(j);
                if *s > 0 {
                    c
                } else {
                    c.conj()
                }
            })
            .product()
    }

    /// The real triple sum at `w`.
    pub fn evaluate(&self, w: &SpectralField) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (key, c) in &self.coeffs {
            acc += c * key.multiplicity() as f64 * Self::monomial(key, w);
        }
        acc.re
    }

    /// Wirtinger gradients `(d/dw_k G, d/d conj(w_k) G)` at `w`.
    pub fn gradients(
        &self,
        w: &SpectralField,
    ) -> (
        BTreeMap<LatticePoint, Complex64>,
        BTreeMap<LatticePoint, Complex64>,
    ) {
        let mut plain: BTreeMap<LatticePoint, Complex64> = BTreeMap::new();
        let mut conj: BTreeMap<LatticePoint, Complex64> = BTreeMap::new();
        for (key, c) in &self.coeffs {
            let mult = key.multiplicity() as f64;
            for i in 0..3 {
                let (s_i, ref j_i) = key.legs[i];
                let mut prod = Complex64::new(1.0, 0.0);
                for l in 0..3 {
                    if l == i {
                        continue;
                    }
                    let (s_l, ref j_l) = key.legs[l];
                    let cl = w.get(j_l);
                    prod *= if s_l > 0 { cl } else { cl.conj() };
                }
                let target = if s_i > 0 { &mut plain } else { &mut conj };
                *target
                    .entry(j_i.clone())
                    .or_insert(Complex64::new(0.0, 0.0)) += c * mult * prod;
            }
        }
        (plain, conj)
    }

    /// Hamiltonian vector field `-i d/d conj(w) G`, componentwise.
    pub fn vector_field(&self, w: &SpectralField) -> SpectralField {
        let (_, conj) = self.gradients(w);
        let mut out = SpectralField::zero(self.shape.clone());
        let minus_i = Complex64::new(0.0, -1.0);
        for (j, g) in conj {
            out.insert(j, minus_i * g);
        }
        out
    }
}

/// Evaluation plan against dense spectral-layout buffers: leg indices are
/// resolved once, so repeated evaluations along a trajectory cost one
/// multiply-add sweep.
pub struct CompiledCubic {
    terms: Vec<(Complex64, [u32; 3], u8)>,
}

impl CompiledCubic {
    /// Compensated (Kahan) accumulation: the terms are large and cancel
    /// heavily (coefficients grow like `mu_1^{2s}` while the value is
    /// cubic in a small field), so a plain sum would leave a noise floor
    /// big enough to pollute finite-difference drift rates.
    pub fn evaluate(&self, buf: &[Complex64]) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (c, idx, conj_mask) in &self.terms {
            let mut m = *c;
            for (i, &k) in idx.iter().enumerate() {
                let v = buf[k as usize];
                m *= if conj_mask & (1 << i) != 0 { v.conj() } else { v };
            }
            let y = m.re - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }
}

impl TrilinearHamiltonian {
    /// Resolve legs to indices of an `n^d` spectral buffer. Classes with a
    /// mode outside the grid are rejected.
    pub fn compile(&self, n: usize) -> CompiledCubic {
        let d = self.shape.dim();
        let mut terms = Vec::with_capacity(self.len());
        for (key, c) in self.iter() {
            let mut idx = [0u32; 3];
            let mut mask = 0u8;
            for (i, (s, j)) in key.legs().iter().enumerate() {
                assert!(2 * j.sup_norm() < n as i32, "mode outside grid");
                let mut flat = 0usize;
                for k in 0..d {
                    flat = flat * n + crate::grid::index_of_freq(j.coords()[k], n);
                }
                idx[i] = flat as u32;
                if *s < 0 {
                    mask |= 1 << i;
                }
            }
            terms.push((c * key.multiplicity() as f64, idx, mask));
        }
        CompiledCubic { terms }
    }
}

/// `{Q, G}` for diagonal `Q`: coefficientwise multiplication by
/// `i sum_i sigma_i q(j_i)`.
pub fn poisson_with_diagonal(
    q: &QuadraticDiagonal,
    g: &TrilinearHamiltonian,
) -> TrilinearHamiltonian {
    g.map_coeffs(|key, c| Complex64::new(0.0, key.signed_sum(|j| q.multiplier(j))) * c)
}

/// Inverse adjoint action: divide each coefficient by `i sum_i sigma_i
/// omega(j_i)`. A divisor whose modulus falls below `floor` aborts the
/// construction, naming the triple: that is the numerical detector of
/// near-resonances.
pub fn ad_inverse(
    g: &TrilinearHamiltonian,
    shape: &TorusShape,
    p: &ModelParams,
    floor: f64,
) -> Result<TrilinearHamiltonian> {
    let mut coeffs = BTreeMap::new();
    for (key, c) in g.iter() {
        let d = key.signed_sum(|j| omega(j, shape, p));
        if d.abs() < floor {
            return Err(Error::ResonantDivisor {
                divisor: d,
                floor,
                triple: format!("{key:?}"),
            });
        }
        coeffs.insert(key.clone(), c / Complex64::new(0.0, d));
    }
    Ok(TrilinearHamiltonian {
        shape: g.shape.clone(),
        j_max: g.j_max,
        coeffs,
    })
}

/// Smallest `|sum sigma_i omega(j_i)|` over the support.
pub fn min_divisor(g: &TrilinearHamiltonian, shape: &TorusShape, p: &ModelParams) -> f64 {
    g.iter()
        .map(|(key, _)| key.signed_sum(|j| omega(j, shape, p)).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Split off the triples whose second-largest mode exceeds `n`:
/// `G = G^{<=N} + G^{>N}` exactly, coefficient by coefficient.
pub fn split_truncate(
    g: &TrilinearHamiltonian,
    n: f64,
) -> (TrilinearHamiltonian, TrilinearHamiltonian) {
    let mut lo = BTreeMap::new();
    let mut hi = BTreeMap::new();
    for (key, &c) in g.iter() {
        let (_, mu2, _) = key.mus();
        if mu2 > n {
            hi.insert(key.clone(), c);
        } else {
            lo.insert(key.clone(), c);
        }
    }
    (
        TrilinearHamiltonian {
            shape: g.shape.clone(),
            j_max: g.j_max,
            coeffs: lo,
        },
        TrilinearHamiltonian {
            shape: g.shape.clone(),
            j_max: g.j_max,
            coeffs: hi,
        },
    )
}

/// Split by the relative sign of the two largest modes (ties resolved by
/// the canonical leg order): `(G^{(+1)}, G^{(-1)})`.
pub fn split_sign(
    g: &TrilinearHamiltonian,
) -> (TrilinearHamiltonian, TrilinearHamiltonian) {
    let mut plus = BTreeMap::new();
    let mut minus = BTreeMap::new();
    for (key, &c) in g.iter() {
        let legs = key.legs();
        if legs[0].0 * legs[1].0 == 1 {
            plus.insert(key.clone(), c);
        } else {
            minus.insert(key.clone(), c);
        }
    }
    (
        TrilinearHamiltonian {
            shape: g.shape.clone(),
            j_max: g.j_max,
            coeffs: plus,
        },
        TrilinearHamiltonian {
            shape: g.shape.clone(),
            j_max: g.j_max,
            coeffs: minus,
        },
    )
}

/// Substitute the per-mode change of variables into the coefficients:
/// each leg `w^{sigma}_j` expands into `u_j`-weighted same leg plus
/// `v_j`-weighted `(-sigma, -j)` leg. Output stays in the class with all
/// invariants.
pub fn conjugate_by_modes<F: Fn(&LatticePoint) -> (f64, f64)>(
    g: &TrilinearHamiltonian,
    uv: F,
) -> TrilinearHamiltonian {
    let mut b = TriBuilder::new(g.shape.clone(), g.j_max);
    for (key, &c) in g.iter() {
        let mult = key.multiplicity() as f64;
        let legs = key.legs();
        let factors: Vec<(f64, f64)> = legs.iter().map(|(_, j)| uv(j)).collect();
        for mask in 0..8u8 {
            let mut new_legs: [Leg; 3] = legs.clone();
            let mut f = 1.0;
            for i in 0..3 {
                if mask & (1 << i) == 0 {
                    f *= factors[i].0;
                } else {
                    f *= factors[i].1;
                    new_legs[i] = (-legs[i].0, legs[i].1.neg());
                }
            }
            if f != 0.0 {
                b.add_class_sum(TriKey::new(new_legs), c * mult * f);
            }
        }
    }
    b.finish()
}

/// `{G1, G2}(w) = -i sum_k (d_w G1 d_wbar G2 - d_wbar G1 d_w G2)`.
pub fn poisson_general(
    g1: &TrilinearHamiltonian,
    g2: &TrilinearHamiltonian,
    w: &SpectralField,
) -> f64 {
    let (p1, q1) = g1.gradients(w);
    let (p2, q2) = g2.gradients(w);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, a) in &p1 {
        if let Some(b) = q2.get(k) {
            acc += a * b;
        }
    }
    for (k, a) in &q1 {
        if let Some(b) = p2.get(k) {
            acc -= a * b;
        }
    }
    (Complex64::new(0.0, -1.0) * acc).re
}

/// Bracket of a diagonal quadratic with a trilinear table, evaluated
/// directly from gradients at `w` (the two-path check against
/// [`poisson_with_diagonal`]).
pub fn poisson_diagonal_direct(
    q: &QuadraticDiagonal,
    g: &TrilinearHamiltonian,
    w: &SpectralField,
) -> f64 {
    let (pg, qg) = g.gradients(w);
    let mut acc = Complex64::new(0.0, 0.0);
    // d_w Q = q(k) conj(w_k), d_wbar Q = q(k) w_k
    for (k, b) in &qg {
        acc += q.multiplier(k) * w.get(k).conj() * b;
    }
    for (k, b) in &pg {
        acc -= q.multiplier(k) * w.get(k) * b;
    }
    (Complex64::new(0.0, -1.0) * acc).re
}

/// CSV export: `sigma1,sigma2,sigma3, j1..., j2..., j3..., re, im`, sorted.
pub fn write_table_csv<W: Write>(g: &TrilinearHamiltonian, mut w: W) -> Result<()> {
    let d = g.shape.dim();
    let mut header = String::from("sigma1,sigma2,sigma3");
    for leg in 1..=3 {
        for k in 1..=d {
            header.push_str(&format!(",j{leg}_{k}"));
        }
    }
    header.push_str(",re,im");
    writeln!(w, "{header}")?;
    let mut rows: Vec<(Vec<i64>, String)> = Vec::with_capacity(g.len());
    for (key, c) in g.iter() {
        let mut sortk: Vec<i64> = Vec::with_capacity(3 + 3 * d);
        let mut row = String::new();
        for (s, _) in key.legs() {
            row.push_str(&format!("{s},"));
            sortk.push(*s as i64);
        }
        let mut row2 = String::new();
        for (_, j) in key.legs() {
            for &x in j.coords() {
                row2.push_str(&format!("{x},"));
                sortk.push(x as i64);
            }
        }
        rows.push((sortk, format!("{row}{row2}{},{}", c.re, c.im)));
    }
    rows.sort();
    for (_, row) in rows {
        writeln!(w, "{row}")?;
    }
    Ok(())
}
