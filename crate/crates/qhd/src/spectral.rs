//! Finitely supported Fourier data `z = sum_{j != 0} z_j e^{i j.x}`.
//!
//! The zero mode never appears here: it is carried by the gauge variables
//! `(alpha, theta)`. Supports are sup-norm balls, matching the rectangular
//! spectral grids of the integrator.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::{freq_of_index, index_of_freq, FftNd, GridField};
use crate::lattice::{sobolev_weight, LatticePoint, TorusShape};

#[derive(Debug, Clone)]
pub struct SpectralField {
    pub shape: TorusShape,
    coeffs: BTreeMap<LatticePoint, Complex64>,
}

impl SpectralField {
    pub fn zero(shape: TorusShape) -> Self {
        Self {
            shape,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, j: LatticePoint, c: Complex64) {
        debug_assert_eq!(j.dim(), self.shape.dim());
        if c.norm_sqr() == 0.0 {
            self.coeffs.remove(&j);
        } else {
            self.coeffs.insert(j, c);
        }
    }

    pub fn add_assign(&mut self, j: &LatticePoint, c: Complex64) {
        *self
            .coeffs
            .entry(j.clone())
            .or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn get(&self, j: &LatticePoint) -> Complex64 {
        self.coeffs
            .get(j)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest sup-norm in the support; 0 for the zero field.
    pub fn support_radius(&self) -> i32 {
        self.coeffs.keys().map(|j| j.sup_norm()).max().unwrap_or(0)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn h_s_norm_sq(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(j, c)| sobolev_weight(j, s) * c.norm_sqr())
            .sum()
    }

    pub fn h_s_norm(&self, s: f64) -> f64 {
        self.h_s_norm_sq(s).sqrt()
    }

    pub fn scale(&mut self, lambda: f64) {
        for c in self.coeffs.values_mut() {
            *c *= lambda;
        }
    }

    /// The involution `z_j -> conj(z_{-j})` (the coefficient map of complex
    /// conjugation in physical space).
    pub fn conjugate_field(&self) -> Self {
        let mut out = Self::zero(self.shape.clone());
        for (j, c) in &self.coeffs {
            out.insert(j.neg(), c.conj());
        }
        out
    }

    /// Synthesize onto an `n^d` grid. Requires `n > 2 * support_radius`.
    pub fn to_grid(&self, n: usize) -> GridField {
        let d = self.shape.dim();
        assert!(n as i32 > 2 * self.support_radius());
        let mut field = GridField::zeros(self.shape.clone(), n);
        for (j, c) in &self.coeffs {
            let mut idx = 0;
            for k in 0..d {
                idx = idx * n + index_of_freq(j.coords()[k], n);
            }
            field.data[idx] = *c;
        }
        let mut engine = FftNd::new(n, d);
        engine.inverse(&mut field.data);
        field
    }

    /// Collect the nonzero modes of a grid field with `max_k |j_k| <= j_max`.
    /// Pass `j_max = n/2` to keep every grid mode. Coefficients below
    /// `drop_tol` in modulus are dropped.
    pub fn from_grid(field: &GridField, j_max: i32, drop_tol: f64) -> Self {
        let d = field.shape.dim();
        let n = field.n;
        let mut buf = field.data.clone();
        let mut engine = FftNd::new(n, d);
        engine.forward(&mut buf);
        Self::from_spectral_buf(&buf, &field.shape, n, j_max, drop_tol)
    }

    /// Same as `from_grid` but starting from an already transformed buffer.
    pub fn from_spectral_buf(
        buf: &[Complex64],
        shape: &TorusShape,
        n: usize,
        j_max: i32,
        drop_tol: f64,
    ) -> Self {
        let d = shape.dim();
        let mut out = Self::zero(shape.clone());
        let mut coords = vec![0i32; d];
        for (idx, &c) in buf.iter().enumerate() {
            if c.norm() <= drop_tol {
                continue;
            }
            let mut rem = idx;
            let mut ok = true;
            let mut zero = true;
            for k in (0..d).rev() {
                let j = freq_of_index(rem % n, n);
                coords[k] = j;
                if j != 0 {
                    zero = false;
                }
                if j.abs() > j_max {
                    ok = false;
                }
                rem /= n;
            }
            if ok && !zero {
                out.insert(LatticePoint::new_unchecked(&coords), c);
            }
        }
        out
    }

    /// CSV with one row per mode: `j_1, ..., j_d, re, im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.shape.dim();
        let mut header = String::new();
        for k in 0..d {
            header.push_str(&format!("j{},", k + 1));
        }
        header.push_str("re,im");
        writeln!(w, "{header}")?;
        let mut keys: Vec<_> = self.coeffs.keys().cloned().collect();
        keys.sort();
        for j in keys {
            let c = self.coeffs[&j];
            let mut row = String::new();
            for &x in j.coords() {
                row.push_str(&format!("{x},"));
            }
            writeln!(w, "{row}{},{}", c.re, c.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, shape: TorusShape) -> Result<Self> {
        let d = shape.dim();
        let mut out = Self::zero(shape);
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            if ln == 0 || line.trim().is_empty() {
                continue;
            }
            let parts: Vec<_> = line.split(',').collect();
            if parts.len() != d + 2 {
                return Err(Error::Config(format!(
                    "bad spectral CSV row (want {} fields): {line}",
                    d + 2
                )));
            }
            let mut coords = Vec::with_capacity(d);
            for p in &parts[..d] {
                coords.push(
                    p.trim()
                        .parse::<i32>()
                        .map_err(|e| Error::Config(format!("bad index: {e}")))?,
                );
            }
            let re: f64 = parts[d]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad re: {e}")))?;
            let im: f64 = parts[d + 1]
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad im: {e}")))?;
            out.insert(LatticePoint::new(&coords)?, Complex64::new(re, im));
        }
        Ok(out)
    }
}
