//! The duality matrix calculus for projective spaces: the diagonal-class
//! matrix `M_n`, its inverse, the `eta` and `eta'` coefficient families, the
//! Gysin projection vector, the projection and diagonal matrices, the
//! pushforward to the point and the Poincare pairing Gram matrix.
//!
//! Everything here works over the coefficient ring `A` of a formal group
//! law, in the dual-generator convention (`c = c_1` of the dual canonical
//! line bundle).

use std::collections::HashMap;

use num::Zero;
use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::projspace::{CohomologyModel, Convention, ModelKind};
use crate::ring::{rat, QuotientRing, RingElement};

/// A rectangular matrix over a coefficient ring, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrix {
    ring: QuotientRing,
    rows: usize,
    cols: usize,
    entries: Vec<RingElement>,
}

impl CoeffMatrix {
    pub fn new(ring: &QuotientRing, rows: usize, cols: usize) -> Self {
        CoeffMatrix {
            ring: ring.clone(),
            rows,
            cols,
            entries: vec![ring.zero(); rows * cols],
        }
    }

    pub fn ring(&self) -> &QuotientRing {
        &self.ring
    }

    pub fn identity(ring: &QuotientRing, n: usize) -> Self {
        let mut m = Self::new(ring, n, n);
        for i in 0..n {
            *m.get_mut(i, i) = ring.one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RingElement {
        &self.entries[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut RingElement {
        &mut self.entries[i * self.cols + j]
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.get(i, j).is_one()
                    } else {
                        self.get(i, j).is_zero()
                    }
                })
            })
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::new(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.get_mut(j, i) = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &CoeffMatrix) -> Result<CoeffMatrix> {
        if self.cols != other.rows {
            return Err(Error::Config(format!(
                "matrix shapes {}x{} and {}x{} do not compose",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ring = self.ring.clone();
        let mut out = Self::new(&ring, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = ring.zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j))?)?;
                }
                *out.get_mut(i, j) = acc;
            }
        }
        Ok(out)
    }

    /// Drop one column (used for the blow-up matrix).
    pub fn drop_column(&self, col: usize) -> CoeffMatrix {
        let mut out = Self::new(&self.ring, self.rows, self.cols - 1);
        for i in 0..self.rows {
            let mut jj = 0;
            for j in 0..self.cols {
                if j == col {
                    continue;
                }
                *out.get_mut(i, jj) = self.get(i, j).clone();
                jj += 1;
            }
        }
        out
    }

    /// Exact determinant by Laplace expansion over column subsets
    /// (division-free; memoized, fine for the sizes in scope).
    pub fn determinant(&self) -> Result<RingElement> {
        if self.rows != self.cols {
            return Err(Error::Config("determinant of a non-square matrix".into()));
        }
        let ring = self.ring.clone();
        let n = self.rows;
        if n == 0 {
            return Ok(ring.one());
        }
        if n > 20 {
            return Err(Error::Config("determinant too large".into()));
        }
        let mut memo: HashMap<u32, RingElement> = HashMap::new();
        self.det_rec(&ring, n, (1u32 << n) - 1, &mut memo)
    }

    fn det_rec(
        &self,
        ring: &QuotientRing,
        n: usize,
        cols: u32,
        memo: &mut HashMap<u32, RingElement>,
    ) -> Result<RingElement> {
        if cols == 0 {
            return Ok(ring.one());
        }
        if let Some(v) = memo.get(&cols) {
            return Ok(v.clone());
        }
        let row = n - cols.count_ones() as usize; // expand along the next row
        let mut acc = ring.zero();
        let mut sign = 1i64;
        for j in 0..n {
            if cols & (1 << j) == 0 {
                continue;
            }
            let entry = self.get(row, j);
            if !entry.is_zero() {
                let sub = self.det_rec(ring, n, cols & !(1 << j), memo)?;
                acc = acc.add(&entry.mul(&sub)?.scale(&rat(sign)))?;
            }
            sign = -sign;
        }
        memo.insert(cols, acc.clone());
        Ok(acc)
    }

    /// Exact inverse by Gaussian elimination. Pivots are inverted with
    /// `invert_unit`, picking in each column a pivot whose augmentation is
    /// nonzero and preferring plain rational pivots so that no unit
    /// inversion is needed for the anti-triangular matrices in scope.
    pub fn invert(&self) -> Result<CoeffMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotInvertible);
        }
        let n = self.rows;
        let ring = self.ring.clone();
        let mut a = self.clone();
        let mut inv = Self::identity(&ring, n);

        for col in 0..n {
            // choose a pivot row: prefer a constant entry, else any unit
            let pivot_row = (col..n)
                .find(|&r| {
                    let e = a.get(r, col);
                    e.num_terms() == 1 && !e.augmentation().is_zero()
                })
                .or_else(|| (col..n).find(|&r| !a.get(r, col).augmentation().is_zero()))
                .ok_or(Error::NotInvertible)?;
            if pivot_row != col {
                for j in 0..n {
                    a.entries.swap(col * n + j, pivot_row * n + j);
                    inv.entries.swap(col * n + j, pivot_row * n + j);
                }
            }
            let pivot_inv = a.get(col, col).invert_unit()?;
            for j in 0..n {
                *a.get_mut(col, j) = a.get(col, j).mul(&pivot_inv)?;
                *inv.get_mut(col, j) = inv.get(col, j).mul(&pivot_inv)?;
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in 0..n {
                    let va = a.get(col, j).mul(&factor)?;
                    *a.get_mut(r, j) = a.get(r, j).sub(&va)?;
                    let vi = inv.get(col, j).mul(&factor)?;
                    *inv.get_mut(r, j) = inv.get(r, j).sub(&vi)?;
                }
            }
        }
        Ok(inv)
    }

    /// Row-major JSON array of element JSON values.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|i| {
                    serde_json::Value::Array(
                        (0..self.cols).map(|j| self.get(i, j).to_json()).collect(),
                    )
                })
                .collect(),
        )
    }
}

impl std::fmt::Display for CoeffMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let cells: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        let widths: Vec<usize> = (0..self.cols)
            .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(1))
            .collect();
        for row in &cells {
            write!(f, "[ ")?;
            for (j, cell) in row.iter().enumerate() {
                write!(f, "{:>width$} ", cell, width = widths[j])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// `eta_i = a_{1,i}` for `i = 0..=n` (`eta_0 = 1`): the coefficients of the
/// diagonal class read through the duality matrix.
pub fn eta_coeffs(f: &FormalGroupLaw, n: u32) -> Result<Vec<RingElement>> {
    let mut out = vec![f.coeff_ring().one()];
    for i in 1..=n {
        out.push(f.coeff(1, i)?);
    }
    Ok(out)
}

/// The duality matrix `M_n`: `(M_n)_{ij} = eta_{i+j-n}` (zero when
/// `i + j < n`). Symmetric, anti-triangular with an anti-diagonal of ones.
pub fn dual_matrix(f: &FormalGroupLaw, n: u32) -> Result<CoeffMatrix> {
    let etas = eta_coeffs(f, n)?;
    let size = n as usize + 1;
    let mut m = CoeffMatrix::new(f.coeff_ring(), size, size);
    for i in 0..size {
        for j in 0..size {
            if i + j >= n as usize {
                *m.get_mut(i, j) = etas[i + j - n as usize].clone();
            }
        }
    }
    Ok(m)
}

/// `eta'_i` for `i = 0..=n`, read off the inverse matrix: `M_n^{-1}` has
/// entries `eta'_{n-i-j}` above the anti-diagonal and zeros below, with
/// ones on the anti-diagonal. The shape is verified, not assumed.
pub fn eta_prime_coeffs(f: &FormalGroupLaw, n: u32) -> Result<Vec<RingElement>> {
    let m = dual_matrix(f, n)?;
    let inv = m.invert()?;
    let size = n as usize + 1;
    // read eta'_k from the first column: (M^-1)_{n-k, 0} = eta'_k
    let mut out = Vec::with_capacity(size);
    for k in 0..size {
        out.push(inv.get(size - 1 - k, 0).clone());
    }
    if !out[0].is_one() {
        return Err(Error::LayoutInconsistent);
    }
    // the whole inverse must be the eta' Hankel matrix
    for i in 0..size {
        for j in 0..size {
            let expect = if i + j <= n as usize {
                out[n as usize - i - j].clone()
            } else {
                f.coeff_ring().zero()
            };
            if *inv.get(i, j) != expect {
                return Err(Error::LayoutInconsistent);
            }
        }
    }
    Ok(out)
}

/// Cross-check for `eta'_i` via the cofactor description: up to the global
/// sign `(-1)^(n(n+1)/2)` of `det M_n`, `eta'_i` is `(-1)^(n-i)` times the
/// minor of `M_n` obtained by removing row 0 and column `n-i`.
pub fn eta_prime_cofactor(f: &FormalGroupLaw, n: u32, i: u32) -> Result<RingElement> {
    let m = dual_matrix(f, n)?;
    let size = n as usize + 1;
    let ring = f.coeff_ring().clone();
    let mut minor = CoeffMatrix::new(&ring, size - 1, size - 1);
    for r in 1..size {
        let mut cc = 0;
        for c in 0..size {
            if c == (n - i) as usize {
                continue;
            }
            *minor.get_mut(r - 1, cc) = m.get(r, c).clone();
            cc += 1;
        }
    }
    let triangle = n as i64 * (n as i64 + 1) / 2;
    let det_sign = if triangle % 2 == 0 { 1 } else { -1 };
    let sign = if (n - i).is_multiple_of(2) { det_sign } else { -det_sign };
    Ok(minor.determinant()?.scale(&rat(sign)))
}

/// The fundamental relation `sum_i eta_i eta'_{n-i} - [n = 0]`; must
/// normalize to zero.
pub fn fundamental_relation_check(f: &FormalGroupLaw, n: u32) -> Result<RingElement> {
    let etas = eta_coeffs(f, n)?;
    let primes = eta_prime_coeffs(f, n)?;
    let ring = f.coeff_ring().clone();
    let mut acc = ring.zero();
    for i in 0..=n as usize {
        acc = acc.add(&etas[i].mul(&primes[n as usize - i])?)?;
    }
    if n == 0 {
        acc = acc.sub(&ring.one())?;
    }
    Ok(acc)
}

/// The Gysin projection vector of `p: P^n -> S`: the column
/// `(eta'_n, ..., eta'_1, 1)^T`.
pub fn gysin_projection_vector(f: &FormalGroupLaw, n: u32) -> Result<CoeffMatrix> {
    let primes = eta_prime_coeffs(f, n)?;
    let size = n as usize + 1;
    let mut v = CoeffMatrix::new(f.coeff_ring(), size, 1);
    for i in 0..size {
        *v.get_mut(i, 0) = primes[n as usize - i].clone();
    }
    Ok(v)
}

/// The matrix of `pi^*` for the projection `P^n x P^n -> P^n` on the second
/// factor, in the monomial bases `c^i` and `c^j d^k`: rows indexed by
/// `(j, k)` (row-major), entry `delta_{ik} eta'_{n-j}`.
pub fn pi_star_matrix(f: &FormalGroupLaw, n: u32) -> Result<CoeffMatrix> {
    let primes = eta_prime_coeffs(f, n)?;
    let size = n as usize + 1;
    let mut m = CoeffMatrix::new(f.coeff_ring(), size * size, size);
    for j in 0..size {
        for k in 0..size {
            for i in 0..size {
                if i == k {
                    *m.get_mut(j * size + k, i) = primes[n as usize - j].clone();
                }
            }
        }
    }
    Ok(m)
}

/// The matrix of the diagonal pullback `delta^*` in the same bases:
/// entry `(l, (j,k)) = eta_{j+k-l-n}` (zero for a negative index).
pub fn delta_star_matrix(f: &FormalGroupLaw, n: u32) -> Result<CoeffMatrix> {
    let etas = eta_coeffs(f, n)?;
    let size = n as usize + 1;
    let mut m = CoeffMatrix::new(f.coeff_ring(), size, size * size);
    for l in 0..size {
        for j in 0..size {
            for k in 0..size {
                let idx = j as i64 + k as i64 - l as i64 - n as i64;
                if (0..=n as i64).contains(&idx) {
                    *m.get_mut(l, j * size + k) = etas[idx as usize].clone();
                }
            }
        }
    }
    Ok(m)
}

/// Pushforward to the point of an element of the `P^n` model in the dual
/// basis: the `A`-linear extension of `c^i -> eta'_{n-i}`.
pub fn pushforward_point(
    f: &FormalGroupLaw,
    model: &CohomologyModel,
    e: &RingElement,
) -> Result<RingElement> {
    let n = match model.kind() {
        ModelKind::ProjSpace(n) => *n,
        _ => return Err(Error::Config("pushforward_point needs a P^n model".into())),
    };
    if model.generators()[0].1 != Convention::Dual {
        return Err(Error::Config(
            "pushforward_point is stated in the dual generator".into(),
        ));
    }
    if e.ring() != model.ring() {
        return Err(Error::RingMismatch);
    }
    let primes = eta_prime_coeffs(f, n)?;
    let gen_idx = model.ring().var_index(&model.generators()[0].0)?;
    let coeff_ring = f.coeff_ring().clone();
    let mut acc = coeff_ring.zero();
    for (exps, c) in e.iter_terms() {
        let i = exps[gen_idx] as usize;
        // the remaining variables must all live in A
        let mut stripped = exps.to_vec();
        stripped[gen_idx] = 0;
        let rest = RingElement::from_raw_terms(
            e.ring(),
            vec![(stripped, c.clone())],
        )?;
        let rest_in_a = crate::chern::map_by_name(&rest, &coeff_ring)?;
        acc = acc.add(&rest_in_a.mul(&primes[n as usize - i])?)?;
    }
    Ok(acc)
}

/// The Poincare pairing Gram matrix `G_{ij} = p_*(c^i c^j) =
/// eta'_{n-i-j}` (zero when `i + j > n`). Symmetric by construction; its
/// determinant is checked to be exactly `+1` or `-1`.
pub fn pairing_gram(f: &FormalGroupLaw, n: u32) -> Result<CoeffMatrix> {
    let primes = eta_prime_coeffs(f, n)?;
    let size = n as usize + 1;
    let mut g = CoeffMatrix::new(f.coeff_ring(), size, size);
    for i in 0..size {
        for j in 0..size {
            if i + j <= n as usize {
                *g.get_mut(i, j) = primes[n as usize - i - j].clone();
            }
        }
    }
    if !g.is_symmetric() {
        return Err(Error::LayoutInconsistent);
    }
    let det = g.determinant()?;
    let ring = f.coeff_ring();
    if det != ring.one() && det != ring.one().neg() {
        return Err(Error::LayoutInconsistent);
    }
    Ok(g)
}
