//! Dense row-major matrices over a [`Ring`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ring::{Elem, Ring};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(ring: &Ring, rows: usize, cols: usize) -> Matrix {
        Matrix {
            ring: ring.clone(),
            rows,
            cols,
            data: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: &Ring, n: usize) -> Matrix {
        let mut m = Matrix::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = ring.one();
        }
        m
    }

    pub fn from_fn(ring: &Ring, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix {
            ring: ring.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn from_rows(ring: &Ring, rows: Vec<Vec<Elem>>) -> Result<Matrix> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let n = rows.len();
        Ok(Matrix {
            ring: ring.clone(),
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer entries, convenient for constants and tests.
    pub fn from_ints(ring: &Ring, rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_fn(ring, rows.len(), cols, |i, j| ring.int(rows[i][j]))
    }

    /// Parses each entry with the ring's canonical grammar.
    pub fn parse(ring: &Ring, rows: &[&[&str]]) -> Result<Matrix> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| ring.parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(ring, parsed)
    }

    pub fn diagonal(ring: &Ring, entries: &[Elem]) -> Matrix {
        let n = entries.len();
        Matrix::from_fn(ring, n, n, |i, j| if i == j { entries[i].clone() } else { ring.zero() })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Elem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(&self.ring, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    fn same_ring(&self, other: &Matrix) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.same_ring(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let r = &self.ring;
        let mut out = Matrix::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if r.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !r.is_zero(b) {
                        let idx = i * other.cols + j;
                        out.data[idx] = r.add(&out.data[idx], &r.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    fn zip(&self, other: &Matrix, f: impl Fn(&Elem, &Elem) -> Elem) -> Result<Matrix> {
        self.same_ring(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch("entrywise operation".into()));
        }
        Ok(Matrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| self.ring.add(a, b))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| self.ring.sub(a, b))
    }

    pub fn map(&self, f: impl Fn(&Elem) -> Elem) -> Matrix {
        Matrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn neg(&self) -> Matrix {
        self.map(|a| self.ring.neg(a))
    }

    pub fn scale(&self, c: &Elem) -> Matrix {
        self.map(|a| self.ring.mul(c, a))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| self.ring.is_zero(a))
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(&self.ring, self.rows) && self.is_square()
    }

    /// First entry (row-major) where the two matrices differ.
    pub fn first_difference(&self, other: &Matrix) -> Option<(usize, usize)> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Some((0, 0));
        }
        (0..self.data.len())
            .find(|&k| self.data[k] != other.data[k])
            .map(|k| (k / self.cols, k % self.cols))
    }

    pub fn kron(&self, other: &Matrix) -> Result<Matrix> {
        self.same_ring(other)?;
        let r = &self.ring;
        Ok(Matrix::from_fn(r, self.rows * other.rows, self.cols * other.cols, |i, j| {
            let a = self.get(i / other.rows, j / other.cols);
            if r.is_zero(a) {
                return r.zero();
            }
            r.mul(a, other.get(i % other.rows, j % other.cols))
        }))
    }

    pub fn block_diag(ring: &Ring, blocks: &[&Matrix]) -> Result<Matrix> {
        if blocks.iter().any(|b| b.ring != *ring) {
            return Err(Error::RingMismatch);
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(ring, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.paste(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        Ok(out)
    }

    /// Assembles a matrix from a grid of blocks with consistent sizes.
    pub fn from_blocks(ring: &Ring, grid: &[&[&Matrix]]) -> Result<Matrix> {
        let heights: Vec<usize> = grid.iter().map(|row| row.first().map_or(0, |b| b.rows)).collect();
        let widths: Vec<usize> = grid.first().map_or(Vec::new(), |row| row.iter().map(|b| b.cols).collect());
        for (bi, row) in grid.iter().enumerate() {
            if row.len() != widths.len() {
                return Err(Error::DimensionMismatch("ragged block grid".into()));
            }
            for (bj, b) in row.iter().enumerate() {
                if b.ring != *ring {
                    return Err(Error::RingMismatch);
                }
                if b.rows != heights[bi] || b.cols != widths[bj] {
                    return Err(Error::DimensionMismatch("block sizes disagree".into()));
                }
            }
        }
        let mut out = Matrix::zeros(ring, heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                out.paste(r0, c0, b);
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        Ok(out)
    }

    fn paste(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        Matrix::from_blocks(&self.ring, &[&[self, other]])
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(&self.ring, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&rows, cols)
    }

    /// Column permutation matrix: column j is the basis vector `perm[j]`.
    pub fn permutation(ring: &Ring, perm: &[usize]) -> Matrix {
        let n = perm.len();
        Matrix::from_fn(ring, n, n, |i, j| if perm[j] == i { ring.one() } else { ring.zero() })
    }

    /// Maps every entry into `target` via [`Ring::embed`].
    pub fn embed(&self, target: &Ring) -> Result<Matrix> {
        let data = self
            .data
            .iter()
            .map(|a| target.embed(a, &self.ring))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix {
            ring: target.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Substitutes ring variables entrywise.
    pub fn substitute(&self, values: &[Elem], target: &Ring) -> Result<Matrix> {
        let data = self
            .data
            .iter()
            .map(|a| self.ring.substitute(a, values, target))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix {
            ring: target.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Sets one variable to `value` (an element of `target`) and keeps the
    /// others, which must exist in `target` under the same names.
    pub fn specialize(&self, var: &str, value: &Elem, target: &Ring) -> Result<Matrix> {
        self.ring.var_index(var)?;
        let values = self
            .ring
            .variables()
            .iter()
            .map(|v| if v == var { Ok(value.clone()) } else { target.var(v) })
            .collect::<Result<Vec<_>>>()?;
        self.substitute(&values, target)
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// Bareiss elimination over integral domains, Berkowitz otherwise.
    pub fn determinant(&self) -> Result<Elem> {
        self.require_square()?;
        if self.ring.is_domain() {
            Ok(self.bareiss())
        } else {
            let p = self.char_poly()?;
            let c = p.last().unwrap().clone();
            Ok(if self.rows % 2 == 0 { c } else { self.ring.neg(&c) })
        }
    }

    fn bareiss(&self) -> Elem {
        let r = &self.ring;
        let n = self.rows;
        if n == 0 {
            return r.one();
        }
        let mut a = self.clone();
        let mut prev = r.one();
        let mut negate = false;
        for k in 0..n - 1 {
            if r.is_zero(a.get(k, k)) {
                match (k + 1..n).find(|&i| !r.is_zero(a.get(i, k))) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        negate = !negate;
                    }
                    None => return r.zero(),
                }
            }
            let pivot = a.get(k, k).clone();
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = r.sub(&r.mul(&pivot, a.get(i, j)), &r.mul(a.get(i, k), a.get(k, j)));
                    let v = r.div_exact(&v, &prev).expect("Bareiss division is exact over a domain");
                    a.set(i, j, v);
                }
            }
            prev = pivot;
        }
        let d = a.get(n - 1, n - 1).clone();
        if negate {
            r.neg(&d)
        } else {
            d
        }
    }

    pub(crate) fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Division-free characteristic polynomial det(xI − A) by Berkowitz,
    /// coefficients from the leading 1 down to the constant term.
    pub fn char_poly(&self) -> Result<Vec<Elem>> {
        self.require_square()?;
        let r = &self.ring;
        let n = self.rows;
        let mut p = vec![r.one()];
        for k in 0..n {
            // Principal block of size k, row R = A[k][0..k], column C = A[0..k][k].
            let mut q = Vec::with_capacity(k + 2);
            q.push(r.one());
            q.push(r.neg(self.get(k, k)));
            let mut v: Vec<Elem> = (0..k).map(|i| self.get(i, k).clone()).collect();
            for _ in 0..k {
                let rc = r.dot((0..k).map(|j| (self.get(k, j), &v[j])));
                q.push(r.neg(&rc));
                v = (0..k)
                    .map(|i| r.dot((0..k).map(|j| (self.get(i, j), &v[j]))))
                    .collect();
            }
            let mut next = vec![r.zero(); k + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                for (j, pj) in p.iter().enumerate() {
                    if i >= j {
                        *slot = r.add(slot, &r.mul(&q[i - j], pj));
                    }
                }
            }
            p = next;
        }
        Ok(p)
    }

    /// Inverse when the determinant is a unit: Gauss–Jordan over fields,
    /// otherwise the Cayley–Hamilton adjugate divided by the determinant.
    pub fn inverse_if_unit(&self) -> Result<Matrix> {
        self.require_square()?;
        if self.ring.is_field() {
            return self.gauss_jordan_inverse().ok_or(Error::NotAUnit);
        }
        let r = &self.ring;
        let n = self.rows;
        let p = self.char_poly()?;
        let pn = &p[n];
        let det = if n % 2 == 0 { pn.clone() } else { r.neg(pn) };
        if !r.is_unit(&det) {
            return Err(Error::NotAUnit);
        }
        let mut b = Matrix::identity(r, n);
        for pk in p.iter().take(n).skip(1) {
            b = self.mul(&b)?;
            for i in 0..n {
                let idx = i * n + i;
                b.data[idx] = r.add(&b.data[idx], pk);
            }
        }
        let factor = r.neg(&r.inv(pn)?);
        Ok(b.scale(&factor))
    }

    fn gauss_jordan_inverse(&self) -> Option<Matrix> {
        let r = &self.ring;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(r, n);
        for c in 0..n {
            let p = (c..n).find(|&i| !r.is_zero(a.get(i, c)))?;
            a.swap_rows(c, p);
            inv.swap_rows(c, p);
            let s = r.inv(a.get(c, c)).ok()?;
            a.scale_row(c, &s);
            inv.scale_row(c, &s);
            for i in 0..n {
                if i != c && !r.is_zero(a.get(i, c)) {
                    let f = a.get(i, c).clone();
                    a.add_row_multiple(i, c, &r.neg(&f));
                    inv.add_row_multiple(i, c, &r.neg(&f));
                }
            }
        }
        Some(inv)
    }

    pub(crate) fn scale_row(&mut self, i: usize, s: &Elem) {
        for c in 0..self.cols {
            let idx = i * self.cols + c;
            self.data[idx] = self.ring.mul(s, &self.data[idx]);
        }
    }

    /// row_i += f · row_src
    pub(crate) fn add_row_multiple(&mut self, i: usize, src: usize, f: &Elem) {
        for c in 0..self.cols {
            let v = self.ring.mul(f, self.get(src, c));
            let idx = i * self.cols + c;
            self.data[idx] = self.ring.add(&self.data[idx], &v);
        }
    }

    /// Rank over a field by row reduction.
    pub fn rank(&self) -> Result<usize> {
        if !self.ring.is_field() {
            return Err(Error::NotAField);
        }
        let r = &self.ring;
        let mut a = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&i| !r.is_zero(a.get(i, c))) else {
                continue;
            };
            a.swap_rows(rank, p);
            let s = r.inv(a.get(rank, c)).unwrap();
            a.scale_row(rank, &s);
            for i in rank + 1..self.rows {
                if !r.is_zero(a.get(i, c)) {
                    let f = r.neg(a.get(i, c));
                    a.add_row_multiple(i, rank, &f);
                }
            }
            rank += 1;
        }
        Ok(rank)
    }

    /// Transpose of `self` congruence: `selfᵀ · g · self`.
    pub fn congruence(&self, g: &Matrix) -> Result<Matrix> {
        self.transpose().mul(&g.mul(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qt() -> Ring {
        Ring::polynomial(&Ring::Rationals, &["t"]).unwrap()
    }

    /// Laplace expansion along the first row; independent of both algorithms.
    fn cofactor_det(m: &Matrix) -> Elem {
        let r = m.ring();
        let n = m.rows();
        if n == 0 {
            return r.one();
        }
        let mut acc = r.zero();
        for j in 0..n {
            let rest: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let rows: Vec<usize> = (1..n).collect();
            let minor = cofactor_det(&m.submatrix(&rows, &rest));
            let term = r.mul(m.get(0, j), &minor);
            acc = if j % 2 == 0 { r.add(&acc, &term) } else { r.sub(&acc, &term) };
        }
        acc
    }

    #[test]
    fn determinant_examples() {
        let z = Ring::Integers;
        assert_eq!(Matrix::from_ints(&z, &[&[0, 1], &[-1, 0]]).determinant().unwrap(), z.int(1));
        assert_eq!(Matrix::from_ints(&z, &[&[0, 1], &[1, 0]]).determinant().unwrap(), z.int(-1));
        let r = qt();
        let m = Matrix::parse(&r, &[&["t", "1"], &["0", "t"]]).unwrap();
        let d = m.determinant().unwrap();
        assert_eq!(d, cofactor_det(&m));
        assert_eq!(r.format(&d), "t^2");
        assert!(matches!(Matrix::zeros(&z, 2, 3).determinant(), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn determinant_with_zero_divisors() {
        let z6 = Ring::modular(6).unwrap();
        let m = Matrix::from_ints(&z6, &[&[2, 3, 1], &[4, 0, 5], &[1, 1, 3]]);
        assert_eq!(m.determinant().unwrap(), cofactor_det(&m));
    }

    #[test]
    fn inverse_examples() {
        let z = Ring::Integers;
        let j = Matrix::from_ints(&z, &[&[0, 1], &[-1, 0]]);
        assert_eq!(j.inverse_if_unit().unwrap(), Matrix::from_ints(&z, &[&[0, -1], &[1, 0]]));
        let r = qt();
        let m = Matrix::parse(&r, &[&["1", "t"], &["0", "1"]]).unwrap();
        let inv = m.inverse_if_unit().unwrap();
        assert_eq!(inv, Matrix::parse(&r, &[&["1", "-t"], &["0", "1"]]).unwrap());
        assert!(m.mul(&inv).unwrap().is_identity());
        let d = Matrix::parse(&r, &[&["t", "0"], &["0", "t"]]).unwrap();
        assert_eq!(d.inverse_if_unit(), Err(Error::NotAUnit));
    }

    #[test]
    fn laurent_inverse() {
        let r = qt().invert_variable("t").unwrap();
        let m = Matrix::parse(&r, &[&["t", "1"], &["0", "t^-1"]]).unwrap();
        let inv = m.inverse_if_unit().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn kron_and_blocks() {
        let z = Ring::Integers;
        let a = Matrix::from_ints(&z, &[&[1, 2], &[3, 4]]);
        let i = Matrix::identity(&z, 2);
        let k = i.kron(&a).unwrap();
        assert_eq!(k, Matrix::block_diag(&z, &[&a, &a]).unwrap());
        assert_eq!(k.determinant().unwrap(), z.int(4));
        assert_eq!(Matrix::from_ints(&z, &[&[1, 2], &[2, 4]]).embed(&Ring::Rationals).unwrap().rank(), Ok(1));
    }
}
