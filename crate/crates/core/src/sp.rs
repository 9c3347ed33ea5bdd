//! The symplectic group Sp₂ₙ as a matrix group: membership, block swaps,
//! transvection factorizations and the I + tN homotopy paths.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forms::standard_j;
use crate::matrix::Matrix;
use crate::ring::{Elem, Ring};

/// `mᵀ J m = J` for the standard block form J.
pub fn is_symplectic(m: &Matrix) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() % 2 == 1 {
        return Err(Error::OddSize);
    }
    let j = standard_j(m.ring(), m.rows() / 2);
    Ok(m.congruence(&j)? == j)
}

/// A matrix certified to preserve the standard symplectic form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticMatrix(Matrix);

impl SymplecticMatrix {
    pub fn new(m: Matrix) -> Result<SymplecticMatrix> {
        if is_symplectic(&m)? {
            Ok(SymplecticMatrix(m))
        } else {
            Err(Error::NotSymplectic)
        }
    }

    pub fn identity(ring: &Ring, n: usize) -> SymplecticMatrix {
        SymplecticMatrix(Matrix::identity(ring, 2 * n))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Number of hyperbolic planes.
    pub fn planes(&self) -> usize {
        self.0.rows() / 2
    }

    pub fn mul(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        Ok(SymplecticMatrix(self.0.mul(&other.0)?))
    }
}

/// A ↦ A ⊕ [[0, −1],[1, 0]].
pub fn stabilize(a: &SymplecticMatrix) -> SymplecticMatrix {
    let ring = a.0.ring();
    let r = Matrix::from_ints(ring, &[&[0, -1], &[1, 0]]);
    SymplecticMatrix(Matrix::block_diag(ring, &[&a.0, &r]).expect("same ring"))
}

/// The permutation [[0, I₂ₙ],[I₂ₘ, 0]], so that P·(B ⊕ A)·P⁻¹ = A ⊕ B for
/// A of size 2n and B of size 2m.
pub fn block_swap(ring: &Ring, n: usize, m: usize) -> SymplecticMatrix {
    let top = 2 * n;
    let bottom = 2 * m;
    let perm: Vec<usize> = (0..top + bottom)
        .map(|j| if j < bottom { top + j } else { j - bottom })
        .collect();
    SymplecticMatrix::new(Matrix::permutation(ring, &perm)).expect("plane-wise permutations are symplectic")
}

/// x ↦ x + λ⟨x, v⟩v with ⟨x, v⟩ = xᵀJv; as a matrix, I + λ·v·(Jv)ᵀ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transvection {
    pub v: Vec<Elem>,
    pub lambda: Elem,
}

impl Transvection {
    pub fn new(v: Vec<Elem>, lambda: Elem) -> Transvection {
        Transvection { v, lambda }
    }

    pub fn from_ints(ring: &Ring, v: &[i64], lambda: i64) -> Transvection {
        Transvection {
            v: v.iter().map(|x| ring.int(*x)).collect(),
            lambda: ring.int(lambda),
        }
    }

    /// The square-zero part λ·v·(Jv)ᵀ.
    pub fn nilpotent(&self, ring: &Ring) -> Matrix {
        let n = self.v.len();
        let col = Matrix::from_fn(ring, n, 1, |i, _| self.v[i].clone());
        let jv = standard_j(ring, n / 2).mul(&col).expect("even length");
        col.mul(&jv.transpose()).expect("outer product").scale(&self.lambda)
    }

    pub fn matrix(&self, ring: &Ring) -> Matrix {
        Matrix::identity(ring, self.v.len()).add(&self.nilpotent(ring)).expect("same shape")
    }
}

/// Product T₁·T₂·…·T_k, or the identity of size `size` for an empty list.
pub fn product(ring: &Ring, size: usize, factors: &[Transvection]) -> Result<Matrix> {
    let mut acc = Matrix::identity(ring, size);
    for t in factors {
        if t.v.len() != size {
            return Err(Error::DimensionMismatch(format!("transvection of length {}", t.v.len())));
        }
        acc = acc.mul(&t.matrix(ring))?;
    }
    Ok(acc)
}

/// The four plane-preserving signed permutations in Sp₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PlaneBlock {
    Identity,
    Rotation,
    MinusIdentity,
    InverseRotation,
}

/// In-plane factor patterns as (on e, coefficient) pairs: T_e(c) = E₁₂(−c),
/// T_f(c) = E₂₁(c).
fn plane_pattern(b: PlaneBlock) -> &'static [(bool, i64)] {
    match b {
        PlaneBlock::Identity => &[],
        PlaneBlock::Rotation => &[(true, 1), (false, 1), (true, 1)],
        PlaneBlock::InverseRotation => &[(true, -1), (false, -1), (true, -1)],
        PlaneBlock::MinusIdentity => &[(true, 1), (false, 1), (true, 2), (false, 1), (true, 1)],
    }
}

fn classify_block(m: &Matrix, r0: usize, c0: usize) -> Option<Option<PlaneBlock>> {
    let ring = m.ring();
    let mut vals = [0i64; 4];
    for (k, slot) in vals.iter_mut().enumerate() {
        let x = m.get(r0 + k / 2, c0 + k % 2);
        *slot = if ring.is_zero(x) {
            0
        } else if ring.is_one(x) {
            1
        } else if ring.is_one(&ring.neg(x)) {
            -1
        } else {
            return None;
        };
    }
    Some(match vals {
        [0, 0, 0, 0] => None,
        [1, 0, 0, 1] => Some(PlaneBlock::Identity),
        [0, -1, 1, 0] => Some(PlaneBlock::Rotation),
        [-1, 0, 0, -1] => Some(PlaneBlock::MinusIdentity),
        [0, 1, -1, 0] => Some(PlaneBlock::InverseRotation),
        _ => return None,
    })
}

fn unit_vector_combo(ring: &Ring, size: usize, entries: &[(usize, i64)]) -> Vec<Elem> {
    let mut v = vec![ring.zero(); size];
    for (i, c) in entries {
        v[*i] = ring.add(&v[*i], &ring.int(*c));
    }
    v
}

/// Exchange of planes k and k+1 as three transvections: with a = e_{k+1} − e_k
/// and b = f_{k+1} − f_k, the swap is T_{a+b}(1)·T_b(1)·T_a(1).
pub fn adjacent_plane_swap(ring: &Ring, planes: usize, k: usize) -> Vec<Transvection> {
    let size = 2 * planes;
    let (e1, f1, e2, f2) = (2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3);
    let a = [(e1, -1), (e2, 1)];
    let b = [(f1, -1), (f2, 1)];
    let ab = [(e1, -1), (f1, -1), (e2, 1), (f2, 1)];
    let one = ring.one();
    vec![
        Transvection::new(unit_vector_combo(ring, size, &ab), one.clone()),
        Transvection::new(unit_vector_combo(ring, size, &b), one.clone()),
        Transvection::new(unit_vector_combo(ring, size, &a), one),
    ]
}

/// Factors a plane-wise signed permutation (every 2×2 block is zero or one
/// of ±I, ±R with R the quarter rotation) into symplectic transvections.
/// Block swaps are the unsigned case.
pub fn factor_into_transvections(p: &SymplecticMatrix) -> Result<Vec<Transvection>> {
    let m = &p.0;
    let ring = m.ring();
    let planes = p.planes();
    // image[q] is the plane that column plane q lands in.
    let mut image = vec![usize::MAX; planes];
    let mut blocks = vec![PlaneBlock::Identity; planes];
    let mut hit = vec![false; planes];
    for q in 0..planes {
        for r in 0..planes {
            match classify_block(m, 2 * r, 2 * q) {
                None => return Err(Error::UnsupportedInput("not a plane-wise signed permutation".into())),
                Some(None) => {}
                Some(Some(b)) => {
                    if image[q] != usize::MAX || hit[r] {
                        return Err(Error::UnsupportedInput("not a plane-wise signed permutation".into()));
                    }
                    image[q] = r;
                    hit[r] = true;
                    blocks[q] = b;
                }
            }
        }
        if image[q] == usize::MAX {
            return Err(Error::UnsupportedInput("singular block column".into()));
        }
    }
    // P = Π·D with D block diagonal. Bubble-sorting the image sequence by
    // right multiplication with swaps s_k gives Π·s_{k1}⋯s_{kr} = I, hence
    // Π = s_{kr}⋯s_{k1}.
    let mut seq = image.clone();
    let mut swaps = Vec::new();
    for pass in 0..planes {
        for k in 0..planes.saturating_sub(1 + pass) {
            if seq[k] > seq[k + 1] {
                seq.swap(k, k + 1);
                swaps.push(k);
            }
        }
    }
    let mut out = Vec::new();
    for k in swaps.iter().rev() {
        out.extend(adjacent_plane_swap(ring, planes, *k));
    }
    for (q, b) in blocks.iter().enumerate() {
        for (on_e, c) in plane_pattern(*b) {
            let idx = if *on_e { 2 * q } else { 2 * q + 1 };
            out.push(Transvection::new(unit_vector_combo(ring, 2 * planes, &[(idx, 1)]), ring.int(*c)));
        }
    }
    let check = product(ring, m.rows(), &out)?;
    debug_assert_eq!(&check, m);
    if &check != m {
        return Err(Error::NoMatchFound);
    }
    Ok(out)
}

/// Paths F(t) = I + tN over R[t], one per factor, each verified symplectic
/// as a polynomial identity with F(0) = I and F(1) the factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyPath {
    pub base: Vec<Transvection>,
    pub parameter: String,
    pub ring: Ring,
    pub paths: Vec<Matrix>,
}

/// A variable name not already used by `ring`.
pub fn fresh_variable(ring: &Ring, stem: &str) -> String {
    let mut name = String::from(stem);
    while ring.var_index(&name).is_ok() {
        name.push('_');
    }
    name
}

pub fn homotopy_witness(ring: &Ring, size: usize, factors: &[Transvection]) -> Result<HomotopyPath> {
    let parameter = fresh_variable(ring, "t");
    let ext = Ring::polynomial(ring, &[parameter.as_str()])?;
    let t = ext.var(&parameter)?;
    let j = standard_j(&ext, size / 2);
    let mut paths = Vec::with_capacity(factors.len());
    for f in factors {
        let n = f.nilpotent(ring).embed(&ext)?;
        if !n.mul(&n)?.is_zero() {
            return Err(Error::UnsupportedInput("factor is not unipotent of square zero".into()));
        }
        let path = Matrix::identity(&ext, size).add(&n.scale(&t))?;
        if path.congruence(&j)? != j {
            return Err(Error::NotSymplectic);
        }
        let at0 = path.specialize(&parameter, &ring.zero(), ring)?;
        let at1 = path.specialize(&parameter, &ring.one(), ring)?;
        if !at0.is_identity() || at1 != f.matrix(ring) {
            return Err(Error::NoMatchFound);
        }
        paths.push(path);
    }
    Ok(HomotopyPath {
        base: factors.to_vec(),
        parameter,
        ring: ext,
        paths,
    })
}

impl HomotopyPath {
    /// The product path ∏ F_k(t), itself symplectic over R[t].
    pub fn composite(&self) -> Result<Matrix> {
        let size = self.paths.first().map_or(0, Matrix::rows);
        let mut acc = Matrix::identity(&self.ring, size);
        for p in &self.paths {
            acc = acc.mul(p)?;
        }
        Ok(acc)
    }

    /// Composite evaluated at t = 1 over the base ring.
    pub fn endpoint(&self, base: &Ring) -> Result<Matrix> {
        self.composite()?.specialize(&self.parameter, &base.one(), base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Ring {
        Ring::Integers
    }

    #[test]
    fn membership_examples() {
        let z = z();
        assert_eq!(is_symplectic(&Matrix::identity(&z, 2)), Ok(true));
        assert_eq!(is_symplectic(&Matrix::from_ints(&z, &[&[1, 1], &[0, 1]])), Ok(true));
        assert_eq!(is_symplectic(&Matrix::from_ints(&z, &[&[2, 0], &[0, 1]])), Ok(false));
        assert_eq!(is_symplectic(&Matrix::identity(&z, 3)), Err(Error::OddSize));
        assert!(SymplecticMatrix::new(Matrix::from_ints(&z, &[&[2, 0], &[0, 1]])).is_err());
    }

    #[test]
    fn stabilization() {
        let z = z();
        let s = stabilize(&SymplecticMatrix::identity(&z, 1));
        let expected = Matrix::from_ints(&z, &[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]]);
        assert_eq!(*s.matrix(), expected);
        assert_eq!(stabilize(&s).matrix().rows(), 6);
        let a = SymplecticMatrix::new(Matrix::from_ints(&z, &[&[1, 1], &[0, 1]])).unwrap();
        assert_eq!(
            stabilize(&a).matrix().determinant().unwrap(),
            a.matrix().determinant().unwrap()
        );
    }

    #[test]
    fn block_swap_conjugates() {
        let z = z();
        let a = Matrix::from_ints(&z, &[&[1, 1], &[0, 1]]);
        let b = Matrix::from_ints(&z, &[&[1, 0], &[2, 1]]);
        let p = block_swap(&z, 1, 1).into_matrix();
        let pinv = p.inverse_if_unit().unwrap();
        let ba = Matrix::block_diag(&z, &[&b, &a]).unwrap();
        let ab = Matrix::block_diag(&z, &[&a, &b]).unwrap();
        assert_eq!(p.mul(&ba).unwrap().mul(&pinv).unwrap(), ab);
    }

    #[test]
    fn rotation_is_three_transvections() {
        let z = z();
        let r = SymplecticMatrix::new(Matrix::from_ints(&z, &[&[0, -1], &[1, 0]])).unwrap();
        let f = factor_into_transvections(&r).unwrap();
        assert_eq!(f.len(), 3);
        // The SL₂ pattern E₁₂(−1)·E₂₁(1)·E₁₂(−1).
        let e12 = Matrix::from_ints(&z, &[&[1, -1], &[0, 1]]);
        let e21 = Matrix::from_ints(&z, &[&[1, 0], &[1, 1]]);
        assert_eq!(f[0].matrix(&z), e12);
        assert_eq!(f[1].matrix(&z), e21);
        assert_eq!(e12.mul(&e21).unwrap().mul(&e12).unwrap(), *r.matrix());
    }

    #[test]
    fn swap_factorization() {
        let z = z();
        assert!(factor_into_transvections(&SymplecticMatrix::identity(&z, 2)).unwrap().is_empty());
        let p = block_swap(&z, 1, 1);
        let f = factor_into_transvections(&p).unwrap();
        assert!(f.len() <= 12);
        assert_eq!(product(&z, 4, &f).unwrap(), *p.matrix());
        for t in &f {
            let n = t.nilpotent(&z);
            assert!(n.mul(&n).unwrap().is_zero());
        }
    }

    #[test]
    fn rejects_general_matrices() {
        let z = z();
        let a = SymplecticMatrix::new(Matrix::from_ints(&z, &[&[1, 1], &[0, 1]])).unwrap();
        assert!(matches!(factor_into_transvections(&a), Err(Error::UnsupportedInput(_))));
    }

    #[test]
    fn homotopy_paths() {
        let z = z();
        let single = vec![Transvection::from_ints(&z, &[1, 2], 3)];
        let h = homotopy_witness(&z, 2, &single).unwrap();
        assert_eq!(h.paths.len(), 1);
        assert!(homotopy_witness(&z, 2, &[]).unwrap().paths.is_empty());
        let p = block_swap(&z, 1, 1);
        let f = factor_into_transvections(&p).unwrap();
        let h = homotopy_witness(&z, 4, &f).unwrap();
        assert_eq!(h.endpoint(&z).unwrap(), *p.matrix());
        let j = standard_j(&h.ring, 2);
        assert_eq!(h.composite().unwrap().congruence(&j).unwrap(), j);
    }

    #[test]
    fn fresh_parameter_avoids_collisions() {
        let r = Ring::polynomial(&Ring::Rationals, &["t"]).unwrap();
        assert_eq!(fresh_variable(&r, "t"), "t_");
        let f = vec![Transvection::new(vec![r.var("t").unwrap(), r.one()], r.one())];
        let h = homotopy_witness(&r, 2, &f).unwrap();
        assert_eq!(h.parameter, "t_");
    }
}
