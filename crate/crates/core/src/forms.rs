//! Bilinear spaces over free modules and certified isometries between them.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::{Elem, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Symmetric,
    Alternating,
}

impl Flavor {
    /// Flavor of a tensor product: like flavors give Symmetric, mixed give Alternating.
    pub fn tensor(self, other: Flavor) -> Flavor {
        if self == other {
            Flavor::Symmetric
        } else {
            Flavor::Alternating
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Symmetric => "symmetric",
            Flavor::Alternating => "alternating",
        }
    }
}

/// A Gram matrix with a checked flavor. Unimodularity is not assumed; see
/// [`BilinearSpace::is_unimodular`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BilinearSpace {
    flavor: Flavor,
    gram: Matrix,
}

pub(crate) fn check_flavor(flavor: Flavor, g: &Matrix) -> Result<()> {
    if !g.is_square() {
        return Err(Error::NonSquare {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    let r = g.ring();
    let n = g.rows();
    match flavor {
        Flavor::Alternating => {
            // Zero diagonal is the defining condition, which keeps the test
            // meaningful in characteristic two.
            for i in 0..n {
                if !r.is_zero(g.get(i, i)) {
                    return Err(Error::NotAlternating);
                }
                for j in 0..i {
                    if *g.get(i, j) != r.neg(g.get(j, i)) {
                        return Err(Error::NotAlternating);
                    }
                }
            }
        }
        Flavor::Symmetric => {
            for i in 0..n {
                for j in 0..i {
                    if g.get(i, j) != g.get(j, i) {
                        return Err(Error::NotSymmetric);
                    }
                }
            }
        }
    }
    Ok(())
}

impl BilinearSpace {
    pub fn new(flavor: Flavor, gram: Matrix) -> Result<BilinearSpace> {
        check_flavor(flavor, &gram)?;
        Ok(BilinearSpace { flavor, gram })
    }

    /// Diagonal symmetric space ⟨d₁, …, d_k⟩.
    pub fn diagonal(ring: &Ring, entries: &[Elem]) -> BilinearSpace {
        BilinearSpace {
            flavor: Flavor::Symmetric,
            gram: Matrix::diagonal(ring, entries),
        }
    }

    pub fn zero(ring: &Ring, flavor: Flavor) -> BilinearSpace {
        BilinearSpace {
            flavor,
            gram: Matrix::zeros(ring, 0, 0),
        }
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn ring(&self) -> &Ring {
        self.gram.ring()
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn is_unimodular(&self) -> bool {
        let d = self.gram.determinant().expect("gram is square");
        self.ring().is_unit(&d)
    }

    pub fn require_unimodular(&self) -> Result<()> {
        if self.is_unimodular() {
            Ok(())
        } else {
            Err(Error::NotUnimodular)
        }
    }

    /// ⟨x, y⟩ = xᵀ G y for column vectors given as slices.
    pub fn pair(&self, x: &[Elem], y: &[Elem]) -> Elem {
        let r = self.ring();
        let n = self.rank();
        let mut acc = r.zero();
        for i in 0..n {
            if r.is_zero(&x[i]) {
                continue;
            }
            let gy = r.dot((0..n).map(|j| (self.gram.get(i, j), &y[j])));
            acc = r.add(&acc, &r.mul(&x[i], &gy));
        }
        acc
    }

    /// The space with Gram `basisᵀ·G·basis`, for a basis of a subspace.
    pub fn restrict(&self, basis: &Matrix) -> Result<BilinearSpace> {
        let g = basis.congruence(&self.gram)?;
        BilinearSpace::new(self.flavor, g)
    }

    pub fn negate(&self) -> BilinearSpace {
        BilinearSpace {
            flavor: self.flavor,
            gram: self.gram.neg(),
        }
    }

    pub fn embed(&self, ring: &Ring) -> Result<BilinearSpace> {
        Ok(BilinearSpace {
            flavor: self.flavor,
            gram: self.gram.embed(ring)?,
        })
    }
}

/// The 2×2 hyperbolic plane: [[0,1],[1,0]] or [[0,1],[-1,0]].
pub fn hyperbolic_plane(ring: &Ring, flavor: Flavor) -> Matrix {
    let s = match flavor {
        Flavor::Symmetric => 1,
        Flavor::Alternating => -1,
    };
    Matrix::from_ints(ring, &[&[0, 1], &[s, 0]])
}

/// n orthogonal copies of the hyperbolic plane.
pub fn hyperbolic(ring: &Ring, flavor: Flavor, n: usize) -> BilinearSpace {
    let plane = hyperbolic_plane(ring, flavor);
    let gram = Matrix::identity(ring, n).kron(&plane).expect("same ring");
    BilinearSpace { flavor, gram }
}

/// The standard symplectic Gram of rank 2n.
pub fn standard_j(ring: &Ring, n: usize) -> Matrix {
    hyperbolic(ring, Flavor::Alternating, n).gram
}

/// [[0, I],[-I, 0]] of rank 2q.
pub fn hyperbolic_of_rank(q_rank: usize, ring: &Ring) -> BilinearSpace {
    let i = Matrix::identity(ring, q_rank);
    let z = Matrix::zeros(ring, q_rank, q_rank);
    let gram = Matrix::from_blocks(ring, &[&[&z, &i], &[&i.neg(), &z]]).expect("consistent blocks");
    BilinearSpace {
        flavor: Flavor::Alternating,
        gram,
    }
}

pub fn orthogonal_sum(a: &BilinearSpace, b: &BilinearSpace) -> Result<BilinearSpace> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    if a.flavor != b.flavor {
        return Err(Error::FlavorMismatch);
    }
    Ok(BilinearSpace {
        flavor: a.flavor,
        gram: Matrix::block_diag(a.ring(), &[&a.gram, &b.gram])?,
    })
}

pub fn orthogonal_sum_all(ring: &Ring, flavor: Flavor, parts: &[&BilinearSpace]) -> Result<BilinearSpace> {
    let mut acc = BilinearSpace::zero(ring, flavor);
    for p in parts {
        acc = orthogonal_sum(&acc, p)?;
    }
    Ok(acc)
}

pub fn tensor_product(a: &BilinearSpace, b: &BilinearSpace) -> Result<BilinearSpace> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    let gram = a.gram.kron(&b.gram)?;
    let flavor = a.flavor.tensor(b.flavor);
    check_flavor(flavor, &gram)?;
    Ok(BilinearSpace { flavor, gram })
}

/// A verified congruence `witnessᵀ · G_source · witness = G_target`.
/// Columns of the witness are the target basis in source coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    source: BilinearSpace,
    target: BilinearSpace,
    witness: Matrix,
}

pub fn check_isometry(a: &BilinearSpace, b: &BilinearSpace, t: &Matrix) -> Result<Isometry> {
    if a.ring() != b.ring() || t.ring() != a.ring() {
        return Err(Error::RingMismatch);
    }
    if t.rows() != a.rank() || t.cols() != b.rank() {
        return Err(Error::DimensionMismatch("witness shape".into()));
    }
    if !t.is_square() {
        return Err(Error::NotInvertible);
    }
    let d = t.determinant()?;
    if !t.ring().is_unit(&d) {
        return Err(Error::NotInvertible);
    }
    let image = t.congruence(&a.gram)?;
    if let Some((row, col)) = image.first_difference(&b.gram) {
        return Err(Error::CongruenceFails { row, col });
    }
    Ok(Isometry {
        source: a.clone(),
        target: b.clone(),
        witness: t.clone(),
    })
}

impl Isometry {
    pub fn source(&self) -> &BilinearSpace {
        &self.source
    }

    pub fn target(&self) -> &BilinearSpace {
        &self.target
    }

    pub fn witness(&self) -> &Matrix {
        &self.witness
    }

    pub fn identity(space: &BilinearSpace) -> Isometry {
        Isometry {
            source: space.clone(),
            target: space.clone(),
            witness: Matrix::identity(space.ring(), space.rank()),
        }
    }

    /// `self` then `next`: the witness is the product of the two witnesses.
    pub fn compose(&self, next: &Isometry) -> Result<Isometry> {
        if self.target != next.source {
            return Err(Error::DimensionMismatch("isometries do not chain".into()));
        }
        check_isometry(&self.source, &next.target, &self.witness.mul(&next.witness)?)
    }

    pub fn inverse(&self) -> Result<Isometry> {
        let w = self.witness.inverse_if_unit().map_err(|_| Error::NotInvertible)?;
        check_isometry(&self.target, &self.source, &w)
    }

    pub fn orthogonal_sum(&self, other: &Isometry) -> Result<Isometry> {
        let s = orthogonal_sum(&self.source, &other.source)?;
        let t = orthogonal_sum(&self.target, &other.target)?;
        let w = Matrix::block_diag(s.ring(), &[&self.witness, &other.witness])?;
        check_isometry(&s, &t, &w)
    }
}

/// The strictly lower-triangular L with m = L − Lᵀ.
pub fn lower_decompose(m: &Matrix) -> Result<Matrix> {
    check_flavor(Flavor::Alternating, m).map_err(|e| match e {
        Error::NonSquare { .. } => e,
        _ => Error::NotAlternating,
    })?;
    let r = m.ring();
    Ok(Matrix::from_fn(r, m.rows(), m.cols(), |i, j| {
        if i > j {
            m.get(i, j).clone()
        } else {
            r.zero()
        }
    }))
}

/// Embeds S ⊥ (−S) into the hyperbolic space [[0, −I],[I, 0]]: with
/// S⁻¹ = L − Lᵀ the witness [[L, I],[Lᵀ, I]] carries one Gram to the other.
pub fn embed_into_hyperbolic(s: &BilinearSpace) -> Result<Isometry> {
    if s.flavor != Flavor::Alternating {
        return Err(Error::NotAlternating);
    }
    let ring = s.ring();
    let sinv = s.gram.inverse_if_unit().map_err(|_| Error::NotUnimodular)?;
    let l = lower_decompose(&sinv)?;
    let m = s.rank();
    let i = Matrix::identity(ring, m);
    let w = Matrix::from_blocks(ring, &[&[&l, &i], &[&l.transpose(), &i]])?;
    let source = orthogonal_sum(s, &s.negate())?;
    check_isometry(&source, &antidiagonal_hyperbolic(ring, m), &w)
}

/// [[0, −I],[I, 0]] of rank 2m, the target of [`embed_into_hyperbolic`].
pub fn antidiagonal_hyperbolic(ring: &Ring, m: usize) -> BilinearSpace {
    hyperbolic_of_rank(m, ring).negate()
}

/// Perfect shuffle from [[0, I],[−I, 0]] to the standard block form.
pub fn shuffle_isometry(ring: &Ring, m: usize) -> Isometry {
    let perm: Vec<usize> = (0..m).flat_map(|i| [i, m + i]).collect();
    check_isometry(
        &hyperbolic_of_rank(m, ring),
        &hyperbolic(ring, Flavor::Alternating, m),
        &Matrix::permutation(ring, &perm),
    )
    .expect("perfect shuffle is an isometry")
}

/// From [[0, −I],[I, 0]] to the standard block form: the shuffle with the
/// two halves exchanged.
pub fn antidiagonal_to_standard(ring: &Ring, m: usize) -> Isometry {
    let perm: Vec<usize> = (0..m).flat_map(|i| [m + i, i]).collect();
    check_isometry(
        &antidiagonal_hyperbolic(ring, m),
        &hyperbolic(ring, Flavor::Alternating, m),
        &Matrix::permutation(ring, &perm),
    )
    .expect("signed shuffle is an isometry")
}

/// Symplectic Gram–Schmidt with the first unit entry (row-major) as pivot.
pub fn standardize_symplectic(s: &BilinearSpace) -> Result<Isometry> {
    if s.flavor != Flavor::Alternating {
        return Err(Error::NotAlternating);
    }
    s.require_unimodular()?;
    let ring = s.ring();
    let n = s.rank();
    let mut work: Vec<Vec<Elem>> = Matrix::identity(ring, n).to_rows();
    let mut out: Vec<Vec<Elem>> = Vec::with_capacity(n);
    while !work.is_empty() {
        let k = work.len();
        let residual = Matrix::from_fn(ring, k, k, |i, j| s.pair(&work[i], &work[j]));
        let pivot = (0..k * k)
            .map(|idx| (idx / k, idx % k))
            .find(|&(i, j)| ring.is_unit(residual.get(i, j)));
        let Some((i, j)) = pivot else {
            return Err(Error::NoUnitPivot {
                residual: alloc::boxed::Box::new(residual),
            });
        };
        let c = ring.inv(residual.get(i, j))?;
        let e = work[i].clone();
        let f: Vec<Elem> = work[j].iter().map(|x| ring.mul(&c, x)).collect();
        let rest: Vec<Vec<Elem>> = work
            .iter()
            .enumerate()
            .filter(|(idx, _)| *idx != i && *idx != j)
            .map(|(_, w)| {
                // w − ⟨w,f⟩e + ⟨w,e⟩f is orthogonal to both e and f.
                let wf = s.pair(w, &f);
                let we = s.pair(w, &e);
                (0..n)
                    .map(|t| ring.add(&ring.sub(&w[t], &ring.mul(&wf, &e[t])), &ring.mul(&we, &f[t])))
                    .collect()
            })
            .collect();
        out.push(e);
        out.push(f);
        work = rest;
    }
    let w = Matrix::from_rows(ring, out)?.transpose();
    check_isometry(s, &hyperbolic(ring, Flavor::Alternating, n / 2), &w)
}

/// Change of basis for one pair of planes: the columns are e₁⊗e₁, e₂⊗e₂
/// followed by the mixed vectors in an order and sign that make a
/// hyperbolic pair of the product flavor.
fn plane_tensor_columns(a: Flavor, b: Flavor) -> [(usize, usize, i64); 4] {
    match (a, b) {
        (Flavor::Alternating, Flavor::Alternating) => [(0, 0, 1), (1, 1, 1), (0, 1, 1), (1, 0, -1)],
        (Flavor::Symmetric, Flavor::Alternating) => [(0, 0, 1), (1, 1, 1), (1, 0, 1), (0, 1, 1)],
        _ => [(0, 0, 1), (1, 1, 1), (0, 1, 1), (1, 0, 1)],
    }
}

/// Isometry from Hⁿ ⊗ Hᵐ (of the given flavors) to the hyperbolic space of
/// rank 4nm and product flavor. Plane pairs (p, q) are visited in
/// lexicographic order and each contributes two consecutive planes.
pub fn tensor_hyperbolic_isometry(ring: &Ring, fa: Flavor, n: usize, fb: Flavor, m: usize) -> Result<Isometry> {
    let a = hyperbolic(ring, fa, n);
    let b = hyperbolic(ring, fb, m);
    let source = tensor_product(&a, &b)?;
    let flavor = fa.tensor(fb);
    let dim = 4 * n * m;
    let cols = plane_tensor_columns(fa, fb);
    let mut w = Matrix::zeros(ring, dim, dim);
    let mut col = 0;
    for p in 0..n {
        for q in 0..m {
            for (s, u, sign) in cols {
                let row = (2 * p + s) * 2 * m + 2 * q + u;
                w.set(row, col, ring.int(sign));
                col += 1;
            }
        }
    }
    check_isometry(&source, &hyperbolic(ring, flavor, 2 * n * m), &w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_planes_follow_the_matrices() {
        let z = Ring::Integers;
        assert_eq!(
            *hyperbolic(&z, Flavor::Alternating, 1).gram(),
            Matrix::from_ints(&z, &[&[0, 1], &[-1, 0]])
        );
        assert_eq!(
            *hyperbolic(&z, Flavor::Symmetric, 1).gram(),
            Matrix::from_ints(&z, &[&[0, 1], &[1, 0]])
        );
        assert_eq!(hyperbolic(&z, Flavor::Alternating, 0).rank(), 0);
        assert!(hyperbolic(&z, Flavor::Symmetric, 3).is_unimodular());
    }

    #[test]
    fn orthogonal_sums() {
        let z = Ring::Integers;
        let hm = hyperbolic(&z, Flavor::Alternating, 1);
        let hp = hyperbolic(&z, Flavor::Symmetric, 1);
        assert_eq!(orthogonal_sum(&hm, &hm).unwrap(), hyperbolic(&z, Flavor::Alternating, 2));
        assert_eq!(orthogonal_sum(&hp, &hm), Err(Error::FlavorMismatch));
        let zero = BilinearSpace::zero(&z, Flavor::Alternating);
        assert_eq!(orthogonal_sum(&zero, &hm).unwrap(), hm);
        let q = hyperbolic(&Ring::Rationals, Flavor::Alternating, 1);
        assert_eq!(orthogonal_sum(&q, &hm), Err(Error::RingMismatch));
    }

    #[test]
    fn tensor_flavors() {
        let z = Ring::Integers;
        let hm = hyperbolic(&z, Flavor::Alternating, 1);
        let hp = hyperbolic(&z, Flavor::Symmetric, 1);
        let mm = tensor_product(&hm, &hm).unwrap();
        assert_eq!(mm.flavor(), Flavor::Symmetric);
        assert_eq!(mm.gram().determinant().unwrap(), z.int(1));
        assert_eq!(tensor_product(&hp, &hm).unwrap().flavor(), Flavor::Alternating);
        let one = BilinearSpace::diagonal(&z, &[z.one()]);
        assert_eq!(tensor_product(&one, &hm).unwrap(), hm);
    }

    #[test]
    fn check_isometry_examples() {
        let z = Ring::Integers;
        let hm = hyperbolic(&z, Flavor::Alternating, 1);
        assert!(check_isometry(&hm, &hm, &Matrix::identity(&z, 2)).is_ok());
        let swap = Matrix::from_ints(&z, &[&[0, 1], &[1, 0]]);
        assert_eq!(check_isometry(&hm, &hm, &swap), Err(Error::CongruenceFails { row: 0, col: 1 }));
        let q = Ring::Rationals;
        let two = BilinearSpace::new(Flavor::Alternating, Matrix::from_ints(&q, &[&[0, 2], &[-2, 0]])).unwrap();
        let d = Matrix::diagonal(&q, &[q.int(2), q.int(1)]);
        let hq = hyperbolic(&q, Flavor::Alternating, 1);
        // diag(2,1) carries the standard plane onto [[0,2],[-2,0]].
        assert!(check_isometry(&hq, &two, &d).is_ok());
        let sing = Matrix::from_ints(&z, &[&[1, 1], &[1, 1]]);
        assert_eq!(check_isometry(&hm, &hm, &sing), Err(Error::NotInvertible));
    }

    #[test]
    fn lower_decompose_examples() {
        let z = Ring::Integers;
        let m = Matrix::from_ints(&z, &[&[0, -1], &[1, 0]]);
        assert_eq!(lower_decompose(&m).unwrap(), Matrix::from_ints(&z, &[&[0, 0], &[1, 0]]));
        let big = Matrix::from_ints(
            &z,
            &[&[0, 1, 2, 3], &[-1, 0, 4, 5], &[-2, -4, 0, 6], &[-3, -5, -6, 0]],
        );
        let l = lower_decompose(&big).unwrap();
        assert_eq!(l.sub(&l.transpose()).unwrap(), big);
        assert_eq!(
            lower_decompose(&Matrix::from_ints(&z, &[&[0, 1], &[1, 0]])),
            Err(Error::NotAlternating)
        );
    }

    #[test]
    fn embedding_of_the_standard_plane() {
        let z = Ring::Integers;
        let iso = embed_into_hyperbolic(&hyperbolic(&z, Flavor::Alternating, 1)).unwrap();
        let l = Matrix::from_ints(&z, &[&[0, 0], &[1, 0]]);
        let i = Matrix::identity(&z, 2);
        let expected = Matrix::from_blocks(&z, &[&[&l, &i], &[&l.transpose(), &i]]).unwrap();
        assert_eq!(*iso.witness(), expected);
        // The cross term LᵀSL − LSLᵀ vanishes.
        let s = standard_j(&z, 1);
        let cross = l.congruence(&s).unwrap().sub(&l.transpose().congruence(&s).unwrap()).unwrap();
        assert!(cross.is_zero());
        let bad = BilinearSpace::new(Flavor::Alternating, Matrix::from_ints(&z, &[&[0, 2], &[-2, 0]])).unwrap();
        assert_eq!(embed_into_hyperbolic(&bad), Err(Error::NotUnimodular));
    }

    #[test]
    fn standardize_examples() {
        let q = Ring::Rationals;
        let two = BilinearSpace::new(Flavor::Alternating, Matrix::from_ints(&q, &[&[0, 2], &[-2, 0]])).unwrap();
        let iso = standardize_symplectic(&two).unwrap();
        assert_eq!(*iso.witness(), Matrix::diagonal(&q, &[q.one(), q.fraction(1, 2).unwrap()]));
        let z = Ring::Integers;
        let hm = hyperbolic(&z, Flavor::Alternating, 1);
        assert!(standardize_symplectic(&hm).unwrap().witness().is_identity());
        let bad = BilinearSpace::new(Flavor::Alternating, Matrix::from_ints(&z, &[&[0, 2], &[-2, 0]])).unwrap();
        assert_eq!(standardize_symplectic(&bad), Err(Error::NotUnimodular));
    }

    #[test]
    fn standardize_reports_missing_unit_pivot() {
        // Unimodular over ℤ/6 yet no single entry is a unit.
        let r = Ring::modular(6).unwrap();
        let g = Matrix::from_ints(
            &r,
            &[&[0, 2, 3, 0], &[-2, 0, 0, 3], &[-3, 0, 0, 2], &[0, -3, -2, 0]],
        );
        let s = BilinearSpace::new(Flavor::Alternating, g).unwrap();
        // Pfaffian 2·2 − 3·3 = −5 is a unit mod 6.
        assert!(s.is_unimodular());
        assert!(matches!(standardize_symplectic(&s), Err(Error::NoUnitPivot { .. })));
    }

    #[test]
    fn hyperbolic_of_rank_shuffles_to_standard() {
        let z = Ring::Integers;
        assert_eq!(*hyperbolic_of_rank(1, &z).gram(), standard_j(&z, 1));
        assert_eq!(hyperbolic_of_rank(0, &z).rank(), 0);
        let iso = shuffle_isometry(&z, 2);
        assert_eq!(iso.source().rank(), 4);
        assert!(antidiagonal_to_standard(&z, 3).inverse().is_ok());
    }

    #[test]
    fn tensor_identities() {
        for ring in [Ring::Integers, Ring::Rationals, Ring::prime_field(5).unwrap()] {
            for n in 1..=2 {
                for m in 1..=2 {
                    let iso = tensor_hyperbolic_isometry(&ring, Flavor::Alternating, n, Flavor::Alternating, m).unwrap();
                    assert_eq!(*iso.target(), hyperbolic(&ring, Flavor::Symmetric, 2 * n * m));
                    for (fa, fb) in [
                        (Flavor::Symmetric, Flavor::Alternating),
                        (Flavor::Alternating, Flavor::Symmetric),
                        (Flavor::Symmetric, Flavor::Symmetric),
                    ] {
                        tensor_hyperbolic_isometry(&ring, fa, n, fb, m).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn isometries_compose_and_invert() {
        let q = Ring::Rationals;
        let s = BilinearSpace::new(
            Flavor::Alternating,
            Matrix::from_ints(&q, &[&[0, 3, 1, 0], &[-3, 0, 0, 1], &[-1, 0, 0, 5], &[0, -1, -5, 0]]),
        )
        .unwrap();
        let a = standardize_symplectic(&s).unwrap();
        let back = a.inverse().unwrap();
        assert!(a.compose(&back).unwrap().witness().is_identity());
    }
}
