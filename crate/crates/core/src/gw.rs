//! Isometry classes, their group completion, Witt decomposition over F_p
//! and ℚ, and the KSp₀ classes [A] − (rank/2 − i)[H₋].

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::forms::{
    check_isometry, hyperbolic, orthogonal_sum, orthogonal_sum_all, standardize_symplectic, BilinearSpace, Flavor,
    Isometry,
};
use crate::matrix::Matrix;
use crate::ring::{Elem, Ring};

/// Default coefficient height for isotropic-vector search over ℚ.
pub const DEFAULT_HEIGHT_BOUND: u64 = 50;

fn require_odd_field(ring: &Ring) -> Result<()> {
    if ring.characteristic() == 2 {
        return Err(Error::CharacteristicTwo);
    }
    if !ring.is_field() {
        return Err(Error::NotAField);
    }
    Ok(())
}

/// Orthogonal basis by Gram–Schmidt: pivot on the first nonzero diagonal
/// entry, else on e_i + e_j for the first nonzero off-diagonal entry.
pub fn diagonalize_symmetric(s: &BilinearSpace) -> Result<Isometry> {
    let ring = s.ring();
    require_odd_field(ring)?;
    if s.flavor() != Flavor::Symmetric {
        return Err(Error::NotSymmetric);
    }
    let n = s.rank();
    let mut work: Vec<Vec<Elem>> = Matrix::identity(ring, n).to_rows();
    let mut out: Vec<Vec<Elem>> = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    while !work.is_empty() {
        let k = work.len();
        let pivot = (0..k).find(|&i| !ring.is_zero(&s.pair(&work[i], &work[i])));
        let (drop, v) = match pivot {
            Some(i) => (i, work[i].clone()),
            None => {
                let pair = (0..k)
                    .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                    .find(|&(i, j)| !ring.is_zero(&s.pair(&work[i], &work[j])));
                match pair {
                    Some((i, j)) => (i, work[i].iter().zip(&work[j]).map(|(a, b)| ring.add(a, b)).collect()),
                    None => {
                        // Totally isotropic remainder; only reachable for degenerate input.
                        for w in work.drain(..) {
                            out.push(w);
                            diag.push(ring.zero());
                        }
                        break;
                    }
                }
            }
        };
        let qv = s.pair(&v, &v);
        let qinv = ring.inv(&qv)?;
        let rest: Vec<Vec<Elem>> = work
            .iter()
            .enumerate()
            .filter(|(idx, _)| *idx != drop)
            .map(|(_, w)| {
                let c = ring.mul(&s.pair(w, &v), &qinv);
                w.iter().zip(&v).map(|(a, b)| ring.sub(a, &ring.mul(&c, b))).collect()
            })
            .collect();
        out.push(v);
        diag.push(qv);
        work = rest;
    }
    let w = Matrix::from_rows(ring, out)?.transpose();
    let w = if n == 0 { Matrix::zeros(ring, 0, 0) } else { w };
    check_isometry(s, &BilinearSpace::diagonal(ring, &diag), &w)
}

fn mod_pow(b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u128;
    let mut base = b as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    acc as u64
}

/// Square root modulo an odd prime (Tonelli–Shanks).
fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulm = |x: u64, y: u64| (x as u128 * y as u128 % p as u128) as u64;
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulm(tt, tt);
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &n * &n == *q.numer() && &d * &d == *q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Square root in ℚ or F_p, when one exists.
pub fn field_sqrt(ring: &Ring, x: &Elem) -> Option<Elem> {
    match (ring, x) {
        (Ring::Rationals, Elem::Rat(v)) => rational_sqrt(v).map(Elem::Rat),
        (Ring::PrimeField(p) | Ring::Modular(p), Elem::Res(v)) => sqrt_mod(*v, *p).map(Elem::Res),
        _ => None,
    }
}

/// Whether a/b is a nonzero square.
pub fn same_square_class(ring: &Ring, a: &Elem, b: &Elem) -> bool {
    if ring.is_zero(a) || ring.is_zero(b) {
        return ring.is_zero(a) && ring.is_zero(b);
    }
    field_sqrt(ring, &ring.mul(a, b)).is_some()
}

fn diagonal_entries(space: &BilinearSpace) -> Vec<Elem> {
    (0..space.rank()).map(|i| space.gram().get(i, i).clone()).collect()
}

fn product_of(ring: &Ring, xs: &[Elem]) -> Elem {
    xs.iter().fold(ring.one(), |acc, x| ring.mul(&acc, x))
}

/// Determinant of the Gram matrix, as a square class witness.
pub fn discriminant(s: &BilinearSpace) -> Result<Elem> {
    s.gram().determinant()
}

/// Hyperbolic pairs and anisotropic residue with a verified change of basis
/// to H₊^h ⊥ anisotropic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittDecomposition {
    pub hyperbolic_count: usize,
    pub anisotropic: BilinearSpace,
    pub witness: Isometry,
}

pub fn witt_decompose(s: &BilinearSpace) -> Result<WittDecomposition> {
    witt_decompose_with(s, DEFAULT_HEIGHT_BOUND)
}

/// Greedy Witt decomposition; over ℚ isotropic vectors are searched with
/// integer coordinates of absolute value at most `height_bound`.
pub fn witt_decompose_with(s: &BilinearSpace, height_bound: u64) -> Result<WittDecomposition> {
    let ring = s.ring().clone();
    require_odd_field(&ring)?;
    if !matches!(ring, Ring::Rationals | Ring::PrimeField(_) | Ring::Modular(_)) {
        return Err(Error::NotAField);
    }
    if s.flavor() != Flavor::Symmetric {
        return Err(Error::NotSymmetric);
    }
    s.require_unimodular()?;
    let n = s.rank();
    let mut basis = Matrix::identity(&ring, n);
    let mut pairs: Vec<Vec<Elem>> = Vec::new();
    let mut count = 0;
    loop {
        let residual = s.restrict(&basis)?;
        let diag_iso = diagonalize_symmetric(&residual)?;
        basis = basis.mul(diag_iso.witness())?;
        let d = diagonal_entries(diag_iso.target());
        let Some(v) = isotropic_vector(&ring, &d, height_bound)? else {
            break;
        };
        let k = d.len();
        let form = diag_iso.target();
        let j = (0..k).find(|&j| !ring.is_zero(&v[j])).unwrap();
        let mut u = vec![ring.zero(); k];
        u[j] = ring.inv(&ring.mul(&d[j], &v[j]))?;
        let half_qu = ring.div_exact(&form.pair(&u, &u), &ring.int(2))?;
        let w: Vec<Elem> = u.iter().zip(&v).map(|(a, b)| ring.sub(a, &ring.mul(&half_qu, b))).collect();
        // Projections of the coordinate vectors onto ⟨v, w⟩^⊥.
        let mut complement: Vec<Vec<Elem>> = Vec::new();
        for idx in 0..k {
            if complement.len() == k - 2 {
                break;
            }
            let mut x = vec![ring.zero(); k];
            x[idx] = ring.one();
            let xw = form.pair(&x, &w);
            let xv = form.pair(&x, &v);
            let proj: Vec<Elem> = (0..k)
                .map(|t| ring.sub(&ring.sub(&x[t], &ring.mul(&xw, &v[t])), &ring.mul(&xv, &w[t])))
                .collect();
            let mut trial = complement.clone();
            trial.push(proj.clone());
            if Matrix::from_rows(&ring, trial)?.rank()? == complement.len() + 1 {
                complement.push(proj);
            }
        }
        let to_col = |x: &[Elem]| Matrix::from_fn(&ring, k, 1, |i, _| x[i].clone());
        pairs.push(basis.mul(&to_col(&v))?.column(0));
        pairs.push(basis.mul(&to_col(&w))?.column(0));
        count += 1;
        basis = if complement.is_empty() {
            Matrix::zeros(&ring, n, 0)
        } else {
            basis.mul(&Matrix::from_rows(&ring, complement)?.transpose())?
        };
    }
    let anisotropic = s.restrict(&basis)?;
    let mut cols: Vec<Vec<Elem>> = pairs;
    for j in 0..basis.cols() {
        cols.push(basis.column(j));
    }
    let witness = if n == 0 {
        Matrix::zeros(&ring, 0, 0)
    } else {
        Matrix::from_rows(&ring, cols)?.transpose()
    };
    let target = orthogonal_sum(&hyperbolic(&ring, Flavor::Symmetric, count), &anisotropic)?;
    let witness = check_isometry(s, &target, &witness)?;
    Ok(WittDecomposition {
        hyperbolic_count: count,
        anisotropic,
        witness,
    })
}

/// An isotropic vector of the diagonal form ⟨d₁, …, d_k⟩, or `None` when
/// the form is provably anisotropic.
fn isotropic_vector(ring: &Ring, d: &[Elem], height_bound: u64) -> Result<Option<Vec<Elem>>> {
    let k = d.len();
    if k < 2 {
        return Ok(None);
    }
    // Any binary subform with −d_i·d_j a square.
    for i in 0..k {
        for j in i + 1..k {
            let r = ring.div_exact(&ring.neg(&d[j]), &d[i])?;
            if let Some(x) = field_sqrt(ring, &r) {
                let mut v = vec![ring.zero(); k];
                v[i] = x;
                v[j] = ring.one();
                return Ok(Some(v));
            }
        }
    }
    if k == 2 {
        return Ok(None);
    }
    match ring {
        Ring::PrimeField(p) | Ring::Modular(p) => {
            // Ternary forms over F_p are isotropic: solve d₀x² + d₁y² = −d₂.
            let p = *p;
            let rhs = ring.neg(&d[2]);
            for x in 0..p {
                let xe = ring.int(x as i64);
                let rest = ring.sub(&rhs, &ring.mul(&d[0], &ring.mul(&xe, &xe)));
                let y2 = ring.div_exact(&rest, &d[1])?;
                if let Some(y) = field_sqrt(ring, &y2) {
                    let mut v = vec![ring.zero(); k];
                    v[0] = xe;
                    v[1] = y;
                    v[2] = ring.one();
                    return Ok(Some(v));
                }
            }
            unreachable!("ternary forms over finite fields are isotropic")
        }
        Ring::Rationals => rational_isotropic_search(ring, d, height_bound),
        _ => Err(Error::NotAField),
    }
}

fn rational_isotropic_search(ring: &Ring, d: &[Elem], bound: u64) -> Result<Option<Vec<Elem>>> {
    let rats: Vec<BigRational> = d
        .iter()
        .map(|x| match x {
            Elem::Rat(v) => v.clone(),
            _ => unreachable!(),
        })
        .collect();
    let positive = rats.iter().filter(|x| x.is_positive()).count();
    if positive == 0 || positive == rats.len() {
        return Ok(None);
    }
    // Integral model: a_i = d_i·den_i² has the same isotropic lines after
    // rescaling coordinate i by den_i.
    let ints: Vec<i128> = rats
        .iter()
        .map(|x| (x.numer() * x.denom()).to_i128())
        .collect::<Option<_>>()
        .ok_or(Error::SearchExhausted { bound })?;
    let h = bound as i128;
    let k = ints.len();
    for width in 3..=k.min(4) {
        for combo in crate::koszul::wedge_basis(k, width) {
            let a: Vec<i128> = combo.iter().map(|&i| ints[i]).collect();
            let (head, last) = a.split_at(width - 1);
            if a.iter().all(|x| *x > 0) || a.iter().all(|x| *x < 0) {
                continue;
            }
            let mut xs = vec![-h; width - 1];
            loop {
                if xs.iter().any(|x| *x != 0) {
                    let s: i128 = head.iter().zip(&xs).map(|(c, x)| c * x * x).sum();
                    if s % last[0] == 0 {
                        let z2 = -s / last[0];
                        if z2 >= 0 {
                            let z = BigInt::from(z2).sqrt();
                            if &z * &z == BigInt::from(z2) {
                                let mut v = vec![ring.zero(); k];
                                for (slot, x) in combo.iter().zip(xs.iter().map(|x| BigInt::from(*x)).chain([z])) {
                                    let den = rats[*slot].denom().clone();
                                    v[*slot] = Elem::Rat(BigRational::new(x * den, BigInt::from(1)));
                                }
                                return Ok(Some(v));
                            }
                        }
                    }
                }
                let mut idx = 0;
                loop {
                    if idx == xs.len() {
                        break;
                    }
                    xs[idx] += 1;
                    if xs[idx] <= h {
                        break;
                    }
                    xs[idx] = -h;
                    idx += 1;
                }
                if idx == xs.len() {
                    break;
                }
            }
        }
    }
    Err(Error::SearchExhausted { bound })
}

/// Result of an isometry decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Equal(Isometry),
    Distinct,
    Unknown,
}

/// Decides a ≅ b where the ring allows it: alternating forms by
/// standardization, symmetric forms over F_p by the canonical diagonal
/// ⟨1, …, 1, d⟩, over ℚ by rank, signature and discriminant with equality
/// certified only for diagonal forms matching entry by entry.
pub fn decide_isometry(a: &BilinearSpace, b: &BilinearSpace) -> Result<Decision> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    if a.flavor() != b.flavor() {
        return Err(Error::FlavorMismatch);
    }
    if a.rank() != b.rank() {
        return Ok(Decision::Distinct);
    }
    if a == b {
        return Ok(Decision::Equal(Isometry::identity(a)));
    }
    let ring = a.ring();
    match a.flavor() {
        Flavor::Alternating => match (standardize_symplectic(a), standardize_symplectic(b)) {
            (Ok(sa), Ok(sb)) => Ok(Decision::Equal(sa.compose(&sb.inverse()?)?)),
            _ => Ok(Decision::Unknown),
        },
        Flavor::Symmetric => {
            if require_odd_field(ring).is_err() || !a.is_unimodular() || !b.is_unimodular() {
                return Ok(Decision::Unknown);
            }
            let da = diagonalize_symmetric(a)?;
            let db = diagonalize_symmetric(b)?;
            let ea = diagonal_entries(da.target());
            let eb = diagonal_entries(db.target());
            if !same_square_class(ring, &product_of(ring, &ea), &product_of(ring, &eb)) {
                return Ok(Decision::Distinct);
            }
            let middle = match ring {
                Ring::Rationals => {
                    let pos = |xs: &[Elem]| {
                        xs.iter()
                            .filter(|x| matches!(x, Elem::Rat(v) if v.is_positive()))
                            .count()
                    };
                    if pos(&ea) != pos(&eb) {
                        return Ok(Decision::Distinct);
                    }
                    match match_diagonals(ring, &ea, &eb)? {
                        Some(m) => m,
                        None => return Ok(Decision::Unknown),
                    }
                }
                _ => {
                    let ca = canonical_diagonal(ring, &ea)?;
                    let cb = canonical_diagonal(ring, &eb)?;
                    let scale = match_diagonals(
                        ring,
                        &diagonal_entries(ca.target()),
                        &diagonal_entries(cb.target()),
                    )?
                    .ok_or(Error::NoMatchFound)?;
                    ca.compose(&scale)?.compose(&cb.inverse()?)?
                }
            };
            Ok(Decision::Equal(da.compose(&middle)?.compose(&db.inverse()?)?))
        }
    }
}

/// Isometry between diagonal forms whose entries pair up by square class:
/// a permutation with each basis vector scaled by √(b_j / a_i).
fn match_diagonals(ring: &Ring, a: &[Elem], b: &[Elem]) -> Result<Option<Isometry>> {
    let n = a.len();
    let mut used = vec![false; n];
    let mut w = Matrix::zeros(ring, n, n);
    for (j, bj) in b.iter().enumerate() {
        let Some(i) = (0..n).find(|&i| !used[i] && same_square_class(ring, &a[i], bj)) else {
            return Ok(None);
        };
        used[i] = true;
        let s = field_sqrt(ring, &ring.div_exact(bj, &a[i])?).ok_or(Error::NoMatchFound)?;
        w.set(i, j, s);
    }
    let sa = BilinearSpace::diagonal(ring, a);
    let sb = BilinearSpace::diagonal(ring, b);
    Ok(Some(check_isometry(&sa, &sb, &w)?))
}

/// Over F_p: ⟨d₁, …, d_k⟩ ≅ ⟨1, …, 1, d₁⋯d_k⟩ by folding pairs
/// ⟨a, b⟩ ≅ ⟨1, ab⟩ with a x² + b y² = 1.
fn canonical_diagonal(ring: &Ring, d: &[Elem]) -> Result<Isometry> {
    let n = d.len();
    let source = BilinearSpace::diagonal(ring, d);
    let mut w = Matrix::identity(ring, n);
    let mut cur = d.to_vec();
    let p = ring.characteristic();
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (cur[i].clone(), cur[i + 1].clone());
        let mut found = None;
        for x in 0..p {
            let xe = ring.int(x as i64);
            let y2 = ring.div_exact(&ring.sub(&ring.one(), &ring.mul(&a, &ring.mul(&xe, &xe))), &b)?;
            if let Some(y) = field_sqrt(ring, &y2) {
                found = Some((xe, y));
                break;
            }
        }
        let (x, y) = found.ok_or(Error::NoMatchFound)?;
        let mut step = Matrix::identity(ring, n);
        step.set(i, i, x.clone());
        step.set(i + 1, i, y.clone());
        step.set(i, i + 1, ring.neg(&ring.mul(&b, &y)));
        step.set(i + 1, i + 1, ring.mul(&a, &x));
        w = w.mul(&step)?;
        cur[i] = ring.one();
        cur[i + 1] = ring.mul(&a, &b);
    }
    check_isometry(&source, &BilinearSpace::diagonal(ring, &cur), &w)
}

/// Whether a ⊥ Hᵖ ≅ b ⊥ Hᵖ for some p ≤ max_stab, with H of the common flavor.
pub fn stable_isometry_test(a: &BilinearSpace, b: &BilinearSpace, max_stab: usize) -> Result<bool> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    if a.flavor() != b.flavor() {
        return Err(Error::FlavorMismatch);
    }
    let mut unknown = false;
    for p in 0..=max_stab {
        let h = hyperbolic(a.ring(), a.flavor(), p);
        match decide_isometry(&orthogonal_sum(a, &h)?, &orthogonal_sum(b, &h)?)? {
            Decision::Equal(_) => return Ok(true),
            Decision::Distinct => {}
            Decision::Unknown => unknown = true,
        }
    }
    if unknown {
        Err(Error::Undecidable)
    } else {
        Ok(false)
    }
}

/// A formal difference Σ[plus] − Σ[minus] of isometry classes, stored by
/// representatives. Cancellation happens only against certified isometries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GwClass {
    ring: Ring,
    flavor: Flavor,
    plus: Vec<BilinearSpace>,
    minus: Vec<BilinearSpace>,
}

fn sort_key(s: &BilinearSpace) -> (usize, Vec<Elem>) {
    (s.rank(), s.gram().to_rows().into_iter().flatten().collect())
}

fn canonical_order(a: &BilinearSpace, b: &BilinearSpace) -> Ordering {
    sort_key(a).cmp(&sort_key(b))
}

impl GwClass {
    pub fn zero(ring: &Ring, flavor: Flavor) -> GwClass {
        GwClass {
            ring: ring.clone(),
            flavor,
            plus: Vec::new(),
            minus: Vec::new(),
        }
    }

    /// The class of one space, normalized.
    pub fn of(space: &BilinearSpace) -> Result<GwClass> {
        GwClass::from_parts(space.ring(), space.flavor(), vec![space.clone()], Vec::new())
    }

    pub fn from_parts(
        ring: &Ring,
        flavor: Flavor,
        plus: Vec<BilinearSpace>,
        minus: Vec<BilinearSpace>,
    ) -> Result<GwClass> {
        for s in plus.iter().chain(&minus) {
            if s.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if s.flavor() != flavor {
                return Err(Error::FlavorMismatch);
            }
        }
        GwClass {
            ring: ring.clone(),
            flavor,
            plus,
            minus,
        }
        .normalize()
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn plus(&self) -> &[BilinearSpace] {
        &self.plus
    }

    pub fn minus(&self) -> &[BilinearSpace] {
        &self.minus
    }

    pub fn is_zero(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }

    /// Virtual rank Σ rank(plus) − Σ rank(minus).
    pub fn rank(&self) -> i64 {
        self.plus.iter().map(|s| s.rank() as i64).sum::<i64>() - self.minus.iter().map(|s| s.rank() as i64).sum::<i64>()
    }

    /// k when the class is k·[H] for the hyperbolic plane of its flavor.
    pub fn hyperbolic_multiple(&self) -> Option<i64> {
        let h = hyperbolic(&self.ring, self.flavor, 1);
        if self.plus.iter().chain(&self.minus).all(|s| *s == h) {
            Some(self.plus.len() as i64 - self.minus.len() as i64)
        } else {
            None
        }
    }

    /// Rewrites −[B] as [−B] − rank(B)·[H₋] (B ⊥ −B embeds hyperbolically),
    /// splits standardizable alternating classes into copies of H₋, cancels
    /// certified-isometric pairs, and sorts.
    pub fn normalize(self) -> Result<GwClass> {
        let GwClass {
            ring,
            flavor,
            mut plus,
            mut minus,
        } = self;
        let h = hyperbolic(&ring, flavor, 1);
        if flavor == Flavor::Alternating {
            let mut rewritten = Vec::new();
            for b in minus.drain(..) {
                if b == h || !b.is_unimodular() {
                    rewritten.push(b);
                    continue;
                }
                crate::forms::embed_into_hyperbolic(&b)?;
                plus.push(b.negate());
                rewritten.extend((0..b.rank()).map(|_| h.clone()));
            }
            minus = rewritten;
            let mut split = Vec::new();
            for a in plus.drain(..) {
                match standardize_symplectic(&a) {
                    Ok(_) => split.extend((0..a.rank() / 2).map(|_| h.clone())),
                    Err(_) => split.push(a),
                }
            }
            plus = split;
        }
        plus.retain(|s| s.rank() > 0);
        minus.retain(|s| s.rank() > 0);
        let mut kept_plus = Vec::new();
        for a in plus {
            let mut matched = None;
            for (j, b) in minus.iter().enumerate() {
                if let Decision::Equal(_) = decide_isometry(&a, b)? {
                    matched = Some(j);
                    break;
                }
            }
            match matched {
                Some(j) => {
                    minus.remove(j);
                }
                None => kept_plus.push(a),
            }
        }
        kept_plus.sort_by(canonical_order);
        minus.sort_by(canonical_order);
        Ok(GwClass {
            ring,
            flavor,
            plus: kept_plus,
            minus,
        })
    }

    fn compatible(&self, other: &GwClass) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.flavor != other.flavor {
            return Err(Error::FlavorMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &GwClass) -> Result<GwClass> {
        self.compatible(other)?;
        let mut plus = self.plus.clone();
        plus.extend(other.plus.iter().cloned());
        let mut minus = self.minus.clone();
        minus.extend(other.minus.iter().cloned());
        GwClass {
            ring: self.ring.clone(),
            flavor: self.flavor,
            plus,
            minus,
        }
        .normalize()
    }

    pub fn negate(&self) -> Result<GwClass> {
        GwClass {
            ring: self.ring.clone(),
            flavor: self.flavor,
            plus: self.minus.clone(),
            minus: self.plus.clone(),
        }
        .normalize()
    }

    pub fn sub(&self, other: &GwClass) -> Result<GwClass> {
        self.add(&other.negate()?)
    }

    /// Equality in the group, certified by cancellation to zero.
    pub fn certified_equal(&self, other: &GwClass) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    pub fn scale_hyperbolic(ring: &Ring, flavor: Flavor, k: i64) -> GwClass {
        let h = hyperbolic(ring, flavor, 1);
        let copies = (0..k.unsigned_abs()).map(|_| h.clone()).collect();
        let (plus, minus) = if k >= 0 { (copies, Vec::new()) } else { (Vec::new(), copies) };
        GwClass {
            ring: ring.clone(),
            flavor,
            plus,
            minus,
        }
    }
}

/// [A] − (rank(A)/2 − i)·[H₋].
pub fn ksp0_class(i: i64, a: &BilinearSpace) -> Result<GwClass> {
    if a.flavor() != Flavor::Alternating {
        return Err(Error::NotAlternating);
    }
    if a.rank() % 2 == 1 {
        return Err(Error::OddRank);
    }
    a.require_unimodular()?;
    let k = a.rank() as i64 / 2 - i;
    let base = GwClass {
        ring: a.ring().clone(),
        flavor: Flavor::Alternating,
        plus: vec![a.clone()],
        minus: Vec::new(),
    };
    base.add(&GwClass::scale_hyperbolic(a.ring(), Flavor::Alternating, -k))
}

/// Orthogonal sum of several copies, for building test inputs.
pub fn copies(space: &BilinearSpace, k: usize) -> Result<BilinearSpace> {
    let parts: Vec<&BilinearSpace> = (0..k).map(|_| space).collect();
    orthogonal_sum_all(space.ring(), space.flavor(), &parts)
}
