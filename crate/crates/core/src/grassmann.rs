//! Affine charts of Grassmannians with their tautological subspaces, the
//! 𝔾ₐ-action on the open piece of HP¹, and the structure-map subspaces
//! built from evaluated samples.
//!
//! Pivot rows are 1-based. Chart coordinates are named `x{row}_{col}`, also
//! 1-based, so the free entry in row 2, column 1 is `x2_1`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forms::{
    check_isometry, hyperbolic, standardize_symplectic, tensor_hyperbolic_isometry, BilinearSpace, Flavor, Isometry,
};
use crate::matrix::Matrix;
use crate::ring::{Elem, Ring};
use crate::sp::{factor_into_transvections, homotopy_witness, HomotopyPath, SymplecticMatrix, Transvection};

/// Largest n accepted by the structure-subspace constructions.
pub const MAX_STRUCTURE_SCALE: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    r: usize,
    n: usize,
    pivots: Vec<usize>,
    base: Ring,
    ring: Ring,
}

impl Chart {
    pub fn new(r: usize, n: usize, pivots: &[usize], base: &Ring) -> Result<Chart> {
        let mut sorted = pivots.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if r > n || sorted.len() != r || pivots.len() != r || sorted.iter().any(|&p| p == 0 || p > n) {
            return Err(Error::BadPivot);
        }
        let mut names = Vec::with_capacity(r * (n - r));
        for row in 1..=n {
            if !sorted.contains(&row) {
                names.extend((1..=r).map(|col| format!("x{row}_{col}")));
            }
        }
        let ring = Ring::polynomial(base, &names)?;
        Ok(Chart {
            r,
            n,
            pivots: sorted,
            base: base.clone(),
            ring,
        })
    }

    /// The chart whose pivots are the first r rows.
    pub fn leading(r: usize, n: usize, base: &Ring) -> Result<Chart> {
        let pivots: Vec<usize> = (1..=r).collect();
        Chart::new(r, n, &pivots, base)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn base(&self) -> &Ring {
        &self.base
    }

    /// Coordinate ring, the base with one variable per free entry.
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn variables(&self) -> Vec<String> {
        self.ring.variables().to_vec()
    }

    /// The n×r basis matrix: identity rows at the pivots, coordinates elsewhere.
    pub fn basis(&self) -> Matrix {
        let ring = &self.ring;
        Matrix::from_fn(ring, self.n, self.r, |i, j| {
            let row = i + 1;
            match self.pivots.iter().position(|&p| p == row) {
                Some(k) if k == j => ring.one(),
                Some(_) => ring.zero(),
                None => ring.var(&format!("x{row}_{}", j + 1)).expect("chart variable"),
            }
        })
    }

    pub fn origin(&self) -> PointSample {
        let values = vec![self.base.zero(); self.r * (self.n - self.r)];
        PointSample {
            chart: self.clone(),
            values,
        }
    }
}

/// Values for every chart coordinate, in the chart's variable order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSample {
    chart: Chart,
    values: Vec<Elem>,
}

impl PointSample {
    pub fn new(chart: &Chart, values: Vec<Elem>) -> Result<PointSample> {
        let expected = chart.r * (chart.n - chart.r);
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "chart has {expected} coordinates, sample has {}",
                values.len()
            )));
        }
        Ok(PointSample {
            chart: chart.clone(),
            values,
        })
    }

    pub fn from_ints(chart: &Chart, values: &[i64]) -> Result<PointSample> {
        PointSample::new(chart, values.iter().map(|v| chart.base.int(*v)).collect())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }
}

/// The tautological subspace over a chart, inside a fixed ambient form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TautologicalFamily {
    chart: Chart,
    basis: Matrix,
    ambient: BilinearSpace,
}

pub fn tautological_on_chart(r: usize, n: usize, pivots: &[usize], ambient: &BilinearSpace) -> Result<TautologicalFamily> {
    if ambient.rank() != n {
        return Err(Error::DimensionMismatch(format!("ambient rank {} for n = {n}", ambient.rank())));
    }
    let chart = Chart::new(r, n, pivots, ambient.ring())?;
    Ok(TautologicalFamily {
        basis: chart.basis(),
        chart,
        ambient: ambient.clone(),
    })
}

impl TautologicalFamily {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn ambient(&self) -> &BilinearSpace {
        &self.ambient
    }

    /// basisᵀ·G·basis over the coordinate ring. Construction re-checks the
    /// flavor, so this is the symbolic flavor identity.
    pub fn restricted(&self) -> Result<BilinearSpace> {
        self.ambient.embed(self.chart.ring())?.restrict(&self.basis)
    }

    pub fn at(&self, p: &PointSample) -> Result<Subspace> {
        if p.chart != self.chart {
            return Err(Error::DimensionMismatch("sample belongs to another chart".into()));
        }
        let basis = self.basis.substitute(&p.values, self.chart.base())?;
        Subspace::new(&self.ambient, basis)
    }
}

/// A subspace given by a basis, with the ambient form over the base ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: BilinearSpace,
    basis: Matrix,
}

/// U and U^⊥ with their restricted forms and the change of basis from the
/// ambient to U ⊥ U^⊥.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub subspace_basis: Matrix,
    pub complement_basis: Matrix,
    pub subspace: BilinearSpace,
    pub complement: BilinearSpace,
    /// Source U ⊥ U^⊥, target the ambient form.
    pub isometry: Isometry,
}

impl Subspace {
    pub fn new(ambient: &BilinearSpace, basis: Matrix) -> Result<Subspace> {
        if basis.rows() != ambient.rank() || basis.ring() != ambient.ring() {
            return Err(Error::DimensionMismatch("basis does not live in the ambient space".into()));
        }
        Ok(Subspace {
            ambient: ambient.clone(),
            basis,
        })
    }

    /// The span of the first `planes` hyperbolic planes of `ambient`.
    pub fn leading_planes(ambient: &BilinearSpace, planes: usize) -> Result<Subspace> {
        let cols: Vec<usize> = (0..2 * planes).collect();
        Subspace::new(ambient, Matrix::identity(ambient.ring(), ambient.rank()).select_columns(&cols))
    }

    pub fn ambient(&self) -> &BilinearSpace {
        &self.ambient
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn restricted(&self) -> Result<BilinearSpace> {
        self.ambient.restrict(&self.basis)
    }

    pub fn in_membership_locus(&self) -> Result<bool> {
        Ok(self.restricted()?.is_unimodular())
    }

    /// U^⊥ as the image of I − B(BᵀGB)⁻¹BᵀG.
    pub fn decompose(&self) -> Result<Decomposition> {
        let ring = self.ambient.ring();
        if !ring.is_field() {
            return Err(Error::NotAField);
        }
        let g = self.ambient.gram();
        let b = &self.basis;
        let sub = self.restricted()?;
        let m_inv = sub.gram().inverse_if_unit().map_err(|_| Error::NotInMembershipLocus)?;
        let bt_g = b.transpose().mul(g)?;
        let proj = b.mul(&m_inv)?.mul(&bt_g)?;
        let q = Matrix::identity(ring, g.rows()).sub(&proj)?;
        let want = g.rows() - b.cols();
        let mut chosen: Vec<usize> = Vec::with_capacity(want);
        for j in 0..q.cols() {
            if chosen.len() == want {
                break;
            }
            let mut trial = chosen.clone();
            trial.push(j);
            if q.select_columns(&trial).rank()? == trial.len() {
                chosen = trial;
            }
        }
        let c = q.select_columns(&chosen);
        if chosen.len() != want || !bt_g.mul(&c)?.is_zero() {
            return Err(Error::NotInMembershipLocus);
        }
        let complement = self.ambient.restrict(&c)?;
        let sum = crate::forms::orthogonal_sum(&sub, &complement)?;
        let isometry = check_isometry(&self.ambient, &sum, &b.hstack(&c)?)?.inverse()?;
        Ok(Decomposition {
            subspace_basis: b.clone(),
            complement_basis: c,
            subspace: sub,
            complement,
            isometry,
        })
    }
}

pub fn form_membership(f: &TautologicalFamily, p: &PointSample) -> Result<bool> {
    f.at(p)?.in_membership_locus()
}

pub fn orthogonal_complement(f: &TautologicalFamily, p: &PointSample) -> Result<Decomposition> {
    f.at(p)?.decompose()
}

/// Outcome of the 𝔾ₐ-action identities and the sampled freeness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaReport {
    pub unit_law: bool,
    pub action_law: bool,
    pub pairing_invariant: bool,
    pub displacement_formula: bool,
    pub samples: Vec<GaSample>,
}

/// One freeness probe: point (a₁, a₂, b₁, b₂, r), parameter t.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaSample {
    pub point: [i64; 5],
    pub t: i64,
    pub moved: bool,
    pub expected_moved: bool,
}

impl GaReport {
    pub fn passed(&self) -> bool {
        self.unit_law
            && self.action_law
            && self.pairing_invariant
            && self.displacement_formula
            && self.samples.iter().all(|s| s.moved == s.expected_moved)
    }
}

const GA_VARS: [&str; 7] = ["a1", "a2", "b1", "b2", "r", "s", "t"];

fn phi(ring: &Ring, x: &[Elem]) -> Elem {
    ring.sub(&ring.mul(&x[0], &x[3]), &ring.mul(&x[1], &x[2]))
}

/// c·(a, b, r) = (a, b + c·a, r + c·(1 − φ(a, b))).
fn ga_act(ring: &Ring, c: &Elem, x: &[Elem]) -> Vec<Elem> {
    let shift = ring.mul(c, &ring.sub(&ring.one(), &phi(ring, x)));
    vec![
        x[0].clone(),
        x[1].clone(),
        ring.add(&x[2], &ring.mul(c, &x[0])),
        ring.add(&x[3], &ring.mul(c, &x[1])),
        ring.add(&x[4], &shift),
    ]
}

/// Checks the action identities over ℚ[a₁, a₂, b₁, b₂, r, s, t] and probes
/// freeness at `samples` integer points.
pub fn ga_action_verify(samples: usize) -> Result<GaReport> {
    let ring = Ring::polynomial(&Ring::Rationals, &GA_VARS)?;
    let v: Vec<Elem> = GA_VARS.iter().map(|n| ring.var(n)).collect::<Result<_>>()?;
    let x = &v[..5];
    let (s, t) = (&v[5], &v[6]);
    let unit_law = ga_act(&ring, &ring.zero(), x) == x;
    let action_law = ga_act(&ring, s, &ga_act(&ring, t, x)) == ga_act(&ring, &ring.add(s, t), x);
    let moved_b = ga_act(&ring, t, x);
    let pairing_invariant = phi(&ring, &moved_b) == phi(&ring, x);
    let delta: Vec<Elem> = moved_b.iter().zip(x).map(|(p, q)| ring.sub(p, q)).collect();
    let expected_delta = vec![
        ring.zero(),
        ring.zero(),
        ring.mul(t, &x[0]),
        ring.mul(t, &x[1]),
        ring.mul(t, &ring.sub(&ring.one(), &phi(&ring, x))),
    ];
    let displacement_formula = delta == expected_delta;

    let q = Ring::Rationals;
    let mut probes = Vec::with_capacity(samples);
    for k in 0..samples {
        let (point, tv) = if k == 0 {
            ([1, 0, 0, 0, 0], 1)
        } else {
            let k = k as i64;
            ([k % 3 - 1, (k / 3) % 3 - 1, k % 4 - 2, (k + 1) % 5 - 2, k], k % 5 + 1)
        };
        let pt: Vec<Elem> = point.iter().map(|c| q.int(*c)).collect();
        let moved = ga_act(&q, &q.int(tv), &pt) != pt;
        let a_zero = point[0] == 0 && point[1] == 0;
        let phi_one = q.is_one(&phi(&q, &pt));
        probes.push(GaSample {
            point,
            t: tv,
            moved,
            expected_moved: tv != 0 && !(a_zero && phi_one),
        });
    }
    Ok(GaReport {
        unit_law,
        action_law,
        pairing_invariant,
        displacement_formula,
        samples: probes,
    })
}

/// Second tensor factor of a summand slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SecondFactor {
    /// The tautological plane U₂ over HP¹.
    Tautological,
    /// Its complement U₂^⊥.
    Complement,
    /// The first constant copy of H₋.
    FirstPlane,
    /// The second constant copy of H₋.
    SecondPlane,
}

impl SecondFactor {
    pub fn name(self) -> &'static str {
        match self {
            SecondFactor::Tautological => "taut",
            SecondFactor::Complement => "taut_perp",
            SecondFactor::FirstPlane => "plane_1",
            SecondFactor::SecondPlane => "plane_2",
        }
    }
}

/// A rank-4 summand (plane p of the first factor) ⊗ (second factor).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub plane: usize,
    pub factor: SecondFactor,
}

/// The ambient orthogonal sum, its structure subspace, and a verified
/// change of basis to standard hyperbolic coordinates in which every slot
/// occupies four consecutive coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureSubspace {
    pub n: usize,
    pub i: i64,
    pub first_flavor: Flavor,
    pub ambient: BilinearSpace,
    pub basis: Matrix,
    pub subspace: BilinearSpace,
    pub standard: Isometry,
    pub slots: Vec<Slot>,
    slot_frame: Matrix,
}

/// Slot permutation sending the leading half of the slots onto the support
/// of the subspace, its transvection factorization, and the lifted paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationCertificate {
    /// Position `j` of the leading half goes to slot position `permutation[j]`.
    pub permutation: Vec<usize>,
    pub factors: Vec<Transvection>,
    pub homotopy: HomotopyPath,
    /// I + t·(N ⊗ I₂) in standard coordinates, one per factor.
    pub lifted_paths: Vec<Matrix>,
}

fn check_scale(n: usize) -> Result<()> {
    if n == 0 || n > MAX_STRUCTURE_SCALE {
        return Err(Error::UnsupportedScale {
            n,
            max: MAX_STRUCTURE_SCALE,
        });
    }
    Ok(())
}

fn require_standard(s: &Subspace, flavor: Flavor, planes: usize, dim: usize) -> Result<()> {
    if *s.ambient() != hyperbolic(s.ambient().ring(), flavor, planes) {
        return Err(Error::UnsupportedInput(format!(
            "ambient must be the standard {} space of rank {}",
            flavor.name(),
            2 * planes
        )));
    }
    if s.dim() != dim {
        return Err(Error::DimensionMismatch(format!("expected a subspace of dimension {dim}")));
    }
    if !s.in_membership_locus()? {
        return Err(Error::NotInMembershipLocus);
    }
    Ok(())
}

/// (U⊠U₂) ⊥ (H₋^{n−i}⊠U₂^⊥) ⊥ (U^⊥⊠H₋) ⊥ (H₋^{n+i}⊠H₋) inside
/// (H₋^{2n}⊠(U₂⊥U₂^⊥)) ⊥ (H₋^{2n}⊠H₋) ⊥ (H₋^{2n}⊠H₋), a symmetric
/// subspace of rank 16n in rank 32n. `u` lies in H₋^{2n}, `hp1` in H₋².
pub fn structure_subspace_hgr(n: usize, i: i64, u: &Subspace, hp1: &Subspace) -> Result<StructureSubspace> {
    check_scale(n)?;
    if i.unsigned_abs() as usize > n {
        return Err(Error::UnsupportedInput(format!("index {i} outside [-{n}, {n}]")));
    }
    require_standard(u, Flavor::Alternating, 2 * n, 2 * n)?;
    require_standard(hp1, Flavor::Alternating, 2, 2)?;
    let a = (n as i64 - i) as usize;
    build_structure(n, i, Flavor::Alternating, 2 * n, a, u, hp1)
}

/// The symmetric-by-symplectic analogue: V ⊂ H₊ⁿ of rank n with summands
/// (V⊠U₂) ⊥ (H₊^{(n−i)/2}⊠U₂^⊥) ⊥ (V^⊥⊠H₋) ⊥ (H₊^{(n+i)/2}⊠H₋), an
/// alternating subspace of rank 8n in rank 16n.
pub fn structure_subspace_rgr(n: usize, i: i64, v: &Subspace, hp1: &Subspace) -> Result<StructureSubspace> {
    check_scale(n)?;
    if n % 2 == 1 {
        return Err(Error::UnsupportedInput(format!("n = {n} must be even")));
    }
    if i.unsigned_abs() as usize > n || (n as i64 - i) % 2 != 0 {
        return Err(Error::UnsupportedInput(format!("index {i} must lie in [-{n}, {n}] with the parity of n")));
    }
    require_standard(v, Flavor::Symmetric, n, n)?;
    require_standard(hp1, Flavor::Alternating, 2, 2)?;
    let a = ((n as i64 - i) / 2) as usize;
    build_structure(n, i, Flavor::Symmetric, n, a, v, hp1)
}

/// Slot order: the slots filled at the distinguished point with i = 0
/// come first, so that point restricts to the leading half.
fn slot_order(planes: usize) -> Vec<Slot> {
    let half = planes / 2;
    let mut out = Vec::with_capacity(4 * planes);
    let trio = [SecondFactor::Tautological, SecondFactor::Complement, SecondFactor::SecondPlane];
    let push_trio = |out: &mut Vec<Slot>, p: usize| out.extend(trio.iter().map(|&factor| Slot { plane: p, factor }));
    for p in 0..half {
        push_trio(&mut out, p);
    }
    out.extend((half..planes).map(|p| Slot {
        plane: p,
        factor: SecondFactor::FirstPlane,
    }));
    for p in half..planes {
        push_trio(&mut out, p);
    }
    out.extend((0..half).map(|p| Slot {
        plane: p,
        factor: SecondFactor::FirstPlane,
    }));
    out
}

fn build_structure(
    n: usize,
    i: i64,
    first: Flavor,
    planes: usize,
    a: usize,
    u: &Subspace,
    x: &Subspace,
) -> Result<StructureSubspace> {
    let ring = u.ambient().ring().clone();
    if x.ambient().ring() != &ring {
        return Err(Error::RingMismatch);
    }
    if !ring.is_field() {
        return Err(Error::NotAField);
    }
    let du = u.decompose()?;
    let dx = x.decompose()?;
    let d = 2 * planes;
    let b = planes - a;
    let g1 = hyperbolic(&ring, first, planes);
    let j2 = hyperbolic(&ring, Flavor::Alternating, 1);
    let j4 = hyperbolic(&ring, Flavor::Alternating, 2);
    let flavor = first.tensor(Flavor::Alternating);
    let gram = Matrix::block_diag(
        &ring,
        &[
            &g1.gram().kron(j4.gram())?,
            &g1.gram().kron(j2.gram())?,
            &g1.gram().kron(j2.gram())?,
        ],
    )?;
    let ambient = BilinearSpace::new(flavor, gram)?;
    let total = 8 * d;
    let offset = |f: SecondFactor| match f {
        SecondFactor::Tautological | SecondFactor::Complement => 0,
        SecondFactor::FirstPlane => 4 * d,
        SecondFactor::SecondPlane => 6 * d,
    };
    let place = |block: SecondFactor, m: &Matrix| {
        let off = offset(block);
        Matrix::from_fn(&ring, total, m.cols(), |r, c| {
            if r >= off && r < off + m.rows() {
                m.get(r - off, c).clone()
            } else {
                ring.zero()
            }
        })
    };
    let id_d = Matrix::identity(&ring, d);
    let id2 = Matrix::identity(&ring, 2);
    let leading = |k: usize| id_d.select_columns(&(0..2 * k).collect::<Vec<_>>());
    let pieces = [
        place(SecondFactor::Tautological, &du.subspace_basis.kron(&dx.subspace_basis)?),
        place(SecondFactor::Complement, &leading(a).kron(&dx.complement_basis)?),
        place(SecondFactor::FirstPlane, &du.complement_basis.kron(&id2)?),
        place(SecondFactor::SecondPlane, &leading(b).kron(&id2)?),
    ];
    let mut basis = pieces[0].clone();
    for p in &pieces[1..] {
        if p.cols() > 0 {
            basis = basis.hstack(p)?;
        }
    }
    let subspace = ambient.restrict(&basis)?;

    // Symplectic frames of U₂ and U₂^⊥ make every slot a copy of H₋ ⊗ plane.
    let fx = dx.subspace_basis.mul(standardize_symplectic(&dx.subspace)?.witness())?;
    let fxp = dx.complement_basis.mul(standardize_symplectic(&dx.complement)?.witness())?;
    let slots = slot_order(planes);
    let mut cols: Vec<Vec<Elem>> = Vec::with_capacity(total);
    for slot in &slots {
        let frame = match slot.factor {
            SecondFactor::Tautological => &fx,
            SecondFactor::Complement => &fxp,
            _ => &id2,
        };
        for fb in 0..2 {
            for pa in 0..2 {
                let plane_col = id_d.select_columns(&[2 * slot.plane + pa]);
                let v = plane_col.kron(&frame.select_columns(&[fb]))?;
                cols.push(place(slot.factor, &v).column(0));
            }
        }
    }
    let pre = Matrix::from_rows(&ring, cols)?.transpose();
    let k = tensor_hyperbolic_isometry(&ring, Flavor::Alternating, 1, first, 1)?;
    let slot_frame = Matrix::identity(&ring, slots.len()).kron(k.witness())?;
    let standard = check_isometry(&ambient, &hyperbolic(&ring, flavor, 2 * slots.len()), &pre.mul(&slot_frame)?)?;
    Ok(StructureSubspace {
        n,
        i,
        first_flavor: first,
        ambient,
        basis,
        subspace,
        standard,
        slots,
        slot_frame,
    })
}

impl StructureSubspace {
    pub fn rank(&self) -> usize {
        self.subspace.rank()
    }

    pub fn flavor(&self) -> Flavor {
        self.subspace.flavor()
    }

    pub fn is_unimodular(&self) -> bool {
        self.subspace.is_unimodular()
    }

    /// The subspace basis in standard hyperbolic coordinates.
    pub fn standard_coordinates(&self) -> Result<Matrix> {
        self.standard.witness().inverse_if_unit()?.mul(&self.basis)
    }

    /// Slot positions whose coordinates span exactly the subspace, when it
    /// is a coordinate subspace of the standard frame.
    pub fn slot_support(&self) -> Result<Option<Vec<usize>>> {
        let y = self.standard_coordinates()?;
        let ring = y.ring();
        let support: Vec<usize> = (0..self.slots.len())
            .filter(|&s| (4 * s..4 * s + 4).any(|r| (0..y.cols()).any(|c| !ring.is_zero(y.get(r, c)))))
            .collect();
        Ok((4 * support.len() == y.cols()).then_some(support))
    }

    /// Whether the subspace is the leading half H^{·} ⊥ 0 of the standard frame.
    pub fn is_leading_half(&self) -> Result<bool> {
        let half = self.slots.len() / 2;
        Ok(self.slot_support()? == Some((0..half).collect()))
    }

    /// Permutation of slots moving the leading half onto the subspace,
    /// factored into transvections whose square-zero parts are lifted by
    /// ⊗ I₂ and checked to preserve the standard form identically in t.
    pub fn permutation_certificate(&self) -> Result<PermutationCertificate> {
        let count = self.slots.len();
        let support = self.slot_support()?.ok_or(Error::NoMatchFound)?;
        if support.len() != count / 2 {
            return Err(Error::NoMatchFound);
        }
        let mut permutation = support.clone();
        permutation.extend((0..count).filter(|s| !support.contains(s)));
        let ring = self.ambient.ring();
        let plane_perm: Vec<usize> = (0..2 * count).map(|c| 2 * permutation[c / 2] + c % 2).collect();
        let sigma = SymplecticMatrix::new(Matrix::permutation(ring, &plane_perm))?;
        let factors = factor_into_transvections(&sigma)?;
        let homotopy = homotopy_witness(ring, 2 * count, &factors)?;
        let ext = homotopy.ring.clone();
        let frame = self.slot_frame.embed(&ext)?;
        let frame_inv = self.slot_frame.inverse_if_unit()?.embed(&ext)?;
        let id2 = Matrix::identity(&ext, 2);
        let h = self.standard.target().gram().embed(&ext)?;
        let mut lifted_paths = Vec::with_capacity(factors.len());
        let mut acc = Matrix::identity(ring, 4 * count);
        for (f, path) in factors.iter().zip(&homotopy.paths) {
            let lifted = frame_inv.mul(&path.kron(&id2)?)?.mul(&frame)?;
            if lifted.congruence(&h)? != h {
                return Err(Error::NotSymplectic);
            }
            let at0 = lifted.specialize(&homotopy.parameter, &ring.zero(), ring)?;
            let at1 = lifted.specialize(&homotopy.parameter, &ring.one(), ring)?;
            let expected = self
                .slot_frame
                .inverse_if_unit()?
                .mul(&f.matrix(ring).kron(&Matrix::identity(ring, 2))?)?
                .mul(&self.slot_frame)?;
            if !at0.is_identity() || at1 != expected {
                return Err(Error::NoMatchFound);
            }
            acc = acc.mul(&at1)?;
            lifted_paths.push(lifted);
        }
        let coord_perm: Vec<usize> = (0..4 * count).map(|c| 4 * permutation[c / 4] + c % 4).collect();
        let pi = Matrix::permutation(ring, &coord_perm);
        if acc != pi {
            return Err(Error::NoMatchFound);
        }
        let moved = pi.transpose().mul(&self.standard_coordinates()?)?;
        let lower = (2 * count..4 * count).any(|r| (0..moved.cols()).any(|c| !ring.is_zero(moved.get(r, c))));
        if lower {
            return Err(Error::NoMatchFound);
        }
        Ok(PermutationCertificate {
            permutation,
            factors,
            homotopy,
            lifted_paths,
        })
    }
}

/// The HP¹ distinguished point H₋ ⊥ 0 and the HGr distinguished point
/// H₋ⁿ ⊥ 0, as subspaces of their standard ambients.
pub fn distinguished_hp1(ring: &Ring) -> Result<Subspace> {
    Subspace::leading_planes(&hyperbolic(ring, Flavor::Alternating, 2), 1)
}

pub fn distinguished_hgr(ring: &Ring, n: usize) -> Result<Subspace> {
    Subspace::leading_planes(&hyperbolic(ring, Flavor::Alternating, 2 * n), n)
}

pub fn distinguished_rgr(ring: &Ring, n: usize) -> Result<Subspace> {
    Subspace::leading_planes(&hyperbolic(ring, Flavor::Symmetric, n), n / 2)
}

/// Comparison of the structure subspace for U with the one for U ⊥ H₋ one
/// level up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizationCheck {
    /// The included subspace lies in the stabilized one.
    pub contained: bool,
    /// The ambient inclusion restricts to an isometry of the subspaces.
    pub isometric: bool,
    /// At coordinate points: slot positions one level up, images of the old
    /// support first, followed by the new slots.
    pub permutation: Option<Vec<usize>>,
    pub new_slots: Vec<Slot>,
}

impl StabilizationCheck {
    pub fn passed(&self) -> bool {
        self.contained && self.isometric
    }
}

/// Runs the symplectic construction for U at level n and for U ⊥ H₋ at
/// level n + 1, then compares through the blockwise ambient inclusion.
pub fn stabilization_check(n: usize, i: i64, u: &Subspace, hp1: &Subspace) -> Result<StabilizationCheck> {
    check_scale(n + 1)?;
    let ring = u.ambient().ring().clone();
    let low = structure_subspace_hgr(n, i, u, hp1)?;
    let d = 4 * n;
    let up_basis = Matrix::block_diag(
        &ring,
        &[u.basis(), &Matrix::identity(&ring, 4).select_columns(&[0, 1])],
    )?;
    let up_u = Subspace::new(&hyperbolic(&ring, Flavor::Alternating, 2 * n + 2), up_basis)?;
    let high = structure_subspace_hgr(n + 1, i, &up_u, hp1)?;
    // Blocks k^d ⊗ k^w with w = 4, 2, 2 map into k^{d+4} ⊗ k^w.
    let widths = [4, 2, 2];
    let mut row_map = Vec::with_capacity(8 * d);
    let mut new_off = 0;
    for w in widths {
        for r in 0..d * w {
            row_map.push(new_off + r);
        }
        new_off += (d + 4) * w;
    }
    let incl = Matrix::from_fn(&ring, 8 * (d + 4), 8 * d, |r, c| {
        if row_map[c] == r {
            ring.one()
        } else {
            ring.zero()
        }
    });
    let image = incl.mul(&low.basis)?;
    let rank_high = high.basis.rank()?;
    let contained = high.basis.hstack(&image)?.rank()? == rank_high;
    let isometric = image.congruence(high.ambient.gram())? == *low.subspace.gram();
    let mut permutation = None;
    let mut new_slots = Vec::new();
    if let (Some(sl), Some(sh)) = (low.slot_support()?, high.slot_support()?) {
        let pos = |slot: &Slot| high.slots.iter().position(|s| s == slot);
        let mut perm: Vec<usize> = sl.iter().filter_map(|&p| pos(&low.slots[p])).collect();
        if perm.len() == sl.len() && perm.iter().all(|p| sh.contains(p)) {
            let extra: Vec<usize> = sh.iter().copied().filter(|p| !perm.contains(p)).collect();
            new_slots = extra.iter().map(|&p| high.slots[p]).collect();
            perm.extend(extra);
            permutation = Some(perm);
        }
    }
    Ok(StabilizationCheck {
        contained,
        isometric,
        permutation,
        new_slots,
    })
}
