//! Bounded complexes of free modules, duality forms on them, and the Koszul
//! complexes of trivial bundles.
//!
//! Conventions:
//! * Λᵏ sits in homological degree k, wedge bases are lexicographic, and
//!   d(e_S) = Σ_pos (−1)^pos t_{S[pos]} e_{S∖S[pos]}.
//! * The shifted dual D = C^∨[n] has D_k = (C_{n−k})^* with differential
//!   −(d_{n−k+1})ᵀ in every degree.
//! * A duality form φ: C → C^∨[n] has symmetry sign ε when φ_{n−k}ᵀ = ε·φ_k.
//! * Tensor products order the summands of total degree N by ascending left
//!   degree, use Kronecker bases inside a summand, the Koszul sign
//!   d(x⊗y) = dx⊗y + (−1)^{|x|} x⊗dy, and the form sign (−1)^{|y|·n₁}.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::Ring;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    ring: Ring,
    lo: i64,
    ranks: Vec<usize>,
    /// d_k for k = lo+1 ..= hi.
    diffs: Vec<Matrix>,
}

impl ChainComplex {
    /// Checks shapes and d∘d = 0.
    pub fn new(ring: &Ring, lo: i64, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Result<ChainComplex> {
        if diffs.len() + 1 != ranks.len().max(1) {
            return Err(Error::DimensionMismatch(format!(
                "{} degrees need {} differentials",
                ranks.len(),
                ranks.len().saturating_sub(1)
            )));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if d.rows() != ranks[i] || d.cols() != ranks[i + 1] {
                return Err(Error::DimensionMismatch(format!("differential at degree {}", lo + i as i64 + 1)));
            }
        }
        for i in 1..diffs.len() {
            if !diffs[i - 1].mul(&diffs[i])?.is_zero() {
                return Err(Error::NotAComplex { degree: lo + i as i64 + 1 });
            }
        }
        Ok(ChainComplex {
            ring: ring.clone(),
            lo,
            ranks,
            diffs,
        })
    }

    /// The rank-one complex in degree 0.
    pub fn unit(ring: &Ring) -> ChainComplex {
        ChainComplex {
            ring: ring.clone(),
            lo: 0,
            ranks: vec![1],
            diffs: Vec::new(),
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.ranks.len() as i64 - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self, k: i64) -> usize {
        if k < self.lo || k > self.hi() {
            0
        } else {
            self.ranks[(k - self.lo) as usize]
        }
    }

    /// d_k: C_k → C_{k−1}, a zero matrix outside the stored range.
    pub fn d(&self, k: i64) -> Matrix {
        if k > self.lo && k <= self.hi() {
            self.diffs[(k - self.lo - 1) as usize].clone()
        } else {
            Matrix::zeros(&self.ring, self.rank(k - 1), self.rank(k))
        }
    }

    pub fn differentials(&self) -> &[Matrix] {
        &self.diffs
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi()
    }

    /// Same complex with every matrix mapped into `ring`.
    pub fn embed(&self, ring: &Ring) -> Result<ChainComplex> {
        let diffs = self.diffs.iter().map(|d| d.embed(ring)).collect::<Result<Vec<_>>>()?;
        ChainComplex::new(ring, self.lo, self.ranks.clone(), diffs)
    }
}

/// C^∨[n]: degree k holds (C_{n−k})^*, differential −(d_{n−k+1})ᵀ.
pub fn dual_shifted(c: &ChainComplex, n: i64) -> ChainComplex {
    let lo = n - c.hi();
    let ranks: Vec<usize> = (lo..=n - c.lo()).map(|k| c.rank(n - k)).collect();
    let diffs = (lo + 1..=n - c.lo()).map(|k| c.d(n - k + 1).transpose().neg()).collect();
    ChainComplex::new(c.ring(), lo, ranks, diffs).expect("dual of a complex is a complex")
}

/// The identification C → (C^∨[n])^∨[n], degreewise the identity.
pub fn double_dual_identification(c: &ChainComplex, n: i64) -> Result<ChainMap> {
    let dd = dual_shifted(&dual_shifted(c, n), n);
    let comps = c.degrees().map(|k| Matrix::identity(c.ring(), c.rank(k))).collect();
    ChainMap::new(c, &dd, comps)
}

/// A degree-zero map of complexes, verified to commute with differentials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    source: ChainComplex,
    target: ChainComplex,
    /// One component per source degree.
    components: Vec<Matrix>,
}

impl ChainMap {
    pub fn new(source: &ChainComplex, target: &ChainComplex, components: Vec<Matrix>) -> Result<ChainMap> {
        if components.len() != source.ranks.len() {
            return Err(Error::DimensionMismatch("one component per degree".into()));
        }
        for (k, f) in source.degrees().zip(&components) {
            if f.rows() != target.rank(k) || f.cols() != source.rank(k) {
                return Err(Error::DimensionMismatch(format!("component at degree {k}")));
            }
        }
        let comp = |k: i64| {
            if k < source.lo() || k > source.hi() {
                Matrix::zeros(source.ring(), target.rank(k), source.rank(k))
            } else {
                components[(k - source.lo()) as usize].clone()
            }
        };
        for k in source.lo()..=source.hi() + 1 {
            let left = target.d(k).mul(&comp(k))?;
            let right = comp(k - 1).mul(&source.d(k))?;
            if left != right {
                return Err(Error::NotAChainMap { degree: k });
            }
        }
        Ok(ChainMap {
            source: source.clone(),
            target: target.clone(),
            components,
        })
    }

    pub fn source(&self) -> &ChainComplex {
        &self.source
    }

    pub fn target(&self) -> &ChainComplex {
        &self.target
    }

    pub fn components(&self) -> &[Matrix] {
        &self.components
    }

    pub fn component(&self, k: i64) -> &Matrix {
        &self.components[(k - self.source.lo()) as usize]
    }
}

/// ε(n) = (−1)^{n(n+1)/2}.
pub fn epsilon(n: i64) -> i64 {
    if (n * (n + 1) / 2).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// A chain map φ: C → C^∨[n] with invertible components and φ_{n−k}ᵀ = ε·φ_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityForm {
    map: ChainMap,
    shift: i64,
    epsilon: i64,
}

impl DualityForm {
    pub fn new(c: &ChainComplex, shift: i64, epsilon: i64, components: Vec<Matrix>) -> Result<DualityForm> {
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::BadDualityForm("epsilon must be ±1".into()));
        }
        if shift - c.hi() != c.lo() {
            return Err(Error::BadDualityForm("degree range is not self-dual under the shift".into()));
        }
        let map = ChainMap::new(c, &dual_shifted(c, shift), components)?;
        let r = c.ring();
        let e = r.int(epsilon);
        for k in c.degrees() {
            let f = map.component(k);
            let d = f.determinant()?;
            if !r.is_unit(&d) {
                return Err(Error::BadDualityForm(format!("component at degree {k} is not invertible")));
            }
            if map.component(shift - k).transpose() != f.scale(&e) {
                return Err(Error::BadDualityForm(format!("symmetry fails at degree {k}")));
            }
        }
        Ok(DualityForm { map, shift, epsilon })
    }

    pub fn complex(&self) -> &ChainComplex {
        self.map.source()
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn epsilon(&self) -> i64 {
        self.epsilon
    }

    pub fn components(&self) -> &[Matrix] {
        self.map.components()
    }

    pub fn component(&self, k: i64) -> &Matrix {
        self.map.component(k)
    }

    /// Rank-one form ⟨1⟩ on the unit complex.
    pub fn unit(ring: &Ring) -> DualityForm {
        DualityForm::new(&ChainComplex::unit(ring), 0, 1, vec![Matrix::identity(ring, 1)]).expect("unit form")
    }
}

/// k-element subsets of {0..n} in lexicographic order.
pub fn wedge_basis(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Sign of the permutation sorting the concatenation S ++ T (0 if they meet).
fn merge_sign(s: &[usize], t: &[usize]) -> i64 {
    if s.iter().any(|x| t.contains(x)) {
        return 0;
    }
    let inversions = s.iter().map(|x| t.iter().filter(|y| *y < x).count()).sum::<usize>();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Koszul complex over `base` extended by the given variables, with
/// d(e_i) = t_i.
pub fn koszul_on<S: AsRef<str>>(base: &Ring, variables: &[S]) -> Result<ChainComplex> {
    let ring = Ring::polynomial(base, variables)?;
    let vars: Vec<_> = variables
        .iter()
        .map(|v| ring.var(v.as_ref()))
        .collect::<Result<_>>()?;
    let n = vars.len();
    let bases: Vec<Vec<Vec<usize>>> = (0..=n).map(|k| wedge_basis(n, k)).collect();
    let mut diffs = Vec::with_capacity(n);
    for k in 1..=n {
        let mut d = Matrix::zeros(&ring, bases[k - 1].len(), bases[k].len());
        for (col, s) in bases[k].iter().enumerate() {
            for pos in 0..s.len() {
                let mut rest = s.clone();
                let i = rest.remove(pos);
                let row = bases[k - 1].iter().position(|b| *b == rest).unwrap();
                let v = if pos % 2 == 0 { vars[i].clone() } else { ring.neg(&vars[i]) };
                d.set(row, col, v);
            }
        }
        diffs.push(d);
    }
    let ranks = bases.iter().map(Vec::len).collect();
    ChainComplex::new(&ring, 0, ranks, diffs)
}

/// Koszul complex on fresh variables t1..tn.
pub fn koszul_complex(n: usize, base: &Ring) -> Result<ChainComplex> {
    let names: Vec<String> = (1..=n).map(|i| format!("t{i}")).collect();
    koszul_on(base, &names)
}

/// Degree of Λᵏ in the grading κ_i = Λ^{n−i}.
pub fn kappa_degree(n: i64, k: i64) -> i64 {
    n - k
}

/// Signed Hodge pairing Λᵏ → (Λ^{n−k})^*: c_k·sign(S ++ T) with
/// c_k = −(−1)^{(n(n+1) − k(k+1))/2}.
pub fn theta_components(ring: &Ring, n: usize) -> Vec<Matrix> {
    (0..=n)
        .map(|k| {
            let ck = -epsilon_pair(n as i64, k as i64);
            let cols = wedge_basis(n, k);
            let rows = wedge_basis(n, n - k);
            Matrix::from_fn(ring, rows.len(), cols.len(), |i, j| ring.int(ck * merge_sign(&cols[j], &rows[i])))
        })
        .collect()
}

fn epsilon_pair(n: i64, k: i64) -> i64 {
    if ((n * (n + 1) - k * (k + 1)) / 2).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// The duality form on a Koszul complex with λ the lex top wedge.
pub fn theta_form_on(c: &ChainComplex) -> Result<DualityForm> {
    let n = c.hi();
    DualityForm::new(c, n, epsilon(n), theta_components(c.ring(), n as usize))
}

pub fn theta_form(n: usize, base: &Ring) -> Result<(ChainComplex, DualityForm)> {
    let c = koszul_complex(n, base)?;
    let f = theta_form_on(&c)?;
    Ok((c, f))
}

/// A degree +1 map h on a complex with d∘h + h∘d = id in every degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    complex: ChainComplex,
    /// h_k: C_k → C_{k+1}, one per degree.
    components: Vec<Matrix>,
}

impl Contraction {
    pub fn new(c: &ChainComplex, components: Vec<Matrix>) -> Result<Contraction> {
        if components.len() != c.ranks.len() {
            return Err(Error::DimensionMismatch("one component per degree".into()));
        }
        let h = |k: i64| {
            if k < c.lo() || k > c.hi() {
                Matrix::zeros(c.ring(), c.rank(k + 1), c.rank(k))
            } else {
                components[(k - c.lo()) as usize].clone()
            }
        };
        for k in c.degrees() {
            let dh = c.d(k + 1).mul(&h(k))?;
            let hd = h(k - 1).mul(&c.d(k))?;
            if !dh.add(&hd)?.is_identity() {
                return Err(Error::NotAChainMap { degree: k });
            }
        }
        Ok(Contraction {
            complex: c.clone(),
            components,
        })
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    pub fn components(&self) -> &[Matrix] {
        &self.components
    }
}

/// h(ω) = t_i⁻¹·e_i∧ω on the Koszul complex on t1..tn with t_i inverted
/// (i counted from 1).
pub fn contracting_homotopy(n: usize, i: usize, base: &Ring) -> Result<Contraction> {
    if i == 0 || i > n {
        return Err(Error::UnsupportedInput(format!("variable index {i} outside 1..={n}")));
    }
    let c = koszul_complex(n, base)?;
    let name = format!("t{i}");
    let local = c.ring().invert_variable(&name)?;
    let c = c.embed(&local)?;
    let tinv = local.inv(&local.var(&name)?)?;
    let idx = i - 1;
    let mut comps = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let src = wedge_basis(n, k);
        let dst = wedge_basis(n, k + 1);
        let mut h = Matrix::zeros(&local, dst.len(), src.len());
        for (col, s) in src.iter().enumerate() {
            if s.contains(&idx) {
                continue;
            }
            let sign = merge_sign(&[idx], s);
            let mut u = s.clone();
            u.push(idx);
            u.sort_unstable();
            let row = dst.iter().position(|b| *b == u).unwrap();
            h.set(row, col, if sign > 0 { tinv.clone() } else { local.neg(&tinv) });
        }
        comps.push(h);
    }
    Contraction::new(&c, comps)
}

/// Summands (a, b) of total degree `total`, ascending in a.
fn summands(a: &ChainComplex, b: &ChainComplex, total: i64) -> Vec<(i64, i64)> {
    (a.lo()..=a.hi())
        .map(|x| (x, total - x))
        .filter(|(_, y)| *y >= b.lo() && *y <= b.hi())
        .collect()
}

fn offsets(a: &ChainComplex, b: &ChainComplex, parts: &[(i64, i64)]) -> Vec<usize> {
    let mut acc = 0;
    parts
        .iter()
        .map(|(x, y)| {
            let o = acc;
            acc += a.rank(*x) * b.rank(*y);
            o
        })
        .collect()
}

fn paste(target: &mut Matrix, r0: usize, c0: usize, block: &Matrix) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            target.set(r0 + i, c0 + j, block.get(i, j).clone());
        }
    }
}

/// Brings two complexes to a common ring: the union of their variables,
/// renaming clashes in the second one. Also returns the renamed ring of the
/// second factor.
fn common_ring(a: &ChainComplex, b: &ChainComplex) -> Result<(ChainComplex, ChainComplex, Ring)> {
    if a.ring().scalar_ring() != b.ring().scalar_ring() {
        return Err(Error::RingMismatch);
    }
    if b.ring().variables().is_empty() {
        let ring = a.ring().clone();
        return Ok((a.clone(), b.embed(&ring)?, b.ring().clone()));
    }
    let mut taken: Vec<String> = a.ring().variables().to_vec();
    for v in b.ring().variables() {
        let mut name = v.clone();
        while taken.contains(&name) {
            name.push('_');
        }
        taken.push(name);
    }
    let b_ring = b.ring().rename_variables(&taken[a.ring().variables().len()..])?;
    let mut ring = Ring::polynomial(a.ring(), b_ring.variables())?;
    for v in b_ring.poly().unwrap().inverted() {
        ring = ring.invert_variable(v)?;
    }
    let diffs = b.diffs.iter().map(|d| rename(d, &b_ring)).collect::<Result<Vec<_>>>()?;
    let b_renamed = ChainComplex::new(&b_ring, b.lo, b.ranks.clone(), diffs)?;
    Ok((a.embed(&ring)?, b_renamed.embed(&ring)?, b_ring))
}

/// Reads a matrix over a ring with positionally renamed variables.
fn rename(m: &Matrix, renamed: &Ring) -> Result<Matrix> {
    Matrix::from_rows(renamed, m.to_rows())
}

/// Tensor product of complexes with the Koszul sign.
pub fn tensor_complex(a: &ChainComplex, b: &ChainComplex) -> Result<ChainComplex> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    let ring = a.ring();
    let lo = a.lo() + b.lo();
    let hi = a.hi() + b.hi();
    let ranks: Vec<usize> = (lo..=hi)
        .map(|n| summands(a, b, n).iter().map(|(x, y)| a.rank(*x) * b.rank(*y)).sum())
        .collect();
    let mut diffs = Vec::new();
    for n in lo + 1..=hi {
        let src = summands(a, b, n);
        let dst = summands(a, b, n - 1);
        let so = offsets(a, b, &src);
        let dof = offsets(a, b, &dst);
        let mut d = Matrix::zeros(ring, ranks[(n - 1 - lo) as usize], ranks[(n - lo) as usize]);
        for (si, (x, y)) in src.iter().enumerate() {
            if let Some(di) = dst.iter().position(|p| *p == (x - 1, *y)) {
                let block = a.d(*x).kron(&Matrix::identity(ring, b.rank(*y)))?;
                paste(&mut d, dof[di], so[si], &block);
            }
            if let Some(di) = dst.iter().position(|p| *p == (*x, y - 1)) {
                let mut block = Matrix::identity(ring, a.rank(*x)).kron(&b.d(*y))?;
                if x.rem_euclid(2) == 1 {
                    block = block.neg();
                }
                paste(&mut d, dof[di], so[si], &block);
            }
        }
        diffs.push(d);
    }
    ChainComplex::new(ring, lo, ranks, diffs)
}

/// Tensor product of two complexes with duality forms. Variables of the
/// second factor are renamed when they clash with the first.
pub fn tensor_with_forms(
    a: (&ChainComplex, &DualityForm),
    b: (&ChainComplex, &DualityForm),
) -> Result<(ChainComplex, DualityForm)> {
    let (ca, cb, b_ring) = common_ring(a.0, b.0)?;
    let ring = ca.ring().clone();
    let fa: Vec<Matrix> = a.1.components().iter().map(|m| m.embed(&ring)).collect::<Result<_>>()?;
    let fb: Vec<Matrix> = b
        .1
        .components()
        .iter()
        .map(|m| rename(m, &b_ring)?.embed(&ring))
        .collect::<Result<_>>()?;
    let t = tensor_complex(&ca, &cb)?;
    let (n1, n2) = (a.1.shift(), b.1.shift());
    let shift = n1 + n2;
    let mut comps = Vec::new();
    for n in t.degrees() {
        let src = summands(&ca, &cb, n);
        let dst = summands(&ca, &cb, shift - n);
        let so = offsets(&ca, &cb, &src);
        let dof = offsets(&ca, &cb, &dst);
        let mut f = Matrix::zeros(&ring, t.rank(shift - n), t.rank(n));
        for (si, (x, y)) in src.iter().enumerate() {
            let di = dst
                .iter()
                .position(|p| *p == (n1 - x, n2 - y))
                .ok_or_else(|| Error::BadDualityForm("summand has no dual partner".into()))?;
            let mut block = fa[(x - ca.lo()) as usize].kron(&fb[(y - cb.lo()) as usize])?;
            if (y * n1).rem_euclid(2) == 1 {
                block = block.neg();
            }
            paste(&mut f, dof[di], so[si], &block);
        }
        comps.push(f);
    }
    let eps = a.1.epsilon() * b.1.epsilon() * if (n1 * n2).rem_euclid(2) == 0 { 1 } else { -1 };
    let form = DualityForm::new(&t, shift, eps, comps)?;
    Ok((t, form))
}

/// th(𝒪, id) on the line with coordinate `var`.
pub fn thom_class_on(base: &Ring, var: &str) -> Result<(ChainComplex, DualityForm)> {
    let c = koszul_on(base, &[var])?;
    let f = theta_form_on(&c)?;
    Ok((c, f))
}

pub fn thom_class_trivial_line(base: &Ring) -> Result<(ChainComplex, DualityForm)> {
    thom_class_on(base, "t")
}

/// The Borel class on the chart with coordinates t0, t1, together with the
/// diagram as drawn: the bottom row and middle vertical are written in the
/// degree-1 dual basis with its two vectors exchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BorelChart {
    pub complex: ChainComplex,
    pub form: DualityForm,
    /// Change of basis on the degree-1 dual term.
    pub bottom_basis: Matrix,
    /// Bottom differentials in degrees 2 and 1, in the displayed basis.
    pub bottom: [Matrix; 2],
    /// Verticals in degrees 2, 1, 0, in the displayed basis.
    pub verticals: [Matrix; 3],
}

pub fn borel_class_chart(base: &Ring) -> Result<BorelChart> {
    let complex = koszul_on(base, &["t0", "t1"])?;
    let form = theta_form_on(&complex)?;
    let ring = complex.ring();
    let q = Matrix::from_ints(ring, &[&[0, 1], &[1, 0]]);
    let dual = dual_shifted(&complex, 2);
    let bottom = [q.mul(&dual.d(2))?, dual.d(1).mul(&q)?];
    let verticals = [form.component(2).clone(), q.mul(form.component(1))?, form.component(0).clone()];
    // The drawn diagram commutes on its own.
    if bottom[0].mul(&verticals[0])? != verticals[1].mul(&complex.d(2))?
        || bottom[1].mul(&verticals[1])? != verticals[2].mul(&complex.d(1))?
    {
        return Err(Error::NotAChainMap { degree: 1 });
    }
    Ok(BorelChart {
        complex,
        form,
        bottom_basis: q,
        bottom,
        verticals,
    })
}

/// A chain isomorphism that also intertwines two duality forms:
/// f_{n−k}ᵀ·φ^target_k·f_k = φ^source_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormIsometry {
    pub source: (ChainComplex, DualityForm),
    pub target: (ChainComplex, DualityForm),
    pub components: Vec<Matrix>,
}

impl FormIsometry {
    pub fn new(
        source: (&ChainComplex, &DualityForm),
        target: (&ChainComplex, &DualityForm),
        components: Vec<Matrix>,
    ) -> Result<FormIsometry> {
        let map = ChainMap::new(source.0, target.0, components.clone())?;
        let n = source.1.shift();
        if target.1.shift() != n || target.1.epsilon() != source.1.epsilon() {
            return Err(Error::BadDualityForm("shift or sign differs".into()));
        }
        for k in source.0.degrees() {
            let f = map.component(k);
            let d = f.determinant()?;
            if !f.ring().is_unit(&d) {
                return Err(Error::NotInvertible);
            }
            let pulled = map.component(n - k).transpose().mul(target.1.component(k))?.mul(f)?;
            if &pulled != source.1.component(k) {
                return Err(Error::BadDualityForm(format!("forms differ at degree {k}")));
            }
        }
        Ok(FormIsometry {
            source: (source.0.clone(), source.1.clone()),
            target: (target.0.clone(), target.1.clone()),
            components,
        })
    }

    /// Pushes the source data through the isomorphism; equals the target.
    pub fn transport(&self) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
        let (c, phi) = &self.source;
        let lo = c.lo();
        let inv: Vec<Matrix> = self.components.iter().map(|f| f.inverse_if_unit()).collect::<Result<_>>()?;
        let n = phi.shift();
        let mut diffs = Vec::new();
        for k in lo + 1..=c.hi() {
            diffs.push(
                self.components[(k - 1 - lo) as usize]
                    .mul(&c.d(k))?
                    .mul(&inv[(k - lo) as usize])?,
            );
        }
        let mut forms = Vec::new();
        for k in c.degrees() {
            forms.push(
                inv[(n - k - lo) as usize]
                    .transpose()
                    .mul(phi.component(k))?
                    .mul(&inv[(k - lo) as usize])?,
            );
        }
        Ok((diffs, forms))
    }
}

/// Index of a ⊗ b inside degree x + y of the tensor complex.
fn tensor_index(a: &ChainComplex, b: &ChainComplex, (x, y): (i64, i64), ia: usize, ib: usize) -> usize {
    let parts = summands(a, b, x + y);
    let pos = parts.iter().position(|p| *p == (x, y)).expect("summand present");
    offsets(a, b, &parts)[pos] + ia * b.rank(y) + ib
}

/// The associator (A ⊗ B) ⊗ C → A ⊗ (B ⊗ C), a permutation in each degree,
/// certified against both complexes and their forms.
pub fn reassociation(
    a: (&ChainComplex, &DualityForm),
    b: (&ChainComplex, &DualityForm),
    c: (&ChainComplex, &DualityForm),
) -> Result<FormIsometry> {
    let ab = tensor_with_forms(a, b)?;
    let left = tensor_with_forms((&ab.0, &ab.1), c)?;
    let bc = tensor_with_forms(b, c)?;
    let right = tensor_with_forms(a, (&bc.0, &bc.1))?;
    if left.0.ring() != right.0.ring() || left.0.ranks() != right.0.ranks() {
        return Err(Error::NoMatchFound);
    }
    let ring = left.0.ring().clone();
    let (ca, cb, cc) = (a.0, b.0, c.0);
    let mut comps: Vec<Matrix> = left
        .0
        .degrees()
        .map(|k| Matrix::zeros(&ring, right.0.rank(k), left.0.rank(k)))
        .collect();
    let lo = left.0.lo();
    for x in ca.lo()..=ca.hi() {
        for y in cb.lo()..=cb.hi() {
            for w in cc.lo()..=cc.hi() {
                let deg = x + y + w;
                for ia in 0..ca.rank(x) {
                    for ib in 0..cb.rank(y) {
                        for ic in 0..cc.rank(w) {
                            let iab = tensor_index(ca, cb, (x, y), ia, ib);
                            let src = tensor_index(&ab.0, cc, (x + y, w), iab, ic);
                            let ibc = tensor_index(cb, cc, (y, w), ib, ic);
                            let dst = tensor_index(ca, &bc.0, (x, y + w), ia, ibc);
                            comps[(deg - lo) as usize].set(dst, src, ring.one());
                        }
                    }
                }
            }
        }
    }
    FormIsometry::new((&left.0, &left.1), (&right.0, &right.1), comps)
}

/// Signed permutation matrices of size 2, in a fixed order.
fn signed_perms_2(ring: &Ring) -> Vec<Matrix> {
    let mut out = Vec::new();
    for swap in [false, true] {
        for s0 in [1, -1] {
            for s1 in [1, -1] {
                let m = if swap {
                    [[0, s1], [s0, 0]]
                } else {
                    [[s0, 0], [0, s1]]
                };
                out.push(Matrix::from_ints(ring, &[&m[0], &m[1]]));
            }
        }
    }
    out
}

/// Finds the signed permutation identifying th(t0) ⊗ th(t1) with the Borel
/// chart complex and its form.
pub fn compare_borel_thom(base: &Ring) -> Result<FormIsometry> {
    let (c0, f0) = thom_class_on(base, "t0")?;
    let (c1, f1) = thom_class_on(base, "t1")?;
    let (t, phi) = tensor_with_forms((&c0, &f0), (&c1, &f1))?;
    let borel = borel_class_chart(base)?;
    if t.ring() != borel.complex.ring() {
        return Err(Error::RingMismatch);
    }
    let ring = t.ring().clone();
    for mid in signed_perms_2(&ring) {
        for s0 in [1, -1] {
            for s2 in [1, -1] {
                let comps = vec![
                    Matrix::from_ints(&ring, &[&[s0]]),
                    mid.clone(),
                    Matrix::from_ints(&ring, &[&[s2]]),
                ];
                if let Ok(iso) = FormIsometry::new((&t, &phi), (&borel.complex, &borel.form), comps) {
                    return Ok(iso);
                }
            }
        }
    }
    Err(Error::NoMatchFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn q() -> Ring {
        Ring::Rationals
    }

    fn m(ring: &Ring, rows: &[&[&str]]) -> Matrix {
        Matrix::parse(ring, rows).unwrap()
    }

    #[test]
    fn koszul_small_cases() {
        let c = koszul_complex(1, &q()).unwrap();
        assert_eq!(c.ranks(), &[1, 1]);
        assert_eq!(c.d(1), m(c.ring(), &[&["t1"]]));
        let c = koszul_complex(2, &q()).unwrap();
        assert_eq!(c.d(1), m(c.ring(), &[&["t1", "t2"]]));
        assert_eq!(c.d(2), m(c.ring(), &[&["-t2"], &["t1"]]));
        for n in 0..=4 {
            koszul_complex(n, &q()).unwrap();
        }
    }

    #[test]
    fn rejects_non_complexes() {
        let r = Ring::Integers;
        let one = Matrix::from_ints(&r, &[&[1]]);
        assert_eq!(
            ChainComplex::new(&r, 0, vec![1, 1, 1], vec![one.clone(), one]),
            Err(Error::NotAComplex { degree: 2 })
        );
    }

    #[test]
    fn dual_of_thom_row() {
        let (c, _) = thom_class_trivial_line(&q()).unwrap();
        let d = dual_shifted(&c, 1);
        assert_eq!(d.d(1), m(c.ring(), &[&["-t"]]));
        let zero = ChainComplex::new(&q(), 0, vec![0], vec![]).unwrap();
        assert_eq!(dual_shifted(&zero, 0).ranks(), &[0]);
        let k = koszul_complex(3, &q()).unwrap();
        assert_eq!(dual_shifted(&dual_shifted(&k, 3), 3), k);
        double_dual_identification(&k, 3).unwrap();
    }

    #[test]
    fn theta_signs_match_small_diagrams() {
        let (c, f) = thom_class_trivial_line(&q()).unwrap();
        assert_eq!(f.component(1), &Matrix::from_ints(c.ring(), &[&[-1]]));
        assert_eq!(f.component(0), &Matrix::from_ints(c.ring(), &[&[1]]));
        let (c, f) = theta_form(2, &q()).unwrap();
        assert_eq!(f.epsilon(), -1);
        assert_eq!(f.component(1), &Matrix::from_ints(c.ring(), &[&[0, 1], &[-1, 0]]));
        for n in 0..=4 {
            let (_, f) = theta_form(n, &Ring::prime_field(7).unwrap()).unwrap();
            assert_eq!(f.epsilon(), epsilon(n as i64));
        }
    }

    #[test]
    fn contractions() {
        let h = contracting_homotopy(1, 1, &q()).unwrap();
        let r = h.complex().ring().clone();
        assert_eq!(h.components()[0], m(&r, &[&["t1^-1"]]));
        let h = contracting_homotopy(2, 1, &q()).unwrap();
        let r = h.complex().ring().clone();
        // h(1) = t1⁻¹e1, h(e1) = 0, h(e2) = t1⁻¹e1∧e2.
        assert_eq!(h.components()[0], m(&r, &[&["t1^-1"], &["0"]]));
        assert_eq!(h.components()[1], m(&r, &[&["0", "t1^-1"]]));
        contracting_homotopy(3, 2, &q()).unwrap();
        assert!(contracting_homotopy(2, 3, &q()).is_err());
    }

    #[test]
    fn thom_squared() {
        let (c0, f0) = thom_class_on(&q(), "t0").unwrap();
        let (c1, f1) = thom_class_on(&q(), "t1").unwrap();
        let (t, phi) = tensor_with_forms((&c0, &f0), (&c1, &f1)).unwrap();
        let r = t.ring().clone();
        assert_eq!(t.ranks(), &[1, 2, 1]);
        assert_eq!(t.d(1), m(&r, &[&["t1", "t0"]]));
        assert_eq!(t.d(2), m(&r, &[&["t0"], &["-t1"]]));
        assert_eq!(phi.epsilon(), -1);
    }

    #[test]
    fn triple_thom_tensor_reassociates() {
        let q = Ring::Rationals;
        let (c, f) = thom_class_trivial_line(&q).unwrap();
        let iso = reassociation((&c, &f), (&c, &f), (&c, &f)).unwrap();
        assert_eq!(iso.source.0.ranks(), &[1, 3, 3, 1]);
        assert_eq!(iso.source.0.ring().variables(), ["t", "t_", "t__"]);
        let (c2, f2) = theta_form(2, &q).unwrap();
        reassociation((&c, &f), (&c2, &f2), (&c, &f)).unwrap();
    }

    #[test]
    fn tensor_with_unit_is_neutral() {
        let (c, f) = theta_form(2, &q()).unwrap();
        let u = ChainComplex::unit(&q());
        let uf = DualityForm::unit(&q());
        let (t, phi) = tensor_with_forms((&c, &f), (&u, &uf)).unwrap();
        assert_eq!(t, c);
        assert_eq!(phi, f);
    }

    #[test]
    fn clashing_variables_are_renamed() {
        let (c, f) = thom_class_trivial_line(&q()).unwrap();
        let (t, _) = tensor_with_forms((&c, &f), (&c, &f)).unwrap();
        assert_eq!(t.ring().variables(), &["t".to_string(), "t_".to_string()]);
    }

    #[test]
    fn borel_diagram_and_comparison() {
        let b = borel_class_chart(&q()).unwrap();
        let r = b.complex.ring().clone();
        assert_eq!(b.complex.d(1), m(&r, &[&["t0", "t1"]]));
        assert_eq!(b.bottom[0], m(&r, &[&["-t1"], &["-t0"]]));
        assert_eq!(b.verticals[1], Matrix::from_ints(&r, &[&[-1, 0], &[0, 1]]));
        assert_eq!(b.verticals[0], Matrix::from_ints(&r, &[&[-1]]));
        assert_eq!(b.verticals[2], Matrix::from_ints(&r, &[&[1]]));
        let iso = compare_borel_thom(&q()).unwrap();
        let (diffs, forms) = iso.transport().unwrap();
        assert_eq!(diffs, b.complex.differentials());
        assert_eq!(forms, b.form.components());
    }
}
