//! Coefficient rings and their elements.
//!
//! A [`Ring`] is a descriptor; elements ([`Elem`]) carry no ring pointer and
//! every operation goes through the descriptor. Representations are
//! canonical, so structural equality is ring equality.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest modulus accepted for `PrimeField` and `Modular`.
pub const MAX_MODULUS: u64 = 1 << 32;

/// Exponent vector of a monomial, one slot per ring variable.
pub type Monomial = Box<[i32]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Integers,
    Rationals,
    PrimeField(u64),
    Modular(u64),
    Polynomial(Arc<PolyRing>),
}

/// Flat multivariate (Laurent in the inverted variables) polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyRing {
    base: Ring,
    variables: Vec<String>,
    inverted: Vec<bool>,
}

impl PolyRing {
    pub fn base(&self) -> &Ring {
        &self.base
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn is_inverted(&self, index: usize) -> bool {
        self.inverted[index]
    }

    pub fn inverted(&self) -> impl Iterator<Item = &str> {
        self.variables
            .iter()
            .zip(&self.inverted)
            .filter(|(_, inv)| **inv)
            .map(|(v, _)| v.as_str())
    }

    pub fn is_localized(&self) -> bool {
        self.inverted.iter().any(|b| *b)
    }

    fn allowed(&self, m: &[i32]) -> bool {
        m.iter().zip(&self.inverted).all(|(e, inv)| *e >= 0 || *inv)
    }

    fn unit_monomial(&self, m: &[i32]) -> bool {
        m.iter().zip(&self.inverted).all(|(e, inv)| *e == 0 || *inv)
    }

    fn one_monomial(&self) -> Monomial {
        vec![0; self.variables.len()].into_boxed_slice()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Int(BigInt),
    Rat(BigRational),
    Res(u64),
    Poly(Poly),
}

/// Sparse polynomial: terms sorted by ascending monomial, no zero coefficients.
/// Coefficients are scalar elements of the base ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Elem)>,
}

impl Poly {
    pub fn terms(&self) -> &[(Monomial, Elem)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn leading(&self) -> Option<&(Monomial, Elem)> {
        self.terms.last()
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as (prime, exponent) pairs.
fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn mod_inv(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(n as i128) as u64)
}

fn bigint_mod(x: &BigInt, n: u64) -> u64 {
    x.mod_floor(&BigInt::from(n)).to_u64().unwrap()
}

fn add_mono(a: &[i32], b: &[i32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_mono(a: &[i32], b: &[i32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl Ring {
    pub fn prime_field(p: u64) -> Result<Ring> {
        if !is_prime(p) || p >= MAX_MODULUS {
            return Err(Error::InvalidRing(format!("{p} is not a supported prime")));
        }
        Ok(Ring::PrimeField(p))
    }

    pub fn modular(n: u64) -> Result<Ring> {
        if !(2..MAX_MODULUS).contains(&n) {
            return Err(Error::InvalidRing(format!("modulus {n} out of range")));
        }
        Ok(Ring::Modular(n))
    }

    /// Adjoins variables. Over a polynomial ring the result stays flat.
    pub fn polynomial<S: AsRef<str>>(base: &Ring, variables: &[S]) -> Result<Ring> {
        let (scalar, mut vars, mut inv) = match base {
            Ring::Polynomial(p) => (p.base.clone(), p.variables.clone(), p.inverted.clone()),
            other => (other.clone(), Vec::new(), Vec::new()),
        };
        for v in variables {
            let v = v.as_ref();
            if !valid_identifier(v) {
                return Err(Error::InvalidRing(format!("bad variable name `{v}`")));
            }
            if vars.iter().any(|w| w == v) {
                return Err(Error::InvalidRing(format!("duplicate variable `{v}`")));
            }
            vars.push(v.to_owned());
            inv.push(false);
        }
        if vars.is_empty() {
            return Ok(scalar);
        }
        Ok(Ring::Polynomial(Arc::new(PolyRing {
            base: scalar,
            variables: vars,
            inverted: inv,
        })))
    }

    /// Localizes at one variable. Idempotent.
    pub fn invert_variable(&self, v: &str) -> Result<Ring> {
        let p = self.poly().ok_or_else(|| Error::UnknownVariable(v.to_owned()))?;
        let idx = p.index_of(v)?;
        let mut q = p.clone();
        q.inverted[idx] = true;
        Ok(Ring::Polynomial(Arc::new(q)))
    }

    /// Same ring with its variables renamed positionally; elements carry over
    /// unchanged.
    pub fn rename_variables<S: AsRef<str>>(&self, names: &[S]) -> Result<Ring> {
        let p = self
            .poly()
            .ok_or_else(|| Error::InvalidRing("no variables to rename".into()))?;
        if names.len() != p.variables.len() {
            return Err(Error::DimensionMismatch("variable count".into()));
        }
        let fresh = Ring::polynomial(&p.base, names)?;
        let mut q = fresh.poly().unwrap().clone();
        q.inverted = p.inverted.clone();
        Ok(Ring::Polynomial(Arc::new(q)))
    }

    pub fn poly(&self) -> Option<&PolyRing> {
        match self {
            Ring::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    /// The coefficient ring (the ring itself when it is not polynomial).
    pub fn scalar_ring(&self) -> &Ring {
        match self {
            Ring::Polynomial(p) => &p.base,
            r => r,
        }
    }

    pub fn variables(&self) -> &[String] {
        match self {
            Ring::Polynomial(p) => &p.variables,
            _ => &[],
        }
    }

    pub fn var_index(&self, v: &str) -> Result<usize> {
        match self {
            Ring::Polynomial(p) => p.index_of(v),
            _ => Err(Error::UnknownVariable(v.to_owned())),
        }
    }

    /// Characteristic, with 0 for ℤ and ℚ.
    pub fn characteristic(&self) -> u64 {
        match self.scalar_ring() {
            Ring::PrimeField(p) | Ring::Modular(p) => *p,
            _ => 0,
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match self.scalar_ring() {
            Ring::PrimeField(p) | Ring::Modular(p) => Some(*p),
            _ => None,
        }
    }

    pub fn is_field(&self) -> bool {
        match self {
            Ring::Rationals | Ring::PrimeField(_) => true,
            Ring::Modular(n) => is_prime(*n),
            _ => false,
        }
    }

    pub fn is_domain(&self) -> bool {
        match self.scalar_ring() {
            Ring::Integers | Ring::Rationals | Ring::PrimeField(_) => true,
            Ring::Modular(n) => is_prime(*n),
            Ring::Polynomial(_) => unreachable!(),
        }
    }

    pub fn zero(&self) -> Elem {
        match self {
            Ring::Integers => Elem::Int(BigInt::zero()),
            Ring::Rationals => Elem::Rat(BigRational::zero()),
            Ring::PrimeField(_) | Ring::Modular(_) => Elem::Res(0),
            Ring::Polynomial(_) => Elem::Poly(Poly::default()),
        }
    }

    pub fn one(&self) -> Elem {
        self.int(1)
    }

    pub fn int(&self, v: i64) -> Elem {
        self.from_bigint(&BigInt::from(v))
    }

    pub fn from_bigint(&self, v: &BigInt) -> Elem {
        match self {
            Ring::Integers => Elem::Int(v.clone()),
            Ring::Rationals => Elem::Rat(BigRational::from_integer(v.clone())),
            Ring::PrimeField(n) | Ring::Modular(n) => Elem::Res(bigint_mod(v, *n)),
            Ring::Polynomial(p) => p.constant(p.base.from_bigint(v)),
        }
    }

    /// The fraction `num/den`, when it exists in this ring.
    pub fn fraction(&self, num: i64, den: i64) -> Result<Elem> {
        let d = self.int(den);
        self.div_exact(&self.int(num), &d)
    }

    pub fn var(&self, name: &str) -> Result<Elem> {
        let p = self.poly().ok_or_else(|| Error::UnknownVariable(name.to_owned()))?;
        let i = p.index_of(name)?;
        let mut m = p.one_monomial();
        m[i] = 1;
        Ok(Elem::Poly(Poly {
            terms: vec![(m, p.base.one())],
        }))
    }

    pub fn is_zero(&self, x: &Elem) -> bool {
        match x {
            Elem::Int(a) => a.is_zero(),
            Elem::Rat(a) => a.is_zero(),
            Elem::Res(a) => *a == 0,
            Elem::Poly(p) => p.is_zero(),
        }
    }

    pub fn is_one(&self, x: &Elem) -> bool {
        *x == self.one()
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        match (self, a, b) {
            (_, Elem::Int(x), Elem::Int(y)) => Elem::Int(x + y),
            (_, Elem::Rat(x), Elem::Rat(y)) => Elem::Rat(x + y),
            (Ring::PrimeField(n) | Ring::Modular(n), Elem::Res(x), Elem::Res(y)) => {
                Elem::Res(((*x as u128 + *y as u128) % *n as u128) as u64)
            }
            (Ring::Polynomial(p), Elem::Poly(x), Elem::Poly(y)) => Elem::Poly(p.add(x, y)),
            _ => panic!("element does not belong to {self:?}"),
        }
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        match (self, a) {
            (_, Elem::Int(x)) => Elem::Int(-x),
            (_, Elem::Rat(x)) => Elem::Rat(-x),
            (Ring::PrimeField(n) | Ring::Modular(n), Elem::Res(x)) => {
                Elem::Res(if *x == 0 { 0 } else { n - x })
            }
            (Ring::Polynomial(p), Elem::Poly(x)) => Elem::Poly(Poly {
                terms: x.terms.iter().map(|(m, c)| (m.clone(), p.base.neg(c))).collect(),
            }),
            _ => panic!("element does not belong to {self:?}"),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match (self, a, b) {
            (_, Elem::Int(x), Elem::Int(y)) => Elem::Int(x * y),
            (_, Elem::Rat(x), Elem::Rat(y)) => Elem::Rat(x * y),
            (Ring::PrimeField(n) | Ring::Modular(n), Elem::Res(x), Elem::Res(y)) => {
                Elem::Res(((*x as u128 * *y as u128) % *n as u128) as u64)
            }
            (Ring::Polynomial(p), Elem::Poly(x), Elem::Poly(y)) => Elem::Poly(p.mul(x, y)),
            _ => panic!("element does not belong to {self:?}"),
        }
    }

    pub fn pow(&self, a: &Elem, mut e: u32) -> Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Sum of products, skipping zero factors.
    pub fn dot<'a>(&self, pairs: impl Iterator<Item = (&'a Elem, &'a Elem)>) -> Elem {
        let mut acc = self.zero();
        for (a, b) in pairs {
            if !self.is_zero(a) && !self.is_zero(b) {
                acc = self.add(&acc, &self.mul(a, b));
            }
        }
        acc
    }

    pub fn is_unit(&self, x: &Elem) -> bool {
        match (self, x) {
            (_, Elem::Int(a)) => a.abs().is_one(),
            (_, Elem::Rat(a)) => !a.is_zero(),
            (Ring::PrimeField(n) | Ring::Modular(n), Elem::Res(a)) => a.gcd(n) == 1,
            (Ring::Polynomial(p), Elem::Poly(a)) => p.is_unit(a),
            _ => false,
        }
    }

    pub fn inv(&self, x: &Elem) -> Result<Elem> {
        match (self, x) {
            (_, Elem::Int(a)) if a.abs().is_one() => Ok(Elem::Int(a.clone())),
            (_, Elem::Rat(a)) if !a.is_zero() => Ok(Elem::Rat(a.recip())),
            (Ring::PrimeField(n) | Ring::Modular(n), Elem::Res(a)) => {
                mod_inv(*a, *n).map(Elem::Res).ok_or(Error::NotAUnit)
            }
            (Ring::Polynomial(p), Elem::Poly(a)) => p.inv(a).map(Elem::Poly),
            _ => Err(Error::NotAUnit),
        }
    }

    /// The unique `q` with `a = q·b`, when it exists and `b` is regular or a unit.
    pub fn div_exact(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        if self.is_unit(b) {
            return Ok(self.mul(a, &self.inv(b)?));
        }
        match (self, a, b) {
            (_, Elem::Int(x), Elem::Int(y)) => {
                if y.is_zero() {
                    return Err(Error::NotDivisible);
                }
                let (q, r) = x.div_rem(y);
                if r.is_zero() {
                    Ok(Elem::Int(q))
                } else {
                    Err(Error::NotDivisible)
                }
            }
            (Ring::Polynomial(p), Elem::Poly(x), Elem::Poly(y)) => p.div_exact(x, y).map(Elem::Poly),
            _ => Err(Error::NotDivisible),
        }
    }

    /// Maps `x` from `from` into this ring: ℤ → anything, ℚ → ℚ or F_p (when
    /// the denominator is invertible), and polynomials by matching variable names.
    pub fn embed(&self, x: &Elem, from: &Ring) -> Result<Elem> {
        if from == self {
            return Ok(x.clone());
        }
        match (from, x) {
            (Ring::Polynomial(fp), Elem::Poly(px)) => {
                let tp = self
                    .poly()
                    .ok_or_else(|| Error::NotRepresentable("polynomial into scalar ring".into()))?;
                let map: Vec<usize> = fp
                    .variables
                    .iter()
                    .map(|v| tp.index_of(v))
                    .collect::<Result<_>>()?;
                let mut out = Vec::with_capacity(px.terms.len());
                for (m, c) in &px.terms {
                    let mut nm = tp.one_monomial();
                    for (i, e) in m.iter().enumerate() {
                        nm[map[i]] = *e;
                    }
                    if !tp.allowed(&nm) {
                        return Err(Error::NotRepresentable("negative exponent".into()));
                    }
                    let nc = tp.base.embed(c, &fp.base)?;
                    if !tp.base.is_zero(&nc) {
                        out.push((nm, nc));
                    }
                }
                Ok(Elem::Poly(tp.normalize(out)))
            }
            (_, _) => {
                if let Ring::Polynomial(tp) = self {
                    return Ok(tp.constant(tp.base.embed(x, from)?));
                }
                match (self, x) {
                    (_, Elem::Int(v)) => Ok(self.from_bigint(v)),
                    (Ring::Rationals, Elem::Rat(v)) => Ok(Elem::Rat(v.clone())),
                    (Ring::Integers, Elem::Rat(v)) if v.is_integer() => Ok(Elem::Int(v.to_integer())),
                    (Ring::PrimeField(_) | Ring::Modular(_), Elem::Rat(v)) => {
                        let n = self.from_bigint(v.numer());
                        let d = self.from_bigint(v.denom());
                        self.div_exact(&n, &d)
                            .map_err(|_| Error::NotRepresentable("denominator not invertible".into()))
                    }
                    (Ring::PrimeField(n) | Ring::Modular(n), Elem::Res(v)) => match from {
                        Ring::PrimeField(m) | Ring::Modular(m) if m % n == 0 => Ok(Elem::Res(v % n)),
                        _ => Err(Error::NotRepresentable("incompatible moduli".into())),
                    },
                    _ => Err(Error::NotRepresentable(format!("{from:?} into {self:?}"))),
                }
            }
        }
    }

    /// Substitutes `values[i]` (elements of `target`) for the i-th variable.
    pub fn substitute(&self, x: &Elem, values: &[Elem], target: &Ring) -> Result<Elem> {
        let p = match (self, x) {
            (Ring::Polynomial(p), Elem::Poly(px)) => (p, px),
            _ => return target.embed(x, self),
        };
        let (pr, px) = p;
        if values.len() != pr.variables.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} variables",
                values.len(),
                pr.variables.len()
            )));
        }
        let mut inverses: Vec<Option<Elem>> = vec![None; values.len()];
        let mut acc = target.zero();
        for (m, c) in &px.terms {
            let mut t = target.embed(c, &pr.base)?;
            for (i, e) in m.iter().enumerate() {
                if *e > 0 {
                    t = target.mul(&t, &target.pow(&values[i], *e as u32));
                } else if *e < 0 {
                    if inverses[i].is_none() {
                        inverses[i] = Some(target.inv(&values[i])?);
                    }
                    t = target.mul(&t, &target.pow(inverses[i].as_ref().unwrap(), (-*e) as u32));
                }
            }
            acc = target.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Constant term value of a polynomial that has no other terms.
    pub fn as_constant(&self, x: &Elem) -> Option<Elem> {
        match (self, x) {
            (Ring::Polynomial(p), Elem::Poly(px)) => match px.terms.as_slice() {
                [] => Some(p.base.zero()),
                [(m, c)] if m.iter().all(|e| *e == 0) => Some(c.clone()),
                _ => None,
            },
            _ => Some(x.clone()),
        }
    }

    /// Coefficients of `x` as a polynomial in variable `var`, lowest degree first,
    /// together with that lowest degree.
    pub fn coefficients_in(&self, x: &Elem, var: &str) -> Result<(i32, Vec<Elem>)> {
        let p = self.poly().ok_or_else(|| Error::UnknownVariable(var.to_owned()))?;
        let i = p.index_of(var)?;
        let Elem::Poly(px) = x else { unreachable!() };
        if px.is_zero() {
            return Ok((0, Vec::new()));
        }
        let lo = px.terms.iter().map(|(m, _)| m[i]).min().unwrap();
        let hi = px.terms.iter().map(|(m, _)| m[i]).max().unwrap();
        let mut buckets: Vec<Vec<(Monomial, Elem)>> = vec![Vec::new(); (hi - lo + 1) as usize];
        for (m, c) in &px.terms {
            let mut nm = m.clone();
            let d = nm[i];
            nm[i] = 0;
            buckets[(d - lo) as usize].push((nm, c.clone()));
        }
        Ok((lo, buckets.into_iter().map(|b| Elem::Poly(p.normalize(b))).collect()))
    }

    /// Canonical text form.
    pub fn format(&self, x: &Elem) -> String {
        match x {
            Elem::Int(v) => v.to_string(),
            Elem::Rat(v) => fmt_rat(v),
            Elem::Res(v) => v.to_string(),
            Elem::Poly(p) => self.format_poly(p),
        }
    }

    fn format_poly(&self, p: &Poly) -> String {
        let pr = self.poly().expect("polynomial element");
        if p.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in p.terms.iter().rev().enumerate() {
            let (neg, mag) = match c {
                Elem::Int(v) => (v.is_negative(), Elem::Int(v.abs())),
                Elem::Rat(v) => (v.is_negative(), Elem::Rat(v.abs())),
                other => (false, other.clone()),
            };
            if neg {
                out.push('-');
            } else if k > 0 {
                out.push('+');
            }
            let constant = m.iter().all(|e| *e == 0);
            let unit_mag = pr.base.is_one(&mag);
            if constant || !unit_mag {
                out.push_str(&pr.base.format(&mag));
            }
            let mut star = constant || !unit_mag;
            for (i, e) in m.iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                if star {
                    out.push('*');
                }
                star = true;
                out.push_str(&pr.variables[i]);
                if *e != 1 {
                    let _ = write!(out, "^{e}");
                }
            }
        }
        out
    }

    /// Parses the canonical grammar: integers, `a/b`, and terms `c*v1^e1*v2^e2`
    /// joined by `+`/`-`. Whitespace is ignored.
    pub fn parse(&self, s: &str) -> Result<Elem> {
        Parser { ring: self, src: s.as_bytes(), pos: 0 }.expr()
    }
}

fn fmt_rat(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn valid_identifier(v: &str) -> bool {
    let mut cs = v.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl PolyRing {
    fn index_of(&self, v: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|w| w == v)
            .ok_or_else(|| Error::UnknownVariable(v.to_owned()))
    }

    fn constant(&self, c: Elem) -> Elem {
        if self.base.is_zero(&c) {
            Elem::Poly(Poly::default())
        } else {
            Elem::Poly(Poly {
                terms: vec![(self.one_monomial(), c)],
            })
        }
    }

    fn normalize(&self, terms: Vec<(Monomial, Elem)>) -> Poly {
        let mut acc: BTreeMap<Monomial, Elem> = BTreeMap::new();
        for (m, c) in terms {
            match acc.get_mut(&m) {
                Some(v) => *v = self.base.add(v, &c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Poly {
            terms: acc.into_iter().filter(|(_, c)| !self.base.is_zero(c)).collect(),
        }
    }

    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() && j < b.terms.len() {
            let (ma, ca) = &a.terms[i];
            let (mb, cb) = &b.terms[j];
            match ma.cmp(mb) {
                core::cmp::Ordering::Less => {
                    out.push((ma.clone(), ca.clone()));
                    i += 1;
                }
                core::cmp::Ordering::Greater => {
                    out.push((mb.clone(), cb.clone()));
                    j += 1;
                }
                core::cmp::Ordering::Equal => {
                    let s = self.base.add(ca, cb);
                    if !self.base.is_zero(&s) {
                        out.push((ma.clone(), s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a.terms[i..]);
        out.extend_from_slice(&b.terms[j..]);
        Poly { terms: out }
    }

    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::default();
        }
        let mut acc: BTreeMap<Monomial, Elem> = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let c = self.base.mul(ca, cb);
                if self.base.is_zero(&c) {
                    continue;
                }
                let m = add_mono(ma, mb);
                match acc.get_mut(&m) {
                    Some(v) => *v = self.base.add(v, &c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Poly {
            terms: acc.into_iter().filter(|(_, c)| !self.base.is_zero(c)).collect(),
        }
    }

    fn is_unit(&self, a: &Poly) -> bool {
        match &self.base {
            Ring::Modular(n) if !is_prime(*n) => factorize(*n).iter().all(|(p, _)| {
                let mut live = a.terms.iter().filter(|(_, c)| match c {
                    Elem::Res(v) => v % p != 0,
                    _ => false,
                });
                matches!((live.next(), live.next()), (Some((m, _)), None) if self.unit_monomial(m))
            }),
            base => match a.terms.as_slice() {
                [(m, c)] => self.unit_monomial(m) && base.is_unit(c),
                _ => false,
            },
        }
    }

    fn inv(&self, a: &Poly) -> Result<Poly> {
        if !self.is_unit(a) {
            return Err(Error::NotAUnit);
        }
        if let [(m, c)] = a.terms.as_slice() {
            let neg: Monomial = m.iter().map(|e| -e).collect();
            return Ok(Poly {
                terms: vec![(neg, self.base.inv(c)?)],
            });
        }
        let Ring::Modular(n) = self.base else { unreachable!() };
        // Over ℤ/n with zero divisors: invert modulo each prime power, where
        // the unit is c·m·(1+ν) with ν nilpotent, then glue by CRT.
        let mut parts = Vec::new();
        for (p, e) in factorize(n) {
            let q = p.pow(e);
            let local = PolyRing {
                base: Ring::Modular(q),
                variables: self.variables.clone(),
                inverted: self.inverted.clone(),
            };
            let reduced = local.normalize(
                a.terms
                    .iter()
                    .map(|(m, c)| match c {
                        Elem::Res(v) => (m.clone(), Elem::Res(v % q)),
                        _ => unreachable!(),
                    })
                    .collect(),
            );
            let (um, uc) = reduced
                .terms
                .iter()
                .find(|(_, c)| matches!(c, Elem::Res(v) if v % p != 0))
                .cloned()
                .ok_or(Error::NotAUnit)?;
            let uinv = Poly {
                terms: vec![(um.iter().map(|e| -e).collect(), local.base.inv(&uc)?)],
            };
            let one = Poly {
                terms: vec![(local.one_monomial(), Elem::Res(1 % q))],
            };
            let nu = local.add(&local.mul(&reduced, &uinv), &local.neg(&one));
            let minus_nu = local.neg(&nu);
            let mut series = one.clone();
            let mut power = one;
            for _ in 0..e {
                power = local.mul(&power, &minus_nu);
                series = local.add(&series, &power);
            }
            parts.push((q, local.mul(&uinv, &series)));
        }
        let mut out: Vec<(Monomial, Elem)> = Vec::new();
        for (q, part) in parts {
            let cofactor = n / q;
            let lift = (cofactor as u128 * mod_inv(cofactor % q, q).unwrap() as u128 % n as u128) as u64;
            for (m, c) in part.terms {
                let Elem::Res(v) = c else { unreachable!() };
                out.push((m, Elem::Res((v as u128 * lift as u128 % n as u128) as u64)));
            }
        }
        Ok(self.normalize(out))
    }

    fn neg(&self, a: &Poly) -> Poly {
        Poly {
            terms: a.terms.iter().map(|(m, c)| (m.clone(), self.base.neg(c))).collect(),
        }
    }

    fn div_exact(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        let Some((lb_m, lb_c)) = b.leading() else {
            return Err(Error::NotDivisible);
        };
        if a.is_zero() {
            return Ok(Poly::default());
        }
        // Quotient exponents are confined to a box: per variable, the lowest
        // and highest degrees subtract in a domain.
        let nv = self.variables.len();
        let span = |p: &Poly, v: usize| {
            let it = p.terms.iter().map(|(m, _)| m[v]);
            (it.clone().min().unwrap(), it.max().unwrap())
        };
        let bounds: Vec<(i32, i32)> = (0..nv)
            .map(|v| {
                let (alo, ahi) = span(a, v);
                let (blo, bhi) = span(b, v);
                (alo - blo, ahi - bhi)
            })
            .collect();
        let mut r = a.clone();
        let mut q: Vec<(Monomial, Elem)> = Vec::new();
        while let Some((rm, rc)) = r.leading().cloned() {
            let m = sub_mono(&rm, lb_m);
            if !self.allowed(&m) || m.iter().zip(&bounds).any(|(e, (lo, hi))| e < lo || e > hi) {
                return Err(Error::NotDivisible);
            }
            let c = self.base.div_exact(&rc, lb_c)?;
            let t = Poly {
                terms: vec![(m.clone(), c.clone())],
            };
            r = self.add(&r, &self.neg(&self.mul(&t, b)));
            q.push((m, c));
        }
        Ok(self.normalize(q))
    }
}

struct Parser<'a> {
    ring: &'a Ring,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(mut self) -> Result<Elem> {
        let r = self.ring;
        let mut acc = r.zero();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                None if first => return Err(self.err("empty expression")),
                None => break,
                Some(_) if first => 1,
                Some(_) => return Err(self.err("expected `+` or `-`")),
            };
            first = false;
            let t = self.term()?;
            acc = if sign < 0 { r.sub(&acc, &t) } else { r.add(&acc, &t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Elem> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = self.ring.mul(&acc, &f);
        }
        Ok(acc)
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<BigInt>().map_err(|_| self.err("bad integer"))
    }

    fn factor(&mut self) -> Result<Elem> {
        let r = self.ring;
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let at = self.pos;
                let num = self.digits()?;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let den = self.digits()?;
                    if den.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    return r
                        .div_exact(&r.from_bigint(&num), &r.from_bigint(&den))
                        .map_err(|_| Error::Parse {
                            position: at,
                            message: "fraction not representable in this ring".into(),
                        });
                }
                Ok(r.from_bigint(&num))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v = r.var(name).map_err(|_| Error::Parse {
                    position: start,
                    message: format!("unknown variable `{name}`"),
                })?;
                if self.peek() != Some(b'^') {
                    return Ok(v);
                }
                self.pos += 1;
                let neg = if self.peek() == Some(b'-') {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                let at = self.pos;
                let e = self
                    .digits()?
                    .to_u32()
                    .filter(|e| *e <= i32::MAX as u32)
                    .ok_or_else(|| self.err("exponent too large"))?;
                let base = if neg {
                    r.inv(&v).map_err(|_| Error::Parse {
                        position: at,
                        message: format!("`{name}` is not inverted in this ring"),
                    })?
                } else {
                    v
                };
                Ok(r.pow(&base, e))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qt(vars: &[&str]) -> Ring {
        Ring::polynomial(&Ring::Rationals, vars).unwrap()
    }

    #[test]
    fn unit_tests_per_ring() {
        assert!(Ring::Rationals.is_unit(&Ring::Rationals.int(2)));
        assert!(!Ring::Integers.is_unit(&Ring::Integers.int(2)));
        let r = qt(&["t"]).invert_variable("t").unwrap();
        assert!(r.is_unit(&r.var("t").unwrap()));
        let z6 = Ring::modular(6).unwrap();
        assert!(z6.is_unit(&z6.int(5)));
        assert!(!z6.is_unit(&z6.int(4)));
    }

    #[test]
    fn invert_variable_is_idempotent() {
        let r = qt(&["t0", "t1"]);
        let l = r.invert_variable("t0").unwrap();
        assert_eq!(l.invert_variable("t0").unwrap(), l);
        let t = l.var("t0").unwrap();
        assert!(l.is_one(&l.mul(&t, &l.inv(&t).unwrap())));
        assert_eq!(r.invert_variable("s"), Err(Error::UnknownVariable("s".into())));
    }

    #[test]
    fn polynomial_over_polynomial_is_flat() {
        let r = Ring::polynomial(&qt(&["a"]), &["b"]).unwrap();
        assert_eq!(r.variables(), &["a".to_string(), "b".to_string()]);
        assert_eq!(r.scalar_ring(), &Ring::Rationals);
    }

    #[test]
    fn modular_polynomial_units_use_crt() {
        // 1 + 2t is a unit in (ℤ/4)[t]: (1+2t)² = 1.
        let r = Ring::polynomial(&Ring::modular(4).unwrap(), &["t"]).unwrap();
        let x = r.parse("1+2*t").unwrap();
        assert!(r.is_unit(&x));
        assert!(r.is_one(&r.mul(&x, &r.inv(&x).unwrap())));
        // 3 + 3t over ℤ/12 is not: modulo 3 it vanishes.
        let r = Ring::polynomial(&Ring::modular(12).unwrap(), &["t"]).unwrap();
        assert!(!r.is_unit(&r.parse("3+3*t").unwrap()));
        let y = r.parse("5+6*t").unwrap();
        assert!(r.is_one(&r.mul(&y, &r.inv(&y).unwrap())));
    }

    #[test]
    fn exact_division() {
        let r = Ring::polynomial(&Ring::Integers, &["x", "y"]).unwrap();
        let a = r.parse("x^2-y^2").unwrap();
        let b = r.parse("x+y").unwrap();
        assert_eq!(r.div_exact(&a, &b).unwrap(), r.parse("x-y").unwrap());
        assert_eq!(r.div_exact(&b, &a), Err(Error::NotDivisible));
        assert_eq!(r.div_exact(&r.parse("2*x").unwrap(), &r.int(4)), Err(Error::NotDivisible));
        let l = r.invert_variable("y").unwrap();
        let q = l.div_exact(&l.parse("x+y^-1").unwrap(), &l.parse("x*y+1").unwrap()).unwrap();
        assert_eq!(l.format(&q), "y^-1");
    }

    #[test]
    fn format_parse_round_trip() {
        let r = qt(&["t0", "t1"]).invert_variable("t1").unwrap();
        for s in ["0", "-t0", "t0^2*t1^-1-3/2*t1+7", "-2*t0*t1", "1/3"] {
            let x = r.parse(s).unwrap();
            assert_eq!(r.format(&x), s);
        }
        assert_eq!(r.format(&r.parse(" t1 * t0 - t0*t1 ").unwrap()), "0");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let r = qt(&["t"]);
        assert!(matches!(r.parse("t+*2"), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(r.parse("2*s"), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(r.parse("t^-1"), Err(Error::Parse { position: 3, .. })));
        assert!(matches!(Ring::Integers.parse("1/2"), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(r.parse(""), Err(Error::Parse { position: 0, .. })));
    }

    #[test]
    fn substitution_and_embedding() {
        let r = qt(&["a", "b"]);
        let x = r.parse("a*b+a-1").unwrap();
        let v = [Ring::Rationals.int(2), Ring::Rationals.int(3)];
        assert_eq!(r.substitute(&x, &v, &Ring::Rationals).unwrap(), Ring::Rationals.int(7));
        let f7 = Ring::prime_field(7).unwrap();
        assert_eq!(
            f7.embed(&Ring::Rationals.fraction(1, 2).unwrap(), &Ring::Rationals).unwrap(),
            Elem::Res(4)
        );
        let big = Ring::polynomial(&r, &["c"]).unwrap();
        let y = big.embed(&x, &r).unwrap();
        assert_eq!(big.format(&y), "a*b+a-1");
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(Ring::prime_field(9).is_err());
        assert!(Ring::modular(1).is_err());
        assert!(Ring::polynomial(&Ring::Rationals, &["t", "t"]).is_err());
        assert!(Ring::polynomial(&Ring::Rationals, &["1t"]).is_err());
    }
}
