#![allow(dead_code)]

use formkit_core::forms::{hyperbolic, Flavor};
use formkit_core::{Elem, Matrix, Ring};
use proptest::prelude::*;

pub fn z() -> Ring {
    Ring::Integers
}

pub fn q() -> Ring {
    Ring::Rationals
}

pub fn f(p: u64) -> Ring {
    Ring::prime_field(p).unwrap()
}

/// ℤ, ℚ, F₅ and ℤ/12.
pub fn scalar_rings() -> Vec<Ring> {
    vec![z(), q(), f(5), Ring::modular(12).unwrap()]
}

/// An element built from two small integers: a/(|b|+1) over ℚ, a elsewhere.
pub fn elem(ring: &Ring, a: i64, b: i64) -> Elem {
    match ring {
        Ring::Rationals => ring.fraction(a, b.abs() + 1).unwrap(),
        _ => ring.int(a),
    }
}

pub fn matrix(ring: &Ring, n: usize, vals: &[(i64, i64)]) -> Matrix {
    Matrix::from_fn(ring, n, n, |i, j| {
        let (a, b) = vals[(i * n + j) % vals.len().max(1)];
        elem(ring, a, b)
    })
}

pub type Ops = Vec<(usize, usize, i64)>;

pub fn ops() -> impl Strategy<Value = Ops> {
    prop::collection::vec((0usize..8, 0usize..8, -3i64..=3), 0..14)
}

pub fn entries(len: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-9i64..=9, -4i64..=4), len..=len)
}

/// Product of elementary matrices I + c·e_ij, a unit over every ring.
pub fn elementary_product(ring: &Ring, n: usize, ops: &Ops) -> Matrix {
    let mut m = Matrix::identity(ring, n);
    for &(i, j, c) in ops {
        let (i, j) = (i % n, j % n);
        if i == j || c == 0 {
            continue;
        }
        let mut e = Matrix::identity(ring, n);
        e.set(i, j, ring.int(c));
        m = m.mul(&e).unwrap();
    }
    m
}

/// Pᵀ·J·P for an elementary product P: alternating and unimodular.
pub fn alternating_unimodular(ring: &Ring, planes: usize, ops: &Ops) -> Matrix {
    let p = elementary_product(ring, 2 * planes, ops);
    p.congruence(hyperbolic(ring, Flavor::Alternating, planes).gram()).unwrap()
}
