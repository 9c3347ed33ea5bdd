mod common;

use common::*;
use formkit_core::forms::{orthogonal_sum, BilinearSpace, Flavor};
use formkit_core::gw::{diagonalize_symmetric, ksp0_class, witt_decompose, GwClass};
use formkit_core::{Elem, Matrix, Ring};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn alt_space(ring: &Ring, planes: usize, o: &Ops) -> BilinearSpace {
    BilinearSpace::new(Flavor::Alternating, alternating_unimodular(ring, planes, o)).unwrap()
}

fn symmetric(ring: &Ring, n: usize, vals: &[(i64, i64)]) -> Matrix {
    Matrix::from_fn(ring, n, n, |i, j| {
        let (a, b) = vals[(i.min(j) * n + i.max(j)) % vals.len()];
        elem(ring, a, b)
    })
}

// Euler's criterion by repeated multiplication.
fn legendre(a: u64, p: u64) -> i64 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let mut acc = 1u64;
    for _ in 0..(p - 1) / 2 {
        acc = acc * a % p;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

// Square-free kernel of a nonzero integer, sign kept.
fn squarefree(mut n: i64) -> i64 {
    let sign = n.signum();
    n = n.abs();
    let mut out = 1;
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e % 2 == 1 {
            out *= d;
        }
        d += 1;
    }
    sign * out * n
}

fn square_class(ring: &Ring, x: &Elem) -> i64 {
    match (ring, x) {
        (Ring::PrimeField(p), Elem::Res(v)) => legendre(*v, *p),
        (Ring::Rationals, Elem::Rat(r)) => {
            let prod: BigInt = r.numer() * r.denom();
            squarefree(prod.to_i64().unwrap())
        }
        _ => unreachable!(),
    }
}

fn enumerate_anisotropic(s: &BilinearSpace, p: u64) -> bool {
    let ring = s.ring();
    let r = s.rank();
    let total = (p as usize).pow(r as u32);
    (1..total).all(|code| {
        let v: Vec<Elem> = (0..r)
            .map(|i| ring.int(((code / (p as usize).pow(i as u32)) % p as usize) as i64))
            .collect();
        !ring.is_zero(&s.pair(&v, &v))
    })
}

#[test]
fn ksp0_is_injective_and_surjective_on_the_tested_range() {
    for ring in [f(5), q()] {
        let spaces: Vec<BilinearSpace> = (1..=4)
            .map(|planes| alt_space(&ring, planes, &vec![(0, 1, 2), (1, 2, -1), (3, 0, 1), (2, 5, 1)]))
            .collect();
        let mut classes = Vec::new();
        for i in -3..=3 {
            for a in &spaces {
                let c = ksp0_class(i, a).unwrap();
                assert_eq!(c.hyperbolic_multiple(), Some(i), "surjective onto k·[H₋]");
                classes.push((i, c));
            }
        }
        for (i, x) in &classes {
            for (j, y) in &classes {
                assert_eq!(x.certified_equal(y).unwrap(), i == j);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ksp0_is_additive(pick in 0usize..2, i in -3i64..=3, j in -3i64..=3, pa in 1usize..=2, pb in 1usize..=2, o1 in ops(), o2 in ops()) {
        let ring = &[f(5), q()][pick];
        let a = alt_space(ring, pa, &o1);
        let b = alt_space(ring, pb, &o2);
        let lhs = ksp0_class(i, &a).unwrap().add(&ksp0_class(j, &b).unwrap()).unwrap();
        let rhs = ksp0_class(i + j, &orthogonal_sum(&a, &b).unwrap()).unwrap();
        prop_assert!(lhs.certified_equal(&rhs).unwrap());
    }

    #[test]
    fn witt_ranks_add_up_and_anisotropic_parts_are_small(pi in 0usize..3, n in 1usize..=6, vals in entries(36)) {
        let p = [3u64, 5, 7][pi];
        let ring = f(p);
        let g = symmetric(&ring, n, &vals);
        let s = BilinearSpace::new(Flavor::Symmetric, g).unwrap();
        prop_assume!(s.is_unimodular());
        let w = witt_decompose(&s).unwrap();
        prop_assert_eq!(w.anisotropic.rank() + 2 * w.hyperbolic_count, n);
        prop_assert!(w.anisotropic.rank() <= 2);
        prop_assert!(enumerate_anisotropic(&w.anisotropic, p));
    }

    #[test]
    fn diagonalization_keeps_the_discriminant_class(pick in 0usize..3, n in 1usize..=5, vals in entries(25)) {
        let ring = &[q(), f(5), f(7)][pick];
        let g = symmetric(ring, n, &vals);
        let det = g.determinant().unwrap();
        prop_assume!(!ring.is_zero(&det));
        let s = BilinearSpace::new(Flavor::Symmetric, g).unwrap();
        let d = diagonalize_symmetric(&s).unwrap();
        let tgt = d.target().gram();
        prop_assert!((0..n).all(|i| (0..n).all(|j| i == j || ring.is_zero(tgt.get(i, j)))));
        let dd = tgt.determinant().unwrap();
        prop_assert_eq!(square_class(ring, &det), square_class(ring, &dd));
    }
}

#[test]
fn gw_class_arithmetic_over_q() {
    let ring = q();
    let a = BilinearSpace::diagonal(&ring, &[ring.int(1), ring.int(-1)]);
    let b = BilinearSpace::diagonal(&ring, &[ring.int(3)]);
    let x = GwClass::of(&a).unwrap();
    let y = GwClass::of(&b).unwrap();
    let sum = x.add(&y).unwrap();
    assert_eq!(sum.rank(), 3);
    assert!(sum.sub(&y).unwrap().certified_equal(&x).unwrap());
}
