mod common;

use common::*;
use formkit_core::{Elem, Matrix, Ring};
use proptest::prelude::*;

fn all_rings() -> Vec<Ring> {
    let mut rings = scalar_rings();
    rings.push(Ring::polynomial(&z(), &["t"]).unwrap());
    rings
}

fn laurent() -> Ring {
    Ring::polynomial(&q(), &["t"]).unwrap().invert_variable("t").unwrap()
}

fn poly_elem(ring: &Ring, coeffs: &[(i64, i64)], shift: i64) -> Elem {
    let t = ring.var("t").unwrap();
    let mut acc = ring.zero();
    for (k, (a, b)) in coeffs.iter().enumerate() {
        let e = k as i64 - shift;
        let power = if e >= 0 {
            ring.pow(&t, e as u32)
        } else {
            ring.pow(&ring.inv(&t).unwrap(), (-e) as u32)
        };
        let c = ring.embed(&elem(&q(), *a, *b), &q()).unwrap();
        acc = ring.add(&acc, &ring.mul(&c, &power));
    }
    acc
}

proptest! {
    #[test]
    fn determinant_is_multiplicative(n in 1usize..=6, a in entries(36), b in entries(36), pick in 0usize..5) {
        let ring = &all_rings()[pick];
        let n = if matches!(ring, Ring::Polynomial(_)) { n.min(4) } else { n };
        let (ma, mb) = (matrix(ring, n, &a), matrix(ring, n, &b));
        let lhs = ma.mul(&mb).unwrap().determinant().unwrap();
        let rhs = ring.mul(&ma.determinant().unwrap(), &mb.determinant().unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_is_exact_when_it_exists(n in 1usize..=5, a in entries(25), ops in ops(), pick in 0usize..5) {
        let ring = &all_rings()[pick];
        for m in [matrix(ring, n, &a), elementary_product(ring, n, &ops)] {
            if let Ok(inv) = m.inverse_if_unit() {
                prop_assert!(inv.mul(&m).unwrap().is_identity());
                prop_assert!(m.mul(&inv).unwrap().is_identity());
            }
        }
        prop_assert!(elementary_product(ring, n, &ops).inverse_if_unit().is_ok());
    }

    #[test]
    fn laurent_embedding_is_a_ring_map(x in entries(4), y in entries(3)) {
        let p = Ring::polynomial(&q(), &["t"]).unwrap();
        let l = laurent();
        let (a, b) = (poly_elem(&p, &x, 0), poly_elem(&p, &y, 0));
        let e = |v: &Elem| l.embed(v, &p).unwrap();
        prop_assert_eq!(e(&p.add(&a, &b)), l.add(&e(&a), &e(&b)));
        prop_assert_eq!(e(&p.mul(&a, &b)), l.mul(&e(&a), &e(&b)));
    }

    #[test]
    fn canonical_text_round_trips(x in entries(5), shift in 0i64..3, pick in 0usize..3) {
        let ring = [laurent(), Ring::polynomial(&q(), &["t"]).unwrap(), laurent()][pick].clone();
        let shift = if pick == 1 { 0 } else { shift };
        let v = poly_elem(&ring, &x, shift);
        prop_assert_eq!(ring.parse(&ring.format(&v)).unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn self_difference_is_the_stored_zero(a in -50i64..50, b in -9i64..9, x in entries(4), shift in 0i64..3) {
        let mut rings = scalar_rings();
        rings.push(Ring::polynomial(&q(), &["t"]).unwrap());
        rings.push(laurent());
        for ring in &rings {
            let v = match ring {
                Ring::Polynomial(p) if p.is_localized() => poly_elem(ring, &x, shift),
                Ring::Polynomial(_) => poly_elem(ring, &x, 0),
                _ => elem(ring, a, b),
            };
            let d = ring.sub(&v, &v);
            prop_assert!(ring.is_zero(&d));
            prop_assert_eq!(d, ring.zero());
        }
    }
}

#[test]
fn nonunit_matrices_are_refused() {
    let m = Matrix::from_ints(&z(), &[&[2, 0], &[0, 1]]);
    assert!(m.inverse_if_unit().is_err());
    let r = Ring::modular(12).unwrap();
    let m = Matrix::from_ints(&r, &[&[3, 0], &[0, 1]]);
    assert!(m.inverse_if_unit().is_err());
}
