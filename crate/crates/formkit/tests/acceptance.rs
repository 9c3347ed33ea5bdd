//! Acceptance run: one PASS/FAIL line per criterion, with pinned sample
//! counts, seeds and runtime limits.

use std::time::{Duration, Instant};

use formkit::format::rows_of;
use formkit::random::{alternating_unimodular, membership_sample, stream, Stream};
use formkit_core::forms::{
    embed_into_hyperbolic, hyperbolic, orthogonal_sum, standard_j, tensor_hyperbolic_isometry, BilinearSpace, Flavor,
};
use formkit_core::grassmann::{
    distinguished_hgr, distinguished_hp1, distinguished_rgr, ga_action_verify, structure_subspace_hgr,
    structure_subspace_rgr, StructureSubspace, Subspace,
};
use formkit_core::gw::{ksp0_class, GwClass};
use formkit_core::koszul::{
    borel_class_chart, compare_borel_thom, contracting_homotopy, dual_shifted, koszul_complex, theta_form,
    thom_class_trivial_line,
};
use formkit_core::sp::{block_swap, factor_into_transvections, homotopy_witness, product, Transvection};
use formkit_core::{Matrix, Ring};
use rand::Rng as _;

const SEED: u64 = 20_240_501;

struct Outcome {
    passed: bool,
    detail: String,
}

fn criterion(id: u32, title: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let in_time = limit.map_or(true, |l| elapsed < l);
    let passed = out.passed && in_time;
    let timing = match limit {
        Some(l) => format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.2}s", elapsed.as_secs_f64()),
    };
    println!(
        "{} [{id}] {title}: {} ({timing})",
        if passed { "PASS" } else { "FAIL" },
        out.detail
    );
    passed
}

fn rings() -> [Ring; 3] {
    [Ring::Integers, Ring::Rationals, Ring::prime_field(5).unwrap()]
}

/// [[0, −I],[I, 0]] of rank 2m, built entry by entry.
fn block_target(ring: &Ring, m: usize) -> Matrix {
    Matrix::from_fn(ring, 2 * m, 2 * m, |i, j| {
        if i < m && j == i + m {
            ring.int(-1)
        } else if i >= m && j + m == i {
            ring.one()
        } else {
            ring.zero()
        }
    })
}

fn hyperbolic_embedding() -> Outcome {
    let mut rng = stream(SEED);
    let (mut ok, mut total) = (0, 0);
    for ring in rings() {
        for k in 0..200 {
            let planes = k % 4 + 1;
            let s = alternating_unimodular(&ring, planes, &mut rng);
            total += 1;
            let Ok(iso) = embed_into_hyperbolic(&s) else { continue };
            let w = iso.witness();
            let source = Matrix::block_diag(&ring, &[s.gram(), &s.gram().neg()]).unwrap();
            let pulled = w.transpose().mul(&source).unwrap().mul(w).unwrap();
            if pulled == block_target(&ring, 2 * planes) && ring.is_unit(&w.determinant().unwrap()) {
                ok += 1;
            }
        }
    }
    Outcome {
        passed: ok == total,
        detail: format!("{ok}/{total} certified over Z, Q, F5 at ranks 2 to 8"),
    }
}

fn json_rows(m: &Matrix) -> String {
    serde_json::to_string(&rows_of(m)).unwrap()
}

fn golden_diagrams() -> Outcome {
    let q = Ring::Rationals;
    let mut misses = Vec::new();
    let (c, f) = thom_class_trivial_line(&q).unwrap();
    let dual = dual_shifted(&c, 1);
    let thom = [
        (json_rows(&c.d(1)), r#"[["t"]]"#),
        (json_rows(&dual.d(1)), r#"[["-t"]]"#),
        (json_rows(f.component(1)), r#"[["-1"]]"#),
        (json_rows(f.component(0)), r#"[["1"]]"#),
    ];
    let b = borel_class_chart(&q).unwrap();
    let borel = [
        (json_rows(&b.complex.d(2)), r#"[["-t1"],["t0"]]"#),
        (json_rows(&b.complex.d(1)), r#"[["t0","t1"]]"#),
        (json_rows(&b.bottom[0]), r#"[["-t1"],["-t0"]]"#),
        (json_rows(&b.bottom[1]), r#"[["-t0","t1"]]"#),
        (json_rows(&b.verticals[0]), r#"[["-1"]]"#),
        (json_rows(&b.verticals[1]), r#"[["-1","0"],["0","1"]]"#),
        (json_rows(&b.verticals[2]), r#"[["1"]]"#),
    ];
    for (k, (got, want)) in thom.iter().chain(&borel).enumerate() {
        if got != want {
            misses.push(format!("entry {k}: {got} vs {want}"));
        }
    }
    let comparison = compare_borel_thom(&q).and_then(|iso| {
        let (diffs, forms) = iso.transport()?;
        Ok(diffs == iso.target.0.differentials() && forms == iso.target.1.components())
    });
    let compared = comparison == Ok(true);
    Outcome {
        passed: misses.is_empty() && compared,
        detail: if misses.is_empty() {
            format!("Thom and Borel diagrams match; th ⊠ th comparison verified: {compared}")
        } else {
            misses.join("; ")
        },
    }
}

fn koszul_suite() -> Outcome {
    let mut checks = 0;
    let mut failures = Vec::new();
    for base in [Ring::Rationals, Ring::prime_field(7).unwrap()] {
        for n in 0..=4usize {
            let c = koszul_complex(n, &base).unwrap();
            for k in 2..=n as i64 {
                checks += 1;
                if !c.d(k - 1).mul(&c.d(k)).unwrap().is_zero() {
                    failures.push(format!("d∘d at n={n} k={k}"));
                }
            }
            checks += 1;
            let sign = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
            match theta_form(n, &base) {
                Ok((c, f)) => {
                    let dual = dual_shifted(&c, n as i64);
                    let r = c.ring();
                    let good = f.epsilon() == sign
                        && (0..=n as i64).all(|k| {
                            let phi = f.component(k);
                            r.is_unit(&phi.determinant().unwrap())
                                && f.component(n as i64 - k).transpose() == phi.scale(&r.int(sign))
                                && (k == 0
                                    || dual.d(k).mul(phi).unwrap() == f.component(k - 1).mul(&c.d(k)).unwrap())
                        });
                    if !good {
                        failures.push(format!("theta at n={n}"));
                    }
                }
                Err(e) => failures.push(format!("theta at n={n}: {e}")),
            }
            for i in 1..=n {
                checks += 1;
                match contracting_homotopy(n, i, &base) {
                    Ok(h) => {
                        let c = h.complex();
                        let hk = |k: i64| {
                            if k < 0 || k > n as i64 {
                                Matrix::zeros(c.ring(), c.rank(k + 1), c.rank(k))
                            } else {
                                h.components()[k as usize].clone()
                            }
                        };
                        let identity = (0..=n as i64).all(|k| {
                            let dh = c.d(k + 1).mul(&hk(k)).unwrap();
                            let hd = hk(k - 1).mul(&c.d(k)).unwrap();
                            dh.add(&hd).unwrap().is_identity()
                        });
                        if !identity {
                            failures.push(format!("dh+hd at n={n} i={i}"));
                        }
                    }
                    Err(e) => failures.push(format!("contraction n={n} i={i}: {e}")),
                }
            }
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checks} checks over Q and F7 for n ≤ 4")
        } else {
            failures.join("; ")
        },
    }
}

fn random_symplectic(ring: &Ring, planes: usize, rng: &mut Stream) -> Matrix {
    let size = 2 * planes;
    let factors: Vec<Transvection> = (0..4)
        .map(|_| {
            let v: Vec<i64> = (0..size).map(|_| rng.gen_range(-2..=2)).collect();
            Transvection::from_ints(ring, &v, rng.gen_range(-2..=2))
        })
        .collect();
    product(ring, size, &factors).unwrap()
}

fn symplectic_factorization() -> Outcome {
    let mut failures = Vec::new();
    let mut swaps = 0;
    for ring in rings() {
        for n in 1..=3 {
            for m in 1..=4 - n {
                swaps += 1;
                let swap = block_swap(&ring, n, m);
                let size = 2 * (n + m);
                let factors = match factor_into_transvections(&swap) {
                    Ok(f) => f,
                    Err(e) => {
                        failures.push(format!("factor {n}+{m}: {e}"));
                        continue;
                    }
                };
                if product(&ring, size, &factors).unwrap() != *swap.matrix() {
                    failures.push(format!("product {n}+{m}"));
                }
                let h = homotopy_witness(&ring, size, &factors).unwrap();
                let j = standard_j(&h.ring, n + m);
                for (f, path) in factors.iter().zip(&h.paths) {
                    let symplectic = path.transpose().mul(&j).unwrap().mul(path).unwrap() == j;
                    let at0 = path.specialize(&h.parameter, &ring.zero(), &ring).unwrap().is_identity();
                    let at1 = path.specialize(&h.parameter, &ring.one(), &ring).unwrap() == f.matrix(&ring);
                    if !(symplectic && at0 && at1) {
                        failures.push(format!("path in {n}+{m}"));
                    }
                }
            }
        }
    }
    let mut rng = stream(SEED + 4);
    let mut pairs = 0;
    for ring in rings() {
        for _ in 0..50 {
            let (n, m) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
            let a = random_symplectic(&ring, n, &mut rng);
            let b = random_symplectic(&ring, m, &mut rng);
            let p = block_swap(&ring, n, m).into_matrix();
            let lhs = p
                .mul(&Matrix::block_diag(&ring, &[&b, &a]).unwrap())
                .unwrap()
                .mul(&p.inverse_if_unit().unwrap())
                .unwrap();
            pairs += 1;
            if lhs != Matrix::block_diag(&ring, &[&a, &b]).unwrap() {
                failures.push("conjugation".into());
            }
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{swaps} block swaps factored with verified paths; {pairs} conjugation pairs")
        } else {
            failures.join("; ")
        },
    }
}

fn ksp0_structure() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = stream(SEED + 5);
    let mut hom = 0;
    let mut grid = 0;
    for ring in [Ring::prime_field(5).unwrap(), Ring::Rationals] {
        for _ in 0..100 {
            let (i, j) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
            let a = alternating_unimodular(&ring, rng.gen_range(1..=2), &mut rng);
            let b = alternating_unimodular(&ring, rng.gen_range(1..=2), &mut rng);
            let sum = orthogonal_sum(&a, &b).unwrap();
            let lhs = ksp0_class(i, &a).unwrap().add(&ksp0_class(j, &b).unwrap()).unwrap();
            let rhs = ksp0_class(i + j, &sum).unwrap();
            hom += 1;
            if lhs.certified_equal(&rhs) != Ok(true) {
                failures.push(format!("homomorphism at ({i}, {j})"));
            }
        }
        let classes: Vec<(i64, usize, GwClass)> = (-3..=3)
            .flat_map(|i| (1..=4).map(move |planes| (i, planes)))
            .map(|(i, planes)| {
                let a = alternating_unimodular(&ring, planes, &mut rng);
                (i, planes, ksp0_class(i, &a).unwrap())
            })
            .collect();
        for (i, planes, c) in &classes {
            grid += 1;
            let target = GwClass::scale_hyperbolic(&ring, Flavor::Alternating, *i);
            if c.hyperbolic_multiple() != Some(*i) || c.certified_equal(&target) != Ok(true) {
                failures.push(format!("surjectivity at i={i} rank {}", 2 * planes));
            }
        }
        for (i, _, a) in &classes {
            for (j, _, b) in &classes {
                if a.certified_equal(b) != Ok(i == j) {
                    failures.push(format!("injectivity at ({i}, {j})"));
                }
            }
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{hom} homomorphism pairs; {grid} classes with i in [-3, 3] and ranks 2 to 8 compared pairwise")
        } else {
            failures.join("; ")
        },
    }
}

fn ga_action() -> Outcome {
    match ga_action_verify(20) {
        Ok(r) => Outcome {
            passed: r.passed() && r.samples.len() == 20,
            detail: format!(
                "unit law {}, action law {}, {} freeness samples",
                r.unit_law,
                r.action_law,
                r.samples.len()
            ),
        },
        Err(e) => Outcome {
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn certified(s: &StructureSubspace) -> bool {
    s.permutation_certificate()
        .is_ok_and(|c| c.lifted_paths.len() == c.factors.len() && c.permutation.len() == s.slots.len())
}

fn structure_maps() -> Outcome {
    let q = Ring::Rationals;
    let mut rng = stream(SEED + 7);
    let mut failures = Vec::new();
    let mut samples = 0;
    let x0 = distinguished_hp1(&q).unwrap();
    type Build = fn(usize, i64, &Subspace, &Subspace) -> formkit_core::Result<StructureSubspace>;
    let cases: [(&str, usize, Vec<i64>, Flavor, usize, Flavor, Build, Subspace); 2] = [
        ("hgr", 1, vec![-1, 0, 1], Flavor::Alternating, 16, Flavor::Symmetric, structure_subspace_hgr, distinguished_hgr(&q, 1).unwrap()),
        ("rgr", 2, vec![-2, 0, 2], Flavor::Symmetric, 16, Flavor::Alternating, structure_subspace_rgr, distinguished_rgr(&q, 2).unwrap()),
    ];
    for (name, n, indices, flavor, rank, want, build, point) in cases {
        let r = if flavor == Flavor::Alternating { 2 * n } else { n };
        for &i in &indices {
            for _ in 0..20 {
                let u = membership_sample(&q, flavor, r, 2 * r, &mut rng);
                let x = membership_sample(&q, Flavor::Alternating, 2, 4, &mut rng);
                samples += 1;
                match build(n, i, &u, &x) {
                    Ok(s) if s.rank() == rank && s.flavor() == want && s.is_unimodular() => {}
                    Ok(s) => failures.push(format!("{name} i={i}: rank {} flavor {:?}", s.rank(), s.flavor())),
                    Err(e) => failures.push(format!("{name} i={i}: {e}")),
                }
            }
            let s = build(n, i, &point, &x0).unwrap();
            if i == 0 && !s.is_leading_half().unwrap() {
                failures.push(format!("{name} distinguished point is not the leading half"));
            }
            if !certified(&s) {
                failures.push(format!("{name} i={i}: no permutation certificate"));
            }
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{samples} samples; distinguished points certified for every admissible i")
        } else {
            failures.join("; ")
        },
    }
}

fn tensor_identity() -> Outcome {
    let mut ok = 0;
    let mut total = 0;
    for ring in rings() {
        for n in 1..=2 {
            for m in 1..=2 {
                total += 1;
                let a = hyperbolic(&ring, Flavor::Alternating, n);
                let b = hyperbolic(&ring, Flavor::Alternating, m);
                let Ok(iso) = tensor_hyperbolic_isometry(&ring, Flavor::Alternating, n, Flavor::Alternating, m) else {
                    continue;
                };
                let w = iso.witness();
                let source = a.gram().kron(b.gram()).unwrap();
                let target = hyperbolic(&ring, Flavor::Symmetric, 2 * n * m);
                let pulled = BilinearSpace::new(Flavor::Symmetric, w.transpose().mul(&source).unwrap().mul(w).unwrap());
                if pulled.as_ref() == Ok(&target) && ring.is_unit(&w.determinant().unwrap()) {
                    ok += 1;
                }
            }
        }
    }
    Outcome {
        passed: ok == total,
        detail: format!("{ok}/{total} isometries H₋ⁿ ⊗ H₋ᵐ ≅ H₊^(2nm) over Z, Q, F5"),
    }
}

#[test]
fn acceptance() {
    let results = [
        criterion(1, "hyperbolic embedding", Some(Duration::from_secs(30)), hyperbolic_embedding),
        criterion(2, "golden diagrams", None, golden_diagrams),
        criterion(3, "Koszul suite", Some(Duration::from_secs(10)), koszul_suite),
        criterion(4, "symplectic factorization", None, symplectic_factorization),
        criterion(5, "KSp0 structure", None, ksp0_structure),
        criterion(6, "Ga-action", None, ga_action),
        criterion(7, "structure maps", Some(Duration::from_secs(120)), structure_maps),
        criterion(8, "tensor identity", None, tensor_identity),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    assert_eq!(passed, results.len());
}
