//! One function per subcommand. Each returns the check records of its
//! report; errors mean the input was unusable.

use formkit_core::forms::{
    embed_into_hyperbolic, hyperbolic, standard_j, standardize_symplectic, tensor_hyperbolic_isometry, tensor_product,
    BilinearSpace, Flavor,
};
use formkit_core::grassmann::{
    distinguished_hgr, distinguished_hp1, distinguished_rgr, ga_action_verify, stabilization_check,
    structure_subspace_hgr, structure_subspace_rgr, StructureSubspace, Subspace,
};
use formkit_core::gw::{ksp0_class, stable_isometry_test, witt_decompose, GwClass};
use formkit_core::koszul::{
    borel_class_chart, compare_borel_thom, contracting_homotopy, dual_shifted, epsilon, theta_form,
    thom_class_trivial_line,
};
use formkit_core::sp::{block_swap, factor_into_transvections, homotopy_witness, product, SymplecticMatrix};
use formkit_core::{Matrix, Ring};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::format::{
    rows_of, ComplexDoc, DualityDoc, FormatError, GwDoc, IsometryDoc, MatrixDoc, SpaceDoc, TransvectionDoc,
};
use crate::random::{alternating_unimodular, membership_sample, stream};
use crate::report::{Check, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    FormEmbed,
    FormTensor,
    FormStandardize,
    GwKsp0,
    GwWitt,
    SpSwapFactor,
    SpHomotopy,
    KoszulVerify,
    KoszulThom,
    KoszulBorel,
    GrassGaCheck,
    GrassStructureCheck,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FormEmbed => "form embed",
            Command::FormTensor => "form tensor",
            Command::FormStandardize => "form standardize",
            Command::GwKsp0 => "gw ksp0",
            Command::GwWitt => "gw witt",
            Command::SpSwapFactor => "sp swap-factor",
            Command::SpHomotopy => "sp homotopy",
            Command::KoszulVerify => "koszul verify",
            Command::KoszulThom => "koszul thom",
            Command::KoszulBorel => "koszul borel",
            Command::GrassGaCheck => "grass ga-check",
            Command::GrassStructureCheck => "grass structure-check",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grassmannian {
    Hgr,
    Rgr,
}

#[derive(Clone, Debug)]
pub struct Params {
    pub ring: Ring,
    pub seed: u64,
    pub samples: usize,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub i: Option<i64>,
    pub max_stab: usize,
    pub grassmannian: Option<Grassmannian>,
}

impl Default for Params {
    fn default() -> Params {
        Params {
            ring: Ring::Rationals,
            seed: 0,
            samples: 20,
            n: None,
            m: None,
            i: None,
            max_stab: 4,
            grassmannian: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BadInput {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] formkit_core::Error),
    #[error("{0}")]
    Usage(String),
}

type Checks = Result<Vec<Check>, BadInput>;

/// Runs one subcommand. `doc` is the input document, if any.
pub fn run(cmd: Command, p: &Params, doc: Option<&str>) -> Report {
    let result = match cmd {
        Command::FormEmbed => form_embed(p, doc),
        Command::FormTensor => form_tensor(p, doc),
        Command::FormStandardize => form_standardize(p, doc),
        Command::GwKsp0 => gw_ksp0(p, doc),
        Command::GwWitt => gw_witt(p, doc),
        Command::SpSwapFactor => sp_swap_factor(p),
        Command::SpHomotopy => sp_homotopy(p, doc),
        Command::KoszulVerify => koszul_verify(p, doc),
        Command::KoszulThom => koszul_thom(p),
        Command::KoszulBorel => koszul_borel(p),
        Command::GrassGaCheck => grass_ga_check(p),
        Command::GrassStructureCheck => grass_structure_check(p),
        Command::Selftest => selftest(p),
    };
    match result {
        Ok(checks) => Report::from_checks(cmd.name(), p.seed, checks),
        Err(e) => Report::error(cmd.name(), p.seed, e.to_string()),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(doc: &str) -> Result<T, BadInput> {
    Ok(serde_json::from_str(doc).map_err(FormatError::from)?)
}

fn failed(name: impl Into<String>, e: impl std::fmt::Display) -> Check {
    Check::new(name, false, json!({ "error": e.to_string() }))
}

/// Serializes an isometry and loads it back through the checking loader.
fn reloaded(doc: IsometryDoc) -> bool {
    serde_json::to_string(&doc)
        .ok()
        .and_then(|s| serde_json::from_str::<IsometryDoc>(&s).ok())
        .is_some_and(|d| d.isometry().is_ok())
}

fn embed_check(name: String, s: &BilinearSpace, emit: bool) -> Check {
    match embed_into_hyperbolic(s) {
        Ok(iso) => {
            let doc = IsometryDoc::of(&iso);
            let data = if emit {
                serde_json::to_value(&doc).expect("serializable")
            } else {
                json!({ "rank": s.rank() })
            };
            Check::new(name, reloaded(doc), data)
        }
        Err(e) => failed(name, e),
    }
}

fn form_embed(p: &Params, doc: Option<&str>) -> Checks {
    if let Some(doc) = doc {
        let s = parse::<SpaceDoc>(doc)?.space()?;
        if s.flavor() != Flavor::Alternating || !s.is_unimodular() {
            return Err(BadInput::Usage("form embed needs an alternating unimodular space".into()));
        }
        return Ok(vec![embed_check("embedding S ⊥ −S into the hyperbolic space".into(), &s, true)]);
    }
    let mut rng = stream(p.seed);
    Ok((0..p.samples)
        .map(|k| {
            let planes = p.n.unwrap_or(k % 4 + 1);
            let s = alternating_unimodular(&p.ring, planes, &mut rng);
            embed_check(format!("sample {k} (rank {})", 2 * planes), &s, false)
        })
        .collect())
}

#[derive(Deserialize)]
struct PairDoc {
    left: SpaceDoc,
    right: SpaceDoc,
}

fn form_tensor(p: &Params, doc: Option<&str>) -> Checks {
    if let Some(doc) = doc {
        let pair: PairDoc = parse(doc)?;
        let t = tensor_product(&pair.left.space()?, &pair.right.space()?)?;
        return Ok(vec![Check::new(
            "tensor product",
            true,
            serde_json::to_value(SpaceDoc::of(&t)).expect("serializable"),
        )]);
    }
    let (nmax, mmax) = (p.n.unwrap_or(2), p.m.unwrap_or(2));
    let flavors = [Flavor::Alternating, Flavor::Symmetric];
    let mut checks = Vec::new();
    for n in 1..=nmax {
        for m in 1..=mmax {
            for fa in flavors {
                for fb in flavors {
                    let name = format!("H{}^{n} ⊗ H{}^{m} ≅ H{}^{}", sign(fa), sign(fb), sign(fa.tensor(fb)), 2 * n * m);
                    checks.push(match tensor_hyperbolic_isometry(&p.ring, fa, n, fb, m) {
                        Ok(iso) => Check::new(name, reloaded(IsometryDoc::of(&iso)), Value::Null),
                        Err(e) => failed(name, e),
                    });
                }
            }
        }
    }
    Ok(checks)
}

fn sign(f: Flavor) -> char {
    match f {
        Flavor::Alternating => '-',
        Flavor::Symmetric => '+',
    }
}

fn form_standardize(p: &Params, doc: Option<&str>) -> Checks {
    if let Some(doc) = doc {
        let s = parse::<SpaceDoc>(doc)?.space()?;
        let iso = standardize_symplectic(&s)?;
        let doc = IsometryDoc::of(&iso);
        return Ok(vec![Check::new(
            "standardization to H₋ⁿ",
            reloaded(doc.clone()),
            serde_json::to_value(doc).expect("serializable"),
        )]);
    }
    if !p.ring.is_field() {
        return Err(BadInput::Usage("random standardization samples need a field; pass a document instead".into()));
    }
    let mut rng = stream(p.seed);
    Ok((0..p.samples)
        .map(|k| {
            let planes = p.n.unwrap_or(k % 4 + 1);
            let s = alternating_unimodular(&p.ring, planes, &mut rng);
            let name = format!("sample {k} (rank {})", 2 * planes);
            match standardize_symplectic(&s) {
                Ok(iso) => Check::new(name, reloaded(IsometryDoc::of(&iso)), Value::Null),
                Err(e) => failed(name, e),
            }
        })
        .collect())
}

fn gw_ksp0(p: &Params, doc: Option<&str>) -> Checks {
    let i = p.i.unwrap_or(0);
    let space = match doc {
        Some(doc) => parse::<SpaceDoc>(doc)?.space()?,
        None => alternating_unimodular(&p.ring, p.n.unwrap_or(2), &mut stream(p.seed)),
    };
    let class = ksp0_class(i, &space)?;
    let mut checks = vec![Check::new(
        "normalized class",
        true,
        serde_json::to_value(GwDoc::of(&class)).expect("serializable"),
    )];
    if space.ring().is_field() {
        let multiple = class.hyperbolic_multiple();
        checks.push(Check::new(
            format!("class equals {i}·[H₋]"),
            multiple == Some(i),
            json!({ "hyperbolic_multiple": multiple }),
        ));
        let expected = GwClass::scale_hyperbolic(space.ring(), Flavor::Alternating, i);
        checks.push(Check::new(
            "certified equal to the hyperbolic multiple",
            class.certified_equal(&expected)?,
            Value::Null,
        ));
    }
    Ok(checks)
}

fn gw_witt(p: &Params, doc: Option<&str>) -> Checks {
    let doc = doc.ok_or_else(|| BadInput::Usage("gw witt reads a space, or a {\"left\", \"right\"} pair".into()))?;
    if let Ok(pair) = serde_json::from_str::<PairDoc>(doc) {
        let (a, b) = (pair.left.space()?, pair.right.space()?);
        return Ok(vec![match stable_isometry_test(&a, &b, p.max_stab) {
            Ok(same) => Check::new(
                "stable isometry decided",
                true,
                json!({ "stably_isometric": same, "max_stab": p.max_stab }),
            ),
            Err(formkit_core::Error::Undecidable) => Check::new(
                "stable isometry decided",
                false,
                json!({ "reason": "no decision procedure over this ring" }),
            ),
            Err(e) => return Err(e.into()),
        }]);
    }
    let s = parse::<SpaceDoc>(doc)?.space()?;
    let w = witt_decompose(&s)?;
    let rank_ok = 2 * w.hyperbolic_count + w.anisotropic.rank() == s.rank();
    Ok(vec![
        Check::new("rank accounts for both parts", rank_ok, Value::Null),
        Check::new(
            "Witt decomposition",
            reloaded(IsometryDoc::of(&w.witness)),
            json!({
                "hyperbolic_count": w.hyperbolic_count,
                "anisotropic": SpaceDoc::of(&w.anisotropic),
                "witness": IsometryDoc::of(&w.witness),
            }),
        ),
    ])
}

fn sp_swap_factor(p: &Params) -> Checks {
    let (n, m) = (p.n.unwrap_or(1), p.m.unwrap_or(1));
    if n == 0 || m == 0 {
        return Err(BadInput::Usage("block sizes must be positive".into()));
    }
    let ring = &p.ring;
    let swap = block_swap(ring, n, m);
    let factors = factor_into_transvections(&swap)?;
    let size = swap.matrix().rows();
    // Re-read the emitted pairs and multiply them out.
    let docs: Vec<TransvectionDoc> = factors.iter().map(|t| TransvectionDoc::of(ring, t)).collect();
    let reread = docs
        .iter()
        .map(|d| d.transvection(ring))
        .collect::<Result<Vec<_>, _>>()?;
    let exact = product(ring, size, &reread)? == *swap.matrix();
    Ok(vec![Check::new(
        format!("block swap {n}+{m} as a product of transvections"),
        exact,
        json!({ "count": docs.len(), "factors": docs }),
    )])
}

fn sp_homotopy(p: &Params, doc: Option<&str>) -> Checks {
    let ring_of_doc;
    let target = match doc {
        Some(doc) => {
            let m = parse::<MatrixDoc>(doc)?.matrix()?;
            ring_of_doc = m.ring().clone();
            SymplecticMatrix::new(m)?
        }
        None => {
            ring_of_doc = p.ring.clone();
            block_swap(&p.ring, p.n.unwrap_or(1), p.m.unwrap_or(1))
        }
    };
    let ring = &ring_of_doc;
    let size = target.matrix().rows();
    let factors = factor_into_transvections(&target)?;
    let h = homotopy_witness(ring, size, &factors)?;
    let j = standard_j(&h.ring, size / 2);
    let mut checks = Vec::new();
    for (k, (f, path)) in factors.iter().zip(&h.paths).enumerate() {
        let preserves = path.congruence(&j)? == j;
        let at0 = path.specialize(&h.parameter, &ring.zero(), ring)?.is_identity();
        let at1 = path.specialize(&h.parameter, &ring.one(), ring)? == f.matrix(ring);
        checks.push(Check::new(
            format!("path {k}: FᵀJF = J in {}, F(0) = I, F(1) = factor", h.parameter),
            preserves && at0 && at1,
            json!({ "path": rows_of(path) }),
        ));
    }
    checks.push(Check::new("composite endpoint", h.endpoint(ring)? == *target.matrix(), Value::Null));
    Ok(checks)
}

fn koszul_verify(p: &Params, doc: Option<&str>) -> Checks {
    if let Some(doc) = doc {
        let value: Value = parse(doc)?;
        if value.get("shift").is_some() {
            let (c, f) = serde_json::from_value::<DualityDoc>(value).map_err(FormatError::from)?.form()?;
            let dd = dual_shifted(&dual_shifted(&c, f.shift()), f.shift()) == c;
            return Ok(vec![
                Check::new("duality form", true, json!({ "ranks": c.ranks(), "epsilon": f.epsilon() })),
                Check::new("double dual identification", dd, Value::Null),
            ]);
        }
        let c = serde_json::from_value::<ComplexDoc>(value).map_err(FormatError::from)?.complex()?;
        return Ok(vec![Check::new("d∘d = 0", true, json!({ "ranks": c.ranks() }))]);
    }
    let nmax = p.n.unwrap_or(4);
    let mut checks = Vec::new();
    for n in 0..=nmax {
        let name = format!("θ on the Koszul complex of rank {n}");
        checks.push(match theta_form(n, &p.ring) {
            Ok((_, f)) => Check::new(
                name,
                f.epsilon() == epsilon(n as i64),
                json!({ "epsilon": f.epsilon() }),
            ),
            Err(e) => failed(name, e),
        });
        for i in 1..=n {
            let name = format!("dh + hd = id with t{i} inverted (rank {n})");
            checks.push(match contracting_homotopy(n, i, &p.ring) {
                Ok(_) => Check::new(name, true, Value::Null),
                Err(e) => failed(name, e),
            });
        }
    }
    Ok(checks)
}

fn koszul_thom(p: &Params) -> Checks {
    let (c, f) = thom_class_trivial_line(&p.ring)?;
    let r = c.ring();
    let t = r.var("t")?;
    let dual = dual_shifted(&c, 1);
    let rows_ok = c.d(1) == Matrix::from_rows(r, vec![vec![t.clone()]])?
        && dual.d(1) == Matrix::from_rows(r, vec![vec![r.neg(&t)]])?;
    let verticals_ok = f.component(1) == &Matrix::from_ints(r, &[&[-1]]) && f.component(0) == &Matrix::from_ints(r, &[&[1]]);
    Ok(vec![
        Check::new("rows t / −t", rows_ok, Value::Null),
        Check::new(
            "verticals −1 / 1",
            verticals_ok,
            serde_json::to_value(DualityDoc::of(&c, &f)).expect("serializable"),
        ),
    ])
}

fn koszul_borel(p: &Params) -> Checks {
    let b = borel_class_chart(&p.ring)?;
    let r = b.complex.ring();
    let golden_top = Matrix::parse(r, &[&["t0", "t1"]])?;
    let golden_bottom = Matrix::parse(r, &[&["-t1"], &["-t0"]])?;
    let rows_ok = b.complex.d(1) == golden_top && b.bottom[0] == golden_bottom;
    let diagram = json!({
        "complex": DualityDoc::of(&b.complex, &b.form),
        "bottom_basis": rows_of(&b.bottom_basis),
        "bottom": b.bottom.iter().map(rows_of).collect::<Vec<_>>(),
        "verticals": b.verticals.iter().map(rows_of).collect::<Vec<_>>(),
    });
    let mut checks = vec![Check::new("rows (t0, t1) / (−t1, −t0)", rows_ok, diagram)];
    checks.push(match compare_borel_thom(&p.ring) {
        Ok(iso) => {
            let (diffs, forms) = iso.transport()?;
            let agrees = diffs == iso.target.0.differentials() && forms == iso.target.1.components();
            Check::new(
                "th ⊠ th agrees with the Borel class",
                agrees,
                json!({ "components": iso.components.iter().map(rows_of).collect::<Vec<_>>() }),
            )
        }
        Err(e) => failed("th ⊠ th agrees with the Borel class", e),
    });
    Ok(checks)
}

fn grass_ga_check(p: &Params) -> Checks {
    let r = ga_action_verify(p.samples)?;
    let mut checks = vec![
        Check::new("unit law", r.unit_law, Value::Null),
        Check::new("action law", r.action_law, Value::Null),
        Check::new("pairing invariant", r.pairing_invariant, Value::Null),
        Check::new("displacement formula", r.displacement_formula, Value::Null),
    ];
    for (k, s) in r.samples.iter().enumerate() {
        checks.push(Check::new(
            format!("freeness sample {k}"),
            s.moved == s.expected_moved,
            json!({ "point": s.point, "t": s.t, "moved": s.moved }),
        ));
    }
    Ok(checks)
}

fn structure_for(kind: Grassmannian, n: usize, i: i64, u: &Subspace, x: &Subspace) -> formkit_core::Result<StructureSubspace> {
    match kind {
        Grassmannian::Hgr => structure_subspace_hgr(n, i, u, x),
        Grassmannian::Rgr => structure_subspace_rgr(n, i, u, x),
    }
}

fn grass_structure_check(p: &Params) -> Checks {
    let n = p.n.unwrap_or(1);
    let kind = p.grassmannian.unwrap_or(if n % 2 == 0 { Grassmannian::Rgr } else { Grassmannian::Hgr });
    let i = p.i.unwrap_or(0);
    let ring = &p.ring;
    if !ring.is_field() || ring.characteristic() == 2 {
        return Err(BadInput::Usage("structure checks need a field of odd characteristic".into()));
    }
    let (flavor, r, dim, rank, want) = match kind {
        Grassmannian::Hgr => (Flavor::Alternating, 2 * n, 4 * n, 16 * n, Flavor::Symmetric),
        Grassmannian::Rgr => (Flavor::Symmetric, n, 2 * n, 8 * n, Flavor::Alternating),
    };
    let mut rng = stream(p.seed);
    let mut checks = Vec::new();
    // Validate the parameters once at the distinguished point before sampling.
    let distinguished = match kind {
        Grassmannian::Hgr => distinguished_hgr(ring, n)?,
        Grassmannian::Rgr => distinguished_rgr(ring, n)?,
    };
    let x0 = distinguished_hp1(ring)?;
    let s0 = structure_for(kind, n, i, &distinguished, &x0)?;
    for k in 0..p.samples {
        let u = membership_sample(ring, flavor, r, dim, &mut rng);
        let x = membership_sample(ring, Flavor::Alternating, 2, 4, &mut rng);
        let name = format!("sample {k}");
        checks.push(match structure_for(kind, n, i, &u, &x) {
            Ok(s) => Check::new(
                name,
                s.rank() == rank && s.flavor() == want && s.is_unimodular(),
                json!({ "rank": s.rank(), "flavor": s.flavor().name(), "unimodular": s.is_unimodular() }),
            ),
            Err(e) => failed(name, e),
        });
    }
    if i == 0 {
        checks.push(Check::new("distinguished point restricts to the leading half", s0.is_leading_half()?, Value::Null));
    }
    checks.push(match s0.permutation_certificate() {
        Ok(c) => Check::new(
            "permutation certificate at the distinguished point",
            c.lifted_paths.len() == c.factors.len(),
            json!({ "permutation": c.permutation, "transvections": c.factors.len(), "parameter": c.homotopy.parameter }),
        ),
        Err(e) => failed("permutation certificate at the distinguished point", e),
    });
    if kind == Grassmannian::Hgr && n < formkit_core::grassmann::MAX_STRUCTURE_SCALE {
        checks.push(match stabilization_check(n, i, &distinguished, &x0) {
            Ok(c) => Check::new(
                "stabilization by one hyperbolic plane",
                c.passed(),
                json!({ "permutation": c.permutation, "new_slots": c.new_slots.len() }),
            ),
            Err(e) => failed("stabilization by one hyperbolic plane", e),
        });
    }
    Ok(checks)
}

/// A reduced pass over every module, each sub-run recorded as one check.
fn selftest(p: &Params) -> Checks {
    let z = Ring::Integers;
    let q = Ring::Rationals;
    let f5 = Ring::prime_field(5).expect("prime");
    let f7 = Ring::prime_field(7).expect("prime");
    let with = |ring: &Ring, samples: usize, n: Option<usize>, i: Option<i64>| Params {
        ring: ring.clone(),
        seed: p.seed,
        samples,
        n,
        m: n,
        i,
        max_stab: p.max_stab,
        grassmannian: None,
    };
    let mut runs: Vec<(String, Report)> = Vec::new();
    for ring in [&z, &q, &f5] {
        runs.push((format!("form embed over {}", ring_name(ring)), run(Command::FormEmbed, &with(ring, 8, None, None), None)));
        runs.push((format!("form tensor over {}", ring_name(ring)), run(Command::FormTensor, &with(ring, 0, Some(2), None), None)));
    }
    runs.push(("form standardize over F5".into(), run(Command::FormStandardize, &with(&f5, 8, None, None), None)));
    for i in -2..=2 {
        runs.push((format!("gw ksp0 i={i} over F5"), run(Command::GwKsp0, &with(&f5, 0, Some(2), Some(i)), None)));
    }
    let witt = serde_json::to_string(&SpaceDoc::of(&hyperbolic(&q, Flavor::Symmetric, 2))).expect("serializable");
    runs.push(("gw witt of H₊² over Q".into(), run(Command::GwWitt, &with(&q, 0, None, None), Some(&witt))));
    for ring in [&z, &f5] {
        runs.push((format!("sp swap-factor over {}", ring_name(ring)), run(Command::SpSwapFactor, &with(ring, 0, Some(1), None), None)));
        runs.push((format!("sp homotopy over {}", ring_name(ring)), run(Command::SpHomotopy, &with(ring, 0, Some(1), None), None)));
    }
    for ring in [&q, &f7] {
        runs.push((format!("koszul verify over {}", ring_name(ring)), run(Command::KoszulVerify, &with(ring, 0, Some(3), None), None)));
    }
    runs.push(("koszul thom".into(), run(Command::KoszulThom, &with(&q, 0, None, None), None)));
    runs.push(("koszul borel".into(), run(Command::KoszulBorel, &with(&q, 0, None, None), None)));
    runs.push(("grass ga-check".into(), run(Command::GrassGaCheck, &with(&q, 5, None, None), None)));
    runs.push(("grass structure-check".into(), run(Command::GrassStructureCheck, &with(&q, 2, Some(1), Some(0)), None)));
    Ok(runs
        .into_iter()
        .map(|(name, r)| {
            let failing: Vec<&str> = r.details.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let data = match &r.error {
                Some(e) => json!({ "error": e }),
                None if failing.is_empty() => json!({ "checks": r.details.len() }),
                None => json!({ "checks": r.details.len(), "failing": failing }),
            };
            Check::new(name, r.outcome == crate::report::Outcome::Pass, data)
        })
        .collect())
}

fn ring_name(r: &Ring) -> String {
    match r {
        Ring::Integers => "Z".into(),
        Ring::Rationals => "Q".into(),
        Ring::PrimeField(p) => format!("F{p}"),
        Ring::Modular(n) => format!("Z/{n}"),
        Ring::Polynomial(_) => "a polynomial ring".into(),
    }
}
