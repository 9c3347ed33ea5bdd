//! JSON exchange documents. Every loader rebuilds the value through the
//! checking constructors of the core crate, so a document that parses is a
//! document that verifies.

use formkit_core::forms::{check_isometry, BilinearSpace, Flavor, Isometry};
use formkit_core::gw::GwClass;
use formkit_core::koszul::{ChainComplex, DualityForm};
use formkit_core::sp::Transvection;
use formkit_core::{Matrix, Ring};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("entry ({row}, {col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        source: formkit_core::Error,
    },
    #[error("{context}: {source}")]
    Check {
        context: &'static str,
        source: formkit_core::Error,
    },
    #[error("bad ring `{0}`: expected Z, Q, F<p>, Z/<n>, optionally followed by [v1,v2,...]")]
    RingFlag(String),
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn check<T>(context: &'static str, r: formkit_core::Result<T>) -> Result<T> {
    r.map_err(|source| FormatError::Check { context, source })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RingDoc {
    Integers,
    Rationals,
    PrimeField {
        p: u64,
    },
    Modular {
        n: u64,
    },
    Polynomial {
        base: Box<RingDoc>,
        variables: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        inverted: Vec<String>,
    },
}

impl RingDoc {
    pub fn of(ring: &Ring) -> RingDoc {
        match ring {
            Ring::Integers => RingDoc::Integers,
            Ring::Rationals => RingDoc::Rationals,
            Ring::PrimeField(p) => RingDoc::PrimeField { p: *p },
            Ring::Modular(n) => RingDoc::Modular { n: *n },
            Ring::Polynomial(p) => RingDoc::Polynomial {
                base: Box::new(RingDoc::of(p.base())),
                variables: p.variables().to_vec(),
                inverted: p.inverted().map(str::to_owned).collect(),
            },
        }
    }

    pub fn ring(&self) -> Result<Ring> {
        let ring = match self {
            RingDoc::Integers => Ring::Integers,
            RingDoc::Rationals => Ring::Rationals,
            RingDoc::PrimeField { p } => check("ring", Ring::prime_field(*p))?,
            RingDoc::Modular { n } => check("ring", Ring::modular(*n))?,
            RingDoc::Polynomial {
                base,
                variables,
                inverted,
            } => {
                let mut r = check("ring", Ring::polynomial(&base.ring()?, variables))?;
                for v in inverted {
                    r = check("ring", r.invert_variable(v))?;
                }
                r
            }
        };
        Ok(ring)
    }
}

/// Parses the `--ring` shorthand: `Z`, `Q`, `F5`, `Z/12`, `Q[t0,t1]`.
pub fn parse_ring_flag(s: &str) -> Result<Ring> {
    let bad = || FormatError::RingFlag(s.to_owned());
    let (head, vars) = match s.find('[') {
        Some(k) => {
            let inner = s[k + 1..].strip_suffix(']').ok_or_else(bad)?;
            let vars: Vec<&str> = inner.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
            (&s[..k], vars)
        }
        None => (s, Vec::new()),
    };
    let scalar = match head.trim() {
        "Z" => Ring::Integers,
        "Q" => Ring::Rationals,
        h if h.starts_with("Z/") => Ring::modular(h[2..].parse().map_err(|_| bad())?).map_err(|_| bad())?,
        h if h.starts_with('F') => Ring::prime_field(h[1..].parse().map_err(|_| bad())?).map_err(|_| bad())?,
        _ => return Err(bad()),
    };
    Ring::polynomial(&scalar, &vars).map_err(|_| bad())
}

pub fn rows_of(m: &Matrix) -> Vec<Vec<String>> {
    let ring = m.ring();
    m.to_rows().iter().map(|r| r.iter().map(|x| ring.format(x)).collect()).collect()
}

/// Parses entries over `ring`; a bad entry reports its row, column and byte.
pub fn parse_rows(ring: &Ring, rows: &[Vec<String>]) -> Result<Matrix> {
    let width = rows.first().map_or(0, Vec::len);
    let mut parsed = Vec::with_capacity(rows.len());
    for (row, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(FormatError::Check {
                context: "matrix",
                source: formkit_core::Error::DimensionMismatch(format!("row {row} has {} entries, expected {width}", r.len())),
            });
        }
        let mut out = Vec::with_capacity(r.len());
        for (col, s) in r.iter().enumerate() {
            out.push(ring.parse(s).map_err(|source| FormatError::Entry { row, col, source })?);
        }
        parsed.push(out);
    }
    check("matrix", Matrix::from_rows(ring, parsed))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub ring: RingDoc,
    pub rows: Vec<Vec<String>>,
}

impl MatrixDoc {
    pub fn of(m: &Matrix) -> MatrixDoc {
        MatrixDoc {
            ring: RingDoc::of(m.ring()),
            rows: rows_of(m),
        }
    }

    pub fn matrix(&self) -> Result<Matrix> {
        parse_rows(&self.ring.ring()?, &self.rows)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlavorDoc {
    Symmetric,
    Alternating,
}

impl From<Flavor> for FlavorDoc {
    fn from(f: Flavor) -> FlavorDoc {
        match f {
            Flavor::Symmetric => FlavorDoc::Symmetric,
            Flavor::Alternating => FlavorDoc::Alternating,
        }
    }
}

impl From<FlavorDoc> for Flavor {
    fn from(f: FlavorDoc) -> Flavor {
        match f {
            FlavorDoc::Symmetric => Flavor::Symmetric,
            FlavorDoc::Alternating => Flavor::Alternating,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub ring: RingDoc,
    pub flavor: FlavorDoc,
    pub rows: Vec<Vec<String>>,
}

impl SpaceDoc {
    pub fn of(s: &BilinearSpace) -> SpaceDoc {
        SpaceDoc {
            ring: RingDoc::of(s.ring()),
            flavor: s.flavor().into(),
            rows: rows_of(s.gram()),
        }
    }

    pub fn space(&self) -> Result<BilinearSpace> {
        let gram = parse_rows(&self.ring.ring()?, &self.rows)?;
        check("bilinear space", BilinearSpace::new(self.flavor.into(), gram))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsometryDoc {
    pub source: SpaceDoc,
    pub target: SpaceDoc,
    pub witness: MatrixDoc,
}

impl IsometryDoc {
    pub fn of(iso: &Isometry) -> IsometryDoc {
        IsometryDoc {
            source: SpaceDoc::of(iso.source()),
            target: SpaceDoc::of(iso.target()),
            witness: MatrixDoc::of(iso.witness()),
        }
    }

    /// Rebuilds and re-checks Wᵀ·G_source·W = G_target.
    pub fn isometry(&self) -> Result<Isometry> {
        let (a, b) = (self.source.space()?, self.target.space()?);
        check("isometry", check_isometry(&a, &b, &self.witness.matrix()?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GwDoc {
    pub plus: Vec<SpaceDoc>,
    pub minus: Vec<SpaceDoc>,
}

impl GwDoc {
    pub fn of(c: &GwClass) -> GwDoc {
        GwDoc {
            plus: c.plus().iter().map(SpaceDoc::of).collect(),
            minus: c.minus().iter().map(SpaceDoc::of).collect(),
        }
    }

    pub fn class(&self) -> Result<GwClass> {
        let plus = self.plus.iter().map(SpaceDoc::space).collect::<Result<Vec<_>>>()?;
        let minus = self.minus.iter().map(SpaceDoc::space).collect::<Result<Vec<_>>>()?;
        let first = plus.first().or(minus.first()).ok_or(FormatError::Check {
            context: "class",
            source: formkit_core::Error::UnsupportedInput("empty class has no ring".into()),
        })?;
        let (ring, flavor) = (first.ring().clone(), first.flavor());
        check("class", GwClass::from_parts(&ring, flavor, plus, minus))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub ring: RingDoc,
    pub degrees: [i64; 2],
    pub ranks: Vec<usize>,
    pub differentials: Vec<Vec<Vec<String>>>,
}

impl ComplexDoc {
    pub fn of(c: &ChainComplex) -> ComplexDoc {
        ComplexDoc {
            ring: RingDoc::of(c.ring()),
            degrees: [c.lo(), c.hi()],
            ranks: c.ranks().to_vec(),
            differentials: c.differentials().iter().map(rows_of).collect(),
        }
    }

    /// Differentials are listed from d_{lo+1} up to d_hi; an empty row list
    /// stands for a map out of or into a zero module.
    pub fn complex(&self) -> Result<ChainComplex> {
        let ring = self.ring.ring()?;
        let [lo, hi] = self.degrees;
        if hi < lo || self.ranks.len() as i64 != hi - lo + 1 {
            return Err(FormatError::Check {
                context: "complex",
                source: formkit_core::Error::DimensionMismatch("ranks do not cover the degree range".into()),
            });
        }
        let diffs = self
            .differentials
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                let (r, c) = (self.ranks[k], self.ranks[k + 1]);
                if rows.is_empty() || c == 0 {
                    Ok(Matrix::zeros(&ring, r, c))
                } else {
                    parse_rows(&ring, rows)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        check("complex", ChainComplex::new(&ring, lo, self.ranks.clone(), diffs))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityDoc {
    #[serde(flatten)]
    pub complex: ComplexDoc,
    pub shift: i64,
    pub epsilon: i64,
    pub components: Vec<Vec<Vec<String>>>,
}

impl DualityDoc {
    pub fn of(c: &ChainComplex, f: &DualityForm) -> DualityDoc {
        DualityDoc {
            complex: ComplexDoc::of(c),
            shift: f.shift(),
            epsilon: f.epsilon(),
            components: f.components().iter().map(rows_of).collect(),
        }
    }

    pub fn form(&self) -> Result<(ChainComplex, DualityForm)> {
        let c = self.complex.complex()?;
        let comps = self
            .components
            .iter()
            .map(|rows| parse_rows(c.ring(), rows))
            .collect::<Result<Vec<_>>>()?;
        let f = check("duality form", DualityForm::new(&c, self.shift, self.epsilon, comps))?;
        Ok((c, f))
    }
}

/// A transvection as the pair (v, λ).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransvectionDoc {
    pub v: Vec<String>,
    pub lambda: String,
}

impl TransvectionDoc {
    pub fn of(ring: &Ring, t: &Transvection) -> TransvectionDoc {
        TransvectionDoc {
            v: t.v.iter().map(|x| ring.format(x)).collect(),
            lambda: ring.format(&t.lambda),
        }
    }

    pub fn transvection(&self, ring: &Ring) -> Result<Transvection> {
        let entry = |col: usize, s: &str| ring.parse(s).map_err(|source| FormatError::Entry { row: 0, col, source });
        let v = self.v.iter().enumerate().map(|(k, s)| entry(k, s)).collect::<Result<Vec<_>>>()?;
        Ok(Transvection::new(v, entry(self.v.len(), &self.lambda)?))
    }
}

/// Pretty JSON with a trailing newline. Struct fields keep declaration
/// order, so equal values give identical bytes.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}
