//! Exact nonzero multiplicative scalars.
//!
//! Two encodings cover the eigenvalue data the engine accepts:
//!
//! * `Cyclo` — magnitude·exp(2πi·angle) with positive rational magnitude and
//!   rational angle taken mod 1. This is the group ℚ_{>0} × ℚ/ℤ and covers
//!   every value of the form (positive rational)·(root of unity); negative
//!   rationals are angle 1/2.
//! * `Sym` — a formal product of declared generators g_1,…,g_m with integer
//!   exponents, modulo a user-declared relation lattice (exponent vectors
//!   equal to 1). Equality-to-one is lattice membership, decided by
//!   Hermite-normal-form reduction.
//!
//! Only the multiplicative group is implemented; there is no addition.
//! Mixing the two encodings in one product is an error.

use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use num_traits::Euclid;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValueError {
    #[error("magnitude must be a positive rational, got {0}")]
    NonPositiveMagnitude(String),
    #[error("cannot combine values from different encodings (cyclo vs sym)")]
    ModeMismatch,
    #[error("cannot combine sym values over different generator contexts")]
    ContextMismatch,
    #[error("sym value has {got} exponents, context declares {expected} generators")]
    ArityMismatch { got: usize, expected: usize },
    #[error("relation row has {got} entries, expected {expected}")]
    BadRelationRow { got: usize, expected: usize },
    #[error("value parse error at byte {at}: {msg}")]
    Parse { at: usize, msg: String },
}

/// Integer lattice given by the row span of a matrix, in Hermite normal
/// form. Supports membership tests and canonical coset representatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationLattice {
    ambient: usize,
    /// HNF rows with strictly increasing pivot columns, positive pivots,
    /// entries above each pivot reduced into [0, pivot).
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl RelationLattice {
    /// Empty lattice (only the zero vector) in dimension `ambient`.
    pub fn trivial(ambient: usize) -> Self {
        RelationLattice {
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Lattice spanned by the given integer rows.
    pub fn from_rows(ambient: usize, raw: &[Vec<i64>]) -> Result<Self, ValueError> {
        for r in raw {
            if r.len() != ambient {
                return Err(ValueError::BadRelationRow {
                    got: r.len(),
                    expected: ambient,
                });
            }
        }
        let mut rows: Vec<Vec<BigInt>> = raw
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        hermite_normal_form(&mut rows, ambient);
        let pivots = rows
            .iter()
            .map(|r| r.iter().position(|x| !x.is_zero()).expect("nonzero row"))
            .collect();
        Ok(RelationLattice {
            ambient,
            rows,
            pivots,
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// The Hermite-normal-form rows spanning the lattice.
    pub fn hnf_rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    /// Canonical representative of x + L: reduce at each pivot so the pivot
    /// coordinate lies in [0, pivot). Two vectors are congruent mod L iff
    /// their representatives coincide.
    pub fn reduce(&self, x: &[BigInt]) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = x.to_vec();
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let p = &row[piv];
            let q = v[piv].div_euclid(p);
            if !q.is_zero() {
                for (vi, ri) in v.iter_mut().zip(row) {
                    *vi -= &q * ri;
                }
            }
        }
        v
    }

    /// Membership test: x ∈ L.
    pub fn contains(&self, x: &[BigInt]) -> bool {
        let mut v: Vec<BigInt> = x.to_vec();
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let p = &row[piv];
            if (&v[piv] % p).is_zero() {
                let q = &v[piv] / p;
                if !q.is_zero() {
                    for (vi, ri) in v.iter_mut().zip(row) {
                        *vi -= &q * ri;
                    }
                }
            } else {
                return false;
            }
        }
        v.iter().all(|x| x.is_zero())
    }

    /// Least m ≥ 1 with m·x ∈ L, or None if no multiple lies in L.
    /// Solve c·H = x over ℚ (rows are independent, so c is unique if it
    /// exists); the answer is the lcm of the denominators of c.
    pub fn order_mod(&self, x: &[BigInt]) -> Option<u64> {
        let mut v: Vec<BigRational> = x
            .iter()
            .map(|z| BigRational::from_integer(z.clone()))
            .collect();
        let mut denom_lcm = BigInt::one();
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let p = BigRational::from_integer(row[piv].clone());
            let c = &v[piv] / &p;
            if !c.is_zero() {
                for (vi, ri) in v.iter_mut().zip(row) {
                    *vi -= &c * BigRational::from_integer(ri.clone());
                }
            }
            denom_lcm = num::integer::lcm(denom_lcm, c.denom().clone());
        }
        if v.iter().all(|x| x.is_zero()) {
            Some(u64::try_from(denom_lcm).expect("order fits in u64"))
        } else {
            None
        }
    }
}

/// Row-style Hermite normal form over ℤ: pivot columns strictly increase,
/// pivots positive, entries above each pivot reduced mod the pivot. Zero
/// rows are dropped.
fn hermite_normal_form(rows: &mut Vec<Vec<BigInt>>, ambient: usize) {
    let mut row = 0usize;
    for col in 0..ambient {
        // gcd out column `col` among rows[row..]
        loop {
            let mut nonzero: Vec<usize> = (row..rows.len())
                .filter(|&r| !rows[r][col].is_zero())
                .collect();
            if nonzero.is_empty() {
                break;
            }
            if nonzero.len() == 1 {
                rows.swap(row, nonzero[0]);
                break;
            }
            // reduce the larger entries by the smallest
            nonzero.sort_by_key(|&r| rows[r][col].abs());
            let min = nonzero[0];
            let min_row = rows[min].clone();
            for &r in &nonzero[1..] {
                let q = &rows[r][col] / &min_row[col];
                if !q.is_zero() {
                    for (x, m) in rows[r].iter_mut().zip(&min_row) {
                        *x -= &q * m;
                    }
                }
            }
        }
        if row < rows.len() && !rows[row][col].is_zero() {
            if rows[row][col].is_negative() {
                for x in rows[row].iter_mut() {
                    *x = -std::mem::take(x);
                }
            }
            // reduce entries above the pivot into [0, pivot)
            let pivot_row = rows[row].clone();
            for upper in rows.iter_mut().take(row) {
                let q = upper[col].div_euclid(&pivot_row[col]);
                if !q.is_zero() {
                    for (x, m) in upper.iter_mut().zip(&pivot_row) {
                        *x -= &q * m;
                    }
                }
            }
            row += 1;
        }
    }
    rows.truncate(row);
}

/// Shared context for symbolic values: a generator count and the relation
/// lattice declaring which exponent vectors equal 1.
#[derive(Debug, PartialEq, Eq)]
pub struct SymContext {
    pub generators: usize,
    pub relations: RelationLattice,
}

impl SymContext {
    pub fn new(generators: usize, relations: RelationLattice) -> Arc<Self> {
        assert_eq!(relations.ambient(), generators);
        Arc::new(SymContext {
            generators,
            relations,
        })
    }

    pub fn free(generators: usize) -> Arc<Self> {
        Self::new(generators, RelationLattice::trivial(generators))
    }
}

/// Exact nonzero multiplicative scalar.
#[derive(Debug, Clone)]
pub enum MValue {
    /// magnitude · exp(2πi·angle); magnitude > 0, angle normalized to [0,1)
    Cyclo {
        magnitude: BigRational,
        angle: BigRational,
    },
    /// ∏ g_i^{exps[i]} modulo the context's relation lattice
    Sym {
        exps: Vec<i64>,
        ctx: Arc<SymContext>,
    },
}

/// Multiplicative order of a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(u64),
    Infinite,
}

fn normalize_angle(a: BigRational) -> BigRational {
    let f = a.floor();
    a - f
}

impl MValue {
    pub fn one() -> Self {
        MValue::Cyclo {
            magnitude: BigRational::one(),
            angle: BigRational::zero(),
        }
    }

    /// One in the same encoding (and context) as `self`.
    pub fn one_like(&self) -> Self {
        match self {
            MValue::Cyclo { .. } => MValue::one(),
            MValue::Sym { ctx, .. } => MValue::Sym {
                exps: vec![0; ctx.generators],
                ctx: ctx.clone(),
            },
        }
    }

    pub fn cyclo(magnitude: BigRational, angle: BigRational) -> Result<Self, ValueError> {
        if magnitude <= BigRational::zero() {
            return Err(ValueError::NonPositiveMagnitude(magnitude.to_string()));
        }
        Ok(MValue::Cyclo {
            magnitude,
            angle: normalize_angle(angle),
        })
    }

    /// A rational value; negatives get angle 1/2.
    pub fn rational(r: BigRational) -> Result<Self, ValueError> {
        if r.is_zero() {
            return Err(ValueError::NonPositiveMagnitude("0".into()));
        }
        if r.is_negative() {
            Self::cyclo(-r, BigRational::new(BigInt::one(), BigInt::from(2)))
        } else {
            Self::cyclo(r, BigRational::zero())
        }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n))).expect("nonzero")
    }

    /// exp(2πi·a/b).
    pub fn root_of_unity(a: i64, b: i64) -> Self {
        assert!(b != 0, "root_of_unity denominator");
        Self::cyclo(
            BigRational::one(),
            BigRational::new(BigInt::from(a), BigInt::from(b)),
        )
        .expect("unit magnitude")
    }

    pub fn sym(exps: Vec<i64>, ctx: Arc<SymContext>) -> Result<Self, ValueError> {
        if exps.len() != ctx.generators {
            return Err(ValueError::ArityMismatch {
                got: exps.len(),
                expected: ctx.generators,
            });
        }
        Ok(MValue::Sym { exps, ctx })
    }

    pub fn is_sym(&self) -> bool {
        matches!(self, MValue::Sym { .. })
    }

    pub fn mul(&self, other: &MValue) -> Result<MValue, ValueError> {
        match (self, other) {
            (
                MValue::Cyclo { magnitude: m1, angle: a1 },
                MValue::Cyclo { magnitude: m2, angle: a2 },
            ) => Ok(MValue::Cyclo {
                magnitude: m1 * m2,
                angle: normalize_angle(a1 + a2),
            }),
            (MValue::Sym { exps: e1, ctx: c1 }, MValue::Sym { exps: e2, ctx: c2 }) => {
                if c1 != c2 {
                    return Err(ValueError::ContextMismatch);
                }
                Ok(MValue::Sym {
                    exps: e1.iter().zip(e2).map(|(a, b)| a + b).collect(),
                    ctx: c1.clone(),
                })
            }
            _ => Err(ValueError::ModeMismatch),
        }
    }

    pub fn inv(&self) -> MValue {
        match self {
            MValue::Cyclo { magnitude, angle } => MValue::Cyclo {
                magnitude: magnitude.recip(),
                angle: normalize_angle(-angle),
            },
            MValue::Sym { exps, ctx } => MValue::Sym {
                exps: exps.iter().map(|e| -e).collect(),
                ctx: ctx.clone(),
            },
        }
    }

    pub fn div(&self, other: &MValue) -> Result<MValue, ValueError> {
        self.mul(&other.inv())
    }

    pub fn pow(&self, n: i64) -> MValue {
        match self {
            MValue::Cyclo { magnitude, angle } => {
                let p = BigInt::from(n);
                MValue::Cyclo {
                    magnitude: pow_rational(magnitude, n),
                    angle: normalize_angle(angle * BigRational::from_integer(p)),
                }
            }
            MValue::Sym { exps, ctx } => MValue::Sym {
                exps: exps.iter().map(|e| e * n).collect(),
                ctx: ctx.clone(),
            },
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            MValue::Cyclo { magnitude, angle } => magnitude.is_one() && angle.is_zero(),
            MValue::Sym { exps, ctx } => {
                let v: Vec<BigInt> = exps.iter().map(|&e| BigInt::from(e)).collect();
                ctx.relations.contains(&v)
            }
        }
    }

    /// Least m ≥ 1 with self^m = 1, if any.
    pub fn order(&self) -> Order {
        match self {
            MValue::Cyclo { magnitude, angle } => {
                if !magnitude.is_one() {
                    return Order::Infinite;
                }
                if angle.is_zero() {
                    Order::Finite(1)
                } else {
                    // angle a/b in lowest terms has order b
                    Order::Finite(u64::try_from(angle.denom().clone()).expect("small order"))
                }
            }
            MValue::Sym { exps, ctx } => {
                let v: Vec<BigInt> = exps.iter().map(|&e| BigInt::from(e)).collect();
                match ctx.relations.order_mod(&v) {
                    Some(m) => Order::Finite(m),
                    None => Order::Infinite,
                }
            }
        }
    }

    /// Hashable canonical form; equal values share it, and it doubles as the
    /// equality key.
    pub fn canon_key(&self) -> CanonValue {
        match self {
            MValue::Cyclo { magnitude, angle } => {
                CanonValue::Cyclo(magnitude.clone(), angle.clone())
            }
            MValue::Sym { exps, ctx } => {
                let v: Vec<BigInt> = exps.iter().map(|&e| BigInt::from(e)).collect();
                CanonValue::Sym(ctx.relations.reduce(&v))
            }
        }
    }

    /// Floating complex value; None for symbolic values.
    pub fn to_complex(&self) -> Option<nalgebra::Complex<f64>> {
        match self {
            MValue::Cyclo { magnitude, angle } => {
                use num_traits::ToPrimitive;
                let m = magnitude.to_f64()?;
                let a = angle.to_f64()?;
                let theta = 2.0 * std::f64::consts::PI * a;
                Some(nalgebra::Complex::new(m * theta.cos(), m * theta.sin()))
            }
            MValue::Sym { .. } => None,
        }
    }

    /// Exact rational value when the angle is 0 or 1/2; None otherwise.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            MValue::Cyclo { magnitude, angle } => {
                if angle.is_zero() {
                    Some(magnitude.clone())
                } else if angle == &BigRational::new(BigInt::one(), BigInt::from(2)) {
                    Some(-magnitude.clone())
                } else {
                    None
                }
            }
            MValue::Sym { .. } => None,
        }
    }

    /// Parses the exact-value grammar.
    ///
    /// Cyclo: `2`, `-1`, `3/4`, `zeta(1/3)`, `2*zeta(5/6)`, `-3/7*zeta(1/4)`.
    /// Sym (needs a context): `1`, `g1`, `g2^-3`, `g1^2*g3^-1`.
    pub fn parse(text: &str, ctx: Option<&Arc<SymContext>>) -> Result<MValue, ValueError> {
        let s = text.trim();
        if s.is_empty() {
            return Err(ValueError::Parse {
                at: 0,
                msg: "empty value".into(),
            });
        }
        if s.contains('g') {
            let ctx = ctx.ok_or(ValueError::Parse {
                at: 0,
                msg: "symbolic value outside sym mode".into(),
            })?;
            return parse_sym(s, ctx);
        }
        parse_cyclo(s)
    }
}

fn pow_rational(base: &BigRational, n: i64) -> BigRational {
    if n == 0 {
        return BigRational::one();
    }
    let mut out = BigRational::one();
    let (mut b, mut e) = if n < 0 {
        (base.recip(), n.unsigned_abs())
    } else {
        (base.clone(), n as u64)
    };
    while e > 0 {
        if e & 1 == 1 {
            out *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    out
}

/// Canonical equality/hash key for an `MValue`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CanonValue {
    Cyclo(BigRational, BigRational),
    Sym(Vec<BigInt>),
}

impl PartialEq for MValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (MValue::Sym { ctx: c1, .. }, MValue::Sym { ctx: c2, .. }) if c1 != c2 => false,
            _ => self.canon_key() == other.canon_key(),
        }
    }
}

impl Eq for MValue {}

impl std::hash::Hash for MValue {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canon_key().hash(state);
    }
}

impl fmt::Display for MValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MValue::Cyclo { magnitude, angle } => {
                let half = BigRational::new(BigInt::one(), BigInt::from(2));
                if angle.is_zero() {
                    write!(f, "{magnitude}")
                } else if *angle == half {
                    write!(f, "-{magnitude}")
                } else if magnitude.is_one() {
                    write!(f, "zeta({angle})")
                } else {
                    write!(f, "{magnitude}*zeta({angle})")
                }
            }
            MValue::Sym { exps, .. } => {
                let mut wrote = false;
                for (i, &e) in exps.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if wrote {
                        write!(f, "*")?;
                    }
                    if e == 1 {
                        write!(f, "g{}", i + 1)?;
                    } else {
                        write!(f, "g{}^{}", i + 1, e)?;
                    }
                    wrote = true;
                }
                if !wrote {
                    write!(f, "1")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_rational(s: &str, at: usize) -> Result<BigRational, ValueError> {
    let err = |msg: &str| ValueError::Parse {
        at,
        msg: msg.to_string(),
    };
    if let Some((num_s, den_s)) = s.split_once('/') {
        let n: BigInt = num_s.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = den_s.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        Ok(BigRational::new(n, d))
    } else if let Some(dot) = s.find('.') {
        // exact decimal: 1.5 = 3/2
        let int_part = &s[..dot];
        let frac_part = &s[dot + 1..];
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal"));
        }
        let joined = format!("{int_part}{frac_part}");
        let n: BigInt = joined.parse().map_err(|_| err("bad decimal"))?;
        let d = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s.trim().parse().map_err(|_| err("bad integer"))?;
        Ok(BigRational::from_integer(n))
    }
}

fn parse_cyclo(s: &str) -> Result<MValue, ValueError> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (mag_s, zeta_s) = if let Some(idx) = body.find("zeta(") {
        let prefix = body[..idx].trim_end_matches('*').trim();
        let inner = body[idx + 5..]
            .strip_suffix(')')
            .ok_or(ValueError::Parse {
                at: idx,
                msg: "unterminated zeta(...)".into(),
            })?;
        (prefix, Some(inner))
    } else {
        (body, None)
    };
    let magnitude = if mag_s.is_empty() {
        BigRational::one()
    } else {
        parse_rational(mag_s, 0)?
    };
    if magnitude.is_zero() {
        return Err(ValueError::NonPositiveMagnitude("0".into()));
    }
    if magnitude.is_negative() {
        return Err(ValueError::Parse {
            at: 0,
            msg: "write negatives with a leading '-', not a negative magnitude".into(),
        });
    }
    let mut angle = match zeta_s {
        Some(inner) => parse_rational(inner, 0)?,
        None => BigRational::zero(),
    };
    if neg {
        angle += BigRational::new(BigInt::one(), BigInt::from(2));
    }
    MValue::cyclo(magnitude, angle)
}

fn parse_sym(s: &str, ctx: &Arc<SymContext>) -> Result<MValue, ValueError> {
    let mut exps = vec![0i64; ctx.generators];
    for factor in s.split('*') {
        let f = factor.trim();
        if f == "1" {
            continue;
        }
        let rest = f.strip_prefix('g').ok_or(ValueError::Parse {
            at: 0,
            msg: format!("expected generator factor, got '{f}'"),
        })?;
        let (idx_s, exp_s) = match rest.split_once('^') {
            Some((i, e)) => (i, Some(e)),
            None => (rest, None),
        };
        let idx: usize = idx_s.parse().map_err(|_| ValueError::Parse {
            at: 0,
            msg: format!("bad generator index in '{f}'"),
        })?;
        if idx == 0 || idx > ctx.generators {
            return Err(ValueError::Parse {
                at: 0,
                msg: format!(
                    "generator g{idx} out of range (context has {} generators)",
                    ctx.generators
                ),
            });
        }
        let e: i64 = match exp_s {
            Some(e) => e.parse().map_err(|_| ValueError::Parse {
                at: 0,
                msg: format!("bad exponent in '{f}'"),
            })?,
            None => 1,
        };
        exps[idx - 1] += e;
    }
    MValue::sym(exps, ctx.clone())
}
