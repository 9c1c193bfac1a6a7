//! Instance documents: parsing into a validated `ProblemInstance` and
//! rendering back out.

use std::sync::Arc;

use dsp_core::quiver::{build_star, LatticeVector, StarQuiver, Vertex, WeightSequence};
use dsp_core::spectral::{alpha_from_matrices, MatrixData, ProblemInstance, RatMatrix, XiTable};
use dsp_core::value::{MValue, RelationLattice, SymContext};
use nalgebra::{Complex, DMatrix};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

use crate::doc::{self, DocError, Document, Pos, Value};
use crate::CliError;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, CliError> {
    let doc = doc::parse(text)?;
    instance_from_document(&doc)
}

fn semantic(msg: impl Into<String>) -> CliError {
    CliError::Semantic(msg.into())
}

fn expect_int_list(value: &Value, what: &str) -> Result<Vec<i64>, CliError> {
    let list = value
        .as_list()
        .ok_or_else(|| semantic(format!("{what} must be a list")))?;
    list.iter()
        .map(|v| {
            v.as_int()
                .ok_or_else(|| semantic(format!("{what} must contain integers, found {}", v.type_name())))
        })
        .collect()
}

pub fn instance_from_document(doc: &Document) -> Result<ProblemInstance, CliError> {
    check_header(doc, "instance")?;
    let (quiver, xi, ctx) = quiver_and_xi(doc)?;
    let rank_tol = rank_tol(doc)?;
    let _ = ctx;

    let matrices = match doc.get("matrices") {
        Some(v) => Some(parse_matrices(v)?),
        None => None,
    };

    let alpha = match doc.require("alpha")? {
        Value::Atom(s) if s == "from_matrices" => {
            let mats = matrices
                .as_ref()
                .ok_or_else(|| semantic("alpha: from_matrices requires a matrices section"))?;
            alpha_from_matrices(&quiver, mats, &xi, rank_tol).map_err(|e| semantic(e.to_string()))?
        }
        value => parse_alpha(value, &quiver)?,
    };

    ProblemInstance::new(quiver, xi, alpha, matrices, rank_tol)
        .map_err(|e| semantic(e.to_string()))
}

pub fn check_header(doc: &Document, kind: &str) -> Result<(), CliError> {
    match doc.require("format")? {
        Value::Int(1) => {}
        other => {
            return Err(semantic(format!(
                "unsupported format {other:?}; this tool reads format 1"
            )))
        }
    }
    let got = doc.require("kind")?.as_text().unwrap_or("?");
    if got != kind {
        return Err(semantic(format!("expected a '{kind}' document, got kind '{got}'")));
    }
    Ok(())
}

/// Shared by instance and verdict documents: weights, mode, xi (and the
/// symbolic context if mode is sym).
pub fn quiver_and_xi(
    doc: &Document,
) -> Result<(StarQuiver, XiTable, Option<Arc<SymContext>>), CliError> {
    let weights_raw = expect_int_list(doc.require("weights")?, "weights")?;
    if weights_raw.iter().any(|&w| w < 1) {
        return Err(semantic("weights must all be >= 1"));
    }
    let weights = WeightSequence::new(weights_raw.iter().map(|&w| w as usize).collect())
        .map_err(|e| semantic(e.to_string()))?;
    let quiver = build_star(weights);

    let mode = match doc.get("mode") {
        None => "cyclo".to_string(),
        Some(v) => v
            .as_text()
            .ok_or_else(|| semantic("mode must be 'cyclo' or 'sym'"))?
            .to_string(),
    };
    let ctx = match mode.as_str() {
        "cyclo" => None,
        "sym" => {
            let generators = doc
                .require("generators")?
                .as_int()
                .ok_or_else(|| semantic("generators must be an integer"))?;
            if generators < 0 {
                return Err(semantic("generators must be >= 0"));
            }
            let relations = match doc.get("relations") {
                None => RelationLattice::trivial(generators as usize),
                Some(v) => {
                    let rows: Result<Vec<Vec<i64>>, CliError> = v
                        .as_list()
                        .ok_or_else(|| semantic("relations must be a list of integer rows"))?
                        .iter()
                        .map(|row| expect_int_list(row, "relations row"))
                        .collect();
                    RelationLattice::from_rows(generators as usize, &rows?)
                        .map_err(|e| semantic(e.to_string()))?
                }
            };
            Some(SymContext::new(generators as usize, relations))
        }
        other => return Err(semantic(format!("unknown mode '{other}'"))),
    };

    let xi_value = doc.require("xi")?;
    let arms_raw = xi_value
        .as_list()
        .ok_or_else(|| semantic("xi must be a list of arms"))?;
    let mut arms = Vec::new();
    for (i, arm) in arms_raw.iter().enumerate() {
        let entries = arm
            .as_list()
            .ok_or_else(|| semantic(format!("xi arm {} must be a list of values", i + 1)))?;
        let mut parsed = Vec::new();
        for v in entries {
            let text = match v {
                Value::Int(n) => n.to_string(),
                other => other
                    .as_text()
                    .ok_or_else(|| semantic(format!("xi arm {}: values must be atoms", i + 1)))?
                    .to_string(),
            };
            let value = parse_xi_value(&text, &ctx)
                .map_err(|e| semantic(format!("xi arm {}: {e}", i + 1)))?;
            parsed.push(value);
        }
        arms.push(parsed);
    }
    let xi = XiTable::new(quiver.weights(), arms).map_err(|e| semantic(e.to_string()))?;
    Ok((quiver, xi, ctx))
}

fn parse_xi_value(text: &str, ctx: &Option<Arc<SymContext>>) -> Result<MValue, String> {
    match ctx {
        None => {
            if text.contains('g') {
                return Err(format!(
                    "'{text}' looks symbolic; declare mode: sym and generators"
                ));
            }
            MValue::parse(text, None).map_err(|e| e.to_string())
        }
        Some(ctx) => {
            if text == "1" {
                return Ok(MValue::sym(vec![0; ctx.generators], ctx.clone())
                    .expect("arity matches context"));
            }
            if !text.contains('g') {
                return Err(format!(
                    "'{text}': sym-mode values are generator products like g1^2*g2^-1 (or 1)"
                ));
            }
            MValue::parse(text, Some(ctx)).map_err(|e| e.to_string())
        }
    }
}

pub fn parse_vertex_name(text: &str, quiver: &StarQuiver) -> Result<usize, CliError> {
    let v = if text == "*" || text == "star" {
        Vertex::Center
    } else if let Some((a, s)) = text.split_once('.') {
        let arm: usize = a
            .parse()
            .map_err(|_| semantic(format!("bad vertex '{text}' (want * or i.j)")))?;
        let slot: usize = s
            .parse()
            .map_err(|_| semantic(format!("bad vertex '{text}' (want * or i.j)")))?;
        if arm == 0 || slot == 0 {
            return Err(semantic(format!("vertex '{text}' uses 1-based indices")));
        }
        Vertex::Arm {
            arm: arm - 1,
            slot: slot - 1,
        }
    } else {
        return Err(semantic(format!("bad vertex '{text}' (want * or i.j)")));
    };
    quiver
        .index_of(v)
        .ok_or_else(|| semantic(format!("vertex '{text}' does not exist on this quiver")))
}

pub fn vertex_name(quiver: &StarQuiver, idx: usize) -> String {
    match quiver.vertex_at(idx) {
        Vertex::Center => "*".to_string(),
        Vertex::Arm { arm, slot } => format!("{}.{}", arm + 1, slot + 1),
    }
}

fn parse_alpha(value: &Value, quiver: &StarQuiver) -> Result<LatticeVector, CliError> {
    let list = value
        .as_list()
        .ok_or_else(|| semantic("alpha must be a coordinate list, a vertex map, or from_matrices"))?;
    // vertex-map form: every item is a [vertex, value] pair
    let map_form = !list.is_empty()
        && list.iter().all(|item| {
            matches!(item, Value::List(pair) if pair.len() == 2 && pair[1].as_int().is_some())
        });
    if map_form {
        let mut alpha = LatticeVector::zeros(quiver.vertex_count());
        for item in list {
            let pair = item.as_list().expect("checked");
            let name = pair[0]
                .as_text()
                .map(str::to_string)
                .or_else(|| pair[0].as_int().map(|i| i.to_string()))
                .ok_or_else(|| semantic("alpha map entries are [vertex, value]"))?;
            let idx = parse_vertex_name(&name, quiver)?;
            alpha.0[idx] = pair[1].as_int().expect("checked");
        }
        return Ok(alpha);
    }
    let coords = expect_int_list(value, "alpha")?;
    if coords.len() != quiver.vertex_count() {
        return Err(semantic(format!(
            "alpha has {} coordinates, quiver has {} vertices (order: *, then arm 1 inward-out, arm 2, ...)",
            coords.len(),
            quiver.vertex_count()
        )));
    }
    Ok(LatticeVector(coords))
}

/// One matrix entry: exact rational or floating complex.
enum Entry {
    Rat(BigRational),
    Cplx(Complex<f64>),
}

fn parse_entry(text: &str) -> Result<Entry, CliError> {
    if let Some(r) = parse_exact_rational(text) {
        return Ok(Entry::Rat(r));
    }
    parse_complex(text)
        .map(Entry::Cplx)
        .ok_or_else(|| semantic(format!("bad matrix entry '{text}'")))
}

fn parse_exact_rational(s: &str) -> Option<BigRational> {
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some(dot) = s.find('.') {
        let frac = &s[dot + 1..];
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let joined: BigInt = format!("{}{}", &s[..dot], frac).parse().ok()?;
        return Some(BigRational::new(joined, BigInt::from(10u8).pow(frac.len() as u32)));
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// `1.5+0.5i`, `-i`, `2i`, `3e-2`, `1-2e3i`, plain floats.
fn parse_complex(s: &str) -> Option<Complex<f64>> {
    let s = s.trim();
    if !s.ends_with('i') {
        return s.parse::<f64>().ok().map(|re| Complex::new(re, 0.0));
    }
    let body = &s[..s.len() - 1];
    // find the +/- separating real and imaginary parts (not leading, not
    // part of an exponent)
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    match split {
        Some(i) => {
            let re: f64 = body[..i].parse().ok()?;
            let im_str = &body[i..];
            let im: f64 = if im_str == "+" {
                1.0
            } else if im_str == "-" {
                -1.0
            } else {
                im_str.parse().ok()?
            };
            Some(Complex::new(re, im))
        }
        None => {
            let im: f64 = if body.is_empty() {
                1.0
            } else if body == "-" {
                -1.0
            } else {
                body.parse().ok()?
            };
            Some(Complex::new(0.0, im))
        }
    }
}

fn parse_matrices(value: &Value) -> Result<MatrixData, CliError> {
    let mats_raw = value
        .as_list()
        .ok_or_else(|| semantic("matrices must be a list of matrices"))?;
    let mut parsed: Vec<Vec<Vec<Entry>>> = Vec::new();
    for (mi, m) in mats_raw.iter().enumerate() {
        let rows_raw = m
            .as_list()
            .ok_or_else(|| semantic(format!("matrix {} must be a list of rows", mi + 1)))?;
        let mut rows = Vec::new();
        for row in rows_raw {
            let entries_raw = row
                .as_list()
                .ok_or_else(|| semantic(format!("matrix {}: rows must be lists", mi + 1)))?;
            let mut entries = Vec::new();
            for e in entries_raw {
                let text = match e {
                    Value::Int(n) => n.to_string(),
                    other => other
                        .as_text()
                        .ok_or_else(|| semantic(format!("matrix {}: bad entry", mi + 1)))?
                        .to_string(),
                };
                entries.push(parse_entry(&text)?);
            }
            rows.push(entries);
        }
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(semantic(format!("matrix {} is not square", mi + 1)));
        }
        parsed.push(rows);
    }
    let all_rational = parsed
        .iter()
        .flatten()
        .flatten()
        .all(|e| matches!(e, Entry::Rat(_)));
    if all_rational {
        let mats = parsed
            .into_iter()
            .map(|rows| {
                RatMatrix::from_rows(
                    rows.into_iter()
                        .map(|r| {
                            r.into_iter()
                                .map(|e| match e {
                                    Entry::Rat(x) => x,
                                    Entry::Cplx(_) => unreachable!(),
                                })
                                .collect()
                        })
                        .collect(),
                )
                .expect("squareness checked")
            })
            .collect();
        Ok(MatrixData::Rational(mats))
    } else {
        use num::traits::ToPrimitive;
        let mats = parsed
            .into_iter()
            .map(|rows| {
                let n = rows.len();
                DMatrix::from_fn(n, n, |r, c| match &rows[r][c] {
                    Entry::Rat(x) => Complex::new(x.to_f64().unwrap_or(f64::NAN), 0.0),
                    Entry::Cplx(z) => *z,
                })
            })
            .collect();
        Ok(MatrixData::Complex(mats))
    }
}

fn rank_tol(doc: &Document) -> Result<f64, CliError> {
    match doc.get("rank_tol") {
        None => Ok(DEFAULT_RANK_TOL),
        Some(v) => {
            let text = match v {
                Value::Int(i) => i.to_string(),
                other => other
                    .as_text()
                    .ok_or_else(|| semantic("rank_tol must be a number"))?
                    .to_string(),
            };
            let t: f64 = text
                .parse()
                .map_err(|_| semantic(format!("rank_tol '{text}' is not a number")))?;
            if !(t > 0.0 && t < 1.0) {
                return Err(semantic("rank_tol must lie in (0, 1)"));
            }
            Ok(t)
        }
    }
}

/// Document fields describing the instance (shared by verdict output).
pub fn instance_fields(doc: &mut Document, inst: &ProblemInstance) {
    doc.push(
        "weights",
        Value::List(
            inst.quiver
                .weights()
                .weights()
                .iter()
                .map(|&w| Value::Int(w as i64))
                .collect(),
        ),
    );
    let sym = inst.is_sym();
    doc.push("mode", Value::Atom(if sym { "sym" } else { "cyclo" }.into()));
    if sym {
        if let Some(MValue::Sym { ctx, .. }) = inst.xi.arms().iter().flatten().next() {
            doc.push("generators", Value::Int(ctx.generators as i64));
            // relations re-emitted in Hermite normal form
            let rows = relation_rows(ctx);
            if !rows.is_empty() {
                doc.push(
                    "relations",
                    Value::List(
                        rows.into_iter()
                            .map(|r| Value::List(r.into_iter().map(Value::Int).collect()))
                            .collect(),
                    ),
                );
            }
        }
    }
    doc.push(
        "xi",
        Value::List(
            inst.xi
                .arms()
                .iter()
                .map(|arm| {
                    Value::List(arm.iter().map(|v| Value::Atom(v.to_string())).collect())
                })
                .collect(),
        ),
    );
    doc.push(
        "alpha",
        Value::List(inst.alpha.0.iter().map(|&c| Value::Int(c)).collect()),
    );
}

fn relation_rows(ctx: &SymContext) -> Vec<Vec<i64>> {
    use num::traits::ToPrimitive;
    ctx.relations
        .hnf_rows()
        .iter()
        .map(|row| row.iter().map(|x| x.to_i64().unwrap_or(0)).collect())
        .collect()
}

/// Positional error paths from the doc layer become CLI input errors.
impl From<DocError> for CliError {
    fn from(e: DocError) -> Self {
        CliError::Syntax(e)
    }
}

pub fn pos_or_unknown(p: Option<Pos>) -> String {
    match p {
        Some(p) => p.to_string(),
        None => "document".to_string(),
    }
}
