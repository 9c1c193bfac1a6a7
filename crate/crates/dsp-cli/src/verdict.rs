//! Verdict documents: rendering a decision (with its certificate and the
//! instance data needed to re-check it) and the independent re-validation
//! used by `validate-cert`.
//!
//! Re-validation deliberately uses only the root-lattice and character
//! primitives, never the decision procedure, so a certificate stands on
//! its own.

use dsp_core::quiver::{LatticeVector, RootKind, StarQuiver};
use dsp_core::spectral::{xi_char, ProblemInstance, XiTable};
use dsp_core::value::MValue;
use dsp_core::{Certificate, Status, Verdict};

use crate::doc::{self, Document, Value};
use crate::instance::{check_header, instance_fields, quiver_and_xi};
use crate::CliError;

fn status_atom(s: Status) -> &'static str {
    match s {
        Status::Solvable => "solvable",
        Status::Unsolvable => "unsolvable",
        Status::Unknown => "unknown",
    }
}

fn certificate_atom(c: &Certificate) -> &'static str {
    match c {
        Certificate::None => "none",
        Certificate::NotStrict => "not_strict",
        Certificate::NotPositiveRoot => "not_positive_root",
        Certificate::CharacterNotOne(_) => "character_not_one",
        Certificate::ViolatingDecomposition { .. } => "violating_decomposition",
        Certificate::EncodingUnsupported(_) => "encoding_unsupported",
        Certificate::GuardExceeded(_) => "guard_exceeded",
    }
}

/// Renders the full verdict document: decision, certificate payload, exact
/// character data and the instance fields needed to re-validate.
pub fn render_verdict(inst: &ProblemInstance, verdict: &Verdict, timing_ms: u128) -> String {
    let mut out = Document::default();
    out.push("format", Value::Int(1));
    out.push("kind", Value::Atom("verdict".into()));
    out.push("status", Value::Atom(status_atom(verdict.status).into()));
    out.push(
        "certificate",
        Value::Atom(certificate_atom(&verdict.certificate).into()),
    );
    match &verdict.certificate {
        Certificate::CharacterNotOne(v) => {
            out.push("character_value", Value::Atom(v.to_string()));
        }
        Certificate::ViolatingDecomposition {
            parts,
            part_p,
            p_alpha: _,
        } => {
            out.push(
                "parts",
                Value::List(
                    parts
                        .iter()
                        .map(|p| Value::List(p.0.iter().map(|&c| Value::Int(c)).collect()))
                        .collect(),
                ),
            );
            out.push(
                "part_p_values",
                Value::List(part_p.iter().map(|&p| Value::Int(p)).collect()),
            );
        }
        Certificate::EncodingUnsupported(msg) | Certificate::GuardExceeded(msg) => {
            out.push("detail", Value::Str(msg.clone()));
        }
        _ => {}
    }
    out.push("p_of_alpha", Value::Int(inst.quiver.p(&inst.alpha)));
    let chi = xi_char(&inst.quiver, &inst.xi, &inst.alpha).expect("validated instance");
    out.push("xi_char_of_alpha", Value::Atom(chi.to_string()));
    out.push("timing_ms", Value::Int(timing_ms as i64));
    out.push(
        "guards_hit",
        match &verdict.certificate {
            Certificate::GuardExceeded(msg) => Value::Str(msg.clone()),
            _ => Value::Atom("none".into()),
        },
    );
    instance_fields(&mut out, inst);
    doc::render(&out)
}

/// A parsed verdict document, kept at the lattice/character level so that
/// non-strict or non-root alphas (which valid certificates may describe)
/// still load.
pub struct VerdictDocument {
    pub quiver: StarQuiver,
    pub xi: XiTable,
    pub alpha: LatticeVector,
    pub status: String,
    pub certificate: String,
    pub character_value: Option<MValue>,
    pub parts: Vec<LatticeVector>,
    pub part_p_values: Vec<i64>,
    pub p_of_alpha: i64,
    pub xi_char_of_alpha: MValue,
}

impl VerdictDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc = doc::parse(text)?;
        check_header(&doc, "verdict")?;
        let (quiver, xi, ctx) = quiver_and_xi(&doc)?;
        let alpha_raw = doc
            .require("alpha")?
            .as_list()
            .ok_or_else(|| CliError::Semantic("alpha must be a coordinate list".into()))?;
        let alpha = LatticeVector(
            alpha_raw
                .iter()
                .map(|v| {
                    v.as_int()
                        .ok_or_else(|| CliError::Semantic("alpha coordinates are integers".into()))
                })
                .collect::<Result<_, _>>()?,
        );
        if alpha.len() != quiver.vertex_count() {
            return Err(CliError::Semantic(format!(
                "alpha has {} coordinates, quiver has {}",
                alpha.len(),
                quiver.vertex_count()
            )));
        }
        let status = doc
            .require("status")?
            .as_text()
            .ok_or_else(|| CliError::Semantic("status must be an atom".into()))?
            .to_string();
        let certificate = doc
            .require("certificate")?
            .as_text()
            .ok_or_else(|| CliError::Semantic("certificate must be an atom".into()))?
            .to_string();
        let parse_value = |text: &str| -> Result<MValue, CliError> {
            MValue::parse(text, ctx.as_ref())
                .map_err(|e| CliError::Semantic(format!("bad exact value '{text}': {e}")))
        };
        let character_value = match doc.get("character_value") {
            Some(v) => Some(parse_value(v.as_text().ok_or_else(|| {
                CliError::Semantic("character_value must be an atom".into())
            })?)?),
            None => None,
        };
        let parts = match doc.get("parts") {
            None => Vec::new(),
            Some(v) => v
                .as_list()
                .ok_or_else(|| CliError::Semantic("parts must be a list".into()))?
                .iter()
                .map(|p| {
                    let coords = p
                        .as_list()
                        .ok_or_else(|| CliError::Semantic("each part is a coordinate list".into()))?
                        .iter()
                        .map(|c| {
                            c.as_int().ok_or_else(|| {
                                CliError::Semantic("part coordinates are integers".into())
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(LatticeVector(coords))
                })
                .collect::<Result<Vec<_>, CliError>>()?,
        };
        let part_p_values = match doc.get("part_p_values") {
            None => Vec::new(),
            Some(v) => v
                .as_list()
                .ok_or_else(|| CliError::Semantic("part_p_values must be a list".into()))?
                .iter()
                .map(|c| {
                    c.as_int()
                        .ok_or_else(|| CliError::Semantic("part_p_values are integers".into()))
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let p_of_alpha = doc
            .require("p_of_alpha")?
            .as_int()
            .ok_or_else(|| CliError::Semantic("p_of_alpha must be an integer".into()))?;
        let xi_char_of_alpha = parse_value(
            doc.require("xi_char_of_alpha")?
                .as_text()
                .ok_or_else(|| CliError::Semantic("xi_char_of_alpha must be an atom".into()))?,
        )?;
        Ok(VerdictDocument {
            quiver,
            xi,
            alpha,
            status,
            certificate,
            character_value,
            parts,
            part_p_values,
            p_of_alpha,
            xi_char_of_alpha,
        })
    }
}

/// Result of re-validating one verdict document.
#[derive(Debug, PartialEq, Eq)]
pub struct ValidationOutcome {
    pub valid: bool,
    pub detail: String,
}

fn fail(detail: impl Into<String>) -> ValidationOutcome {
    ValidationOutcome {
        valid: false,
        detail: detail.into(),
    }
}

fn ok(detail: impl Into<String>) -> ValidationOutcome {
    ValidationOutcome {
        valid: true,
        detail: detail.into(),
    }
}

/// Re-checks a verdict's certificate from scratch, using only the root
/// lattice (forms, root test, strictness) and the exact character.
pub fn validate_certificate(vd: &VerdictDocument) -> ValidationOutcome {
    let q = &vd.quiver;
    // shared facts, recomputed
    if q.p(&vd.alpha) != vd.p_of_alpha {
        return fail(format!(
            "stored p_of_alpha = {} but p(alpha) = {}",
            vd.p_of_alpha,
            q.p(&vd.alpha)
        ));
    }
    let chi = match xi_char(q, &vd.xi, &vd.alpha) {
        Ok(c) => c,
        Err(e) => return fail(format!("cannot recompute xi^[alpha]: {e}")),
    };
    if chi != vd.xi_char_of_alpha {
        return fail(format!(
            "stored xi_char_of_alpha = {} but recomputation gives {}",
            vd.xi_char_of_alpha, chi
        ));
    }
    let expected_status = match vd.certificate.as_str() {
        "none" => "solvable",
        "encoding_unsupported" | "guard_exceeded" => "unknown",
        _ => "unsolvable",
    };
    if vd.status != expected_status {
        return fail(format!(
            "certificate '{}' cannot justify status '{}'",
            vd.certificate, vd.status
        ));
    }
    match vd.certificate.as_str() {
        "none" => ok("solvable verdicts carry no certificate to check"),
        "encoding_unsupported" | "guard_exceeded" => {
            ok("unknown verdicts carry no mathematical claim")
        }
        "not_strict" => {
            if q.is_strict(&vd.alpha) {
                fail("alpha is strict, certificate claims otherwise")
            } else {
                ok("alpha is indeed not strict")
            }
        }
        "not_positive_root" => match root_kind(q, &vd.alpha) {
            RootKind::NotRoot => ok("alpha is indeed not a positive root"),
            kind => fail(format!("alpha is a positive root ({kind:?})")),
        },
        "character_not_one" => {
            let Some(stored) = &vd.character_value else {
                return fail("missing character_value");
            };
            if stored != &chi {
                return fail(format!(
                    "certificate value {stored} differs from recomputed xi^[alpha] = {chi}"
                ));
            }
            if chi.is_one() {
                fail("xi^[alpha] recomputes to 1, certificate claims otherwise")
            } else {
                ok("xi^[alpha] is indeed not 1")
            }
        }
        "violating_decomposition" => validate_decomposition(vd, &chi),
        other => fail(format!("unknown certificate kind '{other}'")),
    }
}

fn root_kind(q: &StarQuiver, a: &LatticeVector) -> RootKind {
    if a.is_zero() {
        return RootKind::NotRoot;
    }
    q.positive_root_kind(a).unwrap_or(RootKind::NotRoot)
}

fn validate_decomposition(vd: &VerdictDocument, chi: &MValue) -> ValidationOutcome {
    let q = &vd.quiver;
    if vd.parts.len() < 2 {
        return fail("a violating decomposition needs at least two parts");
    }
    if vd.parts.len() != vd.part_p_values.len() {
        return fail("parts and part_p_values differ in length");
    }
    if !chi.is_one() {
        return fail("xi^[alpha] must be 1 for the decomposition criterion to apply");
    }
    let mut total = LatticeVector::zeros(q.vertex_count());
    for (i, part) in vd.parts.iter().enumerate() {
        if part.len() != q.vertex_count() {
            return fail(format!("part {} has the wrong dimension", i + 1));
        }
        if root_kind(q, part) == RootKind::NotRoot {
            return fail(format!("part {} = {part} is not a positive root", i + 1));
        }
        match xi_char(q, &vd.xi, part) {
            Ok(c) if c.is_one() => {}
            Ok(c) => {
                return fail(format!(
                    "part {} = {part} has xi^[part] = {c}, not 1",
                    i + 1
                ))
            }
            Err(e) => return fail(format!("cannot evaluate xi^[part {}]: {e}", i + 1)),
        }
        if q.p(part) != vd.part_p_values[i] {
            return fail(format!(
                "stored p = {} for part {} but p recomputes to {}",
                vd.part_p_values[i],
                i + 1,
                q.p(part)
            ));
        }
        total = total.add(part);
    }
    if total != vd.alpha {
        return fail(format!("parts sum to {total}, not alpha = {}", vd.alpha));
    }
    let sum_p: i64 = vd.part_p_values.iter().sum();
    if vd.p_of_alpha > sum_p {
        return fail(format!(
            "p(alpha) = {} exceeds the parts' total {} — this decomposition does not violate",
            vd.p_of_alpha, sum_p
        ));
    }
    ok(format!(
        "decomposition re-validates: {} parts, p(alpha) = {} <= {}",
        vd.parts.len(),
        vd.p_of_alpha,
        sum_p
    ))
}
