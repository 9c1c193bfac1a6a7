//! Admissible reflections on pairs [q, α] and the reduction-case recognizer.
//!
//! Reflection at a vertex v is admissible when q_v ≠ 1; it sends [q, α] to
//! [u_v(q), s_v(α)] with u_v(q)_i = q_i·q_v^{−(ε_i,ε_v)}, pinned by the
//! identity u_v(q)^{s_v(β)} = q^β. Orbit exploration is a bounded BFS; the
//! F̄_q test is an explicit semi-decision (Yes only on orbit closure). The
//! recognizer inspects the support of α and matches the three reduced
//! shapes: a multiple of δ on an extended Dynkin support, a character-split
//! bridge with multiplicity one on both ends, and an extended Dynkin part
//! entered at an extending vertex carrying hδ.

use std::collections::HashSet;

use crate::quiver::{build_star, LatticeVector, QuiverClass, StarQuiver, Vertex, WeightSequence};
use crate::spectral::{q_pow, CharacterQ};
use crate::value::{CanonValue, MValue, Order};

/// A character together with a lattice vector on the same quiver.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub q: CharacterQ,
    pub alpha: LatticeVector,
}

impl Pair {
    pub fn new(q: CharacterQ, alpha: LatticeVector) -> Self {
        assert_eq!(q.len(), alpha.len(), "pair components indexed by one quiver");
        Pair { q, alpha }
    }

    fn key(&self) -> (Vec<CanonValue>, Vec<i64>) {
        (
            self.q.values().iter().map(MValue::canon_key).collect(),
            self.alpha.0.clone(),
        )
    }
}

/// True iff reflection at dense vertex v is admissible for the pair.
pub fn admissible(v: usize, p: &Pair) -> bool {
    !p.q.value(v).is_one()
}

/// [q, α] ↦ [u_v(q), s_v(α)]. Panics if v is not admissible.
pub fn reflect_pair(quiver: &StarQuiver, v: usize, p: &Pair) -> Pair {
    assert!(admissible(v, p), "reflection at {v} is not admissible");
    let qv = p.q.value(v).clone();
    let mut q = p.q.clone();
    // (ε_i, ε_v) = 2 at i = v, −1 at neighbours, 0 elsewhere
    q.set(v, qv.inv());
    for &u in quiver.neighbors(v) {
        q.set(u, p.q.value(u).mul(&qv).expect("one table, one mode"));
    }
    Pair {
        q,
        alpha: quiver.reflect(v, &p.alpha),
    }
}

/// All pairs reachable from `p` by at most `depth` admissible reflections,
/// in BFS order. The second component reports whether the orbit closed
/// (no unexplored frontier remained).
pub fn orbit_explore(quiver: &StarQuiver, p: &Pair, depth: usize) -> (Vec<Pair>, bool) {
    let mut seen = HashSet::new();
    seen.insert(p.key());
    let mut out = vec![p.clone()];
    let mut frontier = vec![p.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for cur in &frontier {
            for v in 0..quiver.vertex_count() {
                if admissible(v, cur) {
                    let refl = reflect_pair(quiver, v, cur);
                    if seen.insert(refl.key()) {
                        out.push(refl.clone());
                        next.push(refl);
                    }
                }
            }
        }
        if next.is_empty() {
            return (out, true);
        }
        frontier = next;
    }
    // closed iff the last frontier generates nothing new
    let closed = frontier.iter().all(|cur| {
        (0..quiver.vertex_count()).all(|v| {
            !admissible(v, cur) || seen.contains(&reflect_pair(quiver, v, cur).key())
        })
    });
    (out, closed)
}

/// Semi-decision result for F̄_q membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InFq {
    Yes,
    No,
    Unknown,
}

/// α ∈ F̄_q requires (α′, ε_i) ≤ 0 for every pair [q′, α′] ~ [q, α] and
/// every vertex i with q′_i = 1. Explores the orbit to `depth`; answers Yes
/// only when the orbit closed with no violation.
pub fn in_fq(quiver: &StarQuiver, p: &Pair, depth: usize) -> InFq {
    let (orbit, closed) = orbit_explore(quiver, p, depth);
    for pair in &orbit {
        for v in 0..quiver.vertex_count() {
            if pair.q.value(v).is_one() && quiver.sym_simple(&pair.alpha, v) > 0 {
                return InFq::No;
            }
        }
    }
    if closed {
        InFq::Yes
    } else {
        InFq::Unknown
    }
}

/// The three reduced shapes of the support of α (with q restricted).
#[derive(Debug, Clone, PartialEq)]
pub enum ReducedCase {
    /// support extended Dynkin, α = h·m·δ with h ≥ 2 and q^δ of order m
    CaseI {
        m: u64,
        h: i64,
        delta: LatticeVector,
    },
    /// support splits along one arrow with multiplicity 1 on both endpoints
    /// and q^β = q^γ = 1 on the two sides
    CaseII {
        beta: LatticeVector,
        gamma: LatticeVector,
    },
    /// support = extended Dynkin part (carrying hδ, h ≥ 2, q^δ = 1) joined
    /// by one arrow at an extending vertex k to a vertex j with α_j = 1
    CaseIII {
        h: i64,
        delta: LatticeVector,
        j: Vertex,
        k: Vertex,
    },
    None,
}

/// Interprets a vertex set as a sub-star (center plus a prefix of each arm)
/// and, when that sub-star is extended Dynkin, returns its minimal positive
/// imaginary root in the ambient quiver's coordinates.
fn sub_star_delta(quiver: &StarQuiver, support: &[usize]) -> Option<LatticeVector> {
    let in_support = |v: usize| support.contains(&v);
    if !in_support(0) {
        return None;
    }
    let k = quiver.weights().arms();
    let mut prefix = vec![0usize; k];
    for &v in support {
        if v == 0 {
            continue;
        }
        let Vertex::Arm { arm, slot } = quiver.vertex_at(v) else {
            unreachable!()
        };
        prefix[arm] = prefix[arm].max(slot + 1);
    }
    // prefixes must be gap-free
    let total: usize = prefix.iter().sum();
    if total + 1 != support.len() {
        return None;
    }
    for (arm, &len) in prefix.iter().enumerate() {
        for slot in 0..len {
            if !in_support(quiver.index_of(Vertex::Arm { arm, slot })?) {
                return None;
            }
        }
    }
    let sub_weights: Vec<usize> = prefix.iter().filter(|&&l| l > 0).map(|&l| l + 1).collect();
    let sub = build_star(WeightSequence::new(if sub_weights.is_empty() {
        vec![1]
    } else {
        sub_weights
    })
    .ok()?);
    match sub.classify() {
        QuiverClass::ExtendedDynkin { delta, .. } => {
            let mut amb = LatticeVector::zeros(quiver.vertex_count());
            amb.0[0] = delta.0[0];
            let mut sub_idx = 1usize;
            for (arm, &len) in prefix.iter().enumerate() {
                for slot in 0..len {
                    amb.0[quiver.index_of(Vertex::Arm { arm, slot })?] = delta.0[sub_idx];
                    sub_idx += 1;
                }
            }
            Some(amb)
        }
        _ => None,
    }
}

/// Splits the support along the arrow (t, h): returns (side of t, side of h)
/// as sorted vertex sets, or None if the support is not connected through
/// the remaining edges plus this one.
fn split_at_edge(
    quiver: &StarQuiver,
    support: &[usize],
    t: usize,
    h: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let in_support = |v: usize| support.contains(&v);
    let side = |start: usize, banned: (usize, usize)| -> Vec<usize> {
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &u in quiver.neighbors(v) {
                let crossing = (v, u) == banned || (u, v) == banned;
                if !crossing && in_support(u) && !seen.contains(&u) {
                    seen.push(u);
                    stack.push(u);
                }
            }
        }
        seen.sort_unstable();
        seen
    };
    let side_t = side(t, (t, h));
    let side_h = side(h, (t, h));
    if side_t.len() + side_h.len() == support.len() {
        Some((side_t, side_h))
    } else {
        None
    }
}

fn restrict(alpha: &LatticeVector, side: &[usize]) -> LatticeVector {
    let mut out = LatticeVector::zeros(alpha.len());
    for &v in side {
        out.0[v] = alpha.0[v];
    }
    out
}

/// Recognizes the reduced cases on the support quiver of α with q
/// restricted. A recognizer only: no equivalent-pair search happens here.
pub fn classify_case(quiver: &StarQuiver, p: &Pair) -> ReducedCase {
    let alpha = &p.alpha;
    if alpha.is_zero() || !alpha.is_nonnegative() || !quiver.support_connected(alpha) {
        return ReducedCase::None;
    }
    let support = alpha.support();

    // Case I: extended Dynkin support with α = h·m·δ, h ≥ 2, ord(q^δ) = m.
    if let Some(delta) = sub_star_delta(quiver, &support) {
        let c = alpha.0[0] / delta.0[0];
        if c >= 2 && alpha == &delta.scale(c) {
            let q_delta = q_pow(&p.q, &delta).expect("indexed by quiver");
            if let Order::Finite(m) = q_delta.order() {
                if c % m as i64 == 0 {
                    let h = c / m as i64;
                    if h >= 2 {
                        return ReducedCase::CaseI { m, h, delta };
                    }
                }
            }
        }
    }

    // Bridge cases: every arrow of the (tree) support is a bridge.
    let edges: Vec<(usize, usize)> = quiver
        .arrows()
        .iter()
        .copied()
        .filter(|&(t, h)| alpha.0[t] != 0 && alpha.0[h] != 0)
        .collect();

    // Case II: both endpoints have multiplicity 1 and both sides have
    // trivial character.
    for &(t, h) in &edges {
        if alpha.0[t] != 1 || alpha.0[h] != 1 {
            continue;
        }
        let Some((side_t, side_h)) = split_at_edge(quiver, &support, t, h) else {
            continue;
        };
        let beta = restrict(alpha, &side_t);
        let gamma = restrict(alpha, &side_h);
        let qb = q_pow(&p.q, &beta).expect("indexed by quiver");
        let qg = q_pow(&p.q, &gamma).expect("indexed by quiver");
        if qb.is_one() && qg.is_one() {
            return ReducedCase::CaseII { beta, gamma };
        }
    }

    // Case III: one side extended Dynkin with hδ (h ≥ 2), entered at an
    // extending vertex, the other endpoint with multiplicity 1.
    for &(t, h) in &edges {
        let Some((side_t, side_h)) = split_at_edge(quiver, &support, t, h) else {
            continue;
        };
        for ((j, j_side), (k, k_side)) in [
            ((t, &side_t), (h, &side_h)),
            ((h, &side_h), (t, &side_t)),
        ] {
            let _ = j_side;
            if alpha.0[j] != 1 {
                continue;
            }
            let Some(delta) = sub_star_delta(quiver, k_side) else {
                continue;
            };
            if delta.0[k] != 1 {
                continue; // k must be an extending vertex of the part
            }
            let part = restrict(alpha, k_side);
            let hh = part.0[0] / delta.0[0];
            if hh >= 2 && part == delta.scale(hh) {
                let q_delta = q_pow(&p.q, &delta).expect("indexed by quiver");
                if q_delta.is_one() {
                    return ReducedCase::CaseIII {
                        h: hh,
                        delta,
                        j: quiver.vertex_at(j),
                        k: quiver.vertex_at(k),
                    };
                }
            }
        }
    }

    ReducedCase::None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{build_star, WeightSequence};
    use crate::spectral::{q_from_xi, xi_from_strings};

    fn quiver(w: &[usize]) -> StarQuiver {
        build_star(WeightSequence::new(w.to_vec()).unwrap())
    }

    fn lv(coords: &[i64]) -> LatticeVector {
        LatticeVector(coords.to_vec())
    }

    fn q_of(quiver: &StarQuiver, arms: &[Vec<&str>]) -> CharacterQ {
        let xi = xi_from_strings(quiver.weights(), arms, None).unwrap();
        q_from_xi(quiver, &xi).unwrap()
    }

    #[test]
    fn admissibility() {
        let q3 = quiver(&[2, 2, 2]);
        let ones: Vec<Vec<&str>> = vec![vec!["1", "1"]; 3];
        let p = Pair::new(q_of(&q3, &ones), lv(&[2, 1, 1, 1]));
        assert!((0..4).all(|v| !admissible(v, &p)));

        let p2 = Pair::new(
            q_of(&q3, &[vec!["2", "3"], vec!["5", "7"], vec!["11", "13"]]),
            lv(&[2, 1, 1, 1]),
        );
        assert!((0..4).all(|v| admissible(v, &p2)));
    }

    #[test]
    fn reflect_pair_invariants() {
        let q3 = quiver(&[3, 2]);
        let p = Pair::new(
            q_of(&q3, &[vec!["2", "zeta(1/3)", "5"], vec!["-1", "7"]]),
            lv(&[3, 2, 1, 1]),
        );
        for v in 0..q3.vertex_count() {
            assert!(admissible(v, &p));
            let r = reflect_pair(&q3, v, &p);
            // u_v(q)_v = q_v^{-1}
            assert_eq!(r.q.value(v), &p.q.value(v).inv());
            // defining identity u_v(q)^{s_v(beta)} = q^beta on a few betas
            for beta in [lv(&[1, 0, 0, 0]), lv(&[2, 1, 1, 0]), lv(&[1, -1, 2, 3])] {
                let lhs = q_pow(&r.q, &q3.reflect(v, &beta)).unwrap();
                let rhs = q_pow(&p.q, &beta).unwrap();
                assert_eq!(lhs, rhs);
            }
            // involution
            assert!(admissible(v, &r));
            let rr = reflect_pair(&q3, v, &r);
            assert_eq!(rr, p);
        }
    }

    #[test]
    fn orbit_depth_zero_and_trivial_q() {
        let q3 = quiver(&[2, 2]);
        let ones: Vec<Vec<&str>> = vec![vec!["1", "1"]; 2];
        let p = Pair::new(q_of(&q3, &ones), lv(&[1, 1, 0]));
        let (orbit, closed) = orbit_explore(&q3, &p, 7);
        assert_eq!(orbit.len(), 1);
        assert!(closed);

        let p2 = Pair::new(
            q_of(&q3, &[vec!["2", "1/2"], vec!["3", "1/3"]]),
            lv(&[1, 1, 0]),
        );
        let (orbit0, _) = orbit_explore(&q3, &p2, 0);
        assert_eq!(orbit0.len(), 1);
        // q^alpha and p(alpha) are invariant across the orbit
        let (orbit, _) = orbit_explore(&q3, &p2, 4);
        let qa = q_pow(&p2.q, &p2.alpha).unwrap();
        let pa = q3.p(&p2.alpha);
        for member in &orbit {
            assert_eq!(q_pow(&member.q, &member.alpha).unwrap(), qa);
            assert_eq!(q3.p(&member.alpha), pa);
        }
    }

    #[test]
    fn in_fq_examples() {
        let q2 = quiver(&[2]);
        // q_11 = 1 and (epsilon_11, epsilon_11) = 2 > 0: immediate violation
        let p = Pair::new(q_of(&q2, &[vec!["2", "2"]]), lv(&[0, 1]));
        assert!(p.q.value(1).is_one());
        assert_eq!(in_fq(&q2, &p, 0), InFq::No);

        // delta pairs to zero with every vertex, and this q only takes
        // values +-1, so the orbit is finite and the answer a definite Yes
        let q4 = quiver(&[2, 2, 2, 2]);
        let arms: Vec<Vec<&str>> = vec![vec!["-1", "1"]; 4];
        let qc = q_of(&q4, &arms);
        let delta = lv(&[2, 1, 1, 1, 1]);
        assert!(q_pow(&qc, &delta).unwrap().is_one());
        let p = Pair::new(qc, delta);
        assert_eq!(in_fq(&q4, &p, 12), InFq::Yes);

        // same pair but explored to depth 0: the frontier is unexpanded
        assert_eq!(in_fq(&q4, &p, 0), InFq::Unknown);
    }

    #[test]
    fn classify_case_i() {
        let q4 = quiver(&[2, 2, 2, 2]);
        let p = Pair::new(
            q_of(
                &q4,
                &[
                    vec!["2", "1/2"],
                    vec!["3", "1/3"],
                    vec!["5", "1/5"],
                    vec!["7", "1/7"],
                ],
            ),
            lv(&[4, 2, 2, 2, 2]),
        );
        match classify_case(&q4, &p) {
            ReducedCase::CaseI { m, h, delta } => {
                assert_eq!(m, 1);
                assert_eq!(h, 2);
                assert_eq!(delta, lv(&[2, 1, 1, 1, 1]));
            }
            other => panic!("expected case I, got {other:?}"),
        }
    }

    #[test]
    fn classify_case_i_nontrivial_order() {
        // q^delta of order 2: alpha = 2delta has m = 2, h = 1 -> not case I;
        // alpha = 4delta has m = 2, h = 2 -> case I.
        let q4 = quiver(&[2, 2, 2, 2]);
        let qc = q_of(
            &q4,
            &[
                vec!["-2", "1/2"],
                vec!["3", "1/3"],
                vec!["5", "1/5"],
                vec!["7", "1/7"],
            ],
        );
        let delta = lv(&[2, 1, 1, 1, 1]);
        let p2 = Pair::new(qc.clone(), delta.scale(2));
        assert_eq!(classify_case(&q4, &p2), ReducedCase::None);
        let p4 = Pair::new(qc, delta.scale(4));
        match classify_case(&q4, &p4) {
            ReducedCase::CaseI { m, h, .. } => {
                assert_eq!(m, 2);
                assert_eq!(h, 2);
            }
            other => panic!("expected case I, got {other:?}"),
        }
    }

    #[test]
    fn classify_case_ii() {
        // (2,2,3): bridge on the long arm, multiplicity one at both ends,
        // characters vanish on both sides
        let q = quiver(&[2, 2, 3]);
        // vertices: *, [1,1], [2,1], [3,1], [3,2]
        let alpha = lv(&[1, 1, 1, 1, 1]);
        // q^{eps_32} = xi_32/xi_33 = 1 and q^{rest} = 1/(xi_12 xi_22 xi_32) = 1
        let qc = q_of(
            &q,
            &[vec!["2", "1/2"], vec!["3", "1/3"], vec!["5", "6", "6"]],
        );
        let p = Pair::new(qc, alpha);
        match classify_case(&q, &p) {
            ReducedCase::CaseII { beta, gamma } => {
                assert_eq!(beta.add(&gamma), p.alpha);
                let qb = q_pow(&p.q, &beta).unwrap();
                let qg = q_pow(&p.q, &gamma).unwrap();
                assert!(qb.is_one() && qg.is_one());
            }
            other => panic!("expected case II, got {other:?}"),
        }
    }

    #[test]
    fn classify_case_iii() {
        // (3,2,2,2): alpha = alpha_inf + 2*delta over the inner D4 star
        let q = quiver(&[3, 2, 2, 2]);
        // vertices: *, [1,1], [1,2], [2,1], [3,1], [4,1]
        let alpha = lv(&[4, 2, 1, 2, 2, 2]);
        let qc = q_of(
            &q,
            &[
                vec!["zeta(1/13)", "zeta(-1/13)", "zeta(-1/13)"],
                vec!["zeta(1/5)", "zeta(-1/5)"],
                vec!["zeta(1/7)", "zeta(-1/7)"],
                vec!["zeta(1/11)", "zeta(-1/11)"],
            ],
        );
        let p = Pair::new(qc, alpha);
        match classify_case(&q, &p) {
            ReducedCase::CaseIII { h, delta, j, k } => {
                assert_eq!(h, 2);
                assert_eq!(delta, lv(&[2, 1, 0, 1, 1, 1]));
                assert_eq!(j, Vertex::Arm { arm: 0, slot: 1 });
                assert_eq!(k, Vertex::Arm { arm: 0, slot: 0 });
            }
            other => panic!("expected case III, got {other:?}"),
        }
    }

    #[test]
    fn classify_generic_is_none() {
        let q = quiver(&[7, 3, 2]);
        let mut alpha = LatticeVector::zeros(q.vertex_count());
        alpha.0[0] = 3;
        for v in 1..q.vertex_count() {
            alpha.0[v] = 1;
        }
        let qc = q_of(
            &q,
            &[
                vec!["2", "3", "5", "7", "11", "13", "17"],
                vec!["19", "23", "29"],
                vec!["31", "37"],
            ],
        );
        assert_eq!(classify_case(&q, &Pair::new(qc, alpha)), ReducedCase::None);
    }
}
