//! Solvability decisions and certificates.
//!
//! Write R̄⁺_q for the positive roots α with q^α = 1, ℕR̄⁺_q for finite sums
//! of them, and Σ̄_q for the α ∈ R̄⁺_q admitting no decomposition
//! α = β+γ+… into ≥ 2 parts from R̄⁺_q with p(α) ≤ p(β)+p(γ)+…. An
//! irreducible solution tuple exists iff α is a positive root, ξ^[α] = 1
//! and α ∈ Σ̄_{q_C}. Membership is decided twice, by independent routes:
//!
//! * by definition — canonical non-increasing multiset enumeration of
//!   decompositions, which also produces the violating certificate;
//! * by pairing — 0 ≠ α ∈ ℕR̄⁺_q (subset-sum reachability DP) and
//!   (β, α−β) ≤ −2 for every split with β, α−β nonzero in ℕR̄⁺_q.
//!
//! The two must agree; a disagreement is a bug and panics loudly.

use thiserror::Error;

use crate::quiver::{LatticeVector, QuiverError, RootKind, StarQuiver};
use crate::spectral::{q_from_xi, q_pow, CharacterQ, ProblemInstance, SpectralError};
use crate::value::MValue;

/// Caps on search sizes. Exceeding one yields an Unknown verdict, never a
/// silent wrong answer.
#[derive(Debug, Clone, Copy)]
pub struct Guards {
    /// max volume of any coordinate box that gets scanned or tabulated
    pub max_box: u64,
    /// max nodes explored by the decomposition enumeration
    pub max_decomps: u64,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_box: 10_000_000,
            max_decomps: 1_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum DecideError {
    #[error("{0}")]
    Guard(String),
    #[error("alpha {alpha} is outside the context bound {bound}")]
    OutOfBounds { alpha: String, bound: String },
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Solvable,
    Unsolvable,
    Unknown,
}

/// Machine-checkable evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    None,
    NotStrict,
    NotPositiveRoot,
    /// the value of ξ^[α] (equivalently 1/q^α), which is not 1
    CharacterNotOne(MValue),
    /// a decomposition α = Σ parts into character-trivial positive roots
    /// with p(α) ≤ Σ p(part)
    ViolatingDecomposition {
        parts: Vec<LatticeVector>,
        part_p: Vec<i64>,
        p_alpha: i64,
    },
    EncodingUnsupported(String),
    GuardExceeded(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub certificate: Certificate,
}

impl Verdict {
    fn solvable() -> Self {
        Verdict {
            status: Status::Solvable,
            certificate: Certificate::None,
        }
    }

    fn unsolvable(certificate: Certificate) -> Self {
        Verdict {
            status: Status::Unsolvable,
            certificate,
        }
    }

    fn unknown(certificate: Certificate) -> Self {
        Verdict {
            status: Status::Unknown,
            certificate,
        }
    }
}

/// True iff `a` is a positive root with q^a = 1.
pub fn in_rq(quiver: &StarQuiver, q: &CharacterQ, a: &LatticeVector) -> Result<bool, DecideError> {
    if a.is_zero() || !a.is_nonnegative() {
        return Ok(false);
    }
    if quiver.positive_root_kind(a)? == RootKind::NotRoot {
        return Ok(false);
    }
    Ok(q_pow(q, a)?.is_one())
}

/// Reusable decision state for one (quiver, q) pair over the box [0, bound]:
/// the character-trivial roots in the box, and the subset-sum reachability
/// table for ℕR̄⁺_q. All queries must stay inside the bound.
pub struct DeciderContext<'a> {
    quiver: &'a StarQuiver,
    q: &'a CharacterQ,
    guards: Guards,
    bound: LatticeVector,
    strides: Vec<u64>,
    volume: u64,
    /// character-trivial positive roots ≤ bound, lexicographically decreasing
    trivial: Vec<LatticeVector>,
    trivial_p: Vec<i64>,
    trivial_rank: Vec<u64>,
    /// dense reachability table over the box, built on first use
    reach: Option<Vec<bool>>,
    /// explicit reachable list when small enough to pay off
    reach_list: Option<Vec<LatticeVector>>,
}

const REACH_LIST_CAP: usize = 1 << 17;

impl<'a> DeciderContext<'a> {
    pub fn new(
        quiver: &'a StarQuiver,
        q: &'a CharacterQ,
        bound: &LatticeVector,
        guards: Guards,
    ) -> Result<Self, DecideError> {
        let roots = quiver.positive_roots_below(bound, guards.max_box)?;
        Self::with_roots(quiver, q, bound, guards, &roots)
    }

    /// Like `new`, but reusing a previously computed list of the positive
    /// roots below `bound` (in the order `positive_roots_below` returns).
    pub fn with_roots(
        quiver: &'a StarQuiver,
        q: &'a CharacterQ,
        bound: &LatticeVector,
        guards: Guards,
        roots: &[LatticeVector],
    ) -> Result<Self, DecideError> {
        let volume: u128 = bound.0.iter().map(|&x| (x.max(0) as u128) + 1).product();
        if volume > guards.max_box as u128 {
            return Err(DecideError::Guard(format!(
                "bounding box volume {volume} exceeds max-box {}",
                guards.max_box
            )));
        }
        let volume = volume as u64;
        let n = bound.len();
        let mut strides = vec![1u64; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * ((bound.0[i + 1].max(0) as u64) + 1);
        }
        let mut trivial: Vec<LatticeVector> = Vec::new();
        for r in roots {
            if q_pow(q, r)?.is_one() {
                trivial.push(r.clone());
            }
        }
        trivial.sort_by(|a, b| b.cmp(a));
        let trivial_p = trivial.iter().map(|r| quiver.p(r)).collect();
        let trivial_rank = trivial
            .iter()
            .map(|r| r.0.iter().zip(&strides).map(|(&x, &s)| x as u64 * s).sum())
            .collect();
        Ok(DeciderContext {
            quiver,
            q,
            guards,
            bound: bound.clone(),
            strides,
            volume,
            trivial,
            trivial_p,
            trivial_rank,
            reach: None,
            reach_list: None,
        })
    }

    pub fn trivial_roots(&self) -> &[LatticeVector] {
        &self.trivial
    }

    fn rank_of(&self, a: &LatticeVector) -> u64 {
        a.0.iter().zip(&self.strides).map(|(&x, &s)| x as u64 * s).sum()
    }

    fn check_bound(&self, a: &LatticeVector) -> Result<(), DecideError> {
        if a.is_nonnegative() && a.le(&self.bound) {
            Ok(())
        } else {
            Err(DecideError::OutOfBounds {
                alpha: a.to_string(),
                bound: self.bound.to_string(),
            })
        }
    }

    /// Bottom-up subset-sum DP: reach[v] ⇔ v is a (possibly empty) sum of
    /// character-trivial roots.
    fn ensure_reach(&mut self) {
        if self.reach.is_some() {
            return;
        }
        let v = self.volume as usize;
        let mut reach = vec![false; v];
        reach[0] = true;
        let mut list: Vec<LatticeVector> = Vec::new();
        let mut coords = LatticeVector::zeros(self.bound.len());
        for idx in 0..v {
            if idx > 0 {
                // odometer step, last coordinate fastest (matches the strides)
                let mut pos = self.bound.len();
                loop {
                    pos -= 1;
                    if coords.0[pos] < self.bound.0[pos] {
                        coords.0[pos] += 1;
                        for x in &mut coords.0[pos + 1..] {
                            *x = 0;
                        }
                        break;
                    }
                }
                for (r, &rrank) in self.trivial.iter().zip(&self.trivial_rank) {
                    if r.le(&coords) && reach[idx - rrank as usize] {
                        reach[idx] = true;
                        break;
                    }
                }
            }
            if reach[idx] && idx > 0 && list.len() < REACH_LIST_CAP {
                list.push(coords.clone());
            }
        }
        let count = reach.iter().filter(|&&b| b).count() - 1;
        self.reach_list = if count <= REACH_LIST_CAP { Some(list) } else { None };
        self.reach = Some(reach);
    }

    /// a ∈ ℕR̄⁺_q, with the empty sum excluded: false for a = 0.
    pub fn in_nrq(&mut self, a: &LatticeVector) -> Result<bool, DecideError> {
        self.check_bound(a)?;
        if a.is_zero() {
            return Ok(false);
        }
        self.ensure_reach();
        let idx = self.rank_of(a) as usize;
        Ok(self.reach.as_ref().expect("built")[idx])
    }

    /// First decomposition of `a` into ≥ 2 character-trivial positive roots
    /// with p(a) ≤ Σ p(parts), in canonical non-increasing lexicographic
    /// order; None when no decomposition violates.
    pub fn violating_decomposition(
        &mut self,
        a: &LatticeVector,
    ) -> Result<Option<Vec<LatticeVector>>, DecideError> {
        self.check_bound(a)?;
        let p_alpha = self.quiver.p(a);
        let mut nodes = 0u64;
        let mut parts: Vec<usize> = Vec::new();
        let found = self.dfs_decompose(a.clone(), 0, 0, p_alpha, &mut parts, &mut nodes)?;
        Ok(found.then(|| parts.iter().map(|&i| self.trivial[i].clone()).collect()))
    }

    fn dfs_decompose(
        &self,
        residual: LatticeVector,
        min_idx: usize,
        sum_p: i64,
        p_alpha: i64,
        parts: &mut Vec<usize>,
        nodes: &mut u64,
    ) -> Result<bool, DecideError> {
        *nodes += 1;
        if *nodes > self.guards.max_decomps {
            return Err(DecideError::Guard(format!(
                "decomposition enumeration exceeded max-decomps {}",
                self.guards.max_decomps
            )));
        }
        if residual.is_zero() {
            return Ok(parts.len() >= 2 && sum_p >= p_alpha);
        }
        for i in min_idx..self.trivial.len() {
            if !self.trivial[i].le(&residual) {
                continue;
            }
            parts.push(i);
            let next = residual.sub(&self.trivial[i]);
            if self.dfs_decompose(next, i, sum_p + self.trivial_p[i], p_alpha, parts, nodes)? {
                return Ok(true);
            }
            parts.pop();
        }
        Ok(false)
    }

    /// Σ̄_q membership by the defining decomposition condition.
    pub fn sigma_by_definition(&mut self, a: &LatticeVector) -> Result<bool, DecideError> {
        if !in_rq(self.quiver, self.q, a)? {
            return Ok(false);
        }
        Ok(self.violating_decomposition(a)?.is_none())
    }

    /// Σ̄_q membership by the pairing characterization: 0 ≠ a ∈ ℕR̄⁺_q and
    /// (β, a−β) ≤ −2 whenever β and a−β are nonzero and in ℕR̄⁺_q.
    pub fn sigma_by_pairing(&mut self, a: &LatticeVector) -> Result<bool, DecideError> {
        self.check_bound(a)?;
        if a.is_zero() || !self.in_nrq(a)? {
            return Ok(false);
        }
        // sym(β, a−β) = sym(β, a) − 2q(β); precompute sym(ε_v, a)
        let sym_a: Vec<i64> = (0..self.quiver.vertex_count())
            .map(|v| self.quiver.sym_simple(a, v))
            .collect();
        let a_rank = self.rank_of(a);
        let reach = self.reach.as_ref().expect("built by in_nrq");
        let split_ok = |beta: &LatticeVector| -> bool {
            let gamma = a.sub(beta);
            // scan each unordered split once
            if beta.0 > gamma.0 {
                return true;
            }
            let sym_beta_a: i64 = beta.0.iter().zip(&sym_a).map(|(&b, &s)| b * s).sum();
            sym_beta_a - 2 * self.quiver.q(beta) <= -2
        };
        if let Some(list) = &self.reach_list {
            for beta in list {
                if !beta.le(a) || beta == a {
                    continue;
                }
                let idx = (a_rank - self.rank_of(beta)) as usize;
                if reach[idx] && !split_ok(beta) {
                    return Ok(false);
                }
            }
        } else {
            // odometer over [0, a]
            let mut beta = LatticeVector::zeros(a.len());
            loop {
                let next = {
                    let mut pos = a.len();
                    loop {
                        if pos == 0 {
                            break false;
                        }
                        pos -= 1;
                        if beta.0[pos] < a.0[pos] {
                            beta.0[pos] += 1;
                            for x in &mut beta.0[pos + 1..] {
                                *x = 0;
                            }
                            break true;
                        }
                    }
                };
                if !next {
                    break;
                }
                if beta == *a {
                    continue;
                }
                let b_idx = self.rank_of(&beta) as usize;
                let g_idx = (a_rank - b_idx as u64) as usize;
                if reach[b_idx] && reach[g_idx] && !split_ok(&beta) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Standalone Σ̄_q membership via the decomposition definition.
pub fn sigma_by_definition(
    quiver: &StarQuiver,
    q: &CharacterQ,
    a: &LatticeVector,
    guards: Guards,
) -> Result<bool, DecideError> {
    if a.is_zero() || !a.is_nonnegative() {
        return Ok(false);
    }
    DeciderContext::new(quiver, q, a, guards)?.sigma_by_definition(a)
}

/// Standalone Σ̄_q membership via the pairing characterization.
pub fn sigma_by_pairing(
    quiver: &StarQuiver,
    q: &CharacterQ,
    a: &LatticeVector,
    guards: Guards,
) -> Result<bool, DecideError> {
    if a.is_zero() || !a.is_nonnegative() {
        return Ok(false);
    }
    DeciderContext::new(quiver, q, a, guards)?.sigma_by_pairing(a)
}

/// Standalone ℕR̄⁺_q membership.
pub fn in_nrq(
    quiver: &StarQuiver,
    q: &CharacterQ,
    a: &LatticeVector,
    guards: Guards,
) -> Result<bool, DecideError> {
    if a.is_zero() || !a.is_nonnegative() {
        return Ok(false);
    }
    DeciderContext::new(quiver, q, a, guards)?.in_nrq(a)
}

/// The root-theoretic criterion at the (quiver, q, α) level: α a positive
/// root, q^α = 1, and α ∈ Σ̄_q — the latter by both routes, which must
/// agree. Strictness of α is an instance-level concern and not checked
/// here, so the verdict is invariant under admissible reflections.
pub fn decide_core(
    quiver: &StarQuiver,
    q: &CharacterQ,
    alpha: &LatticeVector,
    guards: Guards,
) -> Verdict {
    if alpha.is_zero()
        || !alpha.is_nonnegative()
        || quiver
            .positive_root_kind(alpha)
            .expect("nonzero alpha")
            == RootKind::NotRoot
    {
        return Verdict::unsolvable(Certificate::NotPositiveRoot);
    }
    let q_alpha = q_pow(q, alpha).expect("q indexed by the quiver");
    if !q_alpha.is_one() {
        // ξ^[α] = 1/q^α
        return Verdict::unsolvable(Certificate::CharacterNotOne(q_alpha.inv()));
    }
    let mut ctx = match DeciderContext::new(quiver, q, alpha, guards) {
        Ok(ctx) => ctx,
        Err(DecideError::Guard(msg)) => {
            return Verdict::unknown(Certificate::GuardExceeded(msg))
        }
        Err(e) => panic!("decide_core: {e}"),
    };
    let witness = match ctx.violating_decomposition(alpha) {
        Ok(w) => w,
        Err(DecideError::Guard(msg)) => {
            return Verdict::unknown(Certificate::GuardExceeded(msg))
        }
        Err(e) => panic!("decide_core: {e}"),
    };
    let by_def = witness.is_none();
    match ctx.sigma_by_pairing(alpha) {
        Ok(by_pair) => assert_eq!(
            by_def, by_pair,
            "sigma routes disagree at alpha = {alpha}; this is a bug"
        ),
        Err(DecideError::Guard(msg)) => {
            return Verdict::unknown(Certificate::GuardExceeded(msg))
        }
        Err(e) => panic!("decide_core: {e}"),
    }
    match witness {
        None => Verdict::solvable(),
        Some(parts) => {
            let part_p = parts.iter().map(|b| quiver.p(b)).collect();
            Verdict::unsolvable(Certificate::ViolatingDecomposition {
                parts,
                part_p,
                p_alpha: quiver.p(alpha),
            })
        }
    }
}

/// Full decision for a validated problem instance.
pub fn decide_dsp(inst: &ProblemInstance, guards: Guards) -> Verdict {
    if !inst.quiver.is_strict(&inst.alpha) {
        return Verdict::unsolvable(Certificate::NotStrict);
    }
    let q = q_from_xi(&inst.quiver, &inst.xi).expect("validated xi table");
    decide_core(&inst.quiver, &q, &inst.alpha, guards)
}
