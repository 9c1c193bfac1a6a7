//! Floating-point search for explicit solution tuples.
//!
//! Candidates are parametrized by g_i ∈ GL_n with A_i = g_i J_i g_i^{-1},
//! where J_i is a fixed representative of the i-th class. The objective is
//! the squared Frobenius norm of A_1⋯A_k − 1, minimized by multi-start
//! gradient descent with backtracking line search followed by a
//! Levenberg-damped Gauss-Newton polish. Irreducibility of a candidate is
//! judged by the Burnside span: the tuple is irreducible iff words in the
//! A_i span the full matrix algebra.
//!
//! This is a semi-oracle. Failure to find a solution proves nothing; the
//! only contradiction it can produce is a margin-validated irreducible
//! candidate where the exact decider says Unsolvable.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::decider::{decide_dsp, Guards, Status, Verdict};
use crate::spectral::{ProblemInstance, SpectralError};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("symbolic eigenvalues have no complex value; the oracle needs cyclo data")]
    EncodingUnsupported,
    #[error("g_{index} is numerically singular (condition > {cond:.1e})")]
    NearSingular { index: usize, cond: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// The fixed class representatives J_i.
#[derive(Debug, Clone)]
pub struct OracleProblem {
    pub n: usize,
    pub classes: Vec<CMat>,
}

impl OracleProblem {
    pub fn from_instance(inst: &ProblemInstance) -> Result<Self, OracleError> {
        if inst.is_sym() {
            return Err(OracleError::EncodingUnsupported);
        }
        let n = inst.n();
        let classes = match &inst.matrices {
            Some(mats) => mats.to_complex(),
            None => {
                let mut classes = Vec::new();
                for arm in 0..inst.quiver.weights().arms() {
                    let realized = inst.realize_arm(arm)?;
                    classes.push(
                        realized
                            .to_complex_matrix()
                            .ok_or(OracleError::EncodingUnsupported)?,
                    );
                }
                classes
            }
        };
        Ok(OracleProblem { n, classes })
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }
}

/// One point of the search space: the conjugating matrices.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub g: Vec<CMat>,
}

impl Candidate {
    /// The induced tuple A_i = g_i J_i g_i^{-1}; None if some g_i is singular.
    pub fn conjugated(&self, prob: &OracleProblem) -> Option<Vec<CMat>> {
        self.g
            .iter()
            .zip(&prob.classes)
            .map(|(g, j)| g.clone().try_inverse().map(|gi| g * j * gi))
            .collect()
    }
}

fn product(mats: &[CMat], n: usize) -> CMat {
    let mut p = CMat::identity(n, n);
    for m in mats {
        p = &p * m;
    }
    p
}

/// Squared Frobenius norm of A_1⋯A_k − 1.
pub fn residual(prob: &OracleProblem, cand: &Candidate) -> f64 {
    match cand.conjugated(prob) {
        Some(a) => {
            let mut p = product(&a, prob.n);
            for i in 0..prob.n {
                p[(i, i)] -= C64::new(1.0, 0.0);
            }
            p.norm_squared()
        }
        None => f64::INFINITY,
    }
}

/// The complex-matrix form of the gradient: G_i with
/// ∂r/∂Re g_i[p,q] = Re G_i[p,q] and ∂r/∂Im g_i[p,q] = Im G_i[p,q].
/// Steepest descent in the real parametrization is g_i ← g_i − t·G_i.
fn grad_matrices(prob: &OracleProblem, cand: &Candidate) -> Result<Vec<CMat>, OracleError> {
    let n = prob.n;
    let k = prob.k();
    let mut g_inv = Vec::with_capacity(k);
    for (i, g) in cand.g.iter().enumerate() {
        let cond = condition(g);
        if !cond.is_finite() || cond > 1e12 {
            return Err(OracleError::NearSingular {
                index: i,
                cond,
            });
        }
        g_inv.push(g.clone().try_inverse().ok_or(OracleError::NearSingular {
            index: i,
            cond: f64::INFINITY,
        })?);
    }
    let a: Vec<CMat> = (0..k)
        .map(|i| &cand.g[i] * &prob.classes[i] * &g_inv[i])
        .collect();
    // prefixes L_i = A_1…A_{i−1}, suffixes R_i = A_{i+1}…A_k
    let mut prefix = vec![CMat::identity(n, n)];
    for m in &a {
        let last = prefix.last().unwrap() * m;
        prefix.push(last);
    }
    let mut suffix = vec![CMat::identity(n, n); k + 1];
    for i in (0..k).rev() {
        suffix[i] = &a[i] * &suffix[i + 1];
    }
    let mut p = prefix[k].clone();
    for i in 0..n {
        p[(i, i)] -= C64::new(1.0, 0.0);
    }
    let p_adj = p.adjoint();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        // dr = 2 Re tr(W_i dg_i) with W_i = J_i g_i^{-1} M_i − g_i^{-1} M_i A_i,
        // M_i = R_{i+1} P* L_i
        let m_i = &suffix[i + 1] * &p_adj * &prefix[i];
        let w = &prob.classes[i] * &g_inv[i] * &m_i - &g_inv[i] * &m_i * &a[i];
        // G_i[p,q] = 2·conj(W_i[q,p])
        out.push(w.adjoint().scale(2.0));
    }
    Ok(out)
}

fn condition(m: &CMat) -> f64 {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Flat real gradient: for each i, then each entry (p,q) in row-major
/// order, the pair (∂r/∂Re g_i[p,q], ∂r/∂Im g_i[p,q]).
pub fn grad_residual(prob: &OracleProblem, cand: &Candidate) -> Result<Vec<f64>, OracleError> {
    let mats = grad_matrices(prob, cand)?;
    let n = prob.n;
    let mut flat = Vec::with_capacity(prob.k() * 2 * n * n);
    for g in &mats {
        for p in 0..n {
            for q in 0..n {
                flat.push(g[(p, q)].re);
                flat.push(g[(p, q)].im);
            }
        }
    }
    Ok(flat)
}

/// Search budget and reproducibility knobs.
#[derive(Debug, Clone, Copy)]
pub struct SearchOpts {
    pub restarts: u64,
    /// gradient-descent iterations per restart (the polish adds a fixed 60)
    pub iters: u64,
    /// accept a candidate when the squared-norm residual drops below this
    pub tol: f64,
    pub seed: u64,
    /// word length for the Burnside span; None means n²
    pub maxlen: Option<usize>,
}

impl Default for SearchOpts {
    fn default() -> Self {
        SearchOpts {
            restarts: 50,
            iters: 300,
            tol: 1e-8,
            seed: 20_2508,
            maxlen: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub residual: f64,
    pub irreducible: bool,
    pub word_rank: usize,
    pub restarts_used: u64,
    pub seed: u64,
    /// σ_{n²}/σ_1 of the word-span matrix; the irreducibility margin
    pub sigma_ratio: f64,
}

#[derive(Debug)]
pub enum SearchResult {
    Found {
        candidate: Candidate,
        report: OracleReport,
    },
    NotFound {
        best_residual: f64,
        restarts_used: u64,
    },
}

fn random_candidate(prob: &OracleProblem, rng: &mut ChaCha8Rng) -> Candidate {
    let n = prob.n;
    let sample = |rng: &mut ChaCha8Rng| -> CMat {
        for _ in 0..32 {
            let m = CMat::from_fn(n, n, |_, _| {
                C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
            });
            if condition(&m) < 1e6 {
                return m;
            }
        }
        CMat::identity(n, n)
    };
    Candidate {
        g: (0..prob.k()).map(|_| sample(rng)).collect(),
    }
}

fn add_scaled(g: &[CMat], dir: &[CMat], t: f64) -> Vec<CMat> {
    g.iter()
        .zip(dir)
        .map(|(m, d)| m + d.scale(t))
        .collect()
}

/// One restart: gradient descent with Armijo backtracking, then a
/// Levenberg-damped Gauss-Newton polish.
fn run_restart(prob: &OracleProblem, seed: u64, iters: u64, tol: f64) -> (Candidate, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cand = random_candidate(prob, &mut rng);
    let mut f = residual(prob, &cand);
    let mut step = 1e-2;
    for _ in 0..iters {
        if f < tol {
            break;
        }
        let Ok(grad) = grad_matrices(prob, &cand) else {
            break;
        };
        let g2: f64 = grad.iter().map(|g| g.norm_squared()).sum();
        if g2 < 1e-24 {
            break;
        }
        let dir: Vec<CMat> = grad.iter().map(|g| g.scale(-1.0)).collect();
        let mut t = step;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = Candidate {
                g: add_scaled(&cand.g, &dir, t),
            };
            let f_trial = residual(prob, &trial);
            if f_trial <= f - 1e-4 * t * g2 {
                cand = trial;
                f = f_trial;
                step = (t * 1.5).min(1.0);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (polished, f_polished) = gauss_newton_polish(prob, cand.clone(), f, 60);
    if f_polished < f {
        (polished, f_polished)
    } else {
        (cand, f)
    }
}

/// vec of the real and imaginary parts of P = A_1⋯A_k − 1.
fn residual_vector(prob: &OracleProblem, a: &[CMat]) -> DVector<f64> {
    let n = prob.n;
    let mut p = product(a, n);
    for i in 0..n {
        p[(i, i)] -= C64::new(1.0, 0.0);
    }
    let mut v = DVector::zeros(2 * n * n);
    for (idx, z) in p.iter().enumerate() {
        v[2 * idx] = z.re;
        v[2 * idx + 1] = z.im;
    }
    v
}

fn gauss_newton_polish(
    prob: &OracleProblem,
    mut cand: Candidate,
    mut f: f64,
    iters: u64,
) -> (Candidate, f64) {
    let n = prob.n;
    let k = prob.k();
    let params = 2 * k * n * n;
    let mut lambda = 1e-8;
    for _ in 0..iters {
        if f < 1e-26 || lambda > 1e10 {
            break;
        }
        let Some(a) = cand.conjugated(prob) else { break };
        let g_inv: Option<Vec<CMat>> = cand.g.iter().map(|g| g.clone().try_inverse()).collect();
        let Some(g_inv) = g_inv else { break };
        let mut prefix = vec![CMat::identity(n, n)];
        for m in &a {
            let last = prefix.last().unwrap() * m;
            prefix.push(last);
        }
        let mut suffix = vec![CMat::identity(n, n); k + 1];
        for i in (0..k).rev() {
            suffix[i] = &a[i] * &suffix[i + 1];
        }
        let fvec = residual_vector(prob, &a);
        // real Jacobian, one complex perturbation dP per (i,p,q)
        let mut jac = DMatrix::<f64>::zeros(2 * n * n, params);
        for i in 0..k {
            let jg = &prob.classes[i] * &g_inv[i]; // J_i g_i^{-1}
            let jg_r = &jg * &suffix[i + 1]; // row q is JG[q,:]·R_i
            let gi_r = &g_inv[i] * &suffix[i + 1];
            let la = &prefix[i] * &a[i];
            for p in 0..n {
                let lcol = prefix[i].column(p).into_owned();
                let lacol = la.column(p).into_owned();
                for q in 0..n {
                    // dP = L_i (E J g^{-1} − A E g^{-1}) R_i for E = e_p e_q^T
                    let row_jg = jg_r.row(q).into_owned();
                    let row_gi = gi_r.row(q).into_owned();
                    let dp = &lcol * &row_jg - &lacol * &row_gi;
                    let col = 2 * (i * n * n + p * n + q);
                    for (idx, z) in dp.iter().enumerate() {
                        jac[(2 * idx, col)] = z.re;
                        jac[(2 * idx + 1, col)] = z.im;
                        // perturbation by i·E multiplies dP by i
                        jac[(2 * idx, col + 1)] = -z.im;
                        jac[(2 * idx + 1, col + 1)] = z.re;
                    }
                }
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtf = jac.transpose() * &fvec;
        let mut improved = false;
        for _ in 0..8 {
            let mut damped = jtj.clone();
            for d in 0..params {
                damped[(d, d)] += lambda * (jtj[(d, d)].abs() + 1e-12);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&jtf));
            let mut trial = cand.clone();
            for i in 0..k {
                for p in 0..n {
                    for q in 0..n {
                        let base = 2 * (i * n * n + p * n + q);
                        trial.g[i][(p, q)] += C64::new(delta[base], delta[base + 1]);
                    }
                }
            }
            let f_trial = residual(prob, &trial);
            if f_trial < f {
                cand = trial;
                f = f_trial;
                lambda = (lambda * 0.3).max(1e-14);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (cand, f)
}

/// Detail of a Burnside-span computation.
#[derive(Debug, Clone, Copy)]
pub struct BurnsideReport {
    pub word_rank: usize,
    /// σ_{n²}/σ_1 of the column matrix of all generated word vectors
    pub sigma_ratio: f64,
    /// rank = n² with the σ-margin honored
    pub irreducible: bool,
}

const IRREDUCIBILITY_MARGIN: f64 = 1e-6;

/// Dimension of the span of all words in the A_i of length ≤ maxlen.
///
/// Words beyond length n² cannot enlarge the span (the filtration of the
/// generated algebra stabilizes as soon as one step adds nothing), so
/// maxlen is clamped there. Frontier words that already lie in the span
/// are dropped; their products stay inside the span of the kept ones.
pub fn burnside_rank(mats: &[CMat], maxlen: usize) -> BurnsideReport {
    let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
    if n == 0 {
        return BurnsideReport {
            word_rank: 0,
            sigma_ratio: 0.0,
            irreducible: false,
        };
    }
    let dim = n * n;
    let maxlen = maxlen.min(dim).max(1);
    let normalize = |m: &CMat| -> Option<DVector<C64>> {
        let v = DVector::from_column_slice(m.as_slice());
        let norm = v.norm();
        (norm > 1e-300).then(|| v.unscale(norm))
    };
    let mut basis: Vec<DVector<C64>> = Vec::new();
    let mut all_vecs: Vec<DVector<C64>> = Vec::new();
    let push = |m: &CMat, basis: &mut Vec<DVector<C64>>, all: &mut Vec<DVector<C64>>| -> bool {
        let Some(v) = normalize(m) else { return false };
        all.push(v.clone());
        let mut r = v;
        for b in basis.iter() {
            let c = b.dotc(&r);
            r -= b * c;
        }
        let norm = r.norm();
        if norm > 1e-7 {
            basis.push(r.unscale(norm));
            true
        } else {
            false
        }
    };
    let ident = CMat::identity(n, n);
    push(&ident, &mut basis, &mut all_vecs);
    let mut frontier = vec![ident];
    for _ in 1..=maxlen {
        let mut next = Vec::new();
        for w in &frontier {
            for a in mats {
                let prod = w * a;
                if push(&prod, &mut basis, &mut all_vecs) {
                    next.push(prod);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let word_rank = basis.len();
    // σ margin over every generated word vector
    let mut gram = DMatrix::<C64>::zeros(dim, dim);
    for v in &all_vecs {
        gram += v * v.adjoint();
    }
    let eig = gram.symmetric_eigenvalues();
    let mut vals: Vec<f64> = eig.iter().map(|&x| x.max(0.0).sqrt()).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sigma_ratio = if vals[0] > 0.0 { vals[dim - 1] / vals[0] } else { 0.0 };
    BurnsideReport {
        word_rank,
        sigma_ratio,
        irreducible: word_rank == dim && sigma_ratio > IRREDUCIBILITY_MARGIN,
    }
}

/// Multi-start search; returns the first candidate (by restart index)
/// whose residual is below the tolerance. Deterministic for a fixed seed.
pub fn search(prob: &OracleProblem, opts: &SearchOpts) -> SearchResult {
    let maxlen = opts.maxlen.unwrap_or(prob.n * prob.n);
    let chunk = rayon::current_num_threads().max(1) * 2;
    let mut best = f64::INFINITY;
    let mut done = 0u64;
    while done < opts.restarts {
        let upto = (done + chunk as u64).min(opts.restarts);
        let results: Vec<(u64, Candidate, f64)> = (done..upto)
            .into_par_iter()
            .map(|r| {
                let (cand, f) = run_restart(prob, opts.seed.wrapping_add(r), opts.iters, opts.tol);
                (r, cand, f)
            })
            .collect();
        for (r, cand, f) in results {
            best = best.min(f);
            if f < opts.tol {
                let a = cand.conjugated(prob).expect("converged candidate");
                let b = burnside_rank(&a, maxlen);
                return SearchResult::Found {
                    candidate: cand,
                    report: OracleReport {
                        residual: f,
                        irreducible: b.irreducible,
                        word_rank: b.word_rank,
                        restarts_used: r + 1,
                        seed: opts.seed,
                        sigma_ratio: b.sigma_ratio,
                    },
                };
            }
        }
        done = upto;
    }
    SearchResult::NotFound {
        best_residual: best,
        restarts_used: opts.restarts,
    }
}

/// Joint outcome of the exact decider and the numeric search.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossOutcome {
    /// exact Solvable, and an irreducible candidate was found
    ExactSolvableFound {
        residual: f64,
        word_rank: usize,
        restarts_used: u64,
    },
    /// exact Solvable, search budget exhausted (not a refutation)
    ExactSolvableNotFound { best_residual: f64 },
    /// exact Unsolvable, and no converged candidate was irreducible
    ExactUnsolvableNoIrreducible {
        converged: u64,
        best_residual: f64,
    },
    /// exact Unsolvable but an irreducible candidate converged: a bug
    Conflict {
        residual: f64,
        word_rank: usize,
        sigma_ratio: f64,
    },
    /// the exact decider gave Unknown (guards) or the oracle cannot run
    Inconclusive(String),
}

#[derive(Debug)]
pub struct CrossReport {
    pub verdict: Verdict,
    pub outcome: CrossOutcome,
    pub seed: u64,
}

impl CrossReport {
    pub fn is_conflict(&self) -> bool {
        matches!(self.outcome, CrossOutcome::Conflict { .. })
    }
}

/// Runs the exact decider and the numeric search against each other.
///
/// For an exact Solvable, restarts run until some converged candidate is
/// irreducible. For an exact Unsolvable, every restart runs and every
/// converged candidate must fail the irreducibility margin; one that
/// passes is reported as a Conflict.
pub fn cross_validate(inst: &ProblemInstance, guards: Guards, opts: &SearchOpts) -> CrossReport {
    let verdict = decide_dsp(inst, guards);
    let prob = match OracleProblem::from_instance(inst) {
        Ok(p) => p,
        Err(e) => {
            return CrossReport {
                outcome: CrossOutcome::Inconclusive(e.to_string()),
                verdict,
                seed: opts.seed,
            }
        }
    };
    let maxlen = opts.maxlen.unwrap_or(prob.n * prob.n);
    let outcome = match verdict.status {
        Status::Unknown => CrossOutcome::Inconclusive("exact decider hit a guard".into()),
        Status::Solvable => {
            let mut best = f64::INFINITY;
            let mut found = None;
            for r in 0..opts.restarts {
                let (cand, f) =
                    run_restart(&prob, opts.seed.wrapping_add(r), opts.iters, opts.tol);
                best = best.min(f);
                if f < opts.tol {
                    let a = cand.conjugated(&prob).expect("converged candidate");
                    let b = burnside_rank(&a, maxlen);
                    if b.irreducible {
                        found = Some(CrossOutcome::ExactSolvableFound {
                            residual: f,
                            word_rank: b.word_rank,
                            restarts_used: r + 1,
                        });
                        break;
                    }
                }
            }
            found.unwrap_or(CrossOutcome::ExactSolvableNotFound {
                best_residual: best,
            })
        }
        Status::Unsolvable => {
            let runs: Vec<(Candidate, f64)> = (0..opts.restarts)
                .into_par_iter()
                .map(|r| run_restart(&prob, opts.seed.wrapping_add(r), opts.iters, opts.tol))
                .collect();
            let mut converged = 0u64;
            let mut best = f64::INFINITY;
            let mut conflict = None;
            for (cand, f) in runs {
                best = best.min(f);
                if f < opts.tol {
                    converged += 1;
                    let a = cand.conjugated(&prob).expect("converged candidate");
                    let b = burnside_rank(&a, maxlen);
                    if b.irreducible && conflict.is_none() {
                        conflict = Some(CrossOutcome::Conflict {
                            residual: f,
                            word_rank: b.word_rank,
                            sigma_ratio: b.sigma_ratio,
                        });
                    }
                }
            }
            conflict.unwrap_or(CrossOutcome::ExactUnsolvableNoIrreducible {
                converged,
                best_residual: best,
            })
        }
    };
    CrossReport {
        verdict,
        outcome,
        seed: opts.seed,
    }
}
