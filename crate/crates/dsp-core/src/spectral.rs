//! Eigenvalue data attached to a star quiver.
//!
//! A ξ-table assigns w_i exact values ξ_{i1},…,ξ_{i,w_i} to each arm. The
//! character ξ^[α] = ∏ ξ_{ij}^{n_{i,j−1}−n_{ij}} (with n_{i0} = n_* and
//! n_{i,w_i} = 0) and the per-vertex parameter q with q_* = 1/∏ξ_{i1},
//! q_{ij} = ξ_{ij}/ξ_{i,j+1} satisfy ξ^[α]·q^α = 1 identically. Conjugacy
//! classes enter through rank data: n_{ij} = rank (A−ξ_{i1})⋯(A−ξ_{ij}).

use std::sync::Arc;

use nalgebra::{Complex, DMatrix};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use thiserror::Error;

use crate::quiver::{LatticeVector, StarQuiver, WeightSequence};
use crate::value::{MValue, Order, SymContext, ValueError};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("xi table has {got} arms, weight sequence has {expected}")]
    ArmCountMismatch { got: usize, expected: usize },
    #[error("xi arm {arm} has {got} values, weight is {expected}")]
    ArmLengthMismatch {
        arm: usize,
        got: usize,
        expected: usize,
    },
    #[error("xi table mixes cyclo and sym values")]
    MixedModes,
    #[error("lattice vector has {got} coordinates, quiver has {expected} vertices")]
    IndexMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error("matrix {index} is {rows}x{cols}, expected {n}x{n}")]
    NotSquare {
        index: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("expected {expected} matrices (one per arm), got {got}")]
    MatrixCountMismatch { got: usize, expected: usize },
    #[error("matrix {index} is singular; conjugacy classes live in GL_n")]
    Singular { index: usize },
    #[error("arm {arm}: (A - xi_1)...(A - xi_w) != 0, the matrix does not satisfy the declared annihilating polynomial")]
    AnnihilationFailed { arm: usize },
    #[error("arm {arm}: symbolic eigenvalues cannot be compared with matrix entries")]
    SymbolicMatrix { arm: usize },
    #[error("arm {arm}: rank data is not realizable by any matrix: {reason}")]
    NotRealizable { arm: usize, reason: String },
    #[error("declared alpha {declared} differs from the rank data of the matrices {computed}")]
    AlphaMismatch {
        declared: LatticeVector,
        computed: LatticeVector,
    },
    #[error("alpha is not strict (n_* >= n_i1 >= ... >= 0 fails)")]
    NotStrict,
    #[error("alpha_* = {0}, but the matrix dimension n must be >= 1")]
    BadDimension(i64),
}

/// ξ = (ξ_{ij}): one list of w_i values per arm, all in the same encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct XiTable {
    arms: Vec<Vec<MValue>>,
}

impl XiTable {
    pub fn new(weights: &WeightSequence, arms: Vec<Vec<MValue>>) -> Result<Self, SpectralError> {
        if arms.len() != weights.arms() {
            return Err(SpectralError::ArmCountMismatch {
                got: arms.len(),
                expected: weights.arms(),
            });
        }
        for (i, (arm, &w)) in arms.iter().zip(weights.weights()).enumerate() {
            if arm.len() != w {
                return Err(SpectralError::ArmLengthMismatch {
                    arm: i + 1,
                    got: arm.len(),
                    expected: w,
                });
            }
        }
        let mut seen_sym = None;
        for v in arms.iter().flatten() {
            match seen_sym {
                None => seen_sym = Some(v.is_sym()),
                Some(s) if s != v.is_sym() => return Err(SpectralError::MixedModes),
                _ => {}
            }
        }
        Ok(XiTable { arms })
    }

    pub fn arms(&self) -> &[Vec<MValue>] {
        &self.arms
    }

    pub fn value(&self, arm: usize, j: usize) -> &MValue {
        &self.arms[arm][j - 1]
    }

    /// One in the table's encoding (used to seed products).
    fn one(&self) -> MValue {
        self.arms
            .iter()
            .flatten()
            .next()
            .map(|v| v.one_like())
            .unwrap_or_else(MValue::one)
    }

    pub fn is_sym(&self) -> bool {
        self.arms.iter().flatten().next().map(MValue::is_sym).unwrap_or(false)
    }
}

/// q_v per vertex, in dense vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterQ {
    values: Vec<MValue>,
}

impl CharacterQ {
    pub fn new(values: Vec<MValue>) -> Self {
        CharacterQ { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: usize) -> &MValue {
        &self.values[v]
    }

    pub fn values(&self) -> &[MValue] {
        &self.values
    }

    pub fn set(&mut self, v: usize, val: MValue) {
        self.values[v] = val;
    }

    fn one(&self) -> MValue {
        self.values
            .first()
            .map(|v| v.one_like())
            .unwrap_or_else(MValue::one)
    }
}

/// ξ^[a] = ∏_{i,j} ξ_{ij}^{n_{i,j−1}−n_{ij}} with n_{i0} = n_*, n_{i,w_i} = 0.
pub fn xi_char(
    quiver: &StarQuiver,
    xi: &XiTable,
    a: &LatticeVector,
) -> Result<MValue, SpectralError> {
    if a.len() != quiver.vertex_count() {
        return Err(SpectralError::IndexMismatch {
            got: a.len(),
            expected: quiver.vertex_count(),
        });
    }
    let n_star = a.0[0];
    let mut out = xi.one();
    for (i, &w) in quiver.weights().weights().iter().enumerate() {
        let coord = |j: usize| -> i64 {
            if j == 0 {
                n_star
            } else if j < w {
                a.0[quiver
                    .index_of(crate::quiver::Vertex::Arm { arm: i, slot: j - 1 })
                    .expect("arm slot")]
            } else {
                0
            }
        };
        for j in 1..=w {
            let e = coord(j - 1) - coord(j);
            if e != 0 {
                out = out.mul(&xi.value(i, j).pow(e))?;
            }
        }
    }
    Ok(out)
}

/// q_* = 1/∏_i ξ_{i1}, q_{ij} = ξ_{ij}/ξ_{i,j+1}; then ξ^[a]·q^a = 1 for all a.
pub fn q_from_xi(quiver: &StarQuiver, xi: &XiTable) -> Result<CharacterQ, SpectralError> {
    let mut values = vec![xi.one(); quiver.vertex_count()];
    let mut prod = xi.one();
    for i in 0..quiver.weights().arms() {
        prod = prod.mul(xi.value(i, 1))?;
    }
    values[0] = prod.inv();
    for (i, &w) in quiver.weights().weights().iter().enumerate() {
        for j in 1..w {
            let idx = quiver
                .index_of(crate::quiver::Vertex::Arm { arm: i, slot: j - 1 })
                .expect("arm slot");
            values[idx] = xi.value(i, j).div(xi.value(i, j + 1))?;
        }
    }
    Ok(CharacterQ { values })
}

/// q^a = ∏_v q_v^{a_v}.
pub fn q_pow(q: &CharacterQ, a: &LatticeVector) -> Result<MValue, SpectralError> {
    if a.len() != q.len() {
        return Err(SpectralError::IndexMismatch {
            got: a.len(),
            expected: q.len(),
        });
    }
    let mut out = q.one();
    for (v, &e) in a.0.iter().enumerate() {
        if e != 0 {
            out = out.mul(&q.value(v).pow(e))?;
        }
    }
    Ok(out)
}

/// Least m ≥ 1 with v^m = 1, or Infinite.
pub fn order_of(v: &MValue) -> Order {
    v.order()
}

/// Square matrix over exact rationals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatrix {
    pub n: usize,
    pub entries: Vec<BigRational>,
}

impl RatMatrix {
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(RatMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix {
            n,
            entries: vec![BigRational::zero(); n * n],
        };
        for i in 0..n {
            m.entries[i * n + i] = BigRational::one();
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &BigRational {
        &self.entries[r * self.n + c]
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        let n = self.n;
        let mut out = RatMatrix {
            n,
            entries: vec![BigRational::zero(); n * n],
        };
        for i in 0..n {
            for l in 0..n {
                let a = self.at(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let add = a * other.at(l, j);
                    out.entries[i * n + j] += add;
                }
            }
        }
        out
    }

    /// self − c·I.
    pub fn sub_scalar(&self, c: &BigRational) -> RatMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            let d = out.at(i, i) - c;
            out.entries[i * self.n + i] = d;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    /// Rank by fraction-free (Bareiss) elimination: each row is scaled to
    /// integers first, then eliminated over ℤ.
    pub fn rank(&self) -> usize {
        let n = self.n;
        if n == 0 {
            return 0;
        }
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let row = &self.entries[i * n..(i + 1) * n];
                let lcm = row
                    .iter()
                    .fold(BigInt::one(), |acc, x| num::integer::lcm(acc, x.denom().clone()));
                row.iter()
                    .map(|x| x.numer() * (&lcm / x.denom()))
                    .collect()
            })
            .collect();
        let mut rank = 0usize;
        let mut prev = BigInt::one();
        for col in 0..n {
            let Some(pivot_row) = (rank..n).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, pivot_row);
            for r in rank + 1..n {
                for c in col + 1..n {
                    let num = &m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c];
                    m[r][c] = num / &prev;
                }
                m[r][col] = BigInt::zero();
            }
            prev = m[rank][col].clone();
            rank += 1;
            if rank == n {
                break;
            }
        }
        rank
    }

    pub fn to_complex(&self) -> DMatrix<Complex<f64>> {
        use num_traits::ToPrimitive;
        DMatrix::from_fn(self.n, self.n, |r, c| {
            Complex::new(self.at(r, c).to_f64().unwrap_or(f64::NAN), 0.0)
        })
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.n
    }
}

/// The matrices of a problem instance, all exact or all floating.
#[derive(Debug, Clone)]
pub enum MatrixData {
    Rational(Vec<RatMatrix>),
    Complex(Vec<DMatrix<Complex<f64>>>),
}

impl MatrixData {
    pub fn count(&self) -> usize {
        match self {
            MatrixData::Rational(v) => v.len(),
            MatrixData::Complex(v) => v.len(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            MatrixData::Rational(v) => v.first().map(|m| m.n),
            MatrixData::Complex(v) => v.first().map(|m| m.nrows()),
        }
    }

    pub fn to_complex(&self) -> Vec<DMatrix<Complex<f64>>> {
        match self {
            MatrixData::Rational(v) => v.iter().map(RatMatrix::to_complex).collect(),
            MatrixData::Complex(v) => v.clone(),
        }
    }
}

/// Numerical rank: count σ_i > tol·σ_1, with the whole matrix treated as
/// zero when σ_1 falls below tol·scale (`scale` bounds the entries' size).
pub fn complex_rank(m: &DMatrix<Complex<f64>>, tol: f64, scale: f64) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let s_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if s_max <= tol * scale.max(1.0) {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > tol * s_max).count()
}

/// Rank data of k matrices: n_* = n and n_{ij} = rank (A_i−ξ_{i1})⋯(A_i−ξ_{ij}).
/// Checks the annihilation (A_i−ξ_{i1})⋯(A_i−ξ_{i,w_i}) = 0 per arm.
pub fn alpha_from_matrices(
    quiver: &StarQuiver,
    matrices: &MatrixData,
    xi: &XiTable,
    rank_tol: f64,
) -> Result<LatticeVector, SpectralError> {
    let k = quiver.weights().arms();
    if matrices.count() != k {
        return Err(SpectralError::MatrixCountMismatch {
            got: matrices.count(),
            expected: k,
        });
    }
    let n = matrices.dim().unwrap_or(0);
    validate_square(matrices, n)?;
    let mut alpha = LatticeVector::zeros(quiver.vertex_count());
    alpha.0[0] = n as i64;
    match matrices {
        MatrixData::Rational(mats) => {
            for (i, a) in mats.iter().enumerate() {
                if !a.is_invertible() {
                    return Err(SpectralError::Singular { index: i });
                }
                let w = quiver.weights().weights()[i];
                let mut product = RatMatrix::identity(n);
                for j in 1..=w {
                    let c = xi
                        .value(i, j)
                        .as_rational()
                        .ok_or(SpectralError::SymbolicMatrix { arm: i + 1 })?;
                    product = product.mul(&a.sub_scalar(&c));
                    if j < w {
                        let idx = quiver
                            .index_of(crate::quiver::Vertex::Arm { arm: i, slot: j - 1 })
                            .expect("arm slot");
                        alpha.0[idx] = product.rank() as i64;
                    }
                }
                if !product.is_zero() {
                    return Err(SpectralError::AnnihilationFailed { arm: i + 1 });
                }
            }
        }
        MatrixData::Complex(mats) => {
            for (i, a) in mats.iter().enumerate() {
                let w = quiver.weights().weights()[i];
                if complex_rank(a, rank_tol, a.norm()) < n {
                    return Err(SpectralError::Singular { index: i });
                }
                let mut product = DMatrix::<Complex<f64>>::identity(n, n);
                let mut scale = 1.0f64;
                for j in 1..=w {
                    let c = xi
                        .value(i, j)
                        .to_complex()
                        .ok_or(SpectralError::SymbolicMatrix { arm: i + 1 })?;
                    let factor = a - DMatrix::from_diagonal_element(n, n, c);
                    scale *= factor.norm().max(1.0);
                    product = &product * &factor;
                    if j < w {
                        let idx = quiver
                            .index_of(crate::quiver::Vertex::Arm { arm: i, slot: j - 1 })
                            .expect("arm slot");
                        alpha.0[idx] = complex_rank(&product, rank_tol, scale) as i64;
                    }
                }
                if product.norm() > rank_tol * scale {
                    return Err(SpectralError::AnnihilationFailed { arm: i + 1 });
                }
            }
        }
    }
    debug_assert!(quiver.is_strict(&alpha));
    Ok(alpha)
}

fn validate_square(matrices: &MatrixData, n: usize) -> Result<(), SpectralError> {
    match matrices {
        MatrixData::Rational(v) => {
            for (i, m) in v.iter().enumerate() {
                if m.n != n {
                    return Err(SpectralError::NotSquare {
                        index: i,
                        rows: m.n,
                        cols: m.n,
                        n,
                    });
                }
            }
        }
        MatrixData::Complex(v) => {
            for (i, m) in v.iter().enumerate() {
                if m.nrows() != n || m.ncols() != n {
                    return Err(SpectralError::NotSquare {
                        index: i,
                        rows: m.nrows(),
                        cols: m.ncols(),
                        n,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Jordan-type block multiset realizing given rank data, or NotRealizable.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedClass {
    pub n: usize,
    /// (eigenvalue, block size), largest blocks first per eigenvalue
    pub blocks: Vec<(MValue, usize)>,
}

/// Finds a matrix class with the prescribed partial-product ranks.
///
/// Write r_0 = n, r_j the given ranks, r_w = 0 and d_j = r_{j−1} − r_j. A
/// block J_s(λ) contributes max(0, s − c) to the rank of the product once c
/// factors (A−λ) have been applied, so d at the m-th occurrence of λ equals
/// the number of λ-blocks of size ≥ m. Realizable iff every d_j ≥ 0 and, for
/// each eigenvalue, the d-values along its occurrences are weakly
/// decreasing; the block sizes are then the conjugate partition.
pub fn realize_class(
    n: usize,
    xi_arm: &[MValue],
    ranks: &[i64],
) -> Result<RealizedClass, SpectralError> {
    let w = xi_arm.len();
    assert_eq!(ranks.len(), w.saturating_sub(1), "one rank per proper partial product");
    let r = |j: usize| -> i64 {
        if j == 0 {
            n as i64
        } else if j < w {
            ranks[j - 1]
        } else {
            0
        }
    };
    let err = |reason: String| SpectralError::NotRealizable { arm: 0, reason };
    let mut drops = Vec::with_capacity(w);
    for j in 1..=w {
        let d = r(j - 1) - r(j);
        if d < 0 {
            return Err(err(format!(
                "rank sequence is not weakly decreasing from n at step {j}"
            )));
        }
        drops.push(d);
    }
    // group occurrence positions by eigenvalue
    let mut groups: Vec<(MValue, Vec<usize>)> = Vec::new();
    for (j, v) in xi_arm.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| g == v) {
            Some((_, occ)) => occ.push(j),
            None => groups.push((v.clone(), vec![j])),
        }
    }
    let mut blocks = Vec::new();
    for (value, occ) in groups {
        let ds: Vec<i64> = occ.iter().map(|&j| drops[j]).collect();
        for (m, pair) in ds.windows(2).enumerate() {
            if pair[0] < pair[1] {
                return Err(err(format!(
                    "eigenvalue {value} would need {} Jordan blocks of size >= {} but only {} of size >= {}",
                    pair[1],
                    m + 2,
                    pair[0],
                    m + 1
                )));
            }
        }
        // conjugate partition: d_m blocks have size >= m
        for m in 0..ds.len() {
            let count = ds[m] - if m + 1 < ds.len() { ds[m + 1] } else { 0 };
            for _ in 0..count {
                blocks.push((value.clone(), m + 1));
            }
        }
    }
    blocks.sort_by_key(|b| std::cmp::Reverse(b.1));
    let total: usize = blocks.iter().map(|(_, s)| s).sum();
    debug_assert_eq!(total, n, "block sizes account for the whole space");
    Ok(RealizedClass { n, blocks })
}

impl RealizedClass {
    /// Block-diagonal witness over ℚ; None when some eigenvalue is not rational.
    pub fn to_rational_matrix(&self) -> Option<RatMatrix> {
        let mut m = RatMatrix {
            n: self.n,
            entries: vec![BigRational::zero(); self.n * self.n],
        };
        let mut pos = 0usize;
        for (value, size) in &self.blocks {
            let lambda = value.as_rational()?;
            for t in 0..*size {
                m.entries[(pos + t) * self.n + pos + t] = lambda.clone();
                if t + 1 < *size {
                    m.entries[(pos + t) * self.n + pos + t + 1] = BigRational::one();
                }
            }
            pos += size;
        }
        Some(m)
    }

    /// Block-diagonal witness over ℂ; None for symbolic eigenvalues.
    pub fn to_complex_matrix(&self) -> Option<DMatrix<Complex<f64>>> {
        let mut m = DMatrix::<Complex<f64>>::zeros(self.n, self.n);
        let mut pos = 0usize;
        for (value, size) in &self.blocks {
            let lambda = value.to_complex()?;
            for t in 0..*size {
                m[(pos + t, pos + t)] = lambda;
                if t + 1 < *size {
                    m[(pos + t, pos + t + 1)] = Complex::new(1.0, 0.0);
                }
            }
            pos += size;
        }
        Some(m)
    }
}

/// A full problem: weights, eigenvalue table, dimension vector and
/// (optionally) explicit matrices whose rank data must reproduce alpha.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub quiver: StarQuiver,
    pub xi: XiTable,
    pub alpha: LatticeVector,
    pub matrices: Option<MatrixData>,
    /// SVD threshold for floating rank decisions
    pub rank_tol: f64,
}

impl ProblemInstance {
    /// Validates everything the data promises: alpha strict with n ≥ 1,
    /// matrices (if any) square, invertible, annihilated by their arm
    /// polynomial and reproducing alpha, and every arm's rank data
    /// realizable by an actual conjugacy class.
    pub fn new(
        quiver: StarQuiver,
        xi: XiTable,
        alpha: LatticeVector,
        matrices: Option<MatrixData>,
        rank_tol: f64,
    ) -> Result<Self, SpectralError> {
        if alpha.len() != quiver.vertex_count() {
            return Err(SpectralError::IndexMismatch {
                got: alpha.len(),
                expected: quiver.vertex_count(),
            });
        }
        if !quiver.is_strict(&alpha) {
            return Err(SpectralError::NotStrict);
        }
        let n = alpha.0[0];
        if n < 1 {
            return Err(SpectralError::BadDimension(n));
        }
        if let Some(mats) = &matrices {
            let computed = alpha_from_matrices(&quiver, mats, &xi, rank_tol)?;
            if computed != alpha {
                return Err(SpectralError::AlphaMismatch {
                    declared: alpha,
                    computed,
                });
            }
        }
        let inst = ProblemInstance {
            quiver,
            xi,
            alpha,
            matrices,
            rank_tol,
        };
        for arm in 0..inst.quiver.weights().arms() {
            inst.realize_arm(arm).map_err(|e| match e {
                SpectralError::NotRealizable { reason, .. } => SpectralError::NotRealizable {
                    arm: arm + 1,
                    reason,
                },
                other => other,
            })?;
        }
        Ok(inst)
    }

    /// Alpha restricted to arm i: the rank sequence (n_{i1},…,n_{i,w_i−1}).
    pub fn arm_ranks(&self, arm: usize) -> Vec<i64> {
        let w = self.quiver.weights().weights()[arm];
        (1..w)
            .map(|j| {
                self.alpha.0[self
                    .quiver
                    .index_of(crate::quiver::Vertex::Arm { arm, slot: j - 1 })
                    .expect("arm slot")]
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.alpha.0[0] as usize
    }

    pub fn realize_arm(&self, arm: usize) -> Result<RealizedClass, SpectralError> {
        realize_class(self.n(), &self.xi.arms()[arm], &self.arm_ranks(arm))
    }

    /// ξ^[α] for this instance's alpha.
    pub fn character(&self) -> Result<MValue, SpectralError> {
        xi_char(&self.quiver, &self.xi, &self.alpha)
    }

    pub fn is_sym(&self) -> bool {
        self.xi.is_sym()
    }
}

/// Convenience: a cyclo xi table from (numerator, denominator)-angle pairs is
/// tedious to build inline; tests and fixtures use string tables instead.
pub fn xi_from_strings(
    weights: &WeightSequence,
    arms: &[Vec<&str>],
    ctx: Option<&Arc<SymContext>>,
) -> Result<XiTable, SpectralError> {
    let parsed: Result<Vec<Vec<MValue>>, ValueError> = arms
        .iter()
        .map(|arm| arm.iter().map(|s| MValue::parse(s, ctx)).collect())
        .collect();
    XiTable::new(weights, parsed?)
}
