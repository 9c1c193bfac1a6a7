//! Star-shaped quivers, their root lattices and root systems.
//!
//! A weight sequence w = (w_1,…,w_k) determines the star quiver Q_w: a
//! central vertex `*` with k arms, arm i consisting of the vertices
//! [i,1],…,[i,w_i−1] and arrows [i,1]→* and [i,j+1]→[i,j]. Lattice vectors
//! are integer vectors indexed by the vertices; the Euler form, its
//! symmetrization, the quadratic form q and p = 1 − q, reflections and
//! Kac's positive-root test all live here.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuiverError {
    #[error("weight sequence must be non-empty")]
    EmptyWeights,
    #[error("weight {0} is invalid: weights must be >= 1")]
    BadWeight(i64),
    #[error("lattice vector has {got} coordinates, quiver has {expected} vertices")]
    IndexMismatch { got: usize, expected: usize },
    #[error("the zero vector is neither a root nor a non-root")]
    ZeroVector,
    #[error("box scan of volume {volume} exceeds the guard {guard} (raise --max-box)")]
    BoxGuard { volume: u128, guard: u64 },
}

/// Weight sequence (w_1,…,w_k), each w_i ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightSequence(Vec<usize>);

impl WeightSequence {
    pub fn new(weights: Vec<usize>) -> Result<Self, QuiverError> {
        if weights.is_empty() {
            return Err(QuiverError::EmptyWeights);
        }
        if let Some(&w) = weights.iter().find(|&&w| w == 0) {
            return Err(QuiverError::BadWeight(w as i64));
        }
        Ok(WeightSequence(weights))
    }

    pub fn arms(&self) -> usize {
        self.0.len()
    }

    pub fn weights(&self) -> &[usize] {
        &self.0
    }

    /// lcm of the weights.
    pub fn lcm(&self) -> usize {
        self.0.iter().fold(1usize, |acc, &w| num::integer::lcm(acc, w))
    }
}

/// A vertex of the star quiver: the center `*` or an arm vertex [i,j]
/// (both indices 0-based internally, displayed 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Center,
    Arm { arm: usize, slot: usize },
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Center => write!(f, "*"),
            Vertex::Arm { arm, slot } => write!(f, "[{},{}]", arm + 1, slot + 1),
        }
    }
}

/// The star quiver Q_w. Vertices are stored densely: index 0 is `*`,
/// followed by arm 1 from the inside out, then arm 2, and so on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarQuiver {
    weights: WeightSequence,
    /// dense index of [i,1] for each arm (unused entries for w_i = 1 point past the arm)
    arm_start: Vec<usize>,
    vertex_count: usize,
    /// arrows as (tail, head) dense-index pairs; arms point toward the center
    arrows: Vec<(usize, usize)>,
    /// adjacency: for each vertex, the neighbours in the underlying graph
    neighbors: Vec<Vec<usize>>,
}

/// Classification of a lattice vector under Kac's root-system test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    NotRoot,
    Real,
    Imaginary,
}

/// Representation type of the quiver itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuiverClass {
    Dynkin,
    ExtendedDynkin {
        delta: LatticeVector,
        extending_vertices: Vec<Vertex>,
    },
    Wild,
}

/// Element of the root lattice Γ_w: one integer per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zeros(n: usize) -> Self {
        LatticeVector(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    /// Componentwise β ≤ α.
    pub fn le(&self, other: &LatticeVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: i64) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| a * c).collect())
    }

    /// Sum of coordinates.
    pub fn height(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Dense indices of the nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(v, _)| v)
            .collect()
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Builds the star quiver for a weight sequence.
pub fn build_star(weights: WeightSequence) -> StarQuiver {
    StarQuiver::new(weights)
}

impl StarQuiver {
    pub fn new(weights: WeightSequence) -> Self {
        let mut arm_start = Vec::with_capacity(weights.arms());
        let mut idx = 1usize;
        for &w in weights.weights() {
            arm_start.push(idx);
            idx += w - 1;
        }
        let vertex_count = idx;
        let mut arrows = Vec::new();
        for (i, &w) in weights.weights().iter().enumerate() {
            if w >= 2 {
                // [i,1] -> *
                arrows.push((arm_start[i], 0));
                for j in 1..w - 1 {
                    // [i,j+1] -> [i,j]
                    arrows.push((arm_start[i] + j, arm_start[i] + j - 1));
                }
            }
        }
        let mut neighbors = vec![Vec::new(); vertex_count];
        for &(t, h) in &arrows {
            neighbors[t].push(h);
            neighbors[h].push(t);
        }
        StarQuiver {
            weights,
            arm_start,
            vertex_count,
            arrows,
            neighbors,
        }
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Dense index of a vertex.
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        match v {
            Vertex::Center => Some(0),
            Vertex::Arm { arm, slot } => {
                let w = *self.weights.weights().get(arm)?;
                if slot + 1 < w {
                    Some(self.arm_start[arm] + slot)
                } else {
                    None
                }
            }
        }
    }

    pub fn vertex_at(&self, idx: usize) -> Vertex {
        if idx == 0 {
            return Vertex::Center;
        }
        for (i, &start) in self.arm_start.iter().enumerate() {
            let len = self.weights.weights()[i] - 1;
            if idx >= start && idx < start + len {
                return Vertex::Arm {
                    arm: i,
                    slot: idx - start,
                };
            }
        }
        panic!("vertex index {idx} out of range");
    }

    /// All vertices in dense order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertex_count).map(|i| self.vertex_at(i))
    }

    /// Coordinate vector ε_v.
    pub fn simple_root(&self, v: usize) -> LatticeVector {
        let mut e = LatticeVector::zeros(self.vertex_count);
        e.0[v] = 1;
        e
    }

    fn check(&self, a: &LatticeVector) -> Result<(), QuiverError> {
        if a.len() != self.vertex_count {
            Err(QuiverError::IndexMismatch {
                got: a.len(),
                expected: self.vertex_count,
            })
        } else {
            Ok(())
        }
    }

    /// Euler form ⟨a,b⟩ = Σ_v a_v b_v − Σ_{arrows} a_tail b_head.
    pub fn euler(&self, a: &LatticeVector, b: &LatticeVector) -> i64 {
        self.check(a).expect("euler: first argument");
        self.check(b).expect("euler: second argument");
        let diag: i64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
        let off: i64 = self.arrows.iter().map(|&(t, h)| a.0[t] * b.0[h]).sum();
        diag - off
    }

    /// Symmetrized form (a,b) = ⟨a,b⟩ + ⟨b,a⟩.
    pub fn sym(&self, a: &LatticeVector, b: &LatticeVector) -> i64 {
        self.euler(a, b) + self.euler(b, a)
    }

    /// (a, ε_v) without materializing ε_v.
    pub fn sym_simple(&self, a: &LatticeVector, v: usize) -> i64 {
        let mut s = 2 * a.0[v];
        for &u in &self.neighbors[v] {
            s -= a.0[u];
        }
        s
    }

    /// Tits quadratic form q(a) = ⟨a,a⟩.
    pub fn q(&self, a: &LatticeVector) -> i64 {
        self.euler(a, a)
    }

    /// p(a) = 1 − q(a).
    pub fn p(&self, a: &LatticeVector) -> i64 {
        1 - self.q(a)
    }

    /// Reflection s_v(a) = a − (a,ε_v)·ε_v at the dense vertex index v.
    pub fn reflect(&self, v: usize, a: &LatticeVector) -> LatticeVector {
        self.check(a).expect("reflect");
        let mut out = a.clone();
        out.0[v] -= self.sym_simple(a, v);
        out
    }

    /// True iff n_* ≥ n_{i,1} ≥ … ≥ n_{i,w_i−1} ≥ 0 for every arm.
    pub fn is_strict(&self, a: &LatticeVector) -> bool {
        if self.check(a).is_err() {
            return false;
        }
        let n_star = a.0[0];
        for (i, &w) in self.weights.weights().iter().enumerate() {
            let mut prev = n_star;
            for j in 0..w - 1 {
                let cur = a.0[self.arm_start[i] + j];
                if cur > prev {
                    return false;
                }
                prev = cur;
            }
            if prev < 0 {
                return false;
            }
        }
        n_star >= 0
    }

    /// True iff the support of `a` induces a connected subgraph.
    pub fn support_connected(&self, a: &LatticeVector) -> bool {
        let support = a.support();
        if support.is_empty() {
            return false;
        }
        let in_support = |v: usize| a.0[v] != 0;
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![support[0]];
        seen[support[0]] = true;
        let mut reached = 0usize;
        while let Some(v) = stack.pop() {
            reached += 1;
            for &u in &self.neighbors[v] {
                if in_support(u) && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        reached == support.len()
    }

    /// Kac's criterion for membership in the set of positive roots.
    ///
    /// Height descent: repeatedly reflect at the smallest-index vertex v with
    /// (a,ε_v) > 0; the height strictly decreases, so this terminates. The
    /// resulting vector is a simple root (Real), lies in the fundamental
    /// region — connected support and (a,ε_v) ≤ 0 everywhere — (Imaginary),
    /// or the vector left the positive cone along the way (NotRoot).
    pub fn positive_root_kind(&self, a: &LatticeVector) -> Result<RootKind, QuiverError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(QuiverError::ZeroVector);
        }
        if !a.is_nonnegative() {
            return Ok(RootKind::NotRoot);
        }
        let mut cur = a.clone();
        loop {
            if cur.height() == 1 {
                return Ok(RootKind::Real);
            }
            let mut descended = false;
            for v in 0..self.vertex_count {
                if self.sym_simple(&cur, v) > 0 {
                    cur = self.reflect(v, &cur);
                    if cur.0[v] < 0 {
                        return Ok(RootKind::NotRoot);
                    }
                    descended = true;
                    break;
                }
            }
            if !descended {
                return if self.support_connected(&cur) {
                    Ok(RootKind::Imaginary)
                } else {
                    Ok(RootKind::NotRoot)
                };
            }
        }
    }

    /// All positive roots β with 0 < β ≤ a componentwise, in lexicographic
    /// order of the dense coordinates. Box scan guarded by `max_box`.
    pub fn positive_roots_below(
        &self,
        a: &LatticeVector,
        max_box: u64,
    ) -> Result<Vec<LatticeVector>, QuiverError> {
        self.check(a)?;
        debug_assert!(a.is_nonnegative());
        let volume: u128 = a
            .0
            .iter()
            .map(|&x| (x.max(0) as u128) + 1)
            .product();
        if volume > max_box as u128 {
            return Err(QuiverError::BoxGuard {
                volume,
                guard: max_box,
            });
        }
        let mut out = Vec::new();
        let mut cur = LatticeVector::zeros(self.vertex_count);
        loop {
            if !cur.is_zero() && self.positive_root_kind(&cur)? != RootKind::NotRoot {
                out.push(cur.clone());
            }
            // next point in the box, lexicographic from the last coordinate
            let mut pos = self.vertex_count;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                if cur.0[pos] < a.0[pos] {
                    cur.0[pos] += 1;
                    for x in &mut cur.0[pos + 1..] {
                        *x = 0;
                    }
                    break;
                }
            }
        }
    }

    /// Representation type: Dynkin iff Σ1/w_i > k−2, extended Dynkin iff
    /// equal (with δ and its extending vertices), wild otherwise.
    pub fn classify(&self) -> QuiverClass {
        let k = self.weights.arms() as i64;
        // compare Σ 1/w_i with k−2 over a common denominator
        let lcm = self.weights.lcm() as i64;
        let sum: i64 = self
            .weights
            .weights()
            .iter()
            .map(|&w| lcm / w as i64)
            .sum();
        let rhs = (k - 2) * lcm;
        if sum > rhs {
            QuiverClass::Dynkin
        } else if sum == rhs {
            let delta = self.extended_dynkin_delta();
            debug_assert_eq!(self.q(&delta), 0);
            let extending_vertices = delta
                .0
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == 1)
                .map(|(v, _)| self.vertex_at(v))
                .collect();
            QuiverClass::ExtendedDynkin {
                delta,
                extending_vertices,
            }
        } else {
            QuiverClass::Wild
        }
    }

    /// δ with δ_* = lcm(w_i) and δ_{ij} = lcm·(1 − j/w_i); the radical
    /// generator when the quiver is extended Dynkin.
    fn extended_dynkin_delta(&self) -> LatticeVector {
        let lcm = self.weights.lcm() as i64;
        let mut delta = LatticeVector::zeros(self.vertex_count);
        delta.0[0] = lcm;
        for (i, &w) in self.weights.weights().iter().enumerate() {
            for j in 1..w {
                delta.0[self.arm_start[i] + j - 1] = lcm - (lcm * j as i64) / w as i64;
            }
        }
        delta
    }
}

/// Per-call memoizing wrapper around `positive_root_kind`, for dense scans.
pub struct RootMemo<'q> {
    quiver: &'q StarQuiver,
    cache: HashMap<LatticeVector, RootKind>,
}

impl<'q> RootMemo<'q> {
    pub fn new(quiver: &'q StarQuiver) -> Self {
        RootMemo {
            quiver,
            cache: HashMap::new(),
        }
    }

    pub fn kind(&mut self, a: &LatticeVector) -> RootKind {
        if a.is_zero() {
            return RootKind::NotRoot;
        }
        if let Some(&k) = self.cache.get(a) {
            return k;
        }
        let k = self
            .quiver
            .positive_root_kind(a)
            .expect("nonzero vector");
        self.cache.insert(a.clone(), k);
        k
    }
}
