//! Exact decision engine for the Deligne-Simpson problem.
//!
//! Given k conjugacy classes of invertible matrices — presented as a weight
//! sequence, an eigenvalue table ξ and rank data α — decide whether matrices
//! A_i in those classes can satisfy A_1⋯A_k = 1 with no common invariant
//! subspace. The criterion is root-theoretic: α must be a positive root of
//! the star quiver Q_w with trivial character ξ^[α] and no decomposition
//! into character-trivial positive roots that defeats p(α). Verdicts carry
//! machine-checkable certificates, and a floating-point search oracle
//! cross-validates the exact answers at small rank.

pub mod decider;
pub mod oracle;
pub mod quiver;
pub mod reflect;
pub mod spectral;
pub mod value;

pub use decider::{
    decide_core, decide_dsp, in_nrq, in_rq, sigma_by_definition, sigma_by_pairing, Certificate,
    DecideError, DeciderContext, Guards, Status, Verdict,
};
pub use oracle::{
    burnside_rank, cross_validate, grad_residual, residual, search, Candidate, CrossOutcome,
    CrossReport, OracleProblem, OracleReport, SearchOpts, SearchResult,
};
pub use quiver::{
    build_star, LatticeVector, QuiverClass, QuiverError, RootKind, StarQuiver, Vertex,
    WeightSequence,
};
pub use reflect::{admissible, classify_case, in_fq, orbit_explore, reflect_pair, InFq, Pair, ReducedCase};
pub use spectral::{
    alpha_from_matrices, order_of, q_from_xi, q_pow, realize_class, xi_char, CharacterQ,
    MatrixData, ProblemInstance, RatMatrix, SpectralError, XiTable,
};
pub use value::{MValue, Order, RelationLattice, SymContext, ValueError};
