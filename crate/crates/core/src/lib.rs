//! Finite-scale laboratory for von Neumann couplings between finite groups.
//!
//! Groups act by trace-preserving automorphisms on multi-matrix algebras; a
//! coupling carries two commuting actions with fundamental domains, and the
//! induction map transports Herz-Schur multipliers from one group to the other
//! through the coupling.

pub mod action;
pub mod coupling;
pub mod error;
pub mod group;
pub mod induction;
pub mod multiplier;
pub mod vna;

pub use action::{equivariance_defect, is_fundamental_domain, koopman, theta_embedding, KoopmanMatrix, TraceAction};
pub use coupling::{
    build_diagonal_coupling, build_me_product_coupling, build_wstar_coupling, coupling_index, exact_index,
    CouplingRecord,
};
pub use error::{AlgebraError, CouplingError, GroupError, InductionError, MultiplierError};
pub use group::{build_group, character_table, CharacterTable, Element, FiniteGroup, GroupFunction, GroupSpec};
pub use induction::{
    adjoint_on_l1, induce_multiplier, induce_witnesses, induction_kernel, verify_lemma, InducedWitnesses,
    InductionKernel, VerificationReport,
};
pub use multiplier::{
    abelian_b2_oracle, abelian_q_oracle, b2_norm, extract_witnesses, gns_witnesses, is_positive_definite, q_norm,
    Multiplier, WitnessPair,
};
pub use vna::{l2_inner, AlgebraElement, AlgebraShape, Block, L2Vector};

/// Tolerance for every structural validation (unitarity, commutation,
/// partitions of unity, homomorphism identities).
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Default SDP tolerance for norm computations.
pub const SDP_TOL: f64 = 1e-7;
