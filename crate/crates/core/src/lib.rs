//! Exact Dehn twist calculus on the disc with `k` crosscaps.
//!
//! Mapping classes of `N_{k,1}` act on the free group `π₁ = F_k`; this crate
//! represents them as factorizations over twists `T(i,j)`, the crosscap
//! transposition `U` and the boundary twist `B`, evaluates them as free-group
//! automorphisms, and checks identities between them exactly.
//!
//! ```
//! use twistlab::{ElementaryTable, expr, mc_equal};
//!
//! let table = ElementaryTable::for_crosscaps(3).unwrap();
//! let env = Default::default();
//! let lhs = expr::mapping_class("T(1,2)*T(2,3)*T(1,2)", &table, &env).unwrap();
//! let rhs = expr::mapping_class("T(2,3)*T(1,2)*T(2,3)", &table, &env).unwrap();
//! assert!(mc_equal(&lhs, &rhs).unwrap());
//! ```

pub mod error;
pub mod expr;
pub mod homology;
pub mod mapclass;
pub mod relations;
pub mod surface;
pub mod word;

pub use error::{Error, Result};
pub use homology::{
    abelianize, double_cover_h1, double_cover_lift, gamma_prime_member, preserves_character,
    transvection_rank_lower_bound, DoubleCoverBasis, IntMatrix,
};
pub use mapclass::{braid_with, commutes, first_difference, mc_equal, twist_about, MappingClass};
pub use relations::{find_triangle, run_suite, verify_relation, Catalog, RelationFixture, Status, SuiteReport};
pub use surface::{
    linked, validate_table, CurveSpec, Elementary, ElementaryTable, Interval, Linking, SurfaceModel,
    ValidationReport,
};
pub use word::{AutWitness, FreeMap, Word, WordError};
