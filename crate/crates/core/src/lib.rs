//! Rank approximation over completed group algebras of finitely presented
//! pro-p groups.
//!
//! The pipeline: parse a presentation whose relators push distinguished
//! commutators onto kernel words (`presentations`), build the truncated
//! quotient of the mod-p free power series algebra by the relator ideal
//! (`free_series`, `quotient`), enumerate the finite p-group of grouplike
//! units at each level, and compute normalized ranks of matrices over the
//! group ring through their regular representations (`rank_approx`). The
//! normalized values converge from below to an integer; the reports track
//! the gap at each level.
//!
//! Two independent structural decompositions cross-check the quotients:
//! a skew power series layer over the kernel subalgebra with its twist and
//! derivation maps (`skew`), and formal inverses via localization triples
//! over small coefficient rings (`localization`). Exact F_p linear algebra,
//! bit packed for p = 2, lives in `fplinalg`.

pub mod error;
pub mod fplinalg;
pub mod free_series;
pub mod localization;
pub mod presentations;
pub mod presets;
pub mod quotient;
pub mod rank_approx;
pub mod skew;

pub use error::{Error, Result};
pub use presentations::{FlagInfo, FlagStructure, GroupPresentation, GroupWord};
pub use quotient::{build_quotient, finite_quotient, FiniteQuotient, QuotientAlgebra};
pub use rank_approx::{rank_sequence, GroupRingMatrix, RankConfig, RankReport};
