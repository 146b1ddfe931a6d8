//! Finite groupoids and complexes of their representations, with the
//! pullback, both Kan extensions, duality, norm maps and base change along
//! homotopy pullbacks.

mod functors;
mod group;
mod groupoid;

pub use functors::{
    carrier_of, dual, dual_map, homotopy_pullback, is_cohomologically_proper, mackey_check, norm_map, restrict,
    restrict_map, restrict_rep, search_iso, shriek_push, star_push, star_push_map, unit, upper_shriek, vertexwise_resolution, DoubleCoset,
    HtpyPullback, MackeyReport, ProperReport, ShriekPush, Verdict,
};
pub use group::{FinGroup, GroupFile};
pub use groupoid::{rep_from_file, rep_to_file, FinGroupoid, GpdMap, GpdRepFile, GroupoidCarrier};

use crate::homlib::HomError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrpError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Hom(#[from] HomError),
}
