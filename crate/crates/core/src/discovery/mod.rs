//! Recurring-pattern discovery: URP affinity, the pattern objective and the
//! greedy search over pattern matrices.

pub mod affinity;
pub mod cache;
pub mod objective;
pub mod search;

pub use affinity::{affinity, affinity_from_deltas, size_ratio, urp_affinity, Urp};
pub use cache::{precompute_affinity_cache, AffinityCache};
pub use objective::{candidate_gain, rp_objective, Scorer};
pub use search::{discover_rps, expand_rp, grid_search_params, make_pattern, select_initials};
