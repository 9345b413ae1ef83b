//! Two-stage pulse-group search: integer group amplitudes on a uniform grid, then
//! continuous refinement of group timings under a bandwidth penalty.

mod bfgs;
mod config;
mod rescale;
mod search;
mod stage1;
mod stage2;

pub use bfgs::{minimize, BfgsOptions, BfgsReport, Bounds};
pub use config::{J1Form, SearchConfig};
pub use rescale::{universal_rescale, RescaledPoint};
pub use search::{rank_solutions, search, search_level};
pub use stage1::{
    cost_stage1, cost_stage1_with_gradient, integer_cost_stage1, stage1_search, GroupModel,
    GroupVector, Stage1Candidate,
};
pub use stage2::{cost_stage2, expand_groups, stage2_refine, Stage2Model};
