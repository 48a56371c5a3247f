//! Structural optimization of individual rules, before any physical
//! planning: pick a join order by enumerating rooted spanning trees of the
//! join graph under a variable-width cost model, and optionally reduce
//! wide joins with sideways information passing.

pub mod join_graph;
pub mod plan;
pub mod sip;

pub use join_graph::{JoinEdge, JoinGraph, JoinNode};
pub use plan::{
    enumerate_rooted_jsts, listing_chain, plan_cost, select_plan, select_plan_with_cap, Fallback,
    PlanCost, RootedJst, SearchSpaceExceeded, SelectedPlan, DEFAULT_CANDIDATE_CAP,
};
pub use sip::{default_visit_order, rewrite_program, sip_rewrite, NotApplicable, SipMode, SipRewrite};
