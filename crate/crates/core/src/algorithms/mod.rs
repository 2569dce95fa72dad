//! List scheduling, local search and local-optimality predicates.

pub mod list;
pub mod local_search;
pub mod near_list;
pub mod optimality;

pub use list::{list_schedule, lpt_order, lpt_schedule, ListScheduler};
pub use local_search::{find_improving_move, local_search, LocalSearchResult, MoveRecord, Pivot};
pub use near_list::{find_near_list_order, is_near_list, DEFAULT_ORDER_SEARCH_LIMIT};
pub use optimality::{
    is_jump_optimal, is_lex_jump_optimal, is_locally_optimal, is_locally_optimal_naive, Neighborhood,
};
