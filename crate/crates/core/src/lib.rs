//! Edge-disjoint routing of terminal pairs in graphs, with constructive
//! routers for Cartesian products, an exact search oracle and cut-condition
//! certificates.

pub mod graph;
pub mod pairing;
pub mod cut;
pub mod matching;
pub mod oracle;
pub mod constructions;
pub mod product_router;
pub mod bipartite_router;
pub mod manifest;
mod flow;
