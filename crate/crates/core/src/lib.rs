//! Super-replication of claims in a cash/fuel market with proportional
//! transaction costs and a thermal power plant.

pub mod cones;
pub mod csp;
pub mod dual;
pub mod hedge;
pub mod lp;
pub mod production;
pub mod sample;
pub mod tree;
