//! Identification of interventional distributions `p(Y(a))` in acyclic
//! directed mixed graphs, with exact numerical verification against discrete
//! latent-variable models.

pub mod graph;
pub mod estimand;
pub mod rng;
pub mod identify;
pub mod oracle;
