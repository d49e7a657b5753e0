pub mod combinatorics;
pub mod error;
pub mod exact_arith;
pub mod gfq;
pub mod witt;
pub mod mn_series;
pub mod sigma_ring;
pub mod newton;
pub mod expansions;
pub mod cli;
pub mod selftest;
