pub mod constants;
pub mod graph_core;
pub mod local_runtime;
pub mod nibble;
pub mod rng;
pub mod symmetry;
pub mod tree_decomp;
pub mod lll;
pub mod lower_bounds;
