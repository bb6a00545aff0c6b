//! Graph-theoretic tools for polynomially growing free group automorphisms:
//! Stallings folding and covers, iteration of improved relative train track
//! representatives, growth degrees, growth and path units, immersions that
//! carry iterates of a path, and homology growth of finite covers.

pub mod apt;
pub mod fit;
pub mod folding;
pub mod graph;
pub mod growth_units;
pub mod homology;
pub mod labelled;
pub mod path_units;
pub mod rep;
pub mod suite;
