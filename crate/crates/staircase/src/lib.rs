//! Exact-arithmetic renormalization on quadrangulations of translation
//! surfaces by staircase moves (a planar generalization of continued
//! fractions), together with the structures the algorithm certifies:
//! geometric best approximations, bispecial words of the cutting-sequence
//! language, and systole/Lagrange data along Teichmüller geodesics.
//!
//! Module map:
//! - [`exactnum`]: exact scalars over ℚ or a real quadratic field ℚ(√D);
//! - [`combinatorics`]: permutation pairs (π_ℓ, π_r), cycles, move action,
//!   trees of relations, involution recovery, and the reachability graph;
//! - [`quadrangulation`]: wedges, validation, diagonals, area, serialization;
//! - [`moves`]: staircase detection, move matrices, rotation, forward and
//!   backward moves, policies, and run loops with Keane stopping;
//! - [`iet`]: bipartite interval exchange maps, suspensions, cutting
//!   sequences, and exact segment tracing through the quadrilateral charts;
//! - [`diophantine`]: best-approximation streams and the independent
//!   unfolding oracle;
//! - [`language`]: bispecial words via the L/R/D recursion and the
//!   substitution decomposition of diagonal words;
//! - [`teich`]: systole envelopes and Lagrange estimates along the geodesic;
//! - [`render`]: static SVG pictures of quadrangulations;
//! - [`fixtures`]: the reference surfaces used across tests and docs.

pub mod combinatorics;
pub mod diophantine;
pub mod exactnum;
pub mod fixtures;
pub mod iet;
pub mod language;
pub mod moves;
pub mod quadrangulation;
pub mod render;
pub mod teich;
