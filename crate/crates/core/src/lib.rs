//! Median algebras at desk scale: finite median graphs, pocsets, symbolic
//! products of lines, free-group trees and finite factors, and the dynamics of
//! finitely generated group actions on them.

pub mod action;
pub mod automorphism;
pub mod closure;
pub mod error;
pub mod finite_action;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod metric;
pub mod minset;
pub mod oracle;
pub mod pocset;
pub mod stallings;
pub mod window;
pub mod word;

pub use error::{Error, Result};
pub use automorphism::{Automorphism, FactorMap, LineMap, TreeMap};
pub use graph::{Graph, MedianGraph};
pub use instance::{Coord, Factor, Point, ProductInstance, SymHalfspace};
pub use pocset::Pocset;
pub use word::{SignedPerm, Word};
pub use action::{BarClass, GroupAction, HClass, HalfspaceClassification, SubInstance};
pub use metric::{Rational, WallWeighting};
pub use window::Window;
