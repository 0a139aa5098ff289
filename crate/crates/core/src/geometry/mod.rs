//! Exact rational geometry: hulls, membership, a small simplex solver and mesh export.

pub mod hull;
pub mod lp;
pub mod mesh;
pub mod rational;

pub use hull::{from_halfspaces, hull3, in_convex_hull, is_extreme, Facet, Membership, Plane, Polytope3};
pub use lp::{solve_lp, Constraint, LinearProgram, LpOutcome, LpSolution, Relation, Sense};
pub use mesh::{export_mesh, export_mesh_with, is_watertight, parse_obj, MeshFormat, ObjMesh};
pub use rational::{fmt_rational, int, parse_rational, rat, to_f64, Rational, Triple};
