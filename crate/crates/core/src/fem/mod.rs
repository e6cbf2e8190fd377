//! Plane-stress finite elements: parametric specimen geometry, pixel
//! meshing, and an implicit displacement-controlled solver producing
//! full-field sample histories.

pub mod band;
pub mod element;
pub mod geometry;
pub mod mesh;
pub mod solver;

pub use geometry::{Circle, GeometryError, GeometryKind, SpecimenGeometry};
pub use mesh::{generate_mesh, Mesh, MeshError};
pub use solver::{
    solve, solve_prescribed, write_fields_csv, write_reactions_csv, EdgeConstraint, FemError,
    FieldHistory, LoadProtocol, SamplePoint, Snapshot,
};
