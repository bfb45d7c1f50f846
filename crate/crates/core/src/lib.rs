//! Explicit Lipschitz embeddings of persistence diagrams with a fixed number
//! of points into Hilbert space, under the bottleneck metric.
//!
//! The core is generic over [`Scalar`] (`f32`, `f64`); the aliases below fix
//! `f64`.

// `!(a < b)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounded;
pub mod diagram;
pub mod error;
pub mod grid;
pub mod inject;
pub mod io;
pub mod matching;
pub mod multiscale;
pub mod scalar;
pub mod series;
pub mod verify;

pub use bounded::{
    count_landmarks, non_injectivity_witness, phi3, rho3_linear, rho3_steps, uniform_spec,
    BoundedEmbeddingSpec, DenseLayout, Phi3Image, UniformSpec, Witness,
};
pub use diagram::{bottleneck_bruteforce, bottleneck_distance, point_distance, DiagramPoint, PersistenceDiagram};
pub use error::{Error, Result};
pub use inject::{angle_value, injective_embed, reconstruct, AnchorSet};
pub use grid::{grid_candidates, phi_scale, GridKey, LandmarkKey, SparseEmbedding};
pub use multiscale::{
    certified_distance, rho_minus, rho_minus_improved, CertifiedInterval, ScaleFamily, ScaleSchedule,
    ScheduleKind,
};
pub use scalar::Scalar;

pub type Point = DiagramPoint<f64>;
pub type Diagram = PersistenceDiagram<f64>;
pub type Embedding = SparseEmbedding<f64>;
pub type Schedule = ScaleSchedule<f64>;
pub type BoundedSpec = BoundedEmbeddingSpec<f64>;
