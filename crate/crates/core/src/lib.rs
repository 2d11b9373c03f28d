//! Discrete minimal surfaces built from discrete holomorphic quadratic
//! differentials.
//!
//! The pipeline runs planar net `z` + edge weights `q` → Weierstrass dual
//! 1-form → complex surface `F` on the dual mesh → associated family
//! `Re(e^{iθ} F)`. Each stage ships with a residual-based verifier so the
//! geometric claims (closedness, A-/C-minimality, self-stress balance, area
//! criticality) can be certified numerically.
//!
//! Per-vertex and per-edge kernels run on rayon when the `parallel` feature
//! is enabled (the default) and fall back to plain iterators otherwise.

pub mod cubic;
pub mod curv;
mod error;
pub mod io;
pub mod mesh;
pub mod holo;
mod par;
pub mod stress;
pub mod tol;
pub mod weier;

pub use error::{Error, Result};
pub use mesh::{DualOneForm, FormValue, Mesh};

pub use nalgebra::Vector3;
pub use num_complex::Complex64;

/// Complex 3-vector, the value space of the Weierstrass form.
pub type CVector3 = Vector3<Complex64>;
