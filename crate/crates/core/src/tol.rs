//! Default tolerances.
//!
//! Every identity checked by this crate is exact in real arithmetic, so the
//! bands below only absorb floating point roundoff. Values marked "relative"
//! are multiplied by the scale of the object under test (largest edge length
//! for surfaces, largest edge value for 1-forms).

/// Closedness of a dual 1-form, relative to the largest edge value.
pub const CLOSEDNESS_REL: f64 = 1e-9;

/// Both holomorphicity sums, relative to the matching edge-value scale.
pub const QHD_REL: f64 = 1e-9;

/// Reject a Gauss map edge when `|N_i + N_j|` falls below this.
pub const ADMISSIBILITY_EPS: f64 = 1e-8;

/// Unit-norm check for Gauss map vectors.
pub const UNIT_NORM: f64 = 1e-12;

/// Distance of a face vertex from its supporting plane, relative.
pub const PLANARITY_REL: f64 = 1e-8;

/// Edgewise and vertexwise algebraic identities, relative.
pub const IDENTITY_REL: f64 = 1e-10;

/// Imaginary residue allowed in `q = i du(e*) dz(e)` before it is discarded.
pub const IMAG_RESIDUE_REL: f64 = 1e-12;

/// Accepted deviation of an isothermic quad's cross-ratio from -1.
pub const CROSS_RATIO: f64 = 1e-8;

/// Edges of a realization shorter than this (relative) count as degenerate.
pub const DEGENERATE_REL: f64 = 1e-12;

/// Central finite difference step.
pub const FD_STEP: f64 = 1e-5;

/// Finite-difference gradient agreement, relative.
pub const FD_REL: f64 = 1e-6;

/// Default number of uniformly spaced samples in an associated-family sweep.
pub const THETA_SAMPLES: usize = 16;

/// `θ_k = 2πk / n` for `k = 0..n`.
pub fn theta_samples(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| std::f64::consts::TAU * k as f64 / n as f64)
        .collect()
}
