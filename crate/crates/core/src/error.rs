use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("face {face} has fewer than three vertices")]
    FaceTooSmall { face: usize },
    #[error("face {face} repeats vertex {vertex}")]
    RepeatedVertex { face: usize, vertex: usize },
    #[error("face {face} references unknown vertex {vertex}")]
    UnknownVertex { face: usize, vertex: usize },
    #[error("edge {a}-{b} has three or more incident faces")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("edge {a}->{b} is traversed twice in the same direction")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("vertex {0} is not used by any face")]
    IsolatedVertex(usize),
    #[error("vertex {0} has a non-manifold neighbourhood")]
    NonManifoldVertex(usize),
    #[error("face {0} does not exist")]
    UnknownFace(usize),
    #[error("no value on interior edge {a}-{b}")]
    MissingEdgeValue { a: usize, b: usize },
    #[error("dual 1-form not closed at vertex {vertex}: residual {residual:e} > {tolerance:e}")]
    NotClosed {
        vertex: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error("face {0} is not reachable across interior dual edges")]
    DisconnectedDual(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("edge {a}-{b} is degenerate (coincident endpoints)")]
    DegenerateEdge { a: usize, b: usize },
    #[error("Mobius coefficients satisfy ad - bc = 0")]
    SingularMobius,
    #[error("vertex {0} is mapped to infinity")]
    VertexAtInfinity(usize),
    #[error("face {0} is not a triangle")]
    NotTriangulated(usize),
    #[error("triangle {0} has zero area")]
    DegenerateTriangle(usize),
    #[error("q on edge {a}-{b} has imaginary residue {imag:e}")]
    NonRealDifferential { a: usize, b: usize, imag: f64 },
    #[error("not a P-graph: {0}")]
    NotPGraph(String),
    #[error("P-labeling cannot be made consistent at edge {a}-{b}")]
    InconsistentLabeling { a: usize, b: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("quad ({m},{n}) has cross-ratio {re}{im:+}i, expected -1")]
    CrossRatio { m: usize, n: usize, re: f64, im: f64 },

    #[error("q is not holomorphic: residual {residual:e} at vertex {vertex}")]
    NotHolomorphic { vertex: usize, residual: f64 },
    #[error("Gauss map is not admissible on edge {a}-{b}")]
    Inadmissible { a: usize, b: usize },
    #[error("Gauss map vector at vertex {0} is not unit length")]
    NotUnit(usize),
    #[error("surface is not A-minimal on edge {a}-{b}: residual {residual:e}")]
    NotAMinimal { a: usize, b: usize, residual: f64 },
    #[error("normals on edge {a}-{b} are parallel but the edge has nonzero length")]
    ParallelNormals { a: usize, b: usize },
    #[error("dual face of vertex {vertex} is not planar (distance {distance:e})")]
    NonPlanarFace { vertex: usize, distance: f64 },
    #[error("Gauss map face {face} is not planar: incidence residual {residual:e}")]
    NonPlanarGaussFace { face: usize, residual: f64 },
    #[error("face {0} has vanishing vector area")]
    ZeroVectorArea(usize),
    #[error("face {0} of the Gauss map spans a plane through the origin")]
    SingularPolarFace(usize),

    #[error("{0}")]
    Document(String),
}
