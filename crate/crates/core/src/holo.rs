//! Discrete holomorphic quadratic differentials on planar nets.
//!
//! A real edge function `q` is holomorphic with respect to a planar
//! realization `z` when, at every interior vertex `i`,
//! `Σ_j q_ij = 0` and `Σ_j q_ij / (z_j - z_i) = 0`.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::mesh::{EdgeId, Mesh, VertexId};
use crate::{par, tol, Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Complex position per primal vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarNet(pub Vec<Complex64>);

impl PlanarNet {
    pub fn new(z: Vec<Complex64>) -> Self {
        PlanarNet(z)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks `z_i != z_j` on every edge.
    pub fn check_nondegenerate(&self, mesh: &Mesh) -> Result<()> {
        if self.0.len() != mesh.n_vertices() {
            return Err(Error::LengthMismatch {
                expected: mesh.n_vertices(),
                got: self.0.len(),
            });
        }
        for e in mesh.edges() {
            if self.0[e.lo] == self.0[e.hi] {
                return Err(Error::DegenerateEdge { a: e.lo, b: e.hi });
            }
        }
        Ok(())
    }

    /// `z_j - z_i`.
    pub fn dz(&self, i: VertexId, j: VertexId) -> Complex64 {
        self.0[j] - self.0[i]
    }

    pub fn max_edge_length(&self, mesh: &Mesh) -> f64 {
        mesh.edges()
            .iter()
            .map(|e| self.dz(e.lo, e.hi).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<VertexId> for PlanarNet {
    type Output = Complex64;
    fn index(&self, v: VertexId) -> &Complex64 {
        &self.0[v]
    }
}

/// Real value per interior edge; symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadDiff {
    values: Vec<f64>,
}

impl QuadDiff {
    pub fn zeros(mesh: &Mesh) -> Self {
        QuadDiff {
            values: vec![0.0; mesh.n_edges()],
        }
    }

    /// `value(lo, hi)` on every interior edge; boundary edges stay zero.
    pub fn from_fn<F: Fn(VertexId, VertexId) -> f64>(mesh: &Mesh, value: F) -> Self {
        let values = mesh
            .edges()
            .iter()
            .map(|e| if e.is_interior() { value(e.lo, e.hi) } else { 0.0 })
            .collect();
        QuadDiff { values }
    }

    pub fn get(&self, mesh: &Mesh, i: VertexId, j: VertexId) -> Option<f64> {
        mesh.edge_id(i, j).map(|e| self.values[e])
    }

    pub fn on_edge(&self, e: EdgeId) -> f64 {
        self.values[e]
    }

    pub fn set(&mut self, mesh: &Mesh, i: VertexId, j: VertexId, value: f64) -> Result<()> {
        let e = mesh
            .edge_id(i, j)
            .filter(|&e| mesh.edge(e).is_interior())
            .ok_or(Error::MissingEdgeValue {
                a: i.min(j),
                b: i.max(j),
            })?;
        self.values[e] = value;
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        QuadDiff {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Coefficients of `Φ(z) = (az + b) / (cz + d)`, normalized to `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusCoeffs {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusCoeffs {
    /// Rescales by `sqrt(ad - bc)`; the principal root is used.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() == 0.0 {
            return Err(Error::SingularMobius);
        }
        let s = det.sqrt();
        Ok(MobiusCoeffs {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        MobiusCoeffs {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    pub fn apply(&self, z: Complex64) -> Option<Complex64> {
        let den = self.c * z + self.d;
        (den.norm() != 0.0).then(|| (self.a * z + self.b) / den)
    }

    /// `Φ ∘ Ψ`.
    pub fn compose(&self, inner: &MobiusCoeffs) -> MobiusCoeffs {
        MobiusCoeffs {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }
}

/// `w_i = Φ(z_i)`; fails if some vertex is sent to infinity.
pub fn apply_mobius(z: &PlanarNet, phi: &MobiusCoeffs) -> Result<PlanarNet> {
    z.0.iter()
        .enumerate()
        .map(|(v, &zi)| phi.apply(zi).ok_or(Error::VertexAtInfinity(v)))
        .collect::<Result<Vec<_>>>()
        .map(PlanarNet)
}

/// The two holomorphicity sums at every interior vertex.
#[derive(Clone, Debug)]
pub struct QhdResiduals {
    pub vertices: Vec<VertexId>,
    /// `Σ_j q_ij`
    pub sum_q: Vec<f64>,
    /// `Σ_j q_ij / (z_j - z_i)`
    pub sum_q_dz: Vec<Complex64>,
    /// `max |q_ij|` over interior edges.
    pub scale_q: f64,
    /// `max |q_ij| / |z_j - z_i|` over interior edges.
    pub scale_q_dz: f64,
}

impl QhdResiduals {
    /// `(vertex, |Σq|)` with the largest first residual.
    pub fn worst_sum_q(&self) -> Option<(VertexId, f64)> {
        worst(&self.vertices, self.sum_q.iter().map(|r| r.abs()))
    }

    pub fn worst_sum_q_dz(&self) -> Option<(VertexId, f64)> {
        worst(&self.vertices, self.sum_q_dz.iter().map(|r| r.norm()))
    }

    /// Largest of the two residuals, each divided by its own scale.
    pub fn max_relative(&self) -> f64 {
        self.worst_relative().map_or(0.0, |w| w.1)
    }

    pub fn worst_relative(&self) -> Option<(VertexId, f64)> {
        let rel = |r: f64, s: f64| if s > 0.0 { r / s } else { r };
        let a = self
            .worst_sum_q()
            .map(|(v, r)| (v, rel(r, self.scale_q)));
        let b = self
            .worst_sum_q_dz()
            .map(|(v, r)| (v, rel(r, self.scale_q_dz)));
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.1 > a.1 { b } else { a }),
            (a, b) => a.or(b),
        }
    }

    pub fn passes(&self, rel_tol: f64) -> bool {
        self.max_relative() <= rel_tol
    }
}

fn worst(vertices: &[VertexId], residuals: impl Iterator<Item = f64>) -> Option<(VertexId, f64)> {
    vertices
        .iter()
        .copied()
        .zip(residuals)
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

pub fn verify_qhd(mesh: &Mesh, z: &PlanarNet, q: &QuadDiff) -> Result<QhdResiduals> {
    z.check_nondegenerate(mesh)?;
    let sums = par::map_slice(mesh.interior_vertices(), |&v| {
        let star = mesh.star(v).unwrap();
        let mut s = 0.0;
        let mut t = Complex64::new(0.0, 0.0);
        for (&j, &e) in star.neighbors.iter().zip(&star.edges) {
            let qe = q.on_edge(e);
            s += qe;
            t += qe / z.dz(v, j);
        }
        (s, t)
    });
    let mut scale_q: f64 = 0.0;
    let mut scale_q_dz: f64 = 0.0;
    for &e in mesh.interior_edges() {
        let edge = mesh.edge(e);
        let qe = q.on_edge(e).abs();
        scale_q = scale_q.max(qe);
        scale_q_dz = scale_q_dz.max(qe / z.dz(edge.lo, edge.hi).norm());
    }
    let (sum_q, sum_q_dz) = sums.into_iter().unzip();
    Ok(QhdResiduals {
        vertices: mesh.interior_vertices().to_vec(),
        sum_q,
        sum_q_dz,
        scale_q,
        scale_q_dz,
    })
}

/// Errors with the worst vertex unless both sums pass at `rel_tol`.
pub fn require_qhd(mesh: &Mesh, z: &PlanarNet, q: &QuadDiff, rel_tol: f64) -> Result<()> {
    let r = verify_qhd(mesh, z, q)?;
    match r.worst_relative() {
        Some((vertex, residual)) if residual > rel_tol => {
            Err(Error::NotHolomorphic { vertex, residual })
        }
        _ => Ok(()),
    }
}

fn third_vertex(face: &[VertexId], i: VertexId, j: VertexId) -> VertexId {
    *face.iter().find(|&&v| v != i && v != j).unwrap()
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    (a.conj() * b).im
}

/// Signed area of the triangle `(z_i, z_j, z_k)`.
pub fn signed_area(zi: Complex64, zj: Complex64, zk: Complex64) -> f64 {
    0.5 * cross(zj - zi, zk - zi)
}

fn check_triangle(mesh: &Mesh, z: &PlanarNet, f: usize) -> Result<[VertexId; 3]> {
    let face = mesh.face(f);
    if face.len() != 3 {
        return Err(Error::NotTriangulated(f));
    }
    let [i, j, k] = [face[0], face[1], face[2]];
    let area = signed_area(z[i], z[j], z[k]);
    let longest = [z.dz(i, j), z.dz(j, k), z.dz(k, i)]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.norm()));
    if area.abs() <= tol::DEGENERATE_REL * longest * longest {
        return Err(Error::DegenerateTriangle(f));
    }
    Ok([i, j, k])
}

/// Gradient of the piecewise linear extension of `u`, as a complex number,
/// per triangle.
pub fn face_gradients(mesh: &Mesh, z: &PlanarNet, u: &[f64]) -> Result<Vec<Complex64>> {
    par::try_map_range(mesh.n_faces(), |f| {
        let [i, j, k] = check_triangle(mesh, z, f)?;
        let area = signed_area(z[i], z[j], z[k]);
        let num = u[i] * z.dz(j, k) + u[j] * z.dz(k, i) + u[k] * z.dz(i, j);
        Ok(I * num / (2.0 * area))
    })
}

/// Builds `q_ij = i du_z(e*_ij) dz(e_ij)` from a vertex function on a planar
/// triangulation, where `du_z(e*_ij)` is the jump of the conjugated face
/// gradient from the right face to the left face.
///
/// The product is real for any `u`; its imaginary residue is checked before
/// being discarded.
pub fn qhd_from_harmonic(mesh: &Mesh, z: &PlanarNet, u: &[f64]) -> Result<QuadDiff> {
    z.check_nondegenerate(mesh)?;
    if u.len() != mesh.n_vertices() {
        return Err(Error::LengthMismatch {
            expected: mesh.n_vertices(),
            got: u.len(),
        });
    }
    let grad = face_gradients(mesh, z, u)?;
    let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.norm())) * z.max_edge_length(mesh);
    let mut q = QuadDiff::zeros(mesh);
    for &e in mesh.interior_edges() {
        let edge = mesh.edge(e);
        let (l, r) = (edge.left.unwrap(), edge.right.unwrap());
        let du = grad[l].conj() - grad[r].conj();
        let value = I * du * z.dz(edge.lo, edge.hi);
        if value.im.abs() > tol::IMAG_RESIDUE_REL * scale {
            return Err(Error::NonRealDifferential {
                a: edge.lo,
                b: edge.hi,
                imag: value.im,
            });
        }
        q.values[e] = value.re;
    }
    Ok(q)
}

/// Cotangent weight `cot∠jki + cot∠ilj` of every interior edge of a planar
/// triangulation, indexed by edge id (zero on boundary edges).
pub fn cotan_weights(mesh: &Mesh, z: &PlanarNet) -> Result<Vec<f64>> {
    for f in 0..mesh.n_faces() {
        check_triangle(mesh, z, f)?;
    }
    let cot_at = |f: usize, i: VertexId, j: VertexId| {
        let k = third_vertex(mesh.face(f), i, j);
        let (a, b) = (z[i] - z[k], z[j] - z[k]);
        let p = a.conj() * b;
        p.re / p.im.abs()
    };
    Ok(mesh
        .edges()
        .iter()
        .map(|e| match (e.left, e.right) {
            (Some(l), Some(r)) => cot_at(l, e.lo, e.hi) + cot_at(r, e.lo, e.hi),
            _ => 0.0,
        })
        .collect())
}

/// `Σ_j (cot∠jki + cot∠ilj)(u_j - u_i)` per interior vertex.
pub fn cotan_harmonic_residuals(
    mesh: &Mesh,
    z: &PlanarNet,
    u: &[f64],
) -> Result<Vec<(VertexId, f64)>> {
    let w = cotan_weights(mesh, z)?;
    Ok(par::map_slice(mesh.interior_vertices(), |&v| {
        let star = mesh.star(v).unwrap();
        let s = star
            .neighbors
            .iter()
            .zip(&star.edges)
            .map(|(&j, &e)| w[e] * (u[j] - u[v]))
            .sum();
        (v, s)
    }))
}

/// Alternating `±1` labels on the interior edges of a P-graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLabeling {
    signs: Vec<i8>,
}

impl PLabeling {
    pub fn on_edge(&self, e: EdgeId) -> i8 {
        self.signs[e]
    }

    pub fn get(&self, mesh: &Mesh, i: VertexId, j: VertexId) -> Option<i8> {
        mesh.edge_id(i, j).map(|e| self.signs[e])
    }

    pub fn to_quad_diff(&self) -> QuadDiff {
        QuadDiff {
            values: self.signs.iter().map(|&s| s as f64).collect(),
        }
    }
}

fn check_pgraph(mesh: &Mesh) -> Result<()> {
    for &v in mesh.interior_vertices() {
        let deg = mesh.vertex_edges(v).len();
        if deg != 4 {
            return Err(Error::NotPGraph(format!(
                "interior vertex {v} has degree {deg}"
            )));
        }
    }
    if let Some(f) = (0..mesh.n_faces()).find(|&f| !mesh.face(f).len().is_multiple_of(2)) {
        return Err(Error::NotPGraph(format!("face {f} has odd length")));
    }
    Ok(())
}

/// The P-labeling normalized to `+1` on the lowest-id interior edge of each
/// constrained component. Unconstrained interior edges get `+1`.
pub fn p_labeling(mesh: &Mesh) -> Result<PLabeling> {
    check_pgraph(mesh)?;
    // adjacent edges around an interior vertex carry opposite signs
    let mut flips: Vec<Vec<EdgeId>> = vec![Vec::new(); mesh.n_edges()];
    for &v in mesh.interior_vertices() {
        let edges = &mesh.star(v).unwrap().edges;
        for l in 0..edges.len() {
            let (a, b) = (edges[l], edges[(l + 1) % edges.len()]);
            flips[a].push(b);
            flips[b].push(a);
        }
    }
    let mut signs = vec![0i8; mesh.n_edges()];
    for &root in mesh.interior_edges() {
        if signs[root] != 0 {
            continue;
        }
        signs[root] = 1;
        let mut queue = VecDeque::from([root]);
        while let Some(e) = queue.pop_front() {
            for &g in &flips[e] {
                if signs[g] == 0 {
                    signs[g] = -signs[e];
                    queue.push_back(g);
                } else if signs[g] == signs[e] {
                    let edge = mesh.edge(g);
                    return Err(Error::InconsistentLabeling {
                        a: edge.lo,
                        b: edge.hi,
                    });
                }
            }
        }
    }
    Ok(PLabeling { signs })
}

/// `1/(z_1-z_0) - 1/(z_2-z_0) + 1/(z_3-z_0) - 1/(z_4-z_0)` per interior
/// vertex, neighbours in counterclockwise order starting at the lowest-id
/// incident edge.
pub fn pnet_residuals(mesh: &Mesh, z: &PlanarNet) -> Result<Vec<(VertexId, Complex64)>> {
    check_pgraph(mesh)?;
    z.check_nondegenerate(mesh)?;
    Ok(par::map_slice(mesh.interior_vertices(), |&v| {
        let star = mesh.star(v).unwrap();
        let s = star
            .neighbors
            .iter()
            .enumerate()
            .map(|(l, &j)| {
                let t = 1.0 / z.dz(v, j);
                if l % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .sum();
        (v, s)
    }))
}

/// Scale for P-net residuals: `max 1/|z_j - z_i|` over interior edges.
pub fn pnet_scale(mesh: &Mesh, z: &PlanarNet) -> f64 {
    mesh.interior_edges()
        .iter()
        .map(|&e| 1.0 / z.dz(mesh.edge(e).lo, mesh.edge(e).hi).norm())
        .fold(0.0, f64::max)
}

/// Built-in planar nets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NetKind {
    /// `z = m + i n`.
    Grid { m: usize, n: usize },
    /// `z = exp(a m + i b n)`.
    Exp { m: usize, n: usize, a: f64, b: f64 },
    /// Intersection points of the equal-radius orthogonal circle pattern:
    /// `z = r (1 + i)(m + i n)`, circles centred on the face centres.
    CirclePattern { m: usize, n: usize, radius: f64 },
}

/// A net on the `m x n` vertex grid; vertex `(x, y)` has id `x * n + y`.
#[derive(Clone, Debug)]
pub struct GridNet {
    pub mesh: Mesh,
    pub z: PlanarNet,
    pub m: usize,
    pub n: usize,
}

impl GridNet {
    pub fn id(&self, x: usize, y: usize) -> VertexId {
        x * self.n + y
    }
}

/// Quad faces `(x,y), (x+1,y), (x+1,y+1), (x,y+1)` on an `m x n` vertex grid.
pub fn grid_mesh(m: usize, n: usize) -> Result<Mesh> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidParameters(format!(
            "grid sizes must be at least 2, got {m}x{n}"
        )));
    }
    let id = |x: usize, y: usize| x * n + y;
    let mut faces = Vec::with_capacity((m - 1) * (n - 1));
    for x in 0..m - 1 {
        for y in 0..n - 1 {
            faces.push(vec![id(x, y), id(x + 1, y), id(x + 1, y + 1), id(x, y + 1)]);
        }
    }
    Mesh::new(m * n, faces)
}

type Placement = Box<dyn Fn(f64, f64) -> Complex64>;

pub fn generate_net(kind: NetKind) -> Result<GridNet> {
    let (m, n, pos): (usize, usize, Placement) = match kind {
        NetKind::Grid { m, n } => (m, n, Box::new(Complex64::new)),
        NetKind::Exp { m, n, a, b } => {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameters("a and b must be finite".into()));
            }
            if (Complex64::new(a, 0.0).exp() - 1.0).norm() < 1e-12 {
                return Err(Error::InvalidParameters(format!(
                    "a = {a} makes horizontal edges degenerate"
                )));
            }
            if (Complex64::new(0.0, b).exp() - 1.0).norm() < 1e-12 {
                return Err(Error::InvalidParameters(format!(
                    "b = {b} gives exp(ib) = 1, vertical edges degenerate"
                )));
            }
            (m, n, Box::new(move |x, y| Complex64::new(a * x, b * y).exp()))
        }
        NetKind::CirclePattern { m, n, radius } => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidParameters(format!(
                    "radius must be positive, got {radius}"
                )));
            }
            (
                m,
                n,
                Box::new(move |x, y| radius * Complex64::new(1.0, 1.0) * Complex64::new(x, y)),
            )
        }
    };
    let mesh = grid_mesh(m, n)?;
    let z = (0..m)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .map(|(x, y)| pos(x as f64, y as f64))
        .collect();
    let z = PlanarNet(z);
    z.check_nondegenerate(&mesh)?;
    Ok(GridNet { mesh, z, m, n })
}

/// Circle centres of the regular orthogonal pattern, one per face, in face
/// order of [`grid_mesh`].
pub fn circle_pattern_centers(m: usize, n: usize, radius: f64) -> Vec<Complex64> {
    let mut centers = Vec::new();
    for x in 0..m.saturating_sub(1) {
        for y in 0..n.saturating_sub(1) {
            centers.push(
                radius * Complex64::new(1.0, 1.0) * Complex64::new(x as f64 + 0.5, y as f64 + 0.5),
            );
        }
    }
    centers
}

/// `(z1 - z2)(z3 - z4) / ((z2 - z3)(z4 - z1))`; the unit square gives -1.
pub fn cross_ratio(z1: Complex64, z2: Complex64, z3: Complex64, z4: Complex64) -> Complex64 {
    (z1 - z2) * (z3 - z4) / ((z2 - z3) * (z4 - z1))
}

/// Christoffel-type dual of a planar quad net with all cross-ratios -1.
///
/// `z` is indexed like [`grid_mesh`]; the result satisfies
/// `dz*(horizontal) = 1 / conj(dz)`, `dz*(vertical) = -1 / conj(dz)` and is
/// pinned at `z*(0,0) = 0`.
pub fn isothermic_dual(m: usize, n: usize, z: &[Complex64]) -> Result<Vec<Complex64>> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidParameters(format!(
            "grid sizes must be at least 2, got {m}x{n}"
        )));
    }
    if z.len() != m * n {
        return Err(Error::LengthMismatch {
            expected: m * n,
            got: z.len(),
        });
    }
    let id = |x: usize, y: usize| x * n + y;
    let mut worst: Option<(usize, usize, Complex64, f64)> = None;
    for x in 0..m - 1 {
        for y in 0..n - 1 {
            let cr = cross_ratio(z[id(x, y)], z[id(x + 1, y)], z[id(x + 1, y + 1)], z[id(x, y + 1)]);
            let dev = if cr.is_finite() { (cr + 1.0).norm() } else { f64::INFINITY };
            if worst.is_none_or(|w| dev > w.3) {
                worst = Some((x, y, cr, dev));
            }
        }
    }
    if let Some((x, y, cr, dev)) = worst {
        if dev > tol::CROSS_RATIO {
            return Err(Error::CrossRatio {
                m: x,
                n: y,
                re: cr.re,
                im: cr.im,
            });
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); m * n];
    for x in 0..m {
        if x > 0 {
            let dz = z[id(x, 0)] - z[id(x - 1, 0)];
            out[id(x, 0)] = out[id(x - 1, 0)] + 1.0 / dz.conj();
        }
        for y in 1..n {
            let dz = z[id(x, y)] - z[id(x, y - 1)];
            out[id(x, y)] = out[id(x, y - 1)] - 1.0 / dz.conj();
        }
    }
    Ok(out)
}

/// Sum of the dual edge values around quad `(x, y)`, for every quad.
pub fn isothermic_dual_closedness(m: usize, n: usize, z: &[Complex64]) -> Vec<Complex64> {
    let id = |x: usize, y: usize| x * n + y;
    let h = |x: usize, y: usize| 1.0 / (z[id(x + 1, y)] - z[id(x, y)]).conj();
    let v = |x: usize, y: usize| -1.0 / (z[id(x, y + 1)] - z[id(x, y)]).conj();
    let mut out = Vec::new();
    for x in 0..m - 1 {
        for y in 0..n - 1 {
            out.push(h(x, y) + v(x + 1, y) - h(x, y + 1) - v(x, y));
        }
    }
    out
}

/// One parity class of a grid net, connected along diagonals.
#[derive(Clone, Debug)]
pub struct Sublattice {
    pub mesh: Mesh,
    pub z: PlanarNet,
    /// Grid coordinates of each sublattice vertex.
    pub grid: Vec<(usize, usize)>,
}

/// Vertices with `(x + y) % 2 == parity`; faces are the diamonds around
/// interior grid vertices of the other parity. Only vertices that lie on a
/// diamond are kept.
pub fn sublattice_pnet(m: usize, n: usize, z: &[Complex64], parity: usize) -> Result<Sublattice> {
    if z.len() != m * n {
        return Err(Error::LengthMismatch {
            expected: m * n,
            got: z.len(),
        });
    }
    if m < 3 || n < 3 {
        return Err(Error::InvalidParameters(format!(
            "sublattice needs at least a 3x3 grid, got {m}x{n}"
        )));
    }
    let parity = parity % 2;
    let id = |x: usize, y: usize| x * n + y;
    let mut diamonds = Vec::new();
    for x in 1..m - 1 {
        for y in 1..n - 1 {
            if (x + y) % 2 != parity {
                diamonds.push([(x + 1, y), (x, y + 1), (x - 1, y), (x, y - 1)]);
            }
        }
    }
    let mut index = vec![usize::MAX; m * n];
    for d in &diamonds {
        for &(x, y) in d {
            index[id(x, y)] = 0;
        }
    }
    let mut grid = Vec::new();
    for x in 0..m {
        for y in 0..n {
            if index[id(x, y)] == 0 {
                index[id(x, y)] = grid.len();
                grid.push((x, y));
            }
        }
    }
    let faces = diamonds
        .iter()
        .map(|d| d.iter().map(|&(x, y)| index[id(x, y)]).collect())
        .collect();
    let mesh = Mesh::new(grid.len(), faces)?;
    let zs = PlanarNet(grid.iter().map(|&(x, y)| z[id(x, y)]).collect());
    zs.check_nondegenerate(&mesh)?;
    Ok(Sublattice { mesh, z: zs, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Unit grid split along the `(x,y)-(x+1,y+1)` diagonals.
    fn diagonal_triangulation(m: usize, n: usize) -> (Mesh, PlanarNet) {
        let id = |x: usize, y: usize| x * n + y;
        let mut faces = Vec::new();
        for x in 0..m - 1 {
            for y in 0..n - 1 {
                faces.push(vec![id(x, y), id(x + 1, y), id(x + 1, y + 1)]);
                faces.push(vec![id(x, y), id(x + 1, y + 1), id(x, y + 1)]);
            }
        }
        let mesh = Mesh::new(m * n, faces).unwrap();
        let z = (0..m)
            .flat_map(|x| (0..n).map(move |y| c(x as f64, y as f64)))
            .collect();
        (mesh, PlanarNet(z))
    }

    fn grid_values(m: usize, n: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..m)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .map(|(x, y)| f(x as f64, y as f64))
            .collect()
    }

    /// Independent 5-point Laplacian on the integer grid.
    fn five_point(m: usize, n: usize, u: &[f64]) -> Vec<f64> {
        let id = |x: usize, y: usize| x * n + y;
        let mut out = Vec::new();
        for x in 1..m - 1 {
            for y in 1..n - 1 {
                out.push(
                    u[id(x + 1, y)] + u[id(x - 1, y)] + u[id(x, y + 1)] + u[id(x, y - 1)]
                        - 4.0 * u[id(x, y)],
                );
            }
        }
        out
    }

    #[test]
    fn grid_mu_is_holomorphic() {
        let net = generate_net(NetKind::Grid { m: 3, n: 3 }).unwrap();
        let mu = p_labeling(&net.mesh).unwrap().to_quad_diff();
        let r = verify_qhd(&net.mesh, &net.z, &mu).unwrap();
        assert_eq!(r.vertices, vec![4]);
        assert_eq!(r.sum_q, vec![0.0]);
        assert_eq!(r.sum_q_dz, vec![c(0.0, 0.0)]);
    }

    #[test]
    fn zero_q_has_zero_residuals() {
        let net = generate_net(NetKind::Exp { m: 4, n: 4, a: 0.3, b: 0.4 }).unwrap();
        let r = verify_qhd(&net.mesh, &net.z, &QuadDiff::zeros(&net.mesh)).unwrap();
        assert_eq!(r.max_relative(), 0.0);
    }

    #[test]
    fn single_edge_q_flags_both_endpoints() {
        let net = generate_net(NetKind::Grid { m: 4, n: 4 }).unwrap();
        let mut q = QuadDiff::zeros(&net.mesh);
        let (a, b) = (net.id(1, 1), net.id(2, 1));
        q.set(&net.mesh, a, b, 1.0).unwrap();
        let r = verify_qhd(&net.mesh, &net.z, &q).unwrap();
        for (v, s) in r.vertices.iter().zip(&r.sum_q) {
            assert_eq!(*s != 0.0, *v == a || *v == b, "vertex {v}");
        }
    }

    #[test]
    fn degenerate_edge_rejected() {
        let mut net = generate_net(NetKind::Grid { m: 3, n: 3 }).unwrap();
        net.z.0[1] = net.z.0[0];
        let mu = QuadDiff::zeros(&net.mesh);
        assert!(matches!(
            verify_qhd(&net.mesh, &net.z, &mu),
            Err(Error::DegenerateEdge { .. })
        ));
    }

    #[test]
    fn mobius_identity_and_inversion() {
        let z = PlanarNet(vec![c(2.0, 0.0), c(0.5, -1.0)]);
        let id = MobiusCoeffs::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(apply_mobius(&z, &id).unwrap(), z);
        let inv = MobiusCoeffs::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let det = inv.a * inv.d - inv.b * inv.c;
        assert!((det - 1.0).norm() < 1e-15);
        let w = apply_mobius(&z, &inv).unwrap();
        assert!((w[0] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vertex_at_infinity_is_named() {
        let z = PlanarNet(vec![c(2.0, 0.0), c(1.0, 0.0)]);
        let phi = MobiusCoeffs::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert_eq!(apply_mobius(&z, &phi).unwrap_err(), Error::VertexAtInfinity(1));
        assert_eq!(
            MobiusCoeffs::new(c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)).unwrap_err(),
            Error::SingularMobius
        );
    }

    #[test]
    fn linear_u_gives_zero_q() {
        let (mesh, z) = diagonal_triangulation(5, 5);
        let u = grid_values(5, 5, |x, y| 2.0 * x - 0.5 * y + 3.0);
        let q = qhd_from_harmonic(&mesh, &z, &u).unwrap();
        assert!(q.max_abs() < 1e-14);
    }

    #[test]
    fn cotan_on_diagonal_grid_is_five_point() {
        let (mesh, z) = diagonal_triangulation(6, 5);
        let u = grid_values(6, 5, |x, y| (x * 0.7).sin() + y * y * x);
        let got: Vec<f64> = cotan_harmonic_residuals(&mesh, &z, &u)
            .unwrap()
            .into_iter()
            .map(|(_, r)| r)
            .collect();
        // axis weights cot 45° + cot 45° = 2, diagonal weights cot 90° = 0
        let want = five_point(6, 5, &u);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - 2.0 * b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn harmonic_polynomials_give_holomorphic_q() {
        let (mesh, z) = diagonal_triangulation(7, 7);
        let cases: [fn(f64, f64) -> f64; 2] = [|x, y| x * x - y * y, |x, y| x * x * x - 3.0 * x * y * y];
        for f in cases {
            let u = grid_values(7, 7, f);
            assert!(five_point(7, 7, &u).iter().all(|r| r.abs() < 1e-12));
            for (_, r) in cotan_harmonic_residuals(&mesh, &z, &u).unwrap() {
                assert!(r.abs() < 1e-10);
            }
            let q = qhd_from_harmonic(&mesh, &z, &u).unwrap();
            assert!(q.max_abs() > 0.1);
            assert!(verify_qhd(&mesh, &z, &q).unwrap().passes(1e-12));
        }
    }

    #[test]
    fn second_sum_vanishes_even_when_not_harmonic() {
        // Σ q/dz telescopes around the vertex for any u; Σ q is the cotangent
        // residual and only vanishes for harmonic u.
        let (mesh, mut z) = diagonal_triangulation(5, 5);
        for (k, zk) in z.0.iter_mut().enumerate() {
            *zk += c(0.1 * (k as f64 * 0.9).sin(), 0.05 * (k as f64).cos());
        }
        let u: Vec<f64> = (0..25).map(|k| (k as f64 * 0.37).sin()).collect();
        let q = qhd_from_harmonic(&mesh, &z, &u).unwrap();
        let r = verify_qhd(&mesh, &z, &q).unwrap();
        assert!(r.sum_q_dz.iter().all(|s| s.norm() < 1e-12 * r.scale_q_dz));
        let cot = cotan_harmonic_residuals(&mesh, &z, &u).unwrap();
        for (s, (_, c)) in r.sum_q.iter().zip(&cot) {
            assert!((s - c).abs() < 1e-12 * r.scale_q);
        }
        assert!(r.worst_sum_q().unwrap().1 > 1e-3);
    }

    #[test]
    fn non_triangle_rejected() {
        let net = generate_net(NetKind::Grid { m: 3, n: 3 }).unwrap();
        let u = vec![0.0; 9];
        assert_eq!(
            qhd_from_harmonic(&net.mesh, &net.z, &u).unwrap_err(),
            Error::NotTriangulated(0)
        );
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let mesh = Mesh::new(3, vec![vec![0, 1, 2]]).unwrap();
        let z = PlanarNet(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(
            cotan_harmonic_residuals(&mesh, &z, &[0.0; 3]).unwrap_err(),
            Error::DegenerateTriangle(0)
        );
    }

    #[test]
    fn grid_labeling_is_horizontal_plus() {
        let net = generate_net(NetKind::Grid { m: 5, n: 4 }).unwrap();
        let mu = p_labeling(&net.mesh).unwrap();
        for &e in net.mesh.interior_edges() {
            let edge = net.mesh.edge(e);
            let horizontal = (net.z[edge.hi] - net.z[edge.lo]).im == 0.0;
            assert_eq!(mu.on_edge(e), if horizontal { 1 } else { -1 });
        }
    }

    #[test]
    fn even_face_without_interior_vertex() {
        let mesh = Mesh::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        let mu = p_labeling(&mesh).unwrap();
        assert!(mesh.interior_edges().iter().all(|&e| mu.on_edge(e) == 1));
    }

    #[test]
    fn degree_three_vertex_is_not_pgraph() {
        // fan of three quads around vertex 0
        let mesh = Mesh::new(7, vec![vec![0, 1, 2, 3], vec![0, 3, 4, 5], vec![0, 5, 6, 1]]).unwrap();
        assert!(matches!(p_labeling(&mesh), Err(Error::NotPGraph(_))));
    }

    #[test]
    fn labeling_alternates_around_interior_vertices() {
        let net = generate_net(NetKind::Grid { m: 6, n: 6 }).unwrap();
        let mu = p_labeling(&net.mesh).unwrap();
        for &v in net.mesh.interior_vertices() {
            let edges = &net.mesh.star(v).unwrap().edges;
            for l in 0..4 {
                assert_eq!(mu.on_edge(edges[l]), -mu.on_edge(edges[(l + 1) % 4]));
            }
        }
    }

    #[test]
    fn pnet_residuals_of_builtins() {
        let grid = generate_net(NetKind::Grid { m: 3, n: 3 }).unwrap();
        let r = pnet_residuals(&grid.mesh, &grid.z).unwrap();
        assert_eq!(r, vec![(4, c(0.0, 0.0))]);

        let exp = generate_net(NetKind::Exp { m: 5, n: 5, a: 0.3, b: 0.4 }).unwrap();
        for (v, r) in pnet_residuals(&exp.mesh, &exp.z).unwrap() {
            // horizontal pair sums to -1/z0, vertical pair too
            let z0 = exp.z[v];
            let h = 1.0 / (z0 * (0.3f64.exp() - 1.0)) + 1.0 / (z0 * ((-0.3f64).exp() - 1.0));
            assert!((h + 1.0 / z0).norm() < 1e-12);
            assert!(r.norm() <= 1e-12 * pnet_scale(&exp.mesh, &exp.z));
        }

        let circ = generate_net(NetKind::CirclePattern { m: 4, n: 4, radius: 1.0 }).unwrap();
        for (_, r) in pnet_residuals(&circ.mesh, &circ.z).unwrap() {
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn perturbation_is_local() {
        let mut net = generate_net(NetKind::Grid { m: 6, n: 6 }).unwrap();
        let moved = net.id(2, 3);
        net.z.0[moved] += c(0.05, -0.03);
        let neighbours: Vec<usize> = net
            .mesh
            .vertex_edges(moved)
            .iter()
            .map(|&e| net.mesh.edge(e).other(moved))
            .collect();
        for (v, r) in pnet_residuals(&net.mesh, &net.z).unwrap() {
            assert_eq!(r.norm() > 1e-12, neighbours.contains(&v) || v == moved, "vertex {v}");
        }
    }

    #[test]
    fn generator_errors() {
        assert!(matches!(
            generate_net(NetKind::Grid { m: 1, n: 5 }),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            generate_net(NetKind::Exp { m: 3, n: 3, a: 0.3, b: std::f64::consts::TAU }),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn regular_circle_pattern_geometry() {
        let net = generate_net(NetKind::CirclePattern { m: 4, n: 4, radius: 1.0 }).unwrap();
        let centers = circle_pattern_centers(4, 4, 1.0);
        for (f, face) in net.mesh.faces().iter().enumerate() {
            for &v in face {
                assert!(((net.z[v] - centers[f]).norm() - 1.0).abs() < 1e-14);
            }
        }
        for &e in net.mesh.interior_edges() {
            let edge = net.mesh.edge(e);
            let (c1, c2) = (centers[edge.left.unwrap()], centers[edge.right.unwrap()]);
            assert!(((c1 - c2).norm() - 2f64.sqrt()).abs() < 1e-14);
            // radii to a shared intersection point are perpendicular
            let p = net.z[edge.lo];
            assert!(((p - c1).conj() * (p - c2)).re.abs() < 1e-14);
        }
    }

    #[test]
    fn cross_ratio_of_unit_square() {
        assert_eq!(cross_ratio(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)), c(-1.0, 0.0));
    }

    #[test]
    fn dual_of_unit_grid() {
        let net = generate_net(NetKind::Grid { m: 4, n: 5 }).unwrap();
        let dual = isothermic_dual(4, 5, &net.z.0).unwrap();
        for x in 0..4 {
            for y in 0..5 {
                assert!((dual[net.id(x, y)] - c(x as f64, -(y as f64))).norm() < 1e-14);
            }
        }
        for parity in 0..2 {
            let sub = sublattice_pnet(4, 5, &dual, parity).unwrap();
            for (_, r) in pnet_residuals(&sub.mesh, &sub.z).unwrap() {
                assert!(r.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cross_ratio_violation_names_face() {
        let mut net = generate_net(NetKind::Grid { m: 4, n: 4 }).unwrap();
        // move (2,2) so the quad (1,1) gets cross-ratio -0.9 via z3
        let z = &mut net.z.0;
        let id = |x: usize, y: usize| x * 4 + y;
        let (z1, z2, z4) = (z[id(1, 1)], z[id(2, 1)], z[id(1, 2)]);
        // solve (z1-z2)(z3-z4) = t (z2-z3)(z4-z1) for z3 with t = -0.9
        let t = c(-0.9, 0.0);
        let k = t * (z4 - z1);
        let z3 = (k * z2 + (z1 - z2) * z4) / ((z1 - z2) + k);
        z[id(2, 2)] = z3;
        assert!((cross_ratio(z1, z2, z3, z4) - t).norm() < 1e-12);
        match isothermic_dual(4, 4, z).unwrap_err() {
            Error::CrossRatio { m, n, .. } => {
                assert!([(1, 1), (2, 1), (1, 2), (2, 2)].contains(&(m, n)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn discrete_exponential_isothermic_dual() {
        let b = 0.4f64;
        let a = 2.0 * (b / 2.0).sin().asinh();
        let net = generate_net(NetKind::Exp { m: 7, n: 7, a, b }).unwrap();
        let dual = isothermic_dual(7, 7, &net.z.0).unwrap();
        let scale = net.mesh.edges().iter().map(|e| 1.0 / net.z.dz(e.lo, e.hi).norm()).fold(0.0, f64::max);
        for r in isothermic_dual_closedness(7, 7, &net.z.0) {
            assert!(r.norm() <= 1e-10 * scale);
        }
        for parity in 0..2 {
            let sub = sublattice_pnet(7, 7, &dual, parity).unwrap();
            let s = pnet_scale(&sub.mesh, &sub.z);
            for (_, r) in pnet_residuals(&sub.mesh, &sub.z).unwrap() {
                assert!(r.norm() <= 1e-10 * s, "{r}");
            }
        }
    }

    fn arb_mobius() -> impl Strategy<Value = MobiusCoeffs> {
        prop::array::uniform8(-2.0f64..2.0).prop_filter_map("singular", |v| {
            MobiusCoeffs::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])).ok()
        })
    }

    proptest! {
        #[test]
        fn mobius_preserves_holomorphicity(phi in arb_mobius()) {
            let net = generate_net(NetKind::Exp { m: 5, n: 5, a: 0.3, b: 0.4 }).unwrap();
            let mu = p_labeling(&net.mesh).unwrap().to_quad_diff();
            let w = apply_mobius(&net.z, &phi);
            prop_assume!(w.is_ok());
            let w = w.unwrap();
            // near-poles blow up the scale; skip those draws
            prop_assume!(w.0.iter().all(|x| x.norm() < 1e6));
            let r = verify_qhd(&net.mesh, &w, &mu).unwrap();
            prop_assert!(r.passes(1e-9), "{}", r.max_relative());
        }

        #[test]
        fn normalization_gives_unit_determinant(phi in arb_mobius()) {
            prop_assert!((phi.a * phi.d - phi.b * phi.c - 1.0).norm() < 1e-12);
        }
    }
}
