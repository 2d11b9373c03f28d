//! Curvature and area of discrete surfaces: A-/C-minimality, dihedral-angle
//! scalar mean curvature, associated-family identities, vector area and the
//! mean curvature vector.
//!
//! A [`RealSurface`] lives on the dual of a mesh: one point per primal face,
//! with `df(e*_ij) = f(left) - f(right)`. The area functions further down
//! act on *primal* realizations `f: V -> R^3` instead; to apply them to a
//! family member, move it onto [`DualMesh`] with [`RealSurface::on_dual`].
//!
//! With counterclockwise faces the mean curvature vector
//! `½ Σ_j dN_σ(e*_ij) × df(e_ij)` is minus the gradient of the signed area.

use nalgebra::Vector3;

use crate::holo::QuadDiff;
use crate::mesh::{DualMesh, DualOneForm, EdgeId, FaceId, Mesh, VertexId};
use crate::stress::PolarMesh;
use crate::weier::{associated_surface, ComplexSurface, GaussMap};
use crate::{par, tol, Error, Result};

type V3 = Vector3<f64>;

/// A point per primal face.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSurface(pub Vec<V3>);

impl RealSurface {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn differential(&self, mesh: &Mesh) -> Result<DualOneForm<V3>> {
        DualOneForm::exact(mesh, &self.0)
    }

    /// Largest `|df(e*)|` over interior edges.
    pub fn scale(&self, mesh: &Mesh) -> Result<f64> {
        check_len(mesh.n_faces(), self.0.len())?;
        Ok(mesh
            .interior_edges()
            .iter()
            .map(|&e| dual_edge(mesh, &self.0, e).norm())
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, s: f64) -> RealSurface {
        RealSurface(self.0.iter().map(|p| p * s).collect())
    }

    pub fn translated(&self, t: &V3) -> RealSurface {
        RealSurface(self.0.iter().map(|p| p + t).collect())
    }

    /// Positions indexed by the vertices of `dual`.
    pub fn on_dual(&self, dual: &DualMesh) -> Vec<V3> {
        dual.primal_face.iter().map(|&f| self.0[f]).collect()
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}

fn check_gauss(mesh: &Mesh, n: &GaussMap) -> Result<()> {
    check_len(mesh.n_vertices(), n.len())
}

/// `df(e*_{lo,hi})` on an interior edge.
fn dual_edge(mesh: &Mesh, f: &[V3], e: EdgeId) -> V3 {
    let edge = mesh.edge(e);
    f[edge.left.unwrap()] - f[edge.right.unwrap()]
}

/// `df(e*_ij)` for an oriented interior edge.
fn dual_edge_from(mesh: &Mesh, f: &[V3], i: VertexId, j: VertexId) -> V3 {
    let e = mesh.edge_id(i, j).unwrap();
    let d = dual_edge(mesh, f, e);
    if i < j {
        d
    } else {
        -d
    }
}

fn worst<K: Copy>(items: impl Iterator<Item = (K, f64)>) -> Option<(K, f64)> {
    items.max_by(|a, b| a.1.total_cmp(&b.1))
}

/// Per interior edge `|dN × df|` and `|<N_i + N_j, df>|`.
#[derive(Clone, Debug, PartialEq)]
pub struct AMinimalReport {
    pub edges: Vec<(VertexId, VertexId)>,
    pub cross: Vec<f64>,
    pub normal: Vec<f64>,
    pub scale: f64,
}

impl AMinimalReport {
    pub fn worst_cross(&self) -> Option<((VertexId, VertexId), f64)> {
        worst(self.edges.iter().copied().zip(self.cross.iter().copied()))
    }

    pub fn worst_normal(&self) -> Option<((VertexId, VertexId), f64)> {
        worst(self.edges.iter().copied().zip(self.normal.iter().copied()))
    }

    pub fn worst(&self) -> Option<((VertexId, VertexId), f64)> {
        worst(self.worst_cross().into_iter().chain(self.worst_normal()))
    }

    pub fn passes(&self, rel_tol: f64) -> bool {
        self.worst().is_none_or(|(_, r)| r <= rel_tol * self.scale)
    }
}

pub fn verify_aminimal(mesh: &Mesh, f: &RealSurface, n: &GaussMap) -> Result<AMinimalReport> {
    check_gauss(mesh, n)?;
    let scale = f.scale(mesh)?;
    let rows = par::map_slice(mesh.interior_edges(), |&e| {
        let edge = mesh.edge(e);
        let (i, j) = (edge.lo, edge.hi);
        let df = dual_edge(mesh, &f.0, e);
        let cross = n.dn(i, j).cross(&df).norm();
        let normal = (n[i] + n[j]).dot(&df).abs();
        ((i, j), cross, normal)
    });
    Ok(AMinimalReport {
        edges: rows.iter().map(|r| r.0).collect(),
        cross: rows.iter().map(|r| r.1).collect(),
        normal: rows.iter().map(|r| r.2).collect(),
        scale,
    })
}

/// Dihedral data on one interior edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeDihedral {
    pub a: VertexId,
    pub b: VertexId,
    /// `None` on degenerate edges, where the sign is undefined.
    pub alpha: Option<f64>,
    /// `df̃(e*_ab) = k N_a × N_b`.
    pub k: f64,
    pub length: f64,
    /// `|df̃| tan(α/2)`.
    pub term: f64,
    /// Component of `df̃` orthogonal to `N_a × N_b`.
    pub k_residual: f64,
    /// `| |df̃| tan(α/2) - k (1 - <N_a, N_b>) |`.
    pub term_residual: f64,
}

fn edge_dihedral(
    a: VertexId,
    b: VertexId,
    df: V3,
    na: &V3,
    nb: &V3,
    degenerate: f64,
) -> Result<EdgeDihedral> {
    let length = df.norm();
    if length <= degenerate {
        return Ok(EdgeDihedral {
            a,
            b,
            alpha: None,
            k: 0.0,
            length,
            term: 0.0,
            k_residual: length,
            term_residual: 0.0,
        });
    }
    let c = na.cross(nb);
    let c2 = c.norm_squared();
    if c2.sqrt() <= tol::DEGENERATE_REL {
        return Err(Error::ParallelNormals { a, b });
    }
    let s = c.dot(&df) / length;
    let co = na.dot(nb);
    // tan(α/2) for the point (co, s) on a circle of radius r
    let r = s.hypot(co);
    let term = length * s / (r + co);
    let k = c.dot(&df) / c2;
    Ok(EdgeDihedral {
        a,
        b,
        alpha: Some(s.atan2(co)),
        k,
        length,
        term,
        k_residual: (df - c * k).norm(),
        term_residual: (term - k * (1.0 - co)).abs(),
    })
}

/// Edge data indexed by edge id; `None` on boundary edges.
fn edge_table(mesh: &Mesh, f: &[V3], n: &GaussMap, scale: f64) -> Result<Vec<Option<EdgeDihedral>>> {
    let degenerate = tol::DEGENERATE_REL * scale;
    par::try_map_range(mesh.n_edges(), |e| {
        let edge = mesh.edge(e);
        if !edge.is_interior() {
            return Ok(None);
        }
        let (i, j) = (edge.lo, edge.hi);
        edge_dihedral(i, j, dual_edge(mesh, f, e), &n[i], &n[j], degenerate).map(Some)
    })
}

/// Distance of the face `i*` of `f̃` from the plane through its centroid
/// with normal `N_i`, per interior vertex.
pub fn face_planarity(mesh: &Mesh, f: &RealSurface, n: &GaussMap) -> Result<Vec<(VertexId, f64)>> {
    check_gauss(mesh, n)?;
    check_len(mesh.n_faces(), f.len())?;
    Ok(par::map_slice(mesh.interior_vertices(), |&v| {
        let ring = &mesh.star(v).unwrap().faces;
        let c = ring.iter().map(|&g| f.0[g]).sum::<V3>() / ring.len() as f64;
        let d = ring
            .iter()
            .map(|&g| (f.0[g] - c).dot(&n[v]).abs())
            .fold(0.0, f64::max);
        (v, d)
    }))
}

/// Dihedral angles and `k` on every interior edge, after checking that the
/// faces of `f̃` are planar with normal `N`.
pub fn dihedral_and_k(mesh: &Mesh, f: &RealSurface, n: &GaussMap) -> Result<Vec<EdgeDihedral>> {
    let scale = f.scale(mesh)?;
    if let Some((vertex, distance)) = worst(face_planarity(mesh, f, n)?.into_iter()) {
        if distance > tol::PLANARITY_REL * scale {
            return Err(Error::NonPlanarFace { vertex, distance });
        }
    }
    Ok(edge_table(mesh, &f.0, n, scale)?.into_iter().flatten().collect())
}

fn sum_over_stars(mesh: &Mesh, table: &[Option<EdgeDihedral>]) -> Vec<(VertexId, f64)> {
    par::map_slice(mesh.interior_vertices(), |&v| {
        let s = mesh
            .star(v)
            .unwrap()
            .edges
            .iter()
            .map(|&e| table[e].unwrap().term)
            .sum();
        (v, s)
    })
}

/// `H̃_i = Σ_j |df̃(e*_ij)| tan(α_ij/2)` per interior vertex.
pub fn scalar_mean_curvature(mesh: &Mesh, f: &RealSurface, n: &GaussMap) -> Result<Vec<(VertexId, f64)>> {
    let scale = f.scale(mesh)?;
    if let Some((vertex, distance)) = worst(face_planarity(mesh, f, n)?.into_iter()) {
        if distance > tol::PLANARITY_REL * scale {
            return Err(Error::NonPlanarFace { vertex, distance });
        }
    }
    let table = edge_table(mesh, &f.0, n, scale)?;
    Ok(sum_over_stars(mesh, &table))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CMinimalReport {
    pub planarity: Option<(VertexId, f64)>,
    pub curvature: Option<(VertexId, f64)>,
    /// Smallest `|N_i + N_j|`.
    pub antipodal: Option<((VertexId, VertexId), f64)>,
    pub scale: f64,
}

impl CMinimalReport {
    pub fn passes(&self, planarity_rel: f64, curvature_rel: f64, eps: f64) -> bool {
        self.planarity.is_none_or(|(_, d)| d <= planarity_rel * self.scale)
            && self.curvature.is_none_or(|(_, h)| h <= curvature_rel * self.scale)
            && self.antipodal.is_none_or(|(_, m)| m >= eps)
    }
}

/// Planarity, admissibility and `|H̃|`, reported rather than enforced.
pub fn verify_cminimal(mesh: &Mesh, f: &RealSurface, n: &GaussMap) -> Result<CMinimalReport> {
    let scale = f.scale(mesh)?;
    let planarity = worst(face_planarity(mesh, f, n)?.into_iter());
    let table = edge_table(mesh, &f.0, n, scale)?;
    let curvature = worst(sum_over_stars(mesh, &table).into_iter().map(|(v, h)| (v, h.abs())));
    Ok(CMinimalReport {
        planarity,
        curvature,
        antipodal: n.antipodal_margin(mesh),
        scale,
    })
}

/// Mixed area `Area(f̃, N̂)_i` of each face of a conical surface.
pub fn mixed_area_conical(
    mesh: &Mesh,
    f: &RealSurface,
    n: &GaussMap,
    polar: &PolarMesh,
) -> Result<Vec<(VertexId, f64)>> {
    check_gauss(mesh, n)?;
    check_len(mesh.n_faces(), f.len())?;
    check_len(mesh.n_faces(), polar.0.len())?;
    for (face, verts) in mesh.faces().iter().enumerate() {
        let residual = verts
            .iter()
            .map(|&a| (n[a].dot(&polar.0[face]) - 1.0).abs())
            .fold(0.0, f64::max);
        if residual > tol::IDENTITY_REL {
            return Err(Error::NonPlanarGaussFace { face, residual });
        }
    }
    Ok(par::map_slice(mesh.interior_vertices(), |&v| {
        let ring = &mesh.star(v).unwrap().faces;
        let m = ring.len();
        let s: f64 = (0..m)
            .map(|r| {
                let (p, q) = (ring[r], ring[(r + 1) % m]);
                (f.0[p].cross(&polar.0[q]) + polar.0[p].cross(&f.0[q])).dot(&n[v])
            })
            .sum();
        (v, 0.5 * s)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaCurvature {
    pub vertex: VertexId,
    /// `Σ_j <dN × df, (N_i + N_j)/|N_i + N_j|²>`.
    pub h: f64,
    /// `Σ_j <dN, df>`.
    pub dot_sum: f64,
}

pub fn theta_curvatures(mesh: &Mesh, f: &RealSurface, n: &GaussMap) -> Result<Vec<ThetaCurvature>> {
    check_gauss(mesh, n)?;
    check_len(mesh.n_faces(), f.len())?;
    par::try_map_range(mesh.interior_vertices().len(), |k| {
        let i = mesh.interior_vertices()[k];
        let mut h = 0.0;
        let mut dot_sum = 0.0;
        for &j in &mesh.star(i).unwrap().neighbors {
            let s = n[i] + n[j];
            let s2 = s.norm_squared();
            if s2.sqrt() < tol::ADMISSIBILITY_EPS {
                return Err(Error::Inadmissible {
                    a: i.min(j),
                    b: i.max(j),
                });
            }
            let dn = n.dn(i, j);
            let df = dual_edge_from(mesh, &f.0, i, j);
            h += dn.cross(&df).dot(&s) / s2;
            dot_sum += dn.dot(&df);
        }
        Ok(ThetaCurvature {
            vertex: i,
            h,
            dot_sum,
        })
    })
}

/// Worst residuals of `df^θ × dN = -q sinθ (N_i + N_j)` and
/// `<df^θ, dN> = 2 q cosθ` over interior edges, for the family member
/// `f^θ = Re(e^{iθ} F)` of the Weierstrass surface of `(z, q)`.
pub fn family_edge_residuals(
    mesh: &Mesh,
    f: &RealSurface,
    n: &GaussMap,
    q: &QuadDiff,
    theta: f64,
) -> Result<(f64, f64)> {
    check_gauss(mesh, n)?;
    check_len(mesh.n_faces(), f.len())?;
    let (sin, cos) = theta.sin_cos();
    let rows = par::map_slice(mesh.interior_edges(), |&e| {
        let edge = mesh.edge(e);
        let (i, j) = (edge.lo, edge.hi);
        let df = dual_edge(mesh, &f.0, e);
        let dn = n.dn(i, j);
        let qe = q.on_edge(e);
        let cross = (df.cross(&dn) + (n[i] + n[j]) * (qe * sin)).norm();
        let dot = (df.dot(&dn) - 2.0 * qe * cos).abs();
        (cross, dot)
    });
    Ok(rows
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (f64::max(a, c), f64::max(b, d))))
}

/// `½ Σ γ_i × γ_{i+1}`, evaluated relative to `γ_0`.
pub fn vector_area(polygon: &[V3]) -> V3 {
    let Some(o) = polygon.first() else {
        return V3::zeros();
    };
    let n = polygon.len();
    (1..n.saturating_sub(1))
        .map(|i| (polygon[i] - o).cross(&(polygon[i + 1] - o)))
        .sum::<V3>()
        * 0.5
}

/// Vector area of every face of a primal realization.
pub fn face_vector_areas(mesh: &Mesh, f: &[V3]) -> Result<Vec<V3>> {
    check_len(mesh.n_vertices(), f.len())?;
    Ok(par::map_slice(mesh.faces(), |face| {
        let poly: Vec<V3> = face.iter().map(|&v| f[v]).collect();
        vector_area(&poly)
    }))
}

/// Largest edge length of a primal realization.
pub fn edge_scale(mesh: &Mesh, f: &[V3]) -> f64 {
    mesh.edges()
        .iter()
        .map(|e| (f[e.hi] - f[e.lo]).norm())
        .fold(0.0, f64::max)
}

fn zero_area_threshold(mesh: &Mesh, f: &[V3]) -> f64 {
    let s = edge_scale(mesh, f);
    tol::DEGENERATE_REL * s * s
}

#[derive(Clone, Debug, PartialEq)]
pub struct TotalArea {
    pub value: f64,
    /// Faces whose vector area vanishes; they contribute nothing.
    pub zero_faces: Vec<FaceId>,
}

/// `Σ_φ σ_φ |A⃗_φ|`.
pub fn total_area(mesh: &Mesh, f: &[V3], sigma: &[f64]) -> Result<TotalArea> {
    check_len(mesh.n_faces(), sigma.len())?;
    let areas = face_vector_areas(mesh, f)?;
    let zero = zero_area_threshold(mesh, f);
    let mut value = 0.0;
    let mut zero_faces = Vec::new();
    for (face, a) in areas.iter().enumerate() {
        let m = a.norm();
        if m <= zero {
            zero_faces.push(face);
        } else {
            value += sigma[face] * m;
        }
    }
    Ok(TotalArea { value, zero_faces })
}

fn area_normals(mesh: &Mesh, f: &[V3], sigma: &[f64]) -> Result<Vec<Option<V3>>> {
    check_len(mesh.n_faces(), sigma.len())?;
    let zero = zero_area_threshold(mesh, f);
    Ok(face_vector_areas(mesh, f)?
        .into_iter()
        .zip(sigma)
        .map(|(a, s)| {
            let m = a.norm();
            (m > zero).then(|| a * (s / m))
        })
        .collect())
}

/// `H⃗_i = ½ Σ_j dN_σ(e*_ij) × df(e_ij)` with `N_σ = σ A⃗/|A⃗|`, for a primal
/// realization `f`.
pub fn mean_curvature_vector(mesh: &Mesh, f: &[V3], sigma: &[f64]) -> Result<Vec<(VertexId, V3)>> {
    let normals = area_normals(mesh, f, sigma)?;
    par::try_map_range(mesh.interior_vertices().len(), |k| {
        let i = mesh.interior_vertices()[k];
        let star = mesh.star(i).unwrap();
        let mut h = V3::zeros();
        for &j in &star.neighbors {
            let (l, r) = mesh.left_right(i, j).unwrap();
            let (l, r) = (l.unwrap(), r.unwrap());
            let nl = normals[l].ok_or(Error::ZeroVectorArea(l))?;
            let nr = normals[r].ok_or(Error::ZeroVectorArea(r))?;
            h += (nl - nr).cross(&(f[j] - f[i]));
        }
        Ok((i, h * 0.5))
    })
}

fn cot_at(apex: &V3, p: &V3, q: &V3) -> f64 {
    let (u, v) = (p - apex, q - apex);
    u.dot(&v) / u.cross(&v).norm()
}

/// `Σ_j (cot ∠jki + cot ∠ilj) (f_j - f_i)` on a triangulation.
pub fn cotan_balance(mesh: &Mesh, f: &[V3]) -> Result<Vec<(VertexId, V3)>> {
    check_len(mesh.n_vertices(), f.len())?;
    if let Some(face) = mesh.faces().iter().position(|c| c.len() != 3) {
        return Err(Error::NotTriangulated(face));
    }
    let zero = zero_area_threshold(mesh, f);
    let areas = face_vector_areas(mesh, f)?;
    if let Some(face) = areas.iter().position(|a| a.norm() <= zero) {
        return Err(Error::DegenerateTriangle(face));
    }
    let opposite = |face: FaceId, i: VertexId, j: VertexId| {
        *mesh.face(face).iter().find(|&&x| x != i && x != j).unwrap()
    };
    Ok(par::map_slice(mesh.interior_vertices(), |&i| {
        let mut s = V3::zeros();
        for &j in &mesh.star(i).unwrap().neighbors {
            let (l, r) = mesh.left_right(i, j).unwrap();
            let w: f64 = [l.unwrap(), r.unwrap()]
                .iter()
                .map(|&face| cot_at(&f[opposite(face, i, j)], &f[i], &f[j]))
                .sum();
            s += (f[j] - f[i]) * w;
        }
        (i, s)
    }))
}

/// Faces around `v` with their signed areas after moving `v` to `p`;
/// `None` if any of them loses its vector area or flips it.
fn local_area(
    mesh: &Mesh,
    f: &[V3],
    sigma: &[f64],
    base: &[V3],
    zero: f64,
    v: VertexId,
    p: V3,
) -> std::result::Result<f64, FaceId> {
    let mut total = 0.0;
    for &face in &mesh.star(v).unwrap().faces {
        let poly: Vec<V3> = mesh
            .face(face)
            .iter()
            .map(|&u| if u == v { p } else { f[u] })
            .collect();
        let a = vector_area(&poly);
        if a.norm() <= zero || a.dot(&base[face]) <= 0.0 {
            return Err(face);
        }
        total += sigma[face] * a.norm();
    }
    Ok(total)
}

/// Central-difference gradient of the signed area with respect to each
/// interior vertex.
pub fn area_gradient_fd(
    mesh: &Mesh,
    f: &[V3],
    sigma: &[f64],
    step: f64,
) -> Result<Vec<(VertexId, V3)>> {
    check_len(mesh.n_faces(), sigma.len())?;
    let base = face_vector_areas(mesh, f)?;
    let zero = zero_area_threshold(mesh, f);
    par::try_map_range(mesh.interior_vertices().len(), |k| {
        let v = mesh.interior_vertices()[k];
        let mut g = V3::zeros();
        for c in 0..3 {
            let mut dp = V3::zeros();
            dp[c] = step;
            let plus = local_area(mesh, f, sigma, &base, zero, v, f[v] + dp);
            let minus = local_area(mesh, f, sigma, &base, zero, v, f[v] - dp);
            g[c] = (plus.map_err(Error::ZeroVectorArea)? - minus.map_err(Error::ZeroVectorArea)?)
                / (2.0 * step);
        }
        Ok((v, g))
    })
}

/// Central difference of `t -> Area_σ(f + t ḟ)` at `t = 0`.
pub fn area_directional_fd(
    mesh: &Mesh,
    f: &[V3],
    sigma: &[f64],
    direction: &[V3],
    step: f64,
) -> Result<f64> {
    check_len(mesh.n_vertices(), direction.len())?;
    let base = face_vector_areas(mesh, f)?;
    let zero = zero_area_threshold(mesh, f);
    let moved = |t: f64| -> Result<f64> {
        let g: Vec<V3> = f.iter().zip(direction).map(|(p, d)| p + d * t).collect();
        let areas = face_vector_areas(mesh, &g)?;
        let mut total = 0.0;
        for (face, a) in areas.iter().enumerate() {
            if a.norm() <= zero || a.dot(&base[face]) <= 0.0 {
                return Err(Error::ZeroVectorArea(face));
            }
            total += sigma[face] * a.norm();
        }
        Ok(total)
    };
    Ok((moved(step)? - moved(-step)?) / (2.0 * step))
}

/// `σ` per face of `dual`, the sign of `<N, A⃗>` for the Gauss map of the
/// primal vertex behind the face.
pub fn sigma_from_gauss(dual: &DualMesh, f: &[V3], n: &GaussMap) -> Result<Vec<f64>> {
    let zero = zero_area_threshold(&dual.mesh, f);
    face_vector_areas(&dual.mesh, f)?
        .iter()
        .enumerate()
        .map(|(face, a)| {
            if a.norm() <= zero {
                return Err(Error::ZeroVectorArea(face));
            }
            Ok(n[dual.primal_vertex[face]].dot(a).signum())
        })
        .collect()
}

/// Mean curvature vector of a dual realization, with `σ` taken from the Gauss
/// map. Keys are primal face ids.
pub fn surface_mean_curvature(
    dual: &DualMesh,
    f: &RealSurface,
    n: &GaussMap,
) -> Result<Vec<(FaceId, V3)>> {
    let pos = f.on_dual(dual);
    let sigma = sigma_from_gauss(dual, &pos, n)?;
    Ok(mean_curvature_vector(&dual.mesh, &pos, &sigma)?
        .into_iter()
        .map(|(v, h)| (dual.primal_face[v], h))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyAreaReport {
    /// Largest `|A⃗^θ - A⃗^0|` and the interior vertex where it occurs.
    pub deviation: Option<(VertexId, f64)>,
    /// Largest `|sin ∠(A⃗^0, N)|`.
    pub sine: Option<(VertexId, f64)>,
    /// Largest edge length over all sampled members.
    pub scale: f64,
}

impl FamilyAreaReport {
    pub fn passes(&self, deviation_rel: f64, sine_tol: f64) -> bool {
        self.deviation.is_none_or(|(_, d)| d <= deviation_rel * self.scale)
            && self.sine.is_none_or(|(_, s)| s <= sine_tol)
    }
}

/// Vector areas of the faces of `Re(e^{iθ} F)` compared across `thetas` and
/// against the Gauss map.
pub fn vector_area_family_check(
    mesh: &Mesh,
    f: &ComplexSurface,
    n: &GaussMap,
    thetas: &[f64],
) -> Result<FamilyAreaReport> {
    check_gauss(mesh, n)?;
    check_len(mesh.n_faces(), f.len())?;
    let members: Vec<RealSurface> = std::iter::once(0.0)
        .chain(thetas.iter().copied())
        .map(|t| associated_surface(f, t))
        .collect();
    let mut scale = 0.0f64;
    for m in &members {
        scale = scale.max(m.scale(mesh)?);
    }
    let rows = par::map_slice(mesh.interior_vertices(), |&v| {
        let ring = &mesh.star(v).unwrap().faces;
        let area = |s: &RealSurface| vector_area(&ring.iter().map(|&g| s.0[g]).collect::<Vec<_>>());
        let a0 = area(&members[0]);
        let dev = members[1..]
            .iter()
            .map(|m| (area(m) - a0).norm())
            .fold(0.0, f64::max);
        let sine = a0.cross(&n[v]).norm() / a0.norm();
        (v, dev, sine)
    });
    Ok(FamilyAreaReport {
        deviation: worst(rows.iter().map(|r| (r.0, r.1))),
        sine: worst(rows.iter().map(|r| (r.0, r.2))),
        scale,
    })
}

/// Per-vertex curvature data of a planar-faced dual realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexCurvature {
    pub vertex: VertexId,
    pub scalar_mean: f64,
    pub theta_mean: f64,
    pub dot_sum: f64,
    pub vector_area: V3,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureReport {
    pub edges: Vec<EdgeDihedral>,
    pub vertices: Vec<VertexCurvature>,
}

/// Edge and face data of `f̃` against `N` in one pass. No planarity check.
pub fn curvature_report(mesh: &Mesh, f: &RealSurface, n: &GaussMap) -> Result<CurvatureReport> {
    let scale = f.scale(mesh)?;
    let table = edge_table(mesh, &f.0, n, scale)?;
    let scalar = sum_over_stars(mesh, &table);
    let theta = theta_curvatures(mesh, f, n)?;
    let vertices = scalar
        .iter()
        .zip(&theta)
        .map(|(&(v, h), t)| {
            let ring = &mesh.star(v).unwrap().faces;
            let a = vector_area(&ring.iter().map(|&g| f.0[g]).collect::<Vec<_>>());
            VertexCurvature {
                vertex: v,
                scalar_mean: h,
                theta_mean: t.h,
                dot_sum: t.dot_sum,
                vector_area: a,
                sigma: n[v].dot(&a).signum(),
            }
        })
        .collect();
    Ok(CurvatureReport {
        edges: table.into_iter().flatten().collect(),
        vertices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::{generate_net, grid_mesh, p_labeling, NetKind};
    use crate::stress::polar_mesh;
    use crate::weier::{stereographic_lift, weierstrass, Weierstrass};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn v(x: f64, y: f64, z: f64) -> V3 {
        V3::new(x, y, z)
    }

    fn pnet(kind: NetKind) -> (Mesh, QuadDiff, Weierstrass) {
        let net = generate_net(kind).unwrap();
        let mu = p_labeling(&net.mesh).unwrap().to_quad_diff();
        let w = weierstrass(&net.mesh, &net.z, &mu).unwrap();
        (net.mesh, mu, w)
    }

    /// Octahedron Gauss map with the unit cube as its dual realization.
    fn cube() -> (Mesh, GaussMap, RealSurface) {
        let c = crate::cubic::unit_cube();
        (c.mesh, c.gauss, c.surface)
    }

    /// Triangulated `m × n` grid with random heights.
    fn bumpy(m: usize, n: usize, seed: u64) -> (Mesh, Vec<V3>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut faces = Vec::new();
        for x in 0..m - 1 {
            for y in 0..n - 1 {
                let (a, b, c, d) = (x * n + y, (x + 1) * n + y, (x + 1) * n + y + 1, x * n + y + 1);
                faces.push(vec![a, b, c]);
                faces.push(vec![a, c, d]);
            }
        }
        let mesh = Mesh::new(m * n, faces).unwrap();
        let f = (0..m * n)
            .map(|k| {
                let (x, y) = ((k / n) as f64, (k % n) as f64);
                v(x + rng.random_range(-0.2..0.2), y + rng.random_range(-0.2..0.2), rng.random_range(-0.5..0.5))
            })
            .collect();
        (mesh, f)
    }

    fn tent(n: usize, height: f64) -> (Mesh, Vec<V3>) {
        let mut f = vec![v(0.0, 0.0, height)];
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            f.push(v(t.cos(), t.sin(), 0.0));
        }
        let faces = (0..n).map(|k| vec![0, 1 + k, 1 + (k + 1) % n]).collect();
        (Mesh::new(n + 1, faces).unwrap(), f)
    }

    #[test]
    fn vector_area_examples() {
        let sq = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(1.0, 1.0, 0.0), v(0.0, 1.0, 0.0)];
        assert_eq!(vector_area(&sq), v(0.0, 0.0, 1.0));
        let back = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(1.0, 1.0, 0.0), v(1.0, 0.0, 0.0)];
        assert_eq!(vector_area(&back), V3::zeros());
        let skew = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(1.0, 1.0, 1.0), v(0.0, 1.0, 1.0)];
        assert_eq!(vector_area(&skew), v(0.0, -1.0, 1.0));
        let moved: Vec<V3> = skew.iter().map(|p| p + v(3.0, -2.0, 7.0)).collect();
        assert!((vector_area(&moved) - v(0.0, -1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn total_area_of_unit_square() {
        let mesh = Mesh::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        let f = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(1.0, 1.0, 0.0), v(0.0, 1.0, 0.0)];
        assert_eq!(total_area(&mesh, &f, &[1.0]).unwrap().value, 1.0);
        assert_eq!(total_area(&mesh, &f, &[-1.0]).unwrap().value, -1.0);
        let flat = [v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(2.0, 0.0, 0.0), v(1.0, 0.0, 0.0)];
        let t = total_area(&mesh, &flat, &[1.0]).unwrap();
        assert_eq!((t.value, t.zero_faces), (0.0, vec![0]));
    }

    #[test]
    fn aminimal_examples() {
        let (mesh, _, w) = pnet(NetKind::Grid { m: 5, n: 5 });
        let f = w.surface.real();
        assert!(verify_aminimal(&mesh, &f, &w.gauss).unwrap().passes(1e-10));

        let c = RealSurface(vec![v(1.0, 2.0, 3.0); mesh.n_faces()]);
        let r = verify_aminimal(&mesh, &c, &w.gauss).unwrap();
        assert_eq!(r.worst().unwrap().1, 0.0);

        let conj = associated_surface(&w.surface, FRAC_PI_2);
        let r = verify_aminimal(&mesh, &conj, &w.gauss).unwrap();
        assert!(r.worst_cross().unwrap().1 > 1e-3 * r.scale);
    }

    #[test]
    fn cube_dihedrals_and_curvature() {
        let (mesh, n, f) = cube();
        let edges = dihedral_and_k(&mesh, &f, &n).unwrap();
        assert_eq!(edges.len(), 12);
        for e in &edges {
            assert!((e.alpha.unwrap().abs() - FRAC_PI_2).abs() < 1e-15);
            assert_eq!(e.term.abs(), 1.0);
            assert!(e.term_residual < 1e-15);
        }
        let h = scalar_mean_curvature(&mesh, &f, &n).unwrap();
        assert_eq!(h.len(), 6);
        assert!(h.iter().all(|(_, h)| h.abs() == 4.0));
        assert!(!verify_cminimal(&mesh, &f, &n).unwrap().passes(1e-8, 1e-10, 1e-8));
    }

    #[test]
    fn cube_mixed_area_equals_curvature() {
        let (mesh, n, f) = cube();
        let polar = polar_mesh(&mesh, &n).unwrap();
        let mixed = mixed_area_conical(&mesh, &f, &n, &polar).unwrap();
        let h = scalar_mean_curvature(&mesh, &f, &n).unwrap();
        for ((va, a), (vb, b)) in mixed.iter().zip(&h) {
            assert_eq!(va, vb);
            assert!((a - b).abs() < 1e-12);
            assert!((a.abs() - 4.0).abs() < 1e-12);
        }
        let doubled = mixed_area_conical(&mesh, &f.scaled(2.5), &n, &polar).unwrap();
        for ((_, a), (_, b)) in mixed.iter().zip(&doubled) {
            assert!((2.5 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_edge_contributes_nothing() {
        let n = v(0.0, 0.0, 1.0);
        let e = edge_dihedral(0, 1, V3::zeros(), &n, &v(1.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!((e.alpha, e.term, e.k), (None, 0.0, 0.0));
        // coplanar neighbours
        let flat = edge_dihedral(0, 1, v(1.0, 0.0, 0.0), &n, &n, 0.0);
        assert_eq!(flat.unwrap_err(), Error::ParallelNormals { a: 0, b: 1 });
    }

    #[test]
    fn grid_conjugate_is_cminimal() {
        let (mesh, _, w) = pnet(NetKind::Grid { m: 5, n: 5 });
        let ft = associated_surface(&w.surface, FRAC_PI_2);
        let r = verify_cminimal(&mesh, &ft, &w.gauss).unwrap();
        assert!(r.passes(tol::PLANARITY_REL, 1e-10, tol::ADMISSIBILITY_EPS), "{r:?}");
        for e in dihedral_and_k(&mesh, &ft, &w.gauss).unwrap() {
            assert!(e.term_residual <= 1e-10 * r.scale);
            assert!(e.k_residual <= 1e-10 * r.scale);
        }
    }

    #[test]
    fn non_planar_face_is_rejected() {
        let (mesh, _, w) = pnet(NetKind::Grid { m: 4, n: 4 });
        let mut ft = associated_surface(&w.surface, FRAC_PI_2);
        ft.0[4] += w.gauss[5] * 0.1;
        assert!(matches!(
            scalar_mean_curvature(&mesh, &ft, &w.gauss),
            Err(Error::NonPlanarFace { .. })
        ));
    }

    #[test]
    fn theta_sums_vanish_across_family() {
        let (mesh, mu, w) = pnet(NetKind::Exp { m: 6, n: 6, a: 0.3, b: 0.4 });
        for t in tol::theta_samples(16) {
            let ft = associated_surface(&w.surface, t);
            let scale = ft.scale(&mesh).unwrap();
            for c in theta_curvatures(&mesh, &ft, &w.gauss).unwrap() {
                assert!(c.h.abs() <= 1e-10 * scale && c.dot_sum.abs() <= 1e-10 * scale);
            }
            let (cross, dot) = family_edge_residuals(&mesh, &ft, &w.gauss, &mu, t).unwrap();
            assert!(cross <= 1e-10 * scale && dot <= 1e-10 * scale, "{t} {cross} {dot}");
        }
    }

    #[test]
    fn theta_half_pi_is_scalar_mean_curvature() {
        let (mesh, _, w) = pnet(NetKind::Grid { m: 5, n: 5 });
        // any planar-faced realization works; use a C-minimal one plus a
        // non-minimal cube below
        let ft = associated_surface(&w.surface, FRAC_PI_2);
        let h = scalar_mean_curvature(&mesh, &ft, &w.gauss).unwrap();
        let t = theta_curvatures(&mesh, &ft, &w.gauss).unwrap();
        for ((_, a), b) in h.iter().zip(&t) {
            assert!((a - b.h).abs() < 1e-12);
        }
        let (mesh, n, f) = cube();
        let h = scalar_mean_curvature(&mesh, &f, &n).unwrap();
        let t = theta_curvatures(&mesh, &f, &n).unwrap();
        for ((_, a), b) in h.iter().zip(&t) {
            assert!((a - b.h).abs() < 1e-12);
        }
    }

    #[test]
    fn family_vector_area_is_constant() {
        for kind in [NetKind::Grid { m: 6, n: 6 }, NetKind::Exp { m: 6, n: 6, a: 0.3, b: 0.4 }] {
            let (mesh, _, w) = pnet(kind);
            let r = vector_area_family_check(&mesh, &w.surface, &w.gauss, &tol::theta_samples(16)).unwrap();
            assert!(r.passes(1e-10, 1e-10), "{r:?}");
        }
    }

    #[test]
    fn planar_grid_has_no_mean_curvature() {
        let (mesh, mut f) = bumpy(5, 5, 1);
        for p in &mut f {
            p.z = 0.0;
        }
        let sigma = vec![1.0; mesh.n_faces()];
        for (_, h) in mean_curvature_vector(&mesh, &f, &sigma).unwrap() {
            assert!(h.norm() < 1e-14);
        }
        for (_, c) in cotan_balance(&mesh, &f).unwrap() {
            assert!(c.norm() < 1e-13);
        }
        for (_, g) in area_gradient_fd(&mesh, &f, &sigma, tol::FD_STEP).unwrap() {
            assert!(g.norm() < 1e-6);
        }
    }

    #[test]
    fn tent_apex_curvature_points_down() {
        let (mesh, f) = tent(6, 1.0);
        let sigma = vec![1.0; 6];
        let h = mean_curvature_vector(&mesh, &f, &sigma).unwrap();
        assert_eq!(h.len(), 1);
        let (apex, h) = h[0];
        assert_eq!(apex, 0);
        assert!(h.x.abs() < 1e-15 && h.y.abs() < 1e-15 && h.z < 0.0);
        let g = area_gradient_fd(&mesh, &f, &sigma, tol::FD_STEP).unwrap()[0].1;
        assert!((g + h).norm() <= 1e-6 * h.norm());
        let c = cotan_balance(&mesh, &f).unwrap()[0].1;
        assert!(c.x.abs() < 1e-14 && c.y.abs() < 1e-14);
        assert!((c - 2.0 * h).norm() < 1e-14);
    }

    #[test]
    fn cotan_is_twice_mean_curvature_on_random_patches() {
        for seed in 0..5 {
            let (mesh, f) = bumpy(5, 6, seed);
            let sigma = vec![1.0; mesh.n_faces()];
            let h = mean_curvature_vector(&mesh, &f, &sigma).unwrap();
            let c = cotan_balance(&mesh, &f).unwrap();
            let scale = edge_scale(&mesh, &f);
            for ((_, h), (_, c)) in h.iter().zip(&c) {
                assert!((c - 2.0 * h).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn mean_curvature_is_minus_area_gradient() {
        let (mesh, f) = bumpy(5, 5, 9);
        let sigma = vec![1.0; mesh.n_faces()];
        let h = mean_curvature_vector(&mesh, &f, &sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut dir = vec![V3::zeros(); f.len()];
        for &i in mesh.interior_vertices() {
            dir[i] = v(rng.random(), rng.random(), rng.random());
        }
        let predicted: f64 = h.iter().map(|(i, h)| h.dot(&dir[*i])).sum();
        let fd = area_directional_fd(&mesh, &f, &sigma, &dir, tol::FD_STEP).unwrap();
        let norm = dir.iter().map(|d| d.norm_squared()).sum::<f64>().sqrt();
        assert!((fd + predicted).abs() <= 1e-6 * norm * edge_scale(&mesh, &f));
    }

    #[test]
    fn family_members_are_area_critical() {
        let (mesh, _, w) = pnet(NetKind::Grid { m: 6, n: 6 });
        let dual = mesh.dual().unwrap();
        for t in tol::theta_samples(4) {
            let ft = associated_surface(&w.surface, t);
            let scale = ft.scale(&mesh).unwrap();
            let pos = ft.on_dual(&dual);
            let sigma = sigma_from_gauss(&dual, &pos, &w.gauss).unwrap();
            assert!(sigma.iter().all(|&s| s == 1.0));
            for (_, h) in surface_mean_curvature(&dual, &ft, &w.gauss).unwrap() {
                assert!(h.norm() <= 1e-10 * scale);
            }
            for (_, g) in area_gradient_fd(&dual.mesh, &pos, &sigma, tol::FD_STEP).unwrap() {
                assert!(g.norm() <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn planar_grid_surface_report() {
        let mesh = grid_mesh(3, 3).unwrap();
        let z = crate::holo::PlanarNet((0..9).map(|k| num_complex::Complex64::new((k / 3) as f64, (k % 3) as f64) * 0.1).collect());
        let n = stereographic_lift(&z);
        let f = RealSurface(vec![V3::zeros(); mesh.n_faces()]);
        let r = curvature_report(&mesh, &f, &n).unwrap();
        assert_eq!(r.edges.len(), 4);
        assert_eq!(r.vertices.len(), 1);
        assert_eq!(r.vertices[0].scalar_mean, 0.0);
    }
}
