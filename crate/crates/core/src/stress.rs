//! Self-stresses on the Gauss map and force/torque balance on its polar.

use nalgebra::{Matrix3, Vector3};

use crate::curv::RealSurface;
use crate::holo::{PlanarNet, QuadDiff};
use crate::mesh::{EdgeId, Mesh, VertexId};
use crate::weier::GaussMap;
use crate::{par, tol, Error, Result};

type V3 = Vector3<f64>;

/// `k_ij` per edge id; boundary edges carry 0.
#[derive(Clone, Debug, PartialEq)]
pub struct StressField(pub Vec<f64>);

impl StressField {
    pub fn zeros(mesh: &Mesh) -> Self {
        StressField(vec![0.0; mesh.n_edges()])
    }

    pub fn on_edge(&self, e: EdgeId) -> f64 {
        self.0[e]
    }

    pub fn get(&self, mesh: &Mesh, i: VertexId, j: VertexId) -> Option<f64> {
        mesh.edge_id(i, j).map(|e| self.0[e])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// `k` with `df(e*_ij) = k_ij (N_j - N_i)`, by projection onto `dN`.
pub fn stress_from_aminimal(mesh: &Mesh, f: &RealSurface, n: &GaussMap) -> Result<StressField> {
    let df = f.differential(mesh)?;
    if n.len() != mesh.n_vertices() {
        return Err(Error::LengthMismatch {
            expected: mesh.n_vertices(),
            got: n.len(),
        });
    }
    let degenerate = tol::DEGENERATE_REL * f.scale(mesh)?;
    par::try_map_range(mesh.n_edges(), |e| {
        let edge = mesh.edge(e);
        let Some(d) = df.on_edge(e) else {
            return Ok(0.0);
        };
        let dn = n.dn(edge.lo, edge.hi);
        let dn2 = dn.norm_squared();
        if dn2.sqrt() <= tol::DEGENERATE_REL {
            if d.norm() > degenerate {
                return Err(Error::ParallelNormals {
                    a: edge.lo,
                    b: edge.hi,
                });
            }
            return Ok(0.0);
        }
        Ok(d.dot(&dn) / dn2)
    })
    .map(StressField)
}

/// `k_ij = q_ij (1+|z_i|²)(1+|z_j|²) / (2|z_j - z_i|²)`, the stress of the
/// Weierstrass surface of `(z, q)`.
pub fn stress_from_weierstrass(mesh: &Mesh, z: &PlanarNet, q: &QuadDiff) -> StressField {
    StressField(
        mesh.edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                if !edge.is_interior() {
                    return 0.0;
                }
                let (i, j) = (edge.lo, edge.hi);
                q.on_edge(e) * (1.0 + z[i].norm_sqr()) * (1.0 + z[j].norm_sqr())
                    / (2.0 * z.dz(i, j).norm_sqr())
            })
            .collect(),
    )
}

/// Point on both tangent lines of the unit sphere at `N_i` and `N_j` in
/// their common plane.
pub fn torque_arm(ni: &V3, nj: &V3) -> V3 {
    (ni + nj) / (1.0 + ni.dot(nj))
}

/// Residuals at one interior vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Balance {
    pub vertex: VertexId,
    /// `Σ_j k_ij (N_j - N_i)`.
    pub equilibrium: V3,
    /// `Σ_j k_ij N_i × N_j`.
    pub force: V3,
    /// `Σ_j k_ij r_ij × (N_i × N_j)`.
    pub torque: V3,
}

/// Vertex equilibrium on `N` together with force and torque balance of the
/// dual face on the polar.
pub fn force_torque_balance(mesh: &Mesh, n: &GaussMap, k: &StressField) -> Result<Vec<Balance>> {
    if k.0.len() != mesh.n_edges() {
        return Err(Error::LengthMismatch {
            expected: mesh.n_edges(),
            got: k.0.len(),
        });
    }
    par::try_map_range(mesh.interior_vertices().len(), |idx| {
        let i = mesh.interior_vertices()[idx];
        let star = mesh.star(i).unwrap();
        let mut b = Balance {
            vertex: i,
            equilibrium: V3::zeros(),
            force: V3::zeros(),
            torque: V3::zeros(),
        };
        for (&j, &e) in star.neighbors.iter().zip(&star.edges) {
            let kij = k.on_edge(e);
            if kij == 0.0 {
                continue;
            }
            let c = n[i].cross(&n[j]);
            if c.norm() <= tol::DEGENERATE_REL {
                let (a, bb) = (i.min(j), i.max(j));
                return Err(if n[i].dot(&n[j]) < 0.0 {
                    Error::Inadmissible { a, b: bb }
                } else {
                    Error::ParallelNormals { a, b: bb }
                });
            }
            b.equilibrium += (n[j] - n[i]) * kij;
            b.force += c * kij;
            b.torque += torque_arm(&n[i], &n[j]).cross(&c) * kij;
        }
        Ok(b)
    })
}

/// Pole of each triangle of the Gauss map: `<N_a, N̂_φ> = 1` for its three
/// vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarMesh(pub Vec<V3>);

impl PolarMesh {
    /// Largest `|<N_a, N̂_φ> - 1|` over incidences.
    pub fn incidence_residual(&self, mesh: &Mesh, n: &GaussMap) -> f64 {
        mesh.faces()
            .iter()
            .zip(&self.0)
            .flat_map(|(face, p)| face.iter().map(move |&a| (n[a].dot(p) - 1.0).abs()))
            .fold(0.0, f64::max)
    }
}

pub fn polar_mesh(mesh: &Mesh, n: &GaussMap) -> Result<PolarMesh> {
    if n.len() != mesh.n_vertices() {
        return Err(Error::LengthMismatch {
            expected: mesh.n_vertices(),
            got: n.len(),
        });
    }
    par::try_map_range(mesh.n_faces(), |f| {
        let face = mesh.face(f);
        if face.len() != 3 {
            return Err(Error::NotTriangulated(f));
        }
        let m = Matrix3::from_rows(&[
            n[face[0]].transpose(),
            n[face[1]].transpose(),
            n[face[2]].transpose(),
        ]);
        if m.determinant().abs() <= tol::DEGENERATE_REL {
            return Err(Error::SingularPolarFace(f));
        }
        m.lu()
            .solve(&V3::repeat(1.0))
            .ok_or(Error::SingularPolarFace(f))
    })
    .map(PolarMesh)
}
