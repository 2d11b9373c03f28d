//! Planar-faced test surfaces built from unit squares of the cubic lattice.
//!
//! A polyhedron `P` becomes a Gauss-map mesh by duality: each face of `P` is
//! a vertex carrying the face normal, each interior vertex of `P` is a face
//! carrying its position.

use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::curv::{vector_area, RealSurface};
use crate::io::NetDocument;
use crate::mesh::Mesh;
use crate::weier::GaussMap;
use crate::{Error, Result};

type V3 = Vector3<f64>;

/// The Schwarz-P patch shipped with the crate, as a polyhedron document.
pub const SCHWARZ_P_ASSET: &str = include_str!("../assets/schwarz_p_patch.json");

/// A Gauss-map mesh with a realization of its dual.
#[derive(Clone, Debug)]
pub struct TestSurface {
    pub mesh: Mesh,
    pub gauss: GaussMap,
    pub surface: RealSurface,
}

/// Vertex positions and counterclockwise faces of a polyhedral surface.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    pub positions: Vec<V3>,
    pub faces: Vec<Vec<usize>>,
}

/// Octahedron `N = ±e_k` with the unit cube `[-½, ½]³` on its faces.
pub fn unit_cube() -> TestSurface {
    let axes = [
        V3::x(),
        -V3::x(),
        V3::y(),
        -V3::y(),
        V3::z(),
        -V3::z(),
    ];
    let mut faces = Vec::new();
    let mut corners = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                let (x, y, z) = (
                    usize::from(sx < 0.0),
                    2 + usize::from(sy < 0.0),
                    4 + usize::from(sz < 0.0),
                );
                faces.push(if sx * sy * sz > 0.0 {
                    vec![x, y, z]
                } else {
                    vec![x, z, y]
                });
                corners.push(V3::new(sx, sy, sz) * 0.5);
            }
        }
    }
    TestSurface {
        mesh: Mesh::new(6, faces).unwrap(),
        gauss: GaussMap(axes.to_vec()),
        surface: RealSurface(corners),
    }
}

/// Boundary of the tube network on the cubic lattice inside `[0, 2k+1]³`.
///
/// Voxel `(a, b, c)` occupies `[a, a+1] × [b, b+1] × [c, c+1]` for
/// `0 <= a, b, c <= 2k`. Voxels with at most one odd index form the solid;
/// its faces against voxels with two or more odd indices form the surface.
/// Faces point out of the solid.
pub fn schwarz_p_polyhedron(k: usize) -> Polyhedron {
    let hi = 2 * k as i64;
    let inside = |v: [i64; 3]| v.iter().all(|&c| (0..=hi).contains(&c));
    let solid = |v: [i64; 3]| v.iter().filter(|&&c| c % 2 != 0).count() <= 1;
    let mut quads: Vec<[[i64; 3]; 4]> = Vec::new();
    for a in 0..=hi {
        for b in 0..=hi {
            for c in 0..=hi {
                let v = [a, b, c];
                if !solid(v) {
                    continue;
                }
                for axis in 0..3 {
                    for s in [1i64, -1] {
                        let mut w = v;
                        w[axis] += s;
                        if !inside(w) || solid(w) {
                            continue;
                        }
                        let (u, t) = ((axis + 1) % 3, (axis + 2) % 3);
                        let mut base = v;
                        base[axis] += i64::from(s > 0);
                        let mut q = [base; 4];
                        q[1][u] += 1;
                        q[2][u] += 1;
                        q[2][t] += 1;
                        q[3][t] += 1;
                        if s < 0 {
                            q.reverse();
                        }
                        quads.push(q);
                    }
                }
            }
        }
    }
    let mut ids = BTreeMap::new();
    for q in &quads {
        for p in q {
            ids.insert(*p, 0usize);
        }
    }
    for (n, id) in ids.values_mut().enumerate() {
        *id = n;
    }
    let positions = ids
        .keys()
        .map(|p| V3::new(p[0] as f64, p[1] as f64, p[2] as f64))
        .collect();
    let faces = quads
        .iter()
        .map(|q| q.iter().map(|p| ids[p]).collect())
        .collect();
    Polyhedron { positions, faces }
}

impl Polyhedron {
    pub fn to_document(&self, kind: &str) -> NetDocument {
        let mesh_faces = self.faces.clone();
        let mut doc = NetDocument::spatial(&self.positions, mesh_faces);
        doc.meta
            .insert("kind".into(), serde_json::Value::String(kind.into()));
        doc
    }

    pub fn from_document(doc: &NetDocument) -> Result<Polyhedron> {
        Ok(Polyhedron {
            positions: doc.spatial_positions()?,
            faces: doc.face_cycles(),
        })
    }
}

/// The Gauss-map mesh of a polyhedron: normals on its faces, positions on its
/// interior vertices.
pub fn gauss_surface(poly: &Polyhedron) -> Result<TestSurface> {
    let pm = Mesh::new(poly.positions.len(), poly.faces.clone())?;
    let dual = pm.dual()?;
    let normals = dual
        .primal_face
        .iter()
        .map(|&f| {
            let ring: Vec<V3> = pm.face(f).iter().map(|&v| poly.positions[v]).collect();
            let a = vector_area(&ring);
            if a.norm() == 0.0 {
                Err(Error::ZeroVectorArea(f))
            } else {
                Ok(a.normalize())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let surface = dual
        .primal_vertex
        .iter()
        .map(|&v| poly.positions[v])
        .collect();
    Ok(TestSurface {
        mesh: dual.mesh,
        gauss: GaussMap(normals),
        surface: RealSurface(surface),
    })
}

/// Parses [`SCHWARZ_P_ASSET`].
pub fn bundled_schwarz_p() -> Result<TestSurface> {
    let doc = NetDocument::from_json(SCHWARZ_P_ASSET)?;
    gauss_surface(&Polyhedron::from_document(&doc)?)
}
