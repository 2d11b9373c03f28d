//! Oriented cell decompositions, their duals, and dual 1-forms.
//!
//! Faces are cyclic vertex lists, counterclockwise in the reference
//! orientation. The face whose cycle runs `i -> j` is the *left* face of the
//! oriented edge `e_ij`; the face running `j -> i` is its *right* face. The
//! dual edge `e*_ij` points from the right face to the left face, so a face
//! function `g` differentiates to `dg(e*_ij) = g(left) - g(right)`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::ops::{Add, AddAssign, Neg, Sub};

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::{par, tol, Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

/// An undirected edge stored as `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub lo: VertexId,
    pub hi: VertexId,
    /// Face traversing `lo -> hi`.
    pub left: Option<FaceId>,
    /// Face traversing `hi -> lo`.
    pub right: Option<FaceId>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.left.is_some() && self.right.is_some()
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.lo {
            self.hi
        } else {
            self.lo
        }
    }
}

/// Counterclockwise ring around an interior vertex.
///
/// `faces[l]` is the left face of `i -> neighbors[l]`, which is also the right
/// face of `i -> neighbors[l + 1]`. Walking `faces` in order therefore
/// traverses the boundary of the dual face of `i` along the dual edges
/// `e*_{i, neighbors[l+1]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Star {
    pub neighbors: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub faces: Vec<FaceId>,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    n_vertices: usize,
    faces: Vec<Vec<VertexId>>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<(VertexId, VertexId), EdgeId>,
    vertex_edges: Vec<Vec<EdgeId>>,
    boundary: Vec<bool>,
    stars: Vec<Option<Star>>,
    interior_vertices: Vec<VertexId>,
    interior_edges: Vec<EdgeId>,
    face_adjacency: Vec<Vec<(EdgeId, FaceId)>>,
}

impl Mesh {
    /// Builds a mesh on vertices `0..n_vertices` from counterclockwise face
    /// cycles. Edges are numbered lexicographically by `(lo, hi)`.
    pub fn new(n_vertices: usize, faces: Vec<Vec<VertexId>>) -> Result<Self> {
        let mut directed: HashMap<(VertexId, VertexId), FaceId> = HashMap::new();
        let mut used = vec![false; n_vertices];
        for (fi, face) in faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(Error::FaceTooSmall { face: fi });
            }
            for (k, &v) in face.iter().enumerate() {
                if v >= n_vertices {
                    return Err(Error::UnknownVertex { face: fi, vertex: v });
                }
                if face[..k].contains(&v) {
                    return Err(Error::RepeatedVertex { face: fi, vertex: v });
                }
                used[v] = true;
            }
            for k in 0..face.len() {
                let (a, b) = (face[k], face[(k + 1) % face.len()]);
                if directed.contains_key(&(a, b)) {
                    // Both directions already present means a third face.
                    if directed.contains_key(&(b, a)) {
                        return Err(Error::NonManifoldEdge {
                            a: a.min(b),
                            b: a.max(b),
                        });
                    }
                    return Err(Error::InconsistentOrientation { a, b });
                }
                directed.insert((a, b), fi);
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::IsolatedVertex(v));
        }

        let mut undirected: BTreeMap<(VertexId, VertexId), Edge> = BTreeMap::new();
        for (&(a, b), &f) in &directed {
            let (lo, hi) = (a.min(b), a.max(b));
            let e = undirected.entry((lo, hi)).or_insert(Edge {
                lo,
                hi,
                left: None,
                right: None,
            });
            if a == lo {
                e.left = Some(f);
            } else {
                e.right = Some(f);
            }
        }
        let edges: Vec<Edge> = undirected.into_values().collect();
        let mut edge_lookup = HashMap::with_capacity(edges.len());
        let mut vertex_edges = vec![Vec::new(); n_vertices];
        let mut boundary = vec![false; n_vertices];
        for (id, e) in edges.iter().enumerate() {
            edge_lookup.insert((e.lo, e.hi), id);
            vertex_edges[e.lo].push(id);
            vertex_edges[e.hi].push(id);
            if !e.is_interior() {
                boundary[e.lo] = true;
                boundary[e.hi] = true;
            }
        }

        let mut stars = vec![None; n_vertices];
        let mut interior_vertices = Vec::new();
        for v in 0..n_vertices {
            if boundary[v] {
                continue;
            }
            let star = walk_star(v, &vertex_edges[v], &edges, &faces, &directed)?;
            stars[v] = Some(star);
            interior_vertices.push(v);
        }

        let interior_edges: Vec<EdgeId> = (0..edges.len())
            .filter(|&e| edges[e].is_interior())
            .collect();
        let mut face_adjacency = vec![Vec::new(); faces.len()];
        for &e in &interior_edges {
            let (l, r) = (edges[e].left.unwrap(), edges[e].right.unwrap());
            face_adjacency[l].push((e, r));
            face_adjacency[r].push((e, l));
        }

        Ok(Mesh {
            n_vertices,
            faces,
            edges,
            edge_lookup,
            vertex_edges,
            boundary,
            stars,
            interior_vertices,
            interior_edges,
            face_adjacency,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn faces(&self) -> &[Vec<VertexId>] {
        &self.faces
    }

    pub fn face(&self, f: FaceId) -> &[VertexId] {
        &self.faces[f]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_id(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn vertex_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.vertex_edges[v]
    }

    pub fn is_boundary_vertex(&self, v: VertexId) -> bool {
        self.boundary[v]
    }

    pub fn interior_vertices(&self) -> &[VertexId] {
        &self.interior_vertices
    }

    pub fn interior_edges(&self) -> &[EdgeId] {
        &self.interior_edges
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.len() - self.interior_edges.len()
    }

    /// Counterclockwise ring of an interior vertex.
    pub fn star(&self, v: VertexId) -> Option<&Star> {
        self.stars[v].as_ref()
    }

    /// Left and right face of the oriented edge `a -> b`.
    pub fn left_right(&self, a: VertexId, b: VertexId) -> Option<(Option<FaceId>, Option<FaceId>)> {
        let e = &self.edges[self.edge_id(a, b)?];
        Some(if a == e.lo {
            (e.left, e.right)
        } else {
            (e.right, e.left)
        })
    }

    /// Faces adjacent across interior edges, sorted by edge id.
    pub fn face_neighbors(&self, f: FaceId) -> &[(EdgeId, FaceId)] {
        &self.face_adjacency[f]
    }

    pub fn is_triangulated(&self) -> bool {
        self.faces.iter().all(|f| f.len() == 3)
    }

    /// The dual cell decomposition restricted to interior vertices: one
    /// vertex per primal face that touches an interior vertex, one face per
    /// interior primal vertex (its ring of faces).
    pub fn dual(&self) -> Result<DualMesh> {
        let mut index = vec![usize::MAX; self.faces.len()];
        let mut primal_face = Vec::new();
        let mut cycles = Vec::with_capacity(self.interior_vertices.len());
        for &v in &self.interior_vertices {
            let star = self.stars[v].as_ref().unwrap();
            let cycle = star
                .faces
                .iter()
                .map(|&f| {
                    if index[f] == usize::MAX {
                        index[f] = primal_face.len();
                        primal_face.push(f);
                    }
                    index[f]
                })
                .collect();
            cycles.push(cycle);
        }
        let mesh = Mesh::new(primal_face.len(), cycles)?;
        Ok(DualMesh {
            mesh,
            primal_face,
            primal_vertex: self.interior_vertices.clone(),
        })
    }
}

fn walk_star(
    v: VertexId,
    incident: &[EdgeId],
    edges: &[Edge],
    faces: &[Vec<VertexId>],
    directed: &HashMap<(VertexId, VertexId), FaceId>,
) -> Result<Star> {
    let start = edges[incident[0]].other(v);
    let mut neighbors = Vec::with_capacity(incident.len());
    let mut star_faces = Vec::with_capacity(incident.len());
    let mut j = start;
    loop {
        let f = *directed.get(&(v, j)).ok_or(Error::NonManifoldVertex(v))?;
        let face = &faces[f];
        let pos = face.iter().position(|&x| x == v).unwrap();
        let prev = face[(pos + face.len() - 1) % face.len()];
        neighbors.push(j);
        star_faces.push(f);
        j = prev;
        if j == start {
            break;
        }
        if neighbors.len() > incident.len() {
            return Err(Error::NonManifoldVertex(v));
        }
    }
    if neighbors.len() != incident.len() {
        return Err(Error::NonManifoldVertex(v));
    }
    let lookup = |a: VertexId, b: VertexId| {
        incident
            .iter()
            .copied()
            .find(|&e| edges[e].other(a) == b)
            .unwrap()
    };
    let edge_ids = neighbors.iter().map(|&n| lookup(v, n)).collect();
    Ok(Star {
        neighbors,
        edges: edge_ids,
        faces: star_faces,
    })
}

/// Dual of a mesh over its interior vertices.
#[derive(Clone, Debug)]
pub struct DualMesh {
    pub mesh: Mesh,
    /// Primal face behind each dual vertex.
    pub primal_face: Vec<FaceId>,
    /// Primal interior vertex behind each dual face.
    pub primal_vertex: Vec<VertexId>,
}

/// Value space of a discrete 1-form.
pub trait FormValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + AddAssign
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl FormValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl FormValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl FormValue for Vector3<f64> {
    fn zero() -> Self {
        Vector3::zeros()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl FormValue for Vector3<Complex64> {
    fn zero() -> Self {
        Vector3::from_element(Complex64::new(0.0, 0.0))
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A function on oriented interior dual edges with `η(e*_ji) = -η(e*_ij)`.
///
/// Stored once per edge for the orientation `lo -> hi`; boundary edges never
/// carry a value.
#[derive(Clone, Debug, PartialEq)]
pub struct DualOneForm<T> {
    values: Vec<Option<T>>,
}

impl<T: FormValue> DualOneForm<T> {
    /// An empty form; every interior edge still needs a value.
    pub fn empty(mesh: &Mesh) -> Self {
        DualOneForm {
            values: vec![None; mesh.n_edges()],
        }
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self::from_fn(mesh, |_, _| T::zero())
    }

    /// Evaluates `value(i, j) = η(e*_ij)` with `i = lo, j = hi` on every
    /// interior edge.
    pub fn from_fn<F>(mesh: &Mesh, value: F) -> Self
    where
        F: Fn(VertexId, VertexId) -> T + Sync + Send,
    {
        let values = par::map_slice(mesh.edges(), |e| {
            e.is_interior().then(|| value(e.lo, e.hi))
        });
        DualOneForm { values }
    }

    /// Fallible variant of [`DualOneForm::from_fn`].
    pub fn try_from_fn<F>(mesh: &Mesh, value: F) -> Result<Self>
    where
        F: Fn(VertexId, VertexId) -> Result<T> + Sync + Send,
    {
        let values = par::map_slice(mesh.edges(), |e| {
            if e.is_interior() {
                value(e.lo, e.hi).map(Some)
            } else {
                Ok(None)
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(DualOneForm { values })
    }

    /// `dg(e*_ij) = g(left) - g(right)` for a function on faces.
    pub fn exact(mesh: &Mesh, g: &[T]) -> Result<Self> {
        if g.len() != mesh.n_faces() {
            return Err(Error::LengthMismatch {
                expected: mesh.n_faces(),
                got: g.len(),
            });
        }
        let values = mesh
            .edges()
            .iter()
            .map(|e| match (e.left, e.right) {
                (Some(l), Some(r)) => Some(g[l] - g[r]),
                _ => None,
            })
            .collect();
        Ok(DualOneForm { values })
    }

    /// Value on `e*_ij` for any orientation of an interior edge.
    pub fn get(&self, mesh: &Mesh, i: VertexId, j: VertexId) -> Option<T> {
        let v = self.values[mesh.edge_id(i, j)?]?;
        Some(if i < j { v } else { -v })
    }

    /// Value on edge `e` in its `lo -> hi` orientation.
    pub fn on_edge(&self, e: EdgeId) -> Option<T> {
        self.values[e]
    }

    pub fn set(&mut self, mesh: &Mesh, i: VertexId, j: VertexId, value: T) -> Result<()> {
        let e = mesh
            .edge_id(i, j)
            .filter(|&e| mesh.edge(e).is_interior())
            .ok_or(Error::MissingEdgeValue {
                a: i.min(j),
                b: i.max(j),
            })?;
        self.values[e] = Some(if i < j { value } else { -value });
        Ok(())
    }

    /// Largest edge magnitude, the scale for relative closedness checks.
    pub fn max_magnitude(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|v| v.magnitude())
            .fold(0.0, f64::max)
    }

    pub fn map<U: FormValue, F: Fn(T) -> U>(&self, f: F) -> DualOneForm<U> {
        DualOneForm {
            values: self.values.iter().map(|v| v.map(&f)).collect(),
        }
    }
}

/// `Σ_j η(e*_ij)` for every interior vertex, in `mesh.interior_vertices()`
/// order.
pub fn closedness_residuals<T: FormValue>(
    mesh: &Mesh,
    form: &DualOneForm<T>,
) -> Result<Vec<(VertexId, T)>> {
    par::try_map_range(mesh.interior_vertices().len(), |k| {
        let v = mesh.interior_vertices()[k];
        let star = mesh.star(v).unwrap();
        let mut sum = T::zero();
        for &j in &star.neighbors {
            sum += form.get(mesh, v, j).ok_or(Error::MissingEdgeValue {
                a: v.min(j),
                b: v.max(j),
            })?;
        }
        Ok((v, sum))
    })
}

/// Traversal used to build the spanning tree of the dual graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpanningTree {
    #[default]
    BreadthFirst,
    DepthFirst,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrationOptions {
    pub tree: SpanningTree,
    /// Closedness tolerance relative to the largest edge value.
    pub closedness_rel: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            tree: SpanningTree::BreadthFirst,
            closedness_rel: tol::CLOSEDNESS_REL,
        }
    }
}

/// Integrates a closed dual 1-form to a function on faces with
/// `g(base_face) = base_value`.
pub fn integrate_dual_1form<T: FormValue>(
    mesh: &Mesh,
    form: &DualOneForm<T>,
    base_face: FaceId,
    base_value: T,
) -> Result<Vec<T>> {
    integrate_dual_1form_with(mesh, form, base_face, base_value, IntegrationOptions::default())
}

pub fn integrate_dual_1form_with<T: FormValue>(
    mesh: &Mesh,
    form: &DualOneForm<T>,
    base_face: FaceId,
    base_value: T,
    opts: IntegrationOptions,
) -> Result<Vec<T>> {
    if base_face >= mesh.n_faces() {
        return Err(Error::UnknownFace(base_face));
    }
    let tolerance = opts.closedness_rel * form.max_magnitude();
    let residuals = closedness_residuals(mesh, form)?;
    if let Some((vertex, residual)) = residuals
        .iter()
        .map(|(v, r)| (*v, r.magnitude()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        if residual > tolerance {
            return Err(Error::NotClosed {
                vertex,
                residual,
                tolerance,
            });
        }
    }

    let mut values: Vec<Option<T>> = vec![None; mesh.n_faces()];
    values[base_face] = Some(base_value);
    let step = |from: FaceId, e: EdgeId, acc: T| -> Result<T> {
        let edge = mesh.edge(e);
        let eta = form.on_edge(e).ok_or(Error::MissingEdgeValue {
            a: edge.lo,
            b: edge.hi,
        })?;
        // η(e*_{lo,hi}) = g(left) - g(right)
        Ok(if edge.right == Some(from) {
            acc + eta
        } else {
            acc - eta
        })
    };

    match opts.tree {
        SpanningTree::BreadthFirst => {
            let mut queue = VecDeque::from([base_face]);
            while let Some(f) = queue.pop_front() {
                let here = values[f].unwrap();
                for &(e, g) in mesh.face_neighbors(f) {
                    if values[g].is_none() {
                        values[g] = Some(step(f, e, here)?);
                        queue.push_back(g);
                    }
                }
            }
        }
        SpanningTree::DepthFirst => {
            let mut stack = vec![base_face];
            while let Some(f) = stack.pop() {
                let here = values[f].unwrap();
                for &(e, g) in mesh.face_neighbors(f).iter().rev() {
                    if values[g].is_none() {
                        values[g] = Some(step(f, e, here)?);
                        stack.push(g);
                    }
                }
            }
        }
    }

    values
        .into_iter()
        .enumerate()
        .map(|(f, v)| v.ok_or(Error::DisconnectedDual(f)))
        .collect()
}
