//! JSON net documents, verification reports, complex-surface sidecars and
//! OBJ geometry.
//!
//! Documents serialize with sorted keys and shortest round-trip floats, so a
//! write/read cycle is exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::holo::{PlanarNet, QuadDiff};
use crate::mesh::Mesh;
use crate::weier::ComplexSurface;
use crate::{Error, Result};

type V3 = Vector3<f64>;

pub const FORMAT_VERSION: u32 = 1;

fn doc_err(msg: impl Into<String>) -> Error {
    Error::Document(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    /// `"min_id:max_id"`.
    pub k: String,
    pub q: f64,
}

/// A planar net or a spatial polyhedron, with an optional edge table.
///
/// Field order is alphabetical so serialized keys come out sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    pub faces: Vec<Vec<usize>>,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
    pub vertices: Vec<VertexRecord>,
    pub version: u32,
}

pub fn edge_key(a: usize, b: usize) -> String {
    format!("{}:{}", a.min(b), a.max(b))
}

fn parse_edge_key(k: &str) -> Result<(usize, usize)> {
    let (a, b) = k
        .split_once(':')
        .ok_or_else(|| doc_err(format!("edge key {k:?} is not of the form i:j")))?;
    let a = a.trim().parse().map_err(|_| doc_err(format!("bad edge key {k:?}")))?;
    let b = b.trim().parse().map_err(|_| doc_err(format!("bad edge key {k:?}")))?;
    Ok((a, b))
}

impl NetDocument {
    /// A planar net, with `q` on every interior edge when given.
    pub fn planar(mesh: &Mesh, z: &PlanarNet, q: Option<&QuadDiff>) -> NetDocument {
        let vertices = z
            .0
            .iter()
            .enumerate()
            .map(|(id, c)| VertexRecord {
                id,
                p: None,
                z: Some([c.re, c.im]),
            })
            .collect();
        let edges = q
            .map(|q| {
                mesh.interior_edges()
                    .iter()
                    .map(|&e| EdgeRecord {
                        k: edge_key(mesh.edge(e).lo, mesh.edge(e).hi),
                        q: q.on_edge(e),
                    })
                    .collect()
            })
            .unwrap_or_default();
        NetDocument {
            edges,
            faces: mesh.faces().to_vec(),
            meta: BTreeMap::new(),
            vertices,
            version: FORMAT_VERSION,
        }
    }

    pub fn spatial(positions: &[V3], faces: Vec<Vec<usize>>) -> NetDocument {
        NetDocument {
            edges: Vec::new(),
            faces,
            meta: BTreeMap::new(),
            vertices: positions
                .iter()
                .enumerate()
                .map(|(id, p)| VertexRecord {
                    id,
                    p: Some([p.x, p.y, p.z]),
                    z: None,
                })
                .collect(),
            version: FORMAT_VERSION,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    /// Parses and validates: version, unique ids `0..n`, exclusive position
    /// kinds, edge keys of existing edges.
    pub fn from_json(text: &str) -> Result<NetDocument> {
        let doc: NetDocument =
            serde_json::from_str(text).map_err(|e| doc_err(format!("invalid net document: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(doc_err(format!("unsupported version {}", self.version)));
        }
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        for v in &self.vertices {
            if v.id >= n || seen[v.id] {
                return Err(doc_err(format!("vertex ids must be unique and in 0..{n}, got {}", v.id)));
            }
            seen[v.id] = true;
            if v.p.is_some() == v.z.is_some() {
                return Err(doc_err(format!("vertex {} needs exactly one of \"z\" or \"p\"", v.id)));
            }
        }
        let planar = self.vertices.iter().filter(|v| v.z.is_some()).count();
        if planar != 0 && planar != n {
            return Err(doc_err("planar and spatial positions are mixed"));
        }
        let mesh = self.mesh()?;
        let mut keys = BTreeSet::new();
        for e in &self.edges {
            let (a, b) = parse_edge_key(&e.k)?;
            if mesh.edge_id(a, b).is_none() {
                return Err(doc_err(format!("edge {:?} is not an edge of the mesh", e.k)));
            }
            if !keys.insert((a.min(b), a.max(b))) {
                return Err(doc_err(format!("edge {:?} appears twice", e.k)));
            }
        }
        Ok(())
    }

    pub fn is_planar(&self) -> bool {
        self.vertices.iter().all(|v| v.z.is_some())
    }

    pub fn face_cycles(&self) -> Vec<Vec<usize>> {
        self.faces.clone()
    }

    pub fn mesh(&self) -> Result<Mesh> {
        Mesh::new(self.vertices.len(), self.faces.clone())
    }

    fn by_id<T>(&self, pick: impl Fn(&VertexRecord) -> Option<T>, what: &str) -> Result<Vec<T>> {
        let mut out: Vec<Option<T>> = (0..self.vertices.len()).map(|_| None).collect();
        for v in &self.vertices {
            out[v.id] = Some(pick(v).ok_or_else(|| doc_err(format!("vertex {} has no {what} position", v.id)))?);
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }

    pub fn planar_net(&self) -> Result<PlanarNet> {
        self.by_id(|v| v.z.map(|[re, im]| Complex64::new(re, im)), "planar")
            .map(PlanarNet)
    }

    pub fn spatial_positions(&self) -> Result<Vec<V3>> {
        self.by_id(|v| v.p.map(|[x, y, z]| V3::new(x, y, z)), "spatial")
    }

    /// The edge table as a quadratic differential; missing interior edges
    /// are an error, `None` when the table is empty.
    pub fn quad_diff(&self, mesh: &Mesh) -> Result<Option<QuadDiff>> {
        if self.edges.is_empty() {
            return Ok(None);
        }
        let mut q = QuadDiff::zeros(mesh);
        let mut have = vec![false; mesh.n_edges()];
        for e in &self.edges {
            let (a, b) = parse_edge_key(&e.k)?;
            let id = mesh
                .edge_id(a, b)
                .ok_or_else(|| doc_err(format!("edge {:?} is not an edge of the mesh", e.k)))?;
            have[id] = true;
            if mesh.edge(id).is_interior() {
                q.set(mesh, a, b, e.q)?;
            }
        }
        if let Some(&e) = mesh.interior_edges().iter().find(|&&e| !have[e]) {
            let edge = mesh.edge(e);
            return Err(doc_err(format!("edge table has no entry for {}", edge_key(edge.lo, edge.hi))));
        }
        Ok(Some(q))
    }
}

/// Result of one named check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub max_residual: f64,
    pub offender: Option<String>,
    pub pass: bool,
    pub tolerance: f64,
}

/// Check name to result; each check recorded once.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportDocument {
    pub checks: BTreeMap<String, CheckRecord>,
}

impl ReportDocument {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `residual <= tolerance`. Panics if `name` was already used.
    pub fn record(&mut self, name: &str, residual: f64, offender: Option<String>, tolerance: f64) -> bool {
        let pass = residual <= tolerance;
        let prev = self.checks.insert(
            name.to_string(),
            CheckRecord {
                max_residual: residual,
                offender,
                pass,
                tolerance,
            },
        );
        assert!(prev.is_none(), "check {name} recorded twice");
        pass
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| doc_err(format!("invalid report: {e}")))
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (name, c) in &self.checks {
            let _ = writeln!(
                s,
                "{} {name}: max residual {:e} (tolerance {:e}){}",
                if c.pass { "PASS" } else { "FAIL" },
                c.max_residual,
                c.tolerance,
                c.offender.as_deref().map(|o| format!(" at {o}")).unwrap_or_default()
            );
        }
        s
    }
}

/// `F` per primal face, for round-tripping built surfaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDocument {
    pub base_face: usize,
    /// `[[re, im]; 3]` per face.
    pub f: Vec<[[f64; 2]; 3]>,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
    pub version: u32,
}

impl SurfaceDocument {
    pub fn new(surface: &ComplexSurface, base_face: usize) -> Self {
        SurfaceDocument {
            base_face,
            f: surface
                .0
                .iter()
                .map(|v| [[v.x.re, v.x.im], [v.y.re, v.y.im], [v.z.re, v.z.im]])
                .collect(),
            meta: BTreeMap::new(),
            version: FORMAT_VERSION,
        }
    }

    pub fn surface(&self) -> ComplexSurface {
        ComplexSurface(
            self.f
                .iter()
                .map(|r| Vector3::new(Complex64::new(r[0][0], r[0][1]), Complex64::new(r[1][0], r[1][1]), Complex64::new(r[2][0], r[2][1])))
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SurfaceDocument =
            serde_json::from_str(text).map_err(|e| doc_err(format!("invalid surface document: {e}")))?;
        if doc.version != FORMAT_VERSION {
            return Err(doc_err(format!("unsupported version {}", doc.version)));
        }
        Ok(doc)
    }
}

fn obj_number(x: f64) -> String {
    // `-0` prints as `-0`
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

/// `v` lines, then 1-indexed `f` lines. With `triangulate`, each polygon is
/// fanned from its lowest-index vertex.
pub fn write_obj(positions: &[V3], faces: &[Vec<usize>], triangulate: bool) -> String {
    let mut s = String::new();
    for p in positions {
        let _ = writeln!(s, "v {} {} {}", obj_number(p.x), obj_number(p.y), obj_number(p.z));
    }
    let mut line = |f: &[usize]| {
        s.push('f');
        for &v in f {
            let _ = write!(s, " {}", v + 1);
        }
        s.push('\n');
    };
    for f in faces {
        if triangulate && f.len() > 3 {
            let start = (0..f.len()).min_by_key(|&k| f[k]).unwrap();
            let r: Vec<usize> = (0..f.len()).map(|k| f[(start + k) % f.len()]).collect();
            for k in 1..r.len() - 1 {
                line(&[r[0], r[k], r[k + 1]]);
            }
        } else {
            line(f);
        }
    }
    s
}

/// Reads `v` and `f` lines; other statements are ignored. Face entries may
/// carry `/vt/vn` suffixes and negative indices.
pub fn read_obj(text: &str) -> Result<(Vec<V3>, Vec<Vec<usize>>)> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xs: Vec<f64> = parts
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| doc_err(format!("line {}: bad vertex", n + 1)))?;
                if xs.len() != 3 {
                    return Err(doc_err(format!("line {}: vertex needs three coordinates", n + 1)));
                }
                positions.push(V3::new(xs[0], xs[1], xs[2]));
            }
            Some("f") => {
                let mut face = Vec::new();
                for t in parts {
                    let idx: i64 = t
                        .split('/')
                        .next()
                        .unwrap()
                        .parse()
                        .map_err(|_| doc_err(format!("line {}: bad face index {t:?}", n + 1)))?;
                    let k = if idx > 0 {
                        idx - 1
                    } else {
                        positions.len() as i64 + idx
                    };
                    if k < 0 || k as usize >= positions.len() {
                        return Err(doc_err(format!("line {}: face index {idx} out of range", n + 1)));
                    }
                    face.push(k as usize);
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    Ok((positions, faces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::{generate_net, p_labeling, NetKind};

    #[test]
    fn planar_round_trip_is_exact() {
        let net = generate_net(NetKind::Exp { m: 4, n: 5, a: 0.3, b: 0.4 }).unwrap();
        let mu = p_labeling(&net.mesh).unwrap().to_quad_diff();
        let mut doc = NetDocument::planar(&net.mesh, &net.z, Some(&mu));
        doc.meta.insert("kind".into(), serde_json::json!("exp"));
        let text = doc.to_json();
        let back = NetDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), text);
        assert_eq!(back.planar_net().unwrap(), net.z);
        assert_eq!(back.quad_diff(&net.mesh).unwrap().unwrap(), mu);
    }

    #[test]
    fn keys_are_sorted() {
        let doc = NetDocument::spatial(&[V3::new(0.1, -0.0, 1e-300)], vec![]);
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(
            text,
            r#"{"edges":[],"faces":[],"meta":{},"vertices":[{"id":0,"p":[0.1,-0.0,1e-300]}],"version":1}"#
        );
    }

    #[test]
    fn invalid_documents() {
        let bad = [
            r#"{"version":2,"vertices":[],"faces":[]}"#,
            r#"{"version":1,"vertices":[{"id":0,"z":[0,0]},{"id":0,"z":[1,0]}],"faces":[]}"#,
            r#"{"version":1,"vertices":[{"id":0,"z":[0,0],"p":[0,0,0]}],"faces":[]}"#,
            r#"{"version":1,"vertices":[{"id":0,"z":[0,0]},{"id":1,"p":[1,0,0]},{"id":2,"z":[0,1]}],"faces":[[0,1,2]]}"#,
            r#"{"version":1,"vertices":[{"id":0,"z":[0,0]},{"id":1,"z":[1,0]},{"id":2,"z":[0,1]}],"faces":[[0,1,2]],"edges":[{"k":"0:5","q":1}]}"#,
            r#"{"version":1,"vertices":[{"id":0,"z":[0,0]},{"id":1,"z":[1,0]},{"id":2,"z":[0,1]}],"faces":[[0,1,2]],"edges":[{"k":"0:1","q":1},{"k":"1:0","q":1}]}"#,
            r#"{"version":1,"vertices":[],"faces":[],"extra":1}"#,
        ];
        for b in bad {
            assert!(matches!(NetDocument::from_json(b), Err(Error::Document(_))), "{b}");
        }
    }

    #[test]
    fn obj_round_trip_and_fan() {
        let pos = vec![V3::new(0.0, -0.0, 0.5), V3::new(1.0, 0.0, 0.0), V3::new(1.0, 1.0, 0.0), V3::new(0.0, 1.0, 0.25)];
        let text = write_obj(&pos, &[vec![2, 3, 0, 1]], false);
        assert_eq!(text, "v 0 0 0.5\nv 1 0 0\nv 1 1 0\nv 0 1 0.25\nf 3 4 1 2\n");
        let (p, f) = read_obj(&text).unwrap();
        assert_eq!((p, f), (pos.clone(), vec![vec![2, 3, 0, 1]]));
        let fan = write_obj(&pos, &[vec![2, 3, 0, 1]], true);
        assert!(fan.ends_with("f 1 2 3\nf 1 3 4\n"));
        assert!(read_obj("v 0 0 0\nf 1 2 3\n").is_err());
        let (_, f) = read_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3/1 -2/2/2 -1//3\n").unwrap();
        assert_eq!(f, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn report_serialization() {
        let mut r = ReportDocument::new();
        assert!(r.record("qhd", 1e-15, Some("vertex 3".into()), 1e-12));
        assert!(!r.record("aminimal", 1.0, None, 1e-10));
        assert!(!r.passed());
        let back = ReportDocument::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().find("aminimal").unwrap() < r.to_json().find("qhd").unwrap());
    }

    #[test]
    fn surface_document_round_trip() {
        let s = ComplexSurface(vec![Vector3::new(Complex64::new(0.1, -2.0), Complex64::new(3.0, 0.0), Complex64::new(-0.0, 1e-17))]);
        let d = SurfaceDocument::new(&s, 0);
        let back = SurfaceDocument::from_json(&d.to_json()).unwrap();
        assert_eq!(back.surface(), s);
    }
}
