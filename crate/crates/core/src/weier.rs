//! Weierstrass representation: Gauss map lift, the closed `ℂ³`-valued dual
//! 1-form, the complex surface `F`, its associated family, conjugation and
//! Goursat transforms.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::curv::{verify_aminimal, RealSurface};
use crate::holo::{apply_mobius, require_qhd, MobiusCoeffs, PlanarNet, QuadDiff};
use crate::mesh::{
    integrate_dual_1form_with, DualOneForm, FaceId, IntegrationOptions, Mesh, VertexId,
};
use crate::{tol, CVector3, Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Unit normal per primal vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussMap(pub Vec<Vector3<f64>>);

impl GaussMap {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_unit(&self) -> Result<()> {
        match self
            .0
            .iter()
            .position(|n| (n.norm() - 1.0).abs() > tol::UNIT_NORM)
        {
            Some(v) => Err(Error::NotUnit(v)),
            None => Ok(()),
        }
    }

    /// Smallest `|N_i + N_j|` over edges, with the edge attaining it.
    pub fn antipodal_margin(&self, mesh: &Mesh) -> Option<((VertexId, VertexId), f64)> {
        mesh.edges()
            .iter()
            .map(|e| ((e.lo, e.hi), (self.0[e.lo] + self.0[e.hi]).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Rejects any edge with `|N_i + N_j| < eps`.
    pub fn check_admissible(&self, mesh: &Mesh, eps: f64) -> Result<()> {
        if self.0.len() != mesh.n_vertices() {
            return Err(Error::LengthMismatch {
                expected: mesh.n_vertices(),
                got: self.0.len(),
            });
        }
        match self.antipodal_margin(mesh) {
            Some(((a, b), m)) if m < eps => Err(Error::Inadmissible { a, b }),
            _ => Ok(()),
        }
    }

    pub fn dn(&self, i: VertexId, j: VertexId) -> Vector3<f64> {
        self.0[j] - self.0[i]
    }
}

impl std::ops::Index<VertexId> for GaussMap {
    type Output = Vector3<f64>;
    fn index(&self, v: VertexId) -> &Vector3<f64> {
        &self.0[v]
    }
}

/// Inverse stereographic projection of a single point.
pub fn lift_point(z: Complex64) -> Vector3<f64> {
    let r2 = z.norm_sqr();
    Vector3::new(2.0 * z.re, 2.0 * z.im, r2 - 1.0) / (1.0 + r2)
}

/// Stereographic projection from the north pole, `(N1 + i N2) / (1 - N3)`.
pub fn project_point(n: &Vector3<f64>) -> Complex64 {
    Complex64::new(n.x, n.y) / (1.0 - n.z)
}

pub fn stereographic_lift(z: &PlanarNet) -> GaussMap {
    GaussMap(z.0.iter().map(|&zi| lift_point(zi)).collect())
}

/// Lift plus admissibility check at the given antipodality threshold.
pub fn stereographic_lift_checked(mesh: &Mesh, z: &PlanarNet, eps: f64) -> Result<GaussMap> {
    let n = stereographic_lift(z);
    n.check_admissible(mesh, eps)?;
    Ok(n)
}

/// `(q / (z_j - z_i)) (1 - z_i z_j, i(1 + z_i z_j), z_i + z_j)`.
pub fn weierstrass_edge(zi: Complex64, zj: Complex64, q: f64) -> CVector3 {
    let p = zi * zj;
    let s = q / (zj - zi);
    Vector3::new(s * (1.0 - p), s * I * (1.0 + p), s * (zi + zj))
}

/// The Weierstrass dual 1-form without the holomorphicity check.
pub fn weierstrass_form_unchecked(mesh: &Mesh, z: &PlanarNet, q: &QuadDiff) -> DualOneForm<CVector3> {
    DualOneForm::from_fn(mesh, |i, j| {
        let e = mesh.edge_id(i, j).unwrap();
        weierstrass_edge(z[i], z[j], q.on_edge(e))
    })
}

/// The Weierstrass dual 1-form; refuses `q` that fails holomorphicity at the
/// default tolerance.
pub fn weierstrass_form(mesh: &Mesh, z: &PlanarNet, q: &QuadDiff) -> Result<DualOneForm<CVector3>> {
    weierstrass_form_tol(mesh, z, q, tol::QHD_REL)
}

pub fn weierstrass_form_tol(
    mesh: &Mesh,
    z: &PlanarNet,
    q: &QuadDiff,
    qhd_rel: f64,
) -> Result<DualOneForm<CVector3>> {
    require_qhd(mesh, z, q, qhd_rel)?;
    Ok(weierstrass_form_unchecked(mesh, z, q))
}

/// Complex 3-vector per primal face (dual vertex).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSurface(pub Vec<CVector3>);

impl ComplexSurface {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn differential(&self, mesh: &Mesh) -> Result<DualOneForm<CVector3>> {
        DualOneForm::exact(mesh, &self.0)
    }

    pub fn real(&self) -> RealSurface {
        associated_surface(self, 0.0)
    }
}

/// Integrates `dF = η` with `F(base_face) = 0`.
pub fn integrate_surface(
    mesh: &Mesh,
    form: &DualOneForm<CVector3>,
    base_face: FaceId,
) -> Result<ComplexSurface> {
    integrate_surface_with(mesh, form, base_face, IntegrationOptions::default())
}

pub fn integrate_surface_with(
    mesh: &Mesh,
    form: &DualOneForm<CVector3>,
    base_face: FaceId,
    opts: IntegrationOptions,
) -> Result<ComplexSurface> {
    let zero = Vector3::from_element(Complex64::new(0.0, 0.0));
    integrate_dual_1form_with(mesh, form, base_face, zero, opts).map(ComplexSurface)
}

/// `f^θ = Re(e^{iθ} F)`.
pub fn associated_surface(f: &ComplexSurface, theta: f64) -> RealSurface {
    let rot = Complex64::from_polar(1.0, theta);
    RealSurface(
        f.0.iter()
            .map(|v| v.map(|c| (rot * c).re))
            .collect(),
    )
}

/// Everything the Weierstrass pipeline produces for one `(z, q)`.
#[derive(Clone, Debug)]
pub struct Weierstrass {
    pub gauss: GaussMap,
    pub form: DualOneForm<CVector3>,
    pub surface: ComplexSurface,
}

/// Holomorphicity check, lift, form, integration from face 0.
pub fn weierstrass(mesh: &Mesh, z: &PlanarNet, q: &QuadDiff) -> Result<Weierstrass> {
    let form = weierstrass_form(mesh, z, q)?;
    let gauss = stereographic_lift_checked(mesh, z, tol::ADMISSIBILITY_EPS)?;
    let surface = integrate_surface(mesh, &form, 0)?;
    Ok(Weierstrass {
        gauss,
        form,
        surface,
    })
}

/// Worst residuals of the real and imaginary edge identities
/// `Re dF = s (N_j - N_i)`, `Re(i dF) = s N_i × N_j` with
/// `s = q (1+|z_i|²)(1+|z_j|²) / (2|z_j - z_i|²)`, and of the face planarity
/// `<N_i, Re(i dF(e*_ij))> = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeIdentityResiduals {
    pub real_part: f64,
    pub imag_part: f64,
    pub normal_component: f64,
}

pub fn edge_identity_residuals(
    mesh: &Mesh,
    z: &PlanarNet,
    q: &QuadDiff,
    gauss: &GaussMap,
    form: &DualOneForm<CVector3>,
) -> EdgeIdentityResiduals {
    let mut out = EdgeIdentityResiduals::default();
    for &e in mesh.interior_edges() {
        let edge = mesh.edge(e);
        let (i, j) = (edge.lo, edge.hi);
        let df = form.on_edge(e).unwrap();
        let s = q.on_edge(e) * (1.0 + z[i].norm_sqr()) * (1.0 + z[j].norm_sqr())
            / (2.0 * z.dz(i, j).norm_sqr());
        let re = df.map(|c| c.re);
        let re_i = df.map(|c| (I * c).re);
        out.real_part = out.real_part.max((re - s * gauss.dn(i, j)).norm());
        out.imag_part = out
            .imag_part
            .max((re_i - s * gauss[i].cross(&gauss[j])).norm());
        out.normal_component = out
            .normal_component
            .max(gauss[i].dot(&re_i).abs().max(gauss[j].dot(&re_i).abs()));
    }
    out
}

/// Conjugate surface `df̃(e*_ij) = N_i × df(e*_ij)` of an A-minimal `f`,
/// integrated from face 0 at the origin.
pub fn conjugate_from_aminimal(mesh: &Mesh, f: &RealSurface, gauss: &GaussMap) -> Result<RealSurface> {
    let report = verify_aminimal(mesh, f, gauss)?;
    let scale = f.scale(mesh)?;
    if let Some(((a, b), residual)) = report.worst() {
        if residual > tol::IDENTITY_REL * scale {
            return Err(Error::NotAMinimal { a, b, residual });
        }
    }
    let df = f.differential(mesh)?;
    let eta = DualOneForm::from_fn(mesh, |i, j| {
        gauss[i].cross(&df.get(mesh, i, j).unwrap())
    });
    integrate_dual_1form_with(mesh, &eta, 0, Vector3::zeros(), IntegrationOptions::default())
        .map(RealSurface)
}

/// Complex-orthogonal matrix acting on `F` for a Möbius change of the Gauss
/// map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoursatMatrix(pub Matrix3<Complex64>);

impl GoursatMatrix {
    /// `max |(A Aᵀ - I)_{kl}|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let p = self.0 * self.0.transpose() - Matrix3::identity();
        p.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn apply(&self, v: &CVector3) -> CVector3 {
        self.0 * v
    }
}

pub fn goursat_matrix(phi: &MobiusCoeffs) -> GoursatMatrix {
    let MobiusCoeffs { a, b, c, d } = *phi;
    let (a2, b2, c2, d2) = (a * a, b * b, c * c, d * d);
    let half = 0.5;
    GoursatMatrix(Matrix3::new(
        (a2 - b2 - c2 + d2) * half,
        I * half * (a2 + b2 - c2 - d2),
        -a * b + c * d,
        I * half * (-a2 + b2 - c2 + d2),
        (a2 + b2 + c2 + d2) * half,
        I * (a * b + c * d),
        -a * c + b * d,
        -I * (a * c + b * d),
        a * d + b * c,
    ))
}

#[derive(Clone, Debug)]
pub struct GoursatTransform {
    pub surface: ComplexSurface,
    pub z: PlanarNet,
    pub gauss: GaussMap,
}

/// `F_Φ = A_Φ F`, `z_Φ = Φ ∘ z` and the lift of `z_Φ`.
pub fn goursat_transform(
    f: &ComplexSurface,
    phi: &MobiusCoeffs,
    mesh: &Mesh,
    z: &PlanarNet,
) -> Result<GoursatTransform> {
    let zp = apply_mobius(z, phi)?;
    let gauss = stereographic_lift_checked(mesh, &zp, tol::ADMISSIBILITY_EPS)?;
    let a = goursat_matrix(phi);
    let surface = ComplexSurface(f.0.iter().map(|v| a.apply(v)).collect());
    Ok(GoursatTransform {
        surface,
        z: zp,
        gauss,
    })
}
