use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dmsurf::curv::{
    area_directional_fd, family_edge_residuals, sigma_from_gauss, surface_mean_curvature,
    theta_curvatures, vector_area_family_check, verify_aminimal, verify_cminimal, RealSurface,
};
use dmsurf::holo::{generate_net, p_labeling, pnet_residuals, pnet_scale, verify_qhd, MobiusCoeffs, NetKind, PlanarNet, QuadDiff};
use dmsurf::io::{read_obj, write_obj, NetDocument, ReportDocument, SurfaceDocument};
use dmsurf::stress::{force_torque_balance, stress_from_aminimal};
use dmsurf::weier::{
    associated_surface, conjugate_from_aminimal, goursat_transform, stereographic_lift_checked,
    weierstrass, ComplexSurface,
};
use dmsurf::{tol, Mesh, Vector3};

#[derive(Parser)]
#[command(name = "dmsurf", version, about = "Discrete minimal surfaces from holomorphic quadratic differentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in planar net with its P-labeling as a net document.
    Gen(GenArgs),
    /// Run one family of checks and report residuals.
    Verify(VerifyArgs),
    /// Integrate the Weierstrass form and export surfaces as OBJ.
    Build(BuildArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Grid,
    Exp,
    Circles,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Radial rate of the exponential net.
    #[arg(long, default_value_t = 0.3)]
    a: f64,
    /// Angular rate of the exponential net.
    #[arg(long, default_value_t = 0.4)]
    b: f64,
    /// Circle radius of the orthogonal circle pattern.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Output path; standard output when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Check {
    Qhd,
    Pnet,
    Aminimal,
    Cminimal,
    Family,
    Stress,
    AreaGrad,
}

#[derive(Args)]
struct VerifyArgs {
    what: Check,
    /// Planar net document with an edge table.
    net: PathBuf,
    /// Surface to check, as written by `build`. Built from the net when omitted.
    #[arg(long)]
    surface: Option<PathBuf>,
    /// Complex surface sidecar written by `build`, for family and area-grad.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Family members to sweep, e.g. `0,pi/4,pi/2`. Default: 16 uniform samples.
    #[arg(long, value_delimiter = ',')]
    theta: Vec<String>,
    /// Write the machine-readable report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Random perturbations per member for area-grad.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Args)]
struct Tolerances {
    #[arg(long, default_value_t = tol::QHD_REL)]
    tol_qhd: f64,
    #[arg(long, default_value_t = tol::QHD_REL)]
    tol_pnet: f64,
    #[arg(long, default_value_t = tol::IDENTITY_REL)]
    tol_identity: f64,
    #[arg(long, default_value_t = tol::PLANARITY_REL)]
    tol_planarity: f64,
    #[arg(long, default_value_t = tol::ADMISSIBILITY_EPS)]
    tol_eps: f64,
    /// Absolute bound on equilibrium, force and torque sums.
    #[arg(long, default_value_t = tol::IDENTITY_REL)]
    tol_stress: f64,
    #[arg(long, default_value_t = tol::FD_REL)]
    tol_fd: f64,
    #[arg(long, default_value_t = tol::FD_STEP)]
    fd_step: f64,
}

#[derive(Args)]
struct BuildArgs {
    /// Planar net document with an edge table.
    net: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Family members to export, e.g. `0,pi/2`. Default: `0,pi/2`.
    #[arg(long, value_delimiter = ',')]
    theta: Vec<String>,
    /// Also export the conjugate of the A-minimal member.
    #[arg(long)]
    conjugate: bool,
    /// Mobius coefficients `a,b,c,d` applied to the Gauss map first, e.g.
    /// `1,0.5+0.2i,0,1`.
    #[arg(long)]
    goursat: Option<String>,
    /// Fan-triangulate polygons from their lowest-index vertex.
    #[arg(long)]
    triangulate_fan: bool,
}

/// Verdict of a command that ran to completion.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a).map(|()| Outcome::Pass),
        Command::Verify(a) => cmd_verify(&a),
        Command::Build(a) => cmd_build(&a).map(|()| Outcome::Pass),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let kind = match a.kind {
        GenKind::Grid => NetKind::Grid { m: a.m, n: a.n },
        GenKind::Exp => NetKind::Exp { m: a.m, n: a.n, a: a.a, b: a.b },
        GenKind::Circles => NetKind::CirclePattern { m: a.m, n: a.n, radius: a.radius },
    };
    let net = generate_net(kind)?;
    let mu = p_labeling(&net.mesh)?.to_quad_diff();
    let mut doc = NetDocument::planar(&net.mesh, &net.z, Some(&mu));
    let tag = match a.kind {
        GenKind::Grid => "grid",
        GenKind::Exp => "exp",
        GenKind::Circles => "circles",
    };
    doc.meta.insert("kind".into(), tag.into());
    write_or_print(a.out.as_deref(), &doc.to_json())
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Net {
    mesh: Mesh,
    z: PlanarNet,
    q: QuadDiff,
}

fn load_net(path: &Path) -> Result<Net> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = NetDocument::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    if !doc.is_planar() {
        bail!("{} is not a planar net", path.display());
    }
    let mesh = doc.mesh()?;
    let z = doc.planar_net()?;
    let q = doc
        .quad_diff(&mesh)?
        .ok_or_else(|| anyhow!("{} has no edge table", path.display()))?;
    Ok(Net { mesh, z, q })
}

fn load_surface(path: &Path, mesh: &Mesh) -> Result<RealSurface> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (positions, _) = read_obj(&text).with_context(|| format!("parsing {}", path.display()))?;
    if positions.len() != mesh.n_faces() {
        bail!(
            "{} has {} vertices, the net has {} faces",
            path.display(),
            positions.len(),
            mesh.n_faces()
        );
    }
    Ok(RealSurface(positions))
}

fn load_sidecar(path: &Path, mesh: &Mesh) -> Result<ComplexSurface> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f = SurfaceDocument::from_json(&text)?.surface();
    if f.len() != mesh.n_faces() {
        bail!("{} has {} faces, the net has {}", path.display(), f.len(), mesh.n_faces());
    }
    Ok(f)
}

/// A real number, `pi`, or a multiple or fraction of it such as `3pi/4`.
fn parse_theta(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.trim().parse::<f64>().map_err(|_| anyhow!("bad angle {s:?}"))?),
        None => (t, 1.0),
    };
    let coef = num
        .trim()
        .strip_suffix("pi")
        .ok_or_else(|| anyhow!("bad angle {s:?}"))?
        .trim_end_matches('*');
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| anyhow!("bad angle {s:?}"))?,
    };
    Ok(c * PI / den)
}

fn thetas(list: &[String]) -> Result<Vec<f64>> {
    if list.is_empty() {
        return Ok(tol::theta_samples(tol::THETA_SAMPLES));
    }
    list.iter().map(|s| parse_theta(s)).collect()
}

fn edge_name((a, b): (usize, usize)) -> Option<String> {
    Some(format!("edge {a}:{b}"))
}

fn vertex_name(v: usize) -> Option<String> {
    Some(format!("vertex {v}"))
}

fn worst<T: Copy>(rows: impl Iterator<Item = (T, f64)>) -> Option<(T, f64)> {
    rows.fold(None, |acc: Option<(T, f64)>, (k, r)| match acc {
        Some((_, m)) if m >= r => acc,
        _ => Some((k, r)),
    })
}

fn record<T>(rep: &mut ReportDocument, name: &str, w: Option<(T, f64)>, name_of: fn(T) -> Option<String>, tolerance: f64) {
    match w {
        Some((k, r)) => rep.record(name, r, name_of(k), tolerance),
        None => rep.record(name, 0.0, None, tolerance),
    };
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let net = load_net(&a.net)?;
    let t = &a.tol;
    let mut rep = ReportDocument::new();
    let needs_gauss = !matches!(a.what, Check::Qhd | Check::Pnet);
    let gauss = if needs_gauss {
        Some(stereographic_lift_checked(&net.mesh, &net.z, t.tol_eps)?)
    } else {
        None
    };
    let complex = |rep_sidecar: Option<&PathBuf>| -> Result<ComplexSurface> {
        match rep_sidecar {
            Some(p) => load_sidecar(p, &net.mesh),
            None => Ok(weierstrass(&net.mesh, &net.z, &net.q)?.surface),
        }
    };
    let member = |theta: f64| -> Result<RealSurface> {
        match &a.surface {
            Some(p) => load_surface(p, &net.mesh),
            None => Ok(associated_surface(&complex(a.sidecar.as_ref())?, theta)),
        }
    };

    match a.what {
        Check::Qhd => {
            let r = verify_qhd(&net.mesh, &net.z, &net.q)?;
            let sum_q = worst(r.vertices.iter().copied().zip(r.sum_q.iter().map(|x| x.abs())));
            let sum_q_dz = worst(r.vertices.iter().copied().zip(r.sum_q_dz.iter().map(|x| x.norm())));
            record(&mut rep, "qhd.sum_q", sum_q, vertex_name, t.tol_qhd * r.scale_q);
            record(&mut rep, "qhd.sum_q_over_dz", sum_q_dz, vertex_name, t.tol_qhd * r.scale_q_dz);
        }
        Check::Pnet => {
            let res = pnet_residuals(&net.mesh, &net.z)?;
            let scale = pnet_scale(&net.mesh, &net.z);
            record(&mut rep, "pnet.star", worst(res.iter().map(|(v, r)| (*v, r.norm()))), vertex_name, t.tol_pnet * scale);
        }
        Check::Aminimal => {
            let f = member(0.0)?;
            let r = verify_aminimal(&net.mesh, &f, gauss.as_ref().unwrap())?;
            record(&mut rep, "aminimal.cross", r.worst_cross(), edge_name, t.tol_identity * r.scale);
            record(&mut rep, "aminimal.normal", r.worst_normal(), edge_name, t.tol_identity * r.scale);
        }
        Check::Cminimal => {
            let f = member(PI / 2.0)?;
            let r = verify_cminimal(&net.mesh, &f, gauss.as_ref().unwrap())?;
            record(&mut rep, "cminimal.planarity", r.planarity, vertex_name, t.tol_planarity * r.scale);
            record(&mut rep, "cminimal.scalar_mean_curvature", r.curvature, vertex_name, t.tol_identity * r.scale);
            // residual eps - min |N_i + N_j| must stay <= 0
            let margin = r.antipodal.map(|(e, m)| (e, t.tol_eps - m));
            record(&mut rep, "cminimal.admissibility", margin, edge_name, 0.0);
        }
        Check::Family => {
            let n = gauss.as_ref().unwrap();
            let f = complex(a.sidecar.as_ref())?;
            let samples = thetas(&a.theta)?;
            let (mut h, mut dot, mut cross, mut inner) = (None, None, None, None);
            for &th in &samples {
                let ft = associated_surface(&f, th);
                let scale = ft.scale(&net.mesh)?.max(f64::MIN_POSITIVE);
                let sums = theta_curvatures(&net.mesh, &ft, n)?;
                h = worst(h.into_iter().chain(sums.iter().map(|s| (s.vertex, s.h.abs() / scale))));
                dot = worst(dot.into_iter().chain(sums.iter().map(|s| (s.vertex, s.dot_sum.abs() / scale))));
                let (c, d) = family_edge_residuals(&net.mesh, &ft, n, &net.q, th)?;
                cross = worst(cross.into_iter().chain([(th, c / scale)]));
                inner = worst(inner.into_iter().chain([(th, d / scale)]));
            }
            let theta_name = |th: f64| Some(format!("theta {th}"));
            record(&mut rep, "family.mean_curvature_rel", h, vertex_name, t.tol_identity);
            record(&mut rep, "family.dot_sum_rel", dot, vertex_name, t.tol_identity);
            record(&mut rep, "family.edge_cross_rel", cross, theta_name, t.tol_identity);
            record(&mut rep, "family.edge_dot_rel", inner, theta_name, t.tol_identity);
            let va = vector_area_family_check(&net.mesh, &f, n, &samples)?;
            record(&mut rep, "family.vector_area", va.deviation, vertex_name, t.tol_identity * va.scale);
            record(&mut rep, "family.vector_area_normal_sine", va.sine, vertex_name, t.tol_identity);
        }
        Check::Stress => {
            let n = gauss.as_ref().unwrap();
            let f = member(0.0)?;
            let k = stress_from_aminimal(&net.mesh, &f, n)?;
            let rows = force_torque_balance(&net.mesh, n, &k)?;
            record(&mut rep, "stress.equilibrium", worst(rows.iter().map(|b| (b.vertex, b.equilibrium.norm()))), vertex_name, t.tol_stress);
            record(&mut rep, "stress.force", worst(rows.iter().map(|b| (b.vertex, b.force.norm()))), vertex_name, t.tol_stress);
            record(&mut rep, "stress.torque", worst(rows.iter().map(|b| (b.vertex, b.torque.norm()))), vertex_name, t.tol_stress);
        }
        Check::AreaGrad => {
            let n = gauss.as_ref().unwrap();
            let members: Vec<(f64, RealSurface)> = match &a.surface {
                Some(p) => vec![(f64::NAN, load_surface(p, &net.mesh)?)],
                None => {
                    let f = complex(a.sidecar.as_ref())?;
                    thetas(&a.theta)?.into_iter().map(|th| (th, associated_surface(&f, th))).collect()
                }
            };
            let dual = net.mesh.dual()?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let (mut hv, mut fd) = (None, None);
            for (th, f) in &members {
                let scale = f.scale(&net.mesh)?.max(f64::MIN_POSITIVE);
                let pos = f.on_dual(&dual);
                let sigma = sigma_from_gauss(&dual, &pos, n)?;
                let h = surface_mean_curvature(&dual, f, n)?;
                hv = worst(hv.into_iter().chain(h.iter().map(|(face, h)| (*face, h.norm() / scale))));
                for _ in 0..a.samples {
                    let mut dir = vec![Vector3::zeros(); pos.len()];
                    for &v in dual.mesh.interior_vertices() {
                        dir[v] = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
                    }
                    let norm = dir.iter().map(|d| d.norm_squared()).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        continue;
                    }
                    let d = area_directional_fd(&dual.mesh, &pos, &sigma, &dir, t.fd_step)?;
                    fd = worst(fd.into_iter().chain([(*th, d.abs() / (norm * scale))]));
                }
            }
            let face_name = |f: usize| Some(format!("face {f}"));
            let theta_name = |th: f64| if th.is_nan() { None } else { Some(format!("theta {th}")) };
            record(&mut rep, "area_grad.mean_curvature_vector_rel", hv, face_name, t.tol_identity);
            record(&mut rep, "area_grad.directional_derivative_rel", fd, theta_name, t.tol_fd);
        }
    }

    print!("{}", rep.summary());
    if let Some(p) = &a.report {
        fs::write(p, rep.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(if rep.passed() { Outcome::Pass } else { Outcome::Fail })
}

fn dual_faces(mesh: &Mesh) -> Vec<Vec<usize>> {
    mesh.interior_vertices()
        .iter()
        .map(|&v| mesh.star(v).unwrap().faces.clone())
        .collect()
}

fn parse_complex(s: &str) -> Result<Complex64> {
    s.trim().parse::<Complex64>().map_err(|_| anyhow!("bad coefficient {s:?}"))
}

fn cmd_build(a: &BuildArgs) -> Result<()> {
    let net = load_net(&a.net)?;
    let w = weierstrass(&net.mesh, &net.z, &net.q)?;
    let (surface, z, gauss, phi) = match &a.goursat {
        Some(c) => {
            let c: Vec<Complex64> = c.split(',').map(parse_complex).collect::<Result<_>>()?;
            if c.len() != 4 {
                bail!("--goursat needs four coefficients, got {}", c.len());
            }
            let phi = MobiusCoeffs::new(c[0], c[1], c[2], c[3])?;
            let g = goursat_transform(&w.surface, &phi, &net.mesh, &net.z)?;
            (g.surface, g.z, g.gauss, Some(c))
        }
        None => (w.surface, net.z.clone(), w.gauss, None),
    };

    let tokens: Vec<String> = if a.theta.is_empty() && !a.conjugate {
        vec!["0".into(), "pi/2".into()]
    } else {
        a.theta.clone()
    };
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let faces = dual_faces(&net.mesh);
    let mut written = Vec::new();
    let mut emit = |name: String, f: &RealSurface| -> Result<()> {
        let path = a.out_dir.join(name);
        fs::write(&path, write_obj(&f.0, &faces, a.triangulate_fan))
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(())
    };
    for tok in &tokens {
        let th = parse_theta(tok)?;
        let file = format!("theta_{}.obj", tok.trim().replace(['/', '*'], "_"));
        emit(file, &associated_surface(&surface, th))?;
    }
    if a.conjugate {
        let conj = conjugate_from_aminimal(&net.mesh, &surface.real(), &gauss)?;
        emit("conjugate.obj".into(), &conj)?;
    }

    let mut side = SurfaceDocument::new(&surface, 0);
    side.meta.insert("theta".into(), tokens.clone().into());
    if let Some(c) = &phi {
        let coeffs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        side.meta.insert("goursat".into(), coeffs.into());
    }
    let side_path = a.out_dir.join("surface.json");
    fs::write(&side_path, side.to_json()).with_context(|| format!("writing {}", side_path.display()))?;
    written.push(side_path);

    let mut doc = NetDocument::planar(&net.mesh, &z, Some(&net.q));
    if phi.is_some() {
        doc.meta.insert("kind".into(), "goursat".into());
    }
    let net_path = a.out_dir.join("net.json");
    fs::write(&net_path, doc.to_json()).with_context(|| format!("writing {}", net_path.display()))?;
    written.push(net_path);

    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}
