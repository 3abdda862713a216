//! Checkers for the global invertibility conditions: the volume inequality
//! (CNC), ball-wise separation (INV), degree-at-most-one globally (DEG1) and
//! per covering level (DEG1_loc), approximate boundary invertibility (AIB),
//! almost-everywhere injectivity, the sign theorem for two-component
//! complements, the cross-condition equivalence ledger, and the
//! change-of-variables identity.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::degree::{degree_field, DegreeReport, Sigma};
use crate::error::{CoreError, Result};
use crate::linalg::{add, axpy, dist, norm, scale, sub, Pt};
use crate::mesh::{InnerCovering, SimplicialMesh, Submesh};
use crate::plmap::PLMap;
use crate::topology::topological_image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::Fails => write!(f, "fails"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Cnc,
    Inv,
    Deg1,
    Deg1Loc,
    Aib,
    InjectiveAe,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::Cnc => write!(f, "cnc"),
            Condition::Inv => write!(f, "inv"),
            Condition::Deg1 => write!(f, "deg1"),
            Condition::Deg1Loc => write!(f, "deg1loc"),
            Condition::Aib => write!(f, "aib"),
            Condition::InjectiveAe => write!(f, "injective_ae"),
        }
    }
}

/// Outcome of a condition checker, with enough sampling detail to replay.
#[derive(Debug, Clone)]
pub struct ConditionVerdict {
    pub condition: Condition,
    pub verdict: Verdict,
    pub evidence: String,
    pub witness: Option<Pt>,
    pub resolution: String,
}

// ---------------------------------------------------------------------------
// image-simplex point location with spatial binning

/// Uniform bins over the image bounding box holding image-simplex indices,
/// for fast multiplicity queries.
struct ImageBins {
    dim: usize,
    lo: Pt,
    h: [f64; 3],
    nb: [usize; 3],
    cells: Vec<Vec<u32>>,
}

impl ImageBins {
    fn build(map: &PLMap, a: &Submesh) -> Self {
        let dim = map.dim();
        let (lo, hi) = map.image_bbox();
        let per_axis = ((a.simplices.len() as f64).powf(1.0 / dim as f64).ceil() as usize)
            .clamp(4, 128);
        let mut h = [1.0; 3];
        let mut nb = [1usize; 3];
        for k in 0..dim {
            nb[k] = per_axis;
            h[k] = ((hi[k] - lo[k]) / per_axis as f64).max(1e-300);
        }
        let mut cells = vec![Vec::new(); nb[0] * nb[1] * nb[2]];
        for &s in &a.simplices {
            let imgs = map.image_simplex(s);
            let mut clo = [0usize; 3];
            let mut chi = [0usize; 3];
            for k in 0..dim {
                let (mut a0, mut a1) = (f64::INFINITY, f64::NEG_INFINITY);
                for p in &imgs {
                    a0 = a0.min(p[k]);
                    a1 = a1.max(p[k]);
                }
                clo[k] = (((a0 - lo[k]) / h[k]).floor().max(0.0) as usize).min(nb[k] - 1);
                chi[k] = (((a1 - lo[k]) / h[k]).floor().max(0.0) as usize).min(nb[k] - 1);
            }
            for iz in clo[2]..=chi[2] {
                for iy in clo[1]..=chi[1] {
                    for ix in clo[0]..=chi[0] {
                        cells[(iz * nb[1] + iy) * nb[0] + ix].push(s as u32);
                    }
                }
            }
        }
        ImageBins {
            dim,
            lo,
            h,
            nb,
            cells,
        }
    }

    /// Number of image simplices containing `z` (with nonzero determinant).
    fn multiplicity(&self, map: &PLMap, z: Pt) -> usize {
        let mut c = [0usize; 3];
        for k in 0..self.dim {
            let i = ((z[k] - self.lo[k]) / self.h[k]).floor();
            if i < 0.0 || i >= self.nb[k] as f64 {
                return 0;
            }
            c[k] = i as usize;
        }
        let cell = &self.cells[(c[2] * self.nb[1] + c[1]) * self.nb[0] + c[0]];
        let mut count = 0;
        for &s in cell {
            if image_simplex_contains(map, s as usize, z) {
                count += 1;
            }
        }
        count
    }
}

fn image_simplex_contains(map: &PLMap, s: usize, z: Pt) -> bool {
    let dim = map.dim();
    let imgs = map.image_simplex(s);
    let cols: Vec<Pt> = (1..=dim).map(|i| sub(imgs[i], imgs[0])).collect();
    let m = crate::linalg::from_columns(&cols, dim);
    match crate::linalg::solve(&m, sub(z, imgs[0]), dim, 0.0) {
        Some(b) => {
            let b0 = 1.0 - (0..dim).map(|i| b[i]).sum::<f64>();
            b0 >= 0.0 && (0..dim).all(|i| b[i] >= 0.0)
        }
        None => false,
    }
}

// ---------------------------------------------------------------------------
// CNC

/// Numeric record behind a CNC verdict.
#[derive(Debug, Clone)]
pub struct CncDetail {
    /// Exact integral of the determinant.
    pub lhs: f64,
    /// Exact image measure (2D only: polygon union area).
    pub rhs_exact: Option<f64>,
    /// Monte-Carlo image measure.
    pub rhs_mc: f64,
    /// One Monte-Carlo standard error, in measure units.
    pub mc_se: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Volume inequality: integral of det grad y vs the measure of the image.
/// The left side is exact; the right side is the exact 2D polygon-union area
/// when d = 2, and seeded Monte-Carlo with a 3-standard-error band otherwise.
pub fn check_cnc(map: &PLMap, samples: usize, seed: u64) -> (ConditionVerdict, CncDetail) {
    let mesh = &map.mesh;
    let a = mesh.full_submesh();
    let lhs: f64 = a
        .simplices
        .iter()
        .map(|&s| map.per_simplex[s].det * mesh.simplex_volume(s))
        .sum();

    // Monte-Carlo coverage of the union of image simplices
    let bins = ImageBins::build(map, &a);
    let (lo, hi) = map.image_bbox();
    let dim = map.dim();
    let mut vbox = 1.0;
    for k in 0..dim {
        vbox *= (hi[k] - lo[k]).max(1e-300);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covered = 0usize;
    for _ in 0..samples {
        let mut z = [0.0; 3];
        for zk in z.iter_mut().take(dim) {
            *zk = rng.gen_range(0.0..1.0);
        }
        for k in 0..dim {
            z[k] = lo[k] + z[k] * (hi[k] - lo[k]);
        }
        if bins.multiplicity(map, z) > 0 {
            covered += 1;
        }
    }
    let p = covered as f64 / samples as f64;
    let rhs_mc = p * vbox;
    let mc_se = (p * (1.0 - p) / samples as f64).sqrt() * vbox;

    let rhs_exact = if dim == 2 {
        let tris: Vec<[Pt; 3]> = a
            .simplices
            .iter()
            .map(|&s| {
                let i = map.image_simplex(s);
                [i[0], i[1], i[2]]
            })
            .collect();
        Some(crate::geometry::triangle_union_area(&tris))
    } else {
        None
    };

    let (verdict, evidence, witness) = match rhs_exact {
        Some(rhs) => {
            let tol = 1e-9 * rhs.abs().max(lhs.abs());
            if lhs <= rhs + tol {
                (
                    Verdict::Holds,
                    format!("exact: integral {lhs:.12e} <= image area {rhs:.12e}"),
                    None,
                )
            } else {
                (
                    Verdict::Fails,
                    format!(
                        "exact: integral {lhs:.12e} exceeds image area {rhs:.12e} by {:.6e}",
                        lhs - rhs
                    ),
                    None,
                )
            }
        }
        None => {
            if lhs <= rhs_mc - 3.0 * mc_se {
                (
                    Verdict::Holds,
                    format!("mc: integral {lhs:.12e} below {rhs_mc:.12e} - 3se"),
                    None,
                )
            } else if lhs >= rhs_mc + 3.0 * mc_se {
                (
                    Verdict::Fails,
                    format!("mc: integral {lhs:.12e} above {rhs_mc:.12e} + 3se"),
                    None,
                )
            } else {
                (
                    Verdict::Inconclusive,
                    format!("mc: |{lhs:.12e} - {rhs_mc:.12e}| within 3se = {:.3e}", 3.0 * mc_se),
                    None,
                )
            }
        }
    };
    (
        ConditionVerdict {
            condition: Condition::Cnc,
            verdict,
            evidence,
            witness,
            resolution: format!("samples={samples} seed={seed}"),
        },
        CncDetail {
            lhs,
            rhs_exact,
            rhs_mc,
            mc_se,
            samples,
            seed,
        },
    )
}

// ---------------------------------------------------------------------------
// injectivity almost everywhere

#[derive(Debug, Clone)]
pub struct InjectivityDetail {
    pub samples_inside: usize,
    pub samples_multi: usize,
    /// Monte-Carlo estimate of the integral of |det| from multiplicities.
    pub mc_area_formula: f64,
    /// Exact integral of |det|.
    pub exact_det_integral: f64,
}

/// Almost-everywhere injectivity by multiplicity sampling over the image
/// bounding box, cross-checked against the area formula.
pub fn check_injective_ae(
    map: &PLMap,
    samples: usize,
    seed: u64,
) -> (ConditionVerdict, InjectivityDetail) {
    let mesh = &map.mesh;
    let a = mesh.full_submesh();
    let bins = ImageBins::build(map, &a);
    let (lo, hi) = map.image_bbox();
    let dim = map.dim();
    let mut vbox = 1.0;
    for k in 0..dim {
        vbox *= (hi[k] - lo[k]).max(1e-300);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = 0usize;
    let mut multi = 0usize;
    let mut count_sum = 0usize;
    for _ in 0..samples {
        let mut z = [0.0; 3];
        for zk in z.iter_mut().take(dim) {
            *zk = rng.gen_range(0.0..1.0);
        }
        for k in 0..dim {
            z[k] = lo[k] + z[k] * (hi[k] - lo[k]);
        }
        let m = bins.multiplicity(map, z);
        count_sum += m;
        if m > 0 {
            inside += 1;
        }
        if m > 1 {
            multi += 1;
        }
    }
    let mc_area_formula = count_sum as f64 / samples as f64 * vbox;
    let exact_det_integral: f64 = a
        .simplices
        .iter()
        .map(|&s| map.per_simplex[s].det.abs() * mesh.simplex_volume(s))
        .sum();

    let verdict = if inside == 0 {
        Verdict::Inconclusive
    } else {
        let p = multi as f64 / inside as f64;
        let se = (p * (1.0 - p) / inside as f64).sqrt();
        if p <= (3.0 * se).max(1e-5) {
            Verdict::Holds
        } else if p >= 0.01 {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        }
    };
    (
        ConditionVerdict {
            condition: Condition::InjectiveAe,
            verdict,
            evidence: format!(
                "multiplicity>1 on {multi}/{inside} image samples; area formula mc {mc_area_formula:.6e} vs exact {exact_det_integral:.6e}"
            ),
            witness: None,
            resolution: format!("samples={samples} seed={seed}"),
        },
        InjectivityDetail {
            samples_inside: inside,
            samples_multi: multi,
            mc_area_formula,
            exact_det_integral,
        },
    )
}

// ---------------------------------------------------------------------------
// DEG1 / DEG1_loc

/// Degree at most one on the whole complement of the image boundary.
pub fn check_deg1(map: &PLMap, resolution: usize) -> Result<(ConditionVerdict, DegreeReport)> {
    let a = map.mesh.full_submesh();
    let report = degree_field(map, &a, resolution)?;
    let mut verdict = Verdict::Holds;
    let mut evidence = "all region degrees <= 1".to_string();
    let mut witness = None;
    for (r, &d) in report.degrees.iter().enumerate() {
        if d > 1 {
            verdict = Verdict::Fails;
            witness = report.regions.representatives[r].first().copied();
            evidence = format!("region {r} carries degree {d}");
            break;
        }
    }
    Ok((
        ConditionVerdict {
            condition: Condition::Deg1,
            verdict,
            evidence,
            witness,
            resolution: format!("grid={resolution}"),
        },
        report,
    ))
}

/// Degree at most one on every level of an inner covering.
pub fn check_deg1_loc(
    map: &PLMap,
    covering: &InnerCovering,
    resolution: usize,
) -> Result<ConditionVerdict> {
    for (m, level) in covering.levels.iter().enumerate() {
        let report = degree_field(map, level, resolution)?;
        for (r, &d) in report.degrees.iter().enumerate() {
            if d > 1 {
                return Ok(ConditionVerdict {
                    condition: Condition::Deg1Loc,
                    verdict: Verdict::Fails,
                    evidence: format!("level {m}, region {r} carries degree {d}"),
                    witness: report.regions.representatives[r].first().copied(),
                    resolution: format!("grid={resolution} levels={}", covering.levels.len()),
                });
            }
        }
    }
    Ok(ConditionVerdict {
        condition: Condition::Deg1Loc,
        verdict: Verdict::Holds,
        evidence: "all levels: all region degrees <= 1".into(),
        witness: None,
        resolution: format!("grid={resolution} levels={}", covering.levels.len()),
    })
}

// ---------------------------------------------------------------------------
// INV

/// Ball-wise separation: inside points map into the ball's topological image
/// (or onto its image boundary), outside points map out of it.
pub fn check_inv(
    map: &PLMap,
    centers: usize,
    radii_per_center: usize,
    seed: u64,
) -> Result<ConditionVerdict> {
    let mesh = &map.mesh;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior: Vec<usize> = (0..mesh.vertices.len())
        .filter(|&v| mesh.dist_to_boundary(mesh.vertices[v]) > mesh.tau_geom())
        .collect();
    if interior.is_empty() {
        return Err(CoreError::BallTooSmall { radius: 0.0 });
    }
    let resolution = 128;
    let mut balls_used = 0usize;
    for _ in 0..centers {
        let center_v = interior[rng.gen_range(0..interior.len())];
        let center = mesh.vertices[center_v];
        let reach = mesh.dist_to_boundary(center);
        for j in 0..radii_per_center {
            // dyadic radii from (almost) the full reach down, nudged off the
            // lattice of vertex distances
            let r = reach * (1.000_001_3 / (1u64 << j) as f64).min(0.999_999);
            // membership by centroid so anisotropic meshes still fill the
            // ball; the fringe below absorbs the resulting overhang
            let ball: Vec<usize> = (0..mesh.simplices.len())
                .filter(|&s| dist(mesh.simplex_centroid(s), center) <= r)
                .collect();
            if ball.is_empty() {
                continue;
            }
            let fringe = ball
                .iter()
                .map(|&s| {
                    let pts = mesh.simplex_points(s);
                    let mut m: f64 = 0.0;
                    for i in 0..pts.len() {
                        for j in (i + 1)..pts.len() {
                            m = m.max(dist(pts[i], pts[j]));
                        }
                    }
                    m
                })
                .fold(0.0f64, f64::max);
            let sub = Submesh::new(mesh, ball);
            let t = match topological_image(map, &sub, resolution) {
                Ok(t) => t,
                Err(_) => continue,
            };
            balls_used += 1;
            let mut in_sub = vec![false; mesh.vertices.len()];
            for &v in &sub.vertex_set(mesh) {
                in_sub[v] = true;
            }
            let htol = t.report.regions.h * 1.5;
            for v in 0..mesh.vertices.len() {
                let dv = dist(mesh.vertices[v], center);
                let inside = dv <= r && in_sub[v];
                let outside = dv > r + fringe && !in_sub[v];
                if !inside && !outside {
                    continue;
                }
                let y = map.images[v];
                let near_bdry = map.dist_to_image_boundary(&sub, y) <= htol;
                if near_bdry {
                    continue;
                }
                let in_im_t = t.contains(y);
                if inside && !in_im_t {
                    return Ok(ConditionVerdict {
                        condition: Condition::Inv,
                        verdict: Verdict::Fails,
                        evidence: format!(
                            "vertex {v} inside ball(center {center_v}, r {r:.6e}) maps outside the ball's topological image"
                        ),
                        witness: Some(y),
                        resolution: format!(
                            "centers={centers} radii={radii_per_center} seed={seed} grid={resolution}"
                        ),
                    });
                }
                if outside && in_im_t {
                    return Ok(ConditionVerdict {
                        condition: Condition::Inv,
                        verdict: Verdict::Fails,
                        evidence: format!(
                            "vertex {v} outside ball(center {center_v}, r {r:.6e}) maps into the ball's topological image"
                        ),
                        witness: Some(y),
                        resolution: format!(
                            "centers={centers} radii={radii_per_center} seed={seed} grid={resolution}"
                        ),
                    });
                }
            }
        }
    }
    if balls_used == 0 {
        return Ok(ConditionVerdict {
            condition: Condition::Inv,
            verdict: Verdict::Inconclusive,
            evidence: "no sampled ball produced a usable submesh".into(),
            witness: None,
            resolution: format!("centers={centers} radii={radii_per_center} seed={seed}"),
        });
    }
    Ok(ConditionVerdict {
        condition: Condition::Inv,
        verdict: Verdict::Holds,
        evidence: format!("no separation violation over {balls_used} sampled balls"),
        witness: None,
        resolution: format!(
            "centers={centers} radii={radii_per_center} seed={seed} grid={resolution}"
        ),
    })
}

// ---------------------------------------------------------------------------
// AIB

/// Certificate that the boundary trace is a uniform limit of injective maps.
#[derive(Debug, Clone)]
pub struct AIBCertificate {
    /// Boundary vertex indices the approximants are defined on.
    pub boundary_vertices: Vec<usize>,
    /// One image per boundary vertex, per approximant.
    pub approximants: Vec<Vec<Pt>>,
    /// Uniform distance of each approximant to the boundary trace.
    pub sup_distances: Vec<f64>,
}

/// First self-intersecting pair of boundary facet images, or None when the
/// boundary map is injective. Facets sharing a vertex may meet only there;
/// this is tested on the halves away from the shared vertex in 2D and on
/// centroid-shrunk copies in 3D.
pub fn boundary_self_intersection(
    mesh: &SimplicialMesh,
    images: &[Pt],
) -> Option<(usize, usize)> {
    let facets = &mesh.boundary_facets;
    let dim = mesh.dim;
    let mut diag: f64 = 0.0;
    {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for f in facets {
            for &v in &f.verts[..dim] {
                for k in 0..dim {
                    lo[k] = lo[k].min(images[v][k]);
                    hi[k] = hi[k].max(images[v][k]);
                }
            }
        }
        for k in 0..dim {
            diag += (hi[k] - lo[k]).powi(2);
        }
        diag = diag.sqrt();
    }
    let tol = 1e-9 * diag.max(1e-300);
    for i in 0..facets.len() {
        for j in (i + 1)..facets.len() {
            let fi = &facets[i].verts[..dim];
            let fj = &facets[j].verts[..dim];
            let shared: Vec<usize> = fi.iter().filter(|v| fj.contains(v)).copied().collect();
            let hit = if dim == 2 {
                let (a, b) = (images[fi[0]], images[fi[1]]);
                let (c, d) = (images[fj[0]], images[fj[1]]);
                if shared.is_empty() {
                    crate::geometry::segment_segment_dist(a, b, c, d) <= tol
                } else {
                    // halves away from the shared vertex
                    let half_away = |p: Pt, q: Pt, share: Pt| -> (Pt, Pt) {
                        let m = scale(add(p, q), 0.5);
                        if dist(p, share) < dist(q, share) {
                            (m, q)
                        } else {
                            (m, p)
                        }
                    };
                    let sp = images[shared[0]];
                    let (a1, b1) = half_away(a, b, sp);
                    let (c1, d1) = half_away(c, d, sp);
                    crate::geometry::segment_segment_dist(a1, b1, c1, d1) <= tol
                }
            } else {
                let t1 = [images[fi[0]], images[fi[1]], images[fi[2]]];
                let t2 = [images[fj[0]], images[fj[1]], images[fj[2]]];
                if shared.is_empty() {
                    crate::geometry::triangles_intersect_3d(t1, t2)
                } else {
                    let shrink = |t: [Pt; 3]| -> [Pt; 3] {
                        let c = crate::geometry::centroid(&t);
                        [
                            axpy(c, 0.99, sub(t[0], c)),
                            axpy(c, 0.99, sub(t[1], c)),
                            axpy(c, 0.99, sub(t[2], c)),
                        ]
                    };
                    crate::geometry::triangles_intersect_3d(shrink(t1), shrink(t2))
                }
            };
            if hit {
                return Some((i, j));
            }
        }
    }
    None
}

/// Approximate invertibility on the boundary: exact boundary injectivity, or
/// a push-off search along averaged outward image normals with exact
/// injectivity re-testing (2D).
pub fn check_aib(map: &PLMap, max_iters: usize) -> (ConditionVerdict, Option<AIBCertificate>) {
    let mesh = &map.mesh;
    let dim = mesh.dim;
    let boundary_vertices: Vec<usize> = {
        let mut seen = vec![false; mesh.vertices.len()];
        for f in &mesh.boundary_facets {
            for &v in &f.verts[..dim] {
                seen[v] = true;
            }
        }
        (0..mesh.vertices.len()).filter(|&v| seen[v]).collect()
    };

    // Step 1: the boundary trace itself
    if boundary_self_intersection(mesh, &map.images).is_none() {
        let phi: Vec<Pt> = boundary_vertices.iter().map(|&v| map.images[v]).collect();
        return (
            ConditionVerdict {
                condition: Condition::Aib,
                verdict: Verdict::Holds,
                evidence: "boundary trace is injective; it is its own approximant".into(),
                witness: None,
                resolution: "exact pairwise facet test".into(),
            },
            Some(AIBCertificate {
                boundary_vertices,
                approximants: vec![phi],
                sup_distances: vec![0.0],
            }),
        );
    }

    if dim != 2 {
        return (
            ConditionVerdict {
                condition: Condition::Aib,
                verdict: Verdict::Inconclusive,
                evidence: "boundary self-contact found; push-off search implemented for d = 2 only"
                    .into(),
                witness: None,
                resolution: "exact pairwise facet test".into(),
            },
            None,
        );
    }

    // Step 2: push-off along averaged outward image normals
    let mut normals = vec![[0.0f64; 3]; mesh.vertices.len()];
    for f in &mesh.boundary_facets {
        let a = map.images[f.verts[0]];
        let b = map.images[f.verts[1]];
        let e = sub(b, a);
        // outward normal of an oriented image segment
        let n = [e[1], -e[0], 0.0];
        normals[f.verts[0]] = add(normals[f.verts[0]], n);
        normals[f.verts[1]] = add(normals[f.verts[1]], n);
    }
    for n in normals.iter_mut() {
        let l = norm(*n);
        if l > 0.0 {
            *n = scale(*n, 1.0 / l);
        }
    }

    let eps0 = 0.02 * map.image_bbox_diag();
    let mut approximants = Vec::new();
    let mut sup_distances = Vec::new();
    for k in 0..max_iters {
        let eps = eps0 * 0.5f64.powi(k as i32);
        let mut passed = false;
        for sign in [1.0, -1.0] {
            let mut trial = map.images.clone();
            for &v in &boundary_vertices {
                trial[v] = axpy(trial[v], sign * eps, normals[v]);
            }
            if boundary_self_intersection(mesh, &trial).is_none() {
                approximants.push(
                    boundary_vertices
                        .iter()
                        .map(|&v| trial[v])
                        .collect::<Vec<Pt>>(),
                );
                sup_distances.push(eps);
                passed = true;
                break;
            }
        }
        if !passed && !approximants.is_empty() {
            break; // the injective window closed; stop with what we have
        }
        if approximants.len() >= 3 && k + 1 < max_iters {
            // keep going one more halving to strengthen the certificate,
            // but three strictly decreasing passes already suffice
            break;
        }
    }

    if approximants.len() >= 3 {
        (
            ConditionVerdict {
                condition: Condition::Aib,
                verdict: Verdict::Holds,
                evidence: format!(
                    "push-off injective at {} strictly decreasing offsets down to {:.3e}",
                    approximants.len(),
                    sup_distances.last().unwrap()
                ),
                witness: None,
                resolution: format!("eps0={eps0:.3e} max_iters={max_iters}"),
            },
            Some(AIBCertificate {
                boundary_vertices,
                approximants,
                sup_distances,
            }),
        )
    } else {
        (
            ConditionVerdict {
                condition: Condition::Aib,
                verdict: Verdict::Inconclusive,
                evidence: format!(
                    "push-off search found {} injective offsets (need 3) within {max_iters} halvings",
                    approximants.len()
                ),
                witness: None,
                resolution: format!("eps0={eps0:.3e} max_iters={max_iters}"),
            },
            None,
        )
    }
}

// ---------------------------------------------------------------------------
// sign theorem

#[derive(Debug, Clone)]
pub struct SigmaReport {
    pub sigma: i64,
    pub report: DegreeReport,
}

/// For a two-component boundary complement and an approximately invertible
/// boundary, all nonzero-degree regions carry one sign in {+1, -1}.
pub fn verify_sigma_theorem(map: &PLMap, _cert: &AIBCertificate) -> Result<SigmaReport> {
    let comps = map.mesh.complement_components();
    if comps.component_count() != 2 {
        return Err(CoreError::HypothesisViolated {
            count: comps.component_count(),
        });
    }
    let a = map.mesh.full_submesh();
    let report = degree_field(map, &a, crate::degree::default_field_resolution(map.dim()))?;
    match report.sigma {
        Sigma::Uniform(s) if s == 1 || s == -1 => Ok(SigmaReport { sigma: s, report }),
        Sigma::Uniform(s) => Err(CoreError::InconsistentRegion {
            details: format!("uniform degree {s} is not a sign"),
        }),
        Sigma::Mixed => Err(CoreError::InconsistentRegion {
            details: "nonzero-degree regions carry mixed signs".into(),
        }),
        Sigma::Empty => Err(CoreError::InconsistentRegion {
            details: "no nonzero-degree region".into(),
        }),
    }
}

// ---------------------------------------------------------------------------
// equivalence ledger

#[derive(Debug, Clone)]
pub struct LedgerRow {
    pub name: String,
    /// Is the map in the positive-determinant class the equivalence rows
    /// are stated for?
    pub orientation_preserving: bool,
    pub cnc: Verdict,
    pub deg1: Verdict,
    pub deg1_loc: Verdict,
    pub inv: Verdict,
    pub aib: Verdict,
    pub two_components: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LedgerReport {
    pub rows: Vec<LedgerRow>,
}

impl LedgerReport {
    pub fn consistent(&self) -> bool {
        self.rows.iter().all(|r| r.violations.is_empty())
    }
}

fn agree(a: Verdict, b: Verdict) -> bool {
    a == Verdict::Inconclusive || b == Verdict::Inconclusive || a == b
}

/// Run every checker on each named map and assert the equivalence rows:
/// CNC with DEG1, DEG1 with DEG1_loc, INV with DEG1_loc, and (for
/// two-component complements) AIB implies DEG1.
pub fn cross_equivalences(
    fixtures: &[(String, PLMap)],
    mc_samples: usize,
    seed: u64,
) -> Result<LedgerReport> {
    let resolution = crate::degree::default_field_resolution(2);
    let mut rows = Vec::new();
    for (name, map) in fixtures {
        let (cnc, _) = check_cnc(map, mc_samples, seed);
        let (deg1, _) = check_deg1(map, resolution)?;
        let covering = map.mesh.inner_covering(3)?;
        let deg1_loc = check_deg1_loc(map, &covering, resolution)?;
        let inv = check_inv(map, 10, 5, seed)?;
        let (aib, _) = check_aib(map, 12);
        let two_components = map.mesh.complement_components().component_count() == 2;
        // the equivalence rows are stated within the orientation-preserving
        // class (det > 0 a.e.); maps outside it carry no row assertions
        let orientation_preserving = map.all_determinants_positive();

        let mut violations = Vec::new();
        if orientation_preserving {
            if !agree(cnc.verdict, deg1.verdict) {
                violations.push(format!("row b: cnc {} vs deg1 {}", cnc.verdict, deg1.verdict));
            }
            if !agree(deg1.verdict, deg1_loc.verdict) {
                violations.push(format!(
                    "row c: deg1 {} vs deg1loc {}",
                    deg1.verdict, deg1_loc.verdict
                ));
            }
            if !agree(inv.verdict, deg1_loc.verdict) {
                violations.push(format!(
                    "row g: inv {} vs deg1loc {}",
                    inv.verdict, deg1_loc.verdict
                ));
            }
            if two_components && aib.verdict == Verdict::Holds && deg1.verdict == Verdict::Fails {
                violations
                    .push("row a: aib holds but deg1 fails on a two-component complement".into());
            }
        }
        rows.push(LedgerRow {
            name: name.clone(),
            orientation_preserving,
            cnc: cnc.verdict,
            deg1: deg1.verdict,
            deg1_loc: deg1_loc.verdict,
            inv: inv.verdict,
            aib: aib.verdict,
            two_components,
            violations,
        });
    }
    Ok(LedgerReport { rows })
}

// ---------------------------------------------------------------------------
// change of variables

/// Test density for the change-of-variables identity.
#[derive(Debug, Clone)]
pub enum TestDensity {
    One,
    /// c + l . z + sum_k q_k z_k^2
    Quadratic { c: f64, l: Pt, q: Pt },
    /// Hat bump (1 - |z - center|/radius)_+
    RadialBump { center: Pt, radius: f64 },
}

impl TestDensity {
    pub fn eval(&self, z: Pt, dim: usize) -> f64 {
        match self {
            TestDensity::One => 1.0,
            TestDensity::Quadratic { c, l, q } => {
                let mut v = *c;
                for k in 0..dim {
                    v += l[k] * z[k] + q[k] * z[k] * z[k];
                }
                v
            }
            TestDensity::RadialBump { center, radius } => {
                (1.0 - dist(z, *center) / radius).max(0.0)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CovReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Degree-weighted grid quadrature of the right side (independent route,
    /// accurate only to grid resolution).
    pub rhs_grid: f64,
    pub residual_grid: f64,
}

/// Dunavant degree-4 6-point triangle rule (barycentric, weights sum to 1).
fn tri_rule_deg4() -> [([f64; 3], f64); 6] {
    const A1: f64 = 0.445948490915965;
    const B1: f64 = 0.108103018168070;
    const W1: f64 = 0.223381589678011;
    const A2: f64 = 0.091576213509771;
    const B2: f64 = 0.816847572980459;
    const W2: f64 = 0.109951743655322;
    [
        ([B1, A1, A1], W1),
        ([A1, B1, A1], W1),
        ([A1, A1, B1], W1),
        ([B2, A2, A2], W2),
        ([A2, B2, A2], W2),
        ([A2, A2, B2], W2),
    ]
}

/// Radon degree-5 7-point triangle rule.
fn tri_rule_deg5() -> [([f64; 3], f64); 7] {
    let w0 = 9.0 / 40.0;
    let a1 = (6.0 - 15.0f64.sqrt()) / 21.0;
    let b1 = 1.0 - 2.0 * a1;
    let w1 = (155.0 - 15.0f64.sqrt()) / 1200.0;
    let a2 = (6.0 + 15.0f64.sqrt()) / 21.0;
    let b2 = 1.0 - 2.0 * a2;
    let w2 = (155.0 + 15.0f64.sqrt()) / 1200.0;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], w0),
        ([b1, a1, a1], w1),
        ([a1, b1, a1], w1),
        ([a1, a1, b1], w1),
        ([b2, a2, a2], w2),
        ([a2, b2, a2], w2),
        ([a2, a2, b2], w2),
    ]
}

/// Degree-3 5-point tetrahedron rule.
fn tet_rule_deg3() -> [([f64; 4], f64); 5] {
    [
        ([0.25, 0.25, 0.25, 0.25], -0.8),
        ([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0], 0.45),
        ([1.0 / 6.0, 0.5, 1.0 / 6.0, 1.0 / 6.0], 0.45),
        ([1.0 / 6.0, 1.0 / 6.0, 0.5, 1.0 / 6.0], 0.45),
        ([1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5], 0.45),
    ]
}

/// Degree-2 4-point tetrahedron rule.
fn tet_rule_deg2() -> [([f64; 4], f64); 4] {
    let a = 0.585410196624969; // (5 + 3 sqrt 5)/20
    let b = 0.138196601125011; // (5 - sqrt 5)/20
    [
        ([a, b, b, b], 0.25),
        ([b, a, b, b], 0.25),
        ([b, b, a, b], 0.25),
        ([b, b, b, a], 0.25),
    ]
}

fn bary_combine(pts: &[Pt], bc: &[f64]) -> Pt {
    let mut p = [0.0; 3];
    for (v, &w) in pts.iter().zip(bc.iter()) {
        p = axpy(p, w, *v);
    }
    p
}

/// Change-of-variables identity: integral of f(y(x)) det grad y over the
/// submesh versus the degree-weighted integral of f over the image, the
/// latter both as a signed image-simplex quadrature (exact for polynomial f)
/// and as a grid quadrature over the degree field.
pub fn change_of_variables_check(
    map: &PLMap,
    a: &Submesh,
    f: &TestDensity,
) -> Result<CovReport> {
    let mesh = &map.mesh;
    let dim = map.dim();

    // left side: quadrature in the domain, evaluating y through the map
    let mut lhs = 0.0;
    if dim == 2 {
        for &s in &a.simplices {
            let dom = mesh.simplex_points(s);
            let det = map.per_simplex[s].det;
            let vol = mesh.simplex_volume(s);
            let mut acc = 0.0;
            for (bc, w) in tri_rule_deg4() {
                let x = bary_combine(&dom, &bc);
                acc += w * f.eval(map.eval_in_simplex(s, x), dim);
            }
            lhs += acc * det * vol;
        }
    } else {
        for &s in &a.simplices {
            let dom = mesh.simplex_points(s);
            let det = map.per_simplex[s].det;
            let vol = mesh.simplex_volume(s);
            let mut acc = 0.0;
            for (bc, w) in tet_rule_deg3() {
                let x = bary_combine(&dom, &bc);
                acc += w * f.eval(map.eval_in_simplex(s, x), dim);
            }
            lhs += acc * det * vol;
        }
    }

    // right side: signed quadrature over the image simplices (a.e. identity
    // with the degree-weighted integral), with a different rule
    let mut rhs = 0.0;
    for &s in &a.simplices {
        let imgs = map.image_simplex(s);
        let svol = crate::mesh::signed_volume(dim, &imgs);
        let mut acc = 0.0;
        if dim == 2 {
            for (bc, w) in tri_rule_deg5() {
                acc += w * f.eval(bary_combine(&imgs, &bc), dim);
            }
        } else {
            for (bc, w) in tet_rule_deg2() {
                acc += w * f.eval(bary_combine(&imgs, &bc), dim);
            }
        }
        // the signed volume of the reordered image tuple carries sgn(det)
        // only through the domain orientation; recover the sign explicitly
        let sgn = map.per_simplex[s].det.signum();
        rhs += acc * svol.abs() * sgn;
    }

    // independent grid route
    let report = degree_field(map, a, crate::degree::default_field_resolution(dim))?;
    let regions = &report.regions;
    let mut rhs_grid = 0.0;
    let cellv = regions.cell_volume();
    let mut c = [0usize; 3];
    let dims = regions.dims;
    for iz in 0..dims[2] {
        for iy in 0..dims[1] {
            for ix in 0..dims[0] {
                c[0] = ix;
                c[1] = iy;
                c[2] = iz;
                let mut p = [0.0; 3];
                for k in 0..dim {
                    p[k] = regions.origin[k] + (c[k] as f64 + 0.5) * regions.h;
                }
                if let Some(r) = regions.locate(p) {
                    let d = report.degrees[r];
                    if d != 0 {
                        rhs_grid += d as f64 * f.eval(p, dim) * cellv;
                    }
                }
            }
        }
    }

    Ok(CovReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        rhs_grid,
        residual_grid: (lhs - rhs_grid).abs(),
    })
}
