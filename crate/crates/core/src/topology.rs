//! Discrete topological objects attached to a piecewise-affine map:
//! the topological image (nonzero-degree regions), the localized image over
//! an inner covering, approximate preimage components, isolation of a single
//! component with a degree certificate, and the reduced domain.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::degree::{degree_boundary, degree_field, DegreeReport};
use crate::error::{CoreError, Result};
use crate::linalg::{dist, Pt};
use crate::mesh::{InnerCovering, Submesh};
use crate::plmap::PLMap;

/// Topological image of a submesh: the nonzero-degree regions of the
/// complement of the image boundary.
#[derive(Debug, Clone)]
pub struct TopImage {
    pub report: DegreeReport,
    /// Region indices with nonzero degree.
    pub nonzero: Vec<usize>,
}

impl TopImage {
    /// Does `z` lie in a nonzero-degree region?
    pub fn contains(&self, z: Pt) -> bool {
        matches!(self.report.degree_at(z), Some(d) if d != 0)
    }

    /// Grid-cell volume of the nonzero-degree regions.
    pub fn volume(&self) -> f64 {
        self.nonzero
            .iter()
            .map(|&r| self.report.regions.cell_counts[r] as f64)
            .sum::<f64>()
            * self.report.regions.cell_volume()
    }

    /// One representative point per nonzero-degree region.
    pub fn representatives(&self) -> Vec<Pt> {
        self.nonzero
            .iter()
            .filter_map(|&r| self.report.regions.representatives[r].first().copied())
            .collect()
    }
}

/// The nonzero-degree regions of `degree_field` on a submesh.
pub fn topological_image(map: &PLMap, a: &Submesh, resolution: usize) -> Result<TopImage> {
    let report = degree_field(map, a, resolution)?;
    let nonzero = report.nonzero_regions();
    Ok(TopImage { report, nonzero })
}

/// Localized image: union of topological images over covering levels.
#[derive(Debug, Clone)]
pub struct LocalizedImage {
    pub levels: Vec<TopImage>,
}

impl LocalizedImage {
    /// Is `z` in the topological image of any level?
    pub fn contains(&self, z: Pt) -> bool {
        self.levels.iter().any(|l| l.contains(z))
    }

    pub fn level_volume(&self, m: usize) -> f64 {
        self.levels[m].volume()
    }
}

/// Topological image on every level of the inner covering.
pub fn localized_image(
    map: &PLMap,
    covering: &InnerCovering,
    resolution: usize,
) -> Result<LocalizedImage> {
    let mut levels = Vec::new();
    for level in &covering.levels {
        levels.push(topological_image(map, level, resolution)?);
    }
    Ok(LocalizedImage { levels })
}

/// One connected component of the approximate preimage of a value.
#[derive(Debug, Clone)]
pub struct PreimagePiece {
    pub simplices: Submesh,
    /// Does the piece reach the boundary of the ambient submesh: an exact
    /// preimage point of the value lies on it (or no exact preimage exists
    /// and the piece carries a boundary facet)?
    pub touches_boundary: bool,
    /// Exact preimage points inside the piece: (simplex, point).
    pub exact_preimages: Vec<(usize, Pt)>,
}

/// Approximate preimage of a value, decomposed into facet-connected pieces.
#[derive(Debug, Clone)]
pub struct PreimageComponent {
    pub value: Pt,
    pub eta: f64,
    pub pieces: Vec<PreimagePiece>,
}

/// Distance from `z` to the image of simplex `s` (0 if inside).
fn dist_to_image_simplex(map: &PLMap, s: usize, z: Pt) -> f64 {
    let imgs = map.image_simplex(s);
    if map.dim() == 2 {
        if crate::geometry::point_in_triangle_2d(z, [imgs[0], imgs[1], imgs[2]]) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for i in 0..3 {
            best = best.min(crate::geometry::point_segment_dist(z, imgs[i], imgs[(i + 1) % 3]));
        }
        best
    } else {
        let cols: Vec<Pt> = (1..4).map(|i| crate::linalg::sub(imgs[i], imgs[0])).collect();
        let m = crate::linalg::from_columns(&cols, 3);
        if let Some(b) = crate::linalg::solve(&m, crate::linalg::sub(z, imgs[0]), 3, 0.0) {
            let b0 = 1.0 - b[0] - b[1] - b[2];
            if b0 >= 0.0 && b[0] >= 0.0 && b[1] >= 0.0 && b[2] >= 0.0 {
                return 0.0;
            }
        }
        let faces = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        let mut best = f64::INFINITY;
        for f in faces {
            best = best.min(crate::geometry::point_triangle_dist(
                z, imgs[f[0]], imgs[f[1]], imgs[f[2]],
            ));
        }
        best
    }
}

fn max_image_edge(map: &PLMap, s: usize) -> f64 {
    let imgs = map.image_simplex(s);
    let mut best = 0.0f64;
    for i in 0..imgs.len() {
        for j in i + 1..imgs.len() {
            best = best.max(dist(imgs[i], imgs[j]));
        }
    }
    best
}

/// Connected components of `{S in u : dist(z, y(S)) <= eta}` under facet
/// adjacency. With `eta = None` the proximity radius defaults to twice the
/// longest image edge among simplices whose image contains `z`.
pub fn preimage_components(
    map: &PLMap,
    u: &Submesh,
    z: Pt,
    eta: Option<f64>,
) -> Result<PreimageComponent> {
    let mesh = &map.mesh;
    let dists: Vec<(usize, f64)> = u
        .simplices
        .iter()
        .map(|&s| (s, dist_to_image_simplex(map, s, z)))
        .collect();
    let eta = match eta {
        Some(e) => e,
        None => {
            let incident_max = dists
                .iter()
                .filter(|&&(_, d)| d == 0.0)
                .map(|&(s, _)| max_image_edge(map, s))
                .fold(0.0f64, f64::max);
            if incident_max == 0.0 {
                return Err(CoreError::EmptyPreimage { eta: 0.0 });
            }
            2.0 * incident_max
        }
    };
    let mut member = vec![false; mesh.simplices.len()];
    let mut any = false;
    for &(s, d) in &dists {
        if d <= eta {
            member[s] = true;
            any = true;
        }
    }
    if !any {
        return Err(CoreError::EmptyPreimage { eta });
    }

    // facet-adjacency flood fill
    let mut seen = vec![false; mesh.simplices.len()];
    let mut pieces = Vec::new();
    let tau = mesh.tau_geom();
    for &(start, _) in &dists {
        if !member[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut comp = Vec::new();
        while let Some(s) = stack.pop() {
            comp.push(s);
            for nb in mesh.adjacency[s].iter().flatten() {
                if member[*nb] && !seen[*nb] {
                    seen[*nb] = true;
                    stack.push(*nb);
                }
            }
        }
        let sub = Submesh::new(mesh, comp);
        // exact preimages inside the piece
        let exact: Vec<(usize, Pt)> = map
            .preimages(&sub, z)
            .into_iter()
            .map(|(s, x, _)| (s, x))
            .collect();
        let touches = if exact.is_empty() {
            // no exact preimage resolved: conservative facet-based flag
            !sub.boundary_facets(mesh).is_empty()
                && sub.simplices.iter().any(|&s| {
                    (0..=mesh.dim).any(|i| match mesh.adjacency[s][i] {
                        Some(nb) => !u.contains_simplex(nb),
                        None => true,
                    })
                })
        } else {
            exact
                .iter()
                .any(|&(_, x)| boundary_dist_in(map, u, x) <= tau)
        };
        pieces.push(PreimagePiece {
            simplices: sub,
            touches_boundary: touches,
            exact_preimages: exact,
        });
    }
    Ok(PreimageComponent {
        value: z,
        eta,
        pieces,
    })
}

/// Distance from a domain point to the boundary polyhedron of `u`.
fn boundary_dist_in(map: &PLMap, u: &Submesh, x: Pt) -> f64 {
    let mesh = &map.mesh;
    let mut best = f64::INFINITY;
    for f in u.boundary_facets(mesh) {
        let d = if mesh.dim == 2 {
            crate::geometry::point_segment_dist(
                x,
                mesh.vertices[f.verts[0]],
                mesh.vertices[f.verts[1]],
            )
        } else {
            crate::geometry::point_triangle_dist(
                x,
                mesh.vertices[f.verts[0]],
                mesh.vertices[f.verts[1]],
                mesh.vertices[f.verts[2]],
            )
        };
        best = best.min(d);
    }
    best
}

/// Certificate for an isolated preimage component.
#[derive(Debug, Clone)]
pub struct IsolationCertificate {
    pub region: Submesh,
    pub degree: i64,
    /// Geometric expansion beyond the piece (Hausdorff slack of the collar).
    pub slack: f64,
    pub image_boundary_distance: f64,
}

/// Enclose one non-boundary-touching preimage piece in a submesh whose image
/// boundary avoids the value, growing by adjacency rings but never farther
/// than `1/n`, and certify a positive degree on it.
pub fn isolate_component(
    map: &PLMap,
    u: &Submesh,
    comp: &PreimageComponent,
    piece_index: usize,
    n: usize,
) -> Result<IsolationCertificate> {
    let piece = &comp.pieces[piece_index];
    if piece.touches_boundary {
        return Err(CoreError::CannotSeparate(
            "piece touches the boundary of the ambient submesh".into(),
        ));
    }
    let mesh = &map.mesh;
    let z = comp.value;
    let tau = map.tau_deg();
    let max_slack = 1.0 / n as f64;

    // vertex positions of the core piece, for slack measurement
    let core_pts: Vec<Pt> = piece
        .simplices
        .vertex_set(mesh)
        .iter()
        .map(|&v| mesh.vertices[v])
        .collect();
    let slack_of = |s: usize| -> f64 {
        mesh.simplex_points(s)
            .iter()
            .map(|&p| {
                core_pts
                    .iter()
                    .map(|&q| dist(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };

    let mut current: Vec<usize> = piece.simplices.simplices.clone();
    let mut slack = 0.0f64;
    loop {
        let region = Submesh::new(mesh, current.clone());
        // the region must not pick up any other piece
        for (pi, other) in comp.pieces.iter().enumerate() {
            if pi == piece_index {
                continue;
            }
            if other.simplices.simplices.iter().any(|&s| region.contains_simplex(s)) {
                return Err(CoreError::CannotSeparate(format!(
                    "expansion at slack {slack:.3e} absorbed preimage piece {pi}"
                )));
            }
        }
        let d = map.dist_to_image_boundary(&region, z);
        if d > tau {
            let degree = degree_boundary(map, &region, z)?;
            if degree < 1 {
                return Err(CoreError::CannotSeparate(format!(
                    "isolated region carries degree {degree} < 1"
                )));
            }
            return Ok(IsolationCertificate {
                region,
                degree,
                slack,
                image_boundary_distance: d,
            });
        }
        // grow by one adjacency ring inside u
        let mut added = Vec::new();
        for &s in &current {
            for nb in mesh.adjacency[s].iter().flatten() {
                if u.contains_simplex(*nb) && !region.contains_simplex(*nb) {
                    added.push(*nb);
                }
            }
        }
        added.sort_unstable();
        added.dedup();
        if added.is_empty() {
            return Err(CoreError::CannotSeparate(
                "no room to grow inside the ambient submesh".into(),
            ));
        }
        let ring_slack = added.iter().map(|&s| slack_of(s)).fold(0.0f64, f64::max);
        if ring_slack > max_slack {
            return Err(CoreError::CannotSeparate(format!(
                "required collar {ring_slack:.3e} exceeds the 1/{n} slack budget"
            )));
        }
        slack = slack.max(ring_slack);
        current.extend(added);
    }
}

/// Classification of a submesh into the reduced domain.
#[derive(Debug, Clone)]
pub struct ReducedDomain {
    /// Per mesh vertex: is the vertex in the reduced domain? (false for
    /// vertices outside the submesh).
    pub vertex_in: Vec<bool>,
    /// Simplices all of whose vertices are in the reduced domain.
    pub submesh: Submesh,
    /// Images of excluded vertices (values identified with a foreign piece
    /// of the boundary image).
    pub boundary_touching_values: Vec<Pt>,
}

/// Reduced domain of `u`: a vertex is excluded when its image lies on the
/// image of a boundary facet it does not belong to — i.e. its value is
/// identified with a foreign piece of y(boundary). A simplex stays in the
/// reduced domain when all its vertices do. For injective boundary images
/// nothing is excluded (each boundary vertex only meets the images of its
/// own incident facets); a boundary self-contact such as a pinched seam
/// removes the simplices carrying it.
pub fn reduced_domain(map: &PLMap, u: &Submesh) -> ReducedDomain {
    let mesh = &map.mesh;
    let dim = map.dim();
    let tol = 1e-9 * map.image_bbox_diag();
    let mut vertex_in = vec![false; mesh.vertices.len()];
    let mut in_u = vec![false; mesh.vertices.len()];
    for &s in &u.simplices {
        for &v in mesh.simplex_vertices(s) {
            in_u[v] = true;
            vertex_in[v] = true;
        }
    }

    let facets = u.boundary_facets(mesh);
    let mut touching = Vec::new();
    for v in 0..mesh.vertices.len() {
        if !in_u[v] {
            vertex_in[v] = false;
            continue;
        }
        let z = map.images[v];
        for f in &facets {
            if f.verts[..dim].contains(&v) {
                continue;
            }
            let d = if dim == 2 {
                crate::geometry::point_segment_dist(
                    z,
                    map.images[f.verts[0]],
                    map.images[f.verts[1]],
                )
            } else {
                crate::geometry::point_triangle_dist(
                    z,
                    map.images[f.verts[0]],
                    map.images[f.verts[1]],
                    map.images[f.verts[2]],
                )
            };
            if d <= tol {
                vertex_in[v] = false;
                touching.push(z);
                break;
            }
        }
    }

    let kept: Vec<usize> = u
        .simplices
        .iter()
        .copied()
        .filter(|&s| mesh.simplex_vertices(s).iter().all(|&v| vertex_in[v]))
        .collect();

    ReducedDomain {
        vertex_in,
        submesh: Submesh::new(mesh, kept),
        boundary_touching_values: touching,
    }
}

/// Verdict of the strict-orientation-preservation test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strictness {
    /// Every simplex determinant is positive (the PL criterion).
    Strict,
    /// Determinants are not all positive, but the sampled degree test found
    /// no negative degree and no degenerate patch.
    StrictBySampling,
    NotStrict { reason: String },
}

/// Positive determinants on every simplex, or the sampled fallback test:
/// nonnegative degrees plus non-degeneracy over seeded balls.
pub fn check_strictly_orientation_preserving(map: &PLMap, seed: u64) -> Strictness {
    if map.all_determinants_positive() {
        return Strictness::Strict;
    }
    let mesh = &map.mesh;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior: Vec<usize> = (0..mesh.vertices.len())
        .filter(|&v| mesh.dist_to_boundary(mesh.vertices[v]) > mesh.tau_geom())
        .collect();
    if interior.is_empty() {
        return Strictness::NotStrict {
            reason: "no interior vertex to sample".into(),
        };
    }
    let full = mesh.full_submesh();
    let mut sampled = 0usize;
    for _ in 0..20 {
        let a = interior[rng.gen_range(0..interior.len())];
        let center = mesh.vertices[a];
        let reach = mesh.dist_to_boundary(center);
        for k in 1..=3 {
            let r = reach / (1 << k) as f64;
            let ball: Vec<usize> = full
                .simplices
                .iter()
                .filter(|&&s| {
                    mesh.simplex_points(s).iter().all(|&p| dist(p, center) <= r)
                })
                .copied()
                .collect();
            if ball.is_empty() {
                continue;
            }
            let sub = Submesh::new(mesh, ball);
            let report = match degree_field(map, &sub, crate::degree::default_field_resolution(mesh.dim)) {
                Ok(r) => r,
                Err(_) => continue,
            };
            sampled += 1;
            if let Some(&d) = report.degrees.iter().find(|&&d| d < 0) {
                return Strictness::NotStrict {
                    reason: format!("degree {d} found on a sampled ball"),
                };
            }
            if report.nonzero_regions().is_empty() {
                return Strictness::NotStrict {
                    reason: "sampled ball carries no nonzero-degree value (degenerate patch)"
                        .into(),
                };
            }
        }
    }
    if sampled == 0 {
        Strictness::NotStrict {
            reason: "no sampled ball admitted a degree field".into(),
        }
    } else {
        Strictness::StrictBySampling
    }
}

/// One sampled comparison of the restriction identity.
#[derive(Debug, Clone)]
pub struct RestrictSample {
    pub z: Pt,
    pub degree_full: i64,
    pub degree_reduced: i64,
}

#[derive(Debug, Clone)]
pub struct RestrictReport {
    pub samples: Vec<RestrictSample>,
    pub equal: bool,
}

/// Degree equality between `u` and its reduced domain at sampled values off
/// both image boundaries.
pub fn restrict_check(map: &PLMap, u: &Submesh) -> Result<RestrictReport> {
    let reduced = reduced_domain(map, u);
    if reduced.submesh.is_empty() {
        return Err(CoreError::InconsistentRegion {
            details: "reduced domain is empty".into(),
        });
    }
    let res = crate::degree::default_field_resolution(map.dim());
    let report = degree_field(map, u, res)?;
    let mut samples = Vec::new();
    let mut equal = true;
    for reps in &report.regions.representatives {
        for &z in reps.iter().take(1) {
            let df = match degree_boundary(map, u, z) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let dr = match degree_boundary(map, &reduced.submesh, z) {
                Ok(d) => d,
                Err(_) => continue, // z too close to the reduced boundary image
            };
            if df != dr {
                equal = false;
            }
            samples.push(RestrictSample {
                z,
                degree_full: df,
                degree_reduced: dr,
            });
        }
    }
    Ok(RestrictReport { samples, equal })
}
