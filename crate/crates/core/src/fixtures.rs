//! Test corpus: meshed realizations of the explicit example deformations
//! (angle doubling, annulus translation, cone flip, stacked holes) plus
//! mesh generators and seeded random orientation-preserving maps.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{add, axpy, dist, norm, scale, sub, Pt};
use crate::mesh::SimplicialMesh;
use crate::plmap::PLMap;

/// One ground-truth record attached to a fixture.
#[derive(Debug, Clone)]
pub struct Expectation {
    pub label: String,
    pub query: Pt,
    pub expected_degree: i64,
}

/// A meshed example map with its expected degree values.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub map: PLMap,
    pub resolution: usize,
    pub expectations: Vec<Expectation>,
}

// ---------------------------------------------------------------------------
// mesh generators

/// n x n structured grid on a square, split into 2 n^2 triangles.
pub fn square_grid_mesh(n: usize, origin: Pt, size: f64) -> SimplicialMesh {
    let h = size / n as f64;
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([origin[0] + i as f64 * h, origin[1] + j as f64 * h, 0.0]);
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut simplices = Vec::new();
    for j in 0..n {
        for i in 0..n {
            simplices.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            simplices.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SimplicialMesh::build(2, vertices, simplices).expect("square grid is valid")
}

/// Triangulated disk of radius `r`: a center fan plus `n_radial` rings with
/// `n_angular` vertices each.
pub fn disk_mesh(n_angular: usize, n_radial: usize, r: f64) -> SimplicialMesh {
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    for ring in 1..=n_radial {
        let rr = r * ring as f64 / n_radial as f64;
        for k in 0..n_angular {
            let th = 2.0 * PI * k as f64 / n_angular as f64;
            vertices.push([rr * th.cos(), rr * th.sin(), 0.0]);
        }
    }
    let ring_idx = |ring: usize, k: usize| 1 + (ring - 1) * n_angular + (k % n_angular);
    let mut simplices = Vec::new();
    for k in 0..n_angular {
        simplices.push(vec![0, ring_idx(1, k), ring_idx(1, k + 1)]);
    }
    for ring in 1..n_radial {
        for k in 0..n_angular {
            let (a, b) = (ring_idx(ring, k), ring_idx(ring, k + 1));
            let (c, d) = (ring_idx(ring + 1, k), ring_idx(ring + 1, k + 1));
            simplices.push(vec![a, c, d]);
            simplices.push(vec![a, d, b]);
        }
    }
    SimplicialMesh::build(2, vertices, simplices).expect("disk mesh is valid")
}

/// Triangulated annulus between radii `r0 < r1`.
pub fn annulus_mesh(n_angular: usize, n_radial: usize, r0: f64, r1: f64) -> SimplicialMesh {
    let mut vertices = Vec::new();
    for ring in 0..=n_radial {
        let rr = r0 + (r1 - r0) * ring as f64 / n_radial as f64;
        for k in 0..n_angular {
            // half-step offset keeps polygonized tangent circles from sharing an exact vertex after the translation map
            let th = 2.0 * PI * (k as f64 + 0.5) / n_angular as f64;
            vertices.push([rr * th.cos(), rr * th.sin(), 0.0]);
        }
    }
    let idx = |ring: usize, k: usize| ring * n_angular + (k % n_angular);
    let mut simplices = Vec::new();
    for ring in 0..n_radial {
        for k in 0..n_angular {
            let (a, b) = (idx(ring, k), idx(ring, k + 1));
            let (c, d) = (idx(ring + 1, k), idx(ring + 1, k + 1));
            simplices.push(vec![a, c, d]);
            simplices.push(vec![a, d, b]);
        }
    }
    SimplicialMesh::build(2, vertices, simplices).expect("annulus mesh is valid")
}

/// Unit cube split into an n^3 grid of cells, 6 tetrahedra each (Kuhn split).
pub fn cube_grid_mesh(n: usize) -> SimplicialMesh {
    let h = 1.0 / n as f64;
    let mut vertices = Vec::new();
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    let idx = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    // Kuhn triangulation of the unit cell: 6 tets along vertex permutations
    let tets: [[(usize, usize, usize); 4]; 6] = [
        [(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)],
        [(0, 0, 0), (1, 0, 0), (1, 0, 1), (1, 1, 1)],
        [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 1, 1)],
        [(0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)],
        [(0, 0, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)],
        [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)],
    ];
    let mut simplices = Vec::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for t in &tets {
                    simplices.push(
                        t.iter()
                            .map(|&(di, dj, dk)| idx(i + di, j + dj, k + dk))
                            .collect(),
                    );
                }
            }
        }
    }
    SimplicialMesh::build(3, vertices, simplices).expect("cube grid is valid")
}

// ---------------------------------------------------------------------------
// ear clipping for polygons with holes

/// Triangulate a region bounded by one CCW outer loop and CW hole loops.
/// Holes are merged into the outer loop via bridge edges, then ear-clipped.
/// Returns index triples into the concatenated vertex list
/// (outer loop first, then the holes in order).
pub fn triangulate_with_holes(outer: &[Pt], holes: &[Vec<Pt>]) -> Vec<[usize; 3]> {
    // global vertex table
    let mut pts: Vec<Pt> = outer.to_vec();
    let mut hole_offsets = Vec::new();
    for h in holes {
        hole_offsets.push(pts.len());
        pts.extend_from_slice(h);
    }
    // current polygon as a cyclic list of indices into pts
    let mut poly: Vec<usize> = (0..outer.len()).collect();

    // merge holes one by one: bridge from the hole's topmost vertex upward
    let mut hole_order: Vec<usize> = (0..holes.len()).collect();
    // process topmost holes first so bridges don't cross earlier slits
    hole_order.sort_by(|&a, &b| {
        let ya = holes[a].iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        let yb = holes[b].iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        yb.partial_cmp(&ya).unwrap()
    });
    for &hi in &hole_order {
        let off = hole_offsets[hi];
        let h = &holes[hi];
        // topmost hole vertex
        let (local_top, _) = h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1[1].partial_cmp(&b.1[1]).unwrap())
            .unwrap();
        let hv = off + local_top;
        let hp = pts[hv];
        // find the polygon edge directly above: cast a vertical ray upward
        let mut best: Option<(usize, f64)> = None; // (position in poly, hit y)
        let m = poly.len();
        for pos in 0..m {
            let a = pts[poly[pos]];
            let b = pts[poly[(pos + 1) % m]];
            if (a[0] - hp[0]) * (b[0] - hp[0]) <= 0.0 && a[0] != b[0] {
                let t = (hp[0] - a[0]) / (b[0] - a[0]);
                if !(0.0..=1.0).contains(&t) {
                    continue;
                }
                let y = a[1] + t * (b[1] - a[1]);
                if y > hp[1] && best.map(|(_, by)| y < by).unwrap_or(true) {
                    best = Some((pos, y));
                }
            }
        }
        let (pos, _) = best.expect("hole must be inside the outer region");
        // bridge to the nearer endpoint of the hit edge (both are visible
        // enough for our generated geometry; prefer the higher-x one of the
        // two if equal distance)
        let ia = poly[pos];
        let ib = poly[(pos + 1) % m];
        let bridge = if dist(pts[ia], hp) <= dist(pts[ib], hp) {
            pos
        } else {
            (pos + 1) % m
        };
        let bv = poly[bridge];
        // splice: ... bv, hv, hole loop ..., hv, bv, ...
        let mut insert = vec![hv];
        for step in 1..=h.len() {
            insert.push(off + (local_top + step) % h.len());
        }
        insert.push(bv);
        let at = bridge + 1;
        for (k, v) in insert.into_iter().enumerate() {
            poly.insert(at + k, v);
        }
    }

    ear_clip(&pts, poly)
}

fn ear_clip(pts: &[Pt], mut poly: Vec<usize>) -> Vec<[usize; 3]> {
    let mut tris = Vec::new();
    let area2 = |a: Pt, b: Pt, c: Pt| crate::geometry::orient2d(a, b, c);
    let mut guard = 0usize;
    while poly.len() > 3 {
        let m = poly.len();
        let mut clipped = false;
        guard += 1;
        assert!(guard < 100_000, "ear clipping failed to terminate");
        for i in 0..m {
            let (ip, ic, inx) = (poly[(i + m - 1) % m], poly[i], poly[(i + 1) % m]);
            if ip == ic || ic == inx || ip == inx {
                // collapsed corner from a slit: drop it
                poly.remove(i);
                clipped = true;
                break;
            }
            let (a, b, c) = (pts[ip], pts[ic], pts[inx]);
            let cr = area2(a, b, c);
            if cr <= 1e-14 * (dist(a, b) * dist(b, c)).max(1e-300) {
                continue; // reflex or degenerate corner
            }
            // no other polygon vertex strictly inside the candidate ear
            let mut ok = true;
            for &q in &poly {
                if q == ip || q == ic || q == inx {
                    continue;
                }
                let p = pts[q];
                if area2(a, b, p) > 0.0 && area2(b, c, p) > 0.0 && area2(c, a, p) > 0.0 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            tris.push([ip, ic, inx]);
            poly.remove(i);
            clipped = true;
            break;
        }
        assert!(clipped, "no ear found; polygon is not simple enough");
    }
    if poly.len() == 3 && area2(pts[poly[0]], pts[poly[1]], pts[poly[2]]).abs() > 0.0 {
        tris.push([poly[0], poly[1], poly[2]]);
    }
    tris
}

/// Disk of radius `r_out` with circular holes (CCW outer, CW holes).
pub fn disk_with_holes_mesh(
    n_angular: usize,
    r_out: f64,
    hole_centers: &[Pt],
    hole_radius: f64,
) -> SimplicialMesh {
    let outer: Vec<Pt> = (0..n_angular)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n_angular as f64;
            [r_out * th.cos(), r_out * th.sin(), 0.0]
        })
        .collect();
    let nh = (n_angular / 2).max(8);
    let holes: Vec<Vec<Pt>> = hole_centers
        .iter()
        .map(|c| {
            (0..nh)
                .map(|k| {
                    // clockwise
                    let th = -2.0 * PI * k as f64 / nh as f64;
                    [c[0] + hole_radius * th.cos(), c[1] + hole_radius * th.sin(), 0.0]
                })
                .collect()
        })
        .collect();
    let tris = triangulate_with_holes(&outer, &holes);
    let mut pts: Vec<Pt> = outer;
    for h in &holes {
        pts.extend_from_slice(h);
    }
    let simplices = tris.iter().map(|t| t.to_vec()).collect();
    SimplicialMesh::build(2, pts, simplices).expect("holed disk mesh is valid")
}

// ---------------------------------------------------------------------------
// paper fixtures

/// Orientation-preserving angle-doubling map on the unit disk:
/// in polar coordinates r e^{i phi} -> r e^{2 i phi}.
pub fn fixture_angle_doubling(n: usize) -> Fixture {
    assert!(n >= 16);
    let mesh = Arc::new(disk_mesh(n, (n / 8).max(4), 1.0));
    let images: Vec<Pt> = mesh
        .vertices
        .iter()
        .map(|v| {
            let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
            if r == 0.0 {
                [0.0, 0.0, 0.0]
            } else {
                let phi = v[1].atan2(v[0]);
                [r * (2.0 * phi).cos(), r * (2.0 * phi).sin(), 0.0]
            }
        })
        .collect();
    let map = PLMap::new(mesh, images).unwrap();
    Fixture {
        name: "angle-doubling".into(),
        map,
        resolution: n,
        expectations: vec![
            Expectation {
                label: "degree 2 near the center".into(),
                query: [0.3, 0.2, 0.0],
                expected_degree: 2,
            },
            Expectation {
                label: "degree 0 outside the image".into(),
                query: [2.0, 0.0, 0.0],
                expected_degree: 0,
            },
        ],
    }
}

/// Annulus with the outer circle fixed and the inner circle translated
/// outside: y(x) = 2 (|x|-1)/|x| x + (2-|x|)/|x| (x + (3,0)).
pub fn fixture_annulus_translation(n: usize) -> Fixture {
    assert!(n >= 32);
    let mesh = Arc::new(annulus_mesh(n, (n / 8).max(4), 1.0, 2.0));
    let images: Vec<Pt> = mesh
        .vertices
        .iter()
        .map(|v| {
            let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
            let a = 2.0 * (r - 1.0) / r;
            let b = (2.0 - r) / r;
            [a * v[0] + b * (v[0] + 3.0), a * v[1] + b * v[1], 0.0]
        })
        .collect();
    let map = PLMap::new(mesh, images).unwrap();
    Fixture {
        name: "annulus-translation".into(),
        map,
        resolution: n,
        expectations: vec![
            Expectation {
                label: "degree +1 at the origin".into(),
                query: [0.0, 0.0, 0.0],
                expected_degree: 1,
            },
            Expectation {
                label: "degree -1 at the translated hole".into(),
                query: [3.0, 0.0, 0.0],
                expected_degree: -1,
            },
        ],
    }
}

/// Geometry of a truncated cone with a tangent-ball cap: side half-angle
/// theta with cos(theta) = 1 - alpha, side length `r`, cap ball centered at
/// (r/cos theta, 0) with radius r tan(theta).
struct ConeShape {
    theta: f64,
    r: f64,
}

impl ConeShape {
    fn cap_center(&self) -> Pt {
        [self.r / self.theta.cos(), 0.0, 0.0]
    }
    fn cap_radius(&self) -> f64 {
        self.r * self.theta.tan()
    }

    /// Sample the boundary from the tip along the upper side, around the cap,
    /// back to the tip (exclusive of the tip itself), with outward normals.
    fn sample(&self, count: usize) -> Vec<(Pt, Pt)> {
        let side_len = self.r;
        let tcap = self.cap_center();
        let rcap = self.cap_radius();
        // cap arc spans from the angle of the upper tangency point down to
        // its mirror, through angle 0
        let tang = [self.r * self.theta.cos(), self.r * self.theta.sin(), 0.0];
        let ang0 = (tang[1] - tcap[1]).atan2(tang[0] - tcap[0]);
        let arc_len = 2.0 * ang0.abs() * rcap;
        let total = 2.0 * side_len + arc_len;
        let mut out = Vec::new();
        for i in 1..count {
            let s = total * i as f64 / count as f64;
            if s < side_len {
                // upper side
                let p = [s * self.theta.cos(), s * self.theta.sin(), 0.0];
                let nrm = [-self.theta.sin(), self.theta.cos(), 0.0];
                out.push((p, nrm));
            } else if s < side_len + arc_len {
                let a = ang0 - (s - side_len) / rcap * ang0.signum();
                let nrm = [a.cos(), a.sin(), 0.0];
                out.push((axpy(tcap, rcap, nrm), nrm));
            } else {
                let t = total - s; // distance from tip along the lower side
                let p = [t * self.theta.cos(), -t * self.theta.sin(), 0.0];
                let nrm = [-self.theta.sin(), -self.theta.cos(), 0.0];
                out.push((p, nrm));
            }
        }
        out
    }

    /// Boundary polyline (closed through the tip) for ray casting.
    fn polyline(&self, count: usize) -> Vec<Pt> {
        let mut pts = vec![[0.0, 0.0, 0.0]];
        pts.extend(self.sample(count).into_iter().map(|(p, _)| p));
        pts
    }
}

/// Cone-difference domain with the inner part of the boundary flipped
/// outside, then composed with the fold F(u, v) = (u, u v).
///
/// Returns (intermediate fixture y, folded fixture y_hat).
pub fn fixture_cone_flip(n: usize) -> (Fixture, Fixture) {
    assert!(n >= 32);
    let inner = ConeShape {
        theta: (2.0f64 / 3.0).acos(),
        r: 1.0,
    };
    let outer = ConeShape {
        theta: (1.0f64 / 3.0).acos(),
        r: 2.0,
    };
    let outer_poly = outer.polyline(4 * n);
    let inner_samples = inner.sample(n);
    let layers = (n / 8).max(4);

    // vertices: tip, then columns of points from the inner boundary along
    // its outward normal to the outer boundary
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut q_of_col = Vec::new();
    let mut p_of_col = Vec::new();
    for &(q, nrm) in &inner_samples {
        let mut best = f64::INFINITY;
        let m = outer_poly.len();
        for i in 0..m {
            if let Some(t) =
                crate::geometry::ray_segment_hit(q, nrm, outer_poly[i], outer_poly[(i + 1) % m])
            {
                best = best.min(t);
            }
        }
        assert!(best.is_finite(), "normal ray must reach the outer boundary");
        let p = axpy(q, best, nrm);
        q_of_col.push(q);
        p_of_col.push(p);
        for k in 0..=layers {
            let t = k as f64 / layers as f64;
            vertices.push(add(scale(q, 1.0 - t), scale(p, t)));
        }
    }
    let cols = inner_samples.len();
    let vid = |j: usize, k: usize| 1 + j * (layers + 1) + k;
    let mut simplices = Vec::new();
    // fan at the starting tip side
    for k in 0..layers {
        simplices.push(vec![0, vid(0, k), vid(0, k + 1)]);
    }
    for j in 0..cols - 1 {
        for k in 0..layers {
            simplices.push(vec![vid(j, k), vid(j + 1, k), vid(j + 1, k + 1)]);
            simplices.push(vec![vid(j, k), vid(j + 1, k + 1), vid(j, k + 1)]);
        }
    }
    // fan at the closing tip side
    for k in 0..layers {
        simplices.push(vec![0, vid(cols - 1, k + 1), vid(cols - 1, k)]);
    }
    let mesh = Arc::new(SimplicialMesh::build(2, vertices, simplices).unwrap());

    // intermediate map: keep the outer boundary, reflect the inner one
    // across {x . e = 0}, interpolate along the construction rays
    let reflect = |p: Pt| [-p[0], p[1], 0.0];
    let mut images = vec![[0.0, 0.0, 0.0]; mesh.vertices.len()];
    for j in 0..cols {
        let rq = reflect(q_of_col[j]);
        let p = p_of_col[j];
        for k in 0..=layers {
            let t = k as f64 / layers as f64;
            images[vid(j, k)] = add(scale(rq, 1.0 - t), scale(p, t));
        }
    }
    let map_y = PLMap::new(mesh.clone(), images.clone()).unwrap();

    let fold = |u: Pt| [u[0], u[0] * u[1], 0.0];
    let folded: Vec<Pt> = images.iter().map(|&u| fold(u)).collect();
    let map_yhat = PLMap::new(mesh, folded).unwrap();

    let fix_y = Fixture {
        name: "cone-flip-intermediate".into(),
        map: map_y,
        resolution: n,
        expectations: vec![
            Expectation {
                label: "degree +1 at e".into(),
                query: [1.0, 0.0, 0.0],
                expected_degree: 1,
            },
            Expectation {
                label: "degree +1 at -e".into(),
                query: [-1.0, 0.0, 0.0],
                expected_degree: 1,
            },
        ],
    };
    let fix_yhat = Fixture {
        name: "cone-flip".into(),
        map: map_yhat,
        resolution: n,
        expectations: vec![
            Expectation {
                label: "degree +1 at e".into(),
                query: [1.0, 0.0, 0.0],
                expected_degree: 1,
            },
            Expectation {
                label: "degree -1 at -e".into(),
                query: [-1.0, 0.0, 0.0],
                expected_degree: -1,
            },
        ],
    };
    (fix_y, fix_yhat)
}

/// Disk with `n_holes` circular holes whose boundary images are stacked as
/// nested circles around a common center outside the fixed outer circle,
/// so the degree telescopes to `target_degree` there.
pub fn fixture_stacked_holes(n_holes: usize, target_degree: i64) -> Fixture {
    assert!(n_holes >= 1 && n_holes == target_degree.unsigned_abs() as usize);
    let hole_radius = 0.6;
    let r_out = n_holes as f64 + 1.0;
    let centers: Vec<Pt> = (0..n_holes)
        .map(|i| [2.0 * i as f64 - (n_holes as f64 - 1.0), 0.0, 0.0])
        .collect();
    let n_angular = 96;
    let mesh = Arc::new(disk_with_holes_mesh(n_angular, r_out, &centers, hole_radius));

    // nested image circles around z0, well outside the outer circle
    let z0 = [r_out + 3.0, 0.0, 0.0];
    let radii: Vec<f64> = (0..n_holes)
        .map(|i| 0.2 + 0.6 * (n_holes - i) as f64 / n_holes as f64)
        .collect();
    // reflection across the x-axis reverses each circle's winding; plain
    // translation contributes -1 per hole, reflection +1
    let reflect = target_degree > 0;
    let collar = 0.3;
    let images: Vec<Pt> = mesh
        .vertices
        .iter()
        .map(|&v| {
            let mut y = v;
            for (i, &c) in centers.iter().enumerate() {
                let d = dist(v, c) - hole_radius;
                let w = (1.0 - d / collar).clamp(0.0, 1.0);
                if w > 0.0 {
                    let mut u = sub(v, c);
                    if reflect {
                        u[1] = -u[1];
                    }
                    let t = axpy(z0, radii[i] / hole_radius, u);
                    y = add(scale(y, 1.0 - w), scale(t, w));
                }
            }
            y
        })
        .collect();
    let map = PLMap::new(mesh, images).unwrap();
    Fixture {
        name: format!("stacked-holes-{n_holes}"),
        map,
        resolution: n_angular,
        expectations: vec![Expectation {
            label: format!("degree {target_degree} inside all stacked circles"),
            query: [z0[0] + 0.03, z0[1] + 0.017, 0.0],
            expected_degree: target_degree,
        }],
    }
}

/// Bar bent by a full turn so that its two end faces land on the same
/// segment: a strictly orientation-preserving map with boundary self-contact
/// (the piecewise-affine stand-in for a boundary pinch).
pub fn fixture_pinch(n: usize) -> Fixture {
    let cols = 4 * n;
    let rows = (n / 8).max(3);
    let len = 4.0;
    let mesh = {
        let mut vertices = Vec::new();
        for j in 0..=rows {
            for i in 0..=cols {
                vertices.push([
                    len * i as f64 / cols as f64,
                    j as f64 / rows as f64,
                    0.0,
                ]);
            }
        }
        let idx = |i: usize, j: usize| j * (cols + 1) + i;
        let mut simplices = Vec::new();
        for j in 0..rows {
            for i in 0..cols {
                simplices.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                simplices.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        Arc::new(SimplicialMesh::build(2, vertices, simplices).unwrap())
    };
    let images: Vec<Pt> = mesh
        .vertices
        .iter()
        .map(|v| {
            // clockwise bend keeps the Jacobian positive
            let th = 2.0 * PI * v[0] / len;
            let r = 1.0 + v[1];
            [r * th.cos(), -r * th.sin(), 0.0]
        })
        .collect();
    let map = PLMap::new(mesh, images).unwrap();
    Fixture {
        name: "pinch".into(),
        map,
        resolution: n,
        expectations: vec![
            Expectation {
                label: "degree 1 in the annulus body".into(),
                query: [0.0, 1.5, 0.0],
                expected_degree: 1,
            },
            Expectation {
                label: "degree 0 in the hole".into(),
                query: [0.0, 0.0, 0.0],
                expected_degree: 0,
            },
        ],
    }
}

/// Bar bent by more than a full turn: a positive-determinant map that double
/// covers a sector, violating the volume inequality.
pub fn fixture_overwrap(n: usize) -> Fixture {
    let cols = 5 * n;
    let rows = (n / 8).max(3);
    let len = 5.0;
    let mesh = {
        let mut vertices = Vec::new();
        for j in 0..=rows {
            for i in 0..=cols {
                vertices.push([
                    len * i as f64 / cols as f64,
                    j as f64 / rows as f64,
                    0.0,
                ]);
            }
        }
        let idx = |i: usize, j: usize| j * (cols + 1) + i;
        let mut simplices = Vec::new();
        for j in 0..rows {
            for i in 0..cols {
                simplices.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                simplices.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        Arc::new(SimplicialMesh::build(2, vertices, simplices).unwrap())
    };
    // 1.25 turns: the last quarter annulus is covered twice
    let images: Vec<Pt> = mesh
        .vertices
        .iter()
        .map(|v| {
            // clockwise bend keeps the Jacobian positive
            let th = 2.5 * PI * v[0] / len;
            let r = 1.0 + v[1];
            [r * th.cos(), -r * th.sin(), 0.0]
        })
        .collect();
    let map = PLMap::new(mesh, images).unwrap();
    Fixture {
        name: "overwrap".into(),
        map,
        resolution: n,
        expectations: vec![Expectation {
            label: "degree 2 in the double-covered sector".into(),
            query: [1.5 * (0.25 * PI).cos(), -1.5 * (0.25 * PI).sin(), 0.0],
            expected_degree: 2,
        }],
    }
}

// ---------------------------------------------------------------------------
// seeded random orientation-preserving maps

/// Random orientation-preserving map: a rotation+scale+translation composed
/// with a smooth low-frequency displacement, damped until every simplex
/// determinant stays positive.
pub fn random_op_map(mesh: Arc<SimplicialMesh>, seed: u64) -> PLMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = mesh.dim;
    let (lo, hi) = mesh.bbox();
    let diag = dist(hi, lo).max(1e-300);

    let angle: f64 = rng.gen_range(-PI..PI);
    let s: f64 = rng.gen_range(0.7..1.4);
    let shift: Pt = [
        rng.gen_range(-0.5..0.5) * diag,
        rng.gen_range(-0.5..0.5) * diag,
        if dim == 3 {
            rng.gen_range(-0.5..0.5) * diag
        } else {
            0.0
        },
    ];
    // a few random smooth modes
    let mut modes = Vec::new();
    for _ in 0..3 {
        let k: Pt = [
            rng.gen_range(0.5..2.5) / diag,
            rng.gen_range(0.5..2.5) / diag,
            if dim == 3 { rng.gen_range(0.5..2.5) / diag } else { 0.0 },
        ];
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        let dir: Pt = {
            let mut d = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                if dim == 3 { rng.gen_range(-1.0..1.0) } else { 0.0 },
            ];
            let n = norm(d).max(1e-12);
            d = scale(d, 1.0 / n);
            d
        };
        modes.push((k, phase, dir));
    }

    let base: Vec<Pt> = mesh
        .vertices
        .iter()
        .map(|v| {
            let (c, sn) = (angle.cos(), angle.sin());
            let rotated = if dim == 2 {
                [c * v[0] - sn * v[1], sn * v[0] + c * v[1], 0.0]
            } else {
                // rotate about the z axis; enough variety for tests
                [c * v[0] - sn * v[1], sn * v[0] + c * v[1], v[2]]
            };
            add(scale(rotated, s), shift)
        })
        .collect();
    let displacement: Vec<Pt> = mesh
        .vertices
        .iter()
        .map(|v| {
            let mut d = [0.0; 3];
            for (k, phase, dir) in &modes {
                let arg = 2.0 * PI * crate::linalg::dot(*k, *v) + phase;
                d = axpy(d, 0.15 * diag * arg.sin(), *dir);
            }
            d
        })
        .collect();

    // damp the displacement until all determinants are positive
    let mut t = 1.0;
    loop {
        let images: Vec<Pt> = base
            .iter()
            .zip(displacement.iter())
            .map(|(b, d)| axpy(*b, t, *d))
            .collect();
        let map = PLMap::new(mesh.clone(), images).unwrap();
        if map.all_determinants_positive() {
            return map;
        }
        t *= 0.5;
        if t < 1e-6 {
            return PLMap::new(mesh.clone(), base).unwrap();
        }
    }
}
