//! Brouwer degree of piecewise-affine maps, computed by three independent
//! routes: exact preimage enumeration at regular values, a boundary-only
//! winding / solid-angle sum, and the mollified integral representation.

use crate::error::{CoreError, Result};
use crate::grid::{BackgroundGrid, RegionSet};
use crate::linalg::{cross2, dist, dot, norm, sub, Pt};
use crate::mesh::Submesh;
use crate::plmap::PLMap;

/// Radial C0 hat bump with unit integral, used by the integral route.
#[derive(Debug, Clone, Copy)]
pub struct MollifierSpec {
    pub center: Pt,
    pub radius: f64,
}

impl MollifierSpec {
    /// Value at `u` (already normalized to total integral 1).
    pub fn eval(&self, u: Pt, dim: usize) -> f64 {
        let r = dist(u, self.center) / self.radius;
        if r >= 1.0 {
            return 0.0;
        }
        let total = match dim {
            2 => std::f64::consts::PI * self.radius.powi(2) / 3.0,
            3 => std::f64::consts::PI * self.radius.powi(3) / 3.0,
            _ => unreachable!(),
        };
        (1.0 - r) / total
    }
}

/// Common degree value over the nonzero-degree regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sigma {
    /// All nonzero-degree regions carry this one value.
    Uniform(i64),
    /// Nonzero-degree regions disagree.
    Mixed,
    /// No nonzero-degree region was found.
    Empty,
}

/// Classification of the complement of an image boundary.
#[derive(Debug, Clone)]
pub struct DegreeReport {
    pub regions: RegionSet,
    /// One integer per region, in region order.
    pub degrees: Vec<i64>,
    pub sigma: Sigma,
    /// Grid resolution used for the arrangement.
    pub resolution: usize,
}

impl DegreeReport {
    /// Degree of the region containing `z`, if `z` falls in a classified cell.
    pub fn degree_at(&self, z: Pt) -> Option<i64> {
        self.regions.locate(z).map(|r| self.degrees[r])
    }

    /// Region indices with nonzero degree.
    pub fn nonzero_regions(&self) -> Vec<usize> {
        (0..self.degrees.len())
            .filter(|&r| self.degrees[r] != 0)
            .collect()
    }
}

fn check_off_boundary(map: &PLMap, a: &Submesh, z: Pt) -> Result<()> {
    let tol = map.tau_deg();
    let d = map.dist_to_image_boundary(a, z);
    if d <= tol {
        return Err(CoreError::OnImageBoundary { dist: d, tol });
    }
    Ok(())
}

/// Degree at a regular value by exact enumeration of preimages:
/// sum of determinant signs over all interior preimages.
pub fn degree_regular_sum(map: &PLMap, a: &Submesh, z: Pt) -> Result<i64> {
    check_off_boundary(map, a, z)?;
    let tau_geom = 1e-9 * map.image_bbox_diag();
    let tau_vol = map.mesh.tau_vol();
    // regularity: no incident degenerate simplex, no near-facet preimage
    let mut total = 0i64;
    for &(s, _x, minb) in map.preimages(a, z).iter() {
        let det = map.per_simplex[s].det;
        if det.abs() < tau_vol {
            return Err(CoreError::NotRegularValue {
                reason: format!("simplex {s} has |det| {det:e} below tolerance"),
            });
        }
        // barycentric distance to the image facets, scaled to geometry
        let diam = map
            .image_simplex(s)
            .windows(2)
            .map(|w| dist(w[0], w[1]))
            .fold(0.0f64, f64::max)
            .max(1e-300);
        if minb * diam < tau_geom {
            return Err(CoreError::NotRegularValue {
                reason: format!("value within {tau_geom:e} of the image of a facet of simplex {s}"),
            });
        }
        total += det.signum() as i64;
    }
    Ok(total)
}

/// Degree via the boundary images only: winding number in 2D, signed solid
/// angle sum in 3D, rounded to the nearest integer with a 0.25 residual guard.
pub fn degree_boundary(map: &PLMap, a: &Submesh, z: Pt) -> Result<i64> {
    check_off_boundary(map, a, z)?;
    let facets = map.image_boundary_facets(a);
    let sum = if map.dim() == 2 {
        let mut angle = 0.0;
        for f in &facets {
            let u = sub(f[0], z);
            let v = sub(f[1], z);
            angle += cross2(u, v).atan2(dot(u, v));
        }
        angle / (2.0 * std::f64::consts::PI)
    } else {
        let mut omega = 0.0;
        for f in &facets {
            omega += solid_angle(sub(f[0], z), sub(f[1], z), sub(f[2], z));
        }
        omega / (4.0 * std::f64::consts::PI)
    };
    let rounded = sum.round();
    let residual = (sum - rounded).abs();
    if residual >= 0.25 {
        return Err(CoreError::NumericallyAmbiguous { sum, residual });
    }
    Ok(rounded as i64)
}

/// Signed solid angle of the triangle (a, b, c) seen from the origin
/// (van Oosterom & Strackee).
fn solid_angle(a: Pt, b: Pt, c: Pt) -> f64 {
    let la = norm(a);
    let lb = norm(b);
    let lc = norm(c);
    let numer = dot(a, crate::linalg::cross(b, c));
    let denom = la * lb * lc + dot(a, b) * lc + dot(b, c) * la + dot(c, a) * lb;
    2.0 * numer.atan2(denom)
}

/// Number of dyadic subdivision levels applied to simplices whose image
/// crosses the mollifier's support sphere or contains its apex.
const ADAPTIVE_LEVELS: usize = 7;

/// Degree via the integral representation: quadrature of
/// `h(y(x)) det grad y(x)` over the submesh, with a radial hat `h`.
///
/// Per-simplex Gauss quadrature (degree 4 in 2D, degree 3 in 3D), with
/// adaptive dyadic subdivision where the image crosses the support sphere.
pub fn degree_integral(map: &PLMap, a: &Submesh, z: Pt, h: &MollifierSpec) -> Result<f64> {
    let d_bdry = map.dist_to_image_boundary(a, h.center);
    if d_bdry <= h.radius {
        return Err(CoreError::SupportCrossesImageBoundary);
    }
    // the support must sit in the same region as z: both must be reachable
    // without crossing the image boundary; we only check the cheap necessary
    // condition that z itself is off the boundary
    check_off_boundary(map, a, z)?;

    let dim = map.dim();
    let mut total = 0.0;
    for &s in &a.simplices {
        let det = map.per_simplex[s].det;
        let dom = map.mesh.simplex_points(s);
        let img = map.image_simplex(s);
        total += integrate_cell(map, s, dim, &dom, &img, det, h, ADAPTIVE_LEVELS);
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn integrate_cell(
    map: &PLMap,
    simplex: usize,
    dim: usize,
    dom: &[Pt],
    img: &[Pt],
    det: f64,
    h: &MollifierSpec,
    depth: usize,
) -> f64 {
    // classify the image cell against the support ball
    let dist_to_center = if dim == 2 {
        if crate::geometry::point_in_triangle_2d(h.center, [img[0], img[1], img[2]]) {
            0.0
        } else {
            (0..3)
                .map(|i| crate::geometry::point_segment_dist(h.center, img[i], img[(i + 1) % 3]))
                .fold(f64::INFINITY, f64::min)
        }
    } else {
        // conservative lower bound via vertex distances minus diameter
        let diam = pair_max_dist(img);
        let minv = img
            .iter()
            .map(|p| dist(*p, h.center))
            .fold(f64::INFINITY, f64::min);
        (minv - diam).max(0.0)
    };
    if dist_to_center >= h.radius {
        return 0.0;
    }
    let maxv = img
        .iter()
        .map(|p| dist(*p, h.center))
        .fold(0.0f64, f64::max);
    let smooth_inside = maxv < h.radius && dist_to_center > 0.0;
    if depth > 0 && !smooth_inside {
        // crossing the sphere or containing the apex: subdivide
        let mut acc = 0.0;
        for (sub_dom, sub_img) in subdivide(dim, dom, img) {
            acc += integrate_cell(map, simplex, dim, &sub_dom, &sub_img, det, h, depth - 1);
        }
        return acc;
    }
    quadrature(map, simplex, dim, dom, det, h)
}

fn pair_max_dist(pts: &[Pt]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            m = m.max(dist(pts[i], pts[j]));
        }
    }
    m
}

/// Dyadic subdivision of a simplex (4 triangles / 8 tets), applied in the
/// domain and the image simultaneously (the map is affine, so midpoints map
/// to midpoints).
fn subdivide(dim: usize, dom: &[Pt], img: &[Pt]) -> Vec<(Vec<Pt>, Vec<Pt>)> {
    let mid = |a: Pt, b: Pt| crate::linalg::scale(crate::linalg::add(a, b), 0.5);
    if dim == 2 {
        let m01 = (mid(dom[0], dom[1]), mid(img[0], img[1]));
        let m12 = (mid(dom[1], dom[2]), mid(img[1], img[2]));
        let m02 = (mid(dom[0], dom[2]), mid(img[0], img[2]));
        vec![
            (
                vec![dom[0], m01.0, m02.0],
                vec![img[0], m01.1, m02.1],
            ),
            (
                vec![m01.0, dom[1], m12.0],
                vec![m01.1, img[1], m12.1],
            ),
            (
                vec![m02.0, m12.0, dom[2]],
                vec![m02.1, m12.1, img[2]],
            ),
            (
                vec![m01.0, m12.0, m02.0],
                vec![m01.1, m12.1, m02.1],
            ),
        ]
    } else {
        // standard 8-tet split
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut md = Vec::new();
        let mut mi = Vec::new();
        for &(i, j) in &pairs {
            md.push(mid(dom[i], dom[j]));
            mi.push(mid(img[i], img[j]));
        }
        // vertices: 0..3 original, 4..9 edge midpoints in `pairs` order
        let vd: Vec<Pt> = dom.iter().cloned().chain(md).collect();
        let vi: Vec<Pt> = img.iter().cloned().chain(mi).collect();
        let tets = [
            [0, 4, 5, 6],
            [1, 4, 7, 8],
            [2, 5, 7, 9],
            [3, 6, 8, 9],
            [4, 5, 6, 8],
            [4, 5, 7, 8],
            [5, 6, 8, 9],
            [5, 7, 8, 9],
        ];
        tets.iter()
            .map(|t| {
                (
                    t.iter().map(|&k| vd[k]).collect(),
                    t.iter().map(|&k| vi[k]).collect(),
                )
            })
            .collect()
    }
}

fn quadrature(map: &PLMap, simplex: usize, dim: usize, dom: &[Pt], det: f64, h: &MollifierSpec) -> f64 {
    let vol = crate::mesh::signed_volume(dim, dom).abs();
    if vol == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    if dim == 2 {
        // Dunavant degree-4 rule, 6 points
        const A1: f64 = 0.445948490915965;
        const B1: f64 = 0.108103018168070;
        const W1: f64 = 0.223381589678011;
        const A2: f64 = 0.091576213509771;
        const B2: f64 = 0.816847572980459;
        const W2: f64 = 0.109951743655322;
        let pts = [
            ([B1, A1, A1], W1),
            ([A1, B1, A1], W1),
            ([A1, A1, B1], W1),
            ([B2, A2, A2], W2),
            ([A2, B2, A2], W2),
            ([A2, A2, B2], W2),
        ];
        for (bc, w) in pts {
            let x = bary_point(dom, &bc);
            let y = map.eval_in_simplex(simplex, x);
            acc += w * h.eval(y, dim) * det;
        }
    } else {
        // degree-3 rule, 5 points (centroid with negative weight)
        let c = [0.25, 0.25, 0.25, 0.25];
        let x = bary_point(dom, &c);
        acc += -0.8 * h.eval(map.eval_in_simplex(simplex, x), dim) * det;
        for i in 0..4 {
            let mut bc = [1.0 / 6.0; 4];
            bc[i] = 0.5;
            let x = bary_point(dom, &bc);
            acc += 0.45 * h.eval(map.eval_in_simplex(simplex, x), dim) * det;
        }
    }
    acc * vol
}

fn bary_point(dom: &[Pt], bc: &[f64]) -> Pt {
    let mut p = [0.0; 3];
    for (v, &w) in dom.iter().zip(bc.iter()) {
        p = crate::linalg::axpy(p, w, *v);
    }
    p
}

/// Default grid resolution for the region arrangement.
pub fn default_field_resolution(dim: usize) -> usize {
    if dim == 2 {
        256
    } else {
        96
    }
}

/// Classify the whole complement of the image boundary into regions with one
/// integer degree per region, by evaluating the boundary route at up to 3
/// deep representatives per region.
pub fn degree_field(map: &PLMap, a: &Submesh, resolution: usize) -> Result<DegreeReport> {
    let facets = map.image_boundary_facets(a);
    let (lo, hi) = map.image_bbox();
    let grid = BackgroundGrid::around(map.dim(), lo, hi, &facets, resolution);
    let regions = grid.flood_regions(3);
    let mut degrees = Vec::with_capacity(regions.count());
    for r in 0..regions.count() {
        let mut values = Vec::new();
        for &rep in &regions.representatives[r] {
            match degree_boundary(map, a, rep) {
                Ok(v) => values.push(v),
                Err(CoreError::OnImageBoundary { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        if values.is_empty() {
            return Err(CoreError::InconsistentRegion {
                details: format!("region {r} has no representative off the image boundary"),
            });
        }
        if values.windows(2).any(|w| w[0] != w[1]) {
            return Err(CoreError::InconsistentRegion {
                details: format!("region {r} representatives disagree: {values:?}"),
            });
        }
        degrees.push(values[0]);
    }
    let nonzero: Vec<i64> = degrees.iter().cloned().filter(|&d| d != 0).collect();
    let sigma = if nonzero.is_empty() {
        Sigma::Empty
    } else if nonzero.windows(2).all(|w| w[0] == w[1]) {
        Sigma::Uniform(nonzero[0])
    } else {
        Sigma::Mixed
    };
    Ok(DegreeReport {
        regions,
        degrees,
        sigma,
        resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mesh::SimplicialMesh;
    use std::sync::Arc;

    fn square_map() -> PLMap {
        let mesh = Arc::new(
            SimplicialMesh::build(
                2,
                vec![
                    [0.0, 0.0, 0.0],
                    [1.0, 0.0, 0.0],
                    [1.0, 1.0, 0.0],
                    [0.0, 1.0, 0.0],
                    [0.5, 0.5, 0.0],
                ],
                vec![
                    vec![0, 1, 4],
                    vec![1, 2, 4],
                    vec![2, 3, 4],
                    vec![3, 0, 4],
                ],
            )
            .unwrap(),
        );
        PLMap::identity(mesh)
    }

    #[test]
    fn identity_degree_one_inside_zero_outside() {
        let map = square_map();
        let a = map.mesh.full_submesh();
        let z = [0.4, 0.3, 0.0];
        assert_eq!(degree_regular_sum(&map, &a, z).unwrap(), 1);
        assert_eq!(degree_boundary(&map, &a, z).unwrap(), 1);
        let out = [2.0, 2.0, 0.0];
        assert_eq!(degree_regular_sum(&map, &a, out).unwrap(), 0);
        assert_eq!(degree_boundary(&map, &a, out).unwrap(), 0);
    }

    #[test]
    fn reflection_gives_minus_one() {
        let map = square_map();
        let images = map
            .images
            .iter()
            .map(|p| [p[0], -p[1], 0.0])
            .collect::<Vec<_>>();
        let rmap = map.with_images(images).unwrap();
        let a = rmap.mesh.full_submesh();
        let z = [0.4, -0.3, 0.0];
        assert_eq!(degree_regular_sum(&rmap, &a, z).unwrap(), -1);
        assert_eq!(degree_boundary(&rmap, &a, z).unwrap(), -1);
    }

    #[test]
    fn on_image_boundary_rejected() {
        let map = square_map();
        let a = map.mesh.full_submesh();
        assert!(matches!(
            degree_boundary(&map, &a, [0.5, 0.0, 0.0]),
            Err(CoreError::OnImageBoundary { .. })
        ));
    }

    #[test]
    fn identity_field_two_regions() {
        let map = square_map();
        let a = map.mesh.full_submesh();
        let report = degree_field(&map, &a, 128).unwrap();
        assert_eq!(report.degrees.len(), 2);
        let mut sorted = report.degrees.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1]);
        assert_eq!(report.sigma, Sigma::Uniform(1));
    }

    #[test]
    fn identity_integral_near_one() {
        let mesh = fixtures::square_grid_mesh(4, [0.0, 0.0, 0.0], 1.0);
        let map = PLMap::identity(Arc::new(mesh));
        let a = map.mesh.full_submesh();
        let h = MollifierSpec {
            center: [0.5, 0.5, 0.0],
            radius: 0.1,
        };
        let v = degree_integral(&map, &a, [0.5, 0.5, 0.0], &h).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "integral {v}");
    }

    #[test]
    fn tet_solid_angle_degree() {
        let mesh = Arc::new(
            SimplicialMesh::build(
                3,
                vec![
                    [0.0, 0.0, 0.0],
                    [1.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0],
                    [0.0, 0.0, 1.0],
                ],
                vec![vec![0, 1, 2, 3]],
            )
            .unwrap(),
        );
        let map = PLMap::identity(mesh);
        let a = map.mesh.full_submesh();
        let z = [0.2, 0.2, 0.2];
        assert_eq!(degree_boundary(&map, &a, z).unwrap(), 1);
        assert_eq!(degree_regular_sum(&map, &a, z).unwrap(), 1);
        assert_eq!(degree_boundary(&map, &a, [2.0, 2.0, 2.0]).unwrap(), 0);
    }
}
