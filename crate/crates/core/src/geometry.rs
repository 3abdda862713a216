//! Geometric predicates and small exact algorithms shared by the mesh,
//! degree and condition modules.

use crate::linalg::{add, axpy, cross, cross2, dist, dot, norm, scale, sub, Pt};

/// Distance from a point to a closed segment.
pub fn point_segment_dist(p: Pt, a: Pt, b: Pt) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, axpy(a, t, ab))
}

/// Distance from a point to a closed triangle in 3D.
pub fn point_triangle_dist(p: Pt, a: Pt, b: Pt, c: Pt) -> f64 {
    // Project onto the triangle plane, then classify against the edges.
    let ab = sub(b, a);
    let ac = sub(c, a);
    let n = cross(ab, ac);
    let n2 = dot(n, n);
    if n2 == 0.0 {
        // degenerate triangle, fall back to edges
        return point_segment_dist(p, a, b)
            .min(point_segment_dist(p, b, c))
            .min(point_segment_dist(p, c, a));
    }
    let ap = sub(p, a);
    let h = dot(ap, n) / n2;
    let proj = axpy(p, -h, n);
    // barycentric coordinates of the projection
    let d00 = dot(ab, ab);
    let d01 = dot(ab, ac);
    let d11 = dot(ac, ac);
    let pv = sub(proj, a);
    let d20 = dot(pv, ab);
    let d21 = dot(pv, ac);
    let denom = d00 * d11 - d01 * d01;
    let v = (d11 * d20 - d01 * d21) / denom;
    let w = (d00 * d21 - d01 * d20) / denom;
    if v >= 0.0 && w >= 0.0 && v + w <= 1.0 {
        return dot(ap, n).abs() / n2.sqrt();
    }
    point_segment_dist(p, a, b)
        .min(point_segment_dist(p, b, c))
        .min(point_segment_dist(p, c, a))
}

/// Orientation of `c` relative to the directed line `a -> b` (2D, z ignored).
#[inline]
pub fn orient2d(a: Pt, b: Pt, c: Pt) -> f64 {
    cross2(sub(b, a), sub(c, a))
}

/// Do the closed segments [a,b] and [c,d] intersect (2D)?
pub fn segments_intersect(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Pt, q: Pt, r: Pt, o: f64| -> bool {
        o == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// Closest distance between two segments in 2D (0 if they intersect).
pub fn segment_segment_dist(a: Pt, b: Pt, c: Pt, d: Pt) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

/// Axis-aligned box overlap test for a segment (2D). The box is given by its
/// min corner and edge length `h` in x and y.
pub fn segment_cell_overlap(a: Pt, b: Pt, lo: Pt, h: f64) -> bool {
    let hi = [lo[0] + h, lo[1] + h, 0.0];
    // quick reject on bounding boxes
    if a[0].max(b[0]) < lo[0]
        || a[0].min(b[0]) > hi[0]
        || a[1].max(b[1]) < lo[1]
        || a[1].min(b[1]) > hi[1]
    {
        return false;
    }
    // segment fully inside
    let inside = |p: Pt| p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1];
    if inside(a) || inside(b) {
        return true;
    }
    let c00 = lo;
    let c10 = [hi[0], lo[1], 0.0];
    let c11 = [hi[0], hi[1], 0.0];
    let c01 = [lo[0], hi[1], 0.0];
    segments_intersect(a, b, c00, c10)
        || segments_intersect(a, b, c10, c11)
        || segments_intersect(a, b, c11, c01)
        || segments_intersect(a, b, c01, c00)
}

/// Separating-axis overlap test between a triangle and an axis-aligned cube
/// (min corner `lo`, edge `h`).
pub fn triangle_cell_overlap(tri: [Pt; 3], lo: Pt, h: f64) -> bool {
    let half = h * 0.5;
    let center = [lo[0] + half, lo[1] + half, lo[2] + half];
    let v: Vec<Pt> = tri.iter().map(|p| sub(*p, center)).collect();
    let e = [sub(v[1], v[0]), sub(v[2], v[1]), sub(v[0], v[2])];

    // box axes
    for ax in 0..3 {
        let mn = v[0][ax].min(v[1][ax]).min(v[2][ax]);
        let mx = v[0][ax].max(v[1][ax]).max(v[2][ax]);
        if mn > half || mx < -half {
            return false;
        }
    }
    // triangle normal
    let n = cross(e[0], e[1]);
    let d = dot(n, v[0]);
    let r = half * (n[0].abs() + n[1].abs() + n[2].abs());
    if d.abs() > r {
        return false;
    }
    // cross-product axes
    let units: [Pt; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for edge in &e {
        for u in &units {
            let axis = cross(*u, *edge);
            if norm(axis) < 1e-30 {
                continue;
            }
            let p0 = dot(axis, v[0]);
            let p1 = dot(axis, v[1]);
            let p2 = dot(axis, v[2]);
            let mn = p0.min(p1).min(p2);
            let mx = p0.max(p1).max(p2);
            let rr = half * (axis[0].abs() + axis[1].abs() + axis[2].abs());
            if mn > rr || mx < -rr {
                return false;
            }
        }
    }
    true
}

/// Moller-style triangle/triangle intersection test in 3D.
/// Returns true if the closed triangles share any point.
pub fn triangles_intersect_3d(t1: [Pt; 3], t2: [Pt; 3]) -> bool {
    let n1 = cross(sub(t1[1], t1[0]), sub(t1[2], t1[0]));
    let d1 = -dot(n1, t1[0]);
    let dv2: Vec<f64> = t2.iter().map(|p| dot(n1, *p) + d1).collect();
    if dv2.iter().all(|d| *d > 0.0) || dv2.iter().all(|d| *d < 0.0) {
        return false;
    }
    let n2 = cross(sub(t2[1], t2[0]), sub(t2[2], t2[0]));
    let d2 = -dot(n2, t2[0]);
    let dv1: Vec<f64> = t1.iter().map(|p| dot(n2, *p) + d2).collect();
    if dv1.iter().all(|d| *d > 0.0) || dv1.iter().all(|d| *d < 0.0) {
        return false;
    }
    let dir = cross(n1, n2);
    let len = norm(dir);
    if len < 1e-14 * (norm(n1) * norm(n2)).sqrt().max(1e-300) {
        // coplanar (or degenerate): project on the dominant axis of n1 and
        // run the 2D test
        return coplanar_tri_tri(t1, t2, n1);
    }
    let i1 = interval_on_line(t1, &dv1, dir);
    let i2 = interval_on_line(t2, &dv2, dir);
    match (i1, i2) {
        (Some((a0, a1)), Some((b0, b1))) => a1 >= b0 && b1 >= a0,
        _ => false,
    }
}

fn interval_on_line(t: [Pt; 3], d: &[f64], dir: Pt) -> Option<(f64, f64)> {
    // projections of vertices onto the intersection line direction
    let p: Vec<f64> = t.iter().map(|v| dot(dir, *v)).collect();
    // find the vertex on the opposite side
    let mut ts = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            if d[i] * d[j] < 0.0 || (d[i] == 0.0) != (d[j] == 0.0) {
                let denom = d[i] - d[j];
                if denom != 0.0 {
                    let t = d[i] / denom;
                    ts.push(p[i] + t * (p[j] - p[i]));
                }
            } else if d[i] == 0.0 && d[j] == 0.0 {
                ts.push(p[i]);
                ts.push(p[j]);
            }
        }
    }
    for i in 0..3 {
        if d[i] == 0.0 {
            ts.push(p[i]);
        }
    }
    if ts.is_empty() {
        return None;
    }
    let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some((lo, hi))
}

fn coplanar_tri_tri(t1: [Pt; 3], t2: [Pt; 3], n: Pt) -> bool {
    // project out the dominant normal axis
    let ax = if n[0].abs() >= n[1].abs() && n[0].abs() >= n[2].abs() {
        (1, 2)
    } else if n[1].abs() >= n[2].abs() {
        (0, 2)
    } else {
        (0, 1)
    };
    let proj = |p: Pt| -> Pt { [p[ax.0], p[ax.1], 0.0] };
    let a: Vec<Pt> = t1.iter().map(|p| proj(*p)).collect();
    let b: Vec<Pt> = t2.iter().map(|p| proj(*p)).collect();
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle_2d(a[0], [b[0], b[1], b[2]]) || point_in_triangle_2d(b[0], [a[0], a[1], a[2]])
}

/// Closed-triangle containment in 2D.
pub fn point_in_triangle_2d(p: Pt, t: [Pt; 3]) -> bool {
    let d1 = orient2d(t[0], t[1], p);
    let d2 = orient2d(t[1], t[2], p);
    let d3 = orient2d(t[2], t[0], p);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Exact area of the union of a set of (possibly overlapping, possibly
/// inverted) triangles in the plane, by a vertical slab sweep.
///
/// Critical abscissae are all vertex x-coordinates plus all pairwise edge
/// intersection x-coordinates; inside each open slab the interval structure
/// of the triangle cross-sections is combinatorially constant, so the union
/// length is linear in x and the midpoint rule integrates it exactly.
pub fn triangle_union_area(tris: &[[Pt; 3]]) -> f64 {
    if tris.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut edges: Vec<(Pt, Pt)> = Vec::new();
    for t in tris {
        for i in 0..3 {
            xs.push(t[i][0]);
            edges.push((t[i], t[(i + 1) % 3]));
        }
    }
    for i in 0..edges.len() {
        for j in (i + 1)..edges.len() {
            if let Some(x) = edge_intersection_x(edges[i], edges[j]) {
                xs.push(x);
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let mut area = 0.0;
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let width = x1 - x0;
        if width <= 0.0 {
            continue;
        }
        let xm = 0.5 * (x0 + x1);
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for t in tris {
            if let Some(iv) = triangle_vertical_section(t, xm) {
                intervals.push(iv);
            }
        }
        area += union_length(&mut intervals) * width;
    }
    area
}

fn edge_intersection_x(e1: (Pt, Pt), e2: (Pt, Pt)) -> Option<f64> {
    let (a, b) = e1;
    let (c, d) = e2;
    let r = sub(b, a);
    let s = sub(d, c);
    let denom = cross2(r, s);
    if denom == 0.0 {
        return None;
    }
    let t = cross2(sub(c, a), s) / denom;
    let u = cross2(sub(c, a), r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some(a[0] + t * r[0])
    } else {
        None
    }
}

/// Intersection of the vertical line x = `x` with a triangle, as a y-interval.
fn triangle_vertical_section(t: &[Pt; 3], x: f64) -> Option<(f64, f64)> {
    let mut ys: Vec<f64> = Vec::new();
    for i in 0..3 {
        let (a, b) = (t[i], t[(i + 1) % 3]);
        let (x0, x1) = (a[0], b[0]);
        if (x0 - x) * (x1 - x) <= 0.0 && x0 != x1 {
            let s = (x - x0) / (x1 - x0);
            if (0.0..=1.0).contains(&s) {
                ys.push(a[1] + s * (b[1] - a[1]));
            }
        }
    }
    if ys.len() < 2 {
        return None;
    }
    let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        Some((lo, hi))
    } else {
        None
    }
}

fn union_length(intervals: &mut Vec<(f64, f64)>) -> f64 {
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &(lo, hi) in intervals.iter() {
        match cur {
            None => cur = Some((lo, hi)),
            Some((clo, chi)) => {
                if lo <= chi {
                    cur = Some((clo, chi.max(hi)));
                } else {
                    total += chi - clo;
                    cur = Some((lo, hi));
                }
            }
        }
    }
    if let Some((clo, chi)) = cur {
        total += chi - clo;
    }
    total
}

/// Euclidean projection onto a convex polygon given by CCW vertices (2D).
pub fn project_convex_polygon(p: Pt, poly: &[Pt]) -> Pt {
    let n = poly.len();
    let inside = (0..n).all(|i| orient2d(poly[i], poly[(i + 1) % n], p) >= 0.0);
    if inside {
        return p;
    }
    let mut best = poly[0];
    let mut best_d = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let ab = sub(b, a);
        let t = (dot(sub(p, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
        let q = axpy(a, t, ab);
        let d = dist(p, q);
        if d < best_d {
            best_d = d;
            best = q;
        }
    }
    best
}

/// Euclidean projection onto an axis-aligned box [lo, hi] (any dimension).
pub fn project_box(p: Pt, lo: Pt, hi: Pt, dim: usize) -> Pt {
    let mut q = p;
    for i in 0..dim {
        q[i] = q[i].clamp(lo[i], hi[i]);
    }
    q
}

/// First positive hit of the ray `origin + t dir` against a segment, if any.
pub fn ray_segment_hit(origin: Pt, dir: Pt, a: Pt, b: Pt) -> Option<f64> {
    let s = sub(b, a);
    let denom = cross2(dir, s);
    if denom == 0.0 {
        return None;
    }
    let ao = sub(a, origin);
    let t = cross2(ao, s) / denom;
    let u = cross2(ao, dir) / denom;
    if t > 1e-12 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

pub fn centroid(pts: &[Pt]) -> Pt {
    let mut c = [0.0; 3];
    for p in pts {
        c = add(c, *p);
    }
    scale(c, 1.0 / pts.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_area_two_disjoint_triangles() {
        let t1 = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let t2 = [[2.0, 0.0, 0.0], [3.0, 0.0, 0.0], [2.0, 1.0, 0.0]];
        let a = triangle_union_area(&[t1, t2]);
        assert!((a - 1.0).abs() < 1e-12, "area {a}");
    }

    #[test]
    fn union_area_coincident_triangles() {
        let t = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let a = triangle_union_area(&[t, t, t]);
        assert!((a - 2.0).abs() < 1e-12, "area {a}");
    }

    #[test]
    fn union_area_square_from_two_triangles() {
        let t1 = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]];
        let t2 = [[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let a = triangle_union_area(&[t1, t2]);
        assert!((a - 1.0).abs() < 1e-12, "area {a}");
    }

    #[test]
    fn union_area_partial_overlap() {
        // two unit right triangles overlapping in a smaller triangle
        let t1 = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let t2 = [[1.0, 0.0, 0.0], [3.0, 0.0, 0.0], [1.0, 2.0, 0.0]];
        // union = 2 + 2 - overlap; overlap is triangle (1,0)-(2,0)-(1,1) = 0.5
        let a = triangle_union_area(&[t1, t2]);
        assert!((a - 3.5).abs() < 1e-12, "area {a}");
    }

    #[test]
    fn segment_tests() {
        let a = [0.0, 0.0, 0.0];
        let b = [1.0, 1.0, 0.0];
        let c = [0.0, 1.0, 0.0];
        let d = [1.0, 0.0, 0.0];
        assert!(segments_intersect(a, b, c, d));
        assert!(!segments_intersect(a, d, c, b));
        assert!(segments_intersect(a, b, b, [2.0, 2.0, 0.0])); // shared endpoint
    }

    #[test]
    fn tri_tri_3d() {
        let t1 = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let t2 = [
            [0.2, 0.2, -0.5],
            [0.2, 0.2, 0.5],
            [0.8, 0.8, 0.0],
        ];
        assert!(triangles_intersect_3d(t1, t2));
        let t3 = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
        assert!(!triangles_intersect_3d(t1, t3));
    }

    #[test]
    fn point_triangle_distance_3d() {
        let (a, b, c) = (
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        );
        assert!((point_triangle_dist([0.25, 0.25, 1.0], a, b, c) - 1.0).abs() < 1e-12);
        assert!((point_triangle_dist([2.0, 0.0, 0.0], a, b, c) - 1.0).abs() < 1e-12);
    }
}
