//! Simplicial meshes of bounded polyhedral domains in R^2 / R^3:
//! construction and validation, boundary extraction, complement
//! decomposition, inner coverings and point location.

use std::collections::HashMap;

use crate::error::{CoreError, Result};
use crate::geometry::{point_segment_dist, point_triangle_dist};
use crate::grid::{BackgroundGrid, RegionSet};
use crate::linalg::{det, from_columns, solve, sub, Pt};

/// Up to 4 vertex indices; the unused slots are `usize::MAX`.
pub type SimplexVerts = [usize; 4];

/// An oriented facet of the boundary of a mesh or submesh. The vertex order
/// carries the induced outward orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedFacet {
    pub verts: [usize; 3],
    /// Simplex this facet belongs to.
    pub simplex: usize,
}

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    pub dim: usize,
    pub vertices: Vec<Pt>,
    pub simplices: Vec<SimplexVerts>,
    pub boundary_facets: Vec<OrientedFacet>,
    /// Neighbor across the facet opposite local vertex `i`, if any.
    pub adjacency: Vec<[Option<usize>; 4]>,
    bbox: (Pt, Pt),
}

fn factorial(d: usize) -> f64 {
    (1..=d).product::<usize>() as f64
}

/// Signed volume of the simplex with the given vertex tuple.
pub fn signed_volume(dim: usize, pts: &[Pt]) -> f64 {
    let cols: Vec<Pt> = (1..=dim).map(|i| sub(pts[i], pts[0])).collect();
    det(&from_columns(&cols, dim), dim) / factorial(dim)
}

/// Sorted facet key for hashing.
fn facet_key(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

/// Facet of `verts` opposite local vertex `i`, with the induced outward
/// orientation (boundary operator sign (-1)^i realized by a swap).
pub fn opposite_facet(dim: usize, verts: &SimplexVerts, i: usize) -> [usize; 3] {
    let mut f = [usize::MAX; 3];
    let mut k = 0;
    for (j, &v) in verts.iter().enumerate().take(dim + 1) {
        if j != i {
            f[k] = v;
            k += 1;
        }
    }
    if i % 2 == 1 {
        f.swap(0, 1);
    }
    f
}

impl SimplicialMesh {
    /// Validate and build a mesh. Simplex vertex tuples are reordered so that
    /// every signed volume is strictly positive.
    pub fn build(dim: usize, vertices: Vec<Pt>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(CoreError::BadDimension(dim));
        }
        if simplices.is_empty() {
            return Err(CoreError::EmptyMesh);
        }
        let mut bbox_lo = [f64::INFINITY; 3];
        let mut bbox_hi = [f64::NEG_INFINITY; 3];
        for v in &vertices {
            for k in 0..dim {
                bbox_lo[k] = bbox_lo[k].min(v[k]);
                bbox_hi[k] = bbox_hi[k].max(v[k]);
            }
        }
        for k in dim..3 {
            bbox_lo[k] = 0.0;
            bbox_hi[k] = 0.0;
        }
        let diag = crate::linalg::dist(bbox_hi, bbox_lo);
        let tau_vol = 1e-12 * diag.powi(dim as i32);

        let mut sx: Vec<SimplexVerts> = Vec::with_capacity(simplices.len());
        for (si, tuple) in simplices.iter().enumerate() {
            if tuple.len() != dim + 1 {
                return Err(CoreError::Parse(format!(
                    "simplex {si} has {} vertices, expected {}",
                    tuple.len(),
                    dim + 1
                )));
            }
            let mut verts = [usize::MAX; 4];
            for (k, &vi) in tuple.iter().enumerate() {
                if vi >= vertices.len() {
                    return Err(CoreError::IndexOutOfRange {
                        index: vi,
                        len: vertices.len(),
                    });
                }
                verts[k] = vi;
            }
            let pts: Vec<Pt> = tuple.iter().map(|&vi| vertices[vi]).collect();
            let mut vol = signed_volume(dim, &pts);
            if vol < 0.0 {
                verts.swap(0, 1);
                vol = -vol;
            }
            if vol <= tau_vol {
                return Err(CoreError::DegenerateSimplex {
                    index: si,
                    volume: vol,
                });
            }
            sx.push(verts);
        }

        // facet incidence
        let mut facet_map: HashMap<[usize; 3], Vec<(usize, usize)>> = HashMap::new();
        for (si, verts) in sx.iter().enumerate() {
            for i in 0..=dim {
                let f = opposite_facet(dim, verts, i);
                facet_map.entry(facet_key(f)).or_default().push((si, i));
            }
        }
        let mut boundary = Vec::new();
        let mut adjacency = vec![[None; 4]; sx.len()];
        for owners in facet_map.values() {
            match owners.len() {
                1 => {
                    let (si, i) = owners[0];
                    boundary.push(OrientedFacet {
                        verts: opposite_facet(dim, &sx[si], i),
                        simplex: si,
                    });
                }
                2 => {
                    let (s0, i0) = owners[0];
                    let (s1, i1) = owners[1];
                    adjacency[s0][i0] = Some(s1);
                    adjacency[s1][i1] = Some(s0);
                }
                n => return Err(CoreError::NonManifold { count: n }),
            }
        }
        boundary.sort_by_key(|f| (f.simplex, f.verts));

        // connectivity of the simplex adjacency graph
        let mut seen = vec![false; sx.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(s) = stack.pop() {
            for nb in adjacency[s].iter().flatten() {
                if !seen[*nb] {
                    seen[*nb] = true;
                    count += 1;
                    stack.push(*nb);
                }
            }
        }
        if count != sx.len() {
            // count the components for the error message
            let mut comps = 1;
            for s in 0..sx.len() {
                if !seen[s] {
                    comps += 1;
                    let mut stack = vec![s];
                    seen[s] = true;
                    while let Some(t) = stack.pop() {
                        for nb in adjacency[t].iter().flatten() {
                            if !seen[*nb] {
                                seen[*nb] = true;
                                stack.push(*nb);
                            }
                        }
                    }
                }
            }
            return Err(CoreError::Disconnected { components: comps });
        }

        Ok(SimplicialMesh {
            dim,
            vertices,
            simplices: sx,
            boundary_facets: boundary,
            adjacency,
            bbox: (bbox_lo, bbox_hi),
        })
    }

    pub fn bbox(&self) -> (Pt, Pt) {
        self.bbox
    }

    pub fn bbox_diag(&self) -> f64 {
        crate::linalg::dist(self.bbox.1, self.bbox.0)
    }

    /// Relative geometric tolerance.
    pub fn tau_geom(&self) -> f64 {
        1e-9 * self.bbox_diag()
    }

    pub fn tau_vol(&self) -> f64 {
        1e-12 * self.bbox_diag().powi(self.dim as i32)
    }

    pub fn simplex_vertices(&self, s: usize) -> &[usize] {
        &self.simplices[s][..=self.dim]
    }

    pub fn simplex_points(&self, s: usize) -> Vec<Pt> {
        self.simplex_vertices(s)
            .iter()
            .map(|&v| self.vertices[v])
            .collect()
    }

    pub fn simplex_volume(&self, s: usize) -> f64 {
        signed_volume(self.dim, &self.simplex_points(s))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.simplices.len())
            .map(|s| self.simplex_volume(s))
            .sum()
    }

    pub fn simplex_centroid(&self, s: usize) -> Pt {
        crate::geometry::centroid(&self.simplex_points(s))
    }

    /// Full mesh as a submesh.
    pub fn full_submesh(&self) -> Submesh {
        Submesh::new(self, (0..self.simplices.len()).collect())
    }

    /// Barycentric coordinates of `z` with respect to simplex `s`
    /// (the first coordinate is 1 - sum of the others).
    pub fn barycentric(&self, s: usize, z: Pt) -> Option<Pt> {
        let pts = self.simplex_points(s);
        let cols: Vec<Pt> = (1..=self.dim).map(|i| sub(pts[i], pts[0])).collect();
        let m = from_columns(&cols, self.dim);
        solve(&m, sub(z, pts[0]), self.dim, 0.0)
    }

    /// Locate the simplex containing `z` (ties broken by lowest index).
    pub fn locate_point(&self, z: Pt) -> Location {
        let tol = 1e-12;
        for s in 0..self.simplices.len() {
            if let Some(b) = self.barycentric(s, z) {
                let b0 = 1.0 - (0..self.dim).map(|i| b[i]).sum::<f64>();
                if b0 >= -tol && (0..self.dim).all(|i| b[i] >= -tol) {
                    let on_boundary = self.dist_to_boundary(z) <= self.tau_geom();
                    return Location::Inside {
                        simplex: s,
                        on_boundary_facet: on_boundary,
                    };
                }
            }
        }
        Location::Outside
    }

    /// Distance from a point to the boundary polyhedron.
    pub fn dist_to_boundary(&self, p: Pt) -> f64 {
        let mut best = f64::INFINITY;
        for f in &self.boundary_facets {
            let d = if self.dim == 2 {
                point_segment_dist(p, self.vertices[f.verts[0]], self.vertices[f.verts[1]])
            } else {
                point_triangle_dist(
                    p,
                    self.vertices[f.verts[0]],
                    self.vertices[f.verts[1]],
                    self.vertices[f.verts[2]],
                )
            };
            best = best.min(d);
        }
        best
    }

    /// Connected regions of the complement of the boundary polyhedron,
    /// via flood fill on a background grid.
    pub fn complement_components(&self) -> ComplementDecomposition {
        let facets: Vec<Vec<Pt>> = self
            .boundary_facets
            .iter()
            .map(|f| {
                f.verts[..self.dim]
                    .iter()
                    .map(|&v| self.vertices[v])
                    .collect()
            })
            .collect();
        let grid = BackgroundGrid::around(self.dim, self.bbox.0, self.bbox.1, &facets, 256);
        let regions = grid.flood_regions(3);
        let bounded: Vec<usize> = (0..regions.count())
            .filter(|&r| Some(r) != regions.unbounded())
            .collect();
        ComplementDecomposition {
            regions,
            bounded_components: bounded,
        }
    }

    /// Regular inner covering by distance thresholds delta_m = D/(m+1).
    pub fn inner_covering(&self, level_count: usize) -> Result<InnerCovering> {
        assert!(level_count >= 1);
        let vdist: Vec<f64> = self
            .vertices
            .iter()
            .map(|&v| self.dist_to_boundary(v))
            .collect();
        let dmax = vdist.iter().cloned().fold(0.0f64, f64::max);
        let full_count = self.complement_components().component_count();
        let mut levels = Vec::new();
        let mut offsets = Vec::new();
        let mut inherits = Vec::new();
        for m in 1..=level_count {
            let delta = dmax / (m as f64 + 1.0);
            let simplices: Vec<usize> = (0..self.simplices.len())
                .filter(|&s| {
                    self.simplex_vertices(s)
                        .iter()
                        .all(|&v| vdist[v] >= delta && vdist[v] > 0.0)
                })
                .collect();
            if simplices.is_empty() {
                return Err(CoreError::EmptyLevel {
                    level: m,
                    offset: delta,
                });
            }
            let sub = Submesh::new(self, simplices);
            let inherited = {
                let facets = sub.boundary_facet_points(self);
                let grid = BackgroundGrid::around(self.dim, self.bbox.0, self.bbox.1, &facets, 256);
                grid.flood_regions(3).count() == full_count
            };
            levels.push(sub);
            offsets.push(delta);
            inherits.push(inherited);
        }
        Ok(InnerCovering {
            levels,
            offsets,
            inherits_complement_count: inherits,
        })
    }
}

/// Result of point location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside {
        simplex: usize,
        on_boundary_facet: bool,
    },
    Outside,
}

/// Decomposition of R^d minus the boundary polyhedron into connected
/// regions on a background grid.
#[derive(Debug, Clone)]
pub struct ComplementDecomposition {
    pub regions: RegionSet,
    pub bounded_components: Vec<usize>,
}

impl ComplementDecomposition {
    pub fn component_count(&self) -> usize {
        self.regions.count()
    }

    pub fn has_two_components(&self) -> bool {
        self.component_count() == 2
    }
}

/// A subset of the simplices of a parent mesh, treated as an open
/// sub-polyhedron.
#[derive(Debug, Clone)]
pub struct Submesh {
    pub simplices: Vec<usize>,
    member: Vec<bool>,
}

impl Submesh {
    pub fn new(mesh: &SimplicialMesh, mut simplices: Vec<usize>) -> Self {
        simplices.sort_unstable();
        simplices.dedup();
        let mut member = vec![false; mesh.simplices.len()];
        for &s in &simplices {
            member[s] = true;
        }
        Submesh { simplices, member }
    }

    pub fn contains_simplex(&self, s: usize) -> bool {
        self.member[s]
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Oriented boundary facets of the subset: facets of member simplices
    /// whose neighbor is absent or not a member.
    pub fn boundary_facets(&self, mesh: &SimplicialMesh) -> Vec<OrientedFacet> {
        let mut out = Vec::new();
        for &s in &self.simplices {
            for i in 0..=mesh.dim {
                let keep = match mesh.adjacency[s][i] {
                    Some(nb) => !self.member[nb],
                    None => true,
                };
                if keep {
                    out.push(OrientedFacet {
                        verts: opposite_facet(mesh.dim, &mesh.simplices[s], i),
                        simplex: s,
                    });
                }
            }
        }
        out
    }

    pub fn boundary_facet_points(&self, mesh: &SimplicialMesh) -> Vec<Vec<Pt>> {
        self.boundary_facets(mesh)
            .iter()
            .map(|f| {
                f.verts[..mesh.dim]
                    .iter()
                    .map(|&v| mesh.vertices[v])
                    .collect()
            })
            .collect()
    }

    /// Vertices used by member simplices.
    pub fn vertex_set(&self, mesh: &SimplicialMesh) -> Vec<usize> {
        let mut seen = vec![false; mesh.vertices.len()];
        for &s in &self.simplices {
            for &v in mesh.simplex_vertices(s) {
                seen[v] = true;
            }
        }
        (0..mesh.vertices.len()).filter(|&v| seen[v]).collect()
    }

    pub fn volume(&self, mesh: &SimplicialMesh) -> f64 {
        self.simplices.iter().map(|&s| mesh.simplex_volume(s)).sum()
    }

    /// Is the subset contained in `other`?
    pub fn subset_of(&self, other: &Submesh) -> bool {
        self.simplices.iter().all(|&s| other.member[s])
    }
}

/// Nested family of submeshes strictly inside the domain.
#[derive(Debug, Clone)]
pub struct InnerCovering {
    pub levels: Vec<Submesh>,
    pub offsets: Vec<f64>,
    /// Per level: does the level's complement have the same number of
    /// components as the full mesh's?
    pub inherits_complement_count: Vec<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn unit_square() -> SimplicialMesh {
        SimplicialMesh::build(
            2,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_boundary() {
        let m = unit_square();
        assert_eq!(m.boundary_facets.len(), 4);
        // one interior facet: the diagonal, shared by both triangles
        assert_eq!(
            m.adjacency.iter().flatten().filter(|a| a.is_some()).count(),
            2
        );
        assert!((m.total_volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orientation_normalized() {
        // deliberately clockwise triangle
        let m = SimplicialMesh::build(
            2,
            vec![[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert!(m.simplex_volume(0) > 0.0);
    }

    #[test]
    fn degenerate_simplex_rejected() {
        let r = SimplicialMesh::build(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]],
            vec![vec![0, 1, 1]],
        );
        assert!(matches!(r, Err(CoreError::DegenerateSimplex { .. })));
    }

    #[test]
    fn nonmanifold_rejected() {
        // three triangles sharing the same edge 0-1
        let r = SimplicialMesh::build(
            3,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [1.0, 1.0, 1.0],
                [-1.0, -1.0, 1.0],
            ],
            vec![vec![0, 1, 2, 3], vec![0, 1, 2, 4], vec![0, 1, 2, 5]],
        );
        assert!(matches!(r, Err(CoreError::NonManifold { .. })));
    }

    #[test]
    fn disconnected_rejected() {
        let r = SimplicialMesh::build(
            2,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [5.0, 5.0, 0.0],
                [6.0, 5.0, 0.0],
                [5.0, 6.0, 0.0],
            ],
            vec![vec![0, 1, 2], vec![3, 4, 5]],
        );
        assert!(matches!(r, Err(CoreError::Disconnected { .. })));
    }

    #[test]
    fn locate_centroid_and_outside() {
        let m = unit_square();
        let c = m.simplex_centroid(0);
        assert_eq!(
            m.locate_point(c),
            Location::Inside {
                simplex: 0,
                on_boundary_facet: false
            }
        );
        assert_eq!(m.locate_point([15.0, 15.0, 0.0]), Location::Outside);
        // point on the shared diagonal: lowest-index simplex wins
        match m.locate_point([0.5, 0.5, 0.0]) {
            Location::Inside {
                simplex,
                on_boundary_facet,
            } => {
                assert_eq!(simplex, 0);
                assert!(!on_boundary_facet);
            }
            _ => panic!("expected inside"),
        }
    }

    #[test]
    fn tet_mesh_builds() {
        let m = SimplicialMesh::build(
            3,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        assert_eq!(m.boundary_facets.len(), 4);
        assert!((m.total_volume() - 1.0 / 6.0).abs() < 1e-14);
    }
}
