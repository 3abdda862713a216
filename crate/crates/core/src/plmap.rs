//! Piecewise-affine deformations: one image point per vertex, affine on
//! each simplex, with exact per-simplex gradient, determinant and cofactor.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::linalg::{
    cofactor, det, from_columns, matmul, sub, transpose, Mat, Pt,
};
use crate::mesh::{SimplicialMesh, Submesh};

#[derive(Debug, Clone, Copy)]
pub struct SimplexDiff {
    pub grad: Mat,
    pub det: f64,
    pub cof: Mat,
}

#[derive(Debug, Clone)]
pub struct PLMap {
    pub mesh: Arc<SimplicialMesh>,
    pub images: Vec<Pt>,
    pub per_simplex: Vec<SimplexDiff>,
}

impl PLMap {
    pub fn new(mesh: Arc<SimplicialMesh>, images: Vec<Pt>) -> Result<Self> {
        if images.len() != mesh.vertices.len() {
            return Err(CoreError::Parse(format!(
                "deformation has {} images for {} vertices",
                images.len(),
                mesh.vertices.len()
            )));
        }
        let per_simplex = differentials(&mesh, &images);
        Ok(PLMap {
            mesh,
            images,
            per_simplex,
        })
    }

    pub fn identity(mesh: Arc<SimplicialMesh>) -> Self {
        let images = mesh.vertices.clone();
        let per_simplex = differentials(&mesh, &images);
        PLMap {
            mesh,
            images,
            per_simplex,
        }
    }

    /// Same mesh, new vertex images.
    pub fn with_images(&self, images: Vec<Pt>) -> Result<Self> {
        PLMap::new(self.mesh.clone(), images)
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    /// Image points of a simplex's vertices.
    pub fn image_simplex(&self, s: usize) -> Vec<Pt> {
        self.mesh
            .simplex_vertices(s)
            .iter()
            .map(|&v| self.images[v])
            .collect()
    }

    /// Evaluate the map at a point of simplex `s` (affine extension; the
    /// point need not lie inside).
    pub fn eval_in_simplex(&self, s: usize, x: Pt) -> Pt {
        let imgs = self.image_simplex(s);
        let b = self
            .mesh
            .barycentric(s, x)
            .expect("non-degenerate simplex");
        let b0 = 1.0 - (0..self.dim()).map(|i| b[i]).sum::<f64>();
        let mut out = crate::linalg::scale(imgs[0], b0);
        for i in 0..self.dim() {
            out = crate::linalg::axpy(out, b[i], imgs[i + 1]);
        }
        out
    }

    /// Bounding box of all vertex images.
    pub fn image_bbox(&self) -> (Pt, Pt) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.images {
            for k in 0..self.dim() {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        for k in self.dim()..3 {
            lo[k] = 0.0;
            hi[k] = 0.0;
        }
        (lo, hi)
    }

    pub fn image_bbox_diag(&self) -> f64 {
        let (lo, hi) = self.image_bbox();
        crate::linalg::dist(hi, lo)
    }

    /// Minimum distance tolerance for degree query values.
    pub fn tau_deg(&self) -> f64 {
        1e-6 * self.image_bbox_diag()
    }

    /// Image facet point tuples of a submesh boundary, keeping the induced
    /// orientation.
    pub fn image_boundary_facets(&self, a: &Submesh) -> Vec<Vec<Pt>> {
        a.boundary_facets(&self.mesh)
            .iter()
            .map(|f| {
                f.verts[..self.dim()]
                    .iter()
                    .map(|&v| self.images[v])
                    .collect()
            })
            .collect()
    }

    /// Distance from a value to the image of the submesh boundary.
    pub fn dist_to_image_boundary(&self, a: &Submesh, z: Pt) -> f64 {
        let mut best = f64::INFINITY;
        for f in self.image_boundary_facets(a) {
            let d = if self.dim() == 2 {
                crate::geometry::point_segment_dist(z, f[0], f[1])
            } else {
                crate::geometry::point_triangle_dist(z, f[0], f[1], f[2])
            };
            best = best.min(d);
        }
        best
    }

    pub fn all_determinants_positive(&self) -> bool {
        self.per_simplex.iter().all(|d| d.det > 0.0)
    }

    /// Exact preimages of `z` under the map restricted to submesh `a`:
    /// (simplex, preimage point, min barycentric coordinate).
    pub fn preimages(&self, a: &Submesh, z: Pt) -> Vec<(usize, Pt, f64)> {
        let dim = self.dim();
        let mut out = Vec::new();
        for &s in &a.simplices {
            let imgs = self.image_simplex(s);
            let cols: Vec<Pt> = (1..=dim).map(|i| sub(imgs[i], imgs[0])).collect();
            let m = from_columns(&cols, dim);
            let b = match crate::linalg::solve(&m, sub(z, imgs[0]), dim, 0.0) {
                Some(b) => b,
                None => continue,
            };
            let b0 = 1.0 - (0..dim).map(|i| b[i]).sum::<f64>();
            let mut bar = vec![b0];
            bar.extend((0..dim).map(|i| b[i]));
            let minb = bar.iter().cloned().fold(f64::INFINITY, f64::min);
            if minb >= 0.0 {
                let pts = self.mesh.simplex_points(s);
                let mut x = crate::linalg::scale(pts[0], bar[0]);
                for i in 1..=dim {
                    x = crate::linalg::axpy(x, bar[i], pts[i]);
                }
                out.push((s, x, minb));
            }
        }
        out
    }
}

/// Exact affine gradient, determinant and cofactor per simplex.
pub fn differentials(mesh: &SimplicialMesh, images: &[Pt]) -> Vec<SimplexDiff> {
    let dim = mesh.dim;
    (0..mesh.simplices.len())
        .map(|s| {
            let verts = mesh.simplex_vertices(s);
            let x0 = mesh.vertices[verts[0]];
            let y0 = images[verts[0]];
            let xcols: Vec<Pt> = (1..=dim).map(|i| sub(mesh.vertices[verts[i]], x0)).collect();
            let ycols: Vec<Pt> = (1..=dim).map(|i| sub(images[verts[i]], y0)).collect();
            let xm = from_columns(&xcols, dim);
            let ym = from_columns(&ycols, dim);
            let dx = det(&xm, dim);
            // inv(X) = (cof X)^T / det X
            let xinv = {
                let mut c = transpose(&cofactor(&xm, dim), dim);
                for row in c.iter_mut().take(dim) {
                    for v in row.iter_mut().take(dim) {
                        *v /= dx;
                    }
                }
                c
            };
            let grad = matmul(&ym, &xinv, dim);
            let d = det(&grad, dim);
            let cof = cofactor(&grad, dim);
            SimplexDiff { grad, det: d, cof }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use std::sync::Arc;

    fn unit_square() -> Arc<SimplicialMesh> {
        Arc::new(
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
            .unwrap(),
        )
    }

    #[test]
    fn identity_differentials() {
        let map = PLMap::identity(unit_square());
        for d in &map.per_simplex {
            assert!((d.det - 1.0).abs() < 1e-12);
            for i in 0..2 {
                for j in 0..2 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((d.grad[i][j] - expect).abs() < 1e-12);
                    assert!((d.cof[i][j] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scaling_differentials() {
        let mesh = unit_square();
        let images = mesh.vertices.iter().map(|v| crate::linalg::scale(*v, 2.0)).collect();
        let map = PLMap::new(mesh, images).unwrap();
        for d in &map.per_simplex {
            assert!((d.det - 4.0).abs() < 1e-12);
            assert!((d.cof[0][0] - 2.0).abs() < 1e-12);
            assert!((d.cof[1][1] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cofactor_matrix_identity_random_3d() {
        // random tets: (cof F)^T F = det F * Id to relative 1e-9
        let mesh = Arc::new(
            SimplicialMesh::build(
                3,
                vec![
                    [0.0, 0.0, 0.0],
                    [1.0, 0.1, 0.0],
                    [0.2, 1.0, 0.05],
                    [0.0, 0.3, 1.0],
                    [1.1, 1.0, 1.2],
                ],
                vec![vec![0, 1, 2, 3], vec![1, 2, 3, 4]],
            )
            .unwrap(),
        );
        let images: Vec<Pt> = mesh
            .vertices
            .iter()
            .map(|v| {
                [
                    1.3 * v[0] + 0.2 * v[1] - 0.1 * v[2] + 0.5,
                    -0.3 * v[0] + 0.9 * v[1] + 0.4 * v[2],
                    0.1 * v[0] - 0.2 * v[1] + 1.1 * v[2] - 0.25,
                ]
            })
            .collect();
        let map = PLMap::new(mesh, images).unwrap();
        for d in &map.per_simplex {
            let p = matmul(&transpose(&d.cof, 3), &d.grad, 3);
            let scale = frobenius(&d.grad, 3).powi(2).max(1.0);
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { d.det } else { 0.0 };
                    assert!(
                        (p[i][j] - expect).abs() < 1e-9 * scale,
                        "entry ({i},{j}): {} vs {}",
                        p[i][j],
                        expect
                    );
                }
            }
        }
    }
}
