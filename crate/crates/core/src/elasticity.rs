//! Polyconvex elastic energies on piecewise-affine deformations, distortion
//! fields, exact analytic gradients, and a projected-descent minimizer
//! confined to a rigid box under a global invertibility constraint.

use crate::conditions::{check_deg1_loc, Verdict};
use crate::error::{CoreError, Result};
use crate::linalg::{axpy, frobenius, scale, sub, Mat, Pt};
use crate::mesh::{InnerCovering, Submesh};
use crate::plmap::PLMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    W1,
    W2,
    W3,
}

/// Energy model: family, exponents, body force, and the confining box.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    pub family: Family,
    /// Growth exponent (>= d).
    pub p: f64,
    /// Determinant blow-up exponent (> 0).
    pub r: f64,
    /// Cofactor exponent (>= 1, families W2/W3).
    pub s: f64,
    /// Distortion constant (> 0).
    pub c: f64,
    /// Inner-distortion exponent (> 1).
    pub q: f64,
    /// Constant body force (applied per vertex, lumped).
    pub g: Pt,
    /// Rigid box: axis-aligned closed region the image must stay in.
    pub box_lo: Pt,
    pub box_hi: Pt,
}

impl EnergyModel {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.p < dim as f64 || self.r <= 0.0 {
            return Err(CoreError::Parse(format!(
                "energy exponents out of range: p={} r={}",
                self.p, self.r
            )));
        }
        if matches!(self.family, Family::W2 | Family::W3) && self.s < 1.0 {
            return Err(CoreError::Parse(format!("cofactor exponent s={} < 1", self.s)));
        }
        Ok(())
    }

    /// Does the family bound the outer distortion strongly enough to claim
    /// global injectivity of a.e.-injective maps at the discrete level?
    pub fn bounds_outer_distortion(&self, dim: usize) -> bool {
        match self.family {
            Family::W3 => true,
            // in 2D the cofactor norm equals the gradient norm, so the W2
            // extra term already controls |F|^s / det^r terms
            Family::W2 => dim == 2 && self.r >= 2.0,
            Family::W1 => false,
        }
    }

    /// Does the family bound the inner distortion (the weaker certificate,
    /// giving injectivity on the reduced domain)?
    pub fn bounds_inner_distortion(&self) -> bool {
        match self.family {
            Family::W3 => true,
            Family::W2 => self.r > 2.0 && self.s >= 3.0 * self.r / (self.r - 2.0),
            Family::W1 => false,
        }
    }
}

/// Extended-real energy value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub fn finite(self) -> Option<f64> {
        match self {
            Energy::Finite(v) => Some(v),
            Energy::Infinite => None,
        }
    }
}

/// Stored energy density W(F); the Infinite marker whenever det F <= 0.
pub fn energy_density(model: &EnergyModel, f: &Mat, dim: usize) -> Energy {
    let det = crate::linalg::det(f, dim);
    if det <= 0.0 {
        return Energy::Infinite;
    }
    let n = frobenius(f, dim);
    let mut w = n.powf(model.p) + det.powf(-model.r);
    match model.family {
        Family::W1 => {}
        Family::W2 => {
            let cof = crate::linalg::cofactor(f, dim);
            w += frobenius(&cof, dim).powf(model.s);
        }
        Family::W3 => {
            w += n.powi(2 * dim as i32) / (det * det);
        }
    }
    Energy::Finite(w)
}

/// Per-simplex outer and inner distortions.
#[derive(Debug, Clone)]
pub struct DistortionField {
    pub outer: Vec<f64>,
    pub inner: Vec<f64>,
}

/// Dimensional constant in (K^O)^{d-1} >= c(d) K^I, from the sharp
/// inequality |F|^{d-1} >= c |cof F| at equal singular values.
pub fn distortion_constant(dim: usize) -> f64 {
    if dim == 2 {
        1.0
    } else {
        3.0 * 3.0f64.sqrt()
    }
}

/// K^O = |grad y|^d / det, K^I = |cof grad y|^d det^{1-d}, per simplex.
pub fn distortions(map: &PLMap) -> Result<DistortionField> {
    let dim = map.dim();
    let mut outer = Vec::with_capacity(map.per_simplex.len());
    let mut inner = Vec::with_capacity(map.per_simplex.len());
    for (s, d) in map.per_simplex.iter().enumerate() {
        if d.det <= 0.0 {
            return Err(CoreError::NonpositiveDeterminant {
                index: s,
                det: d.det,
            });
        }
        let n = frobenius(&d.grad, dim);
        let nc = frobenius(&d.cof, dim);
        outer.push(n.powi(dim as i32) / d.det);
        inner.push(nc.powi(dim as i32) * d.det.powi(1 - dim as i32));
    }
    Ok(DistortionField { outer, inner })
}

/// Total energy: elastic part plus vertex-lumped body-force work.
pub fn total_energy(model: &EnergyModel, map: &PLMap) -> Energy {
    let mesh = &map.mesh;
    let dim = map.dim();
    let mut total = 0.0;
    for (s, d) in map.per_simplex.iter().enumerate() {
        let w = match energy_density(model, &d.grad, dim) {
            Energy::Finite(w) => w,
            Energy::Infinite => return Energy::Infinite,
        };
        let vol = mesh.simplex_volume(s);
        total += vol * w;
        // lumped body force: average of g . y over the simplex vertices
        let mut gy = 0.0;
        for &v in mesh.simplex_vertices(s) {
            gy += crate::linalg::dot(model.g, map.images[v]);
        }
        total += vol * gy / (dim + 1) as f64;
    }
    Energy::Finite(total)
}

/// dW/dF for the model families (requires det F > 0).
fn density_gradient(model: &EnergyModel, f: &Mat, dim: usize) -> Mat {
    let det = crate::linalg::det(f, dim);
    let cof = crate::linalg::cofactor(f, dim);
    let n = frobenius(f, dim);
    let mut p = [[0.0; 3]; 3];
    // d|F|^p = p |F|^{p-2} F ; d det^{-r} = -r det^{-r-1} cof F
    let a = model.p * n.powf(model.p - 2.0);
    let b = -model.r * det.powf(-model.r - 1.0);
    for i in 0..dim {
        for j in 0..dim {
            p[i][j] = a * f[i][j] + b * cof[i][j];
        }
    }
    match model.family {
        Family::W1 => {}
        Family::W2 => {
            let nc = frobenius(&cof, dim);
            if dim == 2 {
                // |cof F| = |F| in 2D
                let a2 = model.s * nc.powf(model.s - 2.0);
                for i in 0..2 {
                    for j in 0..2 {
                        p[i][j] += a2 * f[i][j];
                    }
                }
            } else {
                // d cof_{ij} / dF_{kl} = eps_{ikq} eps_{jls} F_{qs}
                let a2 = model.s * nc.powf(model.s - 2.0);
                for k in 0..3 {
                    for l in 0..3 {
                        let mut acc = 0.0;
                        for i in 0..3 {
                            for q in 0..3 {
                                let e1 = levi_civita(i, k, q);
                                if e1 == 0.0 {
                                    continue;
                                }
                                for j in 0..3 {
                                    for s in 0..3 {
                                        let e2 = levi_civita(j, l, s);
                                        if e2 == 0.0 {
                                            continue;
                                        }
                                        acc += cof[i][j] * e1 * e2 * f[q][s];
                                    }
                                }
                            }
                        }
                        p[k][l] += a2 * acc;
                    }
                }
            }
        }
        Family::W3 => {
            let m = 2 * dim as i32;
            let c1 = m as f64 * n.powi(m - 2) / (det * det);
            let c2 = -2.0 * n.powi(m) / (det * det * det);
            for i in 0..dim {
                for j in 0..dim {
                    p[i][j] += c1 * f[i][j] + c2 * cof[i][j];
                }
            }
        }
    }
    p
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Inverse of the edge matrix X of a simplex (columns x_i - x_0).
fn edge_inverse(map: &PLMap, s: usize) -> Mat {
    let dim = map.dim();
    let verts = map.mesh.simplex_vertices(s);
    let x0 = map.mesh.vertices[verts[0]];
    let cols: Vec<Pt> = (1..=dim)
        .map(|i| sub(map.mesh.vertices[verts[i]], x0))
        .collect();
    let xm = crate::linalg::from_columns(&cols, dim);
    let dx = crate::linalg::det(&xm, dim);
    let mut inv = crate::linalg::transpose(&crate::linalg::cofactor(&xm, dim), dim);
    for row in inv.iter_mut().take(dim) {
        for v in row.iter_mut().take(dim) {
            *v /= dx;
        }
    }
    inv
}

/// Exact gradient of the total energy with respect to vertex image
/// positions.
pub fn energy_gradient(model: &EnergyModel, map: &PLMap) -> Result<Vec<Pt>> {
    let mesh = &map.mesh;
    let dim = map.dim();
    let mut grad = vec![[0.0f64; 3]; mesh.vertices.len()];
    for (s, d) in map.per_simplex.iter().enumerate() {
        if d.det <= 0.0 {
            return Err(CoreError::NonpositiveDeterminant {
                index: s,
                det: d.det,
            });
        }
        let vol = mesh.simplex_volume(s);
        let p = density_gradient(model, &d.grad, dim);
        let binv = edge_inverse(map, s);
        let verts = mesh.simplex_vertices(s);
        // dE/d(y_i)_a = vol * sum_b P_{ab} B_{ib} for i >= 1;
        // vertex 0 collects the negative sum
        for a in 0..dim {
            let mut sum0 = 0.0;
            for i in 1..=dim {
                let mut acc = 0.0;
                for b in 0..dim {
                    acc += p[a][b] * binv[i - 1][b];
                }
                grad[verts[i]][a] += vol * acc;
                sum0 += acc;
            }
            grad[verts[0]][a] -= vol * sum0;
        }
        // lumped body force
        for &v in verts {
            for a in 0..dim {
                grad[v][a] += vol * model.g[a] / (dim + 1) as f64;
            }
        }
    }
    Ok(grad)
}

/// Global invertibility constraint enforced during minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Reject steps whose trial map violates degree-at-most-one on a fixed
    /// 3-level inner covering.
    Deg1Loc,
    /// Quadratic penalty on the volume-inequality violation, with an
    /// escalating weight.
    CncPenalty,
}

#[derive(Debug, Clone)]
pub struct MinimizationRecord {
    pub energies: Vec<f64>,
    pub final_map: PLMap,
    pub constraint: Constraint,
    pub constraint_log: Vec<String>,
    pub iterations: usize,
    pub converged: bool,
}

fn project_images(model: &EnergyModel, dim: usize, images: &mut [Pt]) {
    for p in images.iter_mut() {
        *p = crate::geometry::project_box(*p, model.box_lo, model.box_hi, dim);
    }
}

fn in_box(model: &EnergyModel, dim: usize, images: &[Pt], tol: f64) -> bool {
    images.iter().all(|p| {
        (0..dim).all(|k| p[k] >= model.box_lo[k] - tol && p[k] <= model.box_hi[k] + tol)
    })
}

/// Smallest positive root of det(F + t G) over all simplices: the first step
/// length at which some determinant vanishes (closed-form quadratic in 2D,
/// cubic in 3D).
fn first_det_root(map: &PLMap, dir: &[Pt]) -> f64 {
    let dim = map.dim();
    let mut tmin = f64::INFINITY;
    for (s, d) in map.per_simplex.iter().enumerate() {
        // G = direction edge matrix times B
        let binv = edge_inverse(map, s);
        let verts = map.mesh.simplex_vertices(s);
        let d0 = dir[verts[0]];
        let cols: Vec<Pt> = (1..=dim).map(|i| sub(dir[verts[i]], d0)).collect();
        let dy = crate::linalg::from_columns(&cols, dim);
        let mut g = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = 0.0;
                for k in 0..dim {
                    acc += dy[i][k] * binv[k][j];
                }
                g[i][j] = acc;
            }
        }
        let f = &d.grad;
        let ddot = |a: &Mat, b: &Mat| {
            let mut acc = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    acc += a[i][j] * b[i][j];
                }
            }
            acc
        };
        let roots: Vec<f64> = if dim == 2 {
            // det(F + tG) = detF + t cofF:G + t^2 detG
            let c0 = d.det;
            let c1 = ddot(&d.cof, &g);
            let c2 = crate::linalg::det(&g, 2);
            quadratic_roots(c2, c1, c0)
        } else {
            let c0 = d.det;
            let c1 = ddot(&d.cof, &g);
            let cg = crate::linalg::cofactor(&g, 3);
            let c2 = ddot(&cg, f);
            let c3 = crate::linalg::det(&g, 3);
            cubic_roots(c3, c2, c1, c0)
        };
        for t in roots {
            if t > 0.0 {
                tmin = tmin.min(t);
            }
        }
    }
    tmin
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() < 1e-300 {
        if b.abs() < 1e-300 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * sq);
    let mut out = vec![q / a];
    if q.abs() > 1e-300 {
        out.push(c / q);
    }
    out
}

fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    if a.abs() < 1e-300 {
        return quadratic_roots(b, c, d);
    }
    // depressed cubic via Cardano, then polish with Newton
    let b1 = b / a;
    let c1 = c / a;
    let d1 = d / a;
    let p = c1 - b1 * b1 / 3.0;
    let q = 2.0 * b1.powi(3) / 27.0 - b1 * c1 / 3.0 + d1;
    let shift = -b1 / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = Vec::new();
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        roots.push(u + v + shift);
    } else {
        let rho = (-p / 3.0).powi(3).max(0.0).sqrt();
        let theta = (-q / 2.0 / rho.max(1e-300)).clamp(-1.0, 1.0).acos();
        let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
        for k in 0..3 {
            roots.push(m * ((theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift);
        }
    }
    // one Newton polish per root
    for t in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((a * *t + b) * *t + c) * *t + d;
            let df = (3.0 * a * *t + 2.0 * b) * *t + c;
            if df.abs() > 1e-300 {
                *t -= f / df;
            }
        }
    }
    roots
}

/// Projected gradient descent with Armijo backtracking, a closed-form
/// determinant safeguard, box projection, and a global invertibility gate.
pub fn minimize(
    model: &EnergyModel,
    initial: &PLMap,
    constraint: Constraint,
    budget: usize,
) -> Result<MinimizationRecord> {
    let dim = initial.dim();
    model.validate(dim)?;
    let mesh = initial.mesh.clone();
    let diam = mesh.bbox_diag();
    if !initial.all_determinants_positive() {
        return Err(CoreError::InfeasibleInitial(
            "initial map has a nonpositive simplex determinant".into(),
        ));
    }
    if !in_box(model, dim, &initial.images, 1e-9 * diam) {
        return Err(CoreError::InfeasibleInitial(
            "initial vertex image outside the box".into(),
        ));
    }
    let covering: Option<InnerCovering> = match constraint {
        Constraint::Deg1Loc => Some(mesh.inner_covering(3)?),
        Constraint::CncPenalty => None,
    };
    let constraint_resolution = 64;
    let mut mu = 1.0;
    let mut log = Vec::new();

    let cnc_violation = |map: &PLMap| -> f64 {
        let a = map.mesh.full_submesh();
        let lhs: f64 = a
            .simplices
            .iter()
            .map(|&s| map.per_simplex[s].det * map.mesh.simplex_volume(s))
            .sum();
        let rhs = if dim == 2 {
            let tris: Vec<[Pt; 3]> = a
                .simplices
                .iter()
                .map(|&s| {
                    let i = map.image_simplex(s);
                    [i[0], i[1], i[2]]
                })
                .collect();
            crate::geometry::triangle_union_area(&tris)
        } else {
            // 3D penalty route falls back to the bounding-box cap
            let (lo, hi) = map.image_bbox();
            (0..dim).map(|k| hi[k] - lo[k]).product()
        };
        (lhs - rhs).max(0.0)
    };

    let deg1loc_ok = |map: &PLMap| -> bool {
        match &covering {
            Some(cov) => matches!(
                check_deg1_loc(map, cov, constraint_resolution),
                Ok(v) if v.verdict != Verdict::Fails
            ),
            None => true,
        }
    };

    if constraint == Constraint::Deg1Loc && !deg1loc_ok(initial) {
        return Err(CoreError::InfeasibleInitial(
            "initial map violates the degree constraint".into(),
        ));
    }

    let objective = |map: &PLMap, mu: f64| -> Option<f64> {
        let e = total_energy(model, map).finite()?;
        Some(match constraint {
            Constraint::Deg1Loc => e,
            Constraint::CncPenalty => e + mu * cnc_violation(map).powi(2),
        })
    };

    let mut current = initial.clone();
    let mut energy = objective(&current, mu).ok_or_else(|| {
        CoreError::InfeasibleInitial("initial energy is infinite".into())
    })?;
    let mut energies = vec![energy];
    let gtol = 1e-8 * (1.0 + energy.abs()) / diam;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..budget {
        iterations += 1;
        let grad = energy_gradient(model, &current)?;
        let gnorm2: f64 = grad
            .iter()
            .map(|g| (0..dim).map(|k| g[k] * g[k]).sum::<f64>())
            .sum();
        let gnorm = gnorm2.sqrt();
        if gnorm < gtol {
            converged = true;
            break;
        }
        let dir: Vec<Pt> = grad.iter().map(|g| scale(*g, -1.0)).collect();
        // determinant safeguard: never step past half the first vanishing
        let t_det = first_det_root(&current, &dir);
        let t_scale = 0.1 * diam / gnorm; // natural step scale
        let mut t = if t_det.is_finite() {
            (0.5 * t_det).min(t_scale)
        } else {
            t_scale
        };
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial_images: Vec<Pt> = current
                .images
                .iter()
                .zip(dir.iter())
                .map(|(y, d)| axpy(*y, t, *d))
                .collect();
            project_images(model, dim, &mut trial_images);
            let trial = current.with_images(trial_images)?;
            if trial.all_determinants_positive() {
                if let Some(e_trial) = objective(&trial, mu) {
                    if e_trial <= energy - 1e-4 * t * gnorm2 && deg1loc_ok(&trial) {
                        current = trial;
                        energy = e_trial;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            converged = true;
            log.push(format!(
                "iteration {iterations}: no acceptable step (gradient norm {gnorm:.3e})"
            ));
            break;
        }
        if constraint == Constraint::CncPenalty {
            let viol = cnc_violation(&current);
            if viol > 1e-9 * diam.powi(dim as i32) {
                mu *= 10.0;
                energy = objective(&current, mu).unwrap_or(energy);
                log.push(format!(
                    "iteration {iterations}: volume violation {viol:.3e}, penalty weight raised to {mu:.1e}"
                ));
            }
        }
        energies.push(energy);
    }

    Ok(MinimizationRecord {
        energies,
        final_map: current,
        constraint,
        constraint_log: log,
        iterations,
        converged,
    })
}

/// Discrete invertibility certificate for a minimization result.
#[derive(Debug, Clone)]
pub struct MinimizerCertificate {
    pub injective_ae: Verdict,
    /// Exact pairwise image-overlap scan (only when the energy bounds the
    /// outer distortion): Some(true) means no positive-area double cover.
    pub globally_injective: Option<bool>,
    /// Simplices excluded from the reduced domain (only for the weaker
    /// inner-distortion certificate).
    pub reduced_excluded: Option<usize>,
}

/// Exact pairwise overlap test: do two image simplices of distinct domain
/// simplices overlap with positive measure?
fn has_double_cover(map: &PLMap, a: &Submesh) -> bool {
    let dim = map.dim();
    let tol = 1e-12 * map.image_bbox_diag().powi(dim as i32);
    let n = a.simplices.len();
    // bbox prefilter
    let boxes: Vec<(Pt, Pt)> = a
        .simplices
        .iter()
        .map(|&s| {
            let imgs = map.image_simplex(s);
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for p in &imgs {
                for k in 0..dim {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
            (lo, hi)
        })
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sep = false;
            for k in 0..dim {
                if boxes[i].1[k] < boxes[j].0[k] || boxes[j].1[k] < boxes[i].0[k] {
                    sep = true;
                    break;
                }
            }
            if sep {
                continue;
            }
            let si = a.simplices[i];
            let sj = a.simplices[j];
            if dim == 2 {
                let ti = map.image_simplex(si);
                let tj = map.image_simplex(sj);
                let t1 = [ti[0], ti[1], ti[2]];
                let t2 = [tj[0], tj[1], tj[2]];
                let a1 = crate::mesh::signed_volume(2, &ti).abs();
                let a2 = crate::mesh::signed_volume(2, &tj).abs();
                let union = crate::geometry::triangle_union_area(&[t1, t2]);
                if a1 + a2 - union > tol.max(1e-12 * (a1 + a2)) {
                    return true;
                }
            } else {
                // 3D: conservative proxy via facet intersection of the two
                // image tetrahedra (disjoint interiors of a PL image can
                // only overlap through crossing facets or containment)
                let ti = map.image_simplex(si);
                let tj = map.image_simplex(sj);
                let faces = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
                let mut crossing = false;
                'outer: for fi in faces {
                    for fj in faces {
                        let t1 = [ti[fi[0]], ti[fi[1]], ti[fi[2]]];
                        let t2 = [tj[fj[0]], tj[fj[1]], tj[fj[2]]];
                        // ignore shared-vertex contacts of adjacent simplices
                        let share = t1.iter().any(|p| {
                            t2.iter().any(|q| crate::linalg::dist(*p, *q) == 0.0)
                        });
                        if !share && crate::geometry::triangles_intersect_3d(t1, t2) {
                            crossing = true;
                            break 'outer;
                        }
                    }
                }
                if crossing {
                    return true;
                }
                // containment check: centroid of one inside the other
                let c = crate::geometry::centroid(&ti);
                if tet_contains(&tj, c) {
                    return true;
                }
                let c = crate::geometry::centroid(&tj);
                if tet_contains(&ti, c) {
                    return true;
                }
            }
        }
    }
    false
}

fn tet_contains(t: &[Pt], z: Pt) -> bool {
    let cols: Vec<Pt> = (1..4).map(|i| sub(t[i], t[0])).collect();
    let m = crate::linalg::from_columns(&cols, 3);
    match crate::linalg::solve(&m, sub(z, t[0]), 3, 0.0) {
        Some(b) => {
            let b0 = 1.0 - b[0] - b[1] - b[2];
            b0 > 0.0 && b[0] > 0.0 && b[1] > 0.0 && b[2] > 0.0
        }
        None => false,
    }
}

/// Certify a minimizer: (a) injective a.e.; (b) globally injective via the
/// exact overlap scan when the energy bounds the outer distortion; (c)
/// injective on the reduced domain otherwise (inner-distortion bound).
pub fn certify_minimizer(model: &EnergyModel, record: &MinimizationRecord) -> MinimizerCertificate {
    let map = &record.final_map;
    let dim = map.dim();
    let (v, _) = crate::conditions::check_injective_ae(map, 200_000, 97);
    let full = map.mesh.full_submesh();
    let globally_injective = if model.bounds_outer_distortion(dim) {
        Some(!has_double_cover(map, &full))
    } else {
        None
    };
    let reduced_excluded = if globally_injective.is_none() && model.bounds_inner_distortion() {
        let rd = crate::topology::reduced_domain(map, &full);
        Some(full.simplices.len() - rd.submesh.simplices.len())
    } else {
        None
    };
    MinimizerCertificate {
        injective_ae: v.verdict,
        globally_injective,
        reduced_excluded,
    }
}
