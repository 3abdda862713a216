//! Property-based tests of the classical degree axioms on seeded random
//! orientation-preserving piecewise-affine maps.

use plinvert_core::degree::{degree_boundary, degree_field, degree_regular_sum};
use plinvert_core::fixtures::{random_op_map, square_grid_mesh};
use plinvert_core::linalg::Pt;
use plinvert_core::{PLMap, Submesh};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn seeded_map(n: usize, seed: u64) -> PLMap {
    let mesh = Arc::new(square_grid_mesh(n, [0.0, 0.0, 0.0], 1.0));
    random_op_map(mesh, seed)
}

/// An interior query value: the image of a random simplex centroid, accepted
/// only when it is well clear of the image boundary of every listed region.
fn interior_value(map: &PLMap, regions: &[&Submesh], seed: u64) -> Option<Pt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ab);
    let margin = 4.0 * map.tau_deg().max(1e-6 * map.image_bbox_diag());
    for _ in 0..64 {
        let host = &regions[rng.gen_range(0..regions.len())];
        if host.is_empty() {
            continue;
        }
        let s = host.simplices[rng.gen_range(0..host.simplices.len())];
        let z = map.eval_in_simplex(s, map.mesh.simplex_centroid(s));
        if regions
            .iter()
            .all(|a| map.dist_to_image_boundary(a, z) > margin)
        {
            return Some(z);
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    /// Normalization: deg(id; A; z) = 1 inside, 0 outside.
    #[test]
    fn normalization(seed in 0u64..10_000, n in 2usize..6) {
        let mesh = Arc::new(square_grid_mesh(n, [0.0, 0.0, 0.0], 1.0));
        let map = PLMap::identity(mesh.clone());
        let a = mesh.full_submesh();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = rng.gen_range(0..mesh.simplices.len());
        let inside = mesh.simplex_centroid(s);
        prop_assert_eq!(degree_boundary(&map, &a, inside).unwrap(), 1);
        let outside = [2.0 + rng.gen::<f64>(), -1.0 - rng.gen::<f64>(), 0.0];
        prop_assert_eq!(degree_boundary(&map, &a, outside).unwrap(), 0);
    }

    /// Additivity over a disjoint split of the domain.
    #[test]
    fn additivity(seed in 0u64..10_000, n in 3usize..6) {
        let map = seeded_map(n, seed);
        let mesh = &map.mesh;
        let half = n / 2;
        let left: Vec<usize> = (0..mesh.simplices.len())
            .filter(|&s| mesh.simplex_centroid(s)[0] < half as f64 / n as f64)
            .collect();
        let right: Vec<usize> = (0..mesh.simplices.len())
            .filter(|&s| !left.contains(&s))
            .collect();
        let a1 = Submesh::new(mesh, left);
        let a2 = Submesh::new(mesh, right);
        let union = mesh.full_submesh();
        let Some(z) = interior_value(&map, &[&a1, &a2, &union], seed) else {
            return Ok(());
        };
        let d1 = degree_boundary(&map, &a1, z).unwrap();
        let d2 = degree_boundary(&map, &a2, z).unwrap();
        let du = degree_boundary(&map, &union, z).unwrap();
        prop_assert_eq!(du, d1 + d2);
    }

    /// The degree is determined by the boundary trace alone: changing
    /// interior vertex images leaves every degree unchanged.
    #[test]
    fn boundary_determination(seed in 0u64..10_000, n in 2usize..6) {
        let map = seeded_map(n, seed);
        let mesh = map.mesh.clone();
        let a = mesh.full_submesh();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb0);
        let mut boundary = vec![false; mesh.vertices.len()];
        for f in &mesh.boundary_facets {
            for &v in &f.verts[..mesh.dim] {
                boundary[v] = true;
            }
        }
        let scale = 0.2 * map.image_bbox_diag();
        let mut other = map.images.clone();
        for (v, img) in other.iter_mut().enumerate() {
            if !boundary[v] {
                for k in 0..2 {
                    img[k] += scale * (rng.gen::<f64>() - 0.5);
                }
            }
        }
        let map2 = map.with_images(other).unwrap();
        let Some(z) = interior_value(&map, &[&a], seed) else { return Ok(()); };
        if map2.dist_to_image_boundary(&a, z) <= map2.tau_deg() {
            return Ok(());
        }
        prop_assert_eq!(
            degree_boundary(&map, &a, z).unwrap(),
            degree_boundary(&map2, &a, z).unwrap()
        );
    }

    /// Stability: perturbations smaller than dist(z, y(boundary)) cannot
    /// change the degree.
    #[test]
    fn stability(seed in 0u64..10_000, n in 2usize..6) {
        let map = seeded_map(n, seed);
        let a = map.mesh.full_submesh();
        let Some(z) = interior_value(&map, &[&a], seed) else { return Ok(()); };
        let gap = map.dist_to_image_boundary(&a, z);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x57ab);
        let eps = 0.3 * gap;
        let perturbed: Vec<Pt> = map
            .images
            .iter()
            .map(|p| {
                let mut q = *p;
                for k in 0..2 {
                    q[k] += eps * (2.0 * rng.gen::<f64>() - 1.0) / 2f64.sqrt();
                }
                q
            })
            .collect();
        let map2 = map.with_images(perturbed).unwrap();
        prop_assert_eq!(
            degree_boundary(&map, &a, z).unwrap(),
            degree_boundary(&map2, &a, z).unwrap()
        );
    }

    /// Reflection antisymmetry: deg(R o y; A; R z) = -deg(y; A; z).
    #[test]
    fn reflection_antisymmetry(seed in 0u64..10_000, n in 2usize..6) {
        let map = seeded_map(n, seed);
        let a = map.mesh.full_submesh();
        let Some(z) = interior_value(&map, &[&a], seed) else { return Ok(()); };
        let reflected: Vec<Pt> = map.images.iter().map(|p| [-p[0], p[1], 0.0]).collect();
        let rmap = map.with_images(reflected).unwrap();
        let rz = [-z[0], z[1], 0.0];
        prop_assert_eq!(
            degree_boundary(&rmap, &a, rz).unwrap(),
            -degree_boundary(&map, &a, z).unwrap()
        );
    }

    /// Cylinder homotopy invariance along the straight line between two
    /// maps, provided z stays off every intermediate image boundary.
    #[test]
    fn homotopy_invariance(seed in 0u64..10_000, n in 2usize..6) {
        let map0 = seeded_map(n, seed);
        let a = map0.mesh.full_submesh();
        let Some(z) = interior_value(&map0, &[&a], seed) else { return Ok(()); };
        let gap = map0.dist_to_image_boundary(&a, z);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x407);
        let eps = 0.4 * gap;
        let target: Vec<Pt> = map0
            .images
            .iter()
            .map(|p| {
                let mut q = *p;
                for k in 0..2 {
                    q[k] += eps * (2.0 * rng.gen::<f64>() - 1.0) / 2f64.sqrt();
                }
                q
            })
            .collect();
        let mut degs = Vec::new();
        for step in 0..=10 {
            let t = step as f64 / 10.0;
            let blend: Vec<Pt> = map0
                .images
                .iter()
                .zip(target.iter())
                .map(|(p, q)| {
                    [
                        (1.0 - t) * p[0] + t * q[0],
                        (1.0 - t) * p[1] + t * q[1],
                        0.0,
                    ]
                })
                .collect();
            let mt = map0.with_images(blend).unwrap();
            if mt.dist_to_image_boundary(&a, z) <= mt.tau_deg() {
                return Ok(());
            }
            degs.push(degree_boundary(&mt, &a, z).unwrap());
        }
        prop_assert!(degs.windows(2).all(|w| w[0] == w[1]), "degrees {degs:?}");
    }

    /// Solvability: every nonzero-degree region representative has a
    /// preimage.
    #[test]
    fn solvability(seed in 0u64..10_000, n in 2usize..5) {
        let map = seeded_map(n, seed);
        let a = map.mesh.full_submesh();
        let report = degree_field(&map, &a, 96).unwrap();
        for (region, &deg) in report.degrees.iter().enumerate() {
            if deg == 0 {
                continue;
            }
            let rep = report.regions.representatives[region][0];
            prop_assert!(
                !map.preimages(&a, rep).is_empty(),
                "degree {deg} region with representative {rep:?} has no preimage"
            );
        }
    }

    /// Oracle equivalence on random maps (boundary winding vs regular-value
    /// sign count).
    #[test]
    fn oracle_equivalence(seed in 0u64..10_000, n in 2usize..6) {
        let map = seeded_map(n, seed);
        let a = map.mesh.full_submesh();
        let Some(z) = interior_value(&map, &[&a], seed) else { return Ok(()); };
        let db = degree_boundary(&map, &a, z).unwrap();
        match degree_regular_sum(&map, &a, z) {
            Ok(ds) => prop_assert_eq!(db, ds),
            Err(_) => return Ok(()), // z happened to be a critical value
        }
    }
}
