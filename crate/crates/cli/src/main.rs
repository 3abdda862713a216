//! `plinvert`: degree queries, invertibility condition checks, topology
//! reports, fixture generation, and constrained elastic minimization for
//! piecewise-affine deformations, with byte-stable reports and a run
//! manifest for exact replay.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use plinvert_core::conditions::{self, Verdict};
use plinvert_core::degree::{
    degree_boundary, degree_field, degree_integral, degree_regular_sum, default_field_resolution,
    DegreeReport, MollifierSpec, Sigma,
};
use plinvert_core::elasticity::{self, Constraint};
use plinvert_core::fixtures::{self, Fixture};
use plinvert_core::io as pio;
use plinvert_core::linalg::Pt;
use plinvert_core::topology;
use plinvert_core::{CoreError, PLMap, Submesh};

#[derive(Parser)]
#[command(name = "plinvert", version, about = "Degree and invertibility toolkit for piecewise-affine deformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Brouwer degree of a deformation at one query value, by all three
    /// algorithms.
    Degree {
        /// Mesh file (optional when the map file's mesh_ref resolves).
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Deformation file.
        #[arg(long)]
        map: PathBuf,
        /// Restrict to level LEVEL of the regular inner covering.
        #[arg(long)]
        submesh: Option<usize>,
        /// Query value, comma-separated coordinates.
        #[arg(long)]
        query: String,
        /// Output directory for the report and manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify the whole complement of the image boundary by degree.
    DegreeField {
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        map: PathBuf,
        /// Background grid resolution (default 256 in 2D, 96 in 3D).
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Topological image, localized image over an inner covering, and the
    /// reduced domain.
    Topology {
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        map: PathBuf,
        /// Number of inner covering levels.
        #[arg(long, default_value_t = 3)]
        covering: usize,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run invertibility condition checkers and write a verdict file.
    Check {
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        map: PathBuf,
        /// Comma-separated subset of cnc,deg1,deg1loc,inv,aib,injective.
        #[arg(long, default_value = "cnc,deg1,deg1loc,inv,aib,injective")]
        conditions: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Monte-Carlo sample count for cnc/injective.
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// Exit with status 1 when any requested condition Fails.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a named fixture: mesh, deformation, and expectation files.
    Fixtures {
        /// angle-doubling | annulus | cone-flip | stacked | pinch | overwrap
        #[arg(long)]
        name: String,
        /// Mesh resolution.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Target degree for the stacked-holes fixture.
        #[arg(long, default_value_t = 2)]
        target: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimize a polyconvex energy in a box under an invertibility
    /// constraint, then certify the result.
    Minimize {
        /// Mesh file; the identity is the initial deformation unless --map
        /// is given.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Energy model file.
        #[arg(long)]
        model: PathBuf,
        /// deg1loc | cncpenalty
        #[arg(long, default_value = "deg1loc")]
        constraint: String,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full fixture and invariant suite; reports pass counts.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit with status 1 when any suite item fails.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// manifest

struct Manifest {
    command: String,
    inputs: Vec<(String, String)>,
    seed: u64,
    parameters: Map<String, Value>,
    outputs: Vec<(String, String)>,
}

impl Manifest {
    fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            inputs: Vec::new(),
            seed: 0,
            parameters: Map::new(),
            outputs: Vec::new(),
        }
    }

    fn input(&mut self, path: &Path) -> Result<(), CoreError> {
        self.inputs
            .push((path.display().to_string(), sha256_file(path)?));
        Ok(())
    }

    fn param(&mut self, key: &str, value: Value) {
        self.parameters.insert(key.to_string(), value);
    }

    fn output(&mut self, path: &Path) -> Result<(), CoreError> {
        // record the name relative to the output directory so replays into
        // different directories produce identical manifests
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.push((name, sha256_file(path)?));
        Ok(())
    }

    fn write(&self, out_dir: &Path) -> Result<(), CoreError> {
        let kv = |pairs: &[(String, String)]| -> Value {
            let mut m = Map::new();
            for (k, v) in pairs {
                m.insert(k.clone(), Value::from(v.clone()));
            }
            Value::Object(m)
        };
        let doc = json!({
            "command": self.command,
            "inputs": kv(&self.inputs),
            "seed": self.seed,
            "parameters": Value::Object(self.parameters.clone()),
            "outputs": kv(&self.outputs),
            "versions": format!("plinvert {}", env!("CARGO_PKG_VERSION")),
        });
        pio::write_document(&out_dir.join("manifest.json"), &doc)
    }
}

fn sha256_file(path: &Path) -> Result<String, CoreError> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

// ---------------------------------------------------------------------------
// shared plumbing

fn parse_query(q: &str) -> Result<Pt, CoreError> {
    let parts: Vec<&str> = q.split(',').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(CoreError::Parse(format!(
            "query '{q}': expected 2 or 3 comma-separated coordinates"
        )));
    }
    let mut p = [0.0; 3];
    for (k, part) in parts.iter().enumerate() {
        p[k] = part
            .trim()
            .parse()
            .map_err(|e| CoreError::Parse(format!("query coordinate '{part}': {e}")))?;
    }
    Ok(p)
}

/// Load a deformation: images from the map file; mesh from --mesh when
/// given, otherwise via the map file's mesh_ref.
fn load_map(
    mesh: &Option<PathBuf>,
    map_path: &Path,
    manifest: &mut Manifest,
) -> Result<PLMap, CoreError> {
    manifest.input(map_path)?;
    match mesh {
        Some(mesh_path) => {
            manifest.input(mesh_path)?;
            let mesh = Arc::new(pio::read_mesh(mesh_path)?);
            let doc = pio::read_document(map_path)?;
            let imgs = doc
                .get("images")
                .and_then(Value::as_array)
                .ok_or_else(|| CoreError::Parse("deformation file: missing 'images'".into()))?;
            let mut images = Vec::with_capacity(imgs.len());
            for v in imgs {
                let arr = v
                    .as_array()
                    .ok_or_else(|| CoreError::Parse("deformation file: bad image".into()))?;
                let mut p = [0.0; 3];
                for (k, c) in arr.iter().enumerate().take(3) {
                    p[k] = c
                        .as_f64()
                        .ok_or_else(|| CoreError::Parse("deformation file: bad image".into()))?;
                }
                images.push(p);
            }
            PLMap::new(mesh, images)
        }
        None => pio::read_deformation(map_path),
    }
}

fn pt_value(p: Pt, dim: usize) -> Value {
    Value::Array((0..dim).map(|k| Value::from(p[k])).collect())
}

fn sigma_value(s: &Sigma) -> Value {
    match s {
        Sigma::Uniform(v) => json!({ "kind": "uniform", "value": v }),
        Sigma::Mixed => json!({ "kind": "mixed" }),
        Sigma::Empty => json!({ "kind": "empty" }),
    }
}

fn report_value(map: &PLMap, report: &DegreeReport) -> Value {
    let dim = map.dim();
    let regions: Vec<Value> = report
        .degrees
        .iter()
        .enumerate()
        .map(|(r, &deg)| {
            json!({
                "cell_count": report.regions.cell_counts[r],
                "degree": deg,
                "representative": pt_value(report.regions.representatives[r][0], dim),
                "volume": report.regions.cell_counts[r] as f64 * report.regions.cell_volume(),
            })
        })
        .collect();
    json!({
        "regions": regions,
        "resolution": report.resolution,
        "sigma": sigma_value(&report.sigma),
    })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn verdict_value(map: &PLMap, cv: &conditions::ConditionVerdict) -> Value {
    json!({
        "condition": cv.condition.to_string(),
        "evidence": cv.evidence,
        "resolution": cv.resolution,
        "verdict": verdict_str(cv.verdict),
        "witness": cv.witness.map(|w| pt_value(w, map.dim())).unwrap_or(Value::Null),
    })
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_degree(
    mesh: &Option<PathBuf>,
    map_path: &Path,
    submesh: Option<usize>,
    query: &str,
    out: &Path,
) -> Result<i32, CoreError> {
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("degree");
    let map = load_map(mesh, map_path, &mut manifest)?;
    let z = parse_query(query)?;
    manifest.param("query", pt_value(z, map.dim()));
    let region: Submesh = match submesh {
        Some(level) => {
            manifest.param("submesh", Value::from(level as i64));
            let covering = map.mesh.inner_covering(level + 1)?;
            covering.levels[level].clone()
        }
        None => map.mesh.full_submesh(),
    };

    let boundary = degree_boundary(&map, &region, z)?;
    let regular = degree_regular_sum(&map, &region, z);
    let gap = map.dist_to_image_boundary(&region, z);
    let integral = degree_integral(
        &map,
        &region,
        z,
        &MollifierSpec {
            center: z,
            radius: 0.25 * gap,
        },
    );

    let doc = json!({
        "boundary_winding": boundary,
        "image_boundary_distance": gap,
        "integral": match &integral {
            Ok(v) => json!({ "value": v }),
            Err(e) => json!({ "error": e.to_string() }),
        },
        "query": pt_value(z, map.dim()),
        "regular_sum": match &regular {
            Ok(v) => json!({ "value": v }),
            Err(e) => json!({ "error": e.to_string() }),
        },
        "tau_deg": map.tau_deg(),
    });
    let report_path = out.join("degree_report.json");
    pio::write_document(&report_path, &doc)?;
    manifest.output(&report_path)?;
    manifest.write(out)?;
    Ok(0)
}

fn cmd_degree_field(
    mesh: &Option<PathBuf>,
    map_path: &Path,
    resolution: Option<usize>,
    out: &Path,
) -> Result<i32, CoreError> {
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("degree-field");
    let map = load_map(mesh, map_path, &mut manifest)?;
    let res = resolution.unwrap_or_else(|| default_field_resolution(map.dim()));
    manifest.param("resolution", Value::from(res as i64));
    let region = map.mesh.full_submesh();
    let report = degree_field(&map, &region, res)?;
    let report_path = out.join("degree_field.json");
    pio::write_document(&report_path, &report_value(&map, &report))?;
    manifest.output(&report_path)?;
    manifest.write(out)?;
    Ok(0)
}

fn cmd_topology(
    mesh: &Option<PathBuf>,
    map_path: &Path,
    covering_levels: usize,
    resolution: Option<usize>,
    out: &Path,
) -> Result<i32, CoreError> {
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("topology");
    let map = load_map(mesh, map_path, &mut manifest)?;
    let res = resolution.unwrap_or_else(|| default_field_resolution(map.dim()));
    manifest.param("covering", Value::from(covering_levels as i64));
    manifest.param("resolution", Value::from(res as i64));
    let full = map.mesh.full_submesh();
    let covering = map.mesh.inner_covering(covering_levels)?;
    let im_t = topology::topological_image(&map, &full, res)?;
    let im_loc = topology::localized_image(&map, &covering, res)?;
    let reduced = topology::reduced_domain(&map, &full);

    let dim = map.dim();
    let level_values: Vec<Value> = im_loc
        .levels
        .iter()
        .enumerate()
        .map(|(m, level)| {
            json!({
                "level": m,
                "nonzero_regions": level.nonzero.len(),
                "volume": im_loc.level_volume(m),
                "representatives": level
                    .nonzero
                    .iter()
                    .map(|&r| json!({
                        "degree": level.report.degrees[r],
                        "point": pt_value(level.report.regions.representatives[r][0], dim),
                    }))
                    .collect::<Vec<Value>>(),
            })
        })
        .collect();

    let doc = json!({
        "localized_image": level_values,
        "reduced_domain": {
            "excluded_simplices": full.simplices.len() - reduced.submesh.simplices.len(),
            "kept_simplices": reduced.submesh.simplices.len(),
        },
        "topological_image": report_value(&map, &im_t.report),
    });
    let report_path = out.join("topology_report.json");
    pio::write_document(&report_path, &doc)?;
    manifest.output(&report_path)?;
    manifest.write(out)?;
    Ok(0)
}

fn cmd_check(
    mesh: &Option<PathBuf>,
    map_path: &Path,
    condition_list: &str,
    seed: u64,
    samples: usize,
    strict: bool,
    out: &Path,
) -> Result<i32, CoreError> {
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("check");
    manifest.seed = seed;
    let map = load_map(mesh, map_path, &mut manifest)?;
    manifest.param("conditions", Value::from(condition_list));
    manifest.param("samples", Value::from(samples as i64));
    manifest.param("seed", Value::from(seed));
    let res = default_field_resolution(map.dim());

    let mut verdicts = Vec::new();
    let mut any_fails = false;
    for name in condition_list.split(',') {
        let cv = match name.trim() {
            "cnc" => conditions::check_cnc(&map, samples, seed).0,
            "deg1" => conditions::check_deg1(&map, res)?.0,
            "deg1loc" => {
                let covering = map.mesh.inner_covering(3)?;
                conditions::check_deg1_loc(&map, &covering, res)?
            }
            "inv" => conditions::check_inv(&map, 10, 5, seed)?,
            "aib" => conditions::check_aib(&map, 12).0,
            "injective" => conditions::check_injective_ae(&map, samples, seed).0,
            other => {
                return Err(CoreError::Parse(format!("unknown condition '{other}'")));
            }
        };
        any_fails |= cv.verdict == Verdict::Fails;
        verdicts.push(verdict_value(&map, &cv));
    }

    let doc = json!({
        "samples": samples,
        "seed": seed,
        "verdicts": verdicts,
    });
    let report_path = out.join("verdicts.json");
    pio::write_document(&report_path, &doc)?;
    manifest.output(&report_path)?;
    manifest.write(out)?;
    Ok(if strict && any_fails { 1 } else { 0 })
}

fn write_fixture(out: &Path, f: &Fixture, stem: &str, manifest: &mut Manifest) -> Result<(), CoreError> {
    let mesh_name = format!("{stem}_mesh.json");
    let def_name = format!("{stem}_deformation.json");
    let exp_name = format!("{stem}_expectations.json");
    pio::write_mesh(&out.join(&mesh_name), &f.map.mesh)?;
    pio::write_deformation(&out.join(&def_name), &f.map, &mesh_name)?;
    let dim = f.map.dim();
    let exps: Vec<Value> = f
        .expectations
        .iter()
        .map(|e| {
            json!({
                "expected_degree": e.expected_degree,
                "label": e.label,
                "query": pt_value(e.query, dim),
            })
        })
        .collect();
    let doc = json!({
        "expectations": exps,
        "name": f.name,
        "resolution": f.resolution,
    });
    pio::write_document(&out.join(&exp_name), &doc)?;
    manifest.output(&out.join(&mesh_name))?;
    manifest.output(&out.join(&def_name))?;
    manifest.output(&out.join(&exp_name))?;
    Ok(())
}

fn cmd_fixtures(name: &str, n: usize, target: i64, out: &Path) -> Result<i32, CoreError> {
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("fixtures");
    manifest.param("n", Value::from(n as i64));
    manifest.param("name", Value::from(name));
    match name {
        "angle-doubling" => {
            write_fixture(out, &fixtures::fixture_angle_doubling(n), "angle_doubling", &mut manifest)?
        }
        "annulus" => {
            write_fixture(out, &fixtures::fixture_annulus_translation(n), "annulus", &mut manifest)?
        }
        "cone-flip" => {
            let (y, yhat) = fixtures::fixture_cone_flip(n);
            write_fixture(out, &y, "cone_flip_intermediate", &mut manifest)?;
            write_fixture(out, &yhat, "cone_flip", &mut manifest)?;
        }
        "stacked" => {
            manifest.param("target", Value::from(target));
            let f = fixtures::fixture_stacked_holes(target.unsigned_abs() as usize, target);
            write_fixture(out, &f, "stacked", &mut manifest)?;
        }
        "pinch" => write_fixture(out, &fixtures::fixture_pinch(n), "pinch", &mut manifest)?,
        "overwrap" => write_fixture(out, &fixtures::fixture_overwrap(n), "overwrap", &mut manifest)?,
        other => return Err(CoreError::Parse(format!("unknown fixture '{other}'"))),
    }
    manifest.write(out)?;
    Ok(0)
}

fn cmd_minimize(
    mesh: &Option<PathBuf>,
    map_path: &Option<PathBuf>,
    model_path: &Path,
    constraint: &str,
    budget: usize,
    seed: u64,
    out: &Path,
) -> Result<i32, CoreError> {
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("minimize");
    manifest.seed = seed;
    let initial = match (mesh, map_path) {
        (_, Some(mp)) => load_map(mesh, mp, &mut manifest)?,
        (Some(m), None) => {
            manifest.input(m)?;
            PLMap::identity(Arc::new(pio::read_mesh(m)?))
        }
        (None, None) => {
            return Err(CoreError::Parse("minimize: need --mesh or --map".into()));
        }
    };
    manifest.input(model_path)?;
    manifest.param("budget", Value::from(budget as i64));
    manifest.param("constraint", Value::from(constraint));
    let model = pio::read_model(model_path, initial.dim())?;
    let constraint = match constraint {
        "deg1loc" => Constraint::Deg1Loc,
        "cncpenalty" => Constraint::CncPenalty,
        other => return Err(CoreError::Parse(format!("unknown constraint '{other}'"))),
    };

    let record = elasticity::minimize(&model, &initial, constraint, budget)?;
    let cert = elasticity::certify_minimizer(&model, &record);

    let mesh_name = "final_mesh.json";
    pio::write_mesh(&out.join(mesh_name), &record.final_map.mesh)?;
    pio::write_deformation(&out.join("final_deformation.json"), &record.final_map, mesh_name)?;

    let doc = json!({
        "certificate": {
            "globally_injective": cert.globally_injective,
            "injective_ae": verdict_str(cert.injective_ae),
            "reduced_excluded": cert.reduced_excluded,
        },
        "constraint_log": record.constraint_log,
        "converged": record.converged,
        "energies": record.energies,
        "iterations": record.iterations,
    });
    let record_path = out.join("minimize_record.json");
    pio::write_document(&record_path, &doc)?;
    manifest.output(&out.join(mesh_name))?;
    manifest.output(&out.join("final_deformation.json"))?;
    manifest.output(&record_path)?;
    manifest.write(out)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// selftest

struct Suite {
    checks: Vec<(String, bool, String)>,
}

impl Suite {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        self.checks.push((name.to_string(), ok, detail));
    }
}

fn expectations_pass(suite: &mut Suite, f: &Fixture) {
    let a = f.map.mesh.full_submesh();
    for e in &f.expectations {
        let name = format!("{}: {}", f.name, e.label);
        match degree_boundary(&f.map, &a, e.query) {
            Ok(d) => {
                let mut ok = d == e.expected_degree;
                let mut detail = format!("boundary winding {d}, expected {}", e.expected_degree);
                // cross-check with the regular-value oracle where regular
                if let Ok(ds) = degree_regular_sum(&f.map, &a, e.query) {
                    ok &= ds == e.expected_degree;
                    detail.push_str(&format!(", regular sum {ds}"));
                }
                let gap = f.map.dist_to_image_boundary(&a, e.query);
                if let Ok(di) = degree_integral(
                    &f.map,
                    &a,
                    e.query,
                    &MollifierSpec { center: e.query, radius: 0.25 * gap },
                ) {
                    ok &= (di - e.expected_degree as f64).abs() < 1e-2;
                    detail.push_str(&format!(", integral {di:.6}"));
                }
                suite.record(&name, ok, detail);
            }
            Err(err) => suite.record(&name, false, err.to_string()),
        }
    }
}

fn cmd_selftest(seed: u64, strict: bool, out: &Path) -> Result<i32, CoreError> {
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("selftest");
    manifest.seed = seed;
    manifest.param("seed", Value::from(seed));
    let mut suite = Suite { checks: Vec::new() };

    // paper fixture expectations across all degree algorithms
    let angle = fixtures::fixture_angle_doubling(64);
    let annulus = fixtures::fixture_annulus_translation(64);
    let (cone_y, cone_yhat) = fixtures::fixture_cone_flip(64);
    let stacked2 = fixtures::fixture_stacked_holes(2, 2);
    let stacked3 = fixtures::fixture_stacked_holes(3, 3);
    let pinch = fixtures::fixture_pinch(32);
    let overwrap = fixtures::fixture_overwrap(32);
    for f in [&angle, &annulus, &cone_y, &cone_yhat, &stacked2, &stacked3, &pinch, &overwrap] {
        expectations_pass(&mut suite, f);
    }

    // normalization invariant
    {
        let mesh = Arc::new(fixtures::square_grid_mesh(4, [0.0, 0.0, 0.0], 1.0));
        let map = PLMap::identity(mesh.clone());
        let a = mesh.full_submesh();
        let inside = degree_boundary(&map, &a, [0.4, 0.6, 0.0])?;
        let outside = degree_boundary(&map, &a, [3.0, 3.0, 0.0])?;
        suite.record(
            "identity normalization",
            inside == 1 && outside == 0,
            format!("inside {inside}, outside {outside}"),
        );
    }

    // change-of-variables residuals
    {
        let mesh = Arc::new(fixtures::square_grid_mesh(4, [0.0, 0.0, 0.0], 1.0));
        let map = PLMap::identity(mesh.clone());
        let a = mesh.full_submesh();
        let r = conditions::change_of_variables_check(&map, &a, &conditions::TestDensity::One)?;
        suite.record(
            "change of variables, identity",
            r.residual < 1e-12,
            format!("residual {:.3e}", r.residual),
        );
        let a2 = angle.map.mesh.full_submesh();
        let r2 = conditions::change_of_variables_check(
            &angle.map,
            &a2,
            &conditions::TestDensity::One,
        )?;
        suite.record(
            "change of variables, angle doubling",
            r2.residual < 1e-10,
            format!("residual {:.3e}", r2.residual),
        );
        let (_, cnc) = conditions::check_cnc(&angle.map, 200_000, seed);
        let ratio = cnc.lhs / cnc.rhs_exact.unwrap_or(f64::NAN);
        suite.record(
            "angle-doubling double cover factor",
            (ratio - 2.0).abs() < 1e-2,
            format!("lhs/rhs {ratio:.6}"),
        );
    }

    // equivalence ledger on the 2D corpus
    {
        let mesh = Arc::new(fixtures::square_grid_mesh(4, [0.0, 0.0, 0.0], 1.0));
        let corpus = vec![
            ("identity".to_string(), PLMap::identity(mesh.clone())),
            ("random-op".to_string(), fixtures::random_op_map(mesh, seed)),
            ("angle-doubling".to_string(), angle.map.clone()),
            ("annulus".to_string(), annulus.map.clone()),
            ("pinch".to_string(), pinch.map.clone()),
            ("overwrap".to_string(), overwrap.map.clone()),
        ];
        let ledger = conditions::cross_equivalences(&corpus, 200_000, seed)?;
        for row in &ledger.rows {
            suite.record(
                &format!("ledger row: {}", row.name),
                row.violations.is_empty(),
                if row.violations.is_empty() {
                    "consistent".to_string()
                } else {
                    row.violations.join("; ")
                },
            );
        }
    }

    // AIB push-off on the pinch
    {
        let (v, cert) = conditions::check_aib(&pinch.map, 12);
        let ok = v.verdict == Verdict::Holds
            && cert.map_or(false, |c| c.sup_distances.windows(2).all(|w| w[1] < w[0]));
        suite.record("pinch approximate boundary invertibility", ok, v.evidence);
    }

    let passed = suite.checks.iter().filter(|c| c.1).count();
    let failed = suite.checks.len() - passed;
    let checks: Vec<Value> = suite
        .checks
        .iter()
        .map(|(name, ok, detail)| json!({ "detail": detail, "name": name, "ok": ok }))
        .collect();
    let doc = json!({
        "checks": checks,
        "failed": failed,
        "passed": passed,
    });
    let report_path = out.join("selftest_report.json");
    pio::write_document(&report_path, &doc)?;
    manifest.output(&report_path)?;
    manifest.write(out)?;
    Ok(if strict && failed > 0 { 1 } else { 0 })
}

// ---------------------------------------------------------------------------

fn dispatch(cli: Cli) -> Result<i32, CoreError> {
    match &cli.command {
        Command::Degree { mesh, map, submesh, query, out } => {
            cmd_degree(mesh, map, *submesh, query, out)
        }
        Command::DegreeField { mesh, map, resolution, out } => {
            cmd_degree_field(mesh, map, *resolution, out)
        }
        Command::Topology { mesh, map, covering, resolution, out } => {
            cmd_topology(mesh, map, *covering, *resolution, out)
        }
        Command::Check { mesh, map, conditions, seed, samples, strict, out } => {
            cmd_check(mesh, map, conditions, *seed, *samples, *strict, out)
        }
        Command::Fixtures { name, n, target, out } => cmd_fixtures(name, *n, *target, out),
        Command::Minimize { mesh, map, model, constraint, budget, seed, out } => {
            cmd_minimize(mesh, map, model, constraint, *budget, *seed, out)
        }
        Command::Selftest { seed, strict, out } => cmd_selftest(*seed, *strict, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
