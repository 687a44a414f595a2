use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use auricle_core::acquisition::{
    simulate_cohort as run_cohort, simulate_exercise_study, CohortConfig, ExerciseResponse, TestLabel, PERIODS,
};
use auricle_core::analysis::{
    cluster_pipeline, concordance, correlation, has_side_labels, interpolate_contour, normalize_matrix_spatial,
    normalize_temporal, AESRMatrix, ClusterSpace, ExclusionRule, Normalization, PipelineOptions,
};
use auricle_core::electrode_design::{design_array, DesignOptions, TiltPolicy, DEFAULT_TARGET_AREA};
use auricle_core::geometry::io::{write_ply, write_vtk};
use auricle_core::geometry::{load_mesh, place_aps, ApTemplate, AuricularPointSet, MeshFormat, SurfaceMesh};
use auricle_core::seed::{self, stream};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{AnalyzeArgs, CohortArgs, ContourArgs, ContourFormat, DesignArgs, PlaceArgs, SessionArgs, TemplateArg};
use crate::provenance::Provenance;
use crate::{CliError, Outcome};

fn load_surface(path: &Path) -> Result<SurfaceMesh, CliError> {
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| CliError::input(format!("{}: unknown mesh format (expected .obj or .ply)", path.display())))?;
    load_mesh(path, format).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_template(arg: &TemplateArg) -> Result<ApTemplate, CliError> {
    match arg.template.as_str() {
        "ap10" => Ok(ApTemplate::default_10()),
        "ap13" => Ok(ApTemplate::default_13()),
        path => ApTemplate::load(Path::new(path)).map_err(|e| CliError::input(format!("template {path}: {e}"))),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))
}

fn write_failed(path: &Path, e: std::io::Error) -> CliError {
    CliError::input(format!("cannot write {}: {e}", path.display()))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| write_failed(path, e))
}

fn read_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("config {}: {e}", path.display())))
}

fn mesh_options(mesh: &SurfaceMesh) -> Value {
    json!({ "vertices": mesh.vertex_count(), "faces": mesh.face_count() })
}

pub fn design(a: &DesignArgs) -> Result<Outcome, CliError> {
    let mesh = load_surface(&a.mesh)?;
    let template = load_template(&a.template)?;
    let target = a.target_area.unwrap_or(DEFAULT_TARGET_AREA);
    if !(target > 0.0 && target.is_finite()) {
        return Err(CliError::input(format!("--target-area must be positive, got {target}")));
    }
    if !(a.tolerance > 0.0 && a.tolerance < 1.0) {
        return Err(CliError::input(format!("--tolerance must lie in (0, 1), got {}", a.tolerance)));
    }
    let options = json!({
        "template": template.to_text(),
        "target_area_mm2": target,
        "tilt_deg": a.tilt_deg,
        "tolerance": a.tolerance,
    });
    let provenance = Provenance::new("design", options, &[&a.mesh], None)?;

    let aps = place_aps(&mesh, &template).map_err(|e| CliError::input(e.to_string()))?;
    let tilt = if a.tilt_deg == 0.0 { TiltPolicy::Normal } else { TiltPolicy::Uniform(a.tilt_deg) };
    let opts = DesignOptions { tolerance: a.tolerance, ..Default::default() };
    let design = design_array(&mesh, &aps, target, &tilt, &opts).map_err(|e| CliError::input(e.to_string()))?;
    for f in &design.failed {
        log::error!("{}: {}", f.ap, f.reason);
    }
    write_json(&a.out, &json!({ "provenance": provenance, "mesh": mesh_options(&mesh), "design": design }))?;

    let (dmin, dmax) = design
        .electrodes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.diameter_mm), hi.max(e.diameter_mm)));
    let range = if design.electrodes.is_empty() { "none".to_string() } else { format!("D {dmin:.3}-{dmax:.3} mm") };
    Ok(Outcome {
        summary: format!(
            "design: {}/{} electrodes, {range}, area spread {:.2e} -> {}",
            design.electrodes.len(),
            aps.len(),
            design.area_spread(),
            a.out.display()
        ),
        partial: !design.is_complete(),
    })
}

#[derive(Serialize)]
struct PlacedAps<'a> {
    provenance: Provenance,
    #[serde(flatten)]
    aps: &'a AuricularPointSet,
}

pub fn place(a: &PlaceArgs) -> Result<Outcome, CliError> {
    let mesh = load_surface(&a.mesh)?;
    let template = load_template(&a.template)?;
    let provenance = Provenance::new("place", json!({ "template": template.to_text() }), &[&a.mesh], None)?;
    let aps = place_aps(&mesh, &template).map_err(|e| CliError::input(e.to_string()))?;
    let value = serde_json::to_value(PlacedAps { provenance, aps: &aps }).expect("serializes");
    write_json(&a.out, &value)?;
    Ok(Outcome { summary: format!("place: {} APs -> {}", aps.len(), a.out.display()), partial: false })
}

pub fn simulate_cohort(a: &CohortArgs) -> Result<Outcome, CliError> {
    let config: CohortConfig = read_config(a.config.as_deref())?;
    config.validate().map_err(|e| CliError::input(e.to_string()))?;
    let options = serde_json::to_value(&config).expect("config serializes");
    let provenance = Provenance::new("simulate cohort", options, &[], Some(a.seed))?;
    let cohort = run_cohort(&config, a.seed).map_err(|e| CliError::input(e.to_string()))?;
    let matrix = cohort.to_matrix().map_err(|e| CliError::input(e.to_string()))?;

    let comments = provenance.comment_lines();
    let mut w = create(&a.out)?;
    matrix.write_csv(&comments, &mut w).and_then(|_| w.flush()).map_err(|e| write_failed(&a.out, e))?;
    if let Some(path) = &a.truth {
        let mut w = create(path)?;
        let mut write = || -> std::io::Result<()> {
            for c in &comments {
                writeln!(w, "# {c}")?;
            }
            writeln!(w, "label,archetype")?;
            for e in &cohort.ears {
                writeln!(w, "{},{}", e.label(), config.archetypes[e.archetype].name)?;
            }
            w.flush()
        };
        write().map_err(|e| write_failed(path, e))?;
    }
    Ok(Outcome {
        summary: format!(
            "simulate cohort: {} ears x {} APs, concordance {:.2}, seed {} -> {}",
            matrix.nrows(),
            matrix.ncols(),
            cohort.true_concordance(),
            a.seed,
            a.out.display()
        ),
        partial: false,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct SessionConfig {
    volunteers: usize,
    tests: Vec<TestLabel>,
    #[serde(flatten)]
    response: ExerciseResponse,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self { volunteers: 20, tests: TestLabel::ALL.to_vec(), response: ExerciseResponse::default() }
    }
}

pub fn simulate_session(a: &SessionArgs) -> Result<Outcome, CliError> {
    let config: SessionConfig = read_config(a.config.as_deref())?;
    if config.volunteers == 0 {
        return Err(CliError::input("invalid config field `volunteers`: must be at least 1"));
    }
    if config.tests.is_empty() {
        return Err(CliError::input("invalid config field `tests`: at least one test is required"));
    }
    config.response.validate().map_err(|e| CliError::input(e.to_string()))?;
    let periods: Vec<usize> = a
        .periods
        .iter()
        .map(|p| PERIODS.iter().position(|q| q == p).ok_or_else(|| CliError::input(format!("unknown period `{p}` (expected I, II, III or IV)"))))
        .collect::<Result<_, _>>()?;

    let mut options = serde_json::to_value(&config).expect("config serializes");
    if a.matrix_out.is_some() {
        options["matrix_periods"] = json!(a.periods);
    }
    let provenance = Provenance::new("simulate session", options, &[], Some(a.seed))?;
    let sessions = simulate_exercise_study(&config.response, config.volunteers, &config.tests, a.seed)
        .map_err(|e| CliError::input(e.to_string()))?;
    write_json(&a.out, &json!({ "provenance": provenance, "config": config, "sessions": sessions }))?;

    if let Some(path) = &a.matrix_out {
        let mut labels = Vec::new();
        let mut rows = Vec::new();
        for s in &sessions {
            let n = normalize_temporal(s).map_err(|e| CliError::input(e.to_string()))?;
            for &p in &periods {
                labels.push(s.label(p));
                rows.push(n[p].clone());
            }
        }
        let m = AESRMatrix::from_rows(labels, &rows).map_err(|e| CliError::input(e.to_string()))?;
        let mut w = create(path)?;
        m.write_csv(&provenance.comment_lines(), &mut w).and_then(|_| w.flush()).map_err(|e| write_failed(path, e))?;
    }
    Ok(Outcome {
        summary: format!(
            "simulate session: {} volunteers x {} tests, seed {} -> {}",
            config.volunteers,
            config.tests.len(),
            a.seed,
            a.out.display()
        ),
        partial: false,
    })
}

fn parse_k_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::input(format!("--k-range `{s}`: expected MIN..MAX"));
    let (lo, hi) = s.split_once("..").or_else(|| s.split_once('-')).or_else(|| s.split_once(':')).ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if lo < 2 || hi < lo {
        return Err(CliError::input(format!("--k-range `{s}`: need 2 <= MIN <= MAX")));
    }
    Ok((lo, hi))
}

fn reference_column(m: &AESRMatrix, spec: &str) -> Result<Option<usize>, CliError> {
    if spec.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    if let Some(j) = m.columns().iter().position(|c| c.eq_ignore_ascii_case(spec)) {
        return Ok(Some(j));
    }
    match spec.parse::<usize>() {
        Ok(j) if (1..=m.ncols()).contains(&j) => Ok(Some(j - 1)),
        _ => Err(CliError::input(format!("--normalize `{spec}`: no such column (use a column name, a 1-based index or `none`)"))),
    }
}

fn read_covariate(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    let err = |msg: String| CliError::input(format!("covariate {}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 2 {
            return Err(err(format!("row {}: expected `label,value`", i + 1)));
        }
        let v: f64 = rec[1].parse().map_err(|_| err(format!("row {}: `{}` is not a number", i + 1, &rec[1])))?;
        if !v.is_finite() {
            return Err(err(format!("row {}: value must be finite", i + 1)));
        }
        if out.insert(rec[0].to_string(), v).is_some() {
            return Err(err(format!("row {}: duplicate label `{}`", i + 1, &rec[0])));
        }
    }
    Ok(out)
}

pub fn analyze(a: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let (k_min, k_max) = parse_k_range(&a.k_range)?;
    let raw = AESRMatrix::load_csv(&a.data).map_err(|e| CliError::input(format!("{}: {e}", a.data.display())))?;
    let rows_read = raw.nrows();
    let selected = if a.select.is_empty() {
        raw
    } else {
        let labels = raw.labels().to_vec();
        raw.filter_rows(|i| a.select.iter().any(|p| labels[i].starts_with(p.as_str())))
    };
    let reference = reference_column(&selected, &a.normalize)?;
    let normalized = match reference {
        Some(j) => normalize_matrix_spatial(&selected, j).map_err(|e| CliError::input(e.to_string()))?,
        None => selected,
    };
    let rule = ExclusionRule { min: a.exclude_min, max: a.exclude_max };
    let flagged = if a.no_exclude { Vec::new() } else { rule.flag(&normalized) };
    let excluded: Vec<String> = flagged.iter().map(|&i| normalized.labels()[i].clone()).collect();
    let matrix = normalized.filter_rows(|i| !flagged.contains(&i));

    let options = PipelineOptions {
        normalization: Normalization::None,
        pca_components: a.components,
        scale: a.scale,
        cluster_space: if a.raw { ClusterSpace::Raw } else { ClusterSpace::Pca },
        k_min,
        k_max,
        restarts: a.restarts,
        seed: a.seed,
    };
    let effective = json!({
        "select": a.select,
        "normalize_reference": reference.map(|j| matrix.columns()[j].clone()),
        "exclusion": if a.no_exclude { Value::Null } else { json!({ "min": rule.min, "max": rule.max }) },
        "pipeline": options,
        "permutations": a.covariate.as_ref().map(|_| a.permutations),
    });
    let mut inputs: Vec<&Path> = vec![&a.data];
    if let Some(c) = &a.covariate {
        inputs.push(c);
    }
    let provenance = Provenance::new("analyze", effective.clone(), &inputs, Some(a.seed))?;

    let report = cluster_pipeline(&matrix, &options).map_err(|e| CliError::input(e.to_string()))?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let side = if has_side_labels(matrix.labels()) {
        Some(concordance(&report.assignments, matrix.labels(), report.k).map_err(|e| CliError::input(e.to_string()))?)
    } else {
        None
    };

    let mut partial = false;
    let covariate = match &a.covariate {
        None => Value::Null,
        Some(path) => {
            let cov = read_covariate(path)?;
            let y: Vec<f64> = matrix
                .labels()
                .iter()
                .map(|l| cov.get(l).copied().ok_or_else(|| CliError::input(format!("covariate has no value for `{l}`"))))
                .collect::<Result<_, _>>()?;
            let mut per_column = Vec::with_capacity(matrix.ncols());
            let mut pccs = Vec::new();
            for (j, name) in matrix.columns().iter().enumerate() {
                if reference == Some(j) {
                    // identically 1 after normalization
                    per_column.push(json!({ "column": name, "reference": true }));
                    continue;
                }
                let x: Vec<f64> = matrix.values().column(j).iter().copied().collect();
                match correlation(&x, &y, a.permutations, seed::derive(a.seed, stream::PERMUTATION, j as u64)) {
                    Ok(r) => {
                        pccs.push(r.pcc);
                        per_column.push(json!({ "column": name, "result": r }));
                    }
                    Err(e) => {
                        log::warn!("{name}: {e}");
                        partial = true;
                        per_column.push(json!({ "column": name, "error": e.to_string() }));
                    }
                }
            }
            let mean = if pccs.is_empty() { Value::Null } else { json!(pccs.iter().sum::<f64>() / pccs.len() as f64) };
            json!({ "columns": per_column, "mean_pcc": mean })
        }
    };

    write_json(
        &a.out,
        &json!({
            "provenance": provenance,
            "options": effective,
            "input": { "rows_read": rows_read, "rows_used": matrix.nrows(), "columns": matrix.columns() },
            "excluded": excluded,
            "cluster": report,
            "concordance": side,
            "covariate": covariate,
        }),
    )?;

    let ev: f64 = report.explained_variance_ratio.iter().sum();
    let conc = side.map(|c| format!(", concordance {:.2}", c.fraction)).unwrap_or_default();
    Ok(Outcome {
        summary: format!(
            "analyze: {} rows, K* = {}, mean silhouette {:.3}, EV({}) {:.3}{conc} -> {}",
            matrix.nrows(),
            report.k,
            report.mean_silhouette,
            report.explained_variance_ratio.len(),
            ev,
            a.out.display()
        ),
        partial,
    })
}

fn read_ap_values(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    // same two-column layout as a covariate file
    read_covariate(path).map_err(|CliError::Input(m)| CliError::input(m.replacen("covariate", "values", 1)))
}

pub fn contour(a: &ContourArgs) -> Result<Outcome, CliError> {
    let mesh = load_surface(&a.mesh)?;
    let text = std::fs::read_to_string(&a.aps).map_err(|e| CliError::input(format!("cannot read {}: {e}", a.aps.display())))?;
    let placed = AuricularPointSet::from_json(&text).map_err(|e| CliError::input(format!("{}: {e}", a.aps.display())))?;
    let by_label = read_ap_values(&a.values)?;
    if by_label.len() != placed.len() {
        return Err(CliError::input(format!("{} APs but {} values", placed.len(), by_label.len())));
    }
    let values: Vec<f64> = placed
        .labels()
        .iter()
        .map(|l| by_label.get(*l).copied().ok_or_else(|| CliError::input(format!("no value for AP `{l}`"))))
        .collect::<Result<_, _>>()?;
    // re-anchor positions on this mesh
    let labelled: Vec<(String, _)> = placed.points.iter().map(|p| (p.label.clone(), p.position)).collect();
    let aps = AuricularPointSet::from_positions(&mesh, &labelled);

    let format = match a.format {
        ContourFormat::Ply => "ply",
        ContourFormat::Vtk => "vtk",
    };
    let provenance = Provenance::new("contour", json!({ "format": format, "field": a.field }), &[&a.mesh, &a.aps, &a.values], None)?;
    let field = interpolate_contour(&mesh, &aps, &values).map_err(|e| CliError::input(e.to_string()))?;
    for w in &field.warnings {
        log::warn!("{w}");
    }
    let mut w = create(&a.out)?;
    let written = match a.format {
        ContourFormat::Ply => write_ply(&mesh, Some((&a.field, &field.values)), &provenance.comment_lines(), &mut w),
        ContourFormat::Vtk => {
            let title = format!("{} {} config_sha256={} seed=none", provenance.tool, provenance.command, provenance.config_sha256);
            write_vtk(&mesh, &a.field, &field.values, &title, &mut w)
        }
    };
    written.and_then(|_| w.flush()).map_err(|e| write_failed(&a.out, e))?;
    Ok(Outcome {
        summary: format!(
            "contour: {} APs over {} vertices ({:?}) -> {}",
            aps.len(),
            mesh.vertex_count(),
            field.method,
            a.out.display()
        ),
        partial: false,
    })
}
