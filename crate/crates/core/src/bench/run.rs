//! Benchmark execution and result tables.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::plan::{derive_seed, BenchPlan, DataCell, FieldChoice, Method, RunCell};
use super::shapes::sample_shape;
use crate::fields::{build_mls_field, FieldAtlas, OracleField};
use crate::geometry::{build_knn_graph, normalize, NeighborGraph, PointCloud, TriMesh};
use crate::learned::{LearnedField, PerceptronParams};
use crate::metrics::{chamfer_distance, outlier_fraction, point_to_mesh, DISPLAY_SCALE};
use crate::noise::{add_noise, noise_scale, NoiseKind, NoiseSpec};
use crate::solver::denoise;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed,
}

/// One benchmark cell. Metrics are raw; the `_x1e4` columns repeat them
/// scaled for display. Everything except `time_ms` is reproducible from the
/// plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub row: usize,
    pub data_cell: usize,
    pub shape: String,
    pub noise_kind: NoiseKind,
    pub noise_level: f64,
    pub repetition: usize,
    pub seed: u64,
    pub n_points: usize,
    pub field: String,
    pub method: Method,
    pub steps: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub knn: usize,
    pub status: RowStatus,
    pub error: Option<String>,
    pub cd_before: Option<f64>,
    pub cd_after: Option<f64>,
    pub p2m_before: Option<f64>,
    pub p2m_after: Option<f64>,
    /// Fraction of points farther than `outlier_multiple` noise scales
    /// from the surface.
    pub outliers_before: Option<f64>,
    pub outliers_after: Option<f64>,
    pub cd_before_x1e4: Option<f64>,
    pub cd_after_x1e4: Option<f64>,
    pub p2m_before_x1e4: Option<f64>,
    pub p2m_after_x1e4: Option<f64>,
    pub time_ms: Option<f64>,
}

impl BenchRow {
    fn new(row: usize, data: &DataCell, n_points: usize, run: &RunCell) -> Self {
        BenchRow {
            row,
            data_cell: data.index,
            shape: data.shape.to_string(),
            noise_kind: data.noise_kind,
            noise_level: data.noise_level,
            repetition: data.repetition,
            seed: data.seed,
            n_points,
            field: run.field.to_string(),
            method: run.method,
            steps: run.config.steps,
            alpha: run.config.alpha,
            beta: run.config.beta,
            gamma: run.config.gamma,
            knn: run.knn,
            status: RowStatus::Failed,
            error: None,
            cd_before: None,
            cd_after: None,
            p2m_before: None,
            p2m_after: None,
            outliers_before: None,
            outliers_after: None,
            cd_before_x1e4: None,
            cd_after_x1e4: None,
            p2m_before_x1e4: None,
            p2m_after_x1e4: None,
            time_ms: None,
        }
    }

    fn fill(&mut self, before: &Scores, after: &Scores, time_ms: f64) {
        let x = |v: f64| Some(v * DISPLAY_SCALE);
        self.status = RowStatus::Ok;
        self.cd_before = Some(before.cd);
        self.cd_after = Some(after.cd);
        self.p2m_before = Some(before.p2m);
        self.p2m_after = Some(after.p2m);
        self.outliers_before = Some(before.outliers);
        self.outliers_after = Some(after.outliers);
        self.cd_before_x1e4 = x(before.cd);
        self.cd_after_x1e4 = x(after.cd);
        self.p2m_before_x1e4 = x(before.p2m);
        self.p2m_after_x1e4 = x(after.p2m);
        self.time_ms = Some(time_ms);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub plan_hash: String,
    pub plan: BenchPlan,
    pub rows: Vec<BenchRow>,
}

impl BenchResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::invalid(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `results.csv` and `results.json` into `dir`, creating it.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join("results.csv");
        fs::write(&csv_path, self.to_csv()?).map_err(|e| Error::io(&csv_path, e))?;
        let json_path = dir.join("results.json");
        let json = serde_json::to_string_pretty(self).expect("results serialize");
        fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
        Ok(())
    }
}

struct Scores {
    cd: f64,
    p2m: f64,
    outliers: f64,
}

fn score(cloud: &PointCloud, data: &Instance) -> Result<Scores> {
    Ok(Scores {
        cd: chamfer_distance(cloud, &data.clean)?,
        p2m: point_to_mesh(cloud, &data.mesh)?,
        outliers: outlier_fraction(cloud, &data.mesh, data.outlier_threshold)?,
    })
}

/// Generated clouds for one data cell. `noisy` is normalized and carries
/// its transform; `mesh` and `clean` stay in the original frame.
struct Instance {
    clean: PointCloud,
    mesh: TriMesh,
    noisy: PointCloud,
    normalized_mesh: Arc<TriMesh>,
    outlier_threshold: f64,
    before: Scores,
}

fn prepare(plan: &BenchPlan, cell: &DataCell) -> Result<Instance> {
    let (clean, mesh) = sample_shape(&cell.shape, plan.n_points, derive_seed(cell.seed, 0))?;
    let noisy = if cell.noise_level > 0.0 {
        let spec = NoiseSpec::new(cell.noise_kind, cell.noise_level, derive_seed(cell.seed, 1))?;
        add_noise(&clean, &spec)?
    } else {
        clean.clone()
    };
    let (noisy, transform) = normalize(&noisy)?;
    let mut data = Instance {
        outlier_threshold: plan.outlier_multiple * noise_scale(&clean, cell.noise_level),
        normalized_mesh: Arc::new(mesh.transformed(&transform)),
        clean,
        mesh,
        noisy,
        before: Scores { cd: 0.0, p2m: 0.0, outliers: 0.0 },
    };
    data.before = score(&data.noisy.denormalized(), &data)?;
    Ok(data)
}

fn build_field(field: &FieldChoice, data: &Instance, graph: &NeighborGraph) -> Result<FieldAtlas> {
    let cloud = &data.noisy;
    Ok(match field {
        FieldChoice::Oracle => FieldAtlas::Oracle(OracleField::new(data.normalized_mesh.clone(), cloud.len())?),
        FieldChoice::Mls => FieldAtlas::Mls(build_mls_field(cloud, graph)?),
        FieldChoice::Learned(path) => {
            let params = Arc::new(PerceptronParams::load(path)?);
            FieldAtlas::Learned(LearnedField::for_cloud(params, cloud, graph)?)
        }
    })
}

fn execute(plan: &BenchPlan, run: &RunCell, data: &Instance, field: &FieldAtlas, graph: &NeighborGraph) -> Result<(Scores, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..plan.timing_repeats {
        let start = Instant::now();
        let (cloud, _) = denoise(&data.noisy, field, graph, &run.config, false)?;
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
        out = Some(cloud);
    }
    let out = out.expect("timing_repeats >= 1");
    Ok((score(&out, data)?, best))
}

/// Runs every cell of `plan` in order. A failing cell becomes a row with
/// status `failed` and the error message; the run carries on.
pub fn run_benchmark(plan: &BenchPlan) -> Result<BenchResult> {
    plan.validate()?;
    let runs = plan.run_cells();
    let mut rows = Vec::new();
    for cell in plan.data_cells() {
        log::info!(
            "data cell {}: {} {} {} rep {}",
            cell.index,
            cell.shape,
            cell.noise_kind,
            cell.noise_level,
            cell.repetition
        );
        let data = prepare(plan, &cell).map_err(|e| e.to_string());
        let mut graphs: HashMap<usize, std::result::Result<NeighborGraph, String>> = HashMap::new();
        let mut fields: HashMap<(FieldChoice, usize), std::result::Result<FieldAtlas, String>> = HashMap::new();
        for run in &runs {
            let mut row = BenchRow::new(rows.len(), &cell, plan.n_points, run);
            let outcome = data.as_ref().map_err(Clone::clone).and_then(|data| {
                let graph = graphs
                    .entry(run.knn)
                    .or_insert_with(|| build_knn_graph(&data.noisy, run.knn).map_err(|e| e.to_string()))
                    .as_ref()
                    .map_err(Clone::clone)?;
                let field = fields
                    .entry((run.field.clone(), run.knn))
                    .or_insert_with(|| build_field(&run.field, data, graph).map_err(|e| e.to_string()))
                    .as_ref()
                    .map_err(Clone::clone)?;
                execute(plan, run, data, field, graph)
                    .map(|(after, ms)| (&data.before, after, ms))
                    .map_err(|e| e.to_string())
            });
            match outcome {
                Ok((before, after, ms)) => row.fill(before, &after, ms),
                Err(message) => {
                    log::warn!("row {} failed: {message}", row.row);
                    row.error = Some(message);
                }
            }
            rows.push(row);
        }
    }
    Ok(BenchResult {
        plan_hash: plan.hash(),
        plan: plan.clone(),
        rows,
    })
}
