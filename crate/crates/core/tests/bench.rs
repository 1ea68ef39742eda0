use pcdenoise::bench::{run_benchmark, BenchPlan, BenchRow, FieldChoice, Method, RowStatus, Shape};

fn without_time(rows: &[BenchRow]) -> Vec<BenchRow> {
    rows.iter().cloned().map(|r| BenchRow { time_ms: None, ..r }).collect()
}

#[test]
fn zero_noise_with_oracle_is_a_no_op() {
    let plan = BenchPlan {
        n_points: 2000,
        noise_levels: vec![0.0],
        fields: vec![FieldChoice::Oracle],
        methods: vec![Method::Momentum],
        ..BenchPlan::default()
    };
    let result = run_benchmark(&plan).unwrap();
    assert_eq!(result.rows.len(), 1);
    let row = &result.rows[0];
    assert_eq!(row.status, RowStatus::Ok, "{:?}", row.error);
    assert!(row.cd_before.unwrap() <= 1e-12);
    assert!(row.cd_after.unwrap() <= 1e-12);
    assert!(row.p2m_after.unwrap() <= 1e-12);
}

#[test]
fn rows_are_reproducible_and_failures_are_contained() {
    let plan = BenchPlan {
        n_points: 600,
        repetitions: 2,
        shapes: vec![Shape::Sphere, Shape::Mesh("does/not/exist.off".into())],
        fields: vec![FieldChoice::Mls, FieldChoice::Oracle],
        steps: vec![5, 15],
        ..BenchPlan::default()
    };
    let a = run_benchmark(&plan).unwrap();
    let b = run_benchmark(&plan).unwrap();
    assert_eq!(a.plan_hash, b.plan_hash);
    assert_eq!(without_time(&a.rows), without_time(&b.rows));
    // 2 shapes x 2 reps, each with 2 fields x 2 methods x 2 step counts
    assert_eq!(a.rows.len(), 4 * 8);
    for (i, row) in a.rows.iter().enumerate() {
        assert_eq!(row.row, i);
        let missing = row.shape.ends_with(".off");
        assert_eq!(row.status == RowStatus::Failed, missing);
        if missing {
            assert!(row.error.as_deref().unwrap().contains("exist.off"));
            assert!(row.cd_after.is_none());
        } else {
            assert!(row.p2m_after.unwrap() < row.p2m_before.unwrap());
            assert_eq!(row.cd_after_x1e4.unwrap(), row.cd_after.unwrap() * 1e4);
        }
    }
    // repetitions draw different data
    let sphere: Vec<&BenchRow> = a.rows.iter().filter(|r| r.shape == "sphere").collect();
    assert_ne!(sphere[0].seed, sphere[8].seed);
    assert_ne!(sphere[0].cd_before, sphere[8].cd_before);
}

#[test]
fn data_is_shared_across_runs_of_a_cell() {
    let plan = BenchPlan {
        n_points: 500,
        alphas: vec![0.5, 0.9],
        ..BenchPlan::default()
    };
    let result = run_benchmark(&plan).unwrap();
    assert_eq!(result.rows.len(), 3);
    assert!(result.rows.iter().all(|r| r.cd_before == result.rows[0].cd_before));
    let methods: Vec<(Method, f64)> = result.rows.iter().map(|r| (r.method, r.alpha)).collect();
    assert_eq!(methods, [(Method::Momentum, 0.5), (Method::Momentum, 0.9), (Method::Classical, 1.0)]);
}

#[test]
fn results_written_as_csv_and_json() {
    let plan = BenchPlan { n_points: 300, ..BenchPlan::default() };
    let result = run_benchmark(&plan).unwrap();
    let dir = tempfile::tempdir().unwrap();
    result.write_dir(dir.path().join("out")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("row,data_cell,shape,"));
    assert!(header.contains("cd_after_x1e4") && header.contains("time_ms"));
    assert_eq!(csv.lines().count(), 1 + result.rows.len());
    let json = std::fs::read_to_string(dir.path().join("out/results.json")).unwrap();
    let back: pcdenoise::bench::BenchResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back, result);
}
