use std::path::PathBuf;

use helmlab::study::{
    asymptotic_rate, emit_svg, read_csv, reference_line, render_svg, run_convergence, write_csv, ConvergenceRecord,
    ErrorKind, Example, StudyConfig, CSV_HEADER,
};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("helmlab-study-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn csv_without_wall_time(recs: &[ConvergenceRecord]) -> Vec<u8> {
    let mut recs = recs.to_vec();
    recs.iter_mut().for_each(|r| r.wall_time_ms = 0.0);
    let mut buf = Vec::new();
    write_csv(&recs, &mut buf).unwrap();
    buf
}

#[test]
fn identical_configs_give_identical_csv() {
    let cfg = StudyConfig::new(Example::DiskAbc2, vec![1, 2], vec![0, 1, 2], vec![4.0, 6.0]);
    let a = run_convergence(&cfg).unwrap();
    let b = run_convergence(&cfg).unwrap();
    assert_eq!(csv_without_wall_time(&a), csv_without_wall_time(&b));
    let header = String::from_utf8(csv_without_wall_time(&a)).unwrap();
    assert!(header.starts_with(&(CSV_HEADER.join(",") + "\n")));
    assert!(a.windows(2).all(|w| (w[0].p, w[0].level) <= (w[1].p, w[1].level)));
}

#[test]
fn svg_is_well_formed_with_one_path_per_degree() {
    let cfg = StudyConfig::new(Example::DiskRobin, vec![1, 2, 3], vec![0, 1, 2], vec![4.0]);
    let recs = run_convergence(&cfg).unwrap();
    let dir = scratch("svg");
    let path = dir.join("conv.svg");
    emit_svg(&recs, &path, ErrorKind::L2, 2.0).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let paths = doc.descendants().filter(|n| n.has_tag_name("path")).count();
    assert_eq!(paths, 3);
    let dashed = doc.descendants().filter(|n| n.has_tag_name("line") && n.attribute("stroke-dasharray").is_some()).count();
    assert_eq!(dashed, 1);
    assert_eq!(render_svg(&recs, ErrorKind::L2, 2.0).unwrap(), text);
    let (a, b) = reference_line(&recs, ErrorKind::L2, 2.0).unwrap();
    assert!(((b[1] / a[1]).ln() / (b[0] / a[0]).ln() - 2.0).abs() <= 1e-9);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_drives_a_run() {
    let dir = scratch("cfg");
    let path = dir.join("study.toml");
    std::fs::write(
        &path,
        "example = \"disk_abc2\"\np = [1, 2]\nlevels = [1, 2, 3, 4]\nk = [4.0]\nabc_family = \"feng\"\n\n[output]\ndir = \"out\"\n",
    )
    .unwrap();
    let cfg = StudyConfig::load(&path).unwrap();
    let recs = run_convergence(&cfg).unwrap();
    for p in [1usize, 2] {
        let series: Vec<ConvergenceRecord> = recs.iter().filter(|r| r.p == p).cloned().collect();
        let s = asymptotic_rate(&series, ErrorKind::Energy, p as f64).unwrap();
        assert!((s - p as f64).abs() <= 0.25, "p={p}: {s}");
    }
    let csv = dir.join("conv.csv");
    let mut f = std::fs::File::create(&csv).unwrap();
    write_csv(&recs, &mut f).unwrap();
    drop(f);
    assert_eq!(read_csv(&csv).unwrap(), recs);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn quartic_level_four_run_is_populated() {
    let cfg = StudyConfig::new(Example::DiskRobin, vec![4], vec![4], vec![4.0]);
    let recs = run_convergence(&cfg).unwrap();
    let r = &recs[0];
    assert!(r.error.is_none());
    assert!(r.n_dof > 0 && r.n_lambda.is_finite() && r.n_lambda > 0.0);
    assert!(r.err_l2_rel.is_finite() && r.err_energy_rel.is_finite());
}
