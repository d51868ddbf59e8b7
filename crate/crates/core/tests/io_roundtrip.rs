use nbekcf::eval::summarize;
use nbekcf::io::{
    list_sequence, load_groundtruth, load_image, read_results, write_metrics, write_pgm, write_results,
};
use nbekcf::{BoundingBox, Error, GrayImage};

#[test]
fn pgm_write_then_load() {
    let dir = tempfile::tempdir().unwrap();
    let img = GrayImage::from_fn(3, 5, |y, x| ((y * 5 + x) * 17) as f64 / 255.0).unwrap();
    let path = dir.path().join("a.pgm");
    write_pgm(&path, &img).unwrap();
    let back = load_image(&path).unwrap();
    for (a, b) in img.pixels().iter().zip(back.pixels()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn corrupt_png_and_missing_file_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.png");
    std::fs::write(&path, b"\x89PNG\r\n\x1a\nnot really").unwrap();
    assert!(load_image(&path).is_err());
    assert!(matches!(load_image(dir.path().join("missing.pgm")), Err(Error::Io { .. })));
}

#[test]
fn sequence_is_lexicographic_and_filtered() {
    let dir = tempfile::tempdir().unwrap();
    let img = GrayImage::new(2, 2, vec![0.0; 4]).unwrap();
    for name in ["0010.pgm", "0002.pgm", "0001.pgm"] {
        write_pgm(dir.path().join(name), &img).unwrap();
    }
    std::fs::write(dir.path().join("groundtruth_rect.txt"), "1,1,2,2\n").unwrap();
    let names: Vec<String> = list_sequence(dir.path())
        .unwrap()
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["0001.pgm", "0002.pgm", "0010.pgm"]);
}

#[test]
fn results_and_groundtruth_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let boxes = vec![
        BoundingBox::new(0.0, 1.5, 10.25, 20.0).unwrap(),
        BoundingBox::new(3.1234, 4.0, 5.0, 6.5).unwrap(),
    ];
    let csv = dir.path().join("out.csv");
    write_results(&csv, &boxes).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(read_results(&csv).unwrap(), boxes);

    let gt = dir.path().join("gt.txt");
    std::fs::write(&gt, "1,1,10,10\n4\t5\t6\t7\n").unwrap();
    let parsed = load_groundtruth(&gt).unwrap();
    assert_eq!(parsed[0], BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap());
    assert_eq!(parsed[1], BoundingBox::new(3.0, 4.0, 6.0, 7.0).unwrap());

    std::fs::write(&gt, "1,1,10,10\nabc\n").unwrap();
    assert!(matches!(load_groundtruth(&gt), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn metrics_json_has_flat_fields() {
    let dir = tempfile::tempdir().unwrap();
    let b = vec![BoundingBox::new(0.0, 0.0, 4.0, 4.0).unwrap(); 2];
    let m = summarize(&b, &b).unwrap();
    let path = dir.path().join("m.json");
    write_metrics(&path, &m).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in [
        "mean_center_error",
        "distance_precision",
        "precision_curve",
        "mean_overlap",
        "overlap_precision",
        "success_curve",
        "auc",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["precision_curve"].as_array().unwrap().len(), 51);
    assert!(write_metrics(dir.path().join("no/such/dir/m.json"), &m).is_err());
}
