use ripforge::harness::{
    emit_plot_data, parse_phase_csv, read_image, run_phase_transition, write_image, Image, PhaseRow,
    PhaseTransitionConfig,
};
use ripforge::{Error, Mat, Seed};

#[test]
fn phase_record_round_trips_through_csv() {
    let cfg = PhaseTransitionConfig {
        n: 64,
        l: 32,
        wavelet_levels: 1,
        sparsity_levels: vec![2, 4],
        cs_ratios: vec![0.125, 0.25, 0.5],
        trials: 8,
        base_seed: Seed(1),
        ..PhaseTransitionConfig::desk()
    };
    let rec = run_phase_transition(&cfg).unwrap();
    let (csv, svg) = emit_plot_data(&rec).unwrap();
    let rows = parse_phase_csv(&csv).unwrap();
    let want: Vec<PhaseRow> = rec.points.iter().map(PhaseRow::from).collect();
    assert_eq!(rows, want);
    assert_eq!(svg.matches("<polyline").count(), 4);
    let json = serde_json::to_string(&rec).unwrap();
    let back: ripforge::harness::ExperimentRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rec);
}

#[test]
fn images_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let ramp = Mat::from_fn(9, 17, |i, j| ((i * 17 + j) as f64) / 152.0);
    for (name, depth) in [("a.pgm", 8u8), ("b.pgm", 16), ("c.png", 8), ("d.png", 16)] {
        let path = dir.path().join(name);
        let img = Image::new(ramp.clone(), depth);
        write_image(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.bit_depth, depth);
        let step = if depth == 8 { 255.0 } else { 65535.0 };
        assert!(back.pixels.sub(&ramp).max_abs() <= 0.5 / step + 1e-12, "{name}");
        // Writing what was read reproduces the file.
        let again = dir.path().join(format!("again_{name}"));
        write_image(&again, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
    let bad = dir.path().join("bad.pgm");
    std::fs::write(&bad, b"P5\n4 4\n255\n\x01").unwrap();
    assert!(matches!(read_image(&bad), Err(Error::Parse { .. })));
}
