use std::path::PathBuf;

use tdefie::harness::{run_manufactured, scattering_run, MeshConfig, RunConfig, SourceConfig, WaveformConfig};

fn level_one() -> RunConfig {
    let mut cfg = RunConfig {
        mesh: MeshConfig {
            path: Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/meshes/icosphere_1.off")),
            format: None,
            level: 1,
        },
        ..RunConfig::default()
    };
    cfg.incident.source = SourceConfig::Dipole {
        position: [0.0; 3],
        moment: [0.0, 0.0, 1.0],
    };
    cfg.incident.waveform = WaveformConfig {
        omega: 2.0,
        ramp: Some(std::f64::consts::PI),
        support: None,
    };
    cfg
}

#[test]
fn errors_at_distance_six_stay_within_twice_distance_three() {
    let near = level_one();
    let mut far = level_one();
    far.probes = near.probes.iter().map(|p| p.map(|v| 2.0 * v)).collect();
    let a = scattering_run(&near, &near.mesh).unwrap();
    let b = scattering_run(&far, &far.mesh).unwrap();
    for (p, q) in a.probes.iter().zip(&b.probes) {
        let (e3, e6) = (p.error.unwrap(), q.error.unwrap());
        println!("distance 3: {e3:.4}, distance 6: {e6:.4}");
        assert!(e6 <= 2.0 * e3, "distance 6 error {e6} vs distance 3 error {e3}");
    }
}

#[test]
fn csv_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let mut cfg = level_one();
        cfg.cq.horizon = Some(8.0);
        cfg.outputs.density_csv = Some(dir.path().join(format!("j{run}.csv")));
        cfg.outputs.field_csv = Some(dir.path().join(format!("e{run}.csv")));
        run_manufactured(&cfg).unwrap();
        outputs.push((
            std::fs::read(cfg.outputs.density_csv.unwrap()).unwrap(),
            std::fs::read(cfg.outputs.field_csv.unwrap()).unwrap(),
        ));
    }
    assert!(!outputs[0].0.is_empty() && !outputs[0].1.is_empty());
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn density_history_round_trips_through_csv() {
    let mut cfg = level_one();
    cfg.cq.horizon = Some(6.0);
    let run = scattering_run(&cfg, &cfg.mesh).unwrap();
    let parsed = tdefie::cq::parse_history_csv(&run.density.to_csv()).unwrap();
    assert_eq!(parsed.steps(), run.density.steps());
    assert_eq!(parsed.onset(), run.density.onset());
}
