use std::path::Path;

use hyperprandtl::harness::report::Table;
use hyperprandtl::harness::{
    cmd_report, cmd_run, cmd_sweep, run_into, sweep_into, ExperimentKind, RunConfig, Snapshot,
    OUTPUT_ROOT_ENV,
};
use hyperprandtl::Error;

fn small(kind: ExperimentKind) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.grid.nx = 32;
    cfg.grid.ny = 17;
    cfg.data.m_max = 8;
    cfg.solver.t_final = 0.5;
    cfg.experiment.kind = kind;
    cfg
}

#[test]
fn zero_amplitude_run_is_all_zero() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in [ExperimentKind::Prandtl, ExperimentKind::Hns] {
        let mut cfg = small(kind);
        cfg.data.amplitude = 0.0;
        let out = run_into(&cfg, &tmp.path().join(format!("{kind:?}"))).unwrap();
        assert!(out.metadata.success);
        let table = Table::read(&out.directory.join("series.csv")).unwrap();
        assert_eq!(table.rows.len(), out.rows.len());
        for (i, name) in table.header.iter().enumerate() {
            if ["t", "radius"].contains(&name.as_str()) {
                continue;
            }
            assert!(table.rows.iter().all(|r| r[i] == 0.0), "{kind:?} column {name}");
        }
    }
}

#[test]
fn outputs_and_snapshots_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Hns);
    cfg.output.snapshot_every = 16;
    let out = run_into(&cfg, tmp.path()).unwrap();
    let m = &out.metadata;
    assert!(m.success);
    assert_eq!(m.steps_completed, m.steps_planned);
    assert!(m.version.starts_with("hyperprandtl "));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["experiment"]["kind"], "hns");
    assert!(meta["abort_reason"].is_null());

    let table = Table::read(&tmp.path().join("series.csv")).unwrap();
    assert_eq!(table.header, out.header);
    assert_eq!(table.rows, out.rows, "CSV values must round-trip exactly");
    assert!(table.column("E_s.term1.Linf.B_s").is_some());
    assert!(table.column("E1.term4.L2.B_1/2").is_some());

    let snap = Snapshot::load(&tmp.path().join("final.bin")).unwrap();
    assert_eq!(snap.fields.len(), 4);
    assert!((snap.t - cfg.solver.t_final).abs() < 1e-12);
    assert!((snap.eps - 0.1).abs() < 1e-15);
    assert!(tmp.path().join("snapshot_00000016.bin").exists());
    let first = Snapshot::load(&tmp.path().join("snapshot_00000016.bin")).unwrap();
    assert!((first.t - 16.0 * cfg.dt()).abs() < 1e-12);
}

#[test]
fn cfl_violation_is_recorded_and_outputs_kept() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Prandtl);
    cfg.solver.dt = Some(0.5);
    let out = run_into(&cfg, tmp.path()).unwrap();
    let m = &out.metadata;
    assert!(!m.success);
    assert!(m.abort_reason.as_deref().unwrap().contains("stability"));
    assert_eq!(m.steps_completed, 0);
    for f in ["series.csv", "metadata.json", "final.bin"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    assert_eq!(Table::read(&tmp.path().join("series.csv")).unwrap().rows.len(), 1);
}

#[test]
fn energy_growth_aborts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Prandtl);
    cfg.data.amplitude = 1e3;
    cfg.solver.growth_limit = 1.0001;
    cfg.solver.check_every = 1;
    let out = run_into(&cfg, tmp.path()).unwrap();
    assert!(!out.metadata.success);
    let reason = out.metadata.abort_reason.unwrap();
    assert!(reason.contains("energy") || reason.contains("non-finite"), "{reason}");
}

#[test]
fn output_root_variable_prefixes_relative_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Prandtl);
    cfg.output.directory = "nested/run".into();
    std::env::set_var(OUTPUT_ROOT_ENV, tmp.path());
    let out = cmd_run(&cfg).unwrap();
    std::env::remove_var(OUTPUT_ROOT_ENV);
    assert_eq!(out.directory, tmp.path().join("nested/run"));
    assert!(tmp.path().join("nested/run/series.csv").exists());
}

#[test]
fn sweep_preconditions() {
    let mut cfg = small(ExperimentKind::Sweep);
    cfg.experiment.eps_list = vec![0.1, 0.05];
    assert!(matches!(cmd_sweep(&cfg), Err(Error::Config(_))));
    cfg.experiment.eps_list = vec![0.1, 0.05, 0.07];
    assert!(matches!(cmd_sweep(&cfg), Err(Error::Config(_))));
    let run = small(ExperimentKind::Prandtl);
    assert!(sweep_into(&run, Path::new("/nonexistent")).is_err());
}

#[test]
fn self_check_sweep_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Sweep);
    cfg.experiment.self_check = true;
    let res = sweep_into(&cfg, tmp.path()).unwrap();
    assert_eq!(res.members.len(), 4);
    assert!(res.slope.is_none());
    for m in &res.members {
        assert_eq!(m.sup_l2_error, 0.0);
        assert_eq!(m.e1_error.total, 0.0);
    }
    let files = cmd_report(tmp.path()).unwrap();
    assert!(files.iter().any(|f| f.ends_with("loglog.dat")));
}

#[test]
fn failing_member_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Sweep);
    // at the Prandtl bound, above every Navier-Stokes bound
    cfg.solver.dt = Some(1.0 / 16.0);
    match sweep_into(&cfg, tmp.path()) {
        Err(Error::SweepMember { eps, source }) => {
            assert_eq!(eps, 0.1);
            assert!(matches!(*source, Error::Cfl { .. }));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sweep_errors_shrink_with_eps() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Sweep);
    cfg.solver.t_final = 1.0;
    cfg.experiment.eps_list = vec![0.2, 0.1, 0.05];
    let res = sweep_into(&cfg, tmp.path()).unwrap();
    assert!(res.monotone);
    assert!(res.slope.unwrap() > 0.9);
    let csv = Table::read(&tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.rows.len(), 3);
    for i in 0..3 {
        assert!(tmp.path().join(format!("member_{i}.csv")).exists());
    }
    cmd_report(tmp.path()).unwrap();
    let loglog = std::fs::read_to_string(tmp.path().join("loglog.dat")).unwrap();
    let rows: Vec<&str> = loglog.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split_whitespace().count() == 2));
}

#[test]
fn run_report_has_one_row_per_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_into(&small(ExperimentKind::Prandtl), tmp.path()).unwrap();
    cmd_report(tmp.path()).unwrap();
    let summary = std::fs::read_to_string(tmp.path().join("summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), out.rows.len() + 1);
    let energy = std::fs::read_to_string(tmp.path().join("energy.dat")).unwrap();
    assert_eq!(energy.lines().count(), out.rows.len() + 1);
}

#[test]
fn runs_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::Hns);
    let a = run_into(&cfg, &tmp.path().join("a")).unwrap();
    let b = run_into(&cfg, &tmp.path().join("b")).unwrap();
    assert!(a.metadata.success && b.metadata.success);
    let read = |d: &Path| std::fs::read(d.join("series.csv")).unwrap();
    assert_eq!(read(&a.directory), read(&b.directory));
    assert_eq!(read_bytes(&a.directory, "final.bin"), read_bytes(&b.directory, "final.bin"));
}

fn read_bytes(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}
