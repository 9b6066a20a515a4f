use ngrc::report::{assemble_report, sig6, sweep_table, ModelKind, Run};
use ngrc_core::metrics::DistanceSummary;
use ngrc_core::trainer::GridRow;
use ngrc_core::Matrix;

fn run(name: &str, kind: ModelKind, fidelities: &[f64]) -> Run {
    Run {
        name: name.into(),
        kind,
        window: None,
        degree: None,
        alphas: vec![None; fidelities.len()],
        fidelities: fidelities.to_vec(),
        parameters: None,
        multiplications: None,
        cross_fidelity: None,
    }
}

#[test]
fn eta_is_reported_against_the_matched_filter() {
    let runs = [
        run("ngrc", ModelKind::Ngrc, &[0.95, 0.9]),
        run("mf", ModelKind::MatchedFilter, &[0.9, 0.8]),
    ];
    let r = assemble_report(100, 2, &runs).unwrap();
    let etas: Vec<Option<f64>> = r.models[0].qubits.iter().map(|q| q.eta).collect();
    // (0.10 - 0.05) / 0.10 and (0.20 - 0.10) / 0.20
    assert!((etas[0].unwrap() - 0.5).abs() < 1e-12);
    assert!((etas[1].unwrap() - 0.5).abs() < 1e-12);
    assert!(r.models[1].qubits.iter().all(|q| q.eta.is_none()));
    assert!(r.notices.is_empty());
    assert!((r.models[0].geometric_mean - (0.95f64 * 0.9).sqrt()).abs() < 1e-15);
}

#[test]
fn eta_is_omitted_without_a_baseline() {
    let r = assemble_report(100, 1, &[run("ngrc", ModelKind::Ngrc, &[0.9])]).unwrap();
    assert!(r.models[0].qubits[0].eta.is_none());
    assert_eq!(r.notices.len(), 1);
    let json = r.to_json().unwrap();
    assert!(json.contains("\"eta\": null"));
    assert!(json.contains("no matched-filter baseline"));
}

#[test]
fn perfect_baseline_leaves_eta_undefined() {
    let runs = [run("ngrc", ModelKind::Ngrc, &[1.0]), run("mf", ModelKind::MatchedFilter, &[1.0])];
    let r = assemble_report(10, 1, &runs).unwrap();
    assert!(r.models[0].qubits[0].eta.is_none());
    assert_eq!(r.notices.len(), 1);
}

#[test]
fn floats_carry_six_significant_digits() {
    assert_eq!(sig6(0.123456789), 0.123457);
    assert_eq!(sig6(98765.4321), 98765.4);
    assert_eq!(sig6(-1.0000004e-7), -1e-7);
    assert_eq!(sig6(0.0), 0.0);
    let r = assemble_report(3, 1, &[run("a", ModelKind::Boxcar, &[2.0 / 3.0])]).unwrap();
    assert!(r.to_json().unwrap().contains("0.666667"));
    let csv = r.to_csv().unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "model,kind,qubit,window,degree,alpha,fidelity,eta");
    assert_eq!(lines[1], "a,boxcar,0,,,,0.666667,");
    assert_eq!(lines[2], "a,boxcar,gm,,,,0.666667,");
}

#[test]
fn cross_fidelity_needs_two_qubits() {
    let mut one = run("ngrc", ModelKind::Ngrc, &[0.9]);
    let summary = DistanceSummary {
        per_distance: vec![],
        overall: 0.0,
    };
    one.cross_fidelity = Some((Matrix::from_fn(1, 1, |_, _| 1.0), summary));
    assert!(assemble_report(10, 1, &[one]).unwrap().cross_fidelity.is_empty());

    let mut two = run("ngrc", ModelKind::Ngrc, &[0.9, 0.9]);
    let cf = Matrix::from_vec(2, 2, vec![1.0, 0.02, -0.04, 1.0]).unwrap();
    let summary = DistanceSummary {
        per_distance: vec![0.03],
        overall: 0.03,
    };
    two.cross_fidelity = Some((cf, summary));
    let r = assemble_report(10, 2, &[two]).unwrap();
    assert_eq!(r.cross_fidelity[0].matrix, vec![vec![1.0, 0.02], vec![-0.04, 1.0]]);
    let plot = r.to_gnuplot();
    assert!(plot.contains("1 0.03"));
    assert!(plot.contains("1 0 -0.04"));
}

#[test]
fn sweep_table_keeps_best_threshold_per_alpha() {
    let mut grid = Vec::new();
    for target in 0..2 {
        for alpha in [0.0, 1e-3, 1e-1] {
            for (k, t) in [0.25, 0.5, 0.75].into_iter().enumerate() {
                grid.push(GridRow {
                    target,
                    alpha,
                    threshold: Some(t),
                    fidelity: 0.5 + 0.1 * (k == 1) as u8 as f64 + alpha,
                });
            }
        }
    }
    let text = sweep_table("m", 3, "quadratic", &grid).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert_eq!(lines[0], "model,target,window,degree,alpha,threshold,fidelity");
    assert_eq!(lines[1], "m,0,3,quadratic,0,0.5,0.6");
    assert_eq!(lines[6], "m,1,3,quadratic,0.1,0.5,0.7");
}
