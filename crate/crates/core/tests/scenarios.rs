//! End-to-end scenario runs against the documented examples.

use std::f64::consts::PI;
use std::sync::OnceLock;

use revival_core::revivals::{ExtremumKind, Observable};
use revival_core::scenario::{
    evaluate_scenario, parse_config, timescales_command, write_series, ScenarioOutput, CSV_HEADER,
};

const WELL: &str = "[system]\nkind = \"infinite_well\"\n[packet]\nx0 = 0.5\nsigma = 0.07071067811865475\np0 = 1256.6370614359173\n";
const BOUNCER: &str = "[system]\nkind = \"quantum_bouncer\"\n[packet]\nz0 = 100\nsigma = 1\np0 = 0\n";

/// Default well sweep, 1.25 revival periods.
fn well_run() -> &'static ScenarioOutput {
    static RUN: OnceLock<ScenarioOutput> = OnceLock::new();
    RUN.get_or_init(|| evaluate_scenario(&parse_config(WELL).unwrap()).unwrap())
}

#[test]
fn well_first_row_is_the_gaussian() {
    let out = well_run();
    let first = &out.points[0];
    assert_eq!(first.t, 0.0);
    assert!((first.autocorrelation.norm_sqr() - 1.0).abs() < 1e-8);
    assert!((first.j_nc - 1.0).abs() < 1e-3, "J_nc(0) = {}", first.j_nc);
    let mut csv = Vec::new();
    write_series(&mut csv, &out.points).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 5001);
    assert_eq!(out.report.sweep.non_finite, 0);
}

#[test]
fn well_report_has_the_full_revival() {
    let out = well_run();
    let t_rev = 2.0 / PI;
    let full = out
        .report
        .analysis
        .full_revivals
        .iter()
        .filter(|e| e.observable == Observable::AbsA2)
        .min_by(|a, b| (a.event.t - t_rev).abs().total_cmp(&(b.event.t - t_rev).abs()))
        .expect("an |A|² full revival");
    assert!((full.event.t - t_rev).abs() < 1e-9, "t = {}", full.event.t);
    assert!((full.event.value - 1.0).abs() < 1e-9, "|A|² = {}", full.event.value);
    let label = full.label.unwrap();
    assert_eq!((label.p, label.q, label.cycle), (1, 1, 0));
}

#[test]
fn well_absolute_jnc_minimum_is_labeled_one_half() {
    let out = well_run();
    let t_rev = 2.0 / PI;
    let deepest = out
        .report
        .analysis
        .events
        .iter()
        .filter(|e| e.observable == Observable::JNc && e.event.kind == ExtremumKind::Minimum)
        .filter(|e| e.event.t > 0.0 && e.event.t < t_rev)
        .min_by(|a, b| a.event.value.total_cmp(&b.event.value))
        .expect("J_nc minima");
    let label = deepest.label.map(|l| (l.p, l.q));
    assert_eq!(
        label,
        Some((1, 2)),
        "deepest J_nc minimum {:.6} at t/T_rev = {:.5}",
        deepest.event.value,
        deepest.event.t / t_rev
    );
}

#[test]
fn bouncer_report_lists_classical_period_minima() {
    let out = evaluate_scenario(&parse_config(BOUNCER).unwrap()).unwrap();
    assert_eq!(out.points.len(), 2001);
    let ks: Vec<u32> = out.report.analysis.classical_period_minima.iter().map(|m| m.k).collect();
    assert_eq!(ks, vec![1, 2, 3, 4], "{:?}", out.report.analysis.classical_period_minima);
    for m in &out.report.analysis.classical_period_minima {
        assert!((m.t - 20.0 * m.k as f64).abs() <= 1.0);
    }
}

#[test]
fn timescale_examples() {
    let (b, _) = timescales_command(&parse_config(BOUNCER).unwrap()).unwrap();
    assert!((b.closed_form.t_classical - 20.0).abs() < 1e-12);
    assert!((b.closed_form.t_revival - 12732.395).abs() < 1e-3);
    let (w, captured) = timescales_command(&parse_config(WELL).unwrap()).unwrap();
    assert!(captured >= 1.0 - 1e-8);
    assert_eq!(w.spectrum.n_bar, 400);
    assert!((w.closed_form.t_classical - 1.0 / (400.0 * PI)).abs() < 1e-15);
    assert!((w.closed_form.t_revival - 2.0 / PI).abs() < 1e-12);
    assert!((w.spectrum.t_revival - w.closed_form.t_revival).abs() < 1e-12);
    assert!((w.spectrum.t_classical - w.closed_form.t_classical).abs() < 1e-12);
}
