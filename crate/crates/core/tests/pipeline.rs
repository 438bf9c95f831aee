//! End-to-end runs of the shortening pipeline and the cross-module
//! invariants that tie cutting, devices, and ledgers together.

use carnot::algebra::StratifiedAlgebra;
use carnot::blowup;
use carnot::checks;
use carnot::curve::HorizontalPath;
use carnot::shorten::{self, ShortenParams};
use carnot::tol;

type Alg = StratifiedAlgebra<f64>;
type Path64 = HorizontalPath<f64>;

fn corner(alg: &Alg) -> Path64 {
    let mut west = vec![0.0; alg.n()];
    west[0] = -1.0;
    HorizontalPath::lift(
        alg,
        alg.exp(alg.vector(west)),
        -1.0,
        vec![(1.0, vec![1.0, 0.0]), (1.0, vec![0.0, 1.0])],
    )
    .unwrap()
}

/// Unit pieces east, north, west: two corners, nonzero defect in every layer.
fn zig_zag(alg: &Alg) -> Path64 {
    HorizontalPath::lift(
        alg,
        alg.identity(),
        0.0,
        vec![
            (1.0, vec![1.0, 0.0]),
            (1.0, vec![0.0, 1.0]),
            (1.0, vec![-1.0, 0.0]),
        ],
    )
    .unwrap()
}

fn ledger_books_balance(ledger: &shorten::SurgeryLedger<f64>) {
    let gross = ledger.cut.as_ref().map_or(0.0, |c| c.gain);
    let spent: f64 = ledger.stages.iter().map(|s| s.added_length).sum();
    assert!(
        (ledger.net_gain - (gross - spent)).abs() <= 1e-12,
        "net {} gross {} spent {}",
        ledger.net_gain,
        gross,
        spent
    );
    assert!(
        (ledger.net_gain - (ledger.original_length - ledger.final_length)).abs() <= 1e-12
    );
}

#[test]
fn zig_zag_step_three_pipeline_restores_the_endpoint() {
    let alg = Alg::free(2, 3).unwrap();
    let path = zig_zag(&alg);
    let params = shorten::choose_params(&alg, 1.5, 0.02, 0.8, 0.25).unwrap();
    let out = shorten::shorten_one_sided(&alg, &path, &params).unwrap();

    let scale = 1.0 + path.endpoint(&alg).log().max_abs();
    assert!(out.ledger.endpoint_residual <= 1e-8 * scale);
    let diff = out
        .curve
        .endpoint(&alg)
        .log()
        .sub(path.endpoint(&alg).log())
        .max_abs();
    assert!(diff <= 1e-8 * scale);

    let layers: Vec<usize> = out.ledger.stages.iter().map(|s| s.layer).collect();
    assert_eq!(layers, vec![2, 3]);
    assert!(out.ledger.cut.is_some());
    assert!(out.curve.is_arclength());
    ledger_books_balance(&out.ledger);
}

#[test]
fn engel_corner_symmetric_pipeline_round_trip() {
    let alg = Alg::engel().unwrap();
    let path = corner(&alg);
    let params = shorten::choose_params(&alg, 0.2, 0.02, 0.8, 0.5).unwrap();
    let out = shorten::shorten_symmetric(&alg, &path, &params).unwrap();

    let scale = 1.0 + path.endpoint(&alg).log().max_abs();
    assert!(out.ledger.endpoint_residual <= 1e-8 * scale);
    assert_eq!(
        out.ledger.stages.iter().map(|s| s.layer).collect::<Vec<_>>(),
        vec![2, 3]
    );
    assert!(out.curve.is_arclength());
    let (a2, b2) = out.curve.domain();
    assert!((a2 + b2).abs() <= 1e-9 * (1.0 + (b2 - a2)));
    ledger_books_balance(&out.ledger);
}

#[test]
fn symmetric_run_keeps_the_left_endpoint_anchored() {
    let alg = Alg::heisenberg(1).unwrap();
    let path = corner(&alg);
    let params = shorten::choose_params(&alg, 0.2, 0.1, 0.5, 0.5).unwrap();
    let out = shorten::shorten_symmetric(&alg, &path, &params).unwrap();
    let (a2, _) = out.curve.domain();
    let anchored = out
        .curve
        .eval(&alg, a2)
        .log()
        .sub(path.eval(&alg, -1.0).log())
        .max_abs();
    assert!(anchored <= 1e-12, "left endpoint moved by {anchored}");
}

#[test]
fn corner_ledger_scales_linearly_under_dilation() {
    let alg = Alg::heisenberg(1).unwrap();
    let path = corner(&alg);
    let eta = 0.2;
    let params = shorten::choose_params(&alg, eta, 0.1, 0.5, 0.5).unwrap();
    let base = shorten::shorten_symmetric(&alg, &path, &params).unwrap();

    // The dilated-reparametrized curve with every window scaled by lambda is
    // the exact image of the original configuration, so each length in the
    // ledger must scale by lambda. The window exponent is re-solved so that
    // (lambda eta)^rho equals lambda times the original window.
    let lam = 0.5;
    let scaled_path = path.dilated_reparam(&alg, lam);
    let w = eta.powf(params.exponents[0]);
    let rho = (lam * w).ln() / (lam * eta).ln();
    let scaled_params = ShortenParams {
        eta: lam * eta,
        beta: params.beta,
        exponents: vec![rho],
        excess_threshold: params.excess_threshold,
        depth: params.depth,
    };
    let scaled = shorten::shorten_symmetric(&alg, &scaled_path, &scaled_params).unwrap();

    let pairs = [
        (scaled.ledger.original_length, base.ledger.original_length),
        (scaled.ledger.final_length, base.ledger.final_length),
        (scaled.ledger.net_gain, base.ledger.net_gain),
    ];
    for (got, want) in pairs {
        assert!((got - lam * want).abs() <= 1e-8, "got {got} want {}", lam * want);
    }
    let (bc, sc) = (base.ledger.cut.unwrap(), scaled.ledger.cut.unwrap());
    assert!((sc.gain - lam * bc.gain).abs() <= 1e-8);
    assert!((sc.removed_length - lam * bc.removed_length).abs() <= 1e-8);
    assert!((sc.chord_length - lam * bc.chord_length).abs() <= 1e-8);
    assert_eq!(base.ledger.stages.len(), scaled.ledger.stages.len());
    for (b, s) in base.ledger.stages.iter().zip(&scaled.ledger.stages) {
        assert!((s.added_length - lam * b.added_length).abs() <= 1e-8);
    }
}

#[test]
fn identity_suites_pass_on_the_standard_groups() {
    let algebras = [
        Alg::heisenberg(1).unwrap(),
        Alg::heisenberg(2).unwrap(),
        Alg::engel().unwrap(),
        Alg::free(2, 3).unwrap(),
        Alg::free(3, 2).unwrap(),
    ];
    for alg in &algebras {
        let report = checks::run_suite(alg, 2026, 50);
        for c in &report.checks {
            assert!(
                c.pass,
                "{} on {}: residual {} tolerance {}",
                c.name,
                alg.label(),
                c.max_residual,
                c.tolerance
            );
        }
    }
}

#[test]
fn line_tangent_detection_is_scale_stable() {
    let alg = Alg::heisenberg(1).unwrap();
    let line = HorizontalPath::lift(
        &alg,
        alg.identity(),
        -2.0,
        vec![(4.0, vec![1.0, 0.0])],
    )
    .unwrap();
    let est =
        blowup::tangent_line_estimate(&alg, &line, 0.0, &[1.0, 0.5, 0.25], tol::TANGENT_DETECTION)
            .unwrap();
    assert!(est.detected);
    for row in &est.rows {
        assert_eq!(row.rms_residual, 0.0, "scale {}", row.scale);
        assert!(row.rms_residual < tol::TANGENT_DETECTION);
    }
    assert_eq!(est.direction, vec![1.0, 0.0]);
}

#[test]
fn profile_residuals_stay_in_range() {
    let alg = Alg::heisenberg(1).unwrap();
    let path = corner(&alg);
    let prof = blowup::excess_profile(&alg, &path, 0.0, &[1.0, 0.5, 0.25, 0.125]).unwrap();
    for row in &prof.rows {
        assert!(row.rms_residual >= 0.0 && row.rms_residual <= 2.0);
        assert!(row.excess <= row.rms_residual + 1e-12);
    }
}
