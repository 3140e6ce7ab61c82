//! Verdict-level invariants over the whole catalog.

use std::sync::OnceLock;

use unruh_core::diagnostics::{classify, DiagnosticsConfig, VerdictReport};
use unruh_core::response::{detailed_balance_gap, residue_sum_at_w, AdiabaticConfig, Method, QuadConfig, ScanConfig};
use unruh_core::{catalog, Accel, PullbackModel, Verdict};

fn model(row: usize) -> PullbackModel {
    PullbackModel::deformed(Accel::new(1.0).unwrap(), catalog()[row].clone())
}

fn reports() -> &'static [VerdictReport] {
    static R: OnceLock<Vec<VerdictReport>> = OnceLock::new();
    R.get_or_init(|| (0..catalog().len()).map(|i| classify(&model(i), &DiagnosticsConfig::default())).collect())
}

#[test]
fn refinement_keeps_every_verdict() {
    let fine = DiagnosticsConfig::default().refined();
    for (i, coarse) in reports().iter().enumerate() {
        let r = classify(&model(i), &fine);
        assert_eq!(r.verdicts(), coarse.verdicts(), "row {}", i + 1);
        for (a, b) in [(&r.cond_a.verdict, &coarse.cond_a.verdict), (&r.cond_b.verdict, &coarse.cond_b.verdict), (&r.cond_c.verdict, &coarse.cond_c.verdict)] {
            assert_eq!(a, b, "row {}", i + 1);
        }
    }
}

#[test]
fn stationary_rows_have_w_independent_residue_sums() {
    let scan = ScanConfig::default();
    for (i, r) in reports().iter().enumerate() {
        // Rows failing the fall-off gate have no residue formula to test.
        if r.kms_stationarity.verdict != Verdict::Yes || r.preservation == Verdict::Indeterminate {
            continue;
        }
        let m = model(i);
        let base = residue_sum_at_w(&m, 1.0, None, 0.0, &scan).unwrap();
        for w in [0.7, 2.0, 5.0] {
            let v = residue_sum_at_w(&m, 1.0, None, w, &scan).unwrap();
            assert!((v - base).norm() <= 1e-8 * base.norm(), "row {} w={w}: {v} vs {base}", i + 1);
        }
    }
}

#[test]
fn kms_is_sufficient_but_not_necessary() {
    for r in reports() {
        if r.kms_all_yes() {
            assert_eq!(r.preservation, Verdict::Yes, "row {}", r.spec_id);
        }
    }
    // Rows 5 and 8 break the KMS condition yet preserve the effect.
    for id in ["5", "8"] {
        let r = reports().iter().find(|r| r.spec_id == id).unwrap();
        assert!(!r.kms_all_yes(), "row {id}");
        assert_eq!(r.preservation, Verdict::Yes, "row {id}");
    }
}

#[test]
fn preservation_requires_all_three_conditions() {
    for r in reports() {
        if r.preservation == Verdict::Yes {
            assert_eq!([r.cond_a.verdict, r.cond_b.verdict, r.cond_c.verdict], [Verdict::Yes; 3], "row {}", r.spec_id);
        }
    }
}

#[test]
fn detailed_balance_holds_along_the_ladder() {
    let (adiabatic, quad) = (AdiabaticConfig::default(), QuadConfig::default());
    for r in reports().iter().filter(|r| r.preservation == Verdict::Yes) {
        let i: usize = catalog().iter().position(|s| s.id == r.spec_id).unwrap();
        for ell in [0.1, 0.03, 0.01] {
            let g = detailed_balance_gap(&model(i).with_ell(ell), 1.0, Method::Residue, &adiabatic, &quad, 80.0).unwrap();
            assert!(g.gap.abs() < 1e-8 && g.error < 1e-3, "row {} ℓ={ell}: {g:?}", r.spec_id);
        }
    }
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let run = |threads: usize, row: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&classify(&model(row), &DiagnosticsConfig::default())).unwrap())
    };
    for row in [2, 4, 7] {
        assert_eq!(run(1, row), run(4, row), "row {}", row + 1);
    }
}
