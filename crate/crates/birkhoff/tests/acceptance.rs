//! Acceptance criteria 1–10 at full size: a 20-member Sobolev family for
//! criteria 2–8 and 10, and 40 vs 80 members for criterion 9. Each test
//! writes one PASS/FAIL line to stderr, uncaptured.

use std::io::Write;
use std::sync::OnceLock;

use birkhoff::verify::{CriterionResult, Verifier, VerifyOptions};

fn verifier() -> &'static Verifier {
    static V: OnceLock<Verifier> = OnceLock::new();
    V.get_or_init(|| Verifier::new(VerifyOptions::full()).expect("family analysis"))
}

fn criterion(id: u32) -> CriterionResult {
    let r = verifier().run(id);
    let _ = writeln!(std::io::stderr(), "{r}");
    r
}

macro_rules! criteria {
    ($($name:ident => $id:expr),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                let r = criterion($id);
                assert!(r.passed, "{r}");
            }
        )*
    };
}

criteria! {
    criterion_01_constant_potential_oracle => 1,
    criterion_02_trace_level_1 => 2,
    criterion_03_trace_level_3 => 3,
    criterion_04_localisation => 4,
    criterion_05_two_sided_action_comparison => 5,
    criterion_06_contour_vs_gap_integral => 6,
    criterion_07_lyapunov_schmidt => 7,
    criterion_08_explicit_constants => 8,
    criterion_09_uniformity => 9,
    criterion_10_sobolev_representation => 10,
}
