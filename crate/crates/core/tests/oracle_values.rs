//! Values frozen from an independent dense-matrix computation (scipy `expm`
//! on full truncated Fock products).

use chi2_core::injection::{balanced_pair, imprimitivity_check, rotate_111_to_002};
use chi2_core::trotter::{trotter_v, Axis, TrotterPlan};
use chi2_core::PhaseConvention;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn trotter_error_curve() {
    let frozen = [
        (1, 2.208457222573685),
        (8, 0.268852529810516),
        (16, 0.134296561358265),
        (32, 0.06713196461438393),
        (64, 0.03356393960724613),
        (1024, 0.002097703817836518),
    ];
    for (m, want) in frozen {
        let got = trotter_v(&TrotterPlan::new(0.7, m, Axis::Y, 2).unwrap()).unwrap().error;
        assert!(close(got, want, 1e-9), "m={m}: {got} vs {want}");
    }
}

#[test]
fn imprimitivity_entropy_at_one() {
    let b = balanced_pair();
    let r = imprimitivity_check(1.0, &b, &b).unwrap();
    assert!(close(r.entropy, 0.572244989922293, 1e-9), "{}", r.entropy);
}

#[test]
fn first_mixing_step() {
    let r = rotate_111_to_002(&PhaseConvention::default()).unwrap();
    let want = [-0.5, std::f64::consts::FRAC_1_SQRT_2, -0.5];
    for (a, w) in r.report.psi1.iter().zip(want) {
        assert!((a.re - w).abs() < 1e-12 && a.im.abs() < 1e-12);
    }
}
