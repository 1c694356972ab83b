use capflow::condition::{
    check, condition_margin, condition_margin_translated, scan_max_omega, slice_frame, slice_frame_at_angle, ScanOutcome,
    DEFAULT_SLICE_SAMPLES, DEFAULT_TOL,
};
use capflow::norms::Norm;
use capflow::wulff::TranslatedNorm;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn g_form(g: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    g.iter().zip(a).map(|(row, ai)| ai * dot(row, b)).sum()
}

#[test]
fn round_frames() {
    let n = Norm::sphere(3);
    let f = slice_frame_at_angle(&n, -0.5, 0.0).unwrap();
    let expect = [3f64.sqrt() / 2.0, 0.0, 0.5];
    for i in 0..3 {
        assert!((f.z[i] - expect[i]).abs() < 1e-12);
        assert!((f.nu[i] - expect[i]).abs() < 1e-12);
    }
    assert!(f.mu[2] < 0.0 && f.mu[1].abs() < 1e-14);
    assert!(dot(&f.mu, &f.nu).abs() < 1e-14);

    let f = slice_frame_at_angle(&n, 0.0, 1.0).unwrap();
    for (a, b) in f.mu.iter().zip([0.0, 0.0, -1.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn frame_orthogonality() {
    for (norm, w) in [(Norm::quartic_a2(), -0.3), (Norm::quartic_a2_prime(), 0.2), (Norm::quartic_a3(0.3).unwrap(), 0.3)] {
        for k in 0..16 {
            let f = slice_frame_at_angle(&norm, w, std::f64::consts::FRAC_PI_4 + 0.4 * k as f64).unwrap();
            let y = &f.tangents[0];
            assert!(dot(y, &f.nu).abs() < 1e-8);
            assert!(dot(y, &f.mu).abs() < 1e-8);
            assert!(y[2].abs() < 1e-12);
            assert!(g_form(&f.g, &f.a_f_mu, y).abs() < 1e-8);
            assert!((norm.f0(&f.z).unwrap() - 1.0).abs() < 1e-12);
            assert!((f.z[2] + w).abs() < 1e-12);
            // F(ν)⟨μ,E₃⟩A_F(ν)μ = (I − z DF⁰(z)ᵀ) G(z)⁻¹ E₃.
            let jet = norm.half_square_jet(&f.z).unwrap();
            let ginv = jet.hess.clone().try_inverse().unwrap();
            let ge: Vec<f64> = (0..3).map(|i| ginv[(i, 2)]).collect();
            let df0 = jet.grad.as_slice(); // F⁰ = 1 on W, so D(½F⁰²) = DF⁰.
            let c = dot(df0, &ge);
            for i in 0..3 {
                let lhs = f.f_nu * f.mu[2] * f.a_f_mu[i];
                assert!((lhs - (ge[i] - f.z[i] * c)).abs() < 1e-10);
            }
            let _ = w;
        }
    }
}

#[test]
fn sphere_margin_is_minus_omega() {
    for w in [-0.5, -0.1, 0.3] {
        let r = check(&Norm::sphere(3), w, 64, DEFAULT_TOL).unwrap();
        for s in &r.samples {
            assert!((s.margin + w).abs() < 1e-12);
        }
        assert_eq!(r.satisfied, w <= 0.0);
        assert!(r.both_forms_agree);
    }
    let r = check(&Norm::sphere(3), -0.5, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL).unwrap();
    assert!(r.both_forms_agree && r.samples.len() == 512);
}

#[test]
fn quartic_margin_matches_closed_form() {
    // Margin at the slice point (x, y, −ω₀): −ω₀(2 + 3ρ²ω₀²)/(2 + 9ρ²ω₀²), ρ² = x² + y².
    for w in [-0.6, -0.2, 0.1, 0.5] {
        let r = check(&Norm::quartic_a2(), w, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL).unwrap();
        for s in &r.samples {
            let rr = s.z[0] * s.z[0] + s.z[1] * s.z[1];
            let exact = -w * (2.0 + 3.0 * rr * w * w) / (2.0 + 9.0 * rr * w * w);
            assert!((s.margin - exact).abs() < 1e-10, "{} vs {exact}", s.margin);
        }
        assert_eq!(r.satisfied, w <= 0.0);
        assert!(r.both_forms_agree);
        assert_eq!(r.degenerate_count, 0);
    }
    let r = check(&Norm::quartic_a2(), 0.1, 128, DEFAULT_TOL).unwrap();
    assert!(r.min_margin < 0.0);
    let r = check(&Norm::quartic_a2(), -0.2, 128, DEFAULT_TOL).unwrap();
    assert!(r.satisfied && r.min_margin_translated >= 0.0);
}

#[test]
fn primed_quartic_has_the_same_threshold() {
    assert!(check(&Norm::quartic_a2_prime(), -0.2, 128, DEFAULT_TOL).unwrap().satisfied);
    assert!(!check(&Norm::quartic_a2_prime(), 0.1, 128, DEFAULT_TOL).unwrap().satisfied);
}

#[test]
fn shifted_quartic_is_the_equality_case() {
    let norm = Norm::quartic_a3(0.3).unwrap();
    let r = check(&norm, 0.3, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL).unwrap();
    for s in &r.samples {
        assert!(s.margin.abs() < 1e-6);
        assert!(s.margin_translated.abs() < 1e-6);
    }
    assert!(r.satisfied && r.both_forms_agree);
}

#[test]
fn margin_is_invariant_under_tangent_rescaling() {
    let norm = Norm::quartic_a2_prime();
    let w = -0.25;
    let tn = TranslatedNorm::new(&norm, w).unwrap();
    for k in 0..8 {
        let f = slice_frame_at_angle(&norm, w, 0.7 * k as f64).unwrap();
        let y = f.tangents[0].clone();
        let m = condition_margin(&norm, w, &f, &y).unwrap();
        for lambda in [-1.0, 0.3, 4.0] {
            let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            assert!((condition_margin(&norm, w, &f, &ys).unwrap() - m).abs() < 1e-10);
        }
        let t = condition_margin_translated(&tn, &f, &y).unwrap();
        assert_eq!(t >= -DEFAULT_TOL, m >= -DEFAULT_TOL);
    }
}

#[test]
fn four_dimensional_slices() {
    let r = check(&Norm::sphere(4), -0.3, 64, DEFAULT_TOL).unwrap();
    for s in &r.samples {
        assert!((s.margin - 0.3).abs() < 1e-12);
    }
    assert!(r.satisfied && r.both_forms_agree);

    let e = capflow::expr::parse("((x^2+y^2+z^2+w^2)*(x^2+y^2+z^2)+w^4)^(1/4)").unwrap();
    let quartic4 = Norm::custom(e);
    let f = slice_frame(&quartic4, -0.2, &[0.3, -0.5, 0.81]).unwrap();
    assert_eq!(f.tangents.len(), 2);
    for y in &f.tangents {
        assert!(dot(y, &f.nu).abs() < 1e-10 && y[3].abs() < 1e-12);
        assert!(g_form(&f.g, &f.a_f_mu, y).abs() < 1e-8);
    }
    let neg = check(&quartic4, -0.2, 64, DEFAULT_TOL).unwrap();
    let pos = check(&quartic4, 0.2, 64, DEFAULT_TOL).unwrap();
    assert!(neg.satisfied && !pos.satisfied);
    assert!(neg.both_forms_agree && pos.both_forms_agree);
}

#[test]
fn scans_locate_the_threshold() {
    match scan_max_omega(&Norm::sphere(3), -0.9, 0.9, 64).unwrap() {
        ScanOutcome::Threshold(t) => assert!(t.abs() <= 1e-3, "{t}"),
        other => panic!("{other:?}"),
    }
    match scan_max_omega(&Norm::quartic_a2(), -0.9, 0.9, DEFAULT_SLICE_SAMPLES).unwrap() {
        ScanOutcome::Threshold(t) => assert!(t.abs() <= 1e-3, "{t}"),
        other => panic!("{other:?}"),
    }
    match scan_max_omega(&Norm::quartic_a3(0.3).unwrap(), -0.5, 0.9, DEFAULT_SLICE_SAMPLES).unwrap() {
        ScanOutcome::Threshold(t) => assert!(t >= 0.3 - 1e-3, "{t}"),
        other => panic!("{other:?}"),
    }
    assert_eq!(scan_max_omega(&Norm::sphere(3), -0.9, -0.1, 16).unwrap(), ScanOutcome::AllSatisfied);
    assert_eq!(scan_max_omega(&Norm::sphere(3), 0.1, 0.9, 16).unwrap(), ScanOutcome::AllViolated);
}

#[test]
fn samples_csv_has_one_row_per_sample() {
    let r = check(&Norm::quartic_a2(), -0.2, 32, DEFAULT_TOL).unwrap();
    let csv = r.samples_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 33);
    assert!(lines[0].starts_with("z0,z1,z2,y0,y1,y2,margin"));
}
