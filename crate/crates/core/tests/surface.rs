use std::f64::consts::{FRAC_PI_3, PI, TAU};

use capflow::flow::{boundary_enforce, capillarity_residual, InitialSurface};
use capflow::norms::Norm;
use capflow::sampling;
use capflow::surface::*;
use capflow::wulff::{anchor_vector, CapillaryWulffShape, TranslatedNorm};
use proptest::prelude::*;
use rand::Rng;

fn lattice(norm: &Norm, omega0: f64, nb: usize, init: InitialSurface) -> (GraphSurface, Bundle2) {
    let grid = HalfSphereGrid::new2(nb, 2 * nb).unwrap();
    let mut s = init.build(norm, omega0, &grid).unwrap();
    boundary_enforce(&mut s, norm, omega0, 1e-12).unwrap();
    let b = s.geometry(norm, &anchor_vector(norm, omega0).unwrap(), None).unwrap();
    (s, b)
}

fn cap(norm: &Norm, omega0: f64, nb: usize) -> Bundle2 {
    lattice(norm, omega0, nb, InitialSurface::WulffCap { radius: 1.0 }).1
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

const CAP_VOLUME: f64 = 5.0 * PI / 24.0;

#[test]
fn quadrature_of_one_is_two_pi() {
    let grid = HalfSphereGrid::new2(64, 128).unwrap();
    assert!((grid.integrate(|_| 1.0) - TAU).abs() <= 1e-6);
}

#[test]
fn unit_hemisphere_is_static() {
    let b = cap(&Norm::sphere(3), 0.0, 32);
    for p in &b.nodes {
        assert!((p.u_hat - 1.0).abs() < 1e-12);
        assert!((p.h_k[1] - 1.0).abs() < 1e-10);
        assert!((p.kappa[0] - 1.0).abs() < 1e-10 && (p.kappa[1] - 1.0).abs() < 1e-10);
        assert!(p.speed.abs() < 1e-10);
    }
}

#[test]
fn sphere_cap_support_function_and_speed() {
    let w = -FRAC_PI_3.cos();
    let b = cap(&Norm::sphere(3), w, 64);
    for p in &b.nodes {
        assert!((p.u_hat - (1.0 + w * p.nu[2])).abs() < 1e-4, "û = {} vs {}", p.u_hat, 1.0 + w * p.nu[2]);
    }
    assert!(b.sup_speed() <= 5e-3);
}

#[test]
fn quartic_cap_speed_self_converges() {
    let norm = Norm::quartic_a2();
    let (f64_, f128) = (cap(&norm, -0.3, 64).sup_speed(), cap(&norm, -0.3, 128).sup_speed());
    assert!(f64_ <= 5e-3, "{f64_}");
    assert!(f128 <= 1.3e-3, "{f128}");
    assert!(f128 < f64_ / 3.0, "{f64_} → {f128}");
}

#[test]
fn hemisphere_volume_and_areas() {
    let b = cap(&Norm::sphere(3), 0.0, 64);
    let third = TAU / 3.0;
    assert!((b.enclosed_volume() - third).abs() <= 1e-4);
    assert!((b.capillary_area().unwrap() - third).abs() <= 1e-4);
    assert!((b.quermass_interior(1).unwrap() - third).abs() <= 1e-3);
    assert!(b.minkowski_residual(1).unwrap().abs() <= 1e-3);
}

#[test]
fn sphere_cap_closed_forms() {
    let b = cap(&Norm::sphere(3), -0.5, 64);
    let theta = FRAC_PI_3;
    let analytic = PI * (1.0 - theta.cos()).powi(2) * (2.0 + theta.cos()) / 3.0;
    assert!((analytic - CAP_VOLUME).abs() < 1e-15);
    assert!((b.enclosed_volume() - CAP_VOLUME).abs() <= 1e-3);
    let lateral = TAU * (1.0 - theta.cos());
    let disk = PI * theta.sin().powi(2);
    assert!(((lateral - 0.5 * disk) / 3.0 - CAP_VOLUME).abs() < 1e-15);
    assert!((b.capillary_area().unwrap() - CAP_VOLUME).abs() <= 1e-3);
    assert!(b.minkowski_residual(0).unwrap().abs() <= 1e-3);
    let tn = TranslatedNorm::new(&Norm::sphere(3), -0.5).unwrap();
    assert!((b.quermass_boundary(1, &tn).unwrap() - CAP_VOLUME).abs() <= 2e-3);
    assert!((b.quermass_interior(1).unwrap() - CAP_VOLUME).abs() <= 2e-3);
}

/// Fraction of uniform points in a box that land in the body, times the box volume.
fn monte_carlo_volume(inside: impl Fn(&[f64; 3]) -> bool, half: f64, height: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = sampling::rng(seed);
    let hits = (0..n)
        .filter(|_| inside(&[rng.gen_range(-half..half), rng.gen_range(-half..half), rng.gen_range(0.0..height)]))
        .count();
    let box_vol = 4.0 * half * half * height;
    let p = hits as f64 / n as f64;
    (p * box_vol, box_vol * (p * (1.0 - p) / n as f64).sqrt())
}

#[test]
fn cap_volumes_match_monte_carlo() {
    for (norm, w) in [(Norm::sphere(3), -0.5), (Norm::quartic_a2(), -0.3)] {
        let anchor = anchor_vector(&norm, w).unwrap();
        let centre: Vec<f64> = anchor.e_f.iter().map(|e| w * e).collect();
        let inside = |x: &[f64; 3]| {
            let y = [x[0] - centre[0], x[1] - centre[1], x[2] - centre[2]];
            norm.f0(&y).unwrap() <= 1.0
        };
        let (mc, sigma) = monte_carlo_volume(inside, 1.6, 1.6, 400_000, 7);
        let v = cap(&norm, w, 64).enclosed_volume();
        assert!((v - mc).abs() <= 4.0 * sigma, "{}: lattice {v} vs Monte-Carlo {mc} ± {sigma}", norm.label);
    }
}

#[test]
fn wulff_caps_have_equal_quermassintegrals() {
    for (norm, w) in [(Norm::quartic_a2(), -0.3), (Norm::ellipsoid(&[4.0, 1.0, 1.0]).unwrap(), 0.2)] {
        let b = cap(&norm, w, 64);
        let v0 = b.enclosed_volume();
        assert!(rel(b.capillary_area().unwrap(), v0) <= 2e-3, "{}", norm.label);
        assert!(rel(b.quermass_interior(1).unwrap(), v0) <= 2e-3, "{}", norm.label);
        assert!(rel(b.quermass_interior(2).unwrap(), v0) <= 2e-3, "{}", norm.label);
    }
}

#[test]
fn wulff_cap_curvatures_are_one_over_r() {
    let r = 1.7;
    let grid = HalfSphereGrid::new2(64, 128).unwrap();
    let norm = Norm::quartic_a2();
    let shape = CapillaryWulffShape::new(&norm, r, -0.3).unwrap();
    let mut s = GraphSurface::from_wulff_cap(grid, &shape).unwrap();
    boundary_enforce(&mut s, &norm, -0.3, 1e-12).unwrap();
    let b = s.geometry(&norm, &anchor_vector(&norm, -0.3).unwrap(), None).unwrap();
    for p in &b.nodes {
        for k in p.kappa {
            assert!((k - 1.0 / r).abs() <= 1e-3, "κ = {k}");
        }
    }
}

#[test]
fn homogeneity_under_scaling() {
    let norm = Norm::quartic_a2();
    let anchor = anchor_vector(&norm, -0.3).unwrap();
    let (s, b1) = lattice(&norm, -0.3, 32, InitialSurface::WulffCap { radius: 1.0 });
    let r = 1.9;
    let br = s.scaled(r).geometry(&norm, &anchor, None).unwrap();
    assert!(rel(br.enclosed_volume(), r.powi(3) * b1.enclosed_volume()) <= 1e-6);
    assert!(rel(br.capillary_area().unwrap(), r * r * b1.capillary_area().unwrap()) <= 1e-6);
    assert!(rel(br.quermass_interior(1).unwrap(), r * b1.quermass_interior(1).unwrap()) <= 1e-6);
    assert!(rel(br.quermass_interior(2).unwrap(), b1.quermass_interior(2).unwrap()) <= 1e-6);
    for (p, q) in b1.nodes.iter().zip(&br.nodes) {
        assert!((q.kappa[0] * r - p.kappa[0]).abs() <= 1e-9);
    }
}

#[test]
fn s_f_is_self_adjoint_for_g_hat() {
    let norm = Norm::quartic_a2();
    let (_, b) = lattice(&norm, -0.3, 32, InitialSurface::PerturbedCap { radius: 1.0, epsilon: 0.1, seed: 3 });
    for p in &b.nodes {
        let m = p.g_hat * p.s_f;
        let asym = (m - m.transpose()).abs().max();
        assert!(asym <= 1e-9 * m.abs().max().max(1.0), "{asym}");
    }
}

#[test]
fn boundary_form_reduces_to_isotropic_formula() {
    let w = -0.5;
    let (theta_cos, theta_sin) = (0.5, (0.75f64).sqrt());
    let norm = Norm::sphere(3);
    let (_, b) = lattice(&norm, w, 64, InitialSurface::PerturbedCap { radius: 1.0, epsilon: 0.1, seed: 11 });
    let tn = TranslatedNorm::new(&norm, w).unwrap();
    let trace = b.boundary.as_ref().unwrap();
    let length = trace.integrate(|_| 1.0);
    let mean = b.integrate_g(|p| p.h_k[1]);
    let isotropic = (mean - theta_cos * theta_sin / 2.0 * length) / 3.0;
    assert!(rel(b.quermass_boundary(1, &tn).unwrap(), isotropic) <= 1e-6);
}

#[test]
fn boundary_and_interior_forms_agree_on_perturbed_surfaces() {
    for (norm, w, seed) in [(Norm::sphere(3), -0.5, 1), (Norm::quartic_a2(), -0.3, 2), (Norm::quartic_a2(), 0.2, 5)] {
        let (_, b) = lattice(&norm, w, 64, InitialSurface::PerturbedCap { radius: 1.0, epsilon: 0.1, seed });
        let tn = TranslatedNorm::new(&norm, w).unwrap();
        let (vb, vi) = (b.quermass_boundary(1, &tn).unwrap(), b.quermass_interior(1).unwrap());
        assert!(rel(vb, vi) <= 5e-3, "{}: {vb} vs {vi}", norm.label);
    }
}

#[test]
fn minkowski_residual_decays_on_perturbed_surface() {
    let norm = Norm::quartic_a2();
    let init = InitialSurface::PerturbedCap { radius: 1.0, epsilon: 0.1, seed: 42 };
    let coarse = lattice(&norm, -0.3, 32, init.clone()).1.minkowski_residual(0).unwrap().abs();
    let fine = lattice(&norm, -0.3, 64, init).1.minkowski_residual(0).unwrap().abs();
    assert!(fine <= 5e-3);
    assert!((coarse / fine).log2() >= 1.5, "{coarse} → {fine}");
}

#[test]
fn boundary_condition_holds_after_projection() {
    let norm = Norm::quartic_a2();
    let (s, _) = lattice(&norm, -0.3, 32, InitialSurface::PerturbedCap { radius: 1.0, epsilon: 0.1, seed: 4 });
    assert!(capillarity_residual(&s, &norm, -0.3).unwrap() <= 1e-10);
}

#[test]
fn three_dimensional_sphere_curvatures() {
    let r: f64 = 1.4;
    let grid = HalfSphereGrid::new3(8, 16, 16).unwrap();
    let norm = Norm::sphere(4);
    let anchor = anchor_vector(&norm, 0.0).unwrap();
    let b = chart_geometry3(&grid, &|_: &[f64; 4]| Ok(r.ln()), &norm, &anchor).unwrap();
    for p in &b.nodes {
        for k in p.kappa {
            assert!((k - 1.0 / r).abs() <= 1e-6);
        }
        assert!((p.h_k[3] - r.powi(-3)).abs() <= 1e-6);
    }
    let half_ball = PI * PI / 4.0 * r.powi(4);
    assert!(rel(b.enclosed_volume(), half_ball) <= 1e-3);
}

#[test]
fn chart_and_lattice_agree() {
    let norm = Norm::quartic_a2();
    let w = -0.3;
    let anchor = anchor_vector(&norm, w).unwrap();
    let grid = HalfSphereGrid::new2(64, 128).unwrap();
    let shape = CapillaryWulffShape::new(&norm, 1.0, w).unwrap();
    let chart = chart_geometry2(&grid, &|x: &[f64; 3]| Ok(shape.radial_function(x)?.ln()), &norm, &anchor).unwrap();
    let latt = cap(&norm, w, 64);
    assert!(rel(latt.enclosed_volume(), chart.enclosed_volume()) <= 1e-4);
    assert!(rel(latt.quermass_interior(1).unwrap(), chart.quermass_interior(1).unwrap()) <= 1e-4);
}

/// Classical principal curvatures of `X = e^φ x(β, λ)` from the explicit
/// parametrization, for `φ = a cos β + b sin²β cos λ`.
fn classical_curvatures(beta: f64, lambda: f64, a: f64, b: f64) -> [f64; 2] {
    let (sb, cb) = beta.sin_cos();
    let (sl, cl) = lambda.sin_cos();
    let phi = a * cb + b * sb * sb * cl;
    let pb = -a * sb + 2.0 * b * sb * cb * cl;
    let pl = -b * sb * sb * sl;
    let pbb = -a * cb + 2.0 * b * (cb * cb - sb * sb) * cl;
    let pbl = -2.0 * b * sb * cb * sl;
    let pll = -b * sb * sb * cl;
    let x = [sb * cl, sb * sl, cb];
    let xb = [cb * cl, cb * sl, -sb];
    let xl = [-sb * sl, sb * cl, 0.0];
    let xbl = [-cb * sl, cb * cl, 0.0];
    let xll = [-sb * cl, -sb * sl, 0.0];
    let e = phi.exp();
    let comb = |terms: &[(f64, [f64; 3])]| -> [f64; 3] {
        std::array::from_fn(|k| e * terms.iter().map(|(c, v)| c * v[k]).sum::<f64>())
    };
    let x_b = comb(&[(pb, x), (1.0, xb)]);
    let x_l = comb(&[(pl, x), (1.0, xl)]);
    let x_bb = comb(&[(pbb + pb * pb, x), (2.0 * pb, xb), (-1.0, x)]);
    let x_bl = comb(&[(pbl + pb * pl, x), (pb, xl), (pl, xb), (1.0, xbl)]);
    let x_ll = comb(&[(pll + pl * pl, x), (2.0 * pl, xl), (1.0, xll)]);
    let cross = [x_b[1] * x_l[2] - x_b[2] * x_l[1], x_b[2] * x_l[0] - x_b[0] * x_l[2], x_b[0] * x_l[1] - x_b[1] * x_l[0]];
    let norm = cross.iter().map(|c| c * c).sum::<f64>().sqrt();
    let dot = |u: &[f64; 3], v: &[f64; 3]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let sign = if dot(&cross, &x) > 0.0 { 1.0 } else { -1.0 };
    let n: [f64; 3] = std::array::from_fn(|k| sign * cross[k] / norm);
    let (e1, f1, g1) = (dot(&x_b, &x_b), dot(&x_b, &x_l), dot(&x_l, &x_l));
    let (l2, m2, n2) = (-dot(&x_bb, &n), -dot(&x_bl, &n), -dot(&x_ll, &n));
    let det = e1 * g1 - f1 * f1;
    let gauss = (l2 * n2 - m2 * m2) / det;
    let mean = (e1 * n2 - 2.0 * f1 * m2 + g1 * l2) / (2.0 * det);
    let disc = (mean * mean - gauss).max(0.0).sqrt();
    [mean - disc, mean + disc]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isotropic_reduction_matches_classical_curvatures(
        beta in 0.2f64..1.5, lambda in 0.0f64..TAU, a in -0.3f64..0.3, b in -0.3f64..0.3,
    ) {
        let (sb, cb) = beta.sin_cos();
        let (sl, cl) = lambda.sin_cos();
        let phi = a * cb + b * sb * sb * cl;
        let pb = -a * sb + 2.0 * b * sb * cb * cl;
        let pl = -b * sb * sb * sl;
        let pbb = -a * cb + 2.0 * b * (cb * cb - sb * sb) * cl;
        let pbl = -2.0 * b * sb * cb * sl;
        let pll = -b * sb * sb * cl;
        let cot = cb / sb;
        let off = (pbl - cot * pl) / sb;
        let data = NodeData {
            dir: polar2(beta, lambda),
            frame: HalfSphereGrid::frame2(beta, lambda),
            phi,
            p: [pb, pl / sb],
            hess: [[pbb, off], [off, pll / (sb * sb) + cot * pb]],
        };
        let g = node_geometry(&data, &Norm::sphere(3), 0.0, &[0.0, 0.0, 1.0], None).unwrap();
        let k = classical_curvatures(beta, lambda, a, b);
        prop_assert!((g.f_nu - 1.0).abs() <= 1e-12);
        prop_assert!((g.u_hat - g.u).abs() <= 1e-12);
        prop_assert!((g.kappa[0] - k[0]).abs() <= 1e-8, "{:?} vs {:?}", g.kappa, k);
        prop_assert!((g.kappa[1] - k[1]).abs() <= 1e-8, "{:?} vs {:?}", g.kappa, k);
    }

    #[test]
    fn quermassintegrals_scale_homogeneously(r in 0.3f64..3.0, w in -0.6f64..0.6) {
        let norm = Norm::sphere(3);
        let anchor = anchor_vector(&norm, w).unwrap();
        let grid = HalfSphereGrid::new2(16, 32).unwrap();
        let s = InitialSurface::WulffCap { radius: 1.0 }.build(&norm, w, &grid).unwrap();
        let (b1, br) = (s.geometry(&norm, &anchor, None).unwrap(), s.scaled(r).geometry(&norm, &anchor, None).unwrap());
        prop_assert!(rel(br.enclosed_volume(), r.powi(3) * b1.enclosed_volume()) <= 1e-9);
        prop_assert!(rel(br.capillary_area().unwrap(), r * r * b1.capillary_area().unwrap()) <= 1e-9);
        prop_assert!(rel(br.quermass_interior(1).unwrap(), r * b1.quermass_interior(1).unwrap()) <= 1e-9);
    }
}
