use capflow::expr::finite_difference_jet;
use capflow::linalg::Tensor3;
use capflow::norms::Norm;
use capflow::sampling::{fibonacci_sphere, random_unit, rng, sphere_samples};
use nalgebra::SymmetricEigen;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Brute-force support function: maximum of ⟨x, p/F⁰(p)⟩ over a dense point set.
fn sampled_support(norm: &Norm, x: &[f64], count: usize) -> f64 {
    fibonacci_sphere(count)
        .iter()
        .map(|p| dot(x, p) / norm.f0(p).unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn support_matches_dense_sampling() {
    let ell = Norm::ellipsoid(&[4.0, 1.0, 1.0]).unwrap();
    let s = ell.support(&[1.0, 0.0, 0.0]).unwrap();
    assert!((s.value - 2.0).abs() < 1e-12);
    assert!((s.maximizer[0] - 2.0).abs() < 1e-12 && s.maximizer[1].abs() < 1e-12);
    assert!((s.value - sampled_support(&ell, &[1.0, 0.0, 0.0], 1_000_000)).abs() < 5e-5);

    let a2 = Norm::quartic_a2();
    let s = a2.support(&[0.0, 0.0, 1.0]).unwrap();
    assert!((s.value - 1.0).abs() < 1e-12);
    assert!((s.maximizer[2] - 1.0).abs() < 1e-12);
    for x in [[0.0, 0.0, 1.0], [0.3, -0.5, 0.8]] {
        let v = a2.support_value(&x).unwrap();
        assert!((v - sampled_support(&a2, &x, 1_000_000)).abs() < 1e-5, "{x:?}");
    }
}

#[test]
fn cahn_hoffman_examples() {
    let sph = Norm::sphere(3);
    let x = [0.48, -0.6, 0.64];
    let z = sph.cahn_hoffman(&x).unwrap();
    for i in 0..3 {
        assert!((z[i] - x[i]).abs() < 1e-13);
    }
    let ell = Norm::ellipsoid(&[4.0, 1.0, 1.0]).unwrap();
    let z = ell.cahn_hoffman(&[0.0, 1.0, 0.0]).unwrap();
    assert!((z[1] - 1.0).abs() < 1e-12 && z[0].abs() < 1e-12 && z[2].abs() < 1e-12);
    let z = Norm::quartic_a2().cahn_hoffman(&[0.0, 0.0, 1.0]).unwrap();
    assert!((z[2] - 1.0).abs() < 1e-12);
}

#[test]
fn metric_examples_and_homogeneity() {
    let sph = Norm::sphere(3);
    for p in fibonacci_sphere(20) {
        let g = sph.metric_g(&p).unwrap();
        assert!((g - nalgebra::DMatrix::identity(3, 3)).amax() < 1e-13);
    }
    let ell = Norm::ellipsoid(&[4.0, 1.0, 1.0]).unwrap();
    let p = [0.3, -0.2, 0.5];
    let g = ell.metric_g(&p).unwrap();
    let fd = finite_difference_jet(3, &p, 1e-3, |v| {
        let f = ell.f0(v)?;
        Ok(0.5 * f * f)
    })
    .unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let exact = if i != j { 0.0 } else if i == 0 { 0.25 } else { 1.0 };
            assert!((g[(i, j)] - exact).abs() < 1e-13);
            assert!((fd.hess[(i, j)] - exact).abs() < 1e-6);
        }
    }
    let a2 = Norm::quartic_a2();
    let g = a2.metric_g(&[0.0, 0.0, 1.0]).unwrap();
    assert!((g[(2, 2)] - 1.0).abs() < 1e-13);

    for norm in [Norm::quartic_a2(), Norm::quartic_a2_prime(), ell.clone()] {
        for x in sphere_samples(3, 200, 7) {
            let g1 = norm.metric_g(&x).unwrap();
            for lambda in [0.5, 2.0] {
                let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                assert!((norm.metric_g(&xs).unwrap() - &g1).amax() < 1e-8);
            }
        }
    }
}

#[test]
fn euler_identities() {
    for norm in [Norm::quartic_a2(), Norm::quartic_a2_prime(), Norm::quartic_a3(0.3).unwrap()] {
        for x in sphere_samples(3, 200, 11) {
            let jet = norm.f0_jet(&x).unwrap();
            assert!((dot(jet.grad.as_slice(), &x) - jet.value).abs() < 1e-8);
            let hx = &jet.hess * nalgebra::DVector::from_column_slice(&x);
            assert!(hx.amax() < 1e-8);
        }
    }
}

fn radial_contraction(q: &Tensor3, z: &[f64], v: &[f64], w: &[f64]) -> f64 {
    q.contract(z, v, w)
}

#[test]
fn tensor_q_identities() {
    for norm in [Norm::sphere(3), Norm::ellipsoid(&[2.0, 0.5, 3.0]).unwrap(), Norm::sphere(4)] {
        for x in sphere_samples(norm.d, 30, 3) {
            assert!(norm.tensor_q(&x).unwrap().max_abs() < 1e-10);
        }
    }
    let mut r = rng(5);
    for norm in [Norm::quartic_a2(), Norm::quartic_a2_prime(), Norm::quartic_a3(-0.4).unwrap()] {
        for _ in 0..50 {
            let v = random_unit(&mut r, 3);
            let f = norm.f0(&v).unwrap();
            let z: Vec<f64> = v.iter().map(|c| c / f).collect();
            let a = random_unit(&mut r, 3);
            let b = random_unit(&mut r, 3);
            let q = norm.tensor_q(&z).unwrap();
            assert!(radial_contraction(&q, &z, &a, &b).abs() < 1e-8);
            // Full symmetry.
            assert!((q.contract(&a, &b, &z) - q.contract(&z, &b, &a)).abs() < 1e-10);
        }
    }
}

/// Closed form of `Q(ξ)(e₁,e₁,e₂)` for the quartic shape with
/// `e₁ = (ν₂, −ν₁, 0)` and `e₂ = ν × (G e₁)`.
fn quartic_q112(x: f64, y: f64, z: f64) -> f64 {
    let s = x * x + y * y;
    let p = x.powi(4) + 2.0 * x * x * y * y + x * x * z * z + y.powi(4) + y * y * z * z + z.powi(4);
    let w = 4.0 * x.powi(6) + 12.0 * x.powi(4) * y * y + 5.0 * x.powi(4) * z * z + 12.0 * x * x * y.powi(4)
        + 10.0 * x * x * y * y * z * z
        + 5.0 * x * x * z.powi(4)
        + 4.0 * y.powi(6)
        + 5.0 * y.powi(4) * z * z
        + 5.0 * y * y * z.powi(4)
        + 4.0 * z.powi(6);
    1.5 * z.powi(3) * s * s * (2.0 * s + z * z).powi(4) / p / (w * w)
}

#[test]
fn quartic_slice_q112_sign_and_closed_form() {
    let norm = Norm::quartic_a2();
    for z0 in [-0.6, -0.2, 0.0, 0.3, 0.7] {
        for k in 0..12 {
            let a = 0.37 + k as f64 * std::f64::consts::TAU / 12.0;
            // Point on W at height z0 in direction a.
            let mut lo = 0.0;
            let mut hi = 2.0;
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if norm.f0(&[m * a.cos(), m * a.sin(), z0]).unwrap() < 1.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            let xi = [lo * a.cos(), lo * a.sin(), z0];
            let jet = norm.half_square_jet(&xi).unwrap();
            let g = jet.grad.normalize();
            let nu = [g[0], g[1], g[2]];
            let e1 = [nu[1], -nu[0], 0.0];
            let ge1: Vec<f64> = (0..3).map(|i| (0..3).map(|j| jet.hess[(i, j)] * e1[j]).sum()).collect();
            let e2 = cross(&nu, &ge1);
            let q112 = jet.third.contract(&e1, &e1, &e2);
            let expected = quartic_q112(xi[0], xi[1], xi[2]);
            assert!((q112 - expected).abs() < 1e-9 * (1.0 + expected.abs()), "z0={z0}: {q112} vs {expected}");
            if z0 < 0.0 {
                assert!(q112 < 0.0);
            } else if z0 > 0.0 {
                assert!(q112 > 0.0);
            } else {
                assert!(q112.abs() < 1e-12);
            }
        }
    }
}

/// Hessian of `F(x) = sqrt(Ax² + By² + Cz²)` by central differences.
fn ellipsoid_support_hessian_fd(abc: [f64; 3], x: [f64; 3]) -> [[f64; 3]; 3] {
    let f = |p: [f64; 3]| (abc[0] * p[0] * p[0] + abc[1] * p[1] * p[1] + abc[2] * p[2] * p[2]).sqrt();
    let h = 1e-4;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut pp = x;
            pp[i] += h;
            pp[j] += h;
            let mut pm = x;
            pm[i] += h;
            pm[j] -= h;
            let mut mp = x;
            mp[i] -= h;
            mp[j] += h;
            let mut mm = x;
            mm[i] -= h;
            mm[j] -= h;
            out[i][j] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
        }
    }
    out
}

#[test]
fn a_f_matrix_examples() {
    let (a, b, c) = (2.0, 0.5, 3.0);
    let ell = Norm::ellipsoid(&[a, b, c]).unwrap();
    let (m, basis) = ell.a_f_matrix(&[0.0, 0.0, 1.0]).unwrap();
    let fd = ellipsoid_support_hessian_fd([a, b, c], [0.0, 0.0, 1.0]);
    for i in 0..2 {
        for j in 0..2 {
            let mut oracle = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    oracle += basis[i][p] * fd[p][q] * basis[j][q];
                }
            }
            assert!((m[(i, j)] - oracle).abs() < 1e-6);
        }
    }
    let mut eig = SymmetricEigen::new(m).eigenvalues.as_slice().to_vec();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // D²F(E₃) on the tangent plane is diag(A, B)/√C.
    assert!((eig[0] - b / c.sqrt()).abs() < 1e-10 && (eig[1] - a / c.sqrt()).abs() < 1e-10);
    let (m, _) = Norm::ellipsoid(&[a, b, 1.0]).unwrap().a_f_matrix(&[0.0, 0.0, 1.0]).unwrap();
    assert!((m.trace() - (a + b)).abs() < 1e-10 && (m.determinant() - a * b).abs() < 1e-10);

    let (m, _) = Norm::sphere(3).a_f_matrix(&[0.6, 0.0, 0.8]).unwrap();
    assert!((m - nalgebra::DMatrix::identity(2, 2)).amax() < 1e-12);

    let mut r = rng(9);
    for norm in [Norm::quartic_a2(), Norm::quartic_a2_prime(), ell] {
        for _ in 0..1000 {
            let nu = random_unit(&mut r, 3);
            let (m, _) = norm.a_f_matrix(&nu).unwrap();
            assert!(SymmetricEigen::new(m).eigenvalues.min() > 0.0);
        }
    }
}

#[test]
fn duality_reports() {
    let r = Norm::sphere(3).verify_duality(100, 42).unwrap();
    assert!(r.max_residual() < 1e-12, "{r:?}");
    let r = Norm::ellipsoid(&[4.0, 1.0, 1.0]).unwrap().verify_duality(100, 42).unwrap();
    assert!(r.max_residual() < 1e-8, "{r:?}");
    let r = Norm::quartic_a2().verify_duality(100, 42).unwrap();
    assert!(r.max_residual() < 1e-7, "{r:?}");
    let r = Norm::sphere(4).verify_duality(50, 42).unwrap();
    assert!(r.max_residual() < 1e-12, "{r:?}");
}

#[test]
fn maximizer_is_stationary() {
    let norm = Norm::quartic_a2_prime();
    for x in sphere_samples(3, 300, 1) {
        let s = norm.support(&x).unwrap();
        let z = s.maximizer.as_slice();
        let n = norm.grad_f0(z).unwrap().normalize();
        // Tangential part of x at z must vanish.
        let xn = dot(&x, n.as_slice());
        let tangential: f64 = (0..3).map(|i| (x[i] - xn * n[i]).powi(2)).sum::<f64>().sqrt();
        assert!(tangential < 1e-8);
        assert!((dot(&x, z) - s.value).abs() < 1e-12);
    }
}

#[test]
fn sanity_of_builtin_norms() {
    for norm in [Norm::quartic_a2(), Norm::quartic_a2_prime(), Norm::ellipsoid(&[4.0, 1.0, 1.0]).unwrap()] {
        assert!(norm.homogeneity_residual(1000).unwrap() < 1e-12);
        assert!(norm.ellipticity_min_eigenvalue(1000).unwrap() > 1e-6);
    }
}

#[test]
fn custom_norm_matches_builtin() {
    let e = capflow::expr::parse("((x^2+y^2+z^2)*(x^2+y^2)+z^4)^(1/4)").unwrap();
    let custom = Norm::custom(e);
    let builtin = Norm::quartic_a2();
    for x in sphere_samples(3, 50, 2) {
        let a = custom.half_square_jet(&x).unwrap();
        let b = builtin.half_square_jet(&x).unwrap();
        assert!((a.third.max_abs() - b.third.max_abs()).abs() < 1e-10);
        assert!((custom.support_value(&x).unwrap() - builtin.support_value(&x).unwrap()).abs() < 1e-12);
    }
}
