//! Minkowski norms: the gauge `F⁰` of a Wulff shape, its support function
//! `F`, the Cahn–Hoffman map `Ψ = DF`, the metric `G = D²(½F⁰²)`, the
//! tensor `Q = D³(½F⁰²)` and the matrix `A_F = D²F|_{T_ν S}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::ad::{Dual, Dual3, Jet2, Scalar};
use crate::error::{Error, Result};
use crate::expr::{jet_from_nested, Expression, JetValue};
use crate::linalg::{self, arr, Tensor3};
use crate::sampling;

/// Gradient tolerance of the dual solve (relative to a unit direction).
pub const DUAL_TOL: f64 = 1e-12;
pub const DUAL_MAX_ITER: usize = 60;

/// How `F⁰` is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum NormKind {
    /// Euclidean norm.
    Sphere,
    /// `F⁰(x) = sqrt(Σ x_i² / a_i)`, Wulff shape the ellipsoid with semi-axes `sqrt(a_i)`.
    Ellipsoid(Vec<f64>),
    /// `((x²+y²+z²)(x²+y²) + z⁴)^{1/4}`.
    QuarticA2,
    /// `((x²+2y²+z²)(x²+2y²) + z⁴)^{1/4}`.
    QuarticA2Prime,
    /// Gauge of the translated Wulff shape `W_base + eta`; the origin must
    /// stay inside, i.e. `F⁰_base(−eta) < 1`.
    Shifted { base: Box<Norm>, eta: Vec<f64> },
    Custom(Expression),
}

/// A Minkowski norm on `R^d`, `d ∈ {3, 4}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Norm {
    pub kind: NormKind,
    pub d: usize,
    pub homogeneity_check_tol: f64,
    pub label: String,
}

/// Result of a support-function evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolveResult {
    /// `F(x)`.
    pub value: f64,
    /// The maximizer `z*` on the Wulff shape, equal to `Ψ(x/|x|)`.
    pub maximizer: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Support data at a direction, in fixed dimension.
#[derive(Clone, Copy, Debug)]
pub struct DualPoint<const D: usize> {
    /// `F(x)`.
    pub value: f64,
    /// Cahn–Hoffman image `Ψ(x) ∈ W`.
    pub z: [f64; D],
    /// Minimizer of the Legendre objective, `F(x)·z`; reusable as a warm start.
    pub y: [f64; D],
    /// `G(z)`.
    pub g: [[f64; D]; D],
    pub iterations: usize,
}

/// Maximal residuals of the duality identities over sampled directions.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub samples: usize,
    /// `max |F⁰(Ψ(x)) − 1|`.
    pub level_set: f64,
    /// `max |DF⁰(Ψ(x)) − x/F(x)|`.
    pub gradient: f64,
    /// `max |G(ν_F)(ν_F, Y) − ⟨Y, ν⟩/F(ν)|`.
    pub metric_pairing: f64,
}

impl DualityReport {
    pub fn max_residual(&self) -> f64 {
        self.level_set.max(self.gradient).max(self.metric_pairing)
    }
}

macro_rules! by_dim {
    ($d:expr, $f:ident ( $($arg:expr),* )) => {
        match $d {
            3 => $f::<3>($($arg),*),
            4 => $f::<4>($($arg),*),
            d => Err(Error::Unsupported(format!("ambient dimension {d}"))),
        }
    };
}

impl Norm {
    fn with_kind(kind: NormKind, d: usize, label: impl Into<String>) -> Self {
        Norm { kind, d, homogeneity_check_tol: 1e-10, label: label.into() }
    }

    pub fn sphere(d: usize) -> Self {
        Self::with_kind(NormKind::Sphere, d, "sphere")
    }

    /// Ellipsoidal Wulff shape `Σ x_i²/a_i = 1`; the dimension is `a.len()`.
    pub fn ellipsoid(a: &[f64]) -> Result<Self> {
        if !(3..=4).contains(&a.len()) || a.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config(format!("ellipsoid needs 3 or 4 positive parameters, got {a:?}")));
        }
        Ok(Self::with_kind(NormKind::Ellipsoid(a.to_vec()), a.len(), "ellipsoid"))
    }

    pub fn quartic_a2() -> Self {
        Self::with_kind(NormKind::QuarticA2, 3, "quartic_a2")
    }

    pub fn quartic_a2_prime() -> Self {
        Self::with_kind(NormKind::QuarticA2Prime, 3, "quartic_a2_prime")
    }

    /// Wulff shape `{((x²+y²+(z+z₀)²)(x²+y²) + (z+z₀)⁴) = 1}`, i.e. the
    /// `quartic_a2` shape moved down by `z₀`.
    pub fn quartic_a3(z0: f64) -> Result<Self> {
        if !(z0.abs() < 1.0) {
            return Err(Error::Config(format!("quartic_a3 needs |z0| < 1, got {z0}")));
        }
        let mut n = Self::shifted(Self::quartic_a2(), &[0.0, 0.0, -z0])?;
        n.label = "quartic_a3".into();
        Ok(n)
    }

    /// Norm whose Wulff shape is `W_base + eta`.
    pub fn shifted(base: Norm, eta: &[f64]) -> Result<Self> {
        if eta.len() != base.d {
            return Err(Error::Config("shift vector has the wrong dimension".into()));
        }
        let minus: Vec<f64> = eta.iter().map(|v| -v).collect();
        let inside = base.f0(&minus)?;
        if !(inside < 1.0) {
            return Err(Error::Hypothesis(format!(
                "origin not interior to the translated Wulff shape: F⁰(−η) = {inside}"
            )));
        }
        let d = base.d;
        let label = format!("{}+shift", base.label);
        Ok(Self::with_kind(NormKind::Shifted { base: Box::new(base), eta: eta.to_vec() }, d, label))
    }

    pub fn custom(expr: Expression) -> Self {
        let d = expr.dim;
        Self::with_kind(NormKind::Custom(expr), d, "custom")
    }

    /// Build from the config vocabulary `sphere | ellipsoid | quartic_a2 |
    /// quartic_a2_prime | quartic_a3 | custom`.
    pub fn from_spec(kind: &str, params: &[f64], f0_expr: Option<&str>, dim: usize) -> Result<Self> {
        match kind {
            "sphere" => {
                if !(3..=4).contains(&dim) {
                    return Err(Error::Config(format!("unsupported dimension {dim}")));
                }
                Ok(Self::sphere(dim))
            }
            "ellipsoid" => Self::ellipsoid(params),
            "quartic_a2" => Ok(Self::quartic_a2()),
            "quartic_a2_prime" => Ok(Self::quartic_a2_prime()),
            "quartic_a3" => match params {
                [z0] => Self::quartic_a3(*z0),
                _ => Err(Error::Config("quartic_a3 takes params = [z0]".into())),
            },
            "custom" => {
                let src = f0_expr.ok_or_else(|| Error::Config("custom norm needs norm.f0_expr".into()))?;
                let e = crate::expr::parse_with_dim(src, dim)?;
                Ok(Self::custom(e))
            }
            other => Err(Error::Config(format!("unknown norm kind `{other}`"))),
        }
    }

    /// `F⁰(x)` on any scalar type.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        match &self.kind {
            NormKind::Sphere => Ok(sum_sq(x).sqrt()),
            NormKind::Ellipsoid(a) => {
                let mut s = S::cst(0.0);
                for (xi, ai) in x.iter().zip(a) {
                    s = s + (*xi * *xi).scale(1.0 / ai);
                }
                Ok(s.sqrt())
            }
            NormKind::QuarticA2 => Ok(quartic(x, 1.0)),
            NormKind::QuarticA2Prime => Ok(quartic(x, 2.0)),
            NormKind::Shifted { base, eta } => shifted_gauge(base, eta, x),
            NormKind::Custom(e) => e.eval(x),
        }
    }

    pub fn f0(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }

    /// `DF⁰(x)` by first-order duals.
    pub fn grad_f0(&self, x: &[f64]) -> Result<DVector<f64>> {
        let mut g = DVector::zeros(self.d);
        let mut vars: Vec<Dual<f64>> = x.iter().map(|&v| Dual::new(v, 0.0)).collect();
        for a in 0..self.d {
            vars[a].du = 1.0;
            g[a] = self.eval(&vars)?.du;
            vars[a].du = 0.0;
        }
        Ok(g)
    }

    /// Third-order jet of `F⁰`.
    pub fn f0_jet(&self, x: &[f64]) -> Result<JetValue> {
        self.check_point(x)?;
        jet_from_nested(self.d, x, |v: &[Dual3]| self.eval(v))
    }

    /// Third-order jet of `½(F⁰)²`: value, gradient `F⁰DF⁰`, Hessian `G`, third derivative `Q`.
    pub fn half_square_jet(&self, x: &[f64]) -> Result<JetValue> {
        self.check_point(x)?;
        jet_from_nested(self.d, x, |v: &[Dual3]| {
            let f = self.eval(v)?;
            Ok((f * f).scale(0.5))
        })
    }

    /// Second-order jet of `½(F⁰)²` in fixed dimension.
    pub fn jet2<const D: usize>(&self, x: &[f64; D]) -> Result<Jet2<D>> {
        let f = self.eval(&Jet2::point(x))?;
        Ok((f * f).scale(0.5))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.d, x.len())));
        }
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::Domain("norm derivatives are undefined at the origin".into()));
        }
        Ok(())
    }

    /// `G(ξ) = D²(½F⁰²)(ξ)`.
    pub fn metric_g(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(xi)?;
        by_dim!(self.d, metric_fixed(self, xi))
    }

    /// `Q(ξ) = D³(½F⁰²)(ξ)`.
    pub fn tensor_q(&self, xi: &[f64]) -> Result<Tensor3> {
        Ok(self.half_square_jet(xi)?.third)
    }

    /// Support function `F(x) = max{⟨x, z⟩ : F⁰(z) = 1}` and its maximizer.
    pub fn support(&self, x: &[f64]) -> Result<DualSolveResult> {
        self.check_point(x)?;
        by_dim!(self.d, support_dyn(self, x))
    }

    /// Support function in fixed dimension, optionally warm-started from a
    /// previous [`DualPoint::y`] (any positive multiple works).
    pub fn support_point<const D: usize>(&self, x: &[f64; D], warm: Option<&[f64; D]>) -> Result<DualPoint<D>> {
        let len = linalg::norm(x);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::Domain("support function needs a finite nonzero direction".into()));
        }
        let unit = x.map(|v| v / len);
        let mut dp = match &self.kind {
            NormKind::Sphere => quadratic_support(&unit, |_| 1.0),
            NormKind::Ellipsoid(a) => quadratic_support(&unit, |i| a[i]),
            _ => legendre_solve(self, &unit, warm)?,
        };
        dp.value *= len;
        dp.y = dp.y.map(|v| v * len);
        Ok(dp)
    }

    /// Cahn–Hoffman map `Ψ(ν) = DF(ν)`, the Wulff-shape point with outer normal `ν`.
    pub fn cahn_hoffman(&self, unit_direction: &[f64]) -> Result<DVector<f64>> {
        Ok(self.support(unit_direction)?.maximizer)
    }

    /// `F(x)` value only.
    pub fn support_value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.support(x)?.value)
    }

    /// Full `D²F(ν)` through `F(ν)D²F(ν) = (I − z·DF⁰(z)ᵀ)·G(z)⁻¹`, `z = Ψ(ν)`.
    pub fn support_hessian(&self, nu: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(nu)?;
        by_dim!(self.d, support_hessian_dyn(self, nu))
    }

    /// `A_F(ν)` in an orthonormal basis of `T_ν S^{d−1}`, returned with that basis.
    pub fn a_f_matrix(&self, nu: &[f64]) -> Result<(DMatrix<f64>, Vec<DVector<f64>>)> {
        let h = self.support_hessian(nu)?;
        let len = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = nu.iter().map(|v| v / len).collect();
        let basis = tangent_basis_dyn(&unit);
        let m = basis.len();
        let a = DMatrix::from_fn(m, m, |i, j| basis[i].dot(&(&h * &basis[j])));
        Ok((a, basis))
    }

    /// `(−F(E_d), F(−E_d))`, the admissible range of the contact parameter.
    pub fn admissible_interval(&self) -> Result<(f64, f64)> {
        let mut e = vec![0.0; self.d];
        e[self.d - 1] = 1.0;
        let up = self.support_value(&e)?;
        e[self.d - 1] = -1.0;
        let down = self.support_value(&e)?;
        Ok((-up, down))
    }

    /// Residuals of the duality identities over `samples` seeded random
    /// directions. Derivatives of `F⁰` come from the nested-dual jets, which
    /// are independent of the second-order jets used inside the solver.
    pub fn verify_duality(&self, samples: usize, seed: u64) -> Result<DualityReport> {
        let mut rng = sampling::rng(seed);
        let mut rep = DualityReport { samples, level_set: 0.0, gradient: 0.0, metric_pairing: 0.0 };
        for _ in 0..samples {
            let x = sampling::random_unit(&mut rng, self.d);
            let y = sampling::random_unit(&mut rng, self.d);
            let sol = self.support(&x)?;
            let z = sol.maximizer.as_slice().to_vec();
            let jet = self.half_square_jet(&z)?;
            let f0z = (2.0 * jet.value).sqrt();
            rep.level_set = rep.level_set.max((f0z - 1.0).abs());
            for a in 0..self.d {
                let df0 = jet.grad[a] / f0z;
                rep.gradient = rep.gradient.max((df0 - x[a] / sol.value).abs());
            }
            // G is 0-homogeneous, so G(ν_F) = G(z).
            let zy: f64 = (0..self.d).map(|i| (0..self.d).map(|j| z[i] * jet.hess[(i, j)] * y[j]).sum::<f64>()).sum();
            let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            rep.metric_pairing = rep.metric_pairing.max((zy - xy / sol.value).abs());
        }
        Ok(rep)
    }

    /// Smallest eigenvalue of `G` over unit-sphere samples.
    pub fn ellipticity_min_eigenvalue(&self, samples: usize) -> Result<f64> {
        let mut min = f64::INFINITY;
        for x in sampling::sphere_samples(self.d, samples, sampling::DEFAULT_SEED) {
            let g = self.metric_g(&x)?;
            let eig = SymmetricEigen::new(g).eigenvalues;
            min = min.min(eig.min());
        }
        Ok(min)
    }

    /// `max |F⁰(λx) − λF⁰(x)| / (λF⁰(x))` for `λ ∈ {0.5, 2}`.
    pub fn homogeneity_residual(&self, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in sampling::sphere_samples(self.d, samples, sampling::DEFAULT_SEED) {
            let f = self.f0(&x)?;
            for lambda in [0.5, 2.0] {
                let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                worst = worst.max((self.f0(&xs)? - lambda * f).abs() / (lambda * f));
            }
        }
        Ok(worst)
    }
}

fn sum_sq<S: Scalar>(x: &[S]) -> S {
    let mut s = S::cst(0.0);
    for v in x {
        s = s + *v * *v;
    }
    s
}

fn quartic<S: Scalar>(x: &[S], ycoef: f64) -> S {
    let s = x[0] * x[0] + (x[1] * x[1]).scale(ycoef);
    let z2 = x[2] * x[2];
    ((s + z2) * s + z2 * z2).powf(0.25)
}

/// Solve `F⁰_base(x − tη) = t` for `t` on `f64`, then lift to the scalar
/// type by chord iterations with the converged slope; each chord step
/// fixes one more derivative order, so four steps settle a third-order jet.
fn shifted_gauge<S: Scalar>(base: &Norm, eta: &[f64], x: &[S]) -> Result<S> {
    let xr: Vec<f64> = x.iter().map(|v| v.re()).collect();
    let residual = |t: f64| -> Result<(f64, f64)> {
        let p: Vec<Dual<f64>> = xr.iter().zip(eta).map(|(&xi, &e)| Dual::new(xi - t * e, -e)).collect();
        let f = base.eval(&p)?;
        Ok((t - f.re, 1.0 - f.du))
    };
    // g(t) = t − F⁰(x − tη) is concave and increasing; Newton from t = 0
    // (where g < 0) increases monotonically to the root.
    let mut t = 0.0;
    let mut slope = 1.0;
    let mut converged = false;
    for _ in 0..100 {
        let (g, dg) = residual(t)?;
        slope = dg;
        if !(dg > 0.0) {
            return Err(Error::Hypothesis("translated gauge lost monotonicity".into()));
        }
        let step = g / dg;
        t -= step;
        if step.abs() <= 1e-14 * t.abs().max(1e-300) || g.abs() <= 1e-15 * t.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "translated gauge".into(), iterations: 100 });
    }
    let inv = 1.0 / slope;
    let mut ts = S::cst(t);
    let mut p: Vec<S> = x.to_vec();
    for _ in 0..4 {
        for (pi, (xi, e)) in p.iter_mut().zip(x.iter().zip(eta)) {
            *pi = *xi - ts.scale(*e);
        }
        let g = ts - base.eval(&p)?;
        ts = ts - g.scale(inv);
    }
    Ok(ts)
}

fn metric_fixed<const D: usize>(norm: &Norm, xi: &[f64]) -> Result<DMatrix<f64>> {
    let j = norm.jet2::<D>(&arr::<D>(xi))?;
    Ok(linalg::to_dmatrix(&j.h))
}

fn support_dyn<const D: usize>(norm: &Norm, x: &[f64]) -> Result<DualSolveResult> {
    let dp = norm.support_point::<D>(&arr::<D>(x), None)?;
    Ok(DualSolveResult {
        value: dp.value,
        maximizer: linalg::to_dvector(&dp.z),
        iterations: dp.iterations,
        converged: true,
    })
}

fn support_hessian_dyn<const D: usize>(norm: &Norm, nu: &[f64]) -> Result<DMatrix<f64>> {
    let dp = norm.support_point::<D>(&arr::<D>(nu), None)?;
    let h = support_hessian_from(&arr::<D>(nu), &dp)?;
    Ok(linalg::to_dmatrix(&h))
}

/// `D²F(ν)` from converged support data: `(I − z νᵀ/F(ν))·G(z)⁻¹ / F(ν)`,
/// symmetrized.
pub fn support_hessian_from<const D: usize>(nu: &[f64; D], dp: &DualPoint<D>) -> Result<[[f64; D]; D]> {
    let ginv = linalg::spd_inverse(&dp.g)
        .ok_or_else(|| Error::Hypothesis("G(z) is not positive definite".into()))?;
    let f = dp.value;
    let mut h = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            let mut s = ginv[i][j];
            for k in 0..D {
                s -= dp.z[i] * nu[k] / f * ginv[k][j];
            }
            h[i][j] = s / f;
        }
    }
    for i in 0..D {
        for j in 0..i {
            let s = 0.5 * (h[i][j] + h[j][i]);
            h[i][j] = s;
            h[j][i] = s;
        }
    }
    Ok(h)
}

fn tangent_basis_dyn(unit: &[f64]) -> Vec<DVector<f64>> {
    match unit.len() {
        3 => linalg::tangent_basis(&arr::<3>(unit)).iter().map(linalg::to_dvector).collect(),
        _ => linalg::tangent_basis(&arr::<4>(unit)).iter().map(linalg::to_dvector).collect(),
    }
}

/// Closed-form support data of `F⁰(x) = sqrt(Σ x_i²/a_i)`: `F(x) = sqrt(Σ a_i x_i²)`.
fn quadratic_support<const D: usize>(x: &[f64; D], a: impl Fn(usize) -> f64) -> DualPoint<D> {
    let value = (0..D).map(|i| a(i) * x[i] * x[i]).sum::<f64>().sqrt();
    let z: [f64; D] = std::array::from_fn(|i| a(i) * x[i] / value);
    let g: [[f64; D]; D] = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 / a(i) } else { 0.0 }));
    DualPoint { value, z, y: z.map(|v| v * value), g, iterations: 0 }
}

/// Newton's method on the strictly convex Legendre objective
/// `Φ(y) = ½F⁰(y)² − ⟨x, y⟩`, whose minimizer is `F(x)·Ψ(x)`; the Hessian
/// is `G(y)`, positive definite for elliptic norms. Steps are damped by
/// Armijo halving.
fn legendre_solve<const D: usize>(norm: &Norm, x: &[f64; D], warm: Option<&[f64; D]>) -> Result<DualPoint<D>> {
    legendre_solve_with(x, warm, |y| norm.jet2(y))
}

/// [`legendre_solve`] for any gauge given through the second-order jet of
/// its half square.
pub(crate) fn legendre_solve_with<const D: usize, J>(x: &[f64; D], warm: Option<&[f64; D]>, half_sq: J) -> Result<DualPoint<D>>
where
    J: Fn(&[f64; D]) -> Result<Jet2<D>>,
{
    let mut jet;
    let mut y = match warm {
        Some(w) if w.iter().all(|v| v.is_finite()) && linalg::norm(w) > 0.0 => *w,
        _ => {
            // Best point on the ray through x: ½c²F⁰(x)² − c is minimal at c = 1/F⁰(x)².
            jet = half_sq(x)?;
            x.map(|v| v / (2.0 * jet.v))
        }
    };
    let objective = |j: &Jet2<D>, y: &[f64; D]| j.v - linalg::dot(x, y);
    jet = half_sq(&y)?;
    for iter in 0..DUAL_MAX_ITER {
        let mut grad = [0.0; D];
        for a in 0..D {
            grad[a] = jet.g[a] - x[a];
        }
        let gnorm = linalg::norm(&grad);
        if gnorm <= DUAL_TOL {
            return Ok(finish(y, &jet, iter));
        }
        let l = linalg::cholesky(&jet.h)
            .ok_or_else(|| Error::Hypothesis("G is not positive definite during the dual solve".into()))?;
        let step = linalg::cholesky_solve(&l, &grad).map(|v| -v);
        if gnorm < 1e-6 {
            // The objective is flat to rounding here; judge the full Newton
            // step by the gradient instead.
            let mut trial = y;
            for a in 0..D {
                trial[a] += step[a];
            }
            let tj = half_sq(&trial)?;
            let tn = linalg::norm(&std::array::from_fn::<f64, D, _>(|a| tj.g[a] - x[a]));
            if tn < gnorm {
                y = trial;
                jet = tj;
                continue;
            }
            if gnorm <= 1e3 * DUAL_TOL {
                return Ok(finish(y, &jet, iter));
            }
        }
        let slope = linalg::dot(&grad, &step);
        let phi0 = objective(&jet, &y);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = y;
            for a in 0..D {
                trial[a] += alpha * step[a];
            }
            if let Ok(tj) = half_sq(&trial) {
                if objective(&tj, &trial) <= phi0 + 1e-4 * alpha * slope {
                    y = trial;
                    jet = tj;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Rounding floor: the objective can no longer decrease.
            if gnorm <= 1e3 * DUAL_TOL {
                return Ok(finish(y, &jet, iter));
            }
            return Err(Error::NoConvergence { what: "support-function line search".into(), iterations: iter });
        }
    }
    Err(Error::NoConvergence { what: "support-function Newton solve".into(), iterations: DUAL_MAX_ITER })
}

fn finish<const D: usize>(y: [f64; D], jet: &Jet2<D>, iterations: usize) -> DualPoint<D> {
    let value = (2.0 * jet.v).sqrt();
    DualPoint { value, z: y.map(|v| v / value), y, g: jet.h, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_support_is_self_dual() {
        let n = Norm::sphere(3);
        let s = n.support(&[1.0, 2.0, 2.0]).unwrap();
        assert!((s.value - 3.0).abs() < 1e-13);
        for (a, b) in s.maximizer.iter().zip([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn shifted_gauge_solves_its_defining_relation() {
        let base = Norm::quartic_a2();
        let eta = [0.1, -0.05, 0.3];
        let n = Norm::shifted(base.clone(), &eta).unwrap();
        let x = [0.3, 0.7, -0.2];
        let t = n.f0(&x).unwrap();
        let p: Vec<f64> = x.iter().zip(&eta).map(|(a, e)| a - t * e).collect();
        assert!((base.f0(&p).unwrap() - t).abs() < 1e-13);
    }

    #[test]
    fn a3_shape_is_a2_moved_down() {
        let z0 = 0.3;
        let n = Norm::quartic_a3(z0).unwrap();
        // Points of the a2 shape shifted by −z0·E3 lie on the unit level set.
        for p in crate::sampling::fibonacci_sphere(20) {
            let r = Norm::quartic_a2().f0(&p).unwrap();
            let q = [p[0] / r, p[1] / r, p[2] / r - z0];
            assert!((n.f0(&q).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
