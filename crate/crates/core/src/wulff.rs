//! Capillary Wulff shapes `W_{r,ω₀}`, the anchor vector `E^F`, the
//! translated norm `F̃ = F + ω₀⟨E^F, ·⟩` and the slice of its Wulff shape
//! by the supporting hyperplane.

use crate::ad::{Jet2, Scalar};
use crate::error::{Error, Result};
use crate::linalg::{self, arr, Tensor3};
use crate::norms::{legendre_solve_with, DualPoint, Norm};

/// The vector `E^F` with `⟨E^F, E_d⟩ = 1` that anchors capillary Wulff shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorVector {
    pub e_f: Vec<f64>,
    pub omega0: f64,
}

pub fn anchor_vector(norm: &Norm, omega0: f64) -> Result<AnchorVector> {
    let (lo, hi) = norm.admissible_interval()?;
    if !(omega0 > lo && omega0 < hi) {
        return Err(Error::Omega0OutOfRange { omega0, lo, hi });
    }
    let d = norm.d;
    let mut e = vec![0.0; d];
    let e_f = if omega0 < 0.0 {
        e[d - 1] = 1.0;
        let s = norm.support(&e)?;
        s.maximizer.iter().map(|v| v / s.value).collect()
    } else if omega0 > 0.0 {
        e[d - 1] = -1.0;
        let s = norm.support(&e)?;
        s.maximizer.iter().map(|v| -v / s.value).collect()
    } else {
        e[d - 1] = 1.0;
        e
    };
    Ok(AnchorVector { e_f, omega0 })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `F⁰(origin + ρ·dir) = level` for `ρ > 0`. The left side is convex
/// in `ρ`, so Newton started to the right of the root decreases
/// monotonically onto it; bisection takes over if a step misbehaves.
pub fn ray_exit(norm: &Norm, origin: &[f64], dir: &[f64], level: f64) -> Result<f64> {
    let at = |rho: f64| -> Vec<f64> { origin.iter().zip(dir).map(|(o, v)| o + rho * v).collect() };
    let f_origin = if origin.iter().all(|&v| v == 0.0) { 0.0 } else { norm.f0(origin)? };
    if !(f_origin < level) {
        return Err(Error::RayMiss);
    }
    let minus: Vec<f64> = origin.iter().map(|v| -v).collect();
    let f_dir = norm.f0(dir)?;
    let back = if f_origin == 0.0 { 0.0 } else { norm.f0(&minus)? };
    let mut hi = (level + back) / f_dir;
    let mut lo = 0.0;
    let mut rho = hi;
    for _ in 0..200 {
        let p = at(rho);
        let f = norm.f0(&p)? - level;
        if f.abs() <= 1e-14 * level {
            return Ok(rho);
        }
        if f > 0.0 {
            hi = rho;
        } else {
            lo = rho;
        }
        let slope = dot(norm.grad_f0(&p)?.as_slice(), dir);
        let newton = rho - f / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - rho).abs() <= 1e-13 * rho.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        rho = next;
    }
    Err(Error::NoConvergence { what: "radial function".into(), iterations: 200 })
}

/// `W_{r,ω₀} = {x : F⁰(x − rω₀E^F) = r}` intersected with the closed upper half-space.
#[derive(Clone, Debug)]
pub struct CapillaryWulffShape {
    pub r: f64,
    pub omega0: f64,
    pub anchor: AnchorVector,
    pub norm: Norm,
}

impl CapillaryWulffShape {
    pub fn new(norm: &Norm, r: f64, omega0: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        let anchor = anchor_vector(norm, omega0)?;
        Ok(CapillaryWulffShape { r, omega0, anchor, norm: norm.clone() })
    }

    /// With a caller-chosen anchor; only meaningful for `ω₀ = 0`, where
    /// every quantity must be independent of the choice.
    pub fn with_anchor(norm: &Norm, r: f64, anchor: AnchorVector) -> Self {
        CapillaryWulffShape { r, omega0: anchor.omega0, anchor, norm: norm.clone() }
    }

    /// `rω₀E^F`.
    pub fn center(&self) -> Vec<f64> {
        self.anchor.e_f.iter().map(|v| self.r * self.omega0 * v).collect()
    }

    /// Distance from the origin to the shape along a unit direction of the
    /// closed upper half-space.
    pub fn radial_function(&self, direction: &[f64]) -> Result<f64> {
        let origin: Vec<f64> = self.center().iter().map(|v| -v).collect();
        ray_exit(&self.norm, &origin, direction, self.r)
    }

    /// `1 + ω₀⟨ν, E^F⟩/F(ν) − û/r` at the shape point in `direction`, with
    /// `û = ⟨x, ν⟩/F(ν)`; `F(ν)` is taken from an independent dual solve.
    pub fn static_residual(&self, direction: &[f64]) -> Result<f64> {
        let rho = self.radial_function(direction)?;
        let c = self.center();
        let x: Vec<f64> = direction.iter().map(|v| rho * v).collect();
        let rel: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
        let g = self.norm.grad_f0(&rel)?;
        let len = g.norm();
        let nu: Vec<f64> = g.iter().map(|v| v / len).collect();
        let f_nu = self.norm.support_value(&nu)?;
        let u_hat = dot(&x, &nu) / f_nu;
        Ok(1.0 + self.omega0 * dot(&nu, &self.anchor.e_f) / f_nu - u_hat / self.r)
    }

    /// Enclosed volume of the cap (d = 3) by midpoint quadrature of `ρ³/3`.
    pub fn volume(&self, n_beta: usize, n_lambda: usize) -> Result<f64> {
        if self.norm.d != 3 {
            return Err(Error::Unsupported("cap volume quadrature is implemented for d = 3".into()));
        }
        let db = std::f64::consts::FRAC_PI_2 / n_beta as f64;
        let dl = std::f64::consts::TAU / n_lambda as f64;
        let mut v = 0.0;
        for i in 0..n_beta {
            let b = (i as f64 + 0.5) * db;
            let w = 2.0 * b.sin() * (0.5 * db).sin() * dl;
            for j in 0..n_lambda {
                let l = (j as f64 + 0.5) * dl;
                let rho = self.radial_function(&[b.sin() * l.cos(), b.sin() * l.sin(), b.cos()])?;
                v += rho.powi(3) / 3.0 * w;
            }
        }
        Ok(v)
    }
}

/// Values of the translated metric and third-derivative tensor on a triple of vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslatedForms {
    pub g_tilde: f64,
    pub q_tilde: f64,
}

/// `F̃(x) = F(x) + ω₀⟨E^F, x⟩`, the support function of `W̃ = W + ω₀E^F`.
#[derive(Clone, Debug)]
pub struct TranslatedNorm {
    pub base: Norm,
    pub omega0: f64,
    pub anchor: AnchorVector,
    /// Gauge of `W̃`, evaluated through `F⁰(x − F̃⁰(x)η) = F̃⁰(x)`.
    pub shifted: Norm,
}

impl TranslatedNorm {
    pub fn new(base: &Norm, omega0: f64) -> Result<Self> {
        let anchor = anchor_vector(base, omega0)?;
        Self::with_anchor(base, anchor)
    }

    pub fn with_anchor(base: &Norm, anchor: AnchorVector) -> Result<Self> {
        let eta: Vec<f64> = anchor.e_f.iter().map(|v| anchor.omega0 * v).collect();
        let shifted = Norm::shifted(base.clone(), &eta)?;
        Ok(TranslatedNorm { base: base.clone(), omega0: anchor.omega0, anchor, shifted })
    }

    /// `η = ω₀E^F`.
    pub fn eta(&self) -> Vec<f64> {
        self.anchor.e_f.iter().map(|v| self.omega0 * v).collect()
    }

    pub fn f_tilde(&self, x: &[f64]) -> Result<f64> {
        Ok(self.base.support_value(x)? + self.omega0 * dot(&self.anchor.e_f, x))
    }

    pub fn f0_tilde(&self, x: &[f64]) -> Result<f64> {
        self.shifted.f0(x)
    }

    /// `F̃⁰(x)` as the dual of `F̃`, by the Legendre solve on `½F̃²`.
    pub fn f0_tilde_via_dual(&self, x: &[f64]) -> Result<f64> {
        match self.base.d {
            3 => Ok(self.dual_route::<3>(&arr(x))?.value),
            4 => Ok(self.dual_route::<4>(&arr(x))?.value),
            d => Err(Error::Unsupported(format!("ambient dimension {d}"))),
        }
    }

    /// `G̃(x) = D²(½F̃⁰²)(x)` from the dual route: the inverse of the Hessian
    /// of `½F̃²` at the conjugate point.
    pub fn metric_via_dual(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        fn inner<const D: usize>(tn: &TranslatedNorm, x: &[f64]) -> Result<Vec<Vec<f64>>> {
            let dp = tn.dual_route::<D>(&arr(x))?;
            let inv = linalg::spd_inverse(&dp.g).ok_or_else(|| Error::Hypothesis("F̃ is not elliptic".into()))?;
            Ok(inv.iter().map(|r| r.to_vec()).collect())
        }
        match self.base.d {
            3 => inner::<3>(self, x),
            4 => inner::<4>(self, x),
            d => Err(Error::Unsupported(format!("ambient dimension {d}"))),
        }
    }

    /// `Q̃(x)` by central differences of [`Self::metric_via_dual`].
    pub fn tensor_q_via_dual(&self, x: &[f64], h: f64) -> Result<Tensor3> {
        let d = self.base.d;
        let mut q = Tensor3::zeros(d);
        let mut slabs = Vec::with_capacity(d);
        for k in 0..d {
            let mut p = x.to_vec();
            p[k] += h;
            let gp = self.metric_via_dual(&p)?;
            p[k] -= 2.0 * h;
            let gm = self.metric_via_dual(&p)?;
            slabs.push((gp, gm));
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (gp, gm) = &slabs[k];
                    q.data[(i * d + j) * d + k] = (gp[i][j] - gm[i][j]) / (2.0 * h);
                }
            }
        }
        // Average over index permutations to remove the asymmetric rounding.
        let raw = q.clone();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let s = (raw.get(i, j, k) + raw.get(i, k, j) + raw.get(j, i, k) + raw.get(j, k, i) + raw.get(k, i, j) + raw.get(k, j, i)) / 6.0;
                    q.data[(i * d + j) * d + k] = s;
                }
            }
        }
        Ok(q)
    }

    fn dual_route<const D: usize>(&self, x: &[f64; D]) -> Result<DualPoint<D>> {
        let e: [f64; D] = arr(&self.anchor.e_f);
        let w = self.omega0;
        let len = linalg::norm(x);
        let unit = x.map(|v| v / len);
        let mut dp = legendre_solve_with(&unit, None, |y: &[f64; D]| {
            let sp = self.base.support_point::<D>(y, None)?;
            let hess = crate::norms::support_hessian_from(y, &sp)?;
            let ft = sp.value + w * linalg::dot(&e, y);
            let mut grad = [0.0; D];
            for a in 0..D {
                grad[a] = sp.z[a] + w * e[a];
            }
            let mut jet = Jet2::<D>::constant(0.5 * ft * ft);
            for a in 0..D {
                jet.g[a] = ft * grad[a];
                for b in 0..D {
                    jet.h[a][b] = ft * hess[a][b] + grad[a] * grad[b];
                }
            }
            Ok(jet)
        })?;
        dp.value *= len;
        Ok(dp)
    }

    /// `1 + G(z)(z, η) = 1 + ⟨DF⁰(z), η⟩` for `z ∈ W`.
    pub fn transfer_denominator(&self, z: &[f64]) -> Result<f64> {
        let g = self.base.grad_f0(z)?;
        Ok(1.0 + dot(g.as_slice(), &self.eta()))
    }

    /// `G̃(z̃)(X, Y)` and `Q̃(z̃)(X, Y, Z)` at `z̃ = z + η` by the transfer
    /// formulas from `G(z)` and `Q(z)`; `X, Y, Z` must be tangent to `W` at `z`.
    pub fn translated_metric_q(&self, z: &[f64], x: &[f64], y: &[f64], zv: &[f64]) -> Result<TranslatedForms> {
        let jet = self.base.half_square_jet(z)?;
        let eta = self.eta();
        let g = |a: &[f64], b: &[f64]| -> f64 {
            let d = a.len();
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += a[i] * jet.hess[(i, j)] * b[j];
                }
            }
            s
        };
        let denom = 1.0 + g(z, &eta);
        if !(denom > 0.0) {
            return Err(Error::Hypothesis(format!("1 + G(z)(z, η) = {denom} is not positive")));
        }
        let q = jet.third.contract(x, y, zv);
        let corr = g(zv, y) * g(x, &eta) + g(x, y) * g(zv, &eta) + g(x, zv) * g(y, &eta);
        Ok(TranslatedForms { g_tilde: g(x, y) / denom, q_tilde: q / denom - corr / (denom * denom) })
    }

    /// The same two values by differentiating `F̃⁰` directly at `z + η`.
    pub fn translated_metric_q_direct(&self, z: &[f64], x: &[f64], y: &[f64], zv: &[f64]) -> Result<TranslatedForms> {
        let zt: Vec<f64> = z.iter().zip(self.eta()).map(|(a, b)| a + b).collect();
        let jet = self.shifted.half_square_jet(&zt)?;
        let d = x.len();
        let mut gt = 0.0;
        for i in 0..d {
            for j in 0..d {
                gt += x[i] * jet.hess[(i, j)] * y[j];
            }
        }
        Ok(TranslatedForms { g_tilde: gt, q_tilde: jet.third.contract(x, y, zv) })
    }

    /// `ḡ(y) = F̃⁰(y, 0)`, the gauge of the slice `W̄ = W̃ ∩ {x_d = 0}` in `R^{d−1}`.
    pub fn slice_gauge(&self, y: &[f64]) -> Result<f64> {
        let mut p = y.to_vec();
        p.push(0.0);
        self.shifted.f0(&p)
    }

    /// Support function `F̄(u)` of the slice, by a Legendre solve on `½ḡ²`.
    pub fn slice_support(&self, u: &[f64]) -> Result<f64> {
        Ok(self.slice_support_point(u)?.value)
    }

    /// Support data of the slice: value, maximizer and the Hessian of `½ḡ²` there.
    pub fn slice_support_point(&self, u: &[f64]) -> Result<SliceSupport> {
        match (self.base.d, u.len()) {
            (3, 2) => self.slice_fixed::<2>(&arr(u)),
            (4, 3) => self.slice_fixed::<3>(&arr(u)),
            _ => Err(Error::Domain("slice direction must have d − 1 components".into())),
        }
    }

    fn slice_fixed<const M: usize>(&self, u: &[f64; M]) -> Result<SliceSupport> {
        let len = linalg::norm(u);
        if !(len > 0.0) {
            return Err(Error::Domain("zero slice direction".into()));
        }
        let unit = u.map(|v| v / len);
        let dp = legendre_solve_with(&unit, None, |y: &[f64; M]| {
            let mut p: Vec<Jet2<M>> = Jet2::point(y).to_vec();
            p.push(Jet2::constant(0.0));
            let f = self.shifted.eval(&p)?;
            Ok((f * f).scale(0.5))
        })
        .map_err(|e| match e {
            Error::Domain(m) => Error::EmptySlice(m),
            other => other,
        })?;
        Ok(SliceSupport {
            value: dp.value * len,
            point: dp.z.to_vec(),
            hessian: dp.g.iter().map(|r| r.to_vec()).collect(),
        })
    }

    /// Cross-check of [`Self::slice_support`] for `d = 3`: dense angular
    /// sampling of the slice curve, refined by golden-section search.
    pub fn slice_support_sampled(&self, u: &[f64], samples: usize) -> Result<f64> {
        if self.base.d != 3 || u.len() != 2 {
            return Err(Error::Unsupported("sampled slice support is implemented for d = 3".into()));
        }
        let h = |a: f64| -> Result<f64> {
            let (s, c) = a.sin_cos();
            Ok((u[0] * c + u[1] * s) / self.slice_gauge(&[c, s])?)
        };
        let step = std::f64::consts::TAU / samples as f64;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 0..samples {
            let a = k as f64 * step;
            let v = h(a)?;
            if v > best.0 {
                best = (v, a);
            }
        }
        let (mut lo, mut hi) = (best.1 - step, best.1 + step);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut a = hi - phi * (hi - lo);
        let mut b = lo + phi * (hi - lo);
        let (mut fa, mut fb) = (h(a)?, h(b)?);
        for _ in 0..80 {
            if fa > fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - phi * (hi - lo);
                fa = h(a)?;
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + phi * (hi - lo);
                fb = h(b)?;
            }
        }
        Ok(fa.max(fb).max(best.0))
    }

    /// Radius of curvature `A_F̄(u)` of the slice curve (d = 3) at the point
    /// with outer normal `u`: `1/(F̄(u)·τᵀ D²(½ḡ²) τ)` with `τ ⟂ u`.
    pub fn slice_radius_of_curvature(&self, u: &[f64]) -> Result<f64> {
        if u.len() != 2 {
            return Err(Error::Unsupported("slice curvature radius is defined for d = 3".into()));
        }
        let len = (u[0] * u[0] + u[1] * u[1]).sqrt();
        let s = self.slice_support_point(&[u[0] / len, u[1] / len])?;
        let t = [-u[1] / len, u[0] / len];
        let mut q = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                q += t[i] * s.hessian[i][j] * t[j];
            }
        }
        Ok(1.0 / (s.value * q))
    }

    /// `F̄(ν̄) = (F(ν) + ω₀⟨E^F, ν⟩)/⟨ν, ν̄⟩` at a contact-line point of a
    /// capillary surface with normal `ν` and planar outer co-normal `ν̄`
    /// (last component zero).
    pub fn slice_support_from_boundary(&self, nu: &[f64], nu_bar: &[f64]) -> Result<f64> {
        Ok(self.f_tilde(nu)? / dot(nu, nu_bar))
    }
}

/// Support data of the boundary slice at one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSupport {
    pub value: f64,
    /// Point of the slice curve with outer normal `u`.
    pub point: Vec<f64>,
    /// `D²(½ḡ²)` at that point.
    pub hessian: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_cap_radial_function_on_axis() {
        let s = CapillaryWulffShape::new(&Norm::sphere(3), 1.0, -0.5).unwrap();
        assert!((s.radial_function(&[0.0, 0.0, 1.0]).unwrap() - 0.5).abs() < 1e-13);
        let s = CapillaryWulffShape::new(&Norm::sphere(3), 1.0, 0.0).unwrap();
        assert!((s.radial_function(&[0.6, 0.0, 0.8]).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn omega_out_of_range_is_rejected() {
        let e = anchor_vector(&Norm::sphere(3), 1.0).unwrap_err();
        assert!(matches!(e, Error::Omega0OutOfRange { .. }));
    }
}
