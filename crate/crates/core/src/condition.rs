//! Sampled verification of the structural condition on `(F, ω₀)`:
//!
//! `ω₀ ≤ Q(z)(Y, Y, A_F(ν)μ)·⟨E_d, μ⟩·F(ν) / G(z)(Y, Y)`
//!
//! for every `z` on the slice `W ∩ {x_d = −ω₀}` and every slice tangent `Y`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::Norm;
use crate::wulff::{ray_exit, TranslatedNorm};

pub const DEFAULT_SLICE_SAMPLES: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-6;
/// Tangent directions swept per slice point when the slice tangent space is 2-dimensional.
pub const TANGENT_SWEEP: usize = 32;
/// `|A_F(ν)μ|_G` below this marks a degenerate frame.
pub const DEGENERATE_TOL: f64 = 1e-8;

/// Geometry at one point of the slice `W ∩ {x_d = −ω₀}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceFrame {
    pub z: Vec<f64>,
    /// Outer unit normal of `W` at `z`.
    pub nu: Vec<f64>,
    /// Unit co-normal of the slice inside `W`, with `⟨μ, E_d⟩ < 0`.
    pub mu: Vec<f64>,
    /// Orthonormal basis of the slice tangent space.
    pub tangents: Vec<Vec<f64>>,
    /// `A_F(ν)μ = D²F(ν)μ`.
    pub a_f_mu: Vec<f64>,
    /// `F(ν) = ⟨ν, z⟩`.
    pub f_nu: f64,
    /// `G(z)`, row-major.
    pub g: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn bilinear(m: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    m.iter().zip(a).map(|(row, ai)| ai * dot(row, b)).sum()
}

/// Interior point of the slice: where the segment from `Ψ(−E_d)` to
/// `Ψ(E_d)` crosses the plane `x_d = −ω₀`.
pub fn slice_center(norm: &Norm, omega0: f64) -> Result<Vec<f64>> {
    let d = norm.d;
    let mut e = vec![0.0; d];
    e[d - 1] = 1.0;
    let top = norm.support(&e)?.maximizer;
    e[d - 1] = -1.0;
    let bottom = norm.support(&e)?.maximizer;
    let h = -omega0;
    if !(h < top[d - 1] && h > bottom[d - 1]) {
        return Err(Error::EmptySlice(format!("plane x_d = {h} misses the Wulff shape")));
    }
    let s = (h - bottom[d - 1]) / (top[d - 1] - bottom[d - 1]);
    Ok((0..d).map(|i| bottom[i] + s * (top[i] - bottom[i])).collect())
}

/// Frame at the slice point reached from the slice center along the
/// in-plane unit direction `dir` (`d − 1` components).
pub fn slice_frame(norm: &Norm, omega0: f64, dir: &[f64]) -> Result<SliceFrame> {
    let d = norm.d;
    if dir.len() != d - 1 {
        return Err(Error::Domain("slice direction must have d − 1 components".into()));
    }
    let c = slice_center(norm, omega0)?;
    let mut full = dir.to_vec();
    full.push(0.0);
    let full = normalized(full);
    let rho = ray_exit(norm, &c, &full, 1.0)?;
    let z: Vec<f64> = c.iter().zip(&full).map(|(a, b)| a + rho * b).collect();
    frame_at(norm, z)
}

/// [`slice_frame`] for `d = 3` with the direction given by its angle.
pub fn slice_frame_at_angle(norm: &Norm, omega0: f64, angle: f64) -> Result<SliceFrame> {
    slice_frame(norm, omega0, &[angle.cos(), angle.sin()])
}

fn frame_at(norm: &Norm, z: Vec<f64>) -> Result<SliceFrame> {
    let d = norm.d;
    let jet = norm.half_square_jet(&z)?;
    let nu = normalized(jet.grad.as_slice().to_vec());
    let f_nu = dot(&nu, &z);
    let mut ed = vec![0.0; d];
    ed[d - 1] = 1.0;
    let c = dot(&ed, &nu);
    let mu = normalized((0..d).map(|i| -(ed[i] - c * nu[i])).collect());
    // Slice tangents: orthonormal complement of span(ν, E_d).
    let mut tangents: Vec<Vec<f64>> = Vec::new();
    let mut fixed = vec![nu.clone(), mu.clone()];
    for axis in 0..d {
        if tangents.len() == d - 2 {
            break;
        }
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        for b in &fixed {
            let p = dot(&v, b);
            for i in 0..d {
                v[i] -= p * b[i];
            }
        }
        let len = dot(&v, &v).sqrt();
        if len > 1e-6 {
            let v: Vec<f64> = v.iter().map(|x| x / len).collect();
            fixed.push(v.clone());
            tangents.push(v);
        }
    }
    let g: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| jet.hess[(i, j)]).collect()).collect();
    let ginv = jet.hess.clone().try_inverse().ok_or_else(|| Error::Hypothesis("G(z) is singular".into()))?;
    // D²F(ν) = (I − z νᵀ/F)·G⁻¹/F.
    let gm: Vec<f64> = (0..d).map(|i| (0..d).map(|j| ginv[(i, j)] * mu[j]).sum()).collect();
    let nu_gm = dot(&nu, &gm);
    let a_f_mu: Vec<f64> = (0..d).map(|i| (gm[i] - z[i] * nu_gm / f_nu) / f_nu).collect();
    Ok(SliceFrame { z, nu, mu, tangents, a_f_mu, f_nu, g })
}

/// Right side of the condition at a frame for the tangent `y`.
pub fn condition_rhs(norm: &Norm, frame: &SliceFrame, y: &[f64]) -> Result<f64> {
    let q = norm.tensor_q(&frame.z)?;
    Ok(rhs_from(&q, frame, y, &frame.mu, &frame.a_f_mu))
}

fn rhs_from(q: &linalg::Tensor3, frame: &SliceFrame, y: &[f64], mu: &[f64], a_f_mu: &[f64]) -> f64 {
    let d = frame.z.len();
    q.contract(y, y, a_f_mu) * mu[d - 1] * frame.f_nu / bilinear(&frame.g, y, y)
}

/// `RHS − ω₀`; nonnegative where the condition holds.
pub fn condition_margin(norm: &Norm, omega0: f64, frame: &SliceFrame, y: &[f64]) -> Result<f64> {
    Ok(condition_rhs(norm, frame, y)? - omega0)
}

/// `−Q̃(z̃)(Y, Y, A_F(ν)μ)` at `z̃ = z + ω₀E^F`, differentiating `F̃⁰` directly.
pub fn condition_margin_translated(tn: &TranslatedNorm, frame: &SliceFrame, y: &[f64]) -> Result<f64> {
    let zt: Vec<f64> = frame.z.iter().zip(tn.eta()).map(|(a, b)| a + b).collect();
    let denom = tn.transfer_denominator(&frame.z)?;
    if !(denom > 0.0) {
        return Err(Error::Hypothesis(format!("1 + G(z)(z, η) = {denom} is not positive")));
    }
    let jet = tn.shifted.half_square_jet(&zt)?;
    Ok(-jet.third.contract(y, y, &frame.a_f_mu))
}

/// One slice sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionSample {
    pub z: Vec<f64>,
    /// Tangent attaining the smallest margin at `z`.
    pub y: Vec<f64>,
    pub margin: f64,
    /// Margin with the co-normal reversed.
    pub margin_opposite: f64,
    pub margin_translated: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub norm: String,
    pub omega0: f64,
    pub samples: Vec<ConditionSample>,
    pub min_margin: f64,
    pub min_margin_opposite: f64,
    pub min_margin_translated: f64,
    pub satisfied: bool,
    pub both_forms_agree: bool,
    pub degenerate_count: usize,
    pub tol: f64,
}

/// In-plane sample directions: equally spaced angles for `d = 3`, a
/// Fibonacci lattice on `S²` for `d = 4`.
pub fn slice_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    if d == 3 {
        (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        crate::sampling::fibonacci_sphere(count).into_iter().map(|p| p.to_vec()).collect()
    }
}

/// Evaluate the condition at `samples` slice points.
pub fn check(norm: &Norm, omega0: f64, samples: usize, tol: f64) -> Result<ConditionReport> {
    let tn = TranslatedNorm::new(norm, omega0)?;
    let mut out = Vec::with_capacity(samples);
    for dir in slice_directions(norm.d, samples) {
        let frame = slice_frame(norm, omega0, &dir)?;
        let q = norm.tensor_q(&frame.z)?;
        let candidates: Vec<Vec<f64>> = if frame.tangents.len() == 1 {
            vec![frame.tangents[0].clone()]
        } else {
            (0..TANGENT_SWEEP)
                .map(|k| {
                    let t = std::f64::consts::PI * k as f64 / TANGENT_SWEEP as f64;
                    let (s, c) = t.sin_cos();
                    frame.tangents[0].iter().zip(&frame.tangents[1]).map(|(a, b)| c * a + s * b).collect()
                })
                .collect()
        };
        let neg_mu: Vec<f64> = frame.mu.iter().map(|v| -v).collect();
        let neg_afmu: Vec<f64> = frame.a_f_mu.iter().map(|v| -v).collect();
        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        for y in candidates {
            let m = rhs_from(&q, &frame, &y, &frame.mu, &frame.a_f_mu) - omega0;
            let mo = rhs_from(&q, &frame, &y, &neg_mu, &neg_afmu) - omega0;
            if best.as_ref().map_or(true, |b| m < b.0) {
                best = Some((m, mo, y));
            }
        }
        let (margin, margin_opposite, y) = best.expect("at least one tangent");
        let margin_translated = condition_margin_translated(&tn, &frame, &y)?;
        let size = bilinear(&frame.g, &frame.a_f_mu, &frame.a_f_mu).max(0.0).sqrt();
        out.push(ConditionSample {
            z: frame.z.clone(),
            y,
            margin,
            margin_opposite,
            margin_translated,
            degenerate: size < DEGENERATE_TOL,
        });
    }
    let min_of = |f: fn(&ConditionSample) -> f64| out.iter().map(f).fold(f64::INFINITY, f64::min);
    let min_margin = min_of(|s| s.margin);
    let both_forms_agree = out.iter().all(|s| (s.margin >= -tol) == (s.margin_translated >= -tol));
    Ok(ConditionReport {
        norm: norm.label.clone(),
        omega0,
        min_margin,
        min_margin_opposite: min_of(|s| s.margin_opposite),
        min_margin_translated: min_of(|s| s.margin_translated),
        satisfied: min_margin >= -tol,
        both_forms_agree,
        degenerate_count: out.iter().filter(|s| s.degenerate).count(),
        samples: out,
        tol,
    })
}

impl ConditionReport {
    pub fn samples_csv(&self) -> String {
        let d = self.samples.first().map_or(3, |s| s.z.len());
        let mut s = String::new();
        let zc: Vec<String> = (0..d).map(|i| format!("z{i}")).collect();
        let yc: Vec<String> = (0..d).map(|i| format!("y{i}")).collect();
        let _ = writeln!(s, "{},{},margin,margin_opposite,margin_translated,degenerate", zc.join(","), yc.join(","));
        for smp in &self.samples {
            let nums: Vec<String> = smp.z.iter().chain(&smp.y).map(|v| format!("{v:.12e}")).collect();
            let _ = writeln!(
                s,
                "{},{:.12e},{:.12e},{:.12e},{}",
                nums.join(","),
                smp.margin,
                smp.margin_opposite,
                smp.margin_translated,
                smp.degenerate as u8
            );
        }
        s
    }

    pub fn write_samples_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.samples_csv())?;
        Ok(())
    }
}

/// Outcome of scanning `ω₀` for the largest value satisfying the condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScanOutcome {
    /// Largest satisfying `ω₀` found by bisection.
    Threshold(f64),
    AllSatisfied,
    AllViolated,
}

/// Bisection on `ω₀ ∈ [lo, hi]` for the sign change of the minimal margin,
/// to within `1e−3`.
pub fn scan_max_omega(norm: &Norm, lo: f64, hi: f64, samples: usize) -> Result<ScanOutcome> {
    if !(lo < hi) {
        return Err(Error::Config(format!("scan bracket ({lo}, {hi}) is empty")));
    }
    let ok = |w: f64| -> Result<bool> { Ok(check(norm, w, samples, DEFAULT_TOL)?.satisfied) };
    let (a, b) = (ok(lo)?, ok(hi)?);
    match (a, b) {
        (true, true) => return Ok(ScanOutcome::AllSatisfied),
        (false, false) => return Ok(ScanOutcome::AllViolated),
        (false, true) => {
            return Err(Error::Hypothesis("condition fails at the lower end but holds at the upper end".into()))
        }
        _ => {}
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 2.5e-4 {
        let m = 0.5 * (lo + hi);
        if ok(m)? {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(ScanOutcome::Threshold(lo))
}
