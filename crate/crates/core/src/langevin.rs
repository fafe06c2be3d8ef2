//! Exact steady state from the quantum Langevin equations solved in Fourier space.
//!
//! With X(ν) = (ã₁(ν), ã₁†(−ν), ã₂(ν), ã₂†(−ν)) and M(ν)X(ν) ∝ noise, the
//! equal-time moments are C_rs = ⟨X_r† X_s⟩ = (1/π)∫ Σ_k γ_k m̄_rk m_sk D_k(ν) dν
//! with m = M⁻¹ and D = (N₁(ν), N₁(−ν)+1, N₂(ν), N₂(−ν)+1).

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad_steady::{ladder_from_quadratures, CovarianceMatrix};
use crate::model::{bose_occupation, normal_mode_frequencies, ModelParams};
use crate::observables::symplectic_eigenvalues;
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Split point between the resonant range and the mapped tail, in units of
    /// the largest of ω₊, ω₁, ω₂.
    pub window_factor: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-10, abs_tol: 1e-14, window_factor: 10.0, max_subdivisions: 20_000 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-4) {
            return Err(Error::ConfigInvalid(format!("rel_tol must lie in (0, 1e-4], got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::ConfigInvalid(format!("abs_tol must be non-negative, got {}", self.abs_tol)));
        }
        if !(self.window_factor >= 5.0) || !self.window_factor.is_finite() {
            return Err(Error::ConfigInvalid(format!("window_factor must be at least 5, got {}", self.window_factor)));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::ConfigInvalid("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

pub fn drift_matrix(model: &ModelParams, nu: f64) -> Matrix4<Complex64> {
    let i = Complex64::i();
    let re = |x: f64| Complex64::new(x, 0.0);
    let (w1, w2, lam, kap) = (model.omega1(), model.omega2(), model.lambda(), model.kappa());
    let (g1, g2) = (re(model.gamma1()), re(model.gamma2()));
    let z = re(0.0);
    Matrix4::new(
        -i * nu + i * w1 + g1, z, i * lam, i * kap, //
        z, -i * nu - i * w1 + g1, -i * kap, -i * lam, //
        i * lam, i * kap, -i * nu + i * w2 + g2, z, //
        -i * kap, -i * lam, z, -i * nu - i * w2 + g2,
    )
}

fn response(model: &ModelParams, nu: f64) -> Result<Matrix4<Complex64>> {
    let m = drift_matrix(model, nu);
    if !(m.determinant().norm() > 1e-300) {
        return Err(Error::Supercritical { lambda: model.lambda(), critical: model.critical_coupling() });
    }
    m.try_inverse().ok_or(Error::Supercritical { lambda: model.lambda(), critical: model.critical_coupling() })
}

/// Integrand of C_rs = ⟨X_r† X_s⟩ at frequency ν ≠ 0; entry (0, 0) is the ⟨a₁†a₁⟩ integrand.
pub fn spectral_integrand(model: &ModelParams, nu: f64) -> Result<Matrix4<Complex64>> {
    if nu == 0.0 {
        return Err(Error::PoleAtZero);
    }
    let m = response(model, nu)?;
    let n1 = bose_occupation(nu, model.beta1())?;
    let n2 = bose_occupation(nu, model.beta2())?;
    let n1m = bose_occupation(-nu, model.beta1())?;
    let n2m = bose_occupation(-nu, model.beta2())?;
    let weights = [model.gamma1() * n1, model.gamma1() * (n1m + 1.0), model.gamma2() * n2, model.gamma2() * (n2m + 1.0)];
    Ok(Matrix4::from_fn(|r, s| {
        (0..4).map(|k| m[(r, k)].conj() * m[(s, k)] * weights[k]).sum::<Complex64>() / std::f64::consts::PI
    }))
}

/// Σ over the two columns of one bath: m̄_r,2b m_s,2b − m̄_r,2b+1 m_s,2b+1.
fn bath_kernel(m: &Matrix4<Complex64>, bath: usize) -> Matrix4<Complex64> {
    let (a, b) = (2 * bath, 2 * bath + 1);
    Matrix4::from_fn(|r, s| m[(r, a)].conj() * m[(s, a)] - m[(r, b)].conj() * m[(s, b)])
}

/// C(ν) + C(−ν) for ν > 0. Using N(−ν)+1 = −N(ν) the 1/ν Bose poles appear
/// only multiplied by a kernel difference that vanishes at ν = 0.
fn folded_moments(model: &ModelParams, nu: f64) -> Result<Matrix4<Complex64>> {
    let plus = response(model, nu)?;
    let minus = response(model, -nu)?;
    let mut total = Matrix4::zeros();
    for (bath, gamma, beta) in [(0, model.gamma1(), model.beta1()), (1, model.gamma2(), model.beta2())] {
        let n = bose_occupation(nu, beta)?;
        let kp = bath_kernel(&plus, bath);
        let km = bath_kernel(&minus, bath);
        total += ((kp - km) * Complex64::new(n, 0.0) - km) * Complex64::new(gamma, 0.0);
    }
    Ok(total.map(|z| z / std::f64::consts::PI))
}

/// Index r with X_r† equal to the ladder operator (a₁, a₂, a₁†, a₂†)[i], and the
/// X index holding that ladder operator itself.
const DAGGER_ROW: [usize; 4] = [1, 3, 0, 2];
const X_INDEX: [usize; 4] = [0, 2, 1, 3];

/// ⟨r_i r_j⟩ for r = (a₁, a₂, a₁†, a₂†) from the X-basis matrix C_rs = ⟨X_r† X_s⟩.
fn ladder_moments(c: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| c[(DAGGER_ROW[i], X_INDEX[j])])
}

/// Quadrature-covariance integrand in σ̄ entry order, upper triangle row-major.
fn covariance_integrand(model: &ModelParams, t_inv: &Matrix4<Complex64>, nu: f64) -> Result<[f64; 10]> {
    let ladder = ladder_moments(&folded_moments(model, nu)?);
    let q = t_inv * ladder * t_inv.transpose();
    let mut out = [0.0; 10];
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            out[k] = 0.5 * (q[(i, j)].re + q[(j, i)].re);
            k += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinSolution {
    pub covariance: CovarianceMatrix,
    /// Largest absolute quadrature error estimate over the covariance entries.
    pub quad_error: f64,
    pub evaluations: usize,
}

pub fn steady_second_moments(model: &ModelParams, cfg: &QuadratureConfig) -> Result<LangevinSolution> {
    cfg.validate()?;
    let modes = normal_mode_frequencies(model)?;
    let top = modes.plus.max(model.omega1()).max(model.omega2());
    let window = cfg.window_factor * top;
    let width = 100.0 * model.gamma1().max(model.gamma2());
    let mid = 0.5 * (modes.minus + modes.plus);
    let mut breaks = vec![0.0, mid, window, 2.0 * window];
    for peak in [modes.minus, modes.plus] {
        breaks.extend([peak - width, peak, peak + width]);
    }
    breaks.retain(|b| (0.0..=2.0 * window).contains(b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let t_inv = ladder_from_quadratures().try_inverse().expect("quadrature map is invertible");
    // [window, 2·window) is mapped onto [window, ∞) by ν = window²/(2·window − t)
    let failure = std::cell::Cell::new(None);
    let f = |t: f64| -> [f64; 10] {
        let (nu, jac) = if t <= window {
            (t, 1.0)
        } else {
            let d = 2.0 * window - t;
            (window * window / d, window * window / (d * d))
        };
        match covariance_integrand(model, &t_inv, nu) {
            Ok(v) if v.iter().all(|x| x.is_finite()) => v.map(|x| x * jac),
            Ok(_) => [0.0; 10],
            Err(e) => {
                failure.set(Some(e));
                [0.0; 10]
            }
        }
    };
    let est = integrate(f, &breaks, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let mut sigma = Matrix4::zeros();
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            sigma[(i, j)] = est.value[k];
            sigma[(j, i)] = est.value[k];
            k += 1;
        }
    }
    let covariance = CovarianceMatrix::new(sigma)?;
    let spectrum = symplectic_eigenvalues(&covariance)?;
    if spectrum.n_minus < 0.5 - 1e-9 {
        return Err(Error::UnphysicalCovariance { smallest: spectrum.n_minus });
    }
    let quad_error = est.error.iter().copied().fold(0.0, f64::max);
    Ok(LangevinSolution { covariance, quad_error, evaluations: est.evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipators::{rates_for, Basis, RateConvention};
    use crate::lindblad_steady::{occupation_from_covariance, solve_steady_covariance};
    use crate::model::{critical_coupling, CouplingKind, RawParams};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn model(kind: CouplingKind, frac: f64, t1: f64, t2: f64) -> ModelParams {
        ModelParams::new(RawParams {
            omega1: 5.0,
            omega2: 2.0,
            lambda: frac * critical_coupling(kind, 5.0, 2.0),
            kind,
            gamma1: 1.5e-4,
            gamma2: 1.5e-4,
            t1,
            t2,
        })
        .unwrap()
    }

    #[test]
    fn drift_matrix_examples() {
        let m = model(CouplingKind::PositionPosition, 0.0, 98.0, 98.0);
        let d = drift_matrix(&m, 0.0);
        let expect = [Complex64::new(1.5e-4, 5.0), Complex64::new(1.5e-4, -5.0), Complex64::new(1.5e-4, 2.0), Complex64::new(1.5e-4, -2.0)];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(d[(r, c)], if r == c { expect[r] } else { Complex64::new(0.0, 0.0) });
            }
        }
        let rw = drift_matrix(&model(CouplingKind::RotatingWave, 0.5, 98.0, 98.0), 1.3);
        for (r, c) in [(0, 3), (1, 2), (2, 1), (3, 0)] {
            assert_eq!(rw[(r, c)], Complex64::new(0.0, 0.0));
        }
        for kind in [CouplingKind::PositionPosition, CouplingKind::RotatingWave] {
            for frac in [0.1, 0.5, 0.9, 0.999] {
                assert!(drift_matrix(&model(kind, frac, 98.0, 98.0), 5.0).determinant().norm() > 0.0);
            }
        }
    }

    #[test]
    fn decoupled_integrand_is_lorentzian() {
        let m = model(CouplingKind::PositionPosition, 0.0, 98.0, 50.0);
        let g = 1.5e-4;
        for nu in [-3.0, 0.5, 4.9, 5.0, 7.0] {
            let c = spectral_integrand(&m, nu).unwrap();
            let expect = g / PI * bose_occupation(nu, 1.0 / 98.0).unwrap() / ((nu - 5.0).powi(2) + g * g);
            assert_relative_eq!(c[(0, 0)].re, expect, max_relative = 1e-12);
            assert_eq!(c[(0, 2)], Complex64::new(0.0, 0.0));
        }
        let peak = spectral_integrand(&m, 5.0).unwrap()[(0, 0)].re;
        assert_relative_eq!(peak, bose_occupation(5.0, 1.0 / 98.0).unwrap() / (PI * g), max_relative = 1e-12);
        assert_eq!(spectral_integrand(&m, 0.0), Err(Error::PoleAtZero));
    }

    #[test]
    fn fold_matches_two_sided_integrand() {
        let m = model(CouplingKind::PositionPosition, 0.4, 3.0, 7.0);
        for nu in [1e-3, 0.37, 1.7, 2.9, 5.2, 40.0] {
            let two_sided = spectral_integrand(&m, nu).unwrap() + spectral_integrand(&m, -nu).unwrap();
            let folded = folded_moments(&m, nu).unwrap();
            let scale = two_sided.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((two_sided - folded).iter().all(|z| z.norm() < 1e-9 * scale), "{nu}");
        }
        for j in 1..=10 {
            let c = folded_moments(&m, 10f64.powi(-j)).unwrap();
            assert!(c.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        }
    }

    #[test]
    fn decoupled_occupation_is_bose() {
        let m = model(CouplingKind::PositionPosition, 0.0, 98.0, 98.0);
        let sol = steady_second_moments(&m, &QuadratureConfig::default()).unwrap();
        let n1 = occupation_from_covariance(&sol.covariance, 1);
        assert!(((n1 - 19.104251) / 19.104251).abs() < 1e-6, "{n1}");
    }

    #[test]
    fn window_and_tolerance_insensitive() {
        for kind in [CouplingKind::PositionPosition, CouplingKind::RotatingWave] {
            for frac in [0.0, 0.3, 0.6, 0.9, 0.95] {
                let m = model(kind, frac, 60.0, 98.0);
                let base = QuadratureConfig::default();
                let a = steady_second_moments(&m, &base).unwrap();
                let b = steady_second_moments(&m, &QuadratureConfig { window_factor: 20.0, ..base }).unwrap();
                let c = steady_second_moments(&m, &QuadratureConfig { rel_tol: 0.5 * base.rel_tol, ..base }).unwrap();
                let na = occupation_from_covariance(&a.covariance, 1);
                let nb = occupation_from_covariance(&b.covariance, 1);
                let nc = occupation_from_covariance(&c.covariance, 1);
                assert!(((na - nb) / na).abs() < 1e-8, "{kind:?} {frac}: window {na} {nb}");
                assert!(((na - nc) / na).abs() < base.rel_tol, "{kind:?} {frac}: tol {na} {nc}");
            }
        }
    }

    #[test]
    fn agrees_with_global_master_equations() {
        for kind in [CouplingKind::PositionPosition, CouplingKind::RotatingWave] {
            for (frac, t1, t2) in [(0.2, 98.0, 98.0), (0.5, 38.0, 98.0), (0.8, 1.46, 1.96)] {
                let m = model(kind, frac, t1, t2);
                if kind == CouplingKind::PositionPosition && t1 != t2 {
                    continue;
                }
                let lang = steady_second_moments(&m, &QuadratureConfig::default()).unwrap();
                let me = solve_steady_covariance(&m, &rates_for(&m, Basis::Global, RateConvention::Bose).unwrap()).unwrap();
                for mode in [1, 2] {
                    let a = occupation_from_covariance(&lang.covariance, mode);
                    let b = occupation_from_covariance(&me.covariance, mode);
                    assert!(((a - b) / b).abs() < 1e-3, "{kind:?} {frac} mode {mode}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn reference_occupations() {
        // frozen from an independent dense Gauss–Legendre evaluation of the ⟨a₁†a₁⟩ integral
        let cases = [
            (CouplingKind::PositionPosition, 0.5, 22.3709),
            (CouplingKind::PositionPosition, 0.9, 60.8832),
            (CouplingKind::RotatingWave, 0.5, 25.6376),
            (CouplingKind::RotatingWave, 0.9, 102.662),
        ];
        for (kind, frac, expect) in cases {
            let sol = steady_second_moments(&model(kind, frac, 98.0, 98.0), &QuadratureConfig::default()).unwrap();
            let n1 = occupation_from_covariance(&sol.covariance, 1);
            assert!(((n1 - expect) / expect).abs() < 5e-6, "{kind:?} {frac}: {n1}");
        }
    }

    #[test]
    fn config_validation() {
        let base = QuadratureConfig::default();
        assert!(base.validate().is_ok());
        assert!(QuadratureConfig { rel_tol: 1e-3, ..base }.validate().is_err());
        assert!(QuadratureConfig { rel_tol: 0.0, ..base }.validate().is_err());
        assert!(QuadratureConfig { window_factor: 4.0, ..base }.validate().is_err());
    }
}
