//! Validated parameters of the two-oscillator model and the exact
//! diagonalization of its Hamiltonian.
//!
//! H = ω₁a₁†a₁ + ω₂a₂†a₂ + λ(a₁a₂† + a₁†a₂) + κ(a₁a₂ + a₁†a₂†), with ħ = k_B = 1.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CouplingKind {
    /// x₁x₂ coupling, κ = λ.
    #[serde(rename = "pp")]
    PositionPosition,
    /// Excitation-exchange coupling, κ = 0.
    #[serde(rename = "rw")]
    RotatingWave,
}

impl CouplingKind {
    pub fn label(self) -> &'static str {
        match self {
            CouplingKind::PositionPosition => "pp",
            CouplingKind::RotatingWave => "rw",
        }
    }

    pub fn counter_rotating(self, lambda: f64) -> f64 {
        match self {
            CouplingKind::PositionPosition => lambda,
            CouplingKind::RotatingWave => 0.0,
        }
    }
}

/// Unvalidated parameter record, as read from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub omega1: f64,
    pub omega2: f64,
    pub lambda: f64,
    pub kind: CouplingKind,
    pub gamma1: f64,
    pub gamma2: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Physical parameters that passed validation. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    raw: RawParams,
}

impl ModelParams {
    pub fn new(raw: RawParams) -> Result<Self> {
        validate_params(raw)
    }

    pub fn raw(&self) -> RawParams {
        self.raw
    }
    pub fn omega1(&self) -> f64 {
        self.raw.omega1
    }
    pub fn omega2(&self) -> f64 {
        self.raw.omega2
    }
    pub fn lambda(&self) -> f64 {
        self.raw.lambda
    }
    pub fn kappa(&self) -> f64 {
        self.raw.kind.counter_rotating(self.raw.lambda)
    }
    pub fn kind(&self) -> CouplingKind {
        self.raw.kind
    }
    pub fn gamma1(&self) -> f64 {
        self.raw.gamma1
    }
    pub fn gamma2(&self) -> f64 {
        self.raw.gamma2
    }
    pub fn t1(&self) -> f64 {
        self.raw.t1
    }
    pub fn t2(&self) -> f64 {
        self.raw.t2
    }
    pub fn beta1(&self) -> f64 {
        1.0 / self.raw.t1
    }
    pub fn beta2(&self) -> f64 {
        1.0 / self.raw.t2
    }

    pub fn critical_coupling(&self) -> f64 {
        critical_coupling(self.raw.kind, self.raw.omega1, self.raw.omega2)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        validate_params(RawParams { lambda, ..self.raw })
    }

    pub fn with_temperatures(&self, t1: f64, t2: f64) -> Result<Self> {
        validate_params(RawParams { t1, t2, ..self.raw })
    }
}

pub fn validate_params(raw: RawParams) -> Result<ModelParams> {
    let positive = [
        ("omega1", raw.omega1),
        ("omega2", raw.omega2),
        ("gamma1", raw.gamma1),
        ("gamma2", raw.gamma2),
        ("t1", raw.t1),
        ("t2", raw.t2),
    ];
    for (name, value) in positive {
        // written so that NaN is rejected too
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveParameter { name, value });
        }
    }
    if !(raw.lambda >= 0.0) || !raw.lambda.is_finite() {
        return Err(Error::NegativeCoupling(raw.lambda));
    }
    let critical = critical_coupling(raw.kind, raw.omega1, raw.omega2);
    if raw.lambda >= critical {
        return Err(Error::Supercritical { lambda: raw.lambda, critical });
    }
    Ok(ModelParams { raw })
}

pub fn critical_coupling(kind: CouplingKind, omega1: f64, omega2: f64) -> f64 {
    let geo = (omega1 * omega2).sqrt();
    match kind {
        CouplingKind::PositionPosition => 0.5 * geo,
        CouplingKind::RotatingWave => geo,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModes {
    pub plus: f64,
    pub minus: f64,
    pub kind: CouplingKind,
}

pub fn normal_mode_frequencies(model: &ModelParams) -> Result<NormalModes> {
    let (w1, w2, lam) = (model.omega1(), model.omega2(), model.lambda());
    let supercritical = || Error::Supercritical { lambda: lam, critical: model.critical_coupling() };
    let kind = model.kind();
    match kind {
        CouplingKind::PositionPosition => {
            let sum = w1 * w1 + w2 * w2;
            let diff = w1 * w1 - w2 * w2;
            let root = (diff * diff + 16.0 * lam * lam * w1 * w2).sqrt();
            let plus2 = 0.5 * (sum + root);
            // (sum² − root²)/4 = ω₁²ω₂² − 4λ²ω₁ω₂, avoids cancellation near criticality
            let product = w1 * w2 * (w1 * w2 - 4.0 * lam * lam);
            let minus2 = product / plus2;
            if !(minus2 >= 0.0) {
                return Err(supercritical());
            }
            Ok(NormalModes { plus: plus2.sqrt(), minus: minus2.sqrt(), kind })
        }
        CouplingKind::RotatingWave => {
            let mean = 0.5 * (w1 + w2);
            let half = 0.5 * (w1 - w2);
            let root = (half * half + lam * lam).sqrt();
            let plus = mean + root;
            let minus = (w1 * w2 - lam * lam) / plus;
            if !(minus >= 0.0) {
                return Err(supercritical());
            }
            Ok(NormalModes { plus, minus, kind })
        }
    }
}

/// Rotation for the excitation-exchange coupling: d₊ = c a₁ + s a₂, d₋ = c a₂ − s a₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwRotation {
    pub c: f64,
    pub s: f64,
}

pub fn rw_rotation(model: &ModelParams) -> Result<RwRotation> {
    if model.kind() != CouplingKind::RotatingWave {
        return Err(Error::WrongCouplingKind);
    }
    let modes = normal_mode_frequencies(model)?;
    let gap = modes.plus - modes.minus;
    if gap <= 0.0 {
        // ω₁ = ω₂ and λ = 0: any rotation diagonalizes, pick θ = 0
        return Ok(RwRotation { c: 1.0, s: 0.0 });
    }
    let c2 = ((modes.plus - model.omega2()) / gap).clamp(0.0, 1.0);
    let s2 = ((model.omega2() - modes.minus) / gap).clamp(0.0, 1.0);
    Ok(RwRotation { c: c2.sqrt(), s: s2.sqrt() })
}

impl RwRotation {
    /// Rows are (d₊, d₋) in terms of (a₁, a₂).
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.c, self.s, -self.s, self.c)
    }
}

/// Mixing angle θ ∈ [0, π/2) of the position-position quadratic form.
pub fn pp_mixing_angle(model: &ModelParams) -> f64 {
    let (w1, w2, lam) = (model.omega1(), model.omega2(), model.lambda());
    let theta = 0.5 * (4.0 * lam * (w1 * w2).sqrt()).atan2(w1 * w1 - w2 * w2);
    if theta < 0.0 {
        0.0
    } else {
        theta
    }
}

/// (a₁, a₂, a₁†, a₂†)ᵀ = S (c₊, c₋, c₊†, c₋†)ᵀ with W = S⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovTransform {
    pub s: Matrix4<f64>,
    pub w: Matrix4<f64>,
}

pub fn pp_bogoliubov(model: &ModelParams) -> Result<BogoliubovTransform> {
    if model.kind() != CouplingKind::PositionPosition {
        return Err(Error::WrongCouplingKind);
    }
    let modes = normal_mode_frequencies(model)?;
    if modes.minus <= 0.0 {
        return Err(Error::Supercritical { lambda: model.lambda(), critical: model.critical_coupling() });
    }
    let theta = pp_mixing_angle(model);
    let (sin, cos) = theta.sin_cos();
    let (w1, w2) = (model.omega1(), model.omega2());
    let same = |w: f64, wj: f64| (w + wj) / (2.0 * (w * wj).sqrt());
    let opposite = |w: f64, wj: f64| (wj - w) / (2.0 * (w * wj).sqrt());
    let (wp, wm) = (modes.plus, modes.minus);
    let a = Matrix2::new(
        same(wp, w1) * cos,
        -same(wm, w1) * sin,
        same(wp, w2) * sin,
        same(wm, w2) * cos,
    );
    let b = Matrix2::new(
        opposite(wp, w1) * cos,
        -opposite(wm, w1) * sin,
        opposite(wp, w2) * sin,
        opposite(wm, w2) * cos,
    );
    let mut s = Matrix4::zeros();
    s.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    s.fixed_view_mut::<2, 2>(2, 2).copy_from(&a);
    s.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
    s.fixed_view_mut::<2, 2>(2, 0).copy_from(&b);
    let w = s
        .try_inverse()
        .ok_or(Error::SingularTransform { residual: f64::INFINITY })?;
    let residual = (s * w - Matrix4::identity()).abs().max();
    if residual > 1e-8 {
        return Err(Error::SingularTransform { residual });
    }
    Ok(BogoliubovTransform { s, w })
}

/// 1/(e^{βω} − 1); negative frequencies give the analytic continuation.
pub fn bose_occupation(omega: f64, beta: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Matrix4;
    use proptest::prelude::*;

    fn params(kind: CouplingKind, lambda: f64) -> ModelParams {
        ModelParams::new(RawParams {
            omega1: 5.0,
            omega2: 2.0,
            lambda,
            kind,
            gamma1: 1.5e-4,
            gamma2: 1.5e-4,
            t1: 98.0,
            t2: 98.0,
        })
        .unwrap()
    }

    #[test]
    fn validation() {
        let ok = params(CouplingKind::PositionPosition, 1.0);
        assert_eq!(ok.kappa(), 1.0);
        assert_eq!(params(CouplingKind::RotatingWave, 0.0).kappa(), 0.0);
        let mut raw = ok.raw();
        raw.lambda = 1.6;
        assert!(matches!(ModelParams::new(raw), Err(Error::Supercritical { .. })));
        raw.lambda = -0.1;
        assert!(matches!(ModelParams::new(raw), Err(Error::NegativeCoupling(_))));
        raw.lambda = 0.5;
        raw.gamma2 = 0.0;
        assert!(matches!(ModelParams::new(raw), Err(Error::NonPositiveParameter { name: "gamma2", .. })));
        raw.gamma2 = 1e-4;
        raw.t1 = f64::NAN;
        assert!(ModelParams::new(raw).is_err());
    }

    #[test]
    fn critical_values() {
        assert_relative_eq!(critical_coupling(CouplingKind::PositionPosition, 5.0, 2.0), 1.5811388300841898, epsilon = 1e-12);
        assert_relative_eq!(critical_coupling(CouplingKind::RotatingWave, 5.0, 2.0), 3.1622776601683795, epsilon = 1e-12);
        assert_eq!(critical_coupling(CouplingKind::PositionPosition, 3.0, 3.0), 1.5);
    }

    #[test]
    fn mode_frequencies_reference() {
        let m = normal_mode_frequencies(&params(CouplingKind::PositionPosition, 0.0)).unwrap();
        assert_relative_eq!(m.plus, 5.0, epsilon = 1e-14);
        assert_relative_eq!(m.minus, 2.0, epsilon = 1e-14);
        let m = normal_mode_frequencies(&params(CouplingKind::PositionPosition, 10f64.sqrt() / 4.0)).unwrap();
        let root = 541f64.sqrt();
        assert_relative_eq!(m.plus, ((29.0 + root) / 2.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(m.minus, ((29.0 - root) / 2.0).sqrt(), epsilon = 1e-12);
        assert!((m.plus - 5.1117).abs() < 1e-4 && (m.minus - 1.6942).abs() < 1e-4);
        let m = normal_mode_frequencies(&params(CouplingKind::RotatingWave, 10f64.sqrt() / 2.0)).unwrap();
        assert_relative_eq!(m.plus, 3.5 + 4.75f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(m.minus, 3.5 - 4.75f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn rotation_reference() {
        let r = rw_rotation(&params(CouplingKind::RotatingWave, 0.0)).unwrap();
        assert_eq!((r.c, r.s), (1.0, 0.0));
        let r = rw_rotation(&params(CouplingKind::RotatingWave, 10f64.sqrt() / 2.0)).unwrap();
        assert!((r.c * r.c - 0.84412).abs() < 1e-5);
        let mut raw = params(CouplingKind::RotatingWave, 0.0).raw();
        raw.omega2 = 5.0;
        let sym = ModelParams::new(RawParams { lambda: 0.7, ..raw }).unwrap();
        let r = rw_rotation(&sym).unwrap();
        assert_relative_eq!(r.c * r.c, 0.5, epsilon = 1e-12);
        assert_eq!(rw_rotation(&ModelParams::new(raw).unwrap()).unwrap().s, 0.0);
        assert_eq!(rw_rotation(&params(CouplingKind::PositionPosition, 0.3)), Err(Error::WrongCouplingKind));
    }

    #[test]
    fn bose_values() {
        assert!((bose_occupation(5.0, 1.0 / 98.0).unwrap() - 19.104).abs() < 1e-3);
        assert!((bose_occupation(2.0, 1.0 / 98.0).unwrap() - 48.502).abs() < 1e-3);
        assert_eq!(bose_occupation(3.0, 1e300).unwrap(), 0.0);
        assert_eq!(bose_occupation(0.0, 1.0), Err(Error::ZeroFrequency));
        // N(−ω) = −1 − N(ω)
        assert_relative_eq!(bose_occupation(-2.0, 0.3).unwrap(), -1.0 - bose_occupation(2.0, 0.3).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn decoupled_transform_is_identity() {
        let t = pp_bogoliubov(&params(CouplingKind::PositionPosition, 0.0)).unwrap();
        assert!((t.s - Matrix4::identity()).abs().max() < 1e-15);
    }

    /// Quadrature dynamical matrix of the pp Hamiltonian: q = (x₁, x₂, p₁, p₂),
    /// H = ½ Σ ω_j (x_j² + p_j²) + 2λ x₁x₂.
    fn pp_dynamical_matrix(w1: f64, w2: f64, lam: f64) -> Matrix4<f64> {
        let mut hess = Matrix4::zeros();
        hess[(0, 0)] = w1;
        hess[(1, 1)] = w2;
        hess[(2, 2)] = w1;
        hess[(3, 3)] = w2;
        hess[(0, 1)] = 2.0 * lam;
        hess[(1, 0)] = 2.0 * lam;
        let mut omega = Matrix4::zeros();
        omega[(0, 2)] = 1.0;
        omega[(1, 3)] = 1.0;
        omega[(2, 0)] = -1.0;
        omega[(3, 1)] = -1.0;
        omega * hess
    }

    /// Hermitian ladder-basis matrix h with H = ½ r†·h·r, r = (a₁, a₂, a₁†, a₂†).
    fn ladder_hamiltonian(w1: f64, w2: f64, lam: f64, kap: f64) -> Matrix4<f64> {
        let mut h = Matrix4::zeros();
        h[(0, 0)] = w1;
        h[(2, 2)] = w1;
        h[(1, 1)] = w2;
        h[(3, 3)] = w2;
        for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            h[(i, j)] = lam;
        }
        for (i, j) in [(0, 3), (3, 0), (1, 2), (2, 1)] {
            h[(i, j)] = kap;
        }
        h
    }

    fn subcritical() -> impl Strategy<Value = (f64, f64, f64)> {
        (0.5f64..8.0, 0.5f64..8.0, 0.0f64..0.999)
    }

    proptest! {
        #[test]
        fn pp_spectrum_matches_dynamical_matrix((w1, w2, frac) in subcritical()) {
            let lam = frac * critical_coupling(CouplingKind::PositionPosition, w1, w2);
            let model = ModelParams::new(RawParams { omega1: w1, omega2: w2, lambda: lam, kind: CouplingKind::PositionPosition, gamma1: 1e-3, gamma2: 1e-3, t1: 1.0, t2: 1.0 }).unwrap();
            let modes = normal_mode_frequencies(&model).unwrap();
            let mut freqs: Vec<f64> = pp_dynamical_matrix(w1, w2, lam).complex_eigenvalues().iter().map(|z| z.im).filter(|x| *x > 0.0).collect();
            freqs.sort_by(f64::total_cmp);
            prop_assert_eq!(freqs.len(), 2);
            prop_assert!((freqs[1] - modes.plus).abs() <= 1e-10 * modes.plus);
            prop_assert!((freqs[0] - modes.minus).abs() <= 1e-9 * modes.plus);
        }

        #[test]
        fn rw_spectrum_and_rotation((w1, w2, frac) in subcritical()) {
            let lam = frac * critical_coupling(CouplingKind::RotatingWave, w1, w2);
            let model = ModelParams::new(RawParams { omega1: w1, omega2: w2, lambda: lam, kind: CouplingKind::RotatingWave, gamma1: 1e-3, gamma2: 1e-3, t1: 1.0, t2: 1.0 }).unwrap();
            let modes = normal_mode_frequencies(&model).unwrap();
            let single = Matrix2::new(w1, lam, lam, w2);
            let mut eig: Vec<f64> = single.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            prop_assert!((eig[1] - modes.plus).abs() <= 1e-12 * modes.plus);
            prop_assert!((eig[0] - modes.minus).abs() <= 1e-12 * modes.plus);
            let rot = rw_rotation(&model).unwrap();
            prop_assert!((rot.c * rot.c + rot.s * rot.s - 1.0).abs() < 1e-12);
            let r = rot.matrix();
            let diag = r * single * r.transpose();
            prop_assert!((diag[(0, 0)] - modes.plus).abs() < 1e-10);
            prop_assert!((diag[(1, 1)] - modes.minus).abs() < 1e-10);
            prop_assert!(diag[(0, 1)].abs() < 1e-10);
        }

        #[test]
        fn bogoliubov_is_symplectic_and_diagonalizes((w1, w2, frac) in subcritical()) {
            let lam = frac * critical_coupling(CouplingKind::PositionPosition, w1, w2);
            let model = ModelParams::new(RawParams { omega1: w1, omega2: w2, lambda: lam, kind: CouplingKind::PositionPosition, gamma1: 1e-3, gamma2: 1e-3, t1: 1.0, t2: 1.0 }).unwrap();
            let t = pp_bogoliubov(&model).unwrap();
            prop_assert!((t.s * t.w - Matrix4::identity()).abs().max() < 1e-10);
            let modes = normal_mode_frequencies(&model).unwrap();
            let h = ladder_hamiltonian(w1, w2, lam, lam);
            let diag = t.s.transpose() * h * t.s;
            let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(modes.plus, modes.minus, modes.plus, modes.minus));
            prop_assert!((diag - expect).abs().max() < 1e-8 * (1.0 + modes.plus / modes.minus.max(1e-3)));
            // bosonic commutators preserved: S K Sᵀ = K with K = diag(1,1,−1,−1)
            let k = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0));
            prop_assert!((t.s * k * t.s.transpose() - k).abs().max() < 1e-9 * (1.0 + 1.0 / modes.minus.max(1e-3)));
        }

        #[test]
        fn mode_frequencies_monotone(w1 in 0.5f64..8.0, w2 in 0.5f64..8.0, a in 0.0f64..0.99, b in 0.0f64..0.99) {
            for kind in [CouplingKind::PositionPosition, CouplingKind::RotatingWave] {
                let crit = critical_coupling(kind, w1, w2);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let raw = RawParams { omega1: w1, omega2: w2, lambda: lo * crit, kind, gamma1: 1e-3, gamma2: 1e-3, t1: 1.0, t2: 1.0 };
                let m_lo = normal_mode_frequencies(&ModelParams::new(raw).unwrap()).unwrap();
                let m_hi = normal_mode_frequencies(&ModelParams::new(RawParams { lambda: hi * crit, ..raw }).unwrap()).unwrap();
                prop_assert!(m_hi.plus >= m_lo.plus - 1e-12);
                prop_assert!(m_hi.minus <= m_lo.minus + 1e-12);
            }
        }
    }

    #[test]
    fn softening_near_criticality() {
        for kind in [CouplingKind::PositionPosition, CouplingKind::RotatingWave] {
            let crit = critical_coupling(kind, 5.0, 2.0);
            let near = normal_mode_frequencies(&params(kind, 0.999999 * crit)).unwrap();
            let free = normal_mode_frequencies(&params(kind, 0.0)).unwrap();
            assert!(near.minus < 1e-2 * free.minus);
        }
    }

    #[test]
    fn critical_coupling_is_root_of_soft_mode() {
        // ω₋ vanishes only at the critical coupling: bisection on ω₋² continued past λ_c
        for kind in [CouplingKind::PositionPosition, CouplingKind::RotatingWave] {
            let (w1, w2): (f64, f64) = (3.7, 1.3);
            let soft = |lam: f64| match kind {
                CouplingKind::PositionPosition => {
                    let root = ((w1 * w1 - w2 * w2).powi(2) + 16.0 * lam * lam * w1 * w2).sqrt();
                    0.5 * (w1 * w1 + w2 * w2 - root)
                }
                CouplingKind::RotatingWave => 0.5 * (w1 + w2) - ((w1 - w2).powi(2) / 4.0 + lam * lam).sqrt(),
            };
            let (mut lo, mut hi) = (0.0, 10.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if soft(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert_relative_eq!(lo, critical_coupling(kind, w1, w2), max_relative = 1e-10);
        }
    }
}
