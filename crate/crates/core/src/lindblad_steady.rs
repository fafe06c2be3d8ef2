//! Steady-state second moments of a quadratic Lindblad equation via the
//! characteristic-function linear system G = Λσ̄.
//!
//! Moment ordering of σ̄: (x₁x₁, x₁p₁, x₁x₂, x₁p₂, p₁p₁, p₁x₂, p₁p₂, x₂x₂, x₂p₂, p₂p₂).

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;

use crate::dissipators::{Ladder, RateTable, Scheme};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::symplectic_eigenvalues;

pub type Vector10 = SVector<f64, 10>;
pub type Matrix10 = SMatrix<f64, 10, 10>;

/// Closest approach to the critical coupling the solver accepts.
pub const CRITICAL_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticMoments(pub Vector10);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    /// Accepts a matrix over (x₁, p₁, x₂, p₂) that is symmetric to roundoff.
    pub fn new(matrix: Matrix4<f64>) -> Result<Self> {
        let scale = matrix.abs().max().max(1.0);
        let asym = (matrix - matrix.transpose()).abs().max();
        if asym > 1e-12 * scale || matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(CovarianceMatrix((matrix + matrix.transpose()) * 0.5))
    }

    pub fn vacuum() -> Self {
        CovarianceMatrix(Matrix4::identity() * 0.5)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// Symmetrized quadrature covariance from ladder moments
    /// `moments[(i, j)] = ⟨r_i r_j⟩`, r = (a₁, a₂, a₁†, a₂†).
    pub fn from_ladder_moments(moments: &Matrix4<Complex64>) -> Result<Self> {
        let t = ladder_from_quadratures();
        let t_inv = t.try_inverse().expect("quadrature map is invertible");
        let q = t_inv * moments * t_inv.transpose();
        let sym = (q + q.transpose()).map(|z| z.re * 0.5);
        CovarianceMatrix::new(sym)
    }

    /// Symplectic moments σ̄ consistent with this covariance.
    pub fn to_symplectic(&self) -> SymplecticMoments {
        let mut v = Vector10::zeros();
        for (k, &(u, w)) in MOMENT_PAIRS.iter().enumerate() {
            let (i, j) = (swap_quadrature(u), swap_quadrature(w));
            let sign = if u % 2 == w % 2 { 1.0 } else { -1.0 };
            v[k] = 2.0 * sign * self.0[(i, j)];
        }
        SymplecticMoments(v)
    }
}

/// r = T q for r = (a₁, a₂, a₁†, a₂†), q = (x₁, p₁, x₂, p₂), a = (x + ip)/√2.
pub fn ladder_from_quadratures() -> Matrix4<Complex64> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ih = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let z = Complex64::new(0.0, 0.0);
    Matrix4::new(
        h, ih, z, z, //
        z, z, h, ih, //
        h, -ih, z, z, //
        z, z, h, -ih,
    )
}

/// Quadrature index pairs (0 = x₁, 1 = p₁, 2 = x₂, 3 = p₂) in σ̄ order.
const MOMENT_PAIRS: [(usize, usize); 10] =
    [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

fn swap_quadrature(i: usize) -> usize {
    i ^ 1
}

impl SymplecticMoments {
    fn get(&self, u: usize, w: usize) -> f64 {
        let key = if u <= w { (u, w) } else { (w, u) };
        let k = MOMENT_PAIRS.iter().position(|p| *p == key).expect("valid quadrature pair");
        self.0[k]
    }

    /// σ_ij = ±σ̄(swap i, swap j)/2 with x ↔ p exchanged and a sign flip on mixed x–p entries.
    pub fn to_covariance(&self) -> Result<CovarianceMatrix> {
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let sign = if i % 2 == j % 2 { 1.0 } else { -1.0 };
                m[(i, j)] = 0.5 * sign * self.get(swap_quadrature(i), swap_quadrature(j));
            }
        }
        CovarianceMatrix::new(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateSolution {
    pub covariance: CovarianceMatrix,
    pub scheme: Scheme,
    pub residual: f64,
}

/// Sign-masked half sum over the eight mixed-mode rate entries, ordered
/// Γ(a₁,a₂), Γ(a₁,a₂†), Γ(a₁†,a₂), Γ(a₁†,a₂†), Γ(a₂,a₁), Γ(a₂,a₁†), Γ(a₂†,a₁), Γ(a₂†,a₁†).
fn masked(rates: &RateTable, mask: [u8; 8]) -> f64 {
    use Ladder::*;
    const ORDER: [(Ladder, Ladder); 8] = [
        (A1, A2),
        (A1, A2Dag),
        (A1Dag, A2),
        (A1Dag, A2Dag),
        (A2, A1),
        (A2, A1Dag),
        (A2Dag, A1),
        (A2Dag, A1Dag),
    ];
    ORDER
        .iter()
        .zip(mask)
        .map(|(&(i, j), m)| if m == 0 { rates.get(i, j) } else { -rates.get(i, j) })
        .sum::<f64>()
        / 2.0
}

fn realify<const R: usize, const C: usize>(
    m: &SMatrix<Complex64, R, C>,
    err: impl Fn(f64) -> Error,
) -> Result<SMatrix<f64, R, C>> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-10 * scale {
        return Err(err(imag));
    }
    Ok(m.map(|z| z.re))
}

pub fn build_g(rates: &RateTable) -> Result<Vector10> {
    use Ladder::*;
    let g = |i, j| Complex64::new(rates.get(i, j), 0.0);
    let i = Complex64::i();
    let v = SVector::<Complex64, 10>::from([
        g(A1, A1) + g(A1, A1Dag) + g(A1Dag, A1) + g(A1Dag, A1Dag),
        i * 2.0 * g(A1, A1) - i * 2.0 * g(A1Dag, A1Dag),
        g(A1, A2) + g(A1, A2Dag) + g(A1Dag, A2) + g(A1Dag, A2Dag) + g(A2, A1) + g(A2, A1Dag) + g(A2Dag, A1) + g(A2Dag, A1Dag),
        i * (g(A1, A2) - g(A1, A2Dag) + g(A1Dag, A2) - g(A1Dag, A2Dag) + g(A2, A1) + g(A2, A1Dag) - g(A2Dag, A1) - g(A2Dag, A1Dag)),
        -g(A1, A1) + g(A1, A1Dag) + g(A1Dag, A1) - g(A1Dag, A1Dag),
        i * (g(A1, A2) + g(A1, A2Dag) - g(A1Dag, A2) - g(A1Dag, A2Dag) + g(A2, A1) - g(A2, A1Dag) + g(A2Dag, A1) - g(A2Dag, A1Dag)),
        -g(A1, A2) + g(A1, A2Dag) + g(A1Dag, A2) - g(A1Dag, A2Dag) - g(A2, A1) + g(A2, A1Dag) + g(A2Dag, A1) - g(A2Dag, A1Dag),
        g(A2, A2) + g(A2, A2Dag) + g(A2Dag, A2) + g(A2Dag, A2Dag),
        i * 2.0 * (g(A2, A2) - g(A2Dag, A2Dag)),
        -g(A2, A2) + g(A2, A2Dag) + g(A2Dag, A2) - g(A2Dag, A2Dag),
    ]);
    realify(&v, |imag| Error::NonRealG { imag })
}

/// Rows of Λ. Hamiltonian entries (ω_j, κ ± λ) enter with twice the weight of
/// the row layout's dissipative entries; see the math-to-code map in the README.
pub fn build_lambda(rates: &RateTable, model: &ModelParams) -> Result<Matrix10> {
    use Ladder::*;
    let c = |x: f64| Complex64::new(x, 0.0);
    let i = Complex64::i();
    let (w1, w2) = (c(2.0 * model.omega1()), c(2.0 * model.omega2()));
    let (lam, kap) = (2.0 * model.lambda(), 2.0 * model.kappa());
    let sum = c(kap + lam);
    let diff = c(lam - kap);
    let d1 = c(rates.get(A1, A1Dag) - rates.get(A1Dag, A1));
    let d2 = c(rates.get(A2, A2Dag) - rates.get(A2Dag, A2));
    let d12 = d1 + d2;
    let p = c(masked(rates, [1, 0, 1, 0, 0, 0, 1, 1]));
    let q = c(masked(rates, [0, 0, 1, 1, 1, 0, 1, 0]));
    let x = c(masked(rates, [1, 1, 1, 1, 0, 0, 0, 0]));
    let y = c(masked(rates, [1, 0, 0, 1, 0, 1, 1, 0]));
    let z = c(masked(rates, [0, 0, 0, 0, 1, 1, 1, 1]));
    let v = c(masked(rates, [0, 1, 1, 0, 1, 0, 0, 1]));
    let o = c(0.0);
    #[rustfmt::skip]
    let rows: [[Complex64; 10]; 10] = [
        [d1, -w1, p, -i * x - sum, o, o, o, o, o, o],
        [w1, d1 * 2.0, i * y + diff, q, -w1, p, i * x - sum, o, o, o],
        [q, i * z - sum, d12, -w2, o, -w1, o, p, i * x - sum, o],
        [diff + i * v, p, w2, d12, o, o, -w1, o, p, -sum + i * x],
        [o, w1, o, o, d1, diff + i * y, q, o, o, o],
        [o, q, w1, o, i * z - sum, d12, -w2, i * y + diff, q, o],
        [o, i * v + diff, o, w1, p, w2, d12, o, i * y + diff, q],
        [o, o, q, o, o, i * z - sum, o, d2, -w2, o],
        [o, o, i * v + diff, q, o, p, i * z - sum, w2, d2 * 2.0, -w2],
        [o, o, o, i * v + diff, o, o, p, o, w2, d2],
    ];
    let m = SMatrix::<Complex64, 10, 10>::from_fn(|r, col| rows[r][col]);
    realify(&m, |imag| Error::NonRealLambda { imag })
}

fn one_norm(m: &Matrix10) -> f64 {
    m.column_iter().map(|col| col.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn solve_steady_covariance(model: &ModelParams, rates: &RateTable) -> Result<SteadyStateSolution> {
    let g = build_g(rates)?;
    let lambda = build_lambda(rates, model)?;
    let lu = lambda.lu();
    let inverse = lu.try_inverse().ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
    let condition = one_norm(&lambda) * one_norm(&inverse);
    if model.lambda() > (1.0 - CRITICAL_MARGIN) * model.critical_coupling() || !condition.is_finite() {
        return Err(Error::SingularSystem { condition });
    }
    let mut sigma = lu.solve(&g).ok_or(Error::SingularSystem { condition })?;
    let tolerance = 1e-9 * g.amax().max(1.0);
    let mut residual = (g - lambda * sigma).amax();
    if residual > tolerance {
        let correction = lu.solve(&(g - lambda * sigma)).ok_or(Error::SingularSystem { condition })?;
        sigma += correction;
        residual = (g - lambda * sigma).amax();
        if residual > tolerance {
            return Err(Error::SingularSystem { condition });
        }
    }
    let covariance = SymplecticMoments(sigma).to_covariance()?;
    let spectrum = symplectic_eigenvalues(&covariance)?;
    if spectrum.n_minus < 0.5 - 1e-9 {
        return Err(Error::UnphysicalCovariance { smallest: spectrum.n_minus });
    }
    Ok(SteadyStateSolution { covariance, scheme: rates.scheme, residual })
}

/// ⟨a_m†a_m⟩ = (σ_xx + σ_pp − 1)/2 for mode 1 or 2.
pub fn occupation_from_covariance(cov: &CovarianceMatrix, mode: usize) -> f64 {
    assert!(mode == 1 || mode == 2, "mode must be 1 or 2");
    let k = 2 * (mode - 1);
    let m = cov.matrix();
    (m[(k, k)] + m[(k + 1, k + 1)] - 1.0) / 2.0
}
