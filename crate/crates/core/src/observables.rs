//! Quantities derived from a two-mode Gaussian covariance matrix.

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
pub use crate::lindblad_steady::occupation_from_covariance;
use crate::lindblad_steady::CovarianceMatrix;

const RADICAND_SLACK: f64 = 1e-12;
const PHYSICAL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    pub n_minus: f64,
    pub n_plus: f64,
}

struct Blocks {
    first: Matrix2<f64>,
    second: Matrix2<f64>,
    cross: Matrix2<f64>,
}

fn blocks(cov: &CovarianceMatrix) -> Blocks {
    let m = cov.matrix();
    Blocks {
        first: m.fixed_view::<2, 2>(0, 0).into_owned(),
        second: m.fixed_view::<2, 2>(2, 2).into_owned(),
        cross: m.fixed_view::<2, 2>(0, 2).into_owned(),
    }
}

fn clamped_sqrt(x: f64, scale: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(x.sqrt())
    } else if x >= -RADICAND_SLACK * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::UnphysicalCovariance { smallest: f64::NAN })
    }
}

pub fn symplectic_eigenvalues(cov: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let b = blocks(cov);
    let delta = b.first.determinant() + b.second.determinant() + 2.0 * b.cross.determinant();
    let det = cov.matrix().determinant();
    let radicand = delta * delta - 4.0 * det;
    let (n_minus, n_plus) = if radicand < 1e-6 * delta * delta {
        // nearly degenerate pair: the square root amplifies roundoff, so use the spectrum of Ωσ
        degenerate_pair(cov)
    } else {
        let disc = clamped_sqrt(radicand, delta * delta)?;
        let plus2 = 0.5 * (delta + disc);
        // product of the two squared eigenvalues is det σ; avoids cancellation in Δ − √(…)
        let minus2 = det / plus2;
        (clamped_sqrt(minus2, delta.abs())?, clamped_sqrt(plus2, delta.abs())?)
    };
    if !(n_minus >= 0.5 - PHYSICAL_SLACK) {
        return Err(Error::UnphysicalCovariance { smallest: n_minus });
    }
    Ok(SymplecticSpectrum { n_minus, n_plus })
}

fn degenerate_pair(cov: &CovarianceMatrix) -> (f64, f64) {
    let mut omega = Matrix4::zeros();
    omega[(0, 1)] = 1.0;
    omega[(1, 0)] = -1.0;
    omega[(2, 3)] = 1.0;
    omega[(3, 2)] = -1.0;
    let mut freqs: Vec<f64> = (omega * cov.matrix()).complex_eigenvalues().iter().map(|z| z.norm()).collect();
    freqs.sort_by(f64::total_cmp);
    (0.5 * (freqs[0] + freqs[1]), 0.5 * (freqs[2] + freqs[3]))
}

/// (x+½)ln(x+½) − (x−½)ln(x−½), the entropy of a thermal mode with symplectic eigenvalue x.
pub fn entropy_term(x: f64) -> f64 {
    let eps = x - 0.5;
    if eps <= 0.0 {
        return 0.0;
    }
    if eps < 1e-8 {
        // (1+ε)ln(1+ε) ≈ ε and ε ln ε dominates the second term
        return eps - eps * eps.ln();
    }
    (x + 0.5) * (x + 0.5).ln() - eps * eps.ln()
}

pub fn gaussian_mutual_information(cov: &CovarianceMatrix) -> Result<f64> {
    let spectrum = symplectic_eigenvalues(cov)?;
    let b = blocks(cov);
    if b.cross.iter().all(|x| *x == 0.0) {
        return Ok(0.0);
    }
    let a = clamped_sqrt(b.first.determinant(), 1.0)?;
    let c = clamped_sqrt(b.second.determinant(), 1.0)?;
    let info = entropy_term(a) + entropy_term(c) - entropy_term(spectrum.n_minus) - entropy_term(spectrum.n_plus);
    if info < -PHYSICAL_SLACK {
        return Err(Error::UnphysicalCovariance { smallest: spectrum.n_minus });
    }
    Ok(info.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector4;
    use proptest::prelude::*;

    fn cov(m: Matrix4<f64>) -> CovarianceMatrix {
        CovarianceMatrix::new(m).unwrap()
    }

    #[test]
    fn simple_spectra() {
        let s = symplectic_eigenvalues(&CovarianceMatrix::vacuum()).unwrap();
        assert_relative_eq!(s.n_minus, 0.5, epsilon = 1e-14);
        assert_relative_eq!(s.n_plus, 0.5, epsilon = 1e-14);
        let (a, b) = (7.3, 2.1);
        let s = symplectic_eigenvalues(&cov(Matrix4::from_diagonal(&Vector4::new(a, a, b, b)))).unwrap();
        assert_relative_eq!(s.n_minus, b, max_relative = 1e-12);
        assert_relative_eq!(s.n_plus, a, max_relative = 1e-12);
        let bad = cov(Matrix4::from_diagonal(&Vector4::new(0.3, 0.3, 1.0, 1.0)));
        assert!(matches!(symplectic_eigenvalues(&bad), Err(Error::UnphysicalCovariance { .. })));
    }

    #[test]
    fn entropy_term_values() {
        assert_relative_eq!(entropy_term(1.5), 2.0 * 2f64.ln(), max_relative = 1e-14);
        assert_eq!(entropy_term(0.5), 0.0);
        let mut prev = 0.0;
        for k in 1..2000 {
            let x = 0.5 + k as f64 * 1e-3;
            let f = entropy_term(x);
            assert!(f > prev);
            prev = f;
        }
        // continuity across the series switch
        let below = entropy_term(0.5 + 0.999e-8);
        let above = entropy_term(0.5 + 1.001e-8);
        assert!((above - below).abs() < 1e-9);
    }

    #[test]
    fn product_state_has_no_information() {
        let m = Matrix4::from_diagonal(&Vector4::new(3.0, 3.0, 1.2, 1.2));
        assert_eq!(gaussian_mutual_information(&cov(m)).unwrap(), 0.0);
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        // pure state: I = 2 S(single mode) with symplectic eigenvalue cosh(2r)/2
        let r: f64 = 0.8;
        let (ch, sh) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        let mut m = Matrix4::from_diagonal(&Vector4::new(ch, ch, ch, ch));
        m[(0, 2)] = sh;
        m[(2, 0)] = sh;
        m[(1, 3)] = -sh;
        m[(3, 1)] = -sh;
        let c = cov(m);
        let s = symplectic_eigenvalues(&c).unwrap();
        assert_relative_eq!(s.n_minus, 0.5, epsilon = 1e-12);
        assert_relative_eq!(s.n_plus, 0.5, epsilon = 1e-12);
        assert_relative_eq!(gaussian_mutual_information(&c).unwrap(), 2.0 * entropy_term(ch), max_relative = 1e-10);
    }

    /// Random physical state: S · diag(n₁,n₁,n₂,n₂) · Sᵀ with S a product of
    /// single- and two-mode symplectic maps.
    fn random_state(n1: f64, n2: f64, r1: f64, r2: f64, r12: f64, phi: f64, theta: f64) -> Matrix4<f64> {
        let squeeze = Matrix4::from_diagonal(&Vector4::new(r1.exp(), (-r1).exp(), r2.exp(), (-r2).exp()));
        let (s, c) = phi.sin_cos();
        let rot = Matrix4::new(c, -s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, c, s, 0.0, 0.0, -s, c);
        let (ch, sh) = (r12.cosh(), r12.sinh());
        let tms = Matrix4::new(ch, 0.0, sh, 0.0, 0.0, ch, 0.0, -sh, sh, 0.0, ch, 0.0, 0.0, -sh, 0.0, ch);
        let (bs, bc) = theta.sin_cos();
        let splitter = Matrix4::new(bc, 0.0, bs, 0.0, 0.0, bc, 0.0, bs, -bs, 0.0, bc, 0.0, 0.0, -bs, 0.0, bc);
        let total = splitter * tms * rot * squeeze;
        total * Matrix4::from_diagonal(&Vector4::new(n1, n1, n2, n2)) * total.transpose()
    }

    proptest! {
        #[test]
        fn spectrum_matches_eigen_oracle(
            n1 in 0.5f64..30.0, n2 in 0.5f64..30.0, r1 in -1.0f64..1.0, r2 in -1.0f64..1.0,
            r12 in -1.0f64..1.0, phi in 0.0f64..6.3, theta in 0.0f64..6.3,
        ) {
            let m = random_state(n1, n2, r1, r2, r12, phi, theta);
            let s = symplectic_eigenvalues(&cov(m)).unwrap();
            // eigenvalues of iΩσ are ±n_k
            let mut omega = Matrix4::zeros();
            omega[(0, 1)] = 1.0;
            omega[(1, 0)] = -1.0;
            omega[(2, 3)] = 1.0;
            omega[(3, 2)] = -1.0;
            let mut ev: Vec<f64> = (omega * m).complex_eigenvalues().iter().map(|z| z.im.abs()).collect();
            ev.sort_by(f64::total_cmp);
            let (lo, hi) = (n1.min(n2), n1.max(n2));
            prop_assert!((s.n_minus - lo).abs() <= 1e-10 * hi);
            prop_assert!((s.n_plus - hi).abs() <= 1e-10 * hi);
            prop_assert!((ev[0] - s.n_minus).abs() <= 1e-10 * hi);
            prop_assert!((ev[3] - s.n_plus).abs() <= 1e-10 * hi);
        }

        #[test]
        fn information_nonnegative(
            n1 in 0.5f64..30.0, n2 in 0.5f64..30.0, r1 in -1.0f64..1.0, r2 in -1.0f64..1.0,
            r12 in -1.0f64..1.0, phi in 0.0f64..6.3, theta in 0.0f64..6.3,
        ) {
            let m = random_state(n1, n2, r1, r2, r12, phi, theta);
            let info = gaussian_mutual_information(&cov(m)).unwrap();
            prop_assert!(info >= 0.0);
            let cross = m.fixed_view::<2, 2>(0, 2).abs().max();
            if info <= 1e-12 {
                prop_assert!(cross < 1e-4 * m.abs().max());
            }
        }

        #[test]
        fn product_states_exactly_zero(n1 in 0.5f64..30.0, n2 in 0.5f64..30.0, r1 in -1.0f64..1.0, r2 in -1.0f64..1.0) {
            let m = random_state(n1, n2, r1, r2, 0.0, 0.3, 0.0);
            prop_assert_eq!(gaussian_mutual_information(&cov(m)).unwrap(), 0.0);
        }
    }
}
