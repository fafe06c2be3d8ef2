//! Thermal state of the coupled Hamiltonian at one temperature, built from
//! independent normal modes.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lindblad_steady::{occupation_from_covariance, CovarianceMatrix};
use crate::model::{bose_occupation, normal_mode_frequencies, pp_bogoliubov, rw_rotation, CouplingKind, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsSpec {
    /// Bath temperatures of the model are ignored.
    pub model: ModelParams,
    pub temperature: f64,
}

impl GibbsSpec {
    pub fn new(model: ModelParams, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::NonPositiveParameter { name: "temperature", value: temperature });
        }
        Ok(GibbsSpec { model, temperature })
    }
}

/// Matrix taking (c₊, c₋, c₊†, c₋†) to (a₁, a₂, a₁†, a₂†).
fn mode_transform(model: &ModelParams) -> Result<Matrix4<f64>> {
    match model.kind() {
        CouplingKind::PositionPosition => Ok(pp_bogoliubov(model)?.s),
        CouplingKind::RotatingWave => {
            // the rotation has rows (d₊, d₋); its transpose maps modes back to a₁, a₂
            let r = rw_rotation(model)?.matrix().transpose();
            let mut s = Matrix4::zeros();
            s.fixed_view_mut::<2, 2>(0, 0).copy_from(&r);
            s.fixed_view_mut::<2, 2>(2, 2).copy_from(&r);
            Ok(s)
        }
    }
}

pub fn gibbs_second_moments(spec: &GibbsSpec) -> Result<CovarianceMatrix> {
    let modes = normal_mode_frequencies(&spec.model)?;
    let beta = 1.0 / spec.temperature;
    let np = bose_occupation(modes.plus, beta)?;
    let nm = bose_occupation(modes.minus, beta)?;
    // ⟨C_k C_l⟩ for C = (c₊, c₋, c₊†, c₋†): only ⟨cc†⟩ = N+1 and ⟨c†c⟩ = N survive
    let mut mode_moments = Matrix4::<f64>::zeros();
    mode_moments[(0, 2)] = np + 1.0;
    mode_moments[(2, 0)] = np;
    mode_moments[(1, 3)] = nm + 1.0;
    mode_moments[(3, 1)] = nm;
    let s = mode_transform(&spec.model)?;
    let ladder = (s * mode_moments * s.transpose()).map(|x| Complex64::new(x, 0.0));
    CovarianceMatrix::from_ladder_moments(&ladder)
}

pub fn gibbs_occupation(spec: &GibbsSpec, mode: usize) -> Result<f64> {
    Ok(occupation_from_covariance(&gibbs_second_moments(spec)?, mode))
}
