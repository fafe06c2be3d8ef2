//! Low-temperature comparison of the moment solver against the Fock-space oracle.

use twobath::dissipators::{rates_for, Basis, RateConvention};
use twobath::fock_oracle::converged_occupations;
use twobath::lindblad_steady::{occupation_from_covariance, solve_steady_covariance};
use twobath::model::{critical_coupling, CouplingKind, ModelParams, RawParams};
use twobath::Result;

use crate::config::LOW_TEMPERATURE;

pub const ORACLE_TAIL_TOL: f64 = 1e-10;
pub const AGREEMENT_TOL: f64 = 1e-6;
const START_CUTOFF: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub kind: CouplingKind,
    pub basis: Basis,
    pub lambda_frac: f64,
    pub delta_t: f64,
    pub n_max: usize,
    pub tail: f64,
    /// (moment solver, oracle) for modes 1 and 2
    pub occupations: [(f64, f64); 2],
}

impl OracleComparison {
    pub fn worst_relative_difference(&self) -> f64 {
        self.occupations.iter().map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.worst_relative_difference() <= AGREEMENT_TOL && self.tail <= ORACLE_TAIL_TOL
    }
}

/// T₂ = 1.96, T₁ = T₂ − ΔT, the rest as in the figure presets.
pub fn low_temperature_model(kind: CouplingKind, lambda_frac: f64, delta_t: f64) -> Result<ModelParams> {
    ModelParams::new(RawParams {
        omega1: 5.0,
        omega2: 2.0,
        lambda: lambda_frac * critical_coupling(kind, 5.0, 2.0),
        kind,
        gamma1: 1.5e-4,
        gamma2: 1.5e-4,
        t1: LOW_TEMPERATURE - delta_t,
        t2: LOW_TEMPERATURE,
    })
}

pub fn compare_with_oracle(model: &ModelParams, basis: Basis, convention: RateConvention) -> Result<OracleComparison> {
    let rates = rates_for(model, basis, convention)?;
    let moments = solve_steady_covariance(model, &rates)?;
    let (oracle, trunc) = converged_occupations(model, &rates, ORACLE_TAIL_TOL, START_CUTOFF)?;
    Ok(OracleComparison {
        kind: model.kind(),
        basis,
        lambda_frac: model.lambda() / model.critical_coupling(),
        delta_t: model.t2() - model.t1(),
        n_max: trunc.n_max(),
        tail: oracle.tail,
        occupations: [
            (occupation_from_covariance(&moments.covariance, 1), oracle.n1),
            (occupation_from_covariance(&moments.covariance, 2), oracle.n2),
        ],
    })
}

/// Both kinds, both bases, λ/λ_c ∈ {0.2, 0.5}, ΔT ∈ {0, 0.5}; run one at a time to bound memory.
pub fn low_temperature_suite(convention: RateConvention) -> Vec<(String, Result<OracleComparison>)> {
    let mut out = Vec::new();
    for kind in [CouplingKind::PositionPosition, CouplingKind::RotatingWave] {
        for basis in [Basis::Local, Basis::Global] {
            for lambda_frac in [0.2, 0.5] {
                for delta_t in [0.0, 0.5] {
                    let label = format!("{} {:?} lambda/lc={lambda_frac} dT={delta_t}", kind.label(), basis);
                    let result = low_temperature_model(kind, lambda_frac, delta_t).and_then(|m| compare_with_oracle(&m, basis, convention));
                    out.push((label, result));
                }
            }
        }
    }
    out
}
