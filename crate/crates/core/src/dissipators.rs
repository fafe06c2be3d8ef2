//! Lindblad coefficients Γ(A_i, A_j) of the dissipator
//! Γ(A_i, A_j)(A_i ρ A_j − ½{A_j A_i, ρ}) for the four master-equation schemes.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{bose_occupation, normal_mode_frequencies, pp_bogoliubov, rw_rotation, CouplingKind, ModelParams};

/// Ladder operators in the order used by every 4×4 table: (a₁, a₂, a₁†, a₂†).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    A1 = 0,
    A2 = 1,
    A1Dag = 2,
    A2Dag = 3,
}

impl Ladder {
    pub const ALL: [Ladder; 4] = [Ladder::A1, Ladder::A2, Ladder::A1Dag, Ladder::A2Dag];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn adjoint(self) -> Ladder {
        Ladder::ALL[(self.index() + 2) % 4]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Local,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scheme {
    pub basis: Basis,
    pub kind: CouplingKind,
}

/// Magnitude convention for the global excitation-exchange rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateConvention {
    /// Decay γ, absorption γ e^{−βω}.
    Flat,
    /// Decay γ(N+1), absorption γN.
    #[default]
    Bose,
}

impl RateConvention {
    pub fn label(self) -> &'static str {
        match self {
            RateConvention::Flat => "flat",
            RateConvention::Bose => "bose",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTable {
    /// rates[i][j] = Γ(A_i, A_j) with indices from [`Ladder::index`].
    pub rates: [[f64; 4]; 4],
    pub scheme: Scheme,
}

impl RateTable {
    pub fn zeros(scheme: Scheme) -> Self {
        RateTable { rates: [[0.0; 4]; 4], scheme }
    }

    pub fn get(&self, i: Ladder, j: Ladder) -> f64 {
        self.rates[i.index()][j.index()]
    }

    fn set(&mut self, i: Ladder, j: Ladder, value: f64) {
        self.rates[i.index()][j.index()] = value;
    }
}

pub fn local_rates(model: &ModelParams) -> Result<RateTable> {
    let mut table = RateTable::zeros(Scheme { basis: Basis::Local, kind: model.kind() });
    let n1 = bose_occupation(model.omega1(), model.beta1())?;
    let n2 = bose_occupation(model.omega2(), model.beta2())?;
    table.set(Ladder::A1, Ladder::A1Dag, model.gamma1() * (n1 + 1.0));
    table.set(Ladder::A1Dag, Ladder::A1, model.gamma1() * n1);
    table.set(Ladder::A2, Ladder::A2Dag, model.gamma2() * (n2 + 1.0));
    table.set(Ladder::A2Dag, Ladder::A2, model.gamma2() * n2);
    Ok(table)
}

/// Emission and absorption rates of one bath at the two normal-mode frequencies.
struct BathRates {
    down_plus: f64,
    down_minus: f64,
    up_plus: f64,
    up_minus: f64,
}

fn bath_rates(gamma: f64, beta: f64, plus: f64, minus: f64, convention: RateConvention) -> Result<BathRates> {
    Ok(match convention {
        RateConvention::Flat => BathRates {
            down_plus: gamma,
            down_minus: gamma,
            up_plus: gamma * (-beta * plus).exp(),
            up_minus: gamma * (-beta * minus).exp(),
        },
        RateConvention::Bose => {
            let np = bose_occupation(plus, beta)?;
            let nm = bose_occupation(minus, beta)?;
            BathRates {
                down_plus: gamma * (np + 1.0),
                down_minus: gamma * (nm + 1.0),
                up_plus: gamma * np,
                up_minus: gamma * nm,
            }
        }
    })
}

pub fn global_rw_rates(model: &ModelParams, convention: RateConvention) -> Result<RateTable> {
    let rot = rw_rotation(model)?;
    let modes = normal_mode_frequencies(model)?;
    let b1 = bath_rates(model.gamma1(), model.beta1(), modes.plus, modes.minus, convention)?;
    let b2 = bath_rates(model.gamma2(), model.beta2(), modes.plus, modes.minus, convention)?;
    let (c, s) = (rot.c, rot.s);
    let (c2, s2) = (c * c, s * s);
    let (c4, s4, cs) = (c2 * c2, s2 * s2, c2 * s2);

    let mut table = RateTable::zeros(Scheme { basis: Basis::Global, kind: model.kind() });
    use Ladder::*;
    table.set(A1, A1Dag, b1.down_plus * c4 + b1.down_minus * s4 + (b2.down_plus + b2.down_minus) * cs);
    table.set(A1Dag, A1, b1.up_plus * c4 + b1.up_minus * s4 + (b2.up_plus + b2.up_minus) * cs);
    // d₋ = c a₂ − s a₁ carries the minus-mode rates of bath 2 with weight c⁴
    table.set(A2, A2Dag, b2.down_minus * c4 + b2.down_plus * s4 + (b1.down_plus + b1.down_minus) * cs);
    table.set(A2Dag, A2, b2.up_minus * c4 + b2.up_plus * s4 + (b1.up_plus + b1.up_minus) * cs);
    let cross_down = (b1.down_plus * c2 - b1.down_minus * s2 + b2.down_plus * s2 - b2.down_minus * c2) * c * s;
    let cross_up = (b1.up_plus * c2 - b1.up_minus * s2 + b2.up_plus * s2 - b2.up_minus * c2) * c * s;
    table.set(A1, A2Dag, cross_down);
    table.set(A2, A1Dag, cross_down);
    table.set(A1Dag, A2, cross_up);
    table.set(A2Dag, A1, cross_up);
    Ok(table)
}

pub fn global_pp_rates(model: &ModelParams) -> Result<RateTable> {
    let transform = pp_bogoliubov(model)?;
    let modes = normal_mode_frequencies(model)?;
    let (s, w) = (transform.s, transform.w);
    let mut table = RateTable::zeros(Scheme { basis: Basis::Global, kind: model.kind() });
    // bath j couples through x_j ∝ a_j + a_j†: rows (j, j+2) of S
    let baths = [(model.gamma1(), model.beta1(), 0usize, 2usize), (model.gamma2(), model.beta2(), 1, 3)];
    for (gamma, beta, k0, l0) in baths {
        let np = bose_occupation(modes.plus, beta)?;
        let nm = bose_occupation(modes.minus, beta)?;
        for (k, l) in [(k0, l0), (l0, k0)] {
            let weight_plus = s[(k, 0)] * s[(l, 2)];
            let weight_minus = s[(k, 1)] * s[(l, 3)];
            for i in 0..4 {
                for j in 0..4 {
                    table.rates[i][j] += gamma
                        * ((np + 1.0) * weight_plus * w[(0, i)] * w[(2, j)]
                            + (nm + 1.0) * weight_minus * w[(1, i)] * w[(3, j)]
                            + np * weight_plus * w[(2, i)] * w[(0, j)]
                            + nm * weight_minus * w[(3, i)] * w[(1, j)]);
                }
            }
        }
    }
    Ok(table)
}

/// Rate table for `basis` with the coupling kind taken from the model.
pub fn rates_for(model: &ModelParams, basis: Basis, convention: RateConvention) -> Result<RateTable> {
    match (basis, model.kind()) {
        (Basis::Local, _) => local_rates(model),
        (Basis::Global, CouplingKind::RotatingWave) => global_rw_rates(model, convention),
        (Basis::Global, CouplingKind::PositionPosition) => global_pp_rates(model),
    }
}
