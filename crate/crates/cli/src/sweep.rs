//! Evaluation of every (kind, method, ΔT, λ, observable) combination of a config.

use rayon::prelude::*;
use twobath::dissipators::{rates_for, Basis};
use twobath::gibbs::{gibbs_second_moments, GibbsSpec};
use twobath::langevin::steady_second_moments;
use twobath::lindblad_steady::{occupation_from_covariance, solve_steady_covariance, CovarianceMatrix};
use twobath::model::{critical_coupling, CouplingKind, ModelParams, RawParams};
use twobath::observables::gaussian_mutual_information;
use twobath::{Error, Result};

use crate::config::{Method, Observable, SweepConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    NotApplicable,
    Failed(&'static str),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NotApplicable => "not_applicable",
            Status::Failed(code) => code,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kind: CouplingKind,
    pub method: Method,
    pub lambda_frac: f64,
    pub lambda: f64,
    pub t1: f64,
    pub t2: f64,
    pub delta_t: f64,
    pub observable: Observable,
    pub value: Option<f64>,
    pub ratio_to_langevin: Option<f64>,
    pub status: Status,
    /// Max-norm residual of the moment equations (master-equation methods).
    pub diag_residual: Option<f64>,
    /// Largest quadrature error estimate (Langevin).
    pub diag_quad_error: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    kind: CouplingKind,
    delta_t: f64,
    lambda_frac: f64,
}

struct MethodResult {
    covariance: Result<CovarianceMatrix>,
    residual: Option<f64>,
    quad_error: Option<f64>,
}

fn observe(cov: &CovarianceMatrix, obs: Observable) -> Result<f64> {
    match obs {
        Observable::Occupation1 => Ok(occupation_from_covariance(cov, 1)),
        Observable::Occupation2 => Ok(occupation_from_covariance(cov, 2)),
        Observable::MutualInformation => gaussian_mutual_information(cov),
    }
}

fn evaluate(cfg: &SweepConfig, model: &ModelParams, method: Method) -> MethodResult {
    let from_me = |basis| match rates_for(model, basis, cfg.rate_convention).and_then(|r| solve_steady_covariance(model, &r)) {
        Ok(sol) => MethodResult { covariance: Ok(sol.covariance), residual: Some(sol.residual), quad_error: None },
        Err(e) => MethodResult { covariance: Err(e), residual: None, quad_error: None },
    };
    match method {
        Method::LocalME => from_me(Basis::Local),
        Method::GlobalME => from_me(Basis::Global),
        Method::Langevin => match steady_second_moments(model, &cfg.quadrature) {
            Ok(sol) => MethodResult { covariance: Ok(sol.covariance), residual: None, quad_error: Some(sol.quad_error) },
            Err(e) => MethodResult { covariance: Err(e), residual: None, quad_error: None },
        },
        Method::Gibbs => MethodResult {
            covariance: GibbsSpec::new(*model, model.t1()).and_then(|spec| gibbs_second_moments(&spec)),
            residual: None,
            quad_error: None,
        },
    }
}

fn evaluate_point(cfg: &SweepConfig, p: GridPoint) -> Vec<SweepRow> {
    let (t1, t2) = cfg.temperature_anchor.temperatures(&cfg.base, p.delta_t);
    let lambda = p.lambda_frac * critical_coupling(p.kind, cfg.base.omega1, cfg.base.omega2);
    let model = ModelParams::new(RawParams {
        omega1: cfg.base.omega1,
        omega2: cfg.base.omega2,
        lambda,
        kind: p.kind,
        gamma1: cfg.base.gamma1,
        gamma2: cfg.base.gamma2,
        t1,
        t2,
    });
    let results: Vec<(Method, Option<MethodResult>)> = cfg
        .methods
        .iter()
        .map(|&m| {
            let result = match &model {
                Err(e) => Some(MethodResult { covariance: Err(e.clone()), residual: None, quad_error: None }),
                // the Gibbs state needs a single temperature
                Ok(_) if m == Method::Gibbs && t1 != t2 => None,
                Ok(model) => Some(evaluate(cfg, model, m)),
            };
            (m, result)
        })
        .collect();
    let langevin = results.iter().find(|(m, _)| *m == Method::Langevin).and_then(|(_, r)| r.as_ref());

    let mut rows = Vec::new();
    for (method, result) in &results {
        for &obs in &cfg.observables {
            let mut row = SweepRow {
                kind: p.kind,
                method: *method,
                lambda_frac: p.lambda_frac,
                lambda,
                t1,
                t2,
                delta_t: p.delta_t,
                observable: obs,
                value: None,
                ratio_to_langevin: None,
                status: Status::NotApplicable,
                diag_residual: None,
                diag_quad_error: None,
            };
            if let Some(r) = result {
                row.diag_residual = r.residual;
                row.diag_quad_error = r.quad_error;
                match r.covariance.as_ref().map_err(Clone::clone).and_then(|c| observe(c, obs)) {
                    Ok(v) => {
                        row.value = Some(v);
                        row.status = Status::Ok;
                        let reference = langevin.and_then(|l| l.covariance.as_ref().ok()).and_then(|c| observe(c, obs).ok());
                        row.ratio_to_langevin = reference.map(|l| v / l);
                    }
                    Err(e) => row.status = Status::Failed(e.code()),
                }
            }
            rows.push(row);
        }
    }
    rows
}

/// Rows ordered by (kind, method, ΔT, λ, observable), each key in config order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let points: Vec<GridPoint> = cfg
        .kind
        .iter()
        .flat_map(|&kind| {
            cfg.delta_t_list
                .iter()
                .flat_map(move |&delta_t| cfg.lambda_grid.iter().map(move |&lambda_frac| GridPoint { kind, delta_t, lambda_frac }))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::ConfigInvalid(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let per_point: Vec<Vec<SweepRow>> = pool.install(|| points.par_iter().map(|&p| evaluate_point(cfg, p)).collect());

    let rank = |xs: &[f64], x: f64| xs.iter().position(|y| y.to_bits() == x.to_bits()).unwrap_or(usize::MAX);
    let method_rank = |m: Method| cfg.methods.iter().position(|x| *x == m).unwrap_or(usize::MAX);
    let kind_rank = |k: CouplingKind| cfg.kind.iter().position(|x| *x == k).unwrap_or(usize::MAX);
    let obs_rank = |o: Observable| cfg.observables.iter().position(|x| *x == o).unwrap_or(usize::MAX);
    let mut rows: Vec<SweepRow> = per_point.into_iter().flatten().collect();
    rows.sort_by_key(|r| {
        (
            kind_rank(r.kind),
            method_rank(r.method),
            rank(&cfg.delta_t_list, r.delta_t),
            rank(&cfg.lambda_grid, r.lambda_frac),
            obs_rank(r.observable),
        )
    });
    Ok(rows)
}
