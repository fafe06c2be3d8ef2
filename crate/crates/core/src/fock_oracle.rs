//! Brute-force steady state of the full master equation in a truncated two-mode
//! number basis. Shares nothing with the covariance machinery beyond the rate table.
//!
//! The density matrix is kept block diagonal in a conserved charge (total number
//! for rotating-wave coupling, number parity otherwise). The null vector is found
//! with restarted GMRES. The preconditioner works in the eigenbasis of
//! K = −iH − ½ Σ Γ_ij A_j A_i: coherences are divided by μ_i + μ̄_j, and the
//! populations, which the jumps couple on the slow time scale, get a dense solve.

use faer::linalg::solvers::{DenseSolveCore, PartialPivLu, Solve};
use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;

use crate::dissipators::{Ladder, RateTable};
use crate::error::{Error, Result};
use crate::model::{CouplingKind, ModelParams};

pub const DEFAULT_DIMENSION_CAP: usize = 4096;
const GMRES_TOL: f64 = 1e-13;
const GMRES_RESTART: usize = 40;
const GMRES_MAX_ITER: usize = 2000;
const RICHARDSON_MAX_ITER: usize = 500;
const UNIQUENESS_TOL: f64 = 1e-10;
const HERMITICITY_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    n_max: usize,
    tail_tol: f64,
    dimension_cap: usize,
}

impl TruncationSpec {
    pub fn new(n_max: usize, tail_tol: f64) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::ConfigInvalid(format!("n_max must be at least 2, got {n_max}")));
        }
        if !(tail_tol > 0.0 && tail_tol <= 1e-4) {
            return Err(Error::ConfigInvalid(format!("tail_tol must lie in (0, 1e-4], got {tail_tol}")));
        }
        Ok(TruncationSpec { n_max, tail_tol, dimension_cap: DEFAULT_DIMENSION_CAP })
    }

    /// Largest allowed two-mode Hilbert-space dimension (n_max+1)².
    pub fn with_dimension_cap(self, cap: usize) -> Self {
        TruncationSpec { dimension_cap: cap, ..self }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn dimension(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }
}

/// A truncated ladder operator: at most one nonzero per row and per column.
#[derive(Debug, Clone)]
struct LadderMap {
    /// row m → (column, value)
    by_row: Vec<Option<(usize, f64)>>,
    /// column n → (row, value)
    by_col: Vec<Option<(usize, f64)>>,
}

impl LadderMap {
    fn new(dim: usize, entries: impl Iterator<Item = (usize, usize, f64)>) -> Self {
        let mut by_row = vec![None; dim];
        let mut by_col = vec![None; dim];
        for (r, c, v) in entries {
            by_row[r] = Some((c, v));
            by_col[c] = Some((r, v));
        }
        LadderMap { by_row, by_col }
    }
}

/// Index of |n₁, n₂⟩ is n₁·(n_max+1) + n₂.
fn occupations_of(index: usize, d: usize) -> (usize, usize) {
    (index / d, index % d)
}

fn ladder_maps(n_max: usize) -> [LadderMap; 4] {
    let d = n_max + 1;
    let dim = d * d;
    let lower = |mode: usize| {
        LadderMap::new(
            dim,
            (0..dim).filter_map(move |k| {
                let (n1, n2) = occupations_of(k, d);
                match mode {
                    1 if n1 > 0 => Some((k - d, k, (n1 as f64).sqrt())),
                    2 if n2 > 0 => Some((k - 1, k, (n2 as f64).sqrt())),
                    _ => None,
                }
            }),
        )
    };
    let raise = |m: &LadderMap| LadderMap { by_row: m.by_col.clone(), by_col: m.by_row.clone() };
    let (a1, a2) = (lower(1), lower(2));
    let (a1d, a2d) = (raise(&a1), raise(&a2));
    [a1, a2, a1d, a2d]
}

/// Dense product first·second for two ladder maps.
fn add_product(target: &mut Mat<C64>, first: &LadderMap, second: &LadderMap, scale: C64) {
    for (n, entry) in second.by_col.iter().enumerate() {
        if let Some((q, v2)) = *entry {
            if let Some((m, v1)) = first.by_col[q] {
                target[(m, n)] += scale * (v1 * v2);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    n_max: usize,
    ladders: [LadderMap; 4],
    /// (i, j, Γ_ij) for each nonzero rate
    jumps: Vec<(usize, usize, f64)>,
    /// K = −iH − ½ Σ Γ_ij A_j A_i; the right-hand factor is its entrywise conjugate
    drift: Mat<C64>,
    kind: CouplingKind,
}

pub fn build_generator(model: &ModelParams, rates: &RateTable, trunc: &TruncationSpec) -> Result<LindbladGenerator> {
    let dim = trunc.dimension();
    if dim > trunc.dimension_cap {
        return Err(Error::DimensionTooLarge { dim, limit: trunc.dimension_cap });
    }
    let ladders = ladder_maps(trunc.n_max);
    let [a1, a2, a1d, a2d] = &ladders;
    let mut hamiltonian = Mat::<C64>::zeros(dim, dim);
    let re = |x: f64| C64::new(x, 0.0);
    add_product(&mut hamiltonian, a1d, a1, re(model.omega1()));
    add_product(&mut hamiltonian, a2d, a2, re(model.omega2()));
    add_product(&mut hamiltonian, a1, a2d, re(model.lambda()));
    add_product(&mut hamiltonian, a1d, a2, re(model.lambda()));
    add_product(&mut hamiltonian, a1, a2, re(model.kappa()));
    add_product(&mut hamiltonian, a1d, a2d, re(model.kappa()));

    let mut drift = Mat::<C64>::from_fn(dim, dim, |r, c| hamiltonian[(r, c)] * C64::new(0.0, -1.0));
    let mut jumps = Vec::new();
    for i in Ladder::ALL {
        for j in Ladder::ALL {
            let g = rates.get(i, j);
            if g != 0.0 {
                jumps.push((i.index(), j.index(), g));
                add_product(&mut drift, &ladders[j.index()], &ladders[i.index()], re(-0.5 * g));
            }
        }
    }
    Ok(LindbladGenerator { n_max: trunc.n_max, ladders, jumps, drift, kind: model.kind() })
}

impl LindbladGenerator {
    pub fn dimension(&self) -> usize {
        self.drift.nrows()
    }

    /// Action of the generator on a full density matrix.
    pub fn apply(&self, rho: MatRef<'_, C64>) -> Mat<C64> {
        let dim = self.dimension();
        assert!(rho.nrows() == dim && rho.ncols() == dim, "density matrix has the wrong shape");
        let conj_drift = self.drift.as_ref().conjugate().to_owned();
        let mut out = &self.drift * rho + rho * &conj_drift;
        for &(i, j, g) in &self.jumps {
            let (left, right) = (&self.ladders[i], &self.ladders[j]);
            for n in 0..dim {
                let Some((q, vr)) = right.by_col[n] else { continue };
                for m in 0..dim {
                    if let Some((k, vl)) = left.by_row[m] {
                        out[(m, n)] += rho[(k, q)] * (g * vl * vr);
                    }
                }
            }
        }
        out
    }

    /// Column-major superoperator matrix; only for checks on tiny truncations.
    pub fn to_dense(&self) -> Result<Mat<C64>> {
        let dim = self.dimension();
        if dim > 64 {
            return Err(Error::DimensionTooLarge { dim, limit: 64 });
        }
        let mut sup = Mat::<C64>::zeros(dim * dim, dim * dim);
        let mut unit = Mat::<C64>::zeros(dim, dim);
        for col in 0..dim * dim {
            let (r, c) = (col % dim, col / dim);
            unit[(r, c)] = C64::new(1.0, 0.0);
            let image = self.apply(unit.as_ref());
            unit[(r, c)] = C64::new(0.0, 0.0);
            for j in 0..dim {
                for i in 0..dim {
                    sup[(i + dim * j, col)] = image[(i, j)];
                }
            }
        }
        Ok(sup)
    }
}

/// Partition of the basis into charge sectors; the steady state lives on the diagonal blocks.
struct Sectors {
    members: Vec<Vec<usize>>,
    sector: Vec<usize>,
    position: Vec<usize>,
    /// offset of each block in the flattened vector
    offsets: Vec<usize>,
    len: usize,
}

impl Sectors {
    fn new(gen: &LindbladGenerator) -> Self {
        let d = gen.n_max + 1;
        let dim = d * d;
        // the rotating-wave Hamiltonian conserves n₁+n₂; jump pairs must pair a raising with a lowering operator
        let number_conserving = gen.kind == CouplingKind::RotatingWave
            && gen.jumps.iter().all(|&(i, j, _)| (i < 2) != (j < 2));
        let charge = |k: usize| {
            let (n1, n2) = occupations_of(k, d);
            if number_conserving {
                n1 + n2
            } else {
                (n1 + n2) % 2
            }
        };
        let count = if number_conserving { 2 * d - 1 } else { 2 };
        let mut members = vec![Vec::new(); count];
        let mut sector = vec![0; dim];
        let mut position = vec![0; dim];
        for k in 0..dim {
            let c = charge(k);
            sector[k] = c;
            position[k] = members[c].len();
            members[c].push(k);
        }
        let mut offsets = Vec::with_capacity(count);
        let mut len = 0;
        for m in &members {
            offsets.push(len);
            len += m.len() * m.len();
        }
        Sectors { members, sector, position, offsets, len }
    }

    fn block<'a>(&self, x: &'a [C64], b: usize) -> MatRef<'a, C64> {
        let n = self.members[b].len();
        MatRef::from_column_major_slice(&x[self.offsets[b]..self.offsets[b] + n * n], n, n)
    }

    fn write_block(&self, out: &mut [C64], b: usize, m: MatRef<'_, C64>) {
        let n = self.members[b].len();
        let dst = &mut out[self.offsets[b]..self.offsets[b] + n * n];
        for j in 0..n {
            for i in 0..n {
                dst[i + n * j] = m[(i, j)];
            }
        }
    }

    /// Flattened indices of the diagonal entries ρ_kk.
    fn diagonal(&self) -> Vec<(usize, usize)> {
        (0..self.sector.len())
            .map(|k| {
                let (b, p) = (self.sector[k], self.position[k]);
                (k, self.offsets[b] + p + self.members[b].len() * p)
            })
            .collect()
    }
}

struct BlockDrift {
    drift: Mat<C64>,
    conj_drift: Mat<C64>,
    vecs: Mat<C64>,
    vecs_inv: Mat<C64>,
    vecs_conj: Mat<C64>,
    vecs_inv_conj: Mat<C64>,
    mu: Vec<C64>,
    /// 1/(μ_i + μ̄_j)
    inv_denominator: Mat<C64>,
    /// per ladder operator: (target block, V_t⁻¹ A V_s) for this block as source
    images: [Option<(usize, Mat<C64>)>; 4],
}

/// Generator restricted to the charge-diagonal blocks.
struct ReducedProblem<'a> {
    gen: &'a LindbladGenerator,
    sectors: Sectors,
    blocks: Vec<BlockDrift>,
}

impl<'a> ReducedProblem<'a> {
    fn new(gen: &'a LindbladGenerator) -> Result<Self> {
        let sectors = Sectors::new(gen);
        let mut blocks = Vec::with_capacity(sectors.members.len());
        for members in &sectors.members {
            let n = members.len();
            let drift = Mat::<C64>::from_fn(n, n, |i, j| gen.drift[(members[i], members[j])]);
            let evd = drift.eigen().map_err(|_| Error::SolverNonConvergence { residual: f64::INFINITY })?;
            let vecs = evd.U().to_owned();
            let mu: Vec<C64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
            let vecs_inv = vecs.partial_piv_lu().inverse();
            let floor = 1e-14 * mu.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let inv_denominator = Mat::<C64>::from_fn(n, n, |i, j| {
                let den = mu[i] + mu[j].conj();
                if den.norm() < floor {
                    C64::new(1.0 / floor, 0.0)
                } else {
                    den.inv()
                }
            });
            blocks.push(BlockDrift {
                conj_drift: drift.as_ref().conjugate().to_owned(),
                vecs_conj: vecs.as_ref().conjugate().to_owned(),
                vecs_inv_conj: vecs_inv.as_ref().conjugate().to_owned(),
                drift,
                vecs,
                vecs_inv,
                mu,
                inv_denominator,
                images: [None, None, None, None],
            });
        }
        for src in 0..blocks.len() {
            for a in 0..4 {
                blocks[src].images[a] = ladder_image(gen, &sectors, &blocks, src, a);
            }
        }
        Ok(ReducedProblem { gen, sectors, blocks })
    }

    /// Dense operator on the eigenbasis populations, including the border φ(x)u.
    fn coarse(&self, weights: &[f64]) -> Result<PartialPivLu<C64>> {
        let s = &self.sectors;
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut n = 0;
        for m in &s.members {
            offsets.push(n);
            n += m.len();
        }
        let mut c = Mat::<C64>::zeros(n, n);
        for (b, blk) in self.blocks.iter().enumerate() {
            for (l, mu) in blk.mu.iter().enumerate() {
                c[(offsets[b] + l, offsets[b] + l)] += mu + mu.conj();
            }
        }
        for &(i, j, g) in &self.gen.jumps {
            for (src, blk) in self.blocks.iter().enumerate() {
                let Some((dst, left)) = &blk.images[i] else { continue };
                let Some((back, right)) = &self.blocks[*dst].images[j] else { continue };
                if *back != src {
                    continue;
                }
                for l in 0..left.ncols() {
                    for k in 0..left.nrows() {
                        c[(offsets[*dst] + k, offsets[src] + l)] += left[(k, l)] * right[(l, k)].conj() * g;
                    }
                }
            }
        }
        let dim = s.sector.len() as f64;
        let mut phi = vec![C64::new(0.0, 0.0); n];
        let mut unit = vec![C64::new(0.0, 0.0); n];
        for (b, blk) in self.blocks.iter().enumerate() {
            let members = &s.members[b];
            for l in 0..members.len() {
                phi[offsets[b] + l] = members.iter().enumerate().map(|(p, &m)| blk.vecs[(p, l)] * blk.vecs_inv[(l, p)].conj() * weights[m]).sum();
                unit[offsets[b] + l] = (0..members.len()).map(|p| blk.vecs_inv[(l, p)] * blk.vecs[(p, l)].conj()).sum::<C64>() / dim;
            }
        }
        for l in 0..n {
            for k in 0..n {
                c[(k, l)] += unit[k] * phi[l];
            }
        }
        let lu = c.partial_piv_lu();
        let pivots: Vec<f64> = (0..n).map(|i| lu.U()[(i, i)].norm()).collect();
        let largest = pivots.iter().copied().fold(0.0, f64::max);
        let smallest = pivots.iter().copied().fold(f64::INFINITY, f64::min);
        // a second stationary population vector makes the bordered population operator singular
        if !(smallest > UNIQUENESS_TOL * largest) {
            return Err(Error::NonUniqueSteadyState { difference: smallest / largest });
        }
        Ok(lu)
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let s = &self.sectors;
        let mut out = vec![C64::new(0.0, 0.0); s.len];
        for (b, blk) in self.blocks.iter().enumerate() {
            let rho = s.block(x, b);
            let image = &blk.drift * rho + rho * &blk.conj_drift;
            s.write_block(&mut out, b, image.as_ref());
        }
        for &(i, j, g) in &self.gen.jumps {
            let (left, right) = (&self.gen.ladders[i], &self.gen.ladders[j]);
            for (b, members) in s.members.iter().enumerate() {
                let nb = members.len();
                for (pn, &n) in members.iter().enumerate() {
                    let Some((q, vr)) = right.by_col[n] else { continue };
                    let src = s.sector[q];
                    let (qpos, src_n) = (s.position[q], s.members[src].len());
                    let src_col = s.offsets[src] + src_n * qpos;
                    let dst_col = s.offsets[b] + nb * pn;
                    for (pm, &m) in members.iter().enumerate() {
                        if let Some((k, vl)) = left.by_row[m] {
                            debug_assert_eq!(s.sector[k], src);
                            out[dst_col + pm] += x[src_col + s.position[k]] * (g * vl * vr);
                        }
                    }
                }
            }
        }
        out
    }

    /// Inverse of the drift on eigenbasis coherences and of the coarse operator on populations.
    fn precondition(&self, coarse: &PartialPivLu<C64>, y: &[C64]) -> Vec<C64> {
        let s = &self.sectors;
        let mut rotated: Vec<Mat<C64>> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| &blk.vecs_inv * s.block(y, b) * &blk.vecs_conj)
            .collect();
        let total: usize = rotated.iter().map(|m| m.nrows()).sum();
        let mut pops = Mat::<C64>::zeros(total, 1);
        let mut k = 0;
        for m in &rotated {
            for i in 0..m.nrows() {
                pops[(k, 0)] = m[(i, i)];
                k += 1;
            }
        }
        let pops = coarse.solve(&pops);
        let mut out = vec![C64::new(0.0, 0.0); s.len];
        let mut k = 0;
        for (b, (blk, m)) in self.blocks.iter().zip(rotated.iter_mut()).enumerate() {
            let n = m.nrows();
            for j in 0..n {
                for i in 0..n {
                    m[(i, j)] = if i == j { pops[(k + i, 0)] } else { m[(i, j)] * blk.inv_denominator[(i, j)] };
                }
            }
            k += n;
            let back = &blk.vecs * &*m * &blk.vecs_inv_conj;
            s.write_block(&mut out, b, back.as_ref());
        }
        out
    }
}

/// V_t⁻¹ A V_s for ladder operator `a` acting on block `src`, with its target block t.
fn ladder_image(gen: &LindbladGenerator, s: &Sectors, blocks: &[BlockDrift], src: usize, a: usize) -> Option<(usize, Mat<C64>)> {
    let members = &s.members[src];
    let ladder = &gen.ladders[a];
    let dst = members.iter().find_map(|&n| ladder.by_col[n].map(|(m, _)| s.sector[m]))?;
    let (ns, nt) = (members.len(), s.members[dst].len());
    let vs = &blocks[src].vecs;
    let mut shifted = Mat::<C64>::zeros(nt, ns);
    for (p, &n) in members.iter().enumerate() {
        if let Some((m, v)) = ladder.by_col[n] {
            debug_assert_eq!(s.sector[m], dst);
            let row = s.position[m];
            for l in 0..ns {
                shifted[(row, l)] += vs[(p, l)] * v;
            }
        }
    }
    Some((dst, &blocks[dst].vecs_inv * &shifted))
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

struct SolveOutcome {
    x: Vec<C64>,
    residual: f64,
    converged: bool,
}

/// Restarted GMRES with right preconditioning and Givens rotations.
fn gmres(op: &dyn Fn(&[C64]) -> Vec<C64>, precond: &dyn Fn(&[C64]) -> Vec<C64>, b: &[C64], x0: Vec<C64>) -> SolveOutcome {
    let b_norm = norm(b).max(f64::MIN_POSITIVE);
    let mut x = x0;
    let mut iterations = 0;
    loop {
        let ax = op(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let residual = beta / b_norm;
        if residual <= GMRES_TOL || iterations >= GMRES_MAX_ITER {
            return SolveOutcome { x, residual, converged: residual <= GMRES_TOL };
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut hess: Vec<Vec<C64>> = Vec::new();
        let mut rotations: Vec<(f64, C64)> = Vec::new();
        let mut g = vec![C64::new(beta, 0.0)];
        for k in 0..GMRES_RESTART {
            iterations += 1;
            let mut w = op(&precond(&basis[k]));
            let mut h = vec![C64::new(0.0, 0.0); k + 2];
            // two passes of modified Gram–Schmidt
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    h[i] += c;
                    axpy(-c, v, &mut w);
                }
            }
            let w_norm = norm(&w);
            h[k + 1] = C64::new(w_norm, 0.0);
            for (i, &(c, s)) in rotations.iter().enumerate() {
                let (hi, hj) = (h[i], h[i + 1]);
                h[i] = hi * c + s * hj;
                h[i + 1] = -s.conj() * hi + hj * c;
            }
            let (a, bb) = (h[k], h[k + 1]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 {
                (1.0, C64::new(0.0, 0.0))
            } else if a.norm() == 0.0 {
                (0.0, C64::new(1.0, 0.0))
            } else {
                let c = a.norm() / denom;
                (c, (a / a.norm()) * bb.conj() / denom)
            };
            h[k] = c * a + s * bb;
            h[k + 1] = C64::new(0.0, 0.0);
            rotations.push((c, s));
            let gk = g[k];
            g[k] = c * gk;
            g.push(-s.conj() * gk);
            hess.push(h);
            let breakdown = w_norm <= 1e-300;
            if !breakdown {
                basis.push(w.iter().map(|z| z / w_norm).collect());
            }
            if g[k + 1].norm() / b_norm <= 0.1 * GMRES_TOL || breakdown || iterations >= GMRES_MAX_ITER {
                break;
            }
        }
        let m = hess.len();
        let mut y = vec![C64::new(0.0, 0.0); m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for j in i + 1..m {
                acc -= hess[j][i] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        let mut update = vec![C64::new(0.0, 0.0); b.len()];
        for (yi, v) in y.iter().zip(&basis) {
            axpy(*yi, v, &mut update);
        }
        let correction = precond(&update);
        axpy(C64::new(1.0, 0.0), &correction, &mut x);
    }
}

/// Preconditioned fixed-point sweep x ← x + P⁻¹(b − Ax), used when GMRES stalls.
fn richardson(op: &dyn Fn(&[C64]) -> Vec<C64>, precond: &dyn Fn(&[C64]) -> Vec<C64>, b: &[C64], x0: Vec<C64>) -> SolveOutcome {
    let b_norm = norm(b).max(f64::MIN_POSITIVE);
    let mut x = x0;
    let mut residual = f64::INFINITY;
    for _ in 0..RICHARDSON_MAX_ITER {
        let ax = op(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        residual = norm(&r) / b_norm;
        if residual <= GMRES_TOL {
            return SolveOutcome { x, residual, converged: true };
        }
        if !residual.is_finite() {
            break;
        }
        axpy(C64::new(1.0, 0.0), &precond(&r), &mut x);
    }
    SolveOutcome { x, residual, converged: false }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOccupations {
    pub n1: f64,
    pub n2: f64,
    /// Largest single-mode population in the cutoff shell n = n_max.
    pub tail: f64,
    /// Relative residual of the bordered linear solve.
    pub residual: f64,
}

/// Solves L(ρ) + φ(ρ)u = u for a normalizing functional φ and returns ρ/tr ρ.
fn bordered_solve(problem: &ReducedProblem<'_>, weights: &[f64], x0: Vec<C64>) -> Result<(Vec<C64>, f64)> {
    let diag = problem.sectors.diagonal();
    let coarse = problem.coarse(weights)?;
    let dim = diag.len() as f64;
    let mut u = vec![C64::new(0.0, 0.0); problem.sectors.len];
    for &(_, idx) in &diag {
        u[idx] = C64::new(1.0 / dim, 0.0);
    }
    let op = |x: &[C64]| {
        let mut y = problem.apply(x);
        let phi: C64 = diag.iter().map(|&(k, idx)| x[idx] * weights[k]).sum();
        axpy(phi, &u, &mut y);
        y
    };
    let precond = |y: &[C64]| problem.precondition(&coarse, y);
    let mut outcome = gmres(&op, &precond, &u, x0);
    if !outcome.converged {
        outcome = richardson(&op, &precond, &u, outcome.x);
    }
    if !outcome.converged {
        return Err(Error::SolverNonConvergence { residual: outcome.residual });
    }
    let trace: C64 = diag.iter().map(|&(_, idx)| outcome.x[idx]).sum();
    if !(trace.norm() > 0.0) {
        return Err(Error::SolverNonConvergence { residual: outcome.residual });
    }
    Ok((outcome.x.iter().map(|z| z / trace).collect(), outcome.residual))
}

pub fn oracle_steady_occupations(model: &ModelParams, rates: &RateTable, trunc: &TruncationSpec) -> Result<OracleOccupations> {
    let gen = build_generator(model, rates, trunc)?;
    let problem = ReducedProblem::new(&gen)?;
    let sectors = &problem.sectors;
    let diag = sectors.diagonal();

    let trace_weights = vec![1.0; diag.len()];
    let (rho, residual) = bordered_solve(&problem, &trace_weights, vec![C64::new(0.0, 0.0); sectors.len])?;
    // a second normalization and starting point select a different element if the null space is degenerate
    let skewed: Vec<f64> = (0..diag.len()).map(|k| 1.0 + k as f64 / diag.len() as f64).collect();
    let mut start = vec![C64::new(0.0, 0.0); sectors.len];
    start[diag[0].1] = C64::new(1.0, 0.0);
    let (other, other_residual) = bordered_solve(&problem, &skewed, start)?;
    let difference = rho.iter().zip(&other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if difference > UNIQUENESS_TOL {
        return Err(Error::NonUniqueSteadyState { difference });
    }

    for b in 0..sectors.members.len() {
        let block = sectors.block(&rho, b);
        let n = block.nrows();
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((block[(i, j)] - block[(j, i)].conj()).norm());
            }
        }
        if asym > HERMITICITY_TOL {
            return Err(Error::SolverNonConvergence { residual: asym });
        }
        let herm = Mat::<C64>::from_fn(n, n, |i, j| 0.5 * (block[(i, j)] + block[(j, i)].conj()));
        let eig = herm.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::SolverNonConvergence { residual: f64::INFINITY })?;
        let smallest = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest < -POSITIVITY_TOL {
            return Err(Error::UnphysicalCovariance { smallest });
        }
    }

    let d = trunc.n_max + 1;
    let (mut n1, mut n2, mut shell1, mut shell2) = (0.0, 0.0, 0.0, 0.0);
    for &(k, idx) in &diag {
        let p = rho[idx].re;
        let (a, b) = occupations_of(k, d);
        n1 += a as f64 * p;
        n2 += b as f64 * p;
        if a == trunc.n_max {
            shell1 += p;
        }
        if b == trunc.n_max {
            shell2 += p;
        }
    }
    let tail = shell1.max(shell2);
    if tail > trunc.tail_tol {
        return Err(Error::TruncationInadequate { tail, tol: trunc.tail_tol });
    }
    Ok(OracleOccupations { n1, n2, tail, residual: residual.max(other_residual) })
}

/// Raises n_max in steps of 4 from `n_start` until the cutoff shell is below `tail_tol`.
pub fn converged_occupations(model: &ModelParams, rates: &RateTable, tail_tol: f64, n_start: usize) -> Result<(OracleOccupations, TruncationSpec)> {
    let mut n_max = n_start;
    loop {
        let trunc = TruncationSpec::new(n_max, tail_tol)?;
        match oracle_steady_occupations(model, rates, &trunc) {
            Err(Error::TruncationInadequate { .. }) => n_max += 4,
            other => return other.map(|occ| (occ, trunc)),
        }
    }
}
