//! Globally adaptive 15-point Gauss–Kronrod quadrature for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    /// Componentwise absolute error estimate.
    pub error: [f64; N],
    pub evaluations: usize,
}

struct Panel<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the refinement order is deterministic
        self.priority.total_cmp(&other.priority).then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn kronrod<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, lo: f64, hi: f64) -> ([f64; N], [f64; N]) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let mid = f(center);
    for c in 0..N {
        k[c] = WGK[7] * mid[c];
        g[c] = WG[3] * mid[c];
    }
    for (j, (&x, &wk)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let left = f(center - half * x);
        let right = f(center + half * x);
        for c in 0..N {
            let pair = left[c] + right[c];
            k[c] += wk * pair;
            if j % 2 == 1 {
                g[c] += WG[j / 2] * pair;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        value[c] = k[c] * half;
        error[c] = ((k[c] - g[c]) * half).abs();
    }
    (value, error)
}

fn panel<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, lo: f64, hi: f64) -> Panel<N> {
    let (value, error) = kronrod(f, lo, hi);
    let priority = error.iter().copied().fold(0.0, f64::max);
    Panel { lo, hi, value, error, priority }
}

/// Integrates `f` over the union of consecutive `breakpoints` intervals until the
/// largest componentwise error is below max(abs_tol, rel_tol · max|value|).
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate<N>> {
    let mut heap: BinaryHeap<Panel<N>> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| panel(&f, w[0], w[1]))
        .collect();
    let mut subdivisions = 0;
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for p in heap.iter() {
        for c in 0..N {
            value[c] += p.value[c];
            error[c] += p.error[c];
        }
    }
    loop {
        if value.iter().chain(&error).any(|x| !x.is_finite()) {
            return Err(Error::QuadratureNonConvergence { error: f64::INFINITY, subdivisions });
        }
        let worst = error.iter().copied().fold(0.0, f64::max);
        let scale = value.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if worst <= abs_tol.max(rel_tol * scale) || heap.is_empty() {
            break;
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::QuadratureNonConvergence { error: worst, subdivisions });
        }
        let top = heap.pop().expect("heap is not empty");
        let mid = 0.5 * (top.lo + top.hi);
        if !(mid > top.lo && mid < top.hi) {
            return Err(Error::QuadratureNonConvergence { error: worst, subdivisions });
        }
        let (left, right) = (panel(&f, top.lo, mid), panel(&f, mid, top.hi));
        for c in 0..N {
            value[c] += left.value[c] + right.value[c] - top.value[c];
            error[c] += left.error[c] + right.error[c] - top.error[c];
        }
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // re-sum from scratch so the running updates leave no drift
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut panels: Vec<&Panel<N>> = heap.iter().collect();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for p in panels {
        for c in 0..N {
            value[c] += p.value[c];
            error[c] += p.error[c];
        }
    }
    let evaluations = 15 * (heap.len() + subdivisions);
    Ok(Estimate { value, error, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        // Kronrod rule integrates degree 22 exactly
        let est = integrate(|x| [x.powi(10), 1.0], &[0.0, 2.0], 1e-14, 0.0, 10).unwrap();
        assert_relative_eq!(est.value[0], 2f64.powi(11) / 11.0, max_relative = 1e-14);
        assert_relative_eq!(est.value[1], 2.0, max_relative = 1e-15);
    }

    #[test]
    fn narrow_lorentzian() {
        let (w, g) = (3.0, 1e-4);
        let f = |x: f64| [g / std::f64::consts::PI / ((x - w).powi(2) + g * g)];
        let est = integrate(f, &[0.0, w, 10.0], 1e-12, 0.0, 2000).unwrap();
        let exact = (((10.0 - w) / g).atan() + (w / g).atan()) / std::f64::consts::PI;
        assert_relative_eq!(est.value[0], exact, max_relative = 1e-11);
    }

    #[test]
    fn gives_up_after_budget() {
        let f = |x: f64| [1.0 / x.sqrt()];
        assert!(matches!(integrate(f, &[0.0, 1.0], 1e-14, 0.0, 5), Err(Error::QuadratureNonConvergence { .. })));
        let pole = |x: f64| [1.0 / x];
        assert!(matches!(integrate(pole, &[-1.0, 1.0], 1e-8, 0.0, 50), Err(Error::QuadratureNonConvergence { .. })));
    }
}
