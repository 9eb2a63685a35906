//! Discrete Hermite basis on the roots of the order-`M` Hermite polynomial.
//!
//! The basis consists of the orthonormal Hermite functions `psi_p`,
//! `p = 0..M`, sampled at the `M` zeros of `H_M`, together with the
//! Gauss-Hermite weights `w_m = 1 / (M psi_{M-1}(t_m)^2)` that make the
//! sampled table discretely orthonormal.

use crate::error::{invalid, Error, Result};

/// Largest supported basis order.
pub const MAX_ORDER: usize = 1000;

// Mantissa rescaling bound for the recurrence; keeps the iterate finite while
// the Gaussian factor is carried separately as a log-scale.
const RESCALE_AT: f64 = 1e150;
const RESCALE_LN: f64 = 345.387_763_949_107; // ln(1e150)

const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Evaluates `psi_n(t)` and `psi_{n-1}(t)` as mantissas sharing one log-scale:
/// `psi_k(t) = mantissa_k * exp(log_scale)`.
fn scaled_pair(n: usize, t: f64) -> (f64, f64, f64) {
    let mut log_scale = -0.5 * t * t;
    let mut prev = 0.0;
    let mut cur = PI_POW_NEG_QUARTER;
    for k in 1..=n {
        let kf = k as f64;
        let next = t * (2.0 / kf).sqrt() * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            log_scale += RESCALE_LN;
        }
    }
    (cur, prev, log_scale)
}

fn unscale(mantissa: f64, log_scale: f64) -> f64 {
    if mantissa == 0.0 {
        return 0.0;
    }
    mantissa.signum() * (mantissa.abs().ln() + log_scale).exp()
}

/// Orthonormal Hermite function `psi_p(t)` (unit scaling).
///
/// Uses the normalized three-term recurrence
/// `psi_p = t sqrt(2/p) psi_{p-1} - sqrt((p-1)/p) psi_{p-2}`, so neither
/// `H_p(t)` nor `exp(-t^2/2)` is ever formed on its own. Values beyond the
/// classical turning point may underflow to zero.
pub fn hermite_function(p: usize, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(invalid(format!("hermite_function: non-finite t = {t}")));
    }
    let (cur, _, log_scale) = scaled_pair(p, t);
    Ok(unscale(cur, log_scale))
}

/// Sturm count of eigenvalues of the Jacobi matrix strictly less than `x`.
fn eigen_count_below(off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = -x;
    if d < 0.0 {
        count += 1;
    }
    for &b2 in off_sq {
        let denom = if d == 0.0 { f64::EPSILON * (1.0 + x.abs()) } else { d };
        d = -x - b2 / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Zeros of `H_order` in ascending order.
///
/// Eigenvalues of the symmetric tridiagonal Jacobi matrix (off-diagonals
/// `sqrt(k/2)`) are isolated by Sturm bisection and then polished with
/// Newton steps on the recurrence. The result is exactly antisymmetric.
pub fn hermite_roots(order: usize) -> Result<Vec<f64>> {
    if order == 0 || order > MAX_ORDER {
        return Err(invalid(format!(
            "hermite_roots: order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    let off_sq: Vec<f64> = (1..order).map(|k| k as f64 / 2.0).collect();
    let bound = 2.0 * ((order as f64 - 1.0) / 2.0).sqrt() + 1.0;

    // Only the non-negative half is computed; the rest is mirrored.
    let half = order / 2;
    let mut positive = Vec::with_capacity(half);
    for k in (order - half)..order {
        // k-th smallest eigenvalue (0-based): count_below(x) <= k < count_below(hi)
        let (mut lo, mut hi) = (0.0, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if eigen_count_below(&off_sq, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut root = 0.5 * (lo + hi);
        for _ in 0..5 {
            let (cur, prev, _) = scaled_pair(order, root);
            if prev == 0.0 {
                break;
            }
            // psi_M' = sqrt(2M) psi_{M-1} - t psi_M; at a root the second term vanishes.
            let deriv = (2.0 * order as f64).sqrt() * prev - root * cur;
            let step = cur / deriv;
            if !step.is_finite() {
                break;
            }
            root -= step;
            if step.abs() < 1e-16 * root.abs() {
                break;
            }
        }
        if !root.is_finite() {
            return Err(Error::NumericFailure {
                order,
                reason: format!("root {k} did not converge"),
            });
        }
        positive.push(root);
    }

    let mut roots = Vec::with_capacity(order);
    roots.extend(positive.iter().rev().map(|r| -r));
    if order % 2 == 1 {
        roots.push(0.0);
    }
    roots.extend(positive.iter().copied());
    if roots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NumericFailure {
            order,
            reason: "roots are not strictly increasing".into(),
        });
    }
    Ok(roots)
}

/// Roots, quadrature weights and the sampled function table of the
/// order-`M` discrete Hermite transform.
///
/// `table` is row-major: row `p` holds `psi_p(t_m)` for `m = 0..M`, i.e. the
/// inverse-transform matrix with samples along columns.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBasis {
    order: usize,
    roots: Vec<f64>,
    weights: Vec<f64>,
    table: Vec<f64>,
}

impl HermiteBasis {
    pub fn new(order: usize) -> Result<Self> {
        build_basis(order)
    }

    /// Assembles a basis from raw parts; used for diagnostics on perturbed bases.
    pub fn from_parts(roots: Vec<f64>, weights: Vec<f64>, table: Vec<f64>) -> Result<Self> {
        let order = roots.len();
        if order == 0 || weights.len() != order || table.len() != order * order {
            return Err(invalid(format!(
                "from_parts: inconsistent sizes roots={} weights={} table={}",
                roots.len(),
                weights.len(),
                table.len()
            )));
        }
        Ok(Self { order, roots, weights, table })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sampled Hermite function `psi_p` on the root grid.
    pub fn row(&self, p: usize) -> &[f64] {
        &self.table[p * self.order..(p + 1) * self.order]
    }

    /// `psi_p(t_m)`, 0-based sample index.
    #[inline]
    pub fn psi(&self, p: usize, m: usize) -> f64 {
        self.table[p * self.order + m]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Max deviation of `sum_m w_m psi_p(t_m) psi_k(t_m)` from `delta(p - k)`.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(self)
    }

    /// Max deviation of `w_m sum_p psi_p(t_m) psi_p(t_n)` from `delta(m - n)`.
    pub fn dual_orthonormality_defect(&self) -> f64 {
        let n = self.order;
        let mut worst = 0.0f64;
        for m in 0..n {
            for k in m..n {
                let s: f64 = (0..n).map(|p| self.psi(p, m) * self.psi(p, k)).sum();
                let target = if m == k { 1.0 } else { 0.0 };
                // symmetric form: sqrt(w_m w_k) keeps the check independent of m/k order
                let v = (self.weights[m] * self.weights[k]).sqrt() * s;
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// Builds the order-`M` basis: roots, weights `1/(M psi_{M-1}(t_m)^2)` and
/// the table `psi_p(t_m)` for `p < M`.
pub fn build_basis(order: usize) -> Result<HermiteBasis> {
    let roots = hermite_roots(order)?;
    let n = order;
    let mut table = vec![0.0; n * n];
    let mut weights = vec![0.0; n];
    for (m, &t) in roots.iter().enumerate() {
        let mut log_scale = -0.5 * t * t;
        let mut prev = 0.0;
        let mut cur = PI_POW_NEG_QUARTER;
        let mut scales = Vec::with_capacity(n);
        let mut mantissas = Vec::with_capacity(n);
        mantissas.push(cur);
        scales.push(log_scale);
        for k in 1..n {
            let kf = k as f64;
            let next = t * (2.0 / kf).sqrt() * cur - ((kf - 1.0) / kf).sqrt() * prev;
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_AT {
                cur /= RESCALE_AT;
                prev /= RESCALE_AT;
                log_scale += RESCALE_LN;
            }
            mantissas.push(cur);
            scales.push(log_scale);
        }
        for p in 0..n {
            table[p * n + m] = unscale(mantissas[p], scales[p]);
        }
        // ln(w_m) = -ln(M) - 2 ln|psi_{M-1}(t_m)|, evaluated in log space.
        let last = mantissas[n - 1];
        if last == 0.0 {
            return Err(Error::NumericFailure {
                order,
                reason: format!("psi_(M-1) vanishes at root {m}"),
            });
        }
        let ln_psi = last.abs().ln() + scales[n - 1];
        weights[m] = (-(n as f64).ln() - 2.0 * ln_psi).exp();
        if !weights[m].is_finite() || weights[m] <= 0.0 {
            return Err(Error::NumericFailure {
                order,
                reason: format!("weight {m} is not finite and positive"),
            });
        }
    }
    Ok(HermiteBasis { order, roots, weights, table })
}

/// Max absolute deviation of the weighted Gram matrix from the identity.
pub fn orthonormality_defect(basis: &HermiteBasis) -> f64 {
    let n = basis.order;
    let weighted: Vec<f64> = (0..n * n)
        .map(|i| basis.table[i] * basis.weights[i % n])
        .collect();
    let mut worst = 0.0f64;
    for p in 0..n {
        let wp = &weighted[p * n..(p + 1) * n];
        for k in p..n {
            let s: f64 = wp.iter().zip(basis.row(k)).map(|(a, b)| a * b).sum();
            let target = if p == k { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
    }
    worst
}
