//! Detection thresholds, support detection and single-pass reconstruction.
//!
//! The reconstruction computes the zero-filled Hermite coefficients,
//! estimates the missing-sample noise level from their energy, sets the
//! threshold that keeps all `M` noise magnitudes below it with probability
//! `P_NN`, and solves a least-squares problem restricted to the coefficients
//! that exceed it. There is no iteration.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};

use crate::basis::HermiteBasis;
use crate::error::{invalid, Result};
use crate::sampling::{initial_estimate, Measurement};
use crate::special::{erfc_inv, ERF_APPROX_A};
use crate::transform::{inverse, CoefficientVector, SampleVector};

/// Default probability that every noise coefficient stays below the threshold.
pub const DEFAULT_P_NN: f64 = 0.99;

/// Support rule used when the threshold is exactly zero (no missing samples).
pub const ZERO_THRESHOLD_FLOOR: f64 = 1e-12;

const REFINEMENT_STEPS: usize = 3;

/// `sgn(x) sqrt(1 - exp(-x^2 (4/pi + a x^2) / (1 + a x^2)))`, `a = 0.147`.
pub fn erf_approx(x: f64) -> f64 {
    let a = ERF_APPROX_A;
    let x2 = x * x;
    let v = (1.0 - (-x2 * (4.0 / PI + a * x2) / (1.0 + a * x2)).exp()).sqrt();
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Inputs of the threshold computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    /// Probability that all noise magnitudes stay below the threshold.
    pub target_probability: f64,
    pub m: usize,
    /// Number of components excluded from the noise count; 0 counts all `M`.
    pub k_hint: usize,
    pub sigma_n: f64,
}

impl ThresholdSpec {
    pub fn new(target_probability: f64, m: usize, k_hint: usize, sigma_n: f64) -> Result<Self> {
        let spec = Self { target_probability, m, k_hint, sigma_n };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.target_probability > 0.0 && self.target_probability < 1.0) {
            return Err(invalid(format!(
                "threshold: P_NN must lie in (0, 1), got {}",
                self.target_probability
            )));
        }
        if self.k_hint >= self.m {
            return Err(invalid(format!("threshold: need K < M, got K={} M={}", self.k_hint, self.m)));
        }
        if self.sigma_n < 0.0 || !self.sigma_n.is_finite() {
            return Err(invalid(format!("threshold: bad sigma_N {}", self.sigma_n)));
        }
        Ok(())
    }
}

/// `T = sqrt(2) sigma_N erfinv(P_NN^(1/(M-K)))` with a full-precision inverse.
pub fn threshold_exact(spec: &ThresholdSpec) -> Result<f64> {
    spec.validate()?;
    if spec.sigma_n == 0.0 {
        return Ok(0.0);
    }
    let n = (spec.m - spec.k_hint) as f64;
    // 1 - P^(1/n), kept accurate for P^(1/n) close to 1
    let tail = -(spec.target_probability.ln() / n).exp_m1();
    Ok(SQRT_2 * spec.sigma_n * erfc_inv(tail))
}

/// Closed-form threshold from the rational-exponent erf approximation:
/// `T = sigma_N sqrt((-4/pi - aL + sqrt((4/pi + aL)^2 - 4aL)) / a)` with
/// `L = ln(1 - P_NN^(2/M))`. `k_hint` is ignored.
pub fn threshold_closed_form(spec: &ThresholdSpec) -> Result<f64> {
    spec.validate()?;
    if spec.sigma_n == 0.0 {
        return Ok(0.0);
    }
    let a = ERF_APPROX_A;
    let l = (-(2.0 * spec.target_probability.ln() / spec.m as f64).exp_m1()).ln();
    let b = 4.0 / PI + a * l;
    let t2 = (-b + (b * b - 4.0 * a * l).sqrt()) / a;
    Ok(spec.sigma_n * t2.sqrt())
}

/// Noise standard deviation from the energy of the zero-filled
/// coefficients, compensated by `M/M_A`.
pub fn estimate_sigma_from_coefficients(c0: &CoefficientVector, m: usize, m_a: usize) -> Result<f64> {
    if m < 2 || m_a == 0 || m_a > m {
        return Err(invalid(format!("sigma estimate: need 1 <= M_A <= M, M >= 2; got M_A={m_a} M={m}")));
    }
    let (mf, maf) = (m as f64, m_a as f64);
    let prefactor = (maf * mf - maf * maf) / (mf * mf * (mf - 1.0));
    Ok((prefactor * (mf / maf) * c0.energy()).sqrt())
}

/// Positions whose magnitude strictly exceeds `threshold`, ascending.
///
/// With a zero threshold, positions above `1e-12 * max|c|` are kept.
pub fn detect_support(c0: &CoefficientVector, threshold: f64) -> Vec<usize> {
    let level = if threshold == 0.0 {
        let peak = c0.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        ZERO_THRESHOLD_FLOOR * peak
    } else {
        threshold
    };
    c0.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > level)
        .map(|(p, _)| p)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionStatus {
    Ok,
    EmptySupport,
    SupportExceedsMeasurements,
}

impl ReconstructionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::EmptySupport => "empty-support",
            Self::SupportExceedsMeasurements => "support-exceeds-measurements",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Detected (or supplied) support, ascending.
    pub support: Vec<usize>,
    /// Least-squares coefficients aligned with `support`.
    pub coefficients: Vec<f64>,
    pub full_coefficients: CoefficientVector,
    pub reconstructed_signal: SampleVector,
    /// `||y - A_K c_K||_2` over the available samples.
    pub residual_norm: f64,
    /// Threshold applied to the initial estimate; `None` when the support was supplied.
    pub threshold_used: Option<f64>,
    pub sigma_estimate: Option<f64>,
    /// Ratio of extreme singular values of the restricted measurement matrix.
    pub condition_estimate: f64,
    pub rank_deficient: bool,
    pub status: ReconstructionStatus,
}

impl ReconstructionResult {
    fn unsolved(m: usize, support: Vec<usize>, status: ReconstructionStatus) -> Self {
        Self {
            support,
            coefficients: Vec::new(),
            full_coefficients: CoefficientVector::zeros(m),
            reconstructed_signal: SampleVector::zeros(m),
            residual_norm: f64::NAN,
            threshold_used: None,
            sigma_estimate: None,
            condition_estimate: f64::NAN,
            rank_deficient: false,
            status,
        }
    }

    /// Mean squared error of the reconstructed samples against `truth`.
    pub fn signal_mse(&self, truth: &SampleVector) -> f64 {
        let r = &self.reconstructed_signal;
        r.as_slice()
            .iter()
            .zip(truth.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / r.len().max(1) as f64
    }
}

/// Measurement-matrix rows (available samples) restricted to `support` columns.
fn restricted_matrix(meas: &Measurement, basis: &HermiteBasis, support: &[usize]) -> DMatrix<f64> {
    let rows = meas.mask.positions();
    DMatrix::from_fn(rows.len(), support.len(), |i, j| basis.psi(support[j], rows[i]))
}

/// Least-squares coefficients on a given support.
///
/// Solved through an SVD of the restricted matrix; a rank-deficient system
/// yields the minimum-norm solution and sets `rank_deficient`.
pub fn reconstruct_on_support(
    meas: &Measurement,
    basis: &HermiteBasis,
    support: &[usize],
) -> Result<ReconstructionResult> {
    let m = basis.order();
    if meas.mask.total() != m {
        return Err(invalid("reconstruct: mask length does not match basis order"));
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if let Some(&p) = support.last() {
        if p >= m {
            return Err(invalid(format!("reconstruct: support position {p} out of range")));
        }
    }
    if support.is_empty() {
        return Ok(ReconstructionResult::unsolved(m, support, ReconstructionStatus::EmptySupport));
    }
    if support.len() > meas.mask.available_count() {
        return Ok(ReconstructionResult::unsolved(
            m,
            support,
            ReconstructionStatus::SupportExceedsMeasurements,
        ));
    }

    let a = restricted_matrix(meas, basis, &support);
    let y = DVector::from_column_slice(&meas.values);
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let tol = f64::EPSILON * a.nrows().max(a.ncols()) as f64 * s_max;
    let rank_deficient = s_min <= tol;
    let condition_estimate = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    let solve = |rhs: &DVector<f64>| {
        svd.solve(rhs, tol)
            .map_err(|e| invalid(format!("reconstruct: least-squares solve failed: {e}")))
    };
    let mut solution = solve(&y)?;
    let mut residual = &y - &a * &solution;
    // the SVD iteration can stop short of full precision; refine against it
    for _ in 0..REFINEMENT_STEPS {
        let candidate = &solution + solve(&residual)?;
        let next = &y - &a * &candidate;
        if next.norm() >= residual.norm() {
            break;
        }
        solution = candidate;
        residual = next;
    }
    let residual_norm = residual.norm();

    let coefficients: Vec<f64> = solution.iter().copied().collect();
    let mut full = CoefficientVector::zeros(m);
    for (&p, &c) in support.iter().zip(&coefficients) {
        full.0[p] = c;
    }
    let reconstructed_signal = inverse(&full, basis)?;
    Ok(ReconstructionResult {
        support,
        coefficients,
        full_coefficients: full,
        reconstructed_signal,
        residual_norm,
        threshold_used: None,
        sigma_estimate: None,
        condition_estimate,
        rank_deficient,
        status: ReconstructionStatus::Ok,
    })
}

/// Estimated noise level and the closed-form threshold the pipeline applies
/// to the zero-filled coefficients: `(sigma_N, T)`.
pub fn automatic_threshold(c0: &CoefficientVector, m_a: usize, p_nn: f64) -> Result<(f64, f64)> {
    let m = c0.len();
    let sigma_n = estimate_sigma_from_coefficients(c0, m, m_a)?;
    let threshold = threshold_closed_form(&ThresholdSpec::new(p_nn, m, 0, sigma_n)?)?;
    Ok((sigma_n, threshold))
}

/// Single-pass threshold reconstruction from the available samples.
pub fn reconstruct(meas: &Measurement, basis: &HermiteBasis, p_nn: f64) -> Result<ReconstructionResult> {
    let m_a = meas.mask.available_count();
    let c0 = initial_estimate(meas, basis)?;
    let (sigma_n, threshold) = automatic_threshold(&c0, m_a, p_nn)?;
    let support = detect_support(&c0, threshold);
    let mut result = reconstruct_on_support(meas, basis, &support)?;
    result.threshold_used = Some(threshold);
    result.sigma_estimate = Some(sigma_n);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::sampling::{measure, random_mask, synthesize, SamplingMask, SparseSignalSpec};
    use crate::special::erf;

    #[test]
    fn erf_approx_examples() {
        assert_eq!(erf_approx(0.0), 0.0);
        assert!((erf_approx(1.0) - erf(1.0)).abs() < 2.5e-4);
        assert!((erf_approx(-2.0) + erf_approx(2.0)).abs() < 1e-16);
        for i in 0..400 {
            let x = -4.0 + 0.02 * i as f64;
            assert!((erf_approx(x) - erf(x)).abs() < 2e-4, "x={x}");
        }
    }

    #[test]
    fn threshold_reference_values() {
        // Frozen from an independent erfinv (scipy.special.erfinv):
        // sqrt(2) * erfinv(0.99^(1/200)) = 4.054459214...
        let spec = ThresholdSpec::new(0.99, 200, 0, 1.0).unwrap();
        assert!((threshold_exact(&spec).unwrap() - 4.054_459_214).abs() < 1e-8);
        // closed form: L = ln(1 - 0.99^0.01) = -9.2053697
        assert!((threshold_closed_form(&spec).unwrap() - 4.047_218_275).abs() < 1e-8);
        let zero = ThresholdSpec::new(0.99, 200, 0, 0.0).unwrap();
        assert_eq!(threshold_exact(&zero).unwrap(), 0.0);
        assert_eq!(threshold_closed_form(&zero).unwrap(), 0.0);
    }

    #[test]
    fn threshold_rejects_bad_probability() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(ThresholdSpec::new(p, 200, 0, 1.0).is_err());
            let raw = ThresholdSpec { target_probability: p, m: 200, k_hint: 0, sigma_n: 1.0 };
            assert!(threshold_exact(&raw).is_err());
            assert!(threshold_closed_form(&raw).is_err());
        }
        assert!(ThresholdSpec::new(0.9, 10, 10, 1.0).is_err());
    }

    #[test]
    fn threshold_monotone_and_scaling() {
        let t = |p: f64, m: usize| threshold_exact(&ThresholdSpec::new(p, m, 0, 1.0).unwrap()).unwrap();
        assert!(t(0.99, 100) < t(0.99, 200) && t(0.99, 200) < t(0.99, 400));
        assert!(t(0.9, 200) < t(0.99, 200) && t(0.99, 200) < t(0.999, 200));
        let base = threshold_closed_form(&ThresholdSpec::new(0.99, 200, 0, 1.0).unwrap()).unwrap();
        let scaled = threshold_closed_form(&ThresholdSpec::new(0.99, 200, 0, 3.5).unwrap()).unwrap();
        assert!((scaled - 3.5 * base).abs() <= 4.0 * f64::EPSILON * scaled);
        // excluding K components lowers the exact threshold slightly
        let with_k = threshold_exact(&ThresholdSpec::new(0.99, 200, 8, 1.0).unwrap()).unwrap();
        assert!(with_k < t(0.99, 200));
    }

    #[test]
    fn sigma_estimate_edge_cases() {
        let c = CoefficientVector(vec![0.3, -0.1, 0.7]);
        assert_eq!(estimate_sigma_from_coefficients(&c, 3, 3).unwrap(), 0.0);
        assert_eq!(estimate_sigma_from_coefficients(&CoefficientVector::zeros(50), 50, 20).unwrap(), 0.0);
        assert!(estimate_sigma_from_coefficients(&c, 3, 0).is_err());
    }

    #[test]
    fn support_detection_rules() {
        let c = CoefficientVector(vec![0.1, -2.0, 0.5, 0.0, 1e-14]);
        assert_eq!(detect_support(&c, 0.4), vec![1, 2]);
        assert_eq!(detect_support(&c, 0.5), vec![1]);
        assert!(detect_support(&c, 5.0).is_empty());
        assert!(detect_support(&c, f64::INFINITY).is_empty());
        assert_eq!(detect_support(&c, 0.0), vec![0, 1, 2]);
    }

    #[test]
    fn statuses_for_degenerate_supports() {
        let b = build_basis(20).unwrap();
        let s = synthesize(&SparseSignalSpec::new(20, vec![(2, 1.0)]).unwrap(), &b).unwrap();
        let meas = measure(&s, &random_mask(20, 3, 1).unwrap()).unwrap();
        let empty = reconstruct_on_support(&meas, &b, &[]).unwrap();
        assert_eq!(empty.status, ReconstructionStatus::EmptySupport);
        assert_eq!(empty.full_coefficients, CoefficientVector::zeros(20));
        let big = reconstruct_on_support(&meas, &b, &[0, 1, 2, 3]).unwrap();
        assert_eq!(big.status, ReconstructionStatus::SupportExceedsMeasurements);
        assert!(reconstruct_on_support(&meas, &b, &[20]).is_err());
    }

    #[test]
    fn full_sampling_full_support_inverts_transform() {
        let b = build_basis(40).unwrap();
        let spec = SparseSignalSpec::new(40, vec![(1, 0.4), (22, -1.1), (39, 2.0)]).unwrap();
        let s = synthesize(&spec, &b).unwrap();
        let meas = measure(&s, &SamplingMask::full(40)).unwrap();
        let all: Vec<usize> = (0..40).collect();
        let r = reconstruct_on_support(&meas, &b, &all).unwrap();
        assert_eq!(r.status, ReconstructionStatus::Ok);
        assert!(r.signal_mse(&s) < 1e-20);
        assert!(!r.rank_deficient);

        let auto = reconstruct(&meas, &b, DEFAULT_P_NN).unwrap();
        assert_eq!(auto.threshold_used, Some(0.0));
        assert_eq!(auto.support, vec![1, 22, 39]);
        assert!(auto.signal_mse(&s) < 1e-20);
    }

    #[test]
    fn dependent_columns_give_minimum_norm_solution() {
        // On the mirrored rows m and M-1-m every even Hermite function takes the
        // same value twice, so the columns of psi_0 and psi_2 are parallel.
        let b = build_basis(10).unwrap();
        let mask = SamplingMask::new(10, vec![3, 6]).unwrap();
        let meas = Measurement::new(vec![1.0, 1.0], mask).unwrap();
        let r = reconstruct_on_support(&meas, &b, &[0, 2]).unwrap();
        assert!(r.rank_deficient);
        assert_eq!(r.status, ReconstructionStatus::Ok);
        assert!(r.residual_norm < 1e-12);
        // minimum norm: coefficients proportional to the column values
        let (a0, a2) = (b.psi(0, 3), b.psi(2, 3));
        assert!((r.coefficients[0] * a2 - r.coefficients[1] * a0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_reaches_full_precision() {
        // a mask on which the plain SVD solve stalls near 1e-9 coefficient error
        let spec = SparseSignalSpec::new(
            200,
            vec![(20, 2.5), (124, 3.3), (84, 2.6), (162, 3.1), (37, 2.7), (44, 3.5), (149, 2.3), (189, 3.4)],
        )
        .unwrap();
        let basis = build_basis(200).unwrap();
        let signal = synthesize(&spec, &basis).unwrap();
        let mask = random_mask(200, 135, 8_107_830_922_636_376_550).unwrap();
        let meas = measure(&signal, &mask).unwrap();
        let result = reconstruct_on_support(&meas, &basis, &spec.support()).unwrap();
        assert!(result.residual_norm < 1e-13, "residual {}", result.residual_norm);
        assert!(result.signal_mse(&signal) < 1e-28);
    }

}
