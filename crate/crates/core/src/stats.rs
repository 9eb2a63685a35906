//! Statistics of Hermite coefficients under random undersampling.
//!
//! With `M_A` of `M` samples kept at random, each zero-filled coefficient is
//! a sum of `M_A` draws without replacement from a fixed population, so its
//! mean and variance follow from finite-population sampling:
//!
//! * non-signal positions: mean 0, variance
//!   `sigma_N^2 = (M_A M - M_A^2) / (M^2 (M - 1)) * sum_l A_l^2`;
//! * a component of amplitude `A_i`: mean `A_i M_A / M`, variance
//!   `sigma_N1^2 (A_i^2 (P_i / M - 1) + sum_{l != i} A_l^2)` with
//!   `P_i = sum_m (psi_{p_i}(t_m)^2 / psi_{M-1}(t_m)^2)^2`.
//!
//! Coefficient magnitudes are then modelled as folded-normal (signal) and
//! half-normal (noise) variables, which gives the misdetection probability
//! of each component.

use std::f64::consts::{PI, SQRT_2};

use crate::basis::HermiteBasis;
use crate::error::{invalid, Result};
use crate::integrate::integrate;
use crate::sampling::{SamplingMask, SparseSignalSpec};
use crate::special::{erf, one_minus_erf_pow};

/// Default shift (in signal standard deviations) of the approximate
/// misdetection probability.
pub const DEFAULT_CORRECTION: f64 = 1.5;

fn check_regime(m: usize, m_a: usize) -> Result<()> {
    if m < 2 {
        return Err(invalid(format!("signal length must be at least 2, got {m}")));
    }
    if m_a == 0 || m_a > m {
        return Err(invalid(format!("need 1 <= M_A <= M, got M_A={m_a} M={m}")));
    }
    Ok(())
}

/// `(M_A M - M_A^2) / (M^2 (M - 1))`: noise variance of a unit-energy signal.
pub fn unit_noise_variance(m: usize, m_a: usize) -> Result<f64> {
    check_regime(m, m_a)?;
    let (m, m_a) = (m as f64, m_a as f64);
    Ok((m_a * m - m_a * m_a) / (m * m * (m - 1.0)))
}

/// Variance of the zero-filled coefficients at positions without a signal
/// component.
pub fn noise_variance(m: usize, m_a: usize, amplitudes: &[f64]) -> Result<f64> {
    let energy: f64 = amplitudes.iter().map(|a| a * a).sum();
    Ok(unit_noise_variance(m, m_a)? * energy)
}

/// `P_{p0} = sum_m (psi_{p0}(t_m)^2 / psi_{M-1}(t_m)^2)^2`, summed over the
/// whole grid, or only over the available positions when a mask is given.
pub fn component_energy(p0: usize, basis: &HermiteBasis, mask: Option<&SamplingMask>) -> f64 {
    let m = basis.order() as f64;
    let w = basis.weights();
    let row = basis.row(p0);
    // psi_{p0}^2 / psi_{M-1}^2 = M w_m psi_{p0}^2
    let term = |i: usize| {
        let r = m * w[i] * row[i] * row[i];
        r * r
    };
    match mask {
        Some(mask) => mask.positions().iter().map(|&i| term(i)).sum(),
        None => (0..basis.order()).map(term).sum(),
    }
}

/// Variance of the coefficient at the position of a single component:
/// `A^2 sigma_N1^2 (P_{p0} / M - 1)`.
pub fn signal_variance_exact(p0: usize, basis: &HermiteBasis, m_a: usize, amplitude: f64) -> Result<f64> {
    let m = basis.order();
    if p0 >= m {
        return Err(invalid(format!("order {p0} out of range 0..{m}")));
    }
    let u = unit_noise_variance(m, m_a)?;
    let energy = component_energy(p0, basis, None);
    // P/M - 1 vanishes exactly at p0 = M - 1; keep roundoff from going negative
    Ok((amplitude * amplitude * u * (energy / m as f64 - 1.0)).max(0.0))
}

/// Where the `M/M_A` amplitude-bias compensation is applied when the
/// component energy is estimated from the available samples only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiasCompensation {
    /// `sigma_N1^2 ((M/M_A) P~/M - 1)`: unbiased for the exact variance.
    #[default]
    EnergyOnly,
    /// `(M/M_A) sigma_N1^2 (P~/M - 1)`: compensation on the whole bracket.
    WholeBracket,
}

/// Signal-position variance estimated from the available samples.
///
/// Negative estimates (possible for unlucky masks) are clamped to zero.
pub fn signal_variance_estimated(
    p0: usize,
    basis: &HermiteBasis,
    mask: &SamplingMask,
    amplitude: f64,
) -> Result<f64> {
    signal_variance_estimated_with(p0, basis, mask, amplitude, BiasCompensation::EnergyOnly)
}

pub fn signal_variance_estimated_with(
    p0: usize,
    basis: &HermiteBasis,
    mask: &SamplingMask,
    amplitude: f64,
    compensation: BiasCompensation,
) -> Result<f64> {
    let m = basis.order();
    if p0 >= m {
        return Err(invalid(format!("order {p0} out of range 0..{m}")));
    }
    if mask.total() != m {
        return Err(invalid("mask length does not match basis order"));
    }
    let m_a = mask.available_count();
    let u = unit_noise_variance(m, m_a)?;
    let ratio = m as f64 / m_a as f64;
    let energy = component_energy(p0, basis, Some(mask)) / m as f64;
    let v = match compensation {
        BiasCompensation::EnergyOnly => u * (ratio * energy - 1.0),
        BiasCompensation::WholeBracket => ratio * u * (energy - 1.0),
    };
    Ok((amplitude * amplitude * v).max(0.0))
}

/// Per-component parameters of the coefficient distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStat {
    pub order: usize,
    pub amplitude: f64,
    /// `A_i M_A / M`
    pub mean: f64,
    pub variance: f64,
}

impl ComponentStat {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Noise and per-component statistics for one sampling regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStatistics {
    pub m: usize,
    pub m_a: usize,
    pub noise_variance: f64,
    pub components: Vec<ComponentStat>,
}

impl ComponentStatistics {
    pub fn noise_std(&self) -> f64 {
        self.noise_variance.sqrt()
    }
}

fn assemble(
    spec: &SparseSignalSpec,
    m_a: usize,
    energies: impl Fn(usize) -> f64,
) -> Result<ComponentStatistics> {
    let m = spec.length();
    let u = unit_noise_variance(m, m_a)?;
    let amps = spec.amplitudes();
    let total: f64 = amps.iter().map(|a| a * a).sum();
    let components = spec
        .components()
        .iter()
        .map(|c| {
            let a2 = c.amplitude * c.amplitude;
            let own = (a2 * (energies(c.p) - 1.0)).max(0.0);
            ComponentStat {
                order: c.p,
                amplitude: c.amplitude,
                mean: c.amplitude * m_a as f64 / m as f64,
                variance: u * (own + (total - a2)),
            }
        })
        .collect();
    Ok(ComponentStatistics { m, m_a, noise_variance: u * total, components })
}

/// Statistics for one realized mask: component energies are estimated from
/// the available samples with `M/M_A` compensation.
pub fn multi_component_stats(
    spec: &SparseSignalSpec,
    basis: &HermiteBasis,
    mask: &SamplingMask,
) -> Result<ComponentStatistics> {
    let m = basis.order();
    if spec.length() != m || mask.total() != m {
        return Err(invalid("spec, basis and mask lengths disagree"));
    }
    let ratio = m as f64 / mask.available_count() as f64;
    assemble(spec, mask.available_count(), |p| {
        ratio * component_energy(p, basis, Some(mask)) / m as f64
    })
}

/// Mask-independent statistics for `M_A` available samples, using the full
/// component energies.
pub fn expected_component_stats(
    spec: &SparseSignalSpec,
    basis: &HermiteBasis,
    m_a: usize,
) -> Result<ComponentStatistics> {
    let m = basis.order();
    if spec.length() != m {
        return Err(invalid("spec and basis lengths disagree"));
    }
    assemble(spec, m_a, |p| component_energy(p, basis, None) / m as f64)
}

/// Density of `|X|` for `X ~ N(mean, sigma^2)`.
pub fn folded_normal_pdf(x: f64, mean: f64, sigma: f64) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(invalid(format!("folded_normal_pdf: sigma must be positive, got {sigma}")));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    let s2 = 2.0 * sigma * sigma;
    Ok(((-(x - mean).powi(2) / s2).exp() + (-(x + mean).powi(2) / s2).exp()) / (sigma * (2.0 * PI).sqrt()))
}

/// Density of `|X|` for `X ~ N(0, sigma^2)`.
pub fn half_normal_pdf(x: f64, sigma: f64) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(invalid(format!("half_normal_pdf: sigma must be positive, got {sigma}")));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(SQRT_2 / (sigma * PI.sqrt()) * (-x * x / (2.0 * sigma * sigma)).exp())
}

/// `P(|X| <= x)` for `X ~ N(mean, sigma^2)`.
pub fn folded_normal_cdf(x: f64, mean: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let d = SQRT_2 * sigma;
    0.5 * (erf((x + mean) / d) + erf((x - mean) / d))
}

/// `P(|X| <= x)` for `X ~ N(0, sigma^2)`.
pub fn half_normal_cdf(x: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    erf(x / (SQRT_2 * sigma))
}

fn checked_component(index: usize, stats: &ComponentStatistics, k: usize) -> Result<&ComponentStat> {
    if k == 0 || k >= stats.m {
        return Err(invalid(format!("need 1 <= K < M, got K={k} M={}", stats.m)));
    }
    stats
        .components
        .get(index)
        .ok_or_else(|| invalid(format!("component index {index} out of range")))
}

/// Probability that at least one of the `M - K` noise magnitudes exceeds the
/// magnitude of component `index`, integrating the folded-normal signal
/// density against `1 - erf(xi / (sqrt(2) sigma_N))^(M-K)`.
pub fn misdetection_probability_exact(index: usize, stats: &ComponentStatistics, k: usize) -> Result<f64> {
    let comp = checked_component(index, stats, k)?;
    let sigma_n = stats.noise_std();
    if sigma_n == 0.0 {
        return Ok(0.0);
    }
    let n = (stats.m - k) as f64;
    let mu = comp.mean.abs();
    let sigma = comp.std_dev();
    let scale = SQRT_2 * sigma_n;
    if sigma == 0.0 {
        return Ok(one_minus_erf_pow(mu / scale, n).clamp(0.0, 1.0));
    }
    let lo = (mu - 12.0 * sigma).max(0.0);
    let hi = mu + 12.0 * sigma;
    let p = integrate(
        |xi| {
            let density = folded_normal_pdf(xi, mu, sigma).unwrap_or(0.0);
            if density == 0.0 {
                0.0
            } else {
                one_minus_erf_pow(xi / scale, n) * density
            }
        },
        lo,
        hi,
        1e-10,
        24,
    );
    Ok(p.clamp(0.0, 1.0))
}

/// Closed-form approximation `1 - erf((mu - c sigma_i) / (sqrt(2) sigma_N))^(M-K)`;
/// `correction = 0` treats the component as deterministic.
pub fn misdetection_probability_approx(
    index: usize,
    stats: &ComponentStatistics,
    k: usize,
    correction: f64,
) -> Result<f64> {
    let comp = checked_component(index, stats, k)?;
    let sigma_n = stats.noise_std();
    if sigma_n == 0.0 {
        return Ok(0.0);
    }
    let n = stats.m - k;
    let x = (comp.mean.abs() - correction * comp.std_dev()) / (SQRT_2 * sigma_n);
    let p = if x >= 0.0 {
        one_minus_erf_pow(x, n as f64)
    } else {
        1.0 - erf(x).powi(n as i32)
    };
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::sampling::random_mask;

    #[test]
    fn noise_variance_examples() {
        assert_eq!(noise_variance(200, 200, &[1.0, 2.0]).unwrap(), 0.0);
        let v = noise_variance(200, 120, &[1.0]).unwrap();
        assert!((v - 9600.0 / 7_960_000.0).abs() < 1e-18);
        let v4 = noise_variance(200, 120, &[1.0, 3.0, 4.0, 2.0]).unwrap();
        assert!((v4 - 30.0 * 9600.0 / 7_960_000.0).abs() < 1e-15);
        assert!(noise_variance(1, 1, &[1.0]).is_err());
        assert!(noise_variance(10, 0, &[1.0]).is_err());
        assert!(noise_variance(10, 11, &[1.0]).is_err());
    }

    #[test]
    fn energy_exceeds_length_below_the_top_order() {
        let b = build_basis(200).unwrap();
        for p in 0..200 {
            let e = component_energy(p, &b, None);
            if p < 199 {
                assert!(e / 200.0 > 1.0 + 1e-3, "p={p} P/M={}", e / 200.0);
            } else {
                // every term M w psi_{M-1}^2 equals one
                assert!((e / 200.0 - 1.0).abs() < 1e-12);
            }
            assert_eq!(component_energy(p, &b, Some(&SamplingMask::full(200))), e);
        }
    }

    #[test]
    fn full_sampling_has_no_variance() {
        let b = build_basis(40).unwrap();
        assert_eq!(signal_variance_exact(3, &b, 40, 2.0).unwrap(), 0.0);
        let full = SamplingMask::full(40);
        for comp in [BiasCompensation::EnergyOnly, BiasCompensation::WholeBracket] {
            assert_eq!(signal_variance_estimated_with(3, &b, &full, 2.0, comp).unwrap(), 0.0);
        }
        let spec = SparseSignalSpec::new(40, vec![(3, 1.0), (9, -2.0)]).unwrap();
        let s = multi_component_stats(&spec, &b, &full).unwrap();
        assert_eq!(s.noise_variance, 0.0);
        for c in &s.components {
            assert_eq!(c.variance, 0.0);
            assert_eq!(c.mean, c.amplitude);
        }
        assert_eq!(misdetection_probability_exact(0, &s, 2).unwrap(), 0.0);
        assert_eq!(misdetection_probability_approx(1, &s, 2, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn estimate_with_full_mask_equals_exact() {
        let b = build_basis(100).unwrap();
        let mask = SamplingMask::full(100);
        // with M_A = M both vanish, so compare the brackets on a sub-mask energy instead
        for p in [0, 13, 77] {
            let exact = signal_variance_exact(p, &b, 100, 1.0).unwrap();
            let est = signal_variance_estimated(p, &b, &mask, 1.0).unwrap();
            assert_eq!(exact, est);
        }
    }

    #[test]
    fn single_component_reduces_to_mono_formulas() {
        let b = build_basis(200).unwrap();
        let mask = random_mask(200, 120, 3).unwrap();
        let spec = SparseSignalSpec::new(200, vec![(37, 1.7)]).unwrap();
        let s = multi_component_stats(&spec, &b, &mask).unwrap();
        let mono = signal_variance_estimated(37, &b, &mask, 1.7).unwrap();
        assert!((s.components[0].variance - mono).abs() < 1e-15);
        assert!((s.noise_variance - 1.7f64.powi(2) * noise_variance(200, 120, &[1.0]).unwrap()).abs() < 1e-15);
        assert_eq!(s.components[0].mean, 1.7 * 0.6);

        let e = expected_component_stats(&spec, &b, 120).unwrap();
        let exact = signal_variance_exact(37, &b, 120, 1.7).unwrap();
        assert!((e.components[0].variance - exact).abs() < 1e-15);
    }

    #[test]
    fn extreme_undersampling_stays_finite() {
        let b = build_basis(200).unwrap();
        for seed in 0..5 {
            let mask = random_mask(200, 1, seed).unwrap();
            for p in 0..200 {
                let v = signal_variance_estimated(p, &b, &mask, 1.0).unwrap();
                assert!(v.is_finite() && v >= 0.0);
            }
        }
    }

    #[test]
    fn pdf_identities() {
        for &x in &[0.0, 0.1, 0.7, 2.0] {
            let f = folded_normal_pdf(x, 0.0, 0.3).unwrap();
            let h = half_normal_pdf(x, 0.3).unwrap();
            assert!((f - h).abs() < 1e-15);
        }
        let h0 = half_normal_pdf(0.0, 0.5).unwrap();
        assert!((h0 - SQRT_2 / (0.5 * PI.sqrt())).abs() < 1e-15);
        let f = folded_normal_pdf(0.6, 0.6, 0.05).unwrap();
        let direct = 2.0 / (0.05 * (2.0 * PI).sqrt()) * (1.0 + (-2.0f64 * 0.36 / 0.0025).exp()) / 2.0;
        assert!((f - direct).abs() < 1e-12);
        assert!((f - 7.978_845_608).abs() < 1e-8);
        assert!(folded_normal_pdf(1.0, 0.0, 0.0).is_err());
        assert!(half_normal_pdf(1.0, -1.0).is_err());
    }

    #[test]
    fn misdetection_limits() {
        let make = |mean: f64, var: f64| ComponentStatistics {
            m: 400,
            m_a: 200,
            noise_variance: 1.0,
            components: vec![ComponentStat { order: 0, amplitude: 1.0, mean, variance: var }],
        };
        let far = make(60.0, 1.0);
        assert!(misdetection_probability_exact(0, &far, 1).unwrap() < 1e-12);
        let none = make(0.0, 1.0);
        assert!(misdetection_probability_exact(0, &none, 1).unwrap() > 0.99);
        // degenerate signal variance falls back to the deterministic form
        let det = make(3.0, 0.0);
        let exact = misdetection_probability_exact(0, &det, 1).unwrap();
        let approx = misdetection_probability_approx(0, &det, 1, 0.0).unwrap();
        assert!((exact - approx).abs() < 1e-14);
        assert!(misdetection_probability_exact(3, &det, 1).is_err());
        assert!(misdetection_probability_exact(0, &det, 400).is_err());
        // negative shifted mean: probability is clamped into [0, 1]
        let low = make(0.5, 4.0);
        for k in [1, 2] {
            let p = misdetection_probability_approx(0, &low, k, 1.5).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }
}
