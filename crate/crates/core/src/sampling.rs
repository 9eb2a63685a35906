//! Random undersampling: masks, measurements, sparse test signals and the
//! zero-filled initial coefficient estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::HermiteBasis;
use crate::error::{invalid, Result};
use crate::transform::{CoefficientVector, SampleVector};

/// Derives an independent per-trial seed from a master seed.
///
/// `z = master + (index + 1) * 0x9E3779B97F4A7C15`, followed by the
/// SplitMix64 finalizer.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Positions of the available samples out of `total`.
///
/// Positions are 0-based and sorted (sample `m` in 1-based notation is
/// stored as `m - 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    total: usize,
    available: Vec<usize>,
}

impl SamplingMask {
    pub fn new(total: usize, mut available: Vec<usize>) -> Result<Self> {
        available.sort_unstable();
        if available.is_empty() || available.len() > total {
            return Err(invalid(format!(
                "mask: need 1 <= M_A <= M, got M_A={} M={total}",
                available.len()
            )));
        }
        if available.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("mask: duplicate positions"));
        }
        if *available.last().unwrap() >= total {
            return Err(invalid("mask: position out of range"));
        }
        Ok(Self { total, available })
    }

    pub fn full(total: usize) -> Self {
        Self { total, available: (0..total).collect() }
    }

    /// Signal length `M`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Number of available samples `M_A`.
    pub fn available_count(&self) -> usize {
        self.available.len()
    }

    pub fn positions(&self) -> &[usize] {
        &self.available
    }

    pub fn is_full(&self) -> bool {
        self.available.len() == self.total
    }
}

/// Uniformly random `M_A`-subset of the `M` sample positions, sorted and
/// reproducible for a given seed (partial Fisher-Yates over ChaCha8).
pub fn random_mask(total: usize, available: usize, seed: u64) -> Result<SamplingMask> {
    if available == 0 || available > total {
        return Err(invalid(format!(
            "random_mask: need 1 <= M_A <= M, got M_A={available} M={total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..total).collect();
    for i in 0..available {
        let j = rng.random_range(i..total);
        idx.swap(i, j);
    }
    idx.truncate(available);
    idx.sort_unstable();
    Ok(SamplingMask { total, available: idx })
}

/// Observed samples together with the mask that selected them.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub values: Vec<f64>,
    pub mask: SamplingMask,
}

impl Measurement {
    pub fn new(values: Vec<f64>, mask: SamplingMask) -> Result<Self> {
        if values.len() != mask.available_count() {
            return Err(invalid(format!(
                "measurement: {} values for a mask of {} positions",
                values.len(),
                mask.available_count()
            )));
        }
        Ok(Self { values, mask })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            mask: self.mask.clone(),
        }
    }
}

/// One nonzero Hermite coefficient of a synthetic signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub p: usize,
    #[serde(rename = "A")]
    pub amplitude: f64,
}

/// A `K`-sparse signal `s(m) = sum_i A_i psi_{p_i}(t_m)` of length `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignalSpec {
    length: usize,
    components: Vec<Component>,
}

impl SparseSignalSpec {
    pub fn new(length: usize, components: Vec<(usize, f64)>) -> Result<Self> {
        let components: Vec<Component> = components
            .into_iter()
            .map(|(p, amplitude)| Component { p, amplitude })
            .collect();
        Self::from_components(length, components)
    }

    pub fn from_components(length: usize, components: Vec<Component>) -> Result<Self> {
        if length == 0 {
            return Err(invalid("signal spec: length must be positive"));
        }
        if components.len() > length {
            return Err(invalid("signal spec: more components than samples"));
        }
        let mut seen = vec![false; length];
        for c in &components {
            if c.p >= length {
                return Err(invalid(format!("signal spec: order {} out of range 0..{length}", c.p)));
            }
            if seen[c.p] {
                return Err(invalid(format!("signal spec: duplicate order {}", c.p)));
            }
            seen[c.p] = true;
            if c.amplitude == 0.0 || !c.amplitude.is_finite() {
                return Err(invalid(format!("signal spec: bad amplitude {} at order {}", c.amplitude, c.p)));
            }
        }
        Ok(Self { length, components })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Number of components `K`.
    pub fn sparsity(&self) -> usize {
        self.components.len()
    }

    pub fn orders(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.p).collect()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.amplitude).collect()
    }

    /// Sorted support.
    pub fn support(&self) -> Vec<usize> {
        let mut s = self.orders();
        s.sort_unstable();
        s
    }

    pub fn coefficients(&self) -> CoefficientVector {
        let mut c = CoefficientVector::zeros(self.length);
        for comp in &self.components {
            c.0[comp.p] = comp.amplitude;
        }
        c
    }
}

/// Samples the sparse signal on the basis grid.
pub fn synthesize(spec: &SparseSignalSpec, basis: &HermiteBasis) -> Result<SampleVector> {
    if spec.length != basis.order() {
        return Err(invalid(format!(
            "synthesize: spec length {} does not match basis order {}",
            spec.length,
            basis.order()
        )));
    }
    let mut out = vec![0.0; spec.length];
    for c in &spec.components {
        for (o, v) in out.iter_mut().zip(basis.row(c.p)) {
            *o += c.amplitude * v;
        }
    }
    Ok(SampleVector(out))
}

/// Picks the signal values at the mask positions.
pub fn measure(signal: &SampleVector, mask: &SamplingMask) -> Result<Measurement> {
    if signal.len() != mask.total() {
        return Err(invalid(format!(
            "measure: signal length {} does not match mask length {}",
            signal.len(),
            mask.total()
        )));
    }
    let values = mask.positions().iter().map(|&m| signal[m]).collect();
    Ok(Measurement { values, mask: mask.clone() })
}

/// Hermite coefficients of the zero-filled signal:
/// `c_p = sum_{m in mask} w_m psi_p(t_m) y(m)`.
pub fn initial_estimate(meas: &Measurement, basis: &HermiteBasis) -> Result<CoefficientVector> {
    let n = basis.order();
    if meas.mask.total() != n {
        return Err(invalid(format!(
            "initial_estimate: mask length {} does not match basis order {n}",
            meas.mask.total()
        )));
    }
    let weights = basis.weights();
    let weighted: Vec<(usize, f64)> = meas
        .mask
        .positions()
        .iter()
        .zip(&meas.values)
        .map(|(&m, &y)| (m, y * weights[m]))
        .collect();
    let coeffs = (0..n)
        .map(|p| {
            let row = basis.row(p);
            weighted.iter().map(|&(m, wy)| row[m] * wy).sum()
        })
        .collect();
    Ok(CoefficientVector(coeffs))
}

/// Mask section of the JSON signal config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    #[serde(rename = "M_A")]
    pub available: usize,
    pub seed: u64,
}

/// `{"M": int, "components": [{"p": int, "A": float}], "mask": {"M_A": int, "seed": int}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    #[serde(rename = "M")]
    pub length: usize,
    pub components: Vec<Component>,
    pub mask: MaskConfig,
}

impl SignalConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn spec(&self) -> Result<SparseSignalSpec> {
        SparseSignalSpec::from_components(self.length, self.components.clone())
    }

    pub fn sampling_mask(&self) -> Result<SamplingMask> {
        random_mask(self.length, self.mask.available, self.mask.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::transform::forward;

    #[test]
    fn full_mask_and_determinism() {
        let full = random_mask(200, 200, 9).unwrap();
        assert_eq!(full.positions(), (0..200).collect::<Vec<_>>().as_slice());
        assert!(full.is_full());
        assert_eq!(random_mask(200, 120, 1).unwrap(), random_mask(200, 120, 1).unwrap());
        assert_ne!(random_mask(200, 120, 1).unwrap(), random_mask(200, 120, 2).unwrap());
    }

    #[test]
    fn mask_arguments_are_validated() {
        assert!(random_mask(10, 0, 1).is_err());
        assert!(random_mask(10, 11, 1).is_err());
        assert!(SamplingMask::new(5, vec![1, 1]).is_err());
        assert!(SamplingMask::new(5, vec![5]).is_err());
        assert!(SamplingMask::new(5, vec![]).is_err());
        assert_eq!(SamplingMask::new(5, vec![3, 0]).unwrap().positions(), &[0, 3]);
    }

    #[test]
    fn positions_are_uniform() {
        // Binomial(10000, 0.6): sd = 0.0049, 3 sd ~ 0.0147 < 0.02.
        let seeds = 10_000;
        let mut hits = vec![0u32; 200];
        for s in 0..seeds {
            for &m in random_mask(200, 120, mix_seed(77, s)).unwrap().positions() {
                hits[m] += 1;
            }
        }
        for h in hits {
            let f = h as f64 / seeds as f64;
            assert!((f - 0.6).abs() < 0.02, "frequency {f}");
        }
    }

    #[test]
    fn spec_validation() {
        assert!(SparseSignalSpec::new(10, vec![(10, 1.0)]).is_err());
        assert!(SparseSignalSpec::new(10, vec![(2, 1.0), (2, 0.5)]).is_err());
        assert!(SparseSignalSpec::new(10, vec![(2, 0.0)]).is_err());
        assert!(SparseSignalSpec::new(0, vec![]).is_err());
    }

    #[test]
    fn synthesize_examples() {
        let b = build_basis(200).unwrap();
        let one = SparseSignalSpec::new(200, vec![(5, 1.0)]).unwrap();
        assert_eq!(synthesize(&one, &b).unwrap().0, b.row(5).to_vec());
        let empty = SparseSignalSpec::new(200, vec![]).unwrap();
        assert_eq!(synthesize(&empty, &b).unwrap(), SampleVector::zeros(200));

        let ex3 = SparseSignalSpec::new(
            200,
            vec![(20, 1.0), (54, 0.7), (94, 0.5), (162, 0.3), (192, 0.2)],
        )
        .unwrap();
        let c = forward(&synthesize(&ex3, &b).unwrap(), &b).unwrap();
        let want = ex3.coefficients();
        for p in 0..200 {
            assert!((c[p] - want[p]).abs() < 1e-8);
        }
        assert!(synthesize(&ex3, &build_basis(100).unwrap()).is_err());
    }

    #[test]
    fn measure_selects_mask_positions() {
        let s = SampleVector(vec![1.5, -2.0, 4.0]);
        let mask = SamplingMask::new(3, vec![0, 2]).unwrap();
        assert_eq!(measure(&s, &mask).unwrap().values, vec![1.5, 4.0]);
        assert_eq!(measure(&s, &SamplingMask::full(3)).unwrap().values, s.0);
        assert!(measure(&SampleVector::zeros(4), &mask).is_err());
        assert!(Measurement::new(vec![1.0], mask).is_err());
    }

    #[test]
    fn zero_fill_equivalence_and_full_mask() {
        let b = build_basis(50).unwrap();
        let spec = SparseSignalSpec::new(50, vec![(4, 1.0), (30, -0.4)]).unwrap();
        let s = synthesize(&spec, &b).unwrap();
        let mask = random_mask(50, 31, 5).unwrap();
        let est = initial_estimate(&measure(&s, &mask).unwrap(), &b).unwrap();
        let mut zero_filled = SampleVector::zeros(50);
        for &m in mask.positions() {
            zero_filled.0[m] = s[m];
        }
        let fwd = forward(&zero_filled, &b).unwrap();
        for p in 0..50 {
            assert!((est[p] - fwd[p]).abs() <= 1e-15 * (1.0 + fwd[p].abs()));
        }
        let full = initial_estimate(&measure(&s, &SamplingMask::full(50)).unwrap(), &b).unwrap();
        assert_eq!(full, forward(&s, &b).unwrap());
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"M": 200, "components": [{"p": 20, "A": 2.5}, {"p": 124, "A": 3.3}],
                       "mask": {"M_A": 135, "seed": 42}}"#;
        let cfg = SignalConfig::from_json(text).unwrap();
        assert_eq!(cfg.length, 200);
        assert_eq!(cfg.components[1], Component { p: 124, amplitude: 3.3 });
        assert_eq!(cfg.sampling_mask().unwrap().available_count(), 135);
        let again = SignalConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert!(SignalConfig::from_json(r#"{"M": 3}"#).is_err());
    }

    #[test]
    fn seed_mixing_separates_trials() {
        let a: Vec<u64> = (0..1000).map(|i| mix_seed(1, i)).collect();
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), a.len());
        assert_ne!(mix_seed(1, 0), mix_seed(2, 0));
    }
}
