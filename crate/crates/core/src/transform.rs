//! Forward and inverse discrete Hermite transform.

use crate::basis::HermiteBasis;
use crate::error::{invalid, Result};

/// Signal samples on the Hermite-root grid, ascending root order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector(pub Vec<f64>);

/// Hermite coefficients `c_0 .. c_{M-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector(pub Vec<f64>);

macro_rules! vector_newtype {
    ($ty:ident) => {
        impl $ty {
            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn energy(&self) -> f64 {
                self.0.iter().map(|v| v * v).sum()
            }
        }

        impl From<Vec<f64>> for $ty {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl std::ops::Index<usize> for $ty {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }
    };
}

vector_newtype!(SampleVector);
vector_newtype!(CoefficientVector);

/// Gauss-Hermite analysis: `c_p = sum_m w_m psi_p(t_m) f(t_m)`.
pub fn forward(signal: &SampleVector, basis: &HermiteBasis) -> Result<CoefficientVector> {
    let n = basis.order();
    if signal.len() != n {
        return Err(invalid(format!(
            "forward: signal length {} does not match basis order {n}",
            signal.len()
        )));
    }
    let weighted: Vec<f64> = signal
        .0
        .iter()
        .zip(basis.weights())
        .map(|(f, w)| f * w)
        .collect();
    let coeffs = (0..n)
        .map(|p| basis.row(p).iter().zip(&weighted).map(|(a, b)| a * b).sum())
        .collect();
    Ok(CoefficientVector(coeffs))
}

/// Synthesis: `f(t_m) = sum_p c_p psi_p(t_m)`.
pub fn inverse(coeffs: &CoefficientVector, basis: &HermiteBasis) -> Result<SampleVector> {
    let n = basis.order();
    if coeffs.len() != n {
        return Err(invalid(format!(
            "inverse: coefficient length {} does not match basis order {n}",
            coeffs.len()
        )));
    }
    let mut out = vec![0.0; n];
    for (p, &c) in coeffs.0.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(basis.row(p)) {
            *o += c * v;
        }
    }
    Ok(SampleVector(out))
}
