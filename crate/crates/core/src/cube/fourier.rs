//! Boolean Fourier analysis on `{-1,+1}^d`, with point `s` standing for the
//! vector whose coordinate is `-1` exactly where `s` has a one bit.

use crate::error::{Error, Result};

/// Coefficients `f_S = 2^-d sum_x f(x) chi_S(x)`, indexed by the subset
/// bitmask `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    pub d: usize,
    pub coefficients: Vec<f64>,
}

impl FourierSpectrum {
    pub fn get(&self, subset: usize) -> f64 {
        self.coefficients[subset]
    }

    /// `sum_S f_S^2`.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// Weight at each level `|S| = 0..=d`.
    pub fn level_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.d + 1];
        for (s, c) in self.coefficients.iter().enumerate() {
            w[s.count_ones() as usize] += c * c;
        }
        w
    }
}

/// Unnormalized fast Walsh-Hadamard transform; applying it twice multiplies
/// by the length.
pub fn wht_in_place(values: &mut [f64]) -> Result<()> {
    let n = values.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::input(format!(
            "transform length must be a power of two, got {n}"
        )));
    }
    let mut h = 1;
    while h < n {
        for block in values.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    Ok(())
}

pub fn wht(values: &[f64]) -> Result<FourierSpectrum> {
    let mut c = values.to_vec();
    wht_in_place(&mut c)?;
    let scale = 1.0 / c.len() as f64;
    c.iter_mut().for_each(|x| *x *= scale);
    Ok(FourierSpectrum {
        d: c.len().trailing_zeros() as usize,
        coefficients: c,
    })
}

/// `NS_rho(f) = sum_S rho^|S| f_S^2`.
pub fn noise_stability(spec: &FourierSpectrum, rho: f64) -> f64 {
    spec.level_weights()
        .iter()
        .enumerate()
        .map(|(level, w)| rho.powi(level as i32) * w)
        .sum()
}
