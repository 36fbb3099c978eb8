//! Independent state-vector simulation of the measurement: each party applies
//! U = U_QFT·diag(e^{iφ_0}, …, e^{iφ_{d−1}}) and measures in the computational basis.

use num_complex::Complex64;

use super::PhaseConfig;
use crate::bell::setting_of;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub d: usize,
    /// Amplitudes with the first party as the most significant digit.
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn ghz(n: usize, d: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); d.pow(n as u32)];
        let step: usize = (0..n).map(|p| d.pow(p as u32)).sum();
        let a = 1.0 / (d as f64).sqrt();
        for j in 0..d {
            amps[j * step] = Complex64::new(a, 0.0);
        }
        StateVector { n, d, amps }
    }

    pub fn basis(n: usize, d: usize, digits: &[usize]) -> Result<Self> {
        if digits.len() != n || digits.iter().any(|&x| x >= d) {
            return Err(Error::ShapeMismatch("basis label does not match (n, d)".into()));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); d.pow(n as u32)];
        amps[digits.iter().fold(0, |acc, &x| acc * d + x)] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, d, amps })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// [U]_{ab} = e^{i2π·ab/d}·e^{iφ_b}/√d (0-based).
pub fn measurement_unitary(phases: &[f64]) -> Vec<Complex64> {
    let d = phases.len();
    let a = 1.0 / (d as f64).sqrt();
    let mut u = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            let arg = 2.0 * std::f64::consts::PI * ((i * j) % d) as f64 / d as f64 + phases[j];
            u[i * d + j] = Complex64::from_polar(a, arg);
        }
    }
    u
}

/// Joint outcome distribution for setting tuple s, indexed like the amplitudes.
pub fn outcome_distribution(state: &StateVector, phases: &PhaseConfig, s: usize) -> Result<Vec<f64>> {
    let (n, d) = (state.n, state.d);
    if phases.n != n || phases.d != d || state.amps.len() != d.pow(n as u32) {
        return Err(Error::ShapeMismatch("state and phases disagree on (n, d)".into()));
    }
    let mut psi = state.amps.clone();
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for p in 0..n {
        let u = measurement_unitary(phases.levels(p, setting_of(s, p, n)));
        let inner = d.pow((n - 1 - p) as u32);
        let outer = psi.len() / (inner * d);
        for hi in 0..outer {
            for lo in 0..inner {
                for a in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in 0..d {
                        acc += u[a * d + x] * psi[(hi * d + x) * inner + lo];
                    }
                    out[(hi * d + a) * inner + lo] = acc;
                }
            }
        }
        std::mem::swap(&mut psi, &mut out);
    }
    Ok(psi.iter().map(|a| a.norm_sqr()).collect())
}

/// |⟨outcomes| ⊗_X U_X |state⟩|².
pub fn oracle_probability(state: &StateVector, phases: &PhaseConfig, s: usize, outcomes: &[usize]) -> Result<f64> {
    if outcomes.len() != state.n || outcomes.iter().any(|&o| o >= state.d) {
        return Err(Error::ShapeMismatch("outcome tuple does not match (n, d)".into()));
    }
    let dist = outcome_distribution(state, phases, s)?;
    Ok(dist[outcomes.iter().fold(0, |acc, &x| acc * state.d + x)])
}

/// P(Σ outcomes ≡ r) for every residue r.
pub fn coincidence_from_state(state: &StateVector, phases: &PhaseConfig, s: usize) -> Result<Vec<f64>> {
    let (n, d) = (state.n, state.d);
    let dist = outcome_distribution(state, phases, s)?;
    let mut res = vec![0.0; d];
    for (idx, p) in dist.iter().enumerate() {
        let mut x = idx;
        let mut sum = 0;
        for _ in 0..n {
            sum += x % d;
            x /= d;
        }
        res[sum % d] += p;
    }
    Ok(res)
}

/// Coincidence probabilities of the maximally mixed state, by averaging over basis states.
pub fn coincidence_mixed(n: usize, d: usize, phases: &PhaseConfig, s: usize) -> Result<Vec<f64>> {
    let total = d.pow(n as u32);
    let mut acc = vec![0.0; d];
    for idx in 0..total {
        let digits: Vec<usize> = (0..n).rev().map(|k| (idx / d.pow(k as u32)) % d).collect();
        let st = StateVector::basis(n, d, &digits)?;
        for (a, p) in acc.iter_mut().zip(coincidence_from_state(&st, phases, s)?) {
            *a += p / total as f64;
        }
    }
    Ok(acc)
}
