//! GHZ correlations under phase-shifted Fourier measurements, phase optimization and
//! critical visibility.

pub mod optimize;
pub mod oracle;
pub mod projector;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{setting_of, to_probability_form, BellFunction, ProbabilityTable};
use crate::error::{Error, Result};
use crate::lhv;
use crate::rational::{self, Rational};

pub use optimize::{LocalMethod, LocalResult};
pub use oracle::StateVector;
pub use projector::verify_projector_identity;

pub const TWO_PI: f64 = 2.0 * PI;

/// φ_j^{(X_i)} for every party X, setting i and level j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub n: usize,
    pub d: usize,
    /// Flat array indexed by ((party·2 + setting)·d + level).
    pub phases: Vec<f64>,
}

impl PhaseConfig {
    pub fn zeros(n: usize, d: usize) -> Self {
        PhaseConfig { n, d, phases: vec![0.0; n * 2 * d] }
    }

    pub fn get(&self, party: usize, setting: usize, level: usize) -> f64 {
        self.phases[(party * 2 + setting) * self.d + level]
    }

    pub fn set(&mut self, party: usize, setting: usize, level: usize, v: f64) {
        self.phases[(party * 2 + setting) * self.d + level] = v;
    }

    pub fn levels(&self, party: usize, setting: usize) -> &[f64] {
        let i = (party * 2 + setting) * self.d;
        &self.phases[i..i + self.d]
    }

    pub fn param_count(n: usize, d: usize) -> usize {
        n * 2 * (d - 1)
    }

    /// Expands gauge-fixed parameters (φ_0 = 0) into a full configuration.
    pub fn from_params(n: usize, d: usize, theta: &[f64]) -> Self {
        let mut pc = Self::zeros(n, d);
        for ps in 0..2 * n {
            for j in 1..d {
                pc.phases[ps * d + j] = theta[ps * (d - 1) + j - 1];
            }
        }
        pc
    }

    /// Gauge-fixed canonical representative: φ_0 = 0 and every phase in [0, 2π).
    pub fn canonical(&self) -> Self {
        let d = self.d;
        let mut out = self.clone();
        for ps in 0..2 * self.n {
            let base = self.phases[ps * d];
            for j in 0..d {
                out.phases[ps * d + j] = (self.phases[ps * d + j] - base).rem_euclid(TWO_PI);
            }
        }
        out
    }

    pub fn to_params(&self) -> Vec<f64> {
        let c = self.canonical();
        let d = self.d;
        (0..2 * self.n).flat_map(|ps| (1..d).map(move |j| (ps, j))).map(|(ps, j)| c.phases[ps * d + j]).collect()
    }
}

/// Closed form: [d + 2 Σ_{t<u} cos(Σ_X(φ_u − φ_t) + 2π(u−t)r/d)] / d².
pub fn coincidence_probability(phases: &PhaseConfig, s: usize, r: usize) -> f64 {
    let (n, d) = (phases.n, phases.d);
    let big_phi: Vec<f64> = (0..d).map(|j| (0..n).map(|p| phases.get(p, setting_of(s, p, n), j)).sum()).collect();
    let mut acc = d as f64;
    for u in 0..d {
        for t in 0..u {
            acc += 2.0 * (big_phi[u] - big_phi[t] + TWO_PI * ((u - t) * r) as f64 / d as f64).cos();
        }
    }
    acc / (d * d) as f64
}

/// Coincidence table of the GHZ state for the given phases.
pub fn ghz_table(phases: &PhaseConfig) -> ProbabilityTable<f64> {
    let (n, d) = (phases.n, phases.d);
    ProbabilityTable { n, d, p: (0..1 << n).map(|s| (0..d).map(|r| coincidence_probability(phases, s, r)).collect()).collect() }
}

pub fn quantum_value(f: &BellFunction, phases: &PhaseConfig) -> Result<f64> {
    if f.n() != phases.n || f.d() != phases.d {
        return Err(Error::ShapeMismatch("phase configuration does not match the Bell function".into()));
    }
    to_probability_form(f).evaluate_f64(&ghz_table(phases))
}

/// Value on the maximally mixed state (every coincidence probability 1/d).
pub fn white_noise_value(f: &BellFunction) -> f64 {
    let (n, d) = (f.n(), f.d());
    let t = ProbabilityTable { n, d, p: vec![vec![1.0 / d as f64; d]; 1 << n] };
    to_probability_form(f).evaluate_f64(&t).expect("shapes agree")
}

/// Fast evaluator of the GHZ value and its gradient over gauge-fixed phases.
pub struct Objective {
    n: usize,
    d: usize,
    w: Vec<f64>,
    roots: Vec<Complex64>,
}

impl Objective {
    pub fn new(f: &BellFunction) -> Self {
        let (n, d) = (f.n(), f.d());
        let w = to_probability_form(f).weights_f64().into_iter().flatten().collect();
        let roots = (0..d).map(|m| Complex64::from_polar(1.0, TWO_PI * m as f64 / d as f64)).collect();
        Objective { n, d, w, roots }
    }

    pub fn dim(&self) -> usize {
        PhaseConfig::param_count(self.n, self.d)
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.eval(theta, None)
    }

    pub fn value_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        self.eval(theta, Some(grad))
    }

    fn eval(&self, theta: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let (n, d) = (self.n, self.d);
        let dm1 = d - 1;
        let norm = 1.0 / (d * d) as f64;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        let mut big_phi = vec![0.0; d];
        let mut z = vec![Complex64::new(0.0, 0.0); d];
        let mut amp = vec![Complex64::new(0.0, 0.0); d];
        let mut total = 0.0;
        for s in 0..1 << n {
            big_phi.iter_mut().for_each(|x| *x = 0.0);
            for p in 0..n {
                let base = (p * 2 + setting_of(s, p, n)) * dm1;
                for j in 1..d {
                    big_phi[j] += theta[base + j - 1];
                }
            }
            for j in 0..d {
                z[j] = Complex64::from_polar(1.0, big_phi[j]);
            }
            let w = &self.w[s * d..(s + 1) * d];
            for r in 0..d {
                let mut a = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    a += z[j] * self.roots[(j * r) % d];
                }
                amp[r] = a;
                total += w[r] * a.norm_sqr() * norm;
            }
            if let Some(g) = grad.as_deref_mut() {
                for j in 1..d {
                    let mut c = Complex64::new(0.0, 0.0);
                    for r in 0..d {
                        c += amp[r].conj() * self.roots[(j * r) % d] * w[r];
                    }
                    let dphi = -2.0 * norm * (z[j] * c).im;
                    for p in 0..n {
                        g[(p * 2 + setting_of(s, p, n)) * dm1 + j - 1] += dphi;
                    }
                }
            }
        }
        total
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_evals: usize,
    pub method: LocalMethod,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { restarts: 64, tol: 1e-9, seed: 0, max_evals: 20_000, method: LocalMethod::Bfgs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Visibility {
    pub vc: f64,
    pub violation: bool,
}

/// v_c = (L − NL_mix)/(NL_psi − NL_mix); flagged when NL_psi ≤ L.
pub fn critical_visibility(l: &Rational, nl_psi: f64, nl_mix: f64) -> Result<Visibility> {
    if nl_psi == nl_mix {
        return Err(Error::DivisionByZero("NL_psi equals NL_mix".into()));
    }
    let lf = rational::to_f64(l);
    Ok(Visibility { vc: (lf - nl_mix) / (nl_psi - nl_mix), violation: nl_psi > lf })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumReport {
    pub nl_psi: f64,
    pub nl_mix: f64,
    pub lhv_bound: Rational,
    pub vc: f64,
    pub violation: bool,
    pub best_phases: PhaseConfig,
    pub best_restart: usize,
    pub restarts_used: usize,
    pub converged_restarts: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuantumReportJson {
    pub nl_psi: f64,
    pub nl_mix: f64,
    pub lhv_bound: String,
    pub lhv_bound_decimal: f64,
    pub vc: f64,
    pub violation: bool,
    pub best_phases: PhaseConfig,
    pub best_restart: usize,
    pub restarts_used: usize,
    pub converged_restarts: usize,
}

impl QuantumReport {
    pub fn to_json(&self) -> QuantumReportJson {
        QuantumReportJson {
            nl_psi: self.nl_psi,
            nl_mix: self.nl_mix,
            lhv_bound: rational::to_string(&self.lhv_bound),
            lhv_bound_decimal: rational::to_f64(&self.lhv_bound),
            vc: self.vc,
            violation: self.violation,
            best_phases: self.best_phases.clone(),
            best_restart: self.best_restart,
            restarts_used: self.restarts_used,
            converged_restarts: self.converged_restarts,
        }
    }
}

/// Starting point of restart k: uniform phases for even k, phases linear in the level for odd k.
pub fn restart_point(n: usize, d: usize, seed: u64, k: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let dim = PhaseConfig::param_count(n, d);
    if k % 2 == 0 {
        (0..dim).map(|_| rng.gen_range(0.0..TWO_PI)).collect()
    } else {
        let mut x = vec![0.0; dim];
        for ps in 0..2 * n {
            let slope = rng.gen_range(0..4 * d) as f64 * PI / (2 * d) as f64;
            for j in 1..d {
                x[ps * (d - 1) + j - 1] = slope * j as f64 + rng.gen_range(-1e-3..1e-3);
            }
        }
        x
    }
}

/// Best GHZ value over `opts.restarts` local searches; ties go to the lowest restart index.
pub fn maximize_value(f: &BellFunction, opts: &OptimizeOptions) -> Result<(f64, PhaseConfig, usize, usize)> {
    if opts.restarts == 0 {
        return Err(Error::Invalid("restarts must be at least 1".into()));
    }
    let obj = Objective::new(f);
    let (n, d) = (f.n(), f.d());
    let results: Vec<LocalResult> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| {
            let x0 = restart_point(n, d, opts.seed, k);
            optimize::maximize(&obj, x0, opts)
        })
        .collect();
    let converged = results.iter().filter(|r| r.converged).count();
    let (best_k, best) = results
        .iter()
        .enumerate()
        .fold(None::<(usize, &LocalResult)>, |acc, (k, r)| match acc {
            Some((_, b)) if b.value >= r.value => acc,
            _ => Some((k, r)),
        })
        .expect("restarts ≥ 1");
    Ok((best.value, PhaseConfig::from_params(n, d, &best.x).canonical(), best_k, converged))
}

/// Multi-start maximization of the GHZ value with v_c against a given exact LHV bound.
pub fn optimize_with_bound(f: &BellFunction, l: &Rational, opts: &OptimizeOptions) -> Result<QuantumReport> {
    let (nl_psi, best_phases, best_restart, converged) = maximize_value(f, opts)?;
    let nl_mix = white_noise_value(f);
    let vis = critical_visibility(l, nl_psi, nl_mix)?;
    Ok(QuantumReport {
        nl_psi,
        nl_mix,
        lhv_bound: l.clone(),
        vc: vis.vc,
        violation: vis.violation,
        best_phases,
        best_restart,
        restarts_used: opts.restarts,
        converged_restarts: converged,
    })
}

pub fn optimize_phases(f: &BellFunction, opts: &OptimizeOptions, lhv_budget: u128) -> Result<QuantumReport> {
    let l = lhv::lhv_max(f, lhv_budget)?;
    optimize_with_bound(f, &l, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::cglmp;
    use crate::rational::{int, rat};

    #[test]
    fn zero_phase_example() {
        let pc = PhaseConfig::zeros(2, 2);
        assert!((coincidence_probability(&pc, 0, 0) - 1.0).abs() < 1e-15);
        assert!(coincidence_probability(&pc, 0, 1).abs() < 1e-15);
    }

    #[test]
    fn normalization_and_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, d) in [(2, 3), (3, 5), (2, 7)] {
            let mut pc = PhaseConfig::zeros(n, d);
            pc.phases.iter_mut().for_each(|x| *x = rng.gen_range(0.0..TWO_PI));
            let mut shifted = pc.clone();
            for j in 0..d {
                let v = shifted.get(1, 0, j) + 0.731;
                shifted.set(1, 0, j, v);
            }
            for s in 0..1 << n {
                let total: f64 = (0..d).map(|r| coincidence_probability(&pc, s, r)).sum();
                assert!((total - 1.0).abs() < 1e-12);
                for r in 0..d {
                    let a = coincidence_probability(&pc, s, r);
                    assert!((-1e-12..=1.0 + 1e-12).contains(&a));
                    assert!((a - coincidence_probability(&shifted, s, r)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn objective_matches_closed_form_and_gradient() {
        let f = cglmp(5).unwrap();
        let obj = Objective::new(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let theta: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(0.0..TWO_PI)).collect();
        let pc = PhaseConfig::from_params(2, 5, &theta);
        let mut g = vec![0.0; obj.dim()];
        let v = obj.value_grad(&theta, &mut g);
        assert!((v - quantum_value(&f, &pc).unwrap()).abs() < 1e-12);
        for i in 0..obj.dim() {
            let h = 1e-6;
            let mut tp = theta.clone();
            tp[i] += h;
            let mut tm = theta.clone();
            tm[i] -= h;
            let fd = (obj.value(&tp) - obj.value(&tm)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "component {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn visibility_examples() {
        let v = critical_visibility(&int(1), 5.0 / 3.0, 0.0).unwrap();
        assert!((v.vc - 0.6).abs() < 1e-15 && v.violation);
        assert!((critical_visibility(&int(1), 2.0, 0.0).unwrap().vc - 0.5).abs() < 1e-15);
        let v = critical_visibility(&int(1), 1.0, 0.0).unwrap();
        assert!(!v.violation && v.vc == 1.0);
        assert!(critical_visibility(&rat(1, 2), 0.3, 0.3).is_err());
    }

    #[test]
    fn white_noise_is_zero() {
        assert!(white_noise_value(&cglmp(7).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn cglmp3_visibility() {
        let opts = OptimizeOptions { restarts: 8, ..Default::default() };
        let r = optimize_phases(&cglmp(3).unwrap(), &opts, lhv::DEFAULT_BUDGET).unwrap();
        assert!((r.vc - 0.6962).abs() < 2e-3, "vc = {}", r.vc);
        let again = optimize_phases(&cglmp(3).unwrap(), &opts, lhv::DEFAULT_BUDGET).unwrap();
        assert_eq!(r, again);
    }
}
