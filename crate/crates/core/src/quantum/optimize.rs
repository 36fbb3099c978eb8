//! Local maximizers for the phase objective.

use serde::{Deserialize, Serialize};

use super::{Objective, OptimizeOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalMethod {
    /// Quasi-Newton with the analytic gradient.
    Bfgs,
    /// Derivative-free simplex search with dimension-adapted coefficients.
    NelderMead,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

pub fn maximize(obj: &Objective, x0: Vec<f64>, opts: &OptimizeOptions) -> LocalResult {
    match opts.method {
        LocalMethod::Bfgs => bfgs(obj, x0, opts.tol, opts.max_evals),
        LocalMethod::NelderMead => nelder_mead(obj, x0, opts.tol, opts.max_evals),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes −value with inverse-Hessian BFGS updates and Armijo backtracking.
fn bfgs(obj: &Objective, mut x: Vec<f64>, tol: f64, max_evals: usize) -> LocalResult {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut fx = -obj.value_grad(&x, &mut g);
    g.iter_mut().for_each(|v| *v = -*v);
    let mut evals = 1;
    let mut h = identity(n);
    let mut first = true;
    let gtol = tol.sqrt().min(1e-6) * 1e-2;
    let mut converged = false;
    let mut dir = vec![0.0; n];
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    while evals < max_evals {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < gtol {
            converged = true;
            break;
        }
        for i in 0..n {
            dir[i] = -dot(&h[i * n..(i + 1) * n], &g);
        }
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            h = identity(n);
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
            slope = -dot(&g, &g);
        }
        let mut step = 1.0;
        let mut accepted = false;
        while evals < max_evals {
            for i in 0..n {
                xn[i] = x[i] + step * dir[i];
            }
            let fnew = -obj.value_grad(&xn, &mut gn);
            evals += 1;
            if fnew <= fx + 1e-4 * step * slope {
                gn.iter_mut().for_each(|v| *v = -*v);
                let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-14 {
                    if first {
                        let scale = sy / dot(&y, &y);
                        h = identity(n);
                        h.iter_mut().for_each(|v| *v *= scale);
                        first = false;
                    }
                    update_inverse_hessian(&mut h, &s, &y, sy);
                }
                let df = fx - fnew;
                std::mem::swap(&mut x, &mut xn);
                std::mem::swap(&mut g, &mut gn);
                fx = fnew;
                accepted = true;
                if df.abs() <= tol * 1e-3 * (1.0 + fx.abs()) && g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < tol.sqrt() {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                break;
            }
        }
        if !accepted {
            // No descent along a quasi-Newton or steepest direction: stationary to machine precision.
            converged = g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < tol.sqrt();
            break;
        }
        if converged {
            break;
        }
    }
    LocalResult { x, value: -fx, evals, converged }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ.
fn update_inverse_hessian(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Nelder–Mead on −value with the adaptive coefficients of Gao and Han.
fn nelder_mead(obj: &Objective, x0: Vec<f64>, tol: f64, max_evals: usize) -> LocalResult {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let f = |x: &[f64]| -obj.value(x);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), f(&x0)));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += 0.5;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() <= tol * (1.0 + simplex[0].1.abs()) {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / nf);
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(beta);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(alpha * gamma);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    x.iter_mut().zip(&best).for_each(|(v, b)| *v = b + delta * (*v - b));
                    *fx = f(x);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    LocalResult { x, value: -fx, evals, converged }
}
