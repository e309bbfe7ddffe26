//! Matrix-free Newton-GMRES on `F(x) = x − Φ(x)`. Jacobian-vector products
//! are forward differences of `Φ`.

use crate::error::Result;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Restarted GMRES from a zero initial guess. Returns the best iterate found
/// even if `rtol` is not reached.
pub(crate) fn gmres(
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    restart: usize,
    max_restarts: usize,
    rtol: f64,
) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(x);
    }
    for _ in 0..max_restarts {
        let ax = apply(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        if beta <= rtol * b_norm {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns, rotated in place.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut cs: Vec<f64> = Vec::with_capacity(restart);
        let mut sn: Vec<f64> = Vec::with_capacity(restart);
        let mut g = vec![beta];
        let mut k_used = 0;
        for k in 0..restart {
            let mut w = apply(&basis[k])?;
            let mut col = vec![0.0; k + 2];
            for (j, q) in basis.iter().enumerate() {
                let hj = dot(&w, q);
                col[j] = hj;
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= hj * qi;
                }
            }
            let wn = norm2(&w);
            col[k + 1] = wn;
            for j in 0..k {
                let (a, bb) = (col[j], col[j + 1]);
                col[j] = cs[j] * a + sn[j] * bb;
                col[j + 1] = -sn[j] * a + cs[j] * bb;
            }
            let denom = col[k].hypot(col[k + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (col[k] / denom, col[k + 1] / denom) };
            col[k] = c * col[k] + s * col[k + 1];
            col[k + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            let gk = g[k];
            g[k] = c * gk;
            g.push(-s * gk);
            h.push(col);
            k_used = k + 1;
            if g[k + 1].abs() <= rtol * b_norm || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the k_used × k_used triangle
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[j][i] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { acc / h[i][i] } else { 0.0 };
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, qi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * qi;
            }
        }
        if g[k_used].abs() <= rtol * b_norm {
            break;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOutcome {
    pub iterations: usize,
    pub converged: bool,
}

/// Newton iteration for `x = Φ(x)` with backtracking on `‖x − Φ(x)‖₂`.
pub(crate) fn newton_fixed_point(
    x: &mut Vec<f64>,
    mut phi: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    step_tol: f64,
    max_iters: usize,
    ceiling: f64,
) -> Result<NewtonOutcome> {
    let residual = |x: &[f64], px: &[f64]| -> Vec<f64> { x.iter().zip(px).map(|(a, b)| a - b).collect() };
    let mut px = phi(x)?;
    let mut fx = residual(x, &px);
    for it in 0..max_iters {
        if norm_inf(&fx) <= step_tol * (1.0 + norm_inf(x)) {
            return Ok(NewtonOutcome { iterations: it, converged: true });
        }
        let x_norm = norm2(x);
        let px_base = px.clone();
        let x_base = x.clone();
        let rhs: Vec<f64> = fx.iter().map(|v| -v).collect();
        let jv = |v: &[f64]| -> Result<Vec<f64>> {
            let vn = norm2(v);
            if vn == 0.0 {
                return Ok(vec![0.0; v.len()]);
            }
            let eps = f64::EPSILON.sqrt() * (1.0 + x_norm) / vn;
            let shifted: Vec<f64> = x_base.iter().zip(v).map(|(a, b)| a + eps * b).collect();
            let ps = phi(&shifted)?;
            Ok(v.iter()
                .zip(ps.iter().zip(&px_base))
                .map(|(vi, (p1, p0))| vi - (p1 - p0) / eps)
                .collect())
        };
        let step = gmres(jv, &rhs, 60, 4, 1e-10)?;

        let f_norm = norm2(&fx);
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 256.0 {
            let trial: Vec<f64> = x_base.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            if let Ok(pt) = phi(&trial) {
                let ft = residual(&trial, &pt);
                let fn_trial = norm2(&ft);
                if fn_trial.is_finite() && fn_trial <= (1.0 - 1e-4 * lambda) * f_norm {
                    *x = trial;
                    px = pt;
                    fx = ft;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Ok(NewtonOutcome { iterations: it + 1, converged: false });
        }
        if norm_inf(x) > ceiling {
            return Ok(NewtonOutcome { iterations: it + 1, converged: false });
        }
    }
    let converged = norm_inf(&fx) <= step_tol * (1.0 + norm_inf(x));
    Ok(NewtonOutcome { iterations: max_iters, converged })
}
