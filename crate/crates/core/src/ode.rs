//! Adaptive Dormand–Prince 5(4) integration of linear systems `ẋ = f(x)` over
//! complex vectors.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    /// Steps below `h_min·max(1, |t|)` are reported as underflow.
    pub h_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            atol: 1e-11,
            rtol: 1e-10,
            h_min: 1e-13,
        }
    }
}

// Dormand–Prince tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (error estimate weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates from `t_grid[0]` through every grid point, calling `record` with
/// the state at each one (including the first). The grid must be increasing.
pub fn integrate<F, R>(mut f: F, x0: Vec<C64>, t_grid: &[f64], tol: Tolerances, mut record: R) -> Result<()>
where
    F: FnMut(&[C64], &mut [C64]),
    R: FnMut(usize, &[C64]),
{
    if t_grid.is_empty() {
        return Ok(());
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("t_grid", "must be strictly increasing"));
    }
    let n = x0.len();
    let mut x = x0;
    let mut t = t_grid[0];
    record(0, &x);

    let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];
    let mut xnew = vec![ZERO; n];
    f(&x, &mut k[0]);

    let span = t_grid[t_grid.len() - 1] - t;
    let mut h = initial_step(&x, &k[0], span, tol);
    let mut err_prev: f64 = 1e-4;

    for (gi, &t_next) in t_grid.iter().enumerate().skip(1) {
        while t < t_next {
            let last = t + h >= t_next;
            let hh = if last { t_next - t } else { h };

            let stage = |tmp: &mut [C64], x: &[C64], k: &[Vec<C64>; 7], coefs: &[(usize, f64)]| {
                for i in 0..n {
                    let mut acc = x[i];
                    for &(s, a) in coefs {
                        acc += k[s][i] * (a * hh);
                    }
                    tmp[i] = acc;
                }
            };
            stage(&mut tmp, &x, &k, &[(0, A21)]);
            f(&tmp, &mut k[1]);
            stage(&mut tmp, &x, &k, &[(0, A31), (1, A32)]);
            f(&tmp, &mut k[2]);
            stage(&mut tmp, &x, &k, &[(0, A41), (1, A42), (2, A43)]);
            f(&tmp, &mut k[3]);
            stage(&mut tmp, &x, &k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
            f(&tmp, &mut k[4]);
            stage(&mut tmp, &x, &k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
            f(&tmp, &mut k[5]);
            stage(&mut xnew, &x, &k, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
            f(&xnew, &mut k[6]);

            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * hh;
                let sc = tol.atol + tol.rtol * x[i].norm().max(xnew[i].norm());
                err = err.max(e.norm() / sc);
            }

            if err <= 1.0 {
                t = if last { t_next } else { t + hh };
                std::mem::swap(&mut x, &mut xnew);
                k.swap(0, 6);
                // PI step-size control.
                let e = err.max(1e-10);
                let fac = (0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0)).clamp(0.2, 5.0);
                err_prev = e;
                if !last {
                    h = hh * fac;
                } else {
                    h = h.max(hh * fac.min(1.0));
                }
            } else {
                h = hh * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            if h < tol.h_min * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, h });
            }
        }
        record(gi, &x);
    }
    Ok(())
}

fn initial_step(x: &[C64], dx: &[C64], span: f64, tol: Tolerances) -> f64 {
    let (mut d0, mut d1) = (0.0f64, 0.0f64);
    for (xi, fi) in x.iter().zip(dx) {
        let sc = tol.atol + tol.rtol * xi.norm();
        d0 = d0.max(xi.norm() / sc);
        d1 = d1.max(fi.norm() / sc);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span.max(1e-12))
}
