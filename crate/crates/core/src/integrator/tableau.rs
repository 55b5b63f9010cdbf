//! Single-step schemes: Dormand-Prince 5(4) with its continuous extension,
//! and classical RK4 with cubic Hermite interpolation.

use crate::error::{Error, Result};

// Dormand-Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// b5 - b4
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub(crate) type RhsFn<'a> = dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a;

pub(crate) fn eval(f: &mut RhsFn<'_>, t: f64, y: &[f64], out: &mut [f64], evals: &mut usize) -> Result<()> {
    f(t, y, out)?;
    *evals += 1;
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteDerivative { t })
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Dense {
    Dopri { t0: f64, h: f64, rcont: [Vec<f64>; 5] },
    Hermite { t0: f64, h: f64, y0: Vec<f64>, y1: Vec<f64>, f0: Vec<f64>, f1: Vec<f64> },
}

impl Dense {
    pub(crate) fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            Dense::Dopri { t0, h, rcont } => {
                let s = (t - t0) / h;
                let s1 = 1.0 - s;
                (0..rcont[0].len())
                    .map(|i| {
                        rcont[0][i]
                            + s * (rcont[1][i] + s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])))
                    })
                    .collect()
            }
            Dense::Hermite { t0, h, y0, y1, f0, f1 } => {
                let s = (t - t0) / h;
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                (0..y0.len())
                    .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
                    .collect()
            }
        }
    }
}

/// Outcome of one step from `(t, y)` with size `h`.
#[derive(Debug, Clone)]
pub(crate) struct StepResult {
    pub h: f64,
    pub y: Vec<f64>,
    /// Derivative at the end point.
    pub f1: Vec<f64>,
    /// Per-component local error estimate; empty for fixed-step schemes.
    pub err: Vec<f64>,
    pub dense: Dense,
}

fn combo(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, ki) in out.iter_mut().zip(k.iter()) {
                *o += h * c * ki;
            }
        }
    }
    out
}

/// One Dormand-Prince step. The propagated solution is the fifth-order one;
/// `err` is the difference to the embedded fourth-order solution.
pub(crate) fn dopri_step(
    f: &mut RhsFn<'_>,
    t: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
    evals: &mut usize,
) -> Result<StepResult> {
    let n = y.len();
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];

    let ys = combo(y, h, &[(A21, k1)]);
    eval(f, t + C2 * h, &ys, &mut k2, evals)?;
    let ys = combo(y, h, &[(A31, k1), (A32, &k2)]);
    eval(f, t + C3 * h, &ys, &mut k3, evals)?;
    let ys = combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]);
    eval(f, t + C4 * h, &ys, &mut k4, evals)?;
    let ys = combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
    eval(f, t + C5 * h, &ys, &mut k5, evals)?;
    let ys = combo(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
    eval(f, t + h, &ys, &mut k6, evals)?;
    let y1 = combo(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    eval(f, t + h, &y1, &mut k7, evals)?;

    let err: Vec<f64> = (0..n)
        .map(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
        .collect();

    let ydiff: Vec<f64> = (0..n).map(|i| y1[i] - y[i]).collect();
    let bspl: Vec<f64> = (0..n).map(|i| h * k1[i] - ydiff[i]).collect();
    let r4: Vec<f64> = (0..n).map(|i| ydiff[i] - h * k7[i] - bspl[i]).collect();
    let r5: Vec<f64> = (0..n)
        .map(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
        .collect();

    Ok(StepResult {
        h,
        y: y1,
        f1: k7,
        err,
        dense: Dense::Dopri {
            t0: t,
            h,
            rcont: [y.to_vec(), ydiff, bspl, r4, r5],
        },
    })
}

/// One classical fourth-order Runge-Kutta step.
pub(crate) fn rk4_step(
    f: &mut RhsFn<'_>,
    t: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
    evals: &mut usize,
) -> Result<StepResult> {
    let n = y.len();
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    eval(f, t + 0.5 * h, &combo(y, h, &[(0.5, k1)]), &mut k2, evals)?;
    eval(f, t + 0.5 * h, &combo(y, h, &[(0.5, &k2)]), &mut k3, evals)?;
    eval(f, t + h, &combo(y, h, &[(1.0, &k3)]), &mut k4, evals)?;
    let y1 = combo(
        y,
        h,
        &[(1.0 / 6.0, k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
    );
    let mut f1 = vec![0.0; n];
    eval(f, t + h, &y1, &mut f1, evals)?;
    Ok(StepResult {
        h,
        dense: Dense::Hermite {
            t0: t,
            h,
            y0: y.to_vec(),
            y1: y1.clone(),
            f0: k1.to_vec(),
            f1: f1.clone(),
        },
        y: y1,
        f1,
        err: Vec::new(),
    })
}
