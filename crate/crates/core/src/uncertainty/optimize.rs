use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bracket width at which [`maximize_scalar`] stops.
pub const BRENT_TOL: f64 = 1e-10;
pub const BRENT_MAX_ITER: usize = 200;

/// Result of a bracketed scalar maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMax<T> {
    pub argmax: T,
    pub max: T,
    pub iterations: usize,
}

/// Derivative-free maximization of `f` on `[lo, hi]` by Brent's
/// golden-section / parabolic-interpolation hybrid.
///
/// Returns the best point evaluated once the bracket shrinks below
/// [`BRENT_TOL`] or after [`BRENT_MAX_ITER`] iterations.
pub fn maximize_scalar<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T) -> Result<ScalarMax<T>> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidParameter(format!("bad bracket [{}, {}]", lo.as_f64(), hi.as_f64())));
    }
    let mut eval = |x: T| -> Result<T> {
        let v = f(x);
        if v.is_finite() {
            Ok(-v)
        } else {
            Err(Error::NonFiniteObjective { at: x.as_f64() })
        }
    };
    let golden = T::lit(0.381_966_011_250_105_1);
    let half = T::lit(0.5);
    let tol1 = T::tol(BRENT_TOL) * T::lit(0.25);
    let tol2 = tol1 + tol1;

    let (mut a, mut b) = (lo, hi);
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut d = T::zero();
    let mut e = T::zero();
    let mut iterations = 0;

    while iterations < BRENT_MAX_ITER {
        let m = half * (a + b);
        if (x - m).abs() <= tol2 - half * (b - a) {
            break;
        }
        iterations += 1;
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = T::lit(2.0) * (q - r);
            if q > T::zero() {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            if p.abs() < (half * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x < m { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = eval(u)?;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok(ScalarMax { argmax: x, max: -fx, iterations })
}
