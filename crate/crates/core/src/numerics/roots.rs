use crate::error::{QkdError, Result};

use super::Bracket;

const MAX_EXPANSIONS: u32 = 60;
const MAX_ITERATIONS: usize = 200;

/// Finds a zero of `f` near `guess`.
///
/// A symmetric interval around `guess` is doubled until `f` changes sign
/// across it, then Brent's method narrows the bracket to width `tol`.
pub fn find_root<F>(mut f: F, guess: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let f_guess = eval(&mut f, guess)?;
    if f_guess == 0.0 {
        return Ok(guess);
    }
    let mut dx = if guess == 0.0 {
        0.02
    } else {
        0.02 * guess.abs()
    };
    for _ in 0..MAX_EXPANSIONS {
        let (a, b) = (guess - dx, guess + dx);
        let fa = eval(&mut f, a)?;
        if fa.signum() != f_guess.signum() {
            return brent(f, a, guess, fa, f_guess, tol);
        }
        let fb = eval(&mut f, b)?;
        if fb.signum() != f_guess.signum() {
            return brent(f, guess, b, f_guess, fb, tol);
        }
        dx *= 2.0;
    }
    Err(QkdError::Convergence(format!(
        "find_root: no sign change around {guess} after {MAX_EXPANSIONS} expansions"
    )))
}

/// Like [`find_root`], but confined to the open interval `domain`.
///
/// Trial points approach each end of the domain geometrically: the gap to
/// the boundary halves at every expansion.
pub fn find_root_within<F>(mut f: F, guess: f64, domain: Bracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(domain.lo < guess && guess < domain.hi) {
        return Err(QkdError::domain(
            "find_root_within",
            guess,
            "inside bracket",
        ));
    }
    let f_guess = eval(&mut f, guess)?;
    if f_guess == 0.0 {
        return Ok(guess);
    }
    let mut below = guess - domain.lo;
    let mut above = domain.hi - guess;
    for _ in 0..MAX_EXPANSIONS {
        below /= 2.0;
        above /= 2.0;
        let a = domain.lo + below;
        let b = domain.hi - above;
        let fa = eval(&mut f, a)?;
        if fa.signum() != f_guess.signum() {
            return brent(f, a, guess, fa, f_guess, tol);
        }
        let fb = eval(&mut f, b)?;
        if fb.signum() != f_guess.signum() {
            return brent(f, guess, b, f_guess, fb, tol);
        }
    }
    Err(QkdError::Convergence(format!(
        "find_root_within: no sign change in ({}, {}) from {guess}",
        domain.lo, domain.hi
    )))
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_nan() {
        Err(QkdError::Convergence(format!("root finder: f({x}) is NaN")))
    } else {
        Ok(y)
    }
}

/// Brent's zero-in on a sign-changing bracket.
fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Ok(a);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = eval(&mut f, b)?;
    }
    Err(QkdError::Convergence(format!(
        "find_root: no convergence within {MAX_ITERATIONS} iterations"
    )))
}
