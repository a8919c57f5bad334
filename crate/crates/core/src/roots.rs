//! Bracketed one-dimensional root finding.
//!
//! The bracket is scanned on a uniform grid first so that brackets holding
//! several roots are reported instead of silently picking one branch. The
//! single sign change found is then refined with Brent's method
//! (inverse quadratic / secant steps, falling back to bisection).

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions {
    /// Stop once `|f(x)|` drops below this.
    pub ftol: f64,
    pub max_iter: usize,
    /// Number of sub-intervals used to look for sign changes.
    pub scan_intervals: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-10,
            max_iter: 200,
            scan_intervals: 64,
        }
    }
}

/// Sub-intervals of `[lo, hi]` over which `f` changes sign.
pub fn sign_changes<F>(mut f: F, lo: f64, hi: f64, intervals: usize) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = intervals.max(1);
    let x_at = |i: usize| {
        if i == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / n as f64
        }
    };
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(lo)?;
    for i in 1..=n {
        let x1 = x_at(i);
        let f1 = f(x1)?;
        if f0 == 0.0 {
            out.push((x0, x0));
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        out.push((hi, hi));
    }
    Ok(out)
}

/// Finds the unique root of `f` inside `[lo, hi]`.
pub fn find_root<F>(variable: &'static str, mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidInput {
            param: "bracket",
            reason: format!("expected finite lo < hi, got [{lo}, {hi}]"),
        });
    }
    let brackets = sign_changes(&mut f, lo, hi, opts.scan_intervals)?;
    match brackets.as_slice() {
        [] => Err(Error::NoRoot { variable, lo, hi }),
        [(a, b)] if a == b => Ok(*a),
        [(a, b)] => brent(&mut f, *a, *b, opts),
        _ => Err(Error::AmbiguousBracket {
            variable,
            sub_brackets: brackets,
        }),
    }
}

/// Brent's method on a bracket known to hold a sign change.
pub fn brent<F>(f: &mut F, a: f64, b: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..opts.max_iter {
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
        let tol = 2.0 * f64::EPSILON * b.abs();
        let m = 0.5 * (c - b);
        if fb.abs() < opts.ftol || m.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic
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
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    // Bracket could not be shrunk further within max_iter; b is the best estimate.
    Ok(b)
}
