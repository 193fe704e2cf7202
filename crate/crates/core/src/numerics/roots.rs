use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[lo, hi]`.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let fail = |reason: &str| Error::RootFinding {
        lo,
        hi,
        reason: reason.to_string(),
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() || !fb.is_finite() {
        return Err(fail("non-finite function value at bracket end"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(fail("no sign change"));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..max_iter {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(fail("non-finite function value inside bracket"));
        }
    }
    Err(fail("iteration limit reached"))
}

/// Solve `f(x) = 0` for an increasing or decreasing `f` on `(0, inf)`,
/// searching in log space outward from `guess`.
pub fn solve_positive<F>(mut f: F, guess: f64, rtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let g = |u: f64, f: &mut F| f(u.exp());
    let u0 = guess.ln();
    let (mut lo, mut hi) = (u0 - 1.0, u0 + 1.0);
    let (mut flo, mut fhi) = (g(lo, &mut f), g(hi, &mut f));
    let mut tries = 0;
    while flo.signum() == fhi.signum() {
        tries += 1;
        if tries > 80 || !flo.is_finite() || !fhi.is_finite() {
            return Err(Error::RootFinding {
                lo: lo.exp(),
                hi: hi.exp(),
                reason: "could not bracket a root".into(),
            });
        }
        let w = hi - lo;
        if flo.abs() < fhi.abs() {
            lo -= w;
            flo = g(lo, &mut f);
        } else {
            hi += w;
            fhi = g(hi, &mut f);
        }
    }
    let u = brent(|u| f(u.exp()), lo, hi, rtol, 200)?;
    Ok(u.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_sqrt2() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn brent_rejects_same_sign() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50),
            Err(Error::RootFinding { .. })
        ));
    }

    #[test]
    fn positive_solver_brackets_far_roots() {
        let r = solve_positive(|x| x.ln() - 20.0, 1.0, 1e-14).unwrap();
        assert!((r.ln() - 20.0).abs() < 1e-10);
        let r = solve_positive(|x| 1.0 / x - 1e6, 1.0, 1e-14).unwrap();
        assert!((r * 1e6 - 1.0).abs() < 1e-10);
    }
}
