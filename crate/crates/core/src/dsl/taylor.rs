//! Truncated power-series (Taylor-mode) evaluation of an expression.

use super::{EvalError, Expr, Func};

type Series = Vec<f64>;

fn err(e: &Expr, x0: f64, reason: &'static str) -> EvalError {
    EvalError::Domain { subexpr: e.to_string(), x: x0, reason }
}

fn mul(a: &[f64], b: &[f64]) -> Series {
    let n = a.len();
    (0..n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect()
}

fn recip_div(a: &[f64], b: &[f64]) -> Series {
    let n = a.len();
    let mut c = vec![0.0; n];
    for k in 0..n {
        let s: f64 = (1..=k).map(|j| b[j] * c[k - j]).sum();
        c[k] = (a[k] - s) / b[0];
    }
    c
}

fn exp(a: &[f64]) -> Series {
    let n = a.len();
    let mut e = vec![0.0; n];
    e[0] = a[0].exp();
    for k in 1..n {
        let s: f64 = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum();
        e[k] = s / k as f64;
    }
    e
}

fn log(a: &[f64]) -> Series {
    let n = a.len();
    let mut l = vec![0.0; n];
    l[0] = a[0].ln();
    for k in 1..n {
        let s: f64 = (1..k).map(|j| j as f64 * l[j] * a[k - j]).sum();
        l[k] = (a[k] - s / k as f64) / a[0];
    }
    l
}

/// (sin a, cos a) when `hyperbolic` is false, (sinh a, cosh a) otherwise.
fn sin_cos(a: &[f64], hyperbolic: bool) -> (Series, Series) {
    let n = a.len();
    let mut s = vec![0.0; n];
    let mut c = vec![0.0; n];
    if hyperbolic {
        s[0] = a[0].sinh();
        c[0] = a[0].cosh();
    } else {
        s[0] = a[0].sin();
        c[0] = a[0].cos();
    }
    let sign = if hyperbolic { 1.0 } else { -1.0 };
    for k in 1..n {
        let mut ss = 0.0;
        let mut cs = 0.0;
        for j in 1..=k {
            ss += j as f64 * a[j] * c[k - j];
            cs += j as f64 * a[j] * s[k - j];
        }
        s[k] = ss / k as f64;
        c[k] = sign * cs / k as f64;
    }
    (s, c)
}

fn sqrt(a: &[f64]) -> Series {
    let n = a.len();
    let mut r = vec![0.0; n];
    r[0] = a[0].sqrt();
    for k in 1..n {
        let s: f64 = (1..k).map(|j| r[j] * r[k - j]).sum();
        r[k] = (a[k] - s) / (2.0 * r[0]);
    }
    r
}

fn powi(a: &[f64], mut p: u32) -> Series {
    let n = a.len();
    let mut result = vec![0.0; n];
    result[0] = 1.0;
    let mut base = a.to_vec();
    while p > 0 {
        if p & 1 == 1 {
            result = mul(&result, &base);
        }
        p >>= 1;
        if p > 0 {
            base = mul(&base, &base);
        }
    }
    result
}

fn series(e: &Expr, x0: f64, n: usize) -> Result<Series, EvalError> {
    let constant = |v: f64| {
        let mut s = vec![0.0; n];
        s[0] = v;
        s
    };
    let out = match e {
        Expr::Const(c) => constant(*c),
        Expr::X => {
            let mut s = constant(x0);
            if n > 1 {
                s[1] = 1.0;
            }
            s
        }
        Expr::Neg(a) => series(a, x0, n)?.into_iter().map(|v| -v).collect(),
        Expr::Add(a, b) => {
            let (a, b) = (series(a, x0, n)?, series(b, x0, n)?);
            a.iter().zip(&b).map(|(p, q)| p + q).collect()
        }
        Expr::Sub(a, b) => {
            let (a, b) = (series(a, x0, n)?, series(b, x0, n)?);
            a.iter().zip(&b).map(|(p, q)| p - q).collect()
        }
        Expr::Mul(a, b) => mul(&series(a, x0, n)?, &series(b, x0, n)?),
        Expr::Div(a, b) => {
            let (sa, sb) = (series(a, x0, n)?, series(b, x0, n)?);
            if sb[0] == 0.0 {
                return Err(err(e, x0, "division by a series vanishing at the expansion point"));
            }
            recip_div(&sa, &sb)
        }
        Expr::Pow(a, b) => {
            let sa = series(a, x0, n)?;
            match **b {
                Expr::Const(p) if p.fract() == 0.0 && p.abs() <= 64.0 => {
                    let pos = powi(&sa, p.abs() as u32);
                    if p >= 0.0 {
                        pos
                    } else {
                        if pos[0] == 0.0 {
                            return Err(err(e, x0, "negative power of a series vanishing at the expansion point"));
                        }
                        recip_div(&constant(1.0), &pos)
                    }
                }
                _ => {
                    if sa[0] <= 0.0 {
                        return Err(err(e, x0, "non-integer power needs a positive base"));
                    }
                    let sb = series(b, x0, n)?;
                    exp(&mul(&sb, &log(&sa)))
                }
            }
        }
        Expr::Call(f, a) => {
            let sa = series(a, x0, n)?;
            match f {
                Func::Exp => exp(&sa),
                Func::Log => {
                    if sa[0] <= 0.0 {
                        return Err(err(e, x0, "logarithm of a non-positive number"));
                    }
                    log(&sa)
                }
                Func::Sin => sin_cos(&sa, false).0,
                Func::Cos => sin_cos(&sa, false).1,
                Func::Sinh => sin_cos(&sa, true).0,
                Func::Cosh => sin_cos(&sa, true).1,
                Func::Sqrt => {
                    if sa[0] <= 0.0 {
                        return Err(err(e, x0, "square root is not analytic here"));
                    }
                    sqrt(&sa)
                }
                Func::Abs => {
                    if sa[0] == 0.0 {
                        return Err(err(e, x0, "abs is not differentiable here"));
                    }
                    let sign = sa[0].signum();
                    sa.into_iter().map(|v| sign * v).collect()
                }
            }
        }
    };
    if out.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite { subexpr: e.to_string(), x: x0 });
    }
    Ok(out)
}

/// Taylor coefficients `c_0..c_{order}` of `ast` about `x0`, so that
/// `f(x0 + t) ≈ Σ c_k t^k`.
pub fn taylor_coefficients(ast: &Expr, x0: f64, order: usize) -> Result<Vec<f64>, EvalError> {
    series(ast, x0, order + 1)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn tc(s: &str, n: usize) -> Vec<f64> {
        taylor_coefficients(&parse(s).unwrap(), 0.0, n).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-14 * (1.0 + y.abs()), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn polynomials() {
        close(&tc("x^2 + 0.1*x^4", 5), &[0.0, 0.0, 1.0, 0.0, 0.1, 0.0]);
        close(&tc("(1+x)^3", 4), &[1.0, 3.0, 3.0, 1.0, 0.0]);
    }

    #[test]
    fn transcendental() {
        close(&tc("cosh(x)-1", 6), &[0.0, 0.0, 0.5, 0.0, 1.0 / 24.0, 0.0, 1.0 / 720.0]);
        close(&tc("exp(-x^2)", 4), &[1.0, 0.0, -1.0, 0.0, 0.5]);
        close(&tc("sin(x)", 5), &[0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0]);
        close(&tc("log(1+x)", 4), &[0.0, 1.0, -0.5, 1.0 / 3.0, -0.25]);
        close(&tc("sqrt(1+x)", 3), &[1.0, 0.5, -0.125, 0.0625]);
        close(&tc("1/(1-x)", 4), &[1.0; 5]);
        close(&tc("(1+x)^0.5", 3), &[1.0, 0.5, -0.125, 0.0625]);
    }

    #[test]
    fn matches_repeated_symbolic_derivatives() {
        use super::super::{differentiate, evaluate};
        let e = parse("x^2*exp(x)/(2+cos(x))").unwrap();
        let coeffs = taylor_coefficients(&e, 0.3, 4).unwrap();
        let mut d = e.clone();
        let mut fact = 1.0;
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let v = evaluate(&d, 0.3).unwrap() / fact;
            assert!((v - c).abs() < 1e-12 * (1.0 + v.abs()), "k={k}: {v} vs {c}");
            d = differentiate(&d);
        }
    }

    #[test]
    fn non_analytic_points_are_errors() {
        assert!(taylor_coefficients(&parse("abs(x)").unwrap(), 0.0, 3).is_err());
        assert!(taylor_coefficients(&parse("sqrt(x)").unwrap(), 0.0, 3).is_err());
    }
}
