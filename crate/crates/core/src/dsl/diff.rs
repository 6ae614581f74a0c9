//! Symbolic d/dx with light algebraic simplification (identities with 0 and 1,
//! exact literal folding).

use super::parser::fold;
use super::{Expr, Func};

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Neg(inner) => *inner,
        other => fold::neg(other),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    match b {
        Expr::Neg(inner) => sub(a, *inner),
        b => fold::add(a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 0.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return neg(b);
    }
    fold::sub(a, b)
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Expr::Const(0.0);
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    if is_const(&a, -1.0) {
        return neg(b);
    }
    if is_const(&b, -1.0) {
        return neg(a);
    }
    // keep literals on the left
    match (a, b) {
        (a, Expr::Const(c)) if !matches!(a, Expr::Const(_)) => fold::mul(Expr::Const(c), a),
        (Expr::Const(c), Expr::Mul(l, r)) if matches!(*l, Expr::Const(_)) => {
            let Expr::Const(d) = *l else { unreachable!() };
            let folded = fold::mul(Expr::Const(c), Expr::Const(d));
            if matches!(folded, Expr::Const(_)) {
                mul(folded, *r)
            } else {
                fold::mul(Expr::Const(c), Expr::Mul(Box::new(Expr::Const(d)), r))
            }
        }
        (a, b) => fold::mul(a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return Expr::Const(0.0);
    }
    if is_const(&b, 1.0) {
        return a;
    }
    fold::div(a, b)
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 1.0) {
        return a;
    }
    if is_const(&b, 0.0) {
        return Expr::Const(1.0);
    }
    fold::pow(a, b)
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

/// Symbolic derivative with respect to `x`.
///
/// `abs` differentiates to `a'·a/abs(a)`, which fails to evaluate (division
/// by zero) exactly at its non-differentiable points.
pub fn differentiate(ast: &Expr) -> Expr {
    match ast {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::X => Expr::Const(1.0),
        Expr::Neg(a) => neg(differentiate(a)),
        Expr::Add(a, b) => add(differentiate(a), differentiate(b)),
        Expr::Sub(a, b) => sub(differentiate(a), differentiate(b)),
        Expr::Mul(a, b) => add(mul(differentiate(a), (**b).clone()), mul((**a).clone(), differentiate(b))),
        Expr::Div(a, b) => {
            let da = differentiate(a);
            let db = differentiate(b);
            if is_const(&db, 0.0) {
                return div(da, (**b).clone());
            }
            div(sub(mul(da, (**b).clone()), mul((**a).clone(), db)), pow((**b).clone(), Expr::Const(2.0)))
        }
        Expr::Pow(a, b) => {
            let da = differentiate(a);
            let db = differentiate(b);
            match (&**b, &db) {
                (Expr::Const(n), _) => mul(mul(Expr::Const(*n), pow((**a).clone(), Expr::Const(n - 1.0))), da),
                (_, _) if matches!(**a, Expr::Const(_)) => mul(mul(ast.clone(), call(Func::Log, (**a).clone())), db),
                _ => mul(
                    ast.clone(),
                    add(mul(db, call(Func::Log, (**a).clone())), div(mul((**b).clone(), da), (**a).clone())),
                ),
            }
        }
        Expr::Call(f, a) => {
            let da = differentiate(a);
            let a = (**a).clone();
            let outer = match f {
                Func::Exp => call(Func::Exp, a),
                Func::Log => return div(da, a),
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Sinh => call(Func::Cosh, a),
                Func::Cosh => call(Func::Sinh, a),
                Func::Sqrt => {
                    return div(da, mul(Expr::Const(2.0), call(Func::Sqrt, a)));
                }
                Func::Abs => div(a.clone(), call(Func::Abs, a)),
            };
            mul(outer, da)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{evaluate, parse, EvalError};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(s: &str) -> Expr {
        differentiate(&parse(s).unwrap())
    }

    #[test]
    fn structural_results() {
        assert_eq!(d("x^2"), Expr::Mul(Box::new(Expr::Const(2.0)), Box::new(Expr::X)));
        assert_eq!(d("x^2").to_string(), "2*x");
        assert_eq!(d("3*x").to_string(), "3");
        assert_eq!(d("cosh(x)").to_string(), "sinh(x)");
    }

    #[test]
    fn point_values() {
        assert_eq!(evaluate(&d("cosh(x)"), 0.0).unwrap(), 0.0);
        let second = differentiate(&d("x^2 + x^4"));
        assert_eq!(evaluate(&second, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn abs_flags_its_kink() {
        let da = d("abs(x)");
        assert_eq!(evaluate(&da, -3.0).unwrap(), -1.0);
        assert!(matches!(evaluate(&da, 0.0), Err(EvalError::Domain { .. })));
    }

    fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
        let b = Box::new;
        if depth == 0 || rng.gen_bool(0.25) {
            return if rng.gen_bool(0.6) { Expr::X } else { Expr::Const(rng.gen_range(0.2..2.0)) };
        }
        let a = random_expr(rng, depth - 1);
        match rng.gen_range(0..11) {
            0 => Expr::Add(b(a), b(random_expr(rng, depth - 1))),
            1 => Expr::Sub(b(a), b(random_expr(rng, depth - 1))),
            2 | 3 => Expr::Mul(b(a), b(random_expr(rng, depth - 1))),
            4 => Expr::Pow(b(a), b(Expr::Const(rng.gen_range(1..4) as f64))),
            5 => Expr::Call(Func::Sin, b(a)),
            6 => Expr::Call(Func::Cos, b(a)),
            7 => Expr::Call(Func::Exp, b(Expr::Mul(b(Expr::Const(0.3)), b(a)))),
            // strictly positive arguments keep these on their domains
            8 => Expr::Call(Func::Sqrt, b(Expr::Add(b(Expr::Const(1.5)), b(Expr::Call(Func::Sin, b(a)))))),
            9 => Expr::Call(Func::Log, b(Expr::Add(b(Expr::Const(2.0)), b(Expr::Call(Func::Cos, b(a)))))),
            _ => Expr::Div(
                b(a),
                b(Expr::Add(b(Expr::Const(1.5)), b(Expr::Call(Func::Sin, b(random_expr(rng, depth - 1)))))),
            ),
        }
    }

    /// 100 fixed-seed (expression, point) pairs against a central difference.
    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut checked = 0;
        while checked < 100 {
            let e = random_expr(&mut rng, 4);
            let x: f64 = rng.gen_range(-1.5..1.5);
            let de = differentiate(&e);
            let Ok(exact) = evaluate(&de, x) else { continue };
            let step = 1e-4 * (1.0 + x.abs());
            let f = |t: f64| evaluate(&e, t);
            // Richardson-extrapolated central difference, O(step^4)
            let c1 = (f(x + step).unwrap() - f(x - step).unwrap()) / (2.0 * step);
            let c2 = (f(x + 2.0 * step).unwrap() - f(x - 2.0 * step).unwrap()) / (4.0 * step);
            let fd = (4.0 * c1 - c2) / 3.0;
            let scale = exact.abs().max(1.0);
            assert!((fd - exact).abs() <= 1e-6 * scale, "d/dx {e} at {x}: symbolic {exact}, fd {fd}");
            checked += 1;
        }
    }
}
