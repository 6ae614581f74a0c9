use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{subexpr}` at x = {x}: {reason}")]
    Domain { subexpr: String, x: f64, reason: &'static str },
    #[error("`{subexpr}` is not finite at x = {x}")]
    NonFinite { subexpr: String, x: f64 },
}

fn domain(e: &Expr, x: f64, reason: &'static str) -> EvalError {
    EvalError::Domain { subexpr: e.to_string(), x, reason }
}

/// Evaluates `ast` at `x`. Any non-finite intermediate value is an error.
pub fn evaluate(ast: &Expr, x: f64) -> Result<f64, EvalError> {
    let v = match ast {
        Expr::Const(c) => *c,
        Expr::X => x,
        Expr::Neg(a) => -evaluate(a, x)?,
        Expr::Add(a, b) => evaluate(a, x)? + evaluate(b, x)?,
        Expr::Sub(a, b) => evaluate(a, x)? - evaluate(b, x)?,
        Expr::Mul(a, b) => evaluate(a, x)? * evaluate(b, x)?,
        Expr::Div(a, b) => {
            let num = evaluate(a, x)?;
            let den = evaluate(b, x)?;
            if den == 0.0 {
                return Err(domain(ast, x, "division by zero"));
            }
            num / den
        }
        Expr::Pow(a, b) => {
            let base = evaluate(a, x)?;
            let expo = evaluate(b, x)?;
            if base < 0.0 && expo.fract() != 0.0 {
                return Err(domain(ast, x, "negative base with non-integer exponent"));
            }
            if base == 0.0 && expo < 0.0 {
                return Err(domain(ast, x, "zero raised to a negative power"));
            }
            if expo.fract() == 0.0 && expo.abs() <= 64.0 {
                base.powi(expo as i32)
            } else {
                base.powf(expo)
            }
        }
        Expr::Call(func, a) => {
            let t = evaluate(a, x)?;
            match func {
                Func::Exp => t.exp(),
                Func::Log => {
                    if t <= 0.0 {
                        return Err(domain(ast, x, "logarithm of a non-positive number"));
                    }
                    t.ln()
                }
                Func::Sin => t.sin(),
                Func::Cos => t.cos(),
                Func::Sinh => t.sinh(),
                Func::Cosh => t.cosh(),
                Func::Sqrt => {
                    if t < 0.0 {
                        return Err(domain(ast, x, "square root of a negative number"));
                    }
                    t.sqrt()
                }
                Func::Abs => t.abs(),
            }
        }
    };
    if !v.is_finite() {
        return Err(EvalError::NonFinite { subexpr: ast.to_string(), x });
    }
    Ok(v)
}
