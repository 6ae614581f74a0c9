use std::fmt;

use super::Expr;

// Printing precedences: sum 1, product 2, negation 3, power 4, atom 5.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if c.is_sign_negative() => 3,
        Expr::Pow(..) => 4,
        Expr::Const(_) | Expr::X | Expr::Call(..) => 5,
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        write!(f, "{v}")
    } else {
        write!(f, "{v:e}")
    }
}

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    let p = prec(e);
    let paren = p < min_prec;
    if paren {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(v) => write_number(f, *v)?,
        Expr::X => write!(f, "x")?,
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_expr(f, a, 3)?;
        }
        Expr::Add(a, b) => {
            write_expr(f, a, 1)?;
            write!(f, " + ")?;
            write_expr(f, b, 2)?;
        }
        Expr::Sub(a, b) => {
            write_expr(f, a, 1)?;
            write!(f, " - ")?;
            write_expr(f, b, 2)?;
        }
        Expr::Mul(a, b) => {
            write_expr(f, a, 2)?;
            write!(f, "*")?;
            write_expr(f, b, 3)?;
        }
        Expr::Div(a, b) => {
            write_expr(f, a, 2)?;
            write!(f, "/")?;
            write_expr(f, b, 3)?;
        }
        Expr::Pow(a, b) => {
            write_expr(f, a, 5)?;
            write!(f, "^")?;
            write_expr(f, b, 3)?;
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, 0)?;
            write!(f, ")")?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}
