//! Source printing. Expressions are fully parenthesized so that printing and
//! reparsing gives back the same tree.

use std::fmt;

use super::{Action, Expr, ModuleSystem, UnaryOp};

/// Borrowed expression with the system that names its variables.
pub struct ExprDisplay<'a> {
    sys: &'a ModuleSystem,
    expr: &'a Expr,
}

impl ModuleSystem {
    pub fn display_expr<'a>(&'a self, expr: &'a Expr) -> ExprDisplay<'a> {
        ExprDisplay { sys: self, expr }
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, sys: &ModuleSystem, e: &Expr) -> fmt::Result {
    match e {
        Expr::Int(v) => write!(f, "{v}"),
        Expr::Bool(b) => write!(f, "{b}"),
        Expr::Var(v) => write!(f, "{}", sys.variable(*v).1.name),
        Expr::Unary(UnaryOp::Not, inner) => {
            f.write_str("(!")?;
            write_expr(f, sys, inner)?;
            f.write_str(")")
        }
        // `-(3)` rather than `-3`, which would read back as a literal
        Expr::Unary(UnaryOp::Neg, inner) => {
            f.write_str("(-(")?;
            write_expr(f, sys, inner)?;
            f.write_str("))")
        }
        Expr::Binary(op, l, r) => {
            f.write_str("(")?;
            write_expr(f, sys, l)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, sys, r)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.sys, self.expr)
    }
}

fn write_action(f: &mut fmt::Formatter<'_>, sys: &ModuleSystem, action: &Action) -> fmt::Result {
    if action.is_empty() {
        return f.write_str("true");
    }
    for (i, a) in action.iter().enumerate() {
        if i > 0 {
            f.write_str(" & ")?;
        }
        write!(f, "({}'=", sys.variable(a.var).1.name)?;
        write_expr(f, sys, &a.value)?;
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for ModuleSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (mi, m) in self.modules.iter().enumerate() {
            if mi > 0 {
                writeln!(f)?;
            }
            writeln!(f, "module {}", m.name)?;
            for v in &m.variables {
                writeln!(f, "  {} : [{}..{}] init {};", v.name, v.low, v.high, v.init)?;
            }
            for c in &m.commands {
                write!(f, "  [{}] ", c.label.as_deref().unwrap_or(""))?;
                write_expr(f, self, &c.guard)?;
                f.write_str(" -> ")?;
                for (i, action) in c.actions.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write_action(f, self, action)?;
                }
                writeln!(f, ";")?;
            }
            writeln!(f, "endmodule")?;
        }
        Ok(())
    }
}
