use std::collections::HashSet;

use super::lexer::{tokenize, Tok};
use super::{
    Action, Assignment, BinaryOp, Command, Expr, Module, ModuleSystem, ParseError, ParseErrorKind,
    Pos, UnaryOp, Variable,
};

#[derive(Clone, Debug)]
enum RawExpr {
    Int(i64),
    Bool(bool),
    Var(String, Pos),
    Unary(UnaryOp, Box<RawExpr>, Pos),
    Binary(BinaryOp, Box<RawExpr>, Box<RawExpr>, Pos),
}

struct RawAssignment {
    var: String,
    pos: Pos,
    value: RawExpr,
}

struct RawCommand {
    label: Option<String>,
    guard: RawExpr,
    actions: Vec<Vec<RawAssignment>>,
}

struct RawModule {
    name: String,
    pos: Pos,
    variables: Vec<(Variable, Pos)>,
    commands: Vec<RawCommand>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

fn err(pos: Pos, kind: ParseErrorKind) -> ParseError {
    ParseError { pos, kind }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        err(
            self.pos(),
            ParseErrorKind::Syntax(format!(
                "expected {wanted}, found {}",
                self.peek().describe()
            )),
        )
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.bump().1;
                Ok((name, pos))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let negative = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn system(&mut self) -> Result<Vec<RawModule>, ParseError> {
        let mut modules = Vec::new();
        while *self.peek() != Tok::Eof {
            modules.push(self.module()?);
        }
        Ok(modules)
    }

    fn module(&mut self) -> Result<RawModule, ParseError> {
        self.expect(Tok::Module, "`module`")?;
        let (name, pos) = self.ident()?;
        let mut variables = Vec::new();
        let mut commands = Vec::new();
        loop {
            match self.peek() {
                Tok::EndModule => {
                    self.bump();
                    break;
                }
                Tok::Ident(_) if *self.peek_at(1) == Tok::Colon => variables.push(self.variable()?),
                Tok::Eof => return Err(self.unexpected("`endmodule`")),
                _ => commands.push(self.command()?),
            }
        }
        Ok(RawModule {
            name,
            pos,
            variables,
            commands,
        })
    }

    fn variable(&mut self) -> Result<(Variable, Pos), ParseError> {
        let (name, pos) = self.ident()?;
        self.expect(Tok::Colon, "`:`")?;
        self.expect(Tok::LBracket, "`[`")?;
        let low = self.signed_int()?;
        self.expect(Tok::DotDot, "`..`")?;
        let high = self.signed_int()?;
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::Init, "`init`")?;
        let init = self.signed_int()?;
        self.expect(Tok::Semi, "`;`")?;
        if low > high {
            return Err(err(
                pos,
                ParseErrorKind::EmptyRange {
                    variable: name,
                    low,
                    high,
                },
            ));
        }
        if init < low || init > high {
            return Err(err(
                pos,
                ParseErrorKind::RangeViolation {
                    variable: name,
                    init,
                    low,
                    high,
                },
            ));
        }
        Ok((
            Variable {
                name,
                low,
                high,
                init,
            },
            pos,
        ))
    }

    fn command(&mut self) -> Result<RawCommand, ParseError> {
        let mut label = None;
        if self.eat(&Tok::LBracket) {
            if let Tok::Ident(_) = self.peek() {
                label = Some(self.ident()?.0);
            }
            self.expect(Tok::RBracket, "`]`")?;
        }
        let guard = self.or_expr()?;
        self.expect(Tok::Arrow, "`->`")?;
        let mut actions = vec![self.action()?];
        while self.eat(&Tok::Plus) {
            actions.push(self.action()?);
        }
        self.expect(Tok::Semi, "`;`")?;
        Ok(RawCommand {
            label,
            guard,
            actions,
        })
    }

    fn action(&mut self) -> Result<Vec<RawAssignment>, ParseError> {
        if self.eat(&Tok::True) {
            return Ok(Vec::new());
        }
        let mut out = vec![self.assignment()?];
        while self.eat(&Tok::And) {
            out.push(self.assignment()?);
        }
        Ok(out)
    }

    fn assignment(&mut self) -> Result<RawAssignment, ParseError> {
        let parenthesized = self.eat(&Tok::LParen);
        let (var, pos) = self.ident()?;
        self.expect(Tok::Prime, "`'`")?;
        self.expect(Tok::Eq, "`=`")?;
        let value = if parenthesized {
            self.or_expr()?
        } else {
            self.add_expr(true)?
        };
        if parenthesized {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(RawAssignment { var, pos, value })
    }

    /// Whether the `+` at the cursor separates two action alternatives.
    fn plus_starts_alternative(&self) -> bool {
        matches!(
            (self.peek_at(1), self.peek_at(2), self.peek_at(3)),
            (Tok::True, _, _)
                | (Tok::Ident(_), Tok::Prime, _)
                | (Tok::LParen, Tok::Ident(_), Tok::Prime)
        )
    }

    fn or_expr(&mut self) -> Result<RawExpr, ParseError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Or {
            let pos = self.bump().1;
            let rhs = self.and_expr()?;
            lhs = RawExpr::Binary(BinaryOp::Or, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<RawExpr, ParseError> {
        let mut lhs = self.not_expr()?;
        while *self.peek() == Tok::And {
            let pos = self.bump().1;
            let rhs = self.not_expr()?;
            lhs = RawExpr::Binary(BinaryOp::And, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<RawExpr, ParseError> {
        if *self.peek() == Tok::Not {
            let pos = self.bump().1;
            let inner = self.not_expr()?;
            return Ok(RawExpr::Unary(UnaryOp::Not, Box::new(inner), pos));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<RawExpr, ParseError> {
        let lhs = self.add_expr(false)?;
        let op = match self.peek() {
            Tok::Eq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            _ => return Ok(lhs),
        };
        let pos = self.bump().1;
        let rhs = self.add_expr(false)?;
        Ok(RawExpr::Binary(op, Box::new(lhs), Box::new(rhs), pos))
    }

    /// `in_action` stops before a `+` that begins the next alternative.
    fn add_expr(&mut self, in_action: bool) -> Result<RawExpr, ParseError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus if in_action && self.plus_starts_alternative() => break,
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => break,
            };
            let pos = self.bump().1;
            let rhs = self.mul_expr()?;
            lhs = RawExpr::Binary(op, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> Result<RawExpr, ParseError> {
        let mut lhs = self.unary_expr()?;
        while *self.peek() == Tok::Star {
            let pos = self.bump().1;
            let rhs = self.unary_expr()?;
            lhs = RawExpr::Binary(BinaryOp::Mul, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<RawExpr, ParseError> {
        if *self.peek() == Tok::Minus {
            let pos = self.bump().1;
            if let Tok::Int(v) = *self.peek() {
                self.bump();
                return Ok(RawExpr::Int(-v));
            }
            let inner = self.unary_expr()?;
            return Ok(RawExpr::Unary(UnaryOp::Neg, Box::new(inner), pos));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<RawExpr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(RawExpr::Int(v))
            }
            Tok::True => {
                self.bump();
                Ok(RawExpr::Bool(true))
            }
            Tok::False => {
                self.bump();
                Ok(RawExpr::Bool(false))
            }
            Tok::Ident(name) => {
                let pos = self.bump().1;
                Ok(RawExpr::Var(name, pos))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.or_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Int => "integer",
            Ty::Bool => "boolean",
        }
    }
}

fn expr_pos(e: &RawExpr) -> Pos {
    match e {
        RawExpr::Var(_, p) | RawExpr::Unary(_, _, p) | RawExpr::Binary(_, _, _, p) => *p,
        RawExpr::Int(_) | RawExpr::Bool(_) => Pos::default(),
    }
}

fn resolve(
    sys: &ModuleSystem,
    module: Option<usize>,
    e: &RawExpr,
) -> Result<(Expr, Ty), ParseError> {
    let type_error = |pos: Pos, msg: String| err(pos, ParseErrorKind::Type(msg));
    let want = |got: Ty, want: Ty, pos: Pos, what: &str| {
        if got == want {
            Ok(())
        } else {
            Err(type_error(
                pos,
                format!(
                    "{what} expects {} operands, found {}",
                    want.name(),
                    got.name()
                ),
            ))
        }
    };
    Ok(match e {
        RawExpr::Int(v) => (Expr::Int(*v), Ty::Int),
        RawExpr::Bool(b) => (Expr::Bool(*b), Ty::Bool),
        RawExpr::Var(name, pos) => {
            let v = sys.lookup(name, module).map_err(|k| err(*pos, k))?;
            (Expr::Var(v), Ty::Int)
        }
        RawExpr::Unary(op, inner, pos) => {
            let (inner, ty) = resolve(sys, module, inner)?;
            let expected = match op {
                UnaryOp::Not => Ty::Bool,
                UnaryOp::Neg => Ty::Int,
            };
            want(
                ty,
                expected,
                *pos,
                if *op == UnaryOp::Not { "`!`" } else { "`-`" },
            )?;
            (Expr::Unary(*op, Box::new(inner)), expected)
        }
        RawExpr::Binary(op, l, r, pos) => {
            let (l, lt) = resolve(sys, module, l)?;
            let (r, rt) = resolve(sys, module, r)?;
            let what = format!("`{}`", op.symbol());
            let ty = match op {
                BinaryOp::Or | BinaryOp::And => {
                    want(lt, Ty::Bool, *pos, &what)?;
                    want(rt, Ty::Bool, *pos, &what)?;
                    Ty::Bool
                }
                BinaryOp::Eq | BinaryOp::Ne => {
                    if lt != rt {
                        return Err(type_error(
                            *pos,
                            format!("{what} compares {} with {}", lt.name(), rt.name()),
                        ));
                    }
                    Ty::Bool
                }
                BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                    want(lt, Ty::Int, *pos, &what)?;
                    want(rt, Ty::Int, *pos, &what)?;
                    Ty::Bool
                }
                BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => {
                    want(lt, Ty::Int, *pos, &what)?;
                    want(rt, Ty::Int, *pos, &what)?;
                    Ty::Int
                }
            };
            (Expr::Binary(*op, Box::new(l), Box::new(r)), ty)
        }
    })
}

/// Parses a system of modules.
pub fn parse_system(source: &str) -> Result<ModuleSystem, ParseError> {
    let mut parser = Parser {
        toks: tokenize(source)?,
        at: 0,
    };
    let raw = parser.system()?;

    // declarations first, so guards may read variables of later modules
    let mut sys = ModuleSystem {
        modules: Vec::with_capacity(raw.len()),
    };
    let mut module_names = HashSet::new();
    for m in &raw {
        if !module_names.insert(m.name.as_str()) {
            return Err(err(m.pos, ParseErrorKind::DuplicateModule(m.name.clone())));
        }
        let mut names = HashSet::new();
        for (v, pos) in &m.variables {
            if !names.insert(v.name.as_str()) {
                return Err(err(*pos, ParseErrorKind::DuplicateVariable(v.name.clone())));
            }
        }
        sys.modules.push(Module {
            name: m.name.clone(),
            variables: m.variables.iter().map(|(v, _)| v.clone()).collect(),
            commands: Vec::new(),
        });
    }

    for (mi, m) in raw.iter().enumerate() {
        let offset = sys.offset(mi);
        let local_count = m.variables.len();
        let mut commands = Vec::with_capacity(m.commands.len());
        for c in &m.commands {
            let (guard, ty) = resolve(&sys, Some(mi), &c.guard)?;
            if ty != Ty::Bool {
                return Err(err(
                    expr_pos(&c.guard),
                    ParseErrorKind::Type("guard must be boolean".into()),
                ));
            }
            let mut actions: Vec<Action> = Vec::with_capacity(c.actions.len());
            for alt in &c.actions {
                let mut action = Vec::with_capacity(alt.len());
                for a in alt {
                    let var = sys.lookup(&a.var, Some(mi)).map_err(|k| err(a.pos, k))?;
                    if var < offset || var >= offset + local_count {
                        return Err(err(
                            a.pos,
                            ParseErrorKind::ForeignAssignment {
                                variable: a.var.clone(),
                                module: m.name.clone(),
                            },
                        ));
                    }
                    let (value, ty) = resolve(&sys, Some(mi), &a.value)?;
                    if ty != Ty::Int {
                        return Err(err(
                            a.pos,
                            ParseErrorKind::Type(format!("`{}'` needs an integer value", a.var)),
                        ));
                    }
                    action.push(Assignment { var, value });
                }
                actions.push(action);
            }
            commands.push(Command {
                label: c.label.clone(),
                guard,
                actions,
            });
        }
        sys.modules[mi].commands = commands;
    }
    Ok(sys)
}

/// Parses a boolean expression over the variables of `sys`, e.g. a verdict
/// predicate. Names are looked up in `module` first when given.
pub fn parse_expr(
    sys: &ModuleSystem,
    source: &str,
    module: Option<usize>,
) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        toks: tokenize(source)?,
        at: 0,
    };
    let raw = parser.or_expr()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.unexpected("end of expression"));
    }
    let (expr, ty) = resolve(sys, module, &raw)?;
    if ty != Ty::Bool {
        return Err(err(
            Pos { line: 1, column: 1 },
            ParseErrorKind::Type("expected a boolean expression".into()),
        ));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;

    const TIMERS: &str = "module timer
t : [0..1] init 0;
[tic] t=0 -> t'=1;
[tac] t=1 -> t'=0;
endmodule
module on_tic
state1 : [0..1000] init 0;
[tic] state1<1000 -> state1'=(state1+2);
[tic] state1>=1000 -> state1'=0;
endmodule
module on_tac
state2 : [1..1001] init 1;
[tac] state2<1001 -> state2'=(state2+2);
[tac] state2>=1001 -> state2'=1;
endmodule
";

    fn kind(src: &str) -> ParseErrorKind {
        parse_system(src).unwrap_err().kind
    }

    #[test]
    fn three_timers() {
        let sys = parse_system(TIMERS).unwrap();
        assert_eq!(sys.modules.len(), 3);
        let labels: Vec<String> = sys.sync_labels().into_iter().collect();
        assert_eq!(labels, vec!["tac", "tic"]);
        let ranges: Vec<(&str, i64, i64)> = (0..3)
            .map(|v| {
                let var = sys.variable(v).1;
                (var.name.as_str(), var.low, var.high)
            })
            .collect();
        assert_eq!(
            ranges,
            vec![("t", 0, 1), ("state1", 0, 1000), ("state2", 1, 1001)]
        );
        let c = &sys.modules[1].commands[0];
        assert_eq!(c.label.as_deref(), Some("tic"));
        assert_eq!(
            c.actions[0][0].value,
            Expr::Binary(
                BinaryOp::Add,
                Box::new(Expr::Var(1)),
                Box::new(Expr::Int(2))
            )
        );
    }

    #[test]
    fn empty_module() {
        let sys = parse_system("module m v : [0..0] init 0; endmodule").unwrap();
        assert_eq!(sys.modules.len(), 1);
        assert!(sys.modules[0].commands.is_empty());
    }

    #[test]
    fn init_outside_range() {
        assert!(matches!(
            kind("module m v : [0..1] init 5; endmodule"),
            ParseErrorKind::RangeViolation { init: 5, .. }
        ));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_system("module m\n  v : [0..1] init 0\nendmodule").unwrap_err();
        assert_eq!(err.pos, Pos { line: 3, column: 1 });
        assert!(err.to_string().starts_with("line 3, column 1"));
    }

    #[test]
    fn name_errors() {
        assert_eq!(
            kind("module m v : [0..1] init 0; v : [0..2] init 0; endmodule"),
            ParseErrorKind::DuplicateVariable("v".into())
        );
        assert_eq!(
            kind("module m v : [0..1] init 0; w=0 -> v'=1; endmodule"),
            ParseErrorKind::UndeclaredVariable("w".into())
        );
        assert_eq!(
            kind("module m endmodule module m endmodule"),
            ParseErrorKind::DuplicateModule("m".into())
        );
        assert!(matches!(
            kind("module a x : [0..1] init 0; endmodule module b y : [0..1] init 0; true -> x'=1; endmodule"),
            ParseErrorKind::ForeignAssignment { .. }
        ));
    }

    #[test]
    fn type_errors() {
        assert!(matches!(
            kind("module m v : [0..1] init 0; v+1 -> v'=1; endmodule"),
            ParseErrorKind::Type(_)
        ));
        assert!(matches!(
            kind("module m v : [0..1] init 0; true -> v'=(v<1); endmodule"),
            ParseErrorKind::Type(_)
        ));
    }

    #[test]
    fn plus_separates_alternatives_only_before_an_update() {
        let sys = parse_system(
            "module m v : [0..9] init 0; true -> v'=v+1 + v'=v+2 + true + (v'=3); endmodule",
        )
        .unwrap();
        let c = &sys.modules[0].commands[0];
        assert_eq!(c.actions.len(), 4);
        assert!(c.actions[2].is_empty());
    }

    #[test]
    fn guards_may_read_later_modules() {
        let sys = parse_system("module a x : [0..1] init 0; y=1 -> x'=1; endmodule module b y : [0..1] init 0; endmodule")
            .unwrap();
        assert_eq!(
            sys.modules[0].commands[0].guard,
            Expr::Binary(BinaryOp::Eq, Box::new(Expr::Var(1)), Box::new(Expr::Int(1)))
        );
    }

    #[test]
    fn print_then_parse() {
        let sys = parse_system(TIMERS).unwrap();
        let again = parse_system(&sys.to_string()).unwrap();
        assert_eq!(sys, again);
    }

    #[test]
    fn standalone_expression() {
        let sys = parse_system(TIMERS).unwrap();
        let e = parse_expr(&sys, "state1 = 1000 & !(t = 1)", None).unwrap();
        let mut vars = BTreeSet::new();
        e.variables(&mut vars);
        assert_eq!(vars.into_iter().collect::<Vec<_>>(), vec![0, 1]);
        assert!(parse_expr(&sys, "state1 + 1", None).is_err());
    }

    fn int_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-50i64..50).prop_map(Expr::Int),
            (0usize..2).prop_map(Expr::Var)
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner
                    .clone()
                    .prop_map(|e| Expr::Unary(UnaryOp::Neg, Box::new(e))),
                (
                    inner.clone(),
                    inner,
                    prop_oneof![
                        Just(BinaryOp::Add),
                        Just(BinaryOp::Sub),
                        Just(BinaryOp::Mul)
                    ]
                )
                    .prop_map(|(l, r, op)| Expr::Binary(
                        op,
                        Box::new(l),
                        Box::new(r)
                    )),
            ]
        })
    }

    fn bool_expr() -> impl Strategy<Value = Expr> {
        let cmp = (
            int_expr(),
            int_expr(),
            prop_oneof![
                Just(BinaryOp::Eq),
                Just(BinaryOp::Ne),
                Just(BinaryOp::Lt),
                Just(BinaryOp::Le),
                Just(BinaryOp::Gt),
                Just(BinaryOp::Ge)
            ],
        )
            .prop_map(|(l, r, op)| Expr::Binary(op, Box::new(l), Box::new(r)));
        let leaf = prop_oneof![any::<bool>().prop_map(Expr::Bool), cmp];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                inner
                    .clone()
                    .prop_map(|e| Expr::Unary(UnaryOp::Not, Box::new(e))),
                (
                    inner.clone(),
                    inner,
                    prop_oneof![Just(BinaryOp::And), Just(BinaryOp::Or)]
                )
                    .prop_map(|(l, r, op)| Expr::Binary(
                        op,
                        Box::new(l),
                        Box::new(r)
                    )),
            ]
        })
    }

    proptest! {
        #[test]
        fn printed_systems_reparse(guard in bool_expr(), a in int_expr(), b in int_expr()) {
            let sys = ModuleSystem {
                modules: vec![Module {
                    name: "m".into(),
                    variables: vec![
                        Variable { name: "x".into(), low: -5, high: 5, init: 0 },
                        Variable { name: "y".into(), low: 0, high: 3, init: 1 },
                    ],
                    commands: vec![Command {
                        label: Some("go".into()),
                        guard,
                        actions: vec![
                            vec![Assignment { var: 0, value: a }, Assignment { var: 1, value: b.clone() }],
                            vec![],
                            vec![Assignment { var: 1, value: b }],
                        ],
                    }],
                }],
            };
            let text = sys.to_string();
            prop_assert_eq!(parse_system(&text).unwrap(), sys, "{}", text);
        }
    }
}
