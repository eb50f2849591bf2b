//! Recursive-descent parser for programs, statements, expressions,
//! domains and memory literals.
//!
//! Operator precedence, loosest to tightest:
//!
//! ```text
//! forall/exists/sum (whole-expression prefix)
//! <=>        (right-assoc)
//! =>         (right-assoc)
//! ||         (left-assoc)
//! &&         (left-assoc)
//! == != < <= > >=   (non-associative)
//! + -        (left-assoc)
//! *          (left-assoc)
//! unary - !
//! postfix m[k] and m[k -> v]
//! ```

use super::lexer::{lex, Spanned, Tok};
use super::{
    Axiom, AxiomBody, DExpr, Decls, Domain, Expr, FunDecl, Program, Quant, Stmt, Type, Value,
    VarDecl,
};
use crate::rat::Rat;
use num::bigint::BigInt;
use std::collections::BTreeMap;
use std::fmt;

/// A parse failure with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

const KEYWORDS: &[&str] = &[
    "var", "fun", "const", "axiom", "in", "skip", "abort", "if", "then", "else", "while", "do",
    "true", "false", "unif", "bern", "mult", "unit", "ite", "ind", "abs", "norm1", "isint",
    "forall", "exists", "sum", "maps", "vecs", "map", "vec", "bool", "int", "rat", "Pr",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct P {
    toks: Vec<Spanned>,
    pos: usize,
    /// Position of the end of input, for EOF errors.
    end: (usize, usize),
}

impl P {
    fn new(src: &str) -> Result<P, ParseError> {
        let toks = lex(src)?;
        let end = toks
            .last()
            .map(|s| (s.line, s.col + s.tok.to_string().len()))
            .unwrap_or((1, 1));
        Ok(P { toks, pos: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected `{want}`, found `{t}`"))
            }
            None => self.err(format!("expected `{want}`, found end of input")),
        }
    }

    /// Consume the given keyword identifier.
    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected `{kw}`, found `{t}`"))
            }
            None => self.err(format!("expected `{kw}`, found end of input")),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    /// A non-keyword identifier (variable, function or axiom name).
    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.err(format!("`{s}` is a reserved word"))
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected a name, found `{t}`"))
            }
            None => self.err("expected a name, found end of input"),
        }
    }

    fn bigint(s: &str) -> BigInt {
        s.parse().expect("lexer produced digits")
    }

    fn rat_tok(&mut self) -> Result<Rat, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Rat(p, q)) => {
                self.pos += 1;
                let den = Self::bigint(&q);
                if den == BigInt::from(0) {
                    return self.err("rational literal has zero denominator");
                }
                Ok(Rat::new(Self::bigint(&p), den))
            }
            Some(Tok::Int(p)) => {
                self.pos += 1;
                Ok(Rat::from_integer(Self::bigint(&p)))
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.rat_tok()?)
            }
            _ => self.err("expected a rational literal"),
        }
    }

    // ---------------------------------------------------------------- values

    /// A literal value: `true`, `3`, `3/4`, `-1`, `[1/2, 1]`, `{0 = 2, ...}`.
    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(Value::Bool(true))
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(Value::Bool(false))
            }
            Some(Tok::Int(_)) | Some(Tok::Rat(..)) | Some(Tok::Minus) => {
                Ok(Value::Rat(self.rat_tok()?))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let mut entries = Vec::new();
                if self.peek() != Some(&Tok::RBracket) {
                    loop {
                        entries.push(self.rat_tok()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RBracket)?;
                Ok(Value::Vect(entries))
            }
            Some(Tok::LBrace) => {
                self.pos += 1;
                let mut m = BTreeMap::new();
                if self.peek() != Some(&Tok::RBrace) {
                    loop {
                        let k = self.value()?;
                        self.expect(&Tok::Eq)?;
                        let v = self.value()?;
                        m.insert(k, v);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RBrace)?;
                Ok(Value::Map(m))
            }
            _ => self.err("expected a literal value"),
        }
    }

    // --------------------------------------------------------------- domains

    fn domain(&mut self) -> Result<Domain, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LBrace) => {
                self.pos += 1;
                let mut vs = Vec::new();
                loop {
                    vs.push(self.value()?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.expect(&Tok::RBrace)?;
                Ok(Domain::Explicit(vs))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let lo = self.int_signed()?;
                self.expect(&Tok::DotDot)?;
                let hi = self.int_signed()?;
                self.expect(&Tok::RBracket)?;
                Ok(Domain::Range(lo, hi))
            }
            Some(Tok::Ident(s)) if s == "maps" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let k = self.domain()?;
                self.expect(&Tok::Comma)?;
                let v = self.domain()?;
                self.expect(&Tok::RParen)?;
                Ok(Domain::Maps(Box::new(k), Box::new(v)))
            }
            Some(Tok::Ident(s)) if s == "vecs" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let n = self.usize_lit()?;
                self.expect(&Tok::Comma)?;
                let d = self.domain()?;
                self.expect(&Tok::RParen)?;
                Ok(Domain::Vecs(n, Box::new(d)))
            }
            _ => self.err("expected a domain: {v, ...}, [lo..hi], maps(..) or vecs(..)"),
        }
    }

    fn int_signed(&mut self) -> Result<BigInt, ParseError> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek().cloned() {
            Some(Tok::Int(s)) => {
                self.pos += 1;
                let n = Self::bigint(&s);
                Ok(if neg { -n } else { n })
            }
            _ => self.err("expected an integer"),
        }
    }

    fn usize_lit(&mut self) -> Result<usize, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(s)) => {
                self.pos += 1;
                s.parse().map_err(|_| {
                    let (line, col) = self.here();
                    ParseError { line, col, msg: format!("integer `{s}` out of range") }
                })
            }
            _ => self.err("expected an integer"),
        }
    }

    // ----------------------------------------------------------------- types

    fn ty(&mut self) -> Result<Type, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "bool" => {
                self.pos += 1;
                Ok(Type::Bool)
            }
            Some(Tok::Ident(s)) if s == "int" => {
                self.pos += 1;
                Ok(Type::Int)
            }
            Some(Tok::Ident(s)) if s == "rat" => {
                self.pos += 1;
                Ok(Type::Rat)
            }
            Some(Tok::Ident(s)) if s == "vec" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let n = self.usize_lit()?;
                self.expect(&Tok::RParen)?;
                Ok(Type::Vec(n))
            }
            Some(Tok::Ident(s)) if s == "map" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let d = self.domain()?;
                self.expect(&Tok::Comma)?;
                let t = self.ty()?;
                self.expect(&Tok::RParen)?;
                Ok(Type::Map(d, Box::new(t)))
            }
            _ => self.err("expected a type: bool, int, rat, vec(n) or map(dom, t)"),
        }
    }

    // ----------------------------------------------------------- expressions

    fn expr(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Ident(s)) = self.peek() {
            let q = match s.as_str() {
                "forall" => Some(Quant::Forall),
                "exists" => Some(Quant::Exists),
                "sum" => Some(Quant::Sum),
                _ => None,
            };
            if let Some(q) = q {
                self.pos += 1;
                let v = self.name()?;
                self.expect_kw("in")?;
                let d = self.domain()?;
                self.expect(&Tok::Dot)?;
                let body = self.expr()?;
                return Ok(Expr::QuantExpr(q, v, d, Box::new(body)));
            }
        }
        self.iff()
    }

    fn iff(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.implies()?;
        if self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.iff()?;
            // a <=> b is sugar for (a => b) && (b => a); keep it primitive
            // as Iff? The grammar stores it as conjunction of implications
            // so downstream code has one less connective to handle.
            Ok(Expr::And(
                Box::new(Expr::Implies(Box::new(lhs.clone()), Box::new(rhs.clone()))),
                Box::new(Expr::Implies(Box::new(rhs), Box::new(lhs))),
            ))
        } else {
            Ok(lhs)
        }
    }

    fn implies(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implies()?;
            Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and()?;
        while self.peek() == Some(&Tok::OrOr) {
            self.pos += 1;
            let rhs = self.and()?;
            e = Expr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.cmp()?;
        while self.peek() == Some(&Tok::AndAnd) {
            self.pos += 1;
            let rhs = self.cmp()?;
            e = Expr::And(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add()?;
        let op = match self.peek() {
            Some(Tok::EqEq) => Some(0),
            Some(Tok::Ne) => Some(1),
            Some(Tok::Lt) => Some(2),
            Some(Tok::Le) => Some(3),
            Some(Tok::Gt) => Some(4),
            Some(Tok::Ge) => Some(5),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let rhs = self.add()?;
            let (l, r) = (Box::new(lhs), Box::new(rhs));
            Ok(match op {
                0 => Expr::Eq(l, r),
                1 => Expr::Ne(l, r),
                2 => Expr::Lt(l, r),
                3 => Expr::Le(l, r),
                4 => Expr::Gt(l, r),
                _ => Expr::Ge(l, r),
            })
        } else {
            Ok(lhs)
        }
    }

    fn add(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.mul()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.mul()?;
                    e = Expr::Add(Box::new(e), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.mul()?;
                    e = Expr::Sub(Box::new(e), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn mul(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let rhs = self.unary()?;
            e = Expr::Mul(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                let e = self.unary()?;
                // Fold minus into numeric literals so `-1/2` parses (and
                // re-prints) as the literal value, not Neg(1/2).
                Ok(match e {
                    Expr::Lit(Value::Rat(r)) => Expr::Lit(Value::Rat(-r)),
                    e => Expr::Neg(Box::new(e)),
                })
            }
            Some(Tok::Bang) => {
                self.pos += 1;
                let e = self.unary()?;
                Ok(Expr::Not(Box::new(e)))
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        while self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            let k = self.expr()?;
            if self.peek() == Some(&Tok::Arrow) {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(&Tok::RBracket)?;
                e = Expr::Update(Box::new(e), Box::new(k), Box::new(v));
            } else {
                self.expect(&Tok::RBracket)?;
                e = Expr::Index(Box::new(e), Box::new(k));
            }
        }
        Ok(e)
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        Ok(args)
    }

    fn builtin1(&mut self, name: &str, mk: fn(Box<Expr>) -> Expr) -> Result<Expr, ParseError> {
        let args = self.call_args()?;
        if args.len() != 1 {
            return self.err(format!("`{name}` takes exactly one argument"));
        }
        Ok(mk(Box::new(args.into_iter().next().unwrap())))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(_)) | Some(Tok::Rat(..)) => Ok(Expr::Lit(self.value()?)),
            Some(Tok::TaggedIdent(x, side)) => {
                self.pos += 1;
                Ok(Expr::Var(x, Some(side)))
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "true" => {
                    self.pos += 1;
                    Ok(Expr::lit_bool(true))
                }
                "false" => {
                    self.pos += 1;
                    Ok(Expr::lit_bool(false))
                }
                "ite" => {
                    self.pos += 1;
                    let args = self.call_args()?;
                    if args.len() != 3 {
                        return self.err("`ite` takes exactly three arguments");
                    }
                    let mut it = args.into_iter();
                    Ok(Expr::Ite(
                        Box::new(it.next().unwrap()),
                        Box::new(it.next().unwrap()),
                        Box::new(it.next().unwrap()),
                    ))
                }
                "ind" => {
                    self.pos += 1;
                    self.builtin1("ind", Expr::Ind)
                }
                "abs" => {
                    self.pos += 1;
                    self.builtin1("abs", Expr::Abs)
                }
                "norm1" => {
                    self.pos += 1;
                    self.builtin1("norm1", Expr::Norm1)
                }
                "isint" => {
                    self.pos += 1;
                    self.builtin1("isint", Expr::IsInt)
                }
                _ if is_keyword(&s) => self.err(format!("`{s}` is a reserved word")),
                _ => {
                    self.pos += 1;
                    if self.peek() == Some(&Tok::LParen) {
                        let args = self.call_args()?;
                        Ok(Expr::Apply(s, args))
                    } else {
                        Ok(Expr::Var(s, None))
                    }
                }
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::LBracket) => {
                // Vector literal.
                self.pos += 1;
                let mut entries = Vec::new();
                if self.peek() != Some(&Tok::RBracket) {
                    loop {
                        entries.push(self.expr()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RBracket)?;
                Ok(Expr::VecLit(entries))
            }
            Some(Tok::LBrace) => {
                // Map literal with literal keys.
                self.pos += 1;
                let mut kvs = Vec::new();
                if self.peek() != Some(&Tok::RBrace) {
                    loop {
                        let k = self.value()?;
                        self.expect(&Tok::Eq)?;
                        let v = self.expr()?;
                        kvs.push((Expr::Lit(k), v));
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RBrace)?;
                Ok(Expr::MapLit(kvs))
            }
            Some(t) => self.err(format!("expected an expression, found `{t}`")),
            None => self.err("expected an expression, found end of input"),
        }
    }

    // ------------------------------------------------------------ statements

    /// Parse `s1; s2; ...` until one of the closers (`}`, `]`, end of
    /// input). A trailing `;` before the closer is tolerated.
    fn stmt_seq(&mut self) -> Result<Stmt, ParseError> {
        let mut items = vec![self.stmt_base()?];
        while self.peek() == Some(&Tok::Semi) {
            self.pos += 1;
            match self.peek() {
                None | Some(Tok::RBrace) | Some(Tok::RBracket) => break,
                _ => items.push(self.stmt_base()?),
            }
        }
        Ok(Stmt::seq(items))
    }

    fn block(&mut self) -> Result<Stmt, ParseError> {
        self.expect(&Tok::LBrace)?;
        let s = self.stmt_seq()?;
        self.expect(&Tok::RBrace)?;
        Ok(s)
    }

    fn stmt_base(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "skip" => {
                self.pos += 1;
                Ok(Stmt::Skip)
            }
            Some(Tok::Ident(s)) if s == "abort" => {
                self.pos += 1;
                Ok(Stmt::Abort)
            }
            Some(Tok::Ident(s)) if s == "if" => {
                self.pos += 1;
                let cond = self.expr()?;
                self.expect_kw("then")?;
                let th = self.block()?;
                self.expect_kw("else")?;
                let el = self.block()?;
                Ok(Stmt::If(cond, Box::new(th), Box::new(el)))
            }
            Some(Tok::Ident(s)) if s == "while" => {
                self.pos += 1;
                let cond = self.expr()?;
                self.expect_kw("do")?;
                let body = self.block()?;
                Ok(Stmt::While(cond, Box::new(body)))
            }
            Some(Tok::Ident(_)) => {
                let x = self.name()?;
                match self.peek() {
                    Some(Tok::Assign) => {
                        self.pos += 1;
                        let e = self.expr()?;
                        Ok(Stmt::Assign(x, e))
                    }
                    Some(Tok::SampleOp) => {
                        self.pos += 1;
                        let d = self.dexpr()?;
                        Ok(Stmt::Sample(x, d))
                    }
                    _ => self.err("expected `<-` or `<$` after variable name"),
                }
            }
            Some(t) => self.err(format!("expected a statement, found `{t}`")),
            None => self.err("expected a statement, found end of input"),
        }
    }

    fn dexpr(&mut self) -> Result<DExpr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "unif" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let d = self.domain()?;
                self.expect(&Tok::RParen)?;
                Ok(DExpr::Unif(d))
            }
            Some(Tok::Ident(s)) if s == "bern" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(DExpr::Bern(e))
            }
            Some(Tok::Ident(s)) if s == "mult" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(DExpr::Mult(e))
            }
            Some(Tok::Ident(s)) if s == "unit" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(DExpr::Unit(e))
            }
            _ => self.err("expected a distribution: unif(..), bern(..), mult(..) or unit(..)"),
        }
    }

    // ---------------------------------------------------------- declarations

    fn decl(&mut self, decls: &mut Decls) -> Result<(), ParseError> {
        if self.at_kw("var") {
            self.pos += 1;
            let name = self.name()?;
            self.expect(&Tok::Colon)?;
            let ty = self.ty()?;
            let domain = if self.at_kw("in") {
                self.pos += 1;
                Some(self.domain()?)
            } else {
                None
            };
            self.expect(&Tok::Semi)?;
            if decls.var(&name).is_some() {
                return self.err(format!("variable `{name}` declared twice"));
            }
            decls.vars.push(VarDecl { name, ty, domain });
            Ok(())
        } else if self.at_kw("fun") {
            self.pos += 1;
            let name = self.name()?;
            self.expect(&Tok::LParen)?;
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.ty()?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::Colon)?;
            let ret = self.ty()?;
            self.expect(&Tok::Semi)?;
            decls.funs.push(FunDecl { name, args, ret });
            Ok(())
        } else if self.at_kw("const") {
            self.pos += 1;
            let name = self.name()?;
            self.expect(&Tok::Eq)?;
            let r = self.rat_tok()?;
            self.expect(&Tok::Semi)?;
            decls.consts.push((name, r));
            Ok(())
        } else if self.at_kw("axiom") {
            self.pos += 1;
            let name = self.name()?;
            self.expect(&Tok::Colon)?;
            let body = if self.at_kw("Pr") {
                self.pos += 1;
                self.expect(&Tok::LBracket)?;
                let stmt = self.stmt_seq()?;
                self.expect(&Tok::RBracket)?;
                self.expect(&Tok::LBracket)?;
                let guard = self.expr()?;
                self.expect(&Tok::RBracket)?;
                self.expect(&Tok::Eq)?;
                let prob = self.rat_tok()?;
                AxiomBody::Prob { stmt, guard, prob }
            } else {
                AxiomBody::Rel(self.expr()?)
            };
            self.expect(&Tok::Semi)?;
            if decls.axiom(&name).is_some() {
                return self.err(format!("axiom `{name}` declared twice"));
            }
            decls.axioms.push(Axiom { name, body });
            Ok(())
        } else {
            self.err("expected a declaration")
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut decls = Decls::default();
        while self.at_kw("var") || self.at_kw("fun") || self.at_kw("const") || self.at_kw("axiom")
        {
            self.decl(&mut decls)?;
        }
        let body = self.stmt_seq()?;
        if self.peek().is_some() {
            let t = self.peek().unwrap().clone();
            return self.err(format!("unexpected `{t}` after program"));
        }
        Ok(Program { decls, body })
    }
}

/// Parse a full program file: declarations followed by one statement.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    P::new(src)?.program()
}

/// Parse a statement (no declarations).
pub fn parse_stmt(src: &str) -> Result<Stmt, ParseError> {
    let mut p = P::new(src)?;
    let s = p.stmt_seq()?;
    if p.peek().is_some() {
        return p.err("unexpected input after statement");
    }
    Ok(s)
}

/// Parse an expression; tagged variables (`x<1>`, `x<2>`) are allowed, so
/// this covers both program expressions and relational assertions.
pub fn parse_rel_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = P::new(src)?;
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected input after expression");
    }
    Ok(e)
}

/// Parse a domain in isolation (used by command-line arguments).
pub fn parse_domain(src: &str) -> Result<Domain, ParseError> {
    let mut p = P::new(src)?;
    let d = p.domain()?;
    if p.peek().is_some() {
        return p.err("unexpected input after domain");
    }
    Ok(d)
}

/// Parse a memory literal `{x = v, y = v, ...}` into name/value pairs.
pub fn parse_memory_literal(src: &str) -> Result<Vec<(String, Value)>, ParseError> {
    let mut p = P::new(src)?;
    p.expect(&Tok::LBrace)?;
    let mut out = Vec::new();
    if p.peek() != Some(&Tok::RBrace) {
        loop {
            let name = p.name()?;
            p.expect(&Tok::Eq)?;
            let v = p.value()?;
            out.push((name, v));
            if p.peek() == Some(&Tok::Comma) {
                p.pos += 1;
            } else {
                break;
            }
        }
    }
    p.expect(&Tok::RBrace)?;
    if p.peek().is_some() {
        return p.err("unexpected input after memory literal");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn parses_assignment_and_sampling() {
        let s = parse_stmt("x <- x + 1; b <$ bern(1/3)").unwrap();
        match s {
            Stmt::Seq(a, b) => {
                assert!(matches!(*a, Stmt::Assign(..)));
                assert!(matches!(*b, Stmt::Sample(..)));
            }
            _ => panic!("expected seq"),
        }
    }

    #[test]
    fn parses_if_while() {
        let s = parse_stmt(
            "i <- 0; while i < 3 do { if b then { x <- 1 } else { skip }; i <- i + 1 }",
        )
        .unwrap();
        assert!(s.has_loop());
        assert_eq!(
            s.modified_vars().into_iter().collect::<Vec<_>>(),
            vec!["i".to_string(), "x".to_string()]
        );
    }

    #[test]
    fn tagged_vars_only_via_tight_lexing() {
        let e = parse_rel_expr("x<1> == x<2> && x < 2").unwrap();
        assert_eq!(
            e.free_tagged_vars().len(),
            2,
            "both sides of the equality are tagged"
        );
        assert!(e.free_plain_vars().contains("x"));
    }

    #[test]
    fn rational_literals() {
        let e = parse_rel_expr("14/15 * d + 0/1").unwrap();
        match e {
            Expr::Add(l, _) => match *l {
                Expr::Mul(c, _) => assert_eq!(*c, Expr::lit_rat(rat(14, 15))),
                _ => panic!("expected mul"),
            },
            _ => panic!("expected add"),
        }
    }

    #[test]
    fn update_and_index() {
        let e = parse_rel_expr("w[v -> c][z]").unwrap();
        assert!(matches!(e, Expr::Index(..)));
    }

    #[test]
    fn quantifier_and_sum() {
        let e = parse_rel_expr("sum z in [0..2] . ind(w<1>[z] != w<2>[z])").unwrap();
        assert!(matches!(e, Expr::QuantExpr(Quant::Sum, ..)));
        let f = parse_rel_expr("forall u in {0, 1} . u == u").unwrap();
        assert!(matches!(f, Expr::QuantExpr(Quant::Forall, ..)));
    }

    #[test]
    fn program_with_decls() {
        let src = "\
var w : map([0..2], int) in maps([0..2], [0..4]);
var i : int in [0..3];
const beta = 14/15;
fun valid(map([0..2], int), int, int) : bool;
axiom nonneg : forall u in [0..2] . u >= 0;
axiom hit : Pr[ j <$ unif([0..9]) ][ j == 0 ] = 1/10;

i <- 0;
while i < 3 do { i <- i + 1 }
";
        let p = parse_program(src).unwrap();
        assert_eq!(p.decls.vars.len(), 2);
        assert_eq!(p.decls.consts.len(), 1);
        assert_eq!(p.decls.funs.len(), 1);
        assert_eq!(p.decls.axioms.len(), 2);
        assert!(matches!(
            p.decls.axiom("hit").unwrap().body,
            AxiomBody::Prob { .. }
        ));
        assert!(p.body.has_loop());
    }

    #[test]
    fn memory_literals_round() {
        let m = parse_memory_literal("{x = 1, w = {0 = 2, 1 = 0}, p = [1/2, 1/2]}").unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].0, "x");
        assert_eq!(m[0].1, Value::int(1));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_program("var x : int;\nx <- ;").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
