//! A small expression language for attribute evaluators and rule predicates.
//!
//! ```text
//! expr    := or
//! or      := and ("||" and)*
//! and     := cmp ("&&" cmp)*
//! cmp     := sum (("<=" | ">=" | "<" | ">" | "==" | "!=") sum)?
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := ("-" | "!") unary | atom
//! atom    := number | "string" | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Built-in functions: `sum`, `min`, `max`, `abs`, `if(cond, then, else)`.
//! Booleans are numbers (`1` true, `0` false). Labels only support `==`/`!=`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A variable or attribute value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Label(String),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            Value::Label(_) => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Value::Label(s) => Some(s),
            Value::Num(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) if x.fract() == 0.0 && x.abs() < 1e15 => write!(f, "{}", *x as i64),
            Value::Num(x) => write!(f, "{x}"),
            Value::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Label(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Str(String),
    Var(String),
    Neg(Box<Node>),
    Not(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(String, Vec<Node>),
}

/// A parsed expression. Serializes as its source text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Expr {
    source: String,
    root: Node,
}

impl TryFrom<String> for Expr {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Expr::parse(&s)
    }
}

impl From<Expr> for String {
    fn from(e: Expr) -> String {
        e.source
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Str(String),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number `{text}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            if i == chars.len() {
                return Err(Error::Expression("unterminated string literal".into()));
            }
            out.push(Tok::Str(chars[start..i].iter().collect()));
            i += 1;
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let op = ["<=", ">=", "==", "!=", "&&", "||"].into_iter().find(|o| *o == two);
            if let Some(op) = op {
                out.push(Tok::Op(op));
                i += 2;
                continue;
            }
            let tok = match c {
                '+' => Tok::Op("+"),
                '-' => Tok::Op("-"),
                '*' => Tok::Op("*"),
                '/' => Tok::Op("/"),
                '<' => Tok::Op("<"),
                '>' => Tok::Op(">"),
                '!' => Tok::Op("!"),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                other => return Err(Error::Expression(format!("unexpected character `{other}`"))),
            };
            out.push(tok);
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, ops: &[&'static str]) -> Option<&'static str> {
        if let Some(Tok::Op(o)) = self.peek() {
            if let Some(found) = ops.iter().find(|x| *x == o) {
                self.pos += 1;
                return Some(found);
            }
        }
        None
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expression(format!("expected {t:?}, found {:?}", self.peek())))
        }
    }

    fn or(&mut self) -> Result<Node> {
        let mut lhs = self.and()?;
        while self.eat_op(&["||"]).is_some() {
            lhs = Node::Bin(BinOp::Or, Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Node> {
        let mut lhs = self.cmp()?;
        while self.eat_op(&["&&"]).is_some() {
            lhs = Node::Bin(BinOp::And, Box::new(lhs), Box::new(self.cmp()?));
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Node> {
        let lhs = self.sum()?;
        let op = match self.eat_op(&["<=", ">=", "<", ">", "==", "!="]) {
            Some("<=") => BinOp::Le,
            Some(">=") => BinOp::Ge,
            Some("<") => BinOp::Lt,
            Some(">") => BinOp::Gt,
            Some("==") => BinOp::Eq,
            Some("!=") => BinOp::Ne,
            _ => return Ok(lhs),
        };
        Ok(Node::Bin(op, Box::new(lhs), Box::new(self.sum()?)))
    }

    fn sum(&mut self) -> Result<Node> {
        let mut lhs = self.product()?;
        while let Some(op) = self.eat_op(&["+", "-"]) {
            let op = if op == "+" { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&["*", "/"]) {
            let op = if op == "*" { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.eat_op(&["-", "!"]) {
            Some("-") => Ok(Node::Neg(Box::new(self.unary()?))),
            Some(_) => Ok(Node::Not(Box::new(self.unary()?))),
            None => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Expression("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Str(s) => Ok(Node::Str(s)),
            Tok::LParen => {
                let e = self.or()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        args.push(self.or()?);
                        while self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                            args.push(self.or()?);
                        }
                    }
                    self.expect(Tok::RParen)?;
                    check_call(&name, args.len())?;
                    Ok(Node::Call(name, args))
                } else {
                    Ok(Node::Var(name))
                }
            }
            other => Err(Error::Expression(format!("unexpected token {other:?}"))),
        }
    }
}

fn check_call(name: &str, argc: usize) -> Result<()> {
    let ok = match name {
        "sum" | "min" | "max" => argc >= 1,
        "abs" => argc == 1,
        "if" => argc == 3,
        _ => return Err(Error::Expression(format!("unknown function `{name}`"))),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Expression(format!("wrong number of arguments to `{name}`")))
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { toks: tokenize(src)?, pos: 0 };
        let root = p.or()?;
        if p.pos != p.toks.len() {
            return Err(Error::Expression(format!("trailing input in `{src}`")));
        }
        Ok(Expr { source: src.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Names of every variable the expression reads.
    pub fn variables(&self) -> Vec<String> {
        fn walk(n: &Node, out: &mut Vec<String>) {
            match n {
                Node::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone())
                    }
                }
                Node::Neg(a) | Node::Not(a) => walk(a, out),
                Node::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::Call(_, args) => args.iter().for_each(|a| walk(a, out)),
                Node::Num(_) | Node::Str(_) => {}
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    pub fn eval(&self, env: &BTreeMap<String, Value>) -> Result<Value> {
        eval(&self.root, &|name| env.get(name).cloned())
    }

    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<Value>) -> Result<Value> {
        eval(&self.root, lookup)
    }

    pub fn eval_bool(&self, env: &BTreeMap<String, Value>) -> Result<bool> {
        match self.eval(env)? {
            Value::Num(x) => Ok(x != 0.0),
            Value::Label(l) => Err(Error::Expression(format!("label `{l}` used as a condition"))),
        }
    }
}

fn num(v: Value, ctx: &str) -> Result<f64> {
    v.as_num()
        .ok_or_else(|| Error::Expression(format!("`{ctx}` needs a number, got label `{v}`")))
}

fn truth(b: bool) -> Value {
    Value::Num(if b { 1.0 } else { 0.0 })
}

fn eval(n: &Node, lookup: &dyn Fn(&str) -> Option<Value>) -> Result<Value> {
    match n {
        Node::Num(v) => Ok(Value::Num(*v)),
        Node::Str(s) => Ok(Value::Label(s.clone())),
        Node::Var(name) => lookup(name)
            .ok_or_else(|| Error::EvaluationFailure(format!("unbound variable `{name}`"))),
        Node::Neg(a) => Ok(Value::Num(-num(eval(a, lookup)?, "-")?)),
        Node::Not(a) => Ok(truth(num(eval(a, lookup)?, "!")? == 0.0)),
        Node::Bin(op, a, b) => {
            let (x, y) = (eval(a, lookup)?, eval(b, lookup)?);
            match op {
                BinOp::Eq => Ok(truth(x == y)),
                BinOp::Ne => Ok(truth(x != y)),
                _ => {
                    let (x, y) = (num(x, "arithmetic")?, num(y, "arithmetic")?);
                    Ok(match op {
                        BinOp::Add => Value::Num(x + y),
                        BinOp::Sub => Value::Num(x - y),
                        BinOp::Mul => Value::Num(x * y),
                        BinOp::Div => {
                            if y == 0.0 {
                                return Err(Error::EvaluationFailure("division by zero".into()));
                            }
                            Value::Num(x / y)
                        }
                        BinOp::Lt => truth(x < y),
                        BinOp::Le => truth(x <= y),
                        BinOp::Gt => truth(x > y),
                        BinOp::Ge => truth(x >= y),
                        BinOp::And => truth(x != 0.0 && y != 0.0),
                        BinOp::Or => truth(x != 0.0 || y != 0.0),
                        BinOp::Eq | BinOp::Ne => unreachable!(),
                    })
                }
            }
        }
        Node::Call(name, args) => {
            if name == "if" {
                let c = num(eval(&args[0], lookup)?, "if")?;
                return eval(if c != 0.0 { &args[1] } else { &args[2] }, lookup);
            }
            let vals: Vec<f64> = args
                .iter()
                .map(|a| eval(a, lookup).and_then(|v| num(v, name)))
                .collect::<Result<_>>()?;
            Ok(Value::Num(match name.as_str() {
                "sum" => vals.iter().sum(),
                "min" => vals.iter().copied().fold(f64::INFINITY, f64::min),
                "max" => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                "abs" => vals[0].abs(),
                _ => unreachable!("checked at parse time"),
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn arithmetic_and_precedence() {
        let e = Expr::parse("1 + 2 * x - (3 - 1) / 2").unwrap();
        assert_eq!(e.eval(&env(&[("x", Value::Num(4.0))])).unwrap(), Value::Num(8.0));
        let e = Expr::parse("-x + abs(-2) + max(1, 5, 3) + min(2, 0.5)").unwrap();
        assert_eq!(e.eval(&env(&[("x", Value::Num(1.0))])).unwrap(), Value::Num(6.5));
        assert_eq!(Expr::parse("1e2 + .5").unwrap().eval(&env(&[])).unwrap(), Value::Num(100.5));
    }

    #[test]
    fn comparisons_and_labels() {
        let e = Expr::parse(r#"symptom == "chest pain" && age >= 40"#).unwrap();
        let yes = env(&[("symptom", "chest pain".into()), ("age", Value::Num(50.0))]);
        let no = env(&[("symptom", "fever".into()), ("age", Value::Num(50.0))]);
        assert!(e.eval_bool(&yes).unwrap());
        assert!(!e.eval_bool(&no).unwrap());
        assert!(Expr::parse(r#"symptom + 1"#).unwrap().eval(&yes).is_err());
        let e = Expr::parse("if(x > 1, 10, 20)").unwrap();
        assert_eq!(e.eval(&env(&[("x", Value::Num(0.0))])).unwrap(), Value::Num(20.0));
    }

    #[test]
    fn parse_errors() {
        for bad in ["1 +", "(1", "foo(1)", "abs(1, 2)", "\"open", "1 $ 2", "1 2"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
        let e = Expr::parse("y / x").unwrap();
        let err = e.eval(&env(&[("y", Value::Num(1.0)), ("x", Value::Num(0.0))])).unwrap_err();
        assert!(matches!(err, Error::EvaluationFailure(_)));
        assert!(matches!(e.eval(&env(&[])), Err(Error::EvaluationFailure(_))));
    }

    #[test]
    fn variables_are_listed_once() {
        let e = Expr::parse("x1 + x2 * x1 + sum(x3, 1)").unwrap();
        assert_eq!(e.variables(), vec!["x1", "x2", "x3"]);
    }
}
