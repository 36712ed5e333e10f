//! OpenQASM 2.0 subset: parsing into [`Circuit`] and normalized re-emission.
//!
//! Supported: the `OPENQASM 2.0;` header, `include "qelib1.inc";`, `qreg`,
//! `creg`, standard-header gates (plus the `U`/`CX` builtins), `measure` and
//! `barrier`, with register broadcasting. Angle expressions are evaluated at
//! parse time. Gate definitions, `opaque`, `if` and `reset` are rejected.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, GateKind, Instruction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unsupported construct `{construct}`")]
    Unsupported {
        line: usize,
        col: usize,
        construct: String,
    },
    #[error("{line}:{col}: index {index} out of range for register `{register}` of size {size}")]
    RegisterOverflow {
        line: usize,
        col: usize,
        register: String,
        index: usize,
        size: usize,
    },
    #[error("{line}:{col}: {source}")]
    Invalid {
        line: usize,
        col: usize,
        source: CircuitError,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Arrow,
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> QasmError {
    QasmError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(2, &mut i);
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                advance(1, &mut i);
            }
            if i >= chars.len() {
                return Err(syntax(tl, tc, "unterminated block comment"));
            }
            advance(2, &mut i);
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i);
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(1, &mut i);
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                advance(1, &mut i);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i);
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    advance(j - i, &mut i);
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        advance(1, &mut i);
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            if real {
                Tok::Real(text.parse().map_err(|_| syntax(tl, tc, "malformed number"))?)
            } else {
                Tok::Int(text.parse().map_err(|_| syntax(tl, tc, "integer too large"))?)
            }
        } else if c == '"' {
            advance(1, &mut i);
            let start = i;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                advance(1, &mut i);
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(syntax(tl, tc, "unterminated string"));
            }
            let s: String = chars[start..i].iter().collect();
            advance(1, &mut i);
            Tok::Str(s)
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance(2, &mut i);
            Tok::Arrow
        } else if "()[]{};,+-*/^=<>".contains(c) {
            advance(1, &mut i);
            Tok::Sym(c)
        } else {
            return Err(syntax(tl, tc, format!("unexpected character `{c}`")));
        };
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Register {
    name: String,
    offset: usize,
    size: usize,
}

/// A gate operand before broadcasting: one element or a whole register.
enum Operand {
    One(usize),
    All { offset: usize, size: usize },
}

impl Operand {
    fn len(&self) -> Option<usize> {
        match self {
            Operand::One(_) => None,
            Operand::All { size, .. } => Some(*size),
        }
    }

    fn at(&self, i: usize) -> usize {
        match self {
            Operand::One(q) => *q,
            Operand::All { offset, .. } => offset + i,
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    ops: Vec<(Instruction, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, message: impl Into<String>) -> QasmError {
        let t = self.peek();
        syntax(t.line, t.col, message)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            Err(self.err_here(format!("expected `{c}`")))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.err_here("expected identifier")),
        }
    }

    fn int(&mut self) -> Result<usize, QasmError> {
        match self.peek().tok {
            Tok::Int(v) => {
                self.next();
                usize::try_from(v).map_err(|_| self.err_here("integer too large"))
            }
            _ => Err(self.err_here("expected integer")),
        }
    }

    fn program(&mut self) -> Result<(), QasmError> {
        if self.peek().tok == Tok::Ident("OPENQASM".into()) {
            self.next();
            match self.next().tok {
                Tok::Real(2.0) => {}
                Tok::Int(2) => {}
                _ => {
                    let t = &self.toks[self.pos - 1];
                    return Err(QasmError::Unsupported {
                        line: t.line,
                        col: t.col,
                        construct: "OPENQASM version other than 2.0".into(),
                    });
                }
            }
            self.expect_sym(';')?;
        }
        while self.peek().tok != Tok::Eof {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let start = self.peek().clone();
        let word = match &start.tok {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.err_here("expected statement")),
        };
        match word.as_str() {
            "include" => {
                self.next();
                match self.next().tok {
                    Tok::Str(f) if f == "qelib1.inc" => {}
                    Tok::Str(f) => {
                        return Err(QasmError::Unsupported {
                            line: start.line,
                            col: start.col,
                            construct: format!("include \"{f}\""),
                        })
                    }
                    _ => return Err(syntax(start.line, start.col, "expected file name")),
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => {
                self.next();
                let name = self.ident()?;
                self.expect_sym('[')?;
                let size = self.int()?;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                if self.qregs.iter().chain(&self.cregs).any(|r| r.name == name) {
                    return Err(syntax(start.line, start.col, format!("register `{name}` redeclared")));
                }
                let regs = if word == "qreg" { &mut self.qregs } else { &mut self.cregs };
                let offset = regs.iter().map(|r| r.size).sum();
                regs.push(Register { name, offset, size });
                Ok(())
            }
            "gate" | "opaque" | "if" | "reset" => Err(QasmError::Unsupported {
                line: start.line,
                col: start.col,
                construct: word,
            }),
            "measure" => {
                self.next();
                let q = self.operand(true)?;
                if self.next().tok != Tok::Arrow {
                    return Err(syntax(start.line, start.col, "expected `->` in measure"));
                }
                let c = self.operand(false)?;
                self.expect_sym(';')?;
                let n = match (q.len(), c.len()) {
                    (None, None) => 1,
                    (Some(a), Some(b)) if a == b => a,
                    _ => return Err(syntax(start.line, start.col, "measure operand sizes differ")),
                };
                for i in 0..n {
                    self.ops
                        .push((Instruction::measure(q.at(i), c.at(i)), start.line, start.col));
                }
                Ok(())
            }
            "barrier" => {
                self.next();
                let mut qubits = Vec::new();
                loop {
                    let op = self.operand(true)?;
                    match op.len() {
                        None => qubits.push(op.at(0)),
                        Some(n) => qubits.extend((0..n).map(|i| op.at(i))),
                    }
                    if !self.eat_sym(',') {
                        break;
                    }
                }
                self.expect_sym(';')?;
                qubits.dedup();
                self.ops
                    .push((Instruction::barrier(&qubits), start.line, start.col));
                Ok(())
            }
            _ => self.gate_call(start, word),
        }
    }

    fn gate_call(&mut self, start: Token, word: String) -> Result<(), QasmError> {
        self.next();
        let kind = match word.as_str() {
            "U" => GateKind::U3,
            "CX" => GateKind::Cx,
            w => match w.parse::<GateKind>() {
                Ok(k) if k.is_gate() => k,
                _ => {
                    return Err(QasmError::Unsupported {
                        line: start.line,
                        col: start.col,
                        construct: word,
                    })
                }
            },
        };
        let mut params = Vec::new();
        if self.eat_sym('(') && !self.eat_sym(')') {
            loop {
                params.push(self.expr()?);
                if !self.eat_sym(',') {
                    break;
                }
            }
            self.expect_sym(')')?;
        }
        let mut args = Vec::new();
        loop {
            args.push(self.operand(true)?);
            if !self.eat_sym(',') {
                break;
            }
        }
        self.expect_sym(';')?;
        let mut n = None;
        for a in &args {
            if let Some(len) = a.len() {
                if n.is_some_and(|m| m != len) {
                    return Err(syntax(start.line, start.col, "broadcast register sizes differ"));
                }
                n = Some(len);
            }
        }
        for i in 0..n.unwrap_or(1) {
            let qubits: Vec<usize> = args.iter().map(|a| a.at(i)).collect();
            self.ops.push((
                Instruction::gate(kind, &qubits, &params),
                start.line,
                start.col,
            ));
        }
        Ok(())
    }

    fn operand(&mut self, quantum: bool) -> Result<Operand, QasmError> {
        let t = self.peek().clone();
        let name = self.ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let Some(reg) = regs.iter().find(|r| r.name == name) else {
            let kind = if quantum { "quantum" } else { "classical" };
            return Err(syntax(t.line, t.col, format!("undeclared {kind} register `{name}`")));
        };
        let (offset, size) = (reg.offset, reg.size);
        if self.eat_sym('[') {
            let idx_tok = self.peek().clone();
            let index = self.int()?;
            self.expect_sym(']')?;
            if index >= size {
                return Err(QasmError::RegisterOverflow {
                    line: idx_tok.line,
                    col: idx_tok.col,
                    register: name,
                    index,
                    size,
                });
            }
            Ok(Operand::One(offset + index))
        } else {
            Ok(Operand::All { offset, size })
        }
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary()?;
            } else if self.eat_sym('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        if self.eat_sym('-') {
            Ok(-self.unary()?)
        } else if self.eat_sym('+') {
            self.unary()
        } else {
            let base = self.atom()?;
            if self.eat_sym('^') {
                Ok(libm::pow(base, self.unary()?))
            } else {
                Ok(base)
            }
        }
    }

    fn atom(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Int(v) => Ok(v as f64),
            Tok::Real(v) => Ok(v),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Ident(name) if name == "pi" => Ok(core::f64::consts::PI),
            Tok::Ident(name) => {
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => libm::sin,
                    "cos" => libm::cos,
                    "tan" => libm::tan,
                    "exp" => libm::exp,
                    "ln" => libm::log,
                    "sqrt" => libm::sqrt,
                    _ => return Err(syntax(t.line, t.col, format!("unknown identifier `{name}` in expression"))),
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            _ => Err(syntax(t.line, t.col, "expected expression")),
        }
    }
}

/// Parses OpenQASM 2.0 source into a flat circuit.
pub fn parse_qasm(source: &str) -> Result<Circuit, QasmError> {
    let mut p = Parser {
        toks: tokenize(source)?,
        pos: 0,
        qregs: Vec::new(),
        cregs: Vec::new(),
        ops: Vec::new(),
    };
    p.program()?;
    let num_qubits = p.qregs.iter().map(|r| r.size).sum();
    let num_clbits = p.cregs.iter().map(|r| r.size).sum();
    let mut circuit = Circuit::new(num_qubits, num_clbits);
    for (inst, line, col) in p.ops {
        circuit
            .push(inst)
            .map_err(|source| QasmError::Invalid { line, col, source })?;
    }
    Ok(circuit)
}

/// Normalized OpenQASM 2.0: one statement per line, registers `q` and `c`,
/// angles printed with round-trip precision.
pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits);
    if circuit.num_clbits > 0 {
        let _ = writeln!(out, "creg c[{}];", circuit.num_clbits);
    }
    for op in &circuit.ops {
        let qubits: Vec<String> = op.qubits.iter().map(|q| format!("q[{q}]")).collect();
        match op.kind {
            GateKind::Measure => {
                let _ = writeln!(out, "measure {} -> c[{}];", qubits[0], op.clbit.unwrap_or(0));
            }
            kind => {
                out.push_str(kind.name());
                if !op.params.is_empty() {
                    let params: Vec<String> = op.params.iter().map(|p| format!("{p:?}")).collect();
                    let _ = write!(out, "({})", params.join(","));
                }
                let _ = writeln!(out, " {};", qubits.join(","));
            }
        }
    }
    out
}

/// Convenience for tests and generators: parse, panicking with the error.
#[doc(hidden)]
pub fn qasm(source: &str) -> Circuit {
    parse_qasm(source).unwrap_or_else(|e| panic!("{}", e.to_string()))
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn emit_parse_round_trip(c in crate::testgen::circuit(1..=6, 30)) {
            let text = emit_qasm(&c);
            let back = parse_qasm(&text).unwrap();
            prop_assert_eq!((back.num_qubits, back.num_clbits), (c.num_qubits, c.num_clbits));
            prop_assert_eq!(&back.ops, &c.ops);
            prop_assert_eq!(parse_qasm(&emit_qasm(&back)).unwrap(), back);
        }
    }
}
