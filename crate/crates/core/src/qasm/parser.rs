use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::lexer::{tokenize, Tok, Token};
use super::{Circuit, Gate, GateOp, ParseError, ParseErrorKind};

const MAX_EXPR_DEPTH: usize = 64;

/// Statement keywords of full OpenQASM 3 that this subset does not support.
const UNSUPPORTED: &[&str] = &[
    "input", "output", "reset", "if", "else", "for", "while", "gate", "def", "defcal", "box",
    "delay", "let", "const", "float", "int", "uint", "angle", "bool", "duration", "stretch",
    "return", "break", "continue", "end", "ctrl", "negctrl", "inv", "pow", "gphase", "U", "CX",
    "opaque", "cal", "extern", "array", "complex", "pragma",
];

/// Parses one OpenQASM 3 program.
///
/// The result always satisfies [`Circuit::validate`].
pub fn parse(source: &str) -> Result<Circuit, ParseError> {
    let (tokens, end) = tokenize(source)?;
    Parser {
        tokens,
        pos: 0,
        end,
        qreg: None,
        creg: None,
        circuit: Circuit::default(),
    }
    .program()
}

struct Register {
    name: String,
    size: usize,
}

/// A resolved register operand: either one index or the whole register.
enum Operand {
    Single(usize),
    Whole(usize),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    qreg: Option<Register>,
    creg: Option<Register>,
    circuit: Circuit,
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|t| (t.line, t.column))
            .unwrap_or(self.end)
    }

    fn error_at(&self, at: (usize, usize), kind: ParseErrorKind, message: String) -> ParseError {
        ParseError {
            line: at.0,
            column: at.1,
            message,
            kind,
        }
    }

    fn syntax(&self, message: String) -> ParseError {
        self.error_at(self.here(), ParseErrorKind::Syntactic, message)
    }

    fn semantic(&self, at: (usize, usize), message: String) -> ParseError {
        self.error_at(at, ParseErrorKind::Semantic, message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + offset).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected {}, found {}", want.describe(), self.found())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.syntax(format!("expected identifier, found {}", self.found()))),
        }
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let at = self.here();
        match self.next() {
            Some(Tok::Int(digits)) => digits
                .parse::<usize>()
                .map_err(|_| self.semantic(at, format!("integer `{digits}` is too large"))),
            other => {
                self.pos -= usize::from(other.is_some());
                Err(self.syntax(format!("expected integer, found {}", self.found())))
            }
        }
    }

    fn program(mut self) -> Result<Circuit, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "OPENQASM" => self.pos += 1,
            _ => {
                return Err(self.syntax(format!(
                    "expected `OPENQASM` header, found {}",
                    self.found()
                )))
            }
        }
        let at = self.here();
        match self.next() {
            Some(Tok::Int(v)) if v == "3" => {}
            Some(Tok::Float(v)) if (3.0..4.0).contains(&v) => {}
            Some(Tok::Int(_) | Tok::Float(_)) => {
                return Err(self.semantic(at, "unsupported OpenQASM version; expected 3".into()))
            }
            other => {
                self.pos -= usize::from(other.is_some());
                return Err(self.syntax(format!("expected version number, found {}", self.found())));
            }
        }
        self.expect(Tok::Semicolon)?;

        while self.peek().is_some() {
            self.statement()?;
        }

        if self.qreg.is_none() {
            return Err(self.semantic(self.end, "no qubit register declared".into()));
        }
        debug_assert!(self.circuit.validate().is_ok());
        Ok(self.circuit)
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let at = self.here();
        let word = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(self.syntax(format!("expected statement, found {}", self.found()))),
        };
        match word.as_str() {
            "include" => {
                self.pos += 1;
                let at = self.here();
                match self.next() {
                    Some(Tok::Str(path)) if path == "stdgates.inc" => {}
                    Some(Tok::Str(path)) => {
                        return Err(self.semantic(at, format!("unsupported include \"{path}\"")))
                    }
                    other => {
                        self.pos -= usize::from(other.is_some());
                        return Err(
                            self.syntax(format!("expected string, found {}", self.found()))
                        );
                    }
                }
                self.expect(Tok::Semicolon)
            }
            "OPENQASM" => Err(self.semantic(at, "duplicate `OPENQASM` header".into())),
            "qubit" | "bit" => {
                self.pos += 1;
                let size = if self.peek() == Some(&Tok::LBracket) {
                    self.pos += 1;
                    let n = self.integer()?;
                    self.expect(Tok::RBracket)?;
                    n
                } else {
                    1
                };
                let name = self.ident()?;
                self.expect(Tok::Semicolon)?;
                self.declare(word == "qubit", name, size, at)
            }
            "qreg" | "creg" => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::LBracket)?;
                let size = self.integer()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Semicolon)?;
                self.declare(word == "qreg", name, size, at)
            }
            "measure" => {
                self.pos += 1;
                let q_at = self.here();
                let q = self.qubit_operand()?;
                if self.peek() == Some(&Tok::Arrow) {
                    self.pos += 1;
                    let c_at = self.here();
                    let c = self.clbit_operand()?;
                    self.expect(Tok::Semicolon)?;
                    self.add_measure(q, c, q_at, c_at)
                } else {
                    // Bare `measure q[i];` has no classical target; nothing to record.
                    self.expect(Tok::Semicolon)
                }
            }
            "barrier" => {
                self.pos += 1;
                if self.peek() != Some(&Tok::Semicolon) {
                    self.qubit_operand()?;
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        self.qubit_operand()?;
                    }
                }
                self.expect(Tok::Semicolon)
            }
            _ if self.creg.as_ref().is_some_and(|r| r.name == word)
                && matches!(self.peek_at(1), Some(Tok::LBracket | Tok::Assign)) =>
            {
                let c_at = self.here();
                let c = self.clbit_operand()?;
                self.expect(Tok::Assign)?;
                match self.peek() {
                    Some(Tok::Ident(s)) if s == "measure" => self.pos += 1,
                    _ => return Err(self.syntax(format!("expected `measure`, found {}", self.found()))),
                }
                let q_at = self.here();
                let q = self.qubit_operand()?;
                self.expect(Tok::Semicolon)?;
                self.add_measure(q, c, q_at, c_at)
            }
            _ if UNSUPPORTED.contains(&word.as_str()) => {
                Err(self.semantic(at, format!("unsupported statement `{word}`")))
            }
            _ => self.gate_call(word, at),
        }
    }

    fn declare(
        &mut self,
        quantum: bool,
        name: String,
        size: usize,
        at: (usize, usize),
    ) -> Result<(), ParseError> {
        if size == 0 {
            return Err(self.semantic(at, format!("register `{name}` has size 0")));
        }
        let (slot, other) = if quantum {
            (&self.qreg, &self.creg)
        } else {
            (&self.creg, &self.qreg)
        };
        if let Some(existing) = slot {
            return Err(self.semantic(
                at,
                format!(
                    "redeclared register: `{name}` after `{}`; only one {} register is supported",
                    existing.name,
                    if quantum { "qubit" } else { "bit" }
                ),
            ));
        }
        if other.as_ref().is_some_and(|r| r.name == name) || Gate::from_name(&name).is_some() || name == "pi" {
            return Err(self.semantic(at, format!("name `{name}` is already in use")));
        }
        let reg = Some(Register { name, size });
        if quantum {
            self.qreg = reg;
            self.circuit.n_qubits = size;
        } else {
            self.creg = reg;
            self.circuit.n_clbits = size;
        }
        Ok(())
    }

    fn operand(&mut self, quantum: bool) -> Result<Operand, ParseError> {
        let at = self.here();
        let name = self.ident()?;
        let reg = if quantum { &self.qreg } else { &self.creg };
        let size = match reg {
            Some(r) if r.name == name => r.size,
            _ => {
                let other = if quantum { &self.creg } else { &self.qreg };
                let what = if quantum { "qubit" } else { "bit" };
                let msg = if other.as_ref().is_some_and(|r| r.name == name) {
                    format!("`{name}` is not a {what} register")
                } else {
                    format!("undeclared {what} register `{name}`")
                };
                return Err(self.semantic(at, msg));
            }
        };
        if self.peek() != Some(&Tok::LBracket) {
            return Ok(Operand::Whole(size));
        }
        self.pos += 1;
        let idx_at = self.here();
        let index = self.integer()?;
        self.expect(Tok::RBracket)?;
        if index >= size {
            return Err(self.semantic(
                idx_at,
                format!("index {index} out of range for register `{name}` of size {size} ({index} >= {size})"),
            ));
        }
        Ok(Operand::Single(index))
    }

    fn qubit_operand(&mut self) -> Result<Operand, ParseError> {
        self.operand(true)
    }

    fn clbit_operand(&mut self) -> Result<Operand, ParseError> {
        self.operand(false)
    }

    fn add_measure(
        &mut self,
        q: Operand,
        c: Operand,
        q_at: (usize, usize),
        c_at: (usize, usize),
    ) -> Result<(), ParseError> {
        match (q, c) {
            (Operand::Single(q), Operand::Single(c)) => self.circuit.measures.push((q, c)),
            (Operand::Whole(nq), Operand::Whole(nc)) => {
                if nq != nc {
                    return Err(self.semantic(
                        c_at,
                        format!("measure register sizes differ ({nq} qubits, {nc} bits)"),
                    ));
                }
                self.circuit.measures.extend((0..nq).map(|i| (i, i)));
            }
            _ => {
                return Err(self.semantic(
                    q_at,
                    "measure mixes a whole register with a single index".into(),
                ))
            }
        }
        Ok(())
    }

    fn gate_call(&mut self, name: String, at: (usize, usize)) -> Result<(), ParseError> {
        self.pos += 1;
        let gate = match Gate::from_name(&name) {
            Some(g) => g,
            None => {
                if self.qreg.as_ref().is_some_and(|r| r.name == name) {
                    return Err(self.syntax(format!(
                        "expected statement, found register `{name}`"
                    )));
                }
                return Err(self.semantic(at, format!("unknown gate `{name}`")));
            }
        };

        let mut params = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            if self.peek() != Some(&Tok::RParen) {
                params.push(self.angle()?);
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    params.push(self.angle()?);
                }
            }
            self.expect(Tok::RParen)?;
        }
        if params.len() != gate.num_params() {
            return Err(self.semantic(
                at,
                format!(
                    "gate `{name}` takes {} parameter(s), got {}",
                    gate.num_params(),
                    params.len()
                ),
            ));
        }

        let mut operands = Vec::new();
        operands.push(self.qubit_operand()?);
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            operands.push(self.qubit_operand()?);
        }
        self.expect(Tok::Semicolon)?;
        if operands.len() != gate.num_qubits() {
            return Err(self.semantic(
                at,
                format!(
                    "gate `{name}` takes {} qubit(s), got {}",
                    gate.num_qubits(),
                    operands.len()
                ),
            ));
        }

        // Whole-register operands broadcast over the register.
        let width = operands.iter().find_map(|o| match o {
            Operand::Whole(n) => Some(*n),
            Operand::Single(_) => None,
        });
        let reps = width.unwrap_or(1);
        for i in 0..reps {
            let qubits: Vec<usize> = operands
                .iter()
                .map(|o| match o {
                    Operand::Single(q) => *q,
                    Operand::Whole(_) => i,
                })
                .collect();
            for (j, q) in qubits.iter().enumerate() {
                if qubits[..j].contains(q) {
                    return Err(self.semantic(
                        at,
                        format!("gate `{name}` uses qubit {q} more than once"),
                    ));
                }
            }
            self.circuit.ops.push(GateOp {
                gate,
                qubits,
                params: params.clone(),
            });
        }
        Ok(())
    }

    fn angle(&mut self) -> Result<f64, ParseError> {
        let at = self.here();
        let v = self.expr(0)?;
        if !v.is_finite() {
            return Err(self.semantic(at, "angle expression is not finite".into()));
        }
        Ok(v)
    }

    fn expr(&mut self, depth: usize) -> Result<f64, ParseError> {
        let mut acc = self.term(depth)?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc += self.term(depth)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc -= self.term(depth)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<f64, ParseError> {
        let mut acc = self.unary(depth)?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc *= self.unary(depth)?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.here();
                    let d = self.unary(depth)?;
                    if d == 0.0 {
                        return Err(self.semantic(at, "division by zero in angle expression".into()));
                    }
                    acc /= d;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Result<f64, ParseError> {
        if depth > MAX_EXPR_DEPTH {
            return Err(self.syntax("angle expression nested too deeply".into()));
        }
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary(depth + 1)?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary(depth + 1)
            }
            _ => self.primary(depth),
        }
    }

    fn primary(&mut self, depth: usize) -> Result<f64, ParseError> {
        let at = self.here();
        match self.next() {
            Some(Tok::Int(digits)) => digits
                .parse::<f64>()
                .map_err(|_| self.semantic(at, format!("bad number `{digits}`"))),
            Some(Tok::Float(v)) => Ok(v),
            Some(Tok::Ident(s)) if s == "pi" => Ok(PI),
            Some(Tok::Ident(s)) => Err(self.semantic(
                at,
                format!("unknown identifier `{s}` in angle expression"),
            )),
            Some(Tok::LParen) => {
                let v = self.expr(depth + 1)?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            other => {
                self.pos -= usize::from(other.is_some());
                Err(self.syntax(format!("expected angle expression, found {}", self.found())))
            }
        }
    }
}
