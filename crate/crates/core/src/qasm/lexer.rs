use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Decimal digits of an integer literal, kept as text so the parser can
    /// range-check them.
    Int(String),
    Float(f64),
    Str(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semicolon,
    Comma,
    Arrow,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::Float(v) => format!("number `{v}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semicolon => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Cursor<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: usize,
    column: usize,
    last: (usize, usize),
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.last = (self.line, self.column);
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

fn lex_error(line: usize, column: usize, message: String) -> ParseError {
    ParseError {
        line,
        column,
        message,
        kind: ParseErrorKind::Lexical,
    }
}

/// Splits `source` into tokens, dropping whitespace and comments.
///
/// Returns the tokens and the position of the last character, which the parser
/// uses for end-of-input errors.
pub(crate) fn tokenize(source: &str) -> Result<(Vec<Token>, (usize, usize)), ParseError> {
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        column: 1,
        last: (1, 1),
    };
    let mut out = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek2() == Some('*') {
            cur.bump();
            cur.bump();
            let mut closed = false;
            while let Some(c) = cur.bump() {
                if c == '*' && cur.peek() == Some('/') {
                    cur.bump();
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(lex_error(line, column, "unclosed block comment".into()));
            }
            continue;
        }

        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            Tok::Ident(s)
        } else if c == 'π' {
            cur.bump();
            Tok::Ident("pi".into())
        } else if c.is_ascii_digit() || (c == '.' && cur.peek2().is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur, line, column)?
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some('\n') | None => {
                        return Err(lex_error(line, column, "unterminated string literal".into()))
                    }
                    Some(c) => s.push(c),
                }
            }
            Tok::Str(s)
        } else {
            cur.bump();
            match c {
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ';' => Tok::Semicolon,
                ',' => Tok::Comma,
                '=' => Tok::Assign,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '-' if cur.peek() == Some('>') => {
                    cur.bump();
                    Tok::Arrow
                }
                '-' => Tok::Minus,
                other => {
                    return Err(lex_error(
                        line,
                        column,
                        format!("unexpected character {other:?}"),
                    ))
                }
            }
        };
        out.push(Token { tok, line, column });
    }
    Ok((out, cur.last))
}

fn lex_number(cur: &mut Cursor<'_>, line: usize, column: usize) -> Result<Tok, ParseError> {
    let mut text = String::new();
    let mut is_float = false;
    while let Some(c) = cur.peek() {
        if c.is_ascii_digit() {
            text.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    if cur.peek() == Some('.') {
        is_float = true;
        text.push('.');
        cur.bump();
        while let Some(c) = cur.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                cur.bump();
            } else {
                break;
            }
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        is_float = true;
        text.push('e');
        cur.bump();
        if let Some(sign @ ('+' | '-')) = cur.peek() {
            text.push(sign);
            cur.bump();
        }
        let mut digits = 0;
        while let Some(c) = cur.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                cur.bump();
                digits += 1;
            } else {
                break;
            }
        }
        if digits == 0 {
            return Err(lex_error(line, column, format!("malformed exponent in `{text}`")));
        }
    }
    if let Some(c) = cur.peek() {
        if c.is_ascii_alphabetic() || c == '_' {
            return Err(lex_error(
                line,
                column,
                format!("malformed number `{text}{c}`"),
            ));
        }
    }
    if is_float {
        text.parse::<f64>()
            .map(Tok::Float)
            .map_err(|_| lex_error(line, column, format!("malformed number `{text}`")))
    } else {
        Ok(Tok::Int(text))
    }
}
