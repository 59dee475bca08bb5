use crate::diag::{Diagnostic, FileId, Span};

use super::token::{Keyword, Token, TokenKind};

const OPERATORS_2: [&str; 9] = ["->", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>"];
const OPERATORS_1: &str = "+-*/%!<>=&";
const PUNCT: &str = "(){}[],;.";

/// Splits `source` into tokens. The last token is always `Eof`, carrying
/// any trailing trivia, so that [`super::token::reconstruct`] is lossless.
pub fn tokenize(source: &str, file: FileId) -> Result<Vec<Token>, Diagnostic> {
    Lexer {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
        file,
    }
    .run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    file: FileId,
}

impl<'a> Lexer<'a> {
    fn span(&self, start: usize, end: usize) -> Span {
        Span::new(self.file, start, end)
    }

    fn peek(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    fn run(mut self) -> Result<Vec<Token>, Diagnostic> {
        let mut tokens = Vec::new();
        loop {
            let trivia_start = self.pos;
            self.skip_trivia()?;
            let leading_trivia = self.src[trivia_start..self.pos].to_string();
            let start = self.pos;
            let Some(c) = self.peek(0) else {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    lexeme: String::new(),
                    span: self.span(start, start),
                    leading_trivia,
                });
                return Ok(tokens);
            };
            let kind = self.lex_one(c)?;
            tokens.push(Token {
                kind,
                lexeme: self.src[start..self.pos].to_string(),
                span: self.span(start, self.pos),
                leading_trivia,
            });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_ascii_whitespace() => self.pos += 1,
                (Some(b'/'), Some(b'/')) => {
                    while self.peek(0).is_some_and(|c| c != b'\n') {
                        self.pos += 1;
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let start = self.pos;
                    match self.src[self.pos + 2..].find("*/") {
                        Some(i) => self.pos += 2 + i + 2,
                        None => {
                            return Err(Diagnostic::error("E-LEX", "unterminated block comment")
                                .at(self.span(start, self.src.len())))
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn lex_one(&mut self, c: u8) -> Result<TokenKind, Diagnostic> {
        let start = self.pos;
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .peek(0)
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
            {
                self.pos += 1;
            }
            return Ok(match Keyword::lookup(&self.src[start..self.pos]) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident,
            });
        }
        if c.is_ascii_digit() {
            return self.number();
        }
        if c == b'"' {
            return self.string();
        }
        if let Some(two) = self.src.get(self.pos..self.pos + 2) {
            if OPERATORS_2.contains(&two) {
                self.pos += 2;
                return Ok(TokenKind::Operator);
            }
        }
        if OPERATORS_1.as_bytes().contains(&c) {
            self.pos += 1;
            return Ok(TokenKind::Operator);
        }
        if PUNCT.as_bytes().contains(&c) {
            self.pos += 1;
            return Ok(TokenKind::Punct);
        }
        let ch = self.src[start..].chars().next().unwrap_or('\u{FFFD}');
        Err(
            Diagnostic::error("E-LEX", format!("unexpected character `{}`", ch.escape_default()))
                .at(self.span(start, start + ch.len_utf8())),
        )
    }

    fn number(&mut self) -> Result<TokenKind, Diagnostic> {
        let start = self.pos;
        if self.peek(0) == Some(b'0') && matches!(self.peek(1), Some(b'x' | b'X')) {
            self.pos += 2;
            let digits = self.pos;
            while self.peek(0).is_some_and(|c| c.is_ascii_hexdigit()) {
                self.pos += 1;
            }
            if self.pos == digits {
                return Err(Diagnostic::error("E-LEX", "hex literal without digits")
                    .at(self.span(start, self.pos)));
            }
            if i64::from_str_radix(&self.src[digits..self.pos], 16).is_err() {
                return Err(Diagnostic::error("E-LEX", "integer literal out of range")
                    .at(self.span(start, self.pos)));
            }
            return Ok(TokenKind::IntLit);
        }
        self.digits();
        let mut float = false;
        if self.peek(0) == Some(b'.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            float = true;
            self.pos += 1;
            self.digits();
        }
        if matches!(self.peek(0), Some(b'e' | b'E')) {
            let sign = usize::from(matches!(self.peek(1), Some(b'+' | b'-')));
            if self.peek(1 + sign).is_some_and(|c| c.is_ascii_digit()) {
                float = true;
                self.pos += 1 + sign;
                self.digits();
            }
        }
        let text = &self.src[start..self.pos];
        if float {
            Ok(TokenKind::FloatLit)
        } else if text.parse::<i64>().is_ok() {
            Ok(TokenKind::IntLit)
        } else {
            Err(Diagnostic::error("E-LEX", "integer literal out of range")
                .at(self.span(start, self.pos)))
        }
    }

    fn digits(&mut self) {
        while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
    }

    fn string(&mut self) -> Result<TokenKind, Diagnostic> {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.peek(0) {
                None | Some(b'\n') => {
                    return Err(Diagnostic::error("E-LEX", "unterminated string literal")
                        .at(self.span(start, self.pos)))
                }
                Some(b'"') => {
                    self.pos += 1;
                    return Ok(TokenKind::StrLit);
                }
                Some(b'\\') => {
                    match self.peek(1) {
                        Some(b'"' | b'\\' | b'n' | b't') => self.pos += 2,
                        _ => {
                            return Err(Diagnostic::error("E-LEX", "invalid escape in string")
                                .at(self.span(self.pos, (self.pos + 2).min(self.src.len()))))
                        }
                    }
                }
                Some(_) => {
                    let ch = self.src[self.pos..].chars().next().unwrap();
                    self.pos += ch.len_utf8();
                }
            }
        }
    }
}

/// Decodes the body of a string literal lexeme (quotes included).
pub fn unescape(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Inverse of [`unescape`].
pub fn escape(text: &str) -> String {
    let mut out = String::from("\"");
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
