use std::fmt;

use crate::diag::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Pure,
    Logical,
    Physical,
    Init,
    Then,
    Import,
    As,
    System,
    Link,
    To,
    Splitplug,
    Mergeplug,
    If,
    Else,
    For,
    In,
    Int,
    Float,
    Bool,
}

impl Keyword {
    pub const ALL: [Keyword; 19] = [
        Keyword::Pure,
        Keyword::Logical,
        Keyword::Physical,
        Keyword::Init,
        Keyword::Then,
        Keyword::Import,
        Keyword::As,
        Keyword::System,
        Keyword::Link,
        Keyword::To,
        Keyword::Splitplug,
        Keyword::Mergeplug,
        Keyword::If,
        Keyword::Else,
        Keyword::For,
        Keyword::In,
        Keyword::Int,
        Keyword::Float,
        Keyword::Bool,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Pure => "pure",
            Keyword::Logical => "logical",
            Keyword::Physical => "physical",
            Keyword::Init => "init",
            Keyword::Then => "then",
            Keyword::Import => "import",
            Keyword::As => "as",
            Keyword::System => "SYSTEM",
            Keyword::Link => "link",
            Keyword::To => "to",
            Keyword::Splitplug => "splitplug",
            Keyword::Mergeplug => "mergeplug",
            Keyword::If => "if",
            Keyword::Else => "else",
            Keyword::For => "for",
            Keyword::In => "in",
            Keyword::Int => "int",
            Keyword::Float => "float",
            Keyword::Bool => "bool",
        }
    }

    pub fn lookup(s: &str) -> Option<Keyword> {
        Keyword::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident,
    IntLit,
    FloatLit,
    StrLit,
    Operator,
    Punct,
    Eof,
}

/// One lexeme plus the whitespace and comments that precede it.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
    /// Whitespace and comments between the previous token and this one.
    pub leading_trivia: String,
}

impl Token {
    pub fn is_kw(&self, kw: Keyword) -> bool {
        self.kind == TokenKind::Keyword(kw)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.lexeme == p
    }

    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Operator && self.lexeme == op
    }

    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Eof => "end of input".to_string(),
            TokenKind::Ident => format!("identifier `{}`", self.lexeme),
            TokenKind::Keyword(_) => format!("keyword `{}`", self.lexeme),
            TokenKind::IntLit | TokenKind::FloatLit => format!("number `{}`", self.lexeme),
            TokenKind::StrLit => format!("string {}", self.lexeme),
            TokenKind::Operator | TokenKind::Punct => format!("`{}`", self.lexeme),
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "kw {}", k.as_str()),
            TokenKind::Ident => f.write_str("ident"),
            TokenKind::IntLit => f.write_str("int"),
            TokenKind::FloatLit => f.write_str("float"),
            TokenKind::StrLit => f.write_str("string"),
            TokenKind::Operator => f.write_str("op"),
            TokenKind::Punct => f.write_str("punct"),
            TokenKind::Eof => f.write_str("eof"),
        }
    }
}

/// Rebuilds the exact source text from a token stream.
pub fn reconstruct(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(&t.leading_trivia);
        out.push_str(&t.lexeme);
    }
    out
}
