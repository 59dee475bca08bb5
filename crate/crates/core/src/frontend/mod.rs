//! Lexing, parsing and canonical printing of Chips sources.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod token;

pub use ast::Program;
pub use lexer::tokenize;
pub use parser::parse_program;
pub use pretty::pretty_print;
pub use token::{Keyword, Token, TokenKind};

use crate::diag::{Diagnostic, SourceMap};

/// Registers `text` under `name` and parses it.
pub fn parse_source(
    map: &mut SourceMap,
    name: &str,
    text: &str,
) -> Result<Program, Vec<Diagnostic>> {
    let file = map.add(name, text);
    let tokens = tokenize(text, file).map_err(|d| vec![d])?;
    parse_program(&tokens)
}

/// Parses several files into one program. Diagnostics from all files are
/// collected; a second SYSTEM section is an `E-DUP` error.
pub fn parse_sources<'a>(
    map: &mut SourceMap,
    files: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<Program, Vec<Diagnostic>> {
    let mut program = Program::default();
    let mut diags = Vec::new();
    for (name, text) in files {
        match parse_source(map, name, text) {
            Ok(p) => {
                if let (Some(_), Some(sys)) = (&program.system, &p.system) {
                    diags.push(
                        Diagnostic::error("E-DUP", "duplicate SYSTEM section").at(sys.loc.0),
                    );
                }
                program.merge(p);
            }
            Err(ds) => diags.extend(ds),
        }
    }
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(diags)
    }
}
