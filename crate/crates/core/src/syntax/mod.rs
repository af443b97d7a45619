//! Surface syntax: lexing, parsing and printing for `.mfe` and `.mfh` files.

pub mod lexer;
pub mod parser;
pub mod print;

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::resolve::{resolve_with, ResolveMode};
use crate::term::{Definition, Flavor, Program, Term};

pub use lexer::tokens_equal;
pub use parser::{parse_term, parse_unresolved};
pub use print::{print_definition, print_program, print_term};

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: PathBuf,
    pub flavor: Flavor,
    pub text: String,
}

impl SourceFile {
    /// Reads a file, taking the flavor from `flavor` or else the extension.
    pub fn load(path: impl AsRef<Path>, flavor: Option<Flavor>) -> std::io::Result<SourceFile> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let flavor = flavor
            .or_else(|| flavor_of(path))
            .ok_or_else(|| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    format!("cannot infer flavor of {}; use --flavor", path.display()),
                )
            })?;
        Ok(SourceFile {
            path: path.to_path_buf(),
            flavor,
            text,
        })
    }
}

/// True when `s` lexes as a single function-name token.
pub fn is_function_name(s: &str, flavor: Flavor) -> bool {
    matches!(
        lexer::tokenize(s, flavor).as_deref(),
        Ok([lexer::Token { tok: lexer::Tok::Ident(n), .. }, _]) if n == s && !n.contains(':')
    )
}

/// True when `s` lexes as a single variable token.
pub fn is_variable_name(s: &str, flavor: Flavor) -> bool {
    let tok = match lexer::tokenize(s, flavor).as_deref() {
        Ok([t, _]) => t.tok.clone(),
        _ => return false,
    };
    match (flavor, tok) {
        (Flavor::Mfe, lexer::Tok::Var(n)) | (Flavor::Mfh, lexer::Tok::Ident(n)) => n == s,
        _ => false,
    }
}

pub fn flavor_of(path: &Path) -> Option<Flavor> {
    path.extension()
        .and_then(|e| e.to_str())
        .and_then(Flavor::from_extension)
}

/// Parses and resolves a source file.
pub fn parse(src: &SourceFile) -> Result<Program> {
    parse_str(&src.text, src.flavor)
}

pub fn parse_str(text: &str, flavor: Flavor) -> Result<Program> {
    crate::resolve::resolve(parse_unresolved(text, flavor)?)
}

/// Parses a program that may call functions it does not define.
pub fn parse_str_lenient(text: &str, flavor: Flavor) -> Result<Program> {
    Ok(resolve_with(parse_unresolved(text, flavor)?, ResolveMode::AllowExternal)?.0)
}

/// Parses a standalone expression and resolves it against `context`.
pub fn parse_term_in(text: &str, context: &Program, mode: ResolveMode) -> Result<Term> {
    let t = parse_term(text, context.flavor)?;
    resolve_term_in(t, context, mode)
}

/// Resolves a term as though it were the body of a parameterless definition
/// appended to `context`.
pub fn resolve_term_in(t: Term, context: &Program, mode: ResolveMode) -> Result<Term> {
    const HOLE: &str = "__term";
    let mut p = context.clone();
    p.defs.push(Definition::new(HOLE, Vec::<String>::new(), t));
    let (mut p, _) = resolve_with(p, mode).map_err(|e| match e {
        Error::UnboundName { name, .. } => Error::UnboundName {
            name,
            location: "expression".into(),
        },
        other => other,
    })?;
    Ok(p.defs.pop().expect("hole definition").body)
}
