//! Adapter files: user-written refactorings and migration modules.
//!
//! ```text
//! %% new
//! f(X,Y) -> X+Y.
//! %% adapter
//! f/1 := fun(X) -> f(X,3) end.
//! %% remove-old
//! ```

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::resolve::{resolve_with, ResolveMode};
use crate::schemes::{install, validate, AdapterSpec};
use crate::syntax::parser::{parse_unresolved, Parser};
use crate::syntax::resolve_term_in;
use crate::term::{Definition, Flavor, FunId, Program, Term};

/// An adapter file as written, before name resolution.
#[derive(Debug, Clone)]
pub struct AdapterFile {
    pub new_defs: Vec<Definition>,
    pub entries: Vec<(FunId, Term)>,
    pub remove_old: bool,
}

/// A migration module: the new API plus one adapter per old function.
#[derive(Debug, Clone)]
pub struct AdapterModule {
    pub new_defs: Vec<Definition>,
    pub adapters: Vec<AdapterSpec>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    New,
    Adapter,
}

pub fn parse_adapter_text(text: &str, flavor: Flavor) -> Result<AdapterFile> {
    let mut new_src = String::new();
    let mut adapter_src = String::new();
    let mut section = Section::Preamble;
    let mut remove_old = false;
    for (i, line) in text.lines().enumerate() {
        let marker = line.trim();
        let next = match marker {
            "%% new" => Some(Section::New),
            "%% adapter" => Some(Section::Adapter),
            "%% remove-old" => {
                remove_old = true;
                Some(section)
            }
            m if m.starts_with("%%") && flavor == Flavor::Mfh => {
                return Err(Error::AdapterFile(format!("line {}: unknown marker `{m}`", i + 1)))
            }
            _ => None,
        };
        let (new_line, adapter_line) = match (next, section) {
            (Some(s), _) => {
                section = s;
                ("", "")
            }
            (None, Section::New) => (line, ""),
            (None, Section::Adapter) => ("", line),
            (None, Section::Preamble) => {
                let blank = marker.is_empty() || marker.starts_with('#') || marker.starts_with('%');
                if !blank {
                    return Err(Error::AdapterFile(format!(
                        "line {}: expected `%% new` or `%% adapter` before code",
                        i + 1
                    )));
                }
                ("", "")
            }
        };
        // Keep line numbers intact so syntax errors point into the file.
        new_src.push_str(new_line);
        new_src.push('\n');
        adapter_src.push_str(adapter_line);
        adapter_src.push('\n');
    }
    let new_defs = parse_unresolved(&new_src, flavor)?.defs;
    let mut parser = Parser::new(&adapter_src, flavor)?;
    let mut entries = Vec::new();
    while !parser.at_eof() {
        entries.push(parser.adapter_entry()?);
    }
    Ok(AdapterFile {
        new_defs,
        entries,
        remove_old,
    })
}

pub fn read_adapter_file(path: &Path, flavor: Flavor) -> Result<AdapterFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::AdapterFile(format!("{}: {e}", path.display())))?;
    parse_adapter_text(&text, flavor)
}

/// Signature-only copy of `p`; resolution only needs names and arities.
fn stubs(p: &Program) -> Vec<Definition> {
    p.defs
        .iter()
        .map(|d| Definition::new(d.name.clone(), d.params.clone(), Term::Int(0)))
        .collect()
}

fn occupies(flavor: Flavor, a: &Definition, b: &Definition) -> bool {
    match flavor {
        Flavor::Mfe => a.id() == b.id(),
        Flavor::Mfh => a.name == b.name,
    }
}

/// Resolves new definitions against the surrounding program, letting each
/// one shadow whatever definition already occupies its slot.
fn resolve_new_defs(p: &Program, new_defs: &[Definition], mode: ResolveMode) -> Result<Vec<Definition>> {
    let mut defs = new_defs.to_vec();
    defs.extend(
        stubs(p)
            .into_iter()
            .filter(|s| !new_defs.iter().any(|n| occupies(p.flavor, n, s))),
    );
    let (resolved, _) = resolve_with(Program::new(p.flavor, defs), mode)?;
    Ok(resolved.defs.into_iter().take(new_defs.len()).collect())
}

fn resolve_adapter(context: &Program, adapter: Term, mode: ResolveMode) -> Result<Term> {
    let ctx = Program::new(context.flavor, stubs(context));
    resolve_term_in(adapter, &ctx, mode)
}

/// Builds the refactoring described by a single-adapter file.
pub fn spec_from_file(file: AdapterFile, p: &Program) -> Result<AdapterSpec> {
    let [(target, adapter)]: [(FunId, Term); 1] = file.entries.try_into().map_err(|e: Vec<_>| {
        Error::AdapterFile(format!("expected exactly one adapter entry, found {}", e.len()))
    })?;
    let new_defs = resolve_new_defs(p, &file.new_defs, ResolveMode::Strict)?;
    let mut spec = AdapterSpec {
        target,
        new_defs,
        adapter: Term::Int(0),
        remove_old: file.remove_old,
        fast_rename: None,
    };
    if p.find(&spec.target).is_none() {
        return Err(Error::TargetUndefined(spec.target));
    }
    let installed = install(p, &spec)?;
    spec.adapter = resolve_adapter(&installed, adapter, ResolveMode::Strict)?;
    validate(p, &spec, false)?;
    Ok(spec)
}

pub fn load_adapter_file(path: &Path, p: &Program) -> Result<AdapterSpec> {
    spec_from_file(read_adapter_file(path, p.flavor)?, p)
}

/// Builds a migration module for `client`. Adapter targets may be functions
/// the client only calls.
pub fn module_from_file(file: AdapterFile, client: &Program) -> Result<AdapterModule> {
    let mut seen = HashSet::new();
    for (target, _) in &file.entries {
        if !seen.insert(target.clone()) {
            return Err(Error::ConflictingAdapters(target.clone()));
        }
        if file.new_defs.iter().any(|d| d.id() == *target) {
            return Err(Error::NameCollision(format!(
                "{target} is both an adapter target and a new definition"
            )));
        }
    }
    let new_defs = resolve_new_defs(client, &file.new_defs, ResolveMode::AllowExternal)?;
    let mut context = client.clone();
    context.defs.extend(new_defs.iter().cloned());
    let mut adapters = Vec::new();
    for (target, adapter) in file.entries {
        let spec = AdapterSpec {
            target,
            new_defs: Vec::new(),
            adapter: resolve_adapter(&context, adapter, ResolveMode::AllowExternal)?,
            remove_old: true,
            fast_rename: None,
        };
        validate(client, &spec, true)?;
        adapters.push(spec);
    }
    Ok(AdapterModule { new_defs, adapters })
}

pub fn load_adapter_module(path: &Path, client: &Program) -> Result<AdapterModule> {
    module_from_file(read_adapter_file(path, client.flavor)?, client)
}
