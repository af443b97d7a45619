//! Name resolution: classifies identifiers as bound variables or references
//! to top-level functions and intrinsics.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::term::{Flavor, FunId, Name, Program, Term};

/// Built-in functions known to the interpreter.
pub const INTRINSICS: &[(&str, usize)] = &[
    ("map", 2),
    ("lists:map", 2),
    ("apply", 2),
    ("spawn", 2),
    ("new_sum", 1),
];

/// Intrinsics that consume a function operand.
pub const SPECIAL_HEADS: &[&str] = &["spawn", "apply", "lists:map", "map"];

/// Intrinsics whose function operand may be an atom naming a top-level function.
pub const ATOM_HEADS: &[&str] = &["spawn", "apply"];

pub fn intrinsic_arity(name: &str) -> Option<usize> {
    INTRINSICS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, a)| *a)
}

pub fn is_intrinsic(id: &FunId) -> bool {
    intrinsic_arity(&id.name) == Some(id.arity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolveMode {
    /// Every reference must be defined or intrinsic.
    Strict,
    /// Unknown function names become external references; used for
    /// migration clients that call an API they do not define.
    AllowExternal,
}

pub fn resolve(p: Program) -> Result<Program> {
    resolve_with(p, ResolveMode::Strict).map(|(p, _)| p)
}

/// Resolves `p`, returning the program and the set of external references.
pub fn resolve_with(p: Program, mode: ResolveMode) -> Result<(Program, BTreeSet<FunId>)> {
    check_definitions(&p)?;
    let arities: BTreeMap<Name, usize> = p.defs.iter().map(|d| (d.name.clone(), d.arity())).collect();
    let defined: HashSet<FunId> = p.defs.iter().map(|d| d.id()).collect();
    let mut cx = Resolver {
        flavor: p.flavor,
        arities,
        defined,
        mode,
        external: BTreeMap::new(),
        bare: BTreeSet::new(),
        location: String::new(),
    };
    let mut out = p.clone();
    for d in &mut out.defs {
        cx.location = format!("definition {}", d.id());
        let mut scope: Vec<Name> = d.params.clone();
        d.body = cx.term(&d.body, &mut scope, 0)?;
    }
    if !cx.bare.is_empty() {
        let called: BTreeMap<Name, usize> = cx
            .external
            .iter()
            .filter_map(|(name, arities)| arities.iter().next().map(|&a| (name.clone(), a)))
            .collect();
        for name in &cx.bare {
            cx.external.entry(name.clone()).or_default().insert(called.get(name).copied().unwrap_or(0));
        }
        for d in &mut out.defs {
            d.body = fill_bare(&d.body, &called);
        }
    }
    let external = cx
        .external
        .into_iter()
        .flat_map(|(name, arities)| arities.into_iter().map(move |a| FunId::new(name.clone(), a)))
        .collect();
    Ok((out, external))
}

fn check_definitions(p: &Program) -> Result<()> {
    let mut seen_ids = HashSet::new();
    let mut seen_names = HashSet::new();
    for d in &p.defs {
        if intrinsic_arity(&d.name).is_some() {
            return Err(Error::ShadowsIntrinsic(d.id()));
        }
        let dup = match p.flavor {
            Flavor::Mfe => !seen_ids.insert(d.id()),
            Flavor::Mfh => !seen_names.insert(d.name.clone()),
        };
        if dup {
            return Err(Error::DuplicateDefinition(d.id()));
        }
        let mut ps = HashSet::new();
        for x in &d.params {
            if !ps.insert(x) {
                return Err(Error::NameCollision(format!(
                    "parameter {x} repeated in {}",
                    d.id()
                )));
            }
        }
    }
    Ok(())
}

struct Resolver {
    flavor: Flavor,
    arities: BTreeMap<Name, usize>,
    defined: HashSet<FunId>,
    mode: ResolveMode,
    external: BTreeMap<Name, BTreeSet<usize>>,
    /// MFH externals mentioned without arguments somewhere.
    bare: BTreeSet<Name>,
    location: String,
}

/// Placeholder arity for a bare MFH external until its call sites are known.
const BARE: usize = usize::MAX;

fn fill_bare(t: &Term, called: &BTreeMap<Name, usize>) -> Term {
    match t {
        Term::FunRef(name, BARE) => Term::FunRef(name.clone(), called.get(name).copied().unwrap_or(0)),
        _ => t
            .clone()
            .map_children::<std::convert::Infallible>(|_, c| Ok(fill_bare(&c, called)))
            .unwrap_or_else(|e| match e {}),
    }
}

impl Resolver {
    fn unbound(&self, name: &str) -> Error {
        Error::UnboundName {
            name: name.to_string(),
            location: self.location.clone(),
        }
    }

    /// `spine_args` is the number of arguments this node receives as the
    /// head of a curried application chain; only MFH external arity needs it.
    fn term(&mut self, t: &Term, scope: &mut Vec<Name>, spine_args: usize) -> Result<Term> {
        match t {
            Term::Var(x) => {
                if scope.contains(x) {
                    return Ok(t.clone());
                }
                if self.flavor == Flavor::Mfh {
                    if let Some(&a) = self.arities.get(x) {
                        return Ok(Term::FunRef(x.clone(), a));
                    }
                    if let Some(a) = intrinsic_arity(x) {
                        return Ok(Term::FunRef(x.clone(), a));
                    }
                    if self.mode == ResolveMode::AllowExternal {
                        // Bare mentions take their arity from the call sites.
                        if spine_args == 0 {
                            self.bare.insert(x.clone());
                            return Ok(Term::FunRef(x.clone(), BARE));
                        }
                        let seen = self.external.entry(x.clone()).or_default();
                        if let Some(&first) = seen.iter().next() {
                            if first != spine_args {
                                return Err(Error::InconsistentArity {
                                    name: x.clone(),
                                    first,
                                    second: spine_args,
                                });
                            }
                        }
                        seen.insert(spine_args);
                        return Ok(Term::FunRef(x.clone(), spine_args));
                    }
                }
                Err(self.unbound(x))
            }
            Term::FunRef(name, arity) => {
                let id = FunId::new(name.clone(), *arity);
                if self.defined.contains(&id) || crate::resolve::is_intrinsic(&id) {
                    return Ok(t.clone());
                }
                if self.mode == ResolveMode::AllowExternal {
                    self.external.entry(name.clone()).or_default().insert(*arity);
                    return Ok(t.clone());
                }
                Err(self.unbound(&id.to_string()))
            }
            Term::Int(_) | Term::Atom(_) => Ok(t.clone()),
            Term::Lam(ps, body) => {
                let mark = scope.len();
                scope.extend(ps.iter().cloned());
                let body = self.term(body, scope, 0);
                scope.truncate(mark);
                Ok(Term::Lam(ps.clone(), Box::new(body?)))
            }
            Term::App(head, args, sugar) => {
                let head = self.term(head, scope, spine_args + args.len())?;
                let args = args
                    .iter()
                    .map(|a| self.term(a, scope, 0))
                    .collect::<Result<_>>()?;
                Ok(Term::App(Box::new(head), args, *sugar))
            }
            Term::List(items) => Ok(Term::List(
                items
                    .iter()
                    .map(|a| self.term(a, scope, 0))
                    .collect::<Result<_>>()?,
            )),
            Term::BinOp(op, l, r) => Ok(Term::binop(
                *op,
                self.term(l, scope, 0)?,
                self.term(r, scope, 0)?,
            )),
        }
    }
}
