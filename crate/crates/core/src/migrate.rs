//! API migration: rewrite a client against a module of adapters.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::adapter_file::AdapterModule;
use crate::error::{Error, Result};
use crate::resolve::{resolve_with, ResolveMode};
use crate::rewrite::{restore_atoms, tidy_rules, Normalizer, Observer, RuleContext, Strategy};
use crate::schemes::{substitute_target, validate};
use crate::term::{Program, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Residual {
    pub name: String,
    pub arity: Option<usize>,
    /// The definition containing the reference.
    pub location: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MigrationReport {
    /// Rewritten call sites, keyed by `name/arity`.
    pub sites: BTreeMap<String, usize>,
    /// References to old names the adapters could not reach.
    pub residual: Vec<Residual>,
    pub rule_firings: BTreeMap<String, usize>,
}

pub fn migrate(client: &Program, module: &AdapterModule, strategy: Strategy) -> Result<(Program, MigrationReport)> {
    migrate_traced(client, module, strategy, None)
}

pub fn migrate_traced(
    client: &Program,
    module: &AdapterModule,
    strategy: Strategy,
    observer: Option<Observer<'_>>,
) -> Result<(Program, MigrationReport)> {
    let mut seen = BTreeSet::new();
    for spec in &module.adapters {
        if !seen.insert(spec.target.clone()) {
            return Err(Error::ConflictingAdapters(spec.target.clone()));
        }
    }
    let mut prog = client.clone();
    for nd in &module.new_defs {
        if prog.defs.iter().any(|d| d.name == nd.name && d.arity() == nd.arity()) {
            return Err(Error::NameCollision(format!("{} is already defined", nd.id())));
        }
        prog.defs.push(nd.clone());
    }
    let mut sites = BTreeMap::new();
    let mut rule_firings = BTreeMap::new();
    for spec in &module.adapters {
        validate(&prog, spec, true)?;
        if let Some(i) = prog.position(&spec.target) {
            prog.defs.remove(i);
        }
        let (next, n, prepass) = substitute_target(&prog, spec, false)?;
        sites.insert(spec.target.to_string(), n);
        for (r, k) in prepass {
            *rule_firings.entry(r.id().to_string()).or_insert(0) += k;
        }
        prog = next;
    }
    let mut normalizer = Normalizer::new(tidy_rules(prog.flavor), strategy, RuleContext::new(prog.flavor));
    if let Some(obs) = observer {
        normalizer = normalizer.with_observer(obs);
    }
    let normalized = restore_atoms(&normalizer.normalize_program(&prog)?);
    for (r, k) in normalizer.counts() {
        *rule_firings.entry(r.id().to_string()).or_insert(0) += k;
    }
    let (output, _) = resolve_with(normalized, ResolveMode::AllowExternal)?;
    let old_names: BTreeSet<&str> = module.adapters.iter().map(|s| s.target.name.as_str()).collect();
    let mut residual = Vec::new();
    for d in &output.defs {
        d.body.walk(&mut |t| {
            let hit = match t {
                Term::FunRef(name, n) if old_names.contains(name.as_str()) => Some((name, Some(*n))),
                Term::Atom(name) if old_names.contains(name.as_str()) => Some((name, None)),
                _ => None,
            };
            if let Some((name, arity)) = hit {
                residual.push(Residual {
                    name: name.clone(),
                    arity,
                    location: d.id().to_string(),
                });
            }
        });
    }
    Ok((
        output,
        MigrationReport {
            sites,
            residual,
            rule_firings,
        },
    ))
}
