//! Refactorings as adapter specs, and the pipeline that applies them.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::equiv::{check_obligation, EquivReport, Sampling, Shape, Verdict};
use crate::error::{Error, Result};
use crate::resolve::{intrinsic_arity, resolve_with, ResolveMode};
use crate::rewrite::{
    atom_lift, eta_expand_refs, restore_atoms, tidy_rules, Normalizer, Observer, Rule, RuleContext, Strategy,
};
use crate::subst::substitute_funref;
use crate::syntax::{is_function_name, is_variable_name, print_term};
use crate::term::{
    alpha_eq, free_vars, fresh_name, fresh_names, rename_funref, Definition, Flavor, FunId, Name,
    Program, Term,
};

/// A refactoring: new definitions plus a closed adapter implementing the
/// old function in terms of them.
#[derive(Debug, Clone, PartialEq)]
pub struct AdapterSpec {
    pub target: FunId,
    pub new_defs: Vec<Definition>,
    pub adapter: Term,
    /// Drop the target's definition even when no new definition takes its
    /// name.
    pub remove_old: bool,
    /// Set for plain renames: the engine may rename references directly.
    pub fast_rename: Option<Name>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Obligation {
    CheckedOk,
    CheckedFailed,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub sampling: Sampling,
    /// Argument shapes for the target; inferred when absent.
    pub shapes: Option<Vec<Shape>>,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub strategy: Strategy,
    pub fast_path: bool,
    pub check: Option<CheckOptions>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            strategy: Strategy::default(),
            fast_path: true,
            check: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefactorReport {
    pub sites_rewritten: usize,
    pub rule_firings: BTreeMap<String, usize>,
    pub obligation: Obligation,
    pub obligation_report: Option<EquivReport>,
    pub output: Program,
}

fn same_slot(flavor: Flavor, a: &Definition, b: &Definition) -> bool {
    match flavor {
        Flavor::Mfe => a.name == b.name && a.arity() == b.arity(),
        Flavor::Mfh => a.name == b.name,
    }
}

/// Step one of the pipeline: drop the target where it is being replaced and
/// put the new definitions in its place.
pub fn install(p: &Program, spec: &AdapterSpec) -> Result<Program> {
    let replaced = spec.remove_old || spec.new_defs.iter().any(|d| d.name == spec.target.name);
    let pos = p.position(&spec.target);
    let mut defs = p.defs.clone();
    let insert_at = match pos {
        Some(i) if replaced => {
            defs.remove(i);
            i
        }
        Some(i) => i + 1,
        None => defs.len(),
    };
    for (k, nd) in spec.new_defs.iter().enumerate() {
        if intrinsic_arity(&nd.name).is_some() {
            return Err(Error::ShadowsIntrinsic(nd.id()));
        }
        let clash = defs
            .iter()
            .chain(&spec.new_defs[..k])
            .any(|d| same_slot(p.flavor, d, nd));
        if clash {
            return Err(Error::NameCollision(format!("{} is already defined", nd.id())));
        }
    }
    defs.splice(insert_at..insert_at, spec.new_defs.iter().cloned());
    Ok(Program::new(p.flavor, defs))
}

/// Number of parameters the adapter visibly takes: outer lambda params in
/// MFE, curried lambda depth in MFH.
pub fn adapter_arity(adapter: &Term, flavor: Flavor) -> usize {
    match flavor {
        Flavor::Mfe => match adapter {
            Term::Lam(ps, _) => ps.len(),
            _ => 0,
        },
        Flavor::Mfh => {
            let mut n = 0;
            let mut t = adapter;
            while let Term::Lam(ps, body) = t {
                n += ps.len();
                t = body;
            }
            n
        }
    }
}

/// Checks the spec invariants against `p`. External targets are allowed
/// only when `external_ok`.
pub fn validate(p: &Program, spec: &AdapterSpec, external_ok: bool) -> Result<()> {
    if !external_ok && p.find(&spec.target).is_none() {
        return Err(Error::TargetUndefined(spec.target.clone()));
    }
    let fv = free_vars(&spec.adapter);
    if !fv.is_empty() {
        return Err(Error::AdapterNotClosed(fv.into_iter().collect()));
    }
    let found = adapter_arity(&spec.adapter, p.flavor);
    // A curried adapter may return a function, so MFH only needs enough
    // lambdas to cover the target's parameters.
    let ok = match p.flavor {
        Flavor::Mfe => found == spec.target.arity && matches!(spec.adapter, Term::Lam(..)),
        Flavor::Mfh => found >= spec.target.arity,
    };
    if !ok {
        return Err(Error::ArityMismatch {
            target: spec.target.clone(),
            expected: spec.target.arity,
            found,
        });
    }
    Ok(())
}

/// Steps two and three: prepass, then substitution. Returns the program,
/// the number of rewritten sites and the prepass firing counts.
pub(crate) fn substitute_target(
    p: &Program,
    spec: &AdapterSpec,
    fast_path: bool,
) -> Result<(Program, usize, BTreeMap<Rule, usize>)> {
    let ctx = RuleContext::new(p.flavor);
    let mut firings = BTreeMap::new();
    let p = if p.flavor == Flavor::Mfe {
        let (lifted, n) = atom_lift(p, &spec.target, &ctx)?;
        if n > 0 {
            firings.insert(Rule::AtomLift, n);
        }
        lifted
    } else {
        p.clone()
    };
    let (p, wrapped) = eta_expand_refs(&p, &spec.target, &ctx);
    if wrapped > 0 {
        firings.insert(Rule::EtaExpandRef, wrapped);
    }
    let sites = p.count_refs(&spec.target);
    let out = match (&spec.fast_rename, fast_path) {
        (Some(new_name), true) => {
            let mut out = p;
            for d in &mut out.defs {
                d.body = rename_funref(&d.body, &spec.target, new_name);
            }
            out
        }
        _ => substitute_funref(&p, &spec.target, &spec.adapter)?.0,
    };
    Ok((out, sites, firings))
}

pub fn apply_adapter(p: &Program, spec: &AdapterSpec, opts: &Options) -> Result<RefactorReport> {
    apply_adapter_traced(p, spec, opts, None)
}

pub fn apply_adapter_traced(
    p: &Program,
    spec: &AdapterSpec,
    opts: &Options,
    observer: Option<Observer<'_>>,
) -> Result<RefactorReport> {
    validate(p, spec, false)?;
    let (obligation, obligation_report) = match &opts.check {
        None => (Obligation::Skipped, None),
        Some(c) => match check_obligation(p, spec, c.shapes.as_deref(), c.sampling)? {
            None => (Obligation::Skipped, None),
            Some(r) if r.verdict == Verdict::CounterexampleFound => (Obligation::CheckedFailed, Some(r)),
            Some(r) => (Obligation::CheckedOk, Some(r)),
        },
    };
    let installed = install(p, spec)?;
    let (substituted, sites, prepass) = substitute_target(&installed, spec, opts.fast_path)?;
    let mut normalizer = Normalizer::new(tidy_rules(p.flavor), opts.strategy, RuleContext::new(p.flavor));
    if let Some(obs) = observer {
        normalizer = normalizer.with_observer(obs);
    }
    let normalized = restore_atoms(&normalizer.normalize_program(&substituted)?);
    let mut rule_firings: BTreeMap<String, usize> =
        prepass.iter().map(|(r, n)| (r.id().to_string(), *n)).collect();
    for (r, n) in normalizer.counts() {
        rule_firings.insert(r.id().to_string(), *n);
    }
    let (output, _) = resolve_with(normalized, ResolveMode::Strict)?;
    Ok(RefactorReport {
        sites_rewritten: sites,
        rule_firings,
        obligation,
        obligation_report,
        output,
    })
}

fn target_def<'p>(p: &'p Program, target: &FunId) -> Result<&'p Definition> {
    p.find(target)
        .ok_or_else(|| Error::TargetUndefined(target.clone()))
}

fn vars(names: &[Name]) -> Vec<Term> {
    names.iter().cloned().map(Term::Var).collect()
}

/// In MFE a change of arity must not land on another existing definition.
fn check_new_arity(p: &Program, d: &Definition, arity: usize) -> Result<()> {
    let id = FunId::new(d.name.clone(), arity);
    if p.flavor == Flavor::Mfe && arity != d.arity() && p.find(&id).is_some() {
        return Err(Error::NameCollision(format!("{id} is already defined")));
    }
    Ok(())
}

pub fn scheme_rename(p: &Program, target: &FunId, new_name: &str) -> Result<AdapterSpec> {
    let d = target_def(p, target)?;
    if !is_function_name(new_name, p.flavor) {
        return Err(Error::InvalidName(new_name.to_string()));
    }
    let taken = match p.flavor {
        Flavor::Mfe => p.find(&FunId::new(new_name, target.arity)).is_some(),
        Flavor::Mfh => p.find_by_name(new_name).next().is_some(),
    };
    if new_name == target.name || taken || intrinsic_arity(new_name).is_some() {
        return Err(Error::NameCollision(format!(
            "{new_name}/{} is already defined",
            target.arity
        )));
    }
    let xs = fresh_names(p.flavor.fresh_base(), target.arity, &BTreeSet::new());
    let call = Term::call(p.flavor, Term::funref(new_name, target.arity), vars(&xs));
    Ok(AdapterSpec {
        target: target.clone(),
        new_defs: vec![Definition {
            name: new_name.to_string(),
            ..d.clone()
        }],
        adapter: Term::abs(p.flavor, xs, call),
        remove_old: true,
        fast_rename: Some(new_name.to_string()),
    })
}

fn replace_occurrences(t: &Term, pattern: &Term, with: &Term, count: &mut usize) -> Term {
    if alpha_eq(t, pattern) {
        *count += 1;
        return with.clone();
    }
    t.clone()
        .map_children::<std::convert::Infallible>(|_, c| Ok(replace_occurrences(&c, pattern, with, count)))
        .unwrap_or_else(|e| match e {})
}

pub fn scheme_generalise(
    p: &Program,
    target: &FunId,
    new_param: &str,
    extract: &Term,
) -> Result<AdapterSpec> {
    let d = target_def(p, target)?;
    let fv = free_vars(extract);
    if !fv.is_empty() {
        return Err(Error::ExtractNotClosed(fv.into_iter().collect()));
    }
    if !is_variable_name(new_param, p.flavor) {
        return Err(Error::InvalidName(new_param.to_string()));
    }
    let in_use = d.names().contains(new_param)
        || (p.flavor == Flavor::Mfh && p.find_by_name(new_param).next().is_some());
    if in_use {
        return Err(Error::NameCollision(format!("{new_param} is already used in {target}")));
    }
    let mut count = 0;
    let body = replace_occurrences(&d.body, extract, &Term::var(new_param), &mut count);
    if count == 0 {
        return Err(Error::ExtractNotFound(format!(
            "{} in {target}",
            print_term(extract, p.flavor)
        )));
    }
    check_new_arity(p, d, d.arity() + 1)?;
    let mut params = d.params.clone();
    params.push(new_param.to_string());
    let mut args = vars(&d.params);
    args.push(extract.clone());
    let call = Term::call(p.flavor, Term::funref(d.name.clone(), d.arity() + 1), args);
    Ok(AdapterSpec {
        target: target.clone(),
        new_defs: vec![Definition::new(d.name.clone(), params, body)],
        adapter: Term::abs(p.flavor, d.params.clone(), call),
        remove_old: false,
        fast_rename: None,
    })
}

/// `perm` lists, for each new parameter position, which old parameter
/// (1-based) moves there.
pub fn scheme_reorder(p: &Program, target: &FunId, perm: &[usize]) -> Result<AdapterSpec> {
    let d = target_def(p, target)?;
    let n = d.arity();
    let mut seen = vec![false; n];
    let valid = perm.len() == n
        && perm
            .iter()
            .all(|&i| (1..=n).contains(&i) && !std::mem::replace(&mut seen[i - 1], true));
    if !valid {
        let shown: Vec<String> = perm.iter().map(usize::to_string).collect();
        return Err(Error::BadPermutation(format!(
            "{} is not a permutation of 1..{n}",
            shown.join(",")
        )));
    }
    let params: Vec<Name> = perm.iter().map(|&i| d.params[i - 1].clone()).collect();
    let call = Term::call(p.flavor, Term::funref(d.name.clone(), n), vars(&params));
    Ok(AdapterSpec {
        target: target.clone(),
        new_defs: vec![Definition::new(d.name.clone(), params, d.body.clone())],
        adapter: Term::abs(p.flavor, d.params.clone(), call),
        remove_old: false,
        fast_rename: None,
    })
}

/// Inserts a parameter at 1-based `position`; callers pass `default`.
pub fn scheme_add_arg(p: &Program, target: &FunId, default: &Term, position: usize) -> Result<AdapterSpec> {
    let d = target_def(p, target)?;
    let fv = free_vars(default);
    if !fv.is_empty() {
        return Err(Error::DefaultNotClosed(fv.into_iter().collect()));
    }
    let n = d.arity();
    if !(1..=n + 1).contains(&position) {
        return Err(Error::PositionOutOfRange { position, max: n + 1 });
    }
    check_new_arity(p, d, n + 1)?;
    let mut avoid = d.names();
    avoid.extend(p.defs.iter().map(|d| d.name.clone()));
    let fresh = fresh_name(p.flavor.fresh_base(), &avoid);
    let mut params = d.params.clone();
    params.insert(position - 1, fresh);
    let mut args = vars(&d.params);
    args.insert(position - 1, default.clone());
    let call = Term::call(p.flavor, Term::funref(d.name.clone(), n + 1), args);
    Ok(AdapterSpec {
        target: target.clone(),
        new_defs: vec![Definition::new(d.name.clone(), params, d.body.clone())],
        adapter: Term::abs(p.flavor, d.params.clone(), call),
        remove_old: false,
        fast_rename: None,
    })
}

/// Drops the unused parameter at 1-based `position`.
pub fn scheme_remove_arg(p: &Program, target: &FunId, position: usize) -> Result<AdapterSpec> {
    let d = target_def(p, target)?;
    let n = d.arity();
    if !(1..=n).contains(&position) {
        return Err(Error::PositionOutOfRange { position, max: n });
    }
    let dropped = &d.params[position - 1];
    if free_vars(&d.body).contains(dropped) {
        return Err(Error::ParamStillUsed(format!("{dropped} in {target}")));
    }
    check_new_arity(p, d, n - 1)?;
    let mut params = d.params.clone();
    params.remove(position - 1);
    let call = Term::call(p.flavor, Term::funref(d.name.clone(), n - 1), vars(&params));
    Ok(AdapterSpec {
        target: target.clone(),
        new_defs: vec![Definition::new(d.name.clone(), params, d.body.clone())],
        adapter: Term::abs(p.flavor, d.params.clone(), call),
        remove_old: false,
        fast_rename: None,
    })
}

/// Inlines the target at every use and removes its definition.
pub fn scheme_unfold(p: &Program, target: &FunId) -> Result<AdapterSpec> {
    let d = target_def(p, target)?;
    if d.body.mentions_funref(target) {
        return Err(Error::RecursiveUnfold(target.clone()));
    }
    Ok(AdapterSpec {
        target: target.clone(),
        new_defs: Vec::new(),
        adapter: Term::abs(p.flavor, d.params.clone(), d.body.clone()),
        remove_old: true,
        fast_rename: None,
    })
}
