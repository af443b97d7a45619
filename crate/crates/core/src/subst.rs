//! Capture-avoiding substitution of variables and of function references.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::term::{free_vars, fresh_name, FunId, Name, Program, Term};

pub type Binding = HashMap<Name, Term>;

/// Simultaneous capture-avoiding substitution.
///
/// A binder is renamed only when it would capture a free variable of a
/// replacement that actually lands underneath it. The new name is
/// `base_k` with the smallest `k` unused by the replacement, the body, and
/// the binder's siblings, so output is deterministic.
pub fn substitute(t: &Term, binding: &Binding) -> Term {
    if binding.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(x) => binding.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Int(_) | Term::Atom(_) | Term::FunRef(..) => t.clone(),
        Term::Lam(ps, body) => {
            let body_fv = free_vars(body);
            let inner: Binding = binding
                .iter()
                .filter(|(k, _)| !ps.contains(k) && body_fv.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if inner.is_empty() {
                return t.clone();
            }
            let repl_fv: BTreeSet<Name> = inner.values().flat_map(free_vars).collect();
            let mut avoid: BTreeSet<Name> = repl_fv.union(&body_fv).cloned().collect();
            avoid.extend(ps.iter().cloned());

            let mut inner = inner;
            let mut new_ps = Vec::with_capacity(ps.len());
            for p in ps {
                if repl_fv.contains(p) {
                    let q = fresh_name(p, &avoid);
                    avoid.insert(q.clone());
                    inner.insert(p.clone(), Term::Var(q.clone()));
                    new_ps.push(q);
                } else {
                    new_ps.push(p.clone());
                }
            }
            Term::Lam(new_ps, Box::new(substitute(body, &inner)))
        }
        _ => t
            .clone()
            .map_children::<std::convert::Infallible>(|_, c| Ok(substitute(&c, binding)))
            .unwrap_or_else(|e| match e {}),
    }
}

/// Single-variable convenience wrapper.
pub fn substitute1(t: &Term, x: &str, s: &Term) -> Term {
    substitute(t, &Binding::from([(x.to_string(), s.clone())]))
}

/// Replaces every `FunRef(target)` in `t` with `adapter`. Returns the new
/// term and the number of replaced sites. `adapter` must be closed, which
/// makes capture impossible.
pub fn replace_funref(t: &Term, target: &FunId, adapter: &Term) -> (Term, usize) {
    let mut sites = 0;
    let out = replace_in(t, target, adapter, &mut sites);
    (out, sites)
}

fn replace_in(t: &Term, target: &FunId, adapter: &Term, sites: &mut usize) -> Term {
    match t {
        Term::FunRef(n, a) if *n == target.name && *a == target.arity => {
            *sites += 1;
            adapter.clone()
        }
        _ => t
            .clone()
            .map_children::<std::convert::Infallible>(|_, c| {
                Ok(replace_in(&c, target, adapter, sites))
            })
            .unwrap_or_else(|e| match e {}),
    }
}

/// Substitutes `adapter` for every reference to `target` in every body.
pub fn substitute_funref(p: &Program, target: &FunId, adapter: &Term) -> Result<(Program, usize)> {
    let fv = free_vars(adapter);
    if !fv.is_empty() {
        return Err(Error::AdapterNotClosed(fv.into_iter().collect()));
    }
    let mut total = 0;
    let mut out = p.clone();
    for d in &mut out.defs {
        let (body, n) = replace_funref(&d.body, target, adapter);
        d.body = body;
        total += n;
    }
    Ok((out, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{alpha_eq, BinOp, Definition, Flavor};

    fn plus(a: Term, b: Term) -> Term {
        Term::binop(BinOp::Add, a, b)
    }

    #[test]
    fn substitutes_into_call() {
        // h(X) with X := Y+2
        let body = Term::app(Term::funref("h", 1), vec![Term::var("X")]);
        let arg = plus(Term::var("Y"), Term::Int(2));
        let out = substitute1(&body, "X", &arg);
        assert_eq!(out, Term::app(Term::funref("h", 1), vec![arg]));
    }

    #[test]
    fn empty_binding_is_identity() {
        let t = Term::lam(["X"], plus(Term::var("X"), Term::var("Z")));
        assert_eq!(substitute(&t, &Binding::new()), t);
    }

    #[test]
    fn renames_capturing_binder() {
        // fun(X) -> X + Z end  with Z := X
        let t = Term::lam(["X"], plus(Term::var("X"), Term::var("Z")));
        let out = substitute1(&t, "Z", &Term::var("X"));
        let expected = Term::lam(["X_1"], plus(Term::var("X_1"), Term::var("X")));
        assert_eq!(out, expected);
    }

    #[test]
    fn simultaneous_not_sequential() {
        // X + Y with {X := Y, Y := X} swaps
        let t = plus(Term::var("X"), Term::var("Y"));
        let b = Binding::from([
            ("X".to_string(), Term::var("Y")),
            ("Y".to_string(), Term::var("X")),
        ]);
        assert_eq!(substitute(&t, &b), plus(Term::var("Y"), Term::var("X")));
    }

    #[test]
    fn shadowed_key_untouched() {
        let t = Term::lam(["X"], Term::var("X"));
        let out = substitute1(&t, "X", &Term::Int(3));
        assert!(alpha_eq(&out, &t));
    }

    #[test]
    fn funref_replacement_counts_sites() {
        // g(Y) -> f(Y+2) - f(Y-2).
        let f = || Term::funref("f", 1);
        let body = Term::binop(
            BinOp::Sub,
            Term::app(f(), vec![plus(Term::var("Y"), Term::Int(2))]),
            Term::app(f(), vec![Term::binop(BinOp::Sub, Term::var("Y"), Term::Int(2))]),
        );
        let p = Program::new(Flavor::Mfe, vec![Definition::new("g", ["Y"], body)]);
        let adapter = Term::lam(["X"], Term::app(Term::funref("h", 1), vec![Term::var("X")]));
        let (out, n) = substitute_funref(&p, &FunId::new("f", 1), &adapter).unwrap();
        assert_eq!(n, 2);
        assert_eq!(out.count_refs(&FunId::new("f", 1)), 0);
        assert_eq!(out.count_refs(&FunId::new("h", 1)), 2);
    }

    #[test]
    fn absent_target_is_identity() {
        let p = Program::new(
            Flavor::Mfe,
            vec![Definition::new("g", ["Y"], Term::var("Y"))],
        );
        let (out, n) = substitute_funref(&p, &FunId::new("f", 1), &Term::lam(["X"], Term::var("X"))).unwrap();
        assert_eq!(n, 0);
        assert_eq!(out, p);
    }

    #[test]
    fn open_adapter_rejected() {
        let p = Program::new(Flavor::Mfe, vec![]);
        let err = substitute_funref(&p, &FunId::new("f", 1), &Term::lam(["X"], Term::var("Q"))).unwrap_err();
        assert_eq!(err, Error::AdapterNotClosed(vec!["Q".into()]));
    }
}
