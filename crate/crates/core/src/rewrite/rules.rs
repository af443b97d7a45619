//! Root-level rewrite steps.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::resolve::{ATOM_HEADS, SPECIAL_HEADS};
use crate::subst::{substitute, Binding};
use crate::term::{free_vars, fresh_names, Flavor, FunId, Name, Sugar, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Beta,
    EtaReduce,
    EtaExpandRef,
    AtomLift,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::Beta, Rule::EtaReduce, Rule::EtaExpandRef, Rule::AtomLift];

    pub fn id(self) -> &'static str {
        match self {
            Rule::Beta => "BETA",
            Rule::EtaReduce => "ETA_REDUCE",
            Rule::EtaExpandRef => "ETA_EXPAND_REF",
            Rule::AtomLift => "ATOM_LIFT",
        }
    }

    /// One step at the root of `t`, if the rule applies there.
    pub fn fire(self, t: &Term, ctx: &RuleContext) -> Option<Term> {
        match self {
            Rule::Beta => step_beta(t, ctx.flavor),
            Rule::EtaReduce => step_eta_reduce(t, ctx),
            Rule::EtaExpandRef => step_eta_expand_ref(t, ctx),
            Rule::AtomLift => step_atom_lift(t, ctx),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone)]
pub struct RuleContext {
    pub flavor: Flavor,
    /// Refactoring target; only the prepass rules look at it.
    pub target: Option<FunId>,
    pub special_heads: Vec<Name>,
    /// Names a freshly invented binder must avoid.
    pub in_scope: BTreeSet<Name>,
    /// Arities of top-level definitions, used to disambiguate atoms.
    pub arities: HashMap<Name, BTreeSet<usize>>,
}

impl RuleContext {
    pub fn new(flavor: Flavor) -> Self {
        RuleContext {
            flavor,
            target: None,
            special_heads: SPECIAL_HEADS.iter().map(|s| s.to_string()).collect(),
            in_scope: BTreeSet::new(),
            arities: HashMap::new(),
        }
    }

    pub fn with_target(mut self, target: FunId) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_program(mut self, p: &crate::term::Program) -> Self {
        for d in &p.defs {
            self.arities.entry(d.name.clone()).or_default().insert(d.arity());
            self.in_scope.insert(d.name.clone());
        }
        self
    }
}

/// `App(Lam(ps, b), args)` with `|ps| = |args|` becomes `b[ps := args]`.
///
/// In MFH a backtick application being reduced passes its flag on to the
/// applications in `b` that receive the parameter as their argument, so a
/// section survives substitution of its operator.
pub fn step_beta(t: &Term, flavor: Flavor) -> Option<Term> {
    let Term::App(head, args, sugar) = t else { return None };
    let Term::Lam(ps, body) = &**head else { return None };
    if ps.len() != args.len() {
        return None;
    }
    let body = if flavor == Flavor::Mfh && *sugar == Sugar::Infix && ps.len() == 1 {
        mark_infix(body, &ps[0])
    } else {
        (**body).clone()
    };
    let binding: Binding = ps.iter().cloned().zip(args.iter().cloned()).collect();
    Some(substitute(&body, &binding))
}

fn mark_infix(t: &Term, x: &str) -> Term {
    match t {
        Term::Lam(ps, _) if ps.iter().any(|p| p == x) => t.clone(),
        Term::App(h, args, _) if matches!(args.as_slice(), [Term::Var(y)] if y == x) => {
            Term::App(Box::new(mark_infix(h, x)), args.clone(), Sugar::Infix)
        }
        _ => t
            .clone()
            .map_children::<std::convert::Infallible>(|_, c| Ok(mark_infix(&c, x)))
            .unwrap_or_else(|e| match e {}),
    }
}

/// `Lam(ps, App(h, ps))` becomes `h` when no parameter occurs in `h` and `h`
/// is already known to be a function of the right shape.
pub fn step_eta_reduce(t: &Term, ctx: &RuleContext) -> Option<Term> {
    let Term::Lam(ps, body) = t else { return None };
    let Term::App(h, args, _) = &**body else { return None };
    if args.len() != ps.len() {
        return None;
    }
    let args_are_params = args
        .iter()
        .zip(ps)
        .all(|(a, p)| matches!(a, Term::Var(v) if v == p));
    if !args_are_params {
        return None;
    }
    let fv = free_vars(h);
    if ps.iter().any(|p| fv.contains(p)) {
        return None;
    }
    let ok = match ctx.flavor {
        Flavor::Mfe => match &**h {
            Term::Lam(qs, _) => qs.len() == ps.len(),
            Term::FunRef(_, n) => *n == ps.len(),
            _ => false,
        },
        Flavor::Mfh => ps.len() == 1 && is_function_value(h),
    };
    ok.then(|| (**h).clone())
}

/// Curried terms known to evaluate to a function: lambdas and
/// under-saturated applications of top-level functions.
fn is_function_value(h: &Term) -> bool {
    if let Term::Lam(..) = h {
        return true;
    }
    let (head, args) = h.spine();
    matches!(head, Term::FunRef(_, n) if args.len() < *n)
}

/// `FunRef(target)` becomes `fun(X_1..X_n) -> target(X_1..X_n) end`.
pub fn step_eta_expand_ref(t: &Term, ctx: &RuleContext) -> Option<Term> {
    let target = ctx.target.as_ref()?;
    let Term::FunRef(name, n) = t else { return None };
    if *name != target.name || *n != target.arity {
        return None;
    }
    if ctx.flavor == Flavor::Mfh && *n == 0 {
        return None;
    }
    let xs = fresh_names(ctx.flavor.fresh_base(), *n, &ctx.in_scope);
    let call = Term::call(ctx.flavor, t.clone(), xs.iter().cloned().map(Term::Var).collect());
    Some(Term::abs(ctx.flavor, xs, call))
}

/// `spawn(f, L)` / `apply(f, L)` with `f` naming the target becomes
/// `spawn(fun f/n, L)`; the prepass then eta-expands the reference.
pub fn step_atom_lift(t: &Term, ctx: &RuleContext) -> Option<Term> {
    let target = ctx.target.as_ref()?;
    let (head, args) = match t {
        Term::App(h, a, _) => (&**h, a),
        _ => return None,
    };
    let Term::FunRef(h, 2) = head else { return None };
    if !ATOM_HEADS.contains(&h.as_str()) || args.len() != 2 {
        return None;
    }
    let Term::Atom(f) = &args[0] else { return None };
    if *f != target.name {
        return None;
    }
    match atom_arity(&args[1], target, ctx) {
        AtomArity::Target => {
            let mut args = args.clone();
            args[0] = Term::FunRef(f.clone(), target.arity);
            Some(Term::App(Box::new(head.clone()), args, Sugar::Atom))
        }
        AtomArity::Other | AtomArity::Ambiguous => None,
    }
}

pub(crate) enum AtomArity {
    Target,
    Other,
    Ambiguous,
}

/// Which arity an atom passed with `list` designates.
pub(crate) fn atom_arity(list: &Term, target: &FunId, ctx: &RuleContext) -> AtomArity {
    if let Term::List(items) = list {
        return if items.len() == target.arity {
            AtomArity::Target
        } else {
            AtomArity::Other
        };
    }
    let mut arities = ctx.arities.get(&target.name).cloned().unwrap_or_default();
    arities.insert(target.arity);
    if arities.len() == 1 {
        AtomArity::Target
    } else {
        AtomArity::Ambiguous
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::term::alpha_eq;

    fn mfe(s: &str) -> Term {
        parse_term(s, Flavor::Mfe).unwrap()
    }

    /// MFH terms with the given names resolved as function references.
    fn mfh(s: &str, funs: &[(&str, usize)]) -> Term {
        fn fix(t: Term, funs: &[(&str, usize)], bound: &mut Vec<String>) -> Term {
            match t {
                Term::Var(x) if !bound.contains(&x) => match funs.iter().find(|(n, _)| *n == x) {
                    Some((n, a)) => Term::funref(*n, *a),
                    None => Term::Var(x),
                },
                Term::Lam(ps, b) => {
                    let m = bound.len();
                    bound.extend(ps.iter().cloned());
                    let b = fix(*b, funs, bound);
                    bound.truncate(m);
                    Term::Lam(ps, Box::new(b))
                }
                other => other
                    .map_children::<()>(|_, c| Ok(fix(c, funs, bound)))
                    .unwrap(),
            }
        }
        fix(parse_term(s, Flavor::Mfh).unwrap(), funs, &mut Vec::new())
    }

    #[test]
    fn beta_rename_call_site() {
        let t = mfe("(fun(X) -> h(X) end)(Y+2)");
        assert_eq!(step_beta(&t, Flavor::Mfe), Some(mfe("h(Y+2)")));
    }

    #[test]
    fn beta_curried_reorder() {
        let t = mfh("(\\x -> \\y -> f y x) z", &[("f", 2)]);
        let out = step_beta(&t, Flavor::Mfh).unwrap();
        assert!(alpha_eq(&out, &mfh("\\y -> f y z", &[("f", 2)])));
    }

    #[test]
    fn beta_identity() {
        let t = mfe("(fun(X) -> X end)(41+1)");
        assert_eq!(step_beta(&t, Flavor::Mfe), Some(mfe("41+1")));
    }

    #[test]
    fn beta_arity_mismatch_does_not_fire() {
        let t = mfe("(fun(X, Y) -> X end)(1)");
        assert_eq!(step_beta(&t, Flavor::Mfe), None);
    }

    #[test]
    fn beta_moves_section_flag() {
        let t = Term::app_infix(
            mfh("\\x y -> h x y", &[("h", 2)]),
            vec![Term::var("z")],
        );
        let out = step_beta(&t, Flavor::Mfh).unwrap();
        let Term::Lam(_, body) = &out else { panic!() };
        let Term::App(inner, _, _) = &**body else { panic!() };
        assert!(matches!(&**inner, Term::App(_, _, Sugar::Infix)));
    }

    #[test]
    fn eta_curried() {
        let ctx = RuleContext::new(Flavor::Mfh);
        let t = mfh("\\y -> h z y", &[("h", 2)]);
        assert_eq!(step_eta_reduce(&t, &ctx), Some(mfh("h z", &[("h", 2)])));
    }

    #[test]
    fn eta_blocked_by_side_conditions() {
        let ctx = RuleContext::new(Flavor::Mfe);
        assert_eq!(step_eta_reduce(&mfe("fun(X) -> f(X,3) end"), &ctx), None);
        let ctx = RuleContext::new(Flavor::Mfh);
        assert_eq!(step_eta_reduce(&mfh("\\x -> f x x", &[("f", 2)]), &ctx), None);
        // Saturated application: eta would evaluate the call early.
        assert_eq!(step_eta_reduce(&mfh("\\x -> f 1 2 x", &[("f", 2)]), &ctx), None);
        // Unknown head: might not be a function at all.
        assert_eq!(step_eta_reduce(&mfh("\\x -> g x", &[]), &ctx), None);
    }

    #[test]
    fn eta_collapses_doubled_lambda() {
        let ctx = RuleContext::new(Flavor::Mfe);
        let t = mfe("fun(X_1) -> (fun(X) -> f(X,3) end)(X_1) end");
        assert_eq!(step_eta_reduce(&t, &ctx), Some(mfe("fun(X) -> f(X,3) end")));
    }

    #[test]
    fn eta_expand_and_atom_lift() {
        let ctx = RuleContext::new(Flavor::Mfe).with_target(FunId::new("f", 2));
        let t = Term::funref("f", 2);
        assert_eq!(
            step_eta_expand_ref(&t, &ctx),
            Some(mfe("fun(X_1, X_2) -> f(X_1, X_2) end"))
        );
        let t = mfe("spawn(f, [1,2])");
        let lifted = step_atom_lift(&t, &ctx).unwrap();
        assert!(alpha_eq(&lifted, &mfe("spawn(fun f/2, [1,2])")));
        assert!(matches!(lifted, Term::App(_, _, Sugar::Atom)));
        let t = mfe("spawn(f, [1])");
        assert_eq!(step_atom_lift(&t, &ctx), None);
        let t = mfe("g(f)");
        assert_eq!(step_atom_lift(&t, &ctx), None);
    }
}
