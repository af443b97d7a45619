//! Flavor-specific tidy-up after substitution: rewrite rules, the reference
//! prepass, and a fuel-limited normalizer.

mod rules;

use std::collections::{BTreeMap, VecDeque};

pub use rules::{
    step_atom_lift, step_beta, step_eta_expand_ref, step_eta_reduce, Rule, RuleContext,
};

use crate::error::{Error, Result};
use crate::resolve::ATOM_HEADS;
use crate::syntax::print_term;
use crate::term::{Flavor, FunId, Program, Sugar, Term};
use rules::{atom_arity, AtomArity};

pub const DEFAULT_FUEL: usize = 10_000;
const RECENT_FIRINGS: usize = 10;

/// Rules run by [`normalize`] after substitution, in priority order.
pub fn tidy_rules(_flavor: Flavor) -> Vec<Rule> {
    vec![Rule::Beta, Rule::EtaReduce]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Try the node itself before its children.
    Outermost,
    /// Normalize children first.
    Innermost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Strategy {
    pub order: Order,
    /// Maximum number of rule firings.
    pub fuel: usize,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy {
            order: Order::Outermost,
            fuel: DEFAULT_FUEL,
        }
    }
}

/// One rule application, as reported to a trace observer.
#[derive(Debug, Clone)]
pub struct Firing {
    pub rule: Rule,
    /// `def/arity:` followed by child indices from the body root.
    pub path: String,
    pub before: Term,
    pub after: Term,
}

impl Firing {
    pub fn render(&self, flavor: Flavor) -> String {
        format!(
            "{} @ {} : {} ==> {}",
            self.rule,
            self.path,
            print_term(&self.before, flavor),
            print_term(&self.after, flavor)
        )
    }
}

pub type Observer<'a> = &'a mut dyn FnMut(&Firing);

/// Stateful normalizer; fuel and statistics are shared across every term it
/// is asked to normalize.
pub struct Normalizer<'a> {
    rules: Vec<Rule>,
    strategy: Strategy,
    ctx: RuleContext,
    fired: usize,
    counts: BTreeMap<Rule, usize>,
    recent: VecDeque<Firing>,
    observer: Option<Observer<'a>>,
    label: String,
    path: Vec<usize>,
}

impl<'a> Normalizer<'a> {
    pub fn new(rules: Vec<Rule>, strategy: Strategy, ctx: RuleContext) -> Self {
        Normalizer {
            rules,
            strategy,
            ctx,
            fired: 0,
            counts: BTreeMap::new(),
            recent: VecDeque::new(),
            observer: None,
            label: String::new(),
            path: Vec::new(),
        }
    }

    pub fn with_observer(mut self, observer: Observer<'a>) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn firings(&self) -> usize {
        self.fired
    }

    pub fn counts(&self) -> &BTreeMap<Rule, usize> {
        &self.counts
    }

    pub fn normalize(&mut self, t: Term, label: &str) -> Result<Term> {
        self.label = label.to_string();
        self.path.clear();
        match self.strategy.order {
            Order::Outermost => self.outermost(t),
            Order::Innermost => self.innermost(t),
        }
    }

    pub fn normalize_program(&mut self, p: &Program) -> Result<Program> {
        let mut out = p.clone();
        for d in &mut out.defs {
            let label = d.id().to_string();
            d.body = self.normalize(std::mem::replace(&mut d.body, Term::Int(0)), &label)?;
        }
        Ok(out)
    }

    fn try_root(&mut self, t: &Term) -> Result<Option<Term>> {
        let Some((rule, after)) = self
            .rules
            .iter()
            .find_map(|r| r.fire(t, &self.ctx).map(|a| (*r, a)))
        else {
            return Ok(None);
        };
        if self.fired >= self.strategy.fuel {
            let flavor = self.ctx.flavor;
            return Err(Error::RewriteDivergence {
                fuel: self.strategy.fuel,
                last: self.recent.iter().map(|f| f.render(flavor)).collect(),
            });
        }
        self.fired += 1;
        *self.counts.entry(rule).or_default() += 1;
        let path = self
            .path
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".");
        let firing = Firing {
            rule,
            path: format!("{}:{}", self.label, if path.is_empty() { "root" } else { &path }),
            before: t.clone(),
            after: after.clone(),
        };
        if let Some(obs) = self.observer.as_mut() {
            obs(&firing);
        }
        if self.recent.len() == RECENT_FIRINGS {
            self.recent.pop_front();
        }
        self.recent.push_back(firing);
        Ok(Some(after))
    }

    fn children(&mut self, t: Term, f: fn(&mut Self, Term) -> Result<Term>) -> Result<Term> {
        t.map_children(|i, c| {
            self.path.push(i);
            let r = f(self, c);
            self.path.pop();
            r
        })
    }

    fn outermost(&mut self, mut t: Term) -> Result<Term> {
        loop {
            if let Some(next) = self.try_root(&t)? {
                t = next;
                continue;
            }
            let before = self.fired;
            t = self.children(t, Self::outermost)?;
            if self.fired == before {
                return Ok(t);
            }
            match self.try_root(&t)? {
                Some(next) => t = next,
                None => return Ok(t),
            }
        }
    }

    fn innermost(&mut self, t: Term) -> Result<Term> {
        let mut t = self.children(t, Self::innermost)?;
        while let Some(next) = self.try_root(&t)? {
            t = self.children(next, Self::innermost)?;
        }
        Ok(t)
    }
}

/// Normalizes a single term with a fresh normalizer.
pub fn normalize(t: &Term, rules: &[Rule], strategy: Strategy, flavor: Flavor) -> Result<Term> {
    Normalizer::new(rules.to_vec(), strategy, RuleContext::new(flavor)).normalize(t.clone(), "term")
}

/// True when no subterm is a redex for any of `rules`.
pub fn is_normal(t: &Term, rules: &[Rule], ctx: &RuleContext) -> bool {
    let mut normal = true;
    t.walk(&mut |s| {
        if normal && rules.iter().any(|r| r.fire(s, ctx).is_some()) {
            normal = false;
        }
    });
    normal
}

fn prepass_ctx(p: &Program, target: &FunId, ctx: &RuleContext) -> RuleContext {
    let mut c = ctx.clone().with_program(p);
    c.target = Some(target.clone());
    c
}

/// Wraps every reference to `target` outside call-head position in an
/// explicit lambda. Returns the program and the number of wrapped references.
pub fn eta_expand_refs(p: &Program, target: &FunId, ctx: &RuleContext) -> (Program, usize) {
    let base = prepass_ctx(p, target, ctx);
    let mut out = p.clone();
    let mut wrapped = 0;
    for d in &mut out.defs {
        let mut c = base.clone();
        c.in_scope.extend(d.names());
        d.body = expand_in(&d.body, false, &c, &mut wrapped);
    }
    (out, wrapped)
}

fn expand_in(t: &Term, head_position: bool, ctx: &RuleContext, wrapped: &mut usize) -> Term {
    if !head_position {
        if let Some(w) = step_eta_expand_ref(t, ctx) {
            *wrapped += 1;
            return w;
        }
    }
    match t {
        Term::App(h, args, sugar) => Term::App(
            Box::new(expand_in(h, true, ctx, wrapped)),
            args.iter().map(|a| expand_in(a, false, ctx, wrapped)).collect(),
            *sugar,
        ),
        _ => t
            .clone()
            .map_children::<std::convert::Infallible>(|_, c| Ok(expand_in(&c, false, ctx, wrapped)))
            .unwrap_or_else(|e| match e {}),
    }
}

/// Puts back atoms lifted by [`atom_lift`] where the operand is still a
/// plain reference that the atom designates unambiguously.
pub fn restore_atoms(p: &Program) -> Program {
    let mut out = p.clone();
    for d in &mut out.defs {
        d.body = restore_in(&d.body, p);
    }
    out
}

fn restore_in(t: &Term, p: &Program) -> Term {
    let t = t
        .clone()
        .map_children::<std::convert::Infallible>(|_, c| Ok(restore_in(&c, p)))
        .unwrap_or_else(|e| match e {});
    let Term::App(h, mut args, Sugar::Atom) = t else { return t };
    if let [Term::FunRef(f, n), list] = args.as_slice() {
        let designates = match list {
            Term::List(items) => items.len() == *n,
            _ => p.find_by_name(f).all(|d| d.arity() == *n),
        };
        if designates {
            args[0] = Term::Atom(f.clone());
            return Term::App(h, args, Sugar::Prefix);
        }
    }
    // Still flagged, so a later refactoring can restore it.
    Term::App(h, args, Sugar::Atom)
}

/// Turns atoms naming `target` in the function operand of `spawn`/`apply`
/// into function references. Returns the program and the number lifted.
pub fn atom_lift(p: &Program, target: &FunId, ctx: &RuleContext) -> Result<(Program, usize)> {
    let c = prepass_ctx(p, target, ctx);
    let mut out = p.clone();
    let mut lifted = 0;
    for d in &mut out.defs {
        d.body = lift_in(&d.body, &c, &mut lifted)?;
    }
    Ok((out, lifted))
}

fn lift_in(t: &Term, ctx: &RuleContext, lifted: &mut usize) -> Result<Term> {
    let t = t.clone().map_children(|_, c| lift_in(&c, ctx, lifted))?;
    if let Term::App(h, args, _) = &t {
        let target = ctx.target.as_ref().expect("prepass target");
        let is_atom_head = matches!(&**h, Term::FunRef(n, 2) if ATOM_HEADS.contains(&n.as_str()));
        if is_atom_head && args.len() == 2 && matches!(&args[0], Term::Atom(a) if *a == target.name)
        {
            if let AtomArity::Ambiguous = atom_arity(&args[1], target, ctx) {
                return Err(Error::AmbiguousAtomArity(format!(
                    "{} passed to {} with a list of unknown length",
                    target.name,
                    crate::syntax::print_term(h, ctx.flavor)
                )));
            }
        }
    }
    match step_atom_lift(&t, ctx) {
        Some(next) => {
            *lifted += 1;
            Ok(next)
        }
        None => Ok(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_str, parse_term, print_program};
    use crate::term::{alpha_eq, Definition};

    fn mfe_program(src: &str) -> Program {
        parse_str(src, Flavor::Mfe).unwrap()
    }

    #[test]
    fn eta_expand_only_outside_call_heads() {
        let p = mfe_program("f(X) -> X+3.\ng(Xs) -> lists:map(fun f/1, Xs).\nk(Y) -> f(Y+2).");
        let (out, _) = eta_expand_refs(&p, &FunId::new("f", 1), &RuleContext::new(Flavor::Mfe));
        assert_eq!(
            print_program(&out),
            "f(X) -> X + 3.\ng(Xs) -> lists:map(fun(X_1) -> f(X_1) end, Xs).\nk(Y) -> f(Y + 2).\n"
        );
    }

    #[test]
    fn eta_expand_spawn_operand() {
        let p = mfe_program("f(X) -> X.\ns() -> spawn(fun f/1, [3]).");
        let (out, _) = eta_expand_refs(&p, &FunId::new("f", 1), &RuleContext::new(Flavor::Mfe));
        assert_eq!(
            crate::syntax::print_definition(&out.defs[1], Flavor::Mfe),
            "s() -> spawn(fun(X_1) -> f(X_1) end, [3])."
        );
    }

    #[test]
    fn atom_lift_then_expand() {
        let p = mfe_program("f(A, B) -> A - B.\ns() -> spawn(f, [1,2]).\nt() -> g(f).\ng(Q) -> Q.");
        let target = FunId::new("f", 2);
        let ctx = RuleContext::new(Flavor::Mfe);
        let (lifted, n) = atom_lift(&p, &target, &ctx).unwrap();
        assert_eq!(n, 1);
        let (out, wrapped) = eta_expand_refs(&lifted, &target, &ctx);
        assert_eq!(wrapped, 1);
        assert_eq!(
            crate::syntax::print_definition(&out.defs[1], Flavor::Mfe),
            "s() -> spawn(fun(X_1, X_2) -> f(X_1, X_2) end, [1, 2])."
        );
        assert_eq!(out.defs[2], p.defs[2]);
    }

    #[test]
    fn atom_lift_ambiguous_arity() {
        let p = mfe_program("f(A) -> A.\nf(A, B) -> B.\ns(L) -> apply(f, L).");
        let err = atom_lift(&p, &FunId::new("f", 1), &RuleContext::new(Flavor::Mfe)).unwrap_err();
        assert!(matches!(err, Error::AmbiguousAtomArity(_)));
    }

    #[test]
    fn normalize_curried_rename_trace() {
        // map ((\x -> \y -> h x y) z) xs
        let t = Term::app_curried(
            Term::funref("map", 2),
            [
                Term::app(
                    Term::lam_curried(
                        ["x", "y"],
                        Term::app_curried(Term::funref("h", 2), [Term::var("x"), Term::var("y")]),
                    ),
                    vec![Term::var("z")],
                ),
                Term::var("xs"),
            ],
        );
        let mut seen = Vec::new();
        let mut obs = |f: &Firing| seen.push(f.rule);
        let mut n = Normalizer::new(tidy_rules(Flavor::Mfh), Strategy::default(), RuleContext::new(Flavor::Mfh))
            .with_observer(&mut obs);
        let out = n.normalize(t, "g/2").unwrap();
        drop(n);
        assert_eq!(print_term(&out, Flavor::Mfh), "map (h z) xs");
        assert_eq!(seen, vec![Rule::Beta, Rule::EtaReduce]);
    }

    #[test]
    fn normalize_nested_identity() {
        let t = parse_term("(fun(X) -> (fun(Y) -> Y end)(X) end)(7)", Flavor::Mfe).unwrap();
        for order in [Order::Outermost, Order::Innermost] {
            let out = normalize(&t, &tidy_rules(Flavor::Mfe), Strategy { order, fuel: 100 }, Flavor::Mfe).unwrap();
            assert_eq!(out, Term::Int(7));
        }
    }

    #[test]
    fn normal_form_is_fixpoint() {
        let t = parse_term("h(Y + 2) - h(Y - 2)", Flavor::Mfe).unwrap();
        let mut n = Normalizer::new(tidy_rules(Flavor::Mfe), Strategy::default(), RuleContext::new(Flavor::Mfe));
        let out = n.normalize(t.clone(), "g/1").unwrap();
        assert_eq!(out, t);
        assert_eq!(n.firings(), 0);
    }

    #[test]
    fn divergence_reports_recent_firings() {
        let omega = parse_term(
            "(fun(Y) -> Y(Y) end)(fun(Z) -> Z(Z) end)",
            Flavor::Mfe,
        )
        .unwrap();
        let err = normalize(&omega, &[Rule::Beta], Strategy { order: Order::Outermost, fuel: 50 }, Flavor::Mfe)
            .unwrap_err();
        match err {
            Error::RewriteDivergence { fuel, last } => {
                assert_eq!(fuel, 50);
                assert_eq!(last.len(), 10);
                assert!(last.iter().all(|l| l.starts_with("BETA @ term:root")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn doubled_lambda_keeps_adapter_names() {
        let t = parse_term("fun(X_1) -> (fun(X) -> f(X,3) end)(X_1) end", Flavor::Mfe).unwrap();
        let out = normalize(&t, &tidy_rules(Flavor::Mfe), Strategy::default(), Flavor::Mfe).unwrap();
        assert_eq!(print_term(&out, Flavor::Mfe), "fun(X) -> f(X, 3) end");
        let d = Definition::new("g", ["Xs"], out);
        assert!(alpha_eq(&d.body, &parse_term("fun(Q) -> f(Q,3) end", Flavor::Mfe).unwrap()));
    }
}
