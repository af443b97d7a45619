//! Core term representation shared by both surface flavors.
//!
//! MFE (the strict, uncurried flavor) produces n-ary applications and
//! lambdas; MFH (the curried flavor) produces unary ones. Everything in this
//! module is agnostic to that difference.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub type Name = String;

/// Surface flavor of a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    /// Strict, uncurried, `fun`/`end`, atoms.
    Mfe,
    /// Curried, juxtaposition application, backtick infix and sections.
    Mfh,
}

impl Flavor {
    pub fn from_extension(ext: &str) -> Option<Flavor> {
        match ext {
            "mfe" => Some(Flavor::Mfe),
            "mfh" => Some(Flavor::Mfh),
            _ => None,
        }
    }

    /// Base used when the engine invents a parameter name.
    pub fn fresh_base(self) -> &'static str {
        match self {
            Flavor::Mfe => "X",
            Flavor::Mfh => "x",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Mfe => "mfe",
            Flavor::Mfh => "mfh",
        })
    }
}

/// How an application was written at the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sugar {
    #[default]
    Prefix,
    /// Backtick application or a section. Only the printer looks at this.
    Infix,
    /// MFE `spawn`/`apply` whose function operand was written as an atom.
    Atom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Int(i64),
    List(Vec<Term>),
    Atom(Name),
    /// Reference to a top-level function or intrinsic by name and arity.
    FunRef(Name, usize),
    Lam(Vec<Name>, Box<Term>),
    App(Box<Term>, Vec<Term>, Sugar),
    BinOp(BinOp, Box<Term>, Box<Term>),
}

/// Function identity: name plus arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FunId {
    pub name: Name,
    pub arity: usize,
}

impl FunId {
    pub fn new(name: impl Into<Name>, arity: usize) -> Self {
        FunId { name: name.into(), arity }
    }

    /// Parses `name/arity`.
    pub fn parse(s: &str) -> Option<FunId> {
        let (name, arity) = s.rsplit_once('/')?;
        if name.is_empty() {
            return None;
        }
        Some(FunId::new(name, arity.trim().parse().ok()?))
    }
}

impl fmt::Display for FunId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

// Constructors. They keep test fixtures and the engine readable.
impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn funref(name: impl Into<Name>, arity: usize) -> Term {
        Term::FunRef(name.into(), arity)
    }

    pub fn atom(name: impl Into<Name>) -> Term {
        Term::Atom(name.into())
    }

    pub fn lam<S: Into<Name>>(params: impl IntoIterator<Item = S>, body: Term) -> Term {
        Term::Lam(params.into_iter().map(Into::into).collect(), Box::new(body))
    }

    pub fn app(head: Term, args: Vec<Term>) -> Term {
        Term::App(Box::new(head), args, Sugar::Prefix)
    }

    pub fn app_infix(head: Term, args: Vec<Term>) -> Term {
        Term::App(Box::new(head), args, Sugar::Infix)
    }

    /// Left-nested chain of unary applications.
    pub fn app_curried(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, |h, a| Term::app(h, vec![a]))
    }

    /// Right-nested chain of unary lambdas.
    pub fn lam_curried<S: Into<Name>>(params: impl IntoIterator<Item = S>, body: Term) -> Term {
        let params: Vec<Name> = params.into_iter().map(Into::into).collect();
        params
            .into_iter()
            .rev()
            .fold(body, |b, p| Term::Lam(vec![p], Box::new(b)))
    }

    pub fn binop(op: BinOp, l: Term, r: Term) -> Term {
        Term::BinOp(op, Box::new(l), Box::new(r))
    }

    /// Builds the saturated application of `head` to `args` in the flavor's
    /// own shape: one n-ary node for MFE, a unary chain for MFH.
    pub fn call(flavor: Flavor, head: Term, args: Vec<Term>) -> Term {
        match flavor {
            Flavor::Mfe => Term::app(head, args),
            Flavor::Mfh if args.is_empty() => head,
            Flavor::Mfh => Term::app_curried(head, args),
        }
    }

    /// Builds a lambda over `params` in the flavor's own shape.
    pub fn abs(flavor: Flavor, params: Vec<Name>, body: Term) -> Term {
        match flavor {
            Flavor::Mfe => Term::Lam(params, Box::new(body)),
            Flavor::Mfh if params.is_empty() => body,
            Flavor::Mfh => Term::lam_curried(params, body),
        }
    }

    /// Immediate subterms in a fixed order. Paths in traces index into this.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Int(_) | Term::Atom(_) | Term::FunRef(..) => Vec::new(),
            Term::List(items) => items.iter().collect(),
            Term::Lam(_, body) => vec![body],
            Term::App(head, args, _) => std::iter::once(&**head).chain(args.iter()).collect(),
            Term::BinOp(_, l, r) => vec![l, r],
        }
    }

    /// Rebuilds the node with each child mapped by `f`.
    pub fn map_children<E>(
        self,
        mut f: impl FnMut(usize, Term) -> Result<Term, E>,
    ) -> Result<Term, E> {
        Ok(match self {
            t @ (Term::Var(_) | Term::Int(_) | Term::Atom(_) | Term::FunRef(..)) => t,
            Term::List(items) => Term::List(
                items
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| f(i, t))
                    .collect::<Result<_, _>>()?,
            ),
            Term::Lam(ps, body) => Term::Lam(ps, Box::new(f(0, *body)?)),
            Term::App(head, args, sugar) => {
                let head = f(0, *head)?;
                let args = args
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| f(i + 1, t))
                    .collect::<Result<_, _>>()?;
                Term::App(Box::new(head), args, sugar)
            }
            Term::BinOp(op, l, r) => {
                let l = f(0, *l)?;
                let r = f(1, *r)?;
                Term::BinOp(op, Box::new(l), Box::new(r))
            }
        })
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Visits every subterm, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn count(&self, pred: impl Fn(&Term) -> bool) -> usize {
        let mut n = 0;
        self.walk(&mut |t| {
            if pred(t) {
                n += 1
            }
        });
        n
    }

    pub fn mentions_funref(&self, id: &FunId) -> bool {
        self.count(|t| matches!(t, Term::FunRef(n, a) if *n == id.name && *a == id.arity)) > 0
    }

    /// Splits a unary application chain into its head and argument list.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut head = self;
        let mut args = Vec::new();
        while let Term::App(h, a, _) = head {
            for x in a.iter().rev() {
                args.push(x);
            }
            head = h;
        }
        args.reverse();
        (head, args)
    }

    /// Syntactic values: evaluating them cannot fail, diverge, or consume fuel
    /// beyond a variable lookup.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Var(_) | Term::Int(_) | Term::Atom(_) | Term::FunRef(..) | Term::Lam(..) => true,
            Term::List(items) => items.iter().all(Term::is_value),
            Term::App(..) | Term::BinOp(..) => false,
        }
    }
}

/// A named top-level function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: Name,
    pub params: Vec<Name>,
    pub body: Term,
}

impl Definition {
    pub fn new<S: Into<Name>>(
        name: impl Into<Name>,
        params: impl IntoIterator<Item = S>,
        body: Term,
    ) -> Self {
        Definition {
            name: name.into(),
            params: params.into_iter().map(Into::into).collect(),
            body,
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn id(&self) -> FunId {
        FunId::new(self.name.clone(), self.arity())
    }

    /// Every identifier bound or referenced in the definition.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = self.params.iter().cloned().collect();
        collect_names(&self.body, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub flavor: Flavor,
    pub defs: Vec<Definition>,
}

impl Program {
    pub fn new(flavor: Flavor, defs: Vec<Definition>) -> Self {
        Program { flavor, defs }
    }

    pub fn find(&self, id: &FunId) -> Option<&Definition> {
        self.defs
            .iter()
            .find(|d| d.name == id.name && d.arity() == id.arity)
    }

    pub fn position(&self, id: &FunId) -> Option<usize> {
        self.defs
            .iter()
            .position(|d| d.name == id.name && d.arity() == id.arity)
    }

    pub fn find_by_name<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Definition> + 'a {
        self.defs.iter().filter(move |d| d.name == name)
    }

    pub fn ids(&self) -> Vec<FunId> {
        self.defs.iter().map(Definition::id).collect()
    }

    /// Number of `FunRef(id)` nodes across all bodies.
    pub fn count_refs(&self, id: &FunId) -> usize {
        self.defs
            .iter()
            .map(|d| {
                d.body
                    .count(|t| matches!(t, Term::FunRef(n, a) if *n == id.name && *a == id.arity))
            })
            .sum()
    }
}

fn collect_names(t: &Term, out: &mut BTreeSet<Name>) {
    t.walk(&mut |t| match t {
        Term::Var(n) => {
            out.insert(n.clone());
        }
        Term::Lam(ps, _) => out.extend(ps.iter().cloned()),
        _ => {}
    });
}

/// Every identifier occurring in `t`, bound or free.
pub fn all_names(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_names(t, &mut out);
    out
}

/// Free variables. Function references and atoms are not variables.
pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    free_vars_into(t, &mut bound, &mut out);
    out
}

fn free_vars_into(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(n) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        Term::Lam(ps, body) => {
            let mark = bound.len();
            bound.extend(ps.iter().cloned());
            free_vars_into(body, bound, out);
            bound.truncate(mark);
        }
        _ => {
            for c in t.children() {
                free_vars_into(c, bound, out);
            }
        }
    }
}

pub fn is_closed(t: &Term) -> bool {
    free_vars(t).is_empty()
}

/// Strips a trailing `_<digits>` so repeated freshening yields `X_2`, not `X_1_1`.
pub fn base_name(name: &str) -> &str {
    match name.rsplit_once('_') {
        Some((base, k)) if !base.is_empty() && !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()) => base,
        _ => name,
    }
}

/// `base_k` for the smallest `k >= 1` not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let base = base_name(base);
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded search")
}

/// `n` distinct fresh names from the same base.
pub fn fresh_names(base: &str, n: usize, avoid: &BTreeSet<Name>) -> Vec<Name> {
    let mut avoid = avoid.clone();
    (0..n)
        .map(|_| {
            let x = fresh_name(base, &avoid);
            avoid.insert(x.clone());
            x
        })
        .collect()
}

/// Equality up to consistent renaming of bound variables. Sugar flags are
/// surface provenance and do not participate.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha_eq_in(a, b, &mut Vec::new(), &mut Vec::new())
}

fn alpha_eq_in(a: &Term, b: &Term, env_a: &mut Vec<Name>, env_b: &mut Vec<Name>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            // Innermost binder wins; bound vars must sit at the same binder.
            let ix = env_a.iter().rposition(|n| n == x);
            let iy = env_b.iter().rposition(|n| n == y);
            match (ix, iy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Int(x), Term::Int(y)) => x == y,
        (Term::Atom(x), Term::Atom(y)) => x == y,
        (Term::FunRef(x, n), Term::FunRef(y, m)) => x == y && n == m,
        (Term::List(xs), Term::List(ys)) => {
            xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys)
                    .all(|(x, y)| alpha_eq_in(x, y, env_a, env_b))
        }
        (Term::Lam(ps, b1), Term::Lam(qs, b2)) => {
            if ps.len() != qs.len() {
                return false;
            }
            let (ma, mb) = (env_a.len(), env_b.len());
            env_a.extend(ps.iter().cloned());
            env_b.extend(qs.iter().cloned());
            let eq = alpha_eq_in(b1, b2, env_a, env_b);
            env_a.truncate(ma);
            env_b.truncate(mb);
            eq
        }
        (Term::App(h1, a1, _), Term::App(h2, a2, _)) => {
            a1.len() == a2.len()
                && alpha_eq_in(h1, h2, env_a, env_b)
                && a1
                    .iter()
                    .zip(a2)
                    .all(|(x, y)| alpha_eq_in(x, y, env_a, env_b))
        }
        (Term::BinOp(o1, l1, r1), Term::BinOp(o2, l2, r2)) => {
            o1 == o2 && alpha_eq_in(l1, l2, env_a, env_b) && alpha_eq_in(r1, r2, env_a, env_b)
        }
        _ => false,
    }
}

/// Definitions compared with their parameters as binders.
pub fn alpha_eq_def(a: &Definition, b: &Definition) -> bool {
    a.name == b.name
        && alpha_eq(
            &Term::Lam(a.params.clone(), Box::new(a.body.clone())),
            &Term::Lam(b.params.clone(), Box::new(b.body.clone())),
        )
}

pub fn alpha_eq_program(a: &Program, b: &Program) -> bool {
    a.flavor == b.flavor
        && a.defs.len() == b.defs.len()
        && a.defs.iter().zip(&b.defs).all(|(x, y)| alpha_eq_def(x, y))
}

/// Renames every occurrence of one function identity to another name.
pub fn rename_funref(t: &Term, from: &FunId, to: &str) -> Term {
    match t {
        Term::FunRef(n, a) if *n == from.name && *a == from.arity => Term::FunRef(to.into(), *a),
        _ => t
            .clone()
            .map_children::<std::convert::Infallible>(|_, c| Ok(rename_funref(&c, from, to)))
            .unwrap_or_else(|e| match e {}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("X")
    }

    #[test]
    fn free_vars_closed_lambda() {
        let t = Term::lam(["X"], Term::app(Term::funref("h", 1), vec![x()]));
        assert!(free_vars(&t).is_empty());
    }

    #[test]
    fn free_vars_ignores_funrefs() {
        // \y -> f y z
        let t = Term::lam(
            ["y"],
            Term::app_curried(Term::funref("f", 2), [Term::var("y"), Term::var("z")]),
        );
        assert_eq!(free_vars(&t), BTreeSet::from(["z".to_string()]));
    }

    #[test]
    fn free_vars_binop() {
        let t = Term::binop(BinOp::Add, x(), Term::var("Y"));
        assert_eq!(
            free_vars(&t),
            BTreeSet::from(["X".to_string(), "Y".to_string()])
        );
    }

    #[test]
    fn alpha_eq_examples() {
        let id_x = Term::lam(["X"], x());
        let id_y = Term::lam(["Y"], Term::var("Y"));
        let const_y = Term::lam(["X"], Term::var("Y"));
        assert!(alpha_eq(&id_x, &id_y));
        assert!(!alpha_eq(&id_x, &const_y));
        assert!(alpha_eq(&const_y, &const_y));
    }

    #[test]
    fn alpha_eq_respects_shadowing() {
        // fun(X) -> fun(X) -> X end end  vs  fun(A) -> fun(B) -> A end end
        let a = Term::lam(["X"], Term::lam(["X"], x()));
        let b = Term::lam(["A"], Term::lam(["B"], Term::var("A")));
        let c = Term::lam(["A"], Term::lam(["B"], Term::var("B")));
        assert!(!alpha_eq(&a, &b));
        assert!(alpha_eq(&a, &c));
    }

    #[test]
    fn alpha_eq_ignores_sugar() {
        let a = Term::app(Term::funref("f", 2), vec![Term::Int(1)]);
        let b = Term::app_infix(Term::funref("f", 2), vec![Term::Int(1)]);
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn fresh_names_skip_taken() {
        let avoid = BTreeSet::from(["X_1".to_string(), "X".to_string()]);
        assert_eq!(fresh_name("X", &avoid), "X_2");
        assert_eq!(fresh_name("X_7", &BTreeSet::new()), "X_1");
        assert_eq!(fresh_names("x", 2, &BTreeSet::new()), vec!["x_1", "x_2"]);
    }

    #[test]
    fn base_name_strips_numeric_suffix_only() {
        assert_eq!(base_name("X_12"), "X");
        assert_eq!(base_name("old_add"), "old_add");
        assert_eq!(base_name("_1"), "_1");
    }

    #[test]
    fn funid_parse() {
        assert_eq!(FunId::parse("f/1"), Some(FunId::new("f", 1)));
        assert_eq!(FunId::parse("lists:map/2"), Some(FunId::new("lists:map", 2)));
        assert_eq!(FunId::parse("f"), None);
        assert_eq!(FunId::parse("/2"), None);
    }

    #[test]
    fn spine_of_curried_chain() {
        let t = Term::app_curried(Term::funref("f", 2), [Term::Int(1), Term::Int(2)]);
        let (h, args) = t.spine();
        assert_eq!(h, &Term::funref("f", 2));
        assert_eq!(args, vec![&Term::Int(1), &Term::Int(2)]);
    }
}
