//! Random terms and programs for property tests.
//!
//! Typed generation keeps terms well-typed in a simple type system, so every
//! generated program terminates and evaluates without object-level errors.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::equiv::Shape;
use crate::term::{BinOp, Definition, Flavor, Name, Program, Sugar, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ty {
    Int,
    List,
    /// MFH function types are always unary.
    Fun(Vec<Ty>, Box<Ty>),
}

impl Ty {
    pub fn fun(params: Vec<Ty>, ret: Ty) -> Ty {
        Ty::Fun(params, Box::new(ret))
    }

    pub fn int_to_int() -> Ty {
        Ty::fun(vec![Ty::Int], Ty::Int)
    }

    /// Type of a function taking `params` in `flavor`.
    pub fn of_sig(flavor: Flavor, params: &[Ty], ret: &Ty) -> Ty {
        match flavor {
            Flavor::Mfe => Ty::fun(params.to_vec(), ret.clone()),
            Flavor::Mfh => params
                .iter()
                .rev()
                .fold(ret.clone(), |acc, p| Ty::fun(vec![p.clone()], acc)),
        }
    }

    pub fn shape(&self) -> Option<Shape> {
        match self {
            Ty::Int => Some(Shape::Int),
            Ty::List => Some(Shape::ListInt),
            t if *t == Ty::int_to_int() => Some(Shape::FunIntInt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sig {
    pub name: Name,
    pub params: Vec<Ty>,
    pub ret: Ty,
}

impl Sig {
    pub fn ty(&self, flavor: Flavor) -> Ty {
        Ty::of_sig(flavor, &self.params, &self.ret)
    }
}

pub struct TermGen<'r, R: Rng> {
    pub rng: &'r mut R,
    pub flavor: Flavor,
    /// Top-level functions callable from generated terms.
    pub sigs: Vec<Sig>,
    env: Vec<(Name, Ty)>,
}

const MFE_POOL: [&str; 4] = ["X", "Y", "Z", "W"];
const MFH_POOL: [&str; 4] = ["x", "y", "z", "w"];

impl<'r, R: Rng> TermGen<'r, R> {
    pub fn new(rng: &'r mut R, flavor: Flavor, sigs: Vec<Sig>) -> Self {
        TermGen {
            rng,
            flavor,
            sigs,
            env: Vec::new(),
        }
    }

    pub fn with_env(mut self, env: Vec<(Name, Ty)>) -> Self {
        self.env = env;
        self
    }

    fn pool(&self) -> &'static [&'static str; 4] {
        match self.flavor {
            Flavor::Mfe => &MFE_POOL,
            Flavor::Mfh => &MFH_POOL,
        }
    }

    /// Binder names drawn from a small pool, so shadowing is common.
    fn binder(&mut self) -> Name {
        self.pool().choose(self.rng).unwrap().to_string()
    }

    fn visible(&self, ty: &Ty) -> Vec<Name> {
        let mut seen = Vec::new();
        let mut out = Vec::new();
        for (x, t) in self.env.iter().rev() {
            if seen.contains(x) {
                continue;
            }
            seen.push(x.clone());
            if t == ty {
                out.push(x.clone());
            }
        }
        out
    }

    fn small_int(&mut self) -> Term {
        Term::Int(self.rng.gen_range(-20..=20))
    }

    fn int_list(&mut self) -> Term {
        let n = self.rng.gen_range(0..=3);
        Term::List((0..n).map(|_| self.small_int()).collect())
    }

    fn map_head(&self) -> Term {
        match self.flavor {
            Flavor::Mfe => Term::funref("lists:map", 2),
            Flavor::Mfh => Term::funref("map", 2),
        }
    }

    pub fn gen(&mut self, ty: &Ty, depth: usize) -> Term {
        if depth == 0 || self.rng.gen_ratio(1, 5) {
            return self.leaf(ty);
        }
        let d = depth - 1;
        match ty {
            Ty::Int => match self.rng.gen_range(0..9) {
                0..=2 => {
                    let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul].choose(self.rng).unwrap();
                    Term::binop(op, self.gen(&Ty::Int, d), self.gen(&Ty::Int, d))
                }
                3 => Term::call(self.flavor, Term::funref("new_sum", 1), vec![self.gen(&Ty::List, d)]),
                4 if self.flavor == Flavor::Mfe => self.apply_call(ty, d),
                4 => self.backtick(d).unwrap_or_else(|| self.call(ty, d)),
                _ => self.call(ty, d),
            },
            Ty::List => match self.rng.gen_range(0..6) {
                0 | 1 => {
                    let n = self.rng.gen_range(0..=3);
                    Term::List((0..n).map(|_| self.gen(&Ty::Int, d)).collect())
                }
                2 | 3 => {
                    let f = self.gen(&Ty::int_to_int(), d);
                    let xs = self.gen(&Ty::List, d);
                    Term::call(self.flavor, self.map_head(), vec![f, xs])
                }
                _ => self.call(ty, d),
            },
            Ty::Fun(ps, r) => match self.rng.gen_range(0..7) {
                0..=2 => self.lambda(ps, r, d),
                3 => self.call(ty, d),
                4 => self.partial(ty, d).unwrap_or_else(|| self.lambda(ps, r, d)),
                5 => self.section(ty, d).unwrap_or_else(|| self.leaf(ty)),
                _ => self.leaf(ty),
            },
        }
    }

    fn leaf(&mut self, ty: &Ty) -> Term {
        let vars = self.visible(ty);
        if !vars.is_empty() && self.rng.gen_bool(0.6) {
            return Term::Var(vars.choose(self.rng).unwrap().clone());
        }
        match ty {
            Ty::Int => self.small_int(),
            Ty::List => self.int_list(),
            Ty::Fun(ps, r) => {
                let refs: Vec<Term> = self
                    .sigs
                    .iter()
                    .filter(|s| !s.params.is_empty() && s.ty(self.flavor) == *ty)
                    .map(|s| Term::funref(s.name.clone(), s.params.len()))
                    .collect();
                match refs.choose(self.rng) {
                    Some(f) if self.rng.gen_bool(0.7) => f.clone(),
                    _ => self.lambda(ps, r, 0),
                }
            }
        }
    }

    fn lambda(&mut self, ps: &[Ty], r: &Ty, depth: usize) -> Term {
        let names: Vec<Name> = match self.flavor {
            Flavor::Mfe => {
                // MFE parameter lists must be distinct.
                let mut pool: Vec<Name> = self.pool().iter().map(|s| s.to_string()).collect();
                pool.shuffle(self.rng);
                (0..ps.len()).map(|i| pool.get(i).cloned().unwrap_or(format!("V{i}"))).collect()
            }
            Flavor::Mfh => ps.iter().map(|_| self.binder()).collect(),
        };
        let mark = self.env.len();
        self.env.extend(names.iter().cloned().zip(ps.iter().cloned()));
        let body = self.gen(r, depth);
        self.env.truncate(mark);
        Term::lam(names, body)
    }

    fn arg_ty(&mut self) -> Ty {
        match self.rng.gen_range(0..5) {
            0..=2 => Ty::Int,
            3 => Ty::List,
            _ => Ty::int_to_int(),
        }
    }

    /// An application producing `ty`: of a top-level function, a variable or
    /// a lambda (a beta redex).
    fn call(&mut self, ty: &Ty, depth: usize) -> Term {
        let sigs: Vec<Sig> = self.sigs.iter().filter(|s| s.ret == *ty && !s.params.is_empty()).cloned().collect();
        let mut seen: Vec<&Name> = Vec::new();
        let mut vars: Vec<(Name, Vec<Ty>)> = Vec::new();
        for (x, t) in self.env.iter().rev() {
            if seen.contains(&x) {
                continue;
            }
            seen.push(x);
            if let Ty::Fun(ps, r) = t {
                if **r == *ty {
                    vars.push((x.clone(), ps.clone()));
                }
            }
        }
        match self.rng.gen_range(0..3) {
            0 if !sigs.is_empty() => {
                let s = sigs.choose(self.rng).unwrap().clone();
                let args = s.params.iter().map(|p| self.gen(p, depth)).collect();
                Term::call(self.flavor, Term::funref(s.name, s.params.len()), args)
            }
            1 if !vars.is_empty() => {
                let (x, ps) = vars.choose(self.rng).unwrap().clone();
                let args = ps.iter().map(|p| self.gen(p, depth)).collect();
                Term::call(self.flavor, Term::Var(x), args)
            }
            _ => self.beta_redex(ty, depth),
        }
    }

    /// `(fun(..) -> body end)(args)` producing `ty`.
    pub fn beta_redex(&mut self, ty: &Ty, depth: usize) -> Term {
        let n = match self.flavor {
            Flavor::Mfe => self.rng.gen_range(0..=2),
            Flavor::Mfh => 1,
        };
        let ps: Vec<Ty> = (0..n).map(|_| self.arg_ty()).collect();
        let head = self.lambda(&ps, ty, depth);
        let args = ps.iter().map(|p| self.gen(p, depth)).collect();
        Term::app(head, args)
    }

    /// MFE `apply(F, [args])` or `spawn(f, [args])` with an atom.
    fn apply_call(&mut self, ty: &Ty, depth: usize) -> Term {
        let head = Term::funref(*["apply", "spawn"].choose(self.rng).unwrap(), 2);
        let atoms: Vec<Sig> = self
            .sigs
            .iter()
            .filter(|s| s.ret == *ty && s.params.iter().all(|p| *p == Ty::Int))
            .cloned()
            .collect();
        if let Some(s) = atoms.choose(self.rng).cloned() {
            if self.rng.gen_bool(0.5) {
                let args = s.params.iter().map(|p| self.gen(p, depth)).collect();
                return Term::app(head, vec![Term::atom(s.name), Term::List(args)]);
            }
        }
        let n = self.rng.gen_range(0..=2);
        let f = self.gen(&Ty::fun(vec![Ty::Int; n], ty.clone()), depth);
        let args = (0..n).map(|_| self.gen(&Ty::Int, depth)).collect();
        Term::app(head, vec![f, Term::List(args)])
    }

    /// MFH: a top-level function applied to some but not all arguments.
    fn partial(&mut self, ty: &Ty, depth: usize) -> Option<Term> {
        if self.flavor != Flavor::Mfh {
            return None;
        }
        let mut options = Vec::new();
        for s in &self.sigs {
            for k in 1..s.params.len() {
                if Ty::of_sig(Flavor::Mfh, &s.params[k..], &s.ret) == *ty {
                    options.push((s.clone(), k));
                }
            }
        }
        let (s, k) = options.choose(self.rng)?.clone();
        let args: Vec<Term> = s.params[..k].iter().map(|p| self.gen(p, depth)).collect();
        Some(Term::app_curried(Term::funref(s.name, s.params.len()), args))
    }

    fn int_binary_sigs(&self) -> Vec<Sig> {
        self.sigs
            .iter()
            .filter(|s| s.params == [Ty::Int, Ty::Int] && s.ret == Ty::Int)
            .cloned()
            .collect()
    }

    /// MFH left or right section of a binary Int function.
    fn section(&mut self, ty: &Ty, depth: usize) -> Option<Term> {
        if self.flavor != Flavor::Mfh || *ty != Ty::int_to_int() {
            return None;
        }
        let s = self.int_binary_sigs().choose(self.rng)?.clone();
        let f = Term::funref(s.name, 2);
        let operand = self.gen(&Ty::Int, depth);
        if self.rng.gen_bool(0.5) {
            Some(Term::app_infix(f, vec![operand]))
        } else {
            let x = crate::term::fresh_name("s", &crate::term::all_names(&operand));
            let inner = Term::app(f, vec![Term::Var(x.clone())]);
            Some(Term::lam([x], Term::App(Box::new(inner), vec![operand], Sugar::Infix)))
        }
    }

    /// MFH ``a `f` b``.
    fn backtick(&mut self, depth: usize) -> Option<Term> {
        let s = self.int_binary_sigs().choose(self.rng)?.clone();
        let a = self.gen(&Ty::Int, depth);
        let b = self.gen(&Ty::Int, depth);
        Some(Term::app(Term::app_infix(Term::funref(s.name, 2), vec![a]), vec![b]))
    }
}

fn gen_sig(rng: &mut impl Rng, name: Name) -> Sig {
    let n = rng.gen_range(0..=3);
    let params = (0..n)
        .map(|_| match rng.gen_range(0..6) {
            0..=3 => Ty::Int,
            4 => Ty::List,
            _ => Ty::int_to_int(),
        })
        .collect();
    let ret = if rng.gen_ratio(3, 4) { Ty::Int } else { Ty::List };
    Sig { name, params, ret }
}

/// A well-typed program whose definitions only call earlier ones.
pub fn gen_program(rng: &mut impl Rng, flavor: Flavor, defs: usize, depth: usize) -> (Program, Vec<Sig>) {
    let mut sigs: Vec<Sig> = Vec::new();
    let mut out = Vec::new();
    let param_names: &[&str] = match flavor {
        Flavor::Mfe => &["A", "B", "C"],
        Flavor::Mfh => &["a", "b", "c"],
    };
    for i in 0..defs {
        let mut sig = gen_sig(rng, format!("f{i}"));
        if i == 0 && flavor == Flavor::Mfh {
            // Sections and backticks need a binary Int function to call.
            sig.params = vec![Ty::Int, Ty::Int];
            sig.ret = Ty::Int;
        }
        let params: Vec<Name> = param_names[..sig.params.len()].iter().map(|s| s.to_string()).collect();
        let env = params.iter().cloned().zip(sig.params.iter().cloned()).collect();
        let body = TermGen::new(&mut *rng, flavor, sigs.clone()).with_env(env).gen(&sig.ret, depth);
        out.push(Definition::new(sig.name.clone(), params, body));
        sigs.push(sig);
    }
    (Program::new(flavor, out), sigs)
}

/// Untyped terms over `vars`, possibly open, for substitution tests.
pub fn gen_untyped(rng: &mut impl Rng, depth: usize, vars: &[&str]) -> Term {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return match rng.gen_range(0..6) {
            0 => Term::Int(rng.gen_range(-9..=9)),
            1 => Term::funref("g", 1),
            _ => Term::var(*vars.choose(rng).unwrap()),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 | 1 => {
            let n = rng.gen_range(1..=2);
            let mut ps: Vec<&str> = vars.to_vec();
            ps.shuffle(rng);
            Term::lam(ps[..n].iter().copied(), gen_untyped(rng, d, vars))
        }
        2 => {
            let n = rng.gen_range(1..=2);
            let head = gen_untyped(rng, d, vars);
            Term::app(head, (0..n).map(|_| gen_untyped(rng, d, vars)).collect())
        }
        3 => Term::binop(BinOp::Add, gen_untyped(rng, d, vars), gen_untyped(rng, d, vars)),
        _ => Term::List((0..rng.gen_range(0..=2)).map(|_| gen_untyped(rng, d, vars)).collect()),
    }
}
