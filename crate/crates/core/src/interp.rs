//! Call-by-value interpreter for both flavors.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::resolve::intrinsic_arity;
use crate::term::{free_vars, BinOp, Definition, Flavor, FunId, Name, Program, Term};

pub const DEFAULT_FUEL: u64 = 100_000;

/// Nesting limit for the evaluator itself. Object programs have no
/// conditionals, so deep nesting only comes from unbounded recursion.
const MAX_DEPTH: usize = 400;

#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    List(Vec<Value>),
    Atom(Name),
    Closure(Rc<Closure>),
    /// A top-level function or intrinsic, with the arguments collected so far
    /// (MFH partial application).
    Fun(FunId, Vec<Value>),
}

#[derive(Debug)]
pub struct Closure {
    pub params: Vec<Name>,
    pub body: Term,
    pub env: Vec<(Name, Value)>,
}

impl Value {
    pub fn is_function(&self) -> bool {
        matches!(self, Value::Closure(_) | Value::Fun(..))
    }

    /// Structural equality on first-order values; `None` when a function is
    /// involved and only extensional comparison can decide.
    pub fn first_order_eq(&self, other: &Value) -> Option<bool> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a == b),
            (Value::Atom(a), Value::Atom(b)) => Some(a == b),
            (Value::List(a), Value::List(b)) => {
                if a.len() != b.len() {
                    return Some(false);
                }
                let mut all = Some(true);
                for (x, y) in a.iter().zip(b) {
                    match x.first_order_eq(y) {
                        Some(false) => return Some(false),
                        None => all = None,
                        Some(true) => {}
                    }
                }
                all
            }
            (a, b) if a.is_function() && b.is_function() => None,
            _ => Some(false),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Atom(a) => write!(f, "{a}"),
            Value::List(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            Value::Closure(c) => write!(f, "<closure/{}>", c.params.len()),
            Value::Fun(id, args) if args.is_empty() => write!(f, "<fun {id}>"),
            Value::Fun(id, args) => write!(f, "<fun {id} applied to {}>", args.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorKind {
    UnboundName,
    ArityMismatch,
    NotAFunction,
    BadOperand,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Ok(Value),
    Err(ErrorKind),
    Timeout,
}

impl Outcome {
    pub fn is_timeout(&self) -> bool {
        matches!(self, Outcome::Timeout)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Ok(Value::Int(n)) => write!(f, "Ok(Int {n})"),
            Outcome::Ok(v) => write!(f, "Ok({v})"),
            Outcome::Err(k) => write!(f, "Err({k:?})"),
            Outcome::Timeout => write!(f, "Timeout"),
        }
    }
}

enum Stop {
    Err(ErrorKind),
    Timeout,
}

type Eval<T> = Result<T, Stop>;

fn fail<T>(k: ErrorKind) -> Eval<T> {
    Err(Stop::Err(k))
}

type Env = Vec<(Name, Value)>;

fn lookup<'e>(env: &'e Env, x: &str) -> Option<&'e Value> {
    env.iter().rev().find(|(n, _)| n == x).map(|(_, v)| v)
}

/// Evaluation state for one program.
pub struct Interp<'p> {
    flavor: Flavor,
    defs: HashMap<FunId, &'p Definition>,
    fuel: u64,
    depth: usize,
}

impl<'p> Interp<'p> {
    pub fn new(p: &'p Program, fuel: u64) -> Self {
        Interp {
            flavor: p.flavor,
            defs: p.defs.iter().map(|d| (d.id(), d)).collect(),
            fuel,
            depth: 0,
        }
    }

    pub fn fuel_left(&self) -> u64 {
        self.fuel
    }

    fn tick(&mut self) -> Eval<()> {
        if self.fuel == 0 {
            return Err(Stop::Timeout);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn known(&self, id: &FunId) -> bool {
        self.defs.contains_key(id) || intrinsic_arity(&id.name) == Some(id.arity)
    }

    fn eval(&mut self, t: &Term, env: &Env) -> Eval<Value> {
        self.depth += 1;
        let r = if self.depth > MAX_DEPTH {
            Err(Stop::Timeout)
        } else {
            self.eval_inner(t, env)
        };
        self.depth -= 1;
        r
    }

    fn eval_inner(&mut self, t: &Term, env: &Env) -> Eval<Value> {
        match t {
            Term::Var(x) => match lookup(env, x) {
                Some(v) => Ok(v.clone()),
                None => fail(ErrorKind::UnboundName),
            },
            Term::Int(n) => Ok(Value::Int(*n)),
            Term::Atom(a) => Ok(Value::Atom(a.clone())),
            Term::List(items) => items
                .iter()
                .map(|i| self.eval(i, env))
                .collect::<Eval<Vec<_>>>()
                .map(Value::List),
            Term::FunRef(name, n) => {
                let id = FunId::new(name.clone(), *n);
                if !self.known(&id) {
                    return fail(ErrorKind::UnboundName);
                }
                if *n == 0 && self.flavor == Flavor::Mfh {
                    // MFH constants are evaluated on reference.
                    self.tick()?;
                    return self.call(&id, Vec::new());
                }
                Ok(Value::Fun(id, Vec::new()))
            }
            Term::Lam(ps, body) => {
                let fv = free_vars(t);
                let env = fv
                    .iter()
                    .filter_map(|x| lookup(env, x).map(|v| (x.clone(), v.clone())))
                    .collect();
                Ok(Value::Closure(Rc::new(Closure {
                    params: ps.clone(),
                    body: (**body).clone(),
                    env,
                })))
            }
            Term::App(h, args, _) => {
                let f = self.eval(h, env)?;
                let args = args
                    .iter()
                    .map(|a| self.eval(a, env))
                    .collect::<Eval<Vec<_>>>()?;
                self.apply(f, args)
            }
            Term::BinOp(op, l, r) => {
                let l = self.eval(l, env)?;
                let r = self.eval(r, env)?;
                self.tick()?;
                match (l, r) {
                    (Value::Int(a), Value::Int(b)) => Ok(Value::Int(match op {
                        BinOp::Add => a.wrapping_add(b),
                        BinOp::Sub => a.wrapping_sub(b),
                        BinOp::Mul => a.wrapping_mul(b),
                    })),
                    _ => fail(ErrorKind::BadOperand),
                }
            }
        }
    }

    /// Applies a function value. MFE applications are exact-arity; MFH
    /// applications feed the arguments one at a time.
    fn apply(&mut self, f: Value, args: Vec<Value>) -> Eval<Value> {
        match self.flavor {
            Flavor::Mfe => {
                self.tick()?;
                self.apply_exact(f, args)
            }
            Flavor::Mfh => {
                if args.is_empty() {
                    self.tick()?;
                    return self.apply_exact(f, args);
                }
                let mut f = f;
                for a in args {
                    self.tick()?;
                    f = self.apply_one(f, a)?;
                }
                Ok(f)
            }
        }
    }

    fn apply_exact(&mut self, f: Value, args: Vec<Value>) -> Eval<Value> {
        match f {
            Value::Closure(c) => {
                if c.params.len() != args.len() {
                    return fail(ErrorKind::ArityMismatch);
                }
                let mut env = c.env.clone();
                env.extend(c.params.iter().cloned().zip(args));
                self.eval(&c.body, &env)
            }
            Value::Fun(id, mut have) => {
                have.extend(args);
                if have.len() != id.arity {
                    return fail(ErrorKind::ArityMismatch);
                }
                self.call(&id, have)
            }
            _ => fail(ErrorKind::NotAFunction),
        }
    }

    fn apply_one(&mut self, f: Value, a: Value) -> Eval<Value> {
        match f {
            Value::Closure(c) => {
                let Some((first, rest)) = c.params.split_first() else {
                    return fail(ErrorKind::ArityMismatch);
                };
                let mut env = c.env.clone();
                env.push((first.clone(), a));
                if rest.is_empty() {
                    self.eval(&c.body, &env)
                } else {
                    Ok(Value::Closure(Rc::new(Closure {
                        params: rest.to_vec(),
                        body: c.body.clone(),
                        env,
                    })))
                }
            }
            Value::Fun(id, mut have) => {
                if have.len() >= id.arity {
                    return fail(ErrorKind::ArityMismatch);
                }
                have.push(a);
                if have.len() == id.arity {
                    self.call(&id, have)
                } else {
                    Ok(Value::Fun(id, have))
                }
            }
            _ => fail(ErrorKind::NotAFunction),
        }
    }

    fn call(&mut self, id: &FunId, args: Vec<Value>) -> Eval<Value> {
        if let Some(d) = self.defs.get(id).copied() {
            let env: Env = d.params.iter().cloned().zip(args).collect();
            return self.eval(&d.body, &env);
        }
        self.intrinsic(&id.name, args)
    }

    fn intrinsic(&mut self, name: &str, args: Vec<Value>) -> Eval<Value> {
        let mut args = args.into_iter();
        match name {
            "map" | "lists:map" => {
                let (f, xs) = (args.next().unwrap(), args.next().unwrap());
                let Value::List(xs) = xs else {
                    return fail(ErrorKind::BadOperand);
                };
                if !f.is_function() {
                    return fail(ErrorKind::NotAFunction);
                }
                xs.into_iter()
                    .map(|x| self.apply(f.clone(), vec![x]))
                    .collect::<Eval<Vec<_>>>()
                    .map(Value::List)
            }
            "apply" | "spawn" => {
                let (f, xs) = (args.next().unwrap(), args.next().unwrap());
                let Value::List(xs) = xs else {
                    return fail(ErrorKind::BadOperand);
                };
                // An atom names the top-level function of matching arity.
                if let Value::Atom(name) = f {
                    let id = FunId::new(name, xs.len());
                    if !self.defs.contains_key(&id) {
                        return fail(ErrorKind::UnboundName);
                    }
                    return self.call(&id, xs);
                }
                self.apply(f, xs)
            }
            "new_sum" => {
                let Value::List(xs) = args.next().unwrap() else {
                    return fail(ErrorKind::BadOperand);
                };
                let mut sum = 0i64;
                for x in xs {
                    match x {
                        Value::Int(n) => sum = sum.wrapping_add(n),
                        _ => return fail(ErrorKind::BadOperand),
                    }
                }
                Ok(Value::Int(sum))
            }
            _ => fail(ErrorKind::UnboundName),
        }
    }

    fn finish(r: Eval<Value>) -> Outcome {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(Stop::Err(k)) => Outcome::Err(k),
            Err(Stop::Timeout) => Outcome::Timeout,
        }
    }

    /// Applies `f` to `args` and classifies the result.
    pub fn apply_outcome(&mut self, f: Value, args: Vec<Value>) -> Outcome {
        let r = self.apply(f, args);
        Self::finish(r)
    }
}

/// Runs `entry` on `args` with the given step budget.
pub fn interpret(p: &Program, entry: &FunId, args: Vec<Value>, fuel: u64) -> Outcome {
    let mut it = Interp::new(p, fuel);
    let f = match p.find(entry) {
        Some(_) => Value::Fun(entry.clone(), Vec::new()),
        None => return Outcome::Err(ErrorKind::UnboundName),
    };
    if args.len() != entry.arity {
        return Outcome::Err(ErrorKind::ArityMismatch);
    }
    let r = match p.flavor {
        Flavor::Mfh if entry.arity == 0 => it.tick().and_then(|_| it.call(entry, Vec::new())),
        _ => it.apply(f, args),
    };
    Interp::finish(r)
}

/// Evaluates a term in the context of `p` with no local bindings.
pub fn eval_in(p: &Program, t: &Term, fuel: u64) -> Outcome {
    let mut it = Interp::new(p, fuel);
    let r = it.eval(t, &Vec::new());
    Interp::finish(r)
}

/// Evaluates a closed term with no top-level definitions.
pub fn eval_closed(t: &Term, flavor: Flavor, fuel: u64) -> Outcome {
    eval_in(&Program::new(flavor, Vec::new()), t, fuel)
}
