//! Random-input equivalence checking.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::{interpret, Closure, Interp, Outcome, Value, DEFAULT_FUEL};
use crate::schemes::{install, AdapterSpec};
use crate::term::{fresh_names, BinOp, Definition, Flavor, FunId, Program, Term};

/// Argument kinds the generator knows how to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Int,
    ListInt,
    FunIntInt,
}

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Shape, String> {
        match s.trim() {
            "int" => Ok(Shape::Int),
            "list_int" => Ok(Shape::ListInt),
            "fun_int_int" => Ok(Shape::FunIntInt),
            other => Err(format!("unknown shape `{other}` (int, list_int, fun_int_int)")),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Int => "int",
            Shape::ListInt => "list_int",
            Shape::FunIntInt => "fun_int_int",
        })
    }
}

pub fn parse_shapes(s: &str) -> std::result::Result<Vec<Shape>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(str::parse).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct Sampling {
    pub samples: usize,
    pub fuel: u64,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            samples: 100,
            fuel: DEFAULT_FUEL,
            seed: 0,
        }
    }
}

const INT_RANGE: std::ops::RangeInclusive<i64> = -100..=100;
const MAX_LIST: usize = 5;
const PROBES: usize = 5;

/// The fixed pool of unary integer functions, as closure bodies over `x`.
fn pool_body(i: usize) -> Term {
    let x = || Term::var("x");
    match i {
        0 => x(),
        1 => Term::binop(BinOp::Add, x(), Term::Int(1)),
        2 => Term::binop(BinOp::Mul, x(), Term::Int(2)),
        3 => Term::Int(0),
        4 => Term::binop(BinOp::Sub, Term::Int(0), x()),
        5 => Term::binop(BinOp::Mul, x(), Term::Int(-3)),
        6 => Term::binop(BinOp::Add, x(), Term::Int(40)),
        _ => Term::binop(BinOp::Mul, x(), x()),
    }
}

pub const POOL_SIZE: usize = 8;

pub fn pool_function(i: usize) -> Value {
    Value::Closure(Rc::new(Closure {
        params: vec!["x".into()],
        body: pool_body(i % POOL_SIZE),
        env: Vec::new(),
    }))
}

pub fn gen_value(shape: Shape, rng: &mut impl Rng) -> Value {
    match shape {
        Shape::Int => Value::Int(rng.gen_range(INT_RANGE)),
        Shape::ListInt => {
            let n = rng.gen_range(0..=MAX_LIST);
            Value::List((0..n).map(|_| Value::Int(rng.gen_range(INT_RANGE))).collect())
        }
        Shape::FunIntInt => pool_function(rng.gen_range(0..POOL_SIZE)),
    }
}

pub fn gen_values(shape: Shape, seed: u64, n: usize) -> Vec<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| gen_value(shape, &mut rng)).collect()
}

/// Independent generator for sample `i`, so samples can be drawn in any order.
fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64 + 1);
    rng
}

fn probe_ints(seed: u64) -> Vec<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    (0..PROBES).map(|_| Value::Int(rng.gen_range(INT_RANGE))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Agree,
    Disagree,
    Unknown,
}

impl Cmp {
    fn and(self, other: Cmp) -> Cmp {
        match (self, other) {
            (Cmp::Disagree, _) | (_, Cmp::Disagree) => Cmp::Disagree,
            (Cmp::Unknown, _) | (_, Cmp::Unknown) => Cmp::Unknown,
            _ => Cmp::Agree,
        }
    }
}

/// Compares outcomes from two programs; function values are compared by
/// applying both to the same probe integers.
struct Comparer<'a> {
    old: &'a Program,
    new: &'a Program,
    probes: Vec<Value>,
    fuel: u64,
}

const MAX_PROBE_DEPTH: usize = 3;

impl Comparer<'_> {
    fn outcomes(&self, a: &Outcome, b: &Outcome, depth: usize) -> Cmp {
        match (a, b) {
            (Outcome::Timeout, _) | (_, Outcome::Timeout) => Cmp::Unknown,
            (Outcome::Err(x), Outcome::Err(y)) if x == y => Cmp::Agree,
            (Outcome::Ok(x), Outcome::Ok(y)) => self.values(x, y, depth),
            _ => Cmp::Disagree,
        }
    }

    fn values(&self, a: &Value, b: &Value, depth: usize) -> Cmp {
        match a.first_order_eq(b) {
            Some(true) => Cmp::Agree,
            Some(false) => Cmp::Disagree,
            None => match (a, b) {
                (Value::List(xs), Value::List(ys)) => xs
                    .iter()
                    .zip(ys)
                    .fold(Cmp::Agree, |acc, (x, y)| acc.and(self.values(x, y, depth))),
                _ => self.functions(a, b, depth),
            },
        }
    }

    fn functions(&self, a: &Value, b: &Value, depth: usize) -> Cmp {
        if depth >= MAX_PROBE_DEPTH {
            return Cmp::Unknown;
        }
        let arity = |v: &Value| match (self.old.flavor, v) {
            (Flavor::Mfh, _) => 1,
            (Flavor::Mfe, Value::Closure(c)) => c.params.len(),
            (Flavor::Mfe, Value::Fun(id, have)) => id.arity.saturating_sub(have.len()),
            _ => 0,
        };
        let n = arity(a);
        if n != arity(b) {
            return Cmp::Disagree;
        }
        let mut acc = Cmp::Agree;
        for k in 0..PROBES {
            let args: Vec<Value> = (0..n)
                .map(|j| self.probes[(k + j) % self.probes.len()].clone())
                .collect();
            let x = Interp::new(self.old, self.fuel).apply_outcome(a.clone(), args.clone());
            let y = Interp::new(self.new, self.fuel).apply_outcome(b.clone(), args);
            acc = acc.and(self.outcomes(&x, &y, depth + 1));
            if acc == Cmp::Disagree {
                break;
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EquivalentOnSamples,
    CounterexampleFound,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::EquivalentOnSamples => "equivalent_on_samples",
            Verdict::CounterexampleFound => "counterexample_found",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Disagreement {
    pub args: Vec<String>,
    pub old: String,
    pub new: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivReport {
    pub samples: usize,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
    pub inconclusive: usize,
    pub verdict: Verdict,
}

impl EquivReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "samples: {}\nagreements: {}\ndisagreements: {}\ninconclusive: {}\nverdict: {}\n",
            self.samples,
            self.agreements,
            self.disagreements.len(),
            self.inconclusive,
            self.verdict
        );
        for d in &self.disagreements {
            out.push_str(&format!(
                "  args ({}): old {}, new {}\n",
                d.args.join(", "),
                d.old,
                d.new
            ));
        }
        out
    }
}

/// Runs `entry` in both programs on random arguments of the given shapes.
pub fn check_equiv(
    old: &Program,
    new: &Program,
    entry: &FunId,
    shapes: &[Shape],
    cfg: Sampling,
) -> Result<EquivReport> {
    check_entries(old, entry, new, entry, shapes, cfg)
}

/// Like [`check_equiv`] with a different entry point on each side.
pub fn check_entries(
    old: &Program,
    old_entry: &FunId,
    new: &Program,
    new_entry: &FunId,
    shapes: &[Shape],
    cfg: Sampling,
) -> Result<EquivReport> {
    for (p, e) in [(old, old_entry), (new, new_entry)] {
        if p.find(e).is_none() {
            return Err(Error::EntryMissing(e.clone()));
        }
    }
    if shapes.len() != old_entry.arity || old_entry.arity != new_entry.arity {
        return Err(Error::ShapeMismatch {
            entry: old_entry.clone(),
            shapes: shapes.len(),
        });
    }
    let cmp = Comparer {
        old,
        new,
        probes: probe_ints(cfg.seed),
        fuel: cfg.fuel,
    };
    let mut report = EquivReport {
        samples: cfg.samples,
        agreements: 0,
        disagreements: Vec::new(),
        inconclusive: 0,
        verdict: Verdict::Inconclusive,
    };
    for i in 0..cfg.samples {
        let mut rng = sample_rng(cfg.seed, i);
        let args: Vec<Value> = shapes.iter().map(|s| gen_value(*s, &mut rng)).collect();
        let a = interpret(old, old_entry, args.clone(), cfg.fuel);
        let b = interpret(new, new_entry, args.clone(), cfg.fuel);
        match cmp.outcomes(&a, &b, 0) {
            Cmp::Agree => report.agreements += 1,
            Cmp::Unknown => report.inconclusive += 1,
            Cmp::Disagree => report.disagreements.push(Disagreement {
                args: args.iter().map(Value::to_string).collect(),
                old: a.to_string(),
                new: b.to_string(),
            }),
        }
    }
    report.verdict = if !report.disagreements.is_empty() {
        Verdict::CounterexampleFound
    } else if report.agreements == 0 && report.samples > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::EquivalentOnSamples
    };
    Ok(report)
}

pub const OLD_WRAPPER_PREFIX: &str = "__old_";

/// Tests the adapter against the definition it replaces. `None` when the
/// target has no definition in `p` (an external API function).
pub fn check_obligation(
    p: &Program,
    spec: &AdapterSpec,
    shapes: Option<&[Shape]>,
    cfg: Sampling,
) -> Result<Option<EquivReport>> {
    let Some(old_def) = p.find(&spec.target) else {
        return Ok(None);
    };
    let inferred;
    let shapes = match shapes {
        Some(s) => s,
        None => {
            inferred = infer_shapes(p, old_def);
            &inferred
        }
    };
    let mut new = install(p, spec)?;
    let n = spec.target.arity;
    let wrapper_name = format!("{OLD_WRAPPER_PREFIX}{n}");
    let avoid: BTreeSet<_> = old_def.params.iter().cloned().collect();
    let xs = fresh_names(p.flavor.fresh_base(), n, &avoid);
    let body = Term::call(
        p.flavor,
        spec.adapter.clone(),
        xs.iter().cloned().map(Term::Var).collect(),
    );
    new.defs.push(Definition::new(wrapper_name.clone(), xs, body));
    let report = check_entries(p, &spec.target, &new, &FunId::new(wrapper_name, n), shapes, cfg)?;
    Ok(Some(report))
}

/// Guesses an argument shape for each parameter from how the body uses it.
pub fn infer_shapes(p: &Program, d: &Definition) -> Vec<Shape> {
    let mut visiting = BTreeSet::new();
    infer_def(p, d, &mut visiting)
}

fn infer_def(p: &Program, d: &Definition, visiting: &mut BTreeSet<FunId>) -> Vec<Shape> {
    if !visiting.insert(d.id()) {
        return vec![Shape::Int; d.arity()];
    }
    let out = d
        .params
        .iter()
        .map(|x| param_shape(p, &d.body, x, visiting).unwrap_or(Shape::Int))
        .collect();
    visiting.remove(&d.id());
    out
}

fn is_var(t: &Term, x: &str) -> bool {
    matches!(t, Term::Var(v) if v == x)
}

fn param_shape(p: &Program, t: &Term, x: &str, visiting: &mut BTreeSet<FunId>) -> Option<Shape> {
    match t {
        Term::Lam(ps, _) if ps.iter().any(|q| q == x) => return None,
        Term::BinOp(_, l, r) if is_var(l, x) || is_var(r, x) => return Some(Shape::Int),
        Term::App(..) => {
            let (head, args) = match (p.flavor, t) {
                (Flavor::Mfe, Term::App(h, a, _)) => (&**h, a.iter().collect()),
                _ => t.spine(),
            };
            if is_var(head, x) {
                return Some(Shape::FunIntInt);
            }
            if let Term::FunRef(name, _) = head {
                for (i, a) in args.iter().enumerate() {
                    if !is_var(a, x) {
                        continue;
                    }
                    let found = match (name.as_str(), i) {
                        ("map" | "lists:map" | "apply" | "spawn", 0) => Some(Shape::FunIntInt),
                        ("map" | "lists:map" | "apply" | "spawn" | "new_sum", _) => {
                            Some(Shape::ListInt)
                        }
                        _ => p
                            .defs
                            .iter()
                            .find(|d| d.name == *name && d.arity() > i)
                            .map(|d| infer_def(p, d, visiting)[i]),
                    };
                    if found.is_some() {
                        return found;
                    }
                }
            }
        }
        _ => {}
    }
    t.children()
        .into_iter()
        .find_map(|c| param_shape(p, c, x, visiting))
}

pub fn shapes_text(shapes: &[Shape]) -> String {
    shapes.iter().map(Shape::to_string).collect::<Vec<_>>().join(",")
}

/// Outcome classification used by the comparison, exposed for tests.
pub fn outcomes_agree(old: &Program, a: &Outcome, new: &Program, b: &Outcome, seed: u64) -> Option<bool> {
    let cmp = Comparer {
        old,
        new,
        probes: probe_ints(seed),
        fuel: DEFAULT_FUEL,
    };
    match cmp.outcomes(a, b, 0) {
        Cmp::Agree => Some(true),
        Cmp::Disagree => Some(false),
        Cmp::Unknown => None,
    }
}
