//! Fires each rewrite rule at the root of random well-typed terms and
//! compares the interpreter's outcome before and after.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refac_core::equiv::outcomes_agree;
use refac_core::interp::{eval_in, Outcome};
use refac_core::random::{gen_program, Sig, TermGen, Ty};
use refac_core::resolve::resolve;
use refac_core::rewrite::{Rule, RuleContext};
use refac_core::syntax::print_term;
use refac_core::{Flavor, FunId, Program, Term};

pub const SAMPLES: usize = 1000;
const FUEL: u64 = 100_000;

pub struct World {
    pub rng: ChaCha8Rng,
    pub flavor: Flavor,
    pub program: Program,
    sigs: Vec<Sig>,
    uses: usize,
}

impl World {
    pub fn new(flavor: Flavor, seed: u64) -> Self {
        let mut w = World {
            rng: ChaCha8Rng::seed_from_u64(seed),
            flavor,
            program: Program::new(flavor, vec![]),
            sigs: vec![],
            uses: 0,
        };
        w.refresh();
        w
    }

    /// A fresh context program every few samples.
    pub fn refresh(&mut self) {
        let (p, sigs) = gen_program(&mut self.rng, self.flavor, 5, 3);
        self.program = resolve(p).unwrap();
        self.sigs = sigs;
        self.uses = 0;
    }

    pub fn tick(&mut self) {
        self.uses += 1;
        if self.uses == 25 {
            self.refresh();
        }
    }

    pub fn ty(&mut self) -> Ty {
        [Ty::Int, Ty::Int, Ty::List, Ty::int_to_int()].choose(&mut self.rng).unwrap().clone()
    }

    pub fn gen(&mut self, ty: &Ty, depth: usize) -> Term {
        let sigs = self.sigs.clone();
        TermGen::new(&mut self.rng, self.flavor, sigs).gen(ty, depth)
    }

    pub fn ctx(&self) -> RuleContext {
        RuleContext::new(self.flavor).with_program(&self.program)
    }

    pub fn eval(&self, t: &Term) -> Outcome {
        eval_in(&self.program, t, FUEL)
    }
}

#[derive(Default)]
pub struct Tally {
    /// Root redexes tried.
    pub terms: usize,
    pub agree: usize,
    pub inconclusive: usize,
}

impl Tally {
    pub fn record(&mut self, w: &World, before: &Term, after: &Term, seed: u64) {
        let (a, b) = (w.eval(before), w.eval(after));
        match outcomes_agree(&w.program, &a, &w.program, &b, seed) {
            Some(true) => self.agree += 1,
            Some(false) => panic!(
                "{} changed the outcome\nbefore: {}\nafter:  {}\n{a} vs {b}",
                w.flavor,
                print_term(before, w.flavor),
                print_term(after, w.flavor)
            ),
            None => self.inconclusive += 1,
        }
    }
}

pub fn beta(flavor: Flavor) -> Tally {
    let mut w = World::new(flavor, 1);
    let mut tally = Tally::default();
    while tally.terms < SAMPLES {
        let ty = w.ty();
        let sigs = w.sigs.clone();
        let t = TermGen::new(&mut w.rng, flavor, sigs).beta_redex(&ty, 4);
        let after = Rule::Beta.fire(&t, &w.ctx()).expect("root beta redex");
        let seed = w.rng.gen();
        tally.record(&w, &t, &after, seed);
        tally.terms += 1;
        w.tick();
    }
    tally
}

pub fn eta_reduce(flavor: Flavor) -> Tally {
    let mut w = World::new(flavor, 2);
    let mut tally = Tally::default();
    while tally.terms < SAMPLES {
        let params: Vec<Ty> = match flavor {
            Flavor::Mfe => (0..w.rng.gen_range(1..=2)).map(|_| w.ty()).collect(),
            Flavor::Mfh => vec![w.ty()],
        };
        let ret = w.ty();
        let h = w.gen(&Ty::fun(params.clone(), ret), 3);
        let base = match flavor {
            Flavor::Mfe => "E",
            Flavor::Mfh => "e",
        };
        let names: Vec<String> = (0..params.len()).map(|i| format!("{base}{i}")).collect();
        let t = Term::lam(names.clone(), Term::app(h, names.iter().cloned().map(Term::Var).collect()));
        let Some(after) = Rule::EtaReduce.fire(&t, &w.ctx()) else { continue };
        // Compare the functions directly and applied to typed arguments.
        let seed = w.rng.gen();
        tally.record(&w, &t, &after, seed);
        let args: Vec<Term> = params.iter().map(|p| w.gen(p, 2)).collect();
        tally.record(&w, &Term::app(t.clone(), args.clone()), &Term::app(after, args), seed);
        tally.terms += 1;
        w.tick();
    }
    tally
}

pub fn eta_expand_ref(flavor: Flavor) -> Tally {
    let mut w = World::new(flavor, 3);
    let mut tally = Tally::default();
    while tally.terms < SAMPLES {
        let Some(s) = w.sigs.iter().filter(|s| !s.params.is_empty()).collect::<Vec<_>>().choose(&mut w.rng).map(|s| (*s).clone())
        else {
            w.refresh();
            continue;
        };
        let id = FunId::new(s.name.clone(), s.params.len());
        let t = Term::funref(s.name.clone(), s.params.len());
        let after = Rule::EtaExpandRef
            .fire(&t, &w.ctx().with_target(id))
            .expect("reference to the target");
        let seed = w.rng.gen();
        tally.record(&w, &t, &after, seed);
        let args: Vec<Term> = s.params.iter().map(|p| w.gen(p, 2)).collect();
        tally.record(
            &w,
            &Term::call(flavor, t, args.clone()),
            &Term::call(flavor, after, args),
            seed,
        );
        tally.terms += 1;
        w.tick();
    }
    tally
}

pub fn atom_lift() -> Tally {
    let mut w = World::new(Flavor::Mfe, 4);
    let mut tally = Tally::default();
    while tally.terms < SAMPLES {
        let candidates: Vec<Sig> = w
            .sigs
            .iter()
            .filter(|s| s.params.iter().all(|p| *p == Ty::Int))
            .cloned()
            .collect();
        let Some(s) = candidates.choose(&mut w.rng).cloned() else {
            w.refresh();
            continue;
        };
        let head = *["spawn", "apply"].choose(&mut w.rng).unwrap();
        let args: Vec<Term> = s.params.iter().map(|p| w.gen(p, 2)).collect();
        let t = Term::app(Term::funref(head, 2), vec![Term::atom(s.name.clone()), Term::List(args)]);
        let ctx = w.ctx().with_target(FunId::new(s.name.clone(), s.params.len()));
        let after = Rule::AtomLift.fire(&t, &ctx).expect("atom of the target");
        let seed = w.rng.gen();
        tally.record(&w, &t, &after, seed);
        tally.terms += 1;
        w.tick();
    }
    tally
}
