//! Engine substitution against a locally nameless reference.

mod common;

use std::collections::BTreeSet;

use common::ln::{ln_subst, to_ln, Ln};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refac_core::random::gen_untyped;
use refac_core::subst::{substitute, substitute_funref, Binding};
use refac_core::syntax::parse_str;
use refac_core::term::{alpha_eq, alpha_eq_program, free_vars};
use refac_core::{Flavor, FunId, Name, Term};

const VARS: [&str; 4] = ["X", "Y", "Z", "X_1"];

fn random_binding(rng: &mut ChaCha8Rng) -> Vec<(Name, Term)> {
    let n = rng.gen_range(1..=2);
    let mut names: Vec<&str> = VARS.to_vec();
    names.truncate(3);
    (0..n)
        .map(|i| (names[i].to_string(), gen_untyped(rng, 3, &VARS)))
        .collect()
}

#[test]
fn substitution_matches_locally_nameless_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut cases = 0;
    let mut renamed = 0;
    for _ in 0..2000 {
        let t = gen_untyped(&mut rng, 6, &VARS);
        let pairs = random_binding(&mut rng);
        let binding: Binding = pairs.iter().cloned().collect();
        let got = substitute(&t, &binding);
        let ln_binding: Vec<(Name, Ln)> = pairs.iter().map(|(x, s)| (x.clone(), to_ln(s))).collect();
        let want = ln_subst(&to_ln(&t), &ln_binding);
        assert_eq!(to_ln(&got), want, "t = {t:?}\nbinding = {pairs:?}\ngot = {got:?}");
        if !alpha_eq(&got, &t) {
            cases += 1;
        }
        let before: BTreeSet<Name> = lam_params(&t);
        if lam_params(&got) != before {
            renamed += 1;
        }
    }
    // The sample must actually exercise substitution and capture avoidance.
    assert!(cases > 500, "{cases}");
    assert!(renamed > 20, "{renamed}");
}

fn lam_params(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    t.walk(&mut |s| {
        if let Term::Lam(ps, _) = s {
            out.extend(ps.iter().cloned());
        }
    });
    out
}

#[test]
fn alpha_eq_agrees_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut equal = 0;
    for _ in 0..3000 {
        let a = gen_untyped(&mut rng, 4, &VARS[..2]);
        let b = gen_untyped(&mut rng, 4, &VARS[..2]);
        let same = to_ln(&a) == to_ln(&b);
        assert_eq!(alpha_eq(&a, &b), same, "{a:?}\n{b:?}");
        equal += same as usize;
    }
    assert!(equal > 30, "{equal}");
}

#[test]
fn bound_rename_examples() {
    let x = Term::lam(["X"], Term::var("X"));
    let y = Term::lam(["Y"], Term::var("Y"));
    let open = Term::lam(["X"], Term::var("Y"));
    assert!(alpha_eq(&x, &y));
    assert!(!alpha_eq(&x, &open));
}

#[test]
fn absent_funref_target_is_identity() {
    let p = parse_str("f(X) -> X+1.\ng(Y) -> f(Y+2) - f(Y-2).", Flavor::Mfe).unwrap();
    let adapter = Term::lam(["A"], Term::var("A"));
    let (q, n) = substitute_funref(&p, &FunId::new("missing", 1), &adapter).unwrap();
    assert_eq!(n, 0);
    assert!(alpha_eq_program(&p, &q));
}

fn term_strategy() -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(|seed| gen_untyped(&mut ChaCha8Rng::seed_from_u64(seed), 5, &VARS))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn empty_substitution_is_identity(t in term_strategy()) {
        prop_assert!(alpha_eq(&substitute(&t, &Binding::new()), &t));
    }

    #[test]
    fn free_variables_stay_bounded(t in term_strategy(), s in term_strategy(), i in 0usize..4) {
        let fv_t = free_vars(&t);
        let Some(x) = fv_t.iter().nth(i % fv_t.len().max(1)).cloned() else { return Ok(()) };
        let x = x.as_str();
        let out = substitute(&t, &Binding::from([(x.to_string(), s.clone())]));
        let mut allowed: BTreeSet<Name> = fv_t.into_iter().filter(|y| y != x).collect();
        allowed.extend(free_vars(&s));
        prop_assert!(free_vars(&out).is_subset(&allowed));
    }

    #[test]
    fn alpha_eq_is_an_equivalence(a in term_strategy(), b in term_strategy(), c in term_strategy()) {
        prop_assert!(alpha_eq(&a, &a));
        prop_assert_eq!(alpha_eq(&a, &b), alpha_eq(&b, &a));
        if alpha_eq(&a, &b) && alpha_eq(&b, &c) {
            prop_assert!(alpha_eq(&a, &c));
        }
    }

    #[test]
    fn renaming_a_bound_variable_preserves_alpha(t in term_strategy()) {
        // Rebinding every lambda to fresh names yields an alpha-equal term.
        let renamed = rebind(&t, &mut 0);
        prop_assert!(alpha_eq(&renamed, &t));
    }
}

fn rebind(t: &Term, counter: &mut usize) -> Term {
    match t {
        Term::Lam(ps, b) => {
            let fresh: Vec<Name> = ps
                .iter()
                .map(|_| {
                    *counter += 1;
                    format!("R{counter}")
                })
                .collect();
            let binding: Binding = ps.iter().cloned().zip(fresh.iter().cloned().map(Term::Var)).collect();
            Term::Lam(fresh, Box::new(rebind(&substitute(b, &binding), counter)))
        }
        _ => t
            .clone()
            .map_children::<std::convert::Infallible>(|_, c| Ok(rebind(&c, counter)))
            .unwrap_or_else(|e| match e {}),
    }
}
