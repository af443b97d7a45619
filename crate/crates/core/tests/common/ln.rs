//! Locally nameless reference terms: substitution there cannot capture.

use refac_core::term::BinOp;
use refac_core::{Name, Term};

/// Bound variables are (binders up, position); free ones keep their name.
#[derive(Debug, Clone, PartialEq)]
pub enum Ln {
    Bound(usize, usize),
    Free(Name),
    Int(i64),
    Ref(Name, usize),
    Atom(Name),
    List(Vec<Ln>),
    Lam(usize, Box<Ln>),
    App(Box<Ln>, Vec<Ln>),
    Op(BinOp, Box<Ln>, Box<Ln>),
}

fn ln(t: &Term, scopes: &mut Vec<Vec<Name>>) -> Ln {
    match t {
        Term::Var(x) => {
            for (up, scope) in scopes.iter().rev().enumerate() {
                if let Some(pos) = scope.iter().rposition(|p| p == x) {
                    return Ln::Bound(up, pos);
                }
            }
            Ln::Free(x.clone())
        }
        Term::Int(n) => Ln::Int(*n),
        Term::FunRef(f, n) => Ln::Ref(f.clone(), *n),
        Term::Atom(a) => Ln::Atom(a.clone()),
        Term::List(xs) => Ln::List(xs.iter().map(|x| ln(x, scopes)).collect()),
        Term::Lam(ps, b) => {
            scopes.push(ps.clone());
            let body = ln(b, scopes);
            scopes.pop();
            Ln::Lam(ps.len(), Box::new(body))
        }
        Term::App(h, args, _) => Ln::App(Box::new(ln(h, scopes)), args.iter().map(|a| ln(a, scopes)).collect()),
        Term::BinOp(op, l, r) => Ln::Op(*op, Box::new(ln(l, scopes)), Box::new(ln(r, scopes))),
    }
}

pub fn to_ln(t: &Term) -> Ln {
    ln(t, &mut Vec::new())
}

/// Free names never meet binders here, so substitution is plain replacement.
pub fn ln_subst(t: &Ln, binding: &[(Name, Ln)]) -> Ln {
    match t {
        Ln::Free(x) => binding
            .iter()
            .find(|(y, _)| y == x)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(|| t.clone()),
        Ln::Bound(..) | Ln::Int(_) | Ln::Ref(..) | Ln::Atom(_) => t.clone(),
        Ln::List(xs) => Ln::List(xs.iter().map(|x| ln_subst(x, binding)).collect()),
        Ln::Lam(n, b) => Ln::Lam(*n, Box::new(ln_subst(b, binding))),
        Ln::App(h, args) => Ln::App(
            Box::new(ln_subst(h, binding)),
            args.iter().map(|a| ln_subst(a, binding)).collect(),
        ),
        Ln::Op(op, l, r) => Ln::Op(*op, Box::new(ln_subst(l, binding)), Box::new(ln_subst(r, binding))),
    }
}
