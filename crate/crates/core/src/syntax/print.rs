//! Deterministic pretty-printers with minimal parenthesization.
//!
//! MFH applications flagged [`Sugar::Infix`] are printed back in backtick
//! form when their head is still a name.

use std::fmt::Write;

use crate::term::{free_vars, BinOp, Definition, Flavor, Program, Sugar, Term};

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.defs {
        out.push_str(&print_definition(d, p.flavor));
        out.push('\n');
    }
    out
}

pub fn print_definition(d: &Definition, flavor: Flavor) -> String {
    match flavor {
        Flavor::Mfe => format!(
            "{}({}) -> {}.",
            d.name,
            d.params.join(", "),
            print_term(&d.body, Flavor::Mfe)
        ),
        Flavor::Mfh if d.params.is_empty() => {
            format!("{} = {}", d.name, print_term(&d.body, Flavor::Mfh))
        }
        Flavor::Mfh => format!(
            "{} {} = {}",
            d.name,
            d.params.join(" "),
            print_term(&d.body, Flavor::Mfh)
        ),
    }
}

pub fn print_term(t: &Term, flavor: Flavor) -> String {
    let mut out = String::new();
    match flavor {
        Flavor::Mfe => mfe(t, 0, &mut out),
        Flavor::Mfh => mfh(t, 0, &mut out),
    }
    out
}

fn binop_level(op: BinOp, flavor: Flavor) -> u8 {
    match (flavor, op) {
        (Flavor::Mfe, BinOp::Add | BinOp::Sub) => 0,
        (Flavor::Mfe, BinOp::Mul) => 1,
        (Flavor::Mfh, BinOp::Add | BinOp::Sub) => 1,
        (Flavor::Mfh, BinOp::Mul) => 2,
    }
}

fn int(n: i64, out: &mut String) {
    if n < 0 {
        let _ = write!(out, "(-{})", n.unsigned_abs());
    } else {
        let _ = write!(out, "{n}");
    }
}

fn comma_list(items: &[Term], out: &mut String, each: fn(&Term, u8, &mut String)) {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        each(a, 0, out);
    }
}

// MFE levels: 0 additive, 1 multiplicative, 2 postfix/primary.
fn mfe(t: &Term, level: u8, out: &mut String) {
    match t {
        Term::Var(x) | Term::Atom(x) => out.push_str(x),
        Term::Int(n) => int(*n, out),
        Term::FunRef(f, n) => {
            let _ = write!(out, "fun {f}/{n}");
        }
        Term::List(items) => {
            out.push('[');
            comma_list(items, out, mfe);
            out.push(']');
        }
        Term::Lam(ps, body) => {
            let _ = write!(out, "fun({}) -> ", ps.join(", "));
            mfe(body, 0, out);
            out.push_str(" end");
        }
        Term::App(head, args, _) => {
            match &**head {
                Term::FunRef(f, n) if *n == args.len() => out.push_str(f),
                Term::Var(x) => out.push_str(x),
                other => {
                    out.push('(');
                    mfe(other, 0, out);
                    out.push(')');
                }
            }
            out.push('(');
            comma_list(args, out, mfe);
            out.push(')');
        }
        Term::BinOp(op, l, r) => {
            let my = binop_level(*op, Flavor::Mfe);
            let paren = level > my;
            if paren {
                out.push('(');
            }
            mfe(l, my, out);
            let _ = write!(out, " {} ", op.symbol());
            mfe(r, my + 1, out);
            if paren {
                out.push(')');
            }
        }
    }
}

fn name_of(t: &Term) -> Option<&str> {
    match t {
        Term::FunRef(f, _) | Term::Var(f) => Some(f),
        _ => None,
    }
}

/// `App[infix](f, [a])`: the head and operand of a backtick application.
fn infix_parts(t: &Term) -> Option<(&str, &Term)> {
    match t {
        Term::App(head, args, Sugar::Infix) if args.len() == 1 => {
            name_of(head).map(|f| (f, &args[0]))
        }
        _ => None,
    }
}

/// `\x -> f x e` flagged as a right section, with `x` not free in `e`.
fn right_section(t: &Term) -> Option<(&str, &Term)> {
    let Term::Lam(ps, body) = t else { return None };
    let [x] = ps.as_slice() else { return None };
    let Term::App(inner, outer_args, Sugar::Infix) = &**body else { return None };
    let [operand] = outer_args.as_slice() else { return None };
    let Term::App(head, inner_args, Sugar::Prefix) = &**inner else { return None };
    let [Term::Var(y)] = inner_args.as_slice() else { return None };
    let f = name_of(head)?;
    if y == x && f != x && !free_vars(operand).contains(x) {
        Some((f, operand))
    } else {
        None
    }
}

fn paren_if(cond: bool, out: &mut String, f: impl FnOnce(&mut String)) {
    if cond {
        out.push('(');
    }
    f(out);
    if cond {
        out.push(')');
    }
}

// MFH levels: 0 lambda, 1 additive, 2 multiplicative, 3 backtick, 4 application, 5 atom.
fn mfh(t: &Term, level: u8, out: &mut String) {
    match t {
        Term::Var(x) | Term::Atom(x) | Term::FunRef(x, _) => out.push_str(x),
        Term::Int(n) => int(*n, out),
        Term::List(items) => {
            out.push('[');
            comma_list(items, out, mfh);
            out.push(']');
        }
        Term::Lam(..) => {
            if let Some((f, operand)) = right_section(t) {
                let _ = write!(out, "(`{f}` ");
                mfh(operand, 4, out);
                out.push(')');
                return;
            }
            paren_if(level > 0, out, |out| {
                out.push('\\');
                let mut cur = t;
                let mut first = true;
                let mut seen: Vec<&str> = Vec::new();
                while let Term::Lam(ps, body) = cur {
                    let shadows = ps.iter().any(|p| seen.contains(&p.as_str()));
                    if !first && (right_section(cur).is_some() || shadows) {
                        break;
                    }
                    for p in ps {
                        if !first {
                            out.push(' ');
                        }
                        out.push_str(p);
                        seen.push(p);
                        first = false;
                    }
                    cur = body;
                }
                out.push_str(" -> ");
                mfh(cur, 0, out);
            });
        }
        Term::App(head, args, _) => {
            // Full backtick application: App(App[infix](f, [a]), [b]).
            if let ([b], Some((f, a))) = (args.as_slice(), infix_parts(head)) {
                paren_if(level > 3, out, |out| {
                    mfh(a, 3, out);
                    let _ = write!(out, " `{f}` ");
                    mfh(b, 4, out);
                });
                return;
            }
            // Left section.
            if let Some((f, a)) = infix_parts(t) {
                out.push('(');
                mfh(a, 3, out);
                let _ = write!(out, " `{f}`)");
                return;
            }
            if args.is_empty() {
                mfh(head, level, out);
                return;
            }
            paren_if(level > 4, out, |out| {
                mfh(head, 4, out);
                for a in args {
                    out.push(' ');
                    mfh(a, 5, out);
                }
            });
        }
        Term::BinOp(op, l, r) => {
            let my = binop_level(*op, Flavor::Mfh);
            paren_if(level > my, out, |out| {
                mfh(l, my, out);
                let _ = write!(out, " {} ", op.symbol());
                mfh(r, my + 1, out);
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_term;

    fn roundtrip(src: &str, flavor: Flavor) -> String {
        print_term(&parse_term(src, flavor).unwrap(), flavor)
    }

    #[test]
    fn mfe_minimal_parens() {
        assert_eq!(roundtrip("(Y+2)+1 - ((Y-2)+1)", Flavor::Mfe), "Y + 2 + 1 - (Y - 2 + 1)");
        assert_eq!(roundtrip("(A+B)*C", Flavor::Mfe), "(A + B) * C");
        assert_eq!(roundtrip("(fun(X) -> h(X) end)(Y+2)", Flavor::Mfe), "(fun(X) -> h(X) end)(Y + 2)");
        assert_eq!(roundtrip("lists:map(fun f/1,Xs)", Flavor::Mfe), "lists:map(fun f/1, Xs)");
        assert_eq!(roundtrip("-3", Flavor::Mfe), "(-3)");
    }

    #[test]
    fn mfh_sections_resugar() {
        assert_eq!(roundtrip("map (z `f`) xs", Flavor::Mfh), "map (z `f`) xs");
        assert_eq!(roundtrip("map (`f` z) xs", Flavor::Mfh), "map (`f` z) xs");
        assert_eq!(roundtrip("a `f` b + 1", Flavor::Mfh), "a `f` b + 1");
        assert_eq!(roundtrip("f (a `g` b)", Flavor::Mfh), "f (a `g` b)");
    }

    #[test]
    fn mfh_lambdas_collapse_params() {
        assert_eq!(roundtrip("map (\\y -> f y z) xs", Flavor::Mfh), "map (\\y -> f y z) xs");
        assert_eq!(roundtrip("\\x -> \\y -> x", Flavor::Mfh), "\\x y -> x");
        assert_eq!(roundtrip("(\\x y -> h x y) z", Flavor::Mfh), "(\\x y -> h x y) z");
    }

    #[test]
    fn mfh_application_assoc() {
        assert_eq!(roundtrip("f (g x) (h y)", Flavor::Mfh), "f (g x) (h y)");
        assert_eq!(roundtrip("(f x) y", Flavor::Mfh), "f x y");
        assert_eq!(roundtrip("f x - (y - z)", Flavor::Mfh), "f x - (y - z)");
    }

    #[test]
    fn infix_head_replaced_by_lambda_prints_prefix() {
        let t = Term::app_infix(
            Term::lam_curried(["x", "y"], Term::var("x")),
            vec![Term::var("z")],
        );
        assert_eq!(print_term(&t, Flavor::Mfh), "(\\x y -> x) z");
    }

    #[test]
    fn definitions() {
        let d = Definition::new("f", Vec::<String>::new(), Term::Int(1));
        assert_eq!(print_definition(&d, Flavor::Mfe), "f() -> 1.");
        assert_eq!(print_definition(&d, Flavor::Mfh), "f = 1");
    }
}
