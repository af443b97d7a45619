mod common;

use common::corpus;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use refac_core::random::gen_program;
use refac_core::resolve::resolve;
use refac_core::syntax::lexer::tokenize;
use refac_core::syntax::{parse_str, print_program, tokens_equal};
use refac_core::term::alpha_eq_program;
use refac_core::{Error, Flavor};

const FLAVORS: [Flavor; 2] = [Flavor::Mfe, Flavor::Mfh];

#[test]
fn corpus_is_large_enough() {
    for flavor in FLAVORS {
        assert!(corpus(flavor).len() >= 20, "{flavor}");
    }
}

#[test]
fn corpus_round_trips() {
    for flavor in FLAVORS {
        for file in corpus(flavor) {
            let printed = print_program(&file.program);
            let again = parse_str(&printed, flavor).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", file.name));
            assert!(alpha_eq_program(&again, &file.program), "{}\n{printed}", file.name);
            assert_eq!(print_program(&again), printed, "{}", file.name);
        }
    }
}

#[test]
fn corpus_files_print_as_written() {
    // The corpus is hand-written in canonical layout up to spacing.
    for flavor in FLAVORS {
        for file in corpus(flavor) {
            let printed = print_program(&file.program);
            assert!(tokens_equal(&printed, &file.text, flavor), "{}\n{printed}", file.name);
        }
    }
}

#[test]
fn generated_programs_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for flavor in FLAVORS {
        for i in 0..600 {
            let (p, _) = gen_program(&mut rng, flavor, 1 + i % 5, 4);
            let p = resolve(p).unwrap();
            let printed = print_program(&p);
            let again = parse_str(&printed, flavor).unwrap_or_else(|e| panic!("{e}\n{printed}"));
            assert!(alpha_eq_program(&again, &p), "{printed}\n{again:?}\n{p:?}");
            assert_eq!(print_program(&again), printed);
        }
    }
}

/// Removes the characters of one token, given 1-based positions.
fn delete_span(text: &str, line: usize, col: usize, end_line: usize, end_col: usize) -> String {
    let mut out = String::new();
    for (i, l) in text.split_inclusive('\n').enumerate() {
        let n = i + 1;
        if n < line || n > end_line {
            out.push_str(l);
            continue;
        }
        for (j, c) in l.chars().enumerate() {
            let k = j + 1;
            let before = n == line && k < col;
            let after = n == end_line && k >= end_col;
            if before || after {
                out.push(c);
            }
        }
    }
    out
}

#[test]
fn syntax_errors_point_at_the_edited_line() {
    let mut checked = 0;
    for flavor in FLAVORS {
        for file in corpus(flavor) {
            let toks = tokenize(&file.text, flavor).unwrap();
            for t in toks.iter().filter(|t| t.line == t.end_line && t.end_col > t.col) {
                let edited = delete_span(&file.text, t.line, t.col, t.end_line, t.end_col);
                if let Err(Error::Syntax(e)) = parse_str(&edited, flavor) {
                    let line_len = edited.lines().nth(t.line - 1).map_or(0, |l| l.chars().count());
                    assert_eq!(
                        e.line, t.line,
                        "{}: deleting {:?} at {}:{}\n{edited}\n{e}",
                        file.name, t.tok, t.line, t.col
                    );
                    assert!(e.column >= 1 && e.column <= line_len + 1, "{}: {e}", file.name);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 200, "{checked}");
}
