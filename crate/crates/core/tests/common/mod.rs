#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use refac_core::schemes::{
    scheme_add_arg, scheme_generalise, scheme_remove_arg, scheme_rename, scheme_reorder, scheme_unfold,
    AdapterSpec,
};
use refac_core::syntax::parse_str;
use refac_core::term::{all_names, free_vars, fresh_name};
use refac_core::{Flavor, Program, Term};

pub mod ln;
pub mod soundness;

/// Also included by the command-line crate's tests, hence the detour.
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus")
}

pub fn ext(flavor: Flavor) -> &'static str {
    match flavor {
        Flavor::Mfe => "mfe",
        Flavor::Mfh => "mfh",
    }
}

pub struct CorpusFile {
    pub name: String,
    pub text: String,
    pub program: Program,
}

pub fn corpus(flavor: Flavor) -> Vec<CorpusFile> {
    let dir = corpus_dir().join(ext(flavor));
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).unwrap();
            let program = parse_str(&text, flavor).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            CorpusFile {
                name: path.file_name().unwrap().to_string_lossy().into_owned(),
                text,
                program,
            }
        })
        .collect()
}

pub fn corpus_program(flavor: Flavor, stem: &str) -> Program {
    let path = corpus_dir().join(ext(flavor)).join(format!("{stem}.{}", ext(flavor)));
    parse_str(&fs::read_to_string(path).unwrap(), flavor).unwrap()
}

fn first_int(t: &Term) -> Option<i64> {
    let mut found = None;
    t.walk(&mut |s| {
        if let (None, Term::Int(n)) = (found, s) {
            found = Some(*n);
        }
    });
    found
}

/// Every built-in refactoring that applies to some definition of `p`.
pub fn scheme_instances(p: &Program) -> Vec<(String, AdapterSpec)> {
    let mut out = Vec::new();
    for d in &p.defs {
        let id = d.id();
        let n = d.arity();
        let mut taken = all_names(&d.body);
        taken.extend(d.params.iter().cloned());
        taken.extend(p.defs.iter().map(|d| d.name.clone()));
        let new_name = fresh_name(&format!("{}_r", d.name), &taken);
        out.push((format!("rename {id} to {new_name}"), scheme_rename(p, &id, &new_name).unwrap()));
        if n >= 2 {
            let perm: Vec<usize> = (1..=n).rev().collect();
            out.push((format!("reorder {id}"), scheme_reorder(p, &id, &perm).unwrap()));
        }
        let positions = if n == 0 { vec![1] } else { vec![1, n + 1] };
        for pos in positions {
            if let Ok(spec) = scheme_add_arg(p, &id, &Term::Int(0), pos) {
                out.push((format!("add-arg {id} at {pos}"), spec));
            }
        }
        let fv = free_vars(&d.body);
        for (i, x) in d.params.iter().enumerate() {
            if !fv.contains(x) {
                out.push((format!("remove-arg {id} at {}", i + 1), scheme_remove_arg(p, &id, i + 1).unwrap()));
            }
        }
        if let Some(k) = first_int(&d.body) {
            let param = fresh_name(p.flavor.fresh_base(), &taken);
            out.push((
                format!("generalise {id} over {k}"),
                scheme_generalise(p, &id, &param, &Term::Int(k)).unwrap(),
            ));
        }
        out.push((format!("unfold {id}"), scheme_unfold(p, &id).unwrap()));
    }
    out
}
