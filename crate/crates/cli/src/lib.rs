//! The `refac` command line.
//!
//! Refactored source goes to stdout (or back to the file with `--in-place`);
//! diagnostics, traces and refactoring reports go to stderr. `check` is the
//! one command whose report is its output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use refac_core::adapter_file::{load_adapter_file, load_adapter_module};
use refac_core::equiv::{check_equiv, infer_shapes, EquivReport, Sampling, Shape, Verdict};
use refac_core::interp::DEFAULT_FUEL;
use refac_core::migrate::{migrate_traced, MigrationReport};
use refac_core::resolve::ResolveMode;
use refac_core::rewrite::{Firing, Strategy};
use refac_core::schemes::{
    apply_adapter_traced, scheme_add_arg, scheme_generalise, scheme_remove_arg, scheme_rename, scheme_reorder,
    scheme_unfold, AdapterSpec, CheckOptions, Obligation, Options, RefactorReport,
};
use refac_core::syntax::{parse_str, parse_str_lenient, parse_term_in, print_program, SourceFile};
use refac_core::{Error, Flavor, FunId, Program};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRANSFORM: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "refac", version, about = "Refactor MFE and MFH programs by substitution and rewriting")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Source flavor; overrides the file extension.
    #[arg(long, global = true, value_enum)]
    flavor: Option<FlavorArg>,
    /// Write the refactored program back to FILE instead of stdout.
    #[arg(long, global = true)]
    in_place: bool,
    /// Print every rule firing to stderr.
    #[arg(long, global = true)]
    trace: bool,
    /// Skip the adapter obligation check.
    #[arg(long, global = true)]
    no_check: bool,
    #[arg(long, global = true, value_enum)]
    report: Option<ReportFormat>,
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Argument shapes, e.g. `int,list_int,fun_int_int`; inferred when absent.
    #[arg(long, global = true, value_delimiter = ',')]
    shapes: Option<Vec<Shape>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FlavorArg {
    Mfe,
    Mfh,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Flavor {
        match f {
            FlavorArg::Mfe => Flavor::Mfe,
            FlavorArg::Mfh => Flavor::Mfh,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rename a function.
    Rename {
        #[arg(long, value_parser = parse_target)]
        target: FunId,
        #[arg(long)]
        to: String,
        file: PathBuf,
    },
    /// Abstract a closed subexpression of the body into a new last parameter.
    Generalise {
        #[arg(long, value_parser = parse_target)]
        target: FunId,
        #[arg(long)]
        param: String,
        #[arg(long)]
        extract: String,
        file: PathBuf,
    },
    /// Permute the parameters; `--perm 2,1` swaps two.
    Reorder {
        #[arg(long, value_parser = parse_target)]
        target: FunId,
        #[arg(long, value_delimiter = ',', required = true)]
        perm: Vec<usize>,
        file: PathBuf,
    },
    AddArg {
        #[arg(long, value_parser = parse_target)]
        target: FunId,
        #[arg(long)]
        default: String,
        #[arg(long)]
        pos: usize,
        file: PathBuf,
    },
    RemoveArg {
        #[arg(long, value_parser = parse_target)]
        target: FunId,
        #[arg(long)]
        pos: usize,
        file: PathBuf,
    },
    /// Inline a function at every use and drop its definition.
    Unfold {
        #[arg(long, value_parser = parse_target)]
        target: FunId,
        file: PathBuf,
    },
    /// Apply an adapter file.
    Custom {
        #[arg(long)]
        adapter: PathBuf,
        file: PathBuf,
    },
    /// Compare an entry point of two programs on random inputs.
    Check {
        #[arg(long)]
        old: PathBuf,
        #[arg(long)]
        new: PathBuf,
        #[arg(long, value_parser = parse_target)]
        entry: FunId,
    },
    /// Inline an adapter module into a client of the old API.
    Migrate {
        #[arg(long)]
        adapters: PathBuf,
        file: PathBuf,
    },
}

fn parse_target(s: &str) -> Result<FunId, String> {
    FunId::parse(s).ok_or_else(|| format!("expected NAME/ARITY, got `{s}`"))
}

/// A failed run: exit code plus the diagnostic, possibly several lines.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { EXIT_USAGE } else { EXIT_TRANSFORM };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Ctx<'a> {
    g: Global,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let out: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = out.write_all(text.as_bytes());
            return code;
        }
    };
    let trace = cli.global.trace;
    let mut ctx = Ctx {
        g: cli.global,
        stdout,
        stderr,
    };
    match ctx.dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            // One line per diagnostic; divergence details only with --trace.
            let mut lines = f.message.lines();
            let _ = writeln!(ctx.stderr, "{}", lines.next().unwrap_or_default());
            if trace {
                for l in lines {
                    let _ = writeln!(ctx.stderr, "{l}");
                }
            }
            f.code
        }
    }
}

impl Ctx<'_> {
    fn dispatch(&mut self, command: Command) -> Outcome<i32> {
        match command {
            Command::Rename { target, to, file } => {
                self.refactor(&file, |p| scheme_rename(p, &target, &to))
            }
            Command::Generalise {
                target,
                param,
                extract,
                file,
            } => self.refactor(&file, |p| {
                let t = parse_term_in(&extract, p, ResolveMode::Strict)?;
                scheme_generalise(p, &target, &param, &t)
            }),
            Command::Reorder { target, perm, file } => self.refactor(&file, |p| scheme_reorder(p, &target, &perm)),
            Command::AddArg {
                target,
                default,
                pos,
                file,
            } => self.refactor(&file, |p| {
                let t = parse_term_in(&default, p, ResolveMode::Strict)?;
                scheme_add_arg(p, &target, &t, pos)
            }),
            Command::RemoveArg { target, pos, file } => {
                self.refactor(&file, |p| scheme_remove_arg(p, &target, pos))
            }
            Command::Unfold { target, file } => self.refactor(&file, |p| scheme_unfold(p, &target)),
            Command::Custom { adapter, file } => self.refactor(&file, |p| load_adapter_file(&adapter, p)),
            Command::Check { old, new, entry } => self.check(&old, &new, &entry),
            Command::Migrate { adapters, file } => self.migrate(&adapters, &file),
        }
    }

    fn sampling(&self) -> Sampling {
        Sampling {
            samples: self.g.samples,
            fuel: self.g.fuel,
            seed: self.g.seed,
        }
    }

    fn load(&self, path: &Path) -> Outcome<SourceFile> {
        SourceFile::load(path, self.g.flavor.map(Flavor::from)).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    fn emit(&mut self, path: &Path, p: &Program) -> Outcome<()> {
        let text = print_program(p);
        if self.g.in_place {
            std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
        } else {
            self.stdout
                .write_all(text.as_bytes())
                .map_err(|e| usage(format!("stdout: {e}")))
        }
    }

    fn refactor(&mut self, path: &Path, build: impl FnOnce(&Program) -> refac_core::Result<AdapterSpec>) -> Outcome<i32> {
        let src = self.load(path)?;
        let p = parse_str(&src.text, src.flavor)?;
        let spec = build(&p)?;
        let opts = Options {
            strategy: Strategy::default(),
            // A traced rename shows the substitution and its tidy-up.
            fast_path: !self.g.trace,
            check: (!self.g.no_check).then(|| CheckOptions {
                sampling: self.sampling(),
                shapes: self.g.shapes.clone(),
            }),
        };
        let flavor = p.flavor;
        let report = if self.g.trace {
            let stderr = &mut *self.stderr;
            let mut obs = |f: &Firing| {
                let _ = writeln!(stderr, "{}", f.render(flavor));
            };
            apply_adapter_traced(&p, &spec, &opts, Some(&mut obs))?
        } else {
            apply_adapter_traced(&p, &spec, &opts, None)?
        };
        if self.g.no_check {
            let _ = writeln!(self.stderr, "warning: obligation for {} not checked", spec.target);
        }
        if let Some(r) = &report.obligation_report {
            if r.verdict == Verdict::Inconclusive {
                let _ = writeln!(self.stderr, "warning: obligation for {} inconclusive", spec.target);
            }
        }
        self.refactor_report(&report);
        if report.obligation == Obligation::CheckedFailed {
            let r = report.obligation_report.as_ref().expect("failed check has a report");
            let _ = writeln!(
                self.stderr,
                "ObligationFailed: adapter for {} disagrees on {} of {} samples",
                spec.target,
                r.disagreements.len(),
                r.samples
            );
            if let Some(d) = r.disagreements.first() {
                let _ = writeln!(self.stderr, "  args ({}): old {}, new {}", d.args.join(", "), d.old, d.new);
            }
            return Ok(EXIT_COUNTEREXAMPLE);
        }
        self.emit(path, &report.output)?;
        Ok(EXIT_OK)
    }

    fn refactor_report(&mut self, r: &RefactorReport) {
        match self.g.report {
            None => {}
            Some(ReportFormat::Json) => {
                let v = json!({
                    "sites_rewritten": r.sites_rewritten,
                    "rule_firings": r.rule_firings,
                    "obligation": r.obligation,
                    "obligation_report": r.obligation_report,
                });
                let _ = writeln!(self.stderr, "{v}");
            }
            Some(ReportFormat::Text) => {
                let obligation = serde_json::to_value(r.obligation).expect("enum serializes");
                let _ = writeln!(self.stderr, "sites_rewritten: {}", r.sites_rewritten);
                for (rule, n) in &r.rule_firings {
                    let _ = writeln!(self.stderr, "rule {rule}: {n}");
                }
                let _ = writeln!(self.stderr, "obligation: {}", obligation.as_str().unwrap_or_default());
                if let Some(o) = &r.obligation_report {
                    let _ = self.stderr.write_all(o.to_text().as_bytes());
                }
            }
        }
    }

    fn check(&mut self, old: &Path, new: &Path, entry: &FunId) -> Outcome<i32> {
        let (a, b) = (self.load(old)?, self.load(new)?);
        if a.flavor != b.flavor {
            return Err(usage(format!("{} and {} have different flavors", old.display(), new.display())));
        }
        let (pa, pb) = (parse_str(&a.text, a.flavor)?, parse_str(&b.text, b.flavor)?);
        let shapes = match &self.g.shapes {
            Some(s) => s.clone(),
            None => {
                let d = pa.find(entry).ok_or_else(|| Error::EntryMissing(entry.clone()))?;
                infer_shapes(&pa, d)
            }
        };
        let r = check_equiv(&pa, &pb, entry, &shapes, self.sampling())?;
        self.write_equiv(&r);
        Ok(match r.verdict {
            Verdict::EquivalentOnSamples => EXIT_OK,
            Verdict::CounterexampleFound | Verdict::Inconclusive => EXIT_COUNTEREXAMPLE,
        })
    }

    fn write_equiv(&mut self, r: &EquivReport) {
        let text = match self.g.report {
            Some(ReportFormat::Json) => format!("{}\n", serde_json::to_string(r).expect("report serializes")),
            _ => r.to_text(),
        };
        let _ = self.stdout.write_all(text.as_bytes());
    }

    fn migrate(&mut self, adapters: &Path, path: &Path) -> Outcome<i32> {
        let src = self.load(path)?;
        let client = parse_str_lenient(&src.text, src.flavor)?;
        let module = load_adapter_module(adapters, &client)?;
        let flavor = client.flavor;
        let (out, report) = if self.g.trace {
            let stderr = &mut *self.stderr;
            let mut obs = |f: &Firing| {
                let _ = writeln!(stderr, "{}", f.render(flavor));
            };
            migrate_traced(&client, &module, Strategy::default(), Some(&mut obs))?
        } else {
            migrate_traced(&client, &module, Strategy::default(), None)?
        };
        for r in &report.residual {
            let id = match r.arity {
                Some(n) => format!("{}/{n}", r.name),
                None => r.name.clone(),
            };
            let _ = writeln!(self.stderr, "warning: residual reference to {id} in {}", r.location);
        }
        self.migration_report(&report);
        self.emit(path, &out)?;
        Ok(EXIT_OK)
    }

    fn migration_report(&mut self, r: &MigrationReport) {
        match self.g.report {
            None => {}
            Some(ReportFormat::Json) => {
                let _ = writeln!(self.stderr, "{}", serde_json::to_string(r).expect("report serializes"));
            }
            Some(ReportFormat::Text) => {
                for (target, n) in &r.sites {
                    let _ = writeln!(self.stderr, "sites {target}: {n}");
                }
                let _ = writeln!(self.stderr, "residual: {}", r.residual.len());
                for (rule, n) in &r.rule_firings {
                    let _ = writeln!(self.stderr, "rule {rule}: {n}");
                }
            }
        }
    }
}
