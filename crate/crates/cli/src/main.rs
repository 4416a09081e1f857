//! Command line interface: file ingestion, command dispatch, human and
//! machine reports.
//!
//! Exit codes: 0 success, 1 domain failure (invalid or failing input),
//! 2 usage or parse error, 3 oracle mismatch under `--verify`.

use clap::{ArgAction, Parser, Subcommand};
use linvariant::deform::{check_deformation, ConstraintStatus};
use linvariant::io::{parse_module_file, IoError, ModuleFile, NamedFlag};
use linvariant::oracle;
use linvariant::phinmod::AdmissibilityVerdict;
use linvariant::refine::{
    critical_indices, dual_refinement, enumerate_refinements, l_invariant_report, CriticalVerdict,
    LInvariantReport, Refinement,
};
use linvariant::report;
use linvariant::triparam::{max_monodromy_refinement, refinement_to_parameters};
use std::path::PathBuf;
use std::process::ExitCode;

/// Writes a line to stdout, dying quietly (like SIGPIPE) when the
/// downstream reader has closed the pipe.
macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let mut h = std::io::stdout().lock();
        if writeln!(h, $($t)*).is_err() {
            std::process::exit(141);
        }
    }};
}

const EXIT_OK: u8 = 0;
const EXIT_DOMAIN: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ORACLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "linv",
    version,
    about = "Exact invariants of filtered (phi,N)-modules: refinements, L-invariants, deformation constraints"
)]
struct Cli {
    /// Machine-readable output with stable key order.
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    json: bool,
    /// Run the brute-force oracles alongside the primary implementations
    /// and fail (exit 3) on any mismatch.
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a module file and report admissibility.
    Check {
        file: PathBuf,
        /// Exit nonzero unless the module is certified admissible.
        #[arg(long, action = ArgAction::SetTrue)]
        require_admissible: bool,
    },
    /// Orderings, graded monodromy, critical pairs and L-invariants of a
    /// named refinement.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        refinement: String,
    },
    /// Write the dual module and dual refinement in the same schema.
    Dual {
        file: PathBuf,
        #[arg(long)]
        refinement: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Rank-one triangulation parameters of a named refinement.
    Params {
        file: PathBuf,
        #[arg(long)]
        refinement: String,
    },
    /// Canonical flag and triangular transform of a maximal-monodromy
    /// module, cross-checked against the refinement route.
    MaxMonodromy { file: PathBuf },
    /// Residuals of a first-order family against the refinement's
    /// constraints.
    DeformCheck {
        file: PathBuf,
        #[arg(long)]
        refinement: String,
        #[arg(long)]
        family: String,
        /// Downgrade undecided constraints from an error to a warning.
        #[arg(long, action = ArgAction::SetTrue)]
        allow_unchecked: bool,
    },
    /// Enumerate all stable full flags (distinct eigenvalues only).
    Refinements { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(cli))
}

fn load(path: &PathBuf) -> Result<ModuleFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    parse_module_file(&text).map_err(|e| e.to_string())
}

fn refinement_from(file: &ModuleFile, name: &str) -> Result<Refinement, (u8, String)> {
    let module = file.to_module().map_err(|e| (EXIT_USAGE, e.to_string()))?;
    let flag = file.flag(name).map_err(|e| match e {
        IoError::UnknownRefinement(_) => (EXIT_USAGE, e.to_string()),
        other => (EXIT_USAGE, other.to_string()),
    })?;
    Refinement::new(module, flag).map_err(|e| (EXIT_DOMAIN, e.to_string()))
}

/// Diffs the primary critical/L pipeline against the oracles.
fn verify_refinement(r: &Refinement, report: &LInvariantReport) -> Result<Vec<String>, String> {
    let mut lines = Vec::new();
    let primary = critical_indices(r);
    let oracled = oracle::oracle_critical_indices(r);
    if primary != oracled {
        return Err(format!(
            "critical indices mismatch: primary {:?}, oracle {:?}",
            primary, oracled
        ));
    }
    lines.push(format!(
        "oracle: critical indices agree ({} pairs)",
        primary.len()
    ));
    for entry in &report.entries {
        if let CriticalVerdict::StronglyCritical(l) = &entry.verdict {
            match oracle::oracle_l_invariant(r, &entry.decomposition) {
                Ok(ol) if &ol == l => lines.push(format!("oracle: L at s={} agrees", entry.s)),
                Ok(ol) => {
                    return Err(format!(
                        "L mismatch at s={}: primary {}, oracle {}",
                        entry.s, l, ol
                    ))
                }
                Err(e) => return Err(format!("oracle failed at s={}: {}", entry.s, e)),
            }
        }
    }
    Ok(lines)
}

fn run(cli: Cli) -> u8 {
    match &cli.command {
        Command::Check {
            file,
            require_admissible,
        } => {
            let parsed = match load(file) {
                Ok(f) => f,
                Err(e) => return usage_error(&e),
            };
            let module = match parsed.to_module() {
                Ok(m) => m,
                Err(e) => return usage_error(&e.to_string()),
            };
            let candidates = match parsed.candidate_subspaces() {
                Ok(c) => c,
                Err(e) => return usage_error(&e.to_string()),
            };
            let out = report::check_output(&module, &candidates);
            if cli.verify && out.valid {
                match oracle::oracle_admissible(&module) {
                    Ok(oracle_ok) => {
                        let primary_ok = matches!(
                            module.is_admissible(&candidates).verdict,
                            AdmissibilityVerdict::Admissible
                        );
                        if oracle_ok != primary_ok {
                            eprintln!(
                                "oracle mismatch: admissibility primary={}, oracle={}",
                                primary_ok, oracle_ok
                            );
                            return EXIT_ORACLE;
                        }
                        if !cli.json {
                            outln!("oracle: admissibility agrees");
                        }
                    }
                    Err(_) => {
                        if !cli.json {
                            outln!("oracle: skipped (requires distinct rational eigenvalues)");
                        }
                    }
                }
            }
            if cli.json {
                outln!("{}", report::to_json(&out));
            } else {
                print_check(&out);
            }
            if !out.valid {
                return EXIT_DOMAIN;
            }
            if *require_admissible {
                let certified = out
                    .admissibility
                    .as_ref()
                    .is_some_and(|a| a.verdict == "admissible");
                if !certified {
                    return EXIT_DOMAIN;
                }
            }
            EXIT_OK
        }

        Command::Analyze { file, refinement } => {
            let parsed = match load(file) {
                Ok(f) => f,
                Err(e) => return usage_error(&e),
            };
            let r = match refinement_from(&parsed, refinement) {
                Ok(r) => r,
                Err((code, e)) => return fail(code, &e),
            };
            let rep = l_invariant_report(&r);
            if cli.verify {
                match verify_refinement(&r, &rep) {
                    Ok(lines) => {
                        if !cli.json {
                            for l in lines {
                                outln!("{}", l);
                            }
                        }
                    }
                    Err(e) => {
                        eprintln!("oracle mismatch: {}", e);
                        return EXIT_ORACLE;
                    }
                }
            }
            let out = report::analyze_output(refinement, &r, &rep);
            if cli.json {
                outln!("{}", report::to_json(&out));
            } else {
                print_analyze(&out);
            }
            EXIT_OK
        }

        Command::Dual {
            file,
            refinement,
            output,
        } => {
            let parsed = match load(file) {
                Ok(f) => f,
                Err(e) => return usage_error(&e),
            };
            let r = match refinement_from(&parsed, refinement) {
                Ok(r) => r,
                Err((code, e)) => return fail(code, &e),
            };
            let dual = dual_refinement(&r);
            let out_file = ModuleFile::from_module(
                dual.module(),
                vec![NamedFlag {
                    name: refinement.clone(),
                    flag: dual.flag().vectors().to_vec(),
                }],
            );
            let json = out_file.to_json();
            if let Err(e) = std::fs::write(output, json.as_bytes()) {
                return usage_error(&format!("{}: {}", output.display(), e));
            }
            if cli.json {
                outln!("{}", json);
            } else {
                outln!("wrote dual module to {}", output.display());
            }
            EXIT_OK
        }

        Command::Params { file, refinement } => {
            let parsed = match load(file) {
                Ok(f) => f,
                Err(e) => return usage_error(&e),
            };
            let r = match refinement_from(&parsed, refinement) {
                Ok(r) => r,
                Err((code, e)) => return fail(code, &e),
            };
            let chars = refinement_to_parameters(&r);
            if cli.json {
                outln!("{}", report::to_json(&chars));
            } else {
                for (i, c) in chars.iter().enumerate() {
                    outln!("delta_{}(p) = {}, weight = {}", i + 1, c.delta_p, c.weight);
                }
            }
            EXIT_OK
        }

        Command::MaxMonodromy { file } => {
            let parsed = match load(file) {
                Ok(f) => f,
                Err(e) => return usage_error(&e),
            };
            let module = match parsed.to_module() {
                Ok(m) => m,
                Err(e) => return usage_error(&e.to_string()),
            };
            let out = match max_monodromy_refinement(&module) {
                Ok(o) => o,
                Err(e) => return fail(EXIT_DOMAIN, &e.to_string()),
            };
            let rep = report::max_monodromy_output(&out);
            if cli.json {
                outln!("{}", report::to_json(&rep));
            } else {
                outln!("canonical flag:");
                for v in &rep.flag {
                    outln!("  ({})", join_rats(v));
                }
                outln!("weights: {:?}", rep.weights);
                outln!("transform:");
                for row in &rep.ell {
                    outln!("  [{}]", join_rats(row));
                }
                outln!("superdiagonal: {}", join_rats(&rep.l_values));
                outln!("L-invariants:  {}", join_rats(&rep.l_invariants));
            }
            EXIT_OK
        }

        Command::DeformCheck {
            file,
            refinement,
            family,
            allow_unchecked,
        } => {
            let parsed = match load(file) {
                Ok(f) => f,
                Err(e) => return usage_error(&e),
            };
            let r = match refinement_from(&parsed, refinement) {
                Ok(r) => r,
                Err((code, e)) => return fail(code, &e),
            };
            let fam = match parsed.family(family) {
                Ok(f) => f,
                Err(e) => return usage_error(&e.to_string()),
            };
            let rep = l_invariant_report(&r);
            if cli.verify {
                if let Err(e) = verify_refinement(&r, &rep) {
                    eprintln!("oracle mismatch: {}", e);
                    return EXIT_ORACLE;
                }
            }
            let result = match check_deformation(&r, &rep, &fam) {
                Ok(res) => res,
                Err(e) => return fail(EXIT_DOMAIN, &e.to_string()),
            };
            let out = report::deform_output(&result);
            if cli.json {
                outln!("{}", report::to_json(&out));
            } else {
                for row in &result.results {
                    match &row.status {
                        ConstraintStatus::Pass => {
                            outln!(
                                "s={} t={} L={}: residual 0",
                                row.s,
                                row.t,
                                row.l.as_ref().unwrap()
                            )
                        }
                        ConstraintStatus::Fail(v) => {
                            outln!(
                                "s={} t={} L={}: residual {}",
                                row.s,
                                row.t,
                                row.l.as_ref().unwrap(),
                                v
                            )
                        }
                        ConstraintStatus::Unchecked => {
                            outln!("s={} t={}: unchecked", row.s, row.t)
                        }
                    }
                }
            }
            if !result.all_zero {
                return EXIT_DOMAIN;
            }
            if !result.complete && !allow_unchecked {
                return EXIT_DOMAIN;
            }
            EXIT_OK
        }

        Command::Refinements { file } => {
            let parsed = match load(file) {
                Ok(f) => f,
                Err(e) => return usage_error(&e),
            };
            let module = match parsed.to_module() {
                Ok(m) => m,
                Err(e) => return usage_error(&e.to_string()),
            };
            let flags = match enumerate_refinements(&module) {
                Ok(f) => f,
                Err(e) => return fail(EXIT_DOMAIN, &e.to_string()),
            };
            if cli.json {
                let rows: Vec<Vec<Vec<linvariant::Rat>>> =
                    flags.iter().map(|f| f.vectors().to_vec()).collect();
                outln!("{}", report::to_json(&rows));
            } else {
                outln!("{} stable flag(s)", flags.len());
                for (k, f) in flags.iter().enumerate() {
                    let rows: Vec<String> = f
                        .vectors()
                        .iter()
                        .map(|v| format!("({})", join_rats(v)))
                        .collect();
                    outln!("  #{}: {}", k + 1, rows.join(", "));
                }
            }
            EXIT_OK
        }
    }
}

fn join_rats(v: &[linvariant::Rat]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn usage_error(msg: &str) -> u8 {
    eprintln!("error: {}", msg);
    EXIT_USAGE
}

fn fail(code: u8, msg: &str) -> u8 {
    eprintln!("error: {}", msg);
    code
}

fn print_check(out: &report::CheckOutput) {
    if out.valid {
        outln!("module: valid");
    } else {
        outln!("module: INVALID");
        for v in &out.violations {
            outln!("  - {}", v);
        }
        return;
    }
    if let Some(h) = &out.hodge {
        outln!("hodge weights: {:?}, t_H = {}", h.weights, h.t_h);
    }
    if let Some(n) = &out.newton {
        match &n.slopes {
            Some(s) => outln!("newton slopes: {:?}, t_N = {}", s, n.t_n),
            None => outln!("newton: irrational spectrum, t_N = {}", n.t_n),
        }
    }
    if let Some(a) = &out.admissibility {
        outln!(
            "admissibility: {}{}",
            a.verdict,
            if a.certified {
                ""
            } else {
                " (not a certificate)"
            }
        );
        for c in &a.checks {
            outln!(
                "  dim {}: t_H = {} <= t_N = {} : {}",
                c.dim,
                c.t_h,
                c.t_n,
                if c.ok { "ok" } else { "VIOLATED" }
            );
        }
    }
}

fn print_analyze(out: &report::AnalyzeOutput) {
    outln!("refinement {}", out.refinement);
    outln!("alpha: {}", join_rats(&out.alphas));
    outln!("k:     {:?}", out.ks);
    let rows: Vec<String> = out
        .graded_monodromy
        .iter()
        .map(|r| match (&r.to, &r.coeff) {
            (Some(to), Some(c)) => format!("gr_{} -> {} gr_{}", r.from, c, to),
            _ => format!("gr_{} -> 0", r.from),
        })
        .collect();
    outln!("N_F:   {}", rows.join(", "));
    outln!("critical pairs: {:?}", out.critical);
    for inv in &out.invariants {
        match &inv.l {
            Some(l) => outln!("s={} t={}: {}, L = {}", inv.s, inv.t, inv.verdict, l),
            None => outln!("s={} t={}: {}", inv.s, inv.t, inv.verdict),
        }
    }
    let dp: Vec<String> = out
        .parameters
        .iter()
        .map(|c| c.delta_p.to_string())
        .collect();
    let w: Vec<String> = out
        .parameters
        .iter()
        .map(|c| c.weight.to_string())
        .collect();
    outln!("delta(p): ({})", dp.join(", "));
    outln!("weights:  ({})", w.join(", "));
}
