//! `gibbs-series`: command-line access to the series, conjugate, entropy and
//! verification routines. Every command prints one JSON document (tables
//! default to CSV).
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error or infeasible
//! problem, 3 numeric failure, exhausted budget or failed verification.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use gibbs_series::claims::{self, ClaimOptions};
use gibbs_series::conjugate::{box_conjugate_scaled, conjugate, log_f_conjugate_point};
use gibbs_series::entropy::{
    alternating_attainment, alternating_witness, fit_gibbs, min_entropy_moment, plateau_witness, FitStatus,
};
use gibbs_series::numeric::{Accuracy, Budget, DEFAULT_MAX_TERMS};
use gibbs_series::oracle::{
    alternating_gradient_series, check_box_gradient, check_directional, check_fenchel_young, check_gradient_sum,
    default_step, primal_truncated, Targets,
};
use gibbs_series::scenarios::{
    box_table, default_box_grid, example1_csv_table, example1_table, example2_table, BoxModel, Table,
    VarsigmaSequence,
};
use gibbs_series::sequences::{enumerate_box, increment_gap, sigma, Family, SigmaSequence};
use gibbs_series::series::{domain_info, eval, phi};
use gibbs_series::Error;

const SCHEMA: &str = "gibbs-series/1";
const MAX_TERMS_ENV: &str = "GIBBS_SERIES_MAX_TERMS";

#[derive(Parser, Debug)]
#[command(name = "gibbs-series", version, about = "Certified exponential series, conjugates and Gibbs fits")]
struct Cli {
    /// Requested tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Term budget (default 10^7, or $GIBBS_SERIES_MAX_TERMS).
    #[arg(long, global = true)]
    max_terms: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableName {
    Example1,
    Example2,
    Box,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Domain classification: α, boundary class, γ, f(-α).
    Domain { seq: String },
    /// σ_n and the increment gap at n.
    Sigma {
        seq: String,
        #[arg(long)]
        n: u64,
    },
    /// Certified f^(p)(y).
    Eval {
        seq: String,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 0)]
        p: u32,
    },
    /// φ(y) = f'(y)/f(y).
    Phi {
        seq: String,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// f*(u).
    Conjugate {
        seq: String,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
    },
    /// (ln f)*(v); the sequence defaults to quadratic.
    Logconj {
        seq: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        v: f64,
    },
    /// Box conjugate h*(u, v).
    Boxconj {
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Minimum-entropy fit with moment u (and mass-normalized energy v).
    Fit {
        seq: String,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
    },
    /// ε-optimal witness: plateau witness, or the alternating problem when --v is given.
    Witness {
        seq: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
        #[arg(long)]
        eps: f64,
        /// ς_n for the alternating problem: n2, pow:<k>, exp:<α>, expsq.
        #[arg(long, default_value = "n2")]
        varsigma: String,
        /// Number of weights to print.
        #[arg(long, default_value_t = 64)]
        show: usize,
    },
    /// Attainment value v̄ for the alternating problem.
    Attain {
        #[arg(long)]
        u: f64,
        #[arg(long, default_value = "n2")]
        varsigma: String,
    },
    /// Run a verification claim (c1..c10) or all of them.
    Verify {
        claim: String,
        /// Number of sampled points for sweeps.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Include every report, not only failing ones.
        #[arg(long)]
        reports: bool,
    },
    /// Canned tables.
    Table {
        #[arg(value_enum)]
        name: TableName,
        /// Terms for the example2 partial sums.
        #[arg(long, default_value_t = 200)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// First levels of the box spectrum.
    Enumerate {
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long)]
        budget: usize,
    },
    /// Truncated primal problem solved directly.
    Primal {
        seq: String,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
    },
    /// Finite differences against the series gradient (use --x for the box h).
    Gradcheck {
        seq: String,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        directional: bool,
    },
    /// Fenchel–Young gap f(y) + f*(u) - yu.
    Fy {
        seq: String,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
    },
    /// Partial sums of the alternating gradient series.
    Altgrad {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value = "n2")]
        varsigma: String,
        #[arg(long, default_value_t = 200)]
        n: u64,
    },
    /// Full box-model report at (u, v).
    Box {
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 200)]
        levels: usize,
    },
}

/// What a command produced.
enum Output {
    Doc(Value, u8),
    Table(Table),
}

struct Failure {
    code: u8,
    doc: Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) => 1,
            e if e.is_domain() => 2,
            _ => 3,
        };
        let mut doc = json!({ "error": e.kind(), "message": e.to_string() });
        match &e {
            Error::OutsideDomain { info, y, p } => {
                doc["domain"] = json!(info);
                doc["y"] = json!(y);
                doc["p"] = json!(p);
            }
            Error::BudgetExceeded { best, .. } => doc["best"] = json!(best),
            Error::WitnessBudget { best_gap, max_terms, .. } => {
                doc["best_gap"] = json!(best_gap);
                doc["max_terms"] = json!(max_terms);
            }
            _ => {}
        }
        Failure { code, doc }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::from(Error::InvalidArgument(msg.into()))
}

struct Config {
    tol: f64,
    max_terms: u64,
    seed: u64,
}

impl Config {
    fn acc(&self) -> Accuracy {
        Accuracy::new(self.tol).with_max_terms(self.max_terms)
    }

    fn budget(&self) -> Budget {
        Budget::new(self.max_terms)
    }
}

fn parse_seq(s: &str) -> Result<SigmaSequence, Failure> {
    Ok(s.parse::<SigmaSequence>()?)
}

fn parse_varsigma(s: &str) -> Result<VarsigmaSequence, Failure> {
    Ok(s.parse::<VarsigmaSequence>()?)
}

fn fit_code(status: FitStatus) -> u8 {
    if status == FitStatus::Infeasible {
        2
    } else {
        0
    }
}

fn run(cli: Cli, cfg: &Config) -> Result<Output, Failure> {
    let acc = cfg.acc();
    let doc = match cli.command {
        Command::Domain { seq } => {
            let s = parse_seq(&seq)?;
            let info = domain_info(&s);
            json!({ "sequence": s.label(), "start_index": s.start_index(), "domain": info })
        }
        Command::Sigma { seq, n } => {
            let s = parse_seq(&seq)?;
            if matches!(s.family(), Family::BoxTriple { .. }) {
                let levels = enumerate_box(match s.family() {
                    Family::BoxTriple { kappa } => *kappa,
                    _ => unreachable!(),
                }, n as usize);
                let level = levels.last().ok_or_else(|| usage("n must be at least 1"))?;
                json!({ "sequence": s.label(), "n": n, "sigma": level.sigma, "triple": level.triple })
            } else {
                json!({ "sequence": s.label(), "n": n, "sigma": sigma(&s, n)?, "increment_gap": increment_gap(&s, n) })
            }
        }
        Command::Eval { seq, y, p } => {
            let s = parse_seq(&seq)?;
            let e = eval(&s, y, p, acc)?;
            json!({ "sequence": s.label(), "y": y, "p": p, "value": e.value, "tail_bound": e.tail_bound,
                    "truncation_index": e.truncation_index, "requested_tol": e.requested_tol })
        }
        Command::Phi { seq, y } => {
            let s = parse_seq(&seq)?;
            json!({ "sequence": s.label(), "y": y, "phi": phi(&s, y, acc)? })
        }
        Command::Conjugate { seq, u } => {
            let s = parse_seq(&seq)?;
            let c = conjugate(&s, u, acc)?;
            json!({ "sequence": s.label(), "u": u, "value": c.value, "regime": c.regime,
                    "y": c.attaining_y, "residual": c.residual })
        }
        Command::Logconj { seq, v } => {
            let s = parse_seq(seq.as_deref().unwrap_or("quadratic"))?;
            let c = log_f_conjugate_point(&s, v, acc)?;
            json!({ "sequence": s.label(), "v": v, "value": c.value, "y": c.attaining_y })
        }
        Command::Boxconj { u, v, kappa } => {
            json!({ "u": u, "v": v, "kappa": kappa, "value": box_conjugate_scaled(kappa, u, v, acc)? })
        }
        Command::Fit { seq, u, v } => {
            let s = parse_seq(&seq)?;
            let fit = match v {
                Some(v) => fit_gibbs(&s, u, v, acc)?,
                None => min_entropy_moment(&s, u, acc)?,
            };
            let code = fit_code(fit.status);
            let d = json!({ "sequence": s.label(), "u": u, "v": v, "status": fit.status,
                    "entropy": fit.entropy_value, "dual_x": fit.dual_x, "dual_y": fit.dual_y,
                    "moments": fit.achieved_moments, "weights": fit.weights, "reason": fit.reason });
            return Ok(Output::Doc(d, code));
        }
        Command::Witness { seq, u, v, eps, varsigma, show } => match v {
            Some(v) => {
                if let Some(seq) = &seq {
                    let s = parse_seq(seq)?;
                    if !matches!(s.family(), Family::Linear) {
                        return Err(usage("the alternating problem uses sigma_n = n; pass `linear` or omit the sequence"));
                    }
                }
                let vs = parse_varsigma(&varsigma)?;
                let w = alternating_witness(u, v, eps, &vs, &cfg.budget())?;
                json!({ "problem": "alternating", "varsigma": vs.to_string(), "eps": eps, "witness": w })
            }
            None => {
                let seq = seq.ok_or_else(|| usage("the plateau witness needs a sequence"))?;
                let s = parse_seq(&seq)?;
                let w = plateau_witness(&s, u, eps, &cfg.budget())?;
                json!({ "problem": "plateau", "sequence": s.label(), "eps": eps, "support": w.support(),
                        "weights": w.weights(show), "witness": w })
            }
        },
        Command::Attain { u, varsigma } => {
            let vs = parse_varsigma(&varsigma)?;
            json!({ "u": u, "varsigma": vs.to_string(), "attainment": alternating_attainment(u, &vs, cfg.tol)? })
        }
        Command::Verify { claim, grid, jobs, reports } => return verify(&claim, grid, jobs, reports, cfg),
        Command::Table { name, n, kappa } => {
            let table = match name {
                TableName::Example1 => {
                    if cli.format != Some(Format::Csv) && cli.format.is_some() {
                        return Ok(Output::Doc(json!({ "table": "example1", "rows": example1_table()? }), 0));
                    }
                    example1_csv_table()?
                }
                TableName::Example2 => example2_table(n)?,
                TableName::Box => box_table(&BoxModel::new(kappa, 200)?, &default_box_grid(), cfg.tol)?,
            };
            return Ok(Output::Table(table));
        }
        Command::Enumerate { kappa, budget } => {
            if !(kappa > 0.0) {
                return Err(usage("kappa must be positive"));
            }
            json!({ "kappa": kappa, "levels": enumerate_box(kappa, budget) })
        }
        Command::Primal { seq, n, u, v } => {
            let s = parse_seq(&seq)?;
            let targets = match v {
                Some(v) => Targets::MassEnergy { mass: u, energy: v },
                None => Targets::Energy(u),
            };
            let sol = primal_truncated(&s, n, targets, cfg.tol)?;
            json!({ "sequence": s.label(), "n": n, "targets": targets, "solution": sol })
        }
        Command::Gradcheck { seq, y, x, h, directional } => {
            let s = parse_seq(&seq)?;
            let h = h.unwrap_or_else(|| default_step(y));
            let report = match (x, s.family()) {
                (Some(x), Family::BoxTriple { kappa }) => check_box_gradient(*kappa, x, y, h, 1e-6)?,
                (Some(_), _) => return Err(usage("--x applies to box sequences only")),
                (None, _) if directional => check_directional(&s, y, h, 1e-6)?,
                (None, _) => check_gradient_sum(&s, y, h, 1e-6)?,
            };
            let code = if report.pass { 0 } else { 3 };
            return Ok(Output::Doc(json!({ "report": report }), code));
        }
        Command::Fy { seq, y, u } => {
            let s = parse_seq(&seq)?;
            json!({ "report": check_fenchel_young(&s, y, u, 1e-10, 1e-8)? })
        }
        Command::Altgrad { x, varsigma, n } => {
            let vs = parse_varsigma(&varsigma)?;
            json!({ "varsigma": vs.to_string(), "series": alternating_gradient_series(x, &vs, n)? })
        }
        Command::Box { u, v, kappa, levels } => {
            let r = BoxModel::new(kappa, levels)?.report(u, v, cfg.tol)?;
            let code = fit_code(r.status);
            return Ok(Output::Doc(json!({ "report": r }), code));
        }
    };
    Ok(Output::Doc(doc, 0))
}

fn verify(claim: &str, grid: Option<usize>, jobs: Option<usize>, all_reports: bool, cfg: &Config) -> Result<Output, Failure> {
    let mut opts = ClaimOptions {
        grid,
        seed: cfg.seed,
        max_terms: Some(cfg.max_terms),
        ..ClaimOptions::default()
    };
    if let Some(j) = jobs {
        if j == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        opts.jobs = j;
    }
    let outcomes = if claim == "all" {
        claims::run_all(&opts)?
    } else {
        vec![claims::run_claim(claim, &opts)?]
    };
    let pass = outcomes.iter().all(|o| o.pass);
    let list: Vec<Value> = outcomes
        .into_iter()
        .map(|mut o| {
            if !all_reports {
                o.reports.retain(|r| !r.pass);
            }
            json!(o)
        })
        .collect();
    Ok(Output::Doc(json!({ "pass": pass, "claims": list }), if pass { 0 } else { 3 }))
}

fn with_schema(command: &str, doc: Value) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!(command));
    if let Value::Object(rest) = doc {
        map.extend(rest);
    }
    Value::Object(map)
}

fn write_doc(doc: &Value, format: Option<Format>) {
    let text = if format == Some(Format::Pretty) {
        serde_json::to_string_pretty(doc)
    } else {
        serde_json::to_string(doc)
    }
    .expect("JSON serialization");
    // stdout may be closed early (piped into `head`)
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn write_table(name: &str, table: &Table, format: Option<Format>) -> std::io::Result<()> {
    match format {
        None | Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(&table.headers)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()
        }
        Some(f) => {
            write_doc(&with_schema("table", json!({ "table": name, "data": table })), Some(f));
            Ok(())
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Domain { .. } => "domain",
        Command::Sigma { .. } => "sigma",
        Command::Eval { .. } => "eval",
        Command::Phi { .. } => "phi",
        Command::Conjugate { .. } => "conjugate",
        Command::Logconj { .. } => "logconj",
        Command::Boxconj { .. } => "boxconj",
        Command::Fit { .. } => "fit",
        Command::Witness { .. } => "witness",
        Command::Attain { .. } => "attain",
        Command::Verify { .. } => "verify",
        Command::Table { .. } => "table",
        Command::Enumerate { .. } => "enumerate",
        Command::Primal { .. } => "primal",
        Command::Gradcheck { .. } => "gradcheck",
        Command::Fy { .. } => "fy",
        Command::Altgrad { .. } => "altgrad",
        Command::Box { .. } => "box",
    }
}

fn table_name(c: &Command) -> &'static str {
    match c {
        Command::Table { name: TableName::Example1, .. } => "example1",
        Command::Table { name: TableName::Example2, .. } => "example2",
        _ => "box",
    }
}

fn config(cli: &Cli) -> Result<Config, Failure> {
    let max_terms = match cli.max_terms {
        Some(m) => m,
        None => match std::env::var(MAX_TERMS_ENV) {
            Ok(s) => s
                .trim()
                .parse::<u64>()
                .map_err(|e| usage(format!("{MAX_TERMS_ENV}={s:?} is not a term count: {e}")))?,
            Err(_) => DEFAULT_MAX_TERMS,
        },
    };
    if max_terms < 1000 {
        return Err(usage(format!("the term budget must be at least 1000, got {max_terms}")));
    }
    if !(cli.tol > 0.0) || !cli.tol.is_finite() {
        return Err(usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    Ok(Config {
        tol: cli.tol,
        max_terms,
        seed: cli.seed,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format;
    let name = command_name(&cli.command);
    let tname = table_name(&cli.command);
    let result = config(&cli).and_then(|cfg| run(cli, &cfg));
    let code = match result {
        Ok(Output::Doc(doc, code)) => {
            write_doc(&with_schema(name, doc), format);
            code
        }
        Ok(Output::Table(t)) => match write_table(tname, &t, format) {
            Ok(()) => 0,
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
            Err(e) => {
                eprintln!("error writing table: {e}");
                1
            }
        },
        Err(f) => {
            write_doc(&with_schema(name, f.doc), format);
            f.code
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use gibbs_series::ExtReal;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_values_parse() {
        let cli = Cli::try_parse_from(["gibbs-series", "eval", "loglog", "--y", "-5", "--p", "0"]).unwrap();
        assert!(matches!(cli.command, Command::Eval { y, .. } if y == -5.0));
    }

    #[test]
    fn infinity_keeps_string_form() {
        assert_eq!(json!(ExtReal::PosInfinity), json!("+inf"));
    }
}
