//! `symcanon`: classify symmetric tensors over F_p from the command line.
//!
//! Exit codes: 0 success, 1 a computed result disagrees with a published
//! table, 2 invalid input or missing fixture, 3 budget exceeded, 4 no
//! symmetric decomposition exists.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use symcanon::forms::coefficient_kernel_dimension;
use symcanon::report::percent;
use symcanon::{
    classify, general_rank_strata, symmetric_rank_strata, verify_against_paper, with_threads, Audit, Budget, Error,
    FieldSpec, FixtureSource, Format, Gl2, Rank, RankStratification, ReportDocument, SymTensor, Tensor,
};

#[derive(Parser, Debug)]
#[command(
    name = "symcanon",
    version,
    about = "Rank strata and GL2 orbits of symmetric tensors over F_p"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Field characteristic (prime).
    #[arg(long, global = true)]
    p: Option<u32>,

    /// Tensor order k (3 or 4). Inferred from --tensor when omitted.
    #[arg(long, short = 'k', global = true)]
    order: Option<usize>,

    /// Tensor literal: 2^k flattened residues, or `c:` and k+1 compact ones.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tensor: Option<String>,

    /// Output format: json, csv, md or tex.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the parallel phases.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Largest number of tensor codes a search may allocate.
    #[arg(long, global = true, env = "SYMCANON_BUDGET")]
    budget: Option<u64>,

    /// Directory of published tables; the built-in copies are used otherwise.
    #[arg(long, global = true, env = "SYMCANON_FIXTURES")]
    fixtures: Option<PathBuf>,

    /// Include wall-clock timings in reports.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify every symmetric tensor of the given order into orbits.
    Classify,
    /// Symmetric rank of --tensor.
    Rank,
    /// Canonical form of --tensor.
    Canon,
    /// Orbit of --tensor under the diagonal GL2 action.
    Orbit {
        /// List every orbit member.
        #[arg(long)]
        members: bool,
    },
    /// Minimal decomposition of --tensor into k-th powers.
    Decompose,
    /// Stabilizer size of --tensor.
    Stabilizer,
    /// Compare a computed classification with the published table.
    VerifyPaper,
    /// Stratum sizes and related counts.
    Stats {
        /// Also compute general (non-symmetric) rank strata.
        #[arg(long)]
        general: bool,
    },
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => 3,
            Error::Undecomposable(_) => 4,
            Error::Invariant(_) => 1,
            _ => 2,
        };
        Failure { code, err: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        match err.downcast::<Error>() {
            Ok(e) => e.into(),
            Err(err) => Failure { code: 2, err },
        }
    }
}

/// Text to emit and the exit code to finish with.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => match write_output(&cli, &outcome.text) {
            Ok(()) => ExitCode::from(outcome.code),
            Err(f) => report_failure(f),
        },
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> ExitCode {
    eprintln!("error: {:#}", f.err);
    ExitCode::from(f.code)
}

fn write_output(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(|err| Failure { code: 2, err }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match cli.threads {
        Some(0) => Err(Failure {
            code: 2,
            err: anyhow::anyhow!("--threads must be at least 1"),
        }),
        Some(n) => with_threads(n, || dispatch(cli))?,
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Classify => cmd_classify(cli),
        Command::Rank => cmd_rank(cli),
        Command::Canon => cmd_canon(cli),
        Command::Orbit { members } => cmd_orbit(cli, *members),
        Command::Decompose => cmd_decompose(cli),
        Command::Stabilizer => cmd_stabilizer(cli),
        Command::VerifyPaper => cmd_verify_paper(cli),
        Command::Stats { general } => cmd_stats(cli, *general),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        err: anyhow::anyhow!(msg.into()),
    }
}

fn field(cli: &Cli) -> Result<FieldSpec, Failure> {
    let p = cli.p.ok_or_else(|| usage("--p is required"))?;
    Ok(FieldSpec::new(p)?)
}

fn check_order(k: usize) -> Result<usize, Failure> {
    match k {
        3 | 4 => Ok(k),
        _ => Err(Error::UnsupportedOrder(k).into()),
    }
}

fn order(cli: &Cli) -> Result<usize, Failure> {
    check_order(cli.order.ok_or_else(|| usage("--order is required"))?)
}

fn budget(cli: &Cli) -> Budget {
    cli.budget.map(Budget).unwrap_or_default()
}

fn format(cli: &Cli) -> Result<Option<Format>, Failure> {
    Ok(cli.format.as_deref().map(str::parse).transpose()?)
}

/// Parses --tensor and checks it is symmetric.
fn tensor(cli: &Cli) -> Result<SymTensor, Failure> {
    let field = field(cli)?;
    let text = cli.tensor.as_deref().ok_or_else(|| usage("--tensor is required"))?;
    if let Some(k) = cli.order {
        check_order(k)?;
    }
    let x = symcanon::parse_literal(text, field, cli.order)?;
    check_order(x.order())?;
    Ok(SymTensor::try_from(x)?)
}

fn strata_for(cli: &Cli, x: &SymTensor) -> Result<RankStratification, Failure> {
    Ok(symmetric_rank_strata(x.field(), x.order(), budget(cli))?)
}

fn cmd_classify(cli: &Cli) -> Result<Outcome, Failure> {
    let field = field(cli)?;
    let k = order(cli)?;
    let format = format(cli)?.unwrap_or(Format::Structured);
    let report = classify(field, k, budget(cli))?;
    Ok(Outcome::ok(
        ReportDocument::from_report(&report, cli.timing).emit(format),
    ))
}

fn cmd_rank(cli: &Cli) -> Result<Outcome, Failure> {
    let x = tensor(cli)?;
    let strata = strata_for(cli, &x)?;
    match strata.rank_of(&x)? {
        Rank::Finite(r) => Ok(Outcome::ok(format!("{r}\n"))),
        Rank::Undecomposable => Err(Error::Undecomposable(x.field().p()).into()),
    }
}

fn cmd_canon(cli: &Cli) -> Result<Outcome, Failure> {
    let x = tensor(cli)?;
    let canon = Gl2::new(x.field()).canonical_form(&x)?;
    Ok(Outcome::ok(format!("{}\n", canon.to_literal())))
}

fn cmd_orbit(cli: &Cli, members: bool) -> Result<Outcome, Failure> {
    let x = tensor(cli)?;
    let group = Gl2::new(x.field());
    let orbit = group.orbit(&x)?;
    let canon = SymTensor::decode(orbit.canonical(), x.field(), x.order())?;
    let mut out = String::new();
    writeln!(out, "canonical: {}", canon.to_literal()).unwrap();
    writeln!(out, "orbit size: {}", orbit.size()).unwrap();
    writeln!(out, "stabilizer size: {}", orbit.stabilizer_size()).unwrap();
    if members {
        for &code in orbit.members() {
            writeln!(out, "{}", Tensor::decode(code, x.field(), x.order())?.to_literal()).unwrap();
        }
    }
    Ok(Outcome::ok(out))
}

fn cmd_decompose(cli: &Cli) -> Result<Outcome, Failure> {
    let x = tensor(cli)?;
    let strata = strata_for(cli, &x)?;
    let witness = strata.decompose(&x)?;
    let resum = witness.evaluate(x.field(), x.order())?;
    let mut out = String::new();
    writeln!(out, "rank: {}", witness.vectors.len()).unwrap();
    for (i, v) in witness.vectors.iter().enumerate() {
        writeln!(out, "v{} = ({}, {})", i + 1, v[0], v[1]).unwrap();
    }
    if resum != x {
        return Err(Error::Invariant(format!("witness re-sums to {}", resum.to_literal())).into());
    }
    writeln!(
        out,
        "check: sum of v_i^{} = {} (matches input)",
        x.order(),
        resum.to_literal()
    )
    .unwrap();
    Ok(Outcome::ok(out))
}

fn cmd_stabilizer(cli: &Cli) -> Result<Outcome, Failure> {
    let x = tensor(cli)?;
    let size = Gl2::new(x.field()).stabilizer_size(&x)?;
    Ok(Outcome::ok(format!("{size}\n")))
}

fn cmd_verify_paper(cli: &Cli) -> Result<Outcome, Failure> {
    let field = field(cli)?;
    let k = order(cli)?;
    let source = match &cli.fixtures {
        Some(dir) => FixtureSource::Directory(dir.clone()),
        None => FixtureSource::Embedded,
    };
    let fixture = source.load(field.p(), k)?;
    let report = classify(field, k, budget(cli))?;
    let audit = verify_against_paper(&report, &fixture)?;
    let code = if audit.has_mismatch() { 1 } else { 0 };
    let text = match format(cli)? {
        Some(fmt) => ReportDocument::from_report(&report, cli.timing)
            .with_audit(&audit)
            .emit(fmt),
        None => audit_text(&audit),
    };
    Ok(Outcome { text, code })
}

fn audit_text(audit: &Audit) -> String {
    let mut out = String::new();
    writeln!(out, "{} (p={}, k={})", audit.fixture, audit.p, audit.k).unwrap();
    if audit.discrepancies.is_empty() {
        writeln!(out, "no discrepancies").unwrap();
    }
    for d in &audit.discrepancies {
        write!(
            out,
            "{} {} {}: printed {} computed {}",
            d.classification, d.reference, d.kind, d.printed, d.computed
        )
        .unwrap();
        if let Some(id) = &d.errata_id {
            write!(out, " [{id}]").unwrap();
        }
        writeln!(out).unwrap();
    }
    for fault in &audit.faults {
        writeln!(out, "note: {} {}", fault.reference, fault.reason).unwrap();
    }
    for stale in &audit.stale_errata {
        writeln!(out, "warning: unconfirmed errata note {stale}").unwrap();
    }
    let errata = audit.suspected_errata();
    writeln!(
        out,
        "{} suspected errata, {} mismatches",
        errata.len(),
        audit
            .discrepancies
            .iter()
            .filter(|d| d.classification == symcanon::Classification::Mismatch)
            .count()
    )
    .unwrap();
    out
}

fn cmd_stats(cli: &Cli, general: bool) -> Result<Outcome, Failure> {
    let field = field(cli)?;
    let k = order(cli)?;
    let budget = budget(cli);
    let strata = symmetric_rank_strata(field, k, budget)?;
    let report = classify(field, k, budget)?;
    let total = strata.total();
    let mut out = String::new();
    writeln!(
        out,
        "F_{} order {}: {} symmetric tensors, |GL2| = {}",
        field.p(),
        k,
        total,
        field.gl2_order()
    )
    .unwrap();
    writeln!(out, "symmetric rank strata:").unwrap();
    for (r, &n) in strata.stratum_sizes().iter().enumerate() {
        writeln!(out, "  rank {r}: {n} ({}%)", percent(n, total)).unwrap();
    }
    if strata.undecomposable_count() > 0 {
        let n = strata.undecomposable_count();
        writeln!(out, "  undecomposable: {n} ({}%)", percent(n, total)).unwrap();
    }
    writeln!(out, "max symmetric rank: {}", strata.max_rank()).unwrap();
    writeln!(
        out,
        "orbits: {} ranked, {} undecomposable",
        report.orbit_count(),
        report.undecomposable_records.len()
    )
    .unwrap();
    let lost = coefficient_kernel_dimension(field, k);
    writeln!(out, "binary-form coefficients vanishing mod p: {lost}").unwrap();
    if general {
        let g = general_rank_strata(field, k, budget)?;
        writeln!(out, "general rank strata ({} tensors):", g.total()).unwrap();
        for (r, &n) in g.stratum_sizes().iter().enumerate() {
            writeln!(out, "  rank {r}: {n}").unwrap();
        }
        if g.undecomposable_count() > 0 {
            writeln!(out, "  unreached: {}", g.undecomposable_count()).unwrap();
        }
    }
    Ok(Outcome::ok(out))
}
