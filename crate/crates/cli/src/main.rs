//! Command-line front end: presets or presentation files in, rank reports
//! and structural check summaries out.
//!
//! Exit status: 0 when every requested computation and check succeeded
//! within budget, 1 when a check failed or a budget cut the run short,
//! 2 on configuration, parse, or input errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prorank::localization::{check_laws, elem_to_json, loc_eval, parse_triples_file, RingSpec};
use prorank::presentations::GroupWord;
use prorank::quotient::{
    build_quotient, finite_quotient, hilbert_mild_flag, restricted_lie_order_oracle,
};
use prorank::rank_approx::{
    integrality_report, matrix_from_json, rank_sequence, report_csv, report_json, RankConfig,
};
use prorank::skew::build_skew;
use prorank::{Error, GroupPresentation};

#[derive(Parser)]
#[command(
    name = "prorank",
    version,
    about = "Rank approximation over group algebras of pro-p groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized matrix ranks over a chain of finite quotients
    RankApprox(RankArgs),
    /// Quotient dimensions, orders, and closed-form oracle comparisons
    QuotientInfo(InfoArgs),
    /// Sampled agreement between skew-series products and algebra products
    SkewCheck(SkewArgs),
    /// Evaluate localization triples and check the evaluation laws
    LocalizeEval(LocArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in presentation: zp2, zp3, free2, free3, mild1, mild2, flag-deep
    #[arg(long)]
    preset: Option<String>,
    /// Path to a presentation file
    #[arg(long)]
    presentation: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> anyhow::Result<GroupPresentation> {
        let text = match (&self.preset, &self.presentation) {
            (Some(name), None) => prorank::presets::preset(name)
                .with_context(|| {
                    format!(
                        "unknown preset `{name}` (available: {})",
                        prorank::presets::NAMES.join(", ")
                    )
                })?
                .to_string(),
            (None, Some(path)) => fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?,
            _ => bail!("exactly one of --preset/--presentation is required"),
        };
        Ok(GroupPresentation::parse(&text)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    source: Source,
    /// Path to a matrix file (JSON with group-word entries)
    #[arg(long)]
    matrix: PathBuf,
    /// Compute every level from 2 through this bound
    #[arg(long, conflicts_with = "k")]
    kmax: Option<u32>,
    /// Explicit comma-separated levels, each at least 2
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ambient dimension budget for the truncated algebra
    #[arg(long, default_value_t = 2_000_000)]
    max_dim: u128,
    /// Group order budget for quotient enumeration
    #[arg(long, default_value_t = 20_000)]
    max_order: usize,
    /// Worker threads for independent levels
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct InfoArgs {
    #[command(flatten)]
    source: Source,
    /// Largest level to inspect
    #[arg(long, default_value_t = 5)]
    kmax: u32,
    #[arg(long, default_value_t = 2_000_000)]
    max_dim: u128,
    #[arg(long, default_value_t = 20_000)]
    max_order: usize,
}

#[derive(Args)]
struct SkewArgs {
    #[command(flatten)]
    source: Source,
    /// Truncation level for the decomposition
    #[arg(long, default_value_t = 5)]
    kmax: u32,
    /// Number of random product pairs to test
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 2_000_000)]
    max_dim: u128,
}

#[derive(Args)]
struct LocArgs {
    /// Path to a triples file (JSON: base ring plus a list of triples)
    #[arg(long)]
    triples: PathBuf,
    /// Target ring as inline JSON, e.g. {"kind":"fp-poly","p":2,"m":2};
    /// defaults to the file's base ring
    #[arg(long)]
    target: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::RankApprox(args) => cmd_rank_approx(&args),
        Command::QuotientInfo(args) => cmd_quotient_info(&args),
        Command::SkewCheck(args) => cmd_skew_check(&args),
        Command::LocalizeEval(args) => cmd_localize_eval(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            // Budget overruns are partial results, everything else is misuse.
            let budget = e.downcast_ref::<Error>().is_some_and(|e| {
                matches!(
                    e,
                    Error::DimBudget { .. } | Error::OrderBudget { .. } | Error::CutoffTooLarge(_)
                )
            });
            ExitCode::from(if budget { 1 } else { 2 })
        }
    }
}

fn level_list(kmax: Option<u32>, k: &Option<Vec<u32>>) -> anyhow::Result<Vec<u32>> {
    let mut list = match (kmax, k) {
        (Some(kmax), None) => {
            if kmax < 2 {
                bail!("--kmax must be at least 2");
            }
            (2..=kmax).collect()
        }
        (None, Some(list)) => list.clone(),
        _ => bail!("exactly one of --kmax/--k is required"),
    };
    if list.iter().any(|&k| k < 2) {
        bail!("levels must be at least 2");
    }
    list.sort_unstable();
    list.dedup();
    Ok(list)
}

fn cmd_rank_approx(args: &RankArgs) -> anyhow::Result<u8> {
    let pres = args.source.load()?;
    let text = fs::read_to_string(&args.matrix)
        .with_context(|| format!("cannot read {}", args.matrix.display()))?;
    let matrix = matrix_from_json(&text, &pres)?;
    let k_list = level_list(args.kmax, &args.k)?;
    let cfg = RankConfig { max_dim: args.max_dim, max_order: args.max_order, jobs: args.jobs };
    let report = rank_sequence(&pres, &matrix, &k_list, &cfg)?;

    let rendered = match args.format {
        Format::Csv => report_csv(&report),
        Format::Json => report_json(&report),
    };
    match &args.out {
        Some(path) => fs::write(path, &rendered)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{rendered}"),
    }

    let threshold = BigRational::new(BigInt::from(1), BigInt::from(8));
    if let Some(summary) = integrality_report(&report, &threshold) {
        eprintln!(
            "final value {} at k={}, nearest integer {}, gap {}",
            report.levels.last().map(|l| l.value.to_string()).unwrap_or_default(),
            report.levels.last().map(|l| l.k).unwrap_or_default(),
            summary.nearest,
            summary.final_gap,
        );
        eprintln!(
            "gaps strictly decreasing: {}",
            if summary.strictly_decreasing { "yes" } else { "no" }
        );
    }
    if let Some(t) = &report.truncated {
        eprintln!("truncated at k={}: {}", t.k, t.reason);
        return Ok(1);
    }
    Ok(0)
}

fn cmd_quotient_info(args: &InfoArgs) -> anyhow::Result<u8> {
    let pres = args.source.load()?;
    if args.kmax < 2 {
        bail!("--kmax must be at least 2");
    }
    let info = pres.validate_flag();
    println!("p = {}", pres.p);
    println!("generators: {}", pres.generators.join(", "));
    println!(
        "flag: {}, mild: {}",
        if info.is_flag { "yes" } else { "no" },
        if info.is_mild { "yes" } else { "no" }
    );

    let mut mismatches = 0usize;
    let mut orders = Vec::new();
    let mut top_dims = Vec::new();
    for k in 2..=args.kmax {
        let alg = build_quotient(&pres, k, args.max_dim)?;
        let fq = finite_quotient(&alg, args.max_order)?;
        println!("k={k}: algebra dim {}, quotient order {}", alg.dim(), fq.order());
        orders.push(fq.order());
        if k == args.kmax {
            top_dims = alg.graded_dims();
        }
    }
    println!(
        "graded dims at k={}: {}",
        args.kmax,
        top_dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
    );

    match hilbert_mild_flag(&info, args.kmax as usize) {
        Ok(predicted) => {
            let got: Vec<u128> = top_dims.iter().map(|&d| d as u128).collect();
            if got == predicted {
                println!("series oracle: match");
            } else {
                println!("series oracle: MISMATCH (predicted {predicted:?}, got {got:?})");
                mismatches += 1;
            }
        }
        Err(Error::NotMild | Error::NotFlag) => println!("series oracle: skipped (not mild)"),
        Err(e) => return Err(e.into()),
    }

    if pres.relators.is_empty() {
        let d = pres.ngens() as u64;
        let mut ok = true;
        for (i, &order) in orders.iter().enumerate() {
            let k = i as u32 + 2;
            let predicted = restricted_lie_order_oracle(d, pres.p as u64, k);
            if order as u128 != predicted {
                println!("order oracle: MISMATCH at k={k} (predicted {predicted}, got {order})");
                ok = false;
                mismatches += 1;
            }
        }
        if ok {
            println!("order oracle: match");
        }
    } else {
        println!("order oracle: skipped (not free)");
    }

    Ok(if mismatches > 0 { 1 } else { 0 })
}

fn cmd_skew_check(args: &SkewArgs) -> anyhow::Result<u8> {
    let pres = args.source.load()?;
    let info = pres.validate_flag();
    let alg = build_quotient(&pres, args.kmax, args.max_dim)?;
    let sk = build_skew(alg, &info)?;
    let alg = sk.alg();

    let mut pairs: Vec<(prorank::fplinalg::FpVec, prorank::fplinalg::FpVec)> = Vec::new();
    let st = info.structure()?;
    let g = alg.word_image(&GroupWord::generator(st.distinguished))?;
    let other = st.kernel_generators.first().copied().unwrap_or(st.distinguished);
    let x = alg.word_image(&GroupWord::generator(other))?;
    pairs.push((g.clone(), x.clone()));
    pairs.push((x, g));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    while pairs.len() < args.samples.max(2) {
        pairs.push((sk.random_element(&mut rng), sk.random_element(&mut rng)));
    }

    for (i, (u, v)) in pairs.iter().enumerate() {
        let product = sk.from_skew(&sk.skew_mul(&sk.to_skew(u)?, &sk.to_skew(v)?));
        let expected = alg.mul(u, v);
        if product != expected {
            let ctx = alg.ctx();
            println!("skew check: FAIL at pair {i}");
            println!("  u = {}", alg.to_poly(u).to_text(ctx));
            println!("  v = {}", alg.to_poly(v).to_text(ctx));
            println!("  skew product    = {}", alg.to_poly(&product).to_text(ctx));
            println!("  algebra product = {}", alg.to_poly(&expected).to_text(ctx));
            return Ok(1);
        }
    }
    println!("skew check: pass ({} products at k={})", pairs.len(), args.kmax);
    Ok(0)
}

fn cmd_localize_eval(args: &LocArgs) -> anyhow::Result<u8> {
    let text = fs::read_to_string(&args.triples)
        .with_context(|| format!("cannot read {}", args.triples.display()))?;
    let (ring, triples) = parse_triples_file(&text)?;
    let target: RingSpec = match &args.target {
        Some(spec) => {
            let t: RingSpec = serde_json::from_str(spec).context("bad --target spec")?;
            t.validate()?;
            t
        }
        None => ring.clone(),
    };

    let values: Vec<serde_json::Value> = triples
        .iter()
        .enumerate()
        .map(|(i, t)| match loc_eval(t, &ring, &target) {
            Ok(e) => serde_json::json!({ "index": i, "value": elem_to_json(&e) }),
            Err(e) => serde_json::json!({ "index": i, "error": e.to_string() }),
        })
        .collect();
    let laws = check_laws(&ring, &triples, &target, 0)?;
    let doc = serde_json::json!({
        "ring": ring,
        "target": target,
        "values": values,
        "laws": {
            "pairs": laws.pairs,
            "transforms": laws.transforms,
            "add_failures": laws.add_failures,
            "mul_failures": laws.mul_failures,
            "transform_failures": laws.transform_failures,
            "skipped": laws.skipped,
            "all_passed": laws.all_passed(),
        },
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(if laws.all_passed() { 0 } else { 1 })
}
