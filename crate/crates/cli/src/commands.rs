//! The count, oracle, sample and estimate subcommands.

use std::io::{BufRead, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use egcount::counts::{
    count_cdags, count_dags, count_edags, exact_cdag_dag_ratio, EdagCountProvider, ExactRatio,
};
use egcount::estimate::{estimate_with, standard_errors, with_approx_counts, EstimatorOptions};
use egcount::mcmc::{run_ensemble, ChainConfig, SampleRecord, MAX_CHAIN_NODES};
use egcount::oracle;

use crate::manifest::{now, sidecar_path, RunManifest};
use crate::Failure;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum CountWhat {
    Dags,
    Cdags,
    Edags,
    /// Exact #CDAGs/#DAGs column for 2..=N
    Table,
}

#[derive(Args)]
pub struct CountArgs {
    /// Node count (at most 64)
    #[arg(long)]
    nodes: usize,
    #[arg(long, value_enum)]
    what: CountWhat,
    /// CSV of essential-DAG counts ("n,count") for nodes beyond the census cap
    #[arg(long)]
    edag_table: Option<PathBuf>,
    /// Decimal places for ratio output
    #[arg(long, default_value_t = 5)]
    places: usize,
}

fn edag_provider(path: &Option<PathBuf>) -> Result<EdagCountProvider, Failure> {
    match path {
        Some(p) => Ok(EdagCountProvider::from_csv_path(p)?),
        None => Ok(EdagCountProvider::Oracle),
    }
}

pub fn count(args: CountArgs) -> Result<(), Failure> {
    if args.nodes == 0 || args.nodes > 64 {
        return Err(Failure::Usage(format!(
            "node count {} outside 1..=64",
            args.nodes
        )));
    }
    match args.what {
        CountWhat::Dags => println!("{}", count_dags(args.nodes)),
        CountWhat::Cdags => println!("{}", count_cdags(args.nodes)?),
        CountWhat::Edags => {
            let provider = edag_provider(&args.edag_table)?;
            let count = count_edags(args.nodes, &provider).map_err(|e| match e {
                egcount::Error::NotCovered(n) => Failure::Usage(format!(
                    "no essential-DAG count for n={n}; supply one with --edag-table"
                )),
                other => other.into(),
            })?;
            println!("{count}");
        }
        CountWhat::Table => {
            if args.nodes < 2 {
                return Err(Failure::Usage("table needs --nodes >= 2".into()));
            }
            println!("NODES  #CDAGs/#DAGs");
            for n in 2..=args.nodes {
                println!(
                    "{n:>5}  {}",
                    exact_cdag_dag_ratio(n)?.to_decimal(args.places)
                );
            }
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct OracleArgs {
    /// Node count (at most 5; the census enumerates every DAG)
    #[arg(long)]
    nodes: usize,
    /// Also write the census as JSON to this path
    #[arg(long)]
    json: Option<PathBuf>,
}

pub fn oracle(args: OracleArgs) -> Result<(), Failure> {
    let census = oracle::census(args.nodes)?;
    let ratio = |a: u64, b: u64| ExactRatio::new(BigUint::from(a), BigUint::from(b)).to_decimal(5);
    println!("nodes              {}", census.n);
    println!("#DAGs              {}", census.n_dags);
    println!("#CDAGs             {}", census.n_cdags);
    println!("#EGs               {}", census.n_egs);
    println!("#CEGs              {}", census.n_cegs);
    println!("#EDAGs             {}", census.n_edags);
    println!("#EGs/#DAGs         {}", ratio(census.n_egs, census.n_dags));
    println!("#EDAGs/#EGs        {}", ratio(census.n_edags, census.n_egs));
    println!("#CDAGs/#DAGs       {}", ratio(census.n_cdags, census.n_dags));
    println!("#CEGs/#EGs         {}", ratio(census.n_cegs, census.n_egs));
    println!("#CEGs/#CDAGs       {}", ratio(census.n_cegs, census.n_cdags));
    print!("class sizes        ");
    let hist: Vec<String> = census
        .class_size_histogram
        .iter()
        .map(|(size, count)| format!("{size}:{count}"))
        .collect();
    println!("{}", hist.join(" "));
    if let Some(path) = args.json {
        std::fs::write(&path, serde_json::to_string_pretty(&census).unwrap())?;
    }
    Ok(())
}

#[derive(Args)]
pub struct SampleArgs {
    /// Node count (at most 40)
    #[arg(long)]
    nodes: usize,
    /// Independent chains, one terminal sample each
    #[arg(long, required_unless_present = "paper_preset")]
    chains: Option<u64>,
    /// Transitions per chain
    #[arg(long, required_unless_present = "paper_preset")]
    steps: Option<u64>,
    /// Master seed; chain seeds derive from it deterministically
    #[arg(long)]
    seed: u64,
    /// Output JSONL path (stdout when absent; the manifest sidecar is only
    /// written next to a file)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record each terminal state's canonical key (base64) in the records
    #[arg(long)]
    emit_graphs: bool,
    /// Published protocol: 10^4 chains of 10^6 transitions, doubled to
    /// 2*10^6 transitions at 31 nodes
    #[arg(long, conflicts_with_all = ["chains", "steps"])]
    paper_preset: bool,
}

/// Chains and steps under the published protocol for `n` nodes.
pub fn paper_preset(n: usize) -> (u64, u64) {
    let steps = if n == 31 { 2_000_000 } else { 1_000_000 };
    (10_000, steps)
}

pub fn sample(args: SampleArgs) -> Result<(), Failure> {
    if args.nodes == 0 || args.nodes > MAX_CHAIN_NODES {
        return Err(Failure::Usage(format!(
            "node count {} outside 1..={MAX_CHAIN_NODES}",
            args.nodes
        )));
    }
    let (chains, steps) = if args.paper_preset {
        paper_preset(args.nodes)
    } else {
        (args.chains.unwrap(), args.steps.unwrap())
    };
    let cfg = ChainConfig {
        n: args.nodes,
        steps,
        chains,
        seed: args.seed,
        record_graphs: args.emit_graphs,
    };
    cfg.validate()?;

    let manifest_path = args.out.as_deref().map(sidecar_path);
    let mut manifest = RunManifest::new(&cfg);
    if let Some(path) = &manifest_path {
        manifest.write(path)?;
    }

    let records = run_ensemble(&cfg)?;

    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            let mut w = BufWriter::new(file);
            for rec in &records {
                serde_json::to_writer(&mut w, rec).map_err(|e| Failure::Io(e.to_string()))?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            for rec in &records {
                serde_json::to_writer(&mut w, rec).map_err(|e| Failure::Io(e.to_string()))?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }

    if let Some(path) = &manifest_path {
        manifest.finished_at = Some(now());
        manifest.write(path)?;
    }
    Ok(())
}


#[derive(Args)]
pub struct EstimateArgs {
    /// Sample JSONL produced by `egcount sample`
    #[arg(long = "in")]
    input: PathBuf,
    /// CSV of essential-DAG counts ("n,count"); the built-in census covers
    /// n <= 5 without it
    #[arg(long)]
    edag_table: Option<PathBuf>,
    /// Also write the full report as JSON to this path
    #[arg(long)]
    json: Option<PathBuf>,
    /// Count only connected essential DAGs in the numerator of R'
    /// (sensitivity analysis; the default follows the estimator identity)
    #[arg(long)]
    strict_connected: bool,
    /// Decimal places for printed ratios
    #[arg(long, default_value_t = 5)]
    places: usize,
}

#[derive(Serialize)]
struct ReportMetadata {
    seed: Option<u64>,
    steps: u64,
    chains: u64,
    software_version: String,
}

#[derive(Serialize)]
struct ReportDocument {
    schema_version: u32,
    metadata: ReportMetadata,
    report: egcount::estimate::EstimateReport,
}

fn read_records(path: &PathBuf) -> Result<Vec<SampleRecord>, Failure> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line)
            .map_err(|e| Failure::Usage(format!("{}:{}: bad record: {e}", path.display(), i + 1)))?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Failure::Usage(format!(
            "{}: no sample records",
            path.display()
        )));
    }
    Ok(records)
}

pub fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let records = read_records(&args.input)?;
    let n = records[0].n;
    let provider = edag_provider(&args.edag_table)?;
    let edags = count_edags(n, &provider).map_err(|e| match e {
        egcount::Error::NotCovered(n) => Failure::Usage(format!(
            "no essential-DAG count for n={n}; supply one with --edag-table"
        )),
        other => other.into(),
    })?;
    let dags = count_dags(n);
    let cdags = count_cdags(n)?;
    let options = EstimatorOptions {
        strict_connected_r_prime: args.strict_connected,
    };
    let report = estimate_with(&records, &edags, &dags, &cdags, options)?;
    let report = if report.sample_size >= 2 {
        standard_errors(&report)
    } else {
        report
    };
    let report = with_approx_counts(&report, &dags);

    let p = args.places;
    let dec = |r: &ExactRatio| r.to_decimal(p);
    let se = |v: Option<f64>| match v {
        Some(v) => format!("   se {v:.6}"),
        None => String::new(),
    };
    println!("nodes                  {n}");
    println!("sample size            {}", report.sample_size);
    println!("R   (#EDAGs/#EGs)      {:.p$}{}", report.r, se(report.se_r));
    println!("R'  (#EDAGs/#CEGs)     {:.p$}", report.r_prime);
    println!(
        "est #EGs/#DAGs         {}{}",
        dec(&report.est_eg_dag_exact),
        se(report.se_eg_dag)
    );
    println!("est #CEGs/#CDAGs       {}", dec(&report.est_ceg_cdag_exact));
    println!(
        "est #CEGs/#EGs         {}{}",
        dec(&report.est_ceg_eg_exact),
        se(report.se_ceg_eg)
    );
    println!("exact #CDAGs/#DAGs     {}", dec(&report.exact_cdag_dag));
    println!("est #EGs               {:.6e}", report.est_n_egs.unwrap());
    println!("est #CEGs              {:.6e}", report.est_n_cegs.unwrap());
    println!("mean changed fraction  {:.6}", report.mean_changed_fraction);
    if report.low_count_warning {
        eprintln!("warning: a ratio numerator is below 30; estimates are noisy");
    }

    if let Some(path) = args.json {
        let manifest = RunManifest::read(&sidecar_path(&args.input));
        let doc = ReportDocument {
            schema_version: egcount::SCHEMA_VERSION,
            metadata: ReportMetadata {
                seed: manifest.map(|m| m.master_seed),
                steps: records[0].steps,
                chains: report.sample_size,
                software_version: env!("CARGO_PKG_VERSION").to_string(),
            },
            report,
        };
        std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap())?;
    }
    Ok(())
}
