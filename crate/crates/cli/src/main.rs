//! `flcount`: verify, sweep, generate and cross-check counting instances.
//!
//! Exit codes: 0 pass, 1 mathematical failure, 2 usage or input error,
//! 3 enumeration budget exceeded.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use flcount::group::rand_group_instance;
use flcount::instance::{run_oracles, Instance, InstanceFile, Mode, VerdictReport, SCHEMA_VERSION};
use flcount::local_field::{prime_power, ExtKind, FieldDesc};
use flcount::submodules::Budget;
use flcount::verify::{rand_s_n_matrix, sample_pair, Verdict, VerifyOptions};
use flcount::Error;

#[derive(Parser)]
#[command(name = "flcount", version, about = "Exact lattice counts for the Jacquet-Rallis fundamental lemma")]
struct Cli {
    /// Fixed working precision instead of the automatic choice.
    #[arg(long, global = true)]
    precision: Option<i64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify one instance file and print its verdict.
    Verify { instance: PathBuf },
    /// Verify a seeded batch and write one CSV row per instance.
    Sweep(SweepArgs),
    /// Write seeded instance files.
    Gen(GenArgs),
    /// Cross-check an instance against every applicable oracle.
    Oracle { instance: PathBuf },
    /// Summarize a sweep CSV.
    Report { csv: PathBuf },
}

#[derive(Args, Clone)]
struct Family {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    ext: ExtKind,
    /// Upper bound for val Δ.
    #[arg(long)]
    max_val: u32,
    #[arg(long)]
    count: u64,
    /// First instance seed; instance i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "lie")]
    mode: ModeArg,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Lie,
    Group,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lie => Mode::Lie,
            ModeArg::Group => Mode::Group,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    family: Family,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    family: Family,
    /// Directory for the instance files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Sample a matrix in s_n and keep it in the file (Lie mode, n ≥ 2).
    #[arg(long)]
    with_matrix: bool,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::BudgetExceeded { .. }) { 3 } else { 2 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = VerifyOptions {
        budget: Budget::from_env(),
        precision: cli.precision,
    };
    let result = match cli.cmd {
        Cmd::Verify { instance } => verify(&instance, &opts),
        Cmd::Sweep(args) => sweep(&args, &opts),
        Cmd::Gen(args) => gen(&args),
        Cmd::Oracle { instance } => oracle(&instance, &opts),
        Cmd::Report { csv } => report(&csv),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(InstanceFile::from_json(&text)?.load()?)
}

fn verify(path: &Path, opts: &VerifyOptions) -> Result<u8, Failure> {
    let inst = load(path)?;
    let verdict = inst.verify(opts)?;
    let pass = verdict.pass;
    let doc = VerdictReport::new(inst.mode, verdict);
    println!("{}", serde_json::to_string_pretty(&doc).expect("verdict serializes"));
    Ok(if pass { 0 } else { 1 })
}

fn oracle(path: &Path, opts: &VerifyOptions) -> Result<u8, Failure> {
    let inst = load(path)?;
    let report = run_oracles(&inst, opts)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(if report.all_agree() && report.verdict.pass { 0 } else { 1 })
}

fn field(f: &Family) -> Result<FieldDesc, Failure> {
    let (p, m) = prime_power(f.q as u64).ok_or_else(|| usage(format!("q = {} is not a prime power", f.q)))?;
    Ok(FieldDesc::new(p, m, f.ext)?)
}

fn sample(f: &Family, desc: &FieldDesc, seed: u64, with_matrix: bool) -> Result<Instance, Error> {
    match Mode::from(f.mode) {
        Mode::Group => {
            let (_, pair) = rand_group_instance(f.n, desc, f.max_val, seed)?;
            Ok(Instance {
                mode: Mode::Group,
                pair,
                matrix: None,
                seed: Some(seed),
            })
        }
        Mode::Lie if with_matrix && f.n >= 2 => {
            let a = rand_s_n_matrix(f.n, desc, f.max_val, seed)?;
            Ok(Instance::from_matrix(desc, a, Mode::Lie, Some(seed)))
        }
        Mode::Lie => Ok(Instance {
            mode: Mode::Lie,
            pair: sample_pair(f.n, desc, f.max_val, seed)?,
            matrix: None,
            seed: Some(seed),
        }),
    }
}

fn gen(args: &GenArgs) -> Result<u8, Failure> {
    let f = &args.family;
    let desc = field(f)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| usage(format!("{}: {e}", args.out_dir.display())))?;
    for i in 0..f.count {
        let seed = f.seed + i;
        let inst = sample(f, &desc, seed, args.with_matrix)?;
        let name = format!("{}_n{}_q{}_{}_{seed}.json", Mode::from(f.mode), f.n, f.q, f.ext);
        let path = args.out_dir.join(name);
        fs::write(&path, inst.to_file().to_json() + "\n")
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(0)
}

#[derive(Clone, Debug)]
struct Row {
    seed: u64,
    n: usize,
    q: u32,
    ext: ExtKind,
    v: i64,
    eta_delta: i8,
    m: Vec<u64>,
    signed_sum: i64,
    selfdual: u64,
    pass: bool,
    wall_ms: u64,
}

impl Row {
    fn new(f: &Family, seed: u64, v: &Verdict) -> Self {
        Row {
            seed,
            n: f.n,
            q: f.q,
            ext: f.ext,
            v: v.v,
            eta_delta: v.eta_delta,
            m: v.m.clone(),
            signed_sum: v.signed_sum,
            selfdual: v.selfdual,
            pass: v.pass,
            wall_ms: v.wall_ms,
        }
    }
}

fn header(width: usize) -> Vec<String> {
    let mut h: Vec<String> = ["seed", "n", "q", "ext", "v", "eta_delta"].map(String::from).to_vec();
    h.extend((0..width).map(|i| format!("m_{i}")));
    h.extend(["signed_sum", "N", "pass", "wall_ms"].map(String::from));
    h
}

fn record(r: &Row, width: usize) -> Vec<String> {
    let mut out = vec![
        r.seed.to_string(),
        r.n.to_string(),
        r.q.to_string(),
        r.ext.to_string(),
        r.v.to_string(),
        r.eta_delta.to_string(),
    ];
    out.extend((0..width).map(|i| r.m.get(i).map(u64::to_string).unwrap_or_default()));
    out.extend([r.signed_sum.to_string(), r.selfdual.to_string(), r.pass.to_string(), r.wall_ms.to_string()]);
    out
}

fn sweep(args: &SweepArgs, opts: &VerifyOptions) -> Result<u8, Failure> {
    let f = &args.family;
    let desc = field(f)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| usage(e.to_string()))?;
    let results: Vec<Result<Row, Error>> = pool.install(|| {
        (0..f.count)
            .into_par_iter()
            .map(|i| {
                let seed = f.seed + i;
                let inst = sample(f, &desc, seed, false)?;
                let verdict = inst.verify(opts)?;
                Ok(Row::new(f, seed, &verdict))
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    rows.sort_by_key(|r| r.seed);
    let width = rows.iter().map(|r| r.m.len()).max().unwrap_or(1).max(f.max_val as usize + 1);
    let sink: Box<dyn std::io::Write> = match &args.out {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| usage(e.to_string());
    w.write_record(header(width)).map_err(io)?;
    for r in &rows {
        w.write_record(record(r, width)).map_err(io)?;
    }
    w.flush().map_err(|e| usage(e.to_string()))?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} instances, {failed} failed", rows.len());
    Ok(if failed == 0 { 0 } else { 1 })
}

#[derive(Default, Serialize)]
struct Group {
    instances: u64,
    passed: u64,
    v_histogram: BTreeMap<i64, u64>,
    n_histogram: BTreeMap<u64, u64>,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    instances: u64,
    passed: u64,
    pass_rate: f64,
    by_family: BTreeMap<String, Group>,
}

fn report(path: &Path) -> Result<u8, Failure> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| usage(e.to_string()))?.clone();
    let col = |name: &str| -> Result<usize, Failure> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| usage(format!("missing column {name}")))
    };
    let (cn, cq, ce, cv, cnn, cp) = (col("n")?, col("q")?, col("ext")?, col("v")?, col("N")?, col("pass")?);
    let mut by_family: BTreeMap<String, Group> = BTreeMap::new();
    let (mut total, mut passed) = (0u64, 0u64);
    for rec in reader.records() {
        let rec = rec.map_err(|e| usage(e.to_string()))?;
        let parse = |i: usize| -> Result<i64, Failure> {
            rec[i].parse().map_err(|_| usage(format!("bad value {:?} in column {}", &rec[i], &headers[i])))
        };
        let key = format!("n={} q={} {}", &rec[cn], &rec[cq], &rec[ce]);
        let g = by_family.entry(key).or_default();
        let ok = &rec[cp] == "true";
        g.instances += 1;
        g.passed += ok as u64;
        *g.v_histogram.entry(parse(cv)?).or_default() += 1;
        *g.n_histogram.entry(parse(cnn)? as u64).or_default() += 1;
        total += 1;
        passed += ok as u64;
    }
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        instances: total,
        passed,
        pass_rate: if total == 0 { 0.0 } else { passed as f64 / total as f64 },
        by_family,
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(if passed == total { 0 } else { 1 })
}
