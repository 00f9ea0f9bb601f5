use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use dirand::extractor::{extract as toeplitz_extract, extractor_loss, output_length, BitString, ExtractorError, ExtractorSpec};
use dirand::geat::{
    completeness, default_beta_grid, default_nu_grid, log_grid, optimize, scan, write_rate_csv, GeatError,
    ProtocolParams, RateBreakdown,
};
use dirand::quantum::{correlation, strategy_for_class, winning_probability, GameSpec};
use dirand::sim::{
    constraint_labels, run_protocol_stream, run_trials, write_transcript_binary, Origin, SimError, TrialSummary,
};
use dirand::tradeoff::{build_min_tradeoff, load_certificate, DualCertificate, TradeoffError};
use serde_json::json;
use thiserror::Error;

use crate::{CertifyArgs, ExtractArgs, ProtocolArgs, RateArgs, SimulateArgs};

pub const SIM_CSV_SCHEMA: &str = "# di_rand_sim_csv v1";
const JSON_SCHEMA: &str = "di_rand_cli_json_v1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("nothing extractable: {0}")]
    Infeasible(String),
    #[error("{path}: {source}")]
    File { path: String, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Tradeoff(#[from] TradeoffError),
    #[error(transparent)]
    Geat(#[from] GeatError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Extractor(#[from] ExtractorError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 3,
            _ => 2,
        }
    }
}

fn file_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::File {
        path: path.display().to_string(),
        source,
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(file_err(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(file_err(path))?))
}

fn read_bits(path: &Path) -> Result<BitString, CliError> {
    let file = File::open(path).map_err(file_err(path))?;
    BitString::read_from(BufReader::new(file)).map_err(file_err(path))
}

fn load(path: &Path) -> Result<DualCertificate, CliError> {
    Ok(load_certificate(&read_file(path)?)?)
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

/// Applies the optional protocol flags on top of `base`.
fn apply(base: ProtocolParams, p: &ProtocolArgs) -> ProtocolParams {
    let mut out = base;
    if let Some(g) = p.gamma {
        out = out.with_gamma(g);
    }
    if let Some(w) = p.w_exp {
        out = out.with_w_exp(w);
    }
    if let Some(w) = p.w_tol {
        out = out.with_w_tol(w);
    }
    if let Some(e) = p.eta_z {
        out = out.with_eta_z(e);
    }
    if let Some(e) = p.eta_z_prime {
        out.eta_z_prime = e;
    }
    if let Some(e) = p.epsilon {
        out.epsilon = e;
    }
    if let Some(e) = p.epsilon_ext {
        out.epsilon_ext = e;
    }
    if let Some(d) = p.d_k {
        out.d_k = d;
    }
    out
}

pub fn certify(args: &CertifyArgs) -> Result<(), CliError> {
    let cert = load(&args.cert)?;
    let f = build_min_tradeoff(&cert);
    let nu = cert.certified_nu();
    let bound = f.eval(nu);
    let margin = cert.dual_feasibility_margin();
    if args.common.json {
        print_json(&json!({
            "schema": JSON_SCHEMA,
            "command": "certify",
            "class": cert.class.to_string(),
            "rand_type": cert.rand_type.to_string(),
            "nu": nu,
            "lambda": f.lambda,
            "c_lambda": f.c_lambda,
            "f_at_nu": bound,
            "asymptotic_rate": cert.asymptotic_rate,
            "dual_margin": margin,
        }));
        return Ok(());
    }
    println!("OK, rate bound at ν = {nu:.6}: f(ν) = {bound:.4} ≤ {:.4}", cert.asymptotic_rate);
    println!("class {}, {} randomness, m = {}", cert.class, cert.rand_type, cert.quadrature.m);
    let sign = if f.c_lambda < 0.0 { '-' } else { '+' };
    println!("f(ν) = {} ν {sign} {}", f.lambda, f.c_lambda.abs());
    println!("dual feasibility margin {margin:.3e}");
    Ok(())
}

pub fn rate(args: &RateArgs) -> Result<(), CliError> {
    let cert = load(&args.cert)?;
    let class = args.protocol.class.unwrap_or(cert.class);
    let rand = args.protocol.rand_type.unwrap_or(cert.rand_type);
    let base = apply(ProtocolParams::new(class, rand, args.n.0[0]).with_w_exp(cert.w_exp), &args.protocol);
    base.validate()?;

    let beta = args.beta_grid.as_ref().map_or_else(default_beta_grid, |g| g.0.clone());
    let nu = args.nu_grid.as_ref().map_or_else(default_nu_grid, |g| g.0.clone());
    let gamma = match (&args.gamma_grid, args.protocol.gamma) {
        (Some(g), _) => g.0.clone(),
        (None, Some(g)) => vec![g],
        (None, None) => log_grid(1e-3, 1.0, 31),
    };

    let mut best = Vec::with_capacity(args.n.0.len());
    let mut all = Vec::new();
    for &n in &args.n.0 {
        let params = base.clone().with_n(n);
        best.push(optimize(&cert, &params, &beta, &nu, &gamma)?);
        if args.heatmap.is_some() {
            all.extend(scan(&cert, &params, &beta, &nu, &gamma)?);
        }
    }
    if let Some(path) = &args.heatmap {
        write_rate_csv(create(path)?, &all).map_err(file_err(path))?;
    }

    if args.common.json {
        print_json(&json!({ "schema": JSON_SCHEMA, "command": "rate", "rows": best }));
    }
    match &args.out {
        Some(path) => write_rate_csv(create(path)?, &best).map_err(file_err(path))?,
        None if !args.common.json => write_rate_csv(io::stdout().lock(), &best)?,
        None => {}
    }
    report_rates(&best);
    Ok(())
}

fn report_rates(rows: &[RateBreakdown]) {
    for r in rows.iter().filter(|r| r.rate == 0.0) {
        log::info!("n = {}: no positive rate on the grid (best raw rate {:.4})", r.n, r.raw_rate);
    }
}

#[derive(Debug)]
struct SimSummary {
    win_rate: f64,
    test_fraction: f64,
    abort_fraction: f64,
    zero_rates: Vec<f64>,
}

fn summarize(runs: &[TrialSummary], n: u64) -> SimSummary {
    let tests: u64 = runs.iter().map(|r| r.counts.tests).sum();
    let wins: u64 = runs.iter().map(|r| r.counts.wins).sum();
    let n_zero = runs.first().map_or(0, |r| r.counts.zero_hits.len());
    let per_test = |x: u64| if tests == 0 { 0.0 } else { x as f64 / tests as f64 };
    SimSummary {
        win_rate: per_test(wins),
        test_fraction: tests as f64 / (n as f64 * runs.len() as f64),
        abort_fraction: runs.iter().filter(|r| r.verdict.is_abort()).count() as f64 / runs.len() as f64,
        zero_rates: (0..n_zero)
            .map(|j| per_test(runs.iter().map(|r| r.counts.zero_hits[j]).sum()))
            .collect(),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(SimError::NoTrials.into());
    }
    let class = args
        .protocol
        .class
        .ok_or_else(|| CliError::Usage("simulate needs --class".into()))?;
    let rand = args.protocol.rand_type.unwrap_or(dirand::RandType::Local);
    let strategy = strategy_for_class(class);
    let behavior = correlation(&strategy);
    let honest = winning_probability(&behavior, &GameSpec::chsh());
    let params = apply(ProtocolParams::new(class, rand, args.n).with_w_exp(honest), &args.protocol);

    let runs = run_trials(&behavior, &params, args.trials, args.seed)?;
    let s = summarize(&runs, args.n);
    let eps_c = completeness(&params);
    let labels = constraint_labels(class);

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(file_err(dir))?;
        write_summary_csv(&dir.join("summary.csv"), &params, args, &s, eps_c, &labels)?;
        write_trials_csv(&dir.join("trials.csv"), &runs, &labels)?;
        let first = run_protocol_stream(&behavior, &params, Origin { seed: args.seed, stream: 0 })?;
        let path = dir.join("transcript.bin");
        write_transcript_binary(create(&path)?, &first)?;
        let path = dir.join("raw_bits.bin");
        let mut out = create(&path)?;
        BitString::from_bits(&first.generation_bits()).write_to(&mut out).map_err(file_err(&path))?;
        out.flush().map_err(file_err(&path))?;
    }

    if args.common.json {
        print_json(&json!({
            "schema": JSON_SCHEMA,
            "command": "simulate",
            "params": params,
            "trials": args.trials,
            "seed": args.seed,
            "win_rate": s.win_rate,
            "test_fraction": s.test_fraction,
            "abort_fraction": s.abort_fraction,
            "epsilon_c": eps_c,
            "zero_hit_rates": labels.iter().zip(&s.zero_rates).map(|(l, r)| json!({"event": l, "rate": r})).collect::<Vec<_>>(),
        }));
    } else {
        println!("class {class}, {rand} randomness, n = {}, gamma = {}, {} trials, seed {}", args.n, params.gamma, args.trials, args.seed);
        println!("win rate {:.6} (threshold {:.6})", s.win_rate, params.w_exp - params.w_tol);
        for (l, r) in labels.iter().zip(&s.zero_rates) {
            println!("{l} rate {r:.3e} (tolerance {:.3e})", params.eta_z);
        }
        println!("abort fraction {:.4}, analytic eps_c {eps_c:.4e}", s.abort_fraction);
    }
    Ok(())
}

/// Schema line, then the zero-constraint events behind the `z{j}` columns.
fn write_preamble(out: &mut impl Write, labels: &[String]) -> io::Result<()> {
    writeln!(out, "{SIM_CSV_SCHEMA}")?;
    for (j, l) in labels.iter().enumerate() {
        writeln!(out, "# z{j}={l}")?;
    }
    Ok(())
}

fn write_summary_csv(
    path: &Path,
    params: &ProtocolParams,
    args: &SimulateArgs,
    s: &SimSummary,
    eps_c: f64,
    labels: &[String],
) -> Result<(), CliError> {
    let mut out = create(path)?;
    let mut head = vec![
        "class", "rand_type", "n", "gamma", "w_exp", "w_tol", "eta_z", "trials", "seed", "win_rate", "test_fraction",
        "abort_fraction", "epsilon_c",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    head.extend((0..labels.len()).map(|j| format!("zero_rate_z{j}")));
    let mut row = vec![
        params.class.to_string(),
        params.rand_type.to_string(),
        params.n.to_string(),
        params.gamma.to_string(),
        params.w_exp.to_string(),
        params.w_tol.to_string(),
        params.eta_z.to_string(),
        args.trials.to_string(),
        args.seed.to_string(),
        s.win_rate.to_string(),
        s.test_fraction.to_string(),
        s.abort_fraction.to_string(),
        eps_c.to_string(),
    ];
    row.extend(s.zero_rates.iter().map(f64::to_string));
    write_preamble(&mut out, labels).map_err(file_err(path))?;
    writeln!(out, "{}", head.join(",")).map_err(file_err(path))?;
    writeln!(out, "{}", row.join(",")).map_err(file_err(path))?;
    out.flush().map_err(file_err(path))
}

fn write_trials_csv(path: &Path, runs: &[TrialSummary], labels: &[String]) -> Result<(), CliError> {
    let mut out = create(path)?;
    let mut head = vec!["trial".to_string(), "tests".into(), "wins".into()];
    head.extend((0..labels.len()).map(|j| format!("hits_z{j}")));
    head.push("verdict".into());
    write_preamble(&mut out, labels).map_err(file_err(path))?;
    writeln!(out, "{}", head.join(",")).map_err(file_err(path))?;
    for r in runs {
        let mut row = vec![r.trial.to_string(), r.counts.tests.to_string(), r.counts.wins.to_string()];
        row.extend(r.counts.zero_hits.iter().map(u64::to_string));
        row.push(if r.verdict.is_abort() { "abort" } else { "pass" }.to_string());
        writeln!(out, "{}", row.join(",")).map_err(file_err(path))?;
    }
    out.flush().map_err(file_err(path))
}

pub fn extract(args: &ExtractArgs) -> Result<(), CliError> {
    let input = read_bits(&args.input)?;
    let seed = read_bits(&args.seed_file)?;
    let half = args.epsilon_ext / 2.0;
    if !(args.epsilon_ext > 0.0 && args.epsilon_ext < 1.0) {
        return Err(CliError::Usage(format!("--epsilon-ext {} outside (0, 1)", args.epsilon_ext)));
    }
    let loss = extractor_loss(half, half, 1.0)?;
    if !(args.k_ext > loss) {
        return Err(CliError::Infeasible(format!("k_ext = {} does not exceed the extractor loss {loss:.4}", args.k_ext)));
    }
    let l = output_length(args.k_ext, half, half, 1.0)?;
    if l == 0 {
        return Err(CliError::Infeasible(format!("k_ext = {} leaves no whole output bit", args.k_ext)));
    }
    if l > input.len() {
        return Err(CliError::Usage(format!(
            "k_ext = {} asks for {l} output bits from only {} input bits",
            args.k_ext,
            input.len()
        )));
    }
    let spec = ExtractorSpec::toeplitz(input.len(), l, args.epsilon_ext);
    if seed.len() < spec.seed_len() {
        return Err(ExtractorError::SeedLength {
            expected: spec.seed_len(),
            got: seed.len(),
        }
        .into());
    }
    let output = toeplitz_extract(&input, &seed.truncated(spec.seed_len()), &spec)?;
    if let Some(path) = &args.out {
        let mut out = create(path)?;
        output.write_to(&mut out).map_err(file_err(path))?;
        out.flush().map_err(file_err(path))?;
    }
    if args.common.json {
        print_json(&json!({
            "schema": JSON_SCHEMA,
            "command": "extract",
            "input_bits": input.len(),
            "seed_bits_used": spec.seed_len(),
            "k_ext": args.k_ext,
            "loss": loss,
            "output_bits": l,
        }));
    } else {
        println!("extracted {l} bits from {} (k_ext = {}, loss = {loss:.4})", input.len(), args.k_ext);
        if args.out.is_none() && l <= 256 {
            println!("{output}");
        }
    }
    Ok(())
}
