//! `dimerloops`: exact enumeration, Monte Carlo and analytic checks for
//! double dimer and monomer double-dimer models on tori.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::ToPrimitive;
use serde_json::{json, Value};

use dimerloops::loops::{check_injection, connection_profile, expected_loop_density};
use dimerloops::matching::{count_by_enumeration, count_covers};
use dimerloops::mdd::{correlation_table, endpoint_ball_probability, format_rational, MddParams};
use dimerloops::report::{rational_value, Assertion, ResultFile, RunManifest};
use dimerloops::sampler::{sample_double_dimer_stats, worm_two_point, DdmSampling, RunStats};
use dimerloops::spectral::{
    bound_constants_with, leibniz_limit_check, r_d_quadrature, r_d_random_walk,
    upsilon_closed_form, upsilon_fourier,
};
use dimerloops::suite::{run_suite, SuiteOptions, SUITES};
use dimerloops::{Budget, Error, Parity, TorusLattice};

#[derive(Parser, Debug)]
#[command(name = "dimerloops", version, about, args_override_self = true)]
struct Cli {
    /// Key-value file (`key = value` per line) supplying defaults for the
    /// subcommand's long flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for result files (JSON with manifest, plus a text summary).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count dimer covers of a torus minus an excluded vertex set.
    Count(CountArgs),
    /// Double dimer loop statistics.
    #[command(subcommand)]
    Ddm(DdmCommand),
    /// Monomer double-dimer two-point function and walk end-point law.
    #[command(subcommand)]
    Mdd(MddCommand),
    /// Monte Carlo sampling.
    #[command(subcommand)]
    Sample(SampleCommand),
    /// Identity and convergence checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Expected number of returns of simple random walk, r_d.
    Rd(RdArgs),
    /// Infrared-bound constants for given (d, N, rho).
    Constants(ConstantsArgs),
    /// Run a named regression suite.
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Clone)]
struct LatticeArgs {
    /// Dimension (cubic torus of side L).
    #[arg(long = "d", default_value_t = 2)]
    d: usize,
    /// Side length.
    #[arg(long = "L", default_value_t = 4)]
    l: usize,
    /// Explicit side lengths, e.g. "4,6"; overrides --d and --L.
    #[arg(long)]
    sides: Option<String>,
}

impl LatticeArgs {
    fn lattice(&self) -> Result<TorusLattice, Error> {
        match &self.sides {
            Some(s) => {
                let sides = s
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidArgument(format!("bad side list {s:?}")))?;
                TorusLattice::new(&sides)
            }
            None => TorusLattice::cubic(self.d, self.l),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CountMethod {
    Transfer,
    Enumerate,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Excluded vertices as "x1,x2;y1,y2".
    #[arg(long, default_value = "")]
    exclude: String,
    #[arg(long, value_enum, default_value_t = CountMethod::Transfer)]
    method: CountMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Mcmc,
}

#[derive(Subcommand, Debug)]
enum DdmCommand {
    /// Loop density and connection probabilities.
    Stats(DdmStatsArgs),
}

#[derive(Args, Debug)]
struct DdmStatsArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args, Debug, Clone)]
struct McArgs {
    /// Number of double dimer samples.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worm closures discarded per chain: "auto" (100 |V|) or a number.
    #[arg(long, default_value = "auto")]
    burnin: String,
    /// Worm closures between samples: "auto" (|V|) or a number.
    #[arg(long, default_value = "auto")]
    thin: String,
}

impl McArgs {
    fn schedule(text: &str) -> Result<Option<u64>, Error> {
        if text == "auto" {
            return Ok(None);
        }
        text.parse().map(Some).map_err(|_| {
            Error::InvalidArgument(format!("expected \"auto\" or a count, got {text:?}"))
        })
    }

    fn sampling(&self, lat: &TorusLattice) -> Result<DdmSampling, Error> {
        let mut cfg = DdmSampling::new(lat, self.samples, self.seed);
        cfg.burn_in = Self::schedule(&self.burnin)?;
        cfg.thin = Self::schedule(&self.thin)?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum MddCommand {
    /// Two-point function G(o, x).
    Twopoint(MddArgs),
    /// Volume average of the two-point function.
    Cesaro(MddArgs),
    /// Law of the walk end-point and its l1-ball probabilities.
    EndpointLaw(MddArgs),
}

#[derive(Args, Debug)]
struct MddArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long = "N", default_value_t = 2)]
    n: u32,
    /// Monomer activity, "p/q" or a decimal.
    #[arg(long, default_value = "0")]
    rho: String,
    /// Single target vertex, e.g. "1,0".
    #[arg(long)]
    x: Option<String>,
    /// Ball radius factor for the end-point law, radius floor(alpha L).
    #[arg(long)]
    alpha: Option<f64>,
    /// "mcmc" estimates the dimer two-point function (N = 2, rho = 0) with the worm.
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worm batches and closures per batch in mcmc mode.
    #[arg(long, default_value_t = 20)]
    batches: usize,
    #[arg(long, default_value_t = 20_000)]
    closures: u64,
}

#[derive(Subcommand, Debug)]
enum SampleCommand {
    /// Double dimer samples from two independent worm chains.
    Ddm(SampleDdmArgs),
}

#[derive(Args, Debug)]
struct SampleDdmArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[command(flatten)]
    mc: McArgs,
    /// Write per-sample observables to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Fourier sum against closed form for the half-zone kernel.
    Upsilon {
        #[arg(long = "Lmax", default_value_t = 64)]
        lmax: usize,
    },
    /// Convergence of the cotangent partial sums.
    Leibniz {
        #[arg(long, default_value_t = 4000)]
        mmax: usize,
    },
    /// Exhaustive check of the colour-switching injection.
    Injection(InjectionArgs),
    /// Exact monomer double-dimer identities at 4x4.
    Identities,
}

#[derive(Args, Debug)]
struct InjectionArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RdMethod {
    Quad,
    Mc,
}

#[derive(Args, Debug)]
struct RdArgs {
    #[arg(long = "d", default_value_t = 3)]
    d: usize,
    #[arg(long, value_enum, default_value_t = RdMethod::Quad)]
    method: RdMethod,
    /// Quadrature nodes per unit of log t.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = 1_000_000)]
    walks: u64,
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    #[arg(long = "d", default_value_t = 3)]
    d: usize,
    #[arg(long = "N", default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    name: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "4,6")]
    exact_sides: String,
    #[arg(long, default_value_t = 100_000)]
    chi_samples: usize,
    #[arg(long, default_value_t = 5)]
    chi_seeds: usize,
    #[arg(long, default_value_t = 20_000)]
    edge_samples: usize,
    #[arg(long, default_value = "8,12")]
    mc_sides: String,
    #[arg(long, default_value_t = 400)]
    mc_samples: usize,
    #[arg(long, default_value_t = 1_000_000)]
    rw_walks: u64,
    #[arg(long, default_value_t = 10_000)]
    rw_horizon: u64,
}

fn parse_list(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidArgument(format!("bad list {text:?}")))
}

struct Run {
    argv: Vec<String>,
    budget: Budget,
}

impl Run {
    fn manifest(&self, lattices: &[&TorusLattice], seeds: Vec<u64>) -> RunManifest {
        let mut m = RunManifest::new(self.argv.clone(), Default::default());
        m.config
            .insert("budget.enum".into(), self.budget.enum_vertices.to_string());
        m.config.insert(
            "budget.transfer".into(),
            self.budget.transfer_states.to_string(),
        );
        m.config
            .insert("budget.mdd".into(), self.budget.mdd_vertices.to_string());
        m.lattices = lattices.iter().map(|l| l.sides().to_vec()).collect();
        m.seeds = seeds;
        m
    }
}

fn run_stats_value(stats: &RunStats) -> Value {
    serde_json::to_value(stats).unwrap_or(Value::Null)
}

fn execute(cli: &Cli, run: &Run) -> Result<Vec<(String, ResultFile)>, Error> {
    let b = run.budget;
    let start = std::time::Instant::now();
    let single = |name: &str, manifest: RunManifest, assertions, result| {
        let mut m = manifest;
        m.wall_time_s = start.elapsed().as_secs_f64();
        Ok(vec![(
            name.to_string(),
            ResultFile::new(m, assertions, result),
        )])
    };
    match &cli.command {
        Command::Count(a) => {
            let lat = a.lattice.lattice()?;
            let excluded = lat.parse_vertices(&a.exclude)?;
            let count = match a.method {
                CountMethod::Transfer => count_covers(&lat, &excluded, &b)?,
                CountMethod::Enumerate => count_by_enumeration(&lat, &excluded, &b)?.into(),
            };
            single(
                "count",
                run.manifest(&[&lat], vec![]),
                vec![],
                json!({
                    "sides": lat.sides(),
                    "excluded": excluded.iter().map(|&v| lat.coords(v)).collect::<Vec<_>>(),
                    "count": count.to_string(),
                }),
            )
        }
        Command::Ddm(DdmCommand::Stats(a)) => {
            let lat = a.lattice.lattice()?;
            match a.mode {
                Mode::Exact => {
                    let profile = connection_profile(&lat, &b)?;
                    let density = expected_loop_density(&lat, &b)?;
                    let probs: Vec<Value> = (0..lat.vertex_count())
                        .map(|x| {
                            json!({
                                "x": lat.coords(x),
                                "p": rational_value(&profile.probability(x)),
                            })
                        })
                        .collect();
                    single(
                        "ddm-stats",
                        run.manifest(&[&lat], vec![]),
                        vec![],
                        json!({
                            "cover_count": profile.cover_count,
                            "loop_density": rational_value(&density),
                            "connection": probs,
                        }),
                    )
                }
                Mode::Mcmc => {
                    let cfg = a.mc.sampling(&lat)?;
                    let stats = sample_double_dimer_stats(&lat, &cfg)?;
                    single(
                        "ddm-stats",
                        run.manifest(&[&lat], vec![a.mc.seed]),
                        vec![],
                        run_stats_value(&stats),
                    )
                }
            }
        }
        Command::Mdd(cmd) => {
            let (name, a) = match cmd {
                MddCommand::Twopoint(a) => ("mdd-twopoint", a),
                MddCommand::Cesaro(a) => ("mdd-cesaro", a),
                MddCommand::EndpointLaw(a) => ("mdd-endpoint-law", a),
            };
            let lat = a.lattice.lattice()?;
            mdd(name, cmd, a, &lat, run, &start)
        }
        Command::Sample(SampleCommand::Ddm(a)) => {
            let lat = a.lattice.lattice()?;
            let cfg = a.mc.sampling(&lat)?;
            let stats = sample_double_dimer_stats(&lat, &cfg)?;
            if let Some(path) = &a.csv {
                write_csv(path, &stats)?;
            }
            single(
                "sample-ddm",
                run.manifest(&[&lat], vec![a.mc.seed]),
                vec![],
                run_stats_value(&stats),
            )
        }
        Command::Verify(v) => verify(v, run, &start),
        Command::Rd(a) => {
            let (value, assertions) = match a.method {
                RdMethod::Quad => {
                    let r = r_d_quadrature(a.d, a.resolution)?;
                    let mut asr = Vec::new();
                    if a.d == 3 {
                        asr.push(Assertion::new(
                            "r3_bracket",
                            r.value > 0.51 && r.value < 0.52,
                            format!("{:.8} +- {:.1e}", r.value, r.error),
                        ));
                    }
                    (serde_json::to_value(&r)?, asr)
                }
                RdMethod::Mc => {
                    let r = r_d_random_walk(a.d, a.walks, a.horizon, a.seed)?;
                    let mut v = serde_json::to_value(&r)?;
                    v["corrected"] = json!(r.corrected());
                    (v, vec![])
                }
            };
            single("rd", run.manifest(&[], vec![a.seed]), assertions, value)
        }
        Command::Constants(a) => {
            let r = r_d_quadrature(a.d, 64)?;
            let k = bound_constants_with(r, a.n, a.rho)?;
            let admissible: Vec<u32> = (1..=((k.n_range_max.ceil() as u32) + 2))
                .filter(|&n| (n as f64) < k.n_range_max)
                .collect();
            let mut v = serde_json::to_value(&k)?;
            v["admissible_N"] = json!(admissible);
            single("constants", run.manifest(&[], vec![]), vec![], v)
        }
        Command::Suite(a) => {
            let opts = SuiteOptions {
                budget: b,
                seed: a.seed,
                exact_sides: parse_list(&a.exact_sides)?,
                chi_samples: a.chi_samples,
                chi_seeds: a.chi_seeds,
                edge_samples: a.edge_samples,
                mc_sides: parse_list(&a.mc_sides)?,
                mc_samples: a.mc_samples,
                rw_walks: a.rw_walks,
                rw_horizon: a.rw_horizon,
                command_line: run.argv.clone(),
            };
            run_suite(&a.name, &opts)
        }
    }
}

fn mdd(
    name: &str,
    cmd: &MddCommand,
    a: &MddArgs,
    lat: &TorusLattice,
    run: &Run,
    start: &std::time::Instant,
) -> Result<Vec<(String, ResultFile)>, Error> {
    let mut manifest = run.manifest(&[lat], vec![]);
    let mut assertions = Vec::new();
    let result = if a.mode == Mode::Mcmc {
        if a.n != 2 || a.rho.trim().parse::<f64>().ok() != Some(0.0) {
            return Err(Error::InvalidArgument(
                "mcmc mode estimates the dimer case only (N = 2, rho = 0)".into(),
            ));
        }
        manifest.seeds = vec![a.seed];
        let est = worm_two_point(lat, a.seed, None, a.batches, a.closures)?;
        let values: Vec<Value> = (0..lat.vertex_count())
            .map(|x| json!({"x": lat.coords(x), "g": est.values[x], "stderr": est.stderr[x]}))
            .collect();
        match cmd {
            MddCommand::Cesaro(_) => json!({"cesaro": est.cesaro_sum(), "steps": est.steps}),
            _ => match &a.x {
                Some(x) => {
                    let v = lat.parse_vertex(x)?;
                    json!({"x": lat.coords(v), "g": est.values[v], "stderr": est.stderr[v]})
                }
                None => json!({"values": values, "steps": est.steps}),
            },
        }
    } else {
        let params = MddParams::parse(a.n, &a.rho)?;
        let table = correlation_table(lat, &params, &run.budget)?;
        let cap = num::BigRational::new(1.into(), (lat.dim() as u64 * a.n as u64).into());
        let bounded = table.values.iter().all(|g| *g >= num::zero() && *g <= cap);
        let symmetric =
            (0..lat.vertex_count()).all(|x| table.values[x] == table.values[lat.negate(x)]);
        assertions.push(Assertion::new(
            "two_point_bounds",
            bounded && symmetric,
            "0 <= G <= 1/(dN) and G(x) = G(-x)",
        ));
        match cmd {
            MddCommand::Twopoint(_) => match &a.x {
                Some(x) => {
                    let v = lat.parse_vertex(x)?;
                    json!({"x": lat.coords(v), "g": rational_value(table.get(v))})
                }
                None => json!({
                    "values": (0..lat.vertex_count())
                        .map(|x| json!({"x": lat.coords(x), "g": rational_value(table.get(x))}))
                        .collect::<Vec<_>>(),
                    "partition": table.partition.as_ref().map(rational_value),
                }),
            },
            MddCommand::Cesaro(_) => {
                let c = table.cesaro_sum();
                json!({"cesaro": rational_value(&c), "approx": c.to_f64()})
            }
            MddCommand::EndpointLaw(_) => {
                let total: num::BigRational = table.values.iter().cloned().sum();
                if total == num::zero() {
                    return Err(Error::InvalidArgument(
                        "walk ensemble has zero weight".into(),
                    ));
                }
                let law: Vec<num::BigRational> = table.values.iter().map(|g| g / &total).collect();
                let mut v = json!({
                    "law": (0..lat.vertex_count())
                        .map(|x| json!({"x": lat.coords(x), "p": rational_value(&law[x])}))
                        .collect::<Vec<_>>(),
                });
                assertions.push(Assertion::new(
                    "law_normalised",
                    law.iter().cloned().sum::<num::BigRational>() == num::one(),
                    "probabilities sum to 1",
                ));
                if let Some(alpha) = a.alpha {
                    let radius = (alpha * lat.side(0) as f64).floor().max(0.0) as usize;
                    let ball = endpoint_ball_probability(lat, &law, radius);
                    let tail = table.tail_ratio(radius);
                    assertions.push(Assertion::new(
                        "ball_identity",
                        ball == tail,
                        format!("P(|X|_1 <= {radius}) = {}", format_rational(&ball)),
                    ));
                    v["radius"] = json!(radius);
                    v["ball_probability"] = rational_value(&ball);
                }
                v
            }
        }
    };
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    Ok(vec![(
        name.to_string(),
        ResultFile::new(manifest, assertions, result),
    )])
}

fn verify(
    v: &VerifyCommand,
    run: &Run,
    start: &std::time::Instant,
) -> Result<Vec<(String, ResultFile)>, Error> {
    let b = run.budget;
    let (name, manifest, assertions, result) = match v {
        VerifyCommand::Upsilon { lmax } => {
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            let mut l = 4;
            while l <= *lmax {
                for d in [2usize, 3] {
                    for x1 in (0..l).step_by(2) {
                        let f = upsilon_fourier(l, d, x1)?;
                        let c = upsilon_closed_form(l, d, x1)?;
                        worst = worst.max((f - c).abs());
                        rows.push(json!({"L": l, "d": d, "x1": x1, "fourier": f, "closed": c}));
                    }
                }
                l += 2;
            }
            let a = Assertion::new(
                "upsilon_identity",
                worst <= 1e-9,
                format!("max |diff| = {worst:.3e}"),
            );
            (
                "verify-upsilon",
                run.manifest(&[], vec![]),
                vec![a],
                Value::Array(rows),
            )
        }
        VerifyCommand::Leibniz { mmax } => {
            let r = leibniz_limit_check(*mmax)?;
            let a = Assertion::new(
                "leibniz_limit",
                r.passed(),
                format!(
                    "last error {:.6} against {:.6}, decreasing: {}",
                    r.last_error, r.target, r.errors_decreasing
                ),
            );
            (
                "verify-leibniz",
                run.manifest(&[], vec![]),
                vec![a],
                serde_json::to_value(&r)?,
            )
        }
        VerifyCommand::Injection(a) => {
            let lat = a.lattice.lattice()?;
            let profile = connection_profile(&lat, &b)?;
            let mut rows = Vec::new();
            let mut asr = Vec::new();
            for x in lat.sublattice(Parity::Odd) {
                let dx = count_covers(&lat, &[lat.origin(), x], &b)?;
                let sq = (&dx * &dx).to_u128().unwrap_or(u128::MAX);
                let rep = check_injection(&lat, x, &b)?;
                asr.push(Assertion::new(
                    format!("injection_{}", lat.format_vertex(x)),
                    rep.passed() && sq <= profile.connected_pairs[x],
                    format!(
                        "|D(o,x)|^2 = {sq} <= {}; {} inputs, {} distinct images",
                        profile.connected_pairs[x], rep.inputs, rep.distinct_outputs
                    ),
                ));
                rows.push(serde_json::to_value(&rep)?);
            }
            (
                "verify-injection",
                run.manifest(&[&lat], vec![]),
                asr,
                Value::Array(rows),
            )
        }
        VerifyCommand::Identities => {
            let opts = SuiteOptions {
                budget: b,
                command_line: run.argv.clone(),
                ..SuiteOptions::default()
            };
            return run_suite("theorem2-exact", &opts);
        }
    };
    let mut manifest = manifest;
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    Ok(vec![(
        name.to_string(),
        ResultFile::new(manifest, assertions, result),
    )])
}

fn write_csv(path: &std::path::Path, stats: &RunStats) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    let mut header = vec!["sample".to_string()];
    header.extend(stats.series.iter().map(|(n, _)| n.clone()));
    w.write_record(&header).map_err(|e| Error::Io(e.into()))?;
    for i in 0..stats.n_samples {
        let mut row = vec![i.to_string()];
        row.extend(stats.series.iter().map(|(_, s)| s[i].to_string()));
        w.write_record(&row).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidArgument(_)
            | Error::InvalidLattice(_)
            | Error::Budget { .. }
            | Error::Degenerate(_)
    )
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let expanded = match config::expand(&argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let budget = match Budget::from_env() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let run = Run {
        argv: expanded,
        budget,
    };
    let files = match execute(&cli, &run) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if usage_error(&e) { 2 } else { 1 });
        }
    };
    let mut failed = false;
    for (stem, file) in &files {
        failed |= file.failed()
            || file
                .assertions
                .iter()
                .any(|a| a.status != dimerloops::report::Status::Pass);
        eprint!("{}", file.human());
        match file.to_json() {
            Ok(j) => println!("{j}"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
        if let Some(dir) = &cli.out {
            if let Err(e) = file.write(dir, stem) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::from(if failed { 1 } else { 0 })
}
