//! The `jmcheck` command-line tool.
//!
//! Exit codes: 0 jointly measurable (or necessary test passed for biased
//! input), 1 incompatible, 2 inconclusive, 64 input error, 74 output error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use jm_core::construction::{construct_joint, WitnessReport};
use jm_core::criterion::{
    coplanar_chain, decide, threshold_sweep, ChainReport, DecideOptions, DecisionReport, Verdict,
};
use jm_core::ensemble::{random_biased, random_unbiased, rng};
use jm_core::fixtures;
use jm_core::hypercube::{SubsetLabel, DEFAULT_NMAX, MAX_MEASUREMENTS};
use jm_core::povm::Tolerances;
use jm_core::steering::steering_decision;
use jm_core::{JmError, Vec3};

pub mod io;

use io::{AssemblageFile, DirectionsFile, StateFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCOMPATIBLE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_OUTPUT: i32 = 74;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn output(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_OUTPUT,
            message: message.into(),
        }
    }

    pub fn from_core(e: JmError) -> Self {
        CliError::input(e.to_string())
    }
}

pub fn exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::JointlyMeasurable | Verdict::NecessaryHolds => EXIT_OK,
        Verdict::Incompatible => EXIT_INCOMPATIBLE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "jmcheck",
    version,
    about = "Joint measurability of binary qubit measurements"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Relative decision tolerance around the bound 2^(N-1)
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol: f64,
    /// Iteration budget of the minimizer
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Largest number of measurements accepted
    #[arg(long, global = true, default_value_t = DEFAULT_NMAX)]
    pub nmax: usize,
    /// Seed for random ensembles
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide joint measurability of an assemblage file
    Check { input: PathBuf },
    /// Build and verify a joint POVM for an unbiased assemblage
    Construct {
        input: PathBuf,
        /// Witness file to write; printed to stdout when absent
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also render every effect as a complex 2x2 matrix
        #[arg(long)]
        matrices: bool,
    },
    /// Critical noise level of direction families
    Sweep {
        directions: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eta_lo: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_hi: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol_eta: f64,
        /// CSV file to write; printed to stdout when absent
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recompute the four-measurement counterexample
    Repro,
    /// Steering test for a state assemblage file
    Steer { input: PathBuf },
    /// Write a random assemblage file
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        biased: bool,
    },
    /// Time the decision procedure on random unbiased assemblages
    Bench {
        /// Instances per N
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Largest N to time
        #[arg(long, default_value_t = 8)]
        up_to: usize,
    },
}

impl GlobalArgs {
    pub fn decide_options(&self) -> Result<DecideOptions, CliError> {
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(CliError::input(format!(
                "--tol must be nonnegative, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(CliError::input("--max-iters must be positive"));
        }
        if self.nmax == 0 || self.nmax > MAX_MEASUREMENTS {
            return Err(CliError::input(format!(
                "--nmax must lie in [1, {MAX_MEASUREMENTS}], got {}",
                self.nmax
            )));
        }
        let mut opts = DecideOptions {
            tol: self.tol,
            nmax: self.nmax,
            ..DecideOptions::default()
        };
        opts.solver.max_iters = self.max_iters;
        Ok(opts)
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn fmt_num(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 || !r.is_finite() || (1e-4..1e12).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x))
    } else {
        Value::Null
    }
}

fn label_json(s: &SubsetLabel) -> Value {
    json!(s.indices())
}

fn vec_json(v: &Vec3) -> Value {
    json!([num(v.x), num(v.y), num(v.z)])
}

fn witness_summary(w: &WitnessReport) -> Value {
    json!({
        "valid": w.valid,
        "min_eigenvalue": num(w.min_effect_eigenvalue),
        "min_eigenvalue_configuration": num(w.min_eigenvalue_configuration),
        "min_eigenvalue_reflected": num(w.min_eigenvalue_reflected),
        "marginal_residual": num(w.marginal_residual),
        "identity_residual": num(w.identity_residual),
        "system_residual": num(w.system_residual),
    })
}

pub fn decision_json(r: &DecisionReport) -> Value {
    let coeffs: Vec<Value> = r
        .optimal_coefficients
        .iter()
        .map(|(s, v)| json!({"label": label_json(s), "vector": vec_json(v)}))
        .collect();
    json!({
        "verdict": r.verdict.to_string(),
        "n": r.n,
        "objective": num(r.objective),
        "bound": num(r.bound),
        "primal": num(r.primal_value),
        "dual": num(r.dual_lower_bound),
        "gap": num(r.gap),
        "converged": r.converged,
        "iterations": r.iterations,
        "optimal_coefficients": coeffs,
        "witness": r.witness.as_ref().map(witness_summary),
        "note": r.note,
    })
}

pub fn decision_text(r: &DecisionReport) -> String {
    let mut s = String::new();
    s += &format!("verdict: {}\n", r.verdict);
    s += &format!("n: {}\n", r.n);
    s += &format!("objective: {}\n", fmt_num(r.objective));
    s += &format!("bound: {}\n", fmt_num(r.bound));
    s += &format!("dual: {}\n", fmt_num(r.dual_lower_bound));
    s += &format!("gap: {}\n", fmt_num(r.gap));
    s += &format!("converged: {} ({} iterations)\n", r.converged, r.iterations);
    for (label, v) in &r.optimal_coefficients {
        s += &format!(
            "z{label}: [{}, {}, {}]\n",
            fmt_num(v.x),
            fmt_num(v.y),
            fmt_num(v.z)
        );
    }
    if let Some(w) = &r.witness {
        s += &format!(
            "witness: valid={} min_eigenvalue={} marginal_residual={} identity_residual={}\n",
            w.valid,
            fmt_num(w.min_effect_eigenvalue),
            fmt_num(w.marginal_residual),
            fmt_num(w.identity_residual)
        );
    }
    if let Some(n) = &r.note {
        s += &format!("note: {n}\n");
    }
    s
}

fn decision_csv(r: &DecisionReport) -> String {
    format!(
        "verdict,n,objective,bound,dual,gap\n{},{},{},{},{},{}\n",
        r.verdict,
        r.n,
        fmt_num(r.objective),
        fmt_num(r.bound),
        fmt_num(r.dual_lower_bound),
        fmt_num(r.gap)
    )
}

fn render_decision(r: &DecisionReport, format: Format) -> String {
    match format {
        Format::Json => format!("{:#}\n", decision_json(r)),
        Format::Text => decision_text(r),
        Format::Csv => decision_csv(r),
    }
}

/// Output of a command: text for stdout plus the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

pub fn cmd_check(input: &Path, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let opts = g.decide_options()?;
    let file: AssemblageFile = io::read_json(input)?;
    let a = file.to_assemblage(opts.tolerances)?;
    let r = decide(&a, &opts).map_err(CliError::from_core)?;
    Ok(Outcome {
        code: exit_code(r.verdict),
        stdout: render_decision(&r, g.format),
    })
}

pub fn witness_json(w: &WitnessReport, r: &DecisionReport, matrices: bool) -> Value {
    let effects: Vec<Value> = w
        .joint
        .iter()
        .map(|(mu, e)| {
            let c = e.coords();
            let mut item = json!({
                "outcome": mu.entries(),
                "pauli": [num(c[0]), num(c[1]), num(c[2]), num(c[3])],
            });
            if matrices {
                let m = e.matrix_entries();
                item["matrix"] = json!(m
                    .iter()
                    .map(|row| row
                        .iter()
                        .map(|(re, im)| json!([num(*re), num(*im)]))
                        .collect::<Vec<_>>())
                    .collect::<Vec<_>>());
            }
            item
        })
        .collect();
    let scalars: Vec<Value> = w
        .even_scalars
        .iter()
        .map(|(s, v)| json!({"label": label_json(s), "value": num(*v)}))
        .collect();
    json!({
        "n": w.joint.n(),
        "objective": num(r.objective),
        "bound": num(r.bound),
        "effects": effects,
        "even_scalars": scalars,
        "higher_vectors": r
            .optimal_coefficients
            .iter()
            .map(|(s, v)| json!({"label": label_json(s), "vector": vec_json(v)}))
            .collect::<Vec<_>>(),
        "verification": witness_summary(w),
    })
}

pub fn cmd_construct(
    input: &Path,
    output: Option<&Path>,
    matrices: bool,
    g: &GlobalArgs,
) -> Result<Outcome, CliError> {
    let opts = g.decide_options()?;
    let file: AssemblageFile = io::read_json(input)?;
    let a = file.to_assemblage(opts.tolerances)?;
    if !a.is_unbiased(opts.tolerances.eq) {
        return Err(CliError::input(
            "construction requires unbiased observables (all biases zero)",
        ));
    }
    let r = decide(&a, &opts).map_err(CliError::from_core)?;
    let witness = match (&r.verdict, &r.witness) {
        (Verdict::JointlyMeasurable, Some(w)) => w.clone(),
        _ => {
            return Ok(Outcome {
                code: if r.verdict == Verdict::Incompatible {
                    EXIT_INCOMPATIBLE
                } else {
                    EXIT_INCONCLUSIVE
                },
                stdout: format!(
                    "refusing to write a witness: verdict {}, objective {} against bound {} (dual {})\n",
                    r.verdict,
                    fmt_num(r.objective),
                    fmt_num(r.bound),
                    fmt_num(r.dual_lower_bound)
                ),
            })
        }
    };
    let body = format!("{:#}\n", witness_json(&witness, &r, matrices));
    match output {
        Some(path) => {
            io::write_text(path, &body)?;
            Ok(Outcome {
                code: EXIT_OK,
                stdout: format!(
                    "wrote witness for {} measurements to {} (min eigenvalue {})\n",
                    a.len(),
                    path.display(),
                    fmt_num(witness.min_effect_eigenvalue)
                ),
            })
        }
        None => Ok(Outcome {
            code: EXIT_OK,
            stdout: body,
        }),
    }
}

pub const SWEEP_HEADER: &str = "family_id,N,eta_star,objective_at_star,gap";

pub fn cmd_sweep(
    directions: &Path,
    eta_lo: f64,
    eta_hi: f64,
    tol_eta: f64,
    output: Option<&Path>,
    g: &GlobalArgs,
) -> Result<Outcome, CliError> {
    let opts = g.decide_options()?;
    let file: DirectionsFile = io::read_json(directions)?;
    let families = file.families();
    if families.is_empty() {
        return Err(CliError::input("no direction families given"));
    }
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for fam in &families {
        if fam.id.contains([',', '\n', '"']) {
            return Err(CliError::input(format!(
                "family id {:?} contains CSV metacharacters",
                fam.id
            )));
        }
        let dirs: Vec<Vec3> = fam.directions.iter().map(|d| Vec3::from(*d)).collect();
        let s =
            threshold_sweep(&dirs, eta_lo, eta_hi, tol_eta, &opts).map_err(CliError::from_core)?;
        csv += &format!(
            "{},{},{},{},{}\n",
            fam.id,
            dirs.len(),
            fmt_num(s.eta_star),
            fmt_num(s.objective_at_star),
            fmt_num(s.gap)
        );
    }
    match output {
        Some(path) => {
            io::write_text(path, &csv)?;
            Ok(Outcome {
                code: EXIT_OK,
                stdout: format!("wrote {} rows to {}\n", families.len(), path.display()),
            })
        }
        None => Ok(Outcome {
            code: EXIT_OK,
            stdout: csv,
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproCheck {
    pub name: &'static str,
    pub value: f64,
    pub target: String,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ReproReport {
    pub chain: ChainReport,
    pub decision: DecisionReport,
    pub checks: Vec<ReproCheck>,
    pub elapsed: Duration,
}

impl ReproReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const REPRO_CHAIN: f64 = 2.01977;
pub const REPRO_OBJECTIVE: f64 = 7.95738;

/// Recomputes the counterexample: the chain condition fails while the
/// criterion certifies joint measurability with a verified witness.
pub fn repro(opts: &DecideOptions) -> ReproReport {
    let start = Instant::now();
    let a = fixtures::counterexample();
    let chain = coplanar_chain(&a).expect("four measurements");
    let decision = decide(&a, opts).expect("fixture is valid");
    let witness = match &decision.witness {
        Some(w) => w.clone(),
        None => construct_joint(&a, &decision.optimal_coefficients, Tolerances::default())
            .expect("fixture is unbiased"),
    };
    let elapsed = start.elapsed();
    let checks = vec![
        ReproCheck {
            name: "chain value",
            value: chain.lhs,
            target: format!("{REPRO_CHAIN} ± 1e-4"),
            passed: (chain.lhs - REPRO_CHAIN).abs() <= 1e-4,
        },
        ReproCheck {
            name: "chain condition violated",
            value: chain.margin,
            target: "> 0".into(),
            passed: chain.margin > 0.0,
        },
        ReproCheck {
            name: "minimized objective",
            value: decision.objective,
            target: format!("{REPRO_OBJECTIVE} ± 1e-4"),
            passed: (decision.objective - REPRO_OBJECTIVE).abs() <= 1e-4,
        },
        ReproCheck {
            name: "dual gap",
            value: decision.gap,
            target: "<= 1e-5".into(),
            passed: decision.gap <= 1e-5,
        },
        ReproCheck {
            name: "verdict jointly measurable",
            value: (decision.verdict == Verdict::JointlyMeasurable) as u8 as f64,
            target: "= 1".into(),
            passed: decision.verdict == Verdict::JointlyMeasurable,
        },
        ReproCheck {
            name: "witness min eigenvalue",
            value: witness.min_effect_eigenvalue,
            target: ">= -1e-10".into(),
            passed: witness.min_effect_eigenvalue >= -1e-10,
        },
        ReproCheck {
            name: "witness marginal residual",
            value: witness.marginal_residual,
            target: "<= 1e-10".into(),
            passed: witness.marginal_residual <= 1e-10,
        },
        ReproCheck {
            name: "runtime seconds",
            value: elapsed.as_secs_f64(),
            target: "< 1".into(),
            passed: elapsed < Duration::from_secs(1),
        },
    ];
    ReproReport {
        chain,
        decision,
        checks,
        elapsed,
    }
}

pub fn cmd_repro(g: &GlobalArgs) -> Result<Outcome, CliError> {
    let opts = g.decide_options()?;
    let report = repro(&opts);
    let stdout = match g.format {
        Format::Json => {
            let checks: Vec<Value> = report
                .checks
                .iter()
                .map(|c| json!({"name": c.name, "value": num(c.value), "target": c.target, "passed": c.passed}))
                .collect();
            format!(
                "{:#}\n",
                json!({
                    "chain": {"lhs": num(report.chain.lhs), "rhs": num(report.chain.rhs), "margin": num(report.chain.margin)},
                    "decision": decision_json(&report.decision),
                    "checks": checks,
                    "passed": report.passed(),
                })
            )
        }
        Format::Text | Format::Csv => {
            let mut s = String::new();
            if g.format == Format::Csv {
                s += "check,value,target,status\n";
            }
            for c in &report.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                if g.format == Format::Csv {
                    s += &format!("{},{},{},{}\n", c.name, fmt_num(c.value), c.target, status);
                } else {
                    s += &format!(
                        "{status} {}: {} (target {})\n",
                        c.name,
                        fmt_num(c.value),
                        c.target
                    );
                }
            }
            s
        }
    };
    Ok(Outcome {
        code: if report.passed() {
            EXIT_OK
        } else {
            EXIT_INCOMPATIBLE
        },
        stdout,
    })
}

pub fn cmd_steer(input: &Path, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let opts = g.decide_options()?;
    let file: StateFile = io::read_json(input)?;
    let sa = file.to_states(opts.tolerances)?;
    let r = steering_decision(&sa, &opts).map_err(CliError::from_core)?;
    let meaning = match r.verdict {
        Verdict::Incompatible => "steerable",
        Verdict::JointlyMeasurable => "local hidden state model exists",
        Verdict::NecessaryHolds => "no steering detected (necessary test only)",
        Verdict::Inconclusive => "inconclusive",
    };
    let stdout = match g.format {
        Format::Json => {
            let mut v = decision_json(&r);
            v["steering"] = json!(meaning);
            format!("{v:#}\n")
        }
        Format::Text => format!("steering: {meaning}\n{}", decision_text(&r)),
        Format::Csv => decision_csv(&r),
    };
    Ok(Outcome {
        code: exit_code(r.verdict),
        stdout,
    })
}

pub fn cmd_random(n: usize, biased: bool, g: &GlobalArgs) -> Result<Outcome, CliError> {
    if n == 0 || n > g.nmax {
        return Err(CliError::input(format!(
            "--n must lie in [1, {}], got {n}",
            g.nmax
        )));
    }
    let mut r = rng(g.seed);
    let a = if biased {
        random_biased(&mut r, n)
    } else {
        random_unbiased(&mut r, n)
    }
    .map_err(CliError::from_core)?;
    let body = serde_json::to_string_pretty(&AssemblageFile::from_assemblage(&a))
        .map_err(|e| CliError::output(e.to_string()))?;
    Ok(Outcome {
        code: EXIT_OK,
        stdout: body + "\n",
    })
}

pub fn cmd_bench(count: usize, up_to: usize, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let opts = g.decide_options()?;
    if up_to < 2 || up_to > opts.nmax {
        return Err(CliError::input(format!(
            "--up-to must lie in [2, {}]",
            opts.nmax
        )));
    }
    let mut r = rng(g.seed);
    let mut s = String::from("N,instances,mean_ms,max_ms,mean_iterations,converged\n");
    for n in 2..=up_to {
        let mut times = Vec::with_capacity(count);
        let mut iters = 0usize;
        let mut converged = 0usize;
        for _ in 0..count {
            let a = random_unbiased(&mut r, n).map_err(CliError::from_core)?;
            let t = Instant::now();
            let d = decide(&a, &opts).map_err(CliError::from_core)?;
            times.push(t.elapsed().as_secs_f64() * 1e3);
            iters += d.iterations;
            converged += d.converged as usize;
        }
        let mean = times.iter().sum::<f64>() / count.max(1) as f64;
        let max = times.iter().copied().fold(0.0, f64::max);
        s += &format!(
            "{n},{count},{},{},{},{converged}\n",
            fmt_num(mean),
            fmt_num(max),
            fmt_num(iters as f64 / count.max(1) as f64)
        );
    }
    Ok(Outcome {
        code: EXIT_OK,
        stdout: s,
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Check { input } => cmd_check(input, g),
        Command::Construct {
            input,
            output,
            matrices,
        } => cmd_construct(input, output.as_deref(), *matrices, g),
        Command::Sweep {
            directions,
            eta_lo,
            eta_hi,
            tol_eta,
            output,
        } => cmd_sweep(directions, *eta_lo, *eta_hi, *tol_eta, output.as_deref(), g),
        Command::Repro => cmd_repro(g),
        Command::Steer { input } => cmd_steer(input, g),
        Command::Random { n, biased } => cmd_random(*n, *biased, g),
        Command::Bench { count, up_to } => cmd_bench(*count, *up_to, g),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            if out.write_all(o.stdout.as_bytes()).is_err() {
                return EXIT_OUTPUT;
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(fmt_num(7.957374095955123), "7.95737409596");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-1.0e-13), "-1e-13");
        assert_eq!(fmt_num(1.95585769802345e-11), "1.95585769802e-11");
        assert_eq!(fmt_num(2.0), "2");
    }

    #[test]
    fn exit_codes_are_total() {
        assert_eq!(exit_code(Verdict::JointlyMeasurable), 0);
        assert_eq!(exit_code(Verdict::NecessaryHolds), 0);
        assert_eq!(exit_code(Verdict::Incompatible), 1);
        assert_eq!(exit_code(Verdict::Inconclusive), 2);
    }
}
