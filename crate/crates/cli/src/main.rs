use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use neutral_sampler::asymptotics::{
    ldp_slope_scan, lemma41_order_scan, moment_limit_scan, rate_function, weak_limit_point,
    LogRatio, PsiFamily, RegimeSpec, WeakLimit,
};
use neutral_sampler::basis::build_basis;
use neutral_sampler::combinatorics::{multinomial_constant, IntegerPartition};
use neutral_sampler::config::{parse_frequency_vector, parse_theta_grid, OutputFormat, RunConfig};
use neutral_sampler::error::Error;
use neutral_sampler::moments::{esf_monomial_moment, mixed_power_sum_moment, MutationRate};
use neutral_sampler::numeric::{format_float, format_rational, to_float, Float, Rational};
use neutral_sampler::sampling::{sampling_probability, FrequencyVector};
use neutral_sampler::transient::{moment_expansion, sampling_expansion, TimePoint, TransientValue};

mod verify;

#[derive(Parser)]
#[command(
    name = "neutral-sampler",
    version,
    about = "Exact sampling probabilities under the infinitely-many-neutral-alleles diffusion"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Float precision in bits (at least 64)
    #[arg(long, global = true)]
    precision: Option<usize>,
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format for tables
    #[arg(long, global = true)]
    format: Option<String>,
    /// Seed for pseudo-random test vectors
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest sample size accepted
    #[arg(long, global = true)]
    max_n: Option<usize>,
    /// Largest number of atoms accepted
    #[arg(long, global = true)]
    max_atoms: Option<usize>,
}

#[derive(Args)]
struct PointArgs {
    /// Atoms, e.g. 1/2,1/3,1/6
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// `auto` or the dust mass, which must equal 1 - sum(x)
    #[arg(long, default_value = "auto")]
    dust: String,
}

#[derive(Subcommand)]
enum Command {
    /// Sampling probability P(η) for a sample drawn from x
    SampleProb {
        #[arg(long)]
        eta: String,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Stationary moments under PD(θ)
    Moment {
        #[arg(long)]
        eta: String,
        /// Second label for the mixed moment <φ_η, φ_ξ>
        #[arg(long, default_value = "")]
        xi: String,
        #[arg(long)]
        theta: String,
    },
    /// Orthogonal basis up to a label size
    Basis {
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        #[arg(long)]
        theta: String,
    },
    /// Transient sampling probability or moment at time t
    Transient {
        #[arg(long)]
        eta: String,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        theta: String,
        /// Time, or `inf` for the stationary limit
        #[arg(long)]
        t: String,
        /// Evaluate E φ_η(X_t) instead of the sampling probability
        #[arg(long)]
        moment: bool,
    },
    /// E_x φ_ω(X_t(θ)) against its weak-limit prediction
    WeakLimitScan {
        #[arg(long)]
        omega: String,
        #[command(flatten)]
        point: PointArgs,
        /// c:<c>, k:<k>, k:inf, sublog or zero
        #[arg(long, default_value = "c:1")]
        regime: String,
        #[arg(long, default_value = "1e1:1e6:log")]
        theta_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measured θ-orders of <φ_η, 1> or <φ_η, ψ_ξ>
    Lemma41Scan {
        #[arg(long)]
        eta: String,
        #[arg(long, default_value = "")]
        xi: String,
        #[arg(long, default_value = "1e2:1e6:log")]
        theta_grid: String,
        /// orthogonal or unnormalized
        #[arg(long, default_value = "orthogonal")]
        family: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Large-deviation rate function
    RateFunction {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eta: String,
        /// Limit of θt/logθ: a positive rational, `inf`, or `0`
        #[arg(long)]
        k: String,
    },
    /// s(θ) = -log P / speed along a θ grid
    LdpScan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        k: String,
        #[arg(long, default_value = "1/2,1/3,1/6", allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "auto")]
        dust: String,
        #[arg(long, default_value = "1e2:1e8:log")]
        theta_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite
    Verify {
        /// orthogonality, oracle, normalization, consistency, transient, rate-function or all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
        #[arg(long, default_value = "1")]
        theta: String,
    },
}

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Limit(String),
    Run(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => CliError::Usage(e.to_string()),
            Error::Resource { .. } => CliError::Limit(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

pub(crate) type CliResult<T> = Result<T, CliError>;

struct Context {
    config: RunConfig,
}

fn load_config(global: &GlobalArgs) -> CliResult<RunConfig> {
    let mut config = RunConfig::from_env()?;
    if let Some(path) = &global.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        config.apply_text(&text)?;
    }
    if let Some(p) = global.precision {
        config.precision_bits = p;
    }
    if let Some(f) = &global.format {
        config.output_format = f.parse()?;
    }
    if let Some(s) = global.seed {
        config.seed = s;
    }
    if let Some(n) = global.max_n {
        config.caps.max_n = n;
    }
    if let Some(a) = global.max_atoms {
        config.caps.max_atoms = a;
    }
    config.validate()?;
    Ok(config)
}

fn partition(s: &str) -> CliResult<IntegerPartition> {
    Ok(IntegerPartition::parse(s)?)
}

fn theta(s: &str) -> CliResult<MutationRate> {
    Ok(MutationRate::parse(s)?)
}

fn rational(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

impl Context {
    fn precision(&self) -> usize {
        self.config.precision_bits
    }

    fn float(&self, x: &Float) -> String {
        format_float(x, self.precision())
    }

    fn exact_as_float(&self, r: &Rational) -> String {
        self.float(&to_float(r, self.precision()))
    }

    fn check_sample_size(&self, n: usize) -> CliResult<()> {
        if n > self.config.caps.max_n {
            return Err(CliError::Limit(format!(
                "sample size {n} exceeds max_n = {}",
                self.config.caps.max_n
            )));
        }
        Ok(())
    }

    fn point(&self, atoms: &str, dust: &str) -> CliResult<FrequencyVector> {
        let x = parse_frequency_vector(atoms, dust)?;
        if x.atoms().len() > self.config.caps.max_atoms {
            return Err(CliError::Limit(format!(
                "{} atoms exceed max_atoms = {}",
                x.atoms().len(),
                self.config.caps.max_atoms
            )));
        }
        Ok(x)
    }

    fn transient_value(&self, v: &TransientValue) -> (Value, Value) {
        match v {
            TransientValue::Point(p) => (Value::String(self.float(p)), Value::Null),
            TransientValue::Underflow { upper } => (Value::Null, Value::String(self.float(upper))),
        }
    }
}

fn x_json(x: &FrequencyVector) -> Value {
    json!({
        "atoms": x.atoms().iter().map(rational).collect::<Vec<_>>(),
        "dust": rational(x.dust()),
    })
}

fn print_json(v: &Value) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, v).map_err(|e| CliError::Run(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// Writes a table as CSV or JSON, to `out` when given.
fn emit_table(
    ctx: &Context,
    header: &[&str],
    rows: Vec<Vec<String>>,
    out: Option<&PathBuf>,
) -> CliResult<()> {
    let csv_wanted = ctx.config.output_format == OutputFormat::Csv
        || out.is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    let text = if csv_wanted {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in &rows {
            w.write_record(row)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| CliError::Run(e.to_string()))?)
            .expect("csv output is utf-8")
    } else {
        let objects: Vec<Value> = rows
            .iter()
            .map(|row| {
                let map = header
                    .iter()
                    .zip(row)
                    .map(|(h, v)| (h.to_string(), Value::String(v.clone())))
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(map)
            })
            .collect();
        format!("{}\n", Value::Array(objects))
    };
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context {
        config: load_config(&cli.global)?,
    };
    match cli.command {
        Command::SampleProb { eta, point } => {
            let eta = partition(&eta)?;
            ctx.check_sample_size(eta.size())?;
            let x = ctx.point(&point.x, &point.dust)?;
            let p = sampling_probability(&eta, &x);
            print_json(&json!({
                "eta": eta,
                "x": x_json(&x),
                "p_exact": rational(&p),
                "p_float": ctx.exact_as_float(&p),
            }))
        }
        Command::Moment { eta, xi, theta: th } => {
            let eta = partition(&eta)?;
            let xi = partition(&xi)?;
            let th = theta(&th)?;
            let mut out = json!({ "eta": eta, "theta": th.to_string() });
            if eta.is_power_sum_label() && xi.is_power_sum_label() {
                let m = mixed_power_sum_moment(&eta, &xi, &th)?;
                out["xi"] = json!(xi);
                out["power_sum_moment"] = rational(&m);
                out["power_sum_moment_float"] = Value::String(ctx.exact_as_float(&m));
            } else if !xi.is_empty() {
                return Err(CliError::Run(format!(
                    "mixed moments need parts >= 2, got {eta} and {xi}"
                )));
            }
            if !eta.is_empty() {
                let m = esf_monomial_moment(&eta, &th);
                out["esf_monomial_moment"] = rational(&m);
                out["esf_probability"] = rational(&(multinomial_constant(&eta) * m));
            }
            print_json(&out)
        }
        Command::Basis {
            max_size,
            theta: th,
        } => {
            let basis = build_basis(max_size, &theta(&th)?)?;
            print_json(
                &serde_json::to_value(basis.elements())
                    .map_err(|e| CliError::Run(e.to_string()))?,
            )
        }
        Command::Transient {
            eta,
            point,
            theta: th,
            t,
            moment,
        } => {
            let eta = partition(&eta)?;
            ctx.check_sample_size(eta.size())?;
            let x = ctx.point(&point.x, &point.dust)?;
            let th = theta(&th)?;
            let tp = TimePoint::parse(&t, th.clone(), ctx.precision())?;
            let basis = build_basis(eta.size(), &th)?;
            let expansion = if moment {
                if !eta.is_power_sum_label() {
                    return Err(CliError::Run(format!("moments need parts >= 2, got {eta}")));
                }
                moment_expansion(&eta, &x, &basis)?
            } else {
                sampling_expansion(&eta, &x, &basis)?
            };
            let value = expansion.evaluate(&tp)?;
            let (point_value, upper) = ctx.transient_value(&value);
            print_json(&json!({
                "eta": eta,
                "x": x_json(&x),
                "theta": th.to_string(),
                "t": t,
                "quantity": if moment { "moment" } else { "probability" },
                "value": point_value,
                "underflow": value.is_underflow(),
                "upper_bound": upper,
                "precision_bits": ctx.precision(),
                "stationary_value": rational(&expansion.stationary()),
                "t0_value": rational(&expansion.initial()),
            }))
        }
        Command::WeakLimitScan {
            omega,
            point,
            regime,
            theta_grid,
            out,
        } => {
            let omega = partition(&omega)?;
            let x = ctx.point(&point.x, &point.dust)?;
            let regime = RegimeSpec::parse(&regime)?;
            let grid = parse_theta_grid(&theta_grid)?;
            let limit = weak_limit_point(&x, &regime)?;
            eprintln!("{}", describe_limit(&ctx, &limit));
            let rows = moment_limit_scan(&omega, &x, &regime, &grid, ctx.precision())?
                .into_iter()
                .map(|r| {
                    vec![
                        format_rational(&r.theta),
                        ctx.float(&r.value),
                        ctx.float(&r.predicted),
                        ctx.float(&r.error),
                    ]
                })
                .collect();
            emit_table(
                &ctx,
                &["theta", "value", "predicted", "error"],
                rows,
                out.as_ref(),
            )
        }
        Command::Lemma41Scan {
            eta,
            xi,
            theta_grid,
            family,
            out,
        } => {
            let eta = partition(&eta)?;
            let xi = partition(&xi)?;
            let family = PsiFamily::parse(&family)?;
            let grid = parse_theta_grid(&theta_grid)?;
            let rows = lemma41_order_scan(&eta, &xi, &grid, family)?
                .into_iter()
                .map(|r| {
                    vec![
                        format_rational(&r.theta),
                        ctx.exact_as_float(&r.value),
                        r.exponent.map(|e| format!("{e:.6}")).unwrap_or_default(),
                        r.predicted_exponent.to_string(),
                        r.constant_ratio
                            .map(|c| format!("{c:.6}"))
                            .unwrap_or_default(),
                    ]
                })
                .collect();
            emit_table(
                &ctx,
                &[
                    "theta",
                    "value",
                    "exponent",
                    "predicted_exponent",
                    "constant_ratio",
                ],
                rows,
                out.as_ref(),
            )
        }
        Command::RateFunction { n, eta, k } => {
            let eta = partition(&eta)?;
            let result = rate_function(n, &eta, &LogRatio::parse(&k)?)?;
            print_json(&serde_json::to_value(result).map_err(|e| CliError::Run(e.to_string()))?)
        }
        Command::LdpScan {
            n,
            eta,
            k,
            x,
            dust,
            theta_grid,
            out,
        } => {
            let eta = partition(&eta)?;
            ctx.check_sample_size(n)?;
            let x = ctx.point(&x, &dust)?;
            let grid = parse_theta_grid(&theta_grid)?;
            let rows = ldp_slope_scan(n, &eta, &LogRatio::parse(&k)?, &x, &grid, ctx.precision())?
                .into_iter()
                .map(|r| {
                    let p = match &r.probability {
                        TransientValue::Point(v) => ctx.float(v),
                        TransientValue::Underflow { upper } => format!("[0,{}]", ctx.float(upper)),
                    };
                    let opt =
                        |v: &Option<Float>| v.as_ref().map(|v| ctx.float(v)).unwrap_or_default();
                    vec![format_rational(&r.theta), p, opt(&r.slope), opt(&r.gap)]
                })
                .collect();
            emit_table(
                &ctx,
                &["theta", "P", "s", "abs_s_minus_I"],
                rows,
                out.as_ref(),
            )
        }
        Command::Verify {
            suite,
            max_size,
            theta: th,
        } => verify::run(&ctx.config, &suite, max_size, &theta(&th)?),
    }
}

fn describe_limit(ctx: &Context, limit: &WeakLimit) -> String {
    let atoms: Vec<String> = limit
        .atoms(ctx.precision())
        .iter()
        .map(|a| ctx.float(a))
        .collect();
    let kind = match limit {
        WeakLimit::PureDust => "pure dust",
        WeakLimit::Scaled { .. } => "scaled",
        WeakLimit::Identity(_) => "identity",
    };
    format!("weak limit: {kind} [{}]", atoms.join(", "))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(CliError::Limit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
