//! `harmonic`: generate sampled functions, evaluate norms, verify single
//! inequalities, sweep a corpus and run Calderón–Zygmund decompositions.
//!
//! Exit codes: 0 when every check passes, 1 when a violation was found,
//! 2 for usage or configuration errors.

mod selftest;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmonic_core::bmo::{self, DyadicCube};
use harmonic_core::inequality::{self, sweep, Verifier};
use harmonic_core::{fourier, measure, solve_theta, Generator, GeneratorId, GridFunction64, GridSpec64, InequalityReport64};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Default seed for the random families.
pub const DEFAULT_SEED: u64 = 7;

/// Default half-width; leaves room for the Gaussian dilated by 2.
pub const DEFAULT_HALF_WIDTH: f64 = 6.0;

#[derive(Parser, Debug)]
#[command(name = "harmonic", version, about = "Interpolation inequalities on sampled grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a family and write it as GridFunction JSON.
    Gen(GenArgs),
    /// Print the norms of a function as one JSON object.
    Norm(NormArgs),
    /// Verify one inequality on one function.
    Verify(VerifyArgs),
    /// Verify one inequality over a corpus of families.
    Sweep(SweepArgs),
    /// Calderón–Zygmund decomposition on the root cube.
    Cz(CzArgs),
    /// Run the built-in invariant suite at the default grids.
    Selftest,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Dimension.
    #[arg(long = "n", default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: u8,
    /// Points per axis (power of two); defaults to 1024, 256, 64 for n = 1, 2, 3.
    #[arg(long = "N")]
    points: Option<usize>,
    /// Box half-width.
    #[arg(long = "L", default_value_t = DEFAULT_HALF_WIDTH)]
    half_width: f64,
    /// Family, e.g. gaussian, tent, log-abs, power-law(0.5), random-mix.
    /// Repeat for sweeps.
    #[arg(long = "family")]
    family: Vec<String>,
    /// Seed for random-mix and trig-poly when the family gives none.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Read the function from GridFunction JSON instead of sampling.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Write output here instead of standard output.
    #[arg(long = "out")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct Exponents {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Band radius.
    #[arg(long = "R")]
    radius: Option<f64>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Sharp spectral cutoff at this radius.
    #[arg(long = "R")]
    radius: Option<f64>,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    exp: Exponents,
    /// Finest dyadic level used for the BMO norm.
    #[arg(long = "max-level")]
    max_level: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Ineq {
    Gn1,
    Gn2,
    Lorentz,
    Eps,
    Bernstein,
    Young,
    YoungWeak,
    YoungSharp,
    Hy,
    Jn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    exp: Exponents,
    #[arg(long, value_enum)]
    ineq: Ineq,
    /// Second convolution operand for the Young checks (defaults to the first family).
    #[arg(long)]
    partner: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    report: Format,
    /// Moves theta off the solved value; gn1 only.
    #[arg(long = "perturb-theta", allow_hyphen_values = true)]
    perturb_theta: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    inner: VerifyArgs,
}

#[derive(Args, Debug)]
struct CzArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Threshold height.
    #[arg(long = "M")]
    threshold: f64,
}

/// A failure that ends the run with exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = std::result::Result<u8, Usage>;

/// Parses `argv` (program name first) and runs the command, writing results
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => gen(&a, out),
        Command::Norm(a) => norm(&a, out),
        Command::Verify(a) => verify(&a, out, err),
        Command::Sweep(a) => run_sweep(&a.inner, out, err),
        Command::Cz(a) => cz(&a, out, err),
        Command::Selftest => Ok(selftest::run(out)),
    };
    match outcome {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec64, Usage> {
        let n = self.dim as usize;
        let points = self.points.unwrap_or(match n {
            1 => 1024,
            2 => 256,
            _ => 64,
        });
        Ok(GridSpec64::new(n, self.half_width, points)?)
    }

    fn families(&self) -> Result<Vec<GeneratorId>, Usage> {
        self.family.iter().map(|f| parse_family(f, self.seed)).collect()
    }

    fn family_or(&self, default: GeneratorId) -> Result<GeneratorId, Usage> {
        Ok(self.families()?.into_iter().next().unwrap_or(default))
    }

    /// Reads `--in`, or samples the first family through `prepare`.
    fn function(&self, default: GeneratorId, prepare: impl Fn(Generator<f64>) -> Generator<f64>) -> Result<GridFunction64, Usage> {
        if let Some(path) = &self.input {
            let text = fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
            return Ok(GridFunction64::from_json(&text)?);
        }
        let recipe = prepare(Generator::plain(self.family_or(default)?));
        Ok(harmonic_core::sample_recipe(self.spec()?, &recipe)?)
    }

    fn emit(&self, text: &str, out: &mut dyn Write) -> Result<(), Usage> {
        match &self.output {
            Some(path) => fs::write(path, text).map_err(|e| Usage(format!("cannot write {}: {e}", path.display()))),
            None => out.write_all(text.as_bytes()).map_err(Usage::from),
        }
    }
}

/// Bare `random-mix` and `trig-poly` pick up `--seed`.
fn parse_family(s: &str, seed: u64) -> Result<GeneratorId, Usage> {
    let s = s.trim();
    let full = match s {
        "random-mix" => format!("random-mix({seed})"),
        "trig-poly" => format!("trig-poly({seed},4)"),
        _ => s.to_string(),
    };
    Ok(full.parse()?)
}

fn gen(a: &GenArgs, out: &mut dyn Write) -> Outcome {
    if a.grid.input.is_some() {
        return Err(Usage("gen samples a family; --in is not accepted".into()));
    }
    let f = a.grid.function(GeneratorId::Gaussian, |mut g| {
        g.band_limit = a.radius;
        g
    })?;
    a.grid.emit(&(f.to_json() + "\n"), out)?;
    Ok(EXIT_OK)
}

fn norm(a: &NormArgs, out: &mut dyn Write) -> Outcome {
    let f = a.grid.function(GeneratorId::Gaussian, |g| g)?;
    let p = a.exp.p.unwrap_or(2.0);
    let mut obj = serde_json::Map::new();
    let mut put = |k: &str, v: f64| {
        obj.insert(k.to_string(), serde_json::json!(v));
    };
    put("p", p);
    put("lp", harmonic_core::lp_quadrature(&f, p)?);
    put("sup", f.sup());
    if p.is_finite() {
        put("weak", measure::weak_norm(&f, p)?);
    }
    if let Some(r) = a.exp.r {
        put("r", r);
        put("lorentz", measure::lorentz_norm(&f, p, r)?);
    }
    if let Some(s) = a.exp.s {
        put("s", s);
        put("sobolev", fourier::sobolev_norm(&f, s)?);
    }
    let finest = bmo::finest_level(&f.spec);
    let level = a.max_level.unwrap_or(finest);
    if level > finest {
        return Err(Usage(format!("--max-level {level} exceeds the finest level {finest}")));
    }
    put("bmo", bmo::bmo_norm(&f, level)?);
    a.grid.emit(&(serde_json::Value::Object(obj).to_string() + "\n"), out)?;
    Ok(EXIT_OK)
}

fn build_verifier(a: &VerifyArgs, n: usize) -> Result<Verifier<f64>, Usage> {
    let e = &a.exp;
    let partner = || -> Result<GeneratorId, Usage> {
        match &a.partner {
            Some(p) => parse_family(p, a.grid.seed),
            None => a.grid.family_or(GeneratorId::Gaussian),
        }
    };
    if a.perturb_theta.is_some() && a.ineq != Ineq::Gn1 {
        return Err(Usage("--perturb-theta applies to gn1 only".into()));
    }
    let v = match a.ineq {
        Ineq::Gn1 => {
            let t = solve_theta(n, e.p.unwrap_or(4.0), e.q.unwrap_or(2.0), e.s.unwrap_or(1.0))?;
            Verifier::Gn1 {
                tuple: a.perturb_theta.map_or(t, |d| t.perturbed(d)),
            }
        }
        Ineq::Gn2 => Verifier::Gn2 {
            p: e.p.unwrap_or(4.0),
            q: e.q.unwrap_or(2.0),
        },
        Ineq::Lorentz => Verifier::Lorentz {
            p: e.p.unwrap_or(4.0),
            q: e.q.unwrap_or(2.0),
        },
        Ineq::Eps => Verifier::Eps { p: e.p.unwrap_or(4.0) },
        Ineq::Bernstein => Verifier::Bernstein {
            p: e.p.unwrap_or(2.0),
            q: e.q.unwrap_or(4.0),
            radius: e.radius.unwrap_or(4.0),
        },
        Ineq::Young | Ineq::YoungWeak | Ineq::YoungSharp => {
            let (p, q, r) = (e.p.unwrap_or(2.0), e.q.unwrap_or(1.0), e.r.unwrap_or(2.0));
            let partner = partner()?;
            match a.ineq {
                Ineq::Young => Verifier::Young { p, q, r, partner },
                Ineq::YoungWeak => Verifier::YoungWeak { p, q, r, partner },
                _ => Verifier::YoungSharp { p, q, r, partner },
            }
        }
        Ineq::Hy => Verifier::HausdorffYoung { p: e.p.unwrap_or(1.5) },
        Ineq::Jn => Verifier::JohnNirenberg { alphas: None },
    };
    Ok(v)
}

fn default_family(ineq: Ineq) -> GeneratorId {
    match ineq {
        Ineq::Gn2 | Ineq::Lorentz | Ineq::Jn => GeneratorId::LogAbs,
        _ => GeneratorId::Gaussian,
    }
}

fn write_reports(reports: &[InequalityReport64], jsonl: Option<String>, a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let text = match a.report {
        Format::Jsonl => jsonl.unwrap_or_else(|| {
            reports
                .iter()
                .map(|r| serde_json::to_string(r).expect("report serializes") + "\n")
                .collect()
        }),
        Format::Csv => inequality::reports_to_csv(reports),
    };
    a.grid.emit(&text, out)?;
    let mut code = EXIT_OK;
    for r in reports.iter().filter(|r| !r.passed()) {
        code = EXIT_VIOLATION;
        for v in &r.violations {
            let _ = writeln!(err, "violation: {} {}: {v}", r.name, r.function.as_deref().unwrap_or("-"));
        }
    }
    Ok(code)
}

fn verify(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (verifier, f) = match &a.grid.input {
        Some(_) => {
            let f = a.grid.function(GeneratorId::Gaussian, |g| g)?;
            (build_verifier(a, f.spec.n)?, f)
        }
        None => {
            let v = build_verifier(a, a.grid.spec()?.n)?;
            let f = a.grid.function(default_family(a.ineq), |g| v.recipe(&g))?;
            (v, f)
        }
    };
    let rep = verifier.run(&f)?;
    write_reports(&[rep], None, a, out, err)
}

fn run_sweep(a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if a.grid.input.is_some() {
        return Err(Usage("sweep samples its corpus; --in is not accepted".into()));
    }
    let spec = a.grid.spec()?;
    let verifier = build_verifier(a, spec.n)?;
    let mut corpus = a.grid.families()?;
    if corpus.is_empty() {
        corpus = default_corpus(a.ineq, spec.n, a.grid.seed);
    }
    let corpus: Vec<Generator<f64>> = corpus.into_iter().map(Generator::plain).collect();
    let report = sweep(&corpus, &[spec], &[1.0], &verifier);
    let jsonl = (a.report == Format::Jsonl).then(|| report.to_jsonl());
    write_reports(&report.reports, jsonl, a, out, err)
}

fn default_corpus(ineq: Ineq, n: usize, seed: u64) -> Vec<GeneratorId> {
    match ineq {
        Ineq::Gn2 | Ineq::Lorentz | Ineq::Jn => vec![
            GeneratorId::LogAbs,
            GeneratorId::PowerLaw { a: n as f64 / 4.0 },
            GeneratorId::PowerLaw { a: n as f64 / 2.0 },
        ],
        _ => vec![
            GeneratorId::Gaussian,
            GeneratorId::Tent,
            GeneratorId::RandomMix { seed },
            GeneratorId::RandomMix { seed: seed + 1 },
            GeneratorId::RandomMix { seed: seed + 2 },
        ],
    }
}

fn cz(a: &CzArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let f = a.grid.function(GeneratorId::Gaussian, |g| g)?;
    let root = DyadicCube::root(f.spec.n);
    let dec = bmo::cz_decompose(&f, &root, a.threshold)?;
    a.grid.emit(&(dec.to_json() + "\n"), out)?;
    let broken = dec.verify(&f);
    for msg in &broken {
        let _ = writeln!(err, "violation: cz: {msg}");
    }
    Ok(if broken.is_empty() { EXIT_OK } else { EXIT_VIOLATION })
}
