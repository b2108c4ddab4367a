//! Command dispatch for the `finv` binary.
//!
//! Exit codes: 0 success, 1 usage, 2 parse or validation failure,
//! 3 size cap exceeded, 4 disagreement between routes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use finv::corpus::run_corpus;
use finv::fentropy::{exact_structure, resolve_mode, DirectSumReport, EntropyReport};
use finv::marginals::{marginal, oracle_marginal};
use finv::report::{render_report, sig7, table, Format, Units};
use finv::systems::Tolerance;
use finv::word::ball_size;
use finv::{
    ComputeOptions, Conditioning, EntropyValue, Error, ExecPolicy, FEntropy, LetterOrder, NumericMode, Rational,
    Route, System, SystemSpec, Value, Weight, Word, DEFAULT_PATTERN_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_DISAGREE: i32 = 4;

/// Tolerance for route agreement when either side is a float.
pub const AGREEMENT_TOL: f64 = 1e-9;

/// Validation tolerance applied in float mode.
pub const FLOAT_VALIDATION_TOL: f64 = 1e-12;

#[derive(Parser, Debug, Clone)]
#[command(name = "finv", version, about = "f-invariant entropy of free-group actions")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Rank of the free group; must match the input file when given.
    #[arg(long, global = true)]
    pub rank: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,

    /// Letter order used to break ties within a sphere, e.g. `bBaA`.
    #[arg(long, global = true)]
    pub order: Option<String>,

    /// Maximum number of label patterns a single enumeration may visit.
    #[arg(long, global = true, env = "FINV_CAP", default_value_t = DEFAULT_PATTERN_CAP,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,

    /// Report entropies in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,

    /// Run on the calling thread only.
    #[arg(long, global = true)]
    pub serial: bool,

    /// Condition on the component partition of a direct sum.
    #[arg(long, global = true)]
    pub relative: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check a system description; optionally print its canonical form.
    Validate {
        input: PathBuf,
        #[arg(long)]
        normalize: bool,
    },
    /// All applicable routes side by side, with agreement status.
    F {
        input: PathBuf,
        /// Ball and sphere radius; the decay series runs one further.
        #[arg(long, default_value_t = 1)]
        radius: usize,
    },
    /// `δ(g)` for every `g` in the ball, in order, with the running value.
    DecayProfile {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
    /// Sphere increments `H(B_{n+1} / B_n)` with roots and ratios.
    Growth {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
    /// Cyclic-subgroup conditional entropy of `B_n` given `depth` past shifts.
    Ks {
        input: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1)]
        radius: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Ball functional against rank-weighted cyclic entropies.
    Rformula {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        radius: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Direct-sum identity evaluated both ways.
    Decompose {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        radius: usize,
    },
    /// Built-in regression systems against stored expectations.
    Corpus,
    /// Joint law of the labels on a finite set, e.g. `--set e,a,ab`.
    Marginal {
        input: PathBuf,
        #[arg(long)]
        set: String,
        /// Also compute by brute force and compare.
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Auto,
    Rational,
    Float,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatArg {
    Text,
    Csv,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Usage(String),
    Disagree,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Out<T> = std::result::Result<T, Failure>;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::InvalidSystem(_)
        | Error::InvalidDistribution(_)
        | Error::NotGenerating(_)
        | Error::MismatchedSpaces(..)
        | Error::RankMismatch(_) => EXIT_INVALID,
        Error::InvalidWord(_)
        | Error::IdentityInput
        | Error::Disconnected { .. }
        | Error::NotSubset(_)
        | Error::Unsupported(_) => EXIT_USAGE,
    }
}

struct Ctx {
    cfg: RunConfig,
    units: Units,
    format: Format,
}

impl Ctx {
    fn mode(&self) -> NumericMode {
        match self.cfg.mode {
            ModeArg::Auto => NumericMode::Auto,
            ModeArg::Rational => NumericMode::Rational,
            ModeArg::Float => NumericMode::Float,
        }
    }

    fn cond(&self) -> Conditioning {
        if self.cfg.relative {
            Conditioning::Components
        } else {
            Conditioning::Trivial
        }
    }

    fn options(&self, rank: usize) -> Out<ComputeOptions> {
        let order = match &self.cfg.order {
            Some(s) => LetterOrder::parse(s, rank)?,
            None => LetterOrder::Canonical,
        };
        Ok(ComputeOptions {
            order,
            pattern_cap: self.cfg.cap,
            policy: if self.cfg.serial { ExecPolicy::Serial } else { ExecPolicy::default() },
            ..Default::default()
        })
    }

    fn tolerance(&self) -> Tolerance {
        match self.cfg.mode {
            ModeArg::Float => Tolerance::Float(FLOAT_VALIDATION_TOL),
            _ => Tolerance::Exact,
        }
    }

    fn load(&self, path: &Path) -> Out<System> {
        let sys = self.parse(path)?;
        let report = sys.validate(self.tolerance());
        if !report.is_ok() {
            return Err(Error::Validation(report).into());
        }
        Ok(sys)
    }

    fn parse(&self, path: &Path) -> Out<System> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let sys = System::parse_toml(&src)?;
        if let Some(r) = self.cfg.rank {
            if r != sys.rank {
                return Err(Error::RankMismatch(format!("--rank {r} but the file declares rank {}", sys.rank)).into());
            }
        }
        Ok(sys)
    }

    /// Arithmetic for computations whose largest set has `largest` elements.
    fn resolve(&self, sys: &System, largest: u128) -> NumericMode {
        resolve_mode(self.mode(), &sys.spec, largest.min(u32::MAX as u128) as usize)
    }

    fn v(&self, v: &Value) -> String {
        self.units.value(v)
    }
}

/// Runs one command, writing the report to `out` and diagnostics to `err`.
pub fn run(cfg: RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let ctx = Ctx {
        units: Units { bits: cfg.bits },
        format: match cfg.format {
            FormatArg::Text => Format::Text,
            FormatArg::Csv => Format::Csv,
        },
        cfg,
    };
    let mut buf = String::new();
    let result = dispatch(&ctx, &mut buf);
    let _ = out.write_all(buf.as_bytes());
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Disagree) => {
            let _ = writeln!(err, "error: routes disagree beyond tolerance");
            EXIT_DISAGREE
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(ctx: &Ctx, out: &mut String) -> Out<()> {
    match &ctx.cfg.command {
        Command::Validate { input, normalize } => validate(ctx, input, *normalize, out),
        Command::F { input, radius } => {
            let sys = ctx.load(input)?;
            match ctx.resolve(&sys, ball_size(sys.rank, radius + 1)) {
                NumericMode::Float => f_routes::<f64>(ctx, &sys, *radius, out),
                _ => f_routes::<Rational>(ctx, &sys, *radius, out),
            }
        }
        Command::DecayProfile { input, radius } => {
            let sys = ctx.load(input)?;
            match ctx.resolve(&sys, ball_size(sys.rank, *radius)) {
                NumericMode::Float => decay::<f64>(ctx, &sys, *radius, out),
                _ => decay::<Rational>(ctx, &sys, *radius, out),
            }
        }
        Command::Growth { input, radius } => {
            let sys = ctx.load(input)?;
            match ctx.resolve(&sys, ball_size(sys.rank, radius + 1)) {
                NumericMode::Float => growth::<f64>(ctx, &sys, *radius, out),
                _ => growth::<Rational>(ctx, &sys, *radius, out),
            }
        }
        Command::Ks {
            input,
            word,
            radius,
            depth,
        } => {
            let sys = ctx.load(input)?;
            let g: Word = word.parse()?;
            let largest = ball_size(sys.rank, *radius) * (*depth as u128 + 1);
            match ctx.resolve(&sys, largest) {
                NumericMode::Float => ks::<f64>(ctx, &sys, &g, *radius, *depth, out),
                _ => ks::<Rational>(ctx, &sys, &g, *radius, *depth, out),
            }
        }
        Command::Rformula { input, radius, depth } => {
            let sys = ctx.load(input)?;
            let largest = ball_size(sys.rank, *radius) * (*depth as u128 + 1);
            match ctx.resolve(&sys, largest) {
                NumericMode::Float => rformula::<f64>(ctx, &sys, *radius, *depth, out),
                _ => rformula::<Rational>(ctx, &sys, *radius, *depth, out),
            }
        }
        Command::Decompose { input, radius } => {
            let sys = ctx.load(input)?;
            match ctx.resolve(&sys, ball_size(sys.rank, radius + 1)) {
                NumericMode::Float => decompose::<f64>(ctx, &sys, *radius, out),
                _ => decompose::<Rational>(ctx, &sys, *radius, out),
            }
        }
        Command::Corpus => {
            let outcome = run_corpus(&ctx.options(1)?, ctx.mode());
            out.push_str(&outcome.render());
            if outcome.ok() {
                Ok(())
            } else {
                Err(Failure::Disagree)
            }
        }
        Command::Marginal { input, set, oracle } => {
            let sys = ctx.load(input)?;
            let words = parse_set(set)?;
            match ctx.resolve(&sys, words.len() as u128) {
                NumericMode::Float => marginal_cmd::<f64>(ctx, &sys, &words, *oracle, out),
                _ => marginal_cmd::<Rational>(ctx, &sys, &words, *oracle, out),
            }
        }
    }
}

fn parse_set(s: &str) -> Out<Vec<Word>> {
    s.split(',')
        .map(|w| w.trim())
        .filter(|w| !w.is_empty())
        .map(|w| w.parse::<Word>().map_err(Failure::from))
        .collect()
}

fn validate(ctx: &Ctx, input: &Path, normalize: bool, out: &mut String) -> Out<()> {
    let sys = ctx.parse(input)?;
    let report = sys.validate(ctx.tolerance());
    if !report.is_ok() {
        return Err(Error::Validation(report).into());
    }
    let part = sys.canonical_partition()?;
    writeln!(out, "valid: {} system, rank {}", sys.spec.kind(), sys.rank).unwrap();
    writeln!(out, "partition: {}", part.description).unwrap();
    if normalize {
        out.push_str(&sys.to_toml_string());
    }
    Ok(())
}

struct RouteRow {
    route: String,
    truncation: String,
    value: Value,
    exact: bool,
    status: &'static str,
}

fn f_routes<W: Weight>(ctx: &Ctx, sys: &System, n: usize, out: &mut String) -> Out<()> {
    let fe = FEntropy::new(sys, ctx.options(sys.rank)?)?;
    let cond = ctx.cond();
    let exact = exact_structure(&sys.spec);
    let ball = fe.f_ball::<W>(n, cond)?.into_value();
    let sphere = fe.f_sphere::<W>(n, cond)?.into_value();
    let decay = fe.f_decay::<W>(n + 1, cond)?;

    let agree = |a: &Value, b: &Value| a.agrees(b, AGREEMENT_TOL);
    let mark = |ok: bool, pass: &'static str| if ok { pass } else { "DISAGREE" };
    let mut rows = vec![RouteRow {
        route: Route::BallLimit.to_string(),
        truncation: format!("n={n}"),
        value: ball.clone(),
        exact,
        status: "reference",
    }];
    if exact {
        rows.push(RouteRow {
            route: Route::SphereFormula.to_string(),
            truncation: format!("n={n}"),
            status: mark(agree(&sphere, &ball), "agree"),
            value: sphere.clone(),
            exact,
        });
        rows.push(RouteRow {
            route: Route::DecaySeries.to_string(),
            truncation: format!("R={}", n + 1),
            status: mark(agree(&decay.value, &ball), "agree"),
            value: decay.value.clone(),
            exact,
        });
    } else {
        // Truncations of different routes only bound one another.
        rows.push(RouteRow {
            route: Route::SphereFormula.to_string(),
            truncation: format!("n={n}"),
            status: mark(sphere.to_f64() <= ball.to_f64() + AGREEMENT_TOL, "below ball"),
            value: sphere.clone(),
            exact,
        });
        rows.push(RouteRow {
            route: Route::DecaySeries.to_string(),
            truncation: format!("R={}", n + 1),
            status: mark(agree(&decay.value, &sphere), "equals sphere"),
            value: decay.value.clone(),
            exact,
        });
    }
    match &sys.spec {
        SystemSpec::FiniteAction(fa) if fa.partition.is_none() && cond == Conditioning::Trivial => {
            let r = fe.f_atomic::<W>()?;
            rows.push(RouteRow {
                route: r.route.to_string(),
                truncation: r.truncation.clone(),
                status: mark(agree(&r.value, &ball), "agree"),
                value: r.value,
                exact: true,
            });
        }
        SystemSpec::DirectSum(_) => {
            let d = fe.f_direct_sum::<W>(n)?;
            let reference = if cond == Conditioning::Components {
                &d.relative_expected
            } else {
                &d.formula
            };
            rows.push(RouteRow {
                route: Route::DirectSum.to_string(),
                truncation: format!("n={n}"),
                status: mark(agree(reference, &ball), "agree"),
                value: reference.clone(),
                exact: d.exact,
            });
        }
        _ => {}
    }

    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.route.clone(),
                r.truncation.clone(),
                ctx.v(&r.value),
                r.exact.to_string(),
                r.status.to_string(),
            ]
        })
        .collect();
    let ok = rows.iter().all(|r| r.status != "DISAGREE");
    if ctx.format == Format::Text {
        writeln!(
            out,
            "system: {}, rank {}, mode {}, units {}",
            sys.spec.kind(),
            sys.rank,
            W::mode_name(),
            ctx.units.name()
        )
        .unwrap();
    }
    out.push_str(&table(&["route", "truncation", "value", "exact", "status"], &body, ctx.format));
    if ctx.format == Format::Text {
        if let Some(t) = decay.tail {
            writeln!(out, "decay last-sphere contribution: {}", sig7(ctx.units.convert(t))).unwrap();
        }
        writeln!(out, "status: {}", if ok { "agree" } else { "DISAGREE" }).unwrap();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Disagree)
    }
}

fn decay<W: Weight>(ctx: &Ctx, sys: &System, radius: usize, out: &mut String) -> Out<()> {
    let fe = FEntropy::new(sys, ctx.options(sys.rank)?)?;
    let report: EntropyReport = fe.f_decay::<W>(radius, ctx.cond())?;
    out.push_str(&render_report(&report, ctx.format, ctx.units));
    Ok(())
}

fn growth<W: Weight>(ctx: &Ctx, sys: &System, radius: usize, out: &mut String) -> Out<()> {
    let fe = FEntropy::new(sys, ctx.options(sys.rank)?)?;
    let rows = fe.growth_profile::<W>(radius, ctx.cond())?;
    let opt = |x: Option<f64>| x.map(sig7).unwrap_or_else(|| "-".into());
    let body: Vec<[String; 4]> = rows
        .iter()
        .map(|r| [r.n.to_string(), ctx.v(&r.increment), opt(r.root), opt(r.ratio)])
        .collect();
    out.push_str(&table(&["n", "increment", "root", "ratio"], &body, ctx.format));
    Ok(())
}

fn ks<W: Weight>(ctx: &Ctx, sys: &System, g: &Word, n: usize, k: usize, out: &mut String) -> Out<()> {
    let fe = FEntropy::new(sys, ctx.options(sys.rank)?)?;
    let mut body = Vec::new();
    for depth in 1..=k {
        let v = fe.ks_cyclic::<W>(g, n, depth, ctx.cond())?.into_value();
        body.push([depth.to_string(), ctx.v(&v)]);
    }
    if ctx.format == Format::Text {
        writeln!(out, "g = {g}, n = {n}").unwrap();
    }
    out.push_str(&table(&["depth", "conditional_entropy"], &body, ctx.format));
    Ok(())
}

fn rformula<W: Weight>(ctx: &Ctx, sys: &System, n: usize, depth: usize, out: &mut String) -> Out<()> {
    let fe = FEntropy::new(sys, ctx.options(sys.rank)?)?;
    let c = fe.rformula_check::<W>(n, depth, ctx.cond())?;
    let body: Vec<[String; 4]> = c
        .terms
        .iter()
        .map(|(s, v, d, stable)| [s.to_string(), ctx.v(v), d.to_string(), stable.to_string()])
        .collect();
    let right = match &c.right {
        Some(v) => ctx.v(v),
        None => format!(
            "[{}, {}]",
            sig7(ctx.units.convert(c.right_interval.0)),
            sig7(ctx.units.convert(c.right_interval.1))
        ),
    };
    // Conditioning on more of the past can only lower each cyclic term.
    let ok = c.right_interval.1 <= c.left.to_f64() + AGREEMENT_TOL;
    match ctx.format {
        Format::Text => {
            writeln!(out, "left (ball functional, n={n}): {}", ctx.v(&c.left)).unwrap();
            writeln!(out, "right (cyclic terms): {right}").unwrap();
            out.push_str(&table(&["generator", "term", "depth", "stable"], &body, Format::Text));
            writeln!(out, "status: {}", if ok { "right <= left" } else { "VIOLATED" }).unwrap();
        }
        Format::Csv => out.push_str(&table(&["generator", "term", "depth", "stable"], &body, Format::Csv)),
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Disagree)
    }
}

fn decompose<W: Weight>(ctx: &Ctx, sys: &System, n: usize, out: &mut String) -> Out<()> {
    let fe = FEntropy::new(sys, ctx.options(sys.rank)?)?;
    let d: DirectSumReport = fe.f_direct_sum::<W>(n)?;
    let SystemSpec::DirectSum(spec) = &sys.spec else {
        unreachable!("f_direct_sum rejects other systems")
    };
    let agree = |a: &Value, b: &Value| a.agrees(b, AGREEMENT_TOL);
    let whole = agree(&d.direct, &d.formula);
    let relative = agree(&d.relative, &d.relative_expected);
    let mut rows: Vec<[String; 3]> = d
        .components
        .iter()
        .zip(&spec.weights)
        .enumerate()
        .map(|(i, (f, w))| [format!("component {i} (weight {})", w), ctx.v(f), String::new()])
        .collect();
    rows.push(["H(weights)".into(), ctx.v(&d.weights_entropy), String::new()]);
    rows.push(["formula".into(), ctx.v(&d.formula), String::new()]);
    rows.push([format!("direct n={n}"), ctx.v(&d.direct), ok_str(whole).into()]);
    rows.push(["sum of weighted f".into(), ctx.v(&d.relative_expected), String::new()]);
    rows.push([format!("relative n={n}"), ctx.v(&d.relative), ok_str(relative).into()]);
    out.push_str(&table(&["quantity", "value", "status"], &rows, ctx.format));
    if ctx.format == Format::Text {
        writeln!(out, "exact: {}", d.exact).unwrap();
    }
    if whole && relative {
        Ok(())
    } else {
        Err(Failure::Disagree)
    }
}

fn ok_str(ok: bool) -> &'static str {
    if ok {
        "agree"
    } else {
        "DISAGREE"
    }
}

fn marginal_cmd<W: Weight>(ctx: &Ctx, sys: &System, set: &[Word], oracle: bool, out: &mut String) -> Out<()> {
    let opts = ctx.options(sys.rank)?;
    let pd = marginal::<W>(sys, set, &opts)?;
    writeln!(
        out,
        "support: {}",
        pd.support().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
    )
    .unwrap();
    out.push_str(&pd.dump());
    writeln!(out, "entropy: {}", ctx.units.value(&pd.entropy().into_value())).unwrap();
    if oracle {
        let brute = oracle_marginal::<W>(sys, set, opts.pattern_cap)?;
        let same = brute.len() == pd.len()
            && brute
                .probs()
                .iter()
                .all(|(k, p)| pd.probs().get(k).is_some_and(|q| q.close(p)));
        writeln!(out, "oracle: {}", if same { "identical" } else { "DIFFERENT" }).unwrap();
        if !same {
            return Err(Failure::Disagree);
        }
    }
    Ok(())
}

/// Parses arguments, printing help or usage errors; `Err` carries the exit code.
pub fn parse_args<I, T>(args: I) -> std::result::Result<RunConfig, i32>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(c) => Ok(c),
        Err(e) => {
            let _ = e.print();
            Err(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK })
        }
    }
}
