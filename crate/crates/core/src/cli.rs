//! Command-line front end. [`run`] never panics and returns 0, 1 or 2.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::catalog::{
    identity_mechanism, optimal_adp_mechanism, optimal_ml_mechanism, q_delta_mechanism, uniform_mechanism,
    wang_mechanism,
};
use crate::composition::{adp_sandwich, composed_loss_law, composed_pd};
use crate::error::Error;
use crate::global::{global_bounds, BoundPair};
use crate::local::{
    adp_known_prior, adp_source_set_class2, class1_pd, dp_known_prior, ml_known_prior, sort_with_permutation,
};
use crate::model::{
    expected_distortion, row_distortion, Mechanism, Prior, PrivacyNotion, ProductSpace, SourceClass, SourceSet,
};
use crate::oracle::{verify_closed_forms, NotionKind, VerifyOptions};
use crate::privacy::eval_loss;

#[derive(Parser, Debug)]
#[command(name = "putlab", version, about = "Privacy-utility trade-offs for finite mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Privacy-distortion curves as CSV (`D,notion,lower,upper,exact`).
    Curve(CurveArgs),
    /// Privacy losses of a mechanism stored as JSON.
    Eval(EvalArgs),
    /// Build a named mechanism and write it as JSON.
    Construct(ConstructArgs),
    /// Cross-check the closed forms against the brute-force oracles.
    Verify(VerifyArgs),
    /// Losses of the n-fold parallel composition of a mechanism.
    Compose(ComposeArgs),
}

#[derive(Args, Debug, Default)]
struct NotionFlags {
    #[arg(long)]
    dp: bool,
    /// Approximate DP with this δ (repeatable).
    #[arg(long, value_name = "DELTA")]
    adp: Vec<f64>,
    #[arg(long, alias = "maxinfo")]
    max_info: bool,
    /// Maximal leakage.
    #[arg(long)]
    ml: bool,
    /// Rényi DP of order α (repeatable).
    #[arg(long, value_name = "ALPHA")]
    rdp: Vec<f64>,
    /// Sibson mutual information of order α (repeatable).
    #[arg(long, value_name = "ALPHA")]
    sibson: Vec<f64>,
    #[arg(long, alias = "mi")]
    mutual_info: bool,
}

impl NotionFlags {
    fn notions(&self) -> Result<Vec<PrivacyNotion>, Failure> {
        let mut out = Vec::new();
        if self.dp {
            out.push(PrivacyNotion::Dp);
        }
        for &d in &self.adp {
            out.push(PrivacyNotion::approx_dp(d)?);
        }
        if self.max_info {
            out.push(PrivacyNotion::MaxInfo);
        }
        if self.ml {
            out.push(PrivacyNotion::MaxLeakage);
        }
        for &a in &self.rdp {
            out.push(PrivacyNotion::renyi(a)?);
        }
        for &a in &self.sibson {
            out.push(PrivacyNotion::sibson(a)?);
        }
        if self.mutual_info {
            out.push(PrivacyNotion::MutualInfo);
        }
        if out.is_empty() {
            return Err(Failure::usage("no privacy notion requested"));
        }
        out.sort_by(|a, b| {
            a.rank().cmp(&b.rank()).then(a.parameter().unwrap_or(0.0).total_cmp(&b.parameter().unwrap_or(0.0)))
        });
        out.dedup();
        Ok(out)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Setting {
    Local,
    Global,
    Composed,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, value_enum, default_value = "local")]
    setting: Setting,
    /// Alphabet size; implied by `--prior` or `--family` when omitted.
    #[arg(long)]
    m: Option<usize>,
    /// Number of coordinates (global and composed settings).
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Designer knows nothing about the prior.
    #[arg(long)]
    class1: bool,
    /// Known prior: comma-separated probabilities or a JSON file.
    #[arg(long)]
    prior: Option<String>,
    /// One member of a finite family of priors (repeatable).
    #[arg(long)]
    family: Vec<String>,
    #[command(flatten)]
    notions: NotionFlags,
    #[arg(long, default_value_t = 0.01)]
    start: f64,
    /// Last grid point; defaults to 0.99 n.
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long, default_value_t = 99)]
    points: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script that plots the CSV.
    #[arg(long, value_name = "PATH")]
    gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Mechanism JSON file.
    mechanism: PathBuf,
    /// Prior: comma-separated probabilities or a JSON file.
    #[arg(long)]
    prior: Option<String>,
    #[command(flatten)]
    notions: NotionFlags,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Named {
    Wang,
    Uniform,
    Identity,
    Qdelta,
    OptimalAdp,
    OptimalMl,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(value_enum)]
    name: Named,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Distortion budget.
    #[arg(long = "D", value_name = "D")]
    d: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Prior for the optimal constructions: comma-separated or a JSON file.
    #[arg(long)]
    prior: Option<String>,
    /// JSON destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Restrict to notion families: dp, adp, maxinfo, ml, rdp, sibson, mi.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// JSON report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ComposeArgs {
    /// Base mechanism JSON file on a single coordinate.
    mechanism: PathBuf,
    #[arg(long)]
    n: usize,
    /// Prior of one coordinate: comma-separated or a JSON file.
    #[arg(long)]
    prior: Option<String>,
    #[command(flatten)]
    notions: NotionFlags,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verification,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Curve(a) => curve(a),
        Command::Eval(a) => eval(a),
        Command::Construct(a) => construct(a),
        Command::Verify(a) => verify(a),
        Command::Compose(a) => compose(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Verification) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(std::io::stderr(), "putlab: {msg}");
            2
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{:.12}", v + 0.0)
    }
}

fn parse_probs(spec: &str) -> Result<Vec<f64>, Failure> {
    let looks_inline = spec.contains(',') || spec.trim().parse::<f64>().is_ok();
    if !looks_inline {
        let text = std::fs::read_to_string(spec).map_err(|e| Failure::usage(format!("{spec}: {e}")))?;
        return Ok(Prior::from_json(&text)?.probs().to_vec());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad probability {s:?}"))))
        .collect()
}

/// A prior on `space`, or on one coordinate of it extended i.i.d.
fn prior_on(spec: &str, space: ProductSpace) -> Result<Prior, Failure> {
    let probs = parse_probs(spec)?;
    if probs.len() == space.size() {
        Ok(Prior::new(space, probs)?)
    } else if probs.len() == space.m() {
        Ok(Prior::iid(&Prior::local(&probs)?, space.n())?)
    } else {
        Err(Failure::usage(format!("prior has {} entries; expected {} or {}", probs.len(), space.m(), space.size())))
    }
}

fn grid(start: f64, stop: f64, points: usize, n: usize) -> Result<Vec<f64>, Failure> {
    if points == 0 {
        return Err(Failure::usage("empty D grid"));
    }
    let top = n as f64;
    if !(start > 0.0 && stop <= top && (start < stop || (points == 1 && start <= top))) {
        return Err(Failure::usage(format!("D grid must be strictly increasing within (0, {top}]")));
    }
    let step = if points > 1 { (stop - start) / (points - 1) as f64 } else { 0.0 };
    // values are rounded to the printed precision so each row is computed at its label
    (0..points)
        .map(|i| {
            let d = if i + 1 == points { stop.max(start) } else { start + step * i as f64 };
            format!("{d:.12}").parse::<f64>().map_err(|_| Failure::usage("bad grid point"))
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(|g| {
            if g.windows(2).all(|w| w[0] < w[1]) {
                Ok(g)
            } else {
                Err(Failure::usage("D grid is not strictly increasing at 12 decimals"))
            }
        })
}

/// Relabels a family so the first member is non-increasing.
fn sorted_family(members: Vec<Vec<f64>>) -> Result<Vec<Prior>, Failure> {
    let (_, perm) = sort_with_permutation(&members[0]);
    members
        .iter()
        .map(|p| {
            if p.len() != perm.len() {
                return Err(Failure::usage("family members differ in size"));
            }
            Ok(Prior::local(&perm.iter().map(|&i| p[i]).collect::<Vec<_>>())?)
        })
        .collect()
}

fn curve_source(a: &CurveArgs) -> Result<SourceSet, Failure> {
    let given = usize::from(a.class1) + usize::from(a.prior.is_some()) + usize::from(!a.family.is_empty());
    if given != 1 {
        return Err(Failure::usage("give exactly one of --class1, --prior, --family"));
    }
    let n = if a.setting == Setting::Global { a.n } else { 1 };
    if a.class1 {
        let m = a.m.ok_or_else(|| Failure::usage("--class1 needs --m"))?;
        return Ok(SourceSet::FullSimplex(ProductSpace::new(m, n)?));
    }
    let specs: Vec<&str> = match &a.prior {
        Some(p) => vec![p.as_str()],
        None => a.family.iter().map(String::as_str).collect(),
    };
    let raw = specs.iter().map(|s| parse_probs(s)).collect::<Result<Vec<_>, _>>()?;
    let m = a.m.unwrap_or(raw[0].len());
    if a.setting == Setting::Global {
        let space = ProductSpace::new(m, n)?;
        let mut members = specs.iter().map(|s| prior_on(s, space)).collect::<Result<Vec<_>, _>>()?;
        return Ok(if members.len() == 1 {
            SourceSet::Singleton(members.remove(0))
        } else {
            SourceSet::family(members)?
        });
    }
    if raw.iter().any(|p| p.len() != m) {
        return Err(Failure::usage(format!("priors must have m = {m} entries")));
    }
    let mut members = sorted_family(raw)?;
    Ok(if members.len() == 1 { SourceSet::Singleton(members.remove(0)) } else { SourceSet::family(members)? })
}

fn local_point(notion: PrivacyNotion, s: &SourceSet, d: f64) -> Result<BoundPair, Error> {
    if s.classify() == SourceClass::ClassI {
        return class1_pd(notion, d, s);
    }
    match (s, notion) {
        (SourceSet::Singleton(p), PrivacyNotion::Dp) => dp_known_prior(p, d).map(BoundPair::exact),
        (SourceSet::Singleton(p), PrivacyNotion::ApproxDp { delta }) => {
            adp_known_prior(p, d, delta).map(BoundPair::exact)
        }
        (SourceSet::Singleton(p), PrivacyNotion::MaxLeakage) => ml_known_prior(p, d).map(BoundPair::exact),
        (SourceSet::FiniteFamily(_), PrivacyNotion::Dp | PrivacyNotion::ApproxDp { .. })
            if s.common_ordering().is_some() =>
        {
            adp_source_set_class2(s, d, notion.parameter().unwrap_or(0.0)).map(BoundPair::exact)
        }
        _ => global_bounds(notion, s, s.space(), d),
    }
}

fn curve(a: CurveArgs) -> Result<(), Failure> {
    let notions = a.notions.notions()?;
    if a.setting == Setting::Local && a.n != 1 {
        return Err(Failure::usage("the local setting has n = 1"));
    }
    if a.n == 0 {
        return Err(Failure::usage("n must be at least 1"));
    }
    let source = curve_source(&a)?;
    let stop = a.stop.unwrap_or(0.99 * a.n as f64);
    let ds = grid(a.start, stop, a.points, if a.setting == Setting::Local { 1 } else { a.n })?;
    let cells: Vec<(f64, PrivacyNotion)> = ds.iter().flat_map(|&d| notions.iter().map(move |&k| (d, k))).collect();
    let rows = cells
        .par_iter()
        .map(|&(d, notion)| {
            let pair = match a.setting {
                Setting::Local => local_point(notion, &source, d),
                Setting::Global => global_bounds(notion, &source, source.space(), d),
                Setting::Composed => composed_pd(notion, a.n, d, &source),
            }?;
            Ok(format!(
                "{:.12},{},{},{},{}\n",
                d,
                notion.label(),
                fmt_value(pair.lower),
                fmt_value(pair.upper),
                pair.exact
            ))
        })
        .collect::<Result<Vec<String>, Error>>()?;
    let mut csv = String::from("D,notion,lower,upper,exact\n");
    rows.iter().for_each(|r| csv.push_str(r));
    emit(a.out.as_deref(), &csv)?;
    if let Some(script) = &a.gnuplot {
        let data = a.out.as_deref().map(|p| p.display().to_string()).unwrap_or_else(|| "curve.csv".into());
        std::fs::write(script, gnuplot_script(&data, &notions))?;
    }
    Ok(())
}

fn gnuplot_script(data: &str, notions: &[PrivacyNotion]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel 'D'");
    let _ = writeln!(s, "set ylabel 'privacy loss (nats)'");
    let plots: Vec<String> = notions
        .iter()
        .map(|k| {
            let l = k.label();
            format!("'{data}' using 1:(strcol(2) eq '{l}' ? ($4 > 1e300 ? 1/0 : $4) : 1/0) with lines title '{l}'")
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

fn read_mechanism(path: &Path) -> Result<Mechanism, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(Mechanism::from_json(&text)?)
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    let q = read_mechanism(&a.mechanism)?;
    let notions = a.notions.notions()?;
    let prior = a.prior.as_deref().map(|s| prior_on(s, q.space())).transpose()?;
    let mut out = String::new();
    for k in notions {
        if k.prior_required() && prior.is_none() {
            return Err(Failure::usage(format!("{k} needs a prior (--prior)")));
        }
        let _ = writeln!(out, "{} {}", k.label(), fmt_value(eval_loss(k, &q, prior.as_ref())?));
    }
    emit(None, &out)
}

/// Builds the optimal mechanism for the sorted relabeling of `probs` and maps
/// it back to the original labels.
fn relabeled(probs: &[f64], build: impl Fn(&Prior) -> Result<Mechanism, Error>) -> Result<(Mechanism, Prior), Failure> {
    let (sorted, perm) = sort_with_permutation(probs);
    let q = build(&Prior::local(&sorted)?)?;
    let m = probs.len();
    let mut pos = vec![0; m];
    perm.iter().enumerate().for_each(|(k, &i)| pos[i] = k);
    let rows = (0..m).map(|i| (0..m).map(|j| q.get(pos[i], pos[j])).collect()).collect();
    Ok((Mechanism::new(q.space(), rows)?, Prior::local(probs)?))
}

fn construct(a: ConstructArgs) -> Result<(), Failure> {
    let need_m = || a.m.ok_or_else(|| Failure::usage("--m is required"));
    let need_d = || a.d.ok_or_else(|| Failure::usage("--D is required"));
    let need_delta = || a.delta.ok_or_else(|| Failure::usage("--delta is required"));
    let need_prior = || a.prior.as_deref().ok_or_else(|| Failure::usage("--prior is required")).and_then(parse_probs);
    let (q, prior) = match a.name {
        Named::Wang => (wang_mechanism(ProductSpace::new(need_m()?, a.n)?, need_d()?)?, None),
        Named::Uniform => (uniform_mechanism(ProductSpace::new(need_m()?, a.n)?), None),
        Named::Identity => (identity_mechanism(ProductSpace::new(need_m()?, a.n)?), None),
        Named::Qdelta => (q_delta_mechanism(need_m()?, need_delta()?)?, None),
        Named::OptimalAdp => {
            let (d, delta) = (need_d()?, need_delta()?);
            let (q, p) = relabeled(&need_prior()?, |p| optimal_adp_mechanism(p, d, delta))?;
            (q, Some(p))
        }
        Named::OptimalMl => {
            let d = need_d()?;
            let (q, p) = relabeled(&need_prior()?, |p| optimal_ml_mechanism(p, d))?;
            (q, Some(p))
        }
    };
    let mut summary = String::new();
    let worst = (0..q.size_in()).map(|x| row_distortion(&q, x)).collect::<Result<Vec<_>, _>>()?;
    let _ = writeln!(summary, "max row distortion {}", fmt_value(worst.iter().cloned().fold(0.0, f64::max)));
    if let Some(p) = &prior {
        let _ = writeln!(summary, "expected distortion {}", fmt_value(expected_distortion(&q, p)?));
    }
    let mut notions = vec![PrivacyNotion::Dp];
    if let Some(delta) = a.delta {
        notions.push(PrivacyNotion::approx_dp(delta)?);
    }
    notions.push(PrivacyNotion::MaxLeakage);
    for k in notions {
        let _ = writeln!(summary, "{} {}", k.label(), fmt_value(eval_loss(k, &q, prior.as_ref())?));
    }
    let json = q.to_json_pretty() + "\n";
    match &a.out {
        Some(path) => {
            std::fs::write(path, json)?;
            emit(None, &summary)
        }
        None => {
            emit(None, &json)?;
            let _ = std::io::stderr().write_all(summary.as_bytes());
            Ok(())
        }
    }
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    if a.trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let only = a
        .only
        .iter()
        .map(|s| NotionKind::parse(s.trim()).ok_or_else(|| Failure::usage(format!("unknown notion family {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let report = verify_closed_forms(&VerifyOptions { seed: a.seed, trials: a.trials, only })?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::usage(e.to_string()))? + "\n";
    emit(a.out.as_deref(), &json)?;
    let mut summary = String::new();
    for e in &report.entries {
        let status = if e.passed { "ok" } else { "FAIL" };
        let _ = writeln!(summary, "{status:4} {:10} {:26} max_dev {:.3e}", e.notion, e.theorem, e.max_dev);
    }
    let _ = std::io::stderr().write_all(summary.as_bytes());
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn compose(a: ComposeArgs) -> Result<(), Failure> {
    let base = read_mechanism(&a.mechanism)?;
    let notions = a.notions.notions()?;
    let prior = a.prior.as_deref().map(|s| prior_on(s, base.space())).transpose()?;
    let mut out = String::new();
    for k in notions {
        if k.prior_required() && prior.is_none() {
            return Err(Failure::usage(format!("{k} needs a prior (--prior)")));
        }
        let c = composed_loss_law(k, &base, prior.as_ref(), a.n)?;
        let realized = c.realized.map(fmt_value).unwrap_or_else(|| "-".into());
        let _ = write!(out, "{} law {} realized {}", k.label(), fmt_value(c.law), realized);
        if let PrivacyNotion::ApproxDp { delta } = k {
            let (lo, hi) = adp_sandwich(&base, delta, a.n);
            let _ = write!(out, " sandwich {} {}", fmt_value(lo), fmt_value(hi));
        }
        out.push('\n');
    }
    emit(None, &out)
}
