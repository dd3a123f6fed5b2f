//! Command-line front end. Every run prints a header line with the version,
//! the arguments and the seed, then the result as TSV or JSON.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use crate::ascent::{build_ascent_tree, critical_points, path_between, product_inequality, semiresultant, verify_bounds, ComplexPoly, Tolerances};
use crate::cf::{record_scan, stream_cf, verify_measure, Limit};
use crate::error::{Error, Result};
use crate::forest::{build_forest, delta_products, verify_forest, DistanceOracle};
use crate::hermite::{hermite_matrix, hermite_point, hermite_point_rec, mahler_det, AlphaSet, MultiIndex, PointCache};
use crate::minima::{check_family, trend_constant};
use crate::padic::check_lemma31_auto;
use crate::rational::{parse_rational, parse_rational_list, Rational};
use crate::volume::{thread_count, volume_check};

#[derive(Parser, Debug)]
#[command(name = "hermite", version, about = "Hermite approximations of the exponential: exact identities, continued fractions, minima, volumes and ascent trees")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The point a_n = (P_n(α_1), …, P_n(α_s)).
    Hermite(HermiteArgs),
    /// The determinant Δ_n and det(A_n).
    Mahler(PointArgs),
    /// Partial quotients of e^α.
    Cf(CfArgs),
    /// Record partial quotients of e^α.
    Records(RecordsArgs),
    /// Checks the irrationality measure estimate for e^α.
    VerifyMeasure(RecordsArgs),
    /// Successive minima of the diagonal family of e^α.
    Minima(MinimaArgs),
    /// Monte-Carlo volume of the real component against its bounds.
    Volume(VolumeArgs),
    /// p-adic rooted forest on a point set.
    Forest(ForestArgs),
    /// Tree of descent paths between the roots of a polynomial.
    Ascent(AscentArgs),
    /// Semi-resultant identity and inequality.
    Semires(PolyArgs),
}

#[derive(Args, Debug)]
pub struct PointArgs {
    /// Distinct rationals α_1, …, α_s.
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: String,
    /// Multi-index n_1, …, n_s.
    #[arg(long)]
    pub n: String,
}

#[derive(Args, Debug)]
pub struct HermiteArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Also evaluate by the recursion and compare.
    #[arg(long)]
    pub recursive: bool,
    /// Also check the p-adic estimates at this prime.
    #[arg(long)]
    pub p: Option<u64>,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
pub struct CfArgs {
    #[command(subcommand)]
    pub sub: Option<CfSub>,
    #[arg(long, default_value = "3", allow_hyphen_values = true)]
    pub alpha: String,
    /// Number of quotients a_0, …, a_{count-1}.
    #[arg(long)]
    pub count: Option<u64>,
    /// Stop at q_{n-1} > 10^qmax_log10.
    #[arg(long)]
    pub qmax_log10: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum CfSub {
    Records(RecordsArgs),
    VerifyMeasure(RecordsArgs),
}

#[derive(Args, Debug)]
pub struct RecordsArgs {
    #[arg(long, default_value = "3", allow_hyphen_values = true)]
    pub alpha: String,
    /// Scan while q_{n-1} ≤ 10^qmax_log10.
    #[arg(long)]
    pub qmax_log10: f64,
}

#[derive(Args, Debug)]
pub struct MinimaArgs {
    #[arg(long, default_value = "3", allow_hyphen_values = true)]
    pub alpha: String,
    /// Prime carrying the congruence; defaults to the first one available.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub n_max: u64,
}

#[derive(Args, Debug)]
pub struct VolumeArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
}

#[derive(Args, Debug)]
pub struct ForestArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub points: String,
    #[arg(long)]
    pub p: u64,
    /// δ = p^{-delta}; defaults to 1/(p-1).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Multi-index for the distance products.
    #[arg(long)]
    pub n: Option<String>,
}

#[derive(Args, Debug)]
pub struct PolyArgs {
    /// Distinct complex roots such as 1, -0.5+2i, 3i.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "coeffs")]
    pub roots: Option<String>,
    /// Root multiplicities (default all 1).
    #[arg(long)]
    pub mult: Option<String>,
    /// Coefficients c_0, c_1, …, c_N in ascending order.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
}

#[derive(Args, Debug)]
pub struct AscentArgs {
    #[command(flatten)]
    pub poly: PolyArgs,
    /// Writes the traces to a .json, .csv or .svg file.
    #[arg(long)]
    pub export: Option<std::path::PathBuf>,
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 2,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { code };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let _ = writeln!(out, "# hermite {} args=\"{}\" seed={} threads={}", env!("CARGO_PKG_VERSION"), echo.join(" "), cli.seed, thread_count());
    let mut buf = Vec::new();
    let result = dispatch(&cli, &mut buf);
    let _ = out.write_all(&buf);
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if is_usage(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::LengthMismatch { .. }
            | Error::DuplicateAlpha(..)
            | Error::EmptyAlphaSet
            | Error::IndexTooSmall { .. }
            | Error::IndexOutOfRange { .. }
            | Error::Divergent { .. }
            | Error::NotPrime(_)
            | Error::InvalidRational(_)
            | Error::InvalidArgument(_)
    )
}

fn io(e: std::io::Error) -> Error {
    Error::Numerical(format!("write failed: {e}"))
}

fn json_line(out: &mut dyn Write, v: &serde_json::Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).map_err(|e| Error::Numerical(e.to_string()))?).map_err(io)
}

fn parse_index(text: &str) -> Result<MultiIndex> {
    text.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::InvalidArgument(format!("invalid integer {t:?}"))))
        .collect::<Result<Vec<_>>>()
        .map(MultiIndex::new)
}

fn parse_point(a: &PointArgs) -> Result<(AlphaSet, MultiIndex)> {
    Ok((AlphaSet::new(parse_rational_list(&a.alphas)?)?, parse_index(&a.n)?))
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidArgument(format!("invalid complex number {text:?}"));
    let num = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(num(&body[..k])?, num(&body[k..])?)),
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

fn parse_complex_list(text: &str) -> Result<Vec<Complex64>> {
    text.split(',').map(parse_complex).collect()
}

fn parse_poly(a: &PolyArgs, tol: &Tolerances) -> Result<ComplexPoly> {
    match (&a.roots, &a.coeffs) {
        (Some(r), None) => {
            let roots = parse_complex_list(r)?;
            let mult = match &a.mult {
                Some(m) => m
                    .split(',')
                    .map(|t| t.trim().parse::<u32>().map_err(|_| Error::InvalidArgument(format!("invalid multiplicity {t:?}"))))
                    .collect::<Result<Vec<_>>>()?,
                None => vec![1; roots.len()],
            };
            ComplexPoly::from_roots(roots, mult)
        }
        (None, Some(c)) => {
            if a.mult.is_some() {
                return Err(Error::InvalidArgument("--mult applies to --roots only".into()));
            }
            ComplexPoly::from_coeffs(&parse_complex_list(c)?, tol)
        }
        _ => Err(Error::InvalidArgument("give exactly one of --roots or --coeffs".into())),
    }
}

fn cx(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    let fmt = cli.format;
    match &cli.command {
        Command::Hermite(a) => cmd_hermite(a, fmt, out),
        Command::Mahler(a) => cmd_mahler(a, fmt, out),
        Command::Cf(a) => match &a.sub {
            Some(CfSub::Records(r)) => cmd_records(r, fmt, out),
            Some(CfSub::VerifyMeasure(r)) => cmd_measure(r, fmt, out),
            None => cmd_cf(a, fmt, out),
        },
        Command::Records(a) => cmd_records(a, fmt, out),
        Command::VerifyMeasure(a) => cmd_measure(a, fmt, out),
        Command::Minima(a) => cmd_minima(a, fmt, out),
        Command::Volume(a) => cmd_volume(a, cli.seed, fmt, out),
        Command::Forest(a) => cmd_forest(a, fmt, out),
        Command::Ascent(a) => cmd_ascent(a, cli.seed, fmt, out),
        Command::Semires(a) => cmd_semires(a, fmt, out),
    }
}

fn cmd_hermite(a: &HermiteArgs, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let (alphas, n) = parse_point(&a.point)?;
    let pt = hermite_point(&alphas, &n)?;
    let mut ok = true;
    let rec = if a.recursive {
        let r = hermite_point_rec(&alphas, &n, &mut PointCache::new())?;
        ok &= r == pt;
        Some(r == pt)
    } else {
        None
    };
    let mut lemma = Vec::new();
    if let Some(p) = a.p {
        let s = alphas.len();
        for i in 0..s {
            for j in 0..s {
                let r = check_lemma31_auto(&alphas, &n, i, j, p, 16, 4096)?;
                ok &= !r.any_violated();
                lemma.push((i, j, r));
            }
        }
    }
    match fmt {
        Format::Json => json_line(
            out,
            &json!({
                "alphas": alphas.values().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "n": n.entries(),
                "point": pt.coords().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "recursion_agrees": rec,
                "padic": lemma.iter().map(|(i, j, r)| json!({"i": i + 1, "j": j + 1, "report": r})).collect::<Vec<_>>(),
            }),
        )?,
        Format::Tsv => {
            writeln!(out, "i\talpha\tP_n(alpha)").map_err(io)?;
            for (i, (al, v)) in alphas.values().iter().zip(pt.coords()).enumerate() {
                writeln!(out, "{}\t{al}\t{v}", i + 1).map_err(io)?;
            }
            if let Some(r) = rec {
                writeln!(out, "recursion_agrees\t{r}").map_err(io)?;
            }
            if !lemma.is_empty() {
                writeln!(out, "i\tj\tp\tk\tpoint_bound\tfactorial_bound\tmixed_bound").map_err(io)?;
                for (i, j, r) in &lemma {
                    let v: Vec<String> = r.verdicts().iter().map(|v| format!("{v:?}")).collect();
                    writeln!(out, "{}\t{}\t{}\t{}\t{}", i + 1, j + 1, r.p, r.k, v.join("\t")).map_err(io)?;
                }
            }
        }
    }
    Ok(ok)
}

fn cmd_mahler(a: &PointArgs, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let (alphas, n) = parse_point(a)?;
    let delta = mahler_det(&alphas, &n)?;
    let det = hermite_matrix(&alphas, &n)?.matrix.det();
    let ok = det == delta;
    match fmt {
        Format::Json => json_line(out, &json!({"delta": delta.to_string(), "det": det.to_string(), "equal": ok}))?,
        Format::Tsv => writeln!(out, "delta\t{delta}\ndet\t{det}\nequal\t{ok}").map_err(io)?,
    }
    Ok(ok)
}

fn cmd_cf(a: &CfArgs, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let alpha = parse_rational(&a.alpha)?;
    let limit = match (a.count, a.qmax_log10) {
        (Some(c), None) => Limit::Count(c),
        (None, Some(q)) => Limit::LogQ(q * std::f64::consts::LN_10),
        _ => return Err(Error::InvalidArgument("give exactly one of --count or --qmax-log10".into())),
    };
    let quotients = stream_cf(&alpha, limit)?.collect::<Result<Vec<_>>>()?;
    match fmt {
        Format::Json => json_line(out, &json!({"alpha": alpha.to_string(), "quotients": quotients.iter().map(|q| q.value.to_string()).collect::<Vec<_>>()}))?,
        Format::Tsv => {
            writeln!(out, "n\ta_n\tln_q_prev").map_err(io)?;
            for q in &quotients {
                let lq = q.log_q_prev.map_or(String::from("-"), |v| format!("{v:.6}"));
                writeln!(out, "{}\t{}\t{lq}", q.index, q.value).map_err(io)?;
            }
        }
    }
    Ok(true)
}

fn cmd_records(a: &RecordsArgs, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let alpha = parse_rational(&a.alpha)?;
    let rows = record_scan(&alpha, a.qmax_log10 * std::f64::consts::LN_10)?;
    match fmt {
        Format::Json => json_line(out, &json!({"alpha": alpha.to_string(), "records": rows}))?,
        Format::Tsv => {
            writeln!(out, "n\ta_n\tln_q_prev").map_err(io)?;
            for r in &rows {
                writeln!(out, "{}\t{}\t{:.1}", r.n, r.a_n, r.log_q_prev).map_err(io)?;
            }
        }
    }
    Ok(true)
}

fn cmd_measure(a: &RecordsArgs, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let alpha = parse_rational(&a.alpha)?;
    let rep = verify_measure(&alpha, a.qmax_log10 * std::f64::consts::LN_10)?;
    let ok = rep.all_passed();
    match fmt {
        Format::Json => json_line(out, &json!({"alpha": alpha.to_string(), "report": rep, "passed": ok}))?,
        Format::Tsv => {
            writeln!(out, "kind\tn\ta_n\tln_q_prev\tratio").map_err(io)?;
            for (kind, list) in [("small", &rep.small), ("record", &rep.records)] {
                for c in list {
                    writeln!(out, "{kind}\t{}\t{}\t{:.3}\t{:.6}", c.n, c.a_n, c.log_q_prev, c.ratio).map_err(io)?;
                }
            }
            for d in &rep.direct {
                writeln!(out, "direct\t{}\t-\t-\t{:.6}", d.x, d.value).map_err(io)?;
            }
            writeln!(out, "checked\t{}", rep.checked).map_err(io)?;
            if let Some(m) = rep.min_ratio_large {
                writeln!(out, "min_ratio_n_ge_10\t{m:.6}").map_err(io)?;
            }
            if ok {
                writeln!(out, "all checks passed").map_err(io)?;
            } else {
                for v in &rep.violations {
                    writeln!(out, "violation\t{v}").map_err(io)?;
                }
            }
        }
    }
    Ok(ok)
}

fn cmd_minima(a: &MinimaArgs, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let alpha = parse_rational(&a.alpha)?;
    let p = match a.p {
        Some(p) => p,
        None => crate::minima::tilde_body(&alpha, 1)?
            .congruences
            .first()
            .map(|c| c.p)
            .ok_or_else(|| Error::InvalidArgument(format!("the exponential of {alpha} has no congruence condition at any prime")))?,
    };
    let rows = check_family(&alpha, p, a.n_max)?;
    let c = trend_constant(&rows);
    let ok = rows.iter().all(|r| r.sandwich_holds);
    match fmt {
        Format::Json => json_line(out, &json!({"alpha": alpha.to_string(), "p": p, "rows": rows, "trend_constant": c, "passed": ok}))?,
        Format::Tsv => {
            writeln!(out, "n\tlambda1_lo\tlambda1_hi\tlambda2_lo\tlambda2_hi\tproduct_lo\tproduct_hi\tsandwich\tlambda1_n2\tlambda2_over_n2").map_err(io)?;
            for r in &rows {
                let (l1, h1) = r.minima.lambda1.to_f64_pair();
                let (l2, h2) = r.minima.lambda2.to_f64_pair();
                let (pl, ph) = r.product.to_f64_pair();
                writeln!(out, "{}\t{l1:.12e}\t{h1:.12e}\t{l2:.12e}\t{h2:.12e}\t{pl:.9}\t{ph:.9}\t{}\t{:.6}\t{:.6}", r.n, r.sandwich_holds, r.lambda1_n2, r.lambda2_over_n2)
                    .map_err(io)?;
            }
            writeln!(out, "trend_constant\t{c:.6}").map_err(io)?;
        }
    }
    Ok(ok)
}

fn cmd_volume(a: &VolumeArgs, seed: u64, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let (alphas, n) = parse_point(&a.point)?;
    let r = volume_check(&alphas, &n, a.samples, seed, thread_count())?;
    match fmt {
        Format::Json => json_line(out, &json!(r))?,
        Format::Tsv => {
            let (lo, hi) = r.estimate.confidence(3.0);
            writeln!(out, "delta\t{}", r.sandwich.delta).map_err(io)?;
            writeln!(out, "lower\t{:e}\nupper\t{:e}\nc_v\t{:e}", r.sandwich.lower, r.sandwich.upper, r.sandwich.c_v).map_err(io)?;
            writeln!(out, "estimate\t{:e}\nstderr\t{:e}\nci3_lo\t{lo:e}\nci3_hi\t{hi:e}", r.estimate.estimate, r.estimate.stderr).map_err(io)?;
            writeln!(out, "samples\t{}\nhits\t{}\nquadrature_gap\t{:e}\nconsistent\t{}", r.estimate.samples, r.estimate.hits, r.quadrature_gap, r.consistent).map_err(io)?;
        }
    }
    Ok(r.consistent)
}

fn cmd_forest(a: &ForestArgs, _fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let points = AlphaSet::new(parse_rational_list(&a.points)?)?;
    let oracle = DistanceOracle::new(a.p)?;
    let delta: Rational = match &a.delta {
        Some(d) => parse_rational(d)?,
        None => oracle.default_delta(),
    };
    let forest = build_forest(&points, &delta, &oracle);
    let check = verify_forest(&forest, &points, &delta, &oracle);
    let mut ok = check.is_ok();
    let products = match &a.n {
        Some(n) => {
            let d = delta_products(&forest, &points, &parse_index(n)?, &delta, &oracle)?;
            ok &= d.identity_holds();
            Some(json!({
                "root_part": format!("{:?}", d.root_part),
                "edge_part": format!("{:?}", d.edge_part),
                "closed_form": format!("{:?}", d.closed_form),
                "identity_holds": d.identity_holds(),
            }))
        }
        None => None,
    };
    let val = |i: usize| points.get(i).to_string();
    // The forest is a nested structure, so it is written as JSON in both formats.
    json_line(
        out,
        &json!({
            "roots": forest.roots,
            "edges": forest.edges.iter().map(|(x, y)| [x, y]).collect::<Vec<_>>(),
            "root_points": forest.roots.iter().map(|&r| val(r)).collect::<Vec<_>>(),
            "edge_points": forest.edges.iter().map(|&(x, y)| [val(x), val(y)]).collect::<Vec<_>>(),
            "p": a.p,
            "delta_exponent": delta.to_string(),
            "verified": check.is_ok(),
            "witness": check.err().map(|w| format!("{w:?}")),
            "products": products,
        }),
    )?;
    Ok(ok)
}

fn cmd_ascent(a: &AscentArgs, seed: u64, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let tol = Tolerances::default();
    let f = parse_poly(&a.poly, &tol)?;
    let tree = build_ascent_tree(&f, seed, &tol, thread_count())?;
    let rep = verify_bounds(&tree, 1e-6)?;
    if let Some(path) = &a.export {
        export_traces(&tree, path)?;
    }
    match fmt {
        Format::Json => json_line(
            out,
            &json!({
                "roots": f.roots.iter().map(|z| cx(*z)).collect::<Vec<_>>(),
                "mult": f.mult,
                "critical": tree.critical,
                "edges": tree.edges,
                "jitters": tree.jitters(),
                "bounds": rep,
                "passed": rep.passed(),
            }),
        )?,
        Format::Tsv => {
            writeln!(out, "kind\tindex\tre\tim\tmult").map_err(io)?;
            for (i, (z, m)) in f.roots.iter().zip(&f.mult).enumerate() {
                writeln!(out, "root\t{i}\t{:?}\t{:?}\t{m}", z.re, z.im).map_err(io)?;
            }
            for (j, b) in tree.critical.points.iter().enumerate() {
                writeln!(out, "critical\t{j}\t{:?}\t{:?}\t{}", b.z.re, b.z.im, b.m).map_err(io)?;
            }
            writeln!(out, "edge\ta\tb\tbeta\tarc_length\tmax_abs_f").map_err(io)?;
            for (i, e) in tree.edges.iter().enumerate() {
                let p = path_between(&tree, i)?;
                writeln!(out, "edge\t{}\t{}\t{}\t{:.9}\t{:.9e}", e.a, e.b, e.beta, p.arc_length, p.max_abs_f).map_err(io)?;
            }
            writeln!(out, "radius\t{}\npath_length_ratio\t{:.9}\nedge_length_ratio\t{:.9}\nhull_margin\t{:e}", rep.radius, rep.path_length_ratio, rep.edge_length_ratio, rep.hull_margin)
                .map_err(io)?;
            writeln!(out, "jitters\t{}\npassed\t{}", tree.jitters(), rep.passed()).map_err(io)?;
            for v in &rep.violations {
                writeln!(out, "violation\t{v}").map_err(io)?;
            }
        }
    }
    Ok(rep.passed())
}

fn export_traces(tree: &crate::ascent::AscentTree, path: &std::path::Path) -> Result<()> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let mut text = String::new();
    use std::fmt::Write as _;
    match ext.as_str() {
        "json" => {
            let v: Vec<serde_json::Value> = tree
                .traces
                .iter()
                .enumerate()
                .flat_map(|(j, trs)| trs.iter().enumerate().map(move |(k, t)| json!({"beta": j, "branch": k, "end_root": t.end_root, "samples": t})))
                .collect();
            text = serde_json::to_string(&v).map_err(|e| Error::Numerical(e.to_string()))?;
        }
        "csv" => {
            text.push_str("beta,branch,t,re,im\n");
            for (j, trs) in tree.traces.iter().enumerate() {
                for (k, t) in trs.iter().enumerate() {
                    for (s, z) in &t.samples {
                        let _ = writeln!(text, "{j},{k},{s},{},{}", z.re, z.im);
                    }
                }
            }
        }
        "svg" => text = svg(tree),
        _ => return Err(Error::InvalidArgument("export path must end in .json, .csv or .svg".into())),
    }
    std::fs::write(path, text).map_err(io)
}

fn svg(tree: &crate::ascent::AscentTree) -> String {
    use std::fmt::Write as _;
    let pts: Vec<Complex64> = tree.traces.iter().flatten().flat_map(|t| t.samples.iter().map(|s| s.1)).chain(tree.poly.roots.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in &pts {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let size = 512.0;
    let map = |z: Complex64| (16.0 + (z.re - x0) / span * (size - 32.0), size - 16.0 - (z.im - y0) / span * (size - 32.0));
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\">\n");
    for t in tree.traces.iter().flatten() {
        let d: Vec<String> = t.samples.iter().map(|(_, z)| {
            let (x, y) = map(*z);
            format!("{x:.2},{y:.2}")
        }).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"steelblue\" points=\"{}\"/>", d.join(" "));
    }
    for z in &tree.poly.roots {
        let (x, y) = map(*z);
        let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"black\"/>");
    }
    for b in &tree.critical.points {
        let (x, y) = map(b.z);
        let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"crimson\"/>");
    }
    s.push_str("</svg>\n");
    s
}

fn cmd_semires(a: &PolyArgs, fmt: Format, out: &mut dyn Write) -> Result<bool> {
    let tol = Tolerances::default();
    let f = parse_poly(a, &tol)?;
    let crit = critical_points(&f, &tol)?;
    let sr = semiresultant(&f, &crit);
    let (lhs, rhs) = product_inequality(&f, &crit);
    let ok = sr.relative_deviation <= 1e-8 && lhs <= rhs + 1e-9;
    match fmt {
        Format::Json => json_line(out, &json!({"semiresultant": sr, "product_lhs_ln": lhs, "product_rhs_ln": rhs, "passed": ok}))?,
        Format::Tsv => {
            writeln!(out, "left\t{:?}\t{:?}\nright\t{:?}\t{:?}", sr.left.re, sr.left.im, sr.right.re, sr.right.im).map_err(io)?;
            writeln!(out, "relative_deviation\t{:e}\nproduct_lhs_ln\t{lhs}\nproduct_rhs_ln\t{rhs}\npassed\t{ok}", sr.relative_deviation).map_err(io)?;
        }
    }
    Ok(ok)
}
