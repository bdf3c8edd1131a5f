//! Command-line front end: argument parsing, dispatch and the JSON result
//! object `{command, config, results, checks}`.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input,
//! 3 inconclusive (truncation too small or no stabilization).

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coinv::{
    factorization_check, hat_iota_invariance_check, integrable_marked, node_weights, CcReport, CoinvProblem, Location,
    Model, Site,
};
use crate::error::{Error, Result};
use crate::exactnum::cyc::{rat_to_f64, Rat};
use crate::exactnum::CycNum;
use crate::kz::{cybe_residual, degeneration, KzSystem, RMatrix, Spectral};
use crate::repmods::{irreducible_node, pairing_suite, GradedModule, NodePairing};
use crate::twistalg::{is_dominant_integral, weight_tilde, AffineWeight, FinRep, Side};
use crate::wfun::{
    check_quasiperiodicity, eval_product, split_singular, wmul_q0, wmul_series, Normalization, PrincipalPart,
};

#[derive(Parser, Debug, Serialize)]
#[command(name = "trigwzw", version, about = "Twisted WZW coinvariants, w-functions and the trigonometric KZ system")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key = value file; its entries are read before the command line, which overrides them
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// also write the JSON result here
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// write the command's table (if it has one) as CSV here
    #[arg(long, global = true)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    /// seed for all random sampling
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Evaluate ŵ_ab(q; u) from the q-series and the defining product
    WEval(WEvalArgs),
    /// q⁰ limit, quasi-periodicity and residue of every ŵ_ab
    WCheck(WCheckArgs),
    /// Realize principal parts at marked points by an out-algebra element
    Split(SplitArgs),
    /// Truncated coinvariant dimensions of a trigonometric or orbifold configuration
    CoinvDim(CoinvArgs),
    /// Compare trigonometric coinvariants with the sum over orbifold ones
    Factorize(FactorizeArgs),
    /// Node pairing: Gram matrices, invariance and dual-basis checks
    PairingGram(PairingArgs),
    /// λ ↦ λ̃, λ̃′ with coroot pairings and dominance at both nodes
    WeightMap(WeightMapArgs),
    /// Classical Yang–Baxter residual of r(u) and its q → 0 degeneration
    Cybe(CybeArgs),
    /// Flatness residual of the trigonometric KZ connection
    KzFlatness(KzFlatnessArgs),
    /// Parallel transport for the trigonometric KZ connection
    KzTransport(KzTransportArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct WEvalArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub b: usize,
    /// spectral parameter, `re` or `re:im`
    #[arg(long, value_parser = parse_complex)]
    #[serde(serialize_with = "ser_complex")]
    pub u: Complex64,
    /// nome, `re` or `re:im`
    #[arg(long, value_parser = parse_complex, default_value = "0")]
    #[serde(serialize_with = "ser_complex")]
    pub q: Complex64,
    /// q-truncation order
    #[arg(long, visible_alias = "Q_max", default_value_t = 8)]
    pub order: usize,
    /// multiply by 2πi
    #[arg(long)]
    pub full: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct WCheckArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long, visible_alias = "Q_max", default_value_t = 8)]
    pub order: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct SplitArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    /// rational marked points
    #[arg(long, value_delimiter = ',', required = true)]
    pub points: Vec<String>,
    /// `a:b:site:c1;c2;…`, the coefficients of (u − u_site)^{-1}, (u − u_site)^{-2}, …
    #[arg(long = "part", required = true)]
    pub parts: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct CoinvArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub k: String,
    /// trig or orb
    #[arg(long, default_value = "trig")]
    pub model: String,
    /// representation at each marked point: fund, antifund, trivial
    #[arg(long = "V", value_delimiter = ',', required = true)]
    #[serde(rename = "V")]
    pub reps: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub points: Vec<String>,
    /// weyl or integrable modules at the marked points
    #[arg(long, default_value = "weyl")]
    pub marked: String,
    /// irreducible or verma modules at the nodes
    #[arg(long, default_value = "irreducible")]
    pub node: String,
    /// λ (values on H_{i,i+1}); the node weights are then λ̃′ at 0 and λ̃ at ∞
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<String>>,
    /// node weight at 0 as values on H_{i,i+1}
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub node_zero: Option<Vec<String>>,
    /// node weight at ∞ as values on H_{i,i+1}
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub node_inf: Option<Vec<String>>,
    /// largest truncation level (degree and pole order)
    #[arg(long, visible_alias = "D_max", default_value_t = 3)]
    pub levels: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct FactorizeArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub k: String,
    #[arg(long = "V", value_delimiter = ',', required = true)]
    #[serde(rename = "V")]
    pub reps: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub points: Vec<String>,
    #[arg(long, visible_alias = "D_max", default_value_t = 3)]
    pub levels: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct PairingArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub k: String,
    /// λ (values on H_{i,i+1}); the pairing is built on the node weight λ̃′ at 0
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Vec<String>,
    #[arg(long, visible_alias = "D_max", default_value_t = 4)]
    pub dmax: usize,
    /// random monomial pairs per check
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// include the Gram matrices in the output
    #[arg(long)]
    pub emit_gram: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct WeightMapArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub k: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct CybeArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// also fit the slope of ‖r_ell(q) − r_trig‖ over these q
    #[arg(long, value_delimiter = ',')]
    pub degeneration: Option<Vec<f64>>,
    #[arg(long, visible_alias = "Q_max", default_value_t = 8)]
    pub order: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct KzFlatnessArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub k: String,
    #[arg(long = "V", value_delimiter = ',', required = true)]
    #[serde(rename = "V")]
    pub reps: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct KzTransportArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub k: String,
    #[arg(long = "V", value_delimiter = ',', required = true)]
    #[serde(rename = "V")]
    pub reps: Vec<String>,
    /// points u_j, `re` or `re:im`
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// which point moves
    #[arg(long, default_value_t = 0)]
    pub site: usize,
    /// vertices of the path in z = log u; default: a circle of radius 0.1 around z_site
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub path: Option<Vec<String>>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// `re` or `re:im`.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = match s.split_once(':') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let p = |x: &str| f64::from_str(x.trim()).map_err(|e| format!("'{s}': {e}"));
    Ok(Complex64::new(p(re)?, p(im)?))
}

/// `p/q`, an integer, or a finite decimal, read exactly.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("'{s}' is not a rational number"));
    if s.contains('/') {
        return Rat::from_str(s).map_err(|_| bad());
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = num_bigint::BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
    let r = Rat::new(num, den);
    Ok(if neg { -r } else { r })
}

fn parse_rats(v: &[String]) -> Result<Vec<Rat>> {
    v.iter().map(|s| parse_rat(s)).collect()
}

fn parse_reps(v: &[String]) -> Result<Vec<FinRep>> {
    v.iter().map(|s| FinRep::parse(s.trim())).collect()
}

fn parse_points(n: u32, v: &[String]) -> Result<Vec<CycNum>> {
    v.iter().map(|s| Ok(CycNum::from_rat(n, parse_rat(s)?))).collect()
}

fn parse_cpoints(v: &[String]) -> Result<Vec<Complex64>> {
    v.iter().map(|s| parse_complex(s).map_err(Error::InvalidInput)).collect()
}

fn check_n(n: u32) -> Result<()> {
    if !(2..=12).contains(&n) {
        return Err(Error::InvalidInput(format!("N = {n} is outside the supported range 2..=12")));
    }
    Ok(())
}

fn h_weight(n: u32, level: &Rat, h: &[String]) -> Result<AffineWeight> {
    if h.len() != n as usize - 1 {
        return Err(Error::InvalidInput(format!("a weight needs {} values on H_(i,i+1), got {}", n - 1, h.len())));
    }
    Ok(AffineWeight::from_h_values(level.clone(), &parse_rats(h)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

fn check(name: &str, ok: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, detail: detail.into() }
}

fn stabilization(name: &str, r: &CcReport) -> Check {
    Check {
        name: name.into(),
        status: if r.stabilized { Status::Pass } else { Status::Inconclusive },
        detail: format!("dims by level {:?}", r.levels.iter().map(|l| l.dim).collect::<Vec<_>>()),
    }
}

struct Outcome {
    results: Value,
    checks: Vec<Check>,
    csv: Option<String>,
}

/// What a run produced: the JSON document, the exit code, the CSV table if any,
/// and a message for stderr.
#[derive(Debug)]
pub struct RunOutput {
    pub json: Value,
    pub code: i32,
    pub csv: Option<String>,
    pub message: Option<String>,
}

fn rs(r: &Rat) -> String {
    r.to_string()
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn weight_json(w: &AffineWeight) -> Result<Value> {
    let label = |v: Vec<Rat>| -> Value {
        let m: serde_json::Map<String, Value> =
            v.iter().enumerate().map(|(i, c)| (format!("alpha_{i}"), Value::String(rs(c)))).collect();
        Value::Object(m)
    };
    Ok(json!({
        "values": w.vals.iter().map(rs).collect::<Vec<_>>(),
        "pairings_zero": label(w.coroot_pairings(Side::Zero)?),
        "pairings_infinity": label(w.coroot_pairings(Side::Infinity)?),
        "dominant_zero": is_dominant_integral(w, Side::Zero)?,
        "dominant_infinity": is_dominant_integral(w, Side::Infinity)?,
    }))
}

fn cc_json(r: &CcReport) -> Value {
    json!({
        "dim": r.dim,
        "stabilized": r.stabilized,
        "levels": r.levels.iter().map(|l| json!({
            "degree": l.degree, "poles": l.poles, "columns": l.columns, "rank": l.rank, "dim": l.dim
        })).collect::<Vec<_>>(),
    })
}

fn w_eval(a: &WEvalArgs) -> Result<Outcome> {
    check_n(a.n)?;
    let w = wmul_series(a.n, a.a, a.b, a.order)?;
    let norm = if a.full { Normalization::Full } else { Normalization::Hatted };
    let factor = if a.full { Complex64::new(0.0, 2.0 * std::f64::consts::PI) } else { Complex64::one() };
    let series = w.eval(a.q, a.u, crate::kz::rmatrix::POLE_TOL, norm)?;
    let q0 = wmul_q0(a.n, a.a, a.b)?;
    let mut checks = vec![check("q0_limit", w.series.coeff(0) == &q0, "q⁰ coefficient equals the closed form")];
    let mut results = json!({
        "series_value": cjson(series),
        "q0_closed_form": q0.to_string(),
        "normalization": if a.full { "full" } else { "hatted" },
    });
    if a.q.norm() > 0.0 {
        let prod = eval_product(a.n, a.a, a.b, a.q, a.u)? * factor;
        let diff = (prod - series).norm();
        results["product_value"] = cjson(prod);
        results["difference"] = json!(diff);
        let ok = diff <= 1e-8 * prod.norm().max(1.0);
        checks.push(Check {
            name: "series_vs_product".into(),
            status: if ok { Status::Pass } else { Status::Inconclusive },
            detail: format!("|series − product| = {diff:.3e}; raise --order if large"),
        });
    }
    Ok(Outcome { results, checks, csv: None })
}

fn w_check(a: &WCheckArgs) -> Result<Outcome> {
    check_n(a.n)?;
    let mut rows = Vec::new();
    let mut fails: [Vec<String>; 4] = Default::default();
    let mut csv = String::from("a,b,q0_ok,eps_order,q_order,residue_ok\n");
    for (x, y) in crate::twistalg::j_indices(a.n) {
        let q0_ok = wmul_series(a.n, x, y, a.order)?.series.coeff(0) == &wmul_q0(a.n, x, y)?;
        let tag = format!("({x},{y})");
        let (eo, qo, res) = match check_quasiperiodicity(a.n, x, y, a.order) {
            Ok(r) => (Some(r.eps_order), Some(r.q_order), r.residue_ok),
            Err(Error::CheckFailed(msg)) => {
                fails[1].push(msg);
                (None, None, false)
            }
            Err(e) => return Err(e),
        };
        if !q0_ok {
            fails[0].push(tag.clone());
        }
        if eo.is_some_and(|o| o < a.order) {
            fails[1].push(tag.clone());
        }
        if qo.is_none_or(|o| o < a.order) {
            fails[2].push(tag.clone());
        }
        if !res {
            fails[3].push(tag);
        }
        csv.push_str(&format!(
            "{x},{y},{q0_ok},{},{},{res}\n",
            eo.map_or(String::new(), |o| o.to_string()),
            qo.map_or(String::new(), |o| o.to_string())
        ));
        rows.push(json!({"a": x, "b": y, "q0_ok": q0_ok, "eps_order": eo, "q_order": qo, "residue_ok": res}));
    }
    let names = ["q0_limit", "eps_quasiperiodicity", "q_quasiperiodicity", "residue"];
    let checks = names
        .iter()
        .zip(&fails)
        .map(|(nm, f)| {
            let d = if f.is_empty() { format!("all pairs through q^{}", a.order) } else { f.join("; ") };
            check(nm, f.is_empty(), d)
        })
        .collect();
    Ok(Outcome { results: json!({"order": a.order, "pairs": rows}), checks, csv: Some(csv) })
}

fn split(a: &SplitArgs) -> Result<Outcome> {
    check_n(a.n)?;
    let points = parse_points(a.n, &a.points)?;
    let mut parts = Vec::new();
    for p in &a.parts {
        let f: Vec<&str> = p.split(':').collect();
        if f.len() != 4 {
            return Err(Error::InvalidInput(format!("part '{p}' is not of the form a:b:site:c1;c2;…")));
        }
        let idx = |s: &str| usize::from_str(s).map_err(|_| Error::InvalidInput(format!("bad index '{s}' in '{p}'")));
        let (x, y) = (idx(f[0])?, idx(f[1])?);
        if x >= a.n as usize || y >= a.n as usize || (x, y) == (0, 0) {
            return Err(Error::InvalidInput(format!("({x},{y}) is not a J-index for N = {}", a.n)));
        }
        let coeffs = f[3].split(';').map(|c| Ok(CycNum::from_rat(a.n, parse_rat(c)?))).collect::<Result<_>>()?;
        parts.push(PrincipalPart { a: x, b: y, site: idx(f[2])?, coeffs });
    }
    let (out, cert) = split_singular(a.n, &points, &parts)?;
    let g = out.to_gfun(a.n, &points)?;
    let terms: Vec<Value> = out
        .terms
        .iter()
        .map(|t| json!({"a": t.a, "b": t.b, "site": t.site, "euler_power": t.m, "coeff": t.coeff.to_string()}))
        .collect();
    let checks = vec![
        check(
            "principal_parts_matched",
            cert.residual_zero,
            "section minus prescribed parts is regular at the marked points",
        ),
        check("equivariant", g.is_equivariant(1)?, "f(εu) = Adγ f(u)"),
    ];
    Ok(Outcome { results: json!({"terms": terms}), checks, csv: None })
}

fn marked_sites(
    n: u32,
    level: &Rat,
    reps: &[FinRep],
    points: &[CycNum],
    integrable: bool,
    dmax: usize,
) -> Result<Vec<Site>> {
    if reps.len() != points.len() {
        return Err(Error::InvalidInput(format!("{} representations for {} points", reps.len(), points.len())));
    }
    reps.iter()
        .zip(points)
        .map(|(r, u)| {
            let module = if integrable {
                integrable_marked(n, *r, level, dmax)?
            } else {
                GradedModule::weyl(n, *r, level, dmax)?
            };
            Ok(Site { location: Location::Marked(u.clone()), module })
        })
        .collect()
}

fn coinv_dim(a: &CoinvArgs) -> Result<Outcome> {
    check_n(a.n)?;
    let level = parse_rat(&a.k)?;
    let reps = parse_reps(&a.reps)?;
    let points = parse_points(a.n, &a.points)?;
    let integrable = match a.marked.as_str() {
        "weyl" => false,
        "integrable" | "irreducible" => true,
        s => return Err(Error::InvalidInput(format!("--marked must be weyl or integrable, not '{s}'"))),
    };
    let dmax = a.levels;
    let mut sites = marked_sites(a.n, &level, &reps, &points, integrable, dmax)?;
    let mut results = json!({});
    let mut checks = Vec::new();
    let model = match a.model.as_str() {
        "trig" => Model::Trig,
        "orb" => Model::Orb,
        s => return Err(Error::InvalidInput(format!("--model must be trig or orb, not '{s}'"))),
    };
    let mut nonvanishing_expected = true;
    if model == Model::Orb {
        let (w0, winf) = match (&a.lambda, &a.node_zero, &a.node_inf) {
            (Some(l), None, None) => node_weights(&h_weight(a.n, &level, l)?, &level)?,
            (None, Some(z), Some(i)) => (h_weight(a.n, &level, z)?, h_weight(a.n, &level, i)?),
            _ => {
                return Err(Error::InvalidInput(
                    "the orbifold model needs either --lambda or both --node-zero and --node-inf".into(),
                ))
            }
        };
        let (m0, minf) = match a.node.as_str() {
            "irreducible" => {
                (irreducible_node(a.n, Side::Zero, &w0, dmax)?, irreducible_node(a.n, Side::Infinity, &winf, dmax)?)
            }
            "verma" => (
                GradedModule::verma(a.n, Side::Zero, &w0, dmax)?,
                GradedModule::verma(a.n, Side::Infinity, &winf, dmax)?,
            ),
            s => return Err(Error::InvalidInput(format!("--node must be irreducible or verma, not '{s}'"))),
        };
        let dom = is_dominant_integral(&w0, Side::Zero)?;
        nonvanishing_expected = dom;
        results["node_zero"] = weight_json(&w0)?;
        results["node_infinity"] = weight_json(&winf)?;
        sites.insert(0, Site { location: Location::Zero, module: m0 });
        sites.push(Site { location: Location::Infinity, module: minf });
    } else if a.lambda.is_some() || a.node_zero.is_some() || a.node_inf.is_some() {
        return Err(Error::InvalidInput("node weights are only meaningful for --model orb".into()));
    }
    let report = CoinvProblem::new(a.n, model, sites)?.cc_dim(dmax)?;
    results["coinvariants"] = cc_json(&report);
    checks.push(stabilization("stabilized", &report));
    if model == Model::Trig && !integrable {
        let free: usize = reps.iter().map(|r| r.dim(a.n)).product();
        checks.push(check("weyl_freeness", report.dim == free, format!("dim {} vs Π dim V = {free}", report.dim)));
    }
    if model == Model::Orb && integrable && a.node == "irreducible" && !nonvanishing_expected {
        checks.push(check("vanishing", report.dim == 0, format!("node weight at 0 not dominant; dim {}", report.dim)));
    }
    let csv = report.levels.iter().fold(String::from("degree,poles,columns,rank,dim\n"), |mut s, l| {
        s.push_str(&format!("{},{},{},{},{}\n", l.degree, l.poles, l.columns, l.rank, l.dim));
        s
    });
    Ok(Outcome { results, checks, csv: Some(csv) })
}

fn factorize(a: &FactorizeArgs) -> Result<Outcome> {
    check_n(a.n)?;
    let level = parse_rat(&a.k)?;
    let reps = parse_reps(&a.reps)?;
    let points = parse_points(a.n, &a.points)?;
    let r = factorization_check(a.n, &level, &points, &reps, a.levels)?;
    let terms: Vec<Value> = r
        .terms
        .iter()
        .map(|t| {
            Ok(json!({
                "lambda": t.lambda.vals.iter().map(rs).collect::<Vec<_>>(),
                "node_zero": weight_json(&t.node_zero)?,
                "node_infinity": weight_json(&t.node_infinity)?,
                "dominant": t.dominant,
                "dim": t.report.dim,
                "coinvariants": cc_json(&t.report),
            }))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("lambda,dominant,dim,stabilized\n");
    for t in &r.terms {
        let l: Vec<String> = t.lambda.vals.iter().map(rs).collect();
        csv.push_str(&format!("{},{},{},{}\n", l.join(" "), t.dominant, t.report.dim, t.report.stabilized));
    }
    let checks = vec![
        check("factorization", r.lhs.dim == r.rhs, format!("lhs {} vs Σ rhs {}", r.lhs.dim, r.rhs)),
        check("non_dominant_vanishing", r.vanishing_ok, "summands with non-dominant node weight vanish"),
        Check {
            name: "stabilized".into(),
            status: if r.stabilized { Status::Pass } else { Status::Inconclusive },
            detail: format!("levels up to {}", a.levels),
        },
    ];
    Ok(Outcome {
        results: json!({"lhs": r.lhs.dim, "lhs_coinvariants": cc_json(&r.lhs), "terms": terms, "rhs": r.rhs, "equal": r.agree}),
        checks,
        csv: Some(csv),
    })
}

fn pairing_gram(a: &PairingArgs, seed: u64) -> Result<Outcome> {
    check_n(a.n)?;
    let level = parse_rat(&a.k)?;
    let (nu, _) = node_weights(&h_weight(a.n, &level, &a.lambda)?, &level)?;
    let p = NodePairing::new(a.n, &nu, a.dmax)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = pairing_suite(&p, a.samples, &mut rng)?;
    let hat = hat_iota_invariance_check(a.n, &nu, a.dmax.min(3), 1)?;
    let dims: Vec<usize> = (0..=a.dmax).map(|d| p.quotient.left[d].reps.len()).collect();
    let mut results = json!({
        "node_weight": weight_json(&nu)?,
        "verma_dims": (0..=a.dmax).map(|d| p.zero.full_dim(d)).collect::<Vec<_>>(),
        "irreducible_dims": dims,
    });
    if a.emit_gram {
        results["gram"] = crate::repmods::gram_json(&p);
    }
    let checks = vec![
        check("normalization", s.normalized, "⟨hw, hw⟩ = 1"),
        check(
            "weight_orthogonality",
            s.orthogonality_failures == 0 && s.orthogonality_checked > 0,
            format!("{} sampled pairs, {} nonzero", s.orthogonality_checked, s.orthogonality_failures),
        ),
        check(
            "invariance",
            s.invariance_failures == 0 && s.invariance_checked > 0,
            format!("{} sampled triples, {} violations", s.invariance_checked, s.invariance_failures),
        ),
        check(
            "dual_basis_invariance",
            hat.passed,
            format!("{} (generator, mode, degree) cases, max entry {}", hat.checked, rs(&hat.max_entry)),
        ),
    ];
    Ok(Outcome { results, checks, csv: None })
}

fn weight_map(a: &WeightMapArgs) -> Result<Outcome> {
    check_n(a.n)?;
    let level = parse_rat(&a.k)?;
    let lambda = h_weight(a.n, &level, &a.lambda)?;
    let (lt, ltp) = weight_tilde(&lambda, &level)?;
    let (w0, winf) = node_weights(&lambda, &level)?;
    let dominant = is_dominant_integral(&lt, Side::Zero)?;
    let level_sum = lt.coroot_pairings(Side::Zero)?.iter().fold(Rat::zero(), |s, c| s + c);
    let results = json!({
        "lambda": lambda.vals.iter().map(rs).collect::<Vec<_>>(),
        "lambda_tilde": weight_json(&lt)?,
        "lambda_tilde_prime": weight_json(&ltp)?,
        "node_zero": weight_json(&w0)?,
        "node_infinity": weight_json(&winf)?,
        "dominant": dominant,
        "node_dominant": is_dominant_integral(&w0, Side::Zero)?,
    });
    let checks = vec![check(
        "level",
        level_sum == level,
        format!("Σ_i ⟨λ̃, α_i^∨⟩ = {} at level {}", rs(&level_sum), rs(&level)),
    )];
    Ok(Outcome { results, checks, csv: None })
}

fn random_unit(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn cybe(a: &CybeArgs, seed: u64) -> Result<Outcome> {
    check_n(a.n)?;
    let rm = RMatrix::new(a.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut csv = String::from("u12_re,u12_im,u23_re,u23_im,residual\n");
    let mut max = 0.0f64;
    for _ in 0..a.samples {
        let (u12, u23) = (random_unit(&mut rng), random_unit(&mut rng));
        let r = cybe_residual(|u| rm.eval(u, Spectral::Trig), a.n as usize, u12, u23)?;
        max = max.max(r);
        csv.push_str(&format!("{},{},{},{},{:e}\n", u12.re, u12.im, u23.re, u23.im, r));
        rows.push(json!({"u12": cjson(u12), "u23": cjson(u23), "residual": r}));
    }
    let mut checks = vec![check(
        "cybe_residual",
        max < a.tol,
        format!("max residual {max:.3e} over {} points, calibration factor 1", a.samples),
    )];
    let mut results = json!({"samples": rows, "max_residual": max, "calibration": 1.0});
    if let Some(qs) = &a.degeneration {
        let (data, slope) = degeneration(a.n, Complex64::new(2.0, 0.0), qs, a.order)?;
        results["degeneration"] = json!({
            "u": [2.0, 0.0],
            "data": data.iter().map(|(q, d)| json!({"q": q, "distance": d})).collect::<Vec<_>>(),
            "slope": slope,
        });
        checks.push(check("degeneration_slope", slope >= 0.9, format!("log–log slope {slope:.4}")));
    }
    Ok(Outcome { results, checks, csv: Some(csv) })
}

fn kz_flatness(a: &KzFlatnessArgs, seed: u64) -> Result<Outcome> {
    check_n(a.n)?;
    let level = rat_to_f64(&parse_rat(&a.k)?);
    let reps = parse_reps(&a.reps)?;
    let l = reps.len();
    let sys = KzSystem::new(a.n, level, reps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut csv = String::from("sample,i,j,residual\n");
    let mut max = 0.0f64;
    for s in 0..a.samples {
        let u: Vec<Complex64> = (0..l).map(|_| random_unit(&mut rng)).collect();
        for i in 0..l {
            for j in i + 1..l {
                let r = sys.flatness_residual(i, j, &u)?;
                max = max.max(r);
                csv.push_str(&format!("{s},{i},{j},{r:e}\n"));
                rows.push(
                    json!({"points": u.iter().map(|z| cjson(*z)).collect::<Vec<_>>(), "i": i, "j": j, "residual": r}),
                );
            }
        }
    }
    let checks = vec![check("kz_flatness", max < a.tol, format!("max residual {max:.3e}"))];
    Ok(Outcome { results: json!({"samples": rows, "max_residual": max, "kappa": sys.kappa}), checks, csv: Some(csv) })
}

fn kz_transport(a: &KzTransportArgs) -> Result<Outcome> {
    check_n(a.n)?;
    let level = rat_to_f64(&parse_rat(&a.k)?);
    let reps = parse_reps(&a.reps)?;
    let u = parse_cpoints(&a.points)?;
    let sys = KzSystem::new(a.n, level, reps)?;
    if a.site >= u.len() {
        return Err(Error::InvalidInput(format!("--site {} but only {} points", a.site, u.len())));
    }
    let z0 = u[a.site].ln();
    let path: Vec<Complex64> = match &a.path {
        Some(p) => parse_cpoints(p)?,
        None => {
            (0..=16).map(|t| z0 + Complex64::from_polar(0.1, std::f64::consts::TAU * t as f64 / 16.0) - 0.1).collect()
        }
    };
    if path.len() < 2 {
        return Err(Error::InvalidInput("a path needs at least two vertices".into()));
    }
    let mut v0 = DVector::zeros(sys.dim());
    v0[0] = Complex64::one();
    let fwd = sys.transport(a.site, &u, &path, &v0, a.tol)?;
    let back_path: Vec<Complex64> = path.iter().rev().copied().collect();
    let mut u_end = u.clone();
    u_end[a.site] = path[path.len() - 1].exp();
    let back = sys.transport(a.site, &u_end, &back_path, &fwd.v, a.tol)?;
    let rev_err = (&back.v - &v0).norm();
    let closed = (path[0] - path[path.len() - 1]).norm() < 1e-12;
    let mut checks = vec![check(
        "reversal",
        rev_err < 1e3 * a.tol.max(1e-12) * (1.0 + fwd.v.norm()),
        format!("|back(forward(v0)) − v0| = {rev_err:.3e}"),
    )];
    if closed && a.path.is_none() {
        let e = (&fwd.v - &v0).norm();
        checks.push(check("small_loop_trivial", e < 1e3 * a.tol.max(1e-12), format!("|v(end) − v0| = {e:.3e}")));
    }
    let results = json!({
        "path": path.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
        "v0": v0.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
        "v": fwd.v.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
        "steps": fwd.steps,
        "rejected": fwd.rejected,
        "error_estimate": fwd.error_estimate,
        "reversal_error": rev_err,
    });
    Ok(Outcome { results, checks, csv: None })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::WEval(a) => w_eval(a),
        Command::WCheck(a) => w_check(a),
        Command::Split(a) => split(a),
        Command::CoinvDim(a) => coinv_dim(a),
        Command::Factorize(a) => factorize(a),
        Command::PairingGram(a) => pairing_gram(a, cli.seed),
        Command::WeightMap(a) => weight_map(a),
        Command::Cybe(a) => cybe(a, cli.seed),
        Command::KzFlatness(a) => kz_flatness(a, cli.seed),
        Command::KzTransport(a) => kz_transport(a),
    }
}

const COMMANDS: [&str; 10] = [
    "w-eval",
    "w-check",
    "split",
    "coinv-dim",
    "factorize",
    "pairing-gram",
    "weight-map",
    "cybe",
    "kz-flatness",
    "kz-transport",
];

/// Reads `key = value` lines (`#` starts a comment) into `--key value`
/// tokens; `true` makes a bare flag and `false` drops the key. Underscores
/// in keys stand for hyphens, except in `Q_max` and `D_max`.
pub fn config_tokens(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        let k = if k.ends_with("_max") { k.to_string() } else { k.replace('_', "-") };
        if k == "config" {
            return Err(Error::InvalidInput("config files cannot include other config files".into()));
        }
        match v {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    })
}

fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| Error::InvalidInput(format!("cannot read {path}: {e}")))?;
    let tokens = config_tokens(&text)?;
    let pos = args.iter().position(|a| COMMANDS.contains(&a.as_str())).map_or(args.len(), |p| p + 1);
    let mut out = args[..pos].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&args[pos..]);
    Ok(out)
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::TagMismatch(_) | Error::PoleProximity(_) | Error::DivisionByZero => 2,
        Error::Truncation(_) | Error::Inconclusive(_) => 3,
        Error::CheckFailed(_) | Error::Internal(_) => 1,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

/// Parses `args` (program name first), runs the command and writes any
/// requested files.
pub fn run(args: Vec<String>) -> RunOutput {
    let fail =
        |code: i32, msg: String| RunOutput { json: json!({"error": msg.clone()}), code, csv: None, message: Some(msg) };
    let args = match expand_args(args) {
        Ok(a) => a,
        Err(e) => return fail(2, e.to_string()),
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return RunOutput { json: Value::Null, code, csv: None, message: Some(e.to_string()) };
        }
    };
    let command = args.iter().find(|a| COMMANDS.contains(&a.as_str())).cloned().unwrap_or_default();
    let mut config = serde_json::to_value(&cli).unwrap_or(Value::Null);
    if let Some(obj) = config.as_object_mut() {
        if let Some(Value::Object(sub)) = obj.remove("command") {
            obj.extend(sub);
        }
    }
    let out = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            let code = error_code(&e);
            let mut r = fail(code, e.to_string());
            r.json = json!({"command": command, "config": config, "error": e.to_string(), "checks": []});
            return r;
        }
    };
    let code = if out.checks.iter().any(|c| c.status == Status::Fail) {
        1
    } else if out.checks.iter().any(|c| c.status == Status::Inconclusive) {
        3
    } else {
        0
    };
    let json = json!({"command": command, "config": config, "results": out.results, "checks": out.checks});
    let mut message = None;
    if let Some(p) = &cli.output {
        if let Err(e) = write_file(p, &format!("{}\n", serde_json::to_string_pretty(&json).unwrap_or_default())) {
            return fail(2, e.to_string());
        }
    }
    if let Some(p) = &cli.csv {
        match &out.csv {
            Some(t) => {
                if let Err(e) = write_file(p, t) {
                    return fail(2, e.to_string());
                }
            }
            None => message = Some(format!("{command} has no table; --csv ignored")),
        }
    }
    RunOutput { json, code, csv: out.csv, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("trigwzw").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn exact_rationals() {
        assert_eq!(parse_rat("2.5").unwrap(), Rat::new(5.into(), 2.into()));
        assert_eq!(parse_rat("-3/4").unwrap(), Rat::new((-3).into(), 4.into()));
        assert_eq!(parse_rat("-0.125").unwrap(), Rat::new((-1).into(), 8.into()));
        assert_eq!(parse_rat("7").unwrap(), Rat::from_integer(7.into()));
        assert!(parse_rat("1e3").is_err());
        assert!(parse_rat("").is_err());
        assert!(parse_rat("-.").is_err());
    }

    #[test]
    fn complex_syntax() {
        assert_eq!(parse_complex("1.5:-2").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn config_lines() {
        let t = config_tokens("# c\nN = 2\nemit_gram = true\nfull = false\nk=1 # level\n").unwrap();
        assert_eq!(t, vec!["--N=2", "--emit-gram", "--k=1"]);
        assert!(config_tokens("junk").is_err());
    }

    #[test]
    fn weight_map_example() {
        let r = run(args("weight-map --N 2 --k 1 --lambda 1"));
        assert_eq!(r.code, 0, "{:?}", r.message);
        assert_eq!(r.json["results"]["dominant"], json!(true));
        assert_eq!(r.json["command"], json!("weight-map"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(args("weight-map --N 2 --k 1 --lambda 1,2")).code, 2);
        assert_eq!(run(args("w-check --N 1")).code, 2);
        assert_eq!(run(args("no-such-command")).code, 2);
        assert_eq!(run(args("coinv-dim --N 2 --k 1 --V fund --points 2 --model elliptic")).code, 2);
    }

    #[test]
    fn later_flags_override() {
        let r = run(args("w-check --N 3 --N 2 --order 2"));
        assert_eq!(r.json["config"]["N"], json!(2));
    }
}
