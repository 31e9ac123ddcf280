// SPDX-License-Identifier: Apache-2.0

//! Subcommands. Each returns the text it would print; `main` decides where it goes.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use kakeya_core::algebraic::{alpha_star, QuadraticNumber};
use kakeya_core::derivation::{
    check_beta_window, derive_cor_gz, derive_lemma_incidence, derive_restriction_exponent, derive_self_improve,
    iterate_self_improvement, optimise_delta_exponent,
};
use kakeya_core::{rat, Rational};
use kakeya_sim::{build_direction_net, fit_dimension, run, to_csv, GridSpec, SimConfig, SimReport};
use serde::Serialize;

use crate::format::{bound_line, decimal_rational, exact_quadratic, exact_rational, step_table};
use crate::suite::{run_suite, Selection};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "kakeya", version, about = "Exponent derivations and tube-family simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a derivation and print its steps.
    Derive {
        name: DeriveName,
        /// α for self-improve (default 1); for beta-window the point to check (default: all of [α*, 1]).
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value = "65/28")]
        beta: String,
        /// Stopping distance for kakeya-iterate.
        #[arg(long, default_value = "1e-9")]
        eps: String,
        /// Also solve the weight LP for the δ exponent (lemma-incidence only).
        #[arg(long)]
        lp: bool,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulation from a JSON config.
    Sim {
        config: PathBuf,
        /// Sweep the `N_list` scales and fit a dimension.
        #[arg(long)]
        scale: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Base path; `<out>.json` and `<out>.csv` are written.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the acceptance criteria.
    Verify {
        /// `all`, `exponents`, `sim`, `determinism` or a list of ids such as `1,4`.
        #[arg(long, default_value = "all")]
        only: String,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a direction net and report its size.
    Net {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Fit a dimension to the `delta` and `volume` columns of a CSV.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        dim: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeriveName {
    LemmaIncidence,
    RestrictionExponent,
    SelfImprove,
    KakeyaIterate,
    BetaWindow,
    CorGz,
}

/// What a command produced: text for stdout and a verdict.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    /// Set when the command ran but an assertion did not hold.
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, failure: None }
    }
}

fn parse_rational(flag: &str, s: &str) -> Result<Rational, CliError> {
    s.parse().map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(failure)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

/// `progress` receives lines that should appear while a long command runs.
pub fn execute(cli: Cli, progress: &mut dyn FnMut(&str)) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Derive { name, alpha, beta, eps, lp, json, out } => {
            let (text, failure) = derive(name, alpha.as_deref(), &beta, &eps, lp, json)?;
            let stdout = match out {
                Some(p) => {
                    write_file(&p, &text)?;
                    format!("wrote {}\n", p.display())
                }
                None => text,
            };
            Ok(Outcome { stdout, failure })
        }
        Command::Sim { config, scale, seed, out, json } => sim(&config, scale, seed, out.as_deref(), json),
        Command::Verify { only, json, out } => {
            let selection: Selection = only.parse().map_err(CliError::Usage)?;
            let report = run_suite(&selection, |r| {
                if !json {
                    progress(&r.line());
                }
            });
            let body = to_json(&report)?;
            if let Some(p) = &out {
                write_file(p, &body)?;
            }
            let passed = report.criteria.iter().filter(|r| r.passed).count();
            let summary = format!("{passed}/{} criteria passed", report.criteria.len());
            let stdout = if json { body } else { format!("{summary}\n") };
            Ok(Outcome { stdout, failure: (!report.passed).then_some(summary) })
        }
        Command::Net { dim, n, seed, json } => {
            let spec = GridSpec::new(dim, n)?;
            let net = build_direction_net(&spec, seed);
            if json {
                return Ok(Outcome::ok(to_json(&net)?));
            }
            let mut s = format!(
                "net: dim {dim}, N = {n}, seed {seed}\n  directions: {}\n  density |net| delta^{}: {:.4}\n  candidates examined: {}\n",
                net.len(),
                dim - 1,
                net.density(),
                net.candidates_examined
            );
            // the brute-force check is quadratic
            if net.len() <= 20_000 {
                s.push_str(&format!("  min angle / delta: {:.6}\n", net.min_angle() / net.separation));
            }
            Ok(Outcome::ok(s))
        }
        Command::Fit { csv, dim } => fit(&csv, dim),
    }
}

/// The text, plus a failure message when the derivation ran but its assertion does not hold.
fn derive(name: DeriveName, alpha: Option<&str>, beta: &str, eps: &str, lp: bool, json: bool) -> Result<(String, Option<String>), CliError> {
    if name == DeriveName::BetaWindow {
        return beta_window(alpha, beta, json);
    }
    derive_text(name, alpha, beta, eps, lp, json).map(|s| (s, None))
}

fn derive_text(name: DeriveName, alpha: Option<&str>, beta: &str, eps: &str, lp: bool, json: bool) -> Result<String, CliError> {
    if lp && name != DeriveName::LemmaIncidence {
        return Err(CliError::Usage("--lp applies to lemma-incidence only".into()));
    }
    match name {
        DeriveName::LemmaIncidence => {
            let l = derive_lemma_incidence().map_err(failure)?;
            let report = if lp { Some(optimise_delta_exponent().map_err(failure)?) } else { None };
            if json {
                return to_json(&l.derivation);
            }
            let mut s = step_table(&l.derivation);
            s.push_str(&format!("{}\n", bound_line("multiplicity", &l.multiplicity)));
            s.push_str(&format!("{}\n", bound_line("volume", &l.volume)));
            s.push_str(&format!("route weight = {}\n", exact_rational(&l.theta_weight)));
            s.push_str(&format!("rho weight = {}\n", exact_rational(&l.rho_weight)));
            if let Some(r) = report {
                s.push_str(&format!("weight LP over {} candidate bounds ({} vertices)\n", r.candidates.len(), r.vertices_examined));
                for ((n, _), w) in r.candidates.iter().zip(&r.weights) {
                    s.push_str(&format!("  {n:<28} w = {w}\n"));
                }
                s.push_str(&format!("  optimal delta exponent = {}\n", exact_rational(&r.delta_exponent)));
                s.push_str(&format!("  tight: {}\n", r.tight.join(", ")));
                s.push_str(&format!("  {}\n", bound_line("combined", &r.combined)));
                s.push_str(&format!("  agrees with the derivation: {}\n", r.matches_lemma));
            }
            Ok(s)
        }
        DeriveName::RestrictionExponent => {
            let r = derive_restriction_exponent().map_err(failure)?;
            if json {
                return to_json(&r.derivation);
            }
            let mut s = step_table(&r.derivation);
            s.push_str(&format!("{}\n", bound_line("endpoint L^{10/3}", &r.endpoint_10_3)));
            s.push_str(&format!("theta = {}\n", exact_rational(&r.theta)));
            let frac = r.p.clone() - rat(2, 1);
            s.push_str(&format!("p = {} = 2 + {} ≈ {}\n", r.p, frac, decimal_rational(&r.p)));
            Ok(s)
        }
        DeriveName::SelfImprove => {
            let a = alpha.map(|a| parse_rational("alpha", a)).transpose()?.unwrap_or_else(Rational::one);
            let b = parse_rational("beta", beta)?;
            let r = derive_self_improve(a, b).map_err(failure)?;
            if json {
                return to_json(&r.derivation);
            }
            let mut s = step_table(&r.derivation);
            s.push_str(&format!("alpha = {}, beta = {}\n", r.alpha, r.beta));
            s.push_str(&format!("alpha' = {}, alpha'' = {}\n", r.alpha_prime, r.alpha_double_prime));
            s.push_str(&format!("  alpha' ≈ {}\n  alpha'' ≈ {}\n", decimal_rational(&r.alpha_prime), decimal_rational(&r.alpha_double_prime)));
            s.push_str(&format!("{}\n", bound_line("alpha' bound", &r.alpha_prime_bound)));
            s.push_str(&format!("{}\n", bound_line("alpha'' bound", &r.alpha_double_prime_bound)));
            if let Some(t) = &r.te_prime {
                s.push_str(&format!("{}\n", bound_line("TE at alpha'", t)));
            }
            if let Some(t) = &r.te_double_prime {
                s.push_str(&format!("{}\n", bound_line("TE at alpha''", t)));
            }
            s.push_str(&format!(
                "conditions: (i) {}, (ii) {}, mass nonnegative {}, mass matches {}\n",
                r.flags.condition_i, r.flags.condition_ii, r.flags.mass_nonnegative, r.flags.mass_matches
            ));
            Ok(s)
        }
        DeriveName::KakeyaIterate => {
            let e = parse_rational("eps", eps)?;
            if !e.is_positive() {
                return Err(CliError::Usage("--eps must be positive".into()));
            }
            let o = iterate_self_improvement(&e).map_err(failure)?;
            if json {
                return to_json(&o.derivation);
            }
            let mut s = format!("iterates: K = {}\n", o.k);
            for st in o.steps.iter().take(6) {
                s.push_str(&format!(
                    "  alpha_{} = {}{}\n",
                    st.k,
                    decimal_rational(&st.alpha),
                    if st.rounded { " (rounded up)" } else { "" }
                ));
            }
            if o.steps.len() > 6 {
                s.push_str("  ...\n");
            }
            s.push_str(&format!("alpha_K = {}\n", decimal_rational(&o.alpha_k)));
            s.push_str(&format!("alpha* = {}\n", exact_quadratic(&o.alpha_star)));
            s.push_str(&format!("d0 = {}\n", exact_quadratic(&o.d0)));
            for t in &o.te_statements {
                s.push_str(&format!("holds: {t}\n"));
            }
            let w = &o.window_interval;
            s.push_str(&format!(
                "beta = {} on [alpha*, 1]: (i) {}, (ii) {}\n",
                w.beta, w.condition_i.holds, w.condition_ii.holds
            ));
            Ok(s)
        }
        DeriveName::BetaWindow => unreachable!("handled by beta_window"),
        DeriveName::CorGz => {
            let d = derive_cor_gz().map_err(failure)?;
            if json {
                return to_json(&d);
            }
            let mut s = step_table(&d);
            if let Some(last) = d.steps.last() {
                s.push_str(&format!("{}\n", bound_line("trilinear multiplicity", &last.output)));
            }
            Ok(s)
        }
    }
}

fn beta_window(alpha: Option<&str>, beta: &str, json: bool) -> Result<(String, Option<String>), CliError> {
    let b = parse_rational("beta", beta)?;
    let (lo, hi) = match alpha {
        Some(a) => {
            let a = QuadraticNumber::from(parse_rational("alpha", a)?);
            (a.clone(), a)
        }
        None => (alpha_star(), QuadraticNumber::from(Rational::one())),
    };
    let r = check_beta_window(&lo, &hi, &b).map_err(failure)?;
    let verdict = (!r.holds()).then(|| format!("beta = {} fails on the window", r.beta));
    if json {
        return Ok((to_json(&r)?, verdict));
    }
    let mut s = format!("beta = {} on [{}, {}]\n", r.beta, exact_quadratic(&r.lo), exact_quadratic(&r.hi));
    for (label, c) in [("(i)", &r.condition_i), ("(ii)", &r.condition_ii)] {
        s.push_str(&format!(
            "  {label} {} >= 0: {}, min {} at alpha = {}\n",
            c.polynomial,
            if c.holds { "holds" } else { "fails" },
            exact_quadratic(&c.min),
            exact_quadratic(&c.argmin)
        ));
        if let Some(w) = &c.witness {
            s.push_str(&format!("      violated at alpha = {}\n", exact_quadratic(w)));
        }
    }
    s.push_str(&format!("  largest beta allowed by (i) at the top: {}\n", exact_quadratic(&r.beta_max_at_hi)));
    s.push_str(&format!("  smallest beta allowed by (ii) at the top: {}\n", exact_quadratic(&r.beta_min_at_hi)));
    s.push_str(&format!("window {}\n", if r.holds() { "holds" } else { "fails" }));
    Ok((s, verdict))
}

fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Usage(format!("invalid config at {path}: {}", e.into_inner()))
    })
}

fn sim(config: &Path, scale: bool, seed: Option<u64>, out: Option<&Path>, json: bool) -> Result<Outcome, CliError> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if scale && cfg.n_list.is_none() {
        return Err(CliError::Usage("invalid config at N_list: --scale needs a list of scales".into()));
    }
    if !scale && cfg.n.is_none() {
        return Err(CliError::Usage("invalid config at N: a single run needs N (use --scale for N_list)".into()));
    }
    let report = run(&cfg)?;
    let body = to_json(&report)?;
    let mut stdout = if json { body.clone() } else { summary(&report) };
    if let Some(base) = out {
        let base = base.with_extension("");
        let (jp, cp) = (base.with_extension("json"), base.with_extension("csv"));
        write_file(&jp, &body)?;
        write_file(&cp, &to_csv(&report)?)?;
        if !json {
            stdout.push_str(&format!("wrote {} and {}\n", jp.display(), cp.display()));
        }
    }
    let broken: Vec<u32> = report.scales.iter().filter(|s| !s.stats.identity_holds).map(|s| s.n).collect();
    let failure = (!broken.is_empty()).then(|| format!("double-counting identity fails at N = {broken:?}"));
    Ok(Outcome { stdout, failure })
}

fn summary(r: &SimReport) -> String {
    let c = &r.config;
    let mut s = format!(
        "sim: dim {}, generator {}, shading {}, seed {}\n",
        c.dim,
        c.generator.name.as_str(),
        c.shading.label(),
        c.seed
    );
    for sc in &r.scales {
        let st = &sc.stats;
        s.push_str(&format!(
            "N = {}: {} tubes from {} directions (m = {}), cells per tube {}..{}\n",
            sc.n, st.tubes, sc.net_size, sc.m_parallel, sc.tube_cells_min, sc.tube_cells_max
        ));
        s.push_str(&format!(
            "  lambda = {}, mu = {}, volume = {}, max multiplicity {}\n",
            decimal_rational(&st.lambda),
            decimal_rational(&st.mu),
            decimal_rational(&st.volume),
            st.max_multiplicity
        ));
        s.push_str(&format!(
            "  sum |Y(T)| = {}, sum mult = {}: identity {}\n",
            st.incidences,
            st.multiplicity_sum,
            if st.identity_holds { "holds" } else { "FAILS" }
        ));
        for m in &sc.margins {
            s.push_str(&format!("  margin against {}: {:.4} ({})\n", m.statement, m.margin, if m.passes { "within budget" } else { "below budget" }));
        }
        let ch = &sc.checks;
        if let Some(t) = &ch.two_ends {
            s.push_str(&format!("  two-ends: max ratio {:.4}, C = {:.4}, {}\n", t.max_ratio, t.constant, if t.passes { "passes" } else { "fails" }));
        }
        if let Some(p) = &ch.plany {
            s.push_str(&format!("  plany: {}/{} cells within {:.4}\n", p.cells_within, p.cells_checked, p.threshold));
        }
        if let Some(m) = &ch.m_parallel {
            s.push_str(&format!("  m-parallel: m = {}, {} directions used\n", m.m, m.directions_used));
        }
        if let Some(t) = &ch.robust_transversality {
            s.push_str(&format!("  robust transversality: {} caps sampled\n", t.rows.len()));
        }
    }
    if let Some(f) = &r.fit {
        s.push_str(&format!("fit: slope {:.4}, dimension {:.4}, r^2 {:.4}\n", f.slope, f.d_hat, f.r_squared));
    }
    s
}

fn fit(path: &Path, dim: usize) -> Result<Outcome, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Usage(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Usage(format!("{}: no `{name}` column", path.display())))
    };
    let (di, vi) = (col("delta")?, col("volume")?);
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(e.to_string()))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|x| x.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Usage(format!("row {}: column {} is not a number", line + 1, headers[i].to_string())))
        };
        rows.push((num(di)?, num(vi)?));
    }
    let f = fit_dimension(dim, &rows)?;
    Ok(Outcome::ok(format!(
        "{} scales: slope {:.6}, intercept {:.6}, dimension {:.6}, r^2 {:.6}\n",
        rows.len(),
        f.slope,
        f.intercept,
        f.d_hat,
        f.r_squared
    )))
}
