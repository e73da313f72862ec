//! `spherecap` — coverage probabilities for random spherical caps, GCC
//! condition-number distributions, smallest including caps of explicit
//! instances, and seeded Monte Carlo validation of all of it.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use spherecap::coeffs::CoeffTable;
use spherecap::condition;
use spherecap::coverage::{self, CoverageQuery};
use spherecap::geom;
use spherecap::mc;
use spherecap::quad::QuadSpec;

use spherecap_cli::emit::{self, Emission, Format};
use spherecap_cli::suites;

#[derive(Parser)]
#[command(
    name = "spherecap",
    version,
    about = "Spherical cap coverage probabilities and GCC condition numbers",
    propagate_version = true
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo worker threads (0 = one per core). Results are
    /// identical for any worker count.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Relative tolerance for the adaptive quadrature.
    #[arg(long, global = true, default_value_t = 1e-12)]
    rel_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the coefficients C(m, 1..m).
    Coeffs {
        #[arg(long)]
        m: usize,
        /// closed | system | mc
        #[arg(long, default_value = "system")]
        method: String,
        /// Samples for the mc method.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Probability that n caps of radius alpha fail to cover S^m
    /// (exact for alpha ≥ π/2, an upper bound below).
    Coverage {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        /// Interpret --alpha in degrees.
        #[arg(long)]
        degrees: bool,
    },
    /// Conditional condition-number tails on an ε grid.
    Condition {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: usize,
        /// Comma-separated thresholds.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Interpret --eps values as 1/ε.
        #[arg(long)]
        inv_eps: bool,
    },
    /// Smallest including cap of an explicit instance file (.csv or .json).
    Gcc {
        #[arg(long)]
        file: PathBuf,
    },
    /// Expected number of caps needed to cover S^m.
    ExpectedCaps {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        degrees: bool,
        /// bound | series | mc
        #[arg(long, default_value = "series")]
        method: String,
        /// Series terms past n = m + 1.
        #[arg(long, default_value_t = 400)]
        terms: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Per-trial cap count before censoring (mc method).
        #[arg(long, default_value_t = 10_000)]
        draw_cap: usize,
    },
    /// Monte Carlo estimators.
    Simulate {
        #[command(subcommand)]
        estimator: Estimator,
    },
    /// Run a validation suite; exit code 0 iff every check passes.
    Validate {
        /// table1 | closed-forms | identities | normalization |
        /// mc-coverage | mc-condition | expected-caps | ln-cond |
        /// sic-oracle | det-moments | bound-dominance | all
        suite: String,
        /// Override the suite's default sample count.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Estimator {
    /// Frequency estimate of p(n, m, alpha).
    Coverage {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        degrees: bool,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Conditional condition-number tail frequencies.
    CondTails {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long)]
        inv_eps: bool,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Sequential caps until coverage.
    ExpectedCaps {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        degrees: bool,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        draw_cap: usize,
    },
    /// Mean of ln C(A) over random instances.
    LnCond {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// E|det B|^{m-k+1} for rows uniform on S^{k-1}.
    DetMoment {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Simplex-moment estimate of one coefficient C(m, k).
    Coeff {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn to_radians(alpha: f64, degrees: bool) -> f64 {
    if degrees {
        alpha * std::f64::consts::PI / 180.0
    } else {
        alpha
    }
}

fn convert_eps(eps: &[f64], inv: bool) -> anyhow::Result<Vec<f64>> {
    eps.iter()
        .map(|&e| {
            let v = if inv { 1.0 / e } else { e };
            if !(v > 0.0 && v <= 1.0) {
                bail!("threshold {e} maps to ε = {v}, outside (0, 1]");
            }
            Ok(v)
        })
        .collect()
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .context("configuring worker pool")?;
    }
    let spec = QuadSpec {
        rel_tol: cli.rel_tol,
        ..QuadSpec::default()
    };
    let base = serde_json::json!({
        "format": format!("{:?}", cli.format).to_lowercase(),
        "workers": cli.workers,
        "rel_tol": cli.rel_tol,
    });

    let emission: Emission = match &cli.command {
        Command::Coeffs {
            m,
            method,
            trials,
            seed,
        } => {
            let table = match method.as_str() {
                "closed" => CoeffTable::from_closed_forms(*m)?,
                "system" => CoeffTable::from_linear_system(*m, &spec)?,
                "mc" => CoeffTable::from_monte_carlo(*m, *trials, *seed)?,
                other => bail!("unknown method {other:?} (closed | system | mc)"),
            };
            let mut params = base.clone();
            params["m"] = (*m).into();
            params["method"] = method.as_str().into();
            if method == "mc" {
                params["trials"] = (*trials).into();
                params["seed"] = (*seed).into();
            }
            Emission {
                config: emit::config("coeffs", params),
                results: serde_json::to_value(&table)?,
                csv: table.to_csv(),
            }
        }

        Command::Coverage {
            n,
            m,
            alpha,
            degrees,
        } => {
            let alpha = to_radians(*alpha, *degrees);
            let q = CoverageQuery::new(*n, *m, alpha)?;
            let table = CoeffTable::from_linear_system(*m, &spec)?;
            let (kind, value) = if alpha >= std::f64::consts::PI / 2.0 {
                ("exact", coverage::p_not_covered_exact(&q, &table, &spec)?)
            } else {
                (
                    "upper-bound",
                    coverage::p_not_covered_bound(&q, &table, &spec)?,
                )
            };
            let mut params = base.clone();
            params["n"] = (*n).into();
            params["m"] = (*m).into();
            params["alpha_radians"] = alpha.into();
            Emission {
                config: emit::config("coverage", params),
                results: serde_json::json!({
                    "kind": kind,
                    "p_not_covered": value,
                }),
                csv: format!(
                    "n,m,alpha_radians,kind,p_not_covered\n{n},{m},{alpha},{kind},{value}\n"
                ),
            }
        }

        Command::Condition { n, m, eps, inv_eps } => {
            let eps = convert_eps(eps, *inv_eps)?;
            let table = CoeffTable::from_linear_system(*m, &spec)?;
            let mut rows = Vec::new();
            let mut csv = String::from("n,m,eps,feasible_tail,infeasible_tail_bound\n");
            for &e in &eps {
                let feasible = condition::cond_tail_feasible(*n, *m, e, &table, &spec)?;
                let infeasible = if *n as usize == *m + 1 {
                    None
                } else {
                    Some(condition::cond_tail_infeasible_bound(
                        *n, *m, e, &table, &spec,
                    )?)
                };
                csv.push_str(&format!(
                    "{n},{m},{e},{feasible},{}\n",
                    infeasible.map_or(String::new(), |v| v.to_string())
                ));
                rows.push(serde_json::json!({
                    "eps": e,
                    "feasible_tail": feasible,
                    "infeasible_tail_bound": infeasible,
                }));
            }
            let mut params = base.clone();
            params["n"] = (*n).into();
            params["m"] = (*m).into();
            params["eps"] = serde_json::to_value(&eps)?;
            Emission {
                config: emit::config("condition", params),
                results: serde_json::Value::Array(rows),
                csv,
            }
        }

        Command::Gcc { file } => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            let inst = if text.trim_start().starts_with('{') {
                geom::instance_from_json(&text)?
            } else {
                geom::instance_from_csv(&text)?
            };
            let sic = geom::sic_general(&inst)?;
            let mut params = base.clone();
            params["file"] = file.display().to_string().into();
            params["n"] = inst.n().into();
            params["m"] = inst.m().into();
            let blocking = sic
                .blocking_set
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";");
            let center = sic
                .center
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";");
            Emission {
                config: emit::config("gcc", params),
                csv: format!(
                    "t,rho,condition,feasibility,blocking_set,center\n{},{},{},{},{blocking},{center}\n",
                    sic.t,
                    sic.rho,
                    sic.condition,
                    serde_json::to_value(sic.feasibility)?.as_str().unwrap(),
                ),
                results: serde_json::to_value(&sic)?,
            }
        }

        Command::ExpectedCaps {
            m,
            alpha,
            degrees,
            method,
            terms,
            trials,
            seed,
            draw_cap,
        } => {
            let alpha = to_radians(*alpha, *degrees);
            let mut params = base.clone();
            params["m"] = (*m).into();
            params["alpha_radians"] = alpha.into();
            params["method"] = method.as_str().into();
            let (results, csv) = match method.as_str() {
                "bound" => {
                    let b = coverage::expected_caps_bound(*m, alpha)?;
                    (
                        serde_json::json!({"upper_bound": b}),
                        format!("m,alpha_radians,method,upper_bound\n{m},{alpha},bound,{b}\n"),
                    )
                }
                "series" => {
                    let table = CoeffTable::from_linear_system(*m, &spec)?;
                    let s = coverage::expected_caps_series(*m, alpha, &table, &spec, *terms)?;
                    params["terms"] = (*terms).into();
                    (
                        serde_json::json!({
                            "partial_sum": s.partial_sum,
                            "tail_bound": s.tail_bound,
                            "upper_estimate": s.partial_sum + s.tail_bound,
                        }),
                        format!(
                            "m,alpha_radians,method,partial_sum,tail_bound,upper_estimate\n\
                             {m},{alpha},series,{},{},{}\n",
                            s.partial_sum,
                            s.tail_bound,
                            s.partial_sum + s.tail_bound
                        ),
                    )
                }
                "mc" => {
                    let est = mc::mc_expected_caps(*m, alpha, *trials, *seed, *draw_cap)?;
                    params["trials"] = (*trials).into();
                    params["seed"] = (*seed).into();
                    params["draw_cap"] = (*draw_cap).into();
                    (
                        serde_json::json!({
                            "estimate": est.estimate,
                            "censored": est.censored,
                            "is_lower_bound": est.is_lower_bound,
                        }),
                        format!(
                            "m,alpha_radians,method,value,std_error,ci_lo,ci_hi,trials,seed,censored\n\
                             {m},{alpha},mc,{},{},{},{},{},{},{}\n",
                            est.estimate.value,
                            est.estimate.std_error,
                            est.estimate.ci95.0,
                            est.estimate.ci95.1,
                            est.estimate.samples,
                            est.estimate.seed,
                            est.censored
                        ),
                    )
                }
                other => bail!("unknown method {other:?} (bound | series | mc)"),
            };
            Emission {
                config: emit::config("expected-caps", params),
                results,
                csv,
            }
        }

        Command::Simulate { estimator } => simulate(estimator, &base)?,

        Command::Validate {
            suite,
            trials,
            seed,
        } => {
            let reports = suites::run_suite(suite, *trials, *seed, &spec)?;
            let mut all_pass = true;
            for r in &reports {
                println!("{r}");
                all_pass &= r.passed;
            }
            println!(
                "validate {suite}: {}",
                if all_pass { "ALL PASS" } else { "FAILURES" }
            );
            std::process::exit(if all_pass { 0 } else { 1 });
        }
    };

    emission.write(cli.format, cli.out.as_deref())?;
    Ok(())
}

fn mc_csv(estimator: &str, est: &mc::McEstimate) -> String {
    format!(
        "estimator,value,std_error,ci_lo,ci_hi,trials,seed\n{estimator},{},{},{},{},{},{}\n",
        est.value, est.std_error, est.ci95.0, est.ci95.1, est.samples, est.seed
    )
}

fn simulate(est: &Estimator, base: &serde_json::Value) -> anyhow::Result<Emission> {
    Ok(match est {
        Estimator::Coverage {
            n,
            m,
            alpha,
            degrees,
            trials,
            seed,
        } => {
            let alpha = to_radians(*alpha, *degrees);
            let e = mc::mc_coverage(*n, *m, alpha, *trials, *seed)?;
            let mut params = base.clone();
            params["n"] = (*n).into();
            params["m"] = (*m).into();
            params["alpha_radians"] = alpha.into();
            params["trials"] = (*trials).into();
            params["seed"] = (*seed).into();
            Emission {
                config: emit::config("simulate coverage", params.clone()),
                results: e.record("coverage", params),
                csv: mc_csv("coverage", &e),
            }
        }
        Estimator::CondTails {
            n,
            m,
            eps,
            inv_eps,
            trials,
            seed,
        } => {
            let eps = convert_eps(eps, *inv_eps)?;
            let r = mc::mc_condition_tails(*n, *m, &eps, *trials, *seed)?;
            let mut csv = String::from(
                "eps,feasible_tail,feasible_se,infeasible_tail,infeasible_se\n",
            );
            for (i, &e) in r.eps.iter().enumerate() {
                csv.push_str(&format!(
                    "{e},{},{},{},{}\n",
                    r.feasible_tail[i].value,
                    r.feasible_tail[i].std_error,
                    r.infeasible_tail[i].value,
                    r.infeasible_tail[i].std_error
                ));
            }
            let mut params = base.clone();
            params["n"] = (*n).into();
            params["m"] = (*m).into();
            params["trials"] = (*trials).into();
            params["seed"] = (*seed).into();
            Emission {
                config: emit::config("simulate cond-tails", params),
                results: serde_json::to_value(&r)?,
                csv,
            }
        }
        Estimator::ExpectedCaps {
            m,
            alpha,
            degrees,
            trials,
            seed,
            draw_cap,
        } => {
            let alpha = to_radians(*alpha, *degrees);
            let r = mc::mc_expected_caps(*m, alpha, *trials, *seed, *draw_cap)?;
            let mut params = base.clone();
            params["m"] = (*m).into();
            params["alpha_radians"] = alpha.into();
            params["trials"] = (*trials).into();
            params["seed"] = (*seed).into();
            params["draw_cap"] = (*draw_cap).into();
            Emission {
                config: emit::config("simulate expected-caps", params.clone()),
                results: serde_json::json!({
                    "record": r.estimate.record("expected-caps", params),
                    "censored": r.censored,
                    "is_lower_bound": r.is_lower_bound,
                }),
                csv: mc_csv("expected-caps", &r.estimate),
            }
        }
        Estimator::LnCond { n, m, trials, seed } => {
            let r = mc::mc_expected_ln_cond(*n, *m, *trials, *seed)?;
            let mut params = base.clone();
            params["n"] = (*n).into();
            params["m"] = (*m).into();
            params["trials"] = (*trials).into();
            params["seed"] = (*seed).into();
            Emission {
                config: emit::config("simulate ln-cond", params.clone()),
                results: serde_json::json!({
                    "record": r.estimate.record("ln-cond", params),
                    "bootstrap_ci95": [r.bootstrap_ci95.0, r.bootstrap_ci95.1],
                    "ill_posed_count": r.ill_posed_count,
                }),
                csv: mc_csv("ln-cond", &r.estimate),
            }
        }
        Estimator::DetMoment { m, k, trials, seed } => {
            let e = mc::mc_det_moment(*m, *k, *trials, *seed)?;
            let mut params = base.clone();
            params["m"] = (*m).into();
            params["k"] = (*k).into();
            params["trials"] = (*trials).into();
            params["seed"] = (*seed).into();
            Emission {
                config: emit::config("simulate det-moment", params.clone()),
                results: e.record("det-moment", params),
                csv: mc_csv("det-moment", &e),
            }
        }
        Estimator::Coeff { m, k, trials, seed } => {
            let e = spherecap::coeffs::monte_carlo(*m, *k, *trials, *seed)?;
            let mut params = base.clone();
            params["m"] = (*m).into();
            params["k"] = (*k).into();
            params["trials"] = (*trials).into();
            params["seed"] = (*seed).into();
            Emission {
                config: emit::config("simulate coeff", params.clone()),
                results: e.record("coeff", params),
                csv: mc_csv("coeff", &e),
            }
        }
    })
}
