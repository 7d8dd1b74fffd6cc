//! Per-model scenario execution: build the economy, solve, assemble the CSV
//! path table and the JSON report. Solver diagnostics (no agreement, no
//! root, regime violations, necessity failures without a relevant path) are
//! recorded in the report and surfaced through the exit code, never hidden.

use anyhow::{Context, Result};

use bubblelab_core::bewley::{
    self, check_necessity_invest, growth_matrix, persistence_transform, simulate_invest_equilibrium,
    wealth_lower_bound, MarkovSpec,
};
use bubblelab_core::closed_forms::{ces_verdict, crra_steady_state, TwoSectorParams};
use bubblelab_core::diamond::{
    self, autarky_rate, bubbly_steady_state, shoot, steady_capital, DiamondEconomy, Production,
};
use bubblelab_core::numerics::SmallMatrix;
use bubblelab_core::olg::{
    check_necessity, solve_equilibrium, EconomyOlg, NecessityReport, OlgError, UtilitySpec,
    RELEVANCE_FLOOR,
};
use bubblelab_core::paths::PathSpec;
use bubblelab_core::pref_shock::{
    check_necessity_pref, solve_pref_sweep, PrefShockEconomy, PrefShockError,
};

use crate::config::{self, ModelTag, ScenarioFile};
use crate::report::{cell, Report, VerdictJson};

pub struct RunOutcome {
    pub csv: Option<String>,
    pub report: Report,
    /// Exit code 2: the solver reported a diagnostic rather than a clean
    /// equilibrium.
    pub solver_diagnostic: bool,
}

pub fn execute(scenario: &ScenarioFile) -> Result<RunOutcome> {
    match scenario.model {
        ModelTag::Textbook => run_textbook(scenario),
        ModelTag::TwoSector => run_two_sector(scenario),
        ModelTag::Ces => run_ces(scenario),
        ModelTag::Wilson => run_wilson(scenario),
        ModelTag::Crra => run_crra(scenario),
        ModelTag::OlgGeneric => run_olg_generic(scenario),
        ModelTag::Diamond => run_diamond(scenario),
        ModelTag::BewleyInvest => run_bewley_invest(scenario),
        ModelTag::BewleyPref => run_bewley_pref(scenario),
    }
}

fn necessity_note(report: &mut Report, necessity: &NecessityReport<f64>) {
    if necessity.borderline {
        report
            .diagnostics
            .push("Borderline: a necessity inequality sits within 1e-9".to_string());
    }
}

/// Shared driver for the OLG-family scenarios.
fn run_olg_family(scenario: &ScenarioFile, economy: EconomyOlg<f64>) -> Result<RunOutcome> {
    let necessity = check_necessity(&economy)?;
    let mut report = Report::new(scenario.model.as_str(), &necessity);
    necessity_note(&mut report, &necessity);

    let solved = solve_equilibrium(
        &economy,
        scenario.horizon,
        scenario.solver.terminals,
        scenario.solver.agree_tol,
    );
    let eq = match solved {
        Ok(eq) => eq,
        Err(err @ OlgError::NoAgreement { .. }) => {
            report.diagnostics.push(format!("NoAgreement: {err}"));
            if !necessity.holds {
                report
                    .diagnostics
                    .push("NecessityFails: condition fails and no equilibrium agreed".to_string());
            }
            return Ok(RunOutcome {
                csv: None,
                report,
                solver_diagnostic: true,
            });
        }
        Err(err) => return Err(err).context("equilibrium solve failed"),
    };

    report.verdict = Some(VerdictJson::from_verdict(&eq.verdict));
    report.push_extra("agreement", eq.early_window_agreement);
    report.push_extra("relevance", eq.relevance);
    if let Some(ratio) = eq.analytic_yield_ratio {
        report.push_extra("analytic_yield_ratio", ratio);
    }

    let mut solver_diagnostic = false;
    if !necessity.holds && eq.relevance < RELEVANCE_FLOOR {
        report.diagnostics.push(
            "NecessityFails: condition fails and the computed path is asymptotically irrelevant"
                .to_string(),
        );
        solver_diagnostic = true;
    }

    let path = &eq.path;
    let n = path.price.len();
    let mut csv = String::from("t,a,b,D,P,p,R,q,yield\n");
    for t in 0..n {
        let rate = if t + 1 < n && !path.rates.is_empty() {
            path.rates[t]
        } else {
            f64::NAN
        };
        let q = if path.log_q.is_empty() {
            f64::NAN
        } else {
            path.log_q[t].exp()
        };
        let yield_t = if path.yields.is_empty() {
            f64::NAN
        } else {
            path.yields[t]
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            t,
            cell(path.a[t]),
            cell(path.b[t]),
            cell(path.d[t]),
            cell(path.price[t]),
            cell(path.detrended[t]),
            cell(rate),
            cell(q),
            cell(yield_t),
        ));
    }
    Ok(RunOutcome {
        csv: Some(csv),
        report,
        solver_diagnostic,
    })
}

fn run_textbook(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::TextbookParams = config::params(scenario)?;
    let economy = EconomyOlg::new(
        UtilitySpec::CobbDouglasLog { beta: p.beta },
        PathSpec::geometric(p.a0, p.a_growth)?,
        PathSpec::geometric(0.0, 1.0)?,
        PathSpec::geometric(p.d0, p.d_growth)?,
    )?;
    run_olg_family(scenario, economy)
}

fn run_two_sector(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::TwoSectorCfg = config::params(scenario)?;
    let params = TwoSectorParams {
        alpha: p.alpha,
        beta: p.beta,
        g1: p.g1,
        g2: p.g2,
    };
    let economy = params.as_olg_economy()?;
    let mut outcome = run_olg_family(scenario, economy)?;
    outcome.report.push_extra("yield_ratio", params.yield_ratio());
    outcome
        .report
        .push_extra("dividend_growth", params.dividend_growth());
    Ok(outcome)
}

fn run_wilson(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::WilsonParams = config::params(scenario)?;
    let economy = EconomyOlg::new(
        UtilitySpec::Linear { beta: p.beta },
        PathSpec::geometric(p.a0, p.g)?,
        PathSpec::geometric(0.0, 1.0)?,
        PathSpec::geometric(p.d0, p.g_d)?,
    )?;
    run_olg_family(scenario, economy)
}

fn run_crra(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::CrraParams = config::params(scenario)?;
    let economy = EconomyOlg::new(
        UtilitySpec::Crra {
            beta: p.beta,
            gamma: p.gamma,
        },
        PathSpec::geometric(p.a0, p.g)?,
        PathSpec::geometric(p.w * p.a0, p.g)?,
        PathSpec::constant(p.d)?,
    )?;
    let mut outcome = run_olg_family(scenario, economy)?;
    match crra_steady_state(p.beta, p.gamma, p.g, p.w) {
        Ok(ss) => {
            outcome.report.push_extra("xi1_star", ss.xi1_star);
            outcome.report.push_extra("kappa", ss.kappa);
            outcome.report.push_extra("lambda1", ss.lambda1);
            outcome.report.push_extra("lambda2", ss.lambda2);
            outcome
                .report
                .push_extra("determinate", if ss.determinate { 1.0 } else { 0.0 });
            if ss.singular {
                outcome
                    .report
                    .diagnostics
                    .push("Singular linearization: gamma = 1 + w/xi1*".to_string());
            }
        }
        Err(err) => outcome
            .report
            .diagnostics
            .push(format!("No bubbly steady state: {err}")),
    }
    Ok(outcome)
}

fn run_olg_generic(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::OlgGenericParams = config::params(scenario)?;
    let economy = EconomyOlg::new(p.utility.build(), p.a.build()?, p.b.build()?, p.d.build()?)?;
    run_olg_family(scenario, economy)
}

/// Asymptotic factor-income growth under CES production: output growth is
/// dominated by the faster factor when `sigma > 1` and the slower one when
/// `sigma < 1`; labor income then grows at `G_F^(1/sigma) G_L^(1-1/sigma)`
/// and capital income at `G_F^(1/sigma) G_K^(1-1/sigma)`.
fn ces_growth_rates(sigma: f64, alpha: f64, g_k: f64, g_l: f64) -> (f64, f64) {
    let m = 1.0 - 1.0 / sigma;
    let g_f = if sigma == 1.0 {
        g_k.powf(alpha) * g_l.powf(1.0 - alpha)
    } else if m > 0.0 {
        g_k.max(g_l)
    } else {
        g_k.min(g_l)
    };
    let scale = g_f.powf(1.0 / sigma);
    (scale * g_l.powf(m), scale * g_k.powf(m))
}

fn run_ces(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::CesParams = config::params(scenario)?;
    let rep = ces_verdict(p.sigma, p.alpha, p.beta, p.g_k, p.g_l, p.k0, p.l0)?;
    let (g, g_d) = ces_growth_rates(p.sigma, p.alpha, p.g_k, p.g_l);
    let necessity = NecessityReport {
        autarky_rate: 0.0,
        dividend_growth: g_d,
        growth: g,
        holds: 0.0 < g_d && g_d < g,
        borderline: (g_d - g).abs() <= 1e-9 * g.max(1.0),
    };
    let mut report = Report::new(scenario.model.as_str(), &necessity);
    necessity_note(&mut report, &necessity);
    report.verdict = Some(VerdictJson {
        label: rep.label.as_str().to_string(),
        tail_decay: Some(rep.yield_ratio),
        relevance: None,
    });
    report.push_extra("yield0", rep.yield0);
    report.push_extra("yield_ratio", rep.yield_ratio);

    let mut csv = String::from("t,yield\n");
    for t in 0..=scenario.horizon {
        csv.push_str(&format!("{},{}\n", t, cell(rep.yield_at(t))));
    }
    Ok(RunOutcome {
        csv: Some(csv),
        report,
        solver_diagnostic: false,
    })
}

fn run_diamond(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::DiamondParams = config::params(scenario)?;
    let economy = DiamondEconomy::new(
        Production::CobbDouglas {
            a: p.a_tfp,
            alpha: p.alpha,
            delta: p.delta,
        },
        p.beta,
        PathSpec::geometric(p.d0, p.g_d)?,
        p.k0,
    )?;
    let necessity = diamond::check_necessity(&economy);
    let mut report = Report::new(scenario.model.as_str(), &necessity);
    necessity_note(&mut report, &necessity);
    report.push_extra("k_star", steady_capital(&economy));
    report.push_extra("autarky_rate", autarky_rate(&economy));
    if let Ok((k_bar, p_bar)) = bubbly_steady_state(&economy) {
        report.push_extra("k_bar", k_bar);
        report.push_extra("p_bar", p_bar);
    }

    let result = match shoot(&economy, scenario.horizon, scenario.solver.shoot_tol) {
        Ok(result) => result,
        Err(err @ diamond::DiamondError::NoEquilibriumFound { .. }) => {
            report.diagnostics.push(format!("NoEquilibriumFound: {err}"));
            if !necessity.holds {
                report
                    .diagnostics
                    .push("NecessityFails: condition fails and no bounded path exists".to_string());
            }
            return Ok(RunOutcome {
                csv: None,
                report,
                solver_diagnostic: true,
            });
        }
        Err(err) => return Err(err).context("shooting failed"),
    };

    report.verdict = Some(VerdictJson::from_verdict(&result.verdict));
    report.push_extra("p0_star", result.p0_star);
    report.push_extra("relevance", result.relevance);
    let mut solver_diagnostic = false;
    if result.multiple_equilibria {
        report
            .diagnostics
            .push("Multiplicity: P = 0 is also a bounded path (zero dividends)".to_string());
    }
    if result.monotonicity_violated {
        report
            .diagnostics
            .push("Shooting outcomes were not monotone in P0".to_string());
    }
    if !necessity.holds && result.relevance < RELEVANCE_FLOOR {
        report.diagnostics.push(
            "NecessityFails: condition fails and the computed path is asymptotically irrelevant"
                .to_string(),
        );
        solver_diagnostic = true;
    }

    let path = &result.path;
    let mut csv = String::from("t,K,P,R,D,yield\n");
    for t in 0..path.k.len() {
        let rate = path.r.get(t).copied().unwrap_or(f64::NAN);
        let yield_t = if path.p[t] > 0.0 {
            path.d[t] / path.p[t]
        } else {
            f64::NAN
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t,
            cell(path.k[t]),
            cell(path.p[t]),
            cell(rate),
            cell(path.d[t]),
            cell(yield_t),
        ));
    }
    Ok(RunOutcome {
        csv: Some(csv),
        report,
        solver_diagnostic,
    })
}

fn run_bewley_invest(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::BewleyInvestParams = config::params(scenario)?;
    let rows: Vec<Vec<f64>> = p.pi.clone();
    let pi = SmallMatrix::from_rows(&rows)?;
    let pi = persistence_transform(&pi, p.tau)?;
    let spec = MarkovSpec::new(p.z.clone(), pi)?;
    let d = PathSpec::geometric(p.d0, p.g_d)?;
    let necessity = check_necessity_invest(&spec, p.beta, if p.d0 == 0.0 { 0.0 } else { p.g_d })?;
    let mut report = Report::new(scenario.model.as_str(), &necessity);
    necessity_note(&mut report, &necessity);
    report.push_extra("rho", necessity.growth);
    let bound = wealth_lower_bound(&p.v0, &growth_matrix(&spec, p.beta), 0)?;
    report.push_extra("w0", bound.w0);

    let eq = match simulate_invest_equilibrium(&spec, p.beta, &p.v0, &d, scenario.horizon) {
        Ok(eq) => eq,
        Err(
            err @ (bewley::BewleyError::RegimeViolation { .. }
            | bewley::BewleyError::SaverMassTooPersistent { .. }
            | bewley::BewleyError::ZeroPrice { .. }),
        ) => {
            report.diagnostics.push(format!("RegimeViolation: {err}"));
            if !necessity.holds {
                report
                    .diagnostics
                    .push("NecessityFails: condition fails and the regime broke".to_string());
            }
            return Ok(RunOutcome {
                csv: None,
                report,
                solver_diagnostic: true,
            });
        }
        Err(err) => return Err(err).context("investment-shock simulation failed"),
    };

    report.verdict = Some(VerdictJson::from_verdict(&eq.verdict));
    if let Some(&g) = eq.realized_growth.last() {
        report.push_extra("realized_growth", g);
    }
    if !necessity.holds {
        report.diagnostics.push(
            "Necessity condition fails (G_d >= rho); verdict reflects the computed path"
                .to_string(),
        );
    }

    let n = spec.states();
    let mut csv = String::from("t");
    for i in 0..n {
        csv.push_str(&format!(",W_{i}"));
    }
    csv.push_str(",P,R,yield\n");
    for t in 0..eq.shares.len() {
        csv.push_str(&format!("{t}"));
        for w in eq.wealth_detrended(t) {
            csv.push_str(&format!(",{}", cell(w)));
        }
        let rate = eq.rates.get(t).copied().unwrap_or(f64::NAN);
        csv.push_str(&format!(
            ",{},{},{}\n",
            cell(eq.price_detrended[t]),
            cell(rate),
            cell(eq.yields[t]),
        ));
    }
    Ok(RunOutcome {
        csv: Some(csv),
        report,
        solver_diagnostic: false,
    })
}

fn run_bewley_pref(scenario: &ScenarioFile) -> Result<RunOutcome> {
    let p: config::BewleyPrefParams = config::params(scenario)?;
    let economy = PrefShockEconomy::new(
        p.beta,
        p.gamma,
        p.atoms.iter().map(|a| (a[0], a[1])).collect(),
        PathSpec::geometric(p.a0, p.g_a)?,
        PathSpec::geometric(p.d0, p.g_d)?,
    )?;
    let necessity = check_necessity_pref(&economy);
    let mut report = Report::new(scenario.model.as_str(), &necessity);
    necessity_note(&mut report, &necessity);
    report.push_extra("price_floor", economy.price_floor());

    let eq = match solve_pref_sweep(
        &economy,
        scenario.horizon,
        scenario.solver.terminals,
        scenario.solver.agree_tol,
    ) {
        Ok(eq) => eq,
        Err(err @ (PrefShockError::NoRoot { .. } | PrefShockError::NoAgreement { .. })) => {
            let label = match err {
                PrefShockError::NoRoot { .. } => "NoRoot",
                _ => "NoAgreement",
            };
            report.diagnostics.push(format!("{label}: {err}"));
            if !necessity.holds {
                report
                    .diagnostics
                    .push("NecessityFails: condition fails and the solve broke down".to_string());
            }
            return Ok(RunOutcome {
                csv: None,
                report,
                solver_diagnostic: true,
            });
        }
        Err(err) => return Err(err).context("preference-shock solve failed"),
    };

    report.verdict = Some(VerdictJson::from_verdict(&eq.verdict));
    report.push_extra("agreement", eq.early_window_agreement);
    report.push_extra("relevance", eq.relevance);
    let mut solver_diagnostic = false;
    if !eq.path.multiple_roots.is_empty() {
        report.diagnostics.push(format!(
            "MultipleRoots at t = {:?} (largest kept)",
            eq.path.multiple_roots
        ));
    }
    if !necessity.holds && eq.relevance < RELEVANCE_FLOOR {
        report.diagnostics.push(
            "NecessityFails: condition fails and the computed path is asymptotically irrelevant"
                .to_string(),
        );
        solver_diagnostic = true;
    }

    let path = &eq.path;
    let mut csv = String::from("t,A,D,theta_bar,R,P,w,yield\n");
    for t in 0..path.theta_bar.len() {
        let a_t = economy.a.eval(t)?;
        let d_t = economy.d.eval(t)?;
        let yield_t = if path.prices[t] > 0.0 {
            d_t / path.prices[t]
        } else {
            f64::NAN
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            t,
            cell(a_t),
            cell(d_t),
            cell(path.theta_bar[t]),
            cell(path.rates[t]),
            cell(path.prices[t]),
            cell(path.wealth[t]),
            cell(yield_t),
        ));
    }
    Ok(RunOutcome {
        csv: Some(csv),
        report,
        solver_diagnostic,
    })
}

/// One sweep row: rerun the scenario with `[params].key` overridden.
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<RunOutcome>,
}

pub fn sweep(raw: &str, key: &str, grid: &[f64]) -> Result<Vec<SweepRow>> {
    let doc: toml::Table = raw.parse().context("config is not valid TOML")?;
    // Fail fast on an undeclared parameter before running anything.
    {
        let mut probe = doc.clone();
        config::override_param(&mut probe, key, 0.0)?;
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &value in grid {
        let mut patched = doc.clone();
        config::override_param(&mut patched, key, value)?;
        let outcome = toml::Value::Table(patched)
            .try_into::<ScenarioFile>()
            .context("config does not match the scenario schema")
            .and_then(|scenario| execute(&scenario));
        rows.push(SweepRow { value, outcome });
    }
    Ok(rows)
}

pub fn sweep_csv(key: &str, rows: &[SweepRow]) -> String {
    let mut csv = String::from("param,value,R,G_d,G,holds,borderline,label,relevance,status\n");
    for row in rows {
        match &row.outcome {
            Ok(out) => {
                let n = &out.report.necessity;
                let (label, relevance) = match &out.report.verdict {
                    Some(v) => (
                        v.label.clone(),
                        v.relevance.map(cell).unwrap_or_default(),
                    ),
                    None => (String::new(), String::new()),
                };
                let status = if out.solver_diagnostic {
                    format!(
                        "diagnostic: {}",
                        out.report.diagnostics.join("; ").replace(',', ";")
                    )
                } else {
                    "ok".to_string()
                };
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    key,
                    cell(row.value),
                    cell(n.r),
                    cell(n.g_d),
                    cell(n.g),
                    n.holds,
                    n.borderline,
                    label,
                    relevance,
                    status,
                ));
            }
            Err(err) => {
                csv.push_str(&format!(
                    "{},{},,,,,,,,failed: {}\n",
                    key,
                    cell(row.value),
                    format!("{err:#}").replace(',', ";").replace('\n', " "),
                ));
            }
        }
    }
    csv
}
