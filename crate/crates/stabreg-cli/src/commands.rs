//! Command implementations: region construction, exact-vs-approximated
//! comparison, and simulation with verdict assertions.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use stabreg::polytope::contains_set;
use stabreg::region::mu as region_mu;
use stabreg::region::ss as region_ss;
use stabreg::region::{builder_for, BuildOpts, Scenario};
use stabreg::sim::{run, stability_probe, SimConfig, SimOutcome, Verdict};
use stabreg::ss::{blend, relay_chain, service_pieces, SsAlpha};

use crate::config::ScenarioDoc;
use crate::output;

#[derive(Debug, Serialize)]
struct RegionSummary {
    mode: String,
    vertex_count: usize,
    policies_evaluated: u128,
    points_evaluated: u128,
    points_skipped_unstable: u128,
    alpha_combinations: u128,
    prefix_depth: Option<usize>,
    wall_seconds: f64,
}

pub fn cmd_region(doc: &ScenarioDoc, mode: &str, out_dir: &Path) -> anyhow::Result<()> {
    let scenario = doc.scenario_instance()?;
    let opts = BuildOpts {
        grid: doc.sweep.grid,
        epsilon: doc.sweep.epsilon,
        eval_budget: doc.sweep.eval_budget as u128,
    };
    let builder = builder_for(mode, &scenario)?;
    let started = Instant::now();
    // Guard vertex materialization for the epsilon construction on large
    // cells: report the complexity summary without building the region.
    if mode == "epsilon" {
        if let Scenario::Mu(sc) = &scenario {
            let stats = region_mu::epsilon_stats(sc, opts.epsilon)?;
            if stats.points_evaluated > 250_000 {
                let summary = RegionSummary {
                    mode: mode.to_string(),
                    vertex_count: 0,
                    policies_evaluated: stats.policies_evaluated,
                    points_evaluated: stats.points_evaluated,
                    points_skipped_unstable: 0,
                    alpha_combinations: stats.alpha_combinations,
                    prefix_depth: stats.prefix_depth,
                    wall_seconds: started.elapsed().as_secs_f64(),
                };
                output::write_json(
                    &out_dir.join(format!("region_{mode}_summary.json")),
                    &summary,
                )?;
                println!(
                    "region mode=epsilon: {} prefix policies x up to {} fraction combinations \
                     = {} evaluations (prefix depth K0={}); vertex file skipped above the \
                     250000-point materialization cap",
                    summary.policies_evaluated,
                    summary.alpha_combinations,
                    summary.points_evaluated,
                    summary.prefix_depth.unwrap_or(0),
                );
                return Ok(());
            }
        }
    }
    let (region, stats) = builder.build(&scenario, &opts)?;
    // Multi-user sweeps return every evaluated point; keep only the
    // dominance frontier in the emitted file (facet enumeration stays
    // out of scope). Planar regions are already exact hulls.
    let region = match &scenario {
        Scenario::Mu(_) if region.len() > 1 && region.len() <= 200_000 => {
            let front = stabreg::polytope::pareto_front(
                &region
                    .vertices
                    .iter()
                    .map(|(p, _)| p.clone())
                    .collect::<Vec<_>>(),
            );
            let keep: std::collections::HashSet<Vec<u64>> = front
                .iter()
                .map(|p| p.iter().map(|v| v.to_bits()).collect())
                .collect();
            let mut reduced = stabreg::region::RegionVertexSet::new(region.dim);
            let mut seen = std::collections::HashSet::new();
            for (p, l) in &region.vertices {
                let key: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
                if keep.contains(&key) && seen.insert(key) {
                    reduced.push(p.clone(), l.clone());
                }
            }
            reduced
        }
        _ => region,
    };
    let wall = started.elapsed().as_secs_f64();
    let summary = RegionSummary {
        mode: mode.to_string(),
        vertex_count: region.len(),
        policies_evaluated: stats.policies_evaluated,
        points_evaluated: stats.points_evaluated,
        points_skipped_unstable: stats.points_skipped_unstable,
        alpha_combinations: stats.alpha_combinations,
        prefix_depth: stats.prefix_depth,
        wall_seconds: wall,
    };
    output::write(
        &out_dir.join(format!("region_{mode}.csv")),
        &output::region_to_csv(&region),
    )?;
    output::write_json(
        &out_dir.join(format!("region_{mode}_summary.json")),
        &summary,
    )?;
    println!(
        "region mode={mode}: {} vertices, {} policies, {} points ({} unstable skipped), \
         alpha combinations {}{}; {:.2}s",
        summary.vertex_count,
        summary.policies_evaluated,
        summary.points_evaluated,
        summary.points_skipped_unstable,
        summary.alpha_combinations,
        summary
            .prefix_depth
            .map(|d| format!(", prefix depth K0={d}"))
            .unwrap_or_default(),
        wall,
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct SsCompareSummary {
    epsilon_star: f64,
    measured_max_relative_gap: f64,
    exact_in_approx_violation: f64,
    shrunk_approx_in_exact_violation: f64,
    exact_vertices: usize,
    approx_vertices: usize,
}

#[derive(Debug, Serialize)]
struct MuCompareSummary {
    prefix_depth: usize,
    exact_avg_rate_per_user: f64,
    approx_avg_rate_per_user: f64,
    approx_in_exact_violation: f64,
    exact_in_inflated_approx_violation: f64,
}

pub fn cmd_compare(doc: &ScenarioDoc, out_dir: &Path) -> anyhow::Result<()> {
    match doc.scenario_instance()? {
        Scenario::Ss(sc) => {
            let grid = doc.sweep.grid;
            let (exact, _) = region_ss::exact_region(&sc, grid)?;
            let (approx, _) = region_ss::approx_region(&sc);
            let report = region_ss::sandwich_check_on(&exact, &approx, region_ss::error_bound(&sc));
            let gap = region_ss::measured_relative_gap(&sc, grid);
            let summary = SsCompareSummary {
                epsilon_star: report.epsilon_star,
                measured_max_relative_gap: gap,
                exact_in_approx_violation: report.exact_in_approx_violation,
                shrunk_approx_in_exact_violation: report.shrunk_approx_in_exact_violation,
                exact_vertices: report.exact_vertices,
                approx_vertices: report.approx_vertices,
            };
            let mut overlay = String::from("construction,mu_s,mu_u,policy,alpha\n");
            for (kind, region) in [("exact", &exact), ("approx", &approx)] {
                for (p, l) in &region.vertices {
                    overlay.push_str(&format!(
                        "{kind},{},{},{},{}\n",
                        p[0],
                        p[1],
                        l.policy,
                        l.alpha
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(";")
                    ));
                }
            }
            output::write(&out_dir.join("compare_overlay.csv"), &overlay)?;
            output::write_json(&out_dir.join("compare_summary.json"), &summary)?;
            println!(
                "compare: eps* = {:.6}, measured max relative gap = {:.6}",
                summary.epsilon_star, summary.measured_max_relative_gap
            );
            println!(
                "  exact in approx: violation {:.3e} -> {}",
                summary.exact_in_approx_violation,
                verdict(summary.exact_in_approx_violation)
            );
            println!(
                "  (1 - eps*) approx in exact: violation {:.3e} -> {}",
                summary.shrunk_approx_in_exact_violation,
                verdict(summary.shrunk_approx_in_exact_violation)
            );
        }
        Scenario::Mu(sc) => {
            let (exact, _) = region_mu::reduced_region(&sc, doc.sweep.eval_budget as u128)?;
            let (approx, stats) = region_mu::epsilon_region(&sc, doc.sweep.epsilon)?;
            let avg = |r: &stabreg::region::RegionVertexSet| {
                let users = sc.total() as f64;
                r.vertices
                    .iter()
                    .map(|(p, _)| p.iter().sum::<f64>() / users)
                    .fold(0.0f64, f64::max)
            };
            let exact_set = exact.co_set().reduce();
            let approx_set = approx.co_set().reduce();
            let summary = MuCompareSummary {
                prefix_depth: stats.prefix_depth.unwrap_or(sc.total()),
                exact_avg_rate_per_user: avg(&exact),
                approx_avg_rate_per_user: avg(&approx),
                approx_in_exact_violation: contains_set(&approx_set, &exact_set, 0.0)?,
                exact_in_inflated_approx_violation: contains_set(
                    &exact_set,
                    &approx_set,
                    doc.sweep.epsilon,
                )?,
            };
            output::write_json(&out_dir.join("compare_summary.json"), &summary)?;
            println!(
                "compare: K0 = {}, best avg rate/user exact = {:.6}, approx = {:.6}",
                summary.prefix_depth,
                summary.exact_avg_rate_per_user,
                summary.approx_avg_rate_per_user
            );
            println!(
                "  approx in exact: violation {:.3e} -> {}; exact in approx + eps: {:.3e} -> {}",
                summary.approx_in_exact_violation,
                verdict(summary.approx_in_exact_violation),
                summary.exact_in_inflated_approx_violation,
                verdict(summary.exact_in_inflated_approx_violation)
            );
        }
    }
    Ok(())
}

fn verdict(violation: f64) -> &'static str {
    if violation <= 1e-9 {
        "contained"
    } else {
        "VIOLATED"
    }
}

#[derive(Debug, Serialize)]
struct SimRow {
    coupling: String,
    seed: u64,
    empirical_mu: Vec<f64>,
    mu_std_err: Vec<f64>,
    pi0_empirical: Vec<f64>,
    verdicts: Vec<Verdict>,
}

#[derive(Debug, Serialize)]
struct ProbeRow {
    scale: f64,
    rates: Vec<f64>,
    verdicts: Vec<Verdict>,
    expected_stable: bool,
    pass: bool,
}

pub fn cmd_simulate(doc: &ScenarioDoc, out_dir: &Path) -> anyhow::Result<()> {
    let scenario = doc.scenario_instance()?;
    let section = doc
        .simulate
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("[simulate] section missing from the config"))?;
    let policy = doc.sim_policy(&scenario)?;
    let mut cfg = SimConfig::new(scenario.clone(), policy, section.alpha.clone())?;
    cfg.horizon = doc.sweep.horizon;
    if doc.outputs.emit_trace {
        cfg.trace_stride = Some(doc.outputs.trace_stride);
    }

    let mut rows: Vec<SimRow> = Vec::new();
    let mut csv = String::from("coupling,seed,queue,mu,mu_se,pi0\n");
    for &coupling in &section.coupling {
        for &seed in &doc.sweep.seeds {
            cfg.coupling = coupling;
            cfg.seed = seed;
            let out = run(&cfg)?;
            emit_sim_csv(&mut csv, coupling, seed, &out);
            if doc.outputs.emit_trace {
                let mut trace = String::from("slot,backlogs\n");
                for (slot, q) in &out.trace {
                    trace.push_str(&format!(
                        "{slot},{}\n",
                        q.iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(";")
                    ));
                }
                output::write(
                    &out_dir.join(format!("trace_{}_{seed}.csv", coupling_name(coupling))),
                    &trace,
                )?;
            }
            rows.push(SimRow {
                coupling: coupling_name(coupling).into(),
                seed,
                empirical_mu: out.empirical_mu.clone(),
                mu_std_err: out.mu_std_err.clone(),
                pi0_empirical: out.pi0_empirical.clone(),
                verdicts: out.stability_verdicts.clone(),
            });
            println!(
                "simulate {} seed {seed}: mu = {:?}, pi0 = {:?}",
                coupling_name(coupling),
                out.empirical_mu,
                out.pi0_empirical
            );
        }
    }
    output::write(&out_dir.join("simulate.csv"), &csv)?;

    let mut all_pass = true;
    let mut probes: Vec<ProbeRow> = Vec::new();
    if !section.probe_scales.is_empty() {
        let analytic = analytic_rates(doc, &scenario, &section.alpha)?;
        for &scale in &section.probe_scales {
            let rates: Vec<f64> = analytic.iter().map(|r| r * scale).collect();
            cfg.coupling = stabreg::sim::Coupling::Relayed;
            cfg.seed = doc.sweep.seeds[0];
            let out = stability_probe(&cfg, &rates, doc.sweep.horizon)?;
            let expected_stable = scale < 1.0;
            let pass = if expected_stable {
                out.stability_verdicts.iter().all(|v| *v == Verdict::Stable)
            } else {
                out.stability_verdicts.contains(&Verdict::Unstable)
            };
            if out.stability_verdicts.contains(&Verdict::Inconclusive) {
                println!(
                    "probe at {scale}x: inconclusive backlog trend; consider a longer horizon \
                     (sweep.horizon = {})",
                    doc.sweep.horizon
                );
            }
            println!(
                "probe at {scale}x analytic rates: verdicts {:?} -> {}",
                out.stability_verdicts,
                if pass { "as expected" } else { "UNEXPECTED" }
            );
            all_pass &= pass;
            probes.push(ProbeRow {
                scale,
                rates,
                verdicts: out.stability_verdicts.clone(),
                expected_stable,
                pass,
            });
        }
    }
    #[derive(Serialize)]
    struct SimSummary {
        runs: Vec<SimRow>,
        probes: Vec<ProbeRow>,
    }
    output::write_json(
        &out_dir.join("simulate_summary.json"),
        &SimSummary { runs: rows, probes },
    )?;
    if section.assert_probe_verdicts && !all_pass {
        anyhow::bail!("probe verdict assertions failed");
    }
    Ok(())
}

fn coupling_name(c: stabreg::sim::Coupling) -> &'static str {
    match c {
        stabreg::sim::Coupling::Relayed => "relayed",
        stabreg::sim::Coupling::FullBuffer => "full_buffer",
    }
}

fn emit_sim_csv(csv: &mut String, coupling: stabreg::sim::Coupling, seed: u64, out: &SimOutcome) {
    for (q, mu) in out.empirical_mu.iter().enumerate() {
        csv.push_str(&format!(
            "{},{seed},{q},{mu},{},{}\n",
            coupling_name(coupling),
            out.mu_std_err[q],
            out.pi0_empirical.first().copied().unwrap_or(0.0),
        ));
    }
}

/// Analytic service rates at the configured `(policy, alpha)`.
fn analytic_rates(
    doc: &ScenarioDoc,
    scenario: &Scenario,
    alpha: &[f64],
) -> anyhow::Result<Vec<f64>> {
    match scenario {
        Scenario::Ss(sc) => {
            let stabreg::sim::SimPolicy::Ss(policy) = doc.sim_policy(scenario)? else {
                unreachable!()
            };
            let params = stabreg::policy::ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
            let alpha = SsAlpha([alpha[0], alpha[1], alpha[2], alpha[3]]);
            let dist = stabreg::qbd::solve_stationary(&relay_chain(sc, &params, &alpha))?;
            let (mu_s, mu_u) = blend(&service_pieces(sc, &params, &alpha), dist.pi0);
            Ok(vec![mu_s, mu_u])
        }
        Scenario::Mu(sc) => {
            let stabreg::sim::SimPolicy::Mu(policy) = doc.sim_policy(scenario)? else {
                unreachable!()
            };
            Ok(region_mu::service_rates(sc, &policy, alpha)?)
        }
    }
}

pub fn cmd_validate(doc_text: &str, path: &Path) -> anyhow::Result<()> {
    match ScenarioDoc::parse(doc_text) {
        Ok(_) => {
            println!("{}: OK", path.display());
            Ok(())
        }
        Err(err) => {
            println!("{}: INVALID\n{err:#}", path.display());
            anyhow::bail!("configuration invalid")
        }
    }
}

pub fn resolve_out_dir(doc: &ScenarioDoc, cli_dir: Option<&Path>) -> PathBuf {
    cli_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&doc.outputs.dir))
}
