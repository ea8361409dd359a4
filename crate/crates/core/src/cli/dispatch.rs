use std::fmt::Write as _;
use std::fs;

use serde_json::json;

use super::config::{Command, RunConfig};
use super::output::{cell, write_atomic};
use crate::chain::{expected_revenue, ChainModel};
use crate::error::Result;
use crate::hjb::{max_interior_residual, solve_second_price_curve};
use crate::sim::{payment_variance, run_scenario1, run_scenario2, run_scenario3, run_scenario4};

/// Files written (names relative to the output directory, manifest last) and
/// the text printed on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<String>,
    pub stdout: String,
}

/// Runs `run` and writes its result files plus `manifest.cfg`. Nothing is
/// written unless the computation succeeds.
pub fn dispatch(run: &RunConfig) -> Result<Outcome> {
    let (files, stdout) = compute(run)?;
    fs::create_dir_all(&run.out)?;
    let mut names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    for (name, body) in &files {
        write_atomic(&run.out.join(name), body.as_bytes())?;
    }
    write_atomic(&run.out.join("manifest.cfg"), run.manifest(&names).as_bytes())?;
    names.push("manifest.cfg".into());
    Ok(Outcome { files: names, stdout })
}

type Files = Vec<(String, String)>;

fn compute(run: &RunConfig) -> Result<(Files, String)> {
    let s = &run.settings;
    let mut files: Files = Vec::new();
    let mut stdout = String::new();
    let mirror = |files: &mut Files, name: &str, value: serde_json::Value| {
        if run.json {
            files.push((format!("{name}.json"), format!("{value:#}\n")));
        }
    };
    match run.command {
        Command::Scenario1 => {
            let cfg = s.scenario1(run.seed)?;
            for mech in s.mechanisms() {
                let rows = run_scenario1(&cfg, mech)?;
                let name = format!("scenario1_{}", mech.label());
                let mut csv = String::from("N,Delta,analytic_income,simulated_income,stderr\n");
                let mut var = String::from("N,Delta,obsa_variance,baseline_variance\n");
                for r in &rows {
                    writeln!(csv, "{},{},{},{},{}", r.lambda, r.delta, r.analytic, r.simulated, r.stderr).unwrap();
                    writeln!(var, "{},{},{},{}", r.lambda, r.delta, cell(r.obsa_variance), cell(r.baseline_variance)).unwrap();
                    if r.dropped > 0 {
                        log::warn!("{name}: {} replications at N={} Delta={} saw no winner", r.dropped, r.lambda, r.delta);
                    }
                }
                let value = json!(rows
                    .iter()
                    .map(|r| json!({
                        "N": r.lambda, "Delta": r.delta, "analytic_income": r.analytic,
                        "simulated_income": r.simulated, "stderr": r.stderr,
                        "obsa_variance": r.obsa_variance, "baseline_variance": r.baseline_variance,
                        "dropped": r.dropped,
                    }))
                    .collect::<Vec<_>>());
                files.push((format!("{name}.csv"), csv));
                files.push((format!("{name}_variance.csv"), var));
                mirror(&mut files, &name, value);
            }
        }
        Command::Scenario2 => {
            let p = s.stage_two()?;
            let gammas = s.gammas();
            let rep = run_scenario2(&p, &gammas, p.tp / s.steps() as f64)?;
            let mut csv = String::from("r");
            for g in &gammas {
                write!(csv, ",gamma_{g}").unwrap();
            }
            csv.push('\n');
            for i in 0..rep.curves[0].len() {
                write!(csv, "{}", rep.curves[0].r(i)).unwrap();
                for c in &rep.curves {
                    write!(csv, ",{}", c.values[i]).unwrap();
                }
                csv.push('\n');
            }
            writeln!(stdout, "decreasing={} ordered={}", rep.decreasing, rep.ordered).unwrap();
            files.push(("scenario2_curves.csv".into(), csv));
            mirror(&mut files, "scenario2", json!({"gammas": gammas, "decreasing": rep.decreasing, "ordered": rep.ordered,
                "curves": rep.curves.iter().map(|c| &c.values).collect::<Vec<_>>()}));
        }
        Command::Scenario3 => {
            let rep = run_scenario3(&s.scenario3(run.seed)?)?;
            let mut csv = String::from("mechanism,total_winners,total_sold,income,payment_variance\n");
            for (name, m) in [("obsa", &rep.obsa), ("baseline", &rep.baseline)] {
                writeln!(csv, "{name},{},{},{},{}", m.total_winners, m.total_sold, m.mean_income, cell(payment_variance(m))).unwrap();
            }
            let mut series = String::from("minute,obsa_waiting,baseline_waiting\n");
            for (t, (a, b)) in rep.obsa.participants.iter().zip(&rep.baseline.participants).enumerate() {
                writeln!(series, "{t},{a},{b}").unwrap();
            }
            files.push(("scenario3.csv".into(), csv));
            files.push(("scenario3_participants.csv".into(), series));
            mirror(&mut files, "scenario3", serde_json::to_value(&rep)?);
        }
        Command::Scenario4 => {
            let rep = run_scenario4(&s.scenario4(run.seed)?)?;
            let mut csv = String::from("t,baseline_participants,obsa_participants,baseline_price,obsa_price\n");
            for t in 0..rep.obsa.participants.len() {
                writeln!(
                    csv,
                    "{t},{},{},{},{}",
                    rep.baseline.participants[t],
                    rep.obsa.participants[t],
                    cell(rep.baseline_prices[t]),
                    cell(rep.obsa_prices[t])
                )
                .unwrap();
            }
            files.push(("scenario4.csv".into(), csv));
            mirror(&mut files, "scenario4", serde_json::to_value(&rep)?);
        }
        Command::Chain => {
            let model = ChainModel::build(&s.bids()?, s.lambda(), s.p_b())?;
            let mut csv = String::from("mechanism,N,Delta,revenue\n");
            let mut values = Vec::new();
            for mech in s.mechanisms() {
                let v = expected_revenue(&model, mech, s.patience());
                writeln!(csv, "{},{},{},{v}", mech.label(), s.lambda(), s.patience()).unwrap();
                values.push(v.to_string());
            }
            writeln!(stdout, "{}", values.join(" ")).unwrap();
            files.push(("chain.csv".into(), csv));
        }
        Command::Curve => {
            let p = s.stage_two()?;
            let curve = solve_second_price_curve(&p, p.tp / s.steps() as f64)?;
            let mut csv = Vec::new();
            curve.write_columns(&mut csv)?;
            writeln!(stdout, "max_interior_residual={}", max_interior_residual(&curve)).unwrap();
            if let Some(r) = curve.clamped_at {
                writeln!(stdout, "clamped_at={r}").unwrap();
            }
            files.push(("curve.csv".into(), String::from_utf8(csv).expect("ascii")));
        }
    }
    Ok((files, stdout))
}
