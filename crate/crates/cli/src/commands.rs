use std::path::{Path, PathBuf};

use vaxstock_core::contour::{epsilon_of_p, p_of_epsilon};
use vaxstock_core::demand::{fit_sigmoid, normalize, repair_monotonicity, DemandProfile};
use vaxstock_core::ingest::{load_csv, regularize, CsvColumns};
use vaxstock_core::policy::{plan, purchase_schedule, Policy, PolicySpec};
use vaxstock_core::simulate::{estimate_probability, sweep, LotRange, SimulationConfig};

use crate::args::{
    Command, EpsilonArgs, FitArgs, OutputArgs, PlanArgs, SimArgs, SimulateArgs, SweepArgs,
};
use crate::error::CliError;
use crate::report::{
    read_json, sweep_csv, write_json, write_text, EpsilonOutput, FitOutput, PlanOutput,
    RunManifest, ScheduleEntry, SimulationOutput, SweepOutput, SCHEMA_VERSION,
};

/// Runs `command` and records a manifest next to its first output file.
pub fn run(command: Command) -> Result<(), CliError> {
    let command = resolve_paths(command)?;
    let outputs = execute(&command)?;
    if let Some(first) = outputs.first() {
        let manifest = RunManifest::new(command, outputs.clone());
        write_json(&RunManifest::path_for(first), &manifest)?;
    }
    Ok(())
}

/// Runs `command` without writing a manifest; returns the files written.
pub fn execute(command: &Command) -> Result<Vec<PathBuf>, CliError> {
    match command {
        Command::Epsilon(args) => epsilon(args),
        Command::Fit(args) => fit(args),
        Command::Plan(args) => plan_cmd(args),
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep_cmd(args),
        Command::Replay(_) => Err(CliError::usage("a manifest cannot record a replay")),
    }
}

pub fn output_args(command: &Command) -> Option<&OutputArgs> {
    match command {
        Command::Epsilon(a) => Some(&a.output),
        Command::Fit(a) => Some(&a.output),
        Command::Plan(a) => Some(&a.output),
        Command::Simulate(a) => Some(&a.output),
        Command::Sweep(a) => Some(&a.output),
        Command::Replay(_) => None,
    }
}

fn absolute(path: &Path) -> Result<PathBuf, CliError> {
    std::path::absolute(path)
        .map_err(|e| CliError::data(format!("cannot resolve {}: {e}", path.display())))
}

fn absolute_opt(path: &Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
    path.as_deref().map(absolute).transpose()
}

fn resolve_output(out: &OutputArgs) -> Result<OutputArgs, CliError> {
    Ok(OutputArgs {
        json_out: absolute_opt(&out.json_out)?,
        csv_out: absolute_opt(&out.csv_out)?,
    })
}

/// Makes every file path absolute so a manifest can be replayed from anywhere.
fn resolve_paths(command: Command) -> Result<Command, CliError> {
    Ok(match command {
        Command::Epsilon(mut a) => {
            a.output = resolve_output(&a.output)?;
            Command::Epsilon(a)
        }
        Command::Fit(mut a) => {
            a.csv = absolute(&a.csv)?;
            a.emit_curve = absolute_opt(&a.emit_curve)?;
            a.output = resolve_output(&a.output)?;
            Command::Fit(a)
        }
        Command::Plan(mut a) => {
            a.fit = absolute_opt(&a.fit)?;
            a.output = resolve_output(&a.output)?;
            Command::Plan(a)
        }
        Command::Simulate(mut a) => {
            a.plan = absolute(&a.plan)?;
            a.fit = absolute(&a.fit)?;
            a.output = resolve_output(&a.output)?;
            Command::Simulate(a)
        }
        Command::Sweep(mut a) => {
            a.plan = absolute(&a.plan)?;
            a.fit = absolute(&a.fit)?;
            a.output = resolve_output(&a.output)?;
            Command::Sweep(a)
        }
        other => other,
    })
}

fn count(n: u64) -> Result<usize, CliError> {
    usize::try_from(n).map_err(|_| CliError::usage(format!("n = {n} is too large")))
}

fn epsilon(args: &EpsilonArgs) -> Result<Vec<PathBuf>, CliError> {
    let n = count(args.n)?;
    let eps = epsilon_of_p(n, args.p)?;
    let probability = p_of_epsilon(n, eps)?;
    println!(
        "n = {n}, p = {}: epsilon = {eps:.6} (P(n, epsilon) = {probability:.10})",
        args.p
    );

    let mut written = Vec::new();
    if let Some(path) = &args.output.json_out {
        let out = EpsilonOutput {
            schema_version: SCHEMA_VERSION,
            kind: "epsilon".into(),
            n,
            p: args.p,
            epsilon: eps,
            probability,
        };
        write_json(path, &out)?;
        written.push(path.clone());
    }
    if let Some(path) = &args.output.csv_out {
        write_text(
            path,
            &format!(
                "n,p,epsilon,probability\n{n},{},{eps},{probability}\n",
                args.p
            ),
        )?;
        written.push(path.clone());
    }
    Ok(written)
}

fn fit(args: &FitArgs) -> Result<Vec<PathBuf>, CliError> {
    let columns = CsvColumns {
        location: args.location_column.clone(),
        date: args.date_column.clone(),
        value: args.value_column.clone(),
    };
    let raw = load_csv(&args.csv, &args.country, &columns)?;
    let daily = regularize(&raw)?;
    let (repaired, corrected) = repair_monotonicity(&daily);
    let series = normalize(&repaired)?;
    let report = fit_sigmoid(&series)?;
    let p = report.params;

    println!(
        "{}: {} days, {corrected} corrected point(s)",
        args.country,
        series.len()
    );
    println!(
        "  a = {:.6}  b = {:.6}  c = {:.3}  d = {:.6}",
        p.a, p.b, p.c, p.d
    );
    println!(
        "  sse = {:.3e}  rmse = {:.3e}  iterations = {}",
        report.sse, report.rmse, report.iterations
    );

    let mut written = Vec::new();
    if let Some(path) = &args.output.json_out {
        let out = FitOutput {
            schema_version: SCHEMA_VERSION,
            kind: "fit".into(),
            location: args.country.clone(),
            value_column: args.value_column.clone(),
            first_date: raw
                .first_reported()
                .map(|d| d.to_string())
                .unwrap_or_default(),
            last_date: raw.last_date().map(|d| d.to_string()).unwrap_or_default(),
            horizon: series.horizon(),
            points: series.len(),
            corrected_points: corrected,
            params: p,
            sse: report.sse,
            rmse: report.rmse,
            iterations: report.iterations,
        };
        write_json(path, &out)?;
        written.push(path.clone());
    }
    let curve_paths = [&args.emit_curve, &args.output.csv_out];
    for path in curve_paths.into_iter().flatten() {
        let mut text = String::from("day,observed,fitted\n");
        for (day, observed) in series.points() {
            text.push_str(&format!("{day},{observed},{}\n", p.eval(day as f64)));
        }
        write_text(path, &text)?;
        written.push(path.clone());
    }
    Ok(written)
}

fn plan_cmd(args: &PlanArgs) -> Result<Vec<PathBuf>, CliError> {
    let n = count(args.n)?;
    if let Some(pop) = args.population {
        if !(pop > 0.0 && pop.is_finite()) {
            return Err(CliError::usage("population must be positive"));
        }
    }
    let total = args.demand * args.population.unwrap_or(1.0);
    let fitted = args
        .fit
        .as_deref()
        .map(|path| read_json::<FitOutput>(path, "fit"))
        .transpose()?;
    let horizon = fitted.as_ref().map(|f| f64::from(f.horizon));
    let profile = fitted
        .as_ref()
        .map(|f| DemandProfile::new(f.params, f64::from(f.horizon)))
        .transpose()?;

    let spec = PolicySpec::new(n, args.p, total, horizon.unwrap_or(1.0))?;
    let policy = plan(&spec)?;
    let probability = p_of_epsilon(n, policy.epsilon)?;
    let schedule = purchase_schedule(n, policy.initial_stock, total)
        .into_iter()
        .enumerate()
        .map(|(i, quantity)| -> Result<ScheduleEntry, CliError> {
            let nominal_day = profile
                .as_ref()
                .map(|prof| prof.quantile((i + 1) as f64 / (n + 1) as f64))
                .transpose()?;
            Ok(ScheduleEntry {
                delivery: i + 1,
                quantity,
                nominal_day,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    println!(
        "n = {n}, p = {}: epsilon = {:.6}, initial stock = {}, lot = {}",
        args.p, policy.epsilon, policy.initial_stock, policy.lot
    );
    for entry in &schedule {
        match entry.nominal_day {
            Some(day) => println!(
                "  delivery {:>3}: {:>14}  (nominal day {day:.1})",
                entry.delivery, entry.quantity
            ),
            None => println!("  delivery {:>3}: {:>14}", entry.delivery, entry.quantity),
        }
    }

    let mut written = Vec::new();
    if let Some(path) = &args.output.json_out {
        let out = PlanOutput {
            schema_version: SCHEMA_VERSION,
            kind: "plan".into(),
            n,
            p: args.p,
            total_demand: total,
            population: args.population,
            epsilon: policy.epsilon,
            initial_stock: policy.initial_stock,
            lot: policy.lot,
            probability,
            horizon,
            schedule: schedule.clone(),
        };
        write_json(path, &out)?;
        written.push(path.clone());
    }
    if let Some(path) = &args.output.csv_out {
        let mut text = String::from("delivery,quantity,nominal_day\n");
        for e in &schedule {
            let day = e.nominal_day.map(|d| d.to_string()).unwrap_or_default();
            text.push_str(&format!("{},{},{day}\n", e.delivery, e.quantity));
        }
        write_text(path, &text)?;
        written.push(path.clone());
    }
    Ok(written)
}

fn load_inputs(plan_path: &Path, fit_path: &Path) -> Result<(PlanOutput, FitOutput), CliError> {
    Ok((read_json(plan_path, "plan")?, read_json(fit_path, "fit")?))
}

fn config(sim: &SimArgs) -> SimulationConfig {
    SimulationConfig {
        trials: sim.trials,
        seed: sim.seed,
        day_rounding: sim.day_rounding,
    }
}

fn policy_from(plan: &PlanOutput) -> Policy {
    Policy {
        n: plan.n,
        epsilon: plan.epsilon,
        initial_stock: plan.initial_stock,
        lot: plan.lot,
        total_demand: plan.total_demand,
    }
}

/// Distribution-free guarantee for initial stock `initial` out of `total`.
fn model_probability(n: usize, initial: f64, total: f64) -> Result<f64, CliError> {
    let relative = initial / total;
    Ok(if relative <= 0.0 {
        0.0
    } else {
        p_of_epsilon(n, relative.min(1.0))?
    })
}

fn simulate(args: &SimulateArgs) -> Result<Vec<PathBuf>, CliError> {
    let (plan, fit) = load_inputs(&args.plan, &args.fit)?;
    let mut policy = policy_from(&plan);
    if let Some(lot) = args.lot {
        policy = policy.with_lot(lot);
    }
    let horizon = f64::from(fit.horizon);
    let cfg = config(&args.sim);
    let report = estimate_probability(&policy, &fit.params, horizon, &cfg)?;
    let model = model_probability(policy.n, policy.initial_stock, policy.total_demand)?;

    println!(
        "{} trials: non-shortage probability {:.4} ± {:.4} (model guarantee {:.4})",
        report.trials, report.probability, report.std_error, model
    );

    let mut written = Vec::new();
    if let Some(path) = &args.output.json_out {
        let out = SimulationOutput {
            schema_version: SCHEMA_VERSION,
            kind: "simulation".into(),
            n: policy.n,
            epsilon: policy.epsilon,
            initial_stock: policy.initial_stock,
            lot: policy.lot,
            total_demand: policy.total_demand,
            horizon,
            trials: report.trials,
            seed: cfg.seed,
            day_rounding: cfg.day_rounding,
            non_shortage_count: report.non_shortage_count,
            probability: report.probability,
            std_error: report.std_error,
            model_probability: model,
        };
        write_json(path, &out)?;
        written.push(path.clone());
    }
    if let Some(path) = &args.output.csv_out {
        write_text(
            path,
            &format!(
                "lot,initial_stock,trials,non_shortage_count,probability,std_error\n{},{},{},{},{},{}\n",
                policy.lot,
                policy.initial_stock,
                report.trials,
                report.non_shortage_count,
                report.probability,
                report.std_error
            ),
        )?;
        written.push(path.clone());
    }
    Ok(written)
}

fn sweep_cmd(args: &SweepArgs) -> Result<Vec<PathBuf>, CliError> {
    let (plan, fit) = load_inputs(&args.plan, &args.fit)?;
    let policy = policy_from(&plan);
    let horizon = f64::from(fit.horizon);
    let cfg = config(&args.sim);
    let lots = LotRange::new(args.lot_low, args.lot_high, args.lot_step)?;
    let rows = sweep(&policy, &fit.params, horizon, &cfg, &lots)?;

    println!(
        "n = {}, initial stock = {}, {} trials",
        policy.n, policy.initial_stock, cfg.trials
    );
    println!("{:>10}  {:>11}  {:>9}", "lot", "probability", "std error");
    for r in &rows {
        println!(
            "{:>10}  {:>11.4}  {:>9.4}",
            r.lot, r.probability, r.std_error
        );
    }

    let mut written = Vec::new();
    if let Some(path) = &args.output.json_out {
        let out = SweepOutput {
            schema_version: SCHEMA_VERSION,
            kind: "sweep".into(),
            n: policy.n,
            initial_stock: policy.initial_stock,
            total_demand: policy.total_demand,
            horizon,
            trials: cfg.trials,
            seed: cfg.seed,
            day_rounding: cfg.day_rounding,
            rows: rows.clone(),
        };
        write_json(path, &out)?;
        written.push(path.clone());
    }
    if let Some(path) = &args.output.csv_out {
        write_text(path, &sweep_csv(&rows))?;
        written.push(path.clone());
    }
    Ok(written)
}
