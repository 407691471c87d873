use qthresh::atlas::{self, default_axis, SweepGrid};
use qthresh::bound::{error_curve, redundancy_lower_bound, AccuracySpec, RedundancyBound};
use qthresh::closedform::{erasure_threshold_linear, erasure_threshold_power};
use qthresh::optimize::{grid_oracle, threshold_bisection, OptimizerConfig};
use qthresh::simulator::{error_vs_runs, exact_error, required_runs, simulate, MeasureNoise, SimSpec};
use qthresh::{capacity_cost, holevo, k_max, ChannelKind, LawFamily, NoiseLevel, ScalingLaw};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{self, num, Format};
use crate::svg::{self, Series};
use crate::{
    config, AccuracyArgs, BoundArgs, CapacityArgs, Cli, CliError, ClosedFormArgs, ClosedLaw, Command, ErrorCurveArgs,
    LawArg, SelfcheckArgs, SimulateArgs, SolverArgs, SweepArgs, ThresholdArgs,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

struct Report {
    config: Value,
    result: Value,
    /// Replaces the JSON document on stdout.
    stdout: Option<String>,
    csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    /// `(file suffix, title, chart)`
    svgs: Vec<(Option<String>, Chart)>,
    flagged: bool,
}

enum Chart {
    Lines {
        series: Vec<Series>,
        title: String,
        x: &'static str,
        y: &'static str,
    },
    Heat {
        alphas: Vec<f64>,
        gammas: Vec<f64>,
        values: Vec<Option<f64>>,
        title: String,
    },
}

impl Report {
    fn new(config: &impl Serialize, result: Value) -> Result<Self, CliError> {
        Ok(Report {
            config: serde_json::to_value(config)?,
            result,
            stdout: None,
            csv: None,
            svgs: Vec::new(),
            flagged: false,
        })
    }
}

fn req<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::Usage(format!("missing required value --{flag}")))
}

fn fill_accuracy(a: &mut AccuracyArgs) -> Result<AccuracySpec, CliError> {
    let eps = *a.eps.get_or_insert(0.1);
    let log2rf = *a.log2rf.get_or_insert(128.0);
    let n = *a.n.get_or_insert(128);
    Ok(AccuracySpec::new(eps, log2rf, n)?)
}

fn fill_solver(s: &mut SolverArgs) -> OptimizerConfig {
    let d = OptimizerConfig::default();
    OptimizerConfig {
        delta_p0: *s.delta_p0.get_or_insert(d.delta_p0),
        delta: *s.delta.get_or_insert(d.delta),
        max_iters: *s.max_iters.get_or_insert(d.max_iters),
        max_inner_iters: *s.max_inner_iters.get_or_insert(d.max_inner_iters),
        grid_points: *s.grid_points.get_or_insert(d.grid_points),
    }
}

pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let file = cli.config.as_deref().map(config::load).transpose()?;
    let cfg = file.as_ref();
    let name = cli.command.name();
    let report = match &cli.command {
        Command::Capacity(a) => capacity(config::resolve(a, cfg, name)?)?,
        Command::Bound(a) => bound(config::resolve(a, cfg, name)?)?,
        Command::ErrorCurve(a) => curve(config::resolve(a, cfg, name)?)?,
        Command::Threshold(a) => threshold(config::resolve(a, cfg, name)?)?,
        Command::ClosedForm(a) => closed_form(config::resolve(a, cfg, name)?)?,
        Command::Sweep(a) => sweep(config::resolve(a, cfg, name)?)?,
        Command::Simulate(a) => simulation(config::resolve(a, cfg, name)?)?,
        Command::Selfcheck(a) => selfcheck(config::resolve(a, cfg, name)?)?,
    };
    emit(cli, name, report)
}

fn emit(cli: &Cli, command: &str, report: Report) -> Result<bool, CliError> {
    let config = output::rounded(report.config.clone());
    let provenance = json!({ "tool": "qthresh", "version": VERSION, "command": command, "config": config });
    let doc = json!({ "provenance": provenance, "result": report.result });
    let doc_text = output::to_json_string(&doc)?;
    let line = format!("qthresh {VERSION} {command} config={}", serde_json::to_string(&config)?);

    let csv = || -> Result<Vec<u8>, CliError> {
        let (header, rows) = report
            .csv
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("'{command}' has no CSV output")))?;
        Ok(output::csv_bytes(&line, header, rows)?)
    };

    let Some(out) = &cli.out else {
        match cli.format {
            Some(Format::Csv) => print!("{}", String::from_utf8_lossy(&csv()?)),
            Some(Format::Svg) => return Err(CliError::Usage("--format svg needs --out".into())),
            _ => print!("{}", report.stdout.clone().unwrap_or(doc_text)),
        }
        return Ok(report.flagged);
    };

    print!("{}", report.stdout.clone().unwrap_or_else(|| doc_text.clone()));
    let path = output::resolve_path(out);
    match cli.format.or_else(|| Format::from_path(&path)).unwrap_or(Format::Json) {
        Format::Json => output::write_atomic(&path, doc_text.as_bytes())?,
        Format::Csv => output::write_atomic(&path, &csv()?)?,
        Format::Svg => {
            if report.svgs.is_empty() {
                return Err(CliError::Usage(format!("'{command}' has no SVG output")));
            }
            for (suffix, chart) in &report.svgs {
                let text = match chart {
                    Chart::Lines { series, title, x, y } => svg::line_chart(series, title, x, y, &line),
                    Chart::Heat {
                        alphas,
                        gammas,
                        values,
                        title,
                    } => svg::heatmap(alphas, gammas, values, title, &line),
                };
                let target = match suffix {
                    Some(s) => output::sibling(&path, s),
                    None => path.clone(),
                };
                output::write_atomic(&target, text.as_bytes())?;
            }
        }
    }
    Ok(report.flagged)
}

fn capacity(a: CapacityArgs) -> Result<Report, CliError> {
    let channel = req(&a.channel, "channel")?;
    let p = NoiseLevel::new(req(&a.p, "p")?)?;
    let chi = holevo(channel, p);
    let mut r = Report::new(&a, json!({ "channel": channel, "p": p.value(), "holevo": chi }))?;
    r.stdout = Some(format!("{}\n", num(chi)));
    r.csv = Some((
        vec!["channel", "p", "holevo"],
        vec![vec![channel.name().into(), num(p.value()), num(chi)]],
    ));
    Ok(r)
}

fn bound(mut a: BoundArgs) -> Result<Report, CliError> {
    let channel = req(&a.channel, "channel")?;
    let p = NoiseLevel::new(req(&a.p, "p")?)?;
    let spec = fill_accuracy(&mut a.accuracy)?;
    let c = capacity_cost(&spec);
    let chi = holevo(channel, p);
    let b = redundancy_lower_bound(channel, p, &spec);
    let (status, n_min) = match b {
        RedundancyBound::Finite { n_min } => ("finite", Some(n_min)),
        RedundancyBound::Infeasible => ("infeasible", None),
        RedundancyBound::Vacuous => ("vacuous", None),
    };
    let k_min = n_min.map(|m| m / spec.n as f64);
    let mut r = Report::new(&a, json!({ "c": c, "holevo": chi, "bound": b, "k_min": k_min }))?;
    r.csv = Some((
        vec!["channel", "p", "c", "holevo", "status", "n_min", "k_min"],
        vec![vec![
            channel.name().into(),
            num(p.value()),
            num(c),
            num(chi),
            status.into(),
            n_min.map(num).unwrap_or_default(),
            k_min.map(num).unwrap_or_default(),
        ]],
    ));
    Ok(r)
}

fn curve(mut a: ErrorCurveArgs) -> Result<Report, CliError> {
    let channel = *a.channel.get_or_insert(ChannelKind::Erasure);
    let law = *a.law.get_or_insert(LawArg::Constant);
    let p0s = req(&a.p0, "p0")?;
    if p0s.is_empty() {
        return Err(CliError::Usage("--p0 needs at least one value".into()));
    }
    let alpha = *a.alpha.get_or_insert(0.0);
    let gamma = *a.gamma.get_or_insert(1.0);
    let k_lo = *a.k_min.get_or_insert(1.0);
    let points = *a.points.get_or_insert(200);
    let log2rf = *a.log2rf.get_or_insert(128.0);
    let n = *a.n.get_or_insert(128);

    let laws = p0s
        .iter()
        .map(|&p0| match law {
            LawArg::Constant => ScalingLaw::constant(p0),
            LawArg::Polynomial => ScalingLaw::polynomial(p0, alpha, gamma),
            LawArg::Exponential => ScalingLaw::exponential(p0, alpha, gamma),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let k_hi = *a.k_max.get_or_insert_with(|| {
        let top = laws
            .iter()
            .filter_map(|l| k_max(l).finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() && top > k_lo {
            1.2 * top
        } else {
            20.0_f64.max(k_lo + 1.0)
        }
    });
    if !(k_lo >= 1.0 && k_hi > k_lo) || points < 2 {
        return Err(CliError::Domain("need 1 <= k_min < k_max and at least 2 points".into()));
    }
    let ks: Vec<f64> = (0..points)
        .map(|i| k_lo + (k_hi - k_lo) * i as f64 / (points - 1) as f64)
        .collect();

    let mut curves = Vec::new();
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (&p0, l) in p0s.iter().zip(&laws) {
        let pts = error_curve(channel, l, &ks, log2rf, n)?;
        for p in &pts {
            rows.push((p.k, p0, p.p_of_k, p.chi, p.eps_lb, p.saturated));
        }
        series.push(Series {
            label: format!("p0={}", num(p0)),
            points: pts.iter().map(|p| (p.k, p.eps_lb)).collect(),
        });
        curves.push(json!({ "p0": p0, "law": l, "k_max": k_max(l).finite(), "points": pts }));
    }
    rows.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let mut r = Report::new(&a, json!({ "channel": channel, "curves": curves }))?;
    r.csv = Some((
        vec!["k", "p0", "p_of_k", "chi", "eps_lb", "saturated"],
        rows.into_iter()
            .map(|(k, p0, p, chi, e, s)| vec![num(k), num(p0), num(p), num(chi), num(e), s.to_string()])
            .collect(),
    ));
    let title = format!("error lower bound, {channel}");
    r.svgs.push((
        None,
        Chart::Lines {
            series,
            title,
            x: "redundancy k",
            y: "epsilon lower bound",
        },
    ));
    Ok(r)
}

fn threshold(mut a: ThresholdArgs) -> Result<Report, CliError> {
    let channel = req(&a.channel, "channel")?;
    let family = *a.family.get_or_insert(LawFamily::Polynomial);
    let alpha = req(&a.alpha, "alpha")?;
    let gamma = req(&a.gamma, "gamma")?;
    let trace = *a.trace.get_or_insert(false);
    let spec = fill_accuracy(&mut a.accuracy)?;
    let cfg = fill_solver(&mut a.solver);
    let res = threshold_bisection(channel, family, alpha, gamma, &spec, &cfg, trace)?;
    let flags: Vec<&str> = res.flags.iter().map(|f| f.name()).collect();
    let mut r = Report::new(&a, json!({ "c": capacity_cost(&spec), "threshold": res }))?;
    r.flagged = !res.flags.is_empty();
    r.csv = Some((
        vec![
            "channel",
            "family",
            "alpha",
            "gamma",
            "p_th",
            "k_star",
            "g_star",
            "iterations",
            "flags",
        ],
        vec![vec![
            channel.name().into(),
            family.name().into(),
            num(alpha),
            num(gamma),
            num(res.p_th),
            num(res.k_star),
            num(res.g_star),
            res.iterations.to_string(),
            flags.join("|"),
        ]],
    ));
    Ok(r)
}

fn closed_form(mut a: ClosedFormArgs) -> Result<Report, CliError> {
    let law = req(&a.law, "law")?;
    let c = match a.c {
        Some(c) => c,
        None => capacity_cost(&fill_accuracy(&mut a.accuracy)?),
    };
    let (param, cf) = match law {
        ClosedLaw::Linear => {
            let alpha = req(&a.alpha, "alpha")?;
            (alpha, erasure_threshold_linear(alpha, c)?)
        }
        ClosedLaw::Power => {
            let gamma = req(&a.gamma, "gamma")?;
            (gamma, erasure_threshold_power(gamma, c)?)
        }
    };
    let mut r = Report::new(&a, json!({ "law": law, "c": c, "branch": cf.branch, "p_th": cf.p_th }))?;
    let branch = serde_json::to_value(cf.branch)?
        .as_str()
        .unwrap_or_default()
        .to_string();
    r.csv = Some((
        vec!["law", "parameter", "c", "branch", "p_th"],
        vec![vec![
            format!("{law:?}").to_lowercase(),
            num(param),
            num(c),
            branch,
            num(cf.p_th),
        ]],
    ));
    Ok(r)
}

fn sweep(mut a: SweepArgs) -> Result<Report, CliError> {
    let spec = fill_accuracy(&mut a.accuracy)?;
    let grid = SweepGrid {
        alphas: a.alphas.get_or_insert_with(default_axis).clone(),
        gammas: a.gammas.get_or_insert_with(default_axis).clone(),
        channels: a.channels.get_or_insert_with(|| ChannelKind::ALL.to_vec()).clone(),
        law_family: *a.family.get_or_insert(LawFamily::Polynomial),
        spec,
        cfg: fill_solver(&mut a.solver),
    };
    let surface = atlas::sweep(&grid)?;
    let violations = atlas::validate_surface(&surface);
    let flagged = surface.entries.iter().any(|e| !e.flags.is_empty() || e.error.is_some());

    let rows = surface
        .entries
        .iter()
        .map(|e| {
            let mut flags: Vec<&str> = e.flags.iter().map(|f| f.name()).collect();
            if e.error.is_some() {
                flags.push("error");
            }
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            vec![
                e.channel.name().into(),
                num(e.alpha),
                num(e.gamma),
                opt(e.p_th),
                opt(e.k_star),
                flags.join("|"),
            ]
        })
        .collect();

    let per = grid.alphas.len() * grid.gammas.len();
    let mut charts = Vec::new();
    for chunk in surface.entries.chunks(per) {
        let ch = chunk[0].channel;
        charts.push((
            Some(ch.name().to_string()),
            Chart::Heat {
                alphas: grid.alphas.clone(),
                gammas: grid.gammas.clone(),
                values: chunk.iter().map(|e| e.p_th).collect(),
                title: format!("p_th, {ch}, {} law", grid.law_family.name()),
            },
        ));
    }

    let mut r = Report::new(&a, json!({ "surface": surface, "violations": violations }))?;
    r.flagged = flagged;
    r.csv = Some((vec!["channel", "alpha", "gamma", "p_th", "k_star", "flags"], rows));
    r.svgs = charts;
    Ok(r)
}

fn simulation(mut a: SimulateArgs) -> Result<Report, CliError> {
    let noise = req(&a.noise, "noise")?;
    let p = req(&a.p, "p")?;
    let n = *a.n.get_or_insert(128);
    let target = *a.target_eps.get_or_insert(0.01);
    let runs = match a.t {
        Some(t) => t,
        None => *a.t.insert(required_runs(noise, p, n, target)?),
    };
    let trials = *a.trials.get_or_insert(100_000);
    let seed = *a.seed.get_or_insert(0);
    let spec = SimSpec {
        noise,
        p,
        n,
        runs,
        trials,
        seed,
    };
    let res = simulate(&spec)?;

    let t_max = (2 * runs).max(10);
    let rows = error_vs_runs(noise, p, n, t_max)?;
    let bound_name = match noise {
        MeasureNoise::Depolarizing => "hoeffding_bound",
        MeasureNoise::Erasure => "union_bound",
    };
    let mut r = Report::new(&a, json!({ "spec": spec, "sim": res }))?;
    r.csv = Some((
        vec!["T", "exact_pe", bound_name],
        rows.iter()
            .map(|(t, e, b)| vec![t.to_string(), num(*e), num(*b)])
            .collect(),
    ));
    let series = vec![
        Series {
            label: "exact".into(),
            points: rows.iter().map(|(t, e, _)| (*t as f64, *e)).collect(),
        },
        Series {
            label: bound_name.replace('_', " "),
            points: rows.iter().map(|(t, _, b)| (*t as f64, b.min(1.0))).collect(),
        },
    ];
    let title = format!("{} readout, p={}, n={n}", noise.name(), num(p));
    r.svgs.push((
        None,
        Chart::Lines {
            series,
            title,
            x: "repetitions T",
            y: "error probability",
        },
    ));
    Ok(r)
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

fn check(name: String, value: f64, expected: f64, tolerance: f64) -> Check {
    Check {
        name,
        value,
        expected,
        tolerance,
        pass: (value - expected).abs() <= tolerance,
    }
}

fn selfcheck(mut a: SelfcheckArgs) -> Result<Report, CliError> {
    let grid_points = *a.grid_points.get_or_insert(501);
    let spec = AccuracySpec::new(0.1, 128.0, 128)?;
    let c = capacity_cost(&spec);
    let cfg = OptimizerConfig::default();
    let tol = cfg.delta_p0.max(1e-4);
    let mut checks = Vec::new();

    for alpha in [0.05, 0.5, 2.0, 10.0] {
        let num_p = threshold_bisection(
            ChannelKind::Erasure,
            LawFamily::Polynomial,
            alpha,
            1.0,
            &spec,
            &cfg,
            false,
        )?
        .p_th;
        checks.push(check(
            format!("erasure linear alpha={alpha}"),
            num_p,
            erasure_threshold_linear(alpha, c)?.p_th,
            tol,
        ));
    }
    for gamma in [0.1, 0.5, 2.0, 10.0] {
        let num_p = threshold_bisection(
            ChannelKind::Erasure,
            LawFamily::Polynomial,
            1.0,
            gamma,
            &spec,
            &cfg,
            false,
        )?
        .p_th;
        checks.push(check(
            format!("erasure power gamma={gamma}"),
            num_p,
            erasure_threshold_power(gamma, c)?.p_th,
            tol,
        ));
    }
    let step = 1.0 / (grid_points.max(2) - 1) as f64;
    for kind in [ChannelKind::Depolarizing, ChannelKind::SymmetricGad] {
        for (alpha, gamma) in [(1.0, 1.0), (0.5, 2.0)] {
            let num_p = threshold_bisection(kind, LawFamily::Polynomial, alpha, gamma, &spec, &cfg, false)?.p_th;
            let oracle = grid_oracle(kind, LawFamily::Polynomial, alpha, gamma, &spec, grid_points)?;
            checks.push(check(
                format!("{kind} oracle alpha={alpha} gamma={gamma}"),
                num_p,
                oracle,
                step + cfg.delta_p0,
            ));
        }
    }
    for noise in [MeasureNoise::Depolarizing, MeasureNoise::Erasure] {
        let t = required_runs(noise, 0.5, 128, 0.01)?;
        let e = exact_error(noise, 0.5, 128, t)?;
        checks.push(Check {
            name: format!("{} T={t} exact error <= 0.01", noise.name()),
            value: e,
            expected: 0.01,
            tolerance: 0.0,
            pass: e <= 0.01,
        });
    }

    let mut table = format!(
        "{:<44} {:>14} {:>14} {:>10}  result\n",
        "check", "value", "expected", "tol"
    );
    for ch in &checks {
        table.push_str(&format!(
            "{:<44} {:>14} {:>14} {:>10}  {}\n",
            ch.name,
            num(ch.value),
            num(ch.expected),
            format!("{:.1e}", ch.tolerance),
            if ch.pass { "PASS" } else { "FAIL" }
        ));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    table.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));

    let mut r = Report::new(&a, json!({ "checks": checks, "failed": failed }))?;
    r.csv = Some((
        vec!["check", "value", "expected", "tolerance", "pass"],
        checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    num(c.value),
                    num(c.expected),
                    num(c.tolerance),
                    c.pass.to_string(),
                ]
            })
            .collect(),
    ));
    r.stdout = Some(table);
    r.flagged = failed > 0;
    Ok(r)
}
