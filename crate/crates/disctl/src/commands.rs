use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bellops::{value_to_score, BellFunctional};
use extract::{
    analytic, default_knots, penalty, xi_lower_bound, AnalyticKind, CurveMeta, ExtractabilityCurve, GridSpec,
    PenaltyMode, FLOOR,
};
use security::{kappa_for_completeness, soundness, Protocol, ProtocolConfig, SecurityReport};
use simproto::{AbortAttackScript, DeviceModel, Scenario, SimConfig, SourceModel};

use crate::cli::*;
use crate::manifest::{sha256_file, Recorder, RunManifest};
use crate::CliError;

const DEFAULT_TARGET_EPS_C: f64 = 1e-2;
const G_EPS_VALUES: [f64; 4] = [0.0, 0.05, 0.1, 0.15];

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Only the first call in a process can size the global pool.
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            log::debug!("thread pool already initialized");
        }
    }
    let mut rec = Recorder::new(cli);
    let manifest_path = match &cli.command {
        Command::Extract(a) => extract_cmd(a, &mut rec)?,
        Command::Security(a) => security_cmd(a, &mut rec)?,
        Command::Simulate(a) => simulate_cmd(a, &mut rec)?,
        Command::Figures(a) => figures_cmd(a, &mut rec)?,
        Command::Replay(a) => return replay_cmd(a),
    };
    rec.finish(&manifest_path)?;
    log::info!("manifest {}", manifest_path.display());
    Ok(())
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn load_functional(spec: &str, rec: &mut Recorder) -> Result<BellFunctional, CliError> {
    let f = BellFunctional::load(spec).map_err(|e| CliError::Usage(format!("functional '{spec}': {e}")))?;
    if !spec.eq_ignore_ascii_case("chsh") {
        rec.input(Path::new(spec))?;
    }
    Ok(f)
}

fn load_curve(spec: &str, rec: &mut Recorder) -> Result<ExtractabilityCurve, CliError> {
    match spec.to_ascii_lowercase().as_str() {
        "bardyn" => Ok(ExtractabilityCurve::from_analytic(AnalyticKind::BardynLocc)),
        "kaniewski" => Ok(ExtractabilityCurve::from_analytic(AnalyticKind::KaniewskiLo)),
        _ => {
            let path = Path::new(spec);
            let curve =
                ExtractabilityCurve::load(path).map_err(|e| CliError::Usage(format!("curve '{spec}': {e}")))?;
            rec.input(path)?;
            Ok(curve)
        }
    }
}

/// A floor-valued curve over the quantum range; the completeness error does
/// not depend on the curve, but the configuration needs one.
fn placeholder_curve(f: &BellFunctional) -> ExtractabilityCurve {
    let b = f.bounds();
    let meta = CurveMeta { delta: 0.0, mode: PenaltyMode::Paper, penalty: 0.0, floor: FLOOR };
    ExtractabilityCurve::trivial(f.id(), &[b.eta_q_min, b.eta_q_max], meta)
}

fn resolve_kappa(cfg: &ProtocolConfig, k: &KappaArgs) -> Result<f64, CliError> {
    match k.kappa {
        Some(kappa) => Ok(kappa),
        None => {
            let target = k.target_eps_c.unwrap_or(DEFAULT_TARGET_EPS_C);
            Ok(kappa_for_completeness(cfg, target)?)
        }
    }
}

/// Sweep, or the floor curve when the grid spacing is beyond any useful range.
fn numeric_curve(
    f: &BellFunctional,
    delta: f64,
    mode: PenaltyMode,
    knots: Vec<f64>,
) -> Result<(ExtractabilityCurve, String), CliError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(CliError::Usage(format!("--delta must be positive, got {delta}")));
    }
    if delta > FRAC_PI_4 {
        let m = penalty(f, delta, mode);
        log::warn!(
            "δ = {delta} is beyond π/4: the penalty {m:.4} exceeds the quantum range above the local bound, \
             writing the trivial curve"
        );
        let meta = CurveMeta { delta, mode, penalty: m, floor: FLOOR };
        return Ok((ExtractabilityCurve::trivial(f.id(), &knots, meta), "trivial".into()));
    }
    let curve = xi_lower_bound(f, &GridSpec::new(delta, mode, knots))?;
    let solves: usize = curve.details().iter().map(|d| d.result.solves).sum();
    let pruned: usize = curve.details().iter().map(|d| d.result.pruned).sum();
    Ok((curve, format!("{solves} solves, {pruned} cells pruned")))
}

fn csv_bytes(header: &[String], rows: &[Vec<f64>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io { path: "csv buffer".into(), message: e.to_string() };
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r.iter().map(|x| x.to_string())).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io { path: "csv buffer".into(), message: e.to_string() })
}

fn extract_cmd(a: &ExtractArgs, rec: &mut Recorder) -> Result<PathBuf, CliError> {
    let f = load_functional(&a.bell, rec)?;
    if a.knots == 0 {
        return Err(CliError::Usage("--knots must be at least 1".into()));
    }
    let knots = default_knots(&f, a.knots);
    let (curve, detail) = numeric_curve(&f, a.delta, a.mode.into(), knots)?;
    rec.stage("sweep", detail);
    rec.write_json(&a.out, &curve.to_json())?;
    let mut csv = Vec::new();
    curve.write_csv(&mut csv)?;
    rec.write(&sibling(&a.out, "csv"), &csv)?;
    Ok(sibling(&a.out, "manifest.json"))
}

fn protocol_config(
    protocol: Protocol,
    n: u64,
    threshold: f64,
    epsilon: f64,
    f: &BellFunctional,
    curve: &ExtractabilityCurve,
    bound: Bound,
) -> ProtocolConfig {
    ProtocolConfig {
        protocol,
        n,
        // Replaced once κ is resolved.
        kappa: 1.0,
        threshold,
        epsilon,
        functional: f.clone(),
        curve: curve.clone(),
        bound_mode: bound.into(),
    }
}

fn security_cmd(a: &SecurityArgs, rec: &mut Recorder) -> Result<PathBuf, CliError> {
    let f = load_functional(&a.bell, rec)?;
    let curve = load_curve(&a.curve, rec)?;
    let mut reports = Vec::with_capacity(a.n.len());
    for &n in &a.n {
        let mut cfg = protocol_config(a.protocol, n, a.omega_sharp, a.epsilon, &f, &curve, a.bound_mode);
        cfg.kappa = resolve_kappa(&cfg, &a.kappa)?;
        let r = soundness(&cfg)?;
        log::info!("n = {n}: ε_s = {:.4e}, ε_c = {:.4e}, κ = {:.4e}", r.eps_sound, r.eps_complete, r.kappa);
        reports.push(r);
    }
    rec.stage("soundness", format!("{} configurations", reports.len()));
    if let [r] = reports.as_slice() {
        rec.write_json(&a.out, &r.to_json())?;
    } else {
        let doc = serde_json::json!({ "reports": reports });
        rec.write_json(&a.out, &doc.to_string())?;
        let mut csv = Vec::new();
        security::write_sweep_csv(&mut csv, &reports).map_err(|e| CliError::io(&a.out, e))?;
        rec.write(&sibling(&a.out, "csv"), &csv)?;
    }
    Ok(sibling(&a.out, "manifest.json"))
}

fn simulate_cmd(a: &SimulateArgs, rec: &mut Recorder) -> Result<PathBuf, CliError> {
    let (cfg, src, dev, trials, seed) = match &a.scenario {
        Some(path) => {
            let s = Scenario::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            rec.input(path)?;
            let (cfg, src, dev) = (s.config()?, s.source()?, s.device()?);
            (cfg, src, dev, s.trials, s.seed)
        }
        None => {
            let f = load_functional(&a.bell, rec)?;
            let mut pc =
                protocol_config(a.protocol, a.n, a.omega_sharp, 0.0, &f, &placeholder_curve(&f), a.bound_mode);
            pc.kappa = resolve_kappa(&pc, &a.kappa)?;
            let dev = match a.device {
                DeviceChoice::Optimal => DeviceModel::OptimalChsh,
                DeviceChoice::Anti => DeviceModel::anti_chsh(),
                DeviceChoice::AbortAttack => DeviceModel::Adaptive(Arc::new(AbortAttackScript::new(a.t_sep))),
            };
            let src = match a.device {
                DeviceChoice::AbortAttack => SourceModel::AbortAttack { t_sep: a.t_sep },
                _ => SourceModel::HonestIsotropic { mu: a.mu },
            };
            (SimConfig::from(&pc), src, dev, a.trials, a.seed)
        }
    };
    let record = simproto::run_protocol(&cfg, &src, &dev, seed)?;
    rec.stage("trial", format!("{} rounds", record.rounds.len()));
    let dir = &a.out_dir;
    let mut csv = Vec::new();
    record.write_transcript_csv(&mut csv)?;
    rec.write(&dir.join("transcript.csv"), &csv)?;
    rec.write_json(&dir.join("summary.json"), &record.summary_json())?;
    if trials > 1 {
        let (rate, (lo, hi)) = simproto::estimate_abort_rate(&cfg, &src, &dev, trials, seed)?;
        rec.stage("abort-rate", format!("{trials} trials"));
        log::info!("abort rate {rate:.5} (95% CI {lo:.5}..{hi:.5})");
        let doc = serde_json::json!({
            "trials": trials,
            "seed": seed,
            "protocol": cfg.protocol,
            "n": cfg.n,
            "threshold": cfg.threshold,
            "kappa": cfg.kappa,
            "abort_rate": rate,
            "ci95": [lo, hi],
        });
        rec.write_json(&dir.join("abort_rate.json"), &doc.to_string())?;
    }
    Ok(dir.join("manifest.json"))
}

fn fmt_label(prefix: &str, x: f64) -> String {
    format!("{prefix}{x}")
}

fn figures_cmd(a: &FiguresArgs, rec: &mut Recorder) -> Result<PathBuf, CliError> {
    let f = load_functional(&a.bell, rec)?;
    let dir = &a.out_dir;
    match a.which {
        Figure::GEps => {
            let curve = load_curve(&a.curve, rec)?;
            let b = f.bounds();
            let domain = (b.eta_q_min, b.eta_q_max);
            let gs = G_EPS_VALUES
                .iter()
                .map(|&e| curve.g_epsilon(domain, e))
                .collect::<Result<Vec<_>, _>>()?;
            let points = 401;
            let rows: Vec<Vec<f64>> = (0..points)
                .map(|i| {
                    let w = domain.0 + (domain.1 - domain.0) * i as f64 / (points - 1) as f64;
                    std::iter::once(w).chain(gs.iter().map(|g| g.eval(w))).collect()
                })
                .collect();
            let mut header = vec!["omega".to_string()];
            header.extend(G_EPS_VALUES.iter().map(|&e| fmt_label("eps_", e)));
            rec.stage("g-eps", format!("{points} points"));
            rec.write(&dir.join("g_eps.csv"), &csv_bytes(&header, &rows)?)?;
        }
        Figure::EpsVsN => {
            let curve = load_curve(&a.curve, rec)?;
            let ns: Vec<u64> = (0..=12).map(|k| 10f64.powf(3.0 + k as f64 / 4.0).round() as u64).collect();
            let seq = a.protocol.is_sequential();
            let threshold = |w: f64| if seq { value_to_score(w).map_err(|e| CliError::Usage(e.to_string())) } else { Ok(w) };
            let report = |n: u64, w: f64, eps: f64| -> Result<SecurityReport, CliError> {
                let mut cfg = protocol_config(a.protocol, n, threshold(w)?, eps, &f, &curve, a.bound_mode);
                cfg.kappa = kappa_for_completeness(&cfg, a.target_eps_c)?;
                Ok(soundness(&cfg)?)
            };

            let epsilons: Vec<f64> = if a.protocol == Protocol::P1 {
                log::warn!("P1 certifies the target exactly; only ε = 0 is computed");
                vec![0.0]
            } else {
                G_EPS_VALUES.to_vec()
            };
            let mut rows = Vec::new();
            for &n in &ns {
                let mut row = vec![n as f64];
                for &e in &epsilons {
                    row.push(report(n, a.omega_sharp, e)?.eps_sound);
                }
                rows.push(row);
            }
            let mut header = vec!["n".to_string()];
            header.extend(epsilons.iter().map(|&e| fmt_label("eps_", e)));
            rec.write(&dir.join("eps_vs_n_fixed_omega.csv"), &csv_bytes(&header, &rows)?)?;

            let omegas = [2.7, 2.75, 2.8, f.bounds().eta_q_max];
            let eps = if a.protocol == Protocol::P1 { 0.0 } else { a.epsilon };
            let mut rows = Vec::new();
            for &n in &ns {
                let mut row = vec![n as f64];
                for &w in &omegas {
                    row.push(report(n, w, eps)?.eps_sound);
                }
                rows.push(row);
            }
            let mut header = vec!["n".to_string()];
            header.extend(omegas.iter().map(|&w| fmt_label("omega_", w)));
            rec.stage("eps-vs-n", format!("{} configurations", ns.len() * (epsilons.len() + omegas.len())));
            rec.write(&dir.join("eps_vs_n_fixed_eps.csv"), &csv_bytes(&header, &rows)?)?;
        }
        Figure::XiVsAnalytic => {
            if !f.is_chsh() {
                return Err(CliError::Usage("the closed-form curves exist only for CHSH".into()));
            }
            if a.knots < 2 {
                return Err(CliError::Usage("--knots must be at least 2".into()));
            }
            let knots = default_knots(&f, a.knots);
            let mut columns = Vec::new();
            for &d in &a.delta {
                let (curve, detail) = numeric_curve(&f, d, a.mode.into(), knots.clone())?;
                rec.stage(&format!("sweep δ={d}"), detail);
                columns.push((d, knots.iter().map(|&w| curve.eval(w)).collect::<Vec<f64>>()));
            }
            let mut by_spacing: Vec<_> = columns.iter().collect();
            by_spacing.sort_by(|x, y| y.0.total_cmp(&x.0));
            for pair in by_spacing.windows(2) {
                let (coarse, fine) = (pair[0], pair[1]);
                if coarse.1.iter().zip(&fine.1).any(|(c, f)| f < &(c - 1e-9)) {
                    log::warn!("δ = {} falls below δ = {} at some knot", fine.0, coarse.0);
                }
            }
            let rows: Vec<Vec<f64>> = knots
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let mut row = vec![w];
                    row.extend(columns.iter().map(|c| c.1[i]));
                    row.push(analytic(AnalyticKind::BardynLocc, w).unwrap_or(FLOOR));
                    row.push(analytic(AnalyticKind::KaniewskiLo, w).unwrap_or(FLOOR));
                    row
                })
                .collect();
            let mut header = vec!["omega".to_string()];
            header.extend(a.delta.iter().map(|&d| fmt_label("xi_delta_", d)));
            header.extend(["bardyn".to_string(), "kaniewski".to_string()]);
            rec.write(&dir.join("xi_vs_analytic.csv"), &csv_bytes(&header, &rows)?)?;
        }
    }
    let stem = match a.which {
        Figure::GEps => "g_eps",
        Figure::EpsVsN => "eps_vs_n",
        Figure::XiVsAnalytic => "xi_vs_analytic",
    };
    Ok(dir.join(format!("{stem}.manifest.json")))
}

fn replay_cmd(a: &ReplayArgs) -> Result<(), CliError> {
    let m = RunManifest::load(&a.manifest)?;
    if matches!(m.cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a replay manifest cannot itself be replayed".into()));
    }
    for input in &m.inputs {
        let now = sha256_file(&input.path)?;
        if now != input.sha256 {
            return Err(CliError::Mismatch(format!("input {} changed", input.path.display())));
        }
    }
    run(&m.cli)?;
    for out in &m.outputs {
        let now = sha256_file(&out.path)?;
        if now != out.sha256 {
            return Err(CliError::Mismatch(format!("output {} differs", out.path.display())));
        }
    }
    log::info!("replay reproduced {} outputs", m.outputs.len());
    Ok(())
}
