//! One function per subcommand. Each reads its blocks from the resolved
//! config, writes its tables and returns results plus asserted checks.

use nash_core::holder::Field;
use nash_core::lq::{oracle_errors, riccati_integrate};
use nash_core::nash::{
    dimension_stability, horizon_scan, picard_solve, uniqueness_probe, GameSpec, NashSolution, PicardReport, ScanOptions,
};
use nash_core::pde::{
    fpk_gradient_mass, solve_fpk_grid, solve_grid, solve_mc, verify_decay, DecayReport, DiffusionSpec, FpkOptions,
    LinearProblem, McOptions, McQuery,
};
use nash_core::weights::LpExponent;

use crate::config::{ExperimentConfig, SolverConfig};
use crate::output::{num, Check, Outcome, OutputDir};
use crate::RunError;

fn schema(msg: impl Into<String>) -> RunError {
    RunError::Schema(msg.into())
}

fn flag(b: bool) -> String {
    b.to_string()
}

fn build_game(cfg: &ExperimentConfig) -> Result<GameSpec, RunError> {
    cfg.picard.check()?;
    let beta = cfg.weights.build()?;
    let game = cfg.game()?.build(&beta, cfg.grid()?, &cfg.solver)?;
    Ok(cfg.picard.apply(game))
}

// ---------- certify-weights ----------

pub fn certify_weights(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let beta = cfg.weights.build()?;
    let cert = beta.certify_csc();
    let w = beta.half_width();
    let conv = beta.self_convolve();
    let rows: Vec<Vec<String>> = (0..=w)
        .map(|i| vec![i.to_string(), num(beta.at(i as i64)), num(conv[w + i]), num(cert.ratios[i])])
        .collect();
    out.csv("ratios.csv", &["i", "beta", "self_convolution", "ratio"], &rows)?;

    let mut o = Outcome::default();
    o.set("kind", beta.kind().name());
    o.set("half_width", w);
    o.set("c", cert.c);
    o.set("lower_bound", cert.lower_bound());
    o.set("argmax", cert.argmax);
    o.set("guard", cert.guard);
    o.set("edge_ratio", cert.edge_ratio);
    o.set("growth", cert.growth);
    o.set("edge_contaminated", cert.edge_contaminated);
    o.set("certified", cert.certified);
    o.set("l1", beta.lp_norm(LpExponent::One));
    o.set("l_half", beta.lp_norm(LpExponent::Half));
    o.set("tail_fraction", beta.tail_fraction());
    o.set("tail_converged", beta.is_tail_converged());
    if let Some(expect) = cfg.tolerances.expect_certified {
        o.check(Check::new("certified", cert.certified, expect, cert.certified == expect));
    }
    Ok(o)
}

// ---------- solve ----------

fn picard_tables(report: &PicardReport, out: &mut OutputDir) -> Result<(), RunError> {
    let rows: Vec<Vec<String>> = report
        .iterations
        .iter()
        .map(|it| {
            vec![
                it.index.to_string(),
                num(it.increment.total()),
                num(it.increment.space),
                num(it.increment.time),
                it.ratio.map(num).unwrap_or_default(),
                num(it.occupancy.r),
                num(it.occupancy.r_prime),
                flag(it.outside_envelope),
            ]
        })
        .collect();
    out.csv(
        "iterations.csv",
        &["iteration", "increment", "space", "time", "ratio", "r", "r_prime", "outside_envelope"],
        &rows,
    )
}

fn decay_row(label: String, d: &DecayReport) -> Vec<String> {
    vec![
        label,
        num(d.k1),
        num(d.k2),
        num(d.k3),
        num(d.time_lipschitz_first),
        num(d.time_lipschitz_second),
    ]
}

fn solution_tables(sol: &NashSolution, out: &mut OutputDir) -> Result<(), RunError> {
    let res: Vec<Vec<String>> = sol
        .residuals
        .iter()
        .map(|r| vec![r.player.to_string(), num(r.sup), num(r.time), r.node.to_string()])
        .collect();
    out.csv("residuals.csv", &["player", "sup", "time", "node"], &res)?;
    let dec: Vec<Vec<String>> = sol.decay.iter().enumerate().map(|(i, d)| decay_row(i.to_string(), d)).collect();
    out.csv("decay.csv", &["player", "k1", "k2", "k3", "time_lipschitz_first", "time_lipschitz_second"], &dec)
}

fn report_results(o: &mut Outcome, report: &PicardReport) {
    o.set("converged", report.converged);
    o.set("diverged", report.diverged);
    o.set("iterations", report.iteration_count());
    o.set("final_increment", report.final_increment());
    o.set("failure", report.failure.as_ref().map(|e| e.to_string()));
    let envelope = report.iterations.iter().any(|it| it.outside_envelope);
    o.set("left_envelope", envelope);
}

fn iteration_checks(o: &mut Outcome, cfg: &ExperimentConfig, report: &PicardReport) {
    o.check(Check::new("converged", report.converged, true, report.converged));
    if let Some(max) = cfg.tolerances.max_iterations {
        let n = report.iteration_count();
        o.check(Check::new("max_iterations", n, max, n <= max));
    }
    if let Some(tol) = cfg.tolerances.final_increment {
        let v = report.final_increment().unwrap_or(f64::INFINITY);
        o.check(Check::new("final_increment", v, tol, v < tol));
    }
}

pub fn solve(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let game = build_game(cfg)?;
    let run = picard_solve(&game, &cfg.picard.initial.into(), cfg.picard.tol, cfg.picard.max_iter)?;
    picard_tables(&run.report, out)?;
    let mut o = Outcome::default();
    o.set("players", game.players());
    o.set("dt", game.solver.dt);
    o.set("time_nodes", game.times().len());
    o.set("collar", game.collar);
    report_results(&mut o, &run.report);
    iteration_checks(&mut o, cfg, &run.report);
    if let Some(sol) = &run.solution {
        solution_tables(sol, out)?;
        for (i, f) in sol.u.iter().enumerate() {
            out.field(&format!("u_{i}"), f)?;
        }
        let worst = sol.residuals.iter().map(|r| r.sup).fold(0.0, f64::max);
        o.set("max_residual", worst);
        let k2: Vec<f64> = sol.decay.iter().map(|d| d.k2).collect();
        o.set("k2", &k2);
        if let Some(tol) = cfg.tolerances.max_residual {
            o.check(Check::new("max_residual", worst, tol, worst <= tol));
        }
    }
    Ok(o)
}

// ---------- oracle-compare ----------

pub fn oracle_compare(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let beta = cfg.weights.build()?;
    let lq = cfg.game()?.lq(&beta)?.ok_or_else(|| schema("oracle-compare needs an LQ game"))?;
    let game = build_game(cfg)?;
    let traj = riccati_integrate(&lq, lq.horizon() / 1000.0)?;
    let rows: Vec<Vec<String>> = (0..traj.states.len()).map(|k| traj.row(k).into_iter().map(num).collect()).collect();
    let cols = traj.columns();
    let header: Vec<&str> = cols.iter().map(String::as_str).collect();
    out.csv("riccati.csv", &header, &rows)?;

    let run = picard_solve(&game, &cfg.picard.initial.into(), cfg.picard.tol, cfg.picard.max_iter)?;
    picard_tables(&run.report, out)?;
    let mut o = Outcome::default();
    report_results(&mut o, &run.report);
    o.set("riccati_halving_change", traj.halving_change);
    o.set("cost_decay", lq.cost_decay(&beta, game.layout)?);
    o.set("riccati_decay", traj.decay_constant(&beta, game.layout)?);
    iteration_checks(&mut o, cfg, &run.report);
    let sol = match run.solution {
        Some(s) => s,
        None => {
            o.check(Check::new("oracle_error", Option::<f64>::None, cfg.tolerances.oracle_error, false));
            return Ok(o);
        }
    };
    let errs = oracle_errors(&traj, &sol.u, game.collar)?;
    let rows: Vec<Vec<String>> = errs
        .iter()
        .map(|r| {
            vec![
                num(r.t),
                r.player.to_string(),
                num(r.max_error),
                r.node.to_string(),
                num(r.sampled_origin),
                num(r.oracle_origin),
            ]
        })
        .collect();
    out.csv("oracle.csv", &["t", "player", "max_abs_error", "node", "picard_origin", "riccati_origin"], &rows)?;
    let max_error = errs.iter().map(|r| r.max_error).fold(0.0, f64::max);
    o.set("max_error", max_error);
    o.set("collar", game.collar);
    if let Some(budget) = cfg.tolerances.oracle_error {
        o.check(Check::new("oracle_error", max_error, budget, max_error < budget));
    }
    Ok(o)
}

// ---------- scan-horizon ----------

pub fn scan_horizon(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let scan_cfg = cfg.scan.as_ref().ok_or_else(|| schema("missing `scan` block"))?;
    if scan_cfg.horizons.len() < 2 || scan_cfg.probes == 0 {
        return Err(schema("scan needs at least two horizons and one probe"));
    }
    let template = build_game(cfg)?;
    let opts = ScanOptions {
        probes: scan_cfg.probes,
        amplitude: scan_cfg.amplitude,
        seed: cfg.seed()?,
        tol: cfg.picard.tol,
        max_iter: cfg.picard.max_iter,
    };
    let scan = horizon_scan(&template, &scan_cfg.horizons, &opts)?;
    let mut header: Vec<String> = vec!["horizon".into()];
    header.extend((0..scan_cfg.probes).map(|k| format!("ratio_{k}")));
    header.extend(["mean_ratio", "max_ratio", "converged", "diverged", "iterations"].map(String::from));
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![num(r.horizon)];
            v.extend(r.ratios.iter().copied().map(num));
            v.extend([num(r.mean_ratio), num(r.max_ratio), flag(r.converged), flag(r.diverged), r.iterations.to_string()]);
            v
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv("scan.csv", &h, &rows)?;

    let mut o = Outcome::default();
    o.set("spearman", scan.spearman);
    o.set("last_contracting", scan.last_contracting);
    o.set("first_failing", scan.first_failing);
    let smallest = scan
        .rows
        .iter()
        .min_by(|a, b| a.horizon.total_cmp(&b.horizon))
        .expect("at least two rows");
    o.set("smallest_horizon_max_ratio", smallest.max_ratio);
    if let Some(expect) = cfg.tolerances.contraction_at_smallest {
        let ok = smallest.ratios.iter().all(|r| *r < 1.0);
        o.check(Check::new("contraction_at_smallest", smallest.max_ratio, 1.0, ok == expect));
    }
    if let Some(min) = cfg.tolerances.min_spearman {
        o.check(Check::new("spearman", scan.spearman, min, scan.spearman > min));
    }
    Ok(o)
}

// ---------- verify-decay ----------

pub fn verify_decay_cmd(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let lin = cfg.linear.as_ref().ok_or_else(|| schema("missing `linear` block"))?;
    let beta = cfg.weights.build()?;
    let n = lin.dim;
    if lin.player >= n {
        return Err(schema("linear.player must be below linear.dim"));
    }
    let weights = beta.shift(lin.player, n)?;
    let a = DiffusionSpec::isotropic(n, lin.diffusion)?;
    let drift = lin.drift.build(&beta, n)?;
    let source = lin.source.build(&weights)?;
    let terminal = lin.terminal.build(&weights)?;
    let base = cfg.grid()?;
    let collar_fraction = cfg.picard.collar_fraction;

    let solve_on = |points: usize, horizon: f64| -> Result<(Field, DecayReport), RunError> {
        let grid = crate::config::GridConfig { points, half_width: base.half_width }.build(n)?;
        let p = LinearProblem { diffusion: &a, drift: &drift, source: &source, terminal: &terminal, start: 0.0, horizon };
        let opts = cfg.solver.options(&grid, &a, horizon)?;
        let sol = solve_grid(&p, &grid, &opts)?;
        let d = verify_decay(&sol.field, &weights, grid.collar_nodes(collar_fraction))?;
        Ok((sol.field, d))
    };

    let mut rows = Vec::new();
    let (field, base_decay) = solve_on(base.points, lin.horizon)?;
    rows.push((base.points, lin.horizon, base_decay.clone()));
    for &m in &lin.refinements {
        let (_, d) = solve_on(m, lin.horizon)?;
        rows.push((m, lin.horizon, d));
    }
    for &t in &lin.horizons {
        let (_, d) = solve_on(base.points, t)?;
        rows.push((base.points, t, d));
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|(m, t, d)| {
            let mut v = vec![m.to_string()];
            v.extend(decay_row(num(*t), d));
            v
        })
        .collect();
    out.csv(
        "decay.csv",
        &["points", "horizon", "k1", "k2", "k3", "time_lipschitz_first", "time_lipschitz_second"],
        &table,
    )?;
    out.field("w", &field)?;

    let mut o = Outcome::default();
    o.set("k1", base_decay.k1);
    o.set("k2", base_decay.k2);
    o.set("k3", base_decay.k3);
    o.set("time_lipschitz_first", base_decay.time_lipschitz_first);
    o.set("time_lipschitz_second", base_decay.time_lipschitz_second);

    // consecutive refinements
    let refined: Vec<&DecayReport> = rows.iter().filter(|r| r.1 == lin.horizon).map(|r| &r.2).collect();
    let mut change: f64 = 0.0;
    for w in refined.windows(2) {
        for (a, b) in [(w[0].k1, w[1].k1), (w[0].k2, w[1].k2)] {
            change = change.max((b - a).abs() / a.abs().max(f64::MIN_POSITIVE));
        }
    }
    if refined.len() > 1 {
        o.set("refinement_change", change);
    }
    if let Some(tol) = cfg.tolerances.refinement_change {
        let ok = refined.len() > 1 && change < tol;
        o.check(Check::new("refinement_change", change, tol, ok));
    }

    let mut by_t: Vec<(f64, &DecayReport)> = rows.iter().filter(|r| r.0 == base.points).map(|r| (r.1, &r.2)).collect();
    by_t.sort_by(|a, b| b.0.total_cmp(&a.0));
    by_t.dedup_by(|a, b| a.0 == b.0);
    let monotone = by_t.len() > 1
        && by_t.windows(2).all(|w| w[1].1.k1 < w[0].1.k1 && w[1].1.k2 < w[0].1.k2 && w[1].1.k3 < w[0].1.k3);
    if by_t.len() > 1 {
        o.set("monotone_in_horizon", monotone);
    }
    if let Some(expect) = cfg.tolerances.monotone_in_horizon {
        o.check(Check::new("monotone_in_horizon", monotone, expect, monotone == expect));
    }

    if let Some(mc) = &cfg.mc {
        let seed = cfg.seed()?;
        let queries: Vec<McQuery> = mc.queries.iter().map(|q| McQuery { t: q.t, x: q.x.clone() }).collect();
        let p = LinearProblem {
            diffusion: &a,
            drift: &drift,
            source: &source,
            terminal: &terminal,
            start: 0.0,
            horizon: lin.horizon,
        };
        let est = solve_mc(&p, &queries, &McOptions { paths: mc.paths, dt: mc.dt, seed })?;
        let budget = cfg.tolerances.mc_budget;
        let mut all = true;
        let mut worst: f64 = 0.0;
        let mut table = Vec::new();
        for (q, e) in queries.iter().zip(&est) {
            let g = field.interpolate(q.t, &q.x)?;
            let diff = (e.value - g).abs();
            let allowed = (3.0 * e.half_width).max(budget.unwrap_or(0.0));
            let ok = diff <= allowed;
            all &= ok;
            worst = worst.max(diff);
            let mut v = vec![num(q.t)];
            v.push(q.x.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "));
            v.extend([num(e.value), num(e.half_width), num(g), num(diff), num(allowed), flag(ok)]);
            table.push(v);
        }
        out.csv("mc.csv", &["t", "x", "mc", "half_width", "grid", "abs_diff", "allowed", "pass"], &table)?;
        o.set("mc_max_abs_diff", worst);
        if let Some(b) = budget {
            o.check(Check::new("mc_agreement", worst, b, all));
        }
    }
    Ok(o)
}

// ---------- fpk-diagnostic ----------

pub fn fpk_diagnostic(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let f = cfg.fpk.as_ref().ok_or_else(|| schema("missing `fpk` block"))?;
    let n = f.y.len();
    let beta = cfg.weights.build()?;
    let grid = cfg.grid()?.build(n)?;
    let a = DiffusionSpec::isotropic(n, f.diffusion)?;
    let drift = f.drift.build(&beta, n)?;
    let h = grid.spacing();
    let dt = f.cfl_fraction * h * h / (2.0 * n as f64 * f.diffusion);
    let opts = FpkOptions { start: 0.0, horizon: f.horizon, dt, save_every: f.save_every };
    let sol = solve_fpk_grid(&a, &drift, &f.y, f.eps_factor * h, &grid, &opts)?;
    let gm = fpk_gradient_mass(&sol, f.fit_range.map(|[a, b]| (a, b)))?;
    let rows: Vec<Vec<String>> = (0..gm.elapsed.len())
        .map(|k| vec![num(gm.elapsed[k]), num(gm.integrand[k]), num(gm.cumulative[k]), num(sol.mass[k])])
        .collect();
    out.csv("gradient_mass.csv", &["elapsed", "integrand", "cumulative", "mass"], &rows)?;
    out.field("density", &sol.field)?;

    let span = f.horizon;
    let doubling = gm.cumulative_at(span) / gm.cumulative_at(span / 4.0);
    let mut o = Outcome::default();
    o.set("eps", sol.eps);
    o.set("dt", sol.dt);
    o.set("slope", gm.fit.slope);
    o.set("r_squared", gm.fit.r_squared);
    o.set("constant", gm.constant);
    o.set("fit_range", [gm.fit_range.0, gm.fit_range.1]);
    o.set("fit_points", gm.fit_points);
    o.set("doubling_ratio", doubling);
    o.set("max_mass_drift", sol.max_mass_drift);
    o.set("clipped", sol.clipped);
    if let Some([lo, hi]) = cfg.tolerances.slope_range {
        let s = gm.fit.slope;
        o.check(Check::new("slope", s, [lo, hi], (lo..=hi).contains(&s)));
    }
    if let Some([lo, hi]) = cfg.tolerances.doubling_range {
        o.check(Check::new("doubling_ratio", doubling, [lo, hi], (lo..=hi).contains(&doubling)));
    }
    if let Some(tol) = cfg.tolerances.max_mass_drift {
        o.check(Check::new("mass_drift", sol.max_mass_drift, tol, sol.max_mass_drift <= tol));
    }
    Ok(o)
}

// ---------- stability ----------

pub fn stability(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let st = cfg.stability.as_ref().ok_or_else(|| schema("missing `stability` block"))?;
    cfg.picard.check()?;
    let largest = *st.sizes.iter().max().ok_or_else(|| schema("stability.sizes is empty"))?;
    let beta = cfg.weights.build()?;
    let game_cfg = cfg.game()?;
    let grid_cfg = cfg.grid()?;
    // one time grid for every size: the step of the largest game
    let probe = game_cfg.with_players(largest)?.build(&beta, grid_cfg, &cfg.solver)?;
    let solver = SolverConfig { dt: Some(probe.solver.dt), ..cfg.solver.clone() };
    let build = |n: usize| -> nash_core::Result<GameSpec> {
        let g = game_cfg
            .with_players(n)
            .and_then(|g| g.build(&beta, grid_cfg, &solver))
            .map_err(|e| nash_core::Error::InvalidParameter { name: "game", detail: e.to_string() })?;
        Ok(cfg.picard.apply(g))
    };
    let res = dimension_stability(&st.sizes, &build, &cfg.picard.initial.into(), cfg.picard.tol, cfg.picard.max_iter)?;
    let rows: Vec<Vec<String>> = res
        .pairs
        .iter()
        .map(|p| vec![p.small.to_string(), p.large.to_string(), num(p.difference), num(p.tail), num(p.difference / p.tail)])
        .collect();
    out.csv("stability.csv", &["small", "large", "difference", "tail", "ratio"], &rows)?;
    let mut o = Outcome::default();
    o.set("dt", probe.solver.dt);
    o.set("constant", res.constant);
    o.set("bounded", res.bounded);
    o.set("decreasing", res.decreasing);
    if let Some(expect) = cfg.tolerances.stability_decreasing {
        o.check(Check::new("decreasing", res.decreasing, expect, res.decreasing == expect));
    }
    if let Some(expect) = cfg.tolerances.stability_bounded {
        o.check(Check::new("bounded", res.bounded, expect, res.bounded == expect));
    }
    Ok(o)
}

// ---------- uniqueness ----------

pub fn uniqueness(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let game = build_game(cfg)?;
    let guesses = cfg.uniqueness.as_ref().map(|u| u.guesses).unwrap_or(crate::config::UniquenessConfig::default_pair());
    if guesses[0] == guesses[1] {
        return Err(schema("uniqueness needs two distinct initial guesses"));
    }
    let r = uniqueness_probe(&game, &guesses[0].into(), &guesses[1].into(), cfg.picard.tol, cfg.picard.max_iter)?;
    let name = |g: crate::config::GuessName| serde_json::to_value(g).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    out.csv(
        "uniqueness.csv",
        &["guess_a", "guess_b", "difference", "iterations_a", "iterations_b"],
        &[vec![name(guesses[0]), name(guesses[1]), num(r.difference), r.iterations.0.to_string(), r.iterations.1.to_string()]],
    )?;
    let mut o = Outcome::default();
    o.set("difference", r.difference);
    o.set("iterations", [r.iterations.0, r.iterations.1]);
    if let Some(factor) = cfg.tolerances.uniqueness_factor {
        let bound = factor * cfg.picard.tol;
        o.check(Check::new("difference", r.difference, bound, r.difference <= bound));
    }
    Ok(o)
}
