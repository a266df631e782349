//! Numerical certification of the convergence inequalities along simulated
//! trajectories and over sampled states.
//!
//! Every routine returns a [`CheckReport`]. Precondition mismatches (wrong
//! algorithm, stepsize outside the range a bound is stated for, games without
//! a unique interior equilibrium) are refused with [`Error::Precondition`]
//! instead of being reported as failures.

pub mod suites;

use rand::Rng;

use crate::dynamics::{max_stepsize, run, Algorithm, SimConfig, Simulator, Trajectory};
use crate::energy::{dissipation_at, grad_energy, local_norm_sq_at, DualState, JointStrategy};
use crate::error::{Error, Result};
use crate::games::{duality_gap, make_instance, sigma_min_restricted, Game, GameSpectral, InstanceFamily, NashEquilibrium};
use crate::linalg;
use crate::metrics::{chi2_to_nash, cross_entropy, kl_to_nash, tv_to_nash};
use crate::report::{scaled_tol, CheckReport};

/// Largest admissible envelope constant `max_T b(T)/√(log T/T)`.
pub const DG_ENVELOPE_MAX: f64 = 10.0;
/// Largest admissible fitted exponent of `T` in the best-iterate duality gap.
pub const DG_SLOPE_MAX: f64 = -0.4;

fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

/// Short human-readable descriptor of a game.
pub fn instance_label(game: &Game) -> String {
    match game.matrix.canonical_params() {
        Some((dp, dq)) => format!("canonical2x2(delta_p={},delta_q={})", short(dp), short(dq)),
        None => format!("{}x{}", game.matrix.m(), game.matrix.n()),
    }
}

fn short(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.6e}")
    } else {
        format!("{x}")
    }
}

fn require_ne(game: &Game) -> Result<&NashEquilibrium> {
    game.require_nash().map_err(|_| Error::Precondition("needs a unique interior equilibrium".into()))
}

fn require_dense(traj: &Trajectory) -> Result<()> {
    if !traj.is_dense() {
        return precondition("trajectory must be recorded at every step (stride 1)");
    }
    Ok(())
}

fn require_omwu(traj: &Trajectory, bound: f64, what: &str) -> Result<()> {
    if traj.config.algorithm != Algorithm::Omwu {
        return precondition("check applies to OMWU trajectories only");
    }
    if traj.config.eta > bound * (1.0 + 4.0 * f64::EPSILON) {
        return precondition(format!("stepsize {} exceeds {what} bound {bound}", traj.config.eta));
    }
    require_dense(traj)
}

fn kl_of(rec: &crate::dynamics::StepRecord) -> Result<f64> {
    rec.kl.ok_or_else(|| Error::Precondition("trajectory carries no distance to equilibrium".into()))
}

fn base_report(id: &str, traj: &Trajectory) -> CheckReport {
    CheckReport::new(id, instance_label(&traj.game))
        .with_param("eta", traj.config.eta)
        .with_param("horizon", traj.config.horizon as f64)
}

/// Energy dissipation sandwich: for `t ≥ 1`,
/// `−(5/4)η²D_t ≤ F(z_{t+1}) − F(z_t) ≤ −(1/20)η²D_t`, and for the first step
/// `F(z₁) − F(z₀) ≤ (5/8)η²D₀`. Tolerance `1e−10·(1+|F(z_t)|)`.
pub fn check_dissipation_sandwich(traj: &Trajectory) -> Result<CheckReport> {
    require_omwu(traj, max_stepsize(&traj.game.matrix), "stepsize assumption")?;
    let mut r = base_report("dissipation_sandwich", traj);
    let eta2 = traj.config.eta * traj.config.eta;
    let s = &traj.steps;
    for t in 0..traj.config.horizon {
        let (a, b) = (&s[t], &s[t + 1]);
        let df = b.energy - a.energy;
        let d = a.dissipation;
        let tol = 1e-10 * (1.0 + a.energy.abs());
        if t == 0 {
            r.observe(0, 0.625 * eta2 * d - df, tol);
            continue;
        }
        r.observe(t as u64, df + 1.25 * eta2 * d, tol);
        r.observe(t as u64, -0.05 * eta2 * d - df, tol);
        if d > 0.0 {
            let ratio = -df / (eta2 * d);
            r.detail_min("decrease_over_eta2_d_min", ratio);
            r.detail_max("decrease_over_eta2_d_max", ratio);
        }
    }
    Ok(r)
}

/// `|ΔKL_t − ΔF_t| ≤ 1e−9` for every step.
pub fn check_kl_energy_equivalence(traj: &Trajectory) -> Result<CheckReport> {
    require_dense(traj)?;
    let mut r = base_report("kl_energy_equivalence", traj);
    let s = &traj.steps;
    for t in 0..traj.config.horizon {
        let dkl = kl_of(&s[t + 1])? - kl_of(&s[t])?;
        let df = s[t + 1].energy - s[t].energy;
        let gap = (dkl - df).abs();
        r.detail_max("max_abs_gap", gap);
        r.observe(t as u64, 1e-9 - gap, 0.0);
    }
    Ok(r)
}

fn domination_into(r: &mut CheckReport, step: u64, game: &Game, ne: &NashEquilibrium, sv: &GameSpectral, w: &JointStrategy) -> Result<()> {
    let d = dissipation_at(&game.matrix, w)?;
    let kl = kl_to_nash(ne, w)?;
    let s2 = sv.sigma_min * sv.sigma_min;
    let tol = 1e-12 * (1.0 + d);
    let wmin = w.w_min();
    r.observe(step, d - s2 * wmin * wmin * kl, tol);
    r.observe(step, d - s2 * w.p_min() * w.q_min() * kl, tol);
    if kl > 0.0 {
        r.detail_min("dissipation_over_kl_min", d / kl);
    }
    Ok(())
}

/// Skew-gradient domination at one state:
/// `D ≥ σ_min²·w_min²·KL` and `D ≥ σ_min²·p_min·q_min·KL`.
pub fn check_skew_grad_domination(game: &Game, z: &DualState) -> Result<CheckReport> {
    check_skew_grad_domination_batch(game, std::iter::once(grad_energy(z)))
}

/// As [`check_skew_grad_domination`] over many strategies of one game.
pub fn check_skew_grad_domination_batch(game: &Game, states: impl IntoIterator<Item = JointStrategy>) -> Result<CheckReport> {
    let ne = require_ne(game)?;
    let sv = sigma_min_restricted(&game.matrix);
    let mut r = CheckReport::new("skew_grad_domination", instance_label(game)).with_param("sigma_min", sv.sigma_min);
    for (i, w) in states.into_iter().enumerate() {
        domination_into(&mut r, i as u64, game, ne, &sv, &w)?;
    }
    Ok(r)
}

/// Whether the tight 2×2 upper bound applies: `p* = q* = (1−δ, δ)` with
/// `δ < 1/2`, and `p(2) ≤ δ`, `q(2) ≤ δ`.
fn tight_upper_applies(ne: &NashEquilibrium, w: &JointStrategy) -> Option<f64> {
    if ne.p_star.len() != 2 || ne.q_star.len() != 2 {
        return None;
    }
    let delta = ne.p_star[1];
    let symmetric = (ne.p_star[1] - ne.q_star[1]).abs() <= 1e-12 * (1.0 + delta);
    (symmetric && delta < 0.5 && w.p()[1] <= delta && w.q()[1] <= delta).then_some(delta)
}

fn upper_into(r: &mut CheckReport, step: u64, game: &Game, ne: &NashEquilibrium, sigma_max: f64, w: &JointStrategy) -> Result<()> {
    let d = dissipation_at(&game.matrix, w)?;
    let kl = kl_to_nash(ne, w)?;
    let tol = 1e-12 * (1.0 + d);
    let s2 = sigma_max * sigma_max;
    r.observe(step, 2.0 * s2 * kl - d, tol);
    match tight_upper_applies(ne, w) {
        Some(delta) => {
            let w_hat = w.p_min().max(w.q_min());
            r.observe(step, 8.0 * s2 * w_hat * delta * kl - d, tol);
            *r.details.entry("tight_evaluations".into()).or_insert(0.0) += 1.0;
        }
        None => *r.details.entry("tight_skipped".into()).or_insert(0.0) += 1.0,
    }
    Ok(())
}

/// Dissipation upper bounds at one state: `D ≤ 2σ_max²·KL` always, and the
/// tight `D ≤ 8σ_max²·ŵ_min·δ·KL` when its preconditions hold (otherwise the
/// tight part is skipped, not failed).
pub fn check_dissipation_upper(game: &Game, z: &DualState) -> Result<CheckReport> {
    check_dissipation_upper_batch(game, std::iter::once(grad_energy(z)))
}

pub fn check_dissipation_upper_batch(game: &Game, states: impl IntoIterator<Item = JointStrategy>) -> Result<CheckReport> {
    let ne = require_ne(game)?;
    let sigma_max = game.matrix.sigma_max();
    let mut r = CheckReport::new("dissipation_upper", instance_label(game)).with_param("sigma_max", sigma_max);
    r.detail("tight_evaluations", 0.0);
    r.detail("tight_skipped", 0.0);
    for (i, w) in states.into_iter().enumerate() {
        upper_into(&mut r, i as u64, game, ne, sigma_max, &w)?;
    }
    if r.details["tight_evaluations"] == 0.0 {
        r.note("tight bound skipped: preconditions never held");
    }
    Ok(r)
}

/// One-step contraction for `t ≥ 1`:
/// `KL_{t+1} ≤ KL_t·(1 − η²σ_min²w_{t,min}²/20)` and the refined
/// `KL_{t+1} ≤ KL_t·exp(−η²σ_min²p_{t,min}q_{t,min}/20)`.
pub fn check_one_step_contraction(traj: &Trajectory) -> Result<CheckReport> {
    require_omwu(traj, max_stepsize(&traj.game.matrix), "stepsize assumption")?;
    require_ne(&traj.game)?;
    let sv = sigma_min_restricted(&traj.game.matrix);
    let c = traj.config.eta * traj.config.eta * sv.sigma_min * sv.sigma_min / 20.0;
    let mut r = base_report("one_step_contraction", traj).with_param("sigma_min", sv.sigma_min);
    let s = &traj.steps;
    for t in 1..traj.config.horizon {
        let (kt, kn) = (kl_of(&s[t])?, kl_of(&s[t + 1])?);
        let plain = kt * (1.0 - c * s[t].w_min * s[t].w_min);
        let refined = kt * (-c * s[t].p_min * s[t].q_min).exp();
        r.observe(t as u64, plain - kn, scaled_tol(plain));
        r.observe(t as u64, refined - kn, scaled_tol(refined));
    }
    Ok(r)
}

/// Linear rate `KL_{t+1} ≤ 2·KL₀·exp(−η²σ_min²e^{−2Λ/δ}t/20)` for `t ≥ 1`,
/// with the supporting bound `w_{t,min} ≥ e^{−2Λ/δ}` at every step.
pub fn check_linear_rate(traj: &Trajectory) -> Result<CheckReport> {
    require_omwu(traj, max_stepsize(&traj.game.matrix), "stepsize assumption")?;
    let ne = require_ne(&traj.game)?;
    let sv = sigma_min_restricted(&traj.game.matrix);
    let lam = cross_entropy(ne, &traj.config.init)?;
    let floor = (-2.0 * lam / ne.delta).exp();
    let eta = traj.config.eta;
    let rate = eta * eta * sv.sigma_min * sv.sigma_min * floor / 20.0;
    let mut r = base_report("linear_rate", traj).with_param("lambda", lam).with_param("w_min_floor", floor);
    let s = &traj.steps;
    let kl0 = kl_of(&s[0])?;
    if kl0 == 0.0 {
        r.note("initialization at equilibrium: vacuous");
    }
    for t in 0..=traj.config.horizon {
        r.observe(t as u64, s[t].w_min - floor, 1e-12);
        r.detail_min("w_min_observed", s[t].w_min);
        if t >= 1 && t < traj.config.horizon {
            let bound = 2.0 * kl0 * (-rate * t as f64).exp();
            r.observe(t as u64, bound - kl_of(&s[t + 1])?, scaled_tol(bound));
        }
    }
    Ok(r)
}

/// Local-norm stability for `t ≥ 2`:
/// `‖z_{t−1} − z_{t−2}‖_{z_t} ≤ 2‖z_t − z_{t−1}‖_{z_t}` and
/// `‖z_t − z_{t−1}‖_{z_t} ≤ 3‖z_{t+1} − z_t‖_{z_t}`, under `η ≤ 1/(21σ_max)`.
pub fn check_stability(traj: &Trajectory) -> Result<CheckReport> {
    let sigma = traj.game.matrix.sigma_max();
    let bound = if sigma > 0.0 { 1.0 / (21.0 * sigma) } else { f64::INFINITY };
    require_omwu(traj, bound, "stability")?;
    let mut r = base_report("stability", traj);
    let s = &traj.steps;
    for t in 2..traj.config.horizon {
        let w = &s[t].w;
        let norm = |a: usize, b: usize| local_norm_sq_at(w, &s[a].z.diff(&s[b].z)).map(|v| v.max(0.0).sqrt());
        let (n1, n2, n3) = (norm(t - 1, t - 2)?, norm(t, t - 1)?, norm(t + 1, t)?);
        r.observe(t as u64, 2.0 * n2 - n1, 1e-10);
        r.observe(t as u64, 3.0 * n3 - n2, 1e-10);
        if n2 > 0.0 {
            r.detail_max("ratio_i_max", n1 / n2);
        }
        if n3 > 0.0 {
            r.detail_max("ratio_ii_max", n2 / n3);
        }
    }
    Ok(r)
}

/// MWU versus OMWU energy: MWU energy never decreases (`ΔF ≥ −1e−12`) while
/// OMWU energy strictly decreases at every `t ≥ 1`.
pub fn check_mwu_contrast(game: &Game, eta: f64, init: &JointStrategy, horizon: usize) -> Result<CheckReport> {
    let cfg = SimConfig::new(init.clone(), eta, horizon).enforce(false);
    let omwu = run(game, &cfg)?;
    let mwu = run(game, &cfg.clone().algorithm(Algorithm::Mwu))?;
    let mut r = CheckReport::new("mwu_contrast", instance_label(game))
        .with_param("eta", eta)
        .with_param("horizon", horizon as f64);
    let (mut mwu_dec, mut omwu_dec) = (0u64, 0u64);
    for t in 1..horizon {
        let dm = mwu.steps[t + 1].energy - mwu.steps[t].energy;
        let dom = omwu.steps[t + 1].energy - omwu.steps[t].energy;
        if dm < -1e-12 {
            mwu_dec += 1;
        }
        if dom < 0.0 {
            omwu_dec += 1;
        }
        r.observe(t as u64, dm, 1e-12);
        // strict decrease: the margin must be positive, not merely within tolerance
        r.observe(t as u64, -dom, -f64::MIN_POSITIVE);
    }
    r.detail("mwu_decrease_steps", mwu_dec as f64);
    r.detail("omwu_decrease_steps", omwu_dec as f64);
    r.detail("steps_after_first", horizon.saturating_sub(1) as f64);
    Ok(r)
}

/// `DG²/(2a_max)² ≤ TV² ≤ KL ≤ χ²` at `w`, slack `1e−12`.
pub fn check_distance_chain(game: &Game, w: &JointStrategy) -> Result<CheckReport> {
    check_distance_chain_batch(game, std::iter::once(w.clone()))
}

pub fn check_distance_chain_batch(game: &Game, points: impl IntoIterator<Item = JointStrategy>) -> Result<CheckReport> {
    let ne = require_ne(game)?;
    let a_max = game.matrix.a_max();
    let mut r = CheckReport::new("distance_chain", instance_label(game));
    for (i, w) in points.into_iter().enumerate() {
        let dg = duality_gap(&game.matrix, &w)?;
        let tv = tv_to_nash(ne, &w)?;
        let kl = kl_to_nash(ne, &w)?;
        let chi2 = chi2_to_nash(ne, &w)?;
        let lead = if a_max > 0.0 { (dg / (2.0 * a_max)).powi(2) } else { 0.0 };
        let step = i as u64;
        r.observe(step, tv * tv - lead, 1e-12);
        r.observe(step, kl - tv * tv, 1e-12);
        r.observe(step, chi2 - kl, 1e-12);
    }
    Ok(r)
}

fn run_instance(family: InstanceFamily, eta: Option<f64>, horizon: usize) -> Result<(Game, Trajectory)> {
    let inst = make_instance::<f64>(&family)?;
    let game = inst.game();
    let eta = eta.unwrap_or_else(|| max_stepsize(&game.matrix));
    let traj = run(&game, &SimConfig::new(inst.init.clone(), eta, horizon))?;
    Ok((game, traj))
}

/// KL lower-bound construction with `δ = 1/T`: `KL_t ≥ KL₀·exp(−40η²e^{−1/δ}t)`
/// for `t ∈ [T]`, `KL₀ ≤ 6`, and every iterate in
/// `C_δ = {log p(2) ≤ −1/δ, log q(2) ≤ −1/δ}`.
pub fn check_kl_lower_rate(horizon: usize) -> Result<CheckReport> {
    let (game, traj) = run_instance(InstanceFamily::KlLower { horizon }, None, horizon)?;
    let delta = 1.0 / horizon as f64;
    let eta = traj.config.eta;
    let mut r = CheckReport::new("kl_lower_rate", instance_label(&game))
        .with_param("T", horizon as f64)
        .with_param("eta", eta);
    let kl0 = kl_of(traj.first())?;
    r.detail("kl0", kl0);
    r.observe(0, 6.0 - kl0, 0.0);
    let decay = 40.0 * eta * eta * (-1.0 / delta).exp();
    for s in &traj.steps {
        let t = s.t as u64;
        r.observe(t, -1.0 / delta - s.w.log_p()[1], 1e-12);
        r.observe(t, -1.0 / delta - s.w.log_q()[1], 1e-12);
        r.detail_max("max_log_small_coordinate", s.w.log_p()[1].max(s.w.log_q()[1]));
        if s.t >= 1 {
            let bound = kl0 * (-decay * s.t as f64).exp();
            let kl = kl_of(s)?;
            r.observe(t, kl - bound, scaled_tol(bound));
            r.detail_min("kl_min", kl);
        }
    }
    Ok(r)
}

/// Which uniform lower-bound construction to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundVariant {
    /// `δ = 1/(6e^T)`, uniform start: `min TV ≥ 1/3`, `min KL ≥ 1/9`.
    Main,
    /// `δ = 1/T` from the KL lower-bound start: `min KL ≥ 1/6` with
    /// `max TV ≤ 2/T` and `max DG ≤ 2√2/T`.
    KlOnly,
    /// `δ = e^{−T}`: `min DG ≥ 1/6`.
    DgBoundary,
}

impl std::str::FromStr for LowerBoundVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Self::Main),
            "kl_only" => Ok(Self::KlOnly),
            "dg_boundary" => Ok(Self::DgBoundary),
            other => Err(Error::Config(format!("unknown lower-bound variant {other:?}"))),
        }
    }
}

pub fn check_uniform_lower_bounds(horizon: usize, variant: LowerBoundVariant) -> Result<CheckReport> {
    let family = match variant {
        LowerBoundVariant::Main => InstanceFamily::UniformLb { horizon },
        LowerBoundVariant::KlOnly => InstanceFamily::KlLower { horizon },
        LowerBoundVariant::DgBoundary => InstanceFamily::DgLb { horizon },
    };
    let (game, traj) = run_instance(family, None, horizon)?;
    let id = match variant {
        LowerBoundVariant::Main => "uniform_lower_bounds.main",
        LowerBoundVariant::KlOnly => "uniform_lower_bounds.kl_only",
        LowerBoundVariant::DgBoundary => "uniform_lower_bounds.dg_boundary",
    };
    let mut r = CheckReport::new(id, instance_label(&game))
        .with_param("T", horizon as f64)
        .with_param("eta", traj.config.eta);
    let t_f = horizon as f64;
    let rel = 1.0 + 1e-9;
    for s in traj.steps.iter().filter(|s| s.t >= 1) {
        let t = s.t as u64;
        let (kl, tv) = (kl_of(s)?, s.tv.unwrap_or(f64::NAN));
        r.detail_min("min_kl", kl);
        r.detail_min("min_tv", tv);
        r.detail_min("min_dg", s.dg);
        r.detail_max("max_tv", tv);
        r.detail_max("max_dg", s.dg);
        match variant {
            LowerBoundVariant::Main => {
                r.observe(t, tv - 1.0 / 3.0, 0.0);
                r.observe(t, kl - 1.0 / 9.0, 0.0);
            }
            LowerBoundVariant::KlOnly => {
                r.observe(t, kl - 1.0 / 6.0, 0.0);
                r.observe(t, 2.0 / t_f * rel - tv, 0.0);
                r.observe(t, 2.0 * 2f64.sqrt() / t_f * rel - s.dg, 0.0);
            }
            LowerBoundVariant::DgBoundary => r.observe(t, s.dg - 1.0 / 6.0, 0.0),
        }
    }
    Ok(r)
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Best-iterate duality gap rate on `A_{δ,δ}` from the uniform start with
/// `η = max_stepsize`: for each `δ`, `b(T) = min_{1≤t≤T} DG(w_t)` over the
/// grid, the fitted slope of `log b` against `log T` must be at most
/// [`DG_SLOPE_MAX`] and `max_T b(T)/√(log T/T)` at most [`DG_ENVELOPE_MAX`].
///
/// When the uniform start is the equilibrium (`δ = 1/2`), `b ≡ 0`; the slope is
/// undefined and the instance passes as degenerate with envelope 0.
pub fn check_best_iterate_dg_rate(deltas: &[f64], t_grid: &[usize]) -> Result<CheckReport> {
    if t_grid.len() < 2 || t_grid.iter().any(|&t| t < 2) {
        return Err(Error::Config("the horizon grid needs at least two horizons, each at least 2".into()));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_unstable();
    let mut r = CheckReport::new("best_iterate_dg_rate", "boundary_sym");
    r.param("T_max", *grid.last().unwrap_or(&0) as f64);
    let mut envelope = 0.0f64;
    for (k, &delta) in deltas.iter().enumerate() {
        let inst = make_instance::<f64>(&InstanceFamily::BoundarySym { delta })?;
        let game = inst.game();
        let eta = max_stepsize(&game.matrix);
        let cfg = SimConfig::new(inst.init.clone(), eta, 0);
        let series = crate::dynamics::best_dg_prefix(&game, &cfg, &grid)?;
        let key = |name: &str| format!("delta={delta}.{name}");
        let c = series
            .iter()
            .map(|&(t, b)| b / ((t as f64).ln() / t as f64).sqrt())
            .fold(0.0f64, f64::max);
        envelope = envelope.max(c);
        r.detail(&key("envelope_constant"), c);
        for &(t, b) in &series {
            r.detail(&key(&format!("b_{t}")), b);
        }
        if series.iter().all(|&(_, b)| b == 0.0) {
            r.note(format!("delta={delta}: uniform start is the equilibrium, degenerate pass"));
            r.observe(k as u64, 0.0, 0.0);
            continue;
        }
        if series.iter().any(|&(_, b)| b <= 0.0) {
            // reached the equilibrium exactly within the grid: the rate holds trivially
            r.note(format!("delta={delta}: duality gap reaches zero inside the grid"));
            r.observe(k as u64, 0.0, 0.0);
            continue;
        }
        let lx: Vec<f64> = series.iter().map(|&(t, _)| (t as f64).ln()).collect();
        let ly: Vec<f64> = series.iter().map(|&(_, b)| b.ln()).collect();
        let le: Vec<f64> = series.iter().map(|&(t, _)| (((t as f64).ln() / t as f64).sqrt()).ln()).collect();
        let slope = ols_slope(&lx, &ly);
        r.detail(&key("slope_log_t"), slope);
        r.detail(&key("slope_vs_envelope"), ols_slope(&le, &ly));
        r.detail(&key("eta"), eta);
        r.observe(k as u64, DG_SLOPE_MAX - slope, 0.0);
    }
    r.detail("envelope_constant_max", envelope);
    r.observe(deltas.len() as u64, DG_ENVELOPE_MAX - envelope, 0.0);
    Ok(r)
}

/// One δ of a last-iterate KL sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub delta: f64,
    /// OLS slope of `log KL_t` against `t` over the second half of the run.
    /// `None` when the start is the equilibrium up to [`SWEEP_DEGENERATE_KL`].
    pub slope: Option<f64>,
    pub final_kl: f64,
    pub t: Vec<usize>,
    pub log_kl: Vec<f64>,
}

/// Starting KL at or below which a sweep row counts as started at the
/// equilibrium (rounding of the equilibrium itself is around 1e−15).
pub const SWEEP_DEGENERATE_KL: f64 = 1e-12;

/// Families a KL sweep accepts.
pub const SWEEP_FAMILIES: [&str; 2] = ["canonical2x2", "diagonal10"];

/// Runs one OMWU trajectory per `δ` from the uniform start (symmetric
/// `A_{δ,δ}` for `canonical2x2`) and fits the late-time log-KL slope.
/// The stepsize assumption is not enforced.
pub fn kl_sweep(family: &str, deltas: &[f64], eta: f64, horizon: usize, stride: usize) -> Result<Vec<SweepRow>> {
    if deltas.is_empty() {
        return Err(Error::Config("the delta list is empty".into()));
    }
    deltas
        .iter()
        .map(|&delta| {
            let fam = match family {
                "canonical2x2" => InstanceFamily::BoundarySym { delta },
                "diagonal10" => InstanceFamily::Diagonal10 { delta },
                other => return Err(Error::Config(format!("sweeps support canonical2x2 and diagonal10, not {other:?}"))),
            };
            let inst = make_instance::<f64>(&fam)?;
            let game = inst.game();
            let init = JointStrategy::uniform(game.matrix.m(), game.matrix.n());
            let cfg = SimConfig::new(init, eta, horizon).stride(stride.max(1)).enforce(false);
            let traj = run(&game, &cfg)?;
            let mut t = Vec::with_capacity(traj.steps.len());
            let mut log_kl = Vec::with_capacity(traj.steps.len());
            for s in &traj.steps {
                t.push(s.t);
                log_kl.push(kl_of(s)?.ln());
            }
            let late: (Vec<f64>, Vec<f64>) = t
                .iter()
                .zip(&log_kl)
                .filter(|(&ti, l)| 2 * ti >= horizon && l.is_finite())
                .map(|(&ti, &l)| (ti as f64, l))
                .unzip();
            let slope = (late.0.len() >= 2 && kl_of(traj.first())? > SWEEP_DEGENERATE_KL).then(|| ols_slope(&late.0, &late.1));
            Ok(SweepRow { delta, slope, final_kl: kl_of(traj.last())?, t, log_kl })
        })
        .collect()
}

/// Whether decay gets steeper (or stays equal) as `δ` grows. Rows without a
/// slope are ignored.
pub fn sweep_ordering_holds(rows: &[SweepRow]) -> bool {
    let mut pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.slope.map(|s| (r.delta, s.abs()))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(2).all(|w| w[1].1 >= w[0].1)
}

/// Accumulates the conditional drift inequalities and the epoch window counts
/// along a canonical 2×2 trajectory fed one state at a time.
struct DriftAccumulator {
    dp: f64,
    dq: f64,
    eta: f64,
    /// `(p(2), q(2), x(1), y(1))` for the last three steps
    hist: Vec<(f64, f64, f64, f64)>,
    t: usize,
    report: CheckReport,
    hits: [u64; 4],
    epoch: bool,
    prefix_a: Vec<u32>,
    prefix_b: Vec<u32>,
}

impl DriftAccumulator {
    fn new(dp: f64, dq: f64, eta: f64, epoch: bool, label: String) -> Self {
        let report = CheckReport::new("drift_invariants", label)
            .with_param("delta_p", dp)
            .with_param("delta_q", dq)
            .with_param("eta", eta);
        Self {
            dp,
            dq,
            eta,
            hist: Vec::with_capacity(3),
            t: 0,
            report,
            hits: [0; 4],
            epoch,
            prefix_a: vec![0],
            prefix_b: vec![0],
        }
    }

    fn feed(&mut self, p2: f64, q2: f64, x1: f64, y1: f64) {
        if self.hist.len() == 3 {
            self.hist.remove(0);
        }
        self.hist.push((p2, q2, x1, y1));
        if self.epoch {
            let a = p2 <= self.dp && q2 >= self.dq && q2 <= 3.0 * self.dq;
            let b = p2 >= self.dp / 3.0 && q2 >= self.dq / 3.0;
            let la = *self.prefix_a.last().unwrap_or(&0);
            let lb = *self.prefix_b.last().unwrap_or(&0);
            self.prefix_a.push(la + a as u32);
            self.prefix_b.push(lb + b as u32);
        }
        if self.hist.len() == 3 {
            // steps k−1, k, k+1 with k = t − 1 ≥ 1
            let k = self.t - 1;
            let (p_prev, q_prev, _, _) = self.hist[0];
            let (_, _, xk, yk) = self.hist[1];
            let (_, _, xn, yn) = self.hist[2];
            let (dx, dy) = (xn - xk, yn - yk);
            let unit = self.eta * self.dp * self.dq;
            let tol = 1e-12;
            let step = k as u64;
            if q_prev >= 3.0 * self.dq {
                self.hits[0] += 1;
                self.report.observe(step, dx - unit / 2.0, tol);
            }
            if q_prev <= self.dq / 3.0 {
                self.hits[1] += 1;
                self.report.observe(step, -unit / 3.0 - dx, tol);
            }
            if p_prev >= 3.0 * self.dp {
                self.hits[2] += 1;
                self.report.observe(step, -unit / 2.0 - dy, tol);
            }
            if p_prev <= self.dp / 3.0 {
                self.hits[3] += 1;
                self.report.observe(step, dy - unit / 3.0, tol);
            }
        }
        self.t += 1;
    }

    fn finish(mut self) -> CheckReport {
        for (i, part) in ["i", "ii", "iii", "iv"].iter().enumerate() {
            self.report.detail(&format!("hypothesis_hits_{part}"), self.hits[i] as f64);
            if self.hits[i] == 0 {
                self.report.note(format!("drift part ({part}) never triggered: vacuous"));
            }
        }
        if !self.epoch {
            self.report.note("epoch invariants skipped: they need delta_q <= 1/10");
            return self.report;
        }
        let tau = (40.0 / (self.eta * self.dp * self.dq)).floor() as usize;
        let need_b = (1.0 / self.eta).ceil();
        let n = self.prefix_a.len() - 1;
        self.report.detail("epoch_tau", tau as f64);
        if n < tau + 1 {
            self.report.note("trajectory shorter than one epoch window: epoch invariants vacuous");
            return self.report;
        }
        let (mut min_a, mut arg_a) = (u32::MAX, 0usize);
        let (mut min_b, mut arg_b) = (u32::MAX, 0usize);
        for start in 0..=(n - tau - 1) {
            let end = start + tau + 1;
            let ca = self.prefix_a[end] - self.prefix_a[start];
            let cb = self.prefix_b[end] - self.prefix_b[start];
            if ca < min_a {
                (min_a, arg_a) = (ca, start);
            }
            if cb < min_b {
                (min_b, arg_b) = (cb, start);
            }
        }
        self.report.detail("epoch_windows", (n - tau) as f64);
        self.report.detail("epoch_a_min_count", min_a as f64);
        self.report.detail("epoch_b_min_count", min_b as f64);
        self.report.detail("epoch_b_required", need_b);
        self.report.observe(arg_a as u64, min_a as f64 - 1.0, 0.0);
        self.report.observe(arg_b as u64, min_b as f64 - need_b, 0.0);
        self.report
    }
}

fn drift_preconditions(game: &Game, eta: f64) -> Result<(f64, f64)> {
    let (dp, dq) = game
        .matrix
        .canonical_params()
        .ok_or_else(|| Error::Precondition("drift invariants need a canonical 2x2 game".into()))?;
    if !(dp > 0.0 && dp <= dq && dq < 0.5) {
        return precondition(format!("drift invariants need 0 < delta_p <= delta_q < 1/2, got ({dp}, {dq})"));
    }
    if !(eta < 0.125) {
        return precondition(format!("drift invariants need eta < 1/8, got {eta}"));
    }
    Ok((dp, dq))
}

/// Conditional drift inequalities and, when `δq ≤ 1/10`, the epoch window
/// counts, over a recorded trajectory.
pub fn check_drift_invariants(traj: &Trajectory) -> Result<CheckReport> {
    require_dense(traj)?;
    if traj.config.algorithm != Algorithm::Omwu {
        return precondition("drift invariants apply to OMWU");
    }
    let (dp, dq) = drift_preconditions(&traj.game, traj.config.eta)?;
    let mut acc = DriftAccumulator::new(dp, dq, traj.config.eta, dq <= 0.1, instance_label(&traj.game));
    for s in &traj.steps {
        acc.feed(s.w.p()[1], s.w.q()[1], s.z.x[0], s.z.y[0]);
    }
    Ok(acc.finish())
}

/// As [`check_drift_invariants`], simulating on the fly so that horizons of
/// several epoch lengths do not need a stored trajectory.
pub fn check_drift_streaming(game: &Game, init: &JointStrategy, eta: f64, horizon: usize) -> Result<CheckReport> {
    let (dp, dq) = drift_preconditions(game, eta)?;
    let cfg = SimConfig::new(init.clone(), eta, horizon).enforce(false);
    let mut sim = Simulator::new(game, &cfg)?;
    let mut acc = DriftAccumulator::new(dp, dq, eta, dq <= 0.1, instance_label(game));
    acc.report.param("horizon", horizon as f64);
    let canonical_bound = max_stepsize(&game.matrix) / 4.0;
    if eta > canonical_bound {
        acc.report.note(format!(
            "eta = {eta} exceeds the canonical-game stepsize bound {canonical_bound:.3e}; epoch counts are empirical"
        ));
    }
    loop {
        let (w, z) = sim.state();
        acc.feed(w.p()[1], w.q()[1], z.x[0], z.y[0]);
        if sim.t() >= horizon {
            break;
        }
        sim.advance();
    }
    Ok(acc.finish())
}

/// Epoch length `τ = 40/(η·δp·δq)`.
pub fn epoch_length(delta_p: f64, delta_q: f64, eta: f64) -> f64 {
    40.0 / (eta * delta_p * delta_q)
}

/// Random strictly positive strategy with log-weights drawn uniformly from
/// `[−spread, spread]`.
pub fn random_strategy<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, spread: f64) -> JointStrategy {
    let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-spread..=spread)).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-spread..=spread)).collect();
    JointStrategy::from_log_weights(&x, &y)
}

/// Random dual state in `ℝ^{m+n}` with coordinates in `[−spread, spread]`.
pub fn random_dual<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, spread: f64) -> DualState {
    let x = (0..m).map(|_| rng.gen_range(-spread..=spread)).collect();
    let y = (0..n).map(|_| rng.gen_range(-spread..=spread)).collect();
    DualState::new(x, y)
}

/// Local Hessian stability over random pairs `z`, `z + Δ` with
/// `‖Δ‖_∞ ≤ radius`.
pub fn check_lhs_random<R: Rng + ?Sized>(rng: &mut R, pairs: usize, m: usize, n: usize, radius: f64) -> CheckReport {
    let mut r = CheckReport::new("lhs_random", format!("{m}x{n}")).with_param("radius", radius);
    for i in 0..pairs {
        let z = random_dual(rng, m, n, 3.0);
        let d = random_dual(rng, m, n, radius);
        let z2 = DualState::new(linalg::add(&z.x, &d.x), linalg::add(&z.y, &d.y));
        let one = crate::energy::lhs_check(&z, &z2);
        r.steps_checked += one.steps_checked;
        r.violations += one.violations;
        if one.worst_margin < r.worst_margin {
            r.worst_margin = one.worst_margin;
            r.worst_step = Some(i as u64);
        }
        if let (Some(f), Some(b)) = (one.details.get("tightest_factor"), one.details.get("allowed_factor")) {
            r.detail_max("factor_over_allowed_max", f / b);
        }
    }
    r.pass = r.violations == 0;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::make_instance;

    fn canonical(dp: f64, dq: f64) -> Game {
        make_instance::<f64>(&InstanceFamily::Canonical2x2 { delta_p: dp, delta_q: dq }).unwrap().game()
    }

    #[test]
    fn refuses_mwu_and_large_steps() {
        let g = canonical(0.3, 0.3);
        let w0 = JointStrategy::from_probs(vec![0.5, 0.5], vec![0.2, 0.8]).unwrap();
        let cfg = SimConfig::new(w0, 0.1, 10).enforce(false);
        let big = run(&g, &cfg).unwrap();
        assert!(matches!(check_dissipation_sandwich(&big), Err(Error::Precondition(_))));
        let eta = max_stepsize(&g.matrix);
        let mwu = run(&g, &cfg.clone().algorithm(Algorithm::Mwu)).unwrap();
        assert!(check_dissipation_sandwich(&mwu).is_err());
        let ok = run(&g, &SimConfig::new(cfg.init.clone(), eta, 50)).unwrap();
        assert!(check_dissipation_sandwich(&ok).unwrap().pass);
    }

    #[test]
    fn nash_start_is_a_quiet_pass() {
        let g = canonical(0.3, 0.3);
        let ne = g.nash.as_ref().unwrap().joint().unwrap().clone();
        let traj = run(&g, &SimConfig::new(ne, max_stepsize(&g.matrix), 20)).unwrap();
        for r in [
            check_dissipation_sandwich(&traj).unwrap(),
            check_one_step_contraction(&traj).unwrap(),
            check_linear_rate(&traj).unwrap(),
            check_stability(&traj).unwrap(),
        ] {
            assert!(r.pass, "{}", r.summary_line());
        }
    }

    #[test]
    fn slope_of_a_line() {
        let x = [1.0, 2.0, 3.0];
        let y = [2.0, 0.0, -2.0];
        assert!((ols_slope(&x, &y) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn chain_at_equilibrium_and_boundary() {
        let g = canonical(0.2, 0.4);
        let ne = g.nash.as_ref().unwrap().joint().unwrap().clone();
        assert!(check_distance_chain(&g, &ne).unwrap().pass);
        let w = JointStrategy::from_log_probs(vec![(-1e-9f64).ln_1p(), (1e-9f64).ln()], vec![0.5f64.ln(); 2]).unwrap();
        assert!(check_distance_chain(&g, &w).unwrap().pass);
    }

    #[test]
    fn domination_needs_an_equilibrium() {
        let a = crate::games::PayoffMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        let g = Game::from_2x2(a).unwrap();
        assert!(check_skew_grad_domination(&g, &DualState::zeros(2, 2)).is_err());
    }
}
