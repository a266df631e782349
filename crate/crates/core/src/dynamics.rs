//! MWU and OMWU in primal and dual form, and the trajectory simulator.
//!
//! The production path is the dual recursion
//! `z_{t+1} = z_t − η(2·Jw_t − Jw_{t−1})` with `w_{−1} = w₀`, so the first
//! step is the plain skew-gradient step `z₁ = z₀ − ηJw₀`. Strategies are the
//! blockwise softmax of the dual point and are carried in log form.
//!
//! On canonical 2×2 games the simulator can instead run the scalar recursion
//! on the log-odds `ℓ_p = log(p(1)/p(2))`, `ℓ_q = log(q(1)/q(2))`:
//! `ℓ_p ← ℓ_p − η(2g_t − g_{t−1})` and `ℓ_q ← ℓ_q + η(2h_t − h_{t−1})` with
//! `g = δq − q(2)` and `h = δp − p(2)`. This is the leading-coordinate update
//! divided by `δ`, and keeps full relative precision on the exponentially
//! small coordinates of the lower-bound instances.

use serde::{Deserialize, Serialize};

use crate::energy::{self, dual_from_primal, entropy_gradient, DualState, JointStrategy};
use crate::error::{domain, Error, Result};
use crate::games::{dg_canonical_2x2, duality_gap, Game, PayoffMatrix};
use crate::metrics::{kl_to_nash, tv_canonical_2x2, tv_to_nash};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Mwu,
    Omwu,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mwu" => Ok(Self::Mwu),
            "omwu" => Ok(Self::Omwu),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Simulation parameters.
#[derive(Debug, Clone)]
pub struct SimConfig<T: Scalar = f64> {
    pub eta: T,
    pub horizon: usize,
    pub record_stride: usize,
    pub algorithm: Algorithm,
    pub init: JointStrategy<T>,
    pub enforce_stepsize_assumption: bool,
    /// Use the scalar log-odds recursion on canonical 2×2 games.
    pub fast_path: bool,
}

impl<T: Scalar> SimConfig<T> {
    /// OMWU with stride 1, the stepsize assumption enforced and the fast path on.
    pub fn new(init: JointStrategy<T>, eta: T, horizon: usize) -> Self {
        Self {
            eta,
            horizon,
            record_stride: 1,
            algorithm: Algorithm::Omwu,
            init,
            enforce_stepsize_assumption: true,
            fast_path: true,
        }
    }

    pub fn algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn enforce(mut self, on: bool) -> Self {
        self.enforce_stepsize_assumption = on;
        self
    }

    pub fn fast_path(mut self, on: bool) -> Self {
        self.fast_path = on;
        self
    }

    pub fn validate(&self, matrix: &PayoffMatrix<T>) -> Result<()> {
        if !(self.eta > T::zero()) || !self.eta.is_finite() {
            return Err(Error::Config(format!("stepsize must be positive, got {}", self.eta)));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record stride must be at least 1".into()));
        }
        if self.init.m() != matrix.m() || self.init.n() != matrix.n() {
            return Err(Error::Config("initialization does not match the game dimensions".into()));
        }
        if self.enforce_stepsize_assumption {
            let bound = max_stepsize(matrix);
            if self.eta > bound * (T::one() + T::epsilon() * T::lit(4.0)) {
                return Err(Error::Stepsize { eta: self.eta.to_f64_lossy(), bound: bound.to_f64_lossy() });
            }
        }
        Ok(())
    }
}

/// Per-step record. Equilibrium-dependent distances are `None` when the game
/// has no unique interior equilibrium.
#[derive(Debug, Clone)]
pub struct StepRecord<T: Scalar = f64> {
    pub t: usize,
    pub w: JointStrategy<T>,
    pub z: DualState<T>,
    pub energy: T,
    pub kl: Option<T>,
    pub tv: Option<T>,
    pub dg: T,
    pub dissipation: T,
    pub w_min: T,
    pub p_min: T,
    pub q_min: T,
}

/// A recorded simulation.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar = f64> {
    pub steps: Vec<StepRecord<T>>,
    pub game: Game<T>,
    pub config: SimConfig<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn first(&self) -> &StepRecord<T> {
        &self.steps[0]
    }

    pub fn last(&self) -> &StepRecord<T> {
        self.steps.last().expect("trajectories hold at least the initial record")
    }

    /// Earliest index attaining the smallest duality gap.
    pub fn best_dg(&self) -> (usize, T) {
        let mut best = (self.steps[0].t, self.steps[0].dg);
        for s in &self.steps[1..] {
            if s.dg < best.1 {
                best = (s.t, s.dg);
            }
        }
        best
    }

    /// Whether records are present for every `t` in `0..=T`.
    pub fn is_dense(&self) -> bool {
        self.steps.len() == self.config.horizon + 1 && self.steps.iter().enumerate().all(|(i, s)| s.t == i)
    }
}

/// `1/(4(54σ_max + 9))`, the largest stepsize under which the energy
/// dissipation bounds are guaranteed.
pub fn max_stepsize<T: Scalar>(matrix: &PayoffMatrix<T>) -> T {
    stepsize_bound(matrix.sigma_max())
}

pub fn stepsize_bound<T: Scalar>(sigma_max: T) -> T {
    T::one() / (T::lit(4.0) * (T::lit(54.0) * sigma_max + T::lit(9.0)))
}

/// `min(0.2, max_stepsize)`
pub fn default_stepsize<T: Scalar>(matrix: &PayoffMatrix<T>) -> T {
    T::lit(0.2).min(max_stepsize(matrix))
}

fn payoffs<T: Scalar>(a: &PayoffMatrix<T>, w: &JointStrategy<T>) -> (Vec<T>, Vec<T>) {
    (a.apply(w.q()), a.apply_transpose(w.p()))
}

/// Optimistic primal step: `p ∝ p_t·exp(−η(2Aq_t − Aq_{t−1}))`,
/// `q ∝ q_t·exp(η(2Aᵀp_t − Aᵀp_{t−1}))`. Pass `w_prev = w_t` for the first step.
pub fn omwu_step_primal<T: Scalar>(
    a: &PayoffMatrix<T>,
    w_t: &JointStrategy<T>,
    w_prev: &JointStrategy<T>,
    eta: T,
) -> JointStrategy<T> {
    let (aq, atp) = payoffs(a, w_t);
    let (aq0, atp0) = payoffs(a, w_prev);
    let two = T::lit(2.0);
    let x: Vec<T> = (0..aq.len()).map(|i| w_t.log_p()[i] - eta * (two * aq[i] - aq0[i])).collect();
    let y: Vec<T> = (0..atp.len()).map(|j| w_t.log_q()[j] + eta * (two * atp[j] - atp0[j])).collect();
    JointStrategy::from_log_weights(&x, &y)
}

/// Plain multiplicative weights: `p ∝ p·exp(−ηAq)`, `q ∝ q·exp(ηAᵀp)`.
pub fn mwu_step_primal<T: Scalar>(a: &PayoffMatrix<T>, w: &JointStrategy<T>, eta: T) -> JointStrategy<T> {
    let (aq, atp) = payoffs(a, w);
    let x: Vec<T> = w.log_p().iter().zip(&aq).map(|(&l, &g)| l - eta * g).collect();
    let y: Vec<T> = w.log_q().iter().zip(&atp).map(|(&l, &g)| l + eta * g).collect();
    JointStrategy::from_log_weights(&x, &y)
}

fn shifted<T: Scalar>(z: &DualState<T>, dx: &[T], dy: &[T], eta: T) -> DualState<T> {
    let x = z.x.iter().zip(dx).map(|(&a, &d)| a - eta * d).collect();
    let y = z.y.iter().zip(dy).map(|(&a, &d)| a - eta * d).collect();
    DualState { x, y, in_effective_space: z.in_effective_space }
}

fn skew_grad<T: Scalar>(a: &PayoffMatrix<T>, z: &DualState<T>) -> (Vec<T>, Vec<T>) {
    let w = energy::grad_energy(z);
    a.apply_skew(w.p(), w.q())
}

/// `z_{t+1} = z_t − ηJ∇F(z_t) − ηJ(∇F(z_t) − ∇F(z_{t−1}))`. Passing
/// `z_prev = z_t` gives the plain first step.
pub fn omwu_step_dual<T: Scalar>(a: &PayoffMatrix<T>, z_t: &DualState<T>, z_prev: &DualState<T>, eta: T) -> DualState<T> {
    let (gx, gy) = skew_grad(a, z_t);
    let (hx, hy) = skew_grad(a, z_prev);
    let two = T::lit(2.0);
    let dx: Vec<T> = gx.iter().zip(&hx).map(|(&g, &h)| two * g - h).collect();
    let dy: Vec<T> = gy.iter().zip(&hy).map(|(&g, &h)| two * g - h).collect();
    shifted(z_t, &dx, &dy, eta)
}

/// `z_{t+1} = z_t − ηJ∇F(z_t)`
pub fn mwu_step_dual<T: Scalar>(a: &PayoffMatrix<T>, z: &DualState<T>, eta: T) -> DualState<T> {
    let (gx, gy) = skew_grad(a, z);
    shifted(z, &gx, &gy, eta)
}

fn softplus<T: Scalar>(u: T) -> T {
    u.max(T::zero()) + (-u.abs()).exp().ln_1p()
}

/// Two-point distribution `(σ(ℓ), σ(−ℓ))` in log form.
fn log_odds_strategy<T: Scalar>(l: T) -> Vec<T> {
    vec![-softplus(-l), -softplus(l)]
}

#[derive(Debug, Clone)]
struct FastState<T: Scalar> {
    dp: T,
    dq: T,
    lp: T,
    lq: T,
    g_prev: T,
    h_prev: T,
}

impl<T: Scalar> FastState<T> {
    fn strategy(&self) -> JointStrategy<T> {
        let wp = log_odds_strategy(self.lp);
        let wq = log_odds_strategy(self.lq);
        JointStrategy::from_log_weights(&wp, &wq)
    }

    fn dual(&self) -> DualState<T> {
        let x1 = self.dp * self.lp;
        let y1 = self.dq * self.lq;
        DualState::new(vec![x1, x1 - self.lp], vec![y1, y1 - self.lq]).effective(true)
    }
}

/// Streaming simulator: yields the record at `t = 0` and then one record per
/// step up to the horizon.
pub struct Simulator<'g, T: Scalar> {
    game: &'g Game<T>,
    eta: T,
    algorithm: Algorithm,
    horizon: usize,
    t: usize,
    z: DualState<T>,
    w: JointStrategy<T>,
    /// `Jw_{t−1}` for the optimistic correction.
    prev_skew: (Vec<T>, Vec<T>),
    fast: Option<FastState<T>>,
    started: bool,
}

impl<'g, T: Scalar> Simulator<'g, T> {
    pub fn new(game: &'g Game<T>, config: &SimConfig<T>) -> Result<Self> {
        config.validate(&game.matrix)?;
        let w = config.init.clone();
        let has_ne = game.require_nash().is_ok();
        let z = if has_ne { dual_from_primal(game, &w)? } else { entropy_gradient(&w) };
        let prev_skew = game.matrix.apply_skew(w.p(), w.q());
        let fast = match (config.fast_path, game.matrix.canonical_params()) {
            (true, Some((dp, dq))) => Some(FastState {
                dp,
                dq,
                lp: w.log_p()[0] - w.log_p()[1],
                lq: w.log_q()[0] - w.log_q()[1],
                g_prev: dq - w.q()[1],
                h_prev: dp - w.p()[1],
            }),
            _ => None,
        };
        Ok(Self {
            game,
            eta: config.eta,
            algorithm: config.algorithm,
            horizon: config.horizon,
            t: 0,
            z,
            w,
            prev_skew,
            fast,
            started: false,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn state(&self) -> (&JointStrategy<T>, &DualState<T>) {
        (&self.w, &self.z)
    }

    /// Advances one step without building a record.
    pub fn advance(&mut self) {
        let eta = self.eta;
        let two = T::lit(2.0);
        if let Some(f) = self.fast.as_mut() {
            let g = f.dq - self.w.q()[1];
            let h = f.dp - self.w.p()[1];
            match self.algorithm {
                Algorithm::Omwu => {
                    f.lp -= eta * (two * g - f.g_prev);
                    f.lq += eta * (two * h - f.h_prev);
                }
                Algorithm::Mwu => {
                    f.lp -= eta * g;
                    f.lq += eta * h;
                }
            }
            f.g_prev = g;
            f.h_prev = h;
            self.w = f.strategy();
            self.z = f.dual();
        } else {
            let a = &self.game.matrix;
            let (gx, gy) = a.apply_skew(self.w.p(), self.w.q());
            self.z = match self.algorithm {
                Algorithm::Omwu => {
                    let dx: Vec<T> = gx.iter().zip(&self.prev_skew.0).map(|(&g, &h)| two * g - h).collect();
                    let dy: Vec<T> = gy.iter().zip(&self.prev_skew.1).map(|(&g, &h)| two * g - h).collect();
                    shifted(&self.z, &dx, &dy, eta)
                }
                Algorithm::Mwu => shifted(&self.z, &gx, &gy, eta),
            };
            self.prev_skew = (gx, gy);
            self.w = energy::grad_energy(&self.z);
        }
        self.t += 1;
    }

    /// The record for the current state.
    pub fn record(&self) -> StepRecord<T> {
        make_record(self.game, self.t, self.w.clone(), self.z.clone())
    }

    /// Duality gap at the current state, without the other metrics.
    pub fn current_dg(&self) -> T {
        dg_of(self.game, &self.w)
    }
}

impl<T: Scalar> Iterator for Simulator<'_, T> {
    type Item = StepRecord<T>;

    fn next(&mut self) -> Option<StepRecord<T>> {
        if !self.started {
            self.started = true;
            return Some(self.record());
        }
        if self.t >= self.horizon {
            return None;
        }
        self.advance();
        Some(self.record())
    }
}

fn dg_of<T: Scalar>(game: &Game<T>, w: &JointStrategy<T>) -> T {
    match game.matrix.canonical_params() {
        Some((dp, dq)) => dg_canonical_2x2(dp, dq, w).expect("2x2 strategy"),
        None => duality_gap(&game.matrix, w).expect("dimensions validated at start"),
    }
}

fn make_record<T: Scalar>(game: &Game<T>, t: usize, w: JointStrategy<T>, z: DualState<T>) -> StepRecord<T> {
    let a = &game.matrix;
    let canonical = a.canonical_params();
    let (kl, tv) = match game.require_nash() {
        Ok(ne) => {
            let kl = kl_to_nash(ne, &w).ok();
            let tv = match canonical {
                Some((dp, dq)) => tv_canonical_2x2(dp, dq, &w).ok(),
                None => tv_to_nash(ne, &w).ok(),
            };
            (kl, tv)
        }
        Err(_) => (None, None),
    };
    let dissipation = match canonical {
        // Var_p(Aq) = p(1)p(2)·g² and Var_q(Aᵀp) = q(1)q(2)·h² on the canonical game
        Some((dp, dq)) => {
            let g = dq - w.q()[1];
            let h = dp - w.p()[1];
            w.p()[0] * w.p()[1] * g * g + w.q()[0] * w.q()[1] * h * h
        }
        None => energy::dissipation_at(a, &w).expect("dimensions validated at start"),
    };
    let (p_min, q_min) = (w.p_min(), w.q_min());
    StepRecord {
        t,
        energy: energy::energy(&z),
        kl,
        tv,
        dg: dg_of(game, &w),
        dissipation,
        w_min: p_min.min(q_min),
        p_min,
        q_min,
        w,
        z,
    }
}

/// Runs a full simulation, keeping records at `t ∈ {0, 1, T}` and at every
/// multiple of the stride.
pub fn run<T: Scalar>(game: &Game<T>, config: &SimConfig<T>) -> Result<Trajectory<T>> {
    let horizon = config.horizon;
    let stride = config.record_stride;
    let sim = Simulator::new(game, config)?;
    let steps = sim.filter(|r| r.t <= 1 || r.t == horizon || r.t % stride == 0).collect();
    Ok(Trajectory { steps, game: game.clone(), config: config.clone() })
}

/// `min_{t ≤ T} DG(w_t)` for every `T` in `grid` (sorted ascending), from one
/// streaming run to the largest horizon. `t = 0` is excluded.
pub fn best_dg_prefix<T: Scalar>(game: &Game<T>, config: &SimConfig<T>, grid: &[usize]) -> Result<Vec<(usize, T)>> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return domain("horizon grid must be sorted");
    }
    let mut cfg = config.clone();
    cfg.horizon = grid.last().copied().unwrap_or(0);
    let mut sim = Simulator::new(game, &cfg)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut best = T::infinity();
    let mut next = 0;
    while next < grid.len() && grid[next] == 0 {
        out.push((0, sim.current_dg()));
        next += 1;
    }
    while sim.t() < cfg.horizon {
        sim.advance();
        best = best.min(sim.current_dg());
        while next < grid.len() && grid[next] == sim.t() {
            out.push((sim.t(), best));
            next += 1;
        }
    }
    Ok(out)
}
