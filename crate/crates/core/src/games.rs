//! Payoff matrices, Nash equilibria, spectral summaries and the instance
//! families used throughout the crate.
//!
//! Conventions: the row player `p ∈ Δ_m` minimizes `⟨p, A q⟩`, the column
//! player `q ∈ Δ_n` maximizes it. The skew operator is
//! `J = [[0, A], [−Aᵀ, 0]]`, so `J (u, v) = (A v, −Aᵀ u)`. It is applied
//! implicitly and only materialized on request.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::energy::JointStrategy;
use crate::error::{domain, Error, Result};
use crate::linalg::{self, Mat};
use crate::scalar::Scalar;

/// Coordinates smaller than this are refused by the instance generators so
/// that every strategy stays a normal floating point number.
pub const REPRESENTABLE_FLOOR: f64 = 1e-300;

/// Horizon caps for the exponentially scaled families.
pub const KL_LOWER_MAX_HORIZON: usize = 230;
pub const UNIFORM_LB_MAX_HORIZON: usize = 600;
pub const DG_LB_MAX_HORIZON: usize = 340;

/// An `m × n` real payoff matrix with cached spectral summaries.
#[derive(Debug, Clone)]
pub struct PayoffMatrix<T: Scalar = f64> {
    entries: Mat<T>,
    a_max: T,
    /// `(δ_p, δ_q)` when the matrix was built as the canonical 2×2 game.
    canonical: Option<(T, T)>,
    sigma_max: OnceLock<T>,
}

impl<T: Scalar> PayoffMatrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 || rows[0].is_empty() {
            return domain("payoff matrix must have at least one row and column");
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return domain("payoff matrix rows have different lengths");
        }
        let data: Vec<T> = rows.iter().flatten().copied().collect();
        Self::from_mat(Mat::from_vec(m, n, data))
    }

    pub fn from_mat(entries: Mat<T>) -> Result<Self> {
        if entries.rows() == 0 || entries.cols() == 0 {
            return domain("payoff matrix must be non-empty");
        }
        if entries.as_slice().iter().any(|a| !a.is_finite()) {
            return domain("payoff matrix entries must be finite");
        }
        let a_max = entries.max_abs();
        Ok(Self { entries, a_max, canonical: None, sigma_max: OnceLock::new() })
    }

    pub fn m(&self) -> usize {
        self.entries.rows()
    }

    pub fn n(&self) -> usize {
        self.entries.cols()
    }

    pub fn entries(&self) -> &Mat<T> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn a_max(&self) -> T {
        self.a_max
    }

    pub fn canonical_params(&self) -> Option<(T, T)> {
        self.canonical
    }

    pub fn is_constant(&self) -> bool {
        let first = self.entries.as_slice()[0];
        self.entries.as_slice().iter().all(|&a| a == first)
    }

    /// Spectral norm, computed once and cached.
    pub fn sigma_max(&self) -> T {
        *self.sigma_max.get_or_init(|| compute_sigma_max(&self.entries))
    }

    /// `A q`
    pub fn apply(&self, q: &[T]) -> Vec<T> {
        self.entries.mul_vec(q)
    }

    /// `Aᵀ p`
    pub fn apply_transpose(&self, p: &[T]) -> Vec<T> {
        self.entries.t_mul_vec(p)
    }

    /// `J (u, v) = (A v, −Aᵀ u)`
    pub fn apply_skew(&self, u: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        let top = self.apply(v);
        let bottom = self.apply_transpose(u).into_iter().map(|a| -a).collect();
        (top, bottom)
    }

    /// The full `(m+n) × (m+n)` skew matrix, for callers that need it explicitly.
    pub fn skew_matrix(&self) -> Mat<T> {
        let (m, n) = (self.m(), self.n());
        let mut j = Mat::zeros(m + n, m + n);
        for i in 0..m {
            for k in 0..n {
                let a = self.entries[(i, k)];
                j[(i, m + k)] = a;
                j[(m + k, i)] = -a;
            }
        }
        j
    }

    /// Affine image `γ·A + v·𝟙𝟙ᵀ`. The canonical tag survives only for `γ = 1, v = 0`.
    pub fn affine(&self, gamma: T, value: T) -> Result<Self> {
        let data = self.entries.as_slice().iter().map(|&a| gamma * a + value).collect();
        let mut out = Self::from_mat(Mat::from_vec(self.m(), self.n(), data))?;
        if gamma == T::one() && value == T::zero() {
            out.canonical = self.canonical;
        }
        Ok(out)
    }

    pub fn to_rows_f64(&self) -> Vec<Vec<f64>> {
        (0..self.m()).map(|i| self.entries.row(i).iter().map(|a| a.to_f64_lossy()).collect()).collect()
    }
}

fn compute_sigma_max<T: Scalar>(a: &Mat<T>) -> T {
    if a.rows() == 2 && a.cols() == 2 {
        let (s_max, _) = singular_values_2x2(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
        return s_max;
    }
    linalg::singular_values(a).first().copied().unwrap_or_else(T::zero)
}

/// Closed-form singular values `(σ₁ ≥ σ₂)` of `[[a, b], [c, d]]`.
pub fn singular_values_2x2<T: Scalar>(a: T, b: T, c: T, d: T) -> (T, T) {
    let s = ((a + d) * (a + d) + (b - c) * (b - c)).sqrt();
    let r = ((a - d) * (a - d) + (b + c) * (b + c)).sqrt();
    let half = T::lit(0.5);
    ((s + r) * half, ((s - r) * half).abs())
}

/// A Nash equilibrium `w* = (p*, q*)`.
///
/// For 2×2 games the raw solution of the indifference system is stored even
/// when it leaves the simplex; `interior` tells the two cases apart and
/// `joint` is only present for interior equilibria.
#[derive(Debug, Clone)]
pub struct NashEquilibrium<T: Scalar = f64> {
    pub p_star: Vec<T>,
    pub q_star: Vec<T>,
    pub value: T,
    pub delta_p: T,
    pub delta_q: T,
    pub delta: T,
    pub interior: bool,
    pub unique: bool,
    joint: Option<JointStrategy<T>>,
}

impl<T: Scalar> NashEquilibrium<T> {
    /// Validates a candidate interior equilibrium against `A`: both payoff
    /// vectors must be constant to `1e−10` (relative to `a_max`). Uniqueness is
    /// decided by the restricted singular value.
    pub fn from_joint(matrix: &PayoffMatrix<T>, joint: JointStrategy<T>) -> Result<Self> {
        if joint.m() != matrix.m() || joint.n() != matrix.n() {
            return domain("equilibrium dimensions do not match the matrix");
        }
        let aq = matrix.apply(joint.q());
        let atp = matrix.apply_transpose(joint.p());
        let value = linalg::dot(joint.p(), &aq);
        let tol = T::tol(1e-10) * (T::one() + matrix.a_max());
        let spread = |v: &[T]| v.iter().fold(T::zero(), |acc, &a| acc.max((a - value).abs()));
        if spread(&aq) > tol || spread(&atp) > tol {
            return Err(Error::UnsupportedGame(
                "candidate is not an interior equilibrium: payoff vectors are not constant".into(),
            ));
        }
        let spectral = sigma_min_restricted(matrix);
        let unique = spectral.sigma_min > T::tol(1e-12) * (T::one() + spectral.sigma_max);
        let delta_p = min_coord(joint.p());
        let delta_q = min_coord(joint.q());
        Ok(Self {
            p_star: joint.p().to_vec(),
            q_star: joint.q().to_vec(),
            value,
            delta_p,
            delta_q,
            delta: delta_p.min(delta_q),
            interior: true,
            unique,
            joint: Some(joint),
        })
    }

    /// The equilibrium as a strictly positive joint strategy, if interior.
    pub fn joint(&self) -> Option<&JointStrategy<T>> {
        self.joint.as_ref()
    }

    /// The joint strategy, or an unsupported-game error when the equilibrium
    /// is not unique and interior.
    pub fn require_unique_interior(&self) -> Result<&JointStrategy<T>> {
        match (&self.joint, self.interior && self.unique) {
            (Some(j), true) => Ok(j),
            _ => Err(Error::UnsupportedGame("operation needs a unique interior equilibrium".into())),
        }
    }
}

fn min_coord<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().fold(T::infinity(), T::min)
}

/// Spectral summary of a game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameSpectral<T: Scalar = f64> {
    pub sigma_max: T,
    pub sigma_min: T,
    pub sigma_min_m: T,
    pub sigma_min_n: T,
}

/// A payoff matrix together with its equilibrium, when known.
#[derive(Debug, Clone)]
pub struct Game<T: Scalar = f64> {
    pub matrix: PayoffMatrix<T>,
    pub nash: Option<NashEquilibrium<T>>,
}

impl<T: Scalar> Game<T> {
    pub fn new(matrix: PayoffMatrix<T>, nash: Option<NashEquilibrium<T>>) -> Self {
        Self { matrix, nash }
    }

    /// Builds a 2×2 game and solves for its equilibrium.
    pub fn from_2x2(matrix: PayoffMatrix<T>) -> Result<Self> {
        let nash = solve_interior_ne_2x2(&matrix)?;
        Ok(Self { matrix, nash: Some(nash) })
    }

    pub fn require_nash(&self) -> Result<&NashEquilibrium<T>> {
        match &self.nash {
            Some(ne) if ne.interior && ne.unique => Ok(ne),
            _ => Err(Error::UnsupportedGame("operation needs a unique interior equilibrium".into())),
        }
    }
}

fn check_open_unit<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        domain(format!("{name} = {x} must lie strictly inside (0, 1)"))
    }
}

/// The canonical zero-value 2×2 game `A_{δp,δq}` with equilibrium
/// `p* = (1−δp, δp)`, `q* = (1−δq, δq)`.
pub fn build_canonical_2x2<T: Scalar>(delta_p: T, delta_q: T) -> Result<PayoffMatrix<T>> {
    check_open_unit("delta_p", delta_p)?;
    check_open_unit("delta_q", delta_q)?;
    let one = T::one();
    let rows = vec![
        vec![delta_p * delta_q, -delta_p * (one - delta_q)],
        vec![-(one - delta_p) * delta_q, (one - delta_p) * (one - delta_q)],
    ];
    let mut a = PayoffMatrix::from_rows(&rows)?;
    a.canonical = Some((delta_p, delta_q));
    Ok(a)
}

/// Equilibrium of the canonical game, built from log-probabilities so that
/// exponentially small `δ` keep full relative precision.
pub fn canonical_nash<T: Scalar>(matrix: &PayoffMatrix<T>) -> Result<NashEquilibrium<T>> {
    let (dp, dq) = matrix
        .canonical_params()
        .ok_or_else(|| Error::Domain("matrix is not a canonical 2x2 game".into()))?;
    let joint = JointStrategy::from_log_probs(
        vec![(-dp).ln_1p(), dp.ln()],
        vec![(-dq).ln_1p(), dq.ln()],
    )?;
    let (p_star, q_star) = (joint.p().to_vec(), joint.q().to_vec());
    Ok(NashEquilibrium {
        p_star,
        q_star,
        value: T::zero(),
        delta_p: dp.min(T::one() - dp),
        delta_q: dq.min(T::one() - dq),
        delta: dp.min(T::one() - dp).min(dq.min(T::one() - dq)),
        interior: true,
        unique: true,
        joint: Some(joint),
    })
}

fn entries_2x2<T: Scalar>(a: &PayoffMatrix<T>) -> Result<(T, T, T, T)> {
    if a.m() != 2 || a.n() != 2 {
        return domain(format!("expected a 2x2 matrix, got {}x{}", a.m(), a.n()));
    }
    Ok((a.get(0, 0), a.get(0, 1), a.get(1, 0), a.get(1, 1)))
}

/// The 2×2 determinant-like quantity `φ = a − b − (c − d)`.
fn phi_2x2<T: Scalar>(a: T, b: T, c: T, d: T) -> T {
    a - b - (c - d)
}

/// Solves the 2×2 indifference system. A boundary solution is reported with
/// `interior = false` and its raw, unclamped coordinates.
pub fn solve_interior_ne_2x2<T: Scalar>(matrix: &PayoffMatrix<T>) -> Result<NashEquilibrium<T>> {
    if matrix.canonical_params().is_some() {
        return canonical_nash(matrix);
    }
    let (a, b, c, d) = entries_2x2(matrix)?;
    let phi = phi_2x2(a, b, c, d);
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if phi.abs() <= T::epsilon() * T::lit(4.0) * scale || phi == T::zero() {
        return Err(Error::DegenerateGame("a - b - (c - d) vanishes".into()));
    }
    let mu_p = (a - b) / phi;
    let mu_q = (a - c) / phi;
    let one = T::one();
    let p_star = vec![one - mu_p, mu_p];
    let q_star = vec![one - mu_q, mu_q];
    let interior = mu_p > T::zero() && mu_p < one && mu_q > T::zero() && mu_q < one;
    let value = a - (a - b) * mu_q;
    if !interior {
        return Ok(NashEquilibrium {
            delta_p: min_coord(&p_star),
            delta_q: min_coord(&q_star),
            delta: min_coord(&p_star).min(min_coord(&q_star)),
            p_star,
            q_star,
            value,
            interior: false,
            unique: false,
            joint: None,
        });
    }
    let joint = JointStrategy::from_probs(p_star, q_star)?;
    let ne = NashEquilibrium::from_joint(matrix, joint)?;
    Ok(ne)
}

/// Result of writing a 2×2 game as `γ·A_{δp,δq} + v·𝟙𝟙ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition2x2<T: Scalar = f64> {
    pub gamma: T,
    pub value: T,
    pub delta_p: T,
    pub delta_q: T,
}

/// Affine decomposition of a 2×2 game with an interior equilibrium.
///
/// Only games with `φ > 0` admit a positive scale; for `φ < 0` the canonical
/// family would need `γ < 0`, so those games are reported as unsupported.
pub fn decompose_2x2<T: Scalar>(matrix: &PayoffMatrix<T>) -> Result<Decomposition2x2<T>> {
    if let Some((dp, dq)) = matrix.canonical_params() {
        return Ok(Decomposition2x2 { gamma: T::one(), value: T::zero(), delta_p: dp, delta_q: dq });
    }
    let (a, b, c, d) = entries_2x2(matrix)?;
    let ne = solve_interior_ne_2x2(matrix)?;
    if !ne.interior {
        return Err(Error::UnsupportedGame("equilibrium is not interior".into()));
    }
    let phi = phi_2x2(a, b, c, d);
    if phi < T::zero() {
        return Err(Error::UnsupportedGame(
            "a - b - (c - d) < 0: no positive-scale canonical decomposition exists".into(),
        ));
    }
    Ok(Decomposition2x2 { gamma: phi, value: ne.value, delta_p: ne.p_star[1], delta_q: ne.q_star[1] })
}

/// `DG(w) = max_j (Aᵀp)(j) − min_i (Aq)(i)`.
pub fn duality_gap<T: Scalar>(matrix: &PayoffMatrix<T>, w: &JointStrategy<T>) -> Result<T> {
    if w.m() != matrix.m() || w.n() != matrix.n() {
        return domain("strategy dimensions do not match the matrix");
    }
    let best_col = matrix.apply_transpose(w.p()).into_iter().fold(T::neg_infinity(), T::max);
    let best_row = matrix.apply(w.q()).into_iter().fold(T::infinity(), T::min);
    Ok((best_col - best_row).max(T::zero()))
}

/// Piecewise-linear duality gap of the canonical game.
///
/// The offsets `p̃ − (1−δp)` are formed as `δp − p(2)` from the stored small
/// coordinate, which avoids cancellation when `p(2)` is tiny.
pub fn dg_canonical_2x2<T: Scalar>(delta_p: T, delta_q: T, w: &JointStrategy<T>) -> Result<T> {
    if w.m() != 2 || w.n() != 2 {
        return domain("canonical duality gap needs a 2x2 strategy");
    }
    let one = T::one();
    let hp = delta_p - w.p()[1];
    let hq = delta_q - w.q()[1];
    let row = if hp >= T::zero() { hp * delta_q } else { -hp * (one - delta_q) };
    let col = if hq >= T::zero() { hq * (one - delta_p) } else { -hq * delta_p };
    Ok(row + col)
}

/// Spectral norm (closed form for 2×2, Jacobi singular values otherwise).
pub fn sigma_max<T: Scalar>(matrix: &PayoffMatrix<T>) -> T {
    matrix.sigma_max()
}

/// Minimum singular values of `A` and `Aᵀ` restricted to and projected onto
/// the complements of the all-ones directions.
pub fn sigma_min_restricted<T: Scalar>(matrix: &PayoffMatrix<T>) -> GameSpectral<T> {
    let (m, n) = (matrix.m(), matrix.n());
    let sigma_max = matrix.sigma_max();
    if m < 2 || n < 2 {
        return GameSpectral { sigma_max, sigma_min: T::zero(), sigma_min_m: T::zero(), sigma_min_n: T::zero() };
    }
    let um: Mat<T> = linalg::ones_complement_basis(m);
    let un: Mat<T> = linalg::ones_complement_basis(n);
    // Π_m A restricted to 1⊥_n, written in the bases: U_mᵀ A U_n
    let core = um.transpose().matmul(matrix.entries()).matmul(&un);
    let (sigma_min_n, sigma_min_m) = if m == 2 && n == 2 {
        let s = core[(0, 0)].abs();
        (s, s)
    } else {
        let sn = linalg::singular_values(&core).last().copied().unwrap_or_else(T::zero);
        let sm = linalg::singular_values(&core.transpose()).last().copied().unwrap_or_else(T::zero);
        (sn, sm)
    };
    GameSpectral { sigma_max, sigma_min: sigma_min_m.min(sigma_min_n), sigma_min_m, sigma_min_n }
}

/// Blockwise centering onto `S⊥`.
pub fn project_s_perp<T: Scalar>(v: &[T], m: usize, n: usize) -> Result<Vec<T>> {
    if v.len() != m + n || m == 0 || n == 0 {
        return domain(format!("vector of length {} does not split into {m} + {n}", v.len()));
    }
    let mut out = v.to_vec();
    center(&mut out[..m]);
    center(&mut out[m..]);
    Ok(out)
}

pub(crate) fn center<T: Scalar>(block: &mut [T]) {
    let mean = block.iter().copied().sum::<T>() / T::from_usize_lossy(block.len());
    for b in block.iter_mut() {
        *b -= mean;
    }
}

/// Instance families, addressable by string tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InstanceFamily {
    #[serde(rename = "canonical2x2")]
    Canonical2x2 { delta_p: f64, delta_q: f64 },
    ScaledMp { epsilon: f64 },
    BoundarySym { delta: f64 },
    #[serde(rename = "diagonal10")]
    Diagonal10 { delta: f64 },
    KlLower { horizon: usize },
    UniformLb { horizon: usize },
    DgLb { horizon: usize },
}

/// Loose parameter bag used when a family is selected by tag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub delta_p: Option<f64>,
    pub delta_q: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub horizon: Option<usize>,
}

impl InstanceFamily {
    pub const TAGS: [&'static str; 7] =
        ["canonical2x2", "scaled_mp", "boundary_sym", "diagonal10", "kl_lower", "uniform_lb", "dg_lb"];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Canonical2x2 { .. } => "canonical2x2",
            Self::ScaledMp { .. } => "scaled_mp",
            Self::BoundarySym { .. } => "boundary_sym",
            Self::Diagonal10 { .. } => "diagonal10",
            Self::KlLower { .. } => "kl_lower",
            Self::UniformLb { .. } => "uniform_lb",
            Self::DgLb { .. } => "dg_lb",
        }
    }

    /// Resolves a tag and parameters. `delta` stands in for a missing
    /// `delta_p`/`delta_q` and vice versa.
    pub fn from_tag(tag: &str, params: &InstanceParams) -> Result<Self> {
        let delta = params.delta.or(params.delta_p).or(params.delta_q);
        let need_delta = || delta.ok_or_else(|| Error::Instance(format!("family {tag} needs a delta")));
        let need_horizon =
            || params.horizon.ok_or_else(|| Error::Instance(format!("family {tag} needs a horizon")));
        match tag {
            "canonical2x2" => {
                let dp = params.delta_p.or(delta);
                let dq = params.delta_q.or(delta);
                match (dp, dq) {
                    (Some(delta_p), Some(delta_q)) => Ok(Self::Canonical2x2 { delta_p, delta_q }),
                    _ => Err(Error::Instance("canonical2x2 needs delta_p and delta_q".into())),
                }
            }
            "scaled_mp" => {
                let epsilon = params.epsilon.or(delta).ok_or_else(|| Error::Instance("scaled_mp needs epsilon".into()))?;
                Ok(Self::ScaledMp { epsilon })
            }
            "boundary_sym" => Ok(Self::BoundarySym { delta: need_delta()? }),
            "diagonal10" => Ok(Self::Diagonal10 { delta: need_delta()? }),
            "kl_lower" => Ok(Self::KlLower { horizon: need_horizon()? }),
            "uniform_lb" => Ok(Self::UniformLb { horizon: need_horizon()? }),
            "dg_lb" => Ok(Self::DgLb { horizon: need_horizon()? }),
            other => Err(Error::Instance(format!(
                "unknown family {other:?}; expected one of {}",
                Self::TAGS.join(", ")
            ))),
        }
    }
}

/// A generated game with its equilibrium and the prescribed initialization.
#[derive(Debug, Clone)]
pub struct Instance<T: Scalar = f64> {
    pub family: InstanceFamily,
    pub matrix: PayoffMatrix<T>,
    pub nash: NashEquilibrium<T>,
    pub init: JointStrategy<T>,
}

impl<T: Scalar> Instance<T> {
    pub fn game(&self) -> Game<T> {
        Game::new(self.matrix.clone(), Some(self.nash.clone()))
    }
}

fn representable<T: Scalar>(what: &str, x: f64) -> Result<T> {
    let floor = REPRESENTABLE_FLOOR.max(T::min_positive_value().to_f64_lossy());
    if !(x >= floor) {
        return Err(Error::Instance(format!("{what} = {x:e} is below the representable floor")));
    }
    Ok(T::lit(x))
}

fn horizon_in<T: Scalar>(family: &str, t: usize, lo: usize, hi: usize) -> Result<T> {
    if t < lo || t > hi {
        return Err(Error::Instance(format!("{family} horizon {t} outside [{lo}, {hi}]")));
    }
    Ok(T::from_usize_lossy(t))
}

fn two_point_log<T: Scalar>(log_small: T) -> Vec<T> {
    // (1 − e^s, e^s) in log form
    vec![(-log_small.exp()).ln_1p(), log_small]
}

/// Builds the matrix, equilibrium and canonical initialization of a family.
pub fn make_instance<T: Scalar>(family: &InstanceFamily) -> Result<Instance<T>> {
    let canonical = |dp: T, dq: T| -> Result<(PayoffMatrix<T>, NashEquilibrium<T>)> {
        let a = build_canonical_2x2(dp, dq).map_err(|e| Error::Instance(e.to_string()))?;
        let ne = canonical_nash(&a)?;
        Ok((a, ne))
    };
    let (matrix, nash, init) = match *family {
        InstanceFamily::Canonical2x2 { delta_p, delta_q } => {
            let (a, ne) = canonical(T::lit(delta_p), T::lit(delta_q))?;
            (a, ne, JointStrategy::uniform(2, 2))
        }
        InstanceFamily::BoundarySym { delta } => {
            if !(delta > 0.0 && delta <= 0.5) {
                return Err(Error::Instance(format!("boundary_sym delta {delta} outside (0, 1/2]")));
            }
            let (a, ne) = canonical(T::lit(delta), T::lit(delta))?;
            (a, ne, JointStrategy::uniform(2, 2))
        }
        InstanceFamily::ScaledMp { epsilon } => {
            if !(epsilon > 0.0 && epsilon.is_finite()) {
                return Err(Error::Instance(format!("scaled_mp epsilon {epsilon} must be positive")));
            }
            let e = T::lit(epsilon);
            let a = PayoffMatrix::from_rows(&[vec![e, -e], vec![-e, e]])?;
            let ne = NashEquilibrium::from_joint(&a, JointStrategy::uniform(2, 2))?;
            (a, ne, JointStrategy::uniform(2, 2))
        }
        InstanceFamily::Diagonal10 { delta } => {
            if !(delta > 0.0 && delta <= 0.5) {
                return Err(Error::Instance(format!("diagonal10 delta {delta} outside (0, 1/2]")));
            }
            let v: Vec<T> = (0..10)
                .map(|i| if i < 5 { T::lit(delta / 5.0) } else { T::lit((1.0 - delta) / 5.0) })
                .collect();
            let vmin = min_coord(&v);
            let mut diag = Mat::zeros(10, 10);
            for i in 0..10 {
                diag[(i, i)] = vmin / v[i];
            }
            let a = PayoffMatrix::from_mat(diag)?;
            let ne = NashEquilibrium::from_joint(&a, JointStrategy::from_probs(v.clone(), v)?)?;
            (a, ne, JointStrategy::uniform(10, 10))
        }
        InstanceFamily::KlLower { horizon } => {
            let t: T = horizon_in("kl_lower", horizon, 3, KL_LOWER_MAX_HORIZON)?;
            let delta = T::one() / t;
            representable::<T>("exp(-3/delta)", (-3.0 * horizon as f64).exp())?;
            let (a, ne) = canonical(delta, delta)?;
            let log_small = T::lit(-2.5) * t;
            let init = JointStrategy::from_log_probs(two_point_log(log_small), two_point_log(log_small))?;
            (a, ne, init)
        }
        InstanceFamily::UniformLb { horizon } => {
            horizon_in::<T>("uniform_lb", horizon, 2, UNIFORM_LB_MAX_HORIZON)?;
            let delta: T = representable("delta", 1.0 / (6.0 * (horizon as f64).exp()))?;
            let (a, ne) = canonical(delta, delta)?;
            (a, ne, JointStrategy::uniform(2, 2))
        }
        InstanceFamily::DgLb { horizon } => {
            horizon_in::<T>("dg_lb", horizon, 3, DG_LB_MAX_HORIZON)?;
            let delta_f = (-(horizon as f64)).exp();
            let delta: T = representable("delta", delta_f)?;
            representable::<T>("delta^2 / 6", delta_f * delta_f / 6.0)?;
            let (a, ne) = canonical(delta, delta)?;
            // p(1) at the middle of [1/2, 3/4]; q(2) at the log-midpoint of [δ²/6, δ²/3]
            let p = vec![T::lit(5.0 / 8.0).ln(), T::lit(3.0 / 8.0).ln()];
            let log_q2 = T::lit(2.0) * delta.ln() - T::lit(18f64.sqrt()).ln();
            let init = JointStrategy::from_log_probs(p, two_point_log(log_q2))?;
            (a, ne, init)
        }
    };
    Ok(Instance { family: *family, matrix, nash, init })
}

/// Samples a 2×2 game with a unique interior equilibrium through the affine
/// decomposition: `γ·A_{δp,δq} + v·𝟙𝟙ᵀ` with `δ ∈ [0.05, 0.95]`,
/// `γ ∈ [0.25, 2]` and `v ∈ [−0.5, 0.5]`.
pub fn random_interior_2x2<R: rand::Rng + ?Sized>(rng: &mut R) -> (Game<f64>, Decomposition2x2<f64>) {
    let dp = rng.gen_range(0.05..0.95);
    let dq = rng.gen_range(0.05..0.95);
    let gamma = rng.gen_range(0.25..2.0);
    let value = rng.gen_range(-0.5..0.5);
    let base = build_canonical_2x2(dp, dq).expect("sampled parameters are in range");
    let matrix = base.affine(gamma, value).expect("finite entries");
    let game = Game::from_2x2(matrix).expect("affine image keeps an interior equilibrium");
    (game, Decomposition2x2 { gamma, value, delta_p: dp, delta_q: dq })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn canonical_half_is_scaled_pennies() {
        let a = build_canonical_2x2(0.5, 0.5).unwrap();
        assert_eq!(a.to_rows_f64(), vec![vec![0.25, -0.25], vec![-0.25, 0.25]]);
        assert!(build_canonical_2x2(0.0, 0.5).is_err());
        assert!(build_canonical_2x2(0.5, 1.0).is_err());
    }

    #[test]
    fn canonical_equilibrium_is_annihilated() {
        let a = build_canonical_2x2(0.1f64, 0.1).unwrap();
        let aq = a.apply(&[0.9, 0.1]);
        assert!(aq.iter().all(|v| v.abs() < 1e-16));
    }

    #[test]
    fn decomposition_examples() {
        let base = build_canonical_2x2(0.3, 0.4).unwrap();
        let plain = PayoffMatrix::from_rows(&base.to_rows_f64()).unwrap();
        let d = decompose_2x2(&plain).unwrap();
        assert!(close(d.gamma, 1.0, 1e-12) && close(d.value, 0.0, 1e-12));
        assert!(close(d.delta_p, 0.3, 1e-12) && close(d.delta_q, 0.4, 1e-12));

        let scaled = base.affine(2.0, 0.5).unwrap();
        let d = decompose_2x2(&scaled).unwrap();
        assert!(close(d.gamma, 2.0, 1e-12) && close(d.value, 0.5, 1e-12));

        let mp = PayoffMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let d = decompose_2x2(&mp).unwrap();
        assert!(close(d.gamma, 4.0, 1e-12) && d.value.abs() < 1e-15);
        assert!(close(d.delta_p, 0.5, 1e-12) && close(d.delta_q, 0.5, 1e-12));
    }

    #[test]
    fn negative_phi_is_unsupported() {
        let neg = build_canonical_2x2(0.3, 0.4).unwrap().affine(-1.0, 0.0).unwrap();
        assert!(matches!(decompose_2x2(&neg), Err(Error::UnsupportedGame(_))));
        let constant = PayoffMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(decompose_2x2(&constant), Err(Error::DegenerateGame(_))));
    }

    #[test]
    fn solve_examples() {
        let a = build_canonical_2x2(0.2, 0.7).unwrap();
        let plain = PayoffMatrix::from_rows(&a.to_rows_f64()).unwrap();
        let ne = solve_interior_ne_2x2(&plain).unwrap();
        assert!(close(ne.p_star[0], 0.8, 1e-12) && close(ne.q_star[0], 0.3, 1e-12));
        assert!(ne.value.abs() < 1e-15 && ne.interior && ne.unique);

        let boundary = PayoffMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        let ne = solve_interior_ne_2x2(&boundary).unwrap();
        assert!(!ne.interior && ne.joint().is_none());
    }

    #[test]
    fn duality_gap_examples() {
        let a = build_canonical_2x2(0.5, 0.5).unwrap();
        let w = JointStrategy::from_probs(vec![1.0 - 1e-300, 1e-300], vec![1.0 - 1e-300, 1e-300]).unwrap();
        assert!(close(duality_gap(&a, &w).unwrap(), 0.5, 1e-12));
        let w = JointStrategy::from_probs(vec![1e-300, 1.0], vec![1.0, 1e-300]).unwrap();
        assert!(close(duality_gap(&a, &w).unwrap(), 0.5, 1e-12));
        let ne = canonical_nash(&a).unwrap();
        assert!(duality_gap(&a, ne.joint().unwrap()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn closed_form_sigma_matches_jacobi() {
        let m = Mat::from_vec(2, 2, vec![0.3, -1.2, 0.7, 0.4]);
        let (s1, s2) = singular_values_2x2(0.3, -1.2, 0.7, 0.4);
        let sv = linalg::singular_values(&m);
        assert!(close(s1, sv[0], 1e-14) && close(s2, sv[1], 1e-14));
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_s_perp(&[1.0, 1.0, 1.0, 1.0], 2, 2).unwrap(), vec![0.0; 4]);
        assert_eq!(project_s_perp(&[2.0, 0.0, 0.0, 0.0], 2, 2).unwrap(), vec![1.0, -1.0, 0.0, 0.0]);
        assert!(project_s_perp(&[1.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn restricted_values_of_known_families() {
        for eps in [0.1, 0.5, 1.0] {
            let inst = make_instance::<f64>(&InstanceFamily::ScaledMp { epsilon: eps }).unwrap();
            assert!(close(sigma_min_restricted(&inst.matrix).sigma_min, 2.0 * eps, 1e-12));
        }
        let a = build_canonical_2x2(0.13, 0.71).unwrap();
        assert!(close(sigma_min_restricted(&a).sigma_min, 0.5, 1e-12));
    }

    #[test]
    fn diagonal_family_has_constant_payoffs() {
        let inst = make_instance::<f64>(&InstanceFamily::Diagonal10 { delta: 0.1 }).unwrap();
        let ne = &inst.nash;
        assert!(close(ne.p_star[0], 0.02, 1e-14) && close(ne.p_star[9], 0.18, 1e-14));
        assert!(close(ne.value, 0.02, 1e-14) && ne.unique);
        let s = sigma_min_restricted(&inst.matrix);
        assert!(s.sigma_min > 0.0 && s.sigma_min <= s.sigma_max);
    }

    #[test]
    fn exponential_families_respect_caps() {
        let kl = make_instance::<f64>(&InstanceFamily::KlLower { horizon: 20 }).unwrap();
        assert!(close(kl.init.log_p()[1], -50.0, 1e-15));
        assert!(close(kl.nash.delta, 0.05, 1e-15));
        let ulb = make_instance::<f64>(&InstanceFamily::UniformLb { horizon: 10 }).unwrap();
        assert!(close(ulb.nash.delta, 1.0 / (6.0 * 10f64.exp()), 1e-14));
        assert!(make_instance::<f64>(&InstanceFamily::KlLower { horizon: 231 }).is_err());
        assert!(make_instance::<f64>(&InstanceFamily::UniformLb { horizon: 601 }).is_err());
        assert!(make_instance::<f64>(&InstanceFamily::DgLb { horizon: 341 }).is_err());
        assert!(make_instance::<f64>(&InstanceFamily::DgLb { horizon: 340 }).is_ok());
        assert!(make_instance::<f32>(&InstanceFamily::KlLower { horizon: 50 }).is_err());
    }

    #[test]
    fn tags_round_trip() {
        let params = InstanceParams { delta: Some(0.3), horizon: Some(20), ..Default::default() };
        for tag in InstanceFamily::TAGS {
            let fam = InstanceFamily::from_tag(tag, &params).unwrap();
            assert_eq!(fam.tag(), tag);
        }
        assert!(InstanceFamily::from_tag("nope", &params).is_err());
    }
}
