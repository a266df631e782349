//! The log-sum-exp energy `F(z) = LSE(x) + LSE(y)` and the machinery built on
//! it: softmax gradient, Hessian and local norms, Bregman divergence, the
//! negative entropy `R` and the map back from strategies to dual points.

use crate::error::{domain, Error, Result};
use crate::games::{project_s_perp, Game, PayoffMatrix};
use crate::linalg::{self, dot, Mat};
use crate::report::CheckReport;
use crate::scalar::Scalar;

/// A strictly positive joint strategy `w = (p, q)`, kept in log form with a
/// materialized probability view.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStrategy<T: Scalar = f64> {
    log_p: Vec<T>,
    log_q: Vec<T>,
    p: Vec<T>,
    q: Vec<T>,
}

fn check_log_block<T: Scalar>(name: &str, lp: &[T]) -> Result<()> {
    if lp.is_empty() {
        return domain(format!("{name} is empty"));
    }
    if lp.iter().any(|v| !v.is_finite()) {
        return domain(format!("{name} has a zero or non-finite coordinate"));
    }
    let total = lse(lp);
    if total.abs() > T::tol(1e-12) * T::from_usize_lossy(lp.len()) {
        return domain(format!("{name} does not sum to one (log-sum = {total})"));
    }
    Ok(())
}

impl<T: Scalar> JointStrategy<T> {
    /// From probabilities. Every coordinate must be positive and each block
    /// must sum to one within `1e−12`; nothing is clamped or repaired.
    pub fn from_probs(p: Vec<T>, q: Vec<T>) -> Result<Self> {
        for (name, v) in [("p", &p), ("q", &q)] {
            if v.iter().any(|&x| !(x > T::zero()) || !x.is_finite()) {
                return domain(format!("{name} must be strictly positive"));
            }
        }
        let log_p: Vec<T> = p.iter().map(|x| x.ln()).collect();
        let log_q: Vec<T> = q.iter().map(|x| x.ln()).collect();
        check_log_block("p", &log_p)?;
        check_log_block("q", &log_q)?;
        Ok(Self { log_p, log_q, p, q })
    }

    /// From normalized log-probabilities.
    pub fn from_log_probs(log_p: Vec<T>, log_q: Vec<T>) -> Result<Self> {
        check_log_block("p", &log_p)?;
        check_log_block("q", &log_q)?;
        let p: Vec<T> = log_p.iter().map(|x| x.exp()).collect();
        let q: Vec<T> = log_q.iter().map(|x| x.exp()).collect();
        if p.iter().chain(&q).any(|&x| !(x > T::zero())) {
            return domain("a coordinate underflows to zero");
        }
        Ok(Self { log_p, log_q, p, q })
    }

    /// Blockwise softmax of arbitrary log-weights.
    pub fn from_log_weights(x: &[T], y: &[T]) -> Self {
        let normalize = |v: &[T]| {
            let c = lse(v);
            v.iter().map(|&a| a - c).collect::<Vec<T>>()
        };
        let log_p = normalize(x);
        let log_q = normalize(y);
        let p = log_p.iter().map(|x| x.exp()).collect();
        let q = log_q.iter().map(|x| x.exp()).collect();
        Self { log_p, log_q, p, q }
    }

    pub fn uniform(m: usize, n: usize) -> Self {
        let lm = -T::from_usize_lossy(m).ln();
        let ln = -T::from_usize_lossy(n).ln();
        Self {
            log_p: vec![lm; m],
            log_q: vec![ln; n],
            p: vec![T::one() / T::from_usize_lossy(m); m],
            q: vec![T::one() / T::from_usize_lossy(n); n],
        }
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn p(&self) -> &[T] {
        &self.p
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn log_p(&self) -> &[T] {
        &self.log_p
    }

    pub fn log_q(&self) -> &[T] {
        &self.log_q
    }

    pub fn p_min(&self) -> T {
        self.p.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn q_min(&self) -> T {
        self.q.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn w_min(&self) -> T {
        self.p_min().min(self.q_min())
    }

    /// `(p, q)` as one vector of length `m + n`.
    pub fn concat(&self) -> Vec<T> {
        self.p.iter().chain(&self.q).copied().collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.p
            .iter()
            .chain(&self.q)
            .zip(other.p.iter().chain(&other.q))
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }
}

/// A dual point `z = (x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState<T: Scalar = f64> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    /// Set when the point is known to lie in the effective dual space.
    pub in_effective_space: bool,
}

impl<T: Scalar> DualState<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Self {
        Self { x, y, in_effective_space: false }
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self::new(vec![T::zero(); m], vec![T::zero(); n])
    }

    pub fn from_concat(v: &[T], m: usize) -> Self {
        Self::new(v[..m].to_vec(), v[m..].to_vec())
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn concat(&self) -> Vec<T> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn effective(mut self, flag: bool) -> Self {
        self.in_effective_space = flag;
        self
    }

    /// `self − other` as a flat vector.
    pub fn diff(&self, other: &Self) -> Vec<T> {
        linalg::sub(&self.concat(), &other.concat())
    }

    pub fn norm_inf(&self) -> T {
        linalg::norm_inf(&self.concat())
    }

    pub fn norm2(&self) -> T {
        linalg::norm2(&self.concat())
    }

    /// `⟨x, p⟩ + ⟨y, q⟩`
    pub fn pair(&self, w: &JointStrategy<T>) -> T {
        dot(&self.x, w.p()) + dot(&self.y, w.q())
    }
}

/// Numerically stable log-sum-exp.
pub fn lse<T: Scalar>(v: &[T]) -> T {
    let mx = v.iter().copied().fold(T::neg_infinity(), T::max);
    if !mx.is_finite() {
        return mx;
    }
    mx + v.iter().map(|&a| (a - mx).exp()).sum::<T>().ln()
}

pub fn energy<T: Scalar>(z: &DualState<T>) -> T {
    lse(&z.x) + lse(&z.y)
}

/// `∇F(z)`: blockwise softmax.
pub fn grad_energy<T: Scalar>(z: &DualState<T>) -> JointStrategy<T> {
    JointStrategy::from_log_weights(&z.x, &z.y)
}

fn covariance_block<T: Scalar>(p: &[T], out: &mut Mat<T>, offset: usize) {
    for (i, &pi) in p.iter().enumerate() {
        for (j, &pj) in p.iter().enumerate() {
            let d = if i == j { pi } else { T::zero() };
            out[(offset + i, offset + j)] = d - pi * pj;
        }
    }
}

/// Hessian of `F` at a strategy: `Diag(p) − ppᵀ ⊕ Diag(q) − qqᵀ`.
pub fn hessian_at<T: Scalar>(w: &JointStrategy<T>) -> Mat<T> {
    let (m, n) = (w.m(), w.n());
    let mut h = Mat::zeros(m + n, m + n);
    covariance_block(w.p(), &mut h, 0);
    covariance_block(w.q(), &mut h, m);
    h
}

pub fn hessian_energy<T: Scalar>(z: &DualState<T>) -> Mat<T> {
    hessian_at(&grad_energy(z))
}

/// `Var_p(v) = Σ p(i)(v(i) − E_p v)²`, evaluated in centered form.
pub fn variance<T: Scalar>(p: &[T], v: &[T]) -> T {
    let mean = dot(p, v);
    p.iter().zip(v).map(|(&pi, &vi)| pi * (vi - mean) * (vi - mean)).sum()
}

fn check_len<T>(v: &[T], m: usize, n: usize) -> Result<()> {
    if v.len() != m + n {
        return domain(format!("vector of length {} where {} was expected", v.len(), m + n));
    }
    Ok(())
}

/// `‖v‖²_z` at the strategy `w = ∇F(z)`.
pub fn local_norm_sq_at<T: Scalar>(w: &JointStrategy<T>, v: &[T]) -> Result<T> {
    let m = w.m();
    check_len(v, m, w.n())?;
    Ok(variance(w.p(), &v[..m]) + variance(w.q(), &v[m..]))
}

/// `‖v‖²_z = ⟨v, ∇²F(z) v⟩`, via the variance form.
pub fn local_norm_sq<T: Scalar>(z: &DualState<T>, v: &[T]) -> Result<T> {
    local_norm_sq_at(&grad_energy(z), v)
}

/// `Σ u(i)²/w(i)` for `u ∈ S⊥`.
pub fn dual_norm_sq_at<T: Scalar>(w: &JointStrategy<T>, u: &[T]) -> Result<T> {
    let (m, n) = (w.m(), w.n());
    check_len(u, m, n)?;
    let sx: T = u[..m].iter().copied().sum();
    let sy: T = u[m..].iter().copied().sum();
    let tol = T::tol(1e-9) * (T::one() + linalg::norm2(u));
    if sx.abs() > tol || sy.abs() > tol {
        return domain("dual norm is only defined on the complement of the shift directions");
    }
    Ok(u.iter().zip(w.p().iter().chain(w.q())).map(|(&ui, &wi)| ui * ui / wi).sum())
}

pub fn dual_norm_sq<T: Scalar>(z: &DualState<T>, u: &[T]) -> Result<T> {
    dual_norm_sq_at(&grad_energy(z), u)
}

fn check_game_dims<T: Scalar>(a: &PayoffMatrix<T>, m: usize, n: usize) -> Result<()> {
    if a.m() != m || a.n() != n {
        return domain(format!("state is {m}x{n} but the matrix is {}x{}", a.m(), a.n()));
    }
    Ok(())
}

/// `Var_p(Aq) + Var_q(Aᵀp)` at a strategy.
pub fn dissipation_at<T: Scalar>(a: &PayoffMatrix<T>, w: &JointStrategy<T>) -> Result<T> {
    check_game_dims(a, w.m(), w.n())?;
    Ok(variance(w.p(), &a.apply(w.q())) + variance(w.q(), &a.apply_transpose(w.p())))
}

/// `‖J∇F(z)‖²_z`
pub fn dissipation_term<T: Scalar>(a: &PayoffMatrix<T>, z: &DualState<T>) -> Result<T> {
    dissipation_at(a, &grad_energy(z))
}

/// `KL(p, p')` between two strictly positive vectors given by log-probabilities.
pub fn kl_from_logs<T: Scalar>(log_a: &[T], a: &[T], log_b: &[T]) -> T {
    a.iter().zip(log_a).zip(log_b).map(|((&ai, &la), &lb)| ai * (la - lb)).sum()
}

/// `D_F(z_to, z_from)`. For the log-sum-exp energy this equals
/// `KL(∇F(z_from), ∇F(z_to))`, which is how it is evaluated: a sum of
/// non-negative-in-aggregate terms instead of a difference of large energies.
pub fn bregman_divergence<T: Scalar>(z_to: &DualState<T>, z_from: &DualState<T>) -> T {
    let w_to = grad_energy(z_to);
    let w_from = grad_energy(z_from);
    let d = kl_from_logs(w_from.log_p(), w_from.p(), w_to.log_p())
        + kl_from_logs(w_from.log_q(), w_from.q(), w_to.log_q());
    d.max(T::zero())
}

/// `∇R(w) = (log p + 𝟙, log q + 𝟙)`.
pub fn entropy_gradient<T: Scalar>(w: &JointStrategy<T>) -> DualState<T> {
    let x = w.log_p().iter().map(|&l| l + T::one()).collect();
    let y = w.log_q().iter().map(|&l| l + T::one()).collect();
    DualState::new(x, y)
}

/// `R(w) = Σ p log p + Σ q log q`.
pub fn neg_entropy<T: Scalar>(w: &JointStrategy<T>) -> T {
    let part = |v: &[T], l: &[T]| v.iter().zip(l).map(|(&a, &la)| a * la).sum::<T>();
    part(w.p(), w.log_p()) + part(w.q(), w.log_q())
}

/// Block-diagonal orthonormal basis of `S⊥` in `ℝ^{m+n}`.
pub fn s_perp_basis<T: Scalar>(m: usize, n: usize) -> Mat<T> {
    let um: Mat<T> = linalg::ones_complement_basis(m);
    let un: Mat<T> = linalg::ones_complement_basis(n);
    let k = (m - 1) + (n - 1);
    let mut b = Mat::zeros(m + n, k);
    for i in 0..m {
        for j in 0..m - 1 {
            b[(i, j)] = um[(i, j)];
        }
    }
    for i in 0..n {
        for j in 0..n - 1 {
            b[(m + i, m - 1 + j)] = un[(i, j)];
        }
    }
    b
}

/// Local Hessian stability check between `z` and `z2`.
///
/// With `α = ‖z − z2‖_∞` it tests `e^{−2α}∇²F(z) ⪯ ∇²F(z2) ⪯ e^{2α}∇²F(z)` on
/// `S⊥` through the smallest eigenvalues of both restricted differences, and
/// records the tightest factor `max(λ_max, 1/λ_min)` of the pencil
/// `(∇²F(z2), ∇²F(z))`, which must not exceed `e^{2α}`.
pub fn lhs_check<T: Scalar>(z: &DualState<T>, z2: &DualState<T>) -> CheckReport {
    let (m, n) = (z.m(), z.n());
    let mut report = CheckReport::new("lhs", format!("{m}x{n}"));
    let alpha = linalg::norm_inf(&z.diff(z2));
    let basis = s_perp_basis::<T>(m, n);
    let h1 = hessian_energy(z).compress(&basis);
    let h2 = hessian_energy(z2).compress(&basis);
    let up = (alpha * T::lit(2.0)).exp();
    let down = T::one() / up;
    let lower = h2.sub(&h1.scale(down));
    let upper = h1.scale(up).sub(&h2);
    let tol = 1e-10;
    let lo_min = linalg::symmetric_eigenvalues(&lower).first().copied().unwrap_or_else(T::zero);
    let up_min = linalg::symmetric_eigenvalues(&upper).first().copied().unwrap_or_else(T::zero);
    report.param("alpha", alpha.to_f64_lossy());
    report.observe(0, lo_min.to_f64_lossy(), tol);
    report.observe(0, up_min.to_f64_lossy(), tol);
    if let Some(l) = linalg::cholesky(&h1) {
        let li = linalg::lower_triangular_inverse(&l);
        let pencil = li.matmul(&h2).matmul(&li.transpose());
        let ev = linalg::symmetric_eigenvalues(&pencil);
        if let (Some(&lo), Some(&hi)) = (ev.first(), ev.last()) {
            let factor = hi.max(T::one() / lo);
            report.detail("tightest_factor", factor.to_f64_lossy());
            report.detail("allowed_factor", up.to_f64_lossy());
        }
    } else {
        report.note("restricted Hessian at z is not numerically definite; factor not computed");
    }
    report
}

/// Relative tolerance on the decomposition residual in [`dual_from_primal`].
const PREIMAGE_RESIDUAL_TOL: f64 = 1e-8;

/// A dual point in the effective space whose softmax image is `w`.
///
/// The canonical game uses the closed form `x(1) = δp·log(p(1)/p(2))`,
/// `x(2) = x(1)(1 − 1/δp)` (and likewise for `y`). Other games decompose
/// `∇R(w)` over an orthonormal basis of the effective space plus the two shift
/// directions; for games with non-zero value the two overlap and the
/// minimum-norm solution is returned (see [`preimage_is_unique`]).
pub fn dual_from_primal<T: Scalar>(game: &Game<T>, w: &JointStrategy<T>) -> Result<DualState<T>> {
    let a = &game.matrix;
    game.require_nash()?;
    check_game_dims(a, w.m(), w.n())?;
    if let Some((dp, dq)) = a.canonical_params() {
        let x1 = dp * (w.log_p()[0] - w.log_p()[1]);
        let y1 = dq * (w.log_q()[0] - w.log_q()[1]);
        let x = vec![x1, x1 * (T::one() - T::one() / dp)];
        let y = vec![y1, y1 * (T::one() - T::one() / dq)];
        return Ok(DualState::new(x, y).effective(true));
    }
    let (m, n) = (a.m(), a.n());
    let v = entropy_gradient(w).concat();
    let q = effective_space_basis(a);
    let project_q = |u: &[T]| -> Vec<T> {
        let mut out = vec![T::zero(); m + n];
        for b in &q {
            linalg::axpy(dot(b, u), b, &mut out);
        }
        out
    };
    let residual_of = |u: &[T]| linalg::sub(u, &project_q(u));
    // Solve (I − QQᵀ) S d = (I − QQᵀ) v for the shift coefficients d.
    let mut s1 = vec![T::zero(); m + n];
    let mut s2 = vec![T::zero(); m + n];
    s1[..m].iter_mut().for_each(|e| *e = T::one());
    s2[m..].iter_mut().for_each(|e| *e = T::one());
    let cols = [residual_of(&s1), residual_of(&s2)];
    let pm = Mat::from_columns(m + n, &cols);
    let rhs = residual_of(&v);
    let d = linalg::least_squares_min_norm(&pm, &rhs, T::tol(1e-12));
    let mut shifted = v.clone();
    linalg::axpy(-d[0], &s1, &mut shifted);
    linalg::axpy(-d[1], &s2, &mut shifted);
    let z = project_q(&shifted);
    let resid = linalg::norm2(&linalg::sub(&shifted, &z));
    if resid > T::tol(PREIMAGE_RESIDUAL_TOL) * (T::one() + linalg::norm2(&v)) {
        return Err(Error::NumericalRank(format!(
            "decomposition residual {resid} exceeds tolerance"
        )));
    }
    Ok(DualState::from_concat(&z, m).effective(true))
}

/// Whether the preimage in the effective space is unique, which holds exactly
/// for games of value zero.
pub fn preimage_is_unique<T: Scalar>(game: &Game<T>) -> bool {
    game.nash.as_ref().is_some_and(|ne| ne.value.abs() <= T::tol(1e-12) * (T::one() + game.matrix.a_max()))
}

/// Orthonormal basis of `Span(J·W)`, from `J` applied to the vertex pairs
/// `(e_i, f_1)` and `(e_1, f_j)`, which span the same space as all `m·n` pairs.
pub fn effective_space_basis<T: Scalar>(a: &PayoffMatrix<T>) -> Vec<Vec<T>> {
    let (m, n) = (a.m(), a.n());
    let vertex = |i: usize, j: usize| -> Vec<T> {
        let mut u = vec![T::zero(); m];
        let mut v = vec![T::zero(); n];
        u[i] = T::one();
        v[j] = T::one();
        let (top, bottom) = a.apply_skew(&u, &v);
        top.into_iter().chain(bottom).collect()
    };
    let mut gens = Vec::with_capacity(m + n);
    for i in 0..m {
        gens.push(vertex(i, 0));
    }
    for j in 1..n {
        gens.push(vertex(0, j));
    }
    linalg::gram_schmidt(&gens, T::tol(1e-12))
}

/// Projection of a dual point onto `S⊥`, as a convenience around [`project_s_perp`].
pub fn project_dual<T: Scalar>(z: &DualState<T>) -> DualState<T> {
    let v = project_s_perp(&z.concat(), z.m(), z.n()).expect("dimensions come from the state");
    DualState::from_concat(&v, z.m())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{build_canonical_2x2, make_instance, InstanceFamily};

    fn z(x: &[f64], y: &[f64]) -> DualState {
        DualState::new(x.to_vec(), y.to_vec())
    }

    #[test]
    fn energy_examples() {
        assert!((energy(&z(&[0.0, 0.0], &[0.0, 0.0])) - 2.0 * 2f64.ln()).abs() < 1e-15);
        let e = energy(&z(&[1000.0, 0.0], &[0.0, 0.0]));
        let expect = 1000.0 + (-1000f64).exp().ln_1p() + 2f64.ln();
        assert!((e - expect).abs() < 1e-12);
        let shifted = energy(&z(&[3.0, 3.0, 3.0], &[-1.0, -1.0]));
        assert!((shifted - (3f64.ln() + 2f64.ln() + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn softmax_of_canonical_line() {
        let dp = 0.3;
        let x1 = 0.7;
        let w = grad_energy(&z(&[x1, x1 * (1.0 - 1.0 / dp)], &[0.0, 0.0]));
        let sig = 1.0 / (1.0 + (-x1 / dp).exp());
        assert!((w.p()[0] - sig).abs() < 1e-15);
    }

    #[test]
    fn hessian_at_origin() {
        let h = hessian_energy(&z(&[0.0, 0.0], &[0.0, 0.0]));
        assert_eq!(h[(0, 0)], 0.25);
        assert_eq!(h[(0, 1)], -0.25);
        assert_eq!(h[(2, 3)], -0.25);
        assert_eq!(h[(0, 2)], 0.0);
        let v = h.mul_vec(&[1.0, 1.0, 0.0, 0.0]);
        assert!(v.iter().all(|a| a.abs() < 1e-16));
    }

    #[test]
    fn local_norm_uniform_example() {
        let s = local_norm_sq(&z(&[0.0, 0.0], &[0.0, 0.0]), &[1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(local_norm_sq(&z(&[0.0, 0.0], &[0.0, 0.0]), &[1.0]).is_err());
    }

    #[test]
    fn dual_norm_rejects_shifts() {
        let zz = z(&[0.3, -0.1], &[0.2, 0.0]);
        assert!(dual_norm_sq(&zz, &[1.0, 1.0, 0.0, 0.0]).is_err());
        assert_eq!(dual_norm_sq(&zz, &[0.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn bregman_matches_direct_definition() {
        let a = z(&[0.3, -0.8, 0.1], &[1.2, 0.0]);
        let b = z(&[-0.2, 0.4, 0.0], &[0.1, 0.5]);
        let wb = grad_energy(&b);
        let direct = energy(&a) - energy(&b) - dot(&wb.concat(), &a.diff(&b));
        assert!((bregman_divergence(&a, &b) - direct).abs() < 1e-14);
        let shifted = z(&[1.3, 0.2, 1.1], &[-0.8, -0.9]);
        assert!(bregman_divergence(&shifted, &z(&[0.3, -0.8, 0.1], &[0.1, 0.0])) < 1e-15);
    }

    #[test]
    fn entropy_gradient_examples() {
        let w = JointStrategy::<f64>::uniform(2, 2);
        let g = entropy_gradient(&w);
        assert!(g.concat().iter().all(|v| (v - (0.5f64.ln() + 1.0)).abs() < 1e-15));
        let back = grad_energy(&g);
        assert!(back.max_abs_diff(&w) < 1e-15);
    }

    #[test]
    fn strategy_validation() {
        assert!(JointStrategy::from_probs(vec![0.5, 0.5], vec![1.0, 0.0]).is_err());
        assert!(JointStrategy::from_probs(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(JointStrategy::from_probs(vec![0.25, 0.75], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn lhs_trivial_cases() {
        let a = z(&[0.3, -0.8], &[1.2, 0.0]);
        let r = lhs_check(&a, &a);
        assert!(r.pass);
        assert!((r.details["tightest_factor"] - 1.0).abs() < 1e-12);
        let s = z(&[1.3, 0.2], &[0.7, -0.5]);
        let r = lhs_check(&a, &s);
        assert!(r.pass && (r.details["tightest_factor"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_preimage_of_nash() {
        let inst = make_instance::<f64>(&InstanceFamily::Canonical2x2 { delta_p: 0.2, delta_q: 0.35 }).unwrap();
        let game = inst.game();
        let zs = dual_from_primal(&game, inst.nash.joint().unwrap()).unwrap();
        assert!((zs.x[0] - 0.2 * (0.8f64 / 0.2).ln()).abs() < 1e-15);
        assert!((zs.y[0] - 0.35 * (0.65f64 / 0.35).ln()).abs() < 1e-15);
        let a = build_canonical_2x2(0.5f64, 0.5).unwrap();
        let g = Game::from_2x2(a).unwrap();
        let z0 = dual_from_primal(&g, &JointStrategy::uniform(2, 2)).unwrap();
        assert!(z0.x[0].abs() < 1e-16 && z0.y[0].abs() < 1e-16);
    }

    #[test]
    fn general_preimage_round_trips_nonzero_value() {
        let inst = make_instance::<f64>(&InstanceFamily::Diagonal10 { delta: 0.2 }).unwrap();
        let game = inst.game();
        assert!(!preimage_is_unique(&game));
        let p: Vec<f64> = (1..=10).map(|i| i as f64 / 55.0).collect();
        let w = JointStrategy::from_probs(p.clone(), p.iter().rev().copied().collect()).unwrap();
        let zz = dual_from_primal(&game, &w).unwrap();
        assert!(grad_energy(&zz).max_abs_diff(&w) < 1e-12);
        assert!(zz.pair(inst.nash.joint().unwrap()).abs() < 1e-10);
    }
}
