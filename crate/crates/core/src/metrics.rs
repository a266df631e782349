//! Distances from a strategy to the Nash equilibrium.

use serde::{Deserialize, Serialize};

use crate::energy::{kl_from_logs, JointStrategy};
use crate::error::{domain, Error, Result};
use crate::games::{duality_gap, Game, NashEquilibrium};
use crate::scalar::Scalar;

/// All distance measures at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRecord<T: Scalar = f64> {
    pub kl: T,
    pub tv: T,
    pub chi2: T,
    pub dg: T,
    pub cross_entropy: T,
}

fn interior_joint<T: Scalar>(ne: &NashEquilibrium<T>) -> Result<&JointStrategy<T>> {
    ne.joint().ok_or_else(|| Error::Domain("distance to a non-interior equilibrium".into()))
}

fn same_dims<T: Scalar>(a: &JointStrategy<T>, b: &JointStrategy<T>) -> Result<()> {
    if a.m() != b.m() || a.n() != b.n() {
        return domain("strategy dimensions differ from the equilibrium");
    }
    Ok(())
}

/// `KL(p*, p) + KL(q*, q)` from stored log-probabilities.
pub fn kl_to_nash<T: Scalar>(ne: &NashEquilibrium<T>, w: &JointStrategy<T>) -> Result<T> {
    let s = interior_joint(ne)?;
    same_dims(s, w)?;
    let kl = kl_from_logs(s.log_p(), s.p(), w.log_p()) + kl_from_logs(s.log_q(), s.q(), w.log_q());
    Ok(kl.max(T::zero()))
}

/// `½‖p* − p‖₁ + ½‖q* − q‖₁`
pub fn tv_to_nash<T: Scalar>(ne: &NashEquilibrium<T>, w: &JointStrategy<T>) -> Result<T> {
    let s = interior_joint(ne)?;
    same_dims(s, w)?;
    let half_l1 = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum::<T>() * T::lit(0.5);
    Ok(half_l1(s.p(), w.p()) + half_l1(s.q(), w.q()))
}

/// `Σ (p*(i) − p(i))²/p(i) + Σ (q*(j) − q(j))²/q(j)`
pub fn chi2_to_nash<T: Scalar>(ne: &NashEquilibrium<T>, w: &JointStrategy<T>) -> Result<T> {
    let s = interior_joint(ne)?;
    same_dims(s, w)?;
    let part = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y) / y).sum::<T>();
    Ok(part(s.p(), w.p()) + part(s.q(), w.q()))
}

/// `Λ = Σ p*(i) log(1/p₀(i)) + Σ q*(j) log(1/q₀(j))`
pub fn cross_entropy<T: Scalar>(ne: &NashEquilibrium<T>, w0: &JointStrategy<T>) -> Result<T> {
    let s = interior_joint(ne)?;
    same_dims(s, w0)?;
    let part = |a: &[T], lb: &[T]| -a.iter().zip(lb).map(|(&x, &l)| x * l).sum::<T>();
    Ok(part(s.p(), w0.log_p()) + part(s.q(), w0.log_q()))
}

/// Every distance at `w`; `cross_entropy` is the cross-entropy of `w` itself.
pub fn distances<T: Scalar>(game: &Game<T>, w: &JointStrategy<T>) -> Result<DistanceRecord<T>> {
    let ne = game.require_nash()?;
    Ok(DistanceRecord {
        kl: kl_to_nash(ne, w)?,
        tv: tv_to_nash(ne, w)?,
        chi2: chi2_to_nash(ne, w)?,
        dg: duality_gap(&game.matrix, w)?,
        cross_entropy: cross_entropy(ne, w)?,
    })
}

fn two_by_two<T: Scalar>(w: &JointStrategy<T>) -> Result<()> {
    if w.m() != 2 || w.n() != 2 {
        return domain("closed form needs a 2x2 strategy");
    }
    Ok(())
}

/// Closed-form KL on the canonical game:
/// `(1−δ)·log((1−δ)/p̃) + δ·log(δ/(1−p̃))` per player.
pub fn kl_canonical_2x2<T: Scalar>(delta_p: T, delta_q: T, w: &JointStrategy<T>) -> Result<T> {
    two_by_two(w)?;
    let part = |d: T, l: &[T]| (T::one() - d) * ((-d).ln_1p() - l[0]) + d * (d.ln() - l[1]);
    Ok(part(delta_p, w.log_p()) + part(delta_q, w.log_q()))
}

/// Closed-form TV on the canonical game: `|1−δp−p̃| + |1−δq−q̃|`, written with
/// the small coordinates as `|p(2) − δp| + |q(2) − δq|`.
pub fn tv_canonical_2x2<T: Scalar>(delta_p: T, delta_q: T, w: &JointStrategy<T>) -> Result<T> {
    two_by_two(w)?;
    Ok((w.p()[1] - delta_p).abs() + (w.q()[1] - delta_q).abs())
}
