//! Exponent bookkeeping for rescaling, self-improvement and limited-range
//! extrapolation, in exact rational arithmetic.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exponent::{rational_serde, Exponent, Rational};

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

fn ordered(r: &Exponent, rt: &Exponent, st: &Exponent, s: &Exponent) -> Result<()> {
    if !(&Exponent::one() <= r && r < rt && rt < st && st < s) {
        return Err(Error::Ordering(format!("need 1 <= r < r~ < s~ < s, got r = {r}, r~ = {rt}, s~ = {st}, s = {s}")));
    }
    Ok(())
}

/// `1/p ↦ (1/p - 1/s)/(1/r - 1/s)`, the affine map sending `[1/s, 1/r]` onto `[0, 1]`.
pub fn rescale_recip(recip_p: &Rational, r: &Exponent, s: &Exponent) -> Result<Rational> {
    if r >= s {
        return Err(Error::Ordering(format!("need r < s, got r = {r}, s = {s}")));
    }
    Ok((recip_p - s.recip()) / (r.recip() - s.recip()))
}

/// `(p_{r,s}, e)` with `1/p_{r,s} = (1/p - 1/s)/(1/r - 1/s)` and `e = 1/(1/r - 1/s)`.
pub fn rescaled_exponents(p: &Exponent, r: &Exponent, s: &Exponent) -> Result<(Exponent, Rational)> {
    if r < &Exponent::one() {
        return Err(Error::Ordering(format!("r = {r} < 1")));
    }
    if !(r < p && p < s) {
        return Err(Error::Ordering(format!("p = {p} is not in ({r}, {s})")));
    }
    let e = (r.recip() - s.recip()).recip();
    let q = rescale_recip(p.recip(), r, s)?;
    Ok((Exponent::from_recip(q)?, e))
}

/// `r_0 = min(r*, 1 + 1/(2 c_d B - 1))`, so that `r_0' >= 2 c_d B`.
pub fn self_improvement_r0(b: &Rational, r_star: &Exponent, c_d: &Rational) -> Result<Exponent> {
    if *b < Rational::one() {
        return Err(invalid("B", format!("{b} < 1")));
    }
    if *c_d < Rational::one() {
        return Err(invalid("c_d", format!("{c_d} < 1")));
    }
    if r_star <= &Exponent::one() {
        return Err(invalid("r*", format!("{r_star} <= 1")));
    }
    let two = Rational::from_integer(2.into());
    let candidate = Rational::one() + (two * c_d * b - Rational::one()).recip();
    let candidate = Exponent::new(candidate)?;
    Ok(std::cmp::min(candidate, r_star.clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RsChoice {
    pub r: Exponent,
    pub s: Exponent,
    #[serde(with = "rational_serde")]
    pub theta: Rational,
    /// `1 + s/r'`, always `2`.
    pub p: Exponent,
}

/// `1/r = max(1/r_0, 1 - 1/s_0)`, `s = r'`, `θ = 1 - (1/r - 1/s)`.
pub fn choose_rs_for_l2(r0: &Exponent, s0: &Exponent) -> Result<RsChoice> {
    if r0 <= &Exponent::one() {
        return Err(invalid("r0", format!("{r0} <= 1")));
    }
    if s0.is_infinite() {
        return Err(invalid("s0", "must be finite"));
    }
    let from_s0 = Rational::one() - s0.recip();
    let recip_r = std::cmp::max(r0.recip().clone(), from_s0);
    let r = Exponent::from_recip(recip_r)?;
    let s = r.conjugate()?;
    let theta = Rational::one() - (r.recip() - s.recip());
    // p = 1 + s / r' = 1 + (1/r') / (1/s).
    let p = Exponent::new(Rational::one() + r.conjugate()?.recip() / s.recip())?;
    debug_assert!(&r <= r0 && &s >= s0 && theta.is_positive() && theta < Rational::one());
    Ok(RsChoice { r, s, theta, p })
}

/// `1/t = ((1/r)(1/s~) - (1/r~)(1/s)) / (1/r - 1/s)`.
pub fn lr_rescale_t(r: &Exponent, rt: &Exponent, st: &Exponent, s: &Exponent) -> Result<Exponent> {
    ordered(r, rt, st, s)?;
    let num = r.recip() * st.recip() - rt.recip() * s.recip();
    Exponent::from_recip(num / (r.recip() - s.recip()))
}

/// `θ = 1 - (1/r~ - 1/s~)/(1/r - 1/s)` and the exponent `p` of the Lebesgue factor.
pub fn lr_theta_p(r: &Exponent, rt: &Exponent, st: &Exponent, s: &Exponent) -> Result<(Rational, Exponent)> {
    ordered(r, rt, st, s)?;
    let (ir, irt, ist, is) = (r.recip(), rt.recip(), st.recip(), s.recip());
    let theta = Rational::one() - (irt - ist) / (ir - is);
    let num = ist - is + ir - irt;
    let den = ir * (ist - is) + (ir - irt) * is;
    Ok((theta, Exponent::from_recip(den / num)?))
}

/// Exponent data of a weighted Lebesgue space `L^p_{w^e}`: `(1/p, e)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LebesgueExponents {
    pub recip: Rational,
    pub weight_power: Rational,
}

/// Closed form of `([X_{r~,t}]^{1/r})^{1-θ} · (L^p)^θ` for `X = L^q_w`.
pub fn lr_factorization(q: &Exponent, r: &Exponent, rt: &Exponent, st: &Exponent, s: &Exponent) -> Result<LebesgueExponents> {
    let t = lr_rescale_t(r, rt, st, s)?;
    let (theta, p) = lr_theta_p(r, rt, st, s)?;
    let e = (rt.recip() - t.recip()).recip();
    let inner = rescale_recip(q.recip(), rt, &t)? * r.recip();
    let rest = Rational::one() - &theta;
    Ok(LebesgueExponents {
        recip: &rest * inner + &theta * p.recip(),
        weight_power: rest * e * r.recip(),
    })
}

/// Constraints on `ε` for `1/r~ = 1/r - ε`, `1/s~ = 1/s + ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonSearch {
    /// `min(1/r - 1/r*, 1/s* - 1/s)`, from `r~ <= r*` and `s~ >= s*`.
    #[serde(with = "rational_serde")]
    pub supremum: Rational,
    /// Whether the supremum itself satisfies `r~ < s~`.
    pub attained: bool,
    /// Largest admissible value reported: the supremum when attained, else half of it.
    #[serde(with = "rational_serde")]
    pub epsilon: Rational,
}

pub fn largest_epsilon(r: &Exponent, s: &Exponent, r_star: &Exponent, s_star: &Exponent) -> Result<EpsilonSearch> {
    if !(r < r_star && r_star <= s_star && s_star < s) {
        return Err(Error::Ordering(format!("need r < r* <= s* < s, got r = {r}, r* = {r_star}, s* = {s_star}, s = {s}")));
    }
    let a = r.recip() - r_star.recip();
    let b = s_star.recip() - s.recip();
    let supremum = std::cmp::min(a, b);
    let gap = r.recip() - s.recip();
    let attained = Rational::from_integer(2.into()) * &supremum < gap;
    let epsilon = if attained { supremum.clone() } else { &supremum * half() };
    Ok(EpsilonSearch { supremum, attained, epsilon })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Leg {
    pub r: Exponent,
    pub s: Exponent,
    pub p: Exponent,
    /// `1/q = 1/s + 1/r - 1/p`.
    pub q: Exponent,
    /// `1/m = (1/r + 1/s)/2`.
    pub midpoint: Exponent,
    /// `p` rescaled to `(r, s)`.
    pub p_rs: Exponent,
    /// `1/(1/r - 1/s)`.
    #[serde(with = "rational_serde")]
    pub weight_power: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TildeLeg {
    pub r: Exponent,
    pub s: Exponent,
    pub t: Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Improvement {
    #[serde(with = "rational_serde")]
    pub epsilon: Rational,
    pub legs: [TildeLeg; 2],
    #[serde(with = "rational_serde")]
    pub beta: Rational,
    #[serde(with = "rational_serde")]
    pub gamma: Rational,
    #[serde(with = "rational_serde")]
    pub theta: Rational,
    /// Lebesgue factor exponents `1/p_j = (1/r_j + 1/s_j)/2`.
    pub lebesgue: [Exponent; 2],
    /// `(X)_{r~,s~} = (X)_{r,s}^β · (L^{1/(1-γ)})^{1-β}`, checked as affine maps of `1/p`.
    pub beta_gamma_identity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtrapolationPlan {
    #[serde(with = "rational_serde")]
    pub alpha: Rational,
    pub legs: [Leg; 2],
    pub improvement: Option<Improvement>,
}

fn leg(r: &Exponent, s: &Exponent, p: &Exponent) -> Result<Leg> {
    let q = Exponent::from_recip(s.recip() + r.recip() - p.recip())?;
    let midpoint = Exponent::from_recip((r.recip() + s.recip()) * half())?;
    let p_rs = Exponent::from_recip(rescale_recip(p.recip(), r, s)?)?;
    let weight_power = (r.recip() - s.recip()).recip();
    Ok(Leg { r: r.clone(), s: s.clone(), p: p.clone(), q, midpoint, p_rs, weight_power })
}

/// `(β, γ)` for the pair `(r, s)` and the shrunk pair `(r~, s~)`.
pub fn beta_gamma(r: &Exponent, s: &Exponent, rt: &Exponent, st: &Exponent) -> Result<(Rational, Rational)> {
    let gap_t = rt.recip() - st.recip();
    let den = rt.recip() - r.recip() + s.recip() - st.recip();
    if gap_t.is_zero() || den.is_zero() {
        return Err(Error::Ordering(format!("degenerate pairs ({r}, {s}) and ({rt}, {st})")));
    }
    let beta = (r.recip() - s.recip()) / gap_t;
    let gamma = (rt.recip() - r.recip()) / den;
    Ok((beta, gamma))
}

/// Checks `β/p_{r,s} + (1-β)(1-γ) = 1/p~` for every `p` and `β e_{r,s} = e~`,
/// i.e. equality of slopes and intercepts of the two affine maps.
pub fn beta_gamma_identity(r: &Exponent, s: &Exponent, rt: &Exponent, st: &Exponent) -> Result<bool> {
    let (beta, gamma) = beta_gamma(r, s, rt, st)?;
    let rest = Rational::one() - &beta;
    let route = |x: &Rational| -> Result<Rational> { Ok(&beta * rescale_recip(x, r, s)? + &rest * (Rational::one() - &gamma)) };
    let zero = Rational::zero();
    let one = Rational::one();
    let same_at_zero = route(&zero)? == rescale_recip(&zero, rt, st)?;
    let same_at_one = route(&one)? == rescale_recip(&one, rt, st)?;
    let e = (r.recip() - s.recip()).recip();
    let et = (rt.recip() - st.recip()).recip();
    Ok(same_at_zero && same_at_one && beta * e == et)
}

/// Exponent plan for limited-range off-diagonal extrapolation. When `epsilon`
/// is given, the improved pairs `1/r~_j = 1/r_j - ε`, `1/s~_j = 1/s_j + ε` are
/// added together with `t_j`, `θ`, `β`, `γ`.
pub fn limited_range_plan(
    r: [&Exponent; 2],
    s: [&Exponent; 2],
    p1: &Exponent,
    epsilon: Option<&Rational>,
) -> Result<ExtrapolationPlan> {
    for j in 0..2 {
        if r[j] < &Exponent::one() || r[j].is_infinite() {
            return Err(invalid("r", format!("r_{} = {} is not in [1, ∞)", j + 1, r[j])));
        }
        if s[j] <= &Exponent::one() {
            return Err(invalid("s", format!("s_{} = {} is not in (1, ∞]", j + 1, s[j])));
        }
        if s[j].recip() >= r[j].recip() {
            return Err(Error::Ordering(format!("need r_{j1} < s_{j1}, got {} and {}", r[j], s[j], j1 = j + 1)));
        }
    }
    let alpha = r[0].recip() - r[1].recip();
    let alpha_s = s[0].recip() - s[1].recip();
    if alpha != alpha_s {
        return Err(invalid("alpha", format!("1/r1 - 1/r2 = {alpha} but 1/s1 - 1/s2 = {alpha_s}")));
    }
    let recip_p2 = p1.recip() - &alpha;
    if recip_p2.is_negative() {
        return Err(invalid("p1", format!("1/p2 = {recip_p2} is negative")));
    }
    let p = [p1.clone(), Exponent::from_recip(recip_p2)?];
    for j in 0..2 {
        if !(s[j].recip() <= p[j].recip() && p[j].recip() <= r[j].recip()) {
            return Err(invalid("p1", format!("1/p{} = {} is outside [1/s{j1}, 1/r{j1}]", j + 1, p[j].recip(), j1 = j + 1)));
        }
    }
    let legs = [leg(r[0], s[0], &p[0])?, leg(r[1], s[1], &p[1])?];

    let improvement = match epsilon {
        None => None,
        Some(eps) => {
            if !eps.is_positive() {
                return Err(invalid("epsilon", format!("{eps} is not positive")));
            }
            let mut tilde = Vec::with_capacity(2);
            for j in 0..2 {
                let rt = Exponent::from_recip(r[j].recip() - eps)?;
                let st = Exponent::from_recip(s[j].recip() + eps)?;
                let t = lr_rescale_t(r[j], &rt, &st, s[j])?;
                tilde.push(TildeLeg { r: rt, s: st, t });
            }
            let (beta, gamma) = beta_gamma(r[0], s[0], &tilde[0].r, &tilde[0].s)?;
            let (beta2, gamma2) = beta_gamma(r[1], s[1], &tilde[1].r, &tilde[1].s)?;
            if beta != beta2 || gamma != gamma2 {
                return Err(Error::AlgebraMismatch(format!("legs disagree: β = {beta} vs {beta2}, γ = {gamma} vs {gamma2}")));
            }
            let (theta, _) = lr_theta_p(r[0], &tilde[0].r, &tilde[0].s, s[0])?;
            let (theta2, _) = lr_theta_p(r[1], &tilde[1].r, &tilde[1].s, s[1])?;
            if theta != theta2 {
                return Err(Error::AlgebraMismatch(format!("legs disagree: θ = {theta} vs {theta2}")));
            }
            let identity = beta_gamma_identity(r[0], s[0], &tilde[0].r, &tilde[0].s)?
                && beta_gamma_identity(r[1], s[1], &tilde[1].r, &tilde[1].s)?;
            let legs_t: [TildeLeg; 2] = tilde.try_into().expect("two legs");
            Some(Improvement {
                epsilon: eps.clone(),
                legs: legs_t,
                beta,
                gamma,
                theta,
                lebesgue: [legs[0].midpoint.clone(), legs[1].midpoint.clone()],
                beta_gamma_identity: identity,
            })
        }
    };
    Ok(ExtrapolationPlan { alpha, legs, improvement })
}
