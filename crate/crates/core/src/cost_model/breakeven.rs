use crate::error::{Error, Result};
use crate::taxonomy::{validate, Architecture};

use super::{evaluate_unchecked, BlastMode, MarketContext, ThreatProfile};

/// Sentiment at which the cost ordering of `a` and `b` flips.
///
/// Expected cost is affine in s̄, so the difference of the two costs is a
/// line `Δ(s̄) = ΔK + MarketCap · ΔDiscount · (1 − s̄)`, where `ΔK` collects
/// the containment and blast terms. Returns the root when it lies in
/// `[−1, 1]` and `None` otherwise (including parallel, distinct lines).
///
/// Fails with [`Error::Degenerate`] when the two cost lines coincide.
pub fn breakeven_sentiment(
    a: &Architecture,
    b: &Architecture,
    threat: &ThreatProfile,
    ctx: &MarketContext,
    mode: BlastMode,
) -> Result<Option<f64>> {
    let (threat, ctx) = checked(a, b, threat, ctx)?;
    let ca = evaluate_unchecked(a, &threat, &ctx, mode);
    let cb = evaluate_unchecked(b, &threat, &ctx, mode);
    let offset = (ca.expected_containment_loss_usd + ca.expected_blast_cost_usd)
        - (cb.expected_containment_loss_usd + cb.expected_blast_cost_usd);
    let slope = ctx.market_cap_usd * (a.discount_rate - b.discount_rate);

    if slope == 0.0 {
        if offset == 0.0 {
            return Err(coincident(a, b));
        }
        return Ok(None);
    }
    let crossing = 1.0 + offset / slope;
    Ok((-1.0..=1.0).contains(&crossing).then_some(crossing))
}

/// Bisection fallback for [`breakeven_sentiment`].
///
/// Evaluates full expected costs on `[−1, 1]` and halves the bracketing
/// interval until it is narrower than `1e-13`.
pub fn breakeven_sentiment_bisect(
    a: &Architecture,
    b: &Architecture,
    threat: &ThreatProfile,
    ctx: &MarketContext,
    mode: BlastMode,
) -> Result<Option<f64>> {
    let (threat, ctx) = checked(a, b, threat, ctx)?;
    let gap = |s: f64| {
        let at = MarketContext {
            mean_sentiment: s,
            ..ctx.clone()
        };
        evaluate_unchecked(a, &threat, &at, mode).total_usd
            - evaluate_unchecked(b, &threat, &at, mode).total_usd
    };

    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    let (mut f_lo, f_hi) = (gap(lo), gap(hi));
    if f_lo == 0.0 && f_hi == 0.0 {
        return Err(coincident(a, b));
    }
    if f_lo == 0.0 {
        return Ok(Some(lo));
    }
    if f_hi == 0.0 {
        return Ok(Some(hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = gap(mid);
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn checked(
    a: &Architecture,
    b: &Architecture,
    threat: &ThreatProfile,
    ctx: &MarketContext,
) -> Result<(ThreatProfile, MarketContext)> {
    validate(a)?;
    validate(b)?;
    Ok((threat.clone().validate()?, ctx.clone().validate()?))
}

fn coincident(a: &Architecture, b: &Architecture) -> Error {
    Error::Degenerate(format!(
        "{} and {} have identical cost at every sentiment",
        a.cell(),
        b.cell()
    ))
}
