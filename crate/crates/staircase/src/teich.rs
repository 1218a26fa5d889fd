//! The diagonal geodesic flow on the space of quadrangulations: exact
//! systole envelopes, their realizers among produced wedge sides, and
//! Lagrange value estimation.
//!
//! Time along the geodesic is parameterized by `q = e^{4t}`, so that the
//! squared length of a vector `(x, y)` at time `t` — namely
//! `e^{2t}x² + e^{−2t}y²` — becomes, after scaling by the positive factor
//! `e^{2t}`, the *line* `l_v(q) = x²·q + y²`.  Systole comparisons and
//! envelope breakpoints therefore stay inside the scalar field and are
//! computed exactly; floating time values appear only in display code.

use thiserror::Error;

use crate::diophantine::{produced_wedges, DioError, SaddleConnection};
use crate::exactnum::Scalar;
use crate::moves::{MoveError, Policy};
use crate::quadrangulation::{Quadrangulation, Vec2};

/// Errors from envelope construction and geodesic runs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TeichError {
    /// A candidate lies on a coordinate axis and has no interior minimum.
    #[error("vector lies on a coordinate axis")]
    OnAxis,
    /// No candidates were supplied.
    #[error("empty candidate set")]
    EmptyCandidates,
    /// The requested parameter range is empty.
    #[error("empty parameter range")]
    EmptyRange,
    /// The run reached a vertical diagonal before the requested step.
    #[error("run stops on a vertical diagonal at step {step}, before the requested limit")]
    KeaneStopBeforeLimit { step: usize },
    #[error(transparent)]
    Dio(#[from] DioError),
    #[error(transparent)]
    Move(#[from] MoveError),
}

/// Warnings attached to a realizer envelope without invalidating it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeichWarning {
    /// The produced candidate set is not certified to cover the requested
    /// parameter window: the extremal candidates' minimum points do not
    /// bracket `[q_lo, q_hi]`, or only forward moves were requested.
    CorollaryPreconditionUnmet,
}

/// A point on the geodesic, stored as `q = e^{4t} > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicParam {
    qparam: Scalar,
}

impl GeodesicParam {
    pub fn new(qparam: Scalar) -> Result<Self, TeichError> {
        if !qparam.is_positive() {
            return Err(TeichError::EmptyRange);
        }
        Ok(GeodesicParam { qparam })
    }

    pub fn qparam(&self) -> &Scalar {
        &self.qparam
    }

    /// The time coordinate `t = ln(q)/4` as a float, for display only.
    pub fn time(&self) -> f64 {
        self.qparam.to_f64().ln() / 4.0
    }
}

/// One maximal interval of the lower envelope on which a single
/// connection realizes the systole.  `q_to = None` means unbounded above.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSegment {
    pub q_from: GeodesicParam,
    pub q_to: Option<GeodesicParam>,
    pub realizer: SaddleConnection,
}

/// The scaled squared length `x²·q + y²` of `v` at parameter `q`.
pub fn sq_len_at(v: &Vec2, q: &Scalar) -> Scalar {
    &(&(&v.x * &v.x) * q) + &(&v.y * &v.y)
}

/// The parameter minimizing the length of `v` along the geodesic and the
/// (unscaled) squared length there: `qstar = y²/x²`, `min_sq_len = 2|xy|`.
pub fn min_point(v: &Vec2) -> Result<(Scalar, Scalar), TeichError> {
    if v.x.is_zero() || v.y.is_zero() {
        return Err(TeichError::OnAxis);
    }
    let qstar = &(&v.y * &v.y) / &(&v.x * &v.x);
    let min_sq_len = &Scalar::from_int(2) * &(&v.x * &v.y).abs();
    Ok((qstar, min_sq_len))
}

/// The exact lower envelope of the candidates' scaled squared-length
/// lines over `q ∈ [q_lo, q_hi]` (`q_hi = None` for an unbounded window).
/// Breakpoints between adjacent realizers `u`, `v` sit at the exact
/// crossing `q = (y_v² − y_u²)/(x_u² − x_v²)`; segments are ordered and
/// contiguous.
pub fn systole_envelope(
    candidates: &[SaddleConnection],
    q_lo: &Scalar,
    q_hi: Option<&Scalar>,
) -> Result<Vec<EnvelopeSegment>, TeichError> {
    if candidates.is_empty() {
        return Err(TeichError::EmptyCandidates);
    }
    if !q_lo.is_positive() || q_hi.is_some_and(|h| h < q_lo) {
        return Err(TeichError::EmptyRange);
    }
    for sc in candidates {
        if sc.disp.x.is_zero() || sc.disp.y.is_zero() {
            return Err(TeichError::OnAxis);
        }
    }

    // Lines (slope x², intercept y²), steepest first; among equal slopes
    // only the lowest intercept can appear on the envelope.  The steepest
    // line is lowest just above q = 0 and slopes decrease rightward.
    let line = |sc: &SaddleConnection| -> (Scalar, Scalar) {
        (&sc.disp.x * &sc.disp.x, &sc.disp.y * &sc.disp.y)
    };
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, ia) = line(&candidates[a]);
        let (sb, ib) = line(&candidates[b]);
        sb.cmp_exact(&sa).then(ia.cmp_exact(&ib))
    });
    order.dedup_by(|b, a| line(&candidates[*a]).0 == line(&candidates[*b]).0);

    // Crossing parameter of two distinct-slope lines.
    let crossing = |u: usize, v: usize| -> Scalar {
        let (su, iu) = line(&candidates[u]);
        let (sv, iv) = line(&candidates[v]);
        &(&iv - &iu) / &(&su - &sv)
    };

    // Monotone stack: each entry is (candidate, q where it becomes the
    // minimum).  A new, shallower line evicts the top while it takes over
    // at or before the top's own start.
    let mut stack: Vec<(usize, Scalar)> = Vec::new();
    for &idx in &order {
        loop {
            match stack.last() {
                None => {
                    stack.push((idx, Scalar::zero()));
                    break;
                }
                Some(&(top, ref start)) => {
                    let cross = crossing(top, idx);
                    if &cross <= start {
                        stack.pop();
                    } else {
                        stack.push((idx, cross));
                        break;
                    }
                }
            }
        }
    }

    // Clip the full envelope to [q_lo, q_hi].
    let mut segments = Vec::new();
    for (pos, &(idx, ref start)) in stack.iter().enumerate() {
        let end = stack.get(pos + 1).map(|(_, s)| s.clone());
        let from = if start < q_lo { q_lo.clone() } else { start.clone() };
        if q_hi.is_some_and(|h| &from > h) {
            continue;
        }
        let to = match (end, q_hi) {
            (Some(e), Some(h)) => {
                if &e <= q_lo {
                    continue;
                }
                if &e < h { Some(e) } else { Some(h.clone()) }
            }
            (Some(e), None) => {
                if &e <= q_lo {
                    continue;
                }
                Some(e)
            }
            (None, Some(h)) => Some(h.clone()),
            (None, None) => None,
        };
        segments.push(EnvelopeSegment {
            q_from: GeodesicParam::new(from)?,
            q_to: to.map(GeodesicParam::new).transpose()?,
            realizer: candidates[idx].clone(),
        });
    }
    Ok(segments)
}

/// The systole envelope over the wedge sides produced by `n_back`
/// backward and `n_fwd` forward staircase moves from `q`, with warnings
/// when the produced set is not certified to cover the window.
///
/// The geodesic theorem guarantees every realizer is a produced wedge
/// side once the produced range covers the `q`-window; coverage is
/// checked by confirming the extremal candidates' minimum points bracket
/// `[q_lo, q_hi]`.  Forward-only use relies on the one-sided corollary
/// and always carries the warning.
pub fn systole_realizers(
    q: &Quadrangulation,
    policy: &Policy,
    n_back: usize,
    n_fwd: usize,
    q_lo: &Scalar,
    q_hi: &Scalar,
) -> Result<(Vec<EnvelopeSegment>, Vec<TeichWarning>), TeichError> {
    // The produced wedge set is policy independent (elementary moves on
    // disjoint cycles commute); the greedy walk enumerates it.
    let _ = policy;
    let candidates = produced_wedges(q, n_fwd, n_back).map_err(|e| match e {
        DioError::KeaneStopBeforeLimit { step } => TeichError::KeaneStopBeforeLimit { step },
        other => TeichError::Dio(other),
    })?;
    let segments = systole_envelope(&candidates, q_lo, Some(q_hi))?;

    let mut warnings = Vec::new();
    let mut covered_low = false;
    let mut covered_high = false;
    for sc in &candidates {
        let (qstar, _) = min_point(&sc.disp)?;
        covered_low |= &qstar <= q_lo;
        covered_high |= &qstar >= q_hi;
    }
    if n_back == 0 || !covered_low || !covered_high {
        warnings.push(TeichWarning::CorollaryPreconditionUnmet);
    }
    Ok((segments, warnings))
}

/// The per-step Lagrange quantities along a run: at each state,
/// `a = min_i min(|x_ℓ y_ℓ|, |x_r y_r|) / Area`, together with the
/// running minimum (the finite-step estimate of the liminf).  Both the
/// per-step value and the liminf are normalized by the area, which is
/// constant along the run.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeEstimate {
    /// `a(w^{(m)})` for `m = 0..=n`.
    pub per_step: Vec<Scalar>,
    /// Running minima of `per_step`.
    pub running_min: Vec<Scalar>,
}

fn step_value(state: &Quadrangulation, area: &Scalar) -> Scalar {
    let mut best: Option<Scalar> = None;
    for i in 1..=state.k() {
        for side in [crate::combinatorics::Side::Left, crate::combinatorics::Side::Right] {
            let w = state.side(i, side);
            let val = (&w.x * &w.y).abs();
            if best.as_ref().is_none_or(|b| &val < b) {
                best = Some(val);
            }
        }
    }
    &best.expect("nonempty quadrangulation") / area
}

/// Runs `n` elementary moves of `policy` from `q` and reports the
/// Lagrange quantities at every intermediate state.
pub fn lagrange_estimate(
    q: &Quadrangulation,
    policy: &Policy,
    n: usize,
) -> Result<LagrangeEstimate, TeichError> {
    use crate::moves::{apply_move, run, RunOutcome, StopRule};
    let result = run(q, policy, &StopRule::Steps(n))?;
    if result.log.records.len() < n {
        return match result.outcome {
            RunOutcome::KeaneStop { step, .. } => Err(TeichError::KeaneStopBeforeLimit { step }),
            _ => Err(TeichError::Move(MoveError::EmptyMoveSet)),
        };
    }
    let area = q.area();
    let mut state = q.clone();
    let mut per_step = vec![step_value(&state, &area)];
    for record in &result.log.records {
        state = apply_move(&state, &record.cycle)?;
        per_step.push(step_value(&state, &area));
    }
    let mut running_min = Vec::with_capacity(per_step.len());
    let mut min = per_step[0].clone();
    for v in &per_step {
        if v < &min {
            min = v.clone();
        }
        running_min.push(min.clone());
    }
    Ok(LagrangeEstimate { per_step, running_min })
}
