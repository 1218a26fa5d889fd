//! Geometric best approximations: the stream of wedge sides produced by
//! staircase moves, an independent plane-unfolding oracle, and the
//! definitional / immersed-rectangle checks relating the two.
//!
//! A saddle connection in the bundle `Γ_i` starts at the wedge vertex of
//! quadrilateral `q_i` and points upward.  A right connection `v`
//! (`Re v > 0`) is a geometric best approximation when every right
//! connection of the bundle strictly below it is strictly wider:
//! `Im u < Im v ⟹ |Re u| > |Re v|` (and symmetrically on the left).  The
//! renormalization scheme produces exactly these as the successive values
//! of the wedge sides, with strictly increasing heights and strictly
//! decreasing widths; [`unfold_enumerate`] recovers the same set from
//! nothing but exact plane geometry, so each mechanism checks the other.

use std::collections::HashSet;

use thiserror::Error;

use crate::combinatorics::Side;
use crate::exactnum::Scalar;
use crate::iet::{trace_segment, IetError};
use crate::moves::{run, run_backward, MoveError, Policy, RunOutcome, StopRule};
use crate::quadrangulation::{Quadrangulation, Vec2};

/// Errors from stream production and the unfolding oracle.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DioError {
    /// The run reached a vertical diagonal before producing the requested
    /// stream prefix; `step` is the failing move index.
    #[error("run stops on a vertical diagonal at step {step}, before the requested limit")]
    KeaneStopBeforeLimit { step: usize },
    /// A scripted run ended before producing the requested stream prefix.
    #[error("script exhausted before the requested limit")]
    ScriptExhausted,
    /// The oracle visited more developed charts than the configured cap.
    #[error("unfolding exceeded the chart budget of {0}")]
    ChartBudgetExceeded(usize),
    #[error(transparent)]
    Trace(#[from] IetError),
    #[error(transparent)]
    Move(#[from] MoveError),
}

/// Which side of a wedge (or its diagonal) a produced connection was.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    WedgeLeft,
    WedgeRight,
    Diagonal,
}

/// A saddle connection, identified with its displacement vector, tagged
/// with its bundle and the move index of its first appearance (0 for the
/// initial wedges, negative for backward moves).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SaddleConnection {
    pub bundle: usize,
    pub disp: Vec2,
    pub role: Role,
    pub step: i64,
}

impl SaddleConnection {
    pub fn new(bundle: usize, disp: Vec2, role: Role, step: i64) -> Self {
        debug_assert!(disp.y.is_positive(), "connections point upward");
        match role {
            Role::WedgeLeft => debug_assert!(disp.x.is_negative()),
            Role::WedgeRight => debug_assert!(disp.x.is_positive()),
            Role::Diagonal => {}
        }
        SaddleConnection { bundle, disp, role, step }
    }
}

/// The rectangle `|x| ≤ rx`, `0 < y ≤ ty` searched by the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBox {
    pub rx: Scalar,
    pub ty: Scalar,
}

impl SearchBox {
    pub fn new(rx: Scalar, ty: Scalar) -> Self {
        assert!(rx.is_positive() && ty.is_positive(), "search box must be positive");
        SearchBox { rx, ty }
    }

    fn contains(&self, v: &Vec2) -> bool {
        v.y.is_positive() && v.y <= self.ty && v.x.abs() <= self.rx
    }
}

/// How far [`best_approx_stream`] runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamLimit {
    /// This many stream entries (the initial wedge side counts as one).
    Count(usize),
    /// All entries with `y` at most this bound, with the run continued far
    /// enough to witness the next entry exceeding it.
    Height(Scalar),
}

/// The sequence of distinct values taken by `w_{bundle,side}` along a run
/// under `policy`, in order of first appearance (move index recorded in
/// `step`, starting with the initial side at step 0).  Heights strictly
/// increase and widths strictly decrease along the stream.
pub fn best_approx_stream(
    q: &Quadrangulation,
    policy: &Policy,
    bundle: usize,
    side: Side,
    limit: &StreamLimit,
) -> Result<Vec<SaddleConnection>, DioError> {
    let role = match side {
        Side::Left => Role::WedgeLeft,
        Side::Right => Role::WedgeRight,
    };
    if matches!(limit, StreamLimit::Count(0)) {
        return Ok(Vec::new());
    }
    let mut budget = 64usize;
    loop {
        let result = run(q, policy, &StopRule::Steps(budget))?;
        let mut out = vec![SaddleConnection::new(
            bundle,
            q.side(bundle, side).clone(),
            role,
            0,
        )];
        if matches!(limit, StreamLimit::Count(1)) {
            return Ok(out);
        }
        let mut satisfied = false;
        let mut state = q.clone();
        'replay: for (m, record) in result.log.records.iter().enumerate() {
            state = crate::moves::apply_move(&state, &record.cycle)?;
            let w = state.side(bundle, side);
            if *w == out.last().expect("non-empty").disp {
                continue;
            }
            match limit {
                StreamLimit::Count(n) => {
                    out.push(SaddleConnection::new(bundle, w.clone(), role, (m + 1) as i64));
                    if out.len() >= *n {
                        satisfied = true;
                        break 'replay;
                    }
                }
                StreamLimit::Height(ty) => {
                    if w.y > *ty {
                        // The first entry beyond the bound witnesses that
                        // the collected prefix is complete.
                        satisfied = true;
                        break 'replay;
                    }
                    out.push(SaddleConnection::new(bundle, w.clone(), role, (m + 1) as i64));
                }
            }
        }
        if satisfied {
            if let StreamLimit::Height(ty) = limit {
                out.retain(|sc| sc.disp.y <= *ty);
            }
            return Ok(out);
        }
        match result.outcome {
            RunOutcome::KeaneStop { step, .. } => {
                return Err(DioError::KeaneStopBeforeLimit { step })
            }
            RunOutcome::ScriptExhausted => return Err(DioError::ScriptExhausted),
            RunOutcome::Completed => {
                budget = budget.checked_mul(2).expect("stream budget overflow");
            }
        }
    }
}

/// All distinct wedge sides appearing within `n_back` backward and `n_fwd`
/// forward greedy atomic steps of `q`, steps tagged with the (negative for
/// backward) atomic step of first appearance walking outward from 0.
pub fn produced_wedges(
    q: &Quadrangulation,
    n_fwd: usize,
    n_back: usize,
) -> Result<Vec<SaddleConnection>, DioError> {
    let mut seen: HashSet<(usize, Vec2)> = HashSet::new();
    let mut out = Vec::new();
    let mut record = |state: &Quadrangulation, step: i64, out: &mut Vec<SaddleConnection>| {
        for i in 1..=state.k() {
            for side in [Side::Left, Side::Right] {
                let w = state.side(i, side).clone();
                if seen.insert((i, w.clone())) {
                    let role = match side {
                        Side::Left => Role::WedgeLeft,
                        Side::Right => Role::WedgeRight,
                    };
                    out.push(SaddleConnection::new(i, w, role, step));
                }
            }
        }
    };
    record(q, 0, &mut out);
    for (m, state) in run_backward(q, n_back)?.iter().enumerate() {
        record(state, -((m + 1) as i64), &mut out);
    }
    let mut state = q.clone();
    for m in 1..=n_fwd {
        state = crate::moves::step_greedy(&state)?;
        record(&state, m as i64, &mut out);
    }
    Ok(out)
}

/// A developed chart reached by the visibility search: chart index, the
/// plane offset of its wedge vertex, and the open cone of directions (from
/// `a` counterclockwise to `b`, always of width < π) under which segments
/// from the origin reach it through the recorded chain of edge crossings.
#[derive(Debug, Clone)]
struct ConeState {
    chart: usize,
    offset: Vec2,
    a: Vec2,
    b: Vec2,
}

fn in_open_cone(a: &Vec2, b: &Vec2, v: &Vec2) -> bool {
    a.cross_sign(v) > 0 && v.cross_sign(b) > 0
}

/// Intersection of two cones of width < π; `None` when empty.
fn cone_intersect(a1: &Vec2, b1: &Vec2, a2: &Vec2, b2: &Vec2) -> Option<(Vec2, Vec2)> {
    let a = if a1.cross_sign(a2) > 0 { a2 } else { a1 };
    let b = if b1.cross_sign(b2) > 0 { b1 } else { b2 };
    if a.cross_sign(b) > 0 {
        Some((a.clone(), b.clone()))
    } else {
        None
    }
}

const DEFAULT_CHART_BUDGET: usize = 200_000;

/// Enumerates exactly the saddle connections of bundle `bundle` inside
/// `box_` by breadth-first development of quadrilateral charts into the
/// plane with the default chart budget.
///
/// Charts are explored with an exact visibility cone from the origin
/// narrowed at every edge crossing, pruned to charts whose bounding box
/// meets the search box (sound because both coordinates of a ray from the
/// origin are monotone); every candidate singularity image is confirmed
/// independently by [`trace_segment`], the wedge sides themselves being
/// accepted directly (tracing one's own side reports it as on-edge).
pub fn unfold_enumerate(
    q: &Quadrangulation,
    bundle: usize,
    box_: &SearchBox,
) -> Result<Vec<SaddleConnection>, DioError> {
    unfold_enumerate_with_budget(q, bundle, box_, DEFAULT_CHART_BUDGET)
}

/// [`unfold_enumerate`] with an explicit chart cap; exceeding the cap is
/// an error, never a silent truncation.
pub fn unfold_enumerate_with_budget(
    q: &Quadrangulation,
    bundle: usize,
    box_: &SearchBox,
    budget: usize,
) -> Result<Vec<SaddleConnection>, DioError> {
    let wl = q.side(bundle, Side::Left).clone();
    let wr = q.side(bundle, Side::Right).clone();
    let pl = q.datum().perm_l().inverse();
    let pr = q.datum().perm_r().inverse();
    let east = Vec2::from_ints(1, 0);
    let west = Vec2::from_ints(-1, 0);
    let ml = pl.apply(bundle);
    let mr = pr.apply(bundle);
    let mut frontier = vec![
        ConeState { chart: bundle, offset: Vec2::from_ints(0, 0), a: wr.clone(), b: wl.clone() },
        ConeState {
            chart: ml,
            offset: q.side(ml, Side::Left).neg(),
            a: east,
            b: wr.clone(),
        },
        ConeState {
            chart: mr,
            offset: q.side(mr, Side::Right).neg(),
            a: wl.clone(),
            b: west,
        },
    ];
    // The wedge sides bound the start cones, so the open-cone search never
    // sees them as candidates; admit them directly.
    let mut candidates: HashSet<Vec2> = HashSet::new();
    for w in [&wl, &wr] {
        if box_.contains(w) {
            candidates.insert(w.clone());
        }
    }
    let mut visited = 0usize;
    while let Some(state) = frontier.pop() {
        visited += 1;
        if visited > budget {
            return Err(DioError::ChartBudgetExceeded(budget));
        }
        let o = &state.offset;
        let corners = [
            o.clone(),
            o.add(q.side(state.chart, Side::Right)),
            o.add(&q.diagonal(state.chart)),
            o.add(q.side(state.chart, Side::Left)),
        ];
        // Prune by height: y is monotone along any ray, so a chart wholly
        // above the box never comes back.
        let mut ymin = &corners[0].y;
        for c in &corners[1..] {
            if c.y < *ymin {
                ymin = &c.y;
            }
        }
        if *ymin > box_.ty {
            continue;
        }
        // Prune by x-extent: x is monotone along any ray too, so a chart
        // wholly outside the strip |x| ≤ rx never comes back either.
        let mut xmin = &corners[0].x;
        let mut xmax = &corners[0].x;
        for c in &corners[1..] {
            if c.x < *xmin {
                xmin = &c.x;
            }
            if c.x > *xmax {
                xmax = &c.x;
            }
        }
        if *xmax < -box_.rx.clone() || *xmin > box_.rx {
            continue;
        }
        if ymin.is_positive() {
            // Prune by direction: every candidate reached through this
            // chart lies on a ray of the state cone with height ≥ ymin and
            // |x| ≤ rx, hence with direction strictly inside the fan from
            // (2rx, ymin) to (−2rx, ymin) (doubled so box-boundary
            // candidates stay interior).  An empty intersection means no
            // candidate is ever visible here.
            let span = &box_.rx + &box_.rx;
            let fan_a = Vec2::new(span.clone(), ymin.clone());
            let fan_b = Vec2::new(-span, ymin.clone());
            if cone_intersect(&state.a, &state.b, &fan_a, &fan_b).is_none() {
                continue;
            }
        }
        // Candidate singularity images: visible chart vertices in the box
        // (box membership first: it fails for most corners and is cheaper
        // than the two cone cross products).
        for c in &corners {
            if !c.is_zero() && box_.contains(c) && in_open_cone(&state.a, &state.b, c) {
                candidates.insert(c.clone());
            }
        }
        // Exit edges, counterclockwise; the origin must lie strictly on
        // the interior side for an outward crossing.
        let pl_img = q.datum().perm_l().apply(state.chart);
        let pr_img = q.datum().perm_r().apply(state.chart);
        let inv_l = pl.apply(state.chart);
        let inv_r = pr.apply(state.chart);
        let edges = [
            // bottom-right: o → o+wr, glued under chart π_ℓ⁻¹.
            (0usize, 1usize, inv_l, o.sub(q.side(inv_l, Side::Left))),
            // top-right: o+wr → o+wd.
            (1, 2, pr_img, o.add(q.side(state.chart, Side::Right))),
            // top-left: o+wd → o+wl.
            (2, 3, pl_img, o.add(q.side(state.chart, Side::Left))),
            // bottom-left: o+wl → o, glued under chart π_r⁻¹.
            (3, 0, inv_r, o.sub(q.side(inv_r, Side::Right))),
        ];
        for (ai, bi, next_chart, next_offset) in edges {
            let ea = &corners[ai];
            let eb = &corners[bi];
            // For a counterclockwise edge ea→eb, the origin lies strictly
            // on the interior side exactly when cross(ea, eb) > 0, and
            // that is also the condition for (ea, eb) to bound the open
            // cone of directions crossing the edge outward.  Entry edges,
            // edges through the origin, and edges incident to the origin
            // all fail it.
            if ea.cross_sign(eb) <= 0 {
                continue;
            }
            if let Some((na, nb)) = cone_intersect(&state.a, &state.b, ea, eb) {
                frontier.push(ConeState { chart: next_chart, offset: next_offset, a: na, b: nb });
            }
        }
    }
    let mut out = Vec::new();
    for disp in candidates {
        let confirmed = match trace_segment(q, bundle, &disp) {
            Ok(_) => true,
            Err(IetError::OnEdge) => disp == wl || disp == wr,
            Err(IetError::NotASaddleConnection)
            | Err(IetError::HitsSingularityEarly) => false,
            Err(e) => return Err(DioError::Trace(e)),
        };
        if !confirmed {
            continue;
        }
        let role = match disp.x.signum() {
            s if s < 0 => Role::WedgeLeft,
            s if s > 0 => Role::WedgeRight,
            _ => Role::Diagonal,
        };
        out.push(SaddleConnection::new(bundle, disp, role, 0));
    }
    out.sort_by(|u, v| {
        u.disp
            .y
            .partial_cmp(&v.disp.y)
            .expect("comparable heights")
            .then(u.disp.x.partial_cmp(&v.disp.x).expect("comparable widths"))
    });
    Ok(out)
}

/// Whether `sc` is a geometric best approximation: no connection of the
/// same bundle and side lies strictly below it without being strictly
/// wider.  Decided by oracle enumeration over the box `|x| ≤ |Re sc|`,
/// `y ≤ Im sc`.
pub fn is_best_approximation(q: &Quadrangulation, sc: &SaddleConnection) -> Result<bool, DioError> {
    let box_ = SearchBox::new(sc.disp.x.abs(), sc.disp.y.clone());
    let found = unfold_enumerate(q, sc.bundle, &box_)?;
    let same_side = |u: &SaddleConnection| u.disp.x.signum() == sc.disp.x.signum();
    let definitional = !found
        .iter()
        .any(|u| same_side(u) && u.disp.y < sc.disp.y && u.disp.x.abs() <= sc.disp.x.abs());
    Ok(definitional)
}

/// The immersed-rectangle criterion: no enumerated connection of the
/// bundle lies strictly inside the axis-aligned rectangle spanned by `sc`.
/// Equivalent to [`is_best_approximation`] away from ties in `|x|`.
pub fn rectangle_criterion(q: &Quadrangulation, sc: &SaddleConnection) -> Result<bool, DioError> {
    let box_ = SearchBox::new(sc.disp.x.abs(), sc.disp.y.clone());
    let found = unfold_enumerate(q, sc.bundle, &box_)?;
    Ok(!found.iter().any(|u| {
        u.disp.x.signum() == sc.disp.x.signum()
            && u.disp.x.abs() < sc.disp.x.abs()
            && u.disp.y < sc.disp.y
    }))
}

/// Checks the height bound `min{Im v : v best approx in the bundle,
/// |Re v| < r} < Area(X)/r` by running the greedy stream on both sides
/// until a wedge side narrower than `r` appears.
pub fn area_bound_check(q: &Quadrangulation, bundle: usize, r: &Scalar) -> Result<bool, DioError> {
    assert!(r.is_positive(), "width bound must be positive");
    let bound = q.area().checked_div(r).expect("positive width bound");
    let mut min_height: Option<Scalar> = None;
    for side in [Side::Left, Side::Right] {
        // Heights increase and widths decrease along the stream, so the
        // first entry narrower than r has the least height on its side.
        let mut count = 4usize;
        let first = loop {
            let stream =
                best_approx_stream(q, &Policy::Greedy, bundle, side, &StreamLimit::Count(count))?;
            if let Some(sc) = stream.iter().find(|sc| sc.disp.x.abs() < *r) {
                break sc.clone();
            }
            count = count.checked_mul(2).expect("stream length overflow");
        };
        let h = first.disp.y;
        if min_height.as_ref().map_or(true, |m| h < *m) {
            min_height = Some(h);
        }
    }
    Ok(min_height.expect("both sides examined") < bound)
}
