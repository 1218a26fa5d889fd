//! Wedge vectors, the full quadrangulation state, validation of train-track
//! and sign constraints, diagonals, slantedness, area, and the `.quad` text
//! format.
//!
//! A quadrangulation is a combinatorial datum (π_ℓ, π_r) plus one wedge per
//! index: a left-slanted and a right-slanted saddle-connection vector based
//! at the same singularity.  The quadrilateral over wedge `i` has vertices
//! `0, w_{i,r}, w_{i,d}, w_{i,ℓ}` where the forward diagonal is
//! `w_{i,d} = w_{i,ℓ} + w_{π_ℓ(i),r} = w_{i,r} + w_{π_r(i),ℓ}`; the equality
//! of the two sums is the train-track relation that makes the quadrilaterals
//! close up into a surface.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::combinatorics::{CombDatum, CombError, Perm, Side};
use crate::exactnum::{NumError, Scalar};

/// Errors from quadrangulation construction and serialization.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadError {
    #[error("syntax error: {0}")]
    SyntaxError(String),
    #[error("validation failed: {0:?}")]
    ValidationFailed(Vec<Violation>),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Comb(#[from] CombError),
}

/// A single named invariant violation, reported by [`Quadrangulation::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `w_{i,ℓ} + w_{π_ℓ(i),r} ≠ w_{i,r} + w_{π_r(i),ℓ}`.
    TrainTrack { index: usize },
    /// A wedge side with the wrong strict sign (`left.x < 0 < right.x`,
    /// both `y > 0`).
    WedgeSign { index: usize, side: Side, axis: char },
    /// ⟨π_ℓ, π_r⟩ not transitive.
    NotTransitive,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TrainTrack { index } => {
                write!(f, "train-track relation fails at i={index}")
            }
            Violation::WedgeSign { index, side, axis } => {
                write!(f, "wedge {index} side {side} violates the strict {axis}-sign condition")
            }
            Violation::NotTransitive => write!(f, "datum is not transitive"),
        }
    }
}

/// An exact displacement vector in the plane.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vec2 {
    pub x: Scalar,
    pub y: Scalar,
}

impl Vec2 {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Vec2 { x, y }
    }

    /// Integer-coordinate vector, for fixtures and tests.
    pub fn from_ints(x: i64, y: i64) -> Self {
        Vec2::new(Scalar::from_int(x), Scalar::from_int(y))
    }

    pub fn add(&self, rhs: &Vec2) -> Vec2 {
        Vec2::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }

    pub fn sub(&self, rhs: &Vec2) -> Vec2 {
        Vec2::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }

    pub fn neg(&self) -> Vec2 {
        Vec2::new(-&self.x, -&self.y)
    }

    /// The 2×2 determinant `self.x·rhs.y − self.y·rhs.x`, the exact
    /// orientation predicate underlying every geometric test in this crate.
    pub fn cross(&self, rhs: &Vec2) -> Scalar {
        &(&self.x * &rhs.y) - &(&self.y * &rhs.x)
    }

    /// Exact sign of [`Vec2::cross`] without building the product, via the
    /// integer determinant fast path ([`Scalar::det2_sign`]).
    pub fn cross_sign(&self, rhs: &Vec2) -> i8 {
        Scalar::det2_sign(&self.x, &rhs.y, &self.y, &rhs.x)
    }

    /// Rotation by +90°: `(x, y) ↦ (−y, x)` (multiplication by √−1).
    pub fn rot90(&self) -> Vec2 {
        Vec2::new(-&self.y, self.x.clone())
    }

    /// Rotation by −90°: `(x, y) ↦ (y, −x)` (multiplication by −√−1).
    pub fn rot270(&self) -> Vec2 {
        Vec2::new(self.y.clone(), -&self.x)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.x, self.y)
    }
}

/// A wedge: the pair of saddle connections bounding the vertical-ray
/// triangle at one singularity.  Invariants (strict, exact):
/// `left.x < 0`, `left.y > 0`, `right.x > 0`, `right.y > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Wedge {
    pub left: Vec2,
    pub right: Vec2,
}

impl Wedge {
    pub fn new(left: Vec2, right: Vec2) -> Self {
        Wedge { left, right }
    }

    /// The side vector on the requested side.
    pub fn side(&self, side: Side) -> &Vec2 {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    fn sign_violations(&self, index: usize, out: &mut Vec<Violation>) {
        if !self.left.x.is_negative() {
            out.push(Violation::WedgeSign { index, side: Side::Left, axis: 'x' });
        }
        if !self.left.y.is_positive() {
            out.push(Violation::WedgeSign { index, side: Side::Left, axis: 'y' });
        }
        if !self.right.x.is_positive() {
            out.push(Violation::WedgeSign { index, side: Side::Right, axis: 'x' });
        }
        if !self.right.y.is_positive() {
            out.push(Violation::WedgeSign { index, side: Side::Right, axis: 'y' });
        }
    }
}

/// The slant of a quadrilateral, decided by the exact sign of the forward
/// diagonal's real part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slant {
    /// `Re(w_{i,d}) > 0`.
    LeftSlanted,
    /// `Re(w_{i,d}) < 0`.
    RightSlanted,
    /// `Re(w_{i,d}) = 0` — a vertical saddle connection (Keane stop).
    VerticalDiagonal,
}

/// A labelled quadrangulation: datum plus one wedge per index.
///
/// Construction does not validate; call [`Quadrangulation::validate`] or use
/// [`Quadrangulation::validated`].  All operations are pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quadrangulation {
    datum: CombDatum,
    wedges: Vec<Wedge>,
}

impl Quadrangulation {
    pub fn new(datum: CombDatum, wedges: Vec<Wedge>) -> Self {
        assert_eq!(datum.k(), wedges.len(), "wedge count must match k");
        Quadrangulation { datum, wedges }
    }

    /// Builds and validates in one step.
    pub fn validated(datum: CombDatum, wedges: Vec<Wedge>) -> Result<Self, QuadError> {
        let q = Quadrangulation::new(datum, wedges);
        q.validate().map_err(QuadError::ValidationFailed)?;
        Ok(q)
    }

    pub fn k(&self) -> usize {
        self.wedges.len()
    }

    pub fn datum(&self) -> &CombDatum {
        &self.datum
    }

    pub fn wedges(&self) -> &[Wedge] {
        &self.wedges
    }

    /// Wedge `i` (1-based).
    pub fn wedge(&self, i: usize) -> &Wedge {
        &self.wedges[i - 1]
    }

    /// Side vector `w_{i,side}` (1-based).
    pub fn side(&self, i: usize, side: Side) -> &Vec2 {
        self.wedge(i).side(side)
    }

    /// Checks every invariant; `Ok(())` iff all hold, otherwise the full
    /// list of named violations.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if !self.datum.is_transitive() {
            out.push(Violation::NotTransitive);
        }
        for (idx, w) in self.wedges.iter().enumerate() {
            w.sign_violations(idx + 1, &mut out);
        }
        for i in 1..=self.k() {
            let via_left = self.side(i, Side::Left).add(self.side(self.datum.perm_l().apply(i), Side::Right));
            let via_right = self.side(i, Side::Right).add(self.side(self.datum.perm_r().apply(i), Side::Left));
            if via_left != via_right {
                out.push(Violation::TrainTrack { index: i });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// The forward diagonal `w_{i,d} = w_{i,ℓ} + w_{π_ℓ(i),r}`
    /// (equal to `w_{i,r} + w_{π_r(i),ℓ}` by train-track).
    pub fn diagonal(&self, i: usize) -> Vec2 {
        self.side(i, Side::Left).add(self.side(self.datum.perm_l().apply(i), Side::Right))
    }

    /// The backward diagonal `w_{i,d⁻} = w_{i,r} − w_{i,ℓ}` (its y-part may
    /// have either sign).
    pub fn backward_diagonal(&self, i: usize) -> Vec2 {
        self.side(i, Side::Right).sub(self.side(i, Side::Left))
    }

    /// The slant of quadrilateral `i`.
    pub fn slant(&self, i: usize) -> Slant {
        match self.diagonal(i).x.signum() {
            1 => Slant::LeftSlanted,
            -1 => Slant::RightSlanted,
            _ => Slant::VerticalDiagonal,
        }
    }

    /// Total area: sum over `i` of the shoelace area of the quadrilateral
    /// with vertices `(0, w_{i,r}, w_{i,d}, w_{i,ℓ})`.  Strictly positive on
    /// valid input, and invariant under staircase moves and rotation.
    pub fn area(&self) -> Scalar {
        let mut twice = Scalar::zero();
        for i in 1..=self.k() {
            let r = self.side(i, Side::Right);
            let l = self.side(i, Side::Left);
            let d = self.diagonal(i);
            twice = &twice + &(&r.cross(&d) + &d.cross(l));
        }
        twice.checked_div(&Scalar::from_int(2)).expect("divide by two")
    }

    /// The common discriminant of all coordinates (0 for rational data).
    pub fn discriminant(&self) -> u64 {
        self.wedges
            .iter()
            .flat_map(|w| [&w.left.x, &w.left.y, &w.right.x, &w.right.y])
            .map(|s| s.discriminant())
            .find(|&d| d != 0)
            .unwrap_or(0)
    }

    /// The `.quad` text form (see module docs of the file grammar below).
    ///
    /// ```text
    /// quadfmt 1
    /// k=3; perm_l=[2,3,1]; perm_r=[1,3,2]
    /// D=0
    /// wedge=[[-1,1],[3/2,1]]
    /// ...
    /// ```
    ///
    /// `#`-lines are comments (used to record per-fixture certifications,
    /// e.g. absence of horizontal/vertical saddle connections).
    pub fn serialize(&self) -> String {
        let mut out = String::from("quadfmt 1\n");
        out.push_str(&format!(
            "k={}; perm_l={}; perm_r={}\n",
            self.k(),
            fmt_images(self.datum.perm_l()),
            fmt_images(self.datum.perm_r())
        ));
        out.push_str(&format!("D={}\n", self.discriminant()));
        for w in &self.wedges {
            out.push_str(&format!("wedge=[{},{}]\n", w.left, w.right));
        }
        out
    }

    /// Parses and validates the `.quad` text form.
    pub fn deserialize(text: &str) -> Result<Self, QuadError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let err = |msg: &str| QuadError::SyntaxError(msg.to_string());
        match lines.next() {
            Some("quadfmt 1") => {}
            other => return Err(err(&format!("missing `quadfmt 1` header, got {other:?}"))),
        }
        let datum_line = lines.next().ok_or_else(|| err("missing datum line"))?;
        let (k, datum) = parse_datum_line(datum_line)?;
        let d_line = lines.next().ok_or_else(|| err("missing D line"))?;
        let declared_d: u64 = d_line
            .strip_prefix("D=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| err("bad D line"))?;
        let mut wedges = Vec::with_capacity(k);
        for line in lines {
            let body = line
                .strip_prefix("wedge=")
                .ok_or_else(|| err(&format!("unexpected line {line:?}")))?;
            let (left, right) = parse_wedge(body)?;
            wedges.push(Wedge::new(left, right));
        }
        if wedges.len() != k {
            return Err(err(&format!("expected {k} wedges, found {}", wedges.len())));
        }
        let q = Quadrangulation::new(datum, wedges);
        if q.discriminant() != 0 && q.discriminant() != declared_d {
            return Err(err("declared D does not match wedge coordinates"));
        }
        q.validate().map_err(QuadError::ValidationFailed)?;
        Ok(q)
    }
}

/// Parses the `k=…; perm_l=…; perm_r=…` line of the `.quad` format.
fn parse_datum_line(datum_line: &str) -> Result<(usize, CombDatum), QuadError> {
    let err = |msg: &str| QuadError::SyntaxError(msg.to_string());
    let mut k: Option<usize> = None;
    let mut perm_l: Option<Vec<usize>> = None;
    let mut perm_r: Option<Vec<usize>> = None;
    for field in datum_line.split(';') {
        let field = field.trim();
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(&format!("bad datum field {field:?}")))?;
        match key.trim() {
            "k" => {
                k = Some(value.trim().parse().map_err(|_| err("bad k"))?);
            }
            "perm_l" => perm_l = Some(parse_images(value.trim())?),
            "perm_r" => perm_r = Some(parse_images(value.trim())?),
            other => return Err(err(&format!("unknown datum field {other:?}"))),
        }
    }
    let k = k.ok_or_else(|| err("missing k"))?;
    let perm_l = perm_l.ok_or_else(|| err("missing perm_l"))?;
    let perm_r = perm_r.ok_or_else(|| err("missing perm_r"))?;
    if perm_l.len() != k || perm_r.len() != k {
        return Err(err("permutation length does not match k"));
    }
    let datum = CombDatum::new(Perm::from_images(perm_l)?, Perm::from_images(perm_r)?)
        .map_err(|e| match e {
            CombError::NotTransitive => QuadError::ValidationFailed(vec![Violation::NotTransitive]),
            other => QuadError::Comb(other),
        })?;
    Ok((k, datum))
}

/// Parses only the combinatorial datum from a `.quad` file, ignoring any
/// wedge data.  Used by consumers (such as the reachability graph) that
/// need the permutation pair alone.
pub fn deserialize_datum(text: &str) -> Result<CombDatum, QuadError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some("quadfmt 1") => {}
        other => {
            return Err(QuadError::SyntaxError(format!(
                "missing `quadfmt 1` header, got {other:?}"
            )))
        }
    }
    let datum_line = lines
        .next()
        .ok_or_else(|| QuadError::SyntaxError("missing datum line".to_string()))?;
    Ok(parse_datum_line(datum_line)?.1)
}

fn fmt_images(p: &Perm) -> String {
    let imgs: Vec<String> = p.images().iter().map(|i| i.to_string()).collect();
    format!("[{}]", imgs.join(","))
}

fn parse_images(text: &str) -> Result<Vec<usize>, QuadError> {
    let body = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| QuadError::SyntaxError(format!("bad permutation {text:?}")))?;
    body.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| QuadError::SyntaxError(format!("bad permutation entry {v:?}")))
        })
        .collect()
}

/// Splits `[[xl,yl],[xr,yr]]` at top level and parses the four scalars.
fn parse_wedge(text: &str) -> Result<(Vec2, Vec2), QuadError> {
    let err = || QuadError::SyntaxError(format!("bad wedge {text:?}"));
    let body = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(err)?;
    let parts = split_top_level(body).map_err(|_| err())?;
    if parts.len() != 2 {
        return Err(err());
    }
    Ok((parse_vec2(&parts[0])?, parse_vec2(&parts[1])?))
}

fn parse_vec2(text: &str) -> Result<Vec2, QuadError> {
    let err = || QuadError::SyntaxError(format!("bad vector {text:?}"));
    let body = text.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(err)?;
    let parts = split_top_level(body).map_err(|_| err())?;
    if parts.len() != 2 {
        return Err(err());
    }
    let x = Scalar::from_str(&parts[0])?;
    let y = Scalar::from_str(&parts[1])?;
    Ok(Vec2::new(x, y))
}

/// Splits on commas not nested inside brackets or parentheses.
fn split_top_level(text: &str) -> Result<Vec<String>, ()> {
    let mut depth = 0i32;
    let mut parts = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '[' | '(' => {
                depth += 1;
                cur.push(c);
            }
            ']' | ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(());
                }
                cur.push(c);
            }
            ',' if depth == 0 => {
                parts.push(cur.trim().to_string());
                cur = String::new();
            }
            _ => cur.push(c),
        }
    }
    parts.push(cur.trim().to_string());
    if depth != 0 {
        return Err(());
    }
    Ok(parts)
}
