//! Reference quadrangulations used throughout the tests, docs, and shipped
//! fixture files.
//!
//! Each constructor mirrors a `.quad` file under `fixtures/` in the crate
//! root; a test asserts the two stay in sync.  Certifications (absence of
//! horizontal/vertical saddle connections where claimed) are recorded as
//! comments in the fixture files.

use crate::combinatorics::{CombDatum, Perm};
use crate::exactnum::Scalar;
use crate::quadrangulation::{Quadrangulation, Vec2, Wedge};

fn datum(l: &[usize], r: &[usize]) -> CombDatum {
    CombDatum::new(
        Perm::from_images(l.to_vec()).unwrap(),
        Perm::from_images(r.to_vec()).unwrap(),
    )
    .unwrap()
}

fn rat(p: i64, q: i64) -> Scalar {
    Scalar::ratio(p, q)
}

/// `a + b·√2`.
fn r2(a: (i64, i64), b: (i64, i64)) -> Scalar {
    let root = Scalar::sqrt(2).unwrap();
    &Scalar::ratio(a.0, a.1) + &(&Scalar::ratio(b.0, b.1) * &root)
}

fn wedge(lx: Scalar, ly: Scalar, rx: Scalar, ry: Scalar) -> Wedge {
    Wedge::new(Vec2::new(lx, ly), Vec2::new(rx, ry))
}

/// Genus-2 surface with one singularity (k = 3), π_ℓ = (1 2 3),
/// π_r = (2 3); all coordinates rational.  Its unique well-slanted
/// staircase at time zero is the left cycle {1,2,3}.
///
/// Being rational, this surface does *not* satisfy the Keane condition: the
/// renormalization reaches a vertical diagonal (0, 6) after four elementary
/// moves (pinned as a regression in the moves tests).  Long-horizon tests
/// use the companion [`genus_two_keane`].
pub fn genus_two() -> Quadrangulation {
    Quadrangulation::new(
        datum(&[2, 3, 1], &[1, 3, 2]),
        vec![
            wedge(rat(-1, 1), rat(1, 1), rat(3, 2), rat(1, 1)),
            wedge(rat(-3, 2), rat(2, 1), rat(3, 2), rat(1, 1)),
            wedge(rat(-1, 1), rat(2, 1), rat(2, 1), rat(1, 1)),
        ],
    )
}

/// The genus-2 fixture corrected for the Keane condition: the same datum
/// and left sides as [`genus_two`], with every right side's x-part shifted
/// by √2/4 (a uniform right-side shift solves the train-track x-system,
/// so validity is preserved; this shift size makes every wedge width fall
/// below 10⁻³ within 40 greedy steps).
///
/// The rational fixture halts on a vertical diagonal after four moves, so
/// every long-horizon property (width decay, policy independence over 30
/// moves, 25-step bispecial agreement) needs this irrational companion —
/// the same printed-vs-corrected pattern the stuck fixtures follow.
/// Certification: a 120-step greedy run encounters no vertical diagonal,
/// which covers every horizon exercised in the tests; a full aperiodicity
/// proof is out of scope and not claimed.
pub fn genus_two_keane() -> Quadrangulation {
    let t = |p: i64, q: i64| &rat(p, q) + &r2((0, 1), (1, 4));
    Quadrangulation::new(
        datum(&[2, 3, 1], &[1, 3, 2]),
        vec![
            wedge(rat(-1, 1), rat(1, 1), t(3, 2), rat(1, 1)),
            wedge(rat(-3, 2), rat(2, 1), t(3, 2), rat(1, 1)),
            wedge(rat(-1, 1), rat(2, 1), t(2, 1), rat(1, 1)),
        ],
    )
}

/// Torus (k = 1) with wedge ℓ = (−1, 1), r = (√2, √2−1).
///
/// Certified free of horizontal and vertical saddle connections: every
/// saddle connection is `m·ℓ + n·r` with integer m, n, whose coordinates
/// `(−m + n√2, m + n(√2−1))` vanish only for m = n = 0 because √2 is
/// irrational.
pub fn root_two_torus() -> Quadrangulation {
    Quadrangulation::new(
        datum(&[1], &[1]),
        vec![wedge(rat(-1, 1), rat(1, 1), r2((0, 1), (1, 1)), r2((-1, 1), (1, 1)))],
    )
}

/// Square torus (k = 1) with wedge ℓ = (−1, 1), r = (1, 1): its forward
/// diagonal (0, 2) is vertical, so every run stops immediately (Keane).
pub fn square_torus() -> Quadrangulation {
    Quadrangulation::new(datum(&[1], &[1]), vec![wedge(rat(-1, 1), rat(1, 1), rat(1, 1), rat(1, 1))])
}

/// A three-torus-type surface (three singularities, k = 3) with
/// π_ℓ = π_r = (1 2 3) and mixed slants, hence *no* well-slanted staircase.
/// This datum is not hyperelliptic (the tree-of-relations d-edges double
/// up), so the existence theorem for well-slanted staircases does not apply
/// — this fixture is the stuck witness.
///
/// The analogous data printed in the literature violate the train-track
/// relation (see [`printed_three_torus`]); these wedges are a corrected
/// variant: ℓ_i = r_i + (−16/5, 1) keeps the train-track system exact while
/// producing diagonals (−1/5, 3), (3/10, 3), (−7/10, 3) of mixed slant.
pub fn stuck_three_torus() -> Quadrangulation {
    Quadrangulation::new(
        datum(&[2, 3, 1], &[2, 3, 1]),
        vec![
            wedge(rat(-11, 5), rat(2, 1), rat(1, 1), rat(1, 1)),
            wedge(rat(-6, 5), rat(2, 1), rat(2, 1), rat(1, 1)),
            wedge(rat(-17, 10), rat(2, 1), rat(3, 2), rat(1, 1)),
        ],
    )
}

/// The three-torus-type wedge data as printed in the literature:
/// train-track fails at i = 1 and i = 3 (shipped to document the erratum;
/// always fails validation).
pub fn printed_three_torus() -> Quadrangulation {
    Quadrangulation::new(
        datum(&[2, 3, 1], &[2, 3, 1]),
        vec![
            wedge(rat(-13, 10), rat(2, 1), rat(1, 1), rat(1, 1)),
            wedge(rat(-13, 10), rat(2, 1), rat(17, 10), rat(1, 1)),
            wedge(rat(-13, 10), rat(2, 1), rat(17, 10), rat(1, 1)),
        ],
    )
}

/// Genus-3 surface with one singularity (k = 5), π_r = (1 2 3 4 5) and
/// π_ℓ = (1 5 3 2 4) (the reconstruction consistent with the printed
/// diagonals); not hyperelliptic, mixed slants, no well-slanted staircase.
pub fn stuck_genus_three() -> Quadrangulation {
    Quadrangulation::new(
        datum(&[5, 4, 2, 1, 3], &[2, 3, 4, 5, 1]),
        vec![
            wedge(rat(-3, 2), rat(2, 1), rat(2, 1), rat(1, 1)),
            wedge(rat(-5, 2), rat(2, 1), rat(3, 2), rat(1, 1)),
            wedge(rat(-1, 2), rat(2, 1), rat(5, 2), rat(1, 1)),
            wedge(rat(-3, 2), rat(2, 1), rat(7, 2), rat(1, 1)),
            wedge(rat(-3, 1), rat(2, 1), rat(1, 1), rat(1, 1)),
        ],
    )
}

/// The same genus-3 wedges with π_ℓ read as the printed cycle (2 1 3 5 4),
/// i.e. one-line [3,1,5,2,4]: inconsistent with the printed diagonals and
/// failing the train-track relation at i = 1 (shipped to document the
/// erratum; always fails validation).
pub fn printed_genus_three() -> Quadrangulation {
    Quadrangulation::new(
        datum(&[3, 1, 5, 2, 4], &[2, 3, 4, 5, 1]),
        stuck_genus_three().wedges().to_vec(),
    )
}

/// The seed datum for the k = 3 hyperelliptic reachability graph:
/// π_ℓ = (1 3), π_r = (1 2).
pub fn graph_seed_datum() -> CombDatum {
    datum(&[3, 2, 1], &[2, 1, 3])
}

/// The shipped `.quad` fixture files as `(file name, contents)` pairs:
/// each constructor above, serialized, under a comment header recording
/// what the fixture documents or certifies.
pub fn fixture_files() -> Vec<(&'static str, String)> {
    let with_header = |header: &str, q: &Quadrangulation| {
        let mut out = String::new();
        for line in header.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&q.serialize());
        out
    };
    vec![
        (
            "root_two_torus.quad",
            with_header(
                "Torus (k = 1) over Q(sqrt 2).\n\
                 Certified: no horizontal and no vertical saddle connections.\n\
                 Every connection is m*l + n*r = (-m + n*sqrt2, m + n*(sqrt2 - 1));\n\
                 a zero coordinate forces m = n = 0 since sqrt2 is irrational.",
                &root_two_torus(),
            ),
        ),
        (
            "square_torus.quad",
            with_header(
                "Square torus (k = 1).  The forward diagonal (0, 2) is vertical,\n\
                 so every renormalization run stops immediately.",
                &square_torus(),
            ),
        ),
        (
            "genus_two.quad",
            with_header(
                "Genus-2, one singularity (k = 3), rational coordinates.\n\
                 Reaches a vertical diagonal after 4 elementary moves; use\n\
                 genus_two_keane.quad for long-horizon runs.",
                &genus_two(),
            ),
        ),
        (
            "genus_two_keane.quad",
            with_header(
                "Genus-2 companion over Q(sqrt 2): right x-parts shifted by sqrt2/4.\n\
                 Certified: a 120-step greedy run meets no vertical diagonal and\n\
                 drives every wedge width below 1/1000 within 40 steps.",
                &genus_two_keane(),
            ),
        ),
        (
            "stuck_three_torus.quad",
            with_header(
                "Corrected three-torus-type wedge data (k = 3): valid, mixed\n\
                 slants, zero well-slanted staircases.",
                &stuck_three_torus(),
            ),
        ),
        (
            "printed_three_torus.quad",
            with_header(
                "Three-torus-type wedge data as printed in the literature.\n\
                 Documents an erratum: train-track fails at i = 1 and i = 3,\n\
                 so this file never passes validation.",
                &printed_three_torus(),
            ),
        ),
        (
            "stuck_genus_three.quad",
            with_header(
                "Genus-3, one singularity (k = 5): valid, mixed slants, zero\n\
                 well-slanted staircases.",
                &stuck_genus_three(),
            ),
        ),
        (
            "printed_genus_three.quad",
            with_header(
                "Genus-3 wedge data with pi_l read as the printed cycle.\n\
                 Documents an erratum: train-track fails at i = 1, so this\n\
                 file never passes validation.",
                &printed_genus_three(),
            ),
        ),
        (
            "chyp3_seed.quad",
            "# Seed datum for the k = 3 hyperelliptic reachability graph:\n\
             # pi_l = (1 3), pi_r = (1 2).  Datum only; no wedge data.\n\
             quadfmt 1\n\
             k=3; perm_l=[3,2,1]; perm_r=[2,1,3]\n"
                .to_string(),
        ),
    ]
}
