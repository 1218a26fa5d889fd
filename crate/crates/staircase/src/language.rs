//! Bispecial words of the cutting-sequence language: the L/R/D recursion
//! driven by staircase moves, the substitution lemma relating diagonal
//! words to side words, and sampled verification of the extension
//! structure.
//!
//! Along a run of staircase moves, the word `D_i` maintained by the
//! recursion is the cutting sequence — with respect to the initial
//! quadrangulation's labels — of the current diagonal `w_{i,d}`, and the
//! set of all such words is exactly the set of bispecial words of the
//! language.  `L_i` and `R_i` are *extended* cutting sequences of the
//! current sides: the side's word preceded by the labels of incoming edges
//! at its start vertex, which is what makes the concatenations compose.
//! Their base case starts `L` from an `r`-letter and `R` from an
//! `ℓ`-letter, as both the word concatenations in the recursion's proof
//! and the exact geometric tracer require.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinatorics::{CombDatum, CombError, CycleRef, Side};
use crate::exactnum::Scalar;
use crate::iet::{cutting_sequence, iet_of, trace_segment, IETPoint, IetError, Label, Word};
use crate::moves::{run, MoveError, MoveLog, Policy, RunOutcome, StopRule};
use crate::quadrangulation::Quadrangulation;

/// Errors from recursion driving and sampled verification.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LangError {
    /// The run reached a vertical diagonal before the requested step.
    #[error("run stops on a vertical diagonal at step {step}, before the requested limit")]
    KeaneStopBeforeLimit { step: usize },
    /// A scripted run ended before the requested step.
    #[error("script exhausted before the requested limit")]
    ScriptExhausted,
    /// Sampling saw too few occurrences to decide the extension structure.
    #[error("sampled orbit shows too few occurrences to decide")]
    InsufficientSample,
    #[error(transparent)]
    Comb(#[from] CombError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Iet(#[from] IetError),
}

/// The recursion state: one `L`, `R`, and `D` word per index, the number
/// of steps taken, and the current combinatorial datum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LRDState {
    l: Vec<Word>,
    r: Vec<Word>,
    d: Vec<Word>,
    step: usize,
    datum: CombDatum,
}

impl LRDState {
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn datum(&self) -> &CombDatum {
        &self.datum
    }

    /// The extended cutting sequence of the current side `w_{i,ℓ}`.
    pub fn l_word(&self, i: usize) -> &Word {
        &self.l[i - 1]
    }

    /// The extended cutting sequence of the current side `w_{i,r}`.
    pub fn r_word(&self, i: usize) -> &Word {
        &self.r[i - 1]
    }

    /// The cutting sequence of the current diagonal `w_{i,d}` with respect
    /// to the initial labels.
    pub fn d_word(&self, i: usize) -> &Word {
        &self.d[i - 1]
    }
}

/// The base of the recursion: `D_i = ∅`, `L_i = (π_r⁻¹(i), r)`,
/// `R_i = (π_ℓ⁻¹(i), ℓ)`.
pub fn lrd_init(datum: &CombDatum) -> LRDState {
    let k = datum.k();
    let l = (1..=k)
        .map(|i| Word(vec![Label::new(datum.perm_r().inverse().apply(i), Side::Right)]))
        .collect();
    let r = (1..=k)
        .map(|i| Word(vec![Label::new(datum.perm_l().inverse().apply(i), Side::Left)]))
        .collect();
    LRDState { l, r, d: vec![Word::empty(); k], step: 0, datum: datum.clone() }
}

/// One recursion step for the staircase move on cycle `c` of the current
/// datum.  All reads are from the pre-step state.  For a right cycle
/// (`c` a cycle of `π_r`): `L_i ← L_i·R_{π_ℓ(i)}` and
/// `D_i ← D_i·R_{π_ℓ π_r(i)}` on `i ∈ c`; symmetrically for a left cycle:
/// `R_i ← R_i·L_{π_r(i)}` and `D_i ← D_i·L_{π_r π_ℓ(i)}`.
pub fn lrd_step(s: &LRDState, c: &CycleRef) -> Result<LRDState, LangError> {
    s.datum.check_cycle(c)?;
    let pl = s.datum.perm_l();
    let pr = s.datum.perm_r();
    let mut next = s.clone();
    for &i in &c.indices {
        match c.side {
            Side::Right => {
                next.l[i - 1] = s.l[i - 1].concat(&s.r[pl.apply(i) - 1]);
                next.d[i - 1] = s.d[i - 1].concat(&s.r[pl.apply(pr.apply(i)) - 1]);
            }
            Side::Left => {
                next.r[i - 1] = s.r[i - 1].concat(&s.l[pr.apply(i) - 1]);
                next.d[i - 1] = s.d[i - 1].concat(&s.l[pr.apply(pl.apply(i)) - 1]);
            }
        }
    }
    next.datum = s.datum.act_move(c)?;
    next.step = s.step + 1;
    Ok(next)
}

/// All distinct diagonal words `D_i^{(m)}` for `m ≤ n` elementary moves of
/// `q` under `policy`, each tagged with the step and bundle of first
/// appearance.  Includes the empty word (step 0).  Deduplication is by
/// word only, since distinct bundles can momentarily carry equal words.
pub fn bispecials(
    q: &Quadrangulation,
    policy: &Policy,
    n: usize,
) -> Result<Vec<(usize, usize, Word)>, LangError> {
    let result = run(q, policy, &StopRule::Steps(n))?;
    if result.log.records.len() < n {
        return match result.outcome {
            RunOutcome::KeaneStop { step, .. } => Err(LangError::KeaneStopBeforeLimit { step }),
            RunOutcome::ScriptExhausted => Err(LangError::ScriptExhausted),
            RunOutcome::Completed => unreachable!("short run must have stopped"),
        };
    }
    let mut state = lrd_init(q.datum());
    let mut seen: HashSet<Word> = HashSet::new();
    let mut out = Vec::new();
    let mut collect = |state: &LRDState, out: &mut Vec<(usize, usize, Word)>| {
        for i in 1..=state.datum.k() {
            let w = state.d_word(i);
            if seen.insert(w.clone()) {
                out.push((state.step, i, w.clone()));
            }
        }
    };
    collect(&state, &mut out);
    for record in &result.log.records {
        state = lrd_step(&state, &record.cycle)?;
        collect(&state, &mut out);
    }
    Ok(out)
}

/// The cutting sequence of the final diagonal `w_{i,d}` computed from the
/// substitution lemma rather than the recursion: with `W_{m,s}` the traced
/// word of the final side `w_{m,s}` on the initial surface and
/// `j = (π_r⁰)⁻¹ π_r(i)` (initial and final `π_r`),
///
/// ```text
/// D_i = W_{i,r} (j,r) (π_r(i),ℓ) W_{π_r(i),ℓ}   both sides changed
///     =         (π_r(i),ℓ) W_{π_r(i),ℓ}          only the left changed
///     = W_{i,r} (j,r)                            only the right changed
///     = ∅                                        neither changed
/// ```
pub fn diagonal_word_via_substitution(
    q0: &Quadrangulation,
    log: &MoveLog,
    i: usize,
) -> Result<Word, LangError> {
    let q = log.replay()?;
    let pr = q.datum().perm_r();
    let pr0 = q0.datum().perm_r();
    let m = pr.apply(i);
    let right_changed = q.side(i, Side::Right) != q0.side(i, Side::Right);
    let left_changed = q.side(m, Side::Left) != q0.side(m, Side::Left);
    let side_word = |bundle: usize, side: Side| -> Result<Word, LangError> {
        Ok(trace_segment(q0, bundle, q.side(bundle, side))?)
    };
    let j = pr0.inverse().apply(pr.apply(i));
    let mut word = Word::empty();
    if right_changed {
        word = side_word(i, Side::Right)?;
        word.0.push(Label::new(j, Side::Right));
    }
    if left_changed {
        word.0.push(Label::new(m, Side::Left));
        word = word.concat(&side_word(m, Side::Left)?);
    }
    Ok(word)
}

/// The verdict of [`verify_bispecial`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BispecialReport {
    /// Occurrences of the word across the sampled cutting sequences.
    pub occurrences: usize,
    /// Observed single-letter left extensions.
    pub left: Vec<Label>,
    /// Observed single-letter right extensions.
    pub right: Vec<Label>,
    /// Observed two-sided extensions.
    pub pairs: Vec<(Label, Label)>,
    /// Whether the word shows the full bispecial extension structure.
    pub bispecial: bool,
}

/// Number of occurrences that makes a still-incomplete extension structure
/// count as a refutation rather than an inconclusive sample.
const DECISION_THRESHOLD: usize = 50;

/// Scans sampled cutting sequences from several generic start points
/// (seeded, hence deterministic) totaling `sample_len` letters, collecting
/// every occurrence of `w` with its one-letter left and right extensions.
///
/// Passes when the observed structure is exactly the bispecial one: left
/// letters `{(i,ℓ),(i,r)}`, right letters `{(π_r(j),ℓ),(π_ℓ(j),r)}` for
/// the word's boundary indices, and exactly three of the four two-sided
/// pairs.  Fails when enough occurrences were seen without that structure;
/// errors with [`LangError::InsufficientSample`] otherwise.  The empty
/// word is trivially bispecial.
pub fn verify_bispecial(
    q: &Quadrangulation,
    w: &Word,
    sample_len: usize,
) -> Result<BispecialReport, LangError> {
    verify_bispecial_sampled(q, w, &OrbitSample::new(q, sample_len)?)
}

/// Cutting sequences sampled once from several generic start points,
/// reusable across many [`verify_bispecial_sampled`] calls on the same
/// surface.  Start points are seeded, hence deterministic.
#[derive(Debug, Clone)]
pub struct OrbitSample {
    words: Vec<Word>,
    sample_len: usize,
}

impl OrbitSample {
    /// Samples cutting sequences totaling `sample_len` letters.
    pub fn new(q: &Quadrangulation, sample_len: usize) -> Result<OrbitSample, LangError> {
        let t = iet_of(q);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b15b);
        let starts = 8usize;
        let per_start = sample_len.div_ceil(starts);
        let denom: i64 = 999_983;
        let mut words = Vec::with_capacity(starts);
        for _ in 0..starts {
            // A generic start point: rational position of large prime
            // denominator inside a random component.
            let component = rng.gen_range(1..=t.k());
            let num = rng.gen_range(1..denom);
            let lo = t.lambda(component, Side::Left);
            let hi = t.lambda(component, Side::Right);
            let x = lo + &(&(hi - lo) * &Scalar::ratio(num, denom));
            let p = IETPoint::new(component, x);
            let seq = match cutting_sequence(q, &p, per_start) {
                Ok(word) => word,
                // A start point whose orbit hits a singular point still
                // yields a usable prefix.
                Err(IetError::HitsSingularity { step }) => {
                    cutting_sequence(q, &p, step).expect("prefix before the singular hit")
                }
                Err(e) => return Err(e.into()),
            };
            words.push(seq);
        }
        Ok(OrbitSample { words, sample_len })
    }
}

/// [`verify_bispecial`] against a pre-computed [`OrbitSample`].
pub fn verify_bispecial_sampled(
    q: &Quadrangulation,
    w: &Word,
    sample: &OrbitSample,
) -> Result<BispecialReport, LangError> {
    if w.is_empty() {
        return Ok(BispecialReport {
            occurrences: sample.sample_len,
            left: Vec::new(),
            right: Vec::new(),
            pairs: Vec::new(),
            bispecial: true,
        });
    }
    let mut occurrences = 0usize;
    let mut left: HashSet<Label> = HashSet::new();
    let mut right: HashSet<Label> = HashSet::new();
    let mut pairs: HashSet<(Label, Label)> = HashSet::new();
    for seq in &sample.words {
        let letters = &seq.0;
        let n = w.len();
        if letters.len() < n + 2 {
            continue;
        }
        for start in 1..letters.len().saturating_sub(n) {
            if letters[start..start + n] == w.0[..] {
                occurrences += 1;
                let a = letters[start - 1];
                let b = letters[start + n];
                left.insert(a);
                right.insert(b);
                pairs.insert((a, b));
            }
        }
    }
    // Predicted structure from the word's boundary letters.  The chart a
    // trajectory crosses just before its first letter `(m, s)` is the one
    // carrying that side on top: `π_ℓ⁻¹(m)` for an `r` letter (top-left
    // copy), `π_r⁻¹(m)` for an `ℓ` letter (top-right copy); the entries
    // into that chart are its two bottom sides.  Dually, after the last
    // letter `(j, s)` the trajectory is in chart `j` and exits through
    // its two top sides.
    let first = w.0[0];
    let c = match first.side {
        Side::Right => q.datum().perm_l().inverse().apply(first.index),
        Side::Left => q.datum().perm_r().inverse().apply(first.index),
    };
    let j = w.0[w.len() - 1].index;
    let expected_left: HashSet<Label> =
        [Label::new(c, Side::Left), Label::new(c, Side::Right)].into_iter().collect();
    let expected_right: HashSet<Label> = [
        Label::new(q.datum().perm_r().apply(j), Side::Left),
        Label::new(q.datum().perm_l().apply(j), Side::Right),
    ]
    .into_iter()
    .collect();
    let bispecial = left == expected_left && right == expected_right && pairs.len() == 3;
    if !bispecial && occurrences < DECISION_THRESHOLD {
        return Err(LangError::InsufficientSample);
    }
    let sort = |set: HashSet<Label>| {
        let mut v: Vec<Label> = set.into_iter().collect();
        v.sort();
        v
    };
    let mut pair_list: Vec<(Label, Label)> = pairs.into_iter().collect();
    pair_list.sort();
    Ok(BispecialReport {
        occurrences,
        left: sort(left),
        right: sort(right),
        pairs: pair_list,
        bispecial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::moves::apply_move;

    fn label(i: usize, s: Side) -> Label {
        Label::new(i, s)
    }

    #[test]
    fn init_examples() {
        let h2 = fixtures::genus_two();
        let s = lrd_init(h2.datum());
        // π_r = [1,3,2], π_ℓ = [2,3,1].
        assert_eq!(s.l_word(1).0, vec![label(1, Side::Right)]);
        assert_eq!(s.r_word(1).0, vec![label(3, Side::Left)]);
        for i in 1..=3 {
            assert!(s.d_word(i).is_empty());
        }
    }

    #[test]
    fn one_left_step_on_genus_two() {
        let h2 = fixtures::genus_two();
        let s = lrd_init(h2.datum());
        let c = CycleRef::new(Side::Left, vec![1, 2, 3]);
        let s1 = lrd_step(&s, &c).unwrap();
        // D_1 = L^{(0)}_{π_r π_ℓ(1)} = L^{(0)}_3 = (π_r⁻¹(3), r) = (2, r),
        // matching the exact trace of the new diagonal.
        assert_eq!(s1.d_word(1).to_string(), "2r");
        // R_1 = R^{(0)}_1 · L^{(0)}_{π_r(1)} = (3,ℓ)(1,r).
        assert_eq!(s1.r_word(1).to_string(), "3l 1r");
        // L words are untouched by a left move.
        assert_eq!(s1.l_word(2), s.l_word(2));
        // The datum advanced.
        assert_eq!(s1.datum().perm_r().images(), &[3, 2, 1]);
    }

    #[test]
    fn d_words_match_traced_diagonals() {
        // The maintained invariant, on several fixtures and depths.
        for (q, steps) in [
            (fixtures::root_two_torus(), 8usize),
            (fixtures::genus_two(), 4),
            (fixtures::genus_two_keane(), 10),
        ] {
            let result = run(&q, &Policy::Greedy, &StopRule::Steps(steps)).unwrap();
            let mut s = lrd_init(q.datum());
            let mut state = q.clone();
            for record in &result.log.records {
                s = lrd_step(&s, &record.cycle).unwrap();
                state = apply_move(&state, &record.cycle).unwrap();
                for i in 1..=q.k() {
                    let traced = trace_segment(&q, i, &state.diagonal(i)).unwrap();
                    assert_eq!(s.d_word(i), &traced, "step {} index {i}", s.step());
                }
            }
        }
    }

    #[test]
    fn substitution_agrees_with_recursion_and_trace() {
        let q = fixtures::genus_two_keane();
        let result = run(&q, &Policy::Greedy, &StopRule::Steps(10)).unwrap();
        let mut s = lrd_init(q.datum());
        let mut partial = MoveLog { initial: q.clone(), records: Vec::new() };
        for record in &result.log.records {
            s = lrd_step(&s, &record.cycle).unwrap();
            partial.records.push(record.clone());
            for i in 1..=q.k() {
                let by_sub = diagonal_word_via_substitution(&q, &partial, i).unwrap();
                assert_eq!(&by_sub, s.d_word(i), "step {} index {i}", s.step());
            }
        }
    }

    #[test]
    fn empty_log_gives_empty_words() {
        let q = fixtures::genus_two();
        let log = MoveLog { initial: q.clone(), records: Vec::new() };
        for i in 1..=q.k() {
            assert!(diagonal_word_via_substitution(&q, &log, i).unwrap().is_empty());
        }
    }

    #[test]
    fn one_move_substitution_example() {
        let q = fixtures::genus_two();
        let result = run(&q, &Policy::Greedy, &StopRule::Steps(1)).unwrap();
        let word = diagonal_word_via_substitution(&q, &result.log, 1).unwrap();
        assert_eq!(word.to_string(), "2r");
    }

    #[test]
    fn bispecials_examples() {
        let torus = fixtures::root_two_torus();
        let none = bispecials(&torus, &Policy::Greedy, 0).unwrap();
        assert_eq!(none.len(), 1);
        assert!(none[0].2.is_empty());

        // Sturmian: successive bispecials form a chain where each word
        // contains the previous as a prefix.
        let words = bispecials(&torus, &Policy::Greedy, 8).unwrap();
        assert!(words.len() > 3);
        for pair in words.windows(2) {
            let (prev, next) = (&pair[0].2, &pair[1].2);
            assert!(prev.len() < next.len());
            assert_eq!(&next.0[..prev.len()], &prev.0[..]);
        }

        // Keane stop before the limit is an error.
        assert!(matches!(
            bispecials(&fixtures::square_torus(), &Policy::Greedy, 3),
            Err(LangError::KeaneStopBeforeLimit { .. })
        ));
    }

    #[test]
    fn verify_empty_word() {
        let torus = fixtures::root_two_torus();
        let report = verify_bispecial(&torus, &Word::empty(), 100).unwrap();
        assert!(report.bispecial);
    }

    #[test]
    fn verify_first_torus_bispecial() {
        let torus = fixtures::root_two_torus();
        let words = bispecials(&torus, &Policy::Greedy, 4).unwrap();
        let first = words.iter().find(|(_, _, w)| !w.is_empty()).unwrap();
        let report = verify_bispecial(&torus, &first.2, 4000).unwrap();
        assert!(report.bispecial, "{report:?}");
        assert!(report.occurrences >= DECISION_THRESHOLD);
    }

    #[test]
    fn verify_rejects_forced_letter() {
        // On the torus the letter ℓ is always followed by r (the left
        // sub-interval sits entirely left of the split point), so the
        // single-letter word "1l" is not right special.
        let torus = fixtures::root_two_torus();
        let w = Word(vec![label(1, Side::Left)]);
        let report = verify_bispecial(&torus, &w, 4000).unwrap();
        assert!(!report.bispecial);
        assert_eq!(report.right, vec![label(1, Side::Right)]);
    }
}
