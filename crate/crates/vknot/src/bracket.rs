//! The generalized bracket polynomial and its parallel-cable extensions.
//!
//! `bracket` evaluates the state sum `sum_s A^(c(s)) d^(|s|-1)` where `s`
//! runs over all smoothings, `c(s)` counts alpha minus beta choices, `|s|`
//! counts resulting closed curves, and `d = -A^-2 - A^2`.  Two independent
//! engines compute it: a direct enumeration over all `2^n` states
//! (`bracket_state_sum`), and a frontier contraction that activates one
//! crossing at a time while merging partial states that induce the same
//! connection pattern on the dangling strands (`bracket`).  The contraction
//! engine reaches cabled diagrams far beyond enumeration range.

use crate::diagram::{crossing_of, Diagram, End, Smoothing, StateAssignment};
use crate::laurent::LaurentPoly;
use crate::TooLarge;
use rayon::prelude::*;
use std::collections::HashMap;

/// Resource bounds for bracket evaluation.
#[derive(Debug, Clone, Copy)]
pub struct BracketLimits {
    /// Cap on `2^n` for the enumeration engine.
    pub max_states: u64,
    /// Cap on simultaneously tracked connection patterns.
    pub max_frontier: usize,
}

impl Default for BracketLimits {
    fn default() -> Self {
        BracketLimits { max_states: 1 << 25, max_frontier: 1 << 22 }
    }
}

/// Writhe-normalized invariant `(-A^3)^(-w) * bracket`.
pub fn f_poly(d: &Diagram) -> Result<LaurentPoly, TooLarge> {
    let w = d.writhe();
    let sign = if w % 2 == 0 { 1 } else { -1 };
    Ok(bracket(d)?.mul(&LaurentPoly::monomial(sign, -3 * w)))
}

/// Bracket of the `n`-strand blackboard cable.
pub fn n_bracket(d: &Diagram, n: usize) -> Result<LaurentPoly, TooLarge> {
    bracket(&d.cable(n))
}

/// Bracket via frontier contraction with default limits.
pub fn bracket(d: &Diagram) -> Result<LaurentPoly, TooLarge> {
    bracket_with(d, &BracketLimits::default())
}

/// Direct state enumeration.  The exponential blowup is guarded by
/// `limits.max_states`.
pub fn bracket_state_sum(d: &Diagram, limits: &BracketLimits) -> Result<LaurentPoly, TooLarge> {
    let n = d.crossing_count();
    if n >= 63 || (1u64 << n) > limits.max_states {
        return Err(TooLarge {
            what: "state count",
            size: n,
            limit: limits.max_states.trailing_zeros() as usize,
        });
    }
    let total: u64 = 1 << n;
    // bucket counts by (alpha excess, curve count); the polynomial is
    // assembled once at the end
    let buckets = (0..total)
        .into_par_iter()
        .fold(HashMap::<(i64, usize), u64>::new, |mut acc, mask| {
            let state = StateAssignment::from_mask(mask, n);
            let loops = d.smooth_count(&state).expect("state covers all crossings");
            *acc.entry((state.alpha_excess(), loops)).or_insert(0) += 1;
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let max_loops = buckets.keys().map(|&(_, l)| l).max().unwrap_or(1);
    let mut d_pow = Vec::with_capacity(max_loops);
    d_pow.push(LaurentPoly::one());
    for k in 1..max_loops {
        let next = d_pow[k - 1].mul(&LaurentPoly::d());
        d_pow.push(next);
    }
    let mut out = LaurentPoly::zero();
    for ((excess, loops), count) in buckets {
        let term = LaurentPoly::monomial(count, excess).mul(&d_pow[loops - 1]);
        out = out.add(&term);
    }
    Ok(out)
}

/// Crossing activation order minimizing the running count of open strands,
/// greedily, ties to the smallest id.
pub fn contraction_order(d: &Diagram) -> Vec<usize> {
    let n = d.crossing_count();
    let mut processed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut open = 0i64;
    for _ in 0..n {
        let mut best: Option<(i64, usize)> = None;
        for c in 0..n {
            if processed[c] {
                continue;
            }
            let mut delta = 0i64;
            for p in 0..4 {
                let m = d.mate(4 * c + p);
                let mc = crossing_of(m);
                if mc == c {
                    // self edge: never opens
                } else if processed[mc] {
                    delta -= 1;
                } else {
                    delta += 1;
                }
            }
            let cand = (open + delta, c);
            if best.map(|b| cand < b).unwrap_or(true) {
                best = Some(cand);
            }
        }
        let (new_open, c) = best.unwrap();
        processed[c] = true;
        order.push(c);
        open = new_open;
    }
    order
}

fn smoothing_arcs(s: Smoothing) -> [(usize, usize); 2] {
    use crate::diagram::{PORT_E, PORT_N, PORT_S, PORT_W};
    match s {
        Smoothing::Alpha => [(PORT_E, PORT_N), (PORT_W, PORT_S)],
        Smoothing::Beta => [(PORT_E, PORT_S), (PORT_N, PORT_W)],
    }
}

// frontier key: sorted open ends are implicit in the step; the key stores,
// for slot i, the index of its connection partner
type Key = Vec<u16>;

struct Step {
    crossing: usize,
    /// open ends after this step, sorted
    slots: Vec<End>,
    /// position of each slot in `slots`, by end
    slot_index: HashMap<End, u16>,
}

fn plan_steps(d: &Diagram, order: &[usize]) -> Vec<Step> {
    let n = d.crossing_count();
    let mut rank = vec![usize::MAX; n];
    for (i, &c) in order.iter().enumerate() {
        rank[c] = i;
    }
    let mut steps = Vec::with_capacity(n);
    for (i, &c) in order.iter().enumerate() {
        let mut slots = Vec::new();
        for e in 0..4 * n {
            let me = d.mate(e);
            // open after step i: own crossing still pending, mate's done
            if rank[crossing_of(e)] > i && rank[crossing_of(me)] <= i {
                slots.push(e);
            }
        }
        let slot_index =
            slots.iter().enumerate().map(|(k, &e)| (e, k as u16)).collect();
        steps.push(Step { crossing: c, slots, slot_index });
    }
    steps
}

/// Bracket via frontier contraction.
pub fn bracket_with(d: &Diagram, limits: &BracketLimits) -> Result<LaurentPoly, TooLarge> {
    let order = contraction_order(d);
    bracket_with_order(d, &order, limits)
}

pub fn bracket_with_order(
    d: &Diagram,
    order: &[usize],
    limits: &BracketLimits,
) -> Result<LaurentPoly, TooLarge> {
    let n = d.crossing_count();
    assert_eq!(order.len(), n);
    let steps = plan_steps(d, order);
    let mut rank = vec![usize::MAX; n];
    for (i, &c) in order.iter().enumerate() {
        rank[c] = i;
    }
    let mut frontier: HashMap<Key, LaurentPoly> = HashMap::new();
    frontier.insert(Vec::new(), LaurentPoly::one());
    let mut prev_slots: Vec<End> = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let c = step.crossing;
        let entries: Vec<(Key, LaurentPoly)> = frontier.drain().collect();
        let prev = prev_slots.clone();
        let process = |(key, value): &(Key, LaurentPoly)| -> Vec<(Key, LaurentPoly)> {
            // connection partners by end, for the old slots
            let mut conn: HashMap<End, End> = HashMap::new();
            for (idx, &p) in key.iter().enumerate() {
                conn.insert(prev[idx], prev[p as usize]);
            }
            let mut out = Vec::with_capacity(2);
            for smoothing in [Smoothing::Alpha, Smoothing::Beta] {
                let arcs = smoothing_arcs(smoothing);
                let arc_partner = |e: End| -> End {
                    let p = e - 4 * c;
                    for &(a, b) in &arcs {
                        if p == a {
                            return 4 * c + b;
                        }
                        if p == b {
                            return 4 * c + a;
                        }
                    }
                    unreachable!()
                };
                // walk from every attachment of a strand that stays open
                let mut new_pairs: Vec<(End, End)> = Vec::new();
                let mut visited = [false; 4];
                // seeds: ends of c whose edge leads outward to pending
                // material, or whose old connection arrives from elsewhere
                for p in 0..4 {
                    let e0 = 4 * c + p;
                    if visited[p] {
                        continue;
                    }
                    let far0 = {
                        let m = d.mate(e0);
                        if crossing_of(m) == c {
                            None // self edge, not a seed
                        } else if rank[crossing_of(m)] > i {
                            Some(m) // fresh dangling end
                        } else {
                            let z = conn[&e0];
                            if crossing_of(z) == c {
                                None // internal return, not a seed
                            } else {
                                Some(z)
                            }
                        }
                    };
                    let Some(far0) = far0 else { continue };
                    // trace through the disk to the other exit
                    let mut cur = e0;
                    let exit;
                    loop {
                        visited[cur - 4 * c] = true;
                        let a = arc_partner(cur);
                        visited[a - 4 * c] = true;
                        let m = d.mate(a);
                        if crossing_of(m) == c {
                            // self edge hops to another end of c
                            cur = m;
                            continue;
                        }
                        if rank[crossing_of(m)] > i {
                            exit = m;
                            break;
                        }
                        let z = conn[&a];
                        if crossing_of(z) == c {
                            cur = z;
                            continue;
                        }
                        exit = z;
                        break;
                    }
                    new_pairs.push((far0, exit));
                }
                // unvisited ends of c lie on closed curves
                let mut loops = 0usize;
                for p in 0..4 {
                    if visited[p] {
                        continue;
                    }
                    let mut cur = 4 * c + p;
                    loop {
                        visited[cur - 4 * c] = true;
                        let a = arc_partner(cur);
                        visited[a - 4 * c] = true;
                        let m = d.mate(a);
                        let next = if crossing_of(m) == c { m } else { conn[&a] };
                        if next == 4 * c + p {
                            break;
                        }
                        cur = next;
                    }
                    loops += 1;
                }
                // carry over connections not touching c, then the new pairs
                let mut new_key = vec![u16::MAX; step.slots.len()];
                let set_pair = |x: End, y: End, new_key: &mut Vec<u16>| {
                    let xi = step.slot_index[&x];
                    let yi = step.slot_index[&y];
                    new_key[xi as usize] = yi;
                    new_key[yi as usize] = xi;
                };
                for (idx, &p) in key.iter().enumerate() {
                    let (x, y) = (prev[idx], prev[p as usize]);
                    if crossing_of(x) == c || crossing_of(y) == c {
                        continue;
                    }
                    set_pair(x, y, &mut new_key);
                }
                for &(x, y) in &new_pairs {
                    set_pair(x, y, &mut new_key);
                }
                debug_assert!(new_key.iter().all(|&v| v != u16::MAX));
                let weight = match smoothing {
                    Smoothing::Alpha => 1,
                    Smoothing::Beta => -1,
                };
                let mut v = value.mul(&LaurentPoly::monomial(1, weight));
                if loops > 0 {
                    v = v.mul(&LaurentPoly::d_power(loops));
                }
                out.push((new_key, v));
            }
            out
        };
        let merged: HashMap<Key, LaurentPoly> = entries
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<Key, LaurentPoly>, entry| {
                for (k, v) in process(entry) {
                    match acc.entry(k) {
                        std::collections::hash_map::Entry::Occupied(mut o) => {
                            let sum = o.get().add(&v);
                            *o.get_mut() = sum;
                        }
                        std::collections::hash_map::Entry::Vacant(slot) => {
                            slot.insert(v);
                        }
                    }
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    match a.entry(k) {
                        std::collections::hash_map::Entry::Occupied(mut o) => {
                            let sum = o.get().add(&v);
                            *o.get_mut() = sum;
                        }
                        std::collections::hash_map::Entry::Vacant(slot) => {
                            slot.insert(v);
                        }
                    }
                }
                a
            });
        frontier = merged;
        if frontier.len() > limits.max_frontier {
            return Err(TooLarge {
                what: "frontier width",
                size: frontier.len(),
                limit: limits.max_frontier,
            });
        }
        prev_slots = step.slots.clone();
    }
    debug_assert!(prev_slots.is_empty());
    let closed = frontier.remove(&Vec::new()).unwrap_or_else(LaurentPoly::one);
    debug_assert!(frontier.is_empty());
    // every curve contributed a factor d, including crossingless loops;
    // the bracket normalizes by one overall factor
    let total = closed.mul(&LaurentPoly::d_power(d.free_loops()));
    Ok(total.div_exact_d().expect("bracket accumulator is divisible by the loop value"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec;
    use crate::diagram::random_diagram;

    fn dg(text: &str) -> Diagram {
        codec::parse(text).unwrap().realize()
    }

    #[test]
    fn empty_bracket_is_one() {
        assert!(bracket(&Diagram::empty()).unwrap().is_one());
        let two_loops = dg("/");
        assert_eq!(bracket(&two_loops).unwrap(), LaurentPoly::d());
    }

    #[test]
    fn kink_brackets() {
        let pos = dg("O1+U1+");
        assert_eq!(bracket(&pos).unwrap(), LaurentPoly::monomial(-1, 3));
        let neg = dg("O1-U1-");
        assert_eq!(bracket(&neg).unwrap(), LaurentPoly::monomial(-1, -3));
        assert!(f_poly(&pos).unwrap().is_one());
        assert!(f_poly(&neg).unwrap().is_one());
    }

    #[test]
    fn engines_agree_on_small_corpus() {
        let limits = BracketLimits::default();
        for seed in 0..60u64 {
            let n = 1 + (seed as usize % 8);
            let d = random_diagram(n, 1000 + seed);
            let a = bracket_state_sum(&d, &limits).unwrap();
            let b = bracket(&d).unwrap();
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn classical_trefoil_f_poly() {
        // the f invariant restricts to the Jones polynomial on classical
        // knots; for this writhe +3 diagram it must be a 3 term polynomial
        // with value 1 at A = 1 and differ from its mirror
        let d = dg("O1+U2+O3+U1+O2+U3+");
        let f = f_poly(&d).unwrap();
        assert_eq!(
            f,
            LaurentPoly::from_pairs([(-16, -1i64), (-12, 1), (-4, 1)])
        );
        let fm = f_poly(&d.mirror()).unwrap();
        assert_eq!(fm, f.mirror());
        assert_ne!(fm, f);
    }

    #[test]
    fn virtual_trefoil_bracket() {
        // hand expansion: states aa=1, ab=1, ba=1, bb=2 loops
        let d = dg("O1+O2+U1+U2+");
        let want = LaurentPoly::from_pairs([(2, 1i64), (0, 1), (-4, -1)]);
        assert_eq!(bracket(&d).unwrap(), want);
        let limits = BracketLimits::default();
        assert_eq!(bracket_state_sum(&d, &limits).unwrap(), want);
    }

    #[test]
    fn bracket_of_mirror_is_mirror_of_bracket() {
        for seed in 0..20u64 {
            let d = random_diagram(5, 2000 + seed);
            let b = bracket(&d).unwrap();
            assert_eq!(bracket(&d.mirror()).unwrap(), b.mirror(), "seed {seed}");
        }
    }

    #[test]
    fn knot_f_poly_is_one_at_a_equals_one() {
        use num_bigint::BigInt;
        for seed in 0..20u64 {
            let d = random_diagram(6, 3000 + seed);
            let f = f_poly(&d).unwrap();
            assert_eq!(f.eval_int(1).unwrap(), BigInt::from(1), "seed {seed}");
        }
    }

    #[test]
    fn unknot_cables() {
        let u = Diagram::empty();
        for n in 1..=4usize {
            let b = n_bracket(&u, n).unwrap();
            assert_eq!(b, LaurentPoly::d_power(n - 1));
        }
    }

    #[test]
    fn kink_two_cable_matches_enumeration() {
        let d = dg("O1+U1+").cable(2);
        let limits = BracketLimits::default();
        assert_eq!(bracket(&d).unwrap(), bracket_state_sum(&d, &limits).unwrap());
    }

    #[test]
    fn state_sum_guard() {
        let d = random_diagram(6, 1);
        let limits = BracketLimits { max_states: 32, max_frontier: 1 << 20 };
        let err = bracket_state_sum(&d, &limits).unwrap_err();
        assert_eq!(err.what, "state count");
    }

    #[test]
    fn frontier_guard() {
        let d = random_diagram(8, 2);
        let limits = BracketLimits { max_states: 1 << 25, max_frontier: 1 };
        assert!(bracket_with(&d, &limits).is_err());
    }

    #[test]
    fn contraction_order_is_permutation() {
        let d = random_diagram(9, 5);
        let mut order = contraction_order(&d);
        order.sort_unstable();
        assert_eq!(order, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn skein_expansion_at_each_crossing() {
        use crate::diagram::Smoothing;
        for seed in 0..12u64 {
            let d = random_diagram(5, 4000 + seed);
            let b = bracket(&d).unwrap();
            for c in 0..d.crossing_count() {
                let a_side = bracket(&d.smooth_crossing(c, Smoothing::Alpha)).unwrap();
                let b_side = bracket(&d.smooth_crossing(c, Smoothing::Beta)).unwrap();
                let want = a_side
                    .mul(&LaurentPoly::monomial(1, 1))
                    .add(&b_side.mul(&LaurentPoly::monomial(1, -1)));
                assert_eq!(b, want, "seed {seed} crossing {c}");
            }
        }
    }
}
