//! Reidemeister moves on diagrams.
//!
//! Moves are addressed combinatorially: curls and bigons by the crossings
//! they remove, insertions by the edges they modify, triangle slides by the
//! three crossings involved.  Application never guesses: if the named
//! location does not carry the requested pattern the move is rejected with
//! `PatternNotFound`.
//!
//! Only moves of the first kind change the writhe; every move preserves the
//! writhe-normalized bracket, the cabled brackets, and the group invariants,
//! which is what the fuzz suites check.

use crate::diagram::{crossing_of, Diagram, DiagramError, EdgeId, End, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Put a curl on an edge, or on a crossingless loop when `edge` is None.
    CurlAdd { edge: Option<EdgeId>, over_first: bool, sign: Sign },
    /// Undo a curl at this crossing.
    CurlRemove { crossing: usize },
    /// Slide one strand over another, creating a cancelling pair. `first_sign`
    /// is the sign of the first crossing created; the second is opposite.
    PairAdd { a: EdgeId, b: EdgeId, a_over: bool, first_sign: Sign },
    /// Cancel a pair of crossings forming a bigon.
    PairRemove { x: usize, y: usize },
    /// Slide a strand across the crossing of two others.
    Triangle { x: usize, y: usize, z: usize },
}

fn strand_through_bypass(d: &Diagram, c: usize) -> impl Fn(End) -> End + '_ {
    let (oi, oo, ui, uo) = (d.over_in(c), d.over_out(c), d.under_in(c), d.under_out(c));
    move |e: End| {
        if e == oi {
            oo
        } else if e == oo {
            oi
        } else if e == ui {
            uo
        } else {
            debug_assert_eq!(e, uo);
            ui
        }
    }
}

/// Crossings currently removable by a curl move.
pub fn curl_sites(d: &Diagram) -> Vec<usize> {
    (0..d.crossing_count())
        .filter(|&c| {
            d.mate(d.over_out(c)) == d.under_in(c) || d.mate(d.under_out(c)) == d.over_in(c)
        })
        .collect()
}

/// Crossing pairs currently removable by a bigon move: one strand runs over
/// both crossings along a single edge, the other under both, signs opposite.
pub fn pair_sites(d: &Diagram) -> Vec<(usize, usize)> {
    let n = d.crossing_count();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if d.sign(x) == d.sign(y) {
                continue;
            }
            let over_bridge = d.mate(d.over_out(x)) == d.over_in(y)
                || d.mate(d.over_out(y)) == d.over_in(x);
            let under_bridge = d.mate(d.under_out(x)) == d.under_in(y)
                || d.mate(d.under_out(y)) == d.under_in(x);
            if over_bridge && under_bridge {
                out.push((x, y));
            }
        }
    }
    out
}

/// A matched triangle: three crossings pairwise joined by single edges, with
/// one strand over two crossings, one mixed, one under two, and a consistent
/// planar sign pattern.
struct TrianglePattern {
    /// per strand: ports at its first and second crossing along its travel
    strands: [StrandLeg; 3],
}

struct StrandLeg {
    f_in: End,
    f_out: End,
    s_in: End,
    s_out: End,
}

fn edge_directions(d: &Diagram, fwd_from: End, fwd_to: End, rev_from: End, rev_to: End) -> Vec<i64> {
    // a strand may join two triangle crossings in either or both directions
    // (both when it wraps around through the rest of the diagram)
    let mut out = Vec::with_capacity(2);
    if d.mate(fwd_from) == fwd_to {
        out.push(1);
    }
    if d.mate(rev_from) == rev_to {
        out.push(-1);
    }
    out
}

fn find_triangle(d: &Diagram, x1: usize, x2: usize, x3: usize) -> Option<TrianglePattern> {
    // top strand over at x1 and x2
    let dts = edge_directions(d, d.over_out(x1), d.over_in(x2), d.over_out(x2), d.over_in(x1));
    // middle strand under at x1, over at x3
    let dms = edge_directions(d, d.under_out(x1), d.over_in(x3), d.over_out(x3), d.under_in(x1));
    // bottom strand under at x2 and x3
    let dbs = edge_directions(d, d.under_out(x2), d.under_in(x3), d.under_out(x3), d.under_in(x2));
    let (s1, s2, s3) = (d.sign(x1).as_i64(), d.sign(x2).as_i64(), d.sign(x3).as_i64());
    // plane realizability of the triangle ties the three signs to the three
    // edge directions through a single handedness
    let mut choice = None;
    'outer: for &dt in &dts {
        for &dm in &dms {
            for &db in &dbs {
                if s1 * dt * dm == s2 * dt * db && s2 * dt * db == s3 * dm * db {
                    choice = Some((dt, dm, db));
                    break 'outer;
                }
            }
        }
    }
    let (dt, dm, db) = choice?;
    let leg = |first: (End, End), second: (End, End)| StrandLeg {
        f_in: first.0,
        f_out: first.1,
        s_in: second.0,
        s_out: second.1,
    };
    let t_at_1 = (d.over_in(x1), d.over_out(x1));
    let t_at_2 = (d.over_in(x2), d.over_out(x2));
    let m_at_1 = (d.under_in(x1), d.under_out(x1));
    let m_at_3 = (d.over_in(x3), d.over_out(x3));
    let b_at_2 = (d.under_in(x2), d.under_out(x2));
    let b_at_3 = (d.under_in(x3), d.under_out(x3));
    Some(TrianglePattern {
        strands: [
            if dt > 0 { leg(t_at_1, t_at_2) } else { leg(t_at_2, t_at_1) },
            if dm > 0 { leg(m_at_1, m_at_3) } else { leg(m_at_3, m_at_1) },
            if db > 0 { leg(b_at_2, b_at_3) } else { leg(b_at_3, b_at_2) },
        ],
    })
}

/// All crossing triples (sorted ascending) where a triangle move applies.
pub fn triangle_sites(d: &Diagram) -> Vec<(usize, usize, usize)> {
    let n = d.crossing_count();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if resolve_triangle(d, a, b, c).is_some() {
                    out.push((a, b, c));
                }
            }
        }
    }
    out
}

fn resolve_triangle(d: &Diagram, a: usize, b: usize, c: usize) -> Option<TrianglePattern> {
    if a == b || b == c || a == c {
        return None;
    }
    for (x1, x2, x3) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
        if let Some(p) = find_triangle(d, x1, x2, x3) {
            return Some(p);
        }
    }
    None
}

fn apply_triangle(d: &Diagram, p: &TrianglePattern) -> Diagram {
    // endpoints of the six edges entering and leaving the triangle, written
    // symbolically so rewiring cannot trample edges that connect two of the
    // strands directly
    #[derive(Clone, Copy, PartialEq, Eq, Hash)]
    enum Attach {
        Exit(usize),
        Entry(usize),
        Conc(End),
    }
    let resolve_exit = |e: End| {
        for (k, s) in p.strands.iter().enumerate() {
            if e == s.s_out {
                return Attach::Exit(k);
            }
        }
        Attach::Conc(e)
    };
    let resolve_entry = |e: End| {
        for (k, s) in p.strands.iter().enumerate() {
            if e == s.f_in {
                return Attach::Entry(k);
            }
        }
        Attach::Conc(e)
    };
    let mut externals: Vec<(Attach, Attach)> = Vec::new();
    let mut push_unique = |pair: (Attach, Attach)| {
        if !externals.contains(&pair) {
            externals.push(pair);
        }
    };
    for (k, s) in p.strands.iter().enumerate() {
        push_unique((resolve_exit(d.mate(s.f_in)), Attach::Entry(k)));
        push_unique((Attach::Exit(k), resolve_entry(d.mate(s.s_out))));
    }
    let mut out = d.clone();
    out.name = None;
    // after the slide each strand meets its two crossings in the opposite
    // order: the internal edge now runs from the old second to the old first
    let new_end = |a: Attach| -> End {
        match a {
            Attach::Exit(k) => p.strands[k].f_out,
            Attach::Entry(k) => p.strands[k].s_in,
            Attach::Conc(e) => e,
        }
    };
    let link = |u: End, v: End, out: &mut Diagram| {
        out.set_mate(u, v);
    };
    for s in &p.strands {
        link(s.s_out, s.f_in, &mut out);
    }
    for &(src, tgt) in &externals {
        link(new_end(src), new_end(tgt), &mut out);
    }
    debug_assert_eq!(out.validate(), Ok(()));
    out
}

pub fn apply_move(d: &Diagram, m: &Move) -> Result<Diagram, DiagramError> {
    match *m {
        Move::CurlAdd { edge, over_first, sign } => {
            let mut out = d.clone();
            out.name = None;
            match edge {
                None => {
                    if d.free_loops() == 0 {
                        return Err(DiagramError::PatternNotFound(
                            "no crossingless loop to curl".into(),
                        ));
                    }
                    out.curl_free_loop(sign);
                }
                Some(e) => {
                    if e >= 4 * d.crossing_count() || !d.is_exit(e) {
                        return Err(DiagramError::PatternNotFound(format!(
                            "{e} is not an edge exit end"
                        )));
                    }
                    out.curl_edge(e, over_first, sign);
                }
            }
            debug_assert_eq!(out.validate(), Ok(()));
            Ok(out)
        }
        Move::CurlRemove { crossing } => {
            if crossing >= d.crossing_count() {
                return Err(DiagramError::PatternNotFound(format!(
                    "no crossing {crossing}"
                )));
            }
            let over_curl = d.mate(d.over_out(crossing)) == d.under_in(crossing);
            let under_curl = d.mate(d.under_out(crossing)) == d.over_in(crossing);
            if !over_curl && !under_curl {
                return Err(DiagramError::PatternNotFound(format!(
                    "crossing {crossing} is not a curl"
                )));
            }
            Ok(d.excise(&[crossing], strand_through_bypass(d, crossing)))
        }
        Move::PairAdd { a, b, a_over, first_sign } => {
            for e in [a, b] {
                if e >= 4 * d.crossing_count() || !d.is_exit(e) {
                    return Err(DiagramError::PatternNotFound(format!(
                        "{e} is not an edge exit end"
                    )));
                }
            }
            if a == b {
                return Err(DiagramError::PatternNotFound(
                    "pair insertion needs two distinct edges".into(),
                ));
            }
            let mut out = d.clone();
            out.name = None;
            let fresh = out.half_twist((a, b), a_over, first_sign);
            out.half_twist(fresh, !a_over, first_sign.flip());
            debug_assert_eq!(out.validate(), Ok(()));
            Ok(out)
        }
        Move::PairRemove { x, y } => {
            let n = d.crossing_count();
            if x >= n || y >= n || x == y {
                return Err(DiagramError::PatternNotFound("bad crossing pair".into()));
            }
            let ok = d.sign(x) != d.sign(y)
                && (d.mate(d.over_out(x)) == d.over_in(y)
                    || d.mate(d.over_out(y)) == d.over_in(x))
                && (d.mate(d.under_out(x)) == d.under_in(y)
                    || d.mate(d.under_out(y)) == d.under_in(x));
            if !ok {
                return Err(DiagramError::PatternNotFound(format!(
                    "crossings {x},{y} do not bound a bigon"
                )));
            }
            let bx = strand_through_bypass(d, x);
            let by = strand_through_bypass(d, y);
            Ok(d.excise(&[x, y], move |e| if crossing_of(e) == x { bx(e) } else { by(e) }))
        }
        Move::Triangle { x, y, z } => {
            let n = d.crossing_count();
            if x >= n || y >= n || z >= n {
                return Err(DiagramError::PatternNotFound("bad crossing triple".into()));
            }
            match resolve_triangle(d, x, y, z) {
                Some(p) => Ok(apply_triangle(d, &p)),
                None => Err(DiagramError::PatternNotFound(format!(
                    "crossings {x},{y},{z} do not form a slidable triangle"
                ))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::{bracket, f_poly};
    use crate::codec;
    use crate::diagram::random_diagram;
    use rand::Rng;
    use rand::SeedableRng;

    fn dg(text: &str) -> Diagram {
        codec::parse(text).unwrap().realize()
    }

    #[test]
    fn curl_roundtrip_on_edges() {
        let d = dg("O1+O2+U1+U2+");
        for (i, &e) in d.edges().iter().enumerate() {
            for over_first in [true, false] {
                for sign in [Sign::Pos, Sign::Neg] {
                    let m = Move::CurlAdd { edge: Some(e), over_first, sign };
                    let d2 = apply_move(&d, &m).unwrap();
                    assert_eq!(d2.crossing_count(), 3);
                    let back =
                        apply_move(&d2, &Move::CurlRemove { crossing: 2 }).unwrap();
                    assert_eq!(back, d, "edge {i} over_first {over_first}");
                }
            }
        }
    }

    #[test]
    fn curl_on_free_loop_roundtrip() {
        let d = Diagram::empty();
        let d2 = apply_move(
            &d,
            &Move::CurlAdd { edge: None, over_first: true, sign: Sign::Pos },
        )
        .unwrap();
        assert_eq!(d2.crossing_count(), 1);
        assert_eq!(d2.free_loops(), 0);
        assert_eq!(d2, dg("O1+U1+"));
        let back = apply_move(&d2, &Move::CurlRemove { crossing: 0 }).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn curl_detection() {
        assert_eq!(curl_sites(&dg("O1+U1+")), vec![0]);
        assert_eq!(curl_sites(&dg("O1+O2+U1+U2+")), Vec::<usize>::new());
        assert_eq!(curl_sites(&dg("O1+U2+O3+U1+O2+U3+")), Vec::<usize>::new());
    }

    #[test]
    fn pair_roundtrip() {
        let d = dg("O1+U2+O3+U1+O2+U3+");
        let edges = d.edges();
        for a_over in [true, false] {
            for first_sign in [Sign::Pos, Sign::Neg] {
                let m = Move::PairAdd { a: edges[0], b: edges[2], a_over, first_sign };
                let d2 = apply_move(&d, &m).unwrap();
                assert_eq!(d2.crossing_count(), 5);
                assert_eq!(d2.writhe(), d.writhe());
                assert!(pair_sites(&d2).contains(&(3, 4)));
                let back = apply_move(&d2, &Move::PairRemove { x: 3, y: 4 }).unwrap();
                assert_eq!(back, d);
            }
        }
    }

    #[test]
    fn bracket_invariant_under_pair_moves() {
        for seed in 0..15u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = random_diagram(4, 100 + seed);
            let b = bracket(&d).unwrap();
            let edges = d.edges();
            let a = edges[rng.gen_range(0..edges.len())];
            let mut bb = edges[rng.gen_range(0..edges.len())];
            while bb == a {
                bb = edges[rng.gen_range(0..edges.len())];
            }
            let m = Move::PairAdd {
                a,
                b: bb,
                a_over: rng.gen(),
                first_sign: if rng.gen() { Sign::Pos } else { Sign::Neg },
            };
            let d2 = apply_move(&d, &m).unwrap();
            assert_eq!(bracket(&d2).unwrap(), b, "seed {seed}");
        }
    }

    #[test]
    fn f_poly_invariant_under_curls() {
        for seed in 0..10u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(500 + seed);
            let d = random_diagram(4, 200 + seed);
            let f = f_poly(&d).unwrap();
            let edges = d.edges();
            let m = Move::CurlAdd {
                edge: Some(edges[rng.gen_range(0..edges.len())]),
                over_first: rng.gen(),
                sign: if rng.gen() { Sign::Pos } else { Sign::Neg },
            };
            let d2 = apply_move(&d, &m).unwrap();
            assert_eq!(f_poly(&d2).unwrap(), f, "seed {seed}");
        }
    }

    fn braid(strands: usize, word: &[(usize, Sign)]) -> Diagram {
        codec::braid_closure(strands, word).realize()
    }

    #[test]
    fn triangle_on_slide_braid() {
        let d = braid(3, &[(1, Sign::Pos), (2, Sign::Pos), (1, Sign::Pos)]);
        let sites = triangle_sites(&d);
        assert_eq!(sites, vec![(0, 1, 2)]);
        let d2 = apply_move(&d, &Move::Triangle { x: 0, y: 1, z: 2 }).unwrap();
        assert_eq!(d2.crossing_count(), 3);
        assert_eq!(d2.writhe(), d.writhe());
        assert_eq!(bracket(&d2).unwrap(), bracket(&d).unwrap());
        assert_ne!(d2, d);
    }

    #[test]
    fn triangle_is_reversible() {
        let d = braid(3, &[(1, Sign::Neg), (2, Sign::Neg), (1, Sign::Neg)]);
        let (x, y, z) = triangle_sites(&d)[0];
        let d2 = apply_move(&d, &Move::Triangle { x, y, z }).unwrap();
        let back = apply_move(&d2, &Move::Triangle { x, y, z }).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn bracket_invariant_under_triangle_in_braids() {
        // random braid words with a guaranteed same-sign slide block
        let mut tried = 0;
        for seed in 0..40u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9000 + seed);
            let strands = 3 + (seed as usize % 2);
            let mut word: Vec<(usize, Sign)> = Vec::new();
            let rand_sign =
                |rng: &mut rand_chacha::ChaCha8Rng| if rng.gen() { Sign::Pos } else { Sign::Neg };
            for _ in 0..3 {
                word.push((rng.gen_range(1..strands), rand_sign(&mut rng)));
            }
            let i = rng.gen_range(1..strands - 1);
            let s = rand_sign(&mut rng);
            word.extend([(i, s), (i + 1, s), (i, s)]);
            for _ in 0..2 {
                word.push((rng.gen_range(1..strands), rand_sign(&mut rng)));
            }
            let d = braid(strands, &word);
            let b = bracket(&d).unwrap();
            let sites = triangle_sites(&d);
            assert!(!sites.is_empty(), "seed {seed}");
            for (x, y, z) in sites {
                let d2 = apply_move(&d, &Move::Triangle { x, y, z }).unwrap();
                assert_eq!(bracket(&d2).unwrap(), b, "seed {seed} triple {x},{y},{z}");
                assert_eq!(d2.writhe(), d.writhe());
                tried += 1;
            }
        }
        assert!(tried >= 40, "corpus produced too few triangles ({tried})");
    }

    #[test]
    fn bracket_invariant_under_triangle_in_random_corpus() {
        for seed in 0..150u64 {
            let d = random_diagram(5, 7000 + seed);
            let b = bracket(&d).unwrap();
            for (x, y, z) in triangle_sites(&d) {
                let d2 = apply_move(&d, &Move::Triangle { x, y, z }).unwrap();
                assert_eq!(bracket(&d2).unwrap(), b, "seed {seed} triple {x},{y},{z}");
            }
        }
    }

    #[test]
    fn rejects_bad_locations() {
        let d = dg("O1+O2+U1+U2+");
        assert!(matches!(
            apply_move(&d, &Move::CurlRemove { crossing: 0 }),
            Err(DiagramError::PatternNotFound(_))
        ));
        assert!(matches!(
            apply_move(&d, &Move::PairRemove { x: 0, y: 1 }),
            Err(DiagramError::PatternNotFound(_))
        ));
        assert!(matches!(
            apply_move(&d, &Move::Triangle { x: 0, y: 1, z: 1 }),
            Err(DiagramError::PatternNotFound(_))
        ));
    }
}
