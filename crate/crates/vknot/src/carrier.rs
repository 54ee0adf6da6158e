//! The abstract surface a diagram embeds in, and what state curves do there.
//!
//! A diagram spans a ribbon surface: one disk per crossing with its four
//! band stubs in counterclockwise port order, one band per edge.  Capping
//! the boundary circles gives a closed oriented surface.  State curves of a
//! smoothing live on that surface, so each carries a first homology class;
//! grouping the bracket state sum by those classes refines the bracket, and
//! pairs of classes meeting across a handle witness that no handle can be
//! cancelled, certifying that the diagram is not classical.

use crate::diagram::{crossing_of, Diagram, DiagramError, EdgeId, End, StateAssignment};
use crate::laurent::LaurentPoly;
use crate::TooLarge;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Genus and symplectic homology data of the carrying surface.
#[derive(Debug, Clone)]
pub struct SurfaceData {
    pub genus: usize,
    /// boundary circles of the uncapped ribbon surface, crossingless loop
    /// annuli included
    pub boundary_count: usize,
    /// symplectic basis cycles, one row per basis vector, in the coordinates
    /// of the fundamental loops left by a spanning forest
    pub h1_basis: Vec<Vec<i64>>,
    /// pairing of the basis rows: standard blocks, a_k meets b_k once
    pub intersection_form: Vec<Vec<i64>>,
    /// fundamental loop index of each non-forest edge
    loop_of_edge: HashMap<EdgeId, usize>,
    /// pairing of the fundamental loops themselves
    q: Vec<Vec<i64>>,
}

fn rot_next(e: End) -> End {
    4 * crossing_of(e) + (e % 4 + 1) % 4
}

/// Homology classes of one state's curves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateCurveClass {
    /// classes of the homologically nontrivial curves, each of length 2g,
    /// sign-normalized and sorted
    pub nontrivial: Vec<Vec<i64>>,
    /// curves with trivial class, crossingless loops included
    pub trivial: usize,
    /// this state's contribution A^(c(s)) d^(trivial)
    pub coeff: LaurentPoly,
}

impl SurfaceData {
    fn pair(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut out = 0i64;
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0 {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                out += xi * self.q[i][j] * yj;
            }
        }
        out
    }

    /// Express a loop-coordinate cycle in the symplectic basis, dropping the
    /// radical (the capped boundary directions).
    fn symplectic_coords(&self, x: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; 2 * self.genus];
        for k in 0..self.genus {
            out[2 * k] = self.pair(x, &self.h1_basis[2 * k + 1]);
            out[2 * k + 1] = -self.pair(x, &self.h1_basis[2 * k]);
        }
        out
    }
}

/// Build the carrying surface: count boundary circles by walking corner
/// orbits, take genus from the Euler characteristic, then contract a
/// spanning forest and reduce the loop pairing to a symplectic basis.
pub fn carrying_surface(d: &Diagram) -> SurfaceData {
    let nc = d.crossing_count();
    let ends = 4 * nc;

    // graph components over crossings, and a spanning forest of mate pairs
    let mut comp = vec![usize::MAX; nc];
    let mut forest: Vec<(End, End)> = Vec::new();
    let mut ncomp = 0usize;
    for start in 0..nc {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = ncomp;
        let mut queue = vec![start];
        while let Some(c) = queue.pop() {
            for p in 0..4 {
                let h = 4 * c + p;
                let m = d.mate(h);
                let c2 = crossing_of(m);
                if comp[c2] == usize::MAX {
                    comp[c2] = ncomp;
                    forest.push((h, m));
                    queue.push(c2);
                }
            }
        }
        ncomp += 1;
    }

    // boundary circles: orbits of corner steps (cross the band, turn once)
    let mut seen = vec![false; ends];
    let mut orbits_in = vec![0usize; ncomp];
    for e0 in 0..ends {
        if seen[e0] {
            continue;
        }
        orbits_in[comp[crossing_of(e0)]] += 1;
        let mut cur = e0;
        loop {
            seen[cur] = true;
            cur = rot_next(d.mate(cur));
            if cur == e0 {
                break;
            }
        }
    }

    let mut genus = 0usize;
    let mut crossings_in = vec![0usize; ncomp];
    for c in 0..nc {
        crossings_in[comp[c]] += 1;
    }
    for k in 0..ncomp {
        let even = 2 + crossings_in[k] - orbits_in[k];
        assert!(even % 2 == 0, "odd Euler characteristic");
        genus += even / 2;
    }
    let boundary_count = orbits_in.iter().sum::<usize>() + 2 * d.free_loops();

    // contract the forest; each survivor is a one-vertex rotation
    let mut parent: Vec<usize> = (0..nc).collect();
    fn find(parent: &mut Vec<usize>, mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut rot: Vec<Vec<End>> = (0..nc).map(|c| (4 * c..4 * c + 4).collect()).collect();
    for &(h1, h2) in &forest {
        let u = find(&mut parent, crossing_of(h1));
        let v = find(&mut parent, crossing_of(h2));
        debug_assert_ne!(u, v);
        let ru = std::mem::take(&mut rot[u]);
        let rv = std::mem::take(&mut rot[v]);
        let i = ru.iter().position(|&x| x == h1).unwrap();
        let j = rv.iter().position(|&x| x == h2).unwrap();
        let mut merged = Vec::with_capacity(ru.len() + rv.len() - 2);
        merged.extend_from_slice(&ru[..i]);
        merged.extend_from_slice(&rv[j + 1..]);
        merged.extend_from_slice(&rv[..j]);
        merged.extend_from_slice(&ru[i + 1..]);
        parent[v] = u;
        rot[u] = merged;
    }

    // fundamental loops = non-forest edges
    let in_forest: Vec<(End, End)> = forest;
    let mut loop_of_edge: HashMap<EdgeId, usize> = HashMap::new();
    for e in d.edges() {
        if !in_forest.iter().any(|&(a, b)| a == e || b == e) {
            let idx = loop_of_edge.len();
            loop_of_edge.insert(e, idx);
        }
    }
    let m = loop_of_edge.len();

    // chord pairing: loops in one rotation meet once when their end slots
    // interleave, the side of the first-met slot fixing the sign
    let mut slot: HashMap<End, (usize, usize)> = HashMap::new(); // end -> (vertex, pos)
    for c in 0..nc {
        if find(&mut parent, c) == c {
            for (pos, &h) in rot[c].iter().enumerate() {
                slot.insert(h, (c, pos));
            }
        }
    }
    let mut q = vec![vec![0i64; m]; m];
    let loops: Vec<EdgeId> = {
        let mut v: Vec<EdgeId> = loop_of_edge.keys().copied().collect();
        v.sort();
        v
    };
    for &e in &loops {
        for &f in &loops {
            if e == f {
                continue;
            }
            let (ve, se) = slot[&e];
            let (_, te) = slot[&d.mate(e)];
            let (vf, sf) = slot[&f];
            let (_, tf) = slot[&d.mate(f)];
            if ve != vf {
                continue;
            }
            let len = rot[ve].len();
            let in_arc = |x: usize| {
                let rel = (x + len - se) % len;
                let hi = (te + len - se) % len;
                rel > 0 && rel < hi
            };
            let (a, b) = (in_arc(sf), in_arc(tf));
            if a != b {
                q[loop_of_edge[&e]][loop_of_edge[&f]] = if a { 1 } else { -1 };
            }
        }
    }

    let (h1_basis, rank) = symplectic_reduce(&q);
    assert_eq!(rank, 2 * genus, "pairing rank disagrees with Euler genus");
    let mut intersection_form = vec![vec![0i64; rank]; rank];
    for i in 0..rank {
        for j in 0..rank {
            let mut acc = 0i64;
            for (a, &xa) in h1_basis[i].iter().enumerate() {
                for (b, &yb) in h1_basis[j].iter().enumerate() {
                    acc += xa * q[a][b] * yb;
                }
            }
            intersection_form[i][j] = acc;
            let expect = if i / 2 == j / 2 {
                if i + 1 == j {
                    1
                } else if j + 1 == i {
                    -1
                } else {
                    0
                }
            } else {
                0
            };
            assert_eq!(acc, expect, "basis is not standard at ({i},{j})");
        }
    }
    SurfaceData {
        genus,
        boundary_count,
        h1_basis: h1_basis.into_iter().take(rank).collect(),
        intersection_form,
        loop_of_edge,
        q,
    }
}

/// Bring a skew pairing to standard form by a unimodular change of basis.
/// Returns the new basis rows (symplectic pairs first, then the radical) and
/// the rank.  Panics if some pair's pairing value is not a unit, which a
/// surface pairing never produces.
fn symplectic_reduce(q: &[Vec<i64>]) -> (Vec<Vec<i64>>, usize) {
    let m = q.len();
    let mut p: Vec<Vec<i64>> = q.to_vec();
    let mut basis: Vec<Vec<i64>> = (0..m)
        .map(|i| (0..m).map(|j| i64::from(i == j)).collect())
        .collect();
    // congruence ops keep p = basis q basis^T
    let row_add = |p: &mut Vec<Vec<i64>>, basis: &mut Vec<Vec<i64>>, dst: usize, src: usize, c: i64| {
        for t in 0..m {
            let v = p[src][t];
            p[dst][t] += c * v;
        }
        for t in 0..m {
            let v = p[t][src];
            p[t][dst] += c * v;
        }
        for t in 0..m {
            let v = basis[src][t];
            basis[dst][t] += c * v;
        }
    };
    let swap = |p: &mut Vec<Vec<i64>>, basis: &mut Vec<Vec<i64>>, a: usize, b: usize| {
        p.swap(a, b);
        for row in p.iter_mut() {
            row.swap(a, b);
        }
        basis.swap(a, b);
    };
    let mut k = 0usize;
    while k < m {
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..m {
            for j in i + 1..m {
                if p[i][j] != 0
                    && pivot.is_none_or(|(a, b)| p[i][j].abs() < p[a][b].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((i, j)) = pivot else { break };
        swap(&mut p, &mut basis, k, i);
        swap(&mut p, &mut basis, k + 1, j);
        'euclid: loop {
            let delta = p[k][k + 1];
            debug_assert_ne!(delta, 0);
            for t in k + 2..m {
                if p[k][t] != 0 {
                    let c = -rounded_quot(p[k][t], delta);
                    row_add(&mut p, &mut basis, t, k + 1, c);
                    if p[k][t] != 0 {
                        swap(&mut p, &mut basis, k + 1, t);
                        continue 'euclid;
                    }
                }
            }
            for t in k + 2..m {
                if p[k + 1][t] != 0 {
                    let c = rounded_quot(p[k + 1][t], delta);
                    row_add(&mut p, &mut basis, t, k, c);
                    if p[k + 1][t] != 0 {
                        swap(&mut p, &mut basis, k, k + 1);
                        swap(&mut p, &mut basis, k + 1, t);
                        continue 'euclid;
                    }
                }
            }
            break;
        }
        if p[k][k + 1] < 0 {
            let c = -1;
            for t in 0..m {
                p[k + 1][t] *= c;
            }
            for t in 0..m {
                p[t][k + 1] *= c;
            }
            for t in 0..m {
                basis[k + 1][t] *= c;
            }
        }
        assert_eq!(p[k][k + 1], 1, "pairing block is not a unit");
        k += 2;
    }
    (basis, k)
}

fn rounded_quot(a: i64, b: i64) -> i64 {
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + if (r < 0) == (b < 0) { 1 } else { -1 }
    } else {
        q
    }
}

fn canonical_class(mut v: Vec<i64>) -> Vec<i64> {
    if let Some(first) = v.iter().find(|&&x| x != 0) {
        if *first < 0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
    v
}

fn classify_on(
    d: &Diagram,
    surface: &SurfaceData,
    state: &StateAssignment,
) -> Result<StateCurveClass, DiagramError> {
    let curves = d.smooth_loops(state)?;
    let m = surface.q.len();
    let mut nontrivial = Vec::new();
    let mut trivial = d.free_loops();
    for traversal in &curves {
        let mut x = vec![0i64; m];
        for &(edge, forward) in traversal {
            if let Some(&idx) = surface.loop_of_edge.get(&edge) {
                x[idx] += if forward { 1 } else { -1 };
            }
        }
        let class = canonical_class(surface.symplectic_coords(&x));
        if class.iter().all(|&c| c == 0) {
            trivial += 1;
        } else {
            nontrivial.push(class);
        }
    }
    nontrivial.sort();
    let coeff = LaurentPoly::monomial(1, state.alpha_excess())
        .mul(&LaurentPoly::d_power(trivial));
    Ok(StateCurveClass { nontrivial, trivial, coeff })
}

/// Classes of one state's curves on a freshly built carrying surface.
pub fn state_homology(
    d: &Diagram,
    state: &StateAssignment,
) -> Result<StateCurveClass, DiagramError> {
    classify_on(d, &carrying_surface(d), state)
}

/// One group of the class-refined state sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceTerm {
    /// shared multiset of nontrivial curve classes, sorted
    pub classes: Vec<Vec<i64>>,
    /// sum of A^(c(s)) d^(trivial) over the group's states
    pub coeff: LaurentPoly,
    pub state_count: usize,
    /// at most two representative states
    pub exemplars: Vec<StateAssignment>,
}

const MAX_SURFACE_CROSSINGS: usize = 25;

/// The bracket state sum refined by curve classes: states are grouped by the
/// multiset of their nontrivial classes.  Groups whose coefficient sums to
/// zero are dropped.
pub fn surface_bracket(d: &Diagram) -> Result<Vec<SurfaceTerm>, TooLarge> {
    let n = d.crossing_count();
    if n > MAX_SURFACE_CROSSINGS {
        return Err(TooLarge {
            what: "state count",
            size: n,
            limit: MAX_SURFACE_CROSSINGS,
        });
    }
    let surface = carrying_surface(d);
    let mut groups: BTreeMap<Vec<Vec<i64>>, SurfaceTerm> = BTreeMap::new();
    for mask in 0u64..1u64 << n {
        let state = StateAssignment::from_mask(mask, n);
        let cls = classify_on(d, &surface, &state).expect("state covers the diagram");
        let entry = groups.entry(cls.nontrivial.clone()).or_insert_with(|| SurfaceTerm {
            classes: cls.nontrivial.clone(),
            coeff: LaurentPoly::zero(),
            state_count: 0,
            exemplars: Vec::new(),
        });
        entry.coeff = entry.coeff.add(&cls.coeff);
        entry.state_count += 1;
        if entry.exemplars.len() < 2 {
            entry.exemplars.push(state);
        }
    }
    Ok(groups.into_values().filter(|t| !t.coeff.is_zero()).collect())
}

/// A handle certified by two curves whose classes meet across it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandleWitness {
    pub handle: usize,
    pub state_a: StateAssignment,
    pub class_a: Vec<i64>,
    pub state_b: StateAssignment,
    pub class_b: Vec<i64>,
    /// determinant of the two classes projected to this handle's coordinates
    pub det: i64,
}

/// Outcome of the handle cancellation search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    /// every handle is blocked, so the carrying genus is minimal and the
    /// diagram is neither trivial nor classical
    Certificate { genus: usize, witnesses: Vec<HandleWitness> },
    /// no conclusion; never a claim of classicality
    Inconclusive { reason: String },
}

/// For each handle, look for two surviving state curves whose classes have a
/// nonzero determinant when projected to that handle.  Witnesses for every
/// handle mean no handle admits a cancellation curve, so the surface genus
/// is the minimal one and the diagram cannot be classical.
pub fn obstruction_test(d: &Diagram) -> Result<Obstruction, TooLarge> {
    let surface = carrying_surface(d);
    if surface.genus == 0 {
        return Ok(Obstruction::Inconclusive {
            reason: "carrying surface has genus 0".into(),
        });
    }
    let terms = surface_bracket(d)?;
    // every distinct surviving class with one exemplar state holding it
    let mut by_class: BTreeMap<Vec<i64>, StateAssignment> = BTreeMap::new();
    for t in &terms {
        for cls in &t.classes {
            by_class.entry(cls.clone()).or_insert_with(|| t.exemplars[0].clone());
        }
    }
    let candidates: Vec<(&Vec<i64>, &StateAssignment)> = by_class.iter().collect();
    let mut witnesses = Vec::new();
    for handle in 0..surface.genus {
        let proj = |v: &[i64]| (v[2 * handle], v[2 * handle + 1]);
        let mut found = None;
        'search: for (ia, &(ca, sa)) in candidates.iter().enumerate() {
            for &(cb, sb) in &candidates[ia..] {
                let (a0, a1) = proj(ca);
                let (b0, b1) = proj(cb);
                let det = a0 * b1 - a1 * b0;
                if det != 0 {
                    found = Some(HandleWitness {
                        handle,
                        state_a: sa.clone(),
                        class_a: ca.clone(),
                        state_b: sb.clone(),
                        class_b: cb.clone(),
                        det,
                    });
                    break 'search;
                }
            }
        }
        match found {
            Some(w) => witnesses.push(w),
            None => {
                return Ok(Obstruction::Inconclusive {
                    reason: format!("no witness pair for handle {handle}"),
                })
            }
        }
    }
    Ok(Obstruction::Certificate { genus: surface.genus, witnesses })
}
