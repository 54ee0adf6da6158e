//! Fundamental group presentations read off a diagram, and their invariants.
//!
//! Generators correspond to arcs: maximal strand runs between under-passes,
//! unbroken by over-passes (plus one free generator per crossingless loop).
//! Each crossing contributes one relator stating that the outgoing under
//! arc is the incoming one conjugated by the over arc, with the conjugation
//! direction set by the crossing sign.  The group is invariant under all
//! three moves, which the fuzz suites exercise through finite quotient
//! counts.

use crate::diagram::{Diagram, DiagramError, TwistSite};
use crate::snf::snf_diagonal;
use crate::TooLarge;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// A finitely presented group: `gens` generators indexed from 0, relators as
/// words in `(generator, exponent sign)` letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub gens: usize,
    pub relators: Vec<Vec<(usize, i8)>>,
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\u{27e8}")?;
        for i in 0..self.gens {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "a{}", i + 1)?;
        }
        write!(f, " | ")?;
        for (k, rel) in self.relators.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            for (pos, &(g, e)) in rel.iter().enumerate() {
                if pos > 0 {
                    write!(f, ".")?;
                }
                write!(f, "a{}", g + 1)?;
                if e < 0 {
                    write!(f, "^-1")?;
                }
            }
        }
        write!(f, "\u{27e9}")
    }
}

/// Read the presentation off a diagram: arc generators, one conjugation
/// relator per crossing.
pub fn presentation(d: &Diagram) -> GroupPresentation {
    let edges = d.edges();
    let index_of: HashMap<usize, usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    // merge the edges of each over-pass into one arc
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    fn find(parent: &mut Vec<usize>, mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for c in 0..d.crossing_count() {
        let into_over = index_of[&d.mate(d.over_in(c))];
        let out_of_over = index_of[&d.over_out(c)];
        let (ri, ro) = (find(&mut parent, into_over), find(&mut parent, out_of_over));
        parent[ri.max(ro)] = ri.min(ro);
    }
    // arc generators numbered by smallest member edge
    let mut arc_no: HashMap<usize, usize> = HashMap::new();
    let mut arc_of = vec![usize::MAX; edges.len()];
    for i in 0..edges.len() {
        let r = find(&mut parent, i);
        let next = arc_no.len();
        arc_of[i] = *arc_no.entry(r).or_insert(next);
    }
    let gens = arc_no.len() + d.free_loops();
    let mut relators = Vec::with_capacity(d.crossing_count());
    for c in 0..d.crossing_count() {
        let b = arc_of[index_of[&d.mate(d.over_in(c))]];
        let a = arc_of[index_of[&d.mate(d.under_in(c))]];
        let out = arc_of[index_of[&d.under_out(c)]];
        // positive: out = b a b^-1, negative: out = b^-1 a b
        let rel = match d.sign(c) {
            crate::diagram::Sign::Pos => {
                vec![(out, -1), (b, 1), (a, 1), (b, -1)]
            }
            crate::diagram::Sign::Neg => {
                vec![(out, -1), (b, -1), (a, 1), (b, 1)]
            }
        };
        relators.push(rel);
    }
    GroupPresentation { gens, relators }
}

/// Presentation of a twisted family member.
pub fn family_presentation(
    base: &Diagram,
    site: &TwistSite,
    t: i64,
) -> Result<GroupPresentation, DiagramError> {
    Ok(presentation(&base.insert_twists(site, t)?))
}

fn reduce_word(w: &[(usize, i8)]) -> Vec<(usize, i8)> {
    // free reduction, then cyclic reduction (relators are cyclic words)
    let mut out: Vec<(usize, i8)> = Vec::with_capacity(w.len());
    for &l in w {
        if let Some(&(g, e)) = out.last() {
            if g == l.0 && e == -l.1 {
                out.pop();
                continue;
            }
        }
        out.push(l);
    }
    while out.len() >= 2 {
        let (first, last) = (out[0], *out.last().unwrap());
        if first.0 == last.0 && first.1 == -last.1 {
            out.pop();
            out.remove(0);
        } else {
            break;
        }
    }
    out
}

fn invert_word(w: &[(usize, i8)]) -> Vec<(usize, i8)> {
    w.iter().rev().map(|&(g, e)| (g, -e)).collect()
}

/// Tietze-style shrink: repeatedly eliminate a generator that some relator
/// determines in terms of the others (it appears in that relator exactly
/// once), substituting its word everywhere.  Growth is capped so the loop
/// always terminates with a presentation of the same group.
pub fn simplify(p: &GroupPresentation) -> GroupPresentation {
    let mut gens = p.gens;
    let mut relators: Vec<Vec<(usize, i8)>> =
        p.relators.iter().map(|w| reduce_word(w)).collect();
    let cap = 1usize << 20;
    loop {
        relators.retain(|w| !w.is_empty());
        relators.sort();
        relators.dedup();
        // shortest relator with a generator occurring exactly once wins
        let mut choice: Option<(usize, usize)> = None; // (relator, position)
        for (ri, w) in relators.iter().enumerate() {
            if choice.is_some_and(|(best, _)| relators[best].len() <= w.len()) {
                continue;
            }
            for (pos, &(g, _)) in w.iter().enumerate() {
                if w.iter().filter(|&&(h, _)| h == g).count() == 1 {
                    choice = Some((ri, pos));
                    break;
                }
            }
        }
        let Some((ri, pos)) = choice else { break };
        let w = relators[ri].clone();
        let (dead, e) = w[pos];
        // rotate so the relator reads g^e R = 1, then g = R^-e
        let mut tail: Vec<(usize, i8)> = w[pos + 1..].to_vec();
        tail.extend_from_slice(&w[..pos]);
        let replacement = if e > 0 { invert_word(&tail) } else { tail };
        let mut next = Vec::with_capacity(relators.len() - 1);
        let mut total = 0usize;
        for (i, w) in relators.iter().enumerate() {
            if i == ri {
                continue;
            }
            let mut nw = Vec::with_capacity(w.len());
            for &(g, e) in w {
                if g != dead {
                    nw.push((g, e));
                } else if e > 0 {
                    nw.extend_from_slice(&replacement);
                } else {
                    nw.extend(invert_word(&replacement));
                }
            }
            let nw = reduce_word(&nw);
            total += nw.len();
            if !nw.is_empty() {
                next.push(nw);
            }
        }
        if total > cap {
            break;
        }
        // compact generator indices
        for w in &mut next {
            for l in w.iter_mut() {
                if l.0 > dead {
                    l.0 -= 1;
                }
            }
        }
        gens -= 1;
        relators = next;
    }
    relators.sort();
    GroupPresentation { gens, relators }
}

/// Invariant factors of the abelianized group: torsion entries in ascending
/// divisibility order followed by one zero per free rank.
pub fn abelianization(p: &GroupPresentation) -> Vec<BigInt> {
    if p.gens == 0 {
        return Vec::new();
    }
    let mut m = vec![vec![BigInt::zero(); p.gens]; p.relators.len().max(1)];
    for (i, w) in p.relators.iter().enumerate() {
        for &(g, e) in w {
            m[i][g] += e as i64;
        }
    }
    let diag = snf_diagonal(m);
    let rank = diag.iter().filter(|x| !x.is_zero()).count();
    let mut out: Vec<BigInt> =
        diag.into_iter().filter(|x| !x.is_zero() && *x != BigInt::from(1)).collect();
    for _ in 0..p.gens - rank {
        out.push(BigInt::zero());
    }
    out
}

/// A finite group as a multiplication table; element 0 is the identity.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    pub name: String,
    order: usize,
    mul: Vec<u16>,
    inv: Vec<u16>,
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.order + b as usize]
    }

    pub fn inv(&self, a: u16) -> u16 {
        self.inv[a as usize]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order as u16)
            .all(|a| (0..self.order as u16).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    fn from_table(name: String, mul: Vec<u16>, order: usize) -> Self {
        let mut inv = vec![0u16; order];
        for a in 0..order {
            let mut found = false;
            for b in 0..order {
                if mul[a * order + b] == 0 {
                    inv[a] = b as u16;
                    found = true;
                    break;
                }
            }
            assert!(found, "element {a} has no inverse");
        }
        FiniteGroup { name, order, mul, inv }
    }

    /// Cyclic group of order `k`.
    pub fn cyclic(k: usize) -> Self {
        assert!(k >= 1 && k <= u16::MAX as usize);
        let mut mul = vec![0u16; k * k];
        for a in 0..k {
            for b in 0..k {
                mul[a * k + b] = ((a + b) % k) as u16;
            }
        }
        Self::from_table(format!("C{k}"), mul, k)
    }

    /// Symmetric group on `n` letters, elements in lexicographic order so the
    /// identity permutation is element 0.
    pub fn symmetric(n: usize) -> Self {
        assert!((1..=6).contains(&n));
        let mut perms: Vec<Vec<u8>> = Vec::new();
        let mut cur: Vec<u8> = (0..n as u8).collect();
        loop {
            perms.push(cur.clone());
            // next lexicographic permutation
            let Some(i) = (0..n - 1).rev().find(|&i| cur[i] < cur[i + 1]) else { break };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        let order = perms.len();
        let index: HashMap<Vec<u8>, u16> =
            perms.iter().enumerate().map(|(i, p)| (p.clone(), i as u16)).collect();
        let mut mul = vec![0u16; order * order];
        for (a, pa) in perms.iter().enumerate() {
            for (b, pb) in perms.iter().enumerate() {
                let composed: Vec<u8> = (0..n).map(|i| pa[pb[i] as usize]).collect();
                mul[a * order + b] = index[&composed];
            }
        }
        Self::from_table(format!("S{n}"), mul, order)
    }
}

/// Homomorphism counts into a finite group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomCount {
    pub total: u64,
    /// how many of them have nonabelian image
    pub nonabelian: u64,
}

/// Count homomorphisms from the presented group into `g` by backtracking
/// over generator images.  The presentation is simplified first; the search
/// is rejected if the assignment space after simplification still exceeds
/// `max_assignments`.
pub fn count_homs(
    p: &GroupPresentation,
    g: &FiniteGroup,
    max_assignments: u64,
) -> Result<HomCount, TooLarge> {
    let sp = simplify(p);
    let mut space = 1u128;
    for _ in 0..sp.gens {
        space = space.saturating_mul(g.order() as u128);
    }
    if space > max_assignments as u128 {
        return Err(TooLarge {
            what: "homomorphism search space",
            size: sp.gens,
            limit: max_assignments as usize,
        });
    }
    Ok(enumerate_homs(&sp, g))
}

fn eval_word(w: &[(usize, i8)], images: &[u16], g: &FiniteGroup) -> u16 {
    let mut acc = 0u16;
    for &(gen, e) in w {
        let x = if e > 0 { images[gen] } else { g.inv(images[gen]) };
        acc = g.mul(acc, x);
    }
    acc
}

fn enumerate_homs(p: &GroupPresentation, g: &FiniteGroup) -> HomCount {
    // relators become checkable once their highest generator is assigned
    let mut by_stage: Vec<Vec<&Vec<(usize, i8)>>> = vec![Vec::new(); p.gens + 1];
    let mut always = Vec::new();
    for w in &p.relators {
        match w.iter().map(|&(g0, _)| g0).max() {
            Some(m) => by_stage[m + 1].push(w),
            None => always.push(w),
        }
    }
    if always.iter().any(|w| eval_word(w, &[], g) != 0) {
        return HomCount { total: 0, nonabelian: 0 };
    }
    let mut images = vec![0u16; p.gens];
    let mut count = HomCount { total: 0, nonabelian: 0 };
    fn rec(
        stage: usize,
        p: &GroupPresentation,
        g: &FiniteGroup,
        by_stage: &[Vec<&Vec<(usize, i8)>>],
        images: &mut Vec<u16>,
        count: &mut HomCount,
    ) {
        if stage == p.gens {
            count.total += 1;
            let abelian_image = (0..p.gens).all(|i| {
                (i + 1..p.gens).all(|j| {
                    g.mul(images[i], images[j]) == g.mul(images[j], images[i])
                })
            });
            if !abelian_image {
                count.nonabelian += 1;
            }
            return;
        }
        for x in 0..g.order() as u16 {
            images[stage] = x;
            if by_stage[stage + 1].iter().all(|w| eval_word(w, images, g) == 0) {
                rec(stage + 1, p, g, by_stage, images, count);
            }
        }
    }
    rec(0, p, g, &by_stage, &mut images, &mut count);
    count
}

/// The count of homomorphisms into a cyclic group, derived from the
/// abelianization alone; cross checks the search.
pub fn cyclic_hom_count(invariant_factors: &[BigInt], k: u64) -> BigInt {
    let mut out = BigInt::from(1);
    for d in invariant_factors {
        if d.is_zero() {
            out *= k;
        } else {
            out *= num_integer::gcd(d.clone(), BigInt::from(k));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec;
    use crate::diagram::random_diagram;
    use rand::Rng;
    use rand::SeedableRng;

    fn dg(text: &str) -> Diagram {
        codec::parse(text).unwrap().realize()
    }

    fn factors(d: &Diagram) -> Vec<i64> {
        abelianization(&presentation(d))
            .into_iter()
            .map(|x| i64::try_from(x).unwrap())
            .collect()
    }

    #[test]
    fn unknot_presentations() {
        let empty = Diagram::empty();
        let p = presentation(&empty);
        assert_eq!(p.gens, 1);
        assert!(p.relators.is_empty());
        assert_eq!(factors(&empty), vec![0]);
        assert_eq!(factors(&dg("O1+U1+")), vec![0]);
        assert_eq!(factors(&dg("O1-U1-")), vec![0]);
    }

    #[test]
    fn knot_abelianization_is_infinite_cyclic() {
        // one meridian class per component survives abelianization
        for text in ["O1+U2+O3+U1+O2+U3+", "O1+O2+U1+U2+"] {
            assert_eq!(factors(&dg(text)), vec![0]);
        }
        for seed in 0..20u64 {
            let d = random_diagram(5, 600 + seed);
            assert_eq!(factors(&d), vec![0], "seed {seed}");
        }
    }

    #[test]
    fn link_abelianization_counts_components() {
        let hopf = dg("O1+U2+/U1+O2+");
        assert_eq!(factors(&hopf), vec![0, 0]);
        assert_eq!(factors(&dg("/")), vec![0, 0]);
    }

    #[test]
    fn knot_presentations_have_one_arc_per_crossing() {
        let p = presentation(&dg("O1+U2+O3+U1+O2+U3+"));
        assert_eq!(p.gens, 3);
        assert_eq!(p.relators.len(), 3);
        for seed in 0..10u64 {
            let d = random_diagram(6, 700 + seed);
            let p = presentation(&d);
            assert_eq!(p.gens, 6);
            assert_eq!(p.relators.len(), 6);
        }
    }

    #[test]
    fn simplify_trefoil_to_two_generators() {
        let s = simplify(&presentation(&dg("O1+U2+O3+U1+O2+U3+")));
        assert!(s.gens <= 2, "got {} gens", s.gens);
        assert!(!s.relators.is_empty());
    }

    #[test]
    fn commuting_conjugates_relator() {
        // two generators with a^-1 g a = g^-1 a g: infinite cyclic
        // abelianization, and honestly nonabelian images in S3
        let p = GroupPresentation {
            gens: 2,
            relators: vec![vec![(0, -1), (1, 1), (0, 1), (1, -1), (0, -1), (1, 1)]],
        };
        let inv = abelianization(&p);
        assert_eq!(inv, vec![BigInt::zero()]);
        let h = count_homs(&p, &FiniteGroup::symmetric(3), 1 << 30).unwrap();
        assert!(h.nonabelian >= 1);
        assert_eq!(
            BigInt::from(
                count_homs(&p, &FiniteGroup::cyclic(6), 1 << 30).unwrap().total
            ),
            cyclic_hom_count(&inv, 6)
        );
    }

    #[test]
    fn presentation_text_form() {
        let p = GroupPresentation {
            gens: 2,
            relators: vec![vec![(0, -1), (1, 1), (0, 1)]],
        };
        assert_eq!(p.to_string(), "\u{27e8}a1,a2 | a1^-1.a2.a1\u{27e9}");
    }

    #[test]
    fn simplify_handles_torsion_relator() {
        // <a | a^2> must not lose the torsion
        let p = GroupPresentation { gens: 1, relators: vec![vec![(0, 1), (0, 1)]] };
        let s = simplify(&p);
        assert_eq!(s.gens, 1);
        assert_eq!(abelianization(&s), vec![BigInt::from(2)]);
    }

    #[test]
    fn symmetric_groups() {
        let s3 = FiniteGroup::symmetric(3);
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        let s4 = FiniteGroup::symmetric(4);
        assert_eq!(s4.order(), 24);
        // associativity on the full table
        for a in 0..6u16 {
            for b in 0..6u16 {
                for c in 0..6u16 {
                    assert_eq!(s3.mul(s3.mul(a, b), c), s3.mul(a, s3.mul(b, c)));
                }
            }
        }
        for a in 0..6u16 {
            assert_eq!(s3.mul(a, s3.inv(a)), 0);
            assert_eq!(s3.mul(0, a), a);
            assert_eq!(s3.mul(a, 0), a);
        }
        assert!(FiniteGroup::cyclic(7).is_abelian());
    }

    #[test]
    fn trefoil_hom_counts() {
        let p = presentation(&dg("O1+U2+O3+U1+O2+U3+"));
        let s3 = FiniteGroup::symmetric(3);
        let h = count_homs(&p, &s3, 1 << 30).unwrap();
        // meridian images: six with cyclic image, six braid-related
        // transposition pairs with full image
        assert_eq!(h.total, 12);
        assert_eq!(h.nonabelian, 6);
        // the unknot sees only the cyclic part
        let u = count_homs(&presentation(&Diagram::empty()), &s3, 1 << 30).unwrap();
        assert_eq!(u.total, 6);
        assert_eq!(u.nonabelian, 0);
    }

    #[test]
    fn hom_counts_into_cyclic_match_abelianization() {
        for seed in 0..15u64 {
            let d = random_diagram(4, 800 + seed);
            let p = presentation(&d);
            let inv = abelianization(&p);
            for k in [2u64, 3, 4, 5, 6] {
                let formula = cyclic_hom_count(&inv, k);
                let search =
                    count_homs(&p, &FiniteGroup::cyclic(k as usize), 1 << 30).unwrap();
                assert_eq!(BigInt::from(search.total), formula, "seed {seed} k {k}");
                assert_eq!(search.nonabelian, 0);
            }
        }
    }

    #[test]
    fn simplification_preserves_hom_counts() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let s3 = FiniteGroup::symmetric(3);
        for case in 0..50 {
            let gens = rng.gen_range(1..4usize);
            let nrel = rng.gen_range(0..4usize);
            let relators: Vec<Vec<(usize, i8)>> = (0..nrel)
                .map(|_| {
                    let len = rng.gen_range(1..5usize);
                    (0..len)
                        .map(|_| {
                            (rng.gen_range(0..gens), if rng.gen() { 1i8 } else { -1 })
                        })
                        .collect()
                })
                .collect();
            let p = GroupPresentation { gens, relators };
            let s = simplify(&p);
            let a = enumerate_homs(&p, &s3);
            let b = enumerate_homs(&s, &s3);
            assert_eq!(a, b, "case {case}: {p} vs {s}");
        }
    }

    #[test]
    fn hom_search_space_guard() {
        let p = GroupPresentation { gens: 6, relators: vec![] };
        let s4 = FiniteGroup::symmetric(4);
        assert!(count_homs(&p, &s4, 1000).is_err());
    }

    #[test]
    fn group_invariant_under_moves() {
        use crate::moves::{apply_move, triangle_sites, Move};
        use crate::diagram::Sign;
        let s3 = FiniteGroup::symmetric(3);
        for seed in 0..8u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40 + seed);
            let d = random_diagram(4, 900 + seed);
            let p0 = count_homs(&presentation(&d), &s3, 1 << 30).unwrap();
            let edges = d.edges();
            let e1 = edges[rng.gen_range(0..edges.len())];
            let curl = apply_move(
                &d,
                &Move::CurlAdd {
                    edge: Some(e1),
                    over_first: rng.gen(),
                    sign: if rng.gen() { Sign::Pos } else { Sign::Neg },
                },
            )
            .unwrap();
            assert_eq!(count_homs(&presentation(&curl), &s3, 1 << 30).unwrap(), p0);
            let mut b = edges[rng.gen_range(0..edges.len())];
            while b == e1 {
                b = edges[rng.gen_range(0..edges.len())];
            }
            let pair = apply_move(
                &d,
                &Move::PairAdd { a: e1, b, a_over: rng.gen(), first_sign: Sign::Pos },
            )
            .unwrap();
            assert_eq!(count_homs(&presentation(&pair), &s3, 1 << 30).unwrap(), p0);
            for (x, y, z) in triangle_sites(&d) {
                let t = apply_move(&d, &Move::Triangle { x, y, z }).unwrap();
                assert_eq!(count_homs(&presentation(&t), &s3, 1 << 30).unwrap(), p0);
            }
        }
    }

    #[test]
    fn family_presentation_matches_direct() {
        let d = dg("O1+O2+U1+U2+");
        let edges = d.edges();
        let site = TwistSite::aligned(edges[0], edges[2]);
        for t in -2i64..=2 {
            let via_family = family_presentation(&d, &site, t).unwrap();
            let direct = presentation(&d.insert_twists(&site, t).unwrap());
            assert_eq!(via_family, direct);
        }
    }
}
