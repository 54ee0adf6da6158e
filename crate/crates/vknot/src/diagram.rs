//! Combinatorial virtual knot diagrams.
//!
//! A diagram is a set of classical crossings, each with four ports in a fixed
//! counterclockwise rotation, together with a perfect matching of ports into
//! directed edges.  Virtual crossings are never stored: an edge is a strand
//! segment that may pass through any number of them, which is exactly the
//! abstraction under which every invariant in this crate is well defined.
//!
//! Port layout at a crossing, counterclockwise: `E = 0, N = 1, W = 2, S = 3`.
//! The over-strand always enters at `S` and leaves at `N`.  A crossing is
//! positive when the under-strand direction is the over-strand direction
//! rotated a quarter turn counterclockwise, i.e. the under-strand enters at
//! `E` and leaves at `W`; negative is the reverse.  With this pairing the
//! positive curl `O1+U1+` has bracket `-A^3`.
//!
//! The alpha smoothing joins ports `(E,N)` and `(W,S)`; beta joins `(E,S)`
//! and `(N,W)`.  Alpha carries the `A` weight in the bracket state sum, and
//! the conventions are jointly normalized so that the positive curl above
//! evaluates to `-A^3`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const PORT_E: usize = 0;
pub const PORT_N: usize = 1;
pub const PORT_W: usize = 2;
pub const PORT_S: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    /// A state assignment does not cover exactly the crossings of the diagram.
    #[error("domain mismatch: state covers {got} crossings, diagram has {want}")]
    DomainMismatch { got: usize, want: usize },
    /// A twist site did not name two distinct existing edges.
    #[error("invalid twist site: {0}")]
    InvalidSite(String),
    /// A requested move does not match the diagram at the given location.
    #[error("pattern not found: {0}")]
    PatternNotFound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Sign::Pos => "+",
            Sign::Neg => "-",
        })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "+" => Ok(Sign::Pos),
            "-" => Ok(Sign::Neg),
            other => Err(serde::de::Error::custom(format!("bad sign `{other}`"))),
        }
    }
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Smoothing {
    Alpha,
    Beta,
}

/// A total assignment of a smoothing to every crossing, indexed by crossing id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateAssignment(pub Vec<Smoothing>);

impl StateAssignment {
    /// Bit `i` of `mask` set means crossing `i` takes the beta smoothing.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        StateAssignment(
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { Smoothing::Beta } else { Smoothing::Alpha })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Count of alpha smoothings minus count of beta smoothings.
    pub fn alpha_excess(&self) -> i64 {
        self.0
            .iter()
            .map(|s| match s {
                Smoothing::Alpha => 1i64,
                Smoothing::Beta => -1i64,
            })
            .sum()
    }
}

impl fmt::Display for StateAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            match s {
                Smoothing::Alpha => write!(f, "α")?,
                Smoothing::Beta => write!(f, "β")?,
            }
        }
        Ok(())
    }
}

// wire form: one letter per crossing, `a` for alpha and `b` for beta
impl Serialize for StateAssignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text: String = self
            .0
            .iter()
            .map(|m| if *m == Smoothing::Alpha { 'a' } else { 'b' })
            .collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for StateAssignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let mut v = Vec::new();
        for ch in text.chars() {
            match ch {
                'a' | 'α' => v.push(Smoothing::Alpha),
                'b' | 'β' => v.push(Smoothing::Beta),
                other => {
                    return Err(serde::de::Error::custom(format!(
                        "invalid smoothing letter `{other}`"
                    )))
                }
            }
        }
        Ok(StateAssignment(v))
    }
}

/// Port end encoding: end `4*crossing + port`.
pub type End = usize;

pub fn end_of(crossing: usize, port: usize) -> End {
    4 * crossing + port
}

pub fn crossing_of(end: End) -> usize {
    end / 4
}

pub fn port_of(end: End) -> usize {
    end % 4
}

/// An edge is identified by its exit end (the end it leaves from).
pub type EdgeId = End;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagram {
    /// Closed components carrying no classical crossing.
    free_loops: usize,
    /// Involution pairing each port end with the other end of its edge.
    mate: Vec<End>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub name: Option<String>,
    signs: Vec<Sign>,
}

impl PartialEq for Diagram {
    fn eq(&self, other: &Self) -> bool {
        self.signs == other.signs && self.mate == other.mate && self.free_loops == other.free_loops
    }
}
impl Eq for Diagram {}

impl Diagram {
    /// The empty diagram: a single crossingless loop.
    pub fn empty() -> Self {
        Diagram { signs: Vec::new(), mate: Vec::new(), free_loops: 1, name: None }
    }

    pub fn from_parts(signs: Vec<Sign>, mate: Vec<End>, free_loops: usize) -> Self {
        let d = Diagram { signs, mate, free_loops, name: None };
        debug_assert_eq!(d.validate(), Ok(()));
        d
    }

    pub fn crossing_count(&self) -> usize {
        self.signs.len()
    }

    pub fn free_loops(&self) -> usize {
        self.free_loops
    }

    pub fn sign(&self, c: usize) -> Sign {
        self.signs[c]
    }

    pub fn mate(&self, e: End) -> End {
        self.mate[e]
    }

    pub fn over_in(&self, c: usize) -> End {
        end_of(c, PORT_S)
    }

    pub fn over_out(&self, c: usize) -> End {
        end_of(c, PORT_N)
    }

    pub fn under_in(&self, c: usize) -> End {
        match self.signs[c] {
            Sign::Pos => end_of(c, PORT_E),
            Sign::Neg => end_of(c, PORT_W),
        }
    }

    pub fn under_out(&self, c: usize) -> End {
        match self.signs[c] {
            Sign::Pos => end_of(c, PORT_W),
            Sign::Neg => end_of(c, PORT_E),
        }
    }

    pub fn is_exit(&self, e: End) -> bool {
        let c = crossing_of(e);
        e == self.over_out(c) || e == self.under_out(c)
    }

    pub fn is_entry(&self, e: End) -> bool {
        !self.is_exit(e)
    }

    /// Strand continuation through a crossing: entry end to exit end.
    pub fn through(&self, entry: End) -> End {
        let c = crossing_of(entry);
        if entry == self.over_in(c) {
            self.over_out(c)
        } else {
            debug_assert_eq!(entry, self.under_in(c));
            self.under_out(c)
        }
    }

    /// All edges, each as its exit end, in ascending end order.
    pub fn edges(&self) -> Vec<EdgeId> {
        (0..self.mate.len()).filter(|&e| self.is_exit(e)).collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.mate.len() != 4 * self.signs.len() {
            return Err("mate table length mismatch".into());
        }
        for e in 0..self.mate.len() {
            let m = self.mate[e];
            if m >= self.mate.len() {
                return Err(format!("end {e} mated out of range"));
            }
            if m == e {
                return Err(format!("end {e} mated to itself"));
            }
            if self.mate[m] != e {
                return Err(format!("mate not an involution at {e}"));
            }
            if self.is_exit(e) == self.is_exit(m) {
                return Err(format!("edge {e}-{m} does not pair an exit with an entry"));
            }
        }
        if self.signs.is_empty() && self.free_loops == 0 {
            return Err("empty diagram must carry at least one crossingless loop".into());
        }
        Ok(())
    }

    /// Number of link components.
    pub fn components(&self) -> usize {
        self.component_entries().len() + self.free_loops
    }

    /// One representative entry end per wired component, each the smallest
    /// entry end on its component, in ascending order.
    pub fn component_entries(&self) -> Vec<End> {
        let mut seen = vec![false; self.mate.len()];
        let mut reps = Vec::new();
        for e in 0..self.mate.len() {
            if seen[e] || !self.is_entry(e) {
                continue;
            }
            reps.push(e);
            let mut cur = e;
            loop {
                seen[cur] = true;
                let exit = self.through(cur);
                cur = self.mate[exit];
                if cur == e {
                    break;
                }
            }
        }
        reps
    }

    /// The oriented pass sequence of one component, starting from `start`
    /// (an entry end): pairs of (crossing, is_over_pass).
    pub fn component_passes(&self, start: End) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        let mut cur = start;
        loop {
            let c = crossing_of(cur);
            out.push((c, cur == self.over_in(c)));
            let exit = self.through(cur);
            cur = self.mate[exit];
            if cur == start {
                break;
            }
        }
        out
    }

    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|s| s.as_i64()).sum()
    }

    fn smoothing_partner(&self, e: End, s: Smoothing) -> End {
        let c = crossing_of(e);
        let p = port_of(e);
        let q = match s {
            // alpha: (E,N) and (W,S); beta: (E,S) and (N,W)
            Smoothing::Alpha => match p {
                PORT_E => PORT_N,
                PORT_N => PORT_E,
                PORT_W => PORT_S,
                _ => PORT_W,
            },
            Smoothing::Beta => match p {
                PORT_E => PORT_S,
                PORT_S => PORT_E,
                PORT_N => PORT_W,
                _ => PORT_N,
            },
        };
        end_of(c, q)
    }

    /// Number of closed curves after smoothing every crossing per `state`.
    pub fn smooth_count(&self, state: &StateAssignment) -> Result<usize, DiagramError> {
        Ok(self.smooth_loops(state)?.len() + self.free_loops)
    }

    /// The smoothed curves of the wired part, each reported as the sequence
    /// of directed edge traversals `(edge exit end, forward?)`.
    pub fn smooth_loops(
        &self,
        state: &StateAssignment,
    ) -> Result<Vec<Vec<(EdgeId, bool)>>, DiagramError> {
        if state.len() != self.signs.len() {
            return Err(DiagramError::DomainMismatch {
                got: state.len(),
                want: self.signs.len(),
            });
        }
        let mut seen = vec![false; self.mate.len()];
        let mut loops = Vec::new();
        for e0 in 0..self.mate.len() {
            if seen[e0] {
                continue;
            }
            let mut traversal = Vec::new();
            let mut cur = e0;
            loop {
                seen[cur] = true;
                let arc = self.smoothing_partner(cur, state.0[crossing_of(cur)]);
                seen[arc] = true;
                // travel the edge leaving `arc`
                let next = self.mate[arc];
                if self.is_exit(arc) {
                    traversal.push((arc, true));
                } else {
                    traversal.push((next, false));
                }
                cur = next;
                if cur == e0 {
                    break;
                }
            }
            loops.push(traversal);
        }
        Ok(loops)
    }

    /// Blackboard-framed parallel copies: every crossing becomes an `N x N`
    /// grid of crossings of the same sign, every edge a ribbon of `N` edges.
    /// Copy `k` always rejoins copy `k` across a band; bands attach slot `s`
    /// at one port to slot `N-1-s` at the other, which is forced by drawing
    /// the copies inside an untwisted band.
    pub fn cable(&self, n: usize) -> Diagram {
        assert!(n >= 1, "cable width must be at least 1");
        if n == 1 {
            return self.clone();
        }
        let nc = self.signs.len();
        let mut signs = Vec::with_capacity(nc * n * n);
        for c in 0..nc {
            for _ in 0..n * n {
                signs.push(self.signs[c]);
            }
        }
        let gid = |c: usize, i: usize, j: usize| (c * n + i) * n + j;
        let mut mate = vec![usize::MAX; 4 * nc * n * n];
        let connect = |a: End, b: End, mate: &mut Vec<End>| {
            debug_assert_eq!(mate[a], usize::MAX);
            debug_assert_eq!(mate[b], usize::MAX);
            mate[a] = b;
            mate[b] = a;
        };
        // interior of each crossing disk
        for c in 0..nc {
            let pos_y = |j: usize| match self.signs[c] {
                Sign::Pos => j,
                Sign::Neg => n - 1 - j,
            };
            // over-copy i runs upward through y-positions 0..n
            for i in 0..n {
                for k in 0..n - 1 {
                    let ja = pos_y(k);
                    let jb = pos_y(k + 1);
                    // pos_y is an involution, so these are under-copy indices
                    connect(
                        end_of(gid(c, i, ja), PORT_N),
                        end_of(gid(c, i, jb), PORT_S),
                        &mut mate,
                    );
                }
            }
            // under-copy j runs across through x-positions
            for j in 0..n {
                for m in 0..n - 1 {
                    match self.signs[c] {
                        Sign::Pos => connect(
                            end_of(gid(c, n - 1 - m, j), PORT_W),
                            end_of(gid(c, n - 2 - m, j), PORT_E),
                            &mut mate,
                        ),
                        Sign::Neg => connect(
                            end_of(gid(c, m, j), PORT_E),
                            end_of(gid(c, m + 1, j), PORT_W),
                            &mut mate,
                        ),
                    }
                }
            }
        }
        // boundary slot maps: which grid end sits at slot s of port p of the
        // fattened crossing c, and whether that end is an exit
        let slot_end = |c: usize, p: usize, s: usize| -> End {
            let sg = self.signs[c];
            match p {
                PORT_S => end_of(gid(c, s, if sg == Sign::Pos { 0 } else { n - 1 }), PORT_S),
                PORT_N => {
                    end_of(gid(c, n - 1 - s, if sg == Sign::Pos { n - 1 } else { 0 }), PORT_N)
                }
                PORT_E => match sg {
                    Sign::Pos => end_of(gid(c, n - 1, s), PORT_E),
                    Sign::Neg => end_of(gid(c, n - 1, n - 1 - s), PORT_E),
                },
                _ => match sg {
                    Sign::Pos => end_of(gid(c, 0, n - 1 - s), PORT_W),
                    Sign::Neg => end_of(gid(c, 0, s), PORT_W),
                },
            }
        };
        // bands along the original edges
        for u in self.edges() {
            let v = self.mate[u];
            for s in 0..n {
                connect(
                    slot_end(crossing_of(u), port_of(u), s),
                    slot_end(crossing_of(v), port_of(v), n - 1 - s),
                    &mut mate,
                );
            }
        }
        debug_assert!(mate.iter().all(|&m| m != usize::MAX));
        let d = Diagram { signs, mate, free_loops: self.free_loops * n, name: None };
        debug_assert_eq!(d.validate(), Ok(()));
        d
    }

    /// Swap over and under at every crossing.  Signs flip; the local rotation
    /// is preserved by relabeling ports through a rigid quarter turn, so the
    /// carrying surface is unchanged.
    pub fn mirror(&self) -> Diagram {
        let relabel = |e: End| -> End {
            let c = crossing_of(e);
            let shift = match self.signs[c] {
                Sign::Pos => 3,
                Sign::Neg => 1,
            };
            end_of(c, (port_of(e) + shift) % 4)
        };
        let mut mate = vec![0; self.mate.len()];
        for e in 0..self.mate.len() {
            mate[relabel(e)] = relabel(self.mate[e]);
        }
        let d = Diagram {
            signs: self.signs.iter().map(|s| s.flip()).collect(),
            mate,
            free_loops: self.free_loops,
            name: None,
        };
        debug_assert_eq!(d.validate(), Ok(()));
        d
    }

    fn check_edge(&self, e: EdgeId) -> Result<(), DiagramError> {
        if e >= self.mate.len() || !self.is_exit(e) {
            return Err(DiagramError::InvalidSite(format!("{e} is not an edge exit end")));
        }
        Ok(())
    }

    pub(crate) fn set_mate(&mut self, u: End, v: End) {
        self.mate[u] = v;
        self.mate[v] = u;
    }

    /// Turn one crossingless loop into a standalone curl.
    pub(crate) fn curl_free_loop(&mut self, sign: Sign) {
        debug_assert!(self.free_loops > 0);
        self.free_loops -= 1;
        let c = self.signs.len();
        self.signs.push(sign);
        self.mate.extend_from_slice(&[0, 0, 0, 0]);
        self.set_mate(self.over_out(c), self.under_in(c));
        self.set_mate(self.under_out(c), self.over_in(c));
    }

    /// Put a curl on the edge leaving `e`; `over_first` picks which pass the
    /// strand makes first.
    pub(crate) fn curl_edge(&mut self, e: EdgeId, over_first: bool, sign: Sign) {
        let v = self.mate[e];
        let c = self.signs.len();
        self.signs.push(sign);
        self.mate.extend_from_slice(&[0, 0, 0, 0]);
        if over_first {
            self.set_mate(e, self.over_in(c));
            self.set_mate(self.over_out(c), self.under_in(c));
            self.set_mate(self.under_out(c), v);
        } else {
            self.set_mate(e, self.under_in(c));
            self.set_mate(self.under_out(c), self.over_in(c));
            self.set_mate(self.over_out(c), v);
        }
    }

    /// Insert one half twist between the ordered pair of edges.  `pos1_over`
    /// selects which strand crosses on top; returns the fresh pair in the
    /// same position convention (the strands trade positions).
    pub(crate) fn half_twist(
        &mut self,
        pair: (EdgeId, EdgeId),
        pos1_over: bool,
        sign: Sign,
    ) -> (EdgeId, EdgeId) {
        let (u1, u2) = pair;
        let (v1, v2) = (self.mate[u1], self.mate[u2]);
        let x = self.signs.len();
        self.signs.push(sign);
        self.mate.extend_from_slice(&[0, 0, 0, 0]);
        let (oi, oo, ui, uo) =
            (self.over_in(x), self.over_out(x), self.under_in(x), self.under_out(x));
        let link = |d: &mut Diagram, a: End, b: End| {
            d.mate[a] = b;
            d.mate[b] = a;
        };
        if pos1_over {
            link(self, u1, oi);
            link(self, oo, v2);
            link(self, u2, ui);
            link(self, uo, v1);
            (uo, oo)
        } else {
            link(self, u2, oi);
            link(self, oo, v1);
            link(self, u1, ui);
            link(self, uo, v2);
            (oo, uo)
        }
    }

    /// Insert one half twist between opposed arcs: each strand wraps the
    /// other but keeps its own destination, so the crossing count grows by one
    /// while the channel stays two antiparallel strands.  Returns the pair to
    /// twist next (the fresh stub on the first strand, the untouched tail of
    /// the second).
    pub(crate) fn half_twist_opposed(
        &mut self,
        pair: (EdgeId, EdgeId),
        pos1_over: bool,
        sign: Sign,
    ) -> (EdgeId, EdgeId) {
        let (u1, u2) = pair;
        let (v1, v2) = (self.mate[u1], self.mate[u2]);
        let x = self.signs.len();
        self.signs.push(sign);
        self.mate.extend_from_slice(&[0, 0, 0, 0]);
        let (oi, oo, ui, uo) =
            (self.over_in(x), self.over_out(x), self.under_in(x), self.under_out(x));
        let link = |d: &mut Diagram, a: End, b: End| {
            d.mate[a] = b;
            d.mate[b] = a;
        };
        if pos1_over {
            link(self, u1, oi);
            link(self, oo, v1);
            link(self, u2, ui);
            link(self, uo, v2);
            (oo, u2)
        } else {
            link(self, u1, ui);
            link(self, uo, v1);
            link(self, u2, oi);
            link(self, oo, v2);
            (uo, u2)
        }
    }

    /// Insert `t` half twists between the site's two edges, honouring the
    /// site's orientation convention.  Positive `t` inserts positive
    /// crossings, negative `t` negative ones; `t = 0` is the identity.
    pub fn insert_twists(&self, site: &TwistSite, t: i64) -> Result<Diagram, DiagramError> {
        self.check_edge(site.a)?;
        self.check_edge(site.b)?;
        if site.a == site.b {
            return Err(DiagramError::InvalidSite("twist site edges must be distinct".into()));
        }
        let mut d = self.clone();
        d.name = None;
        let mut pair = (site.a, site.b);
        for _ in 0..t.unsigned_abs() {
            pair = match (site.aligned, t > 0) {
                (true, true) => d.half_twist(pair, true, Sign::Pos),
                (true, false) => d.half_twist(pair, false, Sign::Neg),
                (false, true) => d.half_twist_opposed(pair, true, Sign::Pos),
                (false, false) => d.half_twist_opposed(pair, false, Sign::Neg),
            };
        }
        debug_assert_eq!(d.validate(), Ok(()));
        Ok(d)
    }

    /// Remove a set of crossings, rerouting strands through `bypass`, which
    /// maps each end of a removed crossing to the end it reconnects to within
    /// that crossing.  Cycles that consist entirely of removed material become
    /// crossingless loops.  The surviving wiring may be orientation
    /// inconsistent (smoothings can reverse strands); `reorient` repairs it.
    pub(crate) fn excise<F>(&self, removed: &[usize], bypass: F) -> Diagram
    where
        F: Fn(End) -> End,
    {
        let nc = self.signs.len();
        let mut gone = vec![false; nc];
        for &c in removed {
            gone[c] = true;
        }
        let keep: Vec<usize> = (0..nc).filter(|&c| !gone[c]).collect();
        let mut new_id = vec![usize::MAX; nc];
        for (i, &c) in keep.iter().enumerate() {
            new_id[c] = i;
        }
        let mut free = self.free_loops;
        // loops living entirely on removed crossings
        let mut seen = vec![false; self.mate.len()];
        for e0 in 0..self.mate.len() {
            if seen[e0] || !gone[crossing_of(e0)] {
                continue;
            }
            // walk mate/bypass alternately; if we never leave removed
            // territory the cycle is a free loop
            let mut cur = e0;
            let mut internal = true;
            loop {
                seen[cur] = true;
                let m = self.mate[cur];
                if !gone[crossing_of(m)] {
                    // chain reaches surviving material; handled below
                    internal = false;
                    break;
                }
                seen[m] = true;
                cur = bypass(m);
                if cur == e0 {
                    break;
                }
            }
            if internal {
                free += 1;
            }
        }
        // rebuild mate for surviving ends
        let mut mate = vec![usize::MAX; 4 * keep.len()];
        let map_end =
            |e: End| -> End { end_of(new_id[crossing_of(e)], port_of(e)) };
        for e in 0..self.mate.len() {
            if gone[crossing_of(e)] {
                continue;
            }
            if mate[map_end(e)] != usize::MAX {
                continue;
            }
            let mut cur = self.mate[e];
            while gone[crossing_of(cur)] {
                cur = self.mate[bypass(cur)];
            }
            mate[map_end(e)] = map_end(cur);
            mate[map_end(cur)] = map_end(e);
        }
        Diagram {
            signs: keep.iter().map(|&c| self.signs[c]).collect(),
            mate,
            free_loops: free,
            name: None,
        }
    }

    /// Restore the orientation convention (every edge exits one crossing and
    /// enters another) after a surgery that may have reversed strands.  Each
    /// wired component is re-traversed; a reversed over-pass is absorbed by a
    /// half-turn port relabel, a reversed under-pass by a sign flip, both
    /// together by the relabel alone.
    pub(crate) fn reorient(signs: Vec<Sign>, raw_mate: Vec<End>, free_loops: usize) -> Diagram {
        let n = signs.len();
        let strand_partner = |e: End, signs: &[Sign]| -> End {
            let c = crossing_of(e);
            let (oi, oo) = (end_of(c, PORT_S), end_of(c, PORT_N));
            let (ui, uo) = match signs[c] {
                Sign::Pos => (end_of(c, PORT_E), end_of(c, PORT_W)),
                Sign::Neg => (end_of(c, PORT_W), end_of(c, PORT_E)),
            };
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
        };
        // orient every pass: walk unoriented curves, recording for each
        // crossing whether its over and under passes run with the convention
        let mut over_rev = vec![false; n];
        let mut under_rev = vec![false; n];
        let mut seen = vec![false; raw_mate.len()];
        for e0 in 0..raw_mate.len() {
            if seen[e0] {
                continue;
            }
            // traverse, treating e0 as an entry
            let mut cur = e0;
            loop {
                seen[cur] = true;
                let c = crossing_of(cur);
                let oi = end_of(c, PORT_S);
                let oo = end_of(c, PORT_N);
                if cur == oo {
                    over_rev[c] = true;
                } else if cur != oi {
                    let ui = match signs[c] {
                        Sign::Pos => end_of(c, PORT_E),
                        Sign::Neg => end_of(c, PORT_W),
                    };
                    if cur != ui {
                        under_rev[c] = true;
                    }
                }
                let exit = strand_partner(cur, &signs);
                seen[exit] = true;
                cur = raw_mate[exit];
                if cur == e0 {
                    break;
                }
            }
        }
        let mut new_signs = Vec::with_capacity(n);
        for c in 0..n {
            let s = signs[c];
            new_signs.push(if over_rev[c] != under_rev[c] { s.flip() } else { s });
        }
        let relabel = |e: End| -> End {
            let c = crossing_of(e);
            if over_rev[c] {
                end_of(c, (port_of(e) + 2) % 4)
            } else {
                e
            }
        };
        let mut mate = vec![0; raw_mate.len()];
        for e in 0..raw_mate.len() {
            mate[relabel(e)] = relabel(raw_mate[e]);
        }
        let d = Diagram { signs: new_signs, mate, free_loops, name: None };
        debug_assert_eq!(d.validate(), Ok(()));
        d
    }

    /// Replace one crossing by the chosen smoothing.
    pub fn smooth_crossing(&self, c: usize, s: Smoothing) -> Diagram {
        assert!(c < self.signs.len());
        let raw = self.excise(&[c], |e| {
            // reuse the smoothing pairing at the removed crossing
            let p = port_of(e);
            let q = match s {
                Smoothing::Alpha => match p {
                    PORT_E => PORT_N,
                    PORT_N => PORT_E,
                    PORT_W => PORT_S,
                    _ => PORT_W,
                },
                Smoothing::Beta => match p {
                    PORT_E => PORT_S,
                    PORT_S => PORT_E,
                    PORT_N => PORT_W,
                    _ => PORT_N,
                },
            };
            end_of(crossing_of(e), q)
        });
        Diagram::reorient(raw.signs, raw.mate, raw.free_loops)
    }
}

/// Two distinct edges between which twists are inserted.  A positive twist
/// crosses the first edge's strand over the second with a positive crossing.
///
/// `aligned` records the orientation convention of the channel: `true` means
/// the two arcs run through it in the same direction, so each half twist
/// trades their endpoints; `false` means they run in opposite directions, so
/// each strand keeps its own endpoint and one smoothing of the new crossing
/// pinches the channel apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwistSite {
    pub a: EdgeId,
    pub b: EdgeId,
    pub aligned: bool,
}

impl TwistSite {
    pub fn aligned(a: EdgeId, b: EdgeId) -> Self {
        TwistSite { a, b, aligned: true }
    }

    pub fn opposed(a: EdgeId, b: EdgeId) -> Self {
        TwistSite { a, b, aligned: false }
    }
}

/// Seeded random knot diagram with `n` crossings: a uniform chord pairing of
/// `2n` cyclic positions with uniform over/under and sign choices.
pub fn random_diagram(n: usize, seed: u64) -> Diagram {
    use rand::seq::SliceRandom;
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    if n == 0 {
        return Diagram::empty();
    }
    let mut slots: Vec<usize> = (0..2 * n).collect();
    slots.shuffle(&mut rng);
    // passes[position] = (crossing, over?)
    let mut passes = vec![(0usize, false); 2 * n];
    for c in 0..n {
        let (p, q) = (slots[2 * c], slots[2 * c + 1]);
        let first_over: bool = rng.gen();
        passes[p] = (c, first_over);
        passes[q] = (c, !first_over);
    }
    let signs: Vec<Sign> =
        (0..n).map(|_| if rng.gen() { Sign::Pos } else { Sign::Neg }).collect();
    let mut mate = vec![usize::MAX; 4 * n];
    let d_probe = Diagram { signs: signs.clone(), mate: Vec::new(), free_loops: 0, name: None };
    let entry = |c: usize, over: bool| if over { d_probe.over_in(c) } else { d_probe.under_in(c) };
    let exit = |c: usize, over: bool| if over { d_probe.over_out(c) } else { d_probe.under_out(c) };
    for i in 0..2 * n {
        let (c, over) = passes[i];
        let (c2, over2) = passes[(i + 1) % (2 * n)];
        let u = exit(c, over);
        let v = entry(c2, over2);
        mate[u] = v;
        mate[v] = u;
    }
    let d = Diagram { signs, mate, free_loops: 0, name: None };
    debug_assert_eq!(d.validate(), Ok(()));
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec;

    fn kink() -> Diagram {
        codec::parse("O1+U1+").unwrap().realize()
    }

    fn trefoil() -> Diagram {
        codec::parse("O1+U2+O3+U1+O2+U3+").unwrap().realize()
    }

    fn virtual_trefoil() -> Diagram {
        codec::parse("O1+O2+U1+U2+").unwrap().realize()
    }

    #[test]
    fn empty_diagram() {
        let d = Diagram::empty();
        assert_eq!(d.components(), 1);
        assert_eq!(d.writhe(), 0);
        assert_eq!(d.smooth_count(&StateAssignment::from_mask(0, 0)).unwrap(), 1);
    }

    #[test]
    fn kink_structure() {
        let d = kink();
        assert_eq!(d.crossing_count(), 1);
        assert_eq!(d.components(), 1);
        assert_eq!(d.writhe(), 1);
        assert_eq!(d.validate(), Ok(()));
        // positive curl: over-out feeds under-in, under-out feeds over-in
        assert_eq!(d.mate(d.over_out(0)), d.under_in(0));
        assert_eq!(d.mate(d.under_out(0)), d.over_in(0));
    }

    #[test]
    fn kink_smooth_counts() {
        let d = kink();
        let alpha = d.smooth_count(&StateAssignment::from_mask(0, 1)).unwrap();
        let beta = d.smooth_count(&StateAssignment::from_mask(1, 1)).unwrap();
        assert_eq!((alpha, beta), (2, 1));
    }

    #[test]
    fn trefoil_all_alpha() {
        let d = trefoil();
        assert_eq!(d.crossing_count(), 3);
        assert_eq!(d.writhe(), 3);
        assert_eq!(d.smooth_count(&StateAssignment::from_mask(0, 3)).unwrap(), 2);
    }

    #[test]
    fn state_domain_mismatch() {
        let d = kink();
        let err = d.smooth_count(&StateAssignment::from_mask(0, 2)).unwrap_err();
        assert_eq!(err, DiagramError::DomainMismatch { got: 2, want: 1 });
    }

    #[test]
    fn smoothing_pairings_disjoint() {
        let d = trefoil();
        for c in 0..3 {
            for p in 0..4 {
                let e = end_of(c, p);
                let a = d.smoothing_partner(e, Smoothing::Alpha);
                let b = d.smoothing_partner(e, Smoothing::Beta);
                assert_ne!(a, b);
                assert_ne!(a, e);
                assert_ne!(b, e);
                assert_eq!(d.smoothing_partner(a, Smoothing::Alpha), e);
                assert_eq!(d.smoothing_partner(b, Smoothing::Beta), e);
            }
        }
    }

    #[test]
    fn cable_counts() {
        for n in 1..=3usize {
            let d = virtual_trefoil();
            let c = d.cable(n);
            assert_eq!(c.crossing_count(), n * n * d.crossing_count());
            assert_eq!(c.components(), n * d.components());
            assert_eq!(c.writhe(), (n * n) as i64 * d.writhe());
            assert_eq!(c.validate(), Ok(()));
        }
    }

    #[test]
    fn cable_width_one_is_identity() {
        let d = trefoil();
        assert_eq!(d.cable(1), d);
    }

    #[test]
    fn cable_of_empty() {
        let d = Diagram::empty().cable(3);
        assert_eq!(d.components(), 3);
        assert_eq!(d.crossing_count(), 0);
    }

    #[test]
    fn cable_of_kink() {
        let c = kink().cable(2);
        assert_eq!(c.crossing_count(), 4);
        assert_eq!(c.components(), 2);
        assert_eq!(c.writhe(), 4);
    }

    #[test]
    fn mirror_involution() {
        for d in [kink(), trefoil(), virtual_trefoil()] {
            let m = d.mirror();
            assert_eq!(m.writhe(), -d.writhe());
            assert_eq!(m.mirror(), d);
            assert_eq!(m.components(), d.components());
        }
    }

    #[test]
    fn mirror_swaps_smoothing_counts() {
        // mirroring exchanges the roles of alpha and beta at each crossing
        let d = kink();
        let m = d.mirror();
        assert_eq!(
            d.smooth_count(&StateAssignment::from_mask(0, 1)).unwrap(),
            m.smooth_count(&StateAssignment::from_mask(1, 1)).unwrap()
        );
    }

    #[test]
    fn twist_insertion_counts() {
        let d = trefoil();
        let edges = d.edges();
        let site = TwistSite::aligned(edges[0], edges[3]);
        for t in -3i64..=3 {
            let dt = d.insert_twists(&site, t).unwrap();
            assert_eq!(dt.crossing_count(), 3 + t.unsigned_abs() as usize);
            assert_eq!(dt.validate(), Ok(()));
            assert_eq!(dt.writhe(), 3 + t);
        }
    }

    #[test]
    fn twist_zero_is_identity() {
        let d = trefoil();
        let edges = d.edges();
        let site = TwistSite::aligned(edges[1], edges[4]);
        assert_eq!(d.insert_twists(&site, 0).unwrap(), d);
    }

    #[test]
    fn twist_site_must_be_distinct_edges() {
        let d = kink();
        let e = d.edges()[0];
        assert!(matches!(
            d.insert_twists(&TwistSite::aligned(e, e), 1),
            Err(DiagramError::InvalidSite(_))
        ));
    }

    #[test]
    fn smooth_crossing_counts() {
        // smoothing the kink either way leaves the unknot
        let d = kink();
        for s in [Smoothing::Alpha, Smoothing::Beta] {
            let sm = d.smooth_crossing(0, s);
            assert_eq!(sm.crossing_count(), 0);
            assert_eq!(sm.validate(), Ok(()));
        }
        let alpha = d.smooth_crossing(0, Smoothing::Alpha);
        assert_eq!(alpha.components(), 2);
        let beta = d.smooth_crossing(0, Smoothing::Beta);
        assert_eq!(beta.components(), 1);
    }

    #[test]
    fn smooth_crossing_matches_smooth_count() {
        // removing one crossing by smoothing, then counting curves of the
        // remaining state, agrees with counting on the original diagram
        let d = trefoil();
        for mask in 0..8u64 {
            let full = StateAssignment::from_mask(mask, 3);
            let want = d.smooth_count(&full).unwrap();
            let s0 = if mask & 1 == 1 { Smoothing::Beta } else { Smoothing::Alpha };
            let rest = d.smooth_crossing(0, s0);
            let sub = StateAssignment::from_mask(mask >> 1, 2);
            assert_eq!(rest.smooth_count(&sub).unwrap(), want);
        }
    }

    #[test]
    fn random_diagram_deterministic() {
        let a = random_diagram(6, 42);
        let b = random_diagram(6, 42);
        assert_eq!(a, b);
        let c = random_diagram(6, 43);
        assert_ne!(a, c);
        assert_eq!(a.validate(), Ok(()));
        assert_eq!(a.components(), 1);
    }

    #[test]
    fn random_diagram_zero() {
        assert_eq!(random_diagram(0, 7), Diagram::empty());
    }
}
