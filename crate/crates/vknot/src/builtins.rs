//! Named diagrams shipped with the library, their twist sites, and frozen
//! reference values used by the acceptance suite.

use crate::codec::{self, GaussCode};
use crate::diagram::{Diagram, TwistSite};
use crate::laurent::LaurentPoly;

/// Reference 3-strand bracket of the `k_d` diagram: a mirror-symmetric
/// polynomial, stored as d times its inner part.
pub fn k_d_cable3_reference() -> LaurentPoly {
    let pairs: [(i64, i64); 37] = [
        (76, 1),
        (72, -2),
        (70, -2),
        (68, -3),
        (66, -8),
        (64, -18),
        (62, -17),
        (60, -8),
        (58, -5),
        (56, -2),
        (54, 21),
        (52, 66),
        (50, 95),
        (48, 103),
        (46, 114),
        (44, 136),
        (42, 111),
        (40, 11),
        (38, -110),
        (36, -209),
        (34, -326),
        (32, -491),
        (30, -601),
        (28, -559),
        (26, -380),
        (24, -178),
        (22, 142),
        (20, 594),
        (18, 1050),
        (16, 1329),
        (14, 1334),
        (12, 1215),
        (10, 814),
        (8, 193),
        (6, -573),
        (4, -1257),
        (2, -1660),
    ];
    let mut inner = LaurentPoly::monomial(-1842, 0);
    for (e, c) in pairs {
        inner = inner.add(&LaurentPoly::from_pairs([(e, c), (-e, c)]));
    }
    inner.mul(&LaurentPoly::d())
}

/// Reference 3-strand bracket of the `k_m` diagram.  Not mirror symmetric;
/// the shipped code is the one reproducing it exactly rather than mirrored.
pub fn k_m_cable3_reference() -> LaurentPoly {
    LaurentPoly::from_pairs([
        (0, -527),
        (-60, -1),
        (-56, 1),
        (-54, 2),
        (-52, 5),
        (-50, 10),
        (-48, 21),
        (-46, 25),
        (-44, 26),
        (-42, 21),
        (-40, 8),
        (-38, -19),
        (-36, -69),
        (-34, -115),
        (-32, -155),
        (-30, -175),
        (-28, -172),
        (-26, -127),
        (-24, -23),
        (-22, 109),
        (-20, 244),
        (-18, 366),
        (-16, 440),
        (-14, 452),
        (-12, 372),
        (-10, 207),
        (-8, 23),
        (-6, -199),
        (-4, -358),
        (-2, -486),
        (2, -460),
        (4, -364),
        (6, -187),
        (8, -58),
        (10, 96),
        (12, 208),
        (14, 250),
        (16, 269),
        (18, 222),
        (20, 200),
        (22, 131),
        (24, 71),
        (26, 21),
        (28, -15),
        (30, -29),
        (32, -54),
        (34, -51),
        (36, -48),
        (38, -36),
        (40, -28),
        (42, -22),
        (44, -10),
        (46, -6),
        (48, -2),
        (50, -1),
        (54, 1),
    ])
}

/// A named diagram with its provenance data.
pub struct NamedDiagram {
    pub name: &'static str,
    /// shipped text: lines starting with '#' are notes, the one remaining
    /// line is the Gauss code
    pub code: &'static str,
    /// sha256 of the code line, freezing the shipped bytes
    pub sha256: &'static str,
    /// twist insertion sites, when the name anchors a family
    pub sites: &'static [TwistSite],
}

impl NamedDiagram {
    /// The Gauss code line with notes stripped.
    pub fn code_line(&self) -> &'static str {
        self.code
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .unwrap_or("")
    }
}

pub fn named_diagram(name: &str) -> Option<&'static NamedDiagram> {
    NAMED.iter().find(|n| n.name == name)
}

pub fn names() -> Vec<&'static str> {
    NAMED.iter().map(|n| n.name).collect()
}

pub fn code_of(name: &str) -> Option<GaussCode> {
    let n = named_diagram(name)?;
    Some(codec::parse(n.code_line()).expect("shipped code parses"))
}

pub fn diagram_of(name: &str) -> Option<Diagram> {
    Some(code_of(name)?.realize())
}

/// Twist sites of a named family base.
pub fn sites_of(name: &str) -> Vec<TwistSite> {
    named_diagram(name)
        .map(|n| n.sites.to_vec())
        .unwrap_or_default()
}

/// Check every shipped entry: the code parses and realizes to a valid
/// diagram, and its sha256 matches the frozen checksum.
pub fn verify() -> Result<(), String> {
    use sha2::{Digest, Sha256};
    for n in NAMED {
        let line = n.code_line();
        let code = codec::parse(line).map_err(|e| format!("{}: {e}", n.name))?;
        code.realize().validate().map_err(|e| format!("{}: {e}", n.name))?;
        let digest = format!("{:x}", Sha256::digest(line.as_bytes()));
        if digest != n.sha256 {
            return Err(format!(
                "{}: checksum mismatch: shipped {} computed {digest}",
                n.name, n.sha256
            ));
        }
    }
    Ok(())
}

static NAMED: &[NamedDiagram] = &[
    NamedDiagram {
        name: "unknot",
        code: "/",
        sha256: "8a5edab282632443219e051e4ade2d1d5bbc671c781051bf1437897cbdfea0f1",
        sites: &[],
    },
    NamedDiagram {
        name: "kink",
        code: "O1+U1+",
        sha256: "6a39006e47386e2a2de6d0221a4c1a9fa5cb2ffc5d5404b74d952adb49baf905",
        sites: &[],
    },
    NamedDiagram {
        name: "trefoil",
        code: "O1+U2+O3+U1+O2+U3+",
        sha256: "e49edffb84a9f5f33f7ef3f58cb51d17056ccb71997acf08aeeba97721cb3668",
        sites: &[],
    },
    NamedDiagram {
        name: "virtual-trefoil",
        code: "O1+O2+U1+U2+",
        sha256: "1253b5f97a0819e2fd5658880cdb1a80e25e3c7e294093671c6334fd8f057b0d",
        sites: &[],
    },
    NamedDiagram {
        name: "kishino",
        code: include_str!("../data/kishino.gauss"),
        sha256: "13354cf6541f605c57ee96ce0965f763a9e2a620c11fd040240a234cf03cb9ab",
        sites: &[],
    },
];
