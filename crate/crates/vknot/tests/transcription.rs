//! Census of all 4-crossing knot codes, used once to pin the shipped named
//! diagrams and kept as the reproducible record of that selection.  The
//! shipped codes are the unique profile matches up to code symmetry.
//!
//! Run with:
//!   cargo test -p vknot --release --test transcription -- --ignored --nocapture

use rayon::prelude::*;
use std::collections::BTreeMap;
use vknot::bracket::{bracket, n_bracket};
use vknot::builtins::{k_d_cable3_reference, k_m_cable3_reference};
use vknot::carrier::carrying_surface;
use vknot::codec;
use vknot::diagram::Diagram;
use vknot::laurent::LaurentPoly;
use vknot::wirtinger::{count_homs, presentation, FiniteGroup};

/// All ways to pair 2n cyclic positions, first unused position first.
fn pairings(n2: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some(first) = used.iter().position(|u| !u) else {
            out.push(cur.clone());
            return;
        };
        used[first] = true;
        for second in first + 1..used.len() {
            if used[second] {
                continue;
            }
            used[second] = true;
            cur.push((first, second));
            rec(used, cur, out);
            cur.pop();
            used[second] = false;
        }
        used[first] = false;
    }
    let mut out = Vec::new();
    rec(&mut vec![false; n2], &mut Vec::new(), &mut out);
    out
}

fn build_code(pairing: &[(usize, usize)], overs: u32, signs: u32) -> String {
    let n = pairing.len();
    let mut tok = vec![String::new(); 2 * n];
    for (k, &(p, q)) in pairing.iter().enumerate() {
        let s = if signs >> k & 1 == 1 { '+' } else { '-' };
        let (first, second) = if overs >> k & 1 == 1 { ('O', 'U') } else { ('U', 'O') };
        tok[p] = format!("{}{}{}", first, k + 1, s);
        tok[q] = format!("{}{}{}", second, k + 1, s);
    }
    tok.join("")
}

struct Candidate {
    canon: String,
    d: Diagram,
}

#[test]
#[ignore]
fn four_crossing_census() {
    let one = LaurentPoly::one();
    let d_poly = LaurentPoly::d();
    let d_sq = d_poly.mul(&d_poly);
    let kd_ref = k_d_cable3_reference();
    let km_ref = k_m_cable3_reference();

    // stage 1: trivial bracket
    let mut survivors: BTreeMap<String, Candidate> = BTreeMap::new();
    let mut total = 0usize;
    for pairing in pairings(8) {
        for overs in 0..16u32 {
            for signs in 0..16u32 {
                total += 1;
                let text = build_code(&pairing, overs, signs);
                let code = codec::parse(&text).unwrap();
                let d = code.realize();
                if bracket(&d).unwrap() != one {
                    continue;
                }
                let canon = codec::emit(&codec::gauss_of(&d));
                survivors
                    .entry(canon.clone())
                    .or_insert_with(|| Candidate { canon, d });
            }
        }
    }
    println!("census: {total} codes, {} distinct with trivial bracket", survivors.len());

    // stage 2: trivial 2-strand bracket, carrier genus 2
    let stage2: Vec<&Candidate> = survivors
        .values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter(|c| n_bracket(&c.d, 2).unwrap() == d_poly)
        .filter(|c| carrying_surface(&c.d).genus == 2)
        .collect();
    println!("stage 2: {} codes with trivial 2-cable and genus 2", stage2.len());

    // stage 3: fingerprint the 3-strand bracket
    let s3 = FiniteGroup::symmetric(3);
    let s4 = FiniteGroup::symmetric(4);
    let rows: Vec<String> = stage2
        .par_iter()
        .map(|c| {
            let p = presentation(&c.d);
            let h3 = count_homs(&p, &s3, 1 << 30).unwrap();
            let h4 = count_homs(&p, &s4, 1 << 32).unwrap();
            let b3 = n_bracket(&c.d, 3).unwrap();
            let tag = if b3 == kd_ref {
                "KD"
            } else if b3 == kd_ref.mirror() {
                "KD-mirror"
            } else if b3 == km_ref {
                "KM"
            } else if b3 == km_ref.mirror() {
                "KM-mirror"
            } else if b3 == d_sq {
                "cable3-trivial"
            } else {
                "other"
            };
            format!(
                "{tag}\twrithe {}\tS3 {}/{}\tS4 {}/{}\t{}",
                c.d.writhe(),
                h3.total,
                h3.nonabelian,
                h4.total,
                h4.nonabelian,
                c.canon
            )
        })
        .collect();
    let mut rows = rows;
    rows.sort();
    for r in &rows {
        println!("{r}");
    }
}
