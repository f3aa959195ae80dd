//! Altland–Zirnbauer classes and the KO-group tables for corner invariants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compressions::{slope_normalize, Slope};
use crate::error::{Error, Result};
use crate::invariants::{GroupTag, InvariantValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AzClass {
    A,
    AIII,
    AI,
    BDI,
    D,
    DIII,
    AII,
    CII,
    C,
    CI,
}

pub const ALL_CLASSES: [AzClass; 10] = [
    AzClass::A,
    AzClass::AIII,
    AzClass::AI,
    AzClass::BDI,
    AzClass::D,
    AzClass::DIII,
    AzClass::AII,
    AzClass::CII,
    AzClass::C,
    AzClass::CI,
];

/// The eight real classes in Bott-clock order.
pub const REAL_CLASSES: [AzClass; 8] =
    [AzClass::AI, AzClass::BDI, AzClass::D, AzClass::DIII, AzClass::AII, AzClass::CII, AzClass::C, AzClass::CI];

impl AzClass {
    pub fn name(self) -> &'static str {
        match self {
            AzClass::A => "A",
            AzClass::AIII => "AIII",
            AzClass::AI => "AI",
            AzClass::BDI => "BDI",
            AzClass::D => "D",
            AzClass::DIII => "DIII",
            AzClass::AII => "AII",
            AzClass::CII => "CII",
            AzClass::C => "C",
            AzClass::CI => "CI",
        }
    }

    /// (Θ², Ξ², Π present) with 0 meaning absent.
    pub fn pattern(self) -> (i8, i8, bool) {
        match self {
            AzClass::A => (0, 0, false),
            AzClass::AIII => (0, 0, true),
            AzClass::AI => (1, 0, false),
            AzClass::BDI => (1, 1, true),
            AzClass::D => (0, 1, false),
            AzClass::DIII => (-1, 1, true),
            AzClass::AII => (-1, 0, false),
            AzClass::CII => (-1, -1, true),
            AzClass::C => (0, -1, false),
            AzClass::CI => (1, -1, true),
        }
    }

    pub fn from_pattern(theta: i8, xi: i8, pi: bool) -> Option<AzClass> {
        ALL_CLASSES.iter().copied().find(|c| c.pattern() == (theta, xi, pi))
    }

    pub fn is_chiral(self) -> bool {
        self.pattern().2
    }

    pub fn is_real(self) -> bool {
        !matches!(self, AzClass::A | AzClass::AIII)
    }

    /// Position on the real Bott clock (AI = 0, …, CI = 7).
    pub fn bott_index(self) -> Option<usize> {
        REAL_CLASSES.iter().position(|&c| c == self)
    }

    /// Degree `i` of the KO-group carrying the gapped invariant.
    pub fn degree(self) -> Option<i32> {
        Some(match self {
            AzClass::AI => 0,
            AzClass::BDI => 1,
            AzClass::D => 2,
            AzClass::DIII => 3,
            AzClass::AII => 4,
            AzClass::CII => 5,
            AzClass::C => 6,
            AzClass::CI => -1,
            _ => return None,
        })
    }

    pub fn phase(self) -> Option<Phase> {
        Some(match self {
            AzClass::D | AzClass::C => Phase::I,
            AzClass::A | AzClass::AIII => return None,
            _ => Phase::One,
        })
    }

    pub fn info(self) -> AzClassInfo {
        AzClassInfo { class: self, degree_i: self.degree(), phase_c: self.phase(), relation_id: self.degree() }
    }
}

impl fmt::Display for AzClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AzClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL_CLASSES
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Input(format!("unknown AZ class '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    One,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AzClassInfo {
    pub class: AzClass,
    pub degree_i: Option<i32>,
    pub phase_c: Option<Phase>,
    /// Row of the unitary-picture relation table; equals the degree.
    pub relation_id: Option<i32>,
}

/// Finitely generated abelian group `Z^r ⊕ Z_{t1} ⊕ …`, with a marker for
/// invariants that only take even values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub free_rank: u32,
    pub torsion: Vec<u64>,
    pub even_index: bool,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { free_rank: 0, torsion: Vec::new(), even_index: false }
    }

    pub fn z() -> Self {
        Self::free(1)
    }

    pub fn free(rank: u32) -> Self {
        AbelianGroup { free_rank: rank, torsion: Vec::new(), even_index: false }
    }

    pub fn two_z() -> Self {
        AbelianGroup { free_rank: 1, torsion: Vec::new(), even_index: true }
    }

    pub fn cyclic(t: u64) -> Self {
        Self::trivial().plus_cyclic(t)
    }

    pub fn z2_power(j: usize) -> Self {
        AbelianGroup { free_rank: 0, torsion: vec![2; j], even_index: false }
    }

    pub fn plus_cyclic(mut self, t: u64) -> Self {
        if t == 0 {
            self.free_rank += 1;
        } else if t > 1 {
            self.torsion.push(t);
            self.torsion.sort_unstable();
        }
        self
    }

    pub fn plus(mut self, other: &AbelianGroup) -> Self {
        self.free_rank += other.free_rank;
        self.torsion.extend(other.torsion.iter().copied().filter(|&t| t > 1));
        self.torsion.sort_unstable();
        self.even_index = self.free_rank == 1 && (self.even_index || other.even_index);
        self
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn order(&self) -> Option<u64> {
        (self.free_rank == 0).then(|| self.torsion.iter().product())
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("0");
        }
        let mut parts: Vec<String> = Vec::new();
        match (self.free_rank, self.even_index) {
            (0, _) => {}
            (1, true) => parts.push("2Z".into()),
            (1, false) => parts.push("Z".into()),
            (r, _) => parts.push(format!("Z^{r}")),
        }
        let mut i = 0;
        while i < self.torsion.len() {
            let t = self.torsion[i];
            let run = self.torsion[i..].iter().take_while(|&&x| x == t).count();
            if run == 1 {
                parts.push(format!("Z{t}"));
            } else {
                parts.push(format!("(Z{t})^{run}"));
            }
            i += run;
        }
        f.write_str(&parts.join("+"))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Cell {
    O,
    Z,
    Z2,
    TwoZ,
}

impl Cell {
    fn group(self) -> AbelianGroup {
        match self {
            Cell::O => AbelianGroup::trivial(),
            Cell::Z => AbelianGroup::z(),
            Cell::Z2 => AbelianGroup::cyclic(2),
            Cell::TwoZ => AbelianGroup::two_z(),
        }
    }
}

use Cell::{TwoZ, O, Z, Z2};

/// Corner-invariant table, rows in `ALL_CLASSES` order, columns `n - k mod 8`.
const CORNER_TABLE: [[Cell; 8]; 10] = [
    [O, Z, O, Z, O, Z, O, Z],
    [Z, O, Z, O, Z, O, Z, O],
    [O, O, O, TwoZ, O, Z2, Z2, Z],
    [Z, O, O, O, TwoZ, O, Z2, Z2],
    [Z2, Z, O, O, O, TwoZ, O, Z2],
    [Z2, Z2, Z, O, O, O, TwoZ, O],
    [O, Z2, Z2, Z, O, O, O, TwoZ],
    [TwoZ, O, Z2, Z2, Z, O, O, O],
    [O, TwoZ, O, Z2, Z2, Z, O, O],
    [O, O, TwoZ, O, Z2, Z2, Z, O],
];

fn class_row(class: AzClass) -> usize {
    ALL_CLASSES.iter().position(|&c| c == class).unwrap()
}

/// Strong corner invariant group for an `n`-dimensional system with a
/// codimension-`k` corner.
pub fn strong_group_lookup(class: AzClass, n: usize, k: usize) -> Result<AbelianGroup> {
    if k == 0 || k > n {
        return Err(Error::Input(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    Ok(CORNER_TABLE[class_row(class)][(n - k) % 8].group())
}

/// Homotopy groups `π_0(R_q)` of the real classifying spaces.
fn real_clock(q: usize) -> Cell {
    [Z, Z2, Z2, O, TwoZ, O, O, O][q % 8]
}

/// Strong bulk invariant of a `d`-dimensional system, generated from the
/// complex and real Bott clocks independently of the embedded data.
pub fn periodic_table_entry(class: AzClass, d: usize) -> AbelianGroup {
    let cell = match class {
        AzClass::A => [Z, O][d % 2],
        AzClass::AIII => [O, Z][d % 2],
        c => {
            let s = c.bott_index().unwrap();
            real_clock((s + 8 - d % 8) % 8)
        }
    };
    cell.group()
}

/// Structural checks on the embedded corner table: the codimension-one column
/// reproduces the Bott-clock table and adjacent real rows are shifts of one
/// another.
pub fn verify_corner_table() -> Result<()> {
    for &class in &ALL_CLASSES {
        for d in 0..8 {
            let from_table = CORNER_TABLE[class_row(class)][d].group();
            let from_clock = periodic_table_entry(class, d + 1);
            if from_table != from_clock {
                return Err(Error::Inconsistent(format!(
                    "corner table ({class}, {d}) = {from_table} but codim-one table gives {from_clock}"
                )));
            }
        }
    }
    for w in REAL_CLASSES.windows(2) {
        let (a, b) = (class_row(w[0]), class_row(w[1]));
        for d in 0..8 {
            if CORNER_TABLE[b][(d + 1) % 8] != CORNER_TABLE[a][d] {
                return Err(Error::Inconsistent(format!("row shift fails between {} and {}", w[0], w[1])));
            }
        }
    }
    Ok(())
}

fn ko_point(i: i32) -> AbelianGroup {
    [Z, Z2, Z2, O, Z, O, O, O][i.rem_euclid(8) as usize].group()
}

enum Pattern {
    Rational(u64),
    OneIrrational,
    BothIrrational,
}

fn pattern_of(alpha: &Slope, beta: &Slope) -> Result<Pattern> {
    Ok(match (alpha.is_irrational(), beta.is_irrational()) {
        (false, false) => Pattern::Rational(slope_normalize(alpha, beta)?.t as u64),
        (true, true) => Pattern::BothIrrational,
        _ => Pattern::OneIrrational,
    })
}

/// `KO_i(S^{α,β})` for the pullback of the two half-plane Toeplitz algebras.
pub fn ko_s_alpha_beta(i: i32, alpha: &Slope, beta: &Slope) -> Result<AbelianGroup> {
    let i = i.rem_euclid(8);
    let g = match pattern_of(alpha, beta)? {
        Pattern::Rational(t) => {
            let even = t % 2 == 0;
            match i {
                0 | 4 => AbelianGroup::z().plus_cyclic(t),
                1 => AbelianGroup::z2_power(if even { 2 } else { 1 }).plus(&AbelianGroup::z()),
                2 => AbelianGroup::z2_power(if even { 4 } else { 2 }),
                3 => AbelianGroup::z2_power(if even { 2 } else { 1 }),
                5 => AbelianGroup::z(),
                _ => AbelianGroup::trivial(),
            }
        }
        Pattern::OneIrrational => match i {
            0 | 4 => AbelianGroup::free(2),
            1 => AbelianGroup::z2_power(2).plus(&AbelianGroup::z()),
            2 => AbelianGroup::z2_power(3),
            3 => AbelianGroup::z2_power(1),
            5 => AbelianGroup::z(),
            _ => AbelianGroup::trivial(),
        },
        Pattern::BothIrrational => match i {
            0 | 4 => AbelianGroup::free(3),
            1 => AbelianGroup::z2_power(3).plus(&AbelianGroup::z()),
            2 => AbelianGroup::z2_power(4),
            3 => AbelianGroup::z2_power(1),
            5 => AbelianGroup::z(),
            _ => AbelianGroup::trivial(),
        },
    };
    Ok(g)
}

/// `KO_i` of the quarter-plane Toeplitz algebra (convex or concave).
pub fn ko_t_hat(i: i32, alpha: &Slope, beta: &Slope) -> Result<AbelianGroup> {
    let i = i.rem_euclid(8);
    let g = match pattern_of(alpha, beta)? {
        Pattern::Rational(t) => {
            let even = t % 2 == 0;
            match i {
                0 | 4 => AbelianGroup::z().plus_cyclic(t),
                1 => AbelianGroup::z2_power(if even { 2 } else { 1 }),
                2 => AbelianGroup::z2_power(if even { 3 } else { 1 }),
                3 => AbelianGroup::z2_power(if even { 1 } else { 0 }),
                _ => AbelianGroup::trivial(),
            }
        }
        Pattern::OneIrrational => match i {
            0 | 4 => AbelianGroup::free(2),
            1 | 2 => AbelianGroup::z2_power(2),
            _ => AbelianGroup::trivial(),
        },
        Pattern::BothIrrational => match i {
            0 | 4 => AbelianGroup::free(3),
            1 | 2 => AbelianGroup::z2_power(3),
            _ => AbelianGroup::trivial(),
        },
    };
    Ok(g)
}

/// `KO_i(S^n)` for the orthant symbol algebra.
pub fn ko_s_orthant(i: i32) -> AbelianGroup {
    [
        AbelianGroup::z(),
        AbelianGroup::z().plus_cyclic(2),
        AbelianGroup::z2_power(2),
        AbelianGroup::z2_power(1),
        AbelianGroup::z(),
        AbelianGroup::z(),
        AbelianGroup::trivial(),
        AbelianGroup::trivial(),
    ][i.rem_euclid(8) as usize]
        .clone()
}

/// `KO_i(pt) ⊕ KO_{i-1}(pt)`; agrees with `ko_s_orthant` for all `i`.
pub fn ko_point_pair(i: i32) -> AbelianGroup {
    ko_point(i).plus(&ko_point(i - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodimCase {
    /// Both factors have zero-dimensional corners.
    KEqualsN,
    /// First factor zero-dimensional corner, second one-dimensional.
    KEqualsNMinus1,
}

#[derive(Clone, Copy)]
enum Rule {
    Product,
    FirstMod2,
    SecondMod2,
}

struct ProductEntry {
    case: CodimCase,
    left: AzClass,
    right: AzClass,
    target: AzClass,
    rule: Rule,
    tag: GroupTag,
}

const fn entry(case: CodimCase, left: AzClass, right: AzClass, target: AzClass, rule: Rule, tag: GroupTag) -> ProductEntry {
    ProductEntry { case, left, right, target, rule, tag }
}

use AzClass as K;
use CodimCase::{KEqualsN as KN, KEqualsNMinus1 as KN1};

const PRODUCT_RULES: [ProductEntry; 15] = [
    entry(KN, K::BDI, K::BDI, K::BDI, Rule::Product, GroupTag::Z),
    entry(KN, K::BDI, K::D, K::D, Rule::FirstMod2, GroupTag::Z2),
    entry(KN, K::BDI, K::DIII, K::DIII, Rule::FirstMod2, GroupTag::Z2),
    entry(KN, K::BDI, K::CII, K::CII, Rule::Product, GroupTag::TwoZ),
    entry(KN, K::D, K::D, K::DIII, Rule::Product, GroupTag::Z2),
    entry(KN, K::CII, K::CII, K::BDI, Rule::Product, GroupTag::Z),
    entry(KN1, K::BDI, K::D, K::D, Rule::Product, GroupTag::Z),
    entry(KN1, K::BDI, K::DIII, K::DIII, Rule::FirstMod2, GroupTag::Z2),
    entry(KN1, K::BDI, K::AII, K::AII, Rule::FirstMod2, GroupTag::Z2),
    entry(KN1, K::BDI, K::C, K::C, Rule::Product, GroupTag::TwoZ),
    entry(KN1, K::D, K::D, K::DIII, Rule::SecondMod2, GroupTag::Z2),
    entry(KN1, K::D, K::DIII, K::AII, Rule::Product, GroupTag::Z2),
    entry(KN1, K::DIII, K::D, K::AII, Rule::SecondMod2, GroupTag::Z2),
    entry(KN1, K::CII, K::D, K::C, Rule::Product, GroupTag::TwoZ),
    entry(KN1, K::CII, K::C, K::D, Rule::Product, GroupTag::Z),
];

/// Numerical corner invariant of a product model predicted from the factors.
/// Pairs listed with the factors exchanged are accepted as well.
pub fn product_invariant_predict(
    class1: AzClass,
    value1: &InvariantValue,
    class2: AzClass,
    value2: &InvariantValue,
    case: CodimCase,
) -> Result<(AzClass, InvariantValue)> {
    let direct = PRODUCT_RULES.iter().find(|e| e.case == case && e.left == class1 && e.right == class2);
    let (rule, a, b) = match direct {
        Some(e) => (e, value1.value, value2.value),
        None => match PRODUCT_RULES.iter().find(|e| e.case == case && e.left == class2 && e.right == class1) {
            Some(e) => (e, value2.value, value1.value),
            None => {
                return Err(Error::Unsupported(format!(
                    "no product formula for {class1} x {class2} in case {case:?}"
                )))
            }
        },
    };
    let raw = match rule.rule {
        Rule::Product => a * b,
        Rule::FirstMod2 => a.rem_euclid(2) * b,
        Rule::SecondMod2 => a * b.rem_euclid(2),
    };
    let value = InvariantValue::new(rule.tag, raw, format!("product {} x {} -> {}", rule.left, rule.right, rule.target))?;
    Ok((rule.target, value))
}
