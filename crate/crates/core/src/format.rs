//! Text encodings shared by the CSV exports and the command line.
//!
//! | object | encoding |
//! |--------|----------|
//! | pair | `real:<d>`, `complex:<q>`, `torus:<N>`, `product:<pair>,<pair>` |
//! | group | `euclidean:<k>`, `integers:<k>`, `circle:<N>`, `cyclic:<M>`, `trivial` |
//! | index | `n`, `m:n`, `k1;k2;...`, products `L&R` with nested products in parentheses |
//! | group element | components joined by `;`, a residue, or `e` for the trivial group |
//! | double coset | `t`, `re:im`, `x1;x2;...`, products as for indices |
//!
//! Floats are written with 17 significant digits so that they parse back to
//! the same value.

use num_complex::Complex64;
use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expansion::{CoefficientEntry, CoefficientTable};
use crate::group::{GroupDescriptor, GroupElement};
use crate::pair::{DoubleCosetPoint, PairDescriptor, SphericalIndex};

/// Header of coefficient-table CSV files.
pub const COEFFICIENT_HEADER: &str = "index,u,re,im";

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Usage(format!("cannot parse {what} from {s:?}")))
}

fn parse_int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse::<T>().map_err(|_| Error::Usage(format!("cannot parse {what} from {s:?}")))
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

// ---------------------------------------------------------------- pairs

pub fn pair_to_text(pair: &PairDescriptor) -> String {
    match pair {
        PairDescriptor::RealSphere { d } => format!("real:{d}"),
        PairDescriptor::ComplexSphere { q } => format!("complex:{q}"),
        PairDescriptor::TorusGroup { n } => format!("torus:{n}"),
        PairDescriptor::ProductPair { left, right } => {
            format!("product:{},{}", pair_to_text(left), pair_to_text(right))
        }
    }
}

/// Parses a pair; `product:` consumes the next two comma-separated pairs,
/// so nesting needs no brackets: `product:product:real:2,real:3,torus:1`.
pub fn parse_pair(text: &str) -> Result<PairDescriptor> {
    let mut tokens: VecDeque<String> = text.split(',').map(|t| t.trim().to_string()).collect();
    let pair = parse_pair_tokens(&mut tokens, text)?;
    if !tokens.is_empty() {
        return Err(Error::Usage(format!("trailing input in pair {text:?}")));
    }
    pair.validate()?;
    Ok(pair)
}

fn parse_pair_tokens(tokens: &mut VecDeque<String>, text: &str) -> Result<PairDescriptor> {
    let token = tokens.pop_front().ok_or_else(|| Error::Usage(format!("incomplete pair {text:?}")))?;
    if let Some(rest) = token.strip_prefix("product:") {
        tokens.push_front(rest.to_string());
        let left = parse_pair_tokens(tokens, text)?;
        let right = parse_pair_tokens(tokens, text)?;
        return Ok(PairDescriptor::product(left, right));
    }
    let (kind, value) = token
        .split_once(':')
        .ok_or_else(|| Error::Usage(format!("expected <kind>:<dimension>, got {token:?}")))?;
    Ok(match kind {
        "real" => PairDescriptor::RealSphere { d: parse_int(value, "sphere dimension d")? },
        "complex" => PairDescriptor::ComplexSphere { q: parse_int(value, "complex dimension q")? },
        "torus" => PairDescriptor::TorusGroup { n: parse_int(value, "torus dimension N")? },
        _ => return Err(Error::Usage(format!("unknown pair kind {kind:?} (real, complex, torus, product)"))),
    })
}

// --------------------------------------------------------------- groups

pub fn group_to_text(group: GroupDescriptor) -> String {
    match group {
        GroupDescriptor::Euclidean { k } => format!("euclidean:{k}"),
        GroupDescriptor::IntegerLattice { k } => format!("integers:{k}"),
        GroupDescriptor::CircleGroup { n } => format!("circle:{n}"),
        GroupDescriptor::FiniteCyclic { m } => format!("cyclic:{m}"),
        GroupDescriptor::Trivial => "trivial".into(),
    }
}

pub fn parse_group(text: &str) -> Result<GroupDescriptor> {
    let text = text.trim();
    if text == "trivial" {
        return Ok(GroupDescriptor::Trivial);
    }
    let (kind, value) =
        text.split_once(':').ok_or_else(|| Error::Usage(format!("expected <kind>:<size>, got {text:?}")))?;
    let group = match kind {
        "euclidean" => GroupDescriptor::Euclidean { k: parse_int(value, "dimension k")? },
        "integers" => GroupDescriptor::IntegerLattice { k: parse_int(value, "dimension k")? },
        "circle" => GroupDescriptor::CircleGroup { n: parse_int(value, "torus dimension N")? },
        "cyclic" => GroupDescriptor::FiniteCyclic { m: parse_int(value, "order M")? },
        _ => {
            return Err(Error::Usage(format!(
                "unknown group kind {kind:?} (euclidean, integers, circle, cyclic, trivial)"
            )))
        }
    };
    group.validate()?;
    Ok(group)
}

// -------------------------------------------------------------- indices

fn wrap_nested(s: String, nested: bool) -> String {
    if nested {
        format!("({s})")
    } else {
        s
    }
}

pub fn index_to_text(index: &SphericalIndex) -> String {
    match index {
        SphericalIndex::Real { n } => n.to_string(),
        SphericalIndex::Complex { m, n } => format!("{m}:{n}"),
        SphericalIndex::Torus { k } => join(k, |x| x.to_string()),
        SphericalIndex::Product { left, right } => format!(
            "{}&{}",
            wrap_nested(index_to_text(left), matches!(**left, SphericalIndex::Product { .. })),
            wrap_nested(index_to_text(right), matches!(**right, SphericalIndex::Product { .. }))
        ),
    }
}

/// Splits `L&R` at the single `&` outside parentheses and strips one level
/// of parentheses from each side.
fn split_product(text: &str) -> Result<(&str, &str)> {
    let mut depth = 0i32;
    let mut at = None;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '&' if depth == 0 => {
                if at.is_some() {
                    return Err(Error::Usage(format!("ambiguous product {text:?}: parenthesize nested products")));
                }
                at = Some(i);
            }
            _ => {}
        }
    }
    let i = at.ok_or_else(|| Error::Usage(format!("expected a product L&R, got {text:?}")))?;
    Ok((strip_parens(&text[..i]), strip_parens(&text[i + 1..])))
}

fn strip_parens(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(s)
}

pub fn parse_index(pair: &PairDescriptor, text: &str) -> Result<SphericalIndex> {
    let text = text.trim();
    let index = match pair {
        PairDescriptor::RealSphere { .. } => SphericalIndex::Real { n: parse_int(text, "degree n")? },
        PairDescriptor::ComplexSphere { .. } => {
            let (m, n) =
                text.split_once(':').ok_or_else(|| Error::Usage(format!("expected m:n, got {text:?}")))?;
            SphericalIndex::Complex { m: parse_int(m, "degree m")?, n: parse_int(n, "degree n")? }
        }
        PairDescriptor::TorusGroup { .. } => SphericalIndex::Torus {
            k: text.split(';').map(|s| parse_int(s, "frequency")).collect::<Result<_>>()?,
        },
        PairDescriptor::ProductPair { left, right } => {
            let (l, r) = split_product(text)?;
            SphericalIndex::product(parse_index(left, l)?, parse_index(right, r)?)
        }
    };
    pair.check_index(&index)?;
    Ok(index)
}

// -------------------------------------------------------- group elements

pub fn element_to_text(u: &GroupElement) -> String {
    match u {
        GroupElement::Real(v) | GroupElement::Angle(v) => join(v, |x| fmt_f64(*x)),
        GroupElement::Integer(v) => join(v, |x| x.to_string()),
        GroupElement::Residue(r) => r.to_string(),
        GroupElement::Unit => "e".into(),
    }
}

pub fn parse_element(group: GroupDescriptor, text: &str) -> Result<GroupElement> {
    let text = text.trim();
    let floats = || text.split(';').map(|s| parse_f64(s, "group coordinate")).collect::<Result<Vec<_>>>();
    let u = match group {
        GroupDescriptor::Euclidean { .. } => GroupElement::Real(floats()?),
        GroupDescriptor::CircleGroup { .. } => GroupElement::Angle(floats()?),
        GroupDescriptor::IntegerLattice { .. } => {
            GroupElement::Integer(text.split(';').map(|s| parse_int(s, "lattice coordinate")).collect::<Result<_>>()?)
        }
        GroupDescriptor::FiniteCyclic { .. } => GroupElement::Residue(parse_int(text, "residue")?),
        GroupDescriptor::Trivial => match text {
            "e" | "" => GroupElement::Unit,
            _ => return Err(Error::Usage(format!("the trivial group has only the element e, got {text:?}"))),
        },
    };
    group.check(&u)?;
    Ok(u)
}

// --------------------------------------------------- double-coset points

pub fn point_to_text(point: &DoubleCosetPoint) -> String {
    match point {
        DoubleCosetPoint::Real(t) => fmt_f64(*t),
        DoubleCosetPoint::Complex(z) => format!("{}:{}", fmt_f64(z.re), fmt_f64(z.im)),
        DoubleCosetPoint::Torus(x) => join(x, |a| fmt_f64(*a)),
        DoubleCosetPoint::Product(a, b) => format!(
            "{}&{}",
            wrap_nested(point_to_text(a), matches!(**a, DoubleCosetPoint::Product(..))),
            wrap_nested(point_to_text(b), matches!(**b, DoubleCosetPoint::Product(..)))
        ),
    }
}

pub fn parse_point(pair: &PairDescriptor, text: &str) -> Result<DoubleCosetPoint> {
    let text = text.trim();
    let point = match pair {
        PairDescriptor::RealSphere { .. } => DoubleCosetPoint::Real(parse_f64(text, "t")?),
        PairDescriptor::ComplexSphere { .. } => {
            let (re, im) =
                text.split_once(':').ok_or_else(|| Error::Usage(format!("expected re:im, got {text:?}")))?;
            DoubleCosetPoint::Complex(Complex64::new(parse_f64(re, "Re z")?, parse_f64(im, "Im z")?))
        }
        PairDescriptor::TorusGroup { .. } => DoubleCosetPoint::Torus(
            text.split(';').map(|s| parse_f64(s, "angle")).collect::<Result<_>>()?,
        ),
        PairDescriptor::ProductPair { left, right } => {
            let (l, r) = split_product(text)?;
            DoubleCosetPoint::product(parse_point(left, l)?, parse_point(right, r)?)
        }
    };
    pair.check_point(&point)?;
    Ok(point)
}

// ---------------------------------------------------- coefficient tables

impl CoefficientTable {
    /// CSV with header `index,u,re,im`, one row per entry in table order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(COEFFICIENT_HEADER);
        out.push('\n');
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                index_to_text(&e.index),
                element_to_text(&e.u),
                fmt_f64(e.value.re),
                fmt_f64(e.value.im)
            );
        }
        out
    }

    /// Reads a table written by [`CoefficientTable::to_csv`]. Identity
    /// values are recovered when every index has a row at `e_L`.
    pub fn from_csv(pair: &PairDescriptor, group: GroupDescriptor, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == COEFFICIENT_HEADER => {}
            _ => return Err(Error::Usage(format!("coefficient CSV must start with {COEFFICIENT_HEADER:?}"))),
        }
        let mut entries = Vec::new();
        for (line_no, line) in lines {
            let at = |e: Error| Error::Usage(format!("line {}: {e}", line_no + 1));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Usage(format!("line {}: expected 4 fields, found {}", line_no + 1, fields.len())));
            }
            entries.push(CoefficientEntry {
                index: parse_index(pair, fields[0]).map_err(at)?,
                u: parse_element(group, fields[1]).map_err(at)?,
                value: Complex64::new(parse_f64(fields[2], "re").map_err(at)?, parse_f64(fields[3], "im").map_err(at)?),
            });
        }
        let identity = group.identity();
        let mut indices: Vec<SphericalIndex> = Vec::new();
        for e in &entries {
            if !indices.contains(&e.index) {
                indices.push(e.index.clone());
            }
        }
        let identity_values = indices
            .iter()
            .map(|idx| entries.iter().find(|e| &e.index == idx && e.u == identity).map(|e| (idx.clone(), e.value)))
            .collect::<Option<Vec<_>>>();
        let max_excess = identity_values.as_ref().and_then(|ids| {
            entries
                .iter()
                .map(|e| {
                    let b0 = ids.iter().find(|(i, _)| i == &e.index).map(|p| p.1.re).unwrap_or(0.0);
                    e.value.norm() - b0
                })
                .reduce(f64::max)
        });
        Ok(CoefficientTable { pair: pair.clone(), group, entries, identity_values, max_excess })
    }
}
