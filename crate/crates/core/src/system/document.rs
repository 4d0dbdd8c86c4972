//! The TOML spec document format.
//!
//! ```toml
//! [system]
//! dimension = 1
//! colours = ["a", "b"]
//!
//! [expansion]
//! minpoly = "x^2 - x - 1"
//! root_bracket = [3/2, 17/10]
//!
//! [digits.a.a]
//! points = ["0"]
//! ```

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Deserialize;

use super::expr::{parse_expression, parse_rational};
use super::words::word_to_spec_with_alphabet;
use super::{SubstitutionSpec, SystemError, MAX_COLOURS};
use crate::geometry::{Cuboid, Support};
use crate::ring::{ExpansionMap, IntPoly, MinimalPolynomial, Point, Ring, RingElement};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    system: SystemSection,
    expansion: Option<ExpansionSection>,
    digits: Option<BTreeMap<String, BTreeMap<String, DigitSection>>>,
    prototiles: Option<BTreeMap<String, PrototileSection>>,
    symbolic: Option<SymbolicSection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    dimension: usize,
    colours: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionSection {
    minpoly: Option<String>,
    root_bracket: Option<Vec<Scalar>>,
    matrix: Option<Vec<Vec<Scalar>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DigitSection {
    points: Vec<Coordinate>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PrototileSection {
    vertices: Option<Vec<Vec<Scalar>>>,
    boxes: Option<Vec<Vec<Vec<Scalar>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolicSection {
    words: Vec<String>,
}

#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coordinate {
    Int(i64),
    Text(String),
    Vector(Vec<Scalar>),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Int(v) => v.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

/// Quotes bare rationals such as `3/2` outside strings and comments so TOML accepts them.
fn quote_bare_rationals(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() + 16);
    let mut i = 0;
    let mut in_string: Option<char> = None;
    let mut in_comment = false;
    while i < chars.len() {
        let c = chars[i];
        if in_comment {
            out.push(c);
            if c == '\n' {
                in_comment = false;
            }
            i += 1;
            continue;
        }
        if let Some(q) = in_string {
            out.push(c);
            if c == '\\' && q == '"' && i + 1 < chars.len() {
                out.push(chars[i + 1]);
                i += 2;
                continue;
            }
            if c == q {
                in_string = None;
            }
            i += 1;
            continue;
        }
        match c {
            '"' | '\'' => {
                in_string = Some(c);
                out.push(c);
                i += 1;
            }
            '#' => {
                in_comment = true;
                out.push(c);
                i += 1;
            }
            '-' | '0'..='9' => {
                let prev_ok = i == 0 || !(chars[i - 1].is_alphanumeric() || chars[i - 1] == '_');
                let start = i;
                let mut j = i;
                if chars[j] == '-' {
                    j += 1;
                }
                let digits_start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let num_ok = j > digits_start && prev_ok;
                if num_ok && j < chars.len() && chars[j] == '/' {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k] == ' ' {
                        k += 1;
                    }
                    let den_start = k;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k > den_start {
                        out.push('"');
                        out.extend(&chars[start..k]);
                        out.push('"');
                        i = k;
                        continue;
                    }
                }
                out.extend(&chars[start..j.max(start + 1)]);
                i = j.max(start + 1);
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (k, c) in text.char_indices() {
        if k >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn invalid(msg: impl Into<String>) -> SystemError {
    SystemError::Invalid(msg.into())
}

fn parse_scalar_rational(s: &Scalar, what: &str) -> Result<BigRational, SystemError> {
    parse_rational(&s.text())
        .map_err(|e| invalid(format!("{what}: cannot read '{}': {e}", s.text())))
}

fn parse_coord(text: &str, ring: &Ring) -> Result<RingElement, SystemError> {
    parse_expression(text, ring).map_err(|e| match e {
        super::expr::ExprError::GeneratorUnavailable => SystemError::OutsideRing(text.to_string()),
        other => invalid(format!("cannot read coordinate '{text}': {other}")),
    })
}

fn parse_point(c: &Coordinate, dimension: usize, ring: &Ring) -> Result<Point, SystemError> {
    let texts: Vec<String> = match c {
        Coordinate::Int(v) => vec![v.to_string()],
        Coordinate::Text(s) => vec![s.clone()],
        Coordinate::Vector(v) => v.iter().map(Scalar::text).collect(),
    };
    if texts.len() != dimension {
        return Err(invalid(format!(
            "point {texts:?} has {} coordinates, expected {dimension}",
            texts.len()
        )));
    }
    texts.iter().map(|t| parse_coord(t, ring)).collect()
}

/// Parses and validates a spec document.
pub fn parse_spec(text: &str) -> Result<SubstitutionSpec, SystemError> {
    if text.trim().is_empty() {
        return Err(SystemError::Syntax {
            line: 1,
            column: 1,
            message: "empty document".into(),
        });
    }
    let prepared = quote_bare_rationals(text);
    let doc: Document = toml::from_str(&prepared).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(&prepared, s.start));
        SystemError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let sys = &doc.system;
    if sys.dimension == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let m = sys.colours.len();
    if m == 0 {
        return Err(invalid("at least one colour is required"));
    }
    if m > MAX_COLOURS {
        return Err(SystemError::TooManyColours(m));
    }
    for (k, c) in sys.colours.iter().enumerate() {
        if c.is_empty() || sys.colours[..k].contains(c) {
            return Err(invalid(format!(
                "colour names must be nonempty and distinct ('{c}')"
            )));
        }
    }

    if let Some(sym) = &doc.symbolic {
        if sys.dimension != 1 {
            return Err(invalid("symbolic words require dimension 1"));
        }
        if doc.prototiles.is_some() {
            return Err(invalid("prototiles are not used with symbolic words"));
        }
        let mut spec = word_to_spec_with_alphabet(&sys.colours, &sym.words)?;
        if doc.digits.is_some() || doc.expansion.is_some() {
            spec.warnings
                .push("[symbolic] overrides [expansion] and [digits]".into());
        }
        return Ok(spec);
    }

    let expansion_doc = doc
        .expansion
        .as_ref()
        .ok_or_else(|| invalid("missing [expansion] section"))?;
    let (ring, expansion) = if sys.dimension == 1 {
        if expansion_doc.matrix.is_some() {
            return Err(invalid(
                "dimension 1 uses `minpoly` and `root_bracket`, not `matrix`",
            ));
        }
        let mp_text = expansion_doc
            .minpoly
            .as_ref()
            .ok_or_else(|| invalid("missing `minpoly`"))?;
        let poly = IntPoly::parse(mp_text)?;
        let bracket = expansion_doc
            .root_bracket
            .as_ref()
            .ok_or_else(|| invalid("missing `root_bracket`"))?;
        if bracket.len() != 2 {
            return Err(invalid("`root_bracket` must have two entries"));
        }
        let lo = parse_scalar_rational(&bracket[0], "root_bracket")?;
        let hi = parse_scalar_rational(&bracket[1], "root_bracket")?;
        let ring = Ring::algebraic(MinimalPolynomial::new(poly, lo, hi)?);
        let lambda = ring.generator()?;
        (ring, ExpansionMap::Scalar(lambda))
    } else {
        if expansion_doc.minpoly.is_some() || expansion_doc.root_bracket.is_some() {
            return Err(invalid("dimension ≥ 2 uses a rational `matrix`"));
        }
        let rows = expansion_doc
            .matrix
            .as_ref()
            .ok_or_else(|| invalid("missing `matrix`"))?;
        if rows.len() != sys.dimension || rows.iter().any(|r| r.len() != sys.dimension) {
            return Err(invalid(format!("`matrix` must be {0}×{0}", sys.dimension)));
        }
        let mut matrix = Vec::new();
        for row in rows {
            matrix.push(
                row.iter()
                    .map(|s| parse_scalar_rational(s, "matrix"))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        (Ring::rational(), ExpansionMap::Matrix(matrix))
    };
    expansion.check_expansive()?;
    if sys.dimension >= 2 && expansion.diagonal().is_none() {
        return Err(invalid(
            "only diagonal expansion matrices are supported in dimension ≥ 2",
        ));
    }

    let mut digits: Vec<Vec<Vec<Point>>> = vec![vec![Vec::new(); m]; m];
    let index = |name: &str| -> Result<usize, SystemError> {
        sys.colours
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| SystemError::UnknownColour(name.to_string()))
    };
    if let Some(d) = &doc.digits {
        for (child, inner) in d {
            let i = index(child)?;
            for (parent, section) in inner {
                let j = index(parent)?;
                for c in &section.points {
                    digits[i][j].push(parse_point(c, sys.dimension, &ring)?);
                }
            }
        }
    }
    for j in 0..m {
        if (0..m).all(|i| digits[i][j].is_empty()) {
            return Err(SystemError::EmptyColumn(sys.colours[j].clone()));
        }
    }

    let prototiles = if sys.dimension >= 2 {
        let sections = doc
            .prototiles
            .as_ref()
            .ok_or_else(|| invalid("dimension ≥ 2 requires [prototiles]"))?;
        let mut supports = vec![None; m];
        for (name, section) in sections {
            let i = index(name)?;
            supports[i] = Some(parse_prototile(section, sys.dimension, &ring, name)?);
        }
        let mut out = Vec::with_capacity(m);
        for (i, s) in supports.into_iter().enumerate() {
            out.push(s.ok_or_else(|| {
                invalid(format!("missing prototile for colour '{}'", sys.colours[i]))
            })?);
        }
        Some(out)
    } else {
        if doc.prototiles.is_some() {
            return Err(invalid(
                "prototiles are derived from the adjoint system in dimension 1",
            ));
        }
        None
    };

    Ok(SubstitutionSpec {
        dimension: sys.dimension,
        colours: sys.colours.clone(),
        ring,
        expansion,
        digits,
        prototiles,
        words: None,
        warnings: Vec::new(),
    })
}

fn parse_prototile(
    section: &PrototileSection,
    dimension: usize,
    ring: &Ring,
    name: &str,
) -> Result<Support, SystemError> {
    match (&section.vertices, &section.boxes) {
        (Some(vertices), None) => {
            if dimension != 2 {
                return Err(invalid(
                    "`vertices` describes planar prototiles only; use `boxes`",
                ));
            }
            let pts: Vec<Point> = vertices
                .iter()
                .map(|v| {
                    if v.len() != 2 {
                        return Err(invalid(format!(
                            "prototile '{name}': vertices need two coordinates"
                        )));
                    }
                    v.iter().map(|s| parse_coord(&s.text(), ring)).collect()
                })
                .collect::<Result<_, _>>()?;
            rectilinear_polygon(&pts).ok_or_else(|| {
                invalid(format!(
                    "prototile '{name}' is not a simple axis-parallel polygon"
                ))
            })
        }
        (None, Some(boxes)) => {
            let mut out = Vec::new();
            for b in boxes {
                if b.len() != 2 || b.iter().any(|c| c.len() != dimension) {
                    return Err(invalid(format!(
                        "prototile '{name}': each box is [lower corner, upper corner]"
                    )));
                }
                let lo: Point = b[0]
                    .iter()
                    .map(|s| parse_coord(&s.text(), ring))
                    .collect::<Result<_, _>>()?;
                let hi: Point = b[1]
                    .iter()
                    .map(|s| parse_coord(&s.text(), ring))
                    .collect::<Result<_, _>>()?;
                if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
                    return Err(invalid(format!(
                        "prototile '{name}': box has empty interior"
                    )));
                }
                out.push(Cuboid::new(lo, hi));
            }
            if out.is_empty() {
                return Err(invalid(format!("prototile '{name}' is empty")));
            }
            for a in 0..out.len() {
                for b in a + 1..out.len() {
                    if out[a].intersect(&out[b]).is_some() {
                        return Err(invalid(format!("prototile '{name}': boxes overlap")));
                    }
                }
            }
            Ok(Support::new(out))
        }
        _ => Err(invalid(format!(
            "prototile '{name}' needs exactly one of `vertices` or `boxes`"
        ))),
    }
}

/// Decomposes a simple axis-parallel polygon into boxes (one per occupied grid cell, merged along rows).
fn rectilinear_polygon(vertices: &[Point]) -> Option<Support> {
    let n = vertices.len();
    if n < 4 {
        return None;
    }
    for k in 0..n {
        let a = &vertices[k];
        let b = &vertices[(k + 1) % n];
        let same_x = a[0] == b[0];
        let same_y = a[1] == b[1];
        if same_x == same_y {
            return None;
        }
    }
    let mut xs: Vec<RingElement> = vertices.iter().map(|v| v[0].clone()).collect();
    let mut ys: Vec<RingElement> = vertices.iter().map(|v| v[1].clone()).collect();
    xs.sort();
    xs.dedup();
    ys.sort();
    ys.dedup();
    let ring = vertices[0][0].ring().clone();
    let half = crate::ring::rational(1, 2);
    let mut boxes = Vec::new();
    for yi in 0..ys.len().saturating_sub(1) {
        let my = (&ys[yi] + &ys[yi + 1]).scale(&half);
        let mut run: Option<usize> = None;
        for xi in 0..xs.len() {
            let inside = xi + 1 < xs.len() && {
                let mx = (&xs[xi] + &xs[xi + 1]).scale(&half);
                point_in_polygon(&mx, &my, vertices)
            };
            match (inside, run) {
                (true, None) => run = Some(xi),
                (false, Some(start)) => {
                    boxes.push(Cuboid::new(
                        vec![xs[start].clone(), ys[yi].clone()],
                        vec![xs[xi].clone(), ys[yi + 1].clone()],
                    ));
                    run = None;
                }
                _ => {}
            }
        }
    }
    let _ = ring;
    (!boxes.is_empty()).then(|| Support::new(boxes))
}

/// Even-odd test for a point that is never on the boundary (cell midpoints).
fn point_in_polygon(x: &RingElement, y: &RingElement, vertices: &[Point]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for k in 0..n {
        let a = &vertices[k];
        let b = &vertices[(k + 1) % n];
        // vertical edges only cross a horizontal ray
        if a[0] == b[0] && &a[0] > x {
            let (lo, hi) = if a[1] < b[1] {
                (&a[1], &b[1])
            } else {
                (&b[1], &a[1])
            };
            if lo < y && y < hi {
                inside = !inside;
            }
        }
    }
    inside
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Serializes a spec to a document that parses back to an equal spec.
pub fn to_document(spec: &SubstitutionSpec) -> String {
    let mut out = String::new();
    out.push_str("[system]\n");
    out.push_str(&format!("dimension = {}\n", spec.dimension));
    let colours: Vec<String> = spec.colours.iter().map(|c| quote(c)).collect();
    out.push_str(&format!("colours = [{}]\n\n", colours.join(", ")));
    if let Some(words) = &spec.words {
        let w: Vec<String> = words.iter().map(|c| quote(c)).collect();
        out.push_str(&format!("[symbolic]\nwords = [{}]\n", w.join(", ")));
        return out;
    }
    out.push_str("[expansion]\n");
    match &spec.expansion {
        ExpansionMap::Scalar(_) => {
            let mp = spec.ring.minpoly().expect("algebraic ring");
            let (lo, hi) = mp.bracket();
            out.push_str(&format!("minpoly = {}\n", quote(&mp.poly().to_string())));
            out.push_str(&format!(
                "root_bracket = [{}, {}]\n",
                quote(&lo.to_string()),
                quote(&hi.to_string())
            ));
        }
        ExpansionMap::Matrix(rows) => {
            let rendered: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "[{}]",
                        r.iter()
                            .map(|v| quote(&v.to_string()))
                            .collect::<Vec<_>>()
                            .join(", ")
                    )
                })
                .collect();
            out.push_str(&format!("matrix = [{}]\n", rendered.join(", ")));
        }
    }
    let render_point = |p: &Point| -> String {
        if p.len() == 1 {
            quote(&p[0].to_string())
        } else {
            format!(
                "[{}]",
                p.iter()
                    .map(|v| quote(&v.to_string()))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }
    };
    for (i, row) in spec.digits.iter().enumerate() {
        for (j, pts) in row.iter().enumerate() {
            if pts.is_empty() {
                continue;
            }
            out.push_str(&format!(
                "\n[digits.{}.{}]\n",
                quote(&spec.colours[i]),
                quote(&spec.colours[j])
            ));
            let rendered: Vec<String> = pts.iter().map(render_point).collect();
            out.push_str(&format!("points = [{}]\n", rendered.join(", ")));
        }
    }
    if let Some(tiles) = &spec.prototiles {
        for (i, s) in tiles.iter().enumerate() {
            out.push_str(&format!(
                "\n[prototiles.{}]\nboxes = [",
                quote(&spec.colours[i])
            ));
            let rendered: Vec<String> = s
                .boxes
                .iter()
                .map(|b| format!("[{}, {}]", render_point(&b.lo), render_point(&b.hi)))
                .collect();
            out.push_str(&rendered.join(", "));
            out.push_str("]\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIB: &str = r#"
[system]
dimension = 1
colours = ["a", "b"]

[expansion]
minpoly = "x^2 - x - 1"
root_bracket = [3/2, 17/10]

[digits.a.a]
points = ["0"]
[digits.a.b]
points = ["0"]
[digits.b.a]
points = ["L"]
"#;

    #[test]
    fn parses_fibonacci() {
        let spec = parse_spec(FIB).unwrap();
        assert_eq!(spec.colour_count(), 2);
        assert_eq!(spec.dimension, 1);
        assert_eq!(
            spec.substitution_matrix().entries,
            vec![vec![1, 1], vec![1, 0]]
        );
        let again = parse_spec(&to_document(&spec)).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(parse_spec(""), Err(SystemError::Syntax { .. })));
        let empty_col = FIB.replace("[digits.a.b]\npoints = [\"0\"]\n", "");
        assert!(matches!(parse_spec(&empty_col), Err(SystemError::EmptyColumn(c)) if c == "b"));
        let reducible = FIB
            .replace("x^2 - x - 1", "x^2 - 3*x + 2")
            .replace("[3/2, 17/10]", "[3/2, 5/2]");
        let err = parse_spec(&reducible).unwrap_err();
        assert!(
            err.to_string().contains("reducible minimal polynomial"),
            "{err}"
        );
        let unknown = FIB.replace("[digits.b.a]", "[digits.c.a]");
        assert!(matches!(parse_spec(&unknown), Err(SystemError::UnknownColour(c)) if c == "c"));
        let extra = FIB.replace("dimension = 1", "dimension = 1\nfoo = 2");
        assert!(matches!(
            parse_spec(&extra),
            Err(SystemError::Syntax { .. })
        ));
        let bad_syntax = FIB.replace("colours = [", "colours = [[");
        assert!(matches!(
            parse_spec(&bad_syntax),
            Err(SystemError::Syntax { .. })
        ));
    }

    #[test]
    fn quotes_rationals_only_outside_strings() {
        let s = quote_bare_rationals("a = [3/2, -17/10] # 1/2\nb = \"1/2\"\nc = 4");
        assert_eq!(s, "a = [\"3/2\", \"-17/10\"] # 1/2\nb = \"1/2\"\nc = 4");
    }

    #[test]
    fn rectilinear_l_shape() {
        let r = Ring::rational();
        let pts: Vec<Point> = [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]
            .iter()
            .map(|v| vec![r.from_int(v[0]), r.from_int(v[1])])
            .collect();
        let s = rectilinear_polygon(&pts).unwrap();
        assert_eq!(s.volume(), r.from_int(3));
        assert_eq!(s.boxes.len(), 2);
    }
}
