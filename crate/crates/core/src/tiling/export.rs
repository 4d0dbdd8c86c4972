//! Patch and Ξ exports: JSON, SVG and CSV.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde_json::json;

use super::Patch;
use crate::ring::Point;
use crate::system::SubstitutionSpec;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#9c755f",
];

pub fn patch_to_json(patch: &Patch, spec: &SubstitutionSpec) -> serde_json::Value {
    let tiles: Vec<_> = patch
        .tiles()
        .iter()
        .map(|t| {
            json!({
                "colour": spec.colours[t.colour],
                "position": t.position.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "position_f64": t.position_f64(),
            })
        })
        .collect();
    json!({
        "dimension": spec.dimension,
        "colours": spec.colours,
        "radius": patch.radius,
        "generations": patch.generations,
        "tile_count": patch.len(),
        "tiles": tiles,
    })
}

pub fn patch_to_csv(patch: &Patch, spec: &SubstitutionSpec) -> String {
    let d = spec.dimension;
    let mut out = String::from("colour");
    for a in 0..d {
        let _ = write!(out, ",x{a}_exact,x{a}");
    }
    out.push('\n');
    for t in patch.tiles() {
        out.push_str(&spec.colours[t.colour]);
        for x in &t.position {
            let _ = write!(out, ",\"{}\",{}", x, x.to_f64());
        }
        out.push('\n');
    }
    out
}

pub fn xi_to_csv(xi: &[Point]) -> String {
    let d = xi.first().map_or(1, |p| p.len());
    let mut out = String::new();
    for a in 0..d {
        if a > 0 {
            out.push(',');
        }
        let _ = write!(out, "x{a}_exact,x{a}");
    }
    out.push('\n');
    for p in xi {
        let row: Vec<String> = p
            .iter()
            .map(|x| format!("\"{}\",{}", x, x.to_f64()))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Closed outlines of a union of axis-parallel rectangles, as vertex loops. Box edges are cut
/// at every vertex of the union and segments covered twice cancel.
fn outline(rects: &[[f64; 4]]) -> Vec<Vec<(f64, f64)>> {
    let key = |v: f64| (v * 1e9).round() as i64;
    let xs: Vec<f64> = rects.iter().flat_map(|r| [r[0], r[2]]).collect();
    let ys: Vec<f64> = rects.iter().flat_map(|r| [r[1], r[3]]).collect();
    let mut count: BTreeMap<((i64, i64), (i64, i64)), ((f64, f64), (f64, f64), usize)> =
        BTreeMap::new();
    let mut add = |a: (f64, f64), b: (f64, f64)| {
        let (ka, kb) = ((key(a.0), key(a.1)), (key(b.0), key(b.1)));
        let (k, e) = if ka <= kb {
            ((ka, kb), (a, b))
        } else {
            ((kb, ka), (b, a))
        };
        count.entry(k).or_insert((e.0, e.1, 0)).2 += 1;
    };
    for r in rects {
        for (y, (x0, x1)) in [(r[1], (r[0], r[2])), (r[3], (r[0], r[2]))] {
            let mut cuts: Vec<f64> = xs.iter().copied().filter(|&x| x > x0 && x < x1).collect();
            cuts.extend([x0, x1]);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| key(*a) == key(*b));
            for w in cuts.windows(2) {
                add((w[0], y), (w[1], y));
            }
        }
        for (x, (y0, y1)) in [(r[0], (r[1], r[3])), (r[2], (r[1], r[3]))] {
            let mut cuts: Vec<f64> = ys.iter().copied().filter(|&y| y > y0 && y < y1).collect();
            cuts.extend([y0, y1]);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| key(*a) == key(*b));
            for w in cuts.windows(2) {
                add((x, w[0]), (x, w[1]));
            }
        }
    }
    let mut adjacent: BTreeMap<(i64, i64), Vec<(usize, (i64, i64), (f64, f64))>> = BTreeMap::new();
    let edges: Vec<_> = count.into_iter().filter(|(_, v)| v.2 == 1).collect();
    for (n, ((ka, kb), (a, b, _))) in edges.iter().enumerate() {
        adjacent.entry(*ka).or_default().push((n, *kb, *b));
        adjacent.entry(*kb).or_default().push((n, *ka, *a));
    }
    let mut used = vec![false; edges.len()];
    let mut loops = Vec::new();
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let ((first, mut at), (a, b, _)) = edges[start];
        let mut points = vec![a, b];
        while at != first {
            let Some(&(n, next, p)) = adjacent[&at].iter().find(|(n, _, _)| !used[*n]) else {
                break;
            };
            used[n] = true;
            at = next;
            if at != first {
                points.push(p);
            }
        }
        let n = points.len();
        let corners: Vec<(f64, f64)> = (0..n)
            .filter(|&k| {
                let (a, b, c) = (points[(k + n - 1) % n], points[k], points[(k + 1) % n]);
                ((b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0)).abs() > 1e-12
            })
            .map(|k| points[k])
            .collect();
        loops.push(corners);
    }
    loops
}

/// 1D: one coloured stripe per tile. 2D: one outlined polygon per tile.
pub fn patch_to_svg(patch: &Patch, spec: &SubstitutionSpec) -> String {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut shapes: Vec<(usize, Vec<[f64; 4]>)> = Vec::new();
    for t in patch.tiles() {
        let mut rects = Vec::new();
        for cell in patch.support_of(t).cells() {
            let (l, h) = cell.bbox_f64();
            let r = if spec.dimension == 1 {
                [l[0], 0.0, h[0], 1.0]
            } else {
                [l[0], l[1], h[0], h[1]]
            };
            lo[0] = lo[0].min(r[0]);
            lo[1] = lo[1].min(r[1]);
            hi[0] = hi[0].max(r[2]);
            hi[1] = hi[1].max(r[3]);
            rects.push(r);
        }
        shapes.push((t.colour, rects));
    }
    if shapes.iter().all(|(_, r)| r.is_empty()) {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"0\" height=\"0\"/>\n".into();
    }
    let scale = 800.0 / (hi[0] - lo[0]).max(1e-9);
    let height = if spec.dimension == 1 {
        40.0
    } else {
        (hi[1] - lo[1]) * scale
    };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"{height:.2}\" viewBox=\"0 0 800 {height:.2}\">\n"
    );
    for (c, rects) in shapes {
        let fill = PALETTE[c % PALETTE.len()];
        let name = &spec.colours[c];
        if spec.dimension == 1 {
            for r in rects {
                let x = (r[0] - lo[0]) * scale;
                let w = (r[2] - r[0]) * scale;
                let _ = writeln!(
                    out,
                    "  <rect x=\"{x:.3}\" y=\"0\" width=\"{w:.3}\" height=\"{height:.3}\" fill=\"{fill}\" stroke=\"#222\" stroke-width=\"0.5\"><title>{name}</title></rect>"
                );
            }
            continue;
        }
        let mut d = String::new();
        for ring in outline(&rects) {
            for (k, (x, y)) in ring.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.3} {:.3} ",
                    if k == 0 { "M" } else { "L" },
                    (x - lo[0]) * scale,
                    (hi[1] - y) * scale
                );
            }
            d.push_str("Z ");
        }
        let _ = writeln!(
            out,
            "  <path d=\"{}\" fill=\"{fill}\" fill-rule=\"evenodd\" stroke=\"#222\" stroke-width=\"0.5\"><title>{name}</title></path>",
            d.trim_end()
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_tromino_outline_has_six_corners() {
        let rects = [
            [0.0, 0.0, 1.0, 1.0],
            [1.0, 0.0, 2.0, 1.0],
            [0.0, 1.0, 1.0, 2.0],
        ];
        let loops = outline(&rects);
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].len(), 6);
    }

    #[test]
    fn a_ring_of_boxes_has_two_outlines() {
        let mut rects = Vec::new();
        for (x, y) in [
            (0, 0),
            (1, 0),
            (2, 0),
            (0, 1),
            (2, 1),
            (0, 2),
            (1, 2),
            (2, 2),
        ] {
            rects.push([x as f64, y as f64, x as f64 + 1.0, y as f64 + 1.0]);
        }
        let mut sizes: Vec<usize> = outline(&rects).iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![4, 4]);
    }

    #[test]
    fn unequal_boxes_share_part_of_an_edge() {
        let loops = outline(&[[0.0, 0.0, 2.0, 1.0], [0.0, 1.0, 1.0, 2.0]]);
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].len(), 6);
    }
}
