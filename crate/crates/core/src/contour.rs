//! Marching-squares iso-lines on a rectilinear grid.

use std::collections::BTreeMap;

/// A crossing sits on exactly one grid edge, which makes edges a stable key
/// for stitching cell segments into polylines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    /// Between `(i, j)` and `(i + 1, j)`.
    H(usize, usize),
    /// Between `(i, j)` and `(i, j + 1)`.
    V(usize, usize),
}

/// Scalar field sampled at `xs[i]`, `ys[j]`; `values[i * ys.len() + j]`.
pub struct Field<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub values: &'a [f64],
}

impl Field<'_> {
    fn z(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }

    fn crossing(&self, edge: Edge, level: f64) -> (f64, f64) {
        let ((i0, j0), (i1, j1)) = match edge {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (z0, z1) = (self.z(i0, j0), self.z(i1, j1));
        let t = (level - z0) / (z1 - z0);
        (
            self.xs[i0] + t * (self.xs[i1] - self.xs[i0]),
            self.ys[j0] + t * (self.ys[j1] - self.ys[j0]),
        )
    }
}

fn cell_segments(field: &Field, i: usize, j: usize, level: f64, out: &mut Vec<(Edge, Edge)>) {
    let above = |a: usize, b: usize| field.z(a, b) > level;
    let case = above(i, j) as u8
        | (above(i + 1, j) as u8) << 1
        | (above(i + 1, j + 1) as u8) << 2
        | (above(i, j + 1) as u8) << 3;
    let (bottom, top) = (Edge::H(i, j), Edge::H(i, j + 1));
    let (left, right) = (Edge::V(i, j), Edge::V(i + 1, j));
    let center_above = || {
        0.25 * (field.z(i, j) + field.z(i + 1, j) + field.z(i + 1, j + 1) + field.z(i, j + 1)) > level
    };
    match case {
        0 | 15 => {}
        1 | 14 => out.push((left, bottom)),
        2 | 13 => out.push((bottom, right)),
        3 | 12 => out.push((left, right)),
        4 | 11 => out.push((right, top)),
        6 | 9 => out.push((bottom, top)),
        7 | 8 => out.push((left, top)),
        5 => {
            if center_above() {
                out.push((bottom, right));
                out.push((left, top));
            } else {
                out.push((left, bottom));
                out.push((right, top));
            }
        }
        10 => {
            if center_above() {
                out.push((left, bottom));
                out.push((right, top));
            } else {
                out.push((bottom, right));
                out.push((left, top));
            }
        }
        _ => unreachable!(),
    }
}

/// Iso-lines of `field` at `level` as polylines in data coordinates. Closed
/// loops repeat their first point at the end.
pub fn march(field: &Field, level: f64) -> Vec<Vec<(f64, f64)>> {
    let (nx, ny) = (field.xs.len(), field.ys.len());
    assert_eq!(field.values.len(), nx * ny, "field size mismatch");
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let mut segments = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            cell_segments(field, i, j, level, &mut segments);
        }
    }

    let mut by_edge: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let other = |k: usize, e: Edge| {
        let (a, b) = segments[k];
        if a == e {
            b
        } else {
            a
        }
    };
    let next_unused = |e: Edge, used: &[bool]| by_edge[&e].iter().copied().find(|k| !used[*k]);

    // Open chains first, started from edges touched by a single segment.
    let mut starts: Vec<Edge> = by_edge.iter().filter(|(_, s)| s.len() == 1).map(|(e, _)| *e).collect();
    starts.extend(segments.iter().map(|(a, _)| *a));

    let mut lines = Vec::new();
    for start in starts {
        let Some(first) = next_unused(start, &used) else {
            continue;
        };
        let mut chain = vec![start];
        let mut seg = first;
        let mut edge = start;
        loop {
            used[seg] = true;
            edge = other(seg, edge);
            chain.push(edge);
            match next_unused(edge, &used) {
                Some(k) => seg = k,
                None => break,
            }
        }
        lines.push(chain.into_iter().map(|e| field.crossing(e, level)).collect());
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn circle_is_one_closed_loop() {
        let xs = linspace(-2.0, 2.0, 41);
        let ys = xs.clone();
        let values: Vec<f64> = xs
            .iter()
            .flat_map(|x| ys.iter().map(move |y| x * x + y * y))
            .collect();
        let lines = march(&Field { xs: &xs, ys: &ys, values: &values }, 1.0);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert_eq!(line.first(), line.last());
        for (x, y) in line {
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn plane_gives_open_line() {
        let xs = linspace(0.0, 1.0, 11);
        let ys = linspace(0.0, 1.0, 7);
        let values: Vec<f64> = xs.iter().flat_map(|x| ys.iter().map(move |_| *x)).collect();
        let lines = march(&Field { xs: &xs, ys: &ys, values: &values }, 0.55);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 7);
        for (x, _) in &lines[0] {
            assert!((x - 0.55).abs() < 1e-12);
        }
    }

    #[test]
    fn level_outside_range_is_empty() {
        let xs = linspace(0.0, 1.0, 5);
        let values = vec![0.0; 25];
        assert!(march(&Field { xs: &xs, ys: &xs, values: &values }, 1.0).is_empty());
    }

    #[test]
    fn saddle_produces_two_segments() {
        let xs = [0.0, 1.0];
        let values = [1.0, 0.0, 0.0, 1.0];
        let lines = march(&Field { xs: &xs, ys: &xs, values: &values }, 0.5);
        assert_eq!(lines.len(), 2);
    }
}
