//! Zero-level contours by marching squares, and the Holder seminorm of the
//! boundary tangent angle.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::ScalarField;

/// Ordered polyline. A closed contour does not repeat its first point.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<[f64; 2]>,
    closed: bool,
}

impl Contour {
    pub fn closed(points: Vec<[f64; 2]>) -> Self {
        Self {
            points,
            closed: true,
        }
    }

    pub fn open(points: Vec<[f64; 2]>) -> Self {
        Self {
            points,
            closed: false,
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn segment_count(&self) -> usize {
        match (self.closed, self.points.len()) {
            (_, 0 | 1) => 0,
            (true, n) => n,
            (false, n) => n - 1,
        }
    }

    fn segment(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let n = self.points.len();
        (self.points[i], self.points[(i + 1) % n])
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .sum()
    }

    /// Shoelace area, positive for counter-clockwise loops.
    pub fn signed_area(&self) -> f64 {
        if !self.closed {
            return 0.0;
        }
        let n = self.points.len();
        if n < 3 {
            return 0.0;
        }
        let [ox, oy] = self.points[0];
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = self.segment(i);
                (a[0] - ox) * (b[1] - oy) - (b[0] - ox) * (a[1] - oy)
            })
            .sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Vertex mean.
    pub fn centroid(&self) -> [f64; 2] {
        let n = self.points.len().max(1) as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
        [sx / n, sy / n]
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.max((b[0] - a[0]).hypot(b[1] - a[1]));
            }
        }
        best
    }

    pub fn reversed(mut self) -> Self {
        self.points.reverse();
        self
    }

    /// `m` points equally spaced in arclength, starting at the first vertex.
    pub fn resample(&self, m: usize) -> Self {
        let segs = self.segment_count();
        let total = self.perimeter();
        if segs == 0 || total == 0.0 || m < 2 {
            return self.clone();
        }
        let step = if self.closed {
            total / m as f64
        } else {
            total / (m - 1) as f64
        };
        let mut out = Vec::with_capacity(m);
        let mut seg = 0;
        let mut seg_start = 0.0;
        let (mut a, mut b) = self.segment(0);
        let mut seg_len = (b[0] - a[0]).hypot(b[1] - a[1]);
        for k in 0..m {
            let s = (k as f64 * step).min(total);
            while s > seg_start + seg_len && seg + 1 < segs {
                seg_start += seg_len;
                seg += 1;
                (a, b) = self.segment(seg);
                seg_len = (b[0] - a[0]).hypot(b[1] - a[1]);
            }
            let t = if seg_len > 0.0 {
                ((s - seg_start) / seg_len).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
        Self {
            points: out,
            closed: self.closed,
        }
    }

    /// Resamples to a power-of-two count giving at least two points per
    /// `spacing` of arclength.
    pub fn resample_uniform(&self, spacing: f64) -> Self {
        let target = (2.0 * self.perimeter() / spacing).ceil().max(64.0) as usize;
        self.resample(target.next_power_of_two())
    }
}

/// Edge identifier: horizontal edges `(i, j)-(i+1, j)` are even, vertical
/// edges `(i, j)-(i, j+1)` odd.
fn h_edge(n: usize, i: usize, j: usize) -> usize {
    2 * (j * n + i)
}

fn v_edge(n: usize, i: usize, j: usize) -> usize {
    2 * (j * n + i) + 1
}

/// All closed zero-level loops of `f` (inside is `f < 0`), each oriented
/// counter-clockwise. Cells touching the periodic seam are ignored.
pub fn extract_loops(f: &ScalarField) -> Vec<Contour> {
    let grid = f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let v = |i: usize, j: usize| f.at(i, j);
    let mut crossing: HashMap<usize, [f64; 2]> = HashMap::new();
    let mut point = |edge: usize, i: usize, j: usize| -> usize {
        crossing.entry(edge).or_insert_with(|| {
            let (a, b, horizontal) = if edge.is_multiple_of(2) {
                (v(i, j), v(i + 1, j), true)
            } else {
                (v(i, j), v(i, j + 1), false)
            };
            let t = a / (a - b);
            let (x0, y0) = (i as f64 * h, j as f64 * h);
            if horizontal {
                [x0 + t * h, y0]
            } else {
                [x0, y0 + t * h]
            }
        });
        edge
    };
    let mut segments: Vec<[usize; 2]> = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let c = [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)];
            let inside = c.map(|x| x < 0.0);
            let case = inside
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &b)| acc | ((b as u8) << k));
            if case == 0 || case == 15 {
                continue;
            }
            let bottom = (h_edge(n, i, j), i, j);
            let right = (v_edge(n, i + 1, j), i + 1, j);
            let top = (h_edge(n, i, j + 1), i, j + 1);
            let left = (v_edge(n, i, j), i, j);
            let mut edges = Vec::with_capacity(4);
            for (k, e) in [bottom, right, top, left].into_iter().enumerate() {
                // edge k joins corners k and k + 1
                if inside[k] != inside[(k + 1) % 4] {
                    edges.push(point(e.0, e.1, e.2));
                }
            }
            if edges.len() == 2 {
                segments.push([edges[0], edges[1]]);
                continue;
            }
            // saddle: all four edges crossed, resolved by the cell average
            let centre_inside = c.iter().sum::<f64>() < 0.0;
            let [b, r, t, l] = [edges[0], edges[1], edges[2], edges[3]];
            let corner0_isolated = inside[0] != centre_inside;
            if corner0_isolated {
                segments.push([l, b]);
                segments.push([r, t]);
            } else {
                segments.push([b, r]);
                segments.push([t, l]);
            }
        }
    }
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            by_edge.entry(e).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut loops = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first = segments[start][0];
        let mut edge = segments[start][1];
        let mut pts = vec![crossing[&first]];
        let mut closed = false;
        loop {
            if edge == first {
                closed = true;
                break;
            }
            pts.push(crossing[&edge]);
            let next = by_edge[&edge].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            edge = if segments[s][0] == edge {
                segments[s][1]
            } else {
                segments[s][0]
            };
        }
        let c = if closed {
            Contour::closed(pts)
        } else {
            Contour::open(pts)
        };
        loops.push(if c.signed_area() < 0.0 { c.reversed() } else { c });
    }
    loops
}

/// The single boundary of `{f < 0}`, resampled to uniform arclength with a
/// power-of-two number of points.
pub fn extract_contour(f: &ScalarField) -> Result<Contour> {
    let loops = extract_loops(f);
    match loops.len() {
        1 if loops[0].is_closed() => Ok(loops[0].resample_uniform(f.grid().spacing())),
        0 => Err(Error::InvalidPatch("level set has no zero contour".into())),
        k => Err(Error::PatchSplit { components: k }),
    }
}

/// `sup_h sup_s |theta(s + h) - theta(s)| / h^eps` for the unwrapped tangent
/// angle `theta` of `c`, over dyadic lags of 1, 2, 4, ... samples up to
/// `max(1, m / 32)` where `m` is the number of segments. The cap keeps the
/// seminorm local: larger lags only see the global turning of a closed curve.
pub fn boundary_holder(c: &Contour, eps: f64) -> f64 {
    let m = c.segment_count();
    if m == 0 {
        return 0.0;
    }
    let mut theta = Vec::with_capacity(m + 1);
    let mut mid = Vec::with_capacity(m + 1);
    let mut s = 0.0;
    for i in 0..m {
        let (a, b) = c.segment(i);
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = d[0].hypot(d[1]);
        let raw = d[1].atan2(d[0]);
        let angle = match theta.last() {
            Some(&prev) => prev + wrap_angle(raw - prev),
            None => raw,
        };
        theta.push(angle);
        mid.push(s + 0.5 * len);
        s += len;
    }
    let perimeter = s;
    let turn = if c.is_closed() {
        let next = theta[m - 1] + wrap_angle(theta[0] - theta[m - 1]);
        next - theta[0]
    } else {
        0.0
    };
    let max_lag = (m / 32).max(1);
    let mut best: f64 = 0.0;
    let mut lag = 1;
    while lag <= max_lag {
        for i in 0..m {
            let j = i + lag;
            let (dt, ds) = if j < m {
                (theta[j] - theta[i], mid[j] - mid[i])
            } else if c.is_closed() {
                let j = j - m;
                (theta[j] + turn - theta[i], mid[j] + perimeter - mid[i])
            } else {
                continue;
            };
            if ds > 0.0 {
                best = best.max(dt.abs() / ds.powf(eps));
            }
        }
        lag *= 2;
    }
    best
}

fn wrap_angle(a: f64) -> f64 {
    a - 2.0 * PI * (a / (2.0 * PI)).round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid2D;

    fn circle_field(n: usize, r: f64) -> ScalarField {
        let g = Grid2D::new(n, 8.0).unwrap();
        ScalarField::from_fn(&g, |x, y| ((x - 4.0).powi(2) + (y - 4.0).powi(2)).sqrt() - r)
    }

    #[test]
    fn circle_contour() {
        let c = extract_contour(&circle_field(256, 1.0)).unwrap();
        assert!(c.is_closed());
        assert!(c.len().is_power_of_two());
        assert!((c.perimeter() - 2.0 * PI).abs() < 2e-3);
        assert!(c.signed_area() > 0.0);
        assert!((c.area() - PI).abs() < 1e-2);
        let h = boundary_holder(&c, 0.5);
        assert!(h > 0.0 && h <= 0.5, "{h}");
    }

    #[test]
    fn two_discs_split() {
        let g = Grid2D::new(128, 8.0).unwrap();
        let f = ScalarField::from_fn(&g, |x, y| {
            let a = ((x - 2.5).powi(2) + (y - 4.0).powi(2)).sqrt() - 0.7;
            let b = ((x - 5.5).powi(2) + (y - 4.0).powi(2)).sqrt() - 0.7;
            a.min(b)
        });
        assert!(matches!(extract_contour(&f), Err(Error::PatchSplit { components: 2 })));
        let g = Grid2D::new(64, 8.0).unwrap();
        assert!(extract_contour(&ScalarField::constant(&g, 1.0)).is_err());
    }

    #[test]
    fn flat_and_degenerate_contours() {
        let flat = Contour::open((0..50).map(|i| [i as f64 * 0.1, 1.0]).collect());
        assert_eq!(boundary_holder(&flat, 0.5), 0.0);
        let dup = Contour::open(vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]);
        assert!(boundary_holder(&dup, 0.5).is_finite());
        assert_eq!(boundary_holder(&Contour::open(vec![[1.0, 1.0]]), 0.5), 0.0);
    }

    #[test]
    fn perimeter_stable_under_refinement() {
        let a = extract_contour(&circle_field(128, 1.3)).unwrap().perimeter();
        let b = extract_contour(&circle_field(256, 1.3)).unwrap().perimeter();
        assert!((a - b).abs() / b < 0.01);
    }

    #[test]
    fn square_corner_is_rough() {
        // a polygon with corners has an unbounded Holder quotient at small lags
        let mut pts = Vec::new();
        for i in 0..64 {
            pts.push([i as f64 / 64.0, 0.0]);
        }
        for i in 0..64 {
            pts.push([1.0, i as f64 / 64.0]);
        }
        for i in 0..64 {
            pts.push([1.0 - i as f64 / 64.0, 1.0]);
        }
        for i in 0..64 {
            pts.push([0.0, 1.0 - i as f64 / 64.0]);
        }
        let coarse = boundary_holder(&Contour::closed(pts.clone()), 0.5);
        let fine = boundary_holder(&Contour::closed(pts).resample(1024), 0.5);
        assert!(fine > coarse * 1.5);
    }
}
