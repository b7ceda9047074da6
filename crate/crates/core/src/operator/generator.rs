use rayon::prelude::*;

use crate::geometry::Point;

/// Operator values tabulated on a tensor grid over an axis-aligned box and
/// interpolated by tensor cubic convolution. Points outside the box are
/// clamped.
#[derive(Debug, Clone)]
pub struct GridGenerator {
    lo: Point,
    hi: Point,
    counts: Vec<usize>,
    values: Vec<f64>,
}

impl GridGenerator {
    /// Tabulates `f` at `counts[i] >= 2` nodes per axis, in parallel.
    pub fn build(lo: Point, hi: Point, counts: &[usize], f: impl Fn(&Point) -> f64 + Sync) -> GridGenerator {
        assert_eq!(counts.len(), lo.dim());
        assert!(counts.iter().all(|&c| c >= 2));
        let total: usize = counts.iter().product();
        let g = GridGenerator { lo, hi, counts: counts.to_vec(), values: Vec::new() };
        let values = (0..total).into_par_iter().map(|k| f(&g.node(k))).collect();
        GridGenerator { values, ..g }
    }

    fn node(&self, mut k: usize) -> Point {
        let mut p = self.lo;
        for (i, &c) in self.counts.iter().enumerate() {
            let j = k % c;
            k /= c;
            p.set(i, self.lo[i] + (self.hi[i] - self.lo[i]) * j as f64 / (c - 1) as f64);
        }
        p
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, v)| (self.node(k), *v))
    }

    /// Tensor cubic convolution (Catmull–Rom); quadratics are reproduced
    /// exactly, with ghost nodes outside the box extrapolated quadratically.
    pub fn eval(&self, x: &Point) -> f64 {
        let d = self.counts.len();
        let axes: Vec<Vec<(usize, f64)>> = (0..d)
            .map(|i| {
                let c = self.counts[i];
                let s = ((x[i] - self.lo[i]) / (self.hi[i] - self.lo[i])).clamp(0.0, 1.0) * (c - 1) as f64;
                axis_weights(s, c)
            })
            .collect();
        let mut acc = 0.0;
        let mut idx = vec![0usize; d];
        loop {
            let mut w = 1.0;
            let mut flat = 0;
            let mut stride = 1;
            for i in 0..d {
                let (node, wi) = axes[i][idx[i]];
                w *= wi;
                flat += node * stride;
                stride *= self.counts[i];
            }
            acc += w * self.values[flat];
            let mut i = 0;
            while i < d {
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == d {
                return acc;
            }
        }
    }
}

/// Catmull–Rom weights at fractional node position `s ∈ [0, c-1]`, folded
/// onto real nodes. Linear interpolation when `c < 3`.
fn axis_weights(s: f64, c: usize) -> Vec<(usize, f64)> {
    let j = (s.floor() as usize).min(c - 2);
    let t = s - j as f64;
    if c < 3 {
        return vec![(j, 1.0 - t), (j + 1, t)];
    }
    let t2 = t * t;
    let t3 = t2 * t;
    let w = [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ];
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(6);
    let mut add = |node: usize, v: f64| match out.iter_mut().find(|e| e.0 == node) {
        Some(e) => e.1 += v,
        None => out.push((node, v)),
    };
    for (k, &wk) in w.iter().enumerate() {
        let node = j as isize + k as isize - 1;
        if node < 0 {
            // v₋₁ = 3v₀ - 3v₁ + v₂
            add(0, 3.0 * wk);
            add(1, -3.0 * wk);
            add(2, wk);
        } else if node as usize >= c {
            let m = c - 1;
            add(m, 3.0 * wk);
            add(m - 1, -3.0 * wk);
            add(m - 2, wk);
        } else {
            add(node as usize, wk);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quadratics() {
        let f = |p: &Point| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1] + 0.7 * p[0] * p[0] - 0.2 * p[1] * p[1];
        let g = GridGenerator::build(Point::new(&[-1.0, 0.0]), Point::new(&[1.0, 2.0]), &[5, 7], f);
        for p in [[0.3, 0.4], [-0.99, 1.99], [0.0, 0.0], [1.0, 2.0]] {
            let x = Point::new(&p);
            assert!((g.eval(&x) - f(&x)).abs() < 1e-13);
        }
        assert_eq!(g.nodes().count(), 35);
    }

    #[test]
    fn converges_at_third_order_on_smooth_data() {
        let f = |p: &Point| (3.0 * p[0]).sin() * (2.0 * p[1]).cos();
        let err = |m: usize| {
            let g = GridGenerator::build(Point::new(&[0.0, 0.0]), Point::new(&[1.0, 1.0]), &[m, m], f);
            (0..200)
                .map(|k| {
                    let x = Point::new(&[(k as f64 * 0.618_034) % 1.0, (k as f64 * 0.414_214) % 1.0]);
                    (g.eval(&x) - f(&x)).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(11), err(21));
        assert!(e1 / e2 > 6.0, "{e1} {e2}");
    }
}
