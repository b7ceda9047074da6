use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

pub const MAX_DIM: usize = 3;

/// A point (or vector) in R^n for n <= 3. The last coordinate is the
/// "vertical" one; the first n-1 form the tangential part.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    dim: usize,
    c: [f64; MAX_DIM],
}

impl Point {
    pub fn new(coords: &[f64]) -> Point {
        assert!(
            (1..=MAX_DIM).contains(&coords.len()),
            "dimension {} unsupported (1..={MAX_DIM})",
            coords.len()
        );
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point { dim: coords.len(), c }
    }

    pub fn zeros(dim: usize) -> Point {
        Point::new(&[0.0; MAX_DIM][..dim])
    }

    /// Unit vector along axis `i`.
    pub fn axis(dim: usize, i: usize) -> Point {
        let mut p = Point::zeros(dim);
        p.c[i] = 1.0;
        p
    }

    /// Builds `(tilde, last)`.
    pub fn from_parts(tilde: &[f64], last: f64) -> Point {
        let mut p = Point::zeros(tilde.len() + 1);
        p.c[..tilde.len()].copy_from_slice(tilde);
        p.c[tilde.len()] = last;
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn tilde(&self) -> &[f64] {
        &self.c[..self.dim - 1]
    }

    pub fn last(&self) -> f64 {
        self.c[self.dim - 1]
    }

    pub fn with_last(mut self, v: f64) -> Point {
        self.c[self.dim - 1] = v;
        self
    }

    pub fn set(&mut self, i: usize, v: f64) {
        assert!(i < self.dim);
        self.c[i] = v;
    }

    pub fn dot(&self, o: &Point) -> f64 {
        self.coords().iter().zip(o.coords()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn tilde_norm(&self) -> f64 {
        self.tilde().iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn dist(&self, o: &Point) -> f64 {
        (*self - *o).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|v| v.is_finite())
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0).then(|| *self * (1.0 / n))
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords()[i]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(mut self, o: Point) -> Point {
        debug_assert_eq!(self.dim, o.dim);
        for i in 0..self.dim {
            self.c[i] += o.c[i];
        }
        self
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(mut self, o: Point) -> Point {
        debug_assert_eq!(self.dim, o.dim);
        for i in 0..self.dim {
            self.c[i] -= o.c[i];
        }
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(mut self, s: f64) -> Point {
        for v in &mut self.c[..self.dim] {
            *v *= s;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self * -1.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}
