use super::domain::DomainGeometry;
use super::point::Point;
use super::GeometryError;

/// The box `{0 < y_n - Γ(ỹ) < a, |ỹ - x̃| < r}` above a boundary point.
#[derive(Debug, Clone)]
pub struct BoxRegion {
    pub base: Point,
    pub a: f64,
    pub r: f64,
    pub parent: DomainGeometry,
}

impl BoxRegion {
    pub fn new(base: Point, a: f64, r: f64, parent: DomainGeometry) -> Result<Self, GeometryError> {
        if !(a > 0.0 && r > 0.0) {
            return Err(GeometryError::InvalidShape(format!("box needs a, r > 0 (got {a}, {r})")));
        }
        let h = parent.height(&base)?;
        if h.abs() > 1e-12 * (1.0 + base.norm()) {
            return Err(GeometryError::InvalidShape(format!("box base {base} is not on the boundary")));
        }
        Ok(BoxRegion { base, a, r, parent })
    }

    pub fn contains(&self, y: &Point) -> bool {
        let lateral: f64 = y
            .tilde()
            .iter()
            .zip(self.base.tilde())
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>();
        if lateral >= self.r * self.r {
            return false;
        }
        match self.parent.height(y) {
            Ok(h) => h > 0.0 && h < self.a,
            Err(_) => false,
        }
    }

    pub fn scaled(&self, lambda: f64) -> BoxRegion {
        BoxRegion {
            base: self.base * lambda,
            a: self.a * lambda,
            r: self.r * lambda,
            parent: self.parent.scaled(lambda),
        }
    }
}

/// Membership predicates composed from domains, boxes and balls; used to
/// describe run regions and exit events of the jump chain.
#[derive(Debug, Clone)]
pub enum Region {
    Everywhere,
    Domain(DomainGeometry),
    Box(BoxRegion),
    Ball { center: Point, radius: f64 },
    Not(Box<Region>),
    All(Vec<Region>),
    Any(Vec<Region>),
}

impl Region {
    pub fn contains(&self, y: &Point) -> bool {
        match self {
            Region::Everywhere => true,
            Region::Domain(d) => d.contains(y),
            Region::Box(b) => b.contains(y),
            Region::Ball { center, radius } => y.dist(center) < *radius,
            Region::Not(r) => !r.contains(y),
            Region::All(rs) => rs.iter().all(|r| r.contains(y)),
            Region::Any(rs) => rs.iter().any(|r| r.contains(y)),
        }
    }

    /// `self \ other`
    pub fn minus(self, other: Region) -> Region {
        Region::All(vec![self, Region::Not(Box::new(other))])
    }

    pub fn scaled(&self, lambda: f64) -> Region {
        match self {
            Region::Everywhere => Region::Everywhere,
            Region::Domain(d) => Region::Domain(d.scaled(lambda)),
            Region::Box(b) => Region::Box(b.scaled(lambda)),
            Region::Ball { center, radius } => Region::Ball { center: *center * lambda, radius: radius * lambda },
            Region::Not(r) => Region::Not(Box::new(r.scaled(lambda))),
            Region::All(rs) => Region::All(rs.iter().map(|r| r.scaled(lambda)).collect()),
            Region::Any(rs) => Region::Any(rs.iter().map(|r| r.scaled(lambda)).collect()),
        }
    }
}
