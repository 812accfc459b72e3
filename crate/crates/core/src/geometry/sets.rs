//! The concrete convex set shapes and their exact projections.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::dykstra;
use super::vector::Vector;

/// Region between two parallel hyperplanes:
/// `lower <= direction . x <= upper` with a unit `direction`.
///
/// This is the set a single bounded-noise scalar measurement carves out
/// of parameter space, and the shape running intersections of such
/// measurements keep. A slab whose bounds cross (`lower > upper`) is the
/// explicit *empty* state: it stays representable so that inconsistent
/// data can be flagged, and every geometric operation on it returns
/// [`Error::EmptySet`].
#[derive(Clone, Debug, PartialEq)]
pub struct Slab<T> {
    direction: Vector<T>,
    lower: T,
    upper: T,
}

impl<T: Real> Slab<T> {
    /// Builds a slab from a direction and two bounds.
    ///
    /// Directions already within [`Real::unit_norm_tolerance`] of unit
    /// norm are kept bit-exact; anything else is rescaled to unit norm
    /// together with the bounds, which leaves the set unchanged. Zero
    /// directions and non-finite bounds are rejected. `lower > upper` is
    /// accepted and yields the empty state.
    pub fn new(direction: Vector<T>, lower: T, upper: T) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidConfig("slab bounds must be finite".into()));
        }
        let norm = direction.norm();
        if norm == T::zero() {
            return Err(Error::InvalidVector("slab direction must be nonzero"));
        }
        if (norm - T::one()).abs() <= T::unit_norm_tolerance() {
            return Ok(Self { direction, lower, upper });
        }
        Ok(Self { direction: direction.normalized()?, lower: lower / norm, upper: upper / norm })
    }

    #[inline]
    pub fn direction(&self) -> &Vector<T> {
        &self.direction
    }

    #[inline]
    pub fn lower(&self) -> T {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> T {
        self.upper
    }

    /// `upper - lower`; negative exactly for the empty state.
    #[inline]
    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    /// True when the bounds have crossed and the slab contains nothing.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    fn check(&self, p: &Vector<T>) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        Ok(())
    }

    /// Euclidean distance from `p` to the slab: how far the coordinate
    /// `direction . p` falls outside `[lower, upper]`, zero inside.
    pub fn distance(&self, p: &Vector<T>) -> Result<T> {
        self.check(p)?;
        let t = self.direction.dot(p);
        Ok((t - self.upper).max(self.lower - t).max(T::zero()))
    }

    /// Exact projection: clamps the coordinate along the direction and
    /// leaves the orthogonal component untouched.
    pub fn project(&self, p: &Vector<T>) -> Result<Vector<T>> {
        self.check(p)?;
        let t = self.direction.dot(p);
        if t > self.upper {
            Ok(p.add_scaled(self.upper - t, &self.direction))
        } else if t < self.lower {
            Ok(p.add_scaled(self.lower - t, &self.direction))
        } else {
            Ok(p.clone())
        }
    }

    /// Membership within slack `tol` (non-negative), measured as
    /// Euclidean distance.
    pub fn contains(&self, p: &Vector<T>, tol: T) -> Result<bool> {
        assert!(tol >= T::zero(), "membership tolerance must be non-negative");
        Ok(self.distance(p)? <= tol)
    }

    /// Intersects with a slab sharing this one's axis: same direction, or
    /// the exact negation (whose bounds flip sign and swap). Returns
    /// `None` when the directions differ, possibly an empty slab when the
    /// merged bounds cross.
    pub(crate) fn merge_parallel(&self, other: &Slab<T>) -> Option<Slab<T>> {
        let (lo, hi) = if other.direction == self.direction {
            (other.lower, other.upper)
        } else if other.direction.is_neg_of(&self.direction) {
            (-other.upper, -other.lower)
        } else {
            return None;
        };
        Some(Slab {
            direction: self.direction.clone(),
            lower: self.lower.max(lo),
            upper: self.upper.min(hi),
        })
    }
}

/// Axis-aligned box `lower <= x <= upper`, componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet<T> {
    lower: Vector<T>,
    upper: Vector<T>,
}

impl<T: Real> BoxSet<T> {
    /// Bounds must agree in dimension and satisfy `lower <= upper` in
    /// every component.
    pub fn new(lower: Vector<T>, upper: Vector<T>) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch { expected: lower.dim(), got: upper.dim() });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::InvalidConfig(
                "box bounds must satisfy lower <= upper componentwise".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    #[inline]
    pub fn lower(&self) -> &Vector<T> {
        &self.lower
    }

    #[inline]
    pub fn upper(&self) -> &Vector<T> {
        &self.upper
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    fn check(&self, p: &Vector<T>) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        Ok(())
    }

    /// Componentwise clamp, the exact projection onto a box.
    pub fn project(&self, p: &Vector<T>) -> Result<Vector<T>> {
        self.check(p)?;
        let data = p
            .iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .map(|(x, (l, u))| x.max(*l).min(*u))
            .collect();
        Vector::new(data)
    }

    pub fn distance(&self, p: &Vector<T>) -> Result<T> {
        Ok(self.project(p)?.distance(p))
    }

    pub fn contains(&self, p: &Vector<T>, tol: T) -> Result<bool> {
        assert!(tol >= T::zero(), "membership tolerance must be non-negative");
        Ok(self.distance(p)? <= tol)
    }
}

/// Closed halfspace `normal . x <= offset` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace<T> {
    normal: Vector<T>,
    offset: T,
}

impl<T: Real> Halfspace<T> {
    /// Same normalization contract as [`Slab::new`]: near-unit normals
    /// are kept bit-exact, others are rescaled along with the offset.
    pub fn new(normal: Vector<T>, offset: T) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidConfig("halfspace offset must be finite".into()));
        }
        let norm = normal.norm();
        if norm == T::zero() {
            return Err(Error::InvalidVector("halfspace normal must be nonzero"));
        }
        if (norm - T::one()).abs() <= T::unit_norm_tolerance() {
            return Ok(Self { normal, offset });
        }
        Ok(Self { normal: normal.normalized()?, offset: offset / norm })
    }

    #[inline]
    pub fn normal(&self) -> &Vector<T> {
        &self.normal
    }

    #[inline]
    pub fn offset(&self) -> T {
        self.offset
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    fn check(&self, p: &Vector<T>) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        Ok(())
    }

    pub fn distance(&self, p: &Vector<T>) -> Result<T> {
        self.check(p)?;
        Ok((self.normal.dot(p) - self.offset).max(T::zero()))
    }

    /// Points on the feasible side stay put; the rest drop perpendicularly
    /// onto the boundary hyperplane.
    pub fn project(&self, p: &Vector<T>) -> Result<Vector<T>> {
        self.check(p)?;
        let t = self.normal.dot(p);
        if t <= self.offset {
            Ok(p.clone())
        } else {
            Ok(p.add_scaled(self.offset - t, &self.normal))
        }
    }

    pub fn contains(&self, p: &Vector<T>, tol: T) -> Result<bool> {
        assert!(tol >= T::zero(), "membership tolerance must be non-negative");
        Ok(self.distance(p)? <= tol)
    }
}

/// Closed Euclidean ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball<T> {
    center: Vector<T>,
    radius: T,
}

impl<T: Real> Ball<T> {
    pub fn new(center: Vector<T>, radius: T) -> Result<Self> {
        if !radius.is_finite() || radius < T::zero() {
            return Err(Error::InvalidConfig("ball radius must be finite and non-negative".into()));
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn center(&self) -> &Vector<T> {
        &self.center
    }

    #[inline]
    pub fn radius(&self) -> T {
        self.radius
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    fn check(&self, p: &Vector<T>) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        Ok(())
    }

    pub fn distance(&self, p: &Vector<T>) -> Result<T> {
        self.check(p)?;
        Ok((p.distance(&self.center) - self.radius).max(T::zero()))
    }

    /// Interior points stay put; exterior points land on the sphere along
    /// the ray from the center.
    pub fn project(&self, p: &Vector<T>) -> Result<Vector<T>> {
        self.check(p)?;
        let d = p.distance(&self.center);
        if d <= self.radius {
            return Ok(p.clone());
        }
        let shrink = self.radius / d;
        Ok(self.center.add_scaled(shrink, &p.sub(&self.center)))
    }

    pub fn contains(&self, p: &Vector<T>, tol: T) -> Result<bool> {
        assert!(tol >= T::zero(), "membership tolerance must be non-negative");
        Ok(self.distance(p)? <= tol)
    }
}

/// Finite intersection of feasible sets.
///
/// Projection runs Dykstra's alternating scheme with the module defaults
/// ([`dykstra::DEFAULT_TOLERANCE`], [`dykstra::DEFAULT_MAX_SWEEPS`]); use
/// [`dykstra::dykstra_project`] directly to control the budget.
#[derive(Clone, Debug, PartialEq)]
pub struct Intersection<T> {
    members: Vec<FeasibleSet<T>>,
}

impl<T: Real> Intersection<T> {
    /// At least one member, all of equal dimension.
    pub fn new(members: Vec<FeasibleSet<T>>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidConfig("intersection needs at least one member".into()))?;
        let dim = first.dim();
        for m in &members {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
            }
        }
        Ok(Self { members })
    }

    #[inline]
    pub fn members(&self) -> &[FeasibleSet<T>] {
        &self.members
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Flag check only: true when some member is itself flagged empty.
    /// A `false` result does not certify that the members actually share
    /// a point; genuine disjointness surfaces as `NoConvergence` from
    /// projection.
    pub fn is_empty(&self) -> bool {
        self.members.iter().any(FeasibleSet::is_empty)
    }

    pub fn project(&self, p: &Vector<T>) -> Result<Vector<T>> {
        dykstra::dykstra_project(
            &self.members,
            p,
            T::of(dykstra::DEFAULT_TOLERANCE),
            dykstra::DEFAULT_MAX_SWEEPS,
        )
    }

    pub fn distance(&self, p: &Vector<T>) -> Result<T> {
        Ok(self.project(p)?.distance(p))
    }

    /// Membership is tested member by member: true iff every member
    /// contains `p` within `tol`. This is cheaper than the intersection
    /// distance and is the membership notion used throughout.
    pub fn contains(&self, p: &Vector<T>, tol: T) -> Result<bool> {
        for m in &self.members {
            if !m.contains(p, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Adds one more set, merging it into an existing parallel slab
    /// member when possible so repeated measurements along a fixed
    /// direction keep the member list short.
    fn absorb(&mut self, set: FeasibleSet<T>) {
        match set {
            FeasibleSet::Slab(s) => {
                for m in &mut self.members {
                    if let FeasibleSet::Slab(existing) = m {
                        if let Some(merged) = existing.merge_parallel(&s) {
                            *m = FeasibleSet::Slab(merged);
                            return;
                        }
                    }
                }
                self.members.push(FeasibleSet::Slab(s));
            }
            FeasibleSet::Intersection(inner) => {
                for m in inner.members {
                    self.absorb(m);
                }
            }
            other => self.members.push(other),
        }
    }
}

/// Any of the supported convex feasible regions.
#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet<T> {
    Slab(Slab<T>),
    Box(BoxSet<T>),
    Halfspace(Halfspace<T>),
    Ball(Ball<T>),
    Intersection(Intersection<T>),
}

impl<T: Real> FeasibleSet<T> {
    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Slab(s) => s.dim(),
            FeasibleSet::Box(b) => b.dim(),
            FeasibleSet::Halfspace(h) => h.dim(),
            FeasibleSet::Ball(b) => b.dim(),
            FeasibleSet::Intersection(i) => i.dim(),
        }
    }

    /// Flag check; see [`Intersection::is_empty`] for the caveat.
    pub fn is_empty(&self) -> bool {
        match self {
            FeasibleSet::Slab(s) => s.is_empty(),
            FeasibleSet::Intersection(i) => i.is_empty(),
            _ => false,
        }
    }

    /// Euclidean projection of `p` onto the set.
    pub fn project(&self, p: &Vector<T>) -> Result<Vector<T>> {
        match self {
            FeasibleSet::Slab(s) => s.project(p),
            FeasibleSet::Box(b) => b.project(p),
            FeasibleSet::Halfspace(h) => h.project(p),
            FeasibleSet::Ball(b) => b.project(p),
            FeasibleSet::Intersection(i) => i.project(p),
        }
    }

    /// Euclidean distance from `p` to the set (exact for the primitive
    /// shapes, Dykstra-accurate for intersections).
    pub fn distance(&self, p: &Vector<T>) -> Result<T> {
        match self {
            FeasibleSet::Slab(s) => s.distance(p),
            FeasibleSet::Box(b) => b.distance(p),
            FeasibleSet::Halfspace(h) => h.distance(p),
            FeasibleSet::Ball(b) => b.distance(p),
            FeasibleSet::Intersection(i) => i.distance(p),
        }
    }

    /// Membership within non-negative slack `tol`.
    pub fn contains(&self, p: &Vector<T>, tol: T) -> Result<bool> {
        match self {
            FeasibleSet::Slab(s) => s.contains(p, tol),
            FeasibleSet::Box(b) => b.contains(p, tol),
            FeasibleSet::Halfspace(h) => h.contains(p, tol),
            FeasibleSet::Ball(b) => b.contains(p, tol),
            FeasibleSet::Intersection(i) => i.contains(p, tol),
        }
    }

    /// Set intersection.
    ///
    /// Parallel slabs merge into a single slab (possibly flagged empty
    /// when the merged bounds cross); anything else nests into an
    /// [`Intersection`], flattening nested intersections. Errors only on
    /// mismatched dimensions.
    pub fn intersect(self, other: FeasibleSet<T>) -> Result<FeasibleSet<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        match (self, other) {
            (FeasibleSet::Slab(a), FeasibleSet::Slab(b)) => Ok(match a.merge_parallel(&b) {
                Some(merged) => FeasibleSet::Slab(merged),
                None => FeasibleSet::Intersection(Intersection {
                    members: vec![FeasibleSet::Slab(a), FeasibleSet::Slab(b)],
                }),
            }),
            (FeasibleSet::Intersection(mut i), set) => {
                i.absorb(set);
                Ok(FeasibleSet::Intersection(i))
            }
            (set, FeasibleSet::Intersection(i)) => {
                let mut base = Intersection { members: vec![set] };
                for m in i.members {
                    base.absorb(m);
                }
                Ok(FeasibleSet::Intersection(base))
            }
            (a, b) => Ok(FeasibleSet::Intersection(Intersection { members: vec![a, b] })),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vec2(x: f64, y: f64) -> Vector<f64> {
        Vector::new(vec![x, y]).unwrap()
    }

    #[test]
    fn slab_constructor_normalizes_and_rescales() {
        let s = Slab::new(vec2(3.0, 4.0), 5.0, 10.0).unwrap();
        assert_relative_eq!(s.direction()[0], 0.6);
        assert_relative_eq!(s.direction()[1], 0.8);
        assert_relative_eq!(s.lower(), 1.0);
        assert_relative_eq!(s.upper(), 2.0);
        // A point with coordinate 3x+4y = 7.5 lies in the original set;
        // it must still lie in the rescaled one.
        let p = vec2(2.5, 0.0);
        assert!(s.contains(&p, 1e-12).unwrap());
    }

    #[test]
    fn slab_keeps_unit_directions_bit_exact() {
        let d = vec2(1.0, 0.0);
        let s = Slab::new(d.clone(), 0.25, 0.75).unwrap();
        assert_eq!(s.direction(), &d);
        assert_eq!(s.lower(), 0.25);
        assert_eq!(s.upper(), 0.75);
    }

    #[test]
    fn slab_rejects_zero_direction_and_bad_bounds() {
        assert!(matches!(Slab::new(vec2(0.0, 0.0), 0.0, 1.0), Err(Error::InvalidVector(_))));
        assert!(Slab::new(vec2(1.0, 0.0), f64::NAN, 1.0).is_err());
        assert!(Slab::new(vec2(1.0, 0.0), 0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn slab_projection_clamps_along_direction() {
        let s = Slab::new(vec2(1.0, 0.0), 0.0, 1.0).unwrap();
        // Interior point is untouched, bit for bit.
        let inside = vec2(0.5, 7.0);
        assert_eq!(s.project(&inside).unwrap(), inside);
        // Exterior point moves only along the direction.
        let q = s.project(&vec2(2.0, 7.0)).unwrap();
        assert_relative_eq!(q[0], 1.0);
        assert_relative_eq!(q[1], 7.0);
    }

    #[test]
    fn slab_projection_onto_hyperplane() {
        let inv = 1.0 / 2.0f64.sqrt();
        let s = Slab::new(vec2(inv, inv), 0.0, 0.0).unwrap();
        let q = s.project(&vec2(1.0, 0.0)).unwrap();
        assert_relative_eq!(q[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(q[1], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn slab_distance_measures_overshoot() {
        let s = Slab::new(vec2(0.6, 0.8), 0.0, 1.0).unwrap();
        assert_relative_eq!(s.distance(&vec2(2.0, 1.0)).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.distance(&vec2(0.5, 0.5)).unwrap(), 0.0);
        // Distance equals the projection displacement.
        let p = vec2(-3.0, 2.0);
        let q = s.project(&p).unwrap();
        assert_relative_eq!(s.distance(&p).unwrap(), p.distance(&q), epsilon = 1e-12);
    }

    #[test]
    fn slab_membership_tolerance() {
        let s = Slab::new(vec2(1.0, 0.0), 0.0, 1.0).unwrap();
        assert!(s.contains(&vec2(1.0 + 1e-10, 0.0), 1e-9).unwrap());
        assert!(!s.contains(&vec2(1.5, 0.0), 1e-9).unwrap());
        assert!(s.contains(&vec2(1.0, 0.0), 0.0).unwrap());
    }

    #[test]
    fn empty_slab_flags_and_refuses_operations() {
        let s = Slab::new(vec2(1.0, 0.0), 1.0, 0.0).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.project(&vec2(0.0, 0.0)), Err(Error::EmptySet));
        assert_eq!(s.distance(&vec2(0.0, 0.0)), Err(Error::EmptySet));
        assert_eq!(s.contains(&vec2(0.0, 0.0), 0.0), Err(Error::EmptySet));
    }

    #[test]
    fn parallel_slabs_merge_including_flipped_axes() {
        let a = Slab::new(vec2(1.0, 0.0), 0.0, 1.0).unwrap();
        let b = Slab::new(vec2(1.0, 0.0), 0.4, 2.0).unwrap();
        let m = a.merge_parallel(&b).unwrap();
        assert_eq!((m.lower(), m.upper()), (0.4, 1.0));

        // -direction with bounds [-2, -0.4] describes the same set as b.
        let c = Slab::new(vec2(-1.0, 0.0), -2.0, -0.4).unwrap();
        let m2 = a.merge_parallel(&c).unwrap();
        assert_eq!((m2.lower(), m2.upper()), (0.4, 1.0));

        // Disjoint parallel slabs merge into the flagged empty state.
        let d = Slab::new(vec2(1.0, 0.0), 2.0, 3.0).unwrap();
        assert!(a.merge_parallel(&d).unwrap().is_empty());

        // Distinct axes do not merge.
        let e = Slab::new(vec2(0.0, 1.0), 0.0, 1.0).unwrap();
        assert!(a.merge_parallel(&e).is_none());
    }

    #[test]
    fn box_projection_and_validation() {
        let b = BoxSet::new(vec2(0.0, 0.0), vec2(1.0, 2.0)).unwrap();
        let q = b.project(&vec2(2.0, -1.0)).unwrap();
        assert_eq!(q.as_slice(), &[1.0, 0.0]);
        assert_relative_eq!(b.distance(&vec2(2.0, -1.0)).unwrap(), 2.0f64.sqrt());
        assert!(BoxSet::new(vec2(1.0, 0.0), vec2(0.0, 1.0)).is_err());
    }

    #[test]
    fn halfspace_projection() {
        let h = Halfspace::new(vec2(0.0, 2.0), 2.0).unwrap();
        assert_relative_eq!(h.offset(), 1.0);
        let inside = vec2(5.0, -3.0);
        assert_eq!(h.project(&inside).unwrap(), inside);
        let q = h.project(&vec2(5.0, 4.0)).unwrap();
        assert_relative_eq!(q[0], 5.0);
        assert_relative_eq!(q[1], 1.0);
        assert_relative_eq!(h.distance(&vec2(5.0, 4.0)).unwrap(), 3.0);
    }

    #[test]
    fn ball_projection() {
        let b = Ball::new(vec2(1.0, 1.0), 2.0).unwrap();
        let inside = vec2(0.0, 0.0);
        assert_eq!(b.project(&inside).unwrap(), inside);
        let q = b.project(&vec2(1.0, 5.0)).unwrap();
        assert_relative_eq!(q[0], 1.0);
        assert_relative_eq!(q[1], 3.0);
        assert_relative_eq!(b.distance(&vec2(1.0, 5.0)).unwrap(), 2.0);
        assert!(Ball::new(vec2(0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn dimension_mismatches_are_reported() {
        let s = Slab::new(vec2(1.0, 0.0), 0.0, 1.0).unwrap();
        let p3 = Vector::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.project(&p3), Err(Error::DimensionMismatch { expected: 2, got: 3 }));
    }

    #[test]
    fn intersect_merges_or_nests() {
        let a = FeasibleSet::Slab(Slab::new(vec2(1.0, 0.0), 0.0, 1.0).unwrap());
        let b = FeasibleSet::Slab(Slab::new(vec2(1.0, 0.0), 0.5, 2.0).unwrap());
        match a.clone().intersect(b).unwrap() {
            FeasibleSet::Slab(s) => assert_eq!((s.lower(), s.upper()), (0.5, 1.0)),
            other => panic!("expected merged slab, got {other:?}"),
        }

        let c = FeasibleSet::Slab(Slab::new(vec2(0.0, 1.0), 0.0, 1.0).unwrap());
        let nested = a.clone().intersect(c).unwrap();
        match &nested {
            FeasibleSet::Intersection(i) => assert_eq!(i.members().len(), 2),
            other => panic!("expected intersection, got {other:?}"),
        }

        // A further parallel slab folds into the matching member.
        let d = FeasibleSet::Slab(Slab::new(vec2(1.0, 0.0), 0.25, 3.0).unwrap());
        match nested.intersect(d).unwrap() {
            FeasibleSet::Intersection(i) => {
                assert_eq!(i.members().len(), 2);
                match &i.members()[0] {
                    FeasibleSet::Slab(s) => assert_eq!((s.lower(), s.upper()), (0.25, 1.0)),
                    other => panic!("expected slab member, got {other:?}"),
                }
            }
            other => panic!("expected intersection, got {other:?}"),
        }
    }

    #[test]
    fn intersection_membership_is_per_member() {
        let i = Intersection::new(vec![
            FeasibleSet::Slab(Slab::new(vec2(1.0, 0.0), 0.0, 1.0).unwrap()),
            FeasibleSet::Slab(Slab::new(vec2(0.0, 1.0), 0.0, 1.0).unwrap()),
        ])
        .unwrap();
        assert!(i.contains(&vec2(0.5, 0.5), 0.0).unwrap());
        assert!(!i.contains(&vec2(0.5, 1.5), 1e-9).unwrap());
        assert!(Intersection::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn f32_instantiation_works() {
        let d = Vector::<f32>::new(vec![3.0, 4.0]).unwrap();
        let s = Slab::new(d, 0.0, 5.0).unwrap();
        assert!((s.direction().norm() - 1.0).abs() < 1e-6);
        // Along the unit direction (0.6, 0.8) the point (6, 8) sits at 10;
        // clamping to the rescaled upper bound 1 lands on (0.6, 0.8).
        let q = s.project(&Vector::new(vec![6.0f32, 8.0]).unwrap()).unwrap();
        assert!((q[0] - 0.6).abs() < 1e-5, "{q:?}");
        assert!((q[1] - 0.8).abs() < 1e-5, "{q:?}");
    }
}
