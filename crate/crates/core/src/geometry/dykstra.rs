//! Projection onto an intersection of convex sets.
//!
//! Alternating projection with correction terms (Dykstra's scheme). Plain
//! cyclic projection converges to *some* point of the intersection; the
//! correction terms steer it to the *nearest* one, which is what descent
//! arguments about the estimators rely on.

use std::borrow::Borrow;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::sets::FeasibleSet;
use super::vector::Vector;

/// Default accuracy target for the computed projection point.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Default cap on full sweeps over the member list.
///
/// Sized for the correction drains described on [`dykstra_project`],
/// whose length grows with the distance of the probe from the
/// intersection and shrinks with the angles between the members: tens
/// of thousands of sweeps for far probes onto narrow slab crossings.
pub const DEFAULT_MAX_SWEEPS: usize = 500_000;

/// Projects `p` onto the intersection of `members`.
///
/// Each sweep projects onto every member in turn, maintaining one
/// correction vector per member. The loop ends on a sweep in which no
/// single member update moves the iterate by `tol / 10` *and* the
/// iterate sits within `tol` of every member. The stall measure is per
/// member, not the sweep's net displacement: on polyhedral members the
/// scheme moves in phases, and during a phase the sweep endpoint parks,
/// fully feasible yet off the nearest point, while the corrections
/// transfer between members by a constant amount per sweep. Every sweep
/// of such a drain makes an intra-sweep excursion the size of the
/// transfer, so the per-member measure keeps going and only accepts
/// once the corrections are consistent, which is what certifies the
/// fixed point. The budget must cover the drain: its length scales with
/// the correction magnitude over the transfer rate, tens of thousands
/// of sweeps for a far probe onto a narrow crossing. A member violated
/// by more than the tolerance moves the iterate by at least that
/// violation, so a stalled sweep really is at the fixed point. Members
/// with no common point keep the iterate bouncing between them forever
/// and exhaust the sweep budget, reported as [`Error::NoConvergence`].
///
/// An empty member list denotes the whole space, so `p` itself comes
/// back. Members flagged empty yield [`Error::EmptySet`] up front.
pub fn dykstra_project<T, S>(
    members: &[S],
    p: &Vector<T>,
    tol: T,
    max_sweeps: usize,
) -> Result<Vector<T>>
where
    T: Real,
    S: Borrow<FeasibleSet<T>>,
{
    assert!(tol > T::zero(), "projection tolerance must be positive");
    let Some(first) = members.first() else {
        return Ok(p.clone());
    };

    let dim = first.borrow().dim();
    for m in members {
        let m = m.borrow();
        if m.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
        }
        if m.is_empty() {
            return Err(Error::EmptySet);
        }
    }
    if p.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
    }

    if members.len() == 1 {
        return members[0].borrow().project(p);
    }

    let move_tol = tol / T::of(10.0);
    let mut x = p.clone();
    let mut corrections: Vec<Option<Vector<T>>> = vec![None; members.len()];

    for _ in 0..max_sweeps {
        let mut sweep_move = T::zero();
        for (m, correction) in members.iter().zip(corrections.iter_mut()) {
            let y = match correction {
                Some(e) => x.add_scaled(T::one(), e),
                None => x.clone(),
            };
            let projected = m.borrow().project(&y)?;
            *correction = Some(y.sub(&projected));
            sweep_move = sweep_move.max(projected.distance(&x));
            x = projected;
        }
        if sweep_move < move_tol {
            // The membership gate guards the stall measure: a violated
            // member forces movement, so failing it here means the
            // members are effectively disjoint and sweeping continues
            // until the budget reports that.
            let mut inside = true;
            for m in members {
                if m.borrow().distance(&x)? > tol {
                    inside = false;
                    break;
                }
            }
            if inside {
                return Ok(x);
            }
        }
    }

    Err(Error::NoConvergence { context: "Dykstra projection", limit: max_sweeps })
}

/// Distance from `p` to the intersection of `members`, via the computed
/// projection point.
pub fn distance_to_intersection<T, S>(
    members: &[S],
    p: &Vector<T>,
    tol: T,
    max_sweeps: usize,
) -> Result<T>
where
    T: Real,
    S: Borrow<FeasibleSet<T>>,
{
    Ok(dykstra_project(members, p, tol, max_sweeps)?.distance(p))
}

/// Whether `p` lies within `threshold` of the intersection.
///
/// Cheap rejection first: the intersection is no closer than any single
/// member, so one member further than `threshold` settles the question
/// without running the full scheme.
pub fn within_distance<T, S>(
    members: &[S],
    p: &Vector<T>,
    threshold: T,
    tol: T,
    max_sweeps: usize,
) -> Result<bool>
where
    T: Real,
    S: Borrow<FeasibleSet<T>>,
{
    for m in members {
        if m.borrow().distance(p)? > threshold {
            return Ok(false);
        }
    }
    Ok(distance_to_intersection(members, p, tol, max_sweeps)? <= threshold)
}
