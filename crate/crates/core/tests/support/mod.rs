//! Shared fixtures for the integration suites: oracles computed by
//! algorithms unrelated to the library's own (adaptive grid search
//! instead of Dykstra, direct elimination instead of power iteration),
//! so agreement between the two routes is evidence rather than the same
//! code checked against itself.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use setmember::geometry::{Ball, BoxSet, FeasibleSet, Halfspace, Slab, Vector};
use setmember::network::{Graph, WeightMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One random primitive set together with a probe point, both scaled to
/// stay numerically honest.
pub fn random_set(seed: u64) -> (FeasibleSet<f64>, Vector<f64>) {
    let mut r = rng(seed);
    let dim = r.gen_range(1..=4);
    let anchor = random_point(&mut r, dim, 4.0);
    let probe = random_point(&mut r, dim, 8.0);
    let set = match r.gen_range(0..4) {
        0 => {
            let dir = random_direction(&mut r, dim);
            let center = dir.dot(&anchor);
            let below = r.gen_range(0.0..=2.0);
            let above = r.gen_range(0.0..=2.0);
            FeasibleSet::Slab(Slab::new(dir, center - below, center + above).unwrap())
        }
        1 => {
            let spread: Vec<f64> = (0..dim).map(|_| r.gen_range(0.1..=3.0)).collect();
            let lo: Vec<f64> = anchor.iter().zip(&spread).map(|(a, s)| a - s).collect();
            let hi: Vec<f64> = anchor.iter().zip(&spread).map(|(a, s)| a + s).collect();
            FeasibleSet::Box(
                BoxSet::new(Vector::new(lo).unwrap(), Vector::new(hi).unwrap()).unwrap(),
            )
        }
        2 => {
            let normal = random_direction(&mut r, dim);
            let offset = normal.dot(&anchor) + r.gen_range(0.0..=2.0);
            FeasibleSet::Halfspace(Halfspace::new(normal, offset).unwrap())
        }
        _ => FeasibleSet::Ball(Ball::new(anchor, r.gen_range(0.2..=3.0)).unwrap()),
    };
    (set, probe)
}

pub fn vec2(x: f64, y: f64) -> Vector<f64> {
    Vector::from_slice(&[x, y]).unwrap()
}

/// A random planar slab-intersection instance built outward from a known
/// interior point, so the intersection is guaranteed to contain a ball
/// of radius `inner_radius` and a search oracle cannot be defeated by a
/// degenerate sliver.
pub struct SlabInstance {
    pub slabs: Vec<Slab<f64>>,
    pub interior: Vector<f64>,
    pub inner_radius: f64,
    pub point: Vector<f64>,
}

pub fn random_slab_instance(rng: &mut ChaCha8Rng) -> SlabInstance {
    let interior = vec2(rng.gen_range(-5.0..=5.0), rng.gen_range(-5.0..=5.0));
    let count = rng.gen_range(2..=3usize);
    let inner_radius = rng.gen_range(0.15..=0.5);

    // Directions kept pairwise non-parallel so the intersection is
    // bounded-ish and the instance is numerically honest.
    let mut angles: Vec<f64> = Vec::new();
    while angles.len() < count {
        let a = rng.gen_range(0.0..std::f64::consts::PI);
        if angles.iter().all(|b| {
            let d = (a - b).abs();
            d.min(std::f64::consts::PI - d) > 0.25
        }) {
            angles.push(a);
        }
    }

    let mut slabs = Vec::with_capacity(count);
    for a in angles {
        let dir = vec2(a.cos(), a.sin());
        let center = dir.dot(&interior);
        let below = rng.gen_range(inner_radius..=1.5);
        let above = rng.gen_range(inner_radius..=1.5);
        slabs.push(Slab::new(dir, center - below, center + above).unwrap());
    }

    // Points up to a few units out; some land inside (distance zero).
    let point = vec2(
        interior.as_slice()[0] + rng.gen_range(-3.0..=3.0),
        interior.as_slice()[1] + rng.gen_range(-3.0..=3.0),
    );
    SlabInstance { slabs, interior, inner_radius, point }
}

/// Distance from the instance's point to the slab intersection by
/// adaptive grid search over dyadically split cells, using nothing but
/// raw interval arithmetic on the slab coefficients.
///
/// A cell is scored by the exact distance from the point to the cell
/// rectangle. Cells certified fully inside every slab realize that score
/// and need no split; cells certified outside some slab are discarded;
/// straddling cells split until they are smaller than `floor`, and cells
/// that cannot beat the best certified score are pruned. The result is
/// an upper bound on the true distance that is tight to within a few
/// times `floor` because the intersection contains an interior ball.
pub fn grid_projection_distance(inst: &SlabInstance, floor: f64) -> f64 {
    struct Strip {
        dx: f64,
        dy: f64,
        lo: f64,
        up: f64,
    }
    let strips: Vec<Strip> = inst
        .slabs
        .iter()
        .map(|s| Strip {
            dx: s.direction().as_slice()[0],
            dy: s.direction().as_slice()[1],
            lo: s.lower(),
            up: s.upper(),
        })
        .collect();
    let (px, py) = (inst.point.as_slice()[0], inst.point.as_slice()[1]);
    let (cx, cy) = (inst.interior.as_slice()[0], inst.interior.as_slice()[1]);

    // Initial cell covers the point and the interior ball, hence the
    // global projection.
    let reach = ((px - cx).powi(2) + (py - cy).powi(2)).sqrt() + inst.inner_radius + 1.0;
    let dist_to_cell = |x0: f64, y0: f64, h: f64| -> f64 {
        let dx = (x0 - px).max(px - (x0 + h)).max(0.0);
        let dy = (y0 - py).max(py - (y0 + h)).max(0.0);
        (dx * dx + dy * dy).sqrt()
    };

    // The known interior point seeds the certified upper bound.
    let mut best = ((px - cx).powi(2) + (py - cy).powi(2)).sqrt();
    let mut stack = vec![(px - reach, py - reach, 2.0 * reach)];
    while let Some((x0, y0, h)) = stack.pop() {
        let lower = dist_to_cell(x0, y0, h);
        if lower >= best {
            continue;
        }
        let mut inside_all = true;
        let mut outside_some = false;
        for s in &strips {
            let base = s.dx * x0 + s.dy * y0;
            let span_x = s.dx * h;
            let span_y = s.dy * h;
            let mn = base + span_x.min(0.0) + span_y.min(0.0);
            let mx = base + span_x.max(0.0) + span_y.max(0.0);
            if mx < s.lo || mn > s.up {
                outside_some = true;
                break;
            }
            if mn < s.lo || mx > s.up {
                inside_all = false;
            }
        }
        if outside_some {
            continue;
        }
        if inside_all {
            best = lower;
            continue;
        }
        if h <= floor {
            continue;
        }
        let half = h / 2.0;
        stack.push((x0, y0, half));
        stack.push((x0 + half, y0, half));
        stack.push((x0, y0 + half, half));
        stack.push((x0 + half, y0 + half, half));
    }
    best
}

/// Left stationary vector of a row-stochastic matrix by Gaussian
/// elimination with partial pivoting: solve `(A' - I) v = 0` with the
/// last equation replaced by the normalization `sum v = 1`. For an
/// irreducible matrix the replaced system is nonsingular, because every
/// subset of n-1 rows of `A' - I` is linearly independent while the
/// all-ones row is not in their span.
pub fn stationary_oracle(a: &WeightMatrix<f64>) -> Vec<f64> {
    let n = a.n();
    let mut m = vec![vec![0.0f64; n + 1]; n];
    for (r, row) in m.iter_mut().enumerate().take(n - 1) {
        for (c, cell) in row.iter_mut().enumerate().take(n) {
            *cell = a.get(c, r) - if r == c { 1.0 } else { 0.0 };
        }
    }
    m[n - 1].fill(1.0);

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        assert!(m[col][col].abs() > 1e-14, "stationary system is singular");
        let (upper, below) = m.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in below {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
        }
    }
    let mut v = vec![0.0f64; n];
    for r in (0..n).rev() {
        let mut acc = m[r][n];
        for c in r + 1..n {
            acc -= m[r][c] * v[c];
        }
        v[r] = acc / m[r][r];
    }
    v
}

/// Random strongly connected digraph: a directed cycle through a random
/// node permutation plus a handful of extra random edges.
pub fn random_strong_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (perm[i], perm[(i + 1) % n])).collect();
    for _ in 0..rng.gen_range(0..=n) {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let g = Graph::from_edges(n, &edges, false).unwrap();
    assert!(g.is_strongly_connected());
    g
}

/// Random connected undirected graph: a random spanning tree plus a
/// handful of extra symmetric edges.
pub fn random_symmetric_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    for _ in 0..rng.gen_range(0..=n) {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let g = Graph::from_edges(n, &edges, true).unwrap();
    assert!(g.is_strongly_connected() && g.is_symmetric());
    g
}

/// Random unit direction in `dim` dimensions, redrawn until comfortably
/// away from zero.
pub fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vector<f64> {
    loop {
        let coords: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let v = Vector::new(coords).unwrap();
        if v.norm() > 0.3 {
            return v.normalized().unwrap();
        }
    }
}

/// Random point in the centered cube of the given half-width.
pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> Vector<f64> {
    Vector::new((0..dim).map(|_| rng.gen_range(-half_width..=half_width)).collect()).unwrap()
}
