//! Seeded random inputs for campaigns and tests.
//!
//! All generators draw from a caller-supplied ChaCha stream so that a single
//! seed reproduces an entire campaign byte for byte.
//!
//! Rectilinear polygons are built by growing a random polyomino on a 15×15
//! cell grid one cell at a time, rejecting any growth step that would create
//! a hole or let two cells touch only at a corner. The boundary of such a
//! polyomino is a single simple rectilinear cycle; collapsing straight runs
//! and scaling by 1/16 yields a valid polygon in `[0,1)²` with axis-parallel
//! edges.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expoly::{torus_dist, unit_phase};
use crate::expoly::{ExpPoly1D, ExpPoly2D, Poly1D, Poly2D, Term2D, TorusFreq};
use crate::geometry::{validate_polygon, Polygon, Vec2};
use crate::C64;

/// Deterministic stream for a campaign seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ── Rectilinear polygons ─────────────────────────────────────────────

const GRID: usize = 15; // cells; corners go up to 15, scaled by 1/16

fn cell_filled(cells: &[bool], x: i32, y: i32) -> bool {
    if !(0..GRID as i32).contains(&x) || !(0..GRID as i32).contains(&y) {
        return false;
    }
    cells[y as usize * GRID + x as usize]
}

/// Would filling `(x, y)` create a checkerboard corner contact?
fn creates_pinch(cells: &[bool], x: i32, y: i32) -> bool {
    for (dx, dy) in [(-1, -1), (-1, 1), (1, -1), (1, 1)] {
        if cell_filled(cells, x + dx, y + dy)
            && !cell_filled(cells, x + dx, y)
            && !cell_filled(cells, x, y + dy)
        {
            return true;
        }
    }
    false
}

/// Is the complement (including the outside) still 4-connected, i.e. the
/// polyomino has no holes?
fn complement_connected(cells: &[bool]) -> bool {
    // flood fill empties from a border ring around the grid
    let w = GRID + 2;
    let mut seen = vec![false; w * w];
    let mut stack = vec![(0usize, 0usize)];
    seen[0] = true;
    while let Some((x, y)) = stack.pop() {
        for (dx, dy) in [(0i32, 1i32), (0, -1), (1, 0), (-1, 0)] {
            let (nx, ny) = (x as i32 + dx, y as i32 + dy);
            if !(0..w as i32).contains(&nx) || !(0..w as i32).contains(&ny) {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if seen[ny * w + nx] {
                continue;
            }
            let filled =
                nx >= 1 && ny >= 1 && nx <= GRID && ny <= GRID && cells[(ny - 1) * GRID + (nx - 1)];
            if !filled {
                seen[ny * w + nx] = true;
                stack.push((nx, ny));
            }
        }
    }
    for y in 0..GRID {
        for x in 0..GRID {
            if !cells[y * GRID + x] && !seen[(y + 1) * w + (x + 1)] {
                return false;
            }
        }
    }
    true
}

/// Trace the boundary of the polyomino as a counterclockwise vertex cycle
/// on lattice corners, with straight runs collapsed.
fn trace_boundary(cells: &[bool]) -> Vec<(i32, i32)> {
    // directed boundary edges with the interior on the left
    let mut next: std::collections::HashMap<(i32, i32), (i32, i32)> = Default::default();
    for y in 0..GRID as i32 {
        for x in 0..GRID as i32 {
            if !cell_filled(cells, x, y) {
                continue;
            }
            if !cell_filled(cells, x, y - 1) {
                next.insert((x, y), (x + 1, y));
            }
            if !cell_filled(cells, x + 1, y) {
                next.insert((x + 1, y), (x + 1, y + 1));
            }
            if !cell_filled(cells, x, y + 1) {
                next.insert((x + 1, y + 1), (x, y + 1));
            }
            if !cell_filled(cells, x - 1, y) {
                next.insert((x, y + 1), (x, y));
            }
        }
    }
    let start = *next.keys().min().unwrap();
    let mut cycle = vec![start];
    let mut cur = next[&start];
    while cur != start {
        cycle.push(cur);
        cur = next[&cur];
    }
    // collapse straight runs
    let n = cycle.len();
    let mut out = Vec::new();
    for i in 0..n {
        let prev = cycle[(i + n - 1) % n];
        let here = cycle[i];
        let nxt = cycle[(i + 1) % n];
        let d1 = (here.0 - prev.0, here.1 - prev.1);
        let d2 = (nxt.0 - here.0, nxt.1 - here.1);
        if d1 != d2 {
            out.push(here);
        }
    }
    out
}

/// Random simply connected polyomino of `cells` cells, grown by accretion.
fn random_polyomino(rng: &mut ChaCha8Rng, target_cells: usize) -> Vec<bool> {
    let mut cells = vec![false; GRID * GRID];
    let sx = rng.random_range(3..GRID as i32 - 3);
    let sy = rng.random_range(3..GRID as i32 - 3);
    cells[sy as usize * GRID + sx as usize] = true;
    let mut count = 1;
    let mut stall = 0;
    while count < target_cells && stall < 200 {
        // pick a random filled cell, then a random empty neighbour
        let filled: Vec<(i32, i32)> = (0..GRID as i32)
            .flat_map(|y| (0..GRID as i32).map(move |x| (x, y)))
            .filter(|&(x, y)| cell_filled(&cells, x, y))
            .collect();
        let &(cx, cy) = &filled[rng.random_range(0..filled.len())];
        let (dx, dy) = [(0, 1), (0, -1), (1, 0), (-1, 0)][rng.random_range(0..4)];
        let (nx, ny) = (cx + dx, cy + dy);
        if !(0..GRID as i32).contains(&nx)
            || !(0..GRID as i32).contains(&ny)
            || cell_filled(&cells, nx, ny)
            || creates_pinch(&cells, nx, ny)
        {
            stall += 1;
            continue;
        }
        cells[ny as usize * GRID + nx as usize] = true;
        if complement_connected(&cells) {
            count += 1;
            stall = 0;
        } else {
            cells[ny as usize * GRID + nx as usize] = false;
            stall += 1;
        }
    }
    cells
}

/// Random axis-parallel polygon with at most `max_vertices` vertices.
///
/// Vertices land on multiples of 1/16 inside `[0,1)²`; retries with fewer
/// cells until the vertex budget is met.
pub fn random_rectilinear_polygon(rng: &mut ChaCha8Rng, max_vertices: usize) -> Polygon {
    assert!(
        max_vertices >= 4,
        "an axis-parallel polygon needs 4 vertices"
    );
    loop {
        // vertex count grows with cell count; keep the attempt modest
        let budget = (max_vertices / 2).max(1);
        let cells = rng.random_range(1..=budget.min(30));
        let omino = random_polyomino(rng, cells);
        let corners = trace_boundary(&omino);
        if corners.len() > max_vertices {
            continue;
        }
        let raw: Vec<Vec2> = corners
            .iter()
            .map(|&(x, y)| Vec2::new(x as f64 / 16.0, y as f64 / 16.0))
            .collect();
        match validate_polygon(&raw) {
            Ok(p) => return p,
            Err(_) => continue,
        }
    }
}

/// Random simple polygon with `n` vertices and generic slopes: sorted
/// random angles and radii around the center of the square (star-shaped,
/// so always simple), rejected and resampled if validation fails.
pub fn random_star_polygon(rng: &mut ChaCha8Rng, n: usize) -> Polygon {
    assert!(n >= 3);
    loop {
        let mut angles: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(f64::total_cmp);
        // degenerate if two angles nearly coincide
        let min_gap = angles
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if min_gap < 0.05 {
            continue;
        }
        let raw: Vec<Vec2> = angles
            .iter()
            .map(|&a| {
                let r = rng.random_range(0.12..0.45);
                Vec2::new(0.5 + r * a.cos(), 0.5 + r * a.sin())
            })
            .collect();
        if let Ok(p) = validate_polygon(&raw) {
            return p;
        }
    }
}

// ── Random exponential polynomials ───────────────────────────────────

/// Torus points that are pairwise at least `sep` apart.
fn separated_points(rng: &mut ChaCha8Rng, count: usize, sep: f64) -> Vec<f64> {
    assert!(count as f64 * sep * 2.0 < 1.0, "separation infeasible");
    'outer: loop {
        let pts: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..1.0)).collect();
        for i in 0..count {
            for j in (i + 1)..count {
                if torus_dist(pts[i], pts[j]) < sep {
                    continue 'outer;
                }
            }
        }
        return pts;
    }
}

fn unit_coeff(rng: &mut ChaCha8Rng) -> C64 {
    unit_phase(rng.random_range(0.0..1.0))
}

/// Random univariate exponential polynomial: up to `n_bound` terms with
/// frequencies separated by at least 0.05 and unit-magnitude coefficient
/// entries (the leading entry too, so degrees are exact).
pub fn random_exppoly1d(rng: &mut ChaCha8Rng, n_bound: usize, d_bound: usize) -> ExpPoly1D {
    let n = rng.random_range(1..=n_bound);
    let xs = separated_points(rng, n, 0.05);
    let terms = xs
        .into_iter()
        .map(|x| {
            let deg = rng.random_range(0..d_bound);
            let coeffs: Vec<C64> = (0..=deg).map(|_| unit_coeff(rng)).collect();
            (x, Poly1D::new(coeffs))
        })
        .collect();
    ExpPoly1D { terms }
}

/// Random bivariate exponential polynomial: up to `n_bound` terms grouped
/// over a random number of distinct x-projections (so vertical bundles with
/// multiplicities occur), separation at least 0.05 between projections and
/// between y-values above a shared projection, and dense unit-magnitude
/// coefficient grids of dimension `d_bound`.
pub fn random_exppoly2d(rng: &mut ChaCha8Rng, n_bound: usize, d_bound: usize) -> ExpPoly2D {
    let n = rng.random_range(1..=n_bound);
    let groups = rng.random_range(1..=n);
    let xs = separated_points(rng, groups, 0.05);
    // split n terms over the groups, each at least one
    let mut counts = vec![1usize; groups];
    for _ in 0..(n - groups) {
        let g = rng.random_range(0..groups);
        counts[g] += 1;
    }
    let mut terms = Vec::with_capacity(n);
    for (g, &x) in xs.iter().enumerate() {
        let ys = separated_points(rng, counts[g], 0.05);
        for y in ys {
            let mut coeff = Poly2D::zero(d_bound);
            for a in 0..d_bound {
                for b in 0..d_bound {
                    coeff.set(a, b, unit_coeff(rng));
                }
            }
            terms.push(Term2D {
                freq: TorusFreq::new(x, y),
                coeff,
            });
        }
    }
    ExpPoly2D {
        terms,
        degree_bound: d_bound,
        term_bound: n_bound,
    }
    .canonicalize(1e-9)
}
