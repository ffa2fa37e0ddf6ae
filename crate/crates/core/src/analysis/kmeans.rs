use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::segmentation::Segment;

pub const MAX_ITERATIONS: usize = 300;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterResult<const D: usize> {
    /// Cluster id of each point.
    pub assignments: Vec<usize>,
    pub centroids: Vec<[f64; D]>,
    /// Per cluster, the member nearest the centroid (`None` if empty).
    pub representatives: Vec<Option<usize>>,
    /// Within-cluster sum of squares of the final assignment.
    pub inertia: f64,
    /// Inertia after each assignment step of the kept run.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn dist2<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest<const D: usize>(p: &[f64; D], centroids: &[[f64; D]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init<const D: usize>(
    points: &[[f64; D]],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; D]> {
    let mut centroids = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // guard against rounding landing on a zero-weight tail
            while d2[chosen] == 0.0 {
                chosen -= 1;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[idx];
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(dist2(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd<const D: usize>(points: &[[f64; D]], mut centroids: Vec<[f64; D]>) -> ClusterResult<D> {
    let k = centroids.len();
    let mut assignments = vec![usize::MAX; points.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        for (a, p) in assignments.iter_mut().zip(points) {
            let (j, d) = nearest(p, &centroids);
            inertia += d;
            if *a != j {
                *a = j;
                changed = true;
            }
        }
        history.push(inertia);
        if !changed || iterations >= MAX_ITERATIONS {
            break;
        }
        let mut sums = vec![[0.0; D]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for j in 0..k {
            // an emptied cluster keeps its previous centroid
            if counts[j] > 0 {
                for d in 0..D {
                    centroids[j][d] = sums[j][d] / counts[j] as f64;
                }
            }
        }
    }
    if hartigan_refine(points, &mut assignments, &mut centroids) {
        for (j, c) in centroids.iter_mut().enumerate() {
            let members: Vec<&[f64; D]> = points
                .iter()
                .zip(&assignments)
                .filter(|(_, &a)| a == j)
                .map(|(p, _)| p)
                .collect();
            if !members.is_empty() {
                for d in 0..D {
                    c[d] = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
                }
            }
        }
        let inertia: f64 = points
            .iter()
            .zip(&assignments)
            .map(|(p, &a)| dist2(p, &centroids[a]))
            .sum();
        history.push(inertia);
    }
    let inertia = *history.last().unwrap_or(&0.0);
    let mut representatives = vec![None::<(usize, f64)>; k];
    for (i, (&a, p)) in assignments.iter().zip(points).enumerate() {
        let d = dist2(p, &centroids[a]);
        if representatives[a].is_none_or(|(_, best)| d < best) {
            representatives[a] = Some((i, d));
        }
    }
    ClusterResult {
        assignments,
        centroids,
        representatives: representatives
            .into_iter()
            .map(|r| r.map(|(i, _)| i))
            .collect(),
        inertia,
        inertia_history: history,
        iterations,
    }
}

/// Single-point moves that lower the within-cluster sum of squares: moving
/// `p` from `a` to `b` pays off when `n_b/(n_b+1) |p-c_b|^2 < n_a/(n_a-1) |p-c_a|^2`.
/// Lloyd's fixed points are not always stable under such moves.
fn hartigan_refine<const D: usize>(
    points: &[[f64; D]],
    assignments: &mut [usize],
    centroids: &mut [[f64; D]],
) -> bool {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &a in assignments.iter() {
        counts[a] += 1;
    }
    let mut moved_any = false;
    for _ in 0..MAX_ITERATIONS {
        let mut moved = false;
        for (i, p) in points.iter().enumerate() {
            let a = assignments[i];
            let na = counts[a] as f64;
            if counts[a] < 2 {
                continue;
            }
            let remove_gain = na / (na - 1.0) * dist2(p, &centroids[a]);
            let mut best: Option<(usize, f64)> = None;
            for b in (0..k).filter(|&b| b != a) {
                let nb = counts[b] as f64;
                let cost = nb / (nb + 1.0) * dist2(p, &centroids[b]);
                if cost < remove_gain * (1.0 - 1e-12) && best.is_none_or(|(_, c)| cost < c) {
                    best = Some((b, cost));
                }
            }
            if let Some((b, _)) = best {
                let nb = counts[b] as f64;
                for d in 0..D {
                    centroids[a][d] = (centroids[a][d] * na - p[d]) / (na - 1.0);
                    centroids[b][d] = (centroids[b][d] * nb + p[d]) / (nb + 1.0);
                }
                counts[a] -= 1;
                counts[b] += 1;
                assignments[i] = b;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            break;
        }
    }
    moved_any
}

/// k-means with k-means++ seeding and `restarts` independent runs; the run
/// with the lowest inertia is kept (earliest on ties).
pub fn kmeans_with_restarts<const D: usize>(
    points: &[[f64; D]],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<ClusterResult<D>> {
    if k == 0 {
        return Err(Error::config("number of clusters must be at least 1"));
    }
    if restarts == 0 {
        return Err(Error::config("k-means needs at least one run"));
    }
    if points.len() < k {
        return Err(Error::config(format!(
            "cannot form {k} clusters from {} points",
            points.len()
        )));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::data("k-means input contains non-finite values"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<ClusterResult<D>> = None;
    for _ in 0..restarts {
        let run = lloyd(points, plus_plus_init(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}

pub fn kmeans<const D: usize>(
    points: &[[f64; D]],
    k: usize,
    seed: u64,
) -> Result<ClusterResult<D>> {
    kmeans_with_restarts(points, k, seed, DEFAULT_RESTARTS)
}

/// Cluster segments in the plane of two shape coefficients, e.g. `(1, 2)`
/// for slope and curvature.
pub fn kmeans_segments(
    segments: &[Segment],
    pair: (usize, usize),
    k: usize,
    seed: u64,
) -> Result<ClusterResult<2>> {
    let points = segments
        .iter()
        .map(
            |s| match (s.alpha.coefficient(pair.0), s.alpha.coefficient(pair.1)) {
                (Some(a), Some(b)) => Ok([a, b]),
                _ => Err(Error::config(format!(
                    "coefficient pair ({}, {}) exceeds degree {} of segment {}",
                    pair.0,
                    pair.1,
                    s.alpha.degree(),
                    s.index
                ))),
            },
        )
        .collect::<Result<Vec<_>>>()?;
    kmeans(&points, k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = [[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]];
        let r = kmeans(&pts, 1, 7).unwrap();
        assert_eq!(r.assignments, vec![0, 0, 0]);
        assert!((r.centroids[0][0] - 1.0).abs() < 1e-12);
        assert!((r.centroids[0][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_corners() {
        let pts = [[0.0, 0.0], [100.0, 0.0], [0.0, 100.0], [100.0, 100.0]];
        let r = kmeans(&pts, 4, 1).unwrap();
        let mut ids = r.assignments.clone();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 4);
        assert_eq!(r.inertia, 0.0);
        for (j, rep) in r.representatives.iter().enumerate() {
            assert_eq!(r.assignments[rep.unwrap()], j);
        }
    }

    #[test]
    fn errors() {
        let pts = [[0.0, 0.0]];
        assert!(matches!(kmeans(&pts, 2, 0), Err(Error::InvalidConfig(_))));
        assert!(matches!(kmeans(&pts, 0, 0), Err(Error::InvalidConfig(_))));
        assert!(matches!(
            kmeans(&[[f64::NAN, 0.0]], 1, 0),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn single_moves_escape_a_lloyd_fixed_point() {
        // {0, 1} | {2, 4} is stable under Lloyd (WCSS 2.5); {0, 1, 2} | {4} has 2.0
        let pts = [[0.0], [1.0], [2.0], [4.0]];
        let r = lloyd(&pts, vec![[0.5], [3.0]]);
        assert_eq!(r.assignments, vec![0, 0, 0, 1]);
        assert!((r.inertia - 2.0).abs() < 1e-12);
        assert!((r.inertia_history[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn duplicate_points() {
        let pts = [[1.0, 1.0]; 5];
        let r = kmeans(&pts, 3, 9).unwrap();
        assert_eq!(r.inertia, 0.0);
    }
}
