//! Lloyd K-means over real vectors, applied separately to the real and
//! imaginary components of a complex dataset.
//!
//! The split form pairs the k-th real-part center with the k-th
//! imaginary-part center by index to build complex cluster centers. Lloyd
//! iterations stop when assignments are stable or after [`MAX_ITERS`]
//! rounds; an emptied cluster is re-seeded from a random data point.

use crate::complex::{shuffle_indices, squared_l2_distance, CMat, Cx};
use crate::error::{Error, Result};
use crate::rng::Prng;
use rand::Rng as _;

pub const MAX_ITERS: usize = 100;

/// Result of one real-valued K-means run.
#[derive(Debug, Clone)]
pub struct KMeans {
    /// k centers, one per row.
    pub centers: Vec<Vec<f64>>,
    /// Cluster index per data point.
    pub assignments: Vec<usize>,
    /// Mean squared distance of cluster members to their center.
    pub mean_sq_dist: Vec<f64>,
    /// Sum of squared distances of all points to their centers.
    pub inertia: f64,
    pub iterations: usize,
}

/// Split-complex clustering: real and imaginary parts clustered
/// independently, centers paired by index.
#[derive(Debug, Clone)]
pub struct SplitKMeans {
    /// k complex centers, one per row.
    pub centers: CMat,
    pub re: KMeans,
    pub im: KMeans,
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, c) in centers.iter().enumerate() {
        let d = squared_l2_distance(point, c).expect("equal dims");
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    (best, best_d)
}

/// Standard Lloyd iterations with random distinct-point seeding.
pub fn lloyd(data: &[Vec<f64>], k: usize, rng: &mut Prng) -> Result<KMeans> {
    if data.is_empty() {
        return Err(Error::Parameter("k-means needs a nonempty dataset".into()));
    }
    if k == 0 || k > data.len() {
        return Err(Error::Parameter(format!(
            "k must satisfy 1 <= k <= {} data points, got {k}",
            data.len()
        )));
    }
    let dim = data[0].len();
    if data.iter().any(|p| p.len() != dim) {
        return Err(Error::Dimension("ragged k-means dataset".into()));
    }

    let seed_idx = shuffle_indices(rng, data.len());
    let mut centers: Vec<Vec<f64>> = seed_idx[..k].iter().map(|&i| data[i].clone()).collect();
    let mut assignments = vec![usize::MAX; data.len()];
    let mut iterations = 0;

    for _ in 0..MAX_ITERS {
        iterations += 1;
        let mut changed = false;
        for (i, p) in data.iter().enumerate() {
            let (a, _) = nearest(p, &centers);
            if assignments[i] != a {
                assignments[i] = a;
                changed = true;
            }
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in data.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed an emptied cluster from a random point
                centers[c] = data[rng.gen_range(0..data.len())].clone();
                changed = true;
            } else {
                for (s, dst) in sums[c].iter().zip(centers[c].iter_mut()) {
                    *dst = s / counts[c] as f64;
                }
            }
        }

        if !changed {
            break;
        }
    }

    let mut mean_sq_dist = vec![0.0; k];
    let mut counts = vec![0usize; k];
    let mut inertia = 0.0;
    for (p, &a) in data.iter().zip(&assignments) {
        let d = squared_l2_distance(p, &centers[a])?;
        mean_sq_dist[a] += d;
        counts[a] += 1;
        inertia += d;
    }
    for c in 0..k {
        if counts[c] > 0 {
            mean_sq_dist[c] /= counts[c] as f64;
        }
    }

    Ok(KMeans {
        centers,
        assignments,
        mean_sq_dist,
        inertia,
        iterations,
    })
}

/// Cluster the real and imaginary components of `data` independently and
/// pair the resulting centers by index.
pub fn split_kmeans(data: &[Vec<Cx>], k: usize, rng: &mut Prng) -> Result<SplitKMeans> {
    let re_data: Vec<Vec<f64>> = data.iter().map(|v| v.iter().map(|z| z.re).collect()).collect();
    let im_data: Vec<Vec<f64>> = data.iter().map(|v| v.iter().map(|z| z.im).collect()).collect();
    let re = lloyd(&re_data, k, rng)?;
    let im = lloyd(&im_data, k, rng)?;
    let rows: Vec<Vec<Cx>> = (0..k)
        .map(|c| {
            re.centers[c]
                .iter()
                .zip(&im.centers[c])
                .map(|(&r, &i)| Cx::new(r, i))
                .collect()
        })
        .collect();
    Ok(SplitKMeans {
        centers: CMat::from_rows(rows)?,
        re,
        im,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let data = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, -1.0]];
        let r = lloyd(&data, 3, &mut seeded(1)).unwrap();
        assert!(r.inertia.abs() < 1e-15);
        let mut sorted = r.assignments.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn two_cluster_means_on_the_line() {
        let data = vec![vec![0.0], vec![0.1], vec![1.0], vec![1.1]];
        let r = lloyd(&data, 2, &mut seeded(2)).unwrap();
        let mut centers: Vec<f64> = r.centers.iter().map(|c| c[0]).collect();
        centers.sort_by(f64::total_cmp);
        assert!((centers[0] - 0.05).abs() < 1e-12);
        assert!((centers[1] - 1.05).abs() < 1e-12);
    }

    /// Exhaustive assignment oracle: for n <= 8 points and k = 2, enumerate
    /// every 2-coloring, place each center at its group mean, and keep the
    /// lowest total squared distance.
    fn brute_force_two_means(data: &[Vec<f64>]) -> f64 {
        let n = data.len();
        let dim = data[0].len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut sums = [vec![0.0; dim], vec![0.0; dim]];
            let mut counts = [0usize; 2];
            for (i, p) in data.iter().enumerate() {
                let g = ((mask >> i) & 1) as usize;
                counts[g] += 1;
                for (s, x) in sums[g].iter_mut().zip(p) {
                    *s += x;
                }
            }
            let centers: Vec<Vec<f64>> = (0..2)
                .map(|g| sums[g].iter().map(|s| s / counts[g] as f64).collect())
                .collect();
            let inertia: f64 = data
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let g = ((mask >> i) & 1) as usize;
                    squared_l2_distance(p, &centers[g]).unwrap()
                })
                .sum();
            best = best.min(inertia);
        }
        best
    }

    #[test]
    fn lloyd_matches_exhaustive_oracle_on_separated_data() {
        // two well-separated blobs of four 2-D points each
        let data = vec![
            vec![0.0, 0.0],
            vec![0.2, -0.1],
            vec![-0.1, 0.15],
            vec![0.05, 0.1],
            vec![5.0, 5.0],
            vec![5.2, 4.9],
            vec![4.9, 5.15],
            vec![5.05, 5.1],
        ];
        let oracle = brute_force_two_means(&data);
        let r = lloyd(&data, 2, &mut seeded(3)).unwrap();
        assert!(
            (r.inertia - oracle).abs() <= 1e-12 * oracle.max(1.0),
            "lloyd {} vs oracle {}",
            r.inertia,
            oracle
        );
    }

    #[test]
    fn k_larger_than_dataset_rejected() {
        let data = vec![vec![0.0], vec![1.0]];
        assert!(lloyd(&data, 3, &mut seeded(4)).is_err());
    }

    #[test]
    fn split_centers_pair_components_by_index() {
        let data = vec![
            vec![Cx::new(0.0, 10.0)],
            vec![Cx::new(0.1, 10.1)],
            vec![Cx::new(1.0, 20.0)],
            vec![Cx::new(1.1, 20.1)],
        ];
        let r = split_kmeans(&data, 2, &mut seeded(5)).unwrap();
        for c in 0..2 {
            let z = r.centers[(c, 0)];
            assert!((z.re - r.re.centers[c][0]).abs() < 1e-15);
            assert!((z.im - r.im.centers[c][0]).abs() < 1e-15);
        }
    }
}
