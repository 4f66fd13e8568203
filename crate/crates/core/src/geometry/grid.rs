use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Polytope, Vector};

/// Number of points in the barycentric grid with `k` subdivisions over `m`
/// vertices, `C(k + m − 1, m − 1)`, saturating at `usize::MAX`.
pub fn grid_size(m: usize, k: usize) -> usize {
    if m == 0 {
        return 0;
    }
    let r = (m - 1).min(k);
    let n = k + m - 1;
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// All weight vectors `(c₁/k, …, c_m/k)` with nonnegative integers summing to
/// `k`, in lexicographic order of the integer compositions (first weight
/// largest first).
pub fn barycentric_grid(m: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(grid_size(m, k).min(1 << 20));
    if m == 0 {
        return out;
    }
    let k = k.max(1);
    let mut counts = vec![0usize; m];
    fill(&mut counts, 0, k, k, &mut out);
    out
}

fn fill(counts: &mut [usize], pos: usize, remaining: usize, k: usize, out: &mut Vec<Vec<f64>>) {
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        out.push(counts.iter().map(|&c| c as f64 / k as f64).collect());
        return;
    }
    for c in (0..=remaining).rev() {
        counts[pos] = c;
        fill(counts, pos + 1, remaining - c, k, out);
    }
}

/// Grid points of `p` at `k` subdivisions per edge. When the grid would exceed
/// `cap` points, the vertices plus `cap` seeded random members are returned.
pub fn polytope_grid(p: &Polytope, k: usize, cap: usize, seed: u64) -> Vec<Vector> {
    if grid_size(p.len(), k) <= cap {
        barycentric_grid(p.len(), k)
            .into_iter()
            .map(|w| p.combine(&w))
            .collect()
    } else {
        let mut sampler = Sampler::new(seed);
        let mut pts: Vec<Vector> = p.vertices().to_vec();
        pts.push(p.barycenter());
        while pts.len() < cap {
            let w = sampler.barycentric(p.len());
            pts.push(p.combine(&w));
        }
        pts
    }
}

/// Uniform random point of the standard simplex (flat Dirichlet).
pub fn random_barycentric<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// Image of `p` under the homothety centered at `center` with ratio `factor`.
/// For a member `center` and `factor ∈ (0, 1]` the result stays inside `p`.
pub fn homothety(p: &Polytope, center: &Vector, factor: f64) -> Polytope {
    p.map_vertices(|v| center.lerp(v, factor))
        .expect("homothety preserves dimension")
}

/// Deterministic seeded sampler used wherever the crate needs randomness.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn barycentric(&mut self, m: usize) -> Vec<f64> {
        random_barycentric(&mut self.rng, m)
    }

    pub fn point_in(&mut self, p: &Polytope) -> Vector {
        let w = self.barycentric(p.len());
        p.combine(&w)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_match_binomials() {
        assert_eq!(grid_size(3, 8), 45);
        assert_eq!(barycentric_grid(3, 8).len(), 45);
        assert_eq!(grid_size(5, 16), 4845);
        assert_eq!(barycentric_grid(1, 4), vec![vec![1.0]]);
        for w in barycentric_grid(4, 5) {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert_eq!(grid_size(200, 200), usize::MAX);
    }

    #[test]
    fn grid_starts_at_first_vertex() {
        let g = barycentric_grid(3, 2);
        assert_eq!(g[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(g.last().unwrap(), &vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn sampler_is_deterministic() {
        let mut a = Sampler::new(7);
        let mut b = Sampler::new(7);
        assert_eq!(a.barycentric(5), b.barycentric(5));
    }
}
