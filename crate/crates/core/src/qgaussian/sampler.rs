//! Inverse-CDF sampling of radially symmetric q-Gaussians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::QGaussianParams;
use crate::error::Result;
use crate::numerics::par;

const KNOTS: usize = 4096;
const SHARD: usize = 4096;

// 8-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Tabulated inverse CDF of the radius `||X||` with monotone cubic
/// (Fritsch–Carlson) interpolation, plus a uniform direction.
#[derive(Clone, Debug)]
pub struct RadialSampler {
    dim: usize,
    cdf: Vec<f64>,
    radius: Vec<f64>,
    slope: Vec<f64>,
}

impl RadialSampler {
    pub fn new(params: &QGaussianParams) -> Result<Self> {
        let n = params.dim();
        let density = |r: f64| r.powi(n as i32 - 1) * params.profile(r);
        let knots: Vec<f64> = match params.support_radius() {
            Some(r) => (0..KNOTS)
                .map(|i| r * i as f64 / (KNOTS - 1) as f64)
                .collect(),
            None if params.q() == 1.0 => {
                let r_max = params.truncation_radius(1e-15)?;
                (0..KNOTS)
                    .map(|i| r_max * i as f64 / (KNOTS - 1) as f64)
                    .collect()
            }
            None => {
                // heavy tail: r = s t / (1 - t) spreads knots over decades
                let r_max = params.truncation_radius(1e-12)?;
                let s = params.gamma().powf(-1.0 / params.alpha());
                let t_max = r_max / (s + r_max);
                (0..KNOTS)
                    .map(|i| {
                        let t = t_max * i as f64 / (KNOTS - 1) as f64;
                        s * t / (1.0 - t)
                    })
                    .collect()
            }
        };
        let pieces = par::map_range(KNOTS - 1, |i| {
            let (a, b) = (knots[i], knots[i + 1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            GL_X.iter()
                .zip(GL_W)
                .map(|(x, w)| w * half * (density(mid - half * x) + density(mid + half * x)))
                .sum::<f64>()
        });
        let total: f64 = pieces.iter().sum();
        let mut cdf = Vec::with_capacity(KNOTS);
        let mut radius = Vec::with_capacity(KNOTS);
        let mut acc = 0.0;
        cdf.push(0.0);
        radius.push(0.0);
        for (i, piece) in pieces.iter().enumerate() {
            acc += piece;
            let u = (acc / total).min(1.0);
            if u > *cdf.last().unwrap() {
                cdf.push(u);
                radius.push(knots[i + 1]);
            }
        }
        *cdf.last_mut().unwrap() = 1.0;
        let slope = monotone_slopes(&cdf, &radius);
        Ok(RadialSampler {
            dim: n,
            cdf,
            radius,
            slope,
        })
    }

    /// Radius at cumulative probability `u`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = match self.cdf.partition_point(|&c| c <= u) {
            0 => 0,
            k if k >= self.cdf.len() => self.cdf.len() - 2,
            k => k - 1,
        };
        let (u0, u1) = (self.cdf[i], self.cdf[i + 1]);
        let (r0, r1) = (self.radius[i], self.radius[i + 1]);
        let h = u1 - u0;
        let t = (u - u0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * r0 + h10 * h * self.slope[i] + h01 * r1 + h11 * h * self.slope[i + 1]
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let r = self.inverse_cdf(rng.random::<f64>());
        if self.dim == 1 {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            return vec![sign * r];
        }
        loop {
            let dir: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                return dir.into_iter().map(|x| r * x / norm).collect();
            }
        }
    }

    /// `count` draws; see [`sharded_draws`].
    pub fn sample(&self, seed: u64, count: usize) -> Vec<Vec<f64>> {
        sharded_draws(seed, count, |rng| self.draw(rng))
    }
}

/// `count` values of `draw`, generated in fixed shards of 4096 with shard
/// `s` on stream `s` of the seeded generator. The result is independent of
/// the thread count.
pub fn sharded_draws<T, F>(seed: u64, count: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
{
    let shards = count.div_ceil(SHARD);
    par::map_range(shards, |s| {
        let mut rng = shard_rng(seed, s as u64);
        let len = SHARD.min(count - s * SHARD);
        (0..len).map(|_| draw(&mut rng)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Generator for shard `stream` of a seeded run.
pub fn shard_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1)
        .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 {
            0.0
        } else {
            0.5 * (d[i - 1] + d[i])
        };
    }
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / d[i];
        let b = m[i + 1] / d[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let t = 3.0 / s.sqrt();
            m[i] = t * a * d[i];
            m[i + 1] = t * b * d[i];
        }
    }
    m
}
