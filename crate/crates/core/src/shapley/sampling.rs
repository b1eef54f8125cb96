//! Permutation sampling.
//!
//! For every feature `i`, draw `M` uniform orderings; the features ahead of
//! `i` form a prefix `P` and `Δ = u(P ∪ {i}) - u(P)` is added to `phi[i]`
//! and to `m[i][j]` for every `j ∈ P`. Dividing by `M` gives unbiased
//! estimates of both the univariate and the restricted sums. Rows of the
//! matrix use independent substreams of the root seed, so the result does
//! not depend on how features are spread over threads.

use rand::seq::SliceRandom;

use super::{Attribution, InteractionMatrix, Method};
use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::utility::Game;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingOptions {
    /// Permutations per feature.
    pub samples: usize,
    pub seed: u64,
    /// Worker threads over features; `1` runs inline.
    pub threads: usize,
}

impl SamplingOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        SamplingOptions { samples, seed, threads: 1 }
    }
}

pub fn sampling_bivariate<G: Game + ?Sized>(
    u: &G,
    samples: usize,
    seed: u64,
) -> Result<(Attribution, InteractionMatrix)> {
    sampling_bivariate_with(u, &SamplingOptions::new(samples, seed))
}

struct Row {
    phi: f64,
    interactions: Vec<f64>,
}

/// One matrix row. The diagonal accumulates `u(P ∪ {i})`, the marginal of
/// `i` in the game filtered on `i` itself.
fn sample_row<G: Game + ?Sized>(u: &G, i: usize, opts: &SamplingOptions) -> Result<Row> {
    let d = u.players();
    let mut rng = substream(opts.seed, i as u64);
    let mut order: Vec<usize> = (0..d).collect();
    let mut prefixes = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        order.shuffle(&mut rng);
        let prefix = Coalition::from_indices(order.iter().copied().take_while(|&f| f != i));
        prefixes.push(prefix);
    }
    let queries: Vec<Coalition> = prefixes.iter().flat_map(|&p| [p, p.with(i)]).collect();
    let vals = u.values(&queries)?;

    let mut phi = 0.0;
    let mut row = vec![0.0; d];
    for (prefix, pair) in prefixes.iter().zip(vals.chunks_exact(2)) {
        let delta = pair[1] - pair[0];
        phi += delta;
        for j in prefix.members() {
            row[j] += delta;
        }
        row[i] += pair[1];
    }
    let n = opts.samples as f64;
    row.iter_mut().for_each(|v| *v /= n);
    Ok(Row { phi: phi / n, interactions: row })
}

pub fn sampling_bivariate_with<G: Game + ?Sized>(
    u: &G,
    opts: &SamplingOptions,
) -> Result<(Attribution, InteractionMatrix)> {
    if opts.samples == 0 {
        return Err(Error::config("sampling needs at least one permutation per feature"));
    }
    let d = u.players();
    let threads = opts.threads.clamp(1, d.max(1));
    let rows: Vec<Row> = if threads == 1 {
        (0..d).map(|i| sample_row(u, i, opts)).collect::<Result<_>>()?
    } else {
        let features: Vec<usize> = (0..d).collect();
        let per = d.div_ceil(threads);
        let chunks: Vec<Result<Vec<Row>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = features
                .chunks(per)
                .map(|chunk| scope.spawn(move || chunk.iter().map(|&i| sample_row(u, i, opts)).collect()))
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
        });
        let mut rows = Vec::with_capacity(d);
        for chunk in chunks {
            rows.extend(chunk?);
        }
        rows
    };
    let phi = rows.iter().map(|r| r.phi).collect();
    let values = rows.into_iter().map(|r| r.interactions).collect();
    Ok((
        Attribution { phi, method: Method::Sampling, samples: opts.samples, seed: Some(opts.seed) },
        InteractionMatrix { values, method: Method::Sampling, samples: opts.samples, seed: Some(opts.seed) },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapley::exact_explanation;
    use crate::utility::{make_synthetic, CoalitionGame, SyntheticFamily, SyntheticGameSpec};

    fn synthetic(d: usize, family: SyntheticFamily) -> CoalitionGame<'static> {
        make_synthetic(&SyntheticGameSpec::new(d, family)).unwrap()
    }

    #[test]
    fn constant_game_is_all_zero_off_diagonal() {
        let u = CoalitionGame::from_fn(4, |_| 3.0).unwrap();
        let (attr, m) = sampling_bivariate(&u, 50, 9).unwrap();
        assert!(attr.phi.iter().all(|&v| v == 0.0));
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(m.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn dictator_two_players() {
        let u = synthetic(2, SyntheticFamily::Dictator { player: 0 });
        let (_, m) = sampling_bivariate(&u, 5000, 17).unwrap();
        assert_eq!(m.get(1, 0), 0.0);
        assert!((m.get(0, 1) - 0.5).abs() <= 0.05);
    }

    #[test]
    fn and_all_three_players() {
        let u = synthetic(3, SyntheticFamily::AndAll);
        let (_, exact) = exact_explanation(&u).unwrap();
        let (_, m) = sampling_bivariate(&u, 10_000, 4).unwrap();
        assert!(m.max_abs_diff(&exact) <= 0.03);
    }

    #[test]
    fn parallel_matches_sequential() {
        let u = synthetic(7, SyntheticFamily::Random { seed: 3 });
        let seq = sampling_bivariate_with(&u, &SamplingOptions { samples: 300, seed: 5, threads: 1 }).unwrap();
        let par = sampling_bivariate_with(&u, &SamplingOptions { samples: 300, seed: 5, threads: 3 }).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn zero_samples_rejected() {
        let u = CoalitionGame::from_fn(2, |_| 0.0).unwrap();
        assert!(sampling_bivariate(&u, 0, 0).is_err());
    }
}
