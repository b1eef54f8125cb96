//! Exhaustive Shapley computation over the full power set.

use super::{shapley_weights, Attribution, InteractionMatrix, Method};
use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::utility::{enumerate_all, Game};

/// Player limit for exhaustive computation.
pub const MAX_EXACT_PLAYERS: usize = 15;

fn guarded_table<G: Game + ?Sized>(u: &G) -> Result<Vec<f64>> {
    let d = u.players();
    if d > MAX_EXACT_PLAYERS {
        return Err(Error::GameTooLarge { d, max: MAX_EXACT_PLAYERS });
    }
    enumerate_all(u)
}

/// Shapley values by full enumeration.
pub fn exact_shapley<G: Game + ?Sized>(u: &G) -> Result<Attribution> {
    let d = u.players();
    let table = guarded_table(u)?;
    let w = shapley_weights(d);
    let mut phi = vec![0.0; d];
    for s in Coalition::all(d) {
        let base = table[s.bits() as usize];
        let weight = if s.len() < d { w[s.len()] } else { 0.0 };
        for (i, p) in phi.iter_mut().enumerate() {
            if !s.contains(i) {
                *p += weight * (table[s.with(i).bits() as usize] - base);
            }
        }
    }
    Ok(Attribution { phi, method: Method::Exact, samples: 0, seed: None })
}

/// Bivariate explanation by full enumeration.
pub fn exact_bivariate<G: Game + ?Sized>(u: &G) -> Result<InteractionMatrix> {
    exact_explanation(u).map(|(_, m)| m)
}

/// Univariate and bivariate values from a single enumeration.
///
/// The diagonal `[i][i]` is the Shapley value of `i` in the game filtered on
/// `i`, i.e. `Σ_{S ⊆ D\{i}} w(|S|) u(S ∪ {i})`.
pub fn exact_explanation<G: Game + ?Sized>(u: &G) -> Result<(Attribution, InteractionMatrix)> {
    let d = u.players();
    let table = guarded_table(u)?;
    let w = shapley_weights(d);
    let mut phi = vec![0.0; d];
    let mut m = vec![vec![0.0; d]; d];
    for s in Coalition::all(d) {
        if s.len() == d {
            continue;
        }
        let weight = w[s.len()];
        let base = table[s.bits() as usize];
        for i in (0..d).filter(|&i| !s.contains(i)) {
            let joined = table[s.with(i).bits() as usize];
            let delta = weight * (joined - base);
            phi[i] += delta;
            let row = &mut m[i];
            for j in s.members() {
                row[j] += delta;
            }
            row[i] += weight * joined;
        }
    }
    Ok((
        Attribution { phi, method: Method::Exact, samples: 0, seed: None },
        InteractionMatrix { values: m, method: Method::Exact, samples: 0, seed: None },
    ))
}
