//! Coalition games over feature subsets.
//!
//! A game assigns a real utility to every subset of the `d` players. The
//! memoized [`CoalitionGame`] wraps an arbitrary [`Evaluator`] and caches
//! every value it has seen; [`Filtered`] is the presence filter that zeroes
//! the game on coalitions lacking a required group, sharing the cache of the
//! game it wraps.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::model::{argmax, mask_values, BaselineSpec, Instance, Predictor};
use crate::rng::{substream, Rng};

/// Largest game [`enumerate_all`] will tabulate.
pub const MAX_ENUMERATION_PLAYERS: usize = 20;

/// Default number of coalitions sent to an evaluator at once.
pub const DEFAULT_BATCH_SIZE: usize = 256;

/// A utility function `u: P(D) -> R`.
pub trait Game: Sync {
    fn players(&self) -> usize;

    fn value(&self, s: Coalition) -> Result<f64>;

    /// Values of many coalitions; implementations may batch the work.
    fn values(&self, coalitions: &[Coalition]) -> Result<Vec<f64>> {
        coalitions.iter().map(|&s| self.value(s)).collect()
    }
}

impl<G: Game + ?Sized> Game for &G {
    fn players(&self) -> usize {
        (**self).players()
    }
    fn value(&self, s: Coalition) -> Result<f64> {
        (**self).value(s)
    }
    fn values(&self, coalitions: &[Coalition]) -> Result<Vec<f64>> {
        (**self).values(coalitions)
    }
}

/// Computes raw utilities for a batch of coalitions.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, coalitions: &[Coalition]) -> Result<Vec<f64>>;
}

impl<F> Evaluator for F
where
    F: Fn(Coalition) -> f64 + Send + Sync,
{
    fn evaluate(&self, coalitions: &[Coalition]) -> Result<Vec<f64>> {
        Ok(coalitions.iter().map(|&s| self(s)).collect())
    }
}

/// A memoized game.
///
/// Each distinct coalition reaches the evaluator once; later queries are
/// answered from the cache with the exact stored value. Misses inside one
/// [`Game::values`] call are grouped into evaluator batches of
/// `batch_size`.
pub struct CoalitionGame<'a> {
    d: usize,
    evaluator: Box<dyn Evaluator + 'a>,
    cache: RwLock<HashMap<Coalition, f64>>,
    evaluations: AtomicUsize,
    batch_size: usize,
}

impl std::fmt::Debug for CoalitionGame<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoalitionGame").field("d", &self.d).field("evaluations", &self.eval_count()).finish()
    }
}

impl<'a> CoalitionGame<'a> {
    pub fn new(d: usize, evaluator: impl Evaluator + 'a) -> Result<Self> {
        if d > MAX_PLAYERS {
            return Err(Error::GameTooLarge { d, max: MAX_PLAYERS });
        }
        Ok(CoalitionGame {
            d,
            evaluator: Box::new(evaluator),
            cache: RwLock::new(HashMap::new()),
            evaluations: AtomicUsize::new(0),
            batch_size: DEFAULT_BATCH_SIZE,
        })
    }

    pub fn from_fn(d: usize, f: impl Fn(Coalition) -> f64 + Send + Sync + 'a) -> Result<Self> {
        CoalitionGame::new(d, f)
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    /// Number of distinct coalitions evaluated so far.
    pub fn eval_count(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    fn cached(&self, s: Coalition) -> Option<f64> {
        self.cache.read().expect("cache lock").get(&s).copied()
    }

    fn store(&self, pairs: impl IntoIterator<Item = (Coalition, f64)>) {
        let mut cache = self.cache.write().expect("cache lock");
        for (s, v) in pairs {
            if cache.insert(s, v).is_none() {
                self.evaluations.fetch_add(1, Ordering::Relaxed);
            }
        }
    }

    fn check(&self, s: Coalition) -> Result<()> {
        if !s.is_subset_of(Coalition::full(self.d)) {
            return Err(Error::config(format!("coalition {s:?} has players outside 0..{}", self.d)));
        }
        Ok(())
    }

    fn evaluate_checked(&self, batch: &[Coalition]) -> Result<Vec<f64>> {
        let vals = self.evaluator.evaluate(batch)?;
        if vals.len() != batch.len() {
            return Err(Error::config(format!(
                "evaluator returned {} values for {} coalitions",
                vals.len(),
                batch.len()
            )));
        }
        Ok(vals)
    }
}

impl Game for CoalitionGame<'_> {
    fn players(&self) -> usize {
        self.d
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        self.check(s)?;
        if let Some(v) = self.cached(s) {
            return Ok(v);
        }
        let v = self.evaluate_checked(&[s])?[0];
        self.store([(s, v)]);
        Ok(v)
    }

    fn values(&self, coalitions: &[Coalition]) -> Result<Vec<f64>> {
        coalitions.iter().try_for_each(|&s| self.check(s))?;
        let mut missing: Vec<Coalition> = {
            let cache = self.cache.read().expect("cache lock");
            coalitions.iter().copied().filter(|s| !cache.contains_key(s)).collect()
        };
        missing.sort_unstable();
        missing.dedup();
        for batch in missing.chunks(self.batch_size) {
            let vals = self.evaluate_checked(batch)?;
            self.store(batch.iter().copied().zip(vals));
        }
        let cache = self.cache.read().expect("cache lock");
        Ok(coalitions.iter().map(|s| cache[s]).collect())
    }
}

/// The restriction `u_G(S) = u(S)` if `G ⊆ S`, else `0`.
#[derive(Debug, Clone, Copy)]
pub struct Filtered<G> {
    inner: G,
    group: Coalition,
}

impl<G: Game> Filtered<G> {
    pub fn group(&self) -> Coalition {
        self.group
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }
}

impl<G: Game> Game for Filtered<G> {
    fn players(&self) -> usize {
        self.inner.players()
    }

    fn value(&self, s: Coalition) -> Result<f64> {
        if self.group.is_subset_of(s) {
            self.inner.value(s)
        } else {
            Ok(0.0)
        }
    }

    fn values(&self, coalitions: &[Coalition]) -> Result<Vec<f64>> {
        let needed: Vec<Coalition> = coalitions.iter().copied().filter(|s| self.group.is_subset_of(*s)).collect();
        let mut inner = self.inner.values(&needed)?.into_iter();
        Ok(coalitions
            .iter()
            .map(
                |s| {
                    if self.group.is_subset_of(*s) {
                        inner.next().expect("one value per needed coalition")
                    } else {
                        0.0
                    }
                },
            )
            .collect())
    }
}

/// Presence filter on one feature: `u_i(S) = u(S)` when `i ∈ S`, else `0`.
pub fn filter<G: Game>(u: G, i: usize) -> Result<Filtered<G>> {
    let d = u.players();
    if i >= d {
        return Err(Error::DimensionMismatch { expected: d, found: i + 1 });
    }
    Ok(Filtered { inner: u, group: Coalition::singleton(i) })
}

/// Presence filter on a non-empty group of features.
pub fn filter_multi<G: Game>(u: G, group: Coalition) -> Result<Filtered<G>> {
    if group.is_empty() {
        return Err(Error::config("filter group must be non-empty"));
    }
    let d = u.players();
    if !group.is_subset_of(Coalition::full(d)) {
        return Err(Error::DimensionMismatch { expected: d, found: group.members().last().unwrap_or(0) + 1 });
    }
    Ok(Filtered { inner: u, group })
}

/// Complete table of `u` over `P(D)`, indexed by coalition bits.
pub fn enumerate_all<G: Game + ?Sized>(u: &G) -> Result<Vec<f64>> {
    let d = u.players();
    if d > MAX_ENUMERATION_PLAYERS {
        return Err(Error::GameTooLarge { d, max: MAX_ENUMERATION_PLAYERS });
    }
    let all: Vec<Coalition> = Coalition::all(d).collect();
    u.values(&all)
}

/// Families in the synthetic catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SyntheticFamily {
    /// `u(S) = 1` iff `i ∈ S`.
    Dictator { player: usize },
    /// `u(S) = 1` iff `S = D`.
    AndAll,
    /// `u(S) = 1` iff `S` meets `{a, b}`.
    OrDuplicate { a: usize, b: usize },
    /// `u(S) = |S ∩ {a, b}| mod 2`.
    XorPair { a: usize, b: usize },
    /// `u(S) = Σ_{T ⊆ S} m(T)` with sparse non-negative masses `m`.
    RandomMonotone { seed: u64, density: f64 },
    /// Independent `Uniform[0, 1)` utilities per coalition.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticGameSpec {
    pub d: usize,
    #[serde(flatten)]
    pub family: SyntheticFamily,
}

impl SyntheticGameSpec {
    pub fn new(d: usize, family: SyntheticFamily) -> Self {
        SyntheticGameSpec { d, family }
    }

    fn validate(&self) -> Result<()> {
        let d = self.d;
        if d == 0 {
            return Err(Error::config("synthetic game needs at least one player"));
        }
        let in_range = |i: usize| {
            if i < d {
                Ok(())
            } else {
                Err(Error::config(format!("player {i} outside 0..{d}")))
            }
        };
        match self.family {
            SyntheticFamily::Dictator { player } => in_range(player),
            SyntheticFamily::AndAll => Ok(()),
            SyntheticFamily::OrDuplicate { a, b } | SyntheticFamily::XorPair { a, b } => {
                in_range(a)?;
                in_range(b)?;
                if a == b {
                    return Err(Error::config("pair games need two distinct players"));
                }
                Ok(())
            }
            SyntheticFamily::RandomMonotone { density, .. } => {
                if !(density > 0.0 && density <= 1.0) {
                    return Err(Error::config(format!("density must lie in (0, 1], got {density}")));
                }
                self.random_size_guard()
            }
            SyntheticFamily::Random { .. } => self.random_size_guard(),
        }
    }

    fn random_size_guard(&self) -> Result<()> {
        if self.d > MAX_ENUMERATION_PLAYERS {
            return Err(Error::GameTooLarge { d: self.d, max: MAX_ENUMERATION_PLAYERS });
        }
        Ok(())
    }
}

/// Sparse Möbius masses for a monotone game: every non-empty `T` gets a
/// mass with probability `density`, magnitude `Uniform(0, 1]`.
fn monotone_masses(d: usize, seed: u64, density: f64) -> Vec<(Coalition, f64)> {
    let mut rng = substream(seed, 0x6d6f6e6f);
    let mut masses = Vec::new();
    for t in Coalition::all(d).skip(1) {
        if rng.gen::<f64>() < density {
            masses.push((t, 1.0 - rng.gen::<f64>()));
        }
    }
    masses
}

/// Builds a game from the synthetic catalogue.
pub fn make_synthetic(spec: &SyntheticGameSpec) -> Result<CoalitionGame<'static>> {
    spec.validate()?;
    let d = spec.d;
    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    match spec.family {
        SyntheticFamily::Dictator { player } => CoalitionGame::from_fn(d, move |s| indicator(s.contains(player))),
        SyntheticFamily::AndAll => {
            let full = Coalition::full(d);
            CoalitionGame::from_fn(d, move |s| indicator(s == full))
        }
        SyntheticFamily::OrDuplicate { a, b } => {
            CoalitionGame::from_fn(d, move |s| indicator(s.contains(a) || s.contains(b)))
        }
        SyntheticFamily::XorPair { a, b } => {
            CoalitionGame::from_fn(d, move |s| indicator(s.contains(a) != s.contains(b)))
        }
        SyntheticFamily::RandomMonotone { seed, density } => {
            let masses = monotone_masses(d, seed, density);
            CoalitionGame::from_fn(d, move |s| masses.iter().filter(|(t, _)| t.is_subset_of(s)).map(|(_, m)| m).sum())
        }
        SyntheticFamily::Random { seed } => {
            let mut rng = substream(seed, 0x72616e64);
            let table: Vec<f64> = (0..1u64 << d).map(|_| rng.gen::<f64>()).collect();
            CoalitionGame::from_fn(d, move |s| table[s.bits() as usize])
        }
    }
}

/// Options for [`model_utility`].
#[derive(Debug, Clone)]
pub struct UtilityOptions {
    /// Class whose probability is the utility; defaults to the argmax at `x`.
    pub target: Option<usize>,
    /// Reference rows averaged per evaluation when the baseline is a
    /// reference set.
    pub references_per_eval: usize,
    /// Masked inputs per predictor call.
    pub batch_size: usize,
}

impl Default for UtilityOptions {
    fn default() -> Self {
        UtilityOptions { target: None, references_per_eval: 1, batch_size: DEFAULT_BATCH_SIZE }
    }
}

struct ModelEvaluator<'a, P: ?Sized> {
    predictor: &'a P,
    x: Vec<f64>,
    baselines: Vec<Vec<f64>>,
    target: usize,
    batch_size: usize,
}

impl<P: Predictor + ?Sized> Evaluator for ModelEvaluator<'_, P> {
    fn evaluate(&self, coalitions: &[Coalition]) -> Result<Vec<f64>> {
        // The full coalition needs no baseline, so u(D) is exactly f(x).
        let full = Coalition::full(self.x.len());
        let counts: Vec<usize> = coalitions.iter().map(|&s| if s == full { 1 } else { self.baselines.len() }).collect();
        let rows: Vec<Vec<f64>> = coalitions
            .iter()
            .zip(&counts)
            .flat_map(|(&s, &n)| self.baselines[..n].iter().map(move |b| mask_values(&self.x, s, b)))
            .collect();
        let mut probs = Vec::with_capacity(rows.len());
        for chunk in rows.chunks(self.batch_size) {
            probs.extend(self.predictor.predict(chunk)?.into_iter().map(|row| row[self.target]));
        }
        let mut at = 0;
        Ok(counts
            .iter()
            .map(|&n| {
                let mean = probs[at..at + n].iter().sum::<f64>() / n as f64;
                at += n;
                mean
            })
            .collect())
    }
}

/// A game backed by a predictor, remembering which class it explains.
pub struct ModelGame<'a> {
    pub game: CoalitionGame<'a>,
    pub target: usize,
}

impl Game for ModelGame<'_> {
    fn players(&self) -> usize {
        self.game.players()
    }
    fn value(&self, s: Coalition) -> Result<f64> {
        self.game.value(s)
    }
    fn values(&self, coalitions: &[Coalition]) -> Result<Vec<f64>> {
        self.game.values(coalitions)
    }
}

/// `u(S)` = probability of the target class on `x` with the features
/// outside `S` replaced by the baseline.
///
/// Reference-set baselines are drawn once from `rng` when the game is built
/// (`references_per_eval` rows, averaged), so the game is a fixed set
/// function and caching is exact.
pub fn model_utility<'a, P: Predictor + ?Sized>(
    p: &'a P,
    x: &Instance,
    baseline: &BaselineSpec,
    opts: &UtilityOptions,
    rng: &mut Rng,
) -> Result<ModelGame<'a>> {
    let d = p.dims();
    if x.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.dim() });
    }
    baseline.validate(d)?;
    let target = match opts.target {
        Some(t) if t >= p.classes() => {
            return Err(Error::config(format!("target class {t} outside 0..{}", p.classes())))
        }
        Some(t) => t,
        None => argmax(&p.predict(std::slice::from_ref(&x.values))?[0]),
    };
    let baselines = baseline.draw_many(d, opts.references_per_eval, rng)?;
    let evaluator =
        ModelEvaluator { predictor: p, x: x.values.clone(), baselines, target, batch_size: opts.batch_size.max(1) };
    let game = CoalitionGame::new(d, evaluator)?.with_batch_size(opts.batch_size);
    Ok(ModelGame { game, target })
}
