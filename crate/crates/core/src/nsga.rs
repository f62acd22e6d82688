//! NSGA-II selection machinery, independent of what the individuals encode.
//!
//! All objectives are minimized. Ranks start at 1 for the first
//! (non-dominated) front. Crowding distance is the "density" used by the
//! crowded comparison: higher means more isolated and is preferred.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NsgaError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("objective vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("individual {label} has a non-finite objective")]
    NonFinite { label: Label },
    #[error("tournament needs at least 2 individuals, got {0}")]
    PopulationTooSmall(usize),
    #[error("individual {label} has no rank or crowding assigned")]
    Unranked { label: Label },
    #[error("environmental selection expects {expected} individuals, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
}

/// Stable identity of an individual across generations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(pub u64);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual<T = ()> {
    pub label: Label,
    pub objectives: Vec<f64>,
    pub rank: Option<usize>,
    pub crowding: Option<f64>,
    pub genome: T,
}

impl<T> Individual<T> {
    pub fn new(label: Label, objectives: Vec<f64>, genome: T) -> Self {
        Self {
            label,
            objectives,
            rank: None,
            crowding: None,
            genome,
        }
    }
}

impl Individual<()> {
    pub fn bare(label: u64, objectives: Vec<f64>) -> Self {
        Self::new(Label(label), objectives, ())
    }
}

/// Fronts `F_1, F_2, ...` as label lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<Label>>,
}

impl FrontPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.fronts.iter().map(Vec::len).collect()
    }
}

/// `a` dominates `b`: no worse in every objective, strictly better in one.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool, NsgaError> {
    if a.len() != b.len() {
        return Err(NsgaError::LengthMismatch(a.len(), b.len()));
    }
    Ok(dominates_unchecked(a, b))
}

#[inline]
fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn check_population<T>(pop: &[Individual<T>]) -> Result<(), NsgaError> {
    let first = pop.first().ok_or(NsgaError::EmptyPopulation)?;
    let m = first.objectives.len();
    for ind in pop {
        if ind.objectives.len() != m {
            return Err(NsgaError::LengthMismatch(m, ind.objectives.len()));
        }
        if ind.objectives.iter().any(|v| !v.is_finite()) {
            return Err(NsgaError::NonFinite { label: ind.label });
        }
    }
    Ok(())
}

/// Fronts as population indices, following the domination-count scheme:
/// `n_p` counts dominators of `p`, `S_p` lists what `p` dominates, fronts
/// are peeled by decrementing `n_q` for every `q ∈ S_p`.
fn front_indices<T>(pop: &[Individual<T>]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    let mut current = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if dominates_unchecked(&pop[p].objectives, &pop[q].objectives) {
                dominated[p].push(q);
            } else if dominates_unchecked(&pop[q].objectives, &pop[p].objectives) {
                count[p] += 1;
            }
        }
        if count[p] == 0 {
            current.push(p);
        }
    }
    let mut fronts = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated[p] {
                count[q] -= 1;
                if count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Sorts the population into non-dominated fronts and assigns ranks.
pub fn non_dominated_sort<T>(pop: &mut [Individual<T>]) -> Result<FrontPartition, NsgaError> {
    check_population(pop)?;
    let fronts = front_indices(pop);
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            pop[i].rank = Some(r + 1);
        }
    }
    Ok(FrontPartition {
        fronts: fronts
            .iter()
            .map(|f| f.iter().map(|&i| pop[i].label).collect())
            .collect(),
    })
}

/// Assigns crowding distance to the members of one front, given by
/// population indices.
///
/// Boundary members of every objective get `+inf`; interior members sum the
/// normalized gap between their neighbours. An objective with zero range
/// contributes nothing.
pub fn crowding_distance<T>(pop: &mut [Individual<T>], front: &[usize]) {
    let size = front.len();
    for &i in front {
        pop[i].crowding = Some(0.0);
    }
    if size <= 2 {
        for &i in front {
            pop[i].crowding = Some(f64::INFINITY);
        }
        return;
    }
    let m = pop[front[0]].objectives.len();
    let mut order = front.to_vec();
    for k in 0..m {
        order.sort_by(|&a, &b| {
            pop[a].objectives[k]
                .total_cmp(&pop[b].objectives[k])
                .then(pop[a].label.cmp(&pop[b].label))
        });
        let lo = pop[order[0]].objectives[k];
        let hi = pop[order[size - 1]].objectives[k];
        pop[order[0]].crowding = Some(f64::INFINITY);
        pop[order[size - 1]].crowding = Some(f64::INFINITY);
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for j in 1..size - 1 {
            let gap = (pop[order[j + 1]].objectives[k] - pop[order[j - 1]].objectives[k]) / range;
            let c = pop[order[j]].crowding.get_or_insert(0.0);
            *c += gap;
        }
    }
}

/// Sorts, assigns ranks and crowding to every front, and returns the fronts
/// as population indices.
pub fn rank_and_crowd<T>(pop: &mut [Individual<T>]) -> Result<Vec<Vec<usize>>, NsgaError> {
    check_population(pop)?;
    let fronts = front_indices(pop);
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            pop[i].rank = Some(r + 1);
        }
        crowding_distance(pop, front);
    }
    Ok(fronts)
}

/// Crowded comparison: lower rank wins, then higher crowding. `None` on a
/// full tie.
pub fn crowded_winner<T>(a: &Individual<T>, b: &Individual<T>) -> Result<Option<bool>, NsgaError> {
    let ra = a.rank.ok_or(NsgaError::Unranked { label: a.label })?;
    let rb = b.rank.ok_or(NsgaError::Unranked { label: b.label })?;
    let ca = a.crowding.ok_or(NsgaError::Unranked { label: a.label })?;
    let cb = b.crowding.ok_or(NsgaError::Unranked { label: b.label })?;
    Ok(match ra.cmp(&rb) {
        Ordering::Less => Some(true),
        Ordering::Greater => Some(false),
        Ordering::Equal if ca > cb => Some(true),
        Ordering::Equal if ca < cb => Some(false),
        Ordering::Equal => None,
    })
}

/// Crowded binary tournament returning population indices.
///
/// Each round shuffles the population into pairs and sends every pair's
/// winner to the pool until it holds `pool_size` entries. With an odd
/// population the unpaired individual leads the next round's pairing.
pub fn tournament_select_indices<T, R: Rng + ?Sized>(
    pop: &[Individual<T>],
    pool_size: usize,
    rng: &mut R,
) -> Result<Vec<usize>, NsgaError> {
    if pop.len() < 2 {
        return Err(NsgaError::PopulationTooSmall(pop.len()));
    }
    for ind in pop {
        crowded_winner(ind, ind)?;
    }
    let mut pool = Vec::with_capacity(pool_size);
    let mut carry: Option<usize> = None;
    while pool.len() < pool_size {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.shuffle(rng);
        if let Some(c) = carry.take() {
            let at = order
                .iter()
                .position(|&i| i == c)
                .expect("carried index present");
            order.remove(at);
            order.insert(0, c);
        }
        let mut pairs = order.chunks_exact(2);
        for pair in pairs.by_ref() {
            if pool.len() == pool_size {
                break;
            }
            let (a, b) = (pair[0], pair[1]);
            let pick = match crowded_winner(&pop[a], &pop[b])? {
                Some(true) => a,
                Some(false) => b,
                None => {
                    if rng.random::<bool>() {
                        a
                    } else {
                        b
                    }
                }
            };
            pool.push(pick);
        }
        carry = pairs.remainder().first().copied();
    }
    Ok(pool)
}

/// Crowded binary tournament returning labels of the mating pool.
pub fn tournament_select<T, R: Rng + ?Sized>(
    pop: &[Individual<T>],
    pool_size: usize,
    rng: &mut R,
) -> Result<Vec<Label>, NsgaError> {
    Ok(tournament_select_indices(pop, pool_size, rng)?
        .into_iter()
        .map(|i| pop[i].label)
        .collect())
}

/// Elitist truncation of `2n` parents plus offspring to `n` survivors.
///
/// Whole fronts are taken in rank order; the front that does not fit is cut
/// by descending crowding distance, ties broken by ascending label.
/// Survivors keep the rank and crowding computed on the combined population.
pub fn environmental_select<T>(
    mut combined: Vec<Individual<T>>,
    n: usize,
) -> Result<Vec<Individual<T>>, NsgaError> {
    if combined.len() != 2 * n {
        return Err(NsgaError::SizeMismatch {
            expected: 2 * n,
            actual: combined.len(),
        });
    }
    let fronts = rank_and_crowd(&mut combined)?;
    let mut chosen = Vec::with_capacity(n);
    for front in fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend(front);
            if chosen.len() == n {
                break;
            }
            continue;
        }
        let mut front = front;
        front.sort_by(|&a, &b| {
            let ca = combined[a].crowding.unwrap_or(0.0);
            let cb = combined[b].crowding.unwrap_or(0.0);
            cb.total_cmp(&ca)
                .then(combined[a].label.cmp(&combined[b].label))
        });
        let room = n - chosen.len();
        chosen.extend(front.into_iter().take(room));
        break;
    }
    let mut keep = vec![false; combined.len()];
    for &i in &chosen {
        keep[i] = true;
    }
    let mut slots: Vec<Option<Individual<T>>> = combined.into_iter().map(Some).collect();
    let survivors = chosen
        .iter()
        .map(|&i| slots[i].take().expect("each index chosen once"))
        .collect();
    Ok(survivors)
}
