//! Feasibility of a set of tuples when instances are shared.
//!
//! Every tuple needs one open `(model, host)` instance among its options and
//! each host holds the instances it has room for. A tuple that already sees
//! an open instance costs nothing more, so the search only ever opens an
//! instance for the uncovered tuple with the fewest remaining choices.

use std::collections::HashSet;
use std::time::Instant;

const EPS: f64 = 1e-9;
const CLOCK_EVERY: u64 = 256;

/// Outcome of a covering check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Cover {
    /// Instance keys to open.
    Yes(Vec<u32>),
    No,
    /// The deadline passed first.
    Unknown,
}

/// Static data: the instance keys each slot may use, and where each key
/// lives and what it needs.
pub(crate) struct CoverProblem {
    /// Sorted keys per slot.
    pub(crate) slot_keys: Vec<Vec<u32>>,
    pub(crate) key_host: Vec<usize>,
    pub(crate) key_demand: Vec<usize>,
    pub(crate) demands: Vec<Vec<f64>>,
    /// Free amount of each resource per host, `host * nres + r`.
    pub(crate) room: Vec<f64>,
    pub(crate) nres: usize,
}

impl CoverProblem {
    /// Finds instances covering every tuple in `slots`.
    pub(crate) fn solve(&self, slots: &[usize], deadline: Option<Instant>, nodes: &mut u64) -> Cover {
        match self.sets(slots) {
            Some(sets) => Run::new(self, &sets, deadline).search(nodes),
            None => Cover::No,
        }
    }

    /// Extends the open instances `warm` so they also cover `slots`. `No`
    /// only means no extension of `warm` works.
    pub(crate) fn extend(&self, slots: &[usize], warm: &[u32], deadline: Option<Instant>, nodes: &mut u64) -> Cover {
        let Some(sets) = self.sets(slots) else {
            return Cover::No;
        };
        let mut run = Run::new(self, &sets, deadline);
        for &k in warm {
            run.open_key(k);
        }
        match run.search(nodes) {
            Cover::Yes(keys) => Cover::Yes(warm.iter().copied().chain(keys).collect()),
            other => other,
        }
    }

    /// Distinct option sets of `slots`, dropping supersets of others, since
    /// covering a set covers all its supersets. `None` if one is empty.
    fn sets(&self, slots: &[usize]) -> Option<Vec<&[u32]>> {
        let mut sets: Vec<&[u32]> = slots.iter().map(|&s| self.slot_keys[s].as_slice()).collect();
        sets.sort_unstable();
        sets.dedup();
        if sets.iter().any(|s| s.is_empty()) {
            return None;
        }
        let keep: Vec<bool> = (0..sets.len())
            .map(|a| {
                !(0..sets.len()).any(|b| {
                    sets[b].len() < sets[a].len() && sets[b].iter().all(|k| sets[a].binary_search(k).is_ok())
                })
            })
            .collect();
        Some(sets.into_iter().zip(keep).filter_map(|(s, k)| k.then_some(s)).collect())
    }

    /// Whether all of `keys` can be open at once.
    pub(crate) fn fits_all(&self, keys: impl IntoIterator<Item = u32>) -> bool {
        let mut room = self.room.clone();
        let mut seen = HashSet::new();
        for k in keys {
            if !seen.insert(k) {
                continue;
            }
            let h = self.key_host[k as usize] * self.nres;
            let d = &self.demands[self.key_demand[k as usize]];
            for r in 0..self.nres {
                room[h + r] -= d[r];
                if room[h + r] < -EPS {
                    return false;
                }
            }
        }
        true
    }
}

/// One covering search. Keys are renumbered densely over the sets at hand.
struct Run<'a> {
    p: &'a CoverProblem,
    /// Sets as dense key ids.
    sets: Vec<Vec<usize>>,
    keys: Vec<u32>,
    /// Sets containing each dense key.
    by_key: Vec<Vec<usize>>,
    room: Vec<f64>,
    open: Vec<bool>,
    /// Dense keys opened by the search, in order.
    opened: Vec<usize>,
    covered: Vec<u32>,
    failed: HashSet<Vec<usize>>,
    deadline: Option<Instant>,
    stopped: bool,
}

impl<'a> Run<'a> {
    fn new(p: &'a CoverProblem, sets: &[&[u32]], deadline: Option<Instant>) -> Self {
        let mut keys: Vec<u32> = sets.iter().flat_map(|s| s.iter().copied()).collect();
        keys.sort_unstable();
        keys.dedup();
        let sets: Vec<Vec<usize>> = sets
            .iter()
            .map(|s| s.iter().map(|k| keys.binary_search(k).expect("key of a set")).collect())
            .collect();
        let mut by_key = vec![Vec::new(); keys.len()];
        for (j, s) in sets.iter().enumerate() {
            for &k in s {
                by_key[k].push(j);
            }
        }
        Run {
            p,
            covered: vec![0; sets.len()],
            sets,
            open: vec![false; keys.len()],
            keys,
            by_key,
            room: p.room.clone(),
            opened: Vec::new(),
            failed: HashSet::new(),
            deadline,
            stopped: false,
        }
    }

    fn charge(&mut self, key: u32, sign: f64) {
        let h = self.p.key_host[key as usize] * self.p.nres;
        let d = &self.p.demands[self.p.key_demand[key as usize]];
        for r in 0..self.p.nres {
            self.room[h + r] -= sign * d[r];
        }
    }

    /// Opens an instance key given in problem numbering; keys no set uses
    /// only take room.
    fn open_key(&mut self, key: u32) {
        match self.keys.binary_search(&key) {
            Ok(k) => self.open(k),
            Err(_) => self.charge(key, 1.0),
        }
    }

    fn fits(&self, k: usize) -> bool {
        let key = self.keys[k] as usize;
        let h = self.p.key_host[key] * self.p.nres;
        let d = &self.p.demands[self.p.key_demand[key]];
        (0..self.p.nres).all(|r| self.room[h + r] + EPS >= d[r])
    }

    fn open(&mut self, k: usize) {
        self.charge(self.keys[k], 1.0);
        self.open[k] = true;
        for &j in &self.by_key[k] {
            self.covered[j] += 1;
        }
    }

    fn close(&mut self, k: usize) {
        self.charge(self.keys[k], -1.0);
        self.open[k] = false;
        for &j in &self.by_key[k] {
            self.covered[j] -= 1;
        }
    }

    fn search(&mut self, nodes: &mut u64) -> Cover {
        if self.rec(nodes) {
            Cover::Yes(self.opened.iter().map(|&k| self.keys[k]).collect())
        } else if self.stopped {
            Cover::Unknown
        } else {
            Cover::No
        }
    }

    fn rec(&mut self, nodes: &mut u64) -> bool {
        *nodes += 1;
        if let Some(deadline) = self.deadline {
            if *nodes % CLOCK_EVERY == 0 && Instant::now() >= deadline {
                self.stopped = true;
            }
        }
        if self.stopped {
            return false;
        }
        // the uncovered set with the fewest keys that still fit
        let mut pick: Option<(usize, usize)> = None;
        for j in 0..self.sets.len() {
            if self.covered[j] > 0 {
                continue;
            }
            let n = self.sets[j].iter().filter(|&&k| self.fits(k)).count();
            if n == 0 {
                return false;
            }
            if pick.is_none_or(|(_, best)| n < best) {
                pick = Some((j, n));
            }
        }
        let Some((j, _)) = pick else {
            return true;
        };
        let state: Vec<usize> = (0..self.open.len()).filter(|&k| self.open[k]).collect();
        if self.failed.contains(&state) {
            return false;
        }

        // keys covering the most uncovered sets first
        let mut keys: Vec<(usize, usize)> = self.sets[j]
            .iter()
            .filter(|&&k| self.fits(k))
            .map(|&k| {
                let gain = self.by_key[k].iter().filter(|&&t| self.covered[t] == 0).count();
                (usize::MAX - gain, k)
            })
            .collect();
        keys.sort_unstable();
        for (_, k) in keys {
            self.open(k);
            self.opened.push(k);
            if self.rec(nodes) {
                return true;
            }
            self.opened.pop();
            self.close(k);
            if self.stopped {
                return false;
            }
        }
        self.failed.insert(state);
        false
    }
}
