//! Depth-first branch and bound over requests.
//!
//! Requests are visited in a fixed order; at each level the search either
//! accepts the request (enumerating every distinct way to cover its tuples
//! given what is already placed) or rejects it. The state that matters for
//! the rest of the search is what is placed where, so states are memoised
//! per depth together with the best value reached there.
//!
//! With sharing enabled a second instance of the same model on the same host
//! never helps, so only `k = 1` is used. Which instances serve an accepted
//! set does not matter to later requests beyond feasibility, so the search
//! runs over request subsets and checks each with a covering search.
//!
//! Without sharing every tuple occupies its own instance. Models with equal
//! demand are interchangeable except for their per-host instance caps, so
//! the search branches on `(host, demand class)` bins and checks the caps
//! with a small matching; concrete models are chosen when a policy is
//! materialised. With a single demand class, subsets are checked by a flow.

use super::cover::{Cover, CoverProblem};
use super::flow::FlowNet;
use super::{SolveError, SolveOptions, SolveResult, SolveStats, SolveStatus};
use crate::formulation::{count_variables, AssignmentVar, Instance, OrchestrationPolicy};
use crate::ids::{ModelIx, NodeIx, RequestIx};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

const EPS: f64 = 1e-9;
const MEMO_CAP: usize = 1 << 20;
const PROBE_BUDGET: u32 = 4096;
const CLOCK_EVERY: u64 = 1024;

/// One way to serve a tuple. With sharing: a single model on a host, keyed
/// by instance. Without: every candidate model of one demand class on a
/// host, keyed by bin.
#[derive(Debug, Clone)]
struct Opt {
    host: NodeIx,
    class: usize,
    models: Vec<ModelIx>,
    /// Interned id of `models`.
    mset: u32,
    key: usize,
}

/// Solves the instance to optimality, or returns the best incumbent inside
/// [`SolveError::LimitReached`] when a limit stops the search first.
pub fn solve_exact(inst: &Instance, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    opts.validate()?;
    let start = Instant::now();
    let variables = count_variables(inst, opts.prune).x;
    if inst.num_requests() == 0 {
        return Ok(SolveResult {
            policy: OrchestrationPolicy::empty(),
            objective: 0.0,
            status: SolveStatus::InfeasibleEmpty,
            stats: SolveStats {
                variables,
                wall_time_s: start.elapsed().as_secs_f64(),
                ..SolveStats::default()
            },
        });
    }

    let mut search = Search::new(inst, opts, start);
    search.stats.variables = variables;
    search.run();

    let (active, accepted) = std::mem::take(&mut search.best);
    let policy = OrchestrationPolicy::from_assignments(active, accepted.into_iter().collect());
    let mut stats = search.stats;
    stats.wall_time_s = start.elapsed().as_secs_f64();
    let result = SolveResult {
        objective: inst.objective_value(&policy),
        policy,
        status: if search.stopped {
            SolveStatus::Feasible
        } else {
            SolveStatus::Optimal
        },
        stats,
    };
    if search.stopped {
        Err(SolveError::LimitReached(Box::new(result)))
    } else {
        Ok(result)
    }
}

/// Groups models whose demand vectors are identical.
fn demand_classes(inst: &Instance) -> (Vec<usize>, Vec<Vec<f64>>) {
    let res = inst.resource_types();
    let mut ids: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut demands = Vec::new();
    let class_of = inst
        .catalog()
        .model_indices()
        .map(|m| {
            let d: Vec<f64> = res.iter().map(|k| inst.catalog().model(m).demand.get(k)).collect();
            let bits: Vec<u64> = d.iter().map(|x| x.to_bits()).collect();
            *ids.entry(bits).or_insert_with(|| {
                demands.push(d);
                demands.len() - 1
            })
        })
        .collect();
    (class_of, demands)
}

struct Options {
    per_slot: Vec<Vec<Opt>>,

    class_demand: Vec<Vec<f64>>,
    num_keys: usize,
}

/// Per-slot options built from the `(model, host)` pairs that satisfy every
/// single-tuple constraint. The prune mode decides which pairs are examined
/// at all.
fn build_options(inst: &Instance, opts: &SolveOptions, sharing: bool) -> Options {
    let t = inst.topology();
    let (nd, nm) = (inst.num_nodes(), inst.num_models());
    let (class_of, class_demand) = demand_classes(inst);
    let ncls = class_demand.len();
    let mut msets: HashMap<Vec<ModelIx>, u32> = HashMap::new();
    let mut intern = |models: &[ModelIx]| {
        let next = msets.len() as u32;
        *msets.entry(models.to_vec()).or_insert(next)
    };

    let mut per_slot: Vec<Vec<Opt>> = Vec::with_capacity(inst.slots().len());
    for s in 0..inst.slots().len() {
        let slot = &inst.slots()[s];
        let mut pairs: Vec<(NodeIx, ModelIx)> = Vec::new();
        let mut collection: HashMap<(NodeIx, u64), Option<f64>> = HashMap::new();
        let hosts: Vec<NodeIx> = if opts.prune.ap() {
            t.reachable_from(slot.target)
        } else {
            t.indices().collect()
        };
        for m in inst.catalog().model_indices() {
            if opts.prune.fp() && !inst.offers(m, slot.func) {
                continue;
            }
            for &host in &hosts {
                // same checks as `slot_candidate_ok`, sharing collection
                // times between models with equal input sizes
                let ok = inst.offers(m, slot.func)
                    && inst.capacity(m, host) >= 1
                    && t.reachable_ix(slot.target, host)
                    && inst.slot_quality_ok(s, m, host)
                    && collection
                        .entry((host, inst.catalog().model(m).input.size_bytes))
                        .or_insert_with(|| inst.slot_collection_time(s, m, host).ok())
                        .is_some_and(|c| inst.latency_within(s, m, host, c));
                debug_assert_eq!(ok, inst.slot_candidate_ok(s, m, host));
                if ok {
                    pairs.push((host, m));
                }
            }
        }
        pairs.sort();
        let mut out = Vec::new();
        if sharing {
            for (host, m) in pairs {
                out.push(Opt {
                    host,
                    class: class_of[m.idx()],
                    models: vec![m],
                    mset: intern(&[m]),
                    key: m.idx() * nd + host.idx(),
                });
            }
        } else {
            let mut bins: BTreeMap<(NodeIx, usize), Vec<ModelIx>> = BTreeMap::new();
            for (host, m) in pairs {
                bins.entry((host, class_of[m.idx()])).or_default().push(m);
            }
            for ((host, class), models) in bins {
                out.push(Opt {
                    host,
                    class,
                    mset: intern(&models),
                    models,
                    key: host.idx() * ncls + class,
                });
            }
        }
        per_slot.push(out);
    }

    if sharing {
        // higher hosts first: an instance there can serve the most tuples
        for o in &mut per_slot {
            o.sort_by_key(|o| (t.depth(o.host), o.host, o.models[0]));
        }
    } else {
        // least contended hosts first: tuples wanting the host per unit of room
        let mut wanted = vec![0usize; nd];
        for o in &per_slot {
            let hosts: BTreeSet<usize> = o.iter().map(|o| o.host.idx()).collect();
            hosts.into_iter().for_each(|h| wanted[h] += 1);
        }
        let room: Vec<f64> = t.nodes().iter().map(|n| n.resources.total()).collect();
        let pressure = |h: NodeIx| wanted[h.idx()] as f64 / room[h.idx()].max(f64::MIN_POSITIVE);
        for o in &mut per_slot {
            o.sort_by(|a, b| {
                pressure(a.host)
                    .total_cmp(&pressure(b.host))
                    .then(a.host.cmp(&b.host))
                    .then(a.class.cmp(&b.class))
            });
        }
    }
    Options {
        per_slot,

        class_demand,
        num_keys: if sharing { nm * nd } else { nd * ncls },
    }
}

/// Hosts whose pooled free amount of one resource caps the tuples that can
/// only be served inside them.
struct Region {
    hosts: Vec<usize>,
    res: usize,
    /// Requests with tuples confined to the region and the least amount
    /// those tuples consume, best value per unit first.
    load: Vec<(RequestIx, f64)>,
}

struct Bounds {
    /// Current value plus every undecided request that fits on its own.
    plain: f64,
    /// `plain` tightened by the regional capacity losses.
    hall: f64,
    head_feasible: bool,
}

/// Multiset of `(key, mset)` pairs placed so far for one request.
type Delta = Vec<u64>;

struct Search<'a> {
    inst: &'a Instance,
    sharing: bool,
    nres: usize,
    nd: usize,
    order: Vec<RequestIx>,
    /// `suffix[p]` is the total value of `order[p..]`.
    suffix: Vec<f64>,
    opts: Vec<Vec<Opt>>,
    /// Tuples of each request, fewest options first.
    req_slots: Vec<Vec<usize>>,
    class_demand: Vec<Vec<f64>>,
    /// Least demand over each slot's options, per resource.
    need: Vec<Vec<f64>>,
    room: Vec<f64>,
    cap: Vec<u32>,
    /// Tuples per bin.
    count: Vec<u32>,
    /// Tuples placed in each bin, as `(slot, option)`.
    bins: Vec<Vec<(usize, usize)>>,
    /// Bins whose per-model caps can never bind before the host runs out of
    /// room, so only their tuple count matters.
    loose: Vec<bool>,
    open_keys: Vec<usize>,

    /// `(slot, option)` for every covered tuple on the current path.
    trail: Vec<(usize, usize)>,
    accepted: Vec<RequestIx>,
    value: f64,
    best_value: f64,
    best: (Vec<AssignmentVar>, Vec<RequestIx>),
    root_bound: f64,
    memo: HashMap<(u32, Vec<u32>), f64>,
    regions: Vec<Region>,
    integral_values: bool,

    stats: SolveStats,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    stopped: bool,
    done: bool,

    /// Without sharing and with a single demand class, a set of requests is
    /// feasible exactly when its tuples admit a flow through `(host, model)`
    /// caps and per-host instance limits, so the search runs over request
    /// subsets only.
    unit: bool,
    /// Instances of the single demand class each host can hold.
    host_limit: Vec<f64>,
    included: Vec<RequestIx>,
    /// Flow feasibility of each checked request set, keyed by sorted indices.
    flows: HashMap<Vec<u32>, bool>,

    /// Covering data with sharing.
    cover: Option<CoverProblem>,
    /// Cover found for each checked request set, keyed by sorted indices.
    covers: HashMap<Vec<u32>, Option<Vec<u32>>>,
    /// Instance keys serving `included`.
    witness: Vec<u32>,
    /// Request pairs that cannot be accepted together, whatever else is.
    conflicts: Vec<Vec<bool>>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, opts: &SolveOptions, start: Instant) -> Self {
        let (nm, nd) = (inst.num_models(), inst.num_nodes());
        let res = inst.resource_types();
        let nres = res.len();
        let sharing = opts.sharing && inst.sharing_enabled();
        let mut room = vec![0.0; nd * nres];
        for d in inst.topology().indices() {
            for (r, key) in res.iter().enumerate() {
                room[d.idx() * nres + r] = inst.topology().node(d).resources.get(key);
            }
        }
        let mut cap = vec![0; nm * nd];
        for m in inst.catalog().model_indices() {
            for d in inst.topology().indices() {
                cap[m.idx() * nd + d.idx()] = inst.capacity(m, d);
            }
        }
        let built = build_options(inst, opts, sharing);
        let need: Vec<Vec<f64>> = built
            .per_slot
            .iter()
            .map(|o| {
                (0..nres)
                    .map(|r| {
                        o.iter()
                            .map(|o| built.class_demand[o.class][r])
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect()
            })
            .collect();
        let req_slots = (0..inst.num_requests())
            .map(|r| {
                let mut v: Vec<usize> = inst.request_slots(RequestIx::new(r)).collect();
                v.sort_by_key(|&s| (built.per_slot[s].len(), s));
                v
            })
            .collect();

        let mut search = Search {
            inst,
            sharing,
            nres,
            nd,
            order: Vec::new(),
            suffix: Vec::new(),
            req_slots,
            class_demand: built.class_demand,
            need,
            room,
            cap,
            count: vec![0; built.num_keys],
            loose: Vec::new(),
            bins: if sharing {
                Vec::new()
            } else {
                vec![Vec::new(); built.num_keys]
            },
            opts: built.per_slot,
            open_keys: Vec::new(),
            trail: Vec::new(),
            accepted: Vec::new(),
            value: 0.0,
            best_value: f64::NEG_INFINITY,
            best: (Vec::new(), Vec::new()),
            root_bound: 0.0,
            memo: HashMap::new(),
            regions: Vec::new(),
            integral_values: inst
                .requests()
                .requests()
                .iter()
                .all(|r| r.value.fract() == 0.0),
            stats: SolveStats::default(),
            deadline: opts
                .time_limit_s
                .map(|t| start + Duration::from_secs_f64(t)),
            node_limit: opts.node_limit,
            stopped: false,
            done: false,
            unit: false,
            host_limit: Vec::new(),
            included: Vec::new(),
            cover: None,
            covers: HashMap::new(),
            flows: HashMap::new(),
            witness: Vec::new(),
            conflicts: Vec::new(),
        };
        search.order = search.request_order(opts.seed);
        if !search.sharing {
            search.loose = search.loose_bins();
        }
        if !search.sharing && search.class_demand.len() == 1 {
            search.unit = true;
            let demand = search.class_demand[0].clone();
            search.host_limit = (0..nd)
                .map(|h| {
                    (0..nres)
                        .filter(|&r| demand[r] > 0.0)
                        .map(|r| (search.room[h * nres + r] / demand[r] + EPS).floor())
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
        }
        if !search.sharing {
            search.regions = search.build_regions();
        } else {
            search.cover = Some(search.cover_problem());
        }
        search.suffix = vec![0.0; search.order.len() + 1];
        for p in (0..search.order.len()).rev() {
            search.suffix[p] = search.suffix[p + 1] + inst.request_value(search.order[p]);
        }
        search
    }

    fn loose_bins(&self) -> Vec<bool> {
        let (class_of, _) = demand_classes(self.inst);
        let ncls = self.class_demand.len();
        let mut loose = vec![false; self.nd * ncls];
        for h in 0..self.nd {
            for (c, demand) in self.class_demand.iter().enumerate() {
                let most = (0..self.nres)
                    .filter(|&r| demand[r] > 0.0)
                    .map(|r| (self.room[h * self.nres + r] / demand[r] + EPS).floor())
                    .fold(f64::INFINITY, f64::min);
                loose[h * ncls + c] = most.is_finite()
                    && (0..class_of.len())
                        .filter(|&m| class_of[m] == c)
                        .all(|m| self.cap[m * self.nd + h] as f64 >= most);
            }
        }
        loose
    }

    /// Highest value first, then the most constrained request (fewest
    /// options on its tightest tuple), then index or seeded rank.
    fn request_order(&self, seed: u64) -> Vec<RequestIx> {
        let n = self.inst.num_requests();
        let mut rank: Vec<usize> = (0..n).collect();
        if seed != 0 {
            rank.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let mut order: Vec<RequestIx> = (0..n).map(RequestIx::new).collect();
        let tightness = |r: RequestIx| {
            self.inst
                .request_slots(r)
                .map(|s| self.opts[s].len())
                .min()
                .unwrap_or(usize::MAX)
        };
        order.sort_by(|&a, &b| {
            let (va, vb) = (self.inst.request_value(a), self.inst.request_value(b));
            vb.total_cmp(&va)
                .then(tightness(a).cmp(&tightness(b)))
                .then(rank[a.idx()].cmp(&rank[b.idx()]))
        });
        order
    }

    fn run(&mut self) {
        if self.unit || self.sharing {
            if self.sharing {
                self.find_conflicts();
            }
            self.root_bound = self.subset_bound(0).hall;
            self.subset_node(0);
        } else {
            self.root_bound = self.bound_at(0).hall;
            self.node(0);
        }
    }

    fn slot_hosts(&self, s: usize) -> Vec<usize> {
        let hosts: BTreeSet<usize> = self.opts[s].iter().map(|o| o.host.idx()).collect();
        hosts.into_iter().collect()
    }

    /// Regions for the capacity bound: every distinct candidate-host set and
    /// every subtree, once per resource type.
    fn build_regions(&self) -> Vec<Region> {
        let t = self.inst.topology();
        let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in 0..self.opts.len() {
            if !self.opts[s].is_empty() {
                sets.insert(self.slot_hosts(s));
            }
        }
        for d in t.indices() {
            let mut hosts: Vec<usize> = t.descendants(d).iter().map(|x| x.idx()).collect();
            hosts.push(d.idx());
            hosts.sort_unstable();
            sets.insert(hosts);
        }
        let mut regions = Vec::new();
        for hosts in sets {
            for res in 0..self.nres {
                let mut load = Vec::new();
                for q in 0..self.inst.num_requests() {
                    let w: f64 = self.req_slots[q]
                        .iter()
                        .filter(|&&s| {
                            !self.opts[s].is_empty()
                                && self.opts[s].iter().all(|o| hosts.binary_search(&o.host.idx()).is_ok())
                        })
                        .map(|&s| self.need[s][res])
                        .sum();
                    if w > EPS {
                        load.push((RequestIx::new(q), w));
                    }
                }
                if load.is_empty() {
                    continue;
                }
                self.sort_by_ratio(&mut load);
                regions.push(Region {
                    hosts: hosts.clone(),
                    res,
                    load,
                });
            }
        }
        regions
    }

    fn sort_by_ratio(&self, load: &mut [(RequestIx, f64)]) {
        load.sort_by(|a, b| {
            let ra = self.inst.request_value(a.0) / a.1;
            let rb = self.inst.request_value(b.0) / b.1;
            rb.total_cmp(&ra).then(a.0.cmp(&b.0))
        });
    }

    /// Upper bounds on the objective reachable from the current state with
    /// `order[pos..]` undecided.
    fn bound_at(&mut self, pos: usize) -> Bounds {
        let mut live = vec![false; self.inst.num_requests()];
        let mut plain = self.value;
        let mut head_feasible = false;
        for j in pos..self.order.len() {
            let q = self.order[j];
            if self.alone_feasible(q) {
                live[q.idx()] = true;
                plain += self.inst.request_value(q);
                head_feasible |= j == pos;
            }
        }

        // Without sharing every tuple holds its own instance, so the tuples
        // confined to a region must fit in the region's free resources.
        // Losses of regions touching disjoint request sets add up.
        let mut losses: Vec<(f64, Vec<RequestIx>)> = Vec::new();
        for region in &self.regions {
            let free: f64 = region
                .hosts
                .iter()
                .map(|&h| self.room[h * self.nres + region.res])
                .sum();
            let load: Vec<(RequestIx, f64)> = region
                .load
                .iter()
                .filter(|(q, _)| live[q.idx()])
                .copied()
                .collect();
            if let Some(loss) = self.region_loss(&load, free) {
                losses.push(loss);
            }
        }
        for res in 0..self.nres {
            if let Some(loss) = self.deficient_region_loss(&live, res) {
                losses.push(loss);
            }
        }
        losses.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut used = vec![false; self.inst.num_requests()];
        let mut hall = plain;
        for (loss, touching) in losses {
            if touching.iter().all(|q| !used[q.idx()]) {
                hall -= loss;
                touching.iter().for_each(|q| used[q.idx()] = true);
            }
        }
        Bounds {
            plain,
            hall,
            head_feasible,
        }
    }

    /// Value that must be given up among `load` (requests and the amount
    /// their confined tuples consume, best value per unit first) when only
    /// `free` is available. `None` when everything fits.
    fn region_loss(&self, load: &[(RequestIx, f64)], free: f64) -> Option<(f64, Vec<RequestIx>)> {
        let total_w: f64 = load.iter().map(|&(_, w)| w).sum();
        if total_w <= free + EPS {
            return None;
        }
        let (mut cap, mut knap, mut total_v) = (free.max(0.0), 0.0, 0.0);
        for &(q, w) in load {
            let v = self.inst.request_value(q);
            total_v += v;
            if cap + EPS >= w {
                knap += v;
                cap -= w;
            } else if cap > 0.0 {
                knap += v * cap / w;
                cap = 0.0;
            }
        }
        if self.integral_values {
            knap = (knap + EPS).floor();
        }
        (total_v - knap > EPS).then(|| (total_v - knap, load.iter().map(|&(q, _)| q).collect()))
    }

    /// Loss on the most overloaded host set for resource `res`, found as the
    /// source side of a minimum cut between the live tuples and the hosts.
    fn deficient_region_loss(&self, live: &[bool], res: usize) -> Option<(f64, Vec<RequestIx>)> {
        let slots: Vec<usize> = (0..self.inst.num_requests())
            .filter(|&q| live[q])
            .flat_map(|q| self.req_slots[q].iter().copied())
            .filter(|&s| self.need[s][res] > EPS)
            .collect();
        if slots.is_empty() {
            return None;
        }
        let nd = self.nd;
        let (src, host0) = (0, 1 + slots.len());
        let sink = host0 + nd;
        let mut g = FlowNet::new(sink + 1);
        let mut used_host = vec![false; nd];
        let mut total_w = 0.0;
        for (j, &s) in slots.iter().enumerate() {
            let w = self.need[s][res];
            total_w += w;
            g.add_edge(src, 1 + j, w);
            for h in self.slot_hosts(s) {
                g.add_edge(1 + j, host0 + h, f64::INFINITY);
                used_host[h] = true;
            }
        }
        for h in (0..nd).filter(|&h| used_host[h]) {
            g.add_edge(host0 + h, sink, self.room[h * self.nres + res].max(0.0));
        }
        if g.max_flow(src, sink) >= total_w - EPS {
            return None;
        }
        let side = g.residual_reachable(src);
        let in_region = |h: usize| side[host0 + h];
        let free: f64 = (0..nd)
            .filter(|&h| in_region(h))
            .map(|h| self.room[h * self.nres + res])
            .sum();
        let mut load: Vec<(RequestIx, f64)> = Vec::new();
        for q in (0..self.inst.num_requests()).filter(|&q| live[q]) {
            let w: f64 = self.req_slots[q]
                .iter()
                .filter(|&&s| self.opts[s].iter().all(|o| in_region(o.host.idx())))
                .map(|&s| self.need[s][res])
                .sum();
            if w > EPS {
                load.push((RequestIx::new(q), w));
            }
        }
        self.sort_by_ratio(&mut load);
        self.region_loss(&load, free)
    }

    /// Assigns every tuple of a bin one of its candidate models without
    /// exceeding any per-model cap on the bin's host.
    fn match_models(&self, host: usize, items: &[(usize, usize)]) -> Option<Vec<ModelIx>> {
        let nm = self.inst.num_models();
        let mut assigned: Vec<Option<ModelIx>> = vec![None; items.len()];
        let mut load = vec![0u32; nm];
        for x in 0..items.len() {
            let mut visited = vec![false; nm];
            if !self.augment(x, host, items, &mut assigned, &mut load, &mut visited) {
                return None;
            }
        }
        Some(assigned.into_iter().map(|m| m.expect("matched")).collect())
    }

    fn augment(
        &self,
        x: usize,
        host: usize,
        items: &[(usize, usize)],
        assigned: &mut [Option<ModelIx>],
        load: &mut [u32],
        visited: &mut [bool],
    ) -> bool {
        let (s, i) = items[x];
        for &m in &self.opts[s][i].models {
            if visited[m.idx()] {
                continue;
            }
            visited[m.idx()] = true;
            if load[m.idx()] < self.cap[m.idx() * self.nd + host] {
                load[m.idx()] += 1;
                assigned[x] = Some(m);
                return true;
            }
            for y in 0..items.len() {
                if assigned[y] == Some(m) && self.augment(y, host, items, assigned, load, visited) {
                    // y moved to another model and x takes its place on m
                    assigned[x] = Some(m);
                    return true;
                }
            }
        }
        false
    }

    fn fits(&self, s: usize, i: usize) -> bool {
        let o = &self.opts[s][i];
        let h = o.host.idx() * self.nres;
        let demand = &self.class_demand[o.class];
        if !(0..self.nres).all(|r| self.room[h + r] + EPS >= demand[r]) {
            return false;
        }
        if self.loose[o.key] {
            return true;
        }
        let bin = &self.bins[o.key];
        let n = bin.len() as u32 + 1;
        let roomy = |m: &ModelIx| self.cap[m.idx() * self.nd + o.host.idx()] >= n;
        if o.models.iter().all(roomy) && bin.iter().all(|&(t, j)| self.opts[t][j].models.iter().all(roomy)) {
            return true;
        }
        let mut items = bin.clone();
        items.push((s, i));
        self.match_models(o.host.idx(), &items).is_some()
    }

    fn open(&mut self, s: usize, i: usize) {
        let (host, class, key) = {
            let o = &self.opts[s][i];
            (o.host.idx(), o.class, o.key)
        };
        for r in 0..self.nres {
            self.room[host * self.nres + r] -= self.class_demand[class][r];
        }
        self.count[key] += 1;
        if self.count[key] == 1 {
            self.open_keys.push(key);
        }
        self.bins[key].push((s, i));
    }

    fn close(&mut self, s: usize, i: usize) {
        let (host, class, key) = {
            let o = &self.opts[s][i];
            (o.host.idx(), o.class, o.key)
        };
        for r in 0..self.nres {
            self.room[host * self.nres + r] += self.class_demand[class][r];
        }
        self.count[key] -= 1;
        if self.count[key] == 0 {
            let pos = self.open_keys.iter().position(|&k| k == key).expect("open key");
            self.open_keys.swap_remove(pos);
        }
        let popped = self.bins[key].pop();
        debug_assert_eq!(popped, Some((s, i)));
    }

    fn delta_key(&self, s: usize, i: usize) -> u64 {
        let o = &self.opts[s][i];
        ((o.key as u64) << 32) | o.mset as u64
    }

    /// Concrete assignment variables for the current trail.
    fn materialize(&self) -> Vec<AssignmentVar> {
        let var = |s: usize, model: ModelIx, k: u32, host: NodeIx| {
            let slot = &self.inst.slots()[s];
            AssignmentVar {
                request: slot.request,
                func: slot.func,
                target: slot.target,
                model,
                k,
                host,
            }
        };
        let mut by_bin: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for &(s, i) in &self.trail {
            by_bin.entry(self.opts[s][i].key).or_default().push((s, i));
        }
        let mut next_k: HashMap<(ModelIx, NodeIx), u32> = HashMap::new();
        let mut out = Vec::with_capacity(self.trail.len());
        for items in by_bin.values() {
            let host = self.opts[items[0].0][items[0].1].host;
            let models = self
                .match_models(host.idx(), items)
                .expect("bins on the trail always admit a matching");
            for (&(s, _), m) in items.iter().zip(models) {
                let k = next_k.entry((m, host)).or_insert(0);
                *k += 1;
                out.push(var(s, m, *k, host));
            }
        }
        out
    }

    /// Whether `r` could be accepted on top of the current state. Gives up
    /// and answers `true` once the probe budget is spent, which keeps the
    /// bound valid.
    fn alone_feasible(&mut self, r: RequestIx) -> bool {
        let slots = std::mem::take(&mut self.req_slots[r.idx()]);
        let ok = slots.iter().all(|&s| !self.opts[s].is_empty()) && {
            let mut budget = PROBE_BUDGET;
            let mut failed = HashSet::new();
            self.probe(&slots, 0, &mut Vec::new(), &mut failed, &mut budget)
        };
        self.req_slots[r.idx()] = slots;
        ok
    }

    fn probe(
        &mut self,
        slots: &[usize],
        j: usize,
        delta: &mut Delta,
        failed: &mut HashSet<(usize, Delta)>,
        budget: &mut u32,
    ) -> bool {
        if j == slots.len() || *budget == 0 {
            return true;
        }
        *budget -= 1;
        let s = slots[j];
        let mut key = delta.clone();
        key.sort_unstable();
        if failed.contains(&(j, key.clone())) {
            return false;
        }
        for i in 0..self.opts[s].len() {
            if !self.fits(s, i) {
                continue;
            }
            self.open(s, i);
            delta.push(self.delta_key(s, i));
            let ok = self.probe(slots, j + 1, delta, failed, budget);
            delta.pop();
            self.close(s, i);
            if ok {
                return true;
            }
        }
        failed.insert((j, key));
        false
    }

    fn signature(&self, pos: usize) -> (u32, Vec<u32>) {
        let mut keys = self.open_keys.clone();
        keys.sort_unstable();
        let mut sig = Vec::with_capacity(keys.len() * 3);
        for k in keys {
            sig.push(k as u32);
            if self.loose[k] {
                sig.push(self.count[k]);
            } else {
                let mut msets: Vec<u32> = self.bins[k]
                    .iter()
                    .map(|&(s, i)| self.opts[s][i].mset)
                    .collect();
                msets.sort_unstable();
                sig.push(msets.len() as u32);
                sig.extend(msets);
            }
        }
        (pos as u32, sig)
    }

    fn tick(&mut self) -> bool {
        self.stats.explored_nodes += 1;
        if self.node_limit.is_some_and(|l| self.stats.explored_nodes > l) {
            self.stopped = true;
        }
        if let Some(deadline) = self.deadline {
            if self.stats.explored_nodes % CLOCK_EVERY == 0 && Instant::now() >= deadline {
                self.stopped = true;
            }
        }
        !self.stopped
    }

    fn node(&mut self, pos: usize) {
        if self.stopped || self.done {
            return;
        }
        if self.value > self.best_value + EPS {
            self.best_value = self.value;
            self.best = (self.materialize(), self.accepted.clone());
        }
        if !self.tick() || pos == self.order.len() {
            return;
        }
        if self.best_value >= self.root_bound - EPS {
            self.done = true;
            return;
        }
        if self.value + self.suffix[pos] <= self.best_value + EPS {
            self.stats.pruned_by_bound += 1;
            return;
        }
        let sig = self.signature(pos);
        let memo_full = self.memo.len() >= MEMO_CAP;
        match self.memo.get_mut(&sig) {
            Some(seen) if *seen >= self.value - EPS => {
                self.stats.pruned_by_dominance += 1;
                return;
            }
            Some(seen) => *seen = self.value,
            None if !memo_full => {
                self.memo.insert(sig, self.value);
            }
            None => {}
        }

        let b = self.bound_at(pos);
        if b.hall <= self.best_value + EPS {
            self.stats.pruned_by_bound += 1;
            return;
        }

        let r = self.order[pos];
        let v = self.inst.request_value(r);
        if b.head_feasible {
            let mut seen = HashSet::new();
            self.place(pos, 0, &mut Vec::new(), &mut seen);
            if self.stopped || self.done {
                return;
            }
        }
        // the regional losses may hinge on the head request, so only the
        // plain bound is valid once it is rejected
        let reject_bound = if b.head_feasible { b.plain - v } else { b.plain };
        if reject_bound > self.best_value + EPS {
            self.node(pos + 1);
        } else {
            self.stats.pruned_by_bound += 1;
        }
    }

    /// Covers the tuples `req_slots[r][j..]` of the request `r = order[pos]`,
    /// then descends. `delta` lists what was placed for this request so far;
    /// partial placements with the same multiset are explored once.
    fn place(&mut self, pos: usize, j: usize, delta: &mut Delta, seen: &mut HashSet<(usize, Delta)>) {
        if self.stopped || self.done {
            return;
        }
        let mut key = delta.clone();
        key.sort_unstable();
        if !seen.insert((j, key)) {
            return;
        }
        let r = self.order[pos];
        let v = self.inst.request_value(r);
        if self.value + v + self.suffix[pos + 1] <= self.best_value + EPS {
            self.stats.pruned_by_bound += 1;
            return;
        }
        if j == self.req_slots[r.idx()].len() {
            self.accepted.push(r);
            self.value += v;
            self.node(pos + 1);
            self.value -= v;
            self.accepted.pop();
            return;
        }
        if !self.tick() {
            return;
        }

        let s = self.req_slots[r.idx()][j];
        for i in 0..self.opts[s].len() {
            if !self.fits(s, i) {
                continue;
            }
            self.open(s, i);
            delta.push(self.delta_key(s, i));
            self.trail.push((s, i));
            self.place(pos, j + 1, delta, seen);
            self.trail.pop();
            delta.pop();
            self.close(s, i);
            if self.stopped || self.done {
                return;
            }
        }
    }
}

/// Request subset search: sharing, or a single demand class without it.
impl Search<'_> {
    /// Max flow of the tuples of `reqs` into hosts. Returns the network,
    /// the number of tuples, the flow value, and per tuple the
    /// `(edge, model, host)` triples of its options.
    #[allow(clippy::type_complexity)]
    fn unit_flow(&self, reqs: &[RequestIx]) -> (FlowNet, usize, f64, Vec<(usize, Vec<(usize, ModelIx, NodeIx)>)>) {
        let slots: Vec<usize> = reqs
            .iter()
            .flat_map(|r| self.inst.request_slots(*r))
            .collect();
        // dense ids for the (host, model) pairs and hosts in use
        let nm = self.inst.num_models();
        let mut pair_ix = vec![usize::MAX; self.nd * nm];
        let mut pairs = Vec::new();
        let mut host_ix = vec![usize::MAX; self.nd];
        let mut hosts = Vec::new();
        for &s in &slots {
            for o in &self.opts[s] {
                let h = o.host.idx();
                if host_ix[h] == usize::MAX {
                    host_ix[h] = hosts.len();
                    hosts.push(h);
                }
                for &m in &o.models {
                    if pair_ix[h * nm + m.idx()] == usize::MAX {
                        pair_ix[h * nm + m.idx()] = pairs.len();
                        pairs.push((h, m));
                    }
                }
            }
        }
        let (src, slot0) = (0, 1);
        let pair0 = slot0 + slots.len();
        let host0 = pair0 + pairs.len();
        let sink = host0 + hosts.len();
        let mut g = FlowNet::new(sink + 1);
        let mut arcs = Vec::with_capacity(slots.len());
        for (j, &s) in slots.iter().enumerate() {
            g.add_edge(src, slot0 + j, 1.0);
            let mut mine = Vec::new();
            for o in &self.opts[s] {
                for &m in &o.models {
                    let e = g.add_edge(slot0 + j, pair0 + pair_ix[o.host.idx() * nm + m.idx()], 1.0);
                    mine.push((e, m, o.host));
                }
            }
            arcs.push((s, mine));
        }
        for (p, &(h, m)) in pairs.iter().enumerate() {
            g.add_edge(pair0 + p, host0 + host_ix[h], self.cap[m.idx() * self.nd + h] as f64);
        }
        for (i, &h) in hosts.iter().enumerate() {
            g.add_edge(host0 + i, sink, self.host_limit[h]);
        }
        let flow = g.max_flow(src, sink);
        (g, slots.len(), flow, arcs)
    }

    fn unit_feasible(&mut self, reqs: &[RequestIx]) -> bool {
        let mut id: Vec<u32> = reqs.iter().map(|r| r.idx() as u32).collect();
        id.sort_unstable();
        if let Some(&hit) = self.flows.get(&id) {
            return hit;
        }
        let (_, total, flow, _) = self.unit_flow(reqs);
        let ok = flow >= total as f64 - 0.5;
        if self.flows.len() < MEMO_CAP {
            self.flows.insert(id, ok);
        }
        ok
    }

    fn unit_assignment(&self) -> Vec<AssignmentVar> {
        let (g, _, _, arcs) = self.unit_flow(&self.included);
        let mut next_k: HashMap<(ModelIx, NodeIx), u32> = HashMap::new();
        let mut out = Vec::new();
        for (s, mine) in arcs {
            let &(_, model, host) = mine
                .iter()
                .find(|(e, _, _)| g.flow_on(*e) > 0.5)
                .expect("included tuples are fully routed");
            let k = next_k.entry((model, host)).or_insert(0);
            *k += 1;
            let slot = &self.inst.slots()[s];
            out.push(AssignmentVar {
                request: slot.request,
                func: slot.func,
                target: slot.target,
                model,
                k: *k,
                host,
            });
        }
        out
    }

    /// `plain` counts undecided requests that fit next to the included
    /// ones. Without sharing `hall` also charges the flow deficit of all of
    /// them together, which removing a request lowers by at most its tuple
    /// count; with sharing it charges the known conflicts among them.
    fn subset_bound(&mut self, pos: usize) -> Bounds {
        let mut plain = self.value;
        let mut live = Vec::new();
        let mut head_feasible = false;
        let mut trial = self.included.clone();
        for j in pos..self.order.len() {
            let q = self.order[j];
            trial.push(q);
            if self.subset_feasible(&trial) {
                plain += self.inst.request_value(q);
                live.push(q);
                head_feasible |= j == pos;
            }
            trial.pop();
        }
        let mut loss = if self.sharing {
            self.conflict_loss(&live)
        } else {
            self.deficit_loss(live)
        };
        if self.integral_values {
            loss = (loss - EPS).ceil();
        }
        Bounds {
            plain,
            hall: plain - loss,
            head_feasible,
        }
    }

    fn deficit_loss(&self, mut live: Vec<RequestIx>) -> f64 {
        let mut all = self.included.clone();
        all.extend(&live);
        let (_, total, flow, _) = self.unit_flow(&all);
        let mut deficit = total as f64 - flow;
        if deficit <= 0.5 {
            return 0.0;
        }
        live.sort_by(|&a, &b| {
            let ra = self.inst.request_value(a) / self.inst.request_slots(a).len() as f64;
            let rb = self.inst.request_value(b) / self.inst.request_slots(b).len() as f64;
            ra.total_cmp(&rb).then(a.cmp(&b))
        });
        let mut loss = 0.0;
        for q in live {
            let w = self.inst.request_slots(q).len() as f64;
            let v = self.inst.request_value(q);
            if w >= deficit {
                loss += v * deficit / w;
                break;
            }
            loss += v;
            deficit -= w;
        }
        loss
    }

    fn subset_feasible(&mut self, reqs: &[RequestIx]) -> bool {
        if self.sharing {
            self.cover_of(reqs).is_some()
        } else {
            self.unit_feasible(reqs)
        }
    }

    fn subset_node(&mut self, pos: usize) {
        if self.stopped || self.done {
            return;
        }
        if self.value > self.best_value + EPS {
            self.best_value = self.value;
            let active = if self.sharing {
                self.shared_assignment()
            } else {
                self.unit_assignment()
            };
            self.best = (active, self.included.clone());
        }
        if !self.tick() || pos == self.order.len() {
            return;
        }
        if self.best_value >= self.root_bound - EPS {
            self.done = true;
            return;
        }
        if self.value + self.suffix[pos] <= self.best_value + EPS {
            self.stats.pruned_by_bound += 1;
            return;
        }
        let b = self.subset_bound(pos);
        if self.stopped {
            return;
        }
        if b.hall <= self.best_value + EPS {
            self.stats.pruned_by_bound += 1;
            return;
        }
        let r = self.order[pos];
        let v = self.inst.request_value(r);
        if b.head_feasible {
            self.included.push(r);
            let before = if self.sharing {
                let keys = self.cover_of(&self.included.clone()).expect("head request was feasible");
                Some(std::mem::replace(&mut self.witness, keys))
            } else {
                None
            };
            self.value += v;
            self.subset_node(pos + 1);
            self.value -= v;
            if let Some(keys) = before {
                self.witness = keys;
            }
            self.included.pop();
            if self.stopped || self.done {
                return;
            }
        }
        let reject_bound = if b.head_feasible { b.plain - v } else { b.plain };
        if reject_bound > self.best_value + EPS {
            self.subset_node(pos + 1);
        } else {
            self.stats.pruned_by_bound += 1;
        }
    }
}

/// Covering checks with sharing.
impl Search<'_> {
    fn cover_problem(&self) -> CoverProblem {
        let (class_of, _) = demand_classes(self.inst);
        let nd = self.nd;
        let slot_keys = self
            .opts
            .iter()
            .map(|o| {
                let mut keys: Vec<u32> = o
                    .iter()
                    .filter(|o| self.cap[o.key] > 0)
                    .map(|o| o.key as u32)
                    .collect();
                keys.sort_unstable();
                keys
            })
            .collect();
        let nkeys = self.inst.num_models() * nd;
        CoverProblem {
            slot_keys,
            key_host: (0..nkeys).map(|k| k % nd).collect(),
            key_demand: (0..nkeys).map(|k| class_of[k / nd]).collect(),
            demands: self.class_demand.clone(),
            room: self.room.clone(),
            nres: self.nres,
        }
    }

    /// Instance keys serving all of `reqs`, or `None` when no cover exists.
    /// Sets extending the included ones by one request start from the
    /// current witness.
    fn cover_of(&mut self, reqs: &[RequestIx]) -> Option<Vec<u32>> {
        let mut id: Vec<u32> = reqs.iter().map(|r| r.idx() as u32).collect();
        id.sort_unstable();
        if let Some(hit) = self.covers.get(&id) {
            return hit.clone();
        }
        let cover = self.cover.as_ref().expect("cover data with sharing");
        let mut nodes = 0;
        let mut found = Cover::No;
        if reqs.len() == self.included.len() + 1 && reqs.starts_with(&self.included) && !self.included.is_empty() {
            let fresh: Vec<usize> = self.inst.request_slots(reqs[reqs.len() - 1]).collect();
            found = cover.extend(&fresh, &self.witness, self.deadline, &mut nodes);
        }
        if found == Cover::No {
            let slots: Vec<usize> = reqs.iter().flat_map(|r| self.inst.request_slots(*r)).collect();
            found = cover.solve(&slots, self.deadline, &mut nodes);
        }
        let out = match found {
            Cover::Yes(keys) => Some(keys),
            Cover::No => None,
            Cover::Unknown => {
                self.stopped = true;
                return None;
            }
        };
        self.stats.explored_nodes += nodes;
        if self.covers.len() < MEMO_CAP {
            self.covers.insert(id, out.clone());
        }
        out
    }

    /// Marks every pair of individually feasible requests that no cover
    /// serves together.
    fn find_conflicts(&mut self) {
        let n = self.inst.num_requests();
        self.conflicts = vec![vec![false; n]; n];
        let alone: Vec<Option<Vec<u32>>> = (0..n).map(|q| self.cover_of(&[RequestIx::new(q)])).collect();
        for a in 0..n {
            for b in a + 1..n {
                let (Some(ka), Some(kb)) = (&alone[a], &alone[b]) else {
                    continue;
                };
                let cover = self.cover.as_ref().expect("cover data with sharing");
                if cover.fits_all(ka.iter().chain(kb).copied()) {
                    continue;
                }
                if self.cover_of(&[RequestIx::new(a), RequestIx::new(b)]).is_none() {
                    self.conflicts[a][b] = true;
                    self.conflicts[b][a] = true;
                }
            }
        }
    }

    /// Splits `live` greedily into cliques of the conflict graph; each
    /// clique keeps at most its most valuable member.
    fn conflict_loss(&self, live: &[RequestIx]) -> f64 {
        let adj = |a: RequestIx, b: RequestIx| self.conflicts[a.idx()][b.idx()];
        let mut left: Vec<RequestIx> = live.to_vec();
        let mut loss = 0.0;
        while !left.is_empty() {
            let snapshot = left.clone();
            let degree = |q: RequestIx| snapshot.iter().filter(|&&o| adj(q, o)).count();
            left.sort_by(|&a, &b| degree(b).cmp(&degree(a)).then(a.cmp(&b)));
            let mut clique = vec![left[0]];
            for &q in &left[1..] {
                if clique.iter().all(|&c| adj(c, q)) {
                    clique.push(q);
                }
            }
            if clique.len() > 1 {
                let values: Vec<f64> = clique.iter().map(|&q| self.inst.request_value(q)).collect();
                let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                loss += values.iter().sum::<f64>() - top;
            }
            left.retain(|q| !clique.contains(q));
        }
        loss
    }

    /// Every included tuple served by the first witness instance among its
    /// options.
    fn shared_assignment(&self) -> Vec<AssignmentVar> {
        let open: HashSet<u32> = self.witness.iter().copied().collect();
        let mut out = Vec::new();
        for &r in &self.included {
            for s in self.inst.request_slots(r) {
                let o = self.opts[s]
                    .iter()
                    .find(|o| open.contains(&(o.key as u32)))
                    .expect("witness covers every included tuple");
                let slot = &self.inst.slots()[s];
                out.push(AssignmentVar {
                    request: slot.request,
                    func: slot.func,
                    target: slot.target,
                    model: o.models[0],
                    k: 1,
                    host: o.host,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formulation::{check_policy, ConstraintId};
    use crate::reduction::PruneMode;

    fn exact(inst: &Instance, sharing: bool) -> SolveResult {
        solve_exact(
            inst,
            &SolveOptions {
                sharing,
                ..SolveOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn t1_with_sharing_accepts_both_with_one_instance() {
        let inst = fixtures::t1(true);
        let res = exact(&inst, true);
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, 2.0);
        assert_eq!(res.policy.active_placements().count(), 1);
        assert!(check_policy(&inst, &res.policy).is_ok());
    }

    #[test]
    fn t1_without_sharing_uses_two_instances() {
        let inst = fixtures::t1(false);
        let res = exact(&inst, false);
        assert_eq!(res.objective, 2.0);
        let placed: Vec<_> = res.policy.active_placements().collect();
        assert_eq!(placed.len(), 2);
        assert!(placed.iter().all(|p| p.n == 1));
        let report = check_policy(&inst, &res.policy);
        assert!(report.is_ok(), "{report:?}");
        assert_eq!(report.count(ConstraintId::NoSharing), 0);
    }

    #[test]
    fn t1a_single_core_caps_acceptance() {
        // only N1 has a core: one instance in total
        let shared = exact(&fixtures::t1a(true), true);
        assert_eq!(shared.objective, 2.0);
        let alone = exact(&fixtures::t1a(false), false);
        assert_eq!(alone.objective, 1.0);
        assert!(check_policy(&fixtures::t1a(false), &alone.policy).is_ok());
    }

    #[test]
    fn options_flag_overrides_instance_sharing() {
        let inst = fixtures::t1a(true);
        assert_eq!(exact(&inst, false).objective, 1.0);
    }

    #[test]
    fn prune_modes_agree() {
        let inst = fixtures::t1a(false);
        let objs: Vec<f64> = PruneMode::ALL
            .iter()
            .map(|&prune| {
                solve_exact(
                    &inst,
                    &SolveOptions {
                        sharing: false,
                        prune,
                        ..SolveOptions::default()
                    },
                )
                .unwrap()
                .objective
            })
            .collect();
        assert!(objs.iter().all(|&o| o == 1.0), "{objs:?}");
    }

    #[test]
    fn empty_request_set() {
        let inst = Instance::new(
            fixtures::t1_topology(),
            fixtures::t1_catalog(),
            Default::default(),
            Default::default(),
        )
        .unwrap();
        let res = solve_exact(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::InfeasibleEmpty);
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn node_limit_returns_incumbent() {
        let err = solve_exact(
            &fixtures::t1(true),
            &SolveOptions {
                node_limit: Some(1),
                ..SolveOptions::default()
            },
        )
        .unwrap_err();
        let inc = err.into_incumbent().expect("incumbent");
        assert_eq!(inc.status, SolveStatus::Feasible);
        assert!(check_policy(&fixtures::t1(true), &inc.policy).is_ok());
    }

    #[test]
    fn rejects_bad_options() {
        let bad = SolveOptions {
            time_limit_s: Some(0.0),
            ..SolveOptions::default()
        };
        assert!(matches!(
            solve_exact(&fixtures::t1(true), &bad),
            Err(SolveError::InvalidOptions(_))
        ));
    }
}
