//! Dinic max-flow on a small dense-ish graph with real capacities.

const EPS: f64 = 1e-9;

pub(crate) struct FlowNet {
    n: usize,
    from: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
    /// Edge ids grouped by tail vertex, built on first use.
    adj: Vec<usize>,
    adj_start: Vec<usize>,
    level: Vec<i32>,
    it: Vec<usize>,
}

impl FlowNet {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            from: Vec::new(),
            to: Vec::new(),
            cap: Vec::new(),
            adj: Vec::new(),
            adj_start: Vec::new(),
            level: vec![0; n],
            it: vec![0; n],
        }
    }

    /// Adds `u -> v` with capacity `c` and returns the edge id.
    pub(crate) fn add_edge(&mut self, u: usize, v: usize, c: f64) -> usize {
        let id = self.to.len();
        self.from.extend([u, v]);
        self.to.extend([v, u]);
        self.cap.extend([c, 0.0]);
        self.adj_start.clear();
        id
    }

    /// Flow currently routed through edge `e`.
    pub(crate) fn flow_on(&self, e: usize) -> f64 {
        self.cap[e ^ 1]
    }

    fn index(&mut self) {
        if !self.adj_start.is_empty() {
            return;
        }
        let mut start = vec![0; self.n + 1];
        for &u in &self.from {
            start[u + 1] += 1;
        }
        for i in 0..self.n {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        self.adj = vec![0; self.from.len()];
        for (e, &u) in self.from.iter().enumerate() {
            self.adj[fill[u]] = e;
            fill[u] += 1;
        }
        self.adj_start = start;
    }

    fn bfs(&mut self, s: usize) {
        self.index();
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[self.adj_start[u]..self.adj_start[u + 1]] {
                let v = self.to[e];
                if self.cap[e] > EPS && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, f: f64) -> f64 {
        if u == t {
            return f;
        }
        while self.it[u] < self.adj_start[u + 1] {
            let e = self.adj[self.it[u]];
            let v = self.to[e];
            if self.cap[e] > EPS && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, f.min(self.cap[e]));
                if d > EPS {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.it[u] += 1;
        }
        0.0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return total;
            }
            self.it.copy_from_slice(&self.adj_start[..self.n]);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= EPS {
                    break;
                }
                total += f;
            }
        }
    }

    /// Vertices reachable from `s` in the residual graph; after
    /// [`max_flow`](Self::max_flow) this is the source side of a minimum cut.
    pub(crate) fn residual_reachable(&mut self, s: usize) -> Vec<bool> {
        self.bfs(s);
        self.level.iter().map(|&l| l >= 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bipartite_deficiency() {
        // three unit jobs, two of them restricted to one unit-capacity host
        let (s, t) = (0, 6);
        let mut g = FlowNet::new(7);
        for j in 1..=3 {
            g.add_edge(s, j, 1.0);
        }
        g.add_edge(1, 4, f64::INFINITY);
        g.add_edge(2, 4, f64::INFINITY);
        g.add_edge(3, 5, f64::INFINITY);
        g.add_edge(4, t, 1.0);
        g.add_edge(5, t, 1.0);
        assert!((g.max_flow(s, t) - 2.0).abs() < 1e-12);
        let side = g.residual_reachable(s);
        assert!(side[4] && !side[5]);
    }
}
