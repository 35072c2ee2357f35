//! Bayesian networks, d-separation and side-information classification.
//!
//! Graph-structural independence only: a query answers whether every trail
//! between two node sets is blocked by the conditioning set. Soundness of
//! d-separation (observed independence matching graph independence) is the
//! caller's modeling assumption, as is the premise that the side information
//! does not deterministically determine the channel node.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Directed acyclic graph with named nodes.
#[derive(Debug, Clone, Default)]
pub struct BayesNet {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl BayesNet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn node_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Adds a node if absent, returning its id.
    pub fn add_node(&mut self, name: &str) -> Result<usize> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Graph(format!("bad node name {name:?}")));
        }
        if let Some(id) = self.node_id(name) {
            return Ok(id);
        }
        self.names.push(name.to_string());
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        Ok(self.names.len() - 1)
    }

    /// Adds a directed edge, creating endpoints as needed. Rejects self-loops,
    /// duplicates and edges that would close a cycle.
    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<()> {
        let u = self.add_node(from)?;
        let v = self.add_node(to)?;
        if u == v {
            return Err(Error::Graph(format!("self-loop on {from}")));
        }
        if self.children[u].contains(&v) {
            return Err(Error::Graph(format!("duplicate edge {from} -> {to}")));
        }
        if self.reaches(v, u) {
            return Err(Error::Graph(format!("edge {from} -> {to} closes a cycle")));
        }
        self.children[u].push(v);
        self.parents[v].push(u);
        Ok(())
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.children[from].contains(&to)
    }

    /// Directed reachability from `src` to `dst`.
    fn reaches(&self, src: usize, dst: usize) -> bool {
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![src];
        while let Some(v) = stack.pop() {
            if v == dst {
                return true;
            }
            if !seen[v] {
                seen[v] = true;
                stack.extend(self.children[v].iter().copied());
            }
        }
        false
    }

    /// Nodes in `seeds` together with all their ancestors.
    fn ancestors_mask(&self, seeds: &BTreeSet<usize>) -> Vec<bool> {
        let mut mask = vec![false; self.node_count()];
        let mut stack: Vec<usize> = seeds.iter().copied().collect();
        while let Some(v) = stack.pop() {
            if !mask[v] {
                mask[v] = true;
                stack.extend(self.parents[v].iter().copied());
            }
        }
        mask
    }

    fn check_sets(&self, sets: &[&BTreeSet<usize>]) -> Result<()> {
        for set in sets {
            for &v in set.iter() {
                if v >= self.node_count() {
                    return Err(Error::Graph(format!("unknown node id {v}")));
                }
            }
        }
        for (i, a) in sets.iter().enumerate() {
            for b in sets.iter().skip(i + 1) {
                if a.intersection(b).next().is_some() {
                    return Err(Error::Graph("query sets must be disjoint".into()));
                }
            }
        }
        Ok(())
    }

    /// Whether `x` and `y` are d-separated given `z`.
    ///
    /// Reachability formulation: a ball started at `x` moving against or with
    /// the edges is passed through chains and forks with unobserved center and
    /// through colliders whose center has an observed descendant. `x` and `y`
    /// are d-separated iff the ball never reaches `y`.
    pub fn d_separated(
        &self,
        x: &BTreeSet<usize>,
        y: &BTreeSet<usize>,
        z: &BTreeSet<usize>,
    ) -> Result<bool> {
        self.check_sets(&[x, y, z])?;
        if x.is_empty() || y.is_empty() {
            return Err(Error::EmptyInput("query set"));
        }
        let anc_z = self.ancestors_mask(z);

        // State (node, came_from_child); start as if arriving from a child so
        // both directions open up at the source.
        let n = self.node_count();
        let mut visited = vec![[false; 2]; n];
        let mut queue: Vec<(usize, bool)> = x.iter().map(|&v| (v, true)).collect();
        while let Some((v, from_child)) = queue.pop() {
            let dir = usize::from(from_child);
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if y.contains(&v) {
                return Ok(false);
            }
            if from_child {
                if !z.contains(&v) {
                    for &p in &self.parents[v] {
                        queue.push((p, true));
                    }
                    for &c in &self.children[v] {
                        queue.push((c, false));
                    }
                }
            } else {
                if !z.contains(&v) {
                    for &c in &self.children[v] {
                        queue.push((c, false));
                    }
                }
                if anc_z[v] {
                    for &p in &self.parents[v] {
                        queue.push((p, true));
                    }
                }
            }
        }
        Ok(true)
    }

    /// All simple undirected paths between `x` and `y` in the graph skeleton.
    pub fn enumerate_trails(&self, x: usize, y: usize) -> Result<Vec<Vec<usize>>> {
        if x >= self.node_count() || y >= self.node_count() {
            return Err(Error::Graph("unknown node id".into()));
        }
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.node_count()];
        for (u, cs) in self.children.iter().enumerate() {
            for &v in cs {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        let mut trails = Vec::new();
        let mut path = vec![x];
        let mut on_path = vec![false; self.node_count()];
        on_path[x] = true;
        self.dfs_trails(y, &adj, &mut path, &mut on_path, &mut trails);
        Ok(trails)
    }

    fn dfs_trails(
        &self,
        goal: usize,
        adj: &[BTreeSet<usize>],
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().unwrap();
        if v == goal {
            out.push(path.clone());
            return;
        }
        for &w in &adj[v] {
            if !on_path[w] {
                on_path[w] = true;
                path.push(w);
                self.dfs_trails(goal, adj, path, on_path, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }

    /// Whether a single trail is active (unblocked) given conditioning set `z`.
    ///
    /// Per-triplet rules: a collider a -> c <- b blocks unless c or one of its
    /// descendants is in `z`; any other configuration blocks iff c is in `z`.
    pub fn trail_active(&self, trail: &[usize], z: &BTreeSet<usize>) -> Result<bool> {
        if trail.len() < 2 {
            return Err(Error::Graph("trail needs at least two nodes".into()));
        }
        for w in trail.windows(2) {
            if !self.has_edge(w[0], w[1]) && !self.has_edge(w[1], w[0]) {
                return Err(Error::Graph("trail step is not an edge".into()));
            }
        }
        let desc_z: Vec<bool> = {
            // c has an observed descendant iff c is an ancestor of z.
            self.ancestors_mask(z)
        };
        for w in trail.windows(3) {
            let (a, c, b) = (w[0], w[1], w[2]);
            let collider = self.has_edge(a, c) && self.has_edge(b, c);
            let blocked = if collider { !desc_z[c] } else { z.contains(&c) };
            if blocked {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Renders a trail with per-step edge directions, e.g. `beta -> H <- z`.
    pub fn format_trail(&self, trail: &[usize]) -> String {
        let mut s = String::new();
        for (i, &v) in trail.iter().enumerate() {
            if i > 0 {
                let prev = trail[i - 1];
                s.push_str(if self.has_edge(prev, v) { " -> " } else { " <- " });
            }
            s.push_str(self.node_name(v));
        }
        s
    }

    /// Parses the line-oriented text format: `edge A B` per directed edge,
    /// optional `node X` lines, `#` comments.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut bn = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("node") => {
                    let name = parts
                        .next()
                        .ok_or_else(|| Error::Graph(format!("line {}: node needs a name", lineno + 1)))?;
                    bn.add_node(name)?;
                }
                Some("edge") => {
                    let from = parts
                        .next()
                        .ok_or_else(|| Error::Graph(format!("line {}: edge needs two nodes", lineno + 1)))?;
                    let to = parts
                        .next()
                        .ok_or_else(|| Error::Graph(format!("line {}: edge needs two nodes", lineno + 1)))?;
                    bn.add_edge(from, to)?;
                }
                Some(other) => {
                    return Err(Error::Graph(format!("line {}: unknown directive {other:?}", lineno + 1)))
                }
                None => unreachable!(),
            }
            if parts.next().is_some() {
                return Err(Error::Graph(format!("line {}: trailing tokens", lineno + 1)));
            }
        }
        Ok(bn)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (v, name) in self.names.iter().enumerate() {
            if self.parents[v].is_empty() && self.children[v].is_empty() {
                s.push_str(&format!("node {name}\n"));
            }
        }
        for (u, cs) in self.children.iter().enumerate() {
            for &v in cs {
                s.push_str(&format!("edge {} {}\n", self.names[u], self.names[v]));
            }
        }
        s
    }
}

/// Role assignment of the phase, parameter, channel and side-information
/// nodes, plus the full observed set.
#[derive(Debug, Clone)]
pub struct SideInfoRoles {
    pub beta: usize,
    pub xi: usize,
    pub h: usize,
    pub z: usize,
    pub observed: BTreeSet<usize>,
}

impl SideInfoRoles {
    pub fn validate(&self, bn: &BayesNet) -> Result<()> {
        let ids = [self.beta, self.xi, self.h, self.z];
        for &id in &ids {
            if id >= bn.node_count() {
                return Err(Error::Graph(format!("unknown node id {id}")));
            }
        }
        let distinct: BTreeSet<usize> = ids.iter().copied().collect();
        if distinct.len() != 4 {
            return Err(Error::Graph("role nodes must be distinct".into()));
        }
        for &v in &self.observed {
            if v >= bn.node_count() {
                return Err(Error::Graph(format!("unknown observed node id {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideInfoClass {
    StructurePreserving,
    DirectInference,
}

impl fmt::Display for SideInfoClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideInfoClass::StructurePreserving => write!(f, "StructurePreserving"),
            SideInfoClass::DirectInference => write!(f, "DirectInference"),
        }
    }
}

/// Classifies side information: structure-preserving iff the phase node is
/// d-separated from {parameters, side info} given any further observed nodes,
/// in which case the conditional phase distribution equals the marginal and
/// the zero-mean / multilevel-Toeplitz conclusion applies. Otherwise returns
/// the unblocked trails as rationale.
pub fn classify_side_info(
    bn: &BayesNet,
    roles: &SideInfoRoles,
) -> Result<(SideInfoClass, Vec<Vec<usize>>)> {
    roles.validate(bn)?;
    if roles.observed.contains(&roles.h) {
        return Err(Error::Graph(
            "channel node must not be observed for this classification".into(),
        ));
    }
    let x: BTreeSet<usize> = [roles.beta].into();
    let y: BTreeSet<usize> = [roles.xi, roles.z].into();
    let mut cond = roles.observed.clone();
    for v in [roles.beta, roles.xi, roles.z] {
        cond.remove(&v);
    }
    if bn.d_separated(&x, &y, &cond)? {
        return Ok((SideInfoClass::StructurePreserving, Vec::new()));
    }
    let mut rationale = Vec::new();
    for &target in &[roles.xi, roles.z] {
        for trail in bn.enumerate_trails(roles.beta, target)? {
            if trail.iter().skip(1).take(trail.len().saturating_sub(2)).any(|v| *v == roles.xi || *v == roles.z)
            {
                // Interior role nodes are part of the dependent set; the
                // shorter suffix trail is reported instead.
                continue;
            }
            if bn.trail_active(&trail, &cond)? {
                rationale.push(trail);
            }
        }
    }
    Ok((SideInfoClass::DirectInference, rationale))
}

/// The sensing-and-modeling graph: z -> Xi, z -> H, Xi -> H, beta -> H.
pub fn sensing_modeling_graph() -> (BayesNet, SideInfoRoles) {
    let mut bn = BayesNet::new();
    bn.add_edge("z", "Xi").unwrap();
    bn.add_edge("z", "H").unwrap();
    bn.add_edge("Xi", "H").unwrap();
    bn.add_edge("beta", "H").unwrap();
    let roles = SideInfoRoles {
        beta: bn.node_id("beta").unwrap(),
        xi: bn.node_id("Xi").unwrap(),
        h: bn.node_id("H").unwrap(),
        z: bn.node_id("z").unwrap(),
        observed: [bn.node_id("Xi").unwrap(), bn.node_id("z").unwrap()].into(),
    };
    (bn, roles)
}

/// The direct-inference graph: Xi -> H, beta -> H, H -> z.
pub fn direct_inference_graph() -> (BayesNet, SideInfoRoles) {
    let mut bn = BayesNet::new();
    bn.add_edge("Xi", "H").unwrap();
    bn.add_edge("beta", "H").unwrap();
    bn.add_edge("H", "z").unwrap();
    let roles = SideInfoRoles {
        beta: bn.node_id("beta").unwrap(),
        xi: bn.node_id("Xi").unwrap(),
        h: bn.node_id("H").unwrap(),
        z: bn.node_id("z").unwrap(),
        observed: [bn.node_id("Xi").unwrap(), bn.node_id("z").unwrap()].into(),
    };
    (bn, roles)
}
