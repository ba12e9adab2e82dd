//! Multi-coalition communication graph and the matrices built from it.
//!
//! Agents are flattened coalition-major: agent `(i, j)` sits at index
//! `offset(i) + j`. Every estimator vector indexed by (agent, target) pairs
//! is agent-major, so entry `a * n_sum + p` holds agent `a`'s estimate of `x_p`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Zero-based agent reference: member `member` of coalition `coalition`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub coalition: usize,
    pub member: usize,
}

impl AgentId {
    pub fn new(coalition: usize, member: usize) -> Self {
        Self { coalition, member }
    }
}

impl fmt::Display for AgentId {
    /// One-based "ij" label, with a separator once either index exceeds 9.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = (self.coalition + 1, self.member + 1);
        if i < 10 && j < 10 {
            write!(f, "{i}{j}")
        } else {
            write!(f, "{i}_{j}")
        }
    }
}

#[derive(Debug, Clone)]
pub struct NetworkTopology {
    coalition_sizes: Vec<usize>,
    offsets: Vec<usize>,
    coalition_of: Vec<usize>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<u8>,
    neighbors: Vec<Vec<usize>>,
    intra_neighbors: Vec<Vec<usize>>,
    laplacians: Vec<DenseMatrix>,
    row_laplacians: Vec<DenseMatrix>,
    h_params: Vec<f64>,
    weights: DenseMatrix,
    wbar: DenseMatrix,
    mixing: Vec<DenseMatrix>,
}

/// Borrowed view of the consensus-estimation constants.
#[derive(Debug, Clone, Copy)]
pub struct ConsensusMatrices<'a> {
    /// Weighted adjacency `W`.
    pub w: &'a DenseMatrix,
    /// `w̄[a][p] = 1 − Σ_{l∈N_a} w_a^l − w_a^p`, the diagonal of `W̄` reshaped.
    pub wbar: &'a DenseMatrix,
    topology: &'a NetworkTopology,
}

impl ConsensusMatrices<'_> {
    /// Diagonal of `Ŵ` in (agent, target) order; equals `W` flattened row-major.
    pub fn what_diagonal(&self) -> Vec<f64> {
        self.w.as_slice().to_vec()
    }

    /// `M = W ⊗ I + W̄` as a dense `n_sum² × n_sum²` matrix.
    pub fn operator_dense(&self) -> DenseMatrix {
        self.topology.consensus_operator_dense()
    }
}

impl NetworkTopology {
    /// Builds the topology from coalition sizes and undirected edges.
    ///
    /// Duplicate and reversed edges are merged.
    pub fn build(coalition_sizes: &[usize], edges: &[(AgentId, AgentId)]) -> Result<Self> {
        if coalition_sizes.is_empty() {
            return Err(Error::Validation("at least one coalition is required".into()));
        }
        if let Some(i) = coalition_sizes.iter().position(|&s| s == 0) {
            return Err(Error::Validation(format!("coalition {} is empty", i + 1)));
        }
        let mut offsets = Vec::with_capacity(coalition_sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &s in coalition_sizes {
            acc += s;
            offsets.push(acc);
        }
        let resolve = |id: &AgentId| -> Result<usize> {
            if id.coalition >= coalition_sizes.len() || id.member >= coalition_sizes[id.coalition] {
                return Err(Error::InvalidEdge(format!(
                    "agent (coalition {}, member {}) does not exist",
                    id.coalition + 1,
                    id.member + 1
                )));
            }
            Ok(offsets[id.coalition] + id.member)
        };
        let mut flat = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let (u, v) = (resolve(a)?, resolve(b)?);
            if u == v {
                return Err(Error::InvalidEdge(format!("self-loop on agent {a}")));
            }
            flat.push((u, v));
        }
        Self::from_flat_edges(coalition_sizes, &flat)
    }

    /// Same as [`build`](Self::build) with edges given as flattened indices.
    pub fn from_flat_edges(coalition_sizes: &[usize], edges: &[(usize, usize)]) -> Result<Self> {
        if coalition_sizes.is_empty() || coalition_sizes.contains(&0) {
            return Err(Error::Validation("coalition sizes must be positive".into()));
        }
        let n: usize = coalition_sizes.iter().sum();
        let mut offsets = vec![0];
        let mut coalition_of = Vec::with_capacity(n);
        for (i, &s) in coalition_sizes.iter().enumerate() {
            offsets.push(offsets[i] + s);
            coalition_of.extend(std::iter::repeat_n(i, s));
        }

        let mut edge_set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidEdge(format!("endpoint out of range in ({u}, {v})")));
            }
            if u == v {
                return Err(Error::InvalidEdge(format!("self-loop on flattened agent {u}")));
            }
            edge_set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();

        let mut adjacency = vec![0u8; n * n];
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u * n + v] = 1;
            adjacency[v * n + u] = 1;
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let intra_neighbors: Vec<Vec<usize>> = (0..n)
            .map(|a| {
                neighbors[a]
                    .iter()
                    .copied()
                    .filter(|&b| coalition_of[b] == coalition_of[a])
                    .collect()
            })
            .collect();

        if !is_connected(n, &neighbors) {
            return Err(Error::DisconnectedGraph("the full communication graph".into()));
        }
        for (i, window) in offsets.windows(2).enumerate() {
            let (lo, hi) = (window[0], window[1]);
            let members: Vec<Vec<usize>> = (lo..hi)
                .map(|a| intra_neighbors[a].iter().map(|&b| b - lo).collect())
                .collect();
            if !is_connected(hi - lo, &members) {
                return Err(Error::DisconnectedGraph(format!("subgraph of coalition {}", i + 1)));
            }
        }

        let laplacians: Vec<DenseMatrix> = offsets
            .windows(2)
            .map(|w| {
                let (lo, size) = (w[0], w[1] - w[0]);
                let mut l = DenseMatrix::zeros(size, size);
                for j in 0..size {
                    let a = lo + j;
                    l[(j, j)] = intra_neighbors[a].len() as f64;
                    for &b in &intra_neighbors[a] {
                        l[(j, b - lo)] = -1.0;
                    }
                }
                l
            })
            .collect();
        let row_laplacians = laplacians.iter().map(row_laplacian_of).collect();

        // h_a = d_a + max_p a_a^p + 1.
        let h_params: Vec<f64> = (0..n)
            .map(|a| {
                let max_adj = if neighbors[a].is_empty() { 0.0 } else { 1.0 };
                neighbors[a].len() as f64 + max_adj + 1.0
            })
            .collect();
        let weights = DenseMatrix::from_fn(n, n, |a, p| f64::from(adjacency[a * n + p]) / h_params[a]);
        let wbar = DenseMatrix::from_fn(n, n, |a, p| {
            let row_sum: f64 = neighbors[a].iter().map(|&l| weights[(a, l)]).sum();
            1.0 - row_sum - weights[(a, p)]
        });

        let mixing = offsets
            .windows(2)
            .map(|w| {
                let (lo, size) = (w[0], w[1] - w[0]);
                let ni = size as f64;
                let mut c = DenseMatrix::zeros(size, size);
                for j in 0..size {
                    let a = lo + j;
                    c[(j, j)] = 1.0 - intra_neighbors[a].len() as f64 / ni;
                    for &b in &intra_neighbors[a] {
                        c[(j, b - lo)] = 1.0 / ni;
                    }
                }
                c
            })
            .collect();

        let topology = Self {
            coalition_sizes: coalition_sizes.to_vec(),
            offsets,
            coalition_of,
            edges,
            adjacency,
            neighbors,
            intra_neighbors,
            laplacians,
            row_laplacians,
            h_params,
            weights,
            wbar,
            mixing,
        };
        topology.check_invariants()?;
        Ok(topology)
    }

    /// Verifies every structural property the algorithms rely on.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n_sum();
        let fail = |msg: String| Err(Error::Validation(msg));
        for a in 0..n {
            if self.adjacency[a * n + a] != 0 {
                return fail(format!("adjacency diagonal non-zero at {a}"));
            }
            for p in 0..n {
                if self.adjacency[a * n + p] != self.adjacency[p * n + a] {
                    return fail(format!("adjacency not symmetric at ({a}, {p})"));
                }
            }
        }
        for (i, l) in self.laplacians.iter().enumerate() {
            let size = l.rows();
            for j in 0..size {
                // Integer-valued entries: these sums are exact.
                let row: f64 = l.row(j).iter().sum();
                let col: f64 = (0..size).map(|r| l[(r, j)]).sum();
                if row != 0.0 || col != 0.0 {
                    return fail(format!("Laplacian of coalition {} has non-zero row/column sum", i + 1));
                }
            }
        }
        for a in 0..n {
            let row = self.weights.row(a);
            let sum: f64 = row.iter().sum();
            let max = row.iter().fold(0.0f64, |m, v| m.max(*v));
            if sum + max >= 1.0 {
                return fail(format!("weights of agent {} violate Σw + max w < 1", self.agent_id(a)));
            }
            for p in 0..n {
                let w = row[p];
                if (w > 0.0) != (self.adjacency[a * n + p] == 1) || w < 0.0 {
                    return fail(format!("weight support mismatch at ({a}, {p})"));
                }
                if self.wbar[(a, p)] <= 0.0 {
                    return fail(format!("w̄ not positive at ({a}, {p})"));
                }
            }
        }
        for (i, c) in self.mixing.iter().enumerate() {
            let size = c.rows();
            let lo = self.offsets[i];
            for j in 0..size {
                let row: f64 = c.row(j).iter().sum();
                let col: f64 = (0..size).map(|r| c[(r, j)]).sum();
                if (row - 1.0).abs() > 1e-15 || (col - 1.0).abs() > 1e-15 {
                    return fail(format!("mixing matrix of coalition {} not doubly stochastic", i + 1));
                }
                for m in 0..size {
                    let linked = m == j || self.adjacency[(lo + j) * n + lo + m] == 1;
                    let v = c[(j, m)];
                    if v < 0.0 || (v > 0.0) != linked {
                        return fail(format!("mixing support mismatch in coalition {}", i + 1));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_sum(&self) -> usize {
        self.coalition_of.len()
    }

    pub fn num_coalitions(&self) -> usize {
        self.coalition_sizes.len()
    }

    pub fn coalition_sizes(&self) -> &[usize] {
        &self.coalition_sizes
    }

    pub fn coalition_size(&self, i: usize) -> usize {
        self.coalition_sizes[i]
    }

    /// Flattened index range of coalition `i`.
    pub fn coalition_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn coalition_of(&self, a: usize) -> usize {
        self.coalition_of[a]
    }

    pub fn flat_index(&self, id: AgentId) -> Result<usize> {
        if id.coalition >= self.num_coalitions() {
            return Err(Error::IndexOutOfRange {
                what: "coalition",
                index: id.coalition,
                len: self.num_coalitions(),
            });
        }
        if id.member >= self.coalition_sizes[id.coalition] {
            return Err(Error::IndexOutOfRange {
                what: "member",
                index: id.member,
                len: self.coalition_sizes[id.coalition],
            });
        }
        Ok(self.offsets[id.coalition] + id.member)
    }

    pub fn agent_id(&self, a: usize) -> AgentId {
        let c = self.coalition_of[a];
        AgentId::new(c, a - self.offsets[c])
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.n_sum()).map(|a| self.agent_id(a))
    }

    /// Deduplicated undirected edges as flattened pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacency(&self, a: usize, p: usize) -> u8 {
        self.adjacency[a * self.n_sum() + p]
    }

    /// Dense 0/1 adjacency `A`.
    pub fn adjacency_matrix(&self) -> DenseMatrix {
        let n = self.n_sum();
        DenseMatrix::from_fn(n, n, |a, p| f64::from(self.adjacency(a, p)))
    }

    /// Diagonal block `A_i` of the adjacency matrix.
    pub fn sub_adjacency(&self, i: usize) -> Result<DenseMatrix> {
        self.check_coalition(i)?;
        let r = self.coalition_range(i);
        let size = r.len();
        Ok(DenseMatrix::from_fn(size, size, |j, l| {
            f64::from(self.adjacency(r.start + j, r.start + l))
        }))
    }

    /// `N_a`: all neighbours of flattened agent `a`, ascending.
    pub fn neighbors(&self, a: usize) -> &[usize] {
        &self.neighbors[a]
    }

    /// `N_a^i`: neighbours of `a` inside its own coalition, as flattened indices.
    pub fn intra_neighbors(&self, a: usize) -> &[usize] {
        &self.intra_neighbors[a]
    }

    pub fn degree(&self, a: usize) -> usize {
        self.neighbors[a].len()
    }

    pub fn intra_degree(&self, a: usize) -> usize {
        self.intra_neighbors[a].len()
    }

    fn check_coalition(&self, i: usize) -> Result<()> {
        if i >= self.num_coalitions() {
            return Err(Error::IndexOutOfRange {
                what: "coalition",
                index: i,
                len: self.num_coalitions(),
            });
        }
        Ok(())
    }

    /// Laplacian `L_i` of the coalition subgraph.
    pub fn laplacian(&self, i: usize) -> Result<&DenseMatrix> {
        self.check_coalition(i)?;
        Ok(&self.laplacians[i])
    }

    pub fn laplacians(&self) -> &[DenseMatrix] {
        &self.laplacians
    }

    /// `L̆_i = diag{(L_i)_1, …, (L_i)_{n_i}}`, of size `n_i × n_i²`.
    pub fn row_laplacian(&self, i: usize) -> Result<&DenseMatrix> {
        self.check_coalition(i)?;
        Ok(&self.row_laplacians[i])
    }

    pub fn row_laplacians(&self) -> &[DenseMatrix] {
        &self.row_laplacians
    }

    /// Doubly-stochastic mixing matrix `C_i`.
    pub fn mixing(&self, i: usize) -> Result<&DenseMatrix> {
        self.check_coalition(i)?;
        Ok(&self.mixing[i])
    }

    pub fn mixing_matrices(&self) -> &[DenseMatrix] {
        &self.mixing
    }

    pub fn h_params(&self) -> &[f64] {
        &self.h_params
    }

    /// Weighted adjacency `W`.
    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    /// Table `w̄[a][p]`.
    pub fn wbar(&self) -> &DenseMatrix {
        &self.wbar
    }

    pub fn consensus_matrices(&self) -> ConsensusMatrices<'_> {
        ConsensusMatrices {
            w: &self.weights,
            wbar: &self.wbar,
            topology: self,
        }
    }

    /// One leader-following estimation step, in per-agent factored form:
    /// `ξ_a^p ← w̄_a^p ξ_a^p + Σ_{l∈N_a} w_a^l ξ_l^p + w_a^p x_p`.
    pub fn consensus_step(&self, xi: &[f64], x: &[f64], out: &mut [f64]) {
        let n = self.n_sum();
        debug_assert_eq!(xi.len(), n * n);
        debug_assert_eq!(out.len(), n * n);
        for a in 0..n {
            let out_row = &mut out[a * n..(a + 1) * n];
            let own = &xi[a * n..(a + 1) * n];
            let wbar = self.wbar.row(a);
            let w = self.weights.row(a);
            for p in 0..n {
                out_row[p] = wbar[p] * own[p];
            }
            for &l in &self.neighbors[a] {
                let wl = w[l];
                let theirs = &xi[l * n..(l + 1) * n];
                for p in 0..n {
                    out_row[p] += wl * theirs[p];
                }
            }
            for &p in &self.neighbors[a] {
                out_row[p] += w[p] * x[p];
            }
        }
    }

    /// `out = M v` with `M = W ⊗ I + W̄`, without materializing `M`.
    pub fn apply_consensus_operator(&self, v: &[f64], out: &mut [f64]) {
        let zeros = vec![0.0; self.n_sum()];
        self.consensus_step(v, &zeros, out);
    }

    /// `(W ⊗ I + W̄ + Ŵ) v`.
    pub fn apply_consensus_completion(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n_sum();
        let mut out = vec![0.0; n * n];
        self.apply_consensus_operator(v, &mut out);
        for (o, (vi, w)) in out.iter_mut().zip(v.iter().zip(self.weights.as_slice())) {
            *o += w * vi;
        }
        out
    }

    /// Dense `M = W ⊗ I + W̄` of order `n_sum²`.
    pub fn consensus_operator_dense(&self) -> DenseMatrix {
        let n = self.n_sum();
        let mut m = DenseMatrix::zeros(n * n, n * n);
        for a in 0..n {
            for p in 0..n {
                let row = a * n + p;
                m[(row, row)] += self.wbar[(a, p)];
                for &l in &self.neighbors[a] {
                    m[(row, l * n + p)] += self.weights[(a, l)];
                }
            }
        }
        m
    }

    /// Block of `M` acting on the estimates of target `p`: `W + diag_a(w̄_a^p)`.
    ///
    /// `M` is permutation-similar to the direct sum of these blocks.
    pub fn consensus_block(&self, p: usize) -> DenseMatrix {
        let n = self.n_sum();
        let mut block = self.weights.clone();
        for a in 0..n {
            block[(a, a)] += self.wbar[(a, p)];
        }
        block
    }

    /// Absolute row sums of `M`, indexed like the stacked estimator vector.
    pub fn consensus_row_sums(&self) -> Vec<f64> {
        let n = self.n_sum();
        let mut sums = Vec::with_capacity(n * n);
        for a in 0..n {
            let w_sum: f64 = self.neighbors[a].iter().map(|&l| self.weights[(a, l)]).sum();
            for p in 0..n {
                sums.push(self.wbar[(a, p)] + w_sum);
            }
        }
        sums
    }
}

fn row_laplacian_of(l: &DenseMatrix) -> DenseMatrix {
    let size = l.rows();
    let mut out = DenseMatrix::zeros(size, size * size);
    for j in 0..size {
        for c in 0..size {
            out[(j, j * size + c)] = l[(j, c)];
        }
    }
    out
}

fn is_connected(n: usize, adj: &[Vec<usize>]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Coalition sizes of the three-coalition example network.
pub const EXAMPLE_COALITION_SIZES: [usize; 3] = [4, 5, 6];

/// Edge list of the three-coalition example network, one-based `(i, j)` pairs.
pub const EXAMPLE_EDGES: [((usize, usize), (usize, usize)); 14] = [
    ((1, 1), (1, 2)),
    ((1, 1), (1, 4)),
    ((1, 2), (1, 3)),
    ((2, 1), (2, 2)),
    ((2, 2), (2, 3)),
    ((2, 4), (2, 5)),
    ((2, 1), (2, 5)),
    ((3, 1), (3, 3)),
    ((3, 2), (3, 3)),
    ((3, 3), (3, 6)),
    ((3, 5), (3, 6)),
    ((3, 4), (3, 5)),
    ((1, 3), (2, 3)),
    ((2, 5), (3, 2)),
];

/// The 15-agent example network used by the built-in scenarios.
pub fn example_topology() -> NetworkTopology {
    let edges: Vec<(AgentId, AgentId)> = EXAMPLE_EDGES
        .iter()
        .map(|&((i, j), (p, q))| (AgentId::new(i - 1, j - 1), AgentId::new(p - 1, q - 1)))
        .collect();
    NetworkTopology::build(&EXAMPLE_COALITION_SIZES, &edges).expect("example network is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(i: usize, j: usize) -> AgentId {
        AgentId::new(i - 1, j - 1)
    }

    #[test]
    fn example_network_builds() {
        let t = example_topology();
        assert_eq!(t.n_sum(), 15);
        assert_eq!(t.edges().len(), 14);
        let l1 = t.laplacian(0).unwrap();
        let expected = DenseMatrix::from_rows(&[
            vec![2.0, -1.0, 0.0, -1.0],
            vec![-1.0, 2.0, -1.0, 0.0],
            vec![0.0, -1.0, 1.0, 0.0],
            vec![-1.0, 0.0, 0.0, 1.0],
        ]);
        assert_eq!(l1, &expected);
        let degrees = DenseMatrix::diagonal(&[2.0, 2.0, 1.0, 1.0]);
        assert_eq!(t.sub_adjacency(0).unwrap(), degrees.sub(&expected));
    }

    #[test]
    fn single_agent_network() {
        let t = NetworkTopology::build(&[1], &[]).unwrap();
        assert_eq!(t.laplacian(0).unwrap(), &DenseMatrix::zeros(1, 1));
        assert_eq!(t.mixing(0).unwrap(), &DenseMatrix::identity(1));
        assert_eq!(t.row_laplacian(0).unwrap(), &DenseMatrix::zeros(1, 1));
    }

    #[test]
    fn disconnected_coalitions_rejected() {
        let err = NetworkTopology::build(&[2, 2], &[(id(1, 1), id(1, 2))]).unwrap_err();
        assert!(matches!(err, Error::DisconnectedGraph(_)));
        // Full graph connected but coalition 2's subgraph is not.
        let err = NetworkTopology::build(&[1, 2], &[(id(1, 1), id(2, 1)), (id(1, 1), id(2, 2))]).unwrap_err();
        assert!(matches!(err, Error::DisconnectedGraph(msg) if msg.contains("coalition 2")));
    }

    #[test]
    fn invalid_edges_rejected() {
        assert!(matches!(
            NetworkTopology::build(&[2], &[(id(1, 1), id(1, 1))]),
            Err(Error::InvalidEdge(_))
        ));
        assert!(matches!(
            NetworkTopology::build(&[2], &[(id(1, 1), id(1, 3))]),
            Err(Error::InvalidEdge(_))
        ));
        assert!(matches!(
            NetworkTopology::build(&[2], &[(id(1, 1), id(2, 1))]),
            Err(Error::InvalidEdge(_))
        ));
    }

    #[test]
    fn duplicate_and_reversed_edges_merge() {
        let t = NetworkTopology::build(&[2], &[(id(1, 1), id(1, 2)), (id(1, 2), id(1, 1)), (id(1, 1), id(1, 2))]).unwrap();
        assert_eq!(t.edges(), &[(0, 1)]);
        assert_eq!(t.degree(0), 1);
    }

    #[test]
    fn path_laplacian() {
        let t = NetworkTopology::build(&[3], &[(id(1, 1), id(1, 2)), (id(1, 2), id(1, 3))]).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]);
        assert_eq!(t.laplacian(0).unwrap(), &expected);
        assert!(matches!(t.laplacian(1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn row_laplacian_of_k2() {
        let t = NetworkTopology::build(&[2], &[(id(1, 1), id(1, 2))]).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![1.0, -1.0, 0.0, 0.0], vec![0.0, 0.0, -1.0, 1.0]]);
        assert_eq!(t.row_laplacian(0).unwrap(), &expected);
    }

    #[test]
    fn two_agent_consensus_constants() {
        let t = NetworkTopology::build(&[2], &[(id(1, 1), id(1, 2))]).unwrap();
        assert_eq!(t.h_params(), &[3.0, 3.0]);
        let w = t.weights();
        assert!((w[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(w[(0, 0)], 0.0);
        // Neighbour target: 1 − 1/3 − 1/3; self target: 1 − 1/3 − 0.
        assert!((t.wbar()[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.wbar()[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        let c = t.mixing(0).unwrap();
        assert!((c[(0, 0)] - 0.5).abs() < 1e-15 && (c[(0, 1)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn agent_labels() {
        assert_eq!(id(3, 1).to_string(), "31");
        assert_eq!(AgentId::new(9, 0).to_string(), "10_1");
        let t = example_topology();
        assert_eq!(t.flat_index(id(2, 5)).unwrap(), 8);
        assert_eq!(t.agent_id(8), id(2, 5));
        assert!(t.flat_index(id(1, 5)).is_err());
    }

    #[test]
    fn dense_operator_matches_factored_form() {
        let t = example_topology();
        let n = t.n_sum();
        let v: Vec<f64> = (0..n * n).map(|k| ((k * 37 % 101) as f64) / 7.0 - 3.0).collect();
        let mut factored = vec![0.0; n * n];
        t.apply_consensus_operator(&v, &mut factored);
        let dense = t.consensus_operator_dense().matvec(&v);
        for (a, b) in factored.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
        // Row sums are 1 − w_a^p.
        let sums = t.consensus_row_sums();
        for a in 0..n {
            for p in 0..n {
                assert!((sums[a * n + p] - (1.0 - t.weights()[(a, p)])).abs() < 1e-15);
            }
        }
    }
}
