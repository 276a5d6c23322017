//! Successive-shortest-path min-cost flow for degree-constrained bipartite
//! subgraphs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

struct Arc {
    to: usize,
    cap: i64,
    cost: i64,
}

struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network { arcs: Vec::new(), out: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.out[from].push(id);
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost });
        self.out[to].push(id + 1);
        id
    }
}

/// Pairs `(row, col)` of a maximum-weight subgraph with row degree at most
/// `cap1` and column degree at most `cap2`. Only positive weights are used.
pub fn max_weight_b_matching(weights: &[Vec<i64>], cap1: usize, cap2: usize) -> Vec<(usize, usize)> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, |r| r.len());
    let (source, sink) = (rows + cols, rows + cols + 1);
    let mut net = Network::new(rows + cols + 2);
    for i in 0..rows {
        net.add(source, i, cap1 as i64, 0);
    }
    let mut pair_arcs = Vec::new();
    for (i, row) in weights.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w > 0 {
                pair_arcs.push((net.add(i, rows + j, 1, -w), i, j));
            }
        }
    }
    for j in 0..cols {
        net.add(rows + j, sink, cap2 as i64, 0);
    }

    // initial potentials: the network is a DAG source -> rows -> cols -> sink
    let mut pot = vec![0i64; rows + cols + 2];
    for &(arc, _, j) in &pair_arcs {
        pot[rows + j] = pot[rows + j].min(net.arcs[arc].cost);
    }
    pot[sink] = (rows..rows + cols).map(|c| pot[c]).min().unwrap_or(0);

    let nodes = rows + cols + 2;
    loop {
        const INF: i64 = i64::MAX / 4;
        let mut dist = vec![INF; nodes];
        let mut via = vec![usize::MAX; nodes];
        dist[source] = 0;
        let mut heap = BinaryHeap::from([Reverse((0i64, source))]);
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &a in &net.out[u] {
                let arc = &net.arcs[a];
                if arc.cap <= 0 {
                    continue;
                }
                let nd = d + arc.cost + pot[u] - pot[arc.to];
                if nd < dist[arc.to] {
                    dist[arc.to] = nd;
                    via[arc.to] = a;
                    heap.push(Reverse((nd, arc.to)));
                }
            }
        }
        if dist[sink] == INF {
            break;
        }
        for v in 0..nodes {
            if dist[v] < INF {
                pot[v] += dist[v];
            }
        }
        // true path cost; stop once another unit no longer gains weight
        if pot[sink] - pot[source] >= 0 {
            break;
        }
        let mut v = sink;
        while v != source {
            let a = via[v];
            net.arcs[a].cap -= 1;
            net.arcs[a ^ 1].cap += 1;
            v = net.arcs[a ^ 1].to;
        }
    }
    let mut out: Vec<(usize, usize)> =
        pair_arcs.iter().filter(|(a, _, _)| net.arcs[*a].cap == 0).map(|&(_, i, j)| (i, j)).collect();
    out.sort_unstable();
    out
}
