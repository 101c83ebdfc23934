//! Dinic max-flow on integer capacities.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, capacity: i64) {
        self.head[from].push(self.to.len());
        self.to.push(to);
        self.cap.push(capacity);
        self.head[to].push(self.to.len());
        self.to.push(from);
        self.cap.push(0);
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> i64 {
        let n = self.head.len();
        let mut total = 0;
        let mut level = vec![usize::MAX; n];
        let mut cursor = vec![0usize; n];
        loop {
            level.fill(usize::MAX);
            level[source] = 0;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[sink] == usize::MAX {
                return total;
            }
            cursor.fill(0);
            loop {
                let pushed = self.augment(source, sink, i64::MAX, &level, &mut cursor);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(
        &mut self,
        u: usize,
        sink: usize,
        limit: i64,
        level: &[usize],
        cursor: &mut [usize],
    ) -> i64 {
        if u == sink {
            return limit;
        }
        while cursor[u] < self.head[u].len() {
            let e = self.head[u][cursor[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let pushed = self.augment(v, sink, limit.min(self.cap[e]), level, cursor);
                if pushed > 0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            cursor[u] += 1;
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        // CLRS figure 26.1: max flow 23.
        let mut g = FlowNetwork::new(6);
        for &(u, v, c) in &[
            (0, 1, 16),
            (0, 2, 13),
            (2, 1, 4),
            (1, 3, 12),
            (3, 2, 9),
            (2, 4, 14),
            (4, 3, 7),
            (3, 5, 20),
            (4, 5, 4),
        ] {
            g.add_edge(u, v, c);
        }
        assert_eq!(g.max_flow(0, 5), 23);
    }

    #[test]
    fn disconnected_sink() {
        let mut g = FlowNetwork::new(3);
        g.add_edge(0, 1, 5);
        assert_eq!(g.max_flow(0, 2), 0);
    }
}
